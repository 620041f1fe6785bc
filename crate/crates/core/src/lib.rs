//! Synthesis of finite-memory strategies for positive epistemic LTL
//! specifications against partially observable environment models.

pub mod antichain;
pub mod cli;
pub mod env_model;
pub mod formula;
pub mod game;
pub mod knowledge;
pub mod oracle;
pub mod strategy;
pub mod tree_automata;
pub mod word_automata;
