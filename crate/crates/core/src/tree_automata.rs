//! Knowledge-set universal co-Büchi tree automata, built lazily.
//!
//! A state pairs a word-automaton state with the set of environment states
//! the system considers possible. Knowledge atoms claimed by an e-action
//! spawn universal copies of the automaton for the claimed formula.

use std::collections::HashMap;
use std::fmt::Write as _;

use thiserror::Error;

use crate::env_model::{ActionId, EnvironmentModel, ObsId, StateId};
use crate::formula::{katom_name, Formula, RewriteChain};
use crate::knowledge::Knowledge;
use crate::word_automata::{complement, ltl_to_ucw, Alphabet, AutomatonError, Cube, Ucw};

pub type UctStateId = u32;

/// Id of the absorbing, non-accepting sink.
pub const SINK: UctStateId = 0;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum UctError {
    #[error(transparent)]
    Automaton(#[from] AutomatonError),
    #[error("too many propositions and knowledge atoms ({0}, at most 64)")]
    TooManyLetters(usize),
    #[error("too many knowledge atoms ({0}, at most 16)")]
    TooManyAtoms(usize),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum UctState {
    Pair {
        component: u32,
        q: u32,
        know: Knowledge,
    },
    Sink,
}

/// One word automaton of the composition.
#[derive(Clone, Debug)]
pub struct Component {
    pub formula: Formula,
    pub ucw: Ucw,
    /// The atom this component checks, `None` for the main formula.
    pub atom: Option<usize>,
    /// Atoms whose claims spawn copies from this component.
    pub triggers: u64,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, serde::Serialize)]
pub struct UctStats {
    pub materialized: usize,
    pub sink_hits: usize,
    pub cache_hits: usize,
    pub expansions: usize,
}

/// Lazily materialized UCT over e-actions `Σ₁ × 2^𝕂` and observations.
#[derive(Clone, Debug)]
pub struct Uct {
    pub model: EnvironmentModel,
    pub alphabet: Alphabet,
    pub components: Vec<Component>,
    /// Component index of each atom.
    pub atom_component: Vec<usize>,
    pub atom_names: Vec<String>,
    pub initial: Vec<UctStateId>,
    states: Vec<UctState>,
    index: HashMap<UctState, UctStateId>,
    cache: HashMap<(UctStateId, u32, u32), Box<[UctStateId]>>,
    stats: UctStats,
    inert: Vec<Vec<bool>>,
    doomed: Vec<Vec<bool>>,
}

/// Letter of environment state `s` under claims `claims`.
pub fn letter(model: &EnvironmentModel, s: StateId, claims: u64) -> u64 {
    model.labels[s] | (claims << model.props.len())
}

/// States of `i` whose letter fires some `q → q′` guard.
pub fn restrict(
    model: &EnvironmentModel,
    ucw: &Ucw,
    i: &Knowledge,
    q: usize,
    q_next: usize,
    claims: u64,
) -> Knowledge {
    let edges: Vec<_> = ucw.0.edges[q]
        .iter()
        .filter(|e| e.target == q_next)
        .collect();
    Knowledge::from_iter(
        model.num_states(),
        i.iter().filter(|&s| {
            edges
                .iter()
                .any(|e| e.guard.holds(letter(model, s, claims)))
        }),
    )
}

fn global_alphabet(model: &EnvironmentModel, natoms: usize) -> Result<Alphabet, UctError> {
    let total = model.props.len() + natoms;
    if total > 64 {
        return Err(UctError::TooManyLetters(total));
    }
    let mut names = model.props.clone();
    names.extend((0..natoms).map(katom_name));
    Ok(Alphabet::new(names)?)
}

impl Uct {
    fn assemble(
        model: &EnvironmentModel,
        alphabet: Alphabet,
        components: Vec<Component>,
        atom_component: Vec<usize>,
        init: Knowledge,
    ) -> Self {
        let mut uct = Uct {
            model: model.clone(),
            alphabet,
            atom_names: (0..atom_component.len()).map(katom_name).collect(),
            components,
            atom_component,
            initial: Vec::new(),
            states: vec![UctState::Sink],
            index: HashMap::from([(UctState::Sink, SINK)]),
            cache: HashMap::new(),
            stats: UctStats::default(),
            inert: Vec::new(),
            doomed: Vec::new(),
        };
        for c in &uct.components {
            let (inert, doomed) = classify(&c.ucw);
            // copies in trigger components still source spawned checks
            uct.inert.push(if c.triggers == 0 {
                inert
            } else {
                vec![false; doomed.len()]
            });
            uct.doomed.push(doomed);
        }
        let q0 = uct.components[0].ucw.0.initial as u32;
        let id = uct.intern(UctState::Pair {
            component: 0,
            q: q0,
            know: init,
        });
        uct.initial.push(id);
        uct
    }

    pub fn num_atoms(&self) -> usize {
        self.atom_component.len()
    }

    pub fn num_eactions(&self) -> usize {
        self.model.sys_actions.len() << self.num_atoms()
    }

    pub fn num_observations(&self) -> usize {
        self.model.observations().len()
    }

    /// Projection of an e-action onto the system action.
    pub fn ea_action(&self, ea: usize) -> ActionId {
        ea >> self.num_atoms()
    }

    pub fn ea_claims(&self, ea: usize) -> u64 {
        (ea & ((1 << self.num_atoms()) - 1)) as u64
    }

    pub fn ea_index(&self, action: ActionId, claims: u64) -> usize {
        (action << self.num_atoms()) | claims as usize
    }

    pub fn ea_name(&self, ea: usize) -> String {
        let claims: Vec<&str> = (0..self.num_atoms())
            .filter(|i| self.ea_claims(ea) & (1 << i) != 0)
            .map(|i| self.atom_names[i].as_str())
            .collect();
        format!(
            "({}, {{{}}})",
            self.model.sys_actions[self.ea_action(ea)],
            claims.join(",")
        )
    }

    pub fn state(&self, id: UctStateId) -> &UctState {
        &self.states[id as usize]
    }

    /// Accepting state looping on every letter: a copy here exceeds any bound.
    pub fn is_doomed(&self, id: UctStateId) -> bool {
        match &self.states[id as usize] {
            UctState::Pair { component, q, .. } => self.doomed[*component as usize][*q as usize],
            UctState::Sink => false,
        }
    }

    pub fn is_accepting(&self, id: UctStateId) -> bool {
        match &self.states[id as usize] {
            UctState::Pair { component, q, .. } => {
                self.components[*component as usize].ucw.0.accepting[*q as usize]
            }
            UctState::Sink => false,
        }
    }

    pub fn knowledge(&self, id: UctStateId) -> Option<&Knowledge> {
        match &self.states[id as usize] {
            UctState::Pair { know, .. } => Some(know),
            UctState::Sink => None,
        }
    }

    pub fn stats(&self) -> UctStats {
        UctStats {
            materialized: self.states.len(),
            ..self.stats
        }
    }

    pub fn num_materialized(&self) -> usize {
        self.states.len()
    }

    fn intern(&mut self, st: UctState) -> UctStateId {
        if let Some(&id) = self.index.get(&st) {
            return id;
        }
        let id = self.states.len() as UctStateId;
        self.states.push(st.clone());
        self.index.insert(st, id);
        id
    }

    /// Successors within one component, ignoring triggers.
    #[allow(clippy::too_many_arguments)]
    fn base_successors(
        &mut self,
        component: usize,
        q: usize,
        know: &Knowledge,
        action: ActionId,
        claims: u64,
        o: ObsId,
        out: &mut Vec<UctStateId>,
    ) {
        let ucw = &self.components[component].ucw;
        let mut targets: Vec<usize> = ucw.0.edges[q].iter().map(|e| e.target).collect();
        targets.sort_unstable();
        targets.dedup();
        let mut fresh = Vec::new();
        for t in targets {
            if self.inert[component][t] {
                continue;
            }
            let part = restrict(&self.model, ucw, know, q, t, claims);
            if part.is_empty() {
                continue;
            }
            let next = self.model.post(&part, action, o);
            if !next.is_empty() {
                fresh.push(UctState::Pair {
                    component: component as u32,
                    q: t as u32,
                    know: next,
                });
            }
        }
        for st in fresh {
            let id = self.intern(st);
            if !out.contains(&id) {
                out.push(id);
            }
        }
    }

    /// `Δ(state, ea, o)`, sorted.
    pub fn successors(&mut self, id: UctStateId, ea: usize, o: ObsId) -> &[UctStateId] {
        let key = (id, ea as u32, o as u32);
        if self.cache.contains_key(&key) {
            self.stats.cache_hits += 1;
            return &self.cache[&key];
        }
        self.stats.expansions += 1;
        let action = self.ea_action(ea);
        let claims = self.ea_claims(ea);
        let mut out = Vec::new();
        match self.states[id as usize].clone() {
            UctState::Sink => out.push(SINK),
            UctState::Pair { component, q, know } => {
                if self.model.post(&know, action, o).is_empty() {
                    self.stats.sink_hits += 1;
                    out.push(SINK);
                } else {
                    let c = component as usize;
                    self.base_successors(c, q as usize, &know, action, claims, o, &mut out);
                    let fired = self.components[c].triggers & claims;
                    for atom in 0..self.num_atoms() {
                        if fired & (1 << atom) == 0 {
                            continue;
                        }
                        let sub = self.atom_component[atom];
                        let q0 = self.components[sub].ucw.0.initial;
                        self.base_successors(sub, q0, &know, action, claims, o, &mut out);
                    }
                }
            }
        }
        out.sort_unstable();
        self.cache.insert(key, out.into_boxed_slice());
        &self.cache[&key]
    }

    /// Materializes every state reachable under any e-action and observation,
    /// up to `cap` states. Returns the number of reachable states.
    pub fn expand_all(&mut self, cap: usize) -> usize {
        let mut seen: Vec<bool> = vec![false; self.states.len()];
        let mut stack: Vec<UctStateId> = self.initial.clone();
        for &i in &stack {
            seen[i as usize] = true;
        }
        let mut count = stack.len();
        while let Some(id) = stack.pop() {
            if count >= cap {
                break;
            }
            for ea in 0..self.num_eactions() {
                for o in 0..self.num_observations() {
                    let succ = self.successors(id, ea, o).to_vec();
                    for t in succ {
                        if seen.len() <= t as usize {
                            seen.resize(self.states.len(), false);
                        }
                        if !seen[t as usize] {
                            seen[t as usize] = true;
                            count += 1;
                            stack.push(t);
                        }
                    }
                }
            }
        }
        count
    }

    /// Textual dump of the materialized part.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for (id, st) in self.states.iter().enumerate() {
            match st {
                UctState::Sink => {
                    let _ = writeln!(out, "{id}: sink");
                }
                UctState::Pair { component, q, know } => {
                    let names: Vec<&str> =
                        know.iter().map(|s| self.model.states[s].as_str()).collect();
                    let acc = if self.is_accepting(id as UctStateId) {
                        " *"
                    } else {
                        ""
                    };
                    let _ = writeln!(out, "{id}: c{component} q{q} {{{}}}{acc}", names.join(","));
                }
            }
        }
        let mut keys: Vec<_> = self.cache.keys().copied().collect();
        keys.sort_unstable();
        for k in keys {
            let _ = writeln!(
                out,
                "{} --{} / {}--> {:?}",
                k.0,
                self.ea_name(k.1 as usize),
                k.2,
                self.cache[&k]
            );
        }
        out
    }
}

/// Per state: no accepting state is reachable (`inert`), or the state is
/// accepting with a self-loop on every letter (`doomed`).
fn classify(ucw: &Ucw) -> (Vec<bool>, Vec<bool>) {
    let aut = ucw.automaton();
    let n = aut.num_states();
    let mut live = aut.accepting.clone();
    let mut changed = true;
    while changed {
        changed = false;
        for q in 0..n {
            if !live[q] && aut.edges[q].iter().any(|e| live[e.target]) {
                live[q] = true;
                changed = true;
            }
        }
    }
    let doomed = (0..n)
        .map(|q| {
            let loops: Vec<Cube> = aut.edges[q]
                .iter()
                .filter(|e| e.target == q)
                .map(|e| e.guard)
                .collect();
            aut.accepting[q] && !loops.is_empty() && complement(&loops).is_empty()
        })
        .collect();
    (live.into_iter().map(|l| !l).collect(), doomed)
}

/// UCT for a Know-free formula from initial knowledge `init`, with no triggers.
pub fn build_ltl_uct(
    model: &EnvironmentModel,
    psi: &Formula,
    init: &Knowledge,
) -> Result<Uct, UctError> {
    let natoms = psi.katoms().into_iter().map(|i| i + 1).max().unwrap_or(0);
    let alphabet = global_alphabet(model, natoms)?;
    let ucw = ltl_to_ucw(psi, &alphabet)?;
    let components = vec![Component {
        formula: psi.clone(),
        ucw,
        atom: None,
        triggers: 0,
    }];
    // atoms of psi stay free letters: claimable, but never checked
    let atom_component = vec![usize::MAX; natoms];
    Ok(Uct::assemble(
        model,
        alphabet,
        components,
        atom_component,
        init.clone(),
    ))
}

/// Composition for a rewrite chain: the main automaton checks `φᵈ`; a claim
/// of atom `k` on a transition of a component whose stage covers `k` spawns
/// the automaton of `k`'s body from the current knowledge.
pub fn compose_chain(model: &EnvironmentModel, chain: &RewriteChain) -> Result<Uct, UctError> {
    let natoms = chain.atoms.len();
    if natoms > 16 {
        return Err(UctError::TooManyAtoms(natoms));
    }
    let alphabet = global_alphabet(model, natoms)?;
    let trigger_mask = |stage: usize| -> u64 {
        (1..=stage)
            .flat_map(|j| chain.atoms_at(j))
            .fold(0, |m, a| m | 1 << a)
    };
    let mut components = vec![Component {
        formula: chain.top().clone(),
        ucw: ltl_to_ucw(chain.top(), &alphabet)?,
        atom: None,
        triggers: trigger_mask(chain.depth()),
    }];
    let mut atom_component = Vec::new();
    for atom in &chain.atoms {
        atom_component.push(components.len());
        components.push(Component {
            formula: atom.body.clone(),
            ucw: ltl_to_ucw(&atom.body, &alphabet)?,
            atom: Some(atom.index),
            triggers: trigger_mask(atom.level - 1),
        });
    }
    Ok(Uct::assemble(
        model,
        alphabet,
        components,
        atom_component,
        model.init.clone(),
    ))
}
