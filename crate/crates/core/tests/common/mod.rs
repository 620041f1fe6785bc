#![allow(dead_code)]

pub mod criteria;

use kltl_synth::env_model::{EnvironmentModel, RawTransition};
use kltl_synth::formula::{check_positive, Formula};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn case_path(name: &str) -> String {
    format!("{}/cases/{}", env!("CARGO_MANIFEST_DIR"), name)
}

pub fn read_case(name: &str) -> String {
    std::fs::read_to_string(case_path(name)).unwrap()
}

/// Random deadlock-free model over props `p q` with at most `max_states` states.
pub fn random_model(r: &mut impl Rng, max_states: usize) -> EnvironmentModel {
    let n = r.gen_range(1..=max_states);
    let nsys = r.gen_range(1..=2);
    let nenv = r.gen_range(1..=2);
    let labels: Vec<u64> = (0..n).map(|_| r.gen_range(0..4)).collect();
    let visible = vec![r.gen_bool(0.5), r.gen_bool(0.5)];
    let mut transitions: Vec<RawTransition> = Vec::new();
    for s in 0..n {
        for a in 0..nsys {
            for b in 0..nenv {
                transitions.push((s, a, b, r.gen_range(0..n)));
                if r.gen_bool(0.3) {
                    transitions.push((s, a, b, r.gen_range(0..n)));
                }
            }
        }
    }
    let mut states: Vec<usize> = (0..n).collect();
    states.shuffle(r);
    let init = states[..r.gen_range(1..=n)].to_vec();
    EnvironmentModel::new(
        vec!["p".into(), "q".into()],
        visible,
        (0..nsys).map(|i| format!("a{i}")).collect(),
        (0..nenv).map(|i| format!("b{i}")).collect(),
        (0..n).map(|i| format!("s{i}")).collect(),
        labels,
        init,
        &transitions,
    )
    .unwrap()
}

/// Random formula of exactly `size` nodes over `p q true false`.
pub fn random_formula(r: &mut impl Rng, size: usize, with_know: bool) -> Formula {
    if size == 1 {
        return match r.gen_range(0..4) {
            0 => kltl_synth::formula::atom("p"),
            1 => kltl_synth::formula::atom("q"),
            2 => Formula::True,
            _ => Formula::False,
        };
    }
    let unary = if with_know { 5 } else { 4 };
    if size == 2 || r.gen_bool(0.5) {
        let sub = random_formula(r, size - 1, with_know);
        return match r.gen_range(0..unary) {
            0 => Formula::not(sub),
            1 => Formula::next(sub),
            2 => Formula::always(sub),
            3 => Formula::eventually(sub),
            _ => Formula::know(sub),
        };
    }
    let left = r.gen_range(1..size - 1);
    let a = random_formula(r, left, with_know);
    let b = random_formula(r, size - 1 - left, with_know);
    match r.gen_range(0..3) {
        0 => Formula::and(a, b),
        1 => Formula::or(a, b),
        _ => Formula::until(a, b),
    }
}

/// Random positive KLTL formula of size at most `max_size`.
pub fn random_positive_formula(r: &mut impl Rng, max_size: usize) -> Formula {
    loop {
        let size = r.gen_range(1..=max_size);
        let f = random_formula(r, size, true);
        if check_positive(&f).is_ok() {
            return f;
        }
    }
}

/// Every formula over `p q true false` with `¬ X G F ∧ ∨ U`, by size, up to `max_size`.
pub fn all_formulas(max_size: usize) -> Vec<Vec<Formula>> {
    let mut by_size: Vec<Vec<Formula>> = vec![Vec::new(); max_size + 1];
    if max_size == 0 {
        return by_size;
    }
    by_size[1] = vec![
        kltl_synth::formula::atom("p"),
        kltl_synth::formula::atom("q"),
        Formula::True,
        Formula::False,
    ];
    for size in 2..=max_size {
        let mut out = Vec::new();
        for f in &by_size[size - 1] {
            out.push(Formula::not(f.clone()));
            out.push(Formula::next(f.clone()));
            out.push(Formula::always(f.clone()));
            out.push(Formula::eventually(f.clone()));
        }
        for left in 1..size - 1 {
            for a in &by_size[left] {
                for b in &by_size[size - 1 - left] {
                    out.push(Formula::and(a.clone(), b.clone()));
                    out.push(Formula::or(a.clone(), b.clone()));
                    out.push(Formula::until(a.clone(), b.clone()));
                }
            }
        }
        by_size[size] = out;
    }
    by_size
}
