//! Acceptance checks, parameterized by corpus size so that the regular test
//! files can run reduced versions.

use std::time::{Duration, Instant};

use kltl_synth::cli::cmd_validate;
use kltl_synth::env_model::{parse_model, EnvironmentModel};
use kltl_synth::formula::{parse, rewrite_chain, Formula};
use kltl_synth::game::{
    antichain_iterates, choose, down_flags, explore, incremental_solve, is_safe, leq, solve,
    successor, Arena, BoundSchedule, GamePosition, SolveOutcome, Successor, Verdict,
    DEFAULT_POSITION_CAP,
};
use kltl_synth::oracle::{
    brute_force_realizability, knowledge_coherence, ltl_eval_lasso, validate_strategy,
    ValidationMode,
};
use kltl_synth::strategy::{all_observation_runs, extract, minimize, MooreMachine};
use kltl_synth::tree_automata::{compose_chain, Uct};
use kltl_synth::word_automata::{ltl_to_ucw, Alphabet, Lasso};
use rand::Rng;

use super::{all_formulas, random_model, random_positive_formula, read_case, rng};

/// A realizable instance together with the strategy produced for it.
pub struct Realized {
    pub label: String,
    pub model_text: String,
    pub formula: String,
    pub machine: MooreMachine,
}

pub struct Outcome {
    pub pass: bool,
    pub detail: String,
    pub realized: Vec<Realized>,
}

impl Outcome {
    fn new(pass: bool, detail: String) -> Self {
        Outcome {
            pass,
            detail,
            realized: Vec::new(),
        }
    }
}

fn load(model: &str, formula: &str) -> (EnvironmentModel, Formula, String) {
    let text = read_case(model);
    let m = parse_model(&text).unwrap();
    let f = parse(read_case(formula).trim()).unwrap();
    (m, f, text)
}

/// Solves incrementally, extracts, minimizes and validates.
fn synthesize(
    model: &EnvironmentModel,
    phi: &Formula,
    max: u8,
) -> Result<(u8, usize, MooreMachine, Duration), String> {
    let t = Instant::now();
    let mut uct = compose_chain(model, &rewrite_chain(phi)).map_err(|e| e.to_string())?;
    let (verdict, _) = incremental_solve(
        &mut uct,
        BoundSchedule { start: 0, max },
        DEFAULT_POSITION_CAP,
    )
    .map_err(|e| e.to_string())?;
    let Verdict::Realizable { bound, solution } = verdict else {
        return Err(format!("no strategy up to b = {max}"));
    };
    let machine = minimize(&extract(&uct, &solution).map_err(|e| e.to_string())?);
    let elapsed = t.elapsed();
    let report = validate_strategy(model, &machine, phi, ValidationMode::Automata)
        .map_err(|e| e.to_string())?;
    if !report.ok {
        return Err(format!(
            "strategy rejected: {}",
            report.reason.unwrap_or_default()
        ));
    }
    Ok((bound, uct.num_materialized(), machine, elapsed))
}

pub fn light_switch() -> Outcome {
    let (model, phi, text) = load("light_switch.model", "light_switch.kltl");
    let (bound, uct_states, machine, elapsed) = match synthesize(&model, &phi, 4) {
        Ok(r) => r,
        Err(e) => return Outcome::new(false, e),
    };
    let t = model.action_index("T").unwrap();
    let s = model.action_index("S").unwrap();
    let mut runs = 0;
    let mut shape = true;
    for (_, run) in all_observation_runs(&machine, &model, 8) {
        let Ok(steps) = run else { continue };
        runs += 1;
        let actions: Vec<usize> = steps.iter().map(|st| st.1).collect();
        shape &= actions[0] == t && actions[1..].iter().all(|&a| a == s);
        shape &= steps.iter().all(|st| !machine.states[st.0].error);
    }
    let pass = bound <= 4 && shape && runs > 0 && elapsed < Duration::from_secs(5);
    let mut out = Outcome::new(
        pass,
        format!(
            "b = {bound}, UCT {uct_states} states, strategy {} states, T then S on {runs} runs: {shape}, {:.2?}",
            machine.len(),
            elapsed
        ),
    );
    out.realized.push(Realized {
        label: "light switch".into(),
        model_text: text,
        formula: phi.to_string(),
        machine,
    });
    out
}

pub fn light_switch_unrealizable() -> Outcome {
    let (model, phi, _) = load("light_switch.model", "light_switch.kltl");
    let model = model
        .with_init(&model.resolve_states("s2,s3").unwrap())
        .unwrap();
    let t = Instant::now();
    let mut uct = compose_chain(&model, &rewrite_chain(&phi)).unwrap();
    let res = incremental_solve(
        &mut uct,
        BoundSchedule { start: 0, max: 16 },
        DEFAULT_POSITION_CAP,
    );
    let elapsed = t.elapsed();
    match res {
        Ok((Verdict::Unknown { max_bound }, stats)) => Outcome::new(
            max_bound == 16 && stats.len() == 17 && elapsed < Duration::from_secs(30),
            format!("UNKNOWN up to b = {max_bound}, {:.2?}", elapsed),
        ),
        Ok((Verdict::Realizable { bound, .. }, _)) => {
            Outcome::new(false, format!("unexpected REALIZABLE at b = {bound}"))
        }
        Err(e) => Outcome::new(false, e.to_string()),
    }
}

pub fn coins() -> Outcome {
    let (model, phi, text) = load("coins3.model", "coins3.kltl");
    let (bound, uct_states, machine, elapsed) = match synthesize(&model, &phi, 16) {
        Ok(r) => r,
        Err(e) => return Outcome::new(false, e),
    };
    let all_heads = model.resolve_states("hhh").unwrap()[0];
    let mut runs = 0;
    let mut reached = 0;
    for (_, run) in all_observation_runs(&machine, &model, 8) {
        let Ok(steps) = run else { continue };
        runs += 1;
        let knows = steps
            .iter()
            .any(|st| st.2.len() == 1 && st.2.contains(all_heads));
        reached += knows as usize;
    }
    let pass =
        runs > 0 && reached == runs && machine.len() <= 32 && elapsed < Duration::from_secs(120);
    let mut out = Outcome::new(
        pass,
        format!(
            "b = {bound}, UCT {uct_states} states, strategy {} states, all-heads knowledge on {reached}/{runs} runs, {:.2?}",
            machine.len(),
            elapsed
        ),
    );
    out.realized.push(Realized {
        label: "coins".into(),
        model_text: text,
        formula: phi.to_string(),
        machine,
    });
    out
}

pub fn prisoners() -> Outcome {
    let (model, phi, text) = load("prisoners3.model", "prisoners3.kltl");
    let (bound, uct_states, machine, elapsed) = match synthesize(&model, &phi, 16) {
        Ok(r) => r,
        Err(e) => return Outcome::new(false, e),
    };
    let mut out = Outcome::new(
        elapsed < Duration::from_secs(300),
        format!(
            "b = {bound}, UCT {uct_states} states, strategy {} states, {:.2?}",
            machine.len(),
            elapsed
        ),
    );
    out.realized.push(Realized {
        label: "prisoners".into(),
        model_text: text,
        formula: phi.to_string(),
        machine,
    });
    out
}

/// Agreement of automaton acceptance with direct evaluation on every
/// formula up to `max_size` and every lasso up to length `max_len`.
pub fn word_automata(max_size: usize, max_len: usize) -> Outcome {
    let ab = Alphabet::new(vec!["p".into(), "q".into()]).unwrap();
    let lassos = Lasso::enumerate(2, max_len);
    let mut formulas = 0;
    let mut checks = 0usize;
    let mut mismatches = Vec::new();
    for f in all_formulas(max_size).into_iter().flatten() {
        formulas += 1;
        let ucw = ltl_to_ucw(&f, &ab).unwrap();
        for w in &lassos {
            checks += 1;
            if ucw.accepts_lasso(w) != ltl_eval_lasso(&f, &ab, w) {
                if mismatches.len() < 3 {
                    mismatches.push(format!("{f} on {w:?}"));
                }
                break;
            }
        }
    }
    Outcome::new(
        mismatches.is_empty(),
        format!(
            "{formulas} formulas x {} lassos, {checks} checks, mismatches: {}",
            lassos.len(),
            if mismatches.is_empty() {
                "none".into()
            } else {
                mismatches.join("; ")
            }
        ),
    )
}

fn random_arena(r: &mut impl Rng, b: u8) -> Option<(Uct, Arena)> {
    let model = random_model(r, 3);
    let phi = random_positive_formula(r, 6);
    let mut uct = compose_chain(&model, &rewrite_chain(&phi)).ok()?;
    let arena = explore(&mut uct, b, 20_000).ok()??;
    Some((uct, arena))
}

/// A position below `p`: entries dropped and counts lowered at random.
fn shrink(r: &mut impl Rng, p: &GamePosition) -> GamePosition {
    let mut q = p.clone();
    q.entries.retain(|_| r.gen_bool(0.7));
    for e in &mut q.entries {
        if e.count > 0 && r.gen_bool(0.3) {
            e.count -= 1;
        }
    }
    q
}

fn note(v: &mut Vec<String>, s: String) {
    if v.len() < 3 {
        v.push(s);
    }
}

/// Jacobi iterates of the controllable predecessor, from all arena positions.
fn iterates(arena: &Arena) -> Vec<Vec<bool>> {
    let mut alive = vec![true; arena.len()];
    let mut out = vec![alive.clone()];
    loop {
        let next: Vec<bool> = (0..arena.len())
            .map(|p| alive[p] && choose(arena, &alive, p as u32).is_some())
            .collect();
        if next == alive {
            return out;
        }
        out.push(next.clone());
        alive = next;
    }
}

/// Downward closure of every fixpoint iterate, canonicity of the antichain
/// iterates, and agreement of their closures with the fixpoint iterates.
fn check_arena(uct: &Uct, arena: &Arena, violations: &mut Vec<String>) {
    let pos = &arena.positions;
    let ws = iterates(arena);
    for w in &ws {
        for p in 0..arena.len() {
            if !w[p] {
                continue;
            }
            for q in 0..arena.len() {
                if !w[q] && leq(uct, &pos[q], &pos[p]) {
                    note(
                        violations,
                        format!("iterate not downward closed ({q} below {p})"),
                    );
                }
            }
        }
    }
    let xs = antichain_iterates(uct, arena);
    let order = |a: &u32, c: &u32| leq(uct, &pos[*a as usize], &pos[*c as usize]);
    for (i, x) in xs.iter().enumerate() {
        if !x.is_canonical(order) {
            note(violations, format!("antichain iterate {i} not canonical"));
        }
        let w = &ws[i.min(ws.len() - 1)];
        if &down_flags(uct, arena, x) != w {
            note(
                violations,
                format!("antichain iterate {i} differs from fixpoint"),
            );
        }
    }
    if xs.len() != ws.len() {
        note(violations, "iterate counts differ".into());
    }
}

pub fn game_properties(seed: u64, target: usize) -> Outcome {
    let mut r = rng(seed);
    let mut violations = Vec::new();

    // successor monotonicity on pairs p1 ⪯ p2
    let mut pairs = 0;
    while pairs < target {
        let b = r.gen_range(0..3);
        let Some((mut uct, arena)) = random_arena(&mut r, b) else {
            continue;
        };
        for _ in 0..8 {
            let p2 = arena.positions[r.gen_range(0..arena.len())].clone();
            let p1 = if r.gen_bool(0.5) {
                shrink(&mut r, &p2)
            } else {
                arena.positions[r.gen_range(0..arena.len())].clone()
            };
            if !leq(&uct, &p1, &p2) || p1 == p2 {
                continue;
            }
            pairs += 1;
            if is_safe(&p2, b) && !is_safe(&p1, b) {
                note(&mut violations, "safety not downward closed".into());
            }
            for ea in 0..arena.nea {
                for o in 0..arena.nobs {
                    let s1 = successor(&mut uct, &p1, ea, o, b);
                    let s2 = successor(&mut uct, &p2, ea, o, b);
                    let ok = match (&s1, &s2) {
                        (Successor::Dead, _) => true,
                        (Successor::Pos(_), Successor::Dead) => false,
                        (Successor::Pos(a), Successor::Pos(c)) => leq(&uct, a, c),
                    };
                    if !ok {
                        note(
                            &mut violations,
                            format!("successor order broken on ea {ea}, o {o}"),
                        );
                    }
                }
            }
        }
    }

    // downward closure of iterates, canonicity, agreement with antichains
    let mut instances = 0;
    let mut positions = 0;
    while instances < target {
        let b = r.gen_range(0..3);
        let Some((uct, arena)) = random_arena(&mut r, b) else {
            continue;
        };
        if arena.len() < 4 || arena.len() > 400 {
            continue;
        }
        instances += 1;
        positions += arena.len();
        check_arena(&uct, &arena, &mut violations);
    }
    let mut case_positions = 0;
    for (model, formula) in [
        ("light_switch.model", "light_switch.kltl"),
        ("coins3.model", "coins3.kltl"),
        ("prisoners3.model", "prisoners3.kltl"),
    ] {
        let (m, phi, _) = load(model, formula);
        let mut uct = compose_chain(&m, &rewrite_chain(&phi)).unwrap();
        for b in 0..3 {
            if let Ok(Some(arena)) = explore(&mut uct, b, 1500) {
                case_positions += arena.len();
                check_arena(&uct, &arena, &mut violations);
            }
        }
    }

    // bound monotonicity
    let mut bound_instances = 0;
    while bound_instances < target {
        let model = random_model(&mut r, 3);
        let phi = random_positive_formula(&mut r, 5);
        let mut uct = compose_chain(&model, &rewrite_chain(&phi)).unwrap();
        let mut verdicts = Vec::new();
        let mut too_large = false;
        for b in 0..4 {
            match solve(&mut uct, b, 200_000) {
                Ok((o, _)) => verdicts.push(matches!(o, SolveOutcome::Realizable(_))),
                Err(_) => too_large = true,
            }
        }
        if too_large {
            continue;
        }
        bound_instances += 1;
        if verdicts.windows(2).any(|w| w[0] && !w[1]) {
            note(
                &mut violations,
                format!("{phi}: realizable at a bound but not above it"),
            );
        }
    }

    Outcome::new(
        violations.is_empty(),
        format!(
            "{pairs} ordered pairs, {instances} random arenas ({positions} positions), case arenas ({case_positions} positions), {bound_instances} bound ladders, violations: {}",
            if violations.is_empty() { "none".into() } else { violations.join("; ") }
        ),
    )
}

pub fn oracle_equivalence(seed: u64, count: usize) -> Outcome {
    let mut r = rng(seed);
    let mut mismatches = Vec::new();
    let mut realized = Vec::new();
    let mut with_k = 0;
    for case in 0..count {
        let model = random_model(&mut r, 3);
        let phi = random_positive_formula(&mut r, 4);
        with_k += (phi.k_depth() > 0) as usize;
        let b = (case % 3) as u8;
        let mut uct = compose_chain(&model, &rewrite_chain(&phi)).unwrap();
        let (outcome, _) = solve(&mut uct, b, DEFAULT_POSITION_CAP).unwrap();
        let slow = brute_force_realizability(&model, &phi, b, 1_000_000).unwrap();
        let fast = match outcome {
            SolveOutcome::Realizable(sol) => {
                realized.push(Realized {
                    label: format!("random instance {case}"),
                    model_text: model.to_text(),
                    formula: phi.to_string(),
                    machine: minimize(&extract(&uct, &sol).unwrap()),
                });
                true
            }
            SolveOutcome::UnrealizableAtBound => false,
        };
        if fast != slow && mismatches.len() < 3 {
            mismatches.push(format!("case {case}: {phi} at b = {b}"));
        }
    }
    Outcome {
        pass: mismatches.is_empty(),
        detail: format!(
            "{count} instances ({with_k} with knowledge, {} realizable), mismatches: {}",
            realized.len(),
            if mismatches.is_empty() {
                "none".into()
            } else {
                mismatches.join("; ")
            }
        ),
        realized,
    }
}

pub fn coherence(seed: u64, samples: usize, depth: usize) -> Outcome {
    let mut r = rng(seed);
    let mut parts = Vec::new();
    let mut total = 0;
    for (model, formula) in [
        ("light_switch.model", "light_switch.kltl"),
        ("coins3.model", "coins3.kltl"),
        ("prisoners3.model", "prisoners3.kltl"),
    ] {
        let (m, phi, _) = load(model, formula);
        let mut uct = compose_chain(&m, &rewrite_chain(&phi)).unwrap();
        let v = knowledge_coherence(&mut uct, samples, depth, &mut r);
        total += v.len();
        let example = v
            .first()
            .map(|x| {
                format!(
                    " (first: component {} state {} with {} knowledges after {} steps)",
                    x.component,
                    x.q,
                    x.knowledges.len(),
                    x.history.len()
                )
            })
            .unwrap_or_default();
        parts.push(format!("{model}: {}{example}", v.len()));
    }
    Outcome::new(
        total == 0,
        format!(
            "{samples} histories of length {depth} per case; violations {}",
            parts.join(", ")
        ),
    )
}

/// Round trip of every strategy through JSON files and the validate command.
pub fn closed_loop(realized: &[Realized]) -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let mut failures = Vec::new();
    for (i, item) in realized.iter().enumerate() {
        let model_path = dir.path().join(format!("m{i}.model"));
        let strategy_path = dir.path().join(format!("m{i}.json"));
        std::fs::write(&model_path, &item.model_text).unwrap();
        std::fs::write(&strategy_path, item.machine.to_json()).unwrap();
        let ok = matches!(
            cmd_validate(&model_path, &strategy_path, &item.formula, None, ValidationMode::Automata),
            Ok(r) if r.ok
        );
        if !ok && failures.len() < 3 {
            failures.push(item.label.clone());
        }
    }
    Outcome::new(
        failures.is_empty() && !realized.is_empty(),
        format!(
            "{} strategies re-validated, failures: {}",
            realized.len(),
            if failures.is_empty() {
                "none".into()
            } else {
                failures.join(", ")
            }
        ),
    )
}
