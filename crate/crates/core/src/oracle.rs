//! Independent checkers: direct LTL evaluation on lassos, an explicit
//! game solver for tiny instances, and a knowledge-tracking model checker
//! for strategies.

use std::collections::{BTreeSet, HashMap, VecDeque};

use rand::Rng;
use thiserror::Error;

use crate::env_model::{ActionId, EnvironmentModel, ObsId, StateId};
use crate::formula::{katom_name, rewrite_chain, Formula};
use crate::knowledge::Knowledge;
use crate::strategy::{MooreMachine, StrategyError};
use crate::tree_automata::{Uct, UctState, UctStateId, SINK};
use crate::word_automata::{ltl_to_nbw, ltl_to_ucw, Alphabet, AutomatonError, Nbw, Ucw};

pub use crate::word_automata::Lasso;

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("instance too large: more than {0} positions")]
    InstanceTooLarge(usize),
    #[error(transparent)]
    Automaton(#[from] AutomatonError),
    #[error(transparent)]
    Strategy(#[from] StrategyError),
    #[error("unknown proposition `{0}`")]
    UnknownProposition(String),
}

// ---------------------------------------------------------------------------
// LTL on lassos

/// Truth of a Know-free formula at position 0 of `prefix · cycle^ω`.
/// Atoms (including `k#i`) are looked up in `alphabet`.
pub fn ltl_eval_lasso(f: &Formula, alphabet: &Alphabet, w: &Lasso) -> bool {
    eval_positions(f, alphabet, w)[0]
}

fn eval_positions(f: &Formula, ab: &Alphabet, w: &Lasso) -> Vec<bool> {
    use Formula::*;
    let p = w.prefix.len();
    let n = p + w.cycle.len();
    let succ = |i: usize| if i + 1 == n { p } else { i + 1 };
    let letter = |i: usize| if i < p { w.prefix[i] } else { w.cycle[i - p] };
    let prop = |name: &str| {
        let bit = ab.index(name).expect("proposition in alphabet");
        (0..n)
            .map(|i| letter(i) & (1 << bit) != 0)
            .collect::<Vec<_>>()
    };
    // fixpoint over the successor structure: seed, then iterate n times
    let fix = |seed: bool, step: &dyn Fn(usize, &[bool]) -> bool| {
        let mut v = vec![seed; n];
        for _ in 0..=n {
            v = (0..n).map(|i| step(i, &v)).collect();
        }
        v
    };
    match f {
        True => vec![true; n],
        False => vec![false; n],
        Atom(name) => prop(name),
        KAtom(i) => prop(&katom_name(*i)),
        Not(a) => eval_positions(a, ab, w).into_iter().map(|x| !x).collect(),
        And(a, b) | Or(a, b) => {
            let (x, y) = (eval_positions(a, ab, w), eval_positions(b, ab, w));
            let and = matches!(f, And(..));
            x.iter()
                .zip(&y)
                .map(|(&u, &v)| if and { u && v } else { u || v })
                .collect()
        }
        Next(a) => {
            let x = eval_positions(a, ab, w);
            (0..n).map(|i| x[succ(i)]).collect()
        }
        Until(a, b) => {
            let (x, y) = (eval_positions(a, ab, w), eval_positions(b, ab, w));
            fix(false, &|i, v| y[i] || (x[i] && v[succ(i)]))
        }
        Eventually(a) => {
            let x = eval_positions(a, ab, w);
            fix(false, &|i, v| x[i] || v[succ(i)])
        }
        Always(a) => {
            let x = eval_positions(a, ab, w);
            fix(true, &|i, v| x[i] && v[succ(i)])
        }
        Know(_) => panic!("knowledge operator in lasso evaluation"),
    }
}

// ---------------------------------------------------------------------------
// Explicit game

fn shared_alphabet(model: &EnvironmentModel, natoms: usize) -> Result<Alphabet, OracleError> {
    let mut names = model.props.clone();
    names.extend((0..natoms).map(katom_name));
    Ok(Alphabet::new(names)?)
}

/// Eagerly enumerated UCT: state `0` is the sink, then every
/// `(component, q, nonempty I)` in lexicographic order.
struct ExplicitUct {
    ucws: Vec<Ucw>,
    triggers: Vec<u64>,
    atom_comp: Vec<usize>,
    offsets: Vec<usize>,
    nsets: usize,
    total: usize,
}

impl ExplicitUct {
    fn id(&self, c: usize, q: usize, set: usize) -> usize {
        1 + self.offsets[c] + q * self.nsets + (set - 1)
    }

    fn decode(&self, id: usize) -> (usize, usize, usize) {
        let rest = id - 1;
        let c = self.offsets.iter().rposition(|&o| o <= rest).unwrap();
        let local = rest - self.offsets[c];
        (c, local / self.nsets, local % self.nsets + 1)
    }

    fn accepting(&self, id: usize) -> bool {
        if id == 0 {
            return false;
        }
        let (c, q, _) = self.decode(id);
        self.ucws[c].0.accepting[q]
    }
}

fn set_post(model: &EnvironmentModel, set: usize, a: ActionId, o: ObsId) -> usize {
    let mut out = 0usize;
    for s in 0..model.num_states() {
        if set & (1 << s) == 0 {
            continue;
        }
        for &(_, t) in &model.trans[s][a] {
            if model.obs_of(t) == o {
                out |= 1 << t;
            }
        }
    }
    out
}

fn explicit_moves(
    model: &EnvironmentModel,
    u: &ExplicitUct,
    id: usize,
    a: ActionId,
    claims: u64,
    o: ObsId,
) -> Vec<usize> {
    if id == 0 {
        return vec![0];
    }
    let (c, q, set) = u.decode(id);
    if set_post(model, set, a, o) == 0 {
        return vec![0];
    }
    let np = model.props.len();
    let mut out = Vec::new();
    let spawn = |comp: usize, from: usize, out: &mut Vec<usize>| {
        let aut = &u.ucws[comp].0;
        let mut targets: Vec<usize> = aut.edges[from].iter().map(|e| e.target).collect();
        targets.sort_unstable();
        targets.dedup();
        for t in targets {
            let mut part = 0usize;
            for s in 0..model.num_states() {
                let fires = aut.edges[from]
                    .iter()
                    .any(|e| e.target == t && e.guard.holds(model.labels[s] | claims << np));
                if set & (1 << s) != 0 && fires {
                    part |= 1 << s;
                }
            }
            let next = set_post(model, part, a, o);
            if next != 0 {
                out.push(u.id(comp, t, next));
            }
        }
    };
    spawn(c, q, &mut out);
    for k in 0..u.atom_comp.len() {
        if u.triggers[c] & claims & (1 << k) != 0 {
            let comp = u.atom_comp[k];
            spawn(comp, u.ucws[comp].0.initial, &mut out);
        }
    }
    out.sort_unstable();
    out.dedup();
    out
}

/// Exact winner of the bounded safety game, by explicit enumeration of
/// dense counter vectors over the whole UCT state space and a backward
/// attractor computation. Accepts KLTL⁺ formulas.
pub fn brute_force_realizability(
    model: &EnvironmentModel,
    phi: &Formula,
    b: u8,
    cap: usize,
) -> Result<bool, OracleError> {
    let n = model.num_states();
    assert!(n <= 12, "explicit solver handles at most 12 states");
    for p in phi.propositions() {
        if model.prop_index(&p).is_none() {
            return Err(OracleError::UnknownProposition(p));
        }
    }
    let chain = rewrite_chain(phi);
    let natoms = chain.atoms.len();
    let ab = shared_alphabet(model, natoms)?;
    let stage_atoms = |stage: usize| -> u64 {
        let mut mask = 0;
        for j in 1..=stage {
            for k in chain.levels[j].katoms() {
                mask |= 1 << k;
            }
        }
        mask
    };
    let mut ucws = vec![ltl_to_ucw(chain.top(), &ab)?];
    let mut triggers = vec![stage_atoms(chain.depth())];
    let mut atom_comp = Vec::new();
    for atom in &chain.atoms {
        atom_comp.push(ucws.len());
        ucws.push(ltl_to_ucw(&atom.body, &ab)?);
        triggers.push(stage_atoms(atom.level - 1));
    }
    let nsets = (1usize << n) - 1;
    let mut offsets = Vec::new();
    let mut acc = 0;
    for u in &ucws {
        offsets.push(acc);
        acc += u.0.num_states() * nsets;
    }
    let u = ExplicitUct {
        ucws,
        triggers,
        atom_comp,
        offsets,
        nsets,
        total: acc + 1,
    };

    let nact = model.sys_actions.len();
    let nea = nact << natoms;
    let nobs = model.observations().len();
    let init_set: usize = model.init.iter().fold(0, |m, s| m | 1 << s);

    let mut init = vec![-1i8; u.total];
    let i0 = u.id(0, u.ucws[0].0.initial, init_set);
    init[i0] = u.accepting(i0) as i8;
    if init[i0] > b as i8 {
        return Ok(false);
    }

    // forward exploration; `None` marks an unsafe successor
    let mut index: HashMap<Vec<i8>, usize> = HashMap::from([(init.clone(), 0)]);
    let mut positions = vec![init];
    let mut edges: Vec<Vec<Option<usize>>> = Vec::new();
    let mut move_cache: HashMap<(usize, usize, usize), Vec<usize>> = HashMap::new();
    let mut i = 0;
    while i < positions.len() {
        let f = positions[i].clone();
        let mut row = Vec::with_capacity(nea * nobs);
        for ea in 0..nea {
            let (a, claims) = (ea >> natoms, (ea & ((1 << natoms) - 1)) as u64);
            for o in 0..nobs {
                let mut g = vec![-1i8; u.total];
                for (id, &c) in f.iter().enumerate() {
                    if c < 0 {
                        continue;
                    }
                    let targets = move_cache
                        .entry((id, ea, o))
                        .or_insert_with(|| explicit_moves(model, &u, id, a, claims, o));
                    for &t in targets.iter() {
                        let v = (c + u.accepting(t) as i8).min(b as i8 + 1);
                        g[t] = g[t].max(v);
                    }
                }
                if g.iter().any(|&c| c > b as i8) {
                    row.push(None);
                    continue;
                }
                let id = match index.get(&g) {
                    Some(&id) => id,
                    None => {
                        if positions.len() >= cap {
                            return Err(OracleError::InstanceTooLarge(cap));
                        }
                        index.insert(g.clone(), positions.len());
                        positions.push(g);
                        positions.len() - 1
                    }
                };
                row.push(Some(id));
            }
        }
        edges.push(row);
        i += 1;
    }

    // backward attractor for the environment
    let np = positions.len();
    let mut preds: Vec<Vec<(usize, usize)>> = vec![Vec::new(); np];
    let mut lost = vec![false; np];
    let mut refuted = vec![vec![false; nea]; np];
    let mut remaining = vec![nea; np];
    let mut queue = VecDeque::new();
    for p in 0..np {
        for ea in 0..nea {
            for o in 0..nobs {
                match edges[p][ea * nobs + o] {
                    Some(t) => preds[t].push((p, ea)),
                    None => {
                        if !refuted[p][ea] {
                            refuted[p][ea] = true;
                            remaining[p] -= 1;
                        }
                    }
                }
            }
        }
        if remaining[p] == 0 {
            lost[p] = true;
            queue.push_back(p);
        }
    }
    while let Some(t) = queue.pop_front() {
        for &(p, ea) in &preds[t] {
            if lost[p] || refuted[p][ea] {
                continue;
            }
            refuted[p][ea] = true;
            remaining[p] -= 1;
            if remaining[p] == 0 {
                lost[p] = true;
                queue.push_back(p);
            }
        }
    }
    Ok(!lost[0])
}

// ---------------------------------------------------------------------------
// Strategy validation

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ValidationMode {
    /// Product with Büchi automata for the negated subformulas.
    Automata,
    /// Enumerate lassos of the execution graph up to a length bound.
    Lasso { max_len: usize },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ValidationReport {
    pub ok: bool,
    pub info_nodes: usize,
    pub exec_nodes: usize,
    /// Per atom, the number of information nodes where it holds.
    pub atom_truth: Vec<usize>,
    pub reason: Option<String>,
}

/// Information graph of a strategy (nodes `(machine state, knowledge)`) and
/// the execution graph over it (nodes `(info node, environment state)`).
struct Product {
    info: Vec<(usize, Knowledge)>,
    exec: Vec<(usize, StateId)>,
    exec_next: Vec<Vec<usize>>,
    exec_index: HashMap<(usize, StateId), usize>,
}

fn build_product(model: &EnvironmentModel, m: &MooreMachine) -> Result<Product, OracleError> {
    let (actions, obs_map) = m.bind(model)?;
    let nobs = model.observations().len();
    let mut info = vec![(m.initial, model.init.clone())];
    let mut index: HashMap<(usize, Knowledge), usize> =
        HashMap::from([((m.initial, model.init.clone()), 0)]);
    let mut info_next = Vec::new();
    let mut i = 0;
    while i < info.len() {
        let (ms, know) = info[i].clone();
        let a = actions[ms];
        let mut row = Vec::new();
        for o in 0..nobs {
            let next = model.post(&know, a, o);
            if next.is_empty() {
                row.push(None);
                continue;
            }
            let key = (m.step(ms, &obs_map, o), next);
            let id = *index.entry(key.clone()).or_insert_with(|| {
                info.push(key);
                info.len() - 1
            });
            row.push(Some(id));
        }
        info_next.push(row);
        i += 1;
    }
    let mut exec = Vec::new();
    let mut exec_index = HashMap::new();
    for (n, (_, know)) in info.iter().enumerate() {
        for s in know.iter() {
            exec_index.insert((n, s), exec.len());
            exec.push((n, s));
        }
    }
    let exec_next = exec
        .iter()
        .map(|&(n, s)| {
            let a = actions[info[n].0];
            let mut out: Vec<usize> = model
                .successors(s, a)
                .iter()
                .map(|t| {
                    let n2 = info_next[n][model.obs_of(t)].expect("reachable observation");
                    exec_index[&(n2, t)]
                })
                .collect();
            out.sort_unstable();
            out.dedup();
            out
        })
        .collect();
    Ok(Product {
        info,
        exec,
        exec_next,
        exec_index,
    })
}

/// Execution nodes from which some path violates `gamma`, via the product
/// with a Büchi automaton for `¬gamma`.
fn violating_starts(
    model: &EnvironmentModel,
    prod: &Product,
    truth: &[u64],
    gamma: &Formula,
    ab: &Alphabet,
) -> Result<Vec<bool>, OracleError> {
    let nbw: Nbw = ltl_to_nbw(&Formula::not(gamma.clone()), ab)?;
    let aut = &nbw.0;
    let nq = aut.num_states();
    let ne = prod.exec.len();
    let np = model.props.len();
    let letter = |e: usize| {
        let (n, s) = prod.exec[e];
        model.labels[s] | truth[n] << np
    };
    // product node (e, q) = e * nq + q; edge reads the letter of e
    let total = ne * nq;
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); total];
    for e in 0..ne {
        let l = letter(e);
        for q in 0..nq {
            for q2 in aut.successors(q, l) {
                for &e2 in &prod.exec_next[e] {
                    adj[e * nq + q].push(e2 * nq + q2);
                }
            }
        }
    }
    // nodes on a cycle through an accepting node
    let comp = scc(&adj);
    let mut comp_size: HashMap<usize, usize> = HashMap::new();
    for &c in &comp {
        *comp_size.entry(c).or_default() += 1;
    }
    let mut bad = vec![false; total];
    for v in 0..total {
        let q = v % nq;
        let cyclic = comp_size[&comp[v]] > 1 || adj[v].contains(&v);
        if aut.accepting[q] && cyclic {
            bad[v] = true;
        }
    }
    let mut radj: Vec<Vec<usize>> = vec![Vec::new(); total];
    for (v, out) in adj.iter().enumerate() {
        for &w in out {
            radj[w].push(v);
        }
    }
    let mut stack: Vec<usize> = (0..total).filter(|&v| bad[v]).collect();
    while let Some(v) = stack.pop() {
        for &u in &radj[v] {
            if !bad[u] {
                bad[u] = true;
                stack.push(u);
            }
        }
    }
    Ok((0..ne).map(|e| bad[e * nq + aut.initial]).collect())
}

/// Kosaraju SCC labelling.
fn scc(adj: &[Vec<usize>]) -> Vec<usize> {
    let n = adj.len();
    let mut order = Vec::with_capacity(n);
    let mut seen = vec![false; n];
    for root in 0..n {
        if seen[root] {
            continue;
        }
        seen[root] = true;
        let mut stack = vec![(root, 0usize)];
        while let Some((v, i)) = stack.pop() {
            if i < adj[v].len() {
                stack.push((v, i + 1));
                let w = adj[v][i];
                if !seen[w] {
                    seen[w] = true;
                    stack.push((w, 0));
                }
            } else {
                order.push(v);
            }
        }
    }
    let mut radj: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (v, out) in adj.iter().enumerate() {
        for &w in out {
            radj[w].push(v);
        }
    }
    let mut comp = vec![usize::MAX; n];
    let mut c = 0;
    for &root in order.iter().rev() {
        if comp[root] != usize::MAX {
            continue;
        }
        let mut stack = vec![root];
        comp[root] = c;
        while let Some(v) = stack.pop() {
            for &w in &radj[v] {
                if comp[w] == usize::MAX {
                    comp[w] = c;
                    stack.push(w);
                }
            }
        }
        c += 1;
    }
    comp
}

/// Execution nodes from which some lasso of length ≤ `max_len` violates `gamma`.
fn violating_starts_lasso(
    model: &EnvironmentModel,
    prod: &Product,
    truth: &[u64],
    gamma: &Formula,
    ab: &Alphabet,
    max_len: usize,
) -> Vec<bool> {
    let np = model.props.len();
    let letter = |e: usize| {
        let (n, s) = prod.exec[e];
        model.labels[s] | truth[n] << np
    };
    let mut memo: HashMap<Vec<usize>, bool> = HashMap::new();
    (0..prod.exec.len())
        .map(|start| {
            let mut found = false;
            let mut stack = vec![vec![start]];
            while let Some(path) = stack.pop() {
                if found {
                    break;
                }
                let last = *path.last().unwrap();
                for &next in &prod.exec_next[last] {
                    // close a loop back to an earlier position
                    for k in 0..path.len() {
                        if path[k] != next {
                            continue;
                        }
                        let key: Vec<usize> = path.iter().copied().chain([usize::MAX, k]).collect();
                        let holds = *memo.entry(key).or_insert_with(|| {
                            let w = Lasso::new(
                                path[..k].iter().map(|&e| letter(e)).collect(),
                                path[k..].iter().map(|&e| letter(e)).collect(),
                            );
                            ltl_eval_lasso(gamma, ab, &w)
                        });
                        if !holds {
                            found = true;
                        }
                    }
                    if path.len() < max_len {
                        let mut p2 = path.clone();
                        p2.push(next);
                        stack.push(p2);
                    }
                }
            }
            found
        })
        .collect()
}

/// Checks that every execution compatible with the strategy satisfies `phi`
/// under the knowledge semantics.
pub fn validate_strategy(
    model: &EnvironmentModel,
    m: &MooreMachine,
    phi: &Formula,
    mode: ValidationMode,
) -> Result<ValidationReport, OracleError> {
    for p in phi.propositions() {
        if model.prop_index(&p).is_none() {
            return Err(OracleError::UnknownProposition(p));
        }
    }
    let prod = build_product(model, m)?;
    let chain = rewrite_chain(phi);
    let ab = shared_alphabet(model, chain.atoms.len())?;
    let mut truth = vec![0u64; prod.info.len()];
    let mut atom_truth = vec![0; chain.atoms.len()];
    let check = |truth: &[u64], f: &Formula| -> Result<Vec<bool>, OracleError> {
        Ok(match mode {
            ValidationMode::Automata => violating_starts(model, &prod, truth, f, &ab)?,
            ValidationMode::Lasso { max_len } => {
                violating_starts_lasso(model, &prod, truth, f, &ab, max_len)
            }
        })
    };
    let mut atoms: Vec<_> = chain.atoms.iter().collect();
    atoms.sort_by_key(|a| a.level);
    for atom in atoms {
        let bad = check(&truth, &atom.body)?;
        for (n, (_, know)) in prod.info.iter().enumerate() {
            let holds = know.iter().all(|s| !bad[prod.exec_index[&(n, s)]]);
            if holds {
                truth[n] |= 1 << atom.index;
                atom_truth[atom.index] += 1;
            }
        }
    }
    let bad = check(&truth, chain.top())?;
    let failing: Vec<&str> = model
        .init
        .iter()
        .filter(|&s| bad[prod.exec_index[&(0, s)]])
        .map(|s| model.states[s].as_str())
        .collect();
    Ok(ValidationReport {
        ok: failing.is_empty(),
        info_nodes: prod.info.len(),
        exec_nodes: prod.exec.len(),
        atom_truth,
        reason: if failing.is_empty() {
            None
        } else {
            Some(format!(
                "violating executions start in {{{}}}",
                failing.join(",")
            ))
        },
    })
}

// ---------------------------------------------------------------------------
// Knowledge coherence of a UCT

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoherenceViolation {
    pub history: Vec<(usize, ObsId)>,
    pub component: u32,
    pub q: u32,
    pub knowledges: Vec<Knowledge>,
}

/// Follows random e-action/observation histories (observations restricted
/// to those the environment can produce) and reports every step at which
/// one automaton state is reached with two different knowledges.
pub fn knowledge_coherence(
    uct: &mut Uct,
    samples: usize,
    depth: usize,
    rng: &mut impl Rng,
) -> Vec<CoherenceViolation> {
    let mut out = Vec::new();
    let nea = uct.num_eactions();
    let nobs = uct.num_observations();
    for _ in 0..samples {
        let mut current: BTreeSet<UctStateId> = uct.initial.iter().copied().collect();
        let mut belief = uct.model.init.clone();
        let mut history = Vec::new();
        for _ in 0..depth {
            let ea = rng.gen_range(0..nea);
            let a = uct.ea_action(ea);
            let options: Vec<ObsId> = (0..nobs)
                .filter(|&o| !uct.model.post(&belief, a, o).is_empty())
                .collect();
            let o = options[rng.gen_range(0..options.len())];
            belief = uct.model.post(&belief, a, o);
            history.push((ea, o));
            let mut next = BTreeSet::new();
            for &s in &current {
                next.extend(
                    uct.successors(s, ea, o)
                        .iter()
                        .copied()
                        .filter(|&t| t != SINK),
                );
            }
            current = next;
            let mut seen: HashMap<(u32, u32), Vec<Knowledge>> = HashMap::new();
            for &s in &current {
                if let UctState::Pair { component, q, know } = uct.state(s) {
                    seen.entry((*component, *q)).or_default().push(know.clone());
                }
            }
            let mut keys: Vec<_> = seen.into_iter().filter(|(_, v)| v.len() > 1).collect();
            keys.sort_by_key(|(k, _)| *k);
            for ((component, q), knowledges) in keys {
                out.push(CoherenceViolation {
                    history: history.clone(),
                    component,
                    q,
                    knowledges,
                });
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env_model::parse_model;
    use crate::formula::parse;
    use crate::strategy::{observation_specs, MachineState};

    fn light() -> EnvironmentModel {
        parse_model(include_str!("../cases/light_switch.model")).unwrap()
    }

    fn machine(model: &EnvironmentModel, rows: &[(&str, &[usize])]) -> MooreMachine {
        MooreMachine {
            actions: model.sys_actions.clone(),
            observations: observation_specs(model),
            initial: 0,
            states: rows
                .iter()
                .map(|(out, next)| MachineState {
                    output: out.to_string(),
                    claims: vec![],
                    error: false,
                    next: next.to_vec(),
                    comment: None,
                })
                .collect(),
        }
    }

    #[test]
    fn lasso_semantics() {
        let ab = Alphabet::new(vec!["p".into(), "q".into()]).unwrap();
        let w = Lasso::new(vec![0b00, 0b10], vec![0b01]);
        let holds = |s: &str| ltl_eval_lasso(&parse(s).unwrap(), &ab, &w);
        assert!(holds("F G p"));
        assert!(!holds("G F q"));
        assert!(holds("!p U q"));
        assert!(holds("X q"));
        assert!(holds("X X X p"));
        assert!(!holds("p | q"));
        assert!(holds("G (q -> X p)"));
    }

    #[test]
    fn explicit_game_on_light_switch() {
        let model = light();
        let phi = parse(include_str!("../cases/light_switch.kltl").trim()).unwrap();
        assert!(brute_force_realizability(&model, &phi, 0, 100_000).unwrap());
        let shifted = model.with_init(&[1, 2]).unwrap();
        for b in 0..3 {
            assert!(!brute_force_realizability(&shifted, &phi, b, 100_000).unwrap());
        }
    }

    #[test]
    fn validator_accepts_and_rejects() {
        let model = light();
        let phi = parse("G (K t | K !t)").unwrap();
        let toggle = machine(&model, &[("T", &[0, 0])]);
        let stay = machine(&model, &[("S", &[0, 0])]);
        for mode in [
            ValidationMode::Automata,
            ValidationMode::Lasso { max_len: 6 },
        ] {
            assert!(validate_strategy(&model, &toggle, &phi, mode).unwrap().ok);
            let r = validate_strategy(&model, &stay, &phi, mode).unwrap();
            assert!(!r.ok);
            assert!(r.reason.is_some());
        }
    }

    #[test]
    fn validator_nested_knowledge() {
        let model = light();
        let toggle = machine(&model, &[("T", &[0, 0])]);
        let phi = parse("K X K !t").unwrap();
        assert!(
            validate_strategy(&model, &toggle, &phi, ValidationMode::Automata)
                .unwrap()
                .ok
        );
        let phi = parse("K X K t").unwrap();
        assert!(
            !validate_strategy(&model, &toggle, &phi, ValidationMode::Automata)
                .unwrap()
                .ok
        );
    }
}
