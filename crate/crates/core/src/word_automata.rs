//! Word automata over propositional letters and the LTL → UCW translation.
//!
//! Letters are bitmasks over an [`Alphabet`]; guards are cubes.

use std::collections::{BTreeMap, HashMap, VecDeque};
use std::fmt::Write as _;

use thiserror::Error;

use crate::formula::{katom_name, Formula};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum AutomatonError {
    #[error("proposition `{0}` is not in the alphabet")]
    UnknownProposition(String),
    #[error("formula contains a knowledge operator: `{0}`")]
    NotLtl(String),
    #[error("alphabet too large ({0} letters bits, at most 64)")]
    AlphabetTooLarge(usize),
}

/// Ordered proposition names; position `i` is letter bit `i`.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Alphabet {
    pub names: Vec<String>,
}

impl Alphabet {
    pub fn new(names: Vec<String>) -> Result<Self, AutomatonError> {
        if names.len() > 64 {
            return Err(AutomatonError::AlphabetTooLarge(names.len()));
        }
        Ok(Alphabet { names })
    }

    /// Propositions of `f` in sorted order, then its knowledge atoms.
    pub fn for_formula(f: &Formula) -> Result<Self, AutomatonError> {
        let mut names: Vec<String> = f.propositions().into_iter().collect();
        names.extend(f.katoms().into_iter().map(katom_name));
        Self::new(names)
    }

    pub fn index(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn letter(&self, props: &[&str]) -> u64 {
        props
            .iter()
            .map(|p| 1u64 << self.index(p).expect("letter proposition in alphabet"))
            .fold(0, |a, b| a | b)
    }
}

/// Conjunction of literals: bits of `pos` must be set, bits of `neg` clear.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Cube {
    pub pos: u64,
    pub neg: u64,
}

impl Cube {
    pub const TRUE: Cube = Cube { pos: 0, neg: 0 };

    pub fn holds(&self, letter: u64) -> bool {
        letter & self.pos == self.pos && letter & self.neg == 0
    }

    pub fn is_true(&self) -> bool {
        self.pos == 0 && self.neg == 0
    }

    pub fn is_sat(&self) -> bool {
        self.pos & self.neg == 0
    }

    /// `self` implies `other` (every literal of `other` occurs in `self`).
    pub fn implies(&self, other: &Cube) -> bool {
        other.pos & !self.pos == 0 && other.neg & !self.neg == 0
    }

    pub fn render(&self, alphabet: &Alphabet) -> String {
        if self.is_true() {
            return "t".into();
        }
        let mut lits = Vec::new();
        for i in 0..64 {
            if self.pos & (1 << i) != 0 {
                lits.push(alphabet.names[i].clone());
            }
            if self.neg & (1 << i) != 0 {
                lits.push(format!("!{}", alphabet.names[i]));
            }
        }
        lits.join(" & ")
    }
}

/// Cubes whose disjunction is the complement of the disjunction of `cubes`.
pub fn complement(cubes: &[Cube]) -> Vec<Cube> {
    if cubes.is_empty() {
        return vec![Cube::TRUE];
    }
    if cubes.iter().any(Cube::is_true) {
        return vec![];
    }
    let lits = cubes[0].pos | cubes[0].neg;
    let bit = lits & lits.wrapping_neg();
    let mut out = Vec::new();
    for positive in [true, false] {
        let restricted: Vec<Cube> = cubes
            .iter()
            .filter(|c| {
                if positive {
                    c.neg & bit == 0
                } else {
                    c.pos & bit == 0
                }
            })
            .map(|c| Cube {
                pos: c.pos & !bit,
                neg: c.neg & !bit,
            })
            .collect();
        for mut c in complement(&restricted) {
            if positive {
                c.pos |= bit;
            } else {
                c.neg |= bit;
            }
            out.push(c);
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Edge {
    pub guard: Cube,
    pub target: usize,
}

/// Shared state graph with a single initial state.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Automaton {
    pub alphabet: Alphabet,
    pub initial: usize,
    pub accepting: Vec<bool>,
    pub edges: Vec<Vec<Edge>>,
}

impl Automaton {
    pub fn num_states(&self) -> usize {
        self.accepting.len()
    }

    pub fn successors(&self, q: usize, letter: u64) -> impl Iterator<Item = usize> + '_ {
        self.edges[q]
            .iter()
            .filter(move |e| e.guard.holds(letter))
            .map(|e| e.target)
    }

    pub fn is_complete(&self) -> bool {
        (0..self.num_states()).all(|q| {
            let cubes: Vec<Cube> = self.edges[q].iter().map(|e| e.guard).collect();
            complement(&cubes).is_empty()
        })
    }

    /// Some run on the lasso visits an accepting state infinitely often.
    fn accepting_cycle_on(&self, lasso: &Lasso) -> bool {
        let p = lasso.prefix.len();
        let positions = p + lasso.cycle.len();
        let letter = |i: usize| {
            if i < p {
                lasso.prefix[i]
            } else {
                lasso.cycle[i - p]
            }
        };
        let next_pos = |i: usize| if i + 1 == positions { p } else { i + 1 };
        let n = self.num_states();
        let node = |q: usize, i: usize| q * positions + i;
        let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n * positions];
        let mut seen = vec![false; n * positions];
        let start = node(self.initial, 0);
        seen[start] = true;
        let mut stack = vec![start];
        while let Some(v) = stack.pop() {
            let (q, i) = (v / positions, v % positions);
            for t in self.successors(q, letter(i)) {
                let w = node(t, next_pos(i));
                adj[v].push(w);
                if !seen[w] {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
        let acc: Vec<bool> = (0..n * positions)
            .map(|v| seen[v] && self.accepting[v / positions])
            .collect();
        cycle_through(&adj, &seen, &acc)
    }

    /// Reachable accepting state lying on a cycle (all guards are satisfiable).
    fn has_accepting_lasso(&self) -> bool {
        let n = self.num_states();
        let adj: Vec<Vec<usize>> = self
            .edges
            .iter()
            .map(|es| {
                es.iter()
                    .filter(|e| e.guard.is_sat())
                    .map(|e| e.target)
                    .collect()
            })
            .collect();
        let mut seen = vec![false; n];
        seen[self.initial] = true;
        let mut stack = vec![self.initial];
        while let Some(v) = stack.pop() {
            for &w in &adj[v] {
                if !seen[w] {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
        let acc: Vec<bool> = (0..n).map(|v| seen[v] && self.accepting[v]).collect();
        cycle_through(&adj, &seen, &acc)
    }

    /// HOA-like textual dump.
    pub fn dump(&self, acceptance: &str) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "States: {}", self.num_states());
        let _ = writeln!(out, "Start: {}", self.initial);
        let _ = writeln!(out, "AP: {}", self.alphabet.names.join(" "));
        let _ = writeln!(out, "Acceptance: {acceptance}");
        let _ = writeln!(out, "--BODY--");
        for q in 0..self.num_states() {
            let mark = if self.accepting[q] { " {0}" } else { "" };
            let _ = writeln!(out, "State: {q}{mark}");
            for e in &self.edges[q] {
                let _ = writeln!(out, "  [{}] {}", e.guard.render(&self.alphabet), e.target);
            }
        }
        out.push_str("--END--\n");
        out
    }
}

/// Tarjan SCC: is some marked reachable node on a nontrivial cycle?
fn cycle_through(adj: &[Vec<usize>], live: &[bool], marked: &[bool]) -> bool {
    let n = adj.len();
    let mut index = vec![usize::MAX; n];
    let mut low = vec![0; n];
    let mut on_stack = vec![false; n];
    let mut stack = Vec::new();
    let mut counter = 0;
    if !marked.iter().any(|&m| m) {
        return false;
    }
    for root in 0..n {
        if !live[root] || index[root] != usize::MAX {
            continue;
        }
        let mut call: Vec<(usize, usize)> = vec![(root, 0)];
        index[root] = counter;
        low[root] = counter;
        counter += 1;
        stack.push(root);
        on_stack[root] = true;
        while let Some(&mut (v, ref mut ei)) = call.last_mut() {
            if *ei < adj[v].len() {
                let w = adj[v][*ei];
                *ei += 1;
                if index[w] == usize::MAX {
                    index[w] = counter;
                    low[w] = counter;
                    counter += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    call.push((w, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
            } else {
                call.pop();
                if let Some(&(u, _)) = call.last() {
                    low[u] = low[u].min(low[v]);
                }
                if low[v] == index[v] {
                    let mut comp = Vec::new();
                    loop {
                        let w = stack.pop().unwrap();
                        on_stack[w] = false;
                        comp.push(w);
                        if w == v {
                            break;
                        }
                    }
                    let nontrivial = comp.len() > 1 || adj[v].contains(&v);
                    if nontrivial && comp.iter().any(|&w| marked[w]) {
                        return true;
                    }
                }
            }
        }
    }
    false
}

/// Nondeterministic Büchi word automaton.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Nbw(pub Automaton);

/// Universal co-Büchi word automaton.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Ucw(pub Automaton);

impl Nbw {
    pub fn accepts_lasso(&self, lasso: &Lasso) -> bool {
        self.0.accepting_cycle_on(lasso)
    }

    pub fn is_empty(&self) -> bool {
        !self.0.has_accepting_lasso()
    }
}

impl Ucw {
    pub fn automaton(&self) -> &Automaton {
        &self.0
    }

    pub fn dualize(self) -> Nbw {
        Nbw(self.0)
    }

    /// Routes every uncovered letter to a non-accepting sink.
    pub fn complete(mut self) -> Ucw {
        let a = &mut self.0;
        let mut sink = None;
        for q in 0..a.num_states() {
            let cubes: Vec<Cube> = a.edges[q].iter().map(|e| e.guard).collect();
            let missing = complement(&cubes);
            if missing.is_empty() {
                continue;
            }
            let s = *sink.get_or_insert_with(|| {
                a.accepting.push(false);
                a.edges.push(vec![Edge {
                    guard: Cube::TRUE,
                    target: a.accepting.len() - 1,
                }]);
                a.accepting.len() - 1
            });
            a.edges[q].extend(missing.into_iter().map(|guard| Edge { guard, target: s }));
        }
        self
    }

    /// Every run on the lasso visits accepting states finitely often.
    pub fn accepts_lasso(&self, lasso: &Lasso) -> bool {
        !self.0.accepting_cycle_on(lasso)
    }
}

pub fn dualize(a: Nbw) -> Ucw {
    Ucw(a.0)
}

/// Ultimately periodic word `prefix · cycle^ω`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Lasso {
    pub prefix: Vec<u64>,
    pub cycle: Vec<u64>,
}

impl Lasso {
    pub fn new(prefix: Vec<u64>, cycle: Vec<u64>) -> Self {
        assert!(!cycle.is_empty(), "lasso cycle must be nonempty");
        Lasso { prefix, cycle }
    }

    /// Every lasso with `1 ≤ |cycle|` and `|prefix| + |cycle| ≤ max_len` over `nprops` bits.
    pub fn enumerate(nprops: usize, max_len: usize) -> Vec<Lasso> {
        let letters: Vec<u64> = (0..1u64 << nprops).collect();
        let mut words: Vec<Vec<u64>> = vec![vec![]];
        let mut by_len = vec![words.clone()];
        for _ in 0..max_len {
            words = words
                .iter()
                .flat_map(|w| {
                    letters.iter().map(move |&l| {
                        let mut v = w.clone();
                        v.push(l);
                        v
                    })
                })
                .collect();
            by_len.push(words.clone());
        }
        let mut out = Vec::new();
        for total in 1..=max_len {
            for cycle_len in 1..=total {
                for prefix in &by_len[total - cycle_len] {
                    for cycle in &by_len[cycle_len] {
                        out.push(Lasso::new(prefix.clone(), cycle.clone()));
                    }
                }
            }
        }
        out
    }
}

// ---------------------------------------------------------------------------
// Negation normal form, hash-consed.

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
enum Node {
    True,
    False,
    Lit(usize, bool),
    And(usize, usize),
    Or(usize, usize),
    Next(usize),
    Until(usize, usize),
    Release(usize, usize),
}

#[derive(Default)]
struct Arena {
    nodes: Vec<Node>,
    ids: HashMap<Node, usize>,
}

impl Arena {
    fn mk(&mut self, n: Node) -> usize {
        let n = match n {
            Node::And(a, b) | Node::Or(a, b) if a > b => match n {
                Node::And(..) => Node::And(b, a),
                _ => Node::Or(b, a),
            },
            other => other,
        };
        let simplified = match n {
            Node::And(a, b) if a == b => return a,
            Node::Or(a, b) if a == b => return a,
            Node::And(a, b) => match (self.nodes[a], self.nodes[b]) {
                (Node::False, _) | (_, Node::False) => Node::False,
                (Node::True, _) => return b,
                (_, Node::True) => return a,
                _ => n,
            },
            Node::Or(a, b) => match (self.nodes[a], self.nodes[b]) {
                (Node::True, _) | (_, Node::True) => Node::True,
                (Node::False, _) => return b,
                (_, Node::False) => return a,
                _ => n,
            },
            _ => n,
        };
        if let Some(&id) = self.ids.get(&simplified) {
            return id;
        }
        self.nodes.push(simplified);
        self.ids.insert(simplified, self.nodes.len() - 1);
        self.nodes.len() - 1
    }

    fn nnf(&mut self, f: &Formula, neg: bool, ab: &Alphabet) -> Result<usize, AutomatonError> {
        use Formula::*;
        let var = |name: String| {
            ab.index(&name)
                .ok_or(AutomatonError::UnknownProposition(name))
        };
        Ok(match f {
            True => self.mk(if neg { Node::False } else { Node::True }),
            False => self.mk(if neg { Node::True } else { Node::False }),
            Atom(p) => {
                let v = var(p.clone())?;
                self.mk(Node::Lit(v, !neg))
            }
            KAtom(i) => {
                let v = var(katom_name(*i))?;
                self.mk(Node::Lit(v, !neg))
            }
            Not(a) => self.nnf(a, !neg, ab)?,
            And(a, b) | Or(a, b) => {
                let (x, y) = (self.nnf(a, neg, ab)?, self.nnf(b, neg, ab)?);
                let conj = matches!(f, And(..)) != neg;
                self.mk(if conj {
                    Node::And(x, y)
                } else {
                    Node::Or(x, y)
                })
            }
            Next(a) => {
                let x = self.nnf(a, neg, ab)?;
                self.mk(Node::Next(x))
            }
            Until(a, b) => {
                let (x, y) = (self.nnf(a, neg, ab)?, self.nnf(b, neg, ab)?);
                self.mk(if neg {
                    Node::Release(x, y)
                } else {
                    Node::Until(x, y)
                })
            }
            Always(a) | Eventually(a) => {
                let x = self.nnf(a, neg, ab)?;
                let always = matches!(f, Always(_)) != neg;
                if always {
                    let ff = self.mk(Node::False);
                    self.mk(Node::Release(ff, x))
                } else {
                    let tt = self.mk(Node::True);
                    self.mk(Node::Until(tt, x))
                }
            }
            Know(_) => return Err(AutomatonError::NotLtl(f.to_string())),
        })
    }
}

/// One tableau successor of an obligation set.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
struct Branch {
    cube: Cube,
    next: Vec<usize>,
    /// Bit `j` set when until number `j` was postponed.
    postponed: u64,
}

struct Tableau<'a> {
    arena: &'a Arena,
    untils: &'a [usize],
}

impl Tableau<'_> {
    fn expand(&self, obligations: &[usize]) -> Vec<Branch> {
        let mut out = Vec::new();
        self.go(
            obligations.to_vec(),
            Vec::new(),
            Branch {
                cube: Cube::TRUE,
                next: Vec::new(),
                postponed: 0,
            },
            &mut out,
        );
        for b in &mut out {
            b.next.sort_unstable();
            b.next.dedup();
        }
        out.sort();
        out.dedup();
        prune_subsumed(out)
    }

    fn go(
        &self,
        mut todo: Vec<usize>,
        mut done: Vec<usize>,
        mut br: Branch,
        out: &mut Vec<Branch>,
    ) {
        while let Some(f) = todo.pop() {
            if done.contains(&f) {
                continue;
            }
            done.push(f);
            match self.arena.nodes[f] {
                Node::True => {}
                Node::False => return,
                Node::Lit(v, pol) => {
                    if pol {
                        br.cube.pos |= 1 << v;
                    } else {
                        br.cube.neg |= 1 << v;
                    }
                    if !br.cube.is_sat() {
                        return;
                    }
                }
                Node::And(a, b) => {
                    todo.push(a);
                    todo.push(b);
                }
                Node::Next(a) => br.next.push(a),
                Node::Or(a, b) => {
                    let mut t1 = todo.clone();
                    t1.push(a);
                    self.go(t1, done.clone(), br.clone(), out);
                    todo.push(b);
                }
                Node::Until(a, b) => {
                    let mut t1 = todo.clone();
                    t1.push(b);
                    self.go(t1, done.clone(), br.clone(), out);
                    todo.push(a);
                    br.next.push(f);
                    let j = self.untils.iter().position(|&u| u == f).unwrap();
                    br.postponed |= 1 << j;
                }
                Node::Release(a, b) => {
                    let mut t1 = todo.clone();
                    t1.push(a);
                    t1.push(b);
                    self.go(t1, done.clone(), br.clone(), out);
                    todo.push(b);
                    br.next.push(f);
                }
            }
        }
        out.push(br);
    }
}

/// Drops branches dominated by another with a weaker guard, fewer
/// obligations and fewer postponed eventualities.
fn prune_subsumed(branches: Vec<Branch>) -> Vec<Branch> {
    let dominated = |x: &Branch, y: &Branch| {
        x.cube.implies(&y.cube)
            && y.next.iter().all(|f| x.next.contains(f))
            && y.postponed & !x.postponed == 0
    };
    let mut keep: Vec<Branch> = Vec::new();
    for (i, b) in branches.iter().enumerate() {
        let beaten = branches
            .iter()
            .enumerate()
            .any(|(j, o)| j != i && dominated(b, o) && (!dominated(o, b) || j < i));
        if !beaten {
            keep.push(b.clone());
        }
    }
    keep
}

/// Translates a Know-free formula into an NBW accepting exactly its models.
pub fn ltl_to_nbw(f: &Formula, alphabet: &Alphabet) -> Result<Nbw, AutomatonError> {
    let mut arena = Arena::default();
    let root = arena.nnf(f, false, alphabet)?;
    let untils: Vec<usize> = (0..arena.nodes.len())
        .filter(|&i| matches!(arena.nodes[i], Node::Until(..)))
        .collect();
    let tableau = Tableau {
        arena: &arena,
        untils: &untils,
    };
    let m = untils.len();
    let full: u64 = if m == 64 { u64::MAX } else { (1 << m) - 1 };

    // generalized automaton over obligation sets
    let mut index: BTreeMap<Vec<usize>, usize> = BTreeMap::new();
    let mut sets: Vec<Vec<usize>> = Vec::new();
    let mut gba: Vec<Vec<(Cube, usize, u64)>> = Vec::new();
    let mut queue = VecDeque::new();
    index.insert(vec![root], 0);
    sets.push(vec![root]);
    queue.push_back(0);
    while let Some(s) = queue.pop_front() {
        let mut out = Vec::new();
        for br in tableau.expand(&sets[s]) {
            let t = *index.entry(br.next.clone()).or_insert_with(|| {
                sets.push(br.next.clone());
                queue.push_back(sets.len() - 1);
                sets.len() - 1
            });
            out.push((br.cube, t, full & !br.postponed));
        }
        gba.push(out);
    }

    // degeneralize: state (s, level), accepting at level m
    let mut deg: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    let mut accepting = Vec::new();
    let mut edges: Vec<Vec<Edge>> = Vec::new();
    let mut queue = VecDeque::new();
    let start = (0, 0);
    deg.insert(start, 0);
    accepting.push(m == 0);
    edges.push(Vec::new());
    queue.push_back(start);
    while let Some((s, level)) = queue.pop_front() {
        let id = deg[&(s, level)];
        let mut out = Vec::new();
        for &(guard, t, acc) in &gba[s] {
            let mut j = if level == m { 0 } else { level };
            while j < m && acc & (1 << j) != 0 {
                j += 1;
            }
            let key = (t, j);
            let target = match deg.get(&key) {
                Some(&x) => x,
                None => {
                    let x = accepting.len();
                    deg.insert(key, x);
                    accepting.push(j == m);
                    edges.push(Vec::new());
                    queue.push_back(key);
                    x
                }
            };
            let e = Edge { guard, target };
            if !out.contains(&e) {
                out.push(e);
            }
        }
        edges[id] = out;
    }
    Ok(Nbw(Automaton {
        alphabet: alphabet.clone(),
        initial: 0,
        accepting,
        edges,
    }))
}

/// UCW accepting exactly the models of `f`: negate, translate, dualize, complete.
pub fn ltl_to_ucw(f: &Formula, alphabet: &Alphabet) -> Result<Ucw, AutomatonError> {
    let nbw = ltl_to_nbw(&Formula::not(f.clone()), alphabet)?;
    Ok(dualize(nbw).complete())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::parse;

    fn ab(names: &[&str]) -> Alphabet {
        Alphabet::new(names.iter().map(|s| s.to_string()).collect()).unwrap()
    }

    fn lasso(ab: &Alphabet, prefix: &[&[&str]], cycle: &[&[&str]]) -> Lasso {
        Lasso::new(
            prefix.iter().map(|l| ab.letter(l)).collect(),
            cycle.iter().map(|l| ab.letter(l)).collect(),
        )
    }

    #[test]
    fn nbw_first_letter() {
        let a = ab(&["p"]);
        let n = ltl_to_nbw(&parse("p").unwrap(), &a).unwrap();
        assert!(n.accepts_lasso(&lasso(&a, &[&["p"]], &[&[]])));
        assert!(!n.accepts_lasso(&lasso(&a, &[], &[&[]])));
    }

    #[test]
    fn nbw_eventually() {
        let a = ab(&["p"]);
        let n = ltl_to_nbw(&parse("F p").unwrap(), &a).unwrap();
        assert!(n.accepts_lasso(&lasso(&a, &[&[], &[], &["p"]], &[&[]])));
        assert!(!n.accepts_lasso(&lasso(&a, &[], &[&[]])));
    }

    #[test]
    fn contradiction_is_empty() {
        let a = ab(&["p"]);
        assert!(ltl_to_nbw(&parse("G p & F !p").unwrap(), &a)
            .unwrap()
            .is_empty());
        assert!(!ltl_to_nbw(&parse("G F p").unwrap(), &a).unwrap().is_empty());
    }

    #[test]
    fn dualized_negation() {
        let a = ab(&["p"]);
        let u = dualize(ltl_to_nbw(&parse("!p").unwrap(), &a).unwrap());
        assert!(u.accepts_lasso(&lasso(&a, &[&["p"]], &[&[]])));
        assert!(!u.accepts_lasso(&lasso(&a, &[&[]], &[&["p"]])));
        let all = dualize(ltl_to_nbw(&Formula::False, &a).unwrap());
        assert!(all.accepts_lasso(&lasso(&a, &[], &[&[]])));
        assert!(all.accepts_lasso(&lasso(&a, &[], &[&["p"]])));
    }

    #[test]
    fn ucw_examples() {
        let a = ab(&["p", "q"]);
        let gp = ltl_to_ucw(&parse("G p").unwrap(), &a).unwrap();
        assert!(gp.accepts_lasso(&lasso(&a, &[&["p"]], &[&["p"]])));
        assert!(!gp.accepts_lasso(&lasso(&a, &[&["p"]], &[&[]])));
        let until = ltl_to_ucw(&parse("p U q").unwrap(), &a).unwrap();
        assert!(until.accepts_lasso(&lasso(&a, &[&["p"]], &[&["q"]])));
        let gfp = ltl_to_ucw(&parse("G F p").unwrap(), &a).unwrap();
        assert!(gfp.accepts_lasso(&lasso(&a, &[&[]], &[&["p"], &[]])));
        assert!(!gfp.accepts_lasso(&lasso(&a, &[&["p"]], &[&[]])));
        assert!(gfp.automaton().is_complete());
    }

    #[test]
    fn complement_covers() {
        let cubes = [Cube { pos: 1, neg: 0 }, Cube { pos: 2, neg: 4 }];
        let comp = complement(&cubes);
        for letter in 0..8u64 {
            let inside = cubes.iter().any(|c| c.holds(letter));
            let outside = comp.iter().any(|c| c.holds(letter));
            assert_ne!(inside, outside, "letter {letter}");
        }
    }

    #[test]
    fn dualize_twice_is_identity() {
        let a = ab(&["p", "q"]);
        let n = ltl_to_nbw(&parse("p U (q & X p)").unwrap(), &a).unwrap();
        assert_eq!(dualize(n.clone()).dualize(), n);
    }

    #[test]
    fn completion_preserves_language() {
        let a = ab(&["p", "q"]);
        for text in ["p", "X q", "p U q", "G (p | X q)", "F G p"] {
            let f = parse(text).unwrap();
            let raw = dualize(ltl_to_nbw(&Formula::not(f.clone()), &a).unwrap());
            let done = raw.clone().complete();
            for l in Lasso::enumerate(2, 3) {
                assert_eq!(raw.accepts_lasso(&l), done.accepts_lasso(&l), "{text}");
            }
        }
    }

    #[test]
    fn lasso_enumeration_count() {
        // sum over total length t of t * 4^t
        assert_eq!(Lasso::enumerate(2, 4).len(), 4 + 2 * 16 + 3 * 64 + 4 * 256);
    }

    #[test]
    fn dump_mentions_states() {
        let a = ab(&["p"]);
        let text = ltl_to_ucw(&parse("F p").unwrap(), &a)
            .unwrap()
            .0
            .dump("co-Buchi");
        assert!(text.starts_with("States: "));
        assert!(text.contains("--END--"));
    }
}
