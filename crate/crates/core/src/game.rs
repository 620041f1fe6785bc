//! Counting-function determinization and the bounded safety game.
//!
//! A position records, for each UCT state some run currently occupies, the
//! largest number of accepting visits seen along such a run, together with the
//! system's overall knowledge. Positions are compared by simulation: the
//! smaller one is tracked by the larger one entry by entry.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::time::Instant;

use rayon::prelude::*;
use thiserror::Error;

use crate::antichain::Antichain;
use crate::env_model::ObsId;
use crate::knowledge::Knowledge;
use crate::tree_automata::{Uct, UctState, UctStateId, SINK};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GameError {
    #[error("game exploration exceeded {0} positions")]
    TooLarge(usize),
}

/// One occupied UCT state with its counter.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Entry {
    /// `(component << 32) | q`; entries are sorted by key, then state.
    pub key: u64,
    pub state: UctStateId,
    pub count: u8,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct GamePosition {
    pub entries: Vec<Entry>,
    pub belief: Knowledge,
}

impl GamePosition {
    pub fn max_count(&self) -> Option<u8> {
        self.entries.iter().map(|e| e.count).max()
    }

    /// Counter of a UCT state, `-1` when unoccupied.
    pub fn count_of(&self, state: UctStateId) -> i16 {
        self.entries
            .iter()
            .find(|e| e.state == state)
            .map_or(-1, |e| e.count as i16)
    }

    pub fn render(&self, uct: &Uct) -> String {
        let mut out = String::new();
        let names = |k: &Knowledge| {
            k.iter()
                .map(|s| uct.model.states[s].as_str())
                .collect::<Vec<_>>()
                .join(",")
        };
        for e in &self.entries {
            if let UctState::Pair { component, q, know } = uct.state(e.state) {
                let _ = write!(out, "c{component}.q{q}{{{}}}={} ", names(know), e.count);
            }
        }
        let _ = write!(out, "| {{{}}}", names(&self.belief));
        out
    }
}

pub fn entry_key(uct: &Uct, state: UctStateId) -> u64 {
    match uct.state(state) {
        UctState::Pair { component, q, .. } => ((*component as u64) << 32) | *q as u64,
        UctState::Sink => u64::MAX,
    }
}

/// Result of one game move.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Successor {
    /// The observation is impossible from the current belief.
    Dead,
    Pos(GamePosition),
}

pub fn initial_position(uct: &Uct, b: u8) -> GamePosition {
    let mut entries: Vec<Entry> = uct
        .initial
        .iter()
        .map(|&s| Entry {
            key: entry_key(uct, s),
            state: s,
            count: if uct.is_doomed(s) {
                b + 1
            } else {
                uct.is_accepting(s) as u8
            },
        })
        .collect();
    entries.sort_unstable();
    GamePosition {
        entries,
        belief: uct.model.init.clone(),
    }
}

pub fn is_safe(p: &GamePosition, b: u8) -> bool {
    p.max_count().is_none_or(|m| m <= b)
}

/// Counter update: each reached state keeps the largest saturated count
/// among its predecessors.
pub fn successor(uct: &mut Uct, p: &GamePosition, ea: usize, o: ObsId, b: u8) -> Successor {
    let belief = uct.model.post(&p.belief, uct.ea_action(ea), o);
    if belief.is_empty() {
        return Successor::Dead;
    }
    let mut counts: HashMap<UctStateId, u8> = HashMap::new();
    for e in &p.entries {
        let targets = uct.successors(e.state, ea, o).to_vec();
        for t in targets {
            if t == SINK {
                continue;
            }
            let c = if uct.is_doomed(t) {
                b + 1
            } else {
                (e.count + uct.is_accepting(t) as u8).min(b + 1)
            };
            let slot = counts.entry(t).or_insert(c);
            *slot = (*slot).max(c);
        }
    }
    let mut entries: Vec<Entry> = counts
        .into_iter()
        .map(|(state, count)| Entry {
            key: entry_key(uct, state),
            state,
            count,
        })
        .collect();
    entries.sort_unstable();
    Successor::Pos(GamePosition { entries, belief })
}

/// Simulation order: `p1 ⪯ p2`.
pub fn leq(uct: &Uct, p1: &GamePosition, p2: &GamePosition) -> bool {
    if !p1.belief.is_subset(&p2.belief) {
        return false;
    }
    p1.entries.iter().all(|e1| {
        let start = p2.entries.partition_point(|e| e.key < e1.key);
        p2.entries[start..]
            .iter()
            .take_while(|e2| e2.key == e1.key)
            .any(|e2| {
                e1.count <= e2.count
                    && (e1.state == e2.state
                        || uct
                            .knowledge(e1.state)
                            .unwrap()
                            .is_subset(uct.knowledge(e2.state).unwrap()))
            })
    })
}

/// Stored move targets.
pub const MOVE_DEAD: u32 = u32::MAX;
pub const MOVE_UNSAFE: u32 = u32::MAX - 1;

/// Safe positions reachable from the initial one, with their moves.
#[derive(Clone, Debug)]
pub struct Arena {
    pub bound: u8,
    pub positions: Vec<GamePosition>,
    /// `moves[(p * nea + ea) * nobs + o]`.
    pub moves: Vec<u32>,
    pub nea: usize,
    pub nobs: usize,
    pub successor_evals: usize,
}

impl Arena {
    pub fn target(&self, p: u32, ea: usize, o: ObsId) -> u32 {
        self.moves[(p as usize * self.nea + ea) * self.nobs + o]
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }
}

/// Explores safe positions from the initial one; `None` if it is unsafe.
pub fn explore(uct: &mut Uct, b: u8, cap: usize) -> Result<Option<Arena>, GameError> {
    let init = initial_position(uct, b);
    if !is_safe(&init, b) {
        return Ok(None);
    }
    let (nea, nobs) = (uct.num_eactions(), uct.num_observations());
    let mut arena = Arena {
        bound: b,
        positions: vec![init.clone()],
        moves: Vec::new(),
        nea,
        nobs,
        successor_evals: 0,
    };
    let mut index: HashMap<GamePosition, u32> = HashMap::from([(init, 0)]);
    let mut next = 0;
    while next < arena.positions.len() {
        let p = arena.positions[next].clone();
        for ea in 0..nea {
            for o in 0..nobs {
                arena.successor_evals += 1;
                let target = match successor(uct, &p, ea, o, b) {
                    Successor::Dead => MOVE_DEAD,
                    Successor::Pos(q) if !is_safe(&q, b) => MOVE_UNSAFE,
                    Successor::Pos(q) => match index.get(&q) {
                        Some(&id) => id,
                        None => {
                            let id = arena.positions.len() as u32;
                            if arena.positions.len() >= cap {
                                return Err(GameError::TooLarge(cap));
                            }
                            index.insert(q.clone(), id);
                            arena.positions.push(q);
                            id
                        }
                    },
                };
                arena.moves.push(target);
            }
        }
        next += 1;
    }
    Ok(Some(arena))
}

fn move_ok(arena: &Arena, alive: &[bool], p: u32, ea: usize) -> bool {
    (0..arena.nobs).all(|o| match arena.target(p, ea, o) {
        MOVE_DEAD => true,
        MOVE_UNSAFE => false,
        t => alive[t as usize],
    })
}

/// First e-action keeping every observation inside `alive`.
pub fn choose(arena: &Arena, alive: &[bool], p: u32) -> Option<usize> {
    (0..arena.nea).find(|&ea| move_ok(arena, alive, p, ea))
}

/// Greatest fixpoint of the controllable predecessor over the arena.
/// Returns the winning flags and the number of passes.
pub fn winning_region(arena: &Arena) -> (Vec<bool>, usize) {
    let mut alive = vec![true; arena.len()];
    let mut passes = 0;
    loop {
        passes += 1;
        let next: Vec<bool> = (0..arena.len())
            .into_par_iter()
            .map(|p| alive[p] && choose(arena, &alive, p as u32).is_some())
            .collect();
        if next == alive {
            return (alive, passes);
        }
        alive = next;
    }
}

/// Maximal elements of the flagged positions.
pub fn maximal(uct: &Uct, arena: &Arena, flags: &[bool]) -> Antichain<u32> {
    let members: Vec<u32> = (0..arena.len() as u32)
        .filter(|&p| flags[p as usize])
        .collect();
    let pos = &arena.positions;
    let keep: Vec<bool> = members
        .par_iter()
        .map(|&p| {
            !members.iter().any(|&q| {
                q != p
                    && leq(uct, &pos[p as usize], &pos[q as usize])
                    && (!leq(uct, &pos[q as usize], &pos[p as usize]) || q < p)
            })
        })
        .collect();
    let mut out = Antichain::new();
    for (&p, k) in members.iter().zip(keep) {
        if k {
            out.insert(p, |a: &u32, b: &u32| {
                leq(uct, &pos[*a as usize], &pos[*b as usize])
            });
        }
    }
    out
}

/// Membership of every arena position in the downward closure of `x`.
pub fn down_flags(uct: &Uct, arena: &Arena, x: &Antichain<u32>) -> Vec<bool> {
    let pos = &arena.positions;
    (0..arena.len())
        .into_par_iter()
        .map(|p| {
            x.elements()
                .iter()
                .any(|&e| e as usize == p || leq(uct, &pos[p], &pos[e as usize]))
        })
        .collect()
}

/// Controllable predecessor on antichains: maximal safe arena positions
/// with an e-action whose successors all stay in `↓x` (or die).
pub fn cpre(uct: &Uct, arena: &Arena, x: &Antichain<u32>) -> Antichain<u32> {
    let down = down_flags(uct, arena, x);
    let good: Vec<bool> = (0..arena.len())
        .into_par_iter()
        .map(|p| choose(arena, &down, p as u32).is_some())
        .collect();
    maximal(uct, arena, &good)
}

/// Antichain iteration `X ← cpre(X)` from all safe arena positions.
/// Returns every iterate.
pub fn antichain_iterates(uct: &Uct, arena: &Arena) -> Vec<Antichain<u32>> {
    let mut x = maximal(uct, arena, &vec![true; arena.len()]);
    let mut out = vec![x.clone()];
    loop {
        let next = cpre(uct, arena, &x);
        let same =
            next.len() == x.len() && next.elements().iter().all(|e| x.elements().contains(e));
        if same {
            return out;
        }
        out.push(next.clone());
        x = next;
    }
}

#[derive(Clone, Debug, Default, PartialEq, serde::Serialize)]
pub struct BoundStats {
    pub bound: u8,
    pub positions: usize,
    pub winning: usize,
    pub antichain: usize,
    pub passes: usize,
    pub successor_evals: usize,
    pub millis: u128,
    pub realizable: bool,
}

#[derive(Clone, Debug)]
pub struct Solution {
    pub arena: Arena,
    pub winning: Vec<bool>,
    pub witness: Antichain<u32>,
    pub choice: Vec<Option<usize>>,
}

impl Solution {
    pub fn realizable(&self) -> bool {
        self.winning.first().copied().unwrap_or(false)
    }
}

#[derive(Clone, Debug)]
pub enum SolveOutcome {
    Realizable(Solution),
    UnrealizableAtBound,
}

pub const DEFAULT_POSITION_CAP: usize = 4_000_000;

/// Solves `G(T, b)`.
pub fn solve(uct: &mut Uct, b: u8, cap: usize) -> Result<(SolveOutcome, BoundStats), GameError> {
    let start = Instant::now();
    let mut stats = BoundStats {
        bound: b,
        ..Default::default()
    };
    let Some(arena) = explore(uct, b, cap)? else {
        stats.millis = start.elapsed().as_millis();
        return Ok((SolveOutcome::UnrealizableAtBound, stats));
    };
    let (winning, passes) = winning_region(&arena);
    stats.positions = arena.len();
    stats.successor_evals = arena.successor_evals;
    stats.passes = passes;
    stats.winning = winning.iter().filter(|&&w| w).count();
    let outcome = if winning[0] {
        let witness = maximal(uct, &arena, &winning);
        stats.antichain = witness.len();
        let choice = (0..arena.len() as u32)
            .map(|p| {
                if winning[p as usize] {
                    choose(&arena, &winning, p)
                } else {
                    None
                }
            })
            .collect();
        stats.realizable = true;
        SolveOutcome::Realizable(Solution {
            arena,
            winning,
            witness,
            choice,
        })
    } else {
        SolveOutcome::UnrealizableAtBound
    };
    stats.millis = start.elapsed().as_millis();
    Ok((outcome, stats))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BoundSchedule {
    pub start: u8,
    pub max: u8,
}

impl Default for BoundSchedule {
    fn default() -> Self {
        BoundSchedule { start: 0, max: 16 }
    }
}

#[derive(Clone, Debug)]
pub enum Verdict {
    Realizable { bound: u8, solution: Solution },
    Unknown { max_bound: u8 },
}

/// Tries `b = start, start+1, …, max`; never concludes unrealizability.
pub fn incremental_solve(
    uct: &mut Uct,
    schedule: BoundSchedule,
    cap: usize,
) -> Result<(Verdict, Vec<BoundStats>), GameError> {
    let mut all = Vec::new();
    for b in schedule.start..=schedule.max {
        let (outcome, stats) = solve(uct, b, cap)?;
        all.push(stats);
        if let SolveOutcome::Realizable(solution) = outcome {
            return Ok((Verdict::Realizable { bound: b, solution }, all));
        }
    }
    Ok((
        Verdict::Unknown {
            max_bound: schedule.max,
        },
        all,
    ))
}

/// `log10` of the completeness bound `4n²(n!)²` for a UCT with `n` states.
pub fn theoretical_bound_log10(n: usize) -> f64 {
    let fact: f64 = (1..=n).map(|i| (i as f64).log10()).sum();
    4f64.log10() + 2.0 * (n.max(1) as f64).log10() + 2.0 * fact
}
