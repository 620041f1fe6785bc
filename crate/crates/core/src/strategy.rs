//! Moore-machine strategies: extraction from a solved game, minimization,
//! simulation and serialization.

use std::collections::{BTreeMap, HashMap, VecDeque};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::env_model::{ActionId, EnvActionId, EnvironmentModel, ObsId, StateId};
use crate::game::{leq, Solution, MOVE_DEAD, MOVE_UNSAFE};
use crate::knowledge::Knowledge;
use crate::tree_automata::Uct;

#[derive(Debug, Error)]
pub enum StrategyError {
    #[error("extraction failed: {0}")]
    ExtractionFailure(String),
    #[error("observation `{observation}` is impossible at step {step}")]
    ObservationMismatch { step: usize, observation: String },
    #[error("strategy does not fit the model: {0}")]
    Mismatch(String),
    #[error("malformed strategy: {0}")]
    Json(#[from] serde_json::Error),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ObservationSpec {
    pub name: String,
    /// Visible propositions that hold in this observation.
    pub visible: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MachineState {
    pub output: String,
    /// Knowledge atoms claimed before projection.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub claims: Vec<String>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub error: bool,
    /// Successor per observation, in `observations` order.
    pub next: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub comment: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MooreMachine {
    pub actions: Vec<String>,
    pub observations: Vec<ObservationSpec>,
    pub initial: usize,
    pub states: Vec<MachineState>,
}

pub fn observation_specs(model: &EnvironmentModel) -> Vec<ObservationSpec> {
    model
        .observations()
        .iter()
        .map(|o| {
            let visible: Vec<String> = o
                .visible_props
                .iter()
                .map(|&i| model.props[i].clone())
                .collect();
            ObservationSpec {
                name: format!("o{}", o.id),
                visible,
            }
        })
        .collect()
}

impl MooreMachine {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn output_of(&self, m: usize) -> &str {
        &self.states[m].output
    }

    /// Maps machine outputs and observations onto model indices:
    /// `(action per state, model observation → machine observation)`.
    pub fn bind(
        &self,
        model: &EnvironmentModel,
    ) -> Result<(Vec<ActionId>, Vec<usize>), StrategyError> {
        let actions = self
            .states
            .iter()
            .map(|s| {
                model.action_index(&s.output).ok_or_else(|| {
                    StrategyError::Mismatch(format!("unknown action `{}`", s.output))
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        let mut obs_map = Vec::new();
        for spec in observation_specs(model) {
            let mut want = spec.visible.clone();
            want.sort();
            let found = self.observations.iter().position(|o| {
                let mut have = o.visible.clone();
                have.sort();
                have == want
            });
            obs_map.push(found.ok_or_else(|| {
                StrategyError::Mismatch(format!(
                    "no transition for observation {{{}}}",
                    want.join(",")
                ))
            })?);
        }
        if self.initial >= self.states.len() {
            return Err(StrategyError::Mismatch("initial state out of range".into()));
        }
        for (i, s) in self.states.iter().enumerate() {
            if s.next.len() != self.observations.len()
                || s.next.iter().any(|&t| t >= self.states.len())
            {
                return Err(StrategyError::Mismatch(format!(
                    "state {i} has a bad successor list"
                )));
            }
        }
        Ok((actions, obs_map))
    }

    /// Machine successor on a model observation.
    pub fn step(&self, m: usize, obs_map: &[usize], o: ObsId) -> usize {
        self.states[m].next[obs_map[o]]
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("machine serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, StrategyError> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph strategy {\n  rankdir=LR;\n");
        let _ = writeln!(out, "  start [shape=point];\n  start -> m{};", self.initial);
        for (i, s) in self.states.iter().enumerate() {
            let shape = if s.error { "doubleoctagon" } else { "box" };
            let _ = writeln!(out, "  m{i} [shape={shape}, label=\"{i}: {}\"];", s.output);
        }
        for (i, s) in self.states.iter().enumerate() {
            let mut by_target: BTreeMap<usize, Vec<String>> = BTreeMap::new();
            for (o, &t) in s.next.iter().enumerate() {
                let label = format!("{{{}}}", self.observations[o].visible.join(","));
                by_target.entry(t).or_default().push(label);
            }
            for (t, labels) in by_target {
                for l in labels {
                    let _ = writeln!(out, "  m{i} -> m{t} [label=\"{l}\"];");
                }
            }
        }
        out.push_str("}\n");
        out
    }

    /// Synchronous Verilog module with a one-hot state register.
    /// Ports: `clk`, `rst`, `obs` (binary observation index), `act`
    /// (binary action index).
    pub fn to_verilog(&self, module: &str) -> String {
        let bits = |n: usize| (usize::BITS - n.saturating_sub(1).leading_zeros()).max(1) as usize;
        let (ob, ab, n) = (
            bits(self.observations.len()),
            bits(self.actions.len()),
            self.states.len(),
        );
        let action_code = |name: &str| self.actions.iter().position(|a| a == name).unwrap_or(0);
        let mut out = String::new();
        let _ = writeln!(out, "module {module} (");
        let _ = writeln!(out, "  input wire clk,\n  input wire rst,");
        let _ = writeln!(out, "  input wire [{}:0] obs,", ob - 1);
        let _ = writeln!(out, "  output reg [{}:0] act\n);", ab - 1);
        for (i, o) in self.observations.iter().enumerate() {
            let _ = writeln!(out, "  // obs {i} = {{{}}}", o.visible.join(","));
        }
        for (i, a) in self.actions.iter().enumerate() {
            let _ = writeln!(out, "  // act {i} = {a}");
        }
        let _ = writeln!(out, "  reg [{}:0] state;", n - 1);
        let _ = writeln!(out, "  always @(posedge clk) begin");
        let _ = writeln!(out, "    if (rst) state <= {n}'d1 << {};", self.initial);
        let _ = writeln!(out, "    else case (1'b1)");
        for (i, s) in self.states.iter().enumerate() {
            let _ = writeln!(out, "      state[{i}]: case (obs)");
            for (o, &t) in s.next.iter().enumerate() {
                let _ = writeln!(out, "        {ob}'d{o}: state <= {n}'d1 << {t};");
            }
            let _ = writeln!(out, "        default: state <= state;\n      endcase");
        }
        let _ = writeln!(out, "      default: state <= {n}'d1 << {};", self.initial);
        let _ = writeln!(out, "    endcase\n  end");
        let _ = writeln!(out, "  always @* begin\n    case (1'b1)");
        for (i, s) in self.states.iter().enumerate() {
            let _ = writeln!(
                out,
                "      state[{i}]: act = {ab}'d{};",
                action_code(&s.output)
            );
        }
        let _ = writeln!(
            out,
            "      default: act = {ab}'d0;\n    endcase\n  end\nendmodule"
        );
        out
    }
}

/// Builds a Moore machine from a solved game.
///
/// Machine states are witness elements; each plays its recorded e-action,
/// preferring one that loops to itself, then one whose targets are already
/// covered by existing machine states.
pub fn extract(uct: &Uct, sol: &Solution) -> Result<MooreMachine, StrategyError> {
    let arena = &sol.arena;
    let pos = &arena.positions;
    let x = sol.witness.elements();
    let below = |p: u32, e: u32| p == e || leq(uct, &pos[p as usize], &pos[e as usize]);
    let start = *x
        .iter()
        .find(|&&e| below(0, e))
        .ok_or_else(|| StrategyError::ExtractionFailure("initial position not covered".into()))?;

    let valid_moves = |p: u32| -> Vec<usize> {
        (0..arena.nea)
            .filter(|&ea| {
                (0..arena.nobs).all(|o| match arena.target(p, ea, o) {
                    MOVE_DEAD => true,
                    MOVE_UNSAFE => false,
                    t => sol.winning[t as usize],
                })
            })
            .collect()
    };

    let mut ids: HashMap<u32, usize> = HashMap::from([(start, 0)]);
    let mut order = vec![start];
    let mut plays: Vec<(usize, Vec<Option<usize>>)> = Vec::new();
    let mut queue = VecDeque::from([start]);
    let mut any_dead = false;
    while let Some(p) = queue.pop_front() {
        let moves = valid_moves(p);
        if moves.is_empty() {
            return Err(StrategyError::ExtractionFailure(format!(
                "no winning move at position {p}"
            )));
        }
        let covered = |t: u32, extra: &[u32]| t == MOVE_DEAD || extra.iter().any(|&e| below(t, e));
        let targets = |ea: usize| (0..arena.nobs).map(move |o| arena.target(p, ea, o));
        let ea = moves
            .iter()
            .copied()
            .find(|&ea| targets(ea).all(|t| covered(t, &[p])))
            .or_else(|| {
                moves
                    .iter()
                    .copied()
                    .find(|&ea| targets(ea).all(|t| covered(t, &order)))
            })
            .unwrap_or(moves[0]);
        let mut next = Vec::new();
        for t in targets(ea) {
            if t == MOVE_DEAD {
                any_dead = true;
                next.push(None);
                continue;
            }
            let owner = order
                .iter()
                .copied()
                .find(|&e| below(t, e))
                .or_else(|| x.iter().copied().find(|&e| below(t, e)))
                .ok_or_else(|| {
                    StrategyError::ExtractionFailure(format!(
                        "position {t} not covered by the witness"
                    ))
                })?;
            let id = *ids.entry(owner).or_insert_with(|| {
                order.push(owner);
                queue.push_back(owner);
                order.len() - 1
            });
            next.push(Some(id));
        }
        plays.push((ea, next));
    }

    let error_id = order.len();
    let mut states: Vec<MachineState> = plays
        .iter()
        .zip(&order)
        .map(|((ea, next), &p)| MachineState {
            output: uct.model.sys_actions[uct.ea_action(*ea)].clone(),
            claims: (0..uct.num_atoms())
                .filter(|i| uct.ea_claims(*ea) & (1 << i) != 0)
                .map(|i| uct.atom_names[i].clone())
                .collect(),
            error: false,
            next: next.iter().map(|t| t.unwrap_or(error_id)).collect(),
            comment: Some(pos[p as usize].render(uct)),
        })
        .collect();
    if any_dead {
        let output = states[0].output.clone();
        states.push(MachineState {
            output,
            claims: vec![],
            error: true,
            next: vec![error_id; arena.nobs],
            comment: Some("impossible observation".into()),
        });
    }
    Ok(MooreMachine {
        actions: uct.model.sys_actions.clone(),
        observations: observation_specs(&uct.model),
        initial: 0,
        states,
    })
}

/// Quotient by Moore bisimulation; states are renumbered in BFS order.
pub fn minimize(m: &MooreMachine) -> MooreMachine {
    let n = m.states.len();
    let mut block: Vec<usize> = {
        let mut keys: Vec<(&str, bool)> = Vec::new();
        m.states
            .iter()
            .map(|s| {
                let key = (s.output.as_str(), s.error);
                match keys.iter().position(|k| *k == key) {
                    Some(i) => i,
                    None => {
                        keys.push(key);
                        keys.len() - 1
                    }
                }
            })
            .collect()
    };
    loop {
        let mut sigs: Vec<(usize, Vec<usize>)> = Vec::new();
        let next: Vec<usize> = (0..n)
            .map(|i| {
                let sig = (
                    block[i],
                    m.states[i].next.iter().map(|&t| block[t]).collect(),
                );
                match sigs.iter().position(|s| *s == sig) {
                    Some(k) => k,
                    None => {
                        sigs.push(sig);
                        sigs.len() - 1
                    }
                }
            })
            .collect();
        let stable = sigs.len() == block.iter().max().map_or(0, |b| b + 1);
        block = next;
        if stable {
            break;
        }
    }
    // renumber reachable blocks in BFS order from the initial state
    let rep: HashMap<usize, usize> = (0..n)
        .rev()
        .map(|i| (block[i], i))
        .collect::<HashMap<_, _>>();
    let mut new_id: HashMap<usize, usize> = HashMap::from([(block[m.initial], 0)]);
    let mut order = vec![block[m.initial]];
    let mut i = 0;
    while i < order.len() {
        let r = rep[&order[i]];
        for &t in &m.states[r].next {
            new_id.entry(block[t]).or_insert_with(|| {
                order.push(block[t]);
                order.len() - 1
            });
        }
        i += 1;
    }
    let states = order
        .iter()
        .map(|b| {
            let s = &m.states[rep[b]];
            MachineState {
                next: s.next.iter().map(|&t| new_id[&block[t]]).collect(),
                ..s.clone()
            }
        })
        .collect();
    MooreMachine {
        actions: m.actions.clone(),
        observations: m.observations.clone(),
        initial: 0,
        states,
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TraceStep {
    pub machine: usize,
    pub action: ActionId,
    pub env_state: StateId,
    pub observation: ObsId,
    pub knowledge: Knowledge,
}

/// Picks the environment's move among `(env action, successor)` options.
pub trait EnvResolver {
    fn pick(&mut self, step: usize, from: StateId, options: &[(EnvActionId, StateId)]) -> usize;
}

/// Plays the listed environment actions in turn, then the first option.
pub struct ScriptedResolver(pub Vec<EnvActionId>);

impl EnvResolver for ScriptedResolver {
    fn pick(&mut self, step: usize, _from: StateId, options: &[(EnvActionId, StateId)]) -> usize {
        self.0
            .get(step)
            .and_then(|b| options.iter().position(|(x, _)| x == b))
            .unwrap_or(0)
    }
}

impl<F: FnMut(usize, StateId, &[(EnvActionId, StateId)]) -> usize> EnvResolver for F {
    fn pick(&mut self, step: usize, from: StateId, options: &[(EnvActionId, StateId)]) -> usize {
        self(step, from, options)
    }
}

/// Runs the machine against the model from `start` for `steps` steps.
pub fn simulate(
    m: &MooreMachine,
    model: &EnvironmentModel,
    start: StateId,
    steps: usize,
    resolver: &mut dyn EnvResolver,
) -> Result<Vec<TraceStep>, StrategyError> {
    let (actions, obs_map) = m.bind(model)?;
    let mut know = model.init.clone();
    let mut state = start;
    let mut ms = m.initial;
    let mut trace = Vec::new();
    for step in 0..steps {
        let a = actions[ms];
        let options = &model.trans[state][a];
        let pick = resolver.pick(step, state, options).min(options.len() - 1);
        state = options[pick].1;
        let o = model.obs_of(state);
        know = model.post(&know, a, o);
        if know.is_empty() {
            return Err(StrategyError::ObservationMismatch {
                step,
                observation: format!("o{o}"),
            });
        }
        trace.push(TraceStep {
            machine: ms,
            action: a,
            env_state: state,
            observation: o,
            knowledge: know.clone(),
        });
        ms = m.step(ms, &obs_map, o);
    }
    Ok(trace)
}

/// Feeds an observation sequence to the machine, tracking knowledge.
/// Fails on the first observation that no execution can produce.
pub fn run_observations(
    m: &MooreMachine,
    model: &EnvironmentModel,
    observations: &[ObsId],
) -> Result<ObservationTrace, StrategyError> {
    let (actions, obs_map) = m.bind(model)?;
    let mut know = model.init.clone();
    let mut ms = m.initial;
    let mut out = Vec::new();
    for (step, &o) in observations.iter().enumerate() {
        let a = actions[ms];
        know = model.post(&know, a, o);
        if know.is_empty() {
            return Err(StrategyError::ObservationMismatch {
                step,
                observation: format!("o{o}"),
            });
        }
        out.push((ms, a, know.clone()));
        ms = m.step(ms, &obs_map, o);
    }
    Ok(out)
}

/// Machine state, action and knowledge after each observation.
pub type ObservationTrace = Vec<(usize, ActionId, Knowledge)>;

/// Every observation sequence of length `depth`, each either consistent
/// (with its knowledge trace) or rejected at the step it becomes impossible.
pub fn all_observation_runs(
    m: &MooreMachine,
    model: &EnvironmentModel,
    depth: usize,
) -> Vec<(Vec<ObsId>, Result<ObservationTrace, StrategyError>)> {
    let nobs = model.observations().len();
    let mut seqs: Vec<Vec<ObsId>> = vec![vec![]];
    for _ in 0..depth {
        seqs = seqs
            .into_iter()
            .flat_map(|s| {
                (0..nobs).map(move |o| {
                    let mut v = s.clone();
                    v.push(o);
                    v
                })
            })
            .collect();
    }
    seqs.into_iter()
        .map(|s| {
            let r = run_observations(m, model, &s);
            (s, r)
        })
        .collect()
}
