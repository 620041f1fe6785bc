//! Environment models with partial observation, and the knowledge update `post`.

use std::collections::{BTreeMap, HashMap};

use thiserror::Error;

use crate::knowledge::Knowledge;

pub type StateId = usize;
pub type ActionId = usize;
pub type EnvActionId = usize;
pub type ObsId = usize;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ModelError {
    #[error("model line {line}: {message}")]
    Format { line: usize, message: String },
    #[error("state `{0}` has no outgoing transition")]
    Deadlock(String),
    #[error("state `{state}` has no transition for system action `{action}`")]
    Incomplete { state: String, action: String },
    #[error("model: {0}")]
    Invalid(String),
}

fn format_err(line: usize, message: impl Into<String>) -> ModelError {
    ModelError::Format {
        line,
        message: message.into(),
    }
}

/// States sharing one visible labelling.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Observation {
    pub id: ObsId,
    pub members: Knowledge,
    /// Visible propositions, as indices into `props`.
    pub visible_props: Vec<usize>,
}

#[derive(Clone, Debug)]
pub struct EnvironmentModel {
    pub props: Vec<String>,
    pub visible: Vec<bool>,
    pub sys_actions: Vec<String>,
    pub env_actions: Vec<String>,
    pub states: Vec<String>,
    /// Proposition bitmask per state.
    pub labels: Vec<u64>,
    pub init: Knowledge,
    /// `trans[s][a]` lists `(b, s')`.
    pub trans: Vec<Vec<Vec<(EnvActionId, StateId)>>>,
    succ: Vec<Vec<Knowledge>>,
    observations: Vec<Observation>,
    obs_of: Vec<ObsId>,
}

/// Raw transition in declaration form.
pub type RawTransition = (StateId, ActionId, EnvActionId, StateId);

impl EnvironmentModel {
    /// Builds and validates a model from interned parts.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        props: Vec<String>,
        visible: Vec<bool>,
        sys_actions: Vec<String>,
        env_actions: Vec<String>,
        states: Vec<String>,
        labels: Vec<u64>,
        init: Vec<StateId>,
        transitions: &[RawTransition],
    ) -> Result<Self, ModelError> {
        let n = states.len();
        if n == 0 {
            return Err(ModelError::Invalid("no states declared".into()));
        }
        if props.len() > 64 {
            return Err(ModelError::Invalid(
                "at most 64 propositions supported".into(),
            ));
        }
        if sys_actions.is_empty() || env_actions.is_empty() {
            return Err(ModelError::Invalid(
                "both action sets must be nonempty".into(),
            ));
        }
        if init.is_empty() {
            return Err(ModelError::Invalid("initial set is empty".into()));
        }
        let mut trans = vec![vec![Vec::new(); sys_actions.len()]; n];
        for &(s, a, b, t) in transitions {
            if !trans[s][a].contains(&(b, t)) {
                trans[s][a].push((b, t));
            }
        }
        for (s, row) in trans.iter_mut().enumerate() {
            if row.iter().all(|v| v.is_empty()) {
                return Err(ModelError::Deadlock(states[s].clone()));
            }
            for (a, v) in row.iter_mut().enumerate() {
                if v.is_empty() {
                    return Err(ModelError::Incomplete {
                        state: states[s].clone(),
                        action: sys_actions[a].clone(),
                    });
                }
                v.sort_unstable();
            }
        }
        let succ = trans
            .iter()
            .map(|row| {
                row.iter()
                    .map(|v| Knowledge::from_iter(n, v.iter().map(|&(_, t)| t)))
                    .collect()
            })
            .collect();
        let vis_mask: u64 = visible
            .iter()
            .enumerate()
            .filter(|(_, &v)| v)
            .fold(0, |m, (i, _)| m | 1 << i);
        let mut by_label: Vec<(u64, Vec<StateId>)> = Vec::new();
        for (s, &label) in labels.iter().enumerate() {
            let key = label & vis_mask;
            match by_label.iter_mut().find(|(k, _)| *k == key) {
                Some((_, v)) => v.push(s),
                None => by_label.push((key, vec![s])),
            }
        }
        let mut obs_of = vec![0; n];
        let observations = by_label
            .into_iter()
            .enumerate()
            .map(|(id, (key, members))| {
                for &s in &members {
                    obs_of[s] = id;
                }
                Observation {
                    id,
                    members: Knowledge::from_iter(n, members),
                    visible_props: (0..props.len()).filter(|i| key & (1 << i) != 0).collect(),
                }
            })
            .collect();
        Ok(EnvironmentModel {
            props,
            visible,
            sys_actions,
            env_actions,
            labels,
            init: Knowledge::from_iter(n, init),
            states,
            trans,
            succ,
            observations,
            obs_of,
        })
    }

    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    pub fn observations(&self) -> &[Observation] {
        &self.observations
    }

    pub fn obs_of(&self, s: StateId) -> ObsId {
        self.obs_of[s]
    }

    pub fn prop_index(&self, name: &str) -> Option<usize> {
        self.props.iter().position(|p| p == name)
    }

    pub fn state_index(&self, name: &str) -> Option<StateId> {
        self.states.iter().position(|p| p == name)
    }

    pub fn action_index(&self, name: &str) -> Option<ActionId> {
        self.sys_actions.iter().position(|p| p == name)
    }

    pub fn empty_set(&self) -> Knowledge {
        Knowledge::empty(self.num_states())
    }

    /// All successors of `s` under system action `a`.
    pub fn successors(&self, s: StateId, a: ActionId) -> &Knowledge {
        &self.succ[s][a]
    }

    /// States of `o` reachable from `i` in one `a`-step.
    pub fn post(&self, i: &Knowledge, a: ActionId, o: ObsId) -> Knowledge {
        let mut out = self.image(i, a);
        out.intersect_with(&self.observations[o].members);
        out
    }

    /// One-step image of `i` under `a`, ignoring observations.
    pub fn image(&self, i: &Knowledge, a: ActionId) -> Knowledge {
        let mut out = self.empty_set();
        for s in i.iter() {
            out.union_with(&self.succ[s][a]);
        }
        out
    }

    /// Same model with a different initial set.
    pub fn with_init(&self, init: &[StateId]) -> Result<Self, ModelError> {
        if init.is_empty() {
            return Err(ModelError::Invalid("initial set is empty".into()));
        }
        let mut m = self.clone();
        m.init = Knowledge::from_iter(self.num_states(), init.iter().copied());
        Ok(m)
    }

    /// Resolves a comma or space separated list of state names.
    pub fn resolve_states(&self, names: &str) -> Result<Vec<StateId>, ModelError> {
        names
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|s| !s.is_empty())
            .map(|name| {
                self.state_index(name)
                    .ok_or_else(|| ModelError::Invalid(format!("unknown state `{name}`")))
            })
            .collect()
    }

    pub fn label_names(&self, s: StateId) -> Vec<&str> {
        (0..self.props.len())
            .filter(|i| self.labels[s] & (1 << i) != 0)
            .map(|i| self.props[i].as_str())
            .collect()
    }

    /// Renders the model back into the text format.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("props: {}\n", self.props.join(" ")));
        let vis: Vec<&str> = (0..self.props.len())
            .filter(|&i| self.visible[i])
            .map(|i| self.props[i].as_str())
            .collect();
        out.push_str(&format!("visible: {}\n", vis.join(" ")));
        out.push_str(&format!("sys_actions: {}\n", self.sys_actions.join(" ")));
        out.push_str(&format!("env_actions: {}\n", self.env_actions.join(" ")));
        for (s, name) in self.states.iter().enumerate() {
            out.push_str(&format!(
                "state: {name} {{{}}}\n",
                self.label_names(s).join(",")
            ));
        }
        let init: Vec<&str> = self.init.iter().map(|s| self.states[s].as_str()).collect();
        out.push_str(&format!("init: {}\n", init.join(" ")));
        for (s, row) in self.trans.iter().enumerate() {
            for (a, v) in row.iter().enumerate() {
                for &(b, t) in v {
                    out.push_str(&format!(
                        "trans: {} {} {} -> {}\n",
                        self.states[s], self.sys_actions[a], self.env_actions[b], self.states[t]
                    ));
                }
            }
        }
        out
    }
}

fn intern(names: &[&str], line: usize, what: &str) -> Result<Vec<String>, ModelError> {
    let mut seen = HashMap::new();
    for (i, n) in names.iter().enumerate() {
        if !is_ident(n) {
            return Err(format_err(line, format!("invalid {what} name `{n}`")));
        }
        if seen.insert(*n, i).is_some() {
            return Err(format_err(line, format!("duplicate {what} `{n}`")));
        }
    }
    Ok(names.iter().map(|s| s.to_string()).collect())
}

fn is_ident(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

/// Parses the line-oriented model format.
pub fn parse_model(text: &str) -> Result<EnvironmentModel, ModelError> {
    let mut props: Option<Vec<String>> = None;
    let mut visible_names: Vec<(usize, String)> = Vec::new();
    let mut sys: Option<Vec<String>> = None;
    let mut env: Option<Vec<String>> = None;
    let mut states: Vec<(usize, String, Vec<String>)> = Vec::new();
    let mut init: Option<(usize, Vec<String>)> = None;
    let mut trans: Vec<(usize, [String; 4])> = Vec::new();

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (key, rest) = content
            .split_once(':')
            .ok_or_else(|| format_err(line, "expected `key: value`"))?;
        let rest = rest.trim();
        let words: Vec<&str> = rest.split_whitespace().collect();
        match key.trim() {
            "props" => props = Some(intern(&words, line, "proposition")?),
            "visible" => visible_names.extend(words.iter().map(|w| (line, w.to_string()))),
            "sys_actions" => sys = Some(intern(&words, line, "action")?),
            "env_actions" => env = Some(intern(&words, line, "action")?),
            "state" => {
                let (name, label) = match rest.find('{') {
                    Some(pos) => {
                        let close = rest
                            .rfind('}')
                            .filter(|&c| c > pos && rest[c + 1..].trim().is_empty())
                            .ok_or_else(|| format_err(line, "unterminated label set"))?;
                        (rest[..pos].trim(), &rest[pos + 1..close])
                    }
                    None => (rest, ""),
                };
                if !is_ident(name) {
                    return Err(format_err(line, format!("invalid state name `{name}`")));
                }
                let label = label
                    .split(|c: char| c == ',' || c.is_whitespace())
                    .filter(|s| !s.is_empty())
                    .map(str::to_string)
                    .collect();
                states.push((line, name.to_string(), label));
            }
            "init" => init = Some((line, words.iter().map(|s| s.to_string()).collect())),
            "trans" => {
                let parts: Vec<&str> = rest.split_whitespace().collect();
                if parts.len() != 5 || parts[3] != "->" {
                    return Err(format_err(line, "expected `trans: src sys env -> dst`"));
                }
                trans.push((
                    line,
                    [parts[0], parts[1], parts[2], parts[4]].map(str::to_string),
                ));
            }
            other => return Err(format_err(line, format!("unknown key `{other}`"))),
        }
    }

    let props = props.ok_or_else(|| format_err(0, "missing `props`"))?;
    let sys = sys.ok_or_else(|| format_err(0, "missing `sys_actions`"))?;
    let env = env.ok_or_else(|| format_err(0, "missing `env_actions`"))?;
    let prop_idx: HashMap<&str, usize> = props
        .iter()
        .enumerate()
        .map(|(i, p)| (p.as_str(), i))
        .collect();

    let mut visible = vec![false; props.len()];
    for (line, v) in &visible_names {
        let i = prop_idx
            .get(v.as_str())
            .ok_or_else(|| format_err(*line, format!("unknown proposition `{v}`")))?;
        visible[*i] = true;
    }

    let mut state_idx: BTreeMap<String, usize> = BTreeMap::new();
    let mut labels = Vec::new();
    for (line, name, label) in &states {
        if state_idx.insert(name.clone(), labels.len()).is_some() {
            return Err(format_err(*line, format!("duplicate state `{name}`")));
        }
        let mut mask = 0u64;
        for p in label {
            let i = prop_idx
                .get(p.as_str())
                .ok_or_else(|| format_err(*line, format!("unknown proposition `{p}`")))?;
            mask |= 1 << i;
        }
        labels.push(mask);
    }

    let lookup = |map: &dyn Fn(&str) -> Option<usize>, name: &str, line: usize, what: &str| {
        map(name).ok_or_else(|| format_err(line, format!("unknown {what} `{name}`")))
    };
    let find_state = |n: &str| state_idx.get(n).copied();
    let find_sys = |n: &str| sys.iter().position(|x| x == n);
    let find_env = |n: &str| env.iter().position(|x| x == n);

    let (init_line, init_names) = init.ok_or_else(|| format_err(0, "missing `init`"))?;
    let init_ids = init_names
        .iter()
        .map(|n| lookup(&find_state, n, init_line, "state"))
        .collect::<Result<Vec<_>, _>>()?;

    let mut raw = Vec::new();
    for (line, [src, a, b, dst]) in &trans {
        let s = lookup(&find_state, src, *line, "state")?;
        let t = lookup(&find_state, dst, *line, "state")?;
        let sys_ids: Vec<usize> = if a == "*" {
            (0..sys.len()).collect()
        } else {
            vec![lookup(&find_sys, a, *line, "system action")?]
        };
        let env_ids: Vec<usize> = if b == "*" {
            (0..env.len()).collect()
        } else {
            vec![lookup(&find_env, b, *line, "environment action")?]
        };
        for &ai in &sys_ids {
            for &bi in &env_ids {
                raw.push((s, ai, bi, t));
            }
        }
    }

    let names = states.into_iter().map(|(_, n, _)| n).collect();
    EnvironmentModel::new(props, visible, sys, env, names, labels, init_ids, &raw)
}
