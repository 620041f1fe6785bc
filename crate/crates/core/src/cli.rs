//! Command-line front end: configuration, the synthesis pipeline, reports
//! and artifact emission.

use std::fmt;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use thiserror::Error;

use crate::env_model::{parse_model, EnvironmentModel, ModelError};
use crate::formula::{check_positive, parse, rewrite_chain, Formula, FormulaError};
use crate::game::{
    incremental_solve, BoundSchedule, BoundStats, GameError, Verdict, DEFAULT_POSITION_CAP,
};
use crate::oracle::{
    knowledge_coherence, validate_strategy, OracleError, ValidationMode, ValidationReport,
};
use crate::strategy::{extract, minimize, MooreMachine, StrategyError};
use crate::tree_automata::{compose_chain, UctError};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_UNKNOWN: i32 = 2;
pub const EXIT_INVALID: i32 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Model { path: PathBuf, source: ModelError },
    #[error("{origin}: {source}")]
    Formula {
        origin: String,
        source: FormulaError,
    },
    #[error("{path}: {source}")]
    Strategy {
        path: PathBuf,
        source: StrategyError,
    },
    #[error(transparent)]
    Uct(#[from] UctError),
    #[error(transparent)]
    Game(#[from] GameError),
    #[error(transparent)]
    Extraction(#[from] StrategyError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("synthesized strategy failed validation: {0}")]
    Unsound(String),
}

#[derive(Parser, Debug)]
#[command(
    name = "kltl-synth",
    version,
    about = "Synthesis of observation-based strategies for KLTL⁺ specifications"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Decide realizability and emit a strategy.
    Synth(SynthArgs),
    /// Check a strategy against a model and formula.
    Validate(ValidateArgs),
    /// Report automaton sizes without solving.
    Stats(StatsArgs),
}

#[derive(Args, Debug, Clone)]
pub struct InputArgs {
    /// Environment model file.
    #[arg(short, long)]
    pub model: PathBuf,
    /// Formula file, or the formula text itself.
    #[arg(short, long)]
    pub formula: String,
    /// Override the initial states (comma separated names).
    #[arg(long)]
    pub init: Option<String>,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum EmitFormat {
    Json,
    Dot,
    Verilog,
}

#[derive(Args, Debug, Clone)]
pub struct SynthArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long, default_value_t = 0)]
    pub bound_start: u8,
    #[arg(long, default_value_t = 16)]
    pub bound_max: u8,
    /// Solve at this bound only.
    #[arg(long, conflicts_with_all = ["bound_start", "bound_max"])]
    pub bound: Option<u8>,
    #[arg(short, long, default_value = "out")]
    pub output: PathBuf,
    #[arg(long, value_delimiter = ',', default_value = "json")]
    pub emit: Vec<EmitFormat>,
    /// Give up once a bound explores more positions than this.
    #[arg(long, default_value_t = DEFAULT_POSITION_CAP)]
    pub position_cap: usize,
    /// Keep the strategy as extracted.
    #[arg(long)]
    pub no_minimize: bool,
    #[arg(short, long)]
    pub verbose: bool,
}

#[derive(Args, Debug, Clone)]
pub struct ValidateArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Strategy in JSON form.
    #[arg(short, long)]
    pub strategy: PathBuf,
    /// Check by lasso enumeration up to this length instead of automata.
    #[arg(long)]
    pub lasso: Option<usize>,
}

#[derive(Args, Debug, Clone)]
pub struct StatsArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Random histories for the knowledge coherence check.
    #[arg(long, default_value_t = 0)]
    pub coherence_samples: usize,
    #[arg(long, default_value_t = 16)]
    pub coherence_depth: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Stop expanding the UCT after this many states.
    #[arg(long, default_value_t = 1_000_000)]
    pub state_cap: usize,
    #[arg(long)]
    pub json: bool,
}

/// Resolved inputs of a synthesis run.
#[derive(Clone, Debug)]
pub struct RunConfig {
    pub model_path: PathBuf,
    pub formula: String,
    pub init: Option<String>,
    pub bound_start: u8,
    pub bound_max: u8,
    pub emit: Vec<EmitFormat>,
    pub output: Option<PathBuf>,
    pub position_cap: usize,
    pub minimize: bool,
    pub verbose: bool,
}

impl RunConfig {
    pub fn new(model_path: impl Into<PathBuf>, formula: impl Into<String>) -> Self {
        RunConfig {
            model_path: model_path.into(),
            formula: formula.into(),
            init: None,
            bound_start: 0,
            bound_max: 16,
            emit: vec![EmitFormat::Json],
            output: None,
            position_cap: DEFAULT_POSITION_CAP,
            minimize: true,
            verbose: false,
        }
    }
}

impl From<&SynthArgs> for RunConfig {
    fn from(a: &SynthArgs) -> Self {
        let (bound_start, bound_max) = match a.bound {
            Some(b) => (b, b),
            None => (a.bound_start, a.bound_max),
        };
        RunConfig {
            model_path: a.input.model.clone(),
            formula: a.input.formula.clone(),
            init: a.input.init.clone(),
            bound_start,
            bound_max,
            emit: a.emit.clone(),
            output: Some(a.output.clone()),
            position_cap: a.position_cap,
            minimize: !a.no_minimize,
            verbose: a.verbose,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(
    tag = "verdict",
    content = "bound",
    rename_all = "SCREAMING_SNAKE_CASE"
)]
pub enum RunVerdict {
    Realizable(u8),
    Unknown(u8),
}

impl fmt::Display for RunVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RunVerdict::Realizable(b) => write!(f, "REALIZABLE (b = {b})"),
            RunVerdict::Unknown(b) => write!(f, "UNKNOWN (no strategy up to b = {b})"),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Phase {
    pub name: &'static str,
    pub millis: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct RunReport {
    pub verdict: RunVerdict,
    pub knowledge_depth: usize,
    pub knowledge_atoms: usize,
    pub uct_states: usize,
    pub sink_hits: usize,
    pub antichain_peak: usize,
    pub bounds: Vec<BoundStats>,
    pub strategy_states: Option<usize>,
    pub minimized_states: Option<usize>,
    pub validated: bool,
    pub artifacts: Vec<PathBuf>,
    pub phases: Vec<Phase>,
}

impl fmt::Display for RunReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "verdict: {}", self.verdict)?;
        writeln!(
            f,
            "knowledge: depth {}, {} atoms",
            self.knowledge_depth, self.knowledge_atoms
        )?;
        writeln!(
            f,
            "uct: {} states, {} sink hits",
            self.uct_states, self.sink_hits
        )?;
        for b in &self.bounds {
            writeln!(
                f,
                "  b = {:>2}: {:>8} positions, {:>8} winning, antichain {:>6}, {} ms",
                b.bound, b.positions, b.winning, b.antichain, b.millis
            )?;
        }
        if let (Some(raw), Some(min)) = (self.strategy_states, self.minimized_states) {
            writeln!(f, "strategy: {raw} states, {min} after minimization")?;
            writeln!(f, "validated: {}", self.validated)?;
        }
        for a in &self.artifacts {
            writeln!(f, "wrote {}", a.display())?;
        }
        let phases: Vec<String> = self
            .phases
            .iter()
            .map(|p| format!("{} {:.1} ms", p.name, p.millis))
            .collect();
        write!(f, "time: {}", phases.join(", "))
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Loads the model and applies an optional initial-state override.
pub fn load_model(path: &Path, init: Option<&str>) -> Result<EnvironmentModel, CliError> {
    let wrap = |source| CliError::Model {
        path: path.to_path_buf(),
        source,
    };
    let model = parse_model(&read(path)?).map_err(wrap)?;
    match init {
        None => Ok(model),
        Some(names) => {
            let states = model.resolve_states(names).map_err(wrap)?;
            model.with_init(&states).map_err(wrap)
        }
    }
}

/// Parses a formula given as a file path or as literal text, and checks
/// that knowledge occurs only positively.
pub fn load_formula(source: &str) -> Result<Formula, CliError> {
    let path = Path::new(source);
    let (origin, text) = if path.is_file() {
        (path.display().to_string(), read(path)?)
    } else {
        ("<formula>".to_string(), source.to_string())
    };
    let wrap = |source| CliError::Formula {
        origin: origin.clone(),
        source,
    };
    let f = parse(text.trim()).map_err(wrap)?;
    check_positive(&f).map_err(wrap)?;
    Ok(f)
}

/// Caps rayon's worker count from `KLTL_SYNTH_THREADS`.
pub fn configure_threads() -> Result<(), CliError> {
    let Ok(value) = std::env::var("KLTL_SYNTH_THREADS") else {
        return Ok(());
    };
    let n: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| {
            CliError::Config(format!(
                "KLTL_SYNTH_THREADS must be a positive integer, got `{value}`"
            ))
        })?;
    // a pool may already exist when called twice in one process
    let _ = rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global();
    Ok(())
}

fn elapsed_ms(t: Instant) -> f64 {
    t.elapsed().as_secs_f64() * 1000.0
}

/// Full pipeline. Returns the report and, when realizable, the emitted strategy.
pub fn cmd_synth(cfg: &RunConfig) -> Result<(RunReport, Option<MooreMachine>), CliError> {
    if cfg.bound_start > cfg.bound_max {
        return Err(CliError::Config(format!(
            "bound start {} exceeds bound max {}",
            cfg.bound_start, cfg.bound_max
        )));
    }
    let mut phases = Vec::new();
    let t = Instant::now();
    let model = load_model(&cfg.model_path, cfg.init.as_deref())?;
    let phi = load_formula(&cfg.formula)?;
    let chain = rewrite_chain(&phi);
    phases.push(Phase {
        name: "parse",
        millis: elapsed_ms(t),
    });

    let t = Instant::now();
    let mut uct = compose_chain(&model, &chain)?;
    phases.push(Phase {
        name: "compose",
        millis: elapsed_ms(t),
    });

    let t = Instant::now();
    let schedule = BoundSchedule {
        start: cfg.bound_start,
        max: cfg.bound_max,
    };
    let (verdict, bounds) = incremental_solve(&mut uct, schedule, cfg.position_cap)?;
    if cfg.verbose {
        for b in &bounds {
            eprintln!(
                "b = {}: {} positions, realizable = {}",
                b.bound, b.positions, b.realizable
            );
        }
    }
    phases.push(Phase {
        name: "solve",
        millis: elapsed_ms(t),
    });

    let stats = uct.stats();
    let mut report = RunReport {
        verdict: RunVerdict::Unknown(cfg.bound_max),
        knowledge_depth: chain.depth(),
        knowledge_atoms: chain.atoms.len(),
        uct_states: stats.materialized,
        sink_hits: stats.sink_hits,
        antichain_peak: bounds.iter().map(|b| b.antichain).max().unwrap_or(0),
        bounds,
        strategy_states: None,
        minimized_states: None,
        validated: false,
        artifacts: Vec::new(),
        phases,
    };
    let (bound, solution) = match verdict {
        Verdict::Realizable { bound, solution } => (bound, solution),
        Verdict::Unknown { max_bound } => {
            report.verdict = RunVerdict::Unknown(max_bound);
            if let Some(dir) = &cfg.output {
                write_report(dir, &mut report)?;
            }
            return Ok((report, None));
        }
    };
    report.verdict = RunVerdict::Realizable(bound);

    let t = Instant::now();
    let raw = extract(&uct, &solution)?;
    let machine = if cfg.minimize {
        minimize(&raw)
    } else {
        raw.clone()
    };
    report.strategy_states = Some(raw.len());
    report.minimized_states = Some(machine.len());
    report.phases.push(Phase {
        name: "extract",
        millis: elapsed_ms(t),
    });

    let t = Instant::now();
    let check = validate_strategy(&model, &machine, &phi, ValidationMode::Automata)?;
    if !check.ok {
        return Err(CliError::Unsound(check.reason.unwrap_or_default()));
    }
    report.validated = true;
    report.phases.push(Phase {
        name: "validate",
        millis: elapsed_ms(t),
    });

    if let Some(dir) = &cfg.output {
        write_artifacts(dir, &cfg.emit, &machine, &mut report)?;
        write_report(dir, &mut report)?;
    }
    Ok((report, Some(machine)))
}

fn write_file(path: PathBuf, text: &str, report: &mut RunReport) -> Result<(), CliError> {
    std::fs::write(&path, text).map_err(|source| CliError::Io {
        path: path.clone(),
        source,
    })?;
    report.artifacts.push(path);
    Ok(())
}

fn ensure_dir(dir: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(dir).map_err(|source| CliError::Io {
        path: dir.to_path_buf(),
        source,
    })
}

fn write_artifacts(
    dir: &Path,
    emit: &[EmitFormat],
    machine: &MooreMachine,
    report: &mut RunReport,
) -> Result<(), CliError> {
    ensure_dir(dir)?;
    for format in emit {
        let (name, text) = match format {
            EmitFormat::Json => ("strategy.json", machine.to_json()),
            EmitFormat::Dot => ("strategy.dot", machine.to_dot()),
            EmitFormat::Verilog => ("strategy.v", machine.to_verilog("strategy")),
        };
        write_file(dir.join(name), &text, report)?;
    }
    Ok(())
}

fn write_report(dir: &Path, report: &mut RunReport) -> Result<(), CliError> {
    ensure_dir(dir)?;
    let path = dir.join("report.json");
    report.artifacts.push(path.clone());
    let text = serde_json::to_string_pretty(report).expect("report serializes");
    std::fs::write(&path, text).map_err(|source| CliError::Io { path, source })
}

/// Loads a JSON strategy and checks it against the model and formula.
pub fn cmd_validate(
    model_path: &Path,
    strategy_path: &Path,
    formula: &str,
    init: Option<&str>,
    mode: ValidationMode,
) -> Result<ValidationReport, CliError> {
    let model = load_model(model_path, init)?;
    let phi = load_formula(formula)?;
    let machine =
        MooreMachine::from_json(&read(strategy_path)?).map_err(|source| CliError::Strategy {
            path: strategy_path.to_path_buf(),
            source,
        })?;
    machine.bind(&model).map_err(|source| CliError::Strategy {
        path: strategy_path.to_path_buf(),
        source,
    })?;
    Ok(validate_strategy(&model, &machine, &phi, mode)?)
}

#[derive(Clone, Debug, Serialize)]
pub struct ComponentStats {
    pub formula: String,
    pub ucw_states: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct CoherenceStats {
    pub samples: usize,
    pub depth: usize,
    pub seed: u64,
    pub violations: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct StatsReport {
    pub states: usize,
    pub observations: usize,
    pub knowledge_depth: usize,
    pub knowledge_atoms: usize,
    pub components: Vec<ComponentStats>,
    pub e_actions: usize,
    pub uct_states: usize,
    /// Expansion stopped at the state cap.
    pub truncated: bool,
    pub coherence: Option<CoherenceStats>,
}

impl fmt::Display for StatsReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "model: {} states, {} observations",
            self.states, self.observations
        )?;
        writeln!(
            f,
            "knowledge: d = {}, {} atoms",
            self.knowledge_depth, self.knowledge_atoms
        )?;
        for (i, c) in self.components.iter().enumerate() {
            writeln!(f, "  ucw[{i}]: {} states for {}", c.ucw_states, c.formula)?;
        }
        write!(
            f,
            "uct: {} reachable states{} over {} e-actions",
            self.uct_states,
            if self.truncated { " (truncated)" } else { "" },
            self.e_actions
        )?;
        if let Some(c) = &self.coherence {
            write!(
                f,
                "\ncoherence: {} violations in {} histories of length {} (seed {})",
                c.violations, c.samples, c.depth, c.seed
            )?;
        }
        Ok(())
    }
}

pub fn cmd_stats(args: &StatsArgs) -> Result<StatsReport, CliError> {
    use rand::SeedableRng;

    let model = load_model(&args.input.model, args.input.init.as_deref())?;
    let phi = load_formula(&args.input.formula)?;
    let chain = rewrite_chain(&phi);
    let mut uct = compose_chain(&model, &chain)?;
    let reachable = uct.expand_all(args.state_cap);
    let coherence = (args.coherence_samples > 0).then(|| {
        let mut rng = rand::rngs::StdRng::seed_from_u64(args.seed);
        let v = knowledge_coherence(
            &mut uct,
            args.coherence_samples,
            args.coherence_depth,
            &mut rng,
        );
        CoherenceStats {
            samples: args.coherence_samples,
            depth: args.coherence_depth,
            seed: args.seed,
            violations: v.len(),
        }
    });
    Ok(StatsReport {
        states: model.num_states(),
        observations: model.observations().len(),
        knowledge_depth: chain.depth(),
        knowledge_atoms: chain.atoms.len(),
        components: uct
            .components
            .iter()
            .map(|c| ComponentStats {
                formula: c.formula.to_string(),
                ucw_states: c.ucw.0.num_states(),
            })
            .collect(),
        e_actions: uct.num_eactions(),
        uct_states: reachable,
        truncated: reachable >= args.state_cap,
        coherence,
    })
}

/// Dispatches a parsed command line; returns the process exit code.
pub fn run(cli: Cli) -> i32 {
    if let Err(e) = configure_threads() {
        eprintln!("error: {e}");
        return EXIT_INPUT;
    }
    match cli.command {
        Command::Synth(args) => match cmd_synth(&RunConfig::from(&args)) {
            Ok((report, _)) => {
                println!("{report}");
                match report.verdict {
                    RunVerdict::Realizable(_) => EXIT_OK,
                    RunVerdict::Unknown(_) => EXIT_UNKNOWN,
                }
            }
            Err(e) => {
                eprintln!("error: {e}");
                EXIT_INPUT
            }
        },
        Command::Validate(args) => {
            let mode = match args.lasso {
                Some(max_len) => ValidationMode::Lasso { max_len },
                None => ValidationMode::Automata,
            };
            match cmd_validate(
                &args.input.model,
                &args.strategy,
                &args.input.formula,
                args.input.init.as_deref(),
                mode,
            ) {
                Ok(r) if r.ok => {
                    println!("PASS ({} information nodes)", r.info_nodes);
                    EXIT_OK
                }
                Ok(r) => {
                    println!("FAIL: {}", r.reason.unwrap_or_default());
                    EXIT_INVALID
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    EXIT_INPUT
                }
            }
        }
        Command::Stats(args) => match cmd_stats(&args) {
            Ok(r) => {
                if args.json {
                    println!(
                        "{}",
                        serde_json::to_string_pretty(&r).expect("report serializes")
                    );
                } else {
                    println!("{r}");
                }
                EXIT_OK
            }
            Err(e) => {
                eprintln!("error: {e}");
                EXIT_INPUT
            }
        },
    }
}
