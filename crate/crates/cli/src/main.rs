//! `stabscope`: sweeps, scaling analysis, closed-form curves, oracles,
//! certification and spectrum dumps, each run recorded in a replayable
//! manifest.

mod commands;
mod grid;
mod manifest;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use stabscope_core::models::DEFAULT_DEPTH;
use stabscope_core::Model;

use crate::manifest::{RunManifest, MANIFEST_SCHEMA};

/// Default output directory when `--out` is not given.
pub const OUT_DIR_ENV: &str = "STABSCOPE_OUT_DIR";

#[derive(Parser, Debug)]
#[command(
    name = "stabscope",
    version,
    about = "Stabilizer Renyi entropy and magic toolkit"
)]
struct Cli {
    /// Worker threads for parallel sections (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    /// Ensemble sweep of a state model over register sizes and a parameter grid.
    Sweep(SweepArgs),
    /// Crossing or collapse analysis of a sweep CSV.
    Analyze(AnalyzeArgs),
    /// Evaluate a closed-form curve into the sweep CSV schema.
    Analytic(AnalyticArgs),
    /// Brute-force stabilizer monotones of one state.
    Oracle(OracleArgs),
    /// Fidelity certification by Pauli sampling.
    Certify(CertifyArgs),
    /// Binned Pauli spectrum and SREs of one state.
    Spectrum(SpectrumArgs),
    /// Write a state as JSON.
    State(StateCmdArgs),
    /// Re-run the invocation recorded in a manifest.
    Replay(ReplayArgs),
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Sweep(_) => "sweep",
            Command::Analyze(_) => "analyze",
            Command::Analytic(_) => "analytic",
            Command::Oracle(_) => "oracle",
            Command::Certify(_) => "certify",
            Command::Spectrum(_) => "spectrum",
            Command::State(_) => "state",
            Command::Replay(_) => "replay",
        }
    }
}

/// Parsed `lo:hi:step` grid or comma list.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Grid(pub Vec<f64>);

fn grid_arg(s: &str) -> Result<Grid> {
    grid::parse_grid(s).map(Grid)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Sizes(pub Vec<usize>);

fn sizes_arg(s: &str) -> Result<Sizes> {
    grid::parse_sizes(s).map(Sizes)
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelArg {
    CliffordT,
    RandomBasis,
    Gue,
}

impl From<ModelArg> for Model {
    fn from(m: ModelArg) -> Model {
        match m {
            ModelArg::CliffordT => Model::CliffordT,
            ModelArg::RandomBasis => Model::RandomBasis,
            ModelArg::Gue => Model::Gue,
        }
    }
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Record {
    Hist,
    Dmin,
    Fidelity,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct SweepArgs {
    #[arg(long, value_enum)]
    pub model: ModelArg,
    /// Register sizes, e.g. `6,8,10`.
    #[arg(long = "n", value_parser = sizes_arg)]
    pub ns: Sizes,
    /// T-gate densities (clifford-t); `n_t = round(q n)`.
    #[arg(long, value_parser = grid_arg)]
    pub q: Option<Grid>,
    /// Times (random-basis, gue).
    #[arg(long, value_parser = grid_arg, conflicts_with = "t2")]
    pub t: Option<Grid>,
    /// Grid in `t^2`; converted to times.
    #[arg(long, value_parser = grid_arg)]
    pub t2: Option<Grid>,
    #[arg(long, value_parser = grid_arg, default_value = "2")]
    pub alphas: Grid,
    #[arg(long, default_value_t = stabscope_core::experiments::DEFAULT_INSTANCES)]
    pub instances: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Rotation layers of the random-basis model.
    #[arg(long, default_value_t = DEFAULT_DEPTH)]
    pub depth: u64,
    /// Extra outputs: hist, dmin, fidelity.
    #[arg(long, value_enum, value_delimiter = ',')]
    pub record: Vec<Record>,
    #[arg(long, default_value_t = stabscope_core::experiments::DEFAULT_BINS)]
    pub bins: usize,
    /// GUE: start from a random stabilizer state instead of |0...0>.
    #[arg(long)]
    pub random_initial: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AnalyzeMode {
    Crossing,
    Collapse,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct AnalyzeArgs {
    /// Sweep CSV.
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long, value_enum)]
    pub mode: AnalyzeMode,
    #[arg(long, default_value_t = 2.0)]
    pub alpha: f64,
    /// Abscissa scale exponent (default 1 for q, 0 for t).
    #[arg(long)]
    pub kappa: Option<f64>,
    /// Ordinate scale exponent.
    #[arg(long, default_value_t = 0.0)]
    pub gamma: f64,
    /// Half-width of the collapse window (default: 20% of the grid span).
    #[arg(long)]
    pub window: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Formula {
    M2CliffordT,
    M2CliffordTAsymptotic,
    LinearModel,
    RandomBasis,
    RandomBasisDeep,
    RandomBasisAsymptotic,
    GueApprox,
    SreHaar,
    SreMax,
    PerTgate,
    CriticalTable,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct AnalyticArgs {
    #[arg(long, value_enum)]
    pub formula: Formula,
    #[arg(long = "n", value_parser = sizes_arg)]
    pub ns: Option<Sizes>,
    /// T-gate counts.
    #[arg(long, value_parser = grid_arg)]
    pub nt: Option<Grid>,
    #[arg(long, value_parser = grid_arg)]
    pub q: Option<Grid>,
    #[arg(long, value_parser = grid_arg, conflicts_with = "t2")]
    pub t: Option<Grid>,
    #[arg(long, value_parser = grid_arg)]
    pub t2: Option<Grid>,
    #[arg(long, value_parser = grid_arg)]
    pub alphas: Option<Grid>,
    /// Layers for the finite-depth random-basis formula.
    #[arg(long, default_value_t = DEFAULT_DEPTH)]
    pub d: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Preset {
    /// |0...0>
    Zero,
    /// |+...+>
    Plus,
    /// T|+> on every qubit.
    T,
}

/// How the input state is obtained.
#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct StateArgs {
    /// State JSON as written by `stabscope state`.
    #[arg(long, conflicts_with_all = ["preset", "model"])]
    pub state_file: Option<PathBuf>,
    #[arg(long, value_enum, conflicts_with = "model")]
    pub preset: Option<Preset>,
    #[arg(long, value_enum)]
    pub model: Option<ModelArg>,
    #[arg(long = "n")]
    pub n: Option<usize>,
    /// T-gate count (clifford-t).
    #[arg(long, conflicts_with = "q")]
    pub nt: Option<usize>,
    /// T-gate density (clifford-t).
    #[arg(long)]
    pub q: Option<f64>,
    /// Time (random-basis, gue).
    #[arg(long)]
    pub t: Option<f64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = DEFAULT_DEPTH)]
    pub depth: u64,
    #[arg(long)]
    pub random_initial: bool,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OracleKind {
    Fstab,
    Dmin,
    Lr,
    Nullity,
    /// All bound checks.
    Bounds,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct OracleArgs {
    #[arg(value_enum)]
    pub measure: OracleKind,
    #[command(flatten)]
    pub state: StateArgs,
    /// Renyi indices for `bounds`.
    #[arg(long, value_parser = grid_arg, default_value = "2,3,4")]
    pub alphas: Grid,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProxyArg {
    /// Sample from the closest stabilizer state.
    Stabilizer,
    /// Sample from the target state itself.
    Direct,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct CertifyArgs {
    #[command(flatten)]
    pub state: StateArgs,
    #[arg(long, default_value_t = 10_000)]
    pub samples: usize,
    #[arg(long, default_value_t = 0.05)]
    pub epsilon: f64,
    #[arg(long, default_value_t = 0.05)]
    pub delta: f64,
    /// `none` or `depolarizing:<p>`.
    #[arg(long, default_value = "none")]
    pub noise: String,
    #[arg(long, value_enum, default_value = "stabilizer")]
    pub proxy: ProxyArg,
    #[arg(long, default_value_t = 1)]
    pub sample_seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct SpectrumArgs {
    #[command(flatten)]
    pub state: StateArgs,
    #[arg(long, default_value_t = stabscope_core::experiments::DEFAULT_BINS)]
    pub bins: usize,
    #[arg(long, value_parser = grid_arg, default_value = "0,0.5,1,2,3,4")]
    pub alphas: Grid,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct StateCmdArgs {
    #[command(flatten)]
    pub state: StateArgs,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct ReplayArgs {
    pub manifest: PathBuf,
    /// Write outputs here (same file names) instead of the recorded paths.
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}

/// Error raised for arguments that parse but do not make sense together.
#[derive(Debug)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

pub fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

/// Files produced by one command.
pub struct Outputs {
    pub primary: PathBuf,
    pub files: Vec<PathBuf>,
    pub seed: Option<u64>,
}

/// Output path resolution shared by all commands.
pub struct Ctx {
    redirect: Option<PathBuf>,
}

impl Ctx {
    /// `given`, or `default_name` under `$STABSCOPE_OUT_DIR` (default `.`);
    /// moved into the replay directory when one is set. Parent directories
    /// are created.
    pub fn output(&self, given: Option<&Path>, default_name: &str) -> Result<PathBuf> {
        let mut path = match given {
            Some(p) => p.to_path_buf(),
            None => {
                let dir = std::env::var_os(OUT_DIR_ENV)
                    .map(PathBuf::from)
                    .unwrap_or_else(|| PathBuf::from("."));
                dir.join(default_name)
            }
        };
        if let Some(dir) = &self.redirect {
            let name = path.file_name().context("output path has no file name")?;
            path = dir.join(name);
        }
        if let Some(parent) = path.parent() {
            if !parent.as_os_str().is_empty() {
                std::fs::create_dir_all(parent)
                    .with_context(|| format!("creating {}", parent.display()))?;
            }
        }
        Ok(path)
    }
}

fn execute(command: &Command, ctx: &Ctx) -> Result<Outputs> {
    match command {
        Command::Sweep(a) => commands::sweep::run(a, ctx),
        Command::Analyze(a) => commands::analyze::run(a, ctx),
        Command::Analytic(a) => commands::analytic::run(a, ctx),
        Command::Oracle(a) => commands::single::oracle(a, ctx),
        Command::Certify(a) => commands::single::certify(a, ctx),
        Command::Spectrum(a) => commands::single::spectrum(a, ctx),
        Command::State(a) => commands::single::state(a, ctx),
        Command::Replay(_) => unreachable!("replay is dispatched separately"),
    }
}

/// Runs one command and writes its manifest next to the primary output.
fn run_recorded(command: &Command, mut argv: Vec<String>, ctx: &Ctx) -> Result<()> {
    let start = Instant::now();
    let outputs = execute(command, ctx)?;
    if !argv.iter().any(|a| a == "--out" || a.starts_with("--out=")) {
        argv.push("--out".into());
        argv.push(outputs.primary.display().to_string());
    }
    let manifest = RunManifest {
        schema: MANIFEST_SCHEMA.into(),
        subcommand: command.name().into(),
        argv,
        config: serde_json::to_value(command)?,
        seed: outputs.seed,
        version: env!("CARGO_PKG_VERSION").into(),
        outputs: outputs.files.clone(),
        wall_clock_seconds: start.elapsed().as_secs_f64(),
    };
    let path = manifest.write(&outputs.primary)?;
    for f in &outputs.files {
        eprintln!("wrote {}", f.display());
    }
    eprintln!("wrote {}", path.display());
    Ok(())
}

fn replay(args: &ReplayArgs) -> Result<()> {
    let m = RunManifest::read(&args.manifest)?;
    let cli =
        Cli::try_parse_from(std::iter::once("stabscope".to_string()).chain(m.argv.iter().cloned()))
            .map_err(|e| usage(format!("manifest arguments no longer parse: {e}")))?;
    if matches!(cli.command, Command::Replay(_)) {
        return Err(usage("a manifest cannot replay another replay"));
    }
    let ctx = Ctx {
        redirect: args.out_dir.clone(),
    };
    run_recorded(&cli.command, m.argv, &ctx)
}

/// 2 for usage errors, 3 for size guards, 4 for numerical failures.
fn exit_code(err: &anyhow::Error) -> u8 {
    use stabscope_core::Error as E;
    for cause in err.chain() {
        if cause.downcast_ref::<UsageError>().is_some() {
            return 2;
        }
        if let Some(e) = cause.downcast_ref::<E>() {
            return match e {
                E::SizeGuard { .. } => 3,
                E::Numerical(_) | E::NoCrossing(_) | E::NotNormalized(_) => 4,
                E::InvalidArgument(_)
                | E::InvalidPauli(_)
                | E::DimensionMismatch(..)
                | E::QubitOutOfRange { .. }
                | E::Parse(_) => 2,
                E::Io(_) | E::Json(_) | E::Csv(_) => 1,
            };
        }
    }
    1
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(threads) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
        {
            eprintln!("error: cannot configure {threads} worker threads: {e}");
            return ExitCode::from(2);
        }
    }
    let result = match &cli.command {
        Command::Replay(args) => replay(args),
        command => {
            // --threads affects only speed, so it is left out of the manifest
            let argv = strip_threads(std::env::args().skip(1).collect());
            run_recorded(command, argv, &Ctx { redirect: None })
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn strip_threads(argv: Vec<String>) -> Vec<String> {
    let mut out = Vec::with_capacity(argv.len());
    let mut it = argv.into_iter();
    while let Some(a) = it.next() {
        if a == "--threads" {
            it.next();
        } else if !a.starts_with("--threads=") {
            out.push(a);
        }
    }
    out
}
