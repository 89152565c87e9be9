//! `qetu`: experiment driver for QET-U imaginary-time evolution on the emulator.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use qetu_core::{Backend, BoundsMethod, QetuError, Variant};
use serde::Serialize;

#[derive(Parser, Debug)]
#[command(name = "qetu", version, about = "QET-U imaginary-time evolution on a state-vector emulator", args_override_self = true)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(tag = "subcommand", rename_all = "snake_case")]
enum Command {
    /// Fit a target transform and solve its phase factors.
    Phases(PhasesArgs),
    /// Spectral bounds and the resulting scaling by every method.
    Bounds(BoundsArgs),
    /// Imaginary-time sweep (single shot, fragmented) or eigenstate filter.
    Groundstate(GroundArgs),
    /// Purified Gibbs states over a beta x g grid.
    Gibbs(GibbsArgs),
    /// Two-level amplitude damping by split-step QET-U.
    Lindblad(LindbladArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
enum ModelKind {
    Hubbard,
    Tfim,
    /// Pauli-sum text file given by --hamiltonian-file.
    File,
}

#[derive(Args, Debug, Serialize)]
struct ModelArgs {
    #[arg(long, value_enum, default_value = "hubbard")]
    model: ModelKind,
    #[arg(long, default_value_t = 4)]
    sites: usize,
    /// Hubbard hopping.
    #[arg(long = "t", default_value_t = 1.0)]
    t_hop: f64,
    /// Hubbard on-site repulsion.
    #[arg(long, default_value_t = 1.0)]
    u: f64,
    /// Ising coupling.
    #[arg(long, default_value_t = 1.0)]
    j: f64,
    /// Transverse field.
    #[arg(long, default_value_t = 1.0)]
    g: f64,
    #[arg(long)]
    hamiltonian_file: Option<PathBuf>,
    /// Write the Hamiltonian as Pauli-sum text.
    #[arg(long)]
    dump_hamiltonian: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
struct QetuArgs {
    #[arg(long, default_value_t = qetu_core::spectrum::DEFAULT_ETA)]
    eta: f64,
    #[arg(long, default_value = "exact")]
    bounds: BoundsMethod,
    #[arg(long, default_value = "fwd_rev")]
    variant: Variant,
    #[arg(long, default_value = "fast")]
    backend: Backend,
    /// Phase-solver tolerance.
    #[arg(long, default_value_t = qetu_core::approx::DEFAULT_TOL)]
    tol: f64,
    #[arg(long, default_value_t = qetu_core::approx::DEFAULT_MAX_ITER)]
    max_iter: usize,
}

#[derive(Args, Debug, Serialize)]
struct OutArgs {
    /// Output prefix: writes PREFIX.csv and PREFIX.json.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Seed for measurement sampling.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
enum TargetKindArg {
    Ite,
    Heaviside,
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
enum DirectionArg {
    Forward,
    Reverse,
}

#[derive(Args, Debug, Serialize)]
struct PhasesArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[command(flatten)]
    qetu: QetuArgs,
    #[command(flatten)]
    output: OutArgs,
    #[arg(long, default_value_t = 350)]
    degree: usize,
    #[arg(long, value_enum, default_value = "ite")]
    target: TargetKindArg,
    #[arg(long, default_value_t = 5.0)]
    tau: f64,
    #[arg(long, value_enum, default_value = "forward")]
    direction: DirectionArg,
    /// Step position (energy units); defaults to the midpoint of the lowest gap.
    #[arg(long)]
    mu: Option<f64>,
    /// Step width (energy units); defaults to half the lowest gap.
    #[arg(long)]
    width: Option<f64>,
    /// Phase-factor file; defaults to PREFIX.phases.
    #[arg(long)]
    phase_file: Option<PathBuf>,
    /// Rows of the response table.
    #[arg(long, default_value_t = 200)]
    points: usize,
}

#[derive(Args, Debug, Serialize)]
struct BoundsArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[command(flatten)]
    output: OutArgs,
    #[arg(long, default_value_t = qetu_core::spectrum::DEFAULT_ETA)]
    eta: f64,
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
enum ModeArg {
    SingleShot,
    Fragmented,
    Filter,
}

#[derive(Args, Debug, Serialize)]
struct GroundArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[command(flatten)]
    qetu: QetuArgs,
    #[command(flatten)]
    output: OutArgs,
    #[arg(long, default_value_t = 350)]
    degree: usize,
    /// Trotter steps per controlled evolution.
    #[arg(long, default_value_t = 25)]
    trotter: usize,
    #[arg(long, default_value_t = 5.0)]
    tau_max: f64,
    #[arg(long, default_value_t = 0.5)]
    tau_step: f64,
    #[arg(long, value_enum, default_value = "single-shot")]
    mode: ModeArg,
    /// Fragment size in fragmented mode.
    #[arg(long, default_value_t = 1.25)]
    delta_tau: f64,
    /// Filter step position (energy units); defaults to the midpoint of the lowest gap.
    #[arg(long)]
    mu: Option<f64>,
    /// Filter step width (energy units); defaults to half the lowest gap.
    #[arg(long)]
    width: Option<f64>,
    /// `auto` (Neel determinant for Hubbard, |0...0> otherwise), `uniform`, or a basis index.
    #[arg(long, default_value = "auto")]
    initial: String,
    /// Computational-basis samples of the final state (reported in the JSON).
    #[arg(long, default_value_t = 0)]
    shots: usize,
    /// Write the final state as a binary dump.
    #[arg(long)]
    dump_state: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
struct GibbsArgs {
    /// `tfim` or `file`.
    #[arg(long, value_enum, default_value = "tfim")]
    model: ModelKind,
    #[arg(long, default_value_t = 4)]
    sites: usize,
    #[arg(long, default_value_t = 1.0)]
    j: f64,
    /// Transverse fields, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "0.1,0.3,1,3,10")]
    g: Vec<f64>,
    /// Inverse temperatures, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "0.5,1,2")]
    beta: Vec<f64>,
    #[arg(long)]
    hamiltonian_file: Option<PathBuf>,
    #[arg(long)]
    dump_hamiltonian: Option<PathBuf>,
    #[command(flatten)]
    qetu: QetuArgs,
    #[command(flatten)]
    output: OutArgs,
    #[arg(long, default_value_t = 50)]
    degree: usize,
    #[arg(long, default_value_t = 8)]
    trotter: usize,
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
enum StepArg {
    Circuit,
    Exact,
}

#[derive(Args, Debug, Serialize)]
struct LindbladArgs {
    #[arg(long, default_value_t = 0.1)]
    gamma: f64,
    /// Detuning.
    #[arg(long, default_value_t = 0.0)]
    delta: f64,
    /// Rabi frequency.
    #[arg(long, default_value_t = 0.0)]
    omega: f64,
    #[arg(long, default_value_t = 1.0)]
    dt: f64,
    #[arg(long, default_value_t = 10)]
    steps: usize,
    #[arg(long, default_value_t = 6)]
    degree: usize,
    /// Trotter steps for the unitary half steps and the controlled evolutions.
    #[arg(long, default_value_t = 2)]
    trotter: usize,
    #[arg(long, value_enum, default_value = "circuit")]
    unitary: StepArg,
    #[arg(long, value_enum, default_value = "circuit")]
    nonunitary: StepArg,
    /// Initial basis state (0 = excited).
    #[arg(long, default_value_t = 0)]
    initial: usize,
    #[command(flatten)]
    qetu: QetuArgs,
    #[command(flatten)]
    output: OutArgs,
}

/// Failure with its exit code: 2 for bad configuration, 3 for projection or convergence
/// failures, 1 otherwise.
#[derive(Debug)]
pub struct Failure {
    code: u8,
    kind: &'static str,
    message: String,
    extra: serde_json::Map<String, serde_json::Value>,
}

impl Failure {
    pub fn config(message: impl Into<String>) -> Self {
        Self { code: 2, kind: "config", message: message.into(), extra: Default::default() }
    }

    fn record(&self) -> serde_json::Value {
        let mut m = serde_json::Map::new();
        m.insert("status".into(), "error".into());
        m.insert("kind".into(), self.kind.into());
        m.insert("exit_code".into(), self.code.into());
        m.insert("message".into(), self.message.clone().into());
        m.extend(self.extra.clone());
        serde_json::Value::Object(m)
    }
}

impl From<QetuError> for Failure {
    fn from(e: QetuError) -> Self {
        let message = e.to_string();
        let mut extra = serde_json::Map::new();
        let (code, kind) = match &e {
            QetuError::Convergence { best_residual, iterations } => {
                extra.insert("best_residual".into(), (*best_residual).into());
                extra.insert("iterations".into(), (*iterations).into());
                (3, "convergence")
            }
            QetuError::Projection { probability } => {
                extra.insert("probability".into(), (*probability).into());
                (3, "projection")
            }
            QetuError::NumericalBreakdown(_) => (3, "numerical_breakdown"),
            QetuError::InvalidInput(_) | QetuError::InvalidModel(_) | QetuError::Parse(_) => (2, "config"),
            QetuError::InvalidCircuit(_) => (1, "invalid_circuit"),
            QetuError::Resource(_) => (2, "resource"),
            QetuError::Io(_) => (1, "io"),
        };
        Self { code, kind, message, extra }
    }
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        match e.downcast::<QetuError>() {
            Ok(q) => q.into(),
            Err(e) => Self { code: 1, kind: "io", message: format!("{e:#}"), extra: Default::default() },
        }
    }
}

fn configure_threads() -> Result<(), Failure> {
    if let Ok(v) = std::env::var("QETU_THREADS") {
        let n: usize = v.trim().parse().map_err(|_| Failure::config(format!("QETU_THREADS={v:?} is not a thread count")))?;
        if n == 0 {
            return Err(Failure::config("QETU_THREADS must be at least 1"));
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| Failure::config(e.to_string()))?;
    }
    Ok(())
}

fn run(argv: Vec<String>) -> Result<(), Failure> {
    let argv = config::expand_argv(argv).map_err(|e| Failure::config(format!("{e:#}")))?;
    let cli = match Cli::try_parse_from(&argv) {
        Ok(c) => c,
        Err(e) if matches!(e.kind(), clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion) => {
            print!("{e}");
            return Ok(());
        }
        Err(e) => return Err(Failure::config(e.to_string().trim_end().to_string())),
    };
    configure_threads()?;
    let config = serde_json::to_value(&cli.command).expect("config serializes");
    match &cli.command {
        Command::Phases(a) => commands::phases(a, config),
        Command::Bounds(a) => commands::bounds(a, config),
        Command::Groundstate(a) => commands::groundstate(a, config),
        Command::Gibbs(a) => commands::gibbs(a, config),
        Command::Lindblad(a) => commands::lindblad(a, config),
    }
}

fn main() -> ExitCode {
    match run(std::env::args().collect()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("{}", f.record());
            ExitCode::from(f.code)
        }
    }
}
