//! `l96`: experiment runner.
//!
//! Every subcommand loads an experiment file (`--config`, TOML or a
//! previous `manifest.json`) or falls back to the built-in default for its
//! kind, applies the command-line overrides, runs, and writes CSV tables,
//! `summary.txt` and `manifest.json` into the output directory.
//!
//! Exit codes: 0 success, 2 an acceptance threshold failed, 3 blow-up,
//! 4 configuration error, 5 run produced no results, 1 anything else.

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use l96::experiments::{self, default_spec, emit_report, ExperimentKind, ExperimentSpec, RunStatus};
use l96::lie::GeneratorSet;
use l96::Error;

#[derive(Parser)]
#[command(name = "l96", version, about = "Stochastic Lorenz-96 with degenerate forcing")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Experiment file (TOML) or a manifest.json from an earlier run.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Master seed; every random stream is derived from it.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory (default: the file's output_dir, else out/<kind>).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads; results do not depend on this.
    #[arg(long)]
    threads: Option<usize>,
    /// Override the damping of the configuration.
    #[arg(long)]
    eps: Option<f64>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Generators {
    Local,
    All,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate one trajectory from a generic initial state.
    Simulate(Common),
    /// Transverse Lyapunov exponent by both estimators.
    Lyapunov(Common),
    /// Moment Lyapunov exponent curve.
    MomentLyap(Common),
    /// Transverse exponent over a grid of damping values.
    ScanEpsilon(Common),
    /// Synchronization of coupled pairs over a grid of damping values.
    SyncTest(Common),
    /// Time to leave a neighbourhood of the invariant subspace.
    EscapeTime(Common),
    /// Long-run histogram of the transverse norm.
    StationaryHist(Common),
    /// Exact bracket closure of the transverse matrices.
    CapVerify {
        #[command(flatten)]
        common: Common,
        /// System size (a multiple of 3).
        #[arg(long = "N")]
        n: Option<usize>,
        /// Maximum bracket depth, generators counting as depth 1.
        #[arg(long)]
        depth_cap: Option<usize>,
        /// M_3, M_6, M_9 only, or all K generators.
        #[arg(long, value_enum)]
        generators: Option<Generators>,
        /// Also write the reduced basis (entries num/den) to this file.
        #[arg(long)]
        emit_basis: Option<PathBuf>,
    },
    /// Super-Lyapunov probe of E sup exp(eta |u|^2).
    SuperLyap(Common),
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::BlowUp { .. } | Error::EstimateRefused(_) => 3,
        Error::Io(_) => 1,
        _ => 4,
    }
}

fn load(kind: ExperimentKind, common: &Common) -> l96::Result<ExperimentSpec> {
    let mut spec = match &common.config {
        Some(p) => ExperimentSpec::load(p)?,
        None => default_spec(kind),
    };
    if spec.kind != kind {
        return Err(Error::Config(format!("file describes a {} run, not {}", spec.kind.name(), kind.name())));
    }
    if let Some(s) = common.seed {
        spec = spec.with_seed(s);
    }
    if let Some(e) = common.eps {
        spec.config = spec.config.with_epsilon(e)?;
    }
    if let Some(o) = &common.out {
        spec.output_dir = Some(o.clone());
    }
    Ok(spec)
}

fn execute(cli: Cli) -> l96::Result<u8> {
    let (kind, common) = match &cli.command {
        Command::Simulate(c) => (ExperimentKind::Simulate, c),
        Command::Lyapunov(c) => (ExperimentKind::Lyapunov, c),
        Command::MomentLyap(c) => (ExperimentKind::MomentCurve, c),
        Command::ScanEpsilon(c) => (ExperimentKind::ScanEpsilon, c),
        Command::SyncTest(c) => (ExperimentKind::SyncTest, c),
        Command::EscapeTime(c) => (ExperimentKind::EscapeTime, c),
        Command::StationaryHist(c) => (ExperimentKind::StationaryHist, c),
        Command::CapVerify { common, .. } => (ExperimentKind::CapVerify, common),
        Command::SuperLyap(c) => (ExperimentKind::SuperLyap, c),
    };
    if let Some(t) = common.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| Error::Config(e.to_string()))?;
    }
    let mut spec = load(kind, common)?;
    let mut basis_path = None;
    if let Command::CapVerify { n, depth_cap, generators, emit_basis, .. } = &cli.command {
        if let Some(n) = n {
            spec.config = l96::Config::degenerate(*n, spec.config.epsilon(), 1.0, spec.config.dt(), spec.config.seed())?;
        }
        let cap = spec.cap.as_mut().ok_or_else(|| Error::Config("missing [cap] table".into()))?;
        if let Some(d) = depth_cap {
            cap.depth_cap = *d;
        }
        if let Some(g) = generators {
            cap.generators = match g {
                Generators::Local => GeneratorSet::Local,
                Generators::All => GeneratorSet::All,
            };
        }
        if emit_basis.is_some() {
            cap.emit_basis = true;
            basis_path = emit_basis.clone();
        }
    }
    spec.validate()?;
    let start = Instant::now();
    let report = experiments::run(&spec)?;
    let elapsed = start.elapsed().as_secs_f64();
    let dir = spec.output_dir();
    let manifest = emit_report(&dir, &spec, &report, elapsed)?;
    if let (Some(path), Some((_, body))) = (basis_path, report.files.iter().find(|f| f.0 == "basis.csv")) {
        std::fs::write(path, body)?;
    }
    if kind == ExperimentKind::CapVerify {
        if let Some(p) = &report.payload {
            let out = serde_json::json!({
                "N": p["N"],
                "dim": p["dim"],
                "expected": p["expected"],
                "generated": p["generated"],
                "depthUsed": p["depthUsed"],
                "elapsed": p["elapsed"],
            });
            println!("{out}");
        }
    } else {
        print!("{}", experiments::summary_text(&spec, &report));
        println!("output: {}", dir.display());
    }
    Ok(match manifest.status {
        _ if report.aborted => 3,
        RunStatus::Empty => 5,
        RunStatus::ThresholdFailure => 2,
        RunStatus::Success => 0,
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
