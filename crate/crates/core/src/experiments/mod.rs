//! Experiment specifications, drivers and report files.
//!
//! An experiment is a pure function of its [`ExperimentSpec`]: the spec
//! fixes the system configuration, every grid and threshold, and the seed.
//! Parallel work is keyed by task index and collected in order, so the
//! emitted CSV files are byte-identical across runs and thread counts on
//! the same platform.

mod runs;

pub use runs::*;

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lie::GeneratorSet;
use crate::model::L96Config;
use crate::sde::Scheme;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum ExperimentKind {
    Simulate,
    Lyapunov,
    ScanEpsilon,
    EscapeTime,
    SyncTest,
    StationaryHist,
    MomentCurve,
    CapVerify,
    SuperLyap,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            Self::Simulate => "simulate",
            Self::Lyapunov => "lyapunov",
            Self::ScanEpsilon => "scanEpsilon",
            Self::EscapeTime => "escapeTime",
            Self::SyncTest => "syncTest",
            Self::StationaryHist => "stationaryHist",
            Self::MomentCurve => "momentCurve",
            Self::CapVerify => "capVerify",
            Self::SuperLyap => "superLyap",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateParams {
    pub horizon: f64,
    #[serde(default = "one")]
    pub thin: usize,
    #[serde(default)]
    pub scheme: Scheme,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LyapunovParams {
    pub horizon: f64,
    #[serde(default)]
    pub burn_in: Option<f64>,
    #[serde(default = "twenty")]
    pub batches: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanParams {
    /// Strictly decreasing, at least four points spanning a decade.
    pub eps_grid: Vec<f64>,
    pub horizon: f64,
    #[serde(default)]
    pub burn_in: Option<f64>,
    #[serde(default = "twenty")]
    pub batches: usize,
    /// Independent repetitions with seeds `seed, seed + 1, ...`.
    #[serde(default = "one")]
    pub replicates: usize,
    #[serde(default = "confidence")]
    pub level: f64,
    /// Both estimators must agree within this many combined standard errors.
    #[serde(default = "two")]
    pub coherence_k: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EscapeParams {
    pub deltas: Vec<f64>,
    #[serde(default = "unit")]
    pub threshold: f64,
    pub paths: usize,
    pub horizon: f64,
    /// Horizon of the exponent run the slope is compared against.
    pub lambda_horizon: f64,
    /// Allowed relative deviation of the slope from `1 / lambda`.
    #[serde(default)]
    pub slope_tolerance: Option<f64>,
    /// Expected minimum censored fraction (stable regime check).
    #[serde(default)]
    pub min_censored: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Below,
    Above,
}

/// Requires at least `min_mass` of the samples of `|Pi^perp u|` on the
/// given side of `radius`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MassCheck {
    pub radius: f64,
    pub side: Side,
    pub min_mass: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HistParams {
    pub horizon: f64,
    pub burn_in: f64,
    pub bins: usize,
    #[serde(default = "ten")]
    pub sample_every: usize,
    /// Histogram covers `10^lo ..= 10^hi`, log-spaced, plus under/overflow.
    #[serde(default = "log10_range")]
    pub log10_range: [f64; 2],
    #[serde(default)]
    pub mass_checks: Vec<MassCheck>,
    /// Compare the forced-coordinate variance with `sigma^2 / 2` within this
    /// many standard errors.
    #[serde(default)]
    pub ou_variance_k: Option<f64>,
    #[serde(default = "twenty")]
    pub batches: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SyncParams {
    pub eps_grid: Vec<f64>,
    pub pairs: usize,
    pub horizon: f64,
    #[serde(default = "sync_threshold")]
    pub sync_threshold: f64,
    #[serde(default = "ten")]
    pub sample_every: usize,
    /// Minimum synchronized fraction at the largest damping.
    #[serde(default)]
    pub min_fraction_stable: Option<f64>,
    /// Maximum synchronized fraction at the smallest damping.
    #[serde(default)]
    pub max_fraction_unstable: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MomentParams {
    pub ps: Vec<f64>,
    pub horizon: f64,
    pub paths: usize,
    #[serde(default = "two_hundred")]
    pub resamples: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CapParams {
    pub depth_cap: usize,
    pub generators: GeneratorSet,
    #[serde(default)]
    pub emit_basis: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SuperLyapParams {
    pub eta: f64,
    /// Initial states are `r * d` for a fixed random unit direction `d`.
    pub radii: Vec<f64>,
    pub horizon: f64,
    pub paths: usize,
}

fn one() -> usize {
    1
}
fn ten() -> usize {
    10
}
fn twenty() -> usize {
    20
}
fn two_hundred() -> usize {
    200
}
fn unit() -> f64 {
    1.0
}
fn two() -> f64 {
    2.0
}
fn confidence() -> f64 {
    0.95
}
fn sync_threshold() -> f64 {
    crate::sde::DEFAULT_SYNC_THRESHOLD
}
fn log10_range() -> [f64; 2] {
    [-12.0, 2.0]
}

/// Experiment file. TOML with a top-level `kind`, a `[config]` table for
/// the system and one table holding the parameters of that kind; unknown
/// keys are rejected.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub kind: ExperimentKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    pub config: L96Config<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub simulate: Option<SimulateParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lyapunov: Option<LyapunovParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scan: Option<ScanParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub escape: Option<EscapeParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hist: Option<HistParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sync: Option<SyncParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub moment: Option<MomentParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cap: Option<CapParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub super_lyap: Option<SuperLyapParams>,
}

fn positive(name: &str, x: f64) -> Result<()> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(Error::Config(format!("{name} must be positive and finite, got {x}")))
    }
}

fn nonempty<T>(name: &str, xs: &[T]) -> Result<()> {
    if xs.is_empty() {
        Err(Error::Config(format!("{name} must not be empty")))
    } else {
        Ok(())
    }
}

fn missing(kind: ExperimentKind) -> Error {
    Error::Config(format!("kind {} needs its parameter table", kind.name()))
}

impl ExperimentSpec {
    pub fn new(kind: ExperimentKind, config: L96Config<f64>) -> Self {
        Self {
            kind,
            output_dir: None,
            config,
            simulate: None,
            lyapunov: None,
            scan: None,
            escape: None,
            hist: None,
            sync: None,
            moment: None,
            cap: None,
            super_lyap: None,
        }
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let spec: Self = toml::from_str(text)?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn to_toml(&self) -> Result<String> {
        Ok(toml::to_string(self)?)
    }

    /// Reads a TOML spec, or the spec echoed in a JSON run manifest.
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        if path.extension().is_some_and(|e| e == "json") {
            let m: RunManifest = serde_json::from_str(&text).map_err(|e| Error::Config(e.to_string()))?;
            m.spec.validate()?;
            return Ok(m.spec);
        }
        Self::from_toml(&text)
    }

    pub fn output_dir(&self) -> PathBuf {
        self.output_dir.clone().unwrap_or_else(|| PathBuf::from("out").join(self.kind.name()))
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.config = self.config.with_seed(seed);
        self
    }

    /// Checks that the parameter table of `kind` is present and sane.
    pub fn validate(&self) -> Result<()> {
        let k = self.kind;
        match k {
            ExperimentKind::Simulate => {
                let p = self.simulate.as_ref().ok_or_else(|| missing(k))?;
                positive("horizon", p.horizon)?;
            }
            ExperimentKind::Lyapunov => {
                let p = self.lyapunov.as_ref().ok_or_else(|| missing(k))?;
                positive("horizon", p.horizon)?;
            }
            ExperimentKind::ScanEpsilon => {
                let p = self.scan.as_ref().ok_or_else(|| missing(k))?;
                nonempty("eps_grid", &p.eps_grid)?;
                positive("horizon", p.horizon)?;
                if p.replicates == 0 {
                    return Err(Error::Config("replicates must be at least 1".into()));
                }
            }
            ExperimentKind::EscapeTime => {
                let p = self.escape.as_ref().ok_or_else(|| missing(k))?;
                nonempty("deltas", &p.deltas)?;
                positive("horizon", p.horizon)?;
                positive("lambda_horizon", p.lambda_horizon)?;
                positive("threshold", p.threshold)?;
                if let Some(d) = p.deltas.iter().find(|d| !(**d > 0.0 && **d <= p.threshold)) {
                    return Err(Error::Config(format!("delta {d} outside (0, threshold]")));
                }
                if p.paths == 0 {
                    return Err(Error::Config("paths must be at least 1".into()));
                }
            }
            ExperimentKind::StationaryHist => {
                let p = self.hist.as_ref().ok_or_else(|| missing(k))?;
                positive("horizon", p.horizon)?;
                if !(p.burn_in >= 0.0 && p.burn_in < p.horizon) {
                    return Err(Error::Config("burn_in must lie in [0, horizon)".into()));
                }
                if p.bins == 0 || p.log10_range[0] >= p.log10_range[1] {
                    return Err(Error::Config("histogram needs bins >= 1 and an increasing range".into()));
                }
            }
            ExperimentKind::SyncTest => {
                let p = self.sync.as_ref().ok_or_else(|| missing(k))?;
                nonempty("eps_grid", &p.eps_grid)?;
                positive("horizon", p.horizon)?;
                if p.pairs == 0 {
                    return Err(Error::Config("pairs must be at least 1".into()));
                }
            }
            ExperimentKind::MomentCurve => {
                let p = self.moment.as_ref().ok_or_else(|| missing(k))?;
                nonempty("ps", &p.ps)?;
                positive("horizon", p.horizon)?;
            }
            ExperimentKind::CapVerify => {
                let p = self.cap.as_ref().ok_or_else(|| missing(k))?;
                if p.depth_cap == 0 {
                    return Err(Error::Config("depth_cap must be at least 1".into()));
                }
            }
            ExperimentKind::SuperLyap => {
                let p = self.super_lyap.as_ref().ok_or_else(|| missing(k))?;
                nonempty("radii", &p.radii)?;
                positive("horizon", p.horizon)?;
            }
        }
        Ok(())
    }
}

/// Built-in desk-scale experiment for each kind (N = 9, sigma = 1).
pub fn default_spec(kind: ExperimentKind) -> ExperimentSpec {
    let cfg = |eps: f64| L96Config::degenerate(9, eps, 1.0, crate::model::DEFAULT_DT, 1).expect("valid default");
    match kind {
        ExperimentKind::Simulate => ExperimentSpec {
            simulate: Some(SimulateParams { horizon: 10.0, thin: 100, scheme: Scheme::Tamed }),
            ..ExperimentSpec::new(kind, cfg(0.05))
        },
        ExperimentKind::Lyapunov => ExperimentSpec {
            lyapunov: Some(LyapunovParams { horizon: 2000.0, burn_in: None, batches: 20 }),
            ..ExperimentSpec::new(kind, cfg(0.05))
        },
        ExperimentKind::ScanEpsilon => ExperimentSpec {
            scan: Some(ScanParams {
                eps_grid: vec![5.0, 1.0, 0.2, 0.05],
                horizon: 2000.0,
                burn_in: None,
                batches: 20,
                replicates: 3,
                level: 0.95,
                coherence_k: 2.0,
            }),
            ..ExperimentSpec::new(kind, cfg(1.0))
        },
        ExperimentKind::EscapeTime => ExperimentSpec {
            escape: Some(EscapeParams {
                deltas: vec![1e-2, 1e-4, 1e-6, 1e-8],
                threshold: 1.0,
                paths: 200,
                horizon: 1000.0,
                lambda_horizon: 2000.0,
                slope_tolerance: Some(0.2),
                min_censored: None,
            }),
            ..ExperimentSpec::new(kind, cfg(0.05))
        },
        ExperimentKind::StationaryHist => ExperimentSpec {
            hist: Some(HistParams {
                horizon: 1000.0,
                burn_in: 100.0,
                bins: 56,
                sample_every: 10,
                log10_range: log10_range(),
                mass_checks: vec![MassCheck { radius: 0.1, side: Side::Above, min_mass: 0.9 }],
                ou_variance_k: None,
                batches: 20,
            }),
            ..ExperimentSpec::new(kind, cfg(0.05))
        },
        ExperimentKind::SyncTest => ExperimentSpec {
            sync: Some(SyncParams {
                eps_grid: vec![5.0, 1.0, 0.2, 0.05],
                pairs: 20,
                horizon: 200.0,
                sync_threshold: sync_threshold(),
                sample_every: 10,
                min_fraction_stable: Some(0.95),
                max_fraction_unstable: Some(0.05),
            }),
            ..ExperimentSpec::new(kind, cfg(1.0))
        },
        ExperimentKind::MomentCurve => ExperimentSpec {
            moment: Some(MomentParams { ps: vec![0.0, 0.02, 0.05, 0.08], horizon: 200.0, paths: 2000, resamples: 200 }),
            ..ExperimentSpec::new(kind, cfg(0.05))
        },
        ExperimentKind::CapVerify => ExperimentSpec {
            cap: Some(CapParams { depth_cap: 5, generators: GeneratorSet::Local, emit_basis: false }),
            ..ExperimentSpec::new(kind, L96Config::degenerate(15, 1.0, 1.0, crate::model::DEFAULT_DT, 1).expect("valid default"))
        },
        ExperimentKind::SuperLyap => ExperimentSpec {
            super_lyap: Some(SuperLyapParams { eta: 0.05, radii: vec![0.0, 1.0, 2.0, 4.0], horizon: 10.0, paths: 200 }),
            ..ExperimentSpec::new(kind, cfg(1.0))
        },
    }
}

/// A CSV table; cells are preformatted so the bytes are fixed by the run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Table {
    pub name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(name: &str, header: &[&str]) -> Self {
        Self { name: name.into(), header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut s = self.header.join(",");
        s.push('\n');
        for r in &self.rows {
            s.push_str(&r.join(","));
            s.push('\n');
        }
        s
    }
}

/// One result set against its acceptance threshold.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    /// `None` for exact quantities.
    pub stderr: Option<f64>,
    pub threshold: String,
    pub pass: bool,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TaskSeed {
    pub task: String,
    pub seed: u64,
    pub stream: u64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub tables: Vec<Table>,
    pub checks: Vec<Check>,
    pub notes: Vec<String>,
    /// Extra text files (name, contents), e.g. a basis dump.
    pub files: Vec<(String, String)>,
    pub tasks: Vec<TaskSeed>,
    pub blow_ups: usize,
    pub excluded: usize,
    /// A blow-up stopped the run; tables hold the output up to that point.
    pub aborted: bool,
    /// Structured result for machine consumers (e.g. the closure report).
    pub payload: Option<serde_json::Value>,
}

impl Report {
    pub fn is_empty(&self) -> bool {
        self.tables.iter().all(|t| t.rows.is_empty())
    }

    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn check(&mut self, name: &str, value: f64, stderr: Option<f64>, threshold: String, pass: bool) {
        self.checks.push(Check { name: name.into(), value, stderr, threshold, pass });
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RunStatus {
    Success,
    ThresholdFailure,
    Empty,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Environment {
    pub os: String,
    pub arch: String,
    pub threads: usize,
    pub float: String,
}

impl Environment {
    pub fn current() -> Self {
        Self {
            os: std::env::consts::OS.into(),
            arch: std::env::consts::ARCH.into(),
            threads: rayon::current_num_threads(),
            float: "f64".into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub spec: ExperimentSpec,
    pub version: String,
    pub tasks: Vec<TaskSeed>,
    pub wall_clock_seconds: f64,
    pub blow_ups: usize,
    pub excluded: usize,
    pub environment: Environment,
    pub files: Vec<String>,
    pub checks: Vec<Check>,
    pub aborted: bool,
    pub status: RunStatus,
}

impl RunManifest {
    pub fn new(spec: &ExperimentSpec, report: &Report, wall_clock_seconds: f64) -> Self {
        let status = if report.is_empty() {
            RunStatus::Empty
        } else if report.all_pass() {
            RunStatus::Success
        } else {
            RunStatus::ThresholdFailure
        };
        Self {
            spec: spec.clone(),
            version: env!("CARGO_PKG_VERSION").into(),
            tasks: report.tasks.clone(),
            wall_clock_seconds,
            blow_ups: report.blow_ups,
            excluded: report.excluded,
            environment: Environment::current(),
            files: Vec::new(),
            checks: report.checks.clone(),
            aborted: report.aborted,
            status,
        }
    }
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map_or_else(|| "exact".into(), |s| format!("+/- {s}"))
}

/// Plain-text summary: one line per check, then notes.
pub fn summary_text(spec: &ExperimentSpec, report: &Report) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "experiment {} (N = {}, eps = {}, seed = {})", spec.kind.name(), spec.config.n(), spec.config.epsilon(), spec.config.seed());
    for c in &report.checks {
        let verdict = if c.pass { "PASS" } else { "FAIL" };
        let _ = writeln!(s, "{verdict} {}: {} {} [{}]", c.name, c.value, fmt_opt(c.stderr), c.threshold);
    }
    if report.blow_ups > 0 || report.excluded > 0 {
        let _ = writeln!(s, "blow-ups: {}, excluded: {}", report.blow_ups, report.excluded);
    }
    for n in &report.notes {
        let _ = writeln!(s, "note: {n}");
    }
    s
}

/// Writes `<table>.csv` per table, extra files, `summary.txt` and
/// `manifest.json` into `dir`. An empty report writes only the manifest.
pub fn emit_report(dir: &Path, spec: &ExperimentSpec, report: &Report, wall_clock_seconds: f64) -> Result<RunManifest> {
    fs::create_dir_all(dir)?;
    let mut manifest = RunManifest::new(spec, report, wall_clock_seconds);
    if manifest.status != RunStatus::Empty {
        for t in &report.tables {
            let name = format!("{}.csv", t.name);
            fs::write(dir.join(&name), t.to_csv())?;
            manifest.files.push(name);
        }
        for (name, body) in &report.files {
            fs::write(dir.join(name), body)?;
            manifest.files.push(name.clone());
        }
        fs::write(dir.join("summary.txt"), summary_text(spec, report))?;
        manifest.files.push("summary.txt".into());
    }
    fs::write(dir.join("manifest.json"), serde_json::to_string_pretty(&manifest)?)?;
    Ok(manifest)
}

/// Runs the experiment described by `spec`.
pub fn run(spec: &ExperimentSpec) -> Result<Report> {
    spec.validate()?;
    let cfg = &spec.config;
    match spec.kind {
        ExperimentKind::Simulate => run_simulate(cfg, spec.simulate.as_ref().expect("validated")),
        ExperimentKind::Lyapunov => run_lyapunov(cfg, spec.lyapunov.as_ref().expect("validated")),
        ExperimentKind::ScanEpsilon => run_scan(cfg, spec.scan.as_ref().expect("validated")),
        ExperimentKind::EscapeTime => run_escape_time(cfg, spec.escape.as_ref().expect("validated")),
        ExperimentKind::StationaryHist => run_stationary_hist(cfg, spec.hist.as_ref().expect("validated")),
        ExperimentKind::SyncTest => run_sync_sweep(cfg, spec.sync.as_ref().expect("validated")),
        ExperimentKind::MomentCurve => run_moment_curve(cfg, spec.moment.as_ref().expect("validated")),
        ExperimentKind::CapVerify => run_cap_verify(cfg, spec.cap.as_ref().expect("validated")),
        ExperimentKind::SuperLyap => run_super_lyap(cfg, spec.super_lyap.as_ref().expect("validated")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const KINDS: [ExperimentKind; 9] = [
        ExperimentKind::Simulate,
        ExperimentKind::Lyapunov,
        ExperimentKind::ScanEpsilon,
        ExperimentKind::EscapeTime,
        ExperimentKind::StationaryHist,
        ExperimentKind::SyncTest,
        ExperimentKind::MomentCurve,
        ExperimentKind::CapVerify,
        ExperimentKind::SuperLyap,
    ];

    #[test]
    fn defaults_round_trip_through_toml() {
        for k in KINDS {
            let spec = default_spec(k);
            spec.validate().unwrap();
            let text = spec.to_toml().unwrap();
            assert_eq!(ExperimentSpec::from_toml(&text).unwrap(), spec, "{text}");
        }
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let mut text = default_spec(ExperimentKind::SyncTest).to_toml().unwrap();
        text = text.replace("pairs = 20", "pairs = 20\npiars = 3");
        assert!(matches!(ExperimentSpec::from_toml(&text), Err(Error::Config(_))));
    }

    #[test]
    fn missing_table_is_a_config_error() {
        let mut spec = default_spec(ExperimentKind::EscapeTime);
        spec.escape = None;
        assert!(matches!(spec.validate(), Err(Error::Config(_))));
    }

    #[test]
    fn empty_report_writes_only_manifest() {
        let dir = tempfile::tempdir().unwrap();
        let spec = default_spec(ExperimentKind::Simulate);
        let m = emit_report(dir.path(), &spec, &Report::default(), 0.0).unwrap();
        assert_eq!(m.status, RunStatus::Empty);
        let names: Vec<_> = fs::read_dir(dir.path()).unwrap().map(|e| e.unwrap().file_name()).collect();
        assert_eq!(names, vec![std::ffi::OsString::from("manifest.json")]);
    }
}
