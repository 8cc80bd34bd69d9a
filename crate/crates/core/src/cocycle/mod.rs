//! Transverse linearization over the OU base process.
//!
//! For `y_t` on `H_I` the transverse perturbation obeys
//! `dw/dt = (G(y_t) - eps) w` with `G(y) = sum_k y_k M_k`. We track the
//! direction `v = w/|w|` on the unit sphere and the accumulated
//! `log |w_t|`. The projective field is `F(v) = G v - v <v, G v>`; the
//! damping drops out of the direction and only shifts the growth rate.

mod block;

pub use block::{block_matrix, charpoly, factored_coefficients, unstable_block, SqrtRoot, UnstableBlock};

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::model::{m_k_triples, L96Config, SubspaceIndexing};
use crate::noise::NoiseStream;
use crate::scalar::Real;
use crate::sde::{ou_stationary_sample, step_count, OuScheme, OuStepper};
use crate::stats::{self, KahanSum};

/// Sparse form of `y -> G(y)`: entry `(row, col) += sign * y[k]`.
#[derive(Clone, Debug)]
pub struct TransverseOperator {
    dim: usize,
    k: usize,
    entries: Vec<(usize, usize, usize, i8)>,
}

impl TransverseOperator {
    pub fn new(n: usize) -> Result<Self> {
        let idx = SubspaceIndexing::new(n)?;
        let mut entries = Vec::with_capacity(4 * idx.k());
        for (ki, &k) in idx.forced().iter().enumerate() {
            for (l, m, s) in m_k_triples(k, n)? {
                entries.push((ki, l, m, s as i8));
            }
        }
        Ok(Self { dim: idx.dim_transverse(), k: idx.k(), entries })
    }

    /// Transverse dimension `2K`.
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `out = G(y) v`, with `y` the compact forced vector (length K).
    pub fn apply<T: Real>(&self, y: &[T], v: &[T], out: &mut [T]) {
        debug_assert_eq!(y.len(), self.k);
        out.iter_mut().for_each(|x| *x = T::zero());
        for &(k, l, m, s) in &self.entries {
            let c = y[k] * v[m];
            out[l] = if s > 0 { out[l] + c } else { out[l] - c };
        }
    }

    /// Dense `G(y)`.
    pub fn dense<T: Real>(&self, y: &[T]) -> Matrix<T> {
        let mut g = Matrix::zeros(self.dim, self.dim);
        for &(k, l, m, s) in &self.entries {
            let c = y[k];
            g[(l, m)] = if s > 0 { g[(l, m)] + c } else { g[(l, m)] - c };
        }
        g
    }
}

/// State of the projective process plus the accumulated log growth.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransverseFrame<T> {
    /// Base point on `H_I`, compact (length K, ordered as `I`).
    pub y: Vec<T>,
    /// Unit transverse direction, compact (length 2K).
    pub v: Vec<T>,
    pub log_norm: f64,
    pub t: f64,
}

impl<T: Real> TransverseFrame<T> {
    pub fn new(y: Vec<T>, v: Vec<T>) -> Result<Self> {
        let norm = v.iter().fold(T::zero(), |a, x| a + *x * *x).sqrt();
        if !(norm > T::zero()) || !norm.is_finite() {
            return Err(Error::Domain("transverse direction must be a nonzero finite vector".into()));
        }
        Ok(Self { y, v: v.into_iter().map(|x| x / norm).collect(), log_norm: 0.0, t: 0.0 })
    }

    /// `y` drawn from the stationary OU law and `v` uniform on the sphere.
    pub fn stationary(cfg: &L96Config<T>, noise: &mut NoiseStream) -> Self {
        let y = ou_stationary_sample(cfg, noise);
        let v = noise.unit_vector(2 * cfg.k());
        Self { y, v, log_norm: 0.0, t: 0.0 }
    }
}

/// Advances a [`TransverseFrame`] by one step: RK2 (midpoint) for the
/// direction with `y` frozen over the step, renormalization, log-growth
/// increment `dt (<v_mid, G v_mid> - eps)` at the normalized midpoint,
/// then one OU step for `y`.
#[derive(Clone, Debug)]
pub struct CocycleStepper<T: Real> {
    op: TransverseOperator,
    ou: OuStepper<T>,
    epsilon: T,
    dt: T,
    gv: Vec<T>,
    mid: Vec<T>,
}

fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |acc, (x, y)| acc + *x * *y)
}

impl<T: Real> CocycleStepper<T> {
    pub fn new(cfg: &L96Config<T>, ou_scheme: OuScheme) -> Result<Self> {
        let idx = cfg.indexing();
        if idx.transverse().iter().any(|&j| cfg.sigma()[j] > T::zero()) {
            return Err(Error::Precondition("noise on transverse modes breaks invariance of H_I".into()));
        }
        let op = TransverseOperator::new(cfg.n())?;
        let d = op.dim();
        Ok(Self {
            op,
            ou: OuStepper::new(cfg, ou_scheme),
            epsilon: cfg.epsilon(),
            dt: cfg.dt(),
            gv: vec![T::zero(); d],
            mid: vec![T::zero(); d],
        })
    }

    pub fn operator(&self) -> &TransverseOperator {
        &self.op
    }

    /// Instantaneous Furstenberg-Khasminskii integrand `<v, G(y) v> - eps`
    /// at the current frame.
    pub fn integrand(&mut self, frame: &TransverseFrame<T>) -> f64 {
        self.op.apply(&frame.y, &frame.v, &mut self.gv);
        (dot(&frame.v, &self.gv) - self.epsilon).to_f64_lossy()
    }

    /// Direction and log-norm update with `y` held fixed.
    pub fn step_direction(&mut self, frame: &mut TransverseFrame<T>) -> Result<()> {
        let half = self.dt / T::lit(2.0);
        let v = &mut frame.v;
        self.op.apply(&frame.y, v, &mut self.gv);
        let a = dot(v, &self.gv);
        for ((m, x), g) in self.mid.iter_mut().zip(v.iter()).zip(&self.gv) {
            *m = *x + half * (*g - a * *x);
        }
        self.op.apply(&frame.y, &self.mid, &mut self.gv);
        let mm = dot(&self.mid, &self.mid);
        let am = dot(&self.mid, &self.gv) / mm;
        for ((x, m), g) in v.iter_mut().zip(&self.mid).zip(&self.gv) {
            *x = *x + self.dt * (*g - am * *m);
        }
        let norm = dot(v, v).sqrt();
        if !(norm > T::zero()) || !norm.is_finite() {
            return Err(Error::BlowUp { step: 0, time: frame.t });
        }
        v.iter_mut().for_each(|x| *x = *x / norm);
        frame.log_norm += (self.dt * (am - self.epsilon)).to_f64_lossy();
        frame.t += self.dt.to_f64_lossy();
        if !frame.log_norm.is_finite() {
            return Err(Error::BlowUp { step: 0, time: frame.t });
        }
        Ok(())
    }

    pub fn step(&mut self, frame: &mut TransverseFrame<T>, noise: &mut NoiseStream) -> Result<()> {
        self.step_direction(frame)?;
        self.ou.step(&mut frame.y, noise);
        Ok(())
    }
}

/// One step of the projective process.
pub fn step_transverse<T: Real>(
    frame: &TransverseFrame<T>,
    cfg: &L96Config<T>,
    noise: &mut NoiseStream,
) -> Result<TransverseFrame<T>> {
    let mut out = frame.clone();
    CocycleStepper::new(cfg, OuScheme::Exact)?.step(&mut out, noise)?;
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    /// Differences of the accumulated `log |w_t|`.
    LogNormGrowth,
    /// Time average of `<v, G(y) v> - eps` along the projective process.
    FkAverage,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExponentEstimate {
    pub value: f64,
    pub stderr: f64,
    pub horizon: f64,
    pub burn_in: f64,
    pub method: Method,
    pub batches: usize,
    pub lost_batches: usize,
}

impl ExponentEstimate {
    /// Two-sided confidence interval from the batch-means t statistic.
    pub fn ci(&self, level: f64) -> (f64, f64) {
        let h = stats::t_critical(level, self.batches.saturating_sub(1)) * self.stderr;
        (self.value - h, self.value + h)
    }

    pub fn excludes_zero(&self, level: f64) -> bool {
        let (lo, hi) = self.ci(level);
        lo > 0.0 || hi < 0.0
    }
}

/// Shared settings for the exponent estimators.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EstimatorSettings {
    pub horizon: f64,
    /// Defaults to `max(0.1 T, 10)`.
    #[serde(default)]
    pub burn_in: Option<f64>,
    #[serde(default = "default_batches")]
    pub batches: usize,
    #[serde(default)]
    pub ou_scheme: OuScheme,
    #[serde(default)]
    pub stream_id: u64,
}

fn default_batches() -> usize {
    20
}

impl EstimatorSettings {
    pub fn new(horizon: f64) -> Self {
        Self { horizon, burn_in: None, batches: default_batches(), ou_scheme: OuScheme::Exact, stream_id: 0 }
    }

    pub fn burn_in(&self) -> f64 {
        self.burn_in.unwrap_or_else(|| (0.1 * self.horizon).max(10.0))
    }
}

/// Both estimators from a single run (they share every random draw).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExponentPair {
    pub log_norm: ExponentEstimate,
    pub fk: ExponentEstimate,
}

impl ExponentPair {
    pub fn get(&self, m: Method) -> &ExponentEstimate {
        match m {
            Method::LogNormGrowth => &self.log_norm,
            Method::FkAverage => &self.fk,
        }
    }

    /// `|a - b| <= k * sqrt(se_a^2 + se_b^2)`.
    pub fn agree_within(&self, k: f64) -> bool {
        let se = self.log_norm.stderr.hypot(self.fk.stderr);
        (self.log_norm.value - self.fk.value).abs() <= k * se
    }
}

/// Runs the projective process for `settings.horizon`, discards the
/// burn-in and forms batch means of both estimators.
pub fn lyapunov_exponents<T: Real>(cfg: &L96Config<T>, settings: &EstimatorSettings) -> Result<ExponentPair> {
    let burn = settings.burn_in();
    if !(settings.horizon > burn) {
        return Err(Error::Precondition(format!("horizon {} must exceed burn-in {burn}", settings.horizon)));
    }
    if settings.batches < 2 {
        return Err(Error::Precondition("need at least two batches".into()));
    }
    let dt = cfg.dt();
    let burn_steps = step_count(T::lit(burn), dt)?;
    let total = step_count(T::lit(settings.horizon), dt)?;
    let per_batch = (total - burn_steps) / settings.batches as u64;
    if per_batch == 0 {
        return Err(Error::Precondition("fewer steps than batches".into()));
    }
    let mut noise = NoiseStream::new(cfg.seed(), settings.stream_id);
    let mut stepper = CocycleStepper::new(cfg, settings.ou_scheme)?;
    let mut frame = TransverseFrame::stationary(cfg, &mut noise);
    for _ in 0..burn_steps {
        stepper.step(&mut frame, &mut noise)?;
    }
    let batch_time = per_batch as f64 * dt.to_f64_lossy();
    let mut ln_batches = Vec::with_capacity(settings.batches);
    let mut fk_batches = Vec::with_capacity(settings.batches);
    'outer: for _ in 0..settings.batches {
        let start = frame.log_norm;
        let mut fk = KahanSum::default();
        for _ in 0..per_batch {
            fk.add(stepper.integrand(&frame));
            if stepper.step(&mut frame, &mut noise).is_err() {
                break 'outer;
            }
        }
        ln_batches.push((frame.log_norm - start) / batch_time);
        fk_batches.push(fk.value() / per_batch as f64);
    }
    let lost = settings.batches - ln_batches.len();
    if lost * 10 > settings.batches || ln_batches.len() < 2 {
        return Err(Error::EstimateRefused(format!("{lost} of {} batches lost to blow-up", settings.batches)));
    }
    let horizon = burn + batch_time * settings.batches as f64;
    let make = |xs: &[f64], method| ExponentEstimate {
        value: stats::mean(xs),
        stderr: stats::std_error(xs),
        horizon,
        burn_in: burn,
        method,
        batches: xs.len(),
        lost_batches: lost,
    };
    Ok(ExponentPair { log_norm: make(&ln_batches, Method::LogNormGrowth), fk: make(&fk_batches, Method::FkAverage) })
}

pub fn lyapunov_exponent<T: Real>(
    cfg: &L96Config<T>,
    settings: &EstimatorSettings,
    method: Method,
) -> Result<ExponentEstimate> {
    Ok(lyapunov_exponents(cfg, settings)?.get(method).clone())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeterminantRate {
    /// `(1/T) int_0^T (tr G(y_t) - 2K eps) dt`.
    pub rate: f64,
    /// The exact target `-2K eps`.
    pub expected: f64,
    pub max_abs_trace: f64,
    pub steps: u64,
}

/// Time-averaged growth rate of `log |det A_t|` on `H_I^perp`, measuring
/// `tr G(y_t)` on the dense generator at every step.
pub fn determinant_rate<T: Real>(cfg: &L96Config<T>, horizon: T, stream_id: u64) -> Result<DeterminantRate> {
    let steps = step_count(horizon, cfg.dt())?;
    let op = TransverseOperator::new(cfg.n())?;
    let dim = op.dim() as f64;
    let eps = cfg.epsilon().to_f64_lossy();
    let dt = cfg.dt().to_f64_lossy();
    let mut noise = NoiseStream::new(cfg.seed(), stream_id);
    let mut ou = OuStepper::new(cfg, OuScheme::Exact);
    let mut y = ou_stationary_sample(cfg, &mut noise);
    let mut acc = KahanSum::default();
    let mut max_tr = 0.0f64;
    for _ in 0..steps {
        let tr = op.dense(&y).trace().to_f64_lossy();
        if !tr.is_finite() {
            return Err(Error::NonFinite("generator trace"));
        }
        max_tr = max_tr.max(tr.abs());
        acc.add(dt * (tr - dim * eps));
        ou.step(&mut y, &mut noise);
    }
    let total = steps as f64 * dt;
    Ok(DeterminantRate { rate: acc.value() / total, expected: -dim * eps, max_abs_trace: max_tr, steps })
}

/// Plug-in estimate of the moment exponent `Lambda(p)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentEstimate {
    pub p: f64,
    pub value: f64,
    pub stderr: f64,
    pub horizon: f64,
    pub paths: usize,
    pub effective_sample_size: f64,
    /// False when the effective sample size drops below `paths / 100`.
    pub reliable: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MomentSettings {
    pub horizon: f64,
    pub paths: usize,
    #[serde(default = "default_resamples")]
    pub resamples: usize,
    #[serde(default)]
    pub stream_id: u64,
}

fn default_resamples() -> usize {
    200
}

/// Final `log |w_T|` for `paths` independent frames started from the
/// stationary OU law with uniform directions. Deterministic in the path
/// index regardless of scheduling.
pub fn terminal_log_norms<T: Real>(cfg: &L96Config<T>, horizon: f64, paths: usize, stream_id: u64) -> Result<Vec<f64>> {
    let steps = step_count(T::lit(horizon), cfg.dt())?;
    let parent = NoiseStream::new(cfg.seed(), stream_id);
    let per_path: Vec<Result<f64>> = (0..paths)
        .into_par_iter()
        .map(|i| {
            let mut noise = parent.substream(i as u64);
            let mut stepper = CocycleStepper::new(cfg, OuScheme::Exact)?;
            let mut frame = TransverseFrame::stationary(cfg, &mut noise);
            for _ in 0..steps {
                stepper.step(&mut frame, &mut noise)?;
            }
            Ok(frame.log_norm)
        })
        .collect();
    per_path.into_iter().collect()
}

/// `Lambda(p) = -(1/T) log mean exp(-p log|w_T|)` for each `p`, all from
/// the same ensemble of paths. Standard errors come from a path-level
/// bootstrap.
pub fn moment_curve<T: Real>(cfg: &L96Config<T>, ps: &[f64], settings: &MomentSettings) -> Result<Vec<MomentEstimate>> {
    if let Some(p) = ps.iter().find(|p| !(p.abs() <= 1.0)) {
        return Err(Error::Precondition(format!("|p| = {} exceeds 1", p.abs())));
    }
    if settings.paths < 1000 {
        return Err(Error::Precondition(format!("need at least 1000 paths, got {}", settings.paths)));
    }
    if settings.resamples < 200 {
        return Err(Error::Precondition("need at least 200 bootstrap resamples".into()));
    }
    let logs = terminal_log_norms(cfg, settings.horizon, settings.paths, settings.stream_id)?;
    let horizon = settings.horizon;
    let mut boot = NoiseStream::new(cfg.seed(), crate::noise::mix(settings.stream_id, u64::MAX));
    Ok(ps
        .iter()
        .map(|&p| {
            let weights: Vec<f64> = logs.iter().map(|l| -p * l).collect();
            let lambda = |w: &[f64]| -stats::log_mean_exp(w) / horizon + 0.0;
            let value = lambda(&weights);
            let stderr = if p == 0.0 { 0.0 } else { stats::bootstrap_se(&weights, settings.resamples, &mut boot, lambda) };
            let ess = stats::effective_sample_size(&weights);
            MomentEstimate {
                p,
                value,
                stderr,
                horizon,
                paths: logs.len(),
                effective_sample_size: ess,
                reliable: ess >= settings.paths as f64 / 100.0,
            }
        })
        .collect())
}

pub fn moment_lyapunov<T: Real>(cfg: &L96Config<T>, p: f64, settings: &MomentSettings) -> Result<MomentEstimate> {
    Ok(moment_curve(cfg, &[p], settings)?.remove(0))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanRow {
    pub eps: f64,
    pub lambda: f64,
    pub stderr: f64,
    pub lambda_over_eps: f64,
    pub fk_lambda: f64,
    pub fk_stderr: f64,
    pub error: Option<String>,
}

/// Transverse exponent across a decreasing grid of damping values. A
/// failing grid point is recorded in its row and does not stop the scan.
pub fn lambda_scan(template: &L96Config<f64>, eps_grid: &[f64], settings: &EstimatorSettings) -> Result<Vec<ScanRow>> {
    if eps_grid.len() < 4 {
        return Err(Error::Precondition("scan grid needs at least 4 points".into()));
    }
    if eps_grid.windows(2).any(|w| !(w[0] > w[1])) {
        return Err(Error::Precondition("scan grid must be strictly decreasing".into()));
    }
    if !(eps_grid[0] >= 10.0 * eps_grid[eps_grid.len() - 1]) {
        return Err(Error::Precondition("scan grid must span at least one decade".into()));
    }
    Ok(eps_grid
        .par_iter()
        .map(|&eps| {
            let run = template.with_epsilon(eps).and_then(|c| lyapunov_exponents(&c, settings));
            match run {
                Ok(pair) => ScanRow {
                    eps,
                    lambda: pair.log_norm.value,
                    stderr: pair.log_norm.stderr,
                    lambda_over_eps: pair.log_norm.value / eps,
                    fk_lambda: pair.fk.value,
                    fk_stderr: pair.fk.stderr,
                    error: None,
                },
                Err(e) => ScanRow {
                    eps,
                    lambda: f64::NAN,
                    stderr: f64::NAN,
                    lambda_over_eps: f64::NAN,
                    fk_lambda: f64::NAN,
                    fk_stderr: f64::NAN,
                    error: Some(e.to_string()),
                },
            }
        })
        .collect())
}

/// `eps,lambda,stderr,lambda_over_eps`.
pub fn write_scan_csv<W: Write>(rows: &[ScanRow], mut w: W) -> Result<()> {
    writeln!(w, "eps,lambda,stderr,lambda_over_eps")?;
    for r in rows {
        writeln!(w, "{:?},{:?},{:?},{:?}", r.eps, r.lambda, r.stderr, r.lambda_over_eps)?;
    }
    Ok(())
}

/// `p,Lambda,stderr`.
pub fn write_moment_csv<W: Write>(rows: &[MomentEstimate], mut w: W) -> Result<()> {
    writeln!(w, "p,Lambda,stderr")?;
    for r in rows {
        writeln!(w, "{:?},{:?},{:?}", r.p, r.value, r.stderr)?;
    }
    Ok(())
}
