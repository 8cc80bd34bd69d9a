//! Time integration of the stochastic Lorenz-96 system
//! `du = (B(u,u) - eps u) dt + sqrt(eps) sum_j sigma_j e_j dW^j`.
//!
//! The default scheme is tamed Euler-Maruyama,
//! `u' = u + dt X_0(u) / (1 + dt |X_0(u)|) + sqrt(eps dt) sum_j sigma_j xi_j e_j`,
//! which keeps the quadratic drift from running away on rare excursions.
//! Noise only touches the indices returned by
//! [`L96Config::noise_indices`], so `H_I` is preserved exactly in
//! degenerate mode.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{drift_into, on_invariant_subspace, L96Config, StateVector};
use crate::noise::NoiseStream;
use crate::scalar::Real;
use crate::stats;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    #[default]
    Tamed,
    Untamed,
}

/// Update rule for the OU process on `H_I`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OuScheme {
    /// Exact Gaussian transition `y e^{-eps dt} + sigma sqrt((1 - e^{-2 eps dt})/2) xi`.
    #[default]
    Exact,
    /// Euler-Maruyama, identical to the full system restricted to `H_I`.
    EulerMaruyama,
}

/// One-step integrator with preallocated buffers for a fixed configuration.
#[derive(Clone, Debug)]
pub struct Integrator<T: Real> {
    epsilon: T,
    dt: T,
    scheme: Scheme,
    noise_idx: Vec<usize>,
    noise_scale: Vec<T>,
    drift: Vec<T>,
    xi: Vec<T>,
}

impl<T: Real> Integrator<T> {
    pub fn new(cfg: &L96Config<T>, scheme: Scheme) -> Self {
        let noise_idx = cfg.noise_indices();
        let root = (cfg.epsilon() * cfg.dt()).sqrt();
        let noise_scale = noise_idx.iter().map(|&j| root * cfg.sigma()[j]).collect();
        Self {
            epsilon: cfg.epsilon(),
            dt: cfg.dt(),
            scheme,
            drift: vec![T::zero(); cfg.n()],
            xi: vec![T::zero(); noise_idx.len()],
            noise_idx,
            noise_scale,
        }
    }

    /// Number of standard normals consumed per step.
    pub fn normals_per_step(&self) -> usize {
        self.noise_idx.len()
    }

    /// Draws this step's normals.
    pub fn draw(&mut self, noise: &mut NoiseStream) -> &[T] {
        noise.fill_normals(&mut self.xi);
        &self.xi
    }

    /// Deterministic part of the step, in place.
    pub fn drift_step(&mut self, u: &mut [T]) {
        drift_into(u, self.epsilon, &mut self.drift);
        let factor = match self.scheme {
            Scheme::Tamed => {
                let norm = self.drift.iter().fold(T::zero(), |a, x| a + *x * *x).sqrt();
                self.dt / (T::one() + self.dt * norm)
            }
            Scheme::Untamed => self.dt,
        };
        for (x, d) in u.iter_mut().zip(&self.drift) {
            *x = *x + factor * *d;
        }
    }

    /// Full step using caller supplied normals (one per noise index).
    pub fn step_with(&mut self, u: &mut [T], xi: &[T]) {
        self.drift_step(u);
        for ((&j, s), z) in self.noise_idx.iter().zip(&self.noise_scale).zip(xi) {
            u[j] = u[j] + *s * *z;
        }
    }

    pub fn step(&mut self, u: &mut [T], noise: &mut NoiseStream) {
        noise.fill_normals(&mut self.xi);
        let xi = std::mem::take(&mut self.xi);
        self.step_with(u, &xi);
        self.xi = xi;
    }
}

fn all_finite<T: Real>(u: &[T]) -> bool {
    u.iter().all(|x| x.is_finite())
}

/// One integrator step from `u`.
pub fn step_em<T: Real>(
    u: &StateVector<T>,
    cfg: &L96Config<T>,
    noise: &mut NoiseStream,
    scheme: Scheme,
) -> Result<StateVector<T>> {
    check_len(u, cfg)?;
    let mut out = u.clone();
    Integrator::new(cfg, scheme).step(out.as_mut_slice(), noise);
    if !out.is_finite() {
        return Err(Error::BlowUp { step: 1, time: cfg.dt().to_f64_lossy() });
    }
    Ok(out)
}

fn check_len<T: Real>(u: &StateVector<T>, cfg: &L96Config<T>) -> Result<()> {
    if u.len() != cfg.n() {
        return Err(Error::Dimension { expected: cfg.n(), found: u.len() });
    }
    if !u.is_finite() {
        return Err(Error::NonFinite("initial state"));
    }
    Ok(())
}

pub(crate) fn step_count<T: Real>(horizon: T, dt: T) -> Result<u64> {
    if !(horizon > T::zero()) {
        return Err(Error::Domain(format!("horizon {horizon} must be positive")));
    }
    Ok((horizon / dt).round().to_u64().unwrap_or(0).max(1))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlowUp {
    pub step: u64,
    pub time: f64,
}

/// Sampled path. `states[i]` is the state at `times[i]`.
#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory<T: Real> {
    pub times: Vec<f64>,
    pub states: Vec<StateVector<T>>,
    pub blow_up: Option<BlowUp>,
}

impl<T: Real> Trajectory<T> {
    pub fn last(&self) -> Option<&StateVector<T>> {
        self.states.last()
    }

    pub fn into_result(self) -> Result<Self> {
        match self.blow_up {
            Some(b) => Err(Error::BlowUp { step: b.step, time: b.time }),
            None => Ok(self),
        }
    }

    /// CSV with header `t,u_0,...,u_{N-1}`. Values use Rust's shortest
    /// round-trip formatting, so equal trajectories give equal bytes.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        let n = self.states.first().map_or(0, |s| s.len());
        let header: Vec<String> = std::iter::once("t".to_string()).chain((0..n).map(|j| format!("u_{j}"))).collect();
        writeln!(w, "{}", header.join(","))?;
        for (t, s) in self.times.iter().zip(&self.states) {
            let row: Vec<String> = std::iter::once(format!("{t:?}")).chain(s.as_slice().iter().map(|x| format!("{x:?}"))).collect();
            writeln!(w, "{}", row.join(","))?;
        }
        Ok(())
    }
}

/// Integrates to `horizon`, recording every `thin`-th state (and the
/// initial state). Stops at the first non-finite state and records it in
/// `blow_up` instead of returning an error.
pub fn simulate_partial<T: Real>(
    u0: &StateVector<T>,
    cfg: &L96Config<T>,
    horizon: T,
    thin: usize,
    scheme: Scheme,
    stream_id: u64,
) -> Result<Trajectory<T>> {
    check_len(u0, cfg)?;
    let steps = step_count(horizon, cfg.dt())?;
    let thin = thin.max(1) as u64;
    let dt = cfg.dt().to_f64_lossy();
    let mut noise = NoiseStream::new(cfg.seed(), stream_id);
    let mut integ = Integrator::new(cfg, scheme);
    let mut u = u0.clone();
    let mut traj = Trajectory { times: vec![0.0], states: vec![u0.clone()], blow_up: None };
    for step in 1..=steps {
        integ.step(u.as_mut_slice(), &mut noise);
        if !all_finite(u.as_slice()) {
            traj.blow_up = Some(BlowUp { step, time: step as f64 * dt });
            break;
        }
        if step % thin == 0 || step == steps {
            traj.times.push(step as f64 * dt);
            traj.states.push(u.clone());
        }
    }
    Ok(traj)
}

/// As [`simulate_partial`] but a blow-up is an error.
pub fn simulate<T: Real>(
    u0: &StateVector<T>,
    cfg: &L96Config<T>,
    horizon: T,
    thin: usize,
    scheme: Scheme,
    stream_id: u64,
) -> Result<Trajectory<T>> {
    simulate_partial(u0, cfg, horizon, thin, scheme, stream_id)?.into_result()
}

/// OU stepper on the forced coordinates; works on the compact vector
/// `y` of length K (ordered as `I`).
#[derive(Clone, Debug)]
pub struct OuStepper<T: Real> {
    scheme: OuScheme,
    decay: T,
    scale: Vec<T>,
    xi: Vec<T>,
}

impl<T: Real> OuStepper<T> {
    pub fn new(cfg: &L96Config<T>, scheme: OuScheme) -> Self {
        let (eps, dt) = (cfg.epsilon(), cfg.dt());
        let sig: Vec<T> = cfg.indexing().forced().iter().map(|&j| cfg.sigma()[j]).collect();
        let (decay, per_mode) = match scheme {
            OuScheme::Exact => {
                let d = (-eps * dt).exp();
                let var = (T::one() - (-(eps + eps) * dt).exp()) / T::lit(2.0);
                (d, var.sqrt())
            }
            OuScheme::EulerMaruyama => (T::one() - eps * dt, (eps * dt).sqrt()),
        };
        Self { scheme, decay, scale: sig.iter().map(|s| *s * per_mode).collect(), xi: vec![T::zero(); sig.len()] }
    }

    pub fn scheme(&self) -> OuScheme {
        self.scheme
    }

    pub fn step(&mut self, y: &mut [T], noise: &mut NoiseStream) {
        noise.fill_normals(&mut self.xi);
        for ((x, s), z) in y.iter_mut().zip(&self.scale).zip(&self.xi) {
            *x = *x * self.decay + *s * *z;
        }
    }
}

/// Draw from the stationary law `N(0, sigma_j^2 / 2)` of each forced mode,
/// returned as a compact K-vector.
pub fn ou_stationary_sample<T: Real>(cfg: &L96Config<T>, noise: &mut NoiseStream) -> Vec<T> {
    let half = T::lit(0.5).sqrt();
    cfg.indexing().forced().iter().map(|&j| cfg.sigma()[j] * half * noise.standard_normal::<T>()).collect()
}

/// OU path on `H_I`, embedded in `R^N`.
pub fn simulate_ou<T: Real>(
    y0: &StateVector<T>,
    cfg: &L96Config<T>,
    horizon: T,
    thin: usize,
    scheme: OuScheme,
    stream_id: u64,
) -> Result<Trajectory<T>> {
    check_len(y0, cfg)?;
    if !on_invariant_subspace(y0) {
        return Err(Error::Domain("OU initial state must lie on H_I".into()));
    }
    let idx = cfg.indexing();
    let steps = step_count(horizon, cfg.dt())?;
    let thin = thin.max(1) as u64;
    let dt = cfg.dt().to_f64_lossy();
    let mut noise = NoiseStream::new(cfg.seed(), stream_id);
    let mut ou = OuStepper::new(cfg, scheme);
    let mut y = idx.compact_forced(y0);
    let mut traj = Trajectory { times: vec![0.0], states: vec![y0.clone()], blow_up: None };
    for step in 1..=steps {
        ou.step(&mut y, &mut noise);
        if step % thin == 0 || step == steps {
            traj.times.push(step as f64 * dt);
            traj.states.push(idx.embed_forced(&y));
        }
    }
    Ok(traj)
}

/// Distance series of two trajectories driven by the same noise.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoupledPair {
    pub times: Vec<f64>,
    pub distances: Vec<f64>,
    /// First sampled time with distance below the threshold.
    pub sync_time: Option<f64>,
    pub synchronized: bool,
}

pub const DEFAULT_SYNC_THRESHOLD: f64 = 1e-6;

/// Integrates `u0` and `v0` with identical increments. Samples the
/// distance every `sample_every` steps; stops early once synchronized.
#[allow(clippy::too_many_arguments)]
pub fn coupled_pair<T: Real>(
    u0: &StateVector<T>,
    v0: &StateVector<T>,
    cfg: &L96Config<T>,
    horizon: T,
    sync_threshold: f64,
    sample_every: usize,
    scheme: Scheme,
    stream_id: u64,
) -> Result<CoupledPair> {
    check_len(u0, cfg)?;
    check_len(v0, cfg)?;
    let steps = step_count(horizon, cfg.dt())?;
    let every = sample_every.max(1) as u64;
    let dt = cfg.dt().to_f64_lossy();
    let mut noise = NoiseStream::new(cfg.seed(), stream_id);
    let mut iu = Integrator::new(cfg, scheme);
    let mut iv = Integrator::new(cfg, scheme);
    let mut xi = vec![T::zero(); iu.normals_per_step()];
    let (mut u, mut v) = (u0.clone(), v0.clone());
    let dist = |u: &StateVector<T>, v: &StateVector<T>| u.sub(v).norm().to_f64_lossy();
    let d0 = dist(&u, &v);
    let mut out = CoupledPair { times: vec![0.0], distances: vec![d0], sync_time: None, synchronized: false };
    if d0 < sync_threshold {
        out.sync_time = Some(0.0);
        out.synchronized = true;
        return Ok(out);
    }
    for step in 1..=steps {
        noise.fill_normals(&mut xi);
        iu.step_with(u.as_mut_slice(), &xi);
        iv.step_with(v.as_mut_slice(), &xi);
        if !u.is_finite() || !v.is_finite() {
            return Err(Error::BlowUp { step, time: step as f64 * dt });
        }
        if step % every == 0 || step == steps {
            let d = dist(&u, &v);
            out.times.push(step as f64 * dt);
            out.distances.push(d);
            if d < sync_threshold {
                out.sync_time = Some(step as f64 * dt);
                out.synchronized = true;
                break;
            }
        }
    }
    Ok(out)
}

/// Result of the super-Lyapunov probe at one initial state.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuperLyapPoint {
    pub initial_norm: f64,
    /// `log E[sup_{t<=T} V(u_t)] - log V(u_0)`.
    pub log_sup_ratio: f64,
    pub sup_ratio: f64,
    /// `log E[V(u_T)]`.
    pub log_terminal_mean: f64,
    pub accepted_paths: usize,
    pub rejected_paths: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuperLyapReport {
    pub eta: f64,
    pub eta_star: f64,
    pub horizon: f64,
    pub points: Vec<SuperLyapPoint>,
    pub max_ratio: f64,
}

/// Largest admissible weight, `1 / (8 max_j sigma_j^2)`.
pub fn eta_star<T: Real>(cfg: &L96Config<T>) -> f64 {
    let s = cfg.max_sigma().to_f64_lossy();
    1.0 / (8.0 * s * s)
}

/// Monte Carlo estimate of `E[sup_{t <= T} V(u_t)] / V(u_0)` for
/// `V(u) = exp(eta |u|^2)`, per initial state. All exponentials are handled
/// in log space; paths that blow up are rejected and counted.
pub fn super_lyapunov_probe<T: Real>(
    cfg: &L96Config<T>,
    eta: f64,
    grid: &[StateVector<T>],
    horizon: T,
    paths: usize,
    stream_id: u64,
) -> Result<SuperLyapReport> {
    let es = eta_star(cfg);
    if !(eta > 0.0 && eta < es) {
        return Err(Error::Precondition(format!("eta = {eta} must lie in (0, {es})")));
    }
    if paths == 0 || grid.is_empty() {
        return Err(Error::Precondition("need at least one path and one grid point".into()));
    }
    let steps = step_count(horizon, cfg.dt())?;
    let parent = NoiseStream::new(cfg.seed(), stream_id);
    let mut points = Vec::with_capacity(grid.len());
    for (gi, u0) in grid.iter().enumerate() {
        check_len(u0, cfg)?;
        let point_stream = parent.substream(gi as u64);
        let per_path: Vec<Option<(f64, f64)>> = (0..paths)
            .into_par_iter()
            .map(|p| {
                let mut noise = point_stream.substream(p as u64);
                let mut integ = Integrator::new(cfg, Scheme::Tamed);
                let mut u = u0.clone();
                let mut sup = u.norm_sq().to_f64_lossy();
                for _ in 0..steps {
                    integ.step(u.as_mut_slice(), &mut noise);
                    let e = u.norm_sq().to_f64_lossy();
                    if !e.is_finite() {
                        return None;
                    }
                    sup = sup.max(e);
                }
                Some((eta * sup, eta * u.norm_sq().to_f64_lossy()))
            })
            .collect();
        let ok: Vec<(f64, f64)> = per_path.iter().flatten().copied().collect();
        let rejected = paths - ok.len();
        let log_v0 = eta * u0.norm_sq().to_f64_lossy();
        let (log_sup, log_term) = if ok.is_empty() {
            (f64::NAN, f64::NAN)
        } else {
            let sups: Vec<f64> = ok.iter().map(|x| x.0).collect();
            let terms: Vec<f64> = ok.iter().map(|x| x.1).collect();
            (stats::log_mean_exp(&sups), stats::log_mean_exp(&terms))
        };
        let log_ratio = log_sup - log_v0;
        points.push(SuperLyapPoint {
            initial_norm: u0.norm().to_f64_lossy(),
            log_sup_ratio: log_ratio,
            sup_ratio: log_ratio.exp(),
            log_terminal_mean: log_term,
            accepted_paths: ok.len(),
            rejected_paths: rejected,
        });
    }
    let max_ratio = points.iter().map(|p| p.sup_ratio).fold(f64::NEG_INFINITY, f64::max);
    Ok(SuperLyapReport { eta, eta_star: es, horizon: horizon.to_f64_lossy(), points, max_ratio })
}
