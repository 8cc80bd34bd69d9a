use rayon::prelude::*;

use super::{
    CapParams, EscapeParams, HistParams, LyapunovParams, MomentParams, Report, ScanParams, Side, SimulateParams,
    SuperLyapParams, SyncParams, Table, TaskSeed,
};
use crate::cocycle::{lambda_scan, lyapunov_exponents, moment_curve, EstimatorSettings, MomentSettings, ScanRow};
use crate::error::{Error, Result};
use crate::lie::{cap_verify, write_basis_csv, GeneratorSet};
use crate::model::{L96Config, StateVector};
use crate::noise::{mix, NoiseStream};
use crate::sde::{coupled_pair, ou_stationary_sample, simulate_partial, step_count, super_lyapunov_probe, Integrator, Scheme};
use crate::stats;

// Top-level stream ids; per-path streams are substreams of these.
const STREAM_INIT: u64 = 1;
const STREAM_SIM: u64 = 2;
const STREAM_ESCAPE: u64 = 3;
const STREAM_HIST: u64 = 4;
const STREAM_SYNC: u64 = 5;
const STREAM_MOMENT: u64 = 6;
const STREAM_SUPER: u64 = 7;
const STREAM_LYAP: u64 = 8;

// Shortest round-trip form; switches to exponent notation for very small
// and very large magnitudes.
fn f(x: f64) -> String {
    format!("{x:?}")
}

fn task(name: &str, seed: u64, stream: u64) -> TaskSeed {
    TaskSeed { task: name.into(), seed, stream }
}

/// Entries iid `N(0, 1)`.
pub fn generic_state(n: usize, noise: &mut NoiseStream) -> StateVector<f64> {
    let mut v = vec![0.0; n];
    noise.fill_normals(&mut v);
    StateVector::from_vec(v)
}

fn transverse_norm(u: &[f64]) -> f64 {
    u.iter().enumerate().filter(|(j, _)| j % 3 != 0).map(|(_, x)| x * x).sum::<f64>().sqrt()
}

pub fn run_simulate(cfg: &L96Config<f64>, p: &SimulateParams) -> Result<Report> {
    let u0 = generic_state(cfg.n(), &mut NoiseStream::new(cfg.seed(), STREAM_INIT));
    let traj = simulate_partial(&u0, cfg, p.horizon, p.thin, p.scheme, STREAM_SIM)?;
    let mut header = vec!["t".to_string()];
    header.extend((0..cfg.n()).map(|j| format!("u_{j}")));
    let mut t = Table { name: "trajectory".into(), header, rows: Vec::new() };
    for (time, s) in traj.times.iter().zip(&traj.states) {
        let mut row = vec![f(*time)];
        row.extend(s.as_slice().iter().map(|x| f(*x)));
        t.push(row);
    }
    let mut r = Report { tables: vec![t], ..Default::default() };
    r.tasks = vec![task("initial state", cfg.seed(), STREAM_INIT), task("path", cfg.seed(), STREAM_SIM)];
    if let Some(b) = traj.blow_up {
        r.blow_ups = 1;
        r.aborted = true;
        r.notes.push(format!("blow-up at step {} (t = {}); trajectory truncated", b.step, b.time));
    }
    Ok(r)
}

pub fn run_lyapunov(cfg: &L96Config<f64>, p: &LyapunovParams) -> Result<Report> {
    let settings = EstimatorSettings { horizon: p.horizon, burn_in: p.burn_in, batches: p.batches, stream_id: STREAM_LYAP, ..EstimatorSettings::new(p.horizon) };
    let pair = lyapunov_exponents(cfg, &settings)?;
    let mut t = Table::new("lyapunov", &["method", "lambda", "stderr", "ci_lo", "ci_hi", "horizon", "burn_in", "batches"]);
    for e in [&pair.log_norm, &pair.fk] {
        let (lo, hi) = e.ci(0.95);
        let m = serde_json::to_value(e.method)?.as_str().unwrap_or_default().to_string();
        t.push(vec![m, f(e.value), f(e.stderr), f(lo), f(hi), f(e.horizon), f(e.burn_in), e.batches.to_string()]);
    }
    let mut r = Report { tables: vec![t], ..Default::default() };
    r.tasks = vec![task("projective process", cfg.seed(), STREAM_LYAP)];
    let diff = pair.log_norm.value - pair.fk.value;
    let se = pair.log_norm.stderr.hypot(pair.fk.stderr);
    r.check("estimator coherence", diff, Some(se), "|difference| <= 2 combined SE".into(), pair.agree_within(2.0));
    Ok(r)
}

/// One [`lambda_scan`] per replicate, with seeds `seed, seed + 1, ...`.
pub fn scan_replicates(cfg: &L96Config<f64>, p: &ScanParams) -> Result<Vec<(u64, Vec<ScanRow>)>> {
    let settings = EstimatorSettings { horizon: p.horizon, burn_in: p.burn_in, batches: p.batches, stream_id: STREAM_LYAP, ..EstimatorSettings::new(p.horizon) };
    (0..p.replicates as u64)
        .map(|rep| {
            let seed = cfg.seed().wrapping_add(rep);
            Ok((seed, lambda_scan(&cfg.with_seed(seed), &p.eps_grid, &settings)?))
        })
        .collect()
}

pub fn run_scan(cfg: &L96Config<f64>, p: &ScanParams) -> Result<Report> {
    let tcrit = stats::t_critical(p.level, p.batches.saturating_sub(1));
    let mut r = Report::default();
    let mut scan = Table::new("scan", &["eps", "lambda", "stderr", "lambda_over_eps"]);
    let mut detail = Table::new(
        "scan_detail",
        &["eps", "seed", "lambda", "stderr", "ci_lo", "ci_hi", "fk_lambda", "fk_stderr", "error"],
    );
    for (rep, (seed, rows)) in scan_replicates(cfg, p)?.into_iter().enumerate() {
        r.tasks.push(task(&format!("scan replicate {rep}"), seed, STREAM_LYAP));
        for row in &rows {
            let h = tcrit * row.stderr;
            detail.push(vec![
                f(row.eps),
                seed.to_string(),
                f(row.lambda),
                f(row.stderr),
                f(row.lambda - h),
                f(row.lambda + h),
                f(row.fk_lambda),
                f(row.fk_stderr),
                row.error.clone().unwrap_or_default().replace(',', ";"),
            ]);
            if row.error.is_some() {
                r.excluded += 1;
            }
            let diff = row.lambda - row.fk_lambda;
            let se = row.stderr.hypot(row.fk_stderr);
            r.check(
                &format!("coherence eps={} seed={seed}", row.eps),
                diff,
                Some(se),
                format!("|difference| <= {} combined SE", p.coherence_k),
                diff.abs() <= p.coherence_k * se,
            );
        }
        if rep > 0 {
            continue;
        }
        for row in &rows {
            scan.push(vec![f(row.eps), f(row.lambda), f(row.stderr), f(row.lambda_over_eps)]);
        }
        let (first, last) = (&rows[0], &rows[rows.len() - 1]);
        r.check(
            &format!("lambda < 0 at eps={}", first.eps),
            first.lambda,
            Some(first.stderr),
            format!("{}% CI below 0", p.level * 100.0),
            first.lambda + tcrit * first.stderr < 0.0,
        );
        r.check(
            &format!("lambda > 0 at eps={}", last.eps),
            last.lambda,
            Some(last.stderr),
            format!("{}% CI above 0", p.level * 100.0),
            last.lambda - tcrit * last.stderr > 0.0,
        );
        for w in rows.windows(2) {
            let (a, b) = (&w[0], &w[1]);
            let se = (a.stderr / a.eps).hypot(b.stderr / b.eps);
            let d = b.lambda_over_eps - a.lambda_over_eps;
            r.check(
                &format!("lambda/eps increases from eps={} to eps={}", a.eps, b.eps),
                d,
                Some(se),
                "difference > -CI half-width".into(),
                d > -tcrit * se,
            );
        }
    }
    r.tables = vec![scan, detail];
    Ok(r)
}

/// First time `|Pi^perp u_t| >= threshold` from `y* + delta v`, where `y*`
/// is OU-stationary and `v` a uniform transverse unit vector. Path `i`
/// uses the same draws for every `delta`.
fn escape_path(cfg: &L96Config<f64>, delta: f64, threshold: f64, steps: u64, path: u64) -> Result<Option<f64>> {
    if delta >= threshold {
        return Ok(Some(0.0));
    }
    let idx = cfg.indexing();
    let parent = NoiseStream::new(cfg.seed(), STREAM_ESCAPE);
    let mut ic = parent.substream(2 * path);
    let y = ou_stationary_sample(cfg, &mut ic);
    let v: Vec<f64> = ic.unit_vector(idx.dim_transverse());
    let mut u = idx.embed_forced(&y).add(&idx.embed_transverse(&v).scale(&delta)).into_vec();
    let mut noise = parent.substream(2 * path + 1);
    let mut integ = Integrator::new(cfg, Scheme::Tamed);
    let dt = cfg.dt();
    for step in 1..=steps {
        integ.step(&mut u, &mut noise);
        let r = transverse_norm(&u);
        if !r.is_finite() || u.iter().any(|x| !x.is_finite()) {
            return Err(Error::BlowUp { step, time: step as f64 * dt });
        }
        if r >= threshold {
            return Ok(Some(step as f64 * dt));
        }
    }
    Ok(None)
}

/// Per-delta escape statistics and the fit of mean escape time against
/// `log(1/delta)`.
#[derive(Clone, Debug, PartialEq)]
pub struct EscapeSummary {
    pub deltas: Vec<f64>,
    pub mean: Vec<f64>,
    pub stderr: Vec<f64>,
    pub escaped: Vec<usize>,
    pub censored: Vec<usize>,
    pub blow_ups: usize,
    pub slope: f64,
    pub slope_stderr: f64,
    pub intercept: f64,
}

pub fn escape_times(cfg: &L96Config<f64>, p: &EscapeParams) -> Result<EscapeSummary> {
    let steps = step_count(p.horizon, cfg.dt())?;
    let m = p.paths;
    let outcomes: Vec<Result<Option<f64>>> = (0..p.deltas.len() * m)
        .into_par_iter()
        .map(|i| escape_path(cfg, p.deltas[i / m], p.threshold, steps, (i % m) as u64))
        .collect();
    let mut s = EscapeSummary {
        deltas: p.deltas.clone(),
        mean: vec![],
        stderr: vec![],
        escaped: vec![],
        censored: vec![],
        blow_ups: 0,
        slope: f64::NAN,
        slope_stderr: f64::NAN,
        intercept: f64::NAN,
    };
    for chunk in outcomes.chunks(m) {
        let mut times = Vec::new();
        let mut censored = 0;
        for o in chunk {
            match o {
                Ok(Some(t)) => times.push(*t),
                Ok(None) => censored += 1,
                Err(Error::BlowUp { .. }) => s.blow_ups += 1,
                Err(e) => return Err(Error::Domain(e.to_string())),
            }
        }
        s.mean.push(stats::mean(&times));
        s.stderr.push(if times.len() > 1 { stats::std_error(&times) } else { f64::NAN });
        s.escaped.push(times.len());
        s.censored.push(censored);
    }
    let (x, y): (Vec<f64>, Vec<f64>) = s
        .deltas
        .iter()
        .zip(&s.mean)
        .zip(&s.escaped)
        .filter(|(_, &n)| n > 1)
        .map(|((d, t), _)| ((p.threshold / d).ln(), *t))
        .unzip();
    if x.len() >= 2 {
        let (a, b, se) = stats::linear_fit(&x, &y);
        s.intercept = a;
        s.slope = b;
        s.slope_stderr = se;
    }
    Ok(s)
}

pub fn run_escape_time(cfg: &L96Config<f64>, p: &EscapeParams) -> Result<Report> {
    let s = escape_times(cfg, p)?;
    let mut r = Report::default();
    r.tasks = vec![task("escape path i: initial state substream 2i, noise substream 2i+1", cfg.seed(), STREAM_ESCAPE)];
    r.blow_ups = s.blow_ups;
    r.excluded = s.blow_ups;
    let mut t = Table::new("escape", &["delta", "mean_escape_time", "stderr", "escaped", "censored"]);
    for i in 0..s.deltas.len() {
        t.push(vec![f(s.deltas[i]), f(s.mean[i]), f(s.stderr[i]), s.escaped[i].to_string(), s.censored[i].to_string()]);
        let total = s.escaped[i] + s.censored[i];
        if 2 * s.censored[i] > total {
            r.notes.push(format!("delta = {}: {} of {} paths censored", s.deltas[i], s.censored[i], total));
        }
    }
    let censored: usize = s.censored.iter().sum();
    let total: usize = censored + s.escaped.iter().sum::<usize>();
    let frac = censored as f64 / total.max(1) as f64;
    let mut fit = Table::new("escape_fit", &["slope", "slope_stderr", "intercept", "lambda", "lambda_stderr", "predicted_slope", "censored_fraction"]);
    let (mut lam, mut lam_se) = (f64::NAN, f64::NAN);
    if let Some(tol) = p.slope_tolerance {
        let settings = EstimatorSettings { stream_id: STREAM_LYAP, ..EstimatorSettings::new(p.lambda_horizon) };
        let e = lyapunov_exponents(cfg, &settings)?.log_norm;
        r.tasks.push(task("exponent", cfg.seed(), STREAM_LYAP));
        lam = e.value;
        lam_se = e.stderr;
        let rel = (s.slope * lam - 1.0).abs();
        r.check(
            "escape slope vs 1/lambda",
            s.slope,
            Some(s.slope_stderr),
            format!("within {}% of 1/lambda = {}", tol * 100.0, 1.0 / lam),
            rel <= tol,
        );
    }
    if let Some(mc) = p.min_censored {
        r.check("censored fraction", frac, None, format!(">= {mc}"), frac >= mc);
    }
    fit.push(vec![f(s.slope), f(s.slope_stderr), f(s.intercept), f(lam), f(lam_se), f(1.0 / lam), f(frac)]);
    r.tables = vec![t, fit];
    Ok(r)
}

/// Histogram of `|Pi^perp u_t|` and coordinate moments along one long
/// path from a generic initial state.
#[derive(Clone, Debug, PartialEq)]
pub struct StationaryHist {
    /// `edges.len() == counts.len() + 1`; the first and last bins catch
    /// everything below and above the log-spaced range.
    pub edges: Vec<f64>,
    pub counts: Vec<usize>,
    pub samples: usize,
    pub radii: Vec<f64>,
    pub coord_mean: Vec<f64>,
    pub coord_var: Vec<f64>,
    /// Batch means of `u_j^2`, one vector per batch.
    pub batch_second_moments: Vec<Vec<f64>>,
    pub blow_up: Option<(u64, f64)>,
}

impl StationaryHist {
    pub fn mass(&self, radius: f64, side: Side) -> f64 {
        let n = self.radii.iter().filter(|&&x| match side {
            Side::Below => x < radius,
            Side::Above => x > radius,
        });
        n.count() as f64 / self.samples.max(1) as f64
    }

    /// Pooled ratio of forced-coordinate variance to `sigma_j^2 / 2` and its
    /// batch-means standard error.
    pub fn ou_variance_ratio(&self, cfg: &L96Config<f64>) -> (f64, f64) {
        let forced = cfg.indexing().forced().to_vec();
        let ratio = |m2: &[f64]| {
            forced.iter().map(|&j| m2[j] / (0.5 * cfg.sigma()[j] * cfg.sigma()[j])).sum::<f64>() / forced.len() as f64
        };
        let per_batch: Vec<f64> = self.batch_second_moments.iter().map(|b| ratio(b)).collect();
        (stats::mean(&per_batch), stats::std_error(&per_batch))
    }
}

pub fn stationary_hist(cfg: &L96Config<f64>, p: &HistParams) -> Result<StationaryHist> {
    let n = cfg.n();
    let steps = step_count(p.horizon, cfg.dt())?;
    let burn = step_count(p.burn_in.max(cfg.dt()), cfg.dt())?.min(steps);
    let every = p.sample_every.max(1) as u64;
    let expected = ((steps - burn) / every) as usize;
    let per_batch = (expected / p.batches.max(1)).max(1);
    let mut u = generic_state(n, &mut NoiseStream::new(cfg.seed(), STREAM_INIT)).into_vec();
    let mut noise = NoiseStream::new(cfg.seed(), STREAM_HIST);
    let mut integ = Integrator::new(cfg, Scheme::Tamed);
    let mut out = StationaryHist {
        edges: vec![],
        counts: vec![],
        samples: 0,
        radii: Vec::with_capacity(expected),
        coord_mean: vec![0.0; n],
        coord_var: vec![0.0; n],
        batch_second_moments: vec![],
        blow_up: None,
    };
    let mut s1 = vec![0.0; n];
    let mut s2 = vec![0.0; n];
    let mut b2 = vec![0.0; n];
    let mut in_batch = 0;
    for step in 1..=steps {
        integ.step(&mut u, &mut noise);
        if u.iter().any(|x| !x.is_finite()) {
            out.blow_up = Some((step, step as f64 * cfg.dt()));
            break;
        }
        if step <= burn || (step - burn) % every != 0 {
            continue;
        }
        out.radii.push(transverse_norm(&u));
        for j in 0..n {
            s1[j] += u[j];
            s2[j] += u[j] * u[j];
            b2[j] += u[j] * u[j];
        }
        in_batch += 1;
        if in_batch == per_batch && out.batch_second_moments.len() < p.batches {
            out.batch_second_moments.push(b2.iter().map(|x| x / per_batch as f64).collect());
            b2.iter_mut().for_each(|x| *x = 0.0);
            in_batch = 0;
        }
    }
    out.samples = out.radii.len();
    let m = out.samples.max(1) as f64;
    for j in 0..n {
        out.coord_mean[j] = s1[j] / m;
        out.coord_var[j] = s2[j] / m - out.coord_mean[j] * out.coord_mean[j];
    }
    let [lo, hi] = p.log10_range;
    let mut edges = vec![0.0];
    edges.extend((0..=p.bins).map(|i| 10f64.powf(lo + (hi - lo) * i as f64 / p.bins as f64)));
    edges.push(f64::INFINITY);
    let mut counts = vec![0usize; edges.len() - 1];
    for &x in &out.radii {
        let k = edges.partition_point(|&e| e <= x).saturating_sub(1).min(counts.len() - 1);
        counts[k] += 1;
    }
    out.edges = edges;
    out.counts = counts;
    Ok(out)
}

pub fn run_stationary_hist(cfg: &L96Config<f64>, p: &HistParams) -> Result<Report> {
    let h = stationary_hist(cfg, p)?;
    let mut r = Report::default();
    r.tasks = vec![task("initial state", cfg.seed(), STREAM_INIT), task("path", cfg.seed(), STREAM_HIST)];
    let mut t = Table::new("hist", &["lower", "upper", "count", "mass"]);
    for (i, &c) in h.counts.iter().enumerate() {
        t.push(vec![f(h.edges[i]), f(h.edges[i + 1]), c.to_string(), f(c as f64 / h.samples.max(1) as f64)]);
    }
    let mut mt = Table::new("moments", &["coord", "forced", "mean", "variance"]);
    for j in 0..cfg.n() {
        mt.push(vec![j.to_string(), (j % 3 == 0).to_string(), f(h.coord_mean[j]), f(h.coord_var[j])]);
    }
    if let Some((step, time)) = h.blow_up {
        r.blow_ups = 1;
        r.aborted = true;
        r.notes.push(format!("blow-up at step {step} (t = {time}); statistics cover the path up to that point"));
    }
    for c in &p.mass_checks {
        let m = h.mass(c.radius, c.side);
        let side = match c.side {
            Side::Below => "below",
            Side::Above => "above",
        };
        let se = (m * (1.0 - m) / h.samples.max(1) as f64).sqrt();
        r.check(&format!("mass {side} {}", c.radius), m, Some(se), format!(">= {}", c.min_mass), m >= c.min_mass);
    }
    if let Some(k) = p.ou_variance_k {
        let (v, se) = h.ou_variance_ratio(cfg);
        r.check("forced variance / (sigma^2/2)", v, Some(se), format!("within {k} SE of 1"), (v - 1.0).abs() <= k * se);
    }
    r.tables = vec![t, mt];
    Ok(r)
}

#[derive(Clone, Debug, PartialEq)]
pub struct SyncRow {
    pub eps: f64,
    pub pairs: usize,
    pub synchronized: usize,
    pub blow_ups: usize,
    pub median_sync_time: f64,
}

impl SyncRow {
    /// Fraction of completed pairs that synchronized.
    pub fn fraction(&self) -> f64 {
        self.synchronized as f64 / (self.pairs - self.blow_ups).max(1) as f64
    }
}

/// Coupled pairs from independent generic initial states; pair `i` uses
/// the same initial states and noise at every damping value.
pub fn sync_sweep(template: &L96Config<f64>, p: &SyncParams) -> Result<Vec<SyncRow>> {
    let init = NoiseStream::new(template.seed(), STREAM_INIT);
    let cfgs = p.eps_grid.iter().map(|&e| template.with_epsilon(e)).collect::<Result<Vec<_>>>()?;
    let m = p.pairs;
    let outcomes: Vec<Result<Option<f64>>> = (0..cfgs.len() * m)
        .into_par_iter()
        .map(|i| {
            let pair = (i % m) as u64;
            let mut ic = init.substream(pair);
            let u0 = generic_state(template.n(), &mut ic);
            let v0 = generic_state(template.n(), &mut ic);
            let run = coupled_pair(&u0, &v0, &cfgs[i / m], p.horizon, p.sync_threshold, p.sample_every, Scheme::Tamed, mix(STREAM_SYNC, pair));
            run.map(|c| c.sync_time)
        })
        .collect();
    p.eps_grid
        .iter()
        .zip(outcomes.chunks(m))
        .map(|(&eps, chunk)| {
            let mut times = Vec::new();
            let mut blow_ups = 0;
            for o in chunk {
                match o {
                    Ok(Some(t)) => times.push(*t),
                    Ok(None) => {}
                    Err(Error::BlowUp { .. }) => blow_ups += 1,
                    Err(e) => return Err(Error::Domain(e.to_string())),
                }
            }
            Ok(SyncRow { eps, pairs: m, synchronized: times.len(), blow_ups, median_sync_time: stats::median(&times) })
        })
        .collect()
}

pub fn run_sync_sweep(template: &L96Config<f64>, p: &SyncParams) -> Result<Report> {
    let rows = sync_sweep(template, p)?;
    let mut r = Report::default();
    r.tasks = vec![
        task("pair i initial states: substream i", template.seed(), STREAM_INIT),
        task("pair i noise: stream mix(5, i)", template.seed(), STREAM_SYNC),
    ];
    let mut t = Table::new("sync", &["eps", "pairs", "synchronized", "fraction", "median_sync_time", "blow_ups"]);
    for row in &rows {
        r.blow_ups += row.blow_ups;
        t.push(vec![
            f(row.eps),
            row.pairs.to_string(),
            row.synchronized.to_string(),
            f(row.fraction()),
            f(row.median_sync_time),
            row.blow_ups.to_string(),
        ]);
    }
    r.excluded = r.blow_ups;
    let se = |q: f64, n: usize| (q * (1.0 - q) / n.max(1) as f64).sqrt();
    let by = |pick: fn(f64, f64) -> bool| rows.iter().reduce(|a, b| if pick(b.eps, a.eps) { b } else { a });
    if let (Some(min), Some(row)) = (p.min_fraction_stable, by(|x, y| x > y)) {
        let q = row.fraction();
        r.check(&format!("sync fraction at eps={}", row.eps), q, Some(se(q, row.pairs)), format!(">= {min}"), q >= min);
    }
    if let (Some(max), Some(row)) = (p.max_fraction_unstable, by(|x, y| x < y)) {
        let q = row.fraction();
        r.check(&format!("sync fraction at eps={}", row.eps), q, Some(se(q, row.pairs)), format!("<= {max}"), q <= max);
    }
    r.tables = vec![t];
    Ok(r)
}

pub fn run_moment_curve(cfg: &L96Config<f64>, p: &MomentParams) -> Result<Report> {
    let settings = MomentSettings { horizon: p.horizon, paths: p.paths, resamples: p.resamples, stream_id: STREAM_MOMENT };
    let est = moment_curve(cfg, &p.ps, &settings)?;
    let mut r = Report::default();
    r.tasks = vec![task("moment path i: substream i", cfg.seed(), STREAM_MOMENT)];
    let mut t = Table::new("moment", &["p", "Lambda", "stderr"]);
    let mut d = Table::new("moment_detail", &["p", "Lambda", "stderr", "effective_sample_size", "reliable"]);
    for e in &est {
        t.push(vec![f(e.p), f(e.value), f(e.stderr)]);
        d.push(vec![f(e.p), f(e.value), f(e.stderr), f(e.effective_sample_size), e.reliable.to_string()]);
        if !e.reliable {
            r.notes.push(format!("p = {}: effective sample size {} below paths/100", e.p, e.effective_sample_size));
        }
        if e.p == 0.0 {
            r.check("Lambda(0)", e.value, None, "= 0".into(), e.value == 0.0);
        }
    }
    r.tables = vec![t, d];
    Ok(r)
}

pub fn run_cap_verify(cfg: &L96Config<f64>, p: &CapParams) -> Result<Report> {
    let (rep, closure) = cap_verify(cfg.n(), p.depth_cap, p.generators)?;
    let mut r = Report::default();
    let set = match p.generators {
        GeneratorSet::Local => "local",
        GeneratorSet::All => "all",
    };
    let mut t = Table::new("cap", &["N", "generators", "dim", "expected", "generated", "depth_used", "stable"]);
    t.push(vec![
        rep.n.to_string(),
        set.into(),
        rep.dim.to_string(),
        rep.expected.to_string(),
        rep.generated.to_string(),
        rep.depth_used.to_string(),
        rep.stable.to_string(),
    ]);
    let mut s = Table::new("cap_seeds", &["i", "j", "contained"]);
    for &(i, j, c) in &rep.seeds {
        s.push(vec![i.to_string(), j.to_string(), c.to_string()]);
    }
    match p.generators {
        GeneratorSet::All => {
            r.check("closure dimension", rep.dim as f64, None, format!("= {}", rep.expected), rep.generated);
        }
        GeneratorSet::Local => {
            for &(i, j, c) in &rep.seeds {
                r.check(&format!("E_({i},{j}) in closure"), c as u8 as f64, None, "contained".into(), c);
            }
        }
    }
    r.notes.push(format!("closure time {:.3} s", rep.elapsed));
    r.payload = Some(serde_json::to_value(&rep)?);
    if p.emit_basis {
        let mut buf = Vec::new();
        write_basis_csv(closure.tracker(), &mut buf)?;
        r.files.push(("basis.csv".into(), String::from_utf8(buf).expect("ascii")));
    }
    r.tables = vec![t, s];
    Ok(r)
}

pub fn run_super_lyap(cfg: &L96Config<f64>, p: &SuperLyapParams) -> Result<Report> {
    let d: Vec<f64> = NoiseStream::new(cfg.seed(), STREAM_INIT).unit_vector(cfg.n());
    let grid: Vec<StateVector<f64>> = p.radii.iter().map(|&rad| StateVector::from_vec(d.iter().map(|x| x * rad).collect())).collect();
    let rep = super_lyapunov_probe(cfg, p.eta, &grid, p.horizon, p.paths, STREAM_SUPER)?;
    let mut r = Report::default();
    r.tasks = vec![task("direction", cfg.seed(), STREAM_INIT), task("grid point g, path i", cfg.seed(), STREAM_SUPER)];
    let mut t = Table::new("super_lyap", &["radius", "log_sup_ratio", "sup_ratio", "log_terminal_mean", "accepted", "rejected"]);
    for (rad, pt) in p.radii.iter().zip(&rep.points) {
        r.excluded += pt.rejected_paths;
        t.push(vec![
            f(*rad),
            f(pt.log_sup_ratio),
            f(pt.sup_ratio),
            f(pt.log_terminal_mean),
            pt.accepted_paths.to_string(),
            pt.rejected_paths.to_string(),
        ]);
    }
    r.blow_ups = r.excluded;
    r.notes.push(format!("eta = {}, eta_* = {}, max sup ratio {}", rep.eta, rep.eta_star, rep.max_ratio));
    r.tables = vec![t];
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(eps: f64) -> L96Config<f64> {
        L96Config::degenerate(9, eps, 1.0, 1e-3, 11).unwrap()
    }

    #[test]
    fn escape_at_threshold_is_immediate() {
        let p = EscapeParams {
            deltas: vec![1.0, 0.5],
            threshold: 1.0,
            paths: 4,
            horizon: 0.01,
            lambda_horizon: 1.0,
            slope_tolerance: None,
            min_censored: None,
        };
        let s = escape_times(&cfg(5.0), &p).unwrap();
        assert_eq!(s.mean[0], 0.0);
        assert_eq!(s.escaped[0], 4);
        assert_eq!(s.censored[1], 4);
    }

    #[test]
    fn histogram_counts_every_sample() {
        let p = HistParams {
            horizon: 5.0,
            burn_in: 1.0,
            bins: 7,
            sample_every: 10,
            log10_range: [-6.0, 1.0],
            mass_checks: vec![],
            ou_variance_k: None,
            batches: 4,
        };
        let h = stationary_hist(&cfg(1.0), &p).unwrap();
        assert_eq!(h.samples, 400);
        assert_eq!(h.counts.iter().sum::<usize>(), 400);
        assert_eq!(h.edges.len(), h.counts.len() + 1);
        assert_eq!(h.batch_second_moments.len(), 4);
    }

    #[test]
    fn sync_table_is_deterministic() {
        let p = SyncParams {
            eps_grid: vec![2.0, 0.5],
            pairs: 3,
            horizon: 2.0,
            sync_threshold: 1e-6,
            sample_every: 10,
            min_fraction_stable: None,
            max_fraction_unstable: None,
        };
        let a = run_sync_sweep(&cfg(1.0), &p).unwrap();
        let b = run_sync_sweep(&cfg(1.0), &p).unwrap();
        assert_eq!(a.tables, b.tables);
    }
}
