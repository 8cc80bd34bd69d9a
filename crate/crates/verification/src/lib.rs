//! Acceptance checks for the toolkit, one function per criterion.
//!
//! Every check returns a [`Verdict`]; the `acceptance` test target runs
//! them in order and prints one `PASS`/`FAIL` line each. Tolerances are
//! fixed here and nowhere else.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::time::Instant;

use l96::cocycle::{
    determinant_rate, lyapunov_exponents, unstable_block, EstimatorSettings, MomentEstimate, MomentSettings, ScanRow,
};
use l96::experiments::{
    default_spec, emit_report, escape_times, run, scan_replicates, stationary_hist, sync_sweep, CapParams,
    EscapeParams, ExperimentKind, ExperimentSpec, HistParams, LyapunovParams, MassCheck, MomentParams, ScanParams,
    Side, SimulateParams, SuperLyapParams, SyncParams,
};
use l96::lie::{
    all_generators, cap_verify, closure, generator, hormander_rank_at, shift_conjugate, shift_conjugate_inverse,
    spanning_rank_exact, standard_generators_dim, verify_sl_generation, GeneratorSet, MAX_DEPTH,
};
use l96::model::{bilinear_b, jacobian_db, m_k_matrix, project_invariant, L96Config, StateVector, SubspaceIndexing};
use l96::noise::NoiseStream;
use l96::sde::Scheme;
use l96::{IntMatrix, Rational, Ring};

/// Outcome of one criterion.
#[derive(Clone, Debug)]
pub struct Verdict {
    pub id: u32,
    pub title: &'static str,
    pub pass: bool,
    pub details: Vec<String>,
}

impl Verdict {
    fn new(id: u32, title: &'static str) -> Self {
        Self { id, title, pass: true, details: Vec::new() }
    }

    /// Records a sub-check; any failing sub-check fails the verdict.
    fn expect(&mut self, ok: bool, detail: String) {
        self.pass &= ok;
        self.details.push(format!("{} {detail}", if ok { "ok  " } else { "FAIL" }));
    }

    fn note(&mut self, detail: String) {
        self.details.push(format!("info {detail}"));
    }

    fn error(&mut self, what: &str, e: l96::Error) {
        self.expect(false, format!("{what}: error: {e}"));
    }

    pub fn line(&self) -> String {
        format!("{} {:>2} {}", if self.pass { "PASS" } else { "FAIL" }, self.id, self.title)
    }
}

/// Unwraps a library result or fails the verdict and returns it.
macro_rules! attempt {
    ($v:expr, $what:expr, $e:expr) => {
        match $e {
            Ok(x) => x,
            Err(err) => {
                $v.error($what, err);
                return $v;
            }
        }
    };
}

const CAP_RUNTIME_LIMIT: f64 = 300.0;
const SCAN_RUNTIME_LIMIT: f64 = 600.0;
const STRUCTURAL_SAMPLES: usize = 1000;
const DETERMINANT_STEPS: f64 = 1e5;
const DETERMINANT_REL_TOL: f64 = 1e-10;
const TRACE_TOL: f64 = 1e-12;
const BLOCK_SAMPLES: usize = 100;
const COHERENCE_K: f64 = 2.0;
const CONTROL_TOL: f64 = 1e-10;
const MOMENT_SLOPE_K: f64 = 3.0;
const CONVEXITY_K: f64 = 2.0;
const RANK_POINTS: usize = 50;
const SYNC_MIN: f64 = 0.95;
const SYNC_MAX: f64 = 0.05;
const ESCAPE_SLOPE_TOL: f64 = 0.2;
const ESCAPE_CENSORED_MIN: f64 = 0.9;

fn seeded(stream: u64) -> NoiseStream {
    NoiseStream::new(20_240_601, stream)
}

fn int_in(rng: &mut NoiseStream, lo: i64, hi: i64) -> i64 {
    lo + rng.index_below((hi - lo + 1) as usize) as i64
}

fn int_state(rng: &mut NoiseStream, n: usize) -> StateVector<i64> {
    StateVector::from_vec((0..n).map(|_| int_in(rng, -1000, 1000)).collect())
}

/// Closure of `M_3, M_6, M_9` to depth 5 contains `E_32, E_43, E_54`
/// (N = 15), and the closure of all generators has dimension 99; both
/// within five minutes.
pub fn cap_reproduction() -> Verdict {
    let mut v = Verdict::new(1, "closure membership and dimension at N = 15");
    let start = Instant::now();
    let (local, _) = attempt!(v, "local closure", cap_verify(15, 5, GeneratorSet::Local));
    for &(i, j, c) in &local.seeds {
        v.expect(c, format!("E_({i},{j}) in closure of M_3, M_6, M_9 at depth 5 (dim {})", local.dim));
    }
    let (full, _) = attempt!(v, "full closure", cap_verify(15, MAX_DEPTH, GeneratorSet::All));
    v.expect(full.dim == 99, format!("closure of all generators: dim {} (expected 99), stable {}", full.dim, full.stable));
    let secs = start.elapsed().as_secs_f64();
    v.expect(secs <= CAP_RUNTIME_LIMIT, format!("runtime {secs:.2} s (limit {CAP_RUNTIME_LIMIT} s)"));
    v
}

/// `verify_sl_generation` over N = 3, 6, 9, 12, 15.
pub fn generation_table() -> Verdict {
    let mut v = Verdict::new(2, "generation table");
    for (n, want_dim, want_gen) in [(3, None, false), (6, None, false), (9, Some(35), true), (12, Some(63), true), (15, Some(99), true)] {
        let (r, _) = attempt!(v, &format!("N = {n}"), verify_sl_generation::<Rational>(n));
        let dim_ok = want_dim.is_none_or(|d| r.dim == d);
        v.expect(
            dim_ok && r.generated == want_gen,
            format!("N = {n}: dim {} of {}, generated {} (expected {want_gen}), depth {}", r.dim, r.expected, r.generated, r.depth_used),
        );
    }
    v
}

/// `M_{k+3} = P M_k P^-1` exactly, and the full closure is closed under
/// conjugation.
pub fn shift_invariance() -> Verdict {
    let mut v = Verdict::new(3, "shift invariance");
    for n in [9, 12, 15] {
        let k = n / 3;
        let mut ok = true;
        for j in 0..k {
            let m: IntMatrix = attempt!(v, "generator", generator(3 * j, n));
            let next: IntMatrix = attempt!(v, "generator", generator(3 * j + 3, n));
            ok &= attempt!(v, "shift", shift_conjugate(&m, k)) == next;
        }
        v.expect(ok, format!("N = {n}: M_(k+3) = P M_k P^-1 for all {k} forced k"));
        let c = attempt!(v, "closure", closure(&attempt!(v, "generators", all_generators::<Rational>(n)), MAX_DEPTH));
        let basis = attempt!(v, "basis", c.tracker().basis_matrices());
        let mut closed = true;
        for b in &basis {
            closed &= attempt!(v, "membership", c.tracker().contains_matrix(&attempt!(v, "shift", shift_conjugate(b, k))));
            closed &= attempt!(v, "membership", c.tracker().contains_matrix(&attempt!(v, "shift", shift_conjugate_inverse(b, k))));
        }
        v.expect(closed, format!("N = {n}: closure (dim {}) invariant under P and P^-1", c.dim()));
    }
    v
}

/// The standard generating set generates `sl(n)` for n = 2..10.
pub fn standard_generators() -> Verdict {
    let mut v = Verdict::new(4, "standard generating set");
    for n in 2..=10 {
        let d = attempt!(v, &format!("n = {n}"), standard_generators_dim(n));
        v.expect(d == n * n - 1, format!("n = {n}: dim {d} (expected {})", n * n - 1));
    }
    v
}

/// Exact identities of the bilinear form over random integer states.
pub fn structural_identities() -> Verdict {
    let mut v = Verdict::new(5, "structural identities");
    let mut rng = seeded(5);
    for n in [9, 15] {
        let idx = attempt!(v, "indexing", SubspaceIndexing::new(n));
        let (mut energy, mut pi_db, mut trace) = (0, 0, 0);
        for _ in 0..STRUCTURAL_SAMPLES {
            let u = int_state(&mut rng, n);
            let w = int_state(&mut rng, n);
            if attempt!(v, "B", bilinear_b(&u, &u)).dot(&u) != 0 {
                energy += 1;
            }
            let y = project_invariant(&u);
            let out = StateVector::from_vec(attempt!(v, "DB", jacobian_db(&y).mul_vec(w.as_slice())));
            if !project_invariant(&out).is_zero() {
                pi_db += 1;
            }
            if jacobian_db(&u).trace() != 0 {
                trace += 1;
            }
        }
        v.expect(energy == 0, format!("N = {n}: <B(u,u),u> = 0 on {STRUCTURAL_SAMPLES} samples ({energy} violations)"));
        v.expect(pi_db == 0, format!("N = {n}: Pi_I DB(y) w = 0 on {STRUCTURAL_SAMPLES} samples ({pi_db} violations)"));
        v.expect(trace == 0, format!("N = {n}: trace DB(u) = 0 on {STRUCTURAL_SAMPLES} samples ({trace} violations)"));
        let mut basis_ok = true;
        for k in 0..n {
            let e = StateVector::<i64>::basis(n, k as isize);
            basis_ok &= attempt!(v, "B", bilinear_b(&e, &e)).is_zero();
        }
        v.expect(basis_ok, format!("N = {n}: B(e_k, e_k) = 0 for all {n} k"));
        let mut tr_ok = true;
        for &k in idx.forced() {
            let m: IntMatrix = attempt!(v, "M_k", m_k_matrix(k, n));
            tr_ok &= m.trace() == 0;
        }
        v.expect(tr_ok, format!("N = {n}: trace M_k = 0 for all forced k"));
    }
    v
}

/// `(1/T) log det` of the transverse cocycle equals `-2 K eps`.
pub fn determinant_rate_check() -> Verdict {
    let mut v = Verdict::new(6, "determinant rate");
    let dt = 1e-3;
    let cfg = attempt!(v, "config", L96Config::degenerate(9, 0.05, 1.0, dt, 1));
    let r = attempt!(v, "determinant rate", determinant_rate(&cfg, DETERMINANT_STEPS * dt, 6));
    let rel = (r.rate - r.expected).abs() / r.expected.abs();
    v.expect(r.steps as f64 == DETERMINANT_STEPS, format!("{} steps", r.steps));
    v.expect(rel <= DETERMINANT_REL_TOL, format!("rate {:e} vs {:e}: relative error {rel:e} (limit {DETERMINANT_REL_TOL:e})", r.rate, r.expected));
    v.expect(r.max_abs_trace <= TRACE_TOL, format!("max |trace G(y_t)| = {:e} (limit {TRACE_TOL:e})", r.max_abs_trace));
    v
}

fn random_rational(rng: &mut NoiseStream) -> (i64, i64) {
    let mut num = 0;
    while num == 0 {
        num = int_in(rng, -12, 12);
    }
    (num, int_in(rng, 1, 9))
}

/// Characteristic polynomial of the 4x4 block and the instability flag,
/// cross-checked against floating-point eigenvalues.
pub fn eigenvalue_certificate() -> Verdict {
    let mut v = Verdict::new(7, "eigenvalue certificate for the 4x4 block");
    let mut rng = seeded(7);
    let (mut factored, mut flag, mut numeric) = (0, 0, 0);
    for _ in 0..BLOCK_SAMPLES {
        let (an, ad) = random_rational(&mut rng);
        let (bn, bd) = random_rational(&mut rng);
        let a = Rational::from_i64(an) / Rational::from_i64(ad);
        let b = Rational::from_i64(bn) / Rational::from_i64(bd);
        let blk = unstable_block(&a, &b);
        factored += blk.factored_check as usize;
        let disc = &a * (&b - &a);
        flag += (blk.unstable == (disc > Rational::from_i64(0))) as usize;
        let (af, bf) = (an as f64 / ad as f64, bn as f64 / bd as f64);
        let m = nalgebra::DMatrix::from_row_slice(4, 4, &[
            0.0, af, 0.0, 0.0,
            bf - af, 0.0, 0.0, 0.0,
            0.0, -bf, 0.0, bf,
            0.0, 0.0, -bf, 0.0,
        ]);
        let top = m.complex_eigenvalues().iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max);
        numeric += (blk.unstable == (top > 1e-6)) as usize;
    }
    v.expect(factored == BLOCK_SAMPLES, format!("charpoly = (b^2+t^2)(a^2-ab+t^2) for {factored}/{BLOCK_SAMPLES} pairs"));
    v.expect(flag == BLOCK_SAMPLES, format!("flag = [a(b-a) > 0] for {flag}/{BLOCK_SAMPLES} pairs"));
    v.expect(numeric == BLOCK_SAMPLES, format!("flag matches numeric eigenvalues for {numeric}/{BLOCK_SAMPLES} pairs"));
    v
}

/// The default scan: one row set per replicate seed.
#[derive(Clone, Debug)]
pub struct Scan {
    pub params: ScanParams,
    pub replicates: Vec<(u64, Vec<ScanRow>)>,
    pub seconds: f64,
}

impl Scan {
    pub fn compute() -> l96::Result<Self> {
        let spec = default_spec(ExperimentKind::ScanEpsilon);
        let params = spec.scan.clone().expect("scan table");
        let start = Instant::now();
        let replicates = scan_replicates(&spec.config, &params)?;
        Ok(Self { params, replicates, seconds: start.elapsed().as_secs_f64() })
    }

    /// Rows of the first replicate (the configured seed).
    pub fn primary(&self) -> &[ScanRow] {
        &self.replicates[0].1
    }

    pub fn at(&self, eps: f64) -> Option<&ScanRow> {
        self.primary().iter().find(|r| r.eps == eps)
    }

    fn tcrit(&self) -> f64 {
        l96::stats::t_critical(self.params.level, self.params.batches - 1)
    }
}

/// Log-norm and Furstenberg-Khasminskii estimates agree for every
/// (eps, seed) in the default scan; with the noise off the exponent is
/// exactly `-eps`.
pub fn estimator_coherence(scan: &l96::Result<Scan>) -> Verdict {
    let mut v = Verdict::new(8, "estimator coherence");
    let scan = attempt!(v, "scan", scan.as_ref().map_err(|e| l96::Error::Domain(e.to_string())));
    for (seed, rows) in &scan.replicates {
        for r in rows {
            if let Some(e) = &r.error {
                v.expect(false, format!("eps = {}, seed = {seed}: {e}", r.eps));
                continue;
            }
            let se = r.stderr.hypot(r.fk_stderr);
            let d = r.lambda - r.fk_lambda;
            v.expect(
                d.abs() <= COHERENCE_K * se,
                format!("eps = {}, seed = {seed}: {:.6} vs {:.6}, |diff| {:.2e} <= {COHERENCE_K} x {:.2e}", r.eps, r.lambda, r.fk_lambda, d.abs(), se),
            );
        }
    }
    for &eps in &scan.params.eps_grid {
        let cfg = attempt!(v, "config", L96Config::noise_off(9, eps, 1e-3, 1));
        let e = attempt!(v, "control", lyapunov_exponents(&cfg, &EstimatorSettings::new(200.0)));
        let err = (e.log_norm.value + eps).abs().max((e.fk.value + eps).abs());
        v.expect(err <= CONTROL_TOL, format!("sigma = 0, eps = {eps}: both estimators -eps within {err:.1e}"));
    }
    v
}

/// Sign of the exponent at both ends of the grid and monotone `lambda/eps`.
pub fn exponent_sign_structure(scan: &l96::Result<Scan>) -> Verdict {
    let mut v = Verdict::new(9, "exponent sign structure");
    let scan = attempt!(v, "scan", scan.as_ref().map_err(|e| l96::Error::Domain(e.to_string())));
    let t = scan.tcrit();
    let rows = scan.primary();
    for r in rows {
        v.note(format!("eps = {}: lambda = {:.5} +/- {:.5}, lambda/eps = {:.4}", r.eps, r.lambda, r.stderr, r.lambda_over_eps));
    }
    let (first, last) = (&rows[0], &rows[rows.len() - 1]);
    v.expect(first.lambda + t * first.stderr < 0.0, format!("eps = {}: 95% CI below 0", first.eps));
    v.expect(last.lambda - t * last.stderr > 0.0, format!("eps = {}: 95% CI above 0", last.eps));
    for w in rows.windows(2) {
        let (a, b) = (&w[0], &w[1]);
        let hw = t * (a.stderr / a.eps).hypot(b.stderr / b.eps);
        v.expect(
            b.lambda_over_eps - a.lambda_over_eps > -hw,
            format!("lambda/eps from eps = {} to {}: {:.4} -> {:.4} (CI half-width {:.4})", a.eps, b.eps, a.lambda_over_eps, b.lambda_over_eps, hw),
        );
    }
    let per_run = scan.seconds / scan.replicates.len() as f64;
    v.expect(per_run <= SCAN_RUNTIME_LIMIT, format!("scan runtime {per_run:.1} s per seed (limit {SCAN_RUNTIME_LIMIT} s)"));
    v
}

/// `Lambda(0) = 0`, slope at 0 against the scan exponent, midpoint
/// convexity.
pub fn moment_exponent(scan: &l96::Result<Scan>) -> Verdict {
    let mut v = Verdict::new(10, "moment exponent");
    let scan = attempt!(v, "scan", scan.as_ref().map_err(|e| l96::Error::Domain(e.to_string())));
    let spec = default_spec(ExperimentKind::MomentCurve);
    let p = spec.moment.clone().expect("moment table");
    let settings = MomentSettings { horizon: p.horizon, paths: p.paths, resamples: p.resamples, stream_id: 6 };
    let curve = attempt!(v, "moment curve", l96::cocycle::moment_curve(&spec.config, &p.ps, &settings));
    let at = |q: f64| curve.iter().find(|e| e.p == q);
    let (Some(z), Some(a), Some(m), Some(b)) = (at(0.0), at(0.02), at(0.05), at(0.08)) else {
        v.expect(false, "curve lacks p = 0, 0.02, 0.05, 0.08".into());
        return v;
    };
    for e in &curve {
        v.note(format!("p = {}: Lambda = {:.7} +/- {:.1e}, ESS {:.0}", e.p, e.value, e.stderr, e.effective_sample_size));
    }
    v.expect(z.value == 0.0, format!("Lambda(0) = {}", z.value));
    let eps = spec.config.epsilon();
    let Some(lam) = scan.at(eps) else {
        v.expect(false, format!("scan has no row at eps = {eps}"));
        return v;
    };
    let slope = m.value / m.p;
    let se = (m.stderr / m.p).hypot(lam.stderr);
    v.expect(
        (slope - lam.lambda).abs() <= MOMENT_SLOPE_K * se,
        format!("Lambda(0.05)/0.05 = {slope:.5} vs lambda = {:.5}: |diff| {:.5} <= {MOMENT_SLOPE_K} x {se:.5}", lam.lambda, (slope - lam.lambda).abs()),
    );
    let (gap, se) = midpoint_gap(a, m, b);
    v.expect(
        gap >= -CONVEXITY_K * se,
        format!("(Lambda(0.02)+Lambda(0.08))/2 - Lambda(0.05) = {gap:.3e} >= -{CONVEXITY_K} x {se:.3e} ({:.2} SE)", gap / se),
    );
    v
}

/// Convexity gap at the midpoint and its standard error, treating the
/// three estimates as independent.
pub fn midpoint_gap(a: &MomentEstimate, m: &MomentEstimate, b: &MomentEstimate) -> (f64, f64) {
    let gap = 0.5 * (a.value + b.value) - m.value;
    let se = (m.stderr * m.stderr + 0.25 * (a.stderr * a.stderr + b.stderr * b.stderr)).sqrt();
    (gap, se)
}

fn rational_state(rng: &mut NoiseStream, n: usize, forced_only: bool) -> StateVector<Rational> {
    loop {
        let u: Vec<Rational> = (0..n)
            .map(|j| {
                if forced_only && j % 3 != 0 {
                    return Rational::from_i64(0);
                }
                Rational::from_i64(int_in(rng, -9, 9)) / Rational::from_i64(int_in(rng, 1, 5))
            })
            .collect();
        let transverse_zero = u.iter().enumerate().all(|(j, x)| j % 3 == 0 || *x == Rational::from_i64(0));
        if forced_only || !transverse_zero {
            return StateVector::from_vec(u);
        }
    }
}

/// Spanning rank with the closure basis: N off the base subspace, K on it.
pub fn hormander_rank() -> Verdict {
    let mut v = Verdict::new(11, "bracket-spanning rank");
    let n = 9;
    let k = n / 3;
    let c = attempt!(v, "closure", closure(&attempt!(v, "generators", all_generators::<Rational>(n)), MAX_DEPTH));
    let basis = attempt!(v, "basis", c.tracker().basis_matrices());
    let mut rng = seeded(11);
    let mut tally: BTreeMap<(bool, usize), usize> = BTreeMap::new();
    let mut outcome: Option<l96::Error> = None;
    let (mut off_ok, mut on_ok) = (0, 0);
    for on in [false, true] {
        for _ in 0..RANK_POINTS {
            let u = rational_state(&mut rng, n, on);
            let r = attempt!(v, "rank", spanning_rank_exact(&u, &basis));
            *tally.entry((on, r)).or_default() += 1;
            match hormander_rank_at(&u, &basis) {
                Ok(h) if on => on_ok += (h.rank == k && !h.full_rank) as usize,
                Ok(h) => off_ok += (h.rank == n && h.full_rank) as usize,
                Err(e) => outcome = Some(e),
            }
        }
    }
    for ((on, r), count) in &tally {
        let place = if *on { "on H_I" } else { "off H_I" };
        v.note(format!("spanning family of the closure basis (dim {}): rank {r} at {count} points {place}", c.dim()));
    }
    if let Some(e) = outcome {
        v.expect(false, format!("hormander_rank_at: {e}"));
    } else {
        v.expect(off_ok == RANK_POINTS, format!("rank {n} at {off_ok}/{RANK_POINTS} points off H_I"));
        v.expect(on_ok == RANK_POINTS, format!("rank {k} at {on_ok}/{RANK_POINTS} points on H_I"));
    }
    v
}

/// Synchronization fractions, stationary histogram masses, forced
/// variance and escape-time slope.
pub fn phenomenology(scan: &l96::Result<Scan>) -> Verdict {
    let mut v = Verdict::new(12, "phenomenology");
    let spec = default_spec(ExperimentKind::SyncTest);
    let p = spec.sync.clone().expect("sync table");
    let rows = attempt!(v, "sync", sync_sweep(&spec.config, &p));
    for r in &rows {
        if r.eps == 5.0 {
            v.expect(r.fraction() >= SYNC_MIN, format!("sync fraction {} at eps = 5 (>= {SYNC_MIN})", r.fraction()));
        }
        if r.eps == 0.05 {
            v.expect(r.fraction() <= SYNC_MAX, format!("sync fraction {} at eps = 0.05 (<= {SYNC_MAX})", r.fraction()));
        }
    }

    let hist = default_spec(ExperimentKind::StationaryHist);
    let hp = hist.hist.clone().expect("hist table");
    let h = attempt!(v, "histogram at eps = 0.05", stationary_hist(&hist.config, &hp));
    let m = h.mass(0.1, Side::Above);
    v.expect(m > 0.9, format!("eps = 0.05: mass of |Pi^perp u| > 0.1 is {m:.4} (> 0.9)"));
    let stable = attempt!(v, "config", hist.config.with_epsilon(5.0));
    let h = attempt!(v, "histogram at eps = 5", stationary_hist(&stable, &hp));
    let m = h.mass(0.01, Side::Below);
    v.expect(m > 0.99, format!("eps = 5: mass of |Pi^perp u| < 0.01 is {m:.4} (> 0.99)"));
    let (ratio, se) = h.ou_variance_ratio(&stable);
    v.expect((ratio - 1.0).abs() <= 3.0 * se, format!("eps = 5: forced variance / (sigma^2/2) = {ratio:.4} +/- {se:.4} (within 3 SE of 1)"));

    let esc = default_spec(ExperimentKind::EscapeTime);
    let ep = esc.escape.clone().expect("escape table");
    let s = attempt!(v, "escape", escape_times(&esc.config, &ep));
    let lam = scan.as_ref().ok().and_then(|sc| sc.at(esc.config.epsilon())).map(|r| r.lambda);
    match lam {
        Some(lam) => {
            let rel = (s.slope * lam - 1.0).abs();
            v.expect(rel <= ESCAPE_SLOPE_TOL, format!("escape slope {:.3} vs 1/lambda = {:.3}: relative deviation {rel:.3} (<= {ESCAPE_SLOPE_TOL})", s.slope, 1.0 / lam));
        }
        None => v.expect(false, "no scan exponent at eps = 0.05".into()),
    }
    let stable = attempt!(v, "config", esc.config.with_epsilon(5.0));
    let sp = EscapeParams { deltas: vec![1e-2, 1e-4], paths: 50, horizon: 200.0, slope_tolerance: None, min_censored: None, ..ep };
    let s = attempt!(v, "escape at eps = 5", escape_times(&stable, &sp));
    let censored: usize = s.censored.iter().sum();
    let frac = censored as f64 / (censored + s.escaped.iter().sum::<usize>()) as f64;
    v.expect(frac >= ESCAPE_CENSORED_MIN, format!("eps = 5: censored fraction {frac:.3} at horizon 200 (>= {ESCAPE_CENSORED_MIN})"));
    v
}

/// Short runs of every experiment kind.
pub fn small_spec(kind: ExperimentKind) -> ExperimentSpec {
    let mut s = default_spec(kind);
    match kind {
        ExperimentKind::Simulate => s.simulate = Some(SimulateParams { horizon: 2.0, thin: 50, scheme: Scheme::Tamed }),
        ExperimentKind::Lyapunov => s.lyapunov = Some(LyapunovParams { horizon: 30.0, burn_in: None, batches: 20 }),
        ExperimentKind::ScanEpsilon => {
            s.scan = Some(ScanParams { eps_grid: vec![2.0, 1.0, 0.5, 0.1], horizon: 20.0, replicates: 2, ..s.scan.unwrap() })
        }
        ExperimentKind::EscapeTime => {
            s.escape = Some(EscapeParams { deltas: vec![1e-2, 1e-4], paths: 16, horizon: 100.0, lambda_horizon: 20.0, ..s.escape.unwrap() })
        }
        ExperimentKind::StationaryHist => {
            s.hist = Some(HistParams {
                horizon: 20.0,
                burn_in: 2.0,
                mass_checks: vec![MassCheck { radius: 0.1, side: Side::Above, min_mass: 0.5 }],
                ou_variance_k: Some(3.0),
                ..s.hist.unwrap()
            })
        }
        ExperimentKind::SyncTest => s.sync = Some(SyncParams { pairs: 4, horizon: 10.0, ..s.sync.unwrap() }),
        ExperimentKind::MomentCurve => {
            s.moment = Some(MomentParams { ps: vec![0.0, 0.05], horizon: 2.0, paths: 1000, resamples: 200 })
        }
        ExperimentKind::CapVerify => {
            s.config = L96Config::degenerate(9, 1.0, 1.0, 1e-3, 1).expect("valid");
            s.cap = Some(CapParams { depth_cap: 4, generators: GeneratorSet::All, emit_basis: true })
        }
        ExperimentKind::SuperLyap => {
            s.super_lyap = Some(SuperLyapParams { horizon: 1.0, paths: 20, ..s.super_lyap.unwrap() })
        }
    }
    s
}

pub const ALL_KINDS: [ExperimentKind; 9] = [
    ExperimentKind::Simulate,
    ExperimentKind::Lyapunov,
    ExperimentKind::ScanEpsilon,
    ExperimentKind::EscapeTime,
    ExperimentKind::SyncTest,
    ExperimentKind::StationaryHist,
    ExperimentKind::MomentCurve,
    ExperimentKind::CapVerify,
    ExperimentKind::SuperLyap,
];

fn emitted(dir: &Path) -> std::io::Result<BTreeMap<String, Vec<u8>>> {
    let mut out = BTreeMap::new();
    for entry in fs::read_dir(dir)? {
        let path = entry?.path();
        let name = path.file_name().and_then(|s| s.to_str()).unwrap_or_default().to_string();
        if name != "manifest.json" && name != "summary.txt" {
            out.insert(name, fs::read(&path)?);
        }
    }
    Ok(out)
}

fn run_into(spec: &ExperimentSpec, dir: &Path) -> l96::Result<()> {
    let report = run(spec)?;
    emit_report(dir, spec, &report, 0.0)?;
    Ok(())
}

/// Re-running each kind from its emitted manifest, on the default pool and
/// on a single thread, reproduces every output file byte for byte.
pub fn determinism() -> Verdict {
    let mut v = Verdict::new(13, "determinism from manifest");
    let root = attempt!(v, "temp dir", tempfile::tempdir().map_err(l96::Error::from));
    let single = attempt!(
        v,
        "thread pool",
        rayon::ThreadPoolBuilder::new().num_threads(1).build().map_err(|e| l96::Error::Domain(e.to_string()))
    );
    for kind in ALL_KINDS {
        let name = kind.name();
        let (a, b, c) = (root.path().join(format!("{name}-a")), root.path().join(format!("{name}-b")), root.path().join(format!("{name}-c")));
        attempt!(v, name, run_into(&small_spec(kind), &a));
        let spec = attempt!(v, name, ExperimentSpec::load(&a.join("manifest.json")));
        attempt!(v, name, run_into(&spec, &b));
        attempt!(v, name, single.install(|| run_into(&spec, &c)));
        let (fa, fb, fc) = (
            attempt!(v, name, emitted(&a).map_err(l96::Error::from)),
            attempt!(v, name, emitted(&b).map_err(l96::Error::from)),
            attempt!(v, name, emitted(&c).map_err(l96::Error::from)),
        );
        let files: Vec<&str> = fa.keys().map(String::as_str).collect();
        v.expect(
            !fa.is_empty() && fa == fb && fa == fc,
            format!("{name}: {} identical on rerun and on one thread", files.join(", ")),
        );
    }
    v
}
