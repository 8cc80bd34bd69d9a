//! Lorenz-96 vector fields, the bilinear form and its linearization, the
//! forced/transverse splitting of the index set and the transverse
//! interaction matrices `M_k`.
//!
//! Indices are 0-based and cyclic: index `j` stands for `j mod N`, and the
//! forced set is `I = {j : j mod 3 = 0}`, so index 0 (the "N" of 1-based
//! notation) is forced.

use std::ops::{Index, IndexMut};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::scalar::{Real, Ring};

/// Default integrator step.
pub const DEFAULT_DT: f64 = 1e-3;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ForcingMode {
    /// `sigma[j] > 0` exactly on the forced indices `j mod 3 = 0`.
    #[default]
    Degenerate,
    /// Any nonnegative noise amplitudes; for exploratory and control runs.
    Custom,
}

/// System parameters. Construction validates the forcing pattern, so every
/// `L96Config` in circulation is consistent with its [`ForcingMode`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawConfig<T>", into = "RawConfig<T>", bound = "T: Real + Serialize + for<'a> Deserialize<'a>")]
pub struct L96Config<T: Real> {
    n: usize,
    epsilon: T,
    sigma: Vec<T>,
    dt: T,
    seed: u64,
    mode: ForcingMode,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig<T> {
    n: usize,
    epsilon: T,
    sigma: Vec<T>,
    dt: T,
    seed: u64,
    #[serde(default)]
    mode: ForcingMode,
}

impl<T: Real> TryFrom<RawConfig<T>> for L96Config<T> {
    type Error = Error;

    fn try_from(raw: RawConfig<T>) -> Result<Self> {
        L96Config::new(raw.n, raw.epsilon, raw.sigma, raw.dt, raw.seed, raw.mode)
    }
}

impl<T: Real> From<L96Config<T>> for RawConfig<T> {
    fn from(c: L96Config<T>) -> Self {
        RawConfig { n: c.n, epsilon: c.epsilon, sigma: c.sigma, dt: c.dt, seed: c.seed, mode: c.mode }
    }
}

impl<T: Real> L96Config<T> {
    pub fn new(n: usize, epsilon: T, sigma: Vec<T>, dt: T, seed: u64, mode: ForcingMode) -> Result<Self> {
        if n == 0 || n % 3 != 0 {
            return Err(Error::Config(format!("N = {n} must be a positive multiple of 3")));
        }
        if sigma.len() != n {
            return Err(Error::Config(format!("sigma has {} entries, N = {n}", sigma.len())));
        }
        if !(epsilon >= T::zero()) || !epsilon.is_finite() {
            return Err(Error::Config(format!("epsilon = {epsilon} must be finite and >= 0")));
        }
        if !(dt > T::zero()) || !dt.is_finite() {
            return Err(Error::Config(format!("dt = {dt} must be finite and > 0")));
        }
        if let Some(j) = sigma.iter().position(|s| !(*s >= T::zero()) || !s.is_finite()) {
            return Err(Error::Config(format!("sigma[{j}] = {} must be finite and >= 0", sigma[j])));
        }
        if mode == ForcingMode::Degenerate {
            for (j, s) in sigma.iter().enumerate() {
                let forced = j % 3 == 0;
                if forced != (*s > T::zero()) {
                    return Err(Error::Config(format!(
                        "degenerate forcing requires sigma[j] > 0 iff j mod 3 = 0; sigma[{j}] = {s}"
                    )));
                }
            }
        }
        Ok(Self { n, epsilon, sigma, dt, seed, mode })
    }

    /// Degenerate forcing with the same amplitude on every forced mode.
    pub fn degenerate(n: usize, epsilon: T, sigma: T, dt: T, seed: u64) -> Result<Self> {
        let sig = (0..n).map(|j| if j % 3 == 0 { sigma } else { T::zero() }).collect();
        Self::new(n, epsilon, sig, dt, seed, ForcingMode::Degenerate)
    }

    /// Noise switched off everywhere (custom mode).
    pub fn noise_off(n: usize, epsilon: T, dt: T, seed: u64) -> Result<Self> {
        Self::new(n, epsilon, vec![T::zero(); n], dt, seed, ForcingMode::Custom)
    }

    pub fn with_epsilon(&self, epsilon: T) -> Result<Self> {
        Self::new(self.n, epsilon, self.sigma.clone(), self.dt, self.seed, self.mode)
    }

    pub fn with_dt(&self, dt: T) -> Result<Self> {
        Self::new(self.n, self.epsilon, self.sigma.clone(), dt, self.seed, self.mode)
    }

    pub fn with_seed(&self, seed: u64) -> Self {
        Self { seed, ..self.clone() }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of forced modes, `N / 3`.
    pub fn k(&self) -> usize {
        self.n / 3
    }

    pub fn epsilon(&self) -> T {
        self.epsilon
    }

    pub fn sigma(&self) -> &[T] {
        &self.sigma
    }

    pub fn dt(&self) -> T {
        self.dt
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn mode(&self) -> ForcingMode {
        self.mode
    }

    pub fn max_sigma(&self) -> T {
        self.sigma.iter().fold(T::zero(), |m, s| m.max(*s))
    }

    /// Indices that receive a noise increment each step, in the order the
    /// normals are drawn: the forced set in degenerate mode, every index in
    /// custom mode.
    pub fn noise_indices(&self) -> Vec<usize> {
        match self.mode {
            ForcingMode::Degenerate => (0..self.n).step_by(3).collect(),
            ForcingMode::Custom => (0..self.n).collect(),
        }
    }

    pub fn indexing(&self) -> SubspaceIndexing {
        SubspaceIndexing::new(self.n).expect("validated N")
    }
}

/// Forced set `I`, transverse set `T` and the order-preserving relabelling
/// `T -> {0, .., 2K-1}` used for all transverse matrices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SubspaceIndexing {
    n: usize,
    forced: Vec<usize>,
    transverse: Vec<usize>,
    to_compact: Vec<Option<usize>>,
}

impl SubspaceIndexing {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 || n % 3 != 0 {
            return Err(Error::Config(format!("N = {n} must be a positive multiple of 3")));
        }
        let forced: Vec<usize> = (0..n).filter(|j| j % 3 == 0).collect();
        let transverse: Vec<usize> = (0..n).filter(|j| j % 3 != 0).collect();
        let mut to_compact = vec![None; n];
        for (c, &j) in transverse.iter().enumerate() {
            to_compact[j] = Some(c);
        }
        Ok(Self { n, forced, transverse, to_compact })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.forced.len()
    }

    /// Transverse dimension `2K`.
    pub fn dim_transverse(&self) -> usize {
        self.transverse.len()
    }

    pub fn forced(&self) -> &[usize] {
        &self.forced
    }

    pub fn transverse(&self) -> &[usize] {
        &self.transverse
    }

    pub fn is_forced(&self, j: usize) -> bool {
        j % 3 == 0
    }

    /// Compact transverse index of the (cyclic) original index `j`, or
    /// `None` when `j` is forced.
    pub fn to_compact(&self, j: isize) -> Option<usize> {
        self.to_compact[wrap(j, self.n)]
    }

    pub fn from_compact(&self, c: usize) -> usize {
        self.transverse[c]
    }

    /// Transverse entries of `u` in compact order.
    pub fn compact_transverse<S: Ring>(&self, u: &StateVector<S>) -> Vec<S> {
        self.transverse.iter().map(|&j| u[j].clone()).collect()
    }

    /// Forced entries of `u` in the order of `I`.
    pub fn compact_forced<S: Ring>(&self, u: &StateVector<S>) -> Vec<S> {
        self.forced.iter().map(|&j| u[j].clone()).collect()
    }

    /// Embeds a compact transverse vector into `R^N`.
    pub fn embed_transverse<S: Ring>(&self, w: &[S]) -> StateVector<S> {
        let mut u = StateVector::zeros(self.n);
        for (c, x) in w.iter().enumerate() {
            u[self.transverse[c]] = x.clone();
        }
        u
    }

    /// Embeds forced coordinates (ordered as `I`) into `R^N`.
    pub fn embed_forced<S: Ring>(&self, y: &[S]) -> StateVector<S> {
        let mut u = StateVector::zeros(self.n);
        for (c, x) in y.iter().enumerate() {
            u[self.forced[c]] = x.clone();
        }
        u
    }
}

#[inline]
pub(crate) fn wrap(j: isize, n: usize) -> usize {
    j.rem_euclid(n as isize) as usize
}

/// A point of `R^N` with cyclic indexing.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct StateVector<S>(Vec<S>);

impl<S: Ring> StateVector<S> {
    pub fn zeros(n: usize) -> Self {
        Self(vec![S::zero(); n])
    }

    /// Standard basis vector `e_k` (index taken mod `n`).
    pub fn basis(n: usize, k: isize) -> Self {
        let mut v = Self::zeros(n);
        v[wrap(k, n)] = S::one();
        v
    }

    pub fn from_vec(v: Vec<S>) -> Self {
        Self(v)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[S] {
        &self.0
    }

    pub fn as_mut_slice(&mut self) -> &mut [S] {
        &mut self.0
    }

    pub fn into_vec(self) -> Vec<S> {
        self.0
    }

    /// Cyclic access: `at(-1)` is the last entry.
    pub fn at(&self, j: isize) -> &S {
        &self.0[wrap(j, self.0.len())]
    }

    pub fn dot(&self, other: &Self) -> S {
        self.0.iter().zip(&other.0).fold(S::zero(), |acc, (a, b)| acc + a.clone() * b.clone())
    }

    pub fn add(&self, other: &Self) -> Self {
        Self(self.0.iter().zip(&other.0).map(|(a, b)| a.clone() + b.clone()).collect())
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self(self.0.iter().zip(&other.0).map(|(a, b)| a.clone() - b.clone()).collect())
    }

    pub fn scale(&self, c: &S) -> Self {
        Self(self.0.iter().map(|a| a.clone() * c.clone()).collect())
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|x| x.is_zero())
    }

    /// Cyclic shift: `(shift(u, s))_j = u_{j - s}`.
    pub fn shifted(&self, s: isize) -> Self {
        let n = self.0.len();
        Self((0..n).map(|j| self.0[wrap(j as isize - s, n)].clone()).collect())
    }
}

impl<T: Real> StateVector<T> {
    pub fn norm_sq(&self) -> T {
        self.0.iter().fold(T::zero(), |acc, x| acc + *x * *x)
    }

    pub fn norm(&self) -> T {
        self.norm_sq().sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|x| x.is_finite())
    }

    pub(crate) fn check_finite(self, what: &'static str) -> Result<Self> {
        if self.is_finite() {
            Ok(self)
        } else {
            Err(Error::NonFinite(what))
        }
    }
}

impl<S> Index<usize> for StateVector<S> {
    type Output = S;

    fn index(&self, j: usize) -> &S {
        &self.0[j]
    }
}

impl<S> IndexMut<usize> for StateVector<S> {
    fn index_mut(&mut self, j: usize) -> &mut S {
        &mut self.0[j]
    }
}

fn check_same_len<S>(u: &StateVector<S>, v: &StateVector<S>) -> Result<()> {
    if u.0.len() != v.0.len() {
        return Err(Error::Dimension { expected: u.0.len(), found: v.0.len() });
    }
    Ok(())
}

/// `B(u, v)_j = (u_{j+1} - u_{j-2}) v_{j-1}`.
pub fn bilinear_b<S: Ring>(u: &StateVector<S>, v: &StateVector<S>) -> Result<StateVector<S>> {
    check_same_len(u, v)?;
    let n = u.len() as isize;
    Ok(StateVector(
        (0..n)
            .map(|j| (u.at(j + 1).clone() - u.at(j - 2).clone()) * v.at(j - 1).clone())
            .collect(),
    ))
}

/// Drift `X_0(u) = B(u, u) - eps u` in exact (ring) arithmetic.
pub fn drift_exact<S: Ring>(u: &StateVector<S>, epsilon: &S) -> StateVector<S> {
    let b = bilinear_b(u, u).expect("same vector");
    b.sub(&u.scale(epsilon))
}

/// Drift `X_0(u) = B(u, u) - eps u`.
pub fn drift<T: Real>(u: &StateVector<T>, epsilon: T) -> Result<StateVector<T>> {
    let mut out = StateVector::zeros(u.len());
    drift_into(u.as_slice(), epsilon, out.as_mut_slice());
    out.check_finite("drift")
}

/// Allocation-free drift kernel used by the integrators.
pub(crate) fn drift_into<T: Real>(u: &[T], epsilon: T, out: &mut [T]) {
    let n = u.len();
    for j in 0..n {
        let jp1 = if j + 1 == n { 0 } else { j + 1 };
        let jm1 = if j == 0 { n - 1 } else { j - 1 };
        let jm2 = (j + n - 2) % n;
        out[j] = (u[jp1] - u[jm2]) * u[jm1] - epsilon * u[j];
    }
}

/// Matrix of `DB(u) v = B(u, v) + B(v, u)`:
/// `(DB(u) v)_l = (v_{l+1} - v_{l-2}) u_{l-1} + (u_{l+1} - u_{l-2}) v_{l-1}`.
pub fn jacobian_db<S: Ring>(u: &StateVector<S>) -> Matrix<S> {
    let n = u.len();
    let mut j = Matrix::<S>::zeros(n, n);
    for l in 0..n as isize {
        let row = l as usize;
        let lp1 = wrap(l + 1, n);
        let lm1 = wrap(l - 1, n);
        let lm2 = wrap(l - 2, n);
        let a = u.at(l - 1).clone();
        j[(row, lp1)] = j[(row, lp1)].clone() + a.clone();
        j[(row, lm2)] = j[(row, lm2)].clone() - a;
        j[(row, lm1)] = j[(row, lm1)].clone() + u.at(l + 1).clone() - u.at(l - 2).clone();
    }
    j
}

/// `Pi u`: keeps the forced entries.
pub fn project_invariant<S: Ring>(u: &StateVector<S>) -> StateVector<S> {
    StateVector(u.0.iter().enumerate().map(|(j, x)| if j % 3 == 0 { x.clone() } else { S::zero() }).collect())
}

/// `Pi^perp u`: keeps the transverse entries.
pub fn project_transverse<S: Ring>(u: &StateVector<S>) -> StateVector<S> {
    StateVector(u.0.iter().enumerate().map(|(j, x)| if j % 3 != 0 { x.clone() } else { S::zero() }).collect())
}

/// Whether `u` lies on the invariant subspace `H_I`.
pub fn on_invariant_subspace<S: Ring>(u: &StateVector<S>) -> bool {
    u.0.iter().enumerate().all(|(j, x)| j % 3 == 0 || x.is_zero())
}

/// The four signed entries of `M_k` in original indexing, as
/// `(row, col, sign)`:
/// `M_k = E_{k+1,k+2} - E_{k+1,k-1} + E_{k-1,k-2} - E_{k+2,k+1}`.
pub fn m_k_triples_original(k: usize, n: usize) -> Result<[(usize, usize, i64); 4]> {
    if n == 0 || n % 3 != 0 {
        return Err(Error::Config(format!("N = {n} must be a positive multiple of 3")));
    }
    if k >= n || k % 3 != 0 {
        return Err(Error::Index(format!("k = {k} is not a forced index for N = {n}")));
    }
    let k = k as isize;
    let w = |j: isize| wrap(j, n);
    Ok([
        (w(k + 1), w(k + 2), 1),
        (w(k + 1), w(k - 1), -1),
        (w(k - 1), w(k - 2), 1),
        (w(k + 2), w(k + 1), -1),
    ])
}

/// Same entries as [`m_k_triples_original`], relabelled to compact
/// transverse indices `0..2K`.
pub fn m_k_triples(k: usize, n: usize) -> Result<[(usize, usize, i64); 4]> {
    let idx = SubspaceIndexing::new(n)?;
    let orig = m_k_triples_original(k, n)?;
    Ok(orig.map(|(l, m, s)| {
        let l = idx.to_compact(l as isize).expect("k +- 1, k +- 2 are transverse");
        let m = idx.to_compact(m as isize).expect("k +- 1, k +- 2 are transverse");
        (l, m, s)
    }))
}

/// `M_k = DB(e_k)` restricted to `H_I^perp`, as a `2K x 2K` matrix in
/// compact indexing. Entries are in `{-1, 0, 1}`.
pub fn m_k_matrix<S: Ring>(k: usize, n: usize) -> Result<Matrix<S>> {
    let dim = 2 * n / 3;
    Ok(Matrix::from_triples(dim, dim, &m_k_triples(k, n)?))
}

/// Matrix of `DB(y)` restricted to `H_I^perp`, i.e. `sum_{k in I} y_k M_k`.
pub fn transverse_generator<S: Ring>(y: &StateVector<S>) -> Result<Matrix<S>> {
    let n = y.len();
    let idx = SubspaceIndexing::new(n)?;
    if !on_invariant_subspace(y) {
        return Err(Error::Domain("transverse_generator needs y on H_I".into()));
    }
    let dim = idx.dim_transverse();
    let mut g = Matrix::<S>::zeros(dim, dim);
    for &k in idx.forced() {
        if y[k].is_zero() {
            continue;
        }
        for (l, m, s) in m_k_triples(k, n)? {
            g[(l, m)] = g[(l, m)].clone() + S::from_i64(s) * y[k].clone();
        }
    }
    Ok(g)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn e(n: usize, k: isize) -> StateVector<i64> {
        StateVector::basis(n, k)
    }

    #[test]
    fn config_validation() {
        assert!(L96Config::<f64>::degenerate(9, 0.1, 1.0, 1e-3, 0).is_ok());
        assert!(L96Config::<f64>::degenerate(10, 0.1, 1.0, 1e-3, 0).is_err());
        assert!(L96Config::<f64>::degenerate(9, -0.1, 1.0, 1e-3, 0).is_err());
        assert!(L96Config::<f64>::degenerate(9, 0.1, 1.0, 0.0, 0).is_err());
        // sigma = 0 on a forced mode violates the degenerate pattern
        assert!(L96Config::<f64>::degenerate(9, 0.1, 0.0, 1e-3, 0).is_err());
        let mut sig = vec![1.0; 9];
        assert!(L96Config::new(9, 0.1, sig.clone(), 1e-3, 0, ForcingMode::Degenerate).is_err());
        assert!(L96Config::new(9, 0.1, sig.clone(), 1e-3, 0, ForcingMode::Custom).is_ok());
        sig[4] = f64::NAN;
        assert!(L96Config::new(9, 0.1, sig, 1e-3, 0, ForcingMode::Custom).is_err());
    }

    #[test]
    fn config_serde_rejects_bad_pattern() {
        let good = L96Config::<f64>::degenerate(9, 0.5, 1.0, 1e-3, 7).unwrap();
        let js = serde_json::to_string(&good).unwrap();
        let back: L96Config<f64> = serde_json::from_str(&js).unwrap();
        assert_eq!(back, good);
        let bad = js.replace("\"sigma\":[1.0", "\"sigma\":[0.0");
        assert!(serde_json::from_str::<L96Config<f64>>(&bad).is_err());
    }

    #[test]
    fn indexing_partition() {
        let idx = SubspaceIndexing::new(15).unwrap();
        assert_eq!(idx.k(), 5);
        assert_eq!(idx.dim_transverse(), 10);
        assert_eq!(idx.forced(), &[0, 3, 6, 9, 12]);
        assert_eq!(&idx.transverse()[..4], &[1, 2, 4, 5]);
        assert_eq!(idx.to_compact(4), Some(2));
        assert_eq!(idx.to_compact(15), None);
        assert_eq!(idx.to_compact(-1), Some(9));
        for c in 0..10 {
            assert_eq!(idx.to_compact(idx.from_compact(c) as isize), Some(c));
        }
    }

    #[test]
    fn bilinear_hand_expansions() {
        let n = 9;
        assert!(bilinear_b(&e(n, 1), &e(n, 1)).unwrap().is_zero());
        // B(e_1, e_2): only j = 3 survives with u_4 - u_1 = -1
        assert_eq!(bilinear_b(&e(n, 1), &e(n, 2)).unwrap(), e(n, 3).scale(&-1));
        assert!(bilinear_b(&e(n, 2), &e(n, 1)).unwrap().is_zero());
        let z = StateVector::<i64>::zeros(n);
        assert!(bilinear_b(&z, &z).unwrap().is_zero());
        assert!(bilinear_b(&z, &StateVector::zeros(6)).is_err());
    }

    #[test]
    fn cancellation_on_every_basis_vector() {
        for n in [3usize, 6, 9, 12, 15] {
            for k in 0..n as isize {
                assert!(bilinear_b(&e(n, k), &e(n, k)).unwrap().is_zero());
            }
        }
    }

    #[test]
    fn drift_examples() {
        let u = e(9, 1).add(&e(9, 2));
        assert_eq!(drift_exact(&u, &0), e(9, 3).scale(&-1));
        let y = StateVector::<f64>::from_vec(vec![1.5, 0., 0., -2.0, 0., 0., 0.25, 0., 0.]);
        let d = drift(&y, 0.3).unwrap();
        assert_eq!(d, y.scale(&-0.3));
        assert!(drift(&StateVector::<f64>::zeros(9), 1.0).unwrap().is_zero());
        let bad = StateVector::<f64>::from_vec(vec![f64::INFINITY; 9]);
        assert!(matches!(drift(&bad, 1.0), Err(Error::NonFinite(_))));
    }

    #[test]
    fn jacobian_rows_have_at_most_four_entries() {
        let u = StateVector::<i64>::from_vec((1..=9).collect());
        let j = jacobian_db(&u);
        for r in 0..9 {
            assert!(j.row(r).iter().filter(|x| **x != 0).count() <= 4);
        }
        assert_eq!(j.trace(), 0);
        assert!(jacobian_db(&StateVector::<i64>::zeros(9)).is_zero());
    }

    #[test]
    fn jacobian_matches_polarized_bilinear_form() {
        let u = StateVector::<i64>::from_vec(vec![3, -1, 4, 1, -5, 9, 2, -6, 5]);
        let v = StateVector::<i64>::from_vec(vec![2, 7, -1, 8, 2, -8, 1, 8, -2]);
        let lhs = jacobian_db(&u).mul_vec(v.as_slice()).unwrap();
        let rhs = bilinear_b(&u, &v).unwrap().add(&bilinear_b(&v, &u).unwrap());
        assert_eq!(lhs, rhs.into_vec());
    }

    #[test]
    fn projections() {
        let (p, q) = (project_invariant(&e(9, 3)), project_transverse(&e(9, 3)));
        assert_eq!((p, q.is_zero()), (e(9, 3), true));
        let (p, q) = (project_invariant(&e(9, 1)), project_transverse(&e(9, 1)));
        assert_eq!((p.is_zero(), q), (true, e(9, 1)));
    }

    #[test]
    fn m3_for_n9() {
        let orig = m_k_triples_original(3, 9).unwrap();
        assert_eq!(orig, [(4, 5, 1), (4, 2, -1), (2, 1, 1), (5, 4, -1)]);
        // 1-based compact E_{3,4} - E_{3,2} + E_{2,1} - E_{4,3}
        let compact = m_k_triples(3, 9).unwrap();
        assert_eq!(compact, [(2, 3, 1), (2, 1, -1), (1, 0, 1), (3, 2, -1)]);
        let m: Matrix<i64> = m_k_matrix(3, 9).unwrap();
        assert_eq!(m.nonzero_count(), 4);
        assert!(m_k_matrix::<i64>(4, 9).is_err());
        assert!(m_k_matrix::<i64>(9, 9).is_err());
    }

    #[test]
    fn m_k_traceless_and_sparse() {
        for n in [9usize, 12, 15] {
            for k in (0..n).step_by(3) {
                let m: Matrix<i64> = m_k_matrix(k, n).unwrap();
                assert_eq!(m.trace(), 0);
                assert_eq!(m.nonzero_count(), 4);
                assert!(m.as_slice().iter().all(|x| x.abs() <= 1));
            }
        }
    }

    #[test]
    fn generator_equals_jacobian_block() {
        for n in [9usize, 12, 15] {
            let idx = SubspaceIndexing::new(n).unwrap();
            let y = idx.embed_forced(&(0..idx.k() as i64).map(|i| 2 * i - 3).collect::<Vec<_>>());
            let g = transverse_generator(&y).unwrap();
            let block = jacobian_db(&y).select(idx.transverse(), idx.transverse());
            assert_eq!(g, block);
        }
        let y = e(9, 3);
        assert_eq!(transverse_generator(&y).unwrap(), m_k_matrix::<i64>(3, 9).unwrap());
        assert!(transverse_generator(&StateVector::<i64>::zeros(9)).unwrap().is_zero());
        assert!(matches!(transverse_generator(&e(9, 1)), Err(Error::Domain(_))));
    }

    #[test]
    fn forced_rows_vanish_on_transverse_vectors() {
        let idx = SubspaceIndexing::new(12).unwrap();
        let y = idx.embed_forced(&[1i64, -2, 3, 5]);
        let j = jacobian_db(&y);
        for &r in idx.forced() {
            for &c in idx.transverse() {
                assert_eq!(j[(r, c)], 0);
            }
        }
    }
}
