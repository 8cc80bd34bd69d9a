//! Exact bracket closure of the transverse interaction matrices and the
//! bracket-spanning (Hörmander) rank of the full process.
//!
//! All algebra is over an exact field (normally [`crate::Rational`]).
//! Matrices are vectorized row-major; the span of everything produced so
//! far is kept in fully reduced row-echelon form by [`SpanTracker`].

use std::io::Write;
use std::time::Instant;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::model::{m_k_matrix, SubspaceIndexing, StateVector};
use crate::scalar::{ExactField, Ring};

/// Commutator `AB - BA`.
pub fn bracket<S: Ring>(a: &Matrix<S>, b: &Matrix<S>) -> Result<Matrix<S>> {
    if !a.is_square() || a.rows() != b.rows() || a.cols() != b.cols() {
        return Err(Error::Dimension { expected: a.rows(), found: b.rows() });
    }
    a.try_mul(b)?.try_sub(&b.try_mul(a)?)
}

fn check_shift_dims<S: Ring>(a: &Matrix<S>, k: usize) -> Result<usize> {
    let d = 2 * k;
    if a.rows() != d || a.cols() != d {
        return Err(Error::Dimension { expected: d, found: a.rows() });
    }
    Ok(d)
}

fn shift_by<S: Ring>(a: &Matrix<S>, d: usize, s: usize) -> Matrix<S> {
    let mut out = Matrix::zeros(d, d);
    for i in 0..d {
        for j in 0..d {
            out[((i + s) % d, (j + s) % d)] = a[(i, j)].clone();
        }
    }
    out
}

/// Conjugation by the compact index shift that carries `M_k` to
/// `M_{k+3}`: `E_{i,j} -> E_{i+2,j+2}` (mod 2K).
pub fn shift_conjugate<S: Ring>(a: &Matrix<S>, k: usize) -> Result<Matrix<S>> {
    let d = check_shift_dims(a, k)?;
    Ok(shift_by(a, d, 2 % d.max(1)))
}

/// Inverse of [`shift_conjugate`]: `E_{i,j} -> E_{i-2,j-2}` (mod 2K).
pub fn shift_conjugate_inverse<S: Ring>(a: &Matrix<S>, k: usize) -> Result<Matrix<S>> {
    let d = check_shift_dims(a, k)?;
    Ok(shift_by(a, d, (d - 2 % d.max(1)) % d.max(1)))
}

/// Span of a set of vectors in `S^d`, kept as a fully reduced echelon
/// basis: every pivot is 1 and is the only nonzero in its column.
#[derive(Clone, Debug, PartialEq)]
pub struct SpanTracker<S> {
    dim: usize,
    side: Option<usize>,
    basis: Vec<Vec<S>>,
    pivots: Vec<usize>,
}

impl<S: ExactField> SpanTracker<S> {
    pub fn new(dim: usize) -> Self {
        Self { dim, side: None, basis: Vec::new(), pivots: Vec::new() }
    }

    /// Tracker for `n x n` matrices.
    pub fn for_matrices(n: usize) -> Self {
        Self { side: Some(n), ..Self::new(n * n) }
    }

    pub fn ambient_dim(&self) -> usize {
        self.dim
    }

    /// Side length when the tracker holds vectorized square matrices.
    pub fn matrix_side(&self) -> Option<usize> {
        self.side
    }

    pub fn rank(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[Vec<S>] {
        &self.basis
    }

    pub fn pivots(&self) -> &[usize] {
        &self.pivots
    }

    /// Remainder of `v` after elimination against the basis.
    pub fn reduce(&self, v: &[S]) -> Result<Vec<S>> {
        if v.len() != self.dim {
            return Err(Error::Dimension { expected: self.dim, found: v.len() });
        }
        let mut r = v.to_vec();
        for (b, &p) in self.basis.iter().zip(&self.pivots) {
            if r[p].is_zero() {
                continue;
            }
            let c = r[p].clone();
            for (x, y) in r.iter_mut().zip(b) {
                if !y.is_zero() {
                    *x = x.clone() - c.clone() * y.clone();
                }
            }
        }
        Ok(r)
    }

    pub fn contains(&self, v: &[S]) -> Result<bool> {
        Ok(self.reduce(v)?.iter().all(|x| x.is_zero()))
    }

    /// Adds `v` to the span; returns whether the rank went up.
    pub fn insert(&mut self, v: &[S]) -> Result<bool> {
        let mut r = self.reduce(v)?;
        let Some(p) = r.iter().position(|x| !x.is_zero()) else {
            return Ok(false);
        };
        let inv = S::one() / r[p].clone();
        r.iter_mut().for_each(|x| {
            if !x.is_zero() {
                *x = x.clone() * inv.clone();
            }
        });
        for b in &mut self.basis {
            if b[p].is_zero() {
                continue;
            }
            let c = b[p].clone();
            for (x, y) in b.iter_mut().zip(&r) {
                if !y.is_zero() {
                    *x = x.clone() - c.clone() * y.clone();
                }
            }
        }
        self.basis.push(r);
        self.pivots.push(p);
        Ok(true)
    }

    fn check_matrix(&self, m: &Matrix<S>) -> Result<()> {
        match self.side {
            Some(n) if m.rows() == n && m.cols() == n => Ok(()),
            Some(n) => Err(Error::Dimension { expected: n, found: m.rows() }),
            None => Err(Error::Precondition("tracker does not hold matrices".into())),
        }
    }

    /// Inserts a traceless matrix; a nonzero trace is a domain error.
    pub fn insert_matrix(&mut self, m: &Matrix<S>) -> Result<bool> {
        self.check_matrix(m)?;
        if !m.trace().is_zero() {
            return Err(Error::Domain("matrix inserted into a closure must be traceless".into()));
        }
        self.insert(m.as_slice())
    }

    pub fn contains_matrix(&self, m: &Matrix<S>) -> Result<bool> {
        self.check_matrix(m)?;
        self.contains(m.as_slice())
    }

    /// Basis vectors reshaped to matrices.
    pub fn basis_matrices(&self) -> Result<Vec<Matrix<S>>> {
        let n = self.side.ok_or_else(|| Error::Precondition("tracker does not hold matrices".into()))?;
        self.basis.iter().map(|b| Matrix::from_row_major(n, n, b.clone())).collect()
    }
}

/// Whether `E_{i,j}` (1-based) lies in the tracked span.
pub fn contains_elementary<S: ExactField>(tracker: &SpanTracker<S>, i: usize, j: usize) -> Result<bool> {
    let n = tracker.matrix_side().ok_or_else(|| Error::Precondition("tracker does not hold matrices".into()))?;
    if !(1..=n).contains(&i) || !(1..=n).contains(&j) {
        return Err(Error::Index(format!("E_({i},{j}) out of range for size {n}")));
    }
    tracker.contains_matrix(&Matrix::elementary(n, i - 1, j - 1))
}

/// Breadth-first bracket closure. Generators are depth 1; each further
/// level brackets the elements added by the previous level with every
/// retained element. Only brackets that raise the rank are retained, so
/// the retained elements always form a basis of the span. Generators that
/// are linearly dependent on retained ones add no new brackets and are
/// dropped. The run can be resumed with a larger depth cap.
#[derive(Clone, Debug)]
pub struct Closure<S> {
    tracker: SpanTracker<S>,
    retained: Vec<Matrix<S>>,
    frontier: Vec<Matrix<S>>,
    depth: usize,
    last_growth_depth: usize,
    stable: bool,
}

impl<S: ExactField> Closure<S> {
    pub fn new(generators: &[Matrix<S>]) -> Result<Self> {
        let n = generators.first().map(|g| g.rows()).unwrap_or(0);
        if let Some(g) = generators.iter().find(|g| !g.is_square() || g.rows() != n) {
            return Err(Error::Dimension { expected: n, found: g.rows() });
        }
        let mut tracker = SpanTracker::for_matrices(n);
        let mut retained = Vec::new();
        for g in generators {
            if tracker.insert_matrix(g)? {
                retained.push(g.clone());
            }
        }
        let stable = retained.is_empty();
        Ok(Self {
            tracker,
            frontier: retained.clone(),
            retained,
            depth: 1,
            last_growth_depth: if stable { 0 } else { 1 },
            stable,
        })
    }

    /// Computes one more level; no-op once stable.
    pub fn advance(&mut self) -> Result<()> {
        if self.stable {
            return Ok(());
        }
        let snapshot = self.retained.len();
        let mut next = Vec::new();
        for x in &self.frontier {
            for y in &self.retained[..snapshot] {
                let z = bracket(x, y)?;
                if z.is_zero() {
                    continue;
                }
                if self.tracker.insert_matrix(&z)? {
                    next.push(z);
                }
            }
        }
        self.depth += 1;
        if next.is_empty() {
            self.stable = true;
        } else {
            self.last_growth_depth = self.depth;
            self.retained.extend(next.iter().cloned());
        }
        self.frontier = next;
        Ok(())
    }

    /// Advances until `depth_cap` levels have been computed or the span is
    /// closed under brackets.
    pub fn run_to(&mut self, depth_cap: usize) -> Result<()> {
        if depth_cap == 0 {
            return Err(Error::Precondition("depth cap must be at least 1".into()));
        }
        while !self.stable && self.depth < depth_cap {
            self.advance()?;
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.tracker.rank()
    }

    /// Number of levels computed so far.
    pub fn depth_reached(&self) -> usize {
        self.depth
    }

    /// Deepest level that still added rank.
    pub fn last_growth_depth(&self) -> usize {
        self.last_growth_depth
    }

    /// True once a full level added nothing, i.e. the span is a Lie algebra.
    pub fn is_stable(&self) -> bool {
        self.stable
    }

    pub fn tracker(&self) -> &SpanTracker<S> {
        &self.tracker
    }

    pub fn tracker_mut(&mut self) -> &mut SpanTracker<S> {
        &mut self.tracker
    }

    pub fn retained(&self) -> &[Matrix<S>] {
        &self.retained
    }

    pub fn into_tracker(self) -> SpanTracker<S> {
        self.tracker
    }
}

/// One-shot closure to `depth_cap`.
pub fn closure<S: ExactField>(generators: &[Matrix<S>], depth_cap: usize) -> Result<Closure<S>> {
    let mut c = Closure::new(generators)?;
    c.run_to(depth_cap)?;
    Ok(c)
}

/// `M_k` for `k` taken mod `N` (so `M_9` is `M_0` when `N = 9`).
pub fn generator<S: Ring>(k: usize, n: usize) -> Result<Matrix<S>> {
    if n == 0 {
        return Err(Error::Config("N must be positive".into()));
    }
    m_k_matrix(k % n, n)
}

/// All `K` generators `M_0, M_3, ..., M_{N-3}`.
pub fn all_generators<S: Ring>(n: usize) -> Result<Vec<Matrix<S>>> {
    let idx = SubspaceIndexing::new(n)?;
    idx.forced().iter().map(|&k| generator(k, n)).collect()
}

/// The local triple `M_3, M_6, M_9`.
pub fn local_generators<S: Ring>(n: usize) -> Result<Vec<Matrix<S>>> {
    [3, 6, 9].iter().map(|&k| generator(k, n)).collect()
}

pub const MIN_DEPTH: usize = 5;
pub const MAX_DEPTH: usize = 16;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GenerationReport {
    pub n: usize,
    pub dim: usize,
    pub expected: usize,
    pub generated: bool,
    pub depth_used: usize,
    pub stable: bool,
}

/// Closure of all `K` generators, first to depth 5 and then escalating up
/// to depth 16 until stable, compared against `dim sl(2K)`.
pub fn verify_sl_generation<S: ExactField>(n: usize) -> Result<(GenerationReport, Closure<S>)> {
    let idx = SubspaceIndexing::new(n)?;
    let d = idx.dim_transverse();
    let mut c = closure(&all_generators::<S>(n)?, MIN_DEPTH)?;
    c.run_to(MAX_DEPTH)?;
    let expected = d * d - 1;
    let report = GenerationReport {
        n,
        dim: c.dim(),
        expected,
        generated: c.dim() == expected,
        depth_used: if c.is_stable() { c.last_growth_depth() } else { c.depth_reached() },
        stable: c.is_stable(),
    };
    Ok((report, c))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GeneratorSet {
    /// `M_3, M_6, M_9`.
    Local,
    /// Every `M_k`, `k` in `I`.
    All,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CapReport {
    #[serde(rename = "N")]
    pub n: usize,
    pub generators: GeneratorSet,
    pub dim: usize,
    pub expected: usize,
    pub generated: bool,
    #[serde(rename = "depthUsed")]
    pub depth_used: usize,
    pub stable: bool,
    /// Membership of `E_{3,2}`, `E_{4,3}`, `E_{5,4}` (1-based).
    pub seeds: Vec<(usize, usize, bool)>,
    pub elapsed: f64,
}

pub const SEED_ELEMENTARIES: [(usize, usize); 3] = [(3, 2), (4, 3), (5, 4)];

/// Closure run behind the `cap-verify` command.
pub fn cap_verify(n: usize, depth_cap: usize, set: GeneratorSet) -> Result<(CapReport, Closure<crate::Rational>)> {
    let start = Instant::now();
    let idx = SubspaceIndexing::new(n)?;
    let d = idx.dim_transverse();
    let gens = match set {
        GeneratorSet::Local => local_generators(n)?,
        GeneratorSet::All => all_generators(n)?,
    };
    let c = closure(&gens, depth_cap)?;
    let seeds = SEED_ELEMENTARIES
        .iter()
        .map(|&(i, j)| Ok((i, j, i <= d && j <= d && contains_elementary(c.tracker(), i, j)?)))
        .collect::<Result<Vec<_>>>()?;
    let expected = d * d - 1;
    let report = CapReport {
        n,
        generators: set,
        dim: c.dim(),
        expected,
        generated: c.dim() == expected,
        depth_used: if c.is_stable() { c.last_growth_depth() } else { c.depth_reached() },
        stable: c.is_stable(),
        seeds,
        elapsed: start.elapsed().as_secs_f64(),
    };
    Ok((report, c))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChainStep {
    pub from: (usize, usize),
    pub to: (usize, usize),
    /// True for `E_{i,j} -> E_{i-2,j-2}`, false for `E_{i,j} -> E_{i+2,j+2}`.
    pub inverse: bool,
    /// Whether the image was already in the span before this step.
    pub member: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GPathReport {
    pub n: usize,
    pub steps: Vec<ChainStep>,
    /// `(i, j, reached)` for every member of the standard generating set.
    pub targets: Vec<(usize, usize, bool)>,
    pub complete: bool,
    pub augmented: usize,
}

/// Replays the conjugation chains that carry `E_{3,2}`, `E_{4,3}`,
/// `E_{5,4}` to the whole set `{E_{j+1,j}} U {E_{1,2K}}`. The algebra is
/// closed under the shift conjugation, so every image belongs to it; an
/// image that is not yet in the tracked span is inserted and counted in
/// `augmented`.
pub fn lemma_gen_g_path<S: ExactField>(n: usize, tracker: &mut SpanTracker<S>) -> Result<GPathReport> {
    if n < 15 {
        return Err(Error::Precondition(format!("the chain needs N >= 15, got {n}")));
    }
    let idx = SubspaceIndexing::new(n)?;
    let (k, d) = (idx.k(), idx.dim_transverse());
    if tracker.matrix_side() != Some(d) {
        return Err(Error::Dimension { expected: d, found: tracker.matrix_side().unwrap_or(0) });
    }
    for &(i, j) in &SEED_ELEMENTARIES {
        if !contains_elementary(tracker, i, j)? {
            return Err(Error::Precondition(format!("seed E_({i},{j}) is not in the algebra")));
        }
    }
    let wrap1 = |x: isize| ((x - 1).rem_euclid(d as isize) + 1) as usize;
    let mut steps = Vec::new();
    let mut augmented = 0;
    let mut walk = |from: (usize, usize), inverse: bool, len: usize, tracker: &mut SpanTracker<S>| -> Result<()> {
        let mut cur = from;
        let mut m = Matrix::<S>::elementary(d, cur.0 - 1, cur.1 - 1);
        for _ in 0..len {
            m = if inverse { shift_conjugate_inverse(&m, k)? } else { shift_conjugate(&m, k)? };
            let s: isize = if inverse { -2 } else { 2 };
            let to = (wrap1(cur.0 as isize + s), wrap1(cur.1 as isize + s));
            let member = tracker.contains_matrix(&m)?;
            if !member {
                tracker.insert_matrix(&m)?;
                augmented += 1;
            }
            steps.push(ChainStep { from: cur, to, inverse, member });
            cur = to;
        }
        Ok(())
    };
    walk((4, 3), true, 1, tracker)?;
    walk((3, 2), true, 1, tracker)?;
    let up = (d - 4) / 2;
    walk((4, 3), false, up, tracker)?;
    walk((5, 4), false, up, tracker)?;
    let mut targets: Vec<(usize, usize)> = (1..d).map(|j| (j + 1, j)).collect();
    targets.push((1, d));
    let targets = targets
        .into_iter()
        .map(|(i, j)| Ok((i, j, contains_elementary(tracker, i, j)?)))
        .collect::<Result<Vec<_>>>()?;
    let complete = targets.iter().all(|t| t.2);
    Ok(GPathReport { n, steps, targets, complete, augmented })
}

/// The standard generating set `{E_{j+1,j} : j < n} U {E_{1,n}}` (0-based
/// storage).
pub fn standard_generators<S: Ring>(n: usize) -> Vec<Matrix<S>> {
    let mut g: Vec<Matrix<S>> = (0..n.saturating_sub(1)).map(|j| Matrix::elementary(n, j + 1, j)).collect();
    if n >= 2 {
        g.push(Matrix::elementary(n, 0, n - 1));
    }
    g
}

/// Dimension of the closure of the standard generating set.
pub fn standard_generators_dim(n: usize) -> Result<usize> {
    if n < 2 {
        return Err(Error::Precondition("n must be at least 2".into()));
    }
    let mut c = closure(&standard_generators::<crate::Rational>(n), MIN_DEPTH)?;
    c.run_to(usize::MAX)?;
    Ok(c.dim())
}

/// Whether the standard generating set generates `sl(n)`.
pub fn standard_generators_check(n: usize) -> Result<bool> {
    Ok(standard_generators_dim(n)? == n * n - 1)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HormanderRank {
    pub rank: usize,
    pub full_rank: bool,
}

fn check_sl_basis<S: ExactField>(basis: &[Matrix<S>], d: usize) -> Result<()> {
    let mut t = SpanTracker::for_matrices(d);
    for m in basis {
        t.insert_matrix(m)?;
    }
    if t.rank() != d * d - 1 {
        return Err(Error::Precondition(format!(
            "bracket basis spans a {}-dimensional algebra, not sl({d}) of dimension {}",
            t.rank(),
            d * d - 1
        )));
    }
    Ok(())
}

/// The evaluated spanning family at `u`: forced directions `e_k` and
/// `M (Pi^perp u)` embedded in `R^N` for each `M` in `basis`.
pub fn spanning_family<S: Ring>(u: &StateVector<S>, basis: &[Matrix<S>]) -> Result<Vec<StateVector<S>>> {
    let idx = SubspaceIndexing::new(u.len())?;
    let w = idx.compact_transverse(u);
    let mut out: Vec<StateVector<S>> = idx.forced().iter().map(|&k| StateVector::basis(u.len(), k as isize)).collect();
    for m in basis {
        out.push(idx.embed_transverse(&m.mul_vec(&w)?));
    }
    Ok(out)
}

/// Exact rank of [`spanning_family`] without checking that `basis` spans
/// `sl(2K)`.
pub fn spanning_rank_exact<S: ExactField>(u: &StateVector<S>, basis: &[Matrix<S>]) -> Result<usize> {
    let mut t = SpanTracker::new(u.len());
    for v in spanning_family(u, basis)? {
        t.insert(v.as_slice())?;
    }
    Ok(t.rank())
}

/// Numerical rank with tolerance `1e-9 * sigma_max`.
pub fn spanning_rank_float(u: &StateVector<f64>, basis: &[Matrix<f64>]) -> Result<usize> {
    if !u.is_finite() {
        return Err(Error::NonFinite("state"));
    }
    let fam = spanning_family(u, basis)?;
    let n = u.len();
    let a = DMatrix::from_fn(n, fam.len(), |i, j| fam[j][i]);
    let sv = a.singular_values();
    let top = sv.iter().cloned().fold(0.0, f64::max);
    if top == 0.0 {
        return Ok(0);
    }
    Ok(sv.iter().filter(|&&s| s > 1e-9 * top).count())
}

/// Rank of the bracket-spanning family at a rational point. `sl_basis`
/// must span `sl(2K)`.
pub fn hormander_rank_at<S: ExactField>(u: &StateVector<S>, sl_basis: &[Matrix<S>]) -> Result<HormanderRank> {
    let idx = SubspaceIndexing::new(u.len())?;
    check_sl_basis(sl_basis, idx.dim_transverse())?;
    let rank = spanning_rank_exact(u, sl_basis)?;
    Ok(HormanderRank { rank, full_rank: rank == u.len() })
}

/// Floating point variant of [`hormander_rank_at`]; the basis is checked
/// exactly before conversion.
pub fn hormander_rank_at_f64(u: &StateVector<f64>, sl_basis: &[Matrix<crate::Rational>]) -> Result<HormanderRank> {
    let idx = SubspaceIndexing::new(u.len())?;
    check_sl_basis(sl_basis, idx.dim_transverse())?;
    let fb: Vec<Matrix<f64>> = sl_basis.iter().map(|m| m.map(rational_to_f64)).collect();
    let rank = spanning_rank_float(u, &fb)?;
    Ok(HormanderRank { rank, full_rank: rank == u.len() })
}

fn rational_to_f64(q: &crate::Rational) -> f64 {
    use num_traits::ToPrimitive;
    q.to_f64().unwrap_or(f64::NAN)
}

/// Writes the reduced basis, one vectorized matrix per line, entries as
/// `num/den`.
pub fn write_basis_csv<W: Write>(tracker: &SpanTracker<crate::Rational>, mut w: W) -> Result<()> {
    for b in tracker.basis() {
        let line: Vec<String> = b.iter().map(|q| format!("{}/{}", q.numer(), q.denom())).collect();
        writeln!(w, "{}", line.join(","))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{Rational, RationalMatrix};
    use num_traits::Zero;

    fn q(m: &Matrix<i64>) -> RationalMatrix {
        m.map(|&x| Rational::from_i64(x))
    }

    #[test]
    fn tracker_is_fully_reduced() {
        let mut t = SpanTracker::<Rational>::new(3);
        let v = |a: i64, b: i64, c: i64| vec![Rational::from_i64(a), Rational::from_i64(b), Rational::from_i64(c)];
        assert!(t.insert(&v(2, 4, 6)).unwrap());
        assert!(t.insert(&v(1, 3, 1)).unwrap());
        assert!(!t.insert(&v(3, 7, 7)).unwrap());
        for (b, &p) in t.basis().iter().zip(t.pivots()) {
            assert_eq!(b[p], Rational::from_i64(1));
            for (c, &p2) in t.basis().iter().zip(t.pivots()) {
                if p2 != p {
                    assert!(c[p].is_zero());
                }
            }
            assert!(t.reduce(b).unwrap().iter().all(|x| x.is_zero()));
        }
    }

    #[test]
    fn sl2_from_two_elementaries() {
        let e12 = Matrix::<Rational>::elementary(2, 0, 1);
        let e21 = Matrix::<Rational>::elementary(2, 1, 0);
        let c = closure(&[e12.clone()], 4).unwrap();
        assert_eq!(c.dim(), 1);
        assert!(c.is_stable());
        assert_eq!(c.depth_reached(), 2);
        assert_eq!(c.last_growth_depth(), 1);
        assert_eq!(closure(&[e12, e21], 4).unwrap().dim(), 3);
    }

    #[test]
    fn trace_is_rejected() {
        let mut t = SpanTracker::<Rational>::for_matrices(2);
        assert!(t.insert_matrix(&Matrix::identity(2)).is_err());
        assert!(Closure::new(&[Matrix::<Rational>::identity(2)]).is_err());
    }

    #[test]
    fn shifts_move_generators() {
        let m3 = generator::<i64>(3, 9).unwrap();
        let m6 = generator::<i64>(6, 9).unwrap();
        let m9 = generator::<i64>(9, 9).unwrap();
        assert_eq!(shift_conjugate(&m3, 3).unwrap(), m6);
        assert_eq!(shift_conjugate(&m6, 3).unwrap(), m9);
        assert_eq!(shift_conjugate_inverse(&m6, 3).unwrap(), m3);
        let mut a = m3.clone();
        for _ in 0..3 {
            a = shift_conjugate(&a, 3).unwrap();
        }
        assert_eq!(a, m3);
        let e = Matrix::<i64>::elementary(10, 3, 2);
        assert_eq!(shift_conjugate_inverse(&e, 5).unwrap(), Matrix::elementary(10, 1, 0));
    }

    #[test]
    fn bracket_of_neighbours() {
        let m3 = generator::<i64>(3, 9).unwrap();
        let m6 = generator::<i64>(6, 9).unwrap();
        let b = bracket(&m3, &m6).unwrap();
        assert!(b.as_slice().iter().all(|x| (-1..=1).contains(x)));
        assert_eq!(b.trace(), 0);
        assert!(bracket(&m3, &Matrix::zeros(4, 4)).is_err());
    }

    #[test]
    fn elementary_membership() {
        let t = SpanTracker::<Rational>::for_matrices(4);
        assert!(!contains_elementary(&t, 1, 2).unwrap());
        assert!(contains_elementary(&t, 0, 2).is_err());
        assert!(contains_elementary(&t, 1, 5).is_err());
        let c = closure(&standard_generators::<Rational>(3), 10).unwrap();
        assert_eq!(c.dim(), 8);
        assert!(contains_elementary(c.tracker(), 1, 3).unwrap());
        assert!(!contains_elementary(c.tracker(), 1, 1).unwrap());
    }

    #[test]
    fn small_standard_sets() {
        assert_eq!(standard_generators_dim(2).unwrap(), 3);
        assert_eq!(standard_generators_dim(4).unwrap(), 15);
        assert!(standard_generators_dim(1).is_err());
    }

    #[test]
    fn hormander_needs_full_sl() {
        let u: StateVector<Rational> = StateVector::basis(9, 1).add(&StateVector::basis(9, 3));
        let partial = vec![q(&generator(3, 9).unwrap())];
        assert!(matches!(hormander_rank_at(&u, &partial), Err(Error::Precondition(_))));
        let (_, c) = cap_verify(6, 4, GeneratorSet::All).unwrap();
        let basis = c.tracker().basis_matrices().unwrap();
        let u6: StateVector<Rational> = StateVector::basis(6, 1);
        assert_eq!(spanning_rank_exact(&u6, &basis).unwrap() >= 2, true);
        assert_eq!(spanning_rank_exact(&StateVector::zeros(6), &basis).unwrap(), 2);
    }

    #[test]
    fn g_path_preconditions() {
        let mut t = SpanTracker::<Rational>::for_matrices(6);
        assert!(lemma_gen_g_path(9, &mut t).is_err());
        let mut t = SpanTracker::<Rational>::for_matrices(10);
        assert!(matches!(lemma_gen_g_path(15, &mut t), Err(Error::Precondition(_))));
    }

    #[test]
    fn g_path_on_full_sl() {
        let c = closure(&standard_generators::<Rational>(10), 20).unwrap();
        let mut t = c.into_tracker();
        let r = lemma_gen_g_path(15, &mut t).unwrap();
        assert!(r.complete);
        assert_eq!(r.targets.len(), 10);
        assert_eq!(r.augmented, 0);
        assert_eq!(r.steps[0], ChainStep { from: (4, 3), to: (2, 1), inverse: true, member: true });
        assert_eq!(r.steps[1].to, (1, 10));
        let again = lemma_gen_g_path(15, &mut t).unwrap();
        assert_eq!(again, r);
    }

    #[test]
    fn basis_csv_uses_fractions() {
        let c = closure(&[Matrix::<Rational>::elementary(2, 0, 1).scale(&crate::scalar::rational(1, 3))], 1).unwrap();
        let mut out = Vec::new();
        write_basis_csv(c.tracker(), &mut out).unwrap();
        assert_eq!(String::from_utf8(out).unwrap(), "0/1,1/1,0/1,0/1\n");
    }
}
