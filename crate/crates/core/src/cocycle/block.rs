//! Exact instability certificate for the invariant 4x4 block of
//! `DB(a e_0 + b e_3)` on `span{e_1, e_2, e_4, e_5}`.

use std::fmt;

use serde::{Serialize, Serializer};

use crate::matrix::Matrix;
use crate::scalar::Ring;
use crate::{Rational, RationalMatrix};

/// Coefficients `c_0..=c_n` (ascending) of `det(t I - A)` by the
/// Faddeev-LeVerrier recursion. Divisions are exact over a field; over
/// the integers they are exact as well because every `c_k` is an integer.
pub fn charpoly<S: Ring>(a: &Matrix<S>) -> Vec<S> {
    assert!(a.is_square(), "charpoly needs a square matrix");
    let n = a.rows();
    let mut coeffs = vec![S::zero(); n + 1];
    coeffs[n] = S::one();
    let mut m = Matrix::<S>::zeros(n, n);
    let id = Matrix::<S>::identity(n);
    for k in 1..=n {
        // M_k = A M_{k-1} + c_{n-k+1} I ; c_{n-k} = -tr(A M_k) / k
        m = &(a * &m) + &id.scale(&coeffs[n - k + 1]);
        let am = a * &m;
        coeffs[n - k] = -(am.trace() / S::from_i64(k as i64));
    }
    coeffs
}

/// `+- sqrt(radicand)`, times `i` when `imaginary`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SqrtRoot {
    pub sign: i8,
    pub imaginary: bool,
    pub radicand: Rational,
}

impl fmt::Display for SqrtRoot {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = if self.sign < 0 { "-" } else { "" };
        let i = if self.imaginary { "i*" } else { "" };
        write!(f, "{s}{i}sqrt({})", self.radicand)
    }
}

impl Serialize for SqrtRoot {
    fn serialize<Ser: Serializer>(&self, s: Ser) -> Result<Ser::Ok, Ser::Error> {
        s.serialize_str(&self.to_string())
    }
}

fn ser_rationals<Ser: Serializer>(v: &[Rational], s: Ser) -> Result<Ser::Ok, Ser::Error> {
    s.collect_seq(v.iter().map(|x| x.to_string()))
}

fn ser_matrix<Ser: Serializer>(m: &RationalMatrix, s: Ser) -> Result<Ser::Ok, Ser::Error> {
    s.collect_seq((0..m.rows()).map(|i| m.row(i).iter().map(|x| x.to_string()).collect::<Vec<_>>()))
}

#[derive(Clone, Debug, Serialize)]
pub struct UnstableBlock {
    #[serde(serialize_with = "ser_matrix")]
    pub matrix: RationalMatrix,
    /// Ascending coefficients of `det(t I - M)`; for a 4x4 matrix this
    /// equals `det(M - t I)`.
    #[serde(serialize_with = "ser_rationals")]
    pub charpoly: Vec<Rational>,
    /// Coefficientwise equality with `(b^2 + t^2)(a^2 - a b + t^2)`.
    pub factored_check: bool,
    /// `a (b - a)`; a root with positive real part exists iff this is positive.
    #[serde(serialize_with = "ser_rational")]
    pub discriminant: Rational,
    pub eigenvalues: [SqrtRoot; 4],
    pub unstable: bool,
}

fn ser_rational<Ser: Serializer>(v: &Rational, s: Ser) -> Result<Ser::Ok, Ser::Error> {
    s.serialize_str(&v.to_string())
}

/// The block matrix in the basis order `e_1, e_2, e_4, e_5`.
pub fn block_matrix(a: &Rational, b: &Rational) -> RationalMatrix {
    let z = Rational::from_i64(0);
    let rows = vec![
        z.clone(), a.clone(), z.clone(), z.clone(),
        b - a, z.clone(), z.clone(), z.clone(),
        z.clone(), -b.clone(), z.clone(), b.clone(),
        z.clone(), z.clone(), -b.clone(), z,
    ];
    Matrix::from_row_major(4, 4, rows).expect("4x4")
}

/// Ascending coefficients of `(b^2 + t^2)(a^2 - a b + t^2)`.
pub fn factored_coefficients(a: &Rational, b: &Rational) -> Vec<Rational> {
    let b2 = b * b;
    let c = a * a - a * b;
    let z = Rational::from_i64(0);
    vec![&b2 * &c, z.clone(), &b2 + &c, z, Rational::from_i64(1)]
}

pub fn unstable_block(a: &Rational, b: &Rational) -> UnstableBlock {
    let matrix = block_matrix(a, b);
    let cp = charpoly(&matrix);
    let factored_check = cp == factored_coefficients(a, b);
    let disc = a * (b - a);
    let zero = Rational::from_i64(0);
    let b2 = b * b;
    let pair = |imaginary: bool, r: Rational| {
        [
            SqrtRoot { sign: 1, imaginary, radicand: r.clone() },
            SqrtRoot { sign: -1, imaginary, radicand: r },
        ]
    };
    let [r0, r1] = pair(true, b2);
    let [r2, r3] = if disc >= zero { pair(false, disc.clone()) } else { pair(true, -disc.clone()) };
    UnstableBlock {
        matrix,
        charpoly: cp,
        factored_check,
        unstable: disc > zero,
        discriminant: disc,
        eigenvalues: [r0, r1, r2, r3],
    }
}
