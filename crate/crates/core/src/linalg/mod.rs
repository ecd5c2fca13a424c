//! Dense Hermitian linear algebra and matrix functional calculus.
//!
//! Everything here works on small-to-moderate dense complex matrices
//! (dimensions up to a few hundred). Spectral functions go through an
//! eigendecomposition; Fréchet derivatives of spectral functions use the
//! Daleckii–Krein formula evaluated as a Hadamard product in the eigenbasis.

mod spectral;
mod tensor;

use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::{Complex, DMatrix};

use crate::error::{Error, Result};

pub use spectral::{
    divided_difference, divided_difference_table, eigh, eigvalsh, frechet_apply, matrix_fn,
    ScalarFunction, Spectral,
};
pub use tensor::{kron, partial_trace_a, partial_trace_b};

/// Double-precision complex scalar.
pub type C64 = Complex<f64>;

/// Largest anti-Hermitian entry accepted by [`HermitianMatrix::new`].
pub const HERMITIAN_REJECT_TOL: f64 = 1e-8;

/// Dense self-adjoint matrix.
///
/// Construction symmetrizes the input as `(M + M†)/2`, so the stored entries
/// are exactly Hermitian (real diagonal, conjugate-symmetric off-diagonal).
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianMatrix(DMatrix<C64>);

impl HermitianMatrix {
    /// Validates and symmetrizes `m`.
    pub fn new(m: DMatrix<C64>) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::NotSquare {
                rows: m.nrows(),
                cols: m.ncols(),
            });
        }
        if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Numerical("matrix has non-finite entries".into()));
        }
        let deviation = anti_hermitian_part(&m);
        if deviation > HERMITIAN_REJECT_TOL {
            return Err(Error::NotHermitian { deviation });
        }
        Ok(Self::symmetrized(m))
    }

    /// Symmetrizes without the rejection check. Used for matrices that are
    /// Hermitian analytically but carry roundoff from products.
    pub(crate) fn symmetrized(mut m: DMatrix<C64>) -> Self {
        let n = m.nrows();
        for i in 0..n {
            m[(i, i)] = C64::new(m[(i, i)].re, 0.0);
            for j in (i + 1)..n {
                let avg = (m[(i, j)] + m[(j, i)].conj()) * 0.5;
                m[(i, j)] = avg;
                m[(j, i)] = avg.conj();
            }
        }
        Self(m)
    }

    pub fn from_rows(rows: &[Vec<C64>]) -> Result<Self> {
        let n = rows.len();
        if let Some(bad) = rows.iter().find(|r| r.len() != n) {
            return Err(Error::NotSquare {
                rows: n,
                cols: bad.len(),
            });
        }
        Self::new(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let n = diag.len();
        Self(DMatrix::from_fn(n, n, |i, j| {
            if i == j {
                C64::new(diag[i], 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        }))
    }

    pub fn identity(dim: usize) -> Self {
        Self(DMatrix::identity(dim, dim))
    }

    pub fn zeros(dim: usize) -> Self {
        Self(DMatrix::zeros(dim, dim))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn as_matrix(&self) -> &DMatrix<C64> {
        &self.0
    }

    pub fn into_matrix(self) -> DMatrix<C64> {
        self.0
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim()).map(|i| self.0[(i, i)].re).sum()
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.0[(i, i)].re).collect()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.0.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs_entry(&self) -> f64 {
        self.0.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// True when every off-diagonal entry is exactly zero.
    pub fn is_diagonal(&self) -> bool {
        let n = self.dim();
        (0..n).all(|i| (0..n).all(|j| i == j || self.0[(i, j)] == C64::new(0.0, 0.0)))
    }

    /// `self - (Tr[self]/d)·I`: the traceless representative.
    pub fn traceless_part(&self) -> Self {
        let shift = self.trace() / self.dim() as f64;
        let mut m = self.0.clone();
        for i in 0..self.dim() {
            m[(i, i)].re -= shift;
        }
        Self(m)
    }

    /// `A M A†` for an arbitrary square `A`.
    pub fn congruence(&self, a: &DMatrix<C64>) -> Self {
        Self::symmetrized(a * &self.0 * a.adjoint())
    }

    /// Hermitian product `A B A` for Hermitian `A`.
    pub fn sandwich(&self, outer: &HermitianMatrix) -> Self {
        Self::symmetrized(&outer.0 * &self.0 * &outer.0)
    }
}

fn anti_hermitian_part(m: &DMatrix<C64>) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0_f64;
    for i in 0..n {
        for j in i..n {
            let d = (m[(i, j)] - m[(j, i)].conj()).norm() * 0.5;
            worst = worst.max(d);
        }
    }
    worst
}

impl Add for &HermitianMatrix {
    type Output = HermitianMatrix;
    fn add(self, rhs: &HermitianMatrix) -> HermitianMatrix {
        HermitianMatrix(&self.0 + &rhs.0)
    }
}

impl Sub for &HermitianMatrix {
    type Output = HermitianMatrix;
    fn sub(self, rhs: &HermitianMatrix) -> HermitianMatrix {
        HermitianMatrix(&self.0 - &rhs.0)
    }
}

impl Mul<f64> for &HermitianMatrix {
    type Output = HermitianMatrix;
    fn mul(self, rhs: f64) -> HermitianMatrix {
        HermitianMatrix(self.0.map(|z| z * rhs))
    }
}

impl Neg for &HermitianMatrix {
    type Output = HermitianMatrix;
    fn neg(self) -> HermitianMatrix {
        HermitianMatrix(-&self.0)
    }
}

/// Hilbert–Schmidt inner product `Re Tr[A B]`.
pub fn trace_inner(a: &HermitianMatrix, b: &HermitianMatrix) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            found: b.dim(),
        });
    }
    // Tr[AB] = Σ_ij A_ij B_ji = Σ_ij A_ij conj(B_ij) for Hermitian B.
    let mut acc = C64::new(0.0, 0.0);
    for (x, y) in a.0.iter().zip(b.0.iter()) {
        acc += x * y.conj();
    }
    debug_assert!(
        acc.im.abs() <= 1e-10 * (1.0 + a.frobenius_norm() * b.frobenius_norm()),
        "imaginary part {} of a Hermitian trace product",
        acc.im
    );
    Ok(acc.re)
}

/// Schatten norm for `p ∈ {1, ∞}` (sum or max of absolute eigenvalues).
pub fn schatten_norm(m: &HermitianMatrix, p: f64) -> Result<f64> {
    let evals = eigvalsh(m)?;
    if p == 1.0 {
        Ok(evals.iter().map(|v| v.abs()).sum())
    } else if p == f64::INFINITY {
        Ok(evals.iter().map(|v| v.abs()).fold(0.0, f64::max))
    } else {
        Err(Error::Parameter(format!(
            "Schatten norm supports p = 1 or p = infinity, got {p}"
        )))
    }
}
