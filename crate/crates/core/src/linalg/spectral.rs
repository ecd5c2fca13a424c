use nalgebra::{DMatrix, SymmetricEigen};

use super::{HermitianMatrix, C64};
use crate::error::{Error, Result};

/// Eigendecomposition `M = U diag(λ) U†` with ascending eigenvalues.
#[derive(Clone, Debug)]
pub struct Spectral {
    eigenvalues: Vec<f64>,
    eigenvectors: DMatrix<C64>,
}

impl Spectral {
    pub(crate) fn from_parts(eigenvalues: Vec<f64>, eigenvectors: DMatrix<C64>) -> Self {
        debug_assert_eq!(eigenvalues.len(), eigenvectors.ncols());
        Self {
            eigenvalues,
            eigenvectors,
        }
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// Columns are orthonormal eigenvectors, in the order of [`Self::eigenvalues`].
    pub fn eigenvectors(&self) -> &DMatrix<C64> {
        &self.eigenvectors
    }

    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues.first().copied().unwrap_or(f64::NAN)
    }

    pub fn max_eigenvalue(&self) -> f64 {
        self.eigenvalues.last().copied().unwrap_or(f64::NAN)
    }

    /// `U diag(g(λ_i)) U†` for an arbitrary real map, with no domain checks.
    pub fn map_eigenvalues(&self, g: impl Fn(f64) -> f64) -> HermitianMatrix {
        let weights: Vec<f64> = self.eigenvalues.iter().map(|&l| g(l)).collect();
        self.recompose_with(&weights)
    }

    /// `U diag(weights) U†`.
    pub fn recompose_with(&self, weights: &[f64]) -> HermitianMatrix {
        let mut scaled = self.eigenvectors.clone();
        for (j, &w) in weights.iter().enumerate() {
            scaled.column_mut(j).scale_mut(w);
        }
        HermitianMatrix::symmetrized(scaled * self.eigenvectors.adjoint())
    }

    pub fn reconstruct(&self) -> HermitianMatrix {
        self.recompose_with(&self.eigenvalues)
    }

    /// `U† A U`: coordinates of `A` in the eigenbasis.
    pub fn to_eigenbasis(&self, a: &DMatrix<C64>) -> DMatrix<C64> {
        self.eigenvectors.adjoint() * a * &self.eigenvectors
    }

    /// `U A U†`: maps eigenbasis coordinates back to the standard basis.
    pub fn from_eigenbasis(&self, a: &DMatrix<C64>) -> HermitianMatrix {
        HermitianMatrix::symmetrized(&self.eigenvectors * a * self.eigenvectors.adjoint())
    }
}

/// Real scalar function with its analytic derivative, applied through the
/// functional calculus.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ScalarFunction {
    Identity,
    Square,
    /// `u ↦ u^p`.
    Power(f64),
    /// Natural logarithm.
    Log,
    Exp,
}

impl ScalarFunction {
    pub fn value(&self, u: f64) -> f64 {
        match *self {
            ScalarFunction::Identity => u,
            ScalarFunction::Square => u * u,
            ScalarFunction::Power(p) if is_whole(p) && p.abs() < 64.0 => u.powi(p as i32),
            ScalarFunction::Power(p) => u.powf(p),
            ScalarFunction::Log => u.ln(),
            ScalarFunction::Exp => u.exp(),
        }
    }

    pub fn derivative(&self, u: f64) -> f64 {
        match *self {
            ScalarFunction::Identity => 1.0,
            ScalarFunction::Square => 2.0 * u,
            ScalarFunction::Power(0.0) => 0.0,
            ScalarFunction::Power(p) if is_whole(p) && p.abs() < 64.0 => p * u.powi(p as i32 - 1),
            ScalarFunction::Power(p) => p * u.powf(p - 1.0),
            ScalarFunction::Log => 1.0 / u,
            ScalarFunction::Exp => u.exp(),
        }
    }

    fn in_value_domain(&self, u: f64) -> bool {
        if !u.is_finite() {
            return false;
        }
        match *self {
            ScalarFunction::Identity | ScalarFunction::Square | ScalarFunction::Exp => true,
            ScalarFunction::Log => u > 0.0,
            ScalarFunction::Power(p) if is_whole(p) && p >= 0.0 => true,
            ScalarFunction::Power(p) if p > 0.0 => u >= 0.0,
            ScalarFunction::Power(_) => u > 0.0,
        }
    }

    fn in_derivative_domain(&self, u: f64) -> bool {
        match *self {
            ScalarFunction::Power(p) if is_whole(p) && p >= 0.0 => u.is_finite(),
            ScalarFunction::Power(p) if p > 1.0 => u.is_finite() && u >= 0.0,
            ScalarFunction::Power(_) => u.is_finite() && u > 0.0,
            _ => self.in_value_domain(u),
        }
    }

    pub(crate) fn check(&self, u: f64, with_derivative: bool) -> Result<()> {
        let ok = if with_derivative {
            self.in_derivative_domain(u)
        } else {
            self.in_value_domain(u)
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Domain {
                eigenvalue: u,
                function: self.to_string(),
            })
        }
    }
}

impl std::fmt::Display for ScalarFunction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ScalarFunction::Identity => write!(f, "u"),
            ScalarFunction::Square => write!(f, "u^2"),
            ScalarFunction::Power(p) => write!(f, "u^{p}"),
            ScalarFunction::Log => write!(f, "log(u)"),
            ScalarFunction::Exp => write!(f, "exp(u)"),
        }
    }
}

fn is_whole(p: f64) -> bool {
    p.fract() == 0.0
}

fn check_finite(m: &HermitianMatrix) -> Result<()> {
    if m.as_matrix()
        .iter()
        .all(|z| z.re.is_finite() && z.im.is_finite())
    {
        Ok(())
    } else {
        Err(Error::Numerical(format!(
            "non-finite entries in a {}x{} matrix",
            m.dim(),
            m.dim()
        )))
    }
}

/// Ascending eigenvalues and orthonormal eigenvectors of a Hermitian matrix.
pub fn eigh(m: &HermitianMatrix) -> Result<Spectral> {
    check_finite(m)?;
    let dim = m.dim();
    let eig = SymmetricEigen::try_new(m.as_matrix().clone(), f64::EPSILON, 200 * dim.max(4))
        .ok_or(Error::Decomposition { dim })?;
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let eigenvalues = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let eigenvectors = DMatrix::from_fn(dim, dim, |i, j| eig.eigenvectors[(i, order[j])]);
    Ok(Spectral::from_parts(eigenvalues, eigenvectors))
}

/// Ascending eigenvalues only.
pub fn eigvalsh(m: &HermitianMatrix) -> Result<Vec<f64>> {
    check_finite(m)?;
    let dim = m.dim();
    // try_new accumulates eigenvectors; the eigenvalue-only path has no
    // iteration cap, so finiteness is checked above.
    let mut values: Vec<f64> = m
        .as_matrix()
        .symmetric_eigenvalues()
        .iter()
        .copied()
        .collect();
    if values.len() != dim || values.iter().any(|v| !v.is_finite()) {
        return Err(Error::Decomposition { dim });
    }
    values.sort_by(f64::total_cmp);
    Ok(values)
}

/// `U diag(f(λ_i)) U†`.
pub fn matrix_fn(s: &Spectral, f: ScalarFunction) -> Result<HermitianMatrix> {
    for &l in s.eigenvalues() {
        f.check(l, false)?;
    }
    Ok(s.map_eigenvalues(|l| f.value(l)))
}

/// First-order divided difference `f^{[1]}(a, b)`.
///
/// Falls back to `f'((a+b)/2)` when `|a − b| ≤ 1e-11·max(1, |a|, |b|)`.
/// Above that threshold the log, exp and power cases are evaluated through
/// `ln_1p`/`exp_m1` so that close eigenvalues do not cancel.
pub fn divided_difference(f: ScalarFunction, a: f64, b: f64) -> Result<f64> {
    f.check(a, false)?;
    f.check(b, false)?;
    let threshold = 1e-11 * 1f64.max(a.abs()).max(b.abs());
    if (a - b).abs() > threshold {
        Ok(quotient(f, a, b))
    } else {
        let mid = 0.5 * (a + b);
        f.check(mid, true)?;
        Ok(f.derivative(mid))
    }
}

fn quotient(f: ScalarFunction, a: f64, b: f64) -> f64 {
    let h = a - b;
    match f {
        ScalarFunction::Identity => 1.0,
        ScalarFunction::Square => a + b,
        ScalarFunction::Exp => b.exp() * (h.exp_m1() / h),
        ScalarFunction::Log => (h / b).ln_1p() / h,
        ScalarFunction::Power(p) if a > 0.0 && b > 0.0 => {
            // a^p − b^p = b^p (exp(p ln(a/b)) − 1)
            let l = (h / b).ln_1p();
            f.value(b) * (p * l).exp_m1() / h
        }
        ScalarFunction::Power(_) => (f.value(a) - f.value(b)) / h,
    }
}

/// Table `L[a][b] = f^{[1]}(λ_a, λ_b)` over the eigenvalues of `s`.
pub fn divided_difference_table(s: &Spectral, f: ScalarFunction) -> Result<DMatrix<f64>> {
    let lam = s.eigenvalues();
    for &l in lam {
        f.check(l, true)?;
    }
    let n = lam.len();
    let mut table = DMatrix::zeros(n, n);
    for a in 0..n {
        for b in a..n {
            let v = divided_difference(f, lam[a], lam[b])?;
            table[(a, b)] = v;
            table[(b, a)] = v;
        }
    }
    Ok(table)
}

/// Fréchet derivative `Df(σ)[A] = Σ_{a,b} f^{[1]}(λ_a, λ_b) P_a A P_b`,
/// evaluated as `U (L ∘ U†AU) U†`.
pub fn frechet_apply(
    s: &Spectral,
    f: ScalarFunction,
    a: &HermitianMatrix,
) -> Result<HermitianMatrix> {
    if a.dim() != s.dim() {
        return Err(Error::DimensionMismatch {
            expected: s.dim(),
            found: a.dim(),
        });
    }
    let table = divided_difference_table(s, f)?;
    let mut coords = s.to_eigenbasis(a.as_matrix());
    hadamard_real_mut(&mut coords, &table);
    Ok(s.from_eigenbasis(&coords))
}

pub(crate) fn hadamard_real_mut(m: &mut DMatrix<C64>, weights: &DMatrix<f64>) {
    for (z, w) in m.iter_mut().zip(weights.iter()) {
        *z *= *w;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::tests_support::random_hermitian;

    #[test]
    fn identity_spectrum() {
        let s = eigh(&HermitianMatrix::identity(3)).unwrap();
        assert!(s.eigenvalues().iter().all(|&l| (l - 1.0).abs() < 1e-14));
    }

    #[test]
    fn diagonal_sorted_ascending() {
        let s = eigh(&HermitianMatrix::from_real_diagonal(&[2.0, -1.0])).unwrap();
        assert_eq!(s.eigenvalues(), &[-1.0, 2.0]);
        let u = s.eigenvectors();
        assert!((u[(1, 0)].norm() - 1.0).abs() < 1e-14);
        assert!((u[(0, 1)].norm() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn reconstruction_and_orthonormality() {
        for seed in 0..20 {
            let m = random_hermitian(7, seed);
            let s = eigh(&m).unwrap();
            let err = (&s.reconstruct() - &m).frobenius_norm();
            assert!(err <= 1e-10 * m.frobenius_norm().max(1.0), "err {err}");
            let u = s.eigenvectors();
            let gram = u.adjoint() * u - DMatrix::<C64>::identity(7, 7);
            assert!(gram.norm() < 1e-10);
            assert!(s.eigenvalues().windows(2).all(|w| w[0] <= w[1]));
        }
    }

    #[test]
    fn eigvalsh_matches_eigh() {
        let m = random_hermitian(6, 3);
        let a = eigvalsh(&m).unwrap();
        let s = eigh(&m).unwrap();
        for (x, y) in a.iter().zip(s.eigenvalues()) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn non_finite_input_is_numerical_error() {
        let mut m = HermitianMatrix::identity(2).into_matrix();
        m[(0, 0)] = C64::new(f64::NAN, 0.0);
        let h = HermitianMatrix::symmetrized(m);
        assert!(matches!(eigh(&h), Err(Error::Numerical(_))));
    }

    #[test]
    fn matrix_fn_examples() {
        let m = random_hermitian(5, 11);
        let s = eigh(&m).unwrap();
        let same = matrix_fn(&s, ScalarFunction::Identity).unwrap();
        assert!((&same - &m).frobenius_norm() < 1e-12);

        let sq = matrix_fn(&s, ScalarFunction::Square).unwrap();
        let direct = m.as_matrix() * m.as_matrix();
        assert!((sq.as_matrix() - direct).norm() < 1e-10);

        let d = eigh(&HermitianMatrix::from_real_diagonal(&[4.0, 9.0])).unwrap();
        let root = matrix_fn(&d, ScalarFunction::Power(0.5)).unwrap();
        assert!((root.diagonal()[0] - 2.0).abs() < 1e-14);
        assert!((root.diagonal()[1] - 3.0).abs() < 1e-14);
    }

    #[test]
    fn matrix_fn_domain_error_names_eigenvalue() {
        let s = eigh(&HermitianMatrix::from_real_diagonal(&[-0.5, 1.0])).unwrap();
        match matrix_fn(&s, ScalarFunction::Power(-0.5)) {
            Err(Error::Domain { eigenvalue, .. }) => assert_eq!(eigenvalue, -0.5),
            other => panic!("expected domain error, got {other:?}"),
        }
        assert!(matrix_fn(&s, ScalarFunction::Log).is_err());
    }

    #[test]
    fn divided_difference_examples() {
        let sq = ScalarFunction::Square;
        assert!((divided_difference(sq, 1.0, 3.0).unwrap() - 4.0).abs() < 1e-14);
        assert!((divided_difference(sq, 2.0, 2.0).unwrap() - 4.0).abs() < 1e-14);
        let h = ScalarFunction::Power(0.5);
        assert!((divided_difference(h, 1.0, 4.0).unwrap() - 1.0 / 3.0).abs() < 1e-14);
    }

    #[test]
    fn divided_difference_near_coincident_is_stable() {
        let f = ScalarFunction::Power(-0.45);
        let a = 0.3;
        let b = a + 1e-13;
        let v = divided_difference(f, a, b).unwrap();
        assert!((v - f.derivative(a)).abs() < 1e-9 * f.derivative(a).abs());
    }

    #[test]
    fn divided_difference_small_gap_keeps_precision() {
        let fs = [
            ScalarFunction::Power(-0.45),
            ScalarFunction::Power(1.5),
            ScalarFunction::Log,
            ScalarFunction::Exp,
        ];
        for f in fs {
            let a = 0.3;
            let b = a * (1.0 + 1e-9);
            let v = divided_difference(f, a, b).unwrap();
            let d = f.derivative(0.5 * (a + b));
            assert!((v - d).abs() < 1e-13 * d.abs(), "{f}: {v} vs {d}");
        }
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let fs = [
            ScalarFunction::Identity,
            ScalarFunction::Square,
            ScalarFunction::Power(0.5),
            ScalarFunction::Power(-0.45),
            ScalarFunction::Power(3.0),
            ScalarFunction::Log,
            ScalarFunction::Exp,
        ];
        for f in fs {
            for &u in &[0.2, 0.7, 1.3, 2.9] {
                let h = 1e-6;
                let fd = (f.value(u + h) - f.value(u - h)) / (2.0 * h);
                let d = f.derivative(u);
                assert!(
                    (fd - d).abs() < 1e-6 * d.abs().max(1.0),
                    "{f} at {u}: {fd} vs {d}"
                );
            }
        }
    }

    #[test]
    fn frechet_identity_function_is_identity_map() {
        let s = eigh(&random_hermitian(4, 1)).unwrap();
        let a = random_hermitian(4, 2);
        let out = frechet_apply(&s, ScalarFunction::Identity, &a).unwrap();
        assert!((&out - &a).frobenius_norm() < 1e-12);
    }

    #[test]
    fn frechet_at_identity_scales_by_derivative() {
        let s = eigh(&HermitianMatrix::identity(3)).unwrap();
        let a = random_hermitian(3, 5);
        let f = ScalarFunction::Power(-0.45);
        let out = frechet_apply(&s, f, &a).unwrap();
        let expected = &a * f.derivative(1.0);
        assert!((&out - &expected).frobenius_norm() < 1e-12);
    }

    #[test]
    fn frechet_square_is_product_rule() {
        for seed in 0..10 {
            let sigma = random_hermitian(5, 100 + seed);
            let a = random_hermitian(5, 200 + seed);
            let s = eigh(&sigma).unwrap();
            let out = frechet_apply(&s, ScalarFunction::Square, &a).unwrap();
            let expected = sigma.as_matrix() * a.as_matrix() + a.as_matrix() * sigma.as_matrix();
            assert!((out.as_matrix() - expected).norm() < 1e-10);
        }
    }
}
