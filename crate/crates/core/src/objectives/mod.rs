//! Rényi divergences and the objectives minimized over `σ`.
//!
//! Every objective implements [`Objective`]. Gradients are the specific
//! representatives given by the Fréchet-derivative formulas; they are not
//! projected onto the traceless subspace, so `Tr[σ ∇f(σ)] = −1` holds exactly
//! (up to roundoff) and can be tested.

mod augustin;
mod bipartite;
mod divergence;

use std::fmt;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linalg::{HermitianMatrix, Spectral, C64};
use crate::states::DensityMatrix;

pub use augustin::{
    make_petz_augustin, make_sandwiched_augustin, PetzAugustin, SandwichedAugustin,
};
pub use bipartite::{
    make_conditional_entropy, make_generalized_sandwiched_info, make_sandwiched_renyi_info,
    GeneralizedSandwichedInfo,
};
pub use divergence::{petz_divergence, sandwiched_divergence, umegaki_relative_entropy};

/// Eigenvalues of `σ` below this are treated as its kernel.
pub const KERNEL_TOL: f64 = 1e-12;

/// Smallest accepted `|α − 1|`.
pub const ALPHA_GUARD: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Family {
    Petz,
    Sandwiched,
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Family::Petz => "Petz",
            Family::Sandwiched => "sandwiched",
        })
    }
}

/// Order parameter, validated against the range of its divergence family.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Alpha {
    value: f64,
    family: Family,
}

impl Alpha {
    /// `α ∈ (0, 2] \ {1}`.
    pub fn petz(value: f64) -> Result<Self> {
        Self::new(value, Family::Petz)
    }

    /// `α ∈ [1/2, ∞) \ {1}`.
    pub fn sandwiched(value: f64) -> Result<Self> {
        Self::new(value, Family::Sandwiched)
    }

    pub fn new(value: f64, family: Family) -> Result<Self> {
        let in_range = match family {
            Family::Petz => value > 0.0 && value <= 2.0,
            Family::Sandwiched => value >= 0.5 && value.is_finite(),
        };
        if !in_range {
            let range = match family {
                Family::Petz => "(0, 2]",
                Family::Sandwiched => "[1/2, inf)",
            };
            return Err(Error::Parameter(format!(
                "alpha = {value} is outside the {family} range {range}"
            )));
        }
        if (value - 1.0).abs() < ALPHA_GUARD {
            return Err(Error::Parameter(format!(
                "alpha = {value} is within {ALPHA_GUARD:e} of 1"
            )));
        }
        Ok(Self { value, family })
    }

    pub fn value(&self) -> f64 {
        self.value
    }

    pub fn family(&self) -> Family {
        self.family
    }

    /// Sandwich exponent `(1 − α)/(2α)`.
    pub(crate) fn sandwich_power(&self) -> f64 {
        (1.0 - self.value) / (2.0 * self.value)
    }

    fn require(&self, family: Family) -> Result<()> {
        if self.family == family {
            Ok(())
        } else {
            Err(Error::Parameter(format!(
                "a {family} divergence needs a {family} order, got a {} one",
                self.family
            )))
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ObjectiveKind {
    PetzAugustin,
    SandwichedAugustin,
    GeneralizedSandwichedInfo,
    ConditionalEntropy,
    SandwichedRenyiInfo,
}

impl ObjectiveKind {
    pub fn name(&self) -> &'static str {
        match self {
            ObjectiveKind::PetzAugustin => "petz-augustin",
            ObjectiveKind::SandwichedAugustin => "sandwiched-augustin",
            ObjectiveKind::GeneralizedSandwichedInfo => "generalized-sandwiched-info",
            ObjectiveKind::ConditionalEntropy => "conditional-entropy",
            ObjectiveKind::SandwichedRenyiInfo => "sandwiched-renyi-info",
        }
    }

    pub fn is_augustin(&self) -> bool {
        matches!(
            self,
            ObjectiveKind::PetzAugustin | ObjectiveKind::SandwichedAugustin
        )
    }
}

impl fmt::Display for ObjectiveKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A convex function of a density matrix with a gradient.
pub trait Objective: Send + Sync {
    /// Dimension of the variable `σ`.
    fn dim(&self) -> usize;

    fn kind(&self) -> ObjectiveKind;

    fn alpha(&self) -> Alpha;

    /// `f(σ)`, `+∞` when a support condition fails.
    fn value(&self, sigma: &DensityMatrix) -> Result<f64>;

    /// `(f(σ), ∇f(σ))`. Requires `σ` full rank.
    fn value_and_grad(&self, sigma: &DensityMatrix) -> Result<(f64, HermitianMatrix)>;

    /// True when all instance data is diagonal in the standard basis, so the
    /// objective restricted to diagonal `σ` is a classical function.
    fn is_commuting_instance(&self) -> bool {
        false
    }
}

impl<T: Objective + ?Sized> Objective for Box<T> {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn kind(&self) -> ObjectiveKind {
        (**self).kind()
    }
    fn alpha(&self) -> Alpha {
        (**self).alpha()
    }
    fn value(&self, sigma: &DensityMatrix) -> Result<f64> {
        (**self).value(sigma)
    }
    fn value_and_grad(&self, sigma: &DensityMatrix) -> Result<(f64, HermitianMatrix)> {
        (**self).value_and_grad(sigma)
    }
    fn is_commuting_instance(&self) -> bool {
        (**self).is_commuting_instance()
    }
}

fn check_dim(expected: usize, sigma: &DensityMatrix) -> Result<()> {
    if sigma.dim() != expected {
        return Err(Error::DimensionMismatch {
            expected,
            found: sigma.dim(),
        });
    }
    Ok(())
}

fn require_full_rank(sigma: &DensityMatrix) -> Result<()> {
    let min = sigma.min_eigenvalue();
    if min <= KERNEL_TOL {
        return Err(Error::Boundary {
            min_eigenvalue: min,
            hint: "gradients need a full-rank argument",
        });
    }
    Ok(())
}

/// `λ^p` on the support; kernel eigenvalues map to 0 for negative `p`.
pub(crate) fn support_powers(eigenvalues: &[f64], p: f64) -> Vec<f64> {
    eigenvalues
        .iter()
        .map(|&l| {
            if p < 0.0 && l < KERNEL_TOL {
                0.0
            } else {
                l.max(0.0).powf(p)
            }
        })
        .collect()
}

/// Mass `Σ_a M_aa` of a matrix (given in σ's eigenbasis) on σ's kernel.
pub(crate) fn kernel_mass(rotated: &DMatrix<C64>, sigma: &Spectral) -> f64 {
    sigma
        .eigenvalues()
        .iter()
        .enumerate()
        .filter(|(_, &l)| l < KERNEL_TOL)
        .map(|(a, _)| rotated[(a, a)].re)
        .sum()
}

/// `D M D` for diagonal `D`.
pub(crate) fn scale_both_sides(m: &mut DMatrix<C64>, d: &[f64]) {
    let n = m.nrows();
    for j in 0..n {
        for i in 0..n {
            m[(i, j)] *= d[i] * d[j];
        }
    }
}

/// `V diag(w) V†`.
pub(crate) fn recompose(v: &DMatrix<C64>, w: &[f64]) -> DMatrix<C64> {
    let mut scaled = v.clone();
    for (j, &x) in w.iter().enumerate() {
        scaled.column_mut(j).scale_mut(x);
    }
    scaled * v.adjoint()
}

/// Pairwise summation in a fixed order.
pub(crate) fn pairwise_sum(v: &[f64]) -> f64 {
    if v.len() <= 8 {
        v.iter().sum()
    } else {
        let mid = v.len() / 2;
        pairwise_sum(&v[..mid]) + pairwise_sum(&v[mid..])
    }
}

/// Gradient of the sandwiched family from its eigenbasis input:
/// `coef · U (L ∘ (λ^{−p} B λ^{−p})) U†` with `L` the divided differences of
/// `u^{2p}`, `coef = α/(α−1)`.
pub(crate) fn sandwiched_gradient(
    sigma: &Spectral,
    alpha: Alpha,
    mut b: DMatrix<C64>,
) -> Result<HermitianMatrix> {
    let p = alpha.sandwich_power();
    let a = alpha.value();
    let table = crate::linalg::divided_difference_table(
        sigma,
        crate::linalg::ScalarFunction::Power(2.0 * p),
    )?;
    let inv: Vec<f64> = sigma.eigenvalues().iter().map(|&l| l.powf(-p)).collect();
    let coef = a / (a - 1.0);
    let n = b.nrows();
    for j in 0..n {
        for i in 0..n {
            b[(i, j)] *= coef * table[(i, j)] * inv[i] * inv[j];
        }
    }
    Ok(sigma.from_eigenbasis(&b))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn alpha_ranges() {
        assert!(Alpha::petz(0.5).is_ok());
        assert!(Alpha::petz(2.0).is_ok());
        assert!(Alpha::petz(2.5).is_err());
        assert!(Alpha::petz(0.0).is_err());
        assert!(Alpha::petz(1.0).is_err());
        assert!(Alpha::sandwiched(0.5).is_ok());
        assert!(Alpha::sandwiched(10.0).is_ok());
        assert!(Alpha::sandwiched(0.49).is_err());
        assert!(Alpha::sandwiched(f64::INFINITY).is_err());
    }

    #[test]
    fn guard_band() {
        assert!(Alpha::sandwiched(1.0 + 5e-7).is_err());
        assert!(Alpha::sandwiched(1.0 - 5e-7).is_err());
        assert!(Alpha::sandwiched(1.0 + 2e-6).is_ok());
    }

    #[test]
    fn pairwise_sum_matches_naive() {
        let v: Vec<f64> = (0..100).map(|k| 1.0 / (k as f64 + 1.0)).collect();
        let naive: f64 = v.iter().sum();
        assert!((pairwise_sum(&v) - naive).abs() < 1e-13);
    }
}
