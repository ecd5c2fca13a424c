use nalgebra::DMatrix;

use super::divergence::log_over;
use super::{
    check_dim, kernel_mass, pairwise_sum, recompose, require_full_rank, sandwiched_gradient,
    scale_both_sides, support_powers, Alpha, Family, Objective, ObjectiveKind,
};
use crate::error::Result;
use crate::linalg::{
    divided_difference_table, eigh, eigvalsh, HermitianMatrix, ScalarFunction, C64,
};
use crate::states::{CQEnsemble, DensityMatrix, SUPPORT_TOL};

/// `σ ↦ Σ_x P(x) D_α(ρ_x ‖ σ)` with the Petz divergence.
#[derive(Clone, Debug)]
pub struct PetzAugustin {
    ensemble: CQEnsemble,
    alpha: Alpha,
    /// `ρ_x^α` for each `x`.
    powered: Vec<DMatrix<C64>>,
}

/// `σ ↦ Σ_x P(x) D*_α(ρ_x ‖ σ)` with the sandwiched divergence.
#[derive(Clone, Debug)]
pub struct SandwichedAugustin {
    ensemble: CQEnsemble,
    alpha: Alpha,
}

pub fn make_petz_augustin(ensemble: CQEnsemble, alpha: Alpha) -> Result<PetzAugustin> {
    alpha.require(Family::Petz)?;
    let a = alpha.value();
    let powered = ensemble
        .states()
        .iter()
        .map(|r| {
            r.spectral()
                .map_eigenvalues(|m| m.max(0.0).powf(a))
                .into_matrix()
        })
        .collect();
    Ok(PetzAugustin {
        ensemble,
        alpha,
        powered,
    })
}

pub fn make_sandwiched_augustin(ensemble: CQEnsemble, alpha: Alpha) -> Result<SandwichedAugustin> {
    alpha.require(Family::Sandwiched)?;
    Ok(SandwichedAugustin { ensemble, alpha })
}

impl PetzAugustin {
    pub fn ensemble(&self) -> &CQEnsemble {
        &self.ensemble
    }

    fn has_kernel_violation(&self, sigma: &DensityMatrix) -> bool {
        let s = sigma.spectral();
        if s.min_eigenvalue() >= super::KERNEL_TOL {
            return false;
        }
        self.terms().any(|(_, rho, _)| {
            let r = s.to_eigenbasis(rho.matrix().as_matrix());
            kernel_mass(&r, s) > SUPPORT_TOL
        })
    }

    fn terms(&self) -> impl Iterator<Item = (f64, &DensityMatrix, &DMatrix<C64>)> {
        self.ensemble
            .weights()
            .iter()
            .zip(self.ensemble.states())
            .zip(&self.powered)
            .filter(|((&w, _), _)| w > 0.0)
            .map(|((&w, r), p)| (w, r, p))
    }
}

impl Objective for PetzAugustin {
    fn dim(&self) -> usize {
        self.ensemble.dim()
    }

    fn kind(&self) -> ObjectiveKind {
        ObjectiveKind::PetzAugustin
    }

    fn alpha(&self) -> Alpha {
        self.alpha
    }

    fn value(&self, sigma: &DensityMatrix) -> Result<f64> {
        check_dim(self.dim(), sigma)?;
        if self.has_kernel_violation(sigma) {
            return Ok(f64::INFINITY);
        }
        let a = self.alpha.value();
        let s = sigma.spectral();
        let u = s.eigenvectors();
        let w = support_powers(s.eigenvalues(), 1.0 - a);
        let mut terms = Vec::with_capacity(self.ensemble.len());
        for (p, _, powered) in self.terms() {
            // diag(U† A U)_k = Σ_i conj(U_ik) (A U)_ik
            let au = powered * u;
            let t: f64 = (0..u.ncols())
                .map(|k| u.column(k).dotc(&au.column(k)).re * w[k])
                .sum();
            terms.push(p * log_over(t, a)?);
        }
        Ok(pairwise_sum(&terms))
    }

    fn value_and_grad(&self, sigma: &DensityMatrix) -> Result<(f64, HermitianMatrix)> {
        check_dim(self.dim(), sigma)?;
        require_full_rank(sigma)?;
        let a = self.alpha.value();
        let s = sigma.spectral();
        let w = support_powers(s.eigenvalues(), 1.0 - a);
        let d = self.dim();
        let mut b = DMatrix::<C64>::zeros(d, d);
        let mut terms = Vec::with_capacity(self.ensemble.len());
        for (p, _, powered) in self.terms() {
            let c = s.to_eigenbasis(powered);
            let t: f64 = (0..d).map(|k| c[(k, k)].re * w[k]).sum();
            terms.push(p * log_over(t, a)?);
            b += c * C64::new(p / t, 0.0);
        }
        let table = divided_difference_table(s, ScalarFunction::Power(1.0 - a))?;
        let scale = 1.0 / (a - 1.0);
        for j in 0..d {
            for i in 0..d {
                b[(i, j)] *= scale * table[(i, j)];
            }
        }
        Ok((pairwise_sum(&terms), s.from_eigenbasis(&b)))
    }

    fn is_commuting_instance(&self) -> bool {
        self.ensemble.is_diagonal()
    }
}

impl SandwichedAugustin {
    pub fn ensemble(&self) -> &CQEnsemble {
        &self.ensemble
    }

    fn terms(&self) -> impl Iterator<Item = (f64, &DensityMatrix)> {
        self.ensemble
            .weights()
            .iter()
            .zip(self.ensemble.states())
            .filter(|(&w, _)| w > 0.0)
            .map(|(&w, r)| (w, r))
    }

    /// `σ^p ρ σ^p` in σ's eigenbasis, or `None` on a support violation.
    fn sandwiched(
        &self,
        rho: &DensityMatrix,
        sigma: &DensityMatrix,
        d: &[f64],
    ) -> Option<HermitianMatrix> {
        let s = sigma.spectral();
        let mut x = s.to_eigenbasis(rho.matrix().as_matrix());
        if kernel_mass(&x, s) > SUPPORT_TOL {
            return None;
        }
        scale_both_sides(&mut x, d);
        Some(HermitianMatrix::symmetrized(x))
    }
}

impl Objective for SandwichedAugustin {
    fn dim(&self) -> usize {
        self.ensemble.dim()
    }

    fn kind(&self) -> ObjectiveKind {
        ObjectiveKind::SandwichedAugustin
    }

    fn alpha(&self) -> Alpha {
        self.alpha
    }

    fn value(&self, sigma: &DensityMatrix) -> Result<f64> {
        check_dim(self.dim(), sigma)?;
        let a = self.alpha.value();
        let d = support_powers(sigma.eigenvalues(), self.alpha.sandwich_power());
        let mut terms = Vec::with_capacity(self.ensemble.len());
        for (p, rho) in self.terms() {
            let Some(x) = self.sandwiched(rho, sigma, &d) else {
                return Ok(f64::INFINITY);
            };
            let t: f64 = eigvalsh(&x)?.iter().map(|&v| v.max(0.0).powf(a)).sum();
            terms.push(p * log_over(t, a)?);
        }
        Ok(pairwise_sum(&terms))
    }

    fn value_and_grad(&self, sigma: &DensityMatrix) -> Result<(f64, HermitianMatrix)> {
        check_dim(self.dim(), sigma)?;
        require_full_rank(sigma)?;
        let a = self.alpha.value();
        let d = support_powers(sigma.eigenvalues(), self.alpha.sandwich_power());
        let n = self.dim();
        let mut b = DMatrix::<C64>::zeros(n, n);
        let mut terms = Vec::with_capacity(self.ensemble.len());
        for (p, rho) in self.terms() {
            let x = self
                .sandwiched(rho, sigma, &d)
                .expect("full-rank σ contains every support");
            let xs = eigh(&x)?;
            let q: Vec<f64> = xs
                .eigenvalues()
                .iter()
                .map(|&v| v.max(0.0).powf(a))
                .collect();
            let t: f64 = q.iter().sum();
            terms.push(p * log_over(t, a)?);
            b += recompose(xs.eigenvectors(), &q) * C64::new(p / t, 0.0);
        }
        let grad = sandwiched_gradient(sigma.spectral(), self.alpha, b)?;
        Ok((pairwise_sum(&terms), grad))
    }

    fn is_commuting_instance(&self) -> bool {
        self.ensemble.is_diagonal()
    }
}
