use super::{kernel_mass, scale_both_sides, support_powers, Alpha, Family};
use crate::error::{Error, Result};
use crate::linalg::eigvalsh;
use crate::linalg::HermitianMatrix;
use crate::states::{DensityMatrix, SUPPORT_TOL};

fn check_pair(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<()> {
    if rho.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch {
            expected: sigma.dim(),
            found: rho.dim(),
        });
    }
    Ok(())
}

/// `(1/(α−1)) log Tr[ρ^α σ^{1−α}]`, or `+∞` when `supp ρ ⊄ supp σ`.
pub fn petz_divergence(rho: &DensityMatrix, sigma: &DensityMatrix, alpha: Alpha) -> Result<f64> {
    alpha.require(Family::Petz)?;
    check_pair(rho, sigma)?;
    if rho == sigma {
        return Ok(0.0);
    }
    let s = sigma.spectral();
    let rotated = s.to_eigenbasis(rho.matrix().as_matrix());
    if kernel_mass(&rotated, s) > SUPPORT_TOL {
        return Ok(f64::INFINITY);
    }
    let a = alpha.value();
    let rho_alpha = rho.spectral().map_eigenvalues(|m| m.max(0.0).powf(a));
    let c = s.to_eigenbasis(rho_alpha.as_matrix());
    let w = support_powers(s.eigenvalues(), 1.0 - a);
    let t: f64 = (0..c.nrows()).map(|i| c[(i, i)].re * w[i]).sum();
    log_over(t, a)
}

/// `(1/(α−1)) log Tr[(σ^p ρ σ^p)^α]` with `p = (1−α)/(2α)`, or `+∞` when
/// `supp ρ ⊄ supp σ`. Negative powers of `σ` act on its support.
pub fn sandwiched_divergence(
    rho: &DensityMatrix,
    sigma: &DensityMatrix,
    alpha: Alpha,
) -> Result<f64> {
    alpha.require(Family::Sandwiched)?;
    check_pair(rho, sigma)?;
    if rho == sigma {
        return Ok(0.0);
    }
    let s = sigma.spectral();
    let mut x = s.to_eigenbasis(rho.matrix().as_matrix());
    if kernel_mass(&x, s) > SUPPORT_TOL {
        return Ok(f64::INFINITY);
    }
    scale_both_sides(
        &mut x,
        &support_powers(s.eigenvalues(), alpha.sandwich_power()),
    );
    let a = alpha.value();
    let nu = eigvalsh(&HermitianMatrix::symmetrized(x))?;
    let t: f64 = nu.iter().map(|&v| v.max(0.0).powf(a)).sum();
    log_over(t, a)
}

/// `Tr[ρ (log ρ − log σ)]`, or `+∞` when `supp ρ ⊄ supp σ`.
pub fn umegaki_relative_entropy(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    check_pair(rho, sigma)?;
    if rho == sigma {
        return Ok(0.0);
    }
    let s = sigma.spectral();
    let rotated = s.to_eigenbasis(rho.matrix().as_matrix());
    if kernel_mass(&rotated, s) > SUPPORT_TOL {
        return Ok(f64::INFINITY);
    }
    let entropy_term: f64 = rho
        .eigenvalues()
        .iter()
        .filter(|&&m| m > 0.0)
        .map(|&m| m * m.ln())
        .sum();
    let cross: f64 = s
        .eigenvalues()
        .iter()
        .enumerate()
        .filter(|(_, &l)| l >= super::KERNEL_TOL)
        .map(|(a, &l)| rotated[(a, a)].re * l.ln())
        .sum();
    Ok(entropy_term - cross)
}

pub(crate) fn log_over(t: f64, a: f64) -> Result<f64> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::Numerical(format!(
            "trace functional evaluated to {t}"
        )));
    }
    Ok(t.ln() / (a - 1.0))
}
