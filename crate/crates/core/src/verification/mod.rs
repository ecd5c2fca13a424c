//! Independent checks: central finite differences, brute-force grid
//! minimization on small instances, and the commuting scalar formula.

mod fixtures;
mod grid;

use crate::error::{Error, Result};
use crate::linalg::{eigvalsh, trace_inner, HermitianMatrix};
use crate::objectives::{Alpha, Objective, KERNEL_TOL};
use crate::states::{random_density, sample_hermitian, DensityMatrix, Seed, SUPPORT_TOL};

pub use fixtures::{FixtureEntry, FixtureStore};
pub use grid::{bloch_grid_oracle, bloch_state, simplex_grid_oracle, OracleResult, BLOCH_RADIUS};

/// Largest `|Tr Δ|` accepted for a finite-difference direction.
pub const TRACELESS_TOL: f64 = 1e-12;

/// `(f(σ + εΔ) − f(σ − εΔ)) / (2ε)` for traceless Hermitian `Δ`.
pub fn finite_diff_directional<O: Objective + ?Sized>(
    obj: &O,
    sigma: &DensityMatrix,
    direction: &HermitianMatrix,
    epsilon: f64,
) -> Result<f64> {
    if direction.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch {
            expected: sigma.dim(),
            found: direction.dim(),
        });
    }
    if direction.trace().abs() > TRACELESS_TOL {
        return Err(Error::Parameter(format!(
            "direction must be traceless, trace is {:e}",
            direction.trace()
        )));
    }
    if !(epsilon > 0.0) {
        return Err(Error::Parameter(format!(
            "epsilon must be positive, got {epsilon}"
        )));
    }
    let shifted = |sign: f64| -> Result<DensityMatrix> {
        let m = sigma.matrix() + &(direction * (sign * epsilon));
        let min = eigvalsh(&m)?[0];
        if min <= KERNEL_TOL {
            return Err(Error::Boundary {
                min_eigenvalue: min,
                hint: "the perturbed point left the full-rank set; use a smaller epsilon",
            });
        }
        DensityMatrix::new(m)
    };
    let plus = obj.value(&shifted(1.0)?)?;
    let minus = obj.value(&shifted(-1.0)?)?;
    Ok((plus - minus) / (2.0 * epsilon))
}

/// Weight of `I/d` in [`well_conditioned_state`].
pub const CONDITIONING_MIX: f64 = 0.2;

/// `0.8 ρ + 0.2 I/d` for a Hilbert–Schmidt random `ρ`; its eigenvalues are
/// at least `0.2/d`, which keeps central differences accurate.
pub fn well_conditioned_state(d: usize, seed: Seed) -> Result<DensityMatrix> {
    let rho = random_density(d, seed)?;
    let shift = &HermitianMatrix::identity(d) * (CONDITIONING_MIX / d as f64);
    DensityMatrix::new(&(rho.matrix() * (1.0 - CONDITIONING_MIX)) + &shift)
}

/// Random traceless Hermitian matrix with unit Frobenius norm.
pub fn random_traceless_direction(d: usize, seed: Seed) -> Result<HermitianMatrix> {
    let h = sample_hermitian(d, &mut seed.rng())?.traceless_part();
    let n = h.frobenius_norm();
    if !(n > 0.0) {
        return Err(Error::Parameter(format!(
            "no nonzero traceless direction in dimension {d}"
        )));
    }
    Ok(&h * (1.0 / n))
}

/// Relative gradient error `|⟨∇f, Δ⟩ − FD| / max(1, |⟨∇f, Δ⟩|)`.
pub fn gradient_relative_error<O: Objective + ?Sized>(
    obj: &O,
    sigma: &DensityMatrix,
    direction: &HermitianMatrix,
    epsilon: f64,
) -> Result<f64> {
    let (_, g) = obj.value_and_grad(sigma)?;
    let analytic = trace_inner(&g, direction)?;
    let fd = finite_diff_directional(obj, sigma, direction, epsilon)?;
    Ok((analytic - fd).abs() / analytic.abs().max(1.0))
}

/// `(1/(α−1)) log Σ_i p_i^α q_i^{1−α}`, the common value of both divergence
/// families on commuting arguments; `+∞` when `supp p ⊄ supp q`.
pub fn classical_divergence(p: &[f64], q: &[f64], alpha: Alpha) -> Result<f64> {
    if p.len() != q.len() {
        return Err(Error::DimensionMismatch {
            expected: q.len(),
            found: p.len(),
        });
    }
    for v in [p, q] {
        let total: f64 = v.iter().sum();
        if v.iter().any(|&x| !(x >= 0.0)) || (total - 1.0).abs() > crate::states::TRACE_TOL {
            return Err(Error::Invariant {
                invariant: "probability vector",
                detail: format!("entries {v:?} sum to {total}"),
            });
        }
    }
    let outside: f64 = p
        .iter()
        .zip(q)
        .filter(|(_, &qi)| qi < KERNEL_TOL)
        .map(|(&pi, _)| pi)
        .sum();
    if outside > SUPPORT_TOL {
        return Ok(f64::INFINITY);
    }
    let a = alpha.value();
    let s: f64 = p
        .iter()
        .zip(q)
        .filter(|(&pi, &qi)| pi > 0.0 && qi >= KERNEL_TOL)
        .map(|(&pi, &qi)| pi.powf(a) * qi.powf(1.0 - a))
        .sum();
    Ok(s.ln() / (a - 1.0))
}
