use nalgebra::DMatrix;

use super::divergence::log_over;
use super::{
    check_dim, pairwise_sum, recompose, require_full_rank, sandwiched_gradient, support_powers,
    Alpha, Family, Objective, ObjectiveKind, KERNEL_TOL,
};
use crate::error::{Error, Result};
use crate::linalg::{eigh, eigvalsh, HermitianMatrix, C64};
use crate::states::{BipartiteState, DensityMatrix, PSD_REJECT_TOL, SUPPORT_TOL};

/// `σ ↦ D*_α(ρ_AB ‖ τ_A ⊗ σ)`.
///
/// `ρ_AB` is stored rotated into `τ_A`'s eigenbasis on `A`, so each
/// evaluation only rotates the `B` factor.
#[derive(Clone, Debug)]
pub struct GeneralizedSandwichedInfo {
    kind: ObjectiveKind,
    alpha: Alpha,
    state: BipartiteState,
    tau: HermitianMatrix,
    /// `(U_τ ⊗ I)† ρ_AB (U_τ ⊗ I)`.
    rotated: DMatrix<C64>,
    /// `t_i^p` for the eigenvalues `t_i` of `τ_A`, zero on its kernel.
    tau_powers: Vec<f64>,
}

pub fn make_generalized_sandwiched_info(
    state: BipartiteState,
    tau: HermitianMatrix,
    alpha: Alpha,
) -> Result<GeneralizedSandwichedInfo> {
    build(state, tau, alpha, ObjectiveKind::GeneralizedSandwichedInfo)
}

/// `τ_A = I_A`. The conditional entropy is the negated minimum.
pub fn make_conditional_entropy(
    state: BipartiteState,
    alpha: Alpha,
) -> Result<GeneralizedSandwichedInfo> {
    let tau = HermitianMatrix::identity(state.dim_a());
    build(state, tau, alpha, ObjectiveKind::ConditionalEntropy)
}

/// `τ_A = ρ_A`.
pub fn make_sandwiched_renyi_info(
    state: BipartiteState,
    alpha: Alpha,
) -> Result<GeneralizedSandwichedInfo> {
    let tau = state.reduced_a()?.matrix().clone();
    build(state, tau, alpha, ObjectiveKind::SandwichedRenyiInfo)
}

fn build(
    state: BipartiteState,
    tau: HermitianMatrix,
    alpha: Alpha,
    kind: ObjectiveKind,
) -> Result<GeneralizedSandwichedInfo> {
    alpha.require(Family::Sandwiched)?;
    let (da, db) = (state.dim_a(), state.dim_b());
    if tau.dim() != da {
        return Err(Error::DimensionMismatch {
            expected: da,
            found: tau.dim(),
        });
    }
    let ts = eigh(&tau)?;
    if ts.min_eigenvalue() < -PSD_REJECT_TOL {
        return Err(Error::Invariant {
            invariant: "positive semidefinite",
            detail: format!("tau has eigenvalue {:e}", ts.min_eigenvalue()),
        });
    }
    let rho_a = state.reduced_a()?;
    let ra = ts.to_eigenbasis(rho_a.matrix().as_matrix());
    let outside: f64 = (0..da)
        .filter(|&i| ts.eigenvalues()[i] < KERNEL_TOL)
        .map(|i| ra[(i, i)].re)
        .sum();
    if outside > SUPPORT_TOL {
        return Err(Error::Invariant {
            invariant: "support containment",
            detail: format!("rho_A has mass {outside:e} outside the support of tau"),
        });
    }
    let w = ts
        .eigenvectors()
        .kronecker(&DMatrix::<C64>::identity(db, db));
    let rotated = w.adjoint() * state.state().matrix().as_matrix() * &w;
    let tau_powers = support_powers(ts.eigenvalues(), alpha.sandwich_power());
    Ok(GeneralizedSandwichedInfo {
        kind,
        alpha,
        state,
        tau,
        rotated,
        tau_powers,
    })
}

impl GeneralizedSandwichedInfo {
    pub fn state(&self) -> &BipartiteState {
        &self.state
    }

    pub fn tau(&self) -> &HermitianMatrix {
        &self.tau
    }

    /// `D (I ⊗ U)† ρ̃ (I ⊗ U) D` with `D = τ^p ⊗ σ^p` (diagonal in the
    /// rotated basis), or `None` on a support violation.
    fn sandwiched(&self, sigma: &DensityMatrix) -> Option<HermitianMatrix> {
        let (da, db) = (self.state.dim_a(), self.state.dim_b());
        let s = sigma.spectral();
        let u = s.eigenvectors();
        let ua = u.adjoint();
        let n = da * db;
        let mut x = DMatrix::<C64>::zeros(n, n);
        for a in 0..da {
            for b in a..da {
                let block = &ua * self.rotated.view((a * db, b * db), (db, db)) * u;
                x.view_mut((a * db, b * db), (db, db)).copy_from(&block);
                if b != a {
                    x.view_mut((b * db, a * db), (db, db))
                        .copy_from(&block.adjoint());
                }
            }
        }
        let lam = s.eigenvalues();
        if lam[0] < KERNEL_TOL {
            let mass: f64 = (0..da)
                .flat_map(|a| (0..db).map(move |j| (a, j)))
                .filter(|&(_, j)| lam[j] < KERNEL_TOL)
                .map(|(a, j)| x[(a * db + j, a * db + j)].re)
                .sum();
            if mass > SUPPORT_TOL {
                return None;
            }
        }
        let sp = support_powers(lam, self.alpha.sandwich_power());
        let d: Vec<f64> = self
            .tau_powers
            .iter()
            .flat_map(|&t| sp.iter().map(move |&l| t * l))
            .collect();
        super::scale_both_sides(&mut x, &d);
        Some(HermitianMatrix::symmetrized(x))
    }
}

impl Objective for GeneralizedSandwichedInfo {
    fn dim(&self) -> usize {
        self.state.dim_b()
    }

    fn kind(&self) -> ObjectiveKind {
        self.kind
    }

    fn alpha(&self) -> Alpha {
        self.alpha
    }

    fn value(&self, sigma: &DensityMatrix) -> Result<f64> {
        check_dim(self.dim(), sigma)?;
        let Some(x) = self.sandwiched(sigma) else {
            return Ok(f64::INFINITY);
        };
        let a = self.alpha.value();
        let q: Vec<f64> = eigvalsh(&x)?.iter().map(|&v| v.max(0.0).powf(a)).collect();
        log_over(pairwise_sum(&q), a)
    }

    fn value_and_grad(&self, sigma: &DensityMatrix) -> Result<(f64, HermitianMatrix)> {
        check_dim(self.dim(), sigma)?;
        require_full_rank(sigma)?;
        let x = self
            .sandwiched(sigma)
            .expect("full-rank σ contains every support");
        let a = self.alpha.value();
        let xs = eigh(&x)?;
        let q: Vec<f64> = xs
            .eigenvalues()
            .iter()
            .map(|&v| v.max(0.0).powf(a))
            .collect();
        let t = pairwise_sum(&q);
        let value = log_over(t, a)?;
        let full = recompose(xs.eigenvectors(), &q);
        let (da, db) = (self.state.dim_a(), self.state.dim_b());
        let mut b = DMatrix::<C64>::zeros(db, db);
        for k in 0..da {
            b += full.view((k * db, k * db), (db, db));
        }
        b /= C64::new(t, 0.0);
        let grad = sandwiched_gradient(sigma.spectral(), self.alpha, b)?;
        Ok((value, grad))
    }

    fn is_commuting_instance(&self) -> bool {
        self.state.state().matrix().is_diagonal() && self.tau.is_diagonal()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{kron, trace_inner};
    use crate::objectives::sandwiched_divergence;
    use crate::states::{maximally_mixed, random_bipartite, random_density, Seed};

    #[test]
    fn matches_direct_divergence() {
        let st = random_bipartite(2, 3, Seed(1)).unwrap();
        let sigma = random_density(3, Seed(2)).unwrap();
        for a in [0.5, 2.0, 10.0] {
            let alpha = Alpha::sandwiched(a).unwrap();
            let rho_a = st.reduced_a().unwrap();
            let target = DensityMatrix::new(kron(rho_a.matrix(), sigma.matrix())).unwrap();
            let expect = sandwiched_divergence(st.state(), &target, alpha).unwrap();
            let obj = make_sandwiched_renyi_info(st.clone(), alpha).unwrap();
            assert!(
                (obj.value(&sigma).unwrap() - expect).abs() < 1e-11,
                "alpha {a}"
            );
            assert!((obj.value_and_grad(&sigma).unwrap().0 - expect).abs() < 1e-11);
        }
    }

    #[test]
    fn maximally_mixed_conditional_value() {
        for (da, db) in [(2, 2), (3, 2), (2, 4)] {
            let st = BipartiteState::new(maximally_mixed(da * db).unwrap(), da, db).unwrap();
            let obj = make_conditional_entropy(st, Alpha::sandwiched(2.0).unwrap()).unwrap();
            let v = obj.value(&maximally_mixed(db).unwrap()).unwrap();
            assert!((v + (da as f64).ln()).abs() < 1e-13);
        }
    }

    #[test]
    fn product_state_renyi_info_vanishes_at_marginal() {
        let ra = random_density(2, Seed(3)).unwrap();
        let rb = random_density(3, Seed(4)).unwrap();
        let st = BipartiteState::product(&ra, &rb).unwrap();
        let obj = make_sandwiched_renyi_info(st, Alpha::sandwiched(0.5).unwrap()).unwrap();
        let (v, g) = obj.value_and_grad(&rb).unwrap();
        assert!(v.abs() < 1e-12);
        assert!((&g + &HermitianMatrix::identity(3)).max_abs_entry() < 1e-9);
    }

    #[test]
    fn trace_identity() {
        let st = random_bipartite(3, 4, Seed(7)).unwrap();
        let sigma = random_density(4, Seed(8)).unwrap();
        for a in [0.5, 2.0, 10.0] {
            let alpha = Alpha::sandwiched(a).unwrap();
            for obj in [
                make_conditional_entropy(st.clone(), alpha).unwrap(),
                make_sandwiched_renyi_info(st.clone(), alpha).unwrap(),
            ] {
                let (_, g) = obj.value_and_grad(&sigma).unwrap();
                let t = trace_inner(sigma.matrix(), &g).unwrap();
                assert!((t + 1.0).abs() < 1e-10, "{} alpha {a}: {t}", obj.kind());
            }
        }
    }

    #[test]
    fn tau_must_cover_rho_a() {
        let st = random_bipartite(2, 2, Seed(1)).unwrap();
        let tau = HermitianMatrix::from_real_diagonal(&[1.0, 0.0]);
        assert!(matches!(
            make_generalized_sandwiched_info(st, tau, Alpha::sandwiched(2.0).unwrap()),
            Err(Error::Invariant { .. })
        ));
    }
}
