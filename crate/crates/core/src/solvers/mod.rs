//! Entropic mirror descent with the modified Polyak step, the Armijo
//! line-search variant, and the fixed-point iteration for Augustin
//! objectives.
//!
//! All solvers start from a full-rank density matrix, run a fixed iteration
//! budget, and return a [`SolveTrace`] with one record per visited iterate.

mod armijo;
mod fixed_point;
mod polyak;

use std::fmt;
use std::time::Instant;

use crate::error::{Error, Result};
use crate::linalg::{eigh, schatten_norm, HermitianMatrix, Spectral, C64};
use crate::objectives::{umegaki_relative_entropy, Objective};
use crate::states::DensityMatrix;

pub use armijo::{solve_armijo, ArmijoParams};
pub use fixed_point::{solve_fixed_point, FIXED_POINT_DIVERGENCE_GAP};
pub use polyak::{
    polyak_next_eta, polyak_update_delta, solve_polyak, solve_polyak_until, DualNorm, PolyakParams,
    PolyakState, STATIONARITY_TOL,
};

/// Smallest eigenvalue accepted by [`entropic_md_step`].
pub const MD_RANK_TOL: f64 = 1e-14;

/// Floor applied to eigenvalues before taking their logarithm.
pub const LOG_FLOOR: f64 = 1e-300;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SolverKind {
    Polyak,
    Armijo,
    FixedPoint,
}

impl SolverKind {
    pub fn name(&self) -> &'static str {
        match self {
            SolverKind::Polyak => "polyak",
            SolverKind::Armijo => "armijo",
            SolverKind::FixedPoint => "fixed-point",
        }
    }
}

impl fmt::Display for SolverKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Why a run ended.
#[derive(Clone, Debug, PartialEq)]
pub enum Termination {
    MaxIters,
    /// Gauge-fixed gradient norm fell below [`STATIONARITY_TOL`].
    Stationary,
    /// Line search exhausted its backtracking budget.
    Stalled,
    /// Fixed-point iteration flagged as non-convergent.
    Diverged(String),
    /// The value reached the caller's stopping target.
    TargetReached,
}

impl Termination {
    pub fn converged(&self) -> bool {
        !matches!(self, Termination::Diverged(_))
    }
}

impl fmt::Display for Termination {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Termination::MaxIters => f.write_str("max-iters"),
            Termination::Stationary => f.write_str("stationary"),
            Termination::Stalled => f.write_str("stalled"),
            Termination::Diverged(why) => write!(f, "diverged ({why})"),
            Termination::TargetReached => f.write_str("target-reached"),
        }
    }
}

/// State of one iterate `z_t`.
#[derive(Clone, Debug, PartialEq)]
pub struct IterationRecord {
    /// 1-based iteration index `t`.
    pub iter: usize,
    pub f: f64,
    /// `min_{t' ≤ t} f(z_{t'})`.
    pub best_f: f64,
    /// Step taken from `z_t`; `None` on the final record and for the
    /// fixed-point iteration.
    pub eta: Option<f64>,
    /// Polyak `δ_t`.
    pub delta_t: Option<f64>,
    /// `‖∇f‖_∞`.
    pub grad_dual_norm: f64,
    /// `‖∇f − (Tr ∇f / d) I‖_∞`.
    pub gauge_fixed_norm: f64,
    pub elapsed_ms: f64,
    /// Cumulative function-value evaluations.
    pub f_evals: usize,
    /// Cumulative gradient evaluations.
    pub g_evals: usize,
    /// Trace of the fixed-point map before renormalization.
    pub pre_normalization_trace: Option<f64>,
}

#[derive(Clone, Debug)]
pub struct SolveTrace {
    pub solver: SolverKind,
    pub records: Vec<IterationRecord>,
    pub final_iterate: DensityMatrix,
    pub best_iterate: DensityMatrix,
    pub best_value: f64,
    pub termination: Termination,
}

impl SolveTrace {
    pub fn iterations(&self) -> usize {
        self.records.len()
    }

    /// Total evaluations (function plus gradient) at the last record.
    pub fn total_evals(&self) -> usize {
        self.records.last().map_or(0, |r| r.f_evals + r.g_evals)
    }

    /// Cumulative evaluations spent when `f` first reached `target`.
    pub fn evals_to_reach(&self, target: f64) -> Option<usize> {
        self.records
            .iter()
            .find(|r| r.f <= target)
            .map(|r| r.f_evals + r.g_evals)
    }

    /// Index of the first record with `f ≤ target`.
    pub fn iterations_to_reach(&self, target: f64) -> Option<usize> {
        self.records.iter().find(|r| r.f <= target).map(|r| r.iter)
    }
}

/// Bookkeeping shared by the solver loops.
pub(crate) struct Recorder {
    start: Instant,
    records: Vec<IterationRecord>,
    best_value: f64,
    best_iterate: Option<DensityMatrix>,
    pub(crate) f_evals: usize,
    pub(crate) g_evals: usize,
}

pub(crate) struct Point<'a> {
    pub z: &'a DensityMatrix,
    pub f: f64,
    pub grad: &'a HermitianMatrix,
}

impl Recorder {
    pub(crate) fn new() -> Self {
        Self {
            start: Instant::now(),
            records: Vec::new(),
            best_value: f64::INFINITY,
            best_iterate: None,
            f_evals: 0,
            g_evals: 0,
        }
    }

    pub(crate) fn best_value(&self) -> f64 {
        self.best_value
    }

    pub(crate) fn push(
        &mut self,
        p: Point<'_>,
        eta: Option<f64>,
        delta_t: Option<f64>,
        pre_normalization_trace: Option<f64>,
    ) -> Result<()> {
        let (grad_dual_norm, gauge_fixed_norm) = dual_norms(p.grad)?;
        if p.f < self.best_value || self.best_iterate.is_none() {
            self.best_value = self.best_value.min(p.f);
            self.best_iterate = Some(p.z.clone());
        }
        self.records.push(IterationRecord {
            iter: self.records.len() + 1,
            f: p.f,
            best_f: self.best_value,
            eta,
            delta_t,
            grad_dual_norm,
            gauge_fixed_norm,
            elapsed_ms: self.start.elapsed().as_secs_f64() * 1e3,
            f_evals: self.f_evals,
            g_evals: self.g_evals,
            pre_normalization_trace,
        });
        Ok(())
    }

    pub(crate) fn finish(
        self,
        solver: SolverKind,
        final_iterate: DensityMatrix,
        termination: Termination,
    ) -> SolveTrace {
        SolveTrace {
            solver,
            best_iterate: self.best_iterate.unwrap_or_else(|| final_iterate.clone()),
            final_iterate,
            best_value: self.best_value,
            records: self.records,
            termination,
        }
    }
}

/// The default starting point `I/d` for `obj`.
pub fn maximally_mixed_start<O: Objective + ?Sized>(obj: &O) -> Result<DensityMatrix> {
    crate::states::maximally_mixed(obj.dim())
}

/// `(‖∇f‖_∞, ‖∇f − (Tr ∇f / d) I‖_∞)`.
pub fn dual_norms(grad: &HermitianMatrix) -> Result<(f64, f64)> {
    Ok((
        schatten_norm(grad, f64::INFINITY)?,
        schatten_norm(&grad.traceless_part(), f64::INFINITY)?,
    ))
}

pub(crate) fn evaluate<O: Objective + ?Sized>(
    obj: &O,
    z: &DensityMatrix,
    iteration: usize,
) -> Result<(f64, HermitianMatrix)> {
    if z.min_eigenvalue() <= 0.0 {
        return Err(Error::Boundary {
            min_eigenvalue: z.min_eigenvalue(),
            hint: "iterate lost full rank",
        }
        .at_iteration(iteration));
    }
    let (f, g) = obj
        .value_and_grad(z)
        .map_err(|e| e.at_iteration(iteration))?;
    if !f.is_finite() {
        return Err(Error::Numerical(format!("objective value {f}")).at_iteration(iteration));
    }
    Ok((f, g))
}

pub(crate) fn check_start<O: Objective + ?Sized>(obj: &O, z1: &DensityMatrix) -> Result<()> {
    if z1.dim() != obj.dim() {
        return Err(Error::DimensionMismatch {
            expected: obj.dim(),
            found: z1.dim(),
        });
    }
    if z1.min_eigenvalue() <= crate::objectives::KERNEL_TOL {
        return Err(Error::Boundary {
            min_eigenvalue: z1.min_eigenvalue(),
            hint: "solvers need a full-rank starting point",
        });
    }
    Ok(())
}

/// `z' = exp(log z − η g) / Tr[exp(log z − η g)]`.
///
/// Computed in the eigenbasis of `z`, with the exponent shifted by its
/// largest eigenvalue before exponentiating.
pub fn entropic_md_step(z: &DensityMatrix, g: &HermitianMatrix, eta: f64) -> Result<DensityMatrix> {
    if g.dim() != z.dim() {
        return Err(Error::DimensionMismatch {
            expected: z.dim(),
            found: g.dim(),
        });
    }
    if !(eta >= 0.0) || !eta.is_finite() {
        return Err(Error::Parameter(format!(
            "step size must be finite and >= 0, got {eta}"
        )));
    }
    if g.as_matrix()
        .iter()
        .any(|v| !v.re.is_finite() || !v.im.is_finite())
    {
        return Err(Error::Numerical("gradient has non-finite entries".into()));
    }
    if z.min_eigenvalue() <= MD_RANK_TOL {
        return Err(Error::Boundary {
            min_eigenvalue: z.min_eigenvalue(),
            hint: "mirror step needs a full-rank iterate",
        });
    }
    if eta == 0.0 {
        return Ok(z.clone());
    }
    let s = z.spectral();
    let mut h = s.to_eigenbasis(g.as_matrix()) * C64::new(-eta, 0.0);
    for (k, &l) in s.eigenvalues().iter().enumerate() {
        h[(k, k)] += l.max(LOG_FLOOR).ln();
    }
    let hs = eigh(&HermitianMatrix::symmetrized(h))?;
    let top = hs.max_eigenvalue();
    let w: Vec<f64> = hs.eigenvalues().iter().map(|&m| (m - top).exp()).collect();
    let total: f64 = w.iter().sum();
    let w: Vec<f64> = w.iter().map(|x| x / total).collect();
    let vectors = s.eigenvectors() * hs.eigenvectors();
    Ok(DensityMatrix::from_spectral(Spectral::from_parts(
        w, vectors,
    )))
}

/// Bregman divergence of the negative von Neumann entropy, which is the
/// quantum relative entropy `D(x‖y)`.
pub fn bregman_vn(x: &DensityMatrix, y: &DensityMatrix) -> Result<f64> {
    umegaki_relative_entropy(x, y)
}
