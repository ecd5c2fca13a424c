use super::{
    check_start, entropic_md_step, evaluate, Point, Recorder, SolveTrace, SolverKind, Termination,
};
use crate::error::{Error, Result};
use crate::objectives::Objective;
use crate::states::DensityMatrix;

/// Gauge-fixed gradient norms below this end the run as stationary.
pub const STATIONARITY_TOL: f64 = 1e-14;

/// Gradient norm in the step-size denominator.
///
/// Both are valid dual norms for the entropic geometry, since the pairing
/// with a difference of density matrices ignores multiples of `I`.
/// `Operator` is never below 1 for these objectives (`Tr[σ∇f] = −1`), which
/// caps `η_t` at `f_t − f̃_t`. `GaugeFixed` tends to zero at an interior
/// minimizer, so steps grow without bound near the optimum.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum DualNorm {
    /// `‖∇f‖_∞`.
    #[default]
    Operator,
    /// `‖∇f − (Tr ∇f / d) I‖_∞`.
    GaugeFixed,
}

impl DualNorm {
    pub fn name(&self) -> &'static str {
        match self {
            DualNorm::Operator => "operator",
            DualNorm::GaugeFixed => "gauge-fixed",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PolyakParams {
    pub delta1: f64,
    /// Target accuracy and floor of `δ_t`.
    ///
    /// Near an interior minimizer `∇f → −I`, so `‖∇f‖_∞ → 1` while the
    /// decrease per step vanishes. `δ_t` then contracts to this floor and
    /// the steps settle at `η_t ≈ δ`; a tiny floor means slow final
    /// progress.
    pub delta: f64,
    pub gamma: f64,
    pub beta: f64,
    pub c: f64,
    pub max_iters: usize,
    pub dual_norm: DualNorm,
}

impl PolyakParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Parameter(msg));
        if !(self.delta > 0.0) || !self.delta.is_finite() {
            return bad(format!("delta must be positive, got {}", self.delta));
        }
        if !(self.delta1 >= self.delta) || !self.delta1.is_finite() {
            return bad(format!(
                "delta1 = {} must be >= delta = {}",
                self.delta1, self.delta
            ));
        }
        if !(self.gamma >= 1.0) || !self.gamma.is_finite() {
            return bad(format!("gamma must be >= 1, got {}", self.gamma));
        }
        if !(self.beta > 0.0 && self.beta < 1.0) {
            return bad(format!("beta must lie in (0, 1), got {}", self.beta));
        }
        if !(self.c > 0.5) || !self.c.is_finite() {
            return bad(format!("c must exceed 1/2, got {}", self.c));
        }
        Ok(())
    }
}

/// `δ_t`, the running best value, and `f̃_t = best − δ_t`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PolyakState {
    pub delta_t: f64,
    pub best_value: f64,
    pub f_tilde: f64,
}

impl PolyakState {
    /// State after observing `f(z_1)`.
    pub fn start(params: &PolyakParams, f1: f64) -> Self {
        Self {
            delta_t: params.delta1,
            best_value: f1,
            f_tilde: f1 - params.delta1,
        }
    }
}

/// `η_t = (f_t − f̃_t) / (c ‖g‖²)`, or `None` when `‖g‖` is below
/// [`STATIONARITY_TOL`].
pub fn polyak_next_eta(state: &PolyakState, f_t: f64, grad_dual_norm: f64, c: f64) -> Option<f64> {
    if grad_dual_norm < STATIONARITY_TOL {
        return None;
    }
    Some((f_t - state.f_tilde) / (c * grad_dual_norm * grad_dual_norm))
}

/// `δ_{t+1} = γ δ_t` if `f(z_{t+1}) ≤ f̃_t`, else `max(β δ_t, δ)`; then
/// refreshes the best value and `f̃_{t+1}`.
pub fn polyak_update_delta(state: &PolyakState, f_next: f64, params: &PolyakParams) -> PolyakState {
    let delta_t = if f_next <= state.f_tilde {
        params.gamma * state.delta_t
    } else {
        (params.beta * state.delta_t).max(params.delta)
    };
    let best_value = state.best_value.min(f_next);
    PolyakState {
        delta_t,
        best_value,
        f_tilde: best_value - delta_t,
    }
}

pub fn solve_polyak<O: Objective + ?Sized>(
    obj: &O,
    z1: &DensityMatrix,
    params: &PolyakParams,
) -> Result<SolveTrace> {
    solve_polyak_until(obj, z1, params, None)
}

/// [`solve_polyak`] that also stops at the first iterate with `f ≤ target`.
pub fn solve_polyak_until<O: Objective + ?Sized>(
    obj: &O,
    z1: &DensityMatrix,
    params: &PolyakParams,
    target: Option<f64>,
) -> Result<SolveTrace> {
    params.validate()?;
    check_start(obj, z1)?;
    let mut rec = Recorder::new();
    let mut z = z1.clone();
    let (mut f, mut g) = evaluate(obj, &z, 1)?;
    rec.f_evals += 1;
    rec.g_evals += 1;
    let mut state = PolyakState::start(params, f);
    for t in 1..=params.max_iters {
        if target.is_some_and(|v| f <= v) {
            rec.push(
                Point { z: &z, f, grad: &g },
                None,
                Some(state.delta_t),
                None,
            )?;
            return Ok(rec.finish(SolverKind::Polyak, z, Termination::TargetReached));
        }
        let (operator, gauge) = super::dual_norms(&g)?;
        let norm = match params.dual_norm {
            DualNorm::Operator => operator,
            DualNorm::GaugeFixed => gauge,
        };
        let eta = if gauge < STATIONARITY_TOL {
            None
        } else {
            polyak_next_eta(&state, f, norm, params.c)
        };
        let Some(eta) = eta else {
            rec.push(
                Point { z: &z, f, grad: &g },
                None,
                Some(state.delta_t),
                None,
            )?;
            return Ok(rec.finish(SolverKind::Polyak, z, Termination::Stationary));
        };
        rec.push(
            Point { z: &z, f, grad: &g },
            Some(eta),
            Some(state.delta_t),
            None,
        )?;
        z = entropic_md_step(&z, &g, eta).map_err(|e| e.at_iteration(t))?;
        (f, g) = evaluate(obj, &z, t + 1)?;
        rec.f_evals += 1;
        rec.g_evals += 1;
        state = polyak_update_delta(&state, f, params);
    }
    rec.push(
        Point { z: &z, f, grad: &g },
        None,
        Some(state.delta_t),
        None,
    )?;
    Ok(rec.finish(SolverKind::Polyak, z, Termination::MaxIters))
}
