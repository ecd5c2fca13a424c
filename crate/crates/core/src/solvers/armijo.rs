use super::{
    check_start, entropic_md_step, evaluate, Point, Recorder, SolveTrace, SolverKind, Termination,
};
use crate::error::{Error, Result};
use crate::linalg::trace_inner;
use crate::objectives::Objective;
use crate::states::DensityMatrix;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ArmijoParams {
    /// Initial trial step `ᾱ`.
    pub alpha_bar: f64,
    /// Backtracking ratio.
    pub r: f64,
    /// Sufficient-decrease coefficient.
    pub tau: f64,
    pub max_iters: usize,
    pub max_backtracks: usize,
}

impl ArmijoParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha_bar > 0.0) || !self.alpha_bar.is_finite() {
            return Err(Error::Parameter(format!(
                "alpha_bar must be positive, got {}",
                self.alpha_bar
            )));
        }
        for (name, v) in [("r", self.r), ("tau", self.tau)] {
            if !(v > 0.0 && v < 1.0) {
                return Err(Error::Parameter(format!(
                    "{name} must lie in (0, 1), got {v}"
                )));
            }
        }
        if self.max_backtracks == 0 {
            return Err(Error::Parameter("max_backtracks must be at least 1".into()));
        }
        Ok(())
    }
}

/// Mirror descent with backtracking: from `η = ᾱ`, shrink `η ← rη` until
/// `f(z(η)) ≤ f(z) + τ ⟨∇f(z), z(η) − z⟩`.
pub fn solve_armijo<O: Objective + ?Sized>(
    obj: &O,
    z1: &DensityMatrix,
    params: &ArmijoParams,
) -> Result<SolveTrace> {
    params.validate()?;
    check_start(obj, z1)?;
    let mut rec = Recorder::new();
    let mut z = z1.clone();
    let (mut f, mut g) = evaluate(obj, &z, 1)?;
    rec.f_evals += 1;
    rec.g_evals += 1;
    for t in 1..=params.max_iters {
        let mut eta = params.alpha_bar;
        let mut accepted = None;
        // Trials are charged after this record, which counts the cost of reaching `z`.
        let mut trials = 0;
        for _ in 0..params.max_backtracks {
            let trial = entropic_md_step(&z, &g, eta).map_err(|e| e.at_iteration(t))?;
            let ft = obj.value(&trial).map_err(|e| e.at_iteration(t))?;
            trials += 1;
            let slope = trace_inner(&g, &(trial.matrix() - z.matrix()))?;
            if ft <= f + params.tau * slope {
                accepted = Some(trial);
                break;
            }
            eta *= params.r;
        }
        let Some(next) = accepted else {
            rec.push(Point { z: &z, f, grad: &g }, Some(0.0), None, None)?;
            rec.f_evals += trials;
            return Ok(rec.finish(SolverKind::Armijo, z, Termination::Stalled));
        };
        rec.push(Point { z: &z, f, grad: &g }, Some(eta), None, None)?;
        rec.f_evals += trials;
        z = next;
        (f, g) = evaluate(obj, &z, t + 1)?;
        // The value at the accepted point is already known from the search.
        rec.g_evals += 1;
    }
    rec.push(Point { z: &z, f, grad: &g }, None, None, None)?;
    Ok(rec.finish(SolverKind::Armijo, z, Termination::MaxIters))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parameter_validation() {
        let ok = ArmijoParams {
            alpha_bar: 10.0,
            r: 0.5,
            tau: 0.5,
            max_iters: 5,
            max_backtracks: 50,
        };
        assert!(ok.validate().is_ok());
        assert!(ArmijoParams { r: 1.0, ..ok }.validate().is_err());
        assert!(ArmijoParams { tau: 0.0, ..ok }.validate().is_err());
        assert!(ArmijoParams {
            alpha_bar: -1.0,
            ..ok
        }
        .validate()
        .is_err());
        assert!(ArmijoParams {
            max_backtracks: 0,
            ..ok
        }
        .validate()
        .is_err());
    }
}
