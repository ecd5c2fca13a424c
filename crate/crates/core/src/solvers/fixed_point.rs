use super::{check_start, evaluate, Point, Recorder, SolveTrace, SolverKind, Termination};
use crate::error::{Error, Result};
use crate::linalg::eigh;
use crate::objectives::{Objective, KERNEL_TOL};
use crate::states::DensityMatrix;

/// A rise of `f` by more than this above its running minimum flags the run
/// as non-convergent.
pub const FIXED_POINT_DIVERGENCE_GAP: f64 = 10.0;

/// `σ_{t+1} = −σ_t^{1/2} ∇f(σ_t) σ_t^{1/2}`, clipped to be PSD and
/// renormalized. Only the two Augustin objectives are accepted.
pub fn solve_fixed_point<O: Objective + ?Sized>(
    obj: &O,
    z1: &DensityMatrix,
    max_iters: usize,
) -> Result<SolveTrace> {
    if !obj.kind().is_augustin() {
        return Err(Error::Parameter(format!(
            "the fixed-point iteration applies to Augustin objectives, not {}",
            obj.kind()
        )));
    }
    check_start(obj, z1)?;
    let mut rec = Recorder::new();
    let mut z = z1.clone();
    let (mut f, mut g) = evaluate(obj, &z, 1)?;
    rec.f_evals += 1;
    rec.g_evals += 1;
    let mut pre_trace = None;
    for t in 1..=max_iters {
        rec.push(Point { z: &z, f, grad: &g }, None, None, pre_trace)?;
        let root = z.spectral().map_eigenvalues(|l| l.max(0.0).sqrt());
        let image = -&g.sandwich(&root);
        let s = eigh(&image).map_err(|e| e.at_iteration(t))?;
        let trace: f64 = s.eigenvalues().iter().sum();
        pre_trace = Some(trace);
        let clipped: Vec<f64> = s.eigenvalues().iter().map(|&l| l.max(0.0)).collect();
        let total: f64 = clipped.iter().sum();
        if !(total > 0.0) || !total.is_finite() {
            let why = format!("map produced a matrix with trace {total}");
            return Ok(rec.finish(SolverKind::FixedPoint, z, Termination::Diverged(why)));
        }
        let w: Vec<f64> = clipped.iter().map(|l| l / total).collect();
        if w[0] <= KERNEL_TOL {
            let why = format!("iterate {} is rank-deficient", t + 1);
            return Ok(rec.finish(SolverKind::FixedPoint, z, Termination::Diverged(why)));
        }
        let next = DensityMatrix::from_spectral(crate::linalg::Spectral::from_parts(
            w,
            s.eigenvectors().clone(),
        ));
        let fv = match evaluate(obj, &next, t + 1) {
            Ok(v) => v,
            Err(e) if matches!(e.root(), Error::Numerical(_) | Error::Boundary { .. }) => {
                let why = e.to_string();
                return Ok(rec.finish(SolverKind::FixedPoint, z, Termination::Diverged(why)));
            }
            Err(e) => return Err(e),
        };
        rec.f_evals += 1;
        rec.g_evals += 1;
        z = next;
        (f, g) = fv;
        if f > rec.best_value() + FIXED_POINT_DIVERGENCE_GAP {
            rec.push(Point { z: &z, f, grad: &g }, None, None, pre_trace)?;
            let why = format!(
                "f rose to {f} above its running minimum {}",
                rec.best_value()
            );
            return Ok(rec.finish(SolverKind::FixedPoint, z, Termination::Diverged(why)));
        }
    }
    rec.push(Point { z: &z, f, grad: &g }, None, None, pre_trace)?;
    Ok(rec.finish(SolverKind::FixedPoint, z, Termination::MaxIters))
}
