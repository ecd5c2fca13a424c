use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linalg::{HermitianMatrix, C64};
use crate::objectives::{Objective, KERNEL_TOL};
use crate::solvers::dual_norms;
use crate::states::DensityMatrix;

/// Bloch vectors are confined to a ball of this radius.
pub const BLOCH_RADIUS: f64 = 1.0 - 1e-6;

/// Best point of a grid search.
#[derive(Clone, Debug)]
pub struct OracleResult {
    pub optimum_value: f64,
    pub optimizer: DensityMatrix,
    /// Grid spacing of the (coarse) search.
    pub resolution: f64,
    /// `2 · resolution · max ‖∇f − (Tr ∇f/d) I‖_∞` over the optimizer and
    /// its full-rank grid neighbours; infinite when none is full rank.
    pub tolerance: f64,
    pub evaluations: usize,
}

fn tolerance_from<O: Objective + ?Sized>(
    obj: &O,
    points: impl IntoIterator<Item = DensityMatrix>,
    resolution: f64,
) -> Result<f64> {
    let mut worst: Option<f64> = None;
    for p in points {
        if p.min_eigenvalue() <= KERNEL_TOL {
            continue;
        }
        let (_, g) = obj.value_and_grad(&p)?;
        let n = dual_norms(&g)?.0;
        worst = Some(worst.map_or(n, |w: f64| w.max(n)));
    }
    Ok(worst.map_or(f64::INFINITY, |w| 2.0 * resolution * w))
}

/// Exhaustive search over diagonal `σ` on the simplex grid with the given
/// spacing. Requires a commuting instance of dimension at most 3.
pub fn simplex_grid_oracle<O: Objective + ?Sized>(
    obj: &O,
    resolution: f64,
) -> Result<OracleResult> {
    let d = obj.dim();
    if d == 0 || d > 3 {
        return Err(Error::Parameter(format!(
            "simplex grid supports d <= 3, got {d}"
        )));
    }
    if !obj.is_commuting_instance() {
        return Err(Error::Parameter(
            "simplex grid search needs an instance diagonal in the standard basis".into(),
        ));
    }
    let steps = (1.0 / resolution).round();
    if !(resolution > 0.0) || (steps * resolution - 1.0).abs() > 1e-9 || steps > 1e6 {
        return Err(Error::Parameter(format!(
            "resolution must be 1/N for an integer N <= 1e6, got {resolution}"
        )));
    }
    let n = steps as usize;
    let point = |k: &[usize]| {
        DensityMatrix::from_diagonal(&k.iter().map(|&v| v as f64 / steps).collect::<Vec<_>>())
    };

    let mut compositions: Vec<Vec<usize>> = Vec::new();
    match d {
        1 => compositions.push(vec![n]),
        2 => compositions.extend((0..=n).map(|i| vec![i, n - i])),
        _ => {
            for i in 0..=n {
                for j in 0..=(n - i) {
                    compositions.push(vec![i, j, n - i - j]);
                }
            }
        }
    }
    let mut best: Option<(f64, usize)> = None;
    for (idx, k) in compositions.iter().enumerate() {
        let v = obj.value(&point(k)?)?;
        if best.is_none_or(|(b, _)| v < b) {
            best = Some((v, idx));
        }
    }
    let (value, idx) = best.expect("grid is nonempty");
    let k = &compositions[idx];
    let mut around = vec![point(k)?];
    for i in 0..d {
        for j in 0..d {
            if i != j && k[j] > 0 {
                let mut nb = k.clone();
                nb[i] += 1;
                nb[j] -= 1;
                around.push(point(&nb)?);
            }
        }
    }
    Ok(OracleResult {
        optimum_value: value,
        optimizer: point(k)?,
        resolution,
        tolerance: tolerance_from(obj, around, resolution)?,
        evaluations: compositions.len(),
    })
}

/// `(I + xX + yY + zZ)/2`.
pub fn bloch_state(x: f64, y: f64, z: f64) -> Result<DensityMatrix> {
    let m = DMatrix::from_row_slice(
        2,
        2,
        &[
            C64::new((1.0 + z) / 2.0, 0.0),
            C64::new(x / 2.0, -y / 2.0),
            C64::new(x / 2.0, y / 2.0),
            C64::new((1.0 - z) / 2.0, 0.0),
        ],
    );
    DensityMatrix::new(HermitianMatrix::new(m)?)
}

/// Grid search over qubit states.
///
/// The coarse grid is scanned exhaustively in `(x, y)`; along each `z`
/// column the minimum is located by ternary search, which is exact on
/// grid samples of a convex function. The best coarse point is then
/// refined by an exhaustive local grid at one tenth of the spacing.
pub fn bloch_grid_oracle<O: Objective + ?Sized>(obj: &O, resolution: f64) -> Result<OracleResult> {
    if obj.dim() != 2 {
        return Err(Error::Parameter(format!(
            "Bloch grid search needs a qubit objective, got dimension {}",
            obj.dim()
        )));
    }
    if !(resolution > 0.0 && resolution < 0.5) {
        return Err(Error::Parameter(format!(
            "resolution must lie in (0, 0.5), got {resolution}"
        )));
    }
    let h = resolution;
    let r2 = BLOCH_RADIUS * BLOCH_RADIUS;
    let n = (BLOCH_RADIUS / h).floor() as i64;
    let mut evaluations = 0usize;
    let mut eval = |x: f64, y: f64, z: f64| -> Result<f64> {
        evaluations += 1;
        obj.value(&bloch_state(x, y, z)?)
    };

    let mut best = (f64::INFINITY, 0.0, 0.0, 0.0);
    for i in -n..=n {
        let x = i as f64 * h;
        for j in -n..=n {
            let y = j as f64 * h;
            let rest = r2 - x * x - y * y;
            if rest < 0.0 {
                continue;
            }
            let kz = (rest.sqrt() / h).floor() as i64;
            let mut column = |k: i64| eval(x, y, k as f64 * h);
            let (k, v) = ternary_min(-kz, kz, &mut column)?;
            if v < best.0 {
                best = (v, x, y, k as f64 * h);
            }
        }
    }

    let fine = h / 10.0;
    let (_, bx, by, bz) = best;
    for i in -10..=10 {
        for j in -10..=10 {
            for k in -10..=10 {
                let (x, y, z) = (
                    bx + i as f64 * fine,
                    by + j as f64 * fine,
                    bz + k as f64 * fine,
                );
                if x * x + y * y + z * z > r2 {
                    continue;
                }
                let v = eval(x, y, z)?;
                if v < best.0 {
                    best = (v, x, y, z);
                }
            }
        }
    }
    let (value, x, y, z) = best;
    let mut around = vec![bloch_state(x, y, z)?];
    for (dx, dy, dz) in [(h, 0.0, 0.0), (0.0, h, 0.0), (0.0, 0.0, h)] {
        for s in [1.0, -1.0] {
            let (px, py, pz) = (x + s * dx, y + s * dy, z + s * dz);
            if px * px + py * py + pz * pz <= r2 {
                around.push(bloch_state(px, py, pz)?);
            }
        }
    }
    Ok(OracleResult {
        optimum_value: value,
        optimizer: bloch_state(x, y, z)?,
        resolution,
        tolerance: tolerance_from(obj, around, h)?,
        evaluations,
    })
}

/// Minimizer over integers in `[lo, hi]` of a function that is convex on
/// them.
fn ternary_min(
    mut lo: i64,
    mut hi: i64,
    f: &mut impl FnMut(i64) -> Result<f64>,
) -> Result<(i64, f64)> {
    while hi - lo > 2 {
        let m1 = lo + (hi - lo) / 3;
        let m2 = hi - (hi - lo) / 3;
        let (f1, f2) = (f(m1)?, f(m2)?);
        if f1 < f2 {
            hi = m2 - 1;
        } else if f1 > f2 {
            lo = m1 + 1;
        } else {
            lo = m1;
            hi = m2;
        }
    }
    let mut best = (lo, f(lo)?);
    for k in (lo + 1)..=hi {
        let v = f(k)?;
        if v < best.1 {
            best = (k, v);
        }
    }
    Ok(best)
}
