use std::io::Write;

use serde::Serialize;

use super::trace::write_json;
use super::{build_objective, instance_for, Quantity, Sizes, TraceFormat};
use crate::error::{Error, Result};
use crate::linalg::{schatten_norm, trace_inner, HermitianMatrix};
use crate::objectives::{Alpha, Objective, ObjectiveKind};
use crate::states::{DensityMatrix, Seed};
use crate::verification::{
    finite_diff_directional, random_traceless_direction, well_conditioned_state,
};

/// Analytic gradients against central differences, plus the identities
/// `Tr[σ∇f(σ)] = −1` and `‖∇f(σ)‖₁ ≤ 1/λ_min(σ)`.
#[derive(Clone, Debug)]
pub struct GradcheckConfig {
    pub quantities: Vec<Quantity>,
    /// Orders to test; each quantity's [`Quantity::check_alphas`] when `None`.
    pub alphas: Option<Vec<f64>>,
    pub dims: Vec<usize>,
    /// Instances per (quantity, order, dimension).
    pub seeds: usize,
    pub epsilon: f64,
    /// Largest accepted relative error.
    pub tolerance: f64,
    pub trace_identity_tolerance: f64,
    pub norm_bound_slack: f64,
    /// Ensemble size for Augustin quantities.
    pub nx: usize,
    /// `dim_a` for bipartite quantities.
    pub dim_a: usize,
    /// Scale every gradient by 1.05 before checking; a negative control.
    pub corrupt: bool,
}

impl Default for GradcheckConfig {
    fn default() -> Self {
        Self {
            quantities: Quantity::ALL.to_vec(),
            alphas: None,
            dims: vec![2, 4, 8],
            seeds: 20,
            epsilon: 1e-5,
            tolerance: 1e-4,
            trace_identity_tolerance: 1e-8,
            norm_bound_slack: 1e-6,
            nx: 4,
            dim_a: 2,
            corrupt: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GradcheckCase {
    pub quantity: Quantity,
    pub alpha: f64,
    pub dim: usize,
    pub seed: u64,
    pub relative_error: f64,
    /// `|Tr[σ∇f(σ)] + 1|`.
    pub trace_identity_error: f64,
    /// `‖∇f(σ)‖₁ − 1/λ_min(σ)`.
    pub norm_excess: f64,
    pub passed: bool,
}

#[derive(Clone, Debug)]
pub struct GradcheckReport {
    pub cases: Vec<GradcheckCase>,
}

/// Worst case over one (quantity, order, dimension) group.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GradcheckGroup {
    pub quantity: Quantity,
    pub alpha: f64,
    pub dim: usize,
    pub instances: usize,
    pub max_relative_error: f64,
    pub max_trace_identity_error: f64,
    pub max_norm_excess: f64,
    pub passed: bool,
}

impl GradcheckReport {
    pub fn passed(&self) -> bool {
        self.cases.iter().all(|c| c.passed)
    }

    pub fn groups(&self) -> Vec<GradcheckGroup> {
        let mut out: Vec<GradcheckGroup> = Vec::new();
        for c in &self.cases {
            let same = |g: &GradcheckGroup| {
                g.quantity == c.quantity && g.alpha == c.alpha && g.dim == c.dim
            };
            if !out.last().is_some_and(same) {
                out.push(GradcheckGroup {
                    quantity: c.quantity,
                    alpha: c.alpha,
                    dim: c.dim,
                    instances: 0,
                    max_relative_error: 0.0,
                    max_trace_identity_error: 0.0,
                    max_norm_excess: f64::NEG_INFINITY,
                    passed: true,
                });
            }
            let g = out.last_mut().expect("group just pushed");
            g.instances += 1;
            g.max_relative_error = g.max_relative_error.max(c.relative_error);
            g.max_trace_identity_error = g.max_trace_identity_error.max(c.trace_identity_error);
            g.max_norm_excess = g.max_norm_excess.max(c.norm_excess);
            g.passed &= c.passed;
        }
        out
    }
}

struct Corrupted<'a>(&'a dyn Objective);

impl Objective for Corrupted<'_> {
    fn dim(&self) -> usize {
        self.0.dim()
    }
    fn kind(&self) -> ObjectiveKind {
        self.0.kind()
    }
    fn alpha(&self) -> Alpha {
        self.0.alpha()
    }
    fn value(&self, sigma: &DensityMatrix) -> Result<f64> {
        self.0.value(sigma)
    }
    fn value_and_grad(&self, sigma: &DensityMatrix) -> Result<(f64, HermitianMatrix)> {
        let (f, g) = self.0.value_and_grad(sigma)?;
        Ok((f, &g * 1.05))
    }
}

// Seeds of the instance, the point and the direction of case (seed, dim).
fn case_seeds(seed: u64, dim: usize) -> (Seed, Seed, Seed) {
    let base = seed * 1000 + dim as u64;
    (Seed(base), Seed(base + 500_000), Seed(base + 1_000_000))
}

fn check_case(
    cfg: &GradcheckConfig,
    q: Quantity,
    alpha: f64,
    dim: usize,
    seed: u64,
) -> Result<GradcheckCase> {
    let (s_inst, s_sigma, s_dir) = case_seeds(seed, dim);
    let sizes = Sizes {
        nx: cfg.nx,
        d: dim,
        dim_a: cfg.dim_a,
        dim_b: dim,
    };
    let inner = build_objective(q, alpha, instance_for(q, sizes, s_inst)?)?;
    let corrupted = Corrupted(inner.as_ref());
    let obj: &dyn Objective = if cfg.corrupt {
        &corrupted
    } else {
        inner.as_ref()
    };
    let sigma = well_conditioned_state(dim, s_sigma)?;
    let direction = random_traceless_direction(dim, s_dir)?;
    let (_, g) = obj.value_and_grad(&sigma)?;
    let analytic = trace_inner(&g, &direction)?;
    let fd = finite_diff_directional(obj, &sigma, &direction, cfg.epsilon)?;
    let relative_error = (analytic - fd).abs() / analytic.abs().max(1.0);
    let trace_identity_error = (trace_inner(sigma.matrix(), &g)? + 1.0).abs();
    let norm_excess = schatten_norm(&g, 1.0)? - 1.0 / sigma.min_eigenvalue();
    Ok(GradcheckCase {
        quantity: q,
        alpha,
        dim,
        seed,
        relative_error,
        trace_identity_error,
        norm_excess,
        passed: relative_error <= cfg.tolerance
            && trace_identity_error <= cfg.trace_identity_tolerance
            && norm_excess <= cfg.norm_bound_slack,
    })
}

/// Runs every (quantity, order, dimension, seed) case; seeds are `1..=seeds`.
pub fn gradcheck(cfg: &GradcheckConfig) -> Result<GradcheckReport> {
    if cfg.seeds == 0 || cfg.dims.is_empty() || cfg.quantities.is_empty() {
        return Err(Error::Parameter(
            "gradcheck needs quantities, dimensions and seeds".into(),
        ));
    }
    if let Some(&d) = cfg.dims.iter().find(|&&d| d < 2) {
        return Err(Error::Parameter(format!(
            "dimension {d} has no traceless directions; use at least 2"
        )));
    }
    let mut cases = Vec::new();
    for &q in &cfg.quantities {
        let alphas = cfg
            .alphas
            .clone()
            .unwrap_or_else(|| q.check_alphas().to_vec());
        for &a in &alphas {
            q.alpha(a)?;
            for &d in &cfg.dims {
                for seed in 1..=cfg.seeds as u64 {
                    cases.push(check_case(cfg, q, a, d, seed)?);
                }
            }
        }
    }
    Ok(GradcheckReport { cases })
}

/// One line per group with its worst errors. CSV columns:
/// `quantity,alpha,dim,instances,max_relative_error,max_trace_identity_error,max_norm_excess,status`.
pub fn write_gradcheck_report(
    out: &mut dyn Write,
    format: TraceFormat,
    report: &GradcheckReport,
) -> Result<()> {
    let groups = report.groups();
    match format {
        TraceFormat::Structured => {
            #[derive(Serialize)]
            struct Doc<'a> {
                passed: bool,
                groups: &'a [GradcheckGroup],
            }
            write_json(
                out,
                &Doc {
                    passed: report.passed(),
                    groups: &groups,
                },
            )
        }
        TraceFormat::Csv => {
            writeln!(
                out,
                "quantity,alpha,dim,instances,max_relative_error,max_trace_identity_error,max_norm_excess,status"
            )?;
            for g in &groups {
                writeln!(
                    out,
                    "{},{:?},{},{},{:?},{:?},{:?},{}",
                    g.quantity,
                    g.alpha,
                    g.dim,
                    g.instances,
                    g.max_relative_error,
                    g.max_trace_identity_error,
                    g.max_norm_excess,
                    if g.passed { "PASS" } else { "FAIL" }
                )?;
            }
            Ok(())
        }
    }
}
