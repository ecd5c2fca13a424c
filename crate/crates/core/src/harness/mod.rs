//! Plumbing behind the `qrenyi` command-line tool: quantity names, default
//! solver parameters, instance generation, trace files, and the compare,
//! dimension-scaling and gradient-check drivers.
//!
//! Everything here is deterministic given the configuration and seed.
//! Wall-clock columns are the only exception and can be zeroed.

mod bench;
mod compare;
mod gradcheck;
mod trace;

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::objectives::{
    make_conditional_entropy, make_petz_augustin, make_sandwiched_augustin,
    make_sandwiched_renyi_info, Alpha, Family, Objective,
};
use crate::solvers::{
    maximally_mixed_start, solve_armijo, solve_fixed_point, solve_polyak, ArmijoParams, DualNorm,
    PolyakParams, SolveTrace, SolverKind,
};
use crate::states::{
    load, random_bipartite, random_commuting_cq_ensemble, random_cq_ensemble, random_density,
    CQEnsemble, Instance, Seed,
};

pub use bench::{bench_dim, write_bench_table, BenchConfig, BenchRow};
pub use compare::{run_compare, write_compare, CompareConfig, CompareResult};
pub use gradcheck::{
    gradcheck, write_gradcheck_report, GradcheckCase, GradcheckConfig, GradcheckGroup,
    GradcheckReport,
};
pub use trace::{parse_trace, write_trace, TraceFormat, TraceMeta, TraceRow, CSV_HEADER};

/// Quantities exposed by the command-line tool.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Quantity {
    PetzAugustin,
    SandwichedAugustin,
    ConditionalEntropy,
    SandwichedRenyiInfo,
}

impl Quantity {
    pub const ALL: [Quantity; 4] = [
        Quantity::PetzAugustin,
        Quantity::SandwichedAugustin,
        Quantity::ConditionalEntropy,
        Quantity::SandwichedRenyiInfo,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Quantity::PetzAugustin => "petz-augustin",
            Quantity::SandwichedAugustin => "sandwiched-augustin",
            Quantity::ConditionalEntropy => "conditional-entropy",
            Quantity::SandwichedRenyiInfo => "sandwiched-renyi-info",
        }
    }

    pub fn family(&self) -> Family {
        match self {
            Quantity::PetzAugustin => Family::Petz,
            _ => Family::Sandwiched,
        }
    }

    pub fn is_augustin(&self) -> bool {
        matches!(self, Quantity::PetzAugustin | Quantity::SandwichedAugustin)
    }

    /// 0.5 for the Augustin quantities, 10 for the bipartite ones.
    pub fn default_alpha(&self) -> f64 {
        if self.is_augustin() {
            0.5
        } else {
            10.0
        }
    }

    /// Orders used by the gradient check when none is given.
    pub fn check_alphas(&self) -> &'static [f64] {
        match self.family() {
            Family::Petz => &[0.5, 2.0],
            Family::Sandwiched => &[0.5, 2.0, 10.0],
        }
    }

    pub fn alpha(&self, value: f64) -> Result<Alpha> {
        Alpha::new(value, self.family())
    }
}

impl fmt::Display for Quantity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl serde::Serialize for Quantity {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.name())
    }
}

impl FromStr for Quantity {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Quantity::ALL
            .into_iter()
            .find(|q| q.name() == s)
            .ok_or_else(|| Error::Parameter(format!("unknown quantity `{s}`")))
    }
}

impl FromStr for SolverKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        [
            SolverKind::Polyak,
            SolverKind::Armijo,
            SolverKind::FixedPoint,
        ]
        .into_iter()
        .find(|k| k.name() == s)
        .ok_or_else(|| Error::Parameter(format!("unknown solver `{s}`")))
    }
}

/// Polyak defaults for `solve` and `compare`.
pub fn default_polyak(quantity: Quantity, alpha: f64) -> PolyakParams {
    let (delta1, gamma, beta) = match quantity {
        Quantity::PetzAugustin => (if alpha < 1.0 { 2.5 } else { 1.0 }, 1.25, 0.75),
        Quantity::SandwichedAugustin => (if alpha < 1.0 { 5.0 } else { 1.0 }, 1.3, 0.7),
        Quantity::ConditionalEntropy | Quantity::SandwichedRenyiInfo => (1.0, 1.3, 0.7),
    };
    PolyakParams {
        delta1,
        delta: 1e-5,
        gamma,
        beta,
        c: 1.0,
        max_iters: 500,
        dual_norm: DualNorm::Operator,
    }
}

/// Armijo defaults for `solve` and `compare`.
pub fn default_armijo(quantity: Quantity, alpha: f64) -> ArmijoParams {
    let (alpha_bar, ratio) = match quantity {
        Quantity::PetzAugustin if alpha < 1.0 => (10.0, 0.5),
        Quantity::PetzAugustin => (8.0, 0.7),
        Quantity::SandwichedAugustin if alpha < 1.0 => (7.0, 0.6),
        Quantity::SandwichedAugustin => (4.0, 0.7),
        Quantity::ConditionalEntropy | Quantity::SandwichedRenyiInfo => (8.0, 0.6),
    };
    ArmijoParams {
        alpha_bar,
        r: ratio,
        tau: ratio,
        max_iters: 500,
        max_backtracks: 60,
    }
}

/// Polyak parameters for the dimension-scaling benchmark.
pub fn bench_polyak(quantity: Quantity) -> PolyakParams {
    let (delta1, gamma, beta) = match quantity {
        Quantity::PetzAugustin => (4.0, 1.25, 0.75),
        Quantity::SandwichedAugustin => (5.0, 1.1, 0.9),
        Quantity::ConditionalEntropy | Quantity::SandwichedRenyiInfo => (1.0, 1.1, 0.9),
    };
    PolyakParams {
        delta1,
        delta: 1e-5,
        gamma,
        beta,
        c: 1.0,
        max_iters: 5000,
        dual_norm: DualNorm::Operator,
    }
}

/// Kind of instance produced by `random`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RandomKind {
    Density,
    Cq,
    Bipartite,
}

impl FromStr for RandomKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "density" => Ok(RandomKind::Density),
            "cq" | "cq-ensemble" => Ok(RandomKind::Cq),
            "bipartite" => Ok(RandomKind::Bipartite),
            _ => Err(Error::Parameter(format!("unknown instance kind `{s}`"))),
        }
    }
}

/// Sizes of generated instances.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Sizes {
    /// Ensemble size.
    pub nx: usize,
    /// Output dimension of ensembles and density matrices.
    pub d: usize,
    pub dim_a: usize,
    pub dim_b: usize,
}

impl Default for Sizes {
    fn default() -> Self {
        Self {
            nx: 16,
            d: 8,
            dim_a: 8,
            dim_b: 8,
        }
    }
}

/// Random instance of the given kind. `commuting` makes ensemble states
/// diagonal and is ignored for the other kinds.
pub fn random_instance(
    kind: RandomKind,
    sizes: Sizes,
    seed: Seed,
    commuting: bool,
) -> Result<Instance> {
    Ok(match kind {
        RandomKind::Density => random_density(sizes.d, seed)?.into(),
        RandomKind::Cq if commuting => {
            random_commuting_cq_ensemble(sizes.nx, sizes.d, seed)?.into()
        }
        RandomKind::Cq => random_cq_ensemble(sizes.nx, sizes.d, seed)?.into(),
        RandomKind::Bipartite => random_bipartite(sizes.dim_a, sizes.dim_b, seed)?.into(),
    })
}

/// Random instance suited to `quantity`.
pub fn instance_for(quantity: Quantity, sizes: Sizes, seed: Seed) -> Result<Instance> {
    let kind = if quantity.is_augustin() {
        RandomKind::Cq
    } else {
        RandomKind::Bipartite
    };
    random_instance(kind, sizes, seed, false)
}

/// Objective of `quantity` on `instance`.
///
/// Augustin quantities accept an ensemble or a single density matrix.
/// Bipartite quantities accept a bipartite state or an ensemble, which is
/// embedded as its classical-quantum state.
pub fn build_objective(
    quantity: Quantity,
    alpha: f64,
    instance: Instance,
) -> Result<Box<dyn Objective>> {
    let alpha = quantity.alpha(alpha)?;
    if quantity.is_augustin() {
        let ensemble = match instance {
            Instance::Density(rho) => CQEnsemble::new(vec![1.0], vec![rho])?,
            other => other.into_cq_ensemble()?,
        };
        return Ok(match quantity {
            Quantity::PetzAugustin => Box::new(make_petz_augustin(ensemble, alpha)?),
            _ => Box::new(make_sandwiched_augustin(ensemble, alpha)?),
        });
    }
    let state = match instance {
        Instance::CqEnsemble(e) => e.to_classical_quantum_state()?,
        other => other.into_bipartite()?,
    };
    Ok(match quantity {
        Quantity::ConditionalEntropy => Box::new(make_conditional_entropy(state, alpha)?),
        _ => Box::new(make_sandwiched_renyi_info(state, alpha)?),
    })
}

/// Where a run gets its instance.
#[derive(Clone, Debug, PartialEq)]
pub enum InstanceSource {
    File(PathBuf),
    /// Generated by [`instance_for`].
    Random {
        sizes: Sizes,
        seed: Seed,
    },
}

impl InstanceSource {
    pub fn load(&self, quantity: Quantity) -> Result<Instance> {
        match self {
            InstanceSource::File(path) => load(path),
            InstanceSource::Random { sizes, seed } => instance_for(quantity, *sizes, *seed),
        }
    }
}

/// One solver run.
#[derive(Clone, Debug)]
pub struct RunConfig {
    pub quantity: Quantity,
    pub alpha: f64,
    pub solver: SolverKind,
    pub polyak: PolyakParams,
    pub armijo: ArmijoParams,
    pub max_iters: usize,
    pub source: InstanceSource,
}

impl RunConfig {
    /// Configuration with the default parameters for `quantity` and `alpha`
    /// on a generated desk-scale instance.
    pub fn new(quantity: Quantity, alpha: f64, solver: SolverKind, seed: Seed) -> Self {
        Self {
            quantity,
            alpha,
            solver,
            polyak: default_polyak(quantity, alpha),
            armijo: default_armijo(quantity, alpha),
            max_iters: 500,
            source: InstanceSource::Random {
                sizes: Sizes::default(),
                seed,
            },
        }
    }

    /// Checks the order range, the solver parameters, and that the
    /// fixed-point iteration is only paired with an Augustin quantity.
    pub fn validate(&self) -> Result<()> {
        check_compatible(self.quantity, self.solver)?;
        self.quantity.alpha(self.alpha)?;
        match self.solver {
            SolverKind::Polyak => self.polyak.validate(),
            SolverKind::Armijo => self.armijo.validate(),
            SolverKind::FixedPoint => Ok(()),
        }
    }

    pub fn run(&self) -> Result<SolveTrace> {
        self.validate()?;
        let obj = build_objective(self.quantity, self.alpha, self.source.load(self.quantity)?)?;
        run_solver(
            obj.as_ref(),
            self.solver,
            &self.polyak,
            &self.armijo,
            self.max_iters,
        )
    }

    pub fn meta(&self) -> TraceMeta {
        TraceMeta {
            quantity: self.quantity,
            alpha: self.alpha,
        }
    }
}

pub(crate) fn check_compatible(quantity: Quantity, solver: SolverKind) -> Result<()> {
    if solver == SolverKind::FixedPoint && !quantity.is_augustin() {
        return Err(Error::Parameter(format!(
            "the fixed-point solver only applies to Augustin quantities, not {quantity}"
        )));
    }
    Ok(())
}

/// Runs `solver` from `I/d` with the iteration budget `max_iters`.
pub fn run_solver(
    obj: &dyn Objective,
    solver: SolverKind,
    polyak: &PolyakParams,
    armijo: &ArmijoParams,
    max_iters: usize,
) -> Result<SolveTrace> {
    let z1 = maximally_mixed_start(obj)?;
    match solver {
        SolverKind::Polyak => solve_polyak(
            obj,
            &z1,
            &PolyakParams {
                max_iters,
                ..*polyak
            },
        ),
        SolverKind::Armijo => solve_armijo(
            obj,
            &z1,
            &ArmijoParams {
                max_iters,
                ..*armijo
            },
        ),
        SolverKind::FixedPoint => solve_fixed_point(obj, &z1, max_iters),
    }
}

/// One-line summary of a finished run. The iteration count excludes the
/// starting point.
pub fn summary_line(meta: &TraceMeta, trace: &SolveTrace, timing: bool) -> String {
    let elapsed = if timing {
        trace.records.last().map_or(0.0, |r| r.elapsed_ms)
    } else {
        0.0
    };
    format!(
        "{} {} alpha={}: best {:?} after {} iterations ({}), {:.1} ms",
        trace.solver,
        meta.quantity,
        meta.alpha,
        trace.best_value,
        trace.iterations().saturating_sub(1),
        trace.termination,
        elapsed
    )
}

/// Process exit code for an error: 2 for usage, 3 for input validation,
/// 4 for numerical and solver failures.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Parameter(_) => 2,
        Error::Parse(_)
        | Error::Invariant { .. }
        | Error::NotSquare { .. }
        | Error::NotHermitian { .. }
        | Error::DimensionMismatch { .. }
        | Error::Io(_) => 3,
        Error::Decomposition { .. }
        | Error::Domain { .. }
        | Error::Boundary { .. }
        | Error::Numerical(_)
        | Error::Solver { .. } => 4,
    }
}

/// Median of a nonempty sample; the mean of the middle pair for even sizes.
pub fn median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    Some(if v.len() % 2 == 1 {
        v[m]
    } else {
        (v[m - 1] + v[m]) / 2.0
    })
}
