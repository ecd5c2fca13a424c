use std::io::Write;

use serde::Serialize;

use super::trace::{trace_rows, write_json, TraceRow};
use super::{
    build_objective, check_compatible, default_armijo, default_polyak, run_solver, InstanceSource,
    Quantity, TraceFormat, TraceMeta,
};
use crate::error::{Error, Result};
use crate::solvers::{ArmijoParams, PolyakParams, SolveTrace, SolverKind};

/// Several solvers on one instance, measured against a reference value
/// from a fixed-length Armijo run.
#[derive(Clone, Debug)]
pub struct CompareConfig {
    pub quantity: Quantity,
    pub alpha: f64,
    pub solvers: Vec<SolverKind>,
    pub polyak: PolyakParams,
    pub armijo: ArmijoParams,
    pub max_iters: usize,
    /// Armijo iterations behind `f*`.
    pub reference_iters: usize,
    pub source: InstanceSource,
}

impl CompareConfig {
    /// Polyak and Armijo, plus the fixed-point iteration for Augustin
    /// quantities; 100 reference iterations.
    pub fn new(quantity: Quantity, alpha: f64, source: InstanceSource) -> Self {
        let mut solvers = vec![SolverKind::Polyak, SolverKind::Armijo];
        if quantity.is_augustin() {
            solvers.push(SolverKind::FixedPoint);
        }
        Self {
            quantity,
            alpha,
            solvers,
            polyak: default_polyak(quantity, alpha),
            armijo: default_armijo(quantity, alpha),
            max_iters: 100,
            reference_iters: 100,
            source,
        }
    }

    pub fn meta(&self) -> TraceMeta {
        TraceMeta {
            quantity: self.quantity,
            alpha: self.alpha,
        }
    }
}

#[derive(Clone, Debug)]
pub struct CompareResult {
    /// Best value of the reference Armijo run.
    pub f_star: f64,
    pub reference_iters: usize,
    pub traces: Vec<SolveTrace>,
}

pub fn run_compare(cfg: &CompareConfig) -> Result<CompareResult> {
    if cfg.solvers.is_empty() {
        return Err(Error::Parameter("no solvers to compare".into()));
    }
    if cfg.reference_iters == 0 {
        return Err(Error::Parameter(
            "the reference run needs at least one iteration".into(),
        ));
    }
    for &s in &cfg.solvers {
        check_compatible(cfg.quantity, s)?;
    }
    cfg.quantity.alpha(cfg.alpha)?;
    cfg.polyak.validate()?;
    cfg.armijo.validate()?;
    let obj = build_objective(cfg.quantity, cfg.alpha, cfg.source.load(cfg.quantity)?)?;
    let reference = run_solver(
        obj.as_ref(),
        SolverKind::Armijo,
        &cfg.polyak,
        &cfg.armijo,
        cfg.reference_iters,
    )?;
    let traces = cfg
        .solvers
        .iter()
        .map(|&s| run_solver(obj.as_ref(), s, &cfg.polyak, &cfg.armijo, cfg.max_iters))
        .collect::<Result<Vec<_>>>()?;
    Ok(CompareResult {
        f_star: reference.best_value,
        reference_iters: cfg.reference_iters,
        traces,
    })
}

#[derive(Serialize)]
struct SolverSection {
    solver: String,
    termination: String,
    best_value: f64,
    records: Vec<TraceRow>,
}

#[derive(Serialize)]
struct CompareDoc {
    quantity: String,
    alpha: f64,
    f_star: f64,
    reference_iters: usize,
    solvers: Vec<SolverSection>,
}

/// CSV output has one row per iteration and, per solver, the columns
/// `<solver>_gap` (`f − f*`) and `<solver>_elapsed_ms`; cells past the end
/// of a shorter run are empty. Structured output embeds each full trace
/// next to `f_star`.
pub fn write_compare(
    out: &mut dyn Write,
    format: TraceFormat,
    meta: &TraceMeta,
    result: &CompareResult,
    timing: bool,
) -> Result<()> {
    match format {
        TraceFormat::Structured => {
            let doc = CompareDoc {
                quantity: meta.quantity.name().to_string(),
                alpha: meta.alpha,
                f_star: result.f_star,
                reference_iters: result.reference_iters,
                solvers: result
                    .traces
                    .iter()
                    .map(|t| SolverSection {
                        solver: t.solver.name().to_string(),
                        termination: t.termination.to_string(),
                        best_value: t.best_value,
                        records: trace_rows(t, timing),
                    })
                    .collect(),
            };
            write_json(out, &doc)
        }
        TraceFormat::Csv => {
            let mut header = vec!["iter".to_string()];
            for t in &result.traces {
                header.push(format!("{}_gap", t.solver));
                header.push(format!("{}_elapsed_ms", t.solver));
            }
            writeln!(out, "{}", header.join(","))?;
            let rows = result
                .traces
                .iter()
                .map(|t| t.records.len())
                .max()
                .unwrap_or(0);
            for i in 0..rows {
                let mut line = vec![(i + 1).to_string()];
                for t in &result.traces {
                    match t.records.get(i) {
                        Some(r) => {
                            line.push(format!("{:?}", r.f - result.f_star));
                            line.push(format!("{:?}", if timing { r.elapsed_ms } else { 0.0 }));
                        }
                        None => line.extend([String::new(), String::new()]),
                    }
                }
                writeln!(out, "{}", line.join(","))?;
            }
            Ok(())
        }
    }
}
