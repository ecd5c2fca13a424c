use std::io::Write;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::thread;

use serde::Serialize;

use super::trace::write_json;
use super::{
    bench_polyak, build_objective, default_armijo, instance_for, median, run_solver, Quantity,
    Sizes, TraceFormat,
};
use crate::error::{Error, Result};
use crate::solvers::{maximally_mixed_start, solve_polyak_until, PolyakParams};
use crate::states::Seed;

/// Iterations needed to reach a fixed accuracy as the dimension grows.
#[derive(Clone, Debug)]
pub struct BenchConfig {
    pub quantity: Quantity,
    pub alpha: f64,
    /// Output dimensions; for bipartite quantities this is `dim_b`.
    pub dims: Vec<usize>,
    pub seeds: Vec<u64>,
    /// Target gap `f(z_t) − f_ref`.
    pub accuracy: f64,
    /// Ensemble size for Augustin quantities.
    pub nx: usize,
    /// `dim_a` for bipartite quantities.
    pub dim_a: usize,
    pub polyak: PolyakParams,
    /// Armijo iterations behind each instance's `f_ref`.
    pub reference_iters: usize,
    /// Worker threads; cells are independent.
    pub workers: usize,
}

impl BenchConfig {
    pub fn new(quantity: Quantity, alpha: f64) -> Self {
        Self {
            quantity,
            alpha,
            dims: vec![4, 8, 16],
            seeds: (1..=5).collect(),
            accuracy: 1e-5,
            nx: 10,
            dim_a: 10,
            polyak: bench_polyak(quantity),
            reference_iters: 2000,
            workers: thread::available_parallelism().map_or(1, |n| n.get()),
        }
    }
}

/// Medians over the seeds that reached the target.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BenchRow {
    pub dim: usize,
    pub median_iterations: Option<f64>,
    pub median_elapsed_ms: Option<f64>,
    pub reached: usize,
    pub seeds: usize,
}

struct Cell {
    iterations: Option<usize>,
    elapsed_ms: Option<f64>,
}

fn run_cell(cfg: &BenchConfig, dim: usize, seed: u64) -> Result<Cell> {
    let sizes = Sizes {
        nx: cfg.nx,
        d: dim,
        dim_a: cfg.dim_a,
        dim_b: dim,
    };
    let obj = build_objective(
        cfg.quantity,
        cfg.alpha,
        instance_for(cfg.quantity, sizes, Seed(seed))?,
    )?;
    let armijo = default_armijo(cfg.quantity, cfg.alpha);
    let reference = run_solver(
        obj.as_ref(),
        crate::solvers::SolverKind::Armijo,
        &cfg.polyak,
        &armijo,
        cfg.reference_iters,
    )?;
    let target = reference.best_value + cfg.accuracy;
    let trace = solve_polyak_until(
        obj.as_ref(),
        &maximally_mixed_start(obj.as_ref())?,
        &cfg.polyak,
        Some(target),
    )?;
    let hit = trace.records.iter().find(|r| r.f <= target);
    Ok(Cell {
        iterations: hit.map(|r| r.iter),
        elapsed_ms: hit.map(|r| r.elapsed_ms),
    })
}

/// One row per entry of `dims`, in the given order.
pub fn bench_dim(cfg: &BenchConfig) -> Result<Vec<BenchRow>> {
    if cfg.dims.is_empty() || cfg.seeds.is_empty() {
        return Err(Error::Parameter(
            "bench-dim needs at least one dimension and one seed".into(),
        ));
    }
    if cfg.dims.contains(&0) {
        return Err(Error::Parameter("dimensions must be at least 1".into()));
    }
    if !(cfg.accuracy > 0.0) {
        return Err(Error::Parameter(format!(
            "accuracy must be positive, got {}",
            cfg.accuracy
        )));
    }
    cfg.quantity.alpha(cfg.alpha)?;
    cfg.polyak.validate()?;
    let cells: Vec<(usize, u64)> = cfg
        .dims
        .iter()
        .flat_map(|&d| cfg.seeds.iter().map(move |&s| (d, s)))
        .collect();
    let results: Mutex<Vec<Option<Result<Cell>>>> =
        Mutex::new((0..cells.len()).map(|_| None).collect());
    let next = AtomicUsize::new(0);
    thread::scope(|scope| {
        for _ in 0..cfg.workers.clamp(1, cells.len()) {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some(&(d, s)) = cells.get(i) else { break };
                let r = run_cell(cfg, d, s);
                results
                    .lock()
                    .expect("no worker panics while holding the lock")[i] = Some(r);
            });
        }
    });
    let results = results.into_inner().expect("workers finished");
    let mut rows = Vec::with_capacity(cfg.dims.len());
    let mut it = results.into_iter();
    for &dim in &cfg.dims {
        let mut iters = Vec::new();
        let mut times = Vec::new();
        for _ in &cfg.seeds {
            let cell = it.next().flatten().expect("every cell ran")?;
            if let (Some(n), Some(t)) = (cell.iterations, cell.elapsed_ms) {
                iters.push(n as f64);
                times.push(t);
            }
        }
        rows.push(BenchRow {
            dim,
            median_iterations: median(&iters),
            median_elapsed_ms: median(&times),
            reached: iters.len(),
            seeds: cfg.seeds.len(),
        });
    }
    Ok(rows)
}

/// CSV columns `dim,median_iterations,median_elapsed_ms,reached,seeds`;
/// medians are empty when no seed reached the target.
pub fn write_bench_table(
    out: &mut dyn Write,
    format: TraceFormat,
    rows: &[BenchRow],
    timing: bool,
) -> Result<()> {
    let rows: Vec<BenchRow> = rows
        .iter()
        .map(|r| BenchRow {
            median_elapsed_ms: r.median_elapsed_ms.map(|t| if timing { t } else { 0.0 }),
            ..r.clone()
        })
        .collect();
    match format {
        TraceFormat::Structured => write_json(out, &rows),
        TraceFormat::Csv => {
            writeln!(out, "dim,median_iterations,median_elapsed_ms,reached,seeds")?;
            let opt = |v: Option<f64>| v.map_or(String::new(), |x| format!("{x:?}"));
            for r in &rows {
                writeln!(
                    out,
                    "{},{},{},{},{}",
                    r.dim,
                    opt(r.median_iterations),
                    opt(r.median_elapsed_ms),
                    r.reached,
                    r.seeds
                )?;
            }
            Ok(())
        }
    }
}
