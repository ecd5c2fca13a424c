//! `qrenyi`: generate instances, run the solvers, and write traces.
//!
//! Exit codes: 0 success, 2 usage error, 3 invalid input, 4 numerical or
//! solver failure (including a failed gradient check).

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use qrenyi_core::harness::{
    bench_dim, default_armijo, default_polyak, exit_code, gradcheck, random_instance, run_compare,
    summary_line, write_bench_table, write_compare, write_gradcheck_report, write_trace,
    BenchConfig, CompareConfig, GradcheckConfig, InstanceSource, Quantity, RandomKind, RunConfig,
    Sizes, TraceFormat,
};
use qrenyi_core::solvers::DualNorm;
use qrenyi_core::states::{instance_hash, save};
use qrenyi_core::{ArmijoParams, Error, PolyakParams, Seed, SolverKind};

/// Set to a nonempty value other than `0` to make `gradcheck` scale every
/// gradient by 1.05. Only meant for testing the checker itself.
const CORRUPT_ENV: &str = "QRENYI_CORRUPT_GRADIENT";

#[derive(Parser)]
#[command(
    name = "qrenyi",
    version,
    about = "Mirror descent for quantum Rényi information quantities"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a random instance file.
    Random(RandomArgs),
    /// Run one solver and write its trace.
    Solve(SolveArgs),
    /// Run several solvers against an Armijo reference value.
    Compare(CompareArgs),
    /// Iterations to reach a fixed accuracy across dimensions.
    BenchDim(BenchArgs),
    /// Check analytic gradients against finite differences.
    Gradcheck(GradcheckArgs),
}

fn positive(s: &str) -> Result<usize, String> {
    match s.parse::<usize>() {
        Ok(0) => Err("must be at least 1".into()),
        Ok(n) => Ok(n),
        Err(e) => Err(e.to_string()),
    }
}

fn parsed<T: std::str::FromStr<Err = Error>>(s: &str) -> Result<T, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

#[derive(Args)]
struct SizeArgs {
    /// Ensemble size.
    #[arg(long, default_value_t = 16, value_parser = positive)]
    nx: usize,
    /// Output dimension of ensembles and density matrices.
    #[arg(long, default_value_t = 8, value_parser = positive)]
    d: usize,
    #[arg(long, default_value_t = 8, value_parser = positive)]
    dim_a: usize,
    #[arg(long, default_value_t = 8, value_parser = positive)]
    dim_b: usize,
}

impl SizeArgs {
    fn sizes(&self) -> Sizes {
        Sizes {
            nx: self.nx,
            d: self.d,
            dim_a: self.dim_a,
            dim_b: self.dim_b,
        }
    }
}

#[derive(Args)]
struct RandomArgs {
    /// density, cq, or bipartite.
    #[arg(long, value_parser = parsed::<RandomKind>)]
    kind: RandomKind,
    #[command(flatten)]
    sizes: SizeArgs,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Diagonal ensemble states.
    #[arg(long)]
    commuting: bool,
    /// Output file; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct OutputArgs {
    /// Output file; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// csv or structured.
    #[arg(long, default_value = "csv", value_parser = parsed::<TraceFormat>)]
    trace_format: TraceFormat,
    /// Write zeros in elapsed-time columns so reruns are byte-identical.
    #[arg(long)]
    no_timing: bool,
}

#[derive(Args)]
struct ProblemArgs {
    #[arg(long, value_parser = parsed::<Quantity>)]
    quantity: Quantity,
    /// Order; 0.5 for Augustin quantities and 10 otherwise when omitted.
    #[arg(long)]
    alpha: Option<f64>,
    /// Instance file; a random instance of the default sizes when omitted.
    #[arg(long)]
    input: Option<PathBuf>,
    /// Seed of the random instance used without --input.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    sizes: SizeArgs,
}

impl ProblemArgs {
    fn alpha(&self) -> f64 {
        self.alpha.unwrap_or_else(|| self.quantity.default_alpha())
    }

    fn source(&self) -> InstanceSource {
        match &self.input {
            Some(p) => InstanceSource::File(p.clone()),
            None => InstanceSource::Random {
                sizes: self.sizes.sizes(),
                seed: Seed(self.seed),
            },
        }
    }
}

/// Overrides of the per-quantity solver defaults.
#[derive(Args)]
struct ParamArgs {
    #[arg(long)]
    delta1: Option<f64>,
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    c: Option<f64>,
    /// operator or gauge-fixed.
    #[arg(long)]
    dual_norm: Option<String>,
    #[arg(long)]
    alpha_bar: Option<f64>,
    #[arg(long)]
    r: Option<f64>,
    #[arg(long)]
    tau: Option<f64>,
    #[arg(long)]
    max_backtracks: Option<usize>,
}

impl ParamArgs {
    fn polyak(&self, mut p: PolyakParams) -> Result<PolyakParams, Error> {
        p.delta1 = self.delta1.unwrap_or(p.delta1);
        p.delta = self.delta.unwrap_or(p.delta);
        p.gamma = self.gamma.unwrap_or(p.gamma);
        p.beta = self.beta.unwrap_or(p.beta);
        p.c = self.c.unwrap_or(p.c);
        p.dual_norm = match self.dual_norm.as_deref() {
            None => p.dual_norm,
            Some("operator") => DualNorm::Operator,
            Some("gauge-fixed") => DualNorm::GaugeFixed,
            Some(other) => return Err(Error::Parameter(format!("unknown dual norm `{other}`"))),
        };
        Ok(p)
    }

    fn armijo(&self, mut a: ArmijoParams) -> ArmijoParams {
        a.alpha_bar = self.alpha_bar.unwrap_or(a.alpha_bar);
        a.r = self.r.unwrap_or(a.r);
        a.tau = self.tau.unwrap_or(a.tau);
        a.max_backtracks = self.max_backtracks.unwrap_or(a.max_backtracks);
        a
    }
}

#[derive(Args)]
struct SolveArgs {
    #[command(flatten)]
    problem: ProblemArgs,
    /// polyak, armijo, or fixed-point.
    #[arg(long, default_value = "polyak", value_parser = parsed::<SolverKind>)]
    solver: SolverKind,
    #[arg(long, default_value_t = 500)]
    max_iters: usize,
    #[command(flatten)]
    params: ParamArgs,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct CompareArgs {
    #[command(flatten)]
    problem: ProblemArgs,
    /// Comma-separated; polyak, armijo and, for Augustin quantities,
    /// fixed-point when omitted.
    #[arg(long, value_delimiter = ',', value_parser = parsed::<SolverKind>)]
    solvers: Vec<SolverKind>,
    #[arg(long, default_value_t = 100)]
    max_iters: usize,
    /// Armijo iterations behind the reference value f*.
    #[arg(long, default_value_t = 100, value_parser = positive)]
    reference_iters: usize,
    #[command(flatten)]
    params: ParamArgs,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long, value_parser = parsed::<Quantity>)]
    quantity: Quantity,
    #[arg(long)]
    alpha: Option<f64>,
    /// Comma-separated output dimensions.
    #[arg(long, value_delimiter = ',', default_value = "4,8,16", value_parser = positive)]
    dims: Vec<usize>,
    /// Seeds 1..=N.
    #[arg(long, default_value_t = 5, value_parser = positive)]
    seeds: usize,
    #[arg(long, default_value_t = 1e-5)]
    accuracy: f64,
    /// Ensemble size for Augustin quantities.
    #[arg(long, default_value_t = 10, value_parser = positive)]
    nx: usize,
    /// First subsystem dimension for bipartite quantities.
    #[arg(long, default_value_t = 10, value_parser = positive)]
    dim_a: usize,
    #[arg(long, default_value_t = 5000)]
    max_iters: usize,
    /// Armijo iterations behind each instance's reference optimum.
    #[arg(long, default_value_t = 2000, value_parser = positive)]
    reference_iters: usize,
    /// Worker threads; all available cores when omitted.
    #[arg(long, value_parser = positive)]
    workers: Option<usize>,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct GradcheckArgs {
    /// Repeatable; all four when omitted.
    #[arg(long, value_parser = parsed::<Quantity>)]
    quantity: Vec<Quantity>,
    /// Repeatable; 0.5 and 2 for Petz, 0.5, 2 and 10 for sandwiched when omitted.
    #[arg(long)]
    alpha: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_value = "2,4,8", value_parser = positive)]
    dims: Vec<usize>,
    #[arg(long, default_value_t = 20, value_parser = positive)]
    seeds: usize,
    #[arg(long, default_value_t = 1e-5)]
    epsilon: f64,
    #[arg(long, default_value_t = 1e-4)]
    tolerance: f64,
    #[arg(long, default_value_t = 4, value_parser = positive)]
    nx: usize,
    #[arg(long, default_value_t = 2, value_parser = positive)]
    dim_a: usize,
    /// Output file; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// csv or structured.
    #[arg(long, default_value = "csv", value_parser = parsed::<TraceFormat>)]
    trace_format: TraceFormat,
}

/// Writes to the file when given, else to standard output. The returned
/// flag tells whether standard output is still free for the summary.
fn with_output(
    out: &Option<PathBuf>,
    body: impl FnOnce(&mut dyn Write) -> Result<(), Error>,
) -> Result<bool, Error> {
    match out {
        Some(path) => {
            let mut w = BufWriter::new(File::create(path)?);
            body(&mut w)?;
            w.flush()?;
            Ok(true)
        }
        None => {
            let stdout = io::stdout();
            let mut w = stdout.lock();
            body(&mut w)?;
            w.flush()?;
            Ok(false)
        }
    }
}

fn report(stdout_free: bool, line: &str) {
    if stdout_free {
        println!("{line}");
    } else {
        eprintln!("{line}");
    }
}

fn cmd_random(a: RandomArgs) -> Result<(), Error> {
    let instance = random_instance(a.kind, a.sizes.sizes(), Seed(a.seed), a.commuting)?;
    match &a.out {
        Some(path) => {
            save(path, &instance)?;
            println!(
                "wrote {} instance to {} (sha256 {})",
                instance.kind(),
                path.display(),
                instance_hash(&instance)
            );
        }
        None => print!("{}", instance.to_json()),
    }
    Ok(())
}

fn cmd_solve(a: SolveArgs) -> Result<(), Error> {
    let alpha = a.problem.alpha();
    let q = a.problem.quantity;
    let cfg = RunConfig {
        quantity: q,
        alpha,
        solver: a.solver,
        polyak: a.params.polyak(default_polyak(q, alpha))?,
        armijo: a.params.armijo(default_armijo(q, alpha)),
        max_iters: a.max_iters,
        source: a.problem.source(),
    };
    let trace = cfg.run()?;
    let timing = !a.output.no_timing;
    let free = with_output(&a.output.out, |w| {
        write_trace(w, a.output.trace_format, &cfg.meta(), &trace, timing)
    })?;
    report(free, &summary_line(&cfg.meta(), &trace, timing));
    Ok(())
}

fn cmd_compare(a: CompareArgs) -> Result<(), Error> {
    let alpha = a.problem.alpha();
    let q = a.problem.quantity;
    let mut cfg = CompareConfig::new(q, alpha, a.problem.source());
    if !a.solvers.is_empty() {
        cfg.solvers = a.solvers.clone();
    }
    cfg.polyak = a.params.polyak(cfg.polyak)?;
    cfg.armijo = a.params.armijo(cfg.armijo);
    cfg.max_iters = a.max_iters;
    cfg.reference_iters = a.reference_iters;
    let result = run_compare(&cfg)?;
    let timing = !a.output.no_timing;
    let meta = cfg.meta();
    let free = with_output(&a.output.out, |w| {
        write_compare(w, a.output.trace_format, &meta, &result, timing)
    })?;
    report(
        free,
        &format!(
            "f* = {:?} (armijo, {} iterations)",
            result.f_star, result.reference_iters
        ),
    );
    for t in &result.traces {
        report(free, &summary_line(&meta, t, timing));
    }
    Ok(())
}

fn cmd_bench(a: BenchArgs) -> Result<(), Error> {
    let alpha = a.alpha.unwrap_or_else(|| a.quantity.default_alpha());
    let mut cfg = BenchConfig::new(a.quantity, alpha);
    cfg.dims = a.dims.clone();
    cfg.seeds = (1..=a.seeds as u64).collect();
    cfg.accuracy = a.accuracy;
    cfg.nx = a.nx;
    cfg.dim_a = a.dim_a;
    cfg.polyak.max_iters = a.max_iters;
    cfg.reference_iters = a.reference_iters;
    if let Some(w) = a.workers {
        cfg.workers = w;
    }
    let rows = bench_dim(&cfg)?;
    let free = with_output(&a.output.out, |w| {
        write_bench_table(w, a.output.trace_format, &rows, !a.output.no_timing)
    })?;
    report(
        free,
        &format!("{} rows for {} alpha={alpha}", rows.len(), a.quantity),
    );
    Ok(())
}

/// Ok(false) when the check ran but some case failed.
fn cmd_gradcheck(a: GradcheckArgs) -> Result<bool, Error> {
    let corrupt = std::env::var(CORRUPT_ENV).is_ok_and(|v| !v.is_empty() && v != "0");
    let cfg = GradcheckConfig {
        quantities: if a.quantity.is_empty() {
            Quantity::ALL.to_vec()
        } else {
            a.quantity.clone()
        },
        alphas: (!a.alpha.is_empty()).then(|| a.alpha.clone()),
        dims: a.dims.clone(),
        seeds: a.seeds,
        epsilon: a.epsilon,
        tolerance: a.tolerance,
        nx: a.nx,
        dim_a: a.dim_a,
        corrupt,
        ..GradcheckConfig::default()
    };
    let r = gradcheck(&cfg)?;
    let free = with_output(&a.out, |w| write_gradcheck_report(w, a.trace_format, &r))?;
    let failed = r.cases.iter().filter(|c| !c.passed).count();
    report(
        free,
        &format!(
            "{}: {failed} of {} cases failed",
            if failed == 0 { "PASS" } else { "FAIL" },
            r.cases.len()
        ),
    );
    Ok(failed == 0)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Random(a) => cmd_random(a).map(|()| true),
        Command::Solve(a) => cmd_solve(a).map(|()| true),
        Command::Compare(a) => cmd_compare(a).map(|()| true),
        Command::BenchDim(a) => cmd_bench(a).map(|()| true),
        Command::Gradcheck(a) => cmd_gradcheck(a),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(4),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e) as u8)
        }
    }
}
