//! Benchmark CLI: generate weighted nearest-correlation-matrix instances,
//! solve them with the inexact accelerated methods, run method grids, and
//! post-process records into performance profiles.
//!
//! Exit codes: 0 on success, 1 on solver failure, 2 on bad arguments.

use clap::{Args, Parser, Subcommand};
use ifista::bench::{
    emit_iterations, emit_profile, emit_table, emit_trace, parse_table, profile_by_time, run_grid,
    run_single, BenchParams,
};
use ifista::instance::{make_instance, write_instance, InstanceSpec};
use ifista::lbfgs::LbfgsConfig;
use ifista::solvers::Method;
use serde::Deserialize;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "ifista",
    version,
    about = "Inexact accelerated proximal-gradient benchmark harness"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate a seeded random instance and write G, H plus a JSON sidecar.
    Gen(GenArgs),
    /// Solve one instance with one method; writes the run record and the
    /// per-evaluation residual trace.
    Solve(SolveArgs),
    /// Run a grid of instances times methods; writes records.csv.
    Bench(BenchArgs),
    /// Build performance profiles from a records.csv.
    Profile(ProfileArgs),
}

#[derive(Args)]
struct GenArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    gamma: f64,
    #[arg(long, default_value_t = 0.5)]
    p: f64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Output directory.
    #[arg(long, default_value = "instances")]
    out: PathBuf,
}

/// Solver knobs shared by `solve` and `bench`. Unset flags fall back to the
/// config file (if given), then to the built-in defaults.
#[derive(Args, Clone, Default)]
struct SolverFlags {
    /// IR rule tau in (0, 1].
    #[arg(long)]
    tau: Option<f64>,
    /// Rule alpha: the IR alpha for i-fista, the IER alpha for ie-fista.
    #[arg(long)]
    alpha: Option<f64>,
    /// IER rule sigma in [0, 1].
    #[arg(long)]
    sigma: Option<f64>,
    /// Stop once max{r_p, r_d} <= tol.
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    max_iter: Option<usize>,
    /// Curvature pairs kept by the inner quasi-Newton solver.
    #[arg(long)]
    inner_memory: Option<usize>,
    /// Inner evaluation budget per subproblem.
    #[arg(long)]
    inner_max_evals: Option<u64>,
    /// JSON file mirroring all flags; explicit flags win.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct SolveArgs {
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long)]
    p: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value = "i-fista")]
    method: String,
    /// Directory for record and trace CSVs; nothing is written when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    flags: SolverFlags,
}

#[derive(Args)]
struct BenchArgs {
    /// Orders, comma-separated. Default: 50,100,200.
    #[arg(long, value_delimiter = ',')]
    n: Vec<usize>,
    /// Noise levels, comma-separated. Default: 0.1,0.5,1.0.
    #[arg(long, value_delimiter = ',')]
    gamma: Vec<f64>,
    #[arg(long)]
    p: Option<f64>,
    /// Seeds, comma-separated. Default: 1,2,3.
    #[arg(long, value_delimiter = ',')]
    seed: Vec<u64>,
    /// Methods, comma-separated. Default: i-fista,ie-fista,ia-fista.
    #[arg(long, value_delimiter = ',')]
    method: Vec<String>,
    /// Worker threads for grid cells (1 = serial, 0 = all cores).
    #[arg(long)]
    parallel: Option<usize>,
    #[arg(long, default_value = "bench-out")]
    out: PathBuf,
    /// Also write the performance profile next to the records.
    #[arg(long, default_value_t = false)]
    profile: bool,
    #[command(flatten)]
    flags: SolverFlags,
}

#[derive(Args)]
struct ProfileArgs {
    /// records.csv produced by `bench`.
    #[arg(long)]
    records: PathBuf,
    /// Output directory; prints to stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

/// JSON mirror of the flags; every field optional.
#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    n: Option<Vec<usize>>,
    gamma: Option<Vec<f64>>,
    p: Option<f64>,
    seed: Option<Vec<u64>>,
    method: Option<Vec<String>>,
    tau: Option<f64>,
    alpha: Option<f64>,
    sigma: Option<f64>,
    tol: Option<f64>,
    max_iter: Option<usize>,
    inner_memory: Option<usize>,
    inner_max_evals: Option<u64>,
    parallel: Option<usize>,
    out: Option<PathBuf>,
}

enum CliError {
    /// Invalid arguments or config: exit code 2.
    Usage(String),
    /// The run itself failed: exit code 1.
    Run(String),
}

impl CliError {
    fn code(&self) -> ExitCode {
        match self {
            CliError::Usage(_) => ExitCode::from(2),
            CliError::Run(_) => ExitCode::from(1),
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Run(m) => m,
        }
    }
}

fn usage(e: impl std::fmt::Display) -> CliError {
    CliError::Usage(e.to_string())
}

fn run_err(e: impl std::fmt::Display) -> CliError {
    CliError::Run(e.to_string())
}

fn load_config(path: &Option<PathBuf>) -> Result<ConfigFile, CliError> {
    match path {
        None => Ok(ConfigFile::default()),
        Some(p) => {
            let text = std::fs::read_to_string(p)
                .map_err(|e| usage(format!("cannot read config {}: {e}", p.display())))?;
            serde_json::from_str(&text)
                .map_err(|e| usage(format!("bad config {}: {e}", p.display())))
        }
    }
}

fn build_params(flags: &SolverFlags, cfg: &ConfigFile, parallel: Option<usize>) -> BenchParams {
    let defaults = BenchParams::default();
    let inner_defaults = LbfgsConfig::default();
    BenchParams {
        tau: flags.tau.or(cfg.tau).unwrap_or(defaults.tau),
        ir_alpha: flags.alpha.or(cfg.alpha),
        sigma: flags.sigma.or(cfg.sigma).unwrap_or(defaults.sigma),
        ier_alpha: flags.alpha.or(cfg.alpha),
        tol: flags.tol.or(cfg.tol).unwrap_or(defaults.tol),
        max_iter: flags.max_iter.or(cfg.max_iter).unwrap_or(defaults.max_iter),
        inner: LbfgsConfig {
            memory: flags
                .inner_memory
                .or(cfg.inner_memory)
                .unwrap_or(inner_defaults.memory),
            max_evals: flags
                .inner_max_evals
                .or(cfg.inner_max_evals)
                .unwrap_or(inner_defaults.max_evals),
            ..inner_defaults
        },
        parallel: parallel.or(cfg.parallel).unwrap_or(defaults.parallel),
    }
}

fn parse_methods(names: &[String]) -> Result<Vec<Method>, CliError> {
    names
        .iter()
        .map(|s| s.parse::<Method>().map_err(usage))
        .collect()
}

fn write_out(dir: &Path, name: &str, content: &str) -> Result<PathBuf, CliError> {
    std::fs::create_dir_all(dir)
        .map_err(|e| run_err(format!("cannot create {}: {e}", dir.display())))?;
    let path = dir.join(name);
    std::fs::write(&path, content)
        .map_err(|e| run_err(format!("cannot write {}: {e}", path.display())))?;
    Ok(path)
}

fn cmd_gen(args: GenArgs) -> Result<(), CliError> {
    let spec = InstanceSpec::new(args.n, args.gamma, args.p, args.seed).map_err(usage)?;
    let inst = make_instance(&spec).map_err(run_err)?;
    let paths = write_instance(&args.out, &spec, &inst).map_err(run_err)?;
    println!("wrote {} (L = {})", paths.spec.display(), inst.lipschitz());
    Ok(())
}

fn cmd_solve(args: SolveArgs) -> Result<(), CliError> {
    let cfg = load_config(&args.flags.config)?;
    let spec = InstanceSpec::new(
        args.n
            .or(cfg.n.as_ref().and_then(|v| v.first().copied()))
            .unwrap_or(100),
        args.gamma
            .or(cfg.gamma.as_ref().and_then(|v| v.first().copied()))
            .unwrap_or(0.1),
        args.p.or(cfg.p).unwrap_or(0.5),
        args.seed
            .or(cfg.seed.as_ref().and_then(|v| v.first().copied()))
            .unwrap_or(1),
    )
    .map_err(usage)?;
    let method: Method = args.method.parse().map_err(usage)?;
    let params = build_params(&args.flags, &cfg, None);
    let run = run_single(&spec, method, &params).map_err(run_err)?;
    let rec = &run.record;
    println!(
        "{} n={} gamma={} seed={}: k={}, fgs={}, time={:.3}s, r_p={:.2e}, r_d={:.2e} ({})",
        rec.method,
        rec.n,
        rec.gamma,
        rec.seed,
        rec.k,
        rec.fgs,
        rec.time_seconds,
        rec.r_p,
        rec.r_d,
        rec.stop_reason
    );
    if let Some(dir) = &args.out {
        let stem = spec.stem();
        write_out(
            dir,
            &format!("{stem}.{method}.record.csv"),
            &emit_table(std::slice::from_ref(rec)),
        )?;
        if let Some(result) = &run.result {
            write_out(
                dir,
                &format!("{stem}.{method}.trace.csv"),
                &emit_trace(&result.trace),
            )?;
            write_out(
                dir,
                &format!("{stem}.{method}.iterations.csv"),
                &emit_iterations(&result.trace),
            )?;
        }
    }
    if rec.solved() {
        Ok(())
    } else {
        Err(run_err(format!(
            "solver stopped without converging: {}",
            rec.stop_reason
        )))
    }
}

fn cmd_bench(args: BenchArgs) -> Result<(), CliError> {
    let cfg = load_config(&args.flags.config)?;
    let ns = if !args.n.is_empty() {
        args.n.clone()
    } else {
        cfg.n.clone().unwrap_or_else(|| vec![50, 100, 200])
    };
    let gammas = if !args.gamma.is_empty() {
        args.gamma.clone()
    } else {
        cfg.gamma.clone().unwrap_or_else(|| vec![0.1, 0.5, 1.0])
    };
    let p = args.p.or(cfg.p).unwrap_or(0.5);
    let seeds = if !args.seed.is_empty() {
        args.seed.clone()
    } else {
        cfg.seed.clone().unwrap_or_else(|| vec![1, 2, 3])
    };
    let method_names = if !args.method.is_empty() {
        args.method.clone()
    } else {
        cfg.method
            .clone()
            .unwrap_or_else(|| vec!["i-fista".into(), "ie-fista".into(), "ia-fista".into()])
    };
    let methods = parse_methods(&method_names)?;
    let params = build_params(&args.flags, &cfg, args.parallel);

    let mut specs = Vec::new();
    for &n in &ns {
        for &gamma in &gammas {
            for &seed in &seeds {
                specs.push(InstanceSpec::new(n, gamma, p, seed).map_err(usage)?);
            }
        }
    }
    if specs.is_empty() || methods.is_empty() {
        return Err(usage("bench needs at least one instance and one method"));
    }
    let out = cfg.out.as_ref().map_or(args.out.clone(), |c| {
        if args.out == Path::new("bench-out") {
            c.clone()
        } else {
            args.out.clone()
        }
    });

    eprintln!(
        "running {} instances x {} methods (parallel={})",
        specs.len(),
        methods.len(),
        params.parallel
    );
    let records = run_grid(&specs, &methods, &params).map_err(run_err)?;
    let table = emit_table(&records);
    let path = write_out(&out, "records.csv", &table)?;
    println!("wrote {} ({} rows)", path.display(), records.len());
    if args.profile {
        let curves = profile_by_time(&records).map_err(run_err)?;
        let ppath = write_out(&out, "profile.csv", &emit_profile(&curves))?;
        println!("wrote {}", ppath.display());
    }
    let failures: Vec<_> = records.iter().filter(|r| !r.solved()).collect();
    if !failures.is_empty() {
        eprintln!("{} run(s) did not converge:", failures.len());
        for f in failures {
            eprintln!(
                "  {} n={} gamma={} seed={}: {}",
                f.method, f.n, f.gamma, f.seed, f.stop_reason
            );
        }
    }
    Ok(())
}

fn cmd_profile(args: ProfileArgs) -> Result<(), CliError> {
    let text = std::fs::read_to_string(&args.records)
        .map_err(|e| usage(format!("cannot read {}: {e}", args.records.display())))?;
    let records = parse_table(&text).map_err(usage)?;
    let curves = profile_by_time(&records).map_err(run_err)?;
    let csv = emit_profile(&curves);
    match &args.out {
        Some(dir) => {
            let path = write_out(dir, "profile.csv", &csv)?;
            println!("wrote {}", path.display());
        }
        None => print!("{csv}"),
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.cmd {
        Cmd::Gen(args) => cmd_gen(args),
        Cmd::Solve(args) => cmd_solve(args),
        Cmd::Bench(args) => cmd_bench(args),
        Cmd::Profile(args) => cmd_profile(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            e.code()
        }
    }
}
