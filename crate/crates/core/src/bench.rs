//! Benchmark harness: instance grids, CSV tables, convergence traces, and
//! performance profiles.
//!
//! A grid run generates each instance, computes one shared initial point per
//! instance (its cost is excluded from the per-method wall time), runs every
//! requested method with the `max{r_p, r_d} ≤ tol` stopping test, and records
//! one row per (instance, method) pair. Rows keep deterministic order (spec
//! order, then method order) regardless of parallelism, and rerunning a grid
//! with the same seeds reproduces the iteration and evaluation counts
//! exactly; only the timings move.

use crate::error::{Error, Result};
use crate::instance::{make_instance, InstanceSpec};
use crate::lbfgs::LbfgsConfig;
use crate::ncm::{kkt_residuals, ncm_initial_point, ncm_problem, NcmComposite};
use crate::rules::{IerParams, IrParams};
use crate::solvers::{
    Method, MethodSpec, RunStop, SolveResult, SolverConfig, SolverTrace, StopRule,
};
use crate::sym::SymMatrix;
use rayon::prelude::*;
use std::fmt::Write as FmtWrite;

/// One (instance, method) outcome.
#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub n: usize,
    pub gamma: f64,
    pub p: f64,
    pub seed: u64,
    pub method: Method,
    /// Outer iterations.
    pub k: usize,
    /// Inner function/gradient evaluations.
    pub fgs: u64,
    pub time_seconds: f64,
    pub r_p: f64,
    pub r_d: f64,
    pub stop_reason: String,
}

impl RunRecord {
    pub fn solved(&self) -> bool {
        self.stop_reason == "converged"
    }
}

/// Parameters shared by all runs of a grid.
#[derive(Debug, Clone)]
pub struct BenchParams {
    /// IR rule `tau`.
    pub tau: f64,
    /// IR rule `alpha`; `None` picks the midpoint `(1 - tau) L / (2 tau)`.
    pub ir_alpha: Option<f64>,
    /// IER rule `sigma`.
    pub sigma: f64,
    /// IER rule `alpha`; `None` picks `2 / L`.
    pub ier_alpha: Option<f64>,
    /// Outer stopping tolerance on `max{r_p, r_d}`.
    pub tol: f64,
    pub max_iter: usize,
    pub inner: LbfgsConfig,
    /// Worker threads for grid cells; `0` uses all cores, `1` runs serially.
    pub parallel: usize,
}

impl Default for BenchParams {
    fn default() -> Self {
        BenchParams {
            tau: 0.9,
            ir_alpha: None,
            sigma: 0.9,
            ier_alpha: None,
            tol: 0.1,
            max_iter: 5000,
            inner: LbfgsConfig::default(),
            parallel: 1,
        }
    }
}

impl BenchParams {
    pub fn method_spec(&self, method: Method, lipschitz: f64) -> Result<MethodSpec> {
        Ok(match method {
            Method::Fista => MethodSpec::Fista,
            Method::Pgm => MethodSpec::Pgm,
            Method::IFista => {
                let alpha = self
                    .ir_alpha
                    .unwrap_or((1.0 - self.tau) * lipschitz / (2.0 * self.tau));
                MethodSpec::IFista(IrParams::new(self.tau, alpha, lipschitz)?)
            }
            Method::IeFista => {
                let alpha = self.ier_alpha.unwrap_or(2.0 / lipschitz);
                MethodSpec::IeFista(IerParams::new(self.sigma, alpha, lipschitz)?)
            }
            Method::IaFista => MethodSpec::IaFista,
        })
    }
}

/// A full single run: the record plus the solver result for trace export.
pub struct SingleRun {
    pub record: RunRecord,
    pub result: Option<SolveResult<SymMatrix>>,
}

fn run_methods_on_instance(
    spec: &InstanceSpec,
    methods: &[Method],
    params: &BenchParams,
    keep_results: bool,
) -> Result<Vec<SingleRun>> {
    let inst = make_instance(spec)?;
    let lipschitz = inst.lipschitz();
    let initial = ncm_initial_point(&inst, &params.inner)?;
    let problem: NcmComposite = ncm_problem(inst, params.inner.clone());
    let (rp0, rd0) = kkt_residuals(problem.instance(), &initial.x0, &initial.y, &initial.lambda)?;

    let mut runs = Vec::with_capacity(methods.len());
    for &method in methods {
        // The shared initial point may already satisfy the tolerance.
        if rp0.max(rd0) <= params.tol {
            runs.push(SingleRun {
                record: RunRecord {
                    n: spec.n,
                    gamma: spec.gamma,
                    p: spec.p,
                    seed: spec.seed,
                    method,
                    k: 0,
                    fgs: 0,
                    time_seconds: 0.0,
                    r_p: rp0,
                    r_d: rd0,
                    stop_reason: "converged".into(),
                },
                result: None,
            });
            continue;
        }
        let spec_m = match params.method_spec(method, lipschitz) {
            Ok(s) => s,
            Err(e) => {
                runs.push(SingleRun {
                    record: RunRecord {
                        n: spec.n,
                        gamma: spec.gamma,
                        p: spec.p,
                        seed: spec.seed,
                        method,
                        k: 0,
                        fgs: 0,
                        time_seconds: 0.0,
                        r_p: f64::NAN,
                        r_d: f64::NAN,
                        stop_reason: format!("failed:{e}"),
                    },
                    result: None,
                });
                continue;
            }
        };
        let cfg = SolverConfig {
            max_iter: params.max_iter,
            stop: StopRule::Kkt(params.tol),
            record_trace: true,
            record_iterates: false,
        };
        match spec_m.run(&problem, initial.x0.clone(), &cfg) {
            Ok(result) => {
                let (r_p, r_d) = result.final_kkt.unwrap_or((f64::NAN, f64::NAN));
                runs.push(SingleRun {
                    record: RunRecord {
                        n: spec.n,
                        gamma: spec.gamma,
                        p: spec.p,
                        seed: spec.seed,
                        method,
                        k: result.iterations,
                        fgs: result.inner_evals,
                        time_seconds: result.elapsed_seconds,
                        r_p,
                        r_d,
                        stop_reason: match result.stop {
                            RunStop::Converged => "converged".into(),
                            RunStop::MaxIterReached => "max_iter".into(),
                        },
                    },
                    result: keep_results.then_some(result),
                });
            }
            Err(e) => runs.push(SingleRun {
                record: RunRecord {
                    n: spec.n,
                    gamma: spec.gamma,
                    p: spec.p,
                    seed: spec.seed,
                    method,
                    k: 0,
                    fgs: 0,
                    time_seconds: 0.0,
                    r_p: f64::NAN,
                    r_d: f64::NAN,
                    stop_reason: format!("failed:{e}"),
                },
                result: None,
            }),
        }
    }
    Ok(runs)
}

/// Runs one method on one instance, keeping the full solver result.
pub fn run_single(spec: &InstanceSpec, method: Method, params: &BenchParams) -> Result<SingleRun> {
    let mut runs = run_methods_on_instance(spec, &[method], params, true)?;
    Ok(runs.remove(0))
}

/// Runs every method on every instance of the grid.
pub fn run_grid(
    specs: &[InstanceSpec],
    methods: &[Method],
    params: &BenchParams,
) -> Result<Vec<RunRecord>> {
    if specs.is_empty() || methods.is_empty() {
        return Err(Error::invalid(
            "grid needs at least one spec and one method",
        ));
    }
    let cell = |spec: &InstanceSpec| -> Result<Vec<RunRecord>> {
        Ok(run_methods_on_instance(spec, methods, params, false)?
            .into_iter()
            .map(|r| r.record)
            .collect())
    };
    let nested: Vec<Vec<RunRecord>> = if params.parallel == 1 {
        specs.iter().map(cell).collect::<Result<_>>()?
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(params.parallel)
            .build()
            .map_err(|e| Error::InnerFailure(format!("thread pool: {e}")))?;
        pool.install(|| specs.par_iter().map(cell).collect::<Result<_>>())?
    };
    Ok(nested.into_iter().flatten().collect())
}

/// The default desk-scale grid: `n ∈ {50, 100, 200}`, `gamma ∈ {0.1, 0.5, 1.0}`,
/// `p = 0.5`, three seeds per cell.
pub fn desk_grid() -> Vec<InstanceSpec> {
    let mut specs = Vec::new();
    for &n in &[50usize, 100, 200] {
        for &gamma in &[0.1, 0.5, 1.0] {
            for seed in 1..=3u64 {
                specs.push(InstanceSpec {
                    n,
                    gamma,
                    p: 0.5,
                    seed,
                });
            }
        }
    }
    specs
}

const TABLE_HEADER: &str = "n,gamma,p,seed,method,k,fgs,time_seconds,r_p,r_d,stop_reason";

/// Renders records as CSV (full-precision numbers, deterministic order as
/// given).
pub fn emit_table(records: &[RunRecord]) -> String {
    let mut out = String::from(TABLE_HEADER);
    out.push('\n');
    for r in records {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{}",
            r.n,
            r.gamma,
            r.p,
            r.seed,
            r.method,
            r.k,
            r.fgs,
            r.time_seconds,
            r.r_p,
            r.r_d,
            r.stop_reason
        )
        .expect("string write");
    }
    out
}

/// Parses a CSV produced by [`emit_table`].
pub fn parse_table(csv: &str) -> Result<Vec<RunRecord>> {
    let mut lines = csv.lines();
    match lines.next() {
        Some(h) if h.trim() == TABLE_HEADER => {}
        other => {
            return Err(Error::Parse(format!(
                "bad records header: expected {TABLE_HEADER:?}, got {other:?}"
            )))
        }
    }
    let mut records = Vec::new();
    for (lineno, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.splitn(11, ',').collect();
        if fields.len() != 11 {
            return Err(Error::Parse(format!(
                "line {}: expected 11 fields, got {}",
                lineno + 2,
                fields.len()
            )));
        }
        let parse_f = |s: &str| -> Result<f64> {
            s.parse::<f64>()
                .map_err(|e| Error::Parse(format!("line {}: {e}", lineno + 2)))
        };
        records.push(RunRecord {
            n: fields[0]
                .parse()
                .map_err(|e| Error::Parse(format!("line {}: {e}", lineno + 2)))?,
            gamma: parse_f(fields[1])?,
            p: parse_f(fields[2])?,
            seed: fields[3]
                .parse()
                .map_err(|e| Error::Parse(format!("line {}: {e}", lineno + 2)))?,
            method: fields[4].parse()?,
            k: fields[5]
                .parse()
                .map_err(|e| Error::Parse(format!("line {}: {e}", lineno + 2)))?,
            fgs: fields[6]
                .parse()
                .map_err(|e| Error::Parse(format!("line {}: {e}", lineno + 2)))?,
            time_seconds: parse_f(fields[7])?,
            r_p: parse_f(fields[8])?,
            r_d: parse_f(fields[9])?,
            stop_reason: fields[10].to_string(),
        });
    }
    Ok(records)
}

/// Renders the per-evaluation residual stream of a trace as CSV with columns
/// `fgs_index,max_kkt_residual`; line-search intermediates were already
/// replaced by their line-search-termination values when the trace was
/// recorded.
pub fn emit_trace(trace: &SolverTrace) -> String {
    let mut out = String::from("fgs_index,max_kkt_residual\n");
    for (i, r) in trace.inner_residuals.iter().enumerate() {
        writeln!(out, "{},{}", i + 1, r).expect("string write");
    }
    out
}

/// Renders the per-outer-iteration records of a trace as CSV.
pub fn emit_iterations(trace: &SolverTrace) -> String {
    let mut out = String::from(
        "k,objective,step_norm,v_norm,eps,mu,residual_norm,eps_total,inner_evals,cumulative_evals,elapsed_seconds,r_p,r_d,rule_satisfied\n",
    );
    let opt = |v: Option<f64>| v.map_or(String::new(), |x| format!("{x}"));
    for r in &trace.records {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            r.k,
            opt(r.objective),
            r.step_norm,
            r.v_norm,
            r.eps,
            opt(r.mu),
            r.residual_norm,
            r.eps_total,
            r.inner_evals,
            r.cumulative_evals,
            r.elapsed_seconds,
            opt(r.kkt.map(|k| k.0)),
            opt(r.kkt.map(|k| k.1)),
            r.rule_satisfied,
        )
        .expect("string write");
    }
    out
}

/// One abscissa of a performance profile.
#[derive(Debug, Clone, PartialEq)]
pub struct ProfilePoint {
    /// Ratio threshold `theta >= 1`.
    pub theta: f64,
    /// Fraction of instances each method solved within `theta` times the
    /// per-instance best time, parallel to [`ProfileCurves::methods`].
    pub fractions: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct ProfileCurves {
    pub methods: Vec<Method>,
    pub points: Vec<ProfilePoint>,
}

impl ProfileCurves {
    pub fn fraction_at(&self, method: Method, theta: f64) -> f64 {
        let mi = match self.methods.iter().position(|&m| m == method) {
            Some(i) => i,
            None => return 0.0,
        };
        self.points
            .iter()
            .rev()
            .find(|p| p.theta <= theta)
            .map(|p| p.fractions[mi])
            .unwrap_or(0.0)
    }
}

/// Dolan-More performance profile over the supplied per-record times.
/// Records are grouped into instances by `(n, gamma, p, seed)`; a method's
/// ratio on an instance is its time over the best time among methods that
/// solved it, `+∞` when unsolved. The profile is the step function sampled at
/// every observed ratio.
pub fn performance_profile(records: &[RunRecord], times: &[f64]) -> Result<ProfileCurves> {
    if records.len() != times.len() {
        return Err(Error::DimMismatch {
            expected: records.len(),
            got: times.len(),
        });
    }
    if times.iter().any(|&t| !(t >= 0.0)) {
        return Err(Error::invalid("times must be nonnegative"));
    }
    let mut methods: Vec<Method> = Vec::new();
    for r in records {
        if !methods.contains(&r.method) {
            methods.push(r.method);
        }
    }
    if methods.len() < 2 {
        return Err(Error::invalid(
            "performance profile needs at least two methods",
        ));
    }
    let mut instances: Vec<(usize, f64, f64, u64)> = Vec::new();
    for r in records {
        let key = (r.n, r.gamma, r.p, r.seed);
        if !instances.contains(&key) {
            instances.push(key);
        }
    }
    // ratio[i][m]
    let mut ratios = vec![vec![f64::INFINITY; methods.len()]; instances.len()];
    for (r, &t) in records.iter().zip(times.iter()) {
        let i = instances
            .iter()
            .position(|&k| k == (r.n, r.gamma, r.p, r.seed))
            .unwrap();
        let m = methods.iter().position(|&m| m == r.method).unwrap();
        if r.solved() {
            ratios[i][m] = t;
        }
    }
    for row in ratios.iter_mut() {
        let best = row.iter().cloned().fold(f64::INFINITY, f64::min);
        if best.is_finite() && best > 0.0 {
            for v in row.iter_mut() {
                *v /= best;
            }
        } else if best == 0.0 {
            // Zero best time (k = 0 records): solved methods tie at ratio 1.
            for v in row.iter_mut() {
                if v.is_finite() {
                    *v = 1.0;
                }
            }
        }
    }
    let mut thetas: Vec<f64> = ratios
        .iter()
        .flatten()
        .cloned()
        .filter(|v| v.is_finite())
        .collect();
    thetas.push(1.0);
    thetas.sort_by(|a, b| a.partial_cmp(b).unwrap());
    thetas.dedup();
    let count = instances.len() as f64;
    let points = thetas
        .into_iter()
        .map(|theta| ProfilePoint {
            theta,
            fractions: (0..methods.len())
                .map(|m| ratios.iter().filter(|row| row[m] <= theta).count() as f64 / count)
                .collect(),
        })
        .collect();
    Ok(ProfileCurves { methods, points })
}

/// Profile over the recorded wall times.
pub fn profile_by_time(records: &[RunRecord]) -> Result<ProfileCurves> {
    let times: Vec<f64> = records.iter().map(|r| r.time_seconds).collect();
    performance_profile(records, &times)
}

/// Renders profile curves as CSV: `theta` column plus one column per method.
pub fn emit_profile(curves: &ProfileCurves) -> String {
    let mut out = String::from("theta");
    for m in &curves.methods {
        write!(out, ",{m}").expect("string write");
    }
    out.push('\n');
    for p in &curves.points {
        write!(out, "{}", p.theta).expect("string write");
        for f in &p.fractions {
            write!(out, ",{f}").expect("string write");
        }
        out.push('\n');
    }
    out
}
