//! Outer iterations: FISTA/PGM with an exact prox, and the three inexact
//! variants I-FISTA (IR rule), IE-FISTA (IER rule), IA-FISTA (IA rule).
//!
//! All four share the same skeleton: solve a regularized subproblem at an
//! extrapolated center, advance the extrapolation schedule, and record
//! per-iteration residuals. I-FISTA's extrapolation carries a correction term
//! for the subproblem residue `v`; IE-FISTA maintains the extra-step pair
//! `(x_k, x̃_k)` driven by the `tau` schedule.
//!
//! For every method the trace records residues `(r_k, eps_total)` with
//! `r_k ∈ ∂_{eps_total} F(x_k)`, so a run can be judged as a rho-approximate
//! solution. Problems whose oracle reports outer KKT residuals (the matrix
//! problems) can instead stop on `max{r_p, r_d} ≤ tol`.

use crate::error::{Error, Result};
use crate::problem::{ApproxSolutionReport, CompositeProblem, ProxRequest};
use crate::rules::{IaParams, IerParams, IrParams, RuleContext};
use crate::schedules::{next_t_unchecked, next_tau_unchecked};
use crate::space::Point;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;
use std::time::Instant;

/// Method selector, also used to label benchmark records.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    Fista,
    Pgm,
    IFista,
    IeFista,
    IaFista,
}

impl Method {
    pub const ALL: [Method; 5] = [
        Method::Fista,
        Method::Pgm,
        Method::IFista,
        Method::IeFista,
        Method::IaFista,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Method::Fista => "fista",
            Method::Pgm => "pgm",
            Method::IFista => "i-fista",
            Method::IeFista => "ie-fista",
            Method::IaFista => "ia-fista",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fista" => Ok(Method::Fista),
            "pgm" => Ok(Method::Pgm),
            "i-fista" => Ok(Method::IFista),
            "ie-fista" => Ok(Method::IeFista),
            "ia-fista" => Ok(Method::IaFista),
            other => Err(Error::invalid(format!(
                "unknown method {other:?}; expected one of fista, pgm, i-fista, ie-fista, ia-fista"
            ))),
        }
    }
}

/// A method together with its rule parameters.
#[derive(Debug, Clone, Copy)]
pub enum MethodSpec {
    Fista,
    Pgm,
    IFista(IrParams),
    IeFista(IerParams),
    IaFista,
}

impl MethodSpec {
    pub fn method(&self) -> Method {
        match self {
            MethodSpec::Fista => Method::Fista,
            MethodSpec::Pgm => Method::Pgm,
            MethodSpec::IFista(_) => Method::IFista,
            MethodSpec::IeFista(_) => Method::IeFista,
            MethodSpec::IaFista => Method::IaFista,
        }
    }

    pub fn run<C: CompositeProblem>(
        &self,
        problem: &C,
        x0: C::Point,
        cfg: &SolverConfig,
    ) -> Result<SolveResult<C::Point>> {
        match self {
            MethodSpec::Fista => run_fista(problem, x0, cfg),
            MethodSpec::Pgm => run_pgm(problem, x0, cfg),
            MethodSpec::IFista(p) => run_i_fista(problem, x0, *p, cfg),
            MethodSpec::IeFista(p) => run_ie_fista(problem, x0, *p, cfg),
            MethodSpec::IaFista => run_ia_fista(problem, x0, cfg),
        }
    }
}

/// Outer termination test.
#[derive(Clone)]
pub enum StopRule {
    /// Stop once `max{‖r_k‖, eps_k} ≤ rho` at the current iterate.
    RhoResidual(f64),
    /// Stop once `max{r_p, r_d} ≤ tol`; requires an oracle reporting KKT
    /// residuals.
    Kkt(f64),
    /// Stop once the predicate holds for the current iteration record.
    Custom(Arc<dyn Fn(&IterationRecord) -> bool + Send + Sync>),
    /// Run until the iteration cap.
    MaxIterOnly,
}

impl fmt::Debug for StopRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StopRule::RhoResidual(rho) => write!(f, "RhoResidual({rho})"),
            StopRule::Kkt(tol) => write!(f, "Kkt({tol})"),
            StopRule::Custom(_) => write!(f, "Custom(..)"),
            StopRule::MaxIterOnly => write!(f, "MaxIterOnly"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SolverConfig {
    pub max_iter: usize,
    pub stop: StopRule,
    /// Keep per-iteration records and the per-evaluation residual stream.
    pub record_trace: bool,
    /// Additionally clone the iterates into the result (tests only; memory
    /// grows with `max_iter`).
    pub record_iterates: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            max_iter: 1000,
            stop: StopRule::MaxIterOnly,
            record_trace: true,
            record_iterates: false,
        }
    }
}

impl SolverConfig {
    fn validate(&self) -> Result<()> {
        if self.max_iter == 0 {
            return Err(Error::invalid("max_iter must be positive"));
        }
        match &self.stop {
            StopRule::RhoResidual(rho) if !(*rho > 0.0) => {
                Err(Error::invalid("rho must be positive"))
            }
            StopRule::Kkt(tol) if !(*tol > 0.0) => Err(Error::invalid("tol must be positive")),
            _ => Ok(()),
        }
    }
}

/// One outer iteration of the trace.
#[derive(Debug, Clone)]
pub struct IterationRecord {
    pub k: usize,
    /// `F(x_k)` when cheaply evaluable.
    pub objective: Option<f64>,
    /// `‖x_k - y_k‖` (for IE-FISTA, `‖x̃_k - y_{k-1}‖`).
    pub step_norm: f64,
    pub v_norm: f64,
    pub eps: f64,
    /// Smoothed-gap term `mu_k` of the extra-step method; `None` elsewhere.
    pub mu: Option<f64>,
    /// `‖r_k‖` with `r_k ∈ ∂_{eps_total} F(x_k)`.
    pub residual_norm: f64,
    /// `eps_k`, plus `mu_k` for IE-FISTA.
    pub eps_total: f64,
    /// Inner evaluations spent by this iteration.
    pub inner_evals: u64,
    pub cumulative_evals: u64,
    /// Wall-clock seconds since the run started.
    pub elapsed_seconds: f64,
    pub kkt: Option<(f64, f64)>,
    /// Whether the acceptance rule held at the accepted triple (it may not,
    /// under the accept-best-candidate fallback policy).
    pub rule_satisfied: bool,
}

/// Per-run trace: one record per outer iteration plus the per-inner-evaluation
/// KKT residual stream (when the oracle reports one).
#[derive(Debug, Clone, Default)]
pub struct SolverTrace {
    pub records: Vec<IterationRecord>,
    pub inner_residuals: Vec<f64>,
}

/// Residue pair achieving the best `max{‖r‖, eps}` over a run.
#[derive(Debug, Clone)]
pub struct BestResidual<P> {
    pub r: P,
    pub r_norm: f64,
    pub eps_total: f64,
    pub k: usize,
}

impl<P: Point> BestResidual<P> {
    fn score(&self) -> f64 {
        self.r_norm.max(self.eps_total)
    }
}

/// The extra-step method's residue: `r = v + L (y - x̃)` together with its
/// error level `eps_total = eps + mu`, where
/// `mu = f(x̃) - f(y) - ⟨∇f(y), x̃ - y⟩` is the linearization gap at the
/// subproblem center. Convexity gives `mu ≥ 0`, smoothness gives
/// `mu ≤ (L/2)‖x̃ - y‖²`, and `r ∈ ∂_{eps_total} F(x̃)`.
#[derive(Debug, Clone)]
pub struct IeResidual<P> {
    pub r: P,
    pub eps_total: f64,
    pub mu: f64,
}

/// Assembles the extra-step residue for an accepted triple at center `y`.
pub fn ie_residual<C: CompositeProblem>(
    problem: &C,
    triple: &crate::problem::CertifiedTriple<C::Point>,
    y: &C::Point,
    lipschitz: f64,
) -> IeResidual<C::Point> {
    let mut r = triple.v.clone();
    r.axpy(lipschitz, y);
    r.axpy(-lipschitz, &triple.x);
    let grad_y = problem.f_grad(y);
    let diff = Point::minus(&triple.x, y);
    // Nonnegative by convexity; clamp the rounding dust.
    let mu = (problem.f_value(&triple.x) - problem.f_value(y) - grad_y.dot(&diff)).max(0.0);
    IeResidual {
        r,
        eps_total: triple.eps + mu,
        mu,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RunStop {
    Converged,
    MaxIterReached,
}

#[derive(Debug, Clone)]
pub struct SolveResult<P> {
    pub method: Method,
    pub solution: P,
    pub iterations: usize,
    pub inner_evals: u64,
    pub stop: RunStop,
    /// Iterations whose accepted triple did not satisfy the rule.
    pub warnings: usize,
    pub best_residual: Option<BestResidual<P>>,
    pub final_kkt: Option<(f64, f64)>,
    pub trace: SolverTrace,
    /// Primary iterates (`x_k`; for IE-FISTA, `x̃_k`) when requested.
    pub iterates: Vec<P>,
    /// Companion iterates (`y_k`; for IE-FISTA, the extra-step `x_k`).
    pub aux_iterates: Vec<P>,
    pub elapsed_seconds: f64,
}

impl<P: Point> SolveResult<P> {
    pub fn converged(&self) -> bool {
        self.stop == RunStop::Converged
    }

    /// Best-so-far residues judged against the rho-approximate-solution test.
    pub fn residual_report(&self, rho: f64) -> Result<ApproxSolutionReport<P>> {
        residual_report(self, rho)
    }
}

/// Reports the best residue pair of a run under `max{‖r‖, eps} ≤ rho`.
pub fn residual_report<P: Point>(
    result: &SolveResult<P>,
    rho: f64,
) -> Result<ApproxSolutionReport<P>> {
    let best = result
        .best_residual
        .as_ref()
        .ok_or_else(|| Error::EmptyTrace("run recorded no residuals".into()))?;
    crate::problem::check_rho_approximate(best.r.clone(), best.eps_total, rho)
}

fn check_stop(stop: &StopRule, rec: &IterationRecord) -> Result<bool> {
    match stop {
        StopRule::MaxIterOnly => Ok(false),
        StopRule::RhoResidual(rho) => Ok(rec.residual_norm.max(rec.eps_total) <= *rho),
        StopRule::Kkt(tol) => match rec.kkt {
            Some((rp, rd)) => Ok(rp.max(rd) <= *tol),
            None => Err(Error::invalid(
                "KKT stop rule requires an oracle that reports KKT residuals",
            )),
        },
        StopRule::Custom(f) => Ok(f(rec)),
    }
}

struct RunState<P> {
    start: Instant,
    trace: SolverTrace,
    iterates: Vec<P>,
    aux_iterates: Vec<P>,
    best: Option<BestResidual<P>>,
    warnings: usize,
    cumulative_evals: u64,
    last_kkt: Option<(f64, f64)>,
}

struct Observation<P> {
    k: usize,
    objective: Option<f64>,
    step_norm: f64,
    v_norm: f64,
    eps: f64,
    mu: Option<f64>,
    r: P,
    r_norm: f64,
    eps_total: f64,
    inner_evals: u64,
    kkt: Option<(f64, f64)>,
    rule_satisfied: bool,
}

impl<P: Point> RunState<P> {
    fn new() -> Self {
        RunState {
            start: Instant::now(),
            trace: SolverTrace::default(),
            iterates: Vec::new(),
            aux_iterates: Vec::new(),
            best: None,
            warnings: 0,
            cumulative_evals: 0,
            last_kkt: None,
        }
    }

    /// Folds one iteration into the run state and returns its record (the
    /// record is always built; it lands in the trace only when requested).
    fn record(
        &mut self,
        cfg: &SolverConfig,
        obs: Observation<P>,
        iterate: &P,
        aux: &P,
    ) -> IterationRecord {
        self.cumulative_evals += obs.inner_evals;
        self.last_kkt = obs.kkt;
        if !obs.rule_satisfied {
            self.warnings += 1;
        }
        let rec = IterationRecord {
            k: obs.k,
            objective: obs.objective,
            step_norm: obs.step_norm,
            v_norm: obs.v_norm,
            eps: obs.eps,
            mu: obs.mu,
            residual_norm: obs.r_norm,
            eps_total: obs.eps_total,
            inner_evals: obs.inner_evals,
            cumulative_evals: self.cumulative_evals,
            elapsed_seconds: self.start.elapsed().as_secs_f64(),
            kkt: obs.kkt,
            rule_satisfied: obs.rule_satisfied,
        };
        let cand = BestResidual {
            r: obs.r,
            r_norm: obs.r_norm,
            eps_total: obs.eps_total,
            k: obs.k,
        };
        if self.best.as_ref().is_none_or(|b| cand.score() < b.score()) {
            self.best = Some(cand);
        }
        if cfg.record_trace {
            self.trace.records.push(rec.clone());
        }
        if cfg.record_iterates {
            self.iterates.push(iterate.clone());
            self.aux_iterates.push(aux.clone());
        }
        rec
    }

    fn finish(
        self,
        method: Method,
        solution: P,
        iterations: usize,
        stop: RunStop,
    ) -> SolveResult<P> {
        SolveResult {
            method,
            solution,
            iterations,
            inner_evals: self.cumulative_evals,
            stop,
            warnings: self.warnings,
            best_residual: self.best,
            final_kkt: self.last_kkt,
            elapsed_seconds: self.start.elapsed().as_secs_f64(),
            trace: self.trace,
            iterates: self.iterates,
            aux_iterates: self.aux_iterates,
        }
    }
}

/// FISTA with the exact prox: `x_k = prox_{g/L}(y_k - ∇f(y_k)/L)`.
pub fn run_fista<C: CompositeProblem>(
    problem: &C,
    x0: C::Point,
    cfg: &SolverConfig,
) -> Result<SolveResult<C::Point>> {
    run_exact(problem, x0, cfg, true)
}

/// Unaccelerated proximal gradient: FISTA with `t_k ≡ 1`.
pub fn run_pgm<C: CompositeProblem>(
    problem: &C,
    x0: C::Point,
    cfg: &SolverConfig,
) -> Result<SolveResult<C::Point>> {
    run_exact(problem, x0, cfg, false)
}

fn run_exact<C: CompositeProblem>(
    problem: &C,
    x0: C::Point,
    cfg: &SolverConfig,
    accelerated: bool,
) -> Result<SolveResult<C::Point>> {
    cfg.validate()?;
    let method = if accelerated {
        Method::Fista
    } else {
        Method::Pgm
    };
    let l = problem.lipschitz();
    let step = 1.0 / l;
    let mut state = RunState::new();
    let mut x_prev = x0.clone();
    let mut y = x0;
    let mut t = 1.0;
    let mut stop = RunStop::MaxIterReached;
    let mut iterations = 0;

    for k in 1..=cfg.max_iter {
        let grad_y = problem.f_grad(&y);
        let mut z = y.clone();
        z.axpy(-step, &grad_y);
        let x = problem
            .exact_prox(&z, step)
            .ok_or(Error::ExactProxUnavailable)?;

        // r_k = L (y_k - x_k) + ∇f(x_k) - ∇f(y_k) ∈ ∂F(x_k).
        let grad_x = problem.f_grad(&x);
        let mut r = Point::minus(&y, &x);
        r.scale(l);
        r.axpy(1.0, &grad_x);
        r.axpy(-1.0, &grad_y);
        let r_norm = r.norm();

        let t_next = if accelerated {
            next_t_unchecked(t)
        } else {
            1.0
        };
        let beta = (t - 1.0) / t_next;
        let mut y_next = x.clone();
        y_next.axpy(beta, &x);
        y_next.axpy(-beta, &x_prev);

        let rec = state.record(
            cfg,
            Observation {
                k,
                objective: problem.trace_objective(&x),
                step_norm: x.dist(&y),
                v_norm: 0.0,
                eps: 0.0,
                mu: None,
                r,
                r_norm,
                eps_total: 0.0,
                inner_evals: 1,
                kkt: None,
                rule_satisfied: true,
            },
            &x,
            &y,
        );
        iterations = k;
        let done = check_stop(&cfg.stop, &rec)?;

        x_prev = x;
        y = y_next;
        t = t_next;

        if done {
            stop = RunStop::Converged;
            break;
        }
    }

    Ok(state.finish(method, x_prev, iterations, stop))
}

/// I-FISTA: inexact FISTA under the IR rule, with the residue-corrected
/// extrapolation `y_{k+1} = x_k - (t_k/t_{k+1})(tau/L) v_k
/// + ((t_k-1)/t_{k+1})(x_k - x_{k-1})`.
pub fn run_i_fista<C: CompositeProblem>(
    problem: &C,
    x0: C::Point,
    params: IrParams,
    cfg: &SolverConfig,
) -> Result<SolveResult<C::Point>> {
    cfg.validate()?;
    let l = problem.lipschitz();
    if (params.lipschitz() - l).abs() > 1e-9 * l.max(1.0) {
        return Err(Error::invalid(format!(
            "IR params built for L={}, problem has L={l}",
            params.lipschitz()
        )));
    }
    let tau = params.tau();
    let c = l / tau;
    let mut state = RunState::new();
    let mut x_prev = x0.clone();
    let mut y = x0;
    let mut t = 1.0;
    let mut resume = None;
    let mut stop = RunStop::MaxIterReached;
    let mut iterations = 0;

    for k in 1..=cfg.max_iter {
        let out = problem.inexact_prox(ProxRequest {
            center: &y,
            coefficient: c,
            rule: RuleContext::Ir(params),
            resume: resume.as_ref(),
        })?;
        resume = out.resume;
        let triple = out.triple;
        let rule_ok = out.rule_satisfied && RuleContext::Ir(params).accepts(&y, &triple);
        if cfg.record_trace {
            state
                .trace
                .inner_residuals
                .extend(out.inner_residuals.iter());
        }

        // r_k = v_k + (L/tau)(y_k - x_k) + ∇f(x_k) - ∇f(y_k) ∈ ∂_{eps_k} F(x_k).
        let grad_y = problem.f_grad(&y);
        let grad_x = problem.f_grad(&triple.x);
        let mut r = triple.v.clone();
        r.axpy(c, &y);
        r.axpy(-c, &triple.x);
        r.axpy(1.0, &grad_x);
        r.axpy(-1.0, &grad_y);
        let r_norm = r.norm();

        let t_next = next_t_unchecked(t);
        let beta = (t - 1.0) / t_next;
        let v_weight = (t / t_next) * (tau / l);
        let mut y_next = triple.x.clone();
        y_next.axpy(-v_weight, &triple.v);
        y_next.axpy(beta, &triple.x);
        y_next.axpy(-beta, &x_prev);

        let rec = state.record(
            cfg,
            Observation {
                k,
                objective: problem.trace_objective(&triple.x),
                step_norm: triple.x.dist(&y),
                v_norm: triple.v.norm(),
                eps: triple.eps,
                mu: None,
                r,
                r_norm,
                eps_total: triple.eps,
                inner_evals: out.evals,
                kkt: out.kkt,
                rule_satisfied: rule_ok,
            },
            &triple.x,
            &y,
        );
        iterations = k;
        let done = check_stop(&cfg.stop, &rec)?;

        x_prev = triple.x;
        y = y_next;
        t = t_next;

        if done {
            stop = RunStop::Converged;
            break;
        }
    }

    Ok(state.finish(Method::IFista, x_prev, iterations, stop))
}

/// IE-FISTA: the extra-step method under the IER rule.
pub fn run_ie_fista<C: CompositeProblem>(
    problem: &C,
    x0: C::Point,
    params: IerParams,
    cfg: &SolverConfig,
) -> Result<SolveResult<C::Point>> {
    cfg.validate()?;
    let l = problem.lipschitz();
    if (params.lipschitz() - l).abs() > 1e-9 * l.max(1.0) {
        return Err(Error::invalid(format!(
            "IER params built for L={}, problem has L={l}",
            params.lipschitz()
        )));
    }
    let lambda = params.lambda();
    let mut state = RunState::new();
    let mut x = x0.clone();
    let mut xt = x0;
    let mut tau = 0.0;
    let mut resume = None;
    let mut stop = RunStop::MaxIterReached;
    let mut iterations = 0;

    for k in 1..=cfg.max_iter {
        let tau_next = next_tau_unchecked(tau, lambda);
        let y = Point::lin_comb(tau / tau_next, &xt, (tau_next - tau) / tau_next, &x);

        let out = problem.inexact_prox(ProxRequest {
            center: &y,
            coefficient: l,
            rule: RuleContext::Ier(params),
            resume: resume.as_ref(),
        })?;
        resume = out.resume;
        let triple = out.triple;
        let rule_ok = out.rule_satisfied && RuleContext::Ier(params).accepts(&y, &triple);
        if cfg.record_trace {
            state
                .trace
                .inner_residuals
                .extend(out.inner_residuals.iter());
        }

        let residual = ie_residual(problem, &triple, &y, l);
        let r_norm = residual.r.norm();

        // x_k = x_{k-1} - (tau_k - tau_{k-1}) r_k.
        let mut x_next = x.clone();
        x_next.axpy(-(tau_next - tau), &residual.r);

        let rec = state.record(
            cfg,
            Observation {
                k,
                objective: problem.trace_objective(&triple.x),
                step_norm: triple.x.dist(&y),
                v_norm: triple.v.norm(),
                eps: triple.eps,
                mu: Some(residual.mu),
                eps_total: residual.eps_total,
                r: residual.r,
                r_norm,
                inner_evals: out.evals,
                kkt: out.kkt,
                rule_satisfied: rule_ok,
            },
            &triple.x,
            &x,
        );
        iterations = k;
        let done = check_stop(&cfg.stop, &rec)?;

        x = x_next;
        xt = triple.x;
        tau = tau_next;

        if done {
            stop = RunStop::Converged;
            break;
        }
    }

    Ok(state.finish(Method::IeFista, xt, iterations, stop))
}

/// IA-FISTA: the absolute-rule baseline with `delta_k = t_k^{-2}` and the
/// plain FISTA extrapolation.
pub fn run_ia_fista<C: CompositeProblem>(
    problem: &C,
    x0: C::Point,
    cfg: &SolverConfig,
) -> Result<SolveResult<C::Point>> {
    cfg.validate()?;
    let l = problem.lipschitz();
    let mut state = RunState::new();
    let mut x_prev = x0.clone();
    let mut y = x0;
    let mut t = 1.0;
    let mut resume = None;
    let mut stop = RunStop::MaxIterReached;
    let mut iterations = 0;

    for k in 1..=cfg.max_iter {
        let params = IaParams::with_default_delta(l, t)?;
        let out = problem.inexact_prox(ProxRequest {
            center: &y,
            coefficient: l,
            rule: RuleContext::Ia(params),
            resume: resume.as_ref(),
        })?;
        resume = out.resume;
        let triple = out.triple;
        let rule_ok = out.rule_satisfied && RuleContext::Ia(params).accepts(&y, &triple);
        if cfg.record_trace {
            state
                .trace
                .inner_residuals
                .extend(out.inner_residuals.iter());
        }

        // r_k = v_k + L (y_k - x_k) + ∇f(x_k) - ∇f(y_k) ∈ ∂_{eps_k} F(x_k).
        let grad_y = problem.f_grad(&y);
        let grad_x = problem.f_grad(&triple.x);
        let mut r = triple.v.clone();
        r.axpy(l, &y);
        r.axpy(-l, &triple.x);
        r.axpy(1.0, &grad_x);
        r.axpy(-1.0, &grad_y);
        let r_norm = r.norm();

        let t_next = next_t_unchecked(t);
        let beta = (t - 1.0) / t_next;
        let mut y_next = triple.x.clone();
        y_next.axpy(beta, &triple.x);
        y_next.axpy(-beta, &x_prev);

        let rec = state.record(
            cfg,
            Observation {
                k,
                objective: problem.trace_objective(&triple.x),
                step_norm: triple.x.dist(&y),
                v_norm: triple.v.norm(),
                eps: triple.eps,
                mu: None,
                r,
                r_norm,
                eps_total: triple.eps,
                inner_evals: out.evals,
                kkt: out.kkt,
                rule_satisfied: rule_ok,
            },
            &triple.x,
            &y,
        );
        iterations = k;
        let done = check_stop(&cfg.stop, &rec)?;

        x_prev = triple.x;
        y = y_next;
        t = t_next;

        if done {
            stop = RunStop::Converged;
            break;
        }
    }

    Ok(state.finish(Method::IaFista, x_prev, iterations, stop))
}
