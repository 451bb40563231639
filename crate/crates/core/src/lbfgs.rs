//! Limited-memory quasi-Newton minimizer for smooth inner problems.
//!
//! Two-loop recursion with a strong-Wolfe line search. The caller supplies a
//! stop predicate that is evaluated at every point *accepted* by the line
//! search (including the starting point); line-search trial points never
//! trigger it. This lets an inexactness acceptance rule terminate the inner
//! solve the moment a good enough candidate exists, with a gradient-norm
//! fallback for the case where the rule never fires.
//!
//! Every oracle call is counted in `evals`; this is the "fgs" cost unit
//! reported by the benchmark tables.

use crate::error::{Error, Result};
use nalgebra::DVector;
use std::collections::VecDeque;

/// Why an inner solve stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    /// The caller's stop predicate fired.
    RuleSatisfied,
    /// Fallback gradient tolerance reached without the predicate firing.
    GradTol,
    /// The line search could not find a strong-Wolfe step.
    LinesearchFailure,
    /// Two consecutive accepted iterates had bitwise-identical values.
    IdenticalValues,
    /// Evaluation budget exhausted.
    BudgetExhausted,
}

impl StopReason {
    pub fn as_str(&self) -> &'static str {
        match self {
            StopReason::RuleSatisfied => "rule_satisfied",
            StopReason::GradTol => "grad_tol",
            StopReason::LinesearchFailure => "linesearch_failure",
            StopReason::IdenticalValues => "identical_values",
            StopReason::BudgetExhausted => "budget_exhausted",
        }
    }
}

#[derive(Debug, Clone)]
pub struct LbfgsConfig {
    /// Number of curvature pairs kept for the two-loop recursion.
    pub memory: usize,
    /// Hard cap on oracle evaluations per `minimize` call.
    pub max_evals: u64,
    /// Sufficient-decrease constant of the Wolfe conditions.
    pub c1: f64,
    /// Curvature constant of the Wolfe conditions.
    pub c2: f64,
    /// Gradient norm at which the solve stops if the predicate never fires.
    pub fallback_grad_tol: f64,
    /// Scale of the initial inverse-Hessian approximation `H0 = scale · I`,
    /// used until the first curvature pair replaces it. Callers that know the
    /// problem's curvature scale should set it (the dual subproblems here
    /// have curvature `~1/c`, so they pass `c`).
    pub initial_hessian_scale: f64,
}

impl Default for LbfgsConfig {
    fn default() -> Self {
        LbfgsConfig {
            memory: 8,
            max_evals: 500,
            c1: 1e-4,
            c2: 0.9,
            fallback_grad_tol: 1e-9,
            initial_hessian_scale: 1.0,
        }
    }
}

impl LbfgsConfig {
    pub fn validate(&self) -> Result<()> {
        if self.memory == 0 {
            return Err(Error::invalid("lbfgs memory must be positive"));
        }
        if self.max_evals == 0 {
            return Err(Error::invalid("lbfgs max_evals must be positive"));
        }
        if !(0.0 < self.c1 && self.c1 < self.c2 && self.c2 < 1.0) {
            return Err(Error::invalid(format!(
                "wolfe constants must satisfy 0 < c1 < c2 < 1, got c1={}, c2={}",
                self.c1, self.c2
            )));
        }
        if !(self.fallback_grad_tol > 0.0) {
            return Err(Error::invalid("fallback_grad_tol must be positive"));
        }
        if !(self.initial_hessian_scale > 0.0) {
            return Err(Error::invalid("initial_hessian_scale must be positive"));
        }
        Ok(())
    }
}

/// Result of one inner solve.
#[derive(Debug, Clone)]
pub struct InnerOutcome {
    pub y: DVector<f64>,
    pub value: f64,
    pub grad: DVector<f64>,
    /// Oracle evaluations spent (function and gradient are evaluated together).
    pub evals: u64,
    pub stop_reason: StopReason,
}

struct CurvaturePair {
    s: DVector<f64>,
    y: DVector<f64>,
    rho: f64,
}

struct EvalCtx<F> {
    oracle: F,
    evals: u64,
    max_evals: u64,
}

enum Evaluated {
    Point { value: f64, grad: DVector<f64> },
    OutOfBudget,
}

impl<F> EvalCtx<F>
where
    F: FnMut(&DVector<f64>) -> Result<(f64, DVector<f64>)>,
{
    fn eval(&mut self, y: &DVector<f64>) -> Result<Evaluated> {
        if self.evals >= self.max_evals {
            return Ok(Evaluated::OutOfBudget);
        }
        self.evals += 1;
        let (value, grad) = (self.oracle)(y)?;
        if !value.is_finite() || grad.iter().any(|c| !c.is_finite()) {
            return Err(Error::NonFinite(format!(
                "inner objective at evaluation {}",
                self.evals
            )));
        }
        Ok(Evaluated::Point { value, grad })
    }
}

/// `-H g` via the two-loop recursion, with `H0 = gamma I`.
fn two_loop(history: &VecDeque<CurvaturePair>, grad: &DVector<f64>, gamma: f64) -> DVector<f64> {
    let mut q = grad.clone();
    let mut alphas = Vec::with_capacity(history.len());
    for pair in history.iter().rev() {
        let a = pair.rho * pair.s.dot(&q);
        q.axpy(-a, &pair.y, 1.0);
        alphas.push(a);
    }
    q *= gamma;
    for (pair, a) in history.iter().zip(alphas.into_iter().rev()) {
        let b = pair.rho * pair.y.dot(&q);
        q.axpy(a - b, &pair.s, 1.0);
    }
    -q
}

enum LineSearchOutcome {
    Accepted {
        y: DVector<f64>,
        value: f64,
        grad: DVector<f64>,
    },
    Failed,
    OutOfBudget,
}

/// Strong-Wolfe line search: bracketing phase with step doubling followed by
/// zoom with safeguarded cubic interpolation.
#[allow(clippy::too_many_arguments)]
fn line_search<F>(
    ctx: &mut EvalCtx<F>,
    y: &DVector<f64>,
    f0: f64,
    dphi0: f64,
    dir: &DVector<f64>,
    a_init: f64,
    c1: f64,
    c2: f64,
) -> Result<LineSearchOutcome>
where
    F: FnMut(&DVector<f64>) -> Result<(f64, DVector<f64>)>,
{
    const MAX_EXPAND: usize = 20;
    const MAX_ZOOM: usize = 30;
    // (point, value, slope along dir, gradient); None when out of budget.
    type Probed = Option<(DVector<f64>, f64, f64, DVector<f64>)>;
    let probe = |ctx: &mut EvalCtx<F>, a: f64| -> Result<Probed> {
        let mut ya = y.clone();
        ya.axpy(a, dir, 1.0);
        match ctx.eval(&ya)? {
            Evaluated::OutOfBudget => Ok(None),
            Evaluated::Point { value, grad } => {
                let slope = grad.dot(dir);
                Ok(Some((ya, value, slope, grad)))
            }
        }
    };

    let zoom = |ctx: &mut EvalCtx<F>,
                mut a_lo: f64,
                mut f_lo: f64,
                mut d_lo: f64,
                mut a_hi: f64,
                mut f_hi: f64,
                mut d_hi: f64|
     -> Result<LineSearchOutcome> {
        for _ in 0..MAX_ZOOM {
            let width = a_hi - a_lo;
            if width.abs() <= f64::EPSILON * a_lo.abs().max(1.0) {
                return Ok(LineSearchOutcome::Failed);
            }
            // Cubic interpolation of the two endpoint (value, slope) pairs,
            // safeguarded away from the interval ends; bisection fallback.
            let a = {
                let d1 = d_lo + d_hi - 3.0 * (f_lo - f_hi) / (a_lo - a_hi);
                let disc = d1 * d1 - d_lo * d_hi;
                let mut cand = if disc >= 0.0 {
                    let d2 = disc.sqrt().copysign(width);
                    a_hi - width * (d_hi + d2 - d1) / (d_hi - d_lo + 2.0 * d2)
                } else {
                    f64::NAN
                };
                let lo = a_lo.min(a_hi);
                let hi = a_lo.max(a_hi);
                let margin = 0.1 * (hi - lo);
                if !cand.is_finite() || cand < lo + margin || cand > hi - margin {
                    cand = a_lo + 0.5 * width;
                }
                cand
            };
            let (ya, fa, da, ga) = match probe(ctx, a)? {
                Some(p) => p,
                None => return Ok(LineSearchOutcome::OutOfBudget),
            };
            if fa > f0 + c1 * a * dphi0 || fa >= f_lo {
                a_hi = a;
                f_hi = fa;
                d_hi = da;
            } else {
                if da.abs() <= -c2 * dphi0 {
                    return Ok(LineSearchOutcome::Accepted {
                        y: ya,
                        value: fa,
                        grad: ga,
                    });
                }
                if da * (a_hi - a_lo) >= 0.0 {
                    a_hi = a_lo;
                    f_hi = f_lo;
                    d_hi = d_lo;
                }
                a_lo = a;
                f_lo = fa;
                d_lo = da;
            }
        }
        Ok(LineSearchOutcome::Failed)
    };

    let mut a_prev = 0.0;
    let mut f_prev = f0;
    let mut d_prev = dphi0;
    let mut a = a_init;
    for i in 0..MAX_EXPAND {
        let (ya, fa, da, ga) = match probe(ctx, a)? {
            Some(p) => p,
            None => return Ok(LineSearchOutcome::OutOfBudget),
        };
        if fa > f0 + c1 * a * dphi0 || (i > 0 && fa >= f_prev) {
            return zoom(ctx, a_prev, f_prev, d_prev, a, fa, da);
        }
        if da.abs() <= -c2 * dphi0 {
            return Ok(LineSearchOutcome::Accepted {
                y: ya,
                value: fa,
                grad: ga,
            });
        }
        if da >= 0.0 {
            return zoom(ctx, a, fa, da, a_prev, f_prev, d_prev);
        }
        a_prev = a;
        f_prev = fa;
        d_prev = da;
        a *= 2.0;
    }
    Ok(LineSearchOutcome::Failed)
}

/// Minimizes a smooth function, stopping as soon as `stop` holds at an
/// accepted point. Falls back to the gradient tolerance, line-search failure,
/// identical consecutive values, or the evaluation budget.
pub fn minimize<F, S>(
    value_grad: F,
    y0: DVector<f64>,
    cfg: &LbfgsConfig,
    mut stop: S,
) -> Result<InnerOutcome>
where
    F: FnMut(&DVector<f64>) -> Result<(f64, DVector<f64>)>,
    S: FnMut(&DVector<f64>, f64, &DVector<f64>) -> bool,
{
    cfg.validate()?;
    let mut ctx = EvalCtx {
        oracle: value_grad,
        evals: 0,
        max_evals: cfg.max_evals,
    };

    let (mut value, mut grad) = match ctx.eval(&y0)? {
        Evaluated::Point { value, grad } => (value, grad),
        Evaluated::OutOfBudget => unreachable!("max_evals validated positive"),
    };
    let mut y = y0;

    let finish =
        |y: DVector<f64>, value: f64, grad: DVector<f64>, evals: u64, reason: StopReason| {
            Ok(InnerOutcome {
                y,
                value,
                grad,
                evals,
                stop_reason: reason,
            })
        };

    if stop(&y, value, &grad) {
        return finish(y, value, grad, ctx.evals, StopReason::RuleSatisfied);
    }
    if grad.norm() <= cfg.fallback_grad_tol {
        return finish(y, value, grad, ctx.evals, StopReason::GradTol);
    }

    let mut history: VecDeque<CurvaturePair> = VecDeque::with_capacity(cfg.memory);
    let mut gamma = cfg.initial_hessian_scale;

    loop {
        if ctx.evals >= ctx.max_evals {
            return finish(y, value, grad, ctx.evals, StopReason::BudgetExhausted);
        }
        let mut dir = two_loop(&history, &grad, gamma);
        let mut dphi0 = dir.dot(&grad);
        if dphi0 >= 0.0 {
            // Curvature history gave a non-descent direction; restart.
            history.clear();
            dir = -&grad;
            dphi0 = -grad.dot(&grad);
            if dphi0 >= 0.0 {
                return finish(y, value, grad, ctx.evals, StopReason::GradTol);
            }
        }

        let (y_new, f_new, g_new) =
            match line_search(&mut ctx, &y, value, dphi0, &dir, 1.0, cfg.c1, cfg.c2)? {
                LineSearchOutcome::Accepted { y, value, grad } => (y, value, grad),
                LineSearchOutcome::Failed => {
                    return finish(y, value, grad, ctx.evals, StopReason::LinesearchFailure)
                }
                LineSearchOutcome::OutOfBudget => {
                    return finish(y, value, grad, ctx.evals, StopReason::BudgetExhausted)
                }
            };

        let s = &y_new - &y;
        let yk = &g_new - &grad;
        let sy = s.dot(&yk);
        if sy > 1e-10 * s.norm() * yk.norm() {
            gamma = sy / yk.dot(&yk);
            if history.len() == cfg.memory {
                history.pop_front();
            }
            history.push_back(CurvaturePair {
                s,
                y: yk,
                rho: 1.0 / sy,
            });
        }

        let f_prev = value;
        y = y_new;
        value = f_new;
        grad = g_new;

        if stop(&y, value, &grad) {
            return finish(y, value, grad, ctx.evals, StopReason::RuleSatisfied);
        }
        if value == f_prev {
            return finish(y, value, grad, ctx.evals, StopReason::IdenticalValues);
        }
        if grad.norm() <= cfg.fallback_grad_tol {
            return finish(y, value, grad, ctx.evals, StopReason::GradTol);
        }
    }
}
