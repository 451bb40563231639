//! Composite problems `F = f + g` and certified inexact-prox triples.
//!
//! `f` is smooth convex with an `L`-Lipschitz gradient, `g` is closed convex
//! and possibly extended-valued. An inexact-prox oracle returns a triple
//! `(x, v, eps)` together with the witness `u` establishing
//! `u ∈ ∂_eps g(x)` and `v = u + c (x - y) + ∇f(y)`, so the inclusion
//! `v ∈ ∂_eps g(x) + c (x - y) + ∇f(y)` is certified by construction.
//! Membership in the epsilon-subdifferential cannot be verified exactly for
//! general `g`; [`check_eps_subgradient`] probes it as a necessary condition
//! only.

use crate::error::{Error, Result};
use crate::lbfgs::StopReason;
use crate::rules::RuleContext;
use crate::space::Point;

/// An extended real value: finite or `+∞`.
///
/// Indicator functions need a clean infinity; a sentinel float would make
/// comparisons and arithmetic ambiguous.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExtReal {
    Finite(f64),
    PosInf,
}

impl ExtReal {
    pub fn is_finite(self) -> bool {
        matches!(self, ExtReal::Finite(_))
    }

    pub fn finite(self) -> Option<f64> {
        match self {
            ExtReal::Finite(v) => Some(v),
            ExtReal::PosInf => None,
        }
    }

    /// `self + t` for finite `t`; infinity absorbs.
    pub fn add_finite(self, t: f64) -> ExtReal {
        match self {
            ExtReal::Finite(v) => ExtReal::Finite(v + t),
            ExtReal::PosInf => ExtReal::PosInf,
        }
    }

    /// `g(z) >= bound` with the convention that `+∞` dominates any bound.
    pub fn at_least(self, bound: f64) -> bool {
        match self {
            ExtReal::Finite(v) => v >= bound,
            ExtReal::PosInf => true,
        }
    }
}

/// Output of an inexact-prox oracle called at center `y` with coefficient `c`:
/// a point `x`, a residue `v`, an error level `eps`, and the subgradient
/// witness `u ∈ ∂_eps g(x)` with `v = u + c (x - y) + ∇f(y)`.
#[derive(Debug, Clone)]
pub struct CertifiedTriple<P> {
    pub x: P,
    pub v: P,
    pub eps: f64,
    pub witness: P,
}

impl<P: Point> CertifiedTriple<P> {
    /// Builds the triple from its witness, deriving `v = u + c (x - y) + g_y`.
    pub fn from_witness(
        x: P,
        witness: P,
        eps: f64,
        center: &P,
        coefficient: f64,
        grad_center: &P,
    ) -> Self {
        let mut v = witness.clone();
        v.axpy(coefficient, &x);
        v.axpy(-coefficient, center);
        v.axpy(1.0, grad_center);
        CertifiedTriple { x, v, eps, witness }
    }
}

/// Verdict of the `max{‖v‖, eps} ≤ rho` approximate-solution test.
#[derive(Debug, Clone)]
pub struct ApproxSolutionReport<P> {
    /// Residue vector `v` with `v ∈ ∂_eps F(x)`.
    pub r: P,
    pub eps: f64,
    pub rho: f64,
    pub accepted: bool,
}

/// Tests whether residues `(v, eps)` qualify a point as a rho-approximate
/// solution: accepted iff `max{‖v‖, eps} ≤ rho`.
pub fn check_rho_approximate<P: Point>(
    v: P,
    eps: f64,
    rho: f64,
) -> Result<ApproxSolutionReport<P>> {
    if !(rho > 0.0) {
        return Err(Error::invalid(format!("rho must be positive, got {rho}")));
    }
    if eps < 0.0 {
        return Err(Error::invalid(format!(
            "eps must be nonnegative, got {eps}"
        )));
    }
    let accepted = v.norm().max(eps) <= rho;
    Ok(ApproxSolutionReport {
        r: v,
        eps,
        rho,
        accepted,
    })
}

/// Probes the epsilon-subgradient inequality
/// `g(z) ≥ g(x) + ⟨u, z - x⟩ - eps` at the given probe points.
///
/// This is a necessary-condition sampler, not a verifier: passing all probes
/// does not prove `u ∈ ∂_eps g(x)`. `tol` is additive slack on the inequality
/// for floating-point headroom. Returns `false` when `g(x) = +∞` (the
/// inclusion requires `x ∈ dom g`).
pub fn check_eps_subgradient<P, G>(g: G, x: &P, u: &P, eps: f64, probes: &[P], tol: f64) -> bool
where
    P: Point,
    G: Fn(&P) -> ExtReal,
{
    assert!(eps >= 0.0, "eps must be nonnegative");
    assert!(!probes.is_empty(), "need at least one probe point");
    let gx = match g(x).finite() {
        Some(v) => v,
        None => return false,
    };
    probes.iter().all(|z| {
        let lin = u.dot(&Point::minus(z, x));
        g(z).at_least(gx + lin - eps - tol)
    })
}

/// One call to an inexact-prox oracle.
pub struct ProxRequest<'a, P, R> {
    /// Center `y` of the regularized subproblem.
    pub center: &'a P,
    /// Coefficient `c` of the target inclusion `v ∈ ∂_eps g(x) + c (x - y) + ∇f(y)`.
    pub coefficient: f64,
    /// Acceptance rule the produced triple must satisfy.
    pub rule: RuleContext,
    /// Warm-start token from the previous call, if any.
    pub resume: Option<&'a R>,
}

/// Result of an inexact-prox oracle call.
pub struct ProxOutcome<P, R> {
    pub triple: CertifiedTriple<P>,
    /// Inner function/gradient evaluations spent on this call (the "fgs" unit).
    pub evals: u64,
    pub stop_reason: StopReason,
    /// Whether the acceptance rule actually held at the returned triple. When
    /// the inner solver exhausts its fallbacks this is `false` and the caller
    /// decides the failure policy.
    pub rule_satisfied: bool,
    /// Primal/dual KKT residuals `(r_p, r_d)` of the outer problem at the
    /// returned point, when the oracle can report them.
    pub kkt: Option<(f64, f64)>,
    /// Per-evaluation `max{r_p, r_d}` stream with line-search intermediate
    /// values replaced by the value at line-search termination. Empty when the
    /// oracle has no such notion.
    pub inner_residuals: Vec<f64>,
    /// Warm-start token for the next call.
    pub resume: Option<R>,
}

/// Oracle bundle for a composite problem `F = f + g`.
///
/// All methods must be pure functions of their inputs: problems are immutable
/// after construction and oracles may be called from multiple threads
/// concurrently. Warm-start state is threaded explicitly through
/// [`ProxRequest::resume`] / [`ProxOutcome::resume`] rather than held inside
/// the problem.
pub trait CompositeProblem: Send + Sync {
    type Point: Point;
    /// Warm-start token threaded between successive `inexact_prox` calls.
    type Resume: Clone + Send + Sync;

    fn f_value(&self, x: &Self::Point) -> f64;

    fn f_grad(&self, x: &Self::Point) -> Self::Point;

    /// Lipschitz constant of `∇f`.
    fn lipschitz(&self) -> f64;

    fn g_value(&self, x: &Self::Point) -> ExtReal;

    /// Solves the prox subproblem at `req.center` inexactly, returning a
    /// certified triple accepted by `req.rule` (or the best fallback).
    fn inexact_prox(
        &self,
        req: ProxRequest<'_, Self::Point, Self::Resume>,
    ) -> Result<ProxOutcome<Self::Point, Self::Resume>>;

    /// `prox_{step·g}(z)` in closed form, when available.
    fn exact_prox(&self, _z: &Self::Point, _step: f64) -> Option<Self::Point> {
        None
    }

    /// `F(x) = f(x) + g(x)`, propagating `+∞` from `g`.
    fn composite_value(&self, x: &Self::Point) -> ExtReal {
        self.g_value(x).add_finite(self.f_value(x))
    }

    /// Objective recorded in solver traces, or `None` when not cheaply
    /// evaluable. Problems whose iterates are feasible by construction may
    /// override this to skip the `g` membership test.
    fn trace_objective(&self, x: &Self::Point) -> Option<f64> {
        self.composite_value(x).finite()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::Point;
    use nalgebra::DVector;

    fn vec1(x: f64) -> DVector<f64> {
        DVector::from_vec(vec![x])
    }

    fn abs1(x: &DVector<f64>) -> ExtReal {
        ExtReal::Finite(x[0].abs())
    }

    #[test]
    fn eps_subgradient_probe_l1() {
        // |u| <= 1 is a subgradient of |.| at 0.
        let x = vec1(0.0);
        let probes = [vec1(-1.0), vec1(1.0)];
        assert!(check_eps_subgradient(
            abs1,
            &x,
            &vec1(0.5),
            0.0,
            &probes,
            0.0
        ));
        // u = 2 fails at z = 1: 1 >= 2 is false.
        assert!(!check_eps_subgradient(
            abs1,
            &x,
            &vec1(2.0),
            0.0,
            &[vec1(1.0)],
            0.0
        ));
        // ... but passes with eps = 1: 1 >= 2 - 1.
        assert!(check_eps_subgradient(
            abs1,
            &x,
            &vec1(2.0),
            1.0,
            &[vec1(1.0)],
            0.0
        ));
    }

    #[test]
    fn eps_subgradient_rejects_infeasible_base_point() {
        let ind = |x: &DVector<f64>| {
            if x[0] == 0.0 {
                ExtReal::Finite(0.0)
            } else {
                ExtReal::PosInf
            }
        };
        assert!(!check_eps_subgradient(
            ind,
            &vec1(1.0),
            &vec1(0.0),
            0.0,
            &[vec1(0.0)],
            0.0
        ));
        // Infinite g at the probe always satisfies the inequality.
        assert!(check_eps_subgradient(
            ind,
            &vec1(0.0),
            &vec1(123.0),
            0.0,
            &[vec1(2.0)],
            0.0
        ));
    }

    #[test]
    fn rho_approximate_boundary() {
        let rep = check_rho_approximate(vec1(0.0), 0.0, 0.1).unwrap();
        assert!(rep.accepted);
        let rep = check_rho_approximate(vec1(0.2), 0.0, 0.1).unwrap();
        assert!(!rep.accepted);
        let rep = check_rho_approximate(vec1(0.05), 0.08, 0.1).unwrap();
        assert!(rep.accepted);
        assert!(check_rho_approximate(vec1(0.0), 0.0, 0.0).is_err());
        assert!(check_rho_approximate(vec1(0.0), -0.1, 1.0).is_err());
    }

    #[test]
    fn certified_triple_witness_identity() {
        // v = u + c (x - y) + grad, by construction.
        let x = DVector::from_vec(vec![1.0, 2.0]);
        let u = DVector::from_vec(vec![0.5, -0.5]);
        let y = DVector::from_vec(vec![0.0, 1.0]);
        let grad = DVector::from_vec(vec![0.25, 0.25]);
        let t = CertifiedTriple::from_witness(x.clone(), u.clone(), 0.0, &y, 2.0, &grad);
        let mut expect = u.clone();
        Point::axpy(&mut expect, 2.0, &x);
        Point::axpy(&mut expect, -2.0, &y);
        Point::axpy(&mut expect, 1.0, &grad);
        assert_eq!(t.v, expect);
        assert_eq!(t.witness, u);
    }

    #[test]
    fn ext_real_arithmetic() {
        assert_eq!(ExtReal::Finite(1.0).add_finite(2.0), ExtReal::Finite(3.0));
        assert_eq!(ExtReal::PosInf.add_finite(2.0), ExtReal::PosInf);
        assert!(ExtReal::PosInf.at_least(1e300));
        assert!(!ExtReal::Finite(0.0).at_least(1.0));
    }

    #[test]
    fn composite_value_propagates_indicator_infinity() {
        // f(x) = ½‖x‖², g the indicator of {0}: F(0) = 0, F(x) = +∞ otherwise.
        struct Pinned;
        impl CompositeProblem for Pinned {
            type Point = DVector<f64>;
            type Resume = ();
            fn f_value(&self, x: &DVector<f64>) -> f64 {
                0.5 * x.dot(x)
            }
            fn f_grad(&self, x: &DVector<f64>) -> DVector<f64> {
                x.clone()
            }
            fn lipschitz(&self) -> f64 {
                1.0
            }
            fn g_value(&self, x: &DVector<f64>) -> ExtReal {
                if x.iter().all(|&c| c == 0.0) {
                    ExtReal::Finite(0.0)
                } else {
                    ExtReal::PosInf
                }
            }
            fn inexact_prox(
                &self,
                req: ProxRequest<'_, DVector<f64>, ()>,
            ) -> crate::error::Result<ProxOutcome<DVector<f64>, ()>> {
                // Prox of the indicator is the constant zero map.
                let x = DVector::zeros(req.center.len());
                let grad = self.f_grad(req.center);
                let witness = {
                    // u = c (z - x) at x = 0 with z = y - grad/c, i.e. c y - grad.
                    let mut u = req.center.clone() * req.coefficient;
                    u.axpy(-1.0, &grad, 1.0);
                    u
                };
                let triple = CertifiedTriple::from_witness(
                    x.clone(),
                    witness,
                    0.0,
                    req.center,
                    req.coefficient,
                    &grad,
                );
                Ok(ProxOutcome {
                    triple,
                    evals: 1,
                    stop_reason: StopReason::RuleSatisfied,
                    rule_satisfied: true,
                    kkt: None,
                    inner_residuals: Vec::new(),
                    resume: None,
                })
            }
        }
        let p = Pinned;
        assert_eq!(p.composite_value(&vec1(0.0)), ExtReal::Finite(0.0));
        assert_eq!(p.composite_value(&vec1(0.5)), ExtReal::PosInf);
        assert_eq!(p.trace_objective(&vec1(0.5)), None);
    }
}
