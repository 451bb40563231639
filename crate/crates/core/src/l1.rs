//! Conformance toy problem: `f(x) = ½‖Ax - b‖²`, `g(x) = μ‖x‖₁`.
//!
//! The prox of `g` is the componentwise soft threshold, so this problem has a
//! closed-form exact prox against which the inexact machinery can be checked.
//! Its inexact-prox oracle certifies triples constructively: the exact prox
//! point `x*` of the subproblem comes with the known subgradient
//! `u = c (z - x*) ∈ ∂g(x*)`, and for a perturbed point `x` the same `u`
//! belongs to `∂_eps g(x)` with `eps = g(x) - g(x*) - ⟨u, x - x*⟩ ≥ 0`.
//!
//! By default the oracle returns the exact prox wrapped as a triple with
//! `v = 0`, `eps = 0`. With [`L1Problem::with_inexactness`] it instead perturbs
//! the exact solution as far as the acceptance rule allows (backing off until
//! the rule holds), which exercises the genuinely inexact paths and produces
//! residues `(v, eps)` that decay at the rule-driven rate.

use crate::error::{Error, Result};
use crate::lbfgs::StopReason;
use crate::problem::{CertifiedTriple, CompositeProblem, ExtReal, ProxOutcome, ProxRequest};
use crate::rules::RuleContext;
use crate::space::Point;
use nalgebra::{DMatrix, DVector};

/// Soft-threshold scalar: the prox of `level·|·|`.
pub fn soft_threshold(z: f64, level: f64) -> f64 {
    if z > level {
        z - level
    } else if z < -level {
        z + level
    } else {
        0.0
    }
}

#[derive(Debug, Clone)]
pub struct L1Problem {
    a: DMatrix<f64>,
    b: DVector<f64>,
    mu: f64,
    lipschitz: f64,
    /// Fraction in `[0, 1)` of the first perturbation size relative to the
    /// subproblem step; `0` keeps the oracle exact.
    inexactness: f64,
}

/// Builds the toy problem. The Lipschitz constant is the largest eigenvalue
/// of `AᵀA`.
pub fn make_l1_toy(a: DMatrix<f64>, b: DVector<f64>, mu: f64) -> Result<L1Problem> {
    if !(mu > 0.0) {
        return Err(Error::invalid(format!("mu must be positive, got {mu}")));
    }
    if a.nrows() != b.len() {
        return Err(Error::DimMismatch {
            expected: a.nrows(),
            got: b.len(),
        });
    }
    if a.iter().all(|&c| c == 0.0) {
        return Err(Error::invalid("A must be nonzero"));
    }
    let gram = a.transpose() * &a;
    let eigs = gram.symmetric_eigenvalues();
    let lipschitz = eigs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if !(lipschitz > 0.0) {
        return Err(Error::invalid("A^T A has no positive eigenvalue"));
    }
    Ok(L1Problem {
        a,
        b,
        mu,
        lipschitz,
        inexactness: 0.0,
    })
}

impl L1Problem {
    /// Makes the inexact-prox oracle deliberately inexact: candidate points
    /// are perturbed away from the exact subproblem solution by up to
    /// `theta` times the step length, backed off until the acceptance rule
    /// holds.
    pub fn with_inexactness(mut self, theta: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&theta) {
            return Err(Error::invalid(format!(
                "inexactness must lie in [0, 1), got {theta}"
            )));
        }
        self.inexactness = theta;
        Ok(self)
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    fn g(&self, x: &DVector<f64>) -> f64 {
        self.mu * x.iter().map(|c| c.abs()).sum::<f64>()
    }

    /// Exact subproblem solution at `center` with coefficient `c`, together
    /// with its witness `u = c (z - x*) ∈ ∂g(x*)`.
    fn exact_sub_solution(
        &self,
        center: &DVector<f64>,
        c: f64,
        grad: &DVector<f64>,
    ) -> (DVector<f64>, DVector<f64>) {
        let step = 1.0 / c;
        let mut z = center.clone();
        z.axpy(-step, grad, 1.0);
        let level = self.mu * step;
        let x = z.map(|zi| soft_threshold(zi, level));
        let mut u = &z - &x;
        u *= c;
        (x, u)
    }
}

impl CompositeProblem for L1Problem {
    type Point = DVector<f64>;
    type Resume = ();

    fn f_value(&self, x: &DVector<f64>) -> f64 {
        let r = &self.a * x - &self.b;
        0.5 * r.dot(&r)
    }

    fn f_grad(&self, x: &DVector<f64>) -> DVector<f64> {
        let r = &self.a * x - &self.b;
        self.a.transpose() * r
    }

    fn lipschitz(&self) -> f64 {
        self.lipschitz
    }

    fn g_value(&self, x: &DVector<f64>) -> ExtReal {
        ExtReal::Finite(self.g(x))
    }

    fn exact_prox(&self, z: &DVector<f64>, step: f64) -> Option<DVector<f64>> {
        let level = self.mu * step;
        Some(z.map(|zi| soft_threshold(zi, level)))
    }

    fn inexact_prox(
        &self,
        req: ProxRequest<'_, DVector<f64>, ()>,
    ) -> Result<ProxOutcome<DVector<f64>, ()>> {
        let grad = self.f_grad(req.center);
        let c_solve = req.rule.solve_coefficient();
        let c_rule = req.rule.inclusion_coefficient();
        let (x_exact, u) = self.exact_sub_solution(req.center, c_solve, &grad);

        let exact_triple = || match req.rule {
            // v must be exactly zero so that the boundary cases (tau = 1)
            // accept; building it from the witness would leave rounding dust.
            RuleContext::Ir(_) | RuleContext::Ia(_) => CertifiedTriple {
                x: x_exact.clone(),
                v: DVector::zeros(x_exact.len()),
                eps: 0.0,
                witness: u.clone(),
            },
            RuleContext::Ier(p) => {
                let mut v = req.center - &x_exact;
                v /= p.alpha();
                CertifiedTriple {
                    x: x_exact.clone(),
                    v,
                    eps: 0.0,
                    witness: u.clone(),
                }
            }
        };

        let mut triple = exact_triple();
        if self.inexactness > 0.0 {
            let n = x_exact.len();
            let dir = DVector::from_element(n, 1.0 / (n as f64).sqrt());
            let mut eta = self.inexactness * x_exact.dist(req.center);
            for _ in 0..60 {
                if eta == 0.0 {
                    break;
                }
                let mut x = x_exact.clone();
                x.axpy(eta, &dir, 1.0);
                let eps = (self.g(&x) - self.g(&x_exact) - eta * u.dot(&dir)).max(0.0);
                let cand =
                    CertifiedTriple::from_witness(x, u.clone(), eps, req.center, c_rule, &grad);
                if req.rule.accepts(req.center, &cand) {
                    triple = cand;
                    break;
                }
                eta *= 0.5;
            }
        }

        let rule_satisfied = req.rule.accepts(req.center, &triple);
        Ok(ProxOutcome {
            triple,
            evals: 1,
            stop_reason: StopReason::RuleSatisfied,
            rule_satisfied,
            kkt: None,
            inner_residuals: Vec::new(),
            resume: None,
        })
    }
}
