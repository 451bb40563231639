//! The H-weighted nearest correlation matrix problem as a composite problem.
//!
//! Minimize `f(X) = ½‖H∘(X - G)‖²_F` over the correlation matrices
//! `C = {X ⪰ 0, diag(X) = e}`, i.e. `f + g` with `g` the indicator of `C`.
//! `∇f(X) = H∘H∘(X - G)` is Lipschitz with constant `L = ‖H∘H‖_F`.
//!
//! The prox subproblem at center `Y` with coefficient `c` has the smooth dual
//!
//! ```text
//! phi(y) = (c/2) ‖[B + Diag(y)/c]₊‖²_F - ⟨e, y⟩,   B = Y - ∇f(Y)/c,
//! ∇phi(y) = diag([B + Diag(y)/c]₊) - e,
//! ```
//!
//! solved by the limited-memory quasi-Newton inner solver. From any dual point
//! `y`, setting `M = B + Diag(y)/c`, `X = M₊`, `Λ = -c·M₋` gives
//! `∇f(Y) + c(X - Y) - Diag(y) - Λ = 0` identically, with `X ⪰ 0`, `Λ ⪰ 0`,
//! `⟨Λ, X⟩ = 0`. The recovered `X` has only an approximate unit diagonal, so
//! it is rescaled to `X̂ = D X D` with `D = Diag(diag X)^{-1/2}`; then
//! `Γ = -Diag(y) - Λ` is an `eps`-subgradient of `g` at `X̂` with
//! `eps = ⟨Λ, X̂⟩`, which is exactly the certificate the acceptance rules need.
//!
//! One dual evaluation costs one full symmetric eigendecomposition; that is
//! the dominant cost of the whole solver and the unit of the benchmark
//! tables' "fgs" column.

use crate::error::{Error, Result};
use crate::lbfgs::{minimize, LbfgsConfig, StopReason};
use crate::problem::{CertifiedTriple, CompositeProblem, ExtReal, ProxOutcome, ProxRequest};
use crate::space::Point;
use crate::sym::{reconstruct, sym_eigen, SymMatrix};
use nalgebra::{DMatrix, DVector};
use std::cell::RefCell;
use std::io::{BufRead, Write as IoWrite};
use std::path::Path;

/// Diagonal entries of the recovered primal point must exceed this before the
/// `D X D` rescaling is attempted; below it the inner solve is considered
/// insufficiently converged and retried with a tighter gradient tolerance.
pub const DEFAULT_DIAG_GUARD: f64 = 1e-8;

/// Problem data: target `G`, weights `H`, both symmetric with unit diagonal,
/// `H` entrywise in `[0, 1]`.
#[derive(Debug, Clone)]
pub struct NcmInstance {
    g: SymMatrix,
    h: SymMatrix,
    h_sq: SymMatrix,
    lipschitz: f64,
}

impl NcmInstance {
    pub fn new(g: SymMatrix, h: SymMatrix) -> Result<Self> {
        if g.order() != h.order() {
            return Err(Error::DimMismatch {
                expected: g.order(),
                got: h.order(),
            });
        }
        let n = g.order();
        if n == 0 {
            return Err(Error::invalid("order must be at least 1"));
        }
        let mut g = g;
        let mut h = h;
        for i in 0..n {
            if (g.get(i, i) - 1.0).abs() > 1e-12 || (h.get(i, i) - 1.0).abs() > 1e-12 {
                return Err(Error::invalid(format!(
                    "G and H must have unit diagonals (entry {i}: G={}, H={})",
                    g.get(i, i),
                    h.get(i, i)
                )));
            }
            g.set(i, i, 1.0);
            h.set(i, i, 1.0);
        }
        if h.values().iter().any(|&v| !(0.0..=1.0).contains(&v)) {
            return Err(Error::invalid("H entries must lie in [0, 1]"));
        }
        if g.values().iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("instance matrix G".into()));
        }
        let h_sq = h.hadamard(&h);
        let lipschitz = h_sq.fro_norm();
        Ok(NcmInstance {
            g,
            h,
            h_sq,
            lipschitz,
        })
    }

    pub fn order(&self) -> usize {
        self.g.order()
    }

    pub fn g(&self) -> &SymMatrix {
        &self.g
    }

    pub fn h(&self) -> &SymMatrix {
        &self.h
    }

    /// `L = ‖H∘H‖_F`.
    pub fn lipschitz(&self) -> f64 {
        self.lipschitz
    }
}

/// `f(X) = ½‖H∘(X - G)‖²_F`.
pub fn ncm_objective(inst: &NcmInstance, x: &SymMatrix) -> Result<f64> {
    if x.order() != inst.order() {
        return Err(Error::DimMismatch {
            expected: inst.order(),
            got: x.order(),
        });
    }
    let mut diff = x.clone();
    diff.axpy(-1.0, &inst.g);
    let weighted = inst.h.hadamard(&diff);
    Ok(0.5 * Point::dot(&weighted, &weighted))
}

/// `∇f(X) = H∘H∘(X - G)`.
pub fn ncm_gradient(inst: &NcmInstance, x: &SymMatrix) -> Result<SymMatrix> {
    if x.order() != inst.order() {
        return Err(Error::DimMismatch {
            expected: inst.order(),
            got: x.order(),
        });
    }
    let mut diff = x.clone();
    diff.axpy(-1.0, &inst.g);
    Ok(inst.h_sq.hadamard(&diff))
}

/// One dual evaluation: value, gradient, and the eigendecomposition of
/// `M = B + Diag(y)/c` it was computed from.
#[derive(Debug, Clone)]
pub struct DualEval {
    pub y: DVector<f64>,
    pub phi: f64,
    pub grad: DVector<f64>,
    pub m: SymMatrix,
    pub q: DMatrix<f64>,
    pub w: DVector<f64>,
}

/// The smooth dual of one prox subproblem, `min_y phi(y)`.
#[derive(Debug, Clone)]
pub struct DualSubproblem {
    b: SymMatrix,
    c: f64,
}

impl DualSubproblem {
    pub fn new(b: SymMatrix, c: f64) -> Result<Self> {
        if !(c > 0.0) {
            return Err(Error::invalid(format!(
                "subproblem coefficient must be positive, got {c}"
            )));
        }
        Ok(DualSubproblem { b, c })
    }

    /// Builds the dual of the subproblem at `center` with coefficient `c`:
    /// `B = center - ∇f(center)/c`.
    pub fn at_center(inst: &NcmInstance, center: &SymMatrix, c: f64) -> Result<Self> {
        let grad = ncm_gradient(inst, center)?;
        let mut b = center.clone();
        b.axpy(-1.0 / c, &grad);
        Self::new(b, c)
    }

    pub fn order(&self) -> usize {
        self.b.order()
    }

    pub fn coefficient(&self) -> f64 {
        self.c
    }

    pub fn eval(&self, y: &DVector<f64>) -> Result<DualEval> {
        let n = self.order();
        if y.len() != n {
            return Err(Error::DimMismatch {
                expected: n,
                got: y.len(),
            });
        }
        let mut m = self.b.clone();
        m.add_diag(y, 1.0 / self.c);
        let (q, w) = sym_eigen(&m)?;
        let phi = 0.5 * self.c * w.iter().map(|&v| v.max(0.0).powi(2)).sum::<f64>()
            - y.iter().sum::<f64>();
        // diag(M₊)_i = Σ_j max(w_j, 0) q_ij², without forming M₊.
        let grad = DVector::from_fn(n, |i, _| {
            let mut acc = 0.0;
            for j in 0..n {
                let wj = w[j];
                if wj > 0.0 {
                    let qij = q[(i, j)];
                    acc += wj * qij * qij;
                }
            }
            acc - 1.0
        });
        Ok(DualEval {
            y: y.clone(),
            phi,
            grad,
            m,
            q,
            w,
        })
    }
}

/// Dual objective `phi(y)` of the subproblem at `center` with coefficient `c`.
pub fn dual_value(inst: &NcmInstance, center: &SymMatrix, c: f64, y: &DVector<f64>) -> Result<f64> {
    Ok(DualSubproblem::at_center(inst, center, c)?.eval(y)?.phi)
}

/// Dual gradient `∇phi(y) = diag(M₊) - e`.
pub fn dual_gradient(
    inst: &NcmInstance,
    center: &SymMatrix,
    c: f64,
    y: &DVector<f64>,
) -> Result<DVector<f64>> {
    Ok(DualSubproblem::at_center(inst, center, c)?.eval(y)?.grad)
}

/// Primal quantities recovered from a dual point.
#[derive(Debug, Clone)]
pub struct DualState {
    pub y: DVector<f64>,
    pub center: SymMatrix,
    pub c: f64,
    pub m: SymMatrix,
    /// `X = M₊ ⪰ 0`.
    pub x: SymMatrix,
    /// `Λ = -c·M₋ ⪰ 0` with `⟨Λ, X⟩ = 0`.
    pub lambda: SymMatrix,
    /// `Γ = -Diag(y) - Λ`, the subgradient carried into the certificate.
    pub gamma: SymMatrix,
    pub q: DMatrix<f64>,
    pub w: DVector<f64>,
}

impl DualState {
    pub fn from_eval(center: SymMatrix, c: f64, ev: DualEval) -> Self {
        let x = reconstruct(&ev.q, &ev.w.map(|v| v.max(0.0)));
        let lambda = reconstruct(&ev.q, &ev.w.map(|v| -c * v.min(0.0)));
        let mut gamma = lambda.clone();
        gamma.scale(-1.0);
        gamma.add_diag(&ev.y, -1.0);
        DualState {
            y: ev.y,
            center,
            c,
            m: ev.m,
            x,
            lambda,
            gamma,
            q: ev.q,
            w: ev.w,
        }
    }
}

/// Recovers `(M, X, Λ, Γ)` from the dual point `y` of the subproblem at
/// `center` with coefficient `c`.
pub fn recover_primal(
    inst: &NcmInstance,
    center: &SymMatrix,
    c: f64,
    y: &DVector<f64>,
) -> Result<DualState> {
    let sub = DualSubproblem::at_center(inst, center, c)?;
    let ev = sub.eval(y)?;
    Ok(DualState::from_eval(center.clone(), c, ev))
}

/// A feasible point with its inexactness certificate.
#[derive(Debug, Clone)]
pub struct CorrectedPoint {
    /// `X̂ = D X D`, PSD with exactly unit diagonal.
    pub xhat: SymMatrix,
    /// `eps = ⟨Λ, X̂⟩ ≥ 0`.
    pub eps: f64,
    /// `V = ∇f(Y) + c_rule (X̂ - Y) + Γ`, assembled in the cancellation-free
    /// form `c_rule (X̂ - X) + (c_rule - c)(X - Y)`.
    pub v: SymMatrix,
}

/// Rescales the recovered primal point to exact unit diagonal and assembles
/// the epsilon-subgradient certificate against inclusion coefficient
/// `c_rule`. Fails when some diagonal entry of `X` is at or below
/// `min_diag`, which signals an insufficiently converged inner solve.
pub fn correct_and_certify(
    state: &DualState,
    c_rule: f64,
    min_diag: f64,
) -> Result<CorrectedPoint> {
    let d = state.x.diag();
    if d.iter().any(|&v| v <= min_diag) {
        return Err(Error::InnerFailure(format!(
            "diagonal of recovered primal point dips to {:.3e} (guard {:.1e}); tighten the inner solve",
            d.iter().cloned().fold(f64::INFINITY, f64::min),
            min_diag,
        )));
    }
    let d_inv_sqrt = d.map(|v| 1.0 / v.sqrt());
    let mut xhat = state.x.congruence_diag(&d_inv_sqrt);
    // The rescaling leaves diag entries within an ulp of one; pin them.
    let ones = DVector::from_element(xhat.order(), 1.0);
    xhat.set_diag(&ones);

    // eps = ⟨Λ, X̂⟩; nonnegative since both are PSD, clamp rounding dust.
    let eps = Point::dot(&state.lambda, &xhat).max(0.0);

    let mut v = xhat.clone();
    v.axpy(-1.0, &state.x);
    v.scale(c_rule);
    if c_rule != state.c {
        let mut drift = state.x.clone();
        drift.axpy(-1.0, &state.center);
        v.axpy(c_rule - state.c, &drift);
    }
    Ok(CorrectedPoint { xhat, eps, v })
}

/// KKT residuals of the outer problem: `r_p = ‖diag(X̂) - e‖₂`,
/// `r_d = ‖∇f(X̂) - Diag(y) - Λ‖_F`.
pub fn kkt_residuals(
    inst: &NcmInstance,
    xhat: &SymMatrix,
    y: &DVector<f64>,
    lambda: &SymMatrix,
) -> Result<(f64, f64)> {
    let n = inst.order();
    if xhat.order() != n || y.len() != n || lambda.order() != n {
        return Err(Error::DimMismatch {
            expected: n,
            got: xhat.order(),
        });
    }
    let r_p = xhat
        .diag()
        .iter()
        .map(|&v| (v - 1.0) * (v - 1.0))
        .sum::<f64>()
        .sqrt();
    let mut dual = ncm_gradient(inst, xhat)?;
    dual.add_diag(y, -1.0);
    dual.axpy(-1.0, lambda);
    Ok((r_p, dual.fro_norm()))
}

/// Initial point for the outer methods, with its multipliers.
#[derive(Debug, Clone)]
pub struct InitialPoint {
    pub x0: SymMatrix,
    pub y: DVector<f64>,
    pub lambda: SymMatrix,
    /// Inner evaluations spent computing it (not billed to solver runs).
    pub evals: u64,
}

/// Projects `G` onto the correlation matrices by solving the unweighted
/// problem `min ½‖X - G‖²_F` over `C` through the same dual machinery
/// (`B = G`, `c = 1`) to gradient tolerance `1e-7`, then applying the
/// diagonal correction. Falls back to the identity matrix if the inner solve
/// cannot deliver a usable point.
pub fn ncm_initial_point(inst: &NcmInstance, inner: &LbfgsConfig) -> Result<InitialPoint> {
    let n = inst.order();
    let sub = DualSubproblem::new(inst.g.clone(), 1.0)?;
    let mut cfg = inner.clone();
    cfg.fallback_grad_tol = 1e-7;
    let mut y0 = DVector::zeros(n);
    let mut evals = 0u64;
    for _ in 0..4 {
        let outcome = minimize(
            |y| sub.eval(y).map(|ev| (ev.phi, ev.grad)),
            y0,
            &cfg,
            |_, _, _| false,
        )?;
        evals += outcome.evals;
        let ev = sub.eval(&outcome.y)?;
        let state = DualState::from_eval(inst.g.clone(), 1.0, ev);
        match correct_and_certify(&state, 1.0, DEFAULT_DIAG_GUARD) {
            Ok(corr) => {
                return Ok(InitialPoint {
                    x0: corr.xhat,
                    y: state.y,
                    lambda: state.lambda,
                    evals,
                })
            }
            Err(_) => {
                cfg.fallback_grad_tol *= 0.1;
                y0 = outcome.y;
            }
        }
    }
    Ok(InitialPoint {
        x0: SymMatrix::identity(n),
        y: DVector::zeros(n),
        lambda: SymMatrix::zeros(n),
        evals,
    })
}

/// The H-weighted nearest correlation matrix problem bound to the composite
/// solver interface. The inexact-prox oracle minimizes the subproblem dual
/// with the acceptance rule as the inner stop test and warm-starts from the
/// previous outer iteration's dual point.
#[derive(Debug, Clone)]
pub struct NcmComposite {
    inst: NcmInstance,
    inner: LbfgsConfig,
    diag_guard: f64,
    max_retries: usize,
}

/// Binds an instance to the solver interface.
pub fn ncm_problem(inst: NcmInstance, inner: LbfgsConfig) -> NcmComposite {
    NcmComposite {
        inst,
        inner,
        diag_guard: DEFAULT_DIAG_GUARD,
        max_retries: 3,
    }
}

impl NcmComposite {
    pub fn instance(&self) -> &NcmInstance {
        &self.inst
    }

    pub fn inner_config(&self) -> &LbfgsConfig {
        &self.inner
    }
}

struct InnerShared {
    last_eval: Option<DualEval>,
    candidate: Option<Candidate>,
    residuals: Vec<f64>,
    filled: usize,
}

struct Candidate {
    triple: CertifiedTriple<SymMatrix>,
    kkt: (f64, f64),
    rule_ok: bool,
    y: DVector<f64>,
}

impl InnerShared {
    fn fill_residuals(&mut self, value: f64) {
        for slot in self.residuals[self.filled..].iter_mut() {
            *slot = value;
        }
        self.filled = self.residuals.len();
    }
}

impl CompositeProblem for NcmComposite {
    type Point = SymMatrix;
    type Resume = DVector<f64>;

    fn f_value(&self, x: &SymMatrix) -> f64 {
        ncm_objective(&self.inst, x).expect("dimension checked at construction")
    }

    fn f_grad(&self, x: &SymMatrix) -> SymMatrix {
        ncm_gradient(&self.inst, x).expect("dimension checked at construction")
    }

    fn lipschitz(&self) -> f64 {
        self.inst.lipschitz
    }

    /// Indicator of the correlation matrices, tested to tolerance `1e-8`
    /// (unit diagonal) and `-1e-8·‖X‖` (eigenvalue floor). Costs an
    /// eigendecomposition; solver traces use [`Self::trace_objective`]
    /// instead.
    fn g_value(&self, x: &SymMatrix) -> ExtReal {
        let n = x.order();
        for i in 0..n {
            if (x.get(i, i) - 1.0).abs() > 1e-8 {
                return ExtReal::PosInf;
            }
        }
        match sym_eigen(x) {
            Ok((_, w)) => {
                let floor = -1e-8 * x.fro_norm().max(1.0);
                if w.iter().all(|&v| v >= floor) {
                    ExtReal::Finite(0.0)
                } else {
                    ExtReal::PosInf
                }
            }
            Err(_) => ExtReal::PosInf,
        }
    }

    /// Iterates are feasible by construction (corrected points), so the
    /// traced objective is just `f`.
    fn trace_objective(&self, x: &SymMatrix) -> Option<f64> {
        Some(self.f_value(x))
    }

    fn inexact_prox(
        &self,
        req: ProxRequest<'_, SymMatrix, DVector<f64>>,
    ) -> Result<ProxOutcome<SymMatrix, DVector<f64>>> {
        let n = self.inst.order();
        let c_rule = req.rule.inclusion_coefficient();
        if (c_rule - req.coefficient).abs() > 1e-9 * c_rule.max(1.0) {
            return Err(Error::invalid(format!(
                "request coefficient {} disagrees with rule inclusion coefficient {c_rule}",
                req.coefficient
            )));
        }
        let c_solve = req.rule.solve_coefficient();
        let sub = DualSubproblem::at_center(&self.inst, req.center, c_solve)?;

        let shared = RefCell::new(InnerShared {
            last_eval: None,
            candidate: None,
            residuals: Vec::new(),
            filled: 0,
        });

        let mut y_start = req.resume.cloned().unwrap_or_else(|| DVector::zeros(n));
        let mut cfg = self.inner.clone();
        // The dual's curvature is ~1/c, so the first quasi-Newton step should
        // be ~c times the gradient.
        cfg.initial_hessian_scale = self.inner.initial_hessian_scale * c_solve;
        let mut total_evals = 0u64;
        let mut final_reason = StopReason::BudgetExhausted;

        for _attempt in 0..=self.max_retries {
            let oracle = |y: &DVector<f64>| -> Result<(f64, DVector<f64>)> {
                let ev = sub.eval(y)?;
                let out = (ev.phi, ev.grad.clone());
                let mut sh = shared.borrow_mut();
                sh.residuals.push(f64::NAN);
                sh.last_eval = Some(ev);
                Ok(out)
            };
            let stop = |y: &DVector<f64>, _phi: f64, _grad: &DVector<f64>| -> bool {
                let mut sh = shared.borrow_mut();
                let ev = match sh.last_eval.take() {
                    Some(ev) if ev.y == *y => ev,
                    // The cache always holds the point just accepted; fall
                    // back to a recount-free recompute if it ever does not.
                    _ => match sub.eval(y) {
                        Ok(ev) => ev,
                        Err(_) => return false,
                    },
                };
                let state = DualState::from_eval(req.center.clone(), c_solve, ev);
                let corrected = match correct_and_certify(&state, c_rule, self.diag_guard) {
                    Ok(c) => c,
                    Err(_) => return false,
                };
                let kkt = match kkt_residuals(&self.inst, &corrected.xhat, &state.y, &state.lambda)
                {
                    Ok(k) => k,
                    Err(_) => return false,
                };
                let triple = CertifiedTriple {
                    x: corrected.xhat,
                    v: corrected.v,
                    eps: corrected.eps,
                    witness: state.gamma,
                };
                let rule_ok = req.rule.accepts(req.center, &triple);
                sh.fill_residuals(kkt.0.max(kkt.1));
                sh.candidate = Some(Candidate {
                    triple,
                    kkt,
                    rule_ok,
                    y: state.y,
                });
                rule_ok
            };

            let outcome = minimize(oracle, y_start.clone(), &cfg, stop)?;
            total_evals += outcome.evals;
            final_reason = outcome.stop_reason;
            if shared.borrow().candidate.is_some() {
                break;
            }
            // No accepted point survived the diagonal guard: tighten and
            // resume from where the inner solve stopped.
            cfg.fallback_grad_tol *= 0.1;
            cfg.max_evals = cfg.max_evals.max(64);
            y_start = outcome.y;
        }

        let mut sh = shared.into_inner();
        let cand = sh.candidate.take().ok_or_else(|| {
            Error::InnerFailure(format!(
                "inner solve produced no certifiable point after {} retries ({} evals)",
                self.max_retries, total_evals
            ))
        })?;
        let last = cand.kkt.0.max(cand.kkt.1);
        sh.fill_residuals(last);

        Ok(ProxOutcome {
            triple: cand.triple,
            evals: total_evals,
            stop_reason: if cand.rule_ok {
                StopReason::RuleSatisfied
            } else {
                final_reason
            },
            rule_satisfied: cand.rule_ok,
            kkt: Some(cand.kkt),
            inner_residuals: sh.residuals,
            resume: Some(cand.y),
        })
    }
}

/// Writes a symmetric matrix in the packed text format: a line with the
/// order `n`, then the `n(n+1)/2` upper-triangle values row-major.
pub fn write_matrix<W: IoWrite>(w: &mut W, m: &SymMatrix) -> Result<()> {
    writeln!(w, "{}", m.order())?;
    let n = m.order();
    let mut k = 0;
    for i in 0..n {
        let row: Vec<String> = (i..n)
            .map(|_| {
                let s = format!("{}", m.values()[k]);
                k += 1;
                s
            })
            .collect();
        writeln!(w, "{}", row.join(" "))?;
    }
    Ok(())
}

/// Reads a symmetric matrix; accepts the packed text format or a dense CSV
/// square (which is symmetrized).
pub fn read_matrix<R: BufRead>(r: &mut R) -> Result<SymMatrix> {
    let mut content = String::new();
    r.read_to_string(&mut content)?;
    parse_matrix(&content)
}

pub fn parse_matrix(content: &str) -> Result<SymMatrix> {
    let trimmed = content.trim();
    if trimmed.is_empty() {
        return Err(Error::Parse("empty matrix file".into()));
    }
    if trimmed.lines().next().is_some_and(|l| l.contains(',')) {
        // Dense CSV.
        let rows: Vec<Vec<f64>> = trimmed
            .lines()
            .map(|line| {
                line.split(',')
                    .map(|tok| {
                        tok.trim()
                            .parse::<f64>()
                            .map_err(|e| Error::Parse(format!("bad CSV value {tok:?}: {e}")))
                    })
                    .collect()
            })
            .collect::<Result<_>>()?;
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::Parse("CSV matrix must be square".into()));
        }
        let dense = DMatrix::from_fn(n, n, |i, j| rows[i][j]);
        return SymMatrix::from_dense(&dense);
    }
    let mut toks = trimmed.split_whitespace();
    let n: usize = toks
        .next()
        .unwrap()
        .parse()
        .map_err(|e| Error::Parse(format!("bad order: {e}")))?;
    let expected = n * (n + 1) / 2;
    let values: Vec<f64> = toks
        .map(|tok| {
            tok.parse::<f64>()
                .map_err(|e| Error::Parse(format!("bad value {tok:?}: {e}")))
        })
        .collect::<Result<_>>()?;
    if values.len() != expected {
        return Err(Error::Parse(format!(
            "expected {expected} packed values for order {n}, got {}",
            values.len()
        )));
    }
    SymMatrix::from_packed(n, values)
}

pub fn write_matrix_file(path: &Path, m: &SymMatrix) -> Result<()> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    write_matrix(&mut f, m)
}

pub fn read_matrix_file(path: &Path) -> Result<SymMatrix> {
    let mut f = std::io::BufReader::new(std::fs::File::open(path)?);
    read_matrix(&mut f)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ones_weights(n: usize) -> SymMatrix {
        SymMatrix::from_fn(n, |_, _| 1.0)
    }

    fn small_instance() -> NcmInstance {
        // G with off-diagonal 0.5 noise pattern, all-ones H.
        let g = SymMatrix::from_fn(3, |i, j| if i == j { 1.0 } else { 0.5 });
        NcmInstance::new(g, ones_weights(3)).unwrap()
    }

    #[test]
    fn instance_validation() {
        let bad_diag = SymMatrix::from_fn(2, |i, j| if i == j { 0.9 } else { 0.1 });
        assert!(NcmInstance::new(bad_diag, ones_weights(2)).is_err());
        let mut bad_h = ones_weights(2);
        bad_h.set(0, 1, 1.5);
        assert!(NcmInstance::new(SymMatrix::identity(2), bad_h).is_err());
        let inst = small_instance();
        // L = ‖H∘H‖_F = 3 for all-ones 3x3.
        assert!((inst.lipschitz() - 3.0).abs() < 1e-12);
    }

    #[test]
    fn objective_and_gradient_hand_cases() {
        let g = SymMatrix::identity(2);
        let inst = NcmInstance::new(g, ones_weights(2)).unwrap();
        let x = SymMatrix::from_fn(2, |i, j| if i == j { 1.0 } else { 0.5 });
        assert!((ncm_objective(&inst, &x).unwrap() - 0.25).abs() < 1e-15);
        // X = G gives zero objective and gradient.
        assert_eq!(ncm_objective(&inst, inst.g()).unwrap(), 0.0);
        assert_eq!(ncm_gradient(&inst, inst.g()).unwrap().fro_norm(), 0.0);
        // All-ones H: gradient is X - G.
        let grad = ncm_gradient(&inst, &x).unwrap();
        let mut expect = x.clone();
        expect.axpy(-1.0, inst.g());
        assert!(crate::space::Point::minus(&grad, &expect).fro_norm() < 1e-15);
    }

    #[test]
    fn objective_scaling_is_quadratic_off_diagonal() {
        let inst = NcmInstance::new(SymMatrix::identity(2), ones_weights(2)).unwrap();
        let mut x1 = SymMatrix::identity(2);
        x1.set(0, 1, 0.2);
        let mut x2 = SymMatrix::identity(2);
        x2.set(0, 1, 0.4);
        let f1 = ncm_objective(&inst, &x1).unwrap();
        let f2 = ncm_objective(&inst, &x2).unwrap();
        assert!((f2 / f1 - 4.0).abs() < 1e-12);
    }

    #[test]
    fn dual_value_hand_case() {
        // Y = G = I, y = 0, c = 1, all-ones H: M = I, phi = n/2.
        let inst = NcmInstance::new(SymMatrix::identity(3), ones_weights(3)).unwrap();
        let y = DVector::zeros(3);
        let phi = dual_value(&inst, inst.g(), 1.0, &y).unwrap();
        assert!((phi - 1.5).abs() < 1e-12);
        let grad = dual_gradient(&inst, inst.g(), 1.0, &y).unwrap();
        assert!(grad.norm() < 1e-12);
    }

    #[test]
    fn recover_primal_identities() {
        let inst = small_instance();
        let y = DVector::from_vec(vec![0.3, -0.2, 0.1]);
        let c = 2.0;
        let state = recover_primal(&inst, inst.g(), c, &y).unwrap();
        let scale = state.m.fro_norm().max(1.0);
        // Stationarity: ∇f(Y) + c(X - Y) - Diag(y) - Λ = 0 identically.
        let mut res = ncm_gradient(&inst, inst.g()).unwrap();
        res.axpy(c, &state.x);
        let mut cy = inst.g().clone();
        cy.scale(c);
        res.axpy(-1.0, &cy);
        res.add_diag(&y, -1.0);
        res.axpy(-1.0, &state.lambda);
        assert!(res.fro_norm() <= 1e-10 * scale * c.max(1.0));
        // Complementarity.
        assert!(
            Point::dot(&state.lambda, &state.x).abs()
                <= 1e-8 * inst.order() as f64 * scale * c.max(1.0)
        );
    }

    #[test]
    fn correction_produces_exact_diagonal_and_certificate() {
        let inst = small_instance();
        let y = DVector::from_vec(vec![0.05, 0.0, -0.05]);
        let state = recover_primal(&inst, inst.g(), 1.0, &y).unwrap();
        let corr = correct_and_certify(&state, 1.0, DEFAULT_DIAG_GUARD).unwrap();
        for i in 0..3 {
            assert_eq!(corr.xhat.get(i, i), 1.0);
        }
        assert!(corr.eps >= 0.0);
        // Same coefficient: V = c (X̂ - X) exactly.
        let mut expect = corr.xhat.clone();
        expect.axpy(-1.0, &state.x);
        assert_eq!(corr.v, expect);
        // KKT primal residual vanishes.
        let (rp, _) = kkt_residuals(&inst, &corr.xhat, &state.y, &state.lambda).unwrap();
        assert_eq!(rp, 0.0);
    }

    #[test]
    fn correction_guards_tiny_diagonal() {
        // A state whose recovered X has a zero diagonal entry: project
        // M = diag(1, -1); X = diag(1, 0).
        let inst = NcmInstance::new(SymMatrix::identity(2), ones_weights(2)).unwrap();
        let mut m = SymMatrix::zeros(2);
        m.set(0, 0, 1.0);
        m.set(1, 1, -1.0);
        let sub = DualSubproblem::new(m.clone(), 1.0).unwrap();
        let ev = sub.eval(&DVector::zeros(2)).unwrap();
        let state = DualState::from_eval(inst.g().clone(), 1.0, ev);
        assert!(correct_and_certify(&state, 1.0, DEFAULT_DIAG_GUARD).is_err());
    }

    #[test]
    fn initial_point_on_easy_and_hard_targets() {
        // G already a correlation matrix: projection returns it.
        let corr = SymMatrix::from_fn(2, |i, j| if i == j { 1.0 } else { 0.3 });
        let inst = NcmInstance::new(corr.clone(), ones_weights(2)).unwrap();
        let init = ncm_initial_point(&inst, &LbfgsConfig::default()).unwrap();
        assert!(Point::minus(&init.x0, &corr).fro_norm() <= 1e-6);

        // G = [[1, 2], [2, 1]]: nearest correlation matrix is all-ones.
        let g = SymMatrix::from_fn(2, |i, j| if i == j { 1.0 } else { 2.0 });
        let inst = NcmInstance::new(g, ones_weights(2)).unwrap();
        let init = ncm_initial_point(&inst, &LbfgsConfig::default()).unwrap();
        assert!(
            (init.x0.get(0, 1) - 1.0).abs() <= 1e-5,
            "got {}",
            init.x0.get(0, 1)
        );
        assert_eq!(init.x0.get(0, 0), 1.0);
        assert_eq!(init.x0.get(1, 1), 1.0);
    }

    #[test]
    fn matrix_io_round_trip() {
        let m = SymMatrix::from_fn(3, |i, j| (i * 3 + j) as f64 / 7.0);
        let mut buf = Vec::new();
        write_matrix(&mut buf, &m).unwrap();
        let back = parse_matrix(std::str::from_utf8(&buf).unwrap()).unwrap();
        assert_eq!(m, back);
    }

    #[test]
    fn matrix_io_accepts_dense_csv() {
        let text = "1.0, 0.5\n0.5, 1.0\n";
        let m = parse_matrix(text).unwrap();
        assert_eq!(m.order(), 2);
        assert_eq!(m.get(0, 1), 0.5);
        assert!(parse_matrix("1.0, 0.5\n0.5\n").is_err());
        assert!(parse_matrix("").is_err());
        assert!(parse_matrix("2\n1 2 3 4").is_err());
    }
}
