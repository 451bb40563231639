//! Accelerated proximal gradient methods for composite problems `F = f + g`
//! where the proximal operator of `g` is only available approximately.
//!
//! The crate provides:
//!
//! - [`solvers`]: FISTA/PGM with an exact prox, plus three inexact variants
//!   (I-FISTA, IE-FISTA, IA-FISTA) whose subproblems are accepted by the
//!   relative error rules in [`rules`].
//! - [`problem`]: the composite-problem abstraction, certified inexact-prox
//!   triples carrying an epsilon-subgradient witness, and approximate-solution
//!   reports.
//! - [`ncm`]: the H-weighted nearest correlation matrix problem expressed as a
//!   composite problem, with its dual inner subproblem solved by [`lbfgs`].
//! - [`instance`]: seeded random test instances (onion-sampled correlation
//!   matrices, noise blend, sparse weights).
//! - [`bench`]: the benchmark harness (instance grids, CSV tables, convergence
//!   traces, performance profiles) backing the companion CLI.

// Parameter checks are written as `!(x > 0.0)` so that NaN fails validation;
// the suggested `x <= 0.0` would let it through.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bench;
pub mod error;
pub mod instance;
pub mod l1;
pub mod lbfgs;
pub mod ncm;
pub mod problem;
pub mod rules;
pub mod schedules;
pub mod solvers;
pub mod space;
pub mod sym;

pub use error::{Error, Result};
pub use problem::{
    check_eps_subgradient, check_rho_approximate, ApproxSolutionReport, CertifiedTriple,
    CompositeProblem, ExtReal, ProxOutcome, ProxRequest,
};
pub use rules::{ia_accept, ier_accept, ir_accept, IaParams, IerParams, IrParams, RuleContext};
pub use solvers::{
    ie_residual, residual_report, run_fista, run_i_fista, run_ia_fista, run_ie_fista, IeResidual,
    IterationRecord, Method, MethodSpec, SolveResult, SolverConfig, SolverTrace, StopRule,
};
pub use space::Point;
pub use sym::{psd_split, SymMatrix};
