//! Extrapolation-coefficient sequences for the accelerated methods.
//!
//! The `t` sequence is the classical FISTA update `t_{k+1} = (1 + sqrt(1 +
//! 4 t_k^2)) / 2`; its defining identity is `t_{k+1}^2 - t_{k+1} = t_k^2`.
//! The `tau` sequence is `tau_{k+1} = tau_k + (lambda + sqrt(lambda^2 +
//! 4 lambda tau_k)) / 2`, the positive solution of `(tau_{k+1} - tau_k)^2 =
//! lambda tau_{k+1}`; it grows at least like `lambda k^2 / 4`.
//!
//! Both recurrences are computed iteratively in floating point; they are
//! monotone and well-conditioned, and the identity drift is monitored in
//! tests. The `tau` update is used with `lambda = alpha / (1 + alpha L)`,
//! which may be smaller than one; the recurrence and its identity hold for
//! any positive `lambda`, so no lower bound is imposed here.

use crate::error::{Error, Result};

/// FISTA `t` update. Requires `t >= 1`; returns a value `> t` satisfying
/// `t'^2 - t' = t^2`.
pub fn next_t(t: f64) -> Result<f64> {
    if !(t >= 1.0) {
        return Err(Error::invalid(format!("t must be >= 1, got {t}")));
    }
    Ok(next_t_unchecked(t))
}

#[inline]
pub(crate) fn next_t_unchecked(t: f64) -> f64 {
    0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt())
}

/// Extra-step `tau` update. Requires `tau >= 0` and `lambda > 0`; returns
/// `tau' > tau` satisfying `(tau' - tau)^2 = lambda tau'`.
pub fn next_tau(tau: f64, lambda: f64) -> Result<f64> {
    if !(tau >= 0.0) {
        return Err(Error::invalid(format!(
            "tau must be nonnegative, got {tau}"
        )));
    }
    if !(lambda > 0.0) {
        return Err(Error::invalid(format!(
            "lambda must be positive, got {lambda}"
        )));
    }
    Ok(next_tau_unchecked(tau, lambda))
}

#[inline]
pub(crate) fn next_tau_unchecked(tau: f64, lambda: f64) -> f64 {
    tau + 0.5 * (lambda + (lambda * lambda + 4.0 * lambda * tau).sqrt())
}

/// The FISTA extrapolation sequence, starting at `t_1 = 1`.
#[derive(Debug, Clone)]
pub struct TSchedule {
    t: f64,
}

impl Default for TSchedule {
    fn default() -> Self {
        Self::new()
    }
}

impl TSchedule {
    pub fn new() -> Self {
        TSchedule { t: 1.0 }
    }

    pub fn current(&self) -> f64 {
        self.t
    }

    /// Advances the sequence, returning the new value.
    pub fn advance(&mut self) -> f64 {
        self.t = next_t_unchecked(self.t);
        self.t
    }
}

/// The extra-step sequence, starting at `tau_0 = 0`.
#[derive(Debug, Clone)]
pub struct TauSchedule {
    tau: f64,
    lambda: f64,
}

impl TauSchedule {
    pub fn new(lambda: f64) -> Result<Self> {
        if !(lambda > 0.0) {
            return Err(Error::invalid(format!(
                "lambda must be positive, got {lambda}"
            )));
        }
        Ok(TauSchedule { tau: 0.0, lambda })
    }

    pub fn current(&self) -> f64 {
        self.tau
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn advance(&mut self) -> f64 {
        self.tau = next_tau_unchecked(self.tau, self.lambda);
        self.tau
    }
}
