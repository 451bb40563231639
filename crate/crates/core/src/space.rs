//! Inner-product space operations shared by solver iterates.
//!
//! The outer iterations only ever form linear combinations, inner products,
//! and norms of their iterates, so they are generic over this trait. Dense
//! vectors cover the toy problems and dual variables; [`crate::sym::SymMatrix`]
//! covers the matrix problems.

use nalgebra::DVector;

/// A point in a real inner-product space.
pub trait Point: Clone + Send + Sync {
    fn dot(&self, other: &Self) -> f64;

    /// `self += a * other`.
    fn axpy(&mut self, a: f64, other: &Self);

    fn scale(&mut self, a: f64);

    fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    fn dist(&self, other: &Self) -> f64 {
        let mut d = self.clone();
        d.axpy(-1.0, other);
        d.norm()
    }

    /// `a * x + b * y` as a new point.
    fn lin_comb(a: f64, x: &Self, b: f64, y: &Self) -> Self {
        let mut out = x.clone();
        out.scale(a);
        out.axpy(b, y);
        out
    }

    /// `x - y` as a new point.
    fn minus(x: &Self, y: &Self) -> Self {
        let mut out = x.clone();
        out.axpy(-1.0, y);
        out
    }
}

impl Point for DVector<f64> {
    fn dot(&self, other: &Self) -> f64 {
        nalgebra::Matrix::dot(self, other)
    }

    fn axpy(&mut self, a: f64, other: &Self) {
        nalgebra::Matrix::axpy(self, a, other, 1.0);
    }

    fn scale(&mut self, a: f64) {
        *self *= a;
    }

    fn norm(&self) -> f64 {
        nalgebra::Matrix::norm(self)
    }
}
