//! Dense symmetric matrices with packed upper-triangle storage.
//!
//! Only the upper triangle is stored (row-major), so symmetry is exact by
//! construction and the Frobenius inner product weights off-diagonal entries
//! twice. [`psd_split`] is the Moreau decomposition `M = M₊ + M₋` into the
//! projections onto the PSD and NSD cones, computed from a full symmetric
//! eigendecomposition by clipping eigenvalues.

use crate::error::{Error, Result};
use crate::space::Point;
use nalgebra::{DMatrix, DVector};

#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix {
    n: usize,
    /// Upper triangle, row-major: rows `i` contribute entries `(i, i..n)`.
    data: Vec<f64>,
}

impl SymMatrix {
    pub fn zeros(n: usize) -> Self {
        SymMatrix {
            n,
            data: vec![0.0; n * (n + 1) / 2],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.set(i, i, 1.0);
        }
        m
    }

    /// Builds from `f(i, j)` evaluated on the upper triangle (`i <= j`).
    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(n * (n + 1) / 2);
        for i in 0..n {
            for j in i..n {
                data.push(f(i, j));
            }
        }
        SymMatrix { n, data }
    }

    /// Packs a square matrix, symmetrizing as `(A + Aᵀ)/2`.
    pub fn from_dense(a: &DMatrix<f64>) -> Result<Self> {
        if a.nrows() != a.ncols() {
            return Err(Error::DimMismatch {
                expected: a.nrows(),
                got: a.ncols(),
            });
        }
        Ok(Self::from_fn(a.nrows(), |i, j| {
            if i == j {
                a[(i, i)]
            } else {
                0.5 * (a[(i, j)] + a[(j, i)])
            }
        }))
    }

    pub fn order(&self) -> usize {
        self.n
    }

    #[inline]
    fn idx(&self, i: usize, j: usize) -> usize {
        debug_assert!(i <= j && j < self.n);
        i * self.n - i * (i + 1) / 2 + j
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (i, j) = if i <= j { (i, j) } else { (j, i) };
        self.data[self.idx(i, j)]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        let (i, j) = if i <= j { (i, j) } else { (j, i) };
        let k = self.idx(i, j);
        self.data[k] = v;
    }

    pub fn values(&self) -> &[f64] {
        &self.data
    }

    pub(crate) fn from_packed(n: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != n * (n + 1) / 2 {
            return Err(Error::DimMismatch {
                expected: n * (n + 1) / 2,
                got: data.len(),
            });
        }
        Ok(SymMatrix { n, data })
    }

    pub fn diag(&self) -> DVector<f64> {
        DVector::from_fn(self.n, |i, _| self.get(i, i))
    }

    pub fn set_diag(&mut self, d: &DVector<f64>) {
        for i in 0..self.n {
            self.set(i, i, d[i]);
        }
    }

    /// Adds `Diag(d)`.
    pub fn add_diag(&mut self, d: &DVector<f64>, weight: f64) {
        for i in 0..self.n {
            let v = self.get(i, i) + weight * d[i];
            self.set(i, i, v);
        }
    }

    /// Entrywise (Hadamard) product.
    pub fn hadamard(&self, other: &Self) -> Self {
        debug_assert_eq!(self.n, other.n);
        SymMatrix {
            n: self.n,
            data: self
                .data
                .iter()
                .zip(other.data.iter())
                .map(|(a, b)| a * b)
                .collect(),
        }
    }

    /// Congruence `Diag(d) · M · Diag(d)`.
    pub fn congruence_diag(&self, d: &DVector<f64>) -> Self {
        Self::from_fn(self.n, |i, j| d[i] * d[j] * self.get(i, j))
    }

    pub fn fro_norm(&self) -> f64 {
        Point::norm(self)
    }

    /// Largest absolute entry.
    pub fn amax(&self) -> f64 {
        self.data.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.n, self.n, |i, j| self.get(i, j))
    }

    /// Trace inner product `⟨A, B⟩ = tr(AB)`, same as the `Point` dot.
    pub fn inner(&self, other: &Self) -> f64 {
        Point::dot(self, other)
    }
}

impl Point for SymMatrix {
    fn dot(&self, other: &Self) -> f64 {
        debug_assert_eq!(self.n, other.n);
        let n = self.n;
        let mut acc = 0.0;
        let mut k = 0;
        for i in 0..n {
            // Diagonal entry once, off-diagonal twice.
            acc += self.data[k] * other.data[k];
            k += 1;
            for _ in (i + 1)..n {
                acc += 2.0 * self.data[k] * other.data[k];
                k += 1;
            }
        }
        acc
    }

    fn axpy(&mut self, a: f64, other: &Self) {
        debug_assert_eq!(self.n, other.n);
        for (s, o) in self.data.iter_mut().zip(other.data.iter()) {
            *s += a * o;
        }
    }

    fn scale(&mut self, a: f64) {
        for s in self.data.iter_mut() {
            *s *= a;
        }
    }
}

/// Full symmetric eigendecomposition `M = Q diag(w) Qᵀ`.
pub fn sym_eigen(m: &SymMatrix) -> Result<(DMatrix<f64>, DVector<f64>)> {
    if m.data.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("eigendecomposition input".into()));
    }
    let dense = m.to_dense();
    let eig = nalgebra::SymmetricEigen::try_new(dense, f64::EPSILON, 0).ok_or({
        Error::EigenFailure {
            order: m.n,
            fro_norm: m.fro_norm(),
        }
    })?;
    Ok((eig.eigenvectors, eig.eigenvalues))
}

/// Reconstructs `Q diag(vals) Qᵀ` as a packed symmetric matrix.
pub fn reconstruct(q: &DMatrix<f64>, vals: &DVector<f64>) -> SymMatrix {
    let n = q.nrows();
    let mut scaled = q.clone();
    for (mut col, v) in scaled.column_iter_mut().zip(vals.iter()) {
        col *= *v;
    }
    let full = &scaled * q.transpose();
    SymMatrix::from_fn(n, |i, j| {
        if i == j {
            full[(i, i)]
        } else {
            0.5 * (full[(i, j)] + full[(j, i)])
        }
    })
}

/// Moreau split `M = M₊ + M₋` with `M₊ ⪰ 0`, `M₋ ⪯ 0`, `⟨M₊, M₋⟩ = 0`, by
/// clipping the eigenvalues of a full symmetric eigendecomposition.
pub fn psd_split(m: &SymMatrix) -> Result<(SymMatrix, SymMatrix)> {
    let (q, w) = sym_eigen(m)?;
    let plus = reconstruct(&q, &w.map(|v| v.max(0.0)));
    let minus = reconstruct(&q, &w.map(|v| v.min(0.0)));
    Ok((plus, minus))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn random_sym(n: usize, rng: &mut ChaCha8Rng) -> SymMatrix {
        SymMatrix::from_fn(n, |_, _| rng.random_range(-2.0..2.0))
    }

    #[test]
    fn packing_round_trip() {
        let mut m = SymMatrix::zeros(3);
        m.set(0, 1, 5.0);
        m.set(2, 0, -1.0);
        m.set(1, 1, 2.0);
        assert_eq!(m.get(1, 0), 5.0);
        assert_eq!(m.get(0, 2), -1.0);
        let dense = m.to_dense();
        assert_eq!(dense[(2, 0)], -1.0);
        let back = SymMatrix::from_dense(&dense).unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn frobenius_dot_counts_off_diagonals_twice() {
        let mut m = SymMatrix::zeros(2);
        m.set(0, 0, 1.0);
        m.set(0, 1, 3.0);
        m.set(1, 1, 2.0);
        // ‖M‖² = 1 + 2·9 + 4 = 23.
        assert_eq!(Point::dot(&m, &m), 23.0);
        let dense = m.to_dense();
        assert!((dense.norm() - m.fro_norm()).abs() < 1e-14);
    }

    #[test]
    fn psd_split_diagonal_case() {
        let mut m = SymMatrix::zeros(2);
        m.set(0, 0, 1.0);
        m.set(1, 1, -2.0);
        let (p, q) = psd_split(&m).unwrap();
        assert!((p.get(0, 0) - 1.0).abs() < 1e-14);
        assert!(p.get(1, 1).abs() < 1e-14);
        assert!(q.get(0, 0).abs() < 1e-14);
        assert!((q.get(1, 1) + 2.0).abs() < 1e-14);
    }

    #[test]
    fn psd_split_of_psd_matrix_is_identity_map() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a = random_sym(6, &mut rng);
        // a² is PSD.
        let dense = a.to_dense();
        let sq = SymMatrix::from_dense(&(&dense * &dense)).unwrap();
        let (p, m) = psd_split(&sq).unwrap();
        assert!(Point::minus(&p, &sq).fro_norm() <= 1e-10 * sq.fro_norm().max(1.0));
        assert!(m.fro_norm() <= 1e-10 * sq.fro_norm().max(1.0));
    }

    #[test]
    fn moreau_identities_random_orders() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for trial in 0..200 {
            let n = rng.random_range(2..=50);
            let m = random_sym(n, &mut rng);
            let (p, q) = psd_split(&m).unwrap();
            let scale = m.fro_norm().max(1.0);
            let mut sum = p.clone();
            Point::axpy(&mut sum, 1.0, &q);
            assert!(
                Point::minus(&sum, &m).fro_norm() <= 1e-10 * scale,
                "reconstruction failed on trial {trial}"
            );
            assert!(
                Point::dot(&p, &q).abs() <= 1e-10 * scale * scale,
                "orthogonality failed on trial {trial}"
            );
        }
    }

    #[test]
    fn eigen_rejects_non_finite() {
        let mut m = SymMatrix::zeros(2);
        m.set(0, 0, f64::NAN);
        assert!(sym_eigen(&m).is_err());
    }

    #[test]
    fn congruence_scales_entries() {
        let m = SymMatrix::from_fn(2, |i, j| (i + j + 1) as f64);
        let d = DVector::from_vec(vec![2.0, 3.0]);
        let c = m.congruence_diag(&d);
        assert_eq!(c.get(0, 0), 4.0);
        assert_eq!(c.get(0, 1), 12.0);
        assert_eq!(c.get(1, 1), 27.0);
    }
}
