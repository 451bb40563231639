//! Shared test oracles, independent of the library's linear-algebra paths.
#![allow(dead_code)] // not every test binary uses every oracle

use nalgebra::{DMatrix, DVector};

/// Cyclic Jacobi eigensolver for symmetric matrices. Slow but converges to
/// machine precision and shares no code with the tridiagonal QL path used by
/// the library, so it can serve as an independent oracle.
pub fn jacobi_eigen(a: &DMatrix<f64>) -> (DMatrix<f64>, DVector<f64>) {
    let n = a.nrows();
    assert_eq!(n, a.ncols());
    let mut a = a.clone();
    let mut v = DMatrix::<f64>::identity(n, n);
    let scale = a.norm().max(1.0);
    for _sweep in 0..200 {
        let mut off = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                off += a[(i, j)] * a[(i, j)];
            }
        }
        if off.sqrt() <= 1e-15 * scale {
            break;
        }
        for p in 0..n.saturating_sub(1) {
            for q in (p + 1)..n {
                if a[(p, q)].abs() <= 1e-300 {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * a[(p, q)]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                // A <- Jᵀ A J with J the (p, q) rotation.
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = c * akp - s * akq;
                    a[(k, q)] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = c * apk - s * aqk;
                    a[(q, k)] = s * apk + c * aqk;
                }
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
    }
    let w = DVector::from_fn(n, |i, _| a[(i, i)]);
    (v, w)
}

/// Projection onto the PSD cone through the Jacobi oracle.
pub fn psd_projection_oracle(m: &DMatrix<f64>) -> DMatrix<f64> {
    let (v, w) = jacobi_eigen(m);
    let mut scaled = v.clone();
    for (mut col, val) in scaled.column_iter_mut().zip(w.iter()) {
        col *= val.max(0.0);
    }
    &scaled * v.transpose()
}

/// Least-squares slope of `log10(ys)` against `log10(xs)`.
pub fn loglog_slope(xs: &[f64], ys: &[f64]) -> f64 {
    assert_eq!(xs.len(), ys.len());
    let pts: Vec<(f64, f64)> = xs
        .iter()
        .zip(ys.iter())
        .filter(|(&x, &y)| x > 0.0 && y > 0.0)
        .map(|(&x, &y)| (x.log10(), y.log10()))
        .collect();
    assert!(pts.len() >= 2, "not enough positive points for a slope fit");
    let n = pts.len() as f64;
    let sx: f64 = pts.iter().map(|p| p.0).sum();
    let sy: f64 = pts.iter().map(|p| p.1).sum();
    let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
    (n * sxy - sx * sy) / (n * sxx - sx * sx)
}
