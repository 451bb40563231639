//! Seeded random test instances.
//!
//! `U` is drawn uniformly from the correlation matrices by the extended onion
//! construction: grow the matrix one dimension at a time, drawing the squared
//! radius of the new column from the matching Beta law and its direction
//! uniformly from the sphere. `G = (1-γ)U + γE` blends it with a symmetric
//! noise matrix `E` (unit diagonal, off-diagonals uniform on `[-1, 1]`), and
//! `H` keeps each off-diagonal weight with probability `p` (uniform on
//! `[0, 1]`, else zero).
//!
//! The generator is ChaCha8 seeded from the instance spec's 64-bit seed, and the
//! stream order is fixed: `U` first, then `E` (off-diagonals row-major), then
//! `H` (row-major; one draw for the keep decision, one more for the value
//! when kept). Equal specs therefore produce bitwise-identical instances.

use crate::error::{Error, Result};
use crate::ncm::{read_matrix_file, write_matrix_file, NcmInstance};
use crate::sym::SymMatrix;
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Beta, Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InstanceSpec {
    pub n: usize,
    /// Noise level blended into `G`.
    pub gamma: f64,
    /// Density of the off-diagonal weights in `H`.
    pub p: f64,
    pub seed: u64,
}

impl InstanceSpec {
    pub fn new(n: usize, gamma: f64, p: f64, seed: u64) -> Result<Self> {
        let spec = InstanceSpec { n, gamma, p, seed };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::invalid("instance order must be at least 1"));
        }
        if !(0.0..=1.0).contains(&self.gamma) {
            return Err(Error::invalid(format!(
                "gamma must lie in [0, 1], got {}",
                self.gamma
            )));
        }
        if !(0.0..=1.0).contains(&self.p) {
            return Err(Error::invalid(format!(
                "p must lie in [0, 1], got {}",
                self.p
            )));
        }
        Ok(())
    }

    /// File stem used for the instance's on-disk artifacts.
    pub fn stem(&self) -> String {
        format!(
            "ncm_n{}_g{:.2}_p{:.2}_s{}",
            self.n, self.gamma, self.p, self.seed
        )
    }
}

/// Uniform draw from the correlation matrices of order `n` (the flat LKJ law)
/// via the extended onion construction.
pub fn onion_correlation(n: usize, rng: &mut impl Rng) -> SymMatrix {
    assert!(n >= 1);
    if n == 1 {
        return SymMatrix::identity(1);
    }
    // Dense working copy of the growing matrix.
    let mut r = DMatrix::<f64>::identity(n, n);
    // First 2x2 block: off-diagonal 2u - 1 with u ~ Beta(beta, beta),
    // beta = n/2 for the flat law.
    let mut beta = n as f64 / 2.0;
    let b = Beta::new(beta, beta).expect("valid Beta shape");
    let u: f64 = b.sample(rng);
    r[(0, 1)] = 2.0 * u - 1.0;
    r[(1, 0)] = r[(0, 1)];

    for k in 2..n {
        beta -= 0.5;
        // Squared radius of the new column in the metric of the current block.
        let y: f64 = Beta::new(k as f64 / 2.0, beta)
            .expect("valid Beta shape")
            .sample(rng);
        // Uniform direction on the (k-1)-sphere.
        let mut dir = DVector::from_fn(k, |_, _| {
            let g: f64 = StandardNormal.sample(rng);
            g
        });
        let norm = dir.norm();
        if norm > 0.0 {
            dir /= norm;
        } else {
            dir[0] = 1.0;
        }
        let w = dir * y.min(1.0 - 1e-12).sqrt();
        // z = A w with A the Cholesky factor of the leading k x k block.
        let block = r.view((0, 0), (k, k)).into_owned();
        let chol = nalgebra::Cholesky::new(block)
            .expect("onion blocks stay positive definite by construction");
        let z = chol.l() * w;
        for i in 0..k {
            r[(i, k)] = z[i];
            r[(k, i)] = z[i];
        }
    }
    let mut out = SymMatrix::from_fn(n, |i, j| if i == j { 1.0 } else { r[(i, j)] });
    // Clamp rounding excursions outside [-1, 1].
    let m = out.clone();
    for i in 0..n {
        for j in (i + 1)..n {
            out.set(i, j, m.get(i, j).clamp(-1.0, 1.0));
        }
    }
    out
}

/// Generates the instance determined by `spec`.
pub fn make_instance(spec: &InstanceSpec) -> Result<NcmInstance> {
    spec.validate()?;
    let n = spec.n;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);

    let u = onion_correlation(n, &mut rng);

    // E: unit diagonal, off-diagonals uniform on [-1, 1], row-major order.
    let mut e = SymMatrix::identity(n);
    for i in 0..n {
        for j in (i + 1)..n {
            e.set(i, j, rng.random_range(-1.0..1.0));
        }
    }

    // G = (1 - gamma) U + gamma E; unit diagonal is preserved exactly.
    let mut g = SymMatrix::identity(n);
    for i in 0..n {
        for j in (i + 1)..n {
            g.set(
                i,
                j,
                (1.0 - spec.gamma) * u.get(i, j) + spec.gamma * e.get(i, j),
            );
        }
    }

    // H: unit diagonal; off-diagonal kept with probability p, value uniform
    // on [0, 1). One draw decides, a second draws the value when kept.
    let mut h = SymMatrix::identity(n);
    for i in 0..n {
        for j in (i + 1)..n {
            let keep: f64 = rng.random_range(0.0..1.0);
            let v = if keep < spec.p {
                rng.random_range(0.0..1.0)
            } else {
                0.0
            };
            h.set(i, j, v);
        }
    }

    NcmInstance::new(g, h)
}

/// Paths of an instance's serialized artifacts.
#[derive(Debug, Clone)]
pub struct InstancePaths {
    pub g: PathBuf,
    pub h: PathBuf,
    pub spec: PathBuf,
}

/// Writes `G`, `H` in the matrix text format plus a JSON sidecar recording
/// the instance spec.
pub fn write_instance(
    dir: &Path,
    spec: &InstanceSpec,
    inst: &NcmInstance,
) -> Result<InstancePaths> {
    std::fs::create_dir_all(dir)?;
    let stem = spec.stem();
    let paths = InstancePaths {
        g: dir.join(format!("{stem}.G.txt")),
        h: dir.join(format!("{stem}.H.txt")),
        spec: dir.join(format!("{stem}.json")),
    };
    write_matrix_file(&paths.g, inst.g())?;
    write_matrix_file(&paths.h, inst.h())?;
    std::fs::write(&paths.spec, serde_json::to_string_pretty(spec)?)?;
    Ok(paths)
}

/// Reads an instance back from the sidecar path written by [`write_instance`].
pub fn read_instance(spec_path: &Path) -> Result<(InstanceSpec, NcmInstance)> {
    let spec: InstanceSpec = serde_json::from_str(&std::fs::read_to_string(spec_path)?)?;
    let stem = spec.stem();
    let dir = spec_path.parent().unwrap_or_else(|| Path::new("."));
    let g = read_matrix_file(&dir.join(format!("{stem}.G.txt")))?;
    let h = read_matrix_file(&dir.join(format!("{stem}.H.txt")))?;
    Ok((spec, NcmInstance::new(g, h)?))
}
