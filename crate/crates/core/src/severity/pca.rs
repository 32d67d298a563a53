//! Principal component analysis by power iteration with deflation, for
//! projecting the 13-dimensional feature space down to three dimensions.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::severity::{FeatureVector, FEATURE_DIM};

const TOLERANCE: f64 = 1e-9;
const MAX_ITERATIONS: usize = 1000;

#[derive(Debug, Clone, PartialEq)]
pub struct PcaProjection {
    /// One k-dimensional point per input sample.
    pub points: Vec<Vec<f64>>,
    /// Orthonormal principal directions, one per component.
    pub components: Vec<Vec<f64>>,
    /// Fraction of total variance captured per component, nonincreasing.
    pub explained_variance: Vec<f64>,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(v: &[f64]) -> f64 {
    dot(v, v).sqrt()
}

fn mat_vec(m: &[Vec<f64>], v: &[f64]) -> Vec<f64> {
    m.iter().map(|row| dot(row, v)).collect()
}

/// Removes the projections onto `basis` from `v` (modified Gram-Schmidt).
fn orthogonalize(v: &mut [f64], basis: &[Vec<f64>]) {
    for b in basis {
        let coeff = dot(v, b);
        for (x, y) in v.iter_mut().zip(b) {
            *x -= coeff * y;
        }
    }
}

fn seeded_unit_vector(rng: &mut ChaCha8Rng, dim: usize, basis: &[Vec<f64>]) -> Option<Vec<f64>> {
    for _ in 0..32 {
        let mut v: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
        orthogonalize(&mut v, basis);
        let n = norm(&v);
        if n > 1e-6 {
            for x in &mut v {
                *x /= n;
            }
            return Some(v);
        }
    }
    None
}

/// Projects mean-centered samples onto the top-k principal directions.
///
/// Requires at least k+1 samples and nonzero variance. When the data rank
/// is below k the tail components have (near-)zero explained variance and
/// are completed to an orthonormal set.
pub fn pca_project(features: &[FeatureVector], k: usize) -> Result<PcaProjection> {
    let n = features.len();
    if n < k + 1 {
        return Err(Error::DegenerateData(k));
    }
    let dim = FEATURE_DIM;

    let mut mean = vec![0.0; dim];
    for fv in features {
        for (m, v) in mean.iter_mut().zip(fv.as_slice()) {
            *m += v;
        }
    }
    for m in &mut mean {
        *m /= n as f64;
    }
    let centered: Vec<Vec<f64>> = features
        .iter()
        .map(|fv| {
            fv.as_slice()
                .iter()
                .zip(&mean)
                .map(|(v, m)| v - m)
                .collect()
        })
        .collect();

    // Covariance (dim x dim), normalized by n-1.
    let mut cov = vec![vec![0.0; dim]; dim];
    for row in &centered {
        for i in 0..dim {
            if row[i] == 0.0 {
                continue;
            }
            for j in 0..dim {
                cov[i][j] += row[i] * row[j];
            }
        }
    }
    let denom = (n - 1) as f64;
    for row in &mut cov {
        for x in row.iter_mut() {
            *x /= denom;
        }
    }
    let total_variance: f64 = (0..dim).map(|i| cov[i][i]).sum();
    if total_variance < 1e-15 {
        return Err(Error::DegenerateData(k));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(0x9ca);
    let mut components: Vec<Vec<f64>> = Vec::with_capacity(k);
    let mut eigenvalues = Vec::with_capacity(k);
    for _ in 0..k {
        let mut v = seeded_unit_vector(&mut rng, dim, &components)
            .ok_or(Error::DegenerateData(k))?;
        let mut eigenvalue = 0.0;
        for _ in 0..MAX_ITERATIONS {
            let mut next = mat_vec(&cov, &v);
            orthogonalize(&mut next, &components);
            let n_next = norm(&next);
            if n_next < 1e-14 {
                // Exhausted rank: keep the current orthonormal direction
                // with zero variance along it.
                eigenvalue = 0.0;
                break;
            }
            for x in &mut next {
                *x /= n_next;
            }
            let delta = v
                .iter()
                .zip(&next)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0f64, f64::max);
            let flipped = v
                .iter()
                .zip(&next)
                .map(|(a, b)| (a + b).abs())
                .fold(0.0f64, f64::max);
            v = next;
            eigenvalue = dot(&mat_vec(&cov, &v), &v);
            if delta < TOLERANCE || flipped < TOLERANCE {
                break;
            }
        }
        // Deflate.
        for i in 0..dim {
            for j in 0..dim {
                cov[i][j] -= eigenvalue * v[i] * v[j];
            }
        }
        eigenvalues.push(eigenvalue.max(0.0));
        components.push(v);
    }

    let points = centered
        .iter()
        .map(|row| components.iter().map(|c| dot(row, c)).collect())
        .collect();
    Ok(PcaProjection {
        points,
        components,
        explained_variance: eigenvalues
            .iter()
            .map(|e| e / total_variance)
            .collect(),
    })
}
