//! Small dense linear algebra helpers.
//!
//! Reductions over `f32` buffers accumulate in `f64`. The eigensolver is a
//! cyclic Jacobi iteration for symmetric matrices; every matrix it sees here
//! is a Gram matrix of at most a few hundred rows, where Jacobi is exact
//! enough and has no iterative-solver tuning surface.

use alloc::vec;
use alloc::vec::Vec;
// Inherent float methods shadow these under std; libm backs them under no_std.
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{CoreError, Result};

pub fn dot(a: &[f32], b: &[f32]) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(&x, &y)| f64::from(x) * f64::from(y))
        .sum()
}

pub fn norm(a: &[f32]) -> f64 {
    dot(a, a).sqrt()
}

/// `a + t * d` as a fresh f32 buffer (math in f64).
pub fn add_scaled(a: &[f32], d: &[f32], t: f64) -> Vec<f32> {
    a.iter()
        .zip(d.iter())
        .map(|(&x, &y)| (f64::from(x) + t * f64::from(y)) as f32)
        .collect()
}

/// `(1 - t) * a + t * b`; exact at the endpoints.
pub fn lerp(a: &[f32], b: &[f32], t: f64) -> Vec<f32> {
    a.iter()
        .zip(b.iter())
        .map(|(&x, &y)| ((1.0 - t) * f64::from(x) + t * f64::from(y)) as f32)
        .collect()
}

/// Eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.
///
/// `a` is `n x n` row-major and is consumed. Returns eigenvalues in
/// descending order with matching unit eigenvectors (row `k` of the returned
/// matrix is the k-th eigenvector).
pub fn jacobi_eigen(mut a: Vec<f64>, n: usize) -> (Vec<f64>, Vec<f64>) {
    assert_eq!(a.len(), n * n, "matrix must be square");
    let mut v = vec![0.0f64; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }
    if n < 2 {
        return (a, v);
    }
    let idx = |r: usize, c: usize| r * n + c;
    for _sweep in 0..100 {
        let mut off = 0.0f64;
        for p in 0..n {
            for q in (p + 1)..n {
                off += a[idx(p, q)] * a[idx(p, q)];
            }
        }
        let scale: f64 = (0..n).map(|i| a[idx(i, i)].abs()).sum::<f64>().max(1e-300);
        if off.sqrt() <= 1e-14 * scale {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[idx(p, q)];
                if apq.abs() <= 1e-300 {
                    continue;
                }
                let app = a[idx(p, p)];
                let aqq = a[idx(q, q)];
                let theta = (aqq - app) / (2.0 * apq);
                let t = if theta >= 0.0 {
                    1.0 / (theta + (1.0 + theta * theta).sqrt())
                } else {
                    1.0 / (theta - (1.0 + theta * theta).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[idx(k, p)];
                    let akq = a[idx(k, q)];
                    a[idx(k, p)] = c * akp - s * akq;
                    a[idx(k, q)] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[idx(p, k)];
                    let aqk = a[idx(q, k)];
                    a[idx(p, k)] = c * apk - s * aqk;
                    a[idx(q, k)] = s * apk + c * aqk;
                }
                for k in 0..n {
                    let vkp = v[idx(k, p)];
                    let vkq = v[idx(k, q)];
                    v[idx(k, p)] = c * vkp - s * vkq;
                    v[idx(k, q)] = s * vkp + c * vkq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        a[idx(j, j)]
            .partial_cmp(&a[idx(i, i)])
            .unwrap_or(core::cmp::Ordering::Equal)
    });
    let eigenvalues: Vec<f64> = order.iter().map(|&i| a[idx(i, i)]).collect();
    let mut eigenvectors = vec![0.0f64; n * n];
    for (row, &col) in order.iter().enumerate() {
        for k in 0..n {
            eigenvectors[row * n + k] = v[idx(k, col)];
        }
    }
    (eigenvalues, eigenvectors)
}

/// Principal components of a small set of long rows via the Gram trick.
#[derive(Debug, Clone)]
pub struct Pca {
    /// Mean row of the input.
    pub mean: Vec<f64>,
    /// Eigenvalues of the Gram matrix of centered rows (descending, i.e.
    /// squared singular values).
    pub gram_eigenvalues: Vec<f64>,
    /// Unit-norm principal directions in input space, strongest first.
    pub directions: Vec<Vec<f64>>,
    /// Projection of each centered input row onto each direction
    /// (`scores[i][k]`).
    pub scores: Vec<Vec<f64>>,
}

/// Computes the top `rank` principal components of `rows` (each of length
/// `dim`). Intended for `rows.len()` much smaller than `dim`: cost is
/// `rows^2 * dim`.
pub fn pca(rows: &[Vec<f64>], dim: usize, rank: usize) -> Result<Pca> {
    let m = rows.len();
    if m < 2 {
        return Err(CoreError::invalid("PCA needs at least 2 rows"));
    }
    if rank >= m {
        return Err(CoreError::invalid("PCA rank must be below the row count"));
    }
    if rows.iter().any(|r| r.len() != dim) {
        return Err(CoreError::Shape {
            context: "pca row length",
            expected: dim,
            got: rows.iter().map(|r| r.len()).find(|&l| l != dim).unwrap_or(0),
        });
    }
    let mut mean = vec![0.0f64; dim];
    for row in rows {
        for (m_j, &x) in mean.iter_mut().zip(row.iter()) {
            *m_j += x;
        }
    }
    for m_j in mean.iter_mut() {
        *m_j /= m as f64;
    }
    let centered: Vec<Vec<f64>> = rows
        .iter()
        .map(|r| r.iter().zip(mean.iter()).map(|(&x, &mu)| x - mu).collect())
        .collect();
    let mut gram = vec![0.0f64; m * m];
    for i in 0..m {
        for j in i..m {
            let g: f64 = centered[i]
                .iter()
                .zip(centered[j].iter())
                .map(|(&x, &y)| x * y)
                .sum();
            gram[i * m + j] = g;
            gram[j * m + i] = g;
        }
    }
    let (eigenvalues, eigenvectors) = jacobi_eigen(gram, m);
    let mut directions = Vec::with_capacity(rank);
    for k in 0..rank {
        let lambda = eigenvalues[k].max(0.0);
        let mut dir = vec![0.0f64; dim];
        if lambda > 1e-24 {
            let u = &eigenvectors[k * m..(k + 1) * m];
            for (i, row) in centered.iter().enumerate() {
                let coef = u[i];
                for (d, &x) in dir.iter_mut().zip(row.iter()) {
                    *d += coef * x;
                }
            }
            let inv = 1.0 / lambda.sqrt();
            for d in dir.iter_mut() {
                *d *= inv;
            }
        }
        directions.push(dir);
    }
    let scores: Vec<Vec<f64>> = centered
        .iter()
        .map(|row| {
            directions
                .iter()
                .map(|dir| row.iter().zip(dir.iter()).map(|(&x, &d)| x * d).sum())
                .collect()
        })
        .collect();
    Ok(Pca {
        mean,
        gram_eigenvalues: eigenvalues,
        directions,
        scores,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn jacobi_recovers_known_eigensystem() {
        // [[2, 1], [1, 2]] has eigenvalues 3 and 1 with (1,1)/sqrt2, (1,-1)/sqrt2.
        let (vals, vecs) = jacobi_eigen(vec![2.0, 1.0, 1.0, 2.0], 2);
        assert!((vals[0] - 3.0).abs() < 1e-12);
        assert!((vals[1] - 1.0).abs() < 1e-12);
        let inv_sqrt2 = core::f64::consts::FRAC_1_SQRT_2;
        assert!((vecs[0].abs() - inv_sqrt2).abs() < 1e-12);
        assert!((vecs[1].abs() - inv_sqrt2).abs() < 1e-12);
        // Eigenvector signs are arbitrary; components of the second must differ in sign.
        assert!(vecs[2] * vecs[3] < 0.0);
    }

    #[test]
    fn jacobi_reconstructs_random_symmetric() {
        use crate::rng;
        use rand::RngCore as _;
        let mut r = rng::stream(5, rng::domain::ORACLE);
        let n = 6;
        let mut a = vec![0.0f64; n * n];
        for i in 0..n {
            for j in i..n {
                let v = rng::uniform(&mut r) - 0.5;
                a[i * n + j] = v;
                a[j * n + i] = v;
            }
        }
        let _ = r.next_u64();
        let (vals, vecs) = jacobi_eigen(a.clone(), n);
        // Check A v_k = lambda_k v_k for each k.
        for k in 0..n {
            let v = &vecs[k * n..(k + 1) * n];
            for i in 0..n {
                let av: f64 = (0..n).map(|j| a[i * n + j] * v[j]).sum();
                assert!(
                    (av - vals[k] * v[i]).abs() < 1e-9,
                    "eigenpair {k} violated at row {i}"
                );
            }
        }
    }

    #[test]
    fn pca_two_point_case() {
        // Rows mu +/- d: single component along d, gram eigenvalue 2|d|^2.
        let rows = vec![vec![1.0, 2.0, 3.0], vec![3.0, 2.0, 1.0]];
        let p = pca(&rows, 3, 1).unwrap();
        assert!((p.mean[0] - 2.0).abs() < 1e-12);
        let d = &p.directions[0];
        assert!((d[1]).abs() < 1e-12);
        assert!((d[0].abs() - core::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);
        assert!((p.gram_eigenvalues[0] - 4.0).abs() < 1e-12);
    }
}
