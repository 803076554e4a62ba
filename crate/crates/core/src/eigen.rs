//! Smallest eigenpair of a small dense symmetric matrix by cyclic Jacobi
//! rotations.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math;

const MAX_SWEEPS: usize = 60;

/// Eigenvalues (ascending) and the matching orthonormal eigenvectors.
#[derive(Debug, Clone)]
pub struct SymmetricEigen {
    pub values: Vec<f64>,
    /// Column-major: eigenvector `j` is `vectors[j*dim..(j+1)*dim]`.
    pub vectors: Vec<f64>,
    pub dim: usize,
    pub sweeps: usize,
}

impl SymmetricEigen {
    pub fn vector(&self, j: usize) -> &[f64] {
        &self.vectors[j * self.dim..(j + 1) * self.dim]
    }
}

/// Full decomposition of the row-major symmetric matrix `a` (`dim x dim`).
///
/// Iterates until the off-diagonal Frobenius norm is at most `tol` times
/// the matrix Frobenius norm.
pub fn symmetric_eigen(a: &[f64], dim: usize, tol: f64) -> Result<SymmetricEigen> {
    if a.len() != dim * dim {
        return Err(Error::Dimension {
            what: "symmetric matrix storage",
            expected: dim * dim,
            found: a.len(),
        });
    }
    if !(tol > 0.0) {
        return Err(Error::invalid("eigenvalue tolerance must be positive"));
    }
    if a.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite("symmetric matrix"));
    }
    let mut m = a.to_vec();
    // symmetrize against assembly round-off
    for i in 0..dim {
        for j in 0..i {
            let s = 0.5 * (m[i * dim + j] + m[j * dim + i]);
            m[i * dim + j] = s;
            m[j * dim + i] = s;
        }
    }
    let mut v = vec![0.0; dim * dim];
    for i in 0..dim {
        v[i * dim + i] = 1.0;
    }
    let total = math::sqrt(m.iter().map(|x| x * x).sum::<f64>());
    let threshold = tol * total.max(f64::MIN_POSITIVE);

    let mut sweeps = 0;
    loop {
        let off = off_diagonal(&m, dim);
        if off <= threshold {
            break;
        }
        if sweeps == MAX_SWEEPS {
            let partial_min = (0..dim).map(|i| m[i * dim + i]).fold(f64::INFINITY, f64::min);
            return Err(Error::EigenNoConvergence {
                dim,
                sweeps,
                off_diagonal: off,
                partial_min,
            });
        }
        sweeps += 1;
        for p in 0..dim {
            for q in (p + 1)..dim {
                rotate(&mut m, &mut v, dim, p, q);
            }
        }
    }

    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&i, &j| m[i * dim + i].total_cmp(&m[j * dim + j]));
    let values = order.iter().map(|&i| m[i * dim + i]).collect();
    let mut vectors = Vec::with_capacity(dim * dim);
    for &j in &order {
        // v holds eigenvectors as columns in row-major storage
        vectors.extend((0..dim).map(|i| v[i * dim + j]));
    }
    Ok(SymmetricEigen {
        values,
        vectors,
        dim,
        sweeps,
    })
}

/// Smallest eigenvalue and a unit eigenvector.
pub fn min_eigenpair(a: &[f64], dim: usize, tol: f64) -> Result<(f64, Vec<f64>)> {
    let eig = symmetric_eigen(a, dim, tol)?;
    Ok((eig.values[0], eig.vector(0).to_vec()))
}

fn off_diagonal(m: &[f64], dim: usize) -> f64 {
    let mut s = 0.0;
    for i in 0..dim {
        for j in 0..dim {
            if i != j {
                s += m[i * dim + j] * m[i * dim + j];
            }
        }
    }
    math::sqrt(s)
}

fn rotate(m: &mut [f64], v: &mut [f64], dim: usize, p: usize, q: usize) {
    let apq = m[p * dim + q];
    if apq == 0.0 {
        return;
    }
    let app = m[p * dim + p];
    let aqq = m[q * dim + q];
    let theta = (aqq - app) / (2.0 * apq);
    let t = theta.signum() / (theta.abs() + math::sqrt(theta * theta + 1.0));
    let t = if theta == 0.0 { 1.0 } else { t };
    let c = 1.0 / math::sqrt(t * t + 1.0);
    let s = t * c;

    for k in 0..dim {
        let mkp = m[k * dim + p];
        let mkq = m[k * dim + q];
        m[k * dim + p] = c * mkp - s * mkq;
        m[k * dim + q] = s * mkp + c * mkq;
    }
    for k in 0..dim {
        let mpk = m[p * dim + k];
        let mqk = m[q * dim + k];
        m[p * dim + k] = c * mpk - s * mqk;
        m[q * dim + k] = s * mpk + c * mqk;
    }
    m[p * dim + q] = 0.0;
    m[q * dim + p] = 0.0;
    for k in 0..dim {
        let vkp = v[k * dim + p];
        let vkq = v[k * dim + q];
        v[k * dim + p] = c * vkp - s * vkq;
        v[k * dim + q] = s * vkp + c * vkq;
    }
}
