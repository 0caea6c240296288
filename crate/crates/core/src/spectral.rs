//! Dense symmetric eigendecomposition by cyclic Jacobi rotations.

use thiserror::Error;

use crate::graph::{build_laplacian, WeightedGraph};

const MAX_SWEEPS: usize = 100;
const SYMMETRY_TOL: f64 = 1e-12;
/// Off-diagonal Frobenius norm target, relative to the input norm.
const OFF_DIAG_RTOL: f64 = 1e-12;
/// λ₂ below this marks a disconnected graph.
pub const DISCONNECTED_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpectralError {
    #[error("matrix is not square ({rows} x {cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix is not symmetric: |m[{i}][{j}] - m[{j}][{i}]| = {diff:e}")]
    NotSymmetric { i: usize, j: usize, diff: f64 },
    #[error("Jacobi iteration did not converge in {0} sweeps")]
    NonConvergence(usize),
    #[error("graph is disconnected (lambda_2 = {0:e})")]
    Disconnected(f64),
    #[error("graph has fewer than two vertices")]
    TooSmall,
}

pub type Result<T> = std::result::Result<T, SpectralError>;

/// Row-major dense square matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    n: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![0.0; n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        let mut m = Self::zeros(n);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(SpectralError::NotSquare {
                    rows: n,
                    cols: row.len(),
                });
            }
            m.data[i * n..(i + 1) * n].copy_from_slice(row);
        }
        Ok(m)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.n).map(|i| self[(i, j)]).collect()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn trace(&self) -> f64 {
        (0..self.n).map(|i| self[(i, i)]).sum()
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|i| self.row(i).iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    fn off_diagonal_norm(&self) -> f64 {
        let mut s = 0.0;
        for i in 0..self.n {
            for j in 0..self.n {
                if i != j {
                    s += self[(i, j)] * self[(i, j)];
                }
            }
        }
        s.sqrt()
    }
}

impl std::ops::Index<(usize, usize)> for Matrix {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.n + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.n + j]
    }
}

/// Ascending eigenvalues with orthonormal eigenvectors stored as columns.
#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    pub values: Vec<f64>,
    /// `vectors[k]` is the eigenvector of `values[k]`.
    pub vectors: Vec<Vec<f64>>,
}

impl SpectralDecomposition {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

fn check_symmetric(m: &Matrix) -> Result<()> {
    let scale = m.frobenius_norm().max(1.0);
    for i in 0..m.n {
        for j in i + 1..m.n {
            let diff = (m[(i, j)] - m[(j, i)]).abs();
            if diff > SYMMETRY_TOL * scale {
                return Err(SpectralError::NotSymmetric { i, j, diff });
            }
        }
    }
    Ok(())
}

/// One Jacobi rotation annihilating `a[p][q]`, accumulated into `v`.
fn rotate(a: &mut Matrix, v: &mut Matrix, p: usize, q: usize) {
    let n = a.n;
    let apq = a[(p, q)];
    let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
    let t = if theta == 0.0 { 1.0 } else { t };
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;

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
    a[(p, q)] = 0.0;
    a[(q, p)] = 0.0;

    for k in 0..n {
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = c * vkp - s * vkq;
        v[(k, q)] = s * vkp + c * vkq;
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn normalize(v: &mut [f64]) {
    let norm = dot(v, v).sqrt();
    if norm > 0.0 {
        v.iter_mut().for_each(|x| *x /= norm);
    }
}

/// Eigendecomposition of a symmetric matrix.
///
/// Cyclic Jacobi sweeps run until no off-diagonal element is large enough to
/// change its diagonal neighbours; the result must then have off-diagonal
/// Frobenius norm below `1e-12·‖m‖`. Eigenvectors inside a degenerate cluster
/// are re-orthonormalized and every eigenvector is signed so that its entry
/// of largest magnitude is positive.
pub fn eig_sym(m: &Matrix) -> Result<SpectralDecomposition> {
    check_symmetric(m)?;
    let n = m.n;
    let norm = m.frobenius_norm();
    let mut a = m.clone();
    let mut v = Matrix::identity(n);

    let mut off = a.off_diagonal_norm();
    let mut sweep = 0;
    while off > 0.0 && off > 1e-2 * OFF_DIAG_RTOL * norm {
        if sweep == MAX_SWEEPS {
            return Err(SpectralError::NonConvergence(MAX_SWEEPS));
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                // negligible next to both diagonal entries
                let g = 100.0 * apq.abs();
                if a[(p, p)].abs() + g == a[(p, p)].abs() && a[(q, q)].abs() + g == a[(q, q)].abs() {
                    a[(p, q)] = 0.0;
                    a[(q, p)] = 0.0;
                    continue;
                }
                rotate(&mut a, &mut v, p, q);
            }
        }
        sweep += 1;
        let prev = off;
        off = a.off_diagonal_norm();
        // stalled at the rounding floor
        if off > 0.5 * prev && off <= OFF_DIAG_RTOL * norm {
            break;
        }
    }
    if a.off_diagonal_norm() > OFF_DIAG_RTOL * norm {
        return Err(SpectralError::NonConvergence(sweep));
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].total_cmp(&a[(j, j)]));
    let values: Vec<f64> = order.iter().map(|&i| a[(i, i)]).collect();
    let mut vectors: Vec<Vec<f64>> = order.iter().map(|&i| v.column(i)).collect();

    let cluster_tol = 1e-9 * norm.max(1.0);
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && values[end] - values[end - 1] <= cluster_tol {
            end += 1;
        }
        if end - start > 1 {
            for i in start..end {
                for j in start..i {
                    let proj = dot(&vectors[i], &vectors[j]);
                    let (head, tail) = vectors.split_at_mut(i);
                    tail[0]
                        .iter_mut()
                        .zip(&head[j])
                        .for_each(|(x, y)| *x -= proj * y);
                }
                normalize(&mut vectors[i]);
            }
        }
        start = end;
    }

    for vec in &mut vectors {
        fix_sign(vec);
    }
    Ok(SpectralDecomposition { values, vectors })
}

fn fix_sign(v: &mut [f64]) {
    let max = v.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
    if let Some(lead) = v.iter().find(|x| x.abs() >= max * (1.0 - 1e-12)) {
        if *lead < 0.0 {
            v.iter_mut().for_each(|x| *x = -*x);
        }
    }
}

/// Second-smallest Laplacian eigenvalue (algebraic connectivity).
pub fn lambda2(g: &WeightedGraph) -> Result<f64> {
    if g.n() < 2 {
        return Err(SpectralError::TooSmall);
    }
    let dec = eig_sym(&build_laplacian(g))?;
    let l2 = dec.values[1];
    if l2 < DISCONNECTED_TOL {
        return Err(SpectralError::Disconnected(l2));
    }
    Ok(l2)
}
