//! Cyclic Jacobi eigensolver for small dense symmetric matrices.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

const MAX_SWEEPS: usize = 100;
const SYMMETRY_TOL: f64 = 1e-12;
const OFF_DIAGONAL_TOL: f64 = 1e-14;

/// Spectral data of a real symmetric matrix: `values` ascending, eigenvectors in the
/// matching columns of `vectors`.
#[derive(Clone, Debug)]
pub struct SymEigen {
    pub values: Vec<f64>,
    pub vectors: DMatrix<f64>,
}

impl SymEigen {
    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    /// `V diag(values) V^T`.
    pub fn reconstruct(&self) -> DMatrix<f64> {
        let n = self.values.len();
        let mut d = DMatrix::zeros(n, n);
        for i in 0..n {
            d[(i, i)] = self.values[i];
        }
        &self.vectors * d * self.vectors.transpose()
    }
}

/// Relative asymmetry `max |m_ij - m_ji| / max |m_ij|` (zero for the zero matrix).
pub fn asymmetry(m: &DMatrix<f64>) -> f64 {
    let scale = m.amax();
    if scale == 0.0 {
        return 0.0;
    }
    (m - m.transpose()).amax() / scale
}

/// Eigen-decomposition by cyclic Jacobi sweeps. The iteration stops once the off-diagonal
/// Frobenius norm drops below `1e-14 * ||M||_F`.
pub fn sym_eigen(m: &DMatrix<f64>) -> Result<SymEigen> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch { expected: m.nrows(), found: m.ncols() });
    }
    let asym = asymmetry(m);
    if asym > SYMMETRY_TOL {
        return Err(Error::NonSymmetric(asym));
    }
    let n = m.nrows();
    let mut a = (m + m.transpose()) * 0.5;
    let mut v = DMatrix::<f64>::identity(n, n);
    let norm = a.norm();
    if norm == 0.0 {
        return Ok(SymEigen { values: vec![0.0; n], vectors: v });
    }

    for _ in 0..MAX_SWEEPS {
        if off_diagonal_norm(&a) < OFF_DIAGONAL_TOL * norm {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                let t = if theta.is_infinite() {
                    0.0
                } else {
                    theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                rotate_columns(&mut a, p, q, c, s);
                rotate_rows(&mut a, p, q, c, s);
                rotate_columns(&mut v, p, q, c, s);
                a[(p, q)] = 0.0;
                a[(q, p)] = 0.0;
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].total_cmp(&a[(j, j)]));
    let values = order.iter().map(|&i| a[(i, i)]).collect();
    let vectors = DMatrix::from_fn(n, n, |r, c| v[(r, order[c])]);
    Ok(SymEigen { values, vectors })
}

fn off_diagonal_norm(a: &DMatrix<f64>) -> f64 {
    let n = a.nrows();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s += a[(i, j)] * a[(i, j)];
            }
        }
    }
    s.sqrt()
}

fn rotate_columns(a: &mut DMatrix<f64>, p: usize, q: usize, c: f64, s: f64) {
    for k in 0..a.nrows() {
        let (akp, akq) = (a[(k, p)], a[(k, q)]);
        a[(k, p)] = c * akp - s * akq;
        a[(k, q)] = s * akp + c * akq;
    }
}

fn rotate_rows(a: &mut DMatrix<f64>, p: usize, q: usize, c: f64, s: f64) {
    for k in 0..a.ncols() {
        let (apk, aqk) = (a[(p, k)], a[(q, k)]);
        a[(p, k)] = c * apk - s * aqk;
        a[(q, k)] = s * apk + c * aqk;
    }
}
