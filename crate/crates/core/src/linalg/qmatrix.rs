use std::ops::Mul;

use nalgebra::DMatrix;

use super::quaternion::Quaternion;
use super::qvector::{j_matrix, QVector};
use crate::error::{Error, Result};

/// Dense quaternionic matrix acting on column vectors from the left, row-major storage.
#[derive(Clone, Debug, PartialEq)]
pub struct QMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Quaternion>,
}

impl QMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        QMatrix { rows, cols, data: vec![Quaternion::ZERO; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Quaternion::ONE;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, f: impl Fn(usize, usize) -> Quaternion) -> Self {
        let mut m = Self::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    pub fn diagonal(d: &[Quaternion]) -> Self {
        let mut m = Self::zeros(d.len(), d.len());
        for (i, &q) in d.iter().enumerate() {
            m[(i, i)] = q;
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn scale(&self, s: f64) -> Self {
        QMatrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(|q| q.scale(s)).collect() }
    }

    /// Conjugate transpose `A*`.
    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn apply(&self, v: &QVector) -> QVector {
        assert_eq!(v.slots(), self.cols, "matrix/vector dimension mismatch");
        let coords =
            (0..self.rows).map(|i| (0..self.cols).fold(Quaternion::ZERO, |acc, j| acc + self[(i, j)] * v[j])).collect();
        QVector::from_quaternions(coords)
    }

    pub fn column(&self, j: usize) -> QVector {
        QVector::from_quaternions((0..self.rows).map(|i| self[(i, j)]).collect())
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0_f64, |m, q| m.max(q.max_abs()))
    }

    /// Real `4 rows x 4 cols` matrix of the left action.
    pub fn to_real(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(4 * self.rows, 4 * self.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                let b = self[(i, j)].left_matrix();
                for r in 0..4 {
                    for c in 0..4 {
                        m[(4 * i + r, 4 * j + c)] = b[r][c];
                    }
                }
            }
        }
        m
    }

    /// Project a real matrix onto quaternionic left actions, block by block.
    pub fn from_real(m: &DMatrix<f64>) -> Result<Self> {
        if !m.nrows().is_multiple_of(4) || !m.ncols().is_multiple_of(4) {
            return Err(Error::DimensionMismatch { expected: 4 * (m.nrows() / 4), found: m.nrows() });
        }
        let (rows, cols) = (m.nrows() / 4, m.ncols() / 4);
        Ok(Self::from_fn(rows, cols, |i, j| {
            let mut b = [[0.0; 4]; 4];
            for (r, row) in b.iter_mut().enumerate() {
                for (c, v) in row.iter_mut().enumerate() {
                    *v = m[(4 * i + r, 4 * j + c)];
                }
            }
            Quaternion::from_left_block(&b)
        }))
    }

    /// Inverse by Gauss-Jordan elimination with partial pivoting (row operations act from
    /// the left, so the non-commutative product order is respected).
    pub fn inverse(&self) -> Result<Self> {
        if self.rows != self.cols {
            return Err(Error::DimensionMismatch { expected: self.rows, found: self.cols });
        }
        let n = self.rows;
        let mut a = self.clone();
        let mut inv = Self::identity(n);
        let scale = self.max_abs();
        if scale == 0.0 {
            return Err(Error::Singular);
        }
        for k in 0..n {
            let piv =
                (k..n).max_by(|&i, &j| a[(i, k)].norm().total_cmp(&a[(j, k)].norm())).expect("non-empty pivot range");
            if a[(piv, k)].norm() <= 1e-14 * scale {
                return Err(Error::Singular);
            }
            a.swap_rows(k, piv);
            inv.swap_rows(k, piv);
            let p_inv = a[(k, k)].inverse().ok_or(Error::Singular)?;
            for j in 0..n {
                a[(k, j)] = p_inv * a[(k, j)];
                inv[(k, j)] = p_inv * inv[(k, j)];
            }
            for i in 0..n {
                if i == k {
                    continue;
                }
                let m = a[(i, k)];
                if m == Quaternion::ZERO {
                    continue;
                }
                for j in 0..n {
                    let (akj, ikj) = (a[(k, j)], inv[(k, j)]);
                    a[(i, j)] -= m * akj;
                    inv[(i, j)] -= m * ikj;
                }
            }
        }
        Ok(inv)
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    fn swap_cols(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for i in 0..self.rows {
            self.data.swap(i * self.cols + a, i * self.cols + b);
        }
    }

    /// Right-multiply column `j` by the quaternion `q`.
    fn scale_col_right(&mut self, j: usize, q: Quaternion) {
        for i in 0..self.rows {
            self[(i, j)] = self[(i, j)] * q;
        }
    }

    /// 2-norm condition number of the real representation.
    pub fn condition_number(&self) -> f64 {
        let sv = self.to_real().singular_values();
        let max = sv.max();
        let min = sv.min();
        if min == 0.0 {
            f64::INFINITY
        } else {
            max / min
        }
    }
}

impl std::ops::Index<(usize, usize)> for QMatrix {
    type Output = Quaternion;
    fn index(&self, (i, j): (usize, usize)) -> &Quaternion {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for QMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Quaternion {
        &mut self.data[i * self.cols + j]
    }
}

impl Mul for &QMatrix {
    type Output = QMatrix;
    fn mul(self, o: &QMatrix) -> QMatrix {
        assert_eq!(self.cols, o.rows, "matrix dimension mismatch");
        QMatrix::from_fn(self.rows, o.cols, |i, j| {
            (0..self.cols).fold(Quaternion::ZERO, |acc, k| acc + self[(i, k)] * o[(k, j)])
        })
    }
}

/// Quaternionic Hermitian matrix `H = H*`; its real form `Re(v* H w)` is a symmetric,
/// J-invariant bilinear form on `H^{n+1}`.
#[derive(Clone, Debug, PartialEq)]
pub struct QHermitian(QMatrix);

impl QHermitian {
    /// Wrap a matrix, averaging it with its adjoint.
    pub fn from_matrix(m: QMatrix) -> Self {
        let adj = m.adjoint();
        let sym = QMatrix::from_fn(m.rows, m.cols, |i, j| (m[(i, j)] + adj[(i, j)]).scale(0.5));
        QHermitian(sym)
    }

    pub fn matrix(&self) -> &QMatrix {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.rows
    }

    /// Real symmetric matrix `Delta` with `<Delta v, w> = Re(w* H v)`.
    pub fn to_real(&self) -> DMatrix<f64> {
        self.0.to_real()
    }

    /// Congruence `A* H A`.
    pub fn congruence(&self, a: &QMatrix) -> QHermitian {
        QHermitian::from_matrix(&(&a.adjoint() * &self.0) * a)
    }
}

/// Largest relative commutator `||Delta J_s - J_s Delta|| / ||Delta||` over `s`.
pub fn j_commutator_residual(delta: &DMatrix<f64>) -> f64 {
    let scale = delta.amax();
    if scale == 0.0 {
        return 0.0;
    }
    let slots = delta.nrows() / 4;
    (1..=3)
        .map(|s| {
            let j = j_matrix(s, slots);
            (delta * &j - &j * delta).amax() / scale
        })
        .fold(0.0, f64::max)
}

/// View a J-invariant real symmetric form as a quaternionic Hermitian matrix.
pub fn to_quat_hermitian(delta: &DMatrix<f64>) -> Result<QHermitian> {
    if delta.nrows() != delta.ncols() || !delta.nrows().is_multiple_of(4) {
        return Err(Error::DimensionMismatch { expected: 4 * (delta.nrows() / 4), found: delta.ncols() });
    }
    let res = j_commutator_residual(delta);
    if res > 1e-10 {
        return Err(Error::NotJInvariant(res));
    }
    Ok(QHermitian::from_matrix(QMatrix::from_real(delta)?))
}

/// Quaternionic inertia `(p, m, z)`: counts of +1, -1 and 0 in the diagonal normal form.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize)]
pub struct Inertia {
    pub positive: usize,
    pub negative: usize,
    pub zero: usize,
}

impl Inertia {
    pub fn new(positive: usize, negative: usize, zero: usize) -> Self {
        Inertia { positive, negative, zero }
    }

    pub fn as_array(&self) -> [usize; 3] {
        [self.positive, self.negative, self.zero]
    }
}

impl std::fmt::Display for Inertia {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({}, {}, {})", self.positive, self.negative, self.zero)
    }
}

/// Result of [`congruence_diagonalize`]: `A* H A = diag(+1 x p, -1 x m, 0 x z)`.
#[derive(Clone, Debug)]
pub struct Congruence {
    pub transform: QMatrix,
    pub inertia: Inertia,
    pub signs: Vec<f64>,
}

/// Symmetric Gaussian elimination over the quaternions with full diagonal pivoting.
///
/// Pivots smaller than `eps_rank` times the largest entry of `H` count as zero. When every
/// remaining diagonal entry is negligible but an off-diagonal entry is not, the pair is
/// first combined so that a usable diagonal pivot appears.
pub fn congruence_diagonalize(h: &QHermitian, eps_rank: f64) -> Congruence {
    let n = h.dim();
    let mut work = h.0.clone();
    let mut t = QMatrix::identity(n);
    let scale = work.max_abs();
    let tiny = eps_rank * scale;
    let mut signs = vec![0.0; n];

    for k in 0..n {
        let mut piv = k;
        for i in k + 1..n {
            if work[(i, i)].t.abs() > work[(piv, piv)].t.abs() {
                piv = i;
            }
        }
        if work[(piv, piv)].t.abs() <= tiny {
            // look for a coupling among the remaining indices
            let mut best = (0.0, k, k);
            for i in k..n {
                for j in i + 1..n {
                    let v = work[(i, j)].norm();
                    if v > best.0 {
                        best = (v, i, j);
                    }
                }
            }
            let (v, i, j) = best;
            if v <= tiny {
                break;
            }
            // e_i <- e_i + e_j u with u = conj(H_ij)/|H_ij| gives diagonal ~ 2|H_ij|
            let u = work[(i, j)].conj().scale(1.0 / v);
            add_scaled_index(&mut work, &mut t, i, j, u);
            piv = i;
        }
        if piv != k {
            work.swap_rows(k, piv);
            work.swap_cols(k, piv);
            t.swap_cols(k, piv);
        }
        let d = work[(k, k)].t;
        for j in k + 1..n {
            let m = work[(k, j)].scale(1.0 / d);
            if m == Quaternion::ZERO {
                continue;
            }
            // e_j <- e_j - e_k m
            add_scaled_index(&mut work, &mut t, j, k, -m);
        }
        let s = 1.0 / d.abs().sqrt();
        t.scale_col_right(k, Quaternion::real(s));
        for j in 0..n {
            work[(k, j)] = work[(k, j)].scale(s);
            work[(j, k)] = work[(j, k)].scale(s);
        }
        signs[k] = d.signum();
    }

    // order: +1 block, -1 block, zero block (stable within each block)
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&i| match signs[i] {
        s if s > 0.0 => 0,
        s if s < 0.0 => 1,
        _ => 2,
    });
    let transform = QMatrix::from_fn(n, n, |i, j| t[(i, order[j])]);
    let signs: Vec<f64> = order.iter().map(|&i| signs[i]).collect();
    let inertia = Inertia::new(
        signs.iter().filter(|&&s| s > 0.0).count(),
        signs.iter().filter(|&&s| s < 0.0).count(),
        signs.iter().filter(|&&s| s == 0.0).count(),
    );
    Congruence { transform, inertia, signs }
}

/// Replace basis vector `e_i` by `e_i + e_j u` in both the transform and the working form.
fn add_scaled_index(work: &mut QMatrix, t: &mut QMatrix, i: usize, j: usize, u: Quaternion) {
    let n = work.rows;
    for r in 0..n {
        t[(r, i)] = t[(r, i)] + t[(r, j)] * u;
    }
    // columns: H[:, i] += H[:, j] u ; rows: H[i, :] += conj(u) H[j, :]
    for r in 0..n {
        work[(r, i)] = work[(r, i)] + work[(r, j)] * u;
    }
    let uc = u.conj();
    for c in 0..n {
        work[(i, c)] = work[(i, c)] + uc * work[(j, c)];
    }
}
