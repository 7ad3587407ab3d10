use std::ops::{Add, Index, IndexMut, Neg, Sub};

use nalgebra::{DMatrix, DVector};

use super::quaternion::Quaternion;
use crate::error::{Error, Result};

/// A vector of `H^{n+1}`. The real layout is `c[4a + m]` with `m` ordering (t, x, y, z).
#[derive(Clone, Debug, PartialEq)]
pub struct QVector {
    pub coords: Vec<Quaternion>,
}

impl QVector {
    pub fn zeros(slots: usize) -> Self {
        QVector { coords: vec![Quaternion::ZERO; slots] }
    }

    pub fn from_quaternions(coords: Vec<Quaternion>) -> Self {
        QVector { coords }
    }

    /// Build from real coordinates; the length must be a multiple of 4.
    pub fn from_reals(c: &[f64]) -> Result<Self> {
        if !c.len().is_multiple_of(4) || c.is_empty() {
            return Err(Error::DimensionMismatch { expected: 4 * (c.len() / 4).max(1), found: c.len() });
        }
        Ok(QVector { coords: c.chunks(4).map(|q| Quaternion::new(q[0], q[1], q[2], q[3])).collect() })
    }

    pub fn from_dvector(v: &DVector<f64>) -> Result<Self> {
        Self::from_reals(v.as_slice())
    }

    /// Unit real basis vector with index `4a + m`.
    pub fn basis(slots: usize, index: usize) -> Self {
        let mut c = vec![0.0; 4 * slots];
        c[index] = 1.0;
        Self::from_reals(&c).expect("basis length is a multiple of 4")
    }

    pub fn slots(&self) -> usize {
        self.coords.len()
    }

    pub fn real_dim(&self) -> usize {
        4 * self.coords.len()
    }

    pub fn to_reals(&self) -> Vec<f64> {
        self.coords.iter().flat_map(|q| q.to_array()).collect()
    }

    pub fn to_dvector(&self) -> DVector<f64> {
        DVector::from_vec(self.to_reals())
    }

    pub fn norm(&self) -> f64 {
        self.coords.iter().map(|q| q.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn scale(&self, s: f64) -> Self {
        QVector { coords: self.coords.iter().map(|q| q.scale(s)).collect() }
    }

    /// Right scalar multiplication `v * lambda`, slot by slot.
    pub fn right_mul(&self, lambda: Quaternion) -> Self {
        QVector { coords: self.coords.iter().map(|&q| q * lambda).collect() }
    }

    /// Quaternion-valued Hermitian product `sum conj(self_a) * other_a`.
    pub fn qdot(&self, other: &QVector) -> Quaternion {
        self.coords.iter().zip(&other.coords).fold(Quaternion::ZERO, |acc, (&a, &b)| acc + a.conj() * b)
    }
}

impl Index<usize> for QVector {
    type Output = Quaternion;
    fn index(&self, a: usize) -> &Quaternion {
        &self.coords[a]
    }
}

impl IndexMut<usize> for QVector {
    fn index_mut(&mut self, a: usize) -> &mut Quaternion {
        &mut self.coords[a]
    }
}

impl Add for &QVector {
    type Output = QVector;
    fn add(self, o: &QVector) -> QVector {
        QVector { coords: self.coords.iter().zip(&o.coords).map(|(&a, &b)| a + b).collect() }
    }
}

impl Sub for &QVector {
    type Output = QVector;
    fn sub(self, o: &QVector) -> QVector {
        QVector { coords: self.coords.iter().zip(&o.coords).map(|(&a, &b)| a - b).collect() }
    }
}

impl Neg for &QVector {
    type Output = QVector;
    fn neg(self) -> QVector {
        QVector { coords: self.coords.iter().map(|&a| -a).collect() }
    }
}

/// Complex structure `J_s` of the flat hyper-Kähler space: right multiplication by `-e_s`.
pub fn apply_j(s: usize, v: &QVector) -> QVector {
    v.right_mul(-Quaternion::unit(s))
}

/// `J_s` acting on a real coordinate vector.
pub fn apply_j_real(s: usize, v: &DVector<f64>) -> DVector<f64> {
    let e = -Quaternion::unit(s);
    let mut out = DVector::zeros(v.len());
    for a in 0..v.len() / 4 {
        let q = Quaternion::new(v[4 * a], v[4 * a + 1], v[4 * a + 2], v[4 * a + 3]) * e;
        out[4 * a] = q.t;
        out[4 * a + 1] = q.x;
        out[4 * a + 2] = q.y;
        out[4 * a + 3] = q.z;
    }
    out
}

/// Real `4(n+1) x 4(n+1)` matrix of `J_s`.
pub fn j_matrix(s: usize, slots: usize) -> DMatrix<f64> {
    let block = (-Quaternion::unit(s)).right_matrix();
    block_diagonal(&block, slots)
}

pub(crate) fn block_diagonal(block: &[[f64; 4]; 4], slots: usize) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(4 * slots, 4 * slots);
    for a in 0..slots {
        for r in 0..4 {
            for c in 0..4 {
                m[(4 * a + r, 4 * a + c)] = block[r][c];
            }
        }
    }
    m
}

/// Flat metric `Re(sum q_a conj(q'_a))`.
pub fn flat_inner(v: &QVector, w: &QVector) -> Result<f64> {
    if v.slots() != w.slots() {
        return Err(Error::DimensionMismatch { expected: v.real_dim(), found: w.real_dim() });
    }
    Ok(v.coords.iter().zip(&w.coords).map(|(a, b)| a.dot(*b)).sum())
}
