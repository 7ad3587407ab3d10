//! Recovery of the conformal factor and SO(3) rotation relating two qc structures that share
//! a point and a horizontal space.

use nalgebra::{DMatrix, DVector, Matrix3};

use crate::calibration::CalibratedFrame;
use crate::error::{Error, Result};
use crate::frame::HatFrame;

pub const CONFORMAL_TOL: f64 = 1e-8;

/// Pointwise qc data: contact forms as ambient vectors (`eta_s(A) = <eta[s], A>`), and the
/// horizontal metric and complex structures in `h_basis` coordinates.
#[derive(Clone, Debug)]
pub struct QcStructure {
    pub point: DVector<f64>,
    pub h_basis: DMatrix<f64>,
    pub eta: [DVector<f64>; 3],
    pub g: DMatrix<f64>,
    pub i: [DMatrix<f64>; 3],
}

impl QcStructure {
    pub fn from_hat(frame: &HatFrame) -> Self {
        QcStructure {
            point: frame.point.clone(),
            h_basis: frame.h_basis.clone(),
            eta: frame.jn.clone(),
            g: frame.ghat.clone(),
            i: [1, 2, 3].map(|s| frame.i_matrix(s)),
        }
    }

    pub fn from_calibrated(cf: &CalibratedFrame) -> Self {
        let mut s = Self::from_hat(&cf.base);
        s.eta = cf.base.jn.clone().map(|v| v * cf.f);
        s.g = cf.g.clone();
        s
    }

    /// `(F eta A, F g, I A)` with `eta'_t = F sum_s a_st eta_s`, `I'_t = sum_s a_st I_s`.
    pub fn transformed(&self, factor: f64, a: &Matrix3<f64>) -> Self {
        let mut out = self.clone();
        for t in 0..3 {
            out.eta[t] =
                (0..3).fold(DVector::zeros(self.point.len()), |acc, s| acc + &self.eta[s] * (factor * a[(s, t)]));
            out.i[t] =
                (0..3).fold(DMatrix::zeros(self.g.nrows(), self.g.ncols()), |acc, s| acc + &self.i[s] * a[(s, t)]);
        }
        out.g = &self.g * factor;
        out
    }

    pub fn horizontal_dim(&self) -> usize {
        self.h_basis.ncols()
    }
}

#[derive(Clone, Debug)]
pub struct ConformalPair {
    pub factor: f64,
    pub rotation: Matrix3<f64>,
    pub residual: f64,
}

/// Find `F > 0` and `A` in SO(3) with `eta' = F eta A`, `g' = F g`, `I' = I A`.
pub fn recover_conformal_pair(first: &QcStructure, second: &QcStructure) -> Result<ConformalPair> {
    let dim = first.horizontal_dim();
    let point_gap = (&first.point - &second.point).amax();
    if point_gap > 1e-10 * (1.0 + first.point.amax()) || second.horizontal_dim() != dim {
        return Err(Error::NotSameHorizontal(point_gap));
    }
    // coordinates of the second basis in the first
    let c = first.h_basis.transpose() * &second.h_basis;
    let gap = (c.transpose() * &c - DMatrix::identity(dim, dim)).amax();
    if gap > 1e-10 {
        return Err(Error::NotSameHorizontal(gap));
    }
    let g2 = &c * &second.g * c.transpose();
    let i2: Vec<DMatrix<f64>> = second.i.iter().map(|m| &c * m * c.transpose()).collect();
    let g1_inv = first
        .g
        .clone()
        .cholesky()
        .ok_or(Error::LinearSolveFailure("horizontal metric is not positive definite"))?
        .inverse();
    let n4 = dim as f64;
    let factor = (&g1_inv * &g2).trace() / n4;
    let mut rotation = Matrix3::zeros();
    for s in 0..3 {
        for t in 0..3 {
            rotation[(s, t)] = -(&first.i[s] * &i2[t]).trace() / n4;
        }
    }

    let rebuilt = first.transformed(factor, &rotation);
    let mut residual = (&rebuilt.g - &g2).amax() / first.g.amax().max(f64::MIN_POSITIVE) / factor.abs().max(1.0);
    for ((eta, want_eta), (i, want_i)) in rebuilt.eta.iter().zip(&second.eta).zip(rebuilt.i.iter().zip(&i2)) {
        let eta_scale = want_eta.amax().max(f64::MIN_POSITIVE);
        residual = residual.max((eta - want_eta).amax() / eta_scale);
        residual = residual.max((i - want_i).amax());
    }
    residual = residual.max((rotation.transpose() * rotation - Matrix3::identity()).amax());
    residual = residual.max((rotation.determinant() - 1.0).abs());
    if !(factor > 0.0) || !(residual < CONFORMAL_TOL) {
        return Err(Error::NotConformallyRelated(residual));
    }
    Ok(ConformalPair { factor, rotation, residual })
}
