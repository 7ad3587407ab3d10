//! The parallel form `Delta`, its quaternionic inertia, the quadric fit and the classification
//! into the three model hyperquadrics.

mod classify;
mod fit;
mod normalize;
mod potentials;

pub use classify::{analyze, calibrated_frames, classify, Analysis, Classification, ClassifyOptions};
pub use fit::{fit_quadric, QuadricFit};
pub use normalize::{normalizer_for, normalizers, Label, NormalizeInput, Normalizer};
pub use potentials::{heisenberg_invariants, HeisenbergInvariants};

use nalgebra::DMatrix;

use crate::calibration::CalibratedFrame;
use crate::error::{Error, Result};
use crate::linalg::{j_commutator_residual, sym_eigen, Inertia, QHermitian, QMatrix};

pub const DEFAULT_TOL_CONST: f64 = 1e-6;
pub const DEFAULT_EPS_RANK: f64 = 1e-8;
pub const J_INVARIANCE_TOL: f64 = 1e-8;
pub const QUADRUPLE_TOL: f64 = 1e-8;

/// `Delta(v, w) = -f II(v', w') + (S/2) lambda(v) lambda(w)` on the ambient space, with
/// `lambda(v) = f <N, v>`, `xi = N/f + r` and `v' = v - lambda(v) xi`.
pub fn assemble_delta(cf: &CalibratedFrame) -> Result<DMatrix<f64>> {
    let n = &cf.base.normal;
    let d = n.len();
    let xi = n / cf.f + &cf.r;
    let p = DMatrix::identity(d, d) - (&xi * n.transpose()) * cf.f;
    let off = (n.transpose() * &p).amax();
    if off > 1e-10 {
        return Err(Error::ProjectionNotTangent(off));
    }
    let k = &cf.base.ii_ambient;
    let delta = -(p.transpose() * k * &p) * cf.f + (n * n.transpose()) * (0.5 * cf.s_mean * cf.f * cf.f);
    Ok((&delta + delta.transpose()) * 0.5)
}

/// `Delta` averaged over a sample, with its spread and J-invariance.
#[derive(Clone, Debug)]
pub struct DeltaForm {
    pub matrix: DMatrix<f64>,
    /// Largest entrywise deviation from the mean, relative to the largest mean entry.
    pub constancy_dev: f64,
    pub j_residual: f64,
}

impl DeltaForm {
    /// The form as a quaternionic Hermitian matrix.
    pub fn hermitian(&self) -> Result<QHermitian> {
        if self.j_residual > J_INVARIANCE_TOL {
            return Err(Error::NotJInvariant(self.j_residual));
        }
        Ok(QHermitian::from_matrix(QMatrix::from_real(&self.matrix)?))
    }
}

/// Mean and spread of pointwise `Delta` matrices; fails with `NotParallel` above `tol`.
pub fn delta_constancy_matrices(mats: &[DMatrix<f64>], tol: f64) -> Result<DeltaForm> {
    if mats.len() < 2 {
        return Err(Error::InvalidArgument("constancy needs at least two points".into()));
    }
    let mut mean = DMatrix::zeros(mats[0].nrows(), mats[0].ncols());
    for m in mats {
        mean += m;
    }
    mean /= mats.len() as f64;
    let scale = mean.amax().max(f64::MIN_POSITIVE);
    let constancy_dev = mats.iter().map(|m| (m - &mean).amax()).fold(0.0, f64::max) / scale;
    if !(constancy_dev < tol) {
        return Err(Error::NotParallel(constancy_dev));
    }
    let j_residual = j_commutator_residual(&mean);
    Ok(DeltaForm { matrix: mean, constancy_dev, j_residual })
}

/// `Delta` at each calibrated frame, then [`delta_constancy_matrices`].
pub fn delta_constancy(frames: &[CalibratedFrame], tol: f64) -> Result<DeltaForm> {
    let mats = frames.iter().map(assemble_delta).collect::<Result<Vec<_>>>()?;
    delta_constancy_matrices(&mats, tol)
}

/// Inertia counted in eigenvalue quadruples.
pub fn signature(delta: &DMatrix<f64>, eps_rank: f64) -> Result<Inertia> {
    let eig = sym_eigen(delta)?;
    let scale = eig.max_abs().max(f64::MIN_POSITIVE);
    let mut inertia = Inertia::new(0, 0, 0);
    let mut spread = 0.0_f64;
    for quad in eig.values.as_slice().chunks(4) {
        if quad.len() != 4 {
            return Err(Error::QuadrupleViolation(f64::INFINITY));
        }
        spread = spread.max((quad[3] - quad[0]) / scale);
        let mid = quad.iter().sum::<f64>() / 4.0;
        if mid.abs() < eps_rank * scale {
            inertia.zero += 1;
        } else if mid > 0.0 {
            inertia.positive += 1;
        } else {
            inertia.negative += 1;
        }
    }
    if spread > QUADRUPLE_TOL {
        return Err(Error::QuadrupleViolation(spread));
    }
    Ok(inertia)
}
