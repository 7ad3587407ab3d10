use rayon::prelude::*;

use super::fit::{fit_quadric, QuadricFit};
use super::normalize::{normalizer_for, Label, NormalizeInput};
use super::{delta_constancy, signature, DeltaForm, DEFAULT_EPS_RANK, DEFAULT_TOL_CONST};
use crate::calibration::{calibrate, CalibratedFrame};
use crate::error::{Error, Result};
use crate::frame::{hat_structure, DEFAULT_TOL_SP1};
use crate::linalg::{congruence_diagonalize, AffineMap, Congruence, Inertia, QVector};
use crate::surface::{sample_points, SurfaceSpec};

#[derive(Clone, Copy, Debug)]
pub struct ClassifyOptions {
    pub samples: usize,
    pub rng_seed: u64,
    pub tol_sp1: f64,
    pub tol_const: f64,
    pub eps_rank: f64,
}

impl Default for ClassifyOptions {
    fn default() -> Self {
        ClassifyOptions {
            samples: 32,
            rng_seed: 1,
            tol_sp1: DEFAULT_TOL_SP1,
            tol_const: DEFAULT_TOL_CONST,
            eps_rank: DEFAULT_EPS_RANK,
        }
    }
}

/// Sample, frames and the averaged `Delta`.
#[derive(Clone, Debug)]
pub struct Analysis {
    pub points: Vec<QVector>,
    pub frames: Vec<CalibratedFrame>,
    pub delta: DeltaForm,
}

/// Calibrated frames at `points`, in order; the first failure wins.
pub fn calibrated_frames(spec: &SurfaceSpec, points: &[QVector], tol_sp1: f64) -> Result<Vec<CalibratedFrame>> {
    points.par_iter().map(|p| calibrate(hat_structure(spec, p, tol_sp1)?)).collect::<Vec<_>>().into_iter().collect()
}

pub fn analyze(spec: &SurfaceSpec, opts: &ClassifyOptions) -> Result<Analysis> {
    let points = sample_points(spec, opts.samples, opts.rng_seed)?;
    let frames = calibrated_frames(spec, &points, opts.tol_sp1)?;
    let delta = delta_constancy(&frames, opts.tol_const)?;
    Ok(Analysis { points, frames, delta })
}

#[derive(Clone, Debug)]
pub struct Classification {
    pub label: Label,
    pub inertia: Inertia,
    pub normalizer: AffineMap,
    /// `max |model(F x)| / (1 + |F x|^2)` over the sample.
    pub residual: f64,
    pub fit: QuadricFit,
    pub congruence: Congruence,
}

pub const NORMALIZE_TOL: f64 = 1e-6;

impl Analysis {
    pub fn classify(&self, eps_rank: f64) -> Result<Classification> {
        let n = self.points[0].slots() - 1;
        let herm = self.delta.hermitian()?;
        let inertia = signature(&self.delta.matrix, eps_rank)?;
        let congruence = congruence_diagonalize(&herm, eps_rank);
        if congruence.inertia != inertia {
            return Err(Error::InconsistentClassification(format!(
                "eigenvalue inertia {inertia} differs from congruence inertia {}",
                congruence.inertia
            )));
        }
        let normalizer = normalizer_for(inertia, n).ok_or_else(|| {
            Error::InconsistentClassification(format!("inertia {inertia} matches no model hyperquadric"))
        })?;
        let fit = fit_quadric(&self.delta.matrix, &self.points)?;
        let input = NormalizeInput { delta: &self.delta.matrix, congruence: &congruence, fit: &fit };
        let map = normalizer.normalize(&input)?;
        let residual = normalizer.residual(&map, &self.points);
        if !(residual < NORMALIZE_TOL) {
            return Err(Error::FitResidual(residual));
        }
        Ok(Classification { label: normalizer.label(), inertia, normalizer: map, residual, fit, congruence })
    }
}

/// Sample, calibrate, assemble `Delta`, and reduce to a model hyperquadric.
pub fn classify(spec: &SurfaceSpec, opts: &ClassifyOptions) -> Result<Classification> {
    analyze(spec, opts)?.classify(opts.eps_rank)
}
