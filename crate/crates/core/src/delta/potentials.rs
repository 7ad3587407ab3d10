//! The degenerate-case potentials: `f l_0` is constant and `f^2 h` is affine in `t_0..t_3`.

use nalgebra::{DMatrix, DVector};

use super::fit::QuadricFit;
use crate::calibration::CalibratedFrame;
use crate::error::{Error, Result};
use crate::linalg::{apply_j_real, sym_eigen};

#[derive(Clone, Debug)]
pub struct HeisenbergInvariants {
    /// Unit vector spanning `ker Delta` together with `J_s v0`.
    pub v0: DVector<f64>,
    /// `(max - min) / |mean|` of `f l_0` over the sample.
    pub fl0_dev: f64,
    pub fl0_mean: f64,
    /// `max |f^2 h - c - sum c_m t_m| / (1 + max |f^2 h|)` for the least-squares fit.
    pub potential_fit_residual: f64,
    pub potential_coefficients: DVector<f64>,
}

/// `l_0 = <v0, N>`, `h = <Delta' N, N>` and `t_m = <J_m v0, p>` over calibrated frames.
pub fn heisenberg_invariants(
    frames: &[CalibratedFrame],
    delta: &DMatrix<f64>,
    fit: &QuadricFit,
    eps_rank: f64,
) -> Result<HeisenbergInvariants> {
    let eig = sym_eigen(delta)?;
    let scale = eig.max_abs().max(f64::MIN_POSITIVE);
    let d = delta.nrows();
    let kernel: Vec<usize> = (0..d).filter(|&i| eig.values[i].abs() < eps_rank * scale).collect();
    if kernel.len() != 4 {
        return Err(Error::NotDegenerate);
    }
    let mut pinv = DMatrix::zeros(d, d);
    for i in 0..d {
        if !kernel.contains(&i) {
            let v = eig.vectors.column(i);
            pinv += v * v.transpose() / eig.values[i];
        }
    }
    let mut b_k = DVector::zeros(d);
    for &i in &kernel {
        let v = eig.vectors.column(i);
        b_k += v * v.dot(&fit.b);
    }
    let bn = b_k.norm();
    if !(bn > 1e-8 * (1.0 + fit.b.amax())) {
        return Err(Error::DegenerateLinearPart);
    }
    let v0 = b_k / bn;
    let dirs: Vec<DVector<f64>> = std::iter::once(v0.clone()).chain((1..=3).map(|s| apply_j_real(s, &v0))).collect();

    let fl0: Vec<f64> = frames.iter().map(|cf| cf.f * v0.dot(&cf.base.normal)).collect();
    let mean = fl0.iter().sum::<f64>() / fl0.len() as f64;
    let spread =
        fl0.iter().fold(f64::NEG_INFINITY, |m, &v| m.max(v)) - fl0.iter().fold(f64::INFINITY, |m, &v| m.min(v));
    let fl0_dev = spread / mean.abs().max(f64::MIN_POSITIVE);

    let f2h: Vec<f64> = frames.iter().map(|cf| cf.f * cf.f * cf.base.normal.dot(&(&pinv * &cf.base.normal))).collect();
    let design =
        DMatrix::from_fn(frames.len(), 5, |i, j| if j == 0 { 1.0 } else { dirs[j - 1].dot(&frames[i].base.point) });
    let rhs = DVector::from_column_slice(&f2h);
    let coeffs = design.clone().svd(true, true).solve(&rhs, 1e-12).map_err(|_| Error::RankDeficientFit)?;
    let fitted = &design * &coeffs;
    let max_f2h = f2h.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let potential_fit_residual = (fitted - rhs).amax() / (1.0 + max_f2h);
    Ok(HeisenbergInvariants { v0, fl0_dev, fl0_mean: mean, potential_fit_residual, potential_coefficients: coeffs })
}
