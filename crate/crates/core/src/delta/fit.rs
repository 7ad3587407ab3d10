use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg::QVector;

/// Least-squares solution of `<Delta x, x> + <b, x> + c = 0` over the sample.
#[derive(Clone, Debug)]
pub struct QuadricFit {
    pub b: DVector<f64>,
    pub c: f64,
    /// `max |<Delta x, x> + <b, x> + c|` over the sample.
    pub residual: f64,
    /// `residual / (1 + |Delta| max |x|^2)`.
    pub relative_residual: f64,
}

pub const FIT_TOL: f64 = 1e-6;

pub fn fit_quadric(delta: &DMatrix<f64>, points: &[QVector]) -> Result<QuadricFit> {
    let d = delta.nrows();
    if points.len() < d + 2 {
        return Err(Error::InvalidArgument(format!(
            "quadric fit needs at least {} points, got {}",
            d + 2,
            points.len()
        )));
    }
    let xs: Vec<DVector<f64>> = points.iter().map(QVector::to_dvector).collect();
    let design = DMatrix::from_fn(xs.len(), d + 1, |i, j| if j < d { xs[i][j] } else { 1.0 });
    let rhs = DVector::from_iterator(xs.len(), xs.iter().map(|x| -x.dot(&(delta * x))));
    let svd = design.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    if !(smin > 1e-10 * smax) {
        return Err(Error::RankDeficientFit);
    }
    let sol = svd.solve(&rhs, 0.0).map_err(|_| Error::RankDeficientFit)?;
    let b = sol.rows(0, d).into_owned();
    let c = sol[d];
    let residual = xs.iter().map(|x| (x.dot(&(delta * x)) + b.dot(x) + c).abs()).fold(0.0, f64::max);
    let max_x2 = xs.iter().map(|x| x.norm_squared()).fold(0.0, f64::max);
    let relative_residual = residual / (1.0 + delta.amax() * max_x2);
    if !(relative_residual < FIT_TOL) {
        return Err(Error::FitResidual(relative_residual));
    }
    Ok(QuadricFit { b, c, residual, relative_residual })
}
