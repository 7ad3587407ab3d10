//! Calibration factor `mu`, conformal factor `f = mu^{1/(n+2)}`, and the qc-Einstein
//! quantities `g`, `r`, `S`, `xi_s` of the calibrated structure.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::frame::{hat_structure, j_columns, HatFrame};
use crate::linalg::{apply_j_real, j_matrix, pfaffian, CMatrix, QVector};
use crate::surface::{project_to_surface, SurfaceSpec};

/// Relative tolerance of the calibration cross-checks.
pub const CALIBRATION_TOL: f64 = 1e-8;
/// Agreement required between the three Pfaffian ratios.
pub const MU_AXIS_TOL: f64 = 1e-10;
pub const DEFAULT_FD_STEP: f64 = 1e-3;

/// `(j, k)` following `s` cyclically.
fn cyclic(s: usize) -> (usize, usize) {
    match s {
        1 => (2, 3),
        2 => (3, 1),
        _ => (1, 2),
    }
}

/// Basis of `H^{1,0}` for `I_s`: vectors `e - i J_s e` over `h_basis`, kept greedily by
/// complex Gram-Schmidt.
fn complex_basis(frame: &HatFrame, s: usize) -> DMatrix<Complex64> {
    let d = frame.h_basis.nrows();
    let want = frame.h_basis.ncols() / 2;
    let mut kept: Vec<DVector<Complex64>> = Vec::with_capacity(want);
    for col in frame.h_basis.column_iter() {
        if kept.len() == want {
            break;
        }
        let e = col.into_owned();
        let je = apply_j_real(s, &e);
        let z = DVector::from_fn(d, |i, _| Complex64::new(e[i], -je[i]));
        let mut v = z.clone();
        for _ in 0..2 {
            for u in &kept {
                let c = u.dotc(&v);
                v -= u * c;
            }
        }
        let norm = v.norm();
        if norm > 1e-8 * z.norm() {
            kept.push(v.unscale(norm));
        }
    }
    DMatrix::from_columns(&kept)
}

fn complexify(re: &DMatrix<f64>, im: &DMatrix<f64>) -> DMatrix<Complex64> {
    DMatrix::from_fn(re.nrows(), re.ncols(), |i, j| Complex64::new(re[(i, j)], im[(i, j)]))
}

fn to_cmatrix(m: &DMatrix<Complex64>) -> CMatrix {
    CMatrix::from_fn(m.nrows(), |i, j| m[(i, j)])
}

/// Ratio `Pf(Gamma_s) / Pf(gamma_hat_s)` on `H^{1,0}` for axis `s`.
pub fn mu_ratio(frame: &HatFrame, s: usize) -> Result<Complex64> {
    let (j, k) = cyclic(s);
    let slots = frame.n_plus_1;
    let jj = j_matrix(j, slots).transpose();
    let jk = j_matrix(k, slots).transpose();
    let kmat = &frame.ii_ambient;
    let z = complex_basis(frame, s);
    let zt = z.transpose();
    let m_gamma = complexify(&jj, &jk);
    let m_hat = complexify(&(-&jj * kmat), &(-&jk * kmat));
    let p_gamma = &zt * m_gamma * &z;
    let p_hat = &zt * m_hat * &z;
    let pf_gamma = pfaffian(&to_cmatrix(&p_gamma));
    let pf_hat = pfaffian(&to_cmatrix(&p_hat));
    let scale = p_hat.iter().fold(0.0_f64, |m, v| m.max(v.norm())).powi(p_hat.nrows() as i32 / 2);
    if !(pf_hat.norm() > 1e-14 * scale) || !(pf_gamma.norm() > 0.0) {
        return Err(Error::PfaffianSingular);
    }
    Ok(pf_gamma / pf_hat)
}

/// `mu` by Pfaffians for `s = 1`, cross-checked against `s = 2, 3`.
pub fn compute_mu(frame: &HatFrame) -> Result<f64> {
    let ratios = [1, 2, 3].map(|s| mu_ratio(frame, s));
    let mut vals = [Complex64::new(0.0, 0.0); 3];
    for (v, r) in vals.iter_mut().zip(ratios) {
        *v = r?;
    }
    let mu = vals[0];
    if !(mu.re > 0.0) || mu.im.abs() > 1e-8 * mu.re {
        return Err(Error::NonPositiveMu(format!("{} {:+}i", mu.re, mu.im)));
    }
    for v in &vals[1..] {
        if (v - mu).norm() > MU_AXIS_TOL * mu.re {
            return Err(Error::InconsistentCalibration(format!(
                "Pfaffian ratios depend on the axis: {} vs {}",
                mu.re, v.re
            )));
        }
    }
    Ok(mu.re)
}

/// `det(ghat)^{-1/4}` in an orthonormal basis of `H`.
pub fn mu_determinant_oracle(frame: &HatFrame) -> Result<f64> {
    let chol = frame.ghat.clone().cholesky().ok_or(Error::LinearSolveFailure("hat metric is not positive definite"))?;
    let log_det: f64 = chol.l_dirty().diagonal().iter().map(|v| 2.0 * v.ln()).sum();
    Ok((-log_det / 4.0).exp())
}

/// The calibrated qc-Einstein structure at one point.
#[derive(Clone, Debug)]
pub struct CalibratedFrame {
    pub base: HatFrame,
    pub mu: f64,
    pub f: f64,
    /// `f ghat` on `h_basis`.
    pub g: DMatrix<f64>,
    /// Ambient vector in `H`.
    pub r: DVector<f64>,
    pub s_values: [f64; 3],
    pub s_mean: f64,
    pub s_spread: f64,
    pub xi: [DVector<f64>; 3],
    /// Disagreement of the three candidate `r`, relative to `|II|`.
    pub r_residual: f64,
    /// `max |II(J_s N, J_t N)|`, `s != t`, relative to `|II|`.
    pub offdiag: f64,
}

impl CalibratedFrame {
    /// `eta_s(A) = f <J_s N, A>`.
    pub fn eta(&self, s: usize, a: &DVector<f64>) -> f64 {
        self.f * self.base.jn[s - 1].dot(a)
    }

    /// `max |eta_t(xi_s) - delta_ts|`.
    pub fn reeb_residual(&self) -> f64 {
        let mut worst = 0.0_f64;
        for s in 1..=3 {
            for t in 1..=3 {
                let want = if s == t { 1.0 } else { 0.0 };
                worst = worst.max((self.eta(t, &self.xi[s - 1]) - want).abs());
            }
        }
        worst
    }

    /// Horizontal part `A - sum_s eta_s(A) xi_s`.
    pub fn horizontal_part(&self, a: &DVector<f64>) -> DVector<f64> {
        let mut out = a.clone();
        for s in 1..=3 {
            out.axpy(-self.eta(s, a), &self.xi[s - 1], 1.0);
        }
        out
    }

    /// Largest violation over the tangent basis of
    /// `g(A_H, B_H) = -f II(A, B) - (S/2) sum_s eta_s(A) eta_s(B)`, relative to `f |II|`.
    pub fn metric_relation_residual(&self) -> f64 {
        let t = &self.base.tangent_basis;
        let k = &self.base.ii_ambient;
        let cols: Vec<DVector<f64>> = t.column_iter().map(|c| c.into_owned()).collect();
        let horiz: Vec<DVector<f64>> = cols.iter().map(|a| self.horizontal_part(a)).collect();
        let mut worst = 0.0_f64;
        for i in 0..cols.len() {
            for j in 0..cols.len() {
                let lhs = -self.f * horiz[i].dot(&(k * &horiz[j]));
                let reeb: f64 = (1..=3).map(|s| self.eta(s, &cols[i]) * self.eta(s, &cols[j])).sum();
                let rhs = -self.f * cols[i].dot(&(k * &cols[j])) - 0.5 * self.s_mean * reeb;
                worst = worst.max((lhs - rhs).abs());
            }
        }
        worst / (self.f * self.ii_scale())
    }

    pub fn ii_scale(&self) -> f64 {
        self.base.ii.amax().max(f64::MIN_POSITIVE)
    }

    /// `-f II(J_s N, J_s X)`, the predicted `df(X)`.
    pub fn predicted_df(&self, s: usize, x: &DVector<f64>) -> f64 {
        let jx = apply_j_real(s, x);
        -self.f * self.base.second_fundamental(&self.base.jn[s - 1], &jx)
    }
}

pub fn calibrate(frame: HatFrame) -> Result<CalibratedFrame> {
    calibrate_with(frame, CALIBRATION_TOL)
}

pub fn calibrate_with(frame: HatFrame, tol: f64) -> Result<CalibratedFrame> {
    let mu = compute_mu(&frame)?;
    let n = frame.n() as f64;
    let f = mu.powf(1.0 / (n + 2.0));
    let g = &frame.ghat * f;
    let chol = g.clone().cholesky().ok_or(Error::LinearSolveFailure("calibrated metric"))?;
    let k = &frame.ii_ambient;
    let b = &frame.h_basis;
    let ii_scale = frame.ii.amax().max(f64::MIN_POSITIVE);

    // g(r, X) = II(J_s N, J_s X) for each s
    let rhs: Vec<DVector<f64>> = (1..=3).map(|s| j_columns(s, b).transpose() * (k * &frame.jn[s - 1])).collect();
    let coords = chol.solve(&rhs[0]);
    let g_r = &g * &coords;
    let r_residual = rhs[1..].iter().map(|v| (&g_r - v).amax()).fold(0.0, f64::max) / ii_scale;
    if r_residual > tol {
        return Err(Error::InconsistentCalibration(format!(
            "the three determinations of r disagree (relative {r_residual:.3e})"
        )));
    }
    let r = b * &coords;
    let grr = coords.dot(&g_r);

    let mut offdiag = 0.0_f64;
    for s in 0..3 {
        for t in 0..3 {
            if s != t {
                offdiag = offdiag.max(frame.second_fundamental(&frame.jn[s], &frame.jn[t]).abs());
            }
        }
    }
    let offdiag = offdiag / ii_scale;
    if offdiag > tol {
        return Err(Error::InconsistentCalibration(format!(
            "II(J_s N, J_t N) does not vanish for s != t (relative {offdiag:.3e})"
        )));
    }

    let s_values = [0, 1, 2].map(|s| -2.0 * frame.second_fundamental(&frame.jn[s], &frame.jn[s]) / f - 2.0 * grr);
    let s_mean = s_values.iter().sum::<f64>() / 3.0;
    let s_spread = s_values.iter().fold(f64::NEG_INFINITY, |m, &v| m.max(v))
        - s_values.iter().fold(f64::INFINITY, |m, &v| m.min(v));
    if s_spread * f / ii_scale > tol {
        return Err(Error::InconsistentCalibration(format!("S depends on the axis (spread {s_spread:.3e})")));
    }
    let xi = [1, 2, 3].map(|s| &frame.jn[s - 1] / f + apply_j_real(s, &r));
    Ok(CalibratedFrame { base: frame, mu, f, g, r, s_values, s_mean, s_spread, xi, r_residual, offdiag })
}

/// Calibrated frame at a surface point.
pub fn calibrated_frame(spec: &SurfaceSpec, p: &QVector, tol_sp1: f64) -> Result<CalibratedFrame> {
    calibrate(hat_structure(spec, p, tol_sp1)?)
}

/// Conformal factor `f` at a surface point.
pub fn conformal_factor(spec: &SurfaceSpec, p: &QVector, tol_sp1: f64) -> Result<f64> {
    let frame = hat_structure(spec, p, tol_sp1)?;
    let mu = compute_mu(&frame)?;
    Ok(mu.powf(1.0 / (frame.n() as f64 + 2.0)))
}

/// `max |f(p)/ref(p) - c| / c` with `c` the ratio at the first point.
pub fn f_ratio_check(
    spec: &SurfaceSpec,
    points: &[QVector],
    reference: impl Fn(&QVector) -> f64,
    tol_sp1: f64,
) -> Result<f64> {
    let mut c = None;
    let mut worst = 0.0_f64;
    for p in points {
        let ratio = conformal_factor(spec, p, tol_sp1)? / reference(p);
        let c0 = *c.get_or_insert(ratio);
        worst = worst.max((ratio - c0).abs() / c0);
    }
    Ok(worst)
}

fn project_real(spec: &SurfaceSpec, x: &DVector<f64>) -> Result<QVector> {
    project_to_surface(spec, &QVector::from_dvector(x)?)
}

/// Central difference of `phi(pi(p + t X))` at `t = 0` with one Richardson level.
fn richardson<T>(
    spec: &SurfaceSpec,
    p: &DVector<f64>,
    x: &DVector<f64>,
    h: f64,
    phi: impl Fn(&QVector) -> Result<T>,
    combine: impl Fn(&T, &T, f64) -> T,
    extrapolate: impl Fn(&T, &T) -> T,
) -> Result<T> {
    let at = |t: f64| -> Result<T> { phi(&project_real(spec, &(p + x * t))?) };
    let d_h = combine(&at(h)?, &at(-h)?, 2.0 * h);
    let d_h2 = combine(&at(h / 2.0)?, &at(-h / 2.0)?, h);
    Ok(extrapolate(&d_h2, &d_h))
}

/// `df(X)` at `p` by finite differences of `f` along the projected curve `p + t X`.
pub fn df_along(spec: &SurfaceSpec, p: &QVector, x: &DVector<f64>, h: f64, tol_sp1: f64) -> Result<f64> {
    if !(1e-4..=1e-2).contains(&h) {
        return Err(Error::InvalidArgument(format!("finite-difference step {h} outside [1e-4, 1e-2]")));
    }
    richardson(
        spec,
        &p.to_dvector(),
        x,
        h,
        |q| conformal_factor(spec, q, tol_sp1),
        |a, b, w| (a - b) / w,
        |fine, coarse| (4.0 * fine - coarse) / 3.0,
    )
}

/// Finite-difference exterior derivative of the 1-form `A -> w <J_s N, A>` on the surface,
/// where `w = f` (calibrated) or `1` (hat), evaluated on `(a, b)` at `p`.
#[allow(clippy::too_many_arguments)]
pub fn d_eta_fd(
    spec: &SurfaceSpec,
    p: &QVector,
    s: usize,
    a: &DVector<f64>,
    b: &DVector<f64>,
    calibrated: bool,
    h: f64,
    tol_sp1: f64,
) -> Result<f64> {
    let theta = |q: &QVector| -> Result<DVector<f64>> {
        let frame = hat_structure(spec, q, tol_sp1)?;
        let w = if calibrated { compute_mu(&frame)?.powf(1.0 / (frame.n() as f64 + 2.0)) } else { 1.0 };
        Ok(&frame.jn[s - 1] * w)
    };
    let pd = p.to_dvector();
    let diff = |dir: &DVector<f64>| {
        richardson(spec, &pd, dir, h, theta, |u, v, w| (u - v) / w, |fine, coarse| (fine * 4.0 - coarse) / 3.0)
    };
    Ok(diff(a)?.dot(b) - diff(b)?.dot(a))
}
