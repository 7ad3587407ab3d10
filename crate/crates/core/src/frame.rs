//! The hat qc-structure induced on a hypersurface `rho = 0` from the 2-jet of `rho`.
//!
//! Ambient vectors are real `DVector`s in the `c[4a + m]` layout shared with [`QVector`].

use std::fmt;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg::{apply_j_real, sym_eigen, QVector};
use crate::surface::{Jet2, SurfaceSpec};

pub const DEFAULT_TOL_SP1: f64 = 1e-8;
const GRAD_FLOOR: f64 = 1e-12;
const GS_DROP: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Definiteness {
    NegativeDefinite,
    /// Positive definite for the gradient orientation; the normal gets flipped.
    PositiveDefinite,
    Indefinite,
    Degenerate,
}

impl fmt::Display for Definiteness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Definiteness::NegativeDefinite => "negative definite",
            Definiteness::PositiveDefinite => "positive definite (pre-flip)",
            Definiteness::Indefinite => "indefinite",
            Definiteness::Degenerate => "degenerate",
        };
        f.write_str(s)
    }
}

/// Outcome of the qc-hypersurface test at one point.
#[derive(Clone, Debug, PartialEq)]
pub struct QcDiagnostics {
    pub definiteness: Definiteness,
    /// `max |II(J_s X, J_s Y) - II(X, Y)|` over horizontal basis pairs, relative to `|II|_H|`.
    pub sp1_residual: f64,
    pub min_abs_eigenvalue: f64,
    pub max_abs_eigenvalue: f64,
    pub tol: f64,
}

impl QcDiagnostics {
    pub fn passed(&self) -> bool {
        matches!(self.definiteness, Definiteness::NegativeDefinite | Definiteness::PositiveDefinite)
            && self.sp1_residual < self.tol
    }
}

impl fmt::Display for QcDiagnostics {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "II on H is {}, sp1 residual {:.3e} (tol {:.1e}), |eigenvalues| in [{:.3e}, {:.3e}]",
            self.definiteness, self.sp1_residual, self.tol, self.min_abs_eigenvalue, self.max_abs_eigenvalue
        )
    }
}

/// Per-point data of the induced structure.
#[derive(Clone, Debug)]
pub struct HatFrame {
    pub point: DVector<f64>,
    pub n_plus_1: usize,
    pub normal: DVector<f64>,
    /// `J_s N` for s = 1, 2, 3; `eta_hat_s(A) = <J_s N, A>`.
    pub jn: [DVector<f64>; 3],
    /// Columns: orthonormal basis of `H`.
    pub h_basis: DMatrix<f64>,
    /// Columns: `J_1 N, J_2 N, J_3 N`, then `h_basis`.
    pub tangent_basis: DMatrix<f64>,
    /// Ambient matrix of the second fundamental form; `II(A, B) = A^T K B` for tangent `A, B`.
    pub ii_ambient: DMatrix<f64>,
    /// II on `tangent_basis`.
    pub ii: DMatrix<f64>,
    /// `-II` on `h_basis`.
    pub ghat: DMatrix<f64>,
    pub rhat: [DVector<f64>; 3],
    /// `alpha_hat_s(e_a) = II(J_s N, e_a)` on `h_basis`.
    pub alpha_hat: [DVector<f64>; 3],
    pub grad_norm: f64,
    pub diagnostics: QcDiagnostics,
}

impl HatFrame {
    /// `n`, where `H` has real dimension `4n`.
    pub fn n(&self) -> usize {
        self.n_plus_1 - 1
    }

    pub fn point_q(&self) -> QVector {
        QVector::from_dvector(&self.point).expect("length is a multiple of 4")
    }

    pub fn second_fundamental(&self, a: &DVector<f64>, b: &DVector<f64>) -> f64 {
        a.dot(&(&self.ii_ambient * b))
    }

    /// `I_s` on `H` in `h_basis` coordinates.
    pub fn i_matrix(&self, s: usize) -> DMatrix<f64> {
        let jb = j_columns(s, &self.h_basis);
        self.h_basis.transpose() * jb
    }

    /// Largest component of `J_s X` along `N` or `J_t N` over `X` in `h_basis`.
    pub fn h_j_residual(&self) -> f64 {
        let mut worst = 0.0_f64;
        for s in 1..=3 {
            let jb = j_columns(s, &self.h_basis);
            worst = worst.max((jb.transpose() * &self.normal).amax());
            for jn in &self.jn {
                worst = worst.max((jb.transpose() * jn).amax());
            }
        }
        worst
    }
}

pub(crate) fn j_columns(s: usize, m: &DMatrix<f64>) -> DMatrix<f64> {
    let mut out = m.clone();
    for (c, col) in m.column_iter().enumerate() {
        out.set_column(c, &apply_j_real(s, &col.into_owned()));
    }
    out
}

/// Orthonormal basis of the complement of `{N, J_1 N, J_2 N, J_3 N}`, by modified Gram-Schmidt
/// over the coordinate directions in index order.
pub fn horizontal_basis(normal: &DVector<f64>) -> DMatrix<f64> {
    let d = normal.len();
    let mut q: Vec<DVector<f64>> = vec![normal.clone()];
    for s in 1..=3 {
        q.push(apply_j_real(s, normal));
    }
    let target = d;
    for i in 0..d {
        if q.len() == target {
            break;
        }
        let mut v = DVector::zeros(d);
        v[i] = 1.0;
        for _ in 0..2 {
            for u in &q {
                let c = u.dot(&v);
                v.axpy(-c, u, 1.0);
            }
        }
        let norm = v.norm();
        if norm > GS_DROP {
            q.push(v / norm);
        }
    }
    DMatrix::from_columns(&q[4..])
}

fn gradient_normal(jet: &Jet2) -> Result<(DVector<f64>, f64)> {
    let gn = jet.grad.norm();
    if !(gn > GRAD_FLOOR) {
        return Err(Error::VanishingGradient(gn));
    }
    Ok((&jet.grad / gn, gn))
}

/// Orientation-independent part of the frame.
struct Shape {
    normal: DVector<f64>,
    k: DMatrix<f64>,
    h_basis: DMatrix<f64>,
    grad_norm: f64,
    diagnostics: QcDiagnostics,
}

fn shape(jet: &Jet2, tol: f64) -> Result<Shape> {
    let (mut normal, grad_norm) = gradient_normal(jet)?;
    let mut k = &jet.hess * (-1.0 / grad_norm);
    let h_basis = horizontal_basis(&normal);
    let ii_h = h_basis.transpose() * &k * &h_basis;
    let eig = sym_eigen(&(&ii_h + ii_h.transpose()).scale(0.5))?;
    let max_abs = eig.max_abs();
    let min_abs = eig.values.iter().fold(f64::INFINITY, |m, v| m.min(v.abs()));
    let lo = eig.values[0];
    let hi = eig.values[eig.values.len() - 1];
    let floor = 1e-12 * max_abs.max(f64::MIN_POSITIVE);
    let definiteness = if max_abs == 0.0 || min_abs <= floor {
        Definiteness::Degenerate
    } else if hi < 0.0 {
        Definiteness::NegativeDefinite
    } else if lo > 0.0 {
        Definiteness::PositiveDefinite
    } else {
        Definiteness::Indefinite
    };
    if definiteness == Definiteness::PositiveDefinite {
        normal = -normal;
        k = -k;
    }
    let mut sp1 = 0.0_f64;
    for s in 1..=3 {
        let jb = j_columns(s, &h_basis);
        let turned = jb.transpose() * &k * &jb;
        let base = h_basis.transpose() * &k * &h_basis;
        sp1 = sp1.max((turned - base).amax());
    }
    let sp1_residual = if max_abs > 0.0 { sp1 / max_abs } else { f64::INFINITY };
    let diagnostics =
        QcDiagnostics { definiteness, sp1_residual, min_abs_eigenvalue: min_abs, max_abs_eigenvalue: max_abs, tol };
    Ok(Shape { normal, k, h_basis, grad_norm, diagnostics })
}

/// Unit normal, oriented so that II is negative definite on `H` whenever II on `H` is definite.
pub fn unit_normal(jet: &Jet2) -> Result<DVector<f64>> {
    Ok(shape(jet, DEFAULT_TOL_SP1)?.normal)
}

/// `II(A, B) = -sigma Hess rho(A, B) / |grad rho|` where `N = sigma grad / |grad|`.
pub fn second_fundamental(jet: &Jet2, normal: &DVector<f64>, a: &DVector<f64>, b: &DVector<f64>) -> Result<f64> {
    let (grad_unit, gn) = gradient_normal(jet)?;
    for v in [a, b] {
        let off = normal.dot(v).abs();
        if off > 1e-10 * v.norm().max(1.0) {
            return Err(Error::NotTangent(off));
        }
    }
    let sigma = grad_unit.dot(normal).signum();
    Ok(-sigma * a.dot(&(&jet.hess * b)) / gn)
}

/// Definiteness and Sp(1)-invariance of II on `H`.
pub fn check_qc(jet: &Jet2, tol: f64) -> Result<QcDiagnostics> {
    Ok(shape(jet, tol)?.diagnostics)
}

/// Induced hat structure at `p`, which must lie on the surface.
pub fn hat_structure(spec: &SurfaceSpec, p: &QVector, tol_sp1: f64) -> Result<HatFrame> {
    let jet = spec.jet(p)?;
    let scale = 1.0 + jet.grad.norm() * p.norm();
    if jet.value.abs() > 1e-10 * scale {
        return Err(Error::InvalidArgument(format!("point is off the surface (rho = {:e})", jet.value)));
    }
    frame_from_jet(p.to_dvector(), &jet, tol_sp1)
}

pub(crate) fn frame_from_jet(point: DVector<f64>, jet: &Jet2, tol_sp1: f64) -> Result<HatFrame> {
    let sh = shape(jet, tol_sp1)?;
    if !sh.diagnostics.passed() {
        return Err(Error::NotQcHypersurface(Box::new(sh.diagnostics)));
    }
    let n_plus_1 = point.len() / 4;
    let jn = [1, 2, 3].map(|s| apply_j_real(s, &sh.normal));
    let mut cols: Vec<DVector<f64>> = jn.to_vec();
    cols.extend(sh.h_basis.column_iter().map(|c| c.into_owned()));
    let tangent_basis = DMatrix::from_columns(&cols);
    let ii = tangent_basis.transpose() * &sh.k * &tangent_basis;
    let ii = (&ii + ii.transpose()).scale(0.5);
    let ghat = -(sh.h_basis.transpose() * &sh.k * &sh.h_basis);
    let ghat = (&ghat + ghat.transpose()).scale(0.5);
    let chol = ghat.clone().cholesky().ok_or(Error::LinearSolveFailure("hat metric is not positive definite"))?;
    let alpha_hat = jn.clone().map(|v| sh.h_basis.transpose() * (&sh.k * v));
    let rhat = alpha_hat.clone().map(|a| &sh.h_basis * chol.solve(&(a * 0.5)));
    Ok(HatFrame {
        point,
        n_plus_1,
        normal: sh.normal,
        jn,
        h_basis: sh.h_basis,
        tangent_basis,
        ii_ambient: sh.k,
        ii,
        ghat,
        rhat,
        alpha_hat,
        grad_norm: sh.grad_norm,
        diagnostics: sh.diagnostics,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::surface::{parse_surface, sample_points};

    fn spec(text: &str) -> SurfaceSpec {
        parse_surface(text).unwrap()
    }

    fn unit(i: usize, d: usize) -> DVector<f64> {
        let mut v = DVector::zeros(d);
        v[i] = 1.0;
        v
    }

    fn qv(c: &[f64]) -> QVector {
        QVector::from_reals(c).unwrap()
    }

    const SPHERE: &str = "dim = 2\nrho = normq(0) + normq(1) - 1";
    const HEIS: &str = "dim = 2\nrho = normq(0) + re(1)";

    #[test]
    fn sphere_normal_and_ii() {
        let s = spec(SPHERE);
        let p = qv(&[0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0]);
        let jet = s.jet(&p).unwrap();
        let n = unit_normal(&jet).unwrap();
        assert_eq!(n, unit(4, 8));
        let a = unit(0, 8);
        assert_eq!(second_fundamental(&jet, &n, &a, &a).unwrap(), -1.0);
        assert!(matches!(second_fundamental(&jet, &n, &n, &a), Err(Error::NotTangent(_))));
    }

    #[test]
    fn heisenberg_origin() {
        let s = spec(HEIS);
        let jet = s.jet(&QVector::zeros(2)).unwrap();
        let n = unit_normal(&jet).unwrap();
        assert_eq!(n, unit(4, 8));
        let t0 = unit(0, 8);
        assert_eq!(second_fundamental(&jet, &n, &t0, &t0).unwrap(), -2.0);
        let x1 = unit(5, 8);
        assert_eq!(second_fundamental(&jet, &n, &x1, &x1).unwrap(), 0.0);

        let f = hat_structure(&s, &QVector::zeros(2), DEFAULT_TOL_SP1).unwrap();
        assert_eq!(f.jn[0], -unit(5, 8));
        for s in 0..3 {
            assert!(f.rhat[s].norm() < 1e-15);
            assert!(f.alpha_hat[s].amax() < 1e-15);
        }
    }

    #[test]
    fn negated_rho_same_normal() {
        let a = spec(HEIS);
        let b = spec("dim = 2\nrho = -(normq(0) + re(1))");
        let p = qv(&[0.3, -0.1, 0.2, 0.5, -0.39, 0.4, 0.0, 1.0]);
        let na = unit_normal(&a.jet(&p).unwrap()).unwrap();
        let nb = unit_normal(&b.jet(&p).unwrap()).unwrap();
        assert!((na - nb).norm() < 1e-15);
        assert_eq!(check_qc(&b.jet(&p).unwrap(), 1e-8).unwrap().definiteness, Definiteness::PositiveDefinite);
    }

    #[test]
    fn sphere_and_heisenberg_pass() {
        for (text, tol) in [(SPHERE, 1e-12), (HEIS, 1e-8)] {
            let s = spec(text);
            for p in sample_points(&s, 10, 4).unwrap() {
                let d = check_qc(&s.jet(&p).unwrap(), 1e-8).unwrap();
                assert!(d.passed());
                assert!(d.sp1_residual < tol, "{}", d.sp1_residual);
            }
        }
    }

    #[test]
    fn skewed_ellipsoid_rejected() {
        let s = spec("dim = 2\nrho = 4*re(0)^2 + imi(0)^2 + imj(0)^2 + imk(0)^2 + normq(1) - 1");
        for p in sample_points(&s, 10, 8).unwrap() {
            let d = check_qc(&s.jet(&p).unwrap(), 1e-8).unwrap();
            assert!(d.sp1_residual > 0.01, "{}", d.sp1_residual);
            assert!(matches!(hat_structure(&s, &p, 1e-8), Err(Error::NotQcHypersurface(_))));
        }
    }

    #[test]
    fn indefinite_rejected() {
        let s = spec("dim = 3\nrho = normq(0) - normq(1) + re(2)");
        let d = check_qc(&s.jet(&QVector::zeros(3)).unwrap(), 1e-8).unwrap();
        assert_eq!(d.definiteness, Definiteness::Indefinite);
        assert!(!d.passed());
    }

    #[test]
    fn frame_invariants() {
        let s = spec("dim = 3\nrho = normq(0) + normq(1) - normq(2) + 1");
        for p in sample_points(&s, 6, 2).unwrap() {
            let f = hat_structure(&s, &p, DEFAULT_TOL_SP1).unwrap();
            let d = 4 * f.n_plus_1;
            assert_eq!(f.h_basis.ncols(), d - 4);
            assert_eq!(f.tangent_basis.ncols(), d - 1);
            assert!((f.tangent_basis.transpose() * &f.normal).amax() < 1e-12);
            let gram = f.tangent_basis.transpose() * &f.tangent_basis;
            assert!((gram - DMatrix::identity(d - 1, d - 1)).amax() < 1e-12);
            assert!(f.h_j_residual() < 1e-12);
            for s in 0..3 {
                for t in 0..3 {
                    let want = if s == t { 1.0 } else { 0.0 };
                    assert!((f.jn[s].dot(&f.jn[t]) - want).abs() < 1e-15);
                }
            }
            assert!(f.ghat.clone().cholesky().is_some());
            for s in 1..=3 {
                let i = f.i_matrix(s);
                let turned = i.transpose() * &f.ghat * &i;
                assert!((turned - &f.ghat).amax() < 1e-10 * f.ghat.amax());
            }
            // 2 II(rhat_i, X) = -II(J_i N, X)
            for s in 0..3 {
                for c in 0..f.h_basis.ncols() {
                    let x = f.h_basis.column(c).into_owned();
                    let lhs = 2.0 * f.second_fundamental(&f.rhat[s], &x);
                    let rhs = -f.second_fundamental(&f.jn[s], &x);
                    assert!((lhs - rhs).abs() < 1e-10);
                }
            }
        }
    }
}
