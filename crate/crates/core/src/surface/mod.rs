//! Defining functions: expression language, 2-jets and sampling of the zero level set.

mod expr;
mod jet;
mod parser;
mod poly;
mod sampling;

pub use expr::{BinOp, Component, Expr, Ring};
pub use jet::{jet_at, Jet2};
pub use parser::{parse_expr, parse_surface, ParseError, ParseErrorKind};
pub use poly::Poly;
pub use sampling::{project_to_surface, sample_points};

use crate::error::{Error, Result};
use crate::linalg::{AffineMap, QVector};

pub const DEFAULT_BOX_HALFWIDTH: f64 = 2.0;

/// A hypersurface `rho = 0` in `H^{n+1}`.
#[derive(Clone, Debug, PartialEq)]
pub struct SurfaceSpec {
    pub n_plus_1: usize,
    pub rho: Expr,
    pub box_center: Option<QVector>,
    pub box_halfwidth: Option<f64>,
}

impl SurfaceSpec {
    pub fn new(n_plus_1: usize, rho: Expr) -> Result<Self> {
        if n_plus_1 < 2 {
            return Err(Error::InvalidArgument(format!("dim must be at least 2, got {n_plus_1}")));
        }
        if let Some(a) = rho.max_slot() {
            if a >= n_plus_1 {
                return Err(Error::InvalidArgument(format!("slot {a} out of range for dim = {n_plus_1}")));
            }
        }
        Ok(SurfaceSpec { n_plus_1, rho, box_center: None, box_halfwidth: None })
    }

    /// `n` = slots - 1; the horizontal space has real dimension `4n`.
    pub fn n(&self) -> usize {
        self.n_plus_1 - 1
    }

    pub fn real_dim(&self) -> usize {
        4 * self.n_plus_1
    }

    pub fn box_center(&self) -> QVector {
        self.box_center.clone().unwrap_or_else(|| QVector::zeros(self.n_plus_1))
    }

    pub fn box_halfwidth(&self) -> f64 {
        self.box_halfwidth.unwrap_or(DEFAULT_BOX_HALFWIDTH)
    }

    fn check(&self, p: &QVector) -> Result<()> {
        if p.slots() != self.n_plus_1 {
            return Err(Error::DimensionMismatch { expected: self.n_plus_1, found: p.slots() });
        }
        Ok(())
    }

    pub fn eval(&self, p: &QVector) -> Result<f64> {
        self.check(p)?;
        self.rho.eval(&p.to_reals())
    }

    /// Value, gradient and Hessian of `rho` at `p`.
    pub fn jet(&self, p: &QVector) -> Result<Jet2> {
        self.check(p)?;
        jet_at(&self.rho, &p.to_reals())
    }

    pub(crate) fn jet_real(&self, x: &[f64]) -> Result<Jet2> {
        jet_at(&self.rho, x)
    }

    /// The image surface `F(M)`, defined by the expanded polynomial `rho o F^{-1}`.
    /// The sampling box is moved to `F(center)` with half-width scaled by the operator norm of `A`.
    pub fn affine_image(&self, f: &AffineMap) -> Result<SurfaceSpec> {
        let inv = f.inverse()?;
        let (r, t) = inv.to_real();
        let rho = Poly::substitute_affine(&self.rho, &r, &t)?.to_expr();
        let (fr, _) = f.to_real();
        let scale = fr.singular_values().max();
        Ok(SurfaceSpec {
            n_plus_1: self.n_plus_1,
            rho,
            box_center: Some(f.apply(&self.box_center())),
            box_halfwidth: Some(self.box_halfwidth() * scale),
        })
    }

    /// Text in the surface file format; parses back to an identical spec.
    pub fn to_file_text(&self) -> String {
        let mut s = format!("dim = {}\nrho = {}\n", self.n_plus_1, self.rho);
        if let Some(c) = &self.box_center {
            let parts: Vec<String> = c.to_reals().iter().map(|v| format!("{v:?}")).collect();
            s.push_str(&format!("box_center = {}\n", parts.join(", ")));
        }
        if let Some(h) = self.box_halfwidth {
            s.push_str(&format!("box_halfwidth = {h:?}\n"));
        }
        s
    }
}

/// Eval a 2-jet at `p`.
pub fn eval_jet2(spec: &SurfaceSpec, p: &QVector) -> Result<Jet2> {
    spec.jet(p)
}
