//! Normal forms for the three model hyperquadrics, keyed by quaternionic inertia.

use std::fmt;

use nalgebra::DMatrix;

use super::fit::QuadricFit;
use crate::error::{Error, Result};
use crate::linalg::{AffineMap, Congruence, Inertia, QMatrix, QVector, Quaternion};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Label {
    Parabolic,
    Sphere,
    Hyperboloid,
}

impl Label {
    pub fn name(self) -> &'static str {
        match self {
            Label::Parabolic => "Parabolic",
            Label::Sphere => "Sphere",
            Label::Hyperboloid => "Hyperboloid",
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Everything a normalizer may use: the fitted quadric `<Delta x, x> + <b, x> + c = 0` and a
/// diagonalizing congruence of `Delta`.
pub struct NormalizeInput<'a> {
    pub delta: &'a DMatrix<f64>,
    pub congruence: &'a Congruence,
    pub fit: &'a QuadricFit,
}

impl NormalizeInput<'_> {
    fn slots(&self) -> usize {
        self.congruence.transform.rows()
    }

    /// `b` in the diagonal coordinates `y = A^{-1} x`.
    fn b_tilde(&self) -> QVector {
        let ra = self.congruence.transform.to_real();
        QVector::from_dvector(&(ra.transpose() * &self.fit.b)).expect("length is a multiple of 4")
    }
}

pub trait Normalizer: Sync {
    fn label(&self) -> Label;

    /// Inertia of `Delta` for this class in `H^{n+1}`.
    fn inertia(&self, n: usize) -> Inertia;

    /// Left-hand side of the model equation (zero on the model).
    fn model(&self, z: &QVector) -> f64;

    /// Affine map taking the fitted quadric onto the model.
    fn normalize(&self, input: &NormalizeInput) -> Result<AffineMap>;

    /// `max |model(F x)| / (1 + |F x|^2)` over `points`.
    fn residual(&self, map: &AffineMap, points: &[QVector]) -> f64 {
        points
            .iter()
            .map(|x| {
                let z = map.apply(x);
                self.model(&z).abs() / (1.0 + z.norm().powi(2))
            })
            .fold(0.0, f64::max)
    }
}

struct Parabolic;

/// Sphere (`sign = 1`) or hyperboloid (`sign = -1`): `sum_{a<n} |q_a|^2 + sign |p|^2 = sign`.
struct Central {
    sign: f64,
}

static PARABOLIC: Parabolic = Parabolic;
static SPHERE: Central = Central { sign: 1.0 };
static HYPERBOLOID: Central = Central { sign: -1.0 };
static REGISTRY: [&dyn Normalizer; 3] = [&PARABOLIC, &SPHERE, &HYPERBOLOID];

pub fn normalizers() -> &'static [&'static dyn Normalizer] {
    &REGISTRY
}

pub fn normalizer_for(inertia: Inertia, n: usize) -> Option<&'static dyn Normalizer> {
    REGISTRY.iter().copied().find(|z| z.inertia(n) == inertia)
}

fn sum_sq(z: &QVector, upto: usize) -> f64 {
    (0..upto).map(|a| z[a].norm_sqr()).sum()
}

fn check_signs(input: &NormalizeInput, want: Inertia) -> Result<()> {
    if input.congruence.inertia != want {
        return Err(Error::InconsistentClassification(format!(
            "congruence inertia {} does not match {}",
            input.congruence.inertia, want
        )));
    }
    Ok(())
}

impl Normalizer for Central {
    fn label(&self) -> Label {
        if self.sign > 0.0 {
            Label::Sphere
        } else {
            Label::Hyperboloid
        }
    }

    fn inertia(&self, n: usize) -> Inertia {
        if self.sign > 0.0 {
            Inertia::new(n + 1, 0, 0)
        } else {
            Inertia::new(n, 1, 0)
        }
    }

    fn model(&self, z: &QVector) -> f64 {
        let n = z.slots() - 1;
        sum_sq(z, n) + self.sign * z[n].norm_sqr() - self.sign
    }

    fn normalize(&self, input: &NormalizeInput) -> Result<AffineMap> {
        let slots = input.slots();
        check_signs(input, self.inertia(slots - 1))?;
        let signs = &input.congruence.signs;
        let bt = input.b_tilde();
        // sum eps_a |y_a + eps_a bt_a / 2|^2 = rho0
        let rho0: f64 = (0..slots).map(|a| signs[a] * bt[a].norm_sqr() / 4.0).sum::<f64>() - input.fit.c;
        if !(rho0 * self.sign > 0.0) {
            return Err(Error::InconsistentClassification(format!(
                "level {rho0:.6e} has the wrong sign for inertia {}",
                input.congruence.inertia
            )));
        }
        let k = 1.0 / rho0.abs().sqrt();
        let a = input.congruence.transform.inverse()?.scale(k);
        let shift = QVector::from_quaternions((0..slots).map(|i| bt[i] * (signs[i] * 0.5 * k)).collect());
        AffineMap::new(a, Quaternion::ONE, shift)
    }
}

impl Normalizer for Parabolic {
    fn label(&self) -> Label {
        Label::Parabolic
    }

    fn inertia(&self, n: usize) -> Inertia {
        Inertia::new(n, 0, 1)
    }

    fn model(&self, z: &QVector) -> f64 {
        let n = z.slots() - 1;
        sum_sq(z, n) + z[n].t
    }

    fn normalize(&self, input: &NormalizeInput) -> Result<AffineMap> {
        let slots = input.slots();
        let n = slots - 1;
        check_signs(input, self.inertia(n))?;
        let bt = input.b_tilde();
        let beta = bt[n].conj();
        if beta.norm() <= 1e-8 * (1.0 + bt.to_dvector().amax()) {
            return Err(Error::DegenerateLinearPart);
        }
        let c_prime = input.fit.c - sum_sq(&bt, n) / 4.0;
        let mut diag = vec![Quaternion::ONE; slots];
        diag[n] = beta;
        let a = &QMatrix::diagonal(&diag) * &input.congruence.transform.inverse()?;
        let mut shift: Vec<Quaternion> = (0..n).map(|i| bt[i] * 0.5).collect();
        shift.push(Quaternion::real(c_prime));
        AffineMap::new(a, Quaternion::ONE, QVector::from_quaternions(shift))
    }
}
