use nalgebra::{DMatrix, DVector};
use rand::Rng;

use super::qmatrix::QMatrix;
use super::quaternion::Quaternion;
use super::qvector::{block_diagonal, QVector};
use crate::error::{Error, Result};

/// Quaternionic affine map `F(x) = A x conj(omega) + q0`.
#[derive(Clone, Debug, PartialEq)]
pub struct AffineMap {
    pub a: QMatrix,
    pub omega: Quaternion,
    pub q0: QVector,
}

impl AffineMap {
    pub fn new(a: QMatrix, omega: Quaternion, q0: QVector) -> Result<Self> {
        if a.rows() != a.cols() || a.rows() != q0.slots() {
            return Err(Error::DimensionMismatch { expected: a.rows(), found: q0.slots() });
        }
        let omega =
            omega.normalized().ok_or_else(|| Error::InvalidArgument("omega must be a nonzero quaternion".into()))?;
        Ok(AffineMap { a, omega, q0 })
    }

    pub fn identity(slots: usize) -> Self {
        AffineMap { a: QMatrix::identity(slots), omega: Quaternion::ONE, q0: QVector::zeros(slots) }
    }

    pub fn linear(a: QMatrix) -> Self {
        let slots = a.rows();
        AffineMap { a, omega: Quaternion::ONE, q0: QVector::zeros(slots) }
    }

    pub fn slots(&self) -> usize {
        self.q0.slots()
    }

    pub fn apply(&self, x: &QVector) -> QVector {
        let ax = self.a.apply(x).right_mul(self.omega.conj());
        &ax + &self.q0
    }

    /// `(A^{-1}, conj(omega), -A^{-1} q0 omega)`.
    pub fn inverse(&self) -> Result<Self> {
        let a_inv = self.a.inverse()?;
        let shift = -&a_inv.apply(&self.q0).right_mul(self.omega);
        Ok(AffineMap { a: a_inv, omega: self.omega.conj(), q0: shift })
    }

    /// `self ∘ inner`.
    pub fn compose(&self, inner: &AffineMap) -> AffineMap {
        let a = &self.a * &inner.a;
        let omega = self.omega * inner.omega;
        let shift = self.a.apply(&inner.q0).right_mul(self.omega.conj());
        AffineMap { a, omega, q0: &shift + &self.q0 }
    }

    /// Real form `x -> R x + t`.
    pub fn to_real(&self) -> (DMatrix<f64>, DVector<f64>) {
        let right = block_diagonal(&self.omega.conj().right_matrix(), self.slots());
        (right * self.a.to_real(), self.q0.to_dvector())
    }

    pub fn condition_number(&self) -> f64 {
        self.a.condition_number()
    }

    /// Random map with entries of `A` uniform in `[-2, 2]` (redrawn until the condition number
    /// is at most `cond_cap`), uniformly random unit `omega`, and `q0` uniform in `[-1, 1]`.
    pub fn random<R: Rng>(rng: &mut R, slots: usize, cond_cap: f64) -> AffineMap {
        let mut quat = |lo: f64, hi: f64| {
            Quaternion::new(rng.gen_range(lo..hi), rng.gen_range(lo..hi), rng.gen_range(lo..hi), rng.gen_range(lo..hi))
        };
        let a = loop {
            let mut a = QMatrix::zeros(slots, slots);
            for i in 0..slots {
                for j in 0..slots {
                    a[(i, j)] = quat(-2.0, 2.0);
                }
            }
            if a.condition_number() <= cond_cap {
                break a;
            }
        };
        let omega = loop {
            let w = quat(-1.0, 1.0);
            if w.norm() <= 1.0 && w.norm() > 1e-3 {
                break w;
            }
        };
        let q0 = QVector::from_quaternions((0..slots).map(|_| quat(-1.0, 1.0)).collect());
        AffineMap::new(a, omega, q0).expect("nonzero omega and matching sizes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rand_q(rng: &mut ChaCha8Rng) -> Quaternion {
        Quaternion::new(
            rng.gen_range(-2.0..2.0),
            rng.gen_range(-2.0..2.0),
            rng.gen_range(-2.0..2.0),
            rng.gen_range(-2.0..2.0),
        )
    }

    fn rand_map(rng: &mut ChaCha8Rng, n: usize) -> AffineMap {
        let mut a = QMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                a[(i, j)] = rand_q(rng);
            }
        }
        let q0 = QVector::from_quaternions((0..n).map(|_| rand_q(rng)).collect());
        AffineMap::new(a, rand_q(rng), q0).unwrap()
    }

    #[test]
    fn identity_and_scaling() {
        let x = QVector::from_reals(&[1.0, -2.0, 0.5, 3.0, 0.0, 1.0, 2.0, -1.0]).unwrap();
        assert_eq!(AffineMap::identity(2).apply(&x), x);
        let f = AffineMap::linear(QMatrix::identity(2).scale(2.0));
        assert_eq!(f.apply(&x), x.scale(2.0));
    }

    #[test]
    fn inverse_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..50 {
            let f = rand_map(&mut rng, 2);
            let g = f.inverse().unwrap();
            let x = QVector::from_quaternions((0..2).map(|_| rand_q(&mut rng)).collect());
            let back = g.apply(&f.apply(&x));
            assert!((&back - &x).norm() < 1e-12 * (1.0 + f.condition_number()));
        }
    }

    #[test]
    fn composition_is_associative_and_matches_application() {
        let mut rng = ChaCha8Rng::seed_from_u64(22);
        for _ in 0..30 {
            let (f, g, h) = (rand_map(&mut rng, 3), rand_map(&mut rng, 3), rand_map(&mut rng, 3));
            let x = QVector::from_quaternions((0..3).map(|_| rand_q(&mut rng)).collect());
            let direct = f.apply(&g.apply(&h.apply(&x)));
            let left = f.compose(&g).compose(&h).apply(&x);
            let right = f.compose(&g.compose(&h)).apply(&x);
            let scale = 1.0 + direct.norm();
            assert!((&direct - &left).norm() < 1e-12 * scale);
            assert!((&direct - &right).norm() < 1e-12 * scale);
        }
    }

    #[test]
    fn real_form_matches() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let f = rand_map(&mut rng, 2);
        let x = QVector::from_quaternions((0..2).map(|_| rand_q(&mut rng)).collect());
        let (r, t) = f.to_real();
        let y = r * x.to_dvector() + t;
        assert!((y - f.apply(&x).to_dvector()).norm() < 1e-13);
    }

    #[test]
    fn twist_by_right_scalars() {
        // F(x lambda) - q0 = (F(x) - q0) conj(omega) lambda omega, for the linear part
        let mut rng = ChaCha8Rng::seed_from_u64(24);
        let f = rand_map(&mut rng, 2);
        let x = QVector::from_quaternions((0..2).map(|_| rand_q(&mut rng)).collect());
        let lambda = rand_q(&mut rng);
        let lhs = &f.apply(&x.right_mul(lambda)) - &f.q0;
        let rhs = (&f.apply(&x) - &f.q0).right_mul(f.omega * lambda * f.omega.conj());
        assert!((&lhs - &rhs).norm() < 1e-12);
    }
}
