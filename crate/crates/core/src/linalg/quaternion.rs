use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub, SubAssign};

/// A real quaternion `t + ix + jy + kz`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Quaternion {
    pub t: f64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Quaternion {
    pub const ZERO: Quaternion = Quaternion::new(0.0, 0.0, 0.0, 0.0);
    pub const ONE: Quaternion = Quaternion::new(1.0, 0.0, 0.0, 0.0);
    pub const I: Quaternion = Quaternion::new(0.0, 1.0, 0.0, 0.0);
    pub const J: Quaternion = Quaternion::new(0.0, 0.0, 1.0, 0.0);
    pub const K: Quaternion = Quaternion::new(0.0, 0.0, 0.0, 1.0);

    pub const fn new(t: f64, x: f64, y: f64, z: f64) -> Self {
        Quaternion { t, x, y, z }
    }

    pub const fn real(t: f64) -> Self {
        Quaternion::new(t, 0.0, 0.0, 0.0)
    }

    /// Imaginary unit `e_s` for `s` in 1..=3 (`e_1 = i`, `e_2 = j`, `e_3 = k`).
    pub fn unit(s: usize) -> Self {
        match s {
            1 => Self::I,
            2 => Self::J,
            3 => Self::K,
            _ => panic!("imaginary unit index must be 1, 2 or 3, got {s}"),
        }
    }

    pub fn from_array(c: [f64; 4]) -> Self {
        Quaternion::new(c[0], c[1], c[2], c[3])
    }

    pub fn to_array(self) -> [f64; 4] {
        [self.t, self.x, self.y, self.z]
    }

    pub fn conj(self) -> Self {
        Quaternion::new(self.t, -self.x, -self.y, -self.z)
    }

    pub fn norm_sqr(self) -> f64 {
        self.t * self.t + self.x * self.x + self.y * self.y + self.z * self.z
    }

    pub fn norm(self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn scale(self, s: f64) -> Self {
        Quaternion::new(self.t * s, self.x * s, self.y * s, self.z * s)
    }

    /// Multiplicative inverse; `None` for the zero quaternion.
    pub fn inverse(self) -> Option<Self> {
        let n = self.norm_sqr();
        if n == 0.0 {
            None
        } else {
            Some(self.conj().scale(1.0 / n))
        }
    }

    pub fn normalized(self) -> Option<Self> {
        let n = self.norm();
        if n == 0.0 {
            None
        } else {
            Some(self.scale(1.0 / n))
        }
    }

    /// Real part of the product, i.e. the Euclidean inner product of `self` and `conj(other)`.
    pub fn dot(self, other: Self) -> f64 {
        self.t * other.t + self.x * other.x + self.y * other.y + self.z * other.z
    }

    pub fn max_abs(self) -> f64 {
        self.t.abs().max(self.x.abs()).max(self.y.abs()).max(self.z.abs())
    }

    /// 4x4 real matrix of `v -> self * v` in the basis (1, i, j, k), row-major.
    pub fn left_matrix(self) -> [[f64; 4]; 4] {
        let Quaternion { t, x, y, z } = self;
        [[t, -x, -y, -z], [x, t, -z, y], [y, z, t, -x], [z, -y, x, t]]
    }

    /// 4x4 real matrix of `v -> v * self` in the basis (1, i, j, k), row-major.
    pub fn right_matrix(self) -> [[f64; 4]; 4] {
        let Quaternion { t, x, y, z } = self;
        [[t, -x, -y, -z], [x, t, z, -y], [y, -z, t, x], [z, y, -x, t]]
    }

    /// Orthogonal projection of a 4x4 block onto left multiplications.
    pub fn from_left_block(b: &[[f64; 4]; 4]) -> Self {
        Quaternion::new(
            (b[0][0] + b[1][1] + b[2][2] + b[3][3]) / 4.0,
            (b[1][0] - b[0][1] + b[3][2] - b[2][3]) / 4.0,
            (b[2][0] - b[0][2] + b[1][3] - b[3][1]) / 4.0,
            (b[3][0] - b[0][3] + b[2][1] - b[1][2]) / 4.0,
        )
    }
}

/// Hamilton product.
pub fn qmul(a: Quaternion, b: Quaternion) -> Quaternion {
    Quaternion::new(
        a.t * b.t - a.x * b.x - a.y * b.y - a.z * b.z,
        a.t * b.x + a.x * b.t + a.y * b.z - a.z * b.y,
        a.t * b.y - a.x * b.z + a.y * b.t + a.z * b.x,
        a.t * b.z + a.x * b.y - a.y * b.x + a.z * b.t,
    )
}

impl Add for Quaternion {
    type Output = Quaternion;
    fn add(self, o: Quaternion) -> Quaternion {
        Quaternion::new(self.t + o.t, self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl AddAssign for Quaternion {
    fn add_assign(&mut self, o: Quaternion) {
        *self = *self + o;
    }
}

impl Sub for Quaternion {
    type Output = Quaternion;
    fn sub(self, o: Quaternion) -> Quaternion {
        Quaternion::new(self.t - o.t, self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl SubAssign for Quaternion {
    fn sub_assign(&mut self, o: Quaternion) {
        *self = *self - o;
    }
}

impl Neg for Quaternion {
    type Output = Quaternion;
    fn neg(self) -> Quaternion {
        Quaternion::new(-self.t, -self.x, -self.y, -self.z)
    }
}

impl Mul for Quaternion {
    type Output = Quaternion;
    fn mul(self, o: Quaternion) -> Quaternion {
        qmul(self, o)
    }
}

impl Mul<f64> for Quaternion {
    type Output = Quaternion;
    fn mul(self, s: f64) -> Quaternion {
        self.scale(s)
    }
}

impl Div<f64> for Quaternion {
    type Output = Quaternion;
    fn div(self, s: f64) -> Quaternion {
        self.scale(1.0 / s)
    }
}

impl fmt::Display for Quaternion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {:+}i {:+}j {:+}k", self.t, self.x, self.y, self.z)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::strategy::Strategy;

    fn close(a: Quaternion, b: Quaternion, tol: f64) -> bool {
        (a - b).max_abs() <= tol
    }

    #[test]
    fn defining_relations() {
        let (i, j, k) = (Quaternion::I, Quaternion::J, Quaternion::K);
        assert_eq!(i * j, k);
        assert_eq!(j * k, i);
        assert_eq!(k * i, j);
        for e in [i, j, k] {
            assert_eq!(e * e, -Quaternion::ONE);
        }
        assert_eq!(j * i, -k);
    }

    #[test]
    fn worked_products() {
        let a = Quaternion::new(1.0, 1.0, 0.0, 0.0);
        let b = Quaternion::new(1.0, -1.0, 0.0, 0.0);
        assert_eq!(a * b, Quaternion::real(2.0));
        let c = Quaternion::new(2.0, 3.0, 0.0, 0.0);
        assert_eq!(c * Quaternion::J, Quaternion::new(0.0, 0.0, 2.0, 3.0));
    }

    #[test]
    fn matrices_match_products() {
        let a = Quaternion::new(0.3, -1.2, 0.7, 2.0);
        let v = Quaternion::new(-0.5, 0.25, 1.5, -0.75);
        let apply = |m: [[f64; 4]; 4], v: Quaternion| {
            let c = v.to_array();
            let mut out = [0.0; 4];
            for r in 0..4 {
                out[r] = (0..4).map(|k| m[r][k] * c[k]).sum();
            }
            Quaternion::from_array(out)
        };
        assert!(close(apply(a.left_matrix(), v), a * v, 1e-15));
        assert!(close(apply(a.right_matrix(), v), v * a, 1e-15));
        assert!(close(Quaternion::from_left_block(&a.left_matrix()), a, 1e-15));
    }

    #[test]
    fn inverse_and_norm() {
        let a = Quaternion::new(1.0, 2.0, -3.0, 0.5);
        let inv = a.inverse().unwrap();
        assert!(close(a * inv, Quaternion::ONE, 1e-15));
        assert!(close(inv * a, Quaternion::ONE, 1e-15));
        assert!(Quaternion::ZERO.inverse().is_none());
    }

    fn quat() -> impl proptest::strategy::Strategy<Value = Quaternion> {
        proptest::array::uniform4(-10.0..10.0f64).prop_map(Quaternion::from_array)
    }

    proptest::proptest! {
        #[test]
        fn algebra_laws(a in quat(), b in quat(), c in quat()) {
            let tol = 1e-12 * (1.0 + a.norm() * b.norm() * (1.0 + c.norm()));
            proptest::prop_assert!(((a * b).norm() - a.norm() * b.norm()).abs() <= tol);
            proptest::prop_assert!(close((a * b) * c, a * (b * c), tol));
            proptest::prop_assert!(close((a * b).conj(), b.conj() * a.conj(), tol));
            proptest::prop_assert!(close(a * (b + c), a * b + a * c, tol));
        }
    }
}
