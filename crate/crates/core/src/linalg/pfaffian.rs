//! Pfaffian of complex skew-symmetric matrices by skew Gaussian elimination.

use num_complex::Complex64;

/// Dense complex matrix stored row-major.
#[derive(Clone, Debug)]
pub struct CMatrix {
    pub n: usize,
    pub data: Vec<Complex64>,
}

impl CMatrix {
    pub fn zeros(n: usize) -> Self {
        CMatrix { n, data: vec![Complex64::new(0.0, 0.0); n * n] }
    }

    pub fn from_fn(n: usize, f: impl Fn(usize, usize) -> Complex64) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                m.data[i * n + j] = f(i, j);
            }
        }
        m
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.data[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Complex64) {
        self.data[i * self.n + j] = v;
    }

    fn swap_index(&mut self, a: usize, b: usize) {
        let n = self.n;
        for k in 0..n {
            self.data.swap(a * n + k, b * n + k);
        }
        for k in 0..n {
            self.data.swap(k * n + a, k * n + b);
        }
    }

    /// Largest `|m_ij + m_ji|` relative to the largest entry.
    pub fn skew_defect(&self) -> f64 {
        let mut scale = 0.0_f64;
        let mut defect = 0.0_f64;
        for i in 0..self.n {
            for j in 0..self.n {
                scale = scale.max(self.get(i, j).norm());
                defect = defect.max((self.get(i, j) + self.get(j, i)).norm());
            }
        }
        if scale == 0.0 {
            0.0
        } else {
            defect / scale
        }
    }
}

/// Pfaffian with partial pivoting: at each step the largest entry of the current row is
/// swapped into the super-diagonal position, then the row and column are cleared by a
/// unimodular congruence.
pub fn pfaffian(m: &CMatrix) -> Complex64 {
    let n = m.n;
    if n % 2 == 1 {
        return Complex64::new(0.0, 0.0);
    }
    let mut a = m.clone();
    let mut pf = Complex64::new(1.0, 0.0);
    let mut k = 0;
    while k + 1 < n {
        let (mut piv, mut best) = (k + 1, a.get(k, k + 1).norm());
        for j in k + 2..n {
            let v = a.get(k, j).norm();
            if v > best {
                piv = j;
                best = v;
            }
        }
        if best == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        if piv != k + 1 {
            a.swap_index(k + 1, piv);
            pf = -pf;
        }
        let pivot = a.get(k, k + 1);
        pf *= pivot;
        let tau: Vec<Complex64> = (k + 2..n).map(|i| a.get(k, i) / pivot).collect();
        for (ii, i) in (k + 2..n).enumerate() {
            for (jj, j) in (k + 2..n).enumerate() {
                let v = a.get(i, j) - tau[ii] * a.get(k + 1, j) - tau[jj] * a.get(i, k + 1);
                a.set(i, j, v);
            }
        }
        k += 2;
    }
    pf
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Expansion along the first row.
    fn pfaffian_brute(m: &CMatrix, idx: &[usize]) -> Complex64 {
        if idx.is_empty() {
            return Complex64::new(1.0, 0.0);
        }
        let first = idx[0];
        let mut total = Complex64::new(0.0, 0.0);
        for (pos, &j) in idx.iter().enumerate().skip(1) {
            let rest: Vec<usize> =
                idx.iter().enumerate().filter(|&(p, _)| p != 0 && p != pos).map(|(_, &v)| v).collect();
            let sign = if pos % 2 == 1 { 1.0 } else { -1.0 };
            total += m.get(first, j) * pfaffian_brute(m, &rest) * sign;
        }
        total
    }

    fn random_skew(rng: &mut ChaCha8Rng, n: usize) -> CMatrix {
        let mut m = CMatrix::zeros(n);
        for i in 0..n {
            for j in i + 1..n {
                let v = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                m.set(i, j, v);
                m.set(j, i, -v);
            }
        }
        m
    }

    #[test]
    fn two_by_two() {
        let mut m = CMatrix::zeros(2);
        m.set(0, 1, Complex64::new(3.0, -1.0));
        m.set(1, 0, Complex64::new(-3.0, 1.0));
        assert_eq!(pfaffian(&m), Complex64::new(3.0, -1.0));
    }

    #[test]
    fn matches_expansion() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for n in [2, 4, 6, 8] {
            for _ in 0..5 {
                let m = random_skew(&mut rng, n);
                let idx: Vec<usize> = (0..n).collect();
                let brute = pfaffian_brute(&m, &idx);
                let fast = pfaffian(&m);
                assert!((brute - fast).norm() < 1e-12 * (1.0 + brute.norm()), "n={n}");
            }
        }
    }

    #[test]
    fn needs_pivoting() {
        // zero super-diagonal entry forces a swap
        let mut m = CMatrix::zeros(4);
        let mut put = |i: usize, j: usize, v: f64| {
            m.set(i, j, Complex64::new(v, 0.0));
            m.set(j, i, Complex64::new(-v, 0.0));
        };
        put(0, 2, 1.0);
        put(1, 3, 1.0);
        // Pf = a01 a23 - a02 a13 + a03 a12 = -1
        assert!((pfaffian(&m) - Complex64::new(-1.0, 0.0)).norm() < 1e-15);
    }
}
