//! Sparse real polynomials, used to re-expand a defining function after an affine change of
//! variables so the result is again an [`Expr`].

use std::collections::btree_map::Entry;
use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};

use super::expr::{BinOp, Component, Expr, Ring};
use crate::error::{Error, Result};

/// Polynomial in `dim` real variables, keyed by exponent vectors.
#[derive(Clone, Debug, PartialEq)]
pub struct Poly {
    dim: usize,
    terms: BTreeMap<Vec<u32>, f64>,
}

impl Poly {
    pub fn zero(dim: usize) -> Self {
        Poly { dim, terms: BTreeMap::new() }
    }

    pub fn constant(c: f64, dim: usize) -> Self {
        let mut p = Self::zero(dim);
        p.insert(vec![0; dim], c);
        p
    }

    /// `sum_j coeffs[j] y_j + shift`.
    pub fn linear(coeffs: &[f64], shift: f64) -> Self {
        let dim = coeffs.len();
        let mut p = Self::constant(shift, dim);
        for (j, &c) in coeffs.iter().enumerate() {
            let mut e = vec![0; dim];
            e[j] = 1;
            p.insert(e, c);
        }
        p
    }

    fn insert(&mut self, exps: Vec<u32>, c: f64) {
        if c == 0.0 {
            return;
        }
        match self.terms.entry(exps) {
            Entry::Vacant(v) => {
                v.insert(c);
            }
            Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if *o.get() == 0.0 {
                    o.remove();
                }
            }
        }
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn degree(&self) -> u32 {
        self.terms.keys().map(|e| e.iter().sum()).max().unwrap_or(0)
    }

    fn as_constant(&self) -> Option<f64> {
        match self.terms.len() {
            0 => Some(0.0),
            1 => {
                let (e, c) = self.terms.iter().next().expect("one term");
                e.iter().all(|&k| k == 0).then_some(*c)
            }
            _ => None,
        }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.terms.iter().map(|(e, c)| c * e.iter().zip(x).map(|(&k, &xi)| xi.powi(k as i32)).product::<f64>()).sum()
    }

    /// Expand `expr` as a polynomial in its own coordinates.
    pub fn from_expr(expr: &Expr, dim: usize) -> Result<Self> {
        expr.eval_with(&|c| Poly::constant(c, dim), &|i| {
            let mut e = vec![0; dim];
            e[i] = 1;
            let mut p = Poly::zero(dim);
            p.insert(e, 1.0);
            p
        })
    }

    /// Expand `expr(r y + t)` as a polynomial in `y`.
    pub fn substitute_affine(expr: &Expr, r: &DMatrix<f64>, t: &DVector<f64>) -> Result<Self> {
        let dim = r.ncols();
        let rows: Vec<Poly> = (0..r.nrows())
            .map(|i| {
                let coeffs: Vec<f64> = r.row(i).iter().copied().collect();
                Poly::linear(&coeffs, t[i])
            })
            .collect();
        expr.eval_with(&|c| Poly::constant(c, dim), &|i| rows[i].clone())
    }

    /// Sum-of-monomials expression; coordinates index slots as `4a + m`.
    pub fn to_expr(&self) -> Expr {
        let mut acc: Option<Expr> = None;
        for (exps, &c) in self.terms.iter().rev() {
            let mut factors: Vec<Expr> = Vec::new();
            for (i, &k) in exps.iter().enumerate() {
                if k == 0 {
                    continue;
                }
                let v = Expr::coord(Component::from_index(i % 4), i / 4);
                factors.push(if k == 1 { v } else { Expr::Pow(Box::new(v), k) });
            }
            let mono = factors.into_iter().reduce(|a, b| Expr::binary(BinOp::Mul, a, b));
            let mag = c.abs();
            let term = match mono {
                Some(m) if mag == 1.0 => m,
                Some(m) => Expr::binary(BinOp::Mul, Expr::Const(mag), m),
                None => Expr::Const(mag),
            };
            acc = Some(match acc {
                None if c < 0.0 => Expr::Neg(Box::new(term)),
                None => term,
                Some(a) if c < 0.0 => Expr::binary(BinOp::Sub, a, term),
                Some(a) => Expr::binary(BinOp::Add, a, term),
            });
        }
        acc.unwrap_or(Expr::Const(0.0))
    }
}

impl Ring for Poly {
    fn add(&self, o: &Self) -> Self {
        let mut p = self.clone();
        for (e, &c) in &o.terms {
            p.insert(e.clone(), c);
        }
        p
    }

    fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    fn mul(&self, o: &Self) -> Self {
        let mut p = Poly::zero(self.dim);
        for (ea, &ca) in &self.terms {
            for (eb, &cb) in &o.terms {
                let e: Vec<u32> = ea.iter().zip(eb).map(|(a, b)| a + b).collect();
                p.insert(e, ca * cb);
            }
        }
        p
    }

    fn neg(&self) -> Self {
        Poly { dim: self.dim, terms: self.terms.iter().map(|(e, c)| (e.clone(), -c)).collect() }
    }

    fn div(&self, o: &Self) -> Result<Self> {
        let c = o.as_constant().ok_or_else(|| Error::NotPolynomial("division by a non-constant".into()))?;
        let inv = 1.0.div(&c)?;
        Ok(Poly { dim: self.dim, terms: self.terms.iter().map(|(e, v)| (e.clone(), v * inv)).collect() })
    }

    fn powi(&self, k: u32) -> Self {
        let mut out = Poly::constant(1.0, self.dim);
        let mut base = self.clone();
        let mut k = k;
        while k > 0 {
            if k & 1 == 1 {
                out = out.mul(&base);
            }
            k >>= 1;
            if k > 0 {
                base = base.mul(&base);
            }
        }
        out
    }
}
