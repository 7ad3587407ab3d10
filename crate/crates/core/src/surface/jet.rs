use nalgebra::{DMatrix, DVector};

use super::expr::{Expr, Ring, DIVISION_FLOOR};
use crate::error::{Error, Result};

/// Second-order Taylor data of a scalar function: value, gradient and Hessian.
#[derive(Clone, Debug, PartialEq)]
pub struct Jet2 {
    pub value: f64,
    pub grad: DVector<f64>,
    pub hess: DMatrix<f64>,
}

impl Jet2 {
    pub fn constant(value: f64, dim: usize) -> Self {
        Jet2 { value, grad: DVector::zeros(dim), hess: DMatrix::zeros(dim, dim) }
    }

    /// The coordinate function `x_i` at value `x`.
    pub fn variable(i: usize, x: f64, dim: usize) -> Self {
        let mut j = Self::constant(x, dim);
        j.grad[i] = 1.0;
        j
    }

    pub fn dim(&self) -> usize {
        self.grad.len()
    }

    /// `phi(self)` for a scalar function with derivatives `(d0, d1, d2)` at `self.value`.
    fn chain(&self, d0: f64, d1: f64, d2: f64) -> Self {
        let gg = &self.grad * self.grad.transpose();
        Jet2 { value: d0, grad: &self.grad * d1, hess: &self.hess * d1 + gg * d2 }
    }
}

impl Ring for Jet2 {
    fn add(&self, o: &Self) -> Self {
        Jet2 { value: self.value + o.value, grad: &self.grad + &o.grad, hess: &self.hess + &o.hess }
    }

    fn sub(&self, o: &Self) -> Self {
        Jet2 { value: self.value - o.value, grad: &self.grad - &o.grad, hess: &self.hess - &o.hess }
    }

    fn mul(&self, o: &Self) -> Self {
        let cross = &self.grad * o.grad.transpose();
        let cross_t = cross.transpose();
        Jet2 {
            value: self.value * o.value,
            grad: &self.grad * o.value + &o.grad * self.value,
            hess: &self.hess * o.value + &o.hess * self.value + cross + cross_t,
        }
    }

    fn neg(&self) -> Self {
        Jet2 { value: -self.value, grad: -&self.grad, hess: -&self.hess }
    }

    fn div(&self, o: &Self) -> Result<Self> {
        let v = o.value;
        if v.abs() < DIVISION_FLOOR {
            return Err(Error::DivisionByZero);
        }
        let inv = o.chain(1.0 / v, -1.0 / (v * v), 2.0 / (v * v * v));
        Ok(self.mul(&inv))
    }

    fn powi(&self, k: u32) -> Self {
        match k {
            0 => Self::constant(1.0, self.dim()),
            1 => self.clone(),
            _ => {
                let v = self.value;
                let kf = k as f64;
                self.chain(v.powi(k as i32), kf * v.powi(k as i32 - 1), kf * (kf - 1.0) * v.powi(k as i32 - 2))
            }
        }
    }
}

/// 2-jet of `expr` at real coordinates `x`.
pub fn jet_at(expr: &Expr, x: &[f64]) -> Result<Jet2> {
    let dim = x.len();
    expr.eval_with(&|c| Jet2::constant(c, dim), &|i| Jet2::variable(i, x[i], dim))
}
