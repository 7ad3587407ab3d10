use std::fmt;

use crate::error::{Error, Result};

/// Real component of a quaternionic slot.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Component {
    Re,
    ImI,
    ImJ,
    ImK,
}

impl Component {
    pub const ALL: [Component; 4] = [Component::Re, Component::ImI, Component::ImJ, Component::ImK];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(m: usize) -> Component {
        Self::ALL[m]
    }

    pub fn name(self) -> &'static str {
        match self {
            Component::Re => "re",
            Component::ImI => "imi",
            Component::ImJ => "imj",
            Component::ImK => "imk",
        }
    }

    pub fn from_name(name: &str) -> Option<Component> {
        Self::ALL.into_iter().find(|c| c.name() == name)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
}

impl BinOp {
    fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
        }
    }

    fn precedence(self) -> u8 {
        match self {
            BinOp::Add | BinOp::Sub => 1,
            BinOp::Mul | BinOp::Div => 2,
        }
    }
}

/// Expression tree of a defining function in the real coordinates of `H^{n+1}`.
#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Const(f64),
    Coord { component: Component, slot: usize },
    NormQ(usize),
    Neg(Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, u32),
}

const PREC_NEG: u8 = 3;
const PREC_POW: u8 = 4;
const PREC_PRIMARY: u8 = 5;

impl Expr {
    pub fn coord(component: Component, slot: usize) -> Expr {
        Expr::Coord { component, slot }
    }

    pub fn binary(op: BinOp, l: Expr, r: Expr) -> Expr {
        Expr::Binary(op, Box::new(l), Box::new(r))
    }

    fn precedence(&self) -> u8 {
        match self {
            Expr::Const(_) | Expr::Coord { .. } | Expr::NormQ(_) => PREC_PRIMARY,
            Expr::Neg(_) => PREC_NEG,
            Expr::Binary(op, ..) => op.precedence(),
            Expr::Pow(..) => PREC_POW,
        }
    }

    /// Largest slot index referenced, if any.
    pub fn max_slot(&self) -> Option<usize> {
        match self {
            Expr::Const(_) => None,
            Expr::Coord { slot, .. } | Expr::NormQ(slot) => Some(*slot),
            Expr::Neg(e) | Expr::Pow(e, _) => e.max_slot(),
            Expr::Binary(_, l, r) => match (l.max_slot(), r.max_slot()) {
                (Some(a), Some(b)) => Some(a.max(b)),
                (a, b) => a.or(b),
            },
        }
    }

    /// Evaluate over any [`Ring`]; `var(4a + m)` supplies component `m` of slot `a`.
    pub fn eval_with<T: Ring>(&self, constant: &impl Fn(f64) -> T, var: &impl Fn(usize) -> T) -> Result<T> {
        Ok(match self {
            Expr::Const(c) => constant(*c),
            Expr::Coord { component, slot } => var(4 * slot + component.index()),
            Expr::NormQ(slot) => {
                let mut acc = var(4 * slot).square();
                for m in 1..4 {
                    acc = acc.add(&var(4 * slot + m).square());
                }
                acc
            }
            Expr::Neg(e) => e.eval_with(constant, var)?.neg(),
            Expr::Binary(op, l, r) => {
                let a = l.eval_with(constant, var)?;
                let b = r.eval_with(constant, var)?;
                match op {
                    BinOp::Add => a.add(&b),
                    BinOp::Sub => a.sub(&b),
                    BinOp::Mul => a.mul(&b),
                    BinOp::Div => a.div(&b)?,
                }
            }
            Expr::Pow(e, k) => e.eval_with(constant, var)?.powi(*k),
        })
    }

    /// Plain evaluation at real coordinates.
    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        self.eval_with(&|c| c, &|i| x[i])
    }
}

/// Arithmetic needed to evaluate an [`Expr`].
pub trait Ring: Clone {
    fn add(&self, o: &Self) -> Self;
    fn sub(&self, o: &Self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn neg(&self) -> Self;
    fn div(&self, o: &Self) -> Result<Self>;

    fn square(&self) -> Self {
        self.mul(self)
    }

    fn powi(&self, k: u32) -> Self;
}

/// Denominators below this magnitude are treated as zero.
pub const DIVISION_FLOOR: f64 = 1e-300;

impl Ring for f64 {
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn neg(&self) -> Self {
        -self
    }
    fn div(&self, o: &Self) -> Result<Self> {
        if o.abs() < DIVISION_FLOOR {
            Err(Error::DivisionByZero)
        } else {
            Ok(self / o)
        }
    }
    fn powi(&self, k: u32) -> Self {
        f64::powi(*self, k as i32)
    }
}

fn write_const(f: &mut fmt::Formatter<'_>, c: f64) -> fmt::Result {
    if c < 0.0 {
        write!(f, "(-{:?})", -c)
    } else {
        write!(f, "{c:?}")
    }
}

fn write_child(f: &mut fmt::Formatter<'_>, e: &Expr, parens: bool) -> fmt::Result {
    if parens {
        write!(f, "({e})")
    } else {
        write!(f, "{e}")
    }
}

/// Canonical printer: minimal parentheses that reproduce the same tree when parsed.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Const(c) => write_const(f, *c),
            Expr::Coord { component, slot } => write!(f, "{}({slot})", component.name()),
            Expr::NormQ(slot) => write!(f, "normq({slot})"),
            Expr::Neg(e) => {
                write!(f, "-")?;
                write_child(f, e, e.precedence() < PREC_NEG)
            }
            Expr::Binary(op, l, r) => {
                let p = op.precedence();
                write_child(f, l, l.precedence() < p)?;
                write!(f, " {} ", op.symbol())?;
                write_child(f, r, r.precedence() <= p)
            }
            Expr::Pow(e, k) => {
                write_child(f, e, e.precedence() < PREC_PRIMARY)?;
                write!(f, "^{k}")
            }
        }
    }
}
