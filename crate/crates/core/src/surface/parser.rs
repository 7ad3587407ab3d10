//! Recursive-descent parser for surface files and defining-function expressions.
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := unary (('*' | '/') unary)*
//! unary   := '-' unary | power
//! power   := primary ('^' INT)*
//! primary := NUMBER | IDENT '(' INT ')' | '(' expr ')'
//! ```

use std::fmt;

use thiserror::Error;

use super::expr::{BinOp, Component, Expr};
use super::SurfaceSpec;
use crate::linalg::QVector;

#[derive(Clone, Debug, PartialEq, Error)]
#[error("line {line}, column {col}: {kind}")]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub kind: ParseErrorKind,
}

#[derive(Clone, Debug, PartialEq)]
pub enum ParseErrorKind {
    Syntax { expected: String, found: String },
    UnknownIdentifier(String),
    SlotIndexOutOfRange { slot: usize, slots: usize },
    InvalidValue(String),
}

impl fmt::Display for ParseErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParseErrorKind::Syntax { expected, found } => write!(f, "expected {expected}, found {found}"),
            ParseErrorKind::UnknownIdentifier(name) => write!(f, "unknown identifier `{name}`"),
            ParseErrorKind::SlotIndexOutOfRange { slot, slots } => {
                write!(f, "slot index {slot} out of range for dim = {slots}")
            }
            ParseErrorKind::InvalidValue(msg) => write!(f, "{msg}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(f64, bool),
    Ident(String),
    LParen,
    RParen,
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    Comma,
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Num(v, _) => format!("number `{v}`"),
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::Plus => "`+`".into(),
            Tok::Minus => "`-`".into(),
            Tok::Star => "`*`".into(),
            Tok::Slash => "`/`".into(),
            Tok::Caret => "`^`".into(),
            Tok::Comma => "`,`".into(),
            Tok::Eof => "end of line".into(),
        }
    }
}

struct Token {
    tok: Tok,
    col: usize,
}

fn err(line: usize, col: usize, kind: ParseErrorKind) -> ParseError {
    ParseError { line, col, kind }
}

fn syntax(line: usize, col: usize, expected: &str, found: String) -> ParseError {
    err(line, col, ParseErrorKind::Syntax { expected: expected.into(), found })
}

/// Tokenize `text`, whose first character sits at 1-based column `col0`.
fn lex(text: &str, line: usize, col0: usize) -> Result<Vec<Token>, ParseError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let col = col0 + i;
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        let single = match c {
            '(' => Some(Tok::LParen),
            ')' => Some(Tok::RParen),
            '+' => Some(Tok::Plus),
            '-' => Some(Tok::Minus),
            '*' => Some(Tok::Star),
            '/' => Some(Tok::Slash),
            '^' => Some(Tok::Caret),
            ',' => Some(Tok::Comma),
            _ => None,
        };
        if let Some(tok) = single {
            out.push(Token { tok, col });
            i += 1;
            continue;
        }
        if c.is_ascii_digit() || (c == '.' && chars.get(i + 1).is_some_and(|d| d.is_ascii_digit())) {
            let start = i;
            let mut integral = true;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            if i < chars.len() && chars[i] == '.' {
                integral = false;
                i += 1;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
            }
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let mut j = i + 1;
                if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                    j += 1;
                }
                if j < chars.len() && chars[j].is_ascii_digit() {
                    integral = false;
                    i = j;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            let s: String = chars[start..i].iter().collect();
            let v: f64 = s
                .parse()
                .map_err(|_| err(line, col, ParseErrorKind::InvalidValue(format!("malformed number `{s}`"))))?;
            out.push(Token { tok: Tok::Num(v, integral), col });
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            out.push(Token { tok: Tok::Ident(chars[start..i].iter().collect()), col });
            continue;
        }
        return Err(syntax(line, col, "expression", format!("character `{c}`")));
    }
    out.push(Token { tok: Tok::Eof, col: col0 + chars.len() });
    Ok(out)
}

struct ExprParser<'a> {
    toks: &'a [Token],
    pos: usize,
    line: usize,
    slots: usize,
}

impl ExprParser<'_> {
    fn peek(&self) -> &Token {
        &self.toks[self.pos]
    }

    fn bump(&mut self) -> &Token {
        let t = &self.toks[self.pos];
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn fail(&self, expected: &str) -> ParseError {
        let t = self.peek();
        syntax(self.line, t.col, expected, t.tok.describe())
    }

    fn expect(&mut self, tok: Tok, expected: &str) -> Result<(), ParseError> {
        if self.peek().tok == tok {
            self.bump();
            Ok(())
        } else {
            Err(self.fail(expected))
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek().tok {
                Tok::Plus => BinOp::Add,
                Tok::Minus => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.term()?;
            lhs = Expr::binary(op, lhs, rhs);
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek().tok {
                Tok::Star => BinOp::Mul,
                Tok::Slash => BinOp::Div,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.unary()?;
            lhs = Expr::binary(op, lhs, rhs);
        }
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if self.peek().tok == Tok::Minus {
            self.bump();
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let mut base = self.primary()?;
        while self.peek().tok == Tok::Caret {
            self.bump();
            let k = self.integer("integer exponent")?;
            let k = u32::try_from(k).map_err(|_| self.fail("exponent below 2^32"))?;
            base = Expr::Pow(Box::new(base), k);
        }
        Ok(base)
    }

    fn integer(&mut self, expected: &str) -> Result<u64, ParseError> {
        match self.peek().tok {
            Tok::Num(v, true) if v <= u64::MAX as f64 => {
                self.bump();
                Ok(v as u64)
            }
            _ => Err(self.fail(expected)),
        }
    }

    fn primary(&mut self) -> Result<Expr, ParseError> {
        let col = self.peek().col;
        match self.peek().tok.clone() {
            Tok::Num(v, _) => {
                self.bump();
                Ok(Expr::Const(v))
            }
            Tok::LParen => {
                self.bump();
                let e = self.expr()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(e)
            }
            Tok::Ident(name) => {
                let component = Component::from_name(&name);
                if component.is_none() && name != "normq" {
                    return Err(err(self.line, col, ParseErrorKind::UnknownIdentifier(name)));
                }
                self.bump();
                self.expect(Tok::LParen, "`(` after function name")?;
                let slot_col = self.peek().col;
                let slot = self.integer("slot index")? as usize;
                if slot >= self.slots {
                    return Err(err(
                        self.line,
                        slot_col,
                        ParseErrorKind::SlotIndexOutOfRange { slot, slots: self.slots },
                    ));
                }
                self.expect(Tok::RParen, "`)`")?;
                Ok(match component {
                    Some(component) => Expr::Coord { component, slot },
                    None => Expr::NormQ(slot),
                })
            }
            _ => Err(self.fail("expression")),
        }
    }
}

/// Parse a single expression for an ambient of `slots` quaternionic dimensions. Reported
/// positions use `line` and treat the first character as column `col0`.
pub fn parse_expr_at(text: &str, slots: usize, line: usize, col0: usize) -> Result<Expr, ParseError> {
    let toks = lex(text, line, col0)?;
    let mut p = ExprParser { toks: &toks, pos: 0, line, slots };
    let e = p.expr()?;
    if p.peek().tok != Tok::Eof {
        return Err(p.fail("operator or end of line"));
    }
    Ok(e)
}

pub fn parse_expr(text: &str, slots: usize) -> Result<Expr, ParseError> {
    parse_expr_at(text, slots, 1, 1)
}

fn parse_reals(text: &str, line: usize, col0: usize) -> Result<Vec<f64>, ParseError> {
    let toks = lex(text, line, col0)?;
    let mut out = Vec::new();
    let mut i = 0;
    loop {
        let mut sign = 1.0;
        if toks[i].tok == Tok::Minus {
            sign = -1.0;
            i += 1;
        }
        match toks[i].tok {
            Tok::Num(v, _) => out.push(sign * v),
            ref other => return Err(syntax(line, toks[i].col, "number", other.describe())),
        }
        i += 1;
        match toks[i].tok {
            Tok::Comma => i += 1,
            Tok::Eof => return Ok(out),
            ref other => return Err(syntax(line, toks[i].col, "`,` or end of line", other.describe())),
        }
    }
}

/// Parse a surface file: `#` comments, `dim = <int>`, `rho = <expr>`, optional
/// `box_center = <reals>` and `box_halfwidth = <real>`.
pub fn parse_surface(text: &str) -> Result<SurfaceSpec, ParseError> {
    let mut slots: Option<usize> = None;
    let mut rho: Option<Expr> = None;
    let mut center: Option<(Vec<f64>, usize, usize)> = None;
    let mut halfwidth: Option<f64> = None;
    let mut last_line = 1;

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        last_line = line;
        let content = raw.split('#').next().unwrap_or("");
        if content.trim().is_empty() {
            continue;
        }
        let key_start = content.len() - content.trim_start().len();
        let Some(eq) = content.find('=') else {
            return Err(syntax(line, content.trim_end().len() + 1, "`=`", "end of line".into()));
        };
        let key = content[..eq].trim();
        let value = &content[eq + 1..];
        let value_col = eq + 2;
        let key_col = key_start + 1;
        match key {
            "dim" => {
                let toks = lex(value, line, value_col)?;
                let n = match (&toks[0].tok, &toks[1].tok) {
                    (Tok::Num(v, true), Tok::Eof) => *v as usize,
                    (Tok::Num(_, true), other) => {
                        return Err(syntax(line, toks[1].col, "end of line", other.describe()))
                    }
                    (other, _) => return Err(syntax(line, toks[0].col, "integer dimension", other.describe())),
                };
                if n < 2 {
                    return Err(err(
                        line,
                        toks[0].col,
                        ParseErrorKind::InvalidValue(format!("dim must be at least 2, got {n}")),
                    ));
                }
                slots = Some(n);
            }
            "rho" => {
                let Some(n) = slots else {
                    return Err(syntax(line, key_col, "`dim = <int>` before `rho`", "`rho`".into()));
                };
                rho = Some(parse_expr_at(value, n, line, value_col)?);
            }
            "box_center" => center = Some((parse_reals(value, line, value_col)?, line, value_col)),
            "box_halfwidth" => {
                let v = parse_reals(value, line, value_col)?;
                if v.len() != 1 || v[0] <= 0.0 || !v[0].is_finite() {
                    return Err(err(
                        line,
                        value_col,
                        ParseErrorKind::InvalidValue("box_halfwidth must be one positive real".into()),
                    ));
                }
                halfwidth = Some(v[0]);
            }
            other => {
                return Err(syntax(
                    line,
                    key_col,
                    "`dim`, `rho`, `box_center` or `box_halfwidth`",
                    format!("`{other}`"),
                ))
            }
        }
    }

    let Some(n_plus_1) = slots else {
        return Err(syntax(last_line, 1, "`dim = <int>`", "end of input".into()));
    };
    let Some(rho) = rho else {
        return Err(syntax(last_line, 1, "`rho = <expr>`", "end of input".into()));
    };
    let box_center = match center {
        Some((c, line, col)) => {
            if c.len() != 4 * n_plus_1 {
                return Err(err(
                    line,
                    col,
                    ParseErrorKind::InvalidValue(format!("box_center needs {} reals, got {}", 4 * n_plus_1, c.len())),
                ));
            }
            Some(QVector::from_reals(&c).expect("length checked"))
        }
        None => None,
    };
    Ok(SurfaceSpec { n_plus_1, rho, box_center, box_halfwidth: halfwidth })
}
