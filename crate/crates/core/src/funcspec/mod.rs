//! Target functions given as text.
//!
//! Grammar (one free variable `x`):
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := unary (('*' | '/') unary)*
//! unary   := '-' unary | power
//! power   := primary ('^' ['-'] INTEGER)*
//! primary := NUMBER | 'x' | FUNC '(' expr ')' | '(' expr ')'
//! FUNC    := exp | sin | cos | abs | sqrt | log
//! NUMBER  := digits ['.' digits] [('e' | 'E') ['+' | '-'] digits]
//! ```
//!
//! Powers bind tighter than unary minus, so `-x^2` is `-(x^2)`. Decimal
//! literals are held exactly (`0.1` is `1/10`).

mod eval;
mod parser;

use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::algebra::{ExactScalar, Polynomial};

pub use eval::{EvalError, Value};
pub use parser::{parse_function, ParseError};

/// Built-in unary functions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Func {
    Exp,
    Sin,
    Cos,
    Abs,
    Sqrt,
    Log,
}

impl Func {
    pub const ALL: [Func; 6] = [
        Func::Exp,
        Func::Sin,
        Func::Cos,
        Func::Abs,
        Func::Sqrt,
        Func::Log,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Func::Exp => "exp",
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Abs => "abs",
            Func::Sqrt => "sqrt",
            Func::Log => "log",
        }
    }

    pub fn from_name(name: &str) -> Option<Func> {
        Func::ALL.into_iter().find(|f| f.name() == name)
    }
}

/// Nonnegative decimal literal `mantissa · 10^{−scale}`, normalized so the
/// mantissa has no trailing zeros when `scale > 0`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Decimal {
    mantissa: BigInt,
    scale: u32,
}

impl Decimal {
    pub fn new(mut mantissa: BigInt, mut scale: u32) -> Self {
        let ten = BigInt::from(10);
        while scale > 0 && !mantissa.is_zero() && (&mantissa % &ten).is_zero() {
            mantissa /= &ten;
            scale -= 1;
        }
        if mantissa.is_zero() {
            scale = 0;
        }
        Self { mantissa, scale }
    }

    pub fn integer(value: u64) -> Self {
        Self::new(BigInt::from(value), 0)
    }

    pub fn value(&self) -> ExactScalar {
        ExactScalar::new(
            self.mantissa.clone(),
            num_traits::pow(BigInt::from(10), self.scale as usize),
        )
    }
}

impl fmt::Display for Decimal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let digits = self.mantissa.to_string();
        let scale = self.scale as usize;
        if scale == 0 {
            return f.write_str(&digits);
        }
        let padded = if digits.len() <= scale {
            format!("{}{}", "0".repeat(scale + 1 - digits.len()), digits)
        } else {
            digits
        };
        let (int_part, frac) = padded.split_at(padded.len() - scale);
        write!(f, "{int_part}.{frac}")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
}

impl BinOp {
    fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => " + ",
            BinOp::Sub => " - ",
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

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Expr {
    Num(Decimal),
    Var,
    Neg(Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, i32),
    Call(Func, Box<Expr>),
}

const PREC_NEG: u8 = 3;
const PREC_POW: u8 = 4;
const PREC_ATOM: u8 = 5;

impl Expr {
    fn precedence(&self) -> u8 {
        match self {
            Expr::Binary(op, ..) => op.precedence(),
            Expr::Neg(_) => PREC_NEG,
            Expr::Pow(..) => PREC_POW,
            Expr::Num(_) | Expr::Var | Expr::Call(..) => PREC_ATOM,
        }
    }

    fn write_wrapped(&self, f: &mut fmt::Formatter<'_>, wrap: bool) -> fmt::Result {
        if wrap {
            write!(f, "({self})")
        } else {
            write!(f, "{self}")
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(d) => write!(f, "{d}"),
            Expr::Var => f.write_str("x"),
            Expr::Neg(e) => {
                f.write_str("-")?;
                e.write_wrapped(f, e.precedence() < PREC_NEG)
            }
            Expr::Binary(op, l, r) => {
                l.write_wrapped(f, l.precedence() < op.precedence())?;
                f.write_str(op.symbol())?;
                r.write_wrapped(f, r.precedence() <= op.precedence())
            }
            Expr::Pow(base, k) => {
                base.write_wrapped(f, base.precedence() < PREC_POW)?;
                write!(f, "^{k}")
            }
            Expr::Call(func, arg) => write!(f, "{}({arg})", func.name()),
        }
    }
}

/// A parsed target function `f(x)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FunctionSpec {
    ast: Expr,
}

impl FunctionSpec {
    pub fn new(ast: Expr) -> Self {
        Self { ast }
    }

    pub fn ast(&self) -> &Expr {
        &self.ast
    }

    /// Canonical text; parsing it gives back an identical tree.
    pub fn canonical(&self) -> String {
        self.ast.to_string()
    }

    /// Exact polynomial form when the tree uses only `+ − ×`, nonnegative
    /// integer powers and division by nonzero constants.
    pub fn to_polynomial(&self) -> Option<Polynomial> {
        as_polynomial(&self.ast)
    }
}

impl fmt::Display for FunctionSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.ast.fmt(f)
    }
}

fn as_polynomial(e: &Expr) -> Option<Polynomial> {
    Some(match e {
        Expr::Num(d) => Polynomial::constant(d.value()),
        Expr::Var => Polynomial::x(),
        Expr::Neg(inner) => -&as_polynomial(inner)?,
        Expr::Binary(op, l, r) => {
            let (l, r) = (as_polynomial(l)?, as_polynomial(r)?);
            match op {
                BinOp::Add => &l + &r,
                BinOp::Sub => &l - &r,
                BinOp::Mul => &l * &r,
                BinOp::Div => {
                    if r.degree() != Some(0) {
                        return None;
                    }
                    l.scale(&(ExactScalar::one() / r.coeff(0)))
                }
            }
        }
        Expr::Pow(base, k) => {
            let k = u32::try_from(*k).ok()?;
            as_polynomial(base)?.pow(k)
        }
        Expr::Call(..) => return None,
    })
}
