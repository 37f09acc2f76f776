use num_traits::{Signed, Zero};
use thiserror::Error;

use super::{BinOp, Expr, Func, FunctionSpec};
use crate::algebra::{to_f64, ExactScalar};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("division by zero in {expr}")]
    DivisionByZero { expr: String },
    #[error("{func}({arg}) is undefined, in {expr}")]
    Domain {
        func: &'static str,
        arg: f64,
        expr: String,
    },
}

/// Result of evaluation: exact while only field operations and integer
/// powers were involved, float after the first transcendental call.
#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Exact(ExactScalar),
    Float(f64),
}

impl Value {
    pub fn to_f64(&self) -> f64 {
        match self {
            Value::Exact(q) => to_f64(q),
            Value::Float(v) => *v,
        }
    }

    pub fn as_exact(&self) -> Option<&ExactScalar> {
        match self {
            Value::Exact(q) => Some(q),
            Value::Float(_) => None,
        }
    }
}

impl FunctionSpec {
    /// Floating-point evaluation.
    pub fn eval(&self, x: f64) -> Result<f64, EvalError> {
        eval_float(self.ast(), x)
    }

    /// Evaluation at a rational point, exact where the tree allows it.
    pub fn eval_exact(&self, x: &ExactScalar) -> Result<Value, EvalError> {
        eval_value(self.ast(), x)
    }
}

fn eval_float(e: &Expr, x: f64) -> Result<f64, EvalError> {
    Ok(match e {
        Expr::Num(d) => to_f64(&d.value()),
        Expr::Var => x,
        Expr::Neg(inner) => -eval_float(inner, x)?,
        Expr::Binary(op, l, r) => {
            let (a, b) = (eval_float(l, x)?, eval_float(r, x)?);
            match op {
                BinOp::Add => a + b,
                BinOp::Sub => a - b,
                BinOp::Mul => a * b,
                BinOp::Div => {
                    if b == 0.0 {
                        return Err(EvalError::DivisionByZero {
                            expr: e.to_string(),
                        });
                    }
                    a / b
                }
            }
        }
        Expr::Pow(base, k) => {
            let v = eval_float(base, x)?;
            if v == 0.0 && *k < 0 {
                return Err(EvalError::DivisionByZero {
                    expr: e.to_string(),
                });
            }
            v.powi(*k)
        }
        Expr::Call(func, arg) => apply(*func, eval_float(arg, x)?, e)?,
    })
}

fn apply(func: Func, v: f64, e: &Expr) -> Result<f64, EvalError> {
    let domain = |ok: bool| {
        if ok {
            Ok(())
        } else {
            Err(EvalError::Domain {
                func: func.name(),
                arg: v,
                expr: e.to_string(),
            })
        }
    };
    Ok(match func {
        Func::Exp => v.exp(),
        Func::Sin => v.sin(),
        Func::Cos => v.cos(),
        Func::Abs => v.abs(),
        Func::Sqrt => {
            domain(v >= 0.0)?;
            v.sqrt()
        }
        Func::Log => {
            domain(v > 0.0)?;
            v.ln()
        }
    })
}

fn eval_value(e: &Expr, x: &ExactScalar) -> Result<Value, EvalError> {
    let div_zero = || EvalError::DivisionByZero {
        expr: e.to_string(),
    };
    Ok(match e {
        Expr::Num(d) => Value::Exact(d.value()),
        Expr::Var => Value::Exact(x.clone()),
        Expr::Neg(inner) => match eval_value(inner, x)? {
            Value::Exact(q) => Value::Exact(-q),
            Value::Float(v) => Value::Float(-v),
        },
        Expr::Binary(op, l, r) => match (eval_value(l, x)?, eval_value(r, x)?) {
            (Value::Exact(a), Value::Exact(b)) => Value::Exact(match op {
                BinOp::Add => a + b,
                BinOp::Sub => a - b,
                BinOp::Mul => a * b,
                BinOp::Div => {
                    if b.is_zero() {
                        return Err(div_zero());
                    }
                    a / b
                }
            }),
            (a, b) => {
                let (a, b) = (a.to_f64(), b.to_f64());
                Value::Float(match op {
                    BinOp::Add => a + b,
                    BinOp::Sub => a - b,
                    BinOp::Mul => a * b,
                    BinOp::Div => {
                        if b == 0.0 {
                            return Err(div_zero());
                        }
                        a / b
                    }
                })
            }
        },
        Expr::Pow(base, k) => match eval_value(base, x)? {
            Value::Exact(q) => {
                if q.is_zero() && *k < 0 {
                    return Err(div_zero());
                }
                let p = num_traits::pow(q, k.unsigned_abs() as usize);
                Value::Exact(if *k < 0 { p.recip() } else { p })
            }
            Value::Float(v) => {
                if v == 0.0 && *k < 0 {
                    return Err(div_zero());
                }
                Value::Float(v.powi(*k))
            }
        },
        Expr::Call(Func::Abs, arg) => match eval_value(arg, x)? {
            Value::Exact(q) => Value::Exact(q.abs()),
            Value::Float(v) => Value::Float(v.abs()),
        },
        Expr::Call(func, arg) => Value::Float(apply(*func, eval_value(arg, x)?.to_f64(), e)?),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{int, parse_rational};
    use crate::funcspec::parse_function;

    #[test]
    fn float_examples() {
        assert_eq!(parse_function("x^2+1").unwrap().eval(3.0), Ok(10.0));
        assert_eq!(parse_function("abs(x)").unwrap().eval(-2.0), Ok(2.0));
        assert_eq!(
            parse_function("1/x").unwrap().eval(0.0),
            Err(EvalError::DivisionByZero { expr: "1/x".into() })
        );
    }

    #[test]
    fn domain_errors_name_the_subexpression() {
        let err = parse_function("1 + log(x - 1)")
            .unwrap()
            .eval(0.5)
            .unwrap_err();
        assert!(
            matches!(err, EvalError::Domain { func: "log", ref expr, .. } if expr == "log(x - 1)")
        );
        assert!(parse_function("sqrt(x)").unwrap().eval(-1.0).is_err());
        assert!(parse_function("x^-2").unwrap().eval(0.0).is_err());
    }

    #[test]
    fn exact_on_rational_subset() {
        let f = parse_function("(x^2 + 1)/3 - abs(x)").unwrap();
        let v = f.eval_exact(&parse_rational("-1/2").unwrap()).unwrap();
        assert_eq!(v, Value::Exact(parse_rational("-1/12").unwrap()));
        let g = parse_function("x*exp(x)").unwrap();
        assert!(matches!(g.eval_exact(&int(0)).unwrap(), Value::Float(v) if v == 0.0));
        let h = parse_function("x^-2").unwrap();
        assert_eq!(
            h.eval_exact(&int(2)).unwrap(),
            Value::Exact(parse_rational("1/4").unwrap())
        );
        assert!(h.eval_exact(&int(0)).is_err());
    }

    #[test]
    fn runge_values() {
        let f = parse_function("1/(1+25*x^2)").unwrap();
        assert_eq!(f.eval(0.0), Ok(1.0));
        assert_eq!(
            f.eval_exact(&parse_rational("0.2").unwrap()).unwrap(),
            Value::Exact(parse_rational("1/2").unwrap())
        );
    }
}
