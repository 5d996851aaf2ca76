use std::f64::consts::{E, PI};

use super::{Ast, BinOp, Constant, Func, Node};
use crate::error::{Error, Result};
use crate::fracops::special::gamma_fn;

fn fail(ast: &Ast, src: &str, message: impl Into<String>) -> Error {
    Error::Eval {
        span: ast.span.clone(),
        snippet: src.get(ast.span.clone()).unwrap_or_default().to_string(),
        message: message.into(),
    }
}

fn power(base: f64, exp: f64) -> Option<f64> {
    if base == 0.0 && exp < 0.0 {
        return None;
    }
    if exp.fract() == 0.0 && exp.abs() <= 64.0 {
        Some(base.powi(exp as i32))
    } else {
        Some(base.powf(exp))
    }
}

pub(super) fn eval(ast: &Ast, vals: &[f64], src: &str) -> Result<f64> {
    let v = match &ast.node {
        Node::Num(v) => *v,
        Node::Const(Constant::Pi) => PI,
        Node::Const(Constant::E) => E,
        Node::Var(i) => vals[*i],
        Node::Neg(a) => -eval(a, vals, src)?,
        Node::Binary(op, l, r) => {
            let x = eval(l, vals, src)?;
            let y = eval(r, vals, src)?;
            match op {
                BinOp::Add => x + y,
                BinOp::Sub => x - y,
                BinOp::Mul => x * y,
                BinOp::Div => {
                    if y == 0.0 {
                        return Err(fail(ast, src, "division by zero"));
                    }
                    x / y
                }
                BinOp::Pow => {
                    power(x, y).ok_or_else(|| fail(ast, src, "zero raised to a negative power"))?
                }
            }
        }
        Node::Call(func, args) => {
            let x = eval(&args[0], vals, src)?;
            match func {
                Func::Sin => x.sin(),
                Func::Cos => x.cos(),
                Func::Exp => x.exp(),
                Func::Ln => {
                    if x <= 0.0 {
                        return Err(fail(ast, src, format!("ln of nonpositive value {x}")));
                    }
                    x.ln()
                }
                Func::Abs => x.abs(),
                Func::Sqrt => {
                    if x < 0.0 {
                        return Err(fail(ast, src, format!("sqrt of negative value {x}")));
                    }
                    x.sqrt()
                }
                Func::Pow => {
                    let y = eval(&args[1], vals, src)?;
                    power(x, y).ok_or_else(|| fail(ast, src, "zero raised to a negative power"))?
                }
                Func::Gamma => gamma_fn(x).map_err(|e| fail(ast, src, e.to_string()))?,
            }
        }
    };
    if !v.is_finite() {
        return Err(fail(ast, src, format!("non-finite result {v}")));
    }
    Ok(v)
}
