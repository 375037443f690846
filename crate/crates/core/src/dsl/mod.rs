//! Metric definition language: expressions, jets, metric specs.

mod expr;
mod jet;
mod metric;

pub use expr::{parse_expression, BinOp, Expr, Func, ParseError, ParseErrorKind};
pub use jet::{Jet, MAX_ORDER};
pub use metric::{parse_metric_config, preset, CoordRange, MetricSpec};

use crate::error::{Error, Result};

fn domain(node: &Expr, reason: &'static str) -> Error {
    Error::Domain {
        node: node.to_string(),
        reason,
    }
}

/// Evaluates `ast` at `point` with all partials through `order` (≤ 3).
pub fn eval_jet(ast: &Expr, point: &[f64], order: u8) -> Result<Jet> {
    if order > MAX_ORDER {
        return Err(Error::Invalid(format!("jet order {order} exceeds {MAX_ORDER}")));
    }
    if let Some(m) = ast.max_var() {
        if m >= point.len() {
            return Err(Error::Invalid(format!(
                "expression uses x{} but the point has {} coordinates",
                m + 1,
                point.len()
            )));
        }
    }
    jet_rec(ast, point, order)
}

fn jet_rec(e: &Expr, x: &[f64], order: u8) -> Result<Jet> {
    let n = x.len();
    let j = match e {
        Expr::Const(c) => Jet::constant(n, order, *c),
        Expr::Var(i) => Jet::variable(n, order, *i, x[*i]),
        Expr::Neg(a) => -jet_rec(a, x, order)?,
        Expr::Binary(op, a, b) => {
            let ja = jet_rec(a, x, order)?;
            let jb = jet_rec(b, x, order)?;
            match op {
                BinOp::Add => ja + jb,
                BinOp::Sub => ja - jb,
                BinOp::Mul => ja * jb,
                BinOp::Div => {
                    if jb.value() == 0.0 {
                        return Err(domain(e, "division by zero"));
                    }
                    ja / jb
                }
            }
        }
        Expr::Pow(a, k) => {
            let ja = jet_rec(a, x, order)?;
            let u = ja.value();
            let integral = k.fract() == 0.0;
            if u < 0.0 && !integral {
                return Err(domain(e, "non-integer power of a negative number"));
            }
            if u == 0.0 && (*k < 0.0 || (!integral && *k < order as f64)) {
                return Err(domain(e, "power singular at zero"));
            }
            ja.powf(*k)
        }
        Expr::Call(f, a) => {
            let ja = jet_rec(a, x, order)?;
            let u = ja.value();
            match f {
                Func::Log if u <= 0.0 => return Err(domain(e, "log of a non-positive number")),
                Func::Sqrt if u < 0.0 => return Err(domain(e, "sqrt of a negative number")),
                Func::Sqrt if u == 0.0 && order > 0 => {
                    return Err(domain(e, "sqrt not differentiable at zero"))
                }
                _ => {}
            }
            match f {
                Func::Sin => ja.sin(),
                Func::Cos => ja.cos(),
                Func::Tan => ja.tan(),
                Func::Exp => ja.exp(),
                Func::Log => ja.ln(),
                Func::Sqrt => ja.sqrt(),
                Func::Sinh => ja.sinh(),
                Func::Cosh => ja.cosh(),
                Func::Tanh => ja.tanh(),
            }
        }
    };
    if !j.value().is_finite() {
        return Err(domain(e, "non-finite value"));
    }
    Ok(j)
}
