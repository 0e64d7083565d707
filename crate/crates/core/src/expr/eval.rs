use std::collections::BTreeMap;

use thiserror::Error;

use super::{BinOp, Expr, Func};
use crate::tensor::Jet2;

/// Named real parameters (`M`, `Q`, `k`, …).
pub type Params = BTreeMap<String, f64>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EvalError {
    #[error("unresolved parameter `{0}`")]
    UnresolvedParameter(String),
    #[error("coordinate x{index} is not available at a point of dimension {dim}")]
    MissingCoordinate { index: usize, dim: usize },
    #[error("domain error in `{subexpr}`: {reason}")]
    Domain { subexpr: String, reason: String },
}

fn domain(e: &Expr, reason: impl Into<String>) -> EvalError {
    EvalError::Domain { subexpr: e.to_string(), reason: reason.into() }
}

/// Evaluates `e` on seeded coordinate jets, returning the exact 2-jet.
pub fn eval_jet(e: &Expr, point: &[Jet2], params: &Params) -> Result<Jet2, EvalError> {
    let out = match e {
        Expr::Num(v) => Jet2::constant(*v),
        Expr::Coord(i) => *point
            .get(*i)
            .ok_or(EvalError::MissingCoordinate { index: i + 1, dim: point.len() })?,
        Expr::Param(p) => Jet2::constant(*params.get(p).ok_or_else(|| EvalError::UnresolvedParameter(p.clone()))?),
        Expr::Neg(a) => -eval_jet(a, point, params)?,
        Expr::Call(f, a) => {
            let x = eval_jet(a, point, params)?;
            match f {
                Func::Sin => x.sin(),
                Func::Cos => x.cos(),
                Func::Exp => x.exp(),
                Func::Sqrt => {
                    if x.value <= 0.0 {
                        return Err(domain(e, format!("sqrt of non-positive value {}", x.value)));
                    }
                    x.sqrt()
                }
                Func::Ln => {
                    if x.value <= 0.0 {
                        return Err(domain(e, format!("ln of non-positive value {}", x.value)));
                    }
                    x.ln()
                }
            }
        }
        Expr::Bin(op, a, b) => {
            let l = eval_jet(a, point, params)?;
            let r = eval_jet(b, point, params)?;
            match op {
                BinOp::Add => l + r,
                BinOp::Sub => l - r,
                BinOp::Mul => l * r,
                BinOp::Div => {
                    if r.value == 0.0 {
                        return Err(domain(e, "division by zero"));
                    }
                    l / r
                }
                BinOp::Pow => power(e, &l, &r)?,
            }
        }
    };
    if !out.value.is_finite() {
        return Err(domain(e, "non-finite result"));
    }
    Ok(out)
}

fn is_constant(j: &Jet2) -> bool {
    j.grad.iter().all(|&g| g == 0.0) && j.hess.iter().flatten().all(|&h| h == 0.0)
}

fn power(e: &Expr, base: &Jet2, exp: &Jet2) -> Result<Jet2, EvalError> {
    if is_constant(exp) {
        let n = exp.value;
        if n.fract() == 0.0 && n.abs() <= i32::MAX as f64 {
            if n < 0.0 && base.value == 0.0 {
                return Err(domain(e, "zero raised to a negative power"));
            }
            return Ok(base.powi(n as i32));
        }
        if base.value <= 0.0 {
            return Err(domain(e, format!("non-integer power of non-positive base {}", base.value)));
        }
        return Ok(base.powf(n));
    }
    if base.value <= 0.0 {
        return Err(domain(e, format!("variable exponent on non-positive base {}", base.value)));
    }
    Ok(base.pow(exp))
}

/// Plain value of `e` at `point`.
pub fn eval_value(e: &Expr, point: &[f64], params: &Params) -> Result<f64, EvalError> {
    let seeds = crate::tensor::jet_seed(point);
    eval_jet(e, &seeds, params).map(|j| j.value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;
    use crate::tensor::jet_seed;

    fn p(pairs: &[(&str, f64)]) -> Params {
        pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
    }

    #[test]
    fn polynomial_jet() {
        let e = parse("x1*x1", 4).unwrap();
        let j = eval_jet(&e, &jet_seed(&[3.0, 0.0, 0.0, 0.0]), &Params::new()).unwrap();
        assert_eq!(j.value, 9.0);
        assert_eq!(j.grad[0], 6.0);
        assert_eq!(j.hess[0][0], 2.0);
    }

    #[test]
    fn coordinate_seed() {
        let e = parse("x2", 4).unwrap();
        let j = eval_jet(&e, &jet_seed(&[0.0, 5.0, 0.0, 0.0]), &Params::new()).unwrap();
        assert_eq!(j.value, 5.0);
        assert_eq!(&j.grad[..4], &[0.0, 1.0, 0.0, 0.0]);
    }

    #[test]
    fn reissner_nordstrom_lapse_value() {
        let e = parse("sqrt(1-2*M/x2+Q^2/x2^2)", 4).unwrap();
        let v = eval_value(&e, &[0.0, 4.0, 0.0, 0.0], &p(&[("M", 1.0), ("Q", 0.0)])).unwrap();
        assert!((v - 0.5f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn sqrt_at_zero_is_a_domain_error() {
        let e = parse("sqrt(x2)", 4).unwrap();
        let err = eval_jet(&e, &jet_seed(&[0.0; 4]), &Params::new()).unwrap_err();
        assert_eq!(err, EvalError::Domain { subexpr: "sqrt(x2)".into(), reason: "sqrt of non-positive value 0".into() });
    }

    #[test]
    fn division_by_zero_names_subexpression() {
        let e = parse("1 + M/x1", 4).unwrap();
        match eval_value(&e, &[0.0; 4], &p(&[("M", 2.0)])) {
            Err(EvalError::Domain { subexpr, .. }) => assert_eq!(subexpr, "M / x1"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn unresolved_parameter() {
        let e = parse("M*x1", 4).unwrap();
        assert_eq!(eval_value(&e, &[1.0; 4], &Params::new()), Err(EvalError::UnresolvedParameter("M".into())));
    }

    #[test]
    fn integer_power_of_negative_base() {
        let e = parse("x1^3", 4).unwrap();
        let j = eval_jet(&e, &jet_seed(&[-2.0, 0.0, 0.0, 0.0]), &Params::new()).unwrap();
        assert_eq!(j.value, -8.0);
        assert_eq!(j.grad[0], 12.0);
        assert_eq!(j.hess[0][0], -12.0);
        assert!(eval_value(&parse("x1^0.5", 4).unwrap(), &[-1.0, 0.0, 0.0, 0.0], &Params::new()).is_err());
    }
}
