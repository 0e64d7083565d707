use super::{BinOp, Expr, Func};

fn is_num(e: &Expr, v: f64) -> bool {
    matches!(e, Expr::Num(n) if *n == v)
}

fn add(a: Expr, b: Expr) -> Expr {
    if is_num(&a, 0.0) {
        b
    } else if is_num(&b, 0.0) {
        a
    } else {
        a + b
    }
}

fn sub(a: Expr, b: Expr) -> Expr {
    if is_num(&b, 0.0) {
        a
    } else if is_num(&a, 0.0) {
        -b
    } else {
        a - b
    }
}

fn mul(a: Expr, b: Expr) -> Expr {
    if is_num(&a, 0.0) || is_num(&b, 0.0) {
        Expr::num(0.0)
    } else if is_num(&a, 1.0) {
        b
    } else if is_num(&b, 1.0) {
        a
    } else {
        a * b
    }
}

fn div(a: Expr, b: Expr) -> Expr {
    if is_num(&a, 0.0) {
        Expr::num(0.0)
    } else {
        a / b
    }
}

fn depends_on_coords(e: &Expr) -> bool {
    e.max_coord().is_some()
}

impl Expr {
    /// Symbolic partial derivative with respect to coordinate `index` (zero-based).
    pub(crate) fn diff(&self, index: usize) -> Expr {
        match self {
            Expr::Num(_) | Expr::Param(_) => Expr::num(0.0),
            Expr::Coord(i) => Expr::num(if *i == index { 1.0 } else { 0.0 }),
            Expr::Neg(a) => {
                let d = a.diff(index);
                if is_num(&d, 0.0) {
                    d
                } else {
                    -d
                }
            }
            Expr::Call(f, a) => {
                let da = a.diff(index);
                if is_num(&da, 0.0) {
                    return da;
                }
                let a = (**a).clone();
                let outer = match f {
                    Func::Sin => Expr::call(Func::Cos, a),
                    Func::Cos => -Expr::call(Func::Sin, a),
                    Func::Exp => Expr::call(Func::Exp, a),
                    Func::Sqrt => Expr::num(0.5) / Expr::call(Func::Sqrt, a),
                    Func::Ln => Expr::num(1.0) / a,
                };
                mul(outer, da)
            }
            Expr::Bin(op, a, b) => {
                let (da, db) = (a.diff(index), b.diff(index));
                let (a, b) = ((**a).clone(), (**b).clone());
                match op {
                    BinOp::Add => add(da, db),
                    BinOp::Sub => sub(da, db),
                    BinOp::Mul => add(mul(da, b.clone()), mul(a, db)),
                    BinOp::Div => div(sub(mul(da, b.clone()), mul(a, db)), Expr::bin(BinOp::Pow, b, Expr::num(2.0))),
                    BinOp::Pow => {
                        if !depends_on_coords(&b) {
                            let lowered = Expr::bin(BinOp::Pow, a, sub(b.clone(), Expr::num(1.0)));
                            mul(mul(b, lowered), da)
                        } else {
                            // d(a^b) = a^b (b' ln a + b a'/a)
                            let whole = Expr::bin(BinOp::Pow, a.clone(), b.clone());
                            let inner = add(mul(db, Expr::call(Func::Ln, a.clone())), div(mul(b, da), a));
                            mul(whole, inner)
                        }
                    }
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use crate::expr::{eval_jet, parse, Params};
    use crate::tensor::jet_seed;

    #[test]
    fn symbolic_derivative_matches_jet_gradient() {
        let params: Params = [("M".to_string(), 1.0)].into_iter().collect();
        let x = [0.3, 4.0, 1.1, 0.7];
        for src in [
            "sqrt(1 - 2*M/x2)",
            "x2*sin(x3)",
            "x1^3*x2 - exp(x4)/x2",
            "ln(x2)*cos(x1*x3)",
            "x2^x3",
            "-(x1 - x4)^2",
        ] {
            let e = parse(src, 4).unwrap();
            let jet = eval_jet(&e, &jet_seed(&x), &params).unwrap();
            for k in 0..4 {
                let d = e.diff(k);
                let dj = eval_jet(&d, &jet_seed(&x), &params).unwrap();
                assert!((dj.value - jet.grad[k]).abs() < 1e-12, "{src} d{k}");
                for l in 0..4 {
                    assert!((dj.grad[l] - jet.hess[k][l]).abs() < 1e-11, "{src} d{k}d{l}");
                }
            }
        }
    }
}
