use std::collections::HashMap;

use super::ast::{Expr, ExprNode, Func, Var};

/// Exact symbolic partial derivative of `e` with respect to `v`.
///
/// The result is not simplified; pass it through [`super::simplify`] to fold
/// the zero terms the product and chain rules leave behind.
pub fn differentiate(e: &Expr, v: Var) -> Expr {
    let mut memo = HashMap::new();
    diff(e, v, &mut memo)
}

fn diff(e: &Expr, v: Var, memo: &mut HashMap<*const ExprNode, Expr>) -> Expr {
    if let Some(d) = memo.get(&e.ptr()) {
        return d.clone();
    }
    let d = match e.node() {
        ExprNode::Const(_) => Expr::zero(),
        ExprNode::Var(w) => {
            if *w == v {
                Expr::one()
            } else {
                Expr::zero()
            }
        }
        ExprNode::Sum(terms) => Expr::sum(terms.iter().map(|t| diff(t, v, memo)).collect()),
        ExprNode::Product(factors) => {
            let mut terms = Vec::with_capacity(factors.len());
            for k in 0..factors.len() {
                let mut fs = factors.clone();
                fs[k] = diff(&factors[k], v, memo);
                terms.push(Expr::product(fs));
            }
            Expr::sum(terms)
        }
        ExprNode::Quotient(u, w) => {
            let du = diff(u, v, memo);
            let dw = diff(w, v, memo);
            let num = Expr::product(vec![du, w.clone()]) - Expr::product(vec![u.clone(), dw]);
            Expr::quotient(num, w.powf(2.0))
        }
        ExprNode::Power(u, c) => {
            let du = diff(u, v, memo);
            Expr::product(vec![Expr::constant(*c), u.powf(c - 1.0), du])
        }
        ExprNode::Unary(f, u) => {
            let du = diff(u, v, memo);
            match f {
                Func::Neg => -du,
                Func::Sin => Expr::product(vec![Expr::apply(Func::Cos, u.clone()), du]),
                Func::Cos => -Expr::product(vec![Expr::apply(Func::Sin, u.clone()), du]),
                Func::Exp => Expr::product(vec![e.clone(), du]),
                Func::Log => Expr::quotient(du, u.clone()),
                Func::Sqrt => {
                    Expr::quotient(du, Expr::product(vec![Expr::constant(2.0), e.clone()]))
                }
            }
        }
    };
    memo.insert(e.ptr(), d.clone());
    d
}
