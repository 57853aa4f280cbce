use std::collections::HashMap;

use super::ast::{Expr, ExprNode};
use super::eval::{power, unary};

/// Constant folding plus elimination of additive zeros and multiplicative
/// ones/zeros. Nothing else is rewritten.
///
/// Folding is skipped whenever it would leave the domain of a function or
/// produce a non-finite constant, so evaluation errors survive simplification.
/// `0*u` and `0/u` collapse to `0` even where `u` itself is undefined.
pub fn simplify(e: &Expr) -> Expr {
    let mut memo = HashMap::new();
    simp(e, &mut memo)
}

fn folded(v: f64) -> Option<Expr> {
    v.is_finite().then(|| Expr::constant(v))
}

fn simp(e: &Expr, memo: &mut HashMap<*const ExprNode, Expr>) -> Expr {
    if let Some(s) = memo.get(&e.ptr()) {
        return s.clone();
    }
    let s = match e.node() {
        ExprNode::Const(_) | ExprNode::Var(_) => e.clone(),
        ExprNode::Sum(terms) => {
            let mut acc = 0.0;
            let mut folded_any = false;
            let mut kept = Vec::with_capacity(terms.len());
            for t in terms {
                let t = simp(t, memo);
                match t.as_const() {
                    Some(c) => {
                        acc += c;
                        folded_any = true;
                    }
                    None => kept.push(t),
                }
            }
            if folded_any && acc != 0.0 {
                kept.push(Expr::constant(acc));
            }
            match kept.len() {
                0 => Expr::zero(),
                1 => kept.pop().unwrap(),
                _ => Expr::sum(kept),
            }
        }
        ExprNode::Product(factors) => {
            let mut acc = 1.0;
            let mut kept = Vec::with_capacity(factors.len());
            let mut zero = false;
            for f in factors {
                let f = simp(f, memo);
                match f.as_const() {
                    Some(c) if c == 0.0 => zero = true,
                    Some(c) => acc *= c,
                    None => kept.push(f),
                }
            }
            if zero {
                Expr::zero()
            } else {
                if acc != 1.0 {
                    kept.insert(0, Expr::constant(acc));
                }
                match kept.len() {
                    0 => Expr::one(),
                    1 => kept.pop().unwrap(),
                    _ => Expr::product(kept),
                }
            }
        }
        ExprNode::Quotient(a, b) => {
            let a = simp(a, memo);
            let b = simp(b, memo);
            match (a.as_const(), b.as_const()) {
                (Some(x), _) if x == 0.0 => Expr::zero(),
                (_, Some(y)) if y == 1.0 => a,
                (Some(x), Some(y)) if y != 0.0 => {
                    folded(x / y).unwrap_or_else(|| Expr::quotient(a, b))
                }
                _ => Expr::quotient(a, b),
            }
        }
        ExprNode::Power(a, c) => {
            let a = simp(a, memo);
            if *c == 0.0 {
                Expr::one()
            } else if *c == 1.0 {
                a
            } else {
                a.as_const()
                    .and_then(|x| power(x, *c).ok())
                    .and_then(folded)
                    .unwrap_or_else(|| a.powf(*c))
            }
        }
        ExprNode::Unary(f, a) => {
            let a = simp(a, memo);
            a.as_const()
                .and_then(|x| unary(*f, x).ok())
                .and_then(folded)
                .unwrap_or_else(|| Expr::apply(*f, a))
        }
    };
    memo.insert(e.ptr(), s.clone());
    s
}
