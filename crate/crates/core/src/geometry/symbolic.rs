//! `S(L)` as an explicit expression, so that `∂S(L)/∂y^i` can be taken by
//! symbolic differentiation rather than through jet algebra.
//!
//! `G` is obtained by Cramer's rule on `g G = ¼ R`; determinants use Laplace
//! expansion along rows with minors memoized by their column set, so the
//! expression size grows like `n·2^n` rather than `n!`.

use std::collections::HashMap;

use crate::expr::{simplify, Expr, Tape, Var};
use crate::field::{LagrangianField, SymbolicSemispray};

fn determinant(m: &[Vec<Expr>]) -> Expr {
    fn minor(
        m: &[Vec<Expr>],
        row: usize,
        cols: u64,
        memo: &mut HashMap<(usize, u64), Expr>,
    ) -> Expr {
        let n = m.len();
        if row == n {
            return Expr::one();
        }
        if let Some(e) = memo.get(&(row, cols)) {
            return e.clone();
        }
        let mut terms = Vec::new();
        let mut sign = 1.0;
        for c in 0..n {
            if cols & (1 << c) != 0 {
                continue;
            }
            let rest = minor(m, row + 1, cols | (1 << c), memo);
            let factor = if sign > 0.0 {
                m[row][c].clone()
            } else {
                -m[row][c].clone()
            };
            terms.push(Expr::product(vec![factor, rest]));
            sign = -sign;
        }
        let e = simplify(&Expr::sum(terms));
        memo.insert((row, cols), e.clone());
        e
    }
    minor(m, 0, 0, &mut HashMap::new())
}

pub(crate) fn build(field: &LagrangianField) -> SymbolicSemispray {
    let n = field.dim();
    let half = Expr::constant(0.5);
    let quarter = Expr::constant(0.25);
    let g: Vec<Vec<Expr>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    simplify(&(half.clone() * field.partial_var(&[Var::Fiber(i), Var::Fiber(j)])))
                })
                .collect()
        })
        .collect();
    let rhs: Vec<Expr> = (0..n)
        .map(|k| {
            let mut terms: Vec<Expr> = (0..n)
                .map(|h| field.partial_var(&[Var::Fiber(k), Var::Base(h)]) * Expr::fiber(h))
                .collect();
            terms.push(-field.partial_var(&[Var::Base(k)]));
            simplify(&(quarter.clone() * Expr::sum(terms)))
        })
        .collect();
    let det = determinant(&g);
    let coeffs: Vec<Expr> = (0..n)
        .map(|i| {
            let replaced: Vec<Vec<Expr>> = g
                .iter()
                .zip(&rhs)
                .map(|(row, r)| {
                    let mut row = row.clone();
                    row[i] = r.clone();
                    row
                })
                .collect();
            simplify(&Expr::quotient(determinant(&replaced), det.clone()))
        })
        .collect();
    let mut terms = Vec::with_capacity(2 * n);
    for i in 0..n {
        terms.push(Expr::fiber(i) * field.partial_var(&[Var::Base(i)]));
        terms.push(Expr::constant(-2.0) * coeffs[i].clone() * field.partial_var(&[Var::Fiber(i)]));
    }
    let sl = simplify(&Expr::sum(terms));
    let half_fiber_gradient: Vec<Expr> = (0..n)
        .map(|i| simplify(&(half.clone() * sl.differentiate(Var::Fiber(i)))))
        .collect();
    let mut roots = vec![sl.clone()];
    roots.extend(half_fiber_gradient.iter().cloned());
    SymbolicSemispray {
        tape: Tape::compile(&roots),
        semispray_derivative: sl,
        half_fiber_gradient,
    }
}
