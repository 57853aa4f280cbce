//! Expression language for Lagrangians `L(x, y)`: parsing, printing, exact
//! differentiation, constant folding and evaluation.

mod ast;
mod diff;
mod eval;
mod parser;
mod simplify;

pub use ast::{Expr, ExprNode, Func, Var};
pub use diff::differentiate;
pub use eval::{eval_slices, Tape};
pub use parser::{parse_expr, ParseError, ParseErrorKind};
pub use simplify::simplify;

use crate::error::Result;
use crate::point::TangentPoint;

impl Expr {
    /// Arithmetic value at `u`.
    pub fn evaluate(&self, u: &TangentPoint) -> Result<f64> {
        eval_slices(self, u.x(), u.y())
    }

    pub fn differentiate(&self, v: Var) -> Expr {
        differentiate(self, v)
    }

    pub fn simplify(&self) -> Expr {
        simplify(self)
    }
}
