use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex, OnceLock};

use crate::counterexample::Family;
use crate::error::{Error, Result};
use crate::expr::{differentiate, parse_expr, simplify, Expr, Tape, Var};
use crate::point::TangentPoint;

/// Where a Lagrangian comes from: a parsed formula or a built-in family.
#[derive(Debug, Clone, PartialEq)]
pub enum LagrangianSource {
    Expression(Expr),
    Family(Family),
}

#[derive(Debug, Clone, PartialEq)]
pub struct LagrangianSpec {
    pub dim: usize,
    pub source: LagrangianSource,
}

impl LagrangianSpec {
    pub fn expression(expr: Expr, dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::invalid("dimension must be at least 1"));
        }
        if let Some(i) = expr.max_index() {
            if i >= dim {
                return Err(Error::invalid(format!(
                    "expression references index {} beyond dimension {dim}",
                    i + 1
                )));
            }
        }
        Ok(LagrangianSpec {
            dim,
            source: LagrangianSource::Expression(expr),
        })
    }

    pub fn family(family: Family) -> Self {
        LagrangianSpec {
            dim: family.dim(),
            source: LagrangianSource::Family(family),
        }
    }

    pub fn build(&self) -> Result<LagrangianField> {
        match &self.source {
            LagrangianSource::Expression(e) => LagrangianField::new(e.clone(), self.dim),
            LagrangianSource::Family(f) => f.lagrangian(),
        }
    }
}

/// Parses a textual Lagrangian over `x1..xn, y1..yn`.
pub fn parse_lagrangian(text: &str, dim: usize) -> Result<LagrangianSpec> {
    let expr = parse_expr(text, dim)?;
    LagrangianSpec::expression(expr, dim)
}

/// Sorted coordinate indices into `(x^1..x^n, y^1..y^n)`.
pub type MultiIndex = Vec<usize>;

/// Enumerates sorted multi-indices of exactly `order` over `count` coordinates.
pub fn multi_indices(count: usize, order: usize) -> Vec<MultiIndex> {
    fn rec(
        count: usize,
        order: usize,
        start: usize,
        cur: &mut Vec<usize>,
        out: &mut Vec<MultiIndex>,
    ) {
        if cur.len() == order {
            out.push(cur.clone());
            return;
        }
        for c in start..count {
            cur.push(c);
            rec(count, order, c, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(count, order, 0, &mut Vec::with_capacity(order), &mut out);
    out
}

pub(crate) struct JetTape {
    /// All multi-indices of order 0..=3, in the order the tape emits them.
    pub indices: Vec<MultiIndex>,
    pub tape: Tape,
}

pub(crate) struct SymbolicSemispray {
    /// `S(L)` as an expression.
    pub semispray_derivative: Expr,
    /// `½ ∂S(L)/∂y^i`, one per fiber coordinate.
    pub half_fiber_gradient: Vec<Expr>,
    pub tape: Tape,
}

/// A scalar field `L(x, y)` on the tangent bundle, backed by an expression,
/// with lazily built and memoized exact partial derivatives.
///
/// Safe to share between threads: the derivative cache is behind a mutex and
/// the compiled tapes are built once.
pub struct LagrangianField {
    dim: usize,
    expr: Expr,
    label: String,
    partials: Mutex<HashMap<MultiIndex, Expr>>,
    jet_tape: OnceLock<Arc<JetTape>>,
    symbolic: OnceLock<Arc<SymbolicSemispray>>,
}

impl fmt::Debug for LagrangianField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("LagrangianField")
            .field("dim", &self.dim)
            .field("label", &self.label)
            .field("expr", &self.expr)
            .finish()
    }
}

impl Clone for LagrangianField {
    fn clone(&self) -> Self {
        LagrangianField {
            dim: self.dim,
            expr: self.expr.clone(),
            label: self.label.clone(),
            partials: Mutex::new(self.partials.lock().unwrap().clone()),
            jet_tape: self.jet_tape.clone(),
            symbolic: self.symbolic.clone(),
        }
    }
}

impl LagrangianField {
    pub fn new(expr: Expr, dim: usize) -> Result<Self> {
        LagrangianSpec::expression(expr.clone(), dim)?;
        Ok(LagrangianField {
            dim,
            label: expr.to_string(),
            expr,
            partials: Mutex::new(HashMap::new()),
            jet_tape: OnceLock::new(),
            symbolic: OnceLock::new(),
        })
    }

    pub fn parse(text: &str, dim: usize) -> Result<Self> {
        parse_lagrangian(text, dim)?.build()
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn expr(&self) -> &Expr {
        &self.expr
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// `c·L` as a new field.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        LagrangianField::new(
            Expr::product(vec![Expr::constant(c), self.expr.clone()]),
            self.dim,
        )
    }

    pub fn value(&self, u: &TangentPoint) -> Result<f64> {
        self.check_point(u)?;
        self.expr.evaluate(u)
    }

    pub(crate) fn check_point(&self, u: &TangentPoint) -> Result<()> {
        if u.dim() != self.dim {
            return Err(Error::invalid(format!(
                "point has dimension {}, Lagrangian has dimension {}",
                u.dim(),
                self.dim
            )));
        }
        Ok(())
    }

    /// Exact partial derivative for a multi-index over stacked coordinates.
    /// The index order is irrelevant; derivatives are memoized by the sorted
    /// multi-index and built from their lower-order prefix.
    pub fn partial(&self, index: &[usize]) -> Expr {
        let mut key = index.to_vec();
        key.sort_unstable();
        assert!(
            key.iter().all(|&c| c < 2 * self.dim),
            "coordinate index out of range"
        );
        self.partial_sorted(&key)
    }

    fn partial_sorted(&self, key: &[usize]) -> Expr {
        if key.is_empty() {
            return self.expr.clone();
        }
        if let Some(e) = self.partials.lock().unwrap().get(key) {
            return e.clone();
        }
        let (last, prefix) = key.split_last().unwrap();
        let lower = self.partial_sorted(prefix);
        let d = simplify(&differentiate(
            &lower,
            Var::from_coordinate(*last, self.dim),
        ));
        self.partials
            .lock()
            .unwrap()
            .entry(key.to_vec())
            .or_insert(d)
            .clone()
    }

    pub fn partial_var(&self, vars: &[Var]) -> Expr {
        let idx: Vec<usize> = vars.iter().map(|v| v.coordinate(self.dim)).collect();
        self.partial(&idx)
    }

    pub(crate) fn jet_tape(&self) -> Arc<JetTape> {
        self.jet_tape
            .get_or_init(|| {
                let count = 2 * self.dim;
                let indices: Vec<MultiIndex> =
                    (0..=3).flat_map(|k| multi_indices(count, k)).collect();
                let exprs: Vec<Expr> = indices.iter().map(|m| self.partial_sorted(m)).collect();
                Arc::new(JetTape {
                    tape: Tape::compile(&exprs),
                    indices,
                })
            })
            .clone()
    }

    /// `S(L)` as an expression in `x, y`.
    pub fn semispray_derivative_expr(&self) -> Expr {
        self.symbolic_semispray().semispray_derivative.clone()
    }

    /// `½ ∂S(L)/∂y^i` as expressions.
    pub fn half_fiber_gradient_exprs(&self) -> Vec<Expr> {
        self.symbolic_semispray().half_fiber_gradient.clone()
    }

    pub(crate) fn symbolic_semispray(&self) -> Arc<SymbolicSemispray> {
        self.symbolic
            .get_or_init(|| Arc::new(crate::geometry::symbolic::build(self)))
            .clone()
    }
}
