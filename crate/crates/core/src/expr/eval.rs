use std::collections::HashMap;

use super::ast::{Expr, ExprNode, Func, Var};
use crate::error::{Error, Result};

#[derive(Debug, Clone)]
enum Op {
    Const(f64),
    Base(usize),
    Fiber(usize),
    Sum(Vec<usize>),
    Product(Vec<usize>),
    Quotient(usize, usize),
    Power(usize, f64),
    Unary(Func, usize),
}

/// A set of expressions flattened into one instruction list. Shared subtrees
/// are evaluated once per call.
#[derive(Debug, Clone)]
pub struct Tape {
    ops: Vec<Op>,
    // Source node of each op, kept for error messages.
    sources: Vec<Expr>,
    roots: Vec<usize>,
}

impl Tape {
    pub fn compile(exprs: &[Expr]) -> Tape {
        let mut tape = Tape {
            ops: Vec::new(),
            sources: Vec::new(),
            roots: Vec::with_capacity(exprs.len()),
        };
        let mut seen: HashMap<*const ExprNode, usize> = HashMap::new();
        for e in exprs {
            let slot = tape.push(e, &mut seen);
            tape.roots.push(slot);
        }
        tape
    }

    fn push(&mut self, e: &Expr, seen: &mut HashMap<*const ExprNode, usize>) -> usize {
        if let Some(&slot) = seen.get(&e.ptr()) {
            return slot;
        }
        let op = match e.node() {
            ExprNode::Const(c) => Op::Const(*c),
            ExprNode::Var(Var::Base(i)) => Op::Base(*i),
            ExprNode::Var(Var::Fiber(i)) => Op::Fiber(*i),
            ExprNode::Sum(xs) => Op::Sum(xs.iter().map(|x| self.push(x, seen)).collect()),
            ExprNode::Product(xs) => Op::Product(xs.iter().map(|x| self.push(x, seen)).collect()),
            ExprNode::Quotient(a, b) => {
                let a = self.push(a, seen);
                let b = self.push(b, seen);
                Op::Quotient(a, b)
            }
            ExprNode::Power(a, c) => Op::Power(self.push(a, seen), *c),
            ExprNode::Unary(f, a) => Op::Unary(*f, self.push(a, seen)),
        };
        self.ops.push(op);
        self.sources.push(e.clone());
        let slot = self.ops.len() - 1;
        seen.insert(e.ptr(), slot);
        slot
    }

    pub fn len(&self) -> usize {
        self.roots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.roots.is_empty()
    }

    /// Evaluates every root at `(x, y)`. Missing coordinates are an input error.
    pub fn eval(&self, x: &[f64], y: &[f64]) -> Result<Vec<f64>> {
        let mut vals = vec![0.0; self.ops.len()];
        for (k, op) in self.ops.iter().enumerate() {
            let v = match op {
                Op::Const(c) => *c,
                Op::Base(i) => *x
                    .get(*i)
                    .ok_or_else(|| Error::invalid(format!("point has no coordinate x{}", i + 1)))?,
                Op::Fiber(i) => *y
                    .get(*i)
                    .ok_or_else(|| Error::invalid(format!("point has no coordinate y{}", i + 1)))?,
                Op::Sum(xs) => xs.iter().map(|&j| vals[j]).sum(),
                Op::Product(xs) => xs.iter().map(|&j| vals[j]).product(),
                Op::Quotient(a, b) => {
                    if vals[*b] == 0.0 {
                        return Err(Error::domain(
                            self.sources[k].to_string(),
                            "division by zero",
                        ));
                    }
                    vals[*a] / vals[*b]
                }
                Op::Power(a, c) => power(vals[*a], *c)
                    .map_err(|r| Error::domain(self.sources[k].to_string(), r))?,
                Op::Unary(f, a) => unary(*f, vals[*a])
                    .map_err(|r| Error::domain(self.sources[k].to_string(), r))?,
            };
            if !v.is_finite() {
                return Err(Error::domain(
                    self.sources[k].to_string(),
                    "non-finite value",
                ));
            }
            vals[k] = v;
        }
        Ok(self.roots.iter().map(|&r| vals[r]).collect())
    }
}

pub(crate) fn power(base: f64, exponent: f64) -> std::result::Result<f64, &'static str> {
    if exponent.fract() == 0.0 && exponent.abs() <= i32::MAX as f64 {
        if base == 0.0 && exponent < 0.0 {
            return Err("zero raised to a negative power");
        }
        Ok(base.powi(exponent as i32))
    } else {
        if base < 0.0 {
            return Err("negative base with fractional exponent");
        }
        if base == 0.0 && exponent < 0.0 {
            return Err("zero raised to a negative power");
        }
        Ok(base.powf(exponent))
    }
}

pub(crate) fn unary(f: Func, a: f64) -> std::result::Result<f64, &'static str> {
    Ok(match f {
        Func::Neg => -a,
        Func::Sin => a.sin(),
        Func::Cos => a.cos(),
        Func::Exp => a.exp(),
        Func::Log => {
            if a <= 0.0 {
                return Err("log of a non-positive argument");
            }
            a.ln()
        }
        Func::Sqrt => {
            if a < 0.0 {
                return Err("sqrt of a negative argument");
            }
            a.sqrt()
        }
    })
}

/// Evaluates a single expression at coordinates `(x, y)`.
pub fn eval_slices(e: &Expr, x: &[f64], y: &[f64]) -> Result<f64> {
    Ok(Tape::compile(std::slice::from_ref(e)).eval(x, y)?[0])
}
