use std::fmt;
use std::ops;
use std::sync::Arc;

/// A coordinate on the tangent bundle. Indices are zero-based internally and
/// printed one-based (`x1`, `y1`, ...).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Var {
    /// Base coordinate x^i.
    Base(usize),
    /// Fiber coordinate y^i.
    Fiber(usize),
}

impl Var {
    pub fn index(self) -> usize {
        match self {
            Var::Base(i) | Var::Fiber(i) => i,
        }
    }

    /// Position in the stacked coordinate vector `(x^1..x^n, y^1..y^n)`.
    pub fn coordinate(self, dim: usize) -> usize {
        match self {
            Var::Base(i) => i,
            Var::Fiber(i) => dim + i,
        }
    }

    pub fn from_coordinate(coord: usize, dim: usize) -> Var {
        if coord < dim {
            Var::Base(coord)
        } else {
            Var::Fiber(coord - dim)
        }
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Var::Base(i) => write!(f, "x{}", i + 1),
            Var::Fiber(i) => write!(f, "y{}", i + 1),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Func {
    Neg,
    Sin,
    Cos,
    Exp,
    Log,
    Sqrt,
}

impl Func {
    pub fn name(self) -> &'static str {
        match self {
            Func::Neg => "neg",
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sqrt => "sqrt",
        }
    }

    pub fn from_name(name: &str) -> Option<Func> {
        Some(match name {
            "neg" => Func::Neg,
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "exp" => Func::Exp,
            "log" => Func::Log,
            "sqrt" => Func::Sqrt,
            _ => return None,
        })
    }
}

/// Node of an expression tree. Children are shared, so derivative trees reuse
/// subexpressions of their source instead of copying them.
#[derive(Debug, Clone, PartialEq)]
pub enum ExprNode {
    Const(f64),
    Var(Var),
    Sum(Vec<Expr>),
    Product(Vec<Expr>),
    Quotient(Expr, Expr),
    /// Base raised to a constant exponent.
    Power(Expr, f64),
    Unary(Func, Expr),
}

/// Immutable, cheaply clonable handle to an expression tree.
#[derive(Clone, PartialEq)]
pub struct Expr(Arc<ExprNode>);

impl Expr {
    pub fn new(node: ExprNode) -> Self {
        Expr(Arc::new(node))
    }

    pub fn node(&self) -> &ExprNode {
        &self.0
    }

    pub(crate) fn ptr(&self) -> *const ExprNode {
        Arc::as_ptr(&self.0)
    }

    pub fn constant(c: f64) -> Self {
        Expr::new(ExprNode::Const(c))
    }

    pub fn zero() -> Self {
        Expr::constant(0.0)
    }

    pub fn one() -> Self {
        Expr::constant(1.0)
    }

    pub fn var(v: Var) -> Self {
        Expr::new(ExprNode::Var(v))
    }

    /// x^{i+1} for zero-based `i`.
    pub fn base(i: usize) -> Self {
        Expr::var(Var::Base(i))
    }

    /// y^{i+1} for zero-based `i`.
    pub fn fiber(i: usize) -> Self {
        Expr::var(Var::Fiber(i))
    }

    pub fn sum(terms: Vec<Expr>) -> Self {
        Expr::new(ExprNode::Sum(terms))
    }

    pub fn product(factors: Vec<Expr>) -> Self {
        Expr::new(ExprNode::Product(factors))
    }

    pub fn quotient(num: Expr, den: Expr) -> Self {
        Expr::new(ExprNode::Quotient(num, den))
    }

    pub fn powf(&self, exponent: f64) -> Self {
        Expr::new(ExprNode::Power(self.clone(), exponent))
    }

    pub fn apply(func: Func, arg: Expr) -> Self {
        Expr::new(ExprNode::Unary(func, arg))
    }

    pub fn as_const(&self) -> Option<f64> {
        match self.node() {
            ExprNode::Const(c) => Some(*c),
            _ => None,
        }
    }

    pub fn is_const(&self, value: f64) -> bool {
        self.as_const() == Some(value)
    }

    /// Visits every variable referenced by the tree.
    pub fn for_each_var(&self, f: &mut impl FnMut(Var)) {
        match self.node() {
            ExprNode::Const(_) => {}
            ExprNode::Var(v) => f(*v),
            ExprNode::Sum(xs) | ExprNode::Product(xs) => xs.iter().for_each(|x| x.for_each_var(f)),
            ExprNode::Quotient(a, b) => {
                a.for_each_var(f);
                b.for_each_var(f);
            }
            ExprNode::Power(a, _) | ExprNode::Unary(_, a) => a.for_each_var(f),
        }
    }

    /// Largest zero-based variable index used, if any variable occurs.
    pub fn max_index(&self) -> Option<usize> {
        let mut max = None;
        self.for_each_var(&mut |v| max = max.max(Some(v.index())));
        max
    }

    /// True if the tree mentions no fiber coordinate.
    pub fn is_base_only(&self) -> bool {
        let mut base_only = true;
        self.for_each_var(&mut |v| base_only &= matches!(v, Var::Base(_)));
        base_only
    }

    /// Number of distinct nodes (shared subtrees counted once).
    pub fn node_count(&self) -> usize {
        fn walk(e: &Expr, seen: &mut std::collections::HashSet<*const ExprNode>) {
            if !seen.insert(e.ptr()) {
                return;
            }
            match e.node() {
                ExprNode::Const(_) | ExprNode::Var(_) => {}
                ExprNode::Sum(xs) | ExprNode::Product(xs) => xs.iter().for_each(|x| walk(x, seen)),
                ExprNode::Quotient(a, b) => {
                    walk(a, seen);
                    walk(b, seen);
                }
                ExprNode::Power(a, _) | ExprNode::Unary(_, a) => walk(a, seen),
            }
        }
        let mut seen = std::collections::HashSet::new();
        walk(self, &mut seen);
        seen.len()
    }

    fn precedence(&self) -> u8 {
        match self.node() {
            ExprNode::Sum(_) => 1,
            ExprNode::Product(_) | ExprNode::Quotient(..) => 2,
            ExprNode::Unary(Func::Neg, _) => 3,
            ExprNode::Power(..) => 4,
            ExprNode::Const(c) if *c < 0.0 || c.is_sign_negative() => 3,
            _ => 5,
        }
    }
}

impl From<f64> for Expr {
    fn from(c: f64) -> Self {
        Expr::constant(c)
    }
}

impl From<Var> for Expr {
    fn from(v: Var) -> Self {
        Expr::var(v)
    }
}

impl ops::Add for Expr {
    type Output = Expr;
    fn add(self, rhs: Expr) -> Expr {
        Expr::sum(vec![self, rhs])
    }
}

impl ops::Sub for Expr {
    type Output = Expr;
    fn sub(self, rhs: Expr) -> Expr {
        Expr::sum(vec![self, -rhs])
    }
}

impl ops::Mul for Expr {
    type Output = Expr;
    fn mul(self, rhs: Expr) -> Expr {
        Expr::product(vec![self, rhs])
    }
}

impl ops::Div for Expr {
    type Output = Expr;
    fn div(self, rhs: Expr) -> Expr {
        Expr::quotient(self, rhs)
    }
}

impl ops::Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::apply(Func::Neg, self)
    }
}

/// Shortest round-tripping text; integral values print without a fraction.
fn number(c: f64) -> String {
    if c.fract() == 0.0 && c.abs() < 1e15 {
        format!("{c}")
    } else {
        format!("{c:?}")
    }
}

fn write_const(f: &mut fmt::Formatter<'_>, c: f64) -> fmt::Result {
    if c.is_sign_negative() {
        write!(f, "-{}", number(-c))
    } else {
        f.write_str(&number(c))
    }
}

fn write_child(f: &mut fmt::Formatter<'_>, child: &Expr, min_prec: u8) -> fmt::Result {
    if child.precedence() < min_prec {
        write!(f, "({child})")
    } else {
        write!(f, "{child}")
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.node() {
            ExprNode::Const(c) => write_const(f, *c),
            ExprNode::Var(v) => write!(f, "{v}"),
            ExprNode::Sum(terms) => {
                if terms.is_empty() {
                    return write!(f, "0");
                }
                for (k, t) in terms.iter().enumerate() {
                    if k > 0 {
                        write!(f, " + ")?;
                    }
                    write_child(f, t, 2)?;
                }
                Ok(())
            }
            ExprNode::Product(factors) => {
                if factors.is_empty() {
                    return write!(f, "1");
                }
                for (k, t) in factors.iter().enumerate() {
                    if k > 0 {
                        write!(f, "*")?;
                    }
                    // Left operand may be a negation: `-a*b` parses as `(-a)*b`.
                    write_child(f, t, if k == 0 { 3 } else { 4 })?;
                }
                Ok(())
            }
            ExprNode::Quotient(a, b) => {
                write_child(f, a, 3)?;
                write!(f, " / ")?;
                write_child(f, b, 4)
            }
            ExprNode::Power(base, e) => {
                write_child(f, base, 5)?;
                if e.is_sign_negative() {
                    write!(f, "^(")?;
                    write_const(f, *e)?;
                    write!(f, ")")
                } else {
                    write!(f, "^{}", number(*e))
                }
            }
            ExprNode::Unary(Func::Neg, a) => {
                write!(f, "-")?;
                write_child(f, a, 4)
            }
            ExprNode::Unary(func, a) => write!(f, "{}({a})", func.name()),
        }
    }
}

impl fmt::Debug for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Expr({self})")
    }
}
