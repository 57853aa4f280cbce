//! Recursive-descent parser for the Lagrangian expression language.
//!
//! ```text
//! expr     := term (('+' | '-') term)*
//! term     := unary (('*' | '/') unary)*
//! unary    := ('-' | '+') unary | power
//! power    := primary ('^' exponent)*
//! exponent := ('-' | '+')? number | '(' expr ')'      (must be constant)
//! primary  := number | 'x'<k> | 'y'<k> | func '(' expr ')' | '(' expr ')'
//! func     := 'sin' | 'cos' | 'exp' | 'log' | 'sqrt' | 'neg'
//! number   := digits ('.' digits?)? (('e' | 'E') ('+' | '-')? digits)?
//!           | '.' digits (('e' | 'E') ('+' | '-')? digits)?
//! ```
//!
//! Variable indices are one-based and must not exceed the declared dimension.

use std::fmt;

use thiserror::Error;

use super::ast::{Expr, ExprNode, Func, Var};
use super::simplify::simplify;

#[derive(Debug, Clone, PartialEq, Error)]
#[error("parse error at position {position}: {kind}")]
pub struct ParseError {
    /// Byte offset into the source text.
    pub position: usize,
    pub kind: ParseErrorKind,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ParseErrorKind {
    UnexpectedChar(char),
    UnexpectedToken { found: String, expected: String },
    UnexpectedEnd { expected: String },
    InvalidNumber(String),
    IndexOutOfRange { name: String, dim: usize },
    UnknownFunction(String),
    UnknownIdentifier(String),
    VariableExponent,
    InvalidDimension,
}

impl fmt::Display for ParseErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParseErrorKind::UnexpectedChar(c) => write!(f, "unexpected character '{c}'"),
            ParseErrorKind::UnexpectedToken { found, expected } => {
                write!(f, "expected {expected}, found '{found}'")
            }
            ParseErrorKind::UnexpectedEnd { expected } => {
                write!(f, "unexpected end of input, expected {expected}")
            }
            ParseErrorKind::InvalidNumber(s) => write!(f, "invalid number literal '{s}'"),
            ParseErrorKind::IndexOutOfRange { name, dim } => {
                write!(f, "variable '{name}' out of range for dimension {dim}")
            }
            ParseErrorKind::UnknownFunction(name) => write!(f, "unknown function '{name}'"),
            ParseErrorKind::UnknownIdentifier(name) => write!(f, "unknown identifier '{name}'"),
            ParseErrorKind::VariableExponent => write!(f, "exponent must be a constant"),
            ParseErrorKind::InvalidDimension => write!(f, "dimension must be at least 1"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Number(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
}

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Token::Number(x) => write!(f, "{x}"),
            Token::Ident(s) => write!(f, "{s}"),
            Token::Plus => write!(f, "+"),
            Token::Minus => write!(f, "-"),
            Token::Star => write!(f, "*"),
            Token::Slash => write!(f, "/"),
            Token::Caret => write!(f, "^"),
            Token::LParen => write!(f, "("),
            Token::RParen => write!(f, ")"),
        }
    }
}

fn tokenize(src: &str) -> Result<Vec<(usize, Token)>, ParseError> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        let tok = match c {
            '+' => Token::Plus,
            '-' => Token::Minus,
            '*' => Token::Star,
            '/' => Token::Slash,
            '^' => Token::Caret,
            '(' => Token::LParen,
            ')' => Token::RParen,
            '0'..='9' | '.' => {
                while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                    i += 1;
                }
                if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                    let mut j = i + 1;
                    if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                        j += 1;
                    }
                    if j < bytes.len() && bytes[j].is_ascii_digit() {
                        while j < bytes.len() && bytes[j].is_ascii_digit() {
                            j += 1;
                        }
                        i = j;
                    }
                }
                let text = &src[start..i];
                let value: f64 = text.parse().map_err(|_| ParseError {
                    position: start,
                    kind: ParseErrorKind::InvalidNumber(text.to_string()),
                })?;
                out.push((start, Token::Number(value)));
                continue;
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                out.push((start, Token::Ident(src[start..i].to_string())));
                continue;
            }
            _ => {
                let ch = src[start..].chars().next().unwrap_or(c);
                return Err(ParseError {
                    position: start,
                    kind: ParseErrorKind::UnexpectedChar(ch),
                });
            }
        };
        out.push((start, tok));
        i += 1;
    }
    Ok(out)
}

struct Parser {
    tokens: Vec<(usize, Token)>,
    pos: usize,
    end: usize,
    dim: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos).map(|(_, t)| t)
    }

    fn offset(&self) -> usize {
        self.tokens.get(self.pos).map_or(self.end, |(p, _)| *p)
    }

    fn bump(&mut self) -> Option<(usize, Token)> {
        let t = self.tokens.get(self.pos).cloned();
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn error(&self, expected: &str) -> ParseError {
        match self.tokens.get(self.pos) {
            Some((p, t)) => ParseError {
                position: *p,
                kind: ParseErrorKind::UnexpectedToken {
                    found: t.to_string(),
                    expected: expected.to_string(),
                },
            },
            None => ParseError {
                position: self.end,
                kind: ParseErrorKind::UnexpectedEnd {
                    expected: expected.to_string(),
                },
            },
        }
    }

    fn expect(&mut self, tok: Token, expected: &str) -> Result<(), ParseError> {
        if self.peek() == Some(&tok) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.error(expected))
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut terms = vec![self.term()?];
        loop {
            match self.peek() {
                Some(Token::Plus) => {
                    self.pos += 1;
                    terms.push(self.term()?);
                }
                Some(Token::Minus) => {
                    self.pos += 1;
                    terms.push(-self.term()?);
                }
                _ => break,
            }
        }
        Ok(if terms.len() == 1 {
            terms.pop().unwrap()
        } else {
            Expr::sum(terms)
        })
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut acc = self.unary()?;
        let mut factors: Vec<Expr> = Vec::new();
        loop {
            match self.peek() {
                Some(Token::Star) => {
                    self.pos += 1;
                    factors.push(self.unary()?);
                }
                Some(Token::Slash) => {
                    self.pos += 1;
                    let den = self.unary()?;
                    // Left associativity: everything so far is the numerator.
                    if !factors.is_empty() {
                        let mut all = vec![acc];
                        all.append(&mut factors);
                        acc = Expr::product(all);
                    }
                    acc = Expr::quotient(acc, den);
                }
                _ => break,
            }
        }
        if factors.is_empty() {
            Ok(acc)
        } else {
            let mut all = vec![acc];
            all.append(&mut factors);
            Ok(Expr::product(all))
        }
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        match self.peek() {
            Some(Token::Minus) => {
                self.pos += 1;
                Ok(-self.unary()?)
            }
            Some(Token::Plus) => {
                self.pos += 1;
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let mut base = self.primary()?;
        while self.peek() == Some(&Token::Caret) {
            self.pos += 1;
            let e = self.exponent()?;
            base = base.powf(e);
        }
        Ok(base)
    }

    fn exponent(&mut self) -> Result<f64, ParseError> {
        let start = self.offset();
        let sign = match self.peek() {
            Some(Token::Minus) => {
                self.pos += 1;
                -1.0
            }
            Some(Token::Plus) => {
                self.pos += 1;
                1.0
            }
            _ => 1.0,
        };
        if !matches!(
            self.peek(),
            Some(Token::Number(_) | Token::LParen | Token::Ident(_))
        ) {
            return Err(self.error("constant exponent"));
        }
        match self.bump() {
            Some((_, Token::Number(x))) => Ok(sign * x),
            Some((_, Token::LParen)) => {
                let inner = self.expr()?;
                self.expect(Token::RParen, "')'")?;
                match simplify(&inner).as_const() {
                    Some(c) => Ok(sign * c),
                    None => Err(ParseError {
                        position: start,
                        kind: ParseErrorKind::VariableExponent,
                    }),
                }
            }
            Some((p, Token::Ident(_))) => Err(ParseError {
                position: p,
                kind: ParseErrorKind::VariableExponent,
            }),
            _ => unreachable!("exponent token checked above"),
        }
    }

    fn primary(&mut self) -> Result<Expr, ParseError> {
        let Some((p, tok)) = self.bump() else {
            return Err(self.error("expression"));
        };
        match tok {
            Token::Number(x) => Ok(Expr::constant(x)),
            Token::LParen => {
                let e = self.expr()?;
                self.expect(Token::RParen, "')'")?;
                Ok(e)
            }
            Token::Ident(name) => {
                if self.peek() == Some(&Token::LParen) {
                    let func = Func::from_name(&name).ok_or(ParseError {
                        position: p,
                        kind: ParseErrorKind::UnknownFunction(name.clone()),
                    })?;
                    self.pos += 1;
                    let arg = self.expr()?;
                    self.expect(Token::RParen, "')'")?;
                    Ok(Expr::apply(func, arg))
                } else {
                    self.variable(p, &name)
                }
            }
            _ => {
                self.pos -= 1;
                Err(self.error("expression"))
            }
        }
    }

    fn variable(&self, position: usize, name: &str) -> Result<Expr, ParseError> {
        let unknown = || ParseError {
            position,
            kind: ParseErrorKind::UnknownIdentifier(name.to_string()),
        };
        let (head, digits) = name.split_at(1);
        if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
            return Err(unknown());
        }
        let make: fn(usize) -> Var = match head {
            "x" => Var::Base,
            "y" => Var::Fiber,
            _ => return Err(unknown()),
        };
        let k: usize = digits.parse().map_err(|_| unknown())?;
        if k == 0 || k > self.dim {
            return Err(ParseError {
                position,
                kind: ParseErrorKind::IndexOutOfRange {
                    name: name.to_string(),
                    dim: self.dim,
                },
            });
        }
        Ok(Expr::var(make(k - 1)))
    }
}

/// Parses `text` as an expression over `x1..xN, y1..yN` with `N = dim`.
pub fn parse_expr(text: &str, dim: usize) -> Result<Expr, ParseError> {
    if dim == 0 {
        return Err(ParseError {
            position: 0,
            kind: ParseErrorKind::InvalidDimension,
        });
    }
    let tokens = tokenize(text)?;
    let mut parser = Parser {
        tokens,
        pos: 0,
        end: text.len(),
        dim,
    };
    let e = parser.expr()?;
    if parser.pos != parser.tokens.len() {
        return Err(parser.error("operator or end of input"));
    }
    debug_assert!(!matches!(e.node(), ExprNode::Sum(v) if v.is_empty()));
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::eval::eval_slices;

    fn eval(text: &str, x: &[f64], y: &[f64]) -> f64 {
        let e = parse_expr(text, x.len()).unwrap();
        eval_slices(&e, x, y).unwrap()
    }

    #[test]
    fn precedence_and_associativity() {
        assert_eq!(eval("1 + 2*3", &[0.0], &[1.0]), 7.0);
        assert_eq!(eval("8 / 4 / 2", &[0.0], &[1.0]), 1.0);
        assert_eq!(eval("8 - 4 - 2", &[0.0], &[1.0]), 2.0);
        assert_eq!(eval("-y1^2", &[0.0], &[3.0]), -9.0);
        assert_eq!(eval("2^3^2", &[0.0], &[1.0]), 64.0);
        assert_eq!(eval("-2*3", &[0.0], &[1.0]), -6.0);
        assert_eq!(eval("2*x1/4*y1", &[2.0], &[3.0]), 3.0);
        assert_eq!(eval("y1^(-1)", &[0.0], &[4.0]), 0.25);
        assert_eq!(eval("y1^-2", &[0.0], &[2.0]), 0.25);
        assert_eq!(eval("y1^(1/2)", &[0.0], &[9.0]), 3.0);
        assert_eq!(eval("1.5e1 + .5", &[0.0], &[1.0]), 15.5);
    }

    #[test]
    fn functions() {
        let v = eval(
            "exp(log(y1)) + sqrt(x1) + sin(0) + cos(0) + neg(1)",
            &[4.0],
            &[2.0],
        );
        assert!((v - 4.0).abs() < 1e-15);
    }

    #[test]
    fn index_out_of_range() {
        let err = parse_expr("y3", 2).unwrap_err();
        assert_eq!(err.position, 0);
        assert!(matches!(
            err.kind,
            ParseErrorKind::IndexOutOfRange { dim: 2, .. }
        ));
        let err = parse_expr("x0 + y1", 2).unwrap_err();
        assert!(matches!(err.kind, ParseErrorKind::IndexOutOfRange { .. }));
    }

    #[test]
    fn unknown_names_and_syntax_errors() {
        let err = parse_expr("tan(y1)", 1).unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::UnknownFunction("tan".into()));
        let err = parse_expr("z1", 1).unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::UnknownIdentifier("z1".into()));
        let err = parse_expr("y1 + ", 1).unwrap_err();
        assert_eq!(err.position, 5);
        assert!(matches!(err.kind, ParseErrorKind::UnexpectedEnd { .. }));
        let err = parse_expr("y1 $ 2", 1).unwrap_err();
        assert_eq!(
            err,
            ParseError {
                position: 3,
                kind: ParseErrorKind::UnexpectedChar('$')
            }
        );
        let err = parse_expr("(y1", 1).unwrap_err();
        assert!(matches!(err.kind, ParseErrorKind::UnexpectedEnd { .. }));
        let err = parse_expr("y1 y1", 1).unwrap_err();
        assert_eq!(err.position, 3);
        let err = parse_expr("y1^x1", 1).unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::VariableExponent);
        let err = parse_expr("y1^(x1+1)", 1).unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::VariableExponent);
        assert!(parse_expr("1..2", 1).is_err());
        assert!(parse_expr("y1", 0).is_err());
    }

    #[test]
    fn perturbed_flat_lagrangian() {
        assert_eq!(
            eval("y1^2 + y2^2 + 2*x1*y1", &[1.0, 2.0], &[3.0, 4.0]),
            31.0
        );
    }
}
