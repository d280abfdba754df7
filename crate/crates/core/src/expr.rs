//! Scalar coefficient functions of `t`.
//!
//! Coefficients are written in a small closed grammar:
//!
//! ```text
//! expr  := term (('+' | '-') term)*
//! term  := unary (('*' | '/') unary)*
//! unary := '-' unary | power
//! power := atom ('^' unary)?
//! atom  := number | 't' | name | name '(' expr (',' expr)* ')' | '(' expr ')'
//! ```
//!
//! Functions are `sin`, `cos`, `exp`, `abs`, `sqrt` (one argument) and `min`,
//! `max` (two arguments). `pi` is a built-in constant. Any other name must be
//! bound in the parameter table passed to [`parse_with`]; bound names are
//! replaced by constants, so evaluation never looks anything up.
//!
//! ```
//! use matosc::expr::{parse, parse_with, Params};
//!
//! let e = parse("max(sin(t), 0)").unwrap();
//! assert_eq!(e.eval(std::f64::consts::FRAC_PI_2).unwrap(), 1.0);
//!
//! let mut params = Params::new();
//! params.insert("lambda".into(), 2.0);
//! let e = parse_with("lambda*sin(t)", &params).unwrap();
//! assert!((e.eval(0.5).unwrap() - 2.0 * 0.5f64.sin()).abs() < 1e-15);
//! ```

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;

use thiserror::Error;

/// Named constants substituted at parse time.
pub type Params = BTreeMap<String, f64>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnaryOp {
    Neg,
    Sin,
    Cos,
    Exp,
    Abs,
    Sqrt,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinaryOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
    Min,
    Max,
}

/// Expression tree for a scalar function of time.
#[derive(Debug, Clone, PartialEq)]
pub enum ExprNode {
    Const(f64),
    Time,
    Unary(UnaryOp, Box<ExprNode>),
    Binary(BinaryOp, Box<ExprNode>, Box<ExprNode>),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParseError {
    #[error("syntax error at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("unknown identifier `{name}` at byte {offset}")]
    UnknownIdentifier { name: String, offset: usize },
    #[error("`{name}` at byte {offset} takes {expected} argument(s), found {found}")]
    Arity {
        name: String,
        offset: usize,
        expected: usize,
        found: usize,
    },
}

impl ParseError {
    pub fn offset(&self) -> usize {
        match self {
            ParseError::Syntax { offset, .. }
            | ParseError::UnknownIdentifier { offset, .. }
            | ParseError::Arity { offset, .. } => *offset,
        }
    }
}

/// Domain error raised while evaluating; `expr` is the offending subexpression.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("division by zero in `{expr}` at t = {t}")]
    DivisionByZero { expr: String, t: f64 },
    #[error("square root of a negative number in `{expr}` at t = {t}")]
    NegativeSqrt { expr: String, t: f64 },
    #[error("invalid power in `{expr}` at t = {t}")]
    InvalidPow { expr: String, t: f64 },
    #[error("non-finite value in `{expr}` at t = {t}")]
    NonFinite { expr: String, t: f64 },
}

pub fn parse(source: &str) -> Result<ExprNode, ParseError> {
    parse_with(source, &Params::new())
}

pub fn parse_with(source: &str, params: &Params) -> Result<ExprNode, ParseError> {
    let tokens = lex(source)?;
    let mut parser = Parser {
        tokens,
        pos: 0,
        params,
    };
    let expr = parser.expr()?;
    match parser.peek() {
        Tok::End => Ok(expr),
        _ => Err(parser.unexpected("end of input")),
    }
}

impl ExprNode {
    pub fn constant(value: f64) -> Self {
        ExprNode::Const(value)
    }

    pub fn unary(op: UnaryOp, child: ExprNode) -> Self {
        ExprNode::Unary(op, Box::new(child))
    }

    pub fn binary(op: BinaryOp, left: ExprNode, right: ExprNode) -> Self {
        ExprNode::Binary(op, Box::new(left), Box::new(right))
    }

    /// True if the tree never reads `t`.
    pub fn is_time_independent(&self) -> bool {
        match self {
            ExprNode::Const(_) => true,
            ExprNode::Time => false,
            ExprNode::Unary(_, c) => c.is_time_independent(),
            ExprNode::Binary(_, l, r) => l.is_time_independent() && r.is_time_independent(),
        }
    }

    /// True for a literal zero constant.
    pub fn is_zero_literal(&self) -> bool {
        matches!(self, ExprNode::Const(v) if *v == 0.0)
    }

    pub fn eval(&self, t: f64) -> Result<f64, EvalError> {
        let v = self.eval_inner(t)?;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(EvalError::NonFinite {
                expr: self.to_string(),
                t,
            })
        }
    }

    fn eval_inner(&self, t: f64) -> Result<f64, EvalError> {
        match self {
            ExprNode::Const(v) => Ok(*v),
            ExprNode::Time => Ok(t),
            ExprNode::Unary(op, child) => {
                let x = child.eval_inner(t)?;
                Ok(match op {
                    UnaryOp::Neg => -x,
                    UnaryOp::Sin => x.sin(),
                    UnaryOp::Cos => x.cos(),
                    UnaryOp::Exp => x.exp(),
                    UnaryOp::Abs => x.abs(),
                    UnaryOp::Sqrt => {
                        if x < 0.0 {
                            return Err(EvalError::NegativeSqrt {
                                expr: self.to_string(),
                                t,
                            });
                        }
                        x.sqrt()
                    }
                })
            }
            ExprNode::Binary(op, left, right) => {
                let a = left.eval_inner(t)?;
                let b = right.eval_inner(t)?;
                Ok(match op {
                    BinaryOp::Add => a + b,
                    BinaryOp::Sub => a - b,
                    BinaryOp::Mul => a * b,
                    BinaryOp::Div => {
                        if b == 0.0 {
                            return Err(EvalError::DivisionByZero {
                                expr: self.to_string(),
                                t,
                            });
                        }
                        a / b
                    }
                    BinaryOp::Pow => {
                        if (a < 0.0 && b.fract() != 0.0) || (a == 0.0 && b < 0.0) {
                            return Err(EvalError::InvalidPow {
                                expr: self.to_string(),
                                t,
                            });
                        }
                        a.powf(b)
                    }
                    BinaryOp::Min => a.min(b),
                    BinaryOp::Max => a.max(b),
                })
            }
        }
    }
}

// Printing is fully parenthesised so that `parse(print(e))` reproduces `e`.
impl fmt::Display for ExprNode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExprNode::Const(v) => {
                if v.is_sign_negative() {
                    write!(f, "(-{})", -v)
                } else {
                    write!(f, "{v}")
                }
            }
            ExprNode::Time => f.write_str("t"),
            ExprNode::Unary(UnaryOp::Neg, c) => write!(f, "(-{c})"),
            ExprNode::Unary(op, c) => {
                let name = match op {
                    UnaryOp::Sin => "sin",
                    UnaryOp::Cos => "cos",
                    UnaryOp::Exp => "exp",
                    UnaryOp::Abs => "abs",
                    UnaryOp::Sqrt => "sqrt",
                    UnaryOp::Neg => unreachable!(),
                };
                write!(f, "{name}({c})")
            }
            ExprNode::Binary(op, l, r) => match op {
                BinaryOp::Add => write!(f, "({l} + {r})"),
                BinaryOp::Sub => write!(f, "({l} - {r})"),
                BinaryOp::Mul => write!(f, "({l} * {r})"),
                BinaryOp::Div => write!(f, "({l} / {r})"),
                BinaryOp::Pow => write!(f, "({l} ^ {r})"),
                BinaryOp::Min => write!(f, "min({l}, {r})"),
                BinaryOp::Max => write!(f, "max({l}, {r})"),
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    Comma,
    End,
}

fn lex(src: &str) -> Result<Vec<(Tok, usize)>, ParseError> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut chars = src.char_indices().peekable();
    while let Some(&(i, c)) = chars.peek() {
        if c.is_whitespace() {
            chars.next();
            continue;
        }
        let single = match c {
            '+' => Some(Tok::Plus),
            '-' => Some(Tok::Minus),
            '*' => Some(Tok::Star),
            '/' => Some(Tok::Slash),
            '^' => Some(Tok::Caret),
            '(' => Some(Tok::LParen),
            ')' => Some(Tok::RParen),
            ',' => Some(Tok::Comma),
            _ => None,
        };
        if let Some(tok) = single {
            out.push((tok, i));
            chars.next();
            continue;
        }
        if c.is_ascii_digit() || c == '.' {
            let mut end = i;
            while end < bytes.len() && (bytes[end].is_ascii_digit() || bytes[end] == b'.') {
                end += 1;
            }
            if end < bytes.len() && (bytes[end] == b'e' || bytes[end] == b'E') {
                let mut k = end + 1;
                if k < bytes.len() && (bytes[k] == b'+' || bytes[k] == b'-') {
                    k += 1;
                }
                if k < bytes.len() && bytes[k].is_ascii_digit() {
                    while k < bytes.len() && bytes[k].is_ascii_digit() {
                        k += 1;
                    }
                    end = k;
                }
            }
            let text = &src[i..end];
            let value: f64 = text.parse().map_err(|_| ParseError::Syntax {
                offset: i,
                message: format!("malformed number `{text}`"),
            })?;
            if !value.is_finite() {
                return Err(ParseError::Syntax {
                    offset: i,
                    message: format!("number `{text}` out of range"),
                });
            }
            out.push((Tok::Num(value), i));
            while chars.peek().is_some_and(|&(j, _)| j < end) {
                chars.next();
            }
            continue;
        }
        if c.is_alphabetic() || c == '_' {
            let mut end = i;
            while let Some(&(j, d)) = chars.peek() {
                if d.is_alphanumeric() || d == '_' {
                    end = j + d.len_utf8();
                    chars.next();
                } else {
                    break;
                }
            }
            out.push((Tok::Ident(src[i..end].to_string()), i));
            continue;
        }
        return Err(ParseError::Syntax {
            offset: i,
            message: format!("unexpected character `{c}`"),
        });
    }
    out.push((Tok::End, src.len()));
    Ok(out)
}

struct Parser<'a> {
    tokens: Vec<(Tok, usize)>,
    pos: usize,
    params: &'a Params,
}

impl Parser<'_> {
    fn peek(&self) -> &Tok {
        &self.tokens[self.pos].0
    }

    fn offset(&self) -> usize {
        self.tokens[self.pos].1
    }

    fn bump(&mut self) -> (Tok, usize) {
        let tok = self.tokens[self.pos].clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        tok
    }

    fn unexpected(&self, wanted: &str) -> ParseError {
        let found = match self.peek() {
            Tok::Num(v) => format!("number {v}"),
            Tok::Ident(s) => format!("`{s}`"),
            Tok::End => "end of input".to_string(),
            other => format!("{other:?}"),
        };
        ParseError::Syntax {
            offset: self.offset(),
            message: format!("expected {wanted}, found {found}"),
        }
    }

    fn expr(&mut self) -> Result<ExprNode, ParseError> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek() {
                Tok::Plus => BinaryOp::Add,
                Tok::Minus => BinaryOp::Sub,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.term()?;
            lhs = ExprNode::binary(op, lhs, rhs);
        }
    }

    fn term(&mut self) -> Result<ExprNode, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek() {
                Tok::Star => BinaryOp::Mul,
                Tok::Slash => BinaryOp::Div,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.unary()?;
            lhs = ExprNode::binary(op, lhs, rhs);
        }
    }

    fn unary(&mut self) -> Result<ExprNode, ParseError> {
        if *self.peek() == Tok::Minus {
            self.bump();
            let child = self.unary()?;
            // Negated literals fold into constants.
            return Ok(match child {
                ExprNode::Const(v) => ExprNode::Const(-v),
                other => ExprNode::unary(UnaryOp::Neg, other),
            });
        }
        self.power()
    }

    fn power(&mut self) -> Result<ExprNode, ParseError> {
        let base = self.atom()?;
        if *self.peek() == Tok::Caret {
            self.bump();
            let exponent = self.unary()?;
            return Ok(ExprNode::binary(BinaryOp::Pow, base, exponent));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<ExprNode, ParseError> {
        let offset = self.offset();
        match self.peek().clone() {
            Tok::Num(v) => {
                self.bump();
                Ok(ExprNode::Const(v))
            }
            Tok::LParen => {
                self.bump();
                let inner = self.expr()?;
                if *self.peek() != Tok::RParen {
                    return Err(self.unexpected("`)`"));
                }
                self.bump();
                Ok(inner)
            }
            Tok::Ident(name) => {
                self.bump();
                if *self.peek() == Tok::LParen {
                    self.call(name, offset)
                } else {
                    self.name(name, offset)
                }
            }
            _ => Err(self.unexpected("a number, `t`, a name or `(`")),
        }
    }

    fn name(&self, name: String, offset: usize) -> Result<ExprNode, ParseError> {
        if name == "t" {
            return Ok(ExprNode::Time);
        }
        if let Some(&v) = self.params.get(&name) {
            return Ok(ExprNode::Const(v));
        }
        if name == "pi" {
            return Ok(ExprNode::Const(PI));
        }
        if function_arity(&name).is_some() {
            return Err(ParseError::Syntax {
                offset,
                message: format!("function `{name}` must be called with arguments"),
            });
        }
        Err(ParseError::UnknownIdentifier { name, offset })
    }

    fn call(&mut self, name: String, offset: usize) -> Result<ExprNode, ParseError> {
        let Some(expected) = function_arity(&name) else {
            return Err(ParseError::UnknownIdentifier { name, offset });
        };
        self.bump(); // '('
        let mut args = vec![self.expr()?];
        while *self.peek() == Tok::Comma {
            self.bump();
            args.push(self.expr()?);
        }
        if *self.peek() != Tok::RParen {
            return Err(self.unexpected("`,` or `)`"));
        }
        self.bump();
        if args.len() != expected {
            return Err(ParseError::Arity {
                name,
                offset,
                expected,
                found: args.len(),
            });
        }
        let mut args = args.into_iter();
        let first = args.next().unwrap();
        let node = match name.as_str() {
            "sin" => ExprNode::unary(UnaryOp::Sin, first),
            "cos" => ExprNode::unary(UnaryOp::Cos, first),
            "exp" => ExprNode::unary(UnaryOp::Exp, first),
            "abs" => ExprNode::unary(UnaryOp::Abs, first),
            "sqrt" => ExprNode::unary(UnaryOp::Sqrt, first),
            "min" => ExprNode::binary(BinaryOp::Min, first, args.next().unwrap()),
            "max" => ExprNode::binary(BinaryOp::Max, first, args.next().unwrap()),
            _ => unreachable!(),
        };
        Ok(node)
    }
}

fn function_arity(name: &str) -> Option<usize> {
    match name {
        "sin" | "cos" | "exp" | "abs" | "sqrt" => Some(1),
        "min" | "max" => Some(2),
        _ => None,
    }
}
