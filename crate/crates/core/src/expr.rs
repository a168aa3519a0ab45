//! Right-hand-side expressions `f(t, y1, .., yk)` parsed from text, so
//! problems are data rather than code.
//!
//! Grammar (whitespace-insensitive, `^` right-associative and binding tighter
//! than unary minus):
//!
//! ```text
//! expr   := term  (('+' | '-') term)*
//! term   := factor (('*' | '/') factor)*
//! factor := '-' factor | power
//! power  := atom ('^' factor)?
//! atom   := number | 't' | 'y'<index> | name '(' expr (',' expr)* ')' | '(' expr ')'
//! name   := gamma | abs | exp | log | sin | cos | sqrt | pow
//! ```

use alloc::boxed::Box;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use crate::gamma::gamma_pos;
use crate::num;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Gamma,
    Abs,
    Exp,
    Log,
    Sin,
    Cos,
    Sqrt,
    Pow,
}

impl Func {
    fn name(self) -> &'static str {
        match self {
            Func::Gamma => "gamma",
            Func::Abs => "abs",
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Sqrt => "sqrt",
            Func::Pow => "pow",
        }
    }

    fn arg_count(self) -> usize {
        match self {
            Func::Pow => 2,
            _ => 1,
        }
    }

    fn from_name(s: &str) -> Option<Func> {
        Some(match s {
            "gamma" => Func::Gamma,
            "abs" => Func::Abs,
            "exp" => Func::Exp,
            "log" => Func::Log,
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "sqrt" => Func::Sqrt,
            "pow" => Func::Pow,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

impl BinOp {
    fn symbol(self) -> char {
        match self {
            BinOp::Add => '+',
            BinOp::Sub => '-',
            BinOp::Mul => '*',
            BinOp::Div => '/',
            BinOp::Pow => '^',
        }
    }
}

#[derive(Debug, Clone)]
pub struct Node {
    /// Byte offset into the source, kept for error reporting.
    pub offset: usize,
    pub kind: Kind,
}

#[derive(Debug, Clone)]
pub enum Kind {
    Num(f64),
    T,
    /// 1-based argument index.
    Y(usize),
    Neg(Box<Node>),
    Bin(BinOp, Box<Node>, Box<Node>),
    Call(Func, Vec<Node>),
}

// Structural equality; offsets are not part of the AST identity.
impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        match (&self.kind, &other.kind) {
            (Kind::Num(a), Kind::Num(b)) => a == b,
            (Kind::T, Kind::T) => true,
            (Kind::Y(a), Kind::Y(b)) => a == b,
            (Kind::Neg(a), Kind::Neg(b)) => a == b,
            (Kind::Bin(op, a, b), Kind::Bin(oq, c, d)) => op == oq && a == c && b == d,
            (Kind::Call(f, xs), Kind::Call(g, ys)) => f == g && xs == ys,
            _ => false,
        }
    }
}

/// A parsed right-hand side with its recorded arity `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct Expression {
    arity: usize,
    root: Node,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ParseErrorKind {
    UnexpectedChar(char),
    UnexpectedEnd,
    UnknownIdentifier(String),
    ArityViolation { index: usize, arity: usize },
    BadNumber,
    WrongArgCount { func: &'static str, expected: usize, got: usize },
    TrailingInput,
}

/// Syntax error with the byte offset where it was detected.
#[derive(Debug, Clone, PartialEq)]
pub struct ParseError {
    pub offset: usize,
    pub kind: ParseErrorKind,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            ParseErrorKind::UnexpectedChar(c) => {
                write!(f, "syntax error at offset {}: unexpected '{}'", self.offset, c)
            }
            ParseErrorKind::UnexpectedEnd => {
                write!(f, "syntax error at offset {}: unexpected end of input", self.offset)
            }
            ParseErrorKind::UnknownIdentifier(s) => {
                write!(f, "unknown identifier '{}' at offset {}", s, self.offset)
            }
            ParseErrorKind::ArityViolation { index, arity } => write!(
                f,
                "argument y{} at offset {} exceeds arity {}",
                index, self.offset, arity
            ),
            ParseErrorKind::BadNumber => {
                write!(f, "malformed number at offset {}", self.offset)
            }
            ParseErrorKind::WrongArgCount { func, expected, got } => write!(
                f,
                "{} takes {} argument(s), got {} (offset {})",
                func, expected, got, self.offset
            ),
            ParseErrorKind::TrailingInput => {
                write!(f, "trailing input at offset {}", self.offset)
            }
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for ParseError {}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EvalErrorKind {
    /// Fractional power of a negative base, or zero to a negative power.
    BadPower { base: f64, exponent: f64 },
    /// gamma/log of a non-positive argument, sqrt of a negative one.
    BadArgument { func: &'static str, arg: f64 },
    /// Wrong number of `y` values supplied.
    ArityMismatch { expected: usize, got: usize },
    /// The evaluation produced NaN.
    NotANumber,
}

/// Evaluation failure carrying the offset of the offending subexpression.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalError {
    pub offset: usize,
    pub kind: EvalErrorKind,
}

impl fmt::Display for EvalError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            EvalErrorKind::BadPower { base, exponent } => write!(
                f,
                "domain error at offset {}: {}^{} is not real",
                self.offset, base, exponent
            ),
            EvalErrorKind::BadArgument { func, arg } => write!(
                f,
                "domain error at offset {}: {}({}) is undefined",
                self.offset, func, arg
            ),
            EvalErrorKind::ArityMismatch { expected, got } => {
                write!(f, "expression expects {} y-values, got {}", expected, got)
            }
            EvalErrorKind::NotANumber => {
                write!(f, "evaluation produced NaN at offset {}", self.offset)
            }
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for EvalError {}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    arity: usize,
}

impl<'a> Parser<'a> {
    fn err(&self, offset: usize, kind: ParseErrorKind) -> ParseError {
        ParseError { offset, kind }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<Node, ParseError> {
        let mut lhs = self.term()?;
        loop {
            let off = {
                self.skip_ws();
                self.pos
            };
            let op = match self.peek() {
                Some(b'+') => BinOp::Add,
                Some(b'-') => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.pos += 1;
            let rhs = self.term()?;
            lhs = Node { offset: off, kind: Kind::Bin(op, Box::new(lhs), Box::new(rhs)) };
        }
    }

    fn term(&mut self) -> Result<Node, ParseError> {
        let mut lhs = self.factor()?;
        loop {
            let off = {
                self.skip_ws();
                self.pos
            };
            let op = match self.peek() {
                Some(b'*') => BinOp::Mul,
                Some(b'/') => BinOp::Div,
                _ => return Ok(lhs),
            };
            self.pos += 1;
            let rhs = self.factor()?;
            lhs = Node { offset: off, kind: Kind::Bin(op, Box::new(lhs), Box::new(rhs)) };
        }
    }

    fn factor(&mut self) -> Result<Node, ParseError> {
        self.skip_ws();
        let off = self.pos;
        if self.eat(b'-') {
            let inner = self.factor()?;
            return Ok(Node { offset: off, kind: Kind::Neg(Box::new(inner)) });
        }
        self.power()
    }

    fn power(&mut self) -> Result<Node, ParseError> {
        let base = self.atom()?;
        self.skip_ws();
        let off = self.pos;
        if self.eat(b'^') {
            // right-associative; exponent may carry its own unary minus
            let exponent = self.factor()?;
            return Ok(Node {
                offset: off,
                kind: Kind::Bin(BinOp::Pow, Box::new(base), Box::new(exponent)),
            });
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Node, ParseError> {
        self.skip_ws();
        let off = self.pos;
        let Some(c) = self.src.get(self.pos).copied() else {
            return Err(self.err(off, ParseErrorKind::UnexpectedEnd));
        };
        if c == b'(' {
            self.pos += 1;
            let inner = self.expr()?;
            self.skip_ws();
            if !self.eat(b')') {
                return Err(match self.peek() {
                    Some(c) => self.err(self.pos, ParseErrorKind::UnexpectedChar(c as char)),
                    None => self.err(self.pos, ParseErrorKind::UnexpectedEnd),
                });
            }
            return Ok(inner);
        }
        if c.is_ascii_digit() || c == b'.' {
            return self.number(off);
        }
        if c.is_ascii_lowercase() {
            return self.identifier(off);
        }
        Err(self.err(off, ParseErrorKind::UnexpectedChar(c as char)))
    }

    fn number(&mut self, off: usize) -> Result<Node, ParseError> {
        let start = self.pos;
        while self.pos < self.src.len() && (self.src[self.pos].is_ascii_digit() || self.src[self.pos] == b'.') {
            self.pos += 1;
        }
        if self.pos < self.src.len() && (self.src[self.pos] | 0x20) == b'e' {
            let mark = self.pos;
            self.pos += 1;
            if self.pos < self.src.len() && (self.src[self.pos] == b'+' || self.src[self.pos] == b'-') {
                self.pos += 1;
            }
            if self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                    self.pos += 1;
                }
            } else {
                self.pos = mark; // 'e' was not an exponent
            }
        }
        let text = core::str::from_utf8(&self.src[start..self.pos]).unwrap();
        match text.parse::<f64>() {
            Ok(v) if v.is_finite() => Ok(Node { offset: off, kind: Kind::Num(v) }),
            _ => Err(self.err(off, ParseErrorKind::BadNumber)),
        }
    }

    fn identifier(&mut self, off: usize) -> Result<Node, ParseError> {
        let start = self.pos;
        while self.pos < self.src.len()
            && (self.src[self.pos].is_ascii_lowercase() || self.src[self.pos].is_ascii_digit())
        {
            self.pos += 1;
        }
        let name = core::str::from_utf8(&self.src[start..self.pos]).unwrap();
        if name == "t" {
            return Ok(Node { offset: off, kind: Kind::T });
        }
        if let Some(rest) = name.strip_prefix('y') {
            if !rest.is_empty() && rest.bytes().all(|b| b.is_ascii_digit()) {
                let index: usize = rest
                    .parse()
                    .map_err(|_| self.err(off, ParseErrorKind::BadNumber))?;
                if index == 0 || index > self.arity {
                    return Err(self.err(off, ParseErrorKind::ArityViolation { index, arity: self.arity }));
                }
                return Ok(Node { offset: off, kind: Kind::Y(index) });
            }
        }
        let Some(func) = Func::from_name(name) else {
            return Err(self.err(off, ParseErrorKind::UnknownIdentifier(name.to_string())));
        };
        self.skip_ws();
        if !self.eat(b'(') {
            return Err(match self.peek() {
                Some(c) => self.err(self.pos, ParseErrorKind::UnexpectedChar(c as char)),
                None => self.err(self.pos, ParseErrorKind::UnexpectedEnd),
            });
        }
        let mut args = Vec::new();
        loop {
            args.push(self.expr()?);
            self.skip_ws();
            if self.eat(b',') {
                continue;
            }
            if self.eat(b')') {
                break;
            }
            return Err(match self.peek() {
                Some(c) => self.err(self.pos, ParseErrorKind::UnexpectedChar(c as char)),
                None => self.err(self.pos, ParseErrorKind::UnexpectedEnd),
            });
        }
        if args.len() != func.arg_count() {
            return Err(self.err(
                off,
                ParseErrorKind::WrongArgCount {
                    func: func.name(),
                    expected: func.arg_count(),
                    got: args.len(),
                },
            ));
        }
        Ok(Node { offset: off, kind: Kind::Call(func, args) })
    }
}

/// Parse `source` as an expression over `t, y1..y<arity>`.
pub fn parse(source: &str, arity: usize) -> Result<Expression, ParseError> {
    let mut p = Parser { src: source.as_bytes(), pos: 0, arity };
    let root = p.expr()?;
    p.skip_ws();
    if p.pos != p.src.len() {
        return Err(ParseError { offset: p.pos, kind: ParseErrorKind::TrailingInput });
    }
    Ok(Expression { arity, root })
}

impl Expression {
    pub fn arity(&self) -> usize {
        self.arity
    }

    /// IEEE double evaluation; `gamma` delegates to the crate gamma.
    pub fn eval(&self, t: f64, ys: &[f64]) -> Result<f64, EvalError> {
        if ys.len() != self.arity {
            return Err(EvalError {
                offset: 0,
                kind: EvalErrorKind::ArityMismatch { expected: self.arity, got: ys.len() },
            });
        }
        let v = eval_node(&self.root, t, ys)?;
        if v.is_nan() {
            return Err(EvalError { offset: self.root.offset, kind: EvalErrorKind::NotANumber });
        }
        Ok(v)
    }

    /// Canonical fully parenthesised printout; re-parsing it yields an
    /// identical AST.
    pub fn canonical(&self) -> String {
        let mut out = String::new();
        print_node(&self.root, &mut out);
        out
    }
}

fn eval_node(node: &Node, t: f64, ys: &[f64]) -> Result<f64, EvalError> {
    let v = match &node.kind {
        Kind::Num(v) => *v,
        Kind::T => t,
        Kind::Y(i) => ys[i - 1],
        Kind::Neg(inner) => -eval_node(inner, t, ys)?,
        Kind::Bin(op, a, b) => {
            let x = eval_node(a, t, ys)?;
            let y = eval_node(b, t, ys)?;
            match op {
                BinOp::Add => x + y,
                BinOp::Sub => x - y,
                BinOp::Mul => x * y,
                BinOp::Div => x / y,
                BinOp::Pow => checked_pow(x, y, node.offset)?,
            }
        }
        Kind::Call(func, args) => {
            let x = eval_node(&args[0], t, ys)?;
            match func {
                Func::Gamma => {
                    if !(x > 0.0) {
                        return Err(bad_arg("gamma", x, node.offset));
                    }
                    gamma_pos(x)
                }
                Func::Abs => num::abs(x),
                Func::Exp => num::exp(x),
                Func::Log => {
                    if !(x > 0.0) {
                        return Err(bad_arg("log", x, node.offset));
                    }
                    num::ln(x)
                }
                Func::Sin => num::sin(x),
                Func::Cos => num::cos(x),
                Func::Sqrt => {
                    if x < 0.0 {
                        return Err(bad_arg("sqrt", x, node.offset));
                    }
                    num::sqrt(x)
                }
                Func::Pow => {
                    let y = eval_node(&args[1], t, ys)?;
                    checked_pow(x, y, node.offset)?
                }
            }
        }
    };
    Ok(v)
}

fn bad_arg(func: &'static str, arg: f64, offset: usize) -> EvalError {
    EvalError { offset, kind: EvalErrorKind::BadArgument { func, arg } }
}

fn checked_pow(base: f64, exponent: f64, offset: usize) -> Result<f64, EvalError> {
    if base < 0.0 && !num::is_integer(exponent) {
        return Err(EvalError { offset, kind: EvalErrorKind::BadPower { base, exponent } });
    }
    if base == 0.0 && exponent < 0.0 {
        return Err(EvalError { offset, kind: EvalErrorKind::BadPower { base, exponent } });
    }
    Ok(num::pow(base, exponent))
}

fn print_node(node: &Node, out: &mut String) {
    match &node.kind {
        Kind::Num(v) => {
            // `{}` on f64 prints the shortest round-trip form
            out.push_str(&format!("{v}"));
        }
        Kind::T => out.push('t'),
        Kind::Y(i) => out.push_str(&format!("y{i}")),
        Kind::Neg(inner) => {
            out.push_str("(-");
            print_node(inner, out);
            out.push(')');
        }
        Kind::Bin(op, a, b) => {
            out.push('(');
            print_node(a, out);
            out.push(' ');
            out.push(op.symbol());
            out.push(' ');
            print_node(b, out);
            out.push(')');
        }
        Kind::Call(func, args) => {
            out.push_str(func.name());
            out.push('(');
            for (i, a) in args.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                print_node(a, out);
            }
            out.push(')');
        }
    }
}
