//! Expression trees for metric components and scalar fields.
//!
//! Grammar (EBNF), whitespace insignificant:
//!
//! ```text
//! expr     = term , { ("+" | "-") , term } ;
//! term     = unary , { ("*" | "/") , unary } ;
//! unary    = "-" , unary | power ;
//! power    = primary , [ "^" , unary ] ;          (* exponent must be constant *)
//! primary  = number | constant | variable
//!          | function , "(" , expr , ")"
//!          | "(" , expr , ")" ;
//! number   = digit , { digit } , [ "." , { digit } ] , [ ("e" | "E") , [ "+" | "-" ] , digit , { digit } ]
//!          | "." , digit , { digit } , [ exponent part as above ] ;
//! constant = "pi" | "e" ;
//! variable = "x" , digit , { digit } ;              (* x1 .. xn, 1-based *)
//! function = "sin" | "cos" | "tan" | "exp" | "log" | "ln" | "sqrt"
//!          | "sinh" | "cosh" | "tanh" ;
//! ```
//!
//! `^` binds tighter than unary minus, so `-x1^2` is `-(x1^2)`, and is
//! right-associative (`x1^2^3` is `x1^8`). Exponents are folded to a
//! constant at parse time; a variable exponent is rejected.

use std::fmt;

use thiserror::Error;

/// Unary functions admitted by the grammar.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Tan,
    Exp,
    Log,
    Sqrt,
    Sinh,
    Cosh,
    Tanh,
}

impl Func {
    fn from_name(name: &str) -> Option<Func> {
        Some(match name {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "tan" => Func::Tan,
            "exp" => Func::Exp,
            "log" | "ln" => Func::Log,
            "sqrt" => Func::Sqrt,
            "sinh" => Func::Sinh,
            "cosh" => Func::Cosh,
            "tanh" => Func::Tanh,
            _ => return None,
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Tan => "tan",
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sqrt => "sqrt",
            Func::Sinh => "sinh",
            Func::Cosh => "cosh",
            Func::Tanh => "tanh",
        }
    }

    pub fn apply(self, x: f64) -> f64 {
        match self {
            Func::Sin => x.sin(),
            Func::Cos => x.cos(),
            Func::Tan => x.tan(),
            Func::Exp => x.exp(),
            Func::Log => x.ln(),
            Func::Sqrt => x.sqrt(),
            Func::Sinh => x.sinh(),
            Func::Cosh => x.cosh(),
            Func::Tanh => x.tanh(),
        }
    }
}

/// Binary operators.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
}

impl BinOp {
    fn symbol(self) -> char {
        match self {
            BinOp::Add => '+',
            BinOp::Sub => '-',
            BinOp::Mul => '*',
            BinOp::Div => '/',
        }
    }
}

/// Expression tree. Variables are stored 0-based (`x1` is `Var(0)`).
#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Const(f64),
    Var(usize),
    Neg(Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, f64),
    Call(Func, Box<Expr>),
}

#[derive(Clone, Debug, PartialEq, Error)]
pub enum ParseErrorKind {
    #[error("unexpected character '{0}'")]
    UnexpectedChar(char),
    #[error("unexpected end of input")]
    UnexpectedEnd,
    #[error("expected {expected}, found '{found}'")]
    Expected { expected: &'static str, found: String },
    #[error("unknown identifier '{0}'")]
    UnknownIdentifier(String),
    #[error("variable x{index} out of range for dimension {dim}")]
    VariableOutOfRange { index: usize, dim: usize },
    #[error("exponent must be a constant")]
    NonConstantExponent,
    #[error("argument of {0} is the non-positive constant {1}")]
    NonPositiveConstantArgument(&'static str, f64),
    #[error("malformed number '{0}'")]
    BadNumber(String),
    #[error("empty expression")]
    Empty,
}

/// Parse failure with the byte offset where it was detected.
#[derive(Clone, Debug, PartialEq, Error)]
#[error("{kind} at position {position}")]
pub struct ParseError {
    pub kind: ParseErrorKind,
    pub position: usize,
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Op(char),
    LParen,
    RParen,
}

fn tokenize(text: &str) -> Result<Vec<(Tok, usize)>, ParseError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        if c.is_ascii_digit() || c == '.' {
            while i < bytes.len() && ((bytes[i] as char).is_ascii_digit() || bytes[i] == b'.') {
                i += 1;
            }
            if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                let mut j = i + 1;
                if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                    j += 1;
                }
                if j < bytes.len() && bytes[j].is_ascii_digit() {
                    i = j;
                    while i < bytes.len() && bytes[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            let lit = &text[start..i];
            let v: f64 = lit.parse().map_err(|_| ParseError {
                kind: ParseErrorKind::BadNumber(lit.to_string()),
                position: start,
            })?;
            out.push((Tok::Num(v), start));
        } else if c.is_ascii_alphabetic() || c == '_' {
            while i < bytes.len() && ((bytes[i] as char).is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            out.push((Tok::Ident(text[start..i].to_string()), start));
        } else {
            let tok = match c {
                '+' | '-' | '*' | '/' | '^' => Tok::Op(c),
                '(' => Tok::LParen,
                ')' => Tok::RParen,
                _ => {
                    // report the full char, not the byte
                    let ch = text[start..].chars().next().unwrap_or(c);
                    return Err(ParseError {
                        kind: ParseErrorKind::UnexpectedChar(ch),
                        position: start,
                    });
                }
            };
            out.push((tok, start));
            i += 1;
        }
    }
    Ok(out)
}

struct Parser<'a> {
    toks: &'a [(Tok, usize)],
    pos: usize,
    end: usize,
    dim: usize,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(t, _)| t)
    }

    fn here(&self) -> usize {
        self.toks.get(self.pos).map(|(_, p)| *p).unwrap_or(self.end)
    }

    fn err<T>(&self, kind: ParseErrorKind) -> Result<T, ParseError> {
        Err(ParseError {
            kind,
            position: self.here(),
        })
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        while let Some(Tok::Op(c @ ('+' | '-'))) = self.peek() {
            let op = if *c == '+' { BinOp::Add } else { BinOp::Sub };
            self.pos += 1;
            let rhs = self.term()?;
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        while let Some(Tok::Op(c @ ('*' | '/'))) = self.peek() {
            let op = if *c == '*' { BinOp::Mul } else { BinOp::Div };
            self.pos += 1;
            let rhs = self.unary()?;
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if let Some(Tok::Op('-')) = self.peek() {
            self.pos += 1;
            let inner = self.unary()?;
            if let Expr::Const(c) = inner {
                return Ok(Expr::Const(-c));
            }
            return Ok(Expr::Neg(Box::new(inner)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.primary()?;
        if let Some(Tok::Op('^')) = self.peek() {
            self.pos += 1;
            let at = self.here();
            let exponent = self.unary()?;
            let value = exponent.constant_value().ok_or(ParseError {
                kind: ParseErrorKind::NonConstantExponent,
                position: at,
            })?;
            return Ok(Expr::Pow(Box::new(base), value));
        }
        Ok(base)
    }

    fn primary(&mut self) -> Result<Expr, ParseError> {
        let Some((tok, at)) = self.toks.get(self.pos).cloned() else {
            return self.err(ParseErrorKind::UnexpectedEnd);
        };
        match tok {
            Tok::Num(v) => {
                self.pos += 1;
                Ok(Expr::Const(v))
            }
            Tok::LParen => {
                self.pos += 1;
                let inner = self.expr()?;
                self.expect_rparen()?;
                Ok(inner)
            }
            Tok::Ident(name) => {
                self.pos += 1;
                if let Some(func) = Func::from_name(&name) {
                    match self.peek() {
                        Some(Tok::LParen) => self.pos += 1,
                        Some(t) => {
                            let found = describe(t);
                            return self.err(ParseErrorKind::Expected {
                                expected: "'(' after function name",
                                found,
                            });
                        }
                        None => return self.err(ParseErrorKind::UnexpectedEnd),
                    }
                    let arg = self.expr()?;
                    self.expect_rparen()?;
                    if matches!(func, Func::Log | Func::Sqrt) {
                        if let Some(c) = arg.constant_value() {
                            if c <= 0.0 {
                                return Err(ParseError {
                                    kind: ParseErrorKind::NonPositiveConstantArgument(func.name(), c),
                                    position: at,
                                });
                            }
                        }
                    }
                    return Ok(Expr::Call(func, Box::new(arg)));
                }
                match name.as_str() {
                    "pi" => return Ok(Expr::Const(std::f64::consts::PI)),
                    "e" => return Ok(Expr::Const(std::f64::consts::E)),
                    _ => {}
                }
                if let Some(idx) = name.strip_prefix('x').and_then(|s| s.parse::<usize>().ok()) {
                    if idx == 0 || idx > self.dim {
                        return Err(ParseError {
                            kind: ParseErrorKind::VariableOutOfRange {
                                index: idx,
                                dim: self.dim,
                            },
                            position: at,
                        });
                    }
                    return Ok(Expr::Var(idx - 1));
                }
                Err(ParseError {
                    kind: ParseErrorKind::UnknownIdentifier(name),
                    position: at,
                })
            }
            Tok::Op(_) | Tok::RParen => {
                let found = describe(&tok);
                self.err(ParseErrorKind::Expected {
                    expected: "operand",
                    found,
                })
            }
        }
    }

    fn expect_rparen(&mut self) -> Result<(), ParseError> {
        match self.peek() {
            Some(Tok::RParen) => {
                self.pos += 1;
                Ok(())
            }
            Some(t) => {
                let found = describe(t);
                self.err(ParseErrorKind::Expected {
                    expected: "')'",
                    found,
                })
            }
            None => self.err(ParseErrorKind::UnexpectedEnd),
        }
    }
}

fn describe(t: &Tok) -> String {
    match t {
        Tok::Num(v) => v.to_string(),
        Tok::Ident(s) => s.clone(),
        Tok::Op(c) => c.to_string(),
        Tok::LParen => "(".into(),
        Tok::RParen => ")".into(),
    }
}

/// Parses `text` as an expression over the coordinates `x1..x{dim}`.
pub fn parse_expression(text: &str, dim: usize) -> Result<Expr, ParseError> {
    let toks = tokenize(text)?;
    if toks.is_empty() {
        return Err(ParseError {
            kind: ParseErrorKind::Empty,
            position: 0,
        });
    }
    let mut p = Parser {
        toks: &toks,
        pos: 0,
        end: text.len(),
        dim,
    };
    let e = p.expr()?;
    if let Some(t) = p.peek() {
        let found = describe(t);
        return p.err(ParseErrorKind::Expected {
            expected: "operator or end of input",
            found,
        });
    }
    Ok(e)
}

impl Expr {
    pub fn constant(v: f64) -> Expr {
        Expr::Const(v)
    }

    pub fn var(index: usize) -> Expr {
        Expr::Var(index)
    }

    /// Value of a variable-free subtree, `None` otherwise.
    pub fn constant_value(&self) -> Option<f64> {
        Some(match self {
            Expr::Const(c) => *c,
            Expr::Var(_) => return None,
            Expr::Neg(a) => -a.constant_value()?,
            Expr::Binary(op, a, b) => {
                let (a, b) = (a.constant_value()?, b.constant_value()?);
                match op {
                    BinOp::Add => a + b,
                    BinOp::Sub => a - b,
                    BinOp::Mul => a * b,
                    BinOp::Div => a / b,
                }
            }
            Expr::Pow(a, k) => a.constant_value()?.powf(*k),
            Expr::Call(f, a) => f.apply(a.constant_value()?),
        })
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Expr::Const(c) if *c == 0.0)
    }

    /// Largest 0-based variable index referenced, if any.
    pub fn max_var(&self) -> Option<usize> {
        match self {
            Expr::Const(_) => None,
            Expr::Var(i) => Some(*i),
            Expr::Neg(a) | Expr::Pow(a, _) | Expr::Call(_, a) => a.max_var(),
            Expr::Binary(_, a, b) => match (a.max_var(), b.max_var()) {
                (Some(x), Some(y)) => Some(x.max(y)),
                (x, y) => x.or(y),
            },
        }
    }

    /// Plain evaluation (no derivatives, no domain checks).
    pub fn eval(&self, x: &[f64]) -> f64 {
        match self {
            Expr::Const(c) => *c,
            Expr::Var(i) => x[*i],
            Expr::Neg(a) => -a.eval(x),
            Expr::Binary(op, a, b) => {
                let (a, b) = (a.eval(x), b.eval(x));
                match op {
                    BinOp::Add => a + b,
                    BinOp::Sub => a - b,
                    BinOp::Mul => a * b,
                    BinOp::Div => a / b,
                }
            }
            Expr::Pow(a, k) => powf_signed(a.eval(x), *k),
            Expr::Call(f, a) => f.apply(a.eval(x)),
        }
    }
}

/// `base^k`, using integer powers when `k` is integral so negative bases work.
pub(crate) fn powf_signed(base: f64, k: f64) -> f64 {
    if k.fract() == 0.0 && k.abs() < i32::MAX as f64 {
        base.powi(k as i32)
    } else {
        base.powf(k)
    }
}

fn fmt_const(v: f64, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    // `{:?}` is the shortest representation that round-trips.
    if v < 0.0 || (v == 0.0 && v.is_sign_negative()) {
        write!(f, "(-{:?})", -v)
    } else {
        write!(f, "{:?}", v)
    }
}

/// Fully parenthesized printer; its output re-parses to an identical tree.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Const(v) => fmt_const(*v, f),
            Expr::Var(i) => write!(f, "x{}", i + 1),
            Expr::Neg(a) => write!(f, "(-{a})"),
            Expr::Binary(op, a, b) => write!(f, "({a} {} {b})", op.symbol()),
            Expr::Pow(a, k) => {
                write!(f, "({a}^")?;
                fmt_const(*k, f)?;
                write!(f, ")")
            }
            Expr::Call(func, a) => write!(f, "{}({a})", func.name()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn power_of_function() {
        let e = parse_expression("sin(x1)^2", 2).unwrap();
        assert_eq!(
            e,
            Expr::Pow(Box::new(Expr::Call(Func::Sin, Box::new(Expr::Var(0)))), 2.0)
        );
    }

    #[test]
    fn incomplete_expression_reports_end() {
        let err = parse_expression("x1 +", 1).unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::UnexpectedEnd);
        assert_eq!(err.position, 4);
    }

    #[test]
    fn variable_out_of_range() {
        let err = parse_expression("x3", 2).unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::VariableOutOfRange { index: 3, dim: 2 });
        assert!(parse_expression("x0", 2).is_err());
    }

    #[test]
    fn precedence_and_associativity() {
        let x = [2.0, 3.0];
        let cases = [
            ("-x1^2", -4.0),
            ("x1 - x2 - 1", -2.0),
            ("x1 / x2 / 2", 2.0 / 3.0 / 2.0),
            ("2^3^2", 512.0),
            ("1 + 2 * x2", 7.0),
            ("x1^-1", 0.5),
            ("(x1 + x2)^(1/2)", 5f64.sqrt()),
            ("2e-1 * x1", 0.4),
            ("pi", std::f64::consts::PI),
        ];
        for (text, want) in cases {
            let got = parse_expression(text, 2).unwrap().eval(&x);
            assert!((got - want).abs() < 1e-15, "{text}: {got} vs {want}");
        }
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(
            parse_expression("foo(x1)", 1).unwrap_err().kind,
            ParseErrorKind::UnknownIdentifier(_)
        ));
        assert!(matches!(
            parse_expression("x1^x1", 1).unwrap_err().kind,
            ParseErrorKind::NonConstantExponent
        ));
        assert!(matches!(
            parse_expression("log(0)", 1).unwrap_err().kind,
            ParseErrorKind::NonPositiveConstantArgument("log", _)
        ));
        assert!(matches!(
            parse_expression("sqrt(-2)", 1).unwrap_err().kind,
            ParseErrorKind::NonPositiveConstantArgument("sqrt", _)
        ));
        assert!(parse_expression("(x1", 1).is_err());
        assert!(parse_expression("x1 x1", 1).is_err());
        assert!(parse_expression("   ", 1).is_err());
        assert!(parse_expression("x1 $ 2", 1).is_err());
    }

    #[test]
    fn printer_round_trips() {
        for text in ["-x1^2 + 3*sin(x2)/x1", "exp(-0.5*x1^2) - -2", "x1^(-1.5)"] {
            let e = parse_expression(text, 2).unwrap();
            let back = parse_expression(&e.to_string(), 2).unwrap();
            assert_eq!(e, back, "{text} -> {e}");
        }
    }
}
