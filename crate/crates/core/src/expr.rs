//! Small whitelisted expression language for profiles and schedules.
//!
//! Grammar: numbers, `x`, `t`, `pi`, `+ - * /`, `^` with a constant exponent,
//! and the functions `sin`, `cos`, `exp`. Expressions are differentiated
//! symbolically.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Var {
    X,
    T,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Func {
    Sin,
    Cos,
    Exp,
}

#[derive(Debug, Clone, PartialEq)]
enum Node {
    Num(f64),
    Var(Var),
    Neg(Box<Node>),
    Add(Box<Node>, Box<Node>),
    Sub(Box<Node>, Box<Node>),
    Mul(Box<Node>, Box<Node>),
    Div(Box<Node>, Box<Node>),
    Pow(Box<Node>, f64),
    Call(Func, Box<Node>),
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("expression error at byte {pos}: {message}")]
pub struct ParseError {
    pub pos: usize,
    pub message: String,
}

/// A parsed expression together with its source text.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Expr {
    src: String,
    node: Node,
}

impl PartialEq for Expr {
    fn eq(&self, other: &Self) -> bool {
        self.src == other.src
    }
}

impl Expr {
    pub fn parse(src: &str) -> Result<Self, ParseError> {
        let mut p = Parser { s: src.as_bytes(), pos: 0 };
        let node = p.expr()?;
        p.skip_ws();
        if p.pos != p.s.len() {
            return Err(p.err("unexpected trailing input"));
        }
        Ok(Self { src: src.to_string(), node })
    }

    pub fn constant(v: f64) -> Self {
        Self { src: format!("{v:?}"), node: Node::Num(v) }
    }

    pub fn source(&self) -> &str {
        &self.src
    }

    pub fn eval(&self, x: f64, t: f64) -> f64 {
        eval(&self.node, x, t)
    }

    /// Symbolic derivative with respect to `var`.
    pub fn derivative(&self, var: Var) -> Self {
        let node = simplify(diff(&self.node, var));
        Self { src: render(&node), node }
    }

    pub fn depends_on(&self, var: Var) -> bool {
        depends(&self.node, var)
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.src)
    }
}

impl FromStr for Expr {
    type Err = ParseError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Expr::parse(s)
    }
}

impl TryFrom<String> for Expr {
    type Error = ParseError;
    fn try_from(s: String) -> Result<Self, Self::Error> {
        Expr::parse(&s)
    }
}

impl From<Expr> for String {
    fn from(e: Expr) -> String {
        e.src
    }
}

fn eval(n: &Node, x: f64, t: f64) -> f64 {
    match n {
        Node::Num(v) => *v,
        Node::Var(Var::X) => x,
        Node::Var(Var::T) => t,
        Node::Neg(a) => -eval(a, x, t),
        Node::Add(a, b) => eval(a, x, t) + eval(b, x, t),
        Node::Sub(a, b) => eval(a, x, t) - eval(b, x, t),
        Node::Mul(a, b) => eval(a, x, t) * eval(b, x, t),
        Node::Div(a, b) => eval(a, x, t) / eval(b, x, t),
        Node::Pow(a, c) => {
            let base = eval(a, x, t);
            if c.fract() == 0.0 && c.abs() < 64.0 {
                base.powi(*c as i32)
            } else {
                base.powf(*c)
            }
        }
        Node::Call(f, a) => {
            let v = eval(a, x, t);
            match f {
                Func::Sin => v.sin(),
                Func::Cos => v.cos(),
                Func::Exp => v.exp(),
            }
        }
    }
}

fn depends(n: &Node, var: Var) -> bool {
    match n {
        Node::Num(_) => false,
        Node::Var(v) => *v == var,
        Node::Neg(a) | Node::Pow(a, _) | Node::Call(_, a) => depends(a, var),
        Node::Add(a, b) | Node::Sub(a, b) | Node::Mul(a, b) | Node::Div(a, b) => {
            depends(a, var) || depends(b, var)
        }
    }
}

fn bx(n: Node) -> Box<Node> {
    Box::new(n)
}

fn diff(n: &Node, var: Var) -> Node {
    use Node::*;
    match n {
        Num(_) => Num(0.0),
        Var(v) => Num(if *v == var { 1.0 } else { 0.0 }),
        Neg(a) => Neg(bx(diff(a, var))),
        Add(a, b) => Add(bx(diff(a, var)), bx(diff(b, var))),
        Sub(a, b) => Sub(bx(diff(a, var)), bx(diff(b, var))),
        Mul(a, b) => Add(
            bx(Mul(bx(diff(a, var)), b.clone())),
            bx(Mul(a.clone(), bx(diff(b, var)))),
        ),
        Div(a, b) => Div(
            bx(Sub(
                bx(Mul(bx(diff(a, var)), b.clone())),
                bx(Mul(a.clone(), bx(diff(b, var)))),
            )),
            bx(Pow(b.clone(), 2.0)),
        ),
        Pow(a, c) => Mul(
            bx(Mul(bx(Num(*c)), bx(Pow(a.clone(), c - 1.0)))),
            bx(diff(a, var)),
        ),
        Call(f, a) => {
            let outer = match f {
                Func::Sin => Call(Func::Cos, a.clone()),
                Func::Cos => Neg(bx(Call(Func::Sin, a.clone()))),
                Func::Exp => Call(Func::Exp, a.clone()),
            };
            Mul(bx(outer), bx(diff(a, var)))
        }
    }
}

fn simplify(n: Node) -> Node {
    use Node::*;
    match n {
        Neg(a) => match simplify(*a) {
            Num(v) => Num(-v),
            Neg(b) => *b,
            a => Neg(bx(a)),
        },
        Add(a, b) => match (simplify(*a), simplify(*b)) {
            (Num(x), Num(y)) => Num(x + y),
            (Num(z), e) | (e, Num(z)) if z == 0.0 => e,
            (a, b) => Add(bx(a), bx(b)),
        },
        Sub(a, b) => match (simplify(*a), simplify(*b)) {
            (Num(x), Num(y)) => Num(x - y),
            (e, Num(z)) if z == 0.0 => e,
            (Num(z), e) if z == 0.0 => simplify(Neg(bx(e))),
            (a, b) => Sub(bx(a), bx(b)),
        },
        Mul(a, b) => match (simplify(*a), simplify(*b)) {
            (Num(x), Num(y)) => Num(x * y),
            (Num(z), _) | (_, Num(z)) if z == 0.0 => Num(0.0),
            (Num(o), e) | (e, Num(o)) if o == 1.0 => e,
            (a, b) => Mul(bx(a), bx(b)),
        },
        Div(a, b) => match (simplify(*a), simplify(*b)) {
            (Num(z), _) if z == 0.0 => Num(0.0),
            (e, Num(o)) if o == 1.0 => e,
            (a, b) => Div(bx(a), bx(b)),
        },
        Pow(a, c) => match simplify(*a) {
            _ if c == 0.0 => Num(1.0),
            e if c == 1.0 => e,
            Num(v) => Num(v.powf(c)),
            e => Pow(bx(e), c),
        },
        Call(f, a) => match simplify(*a) {
            Num(v) => Num(eval(&Call(f, bx(Num(v))), 0.0, 0.0)),
            a => Call(f, bx(a)),
        },
        other => other,
    }
}

fn render(n: &Node) -> String {
    match n {
        Node::Num(v) => {
            if *v < 0.0 {
                format!("({v:?})")
            } else {
                format!("{v:?}")
            }
        }
        Node::Var(Var::X) => "x".into(),
        Node::Var(Var::T) => "t".into(),
        Node::Neg(a) => format!("(-{})", render(a)),
        Node::Add(a, b) => format!("({} + {})", render(a), render(b)),
        Node::Sub(a, b) => format!("({} - {})", render(a), render(b)),
        Node::Mul(a, b) => format!("({} * {})", render(a), render(b)),
        Node::Div(a, b) => format!("({} / {})", render(a), render(b)),
        Node::Pow(a, c) => format!("({}^{})", render(a), render(&Node::Num(*c))),
        Node::Call(f, a) => {
            let name = match f {
                Func::Sin => "sin",
                Func::Cos => "cos",
                Func::Exp => "exp",
            };
            format!("{name}({})", render(a))
        }
    }
}

struct Parser<'a> {
    s: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn err(&self, msg: &str) -> ParseError {
        ParseError { pos: self.pos, message: msg.to_string() }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.s.get(self.pos).copied()
    }

    fn expr(&mut self) -> Result<Node, ParseError> {
        let mut lhs = self.term()?;
        while let Some(c @ (b'+' | b'-')) = self.peek() {
            self.pos += 1;
            let rhs = self.term()?;
            lhs = if c == b'+' { Node::Add(bx(lhs), bx(rhs)) } else { Node::Sub(bx(lhs), bx(rhs)) };
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Node, ParseError> {
        let mut lhs = self.unary()?;
        while let Some(c @ (b'*' | b'/')) = self.peek() {
            self.pos += 1;
            let rhs = self.unary()?;
            lhs = if c == b'*' { Node::Mul(bx(lhs), bx(rhs)) } else { Node::Div(bx(lhs), bx(rhs)) };
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Node, ParseError> {
        match self.peek() {
            Some(b'-') => {
                self.pos += 1;
                Ok(Node::Neg(bx(self.unary()?)))
            }
            Some(b'+') => {
                self.pos += 1;
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<Node, ParseError> {
        let base = self.atom()?;
        if self.peek() == Some(b'^') {
            self.pos += 1;
            let at = self.pos;
            let exp = self.unary()?;
            if depends(&exp, Var::X) || depends(&exp, Var::T) {
                return Err(ParseError { pos: at, message: "exponent must be constant".into() });
            }
            return Ok(Node::Pow(bx(base), eval(&exp, 0.0, 0.0)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Node, ParseError> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                if self.peek() != Some(b')') {
                    return Err(self.err("expected ')'"));
                }
                self.pos += 1;
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => self.number(),
            Some(c) if c.is_ascii_alphabetic() => {
                let start = self.pos;
                while self.pos < self.s.len() && self.s[self.pos].is_ascii_alphanumeric() {
                    self.pos += 1;
                }
                let name = std::str::from_utf8(&self.s[start..self.pos]).unwrap_or("");
                let func = match name {
                    "x" => return Ok(Node::Var(Var::X)),
                    "t" => return Ok(Node::Var(Var::T)),
                    "pi" => return Ok(Node::Num(std::f64::consts::PI)),
                    "sin" => Func::Sin,
                    "cos" => Func::Cos,
                    "exp" => Func::Exp,
                    _ => {
                        return Err(ParseError {
                            pos: start,
                            message: format!("unknown identifier '{name}'"),
                        })
                    }
                };
                if self.peek() != Some(b'(') {
                    return Err(self.err("expected '(' after function name"));
                }
                self.pos += 1;
                let arg = self.expr()?;
                if self.peek() != Some(b')') {
                    return Err(self.err("expected ')'"));
                }
                self.pos += 1;
                Ok(Node::Call(func, bx(arg)))
            }
            Some(_) => Err(self.err("unexpected character")),
            None => Err(self.err("unexpected end of input")),
        }
    }

    fn number(&mut self) -> Result<Node, ParseError> {
        let start = self.pos;
        let s = self.s;
        let mut i = self.pos;
        while i < s.len() && (s[i].is_ascii_digit() || s[i] == b'.') {
            i += 1;
        }
        if i < s.len() && (s[i] == b'e' || s[i] == b'E') {
            let mut j = i + 1;
            if j < s.len() && (s[j] == b'+' || s[j] == b'-') {
                j += 1;
            }
            if j < s.len() && s[j].is_ascii_digit() {
                while j < s.len() && s[j].is_ascii_digit() {
                    j += 1;
                }
                i = j;
            }
        }
        self.pos = i;
        let text = std::str::from_utf8(&s[start..i]).unwrap_or("");
        text.parse::<f64>()
            .map(Node::Num)
            .map_err(|_| ParseError { pos: start, message: format!("bad number '{text}'") })
    }
}
