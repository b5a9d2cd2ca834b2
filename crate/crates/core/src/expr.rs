//! Closed-form scalar expressions: parsing, printing, differentiation and
//! numeric evaluation.
//!
//! Expressions are immutable DAGs behind [`Arc`] handles, so clones are cheap
//! and derivative towers share structure instead of exploding. The smart
//! constructors fold constants and drop additive/multiplicative identities at
//! build time, which keeps the trees produced by repeated differentiation
//! small enough to evaluate quickly on sample grids.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use thiserror::Error;

/// Built-in single-argument functions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Exp,
    Ln,
    Sin,
    Cos,
    Sqrt,
}

impl Func {
    pub fn name(self) -> &'static str {
        match self {
            Func::Exp => "exp",
            Func::Ln => "ln",
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Sqrt => "sqrt",
        }
    }

    fn from_name(name: &str) -> Option<Func> {
        match name {
            "exp" => Some(Func::Exp),
            "ln" => Some(Func::Ln),
            "sin" => Some(Func::Sin),
            "cos" => Some(Func::Cos),
            "sqrt" => Some(Func::Sqrt),
            _ => None,
        }
    }

    fn apply(self, x: f64) -> f64 {
        match self {
            Func::Exp => x.exp(),
            Func::Ln => x.ln(),
            Func::Sin => x.sin(),
            Func::Cos => x.cos(),
            Func::Sqrt => x.sqrt(),
        }
    }
}

#[derive(Debug, PartialEq)]
enum Node {
    Num(f64),
    Sym(String),
    Neg(Expr),
    Add(Expr, Expr),
    Sub(Expr, Expr),
    Mul(Expr, Expr),
    Div(Expr, Expr),
    Pow(Expr, Expr),
    Call(Func, Expr),
}

/// A scalar expression in named symbols.
#[derive(Clone)]
pub struct Expr(Arc<Node>);

impl fmt::Debug for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Expr({self})")
    }
}

impl PartialEq for Expr {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0) || *self.0 == *other.0
    }
}

/// Values bound to symbol names during evaluation.
pub type Scope = HashMap<String, f64>;

#[derive(Debug, Error, PartialEq)]
pub enum EvalError {
    #[error("unbound symbol '{0}'")]
    UnboundSymbol(String),
    #[error("division by zero in '{0}'")]
    DivisionByZero(String),
    #[error("result not finite in '{0}'")]
    Domain(String),
}

impl Expr {
    pub fn num(v: f64) -> Expr {
        Expr(Arc::new(Node::Num(v)))
    }

    pub fn sym(name: impl Into<String>) -> Expr {
        Expr(Arc::new(Node::Sym(name.into())))
    }

    pub fn zero() -> Expr {
        Expr::num(0.0)
    }

    pub fn one() -> Expr {
        Expr::num(1.0)
    }

    pub fn as_num(&self) -> Option<f64> {
        match *self.0 {
            Node::Num(v) => Some(v),
            _ => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.as_num() == Some(0.0)
    }

    fn is_one(&self) -> bool {
        self.as_num() == Some(1.0)
    }

    pub fn add(&self, other: &Expr) -> Expr {
        if self.is_zero() {
            return other.clone();
        }
        if other.is_zero() {
            return self.clone();
        }
        if let (Some(a), Some(b)) = (self.as_num(), other.as_num()) {
            if (a + b).is_finite() {
                return Expr::num(a + b);
            }
        }
        Expr(Arc::new(Node::Add(self.clone(), other.clone())))
    }

    pub fn sub(&self, other: &Expr) -> Expr {
        if other.is_zero() {
            return self.clone();
        }
        if self.is_zero() {
            return other.neg();
        }
        if Arc::ptr_eq(&self.0, &other.0) {
            return Expr::zero();
        }
        if let (Some(a), Some(b)) = (self.as_num(), other.as_num()) {
            if (a - b).is_finite() {
                return Expr::num(a - b);
            }
        }
        Expr(Arc::new(Node::Sub(self.clone(), other.clone())))
    }

    pub fn mul(&self, other: &Expr) -> Expr {
        if self.is_zero() || other.is_zero() {
            return Expr::zero();
        }
        if self.is_one() {
            return other.clone();
        }
        if other.is_one() {
            return self.clone();
        }
        if let (Some(a), Some(b)) = (self.as_num(), other.as_num()) {
            if (a * b).is_finite() {
                return Expr::num(a * b);
            }
        }
        Expr(Arc::new(Node::Mul(self.clone(), other.clone())))
    }

    pub fn div(&self, other: &Expr) -> Expr {
        if self.is_zero() && !other.is_zero() {
            return Expr::zero();
        }
        if other.is_one() {
            return self.clone();
        }
        if let (Some(a), Some(b)) = (self.as_num(), other.as_num()) {
            if b != 0.0 && (a / b).is_finite() {
                return Expr::num(a / b);
            }
        }
        Expr(Arc::new(Node::Div(self.clone(), other.clone())))
    }

    pub fn pow(&self, other: &Expr) -> Expr {
        if let Some(e) = other.as_num() {
            if e == 0.0 {
                return Expr::one();
            }
            if e == 1.0 {
                return self.clone();
            }
        }
        if self.is_one() {
            return Expr::one();
        }
        if let (Some(a), Some(b)) = (self.as_num(), other.as_num()) {
            let v = a.powf(b);
            if v.is_finite() {
                return Expr::num(v);
            }
        }
        Expr(Arc::new(Node::Pow(self.clone(), other.clone())))
    }

    /// Integer power, a convenience wrapper over [`Expr::pow`].
    pub fn powi(&self, n: i32) -> Expr {
        self.pow(&Expr::num(n as f64))
    }

    pub fn neg(&self) -> Expr {
        match &*self.0 {
            Node::Num(v) => Expr::num(-v),
            Node::Neg(inner) => inner.clone(),
            _ => Expr(Arc::new(Node::Neg(self.clone()))),
        }
    }

    pub fn call(func: Func, arg: &Expr) -> Expr {
        if let Some(v) = arg.as_num() {
            let r = func.apply(v);
            if r.is_finite() {
                return Expr::num(r);
            }
        }
        Expr(Arc::new(Node::Call(func, arg.clone())))
    }

    pub fn exp(&self) -> Expr {
        Expr::call(Func::Exp, self)
    }

    pub fn ln(&self) -> Expr {
        Expr::call(Func::Ln, self)
    }

    pub fn sin(&self) -> Expr {
        Expr::call(Func::Sin, self)
    }

    pub fn cos(&self) -> Expr {
        Expr::call(Func::Cos, self)
    }

    pub fn sqrt(&self) -> Expr {
        Expr::call(Func::Sqrt, self)
    }

    /// Parse an expression from text. Equivalent to the [`FromStr`] impl.
    pub fn parse(src: &str) -> Result<Expr, ParseError> {
        src.parse()
    }

    /// Derivative with respect to `var`, built through the smart constructors
    /// so vanishing terms drop out immediately.
    pub fn diff(&self, var: &str) -> Expr {
        match &*self.0 {
            Node::Num(_) => Expr::zero(),
            Node::Sym(s) => {
                if s == var {
                    Expr::one()
                } else {
                    Expr::zero()
                }
            }
            Node::Neg(a) => a.diff(var).neg(),
            Node::Add(a, b) => a.diff(var).add(&b.diff(var)),
            Node::Sub(a, b) => a.diff(var).sub(&b.diff(var)),
            Node::Mul(a, b) => a.diff(var).mul(b).add(&a.mul(&b.diff(var))),
            Node::Div(a, b) => {
                let da = a.diff(var);
                let db = b.diff(var);
                da.mul(b).sub(&a.mul(&db)).div(&b.mul(b))
            }
            Node::Pow(u, v) => {
                let du = u.diff(var);
                if let Some(c) = v.as_num() {
                    // d(u^c) = c u^(c-1) u'
                    Expr::num(c).mul(&u.pow(&Expr::num(c - 1.0))).mul(&du)
                } else {
                    // d(u^v) = u^v (v' ln u + v u'/u)
                    let dv = v.diff(var);
                    let term = dv.mul(&u.ln()).add(&v.mul(&du).div(u));
                    self.clone().mul(&term)
                }
            }
            Node::Call(func, u) => {
                let du = u.diff(var);
                let outer = match func {
                    Func::Exp => self.clone(),
                    Func::Ln => return du.div(u),
                    Func::Sin => u.cos(),
                    Func::Cos => u.sin().neg(),
                    Func::Sqrt => return du.div(&Expr::num(2.0).mul(&self.clone())),
                };
                outer.mul(&du)
            }
        }
    }

    /// Rebuild the tree bottom-up through the smart constructors, folding any
    /// constant subtrees that appeared only after construction.
    pub fn simplify(&self) -> Expr {
        match &*self.0 {
            Node::Num(_) | Node::Sym(_) => self.clone(),
            Node::Neg(a) => a.simplify().neg(),
            Node::Add(a, b) => a.simplify().add(&b.simplify()),
            Node::Sub(a, b) => a.simplify().sub(&b.simplify()),
            Node::Mul(a, b) => a.simplify().mul(&b.simplify()),
            Node::Div(a, b) => a.simplify().div(&b.simplify()),
            Node::Pow(a, b) => a.simplify().pow(&b.simplify()),
            Node::Call(f, a) => Expr::call(*f, &a.simplify()),
        }
    }

    /// Evaluate with the given symbol bindings. Shared subtrees are evaluated
    /// once per call.
    pub fn eval(&self, scope: &Scope) -> Result<f64, EvalError> {
        let mut cache: HashMap<usize, f64> = HashMap::new();
        self.eval_cached(scope, &mut cache)
    }

    fn eval_cached(&self, scope: &Scope, cache: &mut HashMap<usize, f64>) -> Result<f64, EvalError> {
        let key = Arc::as_ptr(&self.0) as usize;
        if let Some(&v) = cache.get(&key) {
            return Ok(v);
        }
        let v = match &*self.0 {
            Node::Num(v) => *v,
            Node::Sym(s) => *scope
                .get(s)
                .ok_or_else(|| EvalError::UnboundSymbol(s.clone()))?,
            Node::Neg(a) => -a.eval_cached(scope, cache)?,
            Node::Add(a, b) => a.eval_cached(scope, cache)? + b.eval_cached(scope, cache)?,
            Node::Sub(a, b) => a.eval_cached(scope, cache)? - b.eval_cached(scope, cache)?,
            Node::Mul(a, b) => a.eval_cached(scope, cache)? * b.eval_cached(scope, cache)?,
            Node::Div(a, b) => {
                let denom = b.eval_cached(scope, cache)?;
                if denom == 0.0 {
                    return Err(EvalError::DivisionByZero(self.to_string()));
                }
                a.eval_cached(scope, cache)? / denom
            }
            Node::Pow(a, b) => {
                let base = a.eval_cached(scope, cache)?;
                let expy = b.eval_cached(scope, cache)?;
                base.powf(expy)
            }
            Node::Call(f, a) => f.apply(a.eval_cached(scope, cache)?),
        };
        if !v.is_finite() {
            return Err(EvalError::Domain(self.to_string()));
        }
        cache.insert(key, v);
        Ok(v)
    }

    /// Every symbol name appearing in the expression.
    pub fn symbols(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        let mut seen = HashSet::new();
        self.collect_symbols(&mut out, &mut seen);
        out
    }

    fn collect_symbols(&self, out: &mut BTreeSet<String>, seen: &mut HashSet<usize>) {
        if !seen.insert(Arc::as_ptr(&self.0) as usize) {
            return;
        }
        match &*self.0 {
            Node::Num(_) => {}
            Node::Sym(s) => {
                out.insert(s.clone());
            }
            Node::Neg(a) | Node::Call(_, a) => a.collect_symbols(out, seen),
            Node::Add(a, b) | Node::Sub(a, b) | Node::Mul(a, b) | Node::Div(a, b)
            | Node::Pow(a, b) => {
                a.collect_symbols(out, seen);
                b.collect_symbols(out, seen);
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Printing
// ---------------------------------------------------------------------------

/// Effective precedence used when deciding parenthesization. A negative
/// literal prints with a leading minus sign, so it binds like a negation.
fn eff_prec(node: &Node) -> u8 {
    match node {
        Node::Add(..) | Node::Sub(..) => 1,
        Node::Mul(..) | Node::Div(..) => 2,
        Node::Neg(_) => 3,
        Node::Num(v) if *v < 0.0 => 3,
        Node::Pow(..) => 4,
        Node::Num(_) | Node::Sym(_) | Node::Call(..) => 5,
    }
}

fn fmt_child(e: &Expr, min_bare: u8, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    if eff_prec(&e.0) < min_bare {
        write!(f, "(")?;
        fmt_node(e, f)?;
        write!(f, ")")
    } else {
        fmt_node(e, f)
    }
}

fn fmt_node(e: &Expr, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    match &*e.0 {
        Node::Num(v) => write!(f, "{v}"),
        Node::Sym(s) => write!(f, "{s}"),
        Node::Neg(a) => {
            write!(f, "-")?;
            fmt_child(a, 3, f)
        }
        Node::Add(a, b) => {
            fmt_child(a, 1, f)?;
            write!(f, " + ")?;
            fmt_child(b, 2, f)
        }
        Node::Sub(a, b) => {
            fmt_child(a, 1, f)?;
            write!(f, " - ")?;
            fmt_child(b, 2, f)
        }
        Node::Mul(a, b) => {
            fmt_child(a, 2, f)?;
            write!(f, "*")?;
            fmt_child(b, 3, f)
        }
        Node::Div(a, b) => {
            fmt_child(a, 2, f)?;
            write!(f, "/")?;
            fmt_child(b, 3, f)
        }
        Node::Pow(a, b) => {
            fmt_child(a, 5, f)?;
            write!(f, "^")?;
            fmt_child(b, 3, f)
        }
        Node::Call(func, a) => {
            write!(f, "{}(", func.name())?;
            fmt_node(a, f)?;
            write!(f, ")")
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt_node(self, f)
    }
}

// Operator sugar over references, so derived formulas read like formulas.
impl std::ops::Add for &Expr {
    type Output = Expr;
    fn add(self, rhs: &Expr) -> Expr {
        Expr::add(self, rhs)
    }
}

impl std::ops::Sub for &Expr {
    type Output = Expr;
    fn sub(self, rhs: &Expr) -> Expr {
        Expr::sub(self, rhs)
    }
}

impl std::ops::Mul for &Expr {
    type Output = Expr;
    fn mul(self, rhs: &Expr) -> Expr {
        Expr::mul(self, rhs)
    }
}

impl std::ops::Div for &Expr {
    type Output = Expr;
    fn div(self, rhs: &Expr) -> Expr {
        Expr::div(self, rhs)
    }
}

impl std::ops::Neg for &Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::neg(self)
    }
}

// ---------------------------------------------------------------------------
// Parsing
// ---------------------------------------------------------------------------

#[derive(Debug, Error, PartialEq)]
pub enum ParseError {
    #[error("unexpected end of input at byte {0}")]
    UnexpectedEnd(usize),
    #[error("unexpected character '{ch}' at byte {at}")]
    UnexpectedChar { ch: char, at: usize },
    #[error("invalid number '{text}' at byte {at}")]
    InvalidNumber { text: String, at: usize },
    #[error("expected '{expected}' at byte {at}")]
    Expected { expected: char, at: usize },
    #[error("expected '(' after function '{name}' at byte {at}")]
    MissingCallParen { name: String, at: usize },
    #[error("trailing input at byte {at}")]
    Trailing { at: usize },
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Parser<'a> {
    fn new(src: &'a str) -> Self {
        Parser { src, pos: 0 }
    }

    fn skip_ws(&mut self) {
        let bytes = self.src.as_bytes();
        while self.pos < bytes.len() && bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.as_bytes().get(self.pos).copied()
    }

    fn expect(&mut self, ch: u8) -> Result<(), ParseError> {
        if self.peek() == Some(ch) {
            self.pos += 1;
            Ok(())
        } else {
            Err(ParseError::Expected {
                expected: ch as char,
                at: self.pos,
            })
        }
    }

    fn parse_expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.parse_term()?;
        loop {
            match self.peek() {
                Some(b'+') => {
                    self.pos += 1;
                    let rhs = self.parse_term()?;
                    lhs = lhs.add(&rhs);
                }
                Some(b'-') => {
                    self.pos += 1;
                    let rhs = self.parse_term()?;
                    lhs = lhs.sub(&rhs);
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn parse_term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.parse_unary()?;
        loop {
            match self.peek() {
                Some(b'*') => {
                    self.pos += 1;
                    let rhs = self.parse_unary()?;
                    lhs = lhs.mul(&rhs);
                }
                Some(b'/') => {
                    self.pos += 1;
                    let rhs = self.parse_unary()?;
                    lhs = lhs.div(&rhs);
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn parse_unary(&mut self) -> Result<Expr, ParseError> {
        if self.peek() == Some(b'-') {
            self.pos += 1;
            let inner = self.parse_unary()?;
            return Ok(inner.neg());
        }
        self.parse_power()
    }

    fn parse_power(&mut self) -> Result<Expr, ParseError> {
        let base = self.parse_atom()?;
        if self.peek() == Some(b'^') {
            self.pos += 1;
            // Right-associative; the exponent may carry its own sign.
            let exponent = self.parse_unary()?;
            return Ok(base.pow(&exponent));
        }
        Ok(base)
    }

    fn parse_atom(&mut self) -> Result<Expr, ParseError> {
        match self.peek() {
            None => Err(ParseError::UnexpectedEnd(self.pos)),
            Some(b'(') => {
                self.pos += 1;
                let inner = self.parse_expr()?;
                self.expect(b')')?;
                Ok(inner)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => self.parse_number(),
            Some(c) if c.is_ascii_alphabetic() || c == b'_' => self.parse_ident(),
            Some(c) => Err(ParseError::UnexpectedChar {
                ch: self.src[self.pos..].chars().next().unwrap_or(c as char),
                at: self.pos,
            }),
        }
    }

    fn parse_number(&mut self) -> Result<Expr, ParseError> {
        let start = self.pos;
        let bytes = self.src.as_bytes();
        while self.pos < bytes.len() && (bytes[self.pos].is_ascii_digit() || bytes[self.pos] == b'.')
        {
            self.pos += 1;
        }
        if self.pos < bytes.len() && (bytes[self.pos] == b'e' || bytes[self.pos] == b'E') {
            let mark = self.pos;
            self.pos += 1;
            if self.pos < bytes.len() && (bytes[self.pos] == b'+' || bytes[self.pos] == b'-') {
                self.pos += 1;
            }
            if self.pos < bytes.len() && bytes[self.pos].is_ascii_digit() {
                while self.pos < bytes.len() && bytes[self.pos].is_ascii_digit() {
                    self.pos += 1;
                }
            } else {
                // Not an exponent after all (e.g. a following symbol): back off.
                self.pos = mark;
            }
        }
        let text = &self.src[start..self.pos];
        match f64::from_str(text) {
            Ok(v) if v.is_finite() => Ok(Expr::num(v)),
            _ => Err(ParseError::InvalidNumber {
                text: text.to_string(),
                at: start,
            }),
        }
    }

    fn parse_ident(&mut self) -> Result<Expr, ParseError> {
        let start = self.pos;
        let bytes = self.src.as_bytes();
        while self.pos < bytes.len()
            && (bytes[self.pos].is_ascii_alphanumeric() || bytes[self.pos] == b'_')
        {
            self.pos += 1;
        }
        let name = &self.src[start..self.pos];
        if let Some(func) = Func::from_name(name) {
            if self.peek() != Some(b'(') {
                return Err(ParseError::MissingCallParen {
                    name: name.to_string(),
                    at: self.pos,
                });
            }
            self.pos += 1;
            let arg = self.parse_expr()?;
            self.expect(b')')?;
            Ok(Expr::call(func, &arg))
        } else {
            Ok(Expr::sym(name))
        }
    }
}

impl FromStr for Expr {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut p = Parser::new(s);
        let expr = p.parse_expr()?;
        p.skip_ws();
        if p.pos != s.len() {
            return Err(ParseError::Trailing { at: p.pos });
        }
        Ok(expr)
    }
}
