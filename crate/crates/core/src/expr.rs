//! Arithmetic expressions in the chart coordinates `u, v, w`, evaluated on
//! jets, and the TOML file format that describes a user immersion with
//! them.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::hypersurface::{HypersurfaceError, Immersion};
use crate::jet::{Jet, JetError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ExprError {
    #[error("parse error at byte {pos}: {message}")]
    Parse { pos: usize, message: String },
    #[error("unknown identifier `{0}`")]
    UnknownIdentifier(String),
    #[error("unknown function `{0}`")]
    UnknownFunction(String),
    #[error(transparent)]
    Jet(#[from] JetError),
    #[error("invalid immersion file: {0}")]
    File(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Tan,
    Sinh,
    Cosh,
    Exp,
    Ln,
    Sqrt,
}

impl Func {
    fn from_name(name: &str) -> Option<Func> {
        Some(match name {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "tan" => Func::Tan,
            "sinh" => Func::Sinh,
            "cosh" => Func::Cosh,
            "exp" => Func::Exp,
            "ln" => Func::Ln,
            "sqrt" => Func::Sqrt,
            _ => return None,
        })
    }

    fn name(&self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Tan => "tan",
            Func::Sinh => "sinh",
            Func::Cosh => "cosh",
            Func::Exp => "exp",
            Func::Ln => "ln",
            Func::Sqrt => "sqrt",
        }
    }

    fn apply(&self, x: &Jet) -> Result<Jet, JetError> {
        Ok(match self {
            Func::Sin => x.sin(),
            Func::Cos => x.cos(),
            Func::Tan => x.tan(),
            Func::Sinh => x.sinh(),
            Func::Cosh => x.cosh(),
            Func::Exp => x.exp(),
            Func::Ln => x.try_ln()?,
            Func::Sqrt => x.try_sqrt()?,
        })
    }
}

/// Parsed expression. Parameters are substituted at parse time, so the
/// only free symbols left are the chart coordinates.
#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Num(f64),
    Coord(usize),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>),
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(x) => write!(f, "{x}"),
            Expr::Coord(i) => write!(f, "{}", ["u", "v", "w"][*i]),
            Expr::Neg(a) => write!(f, "(-{a})"),
            Expr::Add(a, b) => write!(f, "({a} + {b})"),
            Expr::Sub(a, b) => write!(f, "({a} - {b})"),
            Expr::Mul(a, b) => write!(f, "({a} * {b})"),
            Expr::Div(a, b) => write!(f, "({a} / {b})"),
            Expr::Pow(a, b) => write!(f, "({a} ^ {b})"),
            Expr::Call(func, a) => write!(f, "{}({a})", func.name()),
        }
    }
}

impl Expr {
    /// The value when the expression has no coordinates in it.
    fn constant(&self) -> Option<f64> {
        if self.has_coordinates() {
            return None;
        }
        self.eval_f64([0.0; 3]).ok()
    }

    fn has_coordinates(&self) -> bool {
        match self {
            Expr::Num(_) => false,
            Expr::Coord(_) => true,
            Expr::Neg(a) | Expr::Call(_, a) => a.has_coordinates(),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) | Expr::Pow(a, b) => {
                a.has_coordinates() || b.has_coordinates()
            }
        }
    }

    pub fn eval(&self, vars: &[Jet; 3]) -> Result<Jet, ExprError> {
        Ok(match self {
            Expr::Num(x) => Jet::constant(*x),
            Expr::Coord(i) => vars[*i],
            Expr::Neg(a) => -a.eval(vars)?,
            Expr::Add(a, b) => a.eval(vars)? + b.eval(vars)?,
            Expr::Sub(a, b) => a.eval(vars)? - b.eval(vars)?,
            Expr::Mul(a, b) => a.eval(vars)? * b.eval(vars)?,
            Expr::Div(a, b) => a.eval(vars)?.try_div(&b.eval(vars)?)?,
            Expr::Pow(a, b) => {
                let base = a.eval(vars)?;
                match b.constant() {
                    Some(p) if p.fract() == 0.0 && p.abs() <= i32::MAX as f64 => {
                        if p < 0.0 {
                            Jet::constant(1.0).try_div(&base.powi(-p as i32))?
                        } else {
                            base.powi(p as i32)
                        }
                    }
                    Some(p) => base.try_powf(p)?,
                    None => (base.try_ln()? * b.eval(vars)?).exp(),
                }
            }
            Expr::Call(func, a) => func.apply(&a.eval(vars)?)?,
        })
    }

    pub fn eval_f64(&self, point: [f64; 3]) -> Result<f64, ExprError> {
        Ok(self.eval(&crate::jet::chart_variables(point))?.value())
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Token {
    Num(f64),
    Ident(String),
    Op(char),
}

fn tokenize(src: &str) -> Result<Vec<(usize, Token)>, ExprError> {
    let mut out = Vec::new();
    let bytes = src.as_bytes();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        if c.is_ascii_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || c == '.' {
            let start = i;
            while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
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
            let text = &src[start..i];
            let value = text.parse::<f64>().map_err(|_| ExprError::Parse {
                pos: start,
                message: format!("bad number `{text}`"),
            })?;
            out.push((start, Token::Num(value)));
        } else if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            out.push((start, Token::Ident(src[start..i].to_string())));
        } else if "+-*/^()".contains(c) {
            out.push((i, Token::Op(c)));
            i += 1;
        } else {
            return Err(ExprError::Parse {
                pos: i,
                message: format!("unexpected character `{c}`"),
            });
        }
    }
    Ok(out)
}

struct Parser<'a> {
    tokens: Vec<(usize, Token)>,
    at: usize,
    end: usize,
    params: &'a BTreeMap<String, f64>,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.at).map(|(_, t)| t)
    }

    fn pos(&self) -> usize {
        self.tokens.get(self.at).map(|(p, _)| *p).unwrap_or(self.end)
    }

    fn error<T>(&self, message: impl Into<String>) -> Result<T, ExprError> {
        Err(ExprError::Parse {
            pos: self.pos(),
            message: message.into(),
        })
    }

    fn eat(&mut self, op: char) -> bool {
        if self.peek() == Some(&Token::Op(op)) {
            self.at += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<Expr, ExprError> {
        let mut lhs = self.term()?;
        loop {
            if self.eat('+') {
                lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
            } else if self.eat('-') {
                lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term(&mut self) -> Result<Expr, ExprError> {
        let mut lhs = self.unary()?;
        loop {
            if self.eat('*') {
                lhs = Expr::Mul(Box::new(lhs), Box::new(self.unary()?));
            } else if self.eat('/') {
                lhs = Expr::Div(Box::new(lhs), Box::new(self.unary()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn unary(&mut self) -> Result<Expr, ExprError> {
        if self.eat('-') {
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        if self.eat('+') {
            return self.unary();
        }
        self.power()
    }

    // right associative, binds tighter than unary minus on its left:
    // -u^2 is -(u^2), u^-1 is u^(-1)
    fn power(&mut self) -> Result<Expr, ExprError> {
        let base = self.atom()?;
        if self.eat('^') {
            let exponent = self.unary()?;
            return Ok(Expr::Pow(Box::new(base), Box::new(exponent)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr, ExprError> {
        let Some(token) = self.peek().cloned() else {
            return self.error("unexpected end of input");
        };
        match token {
            Token::Num(x) => {
                self.at += 1;
                Ok(Expr::Num(x))
            }
            Token::Op('(') => {
                self.at += 1;
                let inner = self.expr()?;
                if !self.eat(')') {
                    return self.error("expected `)`");
                }
                Ok(inner)
            }
            Token::Ident(name) => {
                self.at += 1;
                if self.peek() == Some(&Token::Op('(')) {
                    let func = Func::from_name(&name).ok_or_else(|| ExprError::UnknownFunction(name.clone()))?;
                    self.at += 1;
                    let arg = self.expr()?;
                    if !self.eat(')') {
                        return self.error("expected `)` after function argument");
                    }
                    return Ok(Expr::Call(func, Box::new(arg)));
                }
                match name.as_str() {
                    "u" => Ok(Expr::Coord(0)),
                    "v" => Ok(Expr::Coord(1)),
                    "w" => Ok(Expr::Coord(2)),
                    "pi" => Ok(Expr::Num(std::f64::consts::PI)),
                    _ => match self.params.get(&name) {
                        Some(&x) => Ok(Expr::Num(x)),
                        None => Err(ExprError::UnknownIdentifier(name)),
                    },
                }
            }
            Token::Op(c) => self.error(format!("unexpected `{c}`")),
        }
    }
}

/// Parse `src`, substituting the named parameters.
pub fn parse(src: &str, params: &BTreeMap<String, f64>) -> Result<Expr, ExprError> {
    let tokens = tokenize(src)?;
    let mut parser = Parser {
        tokens,
        at: 0,
        end: src.len(),
        params,
    };
    let expr = parser.expr()?;
    if parser.at != parser.tokens.len() {
        return parser.error("trailing input");
    }
    Ok(expr)
}

/// A user-supplied immersion:
///
/// ```toml
/// name = "paraboloid"
/// x = ["u", "v", "w", "u^2 + v^2 + w^2"]
/// domain = [[-0.4, 0.4], [-0.4, 0.4], [-0.4, 0.4]]
/// orientation = 1
///
/// [parameters]
/// c = 1.0
/// ```
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ImmersionFile {
    pub name: String,
    pub x: [String; 4],
    pub domain: [[f64; 2]; 3],
    #[serde(default = "default_orientation")]
    pub orientation: f64,
    #[serde(default)]
    pub parameters: BTreeMap<String, f64>,
}

fn default_orientation() -> f64 {
    1.0
}

impl ImmersionFile {
    pub fn from_toml_str(src: &str) -> Result<Self, ExprError> {
        toml::from_str(src).map_err(|e| ExprError::File(e.to_string()))
    }

    /// Build the immersion with `overrides` replacing declared parameters.
    pub fn to_immersion(&self, overrides: &BTreeMap<String, f64>) -> Result<Immersion, ExprError> {
        let mut params = self.parameters.clone();
        for (k, v) in overrides {
            if !params.contains_key(k) {
                return Err(ExprError::File(format!("parameter `{k}` is not declared in the file")));
            }
            params.insert(k.clone(), *v);
        }
        for (i, [lo, hi]) in self.domain.iter().enumerate() {
            if !(lo < hi) {
                return Err(ExprError::File(format!("domain axis {i} is empty: [{lo}, {hi}]")));
            }
        }
        if self.orientation != 1.0 && self.orientation != -1.0 {
            return Err(ExprError::File("orientation must be 1 or -1".into()));
        }
        let mut exprs = Vec::with_capacity(4);
        for src in &self.x {
            exprs.push(parse(src, &params)?);
        }
        let exprs: Arc<Vec<Expr>> = Arc::new(exprs);
        Ok(Immersion::new(self.name.clone(), self.domain, move |vars| {
            let mut out = [Jet::zero(); 4];
            for (slot, e) in out.iter_mut().zip(exprs.iter()) {
                *slot = e.eval(vars).map_err(|err| match err {
                    ExprError::Jet(j) => HypersurfaceError::Jet(j),
                    other => HypersurfaceError::Evaluation(other.to_string()),
                })?;
            }
            Ok(out)
        })
        .with_orientation(self.orientation))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(src: &str) -> Expr {
        parse(src, &BTreeMap::new()).unwrap()
    }

    #[test]
    fn precedence() {
        assert_eq!(p("1 + 2 * 3").eval_f64([0.0; 3]).unwrap(), 7.0);
        assert_eq!(p("-2^2").eval_f64([0.0; 3]).unwrap(), -4.0);
        assert_eq!(p("2^3^2").eval_f64([0.0; 3]).unwrap(), 512.0);
        assert_eq!(p("2^-1").eval_f64([0.0; 3]).unwrap(), 0.5);
        assert_eq!(p("8 / 4 / 2").eval_f64([0.0; 3]).unwrap(), 1.0);
        assert_eq!(p("1.5e1 - 5").eval_f64([0.0; 3]).unwrap(), 10.0);
    }

    #[test]
    fn coordinates_and_functions() {
        let e = p("u*cosh(v) + sin(w)^2 + sqrt(u)");
        let got = e.eval_f64([4.0, 0.5, 0.3]).unwrap();
        let want = 4.0 * 0.5f64.cosh() + 0.3f64.sin().powi(2) + 2.0;
        assert!((got - want).abs() < 1e-14);
    }

    #[test]
    fn derivatives_come_through() {
        let e = p("u^v");
        let x = e.eval(&crate::jet::chart_variables([2.0, 3.0, 0.0])).unwrap();
        assert!((x.d1(0) - 3.0 * 4.0).abs() < 1e-12);
        assert!((x.d1(1) - 8.0 * 2f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn parameters_substitute() {
        let params = BTreeMap::from([("c".to_string(), 2.0)]);
        let e = parse("cosh(u)/c + pi", &params).unwrap();
        assert!((e.eval_f64([0.0; 3]).unwrap() - (0.5 + std::f64::consts::PI)).abs() < 1e-15);
    }

    #[test]
    fn errors() {
        let none = BTreeMap::new();
        assert!(matches!(parse("u +", &none), Err(ExprError::Parse { .. })));
        assert!(matches!(parse("(u", &none), Err(ExprError::Parse { .. })));
        assert!(matches!(parse("u v", &none), Err(ExprError::Parse { .. })));
        assert!(matches!(parse("u $ 2", &none), Err(ExprError::Parse { pos: 2, .. })));
        assert_eq!(parse("q", &none), Err(ExprError::UnknownIdentifier("q".into())));
        assert_eq!(parse("foo(u)", &none), Err(ExprError::UnknownFunction("foo".into())));
        assert!(matches!(p("ln(u)").eval_f64([-1.0, 0.0, 0.0]), Err(ExprError::Jet(_))));
    }

    #[test]
    fn file_round_trip() {
        let src = r#"
name = "de sitter"
x = ["sinh(u)/c", "cosh(u)*sin(v)*cos(w)/c", "cosh(u)*sin(v)*sin(w)/c", "cosh(u)*cos(v)/c"]
domain = [[-1, 1], [0.3, 2.8], [0, 6]]

[parameters]
c = 1.0
"#;
        let file = ImmersionFile::from_toml_str(src).unwrap();
        let imm = file.to_immersion(&BTreeMap::from([("c".to_string(), 2.0)])).unwrap();
        let x = imm.position([0.2, 1.0, 0.5]).unwrap();
        assert!((x.norm_sq() - 0.25).abs() < 1e-14);
        assert!(file.to_immersion(&BTreeMap::from([("k".to_string(), 2.0)])).is_err());
        assert!(ImmersionFile::from_toml_str("name = 1").is_err());
    }
}
