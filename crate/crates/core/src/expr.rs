//! A small expression grammar for user-supplied profiles.
//!
//! ```text
//! expr  := term (('+' | '-') term)*
//! term  := unary (('*' | '/') unary)*
//! unary := ('-' | '+') unary | power
//! power := atom ('^' unary)?          right associative
//! atom  := number | pi | VAR | FUNC '(' expr ')' | '(' expr ')'
//! ```
//!
//! Functions: `exp log ln sqrt sin cos tanh sinh cosh`. The variable name is
//! chosen by the caller (`x`, `y`, `s`, `t`, ...). Parsed expressions evaluate
//! on [`Jet`]s, so derivatives of any order come for free.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::func::ScalarFn;
use crate::jet::Jet;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Func {
    Exp,
    Log,
    Sqrt,
    Sin,
    Cos,
    Tanh,
    Sinh,
    Cosh,
}

impl Func {
    fn from_name(name: &str) -> Option<Func> {
        Some(match name {
            "exp" => Func::Exp,
            "log" | "ln" => Func::Log,
            "sqrt" => Func::Sqrt,
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "tanh" => Func::Tanh,
            "sinh" => Func::Sinh,
            "cosh" => Func::Cosh,
            _ => return None,
        })
    }

    fn apply(self, x: Jet) -> Jet {
        match self {
            Func::Exp => x.exp(),
            Func::Log => x.ln(),
            Func::Sqrt => x.sqrt(),
            Func::Sin => x.sin(),
            Func::Cos => x.cos(),
            Func::Tanh => x.tanh(),
            Func::Sinh => x.sinh(),
            Func::Cosh => x.cosh(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Num(f64),
    Var,
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>),
}

impl Expr {
    fn is_constant(&self) -> bool {
        match self {
            Expr::Num(_) => true,
            Expr::Var => false,
            Expr::Neg(a) | Expr::Call(_, a) => a.is_constant(),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) | Expr::Pow(a, b) => {
                a.is_constant() && b.is_constant()
            }
        }
    }

    pub fn eval(&self, x: Jet) -> Jet {
        match self {
            Expr::Num(v) => Jet::constant(*v),
            Expr::Var => x,
            Expr::Neg(a) => -a.eval(x),
            Expr::Add(a, b) => a.eval(x) + b.eval(x),
            Expr::Sub(a, b) => a.eval(x) - b.eval(x),
            Expr::Mul(a, b) => a.eval(x) * b.eval(x),
            Expr::Div(a, b) => a.eval(x) / b.eval(x),
            Expr::Pow(a, b) => {
                let base = a.eval(x);
                if b.is_constant() {
                    let e = b.eval(Jet::constant(0.0)).value();
                    if e.fract() == 0.0 && e.abs() <= i32::MAX as f64 {
                        base.powi(e as i32)
                    } else {
                        base.powf(e)
                    }
                } else {
                    (b.eval(x) * base.ln()).exp()
                }
            }
            Expr::Call(f, a) => f.apply(a.eval(x)),
        }
    }

    pub fn eval_f64(&self, x: f64) -> f64 {
        self.eval(Jet::constant(x)).value()
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Op(char),
    LParen,
    RParen,
}

fn tokenize(text: &str) -> Result<Vec<(usize, Tok)>> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        if c.is_ascii_digit() || c == '.' {
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                i += 1;
            }
            // exponent part: 1e-3, 2.5E4
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let mut j = i + 1;
                if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                    j += 1;
                }
                if j < chars.len() && chars[j].is_ascii_digit() {
                    i = j;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            let s: String = chars[start..i].iter().collect();
            let v: f64 = s.parse().map_err(|_| Error::Parse {
                position: start,
                message: format!("malformed number '{s}'"),
            })?;
            out.push((start, Tok::Num(v)));
            continue;
        }
        if c.is_alphabetic() || c == '_' {
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            out.push((start, Tok::Ident(chars[start..i].iter().collect())));
            continue;
        }
        let tok = match c {
            '+' => Tok::Op('+'),
            '-' | '\u{2212}' => Tok::Op('-'),
            '*' | '\u{00d7}' => Tok::Op('*'),
            '/' | '\u{00f7}' => Tok::Op('/'),
            '^' => Tok::Op('^'),
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            _ => {
                return Err(Error::Parse {
                    position: start,
                    message: format!("unexpected character '{c}'"),
                })
            }
        };
        out.push((start, tok));
        i += 1;
    }
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    end: usize,
    var: &'a str,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(_, t)| t)
    }

    fn here(&self) -> usize {
        self.toks.get(self.pos).map(|(p, _)| *p).unwrap_or(self.end)
    }

    fn err<T>(&self, message: impl Into<String>) -> Result<T> {
        Err(Error::Parse {
            position: self.here(),
            message: message.into(),
        })
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        while let Some(Tok::Op(op @ ('+' | '-'))) = self.peek() {
            let op = *op;
            self.pos += 1;
            let rhs = self.term()?;
            lhs = if op == '+' {
                Expr::Add(Box::new(lhs), Box::new(rhs))
            } else {
                Expr::Sub(Box::new(lhs), Box::new(rhs))
            };
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        while let Some(Tok::Op(op @ ('*' | '/'))) = self.peek() {
            let op = *op;
            self.pos += 1;
            let rhs = self.unary()?;
            lhs = if op == '*' {
                Expr::Mul(Box::new(lhs), Box::new(rhs))
            } else {
                Expr::Div(Box::new(lhs), Box::new(rhs))
            };
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr> {
        match self.peek() {
            Some(Tok::Op('-')) => {
                self.pos += 1;
                Ok(Expr::Neg(Box::new(self.unary()?)))
            }
            Some(Tok::Op('+')) => {
                self.pos += 1;
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<Expr> {
        let base = self.atom()?;
        if let Some(Tok::Op('^')) = self.peek() {
            self.pos += 1;
            let exp = self.unary()?;
            return Ok(Expr::Pow(Box::new(base), Box::new(exp)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr> {
        match self.peek().cloned() {
            Some(Tok::Num(v)) => {
                self.pos += 1;
                Ok(Expr::Num(v))
            }
            Some(Tok::LParen) => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect_rparen()?;
                Ok(e)
            }
            Some(Tok::Ident(name)) => {
                if name == self.var {
                    self.pos += 1;
                    return Ok(Expr::Var);
                }
                if name == "pi" {
                    self.pos += 1;
                    return Ok(Expr::Num(std::f64::consts::PI));
                }
                match Func::from_name(&name) {
                    Some(f) => {
                        self.pos += 1;
                        if self.peek() != Some(&Tok::LParen) {
                            return self.err(format!("expected '(' after '{name}'"));
                        }
                        self.pos += 1;
                        let arg = self.expr()?;
                        self.expect_rparen()?;
                        Ok(Expr::Call(f, Box::new(arg)))
                    }
                    None => self.err(format!("unknown identifier '{name}'")),
                }
            }
            Some(t) => self.err(format!("unexpected token {t:?}")),
            None => self.err("unexpected end of input"),
        }
    }

    fn expect_rparen(&mut self) -> Result<()> {
        if self.peek() == Some(&Tok::RParen) {
            self.pos += 1;
            Ok(())
        } else {
            self.err("expected ')'")
        }
    }
}

/// Parse `text` with free variable `var`.
pub fn parse(text: &str, var: &str) -> Result<Expr> {
    let toks = tokenize(text)?;
    let mut p = Parser {
        toks,
        pos: 0,
        end: text.chars().count(),
        var,
    };
    let e = p.expr()?;
    if p.pos != p.toks.len() {
        return p.err("trailing input");
    }
    Ok(e)
}

/// Parse into a differentiable function handle.
pub fn parse_function(text: &str, var: &str) -> Result<ScalarFn> {
    let e = Arc::new(parse(text, var)?);
    Ok(ScalarFn::new(text.trim(), move |x| e.eval(x)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_value_and_derivative() {
        let f = parse_function("1 - x^2", "x").unwrap();
        assert_eq!(f.eval(2.0), -3.0);
        assert_eq!(f.d1(2.0), -4.0);
    }

    #[test]
    fn rational_profile() {
        let f = parse_function("-1/(2+2*x)", "x").unwrap();
        assert_eq!(f.eval(0.0), -0.5);
    }

    #[test]
    fn sqrt_derivative() {
        let f = parse_function("sqrt(1+x)", "x").unwrap();
        assert!((f.d1(0.0) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn precedence_and_associativity() {
        assert_eq!(parse("-x^2", "x").unwrap().eval_f64(3.0), -9.0);
        assert_eq!(parse("2^3^2", "x").unwrap().eval_f64(0.0), 512.0);
        assert_eq!(parse("2^-1", "x").unwrap().eval_f64(0.0), 0.5);
        assert_eq!(parse("8/4/2", "x").unwrap().eval_f64(0.0), 1.0);
        assert_eq!(parse("1-2-3", "x").unwrap().eval_f64(0.0), -4.0);
        assert!((parse("1.5e-1*t", "t").unwrap().eval_f64(2.0) - 0.3).abs() < 1e-15);
    }

    #[test]
    fn variable_exponent() {
        let f = parse_function("x^x", "x").unwrap();
        // d/dx x^x = x^x (ln x + 1)
        assert!((f.d1(2.0) - 4.0 * (2f64.ln() + 1.0)).abs() < 1e-13);
    }

    #[test]
    fn functions_and_pi() {
        let f = parse_function("sin(pi*x) + cos(x) * exp(x) - tanh(x) + log(1+x)", "x").unwrap();
        let x: f64 = 0.3;
        let want = (std::f64::consts::PI * x).sin() + x.cos() * x.exp() - x.tanh() + (1.0 + x).ln();
        assert!((f.eval(x) - want).abs() < 1e-15);
    }

    #[test]
    fn errors_carry_position() {
        match parse("1 + * x", "x") {
            Err(Error::Parse { position, .. }) => assert_eq!(position, 4),
            other => panic!("unexpected {other:?}"),
        }
        match parse("foo(x)", "x") {
            Err(Error::Parse { position, .. }) => assert_eq!(position, 0),
            other => panic!("unexpected {other:?}"),
        }
        match parse("(x + 1", "x") {
            Err(Error::Parse { position, .. }) => assert_eq!(position, 6),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(parse("x $ 2", "x"), Err(Error::Parse { position: 2, .. })));
        assert!(parse("y", "x").is_err());
    }
}
