//! Closed-form expressions for config files.
//!
//! The grammar covers exactly what model definitions need and nothing more:
//! numeric literals, the variables `t` (time) and `x` (space), the constants
//! `pi` and `e`, the functions `sin`, `cos`, `exp`, the operators
//! `+ - * / ^` with usual precedence (`^` binds tightest, right
//! associative), unary minus and parentheses.

use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Exp,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    Time,
    Space,
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>),
}

#[derive(Debug, Clone)]
pub struct ParseError {
    pub msg: String,
    /// Byte offset into the source string.
    pub pos: usize,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} (at offset {})", self.msg, self.pos)
    }
}

impl std::error::Error for ParseError {}

impl Expr {
    pub fn eval(&self, t: f64, x: f64) -> f64 {
        match self {
            Expr::Num(v) => *v,
            Expr::Time => t,
            Expr::Space => x,
            Expr::Neg(e) => -e.eval(t, x),
            Expr::Add(a, b) => a.eval(t, x) + b.eval(t, x),
            Expr::Sub(a, b) => a.eval(t, x) - b.eval(t, x),
            Expr::Mul(a, b) => a.eval(t, x) * b.eval(t, x),
            Expr::Div(a, b) => a.eval(t, x) / b.eval(t, x),
            Expr::Pow(a, b) => a.eval(t, x).powf(b.eval(t, x)),
            Expr::Call(Func::Sin, e) => e.eval(t, x).sin(),
            Expr::Call(Func::Cos, e) => e.eval(t, x).cos(),
            Expr::Call(Func::Exp, e) => e.eval(t, x).exp(),
        }
    }

    pub fn uses_time(&self) -> bool {
        self.any(&|e| matches!(e, Expr::Time))
    }

    pub fn uses_space(&self) -> bool {
        self.any(&|e| matches!(e, Expr::Space))
    }

    fn any(&self, pred: &dyn Fn(&Expr) -> bool) -> bool {
        if pred(self) {
            return true;
        }
        match self {
            Expr::Num(_) | Expr::Time | Expr::Space => false,
            Expr::Neg(e) | Expr::Call(_, e) => e.any(pred),
            Expr::Add(a, b)
            | Expr::Sub(a, b)
            | Expr::Mul(a, b)
            | Expr::Div(a, b)
            | Expr::Pow(a, b) => a.any(pred) || b.any(pred),
        }
    }
}

pub fn parse(src: &str) -> Result<Expr, ParseError> {
    let mut p = Parser { src: src.as_bytes(), pos: 0 };
    let e = p.expr()?;
    p.skip_ws();
    if p.pos != p.src.len() {
        return Err(p.error("unexpected trailing input"));
    }
    Ok(e)
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn error(&self, msg: impl Into<String>) -> ParseError {
        ParseError { msg: msg.into(), pos: self.pos }
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

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            if self.eat(b'+') {
                lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
            } else if self.eat(b'-') {
                lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.factor()?;
        loop {
            if self.eat(b'*') {
                lhs = Expr::Mul(Box::new(lhs), Box::new(self.factor()?));
            } else if self.eat(b'/') {
                lhs = Expr::Div(Box::new(lhs), Box::new(self.factor()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn factor(&mut self) -> Result<Expr, ParseError> {
        if self.eat(b'-') {
            return Ok(Expr::Neg(Box::new(self.factor()?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.atom()?;
        if self.eat(b'^') {
            // right associative; the exponent may carry its own sign
            let exp = self.factor()?;
            return Ok(Expr::Pow(Box::new(base), Box::new(exp)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                if !self.eat(b')') {
                    return Err(self.error("expected ')'"));
                }
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => self.number(),
            Some(c) if c.is_ascii_alphabetic() => self.ident(),
            _ => Err(self.error("expected a number, name or '('")),
        }
    }

    fn number(&mut self) -> Result<Expr, ParseError> {
        let start = self.pos;
        while self.pos < self.src.len()
            && (self.src[self.pos].is_ascii_digit() || self.src[self.pos] == b'.')
        {
            self.pos += 1;
        }
        // scientific suffix like 1e-3 / 2.5E4
        if self.pos < self.src.len() && matches!(self.src[self.pos], b'e' | b'E') {
            let mark = self.pos;
            self.pos += 1;
            if self.pos < self.src.len() && matches!(self.src[self.pos], b'+' | b'-') {
                self.pos += 1;
            }
            if self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                    self.pos += 1;
                }
            } else {
                // not an exponent after all ("2e" could begin "2*e"? reject)
                self.pos = mark;
            }
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
        text.parse::<f64>()
            .map(Expr::Num)
            .map_err(|_| ParseError { msg: format!("invalid number '{text}'"), pos: start })
    }

    fn ident(&mut self) -> Result<Expr, ParseError> {
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_alphabetic() {
            self.pos += 1;
        }
        let name = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
        match name {
            "t" => Ok(Expr::Time),
            "x" => Ok(Expr::Space),
            "pi" => Ok(Expr::Num(std::f64::consts::PI)),
            "e" => Ok(Expr::Num(std::f64::consts::E)),
            "sin" | "cos" | "exp" => {
                let func = match name {
                    "sin" => Func::Sin,
                    "cos" => Func::Cos,
                    _ => Func::Exp,
                };
                if !self.eat(b'(') {
                    return Err(self.error(format!("{name} needs parentheses")));
                }
                let arg = self.expr()?;
                if !self.eat(b')') {
                    return Err(self.error("expected ')'"));
                }
                Ok(Expr::Call(func, Box::new(arg)))
            }
            _ => Err(ParseError {
                msg: format!(
                    "unknown name '{name}'; allowed: t, x, pi, e, sin(...), cos(...), exp(...)"
                ),
                pos: start,
            }),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn eval(src: &str, t: f64, x: f64) -> f64 {
        parse(src).unwrap().eval(t, x)
    }

    #[test]
    fn arithmetic_and_precedence() {
        assert_relative_eq!(eval("1 + 2 * 3", 0.0, 0.0), 7.0);
        assert_relative_eq!(eval("(1 + 2) * 3", 0.0, 0.0), 9.0);
        assert_relative_eq!(eval("2 ^ 3 ^ 2", 0.0, 0.0), 512.0);
        assert_relative_eq!(eval("-2 ^ 2", 0.0, 0.0), -4.0);
        assert_relative_eq!(eval("2 ^ -1", 0.0, 0.0), 0.5);
        assert_relative_eq!(eval("6 / 3 / 2", 0.0, 0.0), 1.0);
    }

    #[test]
    fn model_expressions() {
        assert_relative_eq!(eval("2 + sin(t/3)", 6.0, 0.0), 2.0 + 2.0f64.sin());
        assert_relative_eq!(eval("3 - sin(t*x/5)", 2.0, 5.0), 3.0 - 2.0f64.sin());
        assert_relative_eq!(eval("0.04*(1 + 0.5*0.0399^t)", 0.0, 0.0), 0.06);
        assert_relative_eq!(eval("exp(-x)", 0.0, 2.0), (-2.0f64).exp());
        assert_relative_eq!(eval("1e-3 + 2.5E2", 0.0, 0.0), 250.001);
        assert_relative_eq!(eval("2*pi - e", 0.0, 0.0), 2.0 * std::f64::consts::PI - std::f64::consts::E);
    }

    #[test]
    fn variable_detection() {
        let e = parse("2 + sin(t/3)").unwrap();
        assert!(e.uses_time() && !e.uses_space());
        let g = parse("3 - sin(t*x/5)").unwrap();
        assert!(g.uses_time() && g.uses_space());
        let c = parse("0.1").unwrap();
        assert!(!c.uses_time() && !c.uses_space());
    }

    #[test]
    fn rejected_input() {
        assert!(parse("y + 1").is_err());
        assert!(parse("sin").is_err());
        assert!(parse("1 +").is_err());
        assert!(parse("(1").is_err());
        assert!(parse("1 2").is_err());
        assert!(parse("sqrt(2)").is_err());
        let err = parse("2 + foo(3)").unwrap_err();
        assert_eq!(err.pos, 4);
    }
}
