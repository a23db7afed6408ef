//! Text form of coefficient expressions.
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := unary (('*' | '/') unary)*
//! unary   := ('-' | '+') unary | power
//! power   := primary ('^' unary)?
//! primary := number ['i'] | 'i' | 'pi' | 'xi_N' | '|xi|' | '(' expr ')'
//!          | 'jap' '(' expr ')'            ⟨ξ⟩^s, s a real constant
//!          | 'chi' '(' expr ',' expr ')'   bump χ(arg) with plateau γ
//!          | 'chi_dP' '(' expr ',' expr ')' P-th derivative of χ
//!          | 'psi' '(' expr ',' expr ')'   1 − χ(arg)
//! ```
//!
//! Exponents, `jap` orders and cutoff widths must reduce to real constants.
//! `xi_N` is one-based.

use std::fmt;

use super::{Expr, Kind, C64};
use crate::error::{Error, Result};

pub fn parse(text: &str, dim: usize) -> Result<Expr> {
    let mut p = Parser { src: text.as_bytes(), pos: 0, dim };
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
    dim: usize,
}

impl Parser<'_> {
    fn error(&self, msg: impl Into<String>) -> Error {
        Error::Parse { pos: self.pos, msg: msg.into() }
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

    fn expect(&mut self, c: u8) -> Result<()> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(self.error(format!("expected `{}`", c as char)))
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut acc = self.term()?;
        loop {
            if self.eat(b'+') {
                acc = acc + self.term()?;
            } else if self.eat(b'-') {
                acc = acc - self.term()?;
            } else {
                return Ok(acc);
            }
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut acc = self.unary()?;
        loop {
            if self.eat(b'*') {
                acc = acc * self.unary()?;
            } else if self.eat(b'/') {
                let start = self.pos;
                let d = self.unary()?;
                acc = match d.as_const() {
                    Some(c) if c == C64::new(0.0, 0.0) => {
                        return Err(Error::Parse { pos: start, msg: "division by zero".into() })
                    }
                    Some(c) => acc.scale(c.inv()),
                    None => acc * d.pow(-1.0),
                };
            } else {
                return Ok(acc);
            }
        }
    }

    fn unary(&mut self) -> Result<Expr> {
        if self.eat(b'-') {
            return Ok(-self.unary()?);
        }
        if self.eat(b'+') {
            return self.unary();
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr> {
        let base = self.primary()?;
        if self.eat(b'^') {
            let e = self.real_constant(|p| p.unary(), "exponent")?;
            return Ok(base.pow(e));
        }
        Ok(base)
    }

    fn real_constant(&mut self, f: impl FnOnce(&mut Self) -> Result<Expr>, what: &str) -> Result<f64> {
        self.skip_ws();
        let start = self.pos;
        let e = f(self)?;
        match e.as_const() {
            Some(c) if c.im == 0.0 => Ok(c.re),
            _ => Err(Error::Parse { pos: start, msg: format!("{what} must be a real constant") }),
        }
    }

    fn ident(&mut self) -> String {
        let start = self.pos;
        while self.pos < self.src.len() && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_') {
            self.pos += 1;
        }
        String::from_utf8_lossy(&self.src[start..self.pos]).into_owned()
    }

    fn number(&mut self) -> Result<f64> {
        let start = self.pos;
        let digits = |p: &mut Self| {
            while p.pos < p.src.len() && p.src[p.pos].is_ascii_digit() {
                p.pos += 1;
            }
        };
        digits(self);
        if self.pos < self.src.len() && self.src[self.pos] == b'.' {
            self.pos += 1;
            digits(self);
        }
        if self.pos < self.src.len() && (self.src[self.pos] == b'e' || self.src[self.pos] == b'E') {
            let save = self.pos;
            self.pos += 1;
            if self.pos < self.src.len() && (self.src[self.pos] == b'+' || self.src[self.pos] == b'-') {
                self.pos += 1;
            }
            let exp_start = self.pos;
            digits(self);
            if self.pos == exp_start {
                self.pos = save;
            }
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).unwrap_or("");
        text.parse::<f64>().map_err(|_| Error::Parse { pos: start, msg: format!("bad number `{text}`") })
    }

    fn call_args(&mut self, n: usize) -> Result<Vec<Expr>> {
        self.expect(b'(')?;
        let mut args = vec![self.expr()?];
        while args.len() < n {
            self.expect(b',')?;
            args.push(self.expr()?);
        }
        self.expect(b')')?;
        Ok(args)
    }

    fn cutoff_width(&self, e: &Expr, pos: usize) -> Result<f64> {
        match e.as_const() {
            Some(c) if c.im == 0.0 && c.re > 0.0 => Ok(c.re),
            _ => Err(Error::Parse { pos, msg: "cutoff width must be a positive real constant".into() }),
        }
    }

    fn primary(&mut self) -> Result<Expr> {
        let c = self.peek().ok_or_else(|| self.error("unexpected end of input"))?;
        let start = self.pos;
        if c.is_ascii_digit() || c == b'.' {
            let v = self.number()?;
            if self.pos < self.src.len() && self.src[self.pos] == b'i' {
                let next = self.src.get(self.pos + 1).copied();
                if !next.is_some_and(|b| b.is_ascii_alphanumeric() || b == b'_') {
                    self.pos += 1;
                    return Ok(Expr::constant(C64::new(0.0, v)));
                }
            }
            return Ok(Expr::real(v));
        }
        if c == b'(' {
            self.pos += 1;
            let e = self.expr()?;
            self.expect(b')')?;
            return Ok(e);
        }
        if c == b'|' {
            self.pos += 1;
            self.skip_ws();
            if self.ident() != "xi" {
                return Err(Error::Parse { pos: start, msg: "expected `|xi|`".into() });
            }
            self.expect(b'|')?;
            return Ok(Expr::norm());
        }
        if c.is_ascii_alphabetic() || c == b'_' {
            let name = self.ident();
            return match name.as_str() {
                "i" => Ok(Expr::imag_unit()),
                "pi" => Ok(Expr::real(std::f64::consts::PI)),
                "jap" => {
                    self.expect(b'(')?;
                    let s = self.real_constant(|p| p.expr(), "jap order")?;
                    self.expect(b')')?;
                    Ok(Expr::jap_pow(s))
                }
                "chi" | "psi" => {
                    let args = self.call_args(2)?;
                    let g = self.cutoff_width(&args[1], start)?;
                    let b = Expr::bump(g, args[0].clone());
                    Ok(if name == "psi" { Expr::one() - b } else { b })
                }
                _ if name.starts_with("chi_d") => {
                    let order: u32 = name[5..]
                        .parse()
                        .map_err(|_| Error::Parse { pos: start, msg: format!("unknown identifier `{name}`") })?;
                    let args = self.call_args(2)?;
                    let g = self.cutoff_width(&args[1], start)?;
                    Ok(Expr::bump_derivative(order, g, args[0].clone()))
                }
                _ if name.starts_with("xi_") => {
                    let idx: usize = name[3..]
                        .parse()
                        .map_err(|_| Error::Parse { pos: start, msg: format!("unknown identifier `{name}`") })?;
                    if idx == 0 || idx > self.dim {
                        return Err(Error::Parse {
                            pos: start,
                            msg: format!("index of `{name}` out of range 1..={}", self.dim),
                        });
                    }
                    Ok(Expr::xi(idx - 1))
                }
                _ => Err(Error::Parse { pos: start, msg: format!("unknown identifier `{name}`") }),
            };
        }
        Err(self.error(format!("unexpected character `{}`", c as char)))
    }
}

fn write_real(f: &mut fmt::Formatter<'_>, x: f64) -> fmt::Result {
    if x < 0.0 || (x == 0.0 && x.is_sign_negative()) {
        write!(f, "({x:?})")
    } else {
        write!(f, "{x:?}")
    }
}

fn write_const(f: &mut fmt::Formatter<'_>, c: C64) -> fmt::Result {
    if c.im == 0.0 {
        write_real(f, c.re)
    } else if c.re == 0.0 {
        write!(f, "({:?}i)", c.im)
    } else {
        write!(f, "({:?}{}{:?}i)", c.re, if c.im < 0.0 { "-" } else { "+" }, c.im.abs())
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind() {
            Kind::Const(c) => write_const(f, *c),
            Kind::Xi(i) => write!(f, "xi_{}", i + 1),
            Kind::Norm => write!(f, "|xi|"),
            Kind::Jap => write!(f, "jap(1.0)"),
            Kind::Bump { order, gamma, arg } => {
                if *order == 0 {
                    write!(f, "chi({arg}, {gamma:?})")
                } else {
                    write!(f, "chi_d{order}({arg}, {gamma:?})")
                }
            }
            Kind::Pow { base, exp } => match base.kind() {
                Kind::Jap => write!(f, "jap({exp:?})"),
                _ => {
                    write!(f, "({base})^")?;
                    write_real(f, *exp)
                }
            },
            Kind::Sum { constant, terms } => {
                write!(f, "(")?;
                let mut first = true;
                if *constant != C64::new(0.0, 0.0) {
                    write_const(f, *constant)?;
                    first = false;
                }
                for (c, t) in terms {
                    if !first {
                        write!(f, " + ")?;
                    }
                    first = false;
                    if *c == C64::new(1.0, 0.0) {
                        write!(f, "{t}")?;
                    } else {
                        write_const(f, *c)?;
                        write!(f, "*{t}")?;
                    }
                }
                write!(f, ")")
            }
            Kind::Mul(fs) => {
                write!(f, "(")?;
                for (i, x) in fs.iter().enumerate() {
                    if i > 0 {
                        write!(f, "*")?;
                    }
                    write!(f, "{x}")?;
                }
                write!(f, ")")
            }
        }
    }
}
