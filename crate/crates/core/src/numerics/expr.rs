//! Tiny arithmetic expression language for configuration reals:
//! decimal literals, `+ - * /`, parentheses, `acosh`, `sqrt` (and a few more
//! elementary functions), evaluated at a fixed precision.

use rug::Float;

use crate::error::{Error, Result};

pub fn eval_expr(src: &str, prec: u32) -> Result<Float> {
    let mut p = Parser {
        src: src.as_bytes(),
        pos: 0,
        prec,
    };
    let v = p.expr()?;
    p.skip_ws();
    if p.pos != p.src.len() {
        return Err(p.err("trailing input"));
    }
    Ok(v)
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    prec: u32,
}

impl Parser<'_> {
    fn err(&self, msg: &str) -> Error {
        Error::Config(format!(
            "expression '{}': {msg} at offset {}",
            String::from_utf8_lossy(self.src),
            self.pos
        ))
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

    fn expr(&mut self) -> Result<Float> {
        let mut acc = self.term()?;
        while let Some(c) = self.peek() {
            match c {
                b'+' => {
                    self.pos += 1;
                    acc += self.term()?;
                }
                b'-' => {
                    self.pos += 1;
                    acc -= self.term()?;
                }
                _ => break,
            }
        }
        Ok(acc)
    }

    fn term(&mut self) -> Result<Float> {
        let mut acc = self.unary()?;
        while let Some(c) = self.peek() {
            match c {
                b'*' => {
                    self.pos += 1;
                    acc *= self.unary()?;
                }
                b'/' => {
                    self.pos += 1;
                    acc /= self.unary()?;
                }
                _ => break,
            }
        }
        Ok(acc)
    }

    fn unary(&mut self) -> Result<Float> {
        match self.peek() {
            Some(b'-') => {
                self.pos += 1;
                Ok(-self.unary()?)
            }
            Some(b'+') => {
                self.pos += 1;
                self.unary()
            }
            _ => self.atom(),
        }
    }

    fn atom(&mut self) -> Result<Float> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let v = self.expr()?;
                if self.peek() != Some(b')') {
                    return Err(self.err("expected ')'"));
                }
                self.pos += 1;
                Ok(v)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => self.number(),
            Some(c) if c.is_ascii_alphabetic() => self.call(),
            _ => Err(self.err("unexpected token")),
        }
    }

    fn number(&mut self) -> Result<Float> {
        let start = self.pos;
        while self.pos < self.src.len() {
            let c = self.src[self.pos];
            let exp_sign = (c == b'-' || c == b'+')
                && self.pos > start
                && matches!(self.src[self.pos - 1], b'e' | b'E');
            if c.is_ascii_digit() || c == b'.' || c == b'e' || c == b'E' || exp_sign {
                self.pos += 1;
            } else {
                break;
            }
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
        let parsed = Float::parse(text).map_err(|_| self.err("bad number"))?;
        Ok(Float::with_val(self.prec, parsed))
    }

    fn call(&mut self) -> Result<Float> {
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_alphanumeric() {
            self.pos += 1;
        }
        let name = std::str::from_utf8(&self.src[start..self.pos]).unwrap().to_string();
        if name == "pi" {
            return Ok(crate::numerics::pi(self.prec));
        }
        if self.peek() != Some(b'(') {
            return Err(self.err("expected '(' after function name"));
        }
        self.pos += 1;
        let arg = self.expr()?;
        if self.peek() != Some(b')') {
            return Err(self.err("expected ')'"));
        }
        self.pos += 1;
        let v = match name.as_str() {
            "acosh" => arg.acosh(),
            "asinh" => arg.asinh(),
            "atanh" => arg.atanh(),
            "cosh" => arg.cosh(),
            "sinh" => arg.sinh(),
            "sqrt" => arg.sqrt(),
            "ln" | "log" => arg.ln(),
            "exp" => arg.exp(),
            _ => return Err(self.err(&format!("unknown function '{name}'"))),
        };
        if v.is_nan() {
            return Err(self.err(&format!("{name} argument out of domain")));
        }
        Ok(v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn evaluates_fenchel_nielsen_expressions() {
        let p = 256;
        let v = eval_expr("2*acosh(2)", p).unwrap();
        let expected = Float::with_val(p, 2).acosh() * 2;
        assert_eq!(v, expected);
        let v = eval_expr("2*acosh(3 + 2*sqrt(2))", p).unwrap();
        let mut e: Float = Float::with_val(p, 2).sqrt() * 2u32;
        e += 3;
        assert_eq!(v, e.acosh() * 2);
        assert_eq!(eval_expr("1/2", p).unwrap(), Float::with_val(p, 0.5));
        assert_eq!(eval_expr("-(1/4) + 1", p).unwrap(), Float::with_val(p, 0.75));
        assert_eq!(eval_expr("1.5e-1", p).unwrap().to_f64(), 0.15);
    }

    #[test]
    fn rejects_malformed_input() {
        assert!(eval_expr("2*", 64).is_err());
        assert!(eval_expr("foo(1)", 64).is_err());
        assert!(eval_expr("acosh(0.5)", 64).is_err());
        assert!(eval_expr("(1", 64).is_err());
    }
}
