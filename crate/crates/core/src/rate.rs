//! Catalog of growth rates.
//!
//! A [`Rate`] is a total monotone function on the naturals built from a small
//! set of named primitives and closed under pointwise max, composition, shift
//! and iteration. Every rate has a textual identifier that round-trips through
//! [`Rate::from_str`] and `Display`:
//!
//! | identifier        | function          |
//! |-------------------|-------------------|
//! | `lin(c)`          | `c·(x+1)`         |
//! | `poly(c0,c1,..)`  | `c0 + c1·x + ..`  |
//! | `sq`              | `x²`              |
//! | `exp2`            | `2^x`             |
//! | `max(f,g)`        | `max(f(x), g(x))` |
//! | `comp(f,g)`       | `f(g(x))`         |
//! | `shift(k,f)`      | `f(x+k)`          |
//! | `iter(n,f)`       | `f(f(..f(x)))`    |
//!
//! Values are `u64`; every evaluation carries a cap and reports
//! [`Error::Overflow`] instead of wrapping.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum Rate {
    Linear(u64),
    Poly(Vec<u64>),
    Exp2,
    Max(Box<Rate>, Box<Rate>),
    Compose(Box<Rate>, Box<Rate>),
    Shift(u64, Box<Rate>),
    Iterate(u32, Box<Rate>),
}

impl Rate {
    pub fn linear(c: u64) -> Self {
        Rate::Linear(c)
    }

    pub fn square() -> Self {
        Rate::Poly(vec![0, 0, 1])
    }

    /// Pointwise maximum; collapses when both sides are identical.
    pub fn max(self, other: Rate) -> Rate {
        if self == other {
            self
        } else {
            Rate::Max(Box::new(self), Box::new(other))
        }
    }

    /// Evaluate at `x`, failing if any intermediate value exceeds `cap`.
    pub fn apply(&self, x: u64, cap: u64) -> Result<u64> {
        let v = self.eval(x, cap).ok_or_else(|| Error::Overflow {
            what: format!("{self}({x})"),
            cap,
        })?;
        if v > cap {
            return Err(Error::Overflow { what: format!("{self}({x})"), cap });
        }
        Ok(v)
    }

    /// Evaluate without a cap; `None` when the value does not fit in `u64`.
    pub fn try_apply(&self, x: u64) -> Option<u64> {
        self.eval(x, u64::MAX)
    }

    fn eval(&self, x: u64, cap: u64) -> Option<u64> {
        let v = match self {
            Rate::Linear(c) => c.checked_mul(x.checked_add(1)?)?,
            Rate::Poly(coeffs) => {
                // Horner from the top coefficient down.
                let mut acc: u64 = 0;
                for c in coeffs.iter().rev() {
                    acc = acc.checked_mul(x)?.checked_add(*c)?;
                }
                acc
            }
            Rate::Exp2 => {
                if x >= 64 {
                    return None;
                }
                1u64 << x
            }
            Rate::Max(f, g) => f.eval(x, cap)?.max(g.eval(x, cap)?),
            Rate::Compose(f, g) => f.eval(g.eval(x, cap)?, cap)?,
            Rate::Shift(k, f) => f.eval(x.checked_add(*k)?, cap)?,
            Rate::Iterate(n, f) => {
                let mut v = x;
                for _ in 0..*n {
                    v = f.eval(v, cap)?;
                }
                v
            }
        };
        (v <= cap).then_some(v)
    }

    /// Checks `f(x) > x` and strict increase on `lo..hi`, skipping points
    /// whose value does not fit.
    pub fn is_inflationary_on(&self, lo: u64, hi: u64) -> bool {
        let mut prev: Option<u64> = None;
        for x in lo..hi {
            let Some(v) = self.try_apply(x) else { break };
            if v <= x {
                return false;
            }
            if let Some(p) = prev {
                if v <= p {
                    return false;
                }
            }
            prev = Some(v);
        }
        true
    }

    /// `self(x) >= other(x)` for every `x` in `lo..hi` (an unrepresentable
    /// value counts as larger than any representable one).
    pub fn dominates_on(&self, other: &Rate, lo: u64, hi: u64) -> bool {
        (lo..hi).all(|x| match (self.try_apply(x), other.try_apply(x)) {
            (None, _) => true,
            (Some(_), None) => false,
            (Some(a), Some(b)) => a >= b,
        })
    }
}

impl fmt::Display for Rate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Rate::Linear(c) => write!(f, "lin({c})"),
            Rate::Poly(cs) if cs.as_slice() == [0, 0, 1] => f.write_str("sq"),
            Rate::Poly(cs) => {
                f.write_str("poly(")?;
                for (i, c) in cs.iter().enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "{c}")?;
                }
                f.write_str(")")
            }
            Rate::Exp2 => f.write_str("exp2"),
            Rate::Max(a, b) => write!(f, "max({a},{b})"),
            Rate::Compose(a, b) => write!(f, "comp({a},{b})"),
            Rate::Shift(k, a) => write!(f, "shift({k},{a})"),
            Rate::Iterate(n, a) => write!(f, "iter({n},{a})"),
        }
    }
}

impl From<Rate> for String {
    fn from(r: Rate) -> String {
        r.to_string()
    }
}

impl TryFrom<String> for Rate {
    type Error = Error;
    fn try_from(s: String) -> Result<Rate> {
        s.parse()
    }
}

impl FromStr for Rate {
    type Err = Error;

    fn from_str(s: &str) -> Result<Rate> {
        let compact: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        let mut p = RateParser { src: compact.as_bytes(), pos: 0 };
        let r = p.rate()?;
        if p.pos != p.src.len() {
            return Err(p.err("trailing input"));
        }
        Ok(r)
    }
}

struct RateParser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl RateParser<'_> {
    fn err(&self, msg: &str) -> Error {
        Error::Syntax { pos: self.pos, msg: format!("rate: {msg}") }
    }

    fn ident(&mut self) -> &str {
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_alphanumeric() {
            self.pos += 1;
        }
        std::str::from_utf8(&self.src[start..self.pos]).unwrap_or("")
    }

    fn expect(&mut self, b: u8) -> Result<()> {
        if self.src.get(self.pos) == Some(&b) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.err(&format!("expected `{}`", b as char)))
        }
    }

    fn number(&mut self) -> Result<u64> {
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        std::str::from_utf8(&self.src[start..self.pos])
            .ok()
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| Error::Syntax { pos: start, msg: "rate: expected a number".into() })
    }

    fn rate(&mut self) -> Result<Rate> {
        let start = self.pos;
        let name = self.ident().to_owned();
        match name.as_str() {
            "sq" => Ok(Rate::square()),
            "exp2" => Ok(Rate::Exp2),
            "lin" => {
                self.expect(b'(')?;
                let c = self.number()?;
                self.expect(b')')?;
                if c == 0 {
                    return Err(Error::Syntax { pos: start, msg: "rate: lin(0) is not inflationary".into() });
                }
                Ok(Rate::Linear(c))
            }
            "poly" => {
                self.expect(b'(')?;
                let mut cs = vec![self.number()?];
                while self.src.get(self.pos) == Some(&b',') {
                    self.pos += 1;
                    cs.push(self.number()?);
                }
                self.expect(b')')?;
                Ok(Rate::Poly(cs))
            }
            "max" | "comp" => {
                self.expect(b'(')?;
                let a = self.rate()?;
                self.expect(b',')?;
                let b = self.rate()?;
                self.expect(b')')?;
                Ok(if name == "max" {
                    Rate::Max(Box::new(a), Box::new(b))
                } else {
                    Rate::Compose(Box::new(a), Box::new(b))
                })
            }
            "shift" | "iter" => {
                self.expect(b'(')?;
                let k = self.number()?;
                self.expect(b',')?;
                let a = self.rate()?;
                self.expect(b')')?;
                Ok(if name == "shift" {
                    Rate::Shift(k, Box::new(a))
                } else {
                    let n = u32::try_from(k).map_err(|_| self.err("iteration count too large"))?;
                    Rate::Iterate(n, Box::new(a))
                })
            }
            "" => Err(self.err("expected a rate identifier")),
            other => Err(Error::Syntax { pos: start, msg: format!("rate: unknown identifier `{other}`") }),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn catalog_values() {
        let cap = u64::MAX;
        assert_eq!(Rate::linear(2).apply(3, cap).unwrap(), 8);
        assert_eq!(Rate::square().apply(5, cap).unwrap(), 25);
        assert_eq!(Rate::Poly(vec![1, 0, 1]).apply(4, cap).unwrap(), 17);
        assert_eq!(Rate::Exp2.apply(10, cap).unwrap(), 1024);
        let m = Rate::linear(2).max(Rate::Poly(vec![1, 0, 1]));
        assert_eq!(m.apply(1, cap).unwrap(), 4);
        assert_eq!(m.apply(5, cap).unwrap(), 26);
        let c: Rate = "comp(lin(2),sq)".parse().unwrap();
        assert_eq!(c.apply(3, cap).unwrap(), 20);
        let s: Rate = "shift(2,lin(1))".parse().unwrap();
        assert_eq!(s.apply(0, cap).unwrap(), 3);
        let it: Rate = "iter(3,lin(2))".parse().unwrap();
        assert_eq!(it.apply(0, cap).unwrap(), 2 * (2 * (2 + 1) + 1));
    }

    #[test]
    fn overflow_is_reported() {
        assert!(matches!(Rate::Exp2.apply(64, u64::MAX), Err(Error::Overflow { .. })));
        assert!(matches!(Rate::linear(2).apply(10, 15), Err(Error::Overflow { .. })));
        assert!(Rate::square().try_apply(1 << 33).is_none());
    }

    #[test]
    fn identifiers_round_trip() {
        for id in ["lin(1)", "sq", "poly(1,0,1)", "exp2", "max(lin(2),sq)", "comp(exp2,lin(3))", "shift(4,sq)", "iter(2,lin(2))"] {
            let r: Rate = id.parse().unwrap();
            assert_eq!(r.to_string(), id);
        }
        assert!("lin(0)".parse::<Rate>().is_err());
        assert!("cube".parse::<Rate>().is_err());
        assert!("lin(2".parse::<Rate>().is_err());
    }

    #[test]
    fn inflation_and_dominance() {
        assert!(Rate::linear(1).is_inflationary_on(0, 100));
        assert!(!Rate::square().is_inflationary_on(0, 10));
        assert!(Rate::square().is_inflationary_on(2, 100));
        assert!(Rate::linear(4).dominates_on(&Rate::linear(2), 0, 100));
        assert!(!Rate::Exp2.dominates_on(&Rate::linear(2), 0, 100));
    }
}
