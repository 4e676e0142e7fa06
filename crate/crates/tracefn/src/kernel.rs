//! A tiny spec language for composing kernels on the command line:
//!
//! ```text
//! spec := trivial | legendre | additive:<a> | mult:<order> | kloosterman:<m>
//!       | pullback(<spec>,<poly>/<poly>)
//!       | prod(<spec>,<spec>)
//! poly := [c0,c1,...]            coefficients in ascending degree
//! ```
//!
//! `pullback(legendre,[0,0,1]/[1])` is the Legendre symbol of x^2,
//! `prod(legendre,kloosterman:2)` the pointwise product.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::ff::PrimeField;
use crate::trace::{RationalMap, TraceFunction};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum KernelSpec {
    Trivial,
    Legendre,
    Additive(i64),
    Mult(u64),
    Kloosterman(u32),
    Pullback(Box<KernelSpec>, Vec<i64>, Vec<i64>),
    Prod(Box<KernelSpec>, Box<KernelSpec>),
}

impl KernelSpec {
    pub fn parse(input: &str) -> Result<Self> {
        let mut p = Parser {
            src: input.trim(),
            pos: 0,
        };
        let spec = p.spec()?;
        p.skip_ws();
        if p.pos != p.src.len() {
            return Err(Error::KernelSpec(format!(
                "trailing input at byte {}: '{}'",
                p.pos,
                &p.src[p.pos..]
            )));
        }
        Ok(spec)
    }

    /// Canonical string form (parses back to the same spec).
    pub fn label(&self) -> String {
        match self {
            KernelSpec::Trivial => "trivial".into(),
            KernelSpec::Legendre => "legendre".into(),
            KernelSpec::Additive(a) => format!("additive:{a}"),
            KernelSpec::Mult(n) => format!("mult:{n}"),
            KernelSpec::Kloosterman(m) => format!("kloosterman:{m}"),
            KernelSpec::Pullback(k, num, den) => format!(
                "pullback({},{}/{})",
                k.label(),
                poly_label(num),
                poly_label(den)
            ),
            KernelSpec::Prod(a, b) => format!("prod({},{})", a.label(), b.label()),
        }
    }

    /// Realize the spec as a value table over the given field.
    pub fn build(&self, field: Arc<PrimeField>) -> Result<TraceFunction> {
        match self {
            KernelSpec::Trivial => Ok(TraceFunction::trivial(field)),
            KernelSpec::Legendre => TraceFunction::legendre(field),
            KernelSpec::Additive(a) => {
                let a = field.element(*a);
                Ok(TraceFunction::additive(field, a))
            }
            KernelSpec::Mult(order) => TraceFunction::mult_char(field, *order),
            KernelSpec::Kloosterman(m) => TraceFunction::kloosterman(field, *m),
            KernelSpec::Pullback(inner, num, den) => {
                let k = inner.build(field.clone())?;
                let map = RationalMap::new(&field, num, den)?;
                k.pullback(&map)
            }
            KernelSpec::Prod(a, b) => {
                let ka = a.build(field.clone())?;
                let kb = b.build(field)?;
                ka.pointwise_product(&kb)
            }
        }
    }
}

fn poly_label(coeffs: &[i64]) -> String {
    let inner: Vec<String> = coeffs.iter().map(|c| c.to_string()).collect();
    format!("[{}]", inner.join(","))
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Parser<'a> {
    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src.as_bytes()[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn eat(&mut self, c: u8) -> Result<()> {
        self.skip_ws();
        if self.pos < self.src.len() && self.src.as_bytes()[self.pos] == c {
            self.pos += 1;
            Ok(())
        } else {
            Err(Error::KernelSpec(format!(
                "expected '{}' at byte {} of '{}'",
                c as char, self.pos, self.src
            )))
        }
    }

    fn ident(&mut self) -> String {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() {
            let b = self.src.as_bytes()[self.pos];
            if b.is_ascii_alphanumeric() || b == b'_' || b == b'-' {
                self.pos += 1;
            } else {
                break;
            }
        }
        self.src[start..self.pos].to_string()
    }

    fn int(&mut self) -> Result<i64> {
        self.skip_ws();
        let start = self.pos;
        if self.pos < self.src.len() && self.src.as_bytes()[self.pos] == b'-' {
            self.pos += 1;
        }
        while self.pos < self.src.len() && self.src.as_bytes()[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        self.src[start..self.pos]
            .parse()
            .map_err(|_| Error::KernelSpec(format!("expected integer at byte {start}")))
    }

    fn poly(&mut self) -> Result<Vec<i64>> {
        self.eat(b'[')?;
        let mut coeffs = vec![self.int()?];
        loop {
            self.skip_ws();
            if self.pos < self.src.len() && self.src.as_bytes()[self.pos] == b',' {
                self.pos += 1;
                coeffs.push(self.int()?);
            } else {
                break;
            }
        }
        self.eat(b']')?;
        Ok(coeffs)
    }

    fn spec(&mut self) -> Result<KernelSpec> {
        let name = self.ident();
        match name.as_str() {
            "trivial" => Ok(KernelSpec::Trivial),
            "legendre" => Ok(KernelSpec::Legendre),
            "additive" => {
                self.eat(b':')?;
                Ok(KernelSpec::Additive(self.int()?))
            }
            "mult" => {
                self.eat(b':')?;
                let n = self.int()?;
                if n < 1 {
                    return Err(Error::KernelSpec(format!("character order {n} < 1")));
                }
                Ok(KernelSpec::Mult(n as u64))
            }
            "kloosterman" => {
                self.eat(b':')?;
                let m = self.int()?;
                if m < 2 {
                    return Err(Error::KernelSpec(format!("kloosterman rank {m} < 2")));
                }
                Ok(KernelSpec::Kloosterman(m as u32))
            }
            "pullback" => {
                self.eat(b'(')?;
                let inner = self.spec()?;
                self.eat(b',')?;
                let num = self.poly()?;
                self.eat(b'/')?;
                let den = self.poly()?;
                self.eat(b')')?;
                Ok(KernelSpec::Pullback(Box::new(inner), num, den))
            }
            "prod" => {
                self.eat(b'(')?;
                let a = self.spec()?;
                self.eat(b',')?;
                let b = self.spec()?;
                self.eat(b')')?;
                Ok(KernelSpec::Prod(Box::new(a), Box::new(b)))
            }
            other => Err(Error::KernelSpec(format!("unknown kernel '{other}'"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn field(p: u64) -> Arc<PrimeField> {
        Arc::new(PrimeField::new(p).unwrap())
    }

    #[test]
    fn parse_round_trips() {
        for s in [
            "trivial",
            "legendre",
            "additive:3",
            "mult:4",
            "kloosterman:2",
            "pullback(kloosterman:2,[0,1]/[1])",
            "pullback(legendre,[0,0,1]/[1])",
            "prod(legendre,kloosterman:2)",
            "prod(pullback(legendre,[1]/[0,1]),mult:3)",
        ] {
            let spec = KernelSpec::parse(s).unwrap();
            assert_eq!(spec.label(), s);
            assert_eq!(KernelSpec::parse(&spec.label()).unwrap(), spec);
        }
    }

    #[test]
    fn parse_rejects_garbage() {
        for s in [
            "",
            "legendre!",
            "mult",
            "mult:",
            "kloosterman:1",
            "mult:0",
            "pullback(legendre)",
            "pullback(legendre,[1])",
            "prod(legendre)",
            "wat:3",
            "trivial extra",
        ] {
            assert!(KernelSpec::parse(s).is_err(), "'{s}' should fail");
        }
    }

    #[test]
    fn build_matches_direct_constructors() {
        let f = field(13);
        let spec = KernelSpec::parse("kloosterman:2").unwrap();
        let built = spec.build(f.clone()).unwrap();
        let direct = TraceFunction::kloosterman(f.clone(), 2).unwrap();
        for x in 0..13 {
            assert_eq!(built.value(x), direct.value(x));
        }

        // squared Legendre via pullback
        let spec = KernelSpec::parse("pullback(legendre,[0,0,1]/[1])").unwrap();
        let built = spec.build(f.clone()).unwrap();
        for x in 1..13 {
            assert!((built.value(x).re - 1.0).abs() < 1e-12);
        }

        // product eligibility: additive factor kills the flag
        let spec = KernelSpec::parse("prod(additive:1,legendre)").unwrap();
        assert!(!spec.build(f).unwrap().fourier_eligible());
    }

    #[test]
    fn negative_coefficients_reduce_mod_p() {
        let f = field(7);
        let spec = KernelSpec::parse("pullback(legendre,[-1,1]/[1])").unwrap();
        let built = spec.build(f.clone()).unwrap();
        let direct = TraceFunction::legendre(f.clone()).unwrap();
        for x in 0..7 {
            assert_eq!(built.value(x), direct.value(f.sub(x, 1)));
        }
    }
}
