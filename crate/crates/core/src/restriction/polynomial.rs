//! Exact polynomials in `x, y, z` with rational coefficients.

use std::collections::BTreeMap;
use std::fmt;

use num_rational::Rational64;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Exponents of `x, y, z`.
type Monomial = [u32; 3];

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Polynomial {
    terms: BTreeMap<Monomial, Rational64>,
}

impl Polynomial {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: Rational64) -> Self {
        Self::monomial(c, [0, 0, 0])
    }

    pub fn monomial(c: Rational64, exps: Monomial) -> Self {
        let mut p = Self::zero();
        p.add_term(exps, c);
        p
    }

    /// The coordinate `x` (`axis = 0`), `y` or `z`.
    pub fn var(axis: usize) -> Self {
        let mut e = [0; 3];
        e[axis] = 1;
        Self::monomial(Rational64::one(), e)
    }

    /// Parses sums of products of rationals, `x`, `y`, `z`, parentheses and
    /// non-negative integer powers, e.g. `-y*z + 3/2*x^2`.
    pub fn parse(src: &str) -> Result<Self> {
        let mut p = Parser { s: src.as_bytes(), pos: 0, src };
        let poly = p.expr()?;
        p.skip_ws();
        if p.pos != p.s.len() {
            return Err(p.unsupported());
        }
        Ok(poly)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn degree(&self) -> u32 {
        self.terms.keys().map(|e| e.iter().sum()).max().unwrap_or(0)
    }

    fn add_term(&mut self, exps: Monomial, c: Rational64) {
        if c.is_zero() {
            return;
        }
        let entry = self.terms.entry(exps).or_insert_with(Rational64::zero);
        *entry += c;
        if entry.is_zero() {
            self.terms.remove(&exps);
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (&e, &c) in &other.terms {
            out.add_term(e, c);
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(-Rational64::one()))
    }

    pub fn scale(&self, s: Rational64) -> Self {
        let mut out = Self::zero();
        for (&e, &c) in &self.terms {
            out.add_term(e, c * s);
        }
        out
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = Self::zero();
        for (ea, &ca) in &self.terms {
            for (eb, &cb) in &other.terms {
                out.add_term([ea[0] + eb[0], ea[1] + eb[1], ea[2] + eb[2]], ca * cb);
            }
        }
        out
    }

    pub fn pow(&self, k: u32) -> Self {
        (0..k).fold(Self::constant(Rational64::one()), |acc, _| acc.mul(self))
    }

    pub fn derivative(&self, axis: usize) -> Self {
        let mut out = Self::zero();
        for (&e, &c) in &self.terms {
            if e[axis] > 0 {
                let mut d = e;
                d[axis] -= 1;
                out.add_term(d, c * Rational64::from_integer(e[axis] as i64));
            }
        }
        out
    }

    pub fn laplacian(&self) -> Self {
        (0..3).fold(Self::zero(), |acc, k| acc.add(&self.derivative(k).derivative(k)))
    }

    pub fn eval<T: Scalar>(&self, p: [T; 3]) -> T {
        self.terms.iter().fold(T::zero(), |acc, (e, c)| {
            let coef = T::lit(c.numer().to_f64().unwrap_or(f64::NAN) / c.denom().to_f64().unwrap_or(f64::NAN));
            acc + coef * p[0].powi(e[0] as i32) * p[1].powi(e[1] as i32) * p[2].powi(e[2] as i32)
        })
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        for (k, (e, c)) in self.terms.iter().rev().enumerate() {
            let sign = if c.is_negative() { "-" } else if k > 0 { "+" } else { "" };
            if k > 0 {
                write!(f, " {sign} ")?;
            } else {
                write!(f, "{sign}")?;
            }
            let mag = c.abs();
            let mut factors: Vec<String> = Vec::new();
            if !mag.is_one() || e.iter().all(|&p| p == 0) {
                factors.push(mag.to_string());
            }
            for (name, &p) in ["x", "y", "z"].iter().zip(e) {
                match p {
                    0 => {}
                    1 => factors.push(name.to_string()),
                    _ => factors.push(format!("{name}^{p}")),
                }
            }
            write!(f, "{}", factors.join("*"))?;
        }
        Ok(())
    }
}

struct Parser<'a> {
    s: &'a [u8],
    pos: usize,
    src: &'a str,
}

impl Parser<'_> {
    fn unsupported(&self) -> Error {
        Error::UnsupportedInput(format!("not a polynomial in x, y, z: {:?} (at byte {})", self.src, self.pos))
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

    fn expr(&mut self) -> Result<Polynomial> {
        let mut acc = match self.peek() {
            Some(b'-') => {
                self.pos += 1;
                self.term()?.scale(-Rational64::one())
            }
            Some(b'+') => {
                self.pos += 1;
                self.term()?
            }
            _ => self.term()?,
        };
        loop {
            match self.peek() {
                Some(b'+') => {
                    self.pos += 1;
                    acc = acc.add(&self.term()?);
                }
                Some(b'-') => {
                    self.pos += 1;
                    acc = acc.sub(&self.term()?);
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<Polynomial> {
        let mut acc = self.power()?;
        loop {
            match self.peek() {
                Some(b'*') => {
                    self.pos += 1;
                    acc = acc.mul(&self.power()?);
                }
                Some(b'/') => {
                    self.pos += 1;
                    let d = self.integer()?;
                    if d == 0 {
                        return Err(self.unsupported());
                    }
                    acc = acc.scale(Rational64::new(1, d));
                }
                _ => return Ok(acc),
            }
        }
    }

    fn power(&mut self) -> Result<Polynomial> {
        let base = self.atom()?;
        if self.peek() == Some(b'^') {
            self.pos += 1;
            let k = self.integer()?;
            let k = u32::try_from(k).map_err(|_| self.unsupported())?;
            return Ok(base.pow(k));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Polynomial> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let inner = self.expr()?;
                if self.peek() != Some(b')') {
                    return Err(self.unsupported());
                }
                self.pos += 1;
                Ok(inner)
            }
            Some(c) if c.is_ascii_digit() => Ok(Polynomial::constant(Rational64::from_integer(self.integer()?))),
            Some(c) if c.is_ascii_alphabetic() => {
                let start = self.pos;
                while self.pos < self.s.len() && self.s[self.pos].is_ascii_alphanumeric() {
                    self.pos += 1;
                }
                match &self.s[start..self.pos] {
                    b"x" => Ok(Polynomial::var(0)),
                    b"y" => Ok(Polynomial::var(1)),
                    b"z" => Ok(Polynomial::var(2)),
                    _ => {
                        self.pos = start;
                        Err(self.unsupported())
                    }
                }
            }
            _ => Err(self.unsupported()),
        }
    }

    fn integer(&mut self) -> Result<i64> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        std::str::from_utf8(&self.s[start..self.pos])
            .ok()
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| self.unsupported())
    }
}

/// Cartesian vector field `(v_x, v_y, v_z)` with polynomial components.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CartesianField {
    pub components: [Polynomial; 3],
}

impl CartesianField {
    pub fn new(components: [Polynomial; 3]) -> Self {
        Self { components }
    }

    pub fn parse(src: [&str; 3]) -> Result<Self> {
        Ok(Self::new([Polynomial::parse(src[0])?, Polynomial::parse(src[1])?, Polynomial::parse(src[2])?]))
    }

    pub fn zero() -> Self {
        Self::new([Polynomial::zero(), Polynomial::zero(), Polynomial::zero()])
    }

    pub fn divergence(&self) -> Polynomial {
        (0..3).fold(Polynomial::zero(), |acc, k| acc.add(&self.components[k].derivative(k)))
    }

    pub fn is_divergence_free(&self) -> bool {
        self.divergence().is_zero()
    }

    pub fn laplacian(&self) -> Self {
        Self::new(self.components.clone().map(|c| c.laplacian()))
    }

    pub fn eval<T: Scalar>(&self, p: [T; 3]) -> [T; 3] {
        [self.components[0].eval(p), self.components[1].eval(p), self.components[2].eval(p)]
    }
}

impl fmt::Display for CartesianField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.components[0], self.components[1], self.components[2])
    }
}
