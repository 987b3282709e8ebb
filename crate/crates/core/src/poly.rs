//! Multivariate polynomials over Q or Q(√d) and their text grammar.
//!
//! ```text
//! expr   := ['+'|'-'] term (('+'|'-') term)*
//! term   := factor ('*' factor)*
//! factor := int ['/' int] | 'sqrt(' ['-'] int ')' | 'x' int ['^' int] | '(' expr ')' ['^' int]
//! ```
//!
//! Whitespace is ignored everywhere. `sqrt(d)` must name the working field's
//! `d`. Examples: `x0 - x2`, `3/2*x0^2*x1 + (1 + 2*sqrt(5))*x1^3`.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::ParseError;
use crate::numfield::{Field, FieldElement, Rational};

/// Exponent vector, one entry per variable.
pub type Monomial = Vec<u32>;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Polynomial {
    nvars: usize,
    terms: BTreeMap<Monomial, FieldElement>,
}

impl Polynomial {
    pub fn zero(nvars: usize) -> Self {
        Polynomial {
            nvars,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(nvars: usize, c: FieldElement) -> Self {
        let mut p = Polynomial::zero(nvars);
        p.add_term(vec![0; nvars], c);
        p
    }

    pub fn var(nvars: usize, i: usize) -> Self {
        let mut m = vec![0; nvars];
        m[i] = 1;
        let mut p = Polynomial::zero(nvars);
        p.add_term(m, FieldElement::one());
        p
    }

    /// A linear form `Σ c_i x_i`.
    pub fn linear(coeffs: &[FieldElement]) -> Self {
        let n = coeffs.len();
        let mut p = Polynomial::zero(n);
        for (i, c) in coeffs.iter().enumerate() {
            let mut m = vec![0; n];
            m[i] = 1;
            p.add_term(m, c.clone());
        }
        p
    }

    pub fn add_term(&mut self, mono: Monomial, c: FieldElement) {
        assert_eq!(mono.len(), self.nvars);
        if c.is_zero() {
            return;
        }
        let slot = self.terms.entry(mono.clone()).or_insert_with(FieldElement::zero);
        *slot = &*slot + &c;
        if slot.is_zero() {
            self.terms.remove(&mono);
        }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &FieldElement)> {
        self.terms.iter()
    }

    pub fn coefficients(&self) -> impl Iterator<Item = &FieldElement> {
        self.terms.values()
    }

    pub fn num_monomials(&self) -> usize {
        self.terms.len()
    }

    /// The field generated by the coefficients.
    pub fn field(&self) -> Field {
        self.terms
            .values()
            .fold(Field::Rational, |f, c| f.join(c.field()))
    }

    pub fn is_rational(&self) -> bool {
        self.terms.values().all(FieldElement::is_rational)
    }

    /// The common total degree, or `None` when the form is zero or not
    /// homogeneous.
    pub fn homogeneous_degree(&self) -> Option<u32> {
        let mut degs = self.terms.keys().map(|m| m.iter().sum::<u32>());
        let d = degs.next()?;
        degs.all(|e| e == d).then_some(d)
    }

    /// Pad with unused variables up to `nvars`.
    pub fn with_nvars(&self, nvars: usize) -> Self {
        assert!(nvars >= self.nvars);
        Polynomial {
            nvars,
            terms: self
                .terms
                .iter()
                .map(|(m, c)| {
                    let mut m = m.clone();
                    m.resize(nvars, 0);
                    (m, c.clone())
                })
                .collect(),
        }
    }

    pub fn add(&self, other: &Polynomial) -> Polynomial {
        let n = self.nvars.max(other.nvars);
        let mut out = self.with_nvars(n);
        for (m, c) in other.with_nvars(n).terms {
            out.add_term(m, c);
        }
        out
    }

    pub fn mul(&self, other: &Polynomial) -> Polynomial {
        let n = self.nvars.max(other.nvars);
        let (a, b) = (self.with_nvars(n), other.with_nvars(n));
        let mut out = Polynomial::zero(n);
        for (ma, ca) in &a.terms {
            for (mb, cb) in &b.terms {
                let m = ma.iter().zip(mb).map(|(x, y)| x + y).collect();
                out.add_term(m, ca * cb);
            }
        }
        out
    }

    pub fn pow(&self, e: u32) -> Polynomial {
        let mut acc = Polynomial::constant(self.nvars, FieldElement::one());
        for _ in 0..e {
            acc = acc.mul(self);
        }
        acc
    }

    pub fn scale(&self, c: &FieldElement) -> Polynomial {
        let mut out = Polynomial::zero(self.nvars);
        for (m, x) in &self.terms {
            out.add_term(m.clone(), x * c);
        }
        out
    }

    /// Coefficientwise conjugation.
    pub fn conj(&self) -> Polynomial {
        Polynomial {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(m, c)| (m.clone(), c.conj())).collect(),
        }
    }

    /// Evaluate at a coordinate vector of length `nvars`.
    pub fn eval(&self, x: &[FieldElement]) -> FieldElement {
        assert_eq!(x.len(), self.nvars, "coordinate count mismatch");
        let mut acc = FieldElement::zero();
        for (m, c) in &self.terms {
            let mut t = c.clone();
            for (xi, &e) in x.iter().zip(m) {
                if e > 0 {
                    t = &t * &xi.pow(e);
                }
            }
            acc = &acc + &t;
        }
        acc
    }

    /// Coefficient of `x_i` in a linear form.
    pub fn linear_coeff(&self, i: usize) -> FieldElement {
        let mut m = vec![0; self.nvars];
        m[i] = 1;
        self.terms.get(&m).cloned().unwrap_or_else(FieldElement::zero)
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        // Highest monomials first reads more naturally.
        for (k, (m, c)) in self.terms.iter().rev().enumerate() {
            let mut vars: Vec<String> = Vec::new();
            for (i, &e) in m.iter().enumerate() {
                match e {
                    0 => {}
                    1 => vars.push(format!("x{i}")),
                    _ => vars.push(format!("x{i}^{e}")),
                }
            }
            let cs = c.to_string();
            let (neg, body) = if c.is_rational() && cs.starts_with('-') {
                (true, cs[1..].to_string())
            } else if c.is_rational() {
                (false, cs)
            } else {
                (false, format!("({cs})"))
            };
            let sep = match (k, neg) {
                (0, true) => "-",
                (0, false) => "",
                (_, true) => " - ",
                (_, false) => " + ",
            };
            let text = if vars.is_empty() {
                body
            } else if body == "1" {
                vars.join("*")
            } else {
                format!("{body}*{}", vars.join("*"))
            };
            write!(f, "{sep}{text}")?;
        }
        Ok(())
    }
}

/// Parse a polynomial over `field` in at least `min_vars` variables.
pub fn parse_polynomial(src: &str, field: Field, min_vars: usize) -> Result<Polynomial, ParseError> {
    let mut p = Parser::new(src, field);
    let poly = p.expr()?;
    p.skip_ws();
    if p.pos < p.src.len() {
        return Err(p.err("unexpected trailing input"));
    }
    let n = poly.nvars.max(min_vars);
    Ok(poly.with_nvars(n))
}

/// Parse a constant such as `3/4`, `-2 + sqrt(5)` or `(1 - sqrt(-1))/1`.
pub fn parse_element(src: &str, field: Field) -> Result<FieldElement, ParseError> {
    let poly = parse_polynomial(src, field, 0)?;
    let mut value = FieldElement::zero().in_field(field);
    for (m, c) in poly.terms() {
        if m.iter().any(|&e| e > 0) {
            return Err(ParseError {
                offset: 0,
                message: format!("expected a constant, found variables in {src:?}"),
            });
        }
        value = &value + c;
    }
    Ok(value.in_field(field))
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    field: Field,
}

impl<'a> Parser<'a> {
    fn new(src: &'a str, field: Field) -> Self {
        Parser {
            src: src.as_bytes(),
            pos: 0,
            field,
        }
    }

    fn err(&self, message: impl Into<String>) -> ParseError {
        ParseError {
            offset: self.pos,
            message: message.into(),
        }
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

    fn expect(&mut self, c: u8) -> Result<(), ParseError> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(self.err(format!("expected '{}'", c as char)))
        }
    }

    fn integer(&mut self) -> Result<BigInt, ParseError> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.err("expected an integer"));
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii digits");
        Ok(text.parse().expect("digits parse"))
    }

    fn small(&mut self) -> Result<u32, ParseError> {
        let at = self.pos;
        let n = self.integer()?;
        u32::try_from(n).map_err(|_| ParseError {
            offset: at,
            message: "integer too large".into(),
        })
    }

    fn expr(&mut self) -> Result<Polynomial, ParseError> {
        let mut acc = Polynomial::zero(0);
        let mut first = true;
        loop {
            let sign = if self.eat(b'-') {
                -1
            } else if self.eat(b'+') || first {
                1
            } else {
                break;
            };
            first = false;
            let t = self.term()?;
            acc = if sign < 0 {
                acc.add(&t.scale(&FieldElement::from_int(-1)))
            } else {
                acc.add(&t)
            };
            match self.peek() {
                Some(b'+') | Some(b'-') => continue,
                _ => break,
            }
        }
        Ok(acc)
    }

    fn term(&mut self) -> Result<Polynomial, ParseError> {
        let mut acc = self.factor()?;
        while self.eat(b'*') {
            acc = acc.mul(&self.factor()?);
        }
        Ok(acc)
    }

    fn factor(&mut self) -> Result<Polynomial, ParseError> {
        match self.peek() {
            Some(c) if c.is_ascii_digit() => {
                let num = self.integer()?;
                let den = if self.eat(b'/') {
                    let at = self.pos;
                    let den = self.integer()?;
                    if den.is_zero() {
                        return Err(ParseError {
                            offset: at,
                            message: "zero denominator".into(),
                        });
                    }
                    den
                } else {
                    BigInt::one()
                };
                let r: Rational = BigRational::new(num, den);
                Ok(Polynomial::constant(0, FieldElement::rational(r)))
            }
            Some(b'x') => {
                self.pos += 1;
                let i = self.small()? as usize;
                if i > 64 {
                    return Err(self.err("variable index too large"));
                }
                let v = Polynomial::var(i + 1, i);
                self.power(v)
            }
            Some(b's') => {
                let at = self.pos;
                if !self.src[self.pos..].starts_with(b"sqrt") {
                    return Err(self.err("unknown identifier"));
                }
                self.pos += 4;
                self.expect(b'(')?;
                let neg = self.eat(b'-');
                let mag = self.integer()?;
                self.expect(b')')?;
                let d = if neg { -mag } else { mag };
                match self.field {
                    Field::Quadratic { d: fd } if BigInt::from(fd) == d => {
                        Ok(Polynomial::constant(0, FieldElement::sqrt_d(self.field)))
                    }
                    _ => Err(ParseError {
                        offset: at,
                        message: format!("sqrt({d}) is not the generator of {}", self.field),
                    }),
                }
            }
            Some(b'(') => {
                self.pos += 1;
                let inner = self.expr()?;
                self.expect(b')')?;
                self.power(inner)
            }
            Some(_) => Err(self.err("unexpected character")),
            None => Err(self.err("unexpected end of input")),
        }
    }

    fn power(&mut self, base: Polynomial) -> Result<Polynomial, ParseError> {
        if self.eat(b'^') {
            let e = self.small()?;
            Ok(base.pow(e))
        } else {
            Ok(base)
        }
    }
}
