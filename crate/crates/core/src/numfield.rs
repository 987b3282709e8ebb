//! Exact arithmetic in Q and Q(√d), places, normalized absolute values and
//! the product formula.
//!
//! Absolute values are normalized so that `|p|_v = 1/p` at a place above `p`
//! and `‖x‖_v = |x|_v^([k_v:Q_v]/[k:Q])`. With this normalization every
//! quantity built from `‖·‖_v` (heights, Weil functions) is independent of
//! the field a point is written over.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::arith::{self, ln_add_exp, ln_rat, padic_sqrt, vp_int, vp_rat};
use crate::error::NumFieldError;

pub type Rational = BigRational;

pub fn rat(n: i64, d: i64) -> Rational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

pub fn int(n: i64) -> Rational {
    BigRational::from_integer(BigInt::from(n))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Field {
    Rational,
    /// `Q(√d)` with `d` squarefree and `d ∉ {0, 1}`.
    Quadratic {
        d: i64,
    },
}

impl Field {
    pub fn quadratic(d: i64) -> Result<Self, NumFieldError> {
        if d == 1 || !arith::is_squarefree(d) {
            return Err(NumFieldError::Input(format!(
                "d = {d} must be squarefree and different from 0 and 1"
            )));
        }
        Ok(Field::Quadratic { d })
    }

    pub fn degree(self) -> u32 {
        match self {
            Field::Rational => 1,
            Field::Quadratic { .. } => 2,
        }
    }

    pub fn d(self) -> Option<i64> {
        match self {
            Field::Rational => None,
            Field::Quadratic { d } => Some(d),
        }
    }

    pub fn discriminant(self) -> i64 {
        match self {
            Field::Rational => 1,
            Field::Quadratic { d } if d.rem_euclid(4) == 1 => d,
            Field::Quadratic { d } => 4 * d,
        }
    }

    /// The smallest field containing both; panics on two distinct quadratic
    /// fields, which no operation in this crate can produce.
    pub fn join(self, other: Field) -> Field {
        match (self, other) {
            (Field::Rational, f) | (f, Field::Rational) => f,
            (a, b) if a == b => a,
            (a, b) => panic!("cannot combine elements of {a} and {b}"),
        }
    }
}

impl fmt::Display for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Field::Rational => write!(f, "Q"),
            Field::Quadratic { d } => write!(f, "Q(sqrt({d}))"),
        }
    }
}

/// `a + b√d`, with `b = 0` over Q.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FieldElement {
    field: Field,
    a: Rational,
    b: Rational,
}

impl FieldElement {
    pub fn new(field: Field, a: Rational, b: Rational) -> Self {
        assert!(
            field != Field::Rational || b.is_zero(),
            "rational element with a √d coordinate"
        );
        FieldElement { field, a, b }
    }

    pub fn rational(a: Rational) -> Self {
        FieldElement::new(Field::Rational, a, Rational::zero())
    }

    pub fn from_int(n: i64) -> Self {
        FieldElement::rational(int(n))
    }

    pub fn from_bigint(n: BigInt) -> Self {
        FieldElement::rational(BigRational::from_integer(n))
    }

    pub fn zero() -> Self {
        FieldElement::from_int(0)
    }

    pub fn one() -> Self {
        FieldElement::from_int(1)
    }

    /// `√d` in `field`; panics over Q.
    pub fn sqrt_d(field: Field) -> Self {
        assert!(field != Field::Rational);
        FieldElement::new(field, Rational::zero(), Rational::one())
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn a(&self) -> &Rational {
        &self.a
    }

    pub fn b(&self) -> &Rational {
        &self.b
    }

    pub fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }

    pub fn is_rational(&self) -> bool {
        self.b.is_zero()
    }

    /// Re-home into a field containing this element's field.
    pub fn in_field(&self, field: Field) -> Self {
        FieldElement {
            field: self.field.join(field),
            a: self.a.clone(),
            b: self.b.clone(),
        }
    }

    /// The nontrivial automorphism `a + b√d ↦ a − b√d` (identity over Q).
    pub fn conj(&self) -> Self {
        FieldElement {
            field: self.field,
            a: self.a.clone(),
            b: -&self.b,
        }
    }

    /// Field norm down to Q.
    pub fn norm(&self) -> Rational {
        match self.field {
            Field::Rational => self.a.clone(),
            Field::Quadratic { d } => &self.a * &self.a - &self.b * &self.b * int(d),
        }
    }

    pub fn inverse(&self) -> Option<Self> {
        if self.is_zero() {
            return None;
        }
        // x · conj(x) = a² − d b², also over Q where d = 0
        let d = int(self.field.d().unwrap_or(0));
        let n = &self.a * &self.a - &self.b * &self.b * d;
        Some(FieldElement {
            field: self.field,
            a: &self.a / &n,
            b: -&self.b / &n,
        })
    }

    pub fn scale(&self, r: &Rational) -> Self {
        FieldElement {
            field: self.field,
            a: &self.a * r,
            b: &self.b * r,
        }
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut acc = FieldElement::one().in_field(self.field);
        for _ in 0..e {
            acc = &acc * self;
        }
        acc
    }

    /// `ln |σ(x)|` for the real embedding with `√d ↦ sign·√d`, computed without
    /// cancellation: when the two terms have opposite signs the value is
    /// recovered from the exact norm.
    fn ln_abs_real(&self, d: i64, sign: i8) -> f64 {
        let b = if sign > 0 { self.b.clone() } else { -&self.b };
        if b.is_zero() {
            return ln_rat(&self.a);
        }
        let ln_b_sqrt_d = ln_rat(&b) + 0.5 * (d as f64).ln();
        if self.a.is_zero() {
            return ln_b_sqrt_d;
        }
        let same_sign = self.a.is_positive() == b.is_positive();
        let ln_sum = ln_add_exp(ln_rat(&self.a), ln_b_sqrt_d);
        if same_sign {
            ln_sum
        } else {
            ln_rat(&self.norm()) - ln_sum
        }
    }
}

impl fmt::Display for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let d = match self.field {
            Field::Quadratic { d } if !self.b.is_zero() => d,
            _ => return write!(f, "{}", arith::fmt_rational(&self.a)),
        };
        let b = if self.b.is_one() {
            String::new()
        } else if (-&self.b).is_one() {
            "-".to_string()
        } else {
            format!("{}*", arith::fmt_rational(&self.b))
        };
        if self.a.is_zero() {
            write!(f, "{b}sqrt({d})")
        } else if self.b.is_negative() {
            let b = b.trim_start_matches('-');
            write!(f, "{}-{b}sqrt({d})", arith::fmt_rational(&self.a))
        } else {
            write!(f, "{}+{b}sqrt({d})", arith::fmt_rational(&self.a))
        }
    }
}

macro_rules! forward_binop {
    ($tr:ident, $method:ident) => {
        impl $tr<FieldElement> for FieldElement {
            type Output = FieldElement;
            fn $method(self, rhs: FieldElement) -> FieldElement {
                (&self).$method(&rhs)
            }
        }
        impl $tr<&FieldElement> for FieldElement {
            type Output = FieldElement;
            fn $method(self, rhs: &FieldElement) -> FieldElement {
                (&self).$method(rhs)
            }
        }
    };
}

impl Add<&FieldElement> for &FieldElement {
    type Output = FieldElement;
    fn add(self, rhs: &FieldElement) -> FieldElement {
        FieldElement {
            field: self.field.join(rhs.field),
            a: &self.a + &rhs.a,
            b: &self.b + &rhs.b,
        }
    }
}

impl Sub<&FieldElement> for &FieldElement {
    type Output = FieldElement;
    fn sub(self, rhs: &FieldElement) -> FieldElement {
        FieldElement {
            field: self.field.join(rhs.field),
            a: &self.a - &rhs.a,
            b: &self.b - &rhs.b,
        }
    }
}

impl Mul<&FieldElement> for &FieldElement {
    type Output = FieldElement;
    fn mul(self, rhs: &FieldElement) -> FieldElement {
        let field = self.field.join(rhs.field);
        let d = int(field.d().unwrap_or(0));
        FieldElement {
            field,
            a: &self.a * &rhs.a + &self.b * &rhs.b * d,
            b: &self.a * &rhs.b + &self.b * &rhs.a,
        }
    }
}

impl Neg for &FieldElement {
    type Output = FieldElement;
    fn neg(self) -> FieldElement {
        FieldElement {
            field: self.field,
            a: -&self.a,
            b: -&self.b,
        }
    }
}

impl Neg for FieldElement {
    type Output = FieldElement;
    fn neg(self) -> FieldElement {
        -&self
    }
}

forward_binop!(Add, add);
forward_binop!(Sub, sub);
forward_binop!(Mul, mul);

/// A place of Q: `∞` or a prime.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RationalPlace {
    Infinity,
    Prime(u64),
}

impl RationalPlace {
    pub fn parse(s: &str) -> Result<Self, NumFieldError> {
        let t = s.trim();
        if matches!(t, "inf" | "infinity" | "∞") {
            return Ok(RationalPlace::Infinity);
        }
        let p: u64 = t
            .parse()
            .map_err(|_| NumFieldError::Input(format!("bad place label {s:?}")))?;
        if !arith::is_prime(p) {
            return Err(NumFieldError::Input(format!("{p} is not prime")));
        }
        Ok(RationalPlace::Prime(p))
    }
}

impl fmt::Display for RationalPlace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RationalPlace::Infinity => write!(f, "inf"),
            RationalPlace::Prime(p) => write!(f, "{p}"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Splitting {
    /// The unique place of Q above `p`.
    Trivial,
    /// One of the two primes above a split `p`: `√d ↦ r` (first) or
    /// `√d ↦ −r` (second), with `r` the canonical p-adic root of `d`.
    SplitFirst,
    SplitSecond,
    Inert,
    Ramified,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PlaceKind {
    /// Real embedding; index 0 sends `√d ↦ +√d`, index 1 sends `√d ↦ −√d`.
    ArchReal {
        embedding: u8,
    },
    ArchComplex,
    Finite {
        p: u64,
        splitting: Splitting,
        e: u32,
        f: u32,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Place {
    pub field: Field,
    pub kind: PlaceKind,
    /// `[k_v : Q_v]`
    pub local_degree: u32,
}

impl Place {
    pub fn norm_exponent(&self) -> Rational {
        rat(self.local_degree as i64, self.field.degree() as i64)
    }

    pub fn is_archimedean(&self) -> bool {
        !matches!(self.kind, PlaceKind::Finite { .. })
    }

    pub fn above(&self) -> RationalPlace {
        match self.kind {
            PlaceKind::Finite { p, .. } => RationalPlace::Prime(p),
            _ => RationalPlace::Infinity,
        }
    }

    /// The place `σ(w)` under conjugation of the field.
    pub fn conjugate(&self) -> Place {
        let kind = match self.kind {
            PlaceKind::ArchReal { embedding } => PlaceKind::ArchReal {
                embedding: 1 - embedding,
            },
            PlaceKind::Finite {
                p,
                splitting: Splitting::SplitFirst,
                e,
                f,
            } => PlaceKind::Finite {
                p,
                splitting: Splitting::SplitSecond,
                e,
                f,
            },
            PlaceKind::Finite {
                p,
                splitting: Splitting::SplitSecond,
                e,
                f,
            } => PlaceKind::Finite {
                p,
                splitting: Splitting::SplitFirst,
                e,
                f,
            },
            k => k,
        };
        Place { kind, ..*self }
    }
}

impl fmt::Display for Place {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            PlaceKind::ArchReal { embedding } if self.field != Field::Rational => {
                write!(f, "inf#{}", embedding + 1)
            }
            PlaceKind::ArchReal { .. } | PlaceKind::ArchComplex => write!(f, "inf"),
            PlaceKind::Finite { p, splitting, .. } => match splitting {
                Splitting::SplitFirst => write!(f, "{p}#1"),
                Splitting::SplitSecond => write!(f, "{p}#2"),
                _ => write!(f, "{p}"),
            },
        }
    }
}

/// A finite set of rational places; the places of a field `F` in `S` are
/// all places of `F` above them.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct SSet {
    pub include_archimedean: bool,
    pub finite_primes: Vec<u64>,
}

impl SSet {
    pub fn new(include_archimedean: bool, finite_primes: Vec<u64>) -> Self {
        SSet {
            include_archimedean,
            finite_primes,
        }
    }

    pub fn rational_places(&self) -> Vec<RationalPlace> {
        let mut out = Vec::new();
        if self.include_archimedean {
            out.push(RationalPlace::Infinity);
        }
        let mut ps = self.finite_primes.clone();
        ps.sort_unstable();
        ps.dedup();
        out.extend(ps.into_iter().map(RationalPlace::Prime));
        out
    }
}

/// Every place of `field` above the rational place `v`.
pub fn places_above(field: Field, v: RationalPlace) -> Result<Vec<Place>, NumFieldError> {
    let place = |kind, local_degree| Place {
        field,
        kind,
        local_degree,
    };
    let d = match field {
        Field::Rational => {
            let kind = match v {
                RationalPlace::Infinity => PlaceKind::ArchReal { embedding: 0 },
                RationalPlace::Prime(p) => {
                    check_prime(p)?;
                    PlaceKind::Finite {
                        p,
                        splitting: Splitting::Trivial,
                        e: 1,
                        f: 1,
                    }
                }
            };
            return Ok(vec![place(kind, 1)]);
        }
        Field::Quadratic { d } => d,
    };
    Ok(match v {
        RationalPlace::Infinity if d > 0 => vec![
            place(PlaceKind::ArchReal { embedding: 0 }, 1),
            place(PlaceKind::ArchReal { embedding: 1 }, 1),
        ],
        RationalPlace::Infinity => vec![place(PlaceKind::ArchComplex, 2)],
        RationalPlace::Prime(p) => {
            check_prime(p)?;
            let fin = |splitting, e, f| PlaceKind::Finite { p, splitting, e, f };
            match arith::kronecker_prime(field.discriminant(), p) {
                1 => vec![
                    place(fin(Splitting::SplitFirst, 1, 1), 1),
                    place(fin(Splitting::SplitSecond, 1, 1), 1),
                ],
                -1 => vec![place(fin(Splitting::Inert, 1, 2), 2)],
                _ => vec![place(fin(Splitting::Ramified, 2, 1), 2)],
            }
        }
    })
}

fn check_prime(p: u64) -> Result<(), NumFieldError> {
    if arith::is_prime(p) {
        Ok(())
    } else {
        Err(NumFieldError::Input(format!("{p} is not prime")))
    }
}

/// Every place of `field` above the rational places of `s`.
pub fn places(field: Field, s: &SSet) -> Result<Vec<Place>, NumFieldError> {
    let mut out = Vec::new();
    for v in s.rational_places() {
        out.extend(places_above(field, v)?);
    }
    Ok(out)
}

/// The places where `x` has nonzero valuation, plus all archimedean places.
pub fn places_for(x: &FieldElement) -> Result<Vec<Place>, NumFieldError> {
    if x.is_zero() {
        return Err(NumFieldError::Domain("zero has no finite support".into()));
    }
    let primes = arith::support_primes(&x.norm())?;
    places(x.field(), &SSet::new(true, primes))
}

/// `v_P(x)` at a finite place, normalized so a uniformizer has valuation 1.
pub fn valuation(x: &FieldElement, v: &Place) -> Result<i64, NumFieldError> {
    if x.is_zero() {
        return Err(NumFieldError::Domain("valuation of zero".into()));
    }
    let (p, splitting) = match v.kind {
        PlaceKind::Finite { p, splitting, .. } => (p, splitting),
        _ => {
            return Err(NumFieldError::Domain(
                "valuation requested at an archimedean place".into(),
            ))
        }
    };
    let x = x.in_field(v.field);
    match splitting {
        Splitting::Trivial => Ok(vp_rat(x.a(), p)),
        Splitting::Ramified => Ok(vp_rat(&x.norm(), p)),
        Splitting::Inert => {
            let n = vp_rat(&x.norm(), p);
            debug_assert!(n % 2 == 0);
            Ok(n / 2)
        }
        Splitting::SplitFirst | Splitting::SplitSecond => {
            let d = v.field.d().expect("split place of a quadratic field");
            // x = (A + B√d)/C; in Q_p, √d ↦ ±r.
            let c = x.a().denom().lcm(x.b().denom());
            let big_a = x.a().numer() * (&c / x.a().denom());
            let mut big_b = x.b().numer() * (&c / x.b().denom());
            if splitting == Splitting::SplitSecond {
                big_b = -big_b;
            }
            let vc = vp_int(&c, p);
            if big_b.is_zero() {
                return Ok(vp_int(&big_a, p) - vc);
            }
            // Both v_p(A ± B r) lie in [0, v_p(A^2 - d B^2)].
            let n = vp_int(&(&big_a * &big_a - &big_b * &big_b * BigInt::from(d)), p);
            let k = u32::try_from(n + 1).expect("valuation fits in u32");
            let r = padic_sqrt(d, p, k);
            let modulus = BigInt::from(p).pow(k);
            let t = (&big_a + &big_b * r).mod_floor(&modulus);
            debug_assert!(!t.is_zero());
            Ok(vp_int(&t, p) - vc)
        }
    }
}

/// `log ‖x‖_v`, carried exactly at finite places.
#[derive(Clone, Debug, PartialEq)]
pub enum LocalLog {
    /// `coeff · log p`
    Finite {
        p: u64,
        coeff: Rational,
    },
    Arch(f64),
}

impl LocalLog {
    pub fn value(&self) -> f64 {
        match self {
            LocalLog::Finite { p, coeff } => rat_to_f64(coeff) * (*p as f64).ln(),
            LocalLog::Arch(x) => *x,
        }
    }

    pub fn zero_at(v: &Place) -> LocalLog {
        match v.kind {
            PlaceKind::Finite { p, .. } => LocalLog::Finite {
                p,
                coeff: Rational::zero(),
            },
            _ => LocalLog::Arch(0.0),
        }
    }

    pub fn scaled(&self, r: &Rational) -> LocalLog {
        match self {
            LocalLog::Finite { p, coeff } => LocalLog::Finite {
                p: *p,
                coeff: coeff * r,
            },
            LocalLog::Arch(x) => LocalLog::Arch(x * rat_to_f64(r)),
        }
    }

    /// Sum of two logs at the same place.
    pub fn plus(&self, other: &LocalLog) -> LocalLog {
        match (self, other) {
            (LocalLog::Finite { p, coeff }, LocalLog::Finite { p: q, coeff: c }) => {
                assert_eq!(p, q, "adding logs at different primes");
                LocalLog::Finite {
                    p: *p,
                    coeff: coeff + c,
                }
            }
            (LocalLog::Arch(x), LocalLog::Arch(y)) => LocalLog::Arch(x + y),
            _ => panic!("adding archimedean and finite logs"),
        }
    }

    pub fn minus(&self, other: &LocalLog) -> LocalLog {
        self.plus(&other.scaled(&int(-1)))
    }

    pub fn exact_coeff(&self) -> Option<&Rational> {
        match self {
            LocalLog::Finite { coeff, .. } => Some(coeff),
            LocalLog::Arch(_) => None,
        }
    }
}

pub fn rat_to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or_else(|| {
        let sign = if r.is_negative() { -1.0 } else { 1.0 };
        sign * ln_rat(r).exp()
    })
}

/// A sum of local logs: an exact rational coefficient per prime plus an
/// archimedean float.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct LogSum {
    pub finite: BTreeMap<u64, Rational>,
    pub arch: f64,
}

impl LogSum {
    pub fn add(&mut self, l: &LocalLog) {
        match l {
            LocalLog::Finite { p, coeff } => {
                *self.finite.entry(*p).or_insert_with(Rational::zero) += coeff;
            }
            LocalLog::Arch(x) => self.arch += x,
        }
    }

    pub fn finite_value(&self) -> f64 {
        self.finite
            .iter()
            .map(|(p, c)| rat_to_f64(c) * (*p as f64).ln())
            .sum()
    }

    pub fn value(&self) -> f64 {
        self.arch + self.finite_value()
    }
}

/// `log ‖x‖_v` for `x ≠ 0`.
pub fn log_norm_abs(x: &FieldElement, v: &Place) -> Result<LocalLog, NumFieldError> {
    if x.is_zero() {
        return Err(NumFieldError::Domain("absolute value of zero".into()));
    }
    let x = x.in_field(v.field);
    match v.kind {
        PlaceKind::Finite { p, f, .. } => {
            let val = valuation(&x, v)?;
            Ok(LocalLog::Finite {
                p,
                coeff: rat(-val * f as i64, v.field.degree() as i64),
            })
        }
        PlaceKind::ArchReal { embedding } => {
            let ln_abs = match v.field {
                Field::Rational => ln_rat(x.a()),
                Field::Quadratic { d } => x.ln_abs_real(d, if embedding == 0 { 1 } else { -1 }),
            };
            Ok(LocalLog::Arch(ln_abs * rat_to_f64(&v.norm_exponent())))
        }
        PlaceKind::ArchComplex => {
            // |σ(x)|^2 = N(x), exponent 2/2.
            Ok(LocalLog::Arch(0.5 * ln_rat(&x.norm())))
        }
    }
}

/// `‖x‖_v` for `x ≠ 0`.
pub fn norm_abs(x: &FieldElement, v: &Place) -> Result<f64, NumFieldError> {
    Ok(log_norm_abs(x, v)?.value().exp())
}

/// `Σ_v log ‖x‖_v` over every place where `x` is not a unit, plus the
/// archimedean places. The finite part is cancelled exactly: its value is
/// taken as one logarithm of an exact rational.
pub fn product_formula_defect(x: &FieldElement) -> Result<f64, NumFieldError> {
    let mut sum = LogSum::default();
    for v in places_for(x)? {
        sum.add(&log_norm_abs(x, &v)?);
    }
    let den = sum
        .finite
        .values()
        .fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
    let mut prod = Rational::one();
    for (p, c) in &sum.finite {
        let e = (c * BigRational::from_integer(den.clone())).to_integer();
        let e = i32::try_from(e).map_err(|_| NumFieldError::Unsupported("exponent overflow".into()))?;
        let pp = BigRational::from_integer(BigInt::from(*p));
        prod *= num_traits::pow::Pow::pow(&pp, e);
    }
    let den_f = den.to_f64().unwrap_or(1.0);
    Ok(sum.arch + ln_rat(&prod) / den_f)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn qi() -> Field {
        Field::quadratic(-1).unwrap()
    }

    fn el(field: Field, a: i64, b: i64) -> FieldElement {
        FieldElement::new(field, int(a), int(b))
    }

    #[test]
    fn field_validation() {
        assert!(Field::quadratic(4).is_err());
        assert!(Field::quadratic(1).is_err());
        assert!(Field::quadratic(0).is_err());
        assert_eq!(Field::quadratic(-1).unwrap().discriminant(), -4);
        assert_eq!(Field::quadratic(5).unwrap().discriminant(), 5);
    }

    #[test]
    fn arithmetic_and_conjugation() {
        let f = Field::quadratic(2).unwrap();
        let x = el(f, 1, 1);
        let y = el(f, 3, -2);
        assert_eq!(&x * &y, el(f, 3 - 4, -2 + 3));
        assert_eq!((&x * &x.inverse().unwrap()), FieldElement::one().in_field(f));
        assert_eq!(x.conj().conj(), x);
        assert_eq!(x.norm(), int(-1));
        assert!(FieldElement::zero().in_field(f).inverse().is_none());
        let r = FieldElement::rational(rat(-3, 7));
        assert_eq!(r.inverse().unwrap(), FieldElement::rational(rat(-7, 3)));
    }

    #[test]
    fn places_of_q() {
        let ps = places(Field::Rational, &SSet::new(true, vec![2, 3])).unwrap();
        assert_eq!(ps.len(), 3);
        assert!(ps.iter().all(|p| p.norm_exponent() == int(1)));
        assert!(places(Field::Rational, &SSet::new(false, vec![4])).is_err());
    }

    #[test]
    fn places_of_gaussian_field() {
        let five = places(qi(), &SSet::new(false, vec![5])).unwrap();
        assert_eq!(five.len(), 2);
        assert!(five.iter().all(|p| p.local_degree == 1));
        let three = places(qi(), &SSet::new(false, vec![3])).unwrap();
        assert_eq!(three.len(), 1);
        assert_eq!(three[0].local_degree, 2);
        assert!(matches!(
            three[0].kind,
            PlaceKind::Finite {
                splitting: Splitting::Inert,
                ..
            }
        ));
        let two = places(qi(), &SSet::new(false, vec![2])).unwrap();
        assert!(matches!(
            two[0].kind,
            PlaceKind::Finite {
                splitting: Splitting::Ramified,
                e: 2,
                ..
            }
        ));
    }

    #[test]
    fn local_degrees_sum_to_one() {
        for d in [-1i64, 2, 5, -3, 3, 17, -7] {
            let f = Field::quadratic(d).unwrap();
            for v in [
                RationalPlace::Infinity,
                RationalPlace::Prime(2),
                RationalPlace::Prime(3),
                RationalPlace::Prime(5),
                RationalPlace::Prime(7),
                RationalPlace::Prime(13),
            ] {
                let total: Rational = places_above(f, v)
                    .unwrap()
                    .iter()
                    .map(|w| w.norm_exponent())
                    .sum();
                assert_eq!(total, int(1), "d={d} v={v}");
            }
        }
    }

    #[test]
    fn splitting_matches_root_count() {
        for d in [-1i64, 2, 5, -3, 3, 17, -7, 13] {
            let f = Field::quadratic(d).unwrap();
            for p in [3u64, 5, 7, 11, 13, 17, 19] {
                let ps = places_above(f, RationalPlace::Prime(p)).unwrap();
                let r = d.rem_euclid(p as i64) as u64;
                let roots = (0..p).filter(|x| x * x % p == r).count();
                let expect = match (r, roots) {
                    (0, _) => Splitting::Ramified,
                    (_, 2) => Splitting::SplitFirst,
                    _ => Splitting::Inert,
                };
                match ps[0].kind {
                    PlaceKind::Finite { splitting, .. } => assert_eq!(splitting, expect, "d={d} p={p}"),
                    _ => unreachable!(),
                }
            }
        }
    }

    #[test]
    fn valuation_examples() {
        let two = &places(Field::Rational, &SSet::new(false, vec![2])).unwrap()[0];
        assert_eq!(valuation(&FieldElement::from_int(8), two).unwrap(), 3);
        let ram = &places(qi(), &SSet::new(false, vec![2])).unwrap()[0];
        assert_eq!(valuation(&el(qi(), 1, 1), ram).unwrap(), 1);
        let inert = &places(qi(), &SSet::new(false, vec![3])).unwrap()[0];
        assert_eq!(valuation(&el(qi(), 3, 0), inert).unwrap(), 1);
        let arch = &places(qi(), &SSet::new(true, vec![])).unwrap()[0];
        assert!(valuation(&el(qi(), 3, 0), arch).is_err());
        assert!(valuation(&FieldElement::zero(), two).is_err());
    }

    #[test]
    fn split_valuations_separate_conjugates() {
        // 2 + i has norm 5; it lies in exactly one prime above 5.
        let five = places(qi(), &SSet::new(false, vec![5])).unwrap();
        let x = el(qi(), 2, 1);
        let vs: Vec<i64> = five.iter().map(|w| valuation(&x, w).unwrap()).collect();
        assert_eq!(vs.iter().sum::<i64>(), 1);
        let vc: Vec<i64> = five.iter().map(|w| valuation(&x.conj(), w).unwrap()).collect();
        assert_eq!(vc, vec![vs[1], vs[0]]);
        // (2 + i)^3 * 5 / (2 - i)
        let y = &(&x.pow(3) * &FieldElement::from_int(5)) * &x.conj().inverse().unwrap();
        let vy: Vec<i64> = five.iter().map(|w| valuation(&y, w).unwrap()).collect();
        let expect: Vec<i64> = vs.iter().map(|v| 3 * v + 1 - (1 - v)).collect();
        assert_eq!(vy, expect);
    }

    #[test]
    fn split_valuations_at_two() {
        // d = 17 ≡ 1 mod 8: 2 splits; (1 + √17)/2 has norm -4.
        let f = Field::quadratic(17).unwrap();
        let x = FieldElement::new(f, rat(1, 2), rat(1, 2));
        let two = places(f, &SSet::new(false, vec![2])).unwrap();
        let vs: Vec<i64> = two.iter().map(|w| valuation(&x, w).unwrap()).collect();
        assert_eq!(vs.iter().sum::<i64>(), 2);
        assert!(vs.contains(&0));
    }

    #[test]
    fn norm_abs_examples() {
        let two = &places(Field::Rational, &SSet::new(false, vec![2])).unwrap()[0];
        assert_eq!(
            log_norm_abs(&FieldElement::from_int(6), two)
                .unwrap()
                .exact_coeff(),
            Some(&int(-1))
        );
        assert!((norm_abs(&FieldElement::from_int(6), two).unwrap() - 0.5).abs() < 1e-15);
        assert_eq!(norm_abs(&FieldElement::one(), two).unwrap(), 1.0);
        let inf = &places(qi(), &SSet::new(true, vec![])).unwrap()[0];
        assert!((norm_abs(&el(qi(), 1, 1), inf).unwrap() - 2f64.sqrt()).abs() < 1e-15);
        assert!(norm_abs(&FieldElement::zero(), two).is_err());
    }

    #[test]
    fn real_embeddings_avoid_cancellation() {
        // (1 + √2)^40 · (1 − √2)^40 = 1; the second factor is tiny.
        let f = Field::quadratic(2).unwrap();
        let u = el(f, 1, -1).pow(40);
        let inf = places(f, &SSet::new(true, vec![])).unwrap();
        let l0 = log_norm_abs(&u, &inf[0]).unwrap().value();
        let want = 0.5 * 40.0 * (2f64.sqrt() - 1.0).ln();
        assert!((l0 - want).abs() < 1e-12, "{l0} vs {want}");
    }

    #[test]
    fn product_formula_examples() {
        assert!(product_formula_defect(&FieldElement::from_int(6)).unwrap().abs() < 1e-12);
        assert_eq!(product_formula_defect(&FieldElement::one()).unwrap(), 0.0);
        assert!(product_formula_defect(&el(qi(), 3, 4)).unwrap().abs() < 1e-12);
        assert!(product_formula_defect(&FieldElement::zero()).is_err());
    }

    #[test]
    fn display() {
        let f = Field::quadratic(-1).unwrap();
        assert_eq!(el(f, 1, 1).to_string(), "1+sqrt(-1)");
        assert_eq!(el(f, 1, -2).to_string(), "1-2*sqrt(-1)");
        assert_eq!(el(f, 0, -1).to_string(), "-sqrt(-1)");
        assert_eq!(FieldElement::rational(rat(-3, 4)).to_string(), "-3/4");
    }
}
