//! Projective points, hypersurfaces, heights and Weil functions.
//!
//! For a hypersurface `D = {f = 0}` of degree `d` and a place `w`,
//!
//! ```text
//! λ_{D,w}(P) = log( ‖f‖_w · max_i ‖x_i‖_w^d / ‖f(P)‖_w )
//! ```
//!
//! where `‖f‖_w` is the largest coefficient norm. Heights are the absolute
//! logarithmic Weil height `h(P) = Σ_w log max_i ‖x_i‖_w`.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::arith;
use crate::error::ParseError;
use crate::error::{NumFieldError, ProjectiveError};
use crate::numfield::{
    self, log_norm_abs, places, places_above, Field, FieldElement, LocalLog, LogSum, Place, Rational,
    RationalPlace, SSet,
};
use crate::poly::{parse_polynomial, Polynomial};

#[derive(Clone, Debug, PartialEq)]
pub struct ProjPoint {
    field: Field,
    coords: Vec<FieldElement>,
}

impl ProjPoint {
    pub fn new(field: Field, coords: Vec<FieldElement>) -> Result<Self, ProjectiveError> {
        if coords.len() < 2 {
            return Err(ProjectiveError::InvalidPoint(
                "need at least two coordinates".into(),
            ));
        }
        if coords.iter().all(FieldElement::is_zero) {
            return Err(ProjectiveError::InvalidPoint("all coordinates are zero".into()));
        }
        let mut f = field;
        for c in &coords {
            if c.field() != Field::Rational && c.field() != field {
                return Err(ProjectiveError::InvalidPoint(format!(
                    "coordinate {c} is not in {field}"
                )));
            }
            f = f.join(c.field());
        }
        Ok(ProjPoint {
            field: f,
            coords: coords.into_iter().map(|c| c.in_field(f)).collect(),
        })
    }

    pub fn from_ints(coords: &[i64]) -> Result<Self, ProjectiveError> {
        ProjPoint::new(
            Field::Rational,
            coords.iter().map(|&c| FieldElement::from_int(c)).collect(),
        )
    }

    pub fn from_bigints(coords: Vec<BigInt>) -> Result<Self, ProjectiveError> {
        ProjPoint::new(
            Field::Rational,
            coords.into_iter().map(FieldElement::from_bigint).collect(),
        )
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn coords(&self) -> &[FieldElement] {
        &self.coords
    }

    /// `N` for a point of `P^N`.
    pub fn dim(&self) -> usize {
        self.coords.len() - 1
    }

    pub fn conj(&self) -> ProjPoint {
        ProjPoint {
            field: self.field,
            coords: self.coords.iter().map(FieldElement::conj).collect(),
        }
    }

    pub fn scaled(&self, c: &FieldElement) -> Result<ProjPoint, ProjectiveError> {
        if c.is_zero() {
            return Err(ProjectiveError::InvalidPoint("scaling by zero".into()));
        }
        ProjPoint::new(
            self.field.join(c.field()),
            self.coords.iter().map(|x| x * c).collect(),
        )
    }

    /// Projective equality: proportional coordinate vectors.
    pub fn proj_eq(&self, other: &ProjPoint) -> bool {
        if self.coords.len() != other.coords.len() {
            return false;
        }
        let n = self.coords.len();
        (0..n).all(|i| {
            (i + 1..n).all(|j| &self.coords[i] * &other.coords[j] == &self.coords[j] * &other.coords[i])
        })
    }

    /// Whether the point is defined over Q, i.e. `[k(P):Q] = 1`.
    pub fn is_rational(&self) -> bool {
        let j = self
            .coords
            .iter()
            .position(|c| !c.is_zero())
            .expect("valid point");
        let inv = self.coords[j].inverse().expect("nonzero");
        self.coords.iter().all(|c| (c * &inv).is_rational())
    }

    /// `[k(P) : Q]`.
    pub fn degree(&self) -> u32 {
        if self.is_rational() {
            1
        } else {
            self.field.degree()
        }
    }

    /// Same projective point with coordinates `A_i + B_i√d`, all `A_i, B_i`
    /// integers with no common factor.
    pub fn normalized(&self) -> ProjPoint {
        let den = self
            .coords
            .iter()
            .fold(BigInt::one(), |acc, c| acc.lcm(c.a().denom()).lcm(c.b().denom()));
        let scaled: Vec<(BigInt, BigInt)> = self
            .coords
            .iter()
            .map(|c| {
                (
                    (c.a() * BigRational::from_integer(den.clone())).to_integer(),
                    (c.b() * BigRational::from_integer(den.clone())).to_integer(),
                )
            })
            .collect();
        let mut g = scaled
            .iter()
            .fold(BigInt::zero(), |acc, (a, b)| acc.gcd(a).gcd(b));
        let lead = scaled
            .iter()
            .flat_map(|(a, b)| [a, b])
            .find(|x| !x.is_zero())
            .expect("valid point");
        if lead.is_negative() {
            g = -g;
        }
        let coords = scaled
            .into_iter()
            .map(|(a, b)| {
                FieldElement::new(
                    self.field,
                    BigRational::from_integer(a / &g),
                    BigRational::from_integer(b / &g),
                )
            })
            .collect();
        ProjPoint {
            field: self.field,
            coords,
        }
    }
}

impl fmt::Display for ProjPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.coords.iter().map(ToString::to_string).collect();
        write!(f, "[{}]", parts.join(":"))
    }
}

/// A hypersurface `{f = 0}` in `P^N` cut out by a nonzero homogeneous form.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Hypersurface {
    poly: Polynomial,
    degree: u32,
}

impl Hypersurface {
    pub fn new(poly: Polynomial) -> Result<Self, ProjectiveError> {
        if poly.is_zero() {
            return Err(ProjectiveError::InvalidHypersurface("zero form".into()));
        }
        let degree = poly
            .homogeneous_degree()
            .ok_or_else(|| ProjectiveError::InvalidHypersurface(format!("{poly} is not homogeneous")))?;
        if degree == 0 {
            return Err(ProjectiveError::InvalidHypersurface(
                "constant form has no zero locus".into(),
            ));
        }
        Ok(Hypersurface { poly, degree })
    }

    /// Parse a form in the variables `x0..xN`.
    pub fn parse(src: &str, field: Field, ambient_dim: usize) -> Result<Self, ParseOrInvalid> {
        let poly = parse_polynomial(src, field, ambient_dim + 1)?;
        if poly.nvars() > ambient_dim + 1 {
            return Err(ParseOrInvalid::Invalid(ProjectiveError::InvalidHypersurface(
                format!("{src:?} uses variables beyond x{ambient_dim}"),
            )));
        }
        Ok(Hypersurface::new(poly)?)
    }

    /// The hyperplane `Σ c_i x_i = 0`.
    pub fn hyperplane(coeffs: &[FieldElement]) -> Result<Self, ProjectiveError> {
        Hypersurface::new(Polynomial::linear(coeffs))
    }

    pub fn poly(&self) -> &Polynomial {
        &self.poly
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn ambient_dim(&self) -> usize {
        self.poly.nvars() - 1
    }

    pub fn is_hyperplane(&self) -> bool {
        self.degree == 1
    }

    /// Linear coefficients `(c_0, …, c_N)`; only meaningful for hyperplanes.
    pub fn linear_coeffs(&self) -> Vec<FieldElement> {
        (0..self.poly.nvars())
            .map(|i| self.poly.linear_coeff(i))
            .collect()
    }

    pub fn eval(&self, p: &ProjPoint) -> Result<FieldElement, ProjectiveError> {
        if p.coords.len() != self.poly.nvars() {
            return Err(ProjectiveError::InvalidPoint(format!(
                "point {p} does not live in P^{}",
                self.ambient_dim()
            )));
        }
        Ok(self.poly.eval(&p.coords))
    }

    pub fn product(&self, other: &Hypersurface) -> Hypersurface {
        Hypersurface::new(self.poly.mul(&other.poly)).expect("product of forms is a form")
    }

    pub fn scaled(&self, c: &FieldElement) -> Result<Hypersurface, ProjectiveError> {
        Hypersurface::new(self.poly.scale(c))
    }

    pub fn conj(&self) -> Hypersurface {
        Hypersurface {
            poly: self.poly.conj(),
            degree: self.degree,
        }
    }
}

impl fmt::Display for Hypersurface {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.poly)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ParseOrInvalid {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Invalid(#[from] ProjectiveError),
}

/// A divisor with its weight `c` and the positivity constant `ε` it is
/// scaled by in the main inequality (default `1/deg`).
#[derive(Clone, Debug, PartialEq)]
pub struct WeightedDivisor {
    pub hypersurface: Hypersurface,
    pub weight: Rational,
    pub seshadri: Rational,
}

impl WeightedDivisor {
    pub fn unit(hypersurface: Hypersurface) -> Self {
        let seshadri = numfield::rat(1, hypersurface.degree() as i64);
        WeightedDivisor {
            hypersurface,
            weight: Rational::one(),
            seshadri,
        }
    }

    pub fn new(
        hypersurface: Hypersurface,
        weight: Rational,
        seshadri: Option<Rational>,
    ) -> Result<Self, ProjectiveError> {
        if weight.is_negative() {
            return Err(ProjectiveError::InvalidHypersurface("negative weight".into()));
        }
        let seshadri = seshadri.unwrap_or_else(|| numfield::rat(1, hypersurface.degree() as i64));
        if !seshadri.is_positive() {
            return Err(ProjectiveError::InvalidHypersurface(
                "positivity constant must be > 0".into(),
            ));
        }
        Ok(WeightedDivisor {
            hypersurface,
            weight,
            seshadri,
        })
    }

    pub fn factor(&self) -> Rational {
        &self.weight * &self.seshadri
    }
}

/// Per rational place `v`, the weighted divisors `D_{1,v}, …, D_{q,v}` on `P^n`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct DivisorFamily {
    pub n: usize,
    pub per_place: BTreeMap<RationalPlace, Vec<WeightedDivisor>>,
}

impl DivisorFamily {
    pub fn new(n: usize) -> Self {
        DivisorFamily {
            n,
            per_place: BTreeMap::new(),
        }
    }

    /// The same divisors at every place of `s`.
    pub fn uniform(n: usize, s: &SSet, divisors: Vec<WeightedDivisor>) -> Self {
        let mut fam = DivisorFamily::new(n);
        for v in s.rational_places() {
            fam.per_place.insert(v, divisors.clone());
        }
        fam
    }

    pub fn at(&self, v: RationalPlace) -> &[WeightedDivisor] {
        self.per_place.get(&v).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn hypersurfaces_at(&self, v: RationalPlace) -> Vec<Hypersurface> {
        self.at(v).iter().map(|d| d.hypersurface.clone()).collect()
    }
}

fn max_log(logs: impl Iterator<Item = LocalLog>) -> LocalLog {
    logs.reduce(|a, b| match (&a, &b) {
        (LocalLog::Finite { coeff: x, .. }, LocalLog::Finite { coeff: y, .. }) => {
            if y > x {
                b
            } else {
                a
            }
        }
        (LocalLog::Arch(x), LocalLog::Arch(y)) => LocalLog::Arch(x.max(*y)),
        _ => panic!("mixed place kinds"),
    })
    .expect("nonempty")
}

fn min_log(logs: impl Iterator<Item = LocalLog>) -> LocalLog {
    logs.reduce(|a, b| match (&a, &b) {
        (LocalLog::Finite { coeff: x, .. }, LocalLog::Finite { coeff: y, .. }) => {
            if y < x {
                b
            } else {
                a
            }
        }
        (LocalLog::Arch(x), LocalLog::Arch(y)) => LocalLog::Arch(x.min(*y)),
        _ => panic!("mixed place kinds"),
    })
    .expect("nonempty")
}

/// `log max_i ‖x_i‖_w`.
pub fn log_max_coord(p: &ProjPoint, w: &Place) -> Result<LocalLog, NumFieldError> {
    let logs = p
        .coords
        .iter()
        .filter(|c| !c.is_zero())
        .map(|c| log_norm_abs(c, w))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(max_log(logs.into_iter()))
}

/// `log ‖f‖_w`, the largest coefficient norm.
pub fn log_form_norm(poly: &Polynomial, w: &Place) -> Result<LocalLog, NumFieldError> {
    let logs = poly
        .coefficients()
        .map(|c| log_norm_abs(c, w))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(max_log(logs.into_iter()))
}

fn check_field(p: &ProjPoint, w: &Place) -> Result<(), ProjectiveError> {
    if p.field.join(w.field) != w.field {
        return Err(ProjectiveError::InvalidPoint(format!(
            "point over {} evaluated at a place of {}",
            p.field, w.field
        )));
    }
    Ok(())
}

/// All places of `p.field()` that can contribute to `h(P)`.
pub fn height_places(p: &ProjPoint) -> Result<Vec<Place>, NumFieldError> {
    let q = p.normalized();
    let primes = match q.field {
        Field::Rational => Vec::new(),
        Field::Quadratic { .. } => {
            // Coordinates are integral; a prime contributes only if it
            // divides every nonzero coordinate, hence every norm.
            let g = q
                .coords
                .iter()
                .filter(|c| !c.is_zero())
                .fold(BigInt::zero(), |acc, c| acc.gcd(&c.norm().to_integer()));
            if g.is_one() {
                Vec::new()
            } else {
                arith::factorize(g.magnitude())?
                    .into_iter()
                    .map(|(p, _)| p)
                    .collect()
            }
        }
    };
    places(q.field, &SSet::new(true, primes))
}

/// Absolute logarithmic height, with the finite part kept exact.
pub fn height_log(p: &ProjPoint) -> Result<LogSum, NumFieldError> {
    let q = p.normalized();
    let mut sum = LogSum::default();
    for w in height_places(&q)? {
        sum.add(&log_max_coord(&q, &w)?);
    }
    Ok(sum)
}

pub fn height(p: &ProjPoint) -> Result<f64, NumFieldError> {
    Ok(height_log(p)?.value())
}

/// `λ_{D,w}(P)`; errors with `SupportHit` when `f(P) = 0`.
pub fn weil(d: &Hypersurface, w: &Place, p: &ProjPoint) -> Result<LocalLog, ProjectiveError> {
    check_field(p, w)?;
    let fp = d.eval(p)?;
    if fp.is_zero() {
        return Err(ProjectiveError::SupportHit {
            divisor: 0,
            place: w.to_string(),
        });
    }
    let f_norm = log_form_norm(d.poly(), w)?;
    let x_max = log_max_coord(p, w)?;
    let at_p = log_norm_abs(&fp, w)?;
    Ok(f_norm
        .plus(&x_max.scaled(&numfield::int(d.degree() as i64)))
        .minus(&at_p))
}

/// `λ_{D_1 ∩ … ∩ D_r, w}(P) = min_i λ_{D_i,w}(P)`.
pub fn weil_min(ds: &[Hypersurface], w: &Place, p: &ProjPoint) -> Result<LocalLog, ProjectiveError> {
    if ds.is_empty() {
        return Err(ProjectiveError::InvalidHypersurface(
            "empty intersection list".into(),
        ));
    }
    let vals = ds
        .iter()
        .enumerate()
        .map(|(i, d)| {
            weil(d, w, p).map_err(|e| match e {
                ProjectiveError::SupportHit { place, .. } => {
                    ProjectiveError::SupportHit { divisor: i, place }
                }
                e => e,
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(min_log(vals.into_iter()))
}

/// One summand `factor_i · λ_{D_{i,v},w}(P)` of the main inequality.
#[derive(Clone, Debug)]
pub struct WeilTerm {
    pub v: RationalPlace,
    pub w: Place,
    pub index: usize,
    pub factor: Rational,
    pub lambda: LocalLog,
}

impl WeilTerm {
    pub fn weighted(&self) -> LocalLog {
        self.lambda.scaled(&self.factor)
    }
}

/// Every summand of `Σ_{v∈S} Σ_{w|v} Σ_i c_{i,v} ε_{i,v} λ_{D_{i,v},w}(P)`,
/// with places `w` taken in `field` (which must contain the point).
pub fn weil_terms(
    family: &DivisorFamily,
    s: &SSet,
    p: &ProjPoint,
    field: Field,
) -> Result<Vec<WeilTerm>, ProjectiveError> {
    if p.dim() != family.n {
        return Err(ProjectiveError::InvalidPoint(format!(
            "point {p} is not in P^{}",
            family.n
        )));
    }
    let field = field.join(p.field);
    let mut out = Vec::new();
    for v in s.rational_places() {
        let divisors = family.at(v);
        if divisors.is_empty() {
            continue;
        }
        for w in places_above(field, v)? {
            for (i, wd) in divisors.iter().enumerate() {
                let lambda = weil(&wd.hypersurface, &w, p).map_err(|e| match e {
                    ProjectiveError::SupportHit { .. } => ProjectiveError::SupportHit {
                        divisor: i,
                        place: v.to_string(),
                    },
                    e => e,
                })?;
                out.push(WeilTerm {
                    v,
                    w,
                    index: i,
                    factor: wd.factor(),
                    lambda,
                });
            }
        }
    }
    Ok(out)
}

/// The left-hand side of the main inequality.
pub fn weil_sum(family: &DivisorFamily, s: &SSet, p: &ProjPoint) -> Result<LogSum, ProjectiveError> {
    let mut sum = LogSum::default();
    for t in weil_terms(family, s, p, p.field)? {
        sum.add(&t.weighted());
    }
    Ok(sum)
}
