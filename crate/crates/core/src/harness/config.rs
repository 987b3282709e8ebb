//! TOML experiment configurations.
//!
//! ```toml
//! n = 2                      # optional, inferred from the divisors
//!
//! [field]
//! kind = "rational"          # or "quadratic", with d = <squarefree int>
//!
//! [places]
//! archimedean = true
//! primes = [2]
//!
//! [[divisors]]
//! poly = "x0 - x2"
//! degree = 1                 # optional, checked against poly
//! weight = "1"               # optional exact rational
//! seshadri = "1"             # optional, default 1/degree
//! places = ["inf", "2"]      # optional, default every place of S
//!
//! [points]
//! mode = "geometric"         # explicit | geometric | random | quadratic
//! params = { base = [0, 0, 1], direction = [1, 1, 1], p = 2, s_min = 1, s_max = 30 }
//!
//! [run]
//! epsilon = "1/2"
//! factor = "subgeneral"      # index | general_position | levin | schlickewei | <rational>
//! height_floor = 20.0
//! seed = 42
//! subsets = "all"            # or "max": max over admissible subsets per place
//! ```
//!
//! Point params by mode:
//! `explicit`: `list = ["[1:2:3]", "[1+sqrt(2):1]"]`;
//! `geometric`: base + p^s · direction for s in `s_min..=s_max`;
//! `random` and `quadratic`: `count`, `bound` (integer or decimal string),
//! optional `seed`.

use std::ops::Range;
use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use serde::Deserialize;

use super::{ExperimentConfig, FactorChoice, PointSpec, RunSettings, SubsetMode};
use crate::arith::is_prime;
use crate::error::HarnessError;
use crate::numfield::{Field, Rational, RationalPlace, SSet};
use crate::poly::parse_element;
use crate::projective::{DivisorFamily, Hypersurface, ParseOrInvalid, ProjPoint, WeightedDivisor};

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    n: Option<usize>,
    field: RawField,
    #[serde(default)]
    places: RawPlaces,
    divisors: Vec<toml::Spanned<RawDivisor>>,
    points: Option<RawPoints>,
    #[serde(default)]
    run: RawRun,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawField {
    kind: toml::Spanned<String>,
    d: Option<i64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPlaces {
    #[serde(default = "yes")]
    archimedean: bool,
    #[serde(default)]
    primes: Vec<u64>,
}

impl Default for RawPlaces {
    fn default() -> Self {
        RawPlaces {
            archimedean: true,
            primes: Vec::new(),
        }
    }
}

fn yes() -> bool {
    true
}

/// A number written as a TOML integer, float or string.
#[derive(Deserialize, Clone, Debug)]
#[serde(untagged)]
enum RawNumber {
    Int(i64),
    Float(f64),
    Str(String),
}

impl RawNumber {
    fn text(&self) -> String {
        match self {
            RawNumber::Int(i) => i.to_string(),
            RawNumber::Float(f) => f.to_string(),
            RawNumber::Str(s) => s.clone(),
        }
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDivisor {
    poly: String,
    degree: Option<u32>,
    weight: Option<RawNumber>,
    seshadri: Option<RawNumber>,
    places: Option<Vec<String>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPoints {
    mode: toml::Spanned<String>,
    params: Option<toml::Spanned<toml::Value>>,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawRun {
    epsilon: Option<toml::Spanned<RawNumber>>,
    factor: Option<toml::Spanned<RawNumber>>,
    height_floor: Option<f64>,
    seed: Option<u64>,
    m: Option<u64>,
    kappa: Option<u64>,
    delta: Option<u64>,
    subsets: Option<toml::Spanned<String>>,
    subgeneral_m: Option<usize>,
    max_subsets: Option<usize>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ExplicitParams {
    list: Vec<String>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct GeometricParams {
    base: Vec<i64>,
    direction: Vec<i64>,
    p: u64,
    s_min: u32,
    s_max: u32,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RandomParams {
    count: usize,
    bound: RawNumber,
    seed: Option<u64>,
}

/// 1-based line and column of a byte offset.
pub fn line_col(src: &str, offset: usize) -> (usize, usize) {
    let before = &src[..offset.min(src.len())];
    let line = before.matches('\n').count() + 1;
    let col = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
    (line, col)
}

struct Ctx<'a> {
    src: &'a str,
}

impl Ctx<'_> {
    fn at(&self, span: Range<usize>, message: impl Into<String>) -> HarnessError {
        let (line, column) = line_col(self.src, span.start);
        HarnessError::ConfigSyntax {
            line,
            column,
            message: message.into(),
        }
    }
}

/// Exact rational from `p/q`, an integer, or a decimal such as `0.5` or `1e-3`.
pub fn parse_rational(s: &str) -> Result<Rational, String> {
    let s = s.trim();
    let bad = || format!("`{s}` is not a rational number");
    if let Some((p, q)) = s.split_once('/') {
        let p = BigInt::from_str(p.trim()).map_err(|_| bad())?;
        let q = BigInt::from_str(q.trim()).map_err(|_| bad())?;
        if q.is_zero() {
            return Err(format!("`{s}` has zero denominator"));
        }
        return Ok(Rational::new(p, q));
    }
    let (mantissa, exp) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], s[i + 1..].parse::<i32>().map_err(|_| bad())?),
        None => (s, 0),
    };
    let (neg, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac) = digits.split_once('.').unwrap_or((digits, ""));
    if int_part.is_empty() && frac.is_empty()
        || !int_part.chars().chain(frac.chars()).all(|c| c.is_ascii_digit())
    {
        return Err(bad());
    }
    let all: BigInt = format!("0{int_part}{frac}").parse().map_err(|_| bad())?;
    let scale = exp - frac.len() as i32;
    let ten = BigInt::from(10);
    let mut r = Rational::from_integer(all);
    if scale >= 0 {
        r *= Rational::from_integer(num_traits::pow(ten, scale as usize));
    } else {
        r /= Rational::from_integer(num_traits::pow(ten, (-scale) as usize));
    }
    Ok(if neg { -r } else { r })
}

fn parse_factor(s: &str) -> Result<FactorChoice, String> {
    Ok(match s.trim() {
        "subgeneral" => FactorChoice::Subgeneral,
        "index" => FactorChoice::Index,
        "general_position" => FactorChoice::GeneralPosition,
        "levin" => FactorChoice::Levin,
        "schlickewei" => FactorChoice::Schlickewei,
        other => FactorChoice::Explicit(parse_rational(other).map_err(|_| {
            format!(
                "unknown factor `{other}`; expected subgeneral, index, general_position, \
                 levin, schlickewei or a rational"
            )
        })?),
    })
}

impl FromStr for FactorChoice {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        parse_factor(s)
    }
}

fn parse_bound(b: &RawNumber) -> Result<BigInt, String> {
    let r = parse_rational(&b.text())?;
    if !r.is_integer() || !r.is_positive() {
        return Err(format!("bound must be a positive integer, got {}", b.text()));
    }
    Ok(r.to_integer())
}

/// Parses a point such as `[1:2:3]` or `[1+sqrt(2):1]` over `field`.
pub fn parse_point(src: &str, field: Field) -> Result<ProjPoint, HarnessError> {
    let inner = src
        .trim()
        .strip_prefix('[')
        .and_then(|s| s.strip_suffix(']'))
        .ok_or_else(|| HarnessError::Config(format!("point `{src}` must look like [a:b:...]")))?;
    let coords = inner
        .split(':')
        .map(|c| parse_element(c, field))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(ProjPoint::new(field, coords)?)
}

pub(super) fn parse_config(src: &str) -> Result<ExperimentConfig, HarnessError> {
    let ctx = Ctx { src };
    let raw: RawConfig = toml::from_str(src).map_err(|e| {
        let span = e.span().unwrap_or(0..0);
        ctx.at(span, e.message().trim().to_string())
    })?;

    let field = match raw.field.kind.get_ref().as_str() {
        "rational" => {
            if raw.field.d.is_some() {
                return Err(ctx.at(raw.field.kind.span(), "`d` is only valid for quadratic fields"));
            }
            Field::Rational
        }
        "quadratic" => {
            let d = raw
                .field
                .d
                .ok_or_else(|| ctx.at(raw.field.kind.span(), "quadratic field needs `d`"))?;
            Field::quadratic(d).map_err(|e| ctx.at(raw.field.kind.span(), e.to_string()))?
        }
        other => {
            return Err(ctx.at(
                raw.field.kind.span(),
                format!("unknown field kind `{other}`; expected rational or quadratic"),
            ))
        }
    };

    if !raw.places.archimedean {
        return Err(HarnessError::Config(
            "S must contain the archimedean place".into(),
        ));
    }
    if let Some(p) = raw.places.primes.iter().find(|&&p| !is_prime(p)) {
        return Err(HarnessError::Config(format!("{p} is not prime")));
    }
    let s = SSet::new(true, raw.places.primes.clone());
    let s_places = s.rational_places();

    if raw.divisors.is_empty() {
        return Err(HarnessError::Config("at least one divisor is required".into()));
    }
    let n = match raw.n {
        Some(n) if n >= 1 => n,
        Some(_) => return Err(HarnessError::Config("n must be at least 1".into())),
        None => {
            let mut n = 1;
            for d in &raw.divisors {
                let p = crate::poly::parse_polynomial(&d.get_ref().poly, field, 0)
                    .map_err(|e| ctx.at(d.span(), e.to_string()))?;
                n = n.max(p.nvars().saturating_sub(1));
            }
            n
        }
    };

    let mut family = DivisorFamily::new(n);
    for v in &s_places {
        family.per_place.insert(*v, Vec::new());
    }
    for d in &raw.divisors {
        let span = d.span();
        let d = d.get_ref();
        let h = Hypersurface::parse(&d.poly, field, n).map_err(|e| match e {
            ParseOrInvalid::Parse(e) => ctx.at(span.clone(), format!("divisor `{}`: {e}", d.poly)),
            ParseOrInvalid::Invalid(e) => ctx.at(span.clone(), e.to_string()),
        })?;
        if let Some(deg) = d.degree {
            if deg != h.degree() {
                return Err(ctx.at(
                    span,
                    format!("divisor `{}` has degree {}, not {deg}", d.poly, h.degree()),
                ));
            }
        }
        let num = |x: &Option<RawNumber>| -> Result<Option<Rational>, HarnessError> {
            x.as_ref()
                .map(|x| parse_rational(&x.text()))
                .transpose()
                .map_err(|e| ctx.at(span.clone(), e))
        };
        let weight = num(&d.weight)?.unwrap_or_else(|| Rational::from_integer(1.into()));
        let wd = WeightedDivisor::new(h, weight, num(&d.seshadri)?)
            .map_err(|e| ctx.at(span.clone(), e.to_string()))?;
        let at: Vec<RationalPlace> = match &d.places {
            None => s_places.clone(),
            Some(list) => list
                .iter()
                .map(|p| {
                    let v = RationalPlace::parse(p).map_err(|e| ctx.at(span.clone(), e.to_string()))?;
                    if !s_places.contains(&v) {
                        return Err(ctx.at(span.clone(), format!("place {v} is not in S")));
                    }
                    Ok(v)
                })
                .collect::<Result<_, _>>()?,
        };
        for v in at {
            family.per_place.entry(v).or_default().push(wd.clone());
        }
    }

    let points = match &raw.points {
        None => PointSpec::Explicit(Vec::new()),
        Some(rp) => parse_points(&ctx, rp, field, n)?,
    };

    let run = &raw.run;
    let mut settings = RunSettings::default();
    if let Some(e) = &run.epsilon {
        let r = parse_rational(&e.get_ref().text()).map_err(|m| ctx.at(e.span(), m))?;
        if !r.is_positive() {
            return Err(ctx.at(e.span(), "epsilon must be positive"));
        }
        settings.epsilon = r;
    }
    if let Some(f) = &run.factor {
        settings.factor = parse_factor(&f.get_ref().text()).map_err(|m| ctx.at(f.span(), m))?;
    }
    if let Some(h) = run.height_floor {
        settings.height_floor = h;
    }
    if let Some(seed) = run.seed {
        settings.seed = seed;
    }
    settings.m = run.m;
    settings.kappa = run.kappa;
    settings.delta = run.delta;
    if let Some(mode) = &run.subsets {
        settings.subsets = match mode.get_ref().as_str() {
            "all" => SubsetMode::All,
            "max" => SubsetMode::MaxAdmissible,
            other => {
                return Err(ctx.at(
                    mode.span(),
                    format!("unknown subsets mode `{other}`; expected all or max"),
                ))
            }
        };
    }
    settings.subgeneral_m = run.subgeneral_m;
    if let Some(c) = run.max_subsets {
        settings.max_subsets = c;
    }

    Ok(ExperimentConfig {
        field,
        s,
        family,
        points,
        run: settings,
    })
}

fn parse_points(ctx: &Ctx, rp: &RawPoints, field: Field, n: usize) -> Result<PointSpec, HarnessError> {
    let mode_span = rp.mode.span();
    let (params, span) = match &rp.params {
        Some(p) => (p.get_ref().clone(), p.span()),
        None => (toml::Value::Table(Default::default()), mode_span.clone()),
    };
    let spec = match rp.mode.get_ref().as_str() {
        "explicit" => {
            let p: ExplicitParams = params.try_into().map_err(|e: toml::de::Error| {
                ctx.at(span.clone(), format!("explicit points: {}", e.message()))
            })?;
            let pts = p
                .list
                .iter()
                .map(|s| parse_point(s, field))
                .collect::<Result<Vec<_>, _>>()
                .map_err(|e| ctx.at(span.clone(), e.to_string()))?;
            PointSpec::Explicit(pts)
        }
        "geometric" => {
            let p: GeometricParams = params.try_into().map_err(|e: toml::de::Error| {
                ctx.at(span.clone(), format!("geometric points: {}", e.message()))
            })?;
            if !is_prime(p.p) || p.s_min > p.s_max {
                return Err(ctx.at(span, "geometric points need prime p and s_min <= s_max"));
            }
            PointSpec::Geometric {
                base: p.base.into_iter().map(BigInt::from).collect(),
                direction: p.direction.into_iter().map(BigInt::from).collect(),
                p: p.p,
                s_min: p.s_min,
                s_max: p.s_max,
            }
        }
        mode @ ("random" | "quadratic") => {
            let p: RandomParams = params.try_into().map_err(|e: toml::de::Error| {
                ctx.at(span.clone(), format!("{mode} points: {}", e.message()))
            })?;
            let bound = parse_bound(&p.bound).map_err(|m| ctx.at(span.clone(), m))?;
            if mode == "quadratic" {
                if field == Field::Rational {
                    return Err(ctx.at(mode_span, "quadratic points need a quadratic field"));
                }
                PointSpec::Quadratic {
                    count: p.count,
                    bound,
                    seed: p.seed,
                }
            } else {
                PointSpec::Random {
                    count: p.count,
                    bound,
                    seed: p.seed,
                }
            }
        }
        other => {
            return Err(ctx.at(
                mode_span,
                format!("unknown points mode `{other}`; expected explicit, geometric, random or quadratic"),
            ));
        }
    };
    match &spec {
        PointSpec::Explicit(pts) => {
            if let Some(p) = pts.iter().find(|p| p.dim() != n) {
                return Err(ctx.at(span, format!("point {p} is not in P^{n}")));
            }
        }
        PointSpec::Geometric { base, direction, .. } if (base.len() != n + 1 || direction.len() != n + 1) => {
            return Err(ctx.at(span, format!("base and direction need {} entries", n + 1)));
        }
        _ => {}
    }
    Ok(spec)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numfield::{int, rat};

    #[test]
    fn rationals() {
        assert_eq!(parse_rational("1/2").unwrap(), rat(1, 2));
        assert_eq!(parse_rational("0.5").unwrap(), rat(1, 2));
        assert_eq!(parse_rational("-0.125").unwrap(), rat(-1, 8));
        assert_eq!(parse_rational("1e3").unwrap(), int(1000));
        assert_eq!(parse_rational("2.5e-1").unwrap(), rat(1, 4));
        assert_eq!(parse_rational("7").unwrap(), int(7));
        assert!(parse_rational("x").is_err());
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational(".").is_err());
    }

    #[test]
    fn line_columns() {
        assert_eq!(line_col("ab\ncd", 4), (2, 2));
        assert_eq!(line_col("abc", 0), (1, 1));
    }
}
