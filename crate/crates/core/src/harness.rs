//! Experiments on the main inequality
//!
//! ```text
//! Σ_{v∈S} Σ_{w|v} Σ_i c_i ε_i λ_{D_i,w}(P) ≤ (a + ε) h(P)
//! ```
//!
//! over point families, and the sharpness series for lines through points on
//! a common line.

mod config;

use std::fmt::Write as _;
use std::io;
use std::ops::RangeInclusive;
use std::path::Path;

use num_bigint::{BigInt, RandBigInt};
use num_traits::{One, Pow, Signed};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub use config::{line_col, parse_point, parse_rational};

use crate::arith::is_prime;
use crate::bounds;
use crate::error::{HarnessError, ProjectiveError};
use crate::numfield::{int, rat_to_f64, Field, FieldElement, Rational, RationalPlace, SSet};
use crate::position::{position_report_of, subgeneral_subsets};
use crate::projective::{
    height, weil_sum, weil_terms, DivisorFamily, Hypersurface, ProjPoint, WeightedDivisor,
};

pub const DEFAULT_SEED: u64 = 42;
pub const DEFAULT_HEIGHT_FLOOR: f64 = 20.0;
pub const DEFAULT_MAX_SUBSETS: usize = 1 << 16;

#[derive(Clone, Debug, PartialEq)]
pub enum FactorChoice {
    Subgeneral,
    Index,
    GeneralPosition,
    Levin,
    Schlickewei,
    Explicit(Rational),
}

/// How the per-place sum over divisors is formed.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SubsetMode {
    /// Every divisor at every place.
    All,
    /// Per place above `v`, the largest sum over a subset of the divisors at
    /// `v` that is in `m`-subgeneral position.
    MaxAdmissible,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunSettings {
    pub epsilon: Rational,
    pub factor: FactorChoice,
    pub height_floor: f64,
    pub seed: u64,
    pub m: Option<u64>,
    pub kappa: Option<u64>,
    pub delta: Option<u64>,
    pub subsets: SubsetMode,
    pub subgeneral_m: Option<usize>,
    pub max_subsets: usize,
}

impl Default for RunSettings {
    fn default() -> Self {
        RunSettings {
            epsilon: Rational::new(1.into(), 2.into()),
            factor: FactorChoice::Subgeneral,
            height_floor: DEFAULT_HEIGHT_FLOOR,
            seed: DEFAULT_SEED,
            m: None,
            kappa: None,
            delta: None,
            subsets: SubsetMode::All,
            subgeneral_m: None,
            max_subsets: DEFAULT_MAX_SUBSETS,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum PointSpec {
    Explicit(Vec<ProjPoint>),
    /// `base + p^s · direction` for `s ∈ [s_min, s_max]`.
    Geometric {
        base: Vec<BigInt>,
        direction: Vec<BigInt>,
        p: u64,
        s_min: u32,
        s_max: u32,
    },
    /// Integer coordinates uniform in `[-bound, bound]`.
    Random {
        count: usize,
        bound: BigInt,
        seed: Option<u64>,
    },
    /// Coordinates `a + b√d` with `a, b` uniform in `[-bound, bound]`.
    Quadratic {
        count: usize,
        bound: BigInt,
        seed: Option<u64>,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub field: Field,
    pub s: SSet,
    pub family: DivisorFamily,
    pub points: PointSpec,
    pub run: RunSettings,
}

impl ExperimentConfig {
    pub fn parse(src: &str) -> Result<Self, HarnessError> {
        config::parse_config(src)
    }

    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn n(&self) -> usize {
        self.family.n
    }
}

fn on_support(family: &DivisorFamily, p: &ProjPoint) -> Result<bool, ProjectiveError> {
    for ds in family.per_place.values() {
        for d in ds {
            if d.hypersurface.eval(p)?.is_zero() {
                return Ok(true);
            }
        }
    }
    Ok(false)
}

/// Points produced by a generator; random modes resample support hits.
#[derive(Clone, Debug)]
pub struct PointBatch {
    pub points: Vec<ProjPoint>,
    /// Labels of points `s` for geometric series.
    pub labels: Vec<Option<u32>>,
    pub resampled_support_hits: usize,
}

fn geometric_point(base: &[BigInt], dir: &[BigInt], p: u64, s: u32) -> Result<ProjPoint, ProjectiveError> {
    let ps: BigInt = Pow::pow(BigInt::from(p), s);
    ProjPoint::from_bigints(base.iter().zip(dir).map(|(b, d)| b + &ps * d).collect())
}

pub fn generate_points(config: &ExperimentConfig) -> Result<PointBatch, HarnessError> {
    let n = config.n();
    let mut batch = PointBatch {
        points: Vec::new(),
        labels: Vec::new(),
        resampled_support_hits: 0,
    };
    match &config.points {
        PointSpec::Explicit(pts) => {
            batch.points = pts.clone();
            batch.labels = vec![None; pts.len()];
        }
        PointSpec::Geometric {
            base,
            direction,
            p,
            s_min,
            s_max,
        } => {
            for s in *s_min..=*s_max {
                batch.points.push(geometric_point(base, direction, *p, s)?);
                batch.labels.push(Some(s));
            }
        }
        PointSpec::Random { count, bound, seed } | PointSpec::Quadratic { count, bound, seed } => {
            let quadratic = matches!(config.points, PointSpec::Quadratic { .. });
            if quadratic && config.field == Field::Rational {
                return Err(HarnessError::Config(
                    "quadratic points need a quadratic field".into(),
                ));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed.unwrap_or(config.run.seed));
            let lo = -bound.clone();
            let hi = bound + 1;
            let mut attempts = 0usize;
            while batch.points.len() < *count {
                attempts += 1;
                if attempts > 100 * count + 100 {
                    return Err(HarnessError::Config(
                        "could not sample enough points off the divisor supports".into(),
                    ));
                }
                let coords: Vec<FieldElement> = (0..=n)
                    .map(|_| {
                        let a = rng.gen_bigint_range(&lo, &hi);
                        if quadratic {
                            let b = rng.gen_bigint_range(&lo, &hi);
                            FieldElement::new(
                                config.field,
                                Rational::from_integer(a),
                                Rational::from_integer(b),
                            )
                        } else {
                            FieldElement::from_bigint(a)
                        }
                    })
                    .collect();
                let Ok(p) = ProjPoint::new(config.field, coords) else {
                    continue;
                };
                if quadratic && p.is_rational() {
                    continue;
                }
                if on_support(&config.family, &p)? {
                    batch.resampled_support_hits += 1;
                    continue;
                }
                batch.points.push(p);
                batch.labels.push(None);
            }
        }
    }
    Ok(batch)
}

/// Parameters the factor formulas are evaluated at.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FactorInputs {
    pub m: u64,
    pub n: u64,
    pub delta: u64,
    pub kappa: u64,
}

/// `m` and `κ` from the run settings, or from the position of the family:
/// the worst place decides.
pub fn factor_inputs(config: &ExperimentConfig, point_degree: u64) -> Result<FactorInputs, HarnessError> {
    let n = config.n() as u64;
    let delta = config.run.delta.unwrap_or(point_degree.max(1));
    let need_position = config.run.m.is_none() || config.run.kappa.is_none();
    let (mut m, mut kappa) = (n, n);
    if need_position {
        for ds in config.family.per_place.values() {
            if ds.is_empty() {
                continue;
            }
            let hs: Vec<Hypersurface> = ds.iter().map(|d| d.hypersurface.clone()).collect();
            let r = position_report_of(&hs, config.n())?;
            m = m.max(r.min_m as u64);
            kappa = kappa.min(r.kappa as u64);
        }
    }
    Ok(FactorInputs {
        m: config.run.m.unwrap_or(m),
        n,
        delta,
        kappa: config.run.kappa.unwrap_or(kappa),
    })
}

pub fn resolve_factor(choice: &FactorChoice, inputs: &FactorInputs) -> Result<Rational, HarnessError> {
    let FactorInputs { m, n, delta, kappa } = *inputs;
    Ok(match choice {
        FactorChoice::Subgeneral => bounds::factor_subgeneral(m, n, delta)?.value,
        FactorChoice::Index => bounds::factor_index(m, n, delta, kappa)?.value,
        FactorChoice::GeneralPosition => bounds::factor_general_position(m, n, delta)?.value,
        FactorChoice::Levin => bounds::levin_factor(m, n, delta)?,
        FactorChoice::Schlickewei => bounds::schlickewei_factor(n, delta)?,
        FactorChoice::Explicit(r) => r.clone(),
    })
}

#[derive(Clone, Debug)]
pub struct PointRow {
    pub point: ProjPoint,
    pub h: f64,
    pub lhs: f64,
    pub bound: f64,
    pub margin: f64,
    pub holds: bool,
}

#[derive(Clone, Debug)]
pub struct PointFailure {
    pub point: String,
    pub message: String,
}

#[derive(Clone, Debug)]
pub struct VerificationReport {
    pub factor: Rational,
    pub epsilon: Rational,
    pub height_floor: f64,
    pub rows: Vec<PointRow>,
    pub support_hits: Vec<String>,
    pub failures: Vec<PointFailure>,
    pub resampled_support_hits: usize,
}

impl VerificationReport {
    fn above_floor(&self) -> impl Iterator<Item = &PointRow> {
        self.rows.iter().filter(|r| r.h >= self.height_floor)
    }

    /// Rows at or above the height floor with a negative margin.
    pub fn violations(&self) -> usize {
        self.above_floor().filter(|r| !r.holds).count()
    }

    pub fn below_floor(&self) -> usize {
        self.rows.len() - self.above_floor().count()
    }

    pub fn min_margin(&self) -> Option<f64> {
        self.above_floor().map(|r| r.margin).reduce(f64::min)
    }

    pub fn summary(&self) -> String {
        let mut s = format!(
            "{} points, {} at or above height {}, {} violations",
            self.rows.len(),
            self.rows.len() - self.below_floor(),
            fmt_g(self.height_floor),
            self.violations()
        );
        if let Some(m) = self.min_margin() {
            let _ = write!(s, ", min margin {}", fmt_g(m));
        }
        if !self.support_hits.is_empty() || self.resampled_support_hits > 0 {
            let _ = write!(
                s,
                ", {} support hits skipped",
                self.support_hits.len() + self.resampled_support_hits
            );
        }
        if !self.failures.is_empty() {
            let _ = write!(s, ", {} points failed", self.failures.len());
        }
        s.push_str(" (sampled check only)");
        s
    }
}

/// Left-hand side of the inequality at `p`.
pub fn lhs(config: &ExperimentConfig, p: &ProjPoint, m_sub: usize) -> Result<f64, HarnessError> {
    match config.run.subsets {
        SubsetMode::All => Ok(weil_sum(&config.family, &config.s, p)?.value()),
        SubsetMode::MaxAdmissible => {
            let admissible = admissible_subsets(config, m_sub)?;
            max_subset_lhs(config, p, &admissible)
        }
    }
}

type Admissible = Vec<(RationalPlace, Vec<Vec<usize>>)>;

fn admissible_subsets(config: &ExperimentConfig, m: usize) -> Result<Admissible, HarnessError> {
    let mut out = Vec::new();
    let mut total = 0;
    for v in config.s.rational_places() {
        let hs = config.family.hypersurfaces_at(v);
        if hs.is_empty() {
            continue;
        }
        let subsets = subgeneral_subsets(&hs, config.n(), m)?;
        total += subsets.len();
        if total > config.run.max_subsets {
            return Err(HarnessError::Unsupported(format!(
                "more than {} admissible subsets",
                config.run.max_subsets
            )));
        }
        out.push((v, subsets));
    }
    Ok(out)
}

fn max_subset_lhs(
    config: &ExperimentConfig,
    p: &ProjPoint,
    admissible: &Admissible,
) -> Result<f64, HarnessError> {
    let terms = weil_terms(&config.family, &config.s, p, p.field())?;
    let mut total = 0.0;
    for (v, subsets) in admissible {
        let mut places: Vec<_> = terms.iter().filter(|t| t.v == *v).map(|t| t.w).collect();
        places.dedup();
        for w in places {
            let mut vals = vec![0.0; config.family.at(*v).len()];
            for t in terms.iter().filter(|t| t.v == *v && t.w == w) {
                vals[t.index] = t.weighted().value();
            }
            let best = subsets
                .iter()
                .map(|i| i.iter().map(|&j| vals[j]).sum::<f64>())
                .fold(f64::NEG_INFINITY, f64::max);
            if best.is_finite() {
                total += best;
            }
        }
    }
    Ok(total)
}

/// Evaluates the inequality at every generated point.
pub fn verify_inequality(config: &ExperimentConfig) -> Result<VerificationReport, HarnessError> {
    let batch = generate_points(config)?;
    let degree = batch.points.iter().map(|p| p.degree() as u64).max().unwrap_or(1);
    let inputs = factor_inputs(config, degree)?;
    let factor = resolve_factor(&config.run.factor, &inputs)?;
    let coeff = rat_to_f64(&(&factor + &config.run.epsilon));
    let m_sub = config.run.subgeneral_m.unwrap_or(inputs.m as usize);
    let admissible = match config.run.subsets {
        SubsetMode::All => None,
        SubsetMode::MaxAdmissible => Some(admissible_subsets(config, m_sub)?),
    };
    let mut report = VerificationReport {
        factor,
        epsilon: config.run.epsilon.clone(),
        height_floor: config.run.height_floor,
        rows: Vec::new(),
        support_hits: Vec::new(),
        failures: Vec::new(),
        resampled_support_hits: batch.resampled_support_hits,
    };
    for p in batch.points {
        let value = match &admissible {
            None => weil_sum(&config.family, &config.s, &p)
                .map(|s| s.value())
                .map_err(HarnessError::from),
            Some(a) => max_subset_lhs(config, &p, a),
        };
        let lhs = match value {
            Ok(v) => v,
            Err(HarnessError::Projective(ProjectiveError::SupportHit { .. })) => {
                report.support_hits.push(p.to_string());
                continue;
            }
            Err(e) => {
                report.failures.push(PointFailure {
                    point: p.to_string(),
                    message: e.to_string(),
                });
                continue;
            }
        };
        let h = match height(&p) {
            Ok(h) => h,
            Err(e) => {
                report.failures.push(PointFailure {
                    point: p.to_string(),
                    message: e.to_string(),
                });
                continue;
            }
        };
        let bound = coeff * h;
        let margin = bound - lhs;
        report.rows.push(PointRow {
            point: p,
            h,
            lhs,
            bound,
            margin,
            holds: margin >= 0.0,
        });
    }
    Ok(report)
}

/// `%.12g`-style rendering: 12 significant digits, trailing zeros trimmed.
pub fn fmt_g(x: f64) -> String {
    const DIGITS: i32 = 12;
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return if x.is_nan() {
            "nan".into()
        } else if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        };
    }
    let sci = format!("{:.*e}", (DIGITS - 1) as usize, x);
    let (mant, exp) = sci.split_once('e').expect("exponent");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..DIGITS).contains(&exp) {
        let mant = trim_zeros(mant);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{mant}e{sign}{:02}", exp.abs())
    } else {
        trim_zeros(&format!("{:.*}", (DIGITS - 1 - exp) as usize, x)).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

pub fn report_csv(report: &VerificationReport) -> String {
    let mut out = String::from("point,h,lhs,bound,margin,holds\n");
    for r in &report.rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            r.point,
            fmt_g(r.h),
            fmt_g(r.lhs),
            fmt_g(r.bound),
            fmt_g(r.margin),
            r.holds
        );
    }
    out
}

#[derive(Clone, Debug, PartialEq)]
pub struct SeriesRow {
    pub s: u32,
    pub h: f64,
    pub lhs: f64,
    pub ratio: f64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct SharpnessSeries {
    pub rows: Vec<SeriesRow>,
    pub skipped: Vec<u32>,
}

impl SharpnessSeries {
    pub fn last(&self) -> Option<&SeriesRow> {
        self.rows.last()
    }
}

pub fn series_csv(series: &SharpnessSeries) -> String {
    let mut out = String::from("s,h,lhs,ratio\n");
    for r in &series.rows {
        let _ = writeln!(out, "{},{},{},{}", r.s, fmt_g(r.h), fmt_g(r.lhs), fmt_g(r.ratio));
    }
    out
}

pub fn write_file(path: &Path, contents: &str) -> Result<(), HarnessError> {
    std::fs::write(path, contents).map_err(HarnessError::from)
}

fn basis(n: usize, i: usize) -> Vec<i64> {
    let mut v = vec![0; n + 1];
    v[i] = 1;
    v
}

fn hyperplane(coeffs: &[i64]) -> Hypersurface {
    let c: Vec<FieldElement> = coeffs.iter().map(|&x| FieldElement::from_int(x)).collect();
    Hypersurface::hyperplane(&c).expect("nonzero linear form")
}

/// Integer vectors with entries in `[-b, b]`, simplest first.
fn small_vectors(len: usize, b: i64) -> Vec<Vec<i64>> {
    let mut out: Vec<Vec<i64>> = vec![Vec::new()];
    for _ in 0..len {
        out = out
            .into_iter()
            .flat_map(|v| {
                (-b..=b).map(move |x| {
                    let mut w = v.clone();
                    w.push(x);
                    w
                })
            })
            .collect();
    }
    out.retain(|v| v.iter().any(|&x| x != 0));
    out.sort_by_key(|v| {
        let nz = v.iter().filter(|&&x| x != 0).count();
        let mx = v.iter().map(|x| x.abs()).max().unwrap_or(0);
        let first_sign = v
            .iter()
            .find(|&&x| x != 0)
            .map_or(0, |&x| if x > 0 { 0 } else { 1 });
        (
            mx,
            nz,
            first_sign,
            v.iter().map(|&x| (x.abs(), x < 0)).collect::<Vec<_>>(),
        )
    });
    out
}

/// The points on the line `x_0 = … = x_{n−1}` that the hyperplane groups pass
/// through: `e_n`, `(1,…,1)`, then `(1,…,1,2)`, `(1,…,1,0)` when `δ = 2`.
fn line_points(n: usize, delta: u64) -> Vec<Vec<i64>> {
    let mut pts = vec![basis(n, n), vec![1; n + 1]];
    if delta == 2 {
        let mut p3 = vec![1; n + 1];
        p3[n] = 2;
        let mut p4 = vec![1; n + 1];
        p4[n] = 0;
        pts.push(p3);
        pts.push(p4);
    }
    pts
}

/// `2δn` hyperplanes in general position in `P^n`, in `2δ` groups of `n`,
/// group `s` cutting out a point `P_s` on a common rational line; `S = {∞, p}`
/// and the points `[p^s : … : p^s : p^s + 1]` on the line.
pub fn build_sharpness_config(n: usize, delta: u64, p: u64) -> Result<ExperimentConfig, HarnessError> {
    if !is_prime(p) {
        return Err(HarnessError::Config(format!("{p} is not prime")));
    }
    if n < 2 {
        return Err(HarnessError::Unsupported("n must be at least 2".into()));
    }
    if !(1..=2).contains(&delta) {
        return Err(HarnessError::Unsupported(format!(
            "delta = {delta}: only delta 1 and 2 have an exact construction"
        )));
    }
    if n > 5 {
        return Err(HarnessError::Unsupported(format!(
            "n = {n}: the hyperplane search is limited to n <= 5"
        )));
    }
    let hyperplanes: Vec<Vec<i64>> = if n == 2 && delta == 1 {
        vec![vec![1, 0, 0], vec![0, 1, 0], vec![1, 0, -1], vec![0, 1, -1]]
    } else {
        search_hyperplanes(n, delta)?
    };
    let hs: Vec<Hypersurface> = hyperplanes.iter().map(|c| hyperplane(c)).collect();
    if !position_report_of(&hs, n)?.general {
        return Err(HarnessError::Unsupported(format!(
            "no general-position configuration found for n = {n}, delta = {delta}"
        )));
    }
    let s = SSet::new(true, vec![p]);
    let family = DivisorFamily::uniform(n, &s, hs.into_iter().map(WeightedDivisor::unit).collect());
    let run = RunSettings {
        factor: FactorChoice::GeneralPosition,
        delta: Some(delta),
        ..RunSettings::default()
    };
    Ok(ExperimentConfig {
        field: Field::Rational,
        s,
        family,
        points: PointSpec::Geometric {
            base: basis(n, n).into_iter().map(BigInt::from).collect(),
            direction: vec![BigInt::one(); n + 1],
            p,
            s_min: 1,
            s_max: 30,
        },
        run,
    })
}

fn search_hyperplanes(n: usize, delta: u64) -> Result<Vec<Vec<i64>>, HarnessError> {
    let points = line_points(n, delta);
    let simple = small_vectors(n + 1, 2);
    if let Some(found) = greedy_groups(n, &points, |pt| through(&simple, pt)) {
        return Ok(found);
    }
    // simplest-first can dead-end; fall back to seeded random forms
    let mut rng = ChaCha8Rng::seed_from_u64(DEFAULT_SEED);
    for _ in 0..200 {
        let found = greedy_groups(n, &points, |pt| {
            (0..4000).map(|_| random_form_through(&mut rng, pt)).collect()
        });
        if let Some(found) = found {
            return Ok(found);
        }
    }
    Err(HarnessError::Unsupported(format!(
        "no general-position configuration found for n = {n}, delta = {delta}"
    )))
}

fn through(candidates: &[Vec<i64>], pt: &[i64]) -> Vec<Vec<i64>> {
    candidates
        .iter()
        .filter(|c| c.iter().zip(pt).map(|(a, b)| a * b).sum::<i64>() == 0)
        .cloned()
        .collect()
}

/// A random integer form vanishing at `pt`, which has some coordinate `±1`.
fn random_form_through(rng: &mut ChaCha8Rng, pt: &[i64]) -> Vec<i64> {
    use rand::Rng;
    let k = pt.iter().rposition(|x| x.abs() == 1).expect("a unit coordinate");
    let mut c: Vec<i64> = (0..pt.len()).map(|_| rng.gen_range(-9..=9)).collect();
    c[k] = 0;
    let rest: i64 = c.iter().zip(pt).map(|(a, b)| a * b).sum();
    c[k] = -rest * pt[k];
    c
}

fn det(mut a: Vec<Vec<i128>>) -> i128 {
    // fraction-free (Bareiss) elimination
    let k = a.len();
    let mut sign = 1;
    let mut prev = 1i128;
    for i in 0..k {
        if a[i][i] == 0 {
            match (i + 1..k).find(|&r| a[r][i] != 0) {
                Some(r) => {
                    a.swap(i, r);
                    sign = -sign;
                }
                None => return 0,
            }
        }
        for r in i + 1..k {
            for c in i + 1..k {
                a[r][c] = (a[r][c] * a[i][i] - a[r][i] * a[i][c]) / prev;
            }
        }
        prev = a[i][i];
    }
    sign * a[k - 1][k - 1]
}

fn rank(rows: &[&Vec<i64>]) -> usize {
    let mut m: Vec<Vec<i128>> = rows
        .iter()
        .map(|r| r.iter().map(|&x| x as i128).collect())
        .collect();
    let cols = m.first().map_or(0, Vec::len);
    let mut r = 0;
    for c in 0..cols {
        let Some(p) = (r..m.len()).find(|&i| m[i][c] != 0) else {
            continue;
        };
        m.swap(r, p);
        for i in r + 1..m.len() {
            let (a, b) = (m[r][c], m[i][c]);
            for j in 0..cols {
                m[i][j] = m[i][j] * a - m[r][j] * b;
            }
            let g = m[i].iter().fold(0i128, |g, &x| num_integer::gcd(g, x));
            if g > 1 {
                m[i].iter_mut().for_each(|x| *x /= g);
            }
        }
        r += 1;
    }
    r
}

/// Normal vector of the span of `n` rows in `Z^{n+1}`.
fn normal(rows: &[&Vec<i64>]) -> Vec<i128> {
    let cols = rows.len() + 1;
    (0..cols)
        .map(|k| {
            let minor: Vec<Vec<i128>> = rows
                .iter()
                .map(|r| (0..cols).filter(|&j| j != k).map(|j| r[j] as i128).collect())
                .collect();
            let d = det(minor);
            if k % 2 == 0 {
                d
            } else {
                -d
            }
        })
        .collect()
}

fn subsets_of_size(len: usize, k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for last in k - 1..len {
        for mut s in subsets_of_size(last, k - 1) {
            s.push(last);
            out.push(s);
        }
    }
    out
}

fn greedy_groups(
    n: usize,
    points: &[Vec<i64>],
    mut candidates: impl FnMut(&[i64]) -> Vec<Vec<i64>>,
) -> Option<Vec<Vec<i64>>> {
    let mut chosen: Vec<Vec<i64>> = Vec::new();
    // normals of the spans of every n-subset of `chosen`; a general family
    // stays general iff the new form avoids all of them
    let mut normals: Vec<Vec<i128>> = Vec::new();
    for pt in points {
        let mut group = 0;
        for c in candidates(pt) {
            if c.iter().all(|&x| x == 0) {
                continue;
            }
            if group == n {
                break;
            }
            let ok = if chosen.len() < n {
                let mut rows: Vec<&Vec<i64>> = chosen.iter().collect();
                rows.push(&c);
                rank(&rows) == rows.len()
            } else {
                normals
                    .iter()
                    .all(|nv| nv.iter().zip(&c).map(|(a, &b)| a * b as i128).sum::<i128>() != 0)
            };
            if !ok {
                continue;
            }
            if chosen.len() + 1 >= n {
                for sub in subsets_of_size(chosen.len(), n - 1) {
                    let mut rows: Vec<&Vec<i64>> = sub.iter().map(|&i| &chosen[i]).collect();
                    rows.push(&c);
                    normals.push(normal(&rows));
                }
            }
            chosen.push(c);
            group += 1;
        }
        if group < n {
            return None;
        }
    }
    Some(chosen)
}

fn series_point(config: &ExperimentConfig, s: u32) -> Result<ProjPoint, HarnessError> {
    let PointSpec::Geometric {
        base, direction, p, ..
    } = &config.points
    else {
        return Err(HarnessError::Config(
            "the sharpness series needs geometric points".into(),
        ));
    };
    Ok(geometric_point(base, direction, *p, s)?)
}

/// `h(P_s)`, the left-hand side and their ratio along the geometric points.
pub fn sharpness_series(
    config: &ExperimentConfig,
    s_range: RangeInclusive<u32>,
) -> Result<SharpnessSeries, HarnessError> {
    let mut series = SharpnessSeries::default();
    for s in s_range {
        let p = series_point(config, s)?;
        let lhs = match weil_sum(&config.family, &config.s, &p) {
            Ok(v) => v.value(),
            Err(ProjectiveError::SupportHit { .. }) => {
                series.skipped.push(s);
                continue;
            }
            Err(e) => return Err(e.into()),
        };
        let h = height(&p)?;
        series.rows.push(SeriesRow {
            s,
            h,
            lhs,
            ratio: lhs / h,
        });
    }
    Ok(series)
}

#[derive(Clone, Debug)]
pub struct QuadraticCandidate {
    pub s: u32,
    pub point: ProjPoint,
    pub h: f64,
    pub lhs: f64,
    pub ratio: f64,
}

/// Exploratory search over quadratic points `base + p^s (a + b√d) · direction`
/// with `|a|, |b| ≤ coeff_bound`, `b ≠ 0`; keeps the best ratio per `s`.
pub fn quadratic_sharpness_search(
    config: &ExperimentConfig,
    d: i64,
    s_range: RangeInclusive<u32>,
    coeff_bound: i64,
) -> Result<Vec<QuadraticCandidate>, HarnessError> {
    let PointSpec::Geometric {
        base, direction, p, ..
    } = &config.points
    else {
        return Err(HarnessError::Config("the search needs geometric points".into()));
    };
    let field = Field::quadratic(d)?;
    let mut out = Vec::new();
    for s in s_range {
        let ps = Rational::from_integer(Pow::pow(BigInt::from(*p), s));
        let mut best: Option<QuadraticCandidate> = None;
        for a in -coeff_bound..=coeff_bound {
            for b in -coeff_bound..=coeff_bound {
                if b == 0 {
                    continue;
                }
                let tau = FieldElement::new(field, &ps * int(a), &ps * int(b));
                let coords: Vec<FieldElement> = base
                    .iter()
                    .zip(direction)
                    .map(|(x, y)| {
                        &FieldElement::from_bigint(x.clone())
                            + &(&tau * &FieldElement::from_bigint(y.clone()))
                    })
                    .collect();
                let Ok(pt) = ProjPoint::new(field, coords) else {
                    continue;
                };
                let lhs = match weil_sum(&config.family, &config.s, &pt) {
                    Ok(v) => v.value(),
                    Err(ProjectiveError::SupportHit { .. }) => continue,
                    Err(e) => return Err(e.into()),
                };
                let h = height(&pt)?;
                if h <= 0.0 {
                    continue;
                }
                let ratio = lhs / h;
                if best.as_ref().is_none_or(|c| ratio > c.ratio) {
                    best = Some(QuadraticCandidate {
                        s,
                        point: pt,
                        h,
                        lhs,
                        ratio,
                    });
                }
            }
        }
        out.extend(best);
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConjugateDefect {
    pub weil: f64,
    pub height: f64,
}

impl ConjugateDefect {
    pub fn max(&self) -> f64 {
        self.weil.max(self.height)
    }
}

/// `|Σλ(P) − Σλ(P^σ)|` and `|h(P) − h(P^σ)|` for the family of `config`.
pub fn conjugate_consistency(
    p: &ProjPoint,
    config: &ExperimentConfig,
) -> Result<ConjugateDefect, HarnessError> {
    let rational_family = config
        .family
        .per_place
        .values()
        .flatten()
        .all(|d| d.hypersurface.poly().is_rational());
    if !rational_family {
        return Err(HarnessError::Unsupported(
            "conjugate consistency needs divisors defined over Q".into(),
        ));
    }
    let q = p.conj();
    let weil = (weil_sum(&config.family, &config.s, p)?.value()
        - weil_sum(&config.family, &config.s, &q)?.value())
    .abs();
    let height = (height(p)? - height(&q)?).abs();
    Ok(ConjugateDefect { weil, height })
}

#[derive(Clone, Debug, PartialEq)]
pub struct LemmaSummary {
    pub trials: usize,
    pub lemma_min: f64,
    pub corollary_min: f64,
    pub violations: usize,
}

impl std::fmt::Display for LemmaSummary {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{} trials, lemma min defect {}, corollary min defect {}, {} violations",
            self.trials,
            fmt_g(self.lemma_min),
            fmt_g(self.corollary_min),
            self.violations
        )
    }
}

pub const LEMMA_TOLERANCE: f64 = 1e-12;

/// One random instance: nonincreasing `λ ≥ 0`, and weights in `[0, 1]` with
/// about a fifth of them zero. `b_1 > 0` and some `c_i > 0` always.
pub fn random_lemma_instance(rng: &mut ChaCha8Rng) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    use rand::Rng;
    let len = rng.gen_range(1..=8);
    let mut lambdas: Vec<f64> = (0..len).map(|_| rng.gen_range(0.0..10.0)).collect();
    lambdas.sort_by(|a, b| b.total_cmp(a));
    let weight = |rng: &mut ChaCha8Rng| {
        if rng.gen_bool(0.2) {
            0.0
        } else {
            rng.gen_range(0.0..1.0)
        }
    };
    let mut bs: Vec<f64> = (0..len).map(|_| weight(rng)).collect();
    let mut cs: Vec<f64> = (0..len).map(|_| weight(rng)).collect();
    if bs[0] == 0.0 {
        bs[0] = rng.gen_range(0.01..1.0);
    }
    if cs.iter().all(|&c| c == 0.0) {
        let i = rng.gen_range(0..len);
        cs[i] = rng.gen_range(0.01..1.0);
    }
    (lambdas, bs, cs)
}

/// Runs both weighted Chebyshev checks on `trials` seeded random instances.
pub fn check_lemma(trials: usize, seed: u64) -> Result<LemmaSummary, HarnessError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut summary = LemmaSummary {
        trials,
        lemma_min: f64::INFINITY,
        corollary_min: f64::INFINITY,
        violations: 0,
    };
    for _ in 0..trials {
        let (l, b, c) = random_lemma_instance(&mut rng);
        let d1 = bounds::chebyshev_check(&l, &b, &c)?;
        let d2 = bounds::chebyshev_corollary_check(&l, &b, &c)?;
        summary.lemma_min = summary.lemma_min.min(d1);
        summary.corollary_min = summary.corollary_min.min(d2);
        summary.violations += usize::from(d1 < -LEMMA_TOLERANCE) + usize::from(d2 < -LEMMA_TOLERANCE);
    }
    Ok(summary)
}

/// Writes `contents` to `out`, or to stdout when `out` is `None`.
pub fn emit(out: Option<&Path>, contents: &str) -> Result<(), HarnessError> {
    match out {
        Some(path) => write_file(path, contents),
        None => {
            use io::Write;
            io::stdout()
                .write_all(contents.as_bytes())
                .map_err(HarnessError::from)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numfield::rat;

    const SHARP: &str = r#"
[field]
kind = "rational"

[places]
primes = [2]

[[divisors]]
poly = "x0"
[[divisors]]
poly = "x1"
[[divisors]]
poly = "x0 - x2"
[[divisors]]
poly = "x1 - x2"

[points]
mode = "geometric"
params = { base = [0, 0, 1], direction = [1, 1, 1], p = 2, s_min = 10, s_max = 30 }

[run]
factor = "general_position"
epsilon = 0.5
"#;

    #[test]
    fn g_format() {
        assert_eq!(fmt_g(4.0), "4");
        assert_eq!(fmt_g(0.1), "0.1");
        assert_eq!(fmt_g(20.7944154168), "20.7944154168");
        assert_eq!(fmt_g(std::f64::consts::PI), "3.14159265359");
        assert_eq!(fmt_g(-1.5e-7), "-1.5e-07");
        assert_eq!(fmt_g(1e15), "1e+15");
        assert_eq!(fmt_g(123456789012.0), "123456789012");
        assert_eq!(fmt_g(0.0001), "0.0001");
    }

    #[test]
    fn parses_sharpness_config() {
        let c = ExperimentConfig::parse(SHARP).unwrap();
        assert_eq!(c.n(), 2);
        assert_eq!(c.run.epsilon, rat(1, 2));
        assert_eq!(c.family.at(RationalPlace::Prime(2)).len(), 4);
        let built = build_sharpness_config(2, 1, 2).unwrap();
        assert_eq!(c.family, built.family);
        assert_eq!(c.s, built.s);
    }

    #[test]
    fn unknown_keys_report_position() {
        let err = ExperimentConfig::parse("[field]\nkind = \"rational\"\nbogus = 1\n").unwrap_err();
        match err {
            HarnessError::ConfigSyntax { line, column, .. } => assert_eq!((line, column), (3, 1)),
            e => panic!("unexpected {e}"),
        }
        let err = ExperimentConfig::parse("[field]\nkind = \"rational\"\n[[divisors]]\npoly = \"x0 +\"\n")
            .unwrap_err();
        assert!(matches!(err, HarnessError::ConfigSyntax { line: 3, .. }), "{err}");
    }

    #[test]
    fn sharpness_builder() {
        let c = build_sharpness_config(2, 1, 3).unwrap();
        let hs = c.family.hypersurfaces_at(RationalPlace::Infinity);
        let names: Vec<String> = hs.iter().map(ToString::to_string).collect();
        assert_eq!(names, ["x0", "x1", "x0 - x2", "x1 - x2"]);
        assert!(build_sharpness_config(2, 1, 4).is_err());
        assert!(matches!(
            build_sharpness_config(2, 3, 2),
            Err(HarnessError::Unsupported(_))
        ));

        for (n, delta) in [(3, 1), (2, 2), (3, 2)] {
            let c = build_sharpness_config(n, delta, 2).unwrap();
            let hs = c.family.hypersurfaces_at(RationalPlace::Infinity);
            assert_eq!(hs.len(), 2 * delta as usize * n);
            assert!(position_report_of(&hs, n).unwrap().general);
            // each group of n cuts out a point on the line
            for (g, pt) in line_points(n, delta).iter().enumerate() {
                let group = &hs[g * n..(g + 1) * n];
                let p = ProjPoint::from_ints(pt).unwrap();
                for h in group {
                    assert!(h.eval(&p).unwrap().is_zero());
                }
                assert_eq!(
                    crate::position::codim_intersection(group, n).unwrap(),
                    crate::position::Codim::Finite(n)
                );
            }
        }
    }

    #[test]
    fn sharpness_series_is_four() {
        let c = build_sharpness_config(2, 1, 2).unwrap();
        let series = sharpness_series(&c, 1..=30).unwrap();
        assert_eq!(series.rows.len(), 30);
        for r in &series.rows {
            assert!((r.ratio - 4.0).abs() < 1e-12, "s = {}: {}", r.s, r.ratio);
        }
    }

    #[test]
    fn verification_holds_and_zero_factor_fails() {
        let mut c = ExperimentConfig::parse(SHARP).unwrap();
        let r = verify_inequality(&c).unwrap();
        assert_eq!(r.factor, int(4));
        assert_eq!(r.rows.len(), 21);
        assert_eq!(r.violations(), 0);
        c.run.factor = FactorChoice::Explicit(int(0));
        assert!(verify_inequality(&c).unwrap().violations() > 0);
    }

    #[test]
    fn empty_point_list_is_vacuous() {
        let mut c = ExperimentConfig::parse(SHARP).unwrap();
        c.points = PointSpec::Explicit(Vec::new());
        let r = verify_inequality(&c).unwrap();
        assert!(r.rows.is_empty());
        assert_eq!(r.violations(), 0);
        assert_eq!(report_csv(&r), "point,h,lhs,bound,margin,holds\n");
    }

    #[test]
    fn support_hits_are_recorded() {
        let mut c = ExperimentConfig::parse(SHARP).unwrap();
        c.points = PointSpec::Explicit(vec![
            ProjPoint::from_ints(&[0, 1, 1]).unwrap(),
            ProjPoint::from_ints(&[3, 5, 7]).unwrap(),
        ]);
        let r = verify_inequality(&c).unwrap();
        assert_eq!(r.support_hits, ["[0:1:1]"]);
        assert_eq!(r.rows.len(), 1);
    }

    #[test]
    fn max_subset_mode() {
        let mut c = ExperimentConfig::parse(SHARP).unwrap();
        let all = verify_inequality(&c).unwrap();
        c.run.subsets = SubsetMode::MaxAdmissible;
        let max = verify_inequality(&c).unwrap();
        // every λ is nonnegative on these points
        for (a, b) in all.rows.iter().zip(&max.rows) {
            assert!(b.lhs <= a.lhs + 1e-9);
        }
    }

    #[test]
    fn conjugates() {
        let q2 = Field::quadratic(2).unwrap();
        let mut c = build_sharpness_config(2, 1, 2).unwrap();
        c.field = q2;
        let p = parse_point("[1+sqrt(2):1:3]", q2).unwrap();
        let d = conjugate_consistency(&p, &c).unwrap();
        assert!(d.max() < 1e-9, "{d:?}");
        let r = ProjPoint::from_ints(&[3, 5, 7]).unwrap();
        assert_eq!(conjugate_consistency(&r, &c).unwrap().max(), 0.0);
    }

    #[test]
    fn lemma_trials() {
        let a = check_lemma(2000, 42).unwrap();
        assert_eq!(a.violations, 0);
        assert_eq!(a, check_lemma(2000, 42).unwrap());
        assert_eq!(check_lemma(1, 42).unwrap().trials, 1);
    }

    #[test]
    fn random_points_are_deterministic() {
        let mut c = ExperimentConfig::parse(SHARP).unwrap();
        c.points = PointSpec::Random {
            count: 10,
            bound: BigInt::from(10u64).pow(12u32),
            seed: None,
        };
        let a = report_csv(&verify_inequality(&c).unwrap());
        let b = report_csv(&verify_inequality(&c).unwrap());
        assert_eq!(a, b);
        c.run.seed = 7;
        assert_ne!(a, report_csv(&verify_inequality(&c).unwrap()));
    }
}
