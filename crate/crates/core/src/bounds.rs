//! Bound factors for the subspace-type inequality, with the integer
//! j-maximizations they come from, and checkers for the weighted
//! Chebyshev-type lemma and its corollary.
//!
//! All factors are exact rationals.

use std::fmt;

use num_traits::{One, Zero};

use crate::error::BoundsError;
use crate::numfield::{int, rat, Rational};

/// `m ≥ n ≥ κ ≥ 1`, `δ ≥ 1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BoundParams {
    pub m: u64,
    pub n: u64,
    pub delta: u64,
    pub kappa: u64,
}

impl BoundParams {
    pub fn new(m: u64, n: u64, delta: u64, kappa: u64) -> Result<Self, BoundsError> {
        if n < 1 || delta < 1 || kappa < 1 {
            return Err(BoundsError::Input("n, delta and kappa must be at least 1".into()));
        }
        if m < n {
            return Err(BoundsError::Input(format!("m = {m} must be at least n = {n}")));
        }
        if kappa > n {
            return Err(BoundsError::Input(format!("kappa = {kappa} exceeds n = {n}")));
        }
        Ok(BoundParams { m, n, delta, kappa })
    }

    pub fn subgeneral(m: u64, n: u64, delta: u64) -> Result<Self, BoundsError> {
        BoundParams::new(m, n, delta, 1)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Case {
    /// The maximizing `j` sits at the right end `δn`.
    HighM,
    /// The maximizing `j` is interior, near the vertex of the quadratic.
    MidM,
}

impl fmt::Display for Case {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Case::HighM => write!(f, "HIGH_M"),
            Case::MidM => write!(f, "MID_M"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FormulaId {
    SubgeneralBruteForce,
    SubgeneralClosedForm,
    IndexBruteForce,
    IndexClosedForm,
    GeneralPosition,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FactorResult {
    pub value: Rational,
    pub argmax_j: u64,
    pub case: Case,
    pub formula: FormulaId,
}

/// `(δm − j + κ)(j + 1)/κ`, the quantity maximized over `1 ≤ j ≤ δn`;
/// `κ = 1` gives `(δm − j + 1)(j + 1)`.
fn index_objective(p: &BoundParams, j: u64) -> Rational {
    let dm = (p.delta * p.m) as i64;
    let j = j as i64;
    rat((dm - j + p.kappa as i64) * (j + 1), p.kappa as i64)
}

/// Which case applies: the vertex `(δm + κ − 1)/2` lies at or beyond `δn`
/// exactly when `m ≥ ⌈2n + (1 − κ)/δ⌉`.
fn index_case(p: &BoundParams) -> Case {
    let lhs = p.delta * p.m + p.kappa - 1;
    if lhs >= 2 * p.delta * p.n {
        Case::HighM
    } else {
        Case::MidM
    }
}

fn subgeneral_case(p: &BoundParams) -> Case {
    if p.m > 2 * p.n {
        Case::HighM
    } else {
        Case::MidM
    }
}

fn brute_force(p: &BoundParams) -> (Rational, u64) {
    let mut best: Option<(Rational, u64)> = None;
    for j in 1..=p.delta * p.n {
        let v = index_objective(p, j);
        if best.as_ref().is_none_or(|(b, _)| v > *b) {
            best = Some((v, j));
        }
    }
    best.expect("δn ≥ 1")
}

/// `max_{1≤j≤δn} (δm − j + 1)(j + 1)` by enumeration.
pub fn factor_bruteforce_subgeneral(m: u64, n: u64, delta: u64) -> Result<FactorResult, BoundsError> {
    let p = BoundParams::subgeneral(m, n, delta)?;
    let (value, argmax_j) = brute_force(&p);
    Ok(FactorResult {
        value,
        argmax_j,
        case: subgeneral_case(&p),
        formula: FormulaId::SubgeneralBruteForce,
    })
}

/// `max_{1≤j≤δn} ((δm − j)/κ + 1)(j + 1)` by enumeration.
pub fn factor_bruteforce_index(m: u64, n: u64, delta: u64, kappa: u64) -> Result<FactorResult, BoundsError> {
    let p = BoundParams::new(m, n, delta, kappa)?;
    let (value, argmax_j) = brute_force(&p);
    Ok(FactorResult {
        value,
        argmax_j,
        case: index_case(&p),
        formula: FormulaId::IndexBruteForce,
    })
}

/// Candidates for the nearest integer to `num/2` inside `[1, hi]`. On an
/// exact half-integer both neighbours are returned, smaller first.
fn nearest_integers(num: u64, hi: u64) -> Vec<u64> {
    let cands = if num.is_multiple_of(2) {
        vec![num / 2]
    } else {
        vec![num / 2, num / 2 + 1]
    };
    let mut out: Vec<u64> = cands.into_iter().map(|i| i.clamp(1, hi)).collect();
    out.dedup();
    out
}

/// The subgeneral-position factor in closed form:
///
/// * `m > 2n`: `n(δ²m − δ²n) + δm + 1`, attained at `j = δn`;
/// * `n ≤ m ≤ 2n`: `−i² + δm·i + δm + 1` with `i` the nearest integer to
///   `δm/2` (the smaller one on a tie).
pub fn factor_subgeneral(m: u64, n: u64, delta: u64) -> Result<FactorResult, BoundsError> {
    let p = BoundParams::subgeneral(m, n, delta)?;
    let (mi, ni, di) = (m as i64, n as i64, delta as i64);
    let dm = di * mi;
    match subgeneral_case(&p) {
        Case::HighM => Ok(FactorResult {
            value: int(ni * (di * di * mi - di * di * ni) + dm + 1),
            argmax_j: delta * n,
            case: Case::HighM,
            formula: FormulaId::SubgeneralClosedForm,
        }),
        Case::MidM => {
            let (value, argmax_j) = nearest_integers(delta * m, delta * n)
                .into_iter()
                .map(|i| {
                    let ii = i as i64;
                    (int(-ii * ii + dm * ii + dm + 1), i)
                })
                .fold(None::<(Rational, u64)>, |best, (v, i)| match best {
                    Some((b, bi)) if b >= v => Some((b, bi)),
                    _ => Some((v, i)),
                })
                .expect("at least one candidate");
            Ok(FactorResult {
                value,
                argmax_j,
                case: Case::MidM,
                formula: FormulaId::SubgeneralClosedForm,
            })
        }
    }
}

/// The factor for `m`-subgeneral position with index `κ`:
///
/// * `m ≥ ⌈2n + (1 − κ)/δ⌉`: `(n/κ)(δ²m − δ²n + δ(κ − 1)) + δm/κ + 1`;
/// * otherwise `−i²/κ + ((δm + κ − 1)/κ)·i + δm/κ + 1` with `i` the nearest
///   integer to `(δm + κ − 1)/2`.
pub fn factor_index(m: u64, n: u64, delta: u64, kappa: u64) -> Result<FactorResult, BoundsError> {
    let p = BoundParams::new(m, n, delta, kappa)?;
    let (mi, ni, di, ki) = (m as i64, n as i64, delta as i64, kappa as i64);
    let dm = di * mi;
    match index_case(&p) {
        Case::HighM => {
            let value = rat(ni, ki) * int(di * di * mi - di * di * ni + di * (ki - 1))
                + rat(dm, ki)
                + Rational::one();
            Ok(FactorResult {
                value,
                argmax_j: delta * n,
                case: Case::HighM,
                formula: FormulaId::IndexClosedForm,
            })
        }
        Case::MidM => {
            let (value, argmax_j) = nearest_integers(delta * m + kappa - 1, delta * n)
                .into_iter()
                .map(|i| {
                    let ii = i as i64;
                    let v = rat(-ii * ii, ki) + rat((dm + ki - 1) * ii, ki) + rat(dm, ki) + Rational::one();
                    (v, i)
                })
                .fold(None::<(Rational, u64)>, |best, (v, i)| match best {
                    Some((b, bi)) if b >= v => Some((b, bi)),
                    _ => Some((v, i)),
                })
                .expect("at least one candidate");
            Ok(FactorResult {
                value,
                argmax_j,
                case: Case::MidM,
                formula: FormulaId::IndexClosedForm,
            })
        }
    }
}

/// `max_{1≤j≤δn} (δm/j)(j + 1)`, which is `2δm` at `j = 1`.
pub fn factor_general_position(m: u64, n: u64, delta: u64) -> Result<FactorResult, BoundsError> {
    if m < 1 || n < 1 || delta < 1 {
        return Err(BoundsError::Input("m, n and delta must be at least 1".into()));
    }
    let dm = (delta * m) as i64;
    let mut best: Option<(Rational, u64)> = None;
    for j in 1..=delta * n {
        let v = rat(dm * (j as i64 + 1), j as i64);
        if best.as_ref().is_none_or(|(b, _)| v > *b) {
            best = Some((v, j));
        }
    }
    let (value, argmax_j) = best.expect("δn ≥ 1");
    Ok(FactorResult {
        value,
        argmax_j,
        case: Case::MidM,
        formula: FormulaId::GeneralPosition,
    })
}

/// `δm(δm − 1)(δn + 1)/(δm + δn − 2)`, defined for `δm ≥ 2`.
pub fn levin_factor(m: u64, n: u64, delta: u64) -> Result<Rational, BoundsError> {
    if n < 1 || delta < 1 {
        return Err(BoundsError::Input("n and delta must be at least 1".into()));
    }
    let (dm, dn) = ((delta * m) as i64, (delta * n) as i64);
    if dm < 2 {
        return Err(BoundsError::Domain(format!("δm = {dm} must be at least 2")));
    }
    Ok(rat(dm * (dm - 1) * (dn + 1), dm + dn - 2))
}

/// `(δn)²(δn − 1)/(2δn − 3)`, defined for `δn ≥ 2`.
pub fn schlickewei_factor(n: u64, delta: u64) -> Result<Rational, BoundsError> {
    let dn = (delta * n) as i64;
    if dn < 2 {
        return Err(BoundsError::Domain(format!("δn = {dn} must be at least 2")));
    }
    Ok(rat(dn * dn * (dn - 1), 2 * dn - 3))
}

fn validate_lambdas(lambdas: &[f64], len: usize) -> Result<(), BoundsError> {
    if lambdas.len() != len {
        return Err(BoundsError::Input("λ, b and c must have equal length".into()));
    }
    if lambdas.iter().any(|&l| l.is_nan() || l < 0.0) {
        return Err(BoundsError::Input("λ must be nonnegative".into()));
    }
    if lambdas.windows(2).any(|w| w[0] < w[1]) {
        return Err(BoundsError::Input("λ must be nonincreasing".into()));
    }
    Ok(())
}

fn validate_weights(xs: &[f64], name: &str) -> Result<(), BoundsError> {
    if xs.iter().any(|&x| x.is_nan() || x < 0.0) {
        return Err(BoundsError::Input(format!("{name} must be nonnegative")));
    }
    Ok(())
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `Σ b_iλ_i − (min_{i₀≤j≤n} B_j/C_j)·Σ c_iλ_i` where `B_j, C_j` are prefix
/// sums and `i₀` is the first index with `c_{i₀} ≠ 0`. Nonnegative up to
/// rounding.
pub fn chebyshev_check(lambdas: &[f64], bs: &[f64], cs: &[f64]) -> Result<f64, BoundsError> {
    if bs.len() != cs.len() {
        return Err(BoundsError::Input("b and c must have equal length".into()));
    }
    validate_lambdas(lambdas, bs.len())?;
    validate_weights(bs, "b")?;
    validate_weights(cs, "c")?;
    let i0 = cs
        .iter()
        .position(|&c| c != 0.0)
        .ok_or_else(|| BoundsError::Domain("all c_i are zero".into()))?;
    let (mut bsum, mut csum) = (0.0, 0.0);
    let mut ratio = f64::INFINITY;
    for j in 0..bs.len() {
        bsum += bs[j];
        csum += cs[j];
        if j >= i0 {
            ratio = ratio.min(bsum / csum);
        }
    }
    Ok(dot(bs, lambdas) - ratio * dot(cs, lambdas))
}

/// `(max_j C_j/B_j)·Σ b_iλ_i − Σ c_iλ_i`, requiring `b_1 ≠ 0`.
pub fn chebyshev_corollary_check(lambdas: &[f64], bs: &[f64], cs: &[f64]) -> Result<f64, BoundsError> {
    if bs.len() != cs.len() {
        return Err(BoundsError::Input("b and c must have equal length".into()));
    }
    validate_lambdas(lambdas, bs.len())?;
    validate_weights(bs, "b")?;
    validate_weights(cs, "c")?;
    if bs.first().is_none_or(|b| b.is_zero()) {
        return Err(BoundsError::Domain("b_1 must be nonzero".into()));
    }
    let (mut bsum, mut csum) = (0.0, 0.0);
    let mut ratio = f64::NEG_INFINITY;
    for j in 0..bs.len() {
        bsum += bs[j];
        csum += cs[j];
        ratio = ratio.max(csum / bsum);
    }
    Ok(ratio * dot(bs, lambdas) - dot(cs, lambdas))
}
