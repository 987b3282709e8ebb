//! Position predicates and the distributive constant for hyperplane families.
//!
//! Exact mode works with hyperplanes only: the common zero locus of a subset
//! is a linear subspace whose codimension is the rank of the coefficient
//! matrix. Every quantity here is a maximum over such subspaces, so the work
//! is organised around the intersection lattice (the set of distinct
//! nonempty intersections, called flats) rather than around all `2^q`
//! subsets.

use std::collections::HashSet;

use num_traits::One;

use crate::error::PositionError;
use crate::numfield::{FieldElement, Rational, RationalPlace};
use crate::projective::{DivisorFamily, Hypersurface, WeightedDivisor};

pub mod heuristic;

pub const MAX_FAMILY: usize = 24;
/// Cap for [`subgeneral_subsets`], which walks every subset.
pub const MAX_SUBSET_FAMILY: usize = 16;

/// Codimension in `P^n` of a common zero locus; `Empty` stands for the empty
/// set, whose codimension is treated as infinite.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Codim {
    Finite(usize),
    Empty,
}

impl Codim {
    /// `dim = n − codim`, or `None` for the empty set (`dim = −∞`).
    pub fn dim(self, n: usize) -> Option<usize> {
        match self {
            Codim::Finite(c) => Some(n - c),
            Codim::Empty => None,
        }
    }
}

type Row = Vec<FieldElement>;

/// Reduced row echelon form with unit pivots; canonical for the row space.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Rref {
    rows: Vec<Row>,
    pivots: Vec<usize>,
}

impl Rref {
    pub fn empty() -> Self {
        Rref {
            rows: Vec::new(),
            pivots: Vec::new(),
        }
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    /// `v` reduced against the basis; zero iff `v` is in the row space.
    fn reduce(&self, v: &Row) -> Row {
        let mut v = v.clone();
        for (row, &c) in self.rows.iter().zip(&self.pivots) {
            if !v[c].is_zero() {
                let f = v[c].clone();
                for (x, r) in v.iter_mut().zip(row) {
                    *x = &*x - &(&f * r);
                }
            }
        }
        v
    }

    pub fn contains(&self, v: &Row) -> bool {
        self.reduce(v).iter().all(FieldElement::is_zero)
    }

    /// Row space of `self` plus `v`, in canonical form.
    pub fn extended(&self, v: &Row) -> Rref {
        let r = self.reduce(v);
        let Some(c) = r.iter().position(|x| !x.is_zero()) else {
            return self.clone();
        };
        let inv = r[c].inverse().expect("nonzero pivot");
        let r: Row = r.iter().map(|x| x * &inv).collect();
        let mut rows: Vec<Row> = self
            .rows
            .iter()
            .map(|row| {
                if row[c].is_zero() {
                    row.clone()
                } else {
                    let f = row[c].clone();
                    row.iter().zip(&r).map(|(x, y)| x - &(&f * y)).collect()
                }
            })
            .collect();
        let mut pivots = self.pivots.clone();
        let at = pivots.partition_point(|&p| p < c);
        pivots.insert(at, c);
        rows.insert(at, r);
        Rref { rows, pivots }
    }

    pub fn from_rows<'a>(rows: impl IntoIterator<Item = &'a Row>) -> Rref {
        rows.into_iter().fold(Rref::empty(), |acc, r| acc.extended(r))
    }
}

fn linear_rows(hs: &[Hypersurface]) -> Result<Vec<Row>, PositionError> {
    hs.iter()
        .enumerate()
        .map(|(i, h)| {
            if h.is_hyperplane() {
                Ok(h.linear_coeffs())
            } else {
                Err(PositionError::Nonlinear {
                    index: i,
                    degree: h.degree(),
                })
            }
        })
        .collect()
}

fn check_ambient(hs: &[Hypersurface], n: usize) -> Result<(), PositionError> {
    if let Some(h) = hs.iter().find(|h| h.ambient_dim() != n) {
        return Err(PositionError::Invalid(format!(
            "{h} lives in P^{}, expected P^{n}",
            h.ambient_dim()
        )));
    }
    Ok(())
}

/// Codimension of `∩ Supp D_j` in `P^n` for a set of hyperplanes.
pub fn codim_intersection(subset: &[Hypersurface], n: usize) -> Result<Codim, PositionError> {
    check_ambient(subset, n)?;
    let rows = linear_rows(subset)?;
    let rank = Rref::from_rows(&rows).rank();
    Ok(if rank == n + 1 {
        Codim::Empty
    } else {
        Codim::Finite(rank)
    })
}

/// A nonempty proper intersection of members of the family.
#[derive(Clone, Debug)]
pub struct Flat {
    pub codim: usize,
    /// Every `i` with `W ⊆ Supp D_i`, ascending.
    pub containing: Vec<usize>,
    /// Lexicographically smallest subset of minimal size cutting out `W`.
    pub witness: Vec<usize>,
}

/// All distinct nonempty intersections of subsets of the hyperplanes, by
/// increasing codimension.
pub fn intersection_lattice(hs: &[Hypersurface], n: usize) -> Result<Vec<Flat>, PositionError> {
    check_ambient(hs, n)?;
    if hs.len() > MAX_FAMILY {
        return Err(PositionError::TooMany {
            count: hs.len(),
            cap: MAX_FAMILY,
        });
    }
    let rows = linear_rows(hs)?;
    let mut out = Vec::new();
    let mut seen: HashSet<Rref> = HashSet::new();
    let mut level: Vec<Rref> = vec![Rref::empty()];
    for _codim in 1..=n {
        let mut next: Vec<Rref> = Vec::new();
        for base in &level {
            for row in &rows {
                if base.contains(row) {
                    continue;
                }
                let ext = base.extended(row);
                if seen.insert(ext.clone()) {
                    next.push(ext);
                }
            }
        }
        for f in &next {
            out.push(describe_flat(f, &rows));
        }
        level = next;
    }
    Ok(out)
}

fn describe_flat(f: &Rref, rows: &[Row]) -> Flat {
    let containing: Vec<usize> = (0..rows.len()).filter(|&i| f.contains(&rows[i])).collect();
    // Greedy by index order yields the lexicographically smallest basis.
    let mut witness = Vec::new();
    let mut acc = Rref::empty();
    for &i in &containing {
        let ext = acc.extended(&rows[i]);
        if ext.rank() > acc.rank() {
            witness.push(i);
            acc = ext;
        }
        if acc.rank() == f.rank() {
            break;
        }
    }
    Flat {
        codim: f.rank(),
        containing,
        witness,
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PositionReport {
    pub general: bool,
    /// Smallest `m ≥ n` for which the family is in `m`-subgeneral position.
    pub min_m: usize,
    /// Largest `κ ≤ n` such that any `≤ κ` members meet in the expected
    /// codimension.
    pub kappa: usize,
    /// A subset of at most `n + 1` members with `codim < #I`, if any.
    pub general_witness: Option<Vec<usize>>,
    /// A subset attaining `dim ∩ + #I = min_m` when `min_m > n`.
    pub min_m_witness: Option<Vec<usize>>,
    /// A subset of size `κ + 1` whose codimension is too small, if `κ < n`.
    pub kappa_witness: Option<Vec<usize>>,
}

/// Position data for a list of hyperplanes in `P^n`.
pub fn position_report_of(hs: &[Hypersurface], n: usize) -> Result<PositionReport, PositionError> {
    if hs.is_empty() {
        return Err(PositionError::Invalid("empty family".into()));
    }
    let flats = intersection_lattice(hs, n)?;
    let mut min_m = n;
    let mut min_m_witness = None;
    let mut general_witness = None;
    let mut smallest_dependent: Option<(usize, Vec<usize>)> = None;
    for f in &flats {
        let dim = n - f.codim;
        if dim + f.containing.len() > min_m {
            min_m = dim + f.containing.len();
            min_m_witness = Some(f.containing.clone());
        }
        if f.containing.len() > f.codim {
            let dep: Vec<usize> = f.containing[..f.codim + 1].to_vec();
            if general_witness.is_none() {
                general_witness = Some(dep.clone());
            }
            let size = f.codim + 1;
            if smallest_dependent.as_ref().is_none_or(|(s, _)| size < *s) {
                smallest_dependent = Some((size, dep));
            }
        }
    }
    let (kappa, kappa_witness) = match smallest_dependent {
        Some((size, w)) if size <= n => (size - 1, Some(w)),
        _ => (n, None),
    };
    Ok(PositionReport {
        general: general_witness.is_none(),
        min_m,
        kappa,
        general_witness,
        min_m_witness,
        kappa_witness,
    })
}

pub fn position_report(family: &DivisorFamily, v: RationalPlace) -> Result<PositionReport, PositionError> {
    position_report_of(&family.hypersurfaces_at(v), family.n)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RatioResult {
    pub value: Rational,
    pub witness_subset: Vec<usize>,
    pub witness_codim: usize,
}

/// `max_W α(W)/codim W` over nonempty proper intersections `W`, where
/// `α(W) = Σ_{i : W ⊆ Supp D_i} c_i`. Ties go to the smaller witness, then
/// the lexicographically smaller one.
pub fn max_alpha_ratio_of(divisors: &[WeightedDivisor], n: usize) -> Result<RatioResult, PositionError> {
    if divisors.is_empty() {
        return Err(PositionError::Invalid("empty family".into()));
    }
    let hs: Vec<Hypersurface> = divisors.iter().map(|d| d.hypersurface.clone()).collect();
    let weights: Vec<Rational> = divisors.iter().map(|d| d.weight.clone()).collect();
    let total: Rational = weights.iter().sum();
    let flats = intersection_lattice(&hs, n)?;
    let mut best: Option<RatioResult> = None;
    for f in &flats {
        if let Some(b) = &best {
            // α(W) ≤ total weight, so deeper flats cannot beat the bound.
            if &total / Rational::from_integer(f.codim.into()) < b.value {
                continue;
            }
        }
        let alpha: Rational = f.containing.iter().map(|&i| weights[i].clone()).sum();
        let value = alpha / Rational::from_integer(f.codim.into());
        let better = match &best {
            None => true,
            Some(b) => {
                value > b.value
                    || (value == b.value
                        && (f.witness.len(), &f.witness) < (b.witness_subset.len(), &b.witness_subset))
            }
        };
        if better {
            best = Some(RatioResult {
                value,
                witness_subset: f.witness.clone(),
                witness_codim: f.codim,
            });
        }
    }
    Ok(best.expect("singletons are always nonempty flats"))
}

pub fn max_alpha_ratio(family: &DivisorFamily, v: RationalPlace) -> Result<RatioResult, PositionError> {
    max_alpha_ratio_of(family.at(v), family.n)
}

/// `max(1, max_W #{i : W ⊆ Supp D_i}/codim W)`.
pub fn distributive_constant_of(hs: &[Hypersurface], n: usize) -> Result<Rational, PositionError> {
    let unit: Vec<WeightedDivisor> = hs.iter().cloned().map(WeightedDivisor::unit).collect();
    let r = max_alpha_ratio_of(&unit, n)?;
    Ok(if r.value > Rational::one() {
        r.value
    } else {
        Rational::one()
    })
}

pub fn distributive_constant(family: &DivisorFamily, v: RationalPlace) -> Result<Rational, PositionError> {
    distributive_constant_of(&family.hypersurfaces_at(v), family.n)
}

/// Subsets `I` (as index lists) whose members are in `m`-subgeneral
/// position, enumerated in size-then-lexicographic order.
pub fn subgeneral_subsets(hs: &[Hypersurface], n: usize, m: usize) -> Result<Vec<Vec<usize>>, PositionError> {
    check_ambient(hs, n)?;
    if hs.len() > MAX_SUBSET_FAMILY {
        return Err(PositionError::TooMany {
            count: hs.len(),
            cap: MAX_SUBSET_FAMILY,
        });
    }
    let rows = linear_rows(hs)?;
    let q = hs.len();
    // Row spaces memoised by bitmask, each built from its parent.
    let mut rref_of: Vec<Option<Rref>> = vec![None; 1 << q];
    rref_of[0] = Some(Rref::empty());
    let mut ok_mask: Vec<bool> = vec![true; 1 << q];
    let mut order: Vec<u32> = (1..(1u32 << q)).collect();
    order.sort_by_key(|m| m.count_ones());
    for &mask in &order {
        let top = 31 - mask.leading_zeros();
        let parent = mask & !(1 << top);
        let r = rref_of[parent as usize]
            .as_ref()
            .expect("parent visited first")
            .extended(&rows[top as usize]);
        let size = mask.count_ones() as usize;
        let rank = r.rank();
        // only subsets J with #J ≤ m + 1 are constrained
        let mut ok = size > m + 1 || rank == n + 1 || (n - rank) + size <= m;
        if ok {
            let mut bits = mask;
            while bits != 0 {
                let b = bits.trailing_zeros();
                bits &= bits - 1;
                if !ok_mask[(mask & !(1 << b)) as usize] {
                    ok = false;
                    break;
                }
            }
        }
        ok_mask[mask as usize] = ok;
        rref_of[mask as usize] = Some(r);
    }
    let mut out: Vec<Vec<usize>> = order
        .iter()
        .filter(|&&m| ok_mask[m as usize])
        .map(|&m| (0..q).filter(|&i| m & (1 << i) != 0).collect())
        .collect();
    out.sort_by(|a: &Vec<usize>, b: &Vec<usize>| (a.len(), a).cmp(&(b.len(), b)));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numfield::{int, rat, Field};

    fn hs(srcs: &[&str], n: usize) -> Vec<Hypersurface> {
        srcs.iter()
            .map(|s| Hypersurface::parse(s, Field::Rational, n).unwrap())
            .collect()
    }

    #[test]
    fn codim_examples() {
        assert_eq!(
            codim_intersection(&hs(&["x0", "x1"], 2), 2).unwrap(),
            Codim::Finite(2)
        );
        assert_eq!(
            codim_intersection(&hs(&["x0", "2*x0"], 2), 2).unwrap(),
            Codim::Finite(1)
        );
        assert_eq!(
            codim_intersection(&hs(&["x0", "x1", "x2"], 2), 2).unwrap(),
            Codim::Empty
        );
        let err = codim_intersection(&hs(&["x0", "x1^2"], 2), 2).unwrap_err();
        assert!(matches!(err, PositionError::Nonlinear { index: 1, degree: 2 }));
    }

    #[test]
    fn rank_is_bounded_by_dimension() {
        let rows: Vec<Row> = [
            [9, -1, -4, 6, 0],
            [8, 9, 2, -6, 0],
            [-1, -8, -3, 4, 0],
            [5, -5, 5, 4, 0],
            [-6, -2, 0, 9, -1],
            [9, -6, -8, 9, -4],
        ]
        .iter()
        .map(|r| r.iter().map(|&x| FieldElement::from_int(x)).collect())
        .collect();
        let r = Rref::from_rows(&rows);
        assert_eq!(r.rank(), 5);
        for (row, &c) in r.rows.iter().zip(&r.pivots) {
            assert!(row[c] == FieldElement::one());
        }
    }

    #[test]
    fn report_examples() {
        let generic = hs(&["x0", "x1", "x2", "x0 + x1 + x2"], 2);
        let r = position_report_of(&generic, 2).unwrap();
        assert!(r.general);
        assert_eq!((r.min_m, r.kappa), (2, 2));

        let concurrent = hs(&["x0", "x1", "x0 - x1"], 2);
        let r = position_report_of(&concurrent, 2).unwrap();
        assert!(!r.general);
        assert_eq!((r.min_m, r.kappa), (3, 2));
        assert_eq!(r.min_m_witness, Some(vec![0, 1, 2]));
        assert_eq!(r.general_witness, Some(vec![0, 1, 2]));

        let sharp = hs(&["x0", "x1", "x0 - x2", "x1 - x2"], 2);
        assert!(position_report_of(&sharp, 2).unwrap().general);

        let doubled = hs(&["x0", "2*x0", "x1"], 2);
        let r = position_report_of(&doubled, 2).unwrap();
        assert_eq!(r.kappa, 1);
        assert_eq!(r.kappa_witness, Some(vec![0, 1]));
    }

    #[test]
    fn ratio_examples() {
        let generic = hs(&["x0", "x1"], 3);
        let unit: Vec<_> = generic.into_iter().map(WeightedDivisor::unit).collect();
        assert_eq!(max_alpha_ratio_of(&unit, 3).unwrap().value, int(1));

        for m in 2..6 {
            // m distinct lines through [0:0:1]
            let lines: Vec<String> = (0..m).map(|k| format!("x0 + {k}*x1")).collect();
            let refs: Vec<&str> = lines.iter().map(String::as_str).collect();
            let fam = hs(&refs, 2);
            let unit: Vec<_> = fam.iter().cloned().map(WeightedDivisor::unit).collect();
            let r = max_alpha_ratio_of(&unit, 2).unwrap();
            assert_eq!(r.value, rat(m as i64, 2));
            if m == 2 {
                // ties with a single line; the smaller witness wins
                assert_eq!((r.witness_codim, r.witness_subset), (1, vec![0]));
            } else {
                assert_eq!((r.witness_codim, r.witness_subset), (2, vec![0, 1]));
            }
            assert_eq!(
                distributive_constant_of(&fam, 2).unwrap(),
                if m == 2 { int(1) } else { rat(m as i64, 2) }
            );
        }

        let shared = hs(&["x0", "3*x0"], 2);
        let weighted = vec![
            WeightedDivisor::new(shared[0].clone(), int(2), None).unwrap(),
            WeightedDivisor::new(shared[1].clone(), int(3), None).unwrap(),
        ];
        let r = max_alpha_ratio_of(&weighted, 2).unwrap();
        assert_eq!((r.value, r.witness_subset, r.witness_codim), (int(5), vec![0], 1));
    }

    #[test]
    fn distributive_examples() {
        assert_eq!(
            distributive_constant_of(&hs(&["x0", "x1", "x2"], 2), 2).unwrap(),
            int(1)
        );
        assert_eq!(
            distributive_constant_of(&hs(&["x0", "x1", "x0 - x1"], 2), 2).unwrap(),
            rat(3, 2)
        );
    }

    #[test]
    fn subgeneral_subset_enumeration() {
        let concurrent = hs(&["x0", "x1", "x0 - x1", "x2"], 2);
        let general = subgeneral_subsets(&concurrent, 2, 2).unwrap();
        // the three concurrent lines together are not in general position
        assert!(!general.contains(&vec![0, 1, 2]));
        assert!(general.contains(&vec![0, 1, 3]));
        let loose = subgeneral_subsets(&concurrent, 2, 3).unwrap();
        assert!(loose.contains(&vec![0, 1, 2]));
        assert_eq!(loose.len(), 15);
    }
}
