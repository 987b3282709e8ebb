use dioph_core::numfield::{int, rat};
use dioph_core::position::{
    codim_intersection, distributive_constant_of, max_alpha_ratio_of, position_report_of, subgeneral_subsets,
    Codim,
};
use dioph_core::projective::{Hypersurface, WeightedDivisor};
use dioph_core::{FieldElement, Rational};
use num_bigint::BigInt;
use num_traits::{One, Zero};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Rank of an integer matrix by fraction-free elimination.
fn rank(rows: &[Vec<i64>]) -> usize {
    let mut a: Vec<Vec<BigInt>> = rows
        .iter()
        .map(|r| r.iter().map(|&x| BigInt::from(x)).collect())
        .collect();
    let cols = a.first().map_or(0, Vec::len);
    let mut r = 0;
    for c in 0..cols {
        let Some(p) = (r..a.len()).find(|&i| !a[i][c].is_zero()) else {
            continue;
        };
        a.swap(r, p);
        for i in r + 1..a.len() {
            let (top, lead) = (a[r][c].clone(), a[i][c].clone());
            for j in 0..cols {
                a[i][j] = &a[i][j] * &top - &a[r][j] * &lead;
            }
        }
        r += 1;
    }
    r
}

fn hyperplanes(rows: &[Vec<i64>]) -> Vec<Hypersurface> {
    rows.iter()
        .map(|r| {
            Hypersurface::hyperplane(&r.iter().map(|&x| FieldElement::from_int(x)).collect::<Vec<_>>())
                .unwrap()
        })
        .collect()
}

fn pick(rows: &[Vec<i64>], mask: u32) -> Vec<Vec<i64>> {
    (0..rows.len())
        .filter(|i| mask & (1 << i) != 0)
        .map(|i| rows[i].clone())
        .collect()
}

fn random_family(rng: &mut ChaCha8Rng, n: usize, q: usize) -> Vec<Vec<i64>> {
    (0..q)
        .map(|_| loop {
            let r: Vec<i64> = (0..=n)
                .map(|_| {
                    if rng.gen_bool(0.4) {
                        0
                    } else {
                        rng.gen_range(-2..=2)
                    }
                })
                .collect();
            if r.iter().any(|&x| x != 0) {
                break r;
            }
        })
        .collect()
}

/// `max(1, max_J #J / codim ∩J)` over every nonempty subset with a nonempty
/// intersection.
fn distributive_oracle(rows: &[Vec<i64>], n: usize) -> Rational {
    let mut best = Rational::one();
    for mask in 1u32..(1 << rows.len()) {
        let r = rank(&pick(rows, mask));
        if r <= n {
            let v = rat(mask.count_ones() as i64, r as i64);
            if v > best {
                best = v;
            }
        }
    }
    best
}

/// `dim ∩J ≤ m − #J` for every `J` with `#J ≤ m + 1`, where `dim ∅ = −1`.
fn subgeneral_oracle(rows: &[Vec<i64>], n: usize, m: usize) -> bool {
    (1u32..(1 << rows.len())).all(|mask| {
        let size = mask.count_ones() as i64;
        size > m as i64 + 1 || n as i64 - rank(&pick(rows, mask)) as i64 <= m as i64 - size
    })
}

#[test]
fn distributive_constant_matches_exhaustive_search() {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    for _ in 0..200 {
        let n = rng.gen_range(1..=4);
        let q = rng.gen_range(1..=8);
        let rows = random_family(&mut rng, n, q);
        let got = distributive_constant_of(&hyperplanes(&rows), n).unwrap();
        assert_eq!(got, distributive_oracle(&rows, n), "{rows:?} in P^{n}");
    }
}

#[test]
fn position_report_matches_definitions() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..150 {
        let n = rng.gen_range(1..=3);
        let q = rng.gen_range(1..=7);
        let rows = random_family(&mut rng, n, q);
        let r = position_report_of(&hyperplanes(&rows), n).unwrap();
        let min_m = (n..).find(|&m| subgeneral_oracle(&rows, n, m)).unwrap();
        assert_eq!(r.min_m, min_m, "{rows:?}");
        let expected_codim = |mask: u32| (mask.count_ones() as usize).min(n + 1);
        let general = (1u32..(1 << q))
            .filter(|m| m.count_ones() as usize <= n + 1)
            .all(|m| rank(&pick(&rows, m)) == expected_codim(m));
        assert_eq!(r.general, general, "{rows:?}");
        let kappa = (1..=n)
            .rev()
            .find(|&k| {
                (1u32..(1 << q))
                    .filter(|m| m.count_ones() as usize <= k)
                    .all(|m| rank(&pick(&rows, m)) == m.count_ones() as usize)
            })
            .unwrap_or(0);
        // κ ≥ 1 by convention; a repeated hyperplane already fails at size 2.
        assert_eq!(r.kappa, kappa.max(1), "{rows:?}");
        if let Some(w) = &r.general_witness {
            let mask = w.iter().fold(0u32, |m, &i| m | (1 << i));
            assert!(rank(&pick(&rows, mask)) < w.len());
        }
    }
}

#[test]
fn codim_matches_rank() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..300 {
        let n = rng.gen_range(1..=4);
        let q = rng.gen_range(1..=6);
        let rows = random_family(&mut rng, n, q);
        let r = rank(&rows);
        let expected = if r == n + 1 {
            Codim::Empty
        } else {
            Codim::Finite(r)
        };
        assert_eq!(codim_intersection(&hyperplanes(&rows), n).unwrap(), expected);
    }
}

#[test]
fn subgeneral_subsets_match_definition() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..60 {
        let n = rng.gen_range(1..=3);
        let q = rng.gen_range(1..=7);
        let m = rng.gen_range(n..=n + 2);
        let rows = random_family(&mut rng, n, q);
        let got = subgeneral_subsets(&hyperplanes(&rows), n, m).unwrap();
        let mut expected: Vec<Vec<usize>> = (1u32..(1 << q))
            .filter(|&mask| subgeneral_oracle(&pick(&rows, mask), n, m))
            .map(|mask| (0..q).filter(|i| mask & (1 << i) != 0).collect())
            .collect();
        expected.sort_by(|a, b| (a.len(), a).cmp(&(b.len(), b)));
        assert_eq!(got, expected, "{rows:?} in P^{n}, m = {m}");
    }
}

/// `q` hyperplanes through `[0 : … : 0 : 1]`, otherwise generic.
fn concurrent(n: usize, q: usize) -> Vec<Vec<i64>> {
    (0..q)
        .map(|i| {
            let t = i as i64 + 1;
            let mut r: Vec<i64> = (0..n as u32).map(|e| t.pow(e)).collect();
            r.push(0);
            r
        })
        .collect()
}

#[test]
fn concurrent_lines() {
    for q in 2..=10 {
        let rows = concurrent(2, q);
        assert_eq!(
            distributive_constant_of(&hyperplanes(&rows), 2).unwrap(),
            rat(q as i64, 2).max(int(1))
        );
    }
    for n in 2..=4 {
        for q in n..=8 {
            let rows = concurrent(n, q);
            let got = distributive_constant_of(&hyperplanes(&rows), n).unwrap();
            assert_eq!(got, rat(q as i64, n as i64), "n = {n}, q = {q}");
            assert_eq!(got, distributive_oracle(&rows, n));
        }
    }
}

#[test]
fn weighted_ratio() {
    let rows = concurrent(2, 3);
    let hs = hyperplanes(&rows);
    let ds: Vec<WeightedDivisor> = hs
        .into_iter()
        .zip([int(1), int(2), rat(1, 2)])
        .map(|(h, w)| WeightedDivisor::new(h, w, None).unwrap())
        .collect();
    let r = max_alpha_ratio_of(&ds, 2).unwrap();
    // The common point carries 7/2 over codimension 2; the weight-2 line beats it.
    assert_eq!(r.value, int(2));
    assert_eq!(r.witness_codim, 1);
    assert_eq!(r.witness_subset, vec![1]);
    let unit: Vec<WeightedDivisor> = ds
        .iter()
        .map(|d| WeightedDivisor::new(d.hypersurface.clone(), int(1), None).unwrap())
        .collect();
    let r = max_alpha_ratio_of(&unit, 2).unwrap();
    assert_eq!(r.value, rat(3, 2));
    assert_eq!(r.witness_subset, vec![0, 1]);
}

#[test]
fn nonlinear_members_are_rejected() {
    let hs = vec![
        Hypersurface::parse("x0", dioph_core::Field::Rational, 2).unwrap(),
        Hypersurface::parse("x0*x1 - x2^2", dioph_core::Field::Rational, 2).unwrap(),
    ];
    assert!(distributive_constant_of(&hs, 2).is_err());
    assert!(position_report_of(&hs, 2).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn constant_is_at_least_one_and_at_most_q(seed in 0u64..10_000, n in 1usize..4, q in 1usize..8) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rows = random_family(&mut rng, n, q);
        let c = distributive_constant_of(&hyperplanes(&rows), n).unwrap();
        prop_assert!(c >= int(1));
        prop_assert!(c <= int(q as i64));
    }

    #[test]
    fn general_families_have_min_m_n(seed in 0u64..10_000, n in 1usize..4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rows = random_family(&mut rng, n, n + 2);
        let r = position_report_of(&hyperplanes(&rows), n).unwrap();
        if r.general {
            prop_assert_eq!(r.min_m, n);
            prop_assert_eq!(r.kappa, n);
        }
    }
}
