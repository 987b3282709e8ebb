use dioph_core::arith::factorize;
use dioph_core::numfield::{
    int, log_norm_abs, places_above, places_for, product_formula_defect, valuation, LocalLog, PlaceKind,
};
use dioph_core::{Field, FieldElement, Rational, RationalPlace};
use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn fields() -> Vec<Field> {
    vec![
        Field::Rational,
        Field::quadratic(-1).unwrap(),
        Field::quadratic(2).unwrap(),
        Field::quadratic(5).unwrap(),
    ]
}

fn small_rat(rng: &mut ChaCha8Rng) -> Rational {
    Rational::new(
        BigInt::from(rng.gen_range(-5000i64..=5000)),
        BigInt::from(rng.gen_range(1i64..=400)),
    )
}

fn random_nonzero(rng: &mut ChaCha8Rng, field: Field) -> FieldElement {
    loop {
        let a = small_rat(rng);
        let b = if field == Field::Rational {
            Rational::zero()
        } else {
            small_rat(rng)
        };
        let x = FieldElement::new(field, a, b);
        if !x.is_zero() {
            return x;
        }
    }
}

fn element(field: Field, a: i64, b: i64, den: i64) -> FieldElement {
    let b = if field == Field::Rational { 0 } else { b };
    FieldElement::new(
        field,
        Rational::new(a.into(), den.into()),
        Rational::new(b.into(), den.into()),
    )
}

/// `v_p` of a nonzero rational by repeated division.
fn vp_oracle(x: &Rational, p: u64) -> i64 {
    let count = |n: &BigInt| {
        let (mut n, mut k) = (n.abs(), 0);
        let p = BigInt::from(p);
        while (&n % &p).is_zero() {
            n /= &p;
            k += 1;
        }
        k
    };
    count(x.numer()) - count(x.denom())
}

#[test]
fn product_formula_on_seeded_elements() {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    for field in fields() {
        for _ in 0..1000 {
            let x = random_nonzero(&mut rng, field);
            let defect = product_formula_defect(&x).unwrap();
            assert!(defect.abs() < 1e-9, "{x} over {field}: defect {defect}");
            // Second route: add the local logs as floats.
            let direct: f64 = places_for(&x)
                .unwrap()
                .iter()
                .map(|v| log_norm_abs(&x, v).unwrap().value())
                .sum();
            assert!(direct.abs() < 1e-9, "{x} over {field}: direct sum {direct}");
        }
    }
}

#[test]
fn valuations_match_the_norm() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for field in fields() {
        for _ in 0..200 {
            let x = random_nonzero(&mut rng, field);
            let norm = x.norm();
            for (p, _) in factorize(norm.numer().magnitude())
                .unwrap()
                .into_iter()
                .chain(factorize(norm.denom().magnitude()).unwrap())
            {
                let total: i64 = places_above(field, RationalPlace::Prime(p))
                    .unwrap()
                    .iter()
                    .map(|w| {
                        let f = match w.kind {
                            PlaceKind::Finite { f, .. } => f as i64,
                            _ => unreachable!(),
                        };
                        f * valuation(&x, w).unwrap()
                    })
                    .sum();
                assert_eq!(total, vp_oracle(&norm, p), "{x} over {field} at {p}");
            }
        }
    }
}

#[test]
fn rational_valuations_by_division() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..500 {
        let x = random_nonzero(&mut rng, Field::Rational);
        for p in [2u64, 3, 5, 7, 11, 13] {
            let w = places_above(Field::Rational, RationalPlace::Prime(p)).unwrap()[0];
            assert_eq!(valuation(&x, &w).unwrap(), vp_oracle(x.a(), p));
        }
    }
}

#[test]
fn inverse_over_q() {
    let x = FieldElement::rational(Rational::new((-3).into(), 7.into()));
    assert_eq!(
        x.inverse().unwrap(),
        FieldElement::rational(Rational::new((-7).into(), 3.into()))
    );
    assert!(FieldElement::zero().inverse().is_none());
}

#[test]
fn split_ramified_inert() {
    let q5 = Field::quadratic(5).unwrap();
    assert_eq!(places_above(q5, RationalPlace::Prime(11)).unwrap().len(), 2);
    assert_eq!(
        places_above(q5, RationalPlace::Prime(2)).unwrap()[0].local_degree,
        2
    );
    let ram = places_above(q5, RationalPlace::Prime(5)).unwrap();
    assert!(matches!(ram[0].kind, PlaceKind::Finite { e: 2, f: 1, .. }));
    let gi = Field::quadratic(-1).unwrap();
    assert_eq!(places_above(gi, RationalPlace::Infinity).unwrap().len(), 1);
    // 5 = (2 + i)(2 − i): the two factors sit at different places.
    let x = element(gi, 2, 1, 1);
    let vals: Vec<i64> = places_above(gi, RationalPlace::Prime(5))
        .unwrap()
        .iter()
        .map(|w| valuation(&x, w).unwrap())
        .collect();
    let mut sorted = vals.clone();
    sorted.sort();
    assert_eq!(sorted, vec![0, 1]);
}

proptest! {
    #[test]
    fn multiplicativity(fi in 0usize..4, a in -300i64..300, b in -300i64..300, c in -300i64..300, d in -300i64..300, den in 1i64..60) {
        let field = fields()[fi];
        let x = element(field, a, b, den);
        let y = element(field, c, d, 1);
        prop_assume!(!x.is_zero() && !y.is_zero());
        let xy = &x * &y;
        let primes: Vec<u64> = vec![2, 3, 5, 7, 13];
        let mut vs = vec![RationalPlace::Infinity];
        vs.extend(primes.into_iter().map(RationalPlace::Prime));
        for v in vs {
            for w in places_above(field, v).unwrap() {
                let lx = log_norm_abs(&x, &w).unwrap();
                let ly = log_norm_abs(&y, &w).unwrap();
                let lxy = log_norm_abs(&xy, &w).unwrap();
                match (&lxy, lx.plus(&ly)) {
                    (LocalLog::Finite { .. }, sum) => prop_assert_eq!(lxy.clone(), sum),
                    (LocalLog::Arch(z), LocalLog::Arch(s)) => {
                        let (nz, ns) = (z.exp(), s.exp());
                        prop_assert!((nz - ns).abs() <= 1e-12 * nz.max(ns), "{} vs {}", nz, ns);
                    }
                    _ => prop_assert!(false, "place kinds differ"),
                }
            }
        }
    }

    #[test]
    fn galois_permutes_places(fi in 1usize..4, a in -300i64..300, b in -300i64..300, den in 1i64..60) {
        let field = fields()[fi];
        let x = element(field, a, b, den);
        prop_assume!(!x.is_zero());
        let xc = x.conj();
        let mut vs = vec![RationalPlace::Infinity];
        vs.extend([2u64, 3, 5, 11, 19].into_iter().map(RationalPlace::Prime));
        for v in vs {
            let ws = places_above(field, v).unwrap();
            let mut orig: Vec<f64> = ws.iter().map(|w| log_norm_abs(&x, w).unwrap().value()).collect();
            let mut conj: Vec<f64> = ws.iter().map(|w| log_norm_abs(&xc, w).unwrap().value()).collect();
            orig.sort_by(f64::total_cmp);
            conj.sort_by(f64::total_cmp);
            for (o, c) in orig.iter().zip(&conj) {
                prop_assert!((o - c).abs() < 1e-12);
            }
            for w in &ws {
                let lhs = log_norm_abs(&xc, w).unwrap().value();
                let rhs = log_norm_abs(&x, &w.conjugate()).unwrap().value();
                prop_assert!((lhs - rhs).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn integers_have_no_negative_valuation(n in 1i64..100_000, fi in 0usize..4) {
        let field = fields()[fi];
        let x = FieldElement::rational(int(n)).in_field(field);
        for w in places_above(field, RationalPlace::Prime(3)).unwrap() {
            prop_assert!(valuation(&x, &w).unwrap() >= 0);
        }
    }
}
