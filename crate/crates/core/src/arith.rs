//! Integer helpers: primality, factorization, p-adic valuations, square
//! roots modulo prime powers, and logarithms of big numbers.

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::NumFieldError;

const SMALL_PRIMES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];

fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1 % m;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

/// Deterministic Miller-Rabin for 64-bit integers.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for &p in &SMALL_PRIMES {
        if n.is_multiple_of(p) {
            return n == p;
        }
    }
    let s = (n - 1).trailing_zeros();
    let d = (n - 1) >> s;
    'witness: for &a in &SMALL_PRIMES {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

// Brent's variant of Pollard rho; `n` must be odd and composite.
fn pollard_brent(n: u64) -> u64 {
    let mut c = 1u64;
    loop {
        let f = |x: u64| (mul_mod(x, x, n) + c) % n;
        let (mut x, mut y, mut g) = (2u64, 2u64, 1u64);
        let mut q = 1u64;
        let mut r = 1usize;
        let mut ys = 2u64;
        const BLOCK: usize = 64;
        while g == 1 {
            x = y;
            for _ in 0..r {
                y = f(y);
            }
            let mut k = 0;
            while k < r && g == 1 {
                ys = y;
                for _ in 0..BLOCK.min(r - k) {
                    y = f(y);
                    q = mul_mod(q, x.abs_diff(y), n);
                }
                g = q.gcd(&n);
                k += BLOCK;
            }
            r *= 2;
        }
        if g == n {
            loop {
                ys = f(ys);
                g = x.abs_diff(ys).gcd(&n);
                if g > 1 {
                    break;
                }
            }
        }
        if g != n {
            return g;
        }
        c += 1;
    }
}

fn factor_u64_into(n: u64, out: &mut Vec<u64>) {
    if n == 1 {
        return;
    }
    if is_prime(n) {
        out.push(n);
        return;
    }
    let d = pollard_brent(n);
    factor_u64_into(d, out);
    factor_u64_into(n / d, out);
}

/// Factor a positive integer into `(prime, exponent)` pairs sorted by prime.
///
/// Trial division strips primes below 1000; whatever remains must fit in 64
/// bits, otherwise the factorization is reported as unsupported.
pub fn factorize(n: &BigUint) -> Result<Vec<(u64, u32)>, NumFieldError> {
    if n.is_zero() {
        return Err(NumFieldError::Domain("cannot factor zero".into()));
    }
    let mut rest = n.clone();
    let mut found: Vec<u64> = Vec::new();
    let mut p = 2u64;
    let next = |p: u64| if p == 2 { 3 } else { p + 2 };
    while p < 1000 && rest.to_u64().is_none() {
        let bp = BigUint::from(p);
        while (&rest % &bp).is_zero() {
            rest /= &bp;
            found.push(p);
        }
        p = next(p);
    }
    let mut r = rest
        .to_u64()
        .ok_or_else(|| NumFieldError::Unsupported(format!("cofactor {rest} exceeds 64 bits")))?;
    while p < 1000 && p * p <= r {
        while r % p == 0 {
            r /= p;
            found.push(p);
        }
        p = next(p);
    }
    factor_u64_into(r, &mut found);
    found.sort_unstable();
    let mut out: Vec<(u64, u32)> = Vec::new();
    for q in found {
        match out.last_mut() {
            Some((last, e)) if *last == q => *e += 1,
            _ => out.push((q, 1)),
        }
    }
    Ok(out)
}

/// The distinct primes dividing the numerator or denominator of `x`.
pub fn support_primes(x: &BigRational) -> Result<Vec<u64>, NumFieldError> {
    let mut primes: Vec<u64> = factorize(x.numer().magnitude())?
        .into_iter()
        .chain(factorize(x.denom().magnitude())?)
        .map(|(p, _)| p)
        .collect();
    primes.sort_unstable();
    primes.dedup();
    Ok(primes)
}

/// `v_p(n)` for a nonzero integer.
pub fn vp_int(n: &BigInt, p: u64) -> i64 {
    debug_assert!(!n.is_zero());
    let bp = BigInt::from(p);
    let mut m = n.clone();
    let mut v = 0;
    loop {
        let (q, r) = m.div_rem(&bp);
        if !r.is_zero() {
            return v;
        }
        m = q;
        v += 1;
    }
}

/// `v_p(x)` for a nonzero rational.
pub fn vp_rat(x: &BigRational, p: u64) -> i64 {
    vp_int(x.numer(), p) - vp_int(x.denom(), p)
}

/// Natural log of |n| for a nonzero big integer, accurate to f64 precision
/// at any magnitude.
pub fn ln_int(n: &BigInt) -> f64 {
    let mag = n.magnitude();
    let bits = mag.bits();
    if bits <= 1000 {
        return mag.to_f64().expect("fits in f64").ln();
    }
    let shift = bits - 64;
    let top = (mag >> shift).to_f64().expect("64-bit mantissa");
    top.ln() + shift as f64 * std::f64::consts::LN_2
}

/// Natural log of |x| for a nonzero rational.
pub fn ln_rat(x: &BigRational) -> f64 {
    ln_int(x.numer()) - ln_int(x.denom())
}

/// `ln(e^a + e^b)` without overflow.
pub fn ln_add_exp(a: f64, b: f64) -> f64 {
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    if lo == f64::NEG_INFINITY {
        return hi;
    }
    hi + (lo - hi).exp().ln_1p()
}

/// Kronecker symbol `(a / p)` for a prime `p`.
pub fn kronecker_prime(a: i64, p: u64) -> i8 {
    if p == 2 {
        return match a.rem_euclid(8) {
            0 | 2 | 4 | 6 => 0,
            1 | 7 => 1,
            _ => -1,
        };
    }
    let r = a.rem_euclid(p as i64) as u64;
    if r == 0 {
        return 0;
    }
    if pow_mod(r, (p - 1) / 2, p) == 1 {
        1
    } else {
        -1
    }
}

fn mod_pow_big(base: &BigInt, exp: &BigInt, m: &BigInt) -> BigInt {
    base.mod_floor(m).modpow(exp, m)
}

/// Tonelli-Shanks square root of `a` modulo an odd prime `p`; `a` must be a
/// nonzero quadratic residue.
fn sqrt_mod_prime(a: &BigInt, p: u64) -> BigInt {
    let bp = BigInt::from(p);
    let a = a.mod_floor(&bp);
    let pm1 = p - 1;
    let s = pm1.trailing_zeros();
    let q = pm1 >> s;
    let mut z = 2u64;
    while kronecker_prime(z as i64, p) != -1 {
        z += 1;
    }
    let mut m = s;
    let mut c = mod_pow_big(&BigInt::from(z), &BigInt::from(q), &bp);
    let mut t = mod_pow_big(&a, &BigInt::from(q), &bp);
    let mut r = mod_pow_big(&a, &BigInt::from(q.div_ceil(2)), &bp);
    while !t.is_one() {
        let mut i = 0;
        let mut tt = t.clone();
        while !tt.is_one() {
            tt = (&tt * &tt).mod_floor(&bp);
            i += 1;
        }
        let mut b = c.clone();
        for _ in 0..(m - i - 1) {
            b = (&b * &b).mod_floor(&bp);
        }
        m = i;
        c = (&b * &b).mod_floor(&bp);
        t = (&t * &c).mod_floor(&bp);
        r = (&r * &b).mod_floor(&bp);
    }
    r
}

/// A p-adic square root of `d` reduced modulo `p^k`, for `p` not dividing
/// `d` and `d` a square in `Z_p` (for `p = 2` this means `d ≡ 1 mod 8`).
///
/// The root is canonical: for odd `p` it reduces to the residue in
/// `[1, (p-1)/2]`, for `p = 2` it is `≡ 1 mod 4`.
pub fn padic_sqrt(d: i64, p: u64, k: u32) -> BigInt {
    let modulus = BigInt::from(p).pow(k);
    let bd = BigInt::from(d);
    if p == 2 {
        // r^2 ≡ d mod 2^j lifts by adding 2^(j-1); the root is then only
        // determined modulo 2^(j-1), hence the extra bit.
        let mut r = BigInt::one();
        for j in 3..(k + 2) {
            let m = BigInt::one() << (j + 1);
            if !(&r * &r - &bd).mod_floor(&m).is_zero() {
                r += BigInt::one() << (j - 1);
            }
        }
        let r = r.mod_floor(&modulus);
        if k >= 2 && (&r % 4u32) == BigInt::from(3) {
            return (-r).mod_floor(&modulus);
        }
        return r;
    }
    let bp = BigInt::from(p);
    let mut r = sqrt_mod_prime(&bd, p);
    if r > BigInt::from((p - 1) / 2) {
        r = &bp - r;
    }
    let mut cur = bp.clone();
    let mut prec = 1;
    if k == 1 {
        return r;
    }
    while prec < k {
        prec = (prec * 2).min(k);
        cur = bp.pow(prec);
        let two_r = (BigInt::from(2) * &r).mod_floor(&cur);
        let inv = mod_inverse(&two_r, &cur);
        r = (&r - (&r * &r - &bd) * inv).mod_floor(&cur);
    }
    debug_assert_eq!(cur, modulus);
    r.mod_floor(&modulus)
}

/// Inverse of `a` modulo `m`; `gcd(a, m)` must be 1.
pub fn mod_inverse(a: &BigInt, m: &BigInt) -> BigInt {
    let e = a.mod_floor(m).extended_gcd(m);
    debug_assert!(e.gcd.is_one());
    e.x.mod_floor(m)
}

pub fn is_squarefree(d: i64) -> bool {
    if d == 0 {
        return false;
    }
    let n = d.unsigned_abs();
    match factorize(&BigUint::from(n)) {
        Ok(f) => f.iter().all(|&(_, e)| e == 1),
        Err(_) => false,
    }
}

/// Lowest-terms rendering: `p/q`, or the integer when `q = 1`.
pub fn fmt_rational(x: &BigRational) -> String {
    if x.denom().is_one() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute_prime(n: u64) -> bool {
        n >= 2 && (2..).take_while(|d| d * d <= n).all(|d| !n.is_multiple_of(d))
    }

    #[test]
    fn primality_matches_trial_division() {
        for n in 0..5000u64 {
            assert_eq!(is_prime(n), brute_prime(n), "n = {n}");
        }
        assert!(is_prime(1_000_000_007));
        assert!(!is_prime(1_000_000_007u64 * 998_244_353));
    }

    #[test]
    fn factorization_recombines() {
        for n in [
            1u64,
            2,
            12,
            1_073_741_825,
            600_851_475_143,
            1_000_000_007u64 * 998_244_353,
        ] {
            let f = factorize(&BigUint::from(n)).unwrap();
            let back: u64 = f.iter().map(|&(p, e)| p.pow(e)).product();
            assert_eq!(back, n);
            assert!(f.iter().all(|&(p, _)| is_prime(p)));
        }
        // 2^30 + 1 = 5^2 * 13 * 41 * 61 * 1321
        let f = factorize(&BigUint::from((1u64 << 30) + 1)).unwrap();
        assert_eq!(f, vec![(5, 2), (13, 1), (41, 1), (61, 1), (1321, 1)]);
    }

    #[test]
    fn kronecker_matches_root_count() {
        for p in [3u64, 5, 7, 11, 13, 101] {
            for a in -30i64..30 {
                let r = a.rem_euclid(p as i64) as u64;
                let roots = (0..p).filter(|x| (x * x) % p == r).count();
                let expect = if r == 0 {
                    0
                } else if roots == 2 {
                    1
                } else {
                    -1
                };
                assert_eq!(kronecker_prime(a, p), expect, "a={a} p={p}");
            }
        }
    }

    #[test]
    fn padic_sqrt_squares_back() {
        for (d, p) in [
            (-1i64, 5u64),
            (2, 7),
            (5, 11),
            (17, 2),
            (-7, 2),
            (-1, 13),
            (3, 13),
        ] {
            for k in 1..12 {
                let r = padic_sqrt(d, p, k);
                let m = BigInt::from(p).pow(k);
                assert!(
                    (&r * &r - BigInt::from(d)).mod_floor(&m).is_zero(),
                    "d={d} p={p} k={k}"
                );
            }
            // canonical choice is stable under precision changes
            let lo = padic_sqrt(d, p, 3);
            let hi = padic_sqrt(d, p, 9);
            assert_eq!(hi.mod_floor(&BigInt::from(p).pow(3)), lo);
        }
    }

    #[test]
    fn ln_of_huge_integers() {
        let n = BigInt::from(3).pow(2000);
        let got = ln_int(&n);
        let want = 2000.0 * 3f64.ln();
        assert!((got - want).abs() / want < 1e-14);
        assert_eq!(ln_int(&BigInt::from(-1)), 0.0);
    }

    #[test]
    fn squarefree() {
        assert!(is_squarefree(-1));
        assert!(is_squarefree(30));
        assert!(!is_squarefree(12));
        assert!(!is_squarefree(0));
    }
}
