//! Numerical estimates for families that include nonlinear hypersurfaces.
//!
//! Results here are not certified. The dimension of `∩ Supp D_j` is taken to
//! be the largest `k` for which the intersection with `k` random hyperplanes
//! still has a numerically detectable point in `P^n(C)`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::Codim;
use crate::error::PositionError;
use crate::numfield::{rat_to_f64, FieldElement};
use crate::projective::Hypersurface;

#[derive(Clone, Copy, Debug)]
pub struct HeuristicOptions {
    pub seed: u64,
    pub starts: usize,
    pub iterations: usize,
    pub tolerance: f64,
}

impl Default for HeuristicOptions {
    fn default() -> Self {
        HeuristicOptions {
            seed: 42,
            starts: 24,
            iterations: 200,
            tolerance: 1e-9,
        }
    }
}

fn to_complex(x: &FieldElement) -> Complex64 {
    let a = rat_to_f64(x.a());
    let b = rat_to_f64(x.b());
    match x.field().d() {
        None => Complex64::new(a, 0.0),
        Some(d) if d > 0 => Complex64::new(a + b * (d as f64).sqrt(), 0.0),
        Some(d) => Complex64::new(a, b * ((-d) as f64).sqrt()),
    }
}

/// A polynomial with complex coefficients, normalised to unit max coefficient.
struct CPoly {
    terms: Vec<(Vec<u32>, Complex64)>,
}

impl CPoly {
    fn new(h: &Hypersurface) -> Self {
        let mut terms: Vec<(Vec<u32>, Complex64)> = h
            .poly()
            .terms()
            .map(|(m, c)| (m.clone(), to_complex(c)))
            .collect();
        let scale = terms.iter().map(|(_, c)| c.norm()).fold(0.0, f64::max);
        if scale > 0.0 {
            for t in &mut terms {
                t.1 /= scale;
            }
        }
        CPoly { terms }
    }

    fn linear(coeffs: Vec<Complex64>) -> Self {
        let n = coeffs.len();
        let terms = coeffs
            .into_iter()
            .enumerate()
            .map(|(i, c)| {
                let mut m = vec![0; n];
                m[i] = 1;
                (m, c)
            })
            .collect();
        CPoly { terms }
    }

    fn eval(&self, z: &[Complex64]) -> Complex64 {
        self.terms
            .iter()
            .map(|(m, c)| m.iter().zip(z).fold(*c, |acc, (&e, x)| acc * x.powu(e)))
            .sum()
    }

    fn grad(&self, z: &[Complex64]) -> Vec<Complex64> {
        let mut g = vec![Complex64::new(0.0, 0.0); z.len()];
        for (m, c) in &self.terms {
            for i in 0..z.len() {
                if m[i] == 0 {
                    continue;
                }
                let mut t = *c * (m[i] as f64);
                for (j, (&e, x)) in m.iter().zip(z).enumerate() {
                    let e = if j == i { e - 1 } else { e };
                    t *= x.powu(e);
                }
                g[i] += t;
            }
        }
        g
    }
}

fn random_complex(rng: &mut ChaCha8Rng) -> Complex64 {
    Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
}

/// Gauss–Newton on `eqs(z) = 0, chart(z) = 1` from random starts.
fn has_solution(
    eqs: &[CPoly],
    chart: &CPoly,
    nv: usize,
    rng: &mut ChaCha8Rng,
    opts: &HeuristicOptions,
) -> bool {
    let rows = eqs.len() + 1;
    let residual = |z: &[Complex64]| -> DVector<Complex64> {
        let mut f: Vec<Complex64> = eqs.iter().map(|e| e.eval(z)).collect();
        f.push(chart.eval(z) - Complex64::new(1.0, 0.0));
        DVector::from_vec(f)
    };
    for _ in 0..opts.starts {
        let mut z: Vec<Complex64> = (0..nv).map(|_| random_complex(rng)).collect();
        for _ in 0..opts.iterations {
            let f = residual(&z);
            if f.norm() < opts.tolerance {
                return true;
            }
            let mut j = DMatrix::<Complex64>::zeros(rows, nv);
            for (r, e) in eqs.iter().chain(std::iter::once(chart)).enumerate() {
                for (c, g) in e.grad(&z).into_iter().enumerate() {
                    j[(r, c)] = g;
                }
            }
            let Ok(step) = j.svd(true, true).solve(&f, 1e-12) else {
                break;
            };
            if step.iter().any(|x| !x.is_finite()) {
                break;
            }
            for (x, s) in z.iter_mut().zip(step.iter()) {
                *x -= s;
            }
            let size = z.iter().map(|x| x.norm()).fold(0.0, f64::max);
            if size > 1e8 {
                break;
            }
        }
        if residual(&z).norm() < opts.tolerance {
            return true;
        }
    }
    false
}

/// Estimated codimension of `∩ Supp D_j` in `P^n`, for arbitrary degrees.
pub fn codim_intersection(
    subset: &[Hypersurface],
    n: usize,
    opts: &HeuristicOptions,
) -> Result<Codim, PositionError> {
    if let Some(h) = subset.iter().find(|h| h.ambient_dim() != n) {
        return Err(PositionError::Invalid(format!("{h} does not live in P^{n}")));
    }
    let nv = n + 1;
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let eqs: Vec<CPoly> = subset.iter().map(CPoly::new).collect();
    let mut dim: Option<usize> = None;
    for k in 0..=n {
        let mut all: Vec<CPoly> = eqs
            .iter()
            .map(|e| CPoly {
                terms: e.terms.clone(),
            })
            .collect();
        for _ in 0..k {
            all.push(CPoly::linear((0..nv).map(|_| random_complex(&mut rng)).collect()));
        }
        let chart = CPoly::linear((0..nv).map(|_| random_complex(&mut rng)).collect());
        if has_solution(&all, &chart, nv, &mut rng, opts) {
            dim = Some(k);
        } else {
            break;
        }
    }
    Ok(match dim {
        Some(d) => Codim::Finite(n - d),
        None => Codim::Empty,
    })
}
