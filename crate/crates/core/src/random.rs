//! Reproducible random test data: exact unit vectors, phases and unitaries
//! with Gaussian-rational (or √2) entries, and float unitaries.

use num::bigint::BigInt;
use num::rational::BigRational;
use num::Zero;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::linalg::{mat_mul, Mat};
use crate::scalar::{Mode, Scalar};
use crate::symalg::CuntzElement;
use crate::words::Word;

pub const SEED_ENV: &str = "CUNTZLAB_SEED";

/// RNG seeded from `CUNTZLAB_SEED` when set, else from `default`.
pub fn rng_from_env(default: u64) -> ChaCha8Rng {
    let seed = std::env::var(SEED_ENV)
        .ok()
        .and_then(|s| s.trim().parse().ok())
        .unwrap_or(default);
    ChaCha8Rng::seed_from_u64(seed)
}

fn small_rational(rng: &mut impl Rng, bound: i64) -> BigRational {
    let num = rng.gen_range(-bound..=bound);
    let den = rng.gen_range(1..=bound);
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

/// A unit vector in C^n with Gaussian-rational entries, obtained by inverse
/// stereographic projection of a random rational point of R^{2n-1}.
pub fn random_exact_unit_vector(rng: &mut impl Rng, n: usize) -> Vec<Scalar> {
    let dim = 2 * n;
    let t: Vec<BigRational> = (0..dim - 1).map(|_| small_rational(rng, 4)).collect();
    let s: BigRational = t.iter().map(|x| x * x).sum();
    let one = BigRational::from_integer(BigInt::from(1));
    let two = BigRational::from_integer(BigInt::from(2));
    let den = &s + &one;
    let mut coords: Vec<BigRational> = t.iter().map(|x| &two * x / &den).collect();
    coords.push((&s - &one) / &den);
    // random coordinate order so the last component is not always special
    for i in (1..dim).rev() {
        let j = rng.gen_range(0..=i);
        coords.swap(i, j);
    }
    coords
        .chunks(2)
        .map(|p| Scalar::gauss(p[0].clone(), p[1].clone()))
        .collect()
}

/// A unit-modulus Gaussian rational `((1−t²) + 2ti)/(1+t²)`.
pub fn random_exact_phase(rng: &mut impl Rng) -> Scalar {
    let t = small_rational(rng, 6);
    phase_from_parameter(&t)
}

pub fn phase_from_parameter(t: &BigRational) -> Scalar {
    let one = BigRational::from_integer(BigInt::from(1));
    let two = BigRational::from_integer(BigInt::from(2));
    let den = &one + t * t;
    Scalar::gauss((&one - t * t) / &den, &two * t / &den)
}

/// A unitary with entries in Q(i, √2): phases, a permutation and
/// optionally a Hadamard rotation on a random pair of coordinates.
pub fn random_exact_unitary(rng: &mut impl Rng, n: usize) -> Mat {
    let mut perm: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        let j = rng.gen_range(0..=i);
        perm.swap(i, j);
    }
    let mut p = vec![vec![Scalar::int(0); n]; n];
    for (i, &j) in perm.iter().enumerate() {
        p[i][j] = random_exact_phase(rng);
    }
    if rng.gen_bool(0.5) {
        let a = rng.gen_range(0..n);
        let b = (a + 1 + rng.gen_range(0..n - 1)) % n;
        let h = Scalar::inv_sqrt2();
        let mut had = crate::linalg::identity(n, Mode::Exact);
        had[a][a] = h.clone();
        had[a][b] = h.clone();
        had[b][a] = h.clone();
        had[b][b] = -h;
        p = mat_mul(&had, &p);
    }
    p
}

/// A unitary in float mode, by Gram–Schmidt on a random complex matrix.
pub fn random_float_unitary(rng: &mut impl Rng, n: usize) -> Mat {
    use num::complex::Complex64;
    let mut cols: Vec<Vec<Complex64>> = Vec::new();
    while cols.len() < n {
        let mut v: Vec<Complex64> = (0..n)
            .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        for c in &cols {
            let ip: Complex64 = c.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
            for (x, y) in v.iter_mut().zip(c) {
                *x -= ip * y;
            }
        }
        let norm = v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
        if norm < 1e-6 {
            continue;
        }
        cols.push(v.into_iter().map(|x| x / norm).collect());
    }
    (0..n)
        .map(|i| (0..n).map(|j| Scalar::Float(cols[j][i])).collect())
        .collect()
}

/// A random float unit vector in C^n.
pub fn random_float_unit_vector(rng: &mut impl Rng, n: usize) -> Vec<Scalar> {
    let u = random_float_unitary(rng, n);
    (0..n).map(|i| u[i][0].clone()).collect()
}

/// A random element with up to `terms` monomials of creation and
/// annihilation length at most `max_len` and small Gaussian-rational
/// coefficients.
pub fn random_exact_element(
    rng: &mut impl Rng,
    n: usize,
    max_len: usize,
    terms: usize,
) -> CuntzElement {
    let mut out = Vec::new();
    for _ in 0..terms {
        let word = |rng: &mut dyn rand::RngCore| {
            let len = rng.gen_range(0..=max_len);
            Word((0..len).map(|_| rng.gen_range(1..=n as u8)).collect())
        };
        let j = word(rng);
        let k = word(rng);
        let re = small_rational(rng, 3);
        let im = if rng.gen_bool(0.5) {
            small_rational(rng, 3)
        } else {
            BigRational::zero()
        };
        out.push((j, k, Scalar::gauss(re, im)));
    }
    CuntzElement::from_terms(n, out)
}
