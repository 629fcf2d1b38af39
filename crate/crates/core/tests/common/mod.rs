#![allow(dead_code)]

use cuntzlab::moments::*;
use cuntzlab::random::{random_exact_phase, random_exact_unit_vector};
use cuntzlab::words::{primitive_root, EventuallyPeriodicWord, Word};
use cuntzlab::Scalar;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const FAMILIES: usize = 7;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_word(rng: &mut impl Rng, n: usize, len: usize) -> Word {
    Word::new(
        (0..len)
            .map(|_| rng.gen_range(1..=n as u8))
            .collect::<Vec<u8>>(),
    )
}

pub fn random_primitive(rng: &mut impl Rng, n: usize, max_len: usize) -> Word {
    loop {
        let len = rng.gen_range(1..=max_len);
        let w = random_word(rng, n, len);
        if primitive_root(&w).unwrap().1 == 1 {
            return w;
        }
    }
}

pub fn random_epw(rng: &mut impl Rng, n: usize) -> EventuallyPeriodicWord {
    let (a, b) = (rng.gen_range(0..=2), rng.gen_range(1..=3));
    let pre = random_word(rng, n, a);
    let per = random_word(rng, n, b);
    EventuallyPeriodicWord::new(n, pre, per).unwrap()
}

/// A state from family `idx` (mod FAMILIES) over `n` letters with exact
/// random parameters.
pub fn random_state(rng: &mut impl Rng, idx: usize, n: usize) -> (&'static str, MomentFunctional) {
    match idx % FAMILIES {
        0 => (
            "cuntz",
            make_cuntz(&random_exact_unit_vector(rng, n)).unwrap(),
        ),
        1 => {
            // a random exact unit vector is nonperiodic with probability one;
            // resample in the unlikely periodic case
            loop {
                let z = random_exact_unit_vector(rng, n * n);
                let s = make_sub_cuntz(n, 2, &z).unwrap();
                if s.prefix_code().unwrap().unique() {
                    return ("sub_cuntz", s);
                }
            }
        }
        2 => loop {
            let z = random_exact_unit_vector(rng, 2 * (n - 1) + 1);
            if z.last().unwrap().norm_sqr() != Scalar::int(1) {
                return (
                    "geometric_progression",
                    make_geometric_progression(n, 2, &z).unwrap(),
                );
            }
        },
        3 => {
            let pre: Vec<Vec<Scalar>> = (0..rng.gen_range(0..=1))
                .map(|_| random_exact_unit_vector(rng, n))
                .collect();
            let per: Vec<Vec<Scalar>> = (0..rng.gen_range(1..=2))
                .map(|_| random_exact_unit_vector(rng, n))
                .collect();
            ("induced_product", make_induced_product(&pre, &per).unwrap())
        }
        4 => ("shift", make_shift(random_epw(rng, n))),
        5 => (
            "rho_c",
            rho_c(n, rng.gen_range(2..=4), &random_exact_phase(rng)).unwrap(),
        ),
        _ => {
            let base = make_cuntz(&random_exact_unit_vector(rng, n)).unwrap();
            let i = rng.gen_range(1..=n as u8);
            let a = cuntzlab::CuntzElement::s(n, i);
            // s_i* s_i = 1, so any generator is admissible
            (
                "sandwich",
                transform_sandwich(&base, &[(Scalar::int(1), a)], false).unwrap(),
            )
        }
    }
}
