mod common;

use common::*;
use cuntzlab::fcs::level_rank;
use cuntzlab::moments::*;
use cuntzlab::random::random_exact_unitary;
use cuntzlab::words::{EventuallyPeriodicWord, Word};
use cuntzlab::{Scalar, Tol};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn hermitian_consistent_and_positive(seed in any::<u64>(), fam in 0..FAMILIES, n in 2usize..=3) {
        let (name, om) = random_state(&mut rng(seed), fam, n);
        let level = if n == 2 { 3 } else { 2 };
        prop_assert_eq!(consistency_violation(&om, level), None, "{}", name);
        prop_assert!(positivity_check(&om, level).psd, "{}", name);
    }

    #[test]
    fn prefix_code_fixes_code_moments(seed in any::<u64>(), gp in any::<bool>()) {
        let (_, om) = random_state(&mut rng(seed), if gp { 2 } else { 1 }, 2);
        let p = om.prefix_code().unwrap();
        for (w, z) in p.code.iter().zip(&p.z) {
            prop_assert_eq!(om.eval(w, &Word::empty()), z.conj());
        }
    }

    #[test]
    fn induced_product_moments_vanish_off_diagonal(seed in any::<u64>(), a in 0usize..4, b in 0usize..4) {
        let mut r = rng(seed);
        let (_, om) = random_state(&mut r, 3, 2);
        let (j, k) = (random_word(&mut r, 2, a), random_word(&mut r, 2, b));
        if a != b {
            prop_assert_eq!(om.eval(&j, &k), Scalar::int(0));
        }
    }

    #[test]
    fn gauge_preserves_level_ranks(seed in any::<u64>(), fam in 0..FAMILIES) {
        let mut r = rng(seed);
        let (name, om) = random_state(&mut r, fam, 2);
        let g = random_exact_unitary(&mut r, 2);
        let og = transform_gauge(&om, &g).unwrap();
        let tol = Tol::default();
        for l in 0..=3 {
            prop_assert_eq!(level_rank(&om, l, &tol).0, level_rank(&og, l, &tol).0, "{} level {}", name, l);
        }
    }

    #[test]
    fn basis_tensor_states_match_shift_states(seed in any::<u64>()) {
        let j0 = random_primitive(&mut rng(seed), 2, 3);
        let m = j0.len();
        let sc = make_sub_cuntz(2, m, &basis_tensor(2, &j0)).unwrap();
        let sh = make_shift(EventuallyPeriodicWord::periodic(2, j0.clone()).unwrap());
        for a in Word::all_up_to(2, 2 * m) {
            for b in Word::all_up_to(2, 2 * m) {
                prop_assert_eq!(sc.eval(&a, &b), sh.eval(&a, &b), "e_{} at ({}, {})", j0, a, b);
            }
        }
    }
}

#[test]
fn solution_dim_counts_roots_of_tensor_powers() {
    let x = basis_tensor(2, &Word::new(vec![1u8, 2]));
    for p in [2usize, 3] {
        let mut z = vec![Scalar::int(1)];
        for _ in 0..p {
            z = z
                .iter()
                .flat_map(|a| x.iter().map(move |b| a * b))
                .collect();
        }
        let om = make_sub_cuntz(2, 2 * p, &z).unwrap();
        assert_eq!(om.prefix_code().unwrap().solution_dim, p);
        assert_eq!(om.flags().pure, Some(false));
    }
}
