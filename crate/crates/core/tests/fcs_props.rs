mod common;

use common::*;
use cuntzlab::fcs::*;
use cuntzlab::moments::transform_gauge;
use cuntzlab::random::random_exact_unitary;
use cuntzlab::words::Word;
use cuntzlab::Tol;
use proptest::prelude::*;

/// Families with finite cdim: Cuntz, sub-Cuntz, geometric progression,
/// ρ_c and purely periodic shift states.
fn finite_family(pick: usize) -> usize {
    [0, 1, 2, 5][pick % 4]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn presentations_reproduce_moments(seed in any::<u64>(), pick in 0usize..4) {
        let (name, om) = random_state(&mut rng(seed), finite_family(pick), 2);
        let tol = Tol::default();
        let Extraction::Presentation { fcs, profile } = extract_fcs(&om, 8, &tol).unwrap() else {
            panic!("{name}: expected a presentation");
        };
        prop_assert!(check_row_isometry(&fcs, 0.0));
        let l = profile.stable_at.unwrap() + 2;
        for j in Word::all_up_to(2, l) {
            for k in Word::all_up_to(2, l) {
                prop_assert_eq!(fcs_moment(&fcs, &j, &k), om.eval(&j, &k), "{} at ({}, {})", name, j, k);
            }
        }
        let orbit = orbit_closure_cdim(&fcs, &tol);
        prop_assert_eq!(orbit.cdim, profile.last_rank());
        prop_assert_eq!(orbit.cdim, fcs.d);
    }

    #[test]
    fn gauge_covariance_of_dimension(seed in any::<u64>(), pick in 0usize..4) {
        let mut r = rng(seed);
        let (_, om) = random_state(&mut r, finite_family(pick), 2);
        let g = random_exact_unitary(&mut r, 2);
        let og = transform_gauge(&om, &g).unwrap();
        let tol = Tol::default();
        let d = |x| match extract_fcs(x, 8, &tol).unwrap() {
            Extraction::Presentation { fcs, .. } => fcs.d,
            Extraction::LowerBoundOnly { .. } => usize::MAX,
        };
        prop_assert_eq!(d(&om), d(&og));
    }

    #[test]
    fn level_ranks_are_monotone(seed in any::<u64>(), fam in 0..FAMILIES) {
        let (name, om) = random_state(&mut rng(seed), fam, 2);
        let p = rank_profile(&om, 5, &Tol::default());
        prop_assert!(p.ranks.windows(2).all(|w| w[0] <= w[1]), "{}: {:?}", name, p.ranks);
        if let Some(l) = p.stable_at {
            prop_assert_eq!(p.ranks[l], p.ranks[l + 1]);
            prop_assert!(p.ranks[..=l].windows(2).all(|w| w[0] < w[1]));
        }
    }
}
