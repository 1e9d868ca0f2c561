mod common;

use posim::association::{hypothesis_test, plausibility_region, posterior_necessity, posterior_possibility, Decision};
use posim::credal::credal_membership;
use posim::models::cauchy::cauchy_posterior_contour;
use posim::models::eiv::{eiv_posterior_contour, EivModel};
use posim::models::laplace::asymmetric_laplace_cdf;
use posim::space::{Interval, SetDescriptor};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn interval(a: f64, b: f64) -> SetDescriptor {
    SetDescriptor::interval(Interval::closed(a.min(b), a.max(b)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn cauchy_sup_is_one(y in -50.0..50.0f64) {
        let post = cauchy_posterior_contour(y);
        let full = SetDescriptor::interval(Interval::real_line());
        prop_assert!((posterior_possibility(&post, &full).unwrap() - 1.0).abs() < 1e-12);
        prop_assert!((post.eval(y) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn cauchy_duality_and_ordering(y in -5.0..5.0f64, a in -30.0..30.0f64, b in -30.0..30.0f64) {
        let post = cauchy_posterior_contour(y);
        let set = interval(a, b);
        let line = Interval::real_line();
        let pos = posterior_possibility(&post, &set).unwrap();
        let nec = posterior_necessity(&post, &set).unwrap();
        let comp = posterior_possibility(&post, &set.complement_within(&line)).unwrap();
        prop_assert!((nec - (1.0 - comp)).abs() < 1e-12);
        prop_assert!(nec <= pos + 1e-12);
        // one of A and its complement holds the mode
        prop_assert!((pos.max(comp) - 1.0).abs() < 1e-9);
    }

    #[test]
    fn possibility_is_monotone(y in -5.0..5.0f64, a in -20.0..20.0f64, w in 0.0..10.0f64, grow in 0.0..10.0f64) {
        let post = cauchy_posterior_contour(y);
        let small = posterior_possibility(&post, &interval(a, a + w)).unwrap();
        let big = posterior_possibility(&post, &interval(a - grow, a + w + grow)).unwrap();
        prop_assert!(small <= big + 1e-12);
    }

    #[test]
    fn region_agrees_with_point_tests(y in -5.0..5.0f64, alpha in 0.02..0.9f64, t in -40.0..40.0f64) {
        let post = cauchy_posterior_contour(y);
        let region = plausibility_region(&post, alpha).unwrap();
        let test = hypothesis_test(&post, &SetDescriptor::point(t), alpha).unwrap();
        // skip points within bisection tolerance of an endpoint
        let near = region.intervals.iter().any(|i| (t - i.lo).abs() < 1e-6 || (t - i.hi).abs() < 1e-6);
        if !near {
            prop_assert_eq!(region.contains(t), test.decision == Decision::Retain);
        }
    }

    #[test]
    fn eiv_possibility_monotone(a in 0.0..20.0f64, w in 0.0..5.0f64, grow in 0.0..5.0f64) {
        let post = eiv_posterior_contour(&EivModel::new(5.0, 5.0, 1.4, 0.5).unwrap());
        let small = posterior_possibility(&post, &interval(a, a + w)).unwrap();
        let lo = (a - grow).max(0.0);
        let big = posterior_possibility(&post, &interval(lo, a + w + grow)).unwrap();
        prop_assert!(small <= big + 1e-9);
    }

    #[test]
    fn laplace_cdf_is_a_cdf(r1 in 0.1..10.0f64, r2 in 0.1..10.0f64, x in -10.0..10.0f64, dx in 0.0..3.0f64) {
        let f = asymmetric_laplace_cdf(r1, r2, x);
        prop_assert!((0.0..=1.0).contains(&f));
        prop_assert!(f <= asymmetric_laplace_cdf(r1, r2, x + dx) + 1e-15);
    }

    #[test]
    fn credal_matches_brute_force(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let inst = common::random_credal_instance(&mut rng, 8);
        let v = credal_membership(&inst);
        prop_assert_eq!(v.member, common::brute_force_member(&inst.probs, &inst.contour_values));
        if let Some(w) = v.witness {
            // the witness cut really violates P(cut) >= 1 - α
            prop_assert!(w.cut_probability < 1.0 - w.alpha + 1e-9);
        }
    }
}
