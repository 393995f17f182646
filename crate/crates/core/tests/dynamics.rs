use num_integer::Integer;
use num_rational::BigRational;
use proptest::prelude::*;

use itmlab::gauss::classify;
use itmlab::interval_set::attractor_iterate;
use itmlab::itm::{numeric_itinerary, orbit, ItmParams};

fn q(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

/// `0 < b < a < d`, so `(a/d, b/d)` lies in the interior of U.
fn interior() -> impl Strategy<Value = (i64, i64, i64)> {
    (3i64..60).prop_flat_map(|d| (Just(d), 2..d)).prop_flat_map(|(d, a)| (Just(d), Just(a), 1..a))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn itineraries_extend_each_other((d, a, b) in interior(), n in 1usize..40, extra in 0usize..40) {
        let p = ItmParams::checked(q(a, d), q(b, d)).unwrap();
        let short = numeric_itinerary(&p, n).unwrap();
        let long = numeric_itinerary(&p, n + extra).unwrap();
        prop_assert!(short.word.is_prefix_of(&long.word));
        prop_assert_eq!(long.word.len(), n + extra);
    }

    #[test]
    fn rational_orbits_are_eventually_periodic((d, a, b) in interior(), num in 0i64..97) {
        // The orbit stays on the lattice (1/m)Z ∩ [0,1), m = lcm(d, 97), so it
        // repeats within m + 1 steps.
        let p = ItmParams::checked(q(a, d), q(b, d)).unwrap();
        let m = d.lcm(&97) as usize;
        let o = orbit(&p, &q(num, 97), m + 1).unwrap();
        let (pre, period) = o.cycle.expect("cycle within the lattice size");
        prop_assert!(period >= 1 && pre + period <= m + 1);
        prop_assert_eq!(&o.points[pre].0, &o.points[pre + period].0);
    }

    #[test]
    fn finite_type_attractors_are_t_bijective((d, a, b) in interior()) {
        let p = ItmParams::checked(q(a, d), q(b, d)).unwrap();
        prop_assert!(classify(&p, 10_000).unwrap().is_finite());
        let r = attractor_iterate(&p, 5_000, 100_000).unwrap();
        let n = r.stabilized_at.expect("stabilizes");
        prop_assert!(r.last.is_t_bijective(&p));
        prop_assert!(r.steps.windows(2).all(|w| w[1].measure <= w[0].measure));
        prop_assert_eq!(r.steps.len(), n + 2);
    }
}

#[test]
fn every_sampled_start_is_eventually_periodic() {
    let p = ItmParams::checked(q(3, 7), q(2, 7)).unwrap();
    assert!(orbit(&p, &q(0, 1), 10).unwrap().cycle.is_some());
    for j in 0..100 {
        let o = orbit(&p, &q(j, 100), 701).unwrap();
        assert!(o.cycle.is_some(), "start {j}/100");
    }
}
