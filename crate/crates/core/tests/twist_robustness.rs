use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use wqh_core::fixtures::{coboundary_twist, lost_classes, random_counital_unit, random_trivial_twist, robustness_fixtures};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn coboundary_twists_keep_every_class(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for (name, w, q) in robustness_fixtures() {
            let tw = coboundary_twist(&w, &random_counital_unit(&w, &mut rng));
            let lost = lost_classes(&w, q.as_ref(), &tw);
            prop_assert!(lost.is_empty(), "{}: lost {:?}", name, lost);
        }
    }

    #[test]
    fn trivial_twists_keep_every_class(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for (name, w, q) in robustness_fixtures() {
            let tw = random_trivial_twist(&w, &mut rng);
            let lost = lost_classes(&w, q.as_ref(), &tw);
            prop_assert!(lost.is_empty(), "{}: lost {:?}", name, lost);
        }
    }
}
