mod common;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use cufraisse::pl::*;
use cufraisse::Q;

#[test]
fn mountain_climbing_pairs() {
    common::mountain_climbing(100, 31);
}

#[test]
fn peak_approximation() {
    let mut rng = ChaCha8Rng::seed_from_u64(32);
    for _ in 0..50 {
        let f = common::surjection(&mut rng, 2..=6);
        let eps = Q::new(1, rng.gen_range(2..40));
        let h = rational_peak_approx(&f, &eps).unwrap();
        assert!(pl_sup_distance(&f, &h) <= eps);
        assert!(!h.has_flat_piece());
        assert!(h.maps_into_unit());
        assert_eq!(h.eval(&Q::zero()), f.eval(&Q::zero()));
        assert_eq!(h.eval(&Q::one()), f.eval(&Q::one()));
    }
}

#[test]
fn kp_near_amalgamation_over_grid() {
    common::kp_near_amalgamation(25, 33);
}

#[test]
fn grid_comparison_and_distance() {
    common::grid_bridge(60, 34);
}
