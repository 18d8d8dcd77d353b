//! Property tests for structural invariants: projections, tail bounds,
//! formatter round-trips, and bound monotonicity.

use minimaxdl::bounds::{gaussian_tail, general_cov_lower, GeneralCovParams};
use minimaxdl::geometry::project_unit_ball;
use minimaxdl::infotheory::fano_error_lower_bound;
use minimaxdl::io::fmt_g17;
use minimaxdl::learners::threshold_decode;
use minimaxdl::packing::hoeffding_tail;
use ndarray::{Array1, Array2};
use proptest::prelude::*;

fn norm(v: &Array1<f64>) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

proptest! {
    #[test]
    fn unit_ball_projection_properties(
        a in proptest::collection::vec(-1e6f64..1e6, 1..8),
        b in proptest::collection::vec(-1e6f64..1e6, 1..8),
    ) {
        let len = a.len().min(b.len());
        let a = Array1::from_vec(a[..len].to_vec());
        let b = Array1::from_vec(b[..len].to_vec());
        let pa = project_unit_ball(&a.view());
        let pb = project_unit_ball(&b.view());
        prop_assert!(norm(&pa) <= 1.0 + 1e-12);
        // idempotence
        let ppa = project_unit_ball(&pa.view());
        for (x, y) in pa.iter().zip(ppa.iter()) {
            prop_assert!((x - y).abs() <= 1e-12);
        }
        // non-expansiveness
        let d_before = norm(&(&a - &b));
        let d_after = norm(&(&pa - &pb));
        prop_assert!(d_after <= d_before + 1e-9);
    }

    #[test]
    fn fano_floor_is_a_probability_and_monotone(
        mi in 0.0f64..100.0,
        extra in 0.0f64..10.0,
        l in 2usize..1_000_000,
    ) {
        let floor = fano_error_lower_bound(mi, l).unwrap();
        prop_assert!((0.0..=1.0).contains(&floor));
        let lower = fano_error_lower_bound(mi + extra, l).unwrap();
        prop_assert!(lower <= floor + 1e-15);
    }

    #[test]
    fn hoeffding_tail_shape(
        k in 1usize..10_000,
        a in 1e-3f64..1e3,
        t in 0.0f64..1e3,
        dt in 0.0f64..1e3,
    ) {
        let bound = hoeffding_tail(k, a, t).unwrap();
        prop_assert!(bound > 0.0 && bound <= 1.0);
        let further = hoeffding_tail(k, a, t + dt).unwrap();
        prop_assert!(further <= bound);
        let wider = hoeffding_tail(k + 1, a, t).unwrap();
        prop_assert!(wider >= bound);
    }

    #[test]
    fn g17_round_trips(bits in any::<u64>()) {
        let x = f64::from_bits(bits);
        prop_assume!(x.is_finite());
        let parsed: f64 = fmt_g17(x).parse().unwrap();
        prop_assert!(parsed == x || (parsed == 0.0 && x == 0.0));
    }

    #[test]
    fn general_bound_monotone_in_n(
        m in 6usize..10,
        p in 10usize..16,
        n in 1usize..100_000,
        sigma2 in 0.01f64..10.0,
        cov_norm in 0.01f64..10.0,
        r in 0.01f64..2.0,
    ) {
        let params = GeneralCovParams { m, p, n, sigma2, cov_spectral_norm: cov_norm, r };
        let value = general_cov_lower(&params).unwrap().value;
        prop_assert!(value >= 0.0);
        let mut bigger = params;
        bigger.n = n * 2;
        let later = general_cov_lower(&bigger).unwrap().value;
        prop_assert!(later <= value + 1e-18);
    }

    #[test]
    fn gaussian_tail_is_a_complement_pair(x in -8.0f64..8.0) {
        let q = gaussian_tail(x);
        prop_assert!((0.0..=1.0).contains(&q));
        prop_assert!((q + gaussian_tail(-x) - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn decoded_coefficients_are_signs(
        data in proptest::collection::vec(-3.0f64..3.0, 12)
    ) {
        let y = Array2::from_shape_vec((3, 4), data).unwrap();
        let x = threshold_decode(&y.view());
        for (&yv, &xv) in y.iter().zip(x.iter()) {
            prop_assert!(xv == 0.0 || xv == 1.0 || xv == -1.0);
            if yv.abs() <= 0.5 {
                prop_assert_eq!(xv, 0.0);
            } else {
                prop_assert_eq!(xv, yv.signum());
            }
        }
    }
}
