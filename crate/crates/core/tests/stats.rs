use proptest::prelude::*;

use torus_nf::stats::{censored_slope_check, loglog_slope};

proptest! {
    #[test]
    fn power_laws_have_their_exponent(c in 0.01f64..100.0, s in -6.0f64..3.0) {
        let xs = [2.0, 5.0, 11.0, 40.0];
        let ys: Vec<f64> = xs.iter().map(|x: &f64| c * x.powf(s)).collect();
        prop_assert!((loglog_slope(&xs, &ys).unwrap() - s).abs() < 1e-9);
    }
}

#[test]
fn degenerate_inputs_have_no_slope() {
    assert_eq!(loglog_slope(&[1.0], &[1.0]), None);
    assert_eq!(loglog_slope(&[2.0, 2.0], &[1.0, 3.0]), None);
    assert_eq!(loglog_slope(&[1.0, 2.0], &[0.0, 0.0]), None);
}

#[test]
fn censoring() {
    let xs = [10.0, 20.0, 40.0, 80.0];
    // Fully resolved decay.
    let ys: Vec<f64> = xs.iter().map(|x: &f64| x.powi(-3)).collect();
    assert!(censored_slope_check(&xs, &ys, 0.0, -2.0).pass);
    assert!(!censored_slope_check(&xs, &ys, 0.0, -4.0).pass);
    // Everything below the floor.
    let c = censored_slope_check(&xs, &[0.0; 4], 1e-12, -2.0);
    assert!(c.pass && c.censored == 4 && c.slope.is_none());
    // One resolved point that then drops below the floor.
    assert!(censored_slope_check(&xs, &[1e-6, 0.0, 0.0, 0.0], 1e-12, -2.0).pass);
    // A resolved point after a censored one is a failure.
    assert!(!censored_slope_check(&xs, &[0.0, 0.0, 1e-6, 0.0], 1e-12, -2.0).pass);
    // Growth is a failure.
    assert!(!censored_slope_check(&xs, &[1e-6, 1e-5, 1e-4, 1e-3], 1e-12, -2.0).pass);
}
