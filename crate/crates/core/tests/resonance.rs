use proptest::prelude::*;

use torus_nf::cutoffs::{split_symbol, NFParams};
use torus_nf::lattice::{dot, japanese, norm, DualLattice, Mode};
use torus_nf::resonance::{
    census, census_csv, classify, inclusion_check, is_nonresonant, layer_half_width, layer_measure_mc,
    layer_union_bound, strip_in_disk_fraction, Resonance, ResonanceTester,
};
use torus_nf::symexpr::{Expr, FourierSymbol};

fn standard() -> NFParams {
    NFParams { m: 2.0, frak_e: 2.0, delta: 0.75, tau: 2.0, epsilon: 0.25, gamma: 0.4, dim: 2 }
}

/// Direct enumeration over a box of integer k.
fn brute(xi: &[f64], p: &NFParams) -> bool {
    let j = japanese(xi);
    for a in -6i64..=6 {
        for b in -6i64..=6 {
            let k = [a as f64, b as f64];
            let kn = norm(&k);
            if kn == 0.0 || kn >= j.powf(p.epsilon) {
                continue;
            }
            if dot(xi, &k).abs() <= 2.0 * p.gamma * j.powf(p.delta) / kn.powf(p.tau) {
                return false;
            }
        }
    }
    true
}

#[test]
fn axis_points_are_resonant() {
    let z2 = DualLattice::integer(2).unwrap();
    for n in [1.0, 5.0, 40.0] {
        assert_eq!(classify(&[n, 0.0], &standard(), &z2), Resonance::Resonant);
    }
}

#[test]
fn origin_is_vacuous() {
    let z2 = DualLattice::integer(2).unwrap();
    assert_eq!(classify(&[0.0, 0.0], &standard(), &z2), Resonance::Vacuous);
    assert!(is_nonresonant(&[0.0, 0.0], &standard(), &z2));
}

#[test]
fn thirteen_seven_by_hand() {
    let p = standard();
    let xi = [13.0, 7.0];
    let j = japanese(&xi);
    // Only the four unit vectors satisfy |k| < ⟨ξ⟩^ε ≈ 1.96.
    assert!(j.powf(p.epsilon) < 2f64.sqrt() + 0.6 && j.powf(p.epsilon) > 1.0);
    let bound = 2.0 * p.gamma * j.powf(p.delta);
    let expected = 13.0 > bound && 7.0 > bound;
    let z2 = DualLattice::integer(2).unwrap();
    assert_eq!(is_nonresonant(&xi, &p, &z2), expected);
    assert!(expected);
}

#[test]
fn tester_agrees_with_enumeration() {
    let p = standard();
    let z2 = DualLattice::integer(2).unwrap();
    let tester = ResonanceTester::new(&z2, &p, 120.0);
    for a in -80i64..=80 {
        for b in [-37i64, -3, 0, 11, 64] {
            let xi = [a as f64, b as f64];
            assert_eq!(tester.is_nonresonant(&xi), brute(&xi, &p), "ξ = {xi:?}");
        }
    }
}

#[test]
fn resonant_part_vanishes_on_the_nonresonant_set() {
    let p = standard();
    let z2 = std::sync::Arc::new(DualLattice::integer(2).unwrap());
    let terms: Vec<(Mode, Expr)> = [[1, 0], [-1, 0], [0, 1], [0, -1], [1, 1], [-1, -1]]
        .iter()
        .map(|k| (Mode(k.to_vec()), Expr::one()))
        .collect();
    let v = FourierSymbol::from_terms(z2.clone(), terms, 0.0, 1.0).unwrap();
    let res = split_symbol(&v, &p).res.compile();
    let tester = ResonanceTester::new(&z2, &p, 100.0);
    let mut checked = 0;
    for a in -60i64..=60 {
        for b in -60i64..=60 {
            let xi = [a as f64, b as f64];
            if norm(&xi) > 60.0 || tester.classify(&xi) != Resonance::Nonresonant {
                continue;
            }
            for c in res.coefficients(&xi).unwrap() {
                assert!(c.norm() < 1e-14, "ξ = {xi:?}");
            }
            checked += 1;
        }
    }
    assert!(checked > 1000);
}

#[test]
fn census_is_deterministic_and_rises() {
    let p = standard();
    let z2 = DualLattice::integer(2).unwrap();
    let a = census(&p, &z2, &[50.0, 100.0, 200.0], 7);
    let b = census(&p, &z2, &[50.0, 100.0, 200.0], 7);
    assert_eq!(census_csv(&a), census_csv(&b));
    for w in a.windows(2) {
        assert!(w[1].fraction >= w[0].fraction - 0.05);
    }
    assert_eq!(a[0].vacuous_count, 1);
    assert!(census_csv(&a).starts_with("R,total,nonres,fraction,vacuous_count,seed\n"));
}

#[test]
fn degenerate_gamma_is_rejected() {
    let z2 = DualLattice::integer(2).unwrap();
    let mut p = standard();
    p.gamma = 0.6;
    assert!(p.validate(&z2).is_err());
}

#[test]
fn layer_measure_matches_strip_area() {
    let p = standard();
    let k = [1.0, 0.0];
    let r = 100.0;
    let est = layer_measure_mc(&k, r, &p, 200_000, 11);
    let exact = strip_in_disk_fraction(layer_half_width(&k, r, &p), r);
    assert!((est.fraction - exact).abs() <= 3.0 * est.std_err.max(1e-4), "{est:?} vs {exact}");
}

#[test]
fn layer_measure_shrinks_with_radius() {
    let p = standard();
    let k = [1.0, 1.0];
    let small = layer_measure_mc(&k, 50.0, &p, 50_000, 3).fraction;
    let large = layer_measure_mc(&k, 5000.0, &p, 50_000, 3).fraction;
    assert!(large < small);
}

#[test]
fn layer_union_decays_like_r_to_delta_minus_one() {
    let p = standard();
    let z2 = DualLattice::integer(2).unwrap();
    let scaled: Vec<f64> = [100.0, 400.0, 1600.0]
        .iter()
        .map(|&r| layer_union_bound(&z2, r, &p, 40_000, 5) * r.powf(1.0 - p.delta))
        .collect();
    let (lo, hi) = scaled.iter().fold((f64::MAX, 0.0_f64), |(a, b), &s| (a.min(s), b.max(s)));
    assert!(hi / lo < 2.0, "{scaled:?}");
}

#[test]
fn inclusion_without_motion_is_trivial() {
    let rep = inclusion_check(&[1.0, 2.0], 200.0, 0.0, &standard(), 10_000, 1);
    assert_eq!(rep.violations, 0);
    assert!(rep.passed());
}

#[test]
fn inclusion_holds_for_standard_parameters() {
    let z2 = DualLattice::integer(2).unwrap();
    let rep = inclusion_check(&[1.0, 1.0], 200.0, z2.min_gap_r(), &standard(), 100_000, 2);
    assert_eq!(rep.violations, 0);
    assert!(rep.k_in_range);
}

proptest! {
    #[test]
    fn nonresonance_is_even(a in -200.0f64..200.0, b in -200.0f64..200.0) {
        let p = standard();
        let z2 = DualLattice::integer(2).unwrap();
        let tester = ResonanceTester::new(&z2, &p, 300.0);
        prop_assert_eq!(tester.classify(&[a, b]), tester.classify(&[-a, -b]));
    }
}
