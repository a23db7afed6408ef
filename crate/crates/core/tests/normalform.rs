use std::sync::Arc;

use torus_nf::config::RunConfig;
use torus_nf::cutoffs::NFParams;
use torus_nf::lattice::{DualLattice, Mode};
use torus_nf::normalform::{run, NfConfig, Perturbation};
use torus_nf::symexpr::{parse, Expr, FourierSymbol, C64};
use torus_nf::Error;

fn mathieu() -> (Perturbation, NFParams) {
    let dual = Arc::new(DualLattice::integer(1).unwrap());
    let v0 = FourierSymbol::from_terms(
        dual,
        [(Mode(vec![1]), Expr::one()), (Mode(vec![-1]), Expr::one())],
        0.0,
        1.0,
    )
    .unwrap();
    let p = NFParams { m: 2.0, frak_e: 2.0, delta: 0.75, tau: 0.5, epsilon: 0.5, gamma: 0.4, dim: 1 };
    (Perturbation::new(v0, true).unwrap(), p)
}

/// Second and fourth order terms of the Mathieu characteristic value a_r(q)
/// for −y'' + 2cos(x)y at frequency ξ: r = 2ξ, q = 4, λ = a/4.
fn mathieu_series(xi: f64) -> (f64, f64) {
    let r2 = 4.0 * xi * xi;
    let q: f64 = 4.0;
    let second = q * q / (2.0 * (r2 - 1.0)) / 4.0;
    let fourth = (5.0 * r2 + 7.0) * q.powi(4) / (32.0 * (r2 - 1.0).powi(3) * (r2 - 4.0)) / 4.0;
    (second, fourth)
}

#[test]
fn mathieu_second_order_matches_rayleigh_schroedinger() {
    let (pert, p) = mathieu();
    let s = run(&pert, &p, NfConfig::new(&p, 2, 3)).unwrap();
    for xi in [10.0, 20.0, 40.0] {
        let z = s.z_values(&[xi]).unwrap();
        let (second, _) = mathieu_series(xi);
        assert!((z[1].re - second).abs() <= 1e-3 * second, "ξ = {xi}: {} vs {second}", z[1].re);
    }
}

#[test]
fn mathieu_third_step_matches_fourth_order_series() {
    let (pert, p) = mathieu();
    let s = run(&pert, &p, NfConfig::new(&p, 3, 3)).unwrap();
    for xi in [30.0, 40.0, 60.0] {
        let z = s.z_values(&[xi]).unwrap();
        let (_, fourth) = mathieu_series(xi);
        assert!((z[2].re - fourth).abs() <= 0.01 * fourth, "ξ = {xi}: {} vs {fourth}", z[2].re);
    }
}

#[test]
fn mathieu_third_step_regression() {
    let (pert, p) = mathieu();
    let s = run(&pert, &p, NfConfig::new(&p, 3, 3)).unwrap();
    let baseline = [
        (12.0, 3.47825038580246897e-3, 3.35752737377403842e-8),
        (20.0, 1.25078124999999972e-3, 2.44566415849102562e-9),
        (40.0, 3.12548828124999947e-4, 3.81636636331677412e-11),
    ];
    for (xi, z1, z2) in baseline {
        let z = s.z_values(&[xi]).unwrap();
        assert!((z[1].re - z1).abs() <= 1e-12 * z1);
        assert!((z[2].re - z2).abs() <= 1e-9 * z2);
        assert!(z.iter().all(|c| c.im.abs() < 1e-15));
    }
}

#[test]
fn square_second_order_matches_rayleigh_schroedinger() {
    let setup = RunConfig::preset("square-2d").unwrap().setup().unwrap();
    let s = run(&setup.perturbation, &setup.params, NfConfig::new(&setup.params, 2, 3)).unwrap();
    for xi in [[40.0, 30.0], [-35.0, 44.0]] {
        let z = s.z_values(&xi).unwrap();
        let rs: f64 = xi.iter().map(|x| 2.0 / (4.0 * x * x - 1.0)).sum();
        assert!((z[1].re - rs).abs() <= 1e-3 * rs);
    }
}

#[test]
fn zero_perturbation_gives_the_free_symbol() {
    let (_, p) = mathieu();
    let dual = Arc::new(DualLattice::integer(1).unwrap());
    let pert = Perturbation::new(FourierSymbol::zero(dual, 0.0, 1.0), true).unwrap();
    let s = run(&pert, &p, NfConfig::new(&p, 3, 3)).unwrap();
    assert!(s.generators.iter().all(|g| g.is_empty()));
    for xi in [1.0, 7.5, -30.0] {
        assert!(s.z_values(&[xi]).unwrap().iter().all(|z| *z == C64::new(0.0, 0.0)));
        assert_eq!(s.lambda(&[xi]).unwrap(), xi * xi);
    }
}

#[test]
fn symmetric_perturbation_gives_even_real_z() {
    let setup = RunConfig::preset("square-2d").unwrap().setup().unwrap();
    let s = run(&setup.perturbation, &setup.params, NfConfig::new(&setup.params, 2, 3)).unwrap();
    for xi in [[3.0, 17.5], [22.0, -9.0], [0.7, 0.2]] {
        let a = s.z_values(&xi).unwrap();
        let b = s.z_values(&[-xi[0], -xi[1]]).unwrap();
        for (u, v) in a.iter().zip(&b) {
            assert!((u - v).norm() < 1e-12);
            assert!(u.im.abs() < 1e-12);
        }
    }
}

#[test]
fn orders_decrease_by_rho_each_step() {
    let (pert, p) = mathieu();
    let s = run(&pert, &p, NfConfig::new(&p, 3, 3)).unwrap();
    for n in 0..3 {
        assert!((s.v_order(n) - s.v_order(n + 1) - p.rho()).abs() < 1e-12);
    }
    for g in &s.generators {
        assert!(g.support_radius() > 0.0);
    }
}

#[test]
fn export_lists_every_step() {
    let (pert, p) = mathieu();
    let s = run(&pert, &p, NfConfig::new(&p, 2, 3)).unwrap();
    let doc = s.export();
    let text = serde_json::to_string(&doc).unwrap();
    assert!(text.contains("\"steps\""));
    assert_eq!(doc["steps"].as_array().map(|a| a.len()), Some(2));
}

#[test]
fn non_real_perturbations_are_rejected() {
    let dual = Arc::new(DualLattice::integer(1).unwrap());
    let v0 = FourierSymbol::from_terms(dual, [(Mode(vec![1]), Expr::one())], 0.0, 1.0).unwrap();
    assert!(matches!(Perturbation::new(v0, false), Err(Error::NotReal(_))));
}

#[test]
fn order_check_detects_understated_orders() {
    let dual = Arc::new(DualLattice::integer(1).unwrap());
    let coeff = parse("jap(1.5)", 1).unwrap();
    let v0 = FourierSymbol::from_terms(dual, [(Mode(vec![1]), coeff.clone()), (Mode(vec![-1]), coeff)], 0.0, 1.0)
        .unwrap();
    let pert = Perturbation::new(v0, true).unwrap();
    assert!(matches!(pert.check_order(0.0), Err(Error::Hypothesis(_))));
    let est = pert.check_order(1.5).unwrap();
    assert!((est - 1.5).abs() < 0.05);
}
