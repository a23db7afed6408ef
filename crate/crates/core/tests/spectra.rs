use std::sync::Arc;

use faer::complex_native::c64;
use faer::Mat;

use torus_nf::config::RunConfig;
use torus_nf::lattice::{norm, Mode};
use torus_nf::normalform::{run, NfConfig};
use torus_nf::quantize::{weyl_matrix, ModeSet};
use torus_nf::spectra::{eigensolve, floquet_shift, operator_symbol, splitting_scan, SpectralHarness};

/// Number of eigenvalues below x of the tridiagonal matrix with diagonal n²
/// (n = −N..N) and unit off-diagonals, by Sturm sequence.
fn sturm_count(n_max: i64, x: f64) -> usize {
    let mut count = 0;
    let mut q = 1.0_f64;
    for (i, n) in (-n_max..=n_max).enumerate() {
        let off = if i == 0 { 0.0 } else { 1.0 };
        q = (n * n) as f64 - x - off / q;
        if q == 0.0 {
            q = 1e-300;
        }
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

fn sturm_eigenvalue(n_max: i64, index: usize) -> f64 {
    let (mut lo, mut hi) = (-10.0, (n_max * n_max) as f64 + 10.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if sturm_count(n_max, mid) > index {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

#[test]
fn mathieu_spectrum_matches_sturm_bisection() {
    let cfg = RunConfig::preset("mathieu-1d").unwrap();
    let setup = cfg.setup().unwrap();
    let modes = Arc::new(ModeSet::ball(setup.dual.clone(), 40.0));
    let h = weyl_matrix(&operator_symbol(&setup.perturbation, 2.0).unwrap(), &modes, &[0.0]).unwrap();
    let eig = eigensolve(&h).unwrap();
    for i in 0..12 {
        let oracle = sturm_eigenvalue(40, i);
        assert!((eig.values[i] - oracle).abs() < 1e-6, "λ_{i}: {} vs {oracle}", eig.values[i]);
    }
}

#[test]
fn eigensolve_is_sorted_with_small_residual() {
    let cfg = RunConfig::preset("square-2d").unwrap();
    let setup = cfg.setup().unwrap();
    let modes = Arc::new(ModeSet::ball(setup.dual.clone(), 8.0));
    let h = weyl_matrix(&operator_symbol(&setup.perturbation, 2.0).unwrap(), &modes, &[0.0, 0.0]).unwrap();
    let eig = eigensolve(&h).unwrap();
    assert!(eig.values.windows(2).all(|w| w[0] <= w[1]));
    assert!(eig.max_residual <= 1e-9 * eig.norm);
    let total: usize = eig.clusters.iter().map(|r| r.len()).sum();
    assert_eq!(total, modes.len());
}

fn mathieu_harness(r: f64, n: usize) -> (torus_nf::config::Setup, torus_nf::normalform::NFState, SpectralHarness) {
    let cfg = RunConfig::preset("mathieu-1d").unwrap();
    let setup = cfg.setup().unwrap();
    let state = run(&setup.perturbation, &setup.params, NfConfig::new(&setup.params, n, 3)).unwrap();
    let modes = Arc::new(ModeSet::ball(setup.dual.clone(), r));
    let h = SpectralHarness::new(&state, &setup.perturbation, modes).unwrap();
    (setup, state, h)
}

#[test]
fn residual_agrees_with_the_conjugated_matrix() {
    let (_, state, h) = mathieu_harness(64.0, 2);
    let u = h.u_dag.adjoint().to_owned();
    let conj = &u * &h.h.matrix * h.u_dag.as_ref();
    for k in [10i64, 17, 25, -31] {
        let m = h.match_mode_at(&state, &Mode(vec![k])).unwrap();
        let idx = h.modes().index_of(&Mode(vec![k])).unwrap();
        let lam = c64::new(m.lambda_pred, 0.0);
        let direct = (0..conj.nrows())
            .map(|r| {
                let v = conj.read(r, idx) - if r == idx { lam } else { c64::new(0.0, 0.0) };
                v.re * v.re + v.im * v.im
            })
            .sum::<f64>()
            .sqrt();
        assert!((direct - m.residual).abs() <= 1e-9, "ξ = {k}: {direct} vs {}", m.residual);
    }
}

#[test]
fn quasimodes_are_orthonormal() {
    let (_, _, h) = mathieu_harness(64.0, 2);
    let idx: Vec<usize> = h.interior().into_iter().filter(|&i| h.modes().point(i).norm >= 8.0).collect();
    for (a, &i) in idx.iter().enumerate() {
        assert!((h.overlap(i, i) - 1.0).abs() < 1e-12);
        for &j in &idx[a + 1..] {
            assert!(h.overlap(i, j) < 1e-10);
        }
    }
}

#[test]
fn matching_is_injective_up_to_multiplicity() {
    let (_, state, h) = mathieu_harness(64.0, 2);
    let matches: Vec<_> = h
        .interior()
        .into_iter()
        .filter(|&i| h.modes().point(i).norm >= 8.0 && h.is_nonresonant(i))
        .map(|i| h.match_mode(&state, i).unwrap())
        .collect();
    assert!(matches.len() > 20);
    assert!(h.overbooked_clusters(&matches).is_empty());
    assert!(matches.iter().all(|m| !m.ambiguous));
}

#[test]
fn nonresonant_errors_decay() {
    let (_, state, h) = mathieu_harness(128.0, 2);
    let e = |k: i64| {
        let m = h.match_mode_at(&state, &Mode(vec![k])).unwrap();
        (m.lambda_matched - m.lambda_pred).abs()
    };
    assert!(e(16) > e(32) && e(32) > e(64));
    assert!(e(64) < 1e-9);
}

#[test]
fn symmetric_splitting_is_below_resolution() {
    let (setup, state, h) = mathieu_harness(128.0, 2);
    let ks: Vec<Mode> = [16i64, 24, 32].iter().map(|&k| Mode(vec![k])).collect();
    let rows = splitting_scan(&state, &setup.perturbation, &h, &ks).unwrap();
    for r in rows {
        assert!(r.difference.abs() <= h.eig.resolution());
    }
}

#[test]
fn splitting_scan_requires_symmetry() {
    let (setup, state, h) = mathieu_harness(32.0, 1);
    let mut pert = setup.perturbation.clone();
    pert.symmetric = false;
    assert!(splitting_scan(&state, &pert, &h, &[Mode(vec![10])]).is_err());
}

#[test]
fn free_floquet_spectrum_is_shifted_squares() {
    let cfg = RunConfig::preset("floquet-2d").unwrap();
    let setup = cfg.setup().unwrap();
    let kappa = setup.perturbation.kappa.clone();
    let mut free = setup.perturbation.clone();
    free.v0 = torus_nf::symexpr::FourierSymbol::zero(setup.dual.clone(), 0.0, 1.0);
    let modes = Arc::new(ModeSet::ball(setup.dual.clone(), 10.0));
    let h = weyl_matrix(&operator_symbol(&free, 2.0).unwrap(), &modes, &kappa).unwrap();
    let eig = eigensolve(&h).unwrap();
    let mut expected: Vec<f64> = modes
        .points()
        .iter()
        .map(|p| {
            let s: Vec<f64> = p.point.iter().zip(&kappa).map(|(a, b)| a - b).collect();
            norm(&s).powi(2)
        })
        .collect();
    expected.sort_by(f64::total_cmp);
    for (a, b) in eig.values.iter().zip(&expected) {
        assert!((a - b).abs() <= 1e-12 * b.max(1.0));
    }
}

#[test]
fn floquet_shift_rejects_kappa_outside_the_cell() {
    let cfg = RunConfig::preset("square-2d").unwrap();
    let setup = cfg.setup().unwrap();
    assert!(floquet_shift(&setup.perturbation, &[1.2, 0.0]).is_err());
    assert!(floquet_shift(&setup.perturbation, &[0.5]).is_err());
    assert!(floquet_shift(&setup.perturbation, &[0.5, 0.25]).is_ok());
}

#[test]
fn eigensolve_rejects_non_hermitian_input() {
    let cfg = RunConfig::preset("mathieu-1d").unwrap();
    let setup = cfg.setup().unwrap();
    let modes = Arc::new(ModeSet::ball(setup.dual.clone(), 4.0));
    let h = weyl_matrix(&operator_symbol(&setup.perturbation, 2.0).unwrap(), &modes, &[0.0]).unwrap();
    let mut m: Mat<c64> = h.matrix.clone();
    m.write(0, 1, c64::new(5.0, 0.0));
    assert!(eigensolve(&h.with_matrix(m)).is_err());
}
