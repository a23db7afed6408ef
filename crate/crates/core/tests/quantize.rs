use std::sync::Arc;

use faer::complex_native::c64;
use faer::Mat;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use torus_nf::lattice::{DualLattice, Mode};
use torus_nf::quantize::{
    classical_matrix, exp_conjugate, exp_i, hermitian_defect, unitarity_defect, weyl_matrix, ModeSet,
};
use torus_nf::symexpr::{Expr, FourierSymbol, C64};
use torus_nf::verify::random_symbol;

fn z1() -> Arc<DualLattice> {
    Arc::new(DualLattice::integer(1).unwrap())
}

#[test]
fn weyl_entries_sit_at_midpoints() {
    let dual = z1();
    let a = FourierSymbol::from_terms(dual.clone(), [(Mode(vec![2]), Expr::xi(0) * Expr::xi(0))], 2.0, 1.0).unwrap();
    let modes = Arc::new(ModeSet::ball(dual, 6.0));
    let w = weyl_matrix(&a, &modes, &[0.0]).unwrap();
    let c = classical_matrix(&a, &modes, &[0.0]).unwrap();
    let col = modes.index_of(&Mode(vec![1])).unwrap();
    let row = modes.index_of(&Mode(vec![3])).unwrap();
    assert_eq!(w.entry(row, col), C64::new(4.0, 0.0));
    assert_eq!(c.entry(row, col), C64::new(1.0, 0.0));
    assert_eq!(w.entry(col, row), C64::new(0.0, 0.0));
}

#[test]
fn kappa_shifts_the_evaluation_point() {
    let dual = z1();
    let a = FourierSymbol::multiplier(dual.clone(), Expr::xi(0), 1.0, 1.0);
    let modes = Arc::new(ModeSet::ball(dual, 3.0));
    let w = weyl_matrix(&a, &modes, &[0.25]).unwrap();
    let i = modes.index_of(&Mode(vec![2])).unwrap();
    assert_eq!(w.entry(i, i), C64::new(1.75, 0.0));
}

#[test]
fn support_beyond_twice_the_radius_is_rejected() {
    let dual = z1();
    let a = FourierSymbol::from_terms(dual.clone(), [(Mode(vec![9]), Expr::one())], 0.0, 1.0).unwrap();
    let modes = Arc::new(ModeSet::ball(dual, 4.0));
    assert!(weyl_matrix(&a, &modes, &[0.0]).is_err());
}

#[test]
fn real_symbols_give_hermitian_matrices() {
    let dual = Arc::new(DualLattice::integer(2).unwrap());
    let modes = Arc::new(ModeSet::ball(dual.clone(), 7.0));
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..10 {
        let a = random_symbol(&dual, &mut rng, true);
        let w = weyl_matrix(&a, &modes, &[0.1, 0.3]).unwrap();
        assert!(hermitian_defect(&w.matrix, None) < 1e-12);
    }
}

#[test]
fn exp_i_is_unitary_and_conjugation_preserves_spectrum() {
    let dual = Arc::new(DualLattice::integer(2).unwrap());
    let modes = Arc::new(ModeSet::ball(dual.clone(), 5.0));
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let g = weyl_matrix(&random_symbol(&dual, &mut rng, true), &modes, &[0.0, 0.0]).unwrap();
    let h = weyl_matrix(&random_symbol(&dual, &mut rng, true), &modes, &[0.0, 0.0]).unwrap();
    let u = exp_i(&g.matrix).unwrap();
    assert!(unitarity_defect(&u) < 1e-12);
    let conj = exp_conjugate(&h, &g).unwrap();
    let direct: Mat<c64> = &u * &h.matrix * u.adjoint();
    let mut worst = 0.0_f64;
    for i in 0..modes.len() {
        for j in 0..modes.len() {
            worst = worst.max((conj.matrix.read(i, j) - direct.read(i, j)).abs());
        }
    }
    assert!(worst < 1e-12);
    let tr = |m: &Mat<c64>| (0..m.nrows()).map(|i| m.read(i, i).re).sum::<f64>();
    assert!((tr(&conj.matrix) - tr(&h.matrix)).abs() < 1e-9);
}

#[test]
fn exp_i_rejects_non_hermitian_generators() {
    let mut m = Mat::<c64>::zeros(2, 2);
    m.write(0, 1, c64::new(1.0, 0.0));
    assert!(exp_i(&m).is_err());
}

#[test]
fn exp_conjugate_requires_a_shared_basis() {
    let dual = z1();
    let a = Arc::new(ModeSet::ball(dual.clone(), 3.0));
    let b = Arc::new(ModeSet::ball(dual.clone(), 3.0));
    let s = FourierSymbol::multiplier(dual, Expr::one(), 0.0, 1.0);
    let h = weyl_matrix(&s, &a, &[0.0]).unwrap();
    let g = weyl_matrix(&s, &b, &[0.0]).unwrap();
    assert!(exp_conjugate(&h, &g).is_err());
}

#[test]
fn dumps_have_the_documented_layout() {
    let dual = z1();
    let modes = Arc::new(ModeSet::ball(dual.clone(), 2.0));
    let s = FourierSymbol::multiplier(dual, Expr::xi(0), 1.0, 1.0);
    let w = weyl_matrix(&s, &modes, &[0.0]).unwrap();
    let mut bin = Vec::new();
    w.write_binary(&mut bin).unwrap();
    assert_eq!(bin.len(), 16 + 5 * 8 + 25 * 16);
    assert_eq!(u64::from_le_bytes(bin[0..8].try_into().unwrap()), 5);
    let mut text = Vec::new();
    w.write_text(&mut text).unwrap();
    let text = String::from_utf8(text).unwrap();
    assert_eq!(text.lines().next(), Some("5 1"));
    assert_eq!(text.lines().count(), 1 + 5 + 5);
}

#[test]
fn interior_respects_the_margin() {
    let modes = ModeSet::ball(Arc::new(DualLattice::integer(2).unwrap()), 10.0);
    for i in modes.interior(3.0) {
        assert!(modes.point(i).norm <= 7.0 + 1e-12);
    }
    assert!(modes.interior(20.0).is_empty());
}
