use std::sync::Arc;

use proptest::prelude::*;

use torus_nf::cutoffs::{bump, evaluate_cutoffs, h0_expr, split_symbol, NFParams};
use torus_nf::lattice::{dot, DualLattice, Mode};
use torus_nf::symexpr::{Expr, FourierSymbol};

fn standard() -> NFParams {
    NFParams { m: 2.0, frak_e: 2.0, delta: 0.75, tau: 2.0, epsilon: 0.25, gamma: 0.4, dim: 2 }
}

fn sample() -> FourierSymbol {
    let dual = Arc::new(DualLattice::integer(2).unwrap());
    FourierSymbol::from_terms(
        dual,
        [
            (Mode(vec![0, 0]), Expr::real(0.3)),
            (Mode(vec![1, 0]), Expr::jap_pow(-0.5)),
            (Mode(vec![1, -2]), Expr::xi(1) * Expr::jap_pow(-1.0)),
            (Mode(vec![3, 1]), Expr::one()),
        ],
        0.0,
        1.0,
    )
    .unwrap()
}

proptest! {
    #[test]
    fn split_is_a_partition(x in prop::array::uniform2(0.0f64..6.3), xi in prop::array::uniform2(-40.0f64..40.0)) {
        let p = standard();
        let a = sample();
        let s = split_symbol(&a, &p);
        let total = s.mean.eval(&xi).unwrap()
            + s.nr.evaluate(&x, &xi).unwrap()
            + s.res.evaluate(&x, &xi).unwrap()
            + s.tail.evaluate(&x, &xi).unwrap();
        prop_assert!((total - a.evaluate(&x, &xi).unwrap()).norm() < 1e-12);
    }

    #[test]
    fn d_inverts_the_divisor_off_the_plateau(k in prop::array::uniform2(-3i32..4), xi in prop::array::uniform2(-50.0f64..50.0)) {
        let k = [k[0] as f64, k[1] as f64];
        prop_assume!(k != [0.0, 0.0]);
        let c = evaluate_cutoffs(&k, &xi, &standard()).unwrap();
        prop_assert!((c.d * dot(&xi, &k) - (1.0 - c.chi)).abs() < 1e-12);
        prop_assert!((0.0..=1.0).contains(&c.chi) && (0.0..=1.0).contains(&c.chi_tilde));
    }

    #[test]
    fn bump_is_even_with_plateau(t in -2.0f64..2.0) {
        prop_assert_eq!(bump(t, 0.4), bump(-t, 0.4));
        if t.abs() <= 0.4 { prop_assert_eq!(bump(t, 0.4), 1.0); }
        if t.abs() >= 0.8 { prop_assert_eq!(bump(t, 0.4), 0.0); }
    }
}

#[test]
fn h0_is_the_principal_symbol_away_from_the_origin() {
    let h0 = h0_expr(&standard());
    assert_eq!(h0.eval(&[3.0, 4.0]).unwrap().re, 25.0);
    assert_eq!(h0.eval(&[0.1, 0.0]).unwrap().re, 0.0);
}

#[test]
fn zero_frequency_has_no_cutoffs() {
    assert!(evaluate_cutoffs(&[0.0, 0.0], &[1.0, 1.0], &standard()).is_err());
}
