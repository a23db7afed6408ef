//! The C^∞ bump χ and its derivatives.
//!
//! χ(t) = 1 on |t| ≤ γ, 0 on |t| ≥ 2γ, and S((2γ − |t|)/γ) in between, where
//! S(u) = f(u) / (f(u) + f(1 − u)) with f(u) = exp(−1/u). Derivatives of S are
//! computed with truncated Taylor arithmetic, so every order is exact up to
//! roundoff.

/// Taylor coefficients c_0..c_n of a univariate function at a point.
#[derive(Clone, Debug)]
struct Jet(Vec<f64>);

impl Jet {
    /// 1/(a + s·ε) expanded in ε.
    fn reciprocal_linear(a: f64, s: f64, n: usize) -> Jet {
        let mut c = Vec::with_capacity(n + 1);
        let mut v = 1.0 / a;
        for _ in 0..=n {
            c.push(v);
            v *= -s / a;
        }
        Jet(c)
    }

    fn exp(&self) -> Jet {
        let a = &self.0;
        let n = a.len();
        let mut b = vec![0.0; n];
        b[0] = a[0].exp();
        for m in 1..n {
            let mut acc = 0.0;
            for k in 1..=m {
                acc += k as f64 * a[k] * b[m - k];
            }
            b[m] = acc / m as f64;
        }
        Jet(b)
    }

    fn neg(mut self) -> Jet {
        self.0.iter_mut().for_each(|x| *x = -*x);
        self
    }

    fn add(&self, other: &Jet) -> Jet {
        Jet(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    fn div(&self, y: &Jet) -> Jet {
        let n = self.0.len();
        let mut c = vec![0.0; n];
        for m in 0..n {
            let mut acc = self.0[m];
            for k in 1..=m {
                acc -= y.0[k] * c[m - k];
            }
            c[m] = acc / y.0[0];
        }
        Jet(c)
    }
}

/// p-th derivative of the smooth step S at u ∈ (0, 1).
fn step_derivative(p: u32, u: f64) -> f64 {
    let n = p as usize;
    // f(u + ε) = exp(−1/(u + ε)), f(1 − u − ε) = exp(−1/((1 − u) − ε)).
    let f1 = Jet::reciprocal_linear(u, 1.0, n).neg().exp();
    let f2 = Jet::reciprocal_linear(1.0 - u, -1.0, n).neg().exp();
    let s = f1.div(&f1.add(&f2));
    let factorial: f64 = (1..=n).map(|k| k as f64).product();
    s.0[n] * factorial
}

/// χ^{(p)}(t) for the bump with plateau half-width γ.
pub fn bump_derivative(p: u32, gamma: f64, t: f64) -> f64 {
    let a = t.abs();
    if a <= gamma {
        return if p == 0 { 1.0 } else { 0.0 };
    }
    if a >= 2.0 * gamma {
        return 0.0;
    }
    let u = (2.0 * gamma - a) / gamma;
    // d/dt u = −sign(t)/γ.
    let du = -t.signum() / gamma;
    step_derivative(p, u) * du.powi(p as i32)
}

/// χ(t): even, 1 on [−γ, γ], 0 outside [−2γ, 2γ].
pub fn bump(t: f64, gamma: f64) -> f64 {
    bump_derivative(0, gamma, t)
}

/// ψ(t) = 1 − χ(t).
pub fn radial_cutoff(t: f64, gamma: f64) -> f64 {
    1.0 - bump(t, gamma)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plateau_and_support() {
        assert_eq!(bump(0.0, 0.4), 1.0);
        assert_eq!(bump(0.4, 0.4), 1.0);
        assert_eq!(bump(1.0, 0.4), 0.0);
        assert_eq!(bump(-0.8, 0.4), 0.0);
        let v = bump(0.6, 0.4);
        assert!(v > 0.0 && v < 1.0);
        assert!((v - 0.5).abs() < 1e-14, "midpoint of the transition is 1/2 by symmetry");
        assert_eq!(radial_cutoff(1.0, 0.4), 1.0);
    }

    #[test]
    fn monotone_on_transition() {
        let g = 0.4;
        let mut prev = bump(g, g);
        for i in 1..=100 {
            let t = g + g * i as f64 / 100.0;
            let v = bump(t, g);
            assert!(v <= prev, "not monotone at {t}");
            prev = v;
        }
    }

    #[test]
    fn even() {
        for i in 0..50 {
            let t = i as f64 * 0.019;
            for p in 0..5 {
                let s = if p % 2 == 0 { 1.0 } else { -1.0 };
                assert!((bump_derivative(p, 0.4, -t) - s * bump_derivative(p, 0.4, t)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let g = 0.3;
        let h = 1e-6;
        for i in 4..37 {
            let t = g + g * i as f64 / 40.0;
            for p in 0..5 {
                let fd = (bump_derivative(p, g, t + h) - bump_derivative(p, g, t - h)) / (2.0 * h);
                let exact = bump_derivative(p + 1, g, t);
                let scale = g.powi(-(p as i32) - 1);
                assert!(
                    (fd - exact).abs() <= 1e-5 * (scale + exact.abs()),
                    "p={p} t={t}: fd {fd} vs {exact}"
                );
            }
        }
    }

    #[test]
    fn step_is_antisymmetric_about_half() {
        // S(u) + S(1 − u) = 1.
        for i in 1..20 {
            let u = i as f64 / 20.0;
            assert!((step_derivative(0, u) + step_derivative(0, 1.0 - u) - 1.0).abs() < 1e-15);
        }
    }
}
