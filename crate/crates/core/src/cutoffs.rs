//! Small-divisor cutoffs χ_k, d_k, χ̃_k, the radial cutoff ψ and the four-way
//! splitting of a symbol into mean, nonresonant, resonant and smoothing parts.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{dot, japanese, norm, DualLattice};
use crate::symexpr::{Expr, FourierSymbol};

pub use crate::symexpr::smooth::{bump, radial_cutoff};

/// Constants of the normal form.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NFParams {
    /// Order M of the principal part |ξ|^M.
    pub m: f64,
    /// Gap 𝔢: the perturbation has order M − 𝔢.
    pub frak_e: f64,
    pub delta: f64,
    pub tau: f64,
    pub epsilon: f64,
    pub gamma: f64,
    pub dim: usize,
}

const TOL: f64 = 1e-12;

impl NFParams {
    /// ρ = 4δ + 𝔢 − 4, the order gained per step.
    pub fn rho(&self) -> f64 {
        4.0 * self.delta + self.frak_e - 4.0
    }

    pub fn validate(&self, dual: &DualLattice) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParams(msg));
        if self.dim != dual.dim() {
            return bad(format!("dimension {} does not match the lattice ({})", self.dim, dual.dim()));
        }
        let finite = [self.m, self.frak_e, self.delta, self.tau, self.epsilon, self.gamma];
        if finite.iter().any(|x| !x.is_finite()) {
            return bad("non-finite parameter".into());
        }
        if self.m <= 0.0 {
            return bad(format!("M = {} must be positive", self.m));
        }
        if self.frak_e <= 0.0 {
            return bad(format!("gap {} must be positive", self.frak_e));
        }
        if !(1.0 - self.frak_e / 4.0 < self.delta && self.delta < 1.0) {
            return bad(format!("need 1 − 𝔢/4 < δ < 1, got δ = {} with 𝔢 = {}", self.delta, self.frak_e));
        }
        if self.rho() <= 0.0 {
            return bad(format!("ρ = {} must be positive", self.rho()));
        }
        let cap = dual.min_gap_r().min(0.5);
        if !(self.gamma > 0.0 && self.gamma < cap) {
            return bad(format!("need 0 < γ < min(r, 1/2) = {cap}, got {}", self.gamma));
        }
        if self.tau <= self.dim as f64 - 1.0 {
            return bad(format!("need τ > d − 1, got τ = {}", self.tau));
        }
        if !(self.epsilon > 0.0 && self.epsilon <= self.delta / (1.0 + self.tau) + TOL) {
            return bad(format!(
                "need 0 < ε ≤ δ/(1+τ) = {}, got ε = {}",
                self.delta / (1.0 + self.tau),
                self.epsilon
            ));
        }
        Ok(())
    }
}

/// Values of the three cutoffs at one (k, ξ).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CutoffValues {
    pub chi: f64,
    pub d: f64,
    pub chi_tilde: f64,
}

/// χ_k(ξ), d_k(ξ), χ̃_k(ξ) for a physical frequency k ≠ 0.
pub fn evaluate_cutoffs(k: &[f64], xi: &[f64], p: &NFParams) -> Result<CutoffValues> {
    let kn = norm(k);
    if kn == 0.0 {
        return Err(Error::Domain("cutoffs are defined for k ≠ 0".into()));
    }
    if k.len() != xi.len() {
        return Err(Error::DimensionMismatch { expected: k.len(), got: xi.len() });
    }
    let j = japanese(xi);
    let lin = dot(xi, k);
    let chi = bump(2.0 * kn.powf(p.tau) * lin / j.powf(p.delta), p.gamma);
    let d = if chi == 1.0 { 0.0 } else { (1.0 - chi) / lin };
    let chi_tilde = bump(kn / j.powf(p.epsilon), p.gamma);
    Ok(CutoffValues { chi, d, chi_tilde })
}

/// ξ·k.
pub fn lin_expr(k: &[f64]) -> Expr {
    Expr::linear(k)
}

/// χ_k(ξ) = χ(2|k|^τ ξ·k / ⟨ξ⟩^δ).
pub fn chi_expr(k: &[f64], p: &NFParams) -> Expr {
    let scale = 2.0 * norm(k).powf(p.tau);
    Expr::bump(p.gamma, (lin_expr(k) * Expr::jap_pow(-p.delta)).scale_real(scale))
}

/// χ̃_k(ξ) = χ(|k| / ⟨ξ⟩^ε).
pub fn chi_tilde_expr(k: &[f64], p: &NFParams) -> Expr {
    Expr::bump(p.gamma, Expr::jap_pow(-p.epsilon).scale_real(norm(k)))
}

/// d_k(ξ) = (1 − χ_k(ξ)) / (ξ·k); the zero of the first factor masks the pole.
pub fn d_expr(k: &[f64], p: &NFParams) -> Expr {
    (Expr::one() - chi_expr(k, p)) * lin_expr(k).pow(-1.0)
}

/// ψ(|ξ|).
pub fn psi_expr(p: &NFParams) -> Expr {
    Expr::radial_cutoff(p.gamma, Expr::norm())
}

/// h⁰(ξ) = ψ(|ξ|)|ξ|^M.
pub fn h0_expr(p: &NFParams) -> Expr {
    psi_expr(p) * Expr::norm_pow(p.m)
}

/// The two weights (1 − χ_k) and χ̃_k whose product selects the nonresonant part.
pub fn nonresonant_weights(k: &[f64], p: &NFParams) -> [Expr; 2] {
    [Expr::one() - chi_expr(k, p), chi_tilde_expr(k, p)]
}

#[derive(Clone, Debug)]
pub struct Split {
    pub mean: Expr,
    pub nr: FourierSymbol,
    pub res: FourierSymbol,
    pub tail: FourierSymbol,
}

/// a = ⟨a⟩ + a^(nr) + a^(res) + a^(S).
pub fn split_symbol(a: &FourierSymbol, p: &NFParams) -> Split {
    let dual = a.dual().clone();
    let delta = a.delta().min(p.delta);
    let mut nr = FourierSymbol::zero(dual.clone(), a.order(), delta);
    let mut res = FourierSymbol::zero(dual.clone(), a.order(), delta);
    let mut tail = FourierSymbol::zero(dual, f64::NEG_INFINITY, a.delta());
    let mut mean = Expr::zero();
    for (k, e) in a.terms() {
        if k.is_zero() {
            mean = e.clone();
            continue;
        }
        let kf = a.frequency(k);
        let chi = chi_expr(&kf, p);
        let chit = chi_tilde_expr(&kf, p);
        // Terms carry matching dimensions by construction.
        let _ = nr.add_term(k.clone(), Expr::product([Expr::one() - chi.clone(), chit.clone(), e.clone()]));
        let _ = res.add_term(k.clone(), Expr::product([chi, chit.clone(), e.clone()]));
        let _ = tail.add_term(k.clone(), (Expr::one() - chit) * e.clone());
    }
    Split { mean, nr, res, tail }
}
