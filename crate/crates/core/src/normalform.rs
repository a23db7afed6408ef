//! The homological equation and the normal-form iteration
//! h_n = h⁰ + z^(n) + v_n ↦ h_{n+1} = e^{ad g_{n+1}} h_n.

use std::sync::{Arc, OnceLock};

use serde::Serialize;

use crate::calculus::{lie_expansion, DroppedTerm, ExpansionConfig, LieExpansion, OrderedTerm};
use crate::cutoffs::{chi_tilde_expr, d_expr, h0_expr, nonresonant_weights, psi_expr, split_symbol, NFParams};
use crate::error::{Error, Result};
use crate::lattice::{norm, DualLattice};
use crate::symexpr::{Expr, FourierSymbol, Kind, Tape, C64};

const ORDER_SLACK: f64 = 1e-9;

/// The perturbation v₀ of (−Δ)^{M/2}.
#[derive(Clone, Debug)]
pub struct Perturbation {
    pub v0: FourierSymbol,
    /// v₀(x, −ξ) = v₀(x, ξ).
    pub symmetric: bool,
    /// Floquet parameter; symbols are evaluated at ξ − κ.
    pub kappa: Vec<f64>,
}

impl Perturbation {
    /// Checks reality (and evenness when `symmetric`) at sampled points.
    pub fn new(v0: FourierSymbol, symmetric: bool) -> Result<Self> {
        let defect = v0.reality_defect(40, 50.0, 11)?;
        if defect > 1e-10 {
            return Err(Error::NotReal(defect));
        }
        if symmetric {
            let defect = v0.parity_defect(1.0, 40, 50.0, 12)?;
            if defect > 1e-10 {
                return Err(Error::Precondition(format!(
                    "perturbation flagged symmetric but v(x,−ξ) − v(x,ξ) reaches {defect:e}"
                )));
            }
        }
        let kappa = vec![0.0; v0.dim()];
        Ok(Perturbation { v0, symmetric, kappa })
    }

    /// Largest growth exponent of the coefficients along sampled rays, checked
    /// against the declared order.
    pub fn check_order(&self, declared: f64) -> Result<f64> {
        let d = self.dim();
        let (r1, r2) = (1e3, 1e4);
        let mut worst = f64::NEG_INFINITY;
        for (k, e) in self.v0.terms() {
            for ray in 0..8 {
                let dir: Vec<f64> = (0..d)
                    .map(|i| ((ray as f64 + 0.5) * (i as f64 + 1.0) * 0.7853981633974483 + i as f64).cos())
                    .collect();
                let n = norm(&dir);
                if n < 1e-3 {
                    continue;
                }
                let at = |r: f64| -> Result<f64> {
                    let xi: Vec<f64> = dir.iter().map(|c| c * r / n).collect();
                    Ok(e.eval(&xi)?.norm())
                };
                let (a, b) = (at(r1)?, at(r2)?);
                if a > 0.0 && b > 0.0 {
                    worst = worst.max((b / a).ln() / (r2 / r1).ln());
                }
            }
            if worst > declared + 0.05 {
                return Err(Error::Hypothesis(format!(
                    "coefficient at k = {k} grows like ⟨ξ⟩^{worst:.3}, above the declared order {declared}"
                )));
            }
        }
        Ok(worst)
    }

    pub fn dim(&self) -> usize {
        self.v0.dim()
    }

    pub fn dual(&self) -> &Arc<DualLattice> {
        self.v0.dual()
    }
}

/// Depth and floor settings of a normal-form run.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct NfConfig {
    pub n_target: usize,
    pub expansion: ExpansionConfig,
}

impl NfConfig {
    /// Floor M − 𝔢 − (n_target + 1)ρ with the given expansion depth.
    pub fn new(p: &NFParams, n_target: usize, j_max: usize) -> Self {
        let floor = p.m - p.frak_e - (n_target as f64 + 1.0) * p.rho();
        NfConfig { n_target, expansion: ExpansionConfig { moyal_depth: j_max, lie_depth: j_max, floor } }
    }

    pub fn with_floor(mut self, floor: f64) -> Self {
        self.expansion.floor = floor;
        self
    }
}

/// One component of v_n with its provenance.
#[derive(Clone, Debug)]
pub struct Component {
    pub term: OrderedTerm,
    /// Smoothing components (homological defect, cutoff tail) carry order −∞.
    pub smoothing: bool,
}

/// Summary of one normal-form step.
#[derive(Clone, Debug, Serialize)]
pub struct StepLog {
    pub step: usize,
    pub generator_order: f64,
    pub generator_support: usize,
    pub components: Vec<ComponentInfo>,
    pub dropped: Vec<DroppedTerm>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ComponentInfo {
    pub label: String,
    pub order: f64,
    pub support: usize,
}

/// Data of h_n = h⁰ + z^(n) + v_n after n steps.
#[derive(Clone, Debug)]
pub struct NFState {
    pub n: usize,
    pub params: NFParams,
    pub config: NfConfig,
    pub kappa: Vec<f64>,
    pub h0: FourierSymbol,
    /// z_0, …, z_{n−1}.
    pub z_mean: Vec<Expr>,
    /// (order, δ) of each z_j.
    pub z_meta: Vec<(f64, f64)>,
    pub z_res: FourierSymbol,
    pub v: Vec<Component>,
    pub generators: Vec<FourierSymbol>,
    pub log: Vec<StepLog>,
    z_tape: OnceLock<Tape>,
}

/// Removes one copy of each factor in `ws` from the product `e`.
fn strip_factors(e: &Expr, ws: &[Expr]) -> Option<Expr> {
    let (coef, body) = match e.kind() {
        Kind::Sum { constant, terms } if *constant == C64::new(0.0, 0.0) && terms.len() == 1 => {
            (terms[0].0, terms[0].1.clone())
        }
        _ => (C64::new(1.0, 0.0), e.clone()),
    };
    let factors = match body.kind() {
        Kind::Mul(fs) => fs.clone(),
        _ => vec![body],
    };
    let mut bases: Vec<(Expr, f64)> = factors
        .iter()
        .map(|f| match f.kind() {
            Kind::Pow { base, exp } => (base.clone(), *exp),
            _ => (f.clone(), 1.0),
        })
        .collect();
    for w in ws {
        let slot = bases.iter_mut().find(|(b, e)| b.ptr_eq(w) && *e >= 1.0)?;
        slot.1 -= 1.0;
    }
    Some(Expr::product(bases.into_iter().map(|(b, e)| b.pow(e))).scale(coef))
}

/// g with ĝ_k = (1/M)·ψ(|ξ|)·χ̃_k·|ξ|^{2−M}·(−i)·d_k·â_k, where â_k is the
/// unfiltered coefficient behind the nonresonant term (1 − χ_k)χ̃_k â_k.
pub fn solve_homological(a_nr: &FourierSymbol, p: &NFParams) -> Result<FourierSymbol> {
    let delta = a_nr.delta().min(p.delta);
    let order = 2.0 + a_nr.order() - p.m - p.delta;
    let mut g = FourierSymbol::zero(a_nr.dual().clone(), order, delta);
    let common = Expr::product([psi_expr(p), Expr::norm_pow(2.0 - p.m)]).scale(C64::new(0.0, -1.0 / p.m));
    for (k, e) in a_nr.terms() {
        if k.is_zero() {
            return Err(Error::Precondition("nonresonant part has a nonzero mean term".into()));
        }
        let kf = a_nr.frequency(k);
        let raw = strip_factors(e, &nonresonant_weights(&kf, p)).ok_or_else(|| {
            Error::Precondition(format!("term at k = {k} is not of the form (1 − χ_k)χ̃_k·â"))
        })?;
        g.add_term(k.clone(), Expr::product([common.clone(), chi_tilde_expr(&kf, p), d_expr(&kf, p), raw]))?;
    }
    Ok(g)
}

impl NFState {
    /// State with v = v₀ and no normal-form terms yet.
    pub fn initial(pert: &Perturbation, p: &NFParams, config: NfConfig) -> Result<Self> {
        p.validate(pert.dual())?;
        if pert.dim() != p.dim {
            return Err(Error::DimensionMismatch { expected: p.dim, got: pert.dim() });
        }
        let dual = pert.dual().clone();
        let h0 = FourierSymbol::multiplier(dual.clone(), h0_expr(p), p.m, 1.0);
        let v0 = pert.v0.clone().with_order(p.m - p.frak_e);
        Ok(NFState {
            n: 0,
            params: p.clone(),
            config,
            kappa: pert.kappa.clone(),
            h0,
            z_mean: Vec::new(),
            z_meta: Vec::new(),
            z_res: FourierSymbol::zero(dual, p.m - p.frak_e, p.delta),
            v: vec![Component { term: OrderedTerm::new(v0, "v0"), smoothing: false }],
            generators: Vec::new(),
            log: Vec::new(),
            z_tape: OnceLock::new(),
        })
    }

    pub fn dual(&self) -> &Arc<DualLattice> {
        self.h0.dual()
    }

    /// Declared order M − 𝔢 − nρ of v_n.
    pub fn v_order(&self, n: usize) -> f64 {
        self.params.m - self.params.frak_e - n as f64 * self.params.rho()
    }

    /// v_n as a single symbol.
    pub fn v_symbol(&self) -> Result<FourierSymbol> {
        self.collect_v(|_| true)
    }

    /// The components of v_n of finite order.
    pub fn v_active(&self) -> Result<FourierSymbol> {
        self.collect_v(|c| !c.smoothing)
    }

    fn collect_v(&self, keep: impl Fn(&Component) -> bool) -> Result<FourierSymbol> {
        let parts: Vec<&Component> = self.v.iter().filter(|c| keep(c)).collect();
        let delta = parts.iter().map(|c| c.term.sym.delta()).fold(1.0, f64::min);
        FourierSymbol::sum_all(self.dual().clone(), parts.iter().map(|c| &c.term.sym), self.v_order(self.n), delta)
    }

    /// One step of the iteration. Smoothing components are carried over
    /// unchanged: conjugating them only produces further smoothing terms.
    pub fn step(&self) -> Result<NFState> {
        let p = &self.params;
        let n = self.n;
        let v = self.v_active()?;
        let split = split_symbol(&v, p);
        let g = solve_homological(&split.nr, p)?;
        let dual = self.dual().clone();

        let mut sources = vec![OrderedTerm::new(self.h0.clone(), "h0")];
        for (j, (z, (order, delta))) in self.z_mean.iter().zip(&self.z_meta).enumerate() {
            if !z.is_zero() {
                sources.push(OrderedTerm::new(FourierSymbol::multiplier(dual.clone(), z.clone(), *order, *delta), format!("z{j}")));
            }
        }
        if !self.z_res.is_empty() {
            sources.push(OrderedTerm::new(self.z_res.clone(), "zres"));
        }
        if !v.is_empty() {
            sources.push(OrderedTerm::new(v.clone(), format!("v{n}")));
        }
        let LieExpansion { terms, dropped } = lie_expansion(&sources, &g, &self.config.expansion)?;

        // {h⁰; g} joins v^(nr) as the homological defect.
        let mut defect_parts = vec![split.nr.clone()];
        let mut components = Vec::new();
        for t in terms {
            if t.level == 1 && t.source == "h0" && t.chain == [1] {
                defect_parts.push(t.term.sym);
            } else {
                components.push(Component { term: t.term, smoothing: false });
            }
        }
        let defect = FourierSymbol::sum_all(dual.clone(), defect_parts.iter(), f64::NEG_INFINITY, split.nr.delta())?;
        let mut next_v: Vec<Component> = self.v.iter().filter(|c| c.smoothing).cloned().collect();
        if !defect.is_empty() {
            next_v.push(Component { term: OrderedTerm::new(defect, format!("defect{n}")), smoothing: true });
        }
        if !split.tail.is_empty() {
            next_v.push(Component { term: OrderedTerm::new(split.tail.clone(), format!("tail{n}")), smoothing: true });
        }
        let declared = self.v_order(n + 1);
        for c in &components {
            if c.term.order() > declared + ORDER_SLACK {
                return Err(Error::OrderConsistency {
                    label: c.term.label.clone(),
                    order: c.term.order(),
                    declared,
                });
            }
        }
        next_v.extend(components);

        let mut z_mean = self.z_mean.clone();
        z_mean.push(split.mean.clone());
        let mut z_meta = self.z_meta.clone();
        z_meta.push((v.order(), v.delta()));
        let z_res = self.z_res.plus(&split.res)?.with_order(self.z_res.order());

        let log = StepLog {
            step: n + 1,
            generator_order: g.order(),
            generator_support: g.len(),
            components: next_v
                .iter()
                .map(|c| ComponentInfo {
                    label: c.term.label.clone(),
                    order: c.term.order(),
                    support: c.term.sym.len(),
                })
                .collect(),
            dropped,
        };
        let mut logs = self.log.clone();
        logs.push(log);
        let mut generators = self.generators.clone();
        generators.push(g);
        Ok(NFState {
            n: n + 1,
            params: p.clone(),
            config: self.config,
            kappa: self.kappa.clone(),
            h0: self.h0.clone(),
            z_mean,
            z_meta,
            z_res,
            v: next_v,
            generators,
            log: logs,
            z_tape: OnceLock::new(),
        })
    }

    fn z_tape(&self) -> &Tape {
        self.z_tape.get_or_init(|| Tape::compile(&self.z_mean))
    }

    /// z_j(ξ − κ) for j < n at a lattice point ξ.
    pub fn z_values(&self, xi: &[f64]) -> Result<Vec<C64>> {
        let shifted = self.shifted(xi)?;
        if self.z_mean.is_empty() {
            return Ok(Vec::new());
        }
        self.z_tape().eval(&shifted)
    }

    fn shifted(&self, xi: &[f64]) -> Result<Vec<f64>> {
        if xi.len() != self.params.dim {
            return Err(Error::DimensionMismatch { expected: self.params.dim, got: xi.len() });
        }
        Ok(xi.iter().zip(&self.kappa).map(|(a, k)| a - k).collect())
    }

    /// λ_n(ξ) = |ξ − κ|^M + Σ_{j<n} z_j(ξ − κ).
    pub fn lambda(&self, xi: &[f64]) -> Result<f64> {
        let shifted = self.shifted(xi)?;
        let r = norm(&shifted);
        if r < 2.0 * self.params.gamma {
            return Err(Error::Precondition(format!("|ξ − κ| = {r} is below 2γ")));
        }
        let z: C64 = self.z_values(xi)?.into_iter().sum();
        if z.im.abs() > 1e-10 {
            return Err(Error::NotReal(z.im));
        }
        Ok(r.powf(self.params.m) + z.re)
    }

    /// h⁰ + z^(n) + v_n at (x, ξ) (no Floquet shift).
    pub fn total_symbol(&self) -> Result<FourierSymbol> {
        let dual = self.dual().clone();
        let mut parts = vec![self.h0.clone(), self.z_res.clone(), self.v_symbol()?];
        for z in &self.z_mean {
            parts.push(FourierSymbol::multiplier(dual.clone(), z.clone(), self.params.m, self.params.delta));
        }
        FourierSymbol::sum_all(dual, parts.iter(), self.params.m, self.params.delta)
    }

    /// JSON description of every step: supports, printed coefficients, orders.
    pub fn export(&self) -> serde_json::Value {
        use serde_json::json;
        let sym_json = |s: &FourierSymbol| {
            json!({
                "order": finite_or_null(s.order()),
                "delta": s.delta(),
                "terms": s.terms().iter().map(|(k, e)| json!({"k": k.coords(), "expr": print_capped(e)})).collect::<Vec<_>>(),
            })
        };
        json!({
            "n": self.n,
            "params": self.params,
            "rho": self.params.rho(),
            "config": self.config,
            "kappa": self.kappa,
            "z_mean": self.z_mean.iter().zip(&self.z_meta).enumerate().map(|(j, (z, (o, _)))| json!({
                "j": j, "order": o, "expr": print_capped(z)
            })).collect::<Vec<_>>(),
            "z_res": sym_json(&self.z_res),
            "generators": self.generators.iter().map(sym_json).collect::<Vec<_>>(),
            "v": self.v.iter().map(|c| json!({
                "label": c.term.label, "order": finite_or_null(c.term.order()), "smoothing": c.smoothing,
                "support": c.term.sym.terms().keys().map(|k| k.coords().to_vec()).collect::<Vec<_>>(),
            })).collect::<Vec<_>>(),
            "steps": self.log,
        })
    }
}

fn finite_or_null(x: f64) -> serde_json::Value {
    if x.is_finite() {
        serde_json::json!(x)
    } else {
        serde_json::Value::String(if x < 0.0 { "-inf".into() } else { "inf".into() })
    }
}

const PRINT_CAP: usize = 2000;

/// Printed expression, or a size summary when the tree form is too large.
pub fn print_capped(e: &Expr) -> String {
    if e.tree_size(PRINT_CAP + 1) <= PRINT_CAP {
        e.to_string()
    } else {
        format!("<expression with {} shared nodes>", e.node_count())
    }
}

/// n_target steps from v = v₀.
pub fn run(pert: &Perturbation, p: &NFParams, config: NfConfig) -> Result<NFState> {
    let mut s = NFState::initial(pert, p, config)?;
    for _ in 0..config.n_target {
        s = s.step()?;
    }
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn strip_recovers_raw_coefficient() {
        let w1 = Expr::one() - Expr::bump(0.4, Expr::xi(0));
        let w2 = Expr::bump(0.4, Expr::jap_pow(-0.5));
        let raw = Expr::jap_pow(0.5).scale_real(0.5);
        let e = Expr::product([w1.clone(), w2.clone(), raw.clone()]);
        assert!(strip_factors(&e, &[w1.clone(), w2.clone()]).unwrap().ptr_eq(&raw));
        let e = Expr::product([w1.clone(), w2.clone()]);
        assert!(strip_factors(&e, &[w1.clone(), w2.clone()]).unwrap().is_one());
        assert!(strip_factors(&raw, &[w1, w2]).is_none());
    }
}
