//! Symbol calculus on [`FourierSymbol`]s: Poisson bracket, composition terms
//! σ_j, the truncated Moyal bracket, Lie series and Weyl → classical conversion.
//!
//! x-derivatives act on the k-th term as multiplication by i·k and cost no
//! order; every ξ-derivative lowers the order by the symbol's δ.

use std::collections::BTreeMap;

use num_rational::Ratio;
use num_traits::ToPrimitive;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lattice::Mode;
use crate::symexpr::{Expr, FourierSymbol, C64};

/// A symbol together with the rule that produced it.
#[derive(Clone, Debug)]
pub struct OrderedTerm {
    pub sym: FourierSymbol,
    pub label: String,
}

impl OrderedTerm {
    pub fn new(sym: FourierSymbol, label: impl Into<String>) -> Self {
        OrderedTerm { sym, label: label.into() }
    }

    pub fn order(&self) -> f64 {
        self.sym.order()
    }
}

/// A term discarded because its order fell below the floor.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DroppedTerm {
    pub label: String,
    pub order: f64,
}

/// All multi-indices α ∈ ℕ^d with |α| = n, in lexicographic order.
pub fn multi_indices(d: usize, n: usize) -> Vec<Vec<usize>> {
    if d == 0 {
        return if n == 0 { vec![vec![]] } else { vec![] };
    }
    let mut out = Vec::new();
    for first in (0..=n).rev() {
        for mut rest in multi_indices(d - 1, n - first) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

fn factorial(n: usize) -> i64 {
    (1..=n as i64).product()
}

fn multi_factorial(alpha: &[usize]) -> i64 {
    alpha.iter().map(|&a| factorial(a)).product()
}

/// (1/2)^{|α|} (−1/2)^{|β|} / (α! β!).
pub fn sigma_coefficient(alpha: &[usize], beta: &[usize]) -> Ratio<i64> {
    let na: usize = alpha.iter().sum();
    let nb: usize = beta.iter().sum();
    let sign = if nb % 2 == 0 { 1 } else { -1 };
    Ratio::new(sign, (1i64 << (na + nb)) * multi_factorial(alpha) * multi_factorial(beta))
}

/// (i k)^β.
fn x_derivative_factor(k: &[f64], beta: &[usize]) -> C64 {
    let n: usize = beta.iter().sum();
    let real: f64 = k.iter().zip(beta).map(|(kc, &b)| kc.powi(b as i32)).product();
    C64::new(0.0, 1.0).powi(n as i32) * real
}

/// (−i)^j = 1/i^j.
fn inv_i_pow(j: usize) -> C64 {
    C64::new(0.0, -1.0).powi(j as i32)
}

type Accumulator = BTreeMap<Mode, Vec<Expr>>;

fn finish(acc: Accumulator, like: &FourierSymbol, order: f64, delta: f64) -> FourierSymbol {
    let terms = acc.into_iter().map(|(k, es)| (k, Expr::sum(es)));
    FourierSymbol::from_terms(like.dual().clone(), terms, order, delta)
        .unwrap_or_else(|_| FourierSymbol::zero(like.dual().clone(), order, delta))
}

/// Adds c·(ik₁)^β(ik₂)^α ∂_ξ^α â_{k₁} ∂_ξ^β b̂_{k₂} into `acc`; returns whether anything was added.
fn accumulate_pair(
    a: &FourierSymbol,
    b: &FourierSymbol,
    alpha: &[usize],
    beta: &[usize],
    coef: C64,
    acc: Option<&mut Accumulator>,
) -> bool {
    let mut any = false;
    let mut acc = acc;
    let b_terms: Vec<(Mode, Vec<f64>, Expr)> = b
        .terms()
        .iter()
        .filter_map(|(k2, eb)| {
            let db = eb.derivative_multi(beta);
            (!db.is_zero()).then(|| (k2.clone(), b.frequency(k2), db))
        })
        .collect();
    if b_terms.is_empty() {
        return false;
    }
    for (k1, ea) in a.terms() {
        let f1 = x_derivative_factor(&a.frequency(k1), beta);
        if f1 == C64::new(0.0, 0.0) {
            continue;
        }
        let da = ea.derivative_multi(alpha);
        if da.is_zero() {
            continue;
        }
        for (k2, freq2, db) in &b_terms {
            let f2 = x_derivative_factor(freq2, alpha);
            if f2 == C64::new(0.0, 0.0) {
                continue;
            }
            any = true;
            match acc.as_deref_mut() {
                Some(acc) => acc
                    .entry(k1 + k2)
                    .or_default()
                    .push(Expr::product([da.clone(), db.clone()]).scale(coef * f1 * f2)),
                None => return true,
            }
        }
    }
    any
}

/// σ_j restricted to the pieces with |α| = p, |β| = j − p. Pieces whose order lies below
/// `floor` are skipped and recorded in `dropped`.
fn sigma_core(
    a: &FourierSymbol,
    b: &FourierSymbol,
    j: usize,
    floor: Option<f64>,
    label: &str,
    dropped: &mut Vec<DroppedTerm>,
) -> Result<FourierSymbol> {
    a.check_compatible(b)?;
    let d = a.dim();
    let phase = inv_i_pow(j);
    let mut acc = Accumulator::new();
    let mut order = f64::NEG_INFINITY;
    for p in 0..=j {
        let q = j - p;
        let piece_order = a.order() - a.delta() * p as f64 + b.order() - b.delta() * q as f64;
        let below = floor.is_some_and(|f| piece_order < f);
        let alphas = multi_indices(d, p);
        let betas = multi_indices(d, q);
        let mut nonempty = false;
        for alpha in &alphas {
            for beta in &betas {
                let c = sigma_coefficient(alpha, beta).to_f64().unwrap_or(0.0);
                let target = if below { None } else { Some(&mut acc) };
                nonempty |= accumulate_pair(a, b, alpha, beta, phase * c, target);
                if below && nonempty {
                    break;
                }
            }
            if below && nonempty {
                break;
            }
        }
        if nonempty {
            if below {
                dropped.push(DroppedTerm { label: format!("{label}[|α|={p},|β|={q}]"), order: piece_order });
            } else {
                order = order.max(piece_order);
            }
        }
    }
    Ok(finish(acc, a, order, a.delta().min(b.delta())))
}

/// σ_j(a, b) = i^{−j} Σ_{|α|+|β|=j} (1/2)^{|α|}(−1/2)^{|β|}/(α!β!) (∂_x^β ∂_ξ^α a)(∂_x^α ∂_ξ^β b).
pub fn sigma_j(a: &FourierSymbol, b: &FourierSymbol, j: usize) -> Result<FourierSymbol> {
    sigma_core(a, b, j, None, "", &mut Vec::new())
}

/// {a; b} = −∇_ξ a·∇_x b + ∇_x a·∇_ξ b.
pub fn poisson(a: &FourierSymbol, b: &FourierSymbol) -> Result<FourierSymbol> {
    a.check_compatible(b)?;
    let d = a.dim();
    let i = C64::new(0.0, 1.0);
    let mut acc = Accumulator::new();
    let mut order = f64::NEG_INFINITY;
    let mut mark = |o: f64| order = order.max(o);
    for (k1, ea) in a.terms() {
        let f1 = a.frequency(k1);
        for (k2, eb) in b.terms() {
            let f2 = b.frequency(k2);
            let mut parts = Vec::new();
            for axis in 0..d {
                if f2[axis] != 0.0 {
                    let da = ea.derivative(axis);
                    if !da.is_zero() {
                        parts.push((-i * f2[axis], Expr::product([da, eb.clone()])));
                        mark(a.order() - a.delta() + b.order());
                    }
                }
                if f1[axis] != 0.0 {
                    let db = eb.derivative(axis);
                    if !db.is_zero() {
                        parts.push((i * f1[axis], Expr::product([ea.clone(), db])));
                        mark(a.order() + b.order() - b.delta());
                    }
                }
            }
            if !parts.is_empty() {
                acc.entry(k1 + k2).or_default().push(Expr::linear_combination(parts));
            }
        }
    }
    Ok(finish(acc, a, order, a.delta().min(b.delta())))
}

/// Odd-j Moyal pieces −2i·σ_j(a, b), j ≤ `jmax`, with floor-based pruning.
pub fn moyal_terms(
    a: &FourierSymbol,
    b: &FourierSymbol,
    jmax: usize,
    floor: Option<f64>,
    label: &str,
    dropped: &mut Vec<DroppedTerm>,
) -> Result<Vec<(usize, FourierSymbol)>> {
    let mut out = Vec::new();
    let minus_two_i = C64::new(0.0, -2.0);
    for j in (1..=jmax).step_by(2) {
        let s = sigma_core(a, b, j, floor, &format!("{label}σ{j}"), dropped)?;
        if !s.is_empty() {
            out.push((j, s.scaled(minus_two_i)));
        }
    }
    Ok(out)
}

/// {a, b}_M truncated at j ≤ J: Σ_{odd j} −2i σ_j(a, b).
pub fn moyal_truncated(a: &FourierSymbol, b: &FourierSymbol, jmax: usize) -> Result<FourierSymbol> {
    let pieces = moyal_terms(a, b, jmax, None, "", &mut Vec::new())?;
    let order = pieces.iter().map(|(_, s)| s.order()).fold(f64::NEG_INFINITY, f64::max);
    FourierSymbol::sum_all(a.dual().clone(), pieces.iter().map(|(_, s)| s), order, a.delta().min(b.delta()))
}

/// Depths and floor of the Lie/Moyal expansions.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ExpansionConfig {
    /// Largest σ_j index kept in each Moyal bracket.
    pub moyal_depth: usize,
    /// Largest power of ad_g.
    pub lie_depth: usize,
    /// Terms of order below this are dropped and logged.
    pub floor: f64,
}

/// One retained term (ad_g)^level a / level! coming from the source labelled `source`.
#[derive(Clone, Debug)]
pub struct LieTerm {
    pub level: usize,
    pub source: String,
    /// σ indices along the chain of brackets.
    pub chain: Vec<usize>,
    pub term: OrderedTerm,
}

#[derive(Clone, Debug, Default)]
pub struct LieExpansion {
    pub terms: Vec<LieTerm>,
    pub dropped: Vec<DroppedTerm>,
}

/// Σ_{1 ≤ j ≤ depth} (ad_g)^j a / j! with ad_g a = {a, g}_M, applied to each source term.
pub fn lie_expansion(sources: &[OrderedTerm], g: &FourierSymbol, cfg: &ExpansionConfig) -> Result<LieExpansion> {
    let mut out = LieExpansion::default();
    if g.is_empty() {
        return Ok(out);
    }
    if g.order() >= g.delta() {
        return Err(Error::Hypothesis(format!(
            "generator order {} is not below δ = {}",
            g.order(),
            g.delta()
        )));
    }
    let mut frontier: Vec<(String, Vec<usize>, FourierSymbol)> =
        sources.iter().map(|s| (s.label.clone(), Vec::new(), s.sym.clone())).collect();
    for level in 1..=cfg.lie_depth {
        let mut next = Vec::new();
        for (source, chain, sym) in &frontier {
            let tag = chain_label(source, chain);
            let pieces = moyal_terms(sym, g, cfg.moyal_depth, Some(cfg.floor), &tag, &mut out.dropped)?;
            log_moyal_cap(sym, g, cfg, &tag, &mut out.dropped);
            for (j, s) in pieces {
                let s = s.scaled(C64::new(1.0 / level as f64, 0.0));
                let mut c = chain.clone();
                c.push(j);
                let label = chain_label(source, &c);
                out.terms.push(LieTerm {
                    level,
                    source: source.clone(),
                    chain: c.clone(),
                    term: OrderedTerm::new(s.clone(), label),
                });
                next.push((source.clone(), c, s));
            }
        }
        frontier = next;
        if frontier.is_empty() {
            break;
        }
    }
    for (source, chain, sym) in &frontier {
        if chain.len() == cfg.lie_depth {
            let bound = sym.order() + g.order() - sym.delta().min(g.delta());
            out.dropped.push(DroppedTerm { label: format!("{}>depth-cap", chain_label(source, chain)), order: bound });
        }
    }
    Ok(out)
}

fn log_moyal_cap(sym: &FourierSymbol, g: &FourierSymbol, cfg: &ExpansionConfig, tag: &str, dropped: &mut Vec<DroppedTerm>) {
    let next = if cfg.moyal_depth % 2 == 0 { cfg.moyal_depth + 1 } else { cfg.moyal_depth + 2 };
    let bound = sym.order() + g.order() - next as f64 * sym.delta().min(g.delta());
    if bound >= cfg.floor {
        dropped.push(DroppedTerm { label: format!("{tag}σ≥{next}>moyal-cap"), order: bound });
    }
}

fn chain_label(source: &str, chain: &[usize]) -> String {
    let mut s = source.to_string();
    for j in chain {
        s.push_str(&format!(">σ{j}"));
    }
    s
}

/// a + Σ_{j ≤ depth} (ad_g)^j a / j!.
pub fn lie_series(a: &FourierSymbol, g: &FourierSymbol, cfg: &ExpansionConfig) -> Result<(FourierSymbol, Vec<DroppedTerm>)> {
    let exp = lie_expansion(&[OrderedTerm::new(a.clone(), "a")], g, cfg)?;
    let parts: Vec<&FourierSymbol> = std::iter::once(a).chain(exp.terms.iter().map(|t| &t.term.sym)).collect();
    let sum = FourierSymbol::sum_all(a.dual().clone(), parts, a.order(), a.delta().min(g.delta()))?;
    Ok((sum, exp.dropped))
}

/// Classical symbol b with Op^cl(b) = Op^w(a) up to |α| ≤ J:
/// b̂_k = Σ_α k^α ∂_ξ^α â_k / (α! 2^{|α|}).
pub fn weyl_to_classical(a: &FourierSymbol, jmax: usize) -> FourierSymbol {
    let d = a.dim();
    a.map_terms(|k, e| {
        let kf = a.frequency(k);
        let mut parts = vec![(C64::new(1.0, 0.0), e.clone())];
        for n in 1..=jmax {
            for alpha in multi_indices(d, n) {
                let kp: f64 = kf.iter().zip(&alpha).map(|(c, &m)| c.powi(m as i32)).product();
                if kp == 0.0 {
                    continue;
                }
                let de = e.derivative_multi(&alpha);
                if de.is_zero() {
                    continue;
                }
                let c = Ratio::new(1i64, multi_factorial(&alpha) * (1i64 << n)).to_f64().unwrap_or(0.0);
                parts.push((C64::new(c * kp, 0.0), de));
            }
        }
        Expr::linear_combination(parts)
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn multi_index_counts() {
        assert_eq!(multi_indices(2, 3).len(), 4);
        assert_eq!(multi_indices(3, 2).len(), 6);
        assert_eq!(multi_indices(1, 0), vec![vec![0]]);
    }

    #[test]
    fn coefficients_are_exact() {
        assert_eq!(sigma_coefficient(&[1, 0], &[0, 0]), Ratio::new(1, 2));
        assert_eq!(sigma_coefficient(&[2], &[1]), Ratio::new(-1, 16));
        assert_eq!(sigma_coefficient(&[1, 1], &[0, 1]), Ratio::new(-1, 8));
    }
}
