//! The nonresonant set Ω, lattice census, Monte Carlo layer measures and the
//! layer inclusion check.
//!
//! Ω is read as an intersection: ξ ∈ Ω iff |ξ·k| > 2γ⟨ξ⟩^δ/|k|^τ for every
//! k ∈ Γ* with 0 < |k| < ⟨ξ⟩^ε.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::cutoffs::NFParams;
use crate::lattice::{dot, japanese, modes_in_ball, norm, DualLattice};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Resonance {
    Nonresonant,
    /// No k lies in 0 < |k| < ⟨ξ⟩^ε.
    Vacuous,
    Resonant,
}

/// Precomputed frequencies for repeated tests up to a given |ξ|.
#[derive(Clone, Debug)]
pub struct ResonanceTester {
    params: NFParams,
    /// Nonzero k sorted by norm.
    ks: Vec<(Vec<f64>, f64)>,
    max_xi: f64,
}

impl ResonanceTester {
    pub fn new(dual: &DualLattice, p: &NFParams, max_xi: f64) -> Self {
        let kmax = japanese(&vec![max_xi; 1]).powf(p.epsilon);
        let ks = modes_in_ball(dual, kmax)
            .into_iter()
            .filter(|lp| lp.norm > 0.0)
            .map(|lp| (lp.point, lp.norm))
            .collect();
        ResonanceTester { params: p.clone(), ks, max_xi }
    }

    pub fn classify(&self, xi: &[f64]) -> Resonance {
        let p = &self.params;
        let j = japanese(xi);
        debug_assert!(norm(xi) <= self.max_xi + 1e-9, "tester built for |ξ| ≤ {}", self.max_xi);
        let kmax = j.powf(p.epsilon);
        let scale = 2.0 * p.gamma * j.powf(p.delta);
        let mut any = false;
        for (k, kn) in &self.ks {
            if *kn >= kmax {
                break;
            }
            any = true;
            if dot(xi, k).abs() <= scale / kn.powf(p.tau) {
                return Resonance::Resonant;
            }
        }
        if any {
            Resonance::Nonresonant
        } else {
            Resonance::Vacuous
        }
    }

    /// ξ ∈ Ω, counting vacuous cases as nonresonant.
    pub fn is_nonresonant(&self, xi: &[f64]) -> bool {
        self.classify(xi) != Resonance::Resonant
    }
}

pub fn classify(xi: &[f64], p: &NFParams, dual: &DualLattice) -> Resonance {
    ResonanceTester::new(dual, p, norm(xi)).classify(xi)
}

pub fn is_nonresonant(xi: &[f64], p: &NFParams, dual: &DualLattice) -> bool {
    classify(xi, p, dual) != Resonance::Resonant
}

/// base^{1/den}, with the limits den → 0⁺ when den ≤ 0.
fn power_threshold(base: f64, den: f64) -> f64 {
    if den > 1e-12 {
        base.powf(1.0 / den)
    } else if base < 1.0 {
        0.0
    } else if base == 1.0 {
        1.0
    } else {
        f64::INFINITY
    }
}

/// [r 2^{ε(τ+1)}]^{1/(δ − ε(τ+1))}: census radii must exceed this.
pub fn admissibility_threshold(p: &NFParams, r: f64) -> f64 {
    let e = p.epsilon * (p.tau + 1.0);
    power_threshold(r * 2f64.powf(e), p.delta - e)
}

/// [r 2^{ε(τ+1)}/(2γ)]^{1/(δ − ε(τ+1))}: hypothesis of the inclusion lemma.
pub fn inclusion_threshold(p: &NFParams, r: f64) -> f64 {
    let e = p.epsilon * (p.tau + 1.0);
    power_threshold(r * 2f64.powf(e) / (2.0 * p.gamma), p.delta - e)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CensusRow {
    #[serde(rename = "R")]
    pub r: f64,
    pub total: usize,
    /// Non-vacuous nonresonant modes.
    pub nonres: usize,
    /// nonres / (total − vacuous_count).
    pub fraction: f64,
    pub vacuous_count: usize,
    pub seed: u64,
    pub below_threshold: bool,
}

/// Exhaustive count over Γ* ∩ B_R for each R.
pub fn census(p: &NFParams, dual: &DualLattice, radii: &[f64], seed: u64) -> Vec<CensusRow> {
    let rmax = radii.iter().copied().fold(0.0, f64::max);
    let tester = ResonanceTester::new(dual, p, rmax);
    let threshold = admissibility_threshold(p, dual.min_gap_r());
    let all = modes_in_ball(dual, rmax);
    let classes: Vec<Resonance> = all.par_iter().map(|lp| tester.classify(&lp.point)).collect();
    radii
        .iter()
        .map(|&r| {
            let limit = r * (1.0 + 1e-12);
            let (mut total, mut nonres, mut vac) = (0, 0, 0);
            for (lp, c) in all.iter().zip(&classes) {
                if lp.norm > limit {
                    break;
                }
                total += 1;
                match c {
                    Resonance::Nonresonant => nonres += 1,
                    Resonance::Vacuous => vac += 1,
                    Resonance::Resonant => {}
                }
            }
            let denom = total - vac;
            let fraction = if denom == 0 { 1.0 } else { nonres as f64 / denom as f64 };
            CensusRow { r, total, nonres, fraction, vacuous_count: vac, seed, below_threshold: r <= threshold }
        })
        .collect()
}

/// CSV with columns R,total,nonres,fraction,vacuous_count,seed.
pub fn census_csv(rows: &[CensusRow]) -> String {
    let mut s = String::from("R,total,nonres,fraction,vacuous_count,seed\n");
    for r in rows {
        s.push_str(&format!("{},{},{},{:.12},{},{}\n", r.r, r.total, r.nonres, r.fraction, r.vacuous_count, r.seed));
    }
    s
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct McEstimate {
    pub fraction: f64,
    pub std_err: f64,
    pub samples: usize,
    pub seed: u64,
}

fn uniform_in_ball(rng: &mut ChaCha8Rng, d: usize, radius: f64) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..d).map(|_| rng.gen_range(-radius..radius)).collect();
        if norm(&v) <= radius {
            return v;
        }
    }
}

/// Half-width 2γR^δ/|k|^{τ+1} of the layer A_k in the direction of k.
pub fn layer_half_width(k: &[f64], radius: f64, p: &NFParams) -> f64 {
    let kn = norm(k);
    2.0 * p.gamma * radius.powf(p.delta) / kn.powf(p.tau + 1.0)
}

/// Monte Carlo estimate of |A_k|/|B_R|, A_k = {ξ ∈ B_R : |ξ·k| < 2γR^δ/|k|^τ}.
pub fn layer_measure_mc(k: &[f64], radius: f64, p: &NFParams, samples: usize, seed: u64) -> McEstimate {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let bound = 2.0 * p.gamma * radius.powf(p.delta) / norm(k).powf(p.tau);
    let hits = (0..samples)
        .filter(|_| dot(&uniform_in_ball(&mut rng, k.len(), radius), k).abs() < bound)
        .count();
    let f = hits as f64 / samples as f64;
    McEstimate { fraction: f, std_err: (f * (1.0 - f) / samples as f64).sqrt(), samples, seed }
}

/// Area fraction of the strip |t| < w inside the disk of radius R (d = 2).
pub fn strip_in_disk_fraction(w: f64, radius: f64) -> f64 {
    if w >= radius {
        return 1.0;
    }
    let area = 2.0 * (w * (radius * radius - w * w).sqrt() + radius * radius * (w / radius).asin());
    area / (std::f64::consts::PI * radius * radius)
}

/// Σ_{0<|k|<(2R)^ε} |A_k|/|B_R| estimated by Monte Carlo.
pub fn layer_union_bound(dual: &DualLattice, radius: f64, p: &NFParams, samples: usize, seed: u64) -> f64 {
    let kmax = (2.0 * radius).powf(p.epsilon);
    modes_in_ball(dual, kmax)
        .iter()
        .filter(|lp| lp.norm > 0.0 && lp.norm < kmax)
        .enumerate()
        .map(|(i, lp)| layer_measure_mc(&lp.point, radius, p, samples, seed.wrapping_add(i as u64)).fraction)
        .sum()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InclusionReport {
    pub k: Vec<f64>,
    pub samples: usize,
    pub violations: usize,
    /// R exceeds the lemma's threshold.
    pub hypothesis_met: bool,
    pub threshold: f64,
    /// 0 < |k| < (2R)^ε.
    pub k_in_range: bool,
}

impl InclusionReport {
    pub fn passed(&self) -> bool {
        self.violations == 0
    }
}

/// Orthonormal frame whose first vector is k/|k|.
fn frame(k: &[f64]) -> Vec<Vec<f64>> {
    let d = k.len();
    let kn = norm(k);
    let mut out = vec![k.iter().map(|x| x / kn).collect::<Vec<_>>()];
    for i in 0..d {
        let mut v = vec![0.0; d];
        v[i] = 1.0;
        for u in &out {
            let c = dot(&v, u);
            v.iter_mut().zip(u).for_each(|(a, b)| *a -= c * b);
        }
        let n = norm(&v);
        if n > 1e-8 && out.len() < d {
            out.push(v.into_iter().map(|x| x / n).collect());
        }
    }
    out
}

/// Samples ξ ∈ A_k and h ∈ B_r and counts the cases ξ + h ∉ Ã_k, where
/// Ã_k = {ξ ∈ B_{2R} : |ξ·k| < 4γR^δ/|k|^τ}.
pub fn inclusion_check(k: &[f64], radius: f64, r: f64, p: &NFParams, samples: usize, seed: u64) -> InclusionReport {
    let d = k.len();
    let kn = norm(k);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let w = layer_half_width(k, radius, p).min(radius);
    let wide = 4.0 * p.gamma * radius.powf(p.delta) / kn.powf(p.tau);
    let basis = frame(k);
    let mut violations = 0;
    let mut drawn = 0;
    while drawn < samples {
        let mut xi = vec![0.0; d];
        let s = rng.gen_range(-w..w);
        xi.iter_mut().zip(&basis[0]).for_each(|(x, b)| *x += s * b);
        for b in &basis[1..] {
            let t = rng.gen_range(-radius..radius);
            xi.iter_mut().zip(b).for_each(|(x, e)| *x += t * e);
        }
        if norm(&xi) > radius {
            continue;
        }
        drawn += 1;
        let h = if r > 0.0 { uniform_in_ball(&mut rng, d, r) } else { vec![0.0; d] };
        let moved: Vec<f64> = xi.iter().zip(&h).map(|(a, b)| a + b).collect();
        if !(norm(&moved) < 2.0 * radius && dot(&moved, k).abs() < wide) {
            violations += 1;
        }
    }
    let threshold = inclusion_threshold(p, r);
    InclusionReport {
        k: k.to_vec(),
        samples,
        violations,
        hypothesis_met: radius > threshold,
        threshold,
        k_in_range: kn > 0.0 && kn < (2.0 * radius).powf(p.epsilon),
    }
}
