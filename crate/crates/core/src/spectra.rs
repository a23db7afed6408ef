//! Direct diagonalization, quasimodes φ_{n,ξ} = U†e_ξ, eigenvalue matching by
//! overlap, the ±ξ splitting scan and Floquet shifts.

use std::ops::Range;
use std::sync::Arc;

use faer::complex_native::c64;
use faer::{Mat, Side};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lattice::{norm, Mode};
use crate::normalform::{NFState, Perturbation};
use crate::quantize::{exp_i, hermitian_defect, hermitize, max_abs, weyl_matrix, ModeSet, TruncatedOperator};
use crate::resonance::ResonanceTester;
use crate::symexpr::{Expr, FourierSymbol};

const HERMITIAN_TOL: f64 = 1e-10;
const RESIDUAL_TOL: f64 = 1e-9;
const CLUSTER_TOL: f64 = 1e-10;
const MIN_OVERLAP: f64 = 0.5;

fn abs2(z: c64) -> f64 {
    z.re * z.re + z.im * z.im
}

/// Ascending eigenvalues with eigenvectors in the columns of `vectors`.
#[derive(Clone, Debug)]
pub struct EigenSystem {
    pub values: Vec<f64>,
    pub vectors: Mat<c64>,
    /// Runs of eigenvalues closer than the cluster tolerance.
    pub clusters: Vec<Range<usize>>,
    pub cluster_of: Vec<usize>,
    /// Spectral norm max |λ|.
    pub norm: f64,
    pub max_residual: f64,
}

impl EigenSystem {
    /// Eigenvalues closer than this are not resolved from one another.
    pub fn resolution(&self) -> f64 {
        CLUSTER_TOL * self.norm.max(1.0)
    }
}

pub fn eigensolve(h: &TruncatedOperator) -> Result<EigenSystem> {
    let scale = max_abs(&h.matrix).max(1.0);
    let defect = hermitian_defect(&h.matrix, None);
    if defect > HERMITIAN_TOL * scale {
        return Err(Error::NotHermitian(defect));
    }
    let a = hermitize(&h.matrix);
    let eig = a.selfadjoint_eigendecomposition(Side::Lower);
    let n = a.nrows();
    let s = eig.s().column_vector();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| s.read(i).re.total_cmp(&s.read(j).re));
    let values: Vec<f64> = order.iter().map(|&i| s.read(i).re).collect();
    let u = eig.u();
    let vectors = Mat::from_fn(n, n, |r, c| u.read(r, order[c]));
    let norm = values.iter().map(|v| v.abs()).fold(0.0, f64::max);

    let hv = &a * &vectors;
    let max_residual = (0..n)
        .into_par_iter()
        .map(|c| {
            let lam = c64::new(values[c], 0.0);
            (0..n).map(|r| abs2(hv.read(r, c) - vectors.read(r, c) * lam)).sum::<f64>().sqrt()
        })
        .reduce(|| 0.0, f64::max);
    let tol = RESIDUAL_TOL * norm.max(1.0);
    if max_residual > tol {
        return Err(Error::EigenResidual { residual: max_residual, tol });
    }

    let gap = CLUSTER_TOL * norm.max(1.0);
    let mut clusters = Vec::new();
    let mut cluster_of = vec![0; n];
    let mut start = 0;
    for i in 1..=n {
        if i == n || values[i] - values[i - 1] > gap {
            clusters.push(start..i);
            start = i;
        }
    }
    for (c, r) in clusters.iter().enumerate() {
        for i in r.clone() {
            cluster_of[i] = c;
        }
    }
    Ok(EigenSystem { values, vectors, clusters, cluster_of, norm, max_residual })
}

/// The symbol |ξ|^M + v₀ of the operator itself (no smoothing at ξ = 0).
pub fn operator_symbol(pert: &Perturbation, m: f64) -> Result<FourierSymbol> {
    let principal = FourierSymbol::multiplier(pert.dual().clone(), Expr::norm_pow(m), m, 1.0);
    principal.plus(&pert.v0)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MatchedEigenvalue {
    pub xi: Vec<f64>,
    pub mode: Mode,
    pub lambda_pred: f64,
    pub lambda_matched: f64,
    pub overlap: f64,
    pub residual: f64,
    pub nonresonant: bool,
    pub ambiguous: bool,
    /// Index of the matched eigenvalue cluster.
    pub cluster: usize,
}

/// H = Op^w(|ξ − κ|^M + v₀(x, ξ − κ)) on a truncated basis, its spectrum and
/// U† = e^{−iG_1} ⋯ e^{−iG_n}.
pub struct SpectralHarness {
    pub h: TruncatedOperator,
    pub eig: EigenSystem,
    pub u_dag: Mat<c64>,
    pub kappa: Vec<f64>,
    pub margin: f64,
    tester: ResonanceTester,
}

impl SpectralHarness {
    pub fn new(state: &NFState, pert: &Perturbation, modes: Arc<ModeSet>) -> Result<Self> {
        let h = weyl_matrix(&operator_symbol(pert, state.params.m)?, &modes, &pert.kappa)?;
        let eig = eigensolve(&h)?;
        let n = modes.len();
        let mut u_dag = Mat::<c64>::identity(n, n);
        // U† = E_1† E_2† ⋯ E_n†, built right to left.
        for g in &state.generators {
            let gm = weyl_matrix(g, &modes, &pert.kappa)?;
            let e = exp_i(&gm.matrix)?;
            u_dag = e.adjoint() * &u_dag;
        }
        let margin = pert.v0.support_radius() * (state.n.max(1) * state.config.expansion.lie_depth.max(1)) as f64;
        let tester = ResonanceTester::new(modes.dual(), &state.params, modes.radius() + norm(&pert.kappa));
        Ok(SpectralHarness { h, eig, u_dag, kappa: pert.kappa.clone(), margin, tester })
    }

    pub fn modes(&self) -> &Arc<ModeSet> {
        &self.h.modes
    }

    /// Modes whose distance to the truncation sphere is at least K·n·J, with K
    /// the Fourier support radius of v₀.
    pub fn interior(&self) -> Vec<usize> {
        self.modes().interior(self.margin)
    }

    pub fn is_interior(&self, idx: usize) -> bool {
        self.modes().point(idx).norm <= self.modes().radius() - self.margin
    }

    fn shifted(&self, xi: &[f64]) -> Vec<f64> {
        xi.iter().zip(&self.kappa).map(|(a, b)| a - b).collect()
    }

    /// Nonresonance of ξ − κ.
    pub fn is_nonresonant(&self, idx: usize) -> bool {
        self.tester.is_nonresonant(&self.shifted(&self.modes().point(idx).point))
    }

    /// φ_{n,ξ} as a column vector.
    pub fn quasimode(&self, idx: usize) -> Mat<c64> {
        let n = self.u_dag.nrows();
        Mat::from_fn(n, 1, |r, _| self.u_dag.read(r, idx))
    }

    pub fn match_mode(&self, state: &NFState, idx: usize) -> Result<MatchedEigenvalue> {
        let lp = self.modes().point(idx);
        let lambda_pred = state.lambda(&lp.point)?;
        let phi = self.quasimode(idx);
        let coeffs = self.eig.vectors.adjoint() * &phi;
        let (cluster, weight) = self
            .eig
            .clusters
            .iter()
            .enumerate()
            .map(|(c, r)| (c, r.clone().map(|i| abs2(coeffs.read(i, 0))).sum::<f64>()))
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .ok_or_else(|| Error::Precondition("empty spectrum".into()))?;
        let range = self.eig.clusters[cluster].clone();
        let lambda_matched = range.clone().map(|i| abs2(coeffs.read(i, 0)) * self.eig.values[i]).sum::<f64>() / weight;
        let overlap = weight.sqrt();
        let hphi = &self.h.matrix * &phi;
        let lam = c64::new(lambda_pred, 0.0);
        let residual = (0..phi.nrows()).map(|r| abs2(hphi.read(r, 0) - phi.read(r, 0) * lam)).sum::<f64>().sqrt();
        Ok(MatchedEigenvalue {
            xi: lp.point.clone(),
            mode: lp.mode.clone(),
            lambda_pred,
            lambda_matched,
            overlap,
            residual,
            nonresonant: self.is_nonresonant(idx),
            ambiguous: overlap < MIN_OVERLAP,
            cluster,
        })
    }

    pub fn match_mode_at(&self, state: &NFState, k: &Mode) -> Result<MatchedEigenvalue> {
        let idx = self.modes().index_of(k).ok_or_else(|| Error::UnknownMode(k.0.clone()))?;
        self.match_mode(state, idx)
    }

    /// |⟨φ_ξ, φ_ξ'⟩| for two modes.
    pub fn overlap(&self, a: usize, b: usize) -> f64 {
        (0..self.u_dag.nrows())
            .map(|r| self.u_dag.read(r, a).conj() * self.u_dag.read(r, b))
            .fold(c64::new(0.0, 0.0), |s, z| s + z)
            .abs()
    }

    /// Modes matched to a cluster more often than its multiplicity.
    pub fn overbooked_clusters(&self, matches: &[MatchedEigenvalue]) -> Vec<usize> {
        let mut count = vec![0usize; self.eig.clusters.len()];
        for m in matches {
            count[m.cluster] += 1;
        }
        count
            .iter()
            .enumerate()
            .filter(|(c, n)| **n > self.eig.clusters[*c].len())
            .map(|(c, _)| c)
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SplitRow {
    pub xi: Vec<f64>,
    pub norm: f64,
    /// λ_ξ − λ_{−ξ}; zero when unresolved.
    pub difference: f64,
    /// False when ±ξ fall into one eigenvalue cluster, so the splitting is
    /// below the numerical resolution of the eigensolver.
    pub resolved: bool,
}

/// λ_ξ − λ_{−ξ} for matched eigenvalues.
pub fn splitting_scan(
    state: &NFState,
    pert: &Perturbation,
    harness: &SpectralHarness,
    modes: &[Mode],
) -> Result<Vec<SplitRow>> {
    if !pert.symmetric {
        return Err(Error::Precondition("splitting scan needs a symmetric perturbation".into()));
    }
    modes
        .iter()
        .map(|k| {
            let plus = harness.match_mode_at(state, k)?;
            let minus = harness.match_mode_at(state, &-k)?;
            if !plus.nonresonant || !minus.nonresonant {
                return Err(Error::Precondition(format!("±{k} is not nonresonant")));
            }
            let resolved = plus.cluster != minus.cluster;
            let difference = if resolved { plus.lambda_matched - minus.lambda_matched } else { 0.0 };
            Ok(SplitRow { norm: norm(&plus.xi), xi: plus.xi, difference, resolved })
        })
        .collect()
}

/// The perturbation with Floquet parameter κ; κ must have basis coordinates in [0, 1).
pub fn floquet_shift(pert: &Perturbation, kappa: &[f64]) -> Result<Perturbation> {
    if kappa.len() != pert.dim() {
        return Err(Error::DimensionMismatch { expected: pert.dim(), got: kappa.len() });
    }
    let coords = pert.dual().coordinates(kappa);
    if coords.iter().any(|c| !(*c >= -1e-12 && *c < 1.0)) {
        return Err(Error::Precondition(format!("κ = {kappa:?} lies outside the fundamental domain")));
    }
    let mut out = pert.clone();
    out.kappa = kappa.to_vec();
    Ok(out)
}
