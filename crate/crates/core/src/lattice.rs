//! Lattices Γ ⊂ ℝ^d, their duals Γ*, and enumeration of dual modes in balls.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Neg, Sub};

use faer::linalg::solvers::SolverCore;
use faer::Mat;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MAX_DIM: usize = 4;

const SINGULAR_TOL: f64 = 1e-12;

/// Integer coordinates of a dual-lattice vector in the basis b_1..b_d.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Mode(pub Vec<i64>);

impl Mode {
    pub fn zero(dim: usize) -> Self {
        Mode(vec![0; dim])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&c| c == 0)
    }

    pub fn coords(&self) -> &[i64] {
        &self.0
    }
}

impl From<Vec<i64>> for Mode {
    fn from(v: Vec<i64>) -> Self {
        Mode(v)
    }
}

impl Add for &Mode {
    type Output = Mode;
    fn add(self, rhs: &Mode) -> Mode {
        Mode(self.0.iter().zip(&rhs.0).map(|(a, b)| a + b).collect())
    }
}

impl Sub for &Mode {
    type Output = Mode;
    fn sub(self, rhs: &Mode) -> Mode {
        Mode(self.0.iter().zip(&rhs.0).map(|(a, b)| a - b).collect())
    }
}

impl Neg for &Mode {
    type Output = Mode;
    fn neg(self) -> Mode {
        Mode(self.0.iter().map(|a| -a).collect())
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

/// Γ = {Σ k_i e_i : k ∈ ℤ^d}. `generators[i]` is e_i.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Lattice {
    generators: Vec<Vec<f64>>,
}

impl Lattice {
    pub fn new(generators: Vec<Vec<f64>>) -> Result<Self> {
        let d = generators.len();
        if d == 0 || d > MAX_DIM {
            return Err(Error::InvalidLattice(format!(
                "dimension must be in 1..={MAX_DIM}, got {d}"
            )));
        }
        for g in &generators {
            if g.len() != d {
                return Err(Error::InvalidLattice(format!(
                    "generator has {} components, expected {d}",
                    g.len()
                )));
            }
            if g.iter().any(|x| !x.is_finite()) {
                return Err(Error::InvalidLattice("non-finite generator".into()));
            }
        }
        Ok(Lattice { generators })
    }

    /// (2π ℤ)^d, whose dual is ℤ^d.
    pub fn standard(dim: usize) -> Result<Self> {
        Self::new(
            (0..dim)
                .map(|i| {
                    (0..dim)
                        .map(|j| if i == j { 2.0 * std::f64::consts::PI } else { 0.0 })
                        .collect()
                })
                .collect(),
        )
    }

    pub fn dim(&self) -> usize {
        self.generators.len()
    }

    pub fn generators(&self) -> &[Vec<f64>] {
        &self.generators
    }

    /// Matrix with columns e_1..e_d.
    fn column_matrix(&self) -> Mat<f64> {
        let d = self.dim();
        Mat::from_fn(d, d, |r, c| self.generators[c][r])
    }
}

/// Γ* with generators b_i satisfying b_i · e_j = 2π δ_ij.
#[derive(Clone, Debug, PartialEq)]
pub struct DualLattice {
    basis: Vec<Vec<f64>>,
    /// `inverse[i]` is the i-th row of (B*)^{-1}, mapping points to coordinates.
    inverse: Vec<Vec<f64>>,
    min_gap_r: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LatticePoint {
    pub mode: Mode,
    pub point: Vec<f64>,
    pub norm: f64,
}

fn invert(m: &Mat<f64>) -> Result<Mat<f64>> {
    let d = m.nrows();
    let scale = (0..d)
        .flat_map(|i| (0..d).map(move |j| (i, j)))
        .map(|(i, j)| m.read(i, j).abs())
        .fold(0.0_f64, f64::max);
    let det = m.determinant();
    if !det.is_finite() || det.abs() <= SINGULAR_TOL * scale.powi(d as i32).max(f64::MIN_POSITIVE) {
        return Err(Error::InvalidLattice(format!("singular basis (det = {det:e})")));
    }
    Ok(m.partial_piv_lu().inverse())
}

pub fn dual_basis(lat: &Lattice) -> Result<DualLattice> {
    let d = lat.dim();
    let e = lat.column_matrix();
    let e_inv = invert(&e)?;
    // B* = 2π (E^T)^{-1}, so column c of B* is row c of 2π E^{-1}.
    let two_pi = 2.0 * std::f64::consts::PI;
    let basis: Vec<Vec<f64>> = (0..d)
        .map(|c| (0..d).map(|r| two_pi * e_inv.read(c, r)).collect())
        .collect();
    DualLattice::from_basis(basis)
}

impl DualLattice {
    /// Builds Γ* directly from its generators b_i.
    pub fn from_basis(basis: Vec<Vec<f64>>) -> Result<Self> {
        let d = basis.len();
        if d == 0 || d > MAX_DIM || basis.iter().any(|b| b.len() != d) {
            return Err(Error::InvalidLattice("dual basis must be d×d with 1 ≤ d ≤ 4".into()));
        }
        let bs = Mat::from_fn(d, d, |r, c| basis[c][r]);
        let inv = invert(&bs)?;
        let inverse = (0..d).map(|i| (0..d).map(|j| inv.read(i, j)).collect()).collect();
        let mut dual = DualLattice { basis, inverse, min_gap_r: 0.0 };
        dual.min_gap_r = 0.5 * dual.shortest_vector_norm();
        Ok(dual)
    }

    /// ℤ^d, the dual of (2πℤ)^d.
    pub fn integer(dim: usize) -> Result<Self> {
        Self::from_basis(
            (0..dim)
                .map(|i| (0..dim).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
                .collect(),
        )
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    /// `basis()[i]` is the generator b_i.
    pub fn basis(&self) -> &[Vec<f64>] {
        &self.basis
    }

    pub fn min_gap_r(&self) -> f64 {
        self.min_gap_r
    }

    pub fn point(&self, mode: &Mode) -> Vec<f64> {
        let d = self.dim();
        let mut p = vec![0.0; d];
        for (c, b) in mode.0.iter().zip(&self.basis) {
            let c = *c as f64;
            for r in 0..d {
                p[r] += c * b[r];
            }
        }
        p
    }

    pub fn norm(&self, mode: &Mode) -> f64 {
        norm(&self.point(mode))
    }

    /// Real coordinates of a point in the basis b_i.
    pub fn coordinates(&self, point: &[f64]) -> Vec<f64> {
        self.inverse
            .iter()
            .map(|row| row.iter().zip(point).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// The mode at `point` if the point lies on Γ* (within 1e-9 in coordinates).
    pub fn mode_at(&self, point: &[f64]) -> Option<Mode> {
        let coords = self.coordinates(point);
        let rounded: Vec<i64> = coords.iter().map(|c| c.round() as i64).collect();
        coords
            .iter()
            .zip(&rounded)
            .all(|(c, r)| (c - *r as f64).abs() <= 1e-9)
            .then_some(Mode(rounded))
    }

    /// Bound on |c_i| for integer coordinates of points in the ball of radius `radius`.
    fn coordinate_bounds(&self, radius: f64) -> Vec<i64> {
        self.inverse
            .iter()
            .map(|row| (norm(row) * radius + 1e-9).floor() as i64)
            .collect()
    }

    fn shortest_vector_norm(&self) -> f64 {
        let l = self.basis.iter().map(|b| norm(b)).fold(f64::INFINITY, f64::min);
        let mut best = f64::INFINITY;
        for_each_in_box(&self.coordinate_bounds(l), |c| {
            if c.iter().any(|&x| x != 0) {
                let n = self.norm(&Mode(c.to_vec()));
                if n < best {
                    best = n;
                }
            }
        });
        best
    }
}

pub fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// ⟨ξ⟩ = (1 + |ξ|²)^{1/2}.
pub fn japanese(v: &[f64]) -> f64 {
    (1.0 + v.iter().map(|x| x * x).sum::<f64>()).sqrt()
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn for_each_in_box(bounds: &[i64], mut f: impl FnMut(&[i64])) {
    let d = bounds.len();
    let mut c: Vec<i64> = bounds.iter().map(|b| -b).collect();
    loop {
        f(&c);
        let mut i = 0;
        loop {
            if i == d {
                return;
            }
            if c[i] < bounds[i] {
                c[i] += 1;
                break;
            }
            c[i] = -bounds[i];
            i += 1;
        }
    }
}

fn point_order(a: &LatticePoint, b: &LatticePoint) -> Ordering {
    a.norm
        .total_cmp(&b.norm)
        .then_with(|| {
            a.point
                .iter()
                .zip(&b.point)
                .map(|(x, y)| x.total_cmp(y))
                .find(|o| o.is_ne())
                .unwrap_or(Ordering::Equal)
        })
        .then_with(|| a.mode.cmp(&b.mode))
}

/// All ξ ∈ Γ* with |ξ| ≤ R, sorted by (|ξ|, lexicographic components).
pub fn modes_in_ball(dual: &DualLattice, radius: f64) -> Vec<LatticePoint> {
    if !(radius >= 0.0) {
        return Vec::new();
    }
    let limit = radius * (1.0 + 1e-12);
    let mut out = Vec::new();
    for_each_in_box(&dual.coordinate_bounds(radius), |c| {
        let mode = Mode(c.to_vec());
        let point = dual.point(&mode);
        let n = norm(&point);
        if n <= limit {
            out.push(LatticePoint { mode, point, norm: n });
        }
    });
    out.sort_by(point_order);
    out
}

/// Fraction of modes in B_R satisfying `predicate`.
pub fn counting_ratio(
    dual: &DualLattice,
    radius: f64,
    predicate: impl Fn(&LatticePoint) -> bool + Sync,
) -> Result<f64> {
    use rayon::prelude::*;
    let pts = modes_in_ball(dual, radius);
    if pts.is_empty() {
        return Err(Error::Domain(format!("ball of radius {radius} contains no modes")));
    }
    let hits = pts.par_iter().filter(|p| predicate(p)).count();
    Ok(hits as f64 / pts.len() as f64)
}
