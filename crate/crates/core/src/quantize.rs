//! Weyl and classical quantization on truncated Fourier bases, matrix
//! exponentials of generators and conjugation.

use std::collections::HashMap;
use std::io::Write;
use std::sync::Arc;

use faer::complex_native::c64;
use faer::{Mat, Side};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::lattice::{modes_in_ball, DualLattice, LatticePoint, Mode};
use crate::symexpr::{FourierSymbol, C64};

/// Γ* ∩ B_R in the canonical order, with a reverse index.
#[derive(Debug)]
pub struct ModeSet {
    dual: Arc<DualLattice>,
    radius: f64,
    points: Vec<LatticePoint>,
    index: HashMap<Mode, usize>,
}

impl ModeSet {
    pub fn ball(dual: Arc<DualLattice>, radius: f64) -> Self {
        let points = modes_in_ball(&dual, radius);
        let index = points.iter().enumerate().map(|(i, p)| (p.mode.clone(), i)).collect();
        ModeSet { dual, radius, points, index }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn dual(&self) -> &Arc<DualLattice> {
        &self.dual
    }

    pub fn points(&self) -> &[LatticePoint] {
        &self.points
    }

    pub fn point(&self, i: usize) -> &LatticePoint {
        &self.points[i]
    }

    pub fn index_of(&self, k: &Mode) -> Option<usize> {
        self.index.get(k).copied()
    }

    /// Indices of modes at distance at least `margin` from the truncation sphere.
    pub fn interior(&self, margin: f64) -> Vec<usize> {
        let lim = self.radius - margin;
        (0..self.len()).filter(|&i| self.points[i].norm <= lim).collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Quantization {
    /// entry(k, ξ) = â(k − ξ, (k + ξ)/2).
    Weyl,
    /// entry(k, ξ) = â(k − ξ, ξ).
    Classical,
}

/// A symbol quantized on a [`ModeSet`]; `matrix[(row k, col ξ)]`.
#[derive(Clone, Debug)]
pub struct TruncatedOperator {
    pub modes: Arc<ModeSet>,
    pub matrix: Mat<c64>,
}

pub(crate) fn to_faer(z: C64) -> c64 {
    c64::new(z.re, z.im)
}

pub(crate) fn from_faer(z: c64) -> C64 {
    C64::new(z.re, z.im)
}

/// Quantizes `a(x, ξ − κ)`; κ = 0 gives the periodic operator.
pub fn quantize(a: &FourierSymbol, modes: &Arc<ModeSet>, kappa: &[f64], q: Quantization) -> Result<TruncatedOperator> {
    if a.dual().basis() != modes.dual.basis() {
        return Err(Error::LatticeMismatch);
    }
    if kappa.len() != a.dim() {
        return Err(Error::DimensionMismatch { expected: a.dim(), got: kappa.len() });
    }
    if a.support_radius() > 2.0 * modes.radius + 1e-9 {
        return Err(Error::Precondition(format!(
            "Fourier support radius {} exceeds twice the truncation radius {}",
            a.support_radius(),
            modes.radius
        )));
    }
    let compiled = a.compile();
    let n = modes.len();
    let d = a.dim();
    let columns: Vec<Vec<(usize, C64)>> = (0..n)
        .into_par_iter()
        .map(|col| -> Result<Vec<(usize, C64)>> {
            let xi = &modes.points[col];
            let mut buf = Vec::new();
            let mut at = vec![0.0; d];
            let mut out = Vec::new();
            for (idx, term) in compiled.entries.iter().enumerate() {
                let Some(row) = modes.index_of(&(&xi.mode + &term.mode)) else { continue };
                let k = &modes.points[row];
                for i in 0..d {
                    at[i] = match q {
                        Quantization::Weyl => 0.5 * (k.point[i] + xi.point[i]),
                        Quantization::Classical => xi.point[i],
                    } - kappa[i];
                }
                out.push((row, compiled.coefficient_at(idx, &at, &mut buf)?));
            }
            Ok(out)
        })
        .collect::<Result<_>>()?;
    let mut matrix = Mat::<c64>::zeros(n, n);
    for (col, entries) in columns.into_iter().enumerate() {
        for (row, z) in entries {
            matrix.write(row, col, to_faer(z));
        }
    }
    Ok(TruncatedOperator { modes: modes.clone(), matrix })
}

pub fn weyl_matrix(a: &FourierSymbol, modes: &Arc<ModeSet>, kappa: &[f64]) -> Result<TruncatedOperator> {
    quantize(a, modes, kappa, Quantization::Weyl)
}

pub fn classical_matrix(a: &FourierSymbol, modes: &Arc<ModeSet>, kappa: &[f64]) -> Result<TruncatedOperator> {
    quantize(a, modes, kappa, Quantization::Classical)
}

/// max |A − B|.
pub fn max_abs_diff(a: &Mat<c64>, b: &Mat<c64>) -> f64 {
    let mut worst = 0.0_f64;
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            worst = worst.max((a.read(i, j) - b.read(i, j)).abs());
        }
    }
    worst
}

pub fn max_abs(a: &Mat<c64>) -> f64 {
    let mut worst = 0.0_f64;
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            worst = worst.max(a.read(i, j).abs());
        }
    }
    worst
}

/// max |A_ij − conj A_ji| over i, j in `subset` (all indices when `None`).
pub fn hermitian_defect(a: &Mat<c64>, subset: Option<&[usize]>) -> f64 {
    let all: Vec<usize>;
    let idx = match subset {
        Some(s) => s,
        None => {
            all = (0..a.nrows()).collect();
            &all
        }
    };
    let mut worst = 0.0_f64;
    for (p, &i) in idx.iter().enumerate() {
        for &j in &idx[p..] {
            worst = worst.max((a.read(i, j) - a.read(j, i).conj()).abs());
        }
    }
    worst
}

/// (A + A†)/2.
pub fn hermitize(a: &Mat<c64>) -> Mat<c64> {
    Mat::from_fn(a.nrows(), a.ncols(), |i, j| (a.read(i, j) + a.read(j, i).conj()) * c64::new(0.5, 0.0))
}

/// ‖U†U − I‖_max.
pub fn unitarity_defect(u: &Mat<c64>) -> f64 {
    let p = u.adjoint() * u;
    let mut worst = 0.0_f64;
    for j in 0..p.ncols() {
        for i in 0..p.nrows() {
            let target = if i == j { c64::new(1.0, 0.0) } else { c64::new(0.0, 0.0) };
            worst = worst.max((p.read(i, j) - target).abs());
        }
    }
    worst
}

const HERMITIAN_TOL: f64 = 1e-10;
const UNITARY_TOL: f64 = 1e-10;

/// exp(iG) through the spectral decomposition of the Hermitian G.
pub fn exp_i(g: &Mat<c64>) -> Result<Mat<c64>> {
    let defect = hermitian_defect(g, None);
    if defect > HERMITIAN_TOL {
        return Err(Error::NotHermitian(defect));
    }
    let g = hermitize(g);
    let eig = g.selfadjoint_eigendecomposition(Side::Lower);
    let v = eig.u();
    let s = eig.s().column_vector();
    let n = g.nrows();
    let scaled = Mat::from_fn(n, n, |i, j| {
        let phase = s.read(j).re;
        v.read(i, j) * c64::new(phase.cos(), phase.sin())
    });
    let u = &scaled * v.adjoint();
    let defect = unitarity_defect(&u);
    if defect > UNITARY_TOL {
        return Err(Error::NotUnitary(defect));
    }
    Ok(u)
}

impl TruncatedOperator {
    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn entry(&self, row: usize, col: usize) -> C64 {
        from_faer(self.matrix.read(row, col))
    }

    /// Σ_{k ≠ ξ} |entry(k, ξ)| for the column of ξ.
    pub fn row_coupling(&self, col: usize) -> f64 {
        (0..self.dim()).filter(|&r| r != col).map(|r| self.matrix.read(r, col).abs()).sum()
    }

    pub fn hermitian_defect(&self, subset: Option<&[usize]>) -> f64 {
        hermitian_defect(&self.matrix, subset)
    }

    pub fn with_matrix(&self, matrix: Mat<c64>) -> TruncatedOperator {
        TruncatedOperator { modes: self.modes.clone(), matrix }
    }

    /// Text dump: `n d`, then one line of mode coordinates per mode, then the
    /// matrix row by row as `re im` pairs.
    pub fn write_text(&self, mut w: impl Write) -> Result<()> {
        let n = self.dim();
        writeln!(w, "{} {}", n, self.modes.dual.dim())?;
        for p in &self.modes.points {
            let coords: Vec<String> = p.mode.coords().iter().map(|c| c.to_string()).collect();
            writeln!(w, "{}", coords.join(" "))?;
        }
        for i in 0..n {
            let row: Vec<String> = (0..n)
                .map(|j| {
                    let z = self.matrix.read(i, j);
                    format!("{:e} {:e}", z.re, z.im)
                })
                .collect();
            writeln!(w, "{}", row.join(" "))?;
        }
        Ok(())
    }

    /// Binary dump, little endian: u64 n, u64 d, n·d i64 mode coordinates,
    /// then n² (re, im) f64 pairs in row-major order.
    pub fn write_binary(&self, mut w: impl Write) -> Result<()> {
        let n = self.dim();
        w.write_all(&(n as u64).to_le_bytes())?;
        w.write_all(&(self.modes.dual.dim() as u64).to_le_bytes())?;
        for p in &self.modes.points {
            for c in p.mode.coords() {
                w.write_all(&c.to_le_bytes())?;
            }
        }
        for i in 0..n {
            for j in 0..n {
                let z = self.matrix.read(i, j);
                w.write_all(&z.re.to_le_bytes())?;
                w.write_all(&z.im.to_le_bytes())?;
            }
        }
        Ok(())
    }
}

/// U H U† with U = exp(iG).
pub fn exp_conjugate(h: &TruncatedOperator, g: &TruncatedOperator) -> Result<TruncatedOperator> {
    if !Arc::ptr_eq(&h.modes, &g.modes) {
        return Err(Error::Precondition("operators live on different mode sets".into()));
    }
    let u = exp_i(&g.matrix)?;
    Ok(h.with_matrix(&u * &h.matrix * u.adjoint()))
}
