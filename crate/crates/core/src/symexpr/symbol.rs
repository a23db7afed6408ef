use std::collections::BTreeMap;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Expr, Tape, C64};
use crate::error::{Error, Result};
use crate::lattice::{dot, DualLattice, Mode};

/// a(x, ξ) = Σ_k â_k(ξ) e^{i k·x} with finitely many k ∈ Γ*.
#[derive(Clone)]
pub struct FourierSymbol {
    dual: Arc<DualLattice>,
    terms: BTreeMap<Mode, Expr>,
    order: f64,
    delta: f64,
}

impl std::fmt::Debug for FourierSymbol {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FourierSymbol")
            .field("order", &self.order)
            .field("delta", &self.delta)
            .field("support", &self.terms.keys().collect::<Vec<_>>())
            .finish()
    }
}

fn same_lattice(a: &Arc<DualLattice>, b: &Arc<DualLattice>) -> bool {
    Arc::ptr_eq(a, b) || a.basis() == b.basis()
}

impl FourierSymbol {
    pub fn zero(dual: Arc<DualLattice>, order: f64, delta: f64) -> Self {
        FourierSymbol { dual, terms: BTreeMap::new(), order, delta }
    }

    pub fn from_terms(
        dual: Arc<DualLattice>,
        terms: impl IntoIterator<Item = (Mode, Expr)>,
        order: f64,
        delta: f64,
    ) -> Result<Self> {
        let mut s = Self::zero(dual, order, delta);
        for (k, e) in terms {
            s.add_term(k, e)?;
        }
        Ok(s)
    }

    /// A symbol with the single term k = 0.
    pub fn multiplier(dual: Arc<DualLattice>, e: Expr, order: f64, delta: f64) -> Self {
        let d = dual.dim();
        let mut s = Self::zero(dual, order, delta);
        if !e.is_zero() {
            s.terms.insert(Mode::zero(d), e);
        }
        s
    }

    pub fn add_term(&mut self, k: Mode, e: Expr) -> Result<()> {
        if k.dim() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: k.dim() });
        }
        if e.is_zero() {
            return Ok(());
        }
        match self.terms.remove(&k) {
            Some(old) => {
                let s = old + e;
                if !s.is_zero() {
                    self.terms.insert(k, s);
                }
            }
            None => {
                self.terms.insert(k, e);
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dual.dim()
    }

    pub fn dual(&self) -> &Arc<DualLattice> {
        &self.dual
    }

    pub fn order(&self) -> f64 {
        self.order
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn with_order(mut self, order: f64) -> Self {
        self.order = order;
        self
    }

    pub fn with_delta(mut self, delta: f64) -> Self {
        self.delta = delta;
        self
    }

    pub fn terms(&self) -> &BTreeMap<Mode, Expr> {
        &self.terms
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    /// â(k, ·), or zero when k is not in the support.
    pub fn coefficient(&self, k: &Mode) -> Expr {
        self.terms.get(k).cloned().unwrap_or_else(Expr::zero)
    }

    /// Physical frequency of an integer mode.
    pub fn frequency(&self, k: &Mode) -> Vec<f64> {
        self.dual.point(k)
    }

    /// max |k| over the support (0 when empty).
    pub fn support_radius(&self) -> f64 {
        self.terms.keys().map(|k| self.dual.norm(k)).fold(0.0, f64::max)
    }

    pub fn check_compatible(&self, other: &FourierSymbol) -> Result<()> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: other.dim() });
        }
        if !same_lattice(&self.dual, &other.dual) {
            return Err(Error::LatticeMismatch);
        }
        Ok(())
    }

    /// Sum with order max and δ min.
    pub fn plus(&self, other: &FourierSymbol) -> Result<FourierSymbol> {
        self.check_compatible(other)?;
        let mut out = self.clone();
        out.order = self.order.max(other.order);
        out.delta = self.delta.min(other.delta);
        for (k, e) in &other.terms {
            out.add_term(k.clone(), e.clone())?;
        }
        Ok(out)
    }

    /// Sums several symbols, merging each k-term with a single collection pass.
    pub fn sum_all<'a>(
        dual: Arc<DualLattice>,
        parts: impl IntoIterator<Item = &'a FourierSymbol>,
        order: f64,
        delta: f64,
    ) -> Result<FourierSymbol> {
        let mut acc: BTreeMap<Mode, Vec<Expr>> = BTreeMap::new();
        let probe = Self::zero(dual.clone(), order, delta);
        for p in parts {
            probe.check_compatible(p)?;
            for (k, e) in &p.terms {
                acc.entry(k.clone()).or_default().push(e.clone());
            }
        }
        let terms = acc.into_iter().map(|(k, es)| (k, Expr::sum(es))).filter(|(_, e)| !e.is_zero());
        Ok(FourierSymbol { dual, terms: terms.collect(), order, delta })
    }

    pub fn scaled(&self, c: C64) -> FourierSymbol {
        let terms = self
            .terms
            .iter()
            .map(|(k, e)| (k.clone(), e.scale(c)))
            .filter(|(_, e)| !e.is_zero())
            .collect();
        FourierSymbol { dual: self.dual.clone(), terms, order: self.order, delta: self.delta }
    }

    /// Applies `f` to each coefficient, keeping order metadata.
    pub fn map_terms(&self, mut f: impl FnMut(&Mode, &Expr) -> Expr) -> FourierSymbol {
        let terms = self
            .terms
            .iter()
            .map(|(k, e)| (k.clone(), f(k, e)))
            .filter(|(_, e)| !e.is_zero())
            .collect();
        FourierSymbol { dual: self.dual.clone(), terms, order: self.order, delta: self.delta }
    }

    /// Symbol with every coefficient conjugated and k ↦ −k (the symbol of ā).
    pub fn conj(&self) -> FourierSymbol {
        let terms = self.terms.iter().map(|(k, e)| (-k, e.conj())).collect();
        FourierSymbol { dual: self.dual.clone(), terms, order: self.order, delta: self.delta }
    }

    pub fn compile(&self) -> CompiledSymbol {
        let entries = self
            .terms
            .iter()
            .map(|(k, e)| CompiledTerm {
                mode: k.clone(),
                freq: self.dual.point(k),
                tape: Tape::compile(std::slice::from_ref(e)),
            })
            .collect();
        CompiledSymbol { dim: self.dim(), entries }
    }

    /// a(x, ξ).
    pub fn evaluate(&self, x: &[f64], xi: &[f64]) -> Result<C64> {
        self.compile().evaluate(x, xi)
    }

    /// Largest |a(x, ξ) − conj a(x, ξ)|-type defect: compares â(−k) with conj â(k) at sampled ξ.
    pub fn reality_defect(&self, samples: usize, radius: f64, seed: u64) -> Result<f64> {
        let c = self.compile();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut worst: f64 = 0.0;
        for _ in 0..samples {
            let xi: Vec<f64> = (0..self.dim()).map(|_| rng.gen_range(-radius..radius)).collect();
            let vals = c.coefficients(&xi)?;
            for (k, v) in c.entries.iter().zip(&vals) {
                let mk = -&k.mode;
                let w = match c.position(&mk) {
                    Some(j) => vals[j],
                    None => C64::new(0.0, 0.0),
                };
                worst = worst.max((v.conj() - w).norm() / (1.0 + v.norm()));
            }
        }
        Ok(worst)
    }

    /// Largest defect of â_k(−ξ) = s·â_k(ξ) at sampled ξ (s = 1 even, s = −1 odd).
    pub fn parity_defect(&self, sign: f64, samples: usize, radius: f64, seed: u64) -> Result<f64> {
        let c = self.compile();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut worst: f64 = 0.0;
        for _ in 0..samples {
            let xi: Vec<f64> = (0..self.dim()).map(|_| rng.gen_range(-radius..radius)).collect();
            let mxi: Vec<f64> = xi.iter().map(|v| -v).collect();
            let a = c.coefficients(&xi)?;
            let b = c.coefficients(&mxi)?;
            for (u, v) in a.iter().zip(&b) {
                worst = worst.max((v - u * sign).norm() / (1.0 + u.norm()));
            }
        }
        Ok(worst)
    }
}

#[derive(Clone, Debug)]
pub struct CompiledTerm {
    pub mode: Mode,
    pub freq: Vec<f64>,
    pub tape: Tape,
}

/// Per-term tapes of a [`FourierSymbol`].
#[derive(Clone, Debug)]
pub struct CompiledSymbol {
    dim: usize,
    pub entries: Vec<CompiledTerm>,
}

impl CompiledSymbol {
    pub fn position(&self, k: &Mode) -> Option<usize> {
        self.entries.binary_search_by(|e| e.mode.cmp(k)).ok()
    }

    /// â_k(ξ) for every k in the support, in support order.
    pub fn coefficients(&self, xi: &[f64]) -> Result<Vec<C64>> {
        if xi.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: xi.len() });
        }
        self.entries.iter().map(|e| e.tape.eval_one(xi)).collect()
    }

    pub fn coefficient_at(&self, idx: usize, xi: &[f64], buf: &mut Vec<C64>) -> Result<C64> {
        let t = &self.entries[idx].tape;
        t.run(xi, buf)?;
        t.output(buf, 0)
    }

    pub fn evaluate(&self, x: &[f64], xi: &[f64]) -> Result<C64> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: x.len() });
        }
        let coefs = self.coefficients(xi)?;
        Ok(self
            .entries
            .iter()
            .zip(coefs)
            .map(|(e, c)| c * C64::from_polar(1.0, dot(&e.freq, x)))
            .sum())
    }
}
