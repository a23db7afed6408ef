//! Coefficient expressions in ξ.
//!
//! An [`Expr`] is a node in a hash-consed DAG: structurally equal expressions
//! share one allocation, so equality is pointer equality and derivatives are
//! cached per node. Smart constructors keep a light canonical form (flattened
//! sums and products, collected like terms and powers) but never distribute a
//! product over a sum. Products are evaluated with a zero short-circuit: a
//! factor that is exactly zero masks singular co-factors such as 1/(ξ·k) on
//! the plateau of a cutoff.

mod parse;
pub mod smooth;
mod symbol;
mod tape;

use std::cmp::Ordering;
use std::collections::hash_map::DefaultHasher;
use std::collections::HashMap;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::atomic::{AtomicUsize, Ordering as AtomicOrdering};
use std::sync::{Arc, Mutex, OnceLock, Weak};

use num_complex::Complex64;

use crate::error::Result;
use crate::lattice::MAX_DIM;

pub use parse::parse;
pub use symbol::{CompiledSymbol, FourierSymbol};
pub use tape::Tape;

pub type C64 = Complex64;

#[derive(Clone)]
pub struct Expr(Arc<Node>);

struct Node {
    kind: Kind,
    hash: u64,
    derivs: [OnceLock<Expr>; MAX_DIM],
}

#[derive(Clone, Debug)]
pub enum Kind {
    Const(C64),
    /// ξ_i, zero-based.
    Xi(usize),
    /// |ξ|.
    Norm,
    /// ⟨ξ⟩ = (1 + |ξ|²)^{1/2}.
    Jap,
    /// χ^{(order)}(arg) for the bump with plateau half-width `gamma`.
    Bump { order: u32, gamma: f64, arg: Expr },
    Pow { base: Expr, exp: f64 },
    /// constant + Σ coef·term; terms are never constants or sums.
    Sum { constant: C64, terms: Vec<(C64, Expr)> },
    /// Product of at least two non-constant factors.
    Mul(Vec<Expr>),
}

fn float_key(x: f64) -> u64 {
    if x == 0.0 {
        0
    } else {
        x.to_bits()
    }
}

fn hash_kind(kind: &Kind) -> u64 {
    let mut h = DefaultHasher::new();
    match kind {
        Kind::Const(c) => {
            0u8.hash(&mut h);
            float_key(c.re).hash(&mut h);
            float_key(c.im).hash(&mut h);
        }
        Kind::Xi(i) => {
            1u8.hash(&mut h);
            i.hash(&mut h);
        }
        Kind::Norm => 2u8.hash(&mut h),
        Kind::Jap => 3u8.hash(&mut h),
        Kind::Bump { order, gamma, arg } => {
            4u8.hash(&mut h);
            order.hash(&mut h);
            float_key(*gamma).hash(&mut h);
            arg.0.hash.hash(&mut h);
        }
        Kind::Pow { base, exp } => {
            5u8.hash(&mut h);
            base.0.hash.hash(&mut h);
            float_key(*exp).hash(&mut h);
        }
        Kind::Sum { constant, terms } => {
            6u8.hash(&mut h);
            float_key(constant.re).hash(&mut h);
            float_key(constant.im).hash(&mut h);
            terms.len().hash(&mut h);
            for (c, t) in terms {
                float_key(c.re).hash(&mut h);
                float_key(c.im).hash(&mut h);
                t.0.hash.hash(&mut h);
            }
        }
        Kind::Mul(fs) => {
            7u8.hash(&mut h);
            fs.len().hash(&mut h);
            for f in fs {
                f.0.hash.hash(&mut h);
            }
        }
    }
    h.finish()
}

fn same_c64(a: C64, b: C64) -> bool {
    float_key(a.re) == float_key(b.re) && float_key(a.im) == float_key(b.im)
}

/// Equality of kinds whose children are already interned.
fn shallow_eq(a: &Kind, b: &Kind) -> bool {
    match (a, b) {
        (Kind::Const(x), Kind::Const(y)) => same_c64(*x, *y),
        (Kind::Xi(i), Kind::Xi(j)) => i == j,
        (Kind::Norm, Kind::Norm) | (Kind::Jap, Kind::Jap) => true,
        (
            Kind::Bump { order: o1, gamma: g1, arg: a1 },
            Kind::Bump { order: o2, gamma: g2, arg: a2 },
        ) => o1 == o2 && float_key(*g1) == float_key(*g2) && a1.ptr_eq(a2),
        (Kind::Pow { base: b1, exp: e1 }, Kind::Pow { base: b2, exp: e2 }) => {
            b1.ptr_eq(b2) && float_key(*e1) == float_key(*e2)
        }
        (Kind::Sum { constant: c1, terms: t1 }, Kind::Sum { constant: c2, terms: t2 }) => {
            same_c64(*c1, *c2)
                && t1.len() == t2.len()
                && t1.iter().zip(t2).all(|((a, x), (b, y))| same_c64(*a, *b) && x.ptr_eq(y))
        }
        (Kind::Mul(f1), Kind::Mul(f2)) => {
            f1.len() == f2.len() && f1.iter().zip(f2).all(|(x, y)| x.ptr_eq(y))
        }
        _ => false,
    }
}

type Bucket = Vec<Weak<Node>>;

struct Interner {
    map: Mutex<HashMap<u64, Bucket>>,
    inserts: AtomicUsize,
}

fn interner() -> &'static Interner {
    static INTERNER: OnceLock<Interner> = OnceLock::new();
    INTERNER.get_or_init(|| Interner { map: Mutex::new(HashMap::new()), inserts: AtomicUsize::new(0) })
}

fn intern(kind: Kind) -> Expr {
    let hash = hash_kind(&kind);
    let it = interner();
    let mut map = it.map.lock().unwrap_or_else(|e| e.into_inner());
    let bucket = map.entry(hash).or_default();
    for w in bucket.iter() {
        if let Some(n) = w.upgrade() {
            if shallow_eq(&n.kind, &kind) {
                return Expr(n);
            }
        }
    }
    bucket.retain(|w| w.strong_count() > 0);
    let node = Arc::new(Node { kind, hash, derivs: Default::default() });
    bucket.push(Arc::downgrade(&node));
    if it.inserts.fetch_add(1, AtomicOrdering::Relaxed) % (1 << 18) == (1 << 18) - 1 {
        map.retain(|_, b| {
            b.retain(|w| w.strong_count() > 0);
            !b.is_empty()
        });
    }
    Expr(node)
}

fn kind_tag(k: &Kind) -> u8 {
    match k {
        Kind::Const(_) => 0,
        Kind::Xi(_) => 1,
        Kind::Norm => 2,
        Kind::Jap => 3,
        Kind::Bump { .. } => 4,
        Kind::Pow { .. } => 5,
        Kind::Sum { .. } => 6,
        Kind::Mul(_) => 7,
    }
}

fn cmp_c64(a: C64, b: C64) -> Ordering {
    a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im))
}

/// Total order used to sort sum terms and product factors.
fn canon_cmp(a: &Expr, b: &Expr) -> Ordering {
    if a.ptr_eq(b) {
        return Ordering::Equal;
    }
    a.0.hash.cmp(&b.0.hash).then_with(|| deep_cmp(a, b))
}

fn deep_cmp(a: &Expr, b: &Expr) -> Ordering {
    let (ka, kb) = (a.kind(), b.kind());
    kind_tag(ka).cmp(&kind_tag(kb)).then_with(|| match (ka, kb) {
        (Kind::Const(x), Kind::Const(y)) => cmp_c64(*x, *y),
        (Kind::Xi(i), Kind::Xi(j)) => i.cmp(j),
        (
            Kind::Bump { order: o1, gamma: g1, arg: a1 },
            Kind::Bump { order: o2, gamma: g2, arg: a2 },
        ) => o1.cmp(o2).then(g1.total_cmp(g2)).then_with(|| canon_cmp(a1, a2)),
        (Kind::Pow { base: b1, exp: e1 }, Kind::Pow { base: b2, exp: e2 }) => {
            e1.total_cmp(e2).then_with(|| canon_cmp(b1, b2))
        }
        (Kind::Sum { constant: c1, terms: t1 }, Kind::Sum { constant: c2, terms: t2 }) => {
            cmp_c64(*c1, *c2).then(t1.len().cmp(&t2.len())).then_with(|| {
                t1.iter()
                    .zip(t2)
                    .map(|((a, x), (b, y))| cmp_c64(*a, *b).then_with(|| canon_cmp(x, y)))
                    .find(|o| o.is_ne())
                    .unwrap_or(Ordering::Equal)
            })
        }
        (Kind::Mul(f1), Kind::Mul(f2)) => f1.len().cmp(&f2.len()).then_with(|| {
            f1.iter()
                .zip(f2)
                .map(|(x, y)| canon_cmp(x, y))
                .find(|o| o.is_ne())
                .unwrap_or(Ordering::Equal)
        }),
        _ => Ordering::Equal,
    })
}

impl PartialEq for Expr {
    fn eq(&self, other: &Self) -> bool {
        self.ptr_eq(other)
    }
}

impl Eq for Expr {}

impl Hash for Expr {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.0.hash.hash(state);
    }
}

impl fmt::Debug for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl Expr {
    pub fn kind(&self) -> &Kind {
        &self.0.kind
    }

    pub fn ptr_eq(&self, other: &Expr) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
    }

    /// Deterministic structural hash.
    pub fn structural_hash(&self) -> u64 {
        self.0.hash
    }

    fn addr(&self) -> usize {
        Arc::as_ptr(&self.0) as usize
    }

    pub fn constant(c: C64) -> Expr {
        intern(Kind::Const(c))
    }

    pub fn real(x: f64) -> Expr {
        Self::constant(C64::new(x, 0.0))
    }

    pub fn zero() -> Expr {
        Self::real(0.0)
    }

    pub fn one() -> Expr {
        Self::real(1.0)
    }

    pub fn imag_unit() -> Expr {
        Self::constant(C64::new(0.0, 1.0))
    }

    /// ξ_i with zero-based `i`.
    pub fn xi(i: usize) -> Expr {
        assert!(i < MAX_DIM, "axis {i} out of range");
        intern(Kind::Xi(i))
    }

    pub fn norm() -> Expr {
        intern(Kind::Norm)
    }

    pub fn jap() -> Expr {
        intern(Kind::Jap)
    }

    /// ⟨ξ⟩^s.
    pub fn jap_pow(s: f64) -> Expr {
        Self::jap().pow(s)
    }

    /// |ξ|^p.
    pub fn norm_pow(p: f64) -> Expr {
        Self::norm().pow(p)
    }

    /// Σ_i k_i ξ_i.
    pub fn linear(k: &[f64]) -> Expr {
        Self::linear_combination(k.iter().enumerate().map(|(i, &c)| (C64::new(c, 0.0), Self::xi(i))))
    }

    /// χ(arg) with plateau half-width γ.
    pub fn bump(gamma: f64, arg: Expr) -> Expr {
        Self::bump_derivative(0, gamma, arg)
    }

    /// χ^{(order)}(arg).
    pub fn bump_derivative(order: u32, gamma: f64, arg: Expr) -> Expr {
        if let Kind::Const(c) = arg.kind() {
            return Self::real(smooth::bump_derivative(order, gamma, c.re));
        }
        intern(Kind::Bump { order, gamma, arg })
    }

    /// ψ(arg) = 1 − χ(arg).
    pub fn radial_cutoff(gamma: f64, arg: Expr) -> Expr {
        Self::one() - Self::bump(gamma, arg)
    }

    pub fn as_const(&self) -> Option<C64> {
        match self.kind() {
            Kind::Const(c) => Some(*c),
            _ => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self.kind(), Kind::Const(c) if *c == C64::new(0.0, 0.0))
    }

    pub fn is_one(&self) -> bool {
        matches!(self.kind(), Kind::Const(c) if *c == C64::new(1.0, 0.0))
    }

    pub fn pow(&self, e: f64) -> Expr {
        if e == 0.0 {
            return Self::one();
        }
        if e == 1.0 {
            return self.clone();
        }
        match self.kind() {
            Kind::Const(c) => Self::constant(tape::pow_value(*c, e)),
            Kind::Pow { base, exp } if matches!(base.kind(), Kind::Norm | Kind::Jap) => {
                base.pow(exp * e)
            }
            Kind::Mul(fs) if e.fract() == 0.0 => Self::product(fs.iter().map(|f| f.pow(e))),
            Kind::Sum { constant, terms } if *constant == C64::new(0.0, 0.0) && terms.len() == 1 && e.fract() == 0.0 => {
                let (c, t) = &terms[0];
                Self::constant(c.powi(e as i32)) * t.pow(e)
            }
            _ => intern(Kind::Pow { base: self.clone(), exp: e }),
        }
    }

    pub fn scale(&self, c: C64) -> Expr {
        Self::linear_combination([(c, self.clone())])
    }

    pub fn scale_real(&self, c: f64) -> Expr {
        self.scale(C64::new(c, 0.0))
    }

    pub fn sum(parts: impl IntoIterator<Item = Expr>) -> Expr {
        Self::linear_combination(parts.into_iter().map(|e| (C64::new(1.0, 0.0), e)))
    }

    pub fn linear_combination(parts: impl IntoIterator<Item = (C64, Expr)>) -> Expr {
        let mut constant = C64::new(0.0, 0.0);
        let mut terms: Vec<(C64, Expr)> = Vec::new();
        let mut index: HashMap<usize, usize> = HashMap::new();
        let mut push = |c: C64, e: &Expr, terms: &mut Vec<(C64, Expr)>| match index.get(&e.addr()) {
            Some(&i) => terms[i].0 += c,
            None => {
                index.insert(e.addr(), terms.len());
                terms.push((c, e.clone()));
            }
        };
        for (c, e) in parts {
            if c == C64::new(0.0, 0.0) {
                continue;
            }
            match e.kind() {
                Kind::Const(v) => constant += c * v,
                Kind::Sum { constant: k, terms: ts } => {
                    constant += c * k;
                    for (c2, t) in ts {
                        push(c * c2, t, &mut terms);
                    }
                }
                _ => push(c, &e, &mut terms),
            }
        }
        terms.retain(|(c, _)| *c != C64::new(0.0, 0.0));
        if terms.is_empty() {
            return Self::constant(constant);
        }
        if constant == C64::new(0.0, 0.0) && terms.len() == 1 && terms[0].0 == C64::new(1.0, 0.0) {
            return terms.pop().map(|(_, t)| t).unwrap_or_else(Self::zero);
        }
        terms.sort_by(|a, b| canon_cmp(&a.1, &b.1));
        intern(Kind::Sum { constant, terms })
    }

    pub fn product(factors: impl IntoIterator<Item = Expr>) -> Expr {
        let mut coef = C64::new(1.0, 0.0);
        let mut bases: Vec<(Expr, f64)> = Vec::new();
        let mut stack: Vec<Expr> = factors.into_iter().collect();
        stack.reverse();
        while let Some(f) = stack.pop() {
            match f.kind() {
                Kind::Const(v) => {
                    if *v == C64::new(0.0, 0.0) {
                        return Self::zero();
                    }
                    coef *= v;
                }
                Kind::Sum { constant, terms } if *constant == C64::new(0.0, 0.0) && terms.len() == 1 => {
                    coef *= terms[0].0;
                    stack.push(terms[0].1.clone());
                }
                Kind::Mul(fs) => stack.extend(fs.iter().rev().cloned()),
                Kind::Pow { base, exp } => add_power(&mut bases, base, *exp),
                _ => add_power(&mut bases, &f, 1.0),
            }
        }
        let mut out: Vec<Expr> = Vec::with_capacity(bases.len());
        for (b, e) in bases {
            if e == 0.0 {
                continue;
            }
            let p = if e == 1.0 { b } else { b.pow(e) };
            match p.kind() {
                Kind::Const(v) => coef *= v,
                _ => out.push(p),
            }
        }
        let body = match out.len() {
            0 => return Self::constant(coef),
            1 => out.pop().unwrap_or_else(Self::one),
            _ => {
                out.sort_by(canon_cmp);
                intern(Kind::Mul(out))
            }
        };
        if coef == C64::new(1.0, 0.0) {
            body
        } else {
            body.scale(coef)
        }
    }

    pub fn children(&self) -> Vec<Expr> {
        match self.kind() {
            Kind::Const(_) | Kind::Xi(_) | Kind::Norm | Kind::Jap => Vec::new(),
            Kind::Bump { arg, .. } => vec![arg.clone()],
            Kind::Pow { base, .. } => vec![base.clone()],
            Kind::Sum { terms, .. } => terms.iter().map(|(_, t)| t.clone()).collect(),
            Kind::Mul(fs) => fs.clone(),
        }
    }

    /// ∂/∂ξ_axis, cached on the node.
    pub fn derivative(&self, axis: usize) -> Expr {
        assert!(axis < MAX_DIM, "axis {axis} out of range");
        if let Some(d) = self.0.derivs[axis].get() {
            return d.clone();
        }
        // Post-order fill so that each computation only needs cached children.
        let mut stack = vec![(self.clone(), false)];
        while let Some((e, expanded)) = stack.pop() {
            if e.0.derivs[axis].get().is_some() {
                continue;
            }
            if expanded {
                let d = e.derivative_from_children(axis);
                let _ = e.0.derivs[axis].set(d);
            } else {
                stack.push((e.clone(), true));
                for c in e.children() {
                    if c.0.derivs[axis].get().is_none() {
                        stack.push((c, false));
                    }
                }
            }
        }
        self.0.derivs[axis].get().cloned().unwrap_or_else(Self::zero)
    }

    fn derivative_from_children(&self, i: usize) -> Expr {
        match self.kind() {
            Kind::Const(_) => Self::zero(),
            Kind::Xi(j) => {
                if *j == i {
                    Self::one()
                } else {
                    Self::zero()
                }
            }
            Kind::Norm => Self::xi(i) * Self::norm().pow(-1.0),
            Kind::Jap => Self::xi(i) * Self::jap().pow(-1.0),
            Kind::Bump { order, gamma, arg } => {
                let da = arg.derivative(i);
                if da.is_zero() {
                    return Self::zero();
                }
                Self::bump_derivative(order + 1, *gamma, arg.clone()) * da
            }
            Kind::Pow { base, exp } => {
                let db = base.derivative(i);
                if db.is_zero() {
                    return Self::zero();
                }
                (base.pow(exp - 1.0) * db).scale_real(*exp)
            }
            Kind::Sum { terms, .. } => {
                Self::linear_combination(terms.iter().map(|(c, t)| (*c, t.derivative(i))))
            }
            Kind::Mul(fs) => {
                let mut parts = Vec::new();
                for (j, f) in fs.iter().enumerate() {
                    let df = f.derivative(i);
                    if df.is_zero() {
                        continue;
                    }
                    parts.push(Self::product(
                        fs.iter().enumerate().map(|(l, g)| if l == j { df.clone() } else { g.clone() }),
                    ));
                }
                Self::sum(parts)
            }
        }
    }

    /// ∂_ξ^α.
    pub fn derivative_multi(&self, alpha: &[usize]) -> Expr {
        let mut e = self.clone();
        for (axis, &n) in alpha.iter().enumerate() {
            for _ in 0..n {
                if e.is_zero() {
                    return e;
                }
                e = e.derivative(axis);
            }
        }
        e
    }

    /// Complex conjugate (atoms are real).
    pub fn conj(&self) -> Expr {
        let mut memo: HashMap<usize, Expr> = HashMap::new();
        self.conj_memo(&mut memo)
    }

    fn conj_memo(&self, memo: &mut HashMap<usize, Expr>) -> Expr {
        if let Some(e) = memo.get(&self.addr()) {
            return e.clone();
        }
        let out = match self.kind() {
            Kind::Const(c) => Self::constant(c.conj()),
            Kind::Xi(_) | Kind::Norm | Kind::Jap => self.clone(),
            Kind::Bump { order, gamma, arg } => Self::bump_derivative(*order, *gamma, arg.conj_memo(memo)),
            Kind::Pow { base, exp } => base.conj_memo(memo).pow(*exp),
            Kind::Sum { constant, terms } => Self::linear_combination(
                std::iter::once((constant.conj(), Self::one()))
                    .chain(terms.iter().map(|(c, t)| (c.conj(), t.conj_memo(memo))))
                    .collect::<Vec<_>>(),
            ),
            Kind::Mul(fs) => Self::product(fs.iter().map(|f| f.conj_memo(memo)).collect::<Vec<_>>()),
        };
        memo.insert(self.addr(), out.clone());
        out
    }

    /// Number of distinct nodes in the DAG.
    pub fn node_count(&self) -> usize {
        let mut seen = std::collections::HashSet::new();
        let mut stack = vec![self.clone()];
        while let Some(e) = stack.pop() {
            if seen.insert(e.addr()) {
                stack.extend(e.children());
            }
        }
        seen.len()
    }

    /// Size of the expression written out as a tree, saturating at `cap`.
    pub fn tree_size(&self, cap: usize) -> usize {
        let mut memo: HashMap<usize, usize> = HashMap::new();
        self.tree_size_memo(cap, &mut memo)
    }

    fn tree_size_memo(&self, cap: usize, memo: &mut HashMap<usize, usize>) -> usize {
        if let Some(&s) = memo.get(&self.addr()) {
            return s;
        }
        let mut s = 1usize;
        for c in self.children() {
            s = s.saturating_add(c.tree_size_memo(cap, memo)).min(cap);
        }
        memo.insert(self.addr(), s);
        s
    }

    /// Evaluates at one point. Compiles a tape; use [`Tape`] for repeated evaluation.
    pub fn eval(&self, xi: &[f64]) -> Result<C64> {
        Tape::compile(std::slice::from_ref(self)).eval_one(xi)
    }
}

fn add_power(bases: &mut Vec<(Expr, f64)>, base: &Expr, e: f64) {
    match bases.iter_mut().find(|(b, _)| b.ptr_eq(base)) {
        Some(entry) => entry.1 += e,
        None => bases.push((base.clone(), e)),
    }
}

impl Add for &Expr {
    type Output = Expr;
    fn add(self, rhs: &Expr) -> Expr {
        Expr::sum([self.clone(), rhs.clone()])
    }
}

impl Add for Expr {
    type Output = Expr;
    fn add(self, rhs: Expr) -> Expr {
        Expr::sum([self, rhs])
    }
}

impl Sub for &Expr {
    type Output = Expr;
    fn sub(self, rhs: &Expr) -> Expr {
        Expr::linear_combination([(C64::new(1.0, 0.0), self.clone()), (C64::new(-1.0, 0.0), rhs.clone())])
    }
}

impl Sub for Expr {
    type Output = Expr;
    fn sub(self, rhs: Expr) -> Expr {
        &self - &rhs
    }
}

impl Mul for &Expr {
    type Output = Expr;
    fn mul(self, rhs: &Expr) -> Expr {
        Expr::product([self.clone(), rhs.clone()])
    }
}

impl Mul for Expr {
    type Output = Expr;
    fn mul(self, rhs: Expr) -> Expr {
        Expr::product([self, rhs])
    }
}

impl Neg for &Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        self.scale_real(-1.0)
    }
}

impl Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        self.scale_real(-1.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: C64, b: C64, tol: f64) -> bool {
        (a - b).norm() <= tol * (1.0 + b.norm())
    }

    #[test]
    fn hash_consing_shares_nodes() {
        let a = Expr::xi(0) * Expr::jap_pow(-0.5);
        let b = Expr::jap_pow(-0.5) * Expr::xi(0);
        assert!(a.ptr_eq(&b));
        assert_eq!(a.structural_hash(), b.structural_hash());
    }

    #[test]
    fn like_terms_and_powers_collect() {
        let x = Expr::xi(0);
        let e = &(&x + &x) - &x;
        assert!(e.ptr_eq(&x));
        let p = Expr::jap_pow(0.5) * Expr::jap_pow(-0.5);
        assert!(p.is_one());
        assert!((&x - &x).is_zero());
    }

    #[test]
    fn simple_derivatives() {
        let n2 = Expr::norm_pow(2.0);
        let d = n2.derivative(0);
        assert!(d.ptr_eq(&Expr::xi(0).scale_real(2.0)));
        let s = 0.7;
        let d = Expr::jap_pow(s).derivative(1);
        let want = (Expr::xi(1) * Expr::jap_pow(s - 2.0)).scale_real(s);
        assert!(d.ptr_eq(&want));
    }

    #[test]
    fn evaluation_of_atoms() {
        assert!(close(Expr::norm().eval(&[3.0, 4.0]).unwrap(), C64::new(5.0, 0.0), 1e-15));
        assert!(close(Expr::jap_pow(2.0).eval(&[1.0, 1.0]).unwrap(), C64::new(3.0, 0.0), 1e-15));
        let psi = Expr::radial_cutoff(0.4, Expr::norm());
        assert_eq!(psi.eval(&[1.0, 0.0]).unwrap(), C64::new(1.0, 0.0));
        assert_eq!(psi.eval(&[0.0, 0.0]).unwrap(), C64::new(0.0, 0.0));
    }

    #[test]
    fn zero_factor_masks_singularity() {
        // (1 − χ(ξ_1)) / ξ_1 at ξ_1 = 0.
        let x = Expr::xi(0);
        let e = Expr::radial_cutoff(0.4, x.clone()) * x.pow(-1.0);
        assert_eq!(e.eval(&[0.0]).unwrap(), C64::new(0.0, 0.0));
        let de = e.derivative(0);
        assert_eq!(de.eval(&[0.0]).unwrap(), C64::new(0.0, 0.0));
        assert!(x.pow(-1.0).eval(&[0.0]).is_err());
    }

    #[test]
    fn conj_flips_constants() {
        let e = Expr::imag_unit() * Expr::xi(0);
        let c = e.conj();
        assert!(close(c.eval(&[2.0]).unwrap(), C64::new(0.0, -2.0), 1e-15));
    }
}
