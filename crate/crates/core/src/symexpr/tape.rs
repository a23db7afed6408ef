use std::collections::HashMap;

use super::{smooth, Expr, Kind, C64};
use crate::error::{Error, Result};

#[derive(Clone, Debug)]
enum Op {
    Const(C64),
    Xi(usize),
    Norm,
    Jap,
    Bump { order: u32, gamma: f64, arg: usize },
    Pow { base: usize, exp: f64 },
    Sum { constant: C64, start: usize, len: usize },
    Mul { start: usize, len: usize },
}

/// Straight-line program evaluating one or more expressions with shared subterms.
#[derive(Clone, Debug)]
pub struct Tape {
    ops: Vec<Op>,
    sum_terms: Vec<(C64, usize)>,
    mul_factors: Vec<usize>,
    outputs: Vec<usize>,
    min_dim: usize,
}

pub(crate) fn pow_value(z: C64, e: f64) -> C64 {
    if z.im == 0.0 {
        let x = z.re;
        if x > 0.0 {
            return C64::new(x.powf(e), 0.0);
        }
        if x == 0.0 {
            return if e > 0.0 {
                C64::new(0.0, 0.0)
            } else if e == 0.0 {
                C64::new(1.0, 0.0)
            } else {
                C64::new(f64::INFINITY, 0.0)
            };
        }
        if e.fract() == 0.0 && e.abs() < i32::MAX as f64 {
            return C64::new(x.powi(e as i32), 0.0);
        }
    }
    z.powf(e)
}

impl Tape {
    pub fn compile(roots: &[Expr]) -> Tape {
        let mut tape =
            Tape { ops: Vec::new(), sum_terms: Vec::new(), mul_factors: Vec::new(), outputs: Vec::new(), min_dim: 0 };
        let mut slot: HashMap<usize, usize> = HashMap::new();
        for root in roots {
            let mut stack = vec![(root.clone(), false)];
            while let Some((e, expanded)) = stack.pop() {
                if slot.contains_key(&e.addr()) {
                    continue;
                }
                if !expanded {
                    stack.push((e.clone(), true));
                    for c in e.children() {
                        if !slot.contains_key(&c.addr()) {
                            stack.push((c, false));
                        }
                    }
                    continue;
                }
                let op = match e.kind() {
                    Kind::Const(c) => Op::Const(*c),
                    Kind::Xi(i) => {
                        tape.min_dim = tape.min_dim.max(i + 1);
                        Op::Xi(*i)
                    }
                    Kind::Norm => Op::Norm,
                    Kind::Jap => Op::Jap,
                    Kind::Bump { order, gamma, arg } => {
                        Op::Bump { order: *order, gamma: *gamma, arg: slot[&arg.addr()] }
                    }
                    Kind::Pow { base, exp } => Op::Pow { base: slot[&base.addr()], exp: *exp },
                    Kind::Sum { constant, terms } => {
                        let start = tape.sum_terms.len();
                        tape.sum_terms.extend(terms.iter().map(|(c, t)| (*c, slot[&t.addr()])));
                        Op::Sum { constant: *constant, start, len: terms.len() }
                    }
                    Kind::Mul(fs) => {
                        let start = tape.mul_factors.len();
                        tape.mul_factors.extend(fs.iter().map(|f| slot[&f.addr()]));
                        Op::Mul { start, len: fs.len() }
                    }
                };
                slot.insert(e.addr(), tape.ops.len());
                tape.ops.push(op);
            }
            tape.outputs.push(slot[&root.addr()]);
        }
        tape
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    pub fn output_count(&self) -> usize {
        self.outputs.len()
    }

    /// Smallest ξ dimension the tape can be evaluated at.
    pub fn min_dim(&self) -> usize {
        self.min_dim
    }

    /// Evaluates every node into `buf`; outputs are read back with [`Tape::output`].
    pub fn run(&self, xi: &[f64], buf: &mut Vec<C64>) -> Result<()> {
        if xi.len() < self.min_dim {
            return Err(Error::DimensionMismatch { expected: self.min_dim, got: xi.len() });
        }
        let n2: f64 = xi.iter().map(|x| x * x).sum();
        let norm = n2.sqrt();
        let jap = (1.0 + n2).sqrt();
        buf.clear();
        buf.reserve(self.ops.len());
        let zero = C64::new(0.0, 0.0);
        for op in &self.ops {
            let v = match op {
                Op::Const(c) => *c,
                Op::Xi(i) => C64::new(xi[*i], 0.0),
                Op::Norm => C64::new(norm, 0.0),
                Op::Jap => C64::new(jap, 0.0),
                Op::Bump { order, gamma, arg } => {
                    C64::new(smooth::bump_derivative(*order, *gamma, buf[*arg].re), 0.0)
                }
                Op::Pow { base, exp } => pow_value(buf[*base], *exp),
                Op::Sum { constant, start, len } => {
                    let mut acc = *constant;
                    for (c, t) in &self.sum_terms[*start..start + len] {
                        acc += c * buf[*t];
                    }
                    acc
                }
                Op::Mul { start, len } => {
                    let fs = &self.mul_factors[*start..start + len];
                    if fs.iter().any(|&f| buf[f] == zero) {
                        zero
                    } else {
                        fs.iter().fold(C64::new(1.0, 0.0), |acc, &f| acc * buf[f])
                    }
                }
            };
            buf.push(v);
        }
        Ok(())
    }

    pub fn output(&self, buf: &[C64], i: usize) -> Result<C64> {
        let v = buf[self.outputs[i]];
        if v.re.is_finite() && v.im.is_finite() {
            Ok(v)
        } else {
            Err(Error::NonFinite { context: format!("tape output {i}") })
        }
    }

    pub fn eval(&self, xi: &[f64]) -> Result<Vec<C64>> {
        let mut buf = Vec::new();
        self.run(xi, &mut buf)?;
        (0..self.outputs.len()).map(|i| self.output(&buf, i)).collect()
    }

    pub fn eval_one(&self, xi: &[f64]) -> Result<C64> {
        let mut buf = Vec::new();
        self.run(xi, &mut buf)?;
        self.output(&buf, 0)
    }
}
