//! Formulas compiled to a post-order list of operations, and the
//! row-at-a-time temporal operators shared by the main evaluator and the
//! similarity evaluator.

use crate::formula::{Counterfactual, Formula};
use std::collections::HashMap;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Op {
    Const(bool),
    Atom(usize),
    /// (parameter index, proposition index)
    Traced(usize, usize),
    Not(usize),
    And(usize, usize),
    Or(usize, usize),
    Implies(usize, usize),
    Iff(usize, usize),
    Next(usize),
    Prev(usize),
    Until(usize, usize),
    Since(usize, usize),
    Eventually(usize),
    Globally(usize),
    Once(usize),
    Historically(usize),
    Know(usize, usize),
    Cf(Counterfactual, usize, usize, usize),
}

#[derive(Debug, Clone)]
pub(crate) struct Program {
    pub ops: Vec<Op>,
    pub formulas: Vec<Formula>,
}

impl Program {
    pub fn root(&self) -> usize {
        self.ops.len() - 1
    }
}

/// Maps leaves and agents to indices; errors are reported as strings and
/// wrapped by the caller.
pub(crate) trait Resolver {
    fn atom(&self, prop: &str) -> Result<Op, ResolveError>;
    fn traced(&self, prop: &str, var: &str) -> Result<Op, ResolveError>;
    fn agent(&self, name: &str) -> Result<usize, ResolveError>;
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum ResolveError {
    Proposition(String),
    Traced(String),
    Agent(String),
}

pub(crate) fn compile(f: &Formula, r: &dyn Resolver) -> Result<Program, ResolveError> {
    let mut p = Program {
        ops: Vec::new(),
        formulas: Vec::new(),
    };
    let mut seen = HashMap::new();
    add(f, r, &mut p, &mut seen)?;
    Ok(p)
}

fn add(
    f: &Formula,
    r: &dyn Resolver,
    p: &mut Program,
    seen: &mut HashMap<Formula, usize>,
) -> Result<usize, ResolveError> {
    if let Some(&id) = seen.get(f) {
        return Ok(id);
    }
    use Formula as F;
    let un = |g: &Formula, p: &mut Program, seen: &mut HashMap<Formula, usize>| add(g, r, p, seen);
    let op = match f {
        F::True => Op::Const(true),
        F::False => Op::Const(false),
        F::Atom(q) => r.atom(q)?,
        F::Traced(q, v) => r.traced(q, v)?,
        F::Not(g) => Op::Not(un(g, p, seen)?),
        F::Next(g) => Op::Next(un(g, p, seen)?),
        F::Prev(g) => Op::Prev(un(g, p, seen)?),
        F::Eventually(g) => Op::Eventually(un(g, p, seen)?),
        F::Globally(g) => Op::Globally(un(g, p, seen)?),
        F::Once(g) => Op::Once(un(g, p, seen)?),
        F::Historically(g) => Op::Historically(un(g, p, seen)?),
        F::Know(a, g) => {
            let a = r.agent(a)?;
            Op::Know(a, un(g, p, seen)?)
        }
        F::And(l, rr) => Op::And(un(l, p, seen)?, un(rr, p, seen)?),
        F::Or(l, rr) => Op::Or(un(l, p, seen)?, un(rr, p, seen)?),
        F::Implies(l, rr) => Op::Implies(un(l, p, seen)?, un(rr, p, seen)?),
        F::Iff(l, rr) => Op::Iff(un(l, p, seen)?, un(rr, p, seen)?),
        F::Until(l, rr) => Op::Until(un(l, p, seen)?, un(rr, p, seen)?),
        F::Since(l, rr) => Op::Since(un(l, p, seen)?, un(rr, p, seen)?),
        other => {
            let (kind, a, l, rr) = other
                .as_counterfactual()
                .expect("remaining variants are counterfactuals");
            let a = r.agent(a)?;
            Op::Cf(kind, a, un(l, p, seen)?, un(rr, p, seen)?)
        }
    };
    p.ops.push(op);
    p.formulas.push(f.clone());
    let id = p.ops.len() - 1;
    seen.insert(f.clone(), id);
    Ok(id)
}

/// The finite window of positions rows are computed over.
///
/// With `wrap = Some(w)`, position `len` is identified with `w` (exact lasso
/// evaluation); with `None`, the domain simply ends at `len - 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct Horizon {
    pub len: usize,
    pub wrap: Option<usize>,
}

impl Horizon {
    /// Whether every row is periodic over the last two periods.
    pub fn is_periodic(&self, row: &[bool]) -> bool {
        match self.wrap {
            None => true,
            Some(w) => {
                let l = self.len - w;
                row[w - l..w] == row[w..self.len]
            }
        }
    }
}

fn until_into(c1: &[bool], c2: &[bool], hz: Horizon, out: &mut [bool]) {
    let h = hz.len;
    let mut carry = false;
    let start = match hz.wrap {
        None => h,
        Some(w) => {
            // Two passes over the loop: the first is exact at `w`, since any
            // witness reachable from `w` lies within one period.
            for _ in 0..2 {
                for i in (w..h).rev() {
                    carry = c2[i] || (c1[i] && carry);
                    out[i] = carry;
                }
                carry = out[w];
            }
            w
        }
    };
    for i in (0..start).rev() {
        carry = c2[i] || (c1[i] && carry);
        out[i] = carry;
    }
}

fn since_into(c1: &[bool], c2: &[bool], out: &mut [bool]) {
    let mut carry = false;
    for i in 0..out.len() {
        carry = c2[i] || (c1[i] && carry);
        out[i] = carry;
    }
}

/// Computes the row of a pointwise or temporal operator from its children.
/// `Know` and counterfactuals are not local and are rejected.
pub(crate) fn local_row<'a>(
    op: Op,
    child: impl Fn(usize) -> &'a [bool],
    hz: Horizon,
    out: &mut [bool],
) {
    let h = hz.len;
    let all_true = vec![true; h];
    let negated = |row: &[bool]| row.iter().map(|b| !b).collect::<Vec<_>>();
    match op {
        Op::Const(b) => out.fill(b),
        Op::Not(a) => {
            for (o, v) in out.iter_mut().zip(child(a)) {
                *o = !v;
            }
        }
        Op::And(a, b) => zip_with(child(a), child(b), out, |x, y| x && y),
        Op::Or(a, b) => zip_with(child(a), child(b), out, |x, y| x || y),
        Op::Implies(a, b) => zip_with(child(a), child(b), out, |x, y| !x || y),
        Op::Iff(a, b) => zip_with(child(a), child(b), out, |x, y| x == y),
        Op::Next(a) => {
            let c = child(a);
            for i in 0..h {
                out[i] = if i + 1 < h {
                    c[i + 1]
                } else {
                    hz.wrap.is_some_and(|w| c[w])
                };
            }
        }
        Op::Prev(a) => {
            let c = child(a);
            out[0] = false;
            out[1..h].copy_from_slice(&c[..h - 1]);
        }
        Op::Until(a, b) => until_into(child(a), child(b), hz, out),
        Op::Since(a, b) => since_into(child(a), child(b), out),
        Op::Eventually(a) => until_into(&all_true, child(a), hz, out),
        Op::Once(a) => since_into(&all_true, child(a), out),
        Op::Globally(a) => {
            until_into(&all_true, &negated(child(a)), hz, out);
            out.iter_mut().for_each(|b| *b = !*b);
        }
        Op::Historically(a) => {
            since_into(&all_true, &negated(child(a)), out);
            out.iter_mut().for_each(|b| *b = !*b);
        }
        Op::Atom(_) | Op::Traced(..) | Op::Know(..) | Op::Cf(..) => {
            unreachable!("leaf and modal operators are computed by the caller")
        }
    }
}

fn zip_with(a: &[bool], b: &[bool], out: &mut [bool], f: impl Fn(bool, bool) -> bool) {
    for ((o, x), y) in out.iter_mut().zip(a).zip(b) {
        *o = f(*x, *y);
    }
}
