//! First-order logic of order with the equal-level predicate, FO[<,E].
//!
//! Variables denote `(trace, position)` pairs. This module provides the
//! inductive translation `fo(·)` from core formulas, a brute-force evaluator
//! over `universe × [0, N]`, and a text format.
//!
//! The translation follows the case table literally, with one amendment in
//! both counterfactual cases: the comparison variable `x_c` is pinned to the
//! evaluation level by an extra conjunct `E(x_c, x_t)`. Without it `x_c`
//! ranges over all positions of the compared trace, while the direct
//! semantics compare traces at the current position only. Pass
//! `faithful: true` to get the unamended text.

mod eval;
mod text;

pub use eval::{eval_fo, holds, FoDomain};
pub use text::{parse_fo, FoParseError};

use crate::formula::{Counterfactual, Formula};
use crate::model::System;
use std::fmt;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum FoFormula {
    Exists(String, Box<FoFormula>),
    Forall(String, Box<FoFormula>),
    Not(Box<FoFormula>),
    Or(Box<FoFormula>, Box<FoFormula>),
    And(Box<FoFormula>, Box<FoFormula>),
    Implies(Box<FoFormula>, Box<FoFormula>),
    Iff(Box<FoFormula>, Box<FoFormula>),
    /// `P_p` at the trace of `trace_of` and the position of `pos_of`.
    Pred {
        prop: String,
        trace_of: String,
        pos_of: String,
    },
    Less(String, String),
    Eq(String, String),
    EqualLevel(String, String),
    Succ(String, String),
    Min(String),
}

impl FoFormula {
    pub fn exists(v: impl Into<String>, f: FoFormula) -> FoFormula {
        FoFormula::Exists(v.into(), Box::new(f))
    }

    pub fn forall(v: impl Into<String>, f: FoFormula) -> FoFormula {
        FoFormula::Forall(v.into(), Box::new(f))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(f: FoFormula) -> FoFormula {
        FoFormula::Not(Box::new(f))
    }

    pub fn or(l: FoFormula, r: FoFormula) -> FoFormula {
        FoFormula::Or(Box::new(l), Box::new(r))
    }

    pub fn and(l: FoFormula, r: FoFormula) -> FoFormula {
        FoFormula::And(Box::new(l), Box::new(r))
    }

    pub fn implies(l: FoFormula, r: FoFormula) -> FoFormula {
        FoFormula::Implies(Box::new(l), Box::new(r))
    }

    pub fn iff(l: FoFormula, r: FoFormula) -> FoFormula {
        FoFormula::Iff(Box::new(l), Box::new(r))
    }

    /// `P_p(x)`.
    pub fn pred(prop: impl Into<String>, x: &str) -> FoFormula {
        FoFormula::Pred {
            prop: prop.into(),
            trace_of: x.to_string(),
            pos_of: x.to_string(),
        }
    }

    /// `x <= y`, spelled out as `x < y | x = y`.
    pub fn le(x: &str, y: &str) -> FoFormula {
        FoFormula::or(
            FoFormula::Less(x.into(), y.into()),
            FoFormula::Eq(x.into(), y.into()),
        )
    }

    /// Number of AST nodes.
    pub fn size(&self) -> usize {
        use FoFormula::*;
        match self {
            Exists(_, f) | Forall(_, f) | Not(f) => 1 + f.size(),
            Or(l, r) | And(l, r) | Implies(l, r) | Iff(l, r) => 1 + l.size() + r.size(),
            _ => 1,
        }
    }

    /// Variables occurring free.
    pub fn free_vars(&self) -> std::collections::BTreeSet<String> {
        use FoFormula::*;
        let mut out = std::collections::BTreeSet::new();
        match self {
            Exists(v, f) | Forall(v, f) => {
                out = f.free_vars();
                out.remove(v);
            }
            Not(f) => out = f.free_vars(),
            Or(l, r) | And(l, r) | Implies(l, r) | Iff(l, r) => {
                out = l.free_vars();
                out.extend(r.free_vars());
            }
            Pred {
                trace_of, pos_of, ..
            } => {
                out.insert(trace_of.clone());
                out.insert(pos_of.clone());
            }
            Less(a, b) | Eq(a, b) | EqualLevel(a, b) | Succ(a, b) => {
                out.insert(a.clone());
                out.insert(b.clone());
            }
            Min(a) => {
                out.insert(a.clone());
            }
        }
        out
    }
}

impl fmt::Display for FoFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        text::write_fo(self, f)
    }
}

/// Text of a formula; same as `to_string`.
pub fn print_fo(f: &FoFormula) -> String {
    f.to_string()
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TranslateError {
    #[error("`{0}` is not in the core fragment; desugar it first")]
    UnsupportedNode(String),
    #[error("unknown agent `{0}`")]
    UnknownAgent(String),
    #[error("traced atom `{0}` outside a similarity formula")]
    TracedAtomOutsideSimilarity(String),
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct TranslateOptions {
    /// Omit the `E(x_c, x_t)` pin in the counterfactual cases.
    pub faithful: bool,
}

struct Translator<'a> {
    sys: &'a System,
    opts: TranslateOptions,
    next: usize,
}

/// Trace variables of a similarity formula, bound to FO variables.
type Binding<'a> = Option<(&'a [String; 3], [&'a str; 3])>;

impl Translator<'_> {
    fn fresh(&mut self) -> String {
        let v = format!("x{}", self.next);
        self.next += 1;
        v
    }

    fn go(&mut self, f: &Formula, x: &str, bind: Binding<'_>) -> Result<FoFormula, TranslateError> {
        use FoFormula as G;
        use Formula as F;
        Ok(match f {
            F::True => G::Eq(x.into(), x.into()),
            F::False => G::not(G::Eq(x.into(), x.into())),
            F::Atom(p) => G::pred(p.clone(), x),
            F::Traced(p, v) => {
                let (params, vars) =
                    bind.ok_or_else(|| TranslateError::TracedAtomOutsideSimilarity(f.to_string()))?;
                let k = params
                    .iter()
                    .position(|q| q == v)
                    .ok_or_else(|| TranslateError::TracedAtomOutsideSimilarity(f.to_string()))?;
                G::Pred {
                    prop: p.clone(),
                    trace_of: vars[k].to_string(),
                    pos_of: x.to_string(),
                }
            }
            F::Not(g) => G::not(self.go(g, x, bind)?),
            F::And(l, r) => G::and(self.go(l, x, bind)?, self.go(r, x, bind)?),
            F::Next(g) => {
                let y = self.fresh();
                G::exists(
                    y.clone(),
                    G::and(G::Succ(x.into(), y.clone()), self.go(g, &y, bind)?),
                )
            }
            F::Prev(g) => {
                let y = self.fresh();
                G::exists(
                    y.clone(),
                    G::and(G::Succ(y.clone(), x.into()), self.go(g, &y, bind)?),
                )
            }
            F::Until(l, r) => {
                let x2 = self.fresh();
                let right = self.go(r, &x2, bind)?;
                let x1 = self.fresh();
                let left = self.go(l, &x1, bind)?;
                G::exists(
                    x2.clone(),
                    G::and(
                        G::and(G::le(x, &x2), right),
                        G::forall(
                            x1.clone(),
                            G::implies(
                                G::and(G::le(x, &x1), G::Less(x1.clone(), x2.clone())),
                                left,
                            ),
                        ),
                    ),
                )
            }
            F::Since(l, r) => {
                let x2 = self.fresh();
                let right = self.go(r, &x2, bind)?;
                let x1 = self.fresh();
                let left = self.go(l, &x1, bind)?;
                G::exists(
                    x2.clone(),
                    G::and(
                        G::and(G::le(&x2, x), right),
                        G::forall(
                            x1.clone(),
                            G::implies(
                                G::and(G::le(&x1, x), G::Less(x2.clone(), x1.clone())),
                                left,
                            ),
                        ),
                    ),
                )
            }
            F::Know(a, g) => {
                let agent = self
                    .sys
                    .agent(a)
                    .ok_or_else(|| TranslateError::UnknownAgent(a.clone()))?;
                let xe = self.fresh();
                let xe_m = self.fresh();
                let xt_m = self.fresh();
                let same_obs = agent
                    .observes
                    .iter()
                    .map(|p| G::iff(G::pred(p.clone(), &xe_m), G::pred(p.clone(), &xt_m)))
                    .reduce(G::and)
                    .unwrap_or_else(|| G::Eq(xe_m.clone(), xe_m.clone()));
                let prefix_eq = G::forall(
                    xe_m.clone(),
                    G::forall(
                        xt_m.clone(),
                        G::implies(
                            G::and(
                                G::and(G::le(&xe_m, &xe), G::le(&xt_m, x)),
                                G::EqualLevel(xe_m.clone(), xt_m.clone()),
                            ),
                            same_obs,
                        ),
                    ),
                );
                let body = self.go(g, &xe, bind)?;
                G::forall(
                    xe.clone(),
                    G::implies(G::and(G::EqualLevel(xe.clone(), x.into()), prefix_eq), body),
                )
            }
            F::Would(a, l, r) => self.counterfactual(Counterfactual::Would, a, l, r, x)?,
            F::UWould(a, l, r) => self.counterfactual(Counterfactual::UWould, a, l, r, x)?,
            other => return Err(TranslateError::UnsupportedNode(other.to_string())),
        })
    }

    /// `fo(Σ(a)(u, v, w), x)`.
    fn sim(&mut self, agent: &str, vars: [&str; 3], x: &str) -> Result<FoFormula, TranslateError> {
        let rel = &self
            .sys
            .agent(agent)
            .ok_or_else(|| TranslateError::UnknownAgent(agent.to_string()))?
            .similarity;
        let core = rel.core().clone();
        self.go(&core, x, Some((rel.params(), vars)))
    }

    /// `∀x_c. [E(x_c, x) ∧] Σ(x, x_c, e) → (fo(φ1, x_c) → fo(φ2, x_c))`.
    fn closer_ok(
        &mut self,
        a: &str,
        e: &str,
        l: &Formula,
        r: &Formula,
        x: &str,
    ) -> Result<FoFormula, TranslateError> {
        use FoFormula as G;
        let xc = self.fresh();
        let sim = self.sim(a, [x, &xc, e], x)?;
        let guard = if self.opts.faithful {
            sim
        } else {
            G::and(G::EqualLevel(xc.clone(), x.into()), sim)
        };
        let l = self.go(l, &xc, None)?;
        let r = self.go(r, &xc, None)?;
        Ok(G::forall(xc.clone(), G::implies(guard, G::implies(l, r))))
    }

    fn counterfactual(
        &mut self,
        kind: Counterfactual,
        a: &str,
        l: &Formula,
        r: &Formula,
        x: &str,
    ) -> Result<FoFormula, TranslateError> {
        use FoFormula as G;
        match kind {
            Counterfactual::Would => {
                let xe = self.fresh();
                let acc = self.sim(a, [x, x, &xe], x)?;
                let not_ante = G::not(self.go(l, &xe, None)?);
                let vacuous = G::forall(
                    xe.clone(),
                    G::implies(G::and(G::EqualLevel(xe.clone(), x.into()), acc), not_ante),
                );
                let xe2 = self.fresh();
                let acc2 = self.sim(a, [x, x, &xe2], x)?;
                let ante2 = self.go(l, &xe2, None)?;
                let closer = self.closer_ok(a, &xe2, l, r, x)?;
                let threshold = G::exists(
                    xe2.clone(),
                    G::and(
                        G::and(G::and(G::EqualLevel(xe2.clone(), x.into()), acc2), ante2),
                        closer,
                    ),
                );
                Ok(G::or(vacuous, threshold))
            }
            Counterfactual::UWould => {
                let xa = self.fresh();
                let acc = self.sim(a, [x, x, &xa], x)?;
                let ante = self.go(l, &xa, None)?;
                let xe = self.fresh();
                let closer_than_a = self.sim(a, [x, &xe, &xa], x)?;
                let ante_e = self.go(l, &xe, None)?;
                let closer = self.closer_ok(a, &xe, l, r, x)?;
                let threshold = G::exists(
                    xe.clone(),
                    G::and(
                        G::and(
                            G::and(G::EqualLevel(xe.clone(), xa.clone()), closer_than_a),
                            ante_e,
                        ),
                        closer,
                    ),
                );
                Ok(G::forall(
                    xa.clone(),
                    G::implies(
                        G::and(G::and(G::EqualLevel(xa.clone(), x.into()), acc), ante),
                        threshold,
                    ),
                ))
            }
            _ => unreachable!("only core counterfactuals are translated"),
        }
    }
}

/// `fo(φ) = ∀x0. min(x0) → fo(φ, x0)`. `f` must be in the core fragment.
pub fn translate(
    f: &Formula,
    sys: &System,
    opts: TranslateOptions,
) -> Result<FoFormula, TranslateError> {
    let mut tr = Translator { sys, opts, next: 0 };
    let x0 = tr.fresh();
    let body = tr.go(f, &x0, None)?;
    Ok(FoFormula::forall(
        x0.clone(),
        FoFormula::implies(FoFormula::Min(x0), body),
    ))
}

/// Size budget the translation is linear in: formula nodes, plus one
/// observation conjunct per observed proposition at each `K`, plus three
/// inlined similarity formulas per counterfactual.
pub fn translation_budget(f: &Formula, sys: &System) -> usize {
    let mut total = 0;
    f.visit(&mut |g| {
        total += 1;
        match g {
            Formula::Know(a, _) => total += sys.agent(a).map_or(0, |a| a.observes.len()),
            Formula::Would(a, ..) | Formula::UWould(a, ..) => {
                total += 3 * sys.agent(a).map_or(0, |a| a.similarity.core().size())
            }
            _ => {}
        }
    });
    total
}
