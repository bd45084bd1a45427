//! Formula syntax: the AST shared by the parser, printer, desugarer and the
//! evaluators.
//!
//! A [`Formula`] keeps derived operators (`|`, `->`, `F`, `MIGHT`, ...) as
//! their own variants so that printing reproduces what was parsed.
//! [`Formula::desugar`] rewrites a formula into the core fragment.

mod parser;
mod printer;
mod relational;

pub use parser::{parse, ParseError};
pub use relational::{validate_relational, RelationalError, RelationalFormula, RelationalProblem};

use std::collections::BTreeSet;

/// A temporal-epistemic-counterfactual formula.
///
/// Agent names and proposition names are plain strings; they are resolved
/// against a [`System`](crate::model::System) only when the formula is
/// evaluated or translated.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Formula {
    True,
    False,
    Atom(String),
    /// `p@pi`: proposition `p` read on the trace bound to variable `pi`.
    Traced(String, String),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    Iff(Box<Formula>, Box<Formula>),
    Next(Box<Formula>),
    Until(Box<Formula>, Box<Formula>),
    /// Strict previous position; false at position 0.
    Prev(Box<Formula>),
    Since(Box<Formula>, Box<Formula>),
    Eventually(Box<Formula>),
    Globally(Box<Formula>),
    Once(Box<Formula>),
    Historically(Box<Formula>),
    Know(String, Box<Formula>),
    Would(String, Box<Formula>, Box<Formula>),
    UWould(String, Box<Formula>, Box<Formula>),
    Might(String, Box<Formula>, Box<Formula>),
    EMight(String, Box<Formula>, Box<Formula>),
}

/// Counterfactual operator flavours, used where the four are handled uniformly.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Counterfactual {
    Would,
    UWould,
    Might,
    EMight,
}

impl Counterfactual {
    pub fn keyword(self) -> &'static str {
        match self {
            Counterfactual::Would => "WOULD",
            Counterfactual::UWould => "UWOULD",
            Counterfactual::Might => "MIGHT",
            Counterfactual::EMight => "EMIGHT",
        }
    }
}

fn bx(f: Formula) -> Box<Formula> {
    Box::new(f)
}

impl Formula {
    pub fn atom(name: impl Into<String>) -> Formula {
        Formula::Atom(name.into())
    }

    pub fn traced(prop: impl Into<String>, var: impl Into<String>) -> Formula {
        Formula::Traced(prop.into(), var.into())
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(f: Formula) -> Formula {
        Formula::Not(bx(f))
    }

    pub fn and(l: Formula, r: Formula) -> Formula {
        Formula::And(bx(l), bx(r))
    }

    pub fn or(l: Formula, r: Formula) -> Formula {
        Formula::Or(bx(l), bx(r))
    }

    pub fn implies(l: Formula, r: Formula) -> Formula {
        Formula::Implies(bx(l), bx(r))
    }

    pub fn iff(l: Formula, r: Formula) -> Formula {
        Formula::Iff(bx(l), bx(r))
    }

    pub fn next(f: Formula) -> Formula {
        Formula::Next(bx(f))
    }

    pub fn until(l: Formula, r: Formula) -> Formula {
        Formula::Until(bx(l), bx(r))
    }

    pub fn prev(f: Formula) -> Formula {
        Formula::Prev(bx(f))
    }

    pub fn since(l: Formula, r: Formula) -> Formula {
        Formula::Since(bx(l), bx(r))
    }

    pub fn eventually(f: Formula) -> Formula {
        Formula::Eventually(bx(f))
    }

    pub fn globally(f: Formula) -> Formula {
        Formula::Globally(bx(f))
    }

    pub fn once(f: Formula) -> Formula {
        Formula::Once(bx(f))
    }

    pub fn historically(f: Formula) -> Formula {
        Formula::Historically(bx(f))
    }

    pub fn know(agent: impl Into<String>, f: Formula) -> Formula {
        Formula::Know(agent.into(), bx(f))
    }

    pub fn counterfactual(
        op: Counterfactual,
        agent: impl Into<String>,
        antecedent: Formula,
        consequent: Formula,
    ) -> Formula {
        let (agent, l, r) = (agent.into(), bx(antecedent), bx(consequent));
        match op {
            Counterfactual::Would => Formula::Would(agent, l, r),
            Counterfactual::UWould => Formula::UWould(agent, l, r),
            Counterfactual::Might => Formula::Might(agent, l, r),
            Counterfactual::EMight => Formula::EMight(agent, l, r),
        }
    }

    pub fn would(agent: impl Into<String>, l: Formula, r: Formula) -> Formula {
        Formula::counterfactual(Counterfactual::Would, agent, l, r)
    }

    pub fn uwould(agent: impl Into<String>, l: Formula, r: Formula) -> Formula {
        Formula::counterfactual(Counterfactual::UWould, agent, l, r)
    }

    pub fn might(agent: impl Into<String>, l: Formula, r: Formula) -> Formula {
        Formula::counterfactual(Counterfactual::Might, agent, l, r)
    }

    pub fn emight(agent: impl Into<String>, l: Formula, r: Formula) -> Formula {
        Formula::counterfactual(Counterfactual::EMight, agent, l, r)
    }

    /// Left-nested conjunction; `true` for an empty iterator.
    pub fn and_all(items: impl IntoIterator<Item = Formula>) -> Formula {
        items
            .into_iter()
            .reduce(Formula::and)
            .unwrap_or(Formula::True)
    }

    /// Left-nested disjunction; `false` for an empty iterator.
    pub fn or_all(items: impl IntoIterator<Item = Formula>) -> Formula {
        items
            .into_iter()
            .reduce(Formula::or)
            .unwrap_or(Formula::False)
    }

    /// `X^k f`.
    pub fn next_n(k: usize, f: Formula) -> Formula {
        (0..k).fold(f, |acc, _| Formula::next(acc))
    }

    /// The counterfactual view of a node, if it is one.
    pub fn as_counterfactual(&self) -> Option<(Counterfactual, &str, &Formula, &Formula)> {
        match self {
            Formula::Would(a, l, r) => Some((Counterfactual::Would, a, l, r)),
            Formula::UWould(a, l, r) => Some((Counterfactual::UWould, a, l, r)),
            Formula::Might(a, l, r) => Some((Counterfactual::Might, a, l, r)),
            Formula::EMight(a, l, r) => Some((Counterfactual::EMight, a, l, r)),
            _ => None,
        }
    }

    /// Direct children, left to right.
    pub fn children(&self) -> Vec<&Formula> {
        use Formula::*;
        match self {
            True | False | Atom(_) | Traced(..) => vec![],
            Not(f)
            | Next(f)
            | Prev(f)
            | Eventually(f)
            | Globally(f)
            | Once(f)
            | Historically(f)
            | Know(_, f) => vec![f],
            And(l, r)
            | Or(l, r)
            | Implies(l, r)
            | Iff(l, r)
            | Until(l, r)
            | Since(l, r)
            | Would(_, l, r)
            | UWould(_, l, r)
            | Might(_, l, r)
            | EMight(_, l, r) => vec![l, r],
        }
    }

    /// Number of AST nodes.
    pub fn size(&self) -> usize {
        1 + self
            .children()
            .into_iter()
            .map(Formula::size)
            .sum::<usize>()
    }

    /// Height of the AST; a leaf has depth 1.
    pub fn depth(&self) -> usize {
        1 + self
            .children()
            .into_iter()
            .map(Formula::depth)
            .max()
            .unwrap_or(0)
    }

    /// True when only core operators occur.
    pub fn is_core(&self) -> bool {
        use Formula::*;
        let here = matches!(
            self,
            True | False
                | Atom(_)
                | Traced(..)
                | Not(_)
                | And(..)
                | Next(_)
                | Until(..)
                | Prev(_)
                | Since(..)
                | Know(..)
                | Would(..)
                | UWould(..)
        );
        here && self.children().into_iter().all(Formula::is_core)
    }

    /// Rewrites derived operators into the core fragment.
    ///
    /// `F φ = true U φ`, `G φ = !F !φ`, `O φ = true S φ`, `H φ = !O !φ`,
    /// `φ MIGHT ψ = !(φ WOULD !ψ)`, `φ EMIGHT ψ = !(φ UWOULD !ψ)`, and the
    /// boolean connectives via `!` and `&`.
    pub fn desugar(&self) -> Formula {
        use Formula as F;
        match self {
            F::True | F::False | F::Atom(_) | F::Traced(..) => self.clone(),
            F::Not(f) => F::not(f.desugar()),
            F::And(l, r) => F::and(l.desugar(), r.desugar()),
            F::Or(l, r) => F::not(F::and(F::not(l.desugar()), F::not(r.desugar()))),
            F::Implies(l, r) => F::not(F::and(l.desugar(), F::not(r.desugar()))),
            F::Iff(l, r) => {
                let (l, r) = (l.desugar(), r.desugar());
                F::and(
                    F::not(F::and(l.clone(), F::not(r.clone()))),
                    F::not(F::and(r, F::not(l))),
                )
            }
            F::Next(f) => F::next(f.desugar()),
            F::Until(l, r) => F::until(l.desugar(), r.desugar()),
            F::Prev(f) => F::prev(f.desugar()),
            F::Since(l, r) => F::since(l.desugar(), r.desugar()),
            F::Eventually(f) => F::until(F::True, f.desugar()),
            F::Globally(f) => F::not(F::until(F::True, F::not(f.desugar()))),
            F::Once(f) => F::since(F::True, f.desugar()),
            F::Historically(f) => F::not(F::since(F::True, F::not(f.desugar()))),
            F::Know(a, f) => F::know(a.clone(), f.desugar()),
            F::Would(a, l, r) => F::would(a.clone(), l.desugar(), r.desugar()),
            F::UWould(a, l, r) => F::uwould(a.clone(), l.desugar(), r.desugar()),
            F::Might(a, l, r) => F::not(F::would(a.clone(), l.desugar(), F::not(r.desugar()))),
            F::EMight(a, l, r) => F::not(F::uwould(a.clone(), l.desugar(), F::not(r.desugar()))),
        }
    }

    /// Agents mentioned by `K`, and counterfactual operators.
    pub fn agents(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.visit(&mut |f| match f {
            Formula::Know(a, _) => {
                out.insert(a.clone());
            }
            other => {
                if let Some((_, a, _, _)) = other.as_counterfactual() {
                    out.insert(a.to_string());
                }
            }
        });
        out
    }

    /// Untraced propositions.
    pub fn atoms(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.visit(&mut |f| {
            if let Formula::Atom(p) = f {
                out.insert(p.clone());
            }
        });
        out
    }

    /// Pre-order traversal.
    pub fn visit<'a>(&'a self, f: &mut impl FnMut(&'a Formula)) {
        f(self);
        for c in self.children() {
            c.visit(f);
        }
    }
}

/// Encodes antecedent minimality: the conjunction of all `conjuncts` might
/// bring about `consequent`, while no proper nonempty sub-conjunction does.
///
/// For `n` conjuncts the result holds `2^n - 1` counterfactual occurrences.
/// Subsets are enumerated by increasing bitmask, so the output is stable.
pub fn build_minimal_antecedent(
    conjuncts: &[Formula],
    consequent: &Formula,
    agent: &str,
) -> Formula {
    assert!(!conjuncts.is_empty(), "minimal antecedent needs a conjunct");
    assert!(conjuncts.len() < usize::BITS as usize, "too many conjuncts");
    let n = conjuncts.len();
    let subset = |mask: usize| {
        Formula::and_all(
            (0..n)
                .filter(|k| mask & (1 << k) != 0)
                .map(|k| conjuncts[k].clone()),
        )
    };
    let full = (1usize << n) - 1;
    let positive = Formula::might(agent, subset(full), consequent.clone());
    let negatives =
        (1..full).map(|mask| Formula::not(Formula::might(agent, subset(mask), consequent.clone())));
    std::iter::once(positive)
        .chain(negatives)
        .reduce(Formula::and)
        .expect("at least one conjunct")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn count_cf(f: &Formula) -> usize {
        let mut n = 0;
        f.visit(&mut |g| {
            if g.as_counterfactual().is_some() {
                n += 1
            }
        });
        n
    }

    #[test]
    fn derived_operators_desugar_to_core() {
        let p = Formula::atom("p");
        let q = Formula::atom("q");
        assert_eq!(
            Formula::eventually(p.clone()).desugar(),
            Formula::until(Formula::True, p.clone())
        );
        assert_eq!(
            Formula::might("a", p.clone(), q.clone()).desugar(),
            Formula::not(Formula::would("a", p.clone(), Formula::not(q.clone())))
        );
        assert_eq!(
            Formula::emight("a", p.clone(), q.clone()).desugar(),
            Formula::not(Formula::uwould("a", p.clone(), Formula::not(q.clone())))
        );
        assert_eq!(
            Formula::historically(p.clone()).desugar(),
            Formula::not(Formula::since(Formula::True, Formula::not(p.clone())))
        );
        let g = Formula::globally(Formula::implies(p.clone(), Formula::once(q))).desugar();
        assert!(g.is_core());
        assert_eq!(g.desugar(), g);
    }

    #[test]
    fn minimal_antecedent_shapes() {
        let a = Formula::atom("alpha");
        let b = Formula::atom("beta");
        let c = Formula::atom("gamma");
        let offer = Formula::atom("offer");

        let single = build_minimal_antecedent(std::slice::from_ref(&a), &offer, "a");
        assert_eq!(single, Formula::might("a", a.clone(), offer.clone()));

        let two = build_minimal_antecedent(&[a.clone(), b.clone()], &offer, "a");
        let expected = Formula::and(
            Formula::and(
                Formula::might("a", Formula::and(a.clone(), b.clone()), offer.clone()),
                Formula::not(Formula::might("a", a.clone(), offer.clone())),
            ),
            Formula::not(Formula::might("a", b.clone(), offer.clone())),
        );
        assert_eq!(two, expected);

        let three = build_minimal_antecedent(&[a, b, c], &offer, "a");
        assert_eq!(count_cf(&three), 7);
        let mut negated = 0;
        three.visit(&mut |g| {
            if let Formula::Not(inner) = g {
                if inner.as_counterfactual().is_some() {
                    negated += 1;
                }
            }
        });
        assert_eq!(negated, 6);
    }

    #[test]
    fn minimal_antecedent_counts_grow_as_powers_of_two() {
        let offer = Formula::atom("offer");
        for n in 1..=6 {
            let cs: Vec<_> = (0..n).map(|k| Formula::atom(format!("c{k}"))).collect();
            let f = build_minimal_antecedent(&cs, &offer, "a");
            assert_eq!(count_cf(&f), (1 << n) - 1);
        }
    }
}
