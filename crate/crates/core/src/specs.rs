//! Builders for the counterfactual explainability requirements and an
//! empirical entailment probe.
//!
//! All four families share one shape,
//! `G(¬outcome → ⋁_{α,β} K[k]((α ∧ β) MIGHT[c] outcome))`, and differ in
//! the knower `k`, the counterfactual agent `c`, and whose attribute
//! literals `α, β` range over. WCE moves the disjunction inside the
//! counterfactual antecedent.

use crate::formula::Formula;
use crate::model::System;
use crate::semantics::{EvalContext, Mode, SemanticsError, Verdict};
use crate::trace::TraceUniverse;
use rayon::prelude::*;
use serde::Serialize;
use std::collections::{BTreeMap, BTreeSet};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SpecError {
    #[error("agent `{0}` has no attributes")]
    EmptyAttributes(String),
    #[error("proposition `{0}` is not in the vocabulary's proposition set")]
    UnknownProposition(String),
    #[error("expected a formula of the form `G φ`, found `{0}`")]
    NotGlobally(String),
}

/// Per-agent positive attributes, the outcome proposition, and the
/// proposition set they must belong to.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AttributeVocabulary {
    pub attributes: BTreeMap<String, Vec<String>>,
    pub outcome: String,
    pub aps: BTreeSet<String>,
}

impl AttributeVocabulary {
    pub fn new(
        attributes: BTreeMap<String, Vec<String>>,
        outcome: impl Into<String>,
        aps: impl IntoIterator<Item = impl Into<String>>,
    ) -> Self {
        AttributeVocabulary {
            attributes,
            outcome: outcome.into(),
            aps: aps.into_iter().map(Into::into).collect(),
        }
    }

    /// Attributes of both hiring agents, outcome `offer`.
    pub fn hiring() -> Self {
        let attrs = ["a", "r"]
            .iter()
            .map(|x| (x.to_string(), crate::casestudy::attributes(x)))
            .collect();
        AttributeVocabulary::new(
            attrs,
            crate::casestudy::OFFER,
            crate::casestudy::hiring_aps(),
        )
    }

    fn check(&self, agent: &str) -> Result<&[String], SpecError> {
        if !self.aps.contains(&self.outcome) {
            return Err(SpecError::UnknownProposition(self.outcome.clone()));
        }
        let attrs = self
            .attributes
            .get(agent)
            .filter(|a| !a.is_empty())
            .ok_or_else(|| SpecError::EmptyAttributes(agent.to_string()))?;
        if let Some(p) = attrs.iter().find(|p| !self.aps.contains(*p)) {
            return Err(SpecError::UnknownProposition(p.clone()));
        }
        Ok(attrs)
    }

    /// `Att(x)`: positives in order, then their negations.
    pub fn literals(&self, agent: &str) -> Result<Vec<Formula>, SpecError> {
        let attrs = self.check(agent)?;
        let pos = attrs.iter().map(Formula::atom);
        let neg = attrs.iter().map(|p| Formula::not(Formula::atom(p)));
        Ok(pos.chain(neg).collect())
    }
}

fn contradictory(a: &Formula, b: &Formula) -> bool {
    matches!((a, b), (Formula::Not(x), y) | (y, Formula::Not(x)) if **x == *y)
}

/// Unordered distinct jointly satisfiable pairs as `α ∧ β`. When there are
/// none (a single attribute), the positive literals alone.
pub fn literal_pairs(
    vocab: &AttributeVocabulary,
    agents: &[&str],
) -> Result<Vec<Formula>, SpecError> {
    let mut lits = Vec::new();
    for a in agents {
        lits.extend(vocab.literals(a)?);
    }
    let mut out = Vec::new();
    for i in 0..lits.len() {
        for j in i + 1..lits.len() {
            if !contradictory(&lits[i], &lits[j]) {
                out.push(Formula::and(lits[i].clone(), lits[j].clone()));
            }
        }
    }
    if out.is_empty() {
        out = lits
            .into_iter()
            .filter(|l| matches!(l, Formula::Atom(_)))
            .collect();
    }
    Ok(out)
}

fn shape(
    vocab: &AttributeVocabulary,
    pair_agents: &[&str],
    knower: &str,
    cf_agent: &str,
) -> Result<Formula, SpecError> {
    let outcome = Formula::atom(&vocab.outcome);
    let disjuncts = literal_pairs(vocab, pair_agents)?
        .into_iter()
        .map(|ante| Formula::know(knower, Formula::might(cf_agent, ante, outcome.clone())));
    Ok(Formula::globally(Formula::implies(
        Formula::not(outcome.clone()),
        Formula::or_all(disjuncts),
    )))
}

/// Internal counterfactual explainability for `agent`.
pub fn build_ice(vocab: &AttributeVocabulary, agent: &str) -> Result<Formula, SpecError> {
    shape(vocab, &[agent], agent, agent)
}

/// Weak counterfactual explainability: one counterfactual with the
/// disjunction of all pairs as antecedent.
pub fn build_wce(vocab: &AttributeVocabulary, agent: &str) -> Result<Formula, SpecError> {
    let outcome = Formula::atom(&vocab.outcome);
    let ante = Formula::or_all(literal_pairs(vocab, &[agent])?);
    Ok(Formula::globally(Formula::implies(
        Formula::not(outcome.clone()),
        Formula::know(agent, Formula::might(agent, ante, outcome)),
    )))
}

/// General counterfactual explainability: pairs over every agent's
/// literals, known by `knower`, with `cf_agent`'s similarity.
pub fn build_gce(
    vocab: &AttributeVocabulary,
    knower: &str,
    cf_agent: &str,
) -> Result<Formula, SpecError> {
    let agents: Vec<&str> = vocab.attributes.keys().map(String::as_str).collect();
    shape(vocab, &agents, knower, cf_agent)
}

/// External counterfactual explainability: `subject`'s attribute pairs,
/// known by `knower` under `cf_agent`'s similarity.
pub fn build_ece(
    vocab: &AttributeVocabulary,
    subject: &str,
    knower: &str,
    cf_agent: &str,
) -> Result<Formula, SpecError> {
    shape(vocab, &[subject], knower, cf_agent)
}

/// `G φ` becomes `X^k φ`: the body checked at position `k` only.
pub fn position_variant(f: &Formula, k: usize) -> Result<Formula, SpecError> {
    match f {
        Formula::Globally(body) => Ok(Formula::next_n(k, (**body).clone())),
        other => Err(SpecError::NotGlobally(other.to_string())),
    }
}

/// One system of a probe family.
pub struct FamilyMember {
    pub name: String,
    pub system: System,
    pub universe: TraceUniverse,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ProbeEntry {
    pub system: String,
    pub first: Verdict,
    pub second: Verdict,
    /// Traces (at position 0) satisfying `first` but not `second`.
    pub first_only: Vec<String>,
    /// Traces satisfying `second` but not `first`.
    pub second_only: Vec<String>,
}

/// Evidence about whether models of `first` are models of `second`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ProbeReport {
    pub first: String,
    pub second: String,
    pub entries: Vec<ProbeEntry>,
    /// No member satisfies `first` but not `second`.
    pub consistent_with_inclusion: bool,
    /// Members satisfying `first` but not `second`.
    pub inclusion_counterexamples: Vec<String>,
    /// Members satisfying `second` but not `first`.
    pub strictness_witnesses: Vec<String>,
}

/// Checks both formulas on every member (exact mode) and classifies.
pub fn entailment_probe(
    f1: &Formula,
    f2: &Formula,
    family: &[FamilyMember],
) -> Result<ProbeReport, SemanticsError> {
    let entries: Result<Vec<ProbeEntry>, SemanticsError> = family
        .par_iter()
        .map(|m| {
            let ctx = EvalContext::new(&m.system, &m.universe, Mode::exact());
            let first = ctx.check_system(f1)?;
            let second = ctx.check_system(f2)?;
            let only = |a: &Verdict, b: &Verdict| -> Vec<String> {
                b.failing_traces
                    .iter()
                    .filter(|k| !a.failing_traces.contains(k))
                    .map(|&k| m.universe.get(k).to_string())
                    .collect()
            };
            Ok(ProbeEntry {
                system: m.name.clone(),
                first_only: only(&first, &second),
                second_only: only(&second, &first),
                first,
                second,
            })
        })
        .collect();
    let entries = entries?;
    let counter: Vec<String> = entries
        .iter()
        .filter(|e| e.first.result && !e.second.result)
        .map(|e| e.system.clone())
        .collect();
    let strict = entries
        .iter()
        .filter(|e| !e.first.result && e.second.result)
        .map(|e| e.system.clone())
        .collect();
    Ok(ProbeReport {
        first: f1.to_string(),
        second: f2.to_string(),
        consistent_with_inclusion: counter.is_empty(),
        inclusion_counterexamples: counter,
        strictness_witnesses: strict,
        entries,
    })
}
