//! The hiring scenario: an applicant `a` and a recruiter `r` each pick a
//! job (accounting, sales, it) and a gender (m, f); an offer is made when
//! the applicant's picks match the recruiter's preference.
//!
//! State ids are `s0` and `{a_job}_{a_gen}_{r_job}_{r_gen}`, e.g.
//! `it_f_sales_f`.

use crate::model::{
    AgentDocument, KripkeStructure, SimilarityDocument, StateDocument, System, SystemDocument,
};
use crate::trace::{generate_universe, TraceUniverse, UniverseBounds};
use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

pub const JOBS: [&str; 3] = ["accounting", "sales", "it"];
pub const GENDERS: [&str; 2] = ["m", "f"];
pub const OFFER: &str = "offer";
pub const PARAMS: [&str; 3] = ["pi", "pi1", "pi2"];

/// `Att⁺(x)`: the attribute propositions of agent `x` (`"a"` or `"r"`).
pub fn attributes(agent: &str) -> Vec<String> {
    JOBS.iter()
        .chain(GENDERS.iter())
        .map(|v| format!("{agent}_{v}"))
        .collect()
}

/// `Att⁺(a) ∪ Att⁺(r) ∪ {offer}`.
pub fn hiring_aps() -> Vec<String> {
    let mut aps = attributes("a");
    aps.extend(attributes("r"));
    aps.push(OFFER.to_string());
    aps
}

fn decision_states(restricted: bool) -> Vec<StateDocument> {
    let a_jobs: &[&str] = if restricted { &JOBS[1..] } else { &JOBS };
    let mut out = Vec::new();
    for x in a_jobs {
        for y in GENDERS {
            for v in JOBS {
                for w in GENDERS {
                    let mut labels = vec![
                        format!("a_{x}"),
                        format!("a_{y}"),
                        format!("r_{v}"),
                        format!("r_{w}"),
                    ];
                    if *x == v && y == w {
                        labels.push(OFFER.to_string());
                    }
                    out.push(StateDocument {
                        id: format!("{x}_{y}_{v}_{w}"),
                        labels,
                    });
                }
            }
        }
    }
    out
}

fn kripke_document(restricted: bool, agents: Vec<AgentDocument>) -> SystemDocument {
    let mut states = vec![StateDocument {
        id: "s0".into(),
        labels: vec![],
    }];
    states.extend(decision_states(restricted));
    let ids: Vec<String> = states.iter().map(|s| s.id.clone()).collect();
    let transitions: BTreeMap<String, Vec<String>> =
        ids.iter().map(|id| (id.clone(), ids.clone())).collect();
    SystemDocument {
        states,
        initial: "s0".into(),
        transitions,
        aps: hiring_aps(),
        agents,
    }
}

/// The fully connected hiring structure: 37 states, or 25 when the
/// applicant cannot pick accounting.
pub fn build_hiring_kripke(include_accounting_for_applicant: bool) -> KripkeStructure {
    System::from_document(kripke_document(!include_accounting_for_applicant, vec![]))
        .expect("hiring structure is valid")
        .kripke()
        .clone()
}

/// Observation maps `(Ω^E, Ω^U)`: everything, or own attributes plus offer.
pub fn build_observation_maps() -> (BTreeMap<String, Vec<String>>, BTreeMap<String, Vec<String>>) {
    let mut explainable = BTreeMap::new();
    let mut unexplainable = BTreeMap::new();
    for x in ["a", "r"] {
        explainable.insert(x.to_string(), hiring_aps());
        let mut own = attributes(x);
        own.push(OFFER.to_string());
        unexplainable.insert(x.to_string(), own);
    }
    (explainable, unexplainable)
}

fn differs(p: &str, a: &str, b: &str) -> String {
    format!("!({p}@{a} <-> {p}@{b})")
}

/// The subset similarity: every attribute change from `pi` to `pi1` is
/// also a change from `pi` to `pi2`, at all positions.
pub fn subset_similarity() -> String {
    let mut alphabet = attributes("a");
    alphabet.extend(attributes("r"));
    let body = alphabet
        .iter()
        .map(|p| {
            format!(
                "({} -> {})",
                differs(p, "pi", "pi1"),
                differs(p, "pi", "pi2")
            )
        })
        .collect::<Vec<_>>()
        .join(" & ");
    format!("G ({body}) & H ({body})")
}

/// Subset similarity restricted to traces agreeing with `pi` on the
/// applicant's gender.
pub fn gender_frozen_similarity() -> String {
    let same = GENDERS
        .iter()
        .flat_map(|g| {
            let p = format!("a_{g}");
            [
                format!("({p}@pi <-> {p}@pi1)"),
                format!("({p}@pi <-> {p}@pi2)"),
            ]
        })
        .collect::<Vec<_>>()
        .join(" & ");
    format!("{} & G ({same}) & H ({same})", subset_similarity())
}

/// Similarity maps `(Σ, Σ′)` as agent → formula text.
pub fn build_similarity_maps() -> (BTreeMap<String, String>, BTreeMap<String, String>) {
    let sigma: BTreeMap<String, String> = ["a", "r"]
        .iter()
        .map(|x| (x.to_string(), subset_similarity()))
        .collect();
    let mut frozen = sigma.clone();
    frozen.insert("a".into(), gender_frozen_similarity());
    (sigma, frozen)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Variant {
    Explainable,
    Unexplainable,
    Restricted,
    GenderFrozen,
}

impl Variant {
    pub const ALL: [Variant; 4] = [
        Variant::Explainable,
        Variant::Unexplainable,
        Variant::Restricted,
        Variant::GenderFrozen,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Variant::Explainable => "explainable",
            Variant::Unexplainable => "unexplainable",
            Variant::Restricted => "restricted",
            Variant::GenderFrozen => "gender-frozen",
        }
    }

    pub fn description(self) -> &'static str {
        match self {
            Variant::Explainable => "both agents observe everything; subset similarity",
            Variant::Unexplainable => {
                "each agent observes own attributes and offer; subset similarity"
            }
            Variant::Restricted => "applicant cannot pick accounting; both observe everything",
            Variant::GenderFrozen => {
                "both observe everything; applicant's similarity keeps a_gen fixed"
            }
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Variant {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Variant::ALL
            .into_iter()
            .find(|v| v.name() == s)
            .ok_or_else(|| format!("unknown variant `{s}`"))
    }
}

/// The variant as a system document.
pub fn variant_document(v: Variant) -> SystemDocument {
    let (obs_e, obs_u) = build_observation_maps();
    let (sigma, frozen) = build_similarity_maps();
    let obs = if v == Variant::Unexplainable {
        obs_u
    } else {
        obs_e
    };
    let sim = if v == Variant::GenderFrozen {
        frozen
    } else {
        sigma
    };
    let agents = ["a", "r"]
        .iter()
        .map(|x| AgentDocument {
            name: x.to_string(),
            observes: obs[*x].clone(),
            similarity: SimilarityDocument {
                params: PARAMS.iter().map(|p| p.to_string()).collect(),
                formula: sim[*x].clone(),
            },
        })
        .collect();
    kripke_document(v == Variant::Restricted, agents)
}

pub fn build_system(v: Variant) -> System {
    System::from_document(variant_document(v)).expect("hiring variants are valid")
}

/// `{s0^ω} ∪ {s0 · d · s0^ω}` over all decision states `d`, in generation
/// order.
pub fn single_round_universe(sys: &System) -> TraceUniverse {
    generate_universe(sys, &UniverseBounds::new(2, 1).with_loop_states(["s0"]))
        .expect("single-round universe is small")
}
