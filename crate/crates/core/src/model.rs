//! Similarity-extended Kripke structures and their JSON file format.
//!
//! A [`SystemDocument`] is the raw, serde-facing form. [`validate_system`]
//! reports every broken rule; [`System::from_document`] refuses to build
//! unless the report is empty, so a [`System`] always satisfies the
//! structural invariants.

use crate::formula::{self, RelationalFormula};
use crate::trace::LabelSet;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StateDocument {
    pub id: String,
    #[serde(default)]
    pub labels: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimilarityDocument {
    pub params: Vec<String>,
    pub formula: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AgentDocument {
    pub name: String,
    #[serde(default)]
    pub observes: Vec<String>,
    pub similarity: SimilarityDocument,
}

/// On-disk system description.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SystemDocument {
    pub states: Vec<StateDocument>,
    pub initial: String,
    pub transitions: BTreeMap<String, Vec<String>>,
    pub aps: Vec<String>,
    #[serde(default)]
    pub agents: Vec<AgentDocument>,
}

impl SystemDocument {
    pub fn from_json(text: &str) -> Result<SystemDocument, ModelError> {
        Ok(serde_json::from_str(text)?)
    }

    /// Pretty JSON with a trailing newline. Transition keys come out sorted.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("documents always serialize");
        s.push('\n');
        s
    }
}

/// A broken structural rule.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    DuplicateState(String),
    UnknownInitial(String),
    EmptySuccessors(String),
    UnknownTransitionSource(String),
    UnknownTransitionTarget { from: String, to: String },
    DuplicateProposition(String),
    LabelNotInAps { state: String, prop: String },
    DuplicateAgent(String),
    ObservationNotInAps { agent: String, prop: String },
    SimilarityParamCount { agent: String, found: usize },
    SimilaritySyntax { agent: String, message: String },
    SimilarityInvalid { agent: String, message: String },
    SimilarityUnknownProposition { agent: String, prop: String },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use Violation::*;
        match self {
            DuplicateState(s) => write!(f, "state `{s}` is declared more than once"),
            UnknownInitial(s) => write!(f, "initial state `{s}` is not declared"),
            EmptySuccessors(s) => write!(f, "state `{s}` has no successor"),
            UnknownTransitionSource(s) => write!(f, "transitions given for undeclared state `{s}`"),
            UnknownTransitionTarget { from, to } => {
                write!(
                    f,
                    "transition `{from}` -> `{to}` targets an undeclared state"
                )
            }
            DuplicateProposition(p) => write!(f, "proposition `{p}` is declared more than once"),
            LabelNotInAps { state, prop } => {
                write!(
                    f,
                    "state `{state}` is labeled with unknown proposition `{prop}`"
                )
            }
            DuplicateAgent(a) => write!(f, "agent `{a}` is declared more than once"),
            ObservationNotInAps { agent, prop } => {
                write!(f, "agent `{agent}` observes unknown proposition `{prop}`")
            }
            SimilarityParamCount { agent, found } => write!(
                f,
                "similarity of agent `{agent}` declares {found} parameters, expected 3"
            ),
            SimilaritySyntax { agent, message } => {
                write!(
                    f,
                    "similarity of agent `{agent}`: syntax error at {message}"
                )
            }
            SimilarityInvalid { agent, message } => {
                write!(f, "similarity of agent `{agent}`: {message}")
            }
            SimilarityUnknownProposition { agent, prop } => write!(
                f,
                "similarity of agent `{agent}` mentions unknown proposition `{prop}`"
            ),
        }
    }
}

/// Result of [`validate_system`]; empty means valid.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violations.is_empty() {
            return f.write_str("valid");
        }
        for (k, v) in self.violations.iter().enumerate() {
            if k > 0 {
                f.write_str("\n")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("cannot read system file: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed system file: {0}")]
    Syntax(#[from] serde_json::Error),
    #[error("invariant violation: {0}")]
    Invalid(ValidationReport),
}

fn parse_similarity(
    agent: &AgentDocument,
    aps: &BTreeSet<&str>,
    out: &mut Vec<Violation>,
) -> Option<RelationalFormula> {
    let sim = &agent.similarity;
    let name = agent.name.clone();
    let [p0, p1, p2] = sim.params.as_slice() else {
        out.push(Violation::SimilarityParamCount {
            agent: name,
            found: sim.params.len(),
        });
        return None;
    };
    let f = match formula::parse(&sim.formula) {
        Ok(f) => f,
        Err(e) => {
            out.push(Violation::SimilaritySyntax {
                agent: name,
                message: e.to_string(),
            });
            return None;
        }
    };
    let rel = match formula::validate_relational(&f, [p0, p1, p2]) {
        Ok(r) => r,
        Err(e) => {
            out.push(Violation::SimilarityInvalid {
                agent: name,
                message: e.to_string(),
            });
            return None;
        }
    };
    let mut unknown = BTreeSet::new();
    f.visit(&mut |g| {
        if let formula::Formula::Traced(p, _) = g {
            if !aps.contains(p.as_str()) {
                unknown.insert(p.clone());
            }
        }
    });
    if !unknown.is_empty() {
        out.extend(
            unknown
                .into_iter()
                .map(|prop| Violation::SimilarityUnknownProposition {
                    agent: name.clone(),
                    prop,
                }),
        );
        return None;
    }
    Some(rel)
}

/// Checks every structural rule without building anything.
pub fn validate_system(doc: &SystemDocument) -> ValidationReport {
    let mut v = Vec::new();
    let mut ids = BTreeSet::new();
    for s in &doc.states {
        if !ids.insert(s.id.as_str()) {
            v.push(Violation::DuplicateState(s.id.clone()));
        }
    }
    let mut aps = BTreeSet::new();
    for p in &doc.aps {
        if !aps.insert(p.as_str()) {
            v.push(Violation::DuplicateProposition(p.clone()));
        }
    }
    if !ids.contains(doc.initial.as_str()) {
        v.push(Violation::UnknownInitial(doc.initial.clone()));
    }
    for s in &doc.states {
        for p in &s.labels {
            if !aps.contains(p.as_str()) {
                v.push(Violation::LabelNotInAps {
                    state: s.id.clone(),
                    prop: p.clone(),
                });
            }
        }
    }
    for (from, tos) in &doc.transitions {
        if !ids.contains(from.as_str()) {
            v.push(Violation::UnknownTransitionSource(from.clone()));
        }
        for to in tos {
            if !ids.contains(to.as_str()) {
                v.push(Violation::UnknownTransitionTarget {
                    from: from.clone(),
                    to: to.clone(),
                });
            }
        }
    }
    let mut reported = BTreeSet::new();
    for s in &doc.states {
        let empty = doc.transitions.get(&s.id).is_none_or(|t| t.is_empty());
        if empty && reported.insert(s.id.as_str()) {
            v.push(Violation::EmptySuccessors(s.id.clone()));
        }
    }
    let mut names = BTreeSet::new();
    for a in &doc.agents {
        if !names.insert(a.name.as_str()) {
            v.push(Violation::DuplicateAgent(a.name.clone()));
        }
        for p in &a.observes {
            if !aps.contains(p.as_str()) {
                v.push(Violation::ObservationNotInAps {
                    agent: a.name.clone(),
                    prop: p.clone(),
                });
            }
        }
        parse_similarity(a, &aps, &mut v);
    }
    ValidationReport { violations: v }
}

/// States, transitions and labels. State `k` is identified by `state_ids()[k]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KripkeStructure {
    ids: Vec<String>,
    index: HashMap<String, usize>,
    initial: usize,
    successors: Vec<Vec<usize>>,
    aps: Vec<String>,
    labels: Vec<LabelSet>,
}

impl KripkeStructure {
    pub fn state_ids(&self) -> &[String] {
        &self.ids
    }

    pub fn num_states(&self) -> usize {
        self.ids.len()
    }

    pub fn state_index(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    pub fn initial(&self) -> usize {
        self.initial
    }

    pub fn successors(&self, state: usize) -> &[usize] {
        &self.successors[state]
    }

    pub fn aps(&self) -> &[String] {
        &self.aps
    }

    pub fn label(&self, state: usize) -> &LabelSet {
        &self.labels[state]
    }

    /// True if every state is a successor of every state.
    pub fn is_fully_connected(&self) -> bool {
        let n = self.num_states();
        self.successors.iter().all(|s| {
            let set: BTreeSet<_> = s.iter().collect();
            set.len() == n
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Agent {
    pub name: String,
    pub observes: BTreeSet<String>,
    pub similarity: RelationalFormula,
}

/// A Kripke structure with per-agent observation and similarity maps.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct System {
    kripke: KripkeStructure,
    agents: Vec<Agent>,
    document: SystemDocument,
}

impl System {
    /// Validates and builds.
    pub fn from_document(doc: SystemDocument) -> Result<System, ModelError> {
        let report = validate_system(&doc);
        if !report.is_valid() {
            return Err(ModelError::Invalid(report));
        }
        let ids: Vec<String> = doc.states.iter().map(|s| s.id.clone()).collect();
        let index: HashMap<String, usize> = ids
            .iter()
            .enumerate()
            .map(|(k, id)| (id.clone(), k))
            .collect();
        let successors = ids
            .iter()
            .map(|id| doc.transitions[id].iter().map(|t| index[t]).collect())
            .collect();
        let labels = doc
            .states
            .iter()
            .map(|s| s.labels.iter().cloned().collect())
            .collect();
        let kripke = KripkeStructure {
            initial: index[&doc.initial],
            index,
            ids,
            successors,
            aps: doc.aps.clone(),
            labels,
        };
        let aps: BTreeSet<&str> = doc.aps.iter().map(String::as_str).collect();
        let agents = doc
            .agents
            .iter()
            .map(|a| Agent {
                name: a.name.clone(),
                observes: a.observes.iter().cloned().collect(),
                similarity: parse_similarity(a, &aps, &mut Vec::new()).expect("validated above"),
            })
            .collect();
        Ok(System {
            kripke,
            agents,
            document: doc,
        })
    }

    pub fn from_json(text: &str) -> Result<System, ModelError> {
        System::from_document(SystemDocument::from_json(text)?)
    }

    pub fn kripke(&self) -> &KripkeStructure {
        &self.kripke
    }

    pub fn agents(&self) -> &[Agent] {
        &self.agents
    }

    pub fn agent(&self, name: &str) -> Option<&Agent> {
        self.agents.iter().find(|a| a.name == name)
    }

    pub fn agent_index(&self, name: &str) -> Option<usize> {
        self.agents.iter().position(|a| a.name == name)
    }

    pub fn document(&self) -> &SystemDocument {
        &self.document
    }

    pub fn to_json(&self) -> String {
        self.document.to_json()
    }
}

/// Reads and validates a system file.
pub fn load_system(path: impl AsRef<Path>) -> Result<System, ModelError> {
    let text = std::fs::read_to_string(path)?;
    System::from_json(&text)
}

pub fn save_system(system: &System, path: impl AsRef<Path>) -> Result<(), ModelError> {
    std::fs::write(path, system.to_json())?;
    Ok(())
}
