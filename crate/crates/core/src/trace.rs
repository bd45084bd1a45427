//! Ultimately periodic traces and finite trace universes.
//!
//! A [`LassoTrace`] denotes the infinite word `prefix · cycle^ω`. A
//! [`TraceUniverse`] is a finite, deduplicated set of lassos that stands in
//! for the (generally uncountable) set of all traces of a system: every
//! verdict produced by the checker is exact relative to the universe it was
//! given, and only relative to it.

use crate::model::{KripkeStructure, System};
use num_integer::Integer;
use serde::Serialize;
use std::collections::{BTreeSet, HashMap};
use std::fmt;
use thiserror::Error;

pub type LabelSet = BTreeSet<String>;

/// Labels of a zipped trace: `(proposition, trace variable)` pairs.
pub type TaggedLabelSet = BTreeSet<(String, String)>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TraceError {
    #[error("a lasso needs a nonempty loop")]
    EmptyLoop,
    #[error("malformed trace literal at column {column}: {message}")]
    Syntax { column: usize, message: String },
    #[error("unknown agent `{0}`")]
    UnknownAgent(String),
    #[error("trace {0} is not the trace of an initial path of the model")]
    NotAPathOfModel(String),
    #[error("universe exceeds the cap of {cap} traces")]
    SizeLimitExceeded { cap: usize },
    #[error("loop filter names unknown state `{0}`")]
    UnknownState(String),
}

/// `prefix · cycle^ω`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LassoTrace<L = LabelSet> {
    prefix: Vec<L>,
    cycle: Vec<L>,
}

impl<L: Clone + Eq> LassoTrace<L> {
    pub fn new(prefix: Vec<L>, cycle: Vec<L>) -> Result<Self, TraceError> {
        if cycle.is_empty() {
            return Err(TraceError::EmptyLoop);
        }
        Ok(LassoTrace { prefix, cycle })
    }

    pub fn prefix(&self) -> &[L] {
        &self.prefix
    }

    pub fn loop_cells(&self) -> &[L] {
        &self.cycle
    }

    pub fn prefix_len(&self) -> usize {
        self.prefix.len()
    }

    pub fn loop_len(&self) -> usize {
        self.cycle.len()
    }

    pub fn label_at(&self, i: usize) -> &L {
        if i < self.prefix.len() {
            &self.prefix[i]
        } else {
            &self.cycle[(i - self.prefix.len()) % self.cycle.len()]
        }
    }

    /// Canonical representative of the denoted word: minimal period first,
    /// then the shortest prefix. Two lassos denote the same word iff their
    /// normal forms are equal.
    pub fn normalized(&self) -> Self {
        let n = self.cycle.len();
        let period = (1..=n)
            .find(|d| n.is_multiple_of(*d) && (0..n).all(|k| self.cycle[k] == self.cycle[k % d]))
            .unwrap_or(n);
        let mut cycle: Vec<L> = self.cycle[..period].to_vec();
        let mut prefix = self.prefix.clone();
        while let Some(last) = prefix.last() {
            if *last != cycle[cycle.len() - 1] {
                break;
            }
            prefix.pop();
            cycle.rotate_right(1);
        }
        LassoTrace { prefix, cycle }
    }

    pub fn same_word(&self, other: &Self) -> bool {
        self.normalized() == other.normalized()
    }

    /// The first `n` letters.
    pub fn unroll(&self, n: usize) -> Vec<&L> {
        (0..n).map(|i| self.label_at(i)).collect()
    }
}

impl LassoTrace<LabelSet> {
    /// A lasso from string-slice cells, for tests and builders.
    pub fn from_cells(prefix: &[&[&str]], cycle: &[&[&str]]) -> Result<Self, TraceError> {
        let conv = |cells: &[&[&str]]| -> Vec<LabelSet> {
            cells
                .iter()
                .map(|c| c.iter().map(|s| s.to_string()).collect())
                .collect()
        };
        LassoTrace::new(conv(prefix), conv(cycle))
    }

    /// Parses `"{} ; {a,b} | {c}"`: prefix cells separated by `;`, then
    /// `|`, then the loop cells.
    pub fn parse(text: &str) -> Result<Self, TraceError> {
        let bar = text.find('|').ok_or_else(|| TraceError::Syntax {
            column: text.len() + 1,
            message: "expected `|` before the loop".into(),
        })?;
        if let Some(extra) = text[bar + 1..].find('|') {
            return Err(TraceError::Syntax {
                column: bar + 2 + extra,
                message: "only one `|` is allowed".into(),
            });
        }
        let prefix = parse_cells(&text[..bar], 0)?;
        let cycle = parse_cells(&text[bar + 1..], bar + 1)?;
        if cycle.is_empty() {
            return Err(TraceError::Syntax {
                column: bar + 2,
                message: "the loop needs at least one cell".into(),
            });
        }
        LassoTrace::new(prefix, cycle)
    }
}

fn parse_cells(part: &str, offset: usize) -> Result<Vec<LabelSet>, TraceError> {
    if part.trim().is_empty() {
        return Ok(Vec::new());
    }
    let mut cells = Vec::new();
    let mut start = 0;
    for piece in part.split(';') {
        let column = offset + start + 1;
        let t = piece.trim();
        let inner = t
            .strip_prefix('{')
            .and_then(|s| s.strip_suffix('}'))
            .ok_or_else(|| TraceError::Syntax {
                column,
                message: format!("expected a `{{...}}` label set, found `{t}`"),
            })?;
        let mut set = LabelSet::new();
        for name in inner.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            if !name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
                return Err(TraceError::Syntax {
                    column,
                    message: format!("bad proposition name `{name}`"),
                });
            }
            set.insert(name.to_string());
        }
        cells.push(set);
        start += piece.len() + 1;
    }
    Ok(cells)
}

fn write_cell(f: &mut fmt::Formatter<'_>, cell: &LabelSet) -> fmt::Result {
    f.write_str("{")?;
    for (k, p) in cell.iter().enumerate() {
        if k > 0 {
            f.write_str(",")?;
        }
        f.write_str(p)?;
    }
    f.write_str("}")
}

impl fmt::Display for LassoTrace<LabelSet> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, c) in self.prefix.iter().enumerate() {
            if k > 0 {
                f.write_str(" ; ")?;
            }
            write_cell(f, c)?;
        }
        f.write_str(if self.prefix.is_empty() { "| " } else { " | " })?;
        for (k, c) in self.cycle.iter().enumerate() {
            if k > 0 {
                f.write_str(" ; ")?;
            }
            write_cell(f, c)?;
        }
        Ok(())
    }
}

impl Serialize for LassoTrace<LabelSet> {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

/// Fuses three traces into one over `(proposition, variable)` pairs.
///
/// The result's prefix is as long as the longest input prefix and its loop
/// length is the lcm of the input loop lengths.
pub fn zip3<L>(traces: [&LassoTrace<L>; 3], vars: [&str; 3]) -> LassoTrace<TaggedLabelSet>
where
    L: Clone + Eq + IntoIterator<Item = String>,
    for<'a> &'a L: IntoIterator<Item = &'a String>,
{
    let prefix_len = traces.iter().map(|t| t.prefix_len()).max().unwrap_or(0);
    let loop_len = traces.iter().fold(1usize, |acc, t| acc.lcm(&t.loop_len()));
    let cell = |i: usize| -> TaggedLabelSet {
        let mut out = TaggedLabelSet::new();
        for (t, v) in traces.iter().zip(vars) {
            for p in t.label_at(i) {
                out.insert((p.clone(), v.to_string()));
            }
        }
        out
    };
    LassoTrace {
        prefix: (0..prefix_len).map(cell).collect(),
        cycle: (prefix_len..prefix_len + loop_len).map(cell).collect(),
    }
}

/// Number of positions after which two lassos (and their zips) are
/// periodic with a common period: `(max prefix, lcm of loops)`.
pub fn joint_shape<'a, L: Clone + Eq + 'a>(
    traces: impl IntoIterator<Item = &'a LassoTrace<L>>,
) -> (usize, usize) {
    traces.into_iter().fold((0, 1), |(p, l), t| {
        (p.max(t.prefix_len()), l.lcm(&t.loop_len()))
    })
}

fn observed<'a>(cell: &'a LabelSet, obs: &'a BTreeSet<String>) -> impl Iterator<Item = &'a String> {
    cell.iter().filter(move |p| obs.contains(*p))
}

fn agent_observations<'a>(
    sys: &'a System,
    agent: &str,
) -> Result<&'a BTreeSet<String>, TraceError> {
    sys.agent(agent)
        .map(|a| &a.observes)
        .ok_or_else(|| TraceError::UnknownAgent(agent.to_string()))
}

/// The first position at which `agent` observes a difference, or `None`
/// when the observations agree forever. Decided exactly: positions beyond
/// `max prefix + lcm of loops` repeat earlier ones.
pub fn obs_divergence_point(
    sys: &System,
    agent: &str,
    t1: &LassoTrace,
    t2: &LassoTrace,
) -> Result<Option<usize>, TraceError> {
    let obs = agent_observations(sys, agent)?;
    Ok(divergence_with(obs, t1, t2))
}

pub(crate) fn divergence_with(
    obs: &BTreeSet<String>,
    t1: &LassoTrace,
    t2: &LassoTrace,
) -> Option<usize> {
    let (p, l) = joint_shape([t1, t2]);
    (0..p + l).find(|&i| observed(t1.label_at(i), obs).ne(observed(t2.label_at(i), obs)))
}

/// Whether `agent` sees the same observations on both traces at every
/// position `0..=i`.
pub fn obs_prefix_eq(
    sys: &System,
    agent: &str,
    t1: &LassoTrace,
    t2: &LassoTrace,
    i: usize,
) -> Result<bool, TraceError> {
    let obs = agent_observations(sys, agent)?;
    Ok((0..=i).all(|j| observed(t1.label_at(j), obs).eq(observed(t2.label_at(j), obs))))
}

/// Whether `trace` is the label sequence of some initial path of `k`.
pub fn is_initial_path(k: &KripkeStructure, trace: &LassoTrace) -> bool {
    let t = trace.normalized();
    let width = t.prefix_len() + t.loop_len();
    let next_pos = |pos: usize| {
        if pos + 1 < width {
            pos + 1
        } else {
            t.prefix_len()
        }
    };
    let n = k.num_states();
    let node = |s: usize, pos: usize| s * width + pos;
    let mut alive: Vec<bool> = (0..n * width)
        .map(|x| k.label(x / width) == t.label_at(x % width))
        .collect();
    // Greatest fixpoint: keep nodes with a live successor.
    loop {
        let mut changed = false;
        for s in 0..n {
            for pos in 0..width {
                if alive[node(s, pos)]
                    && !k
                        .successors(s)
                        .iter()
                        .any(|&s2| alive[node(s2, next_pos(pos))])
                {
                    alive[node(s, pos)] = false;
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }
    alive[node(k.initial(), 0)]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Origin {
    Model,
    User,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct UniverseEntry {
    pub trace: LassoTrace,
    pub origin: Origin,
}

/// How a universe came about.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct Provenance {
    pub max_prefix: Option<usize>,
    pub max_loop: Option<usize>,
    pub loop_states: Option<Vec<String>>,
    pub warnings: Vec<String>,
}

/// Bounds for [`generate_universe`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UniverseBounds {
    pub max_prefix: usize,
    pub max_loop: usize,
    /// When set, every loop state must be one of these.
    pub loop_states: Option<BTreeSet<String>>,
    pub max_traces: usize,
}

pub const DEFAULT_MAX_TRACES: usize = 1_000_000;

impl UniverseBounds {
    pub fn new(max_prefix: usize, max_loop: usize) -> Self {
        UniverseBounds {
            max_prefix,
            max_loop,
            loop_states: None,
            max_traces: DEFAULT_MAX_TRACES,
        }
    }

    pub fn with_loop_states<I, S>(mut self, states: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.loop_states = Some(states.into_iter().map(Into::into).collect());
        self
    }

    pub fn with_max_traces(mut self, cap: usize) -> Self {
        self.max_traces = cap;
        self
    }
}

/// A finite ordered set of distinct traces (by denoted word).
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct TraceUniverse {
    entries: Vec<UniverseEntry>,
    #[serde(skip)]
    index: HashMap<LassoTrace, usize>,
    provenance: Provenance,
}

impl TraceUniverse {
    pub fn new() -> Self {
        Self::default()
    }

    /// A universe of user-supplied traces, deduplicated in order.
    pub fn from_traces(traces: impl IntoIterator<Item = LassoTrace>) -> Self {
        let mut u = TraceUniverse::new();
        for t in traces {
            u.insert(t, Origin::User);
        }
        u
    }

    fn insert(&mut self, trace: LassoTrace, origin: Origin) -> bool {
        let norm = trace.normalized();
        if self.index.contains_key(&norm) {
            return false;
        }
        self.index.insert(norm.clone(), self.entries.len());
        self.entries.push(UniverseEntry {
            trace: norm,
            origin,
        });
        true
    }

    /// Union with one more trace. With a system, the trace must be the
    /// trace of one of its initial paths.
    pub fn add_trace(&self, trace: LassoTrace, sys: Option<&System>) -> Result<Self, TraceError> {
        if let Some(sys) = sys {
            if !is_initial_path(sys.kripke(), &trace) {
                return Err(TraceError::NotAPathOfModel(trace.to_string()));
            }
        }
        let mut u = self.clone();
        u.insert(trace, Origin::User);
        Ok(u)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[UniverseEntry] {
        &self.entries
    }

    pub fn traces(&self) -> impl Iterator<Item = &LassoTrace> {
        self.entries.iter().map(|e| &e.trace)
    }

    pub fn get(&self, i: usize) -> &LassoTrace {
        &self.entries[i].trace
    }

    /// Position of the trace denoting the same word, if present.
    pub fn index_of(&self, trace: &LassoTrace) -> Option<usize> {
        self.index.get(&trace.normalized()).copied()
    }

    pub fn contains(&self, trace: &LassoTrace) -> bool {
        self.index_of(trace).is_some()
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    /// The universe restricted to the given indices, in the given order.
    pub fn subset(&self, indices: &[usize]) -> Self {
        let mut u = TraceUniverse {
            provenance: self.provenance.clone(),
            ..Default::default()
        };
        for &i in indices {
            let e = &self.entries[i];
            u.insert(e.trace.clone(), e.origin);
        }
        u
    }

    /// `(max prefix length, lcm of loop lengths)` over all traces.
    pub fn shape(&self) -> (usize, usize) {
        joint_shape(self.traces())
    }
}

/// Enumerates every initial lasso of the model within the bounds, in order
/// of prefix length, then loop length, then successor order.
pub fn generate_universe(
    sys: &System,
    bounds: &UniverseBounds,
) -> Result<TraceUniverse, TraceError> {
    let k = sys.kripke();
    let allowed: Vec<bool> = match &bounds.loop_states {
        None => vec![true; k.num_states()],
        Some(set) => {
            for s in set {
                if k.state_index(s).is_none() {
                    return Err(TraceError::UnknownState(s.clone()));
                }
            }
            k.state_ids().iter().map(|id| set.contains(id)).collect()
        }
    };
    let mut u = TraceUniverse::new();
    u.provenance = Provenance {
        max_prefix: Some(bounds.max_prefix),
        max_loop: Some(bounds.max_loop),
        loop_states: bounds
            .loop_states
            .as_ref()
            .map(|s| s.iter().cloned().collect()),
        warnings: Vec::new(),
    };
    let mut path = vec![k.initial()];
    for p in 0..=bounds.max_prefix {
        for m in 1..=bounds.max_loop {
            let mut walk = Walk {
                k,
                allowed: &allowed,
                prefix_len: p,
                total: p + m,
                universe: &mut u,
                cap: bounds.max_traces,
            };
            walk.extend(&mut path)?;
        }
    }
    if u.is_empty() {
        u.provenance.warnings.push(format!(
            "no initial lasso with prefix <= {} and loop <= {} closes under the transition relation",
            bounds.max_prefix, bounds.max_loop
        ));
    }
    Ok(u)
}

struct Walk<'a> {
    k: &'a KripkeStructure,
    allowed: &'a [bool],
    prefix_len: usize,
    total: usize,
    universe: &'a mut TraceUniverse,
    cap: usize,
}

impl Walk<'_> {
    fn extend(&mut self, path: &mut Vec<usize>) -> Result<(), TraceError> {
        let last = *path.last().expect("path starts at the initial state");
        if path.len() > self.prefix_len && !self.allowed[last] {
            return Ok(());
        }
        if path.len() == self.total {
            let loop_head = path[self.prefix_len];
            if self.k.successors(last).contains(&loop_head) {
                let labels =
                    |states: &[usize]| states.iter().map(|&s| self.k.label(s).clone()).collect();
                let trace = LassoTrace {
                    prefix: labels(&path[..self.prefix_len]),
                    cycle: labels(&path[self.prefix_len..]),
                };
                if self.universe.insert(trace, Origin::Model) && self.universe.len() > self.cap {
                    return Err(TraceError::SizeLimitExceeded { cap: self.cap });
                }
            }
            return Ok(());
        }
        for &next in self.k.successors(last) {
            path.push(next);
            let r = self.extend(path);
            path.pop();
            r?;
        }
        Ok(())
    }
}
