//! Direct evaluation of formulas over a system and a finite trace universe.
//!
//! Two modes are supported. [`Mode::Exact`] gives the infinite-word
//! semantics on lasso traces: every subformula's truth value on every
//! universe trace is eventually periodic with the universe's common period,
//! so a finite window of positions suffices once it has been checked to
//! repeat. [`Mode::Bounded`] restricts positions to `0..=N`, with `X` false
//! at `N` and `U`/`S` clipped to the domain; it is the semantics the
//! first-order translation is evaluated against.
//!
//! All evaluation is table-based: a formula is compiled to a post-order
//! program and each node gets one row of truth values per trace.

mod program;

use crate::formula::{Counterfactual, Formula, RelationalFormula};
use crate::model::System;
use crate::trace::{divergence_with, joint_shape, LassoTrace, TraceUniverse};
use program::{compile, local_row, Horizon, Op, Program, ResolveError, Resolver};
use rayon::prelude::*;
use serde::Serialize;
use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};
use thiserror::Error;

pub const DEFAULT_STABILIZATION_CAP: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// Infinite-word semantics; `cap` bounds the number of extra loop
    /// unrollings tried before giving up.
    Exact { cap: usize },
    /// Positions `0..=N`.
    Bounded(usize),
}

impl Mode {
    pub fn exact() -> Mode {
        Mode::Exact {
            cap: DEFAULT_STABILIZATION_CAP,
        }
    }
}

impl Default for Mode {
    fn default() -> Self {
        Mode::exact()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SemanticsError {
    #[error("truth values did not stabilize within {cap} loop unrollings")]
    StabilizationCapExceeded { cap: usize },
    #[error("unknown agent `{0}`")]
    UnknownAgent(String),
    #[error("unknown proposition `{0}`")]
    UnknownProposition(String),
    #[error("traced atom `{0}` is only meaningful inside a similarity formula")]
    TracedAtomOutsideSimilarity(String),
    #[error("position {position} is outside the bounded domain 0..={max}")]
    PositionOutOfRange { position: usize, max: usize },
    #[error("trace {0} is not in the universe")]
    TraceNotInUniverse(String),
    #[error("this operation needs exact lasso mode")]
    RequiresExactMode,
}

impl From<ResolveError> for SemanticsError {
    fn from(e: ResolveError) -> Self {
        match e {
            ResolveError::Proposition(p) => SemanticsError::UnknownProposition(p),
            ResolveError::Traced(p) => SemanticsError::TracedAtomOutsideSimilarity(p),
            ResolveError::Agent(a) => SemanticsError::UnknownAgent(a),
        }
    }
}

/// Raised internally when a window turns out to be too short.
#[derive(Debug)]
struct Unstable;

struct MainResolver<'a> {
    sys: &'a System,
    props: &'a HashMap<String, usize>,
}

impl Resolver for MainResolver<'_> {
    fn atom(&self, prop: &str) -> Result<Op, ResolveError> {
        self.props
            .get(prop)
            .map(|&p| Op::Atom(p))
            .ok_or_else(|| ResolveError::Proposition(prop.to_string()))
    }

    fn traced(&self, prop: &str, var: &str) -> Result<Op, ResolveError> {
        Err(ResolveError::Traced(format!("{prop}@{var}")))
    }

    fn agent(&self, name: &str) -> Result<usize, ResolveError> {
        self.sys
            .agent_index(name)
            .ok_or_else(|| ResolveError::Agent(name.to_string()))
    }
}

struct SimResolver<'a> {
    rel: &'a RelationalFormula,
    props: &'a HashMap<String, usize>,
}

impl Resolver for SimResolver<'_> {
    fn atom(&self, prop: &str) -> Result<Op, ResolveError> {
        Err(ResolveError::Proposition(prop.to_string()))
    }

    fn traced(&self, prop: &str, var: &str) -> Result<Op, ResolveError> {
        let k = self
            .rel
            .param_index(var)
            .ok_or_else(|| ResolveError::Traced(format!("{prop}@{var}")))?;
        let p = self
            .props
            .get(prop)
            .ok_or_else(|| ResolveError::Proposition(prop.to_string()))?;
        Ok(Op::Traced(k, *p))
    }

    fn agent(&self, name: &str) -> Result<usize, ResolveError> {
        Err(ResolveError::Agent(name.to_string()))
    }
}

fn canonical(hz: Horizon, i: usize) -> usize {
    match hz.wrap {
        Some(w) if i >= hz.len => w + (i - w) % (hz.len - w),
        _ => i,
    }
}

/// Per-proposition rows of one trace, flattened as `[prop * len + pos]`.
fn prop_rows(t: &LassoTrace, props: &HashMap<String, usize>, hz: Horizon) -> Vec<bool> {
    let mut rows = vec![false; props.len() * hz.len];
    for pos in 0..hz.len {
        for p in t.label_at(pos) {
            if let Some(&k) = props.get(p) {
                rows[k * hz.len + pos] = true;
            }
        }
    }
    rows
}

/// Evaluates a similarity program on three traces given by their
/// proposition rows. The root row ends up at the end of `buf`.
fn eval_triple(
    prog: &Program,
    rows: [&[bool]; 3],
    hz: Horizon,
    buf: &mut Vec<bool>,
) -> Result<(), Unstable> {
    let h = hz.len;
    buf.clear();
    buf.resize(prog.ops.len() * h, false);
    for (k, &op) in prog.ops.iter().enumerate() {
        let (done, rest) = buf.split_at_mut(k * h);
        let out = &mut rest[..h];
        match op {
            Op::Traced(param, p) => out.copy_from_slice(&rows[param][p * h..(p + 1) * h]),
            _ => local_row(op, |c| &done[c * h..(c + 1) * h], hz, out),
        }
        if !hz.is_periodic(out) {
            return Err(Unstable);
        }
    }
    Ok(())
}

/// `sim(t, x, y)` at every window position, for one agent and one reference
/// trace `t`.
struct SimTable {
    n: usize,
    h: usize,
    bits: Vec<bool>,
}

impl SimTable {
    fn get(&self, x: usize, y: usize, i: usize) -> bool {
        self.bits[(x * self.n + y) * self.h + i]
    }
}

/// State that depends on the window length.
struct Window {
    hz: Horizon,
    rows: Vec<Vec<bool>>,
    sims: Vec<Vec<OnceLock<Option<Arc<SimTable>>>>>,
}

/// Truth tables of one formula over the whole universe.
pub struct Evaluation {
    program: Program,
    rows: Vec<Vec<bool>>,
    n: usize,
    hz: Horizon,
}

impl Evaluation {
    fn value(&self, node: usize, t: usize, i: usize) -> bool {
        let h = self.hz.len;
        self.rows[node][t * h + canonical(self.hz, i)]
    }

    fn row(&self, node: usize, t: usize) -> &[bool] {
        let h = self.hz.len;
        &self.rows[node][t * h..(t + 1) * h]
    }

    /// Truth of the whole formula on universe trace `t` at position `i`.
    pub fn holds(&self, t: usize, i: usize) -> bool {
        self.value(self.program.root(), t, i)
    }

    /// Number of positions computed explicitly.
    pub fn window(&self) -> usize {
        self.hz.len
    }

    pub fn universe_size(&self) -> usize {
        self.n
    }
}

/// Truth values of every subformula on one trace, over the positions it
/// takes for all of them to become periodic.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SatisfactionTable {
    /// Smallest `c >= 1` such that every row is periodic from
    /// `prefix + (c - 1) * period` on.
    pub unroll: usize,
    pub prefix: usize,
    pub period: usize,
    pub rows: Vec<(String, Vec<bool>)>,
}

impl SatisfactionTable {
    pub fn row(&self, formula: &Formula) -> Option<&[bool]> {
        let key = formula.to_string();
        self.rows
            .iter()
            .find(|(f, _)| *f == key)
            .map(|(_, r)| r.as_slice())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TrailEntry {
    pub formula: String,
    pub trace: String,
    pub position: usize,
    pub value: bool,
}

/// Outcome of a system-level check.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Verdict {
    pub result: bool,
    /// Lowest-index failing trace, as a trace literal.
    pub counterexample: Option<String>,
    pub counterexample_index: Option<usize>,
    /// Deepest position on the counterexample the explanation reaches.
    pub position: Option<usize>,
    pub failing_traces: Vec<usize>,
    pub universe_size: usize,
    pub trail: Vec<TrailEntry>,
}

/// Violations of the preorder-with-minimum requirement on `Σ_a^t`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct PreorderReport {
    /// Traces `x` (the reference or an accessible one) with `¬R(x, x)`.
    pub reflexivity: Vec<usize>,
    /// Triples with `R(x, y) ∧ R(y, z) ∧ ¬R(x, z)`.
    pub transitivity: Vec<(usize, usize, usize)>,
    /// Traces `x` with `¬R(t, x) ∧ R(x, t)`.
    pub minimum: Vec<usize>,
}

impl PreorderReport {
    pub fn is_empty(&self) -> bool {
        self.reflexivity.is_empty() && self.transitivity.is_empty() && self.minimum.is_empty()
    }
}

const TRAIL_LIMIT: usize = 64;

/// A system, a universe and a mode, with caches for everything derived
/// from them.
pub struct EvalContext<'a> {
    system: &'a System,
    universe: &'a TraceUniverse,
    mode: Mode,
    props: HashMap<String, usize>,
    sim_programs: Vec<Program>,
    divergence: Vec<OnceLock<Vec<Option<usize>>>>,
    windows: Mutex<HashMap<usize, Arc<Window>>>,
    cache: Mutex<HashMap<Formula, Arc<Evaluation>>>,
}

impl<'a> EvalContext<'a> {
    pub fn new(system: &'a System, universe: &'a TraceUniverse, mode: Mode) -> Self {
        let props: HashMap<String, usize> = system
            .kripke()
            .aps()
            .iter()
            .enumerate()
            .map(|(k, p)| (p.clone(), k))
            .collect();
        let sim_programs = system
            .agents()
            .iter()
            .map(|a| {
                let r = SimResolver {
                    rel: &a.similarity,
                    props: &props,
                };
                compile(a.similarity.source(), &r)
                    .expect("similarity formulas are validated on load")
            })
            .collect();
        EvalContext {
            system,
            universe,
            mode,
            props,
            sim_programs,
            divergence: system.agents().iter().map(|_| OnceLock::new()).collect(),
            windows: Mutex::new(HashMap::new()),
            cache: Mutex::new(HashMap::new()),
        }
    }

    pub fn exact(system: &'a System, universe: &'a TraceUniverse) -> Self {
        Self::new(system, universe, Mode::exact())
    }

    pub fn bounded(system: &'a System, universe: &'a TraceUniverse, n: usize) -> Self {
        Self::new(system, universe, Mode::Bounded(n))
    }

    pub fn system(&self) -> &System {
        self.system
    }

    pub fn universe(&self) -> &TraceUniverse {
        self.universe
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    fn agent_index(&self, agent: &str) -> Result<usize, SemanticsError> {
        self.system
            .agent_index(agent)
            .ok_or_else(|| SemanticsError::UnknownAgent(agent.to_string()))
    }

    fn trace_index(&self, t: &LassoTrace) -> Result<usize, SemanticsError> {
        self.universe
            .index_of(t)
            .ok_or_else(|| SemanticsError::TraceNotInUniverse(t.to_string()))
    }

    fn check_position(&self, i: usize) -> Result<(), SemanticsError> {
        match self.mode {
            Mode::Bounded(n) if i > n => Err(SemanticsError::PositionOutOfRange {
                position: i,
                max: n,
            }),
            _ => Ok(()),
        }
    }

    /// Candidate windows, shortest first.
    fn horizons(&self, prefix: usize, period: usize) -> Vec<Horizon> {
        match self.mode {
            Mode::Bounded(n) => vec![Horizon {
                len: n + 1,
                wrap: None,
            }],
            Mode::Exact { cap } => (2..=cap.max(2))
                .map(|u| {
                    let len = prefix + period + u * period;
                    Horizon {
                        len,
                        wrap: Some(len - period),
                    }
                })
                .collect(),
        }
    }

    fn cap_error(&self) -> SemanticsError {
        match self.mode {
            Mode::Exact { cap } => SemanticsError::StabilizationCapExceeded { cap },
            Mode::Bounded(_) => unreachable!("bounded windows always stabilize"),
        }
    }

    fn window(&self, hz: Horizon) -> Arc<Window> {
        let mut windows = self.windows.lock().expect("window cache poisoned");
        windows
            .entry(hz.len)
            .or_insert_with(|| {
                let rows = self
                    .universe
                    .traces()
                    .map(|t| prop_rows(t, &self.props, hz))
                    .collect();
                let n = self.universe.len();
                let sims = self
                    .system
                    .agents()
                    .iter()
                    .map(|_| (0..n).map(|_| OnceLock::new()).collect())
                    .collect();
                Arc::new(Window { hz, rows, sims })
            })
            .clone()
    }

    fn sim_table(&self, win: &Window, agent: usize, t: usize) -> Result<Arc<SimTable>, Unstable> {
        win.sims[agent][t]
            .get_or_init(|| {
                let n = self.universe.len();
                let h = win.hz.len;
                let prog = &self.sim_programs[agent];
                let root = prog.root();
                let chunks: Option<Vec<Vec<bool>>> = (0..n)
                    .into_par_iter()
                    .map(|x| {
                        let mut buf = Vec::new();
                        let mut out = vec![false; n * h];
                        for y in 0..n {
                            let rows = [win.rows[t].as_slice(), &win.rows[x], &win.rows[y]];
                            eval_triple(prog, rows, win.hz, &mut buf).ok()?;
                            out[y * h..(y + 1) * h].copy_from_slice(&buf[root * h..(root + 1) * h]);
                        }
                        Some(out)
                    })
                    .collect();
                chunks.map(|c| {
                    Arc::new(SimTable {
                        n,
                        h,
                        bits: c.concat(),
                    })
                })
            })
            .clone()
            .ok_or(Unstable)
    }

    fn divergence(&self, agent: usize) -> &[Option<usize>] {
        self.divergence[agent].get_or_init(|| {
            let obs = &self.system.agents()[agent].observes;
            let traces: Vec<&LassoTrace> = self.universe.traces().collect();
            let n = traces.len();
            (0..n * n)
                .into_par_iter()
                .map(|k| divergence_with(obs, traces[k / n], traces[k % n]))
                .collect()
        })
    }

    fn compile_main(&self, f: &Formula) -> Result<Program, SemanticsError> {
        let r = MainResolver {
            sys: self.system,
            props: &self.props,
        };
        Ok(compile(f, &r)?)
    }

    /// Truth tables of `f` for every universe trace. Cached per formula.
    pub fn evaluate(&self, f: &Formula) -> Result<Arc<Evaluation>, SemanticsError> {
        if let Some(e) = self.cache.lock().expect("cache poisoned").get(f) {
            return Ok(e.clone());
        }
        let program = self.compile_main(f)?;
        let (prefix, period) = self.universe.shape();
        for hz in self.horizons(prefix, period) {
            let win = self.window(hz);
            if let Ok(rows) = self.compute(&program, &win) {
                let e = Arc::new(Evaluation {
                    program,
                    rows,
                    n: self.universe.len(),
                    hz,
                });
                self.cache
                    .lock()
                    .expect("cache poisoned")
                    .insert(f.clone(), e.clone());
                return Ok(e);
            }
        }
        Err(self.cap_error())
    }

    fn compute(&self, prog: &Program, win: &Window) -> Result<Vec<Vec<bool>>, Unstable> {
        let n = self.universe.len();
        let hz = win.hz;
        let h = hz.len;
        let mut rows: Vec<Vec<bool>> = Vec::with_capacity(prog.ops.len());
        for &op in &prog.ops {
            let row: Vec<bool> = match op {
                Op::Atom(p) => (0..n)
                    .flat_map(|t| win.rows[t][p * h..(p + 1) * h].iter().copied())
                    .collect(),
                Op::Know(a, c) => {
                    let div = self.divergence(a);
                    let child = &rows[c];
                    (0..n)
                        .into_par_iter()
                        .flat_map_iter(|t| {
                            (0..h).map(move |i| {
                                (0..n).all(|u| {
                                    div[t * n + u].is_some_and(|d| d <= i) || child[u * h + i]
                                })
                            })
                        })
                        .collect()
                }
                Op::Cf(kind, a, l, r) => {
                    let (ante, cons) = (&rows[l], &rows[r]);
                    let per_trace: Result<Vec<Vec<bool>>, Unstable> = (0..n)
                        .into_par_iter()
                        .map(|t| {
                            let sim = self.sim_table(win, a, t)?;
                            Ok((0..h)
                                .map(|i| {
                                    let ante: Vec<bool> = (0..n).map(|x| ante[x * h + i]).collect();
                                    let cons: Vec<bool> = (0..n).map(|x| cons[x * h + i]).collect();
                                    counterfactual(kind, &|x, y| sim.get(x, y, i), t, &ante, &cons)
                                })
                                .collect())
                        })
                        .collect();
                    per_trace?.concat()
                }
                _ => {
                    let mut out = vec![false; n * h];
                    for (t, chunk) in out.chunks_mut(h).enumerate() {
                        local_row(op, |c| &rows[c][t * h..(t + 1) * h], hz, chunk);
                    }
                    out
                }
            };
            if !row.chunks(h).all(|r| hz.is_periodic(r)) {
                return Err(Unstable);
            }
            rows.push(row);
        }
        Ok(rows)
    }

    /// Whether `f` holds on universe trace `t` at position `i`.
    pub fn eval_at(&self, t: &LassoTrace, i: usize, f: &Formula) -> Result<bool, SemanticsError> {
        let k = self.trace_index(t)?;
        self.eval_index(k, i, f)
    }

    /// As [`eval_at`](Self::eval_at), addressing the trace by universe index.
    pub fn eval_index(&self, t: usize, i: usize, f: &Formula) -> Result<bool, SemanticsError> {
        self.check_position(i)?;
        Ok(self.evaluate(f)?.holds(t, i))
    }

    /// Evaluates `agent`'s similarity formula on `zip3(t_ref, t1, t2)` at
    /// position `i`. The traces need not belong to the universe.
    pub fn similarity_holds(
        &self,
        agent: &str,
        t_ref: &LassoTrace,
        t1: &LassoTrace,
        t2: &LassoTrace,
        i: usize,
    ) -> Result<bool, SemanticsError> {
        let a = self.agent_index(agent)?;
        self.check_position(i)?;
        let (prefix, period) = joint_shape([t_ref, t1, t2]);
        let prog = &self.sim_programs[a];
        let mut buf = Vec::new();
        for hz in self.horizons(prefix, period) {
            let rows = [t_ref, t1, t2].map(|t| prop_rows(t, &self.props, hz));
            if eval_triple(prog, [&rows[0], &rows[1], &rows[2]], hz, &mut buf).is_ok() {
                let root = prog.root();
                return Ok(buf[root * hz.len + canonical(hz, i)]);
            }
        }
        Err(self.cap_error())
    }

    /// Runs `f` with the similarity table of `agent` anchored at universe
    /// trace `t`, in whichever window stabilizes first.
    fn with_sim<R>(
        &self,
        agent: usize,
        t: usize,
        f: impl Fn(&SimTable, Horizon) -> R,
    ) -> Result<R, SemanticsError> {
        let (prefix, period) = self.universe.shape();
        for hz in self.horizons(prefix, period) {
            let win = self.window(hz);
            if let Ok(sim) = self.sim_table(&win, agent, t) {
                return Ok(f(&sim, hz));
            }
        }
        Err(self.cap_error())
    }

    /// Checks that `R(x, y) = sim(t_ref, x, y)` at `i` is a preorder on the
    /// universe with `t_ref` as a minimum.
    pub fn validate_similarity(
        &self,
        agent: &str,
        t_ref: &LassoTrace,
        i: usize,
    ) -> Result<PreorderReport, SemanticsError> {
        let a = self.agent_index(agent)?;
        let t = self.trace_index(t_ref)?;
        self.check_position(i)?;
        let n = self.universe.len();
        self.with_sim(a, t, |sim, hz| {
            let i = canonical(hz, i);
            let r = |x: usize, y: usize| sim.get(x, y, i);
            let mut report = PreorderReport::default();
            for x in 0..n {
                if (x == t || r(t, x)) && !r(x, x) {
                    report.reflexivity.push(x);
                }
                if !r(t, x) && r(x, t) {
                    report.minimum.push(x);
                }
            }
            for x in 0..n {
                for y in (0..n).filter(|&y| r(x, y)) {
                    for z in (0..n).filter(|&z| r(y, z) && !r(x, z)) {
                        report.transitivity.push((x, y, z));
                    }
                }
            }
            report
        })
    }

    /// Accessible traces satisfying `antecedent` at `i` with no strictly
    /// closer accessible trace that also satisfies it, by universe index.
    pub fn closest_antecedents(
        &self,
        agent: &str,
        t: &LassoTrace,
        i: usize,
        antecedent: &Formula,
    ) -> Result<Vec<usize>, SemanticsError> {
        let a = self.agent_index(agent)?;
        let t = self.trace_index(t)?;
        self.check_position(i)?;
        let ev = self.evaluate(antecedent)?;
        let n = self.universe.len();
        self.with_sim(a, t, |sim, hz| {
            let i = canonical(hz, i);
            let cand: Vec<usize> = (0..n)
                .filter(|&x| sim.get(t, x, i) && ev.holds(x, i))
                .collect();
            cand.iter()
                .copied()
                .filter(|&x| !cand.iter().any(|&y| sim.get(y, x, i) && !sim.get(x, y, i)))
                .collect()
        })
    }

    /// Whether `f` holds at position 0 of every universe trace.
    pub fn check_system(&self, f: &Formula) -> Result<Verdict, SemanticsError> {
        let ev = self.evaluate(f)?;
        let n = self.universe.len();
        let failing: Vec<usize> = (0..n).filter(|&t| !ev.holds(t, 0)).collect();
        let mut verdict = Verdict {
            result: failing.is_empty(),
            counterexample: None,
            counterexample_index: None,
            position: None,
            failing_traces: failing.clone(),
            universe_size: n,
            trail: Vec::new(),
        };
        if let Some(&t) = failing.first() {
            let mut trail = Vec::new();
            self.explain(&ev, ev.program.root(), t, 0, &mut trail)?;
            let literal = self.universe.get(t).to_string();
            verdict.position = trail
                .iter()
                .take_while(|e| e.trace == literal)
                .map(|e| e.position)
                .max();
            verdict.counterexample = Some(literal);
            verdict.counterexample_index = Some(t);
            verdict.trail = trail;
        }
        Ok(verdict)
    }

    fn positions_from(&self, ev: &Evaluation, i: usize) -> std::ops::Range<usize> {
        match self.mode {
            Mode::Bounded(n) => i..n + 1,
            Mode::Exact { .. } => i..i + ev.hz.len,
        }
    }

    fn explain(
        &self,
        ev: &Evaluation,
        node: usize,
        t: usize,
        i: usize,
        trail: &mut Vec<TrailEntry>,
    ) -> Result<(), SemanticsError> {
        if trail.len() >= TRAIL_LIMIT {
            return Ok(());
        }
        let v = ev.value(node, t, i);
        trail.push(TrailEntry {
            formula: ev.program.formulas[node].to_string(),
            trace: self.universe.get(t).to_string(),
            position: i,
            value: v,
        });
        let val = |c: usize, j: usize| ev.value(c, t, j);
        match ev.program.ops[node] {
            Op::Not(c) => self.explain(ev, c, t, i, trail)?,
            Op::And(l, r) | Op::Or(l, r) => {
                let is_and = matches!(ev.program.ops[node], Op::And(..));
                if v == is_and {
                    let mut operands = Vec::new();
                    flatten_chain(&ev.program.ops, l, is_and, &mut operands);
                    flatten_chain(&ev.program.ops, r, is_and, &mut operands);
                    for c in operands {
                        self.explain(ev, c, t, i, trail)?;
                    }
                } else {
                    let c = if val(l, i) == v { l } else { r };
                    self.explain(ev, c, t, i, trail)?;
                }
            }
            Op::Implies(l, r) => {
                if !v {
                    self.explain(ev, l, t, i, trail)?;
                    self.explain(ev, r, t, i, trail)?;
                } else if !val(l, i) {
                    self.explain(ev, l, t, i, trail)?;
                } else {
                    self.explain(ev, r, t, i, trail)?;
                }
            }
            Op::Iff(l, r) => {
                self.explain(ev, l, t, i, trail)?;
                self.explain(ev, r, t, i, trail)?;
            }
            Op::Next(c) => {
                if self.positions_from(ev, i + 1).contains(&(i + 1)) {
                    self.explain(ev, c, t, i + 1, trail)?;
                }
            }
            Op::Prev(c) => {
                if i > 0 {
                    self.explain(ev, c, t, i - 1, trail)?;
                }
            }
            Op::Globally(c) | Op::Eventually(c) => {
                let want = matches!(ev.program.ops[node], Op::Eventually(_));
                if v == want {
                    if let Some(j) = self.positions_from(ev, i).find(|&j| val(c, j) == want) {
                        self.explain(ev, c, t, j, trail)?;
                    }
                }
            }
            Op::Until(_, c2) => {
                if v {
                    if let Some(j) = self.positions_from(ev, i).find(|&j| val(c2, j)) {
                        self.explain(ev, c2, t, j, trail)?;
                    }
                }
            }
            Op::Once(c) | Op::Historically(c) => {
                let want = matches!(ev.program.ops[node], Op::Once(_));
                if v == want {
                    if let Some(j) = (0..=i).rev().find(|&j| val(c, j) == want) {
                        self.explain(ev, c, t, j, trail)?;
                    }
                }
            }
            Op::Since(_, c2) => {
                if v {
                    if let Some(j) = (0..=i).rev().find(|&j| val(c2, j)) {
                        self.explain(ev, c2, t, j, trail)?;
                    }
                }
            }
            Op::Know(a, c) => {
                if !v {
                    let n = self.universe.len();
                    let div = self.divergence(a);
                    let j = canonical(ev.hz, i);
                    if let Some(u) =
                        (0..n).find(|&u| div[t * n + u].is_none_or(|d| d > j) && !ev.value(c, u, i))
                    {
                        self.explain(ev, c, u, i, trail)?;
                    }
                }
            }
            Op::Const(_) | Op::Atom(_) | Op::Traced(..) | Op::Cf(..) => {}
        }
        Ok(())
    }

    /// Truth values of every subformula of `f` on `t`, unrolled until all
    /// of them repeat.
    pub fn stabilize(
        &self,
        t: &LassoTrace,
        f: &Formula,
    ) -> Result<SatisfactionTable, SemanticsError> {
        if !matches!(self.mode, Mode::Exact { .. }) {
            return Err(SemanticsError::RequiresExactMode);
        }
        let k = self.trace_index(t)?;
        let ev = self.evaluate(f)?;
        let (prefix, period) = self.universe.shape();
        let h = ev.hz.len;
        let rows: Vec<&[bool]> = (0..ev.program.ops.len())
            .map(|node| ev.row(node, k))
            .collect();
        let repeats_from = |start: usize| {
            rows.iter()
                .all(|r| (start..h - period).all(|j| r[j] == r[j + period]))
        };
        let unroll = (1..)
            .find(|&c| repeats_from(prefix + (c - 1) * period))
            .expect("rows repeat over the last two periods");
        let len = prefix + unroll * period;
        Ok(SatisfactionTable {
            unroll,
            prefix,
            period,
            rows: ev
                .program
                .formulas
                .iter()
                .zip(&rows)
                .map(|(g, r)| {
                    (
                        g.to_string(),
                        (0..len).map(|j| ev.value_row(r, j)).collect(),
                    )
                })
                .collect(),
        })
    }
}

impl Evaluation {
    fn value_row(&self, row: &[bool], i: usize) -> bool {
        row[canonical(self.hz, i)]
    }
}

/// The four counterfactuals at one point. `sim(x, y)` says `x` is at least
/// as close to `t` as `y`; `ante` and `cons` are indexed by universe trace.
fn counterfactual(
    kind: Counterfactual,
    sim: &dyn Fn(usize, usize) -> bool,
    t: usize,
    ante: &[bool],
    cons: &[bool],
) -> bool {
    let n = ante.len();
    let live = |x: usize| sim(t, x) && ante[x];
    match kind {
        Counterfactual::Would => {
            let ok = |y: usize| !ante[y] || cons[y];
            (0..n).all(|x| !live(x))
                || (0..n).any(|x| live(x) && (0..n).all(|y| !sim(y, x) || ok(y)))
        }
        Counterfactual::Might => {
            (0..n).any(live)
                && (0..n).all(|x| !live(x) || (0..n).any(|y| sim(y, x) && ante[y] && cons[y]))
        }
        Counterfactual::UWould => {
            let good: Vec<bool> = (0..n)
                .map(|y| ante[y] && (0..n).all(|z| !sim(z, y) || !ante[z] || cons[z]))
                .collect();
            (0..n).all(|x| !live(x) || (0..n).any(|y| sim(y, x) && good[y]))
        }
        Counterfactual::EMight => {
            let reach: Vec<bool> = (0..n)
                .map(|y| (0..n).any(|z| sim(z, y) && ante[z] && cons[z]))
                .collect();
            (0..n).any(|x| live(x) && (0..n).all(|y| !(sim(y, x) && ante[y]) || reach[y]))
        }
    }
}

/// Operands of a left- or right-nested chain of `&` (or `|`).
fn flatten_chain(ops: &[Op], node: usize, is_and: bool, out: &mut Vec<usize>) {
    match ops[node] {
        Op::And(l, r) if is_and => {
            flatten_chain(ops, l, is_and, out);
            flatten_chain(ops, r, is_and, out);
        }
        Op::Or(l, r) if !is_and => {
            flatten_chain(ops, l, is_and, out);
            flatten_chain(ops, r, is_and, out);
        }
        _ => out.push(node),
    }
}
