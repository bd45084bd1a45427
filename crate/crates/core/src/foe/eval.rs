//! Brute-force evaluation over `universe × [0, N]`.
//!
//! Quantifiers range over the whole domain, except that a guard atom
//! relating the bound variable to one already bound (`E`, `succ`, `<`, `=`,
//! `min`) in the leading conjunction of an `∃` body, or of the premise of a
//! `∀ ... → ...` body, narrows the candidates to those where the guard can
//! hold. Elements outside that set make the guard false, so the result is
//! unchanged. Results of quantified subformulas are memoized on the values
//! of their free variables.

use super::FoFormula;
use crate::trace::TraceUniverse;
use std::collections::{BTreeSet, HashMap};

/// The structure a formula is evaluated over.
#[derive(Debug, Clone, Copy)]
pub struct FoDomain<'a> {
    pub universe: &'a TraceUniverse,
    pub max_position: usize,
}

impl<'a> FoDomain<'a> {
    pub fn new(universe: &'a TraceUniverse, max_position: usize) -> Self {
        FoDomain {
            universe,
            max_position,
        }
    }
}

type Elem = (usize, usize);

#[derive(Debug, Clone)]
enum Node {
    Exists(usize, usize, Guard),
    Forall(usize, usize, Guard),
    Not(usize),
    Or(usize, usize),
    And(usize, usize),
    Implies(usize, usize),
    Iff(usize, usize),
    Pred(usize, usize, usize),
    Less(usize, usize),
    Eq(usize, usize),
    Level(usize, usize),
    Succ(usize, usize),
    Min(usize),
}

/// How candidates for a bound variable are narrowed.
#[derive(Debug, Clone, Copy)]
enum Guard {
    All,
    /// Same position as the variable.
    Level(usize),
    /// Same trace as the variable.
    Trace(usize),
    /// Immediately after the variable.
    After(usize),
    /// Immediately before the variable.
    Before(usize),
    First,
}

struct Compiled {
    nodes: Vec<Node>,
    free: Vec<Vec<usize>>,
    props: Vec<String>,
}

struct Builder {
    nodes: Vec<Node>,
    free: Vec<Vec<usize>>,
    vars: HashMap<String, usize>,
    props: HashMap<String, usize>,
    prop_names: Vec<String>,
}

impl Builder {
    fn var(&mut self, v: &str) -> usize {
        let n = self.vars.len();
        *self.vars.entry(v.to_string()).or_insert(n)
    }

    fn push(&mut self, node: Node, free: BTreeSet<usize>) -> usize {
        self.nodes.push(node);
        self.free.push(free.into_iter().collect());
        self.nodes.len() - 1
    }

    fn free_of(&self, id: usize) -> BTreeSet<usize> {
        self.free[id].iter().copied().collect()
    }

    fn build(&mut self, f: &FoFormula) -> usize {
        use FoFormula as F;
        let two = |b: &mut Builder, x: &str, y: &str| {
            let (x, y) = (b.var(x), b.var(y));
            (x, y, BTreeSet::from([x, y]))
        };
        match f {
            F::Exists(v, body) | F::Forall(v, body) => {
                let x = self.var(v);
                let guard = guard_for(v, body, matches!(f, F::Forall(..)));
                let guard = self.resolve_guard(guard);
                let b = self.build(body);
                let mut free = self.free_of(b);
                free.remove(&x);
                let node = if matches!(f, F::Exists(..)) {
                    Node::Exists(x, b, guard)
                } else {
                    Node::Forall(x, b, guard)
                };
                self.push(node, free)
            }
            F::Not(g) => {
                let g = self.build(g);
                let free = self.free_of(g);
                self.push(Node::Not(g), free)
            }
            F::Or(l, r) | F::And(l, r) | F::Implies(l, r) | F::Iff(l, r) => {
                let (l, r) = (self.build(l), self.build(r));
                let mut free = self.free_of(l);
                free.extend(self.free_of(r));
                let node = match f {
                    F::Or(..) => Node::Or(l, r),
                    F::And(..) => Node::And(l, r),
                    F::Implies(..) => Node::Implies(l, r),
                    _ => Node::Iff(l, r),
                };
                self.push(node, free)
            }
            F::Pred {
                prop,
                trace_of,
                pos_of,
            } => {
                let (t, p, free) = two(self, trace_of, pos_of);
                let n = self.props.len();
                let k = *self.props.entry(prop.clone()).or_insert(n);
                if k == self.prop_names.len() {
                    self.prop_names.push(prop.clone());
                }
                self.push(Node::Pred(k, t, p), free)
            }
            F::Less(a, b) => {
                let (a, b, free) = two(self, a, b);
                self.push(Node::Less(a, b), free)
            }
            F::Eq(a, b) => {
                let (a, b, free) = two(self, a, b);
                self.push(Node::Eq(a, b), free)
            }
            F::EqualLevel(a, b) => {
                let (a, b, free) = two(self, a, b);
                self.push(Node::Level(a, b), free)
            }
            F::Succ(a, b) => {
                let (a, b, free) = two(self, a, b);
                self.push(Node::Succ(a, b), free)
            }
            F::Min(a) => {
                let a = self.var(a);
                self.push(Node::Min(a), BTreeSet::from([a]))
            }
        }
    }

    fn resolve_guard(&mut self, g: NamedGuard) -> Guard {
        match g {
            NamedGuard::All => Guard::All,
            NamedGuard::First => Guard::First,
            NamedGuard::Level(v) => Guard::Level(self.var(&v)),
            NamedGuard::Trace(v) => Guard::Trace(self.var(&v)),
            NamedGuard::After(v) => Guard::After(self.var(&v)),
            NamedGuard::Before(v) => Guard::Before(self.var(&v)),
        }
    }
}

enum NamedGuard {
    All,
    First,
    Level(String),
    Trace(String),
    After(String),
    Before(String),
}

fn conjuncts<'a>(f: &'a FoFormula, out: &mut Vec<&'a FoFormula>) {
    if let FoFormula::And(l, r) = f {
        conjuncts(l, out);
        conjuncts(r, out);
    } else {
        out.push(f);
    }
}

fn guard_for(v: &str, body: &FoFormula, universal: bool) -> NamedGuard {
    let premise = if universal {
        match body {
            FoFormula::Implies(p, _) => p.as_ref(),
            _ => return NamedGuard::All,
        }
    } else {
        body
    };
    let mut cs = Vec::new();
    conjuncts(premise, &mut cs);
    for c in cs {
        let other = |a: &str, b: &str| -> Option<String> {
            if a == v && b != v {
                Some(b.to_string())
            } else if b == v && a != v {
                Some(a.to_string())
            } else {
                None
            }
        };
        let g = match c {
            FoFormula::EqualLevel(a, b) => other(a, b).map(NamedGuard::Level),
            FoFormula::Less(a, b) | FoFormula::Eq(a, b) => other(a, b).map(NamedGuard::Trace),
            FoFormula::Or(l, r) => match (l.as_ref(), r.as_ref()) {
                (FoFormula::Less(a, b), FoFormula::Eq(c2, d)) if a == c2 && b == d => {
                    other(a, b).map(NamedGuard::Trace)
                }
                _ => None,
            },
            FoFormula::Succ(a, b) if b == v && a != v => Some(NamedGuard::After(a.clone())),
            FoFormula::Succ(a, b) if a == v && b != v => Some(NamedGuard::Before(b.clone())),
            FoFormula::Min(a) if a == v => Some(NamedGuard::First),
            _ => None,
        };
        if let Some(g) = g {
            return g;
        }
    }
    NamedGuard::All
}

struct Evaluator<'a> {
    dom: FoDomain<'a>,
    c: &'a Compiled,
    /// `labels[t][pos]` holds the indices of the compiled propositions.
    labels: Vec<Vec<Vec<bool>>>,
    env: Vec<Option<Elem>>,
    memo: HashMap<(usize, Vec<Elem>), bool>,
}

impl Evaluator<'_> {
    fn get(&self, v: usize) -> Elem {
        self.env[v].expect("free variables must be bound by the environment")
    }

    fn less(a: Elem, b: Elem) -> bool {
        a.0 == b.0 && a.1 < b.1
    }

    fn succ(&self, a: Elem, b: Elem) -> bool {
        // x < y and no z with x < z < y.
        Self::less(a, b)
            && !(0..=self.dom.max_position)
                .any(|p| Self::less(a, (a.0, p)) && Self::less((a.0, p), b))
    }

    fn min(&self, a: Elem) -> bool {
        !(0..=self.dom.max_position).any(|p| self.succ((a.0, p), a))
    }

    fn candidates(&self, g: Guard) -> Vec<Elem> {
        let n = self.dom.universe.len();
        let m = self.dom.max_position;
        match g {
            Guard::All => (0..n).flat_map(|t| (0..=m).map(move |p| (t, p))).collect(),
            Guard::First => (0..n).map(|t| (t, 0)).collect(),
            Guard::Level(v) => {
                let p = self.get(v).1;
                (0..n).map(|t| (t, p)).collect()
            }
            Guard::Trace(v) => {
                let t = self.get(v).0;
                (0..=m).map(|p| (t, p)).collect()
            }
            Guard::After(v) => {
                let (t, p) = self.get(v);
                if p < m {
                    vec![(t, p + 1)]
                } else {
                    vec![]
                }
            }
            Guard::Before(v) => {
                let (t, p) = self.get(v);
                if p > 0 {
                    vec![(t, p - 1)]
                } else {
                    vec![]
                }
            }
        }
    }

    fn eval(&mut self, id: usize) -> bool {
        match self.c.nodes[id].clone() {
            Node::Exists(x, b, g) | Node::Forall(x, b, g) => {
                let key: Vec<Elem> = self.c.free[id].iter().map(|&v| self.get(v)).collect();
                if let Some(&r) = self.memo.get(&(id, key.clone())) {
                    return r;
                }
                let universal = matches!(self.c.nodes[id], Node::Forall(..));
                let saved = self.env[x];
                let mut result = universal;
                for e in self.candidates(g) {
                    self.env[x] = Some(e);
                    if self.eval(b) != universal {
                        result = !universal;
                        break;
                    }
                }
                self.env[x] = saved;
                self.memo.insert((id, key), result);
                result
            }
            Node::Not(a) => !self.eval(a),
            Node::Or(a, b) => self.eval(a) || self.eval(b),
            Node::And(a, b) => self.eval(a) && self.eval(b),
            Node::Implies(a, b) => !self.eval(a) || self.eval(b),
            Node::Iff(a, b) => self.eval(a) == self.eval(b),
            Node::Pred(k, t, p) => {
                let (t, p) = (self.get(t).0, self.get(p).1);
                self.labels[t][p][k]
            }
            Node::Less(a, b) => Self::less(self.get(a), self.get(b)),
            Node::Eq(a, b) => self.get(a) == self.get(b),
            Node::Level(a, b) => self.get(a).1 == self.get(b).1,
            Node::Succ(a, b) => self.succ(self.get(a), self.get(b)),
            Node::Min(a) => self.min(self.get(a)),
        }
    }
}

/// Evaluates `f` with its free variables bound by `env`, as
/// `(universe index, position)` pairs.
///
/// Panics if a free variable of `f` is missing from `env`.
pub fn eval_fo(dom: FoDomain<'_>, f: &FoFormula, env: &HashMap<String, (usize, usize)>) -> bool {
    let mut b = Builder {
        nodes: Vec::new(),
        free: Vec::new(),
        vars: HashMap::new(),
        props: HashMap::new(),
        prop_names: Vec::new(),
    };
    let root = b.build(f);
    let mut vals = vec![None; b.vars.len()];
    for (name, &e) in env {
        if let Some(&v) = b.vars.get(name) {
            vals[v] = Some(e);
        }
    }
    let c = Compiled {
        nodes: b.nodes,
        free: b.free,
        props: b.prop_names,
    };
    let labels = dom
        .universe
        .traces()
        .map(|t| {
            (0..=dom.max_position)
                .map(|p| {
                    let cell = t.label_at(p);
                    c.props.iter().map(|q| cell.contains(q)).collect()
                })
                .collect()
        })
        .collect();
    let mut ev = Evaluator {
        dom,
        c: &c,
        labels,
        env: vals,
        memo: HashMap::new(),
    };
    ev.eval(root)
}

/// Truth of a closed formula.
pub fn holds(dom: FoDomain<'_>, f: &FoFormula) -> bool {
    eval_fo(dom, f, &HashMap::new())
}
