#![allow(dead_code)]

use std::path::PathBuf;
use yltl::formula::{parse, Formula};
use yltl::trace::LassoTrace;

pub fn fixture(rel: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../fixtures")
        .join(rel)
}

/// Compares `actual` with the stored file, or rewrites it when
/// `YLTL_BLESS` is set.
pub fn golden(rel: &str, actual: &str) {
    let path = fixture(rel);
    if std::env::var_os("YLTL_BLESS").is_some() {
        std::fs::create_dir_all(path.parent().unwrap()).unwrap();
        std::fs::write(&path, actual).unwrap();
        return;
    }
    let expected = std::fs::read_to_string(&path)
        .unwrap_or_else(|e| panic!("{}: {e} (run with YLTL_BLESS=1 to create)", path.display()));
    assert_eq!(actual, expected, "golden mismatch for {rel}");
}

pub fn f(s: &str) -> Formula {
    parse(s).unwrap()
}

pub fn t(s: &str) -> LassoTrace {
    LassoTrace::parse(s).unwrap()
}

pub mod gen {
    use rand::seq::SliceRandom;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::collections::BTreeMap;
    use yltl::formula::Formula;
    use yltl::model::{AgentDocument, SimilarityDocument, StateDocument, System, SystemDocument};
    use yltl::trace::{LabelSet, LassoTrace, TraceUniverse};

    pub const APS: [&str; 2] = ["p", "q"];
    pub const AGENTS: [&str; 2] = ["a", "b"];

    pub fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    fn subset_sim(aps: &[&str]) -> String {
        let body = aps
            .iter()
            .map(|p| format!("(!({p}@pi <-> {p}@pi1) -> !({p}@pi <-> {p}@pi2))"))
            .collect::<Vec<_>>()
            .join(" & ");
        format!("G ({body}) & H ({body})")
    }

    fn random_relational(r: &mut ChaCha8Rng, depth: usize) -> String {
        let vars = ["pi", "pi1", "pi2"];
        if depth == 0 || r.gen_bool(0.3) {
            return format!("{}@{}", APS.choose(r).unwrap(), vars.choose(r).unwrap());
        }
        let a = random_relational(r, depth - 1);
        match r.gen_range(0..6) {
            0 => format!("!({a})"),
            1 => format!("({a}) & ({})", random_relational(r, depth - 1)),
            2 => format!("({a}) | ({})", random_relational(r, depth - 1)),
            3 => format!("X ({a})"),
            4 => format!("G ({a})"),
            _ => format!("({a}) S ({})", random_relational(r, depth - 1)),
        }
    }

    /// Similarity formula: subset similarity (over one or both props),
    /// `true`, or an arbitrary small relational formula.
    pub fn similarity(r: &mut ChaCha8Rng) -> String {
        match r.gen_range(0..5) {
            0 | 1 => subset_sim(&APS),
            2 => subset_sim(&APS[..1]),
            3 => "true".into(),
            _ => random_relational(r, 2),
        }
    }

    fn label(r: &mut ChaCha8Rng) -> LabelSet {
        APS.iter()
            .filter(|_| r.gen_bool(0.5))
            .map(|p| p.to_string())
            .collect()
    }

    pub fn system(r: &mut ChaCha8Rng) -> System {
        let n = r.gen_range(1..=5);
        let id = |k: usize| format!("s{k}");
        let states = (0..n)
            .map(|k| StateDocument {
                id: id(k),
                labels: label(r).into_iter().collect(),
            })
            .collect();
        let mut transitions = BTreeMap::new();
        for k in 0..n {
            let mut succ: Vec<String> = (0..n).filter(|_| r.gen_bool(0.5)).map(id).collect();
            if succ.is_empty() {
                succ.push(id(r.gen_range(0..n)));
            }
            transitions.insert(id(k), succ);
        }
        let agents = AGENTS
            .iter()
            .map(|a| AgentDocument {
                name: a.to_string(),
                observes: APS
                    .iter()
                    .filter(|_| r.gen_bool(0.5))
                    .map(|p| p.to_string())
                    .collect(),
                similarity: SimilarityDocument {
                    params: vec!["pi".into(), "pi1".into(), "pi2".into()],
                    formula: similarity(r),
                },
            })
            .collect();
        System::from_document(SystemDocument {
            states,
            initial: id(0),
            transitions,
            aps: APS.iter().map(|s| s.to_string()).collect(),
            agents,
        })
        .unwrap()
    }

    pub fn trace(r: &mut ChaCha8Rng, max_prefix: usize, max_loop: usize) -> LassoTrace {
        let p = r.gen_range(0..=max_prefix);
        let l = r.gen_range(1..=max_loop);
        let prefix = (0..p).map(|_| label(r)).collect();
        let cycle = (0..l).map(|_| label(r)).collect();
        LassoTrace::new(prefix, cycle).unwrap()
    }

    /// Between 1 and `max` distinct traces (duplicates collapse).
    pub fn universe(r: &mut ChaCha8Rng, max: usize) -> TraceUniverse {
        let n = r.gen_range(1..=max);
        TraceUniverse::from_traces((0..n).map(|_| trace(r, 2, 2)).collect::<Vec<_>>())
    }

    /// A random surface formula of depth at most `depth` over `APS` and
    /// `AGENTS`, including every operator.
    pub fn formula(r: &mut ChaCha8Rng, depth: usize) -> Formula {
        if depth <= 1 || r.gen_bool(0.2) {
            return match r.gen_range(0..8) {
                0 => Formula::True,
                1 => Formula::False,
                _ => Formula::atom(*APS.choose(r).unwrap()),
            };
        }
        let d = depth - 1;
        let ag = AGENTS.choose(r).unwrap().to_string();
        match r.gen_range(0..21) {
            0 => Formula::not(formula(r, d)),
            1 => Formula::and(formula(r, d), formula(r, d)),
            2 => Formula::or(formula(r, d), formula(r, d)),
            3 => Formula::implies(formula(r, d), formula(r, d)),
            4 => Formula::iff(formula(r, d), formula(r, d)),
            5 => Formula::next(formula(r, d)),
            6 => Formula::until(formula(r, d), formula(r, d)),
            7 => Formula::prev(formula(r, d)),
            8 => Formula::since(formula(r, d), formula(r, d)),
            9 => Formula::eventually(formula(r, d)),
            10 => Formula::globally(formula(r, d)),
            11 => Formula::once(formula(r, d)),
            12 => Formula::historically(formula(r, d)),
            13 | 14 => Formula::know(ag, formula(r, d)),
            15 | 16 => Formula::would(ag, formula(r, d), formula(r, d)),
            17 => Formula::uwould(ag, formula(r, d), formula(r, d)),
            18 => Formula::might(ag, formula(r, d), formula(r, d)),
            19 => Formula::emight(ag, formula(r, d), formula(r, d)),
            _ => Formula::atom(*APS.choose(r).unwrap()),
        }
    }

    /// Like [`formula`] but without `K` or counterfactuals.
    pub fn temporal(r: &mut ChaCha8Rng, depth: usize) -> Formula {
        loop {
            let f = formula(r, depth);
            if f.agents().is_empty() {
                return f;
            }
        }
    }

    /// Like [`formula`] with past operators and booleans only.
    pub fn past(r: &mut ChaCha8Rng, depth: usize) -> Formula {
        if depth <= 1 || r.gen_bool(0.2) {
            return Formula::atom(*APS.choose(r).unwrap());
        }
        let d = depth - 1;
        match r.gen_range(0..6) {
            0 => Formula::not(past(r, d)),
            1 => Formula::and(past(r, d), past(r, d)),
            2 => Formula::prev(past(r, d)),
            3 => Formula::since(past(r, d), past(r, d)),
            4 => Formula::once(past(r, d)),
            _ => Formula::historically(past(r, d)),
        }
    }

    /// A random system, universe, trace index and position.
    pub struct Instance {
        pub system: System,
        pub universe: TraceUniverse,
        pub trace: usize,
        pub position: usize,
    }

    pub fn instance(r: &mut ChaCha8Rng, max_position: usize) -> Instance {
        let system = system(r);
        let universe = universe(r, 6);
        let trace = r.gen_range(0..universe.len());
        let position = r.gen_range(0..=max_position);
        Instance {
            system,
            universe,
            trace,
            position,
        }
    }
}
