//! Plain-text renderings of verdicts, universes and the case-study demo.

use anyhow::Result;
use serde::Serialize;
use std::fmt::Write;
use yltl::casestudy::{build_system, single_round_universe, Variant};
use yltl::formula::{parse, Formula};
use yltl::semantics::{EvalContext, PreorderReport, Verdict};
use yltl::specs::{build_ece, build_gce, build_ice, position_variant, AttributeVocabulary};
use yltl::trace::{LassoTrace, Origin, TraceUniverse};

const SHOWN: usize = 12;

fn clip(text: &str) -> String {
    const MAX: usize = 120;
    if text.chars().count() <= MAX {
        text.to_string()
    } else {
        let head: String = text.chars().take(MAX).collect();
        format!("{head}...")
    }
}

pub fn verdict(f: &Formula, u: &TraceUniverse, v: &Verdict) -> String {
    let mut s = String::new();
    writeln!(s, "formula: {}", clip(&f.to_string())).unwrap();
    writeln!(s, "universe: {} traces", v.universe_size).unwrap();
    writeln!(
        s,
        "result: {}",
        if v.result {
            "satisfied"
        } else {
            "not satisfied"
        }
    )
    .unwrap();
    if let Some(cx) = &v.counterexample {
        writeln!(s, "counterexample: {cx}").unwrap();
    }
    if let Some(p) = v.position {
        writeln!(s, "position: {p}").unwrap();
    }
    if !v.failing_traces.is_empty() {
        writeln!(s, "failing traces ({}):", v.failing_traces.len()).unwrap();
        for &k in v.failing_traces.iter().take(SHOWN) {
            writeln!(s, "  [{k}] {}", u.get(k)).unwrap();
        }
        if v.failing_traces.len() > SHOWN {
            writeln!(s, "  ...").unwrap();
        }
    }
    if !v.trail.is_empty() {
        writeln!(s, "trail:").unwrap();
        for e in &v.trail {
            writeln!(
                s,
                "  {:<5} @{} {}  {}",
                e.value,
                e.position,
                e.trace,
                clip(&e.formula)
            )
            .unwrap();
        }
    }
    s
}

#[derive(Serialize)]
pub struct Finding {
    pub agent: String,
    pub reference: String,
    pub position: usize,
    pub report: PreorderReport,
}

pub fn findings(u: &TraceUniverse, fs: &[Finding]) -> String {
    if fs.is_empty() {
        return "all similarity relations are preorders with the reference trace as minimum\n"
            .into();
    }
    let name = |k: usize| u.get(k).to_string();
    let mut s = String::new();
    for f in fs {
        writeln!(
            s,
            "agent {} reference {} @{}",
            f.agent, f.reference, f.position
        )
        .unwrap();
        for &k in &f.report.reflexivity {
            writeln!(s, "  not reflexive: {}", name(k)).unwrap();
        }
        for &(x, y, z) in &f.report.transitivity {
            writeln!(
                s,
                "  not transitive: {} <= {} <= {}",
                name(x),
                name(y),
                name(z)
            )
            .unwrap();
        }
        for &k in &f.report.minimum {
            writeln!(
                s,
                "  below the reference without being accessible: {}",
                name(k)
            )
            .unwrap();
        }
    }
    s
}

pub fn universe(u: &TraceUniverse) -> String {
    let mut s = String::new();
    let p = u.provenance();
    if let (Some(pre), Some(l)) = (p.max_prefix, p.max_loop) {
        write!(s, "# prefix <= {pre}, loop <= {l}").unwrap();
        if let Some(states) = &p.loop_states {
            write!(s, ", loop states {}", states.join(",")).unwrap();
        }
        writeln!(s).unwrap();
    }
    for w in &p.warnings {
        writeln!(s, "# warning: {w}").unwrap();
    }
    for (k, e) in u.entries().iter().enumerate() {
        let tag = match e.origin {
            Origin::Model => "",
            Origin::User => "  (user)",
        };
        writeln!(s, "[{k}] {}{tag}", e.trace).unwrap();
    }
    s
}

#[derive(Serialize)]
pub struct DemoCheck {
    pub name: String,
    pub result: bool,
    pub failing_traces: Vec<String>,
}

#[derive(Serialize)]
pub struct PointFact {
    pub formula: String,
    pub trace: String,
    pub position: usize,
    pub value: bool,
    pub closest: Vec<String>,
}

#[derive(Serialize)]
pub struct Demo {
    pub variant: String,
    pub description: String,
    pub universe_size: usize,
    pub checks: Vec<DemoCheck>,
    pub facts: Vec<PointFact>,
}

impl Demo {
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        writeln!(s, "system: {} ({})", self.variant, self.description).unwrap();
        writeln!(s, "universe: {} single-round traces", self.universe_size).unwrap();
        for c in &self.checks {
            let verdict = if c.result {
                "satisfied"
            } else {
                "not satisfied"
            };
            writeln!(s, "{}: {verdict}", c.name).unwrap();
            if !c.failing_traces.is_empty() {
                writeln!(s, "  failing traces ({}):", c.failing_traces.len()).unwrap();
                for t in c.failing_traces.iter().take(SHOWN) {
                    writeln!(s, "    {t}").unwrap();
                }
                if c.failing_traces.len() > SHOWN {
                    writeln!(s, "    ...").unwrap();
                }
            }
        }
        for f in &self.facts {
            writeln!(
                s,
                "{} at ({}, {}): {}",
                f.formula, f.trace, f.position, f.value
            )
            .unwrap();
            for c in &f.closest {
                writeln!(s, "  closest antecedent trace: {c}").unwrap();
            }
        }
        s
    }
}

pub fn demo(v: Variant) -> Result<Demo> {
    let vocab = AttributeVocabulary::hiring();
    let sys = build_system(v);
    let u = single_round_universe(&sys);
    let ctx = EvalContext::exact(&sys, &u);
    let mut specs = vec![("ICE@1 (applicant)", build_ice(&vocab, "a")?)];
    match v {
        Variant::GenderFrozen => specs.push((
            "ECE@1 (recruiter explains)",
            build_ece(&vocab, "a", "r", "r")?,
        )),
        Variant::Restricted => specs.push(("GCE@1 (applicant)", build_gce(&vocab, "a", "a")?)),
        _ => {}
    }
    let mut checks = Vec::new();
    for (name, g) in specs {
        let verdict = ctx.check_system(&position_variant(&g, 1)?)?;
        checks.push(DemoCheck {
            name: name.to_string(),
            result: verdict.result,
            failing_traces: verdict
                .failing_traces
                .iter()
                .map(|&k| u.get(k).to_string())
                .collect(),
        });
    }
    let cf = parse("(a_sales & a_f) MIGHT[a] offer")?;
    let ante = parse("a_sales & a_f")?;
    let mut facts = Vec::new();
    for lit in [
        "{} ; {a_it,a_f,r_sales,r_f} | {}",
        "{} ; {a_it,a_f,r_accounting,r_f} | {}",
    ] {
        let t = LassoTrace::parse(lit)?;
        if !u.contains(&t) {
            continue;
        }
        facts.push(PointFact {
            formula: cf.to_string(),
            trace: t.to_string(),
            position: 1,
            value: ctx.eval_at(&t, 1, &cf)?,
            closest: ctx
                .closest_antecedents("a", &t, 1, &ante)?
                .into_iter()
                .map(|k| u.get(k).to_string())
                .collect(),
        });
    }
    Ok(Demo {
        variant: v.name().to_string(),
        description: v.description().to_string(),
        universe_size: u.len(),
        checks,
        facts,
    })
}
