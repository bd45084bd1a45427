//! Acceptance criteria. Prints one PASS/FAIL line per criterion, then fails
//! if any criterion failed.
//!
//! Every criterion is an exact verdict match; the only tolerances are the
//! wall-clock budgets below.

mod common;

use common::{f, fixture, gen, t};
use std::collections::HashMap;
use std::time::{Duration, Instant};
use yltl::casestudy::{build_system, single_round_universe, Variant};
use yltl::foe::{eval_fo, parse_fo, print_fo, translate, FoDomain, FoFormula, TranslateOptions};
use yltl::formula::Formula;
use yltl::model::load_system;
use yltl::semantics::{EvalContext, Mode};
use yltl::specs::{
    build_ece, build_gce, build_ice, build_wce, entailment_probe, position_variant,
    AttributeVocabulary, FamilyMember,
};
use yltl::trace::TraceUniverse;

const PI: &str = "{} ; {a_it,a_f,r_sales,r_f} | {}";
const PI1: &str = "{} ; {a_sales,a_f,r_sales,r_f,offer} | {}";
const PI2: &str = "{} ; {a_it,a_f,r_accounting,r_f} | {}";
const PI3: &str = "{} ; {a_sales,a_f,r_accounting,r_f} | {}";

const RANDOM_RUNS: u64 = 500;
const ORACLE_RUNS: u64 = 1000;

type Criterion = (&'static str, Duration, fn() -> Outcome);

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn ice_at1() -> Formula {
    position_variant(&build_ice(&AttributeVocabulary::hiring(), "a").unwrap(), 1).unwrap()
}

/// `(result, failing trace literals)` of a system-level check.
fn check(v: Variant, g: &Formula) -> (bool, Vec<String>) {
    let sys = build_system(v);
    let u = single_round_universe(&sys);
    let verdict = EvalContext::exact(&sys, &u).check_system(g).unwrap();
    let failing = verdict
        .failing_traces
        .iter()
        .map(|&k| u.get(k).to_string())
        .collect();
    (verdict.result, failing)
}

fn c1_hiring_discrimination() -> Outcome {
    let ice = ice_at1();
    let (u_ok, u_fail) = check(Variant::Unexplainable, &ice);
    let (e_ok, e_fail) = check(Variant::Explainable, &ice);
    let pi = t(PI).to_string();
    let u_part = !u_ok && u_fail.contains(&pi);
    outcome(
        u_part && e_ok,
        format!(
            "U fails with pi among {} failing traces: {u_part}; E holds: {e_ok} (E failing traces: {e_fail:?})",
            u_fail.len()
        ),
    )
}

fn c2_pointwise_counterfactuals() -> Outcome {
    let sys = build_system(Variant::Unexplainable);
    let u = single_round_universe(&sys);
    let ctx = EvalContext::exact(&sys, &u);
    let cf = f("(a_sales & a_f) MIGHT[a] offer");
    let ante = f("a_sales & a_f");
    let at_pi = ctx.eval_at(&t(PI), 1, &cf).unwrap();
    let at_pi2 = ctx.eval_at(&t(PI2), 1, &cf).unwrap();
    let closest = |lit: &str| -> Vec<String> {
        ctx.closest_antecedents("a", &t(lit), 1, &ante)
            .unwrap()
            .into_iter()
            .map(|k| u.get(k).to_string())
            .collect()
    };
    let (c_pi, c_pi2) = (closest(PI), closest(PI2));
    let pass =
        at_pi && !at_pi2 && c_pi == vec![t(PI1).to_string()] && c_pi2 == vec![t(PI3).to_string()];
    outcome(
        pass,
        format!("at pi: {at_pi} via {c_pi:?}; at pi'': {at_pi2} via {c_pi2:?}"),
    )
}

fn c3_would_versus_universal_would() -> Outcome {
    let sys = load_system(fixture("pq.json")).unwrap();
    let u = TraceUniverse::from_traces(["| {}", "{p} | {}", "{q} | {}", "{p,q} | {}"].map(t));
    let ctx = EvalContext::exact(&sys, &u);
    let w = ctx
        .eval_at(&t("| {}"), 0, &f("(p | q) WOULD[a] p"))
        .unwrap();
    let uw = ctx
        .eval_at(&t("| {}"), 0, &f("(p | q) UWOULD[a] p"))
        .unwrap();
    outcome(w && !uw, format!("WOULD: {w}, UWOULD: {uw}"))
}

fn c4_vacuity() -> Outcome {
    let mut bad = 0;
    for seed in 0..RANDOM_RUNS {
        let mut r = gen::rng(40_000 + seed);
        let inst = gen::instance(&mut r, 4);
        let phi = gen::formula(&mut r, 4);
        let a = if seed % 2 == 0 { "a" } else { "b" };
        for mode in [Mode::exact(), Mode::Bounded(4)] {
            let ctx = EvalContext::new(&inst.system, &inst.universe, mode);
            for g in [
                Formula::would(a, Formula::False, phi.clone()),
                Formula::would(a, phi.clone(), Formula::True),
            ] {
                if !ctx.eval_index(inst.trace, inst.position, &g).unwrap() {
                    bad += 1;
                }
            }
        }
    }
    outcome(
        bad == 0,
        format!("{RANDOM_RUNS} instances, both modes, {bad} violations"),
    )
}

fn c5_agent_specific_similarity() -> Outcome {
    let vocab = AttributeVocabulary::hiring();
    let ece = position_variant(&build_ece(&vocab, "a", "r", "r").unwrap(), 1).unwrap();
    let (ice_ok, ice_fail) = check(Variant::GenderFrozen, &ice_at1());
    let (ece_ok, ece_fail) = check(Variant::GenderFrozen, &ece);
    outcome(
        !ice_ok && ece_ok,
        format!(
            "ICE@1 fails: {} ({} traces); ECE@1 holds: {ece_ok} (failing: {ece_fail:?})",
            !ice_ok,
            ice_fail.len()
        ),
    )
}

fn c6_restricted_system() -> Outcome {
    let vocab = AttributeVocabulary::hiring();
    let gce = position_variant(&build_gce(&vocab, "a", "a").unwrap(), 1).unwrap();
    let (ice_ok, ice_fail) = check(Variant::Restricted, &ice_at1());
    let (gce_ok, gce_fail) = check(Variant::Restricted, &gce);
    let at_pi2 = ice_fail.contains(&t(PI2).to_string());
    outcome(
        !ice_ok && at_pi2 && gce_ok,
        format!("ICE@1 fails at pi'': {at_pi2}; GCE@1 holds: {gce_ok} (failing: {gce_fail:?})"),
    )
}

fn fo_body(fo: &FoFormula) -> (&str, &FoFormula) {
    match fo {
        FoFormula::Forall(v, inner) => match &**inner {
            FoFormula::Implies(_, b) => (v.as_str(), &**b),
            _ => unreachable!(),
        },
        _ => unreachable!(),
    }
}

fn c7_oracle_equivalence() -> Outcome {
    let (mut agree, mut total) = (0, 0);
    for seed in 0..ORACLE_RUNS {
        let mut r = gen::rng(70_000 + seed);
        let sys = gen::system(&mut r);
        let u = gen::universe(&mut r, 6);
        let n = (seed % 5) as usize;
        let g = gen::formula(&mut r, 5).desugar();
        let ctx = EvalContext::bounded(&sys, &u, n);
        let fo = translate(&g, &sys, TranslateOptions::default()).unwrap();
        let (x0, body) = fo_body(&fo);
        let dom = FoDomain::new(&u, n);
        let same = (0..u.len()).all(|k| {
            let env = HashMap::from([(x0.to_string(), (k, 0))]);
            ctx.eval_index(k, 0, &g).unwrap() == eval_fo(dom, body, &env)
        });
        total += 1;
        agree += same as usize;
    }
    outcome(agree == total, format!("{agree}/{total} instances agree"))
}

fn c8_property_suite() -> Outcome {
    let mut failures: Vec<String> = Vec::new();
    let mut note = |name: &str, ok: bool| {
        if !ok && !failures.iter().any(|f| f == name) {
            failures.push(name.to_string());
        }
    };
    let mut uwould_checked = 0;
    for mode in [Mode::exact(), Mode::Bounded(4)] {
        for seed in 0..RANDOM_RUNS * 4 {
            let mut r = gen::rng(80_000 + seed);
            let inst = gen::instance(&mut r, 4);
            let a = if seed % 2 == 0 { "a" } else { "b" };
            let (l, c) = (gen::formula(&mut r, 3), gen::formula(&mut r, 3));
            let ctx = EvalContext::new(&inst.system, &inst.universe, mode);
            let at = |g: &Formula| ctx.eval_index(inst.trace, inst.position, g).unwrap();
            let at0 = |g: &Formula| ctx.eval_index(inst.trace, 0, g).unwrap();
            if seed < RANDOM_RUNS {
                let neg = Formula::not(c.clone());
                note(
                    "might/would duality",
                    at(&Formula::might(a, l.clone(), c.clone()))
                        == !at(&Formula::would(a, l.clone(), neg.clone())),
                );
                note(
                    "emight/uwould duality",
                    at(&Formula::emight(a, l.clone(), c.clone()))
                        == !at(&Formula::uwould(a, l.clone(), neg)),
                );
                note("K truth", !at(&Formula::know(a, l.clone())) || at(&l));
                note("Y false at 0", !at0(&Formula::prev(l.clone())));
                let known = Formula::know(a, gen::temporal(&mut r, 3));
                if at(&known) {
                    let t0 = inst.universe.get(inst.trace).clone();
                    let small = TraceUniverse::from_traces([t0.clone()]);
                    let sctx = EvalContext::new(&inst.system, &small, mode);
                    note(
                        "K anti-monotone",
                        sctx.eval_at(&t0, inst.position, &known).unwrap(),
                    );
                }
            }
            // The strengthening is claimed for similarity relations that
            // are preorders with the reference trace as minimum.
            if uwould_checked < 2 * RANDOM_RUNS
                && ctx
                    .validate_similarity(a, inst.universe.get(inst.trace), inst.position)
                    .unwrap()
                    .is_empty()
            {
                uwould_checked += 1;
                note(
                    "UWOULD implies WOULD",
                    !at(&Formula::uwould(a, l.clone(), c.clone())) || at(&Formula::would(a, l, c)),
                );
            }
        }
    }
    let pass = failures.is_empty() && uwould_checked >= 2 * RANDOM_RUNS;
    outcome(
        pass,
        format!(
            "6 properties x {RANDOM_RUNS} instances x 2 modes ({uwould_checked} well-formed UWOULD samples); failing: {failures:?}"
        ),
    )
}

fn c9_translation_golden_files() -> Outcome {
    let sys = load_system(fixture("pq.json")).unwrap();
    let cases = std::fs::read_to_string(fixture("fo/formulas.txt")).unwrap();
    let mut mismatches = Vec::new();
    let mut count = 0;
    for line in cases.lines().filter(|l| !l.trim().is_empty()) {
        let (name, text) = line.split_once('\t').unwrap();
        for (suffix, faithful) in [("amended", false), ("faithful", true)] {
            let fo = translate(&f(text).desugar(), &sys, TranslateOptions { faithful }).unwrap();
            let printed = print_fo(&fo);
            let stored = std::fs::read_to_string(fixture(&format!("fo/{name}.{suffix}.fo")))
                .unwrap_or_default();
            let round = parse_fo(&printed).map(|g| g == fo).unwrap_or(false);
            if stored != format!("{printed}\n") || !round {
                mismatches.push(format!("{name}.{suffix}"));
            }
            count += 1;
        }
    }
    outcome(
        mismatches.is_empty() && count == 12,
        format!("{count} files; mismatches: {mismatches:?}"),
    )
}

fn c10_entailment_probes() -> Outcome {
    let vocab = AttributeVocabulary::hiring();
    let ice = ice_at1();
    let wce = position_variant(&build_wce(&vocab, "a").unwrap(), 1).unwrap();
    let gce = position_variant(&build_gce(&vocab, "a", "a").unwrap(), 1).unwrap();
    let family: Vec<FamilyMember> = [
        Variant::Explainable,
        Variant::Unexplainable,
        Variant::Restricted,
        Variant::GenderFrozen,
    ]
    .into_iter()
    .map(|v| {
        let system = build_system(v);
        let universe = single_round_universe(&system);
        FamilyMember {
            name: v.name().to_string(),
            system,
            universe,
        }
    })
    .collect();
    let mut details = Vec::new();
    let mut pass = true;
    for (name, second) in [("ICE/WCE", &wce), ("ICE/GCE", &gce)] {
        let a = serde_json::to_string(&entailment_probe(&ice, second, &family).unwrap()).unwrap();
        let report = entailment_probe(&ice, second, &family).unwrap();
        let b = serde_json::to_string(&report).unwrap();
        let complete = report.entries.len() == family.len()
            && report
                .entries
                .iter()
                .all(|e| e.first.result || e.first.counterexample.is_some())
            && report
                .entries
                .iter()
                .all(|e| e.second.result || e.second.counterexample.is_some());
        pass &= a == b && complete;
        let trace_level: Vec<String> = report
            .entries
            .iter()
            .map(|e| {
                format!(
                    "{}:{}/{}",
                    e.system,
                    e.first_only.len(),
                    e.second_only.len()
                )
            })
            .collect();
        details.push(format!(
            "{name} deterministic={} inclusion-consistent={} strict={:?} trace-level first-only/second-only {:?}",
            a == b,
            report.consistent_with_inclusion,
            report.strictness_witnesses,
            trace_level
        ));
    }
    outcome(pass, details.join("; "))
}

#[test]
fn acceptance() {
    let criteria: [Criterion; 10] = [
        (
            "hiring discrimination",
            Duration::from_secs(10),
            c1_hiring_discrimination,
        ),
        (
            "pointwise counterfactual facts",
            Duration::from_secs(1),
            c2_pointwise_counterfactuals,
        ),
        (
            "would vs universal would",
            Duration::from_secs(1),
            c3_would_versus_universal_would,
        ),
        ("vacuity", Duration::from_secs(10), c4_vacuity),
        (
            "agent-specific similarity",
            Duration::from_secs(10),
            c5_agent_specific_similarity,
        ),
        (
            "restricted system",
            Duration::from_secs(30),
            c6_restricted_system,
        ),
        (
            "oracle equivalence",
            Duration::from_secs(300),
            c7_oracle_equivalence,
        ),
        (
            "logical property suite",
            Duration::from_secs(300),
            c8_property_suite,
        ),
        (
            "translation golden files",
            Duration::from_secs(1),
            c9_translation_golden_files,
        ),
        (
            "entailment probes",
            Duration::from_secs(60),
            c10_entailment_probes,
        ),
    ];
    let mut failed = Vec::new();
    println!();
    for (k, (name, budget, run)) in criteria.into_iter().enumerate() {
        let start = Instant::now();
        let out = run();
        let took = start.elapsed();
        let in_time = took <= budget;
        let pass = out.pass && in_time;
        let time_note = if in_time {
            String::new()
        } else {
            format!(" [over budget {budget:?}]")
        };
        println!(
            "{} {:>2} {name} ({:.2}s){time_note}: {}",
            if pass { "PASS" } else { "FAIL" },
            k + 1,
            took.as_secs_f64(),
            out.detail
        );
        if !pass {
            failed.push(k + 1);
        }
    }
    assert!(failed.is_empty(), "failing criteria: {failed:?}");
}
