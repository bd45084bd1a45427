mod common;

use common::{f, golden, t};
use yltl::casestudy::{build_system, single_round_universe, Variant};
use yltl::semantics::EvalContext;
use yltl::specs::{
    build_ece, build_gce, build_ice, build_wce, entailment_probe, position_variant,
    AttributeVocabulary, FamilyMember,
};

const PI: &str = "{} ; {a_it,a_f,r_sales,r_f} | {}";
const PI1: &str = "{} ; {a_sales,a_f,r_sales,r_f,offer} | {}";
const PI2: &str = "{} ; {a_it,a_f,r_accounting,r_f} | {}";
const PI3: &str = "{} ; {a_sales,a_f,r_accounting,r_f} | {}";
const S0: &str = "| {}";

fn at1(g: yltl::formula::Formula) -> yltl::formula::Formula {
    position_variant(&g, 1).unwrap()
}

#[test]
fn universe_shape() {
    let sys = build_system(Variant::Explainable);
    let u = single_round_universe(&sys);
    assert_eq!(u.len(), 37);
    let decided = u.traces().filter(|tr| tr.prefix_len() == 2).count();
    assert_eq!(decided, 36);
    let offers = u
        .traces()
        .filter(|tr| tr.label_at(1).contains("offer"))
        .count();
    assert_eq!(offers, 6);
}

#[test]
fn similarity_relations_are_preorders() {
    for v in [Variant::Explainable, Variant::GenderFrozen] {
        let sys = build_system(v);
        let u = single_round_universe(&sys);
        let ctx = EvalContext::exact(&sys, &u);
        for agent in ["a", "r"] {
            for tref in u.traces() {
                for i in [0, 1] {
                    let rep = ctx.validate_similarity(agent, tref, i).unwrap();
                    assert!(rep.is_empty(), "{v} {agent} {tref} @{i}: {rep:?}");
                }
            }
        }
    }
}

#[test]
fn similarity_examples() {
    let sys = build_system(Variant::Explainable);
    let u = single_round_universe(&sys);
    let ctx = EvalContext::exact(&sys, &u);
    let (pi, pi1, pi2, pi3) = (t(PI), t(PI1), t(PI2), t(PI3));
    assert!(ctx.similarity_holds("a", &pi, &pi, &pi3, 1).unwrap());
    assert!(!ctx.similarity_holds("a", &pi, &pi1, &pi2, 1).unwrap());
    assert!(!ctx.similarity_holds("a", &pi, &pi2, &pi1, 1).unwrap());
    for tr in u.traces() {
        assert!(ctx.similarity_holds("a", tr, tr, tr, 1).unwrap());
    }

    let frozen = build_system(Variant::GenderFrozen);
    let ctx = EvalContext::exact(&frozen, &u);
    let flipped = t("{} ; {a_it,a_m,r_sales,r_f} | {}");
    assert!(!ctx.similarity_holds("a", &pi, &pi, &flipped, 1).unwrap());
    assert!(ctx.similarity_holds("r", &pi, &pi, &flipped, 1).unwrap());
    assert!(ctx.similarity_holds("a", &pi, &pi, &pi3, 1).unwrap());
}

#[test]
fn pointwise_counterfactuals() {
    let sys = build_system(Variant::Unexplainable);
    let u = single_round_universe(&sys);
    let ctx = EvalContext::exact(&sys, &u);
    let cf = f("(a_sales & a_f) MIGHT[a] offer");
    let ante = f("a_sales & a_f");
    assert!(ctx.eval_at(&t(PI), 1, &cf).unwrap());
    assert!(!ctx.eval_at(&t(PI2), 1, &cf).unwrap());
    let closest = |tr: &str| -> Vec<String> {
        ctx.closest_antecedents("a", &t(tr), 1, &ante)
            .unwrap()
            .into_iter()
            .map(|k| u.get(k).to_string())
            .collect()
    };
    assert_eq!(closest(PI), vec![t(PI1).to_string()]);
    assert_eq!(closest(PI2), vec![t(PI3).to_string()]);
    // π and π″ look the same to the applicant without the recruiter's pick.
    assert!(!ctx
        .eval_at(&t(PI), 1, &f("K[a] ((a_sales & a_f) MIGHT[a] offer)"))
        .unwrap());
}

#[test]
fn internal_explainability_separates_the_systems() {
    let vocab = AttributeVocabulary::hiring();
    let ice = at1(build_ice(&vocab, "a").unwrap());
    let check = |v: Variant| {
        let sys = build_system(v);
        let u = single_round_universe(&sys);
        let verdict = EvalContext::exact(&sys, &u).check_system(&ice).unwrap();
        let failing: Vec<String> = verdict
            .failing_traces
            .iter()
            .map(|&k| u.get(k).to_string())
            .collect();
        (verdict, failing)
    };
    let (u_verdict, u_failing) = check(Variant::Unexplainable);
    assert!(!u_verdict.result);
    assert!(u_failing.contains(&t(PI).to_string()));
    assert_eq!(u_verdict.position, Some(1));

    // In the explainable system every decision trace is fine; only the
    // trace that never leaves s0 has no actionable explanation, because
    // all six recruiter preferences are incomparable from there.
    let (e_verdict, e_failing) = check(Variant::Explainable);
    assert_eq!(e_failing, vec![S0.to_string()]);
    assert!(!e_verdict.result);

    let (_, r_failing) = check(Variant::Restricted);
    assert!(r_failing.contains(&t(PI2).to_string()));
    let (_, g_failing) = check(Variant::GenderFrozen);
    assert!(g_failing.contains(&t("{} ; {a_it,a_m,r_sales,r_f} | {}").to_string()));
    assert!(!g_failing.contains(&t(PI).to_string()));
}

#[test]
fn external_and_general_explainability() {
    let vocab = AttributeVocabulary::hiring();
    let ece = at1(build_ece(&vocab, "a", "r", "r").unwrap());
    let gce = at1(build_gce(&vocab, "a", "a").unwrap());
    for (v, g) in [(Variant::GenderFrozen, &ece), (Variant::Restricted, &gce)] {
        let sys = build_system(v);
        let u = single_round_universe(&sys);
        let verdict = EvalContext::exact(&sys, &u).check_system(g).unwrap();
        let failing: Vec<String> = verdict
            .failing_traces
            .iter()
            .map(|&k| u.get(k).to_string())
            .collect();
        assert_eq!(failing, vec![S0.to_string()], "{v}");
    }
}

#[test]
fn weak_explainability_collapses_at_the_actual_trace() {
    // The actual attribute pair is itself a disjunct of the antecedent, so
    // the actual trace is the unique closest antecedent trace.
    let vocab = AttributeVocabulary::hiring();
    let wce = at1(build_wce(&vocab, "a").unwrap());
    let sys = build_system(Variant::Explainable);
    let u = single_round_universe(&sys);
    let verdict = EvalContext::exact(&sys, &u).check_system(&wce).unwrap();
    let no_offer = u
        .traces()
        .filter(|tr| !tr.label_at(1).contains("offer"))
        .count();
    assert_eq!(verdict.failing_traces.len(), no_offer);
}

fn family() -> Vec<FamilyMember> {
    Variant::ALL
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
        .collect()
}

#[test]
fn entailment_probes_are_reproducible() {
    let vocab = AttributeVocabulary::hiring();
    let ice = at1(build_ice(&vocab, "a").unwrap());
    let wce = at1(build_wce(&vocab, "a").unwrap());
    let gce = at1(build_gce(&vocab, "a", "a").unwrap());
    let fam = family();
    for (name, second) in [("ice-wce", &wce), ("ice-gce", &gce)] {
        let report = entailment_probe(&ice, second, &fam).unwrap();
        let text = serde_json::to_string_pretty(&report).unwrap() + "\n";
        let again = serde_json::to_string_pretty(&entailment_probe(&ice, second, &fam).unwrap())
            .unwrap()
            + "\n";
        assert_eq!(text, again);
        assert_eq!(report.entries.len(), 4);
        golden(&format!("probes/{name}.json"), &text);
        let entry = |sys: &str| report.entries.iter().find(|e| e.system == sys).unwrap();
        if name == "ice-wce" {
            // Traces meeting ICE but not WCE: evidence against the claimed
            // inclusion, surfaced rather than hidden.
            assert!(!entry("explainable").first_only.is_empty());
        } else {
            assert!(!entry("restricted").second_only.is_empty());
            assert!(report.entries.iter().all(|e| e.first_only.is_empty()));
        }
    }
    let same = entailment_probe(&ice, &ice, &fam).unwrap();
    assert!(same.consistent_with_inclusion);
    assert!(same.strictness_witnesses.is_empty());
}

#[test]
fn shipped_formula_files_match_builders() {
    let vocab = AttributeVocabulary::hiring();
    let all = [
        ("ice", build_ice(&vocab, "a").unwrap()),
        ("wce", build_wce(&vocab, "a").unwrap()),
        ("gce", build_gce(&vocab, "a", "a").unwrap()),
        ("ece", build_ece(&vocab, "a", "r", "r").unwrap()),
    ];
    for (name, g) in all {
        golden(&format!("formulas/{name}.yltl"), &format!("{g}\n"));
        golden(
            &format!("formulas/{name}_at1.yltl"),
            &format!("{}\n", at1(g)),
        );
    }
}
