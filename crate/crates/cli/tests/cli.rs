use std::path::PathBuf;
use std::process::{Command, Output};

fn fixture(rel: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../fixtures")
        .join(rel)
        .display()
        .to_string()
}

fn yltl(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_yltl"))
        .args(args)
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

const PI: &str = "{} ; {a_f,a_it,r_f,r_sales} | {}";

#[test]
fn check_exit_codes() {
    let model = fixture("pq.json");
    let ok = yltl(&["check", "--model", &model, "--formula", "!p | p"]);
    assert_eq!(
        ok.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&ok.stderr)
    );
    assert!(stdout(&ok).contains("result: satisfied"));
    let bad = yltl(&["check", "--model", &model, "--formula", "G p"]);
    assert_eq!(bad.status.code(), Some(1));
    assert!(stdout(&bad).contains("counterexample: "));
    for args in [
        vec!["check", "--model", &model, "--formula", "p &"],
        vec!["check", "--model", &model, "--formula", "K[zed] p"],
        vec!["check", "--model", &model, "--formula", "nosuch"],
        vec!["check", "--model", "/no/such/file.json", "--formula", "p"],
        vec!["check", "--model", &model],
        vec![
            "check",
            "--model",
            &model,
            "--formula",
            "p",
            "--trace",
            "{z} | {}",
        ],
        vec!["frobnicate"],
    ] {
        assert_eq!(yltl(&args).status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn hiring_check_reports_the_discriminating_trace() {
    let ice = fixture("formulas/ice_at1.yltl");
    let u = yltl(&[
        "check",
        "--model",
        &fixture("hiring/unexplainable.json"),
        "--formula-file",
        &ice,
        "--loop-states",
        "s0",
        "--json",
    ]);
    assert_eq!(u.status.code(), Some(1));
    let v: serde_json::Value = serde_json::from_slice(&u.stdout).unwrap();
    assert_eq!(v["universe_size"], 37);
    let listing = stdout(&yltl(&[
        "universe",
        "--model",
        &fixture("hiring/unexplainable.json"),
        "--loop-states",
        "s0",
    ]));
    let index = listing
        .lines()
        .find(|l| l.ends_with(PI))
        .and_then(|l| l[1..l.find(']').unwrap()].parse::<u64>().ok())
        .unwrap();
    assert!(v["failing_traces"]
        .as_array()
        .unwrap()
        .contains(&serde_json::json!(index)));
}

#[test]
fn bounded_mode_and_explicit_traces() {
    let model = fixture("pq.json");
    let args = |extra: &[&str]| {
        let mut a = vec![
            "check",
            "--model",
            model.as_str(),
            "--formula",
            "(p | q) WOULD[a] p",
        ];
        a.extend_from_slice(extra);
        a.extend([
            "--trace",
            "| {}",
            "--trace",
            "{p} | {}",
            "--trace",
            "{q} | {}",
            "--trace",
            "{p,q} | {}",
        ]);
        a.into_iter().map(String::from).collect::<Vec<_>>()
    };
    let run = |a: Vec<String>| yltl(&a.iter().map(String::as_str).collect::<Vec<_>>());
    assert_eq!(run(args(&[])).status.code(), Some(1));
    assert_eq!(run(args(&["--bounded", "0"])).status.code(), Some(1));
    let o = yltl(&[
        "check",
        "--model",
        &model,
        "--formula",
        "X X X p",
        "--bounded",
        "1",
        "--trace",
        "| {p}",
    ]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn translate_matches_golden_files() {
    let model = fixture("pq.json");
    for (name, formula) in [("atom", "p"), ("know", "K[a] p"), ("would", "p WOULD[a] q")] {
        for (suffix, flag) in [("amended", None), ("faithful", Some("--faithful"))] {
            let mut args = vec!["translate", "--model", &model, "--formula", formula];
            args.extend(flag);
            let o = yltl(&args);
            assert_eq!(o.status.code(), Some(0));
            let expected =
                std::fs::read_to_string(fixture(&format!("fo/{name}.{suffix}.fo"))).unwrap();
            assert_eq!(stdout(&o), expected, "{name} {suffix}");
        }
    }
}

#[test]
fn output_file_and_jobs_do_not_change_results() {
    let dir = tempfile::tempdir().unwrap();
    let model = fixture("hiring/explainable.json");
    let ice = fixture("formulas/ice_at1.yltl");
    let mut outputs = Vec::new();
    for jobs in ["1", "4"] {
        let path = dir.path().join(format!("report-{jobs}.txt"));
        let o = yltl(&[
            "--jobs",
            jobs,
            "check",
            "--model",
            &model,
            "--formula-file",
            &ice,
            "--loop-states",
            "s0",
            "--out",
            path.to_str().unwrap(),
        ]);
        assert_eq!(o.status.code(), Some(1));
        assert!(o.stdout.is_empty());
        outputs.push(std::fs::read_to_string(path).unwrap());
    }
    assert_eq!(outputs[0], outputs[1]);
    assert!(outputs[0].contains("failing traces (1):"));
}

#[test]
fn validate_reports() {
    let clean = yltl(&[
        "validate",
        "--model",
        &fixture("hiring/gender-frozen.json"),
        "--loop-states",
        "s0",
        "--positions",
        "0,1",
    ]);
    assert_eq!(clean.status.code(), Some(0));
    let broken = yltl(&[
        "validate",
        "--model",
        &fixture("broken_similarity.json"),
        "--universe-prefix",
        "1",
        "--positions",
        "1",
    ]);
    assert_eq!(broken.status.code(), Some(1));
    assert!(stdout(&broken).contains("not reflexive"));
}

#[test]
fn universe_listing() {
    let o = yltl(&[
        "universe",
        "--model",
        &fixture("hiring/restricted.json"),
        "--loop-states",
        "s0",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert_eq!(text.lines().filter(|l| l.starts_with('[')).count(), 25);
    assert!(text.contains("[0] | {}"));
    let capped = yltl(&[
        "universe",
        "--model",
        &fixture("pq.json"),
        "--universe-prefix",
        "3",
        "--universe-loop",
        "2",
        "--max-traces",
        "5",
    ]);
    assert_eq!(capped.status.code(), Some(2));
    let json = yltl(&[
        "universe",
        "--model",
        &fixture("pq.json"),
        "--universe-prefix",
        "0",
        "--json",
    ]);
    let v: serde_json::Value = serde_json::from_slice(&json.stdout).unwrap();
    assert!(v["entries"].is_array());
}

#[test]
fn demo_variants() {
    let list = yltl(&["demo", "--list"]);
    assert_eq!(stdout(&list).lines().count(), 4);
    assert_eq!(yltl(&["demo", "nonsense"]).status.code(), Some(2));
    assert_eq!(yltl(&["demo"]).status.code(), Some(2));

    let u = stdout(&yltl(&["demo", "unexplainable"]));
    assert!(u.contains("ICE@1 (applicant): not satisfied"));
    assert!(u.contains(PI));
    let e = yltl(&["demo", "explainable", "--json"]);
    let v: serde_json::Value = serde_json::from_slice(&e.stdout).unwrap();
    assert_eq!(
        v["checks"][0]["failing_traces"],
        serde_json::json!(["| {}"])
    );
    let g = stdout(&yltl(&["demo", "gender-frozen"]));
    assert!(g.contains("ECE@1"));
    let r = stdout(&yltl(&["demo", "restricted"]));
    assert!(r.contains("GCE@1"));
    // Byte-for-byte stable.
    assert_eq!(r, stdout(&yltl(&["demo", "restricted"])));
}
