mod common;

use common::*;

fn temp_file(name: &str, contents: &str) -> String {
    let dir = std::env::temp_dir().join(format!("foc-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join(name);
    std::fs::write(&path, contents).unwrap();
    path.display().to_string()
}

#[test]
fn usage_errors_exit_64() {
    assert_eq!(cli(&[]).0, 64);
    assert_eq!(cli(&["frobnicate"]).0, 64);
    assert_eq!(cli(&["mx", "corpus/symptoms.foc", "--format", "yaml"]).0, 64);
    assert_eq!(cli(&["mx", "corpus/symptoms.foc", "--all", "--models", "2"]).0, 64);
    assert_eq!(cli(&["mx", "corpus/symptoms.foc", "--time", "-1"]).0, 64);
    let (code, out, _) = cli(&["--help"]);
    assert_eq!(code, 0);
    assert!(out.contains("mx"));
}

#[test]
fn input_errors_exit_1() {
    let (code, _, err) = cli(&["check", "corpus/missing.foc"]);
    assert_eq!(code, 1);
    assert!(err.contains("Io"));
    let bad = temp_file("syntax.foc", "vocabulary V { p : () -> }");
    let (code, _, err) = cli(&["check", &bad]);
    assert_eq!(code, 1);
    assert!(err.starts_with(&format!("{bad}:1:")), "{err}");
    let (code, _, err) = cli(&["mx", "corpus/symptoms.foc", "--structure", "Nope"]);
    assert_eq!(code, 1);
    assert!(err.contains("UnknownStructure"));
}

#[test]
fn eval_reports_each_axiom() {
    let (code, out, _) = cli(&["eval", "corpus/intl_law.foc"]);
    assert_eq!(code, 0);
    assert_eq!(out, "true: !o in obligation: !c in Country: $(o)(c) =< $(mapping(o))()\n");
    // a partial structure has no truth values
    let (code, _, err) = cli(&["eval", "corpus/symptoms.foc"]);
    assert_eq!(code, 1);
    assert!(err.contains("NotTotal"), "{err}");
}

#[test]
fn eval_queries() {
    let (code, out, err) = cli(&[
        "eval",
        "corpus/symptoms.foc",
        "--query",
        "#{x in riskFactor: $(x)(bob)}",
        "--query",
        "hasFever(cy)",
    ]);
    assert_eq!(code, 0, "{err}");
    // highRisk(bob) is unknown, so the count is
    assert_eq!(out, "#{x in riskFactor: $(x)(bob)} = undefined\nhasFever(cy) = false\n");
    let (code, out, _) = cli(&["eval", "corpus/transclos.foc", "--query", "TransClos(`graph2, b, b)"]);
    assert_eq!((code, out.as_str()), (0, "TransClos(`graph2, b, b) = true\n"));
    let (code, _, err) = cli(&["eval", "corpus/transclos.foc", "--query", "$(x)(a, b)"]);
    assert_eq!(code, 1);
    assert!(!err.is_empty());
}

#[test]
fn ground_listing_and_smt2() {
    let (code, out, _) = cli(&["ground", "corpus/disambiguation.foc"]);
    assert_eq!(code, 0);
    assert!(!out.contains('$') && !out.contains("::"));
    assert!(out.lines().all(|l| l.ends_with('.')));
    let (code, smt, _) = cli(&["ground", "corpus/symptoms.foc", "--emit", "smt2"]);
    assert_eq!(code, 0);
    assert!(smt.starts_with("(set-logic QF_LIA)\n") && smt.ends_with("(check-sat)\n"));
    let (code, raw, _) = cli(&["ground", "corpus/symptoms.foc", "--raw"]);
    assert_eq!(code, 0);
    assert!(raw.contains("severity(bob) = count("));
    assert_eq!(cli(&["ground", "corpus/setgame.foc", "--cap", "5"]).0, 3);
}

#[test]
fn mx_exit_codes() {
    let unsat = temp_file("unsat.foc", "vocabulary V { p : () -> Bool } theory T : V { p() & ~p(). }");
    let (code, out, _) = cli(&["mx", &unsat]);
    assert_eq!((code, out.as_str()), (0, "UNSAT: 0 models\n"));
    assert_eq!(cli(&["mx", &unsat, "--expect-sat"]).0, 2);
    assert_eq!(cli(&["mx", "corpus/setgame.foc", "--expect-sat"]).0, 0);
    let (code, out, _) = cli(&["mx", "corpus/setgame.foc", "--all", "--cap", "3"]);
    assert_eq!(code, 3);
    assert!(out.is_empty() || out.starts_with("CAPPED"), "{out}");
    let (code, out, _) = cli(&["mx", "corpus/setgame.foc", "--all", "--time", "0"]);
    assert_eq!(code, 3);
    assert!(out.starts_with("TIMEOUT"));
}

#[test]
fn mx_json_is_deterministic() {
    let args = ["mx", "corpus/setgame.foc", "--all", "--format", "json"];
    let (code, out, _) = cli(&args);
    assert_eq!(code, 0);
    let doc: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(doc["status"], "SAT");
    assert_eq!(doc["count"], 2);
    assert_eq!(doc["models"].as_array().unwrap().len(), 2);
    assert_eq!(cli(&args).1, out);
}

#[test]
fn mx_models_evaluate_true() {
    for name in CORPUS {
        let src = corpus_source(name);
        let (code, out, _) = cli(&["mx", &corpus_path(name).display().to_string(), "--models", "3"]);
        assert_eq!(code, 0);
        let models: Vec<&str> = out.split("\n\n").filter(|b| b.starts_with("structure ")).collect();
        assert!(!models.is_empty(), "{name}");
        for (i, m) in models.iter().enumerate() {
            let path = temp_file(&format!("{name}-{i}.foc"), &format!("{src}\n{m}\n"));
            let (code, out, err) = cli(&["eval", &path, "--structure", &format!("model{}", i + 1)]);
            assert_eq!(code, 0, "{name}: {err}");
            assert!(out.lines().all(|l| l.starts_with("true: ")), "{name}:\n{out}");
        }
    }
}

#[test]
fn color_is_opt_in() {
    let (_, _, plain) = cli(&["check", "corpus/ill_formed.foc"]);
    assert!(!plain.contains('\x1b'));
}
