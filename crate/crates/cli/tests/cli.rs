use ncsos_cli::{run, Outcome, EXIT_CONTRACT, EXIT_INCONCLUSIVE, EXIT_NOT_SOS, EXIT_OK, EXIT_USAGE};
use serde_json::Value;

const F: &str = "X1*X2*X2*X1 - X2*X1*X1*X2 + 1";
const H: &str = "X*X' - X'*X + 1";

fn ncsos(args: &[&str]) -> Outcome {
    run(std::iter::once("ncsos").chain(args.iter().copied()))
}

fn json_of(out: &Outcome) -> Value {
    serde_json::from_str(&out.stdout).unwrap_or_else(|e| panic!("bad JSON ({e}): {}", out.stdout))
}

#[test]
fn check_sos_exit_codes() {
    let out = ncsos(&["check-sos", "1 + X1*X1"]);
    assert_eq!(out.code, EXIT_OK, "{out:?}");
    assert!(out.stdout.contains("status: certificate"));

    let out = ncsos(&["check-sos", F, "--json"]);
    assert_eq!(out.code, EXIT_NOT_SOS);
    let j = json_of(&out);
    assert_eq!(j["witness_word"], "X1X2");
    assert_eq!(j["kind"], "NegativeTopDiagonal");
    assert_eq!(j["coefficient"], "-1");

    let out = ncsos(&["check-sos", "X1*X2 + X2*X1", "--json"]);
    assert_eq!(out.code, EXIT_NOT_SOS);
    assert_eq!(json_of(&out)["kind"], "ZeroDiagonalNonzeroRow");
}

#[test]
fn inconclusive_when_starved_of_iterations() {
    let out = ncsos(&["check-sos", "1 + X1*X2 + X2*X1 + X2*X1*X1*X2", "--max-iters", "2"]);
    assert_eq!(out.code, EXIT_INCONCLUSIVE, "{out:?}");
    let out = ncsos(&["check-sos", "1 + X1*X2 + X2*X1 + X2*X1*X1*X2", "--json"]);
    assert_eq!(out.code, EXIT_OK);
    let j = json_of(&out);
    assert_eq!(j["status"], "certificate");
    assert!(j["residual"].as_f64().unwrap() <= 1e-6);
}

#[test]
fn text_and_json_agree() {
    for p in ["1 + X1*X1", F, "X1*X2 + X2*X1", "X1*X1*X1"] {
        let text = ncsos(&["check-sos", p]);
        let json = ncsos(&["check-sos", p, "--json"]);
        assert_eq!(text.code, json.code, "{p}");
        let status = json_of(&json)["status"].as_str().unwrap().to_string();
        assert!(text.stdout.contains(&format!("status: {status}\n")), "{p}: {}", text.stdout);
    }
}

#[test]
fn usage_errors_exit_one() {
    for args in [
        vec!["check-sos", "X1 +"],
        vec!["check-sos", "X3*X3"],
        vec!["check-sos", "X1*X2"],
        vec!["check-sos", "X1'*X1"],
        vec!["check-sos"],
        vec!["frobnicate"],
        vec!["check-sos", "1", "--dims", "0"],
        vec!["check-sos", "1", "--vars", "X1,X1"],
        vec!["refute-conjugation", F],
        vec!["check-sos", "1", "--json", "--text"],
    ] {
        let out = ncsos(&args);
        assert_eq!(out.code, EXIT_USAGE, "{args:?}: {out:?}");
        assert!(!out.stderr.is_empty());
    }
    assert_eq!(ncsos(&["--help"]).code, EXIT_OK);
}

#[test]
fn refute_conjugation_reports() {
    let out = ncsos(&["refute-conjugation", F, "--gs", "1"]);
    assert_eq!(out.code, EXIT_OK);
    assert!(out.stdout.contains("witness X1X2, coefficient -1"), "{}", out.stdout);
    assert!(out.stdout.ends_with("1/1 refuted\n"));

    let out = ncsos(&["refute-conjugation", F, "--random", "3", "3", "200", "--seed", "7"]);
    assert_eq!(out.code, EXIT_OK);
    assert!(out.stdout.ends_with("200/200 refuted\n"));

    let out = ncsos(&["refute-conjugation", H, "--vars", "X'", "--gs", "X'", "--json"]);
    assert_eq!(out.code, EXIT_OK);
    let j = json_of(&out);
    assert_eq!(j["refuted"], 1);
    assert_eq!(j["tuples"][0]["kind"], "NegativeTopDiagonal");
}

#[test]
fn missing_obstruction_is_a_contract_violation() {
    // a genuine square has no top-degree obstruction
    let out = ncsos(&["refute-conjugation", "1 + X1*X1", "--gs", "X2"]);
    assert_eq!(out.code, EXIT_CONTRACT, "{out:?}");
    assert!(out.stdout.contains("NOT refuted, gs = [X2]"));
    assert!(out.stdout.ends_with("0/1 refuted\n"));
    assert_eq!(ncsos(&["refute-conjugation", F, "--gs", "0"]).code, EXIT_USAGE);
}

#[test]
fn eval_on_the_hand_example() {
    let a = r#"{"n":2,"entries":[0,1,1,0]}"#;
    let b = r#"{"n":2,"entries":[0,0,0,1]}"#;
    let out = ncsos(&["eval", F, "--mat", a, "--mat", b, "--json"]);
    assert_eq!(out.code, EXIT_OK, "{out:?}");
    let j = json_of(&out);
    assert_eq!(j["matrix"]["entries"], serde_json::json!([2.0, 0.0, 0.0, 0.0]));
    assert_eq!(j["nsd"], false);
    assert_eq!(j["witness"]["value"], 2.0);

    let bad = ncsos(&["eval", F, "--mat", a]);
    assert_eq!(bad.code, EXIT_USAGE);
}

#[test]
fn gram_of_f() {
    let out = ncsos(&["gram", F, "--json"]);
    assert_eq!(out.code, EXIT_OK);
    let j = json_of(&out);
    assert_eq!(j["mode"], "exact");
    let basis: Vec<&str> = j["basis"].as_array().unwrap().iter().map(|b| b.as_str().unwrap()).collect();
    assert_eq!(basis, ["1", "X1", "X2", "X1*X1", "X1*X2", "X2*X1", "X2*X2"]);
    let nonzero = j["entries"].as_array().unwrap().iter().filter(|e| e.as_str() != Some("0")).count();
    assert_eq!(nonzero, 3);
}

#[test]
fn shift_demo_vectors() {
    let out = ncsos(&["shift-demo", "--n", "5", "--vector", "0,1,0,0,0", "--json"]);
    assert_eq!(out.code, EXIT_OK, "{out:?}");
    assert_eq!(json_of(&out)["shift"][0]["vector_value"], "-2");
    let out = ncsos(&["shift-demo", "--n", "6", "--vector", "0,1,0,1,0,0"]);
    assert!(out.stdout.contains("vector: -8"), "{}", out.stdout);
    let out = ncsos(&["shift-demo", "--n", "5", "--vector", "0,0,0,0,1"]);
    assert_eq!(out.code, EXIT_USAGE);
    assert!(out.stderr.contains("last coordinate"));
    assert_eq!(ncsos(&["shift-demo", "--n", "1"]).code, EXIT_USAGE);
}

#[test]
fn paper_demo_scalar_stage() {
    let out = ncsos(&["paper-demo", "--dims", "1", "--samples", "10"]);
    assert_eq!(out.code, EXIT_OK, "{}", out.stdout);
    assert!(out.stdout.contains("n = 1: f(a, b) = 1 for all 10 scalar pairs"));
    assert!(out.stdout.contains("witness X1X2, coefficient -1"));
}

#[test]
fn paper_demo_seeds_agree_on_verdicts() {
    let mut verdicts = Vec::new();
    let mut data = Vec::new();
    for seed in 1..=5 {
        let seed = seed.to_string();
        let out = ncsos(&["paper-demo", "--seed", &seed, "--samples", "10", "--json"]);
        assert_eq!(out.code, EXIT_OK);
        let j = json_of(&out);
        let stages = j["stages"].as_array().unwrap();
        verdicts.push(stages.iter().map(|s| (s["name"].clone(), s["passed"].clone())).collect::<Vec<_>>());
        data.push(stages[2]["data"].clone());
    }
    assert!(verdicts.windows(2).all(|w| w[0] == w[1]));
    assert!(data.windows(2).all(|w| w[0] != w[1]), "different seeds should draw different matrices");
}

#[test]
fn output_is_byte_stable() {
    let a = ncsos(&["paper-demo", "--json", "--seed", "3"]);
    let b = ncsos(&["paper-demo", "--json", "--seed", "3"]);
    assert_eq!(a, b);
}

#[test]
fn out_flag_writes_the_report() {
    let dir = std::env::temp_dir().join(format!("ncsos-cli-test-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("report.json");
    let out = ncsos(&["check-sos", F, "--json", "--out", path.to_str().unwrap()]);
    assert_eq!(out.code, EXIT_NOT_SOS);
    assert!(out.stdout.is_empty());
    let written = std::fs::read_to_string(&path).unwrap();
    assert!(written.contains("\"witness_word\": \"X1X2\""));
    std::fs::remove_dir_all(&dir).ok();
}
