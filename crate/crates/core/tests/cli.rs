use std::process::Command;

fn suffice(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_suffice")).args(args).output().expect("binary runs");
    (
        out.status.code().unwrap_or(-1),
        String::from_utf8_lossy(&out.stdout).into_owned(),
        String::from_utf8_lossy(&out.stderr).into_owned(),
    )
}

#[test]
fn eval_reports_both_truths() {
    let (code, out, _) = suffice(&["eval", "EX X. AA y. X(0)", "{L0(0,2),L0(5,9)}"]);
    assert_eq!(code, 0);
    assert!(out.contains("estimator: true"), "{out}");
    assert!(out.contains("brute:     true"), "{out}");
}

#[test]
fn saturate_and_sweep() {
    let (code, out, _) = suffice(&["saturate", "AA X. EX Y. AA y. X(0) <-> Y(0)", "--rate", "sq", "--a-min", "2"]);
    assert_eq!(code, 0);
    assert!(out.contains("verdict: true"), "{out}");
    let (code, out, _) = suffice(&["sweep", "EX X. AA y. X(0) & !X(0)"]);
    assert_eq!(code, 0);
    assert!(out.contains("[false, false, false, false, false, false, false]"), "{out}");
}

#[test]
fn wf_jump_and_games() {
    let (code, out, _) = suffice(&["wf", "succ@0", "--len", "6"]);
    assert_eq!(code, 0);
    assert!(out.contains("IllFoundedEvidence"), "{out}");
    let (code, out, _) = suffice(&["jump", "--level", "2"]);
    assert_eq!(code, 0);
    assert!(out.lines().count() > 5);
    let (code, out, _) = suffice(&["game", "priority", "--seed", "3", "--states", "3"]);
    assert_eq!(code, 0);
    let winners: Vec<&str> = out.lines().filter(|l| l.contains("winner")).map(|l| l.rsplit(' ').next().unwrap()).collect();
    assert_eq!(winners.len(), 2);
    assert_eq!(winners[0], winners[1]);
    let (code, out, _) = suffice(&["game", "estimator", "min_a_parity", "--bitlen", "2"]);
    assert_eq!(code, 0);
    assert!(out.contains("value: Draw"), "{out}");
    let (code, _, err) = suffice(&["game", "estimator", "nope"]);
    assert_eq!(code, 1);
    assert!(err.contains("unknown predicate"));
}

#[test]
fn corpus_is_stable() {
    let (_, a, _) = suffice(&["corpus", "--seed", "5", "--count", "10"]);
    let (_, b, _) = suffice(&["corpus", "--seed", "5", "--count", "10"]);
    assert_eq!(a, b);
    assert!(a.lines().count() >= 24);
}

#[test]
fn run_writes_reports_and_applies_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.toml");
    std::fs::write(&cfg, "kind = \"estimator_truth\"\n[corpus]\ngenerated = 5\n").unwrap();
    let out = dir.path().join("out");
    let (code, stdout, _) = suffice(&["run", "--config", cfg.to_str().unwrap(), "--seed", "9", "--out", out.to_str().unwrap()]);
    assert_eq!(code, 0, "{stdout}");
    let json: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    assert_eq!(json["summary"]["seed"], 9);
    assert_eq!(json["summary"]["agreement_rate"], 1.0);
    let csv = std::fs::read_to_string(out.join("cases.csv")).unwrap();
    assert!(csv.starts_with("id,family,input,verdict,oracle,agree"));
    assert!(!csv.contains("micros"));
}

#[test]
fn config_errors_name_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.toml");
    std::fs::write(&cfg, "kind = \"estimator_truth\"\n[corpus]\nsentences = [\"AA y. y>=1\", \"AA y. y%0=0\"]\n").unwrap();
    let (code, _, err) = suffice(&["run", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code, 1);
    assert!(err.contains("corpus.sentences[1]"), "{err}");
    std::fs::write(&cfg, "kind = \"estimator_truth\"\n").unwrap();
    let (code, _, err) = suffice(&["run", "--config", cfg.to_str().unwrap(), "--budget", "max_cats=1"]);
    assert_eq!(code, 1);
    assert!(err.contains("budget.max_cats"), "{err}");
}

#[test]
fn budget_exhaustion_flushes_partial_results() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.toml");
    std::fs::write(&cfg, "kind = \"game_family\"\n[games]\nfamilies = [\"random\"]\ninstances = 5\n").unwrap();
    let out = dir.path().join("out");
    let (code, _, _) =
        suffice(&["run", "--config", cfg.to_str().unwrap(), "--budget", "max_nodes=20", "--out", out.to_str().unwrap()]);
    assert_eq!(code, 3);
    let json: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    assert_eq!(json["summary"]["status"], "budget_exhausted");
}
