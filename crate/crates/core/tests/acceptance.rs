//! Acceptance suite: one line per criterion, non-zero exit if any fails.

mod common;

use std::time::{Duration, Instant};

use suffice::corpus::{gen_corpus, CorpusLimits};
use suffice::estimators::{intersect_params, is_valid_level0, saturate, truth_by_estimator, Estimator, NotionParams};
use suffice::experiment::{self, closure_violations, ExperimentConfig, ExperimentKind, Report, CLOSURE_SAMPLES};
use suffice::fastgrow::{decode_levelk, encode_levelk, EndMarker, LevelKSeq, Nested};
use suffice::rate::Rate;

const SEED: u64 = 1;

struct Verdict {
    pass: bool,
    detail: String,
}

fn check(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict { pass, detail: detail.into() }
}

fn within(t: Instant, limit: u64) -> (bool, String) {
    let e = t.elapsed();
    (e < Duration::from_secs(limit), format!("{:.1}s of {limit}s", e.as_secs_f64()))
}

fn config(kind: ExperimentKind) -> ExperimentConfig {
    let mut c = ExperimentConfig::new(kind);
    c.seed = SEED;
    c
}

fn failures(r: &Report) -> String {
    let bad: Vec<&str> = r.cases.iter().filter(|c| !c.agree).map(|c| c.id.as_str()).take(5).collect();
    if bad.is_empty() {
        String::new()
    } else {
        format!(", first disagreements {bad:?}")
    }
}

fn estimator_truth() -> Verdict {
    let t = Instant::now();
    let r = experiment::run(&config(ExperimentKind::EstimatorTruth)).expect("run");
    let generated = r.cases.iter().filter(|c| c.id.starts_with('g')).count();
    let hand = r.cases.iter().filter(|c| c.id.starts_with('h')).count();
    let exact = r.cases.iter().filter(|c| c.verdict == c.oracle).count();
    let (fast, time) = within(t, 60);
    check(
        generated >= 50 && hand >= 10 && exact == r.cases.len() && fast,
        format!("{exact}/{} agree ({generated} generated, {hand} hand-written), {time}", r.cases.len()),
    )
}

fn stabilization() -> Verdict {
    let t = Instant::now();
    let r = experiment::run(&config(ExperimentKind::StabilizationSweep)).expect("run");
    let settled = r.cases.iter().filter(|c| {
        let from = c.stabilization_index.unwrap_or(usize::MAX);
        let want = if c.oracle == "true" { 'T' } else { 'F' };
        c.agree && c.verdict.chars().skip(from).all(|v| v == want)
    });
    let n = settled.count();
    let (fast, time) = within(t, 120);
    let max = r.summary.thresholds.values().max().copied().unwrap_or(0);
    check(
        n == r.cases.len() && fast,
        format!("{n}/{} sweeps settle on the brute-force truth, largest index {max}, {time}{}", r.cases.len(), failures(&r)),
    )
}

fn closure() -> Verdict {
    let c = config(ExperimentKind::EstimatorTruth);
    let p = c.notion_params().expect("params");
    let corpus = c.load_corpus().expect("corpus");
    let mut violations = 0;
    let mut checked = 0;
    for (i, e) in corpus.iter().enumerate() {
        let sat = saturate(&e.sentence, &p, None).expect("saturate");
        if sat.level() > 0 {
            checked += 1;
        }
        violations += closure_violations(&e.sentence, &sat, &p, CLOSURE_SAMPLES, 1000 + i as u64).expect("closure");
    }
    check(violations == 0, format!("{violations} violations, {CLOSURE_SAMPLES} additions to each of {checked} estimators"))
}

fn intersection() -> Verdict {
    let p = NotionParams::new(3, Rate::linear(2)).unwrap();
    let q = NotionParams::new(5, Rate::Poly(vec![1, 0, 1])).unwrap();
    let pq = intersect_params(&p, &q);
    let mut pairs = 0;
    let mut bad_pairs = 0;
    for a in 0..=64u64 {
        for b in a + 1..=64 {
            let e = Estimator::pair(a, b).unwrap();
            let both = is_valid_level0(&e, &p).unwrap() && is_valid_level0(&e, &q).unwrap();
            pairs += 1;
            if is_valid_level0(&e, &pq).unwrap() != both {
                bad_pairs += 1;
            }
        }
    }
    let corpus = gen_corpus(SEED, 50, CorpusLimits::default()).expect("corpus");
    let mut bad_verdicts = 0;
    for e in &corpus {
        let v = |params: &NotionParams| {
            let sat = saturate(&e.sentence, params, None).expect("saturate");
            truth_by_estimator(&e.sentence, &sat).expect("truth")
        };
        let (vp, vq, vpq) = (v(&p), v(&q), v(&pq));
        if !(vp == vq && vpq == vp) {
            bad_verdicts += 1;
        }
    }
    check(
        bad_pairs == 0 && bad_verdicts == 0,
        format!(
            "{bad_pairs}/{pairs} membership mismatches, {bad_verdicts}/{} verdict mismatches",
            corpus.len()
        ),
    )
}

fn well_foundedness() -> Verdict {
    let t = Instant::now();
    let mut c = config(ExperimentKind::WfSweep);
    c.wf.relations = vec!["pred@2".into(), "succ@0".into(), "omega2@1".into()];
    c.wf.random_dags = 100;
    c.wf.random_cyclic = 100;
    c.wf.rates = vec!["lin(2)".into(), "sq".into(), "exp2".into()];
    c.wf.min_len = 4;
    c.wf.max_len = 32;
    let r = experiment::run(&c).expect("run");
    let unsound = r.cases.iter().filter(|c| c.detail.contains("unsound=true")).count();
    let unsettled = r.cases.iter().filter(|c| c.stabilization_index.is_none()).count();
    let regress = r.cases.iter().filter(|c| c.detail.contains("wf_lost=true")).count();
    let ill_flips = r
        .cases
        .iter()
        .filter(|c| c.oracle == "ill_founded" && !c.detail.contains("evidence_to_wf_flips=0"))
        .count();
    let wf_growing =
        r.cases.iter().filter(|c| c.oracle == "well_founded" && !c.detail.contains("evidence_to_wf_flips=0")).count();
    let (fast, time) = within(t, 120);
    check(
        r.all_agree() && unsound == 0 && unsettled == 0 && regress == 0 && ill_flips == 0 && fast,
        format!(
            "{} inputs: {unsound} ill-founded reported well-founded, {unsettled} never settle, {ill_flips} evidence flips on ill-founded inputs, {regress} well-founded verdicts lost ({wf_growing} well-founded inputs need a longer A before the search clears), {time}",
            r.cases.len()
        ),
    )
}

fn encoding() -> Verdict {
    let leaf = |v: &[u64]| Nested::Leaf(v.to_vec());
    let example = Nested::Node(vec![
        Nested::Node(vec![leaf(&[1, 2, 3]), leaf(&[4, 5, 6, 7])]),
        Nested::Node(vec![leaf(&[10, 11]), leaf(&[12, 13, 14])]),
    ]);
    let s = LevelKSeq::new(example, None).unwrap();
    let g = encode_levelk(&s, EndMarker::Terminal).unwrap();
    let worked = g == [0, 1, 1, 2, 1, 1, 1, 3, 0, 0, 1, 2, 1, 1, 4];
    let mut round = 0;
    for seed in 0..100 {
        let s = common::random_levelk(seed);
        let g = encode_levelk(&s, EndMarker::Terminal).unwrap();
        if decode_levelk(&g, s.k, EndMarker::Terminal).map(|d| d.tree == s.tree).unwrap_or(false) {
            round += 1;
        }
    }
    check(worked && round == 100, format!("worked example {g:?}, {round}/100 random shapes round-trip"))
}

fn games(families: &[&str]) -> Report {
    let mut c = config(ExperimentKind::GameFamily);
    c.games.families = families.iter().map(|s| s.to_string()).collect();
    experiment::run(&c).expect("run")
}

fn solver_soundness() -> Verdict {
    let r = games(&["random", "sigma20", "priority", "estimator"]);
    let mut per = Vec::new();
    let mut ok = r.all_agree();
    for f in ["random", "sigma20", "priority", "estimator"] {
        let n = r.cases.iter().filter(|c| c.family == f).count();
        ok &= n >= 50;
        per.push(format!("{f} {n}"));
    }
    let bad = r.cases.len() - r.summary.agreements;
    check(ok, format!("{bad} disagreements over {} games ({}){}", r.cases.len(), per.join(", "), failures(&r)))
}

fn determinacy() -> Verdict {
    let r = games(&["determinacy"]);
    let draw = "draw";
    let wb: Vec<_> = r.cases.iter().filter(|c| c.oracle == "well_behaved").collect();
    let wb_draws = wb.iter().filter(|c| c.verdict == draw).count();
    let control_draws = r.cases.iter().filter(|c| c.oracle == "not_well_behaved" && c.verdict == draw).count();
    check(
        wb.len() >= 10 && wb_draws == 0 && control_draws >= 1 && r.all_agree(),
        format!("{} well-behaved predicates, {wb_draws} drawn; {control_draws} negative control drawn", wb.len()),
    )
}

fn bounded_games() -> Verdict {
    let t = Instant::now();
    let r = games(&["sigma20_grid", "parity"]);
    let grid: Vec<_> = r.cases.iter().filter(|c| c.family == "sigma20_grid").collect();
    let arenas: Vec<_> = r.cases.iter().filter(|c| c.family == "parity").collect();
    let sigma_ok = grid.iter().filter(|c| c.agree).count();
    let parity_ok = arenas.iter().filter(|c| c.agree).count();
    let threshold = r.summary.thresholds.get("sigma20_grid.max_stabilization_index").copied().unwrap_or(0);
    let (fast, time) = within(t, 60);
    check(
        sigma_ok == grid.len() && parity_ok == arenas.len() && !grid.is_empty() && !arenas.is_empty() && fast,
        format!(
            "sigma20 {sigma_ok}/{} settle on the unbounded winner (latest at margin index {threshold}), priority {parity_ok}/{} arenas match the parity solver, {time}",
            grid.len(),
            arenas.len()
        ),
    )
}

fn reproducibility() -> Verdict {
    let dir = tempfile::tempdir().unwrap();
    let kinds = [
        ExperimentKind::EstimatorTruth,
        ExperimentKind::StabilizationSweep,
        ExperimentKind::WfSweep,
        ExperimentKind::JumpTower,
        ExperimentKind::GameFamily,
    ];
    let mut same = 0;
    for kind in kinds {
        let mut bytes = Vec::new();
        for run in 0..2 {
            let mut c = config(kind);
            let path = dir.path().join(format!("{}-{run}.csv", kind.name()));
            c.output.csv = Some(path.clone());
            experiment::run(&c).expect("run").write(&c.output).expect("write");
            bytes.push(std::fs::read(path).unwrap());
        }
        if bytes[0] == bytes[1] && !bytes[0].is_empty() {
            same += 1;
        }
    }
    check(same == kinds.len(), format!("{same}/{} experiment kinds give byte-identical CSV", kinds.len()))
}

fn main() {
    let criteria: [(&str, fn() -> Verdict); 10] = [
        ("estimator truth", estimator_truth),
        ("stabilization", stabilization),
        ("closure robustness", closure),
        ("intersection", intersection),
        ("well-foundedness", well_foundedness),
        ("level-k encoding", encoding),
        ("game solver soundness", solver_soundness),
        ("estimator-game determinacy", determinacy),
        ("bounded and priority games", bounded_games),
        ("reproducibility", reproducibility),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        if !filter.is_empty() && !filter.iter().any(|x| name.contains(x.as_str())) {
            continue;
        }
        let v = f();
        println!("criterion {:2} {:<28} {}  {}", i + 1, name, if v.pass { "PASS" } else { "FAIL" }, v.detail);
        failed += usize::from(!v.pass);
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
