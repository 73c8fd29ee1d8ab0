//! Case expansion and evaluation for each experiment kind.

use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{AMin, CaseRecord, ExperimentConfig};
use crate::corpus::CorpusEntry;
use crate::error::{Error, Result};
use crate::estimators::{
    random_valid, repair, saturate, stabilization_sweep, truth_by_estimator, CoverRule, Estimator, NotionParams,
    TailShape,
};
use crate::fastgrow::{make_fastseq, Variant};
use crate::games::{
    affine_timeouts, ambient_estimator, build_estimator_game, build_priority_game, build_sigma20_game,
    check_well_behaved, classify_plays, negative_control, random_arena, solve, solve_priority,
    well_behaved_corpus, Arena, GameSpec, Outcome, Parity, Phi, Player, PriorityGameSpec,
};
use crate::oracles::{enumeration_value, graph_wf_oracle, jump_table, parity_winner};
use crate::rate::Rate;
use crate::wellfounded::{
    bounded_wf_search, jump_tower_eval, machine_catalog, GroundTruth, RelationKind, RelationSpec, Truth,
};

pub(super) type Cases = Vec<Result<CaseRecord>>;

/// Random sub-estimators added to each saturated estimator.
pub const CLOSURE_SAMPLES: usize = 20;

const ENUMERATION_CAP: u128 = 1 << 100;

fn record(id: String, family: &str, input: String) -> CaseRecord {
    CaseRecord {
        id,
        family: family.into(),
        input,
        verdict: String::new(),
        oracle: String::new(),
        agree: false,
        stabilization_index: None,
        detail: String::new(),
        config_hash: String::new(),
        micros: 0,
    }
}

fn timed(f: impl FnOnce() -> Result<CaseRecord>) -> Result<CaseRecord> {
    let t = Instant::now();
    let mut r = f()?;
    r.micros = t.elapsed().as_micros() as u64;
    Ok(r)
}

fn par_map<T: Sync>(items: &[T], f: impl Fn(usize, &T) -> Result<CaseRecord> + Sync + Send) -> Cases {
    let mut out: Cases = items.par_iter().enumerate().map(|(i, x)| timed(|| f(i, x))).collect();
    out.sort_by(|a, b| match (a, b) {
        (Ok(a), Ok(b)) => a.id.cmp(&b.id),
        _ => std::cmp::Ordering::Equal,
    });
    out
}

fn case_seed(seed: u64, i: usize) -> u64 {
    seed.wrapping_mul(0x9e37_79b9_7f4a_7c15).wrapping_add(i as u64)
}

fn bools(v: &[bool]) -> String {
    v.iter().map(|&b| if b { 'T' } else { 'F' }).collect()
}

/// Number of random valid sub-estimators whose addition changes the verdict.
pub fn closure_violations(
    s: &crate::formulas::Sentence,
    e: &Estimator,
    p: &NotionParams,
    samples: usize,
    seed: u64,
) -> Result<usize> {
    let n = e.level();
    if n == 0 {
        return Ok(0);
    }
    let v = truth_by_estimator(s, e)?;
    let tail = TailShape::of(s.matrix());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut bad = 0;
    for _ in 0..samples {
        let x = repair(random_valid(p, n - 1, &mut rng)?, p, tail)?;
        if truth_by_estimator(s, &e.add_element(x)?)? != v {
            bad += 1;
        }
    }
    Ok(bad)
}

pub(super) fn estimator_truth(c: &ExperimentConfig) -> Result<Cases> {
    let corpus = c.load_corpus()?;
    let p = c.notion_params()?;
    Ok(par_map(&corpus, |i, entry: &CorpusEntry| {
        let mut r = record(entry.id.clone(), "estimator_truth", entry.sentence.to_string());
        let e = saturate(&entry.sentence, &p, None)?;
        let v = truth_by_estimator(&entry.sentence, &e)?;
        let bad = closure_violations(&entry.sentence, &e, &p, CLOSURE_SAMPLES, case_seed(c.seed, i))?;
        r.verdict = v.to_string();
        r.oracle = entry.truth.to_string();
        r.agree = v == entry.truth && bad == 0;
        r.detail = format!("nodes={} closure_violations={bad}", e.node_count());
        Ok(r)
    }))
}

fn schedule(c: &ExperimentConfig, a_min: u64) -> Result<Vec<NotionParams>> {
    let cover: Vec<CoverRule> = c.params.cover.iter().map(|&m| CoverRule { min_elements: m }).collect();
    c.sweep
        .multipliers
        .iter()
        .map(|&m| {
            let mut p = NotionParams::new(a_min, Rate::linear(m))?.with_cover(cover.clone());
            p.max_natural = c.budget.max_natural;
            p.max_iterations = c.budget.max_iterations;
            Ok(p)
        })
        .collect()
}

pub(super) fn stabilization(c: &ExperimentConfig) -> Result<Cases> {
    let corpus = c.load_corpus()?;
    let items: Vec<(&CorpusEntry, usize, &AMin)> = corpus
        .iter()
        .flat_map(|e| c.sweep.a_min.iter().enumerate().map(move |(j, a)| (e, j, a)))
        .collect();
    Ok(par_map(&items, |_, &(entry, j, a)| {
        let a_min = match a {
            AMin::Fixed(v) => *v,
            AMin::Named(_) => entry.sentence.size(),
        };
        let mut r = record(format!("{}-a{j}", entry.id), "stabilization_sweep", entry.sentence.to_string());
        let res = stabilization_sweep(&entry.sentence, &schedule(c, a_min)?)?;
        r.verdict = bools(&res.verdicts);
        r.oracle = entry.truth.to_string();
        r.agree = res.final_verdict() == Some(entry.truth);
        r.stabilization_index = Some(res.stabilization_index);
        r.detail = format!("a_min={a_min}");
        Ok(r)
    }))
}

/// The longest prefix, up to `max_len`, of the minimal plain sequence for
/// `rate` that stays below `cap`.
pub fn wf_grid_sequences(rate: &Rate, max_len: usize, cap: u64) -> Result<Vec<u64>> {
    let mut s = make_fastseq(rate, 1, Variant::Plain, 1, cap)?;
    while s.len() < max_len {
        match s.extend(1, cap) {
            Ok(()) => {}
            Err(Error::Overflow { .. }) => break,
            Err(e) => return Err(e),
        }
    }
    Ok(s.values)
}

fn wf_oracle(r: &RelationSpec, start: u64) -> Result<GroundTruth> {
    match &r.kind {
        RelationKind::Graph { adj } => graph_wf_oracle(adj, start),
        _ => Ok(r.ground_truth(start)),
    }
}

pub(super) fn wf_sweep(c: &ExperimentConfig) -> Result<Cases> {
    let w = &c.wf;
    let mut inputs: Vec<(String, RelationSpec, u64)> = Vec::new();
    for (i, text) in w.relations.iter().enumerate() {
        let (r, start) = super::parse_relation(text)?;
        inputs.push((format!("cat-{i:03}"), r, start));
    }
    for i in 0..w.random_dags {
        let r = RelationSpec::random_dag(case_seed(c.seed, i), w.graph_nodes, w.density)?;
        inputs.push((format!("dag-{i:03}"), r, w.graph_nodes as u64 - 1));
    }
    for i in 0..w.random_cyclic {
        let r = RelationSpec::random_cyclic(case_seed(c.seed, i), w.graph_nodes, w.density)?;
        inputs.push((format!("cyc-{i:03}"), r, w.graph_nodes as u64 - 1));
    }
    let mut grid = Vec::new();
    for text in &w.rates {
        let rate: Rate = text.parse()?;
        let seq = wf_grid_sequences(&rate, w.max_len, c.budget.max_natural)?;
        grid.push((text.clone(), seq));
    }
    Ok(par_map(&inputs, |_, (id, r, start)| {
        let truth = wf_oracle(r, *start)?;
        let ill = truth.status == Truth::IllFounded;
        let mut r_out = record(id.clone(), "wf_sweep", format!("{}@{start}", r.name));
        let mut parts = Vec::new();
        let (mut unsound, mut lost_wf, mut literal_flips) = (false, false, 0usize);
        let mut reached: Option<usize> = None;
        for (name, seq) in &grid {
            if seq.len() < w.min_len {
                parts.push(format!("{name}:-"));
                continue;
            }
            let verdicts: Vec<bool> =
                (w.min_len..=seq.len()).map(|l| bounded_wf_search(r, *start, &seq[..l]).is_well_founded()).collect();
            unsound |= ill && verdicts.iter().any(|&v| v);
            lost_wf |= verdicts.windows(2).any(|p| p[0] && !p[1]);
            literal_flips += verdicts.windows(2).filter(|p| !p[0] && p[1]).count();
            let last = *verdicts.last().unwrap();
            if last != ill {
                let from = verdicts.iter().rposition(|&v| v != last).map_or(0, |i| i + 1);
                let len = w.min_len + from;
                reached = Some(reached.map_or(len, |x: usize| x.min(len)));
            }
            parts.push(format!("{name}:{}", verdicts.iter().map(|&v| if v { 'W' } else { 'I' }).collect::<String>()));
        }
        r_out.verdict = parts.join(";");
        r_out.oracle = match truth.status {
            Truth::WellFounded => "well_founded".into(),
            Truth::IllFounded => "ill_founded".into(),
        };
        r_out.agree = !unsound && !lost_wf && reached.is_some();
        r_out.stabilization_index = reached;
        r_out.detail = format!(
            "rank={} unsound={unsound} wf_lost={lost_wf} evidence_to_wf_flips={literal_flips}",
            truth.rank.map_or("-".into(), |x| x.to_string())
        );
        Ok(r_out)
    }))
}

pub(super) fn jump_tower(c: &ExperimentConfig) -> Result<Cases> {
    let rate: Rate = c.jump.rate.parse()?;
    let machines = machine_catalog();
    let items: Vec<(u64, u32)> =
        c.jump.margins.iter().flat_map(|&m| (0..=c.jump.max_level).map(move |l| (m, l))).collect();
    Ok(par_map(&items, |_, &(margin, level)| {
        let a = make_fastseq(&rate, machines.len(), Variant::Plain, margin, c.budget.max_natural)?.values;
        let mut r = record(format!("m{margin:03}-l{level}"), "jump_tower", format!("{} margin {margin} level {level}", c.jump.rate));
        let lazy = (0..machines.len()).map(|n| jump_tower_eval(level, &machines, n, &a)).collect::<Result<Vec<_>>>()?;
        let eager = jump_table(level, &machines, &a)?;
        r.verdict = bools(&lazy);
        r.oracle = bools(&eager);
        r.agree = lazy == eager;
        Ok(r)
    }))
}

/// Bounds `g(i) = i + margin`: the minimal monotone sequence over `x + 1`
/// shifted by `margin - 1`.
pub fn sigma20_bounds(margin: u64, len: usize) -> Result<Vec<u64>> {
    Ok(make_fastseq(&Rate::Poly(vec![1, 1]), len, Variant::Monotone, margin, u64::MAX)?.values)
}

/// Timeout gaps `(c1, c2)` and horizon for an arena at `scale`:
/// `c1 = scale·|V|`, `c2 = c1·(|V| + 1) + 1`, horizon `4·c2`.
pub fn priority_gaps(states: usize, scale: u64) -> (u64, u64, u32) {
    let n = states as u64;
    let c1 = scale * n;
    let c2 = c1 * (n + 1) + 1;
    (c1, c2, (4 * c2) as u32)
}

pub fn priority_spec(arena: Arena, start: usize, first_wants: Parity, scale: u64) -> Result<PriorityGameSpec> {
    let (c1, c2, horizon) = priority_gaps(arena.len(), scale);
    let timeouts = affine_timeouts(&[c1, c2], horizon as usize + 1)?.into_iter().map(|s| s.values).collect();
    Ok(PriorityGameSpec { arena, k: 2, timeouts, start, horizon, first_wants })
}

fn outcome_name(o: Outcome) -> &'static str {
    match o {
        Outcome::FirstWins => "first",
        Outcome::SecondWins => "second",
        Outcome::Draw => "draw",
    }
}

fn player_char(p: Player) -> char {
    match p {
        Player::First => '1',
        Player::Second => '2',
    }
}

fn soundness_row<G: crate::games::Game>(id: String, family: &str, input: String, g: &G, max_nodes: usize) -> Result<CaseRecord> {
    let mut r = record(id, family, input);
    let sol = solve(g, max_nodes)?;
    let o = enumeration_value(g, ENUMERATION_CAP)?;
    r.verdict = outcome_name(sol.value).into();
    r.oracle = outcome_name(o).into();
    r.agree = sol.value == o;
    r.detail = format!("nodes={}", sol.nodes);
    Ok(r)
}

pub(super) fn game_family(c: &ExperimentConfig) -> Result<Cases> {
    let g = &c.games;
    let nodes = c.budget.max_nodes;
    let mut out: Cases = Vec::new();
    let idx: Vec<usize> = (0..g.instances).collect();
    let phis = Phi::catalog();
    for family in &g.families {
        let cases = match family.as_str() {
            "random" => par_map(&idx, |i, _| {
                let game = GameSpec::random(case_seed(c.seed, i), g.plies, g.branching)?;
                soundness_row(format!("random-{i:04}"), "random", format!("seed {}", case_seed(c.seed, i)), &game, nodes)
            }),
            "sigma20" => par_map(&idx, |i, _| {
                let phi = phis[i % phis.len()];
                let horizon = (g.plies / 2).max(1);
                let margin = 1 << (i / phis.len() % 4);
                let bounds = sigma20_bounds(margin, 2 * horizon)?;
                let game = build_sigma20_game(phi, &bounds, horizon, g.branching as u64)?;
                let input = format!("{} horizon {horizon} margin {margin}", phi.name());
                soundness_row(format!("sigma20-{i:04}"), "sigma20", input, &game, nodes)
            }),
            "priority" => par_map(&idx, |i, _| {
                let seed = case_seed(c.seed, i);
                let states = 1 + i % 4;
                let arena = random_arena(seed, states, 2, g.branching)?;
                let timeouts = affine_timeouts(&[1, 2], g.plies + 1)?.into_iter().map(|s| s.values).collect();
                let spec = PriorityGameSpec {
                    arena,
                    k: 2,
                    timeouts,
                    start: 0,
                    horizon: g.plies as u32,
                    first_wants: if i % 2 == 0 { Parity::Even } else { Parity::Odd },
                };
                let game = build_priority_game(spec)?;
                soundness_row(format!("priority-{i:04}"), "priority", format!("arena seed {seed} states {states}"), &game, nodes)
            }),
            "estimator" => {
                let mut preds = well_behaved_corpus(4);
                preds.push(negative_control());
                par_map(&idx, |i, _| {
                    let (name, p) = &preds[i % preds.len()];
                    let s = ambient_estimator(p.goodness_bound())?;
                    let bitlen = (g.plies / 2).max(1);
                    let game = build_estimator_game(p, &s, bitlen)?;
                    soundness_row(format!("estimator-{i:04}"), "estimator", format!("{name} bitlen {bitlen}"), &game, nodes)
                })
            }
            "sigma20_grid" => sigma20_grid(c, &phis)?,
            "parity" => parity_grid(c)?,
            "determinacy" => determinacy(c)?,
            other => return Err(Error::config("games.families", format!("unknown family `{other}`"))),
        };
        out.extend(cases);
    }
    Ok(out)
}

fn sigma20_grid(c: &ExperimentConfig, _catalog: &[Phi]) -> Result<Cases> {
    let g = &c.games;
    let phis: Vec<Phi> = g.sigma20_phis.iter().map(|p| p.parse()).collect::<Result<_>>()?;
    let items: Vec<(Phi, usize)> = phis.iter().flat_map(|&p| g.sigma20_horizons.iter().map(move |&h| (p, h))).collect();
    let cap = crate::games::DEFAULT_MOVE_CAP;
    Ok(par_map(&items, |_, &(phi, horizon)| {
        let mut r = record(format!("sigma20grid-{}-h{horizon:02}", phi.name()), "sigma20_grid", format!("{} horizon {horizon}", phi.name()));
        let mut winners = Vec::new();
        for &m in &g.sigma20_margins {
            let game = build_sigma20_game(phi, &sigma20_bounds(m, 2 * horizon)?, horizon, cap)?;
            winners.push(solve(&game, c.budget.max_nodes)?.value);
        }
        // Past cap and horizon + 1 the bounds no longer restrict either player.
        let limit = build_sigma20_game(phi, &sigma20_bounds(cap + horizon as u64 + 2, 2 * horizon)?, horizon, cap)?;
        let oracle = enumeration_value(&limit, ENUMERATION_CAP)?;
        let last = *winners.last().unwrap();
        let from = winners.iter().rposition(|&w| w != last).map_or(0, |i| i + 1);
        r.verdict = winners.iter().map(|&w| outcome_name(w)).collect::<Vec<_>>().join(",");
        r.oracle = outcome_name(oracle).into();
        r.agree = last == oracle;
        r.stabilization_index = Some(from);
        r.detail = format!("threshold_margin={}", g.sigma20_margins[from]);
        Ok(r)
    }))
}

/// Parity arena for case `i`: up to `max_states` states, priorities 0..=2.
pub fn grid_arena(seed: u64, i: usize, max_states: usize) -> Result<(Arena, Parity)> {
    let states = 1 + i % max_states;
    let arena = random_arena(case_seed(seed, i), states, 2, 3)?;
    let wants = if i % 3 == 0 { Parity::Odd } else { Parity::Even };
    Ok((arena, wants))
}

fn parity_grid(c: &ExperimentConfig) -> Result<Cases> {
    let g = &c.games;
    let idx: Vec<usize> = (0..g.arenas).collect();
    Ok(par_map(&idx, |i, _| {
        let (arena, wants) = grid_arena(c.seed, i, g.max_states)?;
        let mut r = record(format!("parity-{i:04}"), "parity", format!("states {} edges {} wants {wants:?}", arena.len(), arena.edges.len()));
        let oracle = parity_winner(&arena, 0, wants)?;
        let mut winners = Vec::new();
        for &s in &g.priority_scales {
            let game = build_priority_game(priority_spec(arena.clone(), 0, wants, s)?)?;
            winners.push(solve_priority(&game)?);
        }
        let last = *winners.last().unwrap();
        let from = winners.iter().rposition(|&w| w != last).map_or(0, |i| i + 1);
        r.verdict = winners.iter().map(|&w| player_char(w)).collect();
        r.oracle = player_char(oracle).to_string();
        r.agree = winners.iter().all(|&w| w == oracle);
        r.stabilization_index = Some(from);
        Ok(r)
    }))
}

fn determinacy(c: &ExperimentConfig) -> Result<Cases> {
    let bitlen = c.games.bitlen;
    let mut items: Vec<(String, crate::games::EstPredicate, bool)> =
        well_behaved_corpus(4).into_iter().map(|(n, p)| (n, p, true)).collect();
    let (n, p) = negative_control();
    items.push((n, p, false));
    Ok(par_map(&items, |i, (name, p, expect_determined)| {
        let s = ambient_estimator(p.goodness_bound())?;
        let mut r = record(format!("determinacy-{i:02}"), "determinacy", format!("{name} bitlen {bitlen}"));
        let wb = check_well_behaved(p, &s, bitlen)?;
        let value = solve(&build_estimator_game(p, &s, bitlen)?, c.budget.max_nodes)?.value;
        let draws = if bitlen <= crate::games::MAX_CLASSIFY_BITLEN {
            classify_plays(p, &s, bitlen)?.iter().filter(|x| x.2 == Outcome::Draw).count().to_string()
        } else {
            "-".into()
        };
        r.verdict = outcome_name(value).into();
        r.oracle = if wb { "well_behaved".into() } else { "not_well_behaved".into() };
        r.agree = if *expect_determined { wb && value != Outcome::Draw } else { !wb && value == Outcome::Draw };
        r.detail = format!("draw_plays={draws} control={}", !expect_determined);
        Ok(r)
    }))
}
