use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use suffice::corpus::{gen_corpus, to_text, CorpusLimits};
use suffice::error::{Error, Result};
use suffice::estimators::{saturate, stabilization_sweep, truth_by_estimator, CoverRule, Estimator, NotionParams};
use suffice::experiment::{self, is_budget_error, priority_spec, sigma20_bounds, ExperimentConfig, RunStatus};
use suffice::fastgrow::{make_fastseq, Variant};
use suffice::formulas::{brute_truth, parse_sentence};
use suffice::games::{
    ambient_estimator, build_estimator_game, build_priority_game, build_sigma20_game, negative_control, random_arena,
    solve, solve_priority, well_behaved_corpus, GameSpec, Parity, Phi, DEFAULT_MOVE_CAP,
};
use suffice::oracles::parity_winner;
use suffice::rate::Rate;
use suffice::wellfounded::{bounded_wf_search, jump_tower_eval, machine_catalog};

#[derive(Parser)]
#[command(name = "suffice", version, about = "Estimators, fast-growing sequences and bounded games")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct NotionArgs {
    /// Smallest allowed lower end of a level-0 estimator.
    #[arg(long, default_value_t = 0)]
    a_min: u64,
    /// Rate function, e.g. `lin(2)`, `sq`, `exp2`, `poly(1,0,1)`.
    #[arg(long, default_value = "lin(2)")]
    rate: String,
    /// Minimum element counts per level, comma separated.
    #[arg(long, value_delimiter = ',')]
    cover: Vec<usize>,
}

impl NotionArgs {
    fn params(&self) -> Result<NotionParams> {
        let cover = self.cover.iter().map(|&m| CoverRule { min_elements: m }).collect();
        Ok(NotionParams::new(self.a_min, self.rate.parse()?)?.with_cover(cover))
    }
}

#[derive(Subcommand)]
enum Command {
    /// Truth of a sentence under one estimator, next to brute force.
    Eval {
        sentence: String,
        /// Estimator text, e.g. `{L0(1,4),L0(2,6)}`.
        estimator: String,
    },
    /// Saturate an estimator for a sentence and print it with its verdict.
    Saturate {
        sentence: String,
        #[command(flatten)]
        notion: NotionArgs,
    },
    /// Verdicts over the schedule `f = c(x+1)`.
    Sweep {
        sentence: String,
        #[arg(long, value_delimiter = ',', default_value = "1,2,4,8,16,32,64")]
        multipliers: Vec<u64>,
        #[arg(long, default_value_t = 0)]
        a_min: u64,
    },
    /// Bounded well-foundedness search below a start node.
    Wf {
        /// `pred`, `succ`, `omega2`, `dag:seed:n:density` or `cyclic:seed:n:density`, with optional `@start`.
        relation: String,
        #[arg(long, default_value = "lin(2)")]
        rate: String,
        #[arg(long, default_value_t = 16)]
        len: usize,
    },
    /// Bounded jump bits for the machine catalog.
    Jump {
        #[arg(long, default_value_t = 1)]
        level: u32,
        #[arg(long, default_value = "lin(2)")]
        rate: String,
        #[arg(long, default_value_t = 1)]
        margin: u64,
    },
    /// Solve one game instance.
    Game {
        #[command(subcommand)]
        game: GameCommand,
    },
    /// Write a generated corpus in the `truth<TAB>sentence` format.
    Corpus {
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 50)]
        count: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run an experiment from a TOML config.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        /// Budget override `key=value` for max_natural, max_iterations, max_plies or max_nodes.
        #[arg(long)]
        budget: Vec<String>,
        /// Directory for `report.json` and `cases.csv`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum GameCommand {
    Random {
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 6)]
        plies: usize,
        #[arg(long, default_value_t = 3)]
        branching: usize,
    },
    Sigma20 {
        /// One of `true`, `false`, `echo`, `dominate`, `even_sum`, `threshold(t)`.
        phi: String,
        #[arg(long, default_value_t = 3)]
        horizon: usize,
        #[arg(long, default_value_t = 4)]
        margin: u64,
    },
    Priority {
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 4)]
        states: usize,
        #[arg(long, default_value_t = 1)]
        scale: u64,
        /// Parity the first player wants seen infinitely often.
        #[arg(long, default_value = "even")]
        wants: String,
    },
    Estimator {
        /// Name from the well-behaved corpus or `min_a_parity`.
        predicate: String,
        #[arg(long, default_value_t = 3)]
        bitlen: usize,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if is_budget_error(&e) { 3 } else { 1 })
        }
    }
}

fn dispatch(cmd: Command) -> Result<ExitCode> {
    match cmd {
        Command::Eval { sentence, estimator } => {
            let s = parse_sentence(&sentence)?;
            let e: Estimator = estimator.parse()?;
            println!("estimator: {}", truth_by_estimator(&s, &e)?);
            println!("brute:     {}", brute_truth(&s, suffice::corpus::BRUTE_MAX_BITS)?);
        }
        Command::Saturate { sentence, notion } => {
            let s = parse_sentence(&sentence)?;
            let e = saturate(&s, &notion.params()?, None)?;
            println!("{e}");
            println!("verdict: {}", truth_by_estimator(&s, &e)?);
        }
        Command::Sweep { sentence, multipliers, a_min } => {
            let s = parse_sentence(&sentence)?;
            let schedule =
                multipliers.iter().map(|&c| NotionParams::new(a_min, Rate::linear(c))).collect::<Result<Vec<_>>>()?;
            let r = stabilization_sweep(&s, &schedule)?;
            println!("verdicts: {:?}", r.verdicts);
            println!("stabilization index: {}", r.stabilization_index);
        }
        Command::Wf { relation, rate, len } => {
            let (r, start) = experiment::parse_relation(&relation)?;
            let a = make_fastseq(&rate.parse()?, len, Variant::Plain, 1, u64::MAX)?.values;
            println!("A = {a:?}");
            println!("verdict: {:?}", bounded_wf_search(&r, start, &a));
            println!("truth:   {:?}", r.ground_truth(start));
        }
        Command::Jump { level, rate, margin } => {
            let machines = machine_catalog();
            let a = make_fastseq(&rate.parse()?, machines.len(), Variant::Plain, margin, u64::MAX)?.values;
            for (n, m) in machines.iter().enumerate() {
                println!("{n:2} {:<16} {}", m.name, u8::from(jump_tower_eval(level, &machines, n, &a)?));
            }
        }
        Command::Game { game } => run_game(game)?,
        Command::Corpus { seed, count, out } => {
            let text = to_text(&gen_corpus(seed, count, CorpusLimits::default())?);
            match out {
                Some(p) => std::fs::write(p, text)?,
                None => print!("{text}"),
            }
        }
        Command::Run { config, seed, budget, out } => return run_experiment(config, seed, budget, out),
    }
    Ok(ExitCode::SUCCESS)
}

fn run_game(game: GameCommand) -> Result<()> {
    let budget = suffice::games::DEFAULT_NODE_BUDGET;
    let report = |g: &GameSpec| -> Result<()> {
        let sol = solve(g, budget)?;
        println!("value: {:?}", sol.value);
        println!("opening move: {}", sol.strategy.get(&Vec::new()).map_or("-".into(), |m| m.to_string()));
        println!("positions: {}", sol.nodes);
        Ok(())
    };
    match game {
        GameCommand::Random { seed, plies, branching } => report(&GameSpec::random(seed, plies, branching)?)?,
        GameCommand::Sigma20 { phi, horizon, margin } => {
            let phi: Phi = phi.parse()?;
            let g = build_sigma20_game(phi, &sigma20_bounds(margin, 2 * horizon)?, horizon, DEFAULT_MOVE_CAP)?;
            report(&g)?;
        }
        GameCommand::Priority { seed, states, scale, wants } => {
            let wants = match wants.as_str() {
                "even" => Parity::Even,
                "odd" => Parity::Odd,
                w => return Err(Error::Malformed(format!("expected `even` or `odd`, got `{w}`"))),
            };
            let arena = random_arena(seed, states, 2, 3)?;
            let g = build_priority_game(priority_spec(arena.clone(), 0, wants, scale)?)?;
            println!("horizon: {}", g.spec().horizon);
            println!("timeout winner: {:?}", solve_priority(&g)?);
            println!("parity winner:  {:?}", parity_winner(&arena, 0, wants)?);
        }
        GameCommand::Estimator { predicate, bitlen } => {
            let mut all = well_behaved_corpus(4);
            all.push(negative_control());
            let Some((_, p)) = all.iter().find(|(n, _)| *n == predicate) else {
                let names: Vec<_> = all.iter().map(|(n, _)| n.as_str()).collect();
                return Err(Error::Malformed(format!("unknown predicate `{predicate}`; known: {}", names.join(", "))));
            };
            let s = ambient_estimator(p.goodness_bound())?;
            report(&build_estimator_game(p, &s, bitlen)?)?;
        }
    }
    Ok(())
}

fn run_experiment(path: PathBuf, seed: Option<u64>, budget: Vec<String>, out: Option<PathBuf>) -> Result<ExitCode> {
    let mut config = ExperimentConfig::load(&path)?;
    if let Some(s) = seed {
        config.seed = s;
    }
    for kv in &budget {
        let (k, v) = kv.split_once('=').ok_or_else(|| Error::Config { path: "--budget".into(), msg: format!("expected key=value, got `{kv}`") })?;
        let bad = || Error::Config { path: format!("budget.{k}"), msg: format!("not a number: `{v}`") };
        let b = &mut config.budget;
        match k {
            "max_natural" => b.max_natural = v.parse().map_err(|_| bad())?,
            "max_iterations" => b.max_iterations = v.parse().map_err(|_| bad())?,
            "max_plies" => b.max_plies = v.parse().map_err(|_| bad())?,
            "max_nodes" => b.max_nodes = v.parse().map_err(|_| bad())?,
            _ => return Err(Error::Config { path: format!("budget.{k}"), msg: "unknown budget key".into() }),
        }
    }
    if let Some(dir) = out {
        std::fs::create_dir_all(&dir)?;
        config.output.json = Some(dir.join("report.json"));
        config.output.csv = Some(dir.join("cases.csv"));
    }
    config.validate()?;
    let report = experiment::run(&config)?;
    report.write(&config.output)?;
    let s = &report.summary;
    println!(
        "{}: {} cases, {} agree ({:.4}), status {:?}, hash {}",
        s.kind.name(),
        s.cases,
        s.agreements,
        s.agreement_rate,
        s.status,
        s.config_hash
    );
    for (k, v) in &s.thresholds {
        println!("  {k} = {v}");
    }
    for c in report.cases.iter().filter(|c| !c.agree) {
        println!("  disagree {}: {} verdict {} oracle {}", c.id, c.input, c.verdict, c.oracle);
    }
    Ok(ExitCode::from(match (s.status, report.all_agree()) {
        (RunStatus::BudgetExhausted, _) => 3,
        (_, false) => 2,
        _ => 0,
    }))
}
