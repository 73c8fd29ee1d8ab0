//! Configuration-driven experiments and their reports.
//!
//! A run expands the configuration into cases, evaluates them in parallel,
//! compares each result with an independent oracle and writes a JSON
//! summary plus a CSV case table. The CSV carries no timing, so equal
//! configurations give byte-identical tables.

mod cases;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::corpus::{gen_corpus, parse_corpus, CorpusEntry, CorpusLimits};
use crate::error::{Error, Result};
use crate::estimators::{CoverRule, NotionParams};
use crate::formulas::parse_sentence;
use crate::games::Phi;
use crate::rate::Rate;
use crate::wellfounded::RelationSpec;

pub use cases::{
    closure_violations, grid_arena, priority_gaps, priority_spec, sigma20_bounds, wf_grid_sequences, CLOSURE_SAMPLES,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    EstimatorTruth,
    StabilizationSweep,
    WfSweep,
    JumpTower,
    GameFamily,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::EstimatorTruth => "estimator_truth",
            ExperimentKind::StabilizationSweep => "stabilization_sweep",
            ExperimentKind::WfSweep => "wf_sweep",
            ExperimentKind::JumpTower => "jump_tower",
            ExperimentKind::GameFamily => "game_family",
        }
    }
}

/// Top-level configuration; every section has defaults.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default)]
    pub corpus: CorpusConfig,
    #[serde(default)]
    pub params: ParamsConfig,
    #[serde(default)]
    pub sweep: SweepConfig,
    #[serde(default)]
    pub wf: WfConfig,
    #[serde(default)]
    pub jump: JumpConfig,
    #[serde(default)]
    pub games: GamesConfig,
    #[serde(default)]
    pub budget: BudgetConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

fn default_seed() -> u64 {
    1
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CorpusConfig {
    /// Number of random sentences; hand-written cases are always added.
    pub generated: usize,
    pub limits: CorpusLimits,
    /// Extra corpus file in the `truth<TAB>sentence` format.
    pub file: Option<PathBuf>,
    pub sentences: Vec<String>,
}

impl Default for CorpusConfig {
    fn default() -> Self {
        CorpusConfig { generated: 50, limits: CorpusLimits::default(), file: None, sentences: Vec::new() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ParamsConfig {
    pub a_min: u64,
    pub rate: String,
    /// Minimum element counts for levels 1, 2, ...
    pub cover: Vec<usize>,
}

impl Default for ParamsConfig {
    fn default() -> Self {
        ParamsConfig { a_min: 0, rate: "lin(2)".into(), cover: Vec::new() }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AMin {
    Fixed(u64),
    /// `"size"`: the sentence size.
    Named(String),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepConfig {
    /// Schedule `f = c(x+1)` for each multiplier `c`, in order.
    pub multipliers: Vec<u64>,
    pub a_min: Vec<AMin>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig { multipliers: vec![1, 2, 4, 8, 16, 32, 64], a_min: vec![AMin::Fixed(0), AMin::Named("size".into())] }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct WfConfig {
    /// Relation names with an optional start, e.g. `pred@2` or `omega2@1`.
    pub relations: Vec<String>,
    pub random_dags: usize,
    pub random_cyclic: usize,
    pub graph_nodes: usize,
    pub density: f64,
    pub rates: Vec<String>,
    pub min_len: usize,
    pub max_len: usize,
}

impl Default for WfConfig {
    fn default() -> Self {
        WfConfig {
            relations: vec!["pred@2".into(), "succ@0".into(), "omega2@1".into()],
            random_dags: 100,
            random_cyclic: 100,
            graph_nodes: 8,
            density: 0.3,
            rates: vec!["lin(2)".into(), "sq".into(), "exp2".into()],
            min_len: 4,
            max_len: 32,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct JumpConfig {
    pub rate: String,
    pub margins: Vec<u64>,
    pub max_level: u32,
}

impl Default for JumpConfig {
    fn default() -> Self {
        JumpConfig { rate: "lin(2)".into(), margins: vec![1, 2, 4], max_level: 3 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GamesConfig {
    /// Any of `random`, `sigma20`, `priority`, `estimator` (solver against
    /// strategy enumeration), `sigma20_grid`, `parity`, `determinacy`.
    pub families: Vec<String>,
    /// Random instances per soundness family.
    pub instances: usize,
    pub plies: usize,
    pub branching: usize,
    /// Margins of `g` for the Σ⁰₂ grid.
    pub sigma20_margins: Vec<u64>,
    pub sigma20_horizons: Vec<usize>,
    pub sigma20_phis: Vec<String>,
    /// Gap scales for the priority grid.
    pub priority_scales: Vec<u64>,
    pub arenas: usize,
    pub max_states: usize,
    pub bitlen: usize,
}

impl Default for GamesConfig {
    fn default() -> Self {
        GamesConfig {
            families: ["random", "sigma20", "priority", "estimator", "sigma20_grid", "parity", "determinacy"]
                .map(String::from)
                .to_vec(),
            instances: 50,
            plies: 6,
            branching: 3,
            sigma20_margins: vec![1, 2, 4, 8],
            sigma20_horizons: vec![2, 3, 4, 5],
            sigma20_phis: Phi::catalog().iter().map(Phi::name).collect(),
            priority_scales: vec![1, 2],
            arenas: 160,
            max_states: 8,
            bitlen: 4,
        }
    }
}

pub const GAME_FAMILIES: [&str; 7] = ["random", "sigma20", "priority", "estimator", "sigma20_grid", "parity", "determinacy"];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BudgetConfig {
    pub max_natural: u64,
    pub max_iterations: usize,
    pub max_plies: usize,
    pub max_nodes: usize,
}

impl Default for BudgetConfig {
    fn default() -> Self {
        BudgetConfig { max_natural: 1 << 48, max_iterations: 100_000, max_plies: 12, max_nodes: 5_000_000 }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    pub json: Option<PathBuf>,
    pub csv: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn new(kind: ExperimentKind) -> Self {
        ExperimentConfig {
            kind,
            seed: default_seed(),
            corpus: CorpusConfig::default(),
            params: ParamsConfig::default(),
            sweep: SweepConfig::default(),
            wf: WfConfig::default(),
            jump: JumpConfig::default(),
            games: GamesConfig::default(),
            budget: BudgetConfig::default(),
            output: OutputConfig::default(),
        }
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let c: ExperimentConfig = toml::from_str(text).map_err(|e| {
            let span = e.span().map(|s| format!(" at bytes {}..{}", s.start, s.end)).unwrap_or_default();
            Error::config("<root>", format!("{}{span}", e.message()))
        })?;
        c.validate()?;
        Ok(c)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }

    /// Hex SHA-256 of the canonical JSON form without output paths,
    /// shortened to 16 digits.
    pub fn hash(&self) -> String {
        let bare = ExperimentConfig { output: OutputConfig::default(), ..self.clone() };
        let json = serde_json::to_string(&bare).expect("config serializes");
        let digest = Sha256::digest(json.as_bytes());
        digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
    }

    pub fn validate(&self) -> Result<()> {
        let b = &self.budget;
        for (name, v) in [
            ("max_natural", b.max_natural as usize),
            ("max_iterations", b.max_iterations),
            ("max_plies", b.max_plies),
            ("max_nodes", b.max_nodes),
        ] {
            if v == 0 {
                return Err(Error::config(format!("budget.{name}"), "must be positive"));
            }
        }
        self.corpus.limits.validate().map_err(|e| Error::config("corpus.limits", e.to_string()))?;
        for (i, s) in self.corpus.sentences.iter().enumerate() {
            parse_sentence(s).map_err(|e| Error::config(format!("corpus.sentences[{i}]"), e.to_string()))?;
        }
        self.notion_params().map_err(|e| Error::config("params", e.to_string()))?;
        if self.sweep.multipliers.is_empty() {
            return Err(Error::config("sweep.multipliers", "must not be empty"));
        }
        for (i, w) in self.sweep.multipliers.windows(2).enumerate() {
            if w[1] < w[0] {
                return Err(Error::config(format!("sweep.multipliers[{}]", i + 1), "must be non-decreasing"));
            }
        }
        if self.sweep.multipliers[0] == 0 {
            return Err(Error::config("sweep.multipliers[0]", "must be positive"));
        }
        for (i, a) in self.sweep.a_min.iter().enumerate() {
            if let AMin::Named(n) = a {
                if n != "size" {
                    return Err(Error::config(format!("sweep.a_min[{i}]"), format!("expected a number or `size`, got `{n}`")));
                }
            }
        }
        for (i, r) in self.wf.relations.iter().enumerate() {
            parse_relation(r).map_err(|e| Error::config(format!("wf.relations[{i}]"), e.to_string()))?;
        }
        for (i, r) in self.wf.rates.iter().enumerate() {
            r.parse::<Rate>().map_err(|e| Error::config(format!("wf.rates[{i}]"), e.to_string()))?;
        }
        if self.wf.min_len == 0 || self.wf.min_len > self.wf.max_len {
            return Err(Error::config("wf.min_len", "must satisfy 1 <= min_len <= max_len"));
        }
        if !(0.0..=1.0).contains(&self.wf.density) {
            return Err(Error::config("wf.density", "must lie in [0, 1]"));
        }
        if self.wf.graph_nodes == 0 {
            return Err(Error::config("wf.graph_nodes", "must be positive"));
        }
        self.jump.rate.parse::<Rate>().map_err(|e| Error::config("jump.rate", e.to_string()))?;
        if self.jump.max_level > crate::wellfounded::MAX_JUMP_LEVEL {
            return Err(Error::config("jump.max_level", format!("at most {}", crate::wellfounded::MAX_JUMP_LEVEL)));
        }
        if self.jump.margins.is_empty() || self.jump.margins.contains(&0) {
            return Err(Error::config("jump.margins", "must be non-empty and positive"));
        }
        let g = &self.games;
        for (i, f) in g.families.iter().enumerate() {
            if !GAME_FAMILIES.contains(&f.as_str()) {
                return Err(Error::config(format!("games.families[{i}]"), format!("unknown family `{f}`")));
            }
        }
        for (i, p) in g.sigma20_phis.iter().enumerate() {
            p.parse::<Phi>().map_err(|e| Error::config(format!("games.sigma20_phis[{i}]"), e.to_string()))?;
        }
        if g.plies > b.max_plies {
            return Err(Error::config("games.plies", format!("exceeds budget.max_plies = {}", b.max_plies)));
        }
        if g.branching == 0 {
            return Err(Error::config("games.branching", "must be positive"));
        }
        if g.sigma20_margins.is_empty() || g.sigma20_margins.contains(&0) {
            return Err(Error::config("games.sigma20_margins", "must be non-empty and positive"));
        }
        if let Some(h) = g.sigma20_horizons.iter().find(|&&h| h == 0 || h > b.max_plies) {
            return Err(Error::config("games.sigma20_horizons", format!("horizon {h} outside 1..={}", b.max_plies)));
        }
        if g.priority_scales.is_empty() || g.priority_scales.contains(&0) {
            return Err(Error::config("games.priority_scales", "must be non-empty and positive"));
        }
        if g.max_states == 0 || g.max_states > 8 {
            return Err(Error::config("games.max_states", "must lie in 1..=8"));
        }
        if g.bitlen == 0 || 2 * g.bitlen > b.max_plies {
            return Err(Error::config("games.bitlen", format!("must lie in 1..={}", b.max_plies / 2)));
        }
        Ok(())
    }

    pub fn notion_params(&self) -> Result<NotionParams> {
        let rate: Rate = self.params.rate.parse()?;
        let mut p = NotionParams::new(self.params.a_min, rate)?
            .with_cover(self.params.cover.iter().map(|&m| CoverRule { min_elements: m }).collect());
        p.max_natural = self.budget.max_natural;
        p.max_iterations = self.budget.max_iterations;
        p.validate()?;
        Ok(p)
    }

    /// Generated corpus, then inline sentences, then the corpus file.
    pub fn load_corpus(&self) -> Result<Vec<CorpusEntry>> {
        let mut out = gen_corpus(self.seed, self.corpus.generated, self.corpus.limits)?;
        for (i, s) in self.corpus.sentences.iter().enumerate() {
            let sentence = parse_sentence(s).map_err(|e| Error::config(format!("corpus.sentences[{i}]"), e.to_string()))?;
            let truth = crate::formulas::brute_truth(&sentence, crate::corpus::BRUTE_MAX_BITS)?;
            out.push(CorpusEntry { id: format!("s{i:03}"), sentence, truth });
        }
        if let Some(path) = &self.corpus.file {
            let text = std::fs::read_to_string(path).map_err(|e| Error::config("corpus.file", e.to_string()))?;
            let mut extra = parse_corpus(&text).map_err(|e| Error::config("corpus.file", e.to_string()))?;
            for e in &mut extra {
                e.id = format!("f{}", &e.id[1..]);
            }
            out.extend(extra);
        }
        Ok(out)
    }
}

/// `name` or `name@start`; the default start is 0, or the top node for graphs.
pub fn parse_relation(text: &str) -> Result<(RelationSpec, u64)> {
    let (name, start) = match text.split_once('@') {
        Some((n, s)) => {
            let s = s.parse::<u64>().map_err(|_| Error::malformed(format!("bad start in `{text}`")))?;
            (n, Some(s))
        }
        None => (text, None),
    };
    let r = RelationSpec::parse(name)?;
    let default = r.node_count().map_or(0, |n| n.saturating_sub(1) as u64);
    let start = start.unwrap_or(default);
    if let Some(n) = r.node_count() {
        if start as usize >= n {
            return Err(Error::IndexOutOfBounds { index: start as usize, len: n });
        }
    }
    Ok((r, start))
}

/// One evaluated case.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CaseRecord {
    pub id: String,
    pub family: String,
    pub input: String,
    pub verdict: String,
    pub oracle: String,
    pub agree: bool,
    pub stabilization_index: Option<usize>,
    pub detail: String,
    pub config_hash: String,
    /// Wall time; JSON only.
    #[serde(default)]
    pub micros: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    Complete,
    BudgetExhausted,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub kind: ExperimentKind,
    pub seed: u64,
    pub config_hash: String,
    pub cases: usize,
    pub agreements: usize,
    pub agreement_rate: f64,
    /// Named thresholds, e.g. the largest stabilization index per family.
    pub thresholds: BTreeMap<String, u64>,
    pub status: RunStatus,
    pub budget_message: Option<String>,
    pub elapsed_ms: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub summary: Summary,
    pub cases: Vec<CaseRecord>,
}

impl Report {
    pub fn all_agree(&self) -> bool {
        self.cases.iter().all(|c| c.agree)
    }

    /// Case table without timing.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["id", "family", "input", "verdict", "oracle", "agree", "stabilization_index", "detail", "config_hash"])?;
        for c in &self.cases {
            let stab = c.stabilization_index.map(|i| i.to_string()).unwrap_or_default();
            w.write_record([
                c.id.as_str(),
                &c.family,
                &c.input,
                &c.verdict,
                &c.oracle,
                if c.agree { "true" } else { "false" },
                &stab,
                &c.detail,
                &c.config_hash,
            ])?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
        Ok(String::from_utf8(bytes).expect("csv is utf-8"))
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Write the JSON report and CSV table where configured.
    pub fn write(&self, out: &OutputConfig) -> Result<()> {
        if let Some(p) = &out.json {
            std::fs::write(p, self.to_json()?)?;
        }
        if let Some(p) = &out.csv {
            std::fs::write(p, self.to_csv()?)?;
        }
        Ok(())
    }
}

/// Whether an error means a resource limit rather than a wrong input.
pub fn is_budget_error(e: &Error) -> bool {
    matches!(e, Error::Budget(_) | Error::Overflow { .. } | Error::NonConvergence { .. })
}

/// Execute the experiment. Budget exhaustion stops at the first affected
/// case and returns the cases before it with a status marker.
pub fn run(config: &ExperimentConfig) -> Result<Report> {
    config.validate()?;
    let start = Instant::now();
    let hash = config.hash();
    let outcome = match config.kind {
        ExperimentKind::EstimatorTruth => cases::estimator_truth(config),
        ExperimentKind::StabilizationSweep => cases::stabilization(config),
        ExperimentKind::WfSweep => cases::wf_sweep(config),
        ExperimentKind::JumpTower => cases::jump_tower(config),
        ExperimentKind::GameFamily => cases::game_family(config),
    }?;
    let mut records = Vec::new();
    let mut budget_message = None;
    for r in outcome {
        match r {
            Ok(mut c) => {
                c.config_hash = hash.clone();
                records.push(c);
            }
            Err(e) if is_budget_error(&e) => {
                budget_message = Some(e.to_string());
                break;
            }
            Err(e) => return Err(e),
        }
    }
    let agreements = records.iter().filter(|c| c.agree).count();
    let mut thresholds: BTreeMap<String, u64> = BTreeMap::new();
    for c in &records {
        if let Some(i) = c.stabilization_index {
            let t = thresholds.entry(format!("{}.max_stabilization_index", c.family)).or_insert(0);
            *t = (*t).max(i as u64);
        }
    }
    let summary = Summary {
        kind: config.kind,
        seed: config.seed,
        config_hash: hash,
        cases: records.len(),
        agreements,
        agreement_rate: if records.is_empty() { 1.0 } else { agreements as f64 / records.len() as f64 },
        thresholds,
        status: if budget_message.is_some() { RunStatus::BudgetExhausted } else { RunStatus::Complete },
        budget_message,
        elapsed_ms: start.elapsed().as_millis() as u64,
    };
    Ok(Report { summary, cases: records })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn toml_defaults_and_hash() {
        let c = ExperimentConfig::from_toml("kind = \"estimator_truth\"\nseed = 3\n").unwrap();
        assert_eq!(c.corpus.generated, 50);
        assert_eq!(c.hash().len(), 16);
        let d = ExperimentConfig::from_toml("kind = \"estimator_truth\"\nseed = 4\n").unwrap();
        assert_ne!(c.hash(), d.hash());
        let mut e = c.clone();
        e.output.csv = Some("cases.csv".into());
        assert_eq!(c.hash(), e.hash());
    }

    #[test]
    fn validation_names_the_field() {
        let err = ExperimentConfig::from_toml("kind = \"estimator_truth\"\n[corpus]\nsentences = [\"AA y. true\", \"AA y. y%0=0\"]\n")
            .unwrap_err();
        match err {
            Error::Config { path, .. } => assert_eq!(path, "corpus.sentences[1]"),
            e => panic!("unexpected {e}"),
        }
        let err = ExperimentConfig::from_toml("kind = \"game_family\"\n[games]\nfamilies = [\"chess\"]\n").unwrap_err();
        assert!(matches!(err, Error::Config { path, .. } if path == "games.families[0]"));
        let err = ExperimentConfig::from_toml("kind = \"wf_sweep\"\n[budget]\nmax_nodes = 0\n").unwrap_err();
        assert!(matches!(err, Error::Config { path, .. } if path == "budget.max_nodes"));
        assert!(ExperimentConfig::from_toml("kind = \"nope\"\n").is_err());
        assert!(ExperimentConfig::from_toml("kind = \"wf_sweep\"\ncolour = 1\n").is_err());
    }

    #[test]
    fn relation_starts() {
        assert_eq!(parse_relation("pred@3").unwrap().1, 3);
        assert_eq!(parse_relation("dag:1:8:0.3").unwrap().1, 7);
        assert!(parse_relation("dag:1:8:0.3@9").is_err());
        assert!(parse_relation("pred@x").is_err());
    }
}
