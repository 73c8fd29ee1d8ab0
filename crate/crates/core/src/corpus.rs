//! Sentence corpora: seeded random generation plus hand-written edge cases.
//!
//! A corpus file has one case per line, `true` or `false`, a tab, and the
//! rendered sentence. Lines starting with `#` and blank lines are ignored.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::formulas::{brute_truth, parse_sentence, Sentence};

/// Bits of brute-force search allowed for corpus sentences.
pub const BRUTE_MAX_BITS: u32 = 12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusLimits {
    pub max_sets: usize,
    pub max_window: u32,
    pub max_period: u64,
    pub max_threshold: u64,
}

impl Default for CorpusLimits {
    fn default() -> Self {
        CorpusLimits { max_sets: 3, max_window: 3, max_period: 6, max_threshold: 8 }
    }
}

impl CorpusLimits {
    pub fn validate(&self) -> Result<()> {
        let ok = (1..=3).contains(&self.max_sets)
            && (1..=3).contains(&self.max_window)
            && (1..=6).contains(&self.max_period)
            && self.max_threshold <= 8;
        if !ok {
            return Err(Error::precondition(format!(
                "corpus limits {self:?} outside sets 1..=3, window 1..=3, period 1..=6, threshold 0..=8"
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CorpusEntry {
    pub id: String,
    pub sentence: Sentence,
    /// Exact truth from [`brute_truth`].
    pub truth: bool,
}

const SET_NAMES: [&str; 3] = ["X", "Y", "Z"];

struct Gen<'a> {
    rng: &'a mut ChaCha8Rng,
    sets: usize,
    window: u32,
    limits: CorpusLimits,
}

impl Gen<'_> {
    fn atom(&mut self) -> String {
        match self.rng.gen_range(0..10) {
            0..=4 => {
                let v = SET_NAMES[self.rng.gen_range(0..self.sets)];
                format!("{v}({})", self.rng.gen_range(0..self.window))
            }
            5..=6 => {
                let t = self.rng.gen_range(0..=self.limits.max_threshold);
                if self.rng.gen_bool(0.5) {
                    format!("y>={t}")
                } else {
                    format!("y<{t}")
                }
            }
            _ => {
                let m = self.rng.gen_range(1..=self.limits.max_period);
                format!("y%{m}={}", self.rng.gen_range(0..m))
            }
        }
    }

    fn expr(&mut self, depth: u32) -> String {
        if depth == 0 || self.rng.gen_bool(0.3) {
            let a = self.atom();
            return if self.rng.gen_bool(0.2) { format!("!{a}") } else { a };
        }
        let l = self.expr(depth - 1);
        let r = self.expr(depth - 1);
        let op = ["&", "|", "->", "<->", "&", "|"][self.rng.gen_range(0..6)];
        format!("({l} {op} {r})")
    }

    fn sentence(&mut self) -> String {
        let mut s = String::new();
        for v in &SET_NAMES[..self.sets] {
            let q = if self.rng.gen_bool(0.5) { "EX" } else { "AA" };
            write!(s, "{q} {v}. ").unwrap();
        }
        s.push_str("AA y. ");
        s.push_str(&self.expr(3));
        s
    }
}

/// `count` distinct random sentences within `limits`, followed by the
/// hand-written cases. Identical inputs give identical output.
pub fn gen_corpus(seed: u64, count: usize, limits: CorpusLimits) -> Result<Vec<CorpusEntry>> {
    limits.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut seen = BTreeSet::new();
    let mut out = Vec::with_capacity(count);
    let mut attempts = 0usize;
    while out.len() < count {
        attempts += 1;
        if attempts > 100 * count + 1000 {
            return Err(Error::Budget(format!("only {} distinct sentences after {attempts} attempts", out.len())));
        }
        let sets = rng.gen_range(1..=limits.max_sets);
        let window = rng.gen_range(1..=limits.max_window);
        let text = Gen { rng: &mut rng, sets, window, limits }.sentence();
        let s = parse_sentence(&text)?;
        let key = s.to_string();
        if !seen.insert(key) {
            continue;
        }
        let truth = brute_truth(&s, BRUTE_MAX_BITS)?;
        out.push(CorpusEntry { id: format!("g{:03}", out.len()), sentence: s, truth });
    }
    out.extend(hand_written()?);
    Ok(out)
}

/// Edge cases: tautologies, contradictions, thresholds at the boundary of
/// the tail and residues that never or always fire.
pub fn hand_written() -> Result<Vec<CorpusEntry>> {
    const CASES: [&str; 14] = [
        "AA y. true",
        "AA y. false",
        "AA X. AA y. X(0) | !X(0)",
        "EX X. AA y. X(0) & !X(0)",
        "AA y. y>=8",
        "AA y. y<8",
        "AA y. y>=0",
        "AA y. y%6=5",
        "AA y. y%2=0 & y%3=1",
        "AA y. y%2=0 & y%4=1",
        "EX X. AA y. X(2) <-> y%2=0",
        "AA X. EX Y. AA y. X(0) <-> Y(0)",
        "EX X. AA Y. AA y. X(0) -> Y(0) & y<3",
        "AA X. AA Y. EX Z. AA y. (X(1) & Y(1)) <-> Z(1) | y%5=2 & y>=7",
    ];
    CASES
        .iter()
        .enumerate()
        .map(|(i, text)| {
            let s = parse_sentence(text)?;
            let truth = brute_truth(&s, BRUTE_MAX_BITS)?;
            Ok(CorpusEntry { id: format!("h{i:02}"), sentence: s, truth })
        })
        .collect()
}

pub fn to_text(entries: &[CorpusEntry]) -> String {
    let mut out = String::new();
    for e in entries {
        writeln!(out, "{}\t{}", e.truth, e.sentence).unwrap();
    }
    out
}

/// Parse a corpus file; the stored truth is kept as given.
pub fn parse_corpus(text: &str) -> Result<Vec<CorpusEntry>> {
    let mut out = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (truth, sentence) =
            line.split_once('\t').ok_or_else(|| Error::malformed(format!("line {}: missing tab", n + 1)))?;
        let truth = match truth {
            "true" => true,
            "false" => false,
            other => return Err(Error::malformed(format!("line {}: bad truth value `{other}`", n + 1))),
        };
        let sentence = parse_sentence(sentence).map_err(|e| Error::malformed(format!("line {}: {e}", n + 1)))?;
        out.push(CorpusEntry { id: format!("l{:03}", n + 1), sentence, truth });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generation_is_deterministic_and_distinct() {
        let a = gen_corpus(1, 50, CorpusLimits::default()).unwrap();
        let b = gen_corpus(1, 50, CorpusLimits::default()).unwrap();
        assert_eq!(to_text(&a), to_text(&b));
        let distinct: BTreeSet<String> = a.iter().map(|e| e.sentence.to_string()).collect();
        assert_eq!(distinct.len(), a.len());
    }

    #[test]
    fn zero_count_gives_hand_written_only() {
        let c = gen_corpus(3, 0, CorpusLimits::default()).unwrap();
        assert_eq!(c.len(), hand_written().unwrap().len());
        assert!(c.len() >= 10);
    }

    #[test]
    fn hand_written_truths() {
        let t: Vec<bool> = hand_written().unwrap().iter().map(|e| e.truth).collect();
        assert_eq!(&t[..10], &[true, false, true, false, true, false, true, true, true, false]);
    }

    #[test]
    fn text_round_trip() {
        let c = gen_corpus(7, 20, CorpusLimits::default()).unwrap();
        let back = parse_corpus(&to_text(&c)).unwrap();
        assert_eq!(back.len(), c.len());
        for (x, y) in c.iter().zip(&back) {
            assert_eq!(x.sentence.to_string(), y.sentence.to_string());
            assert_eq!(x.truth, y.truth);
        }
    }

    #[test]
    fn limits_are_checked() {
        let bad = CorpusLimits { max_period: 7, ..CorpusLimits::default() };
        assert!(gen_corpus(1, 5, bad).is_err());
    }
}
