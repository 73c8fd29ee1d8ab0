//! Nested estimators and valid notions.
//!
//! A level-0 estimator is a pair `(a, b)` with `a < b`; a level-`n+1`
//! estimator is a finite set of level-`n` estimators. A sentence with `n`
//! set quantifiers is evaluated against a level-`n` estimator by [`passes`]:
//! a pair is passed when some `y` in `[a, b)` satisfies the matrix, an `∃X`
//! layer needs one window pattern that passes every element, and a `∀X`
//! layer needs every pattern to pass at least one element.
//!
//! Valid notions are described constructively by [`NotionParams`]: a lower
//! bound `a_min`, a growth rate `f` for the level-0 condition `b >= f(a)`, and
//! a per-level minimum element count.
//!
//! [`saturate`] builds an estimator whose verdict is exact. It runs a repair
//! loop in depth-first order over the tree (elements visited in [`Ord`]
//! order, which compares pairs by `a` then `b` and sets lexicographically):
//!
//! * a set with too few elements receives the smallest canonical element not
//!   already present;
//! * a pair that is not *decisive* is replaced by the smallest decisive pair
//!   above it. A pair is decisive when `a >= t` and `b >= a + m` for the
//!   matrix preperiod `t` and period `m`, because its scan then sees every
//!   residue past the preperiod and equals the tail truth.
//!
//! Once every pair is decisive and every set is non-empty the verdict equals
//! the true value of the sentence, by induction on the prefix.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::formulas::{pattern_count, scan_interval, tail_truth, Matrix, Quantifier, Sentence, WitnessAssignment};
use crate::rate::Rate;

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "EstimatorData", into = "EstimatorData")]
pub enum Estimator {
    Pair { a: u64, b: u64 },
    Set { level: u32, elements: BTreeSet<Estimator> },
}

/// Structured form used for serde.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EstimatorData {
    Pair { a: u64, b: u64 },
    Set { level: u32, elements: Vec<EstimatorData> },
}

impl From<Estimator> for EstimatorData {
    fn from(e: Estimator) -> Self {
        match e {
            Estimator::Pair { a, b } => EstimatorData::Pair { a, b },
            Estimator::Set { level, elements } => EstimatorData::Set {
                level,
                elements: elements.into_iter().map(Into::into).collect(),
            },
        }
    }
}

impl TryFrom<EstimatorData> for Estimator {
    type Error = Error;
    fn try_from(d: EstimatorData) -> Result<Self> {
        match d {
            EstimatorData::Pair { a, b } => Estimator::pair(a, b),
            EstimatorData::Set { level, elements } => {
                let elements = elements.into_iter().map(Estimator::try_from).collect::<Result<Vec<_>>>()?;
                Estimator::set(level, elements)
            }
        }
    }
}

impl Estimator {
    pub fn pair(a: u64, b: u64) -> Result<Self> {
        if a >= b {
            return Err(Error::malformed(format!("level-0 estimator needs a < b, got ({a},{b})")));
        }
        Ok(Estimator::Pair { a, b })
    }

    pub fn set(level: u32, elements: impl IntoIterator<Item = Estimator>) -> Result<Self> {
        if level == 0 {
            return Err(Error::malformed("a set estimator has level at least 1"));
        }
        let elements: BTreeSet<Estimator> = elements.into_iter().collect();
        for e in &elements {
            if e.level() + 1 != level {
                return Err(Error::LevelMismatch { expected: level - 1, found: e.level() });
            }
        }
        Ok(Estimator::Set { level, elements })
    }

    pub fn empty(level: u32) -> Result<Self> {
        Estimator::set(level, [])
    }

    pub fn level(&self) -> u32 {
        match self {
            Estimator::Pair { .. } => 0,
            Estimator::Set { level, .. } => *level,
        }
    }

    pub fn elements(&self) -> Option<&BTreeSet<Estimator>> {
        match self {
            Estimator::Pair { .. } => None,
            Estimator::Set { elements, .. } => Some(elements),
        }
    }

    /// `self ∪ {x}`; idempotent.
    pub fn add_element(&self, x: Estimator) -> Result<Estimator> {
        match self {
            Estimator::Pair { .. } => Err(Error::LevelMismatch { expected: 1, found: 0 }),
            Estimator::Set { level, elements } => {
                if x.level() + 1 != *level {
                    return Err(Error::LevelMismatch { expected: level - 1, found: x.level() });
                }
                let mut elements = elements.clone();
                elements.insert(x);
                Ok(Estimator::Set { level: *level, elements })
            }
        }
    }

    /// All level-0 pairs in the tree, in order.
    pub fn leaves(&self) -> Vec<(u64, u64)> {
        let mut out = Vec::new();
        self.collect_leaves(&mut out);
        out
    }

    fn collect_leaves(&self, out: &mut Vec<(u64, u64)>) {
        match self {
            Estimator::Pair { a, b } => out.push((*a, *b)),
            Estimator::Set { elements, .. } => elements.iter().for_each(|e| e.collect_leaves(out)),
        }
    }

    /// Total number of nodes.
    pub fn node_count(&self) -> usize {
        match self {
            Estimator::Pair { .. } => 1,
            Estimator::Set { elements, .. } => 1 + elements.iter().map(Estimator::node_count).sum::<usize>(),
        }
    }
}

impl fmt::Display for Estimator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Estimator::Pair { a, b } => write!(f, "L0({a},{b})"),
            Estimator::Set { level, elements } if elements.is_empty() => write!(f, "L{level}{{}}"),
            Estimator::Set { elements, .. } => {
                f.write_str("{")?;
                for (i, e) in elements.iter().enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "{e}")?;
                }
                f.write_str("}")
            }
        }
    }
}

impl FromStr for Estimator {
    type Err = Error;

    /// Accepts `L0(a,b)`, `{e1,e2,..}` and `L<n>{..}` with optional
    /// whitespace.
    fn from_str(s: &str) -> Result<Self> {
        let compact: Vec<u8> = s.bytes().filter(|c| !c.is_ascii_whitespace()).collect();
        let mut p = EstParser { src: &compact, pos: 0 };
        let e = p.estimator()?;
        if p.pos != compact.len() {
            return Err(p.err("trailing input"));
        }
        Ok(e)
    }
}

struct EstParser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl EstParser<'_> {
    fn err(&self, msg: &str) -> Error {
        Error::Syntax { pos: self.pos, msg: format!("estimator: {msg}") }
    }

    fn peek(&self) -> Option<u8> {
        self.src.get(self.pos).copied()
    }

    fn expect(&mut self, b: u8) -> Result<()> {
        if self.peek() == Some(b) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.err(&format!("expected `{}`", b as char)))
        }
    }

    fn number(&mut self) -> Result<u64> {
        let start = self.pos;
        while self.peek().is_some_and(|c| c.is_ascii_digit()) {
            self.pos += 1;
        }
        std::str::from_utf8(&self.src[start..self.pos])
            .ok()
            .and_then(|t| t.parse().ok())
            .ok_or(Error::Syntax { pos: start, msg: "estimator: expected a number".into() })
    }

    fn estimator(&mut self) -> Result<Estimator> {
        match self.peek() {
            Some(b'L') => {
                self.pos += 1;
                let level = self.number()?;
                let level = u32::try_from(level).map_err(|_| self.err("level too large"))?;
                if level == 0 {
                    self.expect(b'(')?;
                    let a = self.number()?;
                    self.expect(b',')?;
                    let b = self.number()?;
                    self.expect(b')')?;
                    return Estimator::pair(a, b);
                }
                let elements = self.braces()?;
                Estimator::set(level, elements)
            }
            Some(b'{') => {
                let elements = self.braces()?;
                let Some(first) = elements.first() else {
                    return Err(self.err("an empty set needs an explicit level, as in `L1{}`"));
                };
                let level = first.level() + 1;
                Estimator::set(level, elements)
            }
            _ => Err(self.err("expected `L` or `{`")),
        }
    }

    fn braces(&mut self) -> Result<Vec<Estimator>> {
        self.expect(b'{')?;
        let mut out = Vec::new();
        if self.peek() == Some(b'}') {
            self.pos += 1;
            return Ok(out);
        }
        loop {
            out.push(self.estimator()?);
            match self.peek() {
                Some(b',') => self.pos += 1,
                Some(b'}') => {
                    self.pos += 1;
                    return Ok(out);
                }
                _ => return Err(self.err("expected `,` or `}`")),
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CoverRule {
    pub min_elements: usize,
}

impl Default for CoverRule {
    fn default() -> Self {
        CoverRule { min_elements: 1 }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct NotionParams {
    pub a_min: u64,
    pub rate: Rate,
    /// `cover[i]` applies to level `i + 1`; missing levels use the default.
    #[serde(default)]
    pub cover: Vec<CoverRule>,
    #[serde(default)]
    pub allow_empty: bool,
    #[serde(default = "default_max_natural")]
    pub max_natural: u64,
    #[serde(default = "default_max_iterations")]
    pub max_iterations: usize,
}

fn default_max_natural() -> u64 {
    1 << 48
}

fn default_max_iterations() -> usize {
    100_000
}

/// Range on which rates are checked to be inflationary and compared.
pub const RATE_PROBE: std::ops::Range<u64> = 0..256;

impl NotionParams {
    pub fn new(a_min: u64, rate: Rate) -> Result<Self> {
        let p = NotionParams {
            a_min,
            rate,
            cover: Vec::new(),
            allow_empty: false,
            max_natural: default_max_natural(),
            max_iterations: default_max_iterations(),
        };
        p.validate()?;
        Ok(p)
    }

    pub fn with_cover(mut self, cover: Vec<CoverRule>) -> Self {
        self.cover = cover;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let lo = self.a_min;
        if !self.rate.is_inflationary_on(lo, lo + 64) {
            return Err(Error::precondition(format!(
                "rate {} is not strictly increasing and inflationary from {lo}",
                self.rate
            )));
        }
        if self.cover.iter().any(|c| c.min_elements == 0) && !self.allow_empty {
            return Err(Error::precondition("cover rule with zero elements needs allow_empty"));
        }
        Ok(())
    }

    pub fn cover_for(&self, level: u32) -> CoverRule {
        level
            .checked_sub(1)
            .and_then(|i| self.cover.get(i as usize))
            .copied()
            .unwrap_or_default()
    }

    fn min_elements(&self, level: u32) -> usize {
        let m = self.cover_for(level).min_elements;
        if self.allow_empty {
            m
        } else {
            m.max(1)
        }
    }

    pub fn f(&self, a: u64) -> Result<u64> {
        self.rate.apply(a, self.max_natural)
    }
}

/// Level-0 membership: `a >= a_min` and `b >= f(a)`.
pub fn is_valid_level0(e: &Estimator, p: &NotionParams) -> Result<bool> {
    match e {
        Estimator::Pair { a, b } => Ok(*a >= p.a_min && p.rate.try_apply(*a).is_some_and(|fa| *b >= fa)),
        Estimator::Set { level, .. } => Err(Error::LevelMismatch { expected: 0, found: *level }),
    }
}

/// Membership at every level of the tree.
pub fn is_valid(e: &Estimator, p: &NotionParams) -> bool {
    match e {
        Estimator::Pair { .. } => is_valid_level0(e, p).unwrap_or(false),
        Estimator::Set { level, elements } => {
            elements.len() >= p.min_elements(*level) && elements.iter().all(|x| is_valid(x, p))
        }
    }
}

/// Parameters whose membership sets are the intersections of the operands'.
pub fn intersect_params(p: &NotionParams, q: &NotionParams) -> NotionParams {
    let n = p.cover.len().max(q.cover.len());
    let cover = (0..n)
        .map(|i| {
            let level = i as u32 + 1;
            CoverRule {
                min_elements: p.cover_for(level).min_elements.max(q.cover_for(level).min_elements),
            }
        })
        .collect();
    NotionParams {
        a_min: p.a_min.max(q.a_min),
        rate: p.rate.clone().max(q.rate.clone()),
        cover,
        allow_empty: p.allow_empty && q.allow_empty,
        max_natural: p.max_natural.min(q.max_natural),
        max_iterations: p.max_iterations.min(q.max_iterations),
    }
}

/// Whether the suffix of `s` starting at quantifier `partial.len()` passes
/// `e`.
pub fn passes(s: &Sentence, e: &Estimator, partial: &WitnessAssignment) -> Result<bool> {
    let depth = partial.len();
    let remaining = s.depth().checked_sub(depth).ok_or(Error::MissingVariable(s.depth()))?;
    if e.level() as usize != remaining {
        return Err(Error::LevelMismatch { expected: remaining as u32, found: e.level() });
    }
    let mut a = partial.clone();
    a.width = s.matrix().window();
    passes_rec(s, e, &mut a)
}

fn passes_rec(s: &Sentence, e: &Estimator, a: &mut WitnessAssignment) -> Result<bool> {
    match e {
        Estimator::Pair { a: lo, b: hi } => scan_interval(s.matrix(), *lo, *hi, a),
        Estimator::Set { elements, .. } => {
            let (q, _) = &s.prefix()[a.len()];
            let exists = *q == Quantifier::Exists;
            for pat in 0..pattern_count(a.width) {
                a.push(pat);
                let r = layer(s, elements, a, exists);
                a.pop();
                if r? == exists {
                    return Ok(exists);
                }
            }
            Ok(!exists)
        }
    }
}

/// `∃`: every element passes; `∀`: some element passes.
fn layer(s: &Sentence, elements: &BTreeSet<Estimator>, a: &mut WitnessAssignment, all: bool) -> Result<bool> {
    for x in elements {
        if passes_rec(s, x, a)? != all {
            return Ok(!all);
        }
    }
    Ok(all)
}

/// Truth of `s` read off `e`; a sentence with no set quantifiers is decided
/// by its tail alone.
pub fn truth_by_estimator(s: &Sentence, e: &Estimator) -> Result<bool> {
    if e.level() as usize != s.depth() {
        return Err(Error::LevelMismatch { expected: s.depth() as u32, found: e.level() });
    }
    if s.depth() == 0 {
        return tail_truth(s.matrix(), &WitnessAssignment::new(s.matrix().window()));
    }
    passes(s, e, &WitnessAssignment::new(s.matrix().window()))
}

/// Preperiod and period that decisive pairs must respect.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TailShape {
    pub threshold: u64,
    pub period: u64,
}

impl TailShape {
    pub fn of(m: &Matrix) -> Self {
        TailShape { threshold: m.threshold(), period: m.period() }
    }

    pub fn is_decisive(&self, a: u64, b: u64) -> bool {
        a >= self.threshold && b >= a.saturating_add(self.period)
    }
}

/// Smallest valid decisive pair with `a >= lo`.
fn decisive_pair(p: &NotionParams, tail: TailShape, lo: u64, b_hint: u64) -> Result<Estimator> {
    let a = lo.max(p.a_min).max(tail.threshold);
    let end = a
        .checked_add(tail.period)
        .ok_or(Error::Overflow { what: "decisive bound".into(), cap: p.max_natural })?;
    let b = p.f(a)?.max(end).max(b_hint).max(a + 1);
    if b > p.max_natural {
        return Err(Error::Overflow { what: format!("estimator bound {b}"), cap: p.max_natural });
    }
    Estimator::pair(a, b)
}

/// The canonical decisive estimator of the given level; `offset` shifts the
/// lower ends so that different offsets give different estimators.
pub fn canonical(p: &NotionParams, tail: TailShape, level: u32, offset: u64) -> Result<Estimator> {
    if level == 0 {
        return decisive_pair(p, tail, p.a_min.max(tail.threshold) + offset, 0);
    }
    let n = p.min_elements(level).max(1) as u64;
    let elements = (0..n).map(|j| canonical(p, tail, level - 1, offset + j)).collect::<Result<Vec<_>>>()?;
    Estimator::set(level, elements)
}

/// A uniformly drawn valid estimator of the given level, not necessarily
/// decisive.
pub fn random_valid<R: Rng>(p: &NotionParams, level: u32, rng: &mut R) -> Result<Estimator> {
    if level == 0 {
        let a = p.a_min + rng.gen_range(0..16);
        let fa = p.f(a)?;
        let b = fa.max(a + 1) + rng.gen_range(0..16);
        return Estimator::pair(a, b);
    }
    let lo = p.min_elements(level).max(1);
    let n = rng.gen_range(lo..=lo + 2);
    let elements = (0..n).map(|_| random_valid(p, level - 1, rng)).collect::<Result<Vec<_>>>()?;
    let e = Estimator::set(level, elements)?;
    // Duplicates may have collapsed below the minimum.
    repair_cover(e, p, rng)
}

fn repair_cover<R: Rng>(e: Estimator, p: &NotionParams, rng: &mut R) -> Result<Estimator> {
    let mut e = e;
    while let Estimator::Set { level, elements } = &e {
        if elements.len() >= p.min_elements(*level) {
            break;
        }
        let x = random_valid(p, level - 1, rng)?;
        e = e.add_element(x)?;
    }
    Ok(e)
}

enum Step {
    Done,
    Changed(Estimator),
}

/// One repair step: fix the first defect in depth-first order.
fn repair_step(e: &Estimator, p: &NotionParams, tail: TailShape) -> Result<Step> {
    match e {
        Estimator::Pair { a, b } => {
            if *a >= p.a_min && tail.is_decisive(*a, *b) && is_valid_level0(e, p)? {
                Ok(Step::Done)
            } else {
                Ok(Step::Changed(decisive_pair(p, tail, *a, *b)?))
            }
        }
        Estimator::Set { level, elements } => {
            if elements.len() < p.min_elements(*level).max(1) {
                let mut offset = 0u64;
                loop {
                    let x = canonical(p, tail, level - 1, offset)?;
                    if !elements.contains(&x) {
                        return Ok(Step::Changed(e.add_element(x)?));
                    }
                    offset += 1;
                }
            }
            for x in elements {
                if let Step::Changed(y) = repair_step(x, p, tail)? {
                    let mut next = elements.clone();
                    next.remove(x);
                    next.insert(y);
                    return Ok(Step::Changed(Estimator::Set { level: *level, elements: next }));
                }
            }
            Ok(Step::Done)
        }
    }
}

/// Run the repair loop on `e` until no defect remains.
pub fn repair(e: Estimator, p: &NotionParams, tail: TailShape) -> Result<Estimator> {
    let mut e = e;
    for _ in 0..p.max_iterations {
        match repair_step(&e, p, tail)? {
            Step::Done => return Ok(e),
            Step::Changed(next) => e = next,
        }
    }
    Err(Error::NonConvergence { iterations: p.max_iterations })
}

/// A `p`-valid level-`n` estimator whose verdict on `s` is exact, starting
/// from `seed` (or from an empty set).
pub fn saturate(s: &Sentence, p: &NotionParams, seed: Option<&Estimator>) -> Result<Estimator> {
    let n = s.depth() as u32;
    let tail = TailShape::of(s.matrix());
    let start = match seed {
        Some(e) if e.level() != n => return Err(Error::LevelMismatch { expected: n, found: e.level() }),
        Some(e) => e.clone(),
        None if n == 0 => decisive_pair(p, tail, p.a_min, 0)?,
        None => Estimator::empty(n)?,
    };
    let e = repair(start, p, tail)?;
    if !agrees(s, &e, &mut WitnessAssignment::new(s.matrix().window()))? {
        return Err(Error::NonConvergence { iterations: p.max_iterations });
    }
    Ok(e)
}

/// Every set's elements give the same answer for every pattern, recursively.
fn agrees(s: &Sentence, e: &Estimator, a: &mut WitnessAssignment) -> Result<bool> {
    let Estimator::Set { elements, .. } = e else {
        return Ok(true);
    };
    for pat in 0..pattern_count(a.width) {
        a.push(pat);
        let mut seen: Option<bool> = None;
        let mut ok = true;
        for x in elements {
            let v = passes_rec(s, x, a)?;
            if seen.is_some_and(|w| w != v) || !agrees(s, x, a)? {
                ok = false;
                break;
            }
            seen = Some(v);
        }
        a.pop();
        if !ok {
            return Ok(false);
        }
    }
    Ok(true)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SweepResult {
    pub verdicts: Vec<bool>,
    /// First index from which every verdict equals the last one.
    pub stabilization_index: usize,
}

impl SweepResult {
    pub fn final_verdict(&self) -> Option<bool> {
        self.verdicts.last().copied()
    }
}

/// Whether every level-0 member of `q` is a member of `p`, judged on the
/// probe range.
pub fn is_stricter(q: &NotionParams, p: &NotionParams) -> bool {
    q.a_min >= p.a_min
        && q.rate.dominates_on(&p.rate, RATE_PROBE.start, RATE_PROBE.end)
        && (!q.allow_empty || p.allow_empty)
        && (1..=8).all(|l| q.cover_for(l).min_elements >= p.cover_for(l).min_elements)
}

/// Saturate under each params in turn and report the verdicts.
pub fn stabilization_sweep(s: &Sentence, schedule: &[NotionParams]) -> Result<SweepResult> {
    for (i, w) in schedule.windows(2).enumerate() {
        if !is_stricter(&w[1], &w[0]) {
            return Err(Error::precondition(format!("schedule entry {} is not stricter than entry {i}", i + 1)));
        }
    }
    let mut verdicts = Vec::with_capacity(schedule.len());
    for p in schedule {
        let e = saturate(s, p, None)?;
        verdicts.push(truth_by_estimator(s, &e)?);
    }
    let stabilization_index = match verdicts.last() {
        None => 0,
        Some(last) => verdicts.iter().rposition(|v| v != last).map_or(0, |i| i + 1),
    };
    Ok(SweepResult { verdicts, stabilization_index })
}
