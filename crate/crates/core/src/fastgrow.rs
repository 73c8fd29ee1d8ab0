//! Finite fast-growing sequences and level-k sequences.
//!
//! Three growth conditions are supported for a rate `f`:
//!
//! | variant    | first value     | next value                     |
//! |------------|-----------------|--------------------------------|
//! | `plain`    | `v0 > f(0)`     | `v[i+1] > f(v[i])`             |
//! | `strict`   | `v0 >= f(0)`    | `v[i+1] >= f(v[i])`            |
//! | `monotone` | `v0 >= f(0)`    | `v[i+1] >= f(i+1)`, `v[i+1] > v[i]` |
//!
//! A level-k sequence is a nested list of depth `k` whose leaves are number
//! lists. Its flat expansion obeys `v[i+1] > f^c(v[i])` where `c` is the code
//! of `v[i]` in the integer encoding below, so crossing the end of a deeper
//! block demands a larger jump. For `k = 1` this is the plain condition.
//!
//! The integer encoding maps a level-k sequence with largest value `N` to
//! `g: {0..N} -> {0..k+1}`: `g(x) = 0` when `x` is not in the sequence,
//! otherwise one plus the number of enclosing blocks that end at `x`. The
//! whole sequence counts as such a block for its last value, which therefore
//! gets `k+1`; with [`EndMarker::Extensible`] it is not counted and the last
//! value gets `k`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rate::Rate;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    Plain,
    Strict,
    Monotone,
}

impl std::str::FromStr for Variant {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "plain" => Ok(Variant::Plain),
            "strict" => Ok(Variant::Strict),
            "monotone" => Ok(Variant::Monotone),
            _ => Err(Error::malformed(format!("unknown sequence variant `{s}`"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FastSeq {
    pub values: Vec<u64>,
    pub rate: Rate,
    pub variant: Variant,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Check {
    pub valid: bool,
    pub first_violation: Option<usize>,
}

impl FastSeq {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn get(&self, i: usize) -> Option<u64> {
        self.values.get(i).copied()
    }

    /// Append the smallest admissible value plus `margin - 1`.
    pub fn extend(&mut self, margin: u64, cap: u64) -> Result<()> {
        let v = next_value(&self.rate, self.variant, &self.values, margin, cap)?;
        self.values.push(v);
        Ok(())
    }

    pub fn check(&self) -> Check {
        check_fastseq(&self.values, &self.rate, self.variant)
    }

    /// One value per line.
    pub fn to_lines(&self) -> String {
        self.values.iter().map(|v| format!("{v}\n")).collect()
    }
}

/// Parse a list written one value per line, ignoring blank lines.
pub fn parse_lines(text: &str) -> Result<Vec<u64>> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .map(|l| l.parse().map_err(|_| Error::malformed(format!("not a natural number: `{l}`"))))
        .collect()
}

fn next_value(f: &Rate, variant: Variant, prev: &[u64], margin: u64, cap: u64) -> Result<u64> {
    if margin == 0 {
        return Err(Error::precondition("margin must be at least 1"));
    }
    let i = prev.len() as u64;
    let overflow = || Error::Overflow { what: format!("sequence value #{i}"), cap };
    let base = match (variant, prev.last()) {
        (Variant::Plain, None) => f.apply(0, cap)?.checked_add(1).ok_or_else(overflow)?,
        (Variant::Plain, Some(&p)) => f.apply(p, cap)?.checked_add(1).ok_or_else(overflow)?,
        (Variant::Strict, None) => f.apply(0, cap)?,
        (Variant::Strict, Some(&p)) => f.apply(p, cap)?,
        (Variant::Monotone, None) => f.apply(0, cap)?,
        (Variant::Monotone, Some(&p)) => f.apply(i, cap)?.max(p.checked_add(1).ok_or_else(overflow)?),
    };
    let v = base.checked_add(margin - 1).ok_or_else(overflow)?;
    if v > cap {
        return Err(overflow());
    }
    Ok(v)
}

/// Build a sequence of `length` values, each `margin - 1` above the least
/// admissible value (so `margin = 1` gives the pointwise minimal sequence).
pub fn make_fastseq(f: &Rate, length: usize, variant: Variant, margin: u64, cap: u64) -> Result<FastSeq> {
    if length == 0 {
        return Err(Error::precondition("length must be at least 1"));
    }
    let mut s = FastSeq { values: Vec::with_capacity(length), rate: f.clone(), variant };
    for _ in 0..length {
        s.extend(margin, cap)?;
    }
    Ok(s)
}

fn value_ok(f: &Rate, variant: Variant, prev: Option<u64>, i: usize, v: u64) -> bool {
    let above = |bound: Option<u64>, strict: bool| match bound {
        None => false,
        Some(b) => {
            if strict {
                v > b
            } else {
                v >= b
            }
        }
    };
    match (variant, prev) {
        (Variant::Plain, None) => above(f.try_apply(0), true),
        (Variant::Plain, Some(p)) => above(f.try_apply(p), true),
        (Variant::Strict, None) => above(f.try_apply(0), false),
        (Variant::Strict, Some(p)) => above(f.try_apply(p), false),
        (Variant::Monotone, None) => above(f.try_apply(0), false),
        (Variant::Monotone, Some(p)) => v > p && above(f.try_apply(i as u64), false),
    }
}

/// Validity plus the index of the first value that breaks the condition.
pub fn check_fastseq(values: &[u64], f: &Rate, variant: Variant) -> Check {
    for (i, &v) in values.iter().enumerate() {
        let prev = i.checked_sub(1).map(|j| values[j]);
        if !value_ok(f, variant, prev, i, v) {
            return Check { valid: false, first_violation: Some(i) };
        }
    }
    Check { valid: true, first_violation: None }
}

/// Lengths at each nesting level; a `Leaf(n)` is a level-1 block of `n`
/// numbers.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Shape {
    Leaf(usize),
    Node(Vec<Shape>),
}

impl Shape {
    pub fn depth(&self) -> u32 {
        match self {
            Shape::Leaf(_) => 1,
            Shape::Node(cs) => 1 + cs.first().map_or(0, Shape::depth),
        }
    }

    pub fn flat_len(&self) -> usize {
        match self {
            Shape::Leaf(n) => *n,
            Shape::Node(cs) => cs.iter().map(Shape::flat_len).sum(),
        }
    }

    /// Every block non-empty and every branch of the same depth.
    pub fn validate(&self) -> Result<u32> {
        match self {
            Shape::Leaf(0) => Err(Error::malformed("zero-length block")),
            Shape::Leaf(_) => Ok(1),
            Shape::Node(cs) if cs.is_empty() => Err(Error::malformed("zero-length block")),
            Shape::Node(cs) => {
                let d = cs[0].validate()?;
                for c in &cs[1..] {
                    if c.validate()? != d {
                        return Err(Error::malformed("blocks of unequal depth"));
                    }
                }
                Ok(d + 1)
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Nested {
    Leaf(Vec<u64>),
    Node(Vec<Nested>),
}

impl Nested {
    pub fn shape(&self) -> Shape {
        match self {
            Nested::Leaf(v) => Shape::Leaf(v.len()),
            Nested::Node(cs) => Shape::Node(cs.iter().map(Nested::shape).collect()),
        }
    }

    pub fn flatten(&self) -> Vec<u64> {
        let mut out = Vec::new();
        self.flatten_into(&mut out);
        out
    }

    fn flatten_into(&self, out: &mut Vec<u64>) {
        match self {
            Nested::Leaf(v) => out.extend_from_slice(v),
            Nested::Node(cs) => cs.iter().for_each(|c| c.flatten_into(out)),
        }
    }

    /// For each flat value, how many blocks strictly inside the whole
    /// sequence end there (leaf blocks included).
    fn closing_counts(&self) -> Vec<u32> {
        let mut out = Vec::new();
        self.closings(&mut out, true);
        out
    }

    fn closings(&self, out: &mut Vec<u32>, top: bool) {
        let start = out.len();
        match self {
            Nested::Leaf(v) => out.extend(std::iter::repeat(0).take(v.len())),
            Nested::Node(cs) => cs.iter().for_each(|c| c.closings(out, false)),
        }
        if !top && out.len() > start {
            *out.last_mut().unwrap() += 1;
        }
    }

    fn from_flat(shape: &Shape, values: &mut impl Iterator<Item = u64>) -> Nested {
        match shape {
            Shape::Leaf(n) => Nested::Leaf(values.take(*n).collect()),
            Shape::Node(cs) => Nested::Node(cs.iter().map(|c| Nested::from_flat(c, values)).collect()),
        }
    }
}

impl fmt::Display for Nested {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let items: Vec<String> = match self {
            Nested::Leaf(v) => v.iter().map(u64::to_string).collect(),
            Nested::Node(cs) => cs.iter().map(Nested::to_string).collect(),
        };
        write!(f, "({})", items.join(","))
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EndMarker {
    /// Last value coded `k + 1`.
    #[default]
    Terminal,
    /// Last value coded `k`, so extensions of the sequence extend the code.
    Extensible,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LevelKSeq {
    pub k: u32,
    pub tree: Nested,
    pub rate: Option<Rate>,
}

impl LevelKSeq {
    pub fn new(tree: Nested, rate: Option<Rate>) -> Result<Self> {
        let k = tree.shape().validate()?;
        Ok(LevelKSeq { k, tree, rate })
    }

    pub fn flat(&self) -> Vec<u64> {
        self.tree.flatten()
    }

    /// Per flat value, its code under [`EndMarker::Terminal`].
    pub fn codes(&self) -> Vec<u32> {
        let mut c: Vec<u32> = self.tree.closing_counts().into_iter().map(|n| n + 1).collect();
        if let Some(last) = c.last_mut() {
            *last = self.k + 1;
        }
        c
    }

    /// Violations of the level-wise growth condition, if any, as the index of
    /// the first offending flat value.
    pub fn check_growth(&self) -> Check {
        let Some(f) = &self.rate else {
            return check_increasing(&self.flat());
        };
        let flat = self.flat();
        let codes = self.codes();
        for (i, &v) in flat.iter().enumerate() {
            let bound = match i {
                0 => f.try_apply(0),
                _ => iterate(f, codes[i - 1], flat[i - 1]),
            };
            if bound.map_or(true, |b| v <= b) {
                return Check { valid: false, first_violation: Some(i) };
            }
        }
        Check { valid: true, first_violation: None }
    }
}

fn check_increasing(v: &[u64]) -> Check {
    match v.windows(2).position(|w| w[1] <= w[0]) {
        Some(i) => Check { valid: false, first_violation: Some(i + 1) },
        None => Check { valid: true, first_violation: None },
    }
}

fn iterate(f: &Rate, times: u32, x: u64) -> Option<u64> {
    let mut v = x;
    for _ in 0..times {
        v = f.try_apply(v)?;
    }
    Some(v)
}

/// The minimal level-k sequence of the given shape, each value `margin - 1`
/// above its bound.
pub fn make_levelk(f: &Rate, k: u32, shape: &Shape, margin: u64, cap: u64) -> Result<LevelKSeq> {
    let depth = shape.validate()?;
    if depth != k {
        return Err(Error::LevelMismatch { expected: k, found: depth });
    }
    if margin == 0 {
        return Err(Error::precondition("margin must be at least 1"));
    }
    // Codes depend only on the shape, so compute them from a placeholder.
    let skeleton = Nested::from_flat(shape, &mut std::iter::repeat(0));
    let probe = LevelKSeq { k, tree: skeleton, rate: None };
    let codes = probe.codes();
    let mut flat = Vec::with_capacity(codes.len());
    for i in 0..codes.len() {
        let bound = if i == 0 {
            f.apply(0, cap)?
        } else {
            let mut v = flat[i - 1];
            for _ in 0..codes[i - 1] {
                v = f.apply(v, cap)?;
            }
            v
        };
        let v = bound
            .checked_add(margin)
            .filter(|v| *v <= cap)
            .ok_or_else(|| Error::Overflow { what: format!("level-{k} value #{i}"), cap })?;
        flat.push(v);
    }
    let tree = Nested::from_flat(shape, &mut flat.into_iter());
    Ok(LevelKSeq { k, tree, rate: Some(f.clone()) })
}

/// Upper limit on encoding length, i.e. on the largest value plus one.
pub const MAX_ENCODING_LEN: u64 = 1 << 24;

pub fn encode_levelk(s: &LevelKSeq, marker: EndMarker) -> Result<Vec<u32>> {
    let flat = s.flat();
    if let Some(i) = check_increasing(&flat).first_violation {
        return Err(Error::malformed(format!("flat value #{i} is not above its predecessor")));
    }
    let max = *flat.last().ok_or_else(|| Error::malformed("empty sequence"))?;
    if max >= MAX_ENCODING_LEN {
        return Err(Error::Budget(format!("encoding length {} exceeds {MAX_ENCODING_LEN}", max + 1)));
    }
    let mut g = vec![0u32; max as usize + 1];
    let mut codes = s.codes();
    if marker == EndMarker::Extensible {
        *codes.last_mut().unwrap() = s.k;
    }
    for (v, c) in flat.iter().zip(codes) {
        g[*v as usize] = c;
    }
    Ok(g)
}

/// Inverse of [`encode_levelk`]: recovers the tree (values are the positions
/// with a non-zero code).
pub fn decode_levelk(g: &[u32], k: u32, marker: EndMarker) -> Result<LevelKSeq> {
    if k == 0 {
        return Err(Error::malformed("level must be at least 1"));
    }
    let terminal = match marker {
        EndMarker::Terminal => k + 1,
        EndMarker::Extensible => k,
    };
    let Some(&last) = g.last() else {
        return Err(Error::malformed("empty code"));
    };
    if last != terminal {
        return Err(Error::malformed(format!("code must end with {terminal}, found {last}")));
    }
    let body = &g[..g.len() - 1];
    if let Some((i, c)) = body.iter().enumerate().find(|(_, c)| **c > k) {
        return Err(Error::malformed(format!("code {c} at position {i} exceeds {k}")));
    }
    // Build bottom-up: a stack of open blocks per level.
    let mut levels: Vec<Vec<Nested>> = vec![Vec::new(); k as usize];
    let mut leaf: Vec<u64> = Vec::new();
    for (x, &c) in g.iter().enumerate() {
        if c == 0 {
            continue;
        }
        leaf.push(x as u64);
        let closes = if x + 1 == g.len() { k } else { c - 1 };
        if closes >= 1 {
            levels[0].push(Nested::Leaf(std::mem::take(&mut leaf)));
        }
        for lvl in 1..closes as usize {
            let block = std::mem::take(&mut levels[lvl - 1]);
            levels[lvl].push(Nested::Node(block));
        }
    }
    let top = levels.pop().and_then(|mut v| v.pop()).ok_or_else(|| Error::malformed("no complete block"))?;
    LevelKSeq::new(top, None)
}
