//! Normal-form second-order sentences over a decidable matrix class.
//!
//! A sentence is `Q1 X1 … Qn Xn ∀x ∃y>x P(y, X1..Xn)`. The matrix `P` is a
//! boolean combination of three kinds of atoms:
//!
//! * `X(j)`: bit `j` of a set variable, with `j` below the window width,
//! * `y >= t`: a threshold on the tail variable,
//! * `y % m = r`: a residue of the tail variable.
//!
//! Because `P` only reads a finite window of every set variable and depends
//! on `y` only through `(y >= t, y mod m)`, it is eventually periodic in `y`,
//! and both the tail `∀x∃y>x P` and the set quantifiers are decided exactly by
//! finite enumeration. That is what [`brute_truth`] does.

mod parse;

use std::fmt;

use serde::{Deserialize, Serialize};

pub use parse::{parse_sentence, parse_sentence_with, render_sentence, ParseOptions};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Quantifier {
    Exists,
    Forall,
}

impl Quantifier {
    pub fn dual(self) -> Self {
        match self {
            Quantifier::Exists => Quantifier::Forall,
            Quantifier::Forall => Quantifier::Exists,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Atom {
    /// Bit `index` of the set variable bound at prefix position `var`.
    Bit { var: usize, index: u32 },
    AtLeast(u64),
    Residue { modulus: u64, residue: u64 },
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Expr {
    Const(bool),
    Atom(Atom),
    Not(Box<Expr>),
    And(Box<Expr>, Box<Expr>),
    Or(Box<Expr>, Box<Expr>),
    Implies(Box<Expr>, Box<Expr>),
    Iff(Box<Expr>, Box<Expr>),
}

impl Expr {
    pub fn bit(var: usize, index: u32) -> Self {
        Expr::Atom(Atom::Bit { var, index })
    }

    pub fn at_least(t: u64) -> Self {
        Expr::Atom(Atom::AtLeast(t))
    }

    pub fn residue(modulus: u64, residue: u64) -> Self {
        Expr::Atom(Atom::Residue { modulus, residue })
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(e: Expr) -> Self {
        Expr::Not(Box::new(e))
    }

    pub fn and(a: Expr, b: Expr) -> Self {
        Expr::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Expr, b: Expr) -> Self {
        Expr::Or(Box::new(a), Box::new(b))
    }

    pub fn implies(a: Expr, b: Expr) -> Self {
        Expr::Implies(Box::new(a), Box::new(b))
    }

    pub fn iff(a: Expr, b: Expr) -> Self {
        Expr::Iff(Box::new(a), Box::new(b))
    }

    fn eval(&self, y: u64, patterns: &[u64]) -> Result<bool> {
        Ok(match self {
            Expr::Const(b) => *b,
            Expr::Atom(Atom::Bit { var, index }) => {
                let p = patterns.get(*var).ok_or(Error::MissingVariable(*var))?;
                (p >> index) & 1 == 1
            }
            Expr::Atom(Atom::AtLeast(t)) => y >= *t,
            Expr::Atom(Atom::Residue { modulus, residue }) => y % modulus == *residue,
            Expr::Not(e) => !e.eval(y, patterns)?,
            Expr::And(a, b) => a.eval(y, patterns)? && b.eval(y, patterns)?,
            Expr::Or(a, b) => a.eval(y, patterns)? || b.eval(y, patterns)?,
            Expr::Implies(a, b) => !a.eval(y, patterns)? || b.eval(y, patterns)?,
            Expr::Iff(a, b) => a.eval(y, patterns)? == b.eval(y, patterns)?,
        })
    }

    fn visit_atoms(&self, f: &mut impl FnMut(&Atom)) {
        match self {
            Expr::Const(_) => {}
            Expr::Atom(a) => f(a),
            Expr::Not(e) => e.visit_atoms(f),
            Expr::And(a, b) | Expr::Or(a, b) | Expr::Implies(a, b) | Expr::Iff(a, b) => {
                a.visit_atoms(f);
                b.visit_atoms(f);
            }
        }
    }

    /// Replace every tail atom by its value at `y`.
    fn substitute_tail(&self, y: u64) -> Expr {
        match self {
            Expr::Atom(Atom::AtLeast(t)) => Expr::Const(y >= *t),
            Expr::Atom(Atom::Residue { modulus, residue }) => Expr::Const(y % modulus == *residue),
            Expr::Const(_) | Expr::Atom(_) => self.clone(),
            Expr::Not(e) => Expr::not(e.substitute_tail(y)),
            Expr::And(a, b) => Expr::and(a.substitute_tail(y), b.substitute_tail(y)),
            Expr::Or(a, b) => Expr::or(a.substitute_tail(y), b.substitute_tail(y)),
            Expr::Implies(a, b) => Expr::implies(a.substitute_tail(y), b.substitute_tail(y)),
            Expr::Iff(a, b) => Expr::iff(a.substitute_tail(y), b.substitute_tail(y)),
        }
    }

    /// Constant folding.
    fn simplify(self) -> Expr {
        use Expr::*;
        match self {
            Not(e) => match e.simplify() {
                Const(b) => Const(!b),
                Not(inner) => *inner,
                e => Expr::not(e),
            },
            And(a, b) => match (a.simplify(), b.simplify()) {
                (Const(false), _) | (_, Const(false)) => Const(false),
                (Const(true), e) | (e, Const(true)) => e,
                (a, b) => Expr::and(a, b),
            },
            Or(a, b) => match (a.simplify(), b.simplify()) {
                (Const(true), _) | (_, Const(true)) => Const(true),
                (Const(false), e) | (e, Const(false)) => e,
                (a, b) => Expr::or(a, b),
            },
            Implies(a, b) => match (a.simplify(), b.simplify()) {
                (Const(false), _) | (_, Const(true)) => Const(true),
                (Const(true), e) => e,
                (e, Const(false)) => Expr::not(e).simplify(),
                (a, b) => Expr::implies(a, b),
            },
            Iff(a, b) => match (a.simplify(), b.simplify()) {
                (Const(x), Const(y)) => Const(x == y),
                (Const(true), e) | (e, Const(true)) => e,
                (Const(false), e) | (e, Const(false)) => Expr::not(e).simplify(),
                (a, b) => Expr::iff(a, b),
            },
            e => e,
        }
    }
}

/// The quantifier-free body `P` together with its derived tail structure.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Matrix {
    expr: Expr,
    vars: usize,
    window: u32,
    threshold: u64,
    period: u64,
}

impl Matrix {
    /// `vars` is the number of set variables in scope. The window is widened
    /// to cover every bit atom if `window` is smaller.
    pub fn new(expr: Expr, vars: usize, window: u32) -> Result<Self> {
        let mut max_bit: Option<u32> = None;
        let mut threshold = 0u64;
        let mut period = 1u64;
        let mut bad: Option<Error> = None;
        expr.visit_atoms(&mut |a| match a {
            Atom::Bit { var, index } => {
                if *var >= vars {
                    bad.get_or_insert(Error::OutOfClass(format!("bit atom references unbound set variable #{var}")));
                }
                if *index >= 64 {
                    bad.get_or_insert(Error::OutOfClass(format!("bit index {index} exceeds 63")));
                }
                max_bit = Some(max_bit.map_or(*index, |m| m.max(*index)));
            }
            Atom::AtLeast(t) => threshold = threshold.max(*t),
            Atom::Residue { modulus, residue } => {
                if *modulus == 0 {
                    bad.get_or_insert(Error::OutOfClass("zero period in residue atom".into()));
                } else if residue >= modulus {
                    bad.get_or_insert(Error::OutOfClass(format!("residue {residue} not below modulus {modulus}")));
                } else {
                    match lcm(period, *modulus) {
                        Some(l) => period = l,
                        None => {
                            bad.get_or_insert(Error::OutOfClass("period overflows".into()));
                        }
                    }
                }
            }
        });
        if let Some(e) = bad {
            return Err(e);
        }
        let window = window.max(max_bit.map_or(0, |m| m + 1));
        Ok(Matrix { expr, vars, window, threshold, period })
    }

    pub fn expr(&self) -> &Expr {
        &self.expr
    }

    pub fn vars(&self) -> usize {
        self.vars
    }

    /// Number of window bits `0..w` per set variable.
    pub fn window(&self) -> u32 {
        self.window
    }

    /// Preperiod `t`: tail atoms are constant in `y` modulo `period` for `y >= t`.
    pub fn threshold(&self) -> u64 {
        self.threshold
    }

    pub fn period(&self) -> u64 {
        self.period
    }

    /// Smallest `b` such that scanning `[a, b)` sees every residue past the
    /// preperiod, so the scan result equals the tail truth.
    pub fn decisive_bound(&self, a: u64) -> Option<u64> {
        a.max(self.threshold).checked_add(self.period)
    }

    /// Exact complement of the tail: the returned matrix `N` satisfies
    /// `tail_truth(N, a) == !tail_truth(self, a)` for every assignment.
    ///
    /// `¬∀x∃y>x P` is `∃x∀y>x ¬P`, which for an eventually periodic `P` says
    /// `¬P` holds on every residue past the preperiod. That is a condition on
    /// the window bits alone, so it is again a (y-free) matrix of the class.
    pub fn complement_tail(&self) -> Matrix {
        let t = self.threshold;
        let mut acc = Expr::Const(true);
        for y in t..t + self.period {
            acc = Expr::and(acc, Expr::not(self.expr.substitute_tail(y)));
        }
        Matrix {
            expr: acc.simplify(),
            vars: self.vars,
            window: self.window,
            threshold: 0,
            period: 1,
        }
    }
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn lcm(a: u64, b: u64) -> Option<u64> {
    (a / gcd(a, b)).checked_mul(b)
}

/// Window patterns for (a prefix of) the set variables. Bit `j` of
/// `patterns[i]` is the value of `X_i(j)`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct WitnessAssignment {
    pub width: u32,
    pub patterns: Vec<u64>,
}

impl WitnessAssignment {
    pub fn new(width: u32) -> Self {
        WitnessAssignment { width, patterns: Vec::new() }
    }

    pub fn with_patterns(width: u32, patterns: Vec<u64>) -> Self {
        WitnessAssignment { width, patterns }
    }

    pub fn len(&self) -> usize {
        self.patterns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.patterns.is_empty()
    }

    pub(crate) fn push(&mut self, p: u64) {
        self.patterns.push(p);
    }

    pub(crate) fn pop(&mut self) {
        self.patterns.pop();
    }
}

/// Number of distinct window patterns of the given width.
pub(crate) fn pattern_count(width: u32) -> u64 {
    1u64 << width
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Sentence {
    prefix: Vec<(Quantifier, String)>,
    tail_var: String,
    matrix: Matrix,
    source: String,
}

impl Sentence {
    pub fn new(prefix: Vec<(Quantifier, String)>, tail_var: impl Into<String>, matrix: Matrix) -> Result<Self> {
        if matrix.vars() != prefix.len() {
            return Err(Error::OutOfClass(format!(
                "matrix expects {} set variables, prefix binds {}",
                matrix.vars(),
                prefix.len()
            )));
        }
        let mut s = Sentence { prefix, tail_var: tail_var.into(), matrix, source: String::new() };
        s.source = render_sentence(&s);
        Ok(s)
    }

    pub(crate) fn with_source(mut self, source: &str) -> Self {
        self.source = source.to_owned();
        self
    }

    pub fn prefix(&self) -> &[(Quantifier, String)] {
        &self.prefix
    }

    pub fn depth(&self) -> usize {
        self.prefix.len()
    }

    pub fn tail_var(&self) -> &str {
        &self.tail_var
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    /// A size measure used as the default minimum for estimator lower ends:
    /// the larger of the rendered length and the tail's decisive span.
    pub fn size(&self) -> u64 {
        let text = render_sentence(self).len() as u64;
        text.max(self.matrix.threshold() + self.matrix.period())
    }

    /// The negation, in normal form: the prefix is dualized and the tail is
    /// replaced by its exact complement.
    pub fn negate(&self) -> Sentence {
        let prefix = self.prefix.iter().map(|(q, v)| (q.dual(), v.clone())).collect();
        let mut s = Sentence {
            prefix,
            tail_var: self.tail_var.clone(),
            matrix: self.matrix.complement_tail(),
            source: String::new(),
        };
        s.source = render_sentence(&s);
        s
    }

    /// Rename the set variable at `position`.
    pub fn rename_var(&self, position: usize, name: &str) -> Result<Sentence> {
        if self.prefix.iter().enumerate().any(|(i, (_, v))| i != position && v == name) {
            return Err(Error::OutOfClass(format!("variable `{name}` already bound")));
        }
        let mut s = self.clone();
        let slot = s
            .prefix
            .get_mut(position)
            .ok_or(Error::IndexOutOfBounds { index: position, len: self.prefix.len() })?;
        slot.1 = name.to_owned();
        s.source = render_sentence(&s);
        Ok(s)
    }
}

impl fmt::Display for Sentence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&render_sentence(self))
    }
}

/// Value of `P` at `y` under the given window patterns.
pub fn eval_matrix(m: &Matrix, y: u64, a: &WitnessAssignment) -> Result<bool> {
    if a.patterns.len() < m.vars() {
        return Err(Error::MissingVariable(a.patterns.len()));
    }
    m.expr.eval(y, &a.patterns)
}

/// Whether `P(y, a)` holds for arbitrarily large `y`.
pub fn tail_truth(m: &Matrix, a: &WitnessAssignment) -> Result<bool> {
    let t = m.threshold();
    for y in t..t + m.period() {
        if eval_matrix(m, y, a)? {
            return Ok(true);
        }
    }
    Ok(false)
}

/// Whether some `y` in `[lo, hi)` satisfies `P`. Scans at most one full period
/// past the preperiod, which is exact by eventual periodicity.
pub(crate) fn scan_interval(m: &Matrix, lo: u64, hi: u64, a: &WitnessAssignment) -> Result<bool> {
    let end = m.decisive_bound(lo).map_or(hi, |d| d.min(hi));
    for y in lo..end {
        if eval_matrix(m, y, a)? {
            return Ok(true);
        }
    }
    Ok(false)
}

/// Exact truth by exhaustive search over all window patterns.
///
/// Refuses (rather than approximates) when `depth * window` exceeds
/// `max_bits`.
pub fn brute_truth(s: &Sentence, max_bits: u32) -> Result<bool> {
    let w = s.matrix().window();
    let bits = (s.depth() as u64) * u64::from(w);
    if bits > u64::from(max_bits) || w >= 64 {
        return Err(Error::Budget(format!(
            "brute force needs {bits} pattern bits, budget is {max_bits}"
        )));
    }
    let mut a = WitnessAssignment::new(w);
    brute_rec(s, &mut a)
}

fn brute_rec(s: &Sentence, a: &mut WitnessAssignment) -> Result<bool> {
    let depth = a.len();
    let Some((q, _)) = s.prefix().get(depth) else {
        return tail_truth(s.matrix(), a);
    };
    let want = matches!(q, Quantifier::Exists);
    for p in 0..pattern_count(a.width) {
        a.push(p);
        let r = brute_rec(s, a);
        a.pop();
        if r? == want {
            return Ok(want);
        }
    }
    Ok(!want)
}
