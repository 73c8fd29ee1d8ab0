//! Determinacy games over an ambient estimator.
//!
//! Players alternate bits `X0, Y0, X1, Y1, ...`. With `s` of level `k + 2`,
//! the first player's condition is `∀t ∈ s ∃u ∈ t P(u, X, Y)` and the
//! second player's is `∀t ∈ s ∃u ∈ t ¬P(u, X, Y)`. A play meeting exactly
//! one condition is a win for that player; otherwise it is a draw.

use serde::{Deserialize, Serialize};

use super::{GameSpec, Outcome};
use crate::error::{Error, Result};
use crate::estimators::{saturate, CoverRule, Estimator, NotionParams};
use crate::formulas::parse_sentence;
use crate::rate::Rate;

pub const MAX_BITLEN: usize = 8;
pub const MAX_CLASSIFY_BITLEN: usize = 4;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EstFeature {
    /// Smallest lower end over all leaves.
    MinA,
    /// Largest upper end over all leaves.
    MaxB,
    Size,
    /// Byte sum of the text form.
    SerialSum,
}

impl EstFeature {
    pub fn of(self, e: &Estimator) -> u64 {
        match self {
            EstFeature::MinA => e.leaves().iter().map(|l| l.0).min().unwrap_or(0),
            EstFeature::MaxB => e.leaves().iter().map(|l| l.1).max().unwrap_or(0),
            EstFeature::Size => e.node_count() as u64,
            EstFeature::SerialSum => e.to_string().bytes().map(u64::from).sum(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EstPredicate {
    Const(bool),
    /// Bit of `X`; false past the bit length.
    X(usize),
    Y(usize),
    Not(Box<EstPredicate>),
    And(Box<EstPredicate>, Box<EstPredicate>),
    Or(Box<EstPredicate>, Box<EstPredicate>),
    Xor(Box<EstPredicate>, Box<EstPredicate>),
    /// `then` when the feature is at least `threshold`, else `otherwise`.
    Gate { feature: EstFeature, threshold: u64, then: Box<EstPredicate>, otherwise: Box<EstPredicate> },
    FeatureParity(EstFeature),
}

impl EstPredicate {
    pub fn not(p: EstPredicate) -> Self {
        EstPredicate::Not(Box::new(p))
    }

    pub fn and(p: EstPredicate, q: EstPredicate) -> Self {
        EstPredicate::And(Box::new(p), Box::new(q))
    }

    pub fn or(p: EstPredicate, q: EstPredicate) -> Self {
        EstPredicate::Or(Box::new(p), Box::new(q))
    }

    pub fn xor(p: EstPredicate, q: EstPredicate) -> Self {
        EstPredicate::Xor(Box::new(p), Box::new(q))
    }

    /// Gate on `MinA`, falling back to serialization parity below the
    /// threshold.
    pub fn gated(threshold: u64, then: EstPredicate) -> Self {
        EstPredicate::Gate {
            feature: EstFeature::MinA,
            threshold,
            then: Box::new(then),
            otherwise: Box::new(EstPredicate::FeatureParity(EstFeature::SerialSum)),
        }
    }

    pub fn eval(&self, n: &Estimator, x: &[bool], y: &[bool]) -> bool {
        use EstPredicate::*;
        match self {
            Const(b) => *b,
            X(i) => x.get(*i).copied().unwrap_or(false),
            Y(i) => y.get(*i).copied().unwrap_or(false),
            Not(p) => !p.eval(n, x, y),
            And(p, q) => p.eval(n, x, y) && q.eval(n, x, y),
            Or(p, q) => p.eval(n, x, y) || q.eval(n, x, y),
            Xor(p, q) => p.eval(n, x, y) != q.eval(n, x, y),
            Gate { feature, threshold, then, otherwise } => {
                if feature.of(n) >= *threshold {
                    then.eval(n, x, y)
                } else {
                    otherwise.eval(n, x, y)
                }
            }
            FeatureParity(f) => f.of(n) % 2 == 1,
        }
    }

    /// Least lower end that makes every `MinA`/`MaxB` gate take its `then`
    /// branch; estimators with all lower ends at or above it are
    /// sufficiently good for this predicate.
    pub fn goodness_bound(&self) -> u64 {
        use EstPredicate::*;
        match self {
            Const(_) | X(_) | Y(_) | FeatureParity(_) => 0,
            Not(p) => p.goodness_bound(),
            And(p, q) | Or(p, q) | Xor(p, q) => p.goodness_bound().max(q.goodness_bound()),
            Gate { feature, threshold, then, otherwise } => {
                let own = match feature {
                    EstFeature::MinA | EstFeature::MaxB => *threshold,
                    _ => 0,
                };
                own.max(then.goodness_bound()).max(otherwise.goodness_bound())
            }
        }
    }
}

fn second_level(s: &Estimator) -> Result<Vec<Vec<&Estimator>>> {
    if s.level() < 2 {
        return Err(Error::LevelMismatch { expected: 2, found: s.level() });
    }
    Ok(s.elements().unwrap().iter().map(|t| t.elements().unwrap().iter().collect()).collect())
}

fn conditions(p: &EstPredicate, groups: &[Vec<&Estimator>], x: &[bool], y: &[bool]) -> (bool, bool) {
    let first = groups.iter().all(|t| t.iter().any(|u| p.eval(u, x, y)));
    let second = groups.iter().all(|t| t.iter().any(|u| !p.eval(u, x, y)));
    (first, second)
}

fn classify(first: bool, second: bool) -> Outcome {
    match (first, second) {
        (true, false) => Outcome::FirstWins,
        (false, true) => Outcome::SecondWins,
        _ => Outcome::Draw,
    }
}

fn split(play: &[usize]) -> (Vec<bool>, Vec<bool>) {
    let x = play.iter().step_by(2).map(|&b| b == 1).collect();
    let y = play.iter().skip(1).step_by(2).map(|&b| b == 1).collect();
    (x, y)
}

/// Sentence whose saturated estimators serve as the ambient `s`.
pub const AMBIENT_SENTENCE: &str = "AA X. EX Y. AA Z. AA y. X(0) | !X(0)";

/// Saturated level-3 estimator for [`AMBIENT_SENTENCE`] with every leaf at or
/// above `a_min`, rate `2(x+1)` and covers of 2, 2 and 3 elements.
pub fn ambient_estimator(a_min: u64) -> Result<Estimator> {
    let cover = [2, 2, 3].map(|m| CoverRule { min_elements: m }).to_vec();
    let p = NotionParams::new(a_min, Rate::linear(2))?.with_cover(cover);
    saturate(&parse_sentence(AMBIENT_SENTENCE)?, &p, None)
}

fn check_bitlen(bitlen: usize, max: usize) -> Result<()> {
    if bitlen > max {
        return Err(Error::Budget(format!("bit length {bitlen} exceeds {max}")));
    }
    Ok(())
}

pub fn build_estimator_game(p: &EstPredicate, s: &Estimator, bitlen: usize) -> Result<GameSpec> {
    check_bitlen(bitlen, MAX_BITLEN)?;
    let groups: Vec<Vec<Estimator>> =
        second_level(s)?.into_iter().map(|t| t.into_iter().cloned().collect()).collect();
    let p = p.clone();
    Ok(GameSpec::new(
        format!("estimator:{bitlen}"),
        2 * bitlen,
        |_| 2,
        move |play| {
            let refs: Vec<Vec<&Estimator>> = groups.iter().map(|t| t.iter().collect()).collect();
            let (x, y) = split(play);
            let (a, b) = conditions(&p, &refs, &x, &y);
            classify(a, b)
        },
    ))
}

fn all_bits(bitlen: usize) -> impl Iterator<Item = Vec<bool>> {
    (0u32..1 << bitlen).map(move |v| (0..bitlen).map(|i| v >> i & 1 == 1).collect())
}

/// Whether for every bounded `X, Y` some element of `s` has elements that
/// all agree on `P`.
pub fn check_well_behaved(p: &EstPredicate, s: &Estimator, bitlen: usize) -> Result<bool> {
    check_bitlen(bitlen, MAX_BITLEN)?;
    let groups = second_level(s)?;
    for x in all_bits(bitlen) {
        for y in all_bits(bitlen) {
            let uniform = groups.iter().any(|t| {
                let mut vals = t.iter().map(|u| p.eval(u, &x, &y));
                match vals.next() {
                    None => true,
                    Some(v) => vals.all(|w| w == v),
                }
            });
            if !uniform {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Every complete play as `(X, Y, outcome)`, ordered by `X` then `Y`.
pub fn classify_plays(p: &EstPredicate, s: &Estimator, bitlen: usize) -> Result<Vec<(Vec<bool>, Vec<bool>, Outcome)>> {
    check_bitlen(bitlen, MAX_CLASSIFY_BITLEN)?;
    let groups = second_level(s)?;
    let mut out = Vec::new();
    for x in all_bits(bitlen) {
        for y in all_bits(bitlen) {
            let (a, b) = conditions(p, &groups, &x, &y);
            out.push((x.clone(), y, classify(a, b)));
        }
    }
    Ok(out)
}

/// Predicates that depend on their estimator argument only below a gate.
pub fn well_behaved_corpus(threshold: u64) -> Vec<(String, EstPredicate)> {
    use EstPredicate::*;
    let x = |i| X(i);
    let y = |i| Y(i);
    let inner = vec![
        ("x0", x(0)),
        ("not_y0", EstPredicate::not(y(0))),
        ("x0_and_not_y0", EstPredicate::and(x(0), EstPredicate::not(y(0)))),
        ("x0_xor_y0", EstPredicate::xor(x(0), y(0))),
        ("x1_or_y0", EstPredicate::or(x(1), y(0))),
        ("pairs_meet", EstPredicate::and(EstPredicate::or(x(0), y(0)), EstPredicate::or(x(1), y(1)))),
        ("parity3", EstPredicate::xor(EstPredicate::xor(x(0), y(0)), x(1))),
        (
            "either_pair",
            EstPredicate::or(EstPredicate::and(x(0), y(0)), EstPredicate::and(EstPredicate::not(x(1)), y(1))),
        ),
        ("const_true", Const(true)),
        ("match_last", EstPredicate::not(EstPredicate::xor(y(1), x(1)))),
        ("x2_or_not_y1", EstPredicate::or(x(2), EstPredicate::not(y(1)))),
        ("majority", EstPredicate::or(EstPredicate::and(x(0), x(1)), EstPredicate::and(x(2), EstPredicate::not(y(2))))),
    ];
    inner.into_iter().map(|(name, p)| (format!("gated_{name}"), EstPredicate::gated(threshold, p))).collect()
}

/// Parity of the smallest lower end: differs between neighbouring canonical
/// estimators, so neither player can win.
pub fn negative_control() -> (String, EstPredicate) {
    ("min_a_parity".into(), EstPredicate::FeatureParity(EstFeature::MinA))
}

#[cfg(test)]
mod tests {
    use super::super::{solve, DEFAULT_NODE_BUDGET};
    use super::*;
    use crate::estimators::{canonical, TailShape};

    fn ambient(a_min: u64) -> Estimator {
        ambient_estimator(a_min).unwrap()
    }

    #[test]
    fn ambient_is_canonical() {
        let cover = vec![CoverRule { min_elements: 2 }, CoverRule { min_elements: 2 }, CoverRule { min_elements: 3 }];
        let p = NotionParams::new(4, Rate::linear(2)).unwrap().with_cover(cover);
        let c = canonical(&p, TailShape { threshold: 0, period: 1 }, 3, 0).unwrap();
        assert_eq!(ambient(4).level(), 3);
        assert_eq!(ambient(4), c);
    }

    #[test]
    fn constant_true_is_a_first_player_win_everywhere() {
        let s = ambient(4);
        for (_, _, o) in classify_plays(&EstPredicate::Const(true), &s, 2).unwrap() {
            assert_eq!(o, Outcome::FirstWins);
        }
    }

    #[test]
    fn x0_is_won_by_setting_x0() {
        let s = ambient(4);
        let g = build_estimator_game(&EstPredicate::X(0), &s, 2).unwrap();
        let sol = solve(&g, DEFAULT_NODE_BUDGET).unwrap();
        assert_eq!(sol.value, Outcome::FirstWins);
        assert_eq!(sol.strategy.get(&Vec::new()), Some(&1));
    }

    #[test]
    fn corpus_is_well_behaved_and_determined() {
        let corpus = well_behaved_corpus(4);
        assert!(corpus.len() >= 10);
        for (name, p) in corpus {
            let s = ambient(p.goodness_bound());
            assert!(check_well_behaved(&p, &s, 3).unwrap(), "{name}");
            let g = build_estimator_game(&p, &s, 3).unwrap();
            assert_ne!(solve(&g, DEFAULT_NODE_BUDGET).unwrap().value, Outcome::Draw, "{name}");
        }
    }

    #[test]
    fn negative_control_draws() {
        let (_, p) = negative_control();
        let s = ambient(4);
        assert!(!check_well_behaved(&p, &s, 2).unwrap());
        let g = build_estimator_game(&p, &s, 2).unwrap();
        assert_eq!(solve(&g, DEFAULT_NODE_BUDGET).unwrap().value, Outcome::Draw);
    }

    #[test]
    fn estimator_blind_predicates_are_well_behaved() {
        let s = ambient(0);
        assert!(check_well_behaved(&EstPredicate::xor(EstPredicate::X(0), EstPredicate::Y(1)), &s, 2).unwrap());
    }

    #[test]
    fn level_and_bitlen_limits() {
        let pair = Estimator::pair(1, 5).unwrap();
        assert!(build_estimator_game(&EstPredicate::Const(true), &pair, 1).is_err());
        assert!(classify_plays(&EstPredicate::Const(true), &ambient(0), 5).is_err());
    }
}
