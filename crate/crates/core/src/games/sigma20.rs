//! Bounded games with a Σ⁰₂ winning condition.
//!
//! The move at ply `p` must be below `g(2p)` (and below a global move cap),
//! and the first player wins a play iff `∃m ∀n < g(2m+1) φ(m, n, play)`
//! with `m` ranging over ply indices.

use serde::{Deserialize, Serialize};

use super::{GameSpec, Outcome};
use crate::error::{Error, Result};

pub const DEFAULT_MOVE_CAP: u64 = 4;

/// Catalog of decidable predicates `φ(m, n, play)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phi {
    True,
    False,
    /// `m` is a first-player ply whose move the second player repeats at
    /// some later ply. Does not depend on `n`.
    Echo,
    /// `m` is a first-player ply and its move is at least the second
    /// player's move at ply `m + 1 + 2n` (vacuous past the end).
    Dominate,
    /// The sum of the first `m + n + 1` moves is even.
    EvenSum,
    /// `m` is a first-player ply with a move of at least the given value.
    Threshold(usize),
}

impl Phi {
    pub fn catalog() -> Vec<Phi> {
        vec![Phi::True, Phi::False, Phi::Echo, Phi::Dominate, Phi::EvenSum, Phi::Threshold(2), Phi::Threshold(3)]
    }

    pub fn name(&self) -> String {
        match self {
            Phi::True => "true".into(),
            Phi::False => "false".into(),
            Phi::Echo => "echo".into(),
            Phi::Dominate => "dominate".into(),
            Phi::EvenSum => "even_sum".into(),
            Phi::Threshold(t) => format!("threshold{t}"),
        }
    }

    pub fn eval(&self, m: usize, n: usize, play: &[usize]) -> bool {
        let first_ply = m % 2 == 0 && m < play.len();
        match *self {
            Phi::True => true,
            Phi::False => false,
            Phi::Echo => first_ply && play.iter().skip(m + 1).step_by(2).any(|&x| x == play[m]),
            Phi::Dominate => {
                let j = m + 1 + 2 * n;
                first_ply && (j >= play.len() || play[m] >= play[j])
            }
            Phi::EvenSum => play.iter().take(m + n + 1).sum::<usize>() % 2 == 0,
            Phi::Threshold(t) => first_ply && play[m] >= t,
        }
    }
}

impl std::str::FromStr for Phi {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        if let Some(t) = s.strip_prefix("threshold") {
            return t.parse().map(Phi::Threshold).map_err(|_| Error::malformed(format!("bad threshold in `{s}`")));
        }
        match s {
            "true" => Ok(Phi::True),
            "false" => Ok(Phi::False),
            "echo" => Ok(Phi::Echo),
            "dominate" => Ok(Phi::Dominate),
            "even_sum" => Ok(Phi::EvenSum),
            _ => Err(Error::malformed(format!("unknown predicate `{s}`"))),
        }
    }
}

/// Truncated game for `φ` with `horizon` plies.
///
/// `n` is additionally capped at `horizon + 1`; every catalog predicate is
/// constant in `n` beyond that point, so the cap does not change payoffs.
pub fn build_sigma20_game(phi: Phi, g: &[u64], horizon: usize, move_cap: u64) -> Result<GameSpec> {
    if g.len() < 2 * horizon {
        return Err(Error::precondition(format!("g has {} values, horizon {horizon} needs {}", g.len(), 2 * horizon)));
    }
    if move_cap == 0 {
        return Err(Error::precondition("move cap must be positive"));
    }
    if let Some(p) = (0..horizon).find(|&p| g[2 * p] == 0) {
        return Err(Error::precondition(format!("g({}) = 0 leaves no legal move", 2 * p)));
    }
    let bounds: Vec<usize> = (0..horizon).map(|p| g[2 * p].min(move_cap) as usize).collect();
    let spans: Vec<usize> = (0..horizon).map(|m| g[2 * m + 1].min(horizon as u64 + 1) as usize).collect();
    Ok(GameSpec::new(
        format!("sigma20:{}:{horizon}", phi.name()),
        horizon,
        move |h| bounds[h.len()],
        move |play| {
            let wins = (0..spans.len()).any(|m| (0..spans[m]).all(|n| phi.eval(m, n, play)));
            if wins {
                Outcome::FirstWins
            } else {
                Outcome::SecondWins
            }
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::super::{solve, Game, DEFAULT_NODE_BUDGET};
    use super::*;
    use crate::fastgrow::{make_fastseq, Variant};
    use crate::rate::Rate;

    fn g(margin: u64, len: usize) -> Vec<u64> {
        make_fastseq(&Rate::linear(2), len, Variant::Plain, margin, u64::MAX).unwrap().values
    }

    fn winner(phi: Phi, margin: u64, horizon: usize) -> Outcome {
        let game = build_sigma20_game(phi, &g(margin, 2 * horizon), horizon, DEFAULT_MOVE_CAP).unwrap();
        solve(&game, DEFAULT_NODE_BUDGET).unwrap().value
    }

    #[test]
    fn constant_predicates() {
        assert_eq!(winner(Phi::True, 1, 4), Outcome::FirstWins);
        assert_eq!(winner(Phi::False, 1, 4), Outcome::SecondWins);
    }

    #[test]
    fn move_bounds_follow_even_indices() {
        let seq = [2, 1, 3, 1, 9, 1];
        let game = build_sigma20_game(Phi::True, &seq, 3, DEFAULT_MOVE_CAP).unwrap();
        assert_eq!(game.moves(&vec![]), 2);
        assert_eq!(game.moves(&vec![0]), 3);
        assert_eq!(game.moves(&vec![0, 0]), 4);
    }

    #[test]
    fn truncation_follows_odd_indices() {
        // One ply and g(1) = 1: only the parity of the single move matters.
        let game = build_sigma20_game(Phi::EvenSum, &[2, 1], 1, DEFAULT_MOVE_CAP).unwrap();
        assert_eq!(game.payoff(&[0]), Outcome::FirstWins);
        assert_eq!(game.payoff(&[1]), Outcome::SecondWins);
    }

    #[test]
    fn short_g_is_rejected() {
        assert!(build_sigma20_game(Phi::True, &[3, 9, 21], 2, DEFAULT_MOVE_CAP).is_err());
    }

    #[test]
    fn echo_winner_is_stable_across_margins() {
        for horizon in 2..=5 {
            assert_eq!(winner(Phi::Echo, 1, horizon), winner(Phi::Echo, 8, horizon), "horizon {horizon}");
        }
    }

    #[test]
    fn phi_names_round_trip() {
        for phi in Phi::catalog() {
            assert_eq!(phi.name().parse::<Phi>().unwrap(), phi);
        }
    }
}
