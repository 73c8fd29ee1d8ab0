//! Finite two-player games and an exact backward-induction solver.
//!
//! A [`Game`] has a designated mover at each position, a finite move count,
//! and an outcome at terminal positions. [`solve`] memoizes positions, breaks
//! ties by the lowest move index and returns the value together with a
//! positional strategy.

mod estimator_game;
mod priority;
mod sigma20;

use std::collections::HashMap;
use std::hash::Hash;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use estimator_game::{
    ambient_estimator, build_estimator_game, check_well_behaved, classify_plays, negative_control, well_behaved_corpus, EstFeature,
    EstPredicate, AMBIENT_SENTENCE, MAX_BITLEN, MAX_CLASSIFY_BITLEN,
};
pub use priority::{
    affine_timeouts, build_priority_game, random_arena, solve_priority, Arena, Edge, Parity, PriorityGame,
    PriorityGameSpec, PriorityPos,
};
pub use sigma20::{build_sigma20_game, Phi, DEFAULT_MOVE_CAP};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Player {
    First,
    Second,
}

impl Player {
    pub fn opponent(self) -> Player {
        match self {
            Player::First => Player::Second,
            Player::Second => Player::First,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    FirstWins,
    SecondWins,
    Draw,
}

impl Outcome {
    /// Preference of the first player.
    pub fn rank(self) -> u8 {
        match self {
            Outcome::SecondWins => 0,
            Outcome::Draw => 1,
            Outcome::FirstWins => 2,
        }
    }

    pub fn win_for(p: Player) -> Outcome {
        match p {
            Player::First => Outcome::FirstWins,
            Player::Second => Outcome::SecondWins,
        }
    }

    pub fn winner(self) -> Option<Player> {
        match self {
            Outcome::FirstWins => Some(Player::First),
            Outcome::SecondWins => Some(Player::Second),
            Outcome::Draw => None,
        }
    }
}

pub trait Game {
    type Position: Clone + Eq + Hash;

    fn initial(&self) -> Self::Position;
    fn mover(&self, p: &Self::Position) -> Player;
    fn moves(&self, p: &Self::Position) -> usize;
    fn play(&self, p: &Self::Position, mv: usize) -> Self::Position;
    /// `Some` exactly at terminal positions.
    fn outcome(&self, p: &Self::Position) -> Option<Outcome>;
}

#[derive(Clone, Debug)]
pub struct Solution<P: Eq + Hash> {
    pub value: Outcome,
    /// Optimal move at every solved position owned by the winner (by both
    /// players when the value is a draw).
    pub strategy: HashMap<P, usize>,
    pub nodes: usize,
}

impl<P: Eq + Hash> Solution<P> {
    pub fn winner(&self) -> Option<Player> {
        self.value.winner()
    }
}

pub const DEFAULT_NODE_BUDGET: usize = 5_000_000;

pub fn solve<G: Game>(g: &G, max_nodes: usize) -> Result<Solution<G::Position>> {
    let mut s = Solver { g, memo: HashMap::new(), max_nodes };
    let root = g.initial();
    let value = s.value(&root)?;
    let winner = value.winner();
    let nodes = s.memo.len();
    let strategy = s
        .memo
        .into_iter()
        .filter_map(|(p, (_, mv))| {
            let mv = mv?;
            (winner.is_none() || winner == Some(g.mover(&p))).then_some((p, mv))
        })
        .collect();
    Ok(Solution { value, strategy, nodes })
}

struct Solver<'a, G: Game> {
    g: &'a G,
    memo: HashMap<G::Position, (Outcome, Option<usize>)>,
    max_nodes: usize,
}

impl<G: Game> Solver<'_, G> {
    fn value(&mut self, p: &G::Position) -> Result<Outcome> {
        if let Some((v, _)) = self.memo.get(p) {
            return Ok(*v);
        }
        if self.memo.len() >= self.max_nodes {
            return Err(Error::Budget(format!("game solver explored {} positions", self.max_nodes)));
        }
        let entry = match self.g.outcome(p) {
            Some(o) => (o, None),
            None => {
                let n = self.g.moves(p);
                if n == 0 {
                    return Err(Error::malformed("non-terminal position without moves"));
                }
                let first = self.g.mover(p) == Player::First;
                let mut best: Option<(Outcome, usize)> = None;
                for mv in 0..n {
                    let v = self.value(&self.g.play(p, mv))?;
                    let better = match best {
                        None => true,
                        Some((b, _)) => {
                            if first {
                                v.rank() > b.rank()
                            } else {
                                v.rank() < b.rank()
                            }
                        }
                    };
                    if better {
                        best = Some((v, mv));
                    }
                }
                let (v, mv) = best.unwrap();
                (v, Some(mv))
            }
        };
        self.memo.insert(p.clone(), entry);
        Ok(entry.0)
    }
}

type Branching = Arc<dyn Fn(&[usize]) -> usize + Send + Sync>;
type Payoff = Arc<dyn Fn(&[usize]) -> Outcome + Send + Sync>;

/// Alternating game on move histories: the first player moves at even
/// plies, every play has exactly `horizon` plies, and the payoff reads the
/// complete play.
#[derive(Clone)]
pub struct GameSpec {
    pub name: String,
    pub horizon: usize,
    branching: Branching,
    payoff: Payoff,
}

impl std::fmt::Debug for GameSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("GameSpec").field("name", &self.name).field("horizon", &self.horizon).finish()
    }
}

impl GameSpec {
    pub fn new(
        name: impl Into<String>,
        horizon: usize,
        branching: impl Fn(&[usize]) -> usize + Send + Sync + 'static,
        payoff: impl Fn(&[usize]) -> Outcome + Send + Sync + 'static,
    ) -> Self {
        GameSpec { name: name.into(), horizon, branching: Arc::new(branching), payoff: Arc::new(payoff) }
    }

    /// A random tree of the given depth; each position has between 1 and
    /// `max_branching` moves and each play a uniformly drawn outcome.
    pub fn random(seed: u64, plies: usize, max_branching: usize) -> Result<Self> {
        if max_branching == 0 {
            return Err(Error::precondition("branching must be at least 1"));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut branching: HashMap<Vec<usize>, usize> = HashMap::new();
        let mut payoff: HashMap<Vec<usize>, Outcome> = HashMap::new();
        let mut stack = vec![Vec::new()];
        while let Some(h) = stack.pop() {
            if h.len() == plies {
                let o = match rng.gen_range(0..3) {
                    0 => Outcome::FirstWins,
                    1 => Outcome::SecondWins,
                    _ => Outcome::Draw,
                };
                payoff.insert(h, o);
                continue;
            }
            let b = rng.gen_range(1..=max_branching);
            for mv in (0..b).rev() {
                let mut c = h.clone();
                c.push(mv);
                stack.push(c);
            }
            branching.insert(h, b);
        }
        Ok(GameSpec::new(
            format!("random:{seed}:{plies}:{max_branching}"),
            plies,
            move |h| branching.get(h).copied().unwrap_or(0),
            move |h| payoff.get(h).copied().unwrap_or(Outcome::Draw),
        ))
    }

    pub fn branching(&self, history: &[usize]) -> usize {
        (self.branching)(history)
    }

    pub fn payoff(&self, play: &[usize]) -> Outcome {
        (self.payoff)(play)
    }
}

impl Game for GameSpec {
    type Position = Vec<usize>;

    fn initial(&self) -> Vec<usize> {
        Vec::new()
    }

    fn mover(&self, p: &Vec<usize>) -> Player {
        if p.len() % 2 == 0 {
            Player::First
        } else {
            Player::Second
        }
    }

    fn moves(&self, p: &Vec<usize>) -> usize {
        if p.len() >= self.horizon {
            0
        } else {
            self.branching(p)
        }
    }

    fn play(&self, p: &Vec<usize>, mv: usize) -> Vec<usize> {
        let mut c = p.clone();
        c.push(mv);
        c
    }

    fn outcome(&self, p: &Vec<usize>) -> Option<Outcome> {
        (p.len() >= self.horizon).then(|| self.payoff(p))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_ply_game() {
        let g = GameSpec::new("pick", 1, |_| 2, |p| if p[0] == 1 { Outcome::FirstWins } else { Outcome::SecondWins });
        let s = solve(&g, 100).unwrap();
        assert_eq!(s.value, Outcome::FirstWins);
        assert_eq!(s.strategy.get(&Vec::new()), Some(&1));
    }

    #[test]
    fn zero_ply_game() {
        let g = GameSpec::new("empty", 0, |_| 1, |_| Outcome::FirstWins);
        assert_eq!(solve(&g, 10).unwrap().value, Outcome::FirstWins);
    }

    #[test]
    fn lowest_move_tie_break_and_second_player() {
        let g = GameSpec::new("tie", 2, |_| 3, |p| if p[1] == 2 { Outcome::SecondWins } else { Outcome::Draw });
        let s = solve(&g, 100).unwrap();
        assert_eq!(s.value, Outcome::SecondWins);
        assert_eq!(s.strategy.get(&vec![0]), Some(&2));
        assert!(!s.strategy.contains_key(&Vec::new()));
    }

    #[test]
    fn budget_is_enforced() {
        let g = GameSpec::random(1, 6, 3).unwrap();
        assert!(matches!(solve(&g, 5), Err(Error::Budget(_))));
    }

    #[test]
    fn random_games_are_reproducible() {
        let a = GameSpec::random(9, 5, 3).unwrap();
        let b = GameSpec::random(9, 5, 3).unwrap();
        assert_eq!(solve(&a, DEFAULT_NODE_BUDGET).unwrap().value, solve(&b, DEFAULT_NODE_BUDGET).unwrap().value);
        let mut h = Vec::new();
        while h.len() < 5 {
            let n = a.branching(&h);
            assert!((1..=3).contains(&n));
            assert_eq!(n, b.branching(&h));
            h.push(n - 1);
        }
        assert_eq!(a.payoff(&h), b.payoff(&h));
    }
}
