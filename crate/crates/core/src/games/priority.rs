//! Priority games with timeouts.
//!
//! Edges of a finite arena carry priorities `0..=k`. Priority `i >= 1` has a
//! timeout sequence `A_i`: if a priority-`i` event is last seen at time `n`
//! and none follows by time `A_i(n)`, the player who wants `i` seen
//! infinitely often loses at that time. Simultaneous timeouts are resolved
//! by the lowest priority. A play reaching the horizon without a timeout is
//! won by the player who wants `k`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{Game, Outcome, Player};
use crate::error::{Error, Result};
use crate::fastgrow::{make_fastseq, FastSeq, Variant};
use crate::rate::Rate;

pub const MAX_PRIORITY: usize = 3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    pub fn of(i: u8) -> Parity {
        if i % 2 == 0 {
            Parity::Even
        } else {
            Parity::Odd
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Edge {
    pub from: usize,
    pub to: usize,
    pub priority: u8,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Arena {
    pub owner: Vec<Player>,
    pub edges: Vec<Edge>,
}

impl Arena {
    pub fn new(owner: Vec<Player>, edges: Vec<Edge>) -> Result<Self> {
        let a = Arena { owner, edges };
        a.validate()?;
        Ok(a)
    }

    pub fn len(&self) -> usize {
        self.owner.len()
    }

    pub fn is_empty(&self) -> bool {
        self.owner.is_empty()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.owner.len();
        if n == 0 || n > 255 {
            return Err(Error::malformed(format!("arena must have 1..=255 states, got {n}")));
        }
        for e in &self.edges {
            if e.from >= n || e.to >= n {
                return Err(Error::malformed(format!("edge {}->{} leaves the arena", e.from, e.to)));
            }
        }
        if let Some(v) = (0..n).find(|&v| self.out_edges(v).next().is_none()) {
            return Err(Error::malformed(format!("state {v} has no outgoing edge")));
        }
        Ok(())
    }

    pub fn out_edges(&self, v: usize) -> impl Iterator<Item = &Edge> {
        self.edges.iter().filter(move |e| e.from == v)
    }

    pub fn max_priority(&self) -> u8 {
        self.edges.iter().map(|e| e.priority).max().unwrap_or(0)
    }
}

/// Random arena: each state gets `1..=max_out` edges with uniform targets,
/// priorities in `0..=max_priority` and a uniform owner.
pub fn random_arena(seed: u64, states: usize, max_priority: u8, max_out: usize) -> Result<Arena> {
    if states == 0 || max_out == 0 {
        return Err(Error::precondition("arena needs at least one state and one edge per state"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let owner = (0..states).map(|_| if rng.gen() { Player::First } else { Player::Second }).collect();
    let mut edges = Vec::new();
    for from in 0..states {
        for _ in 0..rng.gen_range(1..=max_out) {
            edges.push(Edge { from, to: rng.gen_range(0..states), priority: rng.gen_range(0..=max_priority) });
        }
    }
    Arena::new(owner, edges)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PriorityGameSpec {
    pub arena: Arena,
    /// Highest priority; `timeouts[i - 1]` is `A_i` for `i` in `1..=k`.
    pub k: u8,
    pub timeouts: Vec<Vec<u64>>,
    pub start: usize,
    pub horizon: u32,
    /// Parity of the priorities the first player wants seen infinitely often.
    pub first_wants: Parity,
}

impl PriorityGameSpec {
    pub fn wanter(&self, i: u8) -> Player {
        if Parity::of(i) == self.first_wants {
            Player::First
        } else {
            Player::Second
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.arena.validate()?;
        let k = self.k as usize;
        if k == 0 || k > MAX_PRIORITY {
            return Err(Error::precondition(format!("k must be in 1..={MAX_PRIORITY}, got {k}")));
        }
        if self.arena.max_priority() > self.k {
            return Err(Error::malformed(format!("edge priority above k = {k}")));
        }
        if self.start >= self.arena.len() {
            return Err(Error::IndexOutOfBounds { index: self.start, len: self.arena.len() });
        }
        if self.timeouts.len() != k {
            return Err(Error::malformed(format!("expected {k} timeout sequences, got {}", self.timeouts.len())));
        }
        for (i, a) in self.timeouts.iter().enumerate() {
            if a.len() <= self.horizon as usize {
                return Err(Error::precondition(format!(
                    "A_{} has {} values, horizon {} needs {}",
                    i + 1,
                    a.len(),
                    self.horizon,
                    self.horizon + 1
                )));
            }
            for (n, w) in a.windows(2).enumerate() {
                if w[1] <= w[0] {
                    return Err(Error::precondition(format!("A_{} is not increasing at {}", i + 1, n + 1)));
                }
            }
            if a[0] == 0 {
                return Err(Error::precondition(format!("A_{}(0) must be positive", i + 1)));
            }
            if i > 0 {
                let lower = &self.timeouts[i - 1];
                if let Some(n) = (0..a.len()).find(|&n| a[n] <= lower[n]) {
                    return Err(Error::precondition(format!("A_{} does not exceed A_{} at {n}", i + 1, i)));
                }
            }
        }
        let first = self.timeouts.iter().map(|a| a[0]).min().unwrap();
        if (self.horizon as u64) < first {
            return Err(Error::precondition(format!(
                "horizon {} ends before the first possible timeout at {first}",
                self.horizon
            )));
        }
        Ok(())
    }
}

/// Timeouts `A_i(n) = n + gaps[i-1]`, built as minimal monotone sequences
/// over `x + c`.
pub fn affine_timeouts(gaps: &[u64], len: usize) -> Result<Vec<FastSeq>> {
    gaps.iter()
        .map(|&c| make_fastseq(&Rate::Poly(vec![c, 1]), len, Variant::Monotone, 1, u64::MAX))
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct PriorityPos {
    pub vertex: u8,
    pub time: u32,
    /// Time of the last event of priority at least `i + 1`.
    pub last: [u32; MAX_PRIORITY],
    pub result: Option<Outcome>,
}

#[derive(Clone, Debug)]
pub struct PriorityGame {
    spec: PriorityGameSpec,
    out: Vec<Vec<Edge>>,
}

pub fn build_priority_game(p: PriorityGameSpec) -> Result<PriorityGame> {
    p.validate()?;
    let out = (0..p.arena.len()).map(|v| p.arena.out_edges(v).copied().collect()).collect();
    Ok(PriorityGame { spec: p, out })
}

impl PriorityGame {
    pub fn spec(&self) -> &PriorityGameSpec {
        &self.spec
    }

    /// The priority whose timeout fires at `time`, lowest first.
    fn fired(&self, last: &[u32; MAX_PRIORITY], time: u32) -> Option<u8> {
        (0..self.spec.k as usize).find(|&i| self.spec.timeouts[i][last[i] as usize] <= time as u64).map(|i| i as u8 + 1)
    }
}

impl Game for PriorityGame {
    type Position = PriorityPos;

    fn initial(&self) -> PriorityPos {
        PriorityPos { vertex: self.spec.start as u8, time: 0, last: [0; MAX_PRIORITY], result: None }
    }

    fn mover(&self, p: &PriorityPos) -> Player {
        self.spec.arena.owner[p.vertex as usize]
    }

    fn moves(&self, p: &PriorityPos) -> usize {
        if p.result.is_some() {
            0
        } else {
            self.out[p.vertex as usize].len()
        }
    }

    fn play(&self, p: &PriorityPos, mv: usize) -> PriorityPos {
        let e = self.out[p.vertex as usize][mv];
        let time = p.time + 1;
        let mut last = p.last;
        for l in last.iter_mut().take(e.priority.min(self.spec.k) as usize) {
            *l = time;
        }
        let result = match self.fired(&last, time) {
            Some(i) => Some(Outcome::win_for(self.spec.wanter(i).opponent())),
            None if time >= self.spec.horizon => Some(Outcome::win_for(self.spec.wanter(self.spec.k))),
            None => None,
        };
        PriorityPos { vertex: e.to as u8, time, last, result }
    }

    fn outcome(&self, p: &PriorityPos) -> Option<Outcome> {
        p.result
    }
}

/// Winner of a priority game by backward induction over time layers.
///
/// Equivalent to [`super::solve`] on the same game; positions of one layer
/// are kept in a sorted table rather than a global memo.
pub fn solve_priority(g: &PriorityGame) -> Result<Player> {
    match g.affine_gaps() {
        Some(gaps) => Ok(solve_affine(g, &gaps)),
        None => solve_layered(g),
    }
}

fn solve_layered(g: &PriorityGame) -> Result<Player> {
    use std::collections::HashMap;
    let spec = &g.spec;
    // Forward pass: reachable non-terminal positions per time layer.
    let mut layers: Vec<Vec<PriorityPos>> = vec![vec![g.initial()]];
    for t in 0..spec.horizon as usize {
        let mut next: Vec<PriorityPos> = Vec::new();
        for p in &layers[t] {
            for mv in 0..g.moves(p) {
                let c = g.play(p, mv);
                if c.result.is_none() {
                    next.push(c);
                }
            }
        }
        next.sort_unstable_by_key(key);
        next.dedup();
        if next.is_empty() {
            break;
        }
        layers.push(next);
    }
    // Backward pass.
    let mut values: HashMap<PriorityPos, Outcome> = HashMap::new();
    for layer in layers.iter().rev() {
        let mut cur = HashMap::with_capacity(layer.len());
        for p in layer {
            let first = g.mover(p) == Player::First;
            let mut best: Option<Outcome> = None;
            for mv in 0..g.moves(p) {
                let c = g.play(p, mv);
                let v = match c.result {
                    Some(o) => o,
                    None => *values.get(&c).ok_or_else(|| Error::malformed("missing layer position"))?,
                };
                best = Some(match best {
                    None => v,
                    Some(b) if (first && v.rank() > b.rank()) || (!first && v.rank() < b.rank()) => v,
                    Some(b) => b,
                });
            }
            cur.insert(*p, best.ok_or_else(|| Error::malformed("position without moves"))?);
        }
        values = cur;
    }
    values
        .get(&g.initial())
        .and_then(|o| o.winner())
        .ok_or_else(|| Error::malformed("priority game without a winner"))
}

impl PriorityGame {
    /// `c_i` when every `A_i(n) = n + c_i` on the horizon.
    fn affine_gaps(&self) -> Option<Vec<u64>> {
        self.spec
            .timeouts
            .iter()
            .map(|a| {
                let c = a[0];
                a.iter().enumerate().all(|(n, &v)| v == n as u64 + c).then_some(c)
            })
            .collect()
    }
}

/// Dense backward induction for shift timeouts, where a position is
/// determined by the vertex and the times since the last event of each
/// priority.
fn solve_affine(g: &PriorityGame, gaps: &[u64]) -> Player {
    let spec = &g.spec;
    let k = gaps.len();
    let n = spec.arena.len();
    // Mixed radix over (vertex, d_1, ..., d_k) with d_i < c_i.
    let mut radix = vec![n];
    radix.extend(gaps.iter().map(|&c| c as usize));
    let size: usize = radix.iter().product();
    let decode = |mut idx: usize, out: &mut [usize]| {
        for (o, &r) in out.iter_mut().zip(&radix) {
            *o = idx % r;
            idx /= r;
        }
    };
    let encode = |digits: &[usize]| digits.iter().zip(&radix).rev().fold(0usize, |acc, (&d, &r)| acc * r + d);
    let default = Outcome::win_for(spec.wanter(spec.k)).rank();
    let mut next = vec![default; size];
    let mut cur = vec![0u8; size];
    let mut digits = vec![0usize; k + 1];
    let mut child = vec![0usize; k + 1];
    for t in (0..spec.horizon).rev() {
        let last_layer = t + 1 >= spec.horizon;
        for idx in 0..size {
            decode(idx, &mut digits);
            let v = digits[0];
            let first = spec.arena.owner[v] == Player::First;
            let mut best: Option<u8> = None;
            for e in &g.out[v] {
                child[0] = e.to;
                let mut fired = None;
                for i in 0..k {
                    child[i + 1] = if i < e.priority as usize { 0 } else { digits[i + 1] + 1 };
                    if fired.is_none() && child[i + 1] as u64 >= gaps[i] {
                        fired = Some(i as u8 + 1);
                    }
                }
                let r = match fired {
                    Some(i) => Outcome::win_for(spec.wanter(i).opponent()).rank(),
                    None if last_layer => default,
                    None => next[encode(&child)],
                };
                best = Some(match best {
                    None => r,
                    Some(b) if first => b.max(r),
                    Some(b) => b.min(r),
                });
            }
            cur[idx] = best.unwrap();
        }
        std::mem::swap(&mut cur, &mut next);
    }
    digits[0] = spec.start;
    digits[1..].iter_mut().for_each(|d| *d = 0);
    match next[encode(&digits)] {
        2 => Player::First,
        _ => Player::Second,
    }
}

fn key(p: &PriorityPos) -> (u8, [u32; MAX_PRIORITY]) {
    (p.vertex, p.last)
}

#[cfg(test)]
mod tests {
    use super::super::{solve, DEFAULT_NODE_BUDGET};
    use super::*;

    fn spec(arena: Arena, k: u8, gaps: &[u64], horizon: u32, first_wants: Parity) -> PriorityGameSpec {
        let timeouts = affine_timeouts(gaps, horizon as usize + 1).unwrap().into_iter().map(|s| s.values).collect();
        PriorityGameSpec { arena, k, timeouts, start: 0, horizon, first_wants }
    }

    #[test]
    fn affine_timeouts_are_shifts() {
        let a = affine_timeouts(&[3, 7], 5).unwrap();
        assert_eq!(a[0].values, vec![3, 4, 5, 6, 7]);
        assert_eq!(a[1].values, vec![7, 8, 9, 10, 11]);
    }

    #[test]
    fn forced_odd_events_win_for_the_odd_player() {
        // One state owned by the first player with a priority-1 self loop.
        let arena = Arena::new(vec![Player::First], vec![Edge { from: 0, to: 0, priority: 1 }]).unwrap();
        let g = build_priority_game(spec(arena, 1, &[2], 10, Parity::Odd)).unwrap();
        assert_eq!(solve(&g, DEFAULT_NODE_BUDGET).unwrap().value, Outcome::FirstWins);
        assert_eq!(solve_priority(&g).unwrap(), Player::First);
    }

    #[test]
    fn missing_priority_one_loses_at_first_timeout() {
        let arena = Arena::new(vec![Player::First], vec![Edge { from: 0, to: 0, priority: 0 }]).unwrap();
        let g = build_priority_game(spec(arena, 1, &[3], 10, Parity::Odd)).unwrap();
        let mut p = g.initial();
        while p.result.is_none() {
            p = g.play(&p, 0);
        }
        assert_eq!(p.time, 3);
        assert_eq!(p.result, Some(Outcome::SecondWins));
        assert_eq!(solve_priority(&g).unwrap(), Player::Second);
    }

    #[test]
    fn higher_events_count_for_lower_priorities() {
        let arena = Arena::new(vec![Player::Second], vec![Edge { from: 0, to: 0, priority: 2 }]).unwrap();
        let g = build_priority_game(spec(arena, 2, &[2, 5], 12, Parity::Even)).unwrap();
        let p = g.play(&g.initial(), 0);
        assert_eq!(&p.last[..2], &[1, 1]);
        assert_eq!(solve_priority(&g).unwrap(), Player::First);
    }

    #[test]
    fn lowest_priority_controls_simultaneous_timeouts() {
        let edges = vec![Edge { from: 0, to: 0, priority: 0 }, Edge { from: 0, to: 0, priority: 1 }];
        let arena = Arena::new(vec![Player::First], edges).unwrap();
        let g = build_priority_game(spec(arena, 2, &[4, 5], 8, Parity::Even)).unwrap();
        let mut p = g.play(&g.initial(), 1);
        while p.result.is_none() {
            p = g.play(&p, 0);
        }
        // A_1(1) = A_2(0) = 5; the second player wants priority 1 and loses.
        assert_eq!((p.time, p.result), (5, Some(Outcome::FirstWins)));
    }

    #[test]
    fn vacuous_horizon_is_rejected() {
        let arena = Arena::new(vec![Player::First], vec![Edge { from: 0, to: 0, priority: 1 }]).unwrap();
        let mut s = spec(arena, 1, &[6], 10, Parity::Odd);
        s.horizon = 5;
        assert!(build_priority_game(s).is_err());
    }

    #[test]
    fn fast_solvers_match_generic_solver() {
        for seed in 0..40 {
            let arena = random_arena(seed, 2 + seed as usize % 4, 2, 2).unwrap();
            let affine = spec(arena, 2, &[3, 6], 14, Parity::Even);
            let mut stretched = affine.clone();
            stretched.timeouts[1] = (0..15).map(|n| 2 * n + 6).collect();
            for s in [affine, stretched] {
                let g = build_priority_game(s).unwrap();
                let generic = solve(&g, DEFAULT_NODE_BUDGET).unwrap().winner().unwrap();
                assert_eq!(generic, solve_priority(&g).unwrap(), "seed {seed}");
                assert_eq!(generic, solve_layered(&g).unwrap(), "seed {seed}");
            }
        }
    }
}
