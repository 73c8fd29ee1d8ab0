//! Independent reference computations used to check the main algorithms.
//!
//! Each oracle uses a different method from the code it checks: strategy
//! sets instead of backward induction, Zielonka's recursive attractor
//! algorithm on the untruncated arena instead of timeouts, sink peeling
//! instead of depth-first search, and eager level tables instead of the lazy
//! jump tower.

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::games::{Arena, Game, Outcome, Parity, Player};
use crate::wellfounded::{run_machine, MachineSpec, MAX_JUMP_LEVEL};
use crate::wellfounded::{GroundTruth, Truth};

/// Value of a finite game by enumerating the first player's strategies.
///
/// For every strategy the guaranteed outcome is the worst play consistent
/// with it. The set of guaranteed outcomes is built bottom-up: at a
/// first-player node strategies pick one child, at a second-player node a
/// strategy combines one sub-strategy per child. The value is the best
/// guaranteed outcome. `max_strategies` bounds the number of strategies
/// represented at any node.
pub fn enumeration_value<G: Game>(g: &G, max_strategies: u128) -> Result<Outcome> {
    let (set, _) = guaranteed(g, &g.initial(), max_strategies)?;
    let best = set.into_iter().max().ok_or_else(|| Error::malformed("no strategies"))?;
    Ok(from_rank(best))
}

fn from_rank(r: u8) -> Outcome {
    match r {
        0 => Outcome::SecondWins,
        1 => Outcome::Draw,
        _ => Outcome::FirstWins,
    }
}

/// Distinct guaranteed outcome ranks and the number of strategies.
fn guaranteed<G: Game>(g: &G, p: &G::Position, cap: u128) -> Result<(BTreeSet<u8>, u128)> {
    if let Some(o) = g.outcome(p) {
        return Ok((BTreeSet::from([o.rank()]), 1));
    }
    let n = g.moves(p);
    if n == 0 {
        return Err(Error::malformed("non-terminal position without moves"));
    }
    let children = (0..n).map(|mv| guaranteed(g, &g.play(p, mv), cap)).collect::<Result<Vec<_>>>()?;
    let mut count: u128 = 0;
    let mut set = BTreeSet::new();
    match g.mover(p) {
        Player::First => {
            for (s, c) in children {
                count = count.saturating_add(c);
                set.extend(s);
            }
        }
        Player::Second => {
            count = 1;
            set.insert(u8::MAX);
            for (s, c) in children {
                count = count.saturating_mul(c);
                set = set.iter().flat_map(|&a| s.iter().map(move |&b| a.min(b))).collect();
            }
        }
    }
    if count > cap {
        return Err(Error::Budget(format!("more than {cap} strategies")));
    }
    Ok((set, count))
}

/// Winner of the max-parity game on `arena` from `start`: the first player
/// wins a play iff the highest edge priority taken infinitely often has
/// parity `first_wants`.
pub fn parity_winner(arena: &Arena, start: usize, first_wants: Parity) -> Result<Player> {
    arena.validate()?;
    if start >= arena.len() {
        return Err(Error::IndexOutOfBounds { index: start, len: arena.len() });
    }
    // State nodes carry priority 0; each edge becomes a node with its priority.
    let n = arena.len();
    let total = n + arena.edges.len();
    let mut succ = vec![Vec::new(); total];
    let mut owner = vec![0u8; total];
    let mut prio = vec![0u8; total];
    let even_player = match first_wants {
        Parity::Even => Player::First,
        Parity::Odd => Player::Second,
    };
    for v in 0..n {
        owner[v] = if arena.owner[v] == even_player { 0 } else { 1 };
    }
    for (i, e) in arena.edges.iter().enumerate() {
        succ[e.from].push(n + i);
        succ[n + i].push(e.to);
        prio[n + i] = e.priority;
    }
    let z = Zielonka { succ: &succ, owner: &owner, prio: &prio };
    let all: Vec<bool> = vec![true; total];
    let [won_by_even, _] = z.solve(&all);
    Ok(if won_by_even[start] { even_player } else { even_player.opponent() })
}

struct Zielonka<'a> {
    succ: &'a [Vec<usize>],
    owner: &'a [u8],
    prio: &'a [u8],
}

impl Zielonka<'_> {
    /// Winning regions of players 0 (even) and 1 (odd) in the subgame.
    fn solve(&self, alive: &[bool]) -> [Vec<bool>; 2] {
        let total = alive.len();
        let Some(d) = (0..total).filter(|&v| alive[v]).map(|v| self.prio[v]).max() else {
            return [vec![false; total], vec![false; total]];
        };
        let p = (d % 2) as usize;
        let top: Vec<bool> = (0..total).map(|v| alive[v] && self.prio[v] == d).collect();
        let a = self.attractor(alive, &top, p);
        let rest: Vec<bool> = (0..total).map(|v| alive[v] && !a[v]).collect();
        let w = self.solve(&rest);
        if !w[1 - p].iter().any(|&x| x) {
            let mut out = [vec![false; total], vec![false; total]];
            out[p] = alive.to_vec();
            return out;
        }
        let b = self.attractor(alive, &w[1 - p], 1 - p);
        let rest: Vec<bool> = (0..total).map(|v| alive[v] && !b[v]).collect();
        let w2 = self.solve(&rest);
        let mut out = [vec![false; total], vec![false; total]];
        out[p] = w2[p].clone();
        out[1 - p] = (0..total).map(|v| w2[1 - p][v] || b[v]).collect();
        out
    }

    fn attractor(&self, alive: &[bool], target: &[bool], player: usize) -> Vec<bool> {
        let mut attr: Vec<bool> = (0..alive.len()).map(|v| alive[v] && target[v]).collect();
        loop {
            let mut changed = false;
            for v in 0..alive.len() {
                if !alive[v] || attr[v] {
                    continue;
                }
                let mut live = self.succ[v].iter().filter(|&&w| alive[w]).peekable();
                if live.peek().is_none() {
                    continue;
                }
                let pulled = if self.owner[v] as usize == player {
                    live.any(|&w| attr[w])
                } else {
                    live.all(|&w| attr[w])
                };
                if pulled {
                    attr[v] = true;
                    changed = true;
                }
            }
            if !changed {
                return attr;
            }
        }
    }
}

/// Well-foundedness below `start` in a finite graph by repeatedly removing
/// nodes all of whose successors are removed; the rank is the longest path
/// length from `start`.
pub fn graph_wf_oracle(adj: &[Vec<u64>], start: u64) -> Result<GroundTruth> {
    let n = adj.len();
    let s = start as usize;
    if s >= n {
        return Err(Error::IndexOutOfBounds { index: s, len: n });
    }
    let mut pending: Vec<usize> = adj.iter().map(|v| v.len()).collect();
    let mut preds = vec![Vec::new(); n];
    for (v, out) in adj.iter().enumerate() {
        for &w in out {
            preds[w as usize].push(v);
        }
    }
    let mut rank: Vec<Option<u64>> = vec![None; n];
    let mut queue: Vec<usize> = (0..n).filter(|&v| pending[v] == 0).collect();
    while let Some(v) = queue.pop() {
        rank[v] = Some(adj[v].iter().map(|&w| rank[w as usize].unwrap() + 1).max().unwrap_or(0));
        for &u in &preds[v] {
            pending[u] -= 1;
            if pending[u] == 0 {
                queue.push(u);
            }
        }
    }
    Ok(match rank[s] {
        Some(r) => GroundTruth { status: Truth::WellFounded, rank: Some(r) },
        None => GroundTruth { status: Truth::IllFounded, rank: None },
    })
}

/// Jump bits computed eagerly, one full level at a time, for all machines.
/// Queries at or beyond `min(A(n), machines.len())` count as not halting.
pub fn jump_table(level: u32, machines: &[MachineSpec], a: &[u64]) -> Result<Vec<bool>> {
    if level > MAX_JUMP_LEVEL {
        return Err(Error::precondition(format!("jump level {level} exceeds {MAX_JUMP_LEVEL}")));
    }
    let mut bits: Vec<bool> = machines.iter().map(|m| run_machine(m, &mut |_| Some(false)).halted()).collect();
    for _ in 0..level {
        let prev = bits.clone();
        bits = machines
            .iter()
            .enumerate()
            .map(|(n, m)| {
                let bound = a.get(n).copied().unwrap_or(0).min(machines.len() as u64);
                run_machine(m, &mut |q| (q < bound).then(|| prev[q as usize])).halted()
            })
            .collect();
    }
    Ok(bits)
}
