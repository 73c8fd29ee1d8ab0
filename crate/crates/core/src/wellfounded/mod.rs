//! Bounded descending-path search on coded strict orders.
//!
//! A relation is read as a successor map: `succ(x)` lists the `y` with
//! `x ≻ y`. Infinite relations come from a fixed catalog whose status is known
//! analytically; finite ones are explicit graphs.
//!
//! [`bounded_wf_search`] explores descending paths `start ≻ x1 ≻ x2 ≻ …`
//! with `x1 < A(max(start, m))` and `xi < A(max(i, m))` for `i >= 2`, where
//! `m` is the relation's definition length. A path that reaches the end of
//! `A` (step `|A| - 1`, or a step whose bound index lies past the end) is
//! reported as evidence of ill-foundedness. Successors are tried in
//! increasing order and failed `(node, step)` pairs are memoized.

mod machines;

use std::collections::HashSet;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use machines::{
    jump_tower_eval, machine_catalog, run_machine, Instr, JumpTower, MachineSpec, RunOutcome, MAX_JUMP_LEVEL,
};

use crate::error::{Error, Result};

/// Cantor pairing.
pub fn omega2_code(a: u64, b: u64) -> Option<u64> {
    let s = a.checked_add(b)?;
    let tri = if s % 2 == 0 { (s / 2).checked_mul(s + 1)? } else { s.checked_mul((s + 1) / 2)? };
    tri.checked_add(b)
}

pub fn omega2_decode(z: u64) -> (u64, u64) {
    // Largest w with w(w+1)/2 <= z.
    let mut w = (((8.0 * z as f64 + 1.0).sqrt() - 1.0) / 2.0) as u64;
    while omega2_code(w + 1, 0).is_some_and(|t| t <= z) {
        w += 1;
    }
    while omega2_code(w, 0).map_or(true, |t| t > z) {
        w -= 1;
    }
    let t = omega2_code(w, 0).unwrap();
    let b = z - t;
    (w - b, b)
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RelationKind {
    /// `x ≻ x - 1`.
    Pred,
    /// `x ≻ x + 1`.
    Succ,
    /// Lexicographic order on Cantor-coded pairs.
    Omega2,
    /// Explicit graph on `0..adj.len()`; `adj[x]` lists the `y` with `x ≻ y`.
    Graph { adj: Vec<Vec<u64>> },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Truth {
    WellFounded,
    IllFounded,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GroundTruth {
    pub status: Truth,
    /// Length of the longest descending chain from the start, when finite.
    pub rank: Option<u64>,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RelationSpec {
    pub name: String,
    pub kind: RelationKind,
    pub def_len: u64,
}

impl RelationSpec {
    pub fn pred() -> Self {
        RelationSpec { name: "pred".into(), kind: RelationKind::Pred, def_len: 1 }
    }

    pub fn succ() -> Self {
        RelationSpec { name: "succ".into(), kind: RelationKind::Succ, def_len: 3 }
    }

    pub fn omega2() -> Self {
        RelationSpec { name: "omega2".into(), kind: RelationKind::Omega2, def_len: 1 }
    }

    pub fn graph(name: impl Into<String>, adj: Vec<Vec<u64>>) -> Result<Self> {
        let n = adj.len() as u64;
        let mut adj = adj;
        for (x, ys) in adj.iter_mut().enumerate() {
            if let Some(y) = ys.iter().find(|y| **y >= n) {
                return Err(Error::malformed(format!("edge {x} -> {y} leaves the node range 0..{n}")));
            }
            ys.sort_unstable();
            ys.dedup();
        }
        Ok(RelationSpec { name: name.into(), kind: RelationKind::Graph { adj }, def_len: n })
    }

    pub fn with_def_len(mut self, m: u64) -> Self {
        self.def_len = m;
        self
    }

    /// Random DAG: each `i ≻ j` with `i > j` present with probability
    /// `density`.
    pub fn random_dag(seed: u64, n: usize, density: f64) -> Result<Self> {
        let adj = random_dag_edges(seed, n, density)?;
        Self::graph(format!("dag:{seed}:{n}:{density}"), adj)
    }

    /// Random DAG plus a cycle through the top node `n - 1`.
    pub fn random_cyclic(seed: u64, n: usize, density: f64) -> Result<Self> {
        if n < 2 {
            return Err(Error::malformed("a cyclic graph needs at least 2 nodes"));
        }
        let mut adj = random_dag_edges(seed, n, density)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
        let top = n - 1;
        let len = rng.gen_range(2..=n.min(5));
        let mut nodes: Vec<usize> = (0..top).collect();
        // Partial Fisher-Yates for the other cycle members.
        for i in 0..len - 1 {
            let j = rng.gen_range(i..nodes.len());
            nodes.swap(i, j);
        }
        let mut cycle = vec![top];
        cycle.extend_from_slice(&nodes[..len - 1]);
        for w in 0..cycle.len() {
            let (x, y) = (cycle[w], cycle[(w + 1) % cycle.len()]);
            adj[x].push(y as u64);
        }
        Self::graph(format!("cyclic:{seed}:{n}:{density}"), adj)
    }

    /// `pred`, `succ`, `omega2`, `dag:<seed>:<n>:<density>` or
    /// `cyclic:<seed>:<n>:<density>`.
    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "pred" => return Ok(Self::pred()),
            "succ" => return Ok(Self::succ()),
            "omega2" => return Ok(Self::omega2()),
            _ => {}
        }
        let parts: Vec<&str> = name.split(':').collect();
        let bad = || Error::malformed(format!("unknown relation `{name}`"));
        if parts.len() != 4 {
            return Err(bad());
        }
        let seed: u64 = parts[1].parse().map_err(|_| bad())?;
        let n: usize = parts[2].parse().map_err(|_| bad())?;
        let density: f64 = parts[3].parse().map_err(|_| bad())?;
        match parts[0] {
            "dag" => Self::random_dag(seed, n, density),
            "cyclic" => Self::random_cyclic(seed, n, density),
            _ => Err(bad()),
        }
    }

    pub fn node_count(&self) -> Option<usize> {
        match &self.kind {
            RelationKind::Graph { adj } => Some(adj.len()),
            _ => None,
        }
    }

    /// Whether `x ≻ y`.
    pub fn above(&self, x: u64, y: u64) -> bool {
        match &self.kind {
            RelationKind::Pred => x >= 1 && y == x - 1,
            RelationKind::Succ => x.checked_add(1) == Some(y),
            RelationKind::Omega2 => omega2_decode(y) < omega2_decode(x),
            RelationKind::Graph { adj } => adj.get(x as usize).is_some_and(|ys| ys.binary_search(&y).is_ok()),
        }
    }

    /// Successors of `x` below `bound`, in increasing order. For `omega2` only
    /// the largest successor with each first coordinate is listed; any other
    /// successor lies below one of these and so has a subset of their
    /// continuations.
    pub fn successors(&self, x: u64, bound: u64, out: &mut Vec<u64>) {
        out.clear();
        match &self.kind {
            RelationKind::Pred => {
                if x >= 1 && x - 1 < bound {
                    out.push(x - 1);
                }
            }
            RelationKind::Succ => {
                if let Some(y) = x.checked_add(1).filter(|y| *y < bound) {
                    out.push(y);
                }
            }
            RelationKind::Omega2 => {
                let (a, b) = omega2_decode(x);
                for a2 in 0..=a {
                    let limit = if a2 == a { b } else { u64::MAX };
                    if let Some(b2) = largest_second(a2, limit, bound) {
                        out.push(omega2_code(a2, b2).unwrap());
                    }
                }
                out.sort_unstable();
            }
            RelationKind::Graph { adj } => {
                if let Some(ys) = adj.get(x as usize) {
                    out.extend(ys.iter().copied().take_while(|y| *y < bound));
                }
            }
        }
    }

    pub fn ground_truth(&self, start: u64) -> GroundTruth {
        match &self.kind {
            RelationKind::Pred => GroundTruth { status: Truth::WellFounded, rank: Some(start) },
            RelationKind::Succ => GroundTruth { status: Truth::IllFounded, rank: None },
            RelationKind::Omega2 => {
                let (a, b) = omega2_decode(start);
                GroundTruth { status: Truth::WellFounded, rank: (a == 0).then_some(b) }
            }
            RelationKind::Graph { adj } => graph_truth(adj, start),
        }
    }
}

impl fmt::Display for RelationSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)
    }
}

/// Largest `b < limit` with `code(a, b) < bound`.
fn largest_second(a: u64, limit: u64, bound: u64) -> Option<u64> {
    if limit == 0 || omega2_code(a, 0).map_or(true, |c| c >= bound) {
        return None;
    }
    let (mut lo, mut hi) = (0u64, limit.min(bound));
    // Invariant: code(a, lo) < bound; answer < hi.
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if omega2_code(a, mid).is_some_and(|c| c < bound) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Some(lo)
}

fn random_dag_edges(seed: u64, n: usize, density: f64) -> Result<Vec<Vec<u64>>> {
    if !(0.0..=1.0).contains(&density) {
        return Err(Error::malformed(format!("density {density} outside [0, 1]")));
    }
    if n == 0 {
        return Err(Error::malformed("a graph needs at least one node"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut adj = vec![Vec::new(); n];
    for (i, ys) in adj.iter_mut().enumerate() {
        for j in 0..i {
            if rng.gen_bool(density) {
                ys.push(j as u64);
            }
        }
    }
    Ok(adj)
}

fn graph_truth(adj: &[Vec<u64>], start: u64) -> GroundTruth {
    // Iterative DFS with colors; longest chain by post-order.
    let n = adj.len();
    if start as usize >= n {
        return GroundTruth { status: Truth::WellFounded, rank: Some(0) };
    }
    let mut color = vec![0u8; n];
    let mut depth = vec![0u64; n];
    let mut stack: Vec<(usize, usize)> = vec![(start as usize, 0)];
    color[start as usize] = 1;
    while let Some(top) = stack.last_mut() {
        let (x, i) = *top;
        if let Some(&y) = adj[x].get(i) {
            top.1 += 1;
            let y = y as usize;
            match color[y] {
                0 => {
                    color[y] = 1;
                    stack.push((y, 0));
                }
                1 => return GroundTruth { status: Truth::IllFounded, rank: None },
                _ => {}
            }
        } else {
            color[x] = 2;
            depth[x] = adj[x].iter().map(|&y| depth[y as usize] + 1).max().unwrap_or(0);
            stack.pop();
        }
    }
    GroundTruth { status: Truth::WellFounded, rank: Some(depth[start as usize]) }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    WellFounded,
    IllFoundedEvidence(Vec<u64>),
}

impl Verdict {
    pub fn is_well_founded(&self) -> bool {
        matches!(self, Verdict::WellFounded)
    }

    pub fn truth(&self) -> Truth {
        match self {
            Verdict::WellFounded => Truth::WellFounded,
            Verdict::IllFoundedEvidence(_) => Truth::IllFounded,
        }
    }
}

/// Bound index for step `i` (1-based).
fn step_index(i: usize, start: u64, m: u64) -> u64 {
    if i == 1 {
        start.max(m)
    } else {
        (i as u64).max(m)
    }
}

pub fn bounded_wf_search(r: &RelationSpec, start: u64, a: &[u64]) -> Verdict {
    let mut search = Search { r, a, start, failed: HashSet::new(), path: vec![start] };
    if search.extend(1) {
        Verdict::IllFoundedEvidence(search.path)
    } else {
        Verdict::WellFounded
    }
}

struct Search<'a> {
    r: &'a RelationSpec,
    a: &'a [u64],
    start: u64,
    failed: HashSet<(u64, usize)>,
    path: Vec<u64>,
}

impl Search<'_> {
    /// Try to make step `i` onward from the last node of the path.
    fn extend(&mut self, i: usize) -> bool {
        if i >= self.a.len() {
            return true;
        }
        let idx = step_index(i, self.start, self.r.def_len);
        let Some(&bound) = usize::try_from(idx).ok().and_then(|j| self.a.get(j)) else {
            return true;
        };
        let x = *self.path.last().unwrap();
        if self.failed.contains(&(x, i)) {
            return false;
        }
        let mut next = Vec::new();
        self.r.successors(x, bound, &mut next);
        for y in next {
            self.path.push(y);
            if self.extend(i + 1) {
                return true;
            }
            self.path.pop();
        }
        self.failed.insert((x, i));
        false
    }
}

/// Descending-path acceptance: rejected iff some path `x1 ≻ x2 ≻ …` of
/// `|A| - 1` elements has `xj < A(j)` (and `x1 ≺ root` when a root is given).
pub fn path_acceptance(r: &RelationSpec, root: Option<u64>, a: &[u64], input_size: u64) -> Result<Acceptance> {
    let Some(&a0) = a.first() else {
        return Err(Error::precondition("the sequence is empty"));
    };
    if a0 <= input_size {
        return Err(Error::precondition(format!("A(0) = {a0} is not above the input size {input_size}")));
    }
    let need = a.len() - 1;
    if need == 0 {
        return Ok(Acceptance::Rejected);
    }
    let mut failed = HashSet::new();
    let mut next = Vec::new();
    let firsts: Vec<u64> = match root {
        Some(x) => {
            r.successors(x, a[1], &mut next);
            next.clone()
        }
        None => first_candidates(r, a[1]),
    };
    for x in firsts {
        if chain_from(r, x, 1, a, &mut failed) {
            return Ok(Acceptance::Rejected);
        }
    }
    Ok(Acceptance::Accepted)
}

/// All candidates for the first element below `bound`. For the linear
/// catalog orders only the maximal one matters.
fn first_candidates(r: &RelationSpec, bound: u64) -> Vec<u64> {
    if bound == 0 {
        return Vec::new();
    }
    match &r.kind {
        RelationKind::Graph { adj } => (0..bound.min(adj.len() as u64)).collect(),
        RelationKind::Pred => vec![bound - 1],
        RelationKind::Succ => vec![0],
        RelationKind::Omega2 => {
            // The order-maximal code below the bound: largest first
            // coordinate, then largest second.
            let mut a = omega2_decode(bound - 1).0 + omega2_decode(bound - 1).1;
            loop {
                if let Some(b) = largest_second(a, u64::MAX, bound) {
                    return vec![omega2_code(a, b).unwrap()];
                }
                a -= 1;
            }
        }
    }
}

/// Whether a chain `x = x_j ≻ … ≻ x_{|A|-1}` exists with `x_i < A(i)`.
fn chain_from(r: &RelationSpec, x: u64, j: usize, a: &[u64], failed: &mut HashSet<(u64, usize)>) -> bool {
    if j + 1 >= a.len() {
        return true;
    }
    if failed.contains(&(x, j)) {
        return false;
    }
    let mut next = Vec::new();
    r.successors(x, a[j + 1], &mut next);
    for y in next {
        if chain_from(r, y, j + 1, a, failed) {
            return true;
        }
    }
    failed.insert((x, j));
    false
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Acceptance {
    Accepted,
    Rejected,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WfQuery {
    pub relation: RelationSpec,
    pub start: u64,
}

/// One bit per query: `true` when the bounded search finds no descending
/// path to the end of `A`. Only a prefix (of unspecified length, growing with
/// `A`) is guaranteed correct.
pub fn partial_hyperjump(queries: &[WfQuery], a: &[u64]) -> Vec<bool> {
    queries.iter().map(|q| bounded_wf_search(&q.relation, q.start, a).is_well_founded()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fastgrow::{make_fastseq, Variant};
    use crate::rate::Rate;

    fn minimal(len: usize) -> Vec<u64> {
        make_fastseq(&Rate::linear(2), len, Variant::Plain, 1, u64::MAX).unwrap().values
    }

    #[test]
    fn cantor_pairing_round_trip() {
        assert_eq!(omega2_code(0, 0), Some(0));
        assert_eq!(omega2_code(1, 0), Some(1));
        assert_eq!(omega2_code(0, 1), Some(2));
        assert_eq!(omega2_code(2, 3), Some(18));
        for z in 0..2000 {
            let (a, b) = omega2_decode(z);
            assert_eq!(omega2_code(a, b), Some(z));
        }
    }

    #[test]
    fn omega2_successors_are_dominant() {
        let r = RelationSpec::omega2();
        let mut out = Vec::new();
        // (1,0) below 9: (0,2) has code 5, (0,3) has code 9.
        r.successors(omega2_code(1, 0).unwrap(), 9, &mut out);
        assert_eq!(out, vec![5]);
        r.successors(omega2_code(1, 2).unwrap(), 100, &mut out);
        let pairs: Vec<_> = out.iter().map(|&z| omega2_decode(z)).collect();
        assert_eq!(pairs, vec![(1, 1), (0, 12)]);
    }

    #[test]
    fn search_examples() {
        assert!(matches!(
            bounded_wf_search(&RelationSpec::succ().with_def_len(0), 0, &[10, 100, 1000]),
            Verdict::IllFoundedEvidence(p) if p == vec![0, 1, 2]
        ));
        for len in 7..12 {
            assert_eq!(bounded_wf_search(&RelationSpec::pred(), 5, &minimal(len)), Verdict::WellFounded);
        }
        assert!(!bounded_wf_search(&RelationSpec::pred(), 5, &minimal(6)).is_well_founded());
    }

    #[test]
    fn omega2_stabilizes_for_a_small_start() {
        // Oracle: from (1,0) the longest bounded chain is (0,2), (0,1), (0,0).
        let r = RelationSpec::omega2();
        let start = omega2_code(1, 0).unwrap();
        assert!(!bounded_wf_search(&r, start, &minimal(4)).is_well_founded());
        for len in 5..=30 {
            assert!(bounded_wf_search(&r, start, &minimal(len)).is_well_founded(), "{len}");
        }
    }

    #[test]
    fn graph_ground_truth() {
        let g = RelationSpec::graph("g", vec![vec![], vec![0], vec![1, 0], vec![2]]).unwrap();
        assert_eq!(g.ground_truth(3), GroundTruth { status: Truth::WellFounded, rank: Some(3) });
        let c = RelationSpec::graph("c", vec![vec![1], vec![2], vec![0]]).unwrap();
        assert_eq!(c.ground_truth(0).status, Truth::IllFounded);
        assert!(RelationSpec::graph("bad", vec![vec![3]]).is_err());
    }

    #[test]
    fn random_graphs_have_the_advertised_status() {
        for seed in 0..50 {
            let d = RelationSpec::parse(&format!("dag:{seed}:8:0.4")).unwrap();
            assert_eq!(d.ground_truth(7).status, Truth::WellFounded);
            let c = RelationSpec::parse(&format!("cyclic:{seed}:8:0.4")).unwrap();
            assert_eq!(c.ground_truth(7).status, Truth::IllFounded);
        }
        assert!(RelationSpec::parse("tree:1:2:0.5").is_err());
        assert!(RelationSpec::parse("dag:1:2:1.5").is_err());
    }

    #[test]
    fn acceptance_examples() {
        let a = minimal(8);
        assert_eq!(path_acceptance(&RelationSpec::succ(), None, &a, 0).unwrap(), Acceptance::Rejected);
        for start in 0..5u64 {
            let a = minimal(start as usize + 2);
            assert_eq!(path_acceptance(&RelationSpec::pred(), Some(start), &a, 0).unwrap(), Acceptance::Accepted);
        }
        // Chain 4 -> 3 -> 2 -> 1 -> 0 has five elements; nine are needed.
        let dag = RelationSpec::graph("chain", (0..5).map(|i| if i == 0 { vec![] } else { vec![i - 1] }).collect())
            .unwrap();
        assert_eq!(path_acceptance(&dag, None, &minimal(10), 0).unwrap(), Acceptance::Accepted);
        assert_eq!(path_acceptance(&dag, None, &minimal(6), 0).unwrap(), Acceptance::Rejected);
        assert!(matches!(path_acceptance(&dag, None, &[3, 9], 3), Err(Error::Precondition(_))));
    }

    #[test]
    fn hyperjump_bits() {
        let q = |relation, start| WfQuery { relation, start };
        let bits = partial_hyperjump(&[q(RelationSpec::pred(), 2), q(RelationSpec::succ(), 0)], &minimal(16));
        assert_eq!(bits, vec![true, false]);
        assert!(partial_hyperjump(&[], &minimal(4)).is_empty());
    }
}
