#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use suffice::fastgrow::{LevelKSeq, Nested};

/// A random nested sequence of depth 1..=3 with small increasing values.
pub fn random_levelk(seed: u64) -> LevelKSeq {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let depth = rng.gen_range(1..=3);
    let mut next = rng.gen_range(0..3u64);
    let tree = random_tree(&mut rng, depth, &mut next);
    LevelKSeq::new(tree, None).expect("generated tree is well formed")
}

fn random_tree(rng: &mut ChaCha8Rng, depth: u32, next: &mut u64) -> Nested {
    if depth == 1 {
        let n = rng.gen_range(1..=4);
        let v = (0..n)
            .map(|_| {
                let x = *next;
                *next += rng.gen_range(1..=3);
                x
            })
            .collect();
        return Nested::Leaf(v);
    }
    let n = rng.gen_range(1..=3);
    Nested::Node((0..n).map(|_| random_tree(rng, depth - 1, next)).collect())
}
