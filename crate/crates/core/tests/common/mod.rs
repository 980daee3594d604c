#![allow(dead_code)]

use folocal::generate;
use folocal::structure::{Structure, Vocabulary};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn mixed_vocabulary() -> Vocabulary {
    Vocabulary::new([("E", 2), ("T", 3), ("P", 1)]).unwrap()
}

/// A structure from the test corpus with at most `max_n` elements: grids,
/// paths, cycles, bounded-degree graphs, random structures with a ternary
/// relation, or set-system incidence structures.
pub fn corpus_structure<R: Rng>(rng: &mut R, max_n: usize) -> Structure {
    assert!(max_n >= 4);
    match rng.gen_range(0..6) {
        0 => {
            let w = rng.gen_range(1..=max_n.min(8));
            let h = rng.gen_range(1..=(max_n / w).clamp(1, 8));
            generate::grid(w, h)
        }
        1 => generate::path(rng.gen_range(1..=max_n)),
        2 => generate::cycle(rng.gen_range(3..=max_n)).unwrap(),
        3 => {
            let n = rng.gen_range(2..=max_n);
            let deg = rng.gen_range(1..=3.min(n - 1));
            generate::random_bounded_degree(n, deg, rng)
        }
        4 => {
            let n = rng.gen_range(1..=max_n);
            let tuples = rng.gen_range(0..=n);
            generate::random_structure(&mixed_vocabulary(), n, tuples, rng)
        }
        _ => {
            let ground = rng.gen_range(1..=max_n / 2);
            let sets = rng.gen_range(1..=max_n - ground);
            let family: Vec<Vec<usize>> = (0..sets)
                .map(|_| (0..ground).filter(|_| rng.gen_bool(0.4)).collect())
                .collect();
            generate::hypergraph(ground, &family)
        }
    }
}
