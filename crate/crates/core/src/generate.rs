//! Deterministic structure generators.
//!
//! Graphs are `{E}`-structures with `E` symmetric and loop-free: every
//! undirected edge is stored as two ordered tuples. Randomized generators
//! take an explicit seed and use ChaCha8, so output is reproducible across
//! platforms.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::structure::{Element, Structure, Vocabulary};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GenError {
    #[error("invalid generator parameters: {0}")]
    InvalidParams(String),
}

fn invalid<T>(msg: impl Into<String>) -> Result<T, GenError> {
    Err(GenError::InvalidParams(msg.into()))
}

pub fn graph_vocabulary() -> Vocabulary {
    Vocabulary::new([("E", 2)]).expect("static vocabulary")
}

/// Graph structure from undirected edges.
pub fn graph(n: usize, edges: &[(Element, Element)]) -> Structure {
    let tuples = edges
        .iter()
        .filter(|(a, b)| a != b)
        .flat_map(|&(a, b)| [vec![a, b], vec![b, a]])
        .collect();
    Structure::new(graph_vocabulary(), n, [("E", tuples)]).expect("valid edge list")
}

/// `width x height` grid; element `(x, y)` has id `y * width + x`.
pub fn grid(width: usize, height: usize) -> Structure {
    assert!(width >= 1 && height >= 1, "grid sides must be positive");
    let id = |x: usize, y: usize| y * width + x;
    let mut edges = Vec::with_capacity(2 * width * height);
    for y in 0..height {
        for x in 0..width {
            if x + 1 < width {
                edges.push((id(x, y), id(x + 1, y)));
            }
            if y + 1 < height {
                edges.push((id(x, y), id(x, y + 1)));
            }
        }
    }
    graph(width * height, &edges)
}

pub fn cycle(n: usize) -> Result<Structure, GenError> {
    if n < 3 {
        return invalid(format!("cycle needs n >= 3, got {n}"));
    }
    let edges: Vec<_> = (0..n).map(|i| (i, (i + 1) % n)).collect();
    Ok(graph(n, &edges))
}

pub fn path(n: usize) -> Structure {
    let edges: Vec<_> = (1..n).map(|i| (i - 1, i)).collect();
    graph(n, &edges)
}

pub fn complete(n: usize) -> Structure {
    let edges: Vec<_> = (0..n)
        .flat_map(|a| (a + 1..n).map(move |b| (a, b)))
        .collect();
    graph(n, &edges)
}

/// Random graph with maximum degree `deg`.
///
/// Vertices are swept in id order; each tries to reach degree `deg` by
/// proposing uniformly random partners, rejecting proposals that would exceed
/// the cap on either side or duplicate an edge. Each vertex gets a bounded
/// number of proposals, so the final degrees may fall short of `deg`.
pub fn rand_deg(n: usize, deg: usize, seed: u64) -> Result<Structure, GenError> {
    if n == 0 || deg == 0 || deg >= n {
        return invalid(format!("rand-deg needs n >= 1 and 1 <= deg < n, got n={n} deg={deg}"));
    }
    Ok(graph(n, &rand_deg_edges(n, deg, &mut ChaCha8Rng::seed_from_u64(seed))))
}

pub(crate) fn rand_deg_edges<R: Rng>(n: usize, deg: usize, rng: &mut R) -> Vec<(Element, Element)> {
    let mut degree = vec![0usize; n];
    let mut present = BTreeSet::new();
    let mut edges = Vec::new();
    if n < 2 {
        return edges;
    }
    for v in 0..n {
        let mut attempts = 0;
        while degree[v] < deg && attempts < 4 * deg {
            attempts += 1;
            let u = rng.gen_range(0..n);
            let key = (u.min(v), u.max(v));
            if u == v || degree[u] >= deg || present.contains(&key) {
                continue;
            }
            present.insert(key);
            degree[u] += 1;
            degree[v] += 1;
            edges.push(key);
        }
    }
    edges
}

/// The `{E, P}` incidence structure of a set family: ground elements are
/// `0..ground`, the `i`-th set is element `ground + i`, `E` holds
/// `(element, set)` for membership and `P` marks the ground elements.
pub fn hypergraph(ground: usize, family: &[Vec<Element>]) -> Structure {
    let vocab = Vocabulary::new([("E", 2), ("P", 1)]).expect("static vocabulary");
    let incidence = family
        .iter()
        .enumerate()
        .flat_map(|(i, set)| set.iter().map(move |&v| vec![v, ground + i]))
        .collect();
    let marks = (0..ground).map(|v| vec![v]).collect();
    Structure::new(vocab, ground + family.len(), [("E", incidence), ("P", marks)])
        .expect("family members must be ground elements")
}

/// A set-cover instance with a planted optimum.
#[derive(Debug, Clone)]
pub struct SetCoverInstance {
    pub structure: Structure,
    pub family: Vec<Vec<Element>>,
    /// Size of a minimum cover.
    pub optimum: usize,
}

/// Set-cover instance whose ground set splits into `cover` blocks.
///
/// Every block is one of the sets, so the blocks form a cover of size
/// `cover`. The remaining `sets - cover` sets are random subsets of a single
/// block each, so no set meets two blocks and every cover needs at least one
/// set per block. No ground element lies in more than `freq` sets. Set order
/// is shuffled.
pub fn setcover(
    ground: usize,
    sets: usize,
    freq: usize,
    cover: usize,
    seed: u64,
) -> Result<SetCoverInstance, GenError> {
    if cover == 0 || ground < cover || sets < cover || freq == 0 {
        return invalid(format!(
            "setcover needs 1 <= cover <= ground, cover <= sets, freq >= 1; got ground={ground} sets={sets} freq={freq} cover={cover}"
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let blocks: Vec<Vec<Element>> = (0..cover)
        .map(|b| (b * ground / cover..(b + 1) * ground / cover).collect())
        .collect();
    let mut frequency = vec![1usize; ground];
    let mut family: Vec<Vec<Element>> = blocks.clone();
    for _ in cover..sets {
        let block = &blocks[rng.gen_range(0..cover)];
        let mut decoy: Vec<Element> = block
            .iter()
            .copied()
            .filter(|&v| frequency[v] < freq && rng.gen_bool(0.5))
            .collect();
        // keep decoys proper subsets of their block
        if decoy.len() == block.len() {
            decoy.pop();
        }
        for &v in &decoy {
            frequency[v] += 1;
        }
        family.push(decoy);
    }
    family.shuffle(&mut rng);
    Ok(SetCoverInstance {
        structure: hypergraph(ground, &family),
        family,
        optimum: cover,
    })
}

/// Uniformly random structure over `vocab`: each relation gets `tuples`
/// random tuples (duplicates collapse).
pub fn random_structure<R: Rng>(
    vocab: &Vocabulary,
    n: usize,
    tuples: usize,
    rng: &mut R,
) -> Structure {
    let relations: Vec<(String, Vec<Vec<Element>>)> = vocab
        .symbols()
        .iter()
        .map(|sym| {
            let ts = (0..tuples)
                .map(|_| (0..sym.arity).map(|_| rng.gen_range(0..n)).collect())
                .collect();
            (sym.name.clone(), ts)
        })
        .collect();
    Structure::new(vocab.clone(), n, relations).expect("generated tuples are in range")
}

/// Random graph of maximum degree `deg` drawn from `rng`.
pub fn random_bounded_degree<R: Rng>(n: usize, deg: usize, rng: &mut R) -> Structure {
    graph(n, &rand_deg_edges(n, deg.min(n.saturating_sub(1)), rng))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_cell_grid() {
        let g = grid(1, 1);
        assert_eq!(g.universe_size(), 1);
        assert!(g.relation("E").unwrap().is_empty());
    }

    #[test]
    fn grid_edge_count() {
        for (w, h) in [(1, 4), (2, 2), (3, 5), (7, 7)] {
            let g = grid(w, h);
            assert_eq!(g.gaifman_graph().edge_count(), 2 * w * h - w - h);
            assert_eq!(g.relation("E").unwrap().len(), 2 * (2 * w * h - w - h));
        }
    }

    #[test]
    fn rand_deg_respects_cap_and_is_deterministic() {
        let a = rand_deg(100, 3, 7).unwrap();
        let b = rand_deg(100, 3, 7).unwrap();
        assert_eq!(a, b);
        let g = a.gaifman_graph();
        assert!((0..100).all(|v| g.neighbors(v).len() <= 3));
        assert!(rand_deg(5, 5, 1).is_err());
        assert!(rand_deg(5, 0, 1).is_err());
    }

    #[test]
    fn cycle_requires_three() {
        assert!(cycle(2).is_err());
        assert_eq!(cycle(5).unwrap().gaifman_graph().edge_count(), 5);
    }

    #[test]
    fn setcover_plants_block_cover() {
        let inst = setcover(12, 7, 3, 3, 11).unwrap();
        assert_eq!(inst.family.len(), 7);
        assert_eq!(inst.structure.universe_size(), 19);
        let mut freq = [0usize; 12];
        for set in &inst.family {
            for &v in set {
                freq[v] += 1;
            }
        }
        assert!(freq.iter().all(|&f| (1..=3).contains(&f)));
        assert!(setcover(2, 1, 1, 3, 0).is_err());
    }
}
