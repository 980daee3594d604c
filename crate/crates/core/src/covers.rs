//! Neighborhood covers, tree covers and their kernels.
//!
//! An `(r, s)`-neighborhood cover is a family of element sets such that
//! every `N_r(a)` lies inside some member and every member lies inside some
//! `N_s(b)`. A tree cover drops the second condition in favour of pieces of
//! small tree-width. The kernel of a piece `T` is `{a in T | N_r(a) ⊆ T}`.

use num_bigint::BigUint;
use serde::Serialize;
use thiserror::Error;

use crate::gaifman::{Bfs, GaifmanGraph};
use crate::structure::Element;
use crate::treewidth;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CoverError {
    #[error("cover exponent k must be at least 1")]
    ZeroExponent,
    #[error("cover was built for radius {cover} but kernels were requested for radius {requested}")]
    RadiusMismatch { cover: usize, requested: usize },
    #[error("piece {0} is empty")]
    EmptyPiece(usize),
    #[error("piece {piece} contains element {element}, universe has {universe}")]
    ElementOutOfRange {
        piece: usize,
        element: Element,
        universe: usize,
    },
    #[error("piece order is not a permutation of 0..{0}")]
    BadPermutation(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum CoverKind {
    /// Every r-ball is inside a piece; every piece is inside an s-ball.
    Neighborhood { r: usize, s: usize },
    /// Every r-ball is inside a piece; pieces have tree-width at most
    /// `width_bound` when it is known.
    Tree { r: usize, width_bound: Option<usize> },
}

impl CoverKind {
    pub fn radius(&self) -> usize {
        match *self {
            CoverKind::Neighborhood { r, .. } | CoverKind::Tree { r, .. } => r,
        }
    }
}

/// Bookkeeping from the clustering loop, one entry per piece.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct PelegTrace {
    pub seeds: Vec<Element>,
    pub iterations: Vec<usize>,
    /// The set `M` the piece grew from in its last iteration.
    pub cores: Vec<Vec<Element>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct CoverStats {
    pub pieces: usize,
    pub total_size: usize,
    pub max_piece: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cover {
    kind: CoverKind,
    pieces: Vec<Vec<Element>>,
    kernels: Option<Vec<Vec<Element>>>,
    trace: Option<PelegTrace>,
}

impl Cover {
    /// A cover from explicit pieces over a universe of size `n`. Pieces are
    /// sorted and deduplicated.
    pub fn from_pieces(kind: CoverKind, pieces: Vec<Vec<Element>>, n: usize) -> Result<Self, CoverError> {
        let mut normalized = Vec::with_capacity(pieces.len());
        for (i, mut p) in pieces.into_iter().enumerate() {
            p.sort_unstable();
            p.dedup();
            match p.last() {
                None => return Err(CoverError::EmptyPiece(i)),
                Some(&e) if e >= n => {
                    return Err(CoverError::ElementOutOfRange {
                        piece: i,
                        element: e,
                        universe: n,
                    })
                }
                _ => normalized.push(p),
            }
        }
        Ok(Cover {
            kind,
            pieces: normalized,
            kernels: None,
            trace: None,
        })
    }

    pub fn kind(&self) -> CoverKind {
        self.kind
    }

    pub fn radius(&self) -> usize {
        self.kind.radius()
    }

    /// Pieces as sorted element lists, in construction order.
    pub fn pieces(&self) -> &[Vec<Element>] {
        &self.pieces
    }

    pub fn kernels(&self) -> Option<&[Vec<Element>]> {
        self.kernels.as_deref()
    }

    pub fn trace(&self) -> Option<&PelegTrace> {
        self.trace.as_ref()
    }

    pub fn stats(&self) -> CoverStats {
        CoverStats {
            pieces: self.pieces.len(),
            total_size: self.pieces.iter().map(Vec::len).sum(),
            max_piece: self.pieces.iter().map(Vec::len).max().unwrap_or(0),
        }
    }

    /// The same cover with pieces (and kernels, trace) listed in `order`.
    pub fn reordered(&self, order: &[usize]) -> Result<Cover, CoverError> {
        let len = self.pieces.len();
        let mut seen = vec![false; len];
        if order.len() != len || order.iter().any(|&i| i >= len || std::mem::replace(&mut seen[i], true)) {
            return Err(CoverError::BadPermutation(len));
        }
        let pick = |v: &[Vec<Element>]| order.iter().map(|&i| v[i].clone()).collect::<Vec<_>>();
        Ok(Cover {
            kind: self.kind,
            pieces: pick(&self.pieces),
            kernels: self.kernels.as_deref().map(pick),
            trace: self.trace.as_ref().map(|t| PelegTrace {
                seeds: order.iter().map(|&i| t.seeds[i]).collect(),
                iterations: order.iter().map(|&i| t.iterations[i]).collect(),
                cores: pick(&t.cores),
            }),
        })
    }
}

/// Whether `big > n^(1/k) * small`, decided as `big^k > n * small^k` in
/// exact integer arithmetic.
pub fn exceeds_growth_threshold(big: usize, small: usize, n: usize, k: u32) -> bool {
    let wide = || -> Option<bool> {
        let lhs = (big as u128).checked_pow(k)?;
        let rhs = (small as u128).checked_pow(k)?.checked_mul(n as u128)?;
        Some(lhs > rhs)
    };
    wide().unwrap_or_else(|| BigUint::from(big).pow(k) > BigUint::from(n) * BigUint::from(small).pow(k))
}

/// Peleg's clustering: an `(r, 2kr)`-neighborhood cover with total size at
/// most `n^(1 + 1/k)`. Seeds are taken in increasing id order.
pub fn peleg_cover(g: &GaifmanGraph, r: usize, k: u32) -> Result<Cover, CoverError> {
    if k == 0 {
        return Err(CoverError::ZeroExponent);
    }
    let n = g.len();
    let mut uncovered = vec![true; n];
    let mut next_seed = 0;
    let mut bfs = g.bfs();
    let mut pieces = Vec::new();
    let mut trace = PelegTrace::default();
    loop {
        while next_seed < n && !uncovered[next_seed] {
            next_seed += 1;
        }
        if next_seed == n {
            break;
        }
        let seed = next_seed;
        let mut grown = vec![seed];
        let mut iterations = 0;
        let (core, layer) = loop {
            iterations += 1;
            let core = grown;
            let layer: Vec<Element> = bfs
                .multi_ball(g, &core, r)
                .into_iter()
                .filter(|&a| uncovered[a])
                .collect();
            grown = bfs.multi_ball(g, &layer, r);
            if !exceeds_growth_threshold(grown.len(), core.len(), n, k) {
                break (core, layer);
            }
        };
        for &a in &layer {
            uncovered[a] = false;
        }
        pieces.push(grown);
        trace.seeds.push(seed);
        trace.iterations.push(iterations);
        trace.cores.push(core);
    }
    Ok(Cover {
        kind: CoverKind::Neighborhood { r, s: 2 * k as usize * r },
        pieces,
        kernels: None,
        trace: Some(trace),
    })
}

/// BFS layering: per connected component, rooted at its smallest element,
/// the windows `{a | i <= d(root, a) <= i + 2r}` for every non-empty `i`.
pub fn bfs_layer_cover(g: &GaifmanGraph, r: usize) -> Cover {
    let n = g.len();
    let mut depth = vec![usize::MAX; n];
    let mut pieces = Vec::new();
    for root in 0..n {
        if depth[root] != usize::MAX {
            continue;
        }
        depth[root] = 0;
        let mut order = vec![root];
        let mut head = 0;
        while head < order.len() {
            let v = order[head];
            head += 1;
            for &w in g.neighbors(v) {
                if depth[w] == usize::MAX {
                    depth[w] = depth[v] + 1;
                    order.push(w);
                }
            }
        }
        // order is sorted by depth, so layer i is a contiguous run
        let max_depth = depth[*order.last().expect("root is present")];
        let mut start = vec![0; max_depth + 2];
        for &v in &order {
            start[depth[v] + 1] += 1;
        }
        for i in 1..start.len() {
            start[i] += start[i - 1];
        }
        for i in 0..=max_depth {
            let end = start[(i + 2 * r + 1).min(max_depth + 1)];
            let mut piece = order[start[i]..end].to_vec();
            piece.sort_unstable();
            pieces.push(piece);
        }
    }
    Cover {
        kind: CoverKind::Tree { r, width_bound: None },
        pieces,
        kernels: None,
        trace: None,
    }
}

/// Fills in the kernels `{a in T | N_r(a) ⊆ T}` of every piece.
///
/// Each piece is marked in a single epoch-stamped array shared by all
/// pieces, then `r` rounds each drop, in one batch, the members with a
/// neighbor outside the current set; after round `i` the survivors are
/// exactly the members whose `i`-ball lies in the piece. Work per piece is
/// proportional to the degrees of its members.
pub fn kernels(g: &GaifmanGraph, cover: &Cover, r: usize) -> Result<Cover, CoverError> {
    if r != cover.radius() {
        return Err(CoverError::RadiusMismatch {
            cover: cover.radius(),
            requested: r,
        });
    }
    let mut stamp = vec![0u32; g.len()];
    let mut epoch = 0u32;
    let mut dropped = Vec::new();
    let mut kernels = Vec::with_capacity(cover.pieces.len());
    for piece in &cover.pieces {
        epoch = epoch.checked_add(1).unwrap_or_else(|| {
            stamp.fill(0);
            1
        });
        for &a in piece {
            stamp[a] = epoch;
        }
        let mut alive = piece.clone();
        for _ in 0..r {
            dropped.clear();
            alive.retain(|&a| {
                let keep = g.neighbors(a).iter().all(|&b| stamp[b] == epoch);
                if !keep {
                    dropped.push(a);
                }
                keep
            });
            if dropped.is_empty() {
                break;
            }
            for &a in &dropped {
                stamp[a] = 0;
            }
        }
        kernels.push(alive);
    }
    Ok(Cover {
        kernels: Some(kernels),
        ..cover.clone()
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub radius: usize,
    /// Elements whose r-ball lies in no piece.
    pub property1_failures: Vec<Element>,
    /// Pieces not contained in any s-ball (neighborhood covers only).
    pub property2_failures: Vec<usize>,
    /// For each piece, a center whose s-ball contains it.
    pub centers: Option<Vec<Element>>,
    /// Heuristic tree-width of each induced piece (tree covers only).
    pub piece_widths: Option<Vec<usize>>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.property1_failures.is_empty() && self.property2_failures.is_empty()
    }
}

fn contains_all(piece: &[Element], members: &[Element]) -> bool {
    members.iter().all(|a| piece.binary_search(a).is_ok())
}

fn inside_ball(g: &GaifmanGraph, bfs: &mut Bfs, center: Element, s: usize, piece: &[Element]) -> bool {
    contains_all(&bfs.ball(g, center, s), piece)
}

/// Upper bounds on the tree-width of each induced piece.
pub fn piece_widths(g: &GaifmanGraph, cover: &Cover) -> Vec<usize> {
    cover
        .pieces
        .iter()
        .map(|p| treewidth::heuristic_graph_decomposition(&g.induced(p)).width())
        .collect()
}

/// Checks the cover properties by direct BFS.
pub fn validate_cover(g: &GaifmanGraph, cover: &Cover) -> ValidationReport {
    let n = g.len();
    let r = cover.radius();
    let mut bfs = g.bfs();
    let mut holders: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (i, p) in cover.pieces.iter().enumerate() {
        for &a in p {
            if a < n {
                holders[a].push(i);
            }
        }
    }
    let property1_failures = (0..n)
        .filter(|&a| {
            let ball = bfs.ball(g, a, r);
            !holders[a].iter().any(|&i| contains_all(&cover.pieces[i], &ball))
        })
        .collect();
    let mut property2_failures = Vec::new();
    let mut centers = None;
    let mut piece_widths_out = None;
    match cover.kind {
        CoverKind::Neighborhood { s, .. } => {
            let mut found = Vec::with_capacity(cover.pieces.len());
            for (i, piece) in cover.pieces.iter().enumerate() {
                let seed = cover.trace.as_ref().map(|t| t.seeds[i]);
                let center = seed
                    .filter(|&c| inside_ball(g, &mut bfs, c, s, piece))
                    .or_else(|| {
                        // any center is within s of every member, in particular the first
                        let candidates = bfs.ball(g, piece[0], s);
                        candidates
                            .into_iter()
                            .find(|&c| inside_ball(g, &mut bfs, c, s, piece))
                    });
                match center {
                    Some(c) => found.push(c),
                    None => property2_failures.push(i),
                }
            }
            if property2_failures.is_empty() {
                centers = Some(found);
            }
        }
        CoverKind::Tree { .. } => piece_widths_out = Some(piece_widths(g, cover)),
    }
    ValidationReport {
        radius: r,
        property1_failures,
        property2_failures,
        centers,
        piece_widths: piece_widths_out,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path(n: usize) -> GaifmanGraph {
        let edges: Vec<_> = (1..n).map(|i| (i - 1, i)).collect();
        GaifmanGraph::from_edges(n, &edges)
    }

    fn grid(w: usize, h: usize) -> GaifmanGraph {
        let mut edges = Vec::new();
        for y in 0..h {
            for x in 0..w {
                if x + 1 < w {
                    edges.push((y * w + x, y * w + x + 1));
                }
                if y + 1 < h {
                    edges.push((y * w + x, (y + 1) * w + x));
                }
            }
        }
        GaifmanGraph::from_edges(w * h, &edges)
    }

    #[test]
    fn single_vertex() {
        let g = GaifmanGraph::from_edges(1, &[]);
        let c = peleg_cover(&g, 1, 2).unwrap();
        assert_eq!(c.pieces(), &[vec![0]]);
        assert!(validate_cover(&g, &c).is_valid());
        assert_eq!(bfs_layer_cover(&g, 1).pieces(), &[vec![0]]);
    }

    #[test]
    fn zero_exponent_rejected() {
        assert_eq!(peleg_cover(&path(3), 1, 0), Err(CoverError::ZeroExponent));
    }

    #[test]
    fn path_layers() {
        let c = bfs_layer_cover(&path(10), 1);
        let mut expected: Vec<Vec<Element>> = (0..8).map(|i| vec![i, i + 1, i + 2]).collect();
        expected.push(vec![8, 9]);
        expected.push(vec![9]);
        assert_eq!(c.pieces(), expected.as_slice());
        assert!(validate_cover(&path(10), &c).is_valid());
    }

    #[test]
    fn layers_of_radius_zero_are_singletons_on_a_path() {
        let c = bfs_layer_cover(&path(4), 0);
        assert_eq!(c.pieces(), &[vec![0], vec![1], vec![2], vec![3]]);
    }

    #[test]
    fn layers_per_component() {
        let g = GaifmanGraph::from_edges(5, &[(0, 3), (1, 4)]);
        let c = bfs_layer_cover(&g, 1);
        assert_eq!(c.pieces(), &[vec![0, 3], vec![3], vec![1, 4], vec![4], vec![2]]);
    }

    #[test]
    fn kernel_of_path_window() {
        let g = path(5);
        let c = Cover::from_pieces(CoverKind::Tree { r: 1, width_bound: None }, vec![vec![1, 2, 3]], 5).unwrap();
        let k = kernels(&g, &c, 1).unwrap();
        assert_eq!(k.kernels().unwrap(), &[vec![2]]);
        assert_eq!(
            kernels(&g, &c, 2),
            Err(CoverError::RadiusMismatch { cover: 1, requested: 2 })
        );
    }

    #[test]
    fn whole_universe_piece() {
        let g = grid(4, 4);
        let all: Vec<Element> = (0..16).collect();
        let c = Cover::from_pieces(CoverKind::Neighborhood { r: 3, s: 6 }, vec![all.clone()], 16).unwrap();
        let report = validate_cover(&g, &c);
        assert!(report.is_valid());
        assert_eq!(kernels(&g, &c, 3).unwrap().kernels().unwrap(), &[all]);
    }

    #[test]
    fn missing_ball_reported() {
        let g = path(5);
        let kind = CoverKind::Tree { r: 1, width_bound: None };
        let c = Cover::from_pieces(kind, vec![vec![0, 1, 2], vec![1, 2, 3, 4]], 5).unwrap();
        assert!(validate_cover(&g, &c).is_valid());
        let c = Cover::from_pieces(kind, vec![vec![0, 1, 2], vec![2, 3, 4]], 5).unwrap();
        assert_eq!(validate_cover(&g, &c).property1_failures, vec![2]);
    }

    #[test]
    fn far_piece_fails_property2() {
        let g = path(7);
        let c = Cover::from_pieces(CoverKind::Neighborhood { r: 0, s: 2 }, vec![(0..7).collect()], 7).unwrap();
        let report = validate_cover(&g, &c);
        assert_eq!(report.property2_failures, vec![0]);
        assert!(!report.is_valid());
    }

    #[test]
    fn invalid_pieces_rejected() {
        let kind = CoverKind::Tree { r: 0, width_bound: None };
        assert_eq!(Cover::from_pieces(kind, vec![vec![]], 3), Err(CoverError::EmptyPiece(0)));
        assert!(matches!(
            Cover::from_pieces(kind, vec![vec![3]], 3),
            Err(CoverError::ElementOutOfRange { .. })
        ));
    }

    #[test]
    fn grid_peleg_size_bound() {
        let g = grid(16, 16);
        let c = peleg_cover(&g, 1, 2).unwrap();
        assert!(c.stats().total_size <= 4096);
        let report = validate_cover(&g, &c);
        assert!(report.is_valid(), "{report:?}");
        let trace = c.trace().unwrap();
        assert!(trace.iterations.iter().all(|&i| i <= 2));
    }

    #[test]
    fn exponent_one_gives_r_2r_cover() {
        let g = grid(6, 5);
        let c = peleg_cover(&g, 2, 1).unwrap();
        assert_eq!(c.kind(), CoverKind::Neighborhood { r: 2, s: 4 });
        assert!(validate_cover(&g, &c).is_valid());
    }

    #[test]
    fn reorder_moves_everything() {
        let g = path(6);
        let c = kernels(&g, &peleg_cover(&g, 1, 2).unwrap(), 1).unwrap();
        let n = c.pieces().len();
        let order: Vec<usize> = (0..n).rev().collect();
        let rev = c.reordered(&order).unwrap();
        assert_eq!(rev.pieces()[0], c.pieces()[n - 1]);
        assert_eq!(rev.kernels().unwrap()[0], c.kernels().unwrap()[n - 1]);
        assert_eq!(rev.trace().unwrap().seeds[0], c.trace().unwrap().seeds[n - 1]);
        assert_eq!(c.reordered(&[0, 0]), Err(CoverError::BadPermutation(n)));
    }

    #[test]
    fn threshold_overflow_path() {
        assert!(exceeds_growth_threshold(3, 1, 8, 2));
        assert!(!exceeds_growth_threshold(3, 1, 9, 2));
        // 10^4 to the 12th overflows u128
        assert!(!exceeds_growth_threshold(10_000, 10_000, 1, 12));
        assert!(exceeds_growth_threshold(10_000, 9_999, 1, 12));
    }
}
