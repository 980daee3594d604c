//! Model checking of Gaifman-normal-form sentences through covers.
//!
//! For every basic local sentence `(r, m, psi)` the engine builds a cover
//! for radius `r`, computes the kernels, evaluates `psi` at each element
//! inside one piece whose kernel contains it, and finally decides whether
//! the satisfying set holds `m` elements pairwise farther apart than `2r`.

use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::covers::{self, Cover, CoverError, CoverStats};
use crate::gaifman::GaifmanGraph;
use crate::logic::{
    center_var, check_r_local, BasicLocalSentence, CompiledFormula, EvalContext, Formula,
    GaifmanSentence, LogicError, Quantification,
};
use crate::structure::{Element, Structure};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EngineError {
    #[error(transparent)]
    Cover(#[from] CoverError),
    #[error(transparent)]
    Logic(#[from] LogicError),
    #[error("cover has no kernels")]
    MissingKernels,
    #[error("element {0} lies in no kernel of the cover")]
    Uncovered(Element),
    #[error("formula is not {radius}-local around `x`: {formula}")]
    NotLocal { formula: String, radius: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum Strategy {
    /// Peleg neighborhood covers with exponent `k`.
    Peleg { k: u32 },
    /// BFS-layer tree covers.
    BfsLayers,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EngineConfig {
    pub strategy: Strategy,
    pub record_witnesses: bool,
    /// Evaluate pieces on the rayon thread pool.
    pub parallel_pieces: bool,
    /// Cross-check distances inside the scattered search against the full
    /// structure. Quadratic in the candidate count; meant for testing.
    pub verify_scattered: bool,
}

impl Default for EngineConfig {
    fn default() -> Self {
        EngineConfig {
            strategy: Strategy::BfsLayers,
            record_witnesses: true,
            parallel_pieces: false,
            verify_scattered: false,
        }
    }
}

/// Wall-clock time per phase, summed over leaves, in nanoseconds.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct PhaseTimings {
    pub cover_ns: u64,
    pub kernels_ns: u64,
    pub local_eval_ns: u64,
    pub scattered_ns: u64,
}

impl PhaseTimings {
    pub fn total_ns(&self) -> u64 {
        self.cover_ns + self.kernels_ns + self.local_eval_ns + self.scattered_ns
    }

    fn add(&mut self, other: &PhaseTimings) {
        self.cover_ns += other.cover_ns;
        self.kernels_ns += other.kernels_ns;
        self.local_eval_ns += other.local_eval_ns;
        self.scattered_ns += other.scattered_ns;
    }
}

fn nanos(d: Duration) -> u64 {
    d.as_nanos().try_into().unwrap_or(u64::MAX)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ScatteredPhase {
    /// The greedy sweep found `m` elements.
    GreedyAccept,
    /// The satisfying set was empty.
    GreedyReject,
    /// Decided by search around the greedy picks.
    Search,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ScatteredOutcome {
    pub exists: bool,
    /// `m` elements pairwise farther apart than the radius, when found.
    pub witnesses: Vec<Element>,
    pub phase: ScatteredPhase,
    pub greedy_picks: Vec<Element>,
    /// Size of the neighborhood searched in the second phase.
    pub search_size: Option<usize>,
    /// Whether distances inside the searched neighborhood agreed with
    /// distances in the whole graph, when checked.
    pub distances_agree: Option<bool>,
}

/// Decides whether `p` holds `m` elements pairwise at distance greater than
/// `radius`.
///
/// First a greedy sweep picks elements of `p` in increasing order, each
/// time discarding the `radius`-ball of the pick; reaching `m` picks
/// settles it. Otherwise every element of `p` is within `radius` of a pick,
/// and a backtracking search over `p ∩ H`, `H = N_{2 radius}(picks)`, with
/// distances measured inside the subgraph induced on `H`, decides it.
pub fn scattered_exists(
    g: &GaifmanGraph,
    p: &[Element],
    radius: usize,
    m: usize,
    verify: bool,
) -> ScatteredOutcome {
    let mut candidates = p.to_vec();
    candidates.sort_unstable();
    candidates.dedup();
    let mut outcome = ScatteredOutcome {
        exists: false,
        witnesses: Vec::new(),
        phase: ScatteredPhase::GreedyReject,
        greedy_picks: Vec::new(),
        search_size: None,
        distances_agree: None,
    };
    if m == 0 {
        outcome.exists = true;
        outcome.phase = ScatteredPhase::GreedyAccept;
        return outcome;
    }
    let mut bfs = g.bfs();
    let mut removed = vec![false; g.len()];
    let mut picks = Vec::new();
    for &a in &candidates {
        if picks.len() == m {
            break;
        }
        if removed[a] {
            continue;
        }
        picks.push(a);
        bfs.for_each_in_ball(g, &[a], radius, |b| removed[b] = true);
    }
    outcome.greedy_picks = picks.clone();
    if picks.len() == m {
        outcome.exists = true;
        outcome.phase = ScatteredPhase::GreedyAccept;
        outcome.witnesses = picks;
        return outcome;
    }
    if picks.is_empty() {
        return outcome;
    }
    outcome.phase = ScatteredPhase::Search;
    let h = bfs.multi_ball(g, &picks, 2 * radius);
    outcome.search_size = Some(h.len());
    let sub = g.induced(&h);
    let local: Vec<usize> = candidates
        .iter()
        .filter_map(|a| h.binary_search(a).ok())
        .collect();
    let mut sub_bfs = sub.bfs();
    let balls: Vec<Vec<usize>> = local
        .iter()
        .map(|&c| sub_bfs.ball(&sub, c, radius))
        .collect();
    if verify {
        let agree = local.iter().zip(&balls).all(|(&c, ball)| {
            let full = bfs.ball(g, h[c], radius);
            local
                .iter()
                .all(|&d| ball.binary_search(&d).is_ok() == full.binary_search(&h[d]).is_ok())
        });
        outcome.distances_agree = Some(agree);
    }
    let mut search = Search {
        balls: &balls,
        local: &local,
        blocked: vec![0; h.len()],
        chosen: Vec::new(),
        m,
    };
    if search.run(0) {
        outcome.exists = true;
        outcome.witnesses = search.chosen.iter().map(|&i| h[local[i]]).collect();
    }
    outcome
}

struct Search<'a> {
    balls: &'a [Vec<usize>],
    local: &'a [usize],
    blocked: Vec<u32>,
    chosen: Vec<usize>,
    m: usize,
}

impl Search<'_> {
    fn open(&self, i: usize) -> bool {
        self.blocked[self.local[i]] == 0
    }

    fn run(&mut self, from: usize) -> bool {
        if self.chosen.len() == self.m {
            return true;
        }
        let available = (from..self.local.len()).filter(|&i| self.open(i)).count();
        if available + self.chosen.len() < self.m {
            return false;
        }
        for i in from..self.local.len() {
            if !self.open(i) {
                continue;
            }
            for &b in &self.balls[i] {
                self.blocked[b] += 1;
            }
            self.chosen.push(i);
            if self.run(i + 1) {
                return true;
            }
            self.chosen.pop();
            for &b in &self.balls[i] {
                self.blocked[b] -= 1;
            }
        }
        false
    }
}

/// Builds the cover for radius `r` under `strategy`, with kernels.
pub fn build_cover(g: &GaifmanGraph, r: usize, strategy: Strategy) -> Result<Cover, EngineError> {
    let cover = match strategy {
        Strategy::Peleg { k } => covers::peleg_cover(g, r, k)?,
        Strategy::BfsLayers => covers::bfs_layer_cover(g, r),
    };
    Ok(covers::kernels(g, &cover, r)?)
}

/// The satisfying set of `psi` and the number of pieces that evaluated at
/// least one element.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SatisfierSet {
    pub elements: Vec<Element>,
    pub pieces_used: usize,
}

/// `{a | s ⊨ psi(a)}` for an `r`-local `psi`, evaluating each element in
/// the first piece whose kernel contains it.
pub fn local_satisfier_set(
    s: &Structure,
    cover: &Cover,
    psi: &Formula,
    r: usize,
    parallel: bool,
) -> Result<SatisfierSet, EngineError> {
    let center = center_var();
    if !check_r_local(psi, r, &center) {
        return Err(EngineError::NotLocal {
            formula: psi.to_string(),
            radius: r,
        });
    }
    let kernels = cover.kernels().ok_or(EngineError::MissingKernels)?;
    let n = s.universe_size();
    let mut assigned: Vec<Vec<Element>> = vec![Vec::new(); kernels.len()];
    let mut owned = vec![false; n];
    for (i, kernel) in kernels.iter().enumerate() {
        for &a in kernel {
            if !std::mem::replace(&mut owned[a], true) {
                assigned[i].push(a);
            }
        }
    }
    if let Some(a) = owned.iter().position(|&o| !o) {
        return Err(EngineError::Uncovered(a));
    }
    let compiled = CompiledFormula::compile(psi, s.vocabulary(), &[center])?;
    let work: Vec<(&Vec<Element>, &Vec<Element>)> = cover
        .pieces()
        .iter()
        .zip(&assigned)
        .filter(|(_, own)| !own.is_empty())
        .collect();
    let eval_piece = |(piece, own): &(&Vec<Element>, &Vec<Element>)| -> Vec<Element> {
        let (sub, relabel) = s
            .induced_substructure(piece)
            .expect("pieces are non-empty subsets of the universe");
        let mut ctx = EvalContext::new(&sub);
        own.iter()
            .copied()
            .filter(|&a| {
                let local = relabel.local(a).expect("kernel lies inside its piece");
                compiled.evaluate(&mut ctx, &[local], Quantification::Guarded)
            })
            .collect()
    };
    let found: Vec<Vec<Element>> = if parallel {
        work.par_iter().map(eval_piece).collect()
    } else {
        work.iter().map(eval_piece).collect()
    };
    let mut elements: Vec<Element> = found.into_iter().flatten().collect();
    elements.sort_unstable();
    Ok(SatisfierSet {
        elements,
        pieces_used: work.len(),
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LeafReport {
    pub r: usize,
    pub m: usize,
    pub verdict: bool,
    pub satisfiers: usize,
    pub cover: CoverStats,
    pub pieces_used: usize,
    pub scattered_phase: ScatteredPhase,
    pub witnesses: Option<Vec<Element>>,
    pub distances_agree: Option<bool>,
    pub timings: PhaseTimings,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EvalReport {
    pub verdict: bool,
    pub strategy: Strategy,
    pub leaves: Vec<LeafReport>,
    pub timings: PhaseTimings,
}

/// Decides one basic local sentence using a prepared cover with kernels
/// for the leaf's radius.
pub fn check_leaf_with_cover(
    s: &Structure,
    g: &GaifmanGraph,
    leaf: &BasicLocalSentence,
    cover: &Cover,
    cfg: &EngineConfig,
) -> Result<LeafReport, EngineError> {
    let r = leaf.radius();
    if cover.radius() != r {
        return Err(CoverError::RadiusMismatch {
            cover: cover.radius(),
            requested: r,
        }
        .into());
    }
    let mut timings = PhaseTimings::default();
    let start = Instant::now();
    let p = local_satisfier_set(s, cover, leaf.psi(), r, cfg.parallel_pieces)?;
    timings.local_eval_ns = nanos(start.elapsed());
    let start = Instant::now();
    let outcome = scattered_exists(g, &p.elements, 2 * r, leaf.count(), cfg.verify_scattered);
    timings.scattered_ns = nanos(start.elapsed());
    Ok(LeafReport {
        r,
        m: leaf.count(),
        verdict: outcome.exists,
        satisfiers: p.elements.len(),
        cover: cover.stats(),
        pieces_used: p.pieces_used,
        scattered_phase: outcome.phase,
        witnesses: (cfg.record_witnesses && outcome.exists).then_some(outcome.witnesses),
        distances_agree: outcome.distances_agree,
        timings,
    })
}

/// Decides `sentence` on `s`: one cover per leaf, then the Boolean fold.
pub fn check_sentence(
    s: &Structure,
    sentence: &GaifmanSentence,
    cfg: &EngineConfig,
) -> Result<EvalReport, EngineError> {
    let start = Instant::now();
    let g = s.gaifman_graph();
    let graph_ns = nanos(start.elapsed());
    let mut timings = PhaseTimings {
        cover_ns: graph_ns,
        ..PhaseTimings::default()
    };
    let mut leaves = Vec::new();
    for leaf in sentence.leaves() {
        let r = leaf.radius();
        let start = Instant::now();
        let cover = match cfg.strategy {
            Strategy::Peleg { k } => covers::peleg_cover(&g, r, k)?,
            Strategy::BfsLayers => covers::bfs_layer_cover(&g, r),
        };
        let cover_ns = nanos(start.elapsed());
        let start = Instant::now();
        let cover = covers::kernels(&g, &cover, r)?;
        let kernels_ns = nanos(start.elapsed());
        let mut report = check_leaf_with_cover(s, &g, leaf, &cover, cfg)?;
        report.timings.cover_ns = cover_ns;
        report.timings.kernels_ns = kernels_ns;
        timings.add(&report.timings);
        leaves.push(report);
    }
    let values: Vec<bool> = leaves.iter().map(|l| l.verdict).collect();
    Ok(EvalReport {
        verdict: sentence.fold(&values),
        strategy: cfg.strategy,
        leaves,
        timings,
    })
}
