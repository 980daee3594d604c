//! Scaling benchmark: run the engine on growing instances of a family and
//! fit the log-log slope of running time against universe size.

use std::io::Write;

use anyhow::{bail, Result};
use folocal::engine::{check_sentence, EngineConfig, PhaseTimings};
use folocal::generate;
use folocal::logic::GaifmanSentence;
use folocal::structure::Structure;
use serde::Serialize;

use crate::Family;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchRow {
    pub family: String,
    pub size: usize,
    pub n: usize,
    pub total_size: usize,
    pub cover_ns: u64,
    pub kernels_ns: u64,
    pub local_eval_ns: u64,
    pub scattered_ns: u64,
    pub total_ns: u64,
    pub verdict: bool,
}

/// Instance of `family` for a size parameter: grid side length, or the
/// number of elements for the other families.
pub fn instance(family: Family, size: usize, seed: u64) -> Result<Structure> {
    Ok(match family {
        Family::Grid => {
            if size == 0 {
                bail!("grid side must be at least 1");
            }
            generate::grid(size, size)
        }
        Family::RandDeg => generate::rand_deg(size, 3.min(size.saturating_sub(1)).max(1), seed)?,
        Family::Cycle => generate::cycle(size)?,
        Family::Setcover => {
            let cover = (size / 8).max(1);
            generate::setcover(size, 2 * cover, 3, cover, seed)?.structure
        }
    })
}

/// Runs the engine `reps` times per size and keeps the fastest run.
pub fn run(
    family: Family,
    sizes: &[usize],
    sentence: &GaifmanSentence,
    cfg: &EngineConfig,
    reps: usize,
    seed: u64,
) -> Result<Vec<BenchRow>> {
    if sizes.windows(2).any(|w| w[0] >= w[1]) {
        bail!("sizes must be strictly ascending");
    }
    let mut rows = Vec::with_capacity(sizes.len());
    for &size in sizes {
        let s = instance(family, size, seed)?;
        let mut best: Option<(PhaseTimings, bool)> = None;
        for _ in 0..reps.max(1) {
            let report = check_sentence(&s, sentence, cfg)?;
            if best.is_none_or(|(t, _)| report.timings.total_ns() < t.total_ns()) {
                best = Some((report.timings, report.verdict));
            }
        }
        let (t, verdict) = best.expect("at least one repetition");
        rows.push(BenchRow {
            family: family.name().to_string(),
            size,
            n: s.universe_size(),
            total_size: s.size().total_size,
            cover_ns: t.cover_ns,
            kernels_ns: t.kernels_ns,
            local_eval_ns: t.local_eval_ns,
            scattered_ns: t.scattered_ns,
            total_ns: t.total_ns(),
            verdict,
        });
    }
    Ok(rows)
}

/// Least-squares slope of `ln(total_ns)` against `ln(n)`; `None` with fewer
/// than two distinct sizes.
pub fn fit_slope(rows: &[BenchRow]) -> Option<f64> {
    let points: Vec<(f64, f64)> = rows
        .iter()
        .map(|r| ((r.n as f64).ln(), (r.total_ns.max(1) as f64).ln()))
        .collect();
    let k = points.len() as f64;
    let mean_x = points.iter().map(|p| p.0).sum::<f64>() / k;
    let mean_y = points.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = points.iter().map(|p| (p.0 - mean_x).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mean_x) * (p.1 - mean_y)).sum();
    (points.len() >= 2 && sxx > 0.0).then(|| sxy / sxx)
}

pub fn write_csv<W: Write>(out: W, rows: &[BenchRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}
