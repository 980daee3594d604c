//! Command-line front end: generators, model checking, brute-force oracle,
//! cover inspection and the scaling benchmark.
//!
//! Commands write machine-readable output to the given writer and
//! diagnostics to stderr. [`run`] returns the process exit code: 0 for a
//! true verdict or a valid cover, 1 for false or invalid. Errors map to 2 in
//! the binary.

pub mod bench;

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use folocal::covers::{self, piece_widths, validate_cover};
use folocal::engine::{check_sentence, EngineConfig, Strategy};
use folocal::generate;
use folocal::io::{parse_structure, structure_to_json, StructureFile};
use folocal::logic::{eval_gnf_naive, eval_naive, parse_sentence, Assignment, GaifmanSentence};
use folocal::structure::Structure;
use serde::Serialize;

/// Above this many elements the oracle warns that it may be slow.
const ORACLE_COMFORT: usize = 60;

#[derive(Debug, Parser)]
#[command(name = "folocal", version, about = "First-order model checking via Gaifman locality")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Family {
    Grid,
    RandDeg,
    Cycle,
    Setcover,
}

impl Family {
    pub fn name(self) -> &'static str {
        match self {
            Family::Grid => "grid",
            Family::RandDeg => "rand-deg",
            Family::Cycle => "cycle",
            Family::Setcover => "setcover",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum StrategyArg {
    Peleg,
    BfsLayers,
}

#[derive(Debug, Clone, Args)]
pub struct StrategyOpts {
    #[arg(long, value_enum, default_value = "bfs-layers")]
    pub strategy: StrategyArg,
    /// Exponent of the Peleg cover; total cover size is at most n^(1+1/k).
    #[arg(long, default_value_t = 2)]
    pub k: u32,
}

impl StrategyOpts {
    pub fn strategy(&self) -> Result<Strategy> {
        match self.strategy {
            StrategyArg::BfsLayers => Ok(Strategy::BfsLayers),
            StrategyArg::Peleg if self.k == 0 => bail!("--k must be at least 1"),
            StrategyArg::Peleg => Ok(Strategy::Peleg { k: self.k }),
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a generated structure to a file.
    Gen {
        #[arg(long, value_enum)]
        family: Family,
        /// Comma-separated key=value list, e.g. `width=8,height=8`.
        #[arg(long, default_value = "")]
        params: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(short = 'o', long = "out")]
        out: PathBuf,
    },
    /// Decide a Gaifman-normal-form sentence with the cover-based engine.
    Check {
        #[arg(long)]
        structure: PathBuf,
        #[arg(long)]
        gnf: PathBuf,
        #[command(flatten)]
        strategy: StrategyOpts,
        /// Evaluate cover pieces in parallel.
        #[arg(long)]
        parallel: bool,
    },
    /// Decide a sentence by brute force.
    Oracle {
        #[arg(long)]
        structure: PathBuf,
        #[arg(long, conflicts_with = "formula", required_unless_present = "formula")]
        gnf: Option<PathBuf>,
        /// A first-order sentence in text syntax.
        #[arg(long)]
        formula: Option<PathBuf>,
    },
    /// Build and validate a cover, printing CSV statistics.
    Covers {
        #[arg(long)]
        structure: PathBuf,
        #[arg(long)]
        r: usize,
        #[command(flatten)]
        strategy: StrategyOpts,
    },
    /// Time the engine on growing instances of a family.
    Bench {
        #[arg(long, value_enum)]
        family: Family,
        /// Ascending size parameters: grid side, or element count.
        #[arg(long, value_delimiter = ',', required = true)]
        sizes: Vec<usize>,
        #[arg(long)]
        gnf: PathBuf,
        #[command(flatten)]
        strategy: StrategyOpts,
        #[arg(long)]
        out: PathBuf,
        /// Runs per size; the fastest is kept.
        #[arg(long, default_value_t = 3)]
        reps: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

/// Parses `k=v,k=v` into a map of unsigned integers.
pub fn parse_params(text: &str) -> Result<BTreeMap<String, usize>> {
    let mut out = BTreeMap::new();
    for part in text.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let (k, v) = part
            .split_once('=')
            .ok_or_else(|| anyhow!("parameter `{part}` is not of the form key=value"))?;
        let value = v
            .trim()
            .parse()
            .with_context(|| format!("parameter `{k}` needs a non-negative integer"))?;
        if out.insert(k.trim().to_string(), value).is_some() {
            bail!("parameter `{k}` given twice");
        }
    }
    Ok(out)
}

struct Params {
    values: BTreeMap<String, usize>,
    family: Family,
}

impl Params {
    fn take(&mut self, key: &str) -> Result<usize> {
        self.values
            .remove(key)
            .ok_or_else(|| anyhow!("{} needs parameter `{key}`", self.family.name()))
    }

    fn take_or(&mut self, key: &str, default: usize) -> usize {
        self.values.remove(key).unwrap_or(default)
    }

    fn finish(self) -> Result<()> {
        match self.values.keys().next() {
            Some(k) => bail!("unknown parameter `{k}` for {}", self.family.name()),
            None => Ok(()),
        }
    }
}

#[derive(Debug, Serialize)]
struct GenSummary {
    family: &'static str,
    n: usize,
    total_size: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    optimum: Option<usize>,
}

/// Builds the structure for `gen`; also returns the planted optimum for
/// set-cover instances.
pub fn generate_family(family: Family, params: &str, seed: u64) -> Result<(Structure, Option<usize>)> {
    let mut p = Params {
        values: parse_params(params)?,
        family,
    };
    let result = match family {
        Family::Grid => {
            let (w, h) = (p.take("width")?, p.take("height")?);
            if w == 0 || h == 0 {
                bail!("grid needs width, height >= 1");
            }
            (generate::grid(w, h), None)
        }
        Family::RandDeg => (generate::rand_deg(p.take("n")?, p.take("deg")?, seed)?, None),
        Family::Cycle => (generate::cycle(p.take("n")?)?, None),
        Family::Setcover => {
            let inst = generate::setcover(
                p.take("ground")?,
                p.take("sets")?,
                p.take("freq")?,
                p.take_or("cover", 2),
                seed,
            )?;
            (inst.structure, Some(inst.optimum))
        }
    };
    p.finish()?;
    Ok(result)
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

pub fn load_structure(path: &Path) -> Result<StructureFile> {
    parse_structure(&read(path)?).with_context(|| format!("in {}", path.display()))
}

pub fn load_gnf(path: &Path) -> Result<GaifmanSentence> {
    GaifmanSentence::from_json(&read(path)?).with_context(|| format!("in {}", path.display()))
}

fn verdict_code(verdict: bool) -> u8 {
    if verdict {
        0
    } else {
        1
    }
}

#[derive(Debug, Serialize)]
struct CoverSummary {
    strategy: &'static str,
    r: usize,
    k: Option<u32>,
    pieces: usize,
    total_size: usize,
    max_piece: usize,
    n: usize,
    valid: bool,
    property1_failures: usize,
    property2_failures: usize,
}

#[derive(Debug, Serialize)]
struct PieceRow {
    piece: usize,
    size: usize,
    kernel_size: usize,
    width_upper_bound: usize,
}

/// Writes the `covers` report and returns whether the cover validated.
pub fn covers_report<W: Write>(s: &Structure, r: usize, strategy: Strategy, out: W) -> Result<bool> {
    let g = s.gaifman_graph();
    let (cover, name, k) = match strategy {
        Strategy::Peleg { k } => (covers::peleg_cover(&g, r, k)?, "peleg", Some(k)),
        Strategy::BfsLayers => (covers::bfs_layer_cover(&g, r), "bfs-layers", None),
    };
    let cover = covers::kernels(&g, &cover, r)?;
    let report = validate_cover(&g, &cover);
    let widths = report
        .piece_widths
        .clone()
        .unwrap_or_else(|| piece_widths(&g, &cover));
    let stats = cover.stats();
    let mut w = csv::Writer::from_writer(out);
    w.serialize(CoverSummary {
        strategy: name,
        r,
        k,
        pieces: stats.pieces,
        total_size: stats.total_size,
        max_piece: stats.max_piece,
        n: g.len(),
        valid: report.is_valid(),
        property1_failures: report.property1_failures.len(),
        property2_failures: report.property2_failures.len(),
    })?;
    // a blank line separates the summary from the per-piece table
    let mut out = w.into_inner().map_err(|e| anyhow!("{}", e.error()))?;
    writeln!(out)?;
    let mut w = csv::Writer::from_writer(out);
    let kernels = cover.kernels().expect("kernels were computed");
    for (i, piece) in cover.pieces().iter().enumerate() {
        w.serialize(PieceRow {
            piece: i,
            size: piece.len(),
            kernel_size: kernels[i].len(),
            width_upper_bound: widths[i],
        })?;
    }
    w.flush()?;
    if !report.is_valid() {
        eprintln!(
            "cover invalid: radius-{r} balls of {:?} uncovered, pieces {:?} too wide",
            report.property1_failures, report.property2_failures
        );
    }
    Ok(report.is_valid())
}

/// Runs one command, writing its output to `out`. Returns the exit code.
pub fn run<W: Write>(cli: Cli, mut out: W) -> Result<u8> {
    match cli.command {
        Command::Gen {
            family,
            params,
            seed,
            out: path,
        } => {
            let (s, optimum) = generate_family(family, &params, seed)?;
            fs::write(&path, structure_to_json(&s))
                .with_context(|| format!("cannot write {}", path.display()))?;
            let summary = GenSummary {
                family: family.name(),
                n: s.universe_size(),
                total_size: s.size().total_size,
                optimum,
            };
            writeln!(out, "{}", serde_json::to_string(&summary)?)?;
            Ok(0)
        }
        Command::Check {
            structure,
            gnf,
            strategy,
            parallel,
        } => {
            let file = load_structure(&structure)?;
            let sentence = load_gnf(&gnf)?;
            let cfg = EngineConfig {
                strategy: strategy.strategy()?,
                record_witnesses: true,
                parallel_pieces: parallel,
                verify_scattered: false,
            };
            let report = check_sentence(&file.structure, &sentence, &cfg)?;
            writeln!(out, "{}", serde_json::to_string_pretty(&report)?)?;
            Ok(verdict_code(report.verdict))
        }
        Command::Oracle {
            structure,
            gnf,
            formula,
        } => {
            let file = load_structure(&structure)?;
            let s = &file.structure;
            if s.universe_size() > ORACLE_COMFORT {
                eprintln!(
                    "warning: brute-force evaluation on {} elements may be slow",
                    s.universe_size()
                );
            }
            let verdict = match (gnf, formula) {
                (Some(path), _) => eval_gnf_naive(s, &load_gnf(&path)?)?,
                (None, Some(path)) => {
                    let phi = parse_sentence(&read(&path)?)
                        .with_context(|| format!("in {}", path.display()))?;
                    eval_naive(s, &phi, &Assignment::new())?
                }
                (None, None) => bail!("oracle needs --gnf or --formula"),
            };
            writeln!(out, "{verdict}")?;
            Ok(verdict_code(verdict))
        }
        Command::Covers {
            structure,
            r,
            strategy,
        } => {
            let file = load_structure(&structure)?;
            let valid = covers_report(&file.structure, r, strategy.strategy()?, out)?;
            Ok(verdict_code(valid))
        }
        Command::Bench {
            family,
            sizes,
            gnf,
            strategy,
            out: path,
            reps,
            seed,
        } => {
            let sentence = load_gnf(&gnf)?;
            let cfg = EngineConfig {
                strategy: strategy.strategy()?,
                record_witnesses: false,
                parallel_pieces: false,
                verify_scattered: false,
            };
            let rows = bench::run(family, &sizes, &sentence, &cfg, reps, seed)?;
            let file = fs::File::create(&path)
                .with_context(|| format!("cannot write {}", path.display()))?;
            bench::write_csv(file, &rows)?;
            let slope = bench::fit_slope(&rows);
            writeln!(
                out,
                "{}",
                serde_json::json!({ "rows": rows.len(), "slope": slope })
            )?;
            Ok(0)
        }
    }
}
