//! Operator-comparison grid: several seeded runs per (crossover, mutation)
//! cell, aggregated into one row per cell.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::ga::crossover::CrossoverKind;
use crate::ga::evolve::{evolve_with_rng, GaConfig, RunStats};
use crate::ga::individual::Individual;
use crate::ga::mutation::MutationKind;
use crate::image::BinaryWatermark;
use crate::par;
use crate::rng::{cell_stream, stream_rng};

pub const CSV_HEADER: &str = "crossover,mutation,nc0,av0,nc_final,av_final,iter";

/// Aggregate of one operator cell.
#[derive(Clone, Debug)]
pub struct ExperimentRow {
    pub crossover: CrossoverKind,
    pub mutation: MutationKind,
    /// Best initial NC over all runs.
    pub nc0: f64,
    /// Mean of the per-run initial bests.
    pub av0: f64,
    /// Best final NC over all runs.
    pub nc_final: f64,
    /// Mean of the per-run final bests.
    pub av_final: f64,
    /// Mean generation at which each run first reached its final best.
    pub iter: f64,
    pub runs: Vec<RunStats>,
    /// Fittest individual across the cell's runs (earliest run wins ties).
    pub best: Individual,
}

impl ExperimentRow {
    pub fn from_runs(
        crossover: CrossoverKind,
        mutation: MutationKind,
        results: Vec<(Individual, RunStats)>,
    ) -> Result<Self> {
        if results.is_empty() {
            return Err(Error::InvalidParameter("at least one run is required".into()));
        }
        let count = results.len() as f64;
        let mean = |f: &dyn Fn(&RunStats) -> f64| results.iter().map(|(_, s)| f(s)).sum::<f64>() / count;
        let min = |f: &dyn Fn(&RunStats) -> f64| results.iter().map(|(_, s)| f(s)).fold(f64::INFINITY, f64::min);

        let nc0 = min(&|s| s.nc0);
        let av0 = mean(&|s| s.nc0);
        let nc_final = min(&|s| s.nc_final);
        let av_final = mean(&|s| s.nc_final);
        let iter = mean(&|s| s.found_at as f64);
        let best = results
            .iter()
            .map(|(ind, _)| ind)
            .fold(None::<&Individual>, |acc, ind| match acc {
                Some(b) if b.fitness() <= ind.fitness() => Some(b),
                _ => Some(ind),
            })
            .unwrap()
            .clone();
        Ok(Self {
            crossover,
            mutation,
            nc0,
            av0,
            nc_final,
            av_final,
            iter,
            runs: results.into_iter().map(|(_, s)| s).collect(),
            best,
        })
    }

    pub fn csv_line(&self) -> String {
        format!(
            "{},{},{},{},{},{},{}",
            self.crossover, self.mutation, self.nc0, self.av0, self.nc_final, self.av_final, self.iter
        )
    }
}

/// Runs `runs` seeded repetitions of a single cell. Run `r` of cell `c`
/// draws from stream `(cfg.rng_seed, c << 32 | r)`.
pub fn run_cell(original: &BinaryWatermark, cfg: &GaConfig, runs: usize, cell: usize) -> Result<ExperimentRow> {
    if runs == 0 {
        return Err(Error::InvalidParameter("runs must be at least 1".into()));
    }
    let results = par::map_indices(runs, |r| {
        let mut rng = stream_rng(cfg.rng_seed, cell_stream(cell, r));
        evolve_with_rng(original, cfg, &mut rng)
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    ExperimentRow::from_runs(cfg.crossover, cfg.mutation, results)
}

/// Full grid, crossovers outermost. All `(cell, run)` pairs run
/// independently, so the result does not depend on scheduling.
pub fn run_experiment(
    original: &BinaryWatermark,
    crossovers: &[CrossoverKind],
    mutations: &[MutationKind],
    runs: usize,
    cfg: &GaConfig,
) -> Result<Vec<ExperimentRow>> {
    if runs == 0 {
        return Err(Error::InvalidParameter("runs must be at least 1".into()));
    }
    let cells: Vec<(CrossoverKind, MutationKind)> =
        crossovers.iter().flat_map(|&c| mutations.iter().map(move |&m| (c, m))).collect();

    let flat = par::map_indices(cells.len() * runs, |job| {
        let (cell, run) = (job / runs, job % runs);
        let (crossover, mutation) = cells[cell];
        let cell_cfg = GaConfig { crossover, mutation, ..*cfg };
        let mut rng = stream_rng(cfg.rng_seed, cell_stream(cell, run));
        evolve_with_rng(original, &cell_cfg, &mut rng)
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;

    let mut flat = flat.into_iter();
    cells.iter().map(|&(c, m)| ExperimentRow::from_runs(c, m, flat.by_ref().take(runs).collect())).collect()
}

/// CSV with the header `crossover,mutation,nc0,av0,nc_final,av_final,iter`.
pub fn experiment_csv(rows: &[ExperimentRow]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for row in rows {
        writeln!(out, "{}", row.csv_line()).unwrap();
    }
    out
}
