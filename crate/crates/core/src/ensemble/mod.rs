//! Monte Carlo orchestration: sweep plans, per-sample records, ensemble
//! statistics, extreme-tail selection, and structural-correlation reports.

mod io;
mod seed;
mod stats;

pub use io::{append_record, read_jsonl, write_csv, write_jsonl};
pub use seed::{derive_seed, retry_seed};
pub use stats::{histogram, mean, standard_error, std_dev};

use crate::bath::BathSpec;
use crate::constants::{
    DEFAULT_COUPLING_CONST, DEFAULT_ENERGY_WINDOW, DEFAULT_GAMMA, DEFAULT_LAMBDA,
    DEFAULT_PATH_THRESHOLD, DEFAULT_R_LOSS, DEFAULT_R_TRAP, DEFAULT_TEMPERATURE,
};
use crate::error::{Error, Result};
use crate::exciton::{build_hamiltonian, spectral_descriptors};
use crate::geometry::{sample_configuration, CouplingModel};
use crate::pathways::{path_metrics, z_axis_proximity};
use crate::tc2::{ete_laplace, ete_time_domain, Method, SinkSpec};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Maximum deterministic re-seeds for a packing-infeasible draw before the
/// cell itself is considered infeasible.
pub const MAX_PACKING_RETRIES: u32 = 32;

/// Full factorial sweep description plus shared physics parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPlan {
    pub diameters: Vec<f64>,
    pub site_counts: Vec<usize>,
    pub lambdas: Vec<f64>,
    pub samples_per_cell: usize,
    pub master_seed: u64,
    pub gamma: f64,
    pub temperature: f64,
    pub r_trap: f64,
    pub r_loss: f64,
    pub energy_window: f64,
    pub coupling_const: f64,
    pub path_threshold: f64,
    pub solver: Method,
    /// Integration horizon (ps) when `solver` is the time-domain method.
    pub t_max: f64,
}

impl Default for SweepPlan {
    /// Desk-scale defaults: one 7-site cell at d = 30 Å, λ = 35 cm⁻¹,
    /// 200 samples.
    fn default() -> Self {
        SweepPlan {
            diameters: vec![30.0],
            site_counts: vec![7],
            lambdas: vec![DEFAULT_LAMBDA],
            samples_per_cell: 200,
            master_seed: 1,
            gamma: DEFAULT_GAMMA,
            temperature: DEFAULT_TEMPERATURE,
            r_trap: DEFAULT_R_TRAP,
            r_loss: DEFAULT_R_LOSS,
            energy_window: DEFAULT_ENERGY_WINDOW,
            coupling_const: DEFAULT_COUPLING_CONST,
            path_threshold: DEFAULT_PATH_THRESHOLD,
            solver: Method::Laplace,
            t_max: 20_000.0,
        }
    }
}

impl SweepPlan {
    pub fn validate(&self) -> Result<()> {
        if self.diameters.is_empty() || self.site_counts.is_empty() || self.lambdas.is_empty() {
            return Err(Error::InvalidParameter(
                "sweep plan needs non-empty diameters, site counts, and lambdas".into(),
            ));
        }
        if self.samples_per_cell == 0 {
            return Err(Error::InvalidParameter(
                "samples_per_cell must be >= 1".into(),
            ));
        }
        for &lambda in &self.lambdas {
            BathSpec::new(lambda, self.gamma, self.temperature)?;
        }
        SinkSpec::new(self.r_loss, self.r_trap, 0)?;
        CouplingModel::new(self.coupling_const)?;
        if self.r_loss <= 0.0 && self.solver == Method::Laplace {
            return Err(Error::InvalidParameter(
                "the Laplace solver requires r_loss > 0".into(),
            ));
        }
        if !self.t_max.is_finite() || self.t_max <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "t_max must be > 0, got {}",
                self.t_max
            )));
        }
        Ok(())
    }

    /// Cells in deterministic order: site count, then diameter, then λ.
    pub fn cells(&self) -> Vec<CellParams> {
        let mut out = Vec::new();
        for &n in &self.site_counts {
            for &diameter in &self.diameters {
                for &lambda in &self.lambdas {
                    out.push(CellParams {
                        n,
                        diameter,
                        lambda,
                    });
                }
            }
        }
        out
    }
}

/// One (n, d, λ) point of a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CellParams {
    pub n: usize,
    pub diameter: f64,
    pub lambda: f64,
}

/// Self-contained result of one Monte Carlo sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleRecord {
    pub seed: u64,
    pub n: usize,
    pub diameter: f64,
    pub lambda: f64,
    pub eta: f64,
    pub eta_loss: f64,
    pub mean_gap: f64,
    pub gap_std: f64,
    pub ground_trap_overlap: f64,
    /// None for n = 2 (no intermediates).
    pub z_proximity: Option<f64>,
    pub max_path_strength: f64,
    pub dominant_path_count: usize,
    pub positivity_flag: bool,
    /// Packing-infeasible draws that were re-seeded before this one.
    pub retries: u32,
    pub method: Method,
}

/// Deterministically compute one sample of one cell.
pub fn run_cell(plan: &SweepPlan, cell: CellParams, sample_index: u64) -> Result<SampleRecord> {
    let base_seed = derive_seed(plan.master_seed, cell.n, cell.diameter, sample_index);
    let mut seed = base_seed;
    let mut retries = 0u32;
    let config = loop {
        match sample_configuration(cell.n, cell.diameter, plan.energy_window, seed) {
            Ok(c) => break c,
            Err(e @ Error::PackingInfeasible { .. }) => {
                if retries >= MAX_PACKING_RETRIES {
                    return Err(e);
                }
                retries += 1;
                seed = retry_seed(seed);
            }
            Err(e) => return Err(e),
        }
    };

    let model = CouplingModel::new(plan.coupling_const)?;
    let h = build_hamiltonian(&config, &model)?;
    let bath = BathSpec::new(cell.lambda, plan.gamma, plan.temperature)?;
    let sinks = SinkSpec::new(plan.r_loss, plan.r_trap, config.trap_index)?;
    let transport = match plan.solver {
        Method::Laplace => ete_laplace(&h, &bath, &sinks, config.initial_index)?,
        Method::TimeDomain => {
            ete_time_domain(&h, &bath, &sinks, config.initial_index, plan.t_max)?
        }
    };
    let descriptors = spectral_descriptors(&h, config.trap_index)?;
    let z_proximity = if cell.n >= 3 {
        Some(z_axis_proximity(&config)?)
    } else {
        None
    };
    let metrics = path_metrics(
        &h,
        config.initial_index,
        config.trap_index,
        plan.path_threshold,
    )?;

    Ok(SampleRecord {
        seed,
        n: cell.n,
        diameter: cell.diameter,
        lambda: cell.lambda,
        eta: transport.eta,
        eta_loss: transport.eta_loss,
        mean_gap: descriptors.mean_gap,
        gap_std: descriptors.gap_std,
        ground_trap_overlap: descriptors.ground_trap_overlap,
        z_proximity,
        max_path_strength: metrics.max_strength,
        dominant_path_count: metrics.count_over_threshold,
        positivity_flag: transport.positivity_violation,
        retries,
        method: transport.method,
    })
}

/// All samples of one cell, in sample-index order.
pub fn run_cell_batch(plan: &SweepPlan, cell: CellParams) -> Result<Vec<SampleRecord>> {
    let indices: Vec<u64> = (0..plan.samples_per_cell as u64).collect();
    #[cfg(feature = "parallel")]
    {
        indices
            .par_iter()
            .map(|&i| run_cell(plan, cell, i))
            .collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        indices.iter().map(|&i| run_cell(plan, cell, i)).collect()
    }
}

/// Run every cell of the plan; record order is deterministic
/// (cells in plan order, samples by index).
pub fn run_plan(plan: &SweepPlan) -> Result<Vec<SampleRecord>> {
    plan.validate()?;
    let mut records = Vec::with_capacity(plan.cells().len() * plan.samples_per_cell);
    for cell in plan.cells() {
        records.extend(run_cell_batch(plan, cell)?);
    }
    Ok(records)
}

/// Aggregated statistics of one cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellSummary {
    pub n: usize,
    pub diameter: f64,
    pub lambda: f64,
    pub samples: usize,
    pub mean_eta: f64,
    pub std_eta: f64,
    pub sem_eta: f64,
    pub histogram: Vec<usize>,
    pub bin_edges: Vec<f64>,
}

fn group_key(r: &SampleRecord) -> (usize, u64, u64) {
    (r.n, r.diameter.to_bits(), r.lambda.to_bits())
}

/// Group records by (n, d, λ) and summarize each group with an ETE
/// histogram over [0, 1].
pub fn summarize_cells(records: &[SampleRecord], bins: usize) -> Vec<CellSummary> {
    let mut groups: BTreeMap<(usize, u64, u64), Vec<f64>> = BTreeMap::new();
    let mut meta: BTreeMap<(usize, u64, u64), (usize, f64, f64)> = BTreeMap::new();
    for r in records {
        let key = group_key(r);
        groups.entry(key).or_default().push(r.eta);
        meta.entry(key).or_insert((r.n, r.diameter, r.lambda));
    }
    groups
        .into_iter()
        .map(|(key, etas)| {
            let (n, diameter, lambda) = meta[&key];
            let (histogram, bin_edges) = stats::histogram(&etas, 0.0, 1.0, bins);
            CellSummary {
                n,
                diameter,
                lambda,
                samples: etas.len(),
                mean_eta: stats::mean(&etas),
                std_eta: stats::std_dev(&etas),
                sem_eta: stats::standard_error(&etas),
                histogram,
                bin_edges,
            }
        })
        .collect()
}

/// Site-count sweep: runs the plan and tabulates mean/std per (n, d, λ).
pub fn sweep_n(plan: &SweepPlan) -> Result<(Vec<SampleRecord>, Vec<CellSummary>)> {
    let records = run_plan(plan)?;
    let summaries = summarize_cells(&records, 10);
    Ok((records, summaries))
}

/// Density sweep over diameters: identical machinery, kept as a named entry
/// point for the CLI; histograms use `bins` bins on [0, 1].
pub fn sweep_density(plan: &SweepPlan, bins: usize) -> Result<(Vec<SampleRecord>, Vec<CellSummary>)> {
    let records = run_plan(plan)?;
    let summaries = summarize_cells(&records, bins.max(1));
    Ok((records, summaries))
}

/// Smallest site count after which every further step adds less than 0.01
/// absolute mean ETE (the ≤1% marginal-gain rule). `points` is (n, mean η),
/// in any order; None for empty input.
pub fn saturation_site_count(points: &[(usize, f64)]) -> Option<usize> {
    if points.is_empty() {
        return None;
    }
    let mut sorted = points.to_vec();
    sorted.sort_by_key(|&(n, _)| n);
    let gains: Vec<f64> = sorted.windows(2).map(|w| w[1].1 - w[0].1).collect();
    for (i, &(n, _)) in sorted.iter().enumerate() {
        if gains[i..].iter().all(|&g| g < 0.01) {
            return Some(n);
        }
    }
    Some(sorted.last().unwrap().0)
}

/// Both efficiency tails, each of size ≤ m.
#[derive(Debug, Clone, PartialEq)]
pub struct Extremes {
    /// Highest-η records, best first.
    pub top: Vec<SampleRecord>,
    /// Lowest-η records, worst first.
    pub bottom: Vec<SampleRecord>,
    /// True when m exceeded the population and the full set was returned.
    pub truncated: bool,
}

/// Stable selection of the m highest- and lowest-efficiency records;
/// ties are broken by seed. If m exceeds the population, both tails are the
/// full population (flagged).
pub fn select_extremes(records: &[SampleRecord], m: usize) -> Extremes {
    let mut sorted: Vec<SampleRecord> = records.to_vec();
    sorted.sort_by(|a, b| a.eta.total_cmp(&b.eta).then(a.seed.cmp(&b.seed)));
    let truncated = m > sorted.len();
    let k = m.min(sorted.len());
    let bottom = sorted[..k].to_vec();
    let top: Vec<SampleRecord> = sorted[sorted.len() - k..].iter().rev().cloned().collect();
    Extremes {
        top,
        bottom,
        truncated,
    }
}

/// Summary statistics of one efficiency tail.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailStats {
    pub mean_eta: f64,
    pub mean_overlap: f64,
    /// Mean over the tail of the per-sample mean exciton gap (cm⁻¹).
    pub gap_mean: f64,
    /// Spread across the tail of the per-sample mean gap (cm⁻¹).
    pub gap_std: f64,
    pub mean_z: Option<f64>,
    pub mean_dominant: f64,
}

fn tail_stats(records: &[&SampleRecord]) -> TailStats {
    let etas: Vec<f64> = records.iter().map(|r| r.eta).collect();
    let overlaps: Vec<f64> = records.iter().map(|r| r.ground_trap_overlap).collect();
    let gaps: Vec<f64> = records.iter().map(|r| r.mean_gap).collect();
    let zs: Vec<f64> = records.iter().filter_map(|r| r.z_proximity).collect();
    let dominants: Vec<f64> = records
        .iter()
        .map(|r| r.dominant_path_count as f64)
        .collect();
    TailStats {
        mean_eta: stats::mean(&etas),
        mean_overlap: stats::mean(&overlaps),
        gap_mean: stats::mean(&gaps),
        gap_std: stats::std_dev(&gaps),
        mean_z: if zs.is_empty() {
            None
        } else {
            Some(stats::mean(&zs))
        },
        mean_dominant: stats::mean(&dominants),
    }
}

/// Mean dominant-path count over each tail of size m.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DominantVsM {
    pub m: usize,
    pub top_mean: f64,
    pub bottom_mean: f64,
}

/// Correlation summary for one (n, d, λ) group.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellCorrelation {
    pub n: usize,
    pub diameter: f64,
    pub lambda: f64,
    pub population: usize,
    /// Effective tail size after truncation to the population.
    pub m: usize,
    pub top: TailStats,
    pub bottom: TailStats,
    /// Mean ground–trap overlap of the top tail over the bottom tail.
    pub overlap_ratio: f64,
    pub z_all: Option<f64>,
    /// Top-tail mean z-proximity over the all-samples mean.
    pub z_ratio_top_all: Option<f64>,
    pub dominant_vs_m: Vec<DominantVsM>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationReport {
    pub cells: Vec<CellCorrelation>,
}

/// The m grid used for dominant-path-count curves: 10..90 by 10, 100..900
/// by 100, 1000..5000 by 1000, truncated to the available population.
pub fn m_grid(population: usize) -> Vec<usize> {
    let mut grid: Vec<usize> = (1..=9).map(|k| k * 10).collect();
    grid.extend((1..=9).map(|k| k * 100));
    grid.extend((1..=5).map(|k| k * 1000));
    grid.retain(|&m| m <= population);
    grid
}

/// Per-(n, d, λ) tail-vs-population correlations at tail size m.
pub fn correlation_report(records: &[SampleRecord], m: usize) -> CorrelationReport {
    let mut groups: BTreeMap<(usize, u64, u64), Vec<&SampleRecord>> = BTreeMap::new();
    for r in records {
        groups.entry(group_key(r)).or_default().push(r);
    }
    let mut cells = Vec::new();
    for group in groups.values() {
        let owned: Vec<SampleRecord> = group.iter().map(|&r| r.clone()).collect();
        let population = owned.len();
        let extremes = select_extremes(&owned, m);
        let k = extremes.top.len();
        let top_refs: Vec<&SampleRecord> = extremes.top.iter().collect();
        let bottom_refs: Vec<&SampleRecord> = extremes.bottom.iter().collect();
        let all_refs: Vec<&SampleRecord> = owned.iter().collect();
        let top = tail_stats(&top_refs);
        let bottom = tail_stats(&bottom_refs);
        let all = tail_stats(&all_refs);
        let overlap_ratio = top.mean_overlap / bottom.mean_overlap;
        let z_ratio_top_all = match (top.mean_z, all.mean_z) {
            (Some(t), Some(a)) if a > 0.0 => Some(t / a),
            _ => None,
        };
        let dominant_vs_m = m_grid(population)
            .into_iter()
            .map(|mm| {
                let e = select_extremes(&owned, mm);
                let t: Vec<&SampleRecord> = e.top.iter().collect();
                let b: Vec<&SampleRecord> = e.bottom.iter().collect();
                DominantVsM {
                    m: mm,
                    top_mean: tail_stats(&t).mean_dominant,
                    bottom_mean: tail_stats(&b).mean_dominant,
                }
            })
            .collect();
        let first = &owned[0];
        cells.push(CellCorrelation {
            n: first.n,
            diameter: first.diameter,
            lambda: first.lambda,
            population,
            m: k,
            top,
            bottom,
            overlap_ratio,
            z_all: all.mean_z,
            z_ratio_top_all,
            dominant_vs_m,
        });
    }
    CorrelationReport { cells }
}
