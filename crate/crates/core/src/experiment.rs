//! Policy comparisons over the replication x duration matrix.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::simulator::{self, SimConfig, SimError, SimMetrics, Slack};
use crate::workload::{self, experiment_matrix, Cell, WorkloadError, WorkloadSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Arm {
    /// On-demand provisioning, no prediction.
    Baseline,
    /// ART2-driven pre-allocation and prefetching.
    Art2,
}

impl Arm {
    pub fn as_str(self) -> &'static str {
        match self {
            Arm::Baseline => "baseline",
            Arm::Art2 => "art2",
        }
    }
}

impl std::str::FromStr for Arm {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "baseline" => Ok(Arm::Baseline),
            "art2" => Ok(Arm::Art2),
            other => Err(format!("unknown arm {other:?} (expected baseline or art2)")),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ExperimentError {
    #[error("cell (replication {replication}, duration {duration}, {arm}, {slack}): {source}")]
    Cell {
        replication: usize,
        duration: f64,
        arm: &'static str,
        slack: &'static str,
        #[source]
        source: SimError,
    },
    #[error("cell (replication {replication}, duration {duration}): {source}")]
    Workload {
        replication: usize,
        duration: f64,
        #[source]
        source: WorkloadError,
    },
    #[error("thread pool: {0}")]
    Pool(String),
    #[error("nothing to run: {0}")]
    Empty(&'static str),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone)]
pub struct CompareSettings {
    pub workload: WorkloadSpec,
    /// Template for every cell; duration, arm and slack are filled in.
    pub sim: SimConfig,
    pub arms: Vec<Arm>,
    pub slacks: Vec<Slack>,
}

impl Default for CompareSettings {
    fn default() -> Self {
        Self {
            workload: WorkloadSpec::default(),
            sim: SimConfig::default(),
            arms: vec![Arm::Baseline, Arm::Art2],
            slacks: vec![Slack::Tight, Slack::Relaxed],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellResult {
    pub replication: usize,
    pub seed: u64,
    pub duration: f64,
    pub arm: Arm,
    pub slack: Slack,
    pub metrics: SimMetrics,
}

/// Simulator config for one cell of the matrix.
pub fn cell_config(template: &SimConfig, spec: &WorkloadSpec, duration: f64, arm: Arm, slack: Slack) -> SimConfig {
    SimConfig {
        duration,
        prefetch_enabled: arm == Arm::Art2,
        deadline_slack: slack,
        catalog_size: spec.n_objects,
        ..template.clone()
    }
}

fn run_cell(settings: &CompareSettings, cell: Cell) -> Result<Vec<CellResult>, ExperimentError> {
    let spec = WorkloadSpec { seed: cell.seed, ..settings.workload.clone() };
    let wl = workload::generate(&spec, cell.duration).map_err(|source| ExperimentError::Workload {
        replication: cell.replication,
        duration: cell.duration,
        source,
    })?;
    let mut out = Vec::with_capacity(settings.arms.len() * settings.slacks.len());
    for &arm in &settings.arms {
        for &slack in &settings.slacks {
            let config = cell_config(&settings.sim, &spec, cell.duration, arm, slack);
            let metrics = simulator::run(&config, &wl.requests).map_err(|source| ExperimentError::Cell {
                replication: cell.replication,
                duration: cell.duration,
                arm: arm.as_str(),
                slack: slack.as_str(),
                source,
            })?;
            out.push(CellResult {
                replication: cell.replication,
                seed: cell.seed,
                duration: cell.duration,
                arm,
                slack,
                metrics,
            });
        }
    }
    Ok(out)
}

/// Runs every (cell, arm, slack) combination. Cells run in parallel on
/// `workers` threads (all cores when `None`); results come back in matrix
/// order regardless.
pub fn run_compare(settings: &CompareSettings, workers: Option<usize>) -> Result<Vec<CellResult>, ExperimentError> {
    if settings.arms.is_empty() {
        return Err(ExperimentError::Empty("no policy arm selected"));
    }
    if settings.slacks.is_empty() {
        return Err(ExperimentError::Empty("no deadline slack selected"));
    }
    let cells = experiment_matrix(&settings.workload);
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = workers {
        builder = builder.num_threads(n.max(1));
    }
    let pool = builder.build().map_err(|e| ExperimentError::Pool(e.to_string()))?;
    let per_cell: Vec<Vec<CellResult>> =
        pool.install(|| cells.par_iter().map(|&cell| run_cell(settings, cell)).collect::<Result<_, _>>())?;
    Ok(per_cell.into_iter().flatten().collect())
}

#[derive(Debug, Serialize)]
struct ReportRow {
    duration: f64,
    arm: &'static str,
    slack: &'static str,
    replication: usize,
    seed: u64,
    submitted: u64,
    rejected: u64,
    completed: u64,
    in_flight: u64,
    total_cost: f64,
    cost_per_task: Option<f64>,
    prefetch_hit_rate: Option<f64>,
    clusters: usize,
}

/// One CSV row per cell.
pub fn write_report<W: Write>(out: W, results: &[CellResult]) -> Result<(), ExperimentError> {
    let mut w = csv::Writer::from_writer(out);
    for r in results {
        let m = &r.metrics;
        w.serialize(ReportRow {
            duration: r.duration,
            arm: r.arm.as_str(),
            slack: r.slack.as_str(),
            replication: r.replication,
            seed: r.seed,
            submitted: m.submitted,
            rejected: m.rejected,
            completed: m.completed,
            in_flight: m.in_flight_at_end,
            total_cost: m.total_cost,
            cost_per_task: m.cost_per_task,
            prefetch_hit_rate: m.prefetch_hit_rate(),
            clusters: m.clusters,
        })?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Serialize)]
struct SeriesRow {
    duration: f64,
    arm: &'static str,
    slack: &'static str,
    replication: usize,
    time: f64,
    cost_per_task: f64,
}

/// `duration,arm,slack,replication,time,cost_per_task` rows.
pub fn write_series<W: Write>(out: W, results: &[CellResult]) -> Result<(), ExperimentError> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    w.write_record(["duration", "arm", "slack", "replication", "time", "cost_per_task"])?;
    for r in results {
        for &(time, cost_per_task) in &r.metrics.cost_per_task_series {
            w.serialize(SeriesRow {
                duration: r.duration,
                arm: r.arm.as_str(),
                slack: r.slack.as_str(),
                replication: r.replication,
                time,
                cost_per_task,
            })?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Fraction of item pairs on which two labelings agree about being in
/// the same group (the Rand index).
pub fn pairwise_agreement<A: PartialEq, B: PartialEq>(a: &[A], b: &[B]) -> f64 {
    assert_eq!(a.len(), b.len(), "labelings must cover the same items");
    let mut agree = 0u64;
    let mut total = 0u64;
    for i in 0..a.len() {
        for j in i + 1..a.len() {
            total += 1;
            if (a[i] == a[j]) == (b[i] == b[j]) {
                agree += 1;
            }
        }
    }
    if total == 0 {
        1.0
    } else {
        agree as f64 / total as f64
    }
}
