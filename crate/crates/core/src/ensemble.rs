//! Independent replicas and their order-independent reduction.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::engine::{Simulation, SimulationConfig, Snapshot};
use crate::error::{KinexError, Result};
use crate::stats::{self, DistributionSummary, Histogram, SummaryOptions};

/// Environment variable capping replica parallelism (`0` = all cores).
pub const THREADS_ENV: &str = "KINEX_THREADS";

/// Scalar statistics of one replica's final population.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReplicaStats {
    pub replica: u64,
    pub gini: f64,
    pub mode: f64,
    pub nu: Option<f64>,
}

/// Everything kept from one finished replica.
#[derive(Debug, Clone, PartialEq)]
pub struct ReplicaOutcome {
    pub stats: ReplicaStats,
    pub final_wealth: Vec<f64>,
    pub snapshots: Vec<Snapshot>,
}

/// Runs one replica to `cfg.steps`, recording the snapshot schedule.
pub fn run_replica_outcome(cfg: &SimulationConfig, replica: u64, opts: &SummaryOptions) -> Result<ReplicaOutcome> {
    let mut sim = Simulation::new(cfg, replica)?;
    let mut snapshots = Vec::new();
    for at in cfg.snapshot_schedule() {
        sim.run_until(at);
        snapshots.push(sim.snapshot());
    }
    sim.run_until(cfg.steps);
    let final_wealth = sim.wealth();
    let stats = ReplicaStats {
        replica,
        gini: stats::gini(&final_wealth)?,
        mode: stats::sample_mode(&final_wealth, opts.bins)?,
        nu: stats::fit_pareto_tail(&final_wealth, opts.tail_fraction).ok().map(|f| f.nu()),
    };
    Ok(ReplicaOutcome { stats, final_wealth, snapshots })
}

/// Partial ensemble keyed by replica index. Merging is a union, so any
/// grouping or order of merges yields the same accumulator.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct EnsembleAccumulator {
    replicas: BTreeMap<u64, ReplicaOutcome>,
}

impl EnsembleAccumulator {
    pub fn single(outcome: ReplicaOutcome) -> Self {
        let mut replicas = BTreeMap::new();
        replicas.insert(outcome.stats.replica, outcome);
        Self { replicas }
    }

    pub fn merge(mut self, other: EnsembleAccumulator) -> Self {
        self.replicas.extend(other.replicas);
        self
    }

    pub fn len(&self) -> usize {
        self.replicas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.replicas.is_empty()
    }

    /// Pools the replicas in index order and measures the result.
    pub fn finalize(&self, opts: &SummaryOptions) -> Result<EnsembleSummary> {
        if self.replicas.is_empty() {
            return Err(KinexError::Undefined("empty ensemble".into()));
        }
        let pooled: Vec<f64> = self.replicas.values().flat_map(|r| r.final_wealth.iter().copied()).collect();
        let distribution = DistributionSummary::from_samples(&pooled, opts)?;
        let replicas: Vec<ReplicaStats> = self.replicas.values().map(|r| r.stats).collect();
        let count = replicas.len() as f64;
        let gini_mean = replicas.iter().map(|r| r.gini).sum::<f64>() / count;
        let mode_mean = replicas.iter().map(|r| r.mode).sum::<f64>() / count;

        let first = self.replicas.values().next().unwrap();
        let mut snapshots = Vec::with_capacity(first.snapshots.len());
        for (k, s) in first.snapshots.iter().enumerate() {
            let at_step: Vec<f64> = self
                .replicas
                .values()
                .flat_map(|r| r.snapshots[k].wealth.iter().copied())
                .collect();
            snapshots.push(SnapshotHistogram {
                step: s.step,
                histogram: Histogram::from_samples(&at_step, opts.bins, stats::default_hist_max(&at_step))?,
            });
        }
        Ok(EnsembleSummary { distribution, gini_mean, mode_mean, replicas, snapshots, pooled })
    }
}

/// Pooled histogram of all replicas at one scheduled step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnapshotHistogram {
    pub step: u64,
    pub histogram: Histogram,
}

#[derive(Debug, Clone)]
pub struct EnsembleSummary {
    /// Measurements of the pooled final populations.
    pub distribution: DistributionSummary,
    /// Mean of the per-replica Gini coefficients.
    pub gini_mean: f64,
    /// Mean of the per-replica modes.
    pub mode_mean: f64,
    pub replicas: Vec<ReplicaStats>,
    pub snapshots: Vec<SnapshotHistogram>,
    /// Final wealth of every agent of every replica, in replica order.
    pub pooled: Vec<f64>,
}

impl EnsembleSummary {
    /// Pooled-histogram mode.
    pub fn mode(&self) -> f64 {
        self.distribution.mode
    }

    pub fn nu(&self) -> Option<f64> {
        self.distribution.tail_fit.as_ref().ok().map(|f| f.nu())
    }
}

/// Parallelism requested through [`THREADS_ENV`]; unset or invalid means all cores.
pub fn threads_from_env() -> usize {
    std::env::var(THREADS_ENV).ok().and_then(|v| v.trim().parse().ok()).unwrap_or(0)
}

/// Runs `cfg.ensemble` replicas on up to `threads` threads (`0` = all cores).
/// The result does not depend on `threads`.
pub fn run_ensemble_with(cfg: &SimulationConfig, opts: &SummaryOptions, threads: usize) -> Result<EnsembleSummary> {
    cfg.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| KinexError::Config(format!("thread pool: {e}")))?;
    let acc = pool.install(|| {
        (0..cfg.ensemble as u64)
            .into_par_iter()
            .map(|r| run_replica_outcome(cfg, r, opts).map(EnsembleAccumulator::single))
            .try_reduce(EnsembleAccumulator::default, |a, b| Ok(a.merge(b)))
    })?;
    acc.finalize(opts)
}

/// [`run_ensemble_with`] using default summary options and [`THREADS_ENV`].
pub fn run_ensemble(cfg: &SimulationConfig) -> Result<EnsembleSummary> {
    run_ensemble_with(cfg, &SummaryOptions::default(), threads_from_env())
}
