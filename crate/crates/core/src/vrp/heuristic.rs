//! The constraint-generation heuristic: alternate tour generation and the
//! packing scheme, polish late iterations by local search, prune stale tours.

use serde::{Deserialize, Serialize};

use super::generate::generate_tours;
use super::instance::VrpInstance;
use super::pool::TourPool;
use super::postopt::{post_optimize, PostOptConfig};
use super::stage::{mps_packing_run, stage_seed, StageBackend, StageConfig};
use crate::lp::SpanBasis;
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct HeuristicConfig {
    pub iterations: usize,
    pub eps: f64,
    pub gamma: f64,
    pub threads: usize,
    /// First iteration (1-based) with post-optimization.
    pub post_opt_start: usize,
    /// Tours irrelevant for more than this many iterations are pruned.
    pub prune_age: usize,
    pub restarts: usize,
    pub seed: u64,
    pub tol_fix: f64,
    pub backend: StageBackend,
}

impl Default for HeuristicConfig {
    fn default() -> Self {
        HeuristicConfig {
            iterations: 12,
            eps: 0.2,
            gamma: 2.0,
            threads: 8,
            post_opt_start: 7,
            prune_age: 3,
            restarts: 5,
            seed: 0,
            tol_fix: 1e-6,
            backend: StageBackend::Packing,
        }
    }
}

impl HeuristicConfig {
    pub fn validate(&self) -> Result<()> {
        if self.iterations == 0 {
            return Err(Error::InvalidInput("iterations must be at least 1".into()));
        }
        if !(self.eps > 0.0 && self.eps < 1.0) {
            return Err(Error::InvalidInput(format!("eps must lie in (0, 1), got {}", self.eps)));
        }
        if self.gamma <= 1.0 || !self.gamma.is_finite() {
            return Err(Error::InvalidInput(format!("gamma must exceed 1, got {}", self.gamma)));
        }
        if self.threads == 0 || self.restarts == 0 {
            return Err(Error::InvalidInput("threads and restarts must be positive".into()));
        }
        Ok(())
    }
}

/// State after one iteration.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iter: usize,
    pub y: Vec<f64>,
    /// `‖y − y_prev‖₁ / ‖y_prev‖₁`.
    pub l1_rel_change: f64,
    pub pool_size: usize,
    pub stages: usize,
    pub stagnated: bool,
    pub post_opt_moves: usize,
}

#[derive(Clone, Debug)]
pub struct HeuristicResult {
    pub y: Vec<f64>,
    pub trace: Vec<IterationRecord>,
    pub pool: TourPool,
}

fn l1_rel_change(prev: &[f64], next: &[f64]) -> f64 {
    let diff: f64 = prev.iter().zip(next).map(|(a, b)| (a - b).abs()).sum();
    let base: f64 = prev.iter().map(|a| a.abs()).sum();
    if base > 0.0 {
        diff / base
    } else if diff == 0.0 {
        0.0
    } else {
        f64::INFINITY
    }
}

/// Runs the heuristic on a pool of `config.threads` workers.
pub fn run_heuristic(inst: &VrpInstance, config: &HeuristicConfig) -> Result<HeuristicResult> {
    inst.validate()?;
    config.validate()?;
    let workers = rayon::ThreadPoolBuilder::new()
        .num_threads(config.threads)
        .build()
        .map_err(|e| Error::Internal(format!("thread pool: {e}")))?;
    workers.install(|| run(inst, config))
}

fn run(inst: &VrpInstance, config: &HeuristicConfig) -> Result<HeuristicResult> {
    let n = inst.n();
    let mut y: Vec<f64> = (0..n).map(|p| 2.0 * inst.d0(p)).collect();
    let mut pool = TourPool::new();
    let mut subspaces: Vec<SpanBasis> = Vec::new();
    let mut trace = Vec::new();
    for iter in 1..=config.iterations {
        let prev = y.clone();
        generate_tours(inst, &y, &subspaces, &mut pool)?;
        if n == 1 {
            // The single tour's cost is the only happy allocation with maximal total.
            y = vec![pool.get(0).lambda];
            trace.push(IterationRecord {
                iter,
                l1_rel_change: l1_rel_change(&prev, &y),
                y: y.clone(),
                pool_size: pool.len(),
                stages: 0,
                stagnated: false,
                post_opt_moves: 0,
            });
            continue;
        }
        let stage_config = StageConfig {
            gamma: config.gamma,
            eps: config.eps,
            restarts: config.restarts,
            tol_fix: config.tol_fix,
            seed: stage_seed(config.seed, iter << 16),
            backend: config.backend,
        };
        let run = mps_packing_run(n, &pool, &stage_config)?;
        y = run.y;
        subspaces = run.subspaces;
        let mut relevant = run.relevant;
        let mut moves = 0;
        if iter >= config.post_opt_start {
            let report = post_optimize(inst, &mut y, &mut pool, &PostOptConfig::for_players(n))?;
            moves = report.moves;
            relevant.resize(pool.len(), true);
        }
        let tol = config.tol_fix;
        for (i, t) in pool.tours().iter().enumerate() {
            if t.excess(&y) <= tol * t.lambda.max(1.0) {
                relevant[i] = true;
            }
        }
        pool.age(&relevant);
        let pruned = pool.prune(config.prune_age);
        let record = IterationRecord {
            iter,
            l1_rel_change: l1_rel_change(&prev, &y),
            y: y.clone(),
            pool_size: pool.len(),
            stages: run.xi.len(),
            stagnated: run.stagnated,
            post_opt_moves: moves,
        };
        log::info!(
            "iteration {iter}: pool {} (pruned {pruned}), stages {}, change {:.4}",
            record.pool_size,
            record.stages,
            record.l1_rel_change
        );
        trace.push(record);
    }
    Ok(HeuristicResult { y, trace, pool })
}
