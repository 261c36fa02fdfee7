//! The scheme restricted to a tour pool, with each stage posed as a packing
//! LP and solved approximately.
//!
//! Stage LP over `(y, ξ) ≥ 0`:
//!
//! ```text
//! max γ·y(P) + ξ
//!     y(S)     ≤ λ(S) − ξ*_S   fixed tours
//!     y(S) + ξ ≤ λ(S)          unfixed tours outside the span
//!     y(S)     ≤ λ(S)          unfixed tours inside the span
//! ```
//!
//! The approximate solver gives no usable duals, so after each stage every
//! unfixed tour outside the span whose slack is within `tol_fix` is fixed at
//! its current excess.

use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::pool::TourPool;
use crate::game::rational::{from_f64, to_f64};
use crate::lp::{self, Bound, LinearProgram, Relation, Sense, SpanBasis};
use crate::packing::{solve_packing_best_of, PackingLp, PackingOptions};
use crate::{Error, Result};

/// How each stage LP is solved.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StageBackend {
    /// Randomized packing solver, best of `restarts`.
    Packing,
    /// Exact rational simplex; tours are fixed by nonzero duals.
    Exact,
}

#[derive(Clone, Debug, PartialEq)]
pub struct StageConfig {
    pub gamma: f64,
    pub eps: f64,
    pub restarts: usize,
    pub tol_fix: f64,
    pub seed: u64,
    pub backend: StageBackend,
}

impl Default for StageConfig {
    fn default() -> Self {
        StageConfig {
            gamma: 2.0,
            eps: 0.2,
            restarts: 5,
            tol_fix: 1e-6,
            seed: 0,
            backend: StageBackend::Packing,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RowKind {
    Fixed,
    Free,
    Span,
}

/// Fixed tours of a run and the span of their incidence vectors.
#[derive(Clone, Debug)]
pub struct PackingState {
    /// `ξ*_S` per pool tour, once fixed.
    pub fixed: Vec<Option<f64>>,
    pub span: SpanBasis,
    in_span: Vec<bool>,
}

impl PackingState {
    pub fn new(n: usize, pool_len: usize) -> Self {
        PackingState {
            fixed: vec![None; pool_len],
            span: SpanBasis::new(n),
            in_span: vec![false; pool_len],
        }
    }

    fn refresh_span(&mut self, pool: &TourPool) -> Result<()> {
        for i in 0..pool.len() {
            if self.fixed[i].is_none() && !self.in_span[i] {
                self.in_span[i] = self.span.contains_members(&pool.get(i).members)?;
            }
        }
        Ok(())
    }

    /// Some unfixed tour lies outside the span.
    pub fn has_free(&self) -> bool {
        (0..self.fixed.len()).any(|i| self.kind(i) == RowKind::Free)
    }

    pub fn kind(&self, i: usize) -> RowKind {
        if self.fixed[i].is_some() {
            RowKind::Fixed
        } else if self.in_span[i] {
            RowKind::Span
        } else {
            RowKind::Free
        }
    }
}

/// The stage LP; variable `n` is `ξ`. Row `i` belongs to pool tour `i`.
pub fn stage_packing_lp(state: &PackingState, pool: &TourPool, gamma: f64) -> Result<PackingLp> {
    let n = state.span.dim();
    let mut objective = vec![gamma; n];
    objective.push(1.0);
    let mut lp = PackingLp::new(objective)?;
    for (i, t) in pool.tours().iter().enumerate() {
        let mut entries: Vec<(usize, f64)> = t.members.iter().map(|&p| (p, 1.0)).collect();
        let rhs = match state.kind(i) {
            RowKind::Fixed => t.lambda - state.fixed[i].expect("fixed"),
            RowKind::Free => {
                entries.push((n, 1.0));
                t.lambda
            }
            RowKind::Span => t.lambda,
        };
        if rhs < 0.0 {
            return Err(Error::Internal(format!("stage row {i} has negative right-hand side {rhs}")));
        }
        lp.add_row(entries, rhs)?;
    }
    if !state.has_free() {
        // Nothing bounds ξ: pin it at zero so the stage only raises y.
        lp.add_row(vec![(n, 1.0)], 0.0)?;
    }
    Ok(lp)
}

/// Outcome of one run of the packing scheme over a pool.
#[derive(Clone, Debug)]
pub struct PackingRun {
    pub y: Vec<f64>,
    /// `ξ` of each stage.
    pub xi: Vec<f64>,
    /// Span of the fixed tours after each stage, when proper.
    pub subspaces: Vec<SpanBasis>,
    pub state: PackingState,
    /// Pool tours fixed during the run or tight in the last stage.
    pub relevant: Vec<bool>,
    /// The run stopped without reaching full rank.
    pub stagnated: bool,
}

/// Seed of stage `stage` derived from a base seed.
pub fn stage_seed(seed: u64, stage: usize) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stage as u64 + 1);
    rng.gen()
}

struct StageSolution {
    y: Vec<f64>,
    xi: f64,
    /// Free rows to fix, with their excess.
    fix: Vec<(usize, f64)>,
}

fn solve_packing_stage(
    lp: &PackingLp,
    state: &PackingState,
    pool: &TourPool,
    config: &StageConfig,
    seed: u64,
) -> Result<StageSolution> {
    let n = state.span.dim();
    let options = PackingOptions {
        eps: config.eps,
        restarts: config.restarts,
        max_iterations: None,
        parallel: true,
    };
    let sol = solve_packing_best_of(lp, &options, seed)?;
    let y = sol.x[..n].to_vec();
    // Raise ξ to the smallest free slack; ξ occurs in free rows only.
    let mut xi = f64::INFINITY;
    for (i, t) in pool.tours().iter().enumerate() {
        if state.kind(i) == RowKind::Free {
            xi = xi.min(t.excess(&y));
        }
    }
    let xi = if xi.is_finite() { xi.max(0.0) } else { sol.x[n] };
    let mut fix = Vec::new();
    for (i, t) in pool.tours().iter().enumerate() {
        if state.kind(i) == RowKind::Free {
            let e = t.excess(&y);
            if e - xi <= config.tol_fix * t.lambda.max(1.0) {
                fix.push((i, e));
            }
        }
    }
    Ok(StageSolution { y, xi, fix })
}

fn solve_exact_stage(lp: &PackingLp, state: &PackingState, pool: &TourPool) -> Result<StageSolution> {
    let n = state.span.dim();
    let mut exact = LinearProgram::new(Sense::Maximize, lp.objective().iter().map(|&c| from_f64(c)).collect());
    for row in lp.rows() {
        exact.add_sparse_row(
            &row.entries.iter().map(|&(j, a)| (j, from_f64(a))).collect::<Vec<_>>(),
            Relation::Le,
            from_f64(row.rhs),
        )?;
    }
    for j in 0..=n {
        exact.set_bounds(j, Bound::nonnegative());
    }
    let sol = lp::solve(&exact)?;
    if !sol.is_optimal() {
        return Err(Error::Internal(format!("exact stage LP ended {:?}", sol.status)));
    }
    let y: Vec<f64> = sol.primal[..n].iter().map(to_f64).collect();
    let xi = to_f64(&sol.primal[n]);
    let mut fix = Vec::new();
    for (i, t) in pool.tours().iter().enumerate() {
        if state.kind(i) == RowKind::Free && !sol.dual[i].is_zero() {
            let load: crate::Rational = t.members.iter().map(|&p| sol.primal[p].clone()).sum();
            fix.push((i, to_f64(&(from_f64(t.lambda) - load))));
        }
    }
    Ok(StageSolution { y, xi, fix })
}

/// Runs the scheme on `pool` until the fixed tours span `ℝ^P` or two
/// consecutive stages fix nothing.
pub fn mps_packing_run(n: usize, pool: &TourPool, config: &StageConfig) -> Result<PackingRun> {
    if pool.is_empty() || !pool.covers(n) {
        return Err(Error::InvalidInput("the pool must cover every player".into()));
    }
    let mut state = PackingState::new(n, pool.len());
    let mut xi_trace = Vec::new();
    let mut subspaces = Vec::new();
    let mut relevant = vec![false; pool.len()];
    let mut y = vec![0.0; n];
    let mut idle = 0;
    let mut stagnated = false;
    let mut last_fix: Vec<usize> = Vec::new();
    while !state.span.is_full() {
        if xi_trace.len() >= n + 2 {
            stagnated = true;
            break;
        }
        state.refresh_span(pool)?;
        let lp = stage_packing_lp(&state, pool, config.gamma)?;
        let stage = xi_trace.len();
        let sol = match config.backend {
            StageBackend::Packing => solve_packing_stage(&lp, &state, pool, config, stage_seed(config.seed, stage))?,
            StageBackend::Exact => solve_exact_stage(&lp, &state, pool)?,
        };
        y = sol.y;
        xi_trace.push(sol.xi);
        last_fix = sol.fix.iter().map(|&(i, _)| i).collect();
        if !state.has_free() {
            // The pool spans no further direction.
            stagnated = true;
            break;
        }
        if sol.fix.is_empty() {
            idle += 1;
            if idle >= 2 {
                stagnated = true;
                break;
            }
            continue;
        }
        idle = 0;
        for (i, e) in sol.fix {
            state.fixed[i] = Some(e);
            relevant[i] = true;
            state.span.insert_members(&pool.get(i).members)?;
        }
        log::debug!("packing stage {}: xi = {:.6}, rank {}", stage + 1, xi_trace[stage], state.span.rank());
        if !state.span.is_full() {
            subspaces.push(state.span.clone());
        }
    }
    for i in last_fix {
        relevant[i] = true;
    }
    if stagnated {
        log::warn!("packing scheme stopped at rank {} of {n}", state.span.rank());
    }
    Ok(PackingRun {
        y,
        xi: xi_trace,
        subspaces,
        state,
        relevant,
        stagnated,
    })
}
