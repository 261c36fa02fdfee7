//! Approximate solver for packing LPs `max cᵀx, Ax ≤ b, x ≥ 0` with
//! nonnegative data.
//!
//! The solver is a multiplicative-weights scheme in the style of Garg and
//! Könemann. Each row carries a weight that grows exponentially with its
//! load. Each step picks a column whose weighted cost is within a factor
//! `1 + ε/4` of the cheapest one, drawn at random from the seeded generator,
//! and pushes that column until its bottleneck row fills once. The weights
//! give a dual bound at every step. A run stops as soon as the scaled primal
//! point is certified within `1 + ε` of that bound, or when the classical
//! iteration budget is spent. The returned point is always scaled to be
//! feasible.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct PackingRow {
    pub entries: Vec<(usize, f64)>,
    pub rhs: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PackingLp {
    objective: Vec<f64>,
    rows: Vec<PackingRow>,
}

impl PackingLp {
    pub fn new(objective: Vec<f64>) -> Result<Self> {
        if let Some(c) = objective.iter().find(|c| !(c.is_finite() && **c >= 0.0)) {
            return Err(Error::InvalidInput(format!("objective entry {c} is not a nonnegative number")));
        }
        Ok(PackingLp {
            objective,
            rows: Vec::new(),
        })
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn objective(&self) -> &[f64] {
        &self.objective
    }

    pub fn rows(&self) -> &[PackingRow] {
        &self.rows
    }

    /// Adds `Σ a_j x_j ≤ rhs`. A zero `rhs` pins every variable in the row
    /// to zero.
    pub fn add_row(&mut self, entries: Vec<(usize, f64)>, rhs: f64) -> Result<usize> {
        if !(rhs.is_finite() && rhs >= 0.0) {
            return Err(Error::InvalidInput(format!("right-hand side {rhs} is not a nonnegative number")));
        }
        for (j, a) in &entries {
            if *j >= self.num_vars() {
                return Err(Error::InvalidInput(format!("variable index {j} out of range")));
            }
            if !(a.is_finite() && *a >= 0.0) {
                return Err(Error::InvalidInput(format!("coefficient {a} is not a nonnegative number")));
            }
        }
        self.rows.push(PackingRow { entries, rhs });
        Ok(self.rows.len() - 1)
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        self.objective.iter().zip(x).map(|(c, v)| c * v).sum()
    }

    /// `max_i (Ax)_i / b_i`, or infinity when a zero-rhs row is loaded.
    pub fn max_load(&self, x: &[f64]) -> f64 {
        self.rows
            .iter()
            .map(|r| {
                let lhs: f64 = r.entries.iter().map(|(j, a)| a * x[*j]).sum();
                if r.rhs > 0.0 {
                    lhs / r.rhs
                } else if lhs > 0.0 {
                    f64::INFINITY
                } else {
                    0.0
                }
            })
            .fold(0.0, f64::max)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PackingOptions {
    pub eps: f64,
    /// Independent runs; the best one is returned.
    pub restarts: usize,
    /// Hard cap on steps per run; `None` uses the classical budget only.
    pub max_iterations: Option<usize>,
    /// Run restarts on the rayon pool.
    pub parallel: bool,
}

impl Default for PackingOptions {
    fn default() -> Self {
        PackingOptions {
            eps: 0.1,
            restarts: 5,
            max_iterations: None,
            parallel: true,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PackingSolution {
    pub x: Vec<f64>,
    pub objective: f64,
    /// Dual bound on the optimum found during the run.
    pub upper_bound: f64,
    pub iterations: usize,
    /// Whether the run stopped on the `1 + ε` certificate.
    pub certified: bool,
}

/// Column-scaled copy with unit objective and unit right-hand sides.
struct Normalized {
    /// Original variable of each kept column.
    vars: Vec<usize>,
    cols: Vec<Vec<(usize, f64)>>,
    rows: Vec<Vec<(usize, f64)>>,
    col_max: Vec<f64>,
}

fn normalize(lp: &PackingLp) -> Result<Normalized> {
    let n = lp.num_vars();
    let mut pinned = vec![false; n];
    let mut appears = vec![false; n];
    for r in &lp.rows {
        for (j, a) in &r.entries {
            if *a > 0.0 {
                appears[*j] = true;
                if r.rhs == 0.0 {
                    pinned[*j] = true;
                }
            }
        }
    }
    let mut index = vec![usize::MAX; n];
    let mut vars = Vec::new();
    for j in 0..n {
        if lp.objective[j] > 0.0 && !pinned[j] {
            if !appears[j] {
                return Err(Error::Unbounded(format!("variable {j} has positive objective and appears in no row")));
            }
            index[j] = vars.len();
            vars.push(j);
        }
    }
    let mut cols: Vec<Vec<(usize, f64)>> = vec![Vec::new(); vars.len()];
    let mut rows = Vec::new();
    for r in &lp.rows {
        if r.rhs == 0.0 {
            continue;
        }
        let mut merged: Vec<(usize, f64)> = r
            .entries
            .iter()
            .filter(|(j, a)| *a > 0.0 && index[*j] != usize::MAX)
            .map(|(j, a)| (index[*j], a / (r.rhs * lp.objective[*j])))
            .collect();
        if merged.is_empty() {
            continue;
        }
        merged.sort_by_key(|e| e.0);
        merged.dedup_by(|b, a| {
            if a.0 == b.0 {
                a.1 += b.1;
                true
            } else {
                false
            }
        });
        let i = rows.len();
        for (k, a) in &merged {
            cols[*k].push((i, *a));
        }
        rows.push(merged);
    }
    let col_max = cols.iter().map(|c| c.iter().map(|e| e.1).fold(0.0, f64::max)).collect();
    Ok(Normalized {
        vars,
        cols,
        rows,
        col_max,
    })
}

/// Weights are renormalized once their sum passes this value.
const RESCALE_AT: f64 = 1e150;

fn run(norm: &Normalized, eps: f64, seed: u64, max_iterations: Option<usize>) -> (Vec<f64>, f64, usize, bool) {
    let m = norm.rows.len();
    let k = norm.cols.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let step_eps = eps / 4.0;
    let mut y = vec![1.0f64; m];
    let mut sum_y = m as f64;
    let mut log_scale = 0.0f64;
    // Classical stopping point: Σy reaches ((1+ε)m)^{1/ε} / (1+ε) times its start.
    let log_stop = (m as f64).ln() + ((1.0 + step_eps) * m as f64).ln() / step_eps - (1.0 + step_eps).ln();
    let mut col_cost: Vec<f64> = norm.cols.iter().map(|c| c.iter().map(|e| e.1).sum()).collect();
    let mut load = vec![0.0f64; m];
    let mut max_load = 0.0f64;
    let mut x = vec![0.0f64; k];
    let mut total = 0.0f64;
    let mut upper = f64::INFINITY;
    let mut iterations = 0usize;
    let mut candidates = Vec::with_capacity(k);
    let refresh_every = 64 * (k + 1);
    loop {
        let min_cost = col_cost.iter().copied().fold(f64::INFINITY, f64::min);
        upper = upper.min(sum_y / min_cost);
        if max_load > 0.0 && (total / max_load) * (1.0 + eps) >= upper {
            return (x, upper, iterations, true);
        }
        if (sum_y.ln() + log_scale) >= log_stop || max_iterations.is_some_and(|cap| iterations >= cap) {
            return (x, upper, iterations, false);
        }
        let limit = min_cost * (1.0 + step_eps);
        candidates.clear();
        candidates.extend((0..k).filter(|&j| col_cost[j] <= limit));
        let j = candidates[rng.gen_range(0..candidates.len())];
        let delta = 1.0 / norm.col_max[j];
        x[j] += delta;
        total += delta;
        for &(i, a) in &norm.cols[j] {
            load[i] += a * delta;
            max_load = max_load.max(load[i]);
            let dy = y[i] * step_eps * a * delta;
            y[i] += dy;
            sum_y += dy;
            for &(c, b) in &norm.rows[i] {
                col_cost[c] += b * dy;
            }
        }
        iterations += 1;
        if sum_y > RESCALE_AT || iterations % refresh_every == 0 {
            let s = if sum_y > RESCALE_AT { 1.0 / sum_y } else { 1.0 };
            log_scale -= s.ln();
            for v in y.iter_mut() {
                *v *= s;
            }
            sum_y = y.iter().sum();
            for (c, col) in col_cost.iter_mut().zip(&norm.cols) {
                *c = col.iter().map(|&(i, a)| a * y[i]).sum();
            }
        }
    }
}

/// Scales a normalized point into the feasible region, then raises each
/// column in turn by the slack of its bottleneck row.
fn fill_up(norm: &Normalized, x: &mut [f64]) {
    let mut load: Vec<f64> = norm.rows.iter().map(|r| r.iter().map(|&(k, a)| a * x[k]).sum()).collect();
    let peak = load.iter().copied().fold(0.0, f64::max);
    if peak > 0.0 {
        for v in x.iter_mut() {
            *v /= peak;
        }
        for l in load.iter_mut() {
            *l /= peak;
        }
    }
    for (k, col) in norm.cols.iter().enumerate() {
        let step = col.iter().map(|&(i, a)| (1.0 - load[i]).max(0.0) / a).fold(f64::INFINITY, f64::min);
        if step > 0.0 && step.is_finite() {
            x[k] += step;
            for &(i, a) in col {
                load[i] += a * step;
            }
        }
    }
}

/// Relative safety margin applied when scaling into the feasible region.
const FEASIBILITY_MARGIN: f64 = 1e-11;

fn solve_once(lp: &PackingLp, norm: &Normalized, eps: f64, seed: u64, cap: Option<usize>) -> PackingSolution {
    let n = lp.num_vars();
    if norm.cols.is_empty() {
        return PackingSolution {
            x: vec![0.0; n],
            objective: 0.0,
            upper_bound: 0.0,
            iterations: 0,
            certified: true,
        };
    }
    let (mut xn, upper, iterations, certified) = run(norm, eps, seed, cap);
    fill_up(norm, &mut xn);
    let mut x = vec![0.0; n];
    for (k, &j) in norm.vars.iter().enumerate() {
        x[j] = xn[k] / lp.objective[j];
    }
    let load = lp.max_load(&x);
    if load > 0.0 {
        let s = 1.0 / (load * (1.0 + FEASIBILITY_MARGIN));
        for v in x.iter_mut() {
            *v *= s;
        }
    }
    let objective = lp.value(&x);
    PackingSolution {
        x,
        objective,
        upper_bound: upper,
        iterations,
        certified,
    }
}

fn check_eps(eps: f64) -> Result<()> {
    if eps > 0.0 && eps < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!("eps must lie in (0, 1), got {eps}")))
    }
}

/// A single seeded run.
pub fn solve_packing(lp: &PackingLp, eps: f64, seed: u64) -> Result<PackingSolution> {
    check_eps(eps)?;
    let norm = normalize(lp)?;
    Ok(solve_once(lp, &norm, eps, seed, None))
}

/// Seed of restart `r` derived from a base seed.
pub fn restart_seed(seed: u64, r: usize) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(r as u64);
    rng.gen()
}

/// Best of `options.restarts` independent runs; ties go to the earliest.
pub fn solve_packing_best_of(lp: &PackingLp, options: &PackingOptions, seed: u64) -> Result<PackingSolution> {
    check_eps(options.eps)?;
    let norm = normalize(lp)?;
    let restarts = options.restarts.max(1);
    let one = |r: usize| solve_once(lp, &norm, options.eps, restart_seed(seed, r), options.max_iterations);
    let runs: Vec<PackingSolution> = if options.parallel {
        (0..restarts).into_par_iter().map(one).collect()
    } else {
        (0..restarts).map(one).collect()
    };
    let upper = runs.iter().map(|s| s.upper_bound).fold(f64::INFINITY, f64::min);
    let mut best = runs
        .into_iter()
        .reduce(|a, b| if b.objective > a.objective { b } else { a })
        .expect("at least one restart");
    best.upper_bound = upper;
    Ok(best)
}
