//! Local search on an allocation against the sorted excess vector of a pool.
//!
//! A move either raises one entry by `δ` (the total grows, so it is always
//! preferred while every tour stays happy) or shifts `δ` from one player to
//! another (accepted when the sorted pool excesses improve
//! lexicographically). After each move the cheapest tours through the player
//! that gained are probed with single-player exchanges; a probe that the new
//! allocation overcharges undoes the move, and probes tighter than anything
//! in the pool are added to it.

use super::generate::{cheapest_insertion, without};
use super::instance::VrpInstance;
use super::pool::{Tour, TourPool};
use crate::Result;

#[derive(Clone, Debug, PartialEq)]
pub struct PostOptConfig {
    /// Excess differences below `tol_lex` times the mean allocation are ties.
    pub tol_lex: f64,
    /// Accepted moves per call.
    pub max_moves: usize,
    /// Tours added to the pool per call.
    pub max_new_tours: usize,
    /// Tours probed around the player that gained.
    pub probe_tours: usize,
}

impl PostOptConfig {
    pub fn for_players(n: usize) -> Self {
        PostOptConfig {
            tol_lex: 1e-9,
            max_moves: 40 * n,
            max_new_tours: 2 * n,
            probe_tours: 2,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct PostOptReport {
    pub moves: usize,
    pub rejected_by_probe: usize,
    /// Pool indices of added tours.
    pub added: Vec<usize>,
}

struct Search<'a> {
    inst: &'a VrpInstance,
    pool: &'a mut TourPool,
    y: &'a mut [f64],
    excess: Vec<f64>,
    incidence: Vec<Vec<usize>>,
    tol: f64,
    config: &'a PostOptConfig,
    report: PostOptReport,
}

impl Search<'_> {
    fn contains(&self, t: usize, p: usize) -> bool {
        self.pool.get(t).members.binary_search(&p).is_ok()
    }

    /// Minimum excess over tours containing `p` but not `q`.
    fn min_only(&self, p: usize, q: Option<usize>) -> f64 {
        self.incidence[p]
            .iter()
            .filter(|&&t| q.is_none_or(|q| !self.contains(t, q)))
            .map(|&t| self.excess[t])
            .fold(f64::INFINITY, f64::min)
    }

    fn shift(&mut self, p: usize, delta: f64) {
        self.y[p] += delta;
        for &t in &self.incidence[p] {
            self.excess[t] -= delta;
        }
    }

    fn add_tour(&mut self, t: Tour) {
        let (i, new) = self.pool.insert(t);
        if !new {
            return;
        }
        let t = self.pool.get(i);
        self.excess.push(t.excess(self.y));
        for &p in &t.members {
            self.incidence[p].push(i);
        }
        self.report.added.push(i);
    }

    /// Probes exchanges around the cheapest tours containing `q`. Returns
    /// false if some probe is overcharged by the current allocation.
    fn probe(&mut self, q: usize) -> Result<bool> {
        if self.report.added.len() >= self.config.max_new_tours {
            return Ok(true);
        }
        let mut around: Vec<usize> = self.incidence[q].clone();
        around.sort_by(|&a, &b| self.excess[a].total_cmp(&self.excess[b]).then(a.cmp(&b)));
        around.truncate(self.config.probe_tours);
        let floor = self.excess.iter().copied().fold(f64::INFINITY, f64::min);
        let n = self.inst.n();
        let mut best: Option<(f64, Vec<usize>)> = None;
        for t in around {
            let tour = self.pool.get(t);
            let base = tour.order.clone();
            let mut variants: Vec<Vec<usize>> = Vec::new();
            for &a in &tour.members {
                if a == q {
                    continue;
                }
                let shorter = without(&base, a);
                for b in 0..n {
                    if !tour.members.contains(&b) {
                        variants.push(cheapest_insertion(self.inst, &shorter, b));
                    }
                }
            }
            if tour.members.len() < self.inst.capacity {
                for b in 0..n {
                    if !tour.members.contains(&b) {
                        variants.push(cheapest_insertion(self.inst, &base, b));
                    }
                }
            }
            for order in variants {
                let e = self.inst.walk_length(&order) - order.iter().map(|&p| self.y[p]).sum::<f64>();
                if best.as_ref().is_none_or(|(be, _)| e < *be) {
                    best = Some((e, order));
                }
            }
        }
        let Some((e, order)) = best else {
            return Ok(true);
        };
        if e >= floor - self.tol {
            return Ok(true);
        }
        let mut tour = Tour::from_order(self.inst, order);
        if self.pool.contains(&tour.members) {
            return Ok(true);
        }
        let solved = Tour::solve(self.inst, &tour.members)?;
        if solved.lambda < tour.lambda {
            tour = solved;
        }
        let e = tour.excess(self.y);
        if e >= floor - self.tol {
            return Ok(true);
        }
        self.add_tour(tour);
        Ok(e >= -self.tol)
    }

    /// Applies a move, probes, and undoes it if a probe is overcharged.
    fn try_move(&mut self, from: Option<usize>, to: usize, delta: f64) -> Result<bool> {
        if let Some(p) = from {
            self.shift(p, -delta);
        }
        self.shift(to, delta);
        if !self.probe(to)? {
            self.shift(to, -delta);
            if let Some(p) = from {
                self.shift(p, delta);
            }
            // A probe holding both ends of a transfer was overcharged before
            // the move as well; lower the receiver, then the other members,
            // until it is paid for.
            if let Some(&t) = self.report.added.last() {
                let mut owed = -self.excess[t];
                let mut members = self.pool.get(t).members.clone();
                members.sort_by_key(|&p| p != to);
                for p in members {
                    if owed <= 0.0 {
                        break;
                    }
                    let cut = owed.min(self.y[p]);
                    self.shift(p, -cut);
                    owed -= cut;
                }
            }
            self.report.rejected_by_probe += 1;
            return Ok(false);
        }
        self.report.moves += 1;
        Ok(true)
    }

    fn transfer_improves(&self, p: usize, q: usize, delta: f64) -> bool {
        let min_a = self.min_only(p, Some(q));
        let min_b = self.min_only(q, Some(p));
        if min_b < delta - self.tol || min_a + self.tol >= min_b {
            return false;
        }
        if min_b - delta > min_a + self.tol {
            return true;
        }
        let mut old = Vec::new();
        let mut new = Vec::new();
        for &t in &self.incidence[p] {
            if !self.contains(t, q) {
                old.push(self.excess[t]);
                new.push(self.excess[t] + delta);
            }
        }
        for &t in &self.incidence[q] {
            if !self.contains(t, p) {
                old.push(self.excess[t]);
                new.push(self.excess[t] - delta);
            }
        }
        old.sort_by(f64::total_cmp);
        new.sort_by(f64::total_cmp);
        for (o, v) in old.iter().zip(&new) {
            if *v > o + self.tol {
                return true;
            }
            if *v < o - self.tol {
                return false;
            }
        }
        false
    }

    fn sweep(&mut self, delta: f64) -> Result<bool> {
        let n = self.inst.n();
        let mut any = false;
        for p in 0..n {
            if self.report.moves >= self.config.max_moves {
                return Ok(any);
            }
            if self.min_only(p, None) >= delta + self.tol && self.try_move(None, p, delta)? {
                any = true;
            }
        }
        for p in 0..n {
            for q in 0..n {
                if self.report.moves >= self.config.max_moves {
                    return Ok(any);
                }
                if p == q || self.y[p] < delta {
                    continue;
                }
                if self.transfer_improves(p, q, delta) && self.try_move(Some(p), q, delta)? {
                    any = true;
                }
            }
        }
        Ok(any)
    }
}

/// Improves `y` in place and may add tours to `pool`.
pub fn post_optimize(inst: &VrpInstance, y: &mut [f64], pool: &mut TourPool, config: &PostOptConfig) -> Result<PostOptReport> {
    let n = inst.n();
    let scale = {
        let mean = y.iter().sum::<f64>() / n as f64;
        if mean > 0.0 {
            mean
        } else {
            1.0
        }
    };
    let excess = pool.tours().iter().map(|t| t.excess(y)).collect();
    let incidence = pool.incidence(n);
    let mut search = Search {
        inst,
        pool,
        y,
        excess,
        incidence,
        tol: config.tol_lex * scale,
        config,
        report: PostOptReport::default(),
    };
    let mut delta = scale / 16.0;
    while delta >= scale * 1e-6 {
        while search.report.moves < config.max_moves && search.sweep(delta)? {}
        delta /= 2.0;
    }
    Ok(search.report)
}
