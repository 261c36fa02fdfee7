//! Euclidean fixed-capacity routing instances and tour costs.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Largest tour solved exactly by dynamic programming.
pub const EXACT_TOUR_LIMIT: usize = 12;

pub type Point = [f64; 2];

fn dist(a: Point, b: Point) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

/// A depot, one point per player and a bound on players per tour.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VrpInstance {
    pub depot: Point,
    pub points: Vec<Point>,
    pub capacity: usize,
}

impl VrpInstance {
    pub fn new(depot: Point, points: Vec<Point>, capacity: usize) -> Result<Self> {
        let inst = VrpInstance {
            depot,
            points,
            capacity,
        };
        inst.validate()?;
        Ok(inst)
    }

    pub fn validate(&self) -> Result<()> {
        if self.capacity == 0 {
            return Err(Error::InvalidInput("tour capacity must be at least 1".into()));
        }
        if self.points.is_empty() {
            return Err(Error::InvalidInput("instance without players".into()));
        }
        let finite = |p: &Point| p[0].is_finite() && p[1].is_finite();
        if !finite(&self.depot) || !self.points.iter().all(finite) {
            return Err(Error::InvalidInput("coordinates must be finite".into()));
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.points.len()
    }

    /// Distance between two players.
    pub fn d(&self, p: usize, q: usize) -> f64 {
        dist(self.points[p], self.points[q])
    }

    /// Distance between the depot and a player.
    pub fn d0(&self, p: usize) -> f64 {
        dist(self.depot, self.points[p])
    }

    /// Length of the closed walk depot → order → depot.
    pub fn walk_length(&self, order: &[usize]) -> f64 {
        let (Some(&first), Some(&last)) = (order.first(), order.last()) else {
            return 0.0;
        };
        let inner: f64 = order.windows(2).map(|w| self.d(w[0], w[1])).sum();
        self.d0(first) + inner + self.d0(last)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let inst: VrpInstance = serde_json::from_str(text)?;
        inst.validate()?;
        Ok(inst)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Depot at the centre of the unit square, players uniform on it.
pub fn random_instance(n: usize, k: usize, seed: u64) -> Result<VrpInstance> {
    if n == 0 || k == 0 {
        return Err(Error::InvalidInput("need n ≥ 1 and k ≥ 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let points = (0..n).map(|_| [rng.gen::<f64>(), rng.gen::<f64>()]).collect();
    VrpInstance::new([0.5, 0.5], points, k)
}

/// Cheapest depot-anchored walk through `members`, with its visiting order.
///
/// Up to [`EXACT_TOUR_LIMIT`] members the walk is optimal (Held–Karp);
/// beyond that it is a nearest-neighbour tour improved by 2-opt. The returned
/// length is always recomputed from the order.
pub fn tour_cost(inst: &VrpInstance, members: &[usize]) -> Result<(f64, Vec<usize>)> {
    if members.len() > inst.capacity {
        return Err(Error::InvalidInput(format!(
            "tour with {} players exceeds capacity {}",
            members.len(),
            inst.capacity
        )));
    }
    if let Some(&p) = members.iter().find(|&&p| p >= inst.n()) {
        return Err(Error::InvalidInput(format!("player {p} out of range")));
    }
    let order = if members.len() <= EXACT_TOUR_LIMIT {
        held_karp(inst, members)
    } else {
        let mut order = nearest_neighbor(inst, members);
        two_opt(inst, &mut order);
        order
    };
    Ok((inst.walk_length(&order), order))
}

fn held_karp(inst: &VrpInstance, members: &[usize]) -> Vec<usize> {
    let m = members.len();
    if m <= 1 {
        return members.to_vec();
    }
    let full = (1usize << m) - 1;
    let mut best = vec![f64::INFINITY; (1 << m) * m];
    let mut parent = vec![usize::MAX; (1 << m) * m];
    for (i, &p) in members.iter().enumerate() {
        best[(1 << i) * m + i] = inst.d0(p);
    }
    for mask in 1..=full {
        for last in 0..m {
            let cur = best[mask * m + last];
            if mask >> last & 1 == 0 || !cur.is_finite() {
                continue;
            }
            for next in 0..m {
                if mask >> next & 1 == 1 {
                    continue;
                }
                let to = mask | 1 << next;
                let v = cur + inst.d(members[last], members[next]);
                if v < best[to * m + next] {
                    best[to * m + next] = v;
                    parent[to * m + next] = last;
                }
            }
        }
    }
    let mut last = (0..m)
        .min_by(|&a, &b| {
            let ca = best[full * m + a] + inst.d0(members[a]);
            let cb = best[full * m + b] + inst.d0(members[b]);
            ca.total_cmp(&cb)
        })
        .expect("nonempty");
    let mut mask = full;
    let mut order = Vec::with_capacity(m);
    loop {
        order.push(members[last]);
        let prev = parent[mask * m + last];
        mask &= !(1 << last);
        if prev == usize::MAX {
            break;
        }
        last = prev;
    }
    order.reverse();
    order
}

fn nearest_neighbor(inst: &VrpInstance, members: &[usize]) -> Vec<usize> {
    let mut left = members.to_vec();
    let mut order = Vec::with_capacity(left.len());
    let mut at: Option<usize> = None;
    while !left.is_empty() {
        let (i, _) = left
            .iter()
            .enumerate()
            .map(|(i, &q)| (i, at.map_or(inst.d0(q), |p| inst.d(p, q))))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .expect("nonempty");
        let q = left.remove(i);
        order.push(q);
        at = Some(q);
    }
    order
}

/// First-improvement 2-opt on the closed walk through the depot.
pub(crate) fn two_opt(inst: &VrpInstance, order: &mut [usize]) {
    let m = order.len();
    if m < 3 {
        return;
    }
    // Node `i` of the cycle: 0 is the depot, i ≥ 1 is order[i-1].
    let pos = |order: &[usize], a: usize, b: usize| -> f64 {
        match (a, b) {
            (0, 0) => 0.0,
            (0, j) | (j, 0) => inst.d0(order[j - 1]),
            (i, j) => inst.d(order[i - 1], order[j - 1]),
        }
    };
    let mut improved = true;
    while improved {
        improved = false;
        for i in 0..m {
            for j in i + 2..=m {
                // Reverse cycle nodes i+1..=j; edges (i,i+1) and (j,j+1 mod m+1).
                let jn = if j == m { 0 } else { j + 1 };
                let before = pos(order, i, i + 1) + pos(order, j, jn);
                let after = pos(order, i, j) + pos(order, i + 1, jn);
                if after < before - 1e-12 {
                    order[i..j].reverse();
                    improved = true;
                }
            }
        }
    }
}

/// Upper bound on the cost of serving `members` with several tours.
///
/// Members are swept by angle around the depot and cut into consecutive
/// groups of at most `capacity`; every rotation of the cut points is tried.
pub fn coalition_cost_ub(inst: &VrpInstance, members: &[usize]) -> Result<f64> {
    let k = inst.capacity;
    if members.len() <= k {
        return Ok(tour_cost(inst, members)?.0);
    }
    let angle = |p: usize| (inst.points[p][1] - inst.depot[1]).atan2(inst.points[p][0] - inst.depot[0]);
    let mut sorted = members.to_vec();
    sorted.sort_by(|&a, &b| angle(a).total_cmp(&angle(b)).then(a.cmp(&b)));
    let mut best = f64::INFINITY;
    for shift in 0..k {
        let mut rotated = sorted.clone();
        rotated.rotate_left(shift);
        let mut total = 0.0;
        for chunk in rotated.chunks(k) {
            total += tour_cost(inst, chunk)?.0;
        }
        best = best.min(total);
    }
    Ok(best)
}
