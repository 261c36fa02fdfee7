//! Tours and the deduplicated pool the heuristic works on.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::instance::{tour_cost, VrpInstance};
use crate::Result;

/// A capacity-feasible coalition with a walk serving it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tour {
    /// Sorted player indices.
    pub members: Vec<usize>,
    /// Visiting order of the walk.
    pub order: Vec<usize>,
    /// Length of the walk; an upper bound on the coalition's cost.
    pub lambda: f64,
    /// Iterations since the tour was last relevant.
    pub age: usize,
}

impl Tour {
    /// Tour with the best walk [`tour_cost`] finds.
    pub fn solve(inst: &VrpInstance, members: &[usize]) -> Result<Tour> {
        let mut members = members.to_vec();
        members.sort_unstable();
        members.dedup();
        let (lambda, order) = tour_cost(inst, &members)?;
        Ok(Tour {
            members,
            order,
            lambda,
            age: 0,
        })
    }

    /// Tour with a given visiting order.
    pub fn from_order(inst: &VrpInstance, order: Vec<usize>) -> Tour {
        let mut members = order.clone();
        members.sort_unstable();
        Tour {
            members,
            lambda: inst.walk_length(&order),
            order,
            age: 0,
        }
    }

    pub fn load(&self, y: &[f64]) -> f64 {
        self.members.iter().map(|&p| y[p]).sum()
    }

    pub fn excess(&self, y: &[f64]) -> f64 {
        self.lambda - self.load(y)
    }
}

/// Tours keyed by member set, keeping the cheapest walk per set.
#[derive(Clone, Debug, Default)]
pub struct TourPool {
    tours: Vec<Tour>,
    index: HashMap<Vec<usize>, usize>,
}

impl TourPool {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.tours.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tours.is_empty()
    }

    pub fn tours(&self) -> &[Tour] {
        &self.tours
    }

    pub fn get(&self, i: usize) -> &Tour {
        &self.tours[i]
    }

    pub fn contains(&self, members: &[usize]) -> bool {
        self.index.contains_key(members)
    }

    /// Adds a tour or improves the walk of an existing one. Returns the
    /// index and whether the member set is new.
    pub fn insert(&mut self, tour: Tour) -> (usize, bool) {
        if let Some(&i) = self.index.get(&tour.members) {
            let old = &mut self.tours[i];
            if tour.lambda < old.lambda {
                old.lambda = tour.lambda;
                old.order = tour.order;
            }
            old.age = 0;
            return (i, false);
        }
        let i = self.tours.len();
        self.index.insert(tour.members.clone(), i);
        self.tours.push(tour);
        (i, true)
    }

    /// Updates ages: relevant tours restart at 0, the others grow by one.
    pub fn age(&mut self, relevant: &[bool]) {
        for (t, &r) in self.tours.iter_mut().zip(relevant) {
            t.age = if r { 0 } else { t.age + 1 };
        }
    }

    /// Drops tours older than `max_age`; returns how many were removed.
    pub fn prune(&mut self, max_age: usize) -> usize {
        let before = self.tours.len();
        self.tours.retain(|t| t.age <= max_age);
        self.index = self.tours.iter().enumerate().map(|(i, t)| (t.members.clone(), i)).collect();
        before - self.tours.len()
    }

    /// Whether every player lies in some tour.
    pub fn covers(&self, n: usize) -> bool {
        let mut seen = vec![false; n];
        for t in &self.tours {
            for &p in &t.members {
                seen[p] = true;
            }
        }
        seen.into_iter().all(|s| s)
    }

    /// Tour indices containing each player.
    pub fn incidence(&self, n: usize) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); n];
        for (i, t) in self.tours.iter().enumerate() {
            for &p in &t.members {
                out[p].push(i);
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vrp::random_instance;

    #[test]
    fn pool_keeps_cheapest_walk() {
        let inst = random_instance(4, 3, 0).unwrap();
        let mut pool = TourPool::new();
        let good = Tour::solve(&inst, &[2, 0, 1]).unwrap();
        let worse = Tour::from_order(&inst, vec![0, 2, 1]);
        let (i, new) = pool.insert(worse.clone());
        assert!(new);
        let (j, new) = pool.insert(good.clone());
        assert!(!new);
        assert_eq!(i, j);
        assert!(pool.get(i).lambda <= worse.lambda);
        assert_eq!(pool.get(i).lambda, inst.walk_length(&pool.get(i).order));
        assert_eq!(pool.len(), 1);
    }

    #[test]
    fn pruning_rebuilds_the_index() {
        let inst = random_instance(3, 3, 0).unwrap();
        let mut pool = TourPool::new();
        for p in 0..3 {
            pool.insert(Tour::solve(&inst, &[p]).unwrap());
        }
        pool.age(&[true, false, false]);
        pool.age(&[true, false, true]);
        assert_eq!(pool.prune(1), 1);
        assert!(pool.contains(&[0]) && !pool.contains(&[1]) && pool.contains(&[2]));
        assert!(!pool.covers(3));
    }
}
