//! Exact happy nucleolus of small-capacity routing games by enumerating
//! every tour.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::instance::{tour_cost, VrpInstance};
use crate::game::MAX_PLAYERS;
use crate::game::rational::{from_f64, serde_str, serde_vec};
use crate::game::{Coalition, Rational};
use crate::mps::{happy_total, mps_run_family, CostFamily, TotalValueMode};
use crate::{Error, Result};

/// Largest number of tours the exact reference enumerates.
pub const SMALLCAP_LIMIT: usize = 3_000_000;

/// Every nonempty tour of an instance with its optimal walk length.
///
/// Costs are the double walk lengths, read as exact rationals.
pub struct TourFamily {
    n: usize,
    coalitions: Vec<Coalition>,
    costs: Vec<f64>,
}

fn tour_count(n: usize, k: usize) -> usize {
    let mut total = 0usize;
    let mut binom = 1usize;
    for j in 1..=k.min(n) {
        binom = binom.saturating_mul(n - j + 1) / j;
        total = total.saturating_add(binom);
    }
    total
}

/// Coalitions of size `1..=k` in a fixed order: by size, then lexicographic.
fn enumerate(n: usize, k: usize) -> Vec<Coalition> {
    let mut out = Vec::new();
    for size in 1..=k.min(n) {
        let mut idx: Vec<usize> = (0..size).collect();
        loop {
            out.push(Coalition::from_bits(idx.iter().fold(0u64, |b, &p| b | 1 << p)));
            let mut i = size;
            while i > 0 && idx[i - 1] == n - size + i - 1 {
                i -= 1;
            }
            if i == 0 {
                break;
            }
            idx[i - 1] += 1;
            for j in i..size {
                idx[j] = idx[j - 1] + 1;
            }
        }
    }
    out
}

impl TourFamily {
    pub fn new(inst: &VrpInstance) -> Result<Self> {
        let n = inst.n();
        if n > MAX_PLAYERS {
            return Err(Error::guard("exact reference players", MAX_PLAYERS, n));
        }
        let count = tour_count(n, inst.capacity);
        if count > SMALLCAP_LIMIT {
            return Err(Error::guard("exact reference tours", SMALLCAP_LIMIT, count));
        }
        let coalitions = enumerate(n, inst.capacity);
        let costs = coalitions
            .par_iter()
            .map(|s| tour_cost(inst, &s.members().collect::<Vec<_>>()).map(|(c, _)| c))
            .collect::<Result<Vec<f64>>>()?;
        Ok(TourFamily { n, coalitions, costs })
    }

    pub fn coalitions(&self) -> &[Coalition] {
        &self.coalitions
    }

    pub fn costs(&self) -> &[f64] {
        &self.costs
    }
}

impl CostFamily for TourFamily {
    fn n(&self) -> usize {
        self.n
    }
    fn len(&self) -> usize {
        self.coalitions.len()
    }
    fn coalition(&self, i: usize) -> Coalition {
        self.coalitions[i]
    }
    fn cost(&self, i: usize) -> Rational {
        from_f64(self.costs[i])
    }
    fn cost_f64(&self, i: usize) -> f64 {
        self.costs[i]
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExactReference {
    #[serde(with = "serde_vec")]
    pub allocation: Vec<Rational>,
    #[serde(with = "serde_str")]
    pub total: Rational,
    pub stages: usize,
    pub tours: usize,
}

/// Happy nucleolus over the family of all tours.
pub fn exact_happy_nucleolus_smallcap(inst: &VrpInstance) -> Result<ExactReference> {
    let family = TourFamily::new(inst)?;
    let total = happy_total(&family)?;
    let run = mps_run_family(&family, total.clone(), TotalValueMode::Happy)?;
    Ok(ExactReference {
        allocation: run.allocation.into_values(),
        total,
        stages: run.stages.len(),
        tours: family.len(),
    })
}
