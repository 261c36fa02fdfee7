//! The Maschler–Peleg–Shapley scheme for the nucleolus and the happy
//! nucleolus over explicit coalition families.
//!
//! Each stage maximizes the smallest excess `ξ` over coalitions whose
//! incidence vectors are not yet in the span of the fixed ones, then fixes
//! every such coalition with a nonzero dual at excess `ξ`. The grand
//! coalition is fixed from the start through `y(P) = V`.

mod brute;
mod core_sets;
mod engine;

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::game::rational::{int, serde_str};
use crate::game::{serde_members, Allocation, Coalition, Game, Rational};
use crate::lp::{LinearProgram, Relation, Sense, SpanBasis};
use crate::{Error, Result};

pub use brute::{bruteforce_lexi, BRUTEFORCE_LIMIT};
pub use core_sets::{core_membership, least_core, CoreCheck, CoreKind, LeastCore, Membership};
pub use engine::{happy_total, CostFamily, ExplicitFamily};
pub(crate) use engine::{solve_stage, SpanCache};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TotalValueMode {
    /// `V = c(P)`.
    Nucleolus,
    /// `V = 𝒱_h`, the largest total any happy allocation reaches.
    Happy,
}

/// Fixed coalitions with their excesses and the span they generate.
///
/// The span always contains the grand coalition, whose equality
/// `y(P) = total_value` is part of every stage LP.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MpsState {
    pub fixed: Vec<FixedCoalition>,
    pub basis: SpanBasis,
    #[serde(with = "serde_str")]
    pub total_value: Rational,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FixedCoalition {
    pub coalition: Coalition,
    #[serde(with = "serde_str")]
    pub excess: Rational,
}

impl MpsState {
    pub fn new(n: usize, total_value: Rational) -> Self {
        let mut basis = SpanBasis::new(n);
        if n > 0 {
            basis
                .insert_coalition(Coalition::grand(n))
                .expect("grand coalition fits");
        }
        MpsState {
            fixed: Vec::new(),
            basis,
            total_value,
        }
    }

    pub fn n(&self) -> usize {
        self.basis.dim()
    }

    /// Fixes `s` at excess `xi`; returns whether the span grew.
    pub fn fix(&mut self, s: Coalition, xi: Rational) -> Result<bool> {
        let grew = self.basis.insert_coalition(s)?;
        self.fixed.push(FixedCoalition { coalition: s, excess: xi });
        Ok(grew)
    }

    pub fn is_complete(&self) -> bool {
        self.basis.is_full()
    }
}

/// `c(P)` or `𝒱_h` over the given family.
pub fn total_value<G: Game + ?Sized>(game: &G, family: &[Coalition], mode: TotalValueMode) -> Result<Rational> {
    match mode {
        TotalValueMode::Nucleolus => Ok(game.cost(game.grand())),
        TotalValueMode::Happy => happy_total(&ExplicitFamily::from_game(game, family)?),
    }
}

/// The stage LP over variables `(ξ, y_0, …, y_{n-1})`.
///
/// Rows, in order: `y(P) = V`, one equality per fixed coalition, then
/// `y(S) + ξ ≤ c(S)` for each family member outside the span.
pub fn build_stage_lp<G: Game + ?Sized>(state: &MpsState, family: &[Coalition], game: &G) -> Result<LinearProgram> {
    let n = state.n();
    if game.n() != n {
        return Err(Error::InvalidInput(format!("state has {n} players, game has {}", game.n())));
    }
    let mut objective = vec![Rational::zero(); n + 1];
    objective[0] = int(1);
    let mut lp = LinearProgram::new(Sense::Maximize, objective);
    let row = |s: Coalition, xi: bool| -> Vec<(usize, Rational)> {
        let mut r: Vec<(usize, Rational)> = s.members().map(|p| (p + 1, int(1))).collect();
        if xi {
            r.push((0, int(1)));
        }
        r
    };
    lp.add_sparse_row(&row(Coalition::grand(n), false), Relation::Eq, state.total_value.clone())?;
    for f in &state.fixed {
        lp.add_sparse_row(&row(f.coalition, false), Relation::Eq, game.cost(f.coalition) - &f.excess)?;
    }
    for s in family {
        if !state.basis.contains(*s)? {
            lp.add_sparse_row(&row(*s, true), Relation::Le, game.cost(*s))?;
        }
    }
    Ok(lp)
}

/// One stage of a run.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageRecord {
    #[serde(with = "serde_str")]
    pub xi: Rational,
    /// Coalitions fixed in this stage.
    #[serde(with = "serde_members")]
    pub fixed: Vec<Coalition>,
    /// Coalitions whose incidence vectors generate the span after this stage.
    #[serde(with = "serde_members")]
    pub span: Vec<Coalition>,
    pub rank: usize,
    pub lp_rows: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MpsRun {
    pub allocation: Allocation,
    pub mode: TotalValueMode,
    #[serde(with = "serde_str")]
    pub total_value: Rational,
    pub stages: Vec<StageRecord>,
    pub state: MpsState,
}

/// Runs the scheme on the coalitions of `family` (`∅` and duplicates are
/// ignored). For the (happy) nucleolus of the full game pass all nonempty
/// coalitions.
pub fn mps_run<G: Game + ?Sized>(game: &G, family: &[Coalition], mode: TotalValueMode) -> Result<MpsRun> {
    let fam = ExplicitFamily::from_game(game, family)?;
    let total = match mode {
        TotalValueMode::Nucleolus => game.cost(game.grand()),
        TotalValueMode::Happy => happy_total(&fam)?,
    };
    mps_run_family(&fam, total, mode)
}

/// The scheme on an arbitrary cost family with a given total value.
pub fn mps_run_family<F: CostFamily>(family: &F, total: Rational, mode: TotalValueMode) -> Result<MpsRun> {
    let n = family.n();
    if n == 0 {
        return Err(Error::InvalidInput("game without players".into()));
    }
    let mut state = MpsState::new(n, total.clone());
    let mut stages = Vec::new();
    let mut generators = vec![Coalition::grand(n)];
    if n == 1 {
        return Ok(MpsRun {
            allocation: Allocation::new(vec![total.clone()]),
            mode,
            total_value: total,
            stages,
            state,
        });
    }
    let mut spans = SpanCache::new(family.len());
    let mut equalities: Vec<(Coalition, Rational)> = vec![(Coalition::grand(n), total.clone())];
    let mut warm: Vec<usize> = (0..family.len()).filter(|&i| family.coalition(i).len() == 1).collect();
    let mut y = Vec::new();
    while !state.is_complete() {
        if stages.len() >= n {
            return Err(Error::Internal(format!("no full span after {n} stages")));
        }
        let out = solve_stage(family, &equalities, &state.basis, &mut spans, &warm)?;
        if out.tight.is_empty() {
            return Err(Error::Internal("stage optimum without a tight coalition".into()));
        }
        let mut fixed_now = Vec::new();
        for &i in &out.tight {
            let s = family.coalition(i);
            if state.fix(s, out.xi.clone())? {
                let mut rhs = family.cost(i);
                rhs -= &out.xi;
                equalities.push((s, rhs));
                generators.push(s);
            }
            fixed_now.push(s);
        }
        log::debug!(
            "stage {}: xi = {}, fixed {}, rank {}, {} pivots",
            stages.len() + 1,
            out.xi,
            fixed_now.len(),
            state.basis.rank(),
            out.pivots
        );
        stages.push(StageRecord {
            xi: out.xi.clone(),
            fixed: fixed_now,
            span: generators.clone(),
            rank: state.basis.rank(),
            lp_rows: equalities.len() + out.active.len(),
        });
        warm = out.active;
        y = out.y;
    }
    Ok(MpsRun {
        allocation: Allocation::new(y),
        mode,
        total_value: total,
        stages,
        state,
    })
}

#[cfg(test)]
mod tests;
