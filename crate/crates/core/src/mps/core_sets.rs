//! Least core and membership in the core, the happy core and the extended
//! happy core.

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use super::{total_value, TotalValueMode};
use crate::game::rational::{int, serde_str};
use crate::game::{Allocation, Coalition, Game, Rational};
use crate::lp::{solve, Bound, LinearProgram, LpStatus, Relation, Sense};
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LeastCore {
    #[serde(with = "serde_str")]
    pub epsilon: Rational,
    pub witness: Allocation,
}

/// Smallest `ε` such that some `y` with `y(P) = c(P)` has
/// `y(S) ≤ c(S) + ε` for every nonempty proper family member.
pub fn least_core<G: Game + ?Sized>(game: &G, family: &[Coalition]) -> Result<LeastCore> {
    let n = game.n();
    let grand = game.grand();
    let mut objective = vec![Rational::zero(); n + 1];
    objective[0] = int(1);
    let mut lp = LinearProgram::new(Sense::Minimize, objective);
    let grand_row: Vec<(usize, Rational)> = (0..n).map(|p| (p + 1, int(1))).collect();
    lp.add_sparse_row(&grand_row, Relation::Eq, game.cost(grand))?;
    for s in family {
        if !s.fits(n) {
            return Err(Error::InvalidInput(format!("coalition {s} has members outside 0..{n}")));
        }
        if s.is_empty() || *s == grand {
            continue;
        }
        let mut row: Vec<(usize, Rational)> = s.members().map(|p| (p + 1, int(1))).collect();
        row.push((0, int(-1)));
        lp.add_sparse_row(&row, Relation::Le, game.cost(*s))?;
    }
    lp.set_bounds(0, Bound::free());
    let sol = solve(&lp)?;
    match sol.status {
        LpStatus::Optimal => Ok(LeastCore {
            epsilon: sol.primal[0].clone(),
            witness: Allocation::new(sol.primal[1..].to_vec()),
        }),
        LpStatus::Unbounded => Err(Error::InsufficientFamily("the LP is unbounded over this family".into())),
        LpStatus::Infeasible => Err(Error::Internal("least-core LP infeasible".into())),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CoreKind {
    Core,
    HappyCore,
    ExtendedHappyCore,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Membership {
    /// For the extended happy core: a happy-core point dominated by `y`.
    /// Otherwise `y` itself.
    Witness { allocation: Allocation },
    WrongTotal {
        #[serde(with = "serde_str")]
        expected: Rational,
        #[serde(with = "serde_str")]
        actual: Rational,
    },
    Violated {
        coalition: Coalition,
        #[serde(with = "serde_str")]
        excess: Rational,
    },
    /// No happy-core point lies player-wise below `y`.
    NoDominatedHappyPoint,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoreCheck {
    pub member: bool,
    pub certificate: Membership,
}

fn happiness_violation<G: Game + ?Sized>(game: &G, y: &Allocation, family: &[Coalition]) -> Option<Membership> {
    family.iter().filter(|s| !s.is_empty()).find_map(|s| {
        let excess = game.cost(*s) - y.sum_over(*s);
        (excess < Rational::zero()).then_some(Membership::Violated { coalition: *s, excess })
    })
}

pub fn core_membership<G: Game + ?Sized>(
    game: &G,
    y: &Allocation,
    family: &[Coalition],
    kind: CoreKind,
) -> Result<CoreCheck> {
    let n = game.n();
    if y.len() != n {
        return Err(Error::InvalidInput(format!("allocation has {} entries, game has {n} players", y.len())));
    }
    if let Some(s) = family.iter().find(|s| !s.fits(n)) {
        return Err(Error::InvalidInput(format!("coalition {s} has members outside 0..{n}")));
    }
    let expected = match kind {
        CoreKind::Core | CoreKind::ExtendedHappyCore => game.cost(game.grand()),
        CoreKind::HappyCore => total_value(game, family, TotalValueMode::Happy)?,
    };
    let reject = |certificate| Ok(CoreCheck { member: false, certificate });
    if y.total() != expected {
        return reject(Membership::WrongTotal {
            expected,
            actual: y.total(),
        });
    }
    if kind != CoreKind::ExtendedHappyCore {
        if let Some(v) = happiness_violation(game, y, family) {
            return reject(v);
        }
        return Ok(CoreCheck {
            member: true,
            certificate: Membership::Witness { allocation: y.clone() },
        });
    }
    let v_h = total_value(game, family, TotalValueMode::Happy)?;
    let mut lp = LinearProgram::new(Sense::Maximize, vec![Rational::zero(); n]);
    lp.add_sparse_row(&(0..n).map(|p| (p, int(1))).collect::<Vec<_>>(), Relation::Eq, v_h)?;
    for s in family.iter().filter(|s| !s.is_empty()) {
        lp.add_sparse_row(&s.members().map(|p| (p, int(1))).collect::<Vec<_>>(), Relation::Le, game.cost(*s))?;
    }
    for p in 0..n {
        lp.set_bounds(
            p,
            Bound {
                lower: None,
                upper: Some(y.get(p).clone()),
            },
        );
    }
    let sol = solve(&lp)?;
    match sol.status {
        LpStatus::Optimal => Ok(CoreCheck {
            member: true,
            certificate: Membership::Witness {
                allocation: Allocation::new(sol.primal),
            },
        }),
        _ => reject(Membership::NoDominatedHappyPoint),
    }
}
