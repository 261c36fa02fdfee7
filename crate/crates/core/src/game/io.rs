//! Explicit-game JSON: `{"n": 3, "costs": [{"coalition": [0, 1], "cost": "1"}]}`.

use serde::{Deserialize, Serialize};

use super::rational::{self, Rational};
use super::{Coalition, ExplicitGame, Game};
use crate::Result;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExplicitGameFile {
    pub n: usize,
    pub costs: Vec<CostEntry>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CostEntry {
    pub coalition: Vec<usize>,
    #[serde(with = "rational::serde_str")]
    pub cost: Rational,
}

impl ExplicitGameFile {
    pub fn into_game(self) -> Result<ExplicitGame> {
        let costs = self
            .costs
            .into_iter()
            .map(|e| Ok((Coalition::from_members(e.coalition)?, e.cost)))
            .collect::<Result<Vec<_>>>()?;
        ExplicitGame::new(self.n, costs)
    }

    /// Lists every non-empty coalition of a game (n ≤ 20).
    pub fn from_game<G: Game + ?Sized>(game: &G) -> Result<Self> {
        let n = game.n();
        if n > super::ENUMERATION_LIMIT {
            return Err(crate::Error::guard("explicit_game_file", super::ENUMERATION_LIMIT, n));
        }
        Ok(ExplicitGameFile {
            n,
            costs: Coalition::all_nonempty(n)
                .map(|s| CostEntry {
                    coalition: s.members().collect(),
                    cost: game.cost(s),
                })
                .collect(),
        })
    }
}
