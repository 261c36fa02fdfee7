//! Players, coalitions, cost oracles and excess arithmetic.

mod coalition;
mod excess;
pub mod io;
pub mod random;
pub mod rational;

use std::collections::HashMap;
use std::sync::RwLock;

use serde::{Deserialize, Serialize};

pub use coalition::{serde_members, Coalition, Members, Subsets, MAX_PLAYERS};
pub use excess::{
    check_monotone, check_subadditive, excess, excess_vector, lex_compare, lex_compare_values, shift_transform,
    ExcessVector,
    ShiftedGame, ENUMERATION_LIMIT, PROPERTY_CHECK_LIMIT,
};
pub use rational::Rational;

use crate::setcover::{cover_cost_of, SetCoverInstance};
use crate::{Error, Result};

/// Known structural properties of a cost function, when the constructor can
/// vouch for them.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GameMetadata {
    pub monotone: Option<bool>,
    pub subadditive: Option<bool>,
}

/// A cooperative cost game: `n` players and a cost oracle on coalitions.
///
/// Implementations must return `0` for the empty coalition and must be pure:
/// repeated calls with the same coalition return the same cost. Oracles are
/// shared across threads, so any caching has to be internally synchronized.
pub trait Game: Sync {
    fn n(&self) -> usize;

    fn cost(&self, s: Coalition) -> Rational;

    fn metadata(&self) -> GameMetadata {
        GameMetadata::default()
    }

    fn grand(&self) -> Coalition {
        Coalition::grand(self.n())
    }
}

impl<G: Game + ?Sized> Game for &G {
    fn n(&self) -> usize {
        (**self).n()
    }
    fn cost(&self, s: Coalition) -> Rational {
        (**self).cost(s)
    }
    fn metadata(&self) -> GameMetadata {
        (**self).metadata()
    }
}

impl<G: Game + ?Sized> Game for Box<G> {
    fn n(&self) -> usize {
        (**self).n()
    }
    fn cost(&self, s: Coalition) -> Rational {
        (**self).cost(s)
    }
    fn metadata(&self) -> GameMetadata {
        (**self).metadata()
    }
}

/// A per-player cost vector in exact arithmetic.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Allocation {
    #[serde(with = "rational::serde_vec")]
    values: Vec<Rational>,
}

impl Allocation {
    pub fn new(values: Vec<Rational>) -> Self {
        Allocation { values }
    }

    pub fn uniform(n: usize, v: Rational) -> Self {
        Allocation { values: vec![v; n] }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[Rational] {
        &self.values
    }

    pub fn into_values(self) -> Vec<Rational> {
        self.values
    }

    pub fn get(&self, p: usize) -> &Rational {
        &self.values[p]
    }

    /// `y(S)`.
    pub fn sum_over(&self, s: Coalition) -> Rational {
        s.members().fold(Rational::default(), |acc, p| acc + &self.values[p])
    }

    pub fn total(&self) -> Rational {
        self.values.iter().sum()
    }

    pub fn shifted(&self, shifts: &[Rational]) -> Result<Allocation> {
        if shifts.len() != self.len() {
            return Err(Error::InvalidInput(format!(
                "shift vector has length {}, allocation has {}",
                shifts.len(),
                self.len()
            )));
        }
        Ok(Allocation::new(self.values.iter().zip(shifts).map(|(a, b)| a + b).collect()))
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.values.iter().map(rational::to_f64).collect()
    }
}

/// A game given by a full cost table over all `2^n` coalitions.
#[derive(Clone, Debug)]
pub struct TableGame {
    n: usize,
    costs: Vec<Rational>,
}

impl TableGame {
    /// `costs[bits]` is the cost of the coalition with that bitmask.
    pub fn new(n: usize, costs: Vec<Rational>) -> Result<Self> {
        if n > ENUMERATION_LIMIT {
            return Err(Error::guard("table_game", ENUMERATION_LIMIT, n));
        }
        if costs.len() != 1 << n {
            return Err(Error::InvalidInput(format!(
                "cost table needs {} entries, got {}",
                1u64 << n,
                costs.len()
            )));
        }
        if costs[0] != Rational::default() {
            return Err(Error::InvalidInput("cost of the empty coalition must be 0".into()));
        }
        Ok(TableGame { n, costs })
    }

    /// Tabulates any game (n ≤ 20).
    pub fn from_game<G: Game + ?Sized>(game: &G) -> Result<Self> {
        let n = game.n();
        if n > ENUMERATION_LIMIT {
            return Err(Error::guard("table_game", ENUMERATION_LIMIT, n));
        }
        TableGame::new(n, Coalition::all(n).map(|s| game.cost(s)).collect())
    }

    pub fn from_fn(n: usize, f: impl Fn(Coalition) -> Rational) -> Result<Self> {
        if n > ENUMERATION_LIMIT {
            return Err(Error::guard("table_game", ENUMERATION_LIMIT, n));
        }
        let costs = Coalition::all(n)
            .map(|s| if s.is_empty() { Rational::default() } else { f(s) })
            .collect();
        TableGame::new(n, costs)
    }
}

impl Game for TableGame {
    fn n(&self) -> usize {
        self.n
    }
    fn cost(&self, s: Coalition) -> Rational {
        self.costs[s.bits() as usize].clone()
    }
}

/// `c(S) = Σ_{p∈S} w_p`.
#[derive(Clone, Debug)]
pub struct AdditiveGame {
    weights: Vec<Rational>,
}

impl AdditiveGame {
    pub fn new(weights: Vec<Rational>) -> Self {
        AdditiveGame { weights }
    }
}

impl Game for AdditiveGame {
    fn n(&self) -> usize {
        self.weights.len()
    }
    fn cost(&self, s: Coalition) -> Rational {
        s.members().map(|p| &self.weights[p]).sum()
    }
    fn metadata(&self) -> GameMetadata {
        let nonneg = self.weights.iter().all(|w| *w >= Rational::default());
        GameMetadata {
            monotone: Some(nonneg),
            subadditive: Some(true),
        }
    }
}

/// Caches an oracle's answers keyed by coalition bits.
pub struct Memoized<G> {
    inner: G,
    cache: RwLock<HashMap<Coalition, Rational>>,
}

impl<G: Game> Memoized<G> {
    pub fn new(inner: G) -> Self {
        Memoized {
            inner,
            cache: RwLock::new(HashMap::new()),
        }
    }

    pub fn inner(&self) -> &G {
        &self.inner
    }
}

impl<G: Game> Game for Memoized<G> {
    fn n(&self) -> usize {
        self.inner.n()
    }
    fn cost(&self, s: Coalition) -> Rational {
        if let Some(v) = self.cache.read().expect("cache lock").get(&s) {
            return v.clone();
        }
        let v = self.inner.cost(s);
        self.cache.write().expect("cache lock").insert(s, v.clone());
        v
    }
    fn metadata(&self) -> GameMetadata {
        self.inner.metadata()
    }
}

/// A game with explicitly listed coalition costs.
///
/// Unlisted coalitions cost as much as their cheapest cover by listed
/// coalitions, so every player must appear in at least one listed coalition.
pub struct ExplicitGame {
    n: usize,
    listed: HashMap<Coalition, Rational>,
    closure: SetCoverInstance,
    cache: RwLock<HashMap<Coalition, Rational>>,
}

impl ExplicitGame {
    pub fn new(n: usize, costs: Vec<(Coalition, Rational)>) -> Result<Self> {
        if n > MAX_PLAYERS {
            return Err(Error::guard("explicit_game", MAX_PLAYERS, n));
        }
        let mut listed = HashMap::new();
        for (s, c) in costs {
            if !s.fits(n) {
                return Err(Error::InvalidInput(format!("coalition {s} has members outside 0..{n}")));
            }
            if s.is_empty() {
                if c != Rational::default() {
                    return Err(Error::InvalidInput("cost of the empty coalition must be 0".into()));
                }
                continue;
            }
            if listed.insert(s, c).is_some() {
                return Err(Error::InvalidInput(format!("coalition {s} listed twice")));
            }
        }
        let mut sets: Vec<_> = listed.iter().map(|(s, c)| (*s, c.clone())).collect();
        sets.sort_by_key(|(s, _)| *s);
        let closure = SetCoverInstance::new_unchecked_costs(n, sets)?;
        Ok(ExplicitGame {
            n,
            listed,
            closure,
            cache: RwLock::new(HashMap::new()),
        })
    }

    /// Listed coalitions in increasing bit order.
    pub fn listed(&self) -> Vec<Coalition> {
        let mut v: Vec<_> = self.listed.keys().copied().collect();
        v.sort();
        v
    }

    pub fn is_listed(&self, s: Coalition) -> bool {
        self.listed.contains_key(&s)
    }
}

impl Game for ExplicitGame {
    fn n(&self) -> usize {
        self.n
    }
    fn cost(&self, s: Coalition) -> Rational {
        if s.is_empty() {
            return Rational::default();
        }
        if let Some(c) = self.listed.get(&s) {
            return c.clone();
        }
        if let Some(c) = self.cache.read().expect("cache lock").get(&s) {
            return c.clone();
        }
        let c = cover_cost_of(&self.closure, s).expect("instance invariant: every player is coverable");
        self.cache.write().expect("cache lock").insert(s, c.clone());
        c
    }
}
