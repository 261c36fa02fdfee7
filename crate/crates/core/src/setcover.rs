//! Set covering games: a coalition costs as much as its cheapest cover by
//! the input sets, with members outside the coalition allowed to be covered.

use std::collections::HashMap;
use std::sync::RwLock;

use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::game::rational::{int, serde_str};
use crate::game::{Coalition, Game, GameMetadata, Rational, MAX_PLAYERS};
use crate::lp::{self, Bound, LinearProgram, Relation, Sense};
use crate::{Error, Result};

/// Largest coalition whose cover cost is computed exactly.
pub const COVER_LIMIT: usize = 24;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SetCoverInstance {
    n: usize,
    sets: Vec<(Coalition, Rational)>,
}

impl SetCoverInstance {
    pub fn new(n: usize, sets: Vec<(Coalition, Rational)>) -> Result<Self> {
        if let Some((s, c)) = sets.iter().find(|(_, c)| c.is_negative()) {
            return Err(Error::InvalidInput(format!("set {s} has negative cost {c}")));
        }
        Self::new_unchecked_costs(n, sets)
    }

    /// Like [`SetCoverInstance::new`] but accepts negative costs.
    pub(crate) fn new_unchecked_costs(n: usize, sets: Vec<(Coalition, Rational)>) -> Result<Self> {
        if n > MAX_PLAYERS {
            return Err(Error::guard("set_cover_players", MAX_PLAYERS, n));
        }
        let mut covered = Coalition::EMPTY;
        for (s, _) in &sets {
            if !s.fits(n) {
                return Err(Error::InvalidInput(format!("set {s} has members outside 0..{n}")));
            }
            covered = covered.union(*s);
        }
        if let Some(p) = Coalition::grand(n).difference(covered).members().next() {
            return Err(Error::InvalidInput(format!("player {p} is not covered by any set")));
        }
        Ok(SetCoverInstance { n, sets })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn sets(&self) -> &[(Coalition, Rational)] {
        &self.sets
    }

    /// Returns a copy with set `index` repriced.
    pub fn with_cost(&self, index: usize, cost: Rational) -> Result<Self> {
        let mut sets = self.sets.clone();
        sets.get_mut(index)
            .ok_or_else(|| Error::InvalidInput(format!("no set with index {index}")))?
            .1 = cost;
        Self::new(self.n, sets)
    }
}

/// Minimum total cost of input sets whose union contains `s`.
pub fn cover_cost(inst: &SetCoverInstance, s: Coalition) -> Result<Rational> {
    if !s.fits(inst.n) {
        return Err(Error::InvalidInput(format!("coalition {s} has members outside 0..{}", inst.n)));
    }
    cover_cost_of(inst, s)
}

/// Cover cost by dynamic programming over the subsets of `s`: the cheapest
/// cover of `M` uses some set containing the lowest member of `M`.
pub(crate) fn cover_cost_of(inst: &SetCoverInstance, s: Coalition) -> Result<Rational> {
    let members: Vec<usize> = s.members().collect();
    let k = members.len();
    if k == 0 {
        return Ok(Rational::zero());
    }
    if k > COVER_LIMIT {
        return Err(Error::guard("cover_cost", COVER_LIMIT, k));
    }
    let project = |t: Coalition| -> usize {
        members
            .iter()
            .enumerate()
            .filter(|(_, p)| t.contains(**p))
            .fold(0usize, |m, (i, _)| m | (1 << i))
    };
    let mut cheapest: HashMap<usize, Rational> = HashMap::new();
    for (t, c) in &inst.sets {
        let m = project(*t);
        if m == 0 {
            continue;
        }
        match cheapest.get(&m) {
            Some(old) if old <= c => {}
            _ => {
                cheapest.insert(m, c.clone());
            }
        }
    }
    let mut by_low: Vec<Vec<(usize, Rational)>> = vec![Vec::new(); k];
    for (m, c) in cheapest {
        for (i, list) in by_low.iter_mut().enumerate() {
            if m & (1 << i) != 0 {
                list.push((m, c.clone()));
            }
        }
    }
    if let Some(i) = by_low.iter().position(Vec::is_empty) {
        return Err(Error::InvalidInput(format!("player {} is not coverable", members[i])));
    }
    let full = (1usize << k) - 1;
    let mut best: Vec<Option<Rational>> = vec![None; full + 1];
    best[0] = Some(Rational::zero());
    for m in 1..=full {
        let low = m.trailing_zeros() as usize;
        let mut b: Option<Rational> = None;
        for (t, c) in &by_low[low] {
            if let Some(rest) = &best[m & !t] {
                let v = c + rest;
                if b.as_ref().map_or(true, |x| v < *x) {
                    b = Some(v);
                }
            }
        }
        best[m] = b;
    }
    best[full].take().ok_or_else(|| Error::Internal("cover table incomplete".into()))
}

/// Optimal value of the fractional cover LP over the input sets.
pub fn fractional_cost(inst: &SetCoverInstance, s: Coalition) -> Result<Rational> {
    if !s.fits(inst.n) {
        return Err(Error::InvalidInput(format!("coalition {s} has members outside 0..{}", inst.n)));
    }
    if s.is_empty() {
        return Ok(Rational::zero());
    }
    let relevant: Vec<&(Coalition, Rational)> = inst.sets.iter().filter(|(t, _)| !t.is_disjoint(s)).collect();
    let mut lp = LinearProgram::new(Sense::Minimize, relevant.iter().map(|(_, c)| c.clone()).collect());
    for p in s.members() {
        let entries: Vec<(usize, Rational)> = relevant
            .iter()
            .enumerate()
            .filter(|(_, (t, _))| t.contains(p))
            .map(|(j, _)| (j, int(1)))
            .collect();
        lp.add_sparse_row(&entries, Relation::Ge, int(1))?;
    }
    for j in 0..relevant.len() {
        lp.set_bounds(j, Bound::nonnegative());
    }
    let sol = lp::solve(&lp)?;
    sol.objective_value
        .ok_or_else(|| Error::Internal(format!("fractional cover LP for {s} is {:?}", sol.status)))
}

/// The set covering game of an instance, with cached costs.
pub struct SetCoverGame {
    inst: SetCoverInstance,
    cache: RwLock<HashMap<Coalition, Rational>>,
}

impl SetCoverGame {
    pub fn new(inst: SetCoverInstance) -> Self {
        SetCoverGame {
            inst,
            cache: RwLock::new(HashMap::new()),
        }
    }

    pub fn instance(&self) -> &SetCoverInstance {
        &self.inst
    }
}

fn cached(cache: &RwLock<HashMap<Coalition, Rational>>, s: Coalition, f: impl FnOnce() -> Rational) -> Rational {
    if let Some(c) = cache.read().expect("cache lock").get(&s) {
        return c.clone();
    }
    let c = f();
    cache.write().expect("cache lock").insert(s, c.clone());
    c
}

impl Game for SetCoverGame {
    fn n(&self) -> usize {
        self.inst.n
    }

    fn cost(&self, s: Coalition) -> Rational {
        cached(&self.cache, s, || cover_cost(&self.inst, s).expect("coalition within cover limits"))
    }

    fn metadata(&self) -> GameMetadata {
        GameMetadata {
            monotone: Some(true),
            subadditive: Some(true),
        }
    }
}

/// The fractional game `c_f` of a set covering instance.
pub struct FractionalGame {
    inst: SetCoverInstance,
    cache: RwLock<HashMap<Coalition, Rational>>,
}

impl FractionalGame {
    pub fn instance(&self) -> &SetCoverInstance {
        &self.inst
    }

    /// Input sets `T` with `c_f(T) < c(T)`, as `(index, c_f(T))`.
    pub fn fractionally_dominated(&self) -> Result<Vec<(usize, Rational)>> {
        let mut out = Vec::new();
        for (i, (t, _)) in self.inst.sets.iter().enumerate() {
            let integral = cover_cost(&self.inst, *t)?;
            let frac = self.cost(*t);
            if frac < integral {
                out.push((i, frac));
            }
        }
        Ok(out)
    }
}

impl Game for FractionalGame {
    fn n(&self) -> usize {
        self.inst.n
    }

    fn cost(&self, s: Coalition) -> Rational {
        cached(&self.cache, s, || {
            fractional_cost(&self.inst, s).expect("fractional cover LP of a valid instance")
        })
    }

    fn metadata(&self) -> GameMetadata {
        GameMetadata {
            monotone: Some(true),
            subadditive: Some(true),
        }
    }
}

pub fn fractional_game(inst: SetCoverInstance) -> FractionalGame {
    FractionalGame {
        inst,
        cache: RwLock::new(HashMap::new()),
    }
}

/// Built-in instances: `triangle`, `three_triangles`, `frac_dominated`.
pub fn fixture(name: &str) -> Result<SetCoverInstance> {
    let set = |members: &[usize], cost: i64| (Coalition::from_members(members.iter().copied()).expect("fixture"), int(cost));
    match name {
        "triangle" => SetCoverInstance::new(3, vec![set(&[0, 1], 1), set(&[1, 2], 1), set(&[0, 2], 1)]),
        "three_triangles" => {
            let mut sets = Vec::new();
            for base in [0, 3, 6] {
                sets.push(set(&[base, base + 1], 1));
                sets.push(set(&[base + 1, base + 2], 1));
                sets.push(set(&[base, base + 2], 1));
            }
            sets.push(set(&[0, 1, 2, 3, 4, 5], 3));
            sets.push(set(&[3, 4, 5, 6, 7, 8], 3));
            SetCoverInstance::new(9, sets)
        }
        "frac_dominated" => SetCoverInstance::new(
            6,
            vec![
                set(&[2, 5], 10),
                set(&[0, 3], 10),
                set(&[1, 4], 10),
                set(&[0, 1], 10),
                set(&[1, 2], 10),
                set(&[3, 4], 10),
                set(&[4, 5], 10),
                set(&[0, 2], 14),
                set(&[3, 5], 14),
                set(&[0, 1, 2], 18),
            ],
        ),
        other => Err(Error::InvalidInput(format!("unknown fixture {other:?}"))),
    }
}

/// Index of the cost-18 set in the `frac_dominated` fixture.
pub const FRAC_DOMINATED_SET: usize = 9;

pub const FIXTURES: [&str; 3] = ["triangle", "three_triangles", "frac_dominated"];

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SetCoverFile {
    pub n: usize,
    pub sets: Vec<SetEntry>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SetEntry {
    pub members: Vec<usize>,
    #[serde(with = "serde_str")]
    pub cost: Rational,
}

impl SetCoverFile {
    pub fn into_instance(self) -> Result<SetCoverInstance> {
        let sets = self
            .sets
            .into_iter()
            .map(|e| Ok((Coalition::from_members(e.members)?, e.cost)))
            .collect::<Result<Vec<_>>>()?;
        SetCoverInstance::new(self.n, sets)
    }

    pub fn from_instance(inst: &SetCoverInstance) -> Self {
        SetCoverFile {
            n: inst.n,
            sets: inst
                .sets
                .iter()
                .map(|(s, c)| SetEntry {
                    members: s.members().collect(),
                    cost: c.clone(),
                })
                .collect(),
        }
    }
}

pub fn from_json(text: &str) -> Result<SetCoverInstance> {
    serde_json::from_str::<SetCoverFile>(text)?.into_instance()
}

pub fn to_json(inst: &SetCoverInstance) -> Result<String> {
    Ok(serde_json::to_string_pretty(&SetCoverFile::from_instance(inst))?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::rational::ratio;
    use crate::game::{check_monotone, check_subadditive};

    fn c(members: &[usize]) -> Coalition {
        Coalition::from_members(members.iter().copied()).unwrap()
    }

    /// Brute force over all subfamilies of input sets.
    fn brute_cover(inst: &SetCoverInstance, s: Coalition) -> Rational {
        let m = inst.sets().len();
        let mut best: Option<Rational> = None;
        for mask in 0u32..(1 << m) {
            let mut union = Coalition::EMPTY;
            let mut cost = Rational::zero();
            for (j, (t, ct)) in inst.sets().iter().enumerate() {
                if mask & (1 << j) != 0 {
                    union = union.union(*t);
                    cost += ct;
                }
            }
            if s.is_subset(union) && best.as_ref().map_or(true, |b| cost < *b) {
                best = Some(cost);
            }
        }
        best.unwrap()
    }

    #[test]
    fn triangle_costs() {
        let t = fixture("triangle").unwrap();
        assert_eq!(cover_cost(&t, c(&[0, 1])).unwrap(), int(1));
        assert_eq!(cover_cost(&t, c(&[0])).unwrap(), int(1));
        assert_eq!(cover_cost(&t, Coalition::EMPTY).unwrap(), int(0));
        assert_eq!(cover_cost(&t, Coalition::grand(3)).unwrap(), int(2));
        assert_eq!(fractional_cost(&t, Coalition::grand(3)).unwrap(), ratio(3, 2));
    }

    #[test]
    fn fixtures_match_exhaustive_cover_search() {
        for name in FIXTURES {
            let inst = fixture(name).unwrap();
            for s in Coalition::all(inst.n()) {
                assert_eq!(cover_cost(&inst, s).unwrap(), brute_cover(&inst, s), "{name} {s}");
            }
        }
    }

    #[test]
    fn three_triangles_values() {
        let t = fixture("three_triangles").unwrap();
        assert_eq!(cover_cost(&t, Coalition::grand(9)).unwrap(), int(5));
        assert_eq!(cover_cost(&t, c(&[0, 1, 6, 7])).unwrap(), int(2));
    }

    #[test]
    fn frac_dominated_values() {
        let f = fixture("frac_dominated").unwrap();
        assert_eq!(cover_cost(&f, c(&[3, 4, 5])).unwrap(), int(20));
        assert_eq!(cover_cost(&f, Coalition::grand(6)).unwrap(), int(30));
        assert_eq!(fractional_cost(&f, c(&[0, 1, 2])).unwrap(), int(17));
        assert_eq!(fractional_cost(&f, c(&[3, 4, 5])).unwrap(), int(17));
        assert_eq!(fractional_cost(&f, Coalition::grand(6)).unwrap(), int(30));
        let game = fractional_game(f);
        assert_eq!(game.fractionally_dominated().unwrap(), vec![(FRAC_DOMINATED_SET, int(17))]);
    }

    #[test]
    fn covers_are_monotone_and_subadditive() {
        for name in FIXTURES {
            let g = SetCoverGame::new(fixture(name).unwrap());
            assert!(check_monotone(&g).unwrap(), "{name}");
            assert!(check_subadditive(&g).unwrap(), "{name}");
        }
    }

    #[test]
    fn fractional_never_exceeds_integral() {
        for name in FIXTURES {
            let inst = fixture(name).unwrap();
            let fg = fractional_game(inst.clone());
            for s in Coalition::all(inst.n()) {
                assert!(fg.cost(s) <= cover_cost(&inst, s).unwrap());
            }
        }
    }

    #[test]
    fn additive_instance_has_integral_fractional_costs() {
        let inst = SetCoverInstance::new(3, vec![(c(&[0]), int(2)), (c(&[1]), int(3)), (c(&[2]), int(5))]).unwrap();
        let fg = fractional_game(inst.clone());
        for s in Coalition::all(3) {
            assert_eq!(fg.cost(s), cover_cost(&inst, s).unwrap());
        }
    }

    /// The fractional LP over all coalitions (costed by the cover game)
    /// agrees with the LP over the input sets.
    #[test]
    fn fractional_lp_over_all_coalitions_agrees() {
        for name in ["triangle", "frac_dominated"] {
            let inst = fixture(name).unwrap();
            let n = inst.n();
            let game = SetCoverGame::new(inst.clone());
            let all: Vec<Coalition> = Coalition::all_nonempty(n).collect();
            for s in Coalition::all_nonempty(n) {
                let mut lp = LinearProgram::new(Sense::Minimize, all.iter().map(|t| game.cost(*t)).collect());
                for p in s.members() {
                    let entries: Vec<(usize, Rational)> = all
                        .iter()
                        .enumerate()
                        .filter(|(_, t)| t.contains(p))
                        .map(|(j, _)| (j, int(1)))
                        .collect();
                    lp.add_sparse_row(&entries, Relation::Ge, int(1)).unwrap();
                }
                for j in 0..all.len() {
                    lp.set_bounds(j, Bound::nonnegative());
                }
                let v = lp::solve(&lp).unwrap().objective_value.unwrap();
                assert_eq!(v, fractional_cost(&inst, s).unwrap(), "{name} {s}");
            }
        }
    }

    #[test]
    fn rejects_bad_instances() {
        assert!(SetCoverInstance::new(3, vec![(c(&[0, 1]), int(1))]).is_err());
        assert!(SetCoverInstance::new(2, vec![(c(&[0, 1]), int(-1))]).is_err());
        assert!(fixture("square").is_err());
    }

    #[test]
    fn json_round_trip() {
        let inst = fixture("frac_dominated").unwrap();
        let text = to_json(&inst).unwrap();
        assert_eq!(from_json(&text).unwrap(), inst);
        let parsed = from_json(r#"{"n": 2, "sets": [{"members": [0, 1], "cost": "3/2"}]}"#).unwrap();
        assert_eq!(parsed.sets()[0].1, ratio(3, 2));
    }
}
