use std::cmp::Ordering;

use super::{Allocation, Coalition, Game, GameMetadata, Rational};
use crate::{Error, Result};

/// Full `2^n` enumeration is refused above this player count.
pub const ENUMERATION_LIMIT: usize = 20;

/// Exhaustive monotonicity / subadditivity checks are refused above this.
pub const PROPERTY_CHECK_LIMIT: usize = 12;

fn check_dims<G: Game + ?Sized>(game: &G, s: Coalition, y: &Allocation) -> Result<()> {
    if y.len() != game.n() {
        return Err(Error::InvalidInput(format!(
            "allocation has {} entries, game has {} players",
            y.len(),
            game.n()
        )));
    }
    if !s.fits(game.n()) {
        return Err(Error::InvalidInput(format!("coalition {s} is not a subset of 0..{}", game.n())));
    }
    Ok(())
}

/// `c(S) − y(S)`.
pub fn excess<G: Game + ?Sized>(game: &G, s: Coalition, y: &Allocation) -> Result<Rational> {
    check_dims(game, s, y)?;
    Ok(game.cost(s) - y.sum_over(s))
}

/// Excess values over a coalition family, sorted non-decreasingly.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExcessVector {
    entries: Vec<(Coalition, Rational)>,
}

impl ExcessVector {
    /// Sorts by excess; equal excesses are ordered by coalition bits.
    pub fn from_entries(mut entries: Vec<(Coalition, Rational)>) -> Self {
        entries.sort_by(|a, b| a.1.cmp(&b.1).then(a.0.cmp(&b.0)));
        ExcessVector { entries }
    }

    pub fn entries(&self) -> &[(Coalition, Rational)] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn min(&self) -> Option<&Rational> {
        self.entries.first().map(|e| &e.1)
    }

    pub fn values(&self) -> impl Iterator<Item = &Rational> {
        self.entries.iter().map(|e| &e.1)
    }
}

/// The sorted excess vector `θ(y)`; the family defaults to all `2^n`
/// coalitions (including the empty one).
pub fn excess_vector<G: Game + ?Sized>(
    game: &G,
    y: &Allocation,
    family: Option<&[Coalition]>,
) -> Result<ExcessVector> {
    let n = game.n();
    if y.len() != n {
        return Err(Error::InvalidInput(format!(
            "allocation has {} entries, game has {n} players",
            y.len()
        )));
    }
    let entries = match family {
        Some(family) => family
            .iter()
            .map(|&s| excess(game, s, y).map(|e| (s, e)))
            .collect::<Result<Vec<_>>>()?,
        None => {
            if n > ENUMERATION_LIMIT {
                return Err(Error::guard("excess_vector", ENUMERATION_LIMIT, n));
            }
            Coalition::all(n)
                .map(|s| (s, game.cost(s) - y.sum_over(s)))
                .collect()
        }
    };
    Ok(ExcessVector::from_entries(entries))
}

/// Lexicographic comparison of sorted excess values. `Greater` means `a` is
/// the lexicographically preferred vector.
pub fn lex_compare(a: &ExcessVector, b: &ExcessVector) -> Result<Ordering> {
    if a.len() != b.len() {
        return Err(Error::InvalidInput(format!(
            "excess vectors differ in length ({} vs {})",
            a.len(),
            b.len()
        )));
    }
    lex_compare_values(&a.values().cloned().collect::<Vec<_>>(), &b.values().cloned().collect::<Vec<_>>())
}

/// Position-wise lexicographic comparison of two equal-length value lists.
pub fn lex_compare_values(a: &[Rational], b: &[Rational]) -> Result<Ordering> {
    if a.len() != b.len() {
        return Err(Error::InvalidInput(format!(
            "excess vectors differ in length ({} vs {})",
            a.len(),
            b.len()
        )));
    }
    Ok(a.iter().cmp(b.iter()))
}

fn tabulate<G: Game + ?Sized>(game: &G, guard: &'static str) -> Result<Vec<Rational>> {
    let n = game.n();
    if n > PROPERTY_CHECK_LIMIT {
        return Err(Error::guard(guard, PROPERTY_CHECK_LIMIT, n));
    }
    Ok(Coalition::all(n).map(|s| game.cost(s)).collect())
}

/// `c(S) ≤ c(T)` for all `S ⊆ T`, checked on single-player extensions.
pub fn check_monotone<G: Game + ?Sized>(game: &G) -> Result<bool> {
    let n = game.n();
    let table = tabulate(game, "check_monotone")?;
    Ok(Coalition::all(n).all(|s| {
        (0..n)
            .filter(|&p| !s.contains(p))
            .all(|p| table[s.bits() as usize] <= table[s.with(p).bits() as usize])
    }))
}

/// `c(S ∪ T) ≤ c(S) + c(T)` for all disjoint `S, T`.
pub fn check_subadditive<G: Game + ?Sized>(game: &G) -> Result<bool> {
    let n = game.n();
    let table = tabulate(game, "check_subadditive")?;
    let grand = Coalition::grand(n);
    Ok(Coalition::all_nonempty(n).all(|s| {
        grand.difference(s).subsets().skip(1).all(|t| {
            table[s.union(t).bits() as usize] <= &table[s.bits() as usize] + &table[t.bits() as usize]
        })
    }))
}

/// The shifted cost game `c_s(S) = c(S) + Σ_{p∈S} s_p`, whose negation is a
/// value function `ν = −c_s`.
///
/// Excesses satisfy `excess_c(S, y) = excess_{c_s}(S, y + s)`, so the
/// (happy) nucleolus of the shifted game is the original one plus `s`.
pub struct ShiftedGame<G> {
    base: G,
    shifts: Vec<Rational>,
    nonnegative_value: Option<bool>,
}

impl<G: Game> ShiftedGame<G> {
    pub fn shifts(&self) -> &[Rational] {
        &self.shifts
    }

    pub fn base(&self) -> &G {
        &self.base
    }

    /// `ν(S) = −c_s(S)`.
    pub fn value(&self, s: Coalition) -> Rational {
        -self.cost(s)
    }

    /// Whether `ν ≥ 0` held on all coalitions; `None` when `n` is too large
    /// to enumerate.
    pub fn nonnegative_value(&self) -> Option<bool> {
        self.nonnegative_value
    }
}

impl<G: Game> Game for ShiftedGame<G> {
    fn n(&self) -> usize {
        self.base.n()
    }
    fn cost(&self, s: Coalition) -> Rational {
        s.members().fold(self.base.cost(s), |acc, p| acc + &self.shifts[p])
    }
    fn metadata(&self) -> GameMetadata {
        GameMetadata::default()
    }
}

pub fn shift_transform<G: Game>(game: G, shifts: Vec<Rational>) -> Result<ShiftedGame<G>> {
    if shifts.len() != game.n() {
        return Err(Error::InvalidInput(format!(
            "shift vector has length {}, game has {} players",
            shifts.len(),
            game.n()
        )));
    }
    let mut shifted = ShiftedGame {
        base: game,
        shifts,
        nonnegative_value: None,
    };
    let n = shifted.n();
    if n <= ENUMERATION_LIMIT {
        let zero = Rational::default();
        shifted.nonnegative_value = Some(Coalition::all(n).all(|s| shifted.value(s) >= zero));
    }
    Ok(shifted)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::rational::{int, ratio};
    use crate::game::{AdditiveGame, TableGame};
    use crate::setcover::{fixture, SetCoverGame};

    fn triangle() -> SetCoverGame {
        SetCoverGame::new(fixture("triangle").unwrap())
    }

    #[test]
    fn triangle_pair_excess() {
        let g = triangle();
        let y = Allocation::uniform(3, ratio(2, 3));
        assert_eq!(excess(&g, Coalition::from_bits(0b011), &y).unwrap(), ratio(-1, 3));
        assert_eq!(excess(&g, Coalition::EMPTY, &y).unwrap(), int(0));
    }

    #[test]
    fn excess_rejects_dimension_mismatch() {
        let g = triangle();
        assert!(excess(&g, Coalition::EMPTY, &Allocation::uniform(2, int(0))).is_err());
        let y = Allocation::uniform(3, int(0));
        assert!(excess(&g, Coalition::from_bits(0b1000), &y).is_err());
    }

    #[test]
    fn triangle_half_has_zero_minimum() {
        let g = triangle();
        let v = excess_vector(&g, &Allocation::uniform(3, ratio(1, 2)), None).unwrap();
        assert_eq!(v.len(), 8);
        assert_eq!(v.min(), Some(&int(0)));
        let zeros: Vec<_> = v.entries().iter().filter(|e| e.1 == int(0)).map(|e| e.0).collect();
        for pair in [0b011u64, 0b101, 0b110] {
            assert!(zeros.contains(&Coalition::from_bits(pair)));
        }
    }

    #[test]
    fn one_player_excess_vector() {
        let g = TableGame::new(1, vec![int(0), int(5)]).unwrap();
        let v = excess_vector(&g, &Allocation::uniform(1, int(5)), None).unwrap();
        assert_eq!(v.entries(), &[(Coalition::EMPTY, int(0)), (Coalition::from_bits(1), int(0))]);
    }

    #[test]
    fn excess_vector_size_guard() {
        let g = AdditiveGame::new(vec![int(1); 21]);
        let y = Allocation::uniform(21, int(0));
        assert!(matches!(excess_vector(&g, &y, None), Err(Error::SizeGuard { .. })));
        assert!(excess_vector(&g, &y, Some(&[Coalition::EMPTY])).is_ok());
    }

    #[test]
    fn lex_compare_first_difference() {
        let mk = |v: &[i64]| {
            ExcessVector::from_entries(
                v.iter().enumerate().map(|(i, x)| (Coalition::from_bits(i as u64), int(*x))).collect(),
            )
        };
        // sorted: (-1,0,2) vs (-1,0,1) after sorting (-1,1,0)
        let a = mk(&[-1, 0, 2]);
        let b = mk(&[-1, 1, 0]);
        assert_eq!(lex_compare(&a, &b).unwrap(), Ordering::Greater);
        assert_eq!(lex_compare(&a, &a).unwrap(), Ordering::Equal);
        assert!(lex_compare(&a, &mk(&[1])).is_err());
    }

    #[test]
    fn lex_compare_values_first_differing_entry() {
        let a = [int(-1), int(0), int(2)];
        let b = [int(-1), int(1), int(0)];
        assert_eq!(lex_compare_values(&a, &b).unwrap(), Ordering::Less);
        assert_eq!(lex_compare_values(&a, &a).unwrap(), Ordering::Equal);
    }

    #[test]
    fn property_checks() {
        let g = triangle();
        assert!(check_monotone(&g).unwrap());
        assert!(check_subadditive(&g).unwrap());

        let bad = TableGame::new(2, vec![int(0), int(2), int(0), int(1)]).unwrap();
        assert!(!check_monotone(&bad).unwrap());

        let add = AdditiveGame::new(vec![int(3), int(1), ratio(1, 2), int(7)]);
        assert!(check_monotone(&add).unwrap());
        assert!(check_subadditive(&add).unwrap());

        let big = AdditiveGame::new(vec![int(1); 13]);
        assert!(check_monotone(&big).is_err());
    }

    #[test]
    fn shift_identity_on_two_players() {
        let base = TableGame::new(2, vec![int(0), int(3), int(4), int(6)]).unwrap();
        let shifts = vec![ratio(-7, 2), int(2)];
        let g = shift_transform(&base, shifts.clone()).unwrap();
        let y = Allocation::new(vec![ratio(5, 3), int(-1)]);
        let ys = y.shifted(&shifts).unwrap();
        for s in Coalition::all(2) {
            assert_eq!(excess(&base, s, &y).unwrap(), excess(&g, s, &ys).unwrap());
        }
        let zero = shift_transform(&base, vec![int(0), int(0)]).unwrap();
        for s in Coalition::all(2) {
            assert_eq!(zero.value(s), -base.cost(s));
        }
        assert_eq!(zero.nonnegative_value(), Some(false));
        let neg = shift_transform(&base, vec![int(-10), int(-10)]).unwrap();
        assert_eq!(neg.nonnegative_value(), Some(true));
    }
}
