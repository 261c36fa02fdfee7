//! Seeded random games for tests and experiments.

use rand::Rng;

use super::rational::int;
use super::{Coalition, Rational, TableGame};
use crate::setcover::{cover_cost, SetCoverInstance};
use crate::Result;

/// Monotone game `c(S) = max_{T ⊆ S} w(T)` with integer weights
/// `w(T) ∈ [1, max_weight · |T|]`.
pub fn random_monotone_game<R: Rng>(n: usize, max_weight: i64, rng: &mut R) -> Result<TableGame> {
    let size = 1usize << n;
    let mut costs: Vec<Rational> = vec![int(0); size];
    for bits in 1..size {
        let s = Coalition::from_bits(bits as u64);
        let mut c = int(rng.gen_range(1..=max_weight * s.len() as i64));
        for p in s.members() {
            let sub = &costs[s.without(p).bits() as usize];
            if *sub > c {
                c = sub.clone();
            }
        }
        costs[bits] = c;
    }
    TableGame::new(n, costs)
}

/// Random set covering instance: every singleton plus `extra` random sets,
/// integer costs in `1..=max_cost`.
pub fn random_set_cover<R: Rng>(n: usize, extra: usize, max_cost: i64, rng: &mut R) -> Result<SetCoverInstance> {
    let mut sets: Vec<(Coalition, Rational)> =
        (0..n).map(|p| (Coalition::singleton(p), int(rng.gen_range(1..=max_cost)))).collect();
    for _ in 0..extra {
        let bits = rng.gen_range(1..(1u64 << n));
        let s = Coalition::from_bits(bits);
        sets.push((s, int(rng.gen_range(1..=max_cost * s.len() as i64))));
    }
    SetCoverInstance::new(n, sets)
}

/// Table of a random set covering game.
pub fn random_set_cover_game<R: Rng>(n: usize, extra: usize, max_cost: i64, rng: &mut R) -> Result<TableGame> {
    let inst = random_set_cover(n, extra, max_cost, rng)?;
    TableGame::from_fn(n, |s| cover_cost(&inst, s).expect("small instance"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::{check_monotone, check_subadditive};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn generated_games_are_monotone() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for n in 1..=6 {
            let g = random_monotone_game(n, 5, &mut rng).unwrap();
            assert!(check_monotone(&g).unwrap());
            let h = random_set_cover_game(n, 2 * n, 6, &mut rng).unwrap();
            assert!(check_monotone(&h).unwrap());
            assert!(check_subadditive(&h).unwrap());
        }
    }
}
