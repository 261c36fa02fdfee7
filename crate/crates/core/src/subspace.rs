//! Prize-collecting coalition problems, with and without a linear subspace
//! that the chosen coalition's incidence vector has to avoid.
//!
//! Given prizes `π ≥ 0`, the goal is a coalition `S` and an estimate
//! `λ ≥ c(S)` minimizing `λ + π(P \ S)`. [`restricted_pcc`] forces players
//! in or out of `S` by adjusting prizes, and [`subspace_avoiding_pcc`]
//! reduces the subspace-avoiding problem to a polynomial number of
//! restricted calls at an extra factor `ε`.

use std::sync::atomic::{AtomicUsize, Ordering};

use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::game::rational::{int, serde_str};
use crate::game::{serde_members, Coalition, Game, Rational, ENUMERATION_LIMIT};
use crate::lp::SpanBasis;
use crate::{Error, Result};

/// Largest game [`bruteforce_pcc`] enumerates.
pub const BRUTEFORCE_PCC_LIMIT: usize = 14;

/// A linear subspace of `ℝ^P` spanned by coalition incidence vectors.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Subspace {
    #[serde(with = "serde_members")]
    generators: Vec<Coalition>,
    basis: SpanBasis,
}

impl Subspace {
    /// The span of `generators`, which must not be all of `ℝ^n`.
    pub fn new(n: usize, generators: Vec<Coalition>) -> Result<Self> {
        let basis = SpanBasis::from_coalitions(n, &generators)?;
        if basis.is_full() {
            return Err(Error::InvalidInput("the subspace must be proper".into()));
        }
        Ok(Subspace { generators, basis })
    }

    /// The trivial subspace `{0}`.
    pub fn trivial(n: usize) -> Self {
        Subspace {
            generators: Vec::new(),
            basis: SpanBasis::new(n),
        }
    }

    pub fn dim(&self) -> usize {
        self.basis.dim()
    }

    pub fn rank(&self) -> usize {
        self.basis.rank()
    }

    pub fn generators(&self) -> &[Coalition] {
        &self.generators
    }

    pub fn basis(&self) -> &SpanBasis {
        &self.basis
    }

    pub fn contains(&self, s: Coalition) -> Result<bool> {
        self.basis.contains(s)
    }

    /// Players whose singleton lies outside the subspace.
    pub fn free_players(&self) -> Result<Coalition> {
        let mut out = Coalition::EMPTY;
        for p in 0..self.dim() {
            if !self.contains(Coalition::singleton(p))? {
                out = out.with(p);
            }
        }
        Ok(out)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PcSolution {
    pub coalition: Coalition,
    /// `λ ≥ c(coalition)`.
    #[serde(with = "serde_str")]
    pub cost_estimate: Rational,
}

/// `λ + π(P \ S)`.
pub fn pc_objective(pi: &[Rational], sol: &PcSolution) -> Rational {
    let mut v = sol.cost_estimate.clone();
    for (p, prize) in pi.iter().enumerate() {
        if !sol.coalition.contains(p) {
            v += prize;
        }
    }
    v
}

/// An `α`-approximation algorithm for the prize-collecting coalition problem.
pub trait PcOracle: Sync {
    fn alpha(&self) -> Rational;

    fn solve(&self, game: &dyn Game, pi: &[Rational]) -> Result<PcSolution>;
}

/// Exact oracle by enumeration (`α = 1`).
#[derive(Clone, Copy, Debug, Default)]
pub struct BruteForceOracle;

impl PcOracle for BruteForceOracle {
    fn alpha(&self) -> Rational {
        Rational::one()
    }

    fn solve(&self, game: &dyn Game, pi: &[Rational]) -> Result<PcSolution> {
        bruteforce_pcc(game, pi, None)
    }
}

/// Wraps an oracle and counts its calls.
pub struct CountingOracle<O> {
    inner: O,
    calls: AtomicUsize,
}

impl<O: PcOracle> CountingOracle<O> {
    pub fn new(inner: O) -> Self {
        CountingOracle {
            inner,
            calls: AtomicUsize::new(0),
        }
    }

    pub fn calls(&self) -> usize {
        self.calls.load(Ordering::Relaxed)
    }
}

impl<O: PcOracle> PcOracle for CountingOracle<O> {
    fn alpha(&self) -> Rational {
        self.inner.alpha()
    }

    fn solve(&self, game: &dyn Game, pi: &[Rational]) -> Result<PcSolution> {
        self.calls.fetch_add(1, Ordering::Relaxed);
        self.inner.solve(game, pi)
    }
}

fn check_prizes(n: usize, pi: &[Rational]) -> Result<()> {
    if pi.len() != n {
        return Err(Error::InvalidInput(format!("{} prizes for {n} players", pi.len())));
    }
    if pi.iter().any(Signed::is_negative) {
        return Err(Error::InvalidInput("prizes must be nonnegative".into()));
    }
    Ok(())
}

/// Exact optimum over all coalitions outside `l` (over all coalitions,
/// including `∅`, when `l` is absent), with `λ = c(S)`. Ties go to the
/// coalition with the smallest bits.
pub fn bruteforce_pcc<G: Game + ?Sized>(game: &G, pi: &[Rational], l: Option<&Subspace>) -> Result<PcSolution> {
    let n = game.n();
    if n > BRUTEFORCE_PCC_LIMIT {
        return Err(Error::guard("bruteforce_pcc", BRUTEFORCE_PCC_LIMIT, n));
    }
    check_prizes(n, pi)?;
    if let Some(l) = l {
        if l.dim() != n {
            return Err(Error::InvalidInput(format!("subspace of dimension {} for {n} players", l.dim())));
        }
    }
    let total: Rational = pi.iter().sum();
    let mut best: Option<(Rational, PcSolution)> = None;
    for s in Coalition::all(n) {
        if let Some(l) = l {
            if l.contains(s)? {
                continue;
            }
        }
        let mut v = game.cost(s);
        let sol_cost = v.clone();
        v += &total;
        for p in s.members() {
            v -= &pi[p];
        }
        if best.as_ref().map_or(true, |(b, _)| v < *b) {
            best = Some((
                v,
                PcSolution {
                    coalition: s,
                    cost_estimate: sol_cost,
                },
            ));
        }
    }
    best.map(|(_, s)| s)
        .ok_or_else(|| Error::NoFeasible("every coalition lies in the subspace".into()))
}

/// Upper bound on `c(P)` used by the prize lift of [`restricted_pcc`].
fn initial_bound<G: Game + ?Sized>(game: &G) -> Rational {
    let n = game.n();
    let max_single = (0..n)
        .map(|p| game.cost(Coalition::singleton(p)))
        .max()
        .unwrap_or_else(Rational::zero);
    let by_singletons = max_single * int(n as i64);
    let grand = game.cost(game.grand());
    let u = if grand > by_singletons { grand } else { by_singletons };
    if u.is_positive() {
        u
    } else {
        Rational::one()
    }
}

/// Attempts before giving up on doubling the bound.
const MAX_DOUBLINGS: usize = 64;

/// `α`-approximate solution among coalitions `S` with `a ⊆ S ⊆ P \ b`.
///
/// Prizes on `a` are lifted to `α·U + 1` and prizes on `b` dropped to zero;
/// the oracle's answer minus `b` is returned with its estimate unchanged,
/// which stays valid for monotone games. If the answer misses part of `a`,
/// `U` is doubled and the call repeated.
pub fn restricted_pcc<O: PcOracle + ?Sized, G: Game>(
    oracle: &O,
    game: &G,
    pi: &[Rational],
    a: Coalition,
    b: Coalition,
) -> Result<PcSolution> {
    let n = game.n();
    check_prizes(n, pi)?;
    if !a.is_disjoint(b) {
        return Err(Error::InvalidInput(format!("forced-in set {a} meets forced-out set {b}")));
    }
    if !a.fits(n) || !b.fits(n) {
        return Err(Error::InvalidInput("restriction sets exceed the player range".into()));
    }
    let alpha = oracle.alpha();
    let mut u = initial_bound(game);
    for _ in 0..MAX_DOUBLINGS {
        let lifted = &alpha * &u + Rational::one();
        let hat: Vec<Rational> = (0..n)
            .map(|p| {
                if a.contains(p) {
                    lifted.clone()
                } else if b.contains(p) {
                    Rational::zero()
                } else {
                    pi[p].clone()
                }
            })
            .collect();
        let sol = oracle.solve(game, &hat)?;
        if a.is_subset(sol.coalition) {
            return Ok(PcSolution {
                coalition: sol.coalition.difference(b),
                cost_estimate: sol.cost_estimate,
            });
        }
        u = u * int(2);
    }
    Err(Error::NoFeasible(format!("oracle never returned a coalition containing {a}")))
}

/// `K = ⌈1/ε⌉`.
fn out_set_size(eps: &Rational) -> Result<usize> {
    if !eps.is_positive() {
        return Err(Error::InvalidInput("eps must be positive".into()));
    }
    let k = (Rational::one() / eps).ceil().to_integer();
    k.to_usize()
        .ok_or_else(|| Error::InvalidInput("eps is too small".into()))
}

/// Upper bound on the restricted calls made by [`subspace_avoiding_pcc`]:
/// `|P'| + Σ_{j ≤ K} C(|P'|, j)`.
pub fn oracle_call_bound(free_players: usize, eps: &Rational) -> Result<u128> {
    let k = out_set_size(eps)?;
    let mut total = free_players as u128;
    let mut binom: u128 = 1;
    for j in 0..=k.min(free_players) {
        if j > 0 {
            binom = binom * (free_players - j + 1) as u128 / j as u128;
        }
        total += binom;
    }
    Ok(total)
}

/// Out-sets `O ⊆ free` with `|O| ≤ k`, in increasing bit order per size.
fn small_subsets(free: Coalition, k: usize) -> Vec<Coalition> {
    let members: Vec<usize> = free.members().collect();
    let mut out = vec![Coalition::EMPTY];
    let mut frontier = vec![(Coalition::EMPTY, 0usize)];
    for _ in 0..k.min(members.len()) {
        let mut next = Vec::new();
        for (s, start) in frontier {
            for (i, p) in members.iter().enumerate().skip(start) {
                let t = s.with(*p);
                out.push(t);
                next.push((t, i + 1));
            }
        }
        frontier = next;
    }
    out
}

/// In-set for out-set `o` (the two cases of the reduction).
fn in_set(free: Coalition, o: Coalition, k: usize, pi: &[Rational]) -> Coalition {
    let rest = free.difference(o);
    if o.len() < k {
        return rest;
    }
    let threshold = o.members().map(|q| &pi[q]).min().expect("nonempty out-set");
    rest.members().filter(|p| pi[*p] > *threshold).collect()
}

/// `(α+ε)`-approximate solution whose incidence vector avoids `l`.
///
/// Both cases of the reduction are enumerated: (a) for every free player
/// `p` (whose singleton is outside `l`), the best coalition containing `p`,
/// keeping `S` or `S \ {p}`, whichever avoids `l`; (b) for every out-set
/// `O` of at most `⌈1/ε⌉` free players, the best coalition that agrees with
/// the corresponding in-set on the free players. The cheapest feasible
/// candidate wins; ties go to the smallest coalition bits.
pub fn subspace_avoiding_pcc<O: PcOracle + ?Sized, G: Game>(
    oracle: &O,
    game: &G,
    pi: &[Rational],
    l: &Subspace,
    eps: &Rational,
) -> Result<PcSolution> {
    let n = game.n();
    check_prizes(n, pi)?;
    if l.dim() != n {
        return Err(Error::InvalidInput(format!("subspace of dimension {} for {n} players", l.dim())));
    }
    if l.rank() >= n {
        return Err(Error::InvalidInput("the subspace must be proper".into()));
    }
    let k = out_set_size(eps)?;
    let free = l.free_players()?;
    if free.is_empty() {
        return Err(Error::Internal("a proper subspace leaves some singleton outside".into()));
    }
    enum Task {
        Include(usize),
        Out(Coalition),
    }
    let mut tasks: Vec<Task> = free.members().map(Task::Include).collect();
    tasks.extend(small_subsets(free, k).into_iter().map(Task::Out));
    let candidates: Vec<Option<PcSolution>> = tasks
        .par_iter()
        .map(|task| -> Result<Option<PcSolution>> {
            match task {
                Task::Include(p) => {
                    let sol = restricted_pcc(oracle, game, pi, Coalition::singleton(*p), Coalition::EMPTY)?;
                    if !l.contains(sol.coalition)? {
                        return Ok(Some(sol));
                    }
                    let smaller = sol.coalition.without(*p);
                    if !l.contains(smaller)? {
                        return Ok(Some(PcSolution {
                            coalition: smaller,
                            cost_estimate: sol.cost_estimate,
                        }));
                    }
                    Err(Error::Internal(format!("both {} and its reduction lie in the subspace", sol.coalition)))
                }
                Task::Out(o) => {
                    let i = in_set(free, *o, k, pi);
                    let sol = restricted_pcc(oracle, game, pi, i, free.difference(i))?;
                    Ok((!l.contains(sol.coalition)?).then_some(sol))
                }
            }
        })
        .collect::<Result<_>>()?;
    candidates
        .into_iter()
        .flatten()
        .map(|s| (pc_objective(pi, &s), s))
        .min_by(|(va, a), (vb, b)| va.cmp(vb).then(a.coalition.cmp(&b.coalition)))
        .map(|(_, s)| s)
        .ok_or_else(|| Error::NoFeasible("no candidate avoids the subspace".into()))
}

/// Random proper subspace spanned by up to `n - 1` random nonempty coalitions.
pub fn random_subspace<R: rand::Rng>(n: usize, rng: &mut R) -> Result<Subspace> {
    if n == 0 || n > ENUMERATION_LIMIT {
        return Err(Error::guard("random_subspace", ENUMERATION_LIMIT, n));
    }
    let target = rng.gen_range(0..n);
    let mut gens = Vec::new();
    let mut basis = SpanBasis::new(n);
    let mut attempts = 0;
    while basis.rank() < target && attempts < 100 * n {
        attempts += 1;
        let s = Coalition::from_bits(rng.gen_range(1..(1u64 << n)));
        if basis.rank() + 1 < n || !basis.contains(s)? {
            if basis.insert_coalition(s)? {
                gens.push(s);
            }
        }
    }
    Subspace::new(n, gens)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::random::random_monotone_game;
    use crate::game::rational::ratio;
    use crate::game::AdditiveGame;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(members: &[usize]) -> Coalition {
        Coalition::from_members(members.iter().copied()).unwrap()
    }

    #[test]
    fn additive_game_prizes() {
        let g = AdditiveGame::new(vec![int(1); 4]);
        let sol = bruteforce_pcc(&g, &vec![int(2); 4], None).unwrap();
        assert_eq!(sol.coalition, Coalition::grand(4));
        assert_eq!(pc_objective(&vec![int(2); 4], &sol), int(4));
        let sol = bruteforce_pcc(&g, &vec![int(0); 4], None).unwrap();
        assert_eq!(sol.coalition, Coalition::EMPTY);
    }

    #[test]
    fn trivial_subspace_forces_nonempty() {
        let g = AdditiveGame::new(vec![int(1); 3]);
        let pi = vec![int(0); 3];
        let l = Subspace::trivial(3);
        let sol = subspace_avoiding_pcc(&BruteForceOracle, &g, &pi, &l, &ratio(1, 2)).unwrap();
        assert!(!sol.coalition.is_empty());
        assert_eq!(pc_objective(&pi, &sol), int(1));
    }

    #[test]
    fn restricted_matches_enumeration() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..30 {
            let n = rng.gen_range(2..=6);
            let g = random_monotone_game(n, 6, &mut rng).unwrap();
            let pi: Vec<Rational> = (0..n).map(|_| int(rng.gen_range(0..8))).collect();
            let mut a = Coalition::EMPTY;
            let mut b = Coalition::EMPTY;
            for p in 0..n {
                match rng.gen_range(0..4) {
                    0 => a = a.with(p),
                    1 => b = b.with(p),
                    _ => {}
                }
            }
            let sol = restricted_pcc(&BruteForceOracle, &g, &pi, a, b).unwrap();
            assert!(a.is_subset(sol.coalition) && sol.coalition.is_disjoint(b));
            assert!(sol.cost_estimate >= g.cost(sol.coalition));
            let best = Coalition::all(n)
                .filter(|s| a.is_subset(*s) && s.is_disjoint(b))
                .map(|s| pc_objective(&pi, &PcSolution { coalition: s, cost_estimate: g.cost(s) }))
                .min()
                .unwrap();
            assert_eq!(pc_objective(&pi, &sol), best);
        }
    }

    #[test]
    fn restriction_to_a_single_coalition() {
        let g = AdditiveGame::new(vec![int(3), int(1), int(2)]);
        let pi = vec![int(0); 3];
        let sol = restricted_pcc(&BruteForceOracle, &g, &pi, c(&[0]), c(&[1, 2])).unwrap();
        assert_eq!(sol.coalition, c(&[0]));
        assert!(sol.cost_estimate >= int(3));
        assert!(restricted_pcc(&BruteForceOracle, &g, &pi, c(&[0]), c(&[0])).is_err());
    }

    #[test]
    fn escapes_the_subspace_by_dropping_a_player() {
        // Serving everyone is optimal but lies in L; dropping the player
        // with the small prize escapes.
        let g = AdditiveGame::new(vec![int(1); 4]);
        let pi = vec![int(3), int(3), int(3), ratio(3, 2)];
        let l = Subspace::new(4, vec![Coalition::grand(4)]).unwrap();
        let unconstrained = bruteforce_pcc(&g, &pi, None).unwrap();
        assert!(l.contains(unconstrained.coalition).unwrap());
        let opt = bruteforce_pcc(&g, &pi, Some(&l)).unwrap();
        assert_eq!(pc_objective(&pi, &opt), ratio(9, 2));
        let eps = ratio(1, 2);
        let sol = subspace_avoiding_pcc(&BruteForceOracle, &g, &pi, &l, &eps).unwrap();
        assert_eq!(sol.coalition, c(&[0, 1, 2]));
        assert!(pc_objective(&pi, &sol) <= (Rational::one() + &eps) * pc_objective(&pi, &opt));
    }

    #[test]
    fn call_bound_formula() {
        assert_eq!(oracle_call_bound(4, &ratio(1, 2)).unwrap(), 4 + 1 + 4 + 6);
        assert_eq!(small_subsets(c(&[0, 2, 3]), 2).len(), 1 + 3 + 3);
    }

    #[test]
    fn random_subspaces_are_proper() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for n in 1..=8 {
            let l = random_subspace(n, &mut rng).unwrap();
            assert!(l.rank() < n);
            assert!(!l.free_players().unwrap().is_empty());
        }
        assert!(Subspace::new(2, vec![c(&[0]), c(&[1])]).is_err());
    }

    #[test]
    fn avoiding_solutions_on_random_games() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..20 {
            let n = rng.gen_range(2..=6);
            let g = random_monotone_game(n, 6, &mut rng).unwrap();
            let pi: Vec<Rational> = (0..n).map(|_| int(rng.gen_range(0..10))).collect();
            let l = random_subspace(n, &mut rng).unwrap();
            let eps = ratio(1, 2);
            let oracle = CountingOracle::new(BruteForceOracle);
            let sol = subspace_avoiding_pcc(&oracle, &g, &pi, &l, &eps).unwrap();
            let opt = bruteforce_pcc(&g, &pi, Some(&l)).unwrap();
            assert!(!l.contains(sol.coalition).unwrap());
            assert!(sol.cost_estimate >= g.cost(sol.coalition));
            assert!(pc_objective(&pi, &sol) * int(2) <= pc_objective(&pi, &opt) * int(3));
            let free = l.free_players().unwrap().len();
            assert!(oracle.calls() as u128 <= oracle_call_bound(free, &eps).unwrap());
        }
    }
}
