//! Sequential-LP nucleolus without span bookkeeping, used as a reference.

use num_traits::Zero;

use super::TotalValueMode;
use crate::game::rational::int;
use crate::game::{Allocation, Coalition, Game, Rational};
use crate::lp::{solve, Bound, LinearProgram, LpStatus, Relation, Sense};
use crate::{Error, Result};

pub const BRUTEFORCE_LIMIT: usize = 8;

fn indicator(n: usize, s: Coalition, offset: usize) -> Vec<Rational> {
    let mut v = vec![Rational::zero(); n + offset];
    for p in s.members() {
        v[p + offset] = int(1);
    }
    v
}

fn optimum(lp: &LinearProgram) -> Result<(Rational, Vec<Rational>)> {
    let sol = solve(lp)?;
    match (sol.status, sol.objective_value) {
        (LpStatus::Optimal, Some(v)) => Ok((v, sol.primal)),
        (status, _) => Err(Error::Internal(format!("reference LP ended {status:?}"))),
    }
}

/// Repeatedly maximizes the smallest excess among coalitions that are not
/// yet frozen and freezes every coalition whose excess equals the optimum in
/// all optimal solutions, until the allocation is unique.
pub fn bruteforce_lexi<G: Game + ?Sized>(game: &G, mode: TotalValueMode) -> Result<Allocation> {
    let n = game.n();
    if n == 0 {
        return Err(Error::InvalidInput("game without players".into()));
    }
    if n > BRUTEFORCE_LIMIT {
        return Err(Error::guard("bruteforce_lexi", BRUTEFORCE_LIMIT, n));
    }
    let grand = Coalition::grand(n);
    let v = match mode {
        TotalValueMode::Nucleolus => game.cost(grand),
        TotalValueMode::Happy => {
            let mut lp = LinearProgram::new(Sense::Maximize, vec![int(1); n]);
            for s in Coalition::all_nonempty(n) {
                lp.add_row(indicator(n, s, 0), Relation::Le, game.cost(s))?;
            }
            optimum(&lp)?.0
        }
    };
    if n == 1 {
        return Ok(Allocation::new(vec![v]));
    }
    let mut frozen: Vec<(Coalition, Rational)> = Vec::new();
    let mut free: Vec<Coalition> = Coalition::all_nonempty(n).filter(|s| *s != grand).collect();
    // Face of the current stage optimum over y alone.
    let face = |frozen: &[(Coalition, Rational)], free: &[Coalition], xi: &Rational, objective: Vec<Rational>, sense| {
        let mut lp = LinearProgram::new(sense, objective);
        lp.add_row(indicator(n, grand, 0), Relation::Eq, v.clone())?;
        for (s, e) in frozen {
            lp.add_row(indicator(n, *s, 0), Relation::Eq, game.cost(*s) - e)?;
        }
        for s in free {
            lp.add_row(indicator(n, *s, 0), Relation::Le, game.cost(*s) - xi)?;
        }
        Ok::<_, Error>(lp)
    };
    loop {
        let mut objective = vec![Rational::zero(); n + 1];
        objective[0] = int(1);
        let mut lp = LinearProgram::new(Sense::Maximize, objective);
        lp.add_row(indicator(n, grand, 1), Relation::Eq, v.clone())?;
        for (s, e) in &frozen {
            lp.add_row(indicator(n, *s, 1), Relation::Eq, game.cost(*s) - e)?;
        }
        for s in &free {
            let mut row = indicator(n, *s, 1);
            row[0] = int(1);
            lp.add_row(row, Relation::Le, game.cost(*s))?;
        }
        lp.set_bounds(0, Bound::free());
        let (xi, x) = optimum(&lp)?;
        let y = &x[1..];
        let mut still_free = Vec::new();
        let mut newly = Vec::new();
        for s in &free {
            let ys: Rational = s.members().map(|p| &y[p]).sum();
            let slack = game.cost(*s) - ys - &xi;
            if !slack.is_zero() {
                still_free.push(*s);
                continue;
            }
            let (min_ys, _) = optimum(&face(&frozen, &free, &xi, indicator(n, *s, 0), Sense::Minimize)?)?;
            if game.cost(*s) - min_ys == xi {
                newly.push(*s);
            } else {
                still_free.push(*s);
            }
        }
        if newly.is_empty() {
            return Err(Error::Internal("no coalition is tight in every optimum".into()));
        }
        frozen.extend(newly.into_iter().map(|s| (s, xi.clone())));
        free = still_free;
        let mut unique = true;
        let mut point = Vec::with_capacity(n);
        for p in 0..n {
            let e = indicator(n, Coalition::singleton(p), 0);
            let (lo, _) = optimum(&face(&frozen, &free, &xi, e.clone(), Sense::Minimize)?)?;
            let (hi, _) = optimum(&face(&frozen, &free, &xi, e, Sense::Maximize)?)?;
            if lo != hi {
                unique = false;
                break;
            }
            point.push(lo);
        }
        if unique {
            return Ok(Allocation::new(point));
        }
    }
}
