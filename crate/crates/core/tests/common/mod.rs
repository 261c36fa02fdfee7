//! Helpers shared by the integration tests.
#![allow(dead_code)]

use nucleolus::game::rational::{from_f64, int};
use nucleolus::game::Rational;
use nucleolus::lp::{solve, Bound, LinearProgram, Relation, Sense};
use nucleolus::packing::PackingLp;
use rand::Rng;

/// Random packing LP with `vars` columns and `rows` rows of density about
/// 0.1. Entries and objective are integers in `1..=9`, right-hand sides in
/// `10..=100`. Every column gets at least one entry, so the LP is bounded.
pub fn random_packing_lp<R: Rng>(vars: usize, rows: usize, rng: &mut R) -> PackingLp {
    let objective: Vec<f64> = (0..vars).map(|_| rng.gen_range(1..=9) as f64).collect();
    let mut entries: Vec<Vec<(usize, f64)>> = vec![Vec::new(); rows];
    for row in entries.iter_mut() {
        for j in 0..vars {
            if rng.gen_bool(0.1) {
                row.push((j, rng.gen_range(1..=9) as f64));
            }
        }
    }
    for j in 0..vars {
        if !entries.iter().any(|r| r.iter().any(|e| e.0 == j)) {
            let i = rng.gen_range(0..rows);
            entries[i].push((j, rng.gen_range(1..=9) as f64));
            entries[i].sort_by_key(|e| e.0);
        }
    }
    let mut lp = PackingLp::new(objective).unwrap();
    for row in entries {
        lp.add_row(row, rng.gen_range(10..=100) as f64).unwrap();
    }
    lp
}

/// The same LP over the rationals.
pub fn exact_packing(lp: &PackingLp) -> LinearProgram {
    let mut exact = LinearProgram::new(Sense::Maximize, lp.objective().iter().map(|&c| from_f64(c)).collect());
    for row in lp.rows() {
        let coeffs: Vec<(usize, Rational)> = row.entries.iter().map(|&(j, a)| (j, from_f64(a))).collect();
        exact.add_sparse_row(&coeffs, Relation::Le, from_f64(row.rhs)).unwrap();
    }
    for j in 0..lp.objective().len() {
        exact.set_bounds(j, Bound::nonnegative());
    }
    exact
}

/// Optimum of a packing LP by the exact simplex.
pub fn packing_opt(lp: &PackingLp) -> Rational {
    let sol = solve(&exact_packing(lp)).unwrap();
    assert!(sol.is_optimal());
    sol.objective_value.unwrap()
}

/// `x ≥ 0` and `Ax ≤ b`, checked in rational arithmetic on the exact
/// binary values of `x`.
pub fn exactly_feasible(lp: &PackingLp, x: &[f64]) -> bool {
    if x.iter().any(|v| !(*v >= 0.0) || !v.is_finite()) {
        return false;
    }
    let xr: Vec<Rational> = x.iter().map(|&v| from_f64(v)).collect();
    lp.rows().iter().all(|row| {
        let load: Rational = row.entries.iter().map(|&(j, a)| from_f64(a) * &xr[j]).fold(int(0), |s, t| s + t);
        load <= from_f64(row.rhs)
    })
}
