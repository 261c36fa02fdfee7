//! Exact revised simplex on `min cᵀx, Ax = b, x ≥ 0` with an explicit
//! rational basis inverse.
//!
//! Columns may be appended between solves; the current basis stays primal
//! feasible, so re-optimization resumes where the previous solve stopped.
//! Pricing is Dantzig's rule until a run of degenerate pivots, after which
//! the solve switches permanently to Bland's rule, which cannot cycle.

use num_traits::{One, Signed, Zero};

use super::basis::BasisFactor;
use super::float;
use crate::game::rational::to_f64;
use crate::game::Rational;

/// Consecutive degenerate pivots tolerated before switching to Bland's rule.
const DEGENERATE_STREAK_LIMIT: usize = 50;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Var {
    Real(usize),
    Artificial(usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Phase {
    One,
    Two,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) enum Outcome {
    Optimal,
    /// `Ax = b, x ≥ 0` has no solution.
    Infeasible,
    /// Entering column `column` improves without bound; `direction` lists the
    /// change of each basic real variable per unit of the entering one.
    Unbounded {
        column: usize,
        direction: Vec<(usize, Rational)>,
    },
}

#[derive(Clone, Debug)]
pub(crate) struct Simplex {
    m: usize,
    /// Rows flipped so that `b ≥ 0`.
    flipped: Vec<bool>,
    b: Vec<Rational>,
    cols: Vec<Vec<(usize, Rational)>>,
    cost: Vec<Rational>,
    basic_row: Vec<Option<usize>>,
    basis: Vec<Var>,
    binv: Vec<Vec<Rational>>,
    /// Set after a verified crash basis was installed without its inverse.
    binv_stale: bool,
    xb: Vec<Rational>,
    /// Simplex multipliers for the current phase, in flipped orientation.
    pi: Vec<Rational>,
    phase: Phase,
    bland: bool,
    degenerate_streak: usize,
    pivots: usize,
}

impl Simplex {
    pub(crate) fn new(b: Vec<Rational>) -> Self {
        let m = b.len();
        let flipped: Vec<bool> = b.iter().map(|v| v.is_negative()).collect();
        let b: Vec<Rational> = b.into_iter().map(|v| v.abs()).collect();
        let binv = (0..m)
            .map(|i| {
                let mut row = vec![Rational::zero(); m];
                row[i] = Rational::one();
                row
            })
            .collect();
        let phase = if b.iter().all(Zero::is_zero) {
            Phase::Two
        } else {
            Phase::One
        };
        let mut s = Simplex {
            m,
            flipped,
            xb: b.clone(),
            b,
            cols: Vec::new(),
            cost: Vec::new(),
            basic_row: Vec::new(),
            basis: (0..m).map(Var::Artificial).collect(),
            binv,
            binv_stale: false,
            pi: vec![Rational::zero(); m],
            phase,
            bland: false,
            degenerate_streak: 0,
            pivots: 0,
        };
        s.reset_multipliers();
        s
    }

    pub(crate) fn columns(&self) -> usize {
        self.cols.len()
    }

    pub(crate) fn pivots(&self) -> usize {
        self.pivots
    }

    /// Appends a column given in the caller's (unflipped) row orientation.
    pub(crate) fn add_column(&mut self, entries: Vec<(usize, Rational)>, cost: Rational) -> usize {
        let entries = entries
            .into_iter()
            .filter(|(_, v)| !v.is_zero())
            .map(|(i, v)| {
                debug_assert!(i < self.m);
                if self.flipped[i] {
                    (i, -v)
                } else {
                    (i, v)
                }
            })
            .collect();
        self.cols.push(entries);
        self.cost.push(cost);
        self.basic_row.push(None);
        self.cols.len() - 1
    }

    fn var_cost(&self, v: Var) -> Rational {
        match (self.phase, v) {
            (Phase::One, Var::Artificial(_)) => Rational::one(),
            (Phase::One, Var::Real(_)) | (Phase::Two, Var::Artificial(_)) => Rational::zero(),
            (Phase::Two, Var::Real(j)) => self.cost[j].clone(),
        }
    }

    fn rank(&self, v: Var) -> usize {
        match v {
            Var::Artificial(i) => i,
            Var::Real(j) => self.m + j,
        }
    }

    fn reset_multipliers(&mut self) {
        let mut pi = vec![Rational::zero(); self.m];
        for (i, &v) in self.basis.iter().enumerate() {
            let c = self.var_cost(v);
            if c.is_zero() {
                continue;
            }
            for (k, e) in self.binv[i].iter().enumerate() {
                if !e.is_zero() {
                    pi[k] += &c * e;
                }
            }
        }
        self.pi = pi;
    }

    fn dot_pi(&self, col: &[(usize, Rational)]) -> Rational {
        let mut acc = Rational::zero();
        for (i, a) in col {
            let p = &self.pi[*i];
            if p.is_zero() {
                continue;
            }
            if a.is_one() {
                acc += p;
            } else if (-a).is_one() {
                acc -= p;
            } else {
                acc += p * a;
            }
        }
        acc
    }

    fn reduced_cost(&self, j: usize) -> Rational {
        let c = if self.phase == Phase::One {
            Rational::zero()
        } else {
            self.cost[j].clone()
        };
        c - self.dot_pi(&self.cols[j])
    }

    fn choose_entering(&self) -> Option<(usize, Rational)> {
        let mut best: Option<(usize, Rational)> = None;
        for j in 0..self.cols.len() {
            if self.basic_row[j].is_some() {
                continue;
            }
            let d = self.reduced_cost(j);
            if !d.is_negative() {
                continue;
            }
            if self.bland {
                return Some((j, d));
            }
            if best.as_ref().is_none_or(|(_, bd)| d < *bd) {
                best = Some((j, d));
            }
        }
        best
    }

    fn column_in_basis(&self, j: usize) -> Vec<Rational> {
        let col = &self.cols[j];
        self.binv
            .iter()
            .map(|row| {
                let mut acc = Rational::zero();
                for (k, a) in col {
                    let e = &row[*k];
                    if e.is_zero() {
                        continue;
                    }
                    if a.is_one() {
                        acc += e;
                    } else {
                        acc += e * a;
                    }
                }
                acc
            })
            .collect()
    }

    fn pivot(&mut self, r: usize, q: usize, alpha: &[Rational], d_q: &Rational) {
        let ar = alpha[r].clone();
        let inv = ar.recip();
        for e in self.binv[r].iter_mut() {
            if !e.is_zero() {
                *e *= &inv;
            }
        }
        self.xb[r] *= &inv;
        let pivot_row = std::mem::take(&mut self.binv[r]);
        let pivot_x = self.xb[r].clone();
        for (i, a) in alpha.iter().enumerate() {
            if i == r || a.is_zero() {
                continue;
            }
            let row = &mut self.binv[i];
            for (k, e) in pivot_row.iter().enumerate() {
                if !e.is_zero() {
                    row[k] -= a * e;
                }
            }
            if !pivot_x.is_zero() {
                self.xb[i] -= a * &pivot_x;
            }
        }
        if !d_q.is_zero() {
            for (k, e) in pivot_row.iter().enumerate() {
                if !e.is_zero() {
                    self.pi[k] += d_q * e;
                }
            }
        }
        self.binv[r] = pivot_row;
        if let Var::Real(old) = self.basis[r] {
            self.basic_row[old] = None;
        }
        self.basis[r] = Var::Real(q);
        self.basic_row[q] = Some(r);
        self.pivots += 1;
        if pivot_x.is_zero() {
            self.degenerate_streak += 1;
            if self.degenerate_streak > DEGENERATE_STREAK_LIMIT {
                self.bland = true;
            }
        } else {
            self.degenerate_streak = 0;
        }
    }

    /// Runs simplex iterations for the current phase until optimal or unbounded.
    fn iterate(&mut self) -> Option<(usize, Vec<Rational>)> {
        loop {
            let Some((q, d_q)) = self.choose_entering() else {
                return None;
            };
            self.refresh_inverse();
            let alpha = self.column_in_basis(q);
            // Artificials sitting at zero leave as soon as the column touches their row.
            let mut leave: Option<(usize, Rational)> = None;
            for (i, a) in alpha.iter().enumerate() {
                if matches!(self.basis[i], Var::Artificial(_)) && self.xb[i].is_zero() && !a.is_zero() {
                    leave = Some((i, Rational::zero()));
                    break;
                }
            }
            if leave.is_none() {
                for (i, a) in alpha.iter().enumerate() {
                    if !a.is_positive() {
                        continue;
                    }
                    let ratio = &self.xb[i] / a;
                    let better = match &leave {
                        None => true,
                        Some((li, lr)) => {
                            ratio < *lr || (ratio == *lr && self.rank(self.basis[i]) < self.rank(self.basis[*li]))
                        }
                    };
                    if better {
                        leave = Some((i, ratio));
                    }
                }
            }
            match leave {
                None => return Some((q, alpha)),
                Some((r, _)) => self.pivot(r, q, &alpha, &d_q),
            }
        }
    }

    fn phase_one_objective(&self) -> Rational {
        self.basis
            .iter()
            .zip(&self.xb)
            .filter(|(v, _)| matches!(v, Var::Artificial(_)))
            .map(|(_, x)| x)
            .sum()
    }

    /// Pivots zero-level artificials out wherever a real column allows it.
    fn drive_out_artificials(&mut self) {
        for r in 0..self.m {
            if !matches!(self.basis[r], Var::Artificial(_)) {
                continue;
            }
            self.refresh_inverse();
            let rho = &self.binv[r];
            let candidate = (0..self.cols.len()).find(|&j| {
                self.basic_row[j].is_none()
                    && !self.cols[j]
                        .iter()
                        .map(|(k, a)| &rho[*k] * a)
                        .sum::<Rational>()
                        .is_zero()
            });
            if let Some(q) = candidate {
                let alpha = self.column_in_basis(q);
                let d = self.reduced_cost(q);
                self.pivot(r, q, &alpha, &d);
            }
        }
    }

    fn basic_column(&self, v: Var) -> Vec<(usize, Rational)> {
        match v {
            Var::Real(j) => self.cols[j].clone(),
            Var::Artificial(i) => vec![(i, Rational::one())],
        }
    }

    fn refresh_inverse(&mut self) {
        if !self.binv_stale {
            return;
        }
        let cols: Vec<Vec<(usize, Rational)>> = self.basis.iter().map(|&v| self.basic_column(v)).collect();
        let factor = BasisFactor::new(self.m, cols.iter().map(|c| c.as_slice()).collect()).expect("installed basis is regular");
        let units: Vec<Vec<Rational>> = (0..self.m)
            .map(|k| (0..self.m).map(|i| if i == k { Rational::one() } else { Rational::zero() }).collect())
            .collect();
        let inverse_cols = factor.solve(&units).expect("installed basis is regular");
        for (i, row) in self.binv.iter_mut().enumerate() {
            for (k, e) in row.iter_mut().enumerate() {
                *e = inverse_cols[k][i].clone();
            }
        }
        self.binv_stale = false;
    }

    /// Tries to jump straight to an optimal basis suggested by a
    /// floating-point solve. The basis is installed only if it is exactly
    /// primal and dual feasible; otherwise nothing changes.
    pub(crate) fn crash(&mut self) -> bool {
        if self.pivots > 0 || self.m == 0 || self.cols.is_empty() {
            return false;
        }
        let b: Vec<f64> = self.b.iter().map(to_f64).collect();
        let cols: Vec<Vec<(usize, f64)>> = self
            .cols
            .iter()
            .map(|c| c.iter().map(|(i, v)| (*i, to_f64(v))).collect())
            .collect();
        let cost: Vec<f64> = self.cost.iter().map(to_f64).collect();
        let Some(basic) = float::optimal_basis(&b, &cols, &cost) else {
            return false;
        };
        let Some(factor) = BasisFactor::new(self.m, basic.iter().map(|&j| self.cols[j].as_slice()).collect()) else {
            return false;
        };
        let Some(xb) = factor.solve(std::slice::from_ref(&self.b)).map(|mut v| v.remove(0)) else {
            return false;
        };
        if xb.iter().any(Signed::is_negative) {
            return false;
        }
        let cb: Vec<Rational> = basic.iter().map(|&j| self.cost[j].clone()).collect();
        let Some(pi) = factor.solve_transpose(&cb) else {
            return false;
        };
        let saved = std::mem::replace(&mut self.pi, pi);
        let saved_phase = std::mem::replace(&mut self.phase, Phase::Two);
        let mut in_basis = vec![false; self.cols.len()];
        for &j in &basic {
            in_basis[j] = true;
        }
        let dual_feasible = (0..self.cols.len()).all(|j| in_basis[j] || !self.reduced_cost(j).is_negative());
        if !dual_feasible {
            self.pi = saved;
            self.phase = saved_phase;
            return false;
        }
        for r in self.basic_row.iter_mut() {
            *r = None;
        }
        for (i, &j) in basic.iter().enumerate() {
            self.basis[i] = Var::Real(j);
            self.basic_row[j] = Some(i);
        }
        self.xb = xb;
        self.binv_stale = true;
        true
    }

    pub(crate) fn solve(&mut self) -> Outcome {
        if self.phase == Phase::One {
            if let Some((q, alpha)) = self.iterate() {
                // Phase one is bounded below by zero.
                unreachable!("phase one unbounded at column {q} ({} entries)", alpha.len());
            }
            if !self.phase_one_objective().is_zero() {
                return Outcome::Infeasible;
            }
            self.drive_out_artificials();
            self.phase = Phase::Two;
            self.bland = false;
            self.degenerate_streak = 0;
            self.reset_multipliers();
        }
        match self.iterate() {
            None => Outcome::Optimal,
            Some((column, alpha)) => {
                let direction = self
                    .basis
                    .iter()
                    .zip(alpha)
                    .filter_map(|(v, a)| match v {
                        Var::Real(j) if !a.is_zero() => Some((*j, -a)),
                        _ => None,
                    })
                    .collect();
                Outcome::Unbounded { column, direction }
            }
        }
    }

    /// Current basic solution over the real columns.
    #[cfg(test)]
    pub(crate) fn primal(&self) -> Vec<Rational> {
        let mut x = vec![Rational::zero(); self.cols.len()];
        for (i, v) in self.basis.iter().enumerate() {
            if let Var::Real(j) = v {
                x[*j] = self.xb[i].clone();
            }
        }
        x
    }

    pub(crate) fn value(&self, j: usize) -> Rational {
        match self.basic_row[j] {
            Some(r) => self.xb[r].clone(),
            None => Rational::zero(),
        }
    }

    /// Multipliers `π` with `πᵀA ≤ c` at optimality (phase two) or the
    /// phase-one multipliers after an infeasible phase one, in the caller's
    /// row orientation.
    pub(crate) fn multipliers(&self) -> Vec<Rational> {
        self.pi
            .iter()
            .zip(&self.flipped)
            .map(|(p, f)| if *f { -p.clone() } else { p.clone() })
            .collect()
    }

    pub(crate) fn objective(&self) -> Rational {
        self.basis
            .iter()
            .zip(&self.xb)
            .filter_map(|(v, x)| match v {
                Var::Real(j) if !x.is_zero() => Some(&self.cost[*j] * x),
                _ => None,
            })
            .sum()
    }

    #[cfg(test)]
    pub(crate) fn is_bland(&self) -> bool {
        self.bland
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::rational::{int, ratio};

    #[test]
    fn solves_small_standard_form() {
        // min -x1 - x2  s.t. x1 + 2x2 + s1 = 4, 3x1 + x2 + s2 = 6
        let mut s = Simplex::new(vec![int(4), int(6)]);
        s.add_column(vec![(0, int(1)), (1, int(3))], int(-1));
        s.add_column(vec![(0, int(2)), (1, int(1))], int(-1));
        s.add_column(vec![(0, int(1))], int(0));
        s.add_column(vec![(1, int(1))], int(0));
        assert_eq!(s.solve(), Outcome::Optimal);
        assert_eq!(s.objective(), ratio(-14, 5));
        let x = s.primal();
        assert_eq!(x[0], ratio(8, 5));
        assert_eq!(x[1], ratio(6, 5));
        let pi = s.multipliers();
        // strong duality
        assert_eq!(&pi[0] * int(4) + &pi[1] * int(6), ratio(-14, 5));
    }

    #[test]
    fn detects_infeasible() {
        // x = -1 with x ≥ 0
        let mut s = Simplex::new(vec![int(-1)]);
        s.add_column(vec![(0, int(1))], int(0));
        assert_eq!(s.solve(), Outcome::Infeasible);
        let pi = s.multipliers();
        // Farkas: πᵀa ≤ 0 and πᵀb > 0
        assert!(pi[0] <= int(0));
        assert!(&pi[0] * int(-1) > int(0));
    }

    #[test]
    fn detects_unbounded() {
        // min -x1 s.t. x1 - x2 = 0
        let mut s = Simplex::new(vec![int(0)]);
        s.add_column(vec![(0, int(1))], int(-1));
        s.add_column(vec![(0, int(-1))], int(0));
        match s.solve() {
            Outcome::Unbounded { .. } => {}
            other => panic!("expected unbounded, got {other:?}"),
        }
    }

    #[test]
    fn resumes_after_new_columns() {
        // min x1 + 3x2 s.t. x1 + x2 = 2; later add a cheaper column.
        let mut s = Simplex::new(vec![int(2)]);
        s.add_column(vec![(0, int(1))], int(3));
        assert_eq!(s.solve(), Outcome::Optimal);
        assert_eq!(s.objective(), int(6));
        s.add_column(vec![(0, int(2))], int(1));
        assert_eq!(s.solve(), Outcome::Optimal);
        assert_eq!(s.objective(), int(1));
    }

    #[test]
    fn redundant_rows_keep_artificials() {
        // two identical constraints
        let mut s = Simplex::new(vec![int(1), int(1)]);
        s.add_column(vec![(0, int(1)), (1, int(1))], int(1));
        s.add_column(vec![(0, int(2)), (1, int(2))], int(1));
        assert_eq!(s.solve(), Outcome::Optimal);
        assert_eq!(s.objective(), ratio(1, 2));
        assert!(!s.is_bland());
    }
}
