//! Constraint generation for the stage LPs over large coalition families.
//!
//! The stage LP is solved on a small active subset of the family. After each
//! solve the whole family is screened in floating point for rows the current
//! point violates; candidates are confirmed exactly before they enter the LP.

use num_traits::{Signed, Zero};
use rayon::prelude::*;

use crate::game::rational::{int, to_f64};
use crate::game::{Coalition, Game, Rational};
use crate::lp::{IncrementalLp, IncrementalOutcome, Relation, SpanBasis};
use crate::{Error, Result};

/// A finite list of coalitions with exact costs.
pub trait CostFamily: Sync {
    fn n(&self) -> usize;

    fn len(&self) -> usize;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn coalition(&self, i: usize) -> Coalition;

    fn cost(&self, i: usize) -> Rational;

    fn cost_f64(&self, i: usize) -> f64 {
        to_f64(&self.cost(i))
    }
}

/// Family members with costs taken from a game; `∅` and duplicates dropped.
pub struct ExplicitFamily {
    n: usize,
    coalitions: Vec<Coalition>,
    costs: Vec<Rational>,
    costs_f64: Vec<f64>,
}

impl ExplicitFamily {
    pub fn from_game<G: Game + ?Sized>(game: &G, family: &[Coalition]) -> Result<Self> {
        let n = game.n();
        let mut coalitions: Vec<Coalition> = Vec::with_capacity(family.len());
        let mut seen = std::collections::HashSet::new();
        for s in family {
            if !s.fits(n) {
                return Err(Error::InvalidInput(format!("coalition {s} has members outside 0..{n}")));
            }
            if !s.is_empty() && seen.insert(*s) {
                coalitions.push(*s);
            }
        }
        let costs: Vec<Rational> = coalitions.iter().map(|s| game.cost(*s)).collect();
        Ok(Self::new(n, coalitions, costs))
    }

    pub(crate) fn new(n: usize, coalitions: Vec<Coalition>, costs: Vec<Rational>) -> Self {
        let costs_f64 = costs.iter().map(to_f64).collect();
        ExplicitFamily {
            n,
            coalitions,
            costs,
            costs_f64,
        }
    }

    pub fn coalitions(&self) -> &[Coalition] {
        &self.coalitions
    }

    pub fn costs(&self) -> &[Rational] {
        &self.costs
    }
}

impl CostFamily for ExplicitFamily {
    fn n(&self) -> usize {
        self.n
    }
    fn len(&self) -> usize {
        self.coalitions.len()
    }
    fn coalition(&self, i: usize) -> Coalition {
        self.coalitions[i]
    }
    fn cost(&self, i: usize) -> Rational {
        self.costs[i].clone()
    }
    fn cost_f64(&self, i: usize) -> f64 {
        self.costs_f64[i]
    }
}

/// Members added to the LP per separation round.
const BATCH: usize = 32;

/// Point tested by separation: rows `y(S) + xi ≤ scale · c(S)`.
///
/// `scale = 1` checks feasibility of a primal point; `scale = 0` checks
/// whether a row blocks an improving ray.
struct Probe {
    y: Vec<Rational>,
    xi: Rational,
    scale: Rational,
}

impl Probe {
    fn violation(&self, s: Coalition, cost: &Rational) -> Rational {
        let mut v = self.xi.clone() - &self.scale * cost;
        for p in s.members() {
            v += &self.y[p];
        }
        v
    }
}

/// Span membership of family members. Once in the span, always in the span.
pub(crate) struct SpanCache {
    known_in: Vec<bool>,
}

impl SpanCache {
    pub(crate) fn new(len: usize) -> Self {
        SpanCache {
            known_in: vec![false; len],
        }
    }

    pub(crate) fn in_span(&mut self, basis: &SpanBasis, i: usize, s: Coalition) -> Result<bool> {
        if self.known_in[i] {
            return Ok(true);
        }
        let r = basis.contains(s)?;
        self.known_in[i] = r;
        Ok(r)
    }

    pub(crate) fn known(&self, i: usize) -> bool {
        self.known_in[i]
    }
}

/// Indices of up to `limit` family members outside the span, not yet active,
/// whose rows the probe violates; most violated first.
fn separate<F: CostFamily>(
    family: &F,
    probe: &Probe,
    basis: &SpanBasis,
    spans: &mut SpanCache,
    active: &[bool],
    limit: usize,
) -> Result<Vec<usize>> {
    let yf: Vec<f64> = probe.y.iter().map(to_f64).collect();
    let xif = to_f64(&probe.xi);
    let scalef = to_f64(&probe.scale);
    let ymag: f64 = yf.iter().map(|v| v.abs()).sum::<f64>() + xif.abs();
    let known: &SpanCache = spans;
    let mut candidates: Vec<(usize, f64)> = (0..family.len())
        .into_par_iter()
        .filter(|&i| !active[i] && !known.known(i))
        .filter_map(|i| {
            let s = family.coalition(i);
            let c = family.cost_f64(i);
            let v = s.members().map(|p| yf[p]).sum::<f64>() + xif - scalef * c;
            let tol = 1e-9 * (1.0 + ymag + c.abs()) * 64.0;
            (v > -tol).then_some((i, v))
        })
        .collect();
    candidates.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    let mut out = Vec::new();
    for (i, _) in candidates {
        let s = family.coalition(i);
        if !probe.violation(s, &family.cost(i)).is_positive() {
            continue;
        }
        if spans.in_span(basis, i, s)? {
            continue;
        }
        out.push(i);
        if out.len() >= limit {
            break;
        }
    }
    Ok(out)
}

fn coalition_row(s: Coalition, offset: usize, with_xi: bool) -> Vec<(usize, Rational)> {
    let mut row: Vec<(usize, Rational)> = Vec::with_capacity(s.len() + 1);
    if with_xi {
        row.push((0, int(1)));
    }
    row.extend(s.members().map(|p| (p + offset, int(1))));
    row
}

/// `max y(P)` subject to `y(S) ≤ c(S)` for every family member.
pub fn happy_total<F: CostFamily>(family: &F) -> Result<Rational> {
    let n = family.n();
    let mut inc = IncrementalLp::maximize(vec![int(1); n]);
    let mut active = vec![false; family.len()];
    let basis = SpanBasis::new(n);
    let mut spans = SpanCache::new(family.len());
    loop {
        let probe = match inc.solve() {
            IncrementalOutcome::Optimal => Probe {
                y: inc.primal(),
                xi: Rational::zero(),
                scale: int(1),
            },
            IncrementalOutcome::DualInfeasible(ray) => Probe {
                y: ray,
                xi: Rational::zero(),
                scale: Rational::zero(),
            },
            IncrementalOutcome::Infeasible(_) => {
                return Err(Error::Internal("happiness LP infeasible".into()));
            }
        };
        let add = separate(family, &probe, &basis, &mut spans, &active, BATCH)?;
        if add.is_empty() {
            if probe.scale.is_zero() {
                return Err(Error::InsufficientFamily("the LP is unbounded over this family".into()));
            }
            return Ok(inc.objective());
        }
        for i in add {
            active[i] = true;
            inc.add_row(&coalition_row(family.coalition(i), 0, false), Relation::Le, family.cost(i));
        }
    }
}

/// One stage of the scheme.
#[derive(Clone, Debug)]
pub(crate) struct StageOutcome {
    pub xi: Rational,
    pub y: Vec<Rational>,
    /// Active non-span rows with nonzero dual.
    pub tight: Vec<usize>,
    /// All rows that were active at the optimum.
    pub active: Vec<usize>,
    pub pivots: usize,
}

/// Solves `max ξ` subject to the fixed equalities and `y(S) + ξ ≤ c(S)` for
/// family members outside `span(basis)`, starting from `warm` rows.
pub(crate) fn solve_stage<F: CostFamily>(
    family: &F,
    equalities: &[(Coalition, Rational)],
    basis: &SpanBasis,
    spans: &mut SpanCache,
    warm: &[usize],
) -> Result<StageOutcome> {
    let n = family.n();
    let mut objective = vec![Rational::zero(); n + 1];
    objective[0] = int(1);
    let mut inc = IncrementalLp::maximize(objective);
    for (s, rhs) in equalities {
        inc.add_row(&coalition_row(*s, 1, false), Relation::Eq, rhs.clone());
    }
    let mut active = vec![false; family.len()];
    let mut rows: Vec<usize> = Vec::new();
    for &i in warm {
        if !active[i] && !spans.in_span(basis, i, family.coalition(i))? {
            active[i] = true;
            rows.push(i);
            inc.add_row(&coalition_row(family.coalition(i), 1, true), Relation::Le, family.cost(i));
        }
    }
    loop {
        let probe = match inc.solve() {
            IncrementalOutcome::Optimal => {
                let x = inc.primal();
                Probe {
                    xi: x[0].clone(),
                    y: x[1..].to_vec(),
                    scale: int(1),
                }
            }
            IncrementalOutcome::DualInfeasible(ray) => Probe {
                xi: ray[0].clone(),
                y: ray[1..].to_vec(),
                scale: Rational::zero(),
            },
            IncrementalOutcome::Infeasible(_) => {
                return Err(Error::Internal("stage LP infeasible".into()));
            }
        };
        let add = separate(family, &probe, basis, spans, &active, BATCH)?;
        if add.is_empty() {
            if probe.scale.is_zero() {
                return Err(Error::InsufficientFamily("the LP is unbounded over this family".into()));
            }
            let base = equalities.len();
            let tight = rows
                .iter()
                .enumerate()
                .filter(|(k, _)| !inc.dual(base + k).is_zero())
                .map(|(_, &i)| i)
                .collect();
            return Ok(StageOutcome {
                xi: probe.xi,
                y: probe.y,
                tight,
                active: rows,
                pivots: inc.pivots(),
            });
        }
        for i in add {
            active[i] = true;
            rows.push(i);
            inc.add_row(&coalition_row(family.coalition(i), 1, true), Relation::Le, family.cost(i));
        }
    }
}
