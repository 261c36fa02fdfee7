//! Exact rational linear programming and span tracking.
//!
//! [`solve`] handles general LPs with free or bounded variables and `≤ / = / ≥`
//! rows. Internally every LP is brought into "free variables, `≤`/`=` rows"
//! form and its dual `min bᵀz, Aᵀz = c, z ≥ 0` is solved by the revised
//! simplex in [`simplex`]. The simplex basis then has one row per primal
//! variable, which keeps the tall LPs of the nucleolus scheme (a handful of
//! variables, thousands of coalition rows) cheap. Primal values are the
//! simplex multipliers of that dual.

mod basis;
mod float;
mod simplex;
mod span;

use std::fmt::Write as _;

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::game::rational::format_rational;
use crate::game::Rational;
use crate::{Error, Result};

pub(crate) use simplex::{Outcome, Simplex};
pub use span::{extend_basis, in_span, incidence, SpanBasis};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sense {
    Maximize,
    Minimize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Relation {
    Le,
    Eq,
    Ge,
}

impl Relation {
    fn symbol(self) -> &'static str {
        match self {
            Relation::Le => "<=",
            Relation::Eq => "=",
            Relation::Ge => ">=",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Row {
    pub coeffs: Vec<Rational>,
    pub relation: Relation,
    pub rhs: Rational,
}

/// Per-variable bounds; `None` is infinite.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Bound {
    pub lower: Option<Rational>,
    pub upper: Option<Rational>,
}

impl Bound {
    pub fn free() -> Self {
        Bound::default()
    }

    pub fn nonnegative() -> Self {
        Bound {
            lower: Some(Rational::zero()),
            upper: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LinearProgram {
    pub sense: Sense,
    pub objective: Vec<Rational>,
    pub rows: Vec<Row>,
    pub bounds: Vec<Bound>,
}

impl LinearProgram {
    /// An LP over free variables with no rows.
    pub fn new(sense: Sense, objective: Vec<Rational>) -> Self {
        let n = objective.len();
        LinearProgram {
            sense,
            objective,
            rows: Vec::new(),
            bounds: vec![Bound::free(); n],
        }
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn add_row(&mut self, coeffs: Vec<Rational>, relation: Relation, rhs: Rational) -> Result<usize> {
        if coeffs.len() != self.num_vars() {
            return Err(Error::InvalidInput(format!(
                "row has {} coefficients, LP has {} variables",
                coeffs.len(),
                self.num_vars()
            )));
        }
        self.rows.push(Row { coeffs, relation, rhs });
        Ok(self.rows.len() - 1)
    }

    /// Adds a row from `(variable, coefficient)` pairs.
    pub fn add_sparse_row(
        &mut self,
        entries: &[(usize, Rational)],
        relation: Relation,
        rhs: Rational,
    ) -> Result<usize> {
        let mut coeffs = vec![Rational::zero(); self.num_vars()];
        for (j, v) in entries {
            if *j >= coeffs.len() {
                return Err(Error::InvalidInput(format!("variable index {j} out of range")));
            }
            coeffs[*j] += v;
        }
        self.add_row(coeffs, relation, rhs)
    }

    pub fn set_bounds(&mut self, var: usize, bound: Bound) {
        self.bounds[var] = bound;
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.num_vars();
        if self.bounds.len() != n {
            return Err(Error::InvalidInput(format!("{} bounds for {n} variables", self.bounds.len())));
        }
        if let Some((i, _)) = self.rows.iter().enumerate().find(|(_, r)| r.coeffs.len() != n) {
            return Err(Error::InvalidInput(format!("row {i} has the wrong width")));
        }
        Ok(())
    }

    /// Plain-text dump, one constraint per line.
    pub fn to_text(&self) -> String {
        fn expr(coeffs: &[Rational]) -> String {
            let terms: Vec<String> = coeffs
                .iter()
                .enumerate()
                .filter(|(_, c)| !c.is_zero())
                .map(|(j, c)| format!("{} x{j}", format_rational(c)))
                .collect();
            if terms.is_empty() {
                "0".to_string()
            } else {
                terms.join(" + ")
            }
        }
        let mut out = String::new();
        let sense = match self.sense {
            Sense::Maximize => "max",
            Sense::Minimize => "min",
        };
        let _ = writeln!(out, "{sense}: {}", expr(&self.objective));
        for (i, r) in self.rows.iter().enumerate() {
            let _ = writeln!(
                out,
                "r{i}: {} {} {}",
                expr(&r.coeffs),
                r.relation.symbol(),
                format_rational(&r.rhs)
            );
        }
        for (j, b) in self.bounds.iter().enumerate() {
            match (&b.lower, &b.upper) {
                (None, None) => {}
                (Some(l), None) => {
                    let _ = writeln!(out, "x{j} >= {}", format_rational(l));
                }
                (None, Some(u)) => {
                    let _ = writeln!(out, "x{j} <= {}", format_rational(u));
                }
                (Some(l), Some(u)) => {
                    let _ = writeln!(out, "{} <= x{j} <= {}", format_rational(l), format_rational(u));
                }
            }
        }
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Certificate {
    /// Improving direction `r` of a feasible LP.
    Ray(Vec<Rational>),
    /// Multipliers proving infeasibility: combining the rows (and bounds)
    /// with these weights yields `0 ≥ positive` (or `0 ≤ negative`).
    Farkas {
        rows: Vec<Rational>,
        bounds: Vec<Rational>,
    },
}

/// Solution of [`solve`].
///
/// Dual values follow the convention `c = Σ_i dual_i · a_i + bound_dual`,
/// so that the optimal objective equals `Σ_i dual_i · rhs_i` plus the bound
/// terms. For a maximization, `≤` rows carry nonnegative duals and `≥` rows
/// nonpositive ones; equality rows are unrestricted.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LpSolution {
    pub status: LpStatus,
    pub primal: Vec<Rational>,
    pub dual: Vec<Rational>,
    pub bound_dual: Vec<Rational>,
    pub objective_value: Option<Rational>,
    pub certificate: Option<Certificate>,
}

impl LpSolution {
    pub fn is_optimal(&self) -> bool {
        self.status == LpStatus::Optimal
    }
}

#[derive(Clone, Copy, Debug)]
struct RowColumns {
    plus: usize,
    minus: Option<usize>,
    negated: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) enum IncrementalOutcome {
    Optimal,
    /// Farkas multipliers per row (caller orientation).
    Infeasible(Vec<Rational>),
    /// The dual is infeasible: either the LP is unbounded along `ray` or it
    /// is infeasible. Callers that know the LP is feasible can use the ray.
    DualInfeasible(Vec<Rational>),
}

/// `max cᵀx` over free `x` with rows appended between solves.
#[derive(Clone, Debug)]
pub(crate) struct IncrementalLp {
    simplex: Simplex,
    rows: Vec<RowColumns>,
}

impl IncrementalLp {
    pub(crate) fn maximize(objective: Vec<Rational>) -> Self {
        IncrementalLp {
            simplex: Simplex::new(objective),
            rows: Vec::new(),
        }
    }

    pub(crate) fn num_rows(&self) -> usize {
        self.rows.len()
    }

    pub(crate) fn pivots(&self) -> usize {
        self.simplex.pivots()
    }

    pub(crate) fn add_row(&mut self, entries: &[(usize, Rational)], relation: Relation, rhs: Rational) -> usize {
        let negated = relation == Relation::Ge;
        let (entries, rhs): (Vec<(usize, Rational)>, Rational) = if negated {
            (entries.iter().map(|(j, v)| (*j, -v.clone())).collect(), -rhs)
        } else {
            (entries.to_vec(), rhs)
        };
        let minus = (relation == Relation::Eq).then(|| {
            self.simplex
                .add_column(entries.iter().map(|(j, v)| (*j, -v.clone())).collect(), -rhs.clone())
        });
        let plus = self.simplex.add_column(entries, rhs);
        self.rows.push(RowColumns { plus, minus, negated });
        self.rows.len() - 1
    }

    fn row_value(&self, row: RowColumns, z: impl Fn(usize) -> Rational) -> Rational {
        let mut v = z(row.plus);
        if let Some(m) = row.minus {
            v -= z(m);
        }
        if row.negated {
            -v
        } else {
            v
        }
    }

    /// Installs an exactly verified optimal basis found by a float solve, if any.
    pub(crate) fn crash(&mut self) -> bool {
        self.simplex.crash()
    }

    pub(crate) fn solve(&mut self) -> IncrementalOutcome {
        match self.simplex.solve() {
            Outcome::Optimal => IncrementalOutcome::Optimal,
            Outcome::Infeasible => IncrementalOutcome::DualInfeasible(self.simplex.multipliers()),
            Outcome::Unbounded { column, direction } => {
                let mut dz = vec![Rational::zero(); self.simplex.columns()];
                dz[column] = Rational::from_integer(1.into());
                for (j, d) in direction {
                    dz[j] = d;
                }
                let farkas = self.rows.iter().map(|r| self.row_value(*r, |j| dz[j].clone())).collect();
                IncrementalOutcome::Infeasible(farkas)
            }
        }
    }

    /// Primal point after an optimal solve.
    pub(crate) fn primal(&self) -> Vec<Rational> {
        self.simplex.multipliers()
    }

    /// Dual value of a row after an optimal solve (`≥` rows reported ≤ 0).
    pub(crate) fn dual(&self, row: usize) -> Rational {
        self.row_value(self.rows[row], |j| self.simplex.value(j))
    }

    pub(crate) fn objective(&self) -> Rational {
        self.simplex.objective()
    }
}

enum Origin {
    Row(usize),
    Lower(usize),
    Upper(usize),
}

fn sparse(coeffs: &[Rational]) -> Vec<(usize, Rational)> {
    coeffs
        .iter()
        .enumerate()
        .filter(|(_, v)| !v.is_zero())
        .map(|(j, v)| (j, v.clone()))
        .collect()
}

fn build(lp: &LinearProgram, objective: Vec<Rational>) -> (IncrementalLp, Vec<Origin>) {
    let mut inc = IncrementalLp::maximize(objective);
    let mut origins = Vec::new();
    for (i, r) in lp.rows.iter().enumerate() {
        inc.add_row(&sparse(&r.coeffs), r.relation, r.rhs.clone());
        origins.push(Origin::Row(i));
    }
    let one = Rational::from_integer(1.into());
    for (j, b) in lp.bounds.iter().enumerate() {
        match (&b.lower, &b.upper) {
            (Some(l), Some(u)) if l == u => {
                inc.add_row(&[(j, one.clone())], Relation::Eq, l.clone());
                origins.push(Origin::Lower(j));
            }
            (lower, upper) => {
                if let Some(l) = lower {
                    inc.add_row(&[(j, one.clone())], Relation::Ge, l.clone());
                    origins.push(Origin::Lower(j));
                }
                if let Some(u) = upper {
                    inc.add_row(&[(j, one.clone())], Relation::Le, u.clone());
                    origins.push(Origin::Upper(j));
                }
            }
        }
    }
    (inc, origins)
}

fn split(lp: &LinearProgram, origins: &[Origin], values: &[Rational], scale: &Rational) -> (Vec<Rational>, Vec<Rational>) {
    let mut rows = vec![Rational::zero(); lp.rows.len()];
    let mut bounds = vec![Rational::zero(); lp.num_vars()];
    for (o, v) in origins.iter().zip(values) {
        let v = v * scale;
        match o {
            Origin::Row(i) => rows[*i] += v,
            Origin::Lower(j) | Origin::Upper(j) => bounds[*j] += v,
        }
    }
    (rows, bounds)
}

/// Solves a general LP exactly.
pub fn solve(lp: &LinearProgram) -> Result<LpSolution> {
    lp.validate()?;
    let n = lp.num_vars();
    let (sign, objective): (Rational, Vec<Rational>) = match lp.sense {
        Sense::Maximize => (Rational::from_integer(1.into()), lp.objective.clone()),
        Sense::Minimize => (Rational::from_integer((-1).into()), lp.objective.iter().map(|c| -c).collect()),
    };
    let (mut inc, origins) = build(lp, objective);
    let one = Rational::from_integer(1.into());
    inc.crash();
    match inc.solve() {
        IncrementalOutcome::Optimal => {
            let primal = inc.primal();
            let duals: Vec<Rational> = (0..inc.num_rows()).map(|k| inc.dual(k)).collect();
            let (dual, bound_dual) = split(lp, &origins, &duals, &sign);
            let objective_value = lp.objective.iter().zip(&primal).map(|(c, x)| c * x).sum();
            Ok(LpSolution {
                status: LpStatus::Optimal,
                primal,
                dual,
                bound_dual,
                objective_value: Some(objective_value),
                certificate: None,
            })
        }
        IncrementalOutcome::Infeasible(farkas) => Ok(infeasible(lp, &origins, &farkas, &one)),
        IncrementalOutcome::DualInfeasible(ray) => {
            let (mut feas, origins) = build(lp, vec![Rational::zero(); n]);
            match feas.solve() {
                IncrementalOutcome::Infeasible(farkas) => Ok(infeasible(lp, &origins, &farkas, &one)),
                IncrementalOutcome::Optimal => Ok(LpSolution {
                    status: LpStatus::Unbounded,
                    primal: feas.primal(),
                    dual: Vec::new(),
                    bound_dual: Vec::new(),
                    objective_value: None,
                    certificate: Some(Certificate::Ray(ray)),
                }),
                IncrementalOutcome::DualInfeasible(_) => Err(Error::Internal(
                    "feasibility LP with zero objective reported dual infeasibility".into(),
                )),
            }
        }
    }
}

fn infeasible(lp: &LinearProgram, origins: &[Origin], farkas: &[Rational], one: &Rational) -> LpSolution {
    let (rows, bounds) = split(lp, origins, farkas, one);
    LpSolution {
        status: LpStatus::Infeasible,
        primal: Vec::new(),
        dual: Vec::new(),
        bound_dual: Vec::new(),
        objective_value: None,
        certificate: Some(Certificate::Farkas { rows, bounds }),
    }
}
