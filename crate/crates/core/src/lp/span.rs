//! Exact span tracking for coalition incidence vectors.

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::game::rational::serde_vec;
use crate::game::{Coalition, Rational};
use crate::{Error, Result};

/// Rows of a matrix in reduced row echelon form.
///
/// Each row has a leading 1 in its pivot column and every other row is zero
/// in that column.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpanBasis {
    dim: usize,
    rows: Vec<BasisRow>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
struct BasisRow {
    pivot: usize,
    #[serde(with = "serde_vec")]
    coeffs: Vec<Rational>,
}

impl SpanBasis {
    /// The trivial subspace `{0}` of `ℝ^dim`.
    pub fn new(dim: usize) -> Self {
        SpanBasis { dim, rows: Vec::new() }
    }

    /// Basis of the span of the given coalitions.
    pub fn from_coalitions<'a>(dim: usize, coalitions: impl IntoIterator<Item = &'a Coalition>) -> Result<Self> {
        let mut b = SpanBasis::new(dim);
        for s in coalitions {
            b.insert_coalition(*s)?;
        }
        Ok(b)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn is_full(&self) -> bool {
        self.rank() == self.dim
    }

    /// Rows of the reduced basis.
    pub fn rows(&self) -> impl Iterator<Item = &[Rational]> {
        self.rows.iter().map(|r| r.coeffs.as_slice())
    }

    pub fn pivots(&self) -> Vec<usize> {
        self.rows.iter().map(|r| r.pivot).collect()
    }

    fn check_coalition(&self, s: Coalition) -> Result<()> {
        if s.fits(self.dim) {
            Ok(())
        } else {
            Err(Error::InvalidInput(format!("coalition {s} exceeds dimension {}", self.dim)))
        }
    }

    fn check_vector(&self, v: &[Rational]) -> Result<()> {
        if v.len() == self.dim {
            Ok(())
        } else {
            Err(Error::InvalidInput(format!("vector of length {} in dimension {}", v.len(), self.dim)))
        }
    }

    /// Residual of `v` after eliminating the pivot columns.
    fn residual(&self, v: &[Rational]) -> Vec<Rational> {
        let mut r = v.to_vec();
        for row in &self.rows {
            let f = r[row.pivot].clone();
            if f.is_zero() {
                continue;
            }
            for (x, a) in r.iter_mut().zip(&row.coeffs) {
                if !a.is_zero() {
                    *x -= &f * a;
                }
            }
        }
        r
    }

    pub fn contains_vector(&self, v: &[Rational]) -> Result<bool> {
        self.check_vector(v)?;
        Ok(self.residual(v).iter().all(Zero::is_zero))
    }

    /// Whether the incidence vector of `s` lies in the span.
    pub fn contains(&self, s: Coalition) -> Result<bool> {
        self.check_coalition(s)?;
        Ok(self.contains_sorted(&s.members().collect::<Vec<_>>()))
    }

    /// Whether the incidence vector of a member list lies in the span.
    pub fn contains_members(&self, members: &[usize]) -> Result<bool> {
        let mut sorted = members.to_vec();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.last().is_some_and(|&p| p >= self.dim) {
            return Err(Error::InvalidInput(format!("member outside dimension {}", self.dim)));
        }
        Ok(self.contains_sorted(&sorted))
    }

    fn contains_sorted(&self, members: &[usize]) -> bool {
        if members.is_empty() || self.is_full() {
            return true;
        }
        let mut pivot_of = vec![None; self.dim];
        for (i, row) in self.rows.iter().enumerate() {
            pivot_of[row.pivot] = Some(i);
        }
        // Only non-pivot coordinates of the residual can be nonzero.
        let active: Vec<&BasisRow> = members.iter().filter_map(|&j| pivot_of[j]).map(|i| &self.rows[i]).collect();
        let mut next = members.iter().peekable();
        for j in 0..self.dim {
            let member = next.next_if(|&&p| p == j).is_some();
            if pivot_of[j].is_some() {
                continue;
            }
            let mut x = if member { Rational::one() } else { Rational::zero() };
            for row in &active {
                x -= &row.coeffs[j];
            }
            if !x.is_zero() {
                return false;
            }
        }
        true
    }

    /// Adds `v` if it is independent; returns whether the rank grew.
    pub fn insert_vector(&mut self, v: &[Rational]) -> Result<bool> {
        self.check_vector(v)?;
        let mut r = self.residual(v);
        let Some(pivot) = r.iter().position(|x| !x.is_zero()) else {
            return Ok(false);
        };
        let lead = r[pivot].clone();
        for x in r.iter_mut() {
            *x /= &lead;
        }
        for row in &mut self.rows {
            let f = row.coeffs[pivot].clone();
            if f.is_zero() {
                continue;
            }
            for (x, a) in row.coeffs.iter_mut().zip(&r) {
                if !a.is_zero() {
                    *x -= &f * a;
                }
            }
        }
        let at = self.rows.partition_point(|row| row.pivot < pivot);
        self.rows.insert(at, BasisRow { pivot, coeffs: r });
        Ok(true)
    }

    pub fn insert_members(&mut self, members: &[usize]) -> Result<bool> {
        let mut v = vec![Rational::zero(); self.dim];
        for &p in members {
            if p >= self.dim {
                return Err(Error::InvalidInput(format!("member {p} outside dimension {}", self.dim)));
            }
            v[p] = Rational::one();
        }
        self.insert_vector(&v)
    }

    pub fn insert_coalition(&mut self, s: Coalition) -> Result<bool> {
        self.check_coalition(s)?;
        self.insert_vector(&incidence(self.dim, s))
    }
}

/// 0/1 incidence vector of `s` in `ℝ^dim`.
pub fn incidence(dim: usize, s: Coalition) -> Vec<Rational> {
    (0..dim)
        .map(|j| if s.contains(j) { Rational::one() } else { Rational::zero() })
        .collect()
}

pub fn in_span(basis: &SpanBasis, s: Coalition) -> Result<bool> {
    basis.contains(s)
}

/// Returns the extended basis and whether `s` was independent of it.
pub fn extend_basis(basis: &SpanBasis, s: Coalition) -> Result<(SpanBasis, bool)> {
    let mut b = basis.clone();
    let grew = b.insert_coalition(s)?;
    Ok((b, grew))
}
