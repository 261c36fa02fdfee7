//! Exact solves with a square sparse basis matrix.
//!
//! Columns with a single entry among the remaining rows are peeled off
//! first (bound and slack columns usually are), leaving a small dense kernel
//! that is solved by fraction-free Gaussian elimination over the integers.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};

use crate::game::Rational;

pub(crate) struct BasisFactor<'a> {
    m: usize,
    cols: Vec<&'a [(usize, Rational)]>,
    /// Entries of each row as `(position, value)`.
    row_entries: Vec<Vec<(usize, &'a Rational)>>,
    /// Peeled `(row, position)` pairs in peeling order.
    peeled: Vec<(usize, usize)>,
    kernel_rows: Vec<usize>,
    kernel_cols: Vec<usize>,
}

impl<'a> BasisFactor<'a> {
    /// Returns `None` when the columns are visibly singular.
    pub(crate) fn new(m: usize, cols: Vec<&'a [(usize, Rational)]>) -> Option<Self> {
        if cols.len() != m {
            return None;
        }
        let mut row_entries: Vec<Vec<(usize, &Rational)>> = vec![Vec::new(); m];
        for (p, col) in cols.iter().enumerate() {
            for (i, v) in col.iter() {
                if !v.is_zero() {
                    row_entries[*i].push((p, v));
                }
            }
        }
        let mut count: Vec<usize> = cols.iter().map(|c| c.iter().filter(|(_, v)| !v.is_zero()).count()).collect();
        if count.contains(&0) {
            return None;
        }
        let mut row_alive = vec![true; m];
        let mut col_alive = vec![true; m];
        let mut queue: Vec<usize> = (0..m).filter(|&p| count[p] == 1).collect();
        let mut peeled = Vec::new();
        while let Some(p) = queue.pop() {
            if !col_alive[p] || count[p] != 1 {
                continue;
            }
            let Some(r) = cols[p].iter().find(|(i, v)| row_alive[*i] && !v.is_zero()).map(|(i, _)| *i) else {
                continue;
            };
            col_alive[p] = false;
            row_alive[r] = false;
            peeled.push((r, p));
            for &(q, _) in &row_entries[r] {
                if col_alive[q] {
                    count[q] -= 1;
                    match count[q] {
                        0 => return None,
                        1 => queue.push(q),
                        _ => {}
                    }
                }
            }
        }
        let kernel_rows: Vec<usize> = (0..m).filter(|&i| row_alive[i]).collect();
        let kernel_cols: Vec<usize> = (0..m).filter(|&p| col_alive[p]).collect();
        Some(BasisFactor {
            m,
            cols,
            row_entries,
            peeled,
            kernel_rows,
            kernel_cols,
        })
    }

    /// Solves `B x = rhs` for each right-hand side; `x` is indexed by position.
    pub(crate) fn solve(&self, rhs: &[Vec<Rational>]) -> Option<Vec<Vec<Rational>>> {
        let k = self.kernel_rows.len();
        let mut col_index = vec![usize::MAX; self.m];
        for (c, &p) in self.kernel_cols.iter().enumerate() {
            col_index[p] = c;
        }
        let matrix: Vec<Vec<Rational>> = self
            .kernel_rows
            .iter()
            .map(|&i| {
                let mut row = vec![Rational::zero(); k];
                for &(p, v) in &self.row_entries[i] {
                    row[col_index[p]] = v.clone();
                }
                row
            })
            .collect();
        let kernel_rhs: Vec<Vec<Rational>> = self.kernel_rows.iter().map(|&i| rhs.iter().map(|b| b[i].clone()).collect()).collect();
        let kx = solve_dense(matrix, kernel_rhs, rhs.len())?;
        let mut out = Vec::with_capacity(rhs.len());
        for (h, b) in rhs.iter().enumerate() {
            let mut x = vec![Rational::zero(); self.m];
            for (c, &p) in self.kernel_cols.iter().enumerate() {
                x[p] = kx[c][h].clone();
            }
            for &(r, p) in self.peeled.iter().rev() {
                let mut acc = b[r].clone();
                let mut diag = None;
                for &(q, v) in &self.row_entries[r] {
                    if q == p {
                        diag = Some(v);
                    } else if !x[q].is_zero() {
                        acc -= v * &x[q];
                    }
                }
                x[p] = acc / diag?;
            }
            out.push(x);
        }
        Some(out)
    }

    /// Solves `Bᵀ y = c`; `c` is indexed by position and `y` by row.
    pub(crate) fn solve_transpose(&self, c: &[Rational]) -> Option<Vec<Rational>> {
        let mut y = vec![Rational::zero(); self.m];
        for &(r, p) in &self.peeled {
            let mut acc = c[p].clone();
            let mut diag = None;
            for (i, v) in self.cols[p].iter() {
                if *i == r {
                    diag = Some(v);
                } else if !y[*i].is_zero() {
                    acc -= v * &y[*i];
                }
            }
            y[r] = acc / diag?;
        }
        let k = self.kernel_rows.len();
        let mut row_index = vec![usize::MAX; self.m];
        for (c, &i) in self.kernel_rows.iter().enumerate() {
            row_index[i] = c;
        }
        let mut matrix = Vec::with_capacity(k);
        let mut rhs = Vec::with_capacity(k);
        for &p in &self.kernel_cols {
            let mut row = vec![Rational::zero(); k];
            let mut acc = c[p].clone();
            for (i, v) in self.cols[p].iter() {
                if row_index[*i] != usize::MAX {
                    row[row_index[*i]] = v.clone();
                } else if !y[*i].is_zero() {
                    acc -= v * &y[*i];
                }
            }
            matrix.push(row);
            rhs.push(vec![acc]);
        }
        let ky = solve_dense(matrix, rhs, 1)?;
        for (c, &i) in self.kernel_rows.iter().enumerate() {
            y[i] = ky[c][0].clone();
        }
        Some(y)
    }
}

/// Scales a rational row to integers by the lcm of its denominators.
fn integer_row(row: &[Rational], extra: &[Rational]) -> Vec<BigInt> {
    let lcm = row
        .iter()
        .chain(extra)
        .filter(|v| !v.is_zero())
        .fold(BigInt::one(), |acc, v| acc.lcm(v.denom()));
    row.iter()
        .chain(extra)
        .map(|v| if v.is_zero() { BigInt::zero() } else { v.numer() * (&lcm / v.denom()) })
        .collect()
}

/// Bareiss elimination on `[A | R]`; returns `X` with `A X = R`, or `None`
/// when `A` is singular.
fn solve_dense(a: Vec<Vec<Rational>>, r: Vec<Vec<Rational>>, h: usize) -> Option<Vec<Vec<Rational>>> {
    let n = a.len();
    let mut m: Vec<Vec<BigInt>> = a.iter().zip(&r).map(|(row, rhs)| integer_row(row, rhs)).collect();
    let w = n + h;
    let mut prev = BigInt::one();
    for k in 0..n {
        let p = (k..n).find(|&i| !m[i][k].is_zero())?;
        m.swap(k, p);
        let (top, rest) = m.split_at_mut(k + 1);
        let pivot_row = &top[k];
        let pivot = &pivot_row[k];
        for row in rest.iter_mut() {
            let f = std::mem::take(&mut row[k]);
            for j in k + 1..w {
                let mut v = pivot * &row[j];
                if !f.is_zero() && !pivot_row[j].is_zero() {
                    v -= &f * &pivot_row[j];
                }
                row[j] = if prev.is_one() { v } else { v / &prev };
            }
        }
        prev = pivot.clone();
    }
    // With `d = det`, `d·x` is integral, so back substitution stays exact.
    let det = prev;
    let mut out = vec![vec![Rational::zero(); h]; n];
    for c in 0..h {
        let mut xs: Vec<BigInt> = vec![BigInt::zero(); n];
        for i in (0..n).rev() {
            let mut acc = &det * &m[i][n + c];
            for j in i + 1..n {
                if !m[i][j].is_zero() && !xs[j].is_zero() {
                    acc -= &m[i][j] * &xs[j];
                }
            }
            xs[i] = acc / &m[i][i];
        }
        for i in 0..n {
            out[i][c] = Rational::new(std::mem::take(&mut xs[i]), det.clone());
        }
    }
    Some(out)
}
