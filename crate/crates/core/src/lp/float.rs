//! Dense floating-point tableau simplex used only to guess an optimal basis.
//!
//! The result is never trusted: the exact solver re-derives the basic
//! solution and multipliers in rational arithmetic and checks optimality.

const PIVOT_TOL: f64 = 1e-9;
const PRICE_TOL: f64 = 1e-9;

struct Tableau {
    m: usize,
    width: usize,
    /// Row-major, `m` rows of `width` entries followed by the rhs.
    t: Vec<f64>,
    basis: Vec<usize>,
}

impl Tableau {
    fn row(&self, i: usize) -> &[f64] {
        let w = self.width + 1;
        &self.t[i * w..(i + 1) * w]
    }

    fn pivot(&mut self, r: usize, q: usize, d: &mut [f64], obj: &mut f64) {
        let w = self.width + 1;
        let inv = 1.0 / self.t[r * w + q];
        for v in &mut self.t[r * w..(r + 1) * w] {
            *v *= inv;
        }
        self.t[r * w + q] = 1.0;
        let pivot_row = self.row(r).to_vec();
        for i in 0..self.m {
            if i == r {
                continue;
            }
            let f = self.t[i * w + q];
            if f == 0.0 {
                continue;
            }
            let row = &mut self.t[i * w..(i + 1) * w];
            for (v, p) in row.iter_mut().zip(&pivot_row) {
                if *p != 0.0 {
                    *v -= f * p;
                }
            }
            row[q] = 0.0;
        }
        let f = d[q];
        if f != 0.0 {
            for (v, p) in d.iter_mut().zip(&pivot_row[..self.width]) {
                *v -= f * p;
            }
            d[q] = 0.0;
            *obj -= f * pivot_row[self.width];
        }
        self.basis[r] = q;
    }

    /// Minimizes with reduced costs `d`; columns at or beyond `allowed` never
    /// enter. Returns false on unboundedness or when the pivot limit is hit.
    fn run(&mut self, d: &mut [f64], obj: &mut f64, allowed: usize, limit: usize) -> bool {
        let w = self.width + 1;
        let mut stall = 0usize;
        for _ in 0..limit {
            let bland = stall > 50;
            let mut q = None;
            let mut best = -PRICE_TOL;
            for (j, &dj) in d[..allowed].iter().enumerate() {
                if dj < best {
                    q = Some(j);
                    if bland {
                        break;
                    }
                    best = dj;
                }
            }
            let Some(q) = q else {
                return true;
            };
            let mut leave: Option<(usize, f64, f64)> = None;
            for i in 0..self.m {
                let a = self.t[i * w + q];
                if a <= PIVOT_TOL {
                    continue;
                }
                let ratio = self.t[i * w + self.width].max(0.0) / a;
                let better = match leave {
                    None => true,
                    Some((li, lr, la)) => {
                        ratio < lr - 1e-12
                            || (ratio <= lr + 1e-12
                                && if bland { self.basis[i] < self.basis[li] } else { a > la })
                    }
                };
                if better {
                    leave = Some((i, ratio, a));
                }
            }
            let Some((r, ratio, _)) = leave else {
                return false;
            };
            stall = if ratio <= 1e-12 { stall + 1 } else { 0 };
            self.pivot(r, q, d, obj);
        }
        false
    }
}

/// Returns the basic column of every row for `min cᵀx, Ax = b, x ≥ 0` with
/// `b ≥ 0`, or `None` when the float solve does not reach a clean optimum.
pub(crate) fn optimal_basis(b: &[f64], cols: &[Vec<(usize, f64)>], cost: &[f64]) -> Option<Vec<usize>> {
    let m = b.len();
    let n = cols.len();
    let width = n + m;
    let w = width + 1;
    let mut t = vec![0.0; m * w];
    for (j, col) in cols.iter().enumerate() {
        for &(i, v) in col {
            t[i * w + j] = v;
        }
    }
    for i in 0..m {
        t[i * w + n + i] = 1.0;
        t[i * w + width] = b[i];
    }
    let mut tab = Tableau {
        m,
        width,
        t,
        basis: (n..n + m).collect(),
    };
    let limit = 50 * (m + n) + 1000;

    // Phase one: minimize the sum of artificials.
    let mut d = vec![0.0; width];
    let mut obj = 0.0;
    for i in 0..m {
        let row = tab.row(i);
        for j in 0..n {
            d[j] -= row[j];
        }
        obj -= row[width];
    }
    if !tab.run(&mut d, &mut obj, n, limit) {
        return None;
    }
    let scale = 1.0 + b.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    if -obj > 1e-7 * scale {
        return None;
    }
    for r in 0..m {
        if tab.basis[r] < n {
            continue;
        }
        let row = tab.row(r);
        let q = (0..n)
            .filter(|j| !tab.basis.contains(j))
            .max_by(|&a, &b| row[a].abs().total_cmp(&row[b].abs()))?;
        if tab.row(r)[q].abs() <= 1e-7 {
            return None;
        }
        tab.pivot(r, q, &mut d, &mut obj);
    }

    // Phase two.
    let mut d: Vec<f64> = cost.iter().copied().chain(std::iter::repeat(0.0).take(m)).collect();
    let mut obj = 0.0;
    for i in 0..m {
        let cb = cost[tab.basis[i]];
        if cb == 0.0 {
            continue;
        }
        let row = tab.row(i);
        for j in 0..width {
            d[j] -= cb * row[j];
        }
        obj -= cb * row[width];
    }
    if !tab.run(&mut d, &mut obj, n, limit) {
        return None;
    }
    Some(tab.basis)
}
