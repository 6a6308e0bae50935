//! Dense two-phase simplex for `min c.x  s.t.  A x = b, x >= 0`.
//!
//! Pricing is Dantzig's (most negative reduced cost). After a run of
//! degenerate pivots the solver switches to Bland's rule (lowest eligible
//! index enters, lowest basic index leaves on ratio ties), which rules out
//! cycling. Pivoting runs on a slightly perturbed right-hand side while
//! the exact one is carried along and reported. All choices are
//! deterministic, so the returned vertex is a function of the input alone.

use crate::error::{Error, Result};

/// Feasibility and optimality tolerance.
pub const LP_TOL: f64 = 1e-9;

/// Scale of the rhs offsets used against degeneracy.
const PERTURBATION: f64 = 1e-7;
const GOLDEN: f64 = 0.618_033_988_749_894_8;

/// Consecutive degenerate pivots before switching to Bland's rule.
const BLAND_AFTER: usize = 50;

#[derive(Clone, Debug)]
pub struct LinearProgram {
    /// Row-major `m x n` constraint matrix.
    pub a: Vec<Vec<f64>>,
    pub b: Vec<f64>,
    pub c: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LpSolution {
    pub x: Vec<f64>,
    pub objective: f64,
    pub iterations: usize,
}

struct Tableau {
    /// Each row holds the `cols` coefficients, the perturbed rhs that
    /// drives pivoting, and the exact rhs.
    rows: Vec<Vec<f64>>,
    basis: Vec<usize>,
    cols: usize,
    iterations: usize,
}

impl Tableau {
    /// Resets the working rhs to the exact basic solution plus distinct
    /// tiny offsets, which removes primal degeneracy while keeping the
    /// current basis feasible.
    fn perturb(&mut self) {
        let cols = self.cols;
        for (i, row) in self.rows.iter_mut().enumerate() {
            row[cols + 1] = row[cols + 1].max(0.0);
            row[cols] = row[cols + 1] + PERTURBATION * (1.0 + (i as f64 * GOLDEN).fract());
        }
    }

    fn pivot(&mut self, obj: &mut [f64], r: usize, c: usize) {
        let p = self.rows[r][c];
        for v in self.rows[r].iter_mut() {
            *v /= p;
        }
        let pivot_row = self.rows[r].clone();
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i == r {
                continue;
            }
            let f = row[c];
            if f != 0.0 {
                for (v, pv) in row.iter_mut().zip(&pivot_row) {
                    *v -= f * pv;
                }
                row[c] = 0.0;
            }
        }
        let f = obj[c];
        if f != 0.0 {
            for (v, pv) in obj.iter_mut().zip(&pivot_row) {
                *v -= f * pv;
            }
            obj[c] = 0.0;
        }
        self.basis[r] = c;
        self.iterations += 1;
    }

    /// Runs simplex iterations on reduced costs `obj` until optimal.
    /// Only columns below `allowed` may enter.
    fn optimize(&mut self, obj: &mut [f64], allowed: usize) -> Result<()> {
        let limit = 50 * (self.cols + self.rows.len()).max(100);
        let mut degenerate_run = 0;
        loop {
            if self.iterations > limit {
                return Err(Error::Numerical("simplex iteration limit reached".into()));
            }
            let bland = degenerate_run >= BLAND_AFTER;
            let enter = if bland {
                (0..allowed).find(|&j| obj[j] < -LP_TOL)
            } else {
                (0..allowed)
                    .filter(|&j| obj[j] < -LP_TOL)
                    .fold(None, |best: Option<usize>, j| match best {
                        Some(b) if obj[b] <= obj[j] => Some(b),
                        _ => Some(j),
                    })
            };
            let Some(enter) = enter else {
                return Ok(());
            };
            let mut leave: Option<(usize, f64)> = None;
            for (r, row) in self.rows.iter().enumerate() {
                let a = row[enter];
                if a <= LP_TOL {
                    continue;
                }
                let ratio = row[self.cols] / a;
                leave = match leave {
                    None => Some((r, ratio)),
                    Some((lr, best)) => {
                        let tie = ratio <= best + LP_TOL;
                        let better_tie = if bland {
                            self.basis[r] < self.basis[lr]
                        } else {
                            a > self.rows[lr][enter]
                        };
                        if ratio < best - LP_TOL || (tie && better_tie) {
                            Some((r, ratio))
                        } else {
                            Some((lr, best))
                        }
                    }
                };
            }
            let Some((r, ratio)) = leave else {
                return Err(Error::Numerical("linear program is unbounded".into()));
            };
            if ratio <= LP_TOL {
                degenerate_run += 1;
            } else {
                degenerate_run = 0;
            }
            self.pivot(obj, r, enter);
        }
    }
}

impl LinearProgram {
    pub fn new(a: Vec<Vec<f64>>, b: Vec<f64>, c: Vec<f64>) -> Result<Self> {
        if a.len() != b.len() || a.iter().any(|row| row.len() != c.len()) {
            return Err(Error::InvalidArgument(
                "inconsistent linear program dimensions".into(),
            ));
        }
        Ok(Self { a, b, c })
    }

    pub fn solve(&self) -> Result<LpSolution> {
        let m = self.b.len();
        let n = self.c.len();
        let cols = n + m;
        let mut rows = Vec::with_capacity(m);
        for (i, (arow, &bi)) in self.a.iter().zip(&self.b).enumerate() {
            let s = if bi < 0.0 { -1.0 } else { 1.0 };
            let mut row = Vec::with_capacity(cols + 2);
            row.extend(arow.iter().map(|v| s * v));
            row.extend((0..m).map(|j| if j == i { 1.0 } else { 0.0 }));
            row.push(0.0);
            row.push(s * bi);
            rows.push(row);
        }
        let mut tab = Tableau {
            rows,
            basis: (n..cols).collect(),
            cols,
            iterations: 0,
        };

        // phase 1: minimize the sum of artificials
        tab.perturb();
        let mut obj = vec![0.0; cols + 2];
        for row in &tab.rows {
            for (o, v) in obj.iter_mut().zip(row).take(n) {
                *o -= v;
            }
            obj[cols] -= row[cols];
            obj[cols + 1] -= row[cols + 1];
        }
        tab.optimize(&mut obj, n)?;
        let residual: f64 = tab
            .rows
            .iter()
            .zip(&tab.basis)
            .filter(|(_, &k)| k >= n)
            .map(|(row, _)| row[cols + 1])
            .sum();
        let scale = 1.0 + self.b.iter().map(|v| v.abs()).sum::<f64>();
        if residual > LP_TOL * scale {
            return Err(Error::Numerical(format!(
                "linear program is infeasible (residual {residual:e})"
            )));
        }

        // drive zero-level artificials out; drop redundant rows
        let mut r = 0;
        while r < tab.rows.len() {
            if tab.basis[r] >= n {
                match (0..n).find(|&j| tab.rows[r][j].abs() > LP_TOL) {
                    Some(j) => tab.pivot(&mut obj, r, j),
                    None => {
                        tab.rows.remove(r);
                        tab.basis.remove(r);
                        continue;
                    }
                }
            }
            r += 1;
        }

        // phase 2
        tab.perturb();
        let mut obj = vec![0.0; cols + 2];
        obj[..n].copy_from_slice(&self.c);
        for (row, &k) in tab.rows.iter().zip(&tab.basis) {
            let ck = self.c[k];
            if ck != 0.0 {
                for (v, rv) in obj.iter_mut().zip(row) {
                    *v -= ck * rv;
                }
            }
        }
        tab.optimize(&mut obj, n)?;

        let mut x = vec![0.0; n];
        for (row, &k) in tab.rows.iter().zip(&tab.basis) {
            x[k] = row[cols + 1].max(0.0);
        }
        let objective = x.iter().zip(&self.c).map(|(a, b)| a * b).sum();
        Ok(LpSolution {
            x,
            objective,
            iterations: tab.iterations,
        })
    }
}
