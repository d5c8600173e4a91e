//! Dense tableau simplex for `min c.x  s.t.  A x <= b, x >= 0` with `b >= 0`,
//! so the all-slack basis is feasible and no phase one is needed.

const PIVOT_TOL: f64 = 1e-12;

/// Switch from Dantzig pricing to Bland's rule after this many pivots.
const BLAND_AFTER: usize = 64;
const MAX_PIVOTS: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LpOutcome {
    Optimal(f64),
    Unbounded,
    IterationLimit,
}

/// Row-major constraint matrix with `cols` structural variables.
pub struct LinearProgram {
    pub cols: usize,
    pub objective: Vec<f64>,
    pub rows: Vec<f64>,
    pub rhs: Vec<f64>,
}

impl LinearProgram {
    pub fn new(cols: usize, objective: Vec<f64>) -> Self {
        debug_assert_eq!(objective.len(), cols);
        Self {
            cols,
            objective,
            rows: Vec::new(),
            rhs: Vec::new(),
        }
    }

    /// Adds `row . x <= rhs`. `rhs` must be non-negative.
    pub fn push_le(&mut self, row: &[f64], rhs: f64) {
        debug_assert_eq!(row.len(), self.cols);
        debug_assert!(rhs >= 0.0, "rhs must be non-negative, got {rhs}");
        self.rows.extend_from_slice(row);
        self.rhs.push(rhs.max(0.0));
    }

    pub fn row_count(&self) -> usize {
        self.rhs.len()
    }

    pub fn minimize(&self) -> LpOutcome {
        self.run(false).0
    }

    /// Optimal value and a minimizing point, when the optimum exists.
    pub fn minimize_with_point(&self) -> Option<(f64, Vec<f64>)> {
        match self.run(true) {
            (LpOutcome::Optimal(v), Some(x)) => Some((v, x)),
            _ => None,
        }
    }

    fn run(&self, want_point: bool) -> (LpOutcome, Option<Vec<f64>>) {
        let m = self.row_count();
        let n = self.cols;
        let width = n + m + 1;
        // tableau rows 0..m are constraints, row m is the reduced cost row
        let mut t = vec![0.0; (m + 1) * width];
        let mut basis: Vec<usize> = (n..n + m).collect();
        for i in 0..m {
            let row = &mut t[i * width..(i + 1) * width];
            row[..n].copy_from_slice(&self.rows[i * n..(i + 1) * n]);
            row[n + i] = 1.0;
            row[width - 1] = self.rhs[i];
        }
        t[m * width..m * width + n].copy_from_slice(&self.objective);

        for iter in 0..MAX_PIVOTS {
            let obj = &t[m * width..(m + 1) * width - 1];
            let entering = if iter < BLAND_AFTER {
                let mut best = None;
                let mut best_val = -1e-10;
                for (j, &v) in obj.iter().enumerate() {
                    if v < best_val {
                        best_val = v;
                        best = Some(j);
                    }
                }
                best
            } else {
                obj.iter().position(|&v| v < -1e-10)
            };
            let Some(e) = entering else {
                let value = -t[(m + 1) * width - 1];
                let point = want_point.then(|| {
                    let mut x = vec![0.0; n];
                    for (i, &bv) in basis.iter().enumerate() {
                        if bv < n {
                            x[bv] = t[i * width + width - 1];
                        }
                    }
                    x
                });
                return (LpOutcome::Optimal(value), point);
            };

            let mut leave = None;
            let mut best_ratio = f64::INFINITY;
            for i in 0..m {
                let a = t[i * width + e];
                if a > PIVOT_TOL {
                    let ratio = t[i * width + width - 1] / a;
                    let better = match leave {
                        None => true,
                        Some(l) => {
                            ratio < best_ratio - 1e-15
                                || (ratio <= best_ratio + 1e-15 && basis[i] < basis[l])
                        }
                    };
                    if better {
                        best_ratio = ratio;
                        leave = Some(i);
                    }
                }
            }
            let Some(p) = leave else {
                return (LpOutcome::Unbounded, None);
            };

            let inv = 1.0 / t[p * width + e];
            for v in &mut t[p * width..(p + 1) * width] {
                *v *= inv;
            }
            let (before, rest) = t.split_at_mut(p * width);
            let (pivot_row, after) = rest.split_at_mut(width);
            for row in before
                .chunks_exact_mut(width)
                .chain(after.chunks_exact_mut(width))
            {
                let f = row[e];
                if f != 0.0 {
                    for (v, &pv) in row.iter_mut().zip(pivot_row.iter()) {
                        *v -= f * pv;
                    }
                }
            }
            basis[p] = e;
        }
        (LpOutcome::IterationLimit, None)
    }
}
