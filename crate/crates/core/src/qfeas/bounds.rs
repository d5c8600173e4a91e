//! Lower bounds of a quadratic over a rectangle, one method per form.

use super::simplex::{LinearProgram, LpOutcome};
use super::{Form, QuadConstraint, Rect, MAX_DIM};

/// A value no larger than the minimum of `c` over `r`.
///
/// Exact for linear, bilinear, diagonal and single-cross forms; an RLT
/// relaxation bound for general quadratics.
pub fn lower_bound(c: &QuadConstraint, r: &Rect) -> f64 {
    match c.form() {
        Form::Linear => linear_min(c, r),
        Form::Bilinear => corner_min(c, r),
        Form::DiagonalQuadratic => separable_min(c, r),
        Form::SingleCross => single_cross_min(c, r),
        Form::General => rlt_bound(c, r),
    }
}

fn linear_min(c: &QuadConstraint, r: &Rect) -> f64 {
    let mut v = c.c;
    for i in 0..c.dim {
        v += (c.b[i] * r.lower[i]).min(c.b[i] * r.upper[i]);
    }
    v
}

/// Multilinear functions attain their extremes at corners.
fn corner_min(c: &QuadConstraint, r: &Rect) -> f64 {
    let mut best = f64::INFINITY;
    let mut x = [0.0; MAX_DIM];
    for mask in 0..(1u32 << c.dim) {
        for (i, xi) in x.iter_mut().enumerate().take(c.dim) {
            *xi = if mask & (1 << i) != 0 {
                r.upper[i]
            } else {
                r.lower[i]
            };
        }
        best = best.min(c.eval(&x[..c.dim]));
    }
    best
}

/// Minimum of `a t^2 + b t` on `[lo, hi]`.
fn quad_1d_min(a: f64, b: f64, lo: f64, hi: f64) -> f64 {
    let f = |t: f64| a * t * t + b * t;
    let mut m = f(lo).min(f(hi));
    if a > 0.0 {
        let t = -b / (2.0 * a);
        if t > lo && t < hi {
            m = m.min(f(t));
        }
    }
    m
}

fn separable_min(c: &QuadConstraint, r: &Rect) -> f64 {
    let mut v = c.c;
    for i in 0..c.dim {
        v += quad_1d_min(c.a[i][i], c.b[i], r.lower[i], r.upper[i]);
    }
    v
}

/// One squared variable `k`: for every corner of the remaining variables the
/// function is a 1-D quadratic in `x_k`, and for fixed `x_k` it is multilinear
/// in the rest.
fn single_cross_min(c: &QuadConstraint, r: &Rect) -> f64 {
    let k = (0..c.dim)
        .find(|&i| c.a[i][i] != 0.0)
        .expect("single-cross form has one squared term");
    let others: Vec<usize> = (0..c.dim).filter(|&i| i != k).collect();
    let mut best = f64::INFINITY;
    let mut x = [0.0; MAX_DIM];
    for mask in 0..(1u32 << others.len()) {
        for (bit, &i) in others.iter().enumerate() {
            x[i] = if mask & (1 << bit) != 0 {
                r.upper[i]
            } else {
                r.lower[i]
            };
        }
        x[k] = 0.0;
        let rest = c.eval(&x[..c.dim]);
        let mut lin = c.b[k];
        for &j in &others {
            lin += 2.0 * c.a[k][j] * x[j];
        }
        best = best.min(rest + quad_1d_min(c.a[k][k], lin, r.lower[k], r.upper[k]));
    }
    best
}

/// A constraint rewritten in `z = x - lower`: `z^T a z + z_coef . z + c`.
struct Linearized<'a> {
    a: &'a [[f64; MAX_DIM]; MAX_DIM],
    z: [f64; MAX_DIM],
    c: f64,
    scale: f64,
}

impl Linearized<'_> {
    /// Coefficient of the product column `w_km`, `k <= m`.
    fn w(&self, k: usize, m: usize) -> f64 {
        if k == m {
            self.a[k][k]
        } else {
            2.0 * self.a[k][m]
        }
    }
}

fn linearize<'a>(c: &'a QuadConstraint, r: &Rect) -> Linearized<'a> {
    let n = c.dim;
    let l = &r.lower;
    let mut out = Linearized {
        a: &c.a,
        z: [0.0; MAX_DIM],
        c: c.c,
        scale: 0.0,
    };
    // b~ = 2 A l + b,  c~ = l'A l + b'l + c
    for i in 0..n {
        let mut al = 0.0;
        for j in 0..n {
            al += c.a[i][j] * l[j];
        }
        out.z[i] = 2.0 * al + c.b[i];
        out.c += l[i] * al + c.b[i] * l[i];
    }
    out.scale = out.c.abs();
    for i in 0..n {
        let di = r.upper[i] - r.lower[i];
        out.scale += out.z[i].abs() * di;
        for j in 0..n {
            out.scale += c.a[i][j].abs() * di * (r.upper[j] - r.lower[j]);
        }
    }
    out
}

/// Columns of an RLT program: the `n` shifted variables, then one product
/// column `w_km` per pair that some constraint actually uses.
struct Layout {
    n: usize,
    pairs: Vec<(usize, usize)>,
}

impl Layout {
    fn new(n: usize, used: impl Fn(usize, usize) -> bool) -> Self {
        let mut pairs = Vec::new();
        for k in 0..n {
            for m in k..n {
                if used(k, m) {
                    pairs.push((k, m));
                }
            }
        }
        Self { n, pairs }
    }

    fn cols(&self) -> usize {
        self.n + self.pairs.len()
    }

    /// Bound-factor product rows. Only rows containing a used product matter:
    /// the others involve `z` alone and are implied by `0 <= z <= d`.
    fn push_rows(&self, lp: &mut LinearProgram, d: &[f64; MAX_DIM]) {
        let mut row = vec![0.0; lp.cols];
        for (p, &(k, m)) in self.pairs.iter().enumerate() {
            let w = self.n + p;
            // (d_k - z_k)(d_m - z_m) >= 0  ->  d_m z_k + d_k z_m - w_km <= d_k d_m
            row.fill(0.0);
            row[k] += d[m];
            row[m] += d[k];
            row[w] = -1.0;
            lp.push_le(&row, d[k] * d[m]);
            // (d_k - z_k) z_m >= 0  ->  w_km - d_k z_m <= 0, and symmetrically
            row.fill(0.0);
            row[w] = 1.0;
            row[m] = -d[k];
            lp.push_le(&row, 0.0);
            if k != m {
                row.fill(0.0);
                row[w] = 1.0;
                row[k] = -d[m];
                lp.push_le(&row, 0.0);
            }
            // z_k z_m >= 0 is the non-negativity of w
        }
    }
}

fn widths(r: &Rect) -> [f64; MAX_DIM] {
    std::array::from_fn(|i| {
        if i < r.dim {
            r.upper[i] - r.lower[i]
        } else {
            0.0
        }
    })
}

/// Reformulation-linearization bound.
///
/// Shift to `z = x - lower` so the box becomes `0 <= z <= d`, multiply every
/// pair of bound factors `(d_k - z_k)`, `z_k`, replace `z_k z_l` by `w_kl`, and
/// minimize the resulting linear objective.
pub(crate) fn rlt_bound(c: &QuadConstraint, r: &Rect) -> f64 {
    let n = c.dim;
    let lin = linearize(c, r);
    let layout = Layout::new(n, |k, m| c.a[k][m] != 0.0);
    let mut objective = vec![0.0; layout.cols()];
    objective[..n].copy_from_slice(&lin.z[..n]);
    for (p, &(k, m)) in layout.pairs.iter().enumerate() {
        objective[n + p] = lin.w(k, m);
    }
    let mut lp = LinearProgram::new(layout.cols(), objective);
    layout.push_rows(&mut lp, &widths(r));
    match lp.minimize() {
        LpOutcome::Optimal(v) => v + lin.c - 1e-10 * (1.0 + lin.scale),
        // the relaxation is bounded by construction; fall back to a trivially
        // valid bound if the LP solver gives up
        _ => interval_bound(c, r),
    }
}

/// Lower bound on `max_j q_j` over `r`, from one RLT relaxation shared by all
/// constraints. Non-negative means no point of `r` satisfies every
/// constraint, even when each constraint alone can be negative there.
pub fn joint_lower_bound(constraints: &[QuadConstraint], r: &Rect) -> f64 {
    let refs: Vec<&QuadConstraint> = constraints.iter().collect();
    joint_relaxation(&refs, r).map_or(f64::NEG_INFINITY, |(v, _)| v)
}

/// [`joint_lower_bound`] plus the point of `r` where the relaxation attains
/// its minimum, a good place to look for a witness.
///
/// Solved as `min t` subject to `L_j(z, w) <= t`, with `t = m - s`, `s >= 0`
/// and `m` the largest constant so every right-hand side stays non-negative.
pub(crate) fn joint_relaxation(
    constraints: &[&QuadConstraint],
    r: &Rect,
) -> Option<(f64, [f64; MAX_DIM])> {
    let n = r.dim;
    let lins: Vec<Linearized> = constraints.iter().map(|c| linearize(c, r)).collect();
    let layout = Layout::new(n, |k, m| constraints.iter().any(|c| c.a[k][m] != 0.0));
    let cols = layout.cols() + 1;
    let m = lins.iter().map(|l| l.c).fold(f64::NEG_INFINITY, f64::max);
    let scale = lins.iter().map(|l| l.scale).fold(0.0, f64::max);

    let mut objective = vec![0.0; cols];
    objective[cols - 1] = -1.0;
    let mut lp = LinearProgram::new(cols, objective);
    layout.push_rows(&mut lp, &widths(r));
    let mut row = vec![0.0; cols];
    for lin in &lins {
        // L(z, w) + c <= m - s
        row[..n].copy_from_slice(&lin.z[..n]);
        for (p, &(k, mm)) in layout.pairs.iter().enumerate() {
            row[n + p] = lin.w(k, mm);
        }
        row[cols - 1] = 1.0;
        lp.push_le(&row, m - lin.c);
    }
    let (neg_s, sol) = lp.minimize_with_point()?;
    let x = std::array::from_fn(|i| {
        if i < n {
            (r.lower[i] + sol[i]).clamp(r.lower[i], r.upper[i])
        } else {
            0.0
        }
    });
    Some((m + neg_s - 1e-10 * (1.0 + scale), x))
}

/// Shrinks `r` using the linear constraints: from `b.x + c < 0`, each `x_i`
/// is bounded by what the other terms can contribute. Returns false when the
/// box becomes empty. Only points violating some constraint are removed.
pub fn contract_linear(constraints: &[QuadConstraint], r: &mut Rect) -> bool {
    for _ in 0..2 {
        let mut changed = false;
        for c in constraints.iter().filter(|c| c.form() == Form::Linear) {
            let mins: [f64; MAX_DIM] = std::array::from_fn(|j| {
                if j < r.dim {
                    (c.b[j] * r.lower[j]).min(c.b[j] * r.upper[j])
                } else {
                    0.0
                }
            });
            let total: f64 = c.c + mins.iter().sum::<f64>();
            for i in 0..r.dim {
                let bi = c.b[i];
                if bi == 0.0 {
                    continue;
                }
                // b_i x_i < -(c + sum of other minima)
                let limit = (mins[i] - total) / bi;
                if bi > 0.0 && limit < r.upper[i] {
                    r.upper[i] = limit;
                    changed = true;
                } else if bi < 0.0 && limit > r.lower[i] {
                    r.lower[i] = limit;
                    changed = true;
                }
                if !(r.lower[i] < r.upper[i]) {
                    return false;
                }
            }
        }
        if !changed {
            break;
        }
    }
    true
}

/// Term-by-term interval bound, always valid and always weaker than RLT.
pub(crate) fn interval_bound(c: &QuadConstraint, r: &Rect) -> f64 {
    let n = c.dim;
    let mut v = linear_min(c, r);
    for i in 0..n {
        for j in 0..n {
            let a = c.a[i][j];
            if a == 0.0 {
                continue;
            }
            let cands = [
                r.lower[i] * r.lower[j],
                r.lower[i] * r.upper[j],
                r.upper[i] * r.lower[j],
                r.upper[i] * r.upper[j],
            ];
            let mut lo = cands.iter().map(|p| a * p).fold(f64::INFINITY, f64::min);
            if i == j && r.lower[i] < 0.0 && r.upper[i] > 0.0 && a > 0.0 {
                lo = lo.min(0.0);
            }
            v += lo;
        }
    }
    v
}
