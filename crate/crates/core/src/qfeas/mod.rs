//! Branch-and-bound feasibility for systems of strict quadratic inequalities
//! `x^T A x + b.x + c < 0` over a bounded rectangle.
//!
//! Rectangles are probed at their centre, at one seeded random point and at
//! the minimizer of a linear relaxation, and discarded as soon as one
//! constraint (or the relaxation of all of them) has a non-negative lower
//! bound on them. Survivors are split in half along their longest edge. The
//! most promising rectangle, the one with the most negative bound, is
//! processed first. The search reports infeasible once every remaining rectangle
//! has been pruned or has reached the depth cutoff.

mod bounds;
pub mod poly;
pub mod simplex;

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

pub use bounds::{contract_linear, joint_lower_bound, lower_bound};
pub use poly::{Affine, AffinePoint, Quadratic};

/// Largest supported number of variables.
pub const MAX_DIM: usize = 4;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QfeasError {
    #[error("constraint has dimension {found}, expected {expected}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("quadratic matrix is not symmetric at ({0}, {1})")]
    NotSymmetric(usize, usize),
    #[error("invalid rectangle: {0}")]
    InvalidRect(String),
    #[error("invalid solver configuration: {0}")]
    InvalidConfig(String),
    #[error("{0} constraints exceed the supported maximum")]
    TooManyConstraints(usize),
    #[error("search budget of {0} rectangles exhausted")]
    BudgetExceeded(u64),
}

/// Sparsity class of a quadratic constraint, from cheapest to most general.
#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Form {
    Linear,
    Bilinear,
    DiagonalQuadratic,
    /// Exactly one squared variable; cross terms allowed.
    SingleCross,
    General,
}

/// One strict inequality `x^T a x + b.x + c < 0` in `dim` variables.
#[derive(Clone, Debug, PartialEq)]
pub struct QuadConstraint {
    pub dim: usize,
    pub a: [[f64; MAX_DIM]; MAX_DIM],
    pub b: [f64; MAX_DIM],
    pub c: f64,
    form: Form,
}

impl QuadConstraint {
    /// `a` is row-major `dim x dim` and must be symmetric.
    pub fn new(dim: usize, a: &[f64], b: &[f64], c: f64) -> Result<Self, QfeasError> {
        if dim == 0 || dim > MAX_DIM {
            return Err(QfeasError::DimensionMismatch {
                expected: MAX_DIM,
                found: dim,
            });
        }
        if a.len() != dim * dim {
            return Err(QfeasError::DimensionMismatch {
                expected: dim * dim,
                found: a.len(),
            });
        }
        if b.len() != dim {
            return Err(QfeasError::DimensionMismatch {
                expected: dim,
                found: b.len(),
            });
        }
        let mut m = [[0.0; MAX_DIM]; MAX_DIM];
        for i in 0..dim {
            for j in 0..dim {
                m[i][j] = a[i * dim + j];
            }
        }
        let mut bv = [0.0; MAX_DIM];
        bv[..dim].copy_from_slice(b);
        Self::from_parts(dim, m, bv, c)
    }

    /// Takes the first `dim` variables of a symbolic quadratic. Coefficients
    /// on higher variables must be zero.
    pub fn from_quadratic(dim: usize, q: &Quadratic) -> Result<Self, QfeasError> {
        for i in dim..MAX_DIM {
            if q.b[i] != 0.0 || (0..MAX_DIM).any(|j| q.a[i][j] != 0.0 || q.a[j][i] != 0.0) {
                return Err(QfeasError::DimensionMismatch {
                    expected: dim,
                    found: i + 1,
                });
            }
        }
        Self::from_parts(dim, q.a, q.b, q.c)
    }

    fn from_parts(
        dim: usize,
        a: [[f64; MAX_DIM]; MAX_DIM],
        b: [f64; MAX_DIM],
        c: f64,
    ) -> Result<Self, QfeasError> {
        for i in 0..dim {
            for j in i + 1..dim {
                let tol = 1e-12 * (1.0 + a[i][j].abs().max(a[j][i].abs()));
                if (a[i][j] - a[j][i]).abs() > tol {
                    return Err(QfeasError::NotSymmetric(i, j));
                }
            }
        }
        let mut out = Self {
            dim,
            a,
            b,
            c,
            form: Form::Linear,
        };
        out.form = classify(&out);
        Ok(out)
    }

    pub fn form(&self) -> Form {
        self.form
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.dim);
        let mut v = self.c;
        for i in 0..self.dim {
            let mut row = 0.0;
            for j in 0..self.dim {
                row += self.a[i][j] * x[j];
            }
            v += x[i] * row + self.b[i] * x[i];
        }
        v
    }

    /// The same constraint with every coefficient negated and `>` turned into `<`.
    pub fn negated(&self) -> Self {
        let mut out = self.clone();
        out.a = out.a.map(|r| r.map(|v| -v));
        out.b = out.b.map(|v| -v);
        out.c = -out.c;
        out
    }
}

/// Most specific form describing the sparsity of `c.a`.
pub fn classify(c: &QuadConstraint) -> Form {
    let n = c.dim;
    let diag = (0..n).filter(|&i| c.a[i][i] != 0.0).count();
    let cross = (0..n).any(|i| (0..n).any(|j| i != j && c.a[i][j] != 0.0));
    match (diag, cross) {
        (0, false) => Form::Linear,
        (0, true) => Form::Bilinear,
        (_, false) => Form::DiagonalQuadratic,
        (1, true) => Form::SingleCross,
        _ => Form::General,
    }
}

/// Axis-aligned box `lower <= x <= upper` with its depth in the search tree.
#[derive(Clone, Debug, PartialEq)]
pub struct Rect {
    pub dim: usize,
    pub lower: [f64; MAX_DIM],
    pub upper: [f64; MAX_DIM],
    pub depth: u32,
}

impl Rect {
    pub fn new(lower: &[f64], upper: &[f64]) -> Result<Self, QfeasError> {
        let dim = lower.len();
        if dim == 0 || dim > MAX_DIM || upper.len() != dim {
            return Err(QfeasError::InvalidRect(format!(
                "{} lower vs {} upper bounds",
                dim,
                upper.len()
            )));
        }
        let mut r = Self {
            dim,
            lower: [0.0; MAX_DIM],
            upper: [0.0; MAX_DIM],
            depth: 0,
        };
        for i in 0..dim {
            if !(lower[i] < upper[i]) || !lower[i].is_finite() || !upper[i].is_finite() {
                return Err(QfeasError::InvalidRect(format!(
                    "axis {i}: [{}, {}]",
                    lower[i], upper[i]
                )));
            }
            r.lower[i] = lower[i];
            r.upper[i] = upper[i];
        }
        Ok(r)
    }

    /// Hypercube `[-half, half]^dim`.
    pub fn centered(dim: usize, half: f64) -> Result<Self, QfeasError> {
        Self::new(&vec![-half; dim], &vec![half; dim])
    }

    pub fn volume(&self) -> f64 {
        (0..self.dim)
            .map(|i| self.upper[i] - self.lower[i])
            .product()
    }

    pub fn center(&self) -> [f64; MAX_DIM] {
        std::array::from_fn(|i| {
            if i < self.dim {
                0.5 * (self.lower[i] + self.upper[i])
            } else {
                0.0
            }
        })
    }

    /// Halves along the longest edge (lowest axis on ties).
    pub fn split(&self) -> (Rect, Rect) {
        let mut axis = 0;
        for i in 1..self.dim {
            if self.upper[i] - self.lower[i] > self.upper[axis] - self.lower[axis] {
                axis = i;
            }
        }
        let mid = 0.5 * (self.lower[axis] + self.upper[axis]);
        let mut lo = self.clone();
        let mut hi = self.clone();
        lo.upper[axis] = mid;
        hi.lower[axis] = mid;
        lo.depth += 1;
        hi.depth += 1;
        (lo, hi)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolverConfig {
    pub max_depth: u32,
    pub eps_volume: f64,
    pub rng_seed: u64,
    /// Hard cap on rectangles popped; exceeding it is an error, not a FALSE.
    pub max_rectangles: u64,
    /// Also prune with one relaxation shared by all constraints.
    pub joint_relaxation: bool,
}

impl SolverConfig {
    pub fn with_depth(max_depth: u32) -> Self {
        Self {
            max_depth,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), QfeasError> {
        if self.max_depth < 1 {
            return Err(QfeasError::InvalidConfig(
                "max_depth must be at least 1".into(),
            ));
        }
        if !(self.eps_volume > 0.0) {
            return Err(QfeasError::InvalidConfig(
                "eps_volume must be positive".into(),
            ));
        }
        if self.max_rectangles == 0 {
            return Err(QfeasError::InvalidConfig(
                "max_rectangles must be positive".into(),
            ));
        }
        Ok(())
    }
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            max_depth: 30,
            eps_volume: 1e-12,
            rng_seed: 0x5eed,
            max_rectangles: 2_000_000,
            joint_relaxation: true,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FeasibilityResult {
    pub feasible: bool,
    pub witness: Option<Vec<f64>>,
    pub rectangles_explored: u64,
}

fn strictly_satisfies(constraints: &[QuadConstraint], x: &[f64]) -> bool {
    constraints.iter().all(|c| c.eval(x) < 0.0)
}

/// Most constraints a single [`solve`] call accepts.
pub const MAX_CONSTRAINTS: usize = 64;

fn found(x: &[f64], explored: u64) -> Result<FeasibilityResult, QfeasError> {
    Ok(FeasibilityResult {
        feasible: true,
        witness: Some(x.to_vec()),
        rectangles_explored: explored,
    })
}

/// A rectangle waiting to be processed, with its parent's bound.
struct Pending {
    score: f64,
    seq: u64,
    rect: Rect,
    // constraints not yet known to hold on all of `rect`
    mask: u64,
}

impl PartialEq for Pending {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Pending {}

impl PartialOrd for Pending {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

// max-heap: lowest score first, then oldest
impl Ord for Pending {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .score
            .total_cmp(&self.score)
            .then(other.seq.cmp(&self.seq))
    }
}

/// Searches `bx` for a point strictly satisfying every constraint.
pub fn solve(
    constraints: &[QuadConstraint],
    bx: &Rect,
    cfg: &SolverConfig,
) -> Result<FeasibilityResult, QfeasError> {
    cfg.validate()?;
    if constraints.len() > MAX_CONSTRAINTS {
        return Err(QfeasError::TooManyConstraints(constraints.len()));
    }
    for c in constraints {
        if c.dim != bx.dim {
            return Err(QfeasError::DimensionMismatch {
                expected: bx.dim,
                found: c.dim,
            });
        }
    }
    // cheap exact bounds first so the LP is only solved when needed
    let mut order: Vec<usize> = (0..constraints.len()).collect();
    order.sort_by_key(|&j| constraints[j].form());
    // exact maxima of the special forms, to retire constraints that hold on a whole box
    let negated: Vec<Option<QuadConstraint>> = constraints
        .iter()
        .map(|c| (c.form() != Form::General).then(|| c.negated()))
        .collect();

    let n = bx.dim;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.rng_seed);
    let all: u64 = if constraints.len() == 64 {
        u64::MAX
    } else {
        (1u64 << constraints.len()) - 1
    };
    let mut queue = BinaryHeap::from([Pending {
        score: f64::NEG_INFINITY,
        seq: 0,
        rect: Rect {
            depth: 0,
            ..bx.clone()
        },
        mask: all,
    }]);
    let mut seq = 0u64;
    let mut explored = 0u64;
    let mut x = [0.0; MAX_DIM];
    let mut active: Vec<&QuadConstraint> = Vec::with_capacity(constraints.len());
    let mut linear: Vec<QuadConstraint> = Vec::new();

    'boxes: while let Some(Pending {
        rect: mut r,
        mut mask,
        ..
    }) = queue.pop()
    {
        explored += 1;
        if explored > cfg.max_rectangles {
            return Err(QfeasError::BudgetExceeded(cfg.max_rectangles));
        }
        if r.depth > cfg.max_depth || r.volume() < cfg.eps_volume {
            continue;
        }

        linear.clear();
        linear.extend(
            (0..constraints.len())
                .filter(|&j| mask & (1 << j) != 0 && constraints[j].form() == Form::Linear)
                .map(|j| constraints[j].clone()),
        );
        if !contract_linear(&linear, &mut r) {
            continue;
        }

        let centre = r.center();
        if strictly_satisfies(constraints, &centre[..n]) {
            return found(&centre[..n], explored);
        }
        for i in 0..n {
            x[i] = rng.gen_range(r.lower[i]..r.upper[i]);
        }
        if strictly_satisfies(constraints, &x[..n]) {
            return found(&x[..n], explored);
        }

        let mut score = f64::NEG_INFINITY;
        for &j in &order {
            if mask & (1 << j) == 0 {
                continue;
            }
            let lb = lower_bound(&constraints[j], &r);
            if lb >= 0.0 {
                continue 'boxes;
            }
            score = score.max(lb);
            if let Some(neg) = &negated[j] {
                if lower_bound(neg, &r) > 0.0 {
                    mask &= !(1 << j);
                }
            }
        }

        active.clear();
        active.extend(
            (0..constraints.len())
                .filter(|&j| mask & (1 << j) != 0)
                .map(|j| &constraints[j]),
        );
        if cfg.joint_relaxation && active.len() > 1 {
            if let Some((bound, point)) = bounds::joint_relaxation(&active, &r) {
                if bound >= 0.0 {
                    continue;
                }
                score = score.max(bound);
                if strictly_satisfies(constraints, &point[..n]) {
                    return found(&point[..n], explored);
                }
            }
        }
        if r.depth < cfg.max_depth {
            let (lo, hi) = r.split();
            for rect in [lo, hi] {
                seq += 1;
                queue.push(Pending {
                    score,
                    seq,
                    rect,
                    mask,
                });
            }
        }
    }
    Ok(FeasibilityResult {
        feasible: false,
        witness: None,
        rectangles_explored: explored,
    })
}
