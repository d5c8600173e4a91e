//! Small symbolic algebra for building quadratic constraints from points whose
//! coordinates are affine in the unknowns.

use std::ops::{Add, Mul, Neg, Sub};

use super::MAX_DIM;

/// `coef . x + c`
#[derive(Copy, Clone, Debug, PartialEq, Default)]
pub struct Affine {
    pub coef: [f64; MAX_DIM],
    pub c: f64,
}

impl Affine {
    pub fn constant(c: f64) -> Self {
        Self {
            coef: [0.0; MAX_DIM],
            c,
        }
    }

    pub fn var(i: usize) -> Self {
        let mut coef = [0.0; MAX_DIM];
        coef[i] = 1.0;
        Self { coef, c: 0.0 }
    }

    pub fn scale(self, k: f64) -> Self {
        Self {
            coef: self.coef.map(|v| v * k),
            c: self.c * k,
        }
    }
}

impl Add for Affine {
    type Output = Affine;
    fn add(self, o: Affine) -> Affine {
        Affine {
            coef: std::array::from_fn(|i| self.coef[i] + o.coef[i]),
            c: self.c + o.c,
        }
    }
}

impl Sub for Affine {
    type Output = Affine;
    fn sub(self, o: Affine) -> Affine {
        self + o.scale(-1.0)
    }
}

impl Mul for Affine {
    type Output = Quadratic;
    fn mul(self, o: Affine) -> Quadratic {
        let mut q = Quadratic::zero();
        for i in 0..MAX_DIM {
            for j in 0..MAX_DIM {
                // symmetric split of the x_i x_j coefficient
                q.a[i][j] += 0.5 * (self.coef[i] * o.coef[j] + self.coef[j] * o.coef[i]);
            }
            q.b[i] = self.coef[i] * o.c + o.coef[i] * self.c;
        }
        q.c = self.c * o.c;
        q
    }
}

/// `x^T a x + b . x + c` with symmetric `a`.
#[derive(Copy, Clone, Debug, PartialEq, Default)]
pub struct Quadratic {
    pub a: [[f64; MAX_DIM]; MAX_DIM],
    pub b: [f64; MAX_DIM],
    pub c: f64,
}

impl Quadratic {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        let mut v = self.c;
        for i in 0..x.len() {
            v += self.b[i] * x[i];
            for j in 0..x.len() {
                v += self.a[i][j] * x[i] * x[j];
            }
        }
        v
    }

    pub fn scale(self, k: f64) -> Self {
        Self {
            a: self.a.map(|r| r.map(|v| v * k)),
            b: self.b.map(|v| v * k),
            c: self.c * k,
        }
    }

    /// Largest absolute difference between coefficients.
    pub fn max_coef_diff(&self, o: &Quadratic) -> f64 {
        let mut d = (self.c - o.c).abs();
        for i in 0..MAX_DIM {
            d = d.max((self.b[i] - o.b[i]).abs());
            for j in 0..MAX_DIM {
                d = d.max((self.a[i][j] - o.a[i][j]).abs());
            }
        }
        d
    }
}

impl Add for Quadratic {
    type Output = Quadratic;
    fn add(self, o: Quadratic) -> Quadratic {
        Quadratic {
            a: std::array::from_fn(|i| std::array::from_fn(|j| self.a[i][j] + o.a[i][j])),
            b: std::array::from_fn(|i| self.b[i] + o.b[i]),
            c: self.c + o.c,
        }
    }
}

impl Neg for Quadratic {
    type Output = Quadratic;
    fn neg(self) -> Quadratic {
        Quadratic {
            a: self.a.map(|r| r.map(|v| -v)),
            b: self.b.map(|v| -v),
            c: -self.c,
        }
    }
}

impl Sub for Quadratic {
    type Output = Quadratic;
    fn sub(self, o: Quadratic) -> Quadratic {
        self + (-o)
    }
}

/// A planar point with affine coordinates.
#[derive(Copy, Clone, Debug, PartialEq, Default)]
pub struct AffinePoint {
    pub x: Affine,
    pub y: Affine,
}

impl AffinePoint {
    pub fn new(x: Affine, y: Affine) -> Self {
        Self { x, y }
    }

    pub fn fixed(x: f64, y: f64) -> Self {
        Self {
            x: Affine::constant(x),
            y: Affine::constant(y),
        }
    }

    pub fn sub(self, o: AffinePoint) -> AffinePoint {
        AffinePoint {
            x: self.x - o.x,
            y: self.y - o.y,
        }
    }

    pub fn dot(self, o: AffinePoint) -> Quadratic {
        self.x * o.x + self.y * o.y
    }

    pub fn cross(self, o: AffinePoint) -> Quadratic {
        self.x * o.y - self.y * o.x
    }

    pub fn norm_sq(self) -> Quadratic {
        self.dot(self)
    }
}
