//! The six predicates as quadratic polynomials in unknown coordinates.
//!
//! Predicates are written without the `1/|AB|^2` normalisation so they stay
//! quadratic; the factor is positive and does not change any sign.

use super::{RegionId, RegionLabeling, PREDICATE_COUNT};
use crate::qfeas::{AffinePoint, QfeasError, QuadConstraint, Quadratic};

/// Predicate polynomials for the ordered triple `AB:C`.
pub fn predicate_quadratics(
    a: AffinePoint,
    b: AffinePoint,
    c: AffinePoint,
) -> [Quadratic; PREDICATE_COUNT] {
    let ab = b.sub(a);
    let ac = c.sub(a);
    let cb = b.sub(c);
    let ab2 = ab.norm_sq();
    let ac2 = ac.norm_sq();
    let bc2 = cb.norm_sq();
    [
        ab.cross(ac),
        -ac.dot(ab),
        cb.dot(ab),
        bc2 - ac2,
        ab2 - ac2,
        ab2 - bc2,
    ]
}

/// Strict inequalities (`q < 0`) that place `c` in `region` relative to `a -> b`.
pub fn region_constraints(
    labeling: &RegionLabeling,
    region: RegionId,
    dim: usize,
    a: AffinePoint,
    b: AffinePoint,
    c: AffinePoint,
) -> Result<Vec<QuadConstraint>, QfeasError> {
    let signs = labeling.signs(region);
    predicate_quadratics(a, b, c)
        .iter()
        .enumerate()
        .map(|(k, q)| {
            let q = if signs.is_positive(k) { -*q } else { *q };
            QuadConstraint::from_quadratic(dim, &q)
        })
        .collect()
}
