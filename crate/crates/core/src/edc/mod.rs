//! Extended Double Cross (EDC) geometry.
//!
//! The plane around a directed landmark pair `A -> B` is cut by six boundary
//! loci into 20 open regions. A third landmark `C` lies in exactly one of them
//! unless it sits on a boundary. Every piece of qualitative knowledge in this
//! crate is a [`StateSet`]: the set of regions that are still possible for
//! some ordered triple.
//!
//! The six predicates, written in the canonical frame `A = (0,0)`, `B = (0,1)`,
//! `C = (alpha, beta)`, are
//!
//! | k | expression             | expression `< 0` means      |
//! |---|------------------------|-----------------------------|
//! | 0 | `-alpha`               | C is right of AB            |
//! | 1 | `-beta`                | C is in front of A          |
//! | 2 | `1 - beta`             | C is in front of B          |
//! | 3 | `1 - 2 beta`           | `|AC| > |BC|`               |
//! | 4 | `1 - (alpha^2+beta^2)` | `|AC| > |AB|`               |
//! | 5 | `2 beta - (alpha^2+beta^2)` | `|BC| > |AB|`          |

mod adjacency;
mod labeling;
mod symbolic;

use std::fmt;
use std::ops::{BitAnd, BitAndAssign, BitOr, BitOrAssign};

pub use adjacency::{region_adjacency, RegionAdjacency};
pub use labeling::{
    derive_region_labels, derive_region_labels_with, GeometricImages, LabelingError,
    RegionLabeling, BOOTSTRAP_EXTENT, BOOTSTRAP_GRID,
};
pub use symbolic::{predicate_quadratics, region_constraints};

use thiserror::Error;

/// Number of EDC regions.
pub const REGION_COUNT: usize = 20;

/// Number of boundary predicates.
pub const PREDICATE_COUNT: usize = 6;

/// Predicate magnitudes below this value (canonical units, `|AB| = 1`) are
/// treated as lying on a boundary.
pub const EPS_BOUNDARY: f64 = 1e-9;

/// The four regions that together make up the lune of `A` and `B`.
pub const LUNE: StateSet = StateSet::from_ids(&[7, 8, 13, 14]);

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EdcError {
    #[error("degenerate triple: predicate {predicate} has magnitude {value:e} below the boundary tolerance")]
    DegenerateTriple { predicate: usize, value: f64 },
    #[error("coincident landmarks A and B")]
    CoincidentPair,
    #[error("sign class {0:?} is not a realizable EDC region")]
    UnknownSignClass(SignVector),
}

/// An EDC region identifier in `1..=20`.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RegionId(u8);

impl RegionId {
    pub fn new(id: u8) -> Option<Self> {
        (1..=REGION_COUNT as u8).contains(&id).then_some(Self(id))
    }

    /// Builds from a zero-based index. Panics when out of range.
    pub fn from_index(index: usize) -> Self {
        assert!(index < REGION_COUNT, "region index {index} out of range");
        Self(index as u8 + 1)
    }

    pub fn get(self) -> u8 {
        self.0
    }

    pub fn index(self) -> usize {
        self.0 as usize - 1
    }

    pub fn all() -> impl Iterator<Item = RegionId> {
        (1..=REGION_COUNT as u8).map(RegionId)
    }
}

impl fmt::Display for RegionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A subset of the 20 EDC regions, stored as a bit vector.
///
/// The empty set only ever appears transiently, as the signal that two pieces
/// of knowledge contradict each other.
#[derive(Copy, Clone, PartialEq, Eq, Hash, Default, PartialOrd, Ord)]
pub struct StateSet(u32);

impl StateSet {
    pub const EMPTY: StateSet = StateSet(0);
    pub const ALL: StateSet = StateSet((1 << REGION_COUNT) - 1);

    /// Const constructor from raw ids; ids outside `1..=20` are ignored.
    pub const fn from_ids(ids: &[u8]) -> Self {
        let mut bits = 0u32;
        let mut i = 0;
        while i < ids.len() {
            let id = ids[i];
            if id >= 1 && id as usize <= REGION_COUNT {
                bits |= 1 << (id - 1);
            }
            i += 1;
        }
        StateSet(bits)
    }

    pub fn from_bits(bits: u32) -> Self {
        StateSet(bits & Self::ALL.0)
    }

    pub fn bits(self) -> u32 {
        self.0
    }

    pub fn singleton(id: RegionId) -> Self {
        StateSet(1 << id.index())
    }

    pub fn contains(self, id: RegionId) -> bool {
        self.0 & (1 << id.index()) != 0
    }

    pub fn insert(&mut self, id: RegionId) {
        self.0 |= 1 << id.index();
    }

    pub fn remove(&mut self, id: RegionId) {
        self.0 &= !(1 << id.index());
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn is_singleton(self) -> bool {
        self.0.count_ones() == 1
    }

    pub fn is_subset(self, other: StateSet) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn intersection(self, other: StateSet) -> StateSet {
        StateSet(self.0 & other.0)
    }

    pub fn union(self, other: StateSet) -> StateSet {
        StateSet(self.0 | other.0)
    }

    pub fn difference(self, other: StateSet) -> StateSet {
        StateSet(self.0 & !other.0)
    }

    /// Members in increasing id order.
    pub fn iter(self) -> impl Iterator<Item = RegionId> {
        let mut bits = self.0;
        std::iter::from_fn(move || {
            if bits == 0 {
                return None;
            }
            let i = bits.trailing_zeros();
            bits &= bits - 1;
            Some(RegionId(i as u8 + 1))
        })
    }

    /// Parses a whitespace separated id list such as `"1 5 11"`.
    pub fn parse_list(s: &str) -> Option<StateSet> {
        let mut set = StateSet::EMPTY;
        for tok in s.split_whitespace() {
            let id = RegionId::new(tok.parse().ok()?)?;
            set.insert(id);
        }
        Some(set)
    }
}

impl FromIterator<RegionId> for StateSet {
    fn from_iter<I: IntoIterator<Item = RegionId>>(iter: I) -> Self {
        let mut s = StateSet::EMPTY;
        for id in iter {
            s.insert(id);
        }
        s
    }
}

impl BitAnd for StateSet {
    type Output = StateSet;
    fn bitand(self, rhs: StateSet) -> StateSet {
        self.intersection(rhs)
    }
}

impl BitAndAssign for StateSet {
    fn bitand_assign(&mut self, rhs: StateSet) {
        self.0 &= rhs.0;
    }
}

impl BitOr for StateSet {
    type Output = StateSet;
    fn bitor(self, rhs: StateSet) -> StateSet {
        self.union(rhs)
    }
}

impl BitOrAssign for StateSet {
    fn bitor_assign(&mut self, rhs: StateSet) {
        self.0 |= rhs.0;
    }
}

impl fmt::Debug for StateSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, id) in self.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{id}")?;
        }
        f.write_str("}")
    }
}

/// Space separated ids, e.g. `1 5 11`.
impl fmt::Display for StateSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, id) in self.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{id}")?;
        }
        Ok(())
    }
}

/// Signs of the six predicates. Bit `k` is set when predicate `k` is positive.
#[derive(Copy, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SignVector(u8);

impl SignVector {
    pub fn from_bits(bits: u8) -> Self {
        SignVector(bits & 0b11_1111)
    }

    pub fn bits(self) -> u8 {
        self.0
    }

    /// Classifies raw predicate values. Fails when any value is within
    /// [`EPS_BOUNDARY`] of zero.
    pub fn from_values(values: &[f64; PREDICATE_COUNT]) -> Result<Self, EdcError> {
        let mut bits = 0u8;
        for (k, &v) in values.iter().enumerate() {
            if !(v.abs() >= EPS_BOUNDARY) {
                return Err(EdcError::DegenerateTriple {
                    predicate: k,
                    value: v,
                });
            }
            if v > 0.0 {
                bits |= 1 << k;
            }
        }
        Ok(SignVector(bits))
    }

    pub fn is_positive(self, predicate: usize) -> bool {
        self.0 & (1 << predicate) != 0
    }

    /// `+`/`-` string, predicate 0 first.
    pub fn to_sign_string(self) -> String {
        (0..PREDICATE_COUNT)
            .map(|k| if self.is_positive(k) { '+' } else { '-' })
            .collect()
    }

    pub fn parse_sign_string(s: &str) -> Option<Self> {
        if s.len() != PREDICATE_COUNT {
            return None;
        }
        let mut bits = 0u8;
        for (k, ch) in s.chars().enumerate() {
            match ch {
                '+' => bits |= 1 << k,
                '-' => {}
                _ => return None,
            }
        }
        Some(SignVector(bits))
    }
}

impl fmt::Debug for SignVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SignVector({})", self.to_sign_string())
    }
}

/// A point in the plane.
#[derive(Copy, Clone, Debug, PartialEq, Default)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn sub(self, o: Point2) -> Point2 {
        Point2::new(self.x - o.x, self.y - o.y)
    }

    pub fn dot(self, o: Point2) -> f64 {
        self.x * o.x + self.y * o.y
    }

    pub fn cross(self, o: Point2) -> f64 {
        self.x * o.y - self.y * o.x
    }

    pub fn norm_sq(self) -> f64 {
        self.dot(self)
    }

    pub fn dist(self, o: Point2) -> f64 {
        self.sub(o).norm_sq().sqrt()
    }
}

/// Coordinates of `C` in the frame `A = (0,0)`, `B = (0,1)`.
#[derive(Copy, Clone, Debug, PartialEq)]
pub struct CanonicalTriple {
    pub alpha: f64,
    pub beta: f64,
}

impl CanonicalTriple {
    pub fn new(alpha: f64, beta: f64) -> Self {
        Self { alpha, beta }
    }

    /// Maps `C` into the frame where `A = (0,0)` and `B = (0,1)` by the
    /// similarity transform fixing that pair.
    pub fn from_points(a: Point2, b: Point2, c: Point2) -> Result<Self, EdcError> {
        let ab = b.sub(a);
        let len_sq = ab.norm_sq();
        if !(len_sq > 0.0) {
            return Err(EdcError::CoincidentPair);
        }
        let ac = c.sub(a);
        Ok(Self {
            alpha: -ab.cross(ac) / len_sq,
            beta: ab.dot(ac) / len_sq,
        })
    }

    /// Raw values of the six predicates.
    pub fn predicate_values(&self) -> [f64; PREDICATE_COUNT] {
        let (a, b) = (self.alpha, self.beta);
        let r2 = a * a + b * b;
        [-a, -b, 1.0 - b, 1.0 - 2.0 * b, 1.0 - r2, 2.0 * b - r2]
    }
}

/// Signs of the six predicates for a canonical triple.
pub fn eval_predicates(p: CanonicalTriple) -> Result<SignVector, EdcError> {
    SignVector::from_values(&p.predicate_values())
}

/// Predicate values for arbitrary points, scaled to canonical units.
///
/// Uses the frame-free forms (cross and dot products, squared distance
/// differences) divided by `|AB|^2`.
pub fn predicate_values(
    a: Point2,
    b: Point2,
    c: Point2,
) -> Result<[f64; PREDICATE_COUNT], EdcError> {
    let ab = b.sub(a);
    let s = ab.norm_sq();
    if !(s > 0.0) {
        return Err(EdcError::CoincidentPair);
    }
    let ac = c.sub(a);
    let bc = c.sub(b);
    let ac2 = ac.norm_sq();
    let bc2 = bc.norm_sq();
    Ok([
        ab.cross(ac) / s,
        -ac.dot(ab) / s,
        -bc.dot(ab) / s,
        (bc2 - ac2) / s,
        (s - ac2) / s,
        (s - bc2) / s,
    ])
}

/// Sign vector of the ordered triple `AB:C` for arbitrary points.
pub fn sign_vector(a: Point2, b: Point2, c: Point2) -> Result<SignVector, EdcError> {
    SignVector::from_values(&predicate_values(a, b, c)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn state_set_basics() {
        let s = StateSet::from_ids(&[1, 5, 11]);
        assert_eq!(s.len(), 3);
        assert!(s.contains(RegionId::new(5).unwrap()));
        assert!(!s.contains(RegionId::new(6).unwrap()));
        assert_eq!(format!("{s}"), "1 5 11");
        assert_eq!(format!("{s:?}"), "{1,5,11}");
        assert_eq!(StateSet::parse_list("11 1 5"), Some(s));
        assert_eq!(StateSet::parse_list("0"), None);
        assert_eq!(StateSet::ALL.len(), 20);
        assert_eq!(LUNE.len(), 4);
    }

    #[test]
    fn region_id_range() {
        assert!(RegionId::new(0).is_none());
        assert!(RegionId::new(21).is_none());
        assert_eq!(RegionId::all().count(), 20);
    }

    #[test]
    fn state_two_anchor_point_is_all_negative() {
        let s = eval_predicates(CanonicalTriple::new(1.0, 2.0)).unwrap();
        assert_eq!(s.bits(), 0);
        let v = CanonicalTriple::new(1.0, 2.0).predicate_values();
        assert_eq!(v, [-1.0, -2.0, -1.0, -3.0, -4.0, -1.0]);
    }

    #[test]
    fn perpendicular_bisector_is_degenerate() {
        let err = eval_predicates(CanonicalTriple::new(0.5, 0.5)).unwrap_err();
        assert!(matches!(
            err,
            EdcError::DegenerateTriple { predicate: 3, .. }
        ));
    }

    #[test]
    fn near_boundary_above_tolerance_is_valid() {
        let p = CanonicalTriple::new(-3.0, 0.5 + 1e-6);
        let v = p.predicate_values();
        // 1 - 2 beta = -2e-6, well above 1e-9 in magnitude
        assert!((v[3] + 2e-6).abs() < 1e-12);
        let s = eval_predicates(p).unwrap();
        assert!(s.is_positive(0));
        assert!(!s.is_positive(3));
    }

    #[test]
    fn general_frame_matches_canonical() {
        // rotate, scale and translate the canonical frame
        let (a, b) = (
            Point2::new(2.0, -1.0),
            Point2::new(2.0 + 3.0 * 0.6, -1.0 + 3.0 * 0.8),
        );
        for &(al, be) in &[(1.0, 2.0), (-0.3, 0.7), (0.2, -0.4), (-2.5, 1.5)] {
            // canonical x axis is the right-hand normal of AB
            let ux = Point2::new(0.8, -0.6);
            let uy = Point2::new(0.6, 0.8);
            let c = Point2::new(
                a.x + 3.0 * (al * ux.x + be * uy.x),
                a.y + 3.0 * (al * ux.y + be * uy.y),
            );
            let can = CanonicalTriple::from_points(a, b, c).unwrap();
            assert!((can.alpha - al).abs() < 1e-12 && (can.beta - be).abs() < 1e-12);
            let v = predicate_values(a, b, c).unwrap();
            let w = CanonicalTriple::new(al, be).predicate_values();
            for k in 0..PREDICATE_COUNT {
                assert!((v[k] - w[k]).abs() < 1e-12, "predicate {k}");
            }
        }
    }

    #[test]
    fn sign_string_round_trip() {
        let s = SignVector::from_bits(0b101001);
        assert_eq!(SignVector::parse_sign_string(&s.to_sign_string()), Some(s));
    }
}
