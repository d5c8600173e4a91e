//! Which EDC regions share a boundary edge or vertex.
//!
//! Computed numerically: the six boundary loci are sampled, their mutual
//! crossings located by bisection, and a ring of probes is placed around every
//! boundary sample and every crossing. Regions seen together in one probe
//! ring touch each other.

use std::f64::consts::PI;

use super::{
    CanonicalTriple, RegionId, RegionLabeling, StateSet, BOOTSTRAP_EXTENT, PREDICATE_COUNT,
    REGION_COUNT,
};

/// Symmetric, irreflexive adjacency relation over region ids.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RegionAdjacency {
    neighbors: [StateSet; REGION_COUNT],
}

impl RegionAdjacency {
    pub fn adjacent(&self, a: RegionId, b: RegionId) -> bool {
        self.neighbors[a.index()].contains(b)
    }

    pub fn neighbors(&self, a: RegionId) -> StateSet {
        self.neighbors[a.index()]
    }

    /// Number of unordered adjacent pairs.
    pub fn pair_count(&self) -> usize {
        self.neighbors.iter().map(|s| s.len()).sum::<usize>() / 2
    }

    fn add(&mut self, seen: StateSet) {
        for a in seen.iter() {
            self.neighbors[a.index()] |= seen.difference(StateSet::singleton(a));
        }
    }
}

#[derive(Copy, Clone)]
enum Locus {
    // alpha = 0, parameterized by beta
    Vertical,
    // beta = c, parameterized by alpha
    Horizontal(f64),
    // unit circle about (0, cy)
    Circle(f64),
}

const LOCI: [Locus; 6] = [
    Locus::Vertical,
    Locus::Horizontal(0.0),
    Locus::Horizontal(1.0),
    Locus::Horizontal(0.5),
    Locus::Circle(0.0),
    Locus::Circle(1.0),
];

impl Locus {
    fn point(self, t: f64) -> (f64, f64) {
        match self {
            Locus::Vertical => (0.0, t),
            Locus::Horizontal(c) => (t, c),
            Locus::Circle(cy) => (t.cos(), cy + t.sin()),
        }
    }

    fn range(self) -> (f64, f64) {
        match self {
            Locus::Circle(_) => (0.0, 2.0 * PI),
            _ => (-BOOTSTRAP_EXTENT, BOOTSTRAP_EXTENT),
        }
    }
}

/// Crossing points of the boundary loci, located by bisection on sign changes
/// of one predicate along another locus.
fn vertices(resolution: usize) -> Vec<(f64, f64)> {
    let mut out: Vec<(f64, f64)> = Vec::new();
    for (i, &locus) in LOCI.iter().enumerate() {
        let (t0, t1) = locus.range();
        let step = (t1 - t0) / resolution as f64;
        for k in 0..PREDICATE_COUNT {
            if k == i {
                continue;
            }
            let f = |t: f64| {
                let (a, b) = locus.point(t);
                CanonicalTriple::new(a, b).predicate_values()[k]
            };
            for n in 0..resolution {
                let (mut lo, mut hi) = (t0 + n as f64 * step, t0 + (n + 1) as f64 * step);
                let (flo, fhi) = (f(lo), f(hi));
                if flo == 0.0 {
                    push_unique(&mut out, locus.point(lo));
                    continue;
                }
                if flo.signum() == fhi.signum() {
                    continue;
                }
                for _ in 0..60 {
                    let mid = 0.5 * (lo + hi);
                    if f(mid).signum() == flo.signum() {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                push_unique(&mut out, locus.point(0.5 * (lo + hi)));
            }
        }
    }
    out
}

fn push_unique(v: &mut Vec<(f64, f64)>, p: (f64, f64)) {
    if !v
        .iter()
        .any(|q| (q.0 - p.0).abs() < 1e-9 && (q.1 - p.1).abs() < 1e-9)
    {
        v.push(p);
    }
}

fn probe(labeling: &RegionLabeling, center: (f64, f64), radius: f64, count: usize) -> StateSet {
    let mut seen = StateSet::EMPTY;
    for n in 0..count {
        // half-step offset keeps probes off the axis directions
        let th = 2.0 * PI * (n as f64 + 0.5) / count as f64;
        let p = CanonicalTriple::new(center.0 + radius * th.cos(), center.1 + radius * th.sin());
        if let Ok(r) = labeling.region_of(p) {
            seen.insert(r);
        }
    }
    seen
}

/// Adjacency at a fixed probe radius.
fn adjacency_at(
    labeling: &RegionLabeling,
    resolution: usize,
    radius: f64,
    verts: &[(f64, f64)],
) -> RegionAdjacency {
    let mut adj = RegionAdjacency {
        neighbors: [StateSet::EMPTY; REGION_COUNT],
    };
    for &locus in &LOCI {
        let (t0, t1) = locus.range();
        let step = (t1 - t0) / resolution as f64;
        for n in 0..=resolution {
            let c = locus.point(t0 + n as f64 * step);
            adj.add(probe(labeling, c, radius, 16));
        }
    }
    // dense rings at crossings catch regions that only meet at a point,
    // including the thin cusps where a circle is tangent to a line
    for &v in verts {
        for shrink in [1.0, 0.5, 0.25] {
            adj.add(probe(labeling, v, radius * shrink, 8 * resolution));
        }
    }
    adj
}

/// Region adjacency (shared boundary edge or vertex), computed numerically.
///
/// `resolution` is the number of samples per boundary locus. The probe radius
/// is halved until two successive relations agree.
pub fn region_adjacency(labeling: &RegionLabeling, resolution: usize) -> RegionAdjacency {
    let verts = vertices(resolution);
    let mut radius = 0.02;
    let mut prev = adjacency_at(labeling, resolution, radius, &verts);
    for _ in 0..6 {
        radius *= 0.5;
        let next = adjacency_at(labeling, resolution, radius, &verts);
        if next == prev {
            return next;
        }
        prev = next;
    }
    prev
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::edc::derive_region_labels_with;

    fn r(id: u8) -> RegionId {
        RegionId::new(id).unwrap()
    }

    #[test]
    fn adjacency_is_symmetric_and_irreflexive() {
        let l = derive_region_labels_with(300).unwrap();
        let adj = region_adjacency(&l, 500);
        for a in RegionId::all() {
            assert!(!adj.adjacent(a, a));
            for b in RegionId::all() {
                assert_eq!(adj.adjacent(a, b), adj.adjacent(b, a));
            }
            assert!(!adj.neighbors(a).is_empty());
        }
    }

    #[test]
    fn lune_halves_meet_on_the_segment() {
        let l = derive_region_labels_with(300).unwrap();
        let adj = region_adjacency(&l, 500);
        assert!(adj.adjacent(r(7), r(14)));
        assert!(adj.adjacent(r(8), r(13)));
    }

    #[test]
    fn stable_under_refinement() {
        let l = derive_region_labels_with(300).unwrap();
        assert_eq!(region_adjacency(&l, 500), region_adjacency(&l, 1000));
    }

    #[test]
    fn crossings_include_known_vertices() {
        let v = vertices(500);
        let has = |x: f64, y: f64| {
            v.iter()
                .any(|p| (p.0 - x).abs() < 1e-7 && (p.1 - y).abs() < 1e-7)
        };
        assert!(has(0.0, 0.0));
        assert!(has(0.0, 1.0));
        assert!(has(0.0, 0.5));
        assert!(has(3f64.sqrt() / 2.0, 0.5));
        assert!(has(0.0, -1.0));
        assert!(has(0.0, 2.0));
    }
}
