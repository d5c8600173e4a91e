//! Region numbering.
//!
//! The 20 printed region numbers are only given pictorially, so they are
//! recovered here: sample the canonical frame, collect the realizable sign
//! classes, compute how each class maps under the three unary frame changes,
//! then search for the one numbering that agrees with the printed unary table
//! and the anchor regions.

use std::collections::{BTreeMap, BTreeSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use sha2::{Digest, Sha256};
use thiserror::Error;

use super::{
    eval_predicates, sign_vector, CanonicalTriple, EdcError, Point2, RegionId, SignVector,
    StateSet, REGION_COUNT,
};
use crate::operators::{UnaryTables, COMPOSITION_ANCHORS};

/// Half-width of the square sampled during bootstrap.
pub const BOOTSTRAP_EXTENT: f64 = 5.0;

/// Default samples per axis for the bootstrap grid.
pub const BOOTSTRAP_GRID: usize = 1000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LabelingError {
    #[error("expected 20 realizable sign classes, found {0}")]
    ClassCount(usize),
    #[error("anchors cannot be satisfied: {0}")]
    InconsistentAnchors(String),
    #[error("{0} distinct labelings satisfy every anchor")]
    AmbiguousLabeling(usize),
    #[error("labeling is not a bijection onto 20 distinct sign classes")]
    NotBijective,
}

/// Bijection between region ids and predicate sign classes.
#[derive(Clone, PartialEq, Eq)]
pub struct RegionLabeling {
    by_region: [SignVector; REGION_COUNT],
    // sign bits -> region id, 0 when unused
    lookup: [u8; 64],
}

impl std::fmt::Debug for RegionLabeling {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let mut m = f.debug_map();
        for r in RegionId::all() {
            m.entry(&r.get(), &self.signs(r).to_sign_string());
        }
        m.finish()
    }
}

impl RegionLabeling {
    pub fn from_signs(by_region: [SignVector; REGION_COUNT]) -> Result<Self, LabelingError> {
        let mut lookup = [0u8; 64];
        for (i, s) in by_region.iter().enumerate() {
            let slot = &mut lookup[s.bits() as usize];
            if *slot != 0 {
                return Err(LabelingError::NotBijective);
            }
            *slot = i as u8 + 1;
        }
        Ok(Self { by_region, lookup })
    }

    pub fn signs(&self, region: RegionId) -> SignVector {
        self.by_region[region.index()]
    }

    pub fn region_of_signs(&self, s: SignVector) -> Result<RegionId, EdcError> {
        match self.lookup[s.bits() as usize] {
            0 => Err(EdcError::UnknownSignClass(s)),
            id => Ok(RegionId(id)),
        }
    }

    /// The region containing a non-degenerate canonical point.
    pub fn region_of(&self, p: CanonicalTriple) -> Result<RegionId, EdcError> {
        self.region_of_signs(eval_predicates(p)?)
    }

    /// The region of `C` relative to the directed pair `A -> B`.
    pub fn region_of_points(&self, a: Point2, b: Point2, c: Point2) -> Result<RegionId, EdcError> {
        self.region_of_signs(sign_vector(a, b, c)?)
    }

    /// SHA-256 over the `id signs` lines, hex encoded.
    pub fn checksum(&self) -> String {
        let mut h = Sha256::new();
        for r in RegionId::all() {
            h.update(format!("{} {}\n", r, self.signs(r).to_sign_string()));
        }
        h.finalize().iter().map(|b| format!("{b:02x}")).collect()
    }

    /// Regions whose sign vector satisfies every `(predicate, positive)` pair.
    pub fn regions_where(&self, conditions: &[(usize, bool)]) -> StateSet {
        RegionId::all()
            .filter(|&r| {
                conditions
                    .iter()
                    .all(|&(k, pos)| self.signs(r).is_positive(k) == pos)
            })
            .collect()
    }
}

/// Unary images computed from geometry: for each region, the regions that
/// `BC:A`, `CA:B` and `BA:C` can occupy when `AB:C` lies in it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GeometricImages {
    pub left: [StateSet; REGION_COUNT],
    pub right: [StateSet; REGION_COUNT],
    pub inverse: [StateSet; REGION_COUNT],
}

impl GeometricImages {
    /// Samples a `grid x grid` lattice of cell centres on the bootstrap square.
    pub fn sample(labeling: &RegionLabeling, grid: usize) -> Self {
        let classes = sample_classes(grid);
        let mut out = GeometricImages {
            left: [StateSet::EMPTY; REGION_COUNT],
            right: [StateSet::EMPTY; REGION_COUNT],
            inverse: [StateSet::EMPTY; REGION_COUNT],
        };
        for (src, [l, r, i]) in classes.images {
            let (Ok(src), Ok(l), Ok(r), Ok(i)) = (
                labeling.region_of_signs(src),
                labeling.region_of_signs(l),
                labeling.region_of_signs(r),
                labeling.region_of_signs(i),
            ) else {
                continue;
            };
            out.left[src.index()].insert(l);
            out.right[src.index()].insert(r);
            out.inverse[src.index()].insert(i);
        }
        out
    }

    /// True when these images equal the tabulated unary operators.
    pub fn matches(&self, tables: &UnaryTables) -> bool {
        RegionId::all().all(|r| {
            let i = r.index();
            self.left[i] == tables.left(r)
                && self.right[i] == tables.right(r)
                && self.inverse[i] == tables.inverse(r)
        })
    }
}

struct ClassSamples {
    classes: BTreeSet<SignVector>,
    // (class of AB:C, [class of BC:A, CA:B, BA:C]) for every distinct combination seen
    images: BTreeSet<(SignVector, [SignVector; 3])>,
}

fn sample_classes(grid: usize) -> ClassSamples {
    let a = Point2::new(0.0, 0.0);
    let b = Point2::new(0.0, 1.0);
    let h = 2.0 * BOOTSTRAP_EXTENT / grid as f64;
    let mut classes = BTreeSet::new();
    let mut images = BTreeSet::new();
    for i in 0..grid {
        let alpha = -BOOTSTRAP_EXTENT + (i as f64 + 0.5) * h;
        for j in 0..grid {
            let beta = -BOOTSTRAP_EXTENT + (j as f64 + 0.5) * h;
            let c = Point2::new(alpha, beta);
            let Ok(s) = eval_predicates(CanonicalTriple::new(alpha, beta)) else {
                continue;
            };
            classes.insert(s);
            let (Ok(l), Ok(r), Ok(inv)) = (
                sign_vector(b, c, a),
                sign_vector(c, a, b),
                sign_vector(b, a, c),
            ) else {
                continue;
            };
            images.insert((s, [l, r, inv]));
        }
    }
    ClassSamples { classes, images }
}

/// Recovers the region numbering with the default grid.
pub fn derive_region_labels() -> Result<RegionLabeling, LabelingError> {
    derive_region_labels_with(BOOTSTRAP_GRID)
}

/// Recovers the region numbering from a `grid x grid` sample of the canonical
/// frame. Fails unless exactly one numbering satisfies every anchor.
pub fn derive_region_labels_with(grid: usize) -> Result<RegionLabeling, LabelingError> {
    let samples = sample_classes(grid);
    if samples.classes.len() != REGION_COUNT {
        return Err(LabelingError::ClassCount(samples.classes.len()));
    }
    let classes: Vec<SignVector> = samples.classes.iter().copied().collect();
    let idx = |s: SignVector| classes.iter().position(|&c| c == s);

    // class -> class-index bitmask, per operator
    let mut imgs = [[0u32; REGION_COUNT]; 3];
    for (src, targets) in &samples.images {
        let Some(si) = idx(*src) else { continue };
        for (op, t) in targets.iter().enumerate() {
            match idx(*t) {
                Some(ti) => imgs[op][si] |= 1 << ti,
                None => {
                    return Err(LabelingError::InconsistentAnchors(format!(
                        "image class {t:?} not realizable"
                    )))
                }
            }
        }
    }

    let find = |conds: &[(usize, bool)]| -> Vec<usize> {
        (0..REGION_COUNT)
            .filter(|&c| {
                conds
                    .iter()
                    .all(|&(k, pos)| classes[c].is_positive(k) == pos)
            })
            .collect()
    };
    // state 2: right of AB, in front of B, |BC| > |AB|
    let two = find(&[(0, false), (2, false), (5, false)]);
    // state 7: left of AB, |BC| < |AC|, |AC| < |AB|
    let seven = find(&[(0, true), (3, false), (4, true)]);
    // lune: closer than |AB| to both A and B
    let lune = find(&[(4, true), (5, true)]);
    if two.len() != 1 || seven.len() != 1 || lune.len() != 4 {
        return Err(LabelingError::InconsistentAnchors(format!(
            "anchor class counts: state 2 -> {}, state 7 -> {}, lune -> {}",
            two.len(),
            seven.len(),
            lune.len()
        )));
    }

    let lune_ids = super::LUNE.bits();
    let mut allowed = [0u32; REGION_COUNT];
    for (c, slot) in allowed.iter_mut().enumerate() {
        *slot = if lune.contains(&c) {
            lune_ids
        } else {
            StateSet::ALL.bits() & !lune_ids
        };
    }
    allowed[two[0]] &= 1 << 1;
    allowed[seven[0]] &= 1 << 6;

    let printed = UnaryTables::printed();
    let table: [[u32; REGION_COUNT]; 3] = std::array::from_fn(|op| {
        std::array::from_fn(|i| {
            let r = RegionId::from_index(i);
            match op {
                0 => printed.left(r).bits(),
                1 => printed.right(r).bits(),
                _ => printed.inverse(r).bits(),
            }
        })
    });

    // most constrained classes first
    let mut order: Vec<usize> = (0..REGION_COUNT).collect();
    order.sort_by_key(|&c| allowed[c].count_ones());

    let mut search = Search {
        imgs,
        table,
        allowed,
        order,
        assign: [u8::MAX; REGION_COUNT],
        solutions: Vec::new(),
    };
    search.run(0, 0);

    if search.solutions.is_empty() {
        return Err(LabelingError::InconsistentAnchors(
            "no numbering reproduces the unary table".into(),
        ));
    }
    // The unary table has a symmetry swapping {1,5}, {4,9}, {12,17} and
    // {16,20}; the worked composition entries break it.
    let compositions = sample_compositions(&classes, COMPOSITION_SAMPLES);
    let survivors: Vec<[u8; REGION_COUNT]> = search
        .solutions
        .iter()
        .copied()
        .filter(|sol| composition_anchors_hold(sol, &compositions))
        .collect();

    match survivors.len() {
        0 => Err(LabelingError::InconsistentAnchors(
            "no numbering reproduces both the unary table and the composition anchors".into(),
        )),
        1 => {
            let sol = survivors[0];
            let mut by_region = [SignVector(0); REGION_COUNT];
            for (c, &r) in sol.iter().enumerate() {
                by_region[r as usize] = classes[c];
            }
            RegionLabeling::from_signs(by_region)
        }
        n => Err(LabelingError::AmbiguousLabeling(n)),
    }
}

const MAX_SOLUTIONS: usize = 64;

/// Random quadruples drawn when checking the composition anchors.
const COMPOSITION_SAMPLES: usize = 200_000;

/// For every observed pair of classes (AB:C, BC:D), the bitmask of class
/// indices seen for AB:D.
fn sample_compositions(classes: &[SignVector], samples: usize) -> BTreeMap<(usize, usize), u32> {
    let idx = |s: SignVector| classes.iter().position(|&c| c == s);
    let mut rng = ChaCha8Rng::seed_from_u64(0xED_C0);
    let a = Point2::new(0.0, 0.0);
    let b = Point2::new(0.0, 1.0);
    let mut out = BTreeMap::new();
    for _ in 0..samples {
        let c = Point2::new(rng.gen_range(-4.0..4.0), rng.gen_range(-4.0..4.0));
        let d = Point2::new(rng.gen_range(-4.0..4.0), rng.gen_range(-4.0..4.0));
        let (Ok(abc), Ok(bcd), Ok(abd)) = (
            sign_vector(a, b, c),
            sign_vector(b, c, d),
            sign_vector(a, b, d),
        ) else {
            continue;
        };
        if let (Some(x), Some(y), Some(z)) = (idx(abc), idx(bcd), idx(abd)) {
            *out.entry((x, y)).or_insert(0u32) |= 1 << z;
        }
    }
    out
}

/// Sampled composition images must be non-empty subsets of the printed
/// anchor entries. Sampling under-approximates, so subset is the right test.
fn composition_anchors_hold(
    sol: &[u8; REGION_COUNT],
    sampled: &BTreeMap<(usize, usize), u32>,
) -> bool {
    let class_of = |region: u8| {
        sol.iter()
            .position(|&r| r == region - 1)
            .expect("bijective assignment")
    };
    COMPOSITION_ANCHORS.iter().all(|&(s1, s2, expected)| {
        let Some(&mask) = sampled.get(&(class_of(s1), class_of(s2))) else {
            return false;
        };
        let ids: StateSet = (0..REGION_COUNT)
            .filter(|&z| mask & (1 << z) != 0)
            .map(|z| RegionId::from_index(sol[z] as usize))
            .collect();
        !ids.is_empty() && ids.is_subset(StateSet::from_ids(expected))
    })
}

struct Search {
    imgs: [[u32; REGION_COUNT]; 3],
    table: [[u32; REGION_COUNT]; 3],
    allowed: [u32; REGION_COUNT],
    order: Vec<usize>,
    // class -> region index, u8::MAX when unassigned
    assign: [u8; REGION_COUNT],
    solutions: Vec<[u8; REGION_COUNT]>,
}

impl Search {
    fn run(&mut self, depth: usize, used: u32) {
        if self.solutions.len() >= MAX_SOLUTIONS {
            return;
        }
        if depth == REGION_COUNT {
            self.solutions.push(self.assign);
            return;
        }
        let class = self.order[depth];
        let mut candidates = self.allowed[class] & !used;
        while candidates != 0 {
            let r = candidates.trailing_zeros() as u8;
            candidates &= candidates - 1;
            self.assign[class] = r;
            if self.consistent(class) {
                self.run(depth + 1, used | (1 << r));
            }
            self.assign[class] = u8::MAX;
        }
    }

    fn consistent(&self, x: usize) -> bool {
        let rx = self.assign[x] as usize;
        for op in 0..3 {
            if self.imgs[op][x].count_ones() != self.table[op][rx].count_ones() {
                return false;
            }
            for y in 0..REGION_COUNT {
                let ry = self.assign[y];
                if ry == u8::MAX {
                    continue;
                }
                let ry = ry as usize;
                let fwd_geo = self.imgs[op][x] & (1 << y) != 0;
                let fwd_tab = self.table[op][rx] & (1 << ry) != 0;
                let back_geo = self.imgs[op][y] & (1 << x) != 0;
                let back_tab = self.table[op][ry] & (1 << rx) != 0;
                if fwd_geo != fwd_tab || back_geo != back_tab {
                    return false;
                }
            }
        }
        true
    }
}
