use rayon::prelude::*;

use crate::edc::{region_constraints, RegionId, RegionLabeling, StateSet, REGION_COUNT};
use crate::qfeas::{solve, Affine, AffinePoint, QfeasError, QuadConstraint, Rect, SolverConfig};

/// Generation parameters recorded alongside a table.
#[derive(Clone, Debug, PartialEq)]
pub struct TableMeta {
    pub depth: u32,
    pub bound: f64,
    pub labeling_checksum: String,
}

/// `(AB:C, BC:D) -> AB:D` lookup over single regions.
#[derive(Clone, PartialEq)]
pub struct CompositionTable {
    pub(crate) entries: [[StateSet; REGION_COUNT]; REGION_COUNT],
    pub meta: TableMeta,
    /// `(s1, s2, s3)` problems that hit the solver budget; `s3` was kept.
    pub budget_exceeded: Vec<(u8, u8, u8)>,
    // per s1: union of the row over each 5-bit chunk of an s2 bitmask
    chunks: Box<[[[StateSet; 32]; 4]; REGION_COUNT]>,
}

fn chunk_unions(
    entries: &[[StateSet; REGION_COUNT]; REGION_COUNT],
) -> Box<[[[StateSet; 32]; 4]; REGION_COUNT]> {
    let mut out = Box::new([[[StateSet::EMPTY; 32]; 4]; REGION_COUNT]);
    for (row, per_row) in entries.iter().zip(out.iter_mut()) {
        for (c, chunk) in per_row.iter_mut().enumerate() {
            for (bits, slot) in chunk.iter_mut().enumerate() {
                for k in 0..5 {
                    if bits & (1 << k) != 0 {
                        *slot |= row[c * 5 + k];
                    }
                }
            }
        }
    }
    out
}

impl std::fmt::Debug for CompositionTable {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("CompositionTable")
            .field("meta", &self.meta)
            .field("budget_exceeded", &self.budget_exceeded.len())
            .finish_non_exhaustive()
    }
}

impl CompositionTable {
    pub fn from_entries(
        entries: [[StateSet; REGION_COUNT]; REGION_COUNT],
        meta: TableMeta,
    ) -> Self {
        Self {
            chunks: chunk_unions(&entries),
            entries,
            meta,
            budget_exceeded: Vec::new(),
        }
    }

    pub fn entry(&self, s1: RegionId, s2: RegionId) -> StateSet {
        self.entries[s1.index()][s2.index()]
    }

    /// Union of the entries over every pair in `s1 x s2`.
    pub fn compose(&self, s1: StateSet, s2: StateSet) -> StateSet {
        let bits = s2.bits();
        let mut out = StateSet::EMPTY;
        for a in s1.iter() {
            let row = &self.chunks[a.index()];
            for (c, chunk) in row.iter().enumerate() {
                out |= chunk[((bits >> (5 * c)) & 31) as usize];
            }
            if out == StateSet::ALL {
                break;
            }
        }
        out
    }
}

/// Points of a composition problem, in order `A, B, C, D`.
const POINTS: usize = 4;

/// Which two of `A, B, C, D` are pinned to `(0,0)` and `(0,1)`. The other two
/// are the unknowns, in alphabetical order. Every relation is invariant under
/// similarity, so all frames pose the same problem; they differ in where the
/// degenerate configurations (two points meeting) end up.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub struct Frame {
    pub origin: usize,
    pub unit: usize,
}

impl Frame {
    /// `A = (0,0)`, `B = (0,1)`, `C = (x0, x1)`, `D = (x2, x3)`.
    pub const AB: Frame = Frame { origin: 0, unit: 1 };
    /// `B = (0,0)`, `C = (0,1)`; keeps `B` and `C` apart.
    pub const BC: Frame = Frame { origin: 1, unit: 2 };
    /// `A = (0,0)`, `C = (0,1)`; keeps `A` and `C` apart.
    pub const AC: Frame = Frame { origin: 0, unit: 2 };
    /// `B = (0,0)`, `D = (0,1)`.
    pub const BD: Frame = Frame { origin: 1, unit: 3 };
    /// `A = (0,0)`, `D = (0,1)`.
    pub const AD: Frame = Frame { origin: 0, unit: 3 };
    /// `C = (0,0)`, `D = (0,1)`.
    pub const CD: Frame = Frame { origin: 2, unit: 3 };

    /// Frames tried in turn by [`solve_composition_cell`].
    pub const SEQUENCE: [Frame; 6] = [
        Frame::AB,
        Frame::BC,
        Frame::AC,
        Frame::BD,
        Frame::AD,
        Frame::CD,
    ];

    fn points(self) -> [AffinePoint; POINTS] {
        let mut pts = [AffinePoint::fixed(0.0, 0.0); POINTS];
        let mut next = 0;
        for (i, p) in pts.iter_mut().enumerate() {
            if i == self.unit {
                *p = AffinePoint::fixed(0.0, 1.0);
            } else if i != self.origin {
                *p = AffinePoint::new(Affine::var(next), Affine::var(next + 1));
                next += 2;
            }
        }
        pts
    }
}

/// Constraints for `AB:C = s1`, `BC:D = s2`, `AB:D = s3` in the
/// `A = (0,0)`, `B = (0,1)` frame.
pub fn composition_problem(
    labeling: &RegionLabeling,
    s1: RegionId,
    s2: RegionId,
    s3: RegionId,
) -> Result<Vec<QuadConstraint>, QfeasError> {
    composition_problem_in(labeling, s1, s2, s3, Frame::AB)
}

/// Same problem as [`composition_problem`] posed in `frame`.
pub fn composition_problem_in(
    labeling: &RegionLabeling,
    s1: RegionId,
    s2: RegionId,
    s3: RegionId,
    frame: Frame,
) -> Result<Vec<QuadConstraint>, QfeasError> {
    let [a, b, c, d] = frame.points();
    let mut out = region_constraints(labeling, s1, 4, a, b, c)?;
    out.extend(region_constraints(labeling, s3, 4, a, b, d)?);
    out.extend(region_constraints(labeling, s2, 4, b, c, d)?);
    Ok(out)
}

/// Outcome of one `(s1, s2, s3)` feasibility problem.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum CellOutcome {
    Feasible,
    Infeasible,
    BudgetExceeded,
}

/// Decides whether `s3` belongs in the entry for `(s1, s2)`.
///
/// The problem is posed in each of `frames` in turn, each with the full
/// rectangle budget of `cfg`, until one run is conclusive. Near a
/// configuration where two points coincide every predicate of a triple
/// through both of them vanishes, so no rectangle there can be pruned; a
/// frame pinning those two points apart moves that region to the box
/// boundary instead.
pub fn solve_composition_cell(
    labeling: &RegionLabeling,
    s1: RegionId,
    s2: RegionId,
    s3: RegionId,
    cfg: &SolverConfig,
    bound: f64,
    frames: &[Frame],
) -> Result<CellOutcome, QfeasError> {
    let bx = Rect::centered(4, bound)?;
    for &frame in frames {
        let problem = composition_problem_in(labeling, s1, s2, s3, frame)?;
        match solve(&problem, &bx, cfg) {
            Ok(r) if r.feasible => return Ok(CellOutcome::Feasible),
            Ok(_) => return Ok(CellOutcome::Infeasible),
            Err(QfeasError::BudgetExceeded(_)) => {}
            Err(e) => return Err(e),
        }
    }
    Ok(CellOutcome::BudgetExceeded)
}

/// Solves all 8000 feasibility problems in parallel. Problems that exhaust
/// the solver budget keep their state (over-approximation) and are listed in
/// `budget_exceeded`.
pub fn generate_composition_table(
    labeling: &RegionLabeling,
    cfg: &SolverConfig,
    bound: f64,
) -> Result<CompositionTable, QfeasError> {
    let triples: Vec<(RegionId, RegionId, RegionId)> = RegionId::all()
        .flat_map(|a| RegionId::all().flat_map(move |b| RegionId::all().map(move |c| (a, b, c))))
        .collect();
    let outcomes = triples
        .par_iter()
        .map(|&(a, b, c)| solve_composition_cell(labeling, a, b, c, cfg, bound, &Frame::SEQUENCE))
        .collect::<Result<Vec<_>, _>>()?;

    let mut entries = [[StateSet::EMPTY; REGION_COUNT]; REGION_COUNT];
    let mut budget_exceeded = Vec::new();
    for (&(a, b, c), outcome) in triples.iter().zip(outcomes) {
        match outcome {
            CellOutcome::Feasible => entries[a.index()][b.index()].insert(c),
            CellOutcome::BudgetExceeded => {
                entries[a.index()][b.index()].insert(c);
                budget_exceeded.push((a.get(), b.get(), c.get()));
            }
            CellOutcome::Infeasible => {}
        }
    }
    let meta = TableMeta {
        depth: cfg.max_depth,
        bound,
        labeling_checksum: labeling.checksum(),
    };
    let mut table = CompositionTable::from_entries(entries, meta);
    table.budget_exceeded = budget_exceeded;
    Ok(table)
}
