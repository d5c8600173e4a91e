//! Camera observations of landmark triples and the EDC states they allow.
//!
//! The camera sits at the origin with landmark `A` at unit range along the
//! x axis, so `A = (1,0)`, `B = r (cos theta, sin theta)` and
//! `C = l (cos phi, sin phi)`. Bearings fix the directions; the unknown ranges
//! `l` and `r` are only known through their ordering against each other and
//! against `|A| = 1`. A state is kept when some `(l, r)` in `(0, 1000]^2`
//! places `C` in it.

use std::f64::consts::PI;

use thiserror::Error;

use crate::edc::{region_constraints, Point2, RegionId, RegionLabeling, StateSet, EPS_BOUNDARY};
use crate::qfeas::{solve, Affine, AffinePoint, QfeasError, QuadConstraint, Rect, SolverConfig};

pub type LandmarkId = u32;

/// Upper range bound of the measurement search box, in units of `|A|`.
pub const RANGE_BOUND: f64 = 1000.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MeasurementError {
    #[error("need at least 3 visible landmarks, have {0}")]
    TooFewLandmarks(usize),
    #[error("degenerate observation: {0}")]
    DegenerateObservation(String),
    #[error(transparent)]
    Solver(#[from] QfeasError),
}

/// Bearings and range order of one ordered triple `AB:C` seen from a camera.
#[derive(Clone, Debug, PartialEq)]
pub struct TripleObservation {
    pub ids: [LandmarkId; 3],
    /// Bearing of `B` relative to the direction of `A`, in `(-pi, pi]`.
    pub theta: f64,
    /// Bearing of `C` relative to the direction of `A`, in `(-pi, pi]`.
    pub phi: f64,
    /// Positions `0 = A, 1 = B, 2 = C`, nearest first.
    pub order: [u8; 3],
}

impl TripleObservation {
    /// True when landmark `i` is nearer the camera than landmark `j`.
    pub fn nearer(&self, i: u8, j: u8) -> bool {
        let rank = |x: u8| self.order.iter().position(|&o| o == x).unwrap_or(3);
        rank(i) < rank(j)
    }

    /// Observation of `ids` from a camera at `camera`, using true geometry.
    pub fn from_geometry(
        camera: Point2,
        ids: [LandmarkId; 3],
        pts: [Point2; 3],
    ) -> Result<Self, MeasurementError> {
        let d = pts.map(|p| p.dist(camera));
        if d.iter().any(|&x| !(x > 0.0)) {
            return Err(MeasurementError::DegenerateObservation(
                "landmark at the camera".into(),
            ));
        }
        let scale = d.iter().cloned().fold(0.0, f64::max);
        let mut order = [0u8, 1, 2];
        order.sort_by(|&i, &j| d[i as usize].total_cmp(&d[j as usize]));
        for w in order.windows(2) {
            if d[w[1] as usize] - d[w[0] as usize] <= EPS_BOUNDARY * scale {
                return Err(MeasurementError::DegenerateObservation(
                    "tied ranges".into(),
                ));
            }
        }
        let bearing = |p: Point2| (p.y - camera.y).atan2(p.x - camera.x);
        let base = bearing(pts[0]);
        Ok(Self {
            ids,
            theta: wrap_angle(bearing(pts[1]) - base),
            phi: wrap_angle(bearing(pts[2]) - base),
            order,
        })
    }
}

/// Wraps an angle into `(-pi, pi]`.
pub fn wrap_angle(a: f64) -> f64 {
    let mut x = a.rem_euclid(2.0 * PI);
    if x > PI {
        x -= 2.0 * PI;
    }
    x
}

/// States still possible for one ordered triple after a measurement.
#[derive(Clone, Debug, PartialEq)]
pub struct TripleMeasurement {
    pub ids: [LandmarkId; 3],
    pub states: StateSet,
    /// States kept only because the solver ran out of budget.
    pub unresolved: StateSet,
}

/// Range ordering as strict inequalities in `(l, r)`.
pub fn ordering_constraints(obs: &TripleObservation) -> Vec<QuadConstraint> {
    let lin = |b: [f64; 2], c: f64| {
        QuadConstraint::new(2, &[0.0; 4], &b, c).expect("2-d linear constraint")
    };
    let sign = |nearer: bool| if nearer { 1.0 } else { -1.0 };
    // (positions, coefficients of 1 - l, 1 - r, r - l), each < 0 when the first is nearer
    let a_c = sign(obs.nearer(0, 2));
    let a_b = sign(obs.nearer(0, 1));
    let b_c = sign(obs.nearer(1, 2));
    vec![
        lin([-a_c, 0.0], a_c),
        lin([0.0, -a_b], a_b),
        lin([-b_c, b_c], 0.0),
    ]
}

/// Region constraints for `C` relative to `A -> B` in the camera frame,
/// with `x = (l, r)`.
pub fn region_problem(
    obs: &TripleObservation,
    labeling: &RegionLabeling,
    region: RegionId,
) -> Result<Vec<QuadConstraint>, MeasurementError> {
    let (l, r) = (Affine::var(0), Affine::var(1));
    let a = AffinePoint::fixed(1.0, 0.0);
    let b = AffinePoint::new(r.scale(obs.theta.cos()), r.scale(obs.theta.sin()));
    let c = AffinePoint::new(l.scale(obs.phi.cos()), l.scale(obs.phi.sin()));
    let mut cs = region_constraints(labeling, region, 2, a, b, c)?;
    cs.extend(ordering_constraints(obs));
    Ok(cs)
}

fn check_bearings(obs: &TripleObservation) -> Result<(), MeasurementError> {
    for (name, x) in [
        ("theta", obs.theta),
        ("phi", obs.phi),
        ("theta - phi", obs.theta - obs.phi),
    ] {
        if !x.is_finite() || x.sin().abs() < EPS_BOUNDARY {
            return Err(MeasurementError::DegenerateObservation(format!(
                "{name} = {x} puts landmarks on one line"
            )));
        }
    }
    Ok(())
}

/// States of `AB:C` consistent with `obs`.
pub fn measure_triple(
    obs: &TripleObservation,
    labeling: &RegionLabeling,
    cfg: &SolverConfig,
) -> Result<TripleMeasurement, MeasurementError> {
    measure_triple_among(obs, labeling, cfg, StateSet::ALL)
}

/// Like [`measure_triple`] but only tests `candidates`; the rest are
/// reported as excluded.
pub fn measure_triple_among(
    obs: &TripleObservation,
    labeling: &RegionLabeling,
    cfg: &SolverConfig,
    candidates: StateSet,
) -> Result<TripleMeasurement, MeasurementError> {
    check_bearings(obs)?;
    let bx = Rect::new(&[0.0, 0.0], &[RANGE_BOUND, RANGE_BOUND])?;
    let mut states = StateSet::EMPTY;
    let mut unresolved = StateSet::EMPTY;
    for region in candidates.iter() {
        let problem = region_problem(obs, labeling, region)?;
        match solve(&problem, &bx, cfg) {
            Ok(r) if r.feasible => states.insert(region),
            Ok(_) => {}
            Err(QfeasError::BudgetExceeded(_)) => {
                states.insert(region);
                unresolved.insert(region);
            }
            Err(e) => return Err(e.into()),
        }
    }
    Ok(TripleMeasurement {
        ids: obs.ids,
        states,
        unresolved,
    })
}

/// What the simulated camera can see and which relations it reports.
#[derive(Clone, Debug, PartialEq)]
pub struct ObserveOptions {
    pub n_nearest: usize,
    pub max_range: Option<f64>,
    /// Report all three cyclic relations of each triple instead of one.
    pub measure_cyclic: bool,
}

impl Default for ObserveOptions {
    fn default() -> Self {
        Self {
            n_nearest: usize::MAX,
            max_range: None,
            measure_cyclic: true,
        }
    }
}

/// Observations of every triple among the nearest visible landmarks.
///
/// Triples are taken with ascending ids `i < j < k` as `ij:k`, plus `jk:i`
/// and `ki:j` when `measure_cyclic` is set. Observations with tied ranges or
/// collinear bearings are dropped.
pub fn observe_world(
    robot: Point2,
    landmarks: &[(LandmarkId, Point2)],
    opts: &ObserveOptions,
) -> Result<Vec<TripleObservation>, MeasurementError> {
    let mut visible: Vec<(f64, LandmarkId, Point2)> = landmarks
        .iter()
        .map(|&(id, p)| (p.dist(robot), id, p))
        .filter(|&(d, _, _)| opts.max_range.map_or(true, |m| d <= m))
        .collect();
    visible.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    visible.truncate(opts.n_nearest);
    if visible.len() < 3 {
        return Err(MeasurementError::TooFewLandmarks(visible.len()));
    }
    visible.sort_by_key(|v| v.1);

    let mut out = Vec::new();
    let n = visible.len();
    for i in 0..n {
        for j in i + 1..n {
            for k in j + 1..n {
                let (a, b, c) = (visible[i], visible[j], visible[k]);
                let mut rotations = vec![(a, b, c)];
                if opts.measure_cyclic {
                    rotations.extend([(b, c, a), (c, a, b)]);
                }
                for (x, y, z) in rotations {
                    let Ok(obs) =
                        TripleObservation::from_geometry(robot, [x.1, y.1, z.1], [x.2, y.2, z.2])
                    else {
                        continue;
                    };
                    if check_bearings(&obs).is_ok() {
                        out.push(obs);
                    }
                }
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::edc::derive_region_labels_with;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn p(x: f64, y: f64) -> Point2 {
        Point2::new(x, y)
    }

    #[test]
    fn ordering_inequalities() {
        // A nearest, then C, then B: 1 < l < r
        let obs = TripleObservation {
            ids: [1, 2, 3],
            theta: 1.0,
            phi: -1.0,
            order: [0, 2, 1],
        };
        let cs = ordering_constraints(&obs);
        let ok = [2.0, 3.0];
        assert!(cs.iter().all(|c| c.eval(&ok) < 0.0));
        for bad in [[0.5, 3.0], [3.0, 2.0], [2.0, 0.9]] {
            assert!(cs.iter().any(|c| c.eval(&bad) >= 0.0), "{bad:?}");
        }
    }

    #[test]
    fn geometry_round_trip() {
        let obs = TripleObservation::from_geometry(
            p(0.0, 0.0),
            [1, 2, 3],
            [p(2.0, 0.0), p(0.0, 3.0), p(-1.0, -1.0)],
        )
        .unwrap();
        assert!((obs.theta - PI / 2.0).abs() < 1e-12);
        assert!((obs.phi + 3.0 * PI / 4.0).abs() < 1e-12);
        assert_eq!(obs.order, [2, 0, 1]);
        assert!(TripleObservation::from_geometry(
            p(0.0, 0.0),
            [1, 2, 3],
            [p(1.0, 0.0), p(0.0, 1.0), p(3.0, 3.0)]
        )
        .is_err());
    }

    #[test]
    fn true_region_is_kept() {
        let labeling = derive_region_labels_with(300).unwrap();
        let cfg = SolverConfig::default();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let pts: [Point2; 4] =
                std::array::from_fn(|_| p(rng.gen_range(-10.0..10.0), rng.gen_range(-10.0..10.0)));
            let Ok(truth) = labeling.region_of_points(pts[1], pts[2], pts[3]) else {
                continue;
            };
            let Ok(obs) =
                TripleObservation::from_geometry(pts[0], [1, 2, 3], [pts[1], pts[2], pts[3]])
            else {
                continue;
            };
            let m = measure_triple(&obs, &labeling, &cfg).unwrap();
            assert!(m.states.contains(truth), "{truth} not in {}", m.states);
            assert!(m.states.len() < 20 && m.unresolved.is_empty());
        }
    }

    #[test]
    fn observation_counts() {
        let lm = [
            (1, p(0.0, 0.0)),
            (2, p(5.0, 1.0)),
            (3, p(2.0, 7.0)),
            (4, p(40.0, 40.0)),
        ];
        let opts = ObserveOptions {
            n_nearest: 3,
            ..Default::default()
        };
        let obs = observe_world(p(1.0, 2.0), &lm, &opts).unwrap();
        assert_eq!(obs.len(), 3);
        assert_eq!(obs[0].ids, [1, 2, 3]);
        assert_eq!(obs[1].ids, [2, 3, 1]);
        let single = ObserveOptions {
            measure_cyclic: false,
            ..ObserveOptions::default()
        };
        assert_eq!(observe_world(p(1.0, 2.0), &lm, &single).unwrap().len(), 4);
        let near = ObserveOptions {
            max_range: Some(10.0),
            ..ObserveOptions::default()
        };
        assert_eq!(
            observe_world(p(1.0, 2.0), &lm[..2], &near),
            Err(MeasurementError::TooFewLandmarks(2))
        );
    }
}
