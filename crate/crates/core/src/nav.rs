//! Relative neighbourhood graph estimates and Voronoi-cell navigation.
//!
//! Landmarks `i` and `j` are RNG neighbours when no third landmark lies in
//! the lune of `ij`, the EDC regions 7, 8, 13 and 14. From a qualitative map
//! each candidate edge gets a weight: the fraction of open states of every
//! `ij:k` that fall in the lune, so a weight of zero means no landmark can
//! still block the edge.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;

use petgraph::algo::astar;
use petgraph::graph::{NodeIndex, UnGraph};
use thiserror::Error;

use crate::edc::{Point2, LUNE};
use crate::measurement::LandmarkId;
use crate::qmap::QualMap;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NavError {
    #[error("landmark {0} is not in the graph")]
    UnknownLandmark(LandmarkId),
    #[error("no route from {0} to {1}")]
    NoPath(LandmarkId, LandmarkId),
    #[error("no landmarks")]
    NoLandmarks,
    #[error("did not reach the cell of landmark {target} within {steps} steps")]
    StuckDetected { target: LandmarkId, steps: usize },
}

/// Candidate RNG edges with their conflict weights.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct RngEstimate {
    pub nodes: Vec<LandmarkId>,
    /// `(i, j)` with `i < j`.
    pub edges: BTreeMap<(LandmarkId, LandmarkId), f64>,
}

impl RngEstimate {
    pub fn total_cost(&self) -> f64 {
        self.edges.values().sum()
    }

    /// Edges no remaining state can block.
    pub fn certain_edges(&self) -> Vec<(LandmarkId, LandmarkId)> {
        self.edges
            .iter()
            .filter(|(_, &w)| w == 0.0)
            .map(|(&e, _)| e)
            .collect()
    }

    /// One `i j weight` line per edge.
    pub fn dump(&self) -> String {
        let mut s = String::new();
        for (&(i, j), w) in &self.edges {
            let _ = writeln!(s, "{i} {j} {w}");
        }
        s
    }
}

/// Weighs every landmark pair of `map`. An edge is dropped as soon as some
/// third landmark is certainly in its lune; otherwise its weight is the sum
/// over third landmarks of the lune share of open states, divided by the
/// node count.
pub fn estimate_rng(map: &QualMap) -> RngEstimate {
    let nodes: Vec<LandmarkId> = map.nodes().collect();
    let n = nodes.len();
    let mut edges = BTreeMap::new();
    for (x, &i) in nodes.iter().enumerate() {
        'pairs: for &j in &nodes[x + 1..] {
            let mut w = 0.0;
            for &k in &nodes {
                if k == i || k == j {
                    continue;
                }
                let Ok(open) = map.get_relation([i, j, k]) else {
                    continue;
                };
                let conflicts = open.intersection(LUNE).len();
                if conflicts == open.len() {
                    continue 'pairs;
                }
                w += conflicts as f64 / open.len() as f64;
            }
            edges.insert((i, j), w / n as f64);
        }
    }
    RngEstimate { nodes, edges }
}

/// Geometric RNG of a point set, `(i, j)` with `i < j`.
pub fn brute_force_rng(landmarks: &[(LandmarkId, Point2)]) -> Vec<(LandmarkId, LandmarkId)> {
    let mut out = Vec::new();
    for (x, &(i, pi)) in landmarks.iter().enumerate() {
        for &(j, pj) in &landmarks[x + 1..] {
            let d = pi.dist(pj);
            let blocked = landmarks
                .iter()
                .any(|&(k, pk)| k != i && k != j && pk.dist(pi).max(pk.dist(pj)) < d);
            if !blocked {
                out.push((i.min(j), i.max(j)));
            }
        }
    }
    out.sort_unstable();
    out
}

/// A landmark route and the cost of each hop.
#[derive(Clone, Debug, PartialEq)]
pub struct RoutePlan {
    pub landmarks: Vec<LandmarkId>,
    pub hop_costs: Vec<f64>,
}

impl RoutePlan {
    pub fn cost(&self) -> f64 {
        self.hop_costs.iter().sum()
    }
}

/// Cheapest route under hop cost `1 + lambda * w`.
pub fn plan_route(
    rng: &RngEstimate,
    from: LandmarkId,
    to: LandmarkId,
    lambda: f64,
) -> Result<RoutePlan, NavError> {
    let mut g = UnGraph::<LandmarkId, f64>::new_undirected();
    let idx: HashMap<LandmarkId, NodeIndex> =
        rng.nodes.iter().map(|&id| (id, g.add_node(id))).collect();
    for (&(i, j), &w) in &rng.edges {
        g.add_edge(idx[&i], idx[&j], 1.0 + lambda * w);
    }
    let s = *idx.get(&from).ok_or(NavError::UnknownLandmark(from))?;
    let e = *idx.get(&to).ok_or(NavError::UnknownLandmark(to))?;
    let (_, path) = astar(&g, s, |n| n == e, |edge| *edge.weight(), |_| 0.0)
        .ok_or(NavError::NoPath(from, to))?;
    let hop_costs = path
        .windows(2)
        .map(|w| {
            *g.edge_weight(g.find_edge(w[0], w[1]).expect("path edge"))
                .expect("weight")
        })
        .collect();
    Ok(RoutePlan {
        landmarks: path.into_iter().map(|n| g[n]).collect(),
        hop_costs,
    })
}

/// The landmark whose Voronoi cell contains `p` (ties to the lower id).
pub fn nearest_landmark(landmarks: &[(LandmarkId, Point2)], p: Point2) -> Option<LandmarkId> {
    landmarks
        .iter()
        .min_by(|a, b| a.1.dist(p).total_cmp(&b.1.dist(p)).then(a.0.cmp(&b.0)))
        .map(|l| l.0)
}

#[derive(Clone, Debug, PartialEq)]
pub struct NavOptions {
    pub step_size: f64,
    /// Steps allowed per hop before giving up.
    pub max_steps_per_hop: usize,
    pub lambda: f64,
}

impl Default for NavOptions {
    fn default() -> Self {
        Self {
            step_size: 0.5,
            max_steps_per_hop: 10_000,
            lambda: 1.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrajectoryPoint {
    pub step: usize,
    pub position: Point2,
    pub target: LandmarkId,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub plan: RoutePlan,
    pub points: Vec<TrajectoryPoint>,
}

impl Trajectory {
    pub fn length(&self) -> f64 {
        self.points
            .windows(2)
            .map(|w| w[0].position.dist(w[1].position))
            .sum()
    }

    pub fn end(&self) -> Point2 {
        self.points
            .last()
            .expect("trajectory has a start point")
            .position
    }

    /// `step,x,y,target` rows with a header.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("step,x,y,target\n");
        for p in &self.points {
            let _ = writeln!(
                s,
                "{},{},{},{}",
                p.step, p.position.x, p.position.y, p.target
            );
        }
        s
    }
}

/// Hops between Voronoi cells from `start` to the cell of the landmark
/// nearest `goal`. The robot drives straight at the current target landmark
/// until that landmark becomes the nearest one, then moves on to the next.
/// Landmark positions are used only to simulate motion and the range
/// ordering the robot would sense.
pub fn navigate(
    landmarks: &[(LandmarkId, Point2)],
    rng: &RngEstimate,
    start: Point2,
    goal: Point2,
    opts: &NavOptions,
) -> Result<Trajectory, NavError> {
    let from = nearest_landmark(landmarks, start).ok_or(NavError::NoLandmarks)?;
    let to = nearest_landmark(landmarks, goal).ok_or(NavError::NoLandmarks)?;
    let plan = plan_route(rng, from, to, opts.lambda)?;
    let pos_of: HashMap<LandmarkId, Point2> = landmarks.iter().copied().collect();

    let mut pos = start;
    let mut step = 0;
    let mut points = vec![TrajectoryPoint {
        step,
        position: pos,
        target: from,
    }];
    for &target in &plan.landmarks {
        let goal_pt = pos_of[&target];
        let mut taken = 0;
        while nearest_landmark(landmarks, pos) != Some(target) {
            if taken == opts.max_steps_per_hop {
                return Err(NavError::StuckDetected {
                    target,
                    steps: taken,
                });
            }
            let d = pos.dist(goal_pt);
            let t = (opts.step_size / d).min(1.0);
            pos = Point2::new(
                pos.x + t * (goal_pt.x - pos.x),
                pos.y + t * (goal_pt.y - pos.y),
            );
            taken += 1;
            step += 1;
            points.push(TrajectoryPoint {
                step,
                position: pos,
                target,
            });
        }
    }
    Ok(Trajectory { plan, points })
}
