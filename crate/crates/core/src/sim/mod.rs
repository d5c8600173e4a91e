//! Simulated mapping runs and Monte Carlo campaigns.

mod world;

use std::collections::HashMap;
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::edc::{EdcError, RegionAdjacency, RegionId, RegionLabeling, StateSet, REGION_COUNT};
use crate::measurement::{
    measure_triple_among, observe_world, LandmarkId, MeasurementError, ObserveOptions,
};
use crate::nav::estimate_rng;
use crate::operators::CompositionTable;
use crate::qfeas::SolverConfig;
use crate::qmap::{MapError, QualMap, INCORRECT_PER_EDGE};

pub use world::{gen_world, locus_distances, mars_yard, World, WorldConfig};

#[derive(Debug, Error)]
pub enum SimError {
    #[error("world file line {line}: {reason}")]
    WorldFile { line: usize, reason: String },
    #[error("landmark {0} is not in the world")]
    UnknownLandmark(LandmarkId),
    #[error(transparent)]
    Edc(#[from] EdcError),
    #[error(transparent)]
    Measurement(#[from] MeasurementError),
    #[error("step {step}: {source}\n{dump}")]
    Map {
        step: usize,
        source: MapError,
        dump: String,
    },
}

/// How `update_ms` is filled in.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum Timing {
    Wall,
    /// Always 0, so output depends only on the inputs.
    Off,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SimOptions {
    pub observe: ObserveOptions,
    pub solver: SolverConfig,
    pub timing: Timing,
}

impl Default for SimOptions {
    fn default() -> Self {
        Self {
            observe: ObserveOptions::default(),
            solver: SolverConfig::default(),
            timing: Timing::Wall,
        }
    }
}

/// Map quality after one imaging position.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MetricsRow {
    pub step: usize,
    pub n: usize,
    pub run: usize,
    /// Incorrect states removed, as a percentage of all incorrect states of
    /// the final map.
    pub removed_pct: f64,
    /// Edges with all three relations down to one state, as a percentage
    /// of the final edge count.
    pub constrained_pct: f64,
    /// Open states not equal or adjacent to the true one, as a percentage
    /// of all open states.
    pub nonadj_pct: f64,
    pub rng_cost: f64,
    pub update_ms: f64,
}

pub struct SimRun {
    pub rows: Vec<MetricsRow>,
    pub map: QualMap,
    pub measurements: usize,
    /// Stored relations that lost their true state, summed over steps.
    pub truth_violations: usize,
}

// per-step raw counts; percentages need the final edge count
struct StepCounts {
    removed: usize,
    constrained: usize,
    nonadj: usize,
    open: usize,
    rng_cost: f64,
    update_ms: f64,
}

struct Truth<'a> {
    world: &'a World,
    labeling: &'a RegionLabeling,
    cache: HashMap<[LandmarkId; 3], [RegionId; 3]>,
}

impl Truth<'_> {
    fn edge(&mut self, key: [LandmarkId; 3]) -> Result<[RegionId; 3], SimError> {
        if let Some(t) = self.cache.get(&key) {
            return Ok(*t);
        }
        let [i, j, k] = key;
        let t = [
            self.world.truth(self.labeling, [i, j, k])?,
            self.world.truth(self.labeling, [j, k, i])?,
            self.world.truth(self.labeling, [k, i, j])?,
        ];
        self.cache.insert(key, t);
        Ok(t)
    }
}

/// Images the world at each waypoint in turn, measuring every visible
/// triple and fusing it into one map.
///
/// Only states still open in the map are tested, which gives the same map as
/// testing all 20. Errors on a map contradiction with a dump of the map.
pub fn run_sim(
    world: &World,
    labeling: &RegionLabeling,
    table: &CompositionTable,
    adjacency: &RegionAdjacency,
    opts: &SimOptions,
    run: usize,
) -> Result<SimRun, SimError> {
    let mut map = QualMap::new(table.clone());
    let mut truth = Truth {
        world,
        labeling,
        cache: HashMap::new(),
    };
    let mut counts = Vec::with_capacity(world.waypoints.len());
    let mut measurements = 0;
    let mut truth_violations = 0;

    for (step, &wp) in world.waypoints.iter().enumerate() {
        let started = Instant::now();
        let observations = match observe_world(wp, &world.landmarks, &opts.observe) {
            Ok(o) => o,
            Err(MeasurementError::TooFewLandmarks(_)) => Vec::new(),
            Err(e) => return Err(e.into()),
        };
        for obs in &observations {
            let open = map.get_relation(obs.ids).unwrap_or(StateSet::ALL);
            if open.is_singleton() {
                continue;
            }
            let m = measure_triple_among(obs, labeling, &opts.solver, open)?;
            measurements += 1;
            map.fuse(&m).map_err(|source| SimError::Map {
                step: step + 1,
                source,
                dump: map.dump(),
            })?;
        }
        let update_ms = match opts.timing {
            Timing::Wall => started.elapsed().as_secs_f64() * 1e3,
            Timing::Off => 0.0,
        };

        let mut c = StepCounts {
            removed: 0,
            constrained: 0,
            nonadj: 0,
            open: 0,
            rng_cost: 0.0,
            update_ms,
        };
        for (key, sets) in map.edges() {
            let t = truth.edge(key)?;
            for (s, t) in sets.iter().zip(t) {
                if !s.contains(t) {
                    truth_violations += 1;
                }
                c.removed += REGION_COUNT - s.len();
                c.open += s.len();
                c.nonadj += s
                    .difference(adjacency.neighbors(t))
                    .difference(StateSet::singleton(t))
                    .len();
            }
            if sets.iter().all(|s| s.is_singleton()) {
                c.constrained += 1;
            }
        }
        c.rng_cost = estimate_rng(&map).total_cost();
        counts.push(c);
    }

    let n = opts.observe.n_nearest.min(world.landmarks.len());
    let edges = map.edge_count().max(1) as f64;
    let rows = counts
        .into_iter()
        .enumerate()
        .map(|(i, c)| MetricsRow {
            step: i + 1,
            n,
            run,
            removed_pct: 100.0 * c.removed as f64 / (edges * INCORRECT_PER_EDGE as f64),
            constrained_pct: 100.0 * c.constrained as f64 / edges,
            nonadj_pct: if c.open == 0 {
                0.0
            } else {
                100.0 * c.nonadj as f64 / c.open as f64
            },
            rng_cost: c.rng_cost,
            update_ms: c.update_ms,
        })
        .collect();
    Ok(SimRun {
        rows,
        map,
        measurements,
        truth_violations,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct CampaignConfig {
    pub runs: usize,
    pub world: WorldConfig,
    pub n_nearest: Vec<usize>,
    pub seed: u64,
    pub sim: SimOptions,
}

/// Mean and sample standard deviation of each metric per `(n, step)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AggregateRow {
    pub n: usize,
    pub step: usize,
    pub runs: usize,
    pub removed_pct_mean: f64,
    pub removed_pct_std: f64,
    pub constrained_pct_mean: f64,
    pub constrained_pct_std: f64,
    pub nonadj_pct_mean: f64,
    pub nonadj_pct_std: f64,
    pub rng_cost_mean: f64,
    pub rng_cost_std: f64,
    pub update_ms_mean: f64,
    pub update_ms_std: f64,
}

pub struct Campaign {
    pub rows: Vec<MetricsRow>,
    pub aggregate: Vec<AggregateRow>,
    pub truth_violations: usize,
}

/// Seed of the world for run `run`; every `n` sees the same worlds.
pub fn run_seed(seed: u64, run: usize) -> u64 {
    seed ^ (run as u64 + 1).wrapping_mul(0x9e37_79b9_7f4a_7c15)
}

fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Runs every `(n, run)` pair in parallel and aggregates per step.
pub fn run_mc(
    campaign: &CampaignConfig,
    labeling: &RegionLabeling,
    table: &CompositionTable,
    adjacency: &RegionAdjacency,
) -> Result<Campaign, SimError> {
    let jobs: Vec<(usize, usize)> = campaign
        .n_nearest
        .iter()
        .flat_map(|&n| (0..campaign.runs).map(move |r| (n, r)))
        .collect();
    let results = jobs
        .par_iter()
        .map(|&(n, r)| {
            let world = gen_world(&campaign.world, run_seed(campaign.seed, r));
            let mut opts = campaign.sim.clone();
            opts.observe.n_nearest = n;
            run_sim(&world, labeling, table, adjacency, &opts, r)
        })
        .collect::<Result<Vec<_>, _>>()?;

    let truth_violations = results.iter().map(|r| r.truth_violations).sum();
    let rows: Vec<MetricsRow> = results.into_iter().flat_map(|r| r.rows).collect();
    let mut aggregate = Vec::new();
    for &n in &campaign.n_nearest {
        let n_eff = n.min(campaign.world.landmarks);
        for step in 1..=campaign.world.images {
            let sel: Vec<&MetricsRow> = rows
                .iter()
                .filter(|r| r.n == n_eff && r.step == step)
                .collect();
            if sel.is_empty() {
                continue;
            }
            let col =
                |f: fn(&MetricsRow) -> f64| mean_std(&sel.iter().map(|r| f(r)).collect::<Vec<_>>());
            let (removed_pct_mean, removed_pct_std) = col(|r| r.removed_pct);
            let (constrained_pct_mean, constrained_pct_std) = col(|r| r.constrained_pct);
            let (nonadj_pct_mean, nonadj_pct_std) = col(|r| r.nonadj_pct);
            let (rng_cost_mean, rng_cost_std) = col(|r| r.rng_cost);
            let (update_ms_mean, update_ms_std) = col(|r| r.update_ms);
            aggregate.push(AggregateRow {
                n: n_eff,
                step,
                runs: sel.len(),
                removed_pct_mean,
                removed_pct_std,
                constrained_pct_mean,
                constrained_pct_std,
                nonadj_pct_mean,
                nonadj_pct_std,
                rng_cost_mean,
                rng_cost_std,
                update_ms_mean,
                update_ms_std,
            });
        }
    }
    Ok(Campaign {
        rows,
        aggregate,
        truth_violations,
    })
}

/// Serializes rows as CSV with a header.
pub fn to_csv<T: Serialize>(rows: &[T]) -> Result<String, csv::Error> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r)?;
    }
    let bytes = w.into_inner().map_err(|e| e.into_error())?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stats() {
        let (m, s) = mean_std(&[1.0, 2.0, 3.0]);
        assert_eq!(m, 2.0);
        assert!((s - 1.0).abs() < 1e-12);
        assert_eq!(mean_std(&[4.0]), (4.0, 0.0));
    }

    #[test]
    fn csv_header() {
        let row = MetricsRow {
            step: 1,
            n: 5,
            run: 0,
            removed_pct: 50.0,
            constrained_pct: 0.0,
            nonadj_pct: 10.0,
            rng_cost: 1.5,
            update_ms: 0.0,
        };
        let s = to_csv(&[row]).unwrap();
        assert!(s.starts_with(
            "step,n,run,removed_pct,constrained_pct,nonadj_pct,rng_cost,update_ms\n1,5,0,50.0,"
        ));
    }
}
