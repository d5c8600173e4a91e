//! A rover loop through a rock field: it maps the 30 rocks while seeing
//! only the 8 nearest from each stop, then drives across the yard.

use qrm::edc::{region_adjacency, Point2};
use qrm::nav::{estimate_rng, navigate, NavOptions};
use qrm::operators::shipped_tables;
use qrm::sim::{mars_yard, run_sim, SimOptions};

fn main() {
    let (table, labeling) = shipped_tables();
    let yard = mars_yard();
    let adjacency = region_adjacency(labeling, 500);
    let mut opts = SimOptions::default();
    opts.observe.n_nearest = 8;
    let run = run_sim(&yard, labeling, table, &adjacency, &opts, 0).unwrap();
    for r in run.rows.iter().step_by(8) {
        println!(
            "stop {:>2}: {:5.1}% wrong states removed, {:5.1}% edges pinned, rng cost {:.3}",
            r.step, r.removed_pct, r.constrained_pct, r.rng_cost
        );
    }
    let last = run.rows.last().unwrap();
    println!(
        "stop {:>2}: {:5.1}% wrong states removed, {} true states lost",
        last.step, last.removed_pct, run.truth_violations
    );

    let rng = estimate_rng(&run.map);
    let traj = navigate(
        &yard.landmarks,
        &rng,
        Point2::new(1.0, 1.0),
        Point2::new(19.0, 19.0),
        &NavOptions::default(),
    )
    .unwrap();
    println!(
        "drive via rocks {:?}: {} steps, {:.1} m",
        traj.plan.landmarks,
        traj.points.len() - 1,
        traj.length()
    );
}
