//! Weighted RNG of a mapped world and a drive between two points that
//! hops from one landmark's Voronoi cell to the next.

use qrm::edc::{region_adjacency, Point2};
use qrm::nav::{brute_force_rng, estimate_rng, navigate, NavOptions};
use qrm::operators::shipped_tables;
use qrm::sim::{gen_world, run_sim, SimOptions, WorldConfig};

fn main() {
    let (table, labeling) = shipped_tables();
    let world = gen_world(
        &WorldConfig {
            landmarks: 10,
            images: 12,
            ..WorldConfig::default()
        },
        21,
    );
    let adjacency = region_adjacency(labeling, 500);
    let run = run_sim(
        &world,
        labeling,
        table,
        &adjacency,
        &SimOptions::default(),
        0,
    )
    .unwrap();

    let rng = estimate_rng(&run.map);
    println!(
        "estimated RNG (edge weight), total cost {:.3}",
        rng.total_cost()
    );
    print!("{}", rng.dump());
    println!("geometric RNG {:?}", brute_force_rng(&world.landmarks));

    let (start, goal) = (Point2::new(5.0, 5.0), Point2::new(95.0, 90.0));
    let traj = navigate(&world.landmarks, &rng, start, goal, &NavOptions::default()).unwrap();
    println!(
        "route {:?} cost {:.3}; {} steps, {:.1} units, ended at ({:.1}, {:.1})",
        traj.plan.landmarks,
        traj.plan.cost(),
        traj.points.len() - 1,
        traj.length(),
        traj.end().x,
        traj.end().y
    );
}
