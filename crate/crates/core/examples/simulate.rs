//! One simulated mapping run: metrics after each image.

use qrm::edc::region_adjacency;
use qrm::operators::shipped_tables;
use qrm::sim::{gen_world, run_sim, to_csv, SimOptions, WorldConfig};

fn main() {
    let (table, labeling) = shipped_tables();
    let world = gen_world(
        &WorldConfig {
            landmarks: 12,
            images: 20,
            ..WorldConfig::default()
        },
        1,
    );
    let adjacency = region_adjacency(labeling, 500);
    let mut opts = SimOptions::default();
    opts.observe.n_nearest = 8;
    let run = run_sim(&world, labeling, table, &adjacency, &opts, 0).unwrap();
    print!("{}", to_csv(&run.rows).unwrap());
    eprintln!(
        "{} measurements, {} true states lost",
        run.measurements, run.truth_violations
    );
}
