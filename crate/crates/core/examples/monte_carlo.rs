//! A small Monte Carlo campaign comparing how many landmarks each image
//! sees. Prints the per-step means as CSV.

use qrm::edc::region_adjacency;
use qrm::operators::shipped_tables;
use qrm::sim::{run_mc, to_csv, CampaignConfig, SimOptions, Timing, WorldConfig};

fn main() {
    let (table, labeling) = shipped_tables();
    let adjacency = region_adjacency(labeling, 500);
    let campaign = CampaignConfig {
        runs: 4,
        world: WorldConfig {
            landmarks: 10,
            images: 15,
            ..WorldConfig::default()
        },
        n_nearest: vec![4, 6, 10],
        seed: 2,
        sim: SimOptions {
            timing: Timing::Off,
            ..SimOptions::default()
        },
    };
    let mc = run_mc(&campaign, labeling, table, &adjacency).unwrap();
    print!("{}", to_csv(&mc.aggregate).unwrap());
}
