use qrm::edc::region_adjacency;
use qrm::measurement::LandmarkId;
use qrm::operators::{apply_left, apply_right, shipped_tables};
use qrm::qmap::QualMap;
use qrm::sim::{gen_world, run_sim, SimOptions, Timing, WorldConfig};

fn simulated_map(seed: u64, n_nearest: usize) -> (qrm::sim::World, QualMap) {
    let (table, labeling) = shipped_tables();
    let world = gen_world(
        &WorldConfig {
            landmarks: 10,
            images: 10,
            ..WorldConfig::default()
        },
        seed,
    );
    let mut opts = SimOptions {
        timing: Timing::Off,
        ..SimOptions::default()
    };
    opts.observe.n_nearest = n_nearest;
    let run = run_sim(
        &world,
        labeling,
        table,
        &region_adjacency(labeling, 200),
        &opts,
        0,
    )
    .unwrap();
    assert_eq!(run.truth_violations, 0);
    (world, run.map)
}

#[test]
fn propagated_map_is_path_consistent() {
    let (_, map) = simulated_map(31, 6);
    let table = map.table();
    let nodes: Vec<LandmarkId> = map.nodes().collect();
    let get = |r: [LandmarkId; 3]| map.get_relation(r).unwrap();
    for &p in &nodes {
        for &q in &nodes {
            for &r in &nodes {
                if p == q || q == r || p == r {
                    continue;
                }
                let pq_r = get([p, q, r]);
                assert!(get([q, r, p]).is_subset(apply_left(pq_r)));
                assert!(get([r, p, q]).is_subset(apply_right(pq_r)));
                for &x in &nodes {
                    if [p, q, r].contains(&x) {
                        continue;
                    }
                    let implied = table.compose(pq_r, get([q, r, x]));
                    assert!(
                        get([p, q, x]).is_subset(implied),
                        "{p}{q}:{x} not tightened by {p}{q}:{r} and {q}{r}:{x}"
                    );
                }
            }
        }
    }
}

#[test]
fn map_holds_the_truth_and_reloads() {
    let (_, labeling) = shipped_tables();
    let (world, map) = simulated_map(32, usize::MAX);
    for (key, sets) in map.edges() {
        let [i, j, k] = key;
        for (rel, s) in [[i, j, k], [j, k, i], [k, i, j]].into_iter().zip(sets) {
            assert!(s.contains(world.truth(labeling, rel).unwrap()));
        }
    }
    let back = QualMap::load(map.table().clone(), &map.dump()).unwrap();
    assert_eq!(back.dump(), map.dump());
}

#[test]
fn simulation_is_reproducible() {
    let a = simulated_map(33, 5).1.dump();
    let b = simulated_map(33, 5).1.dump();
    assert_eq!(a, b);
}
