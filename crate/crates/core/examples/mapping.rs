//! Fusing measurements into a qualitative map. Each relation is intersected
//! with what was measured and the change is propagated through the unary
//! operators and composition until nothing else shrinks.

use qrm::edc::Point2;
use qrm::measurement::{measure_triple, observe_world, ObserveOptions};
use qrm::operators::shipped_tables;
use qrm::qfeas::SolverConfig;
use qrm::qmap::QualMap;

fn main() {
    let (table, labeling) = shipped_tables();
    let landmarks = [
        (1, Point2::new(2.0, 3.0)),
        (2, Point2::new(9.0, 1.0)),
        (3, Point2::new(6.0, 8.0)),
        (4, Point2::new(12.0, 6.0)),
        (5, Point2::new(4.0, 11.0)),
    ];
    let cameras = [
        Point2::new(0.0, 0.0),
        Point2::new(14.0, 12.0),
        Point2::new(7.0, 4.5),
    ];
    let cfg = SolverConfig::with_depth(30);
    let mut map = QualMap::new(table.clone());
    for cam in cameras {
        for obs in observe_world(cam, &landmarks, &ObserveOptions::default()).unwrap() {
            let m = measure_triple(&obs, labeling, &cfg).unwrap();
            let stats = map.fuse(&m).unwrap();
            if stats.states_removed > 0 {
                let [i, j, k] = m.ids;
                println!(
                    "{i}{j}:{k} measured {{{}}}: {} states removed over {} relations",
                    m.states, stats.states_removed, stats.relations_changed
                );
            }
        }
        println!(
            "after image at ({}, {}): {} open states in {} edges",
            cam.x,
            cam.y,
            map.open_states(),
            map.edge_count()
        );
    }
    print!("{}", map.dump());
}
