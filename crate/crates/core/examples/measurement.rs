//! One camera image of three landmarks: bearings and a range ordering, and
//! the EDC regions of the relation that they leave open.

use qrm::edc::Point2;
use qrm::measurement::{measure_triple, observe_world, ObserveOptions, TripleObservation};
use qrm::operators::shipped_tables;
use qrm::qfeas::SolverConfig;

fn main() {
    let (_, labeling) = shipped_tables();
    let camera = Point2::new(0.0, 0.0);
    let pts = [
        Point2::new(4.0, 1.0),
        Point2::new(6.0, 5.0),
        Point2::new(1.0, 7.0),
    ];
    let obs = TripleObservation::from_geometry(camera, [1, 2, 3], pts).unwrap();
    println!(
        "bearing of B {:.3} rad, of C {:.3} rad, nearest first {:?}",
        obs.theta, obs.phi, obs.order
    );

    let cfg = SolverConfig::with_depth(30);
    let m = measure_triple(&obs, labeling, &cfg).unwrap();
    let truth = labeling.region_of_points(pts[0], pts[1], pts[2]).unwrap();
    println!("12:3 in {{{}}}, true region {truth}", m.states);

    let landmarks: Vec<_> = (1..)
        .zip(pts)
        .chain([(4, Point2::new(-3.0, 4.0))])
        .collect();
    for obs in observe_world(camera, &landmarks, &ObserveOptions::default()).unwrap() {
        let m = measure_triple(&obs, labeling, &cfg).unwrap();
        let [i, j, k] = obs.ids;
        println!("{i}{j}:{k} in {{{}}}", m.states);
    }
}
