//! Composition with the shipped table: the entries fixed by hand, a chained
//! inference, and one cell re-solved from scratch.

use qrm::edc::{RegionId, StateSet};
use qrm::operators::{
    apply_inverse, apply_left, shipped_tables, solve_composition_cell, Frame, COMPOSITION_ANCHORS,
};
use qrm::qfeas::SolverConfig;

fn main() {
    let (table, labeling) = shipped_tables();
    println!(
        "table: depth {}, bound {}",
        table.meta.depth, table.meta.bound
    );
    for (s1, s2, _) in COMPOSITION_ANCHORS {
        let entry = table.entry(RegionId::new(s1).unwrap(), RegionId::new(s2).unwrap());
        println!("compose({s1}, {s2}) = {{{entry}}}");
    }

    // AB:C in {6,7} and DB:C = 16 give AC:D through a left turn and an inverse
    let ab_c = StateSet::from_ids(&[6, 7]);
    let db_c = StateSet::from_ids(&[16]);
    let out = table.compose(apply_left(ab_c), apply_inverse(db_c));
    println!("compose(left({{{ab_c}}}), inverse({{{db_c}}})) = {{{out}}}");

    let cfg = SolverConfig {
        max_depth: 60,
        max_rectangles: 50_000,
        ..SolverConfig::default()
    };
    let [s1, s2] = [RegionId::new(9).unwrap(), RegionId::new(10).unwrap()];
    let entry = table.entry(s1, s2);
    let inside = entry.iter().next().unwrap();
    let outside = RegionId::all().find(|r| !entry.contains(*r)).unwrap();
    for s3 in [inside, outside] {
        let outcome =
            solve_composition_cell(labeling, s1, s2, s3, &cfg, 1000.0, &Frame::SEQUENCE).unwrap();
        println!(
            "AB:C = {s1}, BC:D = {s2}, AB:D = {s3}: {outcome:?} (table says {})",
            table.entry(s1, s2).contains(s3)
        );
    }
}
