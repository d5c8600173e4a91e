use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use qrm::edc::{derive_region_labels, Point2, RegionId, StateSet};
use qrm::operators::{apply_inverse, check_anchors, format_table, parse_table, shipped_tables};

const SHIPPED: &str = include_str!("../data/edc_tables.txt");

#[test]
fn shipped_labeling_is_the_derived_one() {
    let (_, labeling) = shipped_tables();
    assert_eq!(*labeling, derive_region_labels().unwrap());
}

#[test]
fn shipped_file_is_canonical() {
    let (table, labeling) = shipped_tables();
    assert_eq!(format_table(table, labeling), SHIPPED);
    let (again, _) = parse_table(SHIPPED).unwrap();
    assert_eq!(&again, table);
    check_anchors(table).unwrap();
    assert!(table.budget_exceeded.is_empty());
}

#[test]
fn every_entry_is_nonempty_and_sampled_entries_are_covered() {
    let (table, labeling) = shipped_tables();
    let mut seen = [[StateSet::EMPTY; 20]; 20];
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut pt = |s: f64| Point2::new(rng.gen_range(-s..s), rng.gen_range(-s..s));
    for n in 0..200_000 {
        // mix of scales so near and far configurations both appear
        let s = [1.0, 10.0, 100.0][n % 3];
        let (a, b, c, d) = (pt(1.0), pt(1.0), pt(s), pt(s));
        let (Ok(s1), Ok(s2), Ok(s3)) = (
            labeling.region_of_points(a, b, c),
            labeling.region_of_points(b, c, d),
            labeling.region_of_points(a, b, d),
        ) else {
            continue;
        };
        seen[s1.index()][s2.index()].insert(s3);
    }
    for s1 in RegionId::all() {
        for s2 in RegionId::all() {
            let entry = table.entry(s1, s2);
            assert!(!entry.is_empty());
            let sampled = seen[s1.index()][s2.index()];
            assert!(
                sampled.is_subset(entry),
                "({s1}, {s2}): sampled {sampled} not in {entry}"
            );
        }
    }
}

#[test]
fn compose_is_union_of_entries() {
    let (table, _) = shipped_tables();
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..500 {
        let a = StateSet::from_bits(rng.gen_range(1..1 << 20));
        let b = StateSet::from_bits(rng.gen_range(1..1 << 20));
        let mut expected = StateSet::EMPTY;
        for s1 in a.iter() {
            for s2 in b.iter() {
                expected = expected.union(table.entry(s1, s2));
            }
        }
        assert_eq!(table.compose(a, b), expected);
    }
    assert_eq!(
        table.compose(StateSet::EMPTY, StateSet::ALL),
        StateSet::EMPTY
    );
}

#[test]
fn inverse_is_an_involution() {
    for r in RegionId::all() {
        let s = StateSet::singleton(r);
        assert!(apply_inverse(apply_inverse(s)).contains(r));
    }
}
