use crate::edc::{RegionId, StateSet, REGION_COUNT};

const fn s(ids: &[u8]) -> StateSet {
    StateSet::from_ids(ids)
}

// Rows indexed by region of AB:C; columns BC:A, CA:B, BA:C.
const PRINTED: [[StateSet; 3]; REGION_COUNT] = [
    [s(&[17]), s(&[7]), s(&[20])],
    [s(&[18]), s(&[8]), s(&[19])],
    [s(&[19]), s(&[13]), s(&[18])],
    [s(&[20]), s(&[14]), s(&[17])],
    [s(&[12]), s(&[7]), s(&[16])],
    [s(&[11]), s(&[13]), s(&[15])],
    [s(&[1, 5]), s(&[12, 17]), s(&[14])],
    [s(&[2, 10]), s(&[15, 18]), s(&[13])],
    [s(&[16]), s(&[14]), s(&[12])],
    [s(&[15]), s(&[8]), s(&[11])],
    [s(&[13]), s(&[6]), s(&[10])],
    [s(&[7]), s(&[5]), s(&[9])],
    [s(&[3, 6]), s(&[11, 19]), s(&[8])],
    [s(&[4, 9]), s(&[16, 20]), s(&[7])],
    [s(&[8]), s(&[10]), s(&[6])],
    [s(&[14]), s(&[9]), s(&[5])],
    [s(&[7]), s(&[1]), s(&[4])],
    [s(&[8]), s(&[2]), s(&[3])],
    [s(&[13]), s(&[3]), s(&[2])],
    [s(&[14]), s(&[4]), s(&[1])],
];

static PRINTED_TABLES: UnaryTables = UnaryTables::from_rows(PRINTED);

/// The three unary EDC operators as per-region lookup tables.
///
/// `LEFT(AB:C) = BC:A`, `RIGHT(AB:C) = CA:B`, `INVERSE(AB:C) = BA:C`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UnaryTables {
    left: [StateSet; REGION_COUNT],
    right: [StateSet; REGION_COUNT],
    inverse: [StateSet; REGION_COUNT],
}

impl UnaryTables {
    const fn from_rows(rows: [[StateSet; 3]; REGION_COUNT]) -> Self {
        let mut left = [StateSet::EMPTY; REGION_COUNT];
        let mut right = [StateSet::EMPTY; REGION_COUNT];
        let mut inverse = [StateSet::EMPTY; REGION_COUNT];
        let mut i = 0;
        while i < REGION_COUNT {
            left[i] = rows[i][0];
            right[i] = rows[i][1];
            inverse[i] = rows[i][2];
            i += 1;
        }
        Self {
            left,
            right,
            inverse,
        }
    }

    pub fn new(
        left: [StateSet; REGION_COUNT],
        right: [StateSet; REGION_COUNT],
        inverse: [StateSet; REGION_COUNT],
    ) -> Self {
        Self {
            left,
            right,
            inverse,
        }
    }

    /// The published unary transformation table.
    pub fn printed() -> &'static UnaryTables {
        &PRINTED_TABLES
    }

    pub fn left(&self, r: RegionId) -> StateSet {
        self.left[r.index()]
    }

    pub fn right(&self, r: RegionId) -> StateSet {
        self.right[r.index()]
    }

    pub fn inverse(&self, r: RegionId) -> StateSet {
        self.inverse[r.index()]
    }

    pub fn apply_left(&self, s: StateSet) -> StateSet {
        s.iter()
            .fold(StateSet::EMPTY, |acc, r| acc | self.left[r.index()])
    }

    pub fn apply_right(&self, s: StateSet) -> StateSet {
        s.iter()
            .fold(StateSet::EMPTY, |acc, r| acc | self.right[r.index()])
    }

    pub fn apply_inverse(&self, s: StateSet) -> StateSet {
        s.iter()
            .fold(StateSet::EMPTY, |acc, r| acc | self.inverse[r.index()])
    }
}

/// `LEFT(AB:C) = BC:A` using the published table.
pub fn apply_left(s: StateSet) -> StateSet {
    PRINTED_TABLES.apply_left(s)
}

/// `RIGHT(AB:C) = CA:B` using the published table.
pub fn apply_right(s: StateSet) -> StateSet {
    PRINTED_TABLES.apply_right(s)
}

/// `INVERSE(AB:C) = BA:C` using the published table.
pub fn apply_inverse(s: StateSet) -> StateSet {
    PRINTED_TABLES.apply_inverse(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn worked_example_unary_steps() {
        assert_eq!(
            apply_left(StateSet::from_ids(&[6, 7])),
            StateSet::from_ids(&[1, 5, 11])
        );
        assert_eq!(
            apply_inverse(StateSet::from_ids(&[16])),
            StateSet::from_ids(&[5])
        );
    }

    #[test]
    fn inverse_is_an_involution_on_singletons() {
        for r in RegionId::all() {
            let once = apply_inverse(StateSet::singleton(r));
            assert!(once.is_singleton());
            assert_eq!(apply_inverse(once), StateSet::singleton(r));
        }
    }

    #[test]
    fn cyclic_operators_compose_as_expected() {
        // three left shifts return to the start; right is contained in two lefts
        for r in RegionId::all() {
            let one = StateSet::singleton(r);
            assert!(apply_left(apply_left(apply_left(one))).contains(r));
            assert!(apply_right(one).is_subset(apply_left(apply_left(one))));
        }
    }

    #[test]
    fn right_equals_conjugated_left() {
        // CA:B obtained directly or via INVERSE, LEFT, INVERSE
        for r in RegionId::all() {
            let one = StateSet::singleton(r);
            assert_eq!(
                apply_right(one),
                apply_inverse(apply_left(apply_inverse(one))),
                "region {r}"
            );
        }
    }

    #[test]
    fn only_lune_states_are_ambiguous() {
        for r in RegionId::all() {
            let ambiguous = apply_left(StateSet::singleton(r)).len() > 1
                || apply_right(StateSet::singleton(r)).len() > 1;
            assert_eq!(ambiguous, crate::edc::LUNE.contains(r));
        }
    }

    proptest! {
        #[test]
        fn operators_are_unions_of_images(bits in 1u32..(1 << 20)) {
            let set = StateSet::from_bits(bits);
            let expected = set.iter().fold(StateSet::EMPTY, |a, r| a | apply_left(StateSet::singleton(r)));
            prop_assert_eq!(apply_left(set), expected);
            // monotone under inclusion
            let sub = StateSet::from_bits(bits & 0x5_5555);
            prop_assert!(apply_right(sub).is_subset(apply_right(set)));
            prop_assert_eq!(apply_inverse(apply_inverse(set)), set);
        }
    }
}
