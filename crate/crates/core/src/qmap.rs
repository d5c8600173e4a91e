//! Qualitative map: a 3-uniform hypergraph over landmarks.
//!
//! Each unordered triple `{i < j < k}` owns one edge holding the state sets
//! of its three cyclic relations `ij:k`, `jk:i` and `ki:j`. The reversed
//! relations are their inverses and are never stored. New measurements are
//! intersected in and the change is propagated to a fixed point through the
//! unary frame changes and the composition table.

use std::collections::{BTreeSet, HashMap, HashSet, VecDeque};
use std::fmt::Write as _;
use std::time::{Duration, Instant};

use thiserror::Error;

use crate::edc::{StateSet, REGION_COUNT};
use crate::measurement::{LandmarkId, TripleMeasurement};
use crate::operators::{apply_inverse, apply_left, apply_right, CompositionTable};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MapError {
    #[error("no edge for landmarks {0:?}")]
    MissingEdge([LandmarkId; 3]),
    #[error("relation {0:?} needs three distinct landmarks")]
    RepeatedLandmark([LandmarkId; 3]),
    #[error("contradiction on {relation:?} while fusing {measurement:?}; map rolled back")]
    Contradiction {
        relation: [LandmarkId; 3],
        measurement: [LandmarkId; 3],
    },
    #[error("map dump line {line}: {reason}")]
    Parse { line: usize, reason: String },
}

/// Where an ordered relation lives: edge key, slot and whether it is the
/// inverse of the stored one.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub struct RelationRef {
    pub key: [LandmarkId; 3],
    pub slot: usize,
    pub inverted: bool,
}

impl RelationRef {
    /// Resolves the ordered relation `ab:c`.
    pub fn resolve(rel: [LandmarkId; 3]) -> Result<Self, MapError> {
        let [a, b, c] = rel;
        if a == b || b == c || a == c {
            return Err(MapError::RepeatedLandmark(rel));
        }
        let mut key = rel;
        key.sort_unstable();
        let [i, j, k] = key;
        let (slot, inverted) = match rel {
            r if r == [i, j, k] => (0, false),
            r if r == [j, k, i] => (1, false),
            r if r == [k, i, j] => (2, false),
            r if r == [j, i, k] => (0, true),
            r if r == [k, j, i] => (1, true),
            _ => (2, true),
        };
        Ok(Self {
            key,
            slot,
            inverted,
        })
    }

    /// The stored relation this one is read from.
    pub fn stored(&self) -> [LandmarkId; 3] {
        let [i, j, k] = self.key;
        [[i, j, k], [j, k, i], [k, i, j]][self.slot]
    }
}

/// Work done by one [`QualMap::fuse`] call.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct FusionStats {
    pub states_removed: usize,
    pub relations_changed: usize,
    /// Edges taken from the worklist.
    pub propagation_steps: usize,
    pub wall_time: Duration,
}

#[derive(Clone, Debug)]
pub struct QualMap {
    table: CompositionTable,
    nodes: BTreeSet<LandmarkId>,
    edges: HashMap<[LandmarkId; 3], [StateSet; 3]>,
}

// one fuse call's rollback data
#[derive(Default)]
struct Undo {
    slots: Vec<([LandmarkId; 3], usize, StateSet)>,
    nodes: Vec<LandmarkId>,
}

impl QualMap {
    pub fn new(table: CompositionTable) -> Self {
        Self {
            table,
            nodes: BTreeSet::new(),
            edges: HashMap::new(),
        }
    }

    pub fn table(&self) -> &CompositionTable {
        &self.table
    }

    pub fn nodes(&self) -> impl Iterator<Item = LandmarkId> + '_ {
        self.nodes.iter().copied()
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Stored edges in key order.
    pub fn edges(&self) -> Vec<([LandmarkId; 3], [StateSet; 3])> {
        let mut v: Vec<_> = self.edges.iter().map(|(k, s)| (*k, *s)).collect();
        v.sort_unstable_by_key(|e| e.0);
        v
    }

    /// States of the ordered relation `ab:c`.
    pub fn get_relation(&self, rel: [LandmarkId; 3]) -> Result<StateSet, MapError> {
        let r = RelationRef::resolve(rel)?;
        let stored = self.edges.get(&r.key).ok_or(MapError::MissingEdge(r.key))?[r.slot];
        Ok(if r.inverted {
            apply_inverse(stored)
        } else {
            stored
        })
    }

    /// Total number of states still open over all stored relations.
    pub fn open_states(&self) -> usize {
        self.edges
            .values()
            .flat_map(|s| s.iter())
            .map(|s| s.len())
            .sum()
    }

    /// True when every compared relation that already has an edge shares at
    /// least one state with the candidate.
    pub fn gate_association(&self, candidate: &[([LandmarkId; 3], StateSet)]) -> bool {
        candidate
            .iter()
            .all(|&(rel, states)| match self.get_relation(rel) {
                Ok(stored) => !stored.intersection(states).is_empty(),
                Err(_) => true,
            })
    }

    /// Adds a landmark with an all-states edge to every existing pair.
    /// Returns the new edges.
    fn add_node(&mut self, id: LandmarkId, undo: &mut Undo) -> Vec<[LandmarkId; 3]> {
        if !self.nodes.insert(id) {
            return Vec::new();
        }
        undo.nodes.push(id);
        let others: Vec<LandmarkId> = self.nodes.iter().copied().filter(|&n| n != id).collect();
        let mut added = Vec::new();
        for (x, &a) in others.iter().enumerate() {
            for &b in &others[x + 1..] {
                let mut key = [a, b, id];
                key.sort_unstable();
                self.edges.insert(key, [StateSet::ALL; 3]);
                added.push(key);
            }
        }
        added
    }

    /// Intersects one measurement into the map and propagates to a fixed
    /// point. On contradiction the map is restored to its state before the
    /// call.
    pub fn fuse(&mut self, m: &TripleMeasurement) -> Result<FusionStats, MapError> {
        let start = Instant::now();
        RelationRef::resolve(m.ids)?;
        let mut undo = Undo::default();
        let mut stats = FusionStats::default();
        let mut work = Worklist::default();
        for id in m.ids {
            for key in self.add_node(id, &mut undo) {
                work.push(key);
            }
        }
        let result = self
            .narrow(m.ids, m.states, &mut undo, &mut work, &mut stats)
            .and_then(|changed| {
                if changed || !work.is_empty() {
                    self.propagate(&mut work, &mut undo, &mut stats)
                } else {
                    Ok(())
                }
            });
        match result {
            Ok(()) => {
                stats.wall_time = start.elapsed();
                Ok(stats)
            }
            Err(relation) => {
                self.rollback(undo);
                Err(MapError::Contradiction {
                    relation,
                    measurement: m.ids,
                })
            }
        }
    }

    fn rollback(&mut self, undo: Undo) {
        for (key, slot, old) in undo.slots.into_iter().rev() {
            if let Some(e) = self.edges.get_mut(&key) {
                e[slot] = old;
            }
        }
        for id in undo.nodes {
            self.nodes.remove(&id);
            self.edges.retain(|k, _| !k.contains(&id));
        }
    }

    /// Intersects `states` into relation `rel`. Returns whether it shrank,
    /// or the relation on contradiction.
    fn narrow(
        &mut self,
        rel: [LandmarkId; 3],
        states: StateSet,
        undo: &mut Undo,
        work: &mut Worklist,
        stats: &mut FusionStats,
    ) -> Result<bool, [LandmarkId; 3]> {
        let r = RelationRef::resolve(rel).map_err(|_| rel)?;
        let states = if r.inverted {
            apply_inverse(states)
        } else {
            states
        };
        let slot = &mut self.edges.get_mut(&r.key).ok_or(rel)?[r.slot];
        let new = slot.intersection(states);
        if new == *slot {
            return Ok(false);
        }
        if new.is_empty() {
            return Err(rel);
        }
        undo.slots.push((r.key, r.slot, *slot));
        stats.states_removed += slot.len() - new.len();
        stats.relations_changed += 1;
        *slot = new;
        work.push(r.key);
        Ok(true)
    }

    fn propagate(
        &mut self,
        work: &mut Worklist,
        undo: &mut Undo,
        stats: &mut FusionStats,
    ) -> Result<(), [LandmarkId; 3]> {
        let mut pending: Vec<([LandmarkId; 3], StateSet)> = Vec::new();
        while let Some(key) = work.pop() {
            stats.propagation_steps += 1;
            self.consequences(key, &mut pending);
            for (rel, states) in pending.drain(..) {
                self.narrow(rel, states, undo, work, stats)?;
            }
        }
        Ok(())
    }

    /// Pseudo-measurements implied by the edge `key`: the cyclic frame
    /// changes of its relations, and every composition with a fourth
    /// landmark in which one of its relations is an input.
    fn consequences(&self, key: [LandmarkId; 3], out: &mut Vec<([LandmarkId; 3], StateSet)>) {
        let [i, j, k] = key;
        let Some(&stored) = self.edges.get(&key) else {
            return;
        };
        for (rel, s) in [[i, j, k], [j, k, i], [k, i, j]].into_iter().zip(stored) {
            let [a, b, c] = rel;
            out.push(([b, c, a], apply_left(s)));
            out.push(([c, a, b], apply_right(s)));
        }
        let orderings = [
            [i, j, k],
            [j, k, i],
            [k, i, j],
            [j, i, k],
            [k, j, i],
            [i, k, j],
        ];
        let get = |rel: [LandmarkId; 3]| self.get_relation(rel).unwrap_or(StateSet::ALL);
        for &x in &self.nodes {
            if key.contains(&x) {
                continue;
            }
            for [p, q, r] in orderings {
                // PQ:R then QR:X gives PQ:X
                let pq_x = self.table.compose(get([p, q, r]), get([q, r, x]));
                if pq_x != StateSet::ALL {
                    out.push(([p, q, x], pq_x));
                }
                // XP:Q then PQ:R gives XP:R
                let xp_r = self.table.compose(get([x, p, q]), get([p, q, r]));
                if xp_r != StateSet::ALL {
                    out.push(([x, p, r], xp_r));
                }
            }
        }
    }

    /// One line per edge, `i j k: ij:k states, jk:i states, ki:j states`.
    pub fn dump(&self) -> String {
        let mut s = String::new();
        for ([i, j, k], sets) in self.edges() {
            let _ = writeln!(s, "{i} {j} {k}: {}, {}, {}", sets[0], sets[1], sets[2]);
        }
        s
    }

    /// Rebuilds a map from [`QualMap::dump`] output.
    pub fn load(table: CompositionTable, text: &str) -> Result<Self, MapError> {
        let mut map = QualMap::new(table);
        for (n, line) in text.lines().enumerate() {
            let err = |reason: &str| MapError::Parse {
                line: n + 1,
                reason: reason.into(),
            };
            if line.trim().is_empty() {
                continue;
            }
            let (ids, sets) = line.split_once(':').ok_or_else(|| err("missing `:`"))?;
            let ids: Vec<LandmarkId> = ids
                .split_whitespace()
                .map(|t| t.parse())
                .collect::<Result<_, _>>()
                .map_err(|_| err("bad id"))?;
            let sets: Vec<StateSet> = sets
                .split(',')
                .map(StateSet::parse_list)
                .collect::<Option<_>>()
                .ok_or_else(|| err("bad state list"))?;
            let (Ok(key), Ok(sets)) = (
                <[LandmarkId; 3]>::try_from(ids),
                <[StateSet; 3]>::try_from(sets),
            ) else {
                return Err(err("expected three ids and three state lists"));
            };
            if !(key[0] < key[1] && key[1] < key[2]) {
                return Err(err("ids must be strictly increasing"));
            }
            if sets.iter().any(|s| s.is_empty()) {
                return Err(err("empty state list"));
            }
            map.nodes.extend(key);
            map.edges.insert(key, sets);
        }
        Ok(map)
    }
}

/// FIFO of edges to propagate from, without duplicates.
#[derive(Default)]
struct Worklist {
    queue: VecDeque<[LandmarkId; 3]>,
    queued: HashSet<[LandmarkId; 3]>,
}

impl Worklist {
    fn push(&mut self, key: [LandmarkId; 3]) {
        if self.queued.insert(key) {
            self.queue.push_back(key);
        }
    }

    fn pop(&mut self) -> Option<[LandmarkId; 3]> {
        let k = self.queue.pop_front()?;
        self.queued.remove(&k);
        Some(k)
    }

    fn is_empty(&self) -> bool {
        self.queue.is_empty()
    }
}

/// Number of incorrect states an edge can hold in its three relations.
pub const INCORRECT_PER_EDGE: usize = 3 * (REGION_COUNT - 1);

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::{CompositionTable, TableMeta};

    fn ids(v: &[u8]) -> StateSet {
        StateSet::from_ids(v)
    }

    fn universal_table() -> CompositionTable {
        let meta = TableMeta {
            depth: 0,
            bound: 0.0,
            labeling_checksum: String::new(),
        };
        CompositionTable::from_entries([[StateSet::ALL; REGION_COUNT]; REGION_COUNT], meta)
    }

    fn meas(ids: [LandmarkId; 3], states: StateSet) -> TripleMeasurement {
        TripleMeasurement {
            ids,
            states,
            unresolved: StateSet::EMPTY,
        }
    }

    #[test]
    fn orientation_algebra() {
        let r = RelationRef::resolve([5, 2, 9]).unwrap();
        assert_eq!((r.key, r.slot, r.inverted), ([2, 5, 9], 0, true));
        assert_eq!(r.stored(), [2, 5, 9]);
        let r = RelationRef::resolve([2, 9, 5]).unwrap();
        assert_eq!((r.slot, r.inverted), (2, true));
        for rel in [
            [1, 2, 3],
            [2, 3, 1],
            [3, 1, 2],
            [2, 1, 3],
            [3, 2, 1],
            [1, 3, 2],
        ] {
            let r = RelationRef::resolve(rel).unwrap();
            let s = r.stored();
            if r.inverted {
                assert_eq!([s[1], s[0], s[2]], rel);
            } else {
                assert_eq!(s, rel);
            }
        }
        assert!(RelationRef::resolve([1, 1, 2]).is_err());
    }

    #[test]
    fn inverse_read_and_refuse() {
        let mut map = QualMap::new(universal_table());
        let st = map.fuse(&meas([1, 2, 3], ids(&[1]))).unwrap();
        assert!(st.states_removed >= 19);
        assert_eq!(map.get_relation([2, 1, 3]).unwrap(), ids(&[20]));
        assert_eq!(map.get_relation([1, 2, 3]).unwrap(), ids(&[1]));
        // cyclic images of region 1
        assert_eq!(map.get_relation([2, 3, 1]).unwrap(), ids(&[17]));
        assert_eq!(map.get_relation([3, 1, 2]).unwrap(), ids(&[7]));
        let again = map.fuse(&meas([1, 2, 3], ids(&[1]))).unwrap();
        assert_eq!(again.states_removed, 0);
        assert_eq!(again.propagation_steps, 0);
    }

    #[test]
    fn contradiction_rolls_back() {
        let mut map = QualMap::new(universal_table());
        map.fuse(&meas([1, 2, 3], ids(&[1, 2]))).unwrap();
        let before = map.dump();
        let err = map.fuse(&meas([1, 2, 3], ids(&[3]))).unwrap_err();
        assert!(matches!(err, MapError::Contradiction { .. }));
        assert_eq!(map.dump(), before);
        // 21:3 = 1 means 12:3 = 20
        let err = map.fuse(&meas([2, 1, 3], ids(&[1])));
        assert!(err.is_err());
        assert_eq!(map.node_count(), 3);
    }

    #[test]
    fn gating() {
        let mut map = QualMap::new(universal_table());
        map.fuse(&meas([1, 2, 3], ids(&[4, 9]))).unwrap();
        assert!(!map.gate_association(&[([1, 2, 3], ids(&[5]))]));
        assert!(map.gate_association(&[([1, 2, 3], ids(&[5, 9]))]));
        assert!(map.gate_association(&[([1, 2, 7], ids(&[5]))]));
    }

    #[test]
    fn dump_round_trip() {
        let mut map = QualMap::new(universal_table());
        map.fuse(&meas([1, 2, 3], ids(&[7, 8]))).unwrap();
        map.fuse(&meas([4, 2, 3], ids(&[12]))).unwrap();
        let text = map.dump();
        let back = QualMap::load(universal_table(), &text).unwrap();
        assert_eq!(back.dump(), text);
        assert_eq!(back.edge_count(), 4);
        assert!(QualMap::load(universal_table(), "1 2 3: 1, 2").is_err());
    }
}
