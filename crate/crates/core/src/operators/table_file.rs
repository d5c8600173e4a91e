//! Text format for composition tables.
//!
//! ```text
//! qrm-composition 1
//! depth 60
//! bound 1000
//! labeling <sha256 of the label lines>
//! content <sha256 of every line after this one>
//! label 1 +-----
//! ...
//! budget 9 10 16
//! 1 1 : 1 2 3
//! ...
//! ```

use std::fs;
use std::path::Path;
use std::sync::OnceLock;

use sha2::{Digest, Sha256};
use thiserror::Error;

use super::{CompositionTable, TableMeta, COMPOSITION_ANCHORS};
use crate::edc::{RegionId, RegionLabeling, SignVector, StateSet, REGION_COUNT};

const MAGIC: &str = "qrm-composition";
const VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum TableError {
    #[error("corrupt table at line {line}: {reason}")]
    CorruptTable { line: usize, reason: String },
    #[error("entry ({s1},{s2}) is {found}, expected {expected}")]
    AnchorMismatch {
        s1: u8,
        s2: u8,
        found: String,
        expected: String,
    },
    #[error("table was built with labeling {found}, expected {expected}")]
    LabelingMismatch { found: String, expected: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn corrupt(line: usize, reason: impl Into<String>) -> TableError {
    TableError::CorruptTable {
        line,
        reason: reason.into(),
    }
}

fn hex_digest<'a>(lines: impl Iterator<Item = &'a str>) -> String {
    let mut h = Sha256::new();
    for l in lines {
        h.update(l.as_bytes());
        h.update(b"\n");
    }
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

/// Serializes `table` together with the labeling it was generated under.
pub fn format_table(table: &CompositionTable, labeling: &RegionLabeling) -> String {
    let mut body = Vec::new();
    for r in RegionId::all() {
        body.push(format!(
            "label {} {}",
            r,
            labeling.signs(r).to_sign_string()
        ));
    }
    for &(a, b, c) in &table.budget_exceeded {
        body.push(format!("budget {a} {b} {c}"));
    }
    for s1 in RegionId::all() {
        for s2 in RegionId::all() {
            body.push(format!("{s1} {s2} : {}", table.entry(s1, s2)));
        }
    }
    let content = hex_digest(body.iter().map(String::as_str));
    let mut out = format!(
        "{MAGIC} {VERSION}\ndepth {}\nbound {}\nlabeling {}\ncontent {content}\n",
        table.meta.depth,
        table.meta.bound,
        labeling.checksum()
    );
    for l in body {
        out.push_str(&l);
        out.push('\n');
    }
    out
}

/// Parses a table, checking both digests, that every entry is present and
/// non-empty, and the known anchor entries.
pub fn parse_table(text: &str) -> Result<(CompositionTable, RegionLabeling), TableError> {
    let lines: Vec<&str> = text.lines().collect();
    let header = |i: usize, key: &str| -> Result<&str, TableError> {
        lines
            .get(i)
            .and_then(|l| l.strip_prefix(key))
            .and_then(|v| v.strip_prefix(' '))
            .ok_or_else(|| corrupt(i + 1, format!("expected `{key}`")))
    };
    if header(0, MAGIC)? != VERSION.to_string() {
        return Err(corrupt(1, "unsupported version"));
    }
    let depth = header(1, "depth")?
        .parse()
        .map_err(|_| corrupt(2, "bad depth"))?;
    let bound = header(2, "bound")?
        .parse()
        .map_err(|_| corrupt(3, "bad bound"))?;
    let labeling_sum = header(3, "labeling")?.to_string();
    let content = header(4, "content")?;
    let body = &lines[5..];
    if hex_digest(body.iter().copied()) != content {
        return Err(corrupt(5, "content checksum mismatch"));
    }

    let mut signs = [None; REGION_COUNT];
    let mut budget_exceeded = Vec::new();
    let mut entries = [[None; REGION_COUNT]; REGION_COUNT];
    for (i, l) in body.iter().enumerate() {
        let ln = i + 6;
        let id = |t: &str| {
            t.parse()
                .ok()
                .and_then(RegionId::new)
                .ok_or_else(|| corrupt(ln, format!("bad region `{t}`")))
        };
        let toks: Vec<&str> = l.split_whitespace().collect();
        match toks.as_slice() {
            ["label", r, s] => {
                let s = SignVector::parse_sign_string(s)
                    .ok_or_else(|| corrupt(ln, "bad sign string"))?;
                signs[id(r)?.index()] = Some(s);
            }
            ["budget", a, b, c] => budget_exceeded.push((id(a)?.get(), id(b)?.get(), id(c)?.get())),
            [a, b, ":", rest @ ..] => {
                let set = StateSet::parse_list(&rest.join(" "))
                    .ok_or_else(|| corrupt(ln, "bad state list"))?;
                if set.is_empty() {
                    return Err(corrupt(ln, "empty entry"));
                }
                let slot = &mut entries[id(a)?.index()][id(b)?.index()];
                if slot.replace(set).is_some() {
                    return Err(corrupt(ln, "duplicate entry"));
                }
            }
            [] => {}
            _ => return Err(corrupt(ln, "unrecognized line")),
        }
    }

    let mut by_region = [SignVector::from_bits(0); REGION_COUNT];
    for (i, s) in signs.iter().enumerate() {
        by_region[i] =
            s.ok_or_else(|| corrupt(0, format!("missing label for region {}", i + 1)))?;
    }
    let labeling = RegionLabeling::from_signs(by_region).map_err(|e| corrupt(0, e.to_string()))?;
    if labeling.checksum() != labeling_sum {
        return Err(corrupt(4, "label lines do not match labeling checksum"));
    }
    let mut full = [[StateSet::EMPTY; REGION_COUNT]; REGION_COUNT];
    for (i, row) in entries.iter().enumerate() {
        for (j, e) in row.iter().enumerate() {
            full[i][j] =
                e.ok_or_else(|| corrupt(0, format!("missing entry ({} {})", i + 1, j + 1)))?;
        }
    }
    let mut table = CompositionTable::from_entries(
        full,
        TableMeta {
            depth,
            bound,
            labeling_checksum: labeling_sum,
        },
    );
    table.budget_exceeded = budget_exceeded;
    check_anchors(&table)?;
    Ok((table, labeling))
}

/// The anchor entries must match exactly.
pub fn check_anchors(table: &CompositionTable) -> Result<(), TableError> {
    for (s1, s2, ids) in COMPOSITION_ANCHORS {
        let expected = StateSet::from_ids(ids);
        let found = table.entries[s1 as usize - 1][s2 as usize - 1];
        if found != expected {
            return Err(TableError::AnchorMismatch {
                s1,
                s2,
                found: found.to_string(),
                expected: expected.to_string(),
            });
        }
    }
    Ok(())
}

pub fn save_tables(
    table: &CompositionTable,
    labeling: &RegionLabeling,
    path: &Path,
) -> Result<(), TableError> {
    fs::write(path, format_table(table, labeling))?;
    Ok(())
}

/// Loads a table and checks it was generated under `labeling`.
pub fn load_tables(path: &Path, labeling: &RegionLabeling) -> Result<CompositionTable, TableError> {
    let (table, file_labeling) = parse_table(&fs::read_to_string(path)?)?;
    if file_labeling != *labeling {
        return Err(TableError::LabelingMismatch {
            found: file_labeling.checksum(),
            expected: labeling.checksum(),
        });
    }
    Ok(table)
}

static SHIPPED: OnceLock<(CompositionTable, RegionLabeling)> = OnceLock::new();

/// The composition table generated at depth 60 on `[-1000, 1000]^4` that
/// ships with the crate, and the labeling it was generated under.
pub fn shipped_tables() -> &'static (CompositionTable, RegionLabeling) {
    SHIPPED.get_or_init(|| {
        parse_table(include_str!("../../data/edc_tables.txt")).expect("shipped table is valid")
    })
}
