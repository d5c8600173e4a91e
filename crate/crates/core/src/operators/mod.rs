//! EDC operators: the unary frame changes and binary composition.

mod composition;
mod table_file;
mod unary;

pub use composition::{
    composition_problem, composition_problem_in, generate_composition_table,
    solve_composition_cell, CellOutcome, CompositionTable, Frame, TableMeta,
};
pub use table_file::{
    check_anchors, format_table, load_tables, parse_table, save_tables, shipped_tables, TableError,
};
pub use unary::{apply_inverse, apply_left, apply_right, UnaryTables};

/// Composition entries that are known independently of table generation,
/// as `(AB:C, BC:D, AB:D states)`.
pub const COMPOSITION_ANCHORS: [(u8, u8, &[u8]); 3] = [
    (1, 5, &[1, 5, 11, 12, 17, 19]),
    (5, 5, &[12, 17, 18, 19, 20]),
    (11, 5, &[17, 18, 19, 20]),
];
