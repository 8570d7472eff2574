//! Strategy tables: storage, import, verification and repair.

pub mod builtin;
pub mod repair;
pub mod table;
pub mod text;
pub mod verify;

pub use repair::{repair_tree, repair_tree_with, Repair, RepairOptions};
pub use table::{load_table, table_to_tree, NoteKind, Path, StrategyTable, TableNote};
pub use text::{import_text, ImportOptions};
pub use verify::{verify_tree, verify_tree_on, Defect, DefectKind, VerificationReport};
