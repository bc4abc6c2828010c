//! Super-simple 2-(v,5,1) directed designs: development of base blocks, exact
//! verification, directed-trade bounds on defining sets, and recursive composition.

pub mod catalog;
pub mod compose;
pub mod design;
pub mod devel;
pub mod error;
pub mod format;
pub mod par;
pub mod trades;
pub mod verify;

mod text;

pub use design::{
    ordered_pairs_of, pair_table, DesignKind, GroupType, Label, LabeledDesign, OrderedBlock, PairTable, PointSpace,
};
pub use error::{Error, Result};
pub use par::Exec;
