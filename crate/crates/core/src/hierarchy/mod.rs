//! Hereditarily finite sets and miniature constructible hierarchies.

mod hfset;
mod stage;

pub use hfset::{check_extensional_wf, hf_decode, hf_encode, mostowski_collapse, vn, vn_size, HFSet, HfError};
pub use stage::{first_divergence, iterate, step, HierarchyError, Iteration, Operator, Stage, StageMode};
