//! Per-triangle dynamic programming with property plug-ins.

mod build;
mod plugin;
mod site;
mod table;

pub use build::{answer_from_entries, compute_tables, query_static, Answer, DpError, TableBuilder};
pub use plugin::{Plugin, COL_A, COL_B, COL_C, DOM_COVERED, DOM_IN, DOM_UNCOVERED, VC_IN, VC_OUT};
pub use site::{prune_dominated, solve_site, SiteResult, SiteSpec};
pub use table::{fold_min, DpTable, Entry, Key, TableStore};
