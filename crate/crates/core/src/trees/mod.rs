//! Forward and backward minimizer factor trees.

mod anchor;
mod compact;
mod dfs;
mod handle;
mod naive;
mod tree;

pub use anchor::{Anchor, Diff};
pub use compact::reverse_and_compact;
pub use dfs::{build_extended, DfsStats, ExtNode, ExtendedTree};
pub use handle::{cmp_prefix, heavy_cmp, heavy_lcp, Direction, Handle, HeavyLce};
pub use naive::{anchors_from_family, raw_tree_plain};
pub use tree::{ArrayIndex, MinimizerFactorTree, Node, RawTree, NONE};
