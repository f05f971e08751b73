//! Indexing of weighted (uncertain) strings for z-valid pattern matching,
//! sampled at minimizer positions.

pub mod bench;
pub mod error;
pub mod estimation;
pub mod format;
pub mod gen;
pub mod grid;
pub mod index;
pub mod minimizers;
pub mod model;
pub mod par;
pub mod query;
pub mod trees;

pub use error::{Error, Result};
pub use estimation::{build_estimation, EstimationFamily, PropertyArray};
pub use minimizers::{MinimizerScheme, Order};
pub use model::{Alphabet, HeavyContext, Threshold, WeightedString};
pub use index::{BuildConfig, BuildPath, BuildStats, Index};
pub use par::{query_batch, Execution};
pub use query::{query, query_text, Mode, QueryResult};
