//! Structure learning for Gaussian graphical models.

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod estimate;
pub mod experiment;
pub mod gaussian;
pub mod index_set;
pub mod mit;
pub mod model;
pub mod sampler;
pub mod threshold;

pub use error::{GgmError, Result};
pub use estimate::{EstimateFile, NeighborhoodEstimate, RoundRecord};
pub use gaussian::{Conditioner, CovarianceKind, CovarianceView};
pub use index_set::OrderedIndexSet;
pub use model::{GgmModel, ParamBox, Topology};
