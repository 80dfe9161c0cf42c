//! Numerical nonsmooth analysis on small-dimensional spaces: Dini
//! derivatives, the subderivative hierarchy and its regularizations,
//! subdifferential oracles, Henstock-Kurzweil integration, and checkers for
//! monotonicity, subdifferential determination and reconstruction.

// NaN-rejecting comparisons like `!(x > 0.0)` are intended; Gauss-Kronrod
// nodes are kept at their published precision.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::excessive_precision, clippy::too_many_arguments)]

pub mod analysis;
pub mod catalog;
pub mod cli;
pub mod config;
pub mod dini;
pub mod error;
pub mod extreal;
pub mod hk;
mod limits;
pub mod report;
pub mod rng;
pub mod subderiv;
pub mod subdiff;
pub mod suite;
pub mod verdict;

pub use catalog::{Catalog, CatalogEntry, LineFunction, Segment, Tag};
pub use dini::{Estimate, SamplingSchedule};
pub use error::{Error, Result};
pub use extreal::ExtReal;
pub use verdict::{Status, Verdict};
