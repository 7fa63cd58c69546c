//! Approximation of subharmonic functions by `log|f|` for entire `f`.
//!
//! The pipeline takes a finite atomic Riesz measure, splits it into an
//! even-mass part living in thin annuli and a sparse tail, replaces the tail
//! by quintuple zeros, partitions the even part into mass-2 pieces in
//! logarithmic coordinates and swaps each piece for two unit atoms matching
//! its first two complex moments. The metrics module measures how close the
//! resulting `log|f|` is to the potential, and the counterexample module
//! builds the family showing the `R² log ψ(R)` rate cannot be improved.

pub mod atomize;
pub mod counterexample;
pub mod decomposition;
pub mod error;
pub mod io;
pub mod measure;
pub mod metrics;
pub mod partition;
pub mod pipeline;
pub mod potential;
pub mod slowly_varying;
mod sum;

pub use atomize::AtomPair;
pub use decomposition::{AnnularDecomposition, HeavyTailSchedule};
pub use error::{Error, Result};
pub use measure::{Atom, Axis, BoundaryRule, Measure, Region};
pub use metrics::{ErrorReport, GapReport, QuadratureParams};
pub use num_complex::Complex64;
pub use partition::{LogRectangle, Partition, PartitionPiece, PartitionStats};
pub use potential::{LogPotential, Provenance, Zero, ZeroSet};
pub use slowly_varying::SlowlyVarying;
pub use sum::pairwise_sum;
