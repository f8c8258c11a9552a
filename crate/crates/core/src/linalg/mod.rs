//! Linear algebra kernels shared by the eigen- and trace-constant solvers.

pub mod cholesky;
pub mod dense;
pub mod lanczos;
pub mod sparse;

pub use cholesky::{adjacency, nested_dissection, Condensed, SparseCholesky};
pub use dense::Mat;
pub use lanczos::{lanczos_largest, LanczosOptions, RitzPairs};
pub use sparse::{CooBuilder, SparseSym};
