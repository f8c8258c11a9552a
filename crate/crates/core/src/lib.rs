//! Finite element laboratory for the Dirichlet-to-Neumann operator on rough
//! planar domains: meshes, P1 forms, the discrete DtN operator as a Schur
//! complement, Steklov spectra, the semigroup it generates, trace and
//! Maz'ya constants, Robin forms and closed-form oracles.
//!
//! Every numerical routine is generic over [`scalar::Real`]; the aliases
//! below fix the two precisions used in practice. Double-double
//! ([`twofloat::TwoFloat`]) is needed for combs with many teeth, whose
//! element sizes span more than the `f64` stiffness matrix can resolve.

pub mod analytic;
pub mod assembly;
pub mod dtn;
pub mod error;
pub mod linalg;
pub mod mesh;
pub mod robin;
pub mod scalar;
pub mod semigroup;
pub mod spectral;
pub mod trend;

pub use error::{Error, Result};
pub use scalar::Real;
pub use twofloat::TwoFloat;

/// Double-double scalar.
pub type DD = TwoFloat;

pub type Mesh = mesh::Mesh<f64>;
pub type MeshDD = mesh::Mesh<DD>;
pub type SparseSym = linalg::SparseSym<f64>;
pub type SparseSymDD = linalg::SparseSym<DD>;
pub type Forms = assembly::Forms<f64>;
pub type FormsDD = assembly::Forms<DD>;
pub type BoundaryMass = assembly::BoundaryMass<f64>;
pub type BoundaryMassDD = assembly::BoundaryMass<DD>;
pub type DtnOperator = dtn::DtnOperator<f64>;
pub type DtnOperatorDD = dtn::DtnOperator<DD>;
