//! Isogeometric (B-spline) discretizations of steady advection-diffusion on the
//! unit square: Galerkin, least squares, GLS and SUPG, with error norms and
//! numerical checks of the GLS stability estimates.

pub mod analysis;
pub mod error;
pub mod experiment;
pub mod formulations;
pub mod linalg;
pub mod meshes;
pub mod problems;
pub mod quadrature;
pub mod reference;
pub mod splines;

pub use analysis::{error_norms, sample_field, verify_coercivity, verify_inverse_inequality, ErrorReport, H1Definition, StabilityReport};
pub use error::{Error, Result};
pub use experiment::{run, RunConfig};
pub use formulations::{assemble, solve, solve_with, AssemblyOptions, GlsWeight, Method, SolutionField, SupgResidual};
pub use meshes::{MeshSpec, TensorMesh};
pub use problems::{ProblemKind, ProblemSpec};
