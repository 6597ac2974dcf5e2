//! One solve-and-measure run from a declarative configuration.

use serde::{Deserialize, Serialize};

use crate::analysis::{error_norms, ErrorNorms, ErrorReport, H1Definition};
use crate::error::Result;
use crate::formulations::{solve_with, AssemblyOptions, Method, SolutionField};
use crate::meshes::MeshSpec;
use crate::problems::ProblemKind;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub problem: ProblemKind,
    pub method: Method,
    pub mesh: MeshSpec,
    pub epsilon: f64,
    #[serde(default)]
    pub h1: H1Definition,
    /// Gauss points per direction for the error norms (`p + 3` when unset).
    #[serde(default)]
    pub norm_quad_points: Option<usize>,
    #[serde(skip)]
    pub assembly: AssemblyOptions,
}

impl RunConfig {
    pub fn new(problem: ProblemKind, method: Method, mesh: MeshSpec, epsilon: f64) -> Self {
        Self {
            problem,
            method,
            mesh,
            epsilon,
            h1: H1Definition::default(),
            norm_quad_points: None,
            assembly: AssemblyOptions::default(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub config: RunConfig,
    pub report: ErrorReport,
    pub norms: ErrorNorms,
    /// `|A x - b| / |b|` of the reduced system.
    pub relative_residual: f64,
    pub field: SolutionField,
}

pub fn run(config: &RunConfig) -> Result<RunOutcome> {
    let spec = config.problem.build(config.epsilon)?;
    let mesh = config.mesh.build()?;
    let solved = solve_with(config.method, &mesh, &spec, config.assembly)?;
    let norms = error_norms(&solved.field, &spec, config.h1, config.norm_quad_points)?;
    let report = ErrorReport {
        problem: config.problem.to_string(),
        method: config.method,
        mesh: config.mesh.to_string(),
        epsilon: config.epsilon,
        l2_rel_percent: norms.l2_rel_percent,
        h1_rel_percent: norms.h1_rel_percent,
        h1_definition: config.h1,
        dofs: solved.interior_dofs,
    };
    Ok(RunOutcome {
        config: *config,
        report,
        norms,
        relative_residual: solved.relative_residual,
        field: solved.field,
    })
}
