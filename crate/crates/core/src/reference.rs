//! Published error tables for the two model problems and helpers to rerun and
//! compare them cell by cell.

use serde::{Deserialize, Serialize};

use crate::analysis::H1Definition;
use crate::error::Result;
use crate::experiment::{run, RunConfig};
use crate::formulations::{Method, SupgResidual};
use crate::meshes::MeshSpec;
use crate::problems::ProblemKind;

/// A cell passes when `|got - want| <= max(abs_pp, rel * |want|)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerance {
    pub abs_pp: f64,
    pub rel: f64,
}

impl Tolerance {
    pub const REFINED: Tolerance = Tolerance { abs_pp: 0.5, rel: 0.10 };
    pub const UNIFORM: Tolerance = Tolerance { abs_pp: 1.0, rel: 0.15 };

    pub fn bound(&self, want: f64) -> f64 {
        self.abs_pp.max(self.rel * want.abs())
    }

    pub fn allows(&self, got: f64, want: f64) -> bool {
        got.is_finite() && (got - want).abs() <= self.bound(want)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PublishedRow {
    pub epsilon: f64,
    pub l2: f64,
    pub h1: f64,
}

const fn row(epsilon: f64, l2: f64, h1: f64) -> PublishedRow {
    PublishedRow { epsilon, l2, h1 }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PublishedTable {
    /// File stem used by the table exporter.
    pub id: &'static str,
    pub problem: ProblemKind,
    pub method: Method,
    pub mesh: MeshSpec,
    pub rows: &'static [PublishedRow],
    pub tolerance: Tolerance,
}

pub const UNIFORM_P1: MeshSpec = MeshSpec::Uniform { nx: 10, ny: 10 };
pub const UNIFORM_EJ: MeshSpec = MeshSpec::Uniform { nx: 10, ny: 4 };

pub fn uniform_mesh_for(problem: ProblemKind) -> MeshSpec {
    match problem {
        ProblemKind::P1 => UNIFORM_P1,
        ProblemKind::Ej => UNIFORM_EJ,
    }
}

pub static TABLES: [PublishedTable; 10] = [
    PublishedTable {
        id: "galerkin_refined_ej",
        problem: ProblemKind::Ej,
        method: Method::Galerkin,
        mesh: MeshSpec::RefinedEj,
        rows: &[row(0.01, 0.3, 2.30), row(0.001, 0.27, 2.29), row(0.0001, 0.27, 2.29)],
        tolerance: Tolerance::REFINED,
    },
    PublishedTable {
        id: "galerkin_refined_p1",
        problem: ProblemKind::P1,
        method: Method::Galerkin,
        mesh: MeshSpec::RefinedP1,
        rows: &[row(0.1, 0.49, 2.60), row(0.01, 0.12, 2.30), row(0.003, 0.07, 2.32)],
        tolerance: Tolerance::REFINED,
    },
    PublishedTable {
        id: "galerkin_uniform_p1",
        problem: ProblemKind::P1,
        method: Method::Galerkin,
        mesh: UNIFORM_P1,
        rows: &[row(0.1, 0.60, 4.69), row(0.01, 46.11, 60.31), row(0.003, 87.17, 189.62)],
        tolerance: Tolerance::UNIFORM,
    },
    PublishedTable {
        id: "galerkin_uniform_ej",
        problem: ProblemKind::Ej,
        method: Method::Galerkin,
        mesh: UNIFORM_EJ,
        rows: &[row(0.01, 13.48, 70.44), row(0.001, 48.15, 259.75), row(0.0001, 54.77, 262.14)],
        tolerance: Tolerance::UNIFORM,
    },
    PublishedTable {
        id: "ls_uniform_p1",
        problem: ProblemKind::P1,
        method: Method::LeastSquares,
        mesh: UNIFORM_P1,
        rows: &[row(0.1, 17.27, 16.61), row(0.01, 86.70, 100.83), row(0.003, 84.43, 100.80)],
        tolerance: Tolerance::UNIFORM,
    },
    PublishedTable {
        id: "ls_uniform_ej",
        problem: ProblemKind::Ej,
        method: Method::LeastSquares,
        mesh: UNIFORM_EJ,
        rows: &[row(0.01, 52.87, 86.47), row(0.001, 57.36, 64.83), row(0.0001, 57.70, 65.19)],
        tolerance: Tolerance::UNIFORM,
    },
    PublishedTable {
        id: "gls_uniform_p1",
        problem: ProblemKind::P1,
        method: Method::Gls,
        mesh: UNIFORM_P1,
        rows: &[row(0.1, 1.64, 4.73), row(0.01, 28.20, 63.04), row(0.003, 38.15, 135.54)],
        tolerance: Tolerance::UNIFORM,
    },
    PublishedTable {
        id: "gls_uniform_ej",
        problem: ProblemKind::Ej,
        method: Method::Gls,
        mesh: UNIFORM_EJ,
        rows: &[
            row(0.1, 0.91, 3.11),
            row(0.01, 17.10, 62.44),
            row(0.001, 22.17, 71.33),
            row(0.0001, 22.38, 71.46),
        ],
        tolerance: Tolerance::UNIFORM,
    },
    PublishedTable {
        id: "supg_uniform_p1",
        problem: ProblemKind::P1,
        method: Method::Supg,
        mesh: UNIFORM_P1,
        rows: &[row(0.1, 3.57, 7.81), row(0.01, 33.71, 71.91), row(0.003, 46.13, 120.14)],
        tolerance: Tolerance::UNIFORM,
    },
    PublishedTable {
        id: "supg_uniform_ej",
        problem: ProblemKind::Ej,
        method: Method::Supg,
        mesh: UNIFORM_EJ,
        rows: &[row(0.01, 20.88, 68.46), row(0.001, 22.45, 71.11), row(0.0001, 22.44, 71.78)],
        tolerance: Tolerance::UNIFORM,
    },
];

pub fn table(id: &str) -> Option<&'static PublishedTable> {
    TABLES.iter().find(|t| t.id == id)
}

/// Diffusion values of the method-ranking comparison, per problem.
pub const RANKING_CASES: [(ProblemKind, f64); 4] = [
    (ProblemKind::P1, 0.01),
    (ProblemKind::P1, 0.003),
    (ProblemKind::Ej, 0.001),
    (ProblemKind::Ej, 0.0001),
];

/// Settings that are not pinned down by the tables themselves.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Variant {
    pub supg_residual: SupgResidual,
    pub h1: H1Definition,
}

impl Variant {
    pub const ALL: [Variant; 4] = [
        Variant { supg_residual: SupgResidual::Plus, h1: H1Definition::Full },
        Variant { supg_residual: SupgResidual::Plus, h1: H1Definition::Seminorm },
        Variant { supg_residual: SupgResidual::Consistent, h1: H1Definition::Full },
        Variant { supg_residual: SupgResidual::Consistent, h1: H1Definition::Seminorm },
    ];

    pub fn label(&self) -> String {
        format!("supg-residual={},h1={}", self.supg_residual, self.h1)
    }
}

/// Error norms of the tables are integrated with `p + 1` Gauss points per direction.
pub const TABLE_NORM_QUAD_POINTS: usize = 3;

impl PublishedTable {
    pub fn config(&self, epsilon: f64, variant: Variant) -> RunConfig {
        let mut c = RunConfig::new(self.problem, self.method, self.mesh, epsilon);
        c.h1 = variant.h1;
        c.assembly.supg_residual = variant.supg_residual;
        c.norm_quad_points = Some(TABLE_NORM_QUAD_POINTS);
        c
    }

    /// Reruns every row with `variant` and compares against the published cells.
    pub fn compare(&self, variant: Variant) -> Result<Vec<CellComparison>> {
        self.rows.iter().map(|r| self.compare_row(r, variant)).collect()
    }

    pub fn compare_row(&self, r: &PublishedRow, variant: Variant) -> Result<CellComparison> {
        let out = run(&self.config(r.epsilon, variant))?;
        Ok(CellComparison::new(self, r, variant, out.report.l2_rel_percent, out.report.h1_rel_percent))
    }
}

/// One table row recomputed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellComparison {
    pub table: String,
    pub epsilon: f64,
    pub variant: Variant,
    pub l2: f64,
    pub l2_published: f64,
    pub l2_ok: bool,
    pub h1: f64,
    pub h1_published: f64,
    pub h1_ok: bool,
}

impl CellComparison {
    pub fn new(t: &PublishedTable, r: &PublishedRow, variant: Variant, l2: f64, h1: f64) -> Self {
        Self {
            table: t.id.to_string(),
            epsilon: r.epsilon,
            variant,
            l2,
            l2_published: r.l2,
            l2_ok: t.tolerance.allows(l2, r.l2),
            h1,
            h1_published: r.h1,
            h1_ok: t.tolerance.allows(h1, r.h1),
        }
    }

    pub fn ok(&self) -> bool {
        self.l2_ok && self.h1_ok
    }

    /// Sum of the two deviations measured in units of the tolerance.
    pub fn score(&self, tol: Tolerance) -> f64 {
        (self.l2 - self.l2_published).abs() / tol.bound(self.l2_published)
            + (self.h1 - self.h1_published).abs() / tol.bound(self.h1_published)
    }
}
