//! Error norms against exact solutions and numerical checks of the GLS
//! stability estimates (inverse inequality, coercivity, continuity).

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::formulations::{assemble_global, assemble_matrix, AssemblyOptions, GlsWeight, Method, SolutionField};
use crate::linalg::{self, DenseMatrix};
use crate::meshes::{boundary_dof_mask, TensorMesh};
use crate::problems::ProblemSpec;
use crate::quadrature::{element_points, gauss_rule};

/// Which H1 quantity the relative H1 error uses.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum H1Definition {
    /// `|w|^2_{L2} + |∇w|^2_{L2}`.
    #[default]
    Full,
    /// `|∇w|^2_{L2}` only.
    Seminorm,
}

/// Recorded in every report: the default H1 error is the full norm.
pub const H1_DEFINITION_NOTE: &str =
    "h1_rel_percent uses the full H1 norm (L2 + gradient) unless h1_definition says seminorm";

impl fmt::Display for H1Definition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            H1Definition::Full => "full",
            H1Definition::Seminorm => "seminorm",
        })
    }
}

impl FromStr for H1Definition {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "full" => Ok(H1Definition::Full),
            "seminorm" => Ok(H1Definition::Seminorm),
            other => Err(Error::Config(format!("unknown H1 definition `{other}`"))),
        }
    }
}

/// Relative errors in percent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorNorms {
    pub l2_rel_percent: f64,
    pub h1_rel_percent: f64,
    /// H1 seminorm variant, always computed.
    pub h1_semi_rel_percent: f64,
    pub h1_full_rel_percent: f64,
    pub h1_definition: H1Definition,
}

/// Relative L2 and H1 errors of `field` against the exact solution of `spec`,
/// using `quad_points` Gauss points per direction (`p + 3` by default).
pub fn error_norms(
    field: &SolutionField,
    spec: &ProblemSpec,
    h1: H1Definition,
    quad_points: Option<usize>,
) -> Result<ErrorNorms> {
    if !spec.has_exact() {
        return Err(Error::NoExactSolution(spec.name.clone()));
    }
    let rule = gauss_rule(quad_points.unwrap_or(field.mesh.degree() + 3))?;
    let (mut e0, mut e1, mut u0, mut u1) = (0.0, 0.0, 0.0, 0.0);
    for element in &field.mesh.elements {
        for q in element_points(&rule, element) {
            let uh = field.shape_in_element(element, q.x, q.y);
            let u = spec.exact_jet(q.x, q.y)?;
            let (dv, dx, dy) = (uh.value - u.value, uh.grad[0] - u.dx, uh.grad[1] - u.dy);
            e0 += q.weight * dv * dv;
            e1 += q.weight * (dx * dx + dy * dy);
            u0 += q.weight * u.value * u.value;
            u1 += q.weight * (u.dx * u.dx + u.dy * u.dy);
        }
    }
    let pct = |num: f64, den: f64| 100.0 * (num / den).sqrt();
    let full = pct(e0 + e1, u0 + u1);
    let semi = pct(e1, u1);
    Ok(ErrorNorms {
        l2_rel_percent: pct(e0, u0),
        h1_rel_percent: match h1 {
            H1Definition::Full => full,
            H1Definition::Seminorm => semi,
        },
        h1_semi_rel_percent: semi,
        h1_full_rel_percent: full,
        h1_definition: h1,
    })
}

/// One run, in the serialized report layout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorReport {
    pub problem: String,
    pub method: Method,
    pub mesh: String,
    pub epsilon: f64,
    pub l2_rel_percent: f64,
    pub h1_rel_percent: f64,
    pub h1_definition: H1Definition,
    pub dofs: usize,
}

/// `h ‖Δv‖ / ‖∇v‖` maximized over the interior spline space.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InverseInequality {
    pub observed: f64,
    pub bound: f64,
    /// Mesh size used in the ratio.
    pub h: f64,
    pub lambda_max: f64,
}

/// `2 sqrt(3 d) (p - 1)^2` for B-splines of degree `p` in `d` dimensions.
pub fn inverse_constant_bound(p: usize, d: usize) -> f64 {
    let pm1 = p.saturating_sub(1) as f64;
    2.0 * (3.0 * d as f64).sqrt() * pm1 * pm1
}

/// Global DOFs that vanish on the boundary.
pub fn interior_dofs(mesh: &TensorMesh) -> Vec<usize> {
    let mask = boundary_dof_mask(mesh);
    (0..mesh.num_dofs()).filter(|&i| !mask[i]).collect()
}

fn interior_gram<F>(mesh: &TensorMesh, form: F) -> Result<DenseMatrix>
where
    F: Fn(&crate::formulations::PointCtx, &crate::formulations::Shape, &crate::formulations::Shape) -> f64,
{
    let rule = gauss_rule(mesh.degree() + 2)?;
    let a = assemble_matrix(mesh, &rule, form);
    let idx = interior_dofs(mesh);
    Ok(a.select(&idx, &idx))
}

/// `(∇u, ∇v)` on the interior space.
pub fn stiffness_matrix(mesh: &TensorMesh) -> Result<DenseMatrix> {
    interior_gram(mesh, |_, u, v| u.grad[0] * v.grad[0] + u.grad[1] * v.grad[1])
}

/// `(Δu, Δv)` on the interior space.
pub fn laplacian_gram(mesh: &TensorMesh) -> Result<DenseMatrix> {
    interior_gram(mesh, |_, u, v| u.laplacian() * v.laplacian())
}

/// `(beta·∇u, v)` on the interior space (entry `(i, j)`: trial `j`, test `i`).
pub fn advection_matrix(mesh: &TensorMesh, beta: [f64; 2]) -> Result<DenseMatrix> {
    interior_gram(mesh, |_, u, v| u.advective(beta) * v.value)
}

/// Gram matrix of `(u, v)_U = (eps/h)(∇u, ∇v) + (beta·∇u, beta·∇v)`, `h` the element diameter.
pub fn energy_gram(mesh: &TensorMesh, spec: &ProblemSpec) -> Result<DenseMatrix> {
    let eps = spec.epsilon;
    interior_gram(mesh, |ctx, u, v| {
        eps / ctx.element.diameter() * (u.grad[0] * v.grad[0] + u.grad[1] * v.grad[1])
            + u.advective(spec.beta) * v.advective(spec.beta)
    })
}

/// GLS matrix with the `1/diameter` weight, restricted to interior DOFs (not symmetrized).
pub fn gls_interior_matrix(mesh: &TensorMesh, spec: &ProblemSpec) -> Result<DenseMatrix> {
    let opts = AssemblyOptions { gls_weight: GlsWeight::Diameter, ..Default::default() };
    let (a, _) = assemble_global(Method::Gls, mesh, spec, opts)?;
    let idx = interior_dofs(mesh);
    Ok(a.select(&idx, &idx))
}

pub fn verify_inverse_inequality(mesh: &TensorMesh) -> Result<InverseInequality> {
    let p = mesh.degree();
    if p < 2 {
        return Err(Error::Config("inverse inequality check needs degree >= 2".into()));
    }
    let s = laplacian_gram(mesh)?;
    let k = stiffness_matrix(mesh)?;
    if k.n_rows() == 0 {
        return Err(Error::Config("mesh has no interior functions".into()));
    }
    let e = linalg::generalized_eig_extremes(&s, &k)?;
    let h = inverse_inequality_h(mesh);
    Ok(InverseInequality {
        observed: h * e.max.max(0.0).sqrt(),
        bound: inverse_constant_bound(p, 2),
        h,
        lambda_max: e.max,
    })
}

/// Mesh size entering the inverse inequality: the largest element edge.
pub fn inverse_inequality_h(mesh: &TensorMesh) -> f64 {
    mesh.elements.iter().map(|e| e.hx().max(e.hy())).fold(0.0, f64::max)
}

/// `min_v vᵀ S v / vᵀ G v` for symmetric `S` and SPD `G`.
pub fn min_rayleigh_ratio(s: &DenseMatrix, g: &DenseMatrix) -> Result<f64> {
    Ok(linalg::generalized_min_eig(&s.symmetric_part(), g)?.0)
}

/// `max |b(u, v)| / (|u|_U |v|_U)`, the spectral norm of `L^-1 B L^-T` with `G = L Lᵀ`.
pub fn continuity_constant(b: &DenseMatrix, g: &DenseMatrix) -> Result<f64> {
    let l = linalg::cholesky(g)?;
    let n = b.n_rows();
    // C = L^-1 B L^-T
    let mut y = b.clone();
    forward(&l, &mut y);
    let mut c = y.transpose();
    forward(&l, &mut c);
    let c = c.transpose();
    let ctc = c.transpose().matmul(&c).symmetric_part();
    let (_, max, _) = linalg::sym_eig_extreme(&ctc)?;
    debug_assert_eq!(ctc.n_rows(), n);
    Ok(max.max(0.0).sqrt())
}

fn forward(l: &DenseMatrix, m: &mut DenseMatrix) {
    let n = l.n_rows();
    for j in 0..m.n_cols() {
        for i in 0..n {
            let s: f64 = (0..i).map(|k| l[(i, k)] * m[(k, j)]).sum();
            m[(i, j)] = (m[(i, j)] - s) / l[(i, i)];
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityReport {
    pub mesh: String,
    pub epsilon: f64,
    pub beta: [f64; 2],
    /// Element diameter used in the GLS weight and in the threshold.
    pub h: f64,
    pub c_inverse_observed: f64,
    pub c_inverse_bound: f64,
    /// `h / (2 C^2)` with `C` the inverse-inequality bound.
    pub epsilon_threshold: f64,
    /// `min b(v, v) / |v|^2_U` over the interior space.
    pub coercivity_min_ratio: f64,
    pub condition_satisfied: bool,
    /// `max |b(u, v)| / (|u|_U |v|_U)`.
    pub continuity_constant: f64,
}

impl StabilityReport {
    /// Whether the checked claims hold: the inverse constant respects its bound and,
    /// when `epsilon` is below the threshold, the coercivity ratio reaches 1/2.
    pub fn claims_hold(&self) -> bool {
        let inverse_ok = self.c_inverse_observed <= self.c_inverse_bound;
        let coercive_ok = !self.condition_satisfied || self.coercivity_min_ratio >= 0.5 - 1e-8;
        inverse_ok && coercive_ok
    }
}

pub fn verify_coercivity(mesh: &TensorMesh, spec: &ProblemSpec) -> Result<StabilityReport> {
    verify_coercivity_labeled(mesh, spec, "")
}

pub fn verify_coercivity_labeled(
    mesh: &TensorMesh,
    spec: &ProblemSpec,
    label: &str,
) -> Result<StabilityReport> {
    let inv = verify_inverse_inequality(mesh)?;
    let b = gls_interior_matrix(mesh, spec)?;
    let g = energy_gram(mesh, spec)?;
    let ratio = min_rayleigh_ratio(&b, &g)?;
    let continuity = continuity_constant(&b, &g)?;
    let h = mesh.h_max();
    let threshold = h / (2.0 * inv.bound * inv.bound);
    Ok(StabilityReport {
        mesh: label.to_string(),
        epsilon: spec.epsilon,
        beta: spec.beta,
        h,
        c_inverse_observed: inv.observed,
        c_inverse_bound: inv.bound,
        epsilon_threshold: threshold,
        coercivity_min_ratio: ratio,
        condition_satisfied: spec.epsilon <= threshold,
        continuity_constant: continuity,
    })
}

/// One lattice sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FieldSample {
    pub x: f64,
    pub y: f64,
    pub value: f64,
}

/// Values on the uniform `nx × ny` lattice over the closed square, y-major then x.
pub fn sample_field(field: &SolutionField, nx: usize, ny: usize) -> Result<Vec<FieldSample>> {
    if nx < 2 || ny < 2 {
        return Err(Error::Config(format!("sampling lattice must be at least 2x2, got {nx}x{ny}")));
    }
    let (x0, x1) = (field.mesh.kv_x.first(), field.mesh.kv_x.last());
    let (y0, y1) = (field.mesh.kv_y.first(), field.mesh.kv_y.last());
    let mut out = Vec::with_capacity(nx * ny);
    for j in 0..ny {
        let y = if j == ny - 1 { y1 } else { y0 + (y1 - y0) * j as f64 / (ny - 1) as f64 };
        for i in 0..nx {
            let x = if i == nx - 1 { x1 } else { x0 + (x1 - x0) * i as f64 / (nx - 1) as f64 };
            out.push(FieldSample { x, y, value: field.shape_at(x, y)?.value });
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formulations::{apply_dirichlet_lift, solve};
    use crate::meshes::uniform_mesh;
    use crate::problems::{problem_ej, Jet};
    use std::f64::consts::PI;

    #[test]
    fn bound_value() {
        assert!((inverse_constant_bound(2, 2) - 2.0 * 6f64.sqrt()).abs() < 1e-15);
        assert!((inverse_constant_bound(2, 2) - 4.898979).abs() < 1e-6);
        assert_eq!(inverse_constant_bound(1, 2), 0.0);
    }

    #[test]
    fn spline_exact_solution_has_no_error() {
        let exact = |x: f64, y: f64| Jet { value: x * y, dx: y, dy: x, dxy: 1.0, ..Default::default() };
        let spec = ProblemSpec::manufactured("xy", 1.0, [1.0, 0.0], exact).unwrap();
        let m = uniform_mesh(3, 5, 2).unwrap();
        let gx = m.kv_x.greville();
        let gy = m.kv_y.greville();
        let mut c = vec![0.0; m.num_dofs()];
        for iy in 0..m.n_basis_y() {
            for ix in 0..m.n_basis_x() {
                c[m.dof(ix, iy)] = gx[ix] * gy[iy];
            }
        }
        let f = SolutionField::new(m, c).unwrap();
        let e = error_norms(&f, &spec, H1Definition::Full, None).unwrap();
        assert!(e.l2_rel_percent < 1e-10 && e.h1_rel_percent < 1e-10, "{e:?}");
    }

    #[test]
    fn fine_mesh_galerkin_is_accurate() {
        let spec = problem_ej(0.1).unwrap();
        let m = uniform_mesh(40, 40, 2).unwrap();
        let field = solve(Method::Galerkin, &m, &spec).unwrap();
        let e = error_norms(&field, &spec, H1Definition::Full, None).unwrap();
        assert!(e.l2_rel_percent < 0.1, "{e:?}");
        assert!(e.h1_rel_percent < 2.0, "{e:?}");
    }

    #[test]
    fn seminorm_differs_from_full_norm() {
        let spec = problem_ej(0.01).unwrap();
        let m = uniform_mesh(10, 4, 2).unwrap();
        let f = solve(Method::Galerkin, &m, &spec).unwrap();
        let full = error_norms(&f, &spec, H1Definition::Full, None).unwrap();
        let semi = error_norms(&f, &spec, H1Definition::Seminorm, None).unwrap();
        assert_eq!(full.h1_semi_rel_percent, semi.h1_rel_percent);
        assert!((full.h1_rel_percent - semi.h1_rel_percent).abs() > 1e-6);
        assert_eq!(full.l2_rel_percent, semi.l2_rel_percent);
    }

    #[test]
    fn missing_exact() {
        let spec = ProblemSpec::new("none", 1.0, [1.0, 0.0], |_, _| 0.0, |_, _| 0.0).unwrap();
        let m = uniform_mesh(2, 2, 2).unwrap();
        let f = SolutionField::new(m.clone(), vec![0.0; m.num_dofs()]).unwrap();
        assert!(matches!(error_norms(&f, &spec, H1Definition::Full, None), Err(Error::NoExactSolution(_))));
    }

    #[test]
    fn rayleigh_ratio_of_identical_forms_is_one() {
        let m = uniform_mesh(5, 5, 2).unwrap();
        let g = energy_gram(&m, &problem_ej(0.01).unwrap()).unwrap();
        assert!((min_rayleigh_ratio(&g, &g).unwrap() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn advection_matrix_is_skew() {
        let m = uniform_mesh(8, 8, 2).unwrap();
        for beta in [[1.0, 0.0], [1.0, 1.0]] {
            let a = advection_matrix(&m, beta).unwrap();
            let skew = a.add(&a.transpose()).max_abs();
            assert!(skew < 1e-12 * a.max_abs().max(1.0), "{skew}");
        }
    }

    #[test]
    fn sampling() {
        let m = uniform_mesh(4, 4, 2).unwrap();
        let f = SolutionField::new(m.clone(), vec![1.0; m.num_dofs()]).unwrap();
        let s = sample_field(&f, 5, 3).unwrap();
        assert_eq!(s.len(), 15);
        assert!(s.iter().all(|p| (p.value - 1.0).abs() < 1e-14));
        assert_eq!((s[1].x, s[1].y), (0.25, 0.0));
        assert_eq!((s[14].x, s[14].y), (1.0, 1.0));
        assert!(sample_field(&f, 1, 3).is_err());

        let spec = problem_ej(0.01).unwrap();
        let m = uniform_mesh(10, 4, 2).unwrap();
        let lift = apply_dirichlet_lift(&m, &spec).unwrap();
        let f = SolutionField::new(m, lift).unwrap();
        for p in sample_field(&f, 3, 21).unwrap().iter().filter(|p| p.x == 0.0) {
            assert!((p.value - (PI * p.y).sin()).abs() < 0.02);
        }
    }
}
