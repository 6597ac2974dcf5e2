//! Discrete systems for the four variational formulations.
//!
//! With `L w = beta·∇w - eps Δw` the bilinear forms are
//!
//! * Galerkin: `(beta·∇u, v) + eps (∇u, ∇v)`
//! * least squares (L2-optimal test functions `L v`): `(L u, L v)`
//! * GLS: `(1/h) [eps (∇u, ∇v) + (beta·∇u, v)] + (L u, L v)`
//! * SUPG: Galerkin `+ sum_K tau_K (R u, beta·∇v)_K`
//!
//! Dirichlet data enter through a lift `u0` interpolating `g` on the boundary;
//! `B(u0, v)` moves to the right-hand side and only interior DOFs are solved for.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, DenseMatrix};
use crate::meshes::{boundary_dof_mask, Element, TensorMesh};
use crate::problems::ProblemSpec;
use crate::quadrature::{element_points, gauss_rule, QuadRule1D};
use crate::splines::{eval_basis, eval_basis_in_span, num_basis, BasisEval};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Galerkin,
    #[serde(rename = "ls")]
    LeastSquares,
    Gls,
    Supg,
}

impl Method {
    pub const ALL: [Method; 4] = [Method::Galerkin, Method::LeastSquares, Method::Gls, Method::Supg];

    /// Whether the form needs second derivatives of the trial functions.
    pub fn needs_hessian(self) -> bool {
        matches!(self, Method::LeastSquares | Method::Gls)
    }

    pub fn cli_name(self) -> &'static str {
        match self {
            Method::Galerkin => "galerkin",
            Method::LeastSquares => "ls",
            Method::Gls => "gls",
            Method::Supg => "supg",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.cli_name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "galerkin" => Ok(Method::Galerkin),
            "ls" | "least_squares" => Ok(Method::LeastSquares),
            "gls" => Ok(Method::Gls),
            "supg" => Ok(Method::Supg),
            other => Err(Error::Config(format!(
                "unknown method `{other}` (expected galerkin, ls, gls or supg)"
            ))),
        }
    }
}

/// Sign of the diffusion term in the SUPG residual.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SupgResidual {
    /// `R(u) = beta·∇u + eps Δu`, the default.
    #[default]
    Plus,
    /// `R(u) = beta·∇u - eps Δu`, the strong residual of the equation.
    Consistent,
}

impl FromStr for SupgResidual {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "plus" => Ok(SupgResidual::Plus),
            "consistent" => Ok(SupgResidual::Consistent),
            other => Err(Error::Config(format!("unknown SUPG residual `{other}`"))),
        }
    }
}

impl fmt::Display for SupgResidual {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SupgResidual::Plus => "plus",
            SupgResidual::Consistent => "consistent",
        })
    }
}

/// How the SUPG parameter is chosen per element.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub enum SupgTau {
    #[default]
    Standard,
    Fixed(f64),
}

/// Factor `1/h` multiplying the Galerkin part of GLS, per element.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GlsWeight {
    /// `|beta_x|/hx + |beta_y|/hy`.
    #[default]
    Advective,
    /// `1 / diameter`.
    Diameter,
}

impl GlsWeight {
    pub fn value(self, beta: [f64; 2], element: &Element) -> f64 {
        match self {
            GlsWeight::Advective => beta[0].abs() / element.hx() + beta[1].abs() / element.hy(),
            GlsWeight::Diameter => 1.0 / element.diameter(),
        }
    }
}

impl FromStr for GlsWeight {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "advective" => Ok(GlsWeight::Advective),
            "diameter" => Ok(GlsWeight::Diameter),
            other => Err(Error::Config(format!(
                "unknown GLS weight `{other}` (expected advective or diameter)"
            ))),
        }
    }
}

impl fmt::Display for GlsWeight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GlsWeight::Advective => "advective",
            GlsWeight::Diameter => "diameter",
        })
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct AssemblyOptions {
    /// Gauss points per direction; `None` means `p + 2`.
    pub quad_points: Option<usize>,
    pub supg_residual: SupgResidual,
    pub supg_tau: SupgTau,
    pub gls_weight: GlsWeight,
}

impl AssemblyOptions {
    pub fn quad_points_for(&self, mesh: &TensorMesh) -> usize {
        self.quad_points.unwrap_or(mesh.degree() + 2)
    }
}

/// A 2D basis function (or any field) sampled at one point.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Shape {
    pub value: f64,
    pub grad: [f64; 2],
    /// `(d2/dx2, d2/dy2)`.
    pub hess: [f64; 2],
}

impl Shape {
    pub fn laplacian(&self) -> f64 {
        self.hess[0] + self.hess[1]
    }

    pub fn advective(&self, beta: [f64; 2]) -> f64 {
        beta[0] * self.grad[0] + beta[1] * self.grad[1]
    }
}

/// Quadrature point with element geometry.
#[derive(Debug, Clone, Copy)]
pub struct PointCtx<'a> {
    pub x: f64,
    pub y: f64,
    pub weight: f64,
    pub element: &'a Element,
}

/// `beta·∇e - eps Δe`.
pub fn strong_operator(spec: &ProblemSpec, value: f64, grad: [f64; 2], hess: [f64; 2]) -> f64 {
    let _ = value;
    spec.beta[0] * grad[0] + spec.beta[1] * grad[1] - spec.epsilon * (hess[0] + hess[1])
}

/// `tau = 1 / (beta_x/h_x + beta_y/h_y + 3 eps / (h_x^2 + h_y^2))`.
pub fn supg_tau(spec: &ProblemSpec, hx: f64, hy: f64) -> Result<f64> {
    supg_tau_raw(spec.beta, spec.epsilon, hx, hy)
}

/// [`supg_tau`] without a problem, for arbitrary (including zero) diffusion.
pub fn supg_tau_raw(beta: [f64; 2], epsilon: f64, hx: f64, hy: f64) -> Result<f64> {
    if !(hx > 0.0 && hy > 0.0) {
        return Err(Error::Config(format!("element sizes must be positive ({hx}, {hy})")));
    }
    let inv = beta[0] / hx + beta[1] / hy + 3.0 * epsilon / (hx * hx + hy * hy);
    if !(inv > 0.0) {
        return Err(Error::Config(format!("SUPG tau^-1 = {inv} is not positive")));
    }
    Ok(1.0 / inv)
}

/// Integrand `tau R(u) (beta·∇v)`.
pub fn supg_residual_term(
    spec: &ProblemSpec,
    u: &Shape,
    v: &Shape,
    tau: f64,
    residual: SupgResidual,
) -> f64 {
    let sign = match residual {
        SupgResidual::Plus => 1.0,
        SupgResidual::Consistent => -1.0,
    };
    let r = u.advective(spec.beta) + sign * spec.epsilon * u.laplacian();
    tau * r * v.advective(spec.beta)
}

/// Shapes of the `(p+1)^2` nonzero functions at a point, with their global DOFs.
fn shapes_at(mesh: &TensorMesh, bx: &BasisEval, by: &BasisEval, dofs: &mut Vec<usize>, out: &mut Vec<Shape>) {
    dofs.clear();
    out.clear();
    for a in 0..by.len() {
        for b in 0..bx.len() {
            dofs.push(mesh.dof(bx.first_index + b, by.first_index + a));
            out.push(Shape {
                value: bx.values[b] * by.values[a],
                grad: [bx.d1[b] * by.values[a], bx.values[b] * by.d1[a]],
                hess: [bx.d2[b] * by.values[a], bx.values[b] * by.d2[a]],
            });
        }
    }
}

/// Element-by-element assembly of a bilinear form over all DOFs.
///
/// `form(ctx, trial, test)` is the integrand; entry `(i, j)` pairs test `i` with trial `j`.
/// Elements and quadrature points are visited in a fixed order, so results are reproducible.
pub fn assemble_matrix<F>(mesh: &TensorMesh, rule: &QuadRule1D, form: F) -> DenseMatrix
where
    F: Fn(&PointCtx, &Shape, &Shape) -> f64,
{
    let n = mesh.num_dofs();
    let mut a = DenseMatrix::zeros(n, n);
    let mut dofs = Vec::new();
    let mut shapes = Vec::new();
    for element in &mesh.elements {
        for q in element_points(rule, element) {
            let bx = eval_basis_in_span(&mesh.kv_x, element.span_x, q.x);
            let by = eval_basis_in_span(&mesh.kv_y, element.span_y, q.y);
            shapes_at(mesh, &bx, &by, &mut dofs, &mut shapes);
            let ctx = PointCtx { x: q.x, y: q.y, weight: q.weight, element };
            for (i, test) in shapes.iter().enumerate() {
                for (j, trial) in shapes.iter().enumerate() {
                    a[(dofs[i], dofs[j])] += q.weight * form(&ctx, trial, test);
                }
            }
        }
    }
    a
}

/// Element-by-element assembly of a linear form over all DOFs.
pub fn assemble_vector<F>(mesh: &TensorMesh, rule: &QuadRule1D, form: F) -> Vec<f64>
where
    F: Fn(&PointCtx, &Shape) -> f64,
{
    let mut b = vec![0.0; mesh.num_dofs()];
    let mut dofs = Vec::new();
    let mut shapes = Vec::new();
    for element in &mesh.elements {
        for q in element_points(rule, element) {
            let bx = eval_basis_in_span(&mesh.kv_x, element.span_x, q.x);
            let by = eval_basis_in_span(&mesh.kv_y, element.span_y, q.y);
            shapes_at(mesh, &bx, &by, &mut dofs, &mut shapes);
            let ctx = PointCtx { x: q.x, y: q.y, weight: q.weight, element };
            for (i, test) in shapes.iter().enumerate() {
                b[dofs[i]] += q.weight * form(&ctx, test);
            }
        }
    }
    b
}

/// Per-method integrands.
struct Integrands<'a> {
    method: Method,
    spec: &'a ProblemSpec,
    opts: AssemblyOptions,
}

impl Integrands<'_> {
    fn tau(&self, e: &Element) -> f64 {
        match self.opts.supg_tau {
            SupgTau::Standard => supg_tau(self.spec, e.hx(), e.hy()).unwrap_or(0.0),
            SupgTau::Fixed(t) => t,
        }
    }

    fn gls_weight(&self, e: &Element) -> f64 {
        self.opts.gls_weight.value(self.spec.beta, e)
    }

    fn galerkin(&self, u: &Shape, v: &Shape) -> f64 {
        let eps = self.spec.epsilon;
        u.advective(self.spec.beta) * v.value + eps * (u.grad[0] * v.grad[0] + u.grad[1] * v.grad[1])
    }

    fn strong(&self, w: &Shape) -> f64 {
        strong_operator(self.spec, w.value, w.grad, w.hess)
    }

    fn bilinear(&self, ctx: &PointCtx, u: &Shape, v: &Shape) -> f64 {
        match self.method {
            Method::Galerkin => self.galerkin(u, v),
            Method::LeastSquares => self.strong(u) * self.strong(v),
            Method::Gls => self.gls_weight(ctx.element) * self.galerkin(u, v) + self.strong(u) * self.strong(v),
            Method::Supg => {
                self.galerkin(u, v)
                    + supg_residual_term(self.spec, u, v, self.tau(ctx.element), self.opts.supg_residual)
            }
        }
    }

    fn linear(&self, ctx: &PointCtx, v: &Shape) -> f64 {
        let f = self.spec.source(ctx.x, ctx.y);
        if f == 0.0 {
            return 0.0;
        }
        match self.method {
            Method::Galerkin => f * v.value,
            Method::LeastSquares => f * self.strong(v),
            Method::Gls => f * (self.strong(v) + self.gls_weight(ctx.element) * v.value),
            Method::Supg => f * (v.value + self.tau(ctx.element) * v.advective(self.spec.beta)),
        }
    }
}

/// Square system over interior DOFs plus the data to rebuild the full field.
#[derive(Debug, Clone)]
pub struct AssembledSystem {
    pub method: Method,
    pub matrix: DenseMatrix,
    pub rhs: Vec<f64>,
    /// Global DOF of each interior unknown.
    pub interior: Vec<usize>,
    /// Global coefficients of the Dirichlet lift (zero on interior DOFs).
    pub lift: Vec<f64>,
}

impl AssembledSystem {
    /// `|A x - b| / |b|` (absolute when `b = 0`).
    pub fn relative_residual(&self, x: &[f64]) -> f64 {
        let ax = self.matrix.matvec(x);
        let r: Vec<f64> = ax.iter().zip(&self.rhs).map(|(a, b)| a - b).collect();
        let nb = linalg::norm2(&self.rhs);
        let nr = linalg::norm2(&r);
        if nb > 0.0 {
            nr / nb
        } else {
            nr
        }
    }

    /// Full coefficient vector from interior unknowns.
    pub fn expand(&self, x: &[f64]) -> Vec<f64> {
        let mut c = self.lift.clone();
        for (k, &g) in self.interior.iter().enumerate() {
            c[g] = x[k];
        }
        c
    }
}

/// Global (all-DOF) matrix and load vector of a method, before boundary reduction.
pub fn assemble_global(
    method: Method,
    mesh: &TensorMesh,
    spec: &ProblemSpec,
    opts: AssemblyOptions,
) -> Result<(DenseMatrix, Vec<f64>)> {
    if method.needs_hessian() && mesh.degree() < 2 {
        return Err(Error::Config(format!(
            "method `{method}` needs second derivatives (degree >= 2), mesh has degree {}",
            mesh.degree()
        )));
    }
    if method == Method::Supg && opts.supg_tau == SupgTau::Standard {
        for e in &mesh.elements {
            supg_tau(spec, e.hx(), e.hy())?;
        }
    }
    let rule = gauss_rule(opts.quad_points_for(mesh))?;
    let ig = Integrands { method, spec, opts };
    let a = assemble_matrix(mesh, &rule, |ctx, u, v| ig.bilinear(ctx, u, v));
    let b = assemble_vector(mesh, &rule, |ctx, v| ig.linear(ctx, v));
    Ok((a, b))
}

pub fn assemble(method: Method, mesh: &TensorMesh, spec: &ProblemSpec) -> Result<AssembledSystem> {
    assemble_with(method, mesh, spec, AssemblyOptions::default())
}

pub fn assemble_with(
    method: Method,
    mesh: &TensorMesh,
    spec: &ProblemSpec,
    opts: AssemblyOptions,
) -> Result<AssembledSystem> {
    let (a, b) = assemble_global(method, mesh, spec, opts)?;
    let lift = apply_dirichlet_lift(mesh, spec)?;
    let mask = boundary_dof_mask(mesh);
    let interior: Vec<usize> = (0..mesh.num_dofs()).filter(|&i| !mask[i]).collect();
    let a_lift = a.matvec(&lift);
    let rhs = interior.iter().map(|&i| b[i] - a_lift[i]).collect();
    let matrix = a.select(&interior, &interior);
    Ok(AssembledSystem { method, matrix, rhs, interior, lift })
}

/// Interpolates `g` along one boundary edge at the Greville abscissae of `kv`.
fn interpolate_edge(kv: &crate::splines::KnotVector, g: impl Fn(f64) -> f64) -> Result<Vec<f64>> {
    let n = num_basis(kv);
    let pts = kv.greville();
    let mut colloc = DenseMatrix::zeros(n, n);
    for (k, &t) in pts.iter().enumerate() {
        let e = eval_basis(kv, t)?;
        for (r, v) in e.values.iter().enumerate() {
            colloc[(k, e.first_index + r)] = *v;
        }
    }
    let rhs: Vec<f64> = pts.iter().map(|&t| g(t)).collect();
    if rhs.iter().all(|&v| v == 0.0) {
        return Ok(vec![0.0; n]);
    }
    linalg::lu_solve(&colloc, &rhs)
}

/// Lift coefficients: boundary DOFs interpolate `g` edge by edge at the Greville
/// abscissae; interior DOFs are zero.
pub fn apply_dirichlet_lift(mesh: &TensorMesh, spec: &ProblemSpec) -> Result<Vec<f64>> {
    let (nx, ny) = (mesh.n_basis_x(), mesh.n_basis_y());
    let (x0, x1) = (mesh.kv_x.first(), mesh.kv_x.last());
    let (y0, y1) = (mesh.kv_y.first(), mesh.kv_y.last());
    let mut lift = vec![0.0; mesh.num_dofs()];
    let bottom = interpolate_edge(&mesh.kv_x, |x| spec.boundary(x, y0))?;
    let top = interpolate_edge(&mesh.kv_x, |x| spec.boundary(x, y1))?;
    for ix in 0..nx {
        lift[mesh.dof(ix, 0)] = bottom[ix];
        lift[mesh.dof(ix, ny - 1)] = top[ix];
    }
    let left = interpolate_edge(&mesh.kv_y, |y| spec.boundary(x0, y))?;
    let right = interpolate_edge(&mesh.kv_y, |y| spec.boundary(x1, y))?;
    for iy in 0..ny {
        lift[mesh.dof(0, iy)] = left[iy];
        lift[mesh.dof(nx - 1, iy)] = right[iy];
    }
    Ok(lift)
}

/// Spline field on a tensor mesh.
#[derive(Debug, Clone)]
pub struct SolutionField {
    pub mesh: TensorMesh,
    pub coefficients: Vec<f64>,
}

impl SolutionField {
    pub fn new(mesh: TensorMesh, coefficients: Vec<f64>) -> Result<Self> {
        if coefficients.len() != mesh.num_dofs() {
            return Err(Error::Dimension(format!(
                "{} coefficients for {} basis functions",
                coefficients.len(),
                mesh.num_dofs()
            )));
        }
        Ok(Self { mesh, coefficients })
    }

    /// Value, gradient and pure second derivatives at `(x, y)`.
    pub fn shape_at(&self, x: f64, y: f64) -> Result<Shape> {
        let bx = eval_basis(&self.mesh.kv_x, x)?;
        let by = eval_basis(&self.mesh.kv_y, y)?;
        Ok(self.combine(&bx, &by))
    }

    fn combine(&self, bx: &BasisEval, by: &BasisEval) -> Shape {
        let mut s = Shape::default();
        for a in 0..by.len() {
            for b in 0..bx.len() {
                let c = self.coefficients[self.mesh.dof(bx.first_index + b, by.first_index + a)];
                s.value += c * bx.values[b] * by.values[a];
                s.grad[0] += c * bx.d1[b] * by.values[a];
                s.grad[1] += c * bx.values[b] * by.d1[a];
                s.hess[0] += c * bx.d2[b] * by.values[a];
                s.hess[1] += c * bx.values[b] * by.d2[a];
            }
        }
        s
    }

    /// Evaluation restricted to a given element (for quadrature loops).
    pub fn shape_in_element(&self, element: &Element, x: f64, y: f64) -> Shape {
        let bx = eval_basis_in_span(&self.mesh.kv_x, element.span_x, x);
        let by = eval_basis_in_span(&self.mesh.kv_y, element.span_y, y);
        self.combine(&bx, &by)
    }
}

/// `(value, d/dx, d/dy)` of the field.
pub fn eval_field(field: &SolutionField, x: f64, y: f64) -> Result<(f64, f64, f64)> {
    let s = field.shape_at(x, y)?;
    Ok((s.value, s.grad[0], s.grad[1]))
}

/// Solution of one method together with its assembled system diagnostics.
#[derive(Debug, Clone)]
pub struct Solved {
    pub field: SolutionField,
    pub relative_residual: f64,
    pub interior_dofs: usize,
}

pub fn solve(method: Method, mesh: &TensorMesh, spec: &ProblemSpec) -> Result<SolutionField> {
    Ok(solve_with(method, mesh, spec, AssemblyOptions::default())?.field)
}

pub fn solve_with(
    method: Method,
    mesh: &TensorMesh,
    spec: &ProblemSpec,
    opts: AssemblyOptions,
) -> Result<Solved> {
    let sys = assemble_with(method, mesh, spec, opts)?;
    let x = linalg::lu_solve(&sys.matrix, &sys.rhs)?;
    let relative_residual = sys.relative_residual(&x);
    let field = SolutionField::new(mesh.clone(), sys.expand(&x))?;
    Ok(Solved { field, relative_residual, interior_dofs: sys.interior.len() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::meshes::uniform_mesh;
    use crate::problems::{problem_ej, problem_one, Jet};
    use std::f64::consts::PI;

    fn shape(value: f64, grad: [f64; 2], hess: [f64; 2]) -> Shape {
        Shape { value, grad, hess }
    }

    #[test]
    fn strong_operator_examples() {
        let spec = problem_ej(0.01).unwrap();
        assert_eq!(strong_operator(&spec, 3.0, [0.0, 0.0], [0.0, 0.0]), 0.0);
        let spec = problem_ej(0.37).unwrap();
        assert_eq!(strong_operator(&spec, 0.3, [1.0, 0.0], [0.0, 0.0]), 1.0);
        // e = x^2 at x = 0.3
        let spec = problem_ej(0.01).unwrap();
        let v = strong_operator(&spec, 0.09, [0.6, 0.0], [2.0, 0.0]);
        assert!((v - 0.58).abs() < 1e-15);
    }

    #[test]
    fn gls_weights() {
        let m = uniform_mesh(10, 4, 2).unwrap();
        let e = &m.elements[0];
        assert!((GlsWeight::Advective.value([1.0, 0.0], e) - 10.0).abs() < 1e-12);
        assert!((GlsWeight::Advective.value([1.0, 1.0], e) - 14.0).abs() < 1e-12);
        let d = (0.01f64 + 0.0625).sqrt();
        assert!((GlsWeight::Diameter.value([1.0, 0.0], e) - 1.0 / d).abs() < 1e-12);
        assert_eq!("diameter".parse::<GlsWeight>().unwrap(), GlsWeight::Diameter);
        assert!("side".parse::<GlsWeight>().is_err());
    }

    #[test]
    fn tau_examples() {
        let spec = problem_ej(0.01).unwrap();
        let t = supg_tau(&spec, 0.1, 0.1).unwrap();
        assert!((t - 1.0 / 11.5).abs() < 1e-15, "{t}");
        let spec = problem_ej(0.1).unwrap();
        assert!((supg_tau(&spec, 0.1, 0.1).unwrap() - 0.04).abs() < 1e-15);
        let spec = problem_ej(1e-4).unwrap();
        assert!((supg_tau(&spec, 0.1, 0.1).unwrap() - 1.0 / 10.015).abs() < 1e-15);
        let t = supg_tau_raw([1.0, 1.0], 0.0, 0.2, 0.2).unwrap();
        assert!((t - 0.1).abs() < 1e-16);
        assert!(supg_tau_raw([-1.0, 0.0], 0.0, 0.1, 0.1).is_err());
        assert!(supg_tau_raw([1.0, 0.0], 0.0, 0.0, 0.1).is_err());
    }

    #[test]
    fn tau_grows_as_diffusion_vanishes() {
        let mut last = 0.0;
        for eps in [1.0, 0.1, 0.01, 1e-3, 1e-4, 0.0] {
            let t = supg_tau_raw([1.0, 1.0], eps, 0.1, 0.1).unwrap();
            assert!(t > last);
            last = t;
        }
        assert!((last - 0.05).abs() < 1e-16);
    }

    #[test]
    fn supg_term_examples() {
        let spec = problem_ej(0.3).unwrap();
        let c = shape(1.0, [0.0, 0.0], [0.0, 0.0]);
        let x = shape(0.5, [1.0, 0.0], [0.0, 0.0]);
        let yfun = shape(0.5, [0.0, 1.0], [0.0, 0.0]);
        assert_eq!(supg_residual_term(&spec, &c, &x, 0.04, SupgResidual::Plus), 0.0);
        assert_eq!(supg_residual_term(&spec, &x, &yfun, 0.04, SupgResidual::Plus), 0.0);
        assert!((supg_residual_term(&spec, &x, &x, 0.04, SupgResidual::Plus) - 0.04).abs() < 1e-16);
        // sign switch only touches the diffusion part
        let q = shape(0.0, [0.0, 0.0], [2.0, 0.0]);
        let p = supg_residual_term(&spec, &q, &x, 1.0, SupgResidual::Plus);
        let c = supg_residual_term(&spec, &q, &x, 1.0, SupgResidual::Consistent);
        assert!((p - 0.6).abs() < 1e-15 && (c + 0.6).abs() < 1e-15);
    }

    #[test]
    fn lift_for_zero_data_is_zero() {
        let m = uniform_mesh(10, 10, 2).unwrap();
        let lift = apply_dirichlet_lift(&m, &problem_one(0.01).unwrap()).unwrap();
        assert!(lift.iter().all(|&c| c == 0.0));
    }

    #[test]
    fn ej_lift() {
        let m = uniform_mesh(10, 4, 2).unwrap();
        let spec = problem_ej(0.01).unwrap();
        let lift = apply_dirichlet_lift(&m, &spec).unwrap();
        let mask = boundary_dof_mask(&m);
        for iy in 0..m.n_basis_y() {
            for ix in 0..m.n_basis_x() {
                let c = lift[m.dof(ix, iy)];
                if ix != 0 {
                    assert!(c.abs() < 1e-15, "({ix},{iy}) = {c}");
                }
                if !mask[m.dof(ix, iy)] {
                    assert_eq!(c, 0.0);
                }
            }
        }
        let field = SolutionField::new(m.clone(), lift).unwrap();
        let (v, _, _) = eval_field(&field, 0.0, 0.5).unwrap();
        assert!((v - 1.0).abs() < 0.02, "{v}");
        assert_eq!(eval_field(&field, 0.0, 0.0).unwrap().0, 0.0);
        for k in 0..=40 {
            let y = k as f64 / 40.0;
            let v = eval_field(&field, 0.0, y).unwrap().0;
            assert!((v - (PI * y).sin()).abs() < 0.02);
        }
    }

    #[test]
    fn field_reproduces_constants_and_linears() {
        let m = uniform_mesh(7, 5, 2).unwrap();
        let ones = SolutionField::new(m.clone(), vec![1.0; m.num_dofs()]).unwrap();
        let gx = m.kv_x.greville();
        let mut c = vec![0.0; m.num_dofs()];
        for iy in 0..m.n_basis_y() {
            for ix in 0..m.n_basis_x() {
                c[m.dof(ix, iy)] = gx[ix];
            }
        }
        let lin = SolutionField::new(m.clone(), c).unwrap();
        for i in 0..=13 {
            for j in 0..=9 {
                let (x, y) = (i as f64 / 13.0, j as f64 / 9.0);
                let (v, gx, gy) = eval_field(&ones, x, y).unwrap();
                assert!((v - 1.0).abs() < 1e-14 && gx.abs() < 1e-12 && gy.abs() < 1e-12);
                let (v, gx, _) = eval_field(&lin, x, y).unwrap();
                assert!((v - x).abs() < 1e-12 && (gx - 1.0).abs() < 1e-12);
            }
        }
        assert!(eval_field(&ones, 1.5, 0.5).is_err());
        assert!(SolutionField::new(m, vec![0.0; 3]).is_err());
    }

    #[test]
    fn field_gradient_matches_finite_differences() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let m = uniform_mesh(6, 6, 2).unwrap();
        let c = (0..m.num_dofs()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let f = SolutionField::new(m, c).unwrap();
        let h = 1e-6;
        for _ in 0..50 {
            let (x, y) = (rng.gen_range(0.01..0.99), rng.gen_range(0.01..0.99));
            let (_, gx, gy) = eval_field(&f, x, y).unwrap();
            let fx = (eval_field(&f, x + h, y).unwrap().0 - eval_field(&f, x - h, y).unwrap().0) / (2.0 * h);
            let fy = (eval_field(&f, x, y + h).unwrap().0 - eval_field(&f, x, y - h).unwrap().0) / (2.0 * h);
            // kinks at knots make the one-sided pieces differ only in curvature
            assert!((fx - gx).abs() <= 1e-5 * gx.abs().max(1.0));
            assert!((fy - gy).abs() <= 1e-5 * gy.abs().max(1.0));
        }
    }

    #[test]
    fn hessian_methods_need_quadratics() {
        let m = uniform_mesh(4, 4, 1).unwrap();
        let spec = problem_ej(0.1).unwrap();
        assert!(matches!(assemble(Method::LeastSquares, &m, &spec), Err(Error::Config(_))));
        assert!(matches!(assemble(Method::Gls, &m, &spec), Err(Error::Config(_))));
        assert!(assemble(Method::Galerkin, &m, &spec).is_ok());
    }

    #[test]
    fn system_shapes() {
        let m = uniform_mesh(10, 4, 2).unwrap();
        let spec = problem_ej(0.01).unwrap();
        for method in Method::ALL {
            let sys = assemble(method, &m, &spec).unwrap();
            assert_eq!(sys.matrix.n_rows(), 10 * 4);
            assert_eq!(sys.rhs.len(), 40);
            for i in 0..40 {
                assert!(sys.matrix.row(i).iter().any(|v| v.abs() > 0.0));
            }
        }
    }

    #[test]
    fn least_squares_matrix_is_gram_of_strong_operator() {
        let m = uniform_mesh(5, 5, 2).unwrap();
        let spec = problem_one(0.05).unwrap();
        let sys = assemble(Method::LeastSquares, &m, &spec).unwrap();
        assert!(sys.matrix.asymmetry() < 1e-10 * sys.matrix.max_abs());
        // direct quadrature of (L e_j, L e_i) with a finer rule
        let rule = gauss_rule(6).unwrap();
        for (i, j) in [(0, 0), (3, 4), (7, 2), (12, 13), (20, 15)] {
            let (gi, gj) = (sys.interior[i], sys.interior[j]);
            let mut s = 0.0;
            for e in &m.elements {
                for q in element_points(&rule, e) {
                    let unit = |g: usize| {
                        let mut c = vec![0.0; m.num_dofs()];
                        c[g] = 1.0;
                        let f = SolutionField::new(m.clone(), c).unwrap();
                        let sh = f.shape_in_element(e, q.x, q.y);
                        strong_operator(&spec, sh.value, sh.grad, sh.hess)
                    };
                    s += q.weight * unit(gi) * unit(gj);
                }
            }
            assert!((s - sys.matrix[(i, j)]).abs() < 1e-10 * sys.matrix.max_abs(), "({i},{j})");
        }
    }

    #[test]
    fn manufactured_solution_is_recovered_by_all_methods() {
        let exact = |x: f64, y: f64| {
            let (sx, cx) = (PI * x).sin_cos();
            let (sy, cy) = (PI * y).sin_cos();
            Jet {
                value: sx * sy + x * y,
                dx: PI * cx * sy + y,
                dy: PI * sx * cy + x,
                dxx: -PI * PI * sx * sy,
                dyy: -PI * PI * sx * sy,
                dxy: PI * PI * cx * cy + 1.0,
            }
        };
        let spec = ProblemSpec::manufactured("smooth", 1.0, [1.0, 0.5], exact).unwrap();
        let m = uniform_mesh(20, 20, 2).unwrap();
        for method in Method::ALL {
            let s = solve_with(method, &m, &spec, AssemblyOptions::default()).unwrap();
            assert!(s.relative_residual < 1e-10);
            let mut num = 0.0;
            let mut den = 0.0;
            for i in 0..=40 {
                for j in 0..=40 {
                    let (x, y) = (i as f64 / 40.0, j as f64 / 40.0);
                    let u = exact(x, y).value;
                    let uh = eval_field(&s.field, x, y).unwrap().0;
                    num += (u - uh).powi(2);
                    den += u * u;
                }
            }
            let rel = (num / den).sqrt();
            assert!(rel < 0.01, "{method}: {rel}");
        }
    }
}
