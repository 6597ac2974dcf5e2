#![allow(dead_code)]

use iga_stab::analysis::{advection_matrix, interior_dofs};
use iga_stab::formulations::{assemble_global, AssemblyOptions, Method, SolutionField, SupgTau};
use iga_stab::linalg::DenseMatrix;
use iga_stab::meshes::TensorMesh;
use iga_stab::problems::ProblemSpec;
use iga_stab::quadrature::{element_points, gauss_rule};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn global(method: Method, mesh: &TensorMesh, spec: &ProblemSpec, opts: AssemblyOptions) -> DenseMatrix {
    assemble_global(method, mesh, spec, opts).unwrap().0
}

fn rel_diff(a: &DenseMatrix, b: &DenseMatrix) -> f64 {
    a.add(&b.scaled(-1.0)).max_abs() / a.max_abs().max(b.max_abs())
}

/// `|A_gls - (w A_gal + A_ls)| / |A_gls|` on a uniform mesh with element weight `w`.
pub fn gls_decomposition_error(mesh: &TensorMesh, spec: &ProblemSpec) -> f64 {
    let o = AssemblyOptions::default();
    let w = o.gls_weight.value(spec.beta, &mesh.elements[0]);
    let gls = global(Method::Gls, mesh, spec, o);
    let sum = global(Method::Galerkin, mesh, spec, o).scaled(w).add(&global(Method::LeastSquares, mesh, spec, o));
    rel_diff(&gls, &sum)
}

pub fn supg_tau_zero_error(mesh: &TensorMesh, spec: &ProblemSpec) -> f64 {
    let o = AssemblyOptions { supg_tau: SupgTau::Fixed(0.0), ..Default::default() };
    let supg = global(Method::Supg, mesh, spec, o);
    let gal = global(Method::Galerkin, mesh, spec, AssemblyOptions::default());
    supg.add(&gal.scaled(-1.0)).max_abs() / gal.max_abs()
}

/// `|A + Aᵀ| / |A|` for the interior advection matrix.
pub fn advection_skewness(mesh: &TensorMesh, beta: [f64; 2]) -> f64 {
    let a = advection_matrix(mesh, beta).unwrap();
    a.add(&a.transpose()).max_abs() / a.max_abs()
}

pub struct LsCheck {
    pub asymmetry: f64,
    pub min_quadratic: f64,
    pub max_cross_check: f64,
}

/// Least-squares matrix: symmetry, `cᵀAc >= 0` over random interior vectors and
/// agreement of `cᵀAc` with `|L v_c|²` integrated directly.
pub fn least_squares_check(mesh: &TensorMesh, spec: &ProblemSpec, samples: usize, seed: u64) -> LsCheck {
    let a = global(Method::LeastSquares, mesh, spec, AssemblyOptions::default());
    let idx = interior_dofs(mesh);
    let ai = a.select(&idx, &idx);
    let rule = gauss_rule(mesh.degree() + 2).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut min_q = f64::INFINITY;
    let mut worst = 0.0f64;
    for _ in 0..samples {
        let c: Vec<f64> = (0..idx.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let q = ai.quadratic_form(&c);
        let mut full = vec![0.0; mesh.num_dofs()];
        for (k, &g) in idx.iter().enumerate() {
            full[g] = c[k];
        }
        let field = SolutionField::new(mesh.clone(), full).unwrap();
        let mut direct = 0.0;
        for e in &mesh.elements {
            for p in element_points(&rule, e) {
                let s = field.shape_in_element(e, p.x, p.y);
                let l = spec.beta[0] * s.grad[0] + spec.beta[1] * s.grad[1] - spec.epsilon * s.laplacian();
                direct += p.weight * l * l;
            }
        }
        min_q = min_q.min(q / c.iter().map(|v| v * v).sum::<f64>());
        worst = worst.max((q - direct).abs() / direct.abs().max(f64::MIN_POSITIVE));
    }
    LsCheck { asymmetry: ai.asymmetry(), min_quadratic: min_q, max_cross_check: worst }
}
