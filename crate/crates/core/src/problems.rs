//! Model advection–diffusion problems on the unit square.
//!
//! Both closed-form solutions are evaluated in forms whose exponentials have
//! nonpositive arguments, so they stay finite for any `epsilon > 0`.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Value and derivatives up to second order of a scalar field at one point.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Jet {
    pub value: f64,
    pub dx: f64,
    pub dy: f64,
    pub dxx: f64,
    pub dyy: f64,
    pub dxy: f64,
}

impl Jet {
    pub fn laplacian(&self) -> f64 {
        self.dxx + self.dyy
    }

    /// `(a(x) b(y))` from the 1D triples `(f, f', f'')`.
    pub fn separable(a: [f64; 3], b: [f64; 3]) -> Self {
        Jet {
            value: a[0] * b[0],
            dx: a[1] * b[0],
            dy: a[0] * b[1],
            dxx: a[2] * b[0],
            dyy: a[0] * b[2],
            dxy: a[1] * b[1],
        }
    }
}

type ScalarFn = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;
type JetFn = Arc<dyn Fn(f64, f64) -> Jet + Send + Sync>;

/// Named model problems.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProblemKind {
    /// Double boundary layer, `beta = (1, 1)`.
    P1,
    /// Eriksson–Johnson, `beta = (1, 0)`.
    Ej,
}

impl ProblemKind {
    pub fn build(self, epsilon: f64) -> Result<ProblemSpec> {
        match self {
            ProblemKind::P1 => problem_one(epsilon),
            ProblemKind::Ej => problem_ej(epsilon),
        }
    }
}

impl fmt::Display for ProblemKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ProblemKind::P1 => "p1",
            ProblemKind::Ej => "ej",
        })
    }
}

impl FromStr for ProblemKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "p1" => Ok(ProblemKind::P1),
            "ej" => Ok(ProblemKind::Ej),
            other => Err(Error::Config(format!("unknown problem `{other}` (expected p1 or ej)"))),
        }
    }
}

/// `-eps Δu + beta·∇u = f` in the unit square with `u = g` on the boundary.
#[derive(Clone)]
pub struct ProblemSpec {
    pub name: String,
    pub epsilon: f64,
    pub beta: [f64; 2],
    source: ScalarFn,
    boundary: ScalarFn,
    exact: Option<JetFn>,
}

impl fmt::Debug for ProblemSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ProblemSpec")
            .field("name", &self.name)
            .field("epsilon", &self.epsilon)
            .field("beta", &self.beta)
            .field("has_exact", &self.exact.is_some())
            .finish()
    }
}

impl ProblemSpec {
    pub fn new(
        name: impl Into<String>,
        epsilon: f64,
        beta: [f64; 2],
        source: impl Fn(f64, f64) -> f64 + Send + Sync + 'static,
        boundary: impl Fn(f64, f64) -> f64 + Send + Sync + 'static,
    ) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon.is_finite()) {
            return Err(Error::Config(format!("epsilon must be positive, got {epsilon}")));
        }
        Ok(Self {
            name: name.into(),
            epsilon,
            beta,
            source: Arc::new(source),
            boundary: Arc::new(boundary),
            exact: None,
        })
    }

    /// Problem whose data are generated from a known solution: `f = beta·∇u - eps Δu`, `g = u`.
    pub fn manufactured(
        name: impl Into<String>,
        epsilon: f64,
        beta: [f64; 2],
        exact: impl Fn(f64, f64) -> Jet + Send + Sync + 'static,
    ) -> Result<Self> {
        let exact: JetFn = Arc::new(exact);
        let (e1, e2) = (exact.clone(), exact.clone());
        let mut spec = Self::new(
            name,
            epsilon,
            beta,
            move |x, y| {
                let j = e1(x, y);
                beta[0] * j.dx + beta[1] * j.dy - epsilon * j.laplacian()
            },
            move |x, y| e2(x, y).value,
        )?;
        spec.exact = Some(exact);
        Ok(spec)
    }

    pub fn with_exact(mut self, exact: impl Fn(f64, f64) -> Jet + Send + Sync + 'static) -> Self {
        self.exact = Some(Arc::new(exact));
        self
    }

    pub fn source(&self, x: f64, y: f64) -> f64 {
        (self.source)(x, y)
    }

    pub fn boundary(&self, x: f64, y: f64) -> f64 {
        (self.boundary)(x, y)
    }

    pub fn has_exact(&self) -> bool {
        self.exact.is_some()
    }

    /// Exact value and gradient.
    pub fn eval_exact(&self, x: f64, y: f64) -> Result<(f64, f64, f64)> {
        let j = self.exact_jet(x, y)?;
        Ok((j.value, j.dx, j.dy))
    }

    pub fn exact_jet(&self, x: f64, y: f64) -> Result<Jet> {
        match &self.exact {
            Some(f) => Ok(f(x, y)),
            None => Err(Error::NoExactSolution(self.name.clone())),
        }
    }
}

/// The 1D factor `F(t) = t + (exp(t/eps) - 1) / (1 - exp(1/eps))` and its first two
/// derivatives, rewritten as
/// `F(t) = t + exp((t-1)/eps) (1 - exp(-t/eps)) / (exp(-1/eps) - 1)`.
pub fn layer_factor(t: f64, epsilon: f64) -> [f64; 3] {
    let denom = (-1.0 / epsilon).exp_m1();
    let tail = ((t - 1.0) / epsilon).exp();
    let value = t + tail * -(-t / epsilon).exp_m1() / denom;
    let d1 = 1.0 + tail / (epsilon * denom);
    let d2 = tail / (epsilon * epsilon * denom);
    [value, d1, d2]
}

/// `beta = (1, 1)`, homogeneous boundary data, exact solution `F(x) F(y)`.
///
/// The matching source is `f = F(x) + F(y)` since `F' - eps F'' = 1`.
pub fn problem_one(epsilon: f64) -> Result<ProblemSpec> {
    Ok(ProblemSpec::new(
        "p1",
        epsilon,
        [1.0, 1.0],
        move |x, y| layer_factor(x, epsilon)[0] + layer_factor(y, epsilon)[0],
        |_, _| 0.0,
    )?
    .with_exact(move |x, y| Jet::separable(layer_factor(x, epsilon), layer_factor(y, epsilon))))
}

/// Roots `(r1, r2)` of `eps r^2 - r - eps pi^2 = 0`; `r2` in cancellation-free form.
pub fn ej_rates(epsilon: f64) -> (f64, f64) {
    let s = (1.0 + 4.0 * epsilon * epsilon * PI * PI).sqrt();
    ((1.0 + s) / (2.0 * epsilon), -2.0 * PI * PI * epsilon / (1.0 + s))
}

/// x-profile of the Eriksson–Johnson solution with derivatives.
fn ej_profile(x: f64, r1: f64, r2: f64) -> [f64; 3] {
    let e1 = (r1 * (x - 1.0)).exp();
    let e2 = (r2 * (x - 1.0)).exp();
    let d = (-r1).exp() - (-r2).exp();
    [(e1 - e2) / d, (r1 * e1 - r2 * e2) / d, (r1 * r1 * e1 - r2 * r2 * e2) / d]
}

/// `beta = (1, 0)`, inflow data `sin(pi y)` at `x = 0`, zero elsewhere.
pub fn problem_ej(epsilon: f64) -> Result<ProblemSpec> {
    let (r1, r2) = ej_rates(epsilon);
    Ok(ProblemSpec::new(
        "ej",
        epsilon,
        [1.0, 0.0],
        |_, _| 0.0,
        |x, y| if x == 0.0 { (PI * y).sin() } else { 0.0 },
    )?
    .with_exact(move |x, y| {
        let s = [(PI * y).sin(), PI * (PI * y).cos(), -PI * PI * (PI * y).sin()];
        Jet::separable(ej_profile(x, r1, r2), s)
    }))
}
