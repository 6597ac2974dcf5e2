//! Gauss–Legendre rules and their tensor products over mesh elements.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::meshes::Element;

pub const MAX_POINTS: usize = 8;

/// Gauss–Legendre rule on `[-1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadRule1D {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl QuadRule1D {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

/// Legendre polynomial `P_n(x)` and its derivative.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let n = n as f64;
    let dp = n * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

pub fn gauss_rule(n: usize) -> Result<QuadRule1D> {
    if !(1..=MAX_POINTS).contains(&n) {
        return Err(Error::QuadratureOrder(n));
    }
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = (n + 1) / 2;
    for i in 0..m {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, d) = legendre(n, x);
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        if n % 2 == 1 && i == m - 1 {
            // middle node of odd rules
            x = 0.0;
        }
        let dp = legendre(n, x).1;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    Ok(QuadRule1D { nodes, weights })
}

/// Point of a 2D element rule in physical coordinates; `weight` includes the Jacobian.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadPoint {
    pub x: f64,
    pub y: f64,
    pub weight: f64,
}

/// Tensor-product rule with `rule.len()` points per direction mapped to `element`.
pub fn element_points(rule: &QuadRule1D, element: &Element) -> Vec<QuadPoint> {
    let (cx, hx) = (0.5 * (element.x0 + element.x1), 0.5 * element.hx());
    let (cy, hy) = (0.5 * (element.y0 + element.y1), 0.5 * element.hy());
    let jac = hx * hy;
    let mut out = Vec::with_capacity(rule.len() * rule.len());
    for (ny, wy) in rule.nodes.iter().zip(&rule.weights) {
        for (nx, wx) in rule.nodes.iter().zip(&rule.weights) {
            out.push(QuadPoint {
                x: cx + hx * nx,
                y: cy + hy * ny,
                weight: wx * wy * jac,
            });
        }
    }
    out
}

/// Convenience wrapper building an `n`-point rule first.
pub fn element_quadrature(element: &Element, n: usize) -> Result<Vec<QuadPoint>> {
    Ok(element_points(&gauss_rule(n)?, element))
}
