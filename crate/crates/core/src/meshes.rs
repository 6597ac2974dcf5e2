//! Tensor-product meshes on the unit square.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::splines::{num_basis, KnotVector};

/// Breakpoints of the geometrically refined direction, as published (27 points,
/// 26 spans halving toward 1). Values past 0.9995 carry ten decimals only.
pub const REFINED_POINTS: [f64; 27] = [
    0.0,
    0.5,
    0.75,
    0.875,
    0.9375,
    0.96875,
    0.984375,
    0.9921875,
    0.99609375,
    0.998046875,
    0.9990234375,
    0.9995117188,
    0.9997558594,
    0.9998779297,
    0.9999389648,
    0.9999694824,
    0.9999847412,
    0.9999923706,
    0.9999961853,
    0.9999980927,
    0.9999990463,
    0.9999995232,
    0.9999997616,
    0.9999998808,
    0.9999999404,
    0.9999999702,
    1.0,
];

/// Knot index list of the refined direction: knot `i` is `REFINED_POINTS[REFINED_INDEX[i]]`.
pub const REFINED_INDEX: [usize; 31] = [
    0, 0, 0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 13, 14, 15, 16, 17, 18, 19, 20, 21, 22, 23,
    24, 25, 26, 26, 26,
];

/// The refined 1D knot vector (quadratic, C1).
pub fn refined_knot_vector() -> KnotVector {
    KnotVector::from_indexed_points(&REFINED_INDEX, &REFINED_POINTS, 2)
        .expect("embedded refined knot vector is valid")
}

/// One rectangular element of a tensor mesh.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Element {
    /// Knot-span index in x (into `kv_x.knots()`).
    pub span_x: usize,
    pub span_y: usize,
    pub x0: f64,
    pub x1: f64,
    pub y0: f64,
    pub y1: f64,
}

impl Element {
    pub fn hx(&self) -> f64 {
        self.x1 - self.x0
    }

    pub fn hy(&self) -> f64 {
        self.y1 - self.y0
    }

    pub fn area(&self) -> f64 {
        self.hx() * self.hy()
    }

    /// Element diameter.
    pub fn diameter(&self) -> f64 {
        self.hx().hypot(self.hy())
    }
}

/// Which mesh a [`TensorMesh`] was built from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum MeshSpec {
    Uniform { nx: usize, ny: usize },
    RefinedEj,
    RefinedP1,
}

impl MeshSpec {
    pub fn build(self) -> Result<TensorMesh> {
        match self {
            MeshSpec::Uniform { nx, ny } => uniform_mesh(nx, ny, 2),
            MeshSpec::RefinedEj => Ok(refined_mesh_ej()),
            MeshSpec::RefinedP1 => Ok(refined_mesh_p1()),
        }
    }
}

impl fmt::Display for MeshSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MeshSpec::Uniform { nx, ny } if nx == ny => write!(f, "uniform:{nx}"),
            MeshSpec::Uniform { nx, ny } => write!(f, "uniform:{nx}x{ny}"),
            MeshSpec::RefinedEj => f.write_str("refined-ej"),
            MeshSpec::RefinedP1 => f.write_str("refined-p1"),
        }
    }
}

impl FromStr for MeshSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::MeshSpec(s.to_string());
        match s {
            "refined-ej" => return Ok(MeshSpec::RefinedEj),
            "refined-p1" => return Ok(MeshSpec::RefinedP1),
            _ => {}
        }
        let dims = s.strip_prefix("uniform:").ok_or_else(bad)?;
        let (nx, ny) = match dims.split_once('x') {
            Some((a, b)) => (a.parse().map_err(|_| bad())?, b.parse().map_err(|_| bad())?),
            None => {
                let n = dims.parse().map_err(|_| bad())?;
                (n, n)
            }
        };
        if nx == 0 || ny == 0 {
            return Err(bad());
        }
        Ok(MeshSpec::Uniform { nx, ny })
    }
}

/// Tensor-product B-spline space over the unit square with its element grid.
///
/// Global basis function `(i, j)` (x index `i`, y index `j`) has DOF number
/// `j * nx + i` where `nx = num_basis(kv_x)`.
#[derive(Debug, Clone)]
pub struct TensorMesh {
    pub kv_x: KnotVector,
    pub kv_y: KnotVector,
    pub elements: Vec<Element>,
}

impl TensorMesh {
    pub fn new(kv_x: KnotVector, kv_y: KnotVector) -> Self {
        let kx = kv_x.knots();
        let ky = kv_y.knots();
        let mut elements = Vec::new();
        for &sy in &kv_y.nonempty_spans() {
            for &sx in &kv_x.nonempty_spans() {
                elements.push(Element {
                    span_x: sx,
                    span_y: sy,
                    x0: kx[sx],
                    x1: kx[sx + 1],
                    y0: ky[sy],
                    y1: ky[sy + 1],
                });
            }
        }
        Self { kv_x, kv_y, elements }
    }

    pub fn degree(&self) -> usize {
        self.kv_x.degree().min(self.kv_y.degree())
    }

    pub fn n_basis_x(&self) -> usize {
        num_basis(&self.kv_x)
    }

    pub fn n_basis_y(&self) -> usize {
        num_basis(&self.kv_y)
    }

    pub fn num_dofs(&self) -> usize {
        self.n_basis_x() * self.n_basis_y()
    }

    pub fn dof(&self, ix: usize, iy: usize) -> usize {
        iy * self.n_basis_x() + ix
    }

    /// Per-element diameters, in element order.
    pub fn h_elem(&self) -> Vec<f64> {
        self.elements.iter().map(Element::diameter).collect()
    }

    /// Largest element diameter.
    pub fn h_max(&self) -> f64 {
        self.elements.iter().map(Element::diameter).fold(0.0, f64::max)
    }
}

pub fn uniform_mesh(nx: usize, ny: usize, p: usize) -> Result<TensorMesh> {
    if p == 0 {
        return Err(Error::Config("uniform mesh needs degree >= 1".into()));
    }
    Ok(TensorMesh::new(
        KnotVector::uniform(nx, p)?,
        KnotVector::uniform(ny, p)?,
    ))
}

/// Refined in x, four uniform quadratic spans in y.
pub fn refined_mesh_ej() -> TensorMesh {
    TensorMesh::new(
        refined_knot_vector(),
        KnotVector::uniform(4, 2).expect("valid"),
    )
}

/// Refined toward 1 in both directions.
pub fn refined_mesh_p1() -> TensorMesh {
    TensorMesh::new(refined_knot_vector(), refined_knot_vector())
}

/// `true` for every basis function whose x or y factor is the first or last
/// of its direction, i.e. the functions that do not vanish on the boundary.
pub fn boundary_dof_mask(mesh: &TensorMesh) -> Vec<bool> {
    let (nx, ny) = (mesh.n_basis_x(), mesh.n_basis_y());
    let mut mask = vec![false; nx * ny];
    for iy in 0..ny {
        for ix in 0..nx {
            mask[mesh.dof(ix, iy)] = ix == 0 || iy == 0 || ix == nx - 1 || iy == ny - 1;
        }
    }
    mask
}
