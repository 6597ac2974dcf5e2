//! Dense kernels: LU with partial pivoting, Cholesky, cyclic Jacobi and the
//! Cholesky-reduced symmetric-definite generalized eigenproblem.

use std::ops::{Index, IndexMut};

use crate::error::{Error, Result};

pub const JACOBI_MAX_SWEEPS: usize = 100;

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::Dimension("ragged rows".into()));
        }
        Ok(Self { rows: r, cols: c, data: rows.concat() })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = Self::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    pub fn n_rows(&self) -> usize {
        self.rows
    }

    pub fn n_cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn frobenius(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.cols);
        (0..self.rows).map(|i| dot(self.row(i), x)).collect()
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows);
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                for j in 0..other.cols {
                    out.data[i * other.cols + j] += a * other.data[k * other.cols + j];
                }
            }
        }
        out
    }

    /// `x^T A x`.
    pub fn quadratic_form(&self, x: &[f64]) -> f64 {
        dot(x, &self.matvec(x))
    }

    /// `(A + A^T) / 2`.
    pub fn symmetric_part(&self) -> Self {
        Self::from_fn(self.rows, self.cols, |i, j| 0.5 * (self[(i, j)] + self[(j, i)]))
    }

    /// Largest `|A - A^T|` entry.
    pub fn asymmetry(&self) -> f64 {
        let mut m: f64 = 0.0;
        for i in 0..self.rows {
            for j in 0..i {
                m = m.max((self[(i, j)] - self[(j, i)]).abs());
            }
        }
        m
    }

    /// Submatrix with the given row and column index lists.
    pub fn select(&self, rows: &[usize], cols: &[usize]) -> Self {
        Self::from_fn(rows.len(), cols.len(), |i, j| self[(rows[i], cols[j])])
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self { rows: self.rows, cols: self.cols, data: self.data.iter().map(|v| v * s).collect() }
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect();
        Self { rows: self.rows, cols: self.cols, data }
    }
}

impl Index<(usize, usize)> for DenseMatrix {
    type Output = f64;

    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for DenseMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn require_square(a: &DenseMatrix) -> Result<()> {
    if a.is_square() {
        Ok(())
    } else {
        Err(Error::Dimension(format!("expected a square matrix, got {}x{}", a.rows, a.cols)))
    }
}

/// Solves `A x = b` by Gaussian elimination with partial pivoting.
pub fn lu_solve(a: &DenseMatrix, b: &[f64]) -> Result<Vec<f64>> {
    require_square(a)?;
    let n = a.rows;
    if b.len() != n {
        return Err(Error::Dimension(format!("rhs has length {}, matrix is {n}x{n}", b.len())));
    }
    let mut lu = a.data.clone();
    let mut x = b.to_vec();
    for k in 0..n {
        let (piv, pmax) = (k..n)
            .map(|i| (i, lu[i * n + k].abs()))
            .fold((k, -1.0), |acc, c| if c.1 > acc.1 { c } else { acc });
        if pmax == 0.0 || !pmax.is_finite() {
            return Err(Error::Singular(k));
        }
        if piv != k {
            for j in 0..n {
                lu.swap(k * n + j, piv * n + j);
            }
            x.swap(k, piv);
        }
        let pivot = lu[k * n + k];
        let (head, tail) = lu.split_at_mut((k + 1) * n);
        let krow = &head[k * n..];
        for i in 0..n - k - 1 {
            let row = &mut tail[i * n..(i + 1) * n];
            let f = row[k] / pivot;
            if f == 0.0 {
                continue;
            }
            row[k] = f;
            for j in k + 1..n {
                row[j] -= f * krow[j];
            }
            x[k + 1 + i] -= f * x[k];
        }
    }
    for k in (0..n).rev() {
        let s: f64 = (k + 1..n).map(|j| lu[k * n + j] * x[j]).sum();
        x[k] = (x[k] - s) / lu[k * n + k];
    }
    Ok(x)
}

/// Lower-triangular `L` with `L L^T = G`.
pub fn cholesky(g: &DenseMatrix) -> Result<DenseMatrix> {
    require_square(g)?;
    let n = g.rows;
    let tol = 1e-12 * g.max_abs().max(f64::MIN_POSITIVE);
    if g.asymmetry() > tol {
        return Err(Error::Dimension("matrix is not symmetric".into()));
    }
    let mut l = DenseMatrix::zeros(n, n);
    for j in 0..n {
        let s: f64 = (0..j).map(|k| l[(j, k)] * l[(j, k)]).sum();
        let d = g[(j, j)] - s;
        if !(d > 0.0) {
            return Err(Error::NotPositiveDefinite { index: j, pivot: d });
        }
        let d = d.sqrt();
        l[(j, j)] = d;
        for i in j + 1..n {
            let s: f64 = (0..j).map(|k| l[(i, k)] * l[(j, k)]).sum();
            l[(i, j)] = (g[(i, j)] - s) / d;
        }
    }
    Ok(l)
}

/// Full symmetric eigendecomposition by cyclic Jacobi rotations.
#[derive(Debug, Clone)]
pub struct SymEigen {
    /// Ascending.
    pub values: Vec<f64>,
    /// Column `k` is the eigenvector of `values[k]`.
    pub vectors: DenseMatrix,
    pub sweeps: usize,
}

impl SymEigen {
    pub fn min(&self) -> f64 {
        self.values[0]
    }

    pub fn max(&self) -> f64 {
        self.values[self.values.len() - 1]
    }

    pub fn vector(&self, k: usize) -> Vec<f64> {
        (0..self.vectors.rows).map(|i| self.vectors[(i, k)]).collect()
    }
}

pub fn sym_eig(s: &DenseMatrix) -> Result<SymEigen> {
    require_square(s)?;
    let n = s.rows;
    let scale = s.max_abs();
    if s.asymmetry() > 1e-10 * scale.max(f64::MIN_POSITIVE) {
        return Err(Error::Dimension("matrix is not symmetric".into()));
    }
    let mut a = s.symmetric_part();
    let mut v = DenseMatrix::identity(n);
    let target = 1e-12 * s.frobenius();
    let off = |a: &DenseMatrix| {
        let mut o = 0.0;
        for i in 0..n {
            for j in 0..i {
                o += 2.0 * a[(i, j)] * a[(i, j)];
            }
        }
        o.sqrt()
    };
    let mut sweeps = 0;
    while off(&a) > target {
        if sweeps == JACOBI_MAX_SWEEPS {
            return Err(Error::IterationLimit(JACOBI_MAX_SWEEPS));
        }
        sweeps += 1;
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let sn = t * c;
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = c * akp - sn * akq;
                    a[(k, q)] = sn * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = c * apk - sn * aqk;
                    a[(q, k)] = sn * apk + c * aqk;
                }
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = c * vkp - sn * vkq;
                    v[(k, q)] = sn * vkp + c * vkq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].total_cmp(&a[(j, j)]));
    let values = order.iter().map(|&i| a[(i, i)]).collect();
    let vectors = DenseMatrix::from_fn(n, n, |i, k| v[(i, order[k])]);
    Ok(SymEigen { values, vectors, sweeps })
}

/// `(lambda_min, lambda_max, v_min)` of a symmetric matrix.
pub fn sym_eig_extreme(s: &DenseMatrix) -> Result<(f64, f64, Vec<f64>)> {
    let e = sym_eig(s)?;
    Ok((e.min(), e.max(), e.vector(0)))
}

/// Extreme eigenpairs of `S v = lambda G v` with `G` symmetric positive definite.
#[derive(Debug, Clone)]
pub struct GeneralizedExtremes {
    pub min: f64,
    pub max: f64,
    /// `G`-normalized eigenvector of `min`.
    pub v_min: Vec<f64>,
    /// `G`-normalized eigenvector of `max`.
    pub v_max: Vec<f64>,
}

pub fn generalized_eig_extremes(s: &DenseMatrix, g: &DenseMatrix) -> Result<GeneralizedExtremes> {
    require_square(s)?;
    if s.rows != g.rows || !g.is_square() {
        return Err(Error::Dimension("S and G differ in size".into()));
    }
    let l = cholesky(g)?;
    let n = s.rows;
    // C = L^-1 S L^-T, via forward substitution on columns and rows
    let mut y = s.symmetric_part();
    forward_cols(&l, &mut y);
    let mut c = y.transpose();
    forward_cols(&l, &mut c);
    let c = c.symmetric_part();
    let e = sym_eig(&c)?;
    let back = |w: Vec<f64>| -> Vec<f64> {
        // v = L^-T w
        let mut v = w;
        for i in (0..n).rev() {
            let s: f64 = (i + 1..n).map(|k| l[(k, i)] * v[k]).sum();
            v[i] = (v[i] - s) / l[(i, i)];
        }
        v
    };
    Ok(GeneralizedExtremes {
        min: e.min(),
        max: e.max(),
        v_min: back(e.vector(0)),
        v_max: back(e.vector(n - 1)),
    })
}

/// `(lambda_min, v)` of `S v = lambda G v`.
pub fn generalized_min_eig(s: &DenseMatrix, g: &DenseMatrix) -> Result<(f64, Vec<f64>)> {
    let e = generalized_eig_extremes(s, g)?;
    Ok((e.min, e.v_min))
}

/// Overwrites `m` with `L^-1 m` for lower-triangular `L`.
fn forward_cols(l: &DenseMatrix, m: &mut DenseMatrix) {
    let n = l.rows;
    for j in 0..m.cols {
        for i in 0..n {
            let s: f64 = (0..i).map(|k| l[(i, k)] * m[(k, j)]).sum();
            m[(i, j)] = (m[(i, j)] - s) / l[(i, i)];
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random(n: usize, m: usize, rng: &mut ChaCha8Rng) -> DenseMatrix {
        DenseMatrix::from_fn(n, m, |_, _| rng.gen_range(-1.0..1.0))
    }

    fn random_spd(n: usize, rng: &mut ChaCha8Rng) -> DenseMatrix {
        let a = random(n, n, rng);
        a.transpose().matmul(&a).add(&DenseMatrix::identity(n))
    }

    #[test]
    fn lu_small() {
        let b = [1.0, 2.0, 3.0, 4.0, 5.0];
        assert_eq!(lu_solve(&DenseMatrix::identity(5), &b).unwrap(), b.to_vec());
        let a = DenseMatrix::from_rows(&[vec![2.0, 0.0], vec![0.0, 4.0]]).unwrap();
        assert_eq!(lu_solve(&a, &[2.0, 8.0]).unwrap(), vec![1.0, 2.0]);
    }

    #[test]
    fn lu_needs_pivoting() {
        let a = DenseMatrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        assert_eq!(lu_solve(&a, &[3.0, 4.0]).unwrap(), vec![4.0, 3.0]);
    }

    #[test]
    fn lu_singular_reports_column() {
        let a = DenseMatrix::from_rows(&[vec![1.0, 2.0, 3.0], vec![2.0, 4.0, 6.0], vec![1.0, 0.0, 1.0]]).unwrap();
        match lu_solve(&a, &[1.0, 1.0, 1.0]) {
            Err(Error::Singular(k)) => assert_eq!(k, 2),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn lu_random_residual() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let a = random(50, 50, &mut rng).add(&DenseMatrix::identity(50).scaled(10.0));
        let b: Vec<f64> = (0..50).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let x = lu_solve(&a, &b).unwrap();
        let r: Vec<f64> = a.matvec(&x).iter().zip(&b).map(|(p, q)| p - q).collect();
        assert!(norm2(&r) <= 1e-10 * (a.frobenius() * norm2(&x) + norm2(&b)));
    }

    #[test]
    fn cholesky_small() {
        let l = cholesky(&DenseMatrix::identity(3).scaled(4.0)).unwrap();
        assert_eq!(l, DenseMatrix::identity(3).scaled(2.0));
        let g = DenseMatrix::from_rows(&[vec![4.0, 2.0], vec![2.0, 5.0]]).unwrap();
        let l = cholesky(&g).unwrap();
        assert_eq!(l, DenseMatrix::from_rows(&[vec![2.0, 0.0], vec![1.0, 2.0]]).unwrap());
        let bad = DenseMatrix::from_rows(&[vec![1.0, 2.0], vec![2.0, 1.0]]).unwrap();
        assert!(matches!(cholesky(&bad), Err(Error::NotPositiveDefinite { index: 1, .. })));
    }

    #[test]
    fn cholesky_reconstructs() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let g = random_spd(25, &mut rng);
        let l = cholesky(&g).unwrap();
        let diff = l.matmul(&l.transpose()).add(&g.scaled(-1.0));
        assert!(diff.max_abs() < 1e-11 * g.max_abs());
    }

    #[test]
    fn eig_small() {
        let d = DenseMatrix::from_rows(&[vec![1.0, 0.0, 0.0], vec![0.0, 3.0, 0.0], vec![0.0, 0.0, 2.0]]).unwrap();
        let (lo, hi, v) = sym_eig_extreme(&d).unwrap();
        assert_eq!((lo, hi), (1.0, 3.0));
        assert_eq!(v[0].abs(), 1.0);
        let s = DenseMatrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        let (lo, hi, _) = sym_eig_extreme(&s).unwrap();
        assert!((lo + 1.0).abs() < 1e-15 && (hi - 1.0).abs() < 1e-15);
    }

    #[test]
    fn eig_random_residual_and_gershgorin() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a = random(30, 30, &mut rng).symmetric_part();
        let (lo, hi, v) = sym_eig_extreme(&a).unwrap();
        let av = a.matvec(&v);
        let r: f64 = av.iter().zip(&v).map(|(p, q)| (p - lo * q).powi(2)).sum::<f64>().sqrt();
        assert!(r < 1e-9);
        let (mut glo, mut ghi) = (f64::INFINITY, f64::NEG_INFINITY);
        for i in 0..30 {
            let rad: f64 = (0..30).filter(|&j| j != i).map(|j| a[(i, j)].abs()).sum();
            glo = glo.min(a[(i, i)] - rad);
            ghi = ghi.max(a[(i, i)] + rad);
        }
        assert!(glo <= lo && hi <= ghi);
    }

    #[test]
    fn generalized_trivial() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let g = random_spd(12, &mut rng);
        let (l, _) = generalized_min_eig(&g, &g).unwrap();
        assert!((l - 1.0).abs() < 1e-12);
        let (l, _) = generalized_min_eig(&g.scaled(2.0), &g).unwrap();
        assert!((l - 2.0).abs() < 1e-12);
    }

    #[test]
    fn generalized_random_residual() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let s = random_spd(20, &mut rng);
        let g = random_spd(20, &mut rng);
        let e = generalized_eig_extremes(&s, &g).unwrap();
        for (lam, v) in [(e.min, &e.v_min), (e.max, &e.v_max)] {
            let sv = s.matvec(v);
            let gv = g.matvec(v);
            let r: Vec<f64> = sv.iter().zip(&gv).map(|(a, b)| a - lam * b).collect();
            assert!(norm2(&r) < 1e-8 * s.frobenius() * norm2(v));
        }
    }
}
