//! One-dimensional B-spline bases on open (clamped) knot vectors.
//!
//! Evaluation follows the Cox–de Boor recursion with the usual convention that
//! terms with a vanishing knot difference in the denominator are dropped.
//! Derivatives are obtained from the knot-difference formula, i.e. the
//! derivative of a degree-`p` spline is expressed in the degree `p - 1` basis.

use crate::error::{Error, Result};

/// Highest derivative order reported by [`eval_basis`].
pub const MAX_DERIVATIVE: usize = 2;

/// Open knot sequence together with the polynomial degree.
#[derive(Debug, Clone, PartialEq)]
pub struct KnotVector {
    knots: Vec<f64>,
    degree: usize,
}

impl KnotVector {
    /// Validates and wraps a knot sequence.
    ///
    /// The first and last knot must each appear exactly `degree + 1` times,
    /// interior knots at most `degree` times, and the sequence must be
    /// nondecreasing with at least `degree + 1` basis functions.
    pub fn new(knots: Vec<f64>, degree: usize) -> Result<Self> {
        let invalid = |reason: String| Err(Error::InvalidKnots(reason));
        if knots.iter().any(|k| !k.is_finite()) {
            return invalid("knots must be finite".into());
        }
        if let Some(i) = knots.windows(2).position(|w| w[1] < w[0]) {
            return invalid(format!("knot {} decreases", i + 1));
        }
        if knots.len() < 2 * (degree + 1) {
            return invalid(format!(
                "{} knots cannot carry degree {} (need at least {})",
                knots.len(),
                degree,
                2 * (degree + 1)
            ));
        }
        let first = knots[0];
        let last = knots[knots.len() - 1];
        if first >= last {
            return invalid("knot range is empty".into());
        }
        let lead = knots.iter().take_while(|&&k| k == first).count();
        let tail = knots.iter().rev().take_while(|&&k| k == last).count();
        if lead != degree + 1 || tail != degree + 1 {
            return invalid(format!(
                "end knots must repeat exactly {} times (found {lead} and {tail})",
                degree + 1
            ));
        }
        let interior = &knots[lead..knots.len() - tail];
        let mut run = 0;
        for (i, k) in interior.iter().enumerate() {
            run = if i > 0 && *k == interior[i - 1] { run + 1 } else { 1 };
            if run > degree {
                return invalid(format!("interior knot {k} repeated more than {degree} times"));
            }
        }
        Ok(Self { knots, degree })
    }

    /// Clamped knot vector on `[0, 1]` with `spans` equal intervals and maximal smoothness.
    pub fn uniform(spans: usize, degree: usize) -> Result<Self> {
        if spans == 0 {
            return Err(Error::InvalidKnots("need at least one span".into()));
        }
        let breaks: Vec<f64> = (0..=spans).map(|i| i as f64 / spans as f64).collect();
        Self::from_breakpoints(&breaks, degree)
    }

    /// Clamped knot vector with the given distinct breakpoints, each interior one simple.
    pub fn from_breakpoints(breaks: &[f64], degree: usize) -> Result<Self> {
        if breaks.len() < 2 {
            return Err(Error::InvalidKnots("need at least two breakpoints".into()));
        }
        let mut knots = Vec::with_capacity(breaks.len() + 2 * degree);
        knots.extend(std::iter::repeat(breaks[0]).take(degree));
        knots.extend_from_slice(breaks);
        knots.extend(std::iter::repeat(breaks[breaks.len() - 1]).take(degree));
        Self::new(knots, degree)
    }

    /// Builds the knot sequence from an index list and a point list, where knot
    /// `i` is `points[index[i]]`.
    pub fn from_indexed_points(index: &[usize], points: &[f64], degree: usize) -> Result<Self> {
        let knots = index
            .iter()
            .map(|&i| {
                points
                    .get(i)
                    .copied()
                    .ok_or_else(|| Error::InvalidKnots(format!("knot index {i} has no point")))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(knots, degree)
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn first(&self) -> f64 {
        self.knots[0]
    }

    pub fn last(&self) -> f64 {
        self.knots[self.knots.len() - 1]
    }

    /// Distinct knot values in increasing order.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut out: Vec<f64> = Vec::new();
        for &k in &self.knots {
            if out.last() != Some(&k) {
                out.push(k);
            }
        }
        out
    }

    /// Knot-span indices `i` with `knots[i] < knots[i + 1]`, i.e. one per element.
    pub fn nonempty_spans(&self) -> Vec<usize> {
        (self.degree..self.knots.len() - self.degree - 1)
            .filter(|&i| self.knots[i] < self.knots[i + 1])
            .collect()
    }

    /// Greville abscissa of every basis function (average of its `p` interior knots).
    pub fn greville(&self) -> Vec<f64> {
        let p = self.degree;
        (0..num_basis(self))
            .map(|i| {
                if p == 0 {
                    0.5 * (self.knots[i] + self.knots[i + 1])
                } else {
                    self.knots[i + 1..=i + p].iter().sum::<f64>() / p as f64
                }
            })
            .collect()
    }
}

/// Nonzero basis functions and their first two derivatives at one parameter.
#[derive(Debug, Clone, PartialEq)]
pub struct BasisEval {
    /// Global index of `values[0]`.
    pub first_index: usize,
    pub values: Vec<f64>,
    pub d1: Vec<f64>,
    pub d2: Vec<f64>,
}

impl BasisEval {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

pub fn num_basis(kv: &KnotVector) -> usize {
    kv.knots.len() - kv.degree - 1
}

/// Knot span `i` with `knots[i] <= x < knots[i + 1]`; the last nonempty span is
/// closed on the right.
pub fn find_span(kv: &KnotVector, x: f64) -> Result<usize> {
    let (a, b) = (kv.first(), kv.last());
    if !(a..=b).contains(&x) {
        return Err(Error::Domain { x, lo: a, hi: b });
    }
    let p = kv.degree;
    let n = num_basis(kv);
    let k = &kv.knots;
    if x >= k[n] {
        // walk back over the clamped end so the span is nonempty
        let mut i = n - 1;
        while k[i] == k[i + 1] {
            i -= 1;
        }
        return Ok(i);
    }
    let (mut lo, mut hi) = (p, n);
    while hi - lo > 1 {
        let mid = (lo + hi) / 2;
        if x < k[mid] {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(lo)
}

/// Values and derivatives (orders 0..=2) of the `p + 1` basis functions whose
/// support contains `x`.
pub fn eval_basis(kv: &KnotVector, x: f64) -> Result<BasisEval> {
    let span = find_span(kv, x)?;
    Ok(eval_basis_in_span(kv, span, x))
}

/// As [`eval_basis`] with a known span; `x` may lie anywhere in the closure of that span.
pub fn eval_basis_in_span(kv: &KnotVector, span: usize, x: f64) -> BasisEval {
    let p = kv.degree;
    let k = &kv.knots;
    // table[j][r]: degree-j functions, r = 0..=j, indices span-j..=span
    let mut table = vec![vec![0.0; p + 1]; p + 1];
    table[0][0] = 1.0;
    let mut left = vec![0.0; p + 1];
    let mut right = vec![0.0; p + 1];
    for j in 1..=p {
        left[j] = x - k[span + 1 - j];
        right[j] = k[span + j] - x;
        let mut saved = 0.0;
        for r in 0..j {
            let denom = right[r + 1] + left[j - r];
            let temp = if denom != 0.0 { table[j - 1][r] / denom } else { 0.0 };
            table[j][r] = saved + right[r + 1] * temp;
            saved = left[j - r] * temp;
        }
        table[j][j] = saved;
    }

    let mut ders = [vec![0.0; p + 1], vec![0.0; p + 1], vec![0.0; p + 1]];
    ders[0].copy_from_slice(&table[p]);

    for order in 1..=MAX_DERIVATIVE.min(p) {
        // Coefficients of the degree-(p - order) functions after `order` differentiations.
        for (r, out) in ders[order].iter_mut().enumerate() {
            *out = derivative_of(kv, span, r, order, &table);
        }
    }

    BasisEval {
        first_index: span - p,
        values: ders[0].clone(),
        d1: ders[1].clone(),
        d2: ders[2].clone(),
    }
}

/// `order`-th derivative of basis function `span - p + r` from the lower-degree table.
fn derivative_of(kv: &KnotVector, span: usize, r: usize, order: usize, table: &[Vec<f64>]) -> f64 {
    let p = kv.degree;
    let k = &kv.knots;
    let i = span - p + r;
    // a[j] multiplies N_{i+j, p-order}
    let mut a = vec![1.0];
    for step in 1..=order {
        let deg = p - step + 1;
        let mut next = vec![0.0; a.len() + 1];
        for (j, &c) in a.iter().enumerate() {
            let lo = i + j;
            let d = k[lo + deg] - k[lo];
            if d != 0.0 {
                next[j] += c * deg as f64 / d;
            }
            let d = k[lo + deg + 1] - k[lo + 1];
            if d != 0.0 {
                next[j + 1] -= c * deg as f64 / d;
            }
        }
        a = next;
    }
    let deg = p - order;
    // nonzero degree-`deg` functions at this span are span-deg..=span
    a.iter()
        .enumerate()
        .filter_map(|(j, &c)| {
            let idx = i + j;
            (idx + deg >= span && idx <= span).then(|| c * table[deg][idx + deg - span])
        })
        .sum()
}
