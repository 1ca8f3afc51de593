//! Closed-form population loss of a two-layer ReLU student against a fixed
//! teacher, its gradient, pairwise-angle bookkeeping, and the permutation
//! action on weight matrices.
//!
//! Neurons are rows. The teacher is always the identity padded with zero
//! columns.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Rows whose angle satisfies `1 - |cos| < PARALLEL_EPS` are treated as parallel.
pub const PARALLEL_EPS: f64 = 1e-12;

/// Student weights, one neuron per row, `k <= d`.
#[derive(Debug, Clone, PartialEq)]
pub struct NeuronMatrix {
    entries: DMatrix<f64>,
}

impl NeuronMatrix {
    /// Wraps a `k x d` matrix. Every row must be nonzero and `d >= k >= 1`.
    pub fn new(entries: DMatrix<f64>) -> Result<Self> {
        let (k, d) = entries.shape();
        if k == 0 || d < k {
            return Err(Error::ShapeMismatch(format!("need 1 <= k <= d, got {k}x{d}")));
        }
        for i in 0..k {
            if entries.row(i).norm() == 0.0 {
                return Err(Error::ZeroVector);
            }
        }
        Ok(Self { entries })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let k = rows.len();
        let d = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != d) {
            return Err(Error::ShapeMismatch("ragged rows".into()));
        }
        Self::new(DMatrix::from_fn(k, d, |i, j| rows[i][j]))
    }

    pub fn k(&self) -> usize {
        self.entries.nrows()
    }

    pub fn d(&self) -> usize {
        self.entries.ncols()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.entries
    }

    pub fn row(&self, i: usize) -> DVector<f64> {
        self.entries.row(i).transpose()
    }

    pub fn rows(&self) -> Vec<DVector<f64>> {
        (0..self.k()).map(|i| self.row(i)).collect()
    }

    pub fn norms(&self) -> Vec<f64> {
        (0..self.k()).map(|i| self.entries.row(i).norm()).collect()
    }

    /// Appends zero columns up to input dimension `d`.
    pub fn zero_padded(&self, d: usize) -> Result<Self> {
        if d < self.d() {
            return Err(Error::ShapeMismatch(format!("cannot pad d = {} down to {d}", self.d())));
        }
        let mut m = DMatrix::zeros(self.k(), d);
        m.view_mut((0, 0), (self.k(), self.d())).copy_from(&self.entries);
        Self::new(m)
    }

    /// Fails with `ParallelRows` on the first pair of (anti)parallel rows.
    pub fn ensure_no_parallel_rows(&self) -> Result<()> {
        let rows = self.rows();
        let norms = self.norms();
        for i in 0..rows.len() {
            for j in i + 1..rows.len() {
                let c = rows[i].dot(&rows[j]) / (norms[i] * norms[j]);
                if 1.0 - c.abs() < PARALLEL_EPS {
                    return Err(Error::ParallelRows(i, j));
                }
            }
        }
        Ok(())
    }
}

/// Teacher weights: `I_k` padded with `d - k` zero columns.
#[derive(Debug, Clone, PartialEq)]
pub struct TargetMatrix {
    entries: DMatrix<f64>,
}

impl TargetMatrix {
    pub fn padded_identity(k: usize, d: usize) -> Result<Self> {
        if k == 0 || d < k {
            return Err(Error::ShapeMismatch(format!("need 1 <= k <= d, got {k}x{d}")));
        }
        Ok(Self { entries: DMatrix::identity(k, d) })
    }

    /// The teacher matching the shape of `w`.
    pub fn matching(w: &NeuronMatrix) -> Self {
        Self { entries: DMatrix::identity(w.k(), w.d()) }
    }

    pub fn k(&self) -> usize {
        self.entries.nrows()
    }

    pub fn d(&self) -> usize {
        self.entries.ncols()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn rows(&self) -> Vec<DVector<f64>> {
        (0..self.k()).map(|i| self.entries.row(i).transpose()).collect()
    }

    /// The teacher viewed as a student; the global minimum.
    pub fn as_neurons(&self) -> NeuronMatrix {
        NeuronMatrix { entries: self.entries.clone() }
    }
}

fn check_shapes(w: &NeuronMatrix, v: &TargetMatrix) -> Result<()> {
    if w.k() != v.k() || w.d() != v.d() {
        return Err(Error::ShapeMismatch(format!(
            "student {}x{} vs teacher {}x{}",
            w.k(),
            w.d(),
            v.k(),
            v.d()
        )));
    }
    Ok(())
}

/// Angle between `u` and `v` in `[0, pi]`.
pub fn pair_angle(u: &DVector<f64>, v: &DVector<f64>) -> Result<f64> {
    let (nu, nv) = (u.norm(), v.norm());
    if nu == 0.0 || nv == 0.0 {
        return Err(Error::ZeroVector);
    }
    Ok((u.dot(v) / (nu * nv)).clamp(-1.0, 1.0).acos())
}

/// `E[relu(u.x) relu(v.x)]` for standard Gaussian `x`.
pub fn relu_kernel(u: &DVector<f64>, v: &DVector<f64>) -> Result<f64> {
    let theta = pair_angle(u, v)?;
    Ok(kernel_from_angle(u.norm(), v.norm(), theta))
}

fn kernel_from_angle(nu: f64, nv: f64, theta: f64) -> f64 {
    nu * nv / (2.0 * PI) * (theta.sin() + (PI - theta) * theta.cos())
}

/// Gradient of `relu_kernel(u, v)` in its first argument.
fn kernel_gradient(u: &DVector<f64>, v: &DVector<f64>) -> Result<DVector<f64>> {
    let theta = pair_angle(u, v)?;
    let scale = v.norm() * theta.sin() / u.norm();
    Ok((u * scale + v * (PI - theta)) / (2.0 * PI))
}

/// Population loss `F(W)`.
pub fn population_loss(w: &NeuronMatrix, v: &TargetMatrix) -> Result<f64> {
    check_shapes(w, v)?;
    let ws = w.rows();
    let vs = v.rows();
    let mut total = 0.0;
    for wi in &ws {
        for wj in &ws {
            total += relu_kernel(wi, wj)?;
        }
        for vj in &vs {
            total -= 2.0 * relu_kernel(wi, vj)?;
        }
    }
    // Teacher rows are orthonormal: g = 1/2 on the diagonal, 1/(2 pi) off it.
    let k = v.k() as f64;
    total += k * 0.5 + k * (k - 1.0) / (2.0 * PI);
    Ok((0.5 * total).max(0.0))
}

/// Gradient of [`population_loss`] as a `k x d` matrix.
pub fn loss_gradient(w: &NeuronMatrix, v: &TargetMatrix) -> Result<DMatrix<f64>> {
    check_shapes(w, v)?;
    w.ensure_no_parallel_rows()?;
    let ws = w.rows();
    let vs = v.rows();
    let mut grad = DMatrix::zeros(w.k(), w.d());
    for (p, wp) in ws.iter().enumerate() {
        let mut g = wp * 0.5;
        for (q, wq) in ws.iter().enumerate() {
            if q != p {
                g += kernel_gradient(wp, wq)?;
            }
        }
        for vq in &vs {
            g -= kernel_gradient(wp, vq)?;
        }
        grad.set_row(p, &g.transpose());
    }
    Ok(grad)
}

/// A pair of permutations acting on rows and columns. Stored as images:
/// `rows[i]` is where row `i` is sent.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PermPair {
    rows: Vec<usize>,
    cols: Vec<usize>,
}

fn is_permutation(p: &[usize]) -> bool {
    let mut seen = vec![false; p.len()];
    p.iter().all(|&i| i < p.len() && !std::mem::replace(&mut seen[i], true))
}

impl PermPair {
    pub fn new(rows: Vec<usize>, cols: Vec<usize>) -> Result<Self> {
        if !is_permutation(&rows) || !is_permutation(&cols) {
            return Err(Error::ShapeMismatch("not a permutation".into()));
        }
        Ok(Self { rows, cols })
    }

    pub fn identity(k: usize, d: usize) -> Self {
        Self { rows: (0..k).collect(), cols: (0..d).collect() }
    }

    /// The same permutation of `[k]` on rows and columns; padding columns stay fixed.
    pub fn diagonal(perm: &[usize], d: usize) -> Result<Self> {
        let k = perm.len();
        if d < k {
            return Err(Error::ShapeMismatch(format!("d = {d} < k = {k}")));
        }
        let cols = perm.iter().copied().chain(k..d).collect();
        Self::new(perm.to_vec(), cols)
    }

    pub fn row_perm(&self) -> &[usize] {
        &self.rows
    }

    pub fn col_perm(&self) -> &[usize] {
        &self.cols
    }

    /// `out[(pi(i), rho(j))] = m[(i, j)]`.
    ///
    /// # Panics
    /// If the shape of `m` does not match the permutation sizes.
    pub fn act(&self, m: &DMatrix<f64>) -> DMatrix<f64> {
        assert_eq!(m.shape(), (self.rows.len(), self.cols.len()), "permutation size mismatch");
        let mut out = DMatrix::zeros(m.nrows(), m.ncols());
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                out[(self.rows[i], self.cols[j])] = m[(i, j)];
            }
        }
        out
    }
}

/// Applies `(pi, rho)` to `w`: entry `(i, j)` of the result is `W[pi^-1(i)][rho^-1(j)]`.
///
/// # Panics
/// If the permutation sizes do not match `w`.
pub fn apply_symmetry(w: &NeuronMatrix, g: &PermPair) -> NeuronMatrix {
    NeuronMatrix { entries: g.act(&w.entries) }
}

/// All pairwise angles of a student against itself and the teacher.
#[derive(Debug, Clone, PartialEq)]
pub struct AngleProfile {
    /// Neuron-neuron angles; symmetric with zero diagonal.
    pub theta: DMatrix<f64>,
    /// `alpha[(i, j)]` is the angle between neuron `i` and teacher row `j`.
    pub alpha: DMatrix<f64>,
    pub norms: Vec<f64>,
}

impl AngleProfile {
    pub fn new(w: &NeuronMatrix, v: &TargetMatrix) -> Result<Self> {
        check_shapes(w, v)?;
        let ws = w.rows();
        let vs = v.rows();
        let k = w.k();
        let mut theta = DMatrix::zeros(k, k);
        let mut alpha = DMatrix::zeros(k, k);
        for i in 0..k {
            for j in 0..k {
                if i < j {
                    let t = pair_angle(&ws[i], &ws[j])?;
                    theta[(i, j)] = t;
                    theta[(j, i)] = t;
                }
                alpha[(i, j)] = pair_angle(&ws[i], &vs[j])?;
            }
        }
        Ok(Self { theta, alpha, norms: w.norms() })
    }
}
