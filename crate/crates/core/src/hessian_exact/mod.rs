//! Exact Hessian of the population loss.
//!
//! [`assemble_hessian`] evaluates the generic closed form block by block.
//! [`delta_sk`] and [`delta_skm1`] give the same entries from a handful of
//! angles at points with `ΔS_k` and `Δ(S_{k-1} x S_1)` isotropy, and
//! [`padded`] handles input dimension larger than the neuron count.
//!
//! Vectorization is neuron-major: coordinate `(p, i)` sits at `p * d + i`.

pub mod delta_sk;
pub mod delta_skm1;
pub mod finite_difference;
pub mod padded;

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::loss_geometry::{pair_angle, NeuronMatrix, TargetMatrix, PARALLEL_EPS};

pub use delta_sk::{entries_delta_sk, DeltaSkAngles, DeltaSkEntries};
pub use delta_skm1::{entries_delta_skm1, EntryCase, DeltaSkm1Entries, SevenAngles};
pub use finite_difference::{fd_gradient, fd_hessian};
pub use padded::{extend_d_gt_k, PaddedHessian};

/// Below this sine the residual direction is taken to be zero.
pub const RESIDUAL_SIN_EPS: f64 = 1e-9;

/// Symmetric `kd x kd` operator viewed as a `k x k` grid of `d x d` blocks.
#[derive(Debug, Clone, PartialEq)]
pub struct HessianMatrix {
    k: usize,
    d: usize,
    data: DMatrix<f64>,
}

impl HessianMatrix {
    pub fn from_dense(k: usize, d: usize, data: DMatrix<f64>) -> Result<Self> {
        if data.shape() != (k * d, k * d) {
            return Err(Error::ShapeMismatch(format!(
                "expected {0}x{0}, got {1}x{2}",
                k * d,
                data.nrows(),
                data.ncols()
            )));
        }
        Ok(Self { k, d, data })
    }

    pub fn identity(k: usize, d: usize) -> Self {
        Self { k, d, data: DMatrix::identity(k * d, k * d) }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn dim(&self) -> usize {
        self.k * self.d
    }

    pub fn dense(&self) -> &DMatrix<f64> {
        &self.data
    }

    pub fn into_dense(self) -> DMatrix<f64> {
        self.data
    }

    /// Block `H^{pq}`.
    pub fn block(&self, p: usize, q: usize) -> DMatrix<f64> {
        self.data.view((p * self.d, q * self.d), (self.d, self.d)).into_owned()
    }

    /// `H^{pq}_{ij}`.
    pub fn entry(&self, p: usize, q: usize, i: usize, j: usize) -> f64 {
        self.data[(p * self.d + i, q * self.d + j)]
    }

    pub fn max_asymmetry(&self) -> f64 {
        let n = self.dim();
        let mut worst = 0.0f64;
        for a in 0..n {
            for b in a + 1..n {
                worst = worst.max((self.data[(a, b)] - self.data[(b, a)]).abs());
            }
        }
        worst
    }

    /// Applies the operator to a `k x d` matrix through its row-major vectorization.
    pub fn apply(&self, m: &DMatrix<f64>) -> DMatrix<f64> {
        let out = &self.data * vectorize(m);
        unvectorize(&out, m.nrows(), m.ncols())
    }
}

/// Row-major vectorization.
pub fn vectorize(m: &DMatrix<f64>) -> DVector<f64> {
    DVector::from_iterator(m.len(), m.transpose().iter().copied())
}

/// Inverse of [`vectorize`].
pub fn unvectorize(v: &DVector<f64>, rows: usize, cols: usize) -> DMatrix<f64> {
    DMatrix::from_row_slice(rows, cols, v.as_slice())
}

/// Angle between `u` and `v` computed as `2 atan2(|û - v̂|, |û + v̂|)`, which
/// stays accurate for nearly parallel vectors where `acos` loses half the digits.
pub fn stable_angle(u: &DVector<f64>, v: &DVector<f64>) -> Result<f64> {
    let (nu, nv) = (u.norm(), v.norm());
    if nu == 0.0 || nv == 0.0 {
        return Err(Error::ZeroVector);
    }
    let (a, b) = (u / nu, v / nv);
    Ok(2.0 * (&a - &b).norm().atan2((&a + &b).norm()))
}

/// Unit vector along the part of `w` orthogonal to `v`, or zero when they are parallel.
#[derive(Debug, Clone, PartialEq)]
pub struct ResidualDirection {
    pub nbar: DVector<f64>,
}

impl ResidualDirection {
    pub fn new(w: &DVector<f64>, v: &DVector<f64>) -> Result<Self> {
        let theta = stable_angle(w, v)?;
        if theta.sin() < RESIDUAL_SIN_EPS {
            return Ok(Self { nbar: DVector::zeros(w.len()) });
        }
        let n = w / w.norm() - v * (theta.cos() / v.norm());
        let len = n.norm();
        Ok(Self { nbar: n / len })
    }
}

/// Curvature contributed to a diagonal block by the pair `(w, v)`.
pub fn h1_term(w: &DVector<f64>, v: &DVector<f64>) -> Result<DMatrix<f64>> {
    let theta = stable_angle(w, v)?;
    let d = w.len();
    let s = theta.sin();
    if s < RESIDUAL_SIN_EPS {
        return Ok(DMatrix::zeros(d, d));
    }
    let (nw, nv) = (w.norm(), v.norm());
    let n = ResidualDirection::new(v, w)?.nbar;
    let mut m = DMatrix::identity(d, d) - (w * w.transpose()) / (nw * nw) + &n * n.transpose();
    m *= s * nv / (2.0 * PI * nw);
    Ok(m)
}

/// Mixed second derivative of the kernel in its two arguments.
pub fn h2_term(w: &DVector<f64>, v: &DVector<f64>) -> Result<DMatrix<f64>> {
    let theta = stable_angle(w, v)?;
    if 1.0 - theta.cos().abs() < PARALLEL_EPS {
        return Err(Error::ParallelRows(0, 1));
    }
    let d = w.len();
    let nwv = ResidualDirection::new(w, v)?.nbar;
    let nvw = ResidualDirection::new(v, w)?.nbar;
    let mut m = DMatrix::identity(d, d) * (PI - theta)
        + &nwv * (v.transpose() / v.norm())
        + &nvw * (w.transpose() / w.norm());
    m /= 2.0 * PI;
    Ok(m)
}

/// Assembles the full Hessian from the generic block formulas.
///
/// Off-diagonal blocks are computed once for `p < q` and transposed, so the
/// result is exactly symmetric. The sum inside each diagonal block runs in
/// index order, so the result does not depend on thread count.
pub fn assemble_hessian(w: &NeuronMatrix, v: &TargetMatrix) -> Result<HessianMatrix> {
    if w.k() != v.k() || w.d() != v.d() {
        return Err(Error::ShapeMismatch("student and teacher shapes differ".into()));
    }
    w.ensure_no_parallel_rows()?;
    let (k, d) = (w.k(), w.d());
    let ws = w.rows();
    let vs = v.rows();

    let strips: Vec<(DMatrix<f64>, Vec<DMatrix<f64>>)> = (0..k)
        .into_par_iter()
        .map(|p| -> Result<_> {
            let mut diag = DMatrix::identity(d, d) * 0.5;
            for q in 0..k {
                if q != p {
                    diag += h1_term(&ws[p], &ws[q])?;
                }
                diag -= h1_term(&ws[p], &vs[q])?;
            }
            let diag = (&diag + diag.transpose()) * 0.5;
            let upper = (p + 1..k).map(|q| h2_term(&ws[p], &ws[q])).collect::<Result<Vec<_>>>()?;
            Ok((diag, upper))
        })
        .collect::<Result<_>>()?;

    let mut data = DMatrix::zeros(k * d, k * d);
    for (p, (diag, upper)) in strips.into_iter().enumerate() {
        data.view_mut((p * d, p * d), (d, d)).copy_from(&diag);
        for (offset, block) in upper.into_iter().enumerate() {
            let q = p + 1 + offset;
            data.view_mut((p * d, q * d), (d, d)).copy_from(&block);
            data.view_mut((q * d, p * d), (d, d)).copy_from(&block.transpose());
        }
    }
    Ok(HessianMatrix { k, d, data })
}

/// Combinator tables behind the angle-specialized entry formulas, read off a
/// concrete student:
///
/// * `A^p_{ij} = ŵ^p_i ŵ^p_j`
/// * `A^{pq}_{ij} = A^p_{ij} + A^q_{ij}`
/// * `B^{pq}_{ij} = ŵ^p_i ŵ^q_j + ŵ^q_i ŵ^p_j`
/// * `(KA)^{pq}_{ij} = n_i n_j` with `n` the residual direction of teacher row `q` against `w^p`
///
/// where `ŵ^p` is the unit vector along neuron `p`.
#[derive(Debug, Clone)]
pub struct BlockEntryTerms {
    units: Vec<DVector<f64>>,
    angles: DMatrix<f64>,
    residuals: Vec<Vec<DVector<f64>>>,
}

impl BlockEntryTerms {
    pub fn new(w: &NeuronMatrix, v: &TargetMatrix) -> Result<Self> {
        let ws = w.rows();
        let vs = v.rows();
        let k = w.k();
        let units = ws.iter().map(|x| x / x.norm()).collect();
        let angles = DMatrix::from_fn(k, k, |p, q| pair_angle(&ws[p], &ws[q]).unwrap_or(0.0));
        let residuals = ws
            .iter()
            .map(|wp| vs.iter().map(|vq| ResidualDirection::new(vq, wp).map(|r| r.nbar)).collect())
            .collect::<Result<_>>()?;
        Ok(Self { units, angles, residuals })
    }

    pub fn a(&self, p: usize, i: usize, j: usize) -> f64 {
        self.units[p][i] * self.units[p][j]
    }

    pub fn a_pair(&self, p: usize, q: usize, i: usize, j: usize) -> f64 {
        self.a(p, i, j) + self.a(q, i, j)
    }

    pub fn b_pair(&self, p: usize, q: usize, i: usize, j: usize) -> f64 {
        let (u, w) = (&self.units[p], &self.units[q]);
        u[i] * w[j] + w[i] * u[j]
    }

    /// The product `K^{pq}_{ij} A^p_{ij}`; bounded by one in absolute value.
    pub fn ka(&self, p: usize, q: usize, i: usize, j: usize) -> f64 {
        let n = &self.residuals[p][q];
        n[i] * n[j]
    }

    /// Off-diagonal Hessian entry written through the combinators.
    pub fn off_diagonal_entry(&self, p: usize, q: usize, i: usize, j: usize) -> f64 {
        let theta = self.angles[(p, q)];
        let delta = if i == j { (PI - theta) / (2.0 * PI) } else { 0.0 };
        delta + (self.b_pair(p, q, i, j) - theta.cos() * self.a_pair(p, q, i, j)) / (2.0 * PI * theta.sin())
    }
}
