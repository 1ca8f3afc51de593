//! Input dimension larger than the neuron count.
//!
//! Zero-padding a `k x k` critical point to `k x d` keeps it critical. After
//! grouping coordinates by input index, the padded Hessian is block diagonal:
//! the `k^2 x k^2` Hessian of the square problem followed by `d - k` identical
//! copies of a `k x k` matrix `M` acting on the padding coordinates.

use std::f64::consts::PI;

use nalgebra::DMatrix;

use super::{assemble_hessian, HessianMatrix};
use crate::error::{Error, Result};
use crate::loss_geometry::{pair_angle, NeuronMatrix, TargetMatrix};

#[derive(Debug, Clone, PartialEq)]
pub struct PaddedHessian {
    /// Hessian of the square problem.
    pub base: HessianMatrix,
    /// Curvature along one padding coordinate, indexed by neuron.
    pub extra: DMatrix<f64>,
    /// Number of padding coordinates, `d - k`.
    pub copies: usize,
}

/// Block-diagonal form of the Hessian at `w` zero-padded to input dimension `d`.
pub fn extend_d_gt_k(w: &NeuronMatrix, d: usize) -> Result<PaddedHessian> {
    let k = w.k();
    if w.d() != k {
        return Err(Error::ShapeMismatch(format!("expected a square student, got {k}x{}", w.d())));
    }
    if d <= k {
        return Err(Error::ShapeMismatch(format!("need d > k, got d = {d}, k = {k}")));
    }
    let base = assemble_hessian(w, &TargetMatrix::matching(w))?;
    let ws = w.rows();
    let norms = w.norms();
    let mut extra = DMatrix::zeros(k, k);
    for i in 0..k {
        let mut curv = 0.0;
        for l in 0..k {
            if l != i {
                curv += pair_angle(&ws[i], &ws[l])?.sin() * norms[l] / norms[i];
            }
            let alpha = (ws[i][l] / norms[i]).clamp(-1.0, 1.0).acos();
            curv -= alpha.sin() / norms[i];
        }
        extra[(i, i)] = 0.5 + curv / (2.0 * PI);
        for j in i + 1..k {
            let m = (PI - pair_angle(&ws[i], &ws[j])?) / (2.0 * PI);
            extra[(i, j)] = m;
            extra[(j, i)] = m;
        }
    }
    Ok(PaddedHessian { base, extra, copies: d - k })
}

impl PaddedHessian {
    pub fn k(&self) -> usize {
        self.base.k()
    }

    pub fn d(&self) -> usize {
        self.base.k() + self.copies
    }

    /// The same operator in neuron-major order on `k x d` matrices, directly
    /// comparable with [`assemble_hessian`] on the padded student.
    pub fn to_natural(&self) -> HessianMatrix {
        let (k, d) = (self.k(), self.d());
        let mut data = DMatrix::zeros(k * d, k * d);
        for p in 0..k {
            for q in 0..k {
                for i in 0..k {
                    for j in 0..k {
                        data[(p * d + i, q * d + j)] = self.base.entry(p, q, i, j);
                    }
                }
                for c in k..d {
                    data[(p * d + c, q * d + c)] = self.extra[(p, q)];
                }
            }
        }
        HessianMatrix::from_dense(k, d, data).expect("square by construction")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn teacher_padding_block() {
        let k = 6;
        let v = TargetMatrix::padded_identity(k, k).unwrap().as_neurons();
        let ph = extend_d_gt_k(&v, 8).unwrap();
        for i in 0..k {
            for j in 0..k {
                let expect = if i == j { 0.5 } else { 0.25 };
                assert!((ph.extra[(i, j)] - expect).abs() < 1e-15);
            }
        }
        assert_eq!(ph.copies, 2);
    }

    #[test]
    fn natural_order_matches_padded_assembly() {
        let w = NeuronMatrix::from_rows(&[
            vec![0.9, 0.1, -0.2, 0.05, 0.0],
            vec![0.2, 1.1, 0.3, -0.1, 0.1],
            vec![-0.1, 0.25, 0.8, 0.4, -0.3],
            vec![0.3, -0.2, 0.1, 1.0, 0.2],
            vec![0.05, 0.15, -0.25, 0.1, 0.95],
        ])
        .unwrap();
        let padded = w.zero_padded(7).unwrap();
        let brute = assemble_hessian(&padded, &TargetMatrix::matching(&padded)).unwrap();
        let ph = extend_d_gt_k(&w, 7).unwrap();
        assert!((brute.dense() - ph.to_natural().dense()).amax() < 1e-14);
    }

    #[test]
    fn rejects_non_padding_shapes() {
        let v = TargetMatrix::padded_identity(5, 5).unwrap().as_neurons();
        assert!(extend_d_gt_k(&v, 5).is_err());
        let wide = TargetMatrix::padded_identity(5, 6).unwrap().as_neurons();
        assert!(extend_d_gt_k(&wide, 8).is_err());
    }
}
