//! Central differences of the closed-form loss and gradient, used as
//! independent checks on the analytic derivatives.

use nalgebra::DMatrix;
use rayon::prelude::*;

use super::{vectorize, HessianMatrix};
use crate::error::Result;
use crate::loss_geometry::{loss_gradient, population_loss, NeuronMatrix, TargetMatrix};

fn shifted(w: &NeuronMatrix, p: usize, i: usize, by: f64) -> Result<NeuronMatrix> {
    let mut m = w.matrix().clone();
    m[(p, i)] += by;
    NeuronMatrix::new(m)
}

/// Central difference of the loss in every entry of `w`, step `h`.
pub fn fd_gradient(w: &NeuronMatrix, v: &TargetMatrix, h: f64) -> Result<DMatrix<f64>> {
    let (k, d) = (w.k(), w.d());
    let mut g = DMatrix::zeros(k, d);
    for p in 0..k {
        for i in 0..d {
            let up = population_loss(&shifted(w, p, i, h)?, v)?;
            let down = population_loss(&shifted(w, p, i, -h)?, v)?;
            g[(p, i)] = (up - down) / (2.0 * h);
        }
    }
    Ok(g)
}

/// Central difference of the analytic gradient, one column per coordinate,
/// symmetrized.
pub fn fd_hessian(w: &NeuronMatrix, v: &TargetMatrix, h: f64) -> Result<HessianMatrix> {
    let (k, d) = (w.k(), w.d());
    let n = k * d;
    let columns: Vec<_> = (0..n)
        .into_par_iter()
        .map(|c| -> Result<_> {
            let (p, i) = (c / d, c % d);
            let up = loss_gradient(&shifted(w, p, i, h)?, v)?;
            let down = loss_gradient(&shifted(w, p, i, -h)?, v)?;
            Ok(vectorize(&((up - down) / (2.0 * h))))
        })
        .collect::<Result<_>>()?;
    let m = DMatrix::from_columns(&columns);
    HessianMatrix::from_dense(k, d, (&m + m.transpose()) * 0.5)
}
