//! Restriction of an equivariant operator to the span of a component's
//! representatives.
//!
//! With representatives stacked as columns of `R`, the operator maps the span
//! to itself exactly when `H R = R A` for some small `A`. The least-squares
//! `A` is `G^{-1} C` with `G = RᵀR` and `C = RᵀHR`, and its eigenvalues equal
//! those of the symmetric `L^{-1} C L^{-T}` for `G = L Lᵀ`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rayon::prelude::*;
use serde::Serialize;

use super::{blocks, representative_set, IrrepClass, IsotypicComponent};
use crate::error::{Error, Result};
use crate::hessian_exact::{vectorize, HessianMatrix, PaddedHessian};

/// Largest relative residual accepted by [`reduced_spectrum`].
pub const EQUIVARIANCE_TOL: f64 = 1e-6;

/// Relative pivot below which a Gram matrix counts as singular.
const GRAM_PIVOT_TOL: f64 = 1e-10;

/// Restriction of an operator to a spanning set.
#[derive(Debug, Clone, PartialEq)]
pub struct Projection {
    /// Row `i` holds the coefficients of `op * rep_i` in the representatives.
    pub coefficients: DMatrix<f64>,
    /// `max_i |op rep_i - Σ_j A_ij rep_j| / |op rep_i|`.
    pub residual: f64,
    /// Ascending.
    pub eigenvalues: Vec<f64>,
}

/// Projects `op` onto the span of `reps`; `label` names the set in errors.
pub fn project_operator(op: &DMatrix<f64>, reps: &[DVector<f64>], label: &str) -> Result<Projection> {
    let n = op.nrows();
    if reps.is_empty() || reps.iter().any(|r| r.len() != n) || op.ncols() != n {
        return Err(Error::ShapeMismatch(format!("representatives for {label} do not match a {n}x{n} operator")));
    }
    let r = DMatrix::from_columns(reps);
    let hr = op * &r;
    let g = r.transpose() * &r;
    let mut c = r.transpose() * &hr;
    c = (&c + c.transpose()) * 0.5;

    let chol = g.clone().cholesky().ok_or_else(|| Error::RankDeficientRepresentatives(label.into()))?;
    let l = chol.l();
    let scale = g.diagonal().amax().sqrt();
    if l.diagonal().iter().any(|&x| x < GRAM_PIVOT_TOL * scale) {
        return Err(Error::RankDeficientRepresentatives(label.into()));
    }

    // G A = C with A = G^{-1} C; coefficients M = Aᵀ = C G^{-1}.
    let a = chol.solve(&c);
    let fitted = &r * &a;
    let mut residual: f64 = 0.0;
    for i in 0..reps.len() {
        let target = hr.column(i);
        let miss = (target - fitted.column(i)).norm();
        let size = target.norm();
        let rel = if size > 0.0 { miss / size } else { miss };
        residual = residual.max(rel);
    }

    let l_inv = l.clone().try_inverse().ok_or_else(|| Error::RankDeficientRepresentatives(label.into()))?;
    let mut sym = &l_inv * &c * l_inv.transpose();
    sym = (&sym + sym.transpose()) * 0.5;
    let mut eigenvalues: Vec<f64> = SymmetricEigen::new(sym).eigenvalues.iter().copied().collect();
    eigenvalues.sort_by(f64::total_cmp);

    Ok(Projection { coefficients: a.transpose(), residual, eigenvalues })
}

/// An isotypic component after reduction.
#[derive(Debug, Clone, PartialEq)]
pub struct ReducedBlock {
    pub irrep: IrrepClass,
    pub multiplicity: usize,
    /// `multiplicity x multiplicity`; row `i` expresses `H rep_i` in the representatives.
    pub matrix: DMatrix<f64>,
    pub residual: f64,
    /// Ascending; each occurs `irrep.degree()` times in the full spectrum.
    pub eigenvalues: Vec<f64>,
}

fn check_square(h: &HessianMatrix, k: usize) -> Result<()> {
    if h.k() != k || h.d() != k {
        return Err(Error::ShapeMismatch(format!(
            "expected a {k}x{k} student Hessian, got k = {}, d = {}",
            h.k(),
            h.d()
        )));
    }
    Ok(())
}

/// Reduces `h` on one component. Does not judge the residual.
pub fn reduced_block(h: &HessianMatrix, comp: &IsotypicComponent) -> Result<ReducedBlock> {
    let reps: Vec<DVector<f64>> = comp.representatives.iter().map(vectorize).collect();
    let proj = project_operator(h.dense(), &reps, &comp.irrep.label())?;
    Ok(ReducedBlock {
        irrep: comp.irrep,
        multiplicity: comp.multiplicity,
        matrix: proj.coefficients,
        residual: proj.residual,
        eigenvalues: proj.eigenvalues,
    })
}

/// Every component of the `(p, q)` decomposition, in table order.
pub fn reduced_blocks(h: &HessianMatrix, p: usize, q: usize) -> Result<Vec<ReducedBlock>> {
    let k = p + q;
    check_square(h, k)?;
    let comps = representative_set(k, p, q)?;
    comps.par_iter().map(|c| reduced_block(h, c)).collect()
}

/// One eigenvalue with its multiplicity in the full spectrum.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectralLine {
    pub eigenvalue: f64,
    pub multiplicity: usize,
    pub component: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectrumWithMultiplicity {
    /// Ascending by eigenvalue.
    pub entries: Vec<SpectralLine>,
    pub max_residual: f64,
}

impl SpectrumWithMultiplicity {
    fn from_lines(mut entries: Vec<SpectralLine>, max_residual: f64) -> Self {
        entries.sort_by(|a, b| a.eigenvalue.total_cmp(&b.eigenvalue).then_with(|| a.component.cmp(&b.component)));
        Self { entries, max_residual }
    }

    pub fn total_multiplicity(&self) -> usize {
        self.entries.iter().map(|e| e.multiplicity).sum()
    }

    /// Every eigenvalue repeated by multiplicity, ascending.
    pub fn expanded(&self) -> Vec<f64> {
        self.entries.iter().flat_map(|e| std::iter::repeat_n(e.eigenvalue, e.multiplicity)).collect()
    }

    pub fn min_eigenvalue(&self) -> Option<f64> {
        self.entries.first().map(|e| e.eigenvalue)
    }

    pub fn max_eigenvalue(&self) -> Option<f64> {
        self.entries.last().map(|e| e.eigenvalue)
    }

    /// Lines of one component, ascending.
    pub fn component(&self, label: &str) -> Vec<&SpectralLine> {
        self.entries.iter().filter(|e| e.component == label).collect()
    }
}

fn lines_from_blocks(blocks: &[ReducedBlock], copies: usize, prefix: &str) -> Vec<SpectralLine> {
    blocks
        .iter()
        .flat_map(|b| {
            let mult = b.irrep.degree() * copies;
            let component = format!("{prefix}{}", b.irrep.label());
            b.eigenvalues.iter().map(move |&eigenvalue| SpectralLine { eigenvalue, multiplicity: mult, component: component.clone() })
        })
        .collect()
}

fn check_residuals(blocks: &[ReducedBlock]) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for b in blocks {
        if !(b.residual <= EQUIVARIANCE_TOL) {
            return Err(Error::EquivarianceViolation { component: b.irrep.label(), residual: b.residual });
        }
        worst = worst.max(b.residual);
    }
    Ok(worst)
}

/// Full spectrum of a `k x k` student Hessian with `k = p + q`, assembled from
/// reduced blocks. Fails with `EquivarianceViolation` if any residual exceeds
/// [`EQUIVARIANCE_TOL`].
pub fn reduced_spectrum(h: &HessianMatrix, p: usize, q: usize) -> Result<SpectrumWithMultiplicity> {
    let blocks = reduced_blocks(h, p, q)?;
    let worst = check_residuals(&blocks)?;
    Ok(SpectrumWithMultiplicity::from_lines(lines_from_blocks(&blocks, 1, ""), worst))
}

/// Vector representatives of the `S_p x S_q` components of `R^k`.
fn vector_components(p: usize, q: usize) -> Vec<(IrrepClass, Vec<DVector<f64>>)> {
    let k = p + q;
    let indicator = |lo: usize, hi: usize| DVector::from_fn(k, |i, _| if (lo..hi).contains(&i) { 1.0 } else { 0.0 });
    let difference = |at: usize| DVector::from_fn(k, |i, _| if i == at { 1.0 } else if i == at + 1 { -1.0 } else { 0.0 });
    let mut out = Vec::new();
    let mut trivial = vec![indicator(0, p)];
    if q >= 1 {
        trivial.push(indicator(p, k));
    }
    out.push((IrrepClass::Trivial, trivial));
    out.push((IrrepClass::Standard(p), vec![difference(0)]));
    if q >= 2 {
        out.push((IrrepClass::Standard(q), vec![difference(p)]));
    }
    out
}

/// As [`reduced_spectrum`] for a zero-padded student. Padding lines are
/// labelled `pad:<irrep>` and carry the number of padding coordinates in
/// their multiplicity.
pub fn reduced_spectrum_padded(ph: &PaddedHessian, p: usize, q: usize) -> Result<SpectrumWithMultiplicity> {
    let blocks = reduced_blocks(&ph.base, p, q)?;
    let mut worst = check_residuals(&blocks)?;
    let mut lines = lines_from_blocks(&blocks, 1, "");
    for (irrep, reps) in vector_components(p, q) {
        let proj = project_operator(&ph.extra, &reps, &format!("pad:{}", irrep.label()))?;
        if !(proj.residual <= EQUIVARIANCE_TOL) {
            return Err(Error::EquivarianceViolation { component: format!("pad:{}", irrep.label()), residual: proj.residual });
        }
        worst = worst.max(proj.residual);
        let mult = irrep.degree() * ph.copies;
        lines.extend(proj.eigenvalues.into_iter().map(|eigenvalue| SpectralLine {
            eigenvalue,
            multiplicity: mult,
            component: format!("pad:{}", irrep.label()),
        }));
    }
    Ok(SpectrumWithMultiplicity::from_lines(lines, worst))
}

/// Eigenvalues on the first block's exterior-square and `(p-2, 2)`
/// components, read off a single entry of `H` applied to each representative.
/// Valid only when `h` is equivariant; no residual is checked.
pub fn direct_xy_eigenvalues(h: &HessianMatrix, p: usize, q: usize) -> Result<(f64, f64)> {
    let k = p + q;
    check_square(h, k)?;
    super::isotypic_decomposition(k, p, q)?;
    let probe = |block: DMatrix<f64>, name: &str| -> Result<f64> {
        let mut rep = DMatrix::zeros(k, k);
        rep.view_mut((0, 0), (p, p)).copy_from(&block);
        let denom = rep[(0, 1)];
        if denom == 0.0 {
            return Err(Error::ZeroProbeEntry(name.into()));
        }
        Ok(h.apply(&rep)[(0, 1)] / denom)
    };
    Ok((probe(blocks::exterior_square(p), "exterior square")?, probe(blocks::partition_two(p), "partition (m-2,2)")?))
}
