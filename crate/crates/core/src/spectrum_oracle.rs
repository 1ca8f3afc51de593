//! Brute-force spectra and the tools for reading them: clustering by gaps,
//! multiset comparison, histograms, and seeded perturbation trials.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::hessian_exact::{assemble_hessian, HessianMatrix};
use crate::loss_geometry::{NeuronMatrix, TargetMatrix};

pub const SYMMETRY_TOL: f64 = 1e-10;
pub const DEFAULT_TOL_ABS: f64 = 1e-9;
pub const DEFAULT_TOL_REL: f64 = 1e-7;
/// Perturbed spectra spread by `O(sigma)`, so trials cluster coarsely.
pub const PERTURBATION_TOL_ABS: f64 = 1e-4;

/// Ascending eigenvalues of a symmetric matrix.
pub fn symmetric_eigenvalues(m: &DMatrix<f64>) -> Result<Vec<f64>> {
    if !m.is_square() {
        return Err(Error::ShapeMismatch(format!("{}x{} is not square", m.nrows(), m.ncols())));
    }
    let asym = (m - m.transpose()).amax();
    if asym > SYMMETRY_TOL {
        return Err(Error::NotSymmetric(asym));
    }
    let mut e: Vec<f64> = SymmetricEigen::new(m.clone()).eigenvalues.iter().copied().collect();
    e.sort_by(f64::total_cmp);
    Ok(e)
}

/// All `kd` eigenvalues of `h`, ascending.
pub fn full_spectrum(h: &HessianMatrix) -> Result<Vec<f64>> {
    symmetric_eigenvalues(h.dense())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Cluster {
    pub center: f64,
    pub count: usize,
    /// Largest minus smallest member.
    pub spread: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClusteredSpectrum {
    /// Sorted by center.
    pub clusters: Vec<Cluster>,
}

impl ClusteredSpectrum {
    pub fn len(&self) -> usize {
        self.clusters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.clusters.is_empty()
    }

    pub fn total_count(&self) -> usize {
        self.clusters.iter().map(|c| c.count).sum()
    }

    pub fn centers(&self) -> Vec<f64> {
        self.clusters.iter().map(|c| c.center).collect()
    }

    pub fn counts(&self) -> Vec<usize> {
        self.clusters.iter().map(|c| c.count).collect()
    }
}

/// Single-linkage clustering of sorted `eigs`: neighbours join when their gap
/// is at most `tol_abs + tol_rel * max(1, |value|)`.
pub fn cluster_eigenvalues(eigs: &[f64], tol_abs: f64, tol_rel: f64) -> ClusteredSpectrum {
    let mut clusters = Vec::new();
    let mut start = 0;
    for i in 1..=eigs.len() {
        let split = i == eigs.len() || {
            let v = eigs[i];
            eigs[i] - eigs[i - 1] > tol_abs + tol_rel * v.abs().max(1.0)
        };
        if split && i > start {
            let members = &eigs[start..i];
            let center = members.iter().sum::<f64>() / members.len() as f64;
            clusters.push(Cluster { center, count: members.len(), spread: members[members.len() - 1] - members[0] });
            start = i;
        }
    }
    ClusteredSpectrum { clusters }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpectrumComparison {
    pub pass: bool,
    pub max_deviation: f64,
    /// Position in sorted order of the largest deviation.
    pub worst_index: usize,
}

/// Sorts both multisets and compares them position by position.
pub fn compare_spectra(a: &[f64], b: &[f64], tol: f64) -> Result<SpectrumComparison> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch(a.len(), b.len()));
    }
    let sorted = |x: &[f64]| {
        let mut v = x.to_vec();
        v.sort_by(f64::total_cmp);
        v
    };
    let (a, b) = (sorted(a), sorted(b));
    let (mut max_deviation, mut worst_index) = (0.0, 0);
    for (i, (x, y)) in a.iter().zip(&b).enumerate() {
        let d = (x - y).abs();
        if d > max_deviation {
            max_deviation = d;
            worst_index = i;
        }
    }
    Ok(SpectrumComparison { pass: max_deviation <= tol, max_deviation, worst_index })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DensityHistogram {
    pub bin_edges: Vec<f64>,
    pub counts: Vec<usize>,
    /// Number of input values, including those outside the range.
    pub total: usize,
}

impl DensityHistogram {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("bin_lo,bin_hi,count,fraction\n");
        for (i, c) in self.counts.iter().enumerate() {
            let frac = if self.total == 0 { 0.0 } else { *c as f64 / self.total as f64 };
            out.push_str(&format!("{:.16e},{:.16e},{c},{frac:.16e}\n", self.bin_edges[i], self.bin_edges[i + 1]));
        }
        out
    }
}

/// Equal-width histogram on `[lo, hi]`; the last bin is closed on the right.
pub fn density_histogram(eigs: &[f64], bin_count: usize, range: (f64, f64)) -> Result<DensityHistogram> {
    let (lo, hi) = range;
    if bin_count == 0 || !(hi > lo) {
        return Err(Error::EmptyRange);
    }
    let width = (hi - lo) / bin_count as f64;
    let bin_edges = (0..=bin_count).map(|i| if i == bin_count { hi } else { lo + i as f64 * width }).collect();
    let mut counts = vec![0; bin_count];
    for &e in eigs {
        if (lo..=hi).contains(&e) {
            let b = (((e - lo) / width) as usize).min(bin_count - 1);
            counts[b] += 1;
        }
    }
    Ok(DensityHistogram { bin_edges, counts, total: eigs.len() })
}

/// Number of values within `radius` of any of `centers`.
pub fn count_near(eigs: &[f64], centers: &[f64], radius: f64) -> usize {
    eigs.iter().filter(|e| centers.iter().any(|c| (*e - c).abs() <= radius)).count()
}

/// `w` with every entry shifted by independent `N(0, sigma^2)` noise. Trial
/// `t` reads its own ChaCha stream, so results do not depend on scheduling.
pub fn perturbed_student(w: &NeuronMatrix, sigma: f64, seed: u64, trial: u64) -> Result<NeuronMatrix> {
    if !(sigma >= 0.0) {
        return Err(Error::DomainError(format!("sigma must be nonnegative, got {sigma}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    let mut m = w.matrix().clone();
    // Row-major draw order fixes which draw lands on which entry.
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            let z: f64 = rng.sample(StandardNormal);
            m[(i, j)] += sigma * z;
        }
    }
    NeuronMatrix::new(m)
}

/// Clustered Hessian spectra at `trials` independent perturbations of `w`.
/// A failing trial (for example parallel rows at huge `sigma`) yields its
/// error in place.
pub fn perturbation_experiment(
    w: &NeuronMatrix,
    v: &TargetMatrix,
    sigma: f64,
    seed: u64,
    trials: usize,
) -> Result<Vec<Result<ClusteredSpectrum>>> {
    if !(sigma >= 0.0) {
        return Err(Error::DomainError(format!("sigma must be nonnegative, got {sigma}")));
    }
    Ok((0..trials as u64)
        .into_par_iter()
        .map(|t| {
            let wp = perturbed_student(w, sigma, seed, t)?;
            let h = assemble_hessian(&wp, v)?;
            let eigs = symmetric_eigenvalues(h.dense())?;
            Ok(cluster_eigenvalues(&eigs, PERTURBATION_TOL_ABS, 0.0))
        })
        .collect())
}
