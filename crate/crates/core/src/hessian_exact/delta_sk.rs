//! Hessian entries at a point whose diagonal entries all equal `R` and whose
//! off-diagonal entries all equal `S` (isotropy `ΔS_k`, with `d = k`).
//!
//! Such a point is described by three angles and one norm:
//! `theta` between two neurons, `alpha` between a neuron and a foreign
//! teacher row, `beta` between a neuron and its own teacher row, and the
//! common neuron norm `tau`. The Hessian then has only nine distinct entries.

use std::f64::consts::PI;

use nalgebra::DMatrix;

use super::HessianMatrix;
use crate::critical_families::FixedPointCoords;
use crate::error::{Error, Result};
use crate::loss_geometry::NeuronMatrix;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeltaSkAngles {
    pub theta: f64,
    pub alpha: f64,
    pub beta: f64,
    pub tau: f64,
}

impl DeltaSkAngles {
    /// Angles of the `k x k` matrix with diagonal `r` and off-diagonal `s`.
    pub fn from_pattern(r: f64, s: f64, k: usize) -> Result<Self> {
        let kf = k as f64;
        let tau = (r * r + (kf - 1.0) * s * s).sqrt();
        if tau == 0.0 {
            return Err(Error::ZeroVector);
        }
        let cos_theta = (2.0 * r * s + (kf - 2.0) * s * s) / (tau * tau);
        Ok(Self {
            theta: cos_theta.clamp(-1.0, 1.0).acos(),
            alpha: (s / tau).clamp(-1.0, 1.0).acos(),
            beta: (r / tau).clamp(-1.0, 1.0).acos(),
            tau,
        })
    }

    pub fn from_matrix(w: &NeuronMatrix, tol: f64) -> Result<Self> {
        match FixedPointCoords::unembed_delta_sk(w.matrix(), tol)? {
            FixedPointCoords::DeltaSk { r, s } => Self::from_pattern(r, s, w.k()),
            FixedPointCoords::DeltaSkm1(_) => unreachable!("unembed_delta_sk returns the two-parameter form"),
        }
    }
}

/// The nine distinct Hessian entries at a `ΔS_k` point. `p != q` throughout;
/// `i, j` index input coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeltaSkEntries {
    pub k: usize,
    /// `H^{pp}_{pp}`
    pub pp_pp: f64,
    /// `H^{pp}_{ii}`, `i != p`
    pub pp_ii: f64,
    /// `H^{pp}_{ij}`, exactly one of `i, j` equal to `p`
    pub pp_ip: f64,
    /// `H^{pp}_{ij}`, `i != j`, neither equal to `p`
    pub pp_ij: f64,
    /// `H^{pq}_{ii}`, `i` in `{p, q}`
    pub pq_ii_in: f64,
    /// `H^{pq}_{ii}`, `i` outside `{p, q}`
    pub pq_ii_out: f64,
    /// `H^{pq}_{ij}`, `{i, j} = {p, q}`
    pub pq_ij_both: f64,
    /// `H^{pq}_{ij}`, `i != j`, exactly one in `{p, q}`
    pub pq_ij_one: f64,
    /// `H^{pq}_{ij}`, `i != j`, neither in `{p, q}`
    pub pq_ij_none: f64,
}

pub fn entries_delta_sk(theta: f64, alpha: f64, beta: f64, tau: f64, k: usize) -> Result<DeltaSkEntries> {
    if k < 4 {
        return Err(Error::DomainError(format!("k = {k} < 4")));
    }
    if tau <= 0.0 {
        return Err(Error::DomainError("non-positive norm".into()));
    }
    let (st, ct) = theta.sin_cos();
    let (sa, ca) = alpha.sin_cos();
    let (sb, cb) = beta.sin_cos();
    if st.abs() < 1e-300 || sa.abs() < 1e-300 {
        return Err(Error::DomainError("sin(theta) or sin(alpha) vanishes".into()));
    }
    let kf = k as f64;
    let cot = ca / sa;
    let pi2 = 2.0 * PI;

    let pp_pp = 0.5 + (kf - 1.0) * sb * sb / pi2 * (st - sa / tau) - sb.powi(3) / (PI * tau)
        + (kf - 1.0) / pi2 * ((ca - ct * cb).powi(2) / st - cot * ca * cb * cb / tau);

    let pp_ii = 0.5
        + (kf - 2.0) * sa * sa / pi2 * (st - sa / tau)
        + sa * sa / PI * (st / 2.0 - sa / tau)
        + (kf - 2.0) / pi2 * (ca * ca * (1.0 - ct).powi(2) / st - cot * ca.powi(3) / tau)
        + (cb - ct * ca).powi(2) / (pi2 * st)
        - sb / (pi2 * tau) * (sa * sa + cb * cb / (kf - 1.0));

    let pp_ip = -(kf - 1.0) * ca * cb / pi2 * (st - sa / tau)
        + (kf - 2.0) * ca / pi2 * ((ca - ct * (ca + cb) + ct * ct * cb) / st)
        - (kf - 2.0) / (pi2 * tau) * sa * ca * cb * cot * cot
        + sa * ca * cb / (pi2 * tau)
        + (ca * cb - ct * (ca * ca + cb * cb) + ct * ct * ca * cb) / (pi2 * st)
        + ca * sb * cb / (PI * tau);

    let pp_ij = -(kf - 1.0) * ca * ca / pi2 * (st - sa / tau)
        + (kf - 3.0) * ca * ca / pi2 * ((1.0 - ct).powi(2) / st - sa * cot * cot / tau)
        + ca / PI * ((cb - ct * (cb + ca) + ct * ct * ca) / st + sa * ca / tau)
        + sb / (pi2 * tau) * (ca * ca - cb * cb / (kf - 1.0));

    let base = (PI - theta) / pi2;
    Ok(DeltaSkEntries {
        k,
        pp_pp,
        pp_ii,
        pp_ip,
        pp_ij,
        pq_ii_in: base + (2.0 * ca * cb - ct * (ca * ca + cb * cb)) / (pi2 * st),
        pq_ii_out: base + ca * ca * (1.0 - ct) / (PI * st),
        pq_ij_both: (ca * ca + cb * cb - 2.0 * ct * ca * cb) / (pi2 * st),
        pq_ij_one: ca * (ca + cb) * (1.0 - ct) / (pi2 * st),
        pq_ij_none: ca * ca * (1.0 - ct) / (PI * st),
    })
}

impl DeltaSkEntries {
    pub fn from_angles(angles: &DeltaSkAngles, k: usize) -> Result<Self> {
        entries_delta_sk(angles.theta, angles.alpha, angles.beta, angles.tau, k)
    }

    /// `H^{pq}_{ij}`.
    pub fn entry(&self, p: usize, q: usize, i: usize, j: usize) -> f64 {
        if p == q {
            match (i == j, i == p, j == p) {
                (true, true, _) => self.pp_pp,
                (true, false, _) => self.pp_ii,
                (false, true, _) | (false, _, true) => self.pp_ip,
                (false, false, false) => self.pp_ij,
            }
        } else {
            let inside = |x: usize| x == p || x == q;
            match (i == j, inside(i) as u8 + inside(j) as u8) {
                (true, 2) => self.pq_ii_in,
                (true, _) => self.pq_ii_out,
                (false, 2) => self.pq_ij_both,
                (false, 1) => self.pq_ij_one,
                (false, _) => self.pq_ij_none,
            }
        }
    }

    /// The full `k^2 x k^2` Hessian.
    pub fn materialize(&self) -> HessianMatrix {
        let k = self.k;
        let data = DMatrix::from_fn(k * k, k * k, |a, b| self.entry(a / k, b / k, a % k, b % k));
        HessianMatrix::from_dense(k, k, data).expect("square by construction")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hessian_exact::assemble_hessian;
    use crate::loss_geometry::TargetMatrix;

    #[test]
    fn teacher_angles_give_the_global_minimum_blocks() {
        let k = 6;
        let e = entries_delta_sk(PI / 2.0, PI / 2.0, 0.0, 1.0, k).unwrap();
        assert!((e.pp_pp - 0.5).abs() < 1e-15);
        assert!((e.pp_ii - 0.5).abs() < 1e-15);
        assert!(e.pp_ip.abs() < 1e-15);
        assert!(e.pp_ij.abs() < 1e-15);
        assert!((e.pq_ii_in - 0.25).abs() < 1e-15);
        assert!((e.pq_ii_out - 0.25).abs() < 1e-15);
        assert!((e.pq_ij_both - 1.0 / (2.0 * PI)).abs() < 1e-15);
        assert!(e.pq_ij_one.abs() < 1e-15);
        assert!(e.pq_ij_none.abs() < 1e-15);
    }

    #[test]
    fn generic_pattern_matches_assembly() {
        // The formulas hold at any ΔS_k point, critical or not.
        for &(r, s, k) in &[(0.8, 0.15, 5usize), (-0.7, 0.3, 7), (1.2, -0.05, 9)] {
            let w = FixedPointCoords::DeltaSk { r, s }.embed(k).unwrap();
            let h = assemble_hessian(&w, &TargetMatrix::matching(&w)).unwrap();
            let ang = DeltaSkAngles::from_pattern(r, s, k).unwrap();
            let table = DeltaSkEntries::from_angles(&ang, k).unwrap().materialize();
            let dev = (h.dense() - table.dense()).amax();
            assert!(dev < 1e-12, "r={r} s={s} k={k}: {dev:e}");
        }
    }

    #[test]
    fn degenerate_angles_are_rejected() {
        assert!(entries_delta_sk(0.0, 1.0, 0.5, 1.0, 6).is_err());
        assert!(entries_delta_sk(1.0, 0.0, 0.5, 1.0, 6).is_err());
        assert!(entries_delta_sk(1.0, 1.0, 0.5, 1.0, 3).is_err());
    }
}
