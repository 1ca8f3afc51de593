//! Hessian entries at a point with isotropy `Δ(S_{k-1} x S_1)`, `d = k`.
//!
//! The last neuron (index `k - 1`, called the distinguished index below) is
//! singled out. The point has five free coordinates and the Hessian is
//! described by seven angles and two norms; its entries fall into 26 cases,
//! named after the off-diagonal (`Off*`) and diagonal (`Diag*`) case tables.
//! In the predicates `r` is the non-distinguished index among `p, q`, and
//! `last` is the distinguished index.

use std::f64::consts::PI;

use nalgebra::DMatrix;

use super::HessianMatrix;
use crate::critical_families::FixedPointCoords;
use crate::error::{Error, Result};
use crate::loss_geometry::NeuronMatrix;

/// Angles and norms of a `Δ(S_{k-1} x S_1)` point. With `i != j` ranging
/// over ordinary neurons and `last` the distinguished one:
///
/// * `theta`: angle between two ordinary neurons
/// * `lambda`: angle between an ordinary neuron and the distinguished one
/// * `a_ii`, `a_ij`, `a_ik`: angles of ordinary neuron `i` with teacher rows `i`, `j`, `last`
/// * `a_kk`, `a_kj`: angles of the distinguished neuron with teacher rows `last`, `j`
/// * `tau`, `tau_k`: ordinary and distinguished neuron norms
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SevenAngles {
    pub theta: f64,
    pub lambda: f64,
    pub a_ii: f64,
    pub a_ij: f64,
    pub a_ik: f64,
    pub a_kk: f64,
    pub a_kj: f64,
    pub tau: f64,
    pub tau_k: f64,
}

fn acos(x: f64) -> f64 {
    x.clamp(-1.0, 1.0).acos()
}

impl SevenAngles {
    /// Angles of the embedded point with coordinates
    /// `[diag, offdiag, last-row, last-column, last-diag]`.
    pub fn from_coords(xi: [f64; 5], k: usize) -> Result<Self> {
        let [rho, eps, eta, zeta, nu] = xi;
        let kf = k as f64;
        let tau = (rho * rho + (kf - 2.0) * eps * eps + zeta * zeta).sqrt();
        let tau_k = ((kf - 1.0) * eta * eta + nu * nu).sqrt();
        if tau == 0.0 || tau_k == 0.0 {
            return Err(Error::ZeroVector);
        }
        let cos_theta = (2.0 * rho * eps + (kf - 3.0) * eps * eps + zeta * zeta) / (tau * tau);
        let cos_lambda = (rho * eta + (kf - 2.0) * eps * eta + zeta * nu) / (tau * tau_k);
        Ok(Self {
            theta: acos(cos_theta),
            lambda: acos(cos_lambda),
            a_ii: acos(rho / tau),
            a_ij: acos(eps / tau),
            a_ik: acos(zeta / tau),
            a_kk: acos(nu / tau_k),
            a_kj: acos(eta / tau_k),
            tau,
            tau_k,
        })
    }

    pub fn from_matrix(w: &NeuronMatrix, tol: f64) -> Result<Self> {
        match FixedPointCoords::unembed_delta_skm1(w.matrix(), tol)? {
            FixedPointCoords::DeltaSkm1(xi) => Self::from_coords(xi, w.k()),
            FixedPointCoords::DeltaSk { .. } => unreachable!("unembed_delta_skm1 returns five coordinates"),
        }
    }
}

/// Entry case label. The table a case belongs to is in the name.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EntryCase {
    /// `p, q` ordinary, `i = j` ordinary outside `{p, q}`.
    OffAa,
    /// `p, q` ordinary, `i = j` in `{p, q}`.
    OffAb,
    /// `p, q` ordinary, `i = j = last`.
    OffAc,
    /// `{p, q} = {r, last}`, `i = j = r`.
    OffBa,
    /// `{p, q} = {r, last}`, `i = j` ordinary, `i != r`.
    OffBb,
    /// `{p, q} = {r, last}`, `i = j = last`.
    OffBc,
    /// `p, q` ordinary, `i != j`, both ordinary outside `{p, q}`.
    OffCa,
    /// `p, q` ordinary, `i != j` ordinary, exactly one in `{p, q}`.
    OffCb,
    /// `p, q` ordinary, `{i, j} = {p, q}`.
    OffCc,
    /// `p, q` ordinary, one of `i, j` is last, the other in `{p, q}`.
    OffCd,
    /// `p, q` ordinary, one of `i, j` is last, the other outside `{p, q}`.
    OffCe,
    /// `{p, q} = {r, last}`, `i != j` ordinary, neither equal to `r`.
    OffDa,
    /// `{p, q} = {r, last}`, `i != j` ordinary, one equal to `r`.
    OffDb,
    /// `{p, q} = {r, last}`, `{i, j} = {r, last}`.
    OffDc,
    /// `{p, q} = {r, last}`, one of `i, j` is last, the other ordinary and not `r`.
    OffDd,
    /// `p` ordinary, `i = j` ordinary, `i != p`.
    DiagAa,
    /// `p` ordinary, `i = j = p`.
    DiagAb,
    /// `p` ordinary, `i = j = last`.
    DiagAc,
    /// `p = last`, `i = j` ordinary.
    DiagAd,
    /// `p = i = j = last`.
    DiagAe,
    /// `p` ordinary, `i != j` both ordinary and not `p`.
    DiagBa,
    /// `p` ordinary, `i != j` ordinary, one equal to `p`.
    DiagBb,
    /// `p` ordinary, one of `i, j` is last, the other ordinary and not `p`.
    DiagBc,
    /// `p` ordinary, `{i, j} = {p, last}`.
    DiagBd,
    /// `p = last`, `i != j` both ordinary.
    DiagBe,
    /// `p = last`, one of `i, j` is last.
    DiagBf,
}

impl EntryCase {
    pub const ALL: [EntryCase; 26] = [
        EntryCase::OffAa,
        EntryCase::OffAb,
        EntryCase::OffAc,
        EntryCase::OffBa,
        EntryCase::OffBb,
        EntryCase::OffBc,
        EntryCase::OffCa,
        EntryCase::OffCb,
        EntryCase::OffCc,
        EntryCase::OffCd,
        EntryCase::OffCe,
        EntryCase::OffDa,
        EntryCase::OffDb,
        EntryCase::OffDc,
        EntryCase::OffDd,
        EntryCase::DiagAa,
        EntryCase::DiagAb,
        EntryCase::DiagAc,
        EntryCase::DiagAd,
        EntryCase::DiagAe,
        EntryCase::DiagBa,
        EntryCase::DiagBb,
        EntryCase::DiagBc,
        EntryCase::DiagBd,
        EntryCase::DiagBe,
        EntryCase::DiagBf,
    ];

    /// Dotted label such as `off.A.a` or `diag.B.f`.
    pub fn label(self) -> String {
        let name = format!("{self:?}");
        let (table, rest) = name.split_at(if name.starts_with("Off") { 3 } else { 4 });
        let (group, sub) = rest.split_at(1);
        format!("{}.{group}.{sub}", table.to_lowercase())
    }

    /// Which case the entry `H^{pq}_{ij}` falls in, for a `k x k` problem.
    pub fn classify(k: usize, p: usize, q: usize, i: usize, j: usize) -> Self {
        use EntryCase::*;
        let last = k - 1;
        if p == q {
            if i == j {
                return match (p == last, i == last, i == p) {
                    (false, false, false) => DiagAa,
                    (false, false, true) => DiagAb,
                    (false, true, _) => DiagAc,
                    (true, false, _) => DiagAd,
                    (true, true, _) => DiagAe,
                };
            }
            let hits_last = i == last || j == last;
            let hits_p = i == p || j == p;
            return match (p == last, hits_last, hits_p) {
                (false, false, false) => DiagBa,
                (false, false, true) => DiagBb,
                (false, true, false) => DiagBc,
                (false, true, true) => DiagBd,
                (true, false, _) => DiagBe,
                (true, true, _) => DiagBf,
            };
        }
        let inside = |x: usize| x == p || x == q;
        if p != last && q != last {
            if i == j {
                return if i == last {
                    OffAc
                } else if inside(i) {
                    OffAb
                } else {
                    OffAa
                };
            }
            let hits_last = i == last || j == last;
            let n_in = inside(i) as u8 + inside(j) as u8;
            return match (hits_last, n_in) {
                (false, 0) => OffCa,
                (false, 1) => OffCb,
                (false, _) => OffCc,
                (true, 0) => OffCe,
                (true, _) => OffCd,
            };
        }
        let r = if p == last { q } else { p };
        if i == j {
            return if i == last {
                OffBc
            } else if i == r {
                OffBa
            } else {
                OffBb
            };
        }
        let hits_last = i == last || j == last;
        let hits_r = i == r || j == r;
        match (hits_last, hits_r) {
            (false, false) => OffDa,
            (false, true) => OffDb,
            (true, true) => OffDc,
            (true, false) => OffDd,
        }
    }
}

/// Trigonometric shorthand shared by the case formulas.
#[derive(Debug, Clone, Copy)]
struct Trig {
    k: f64,
    theta: f64,
    lambda: f64,
    st: f64,
    ct: f64,
    sl: f64,
    cl: f64,
    t: f64,
    tk: f64,
    cii: f64,
    cij: f64,
    cik: f64,
    ckk: f64,
    ckj: f64,
    sii: f64,
    sij: f64,
    sik: f64,
    skk: f64,
    skj: f64,
    ctij: f64,
    ctik: f64,
    ctkj: f64,
}

impl Trig {
    fn new(a: &SevenAngles, k: usize) -> Self {
        let (sij, cij) = a.a_ij.sin_cos();
        let (sik, cik) = a.a_ik.sin_cos();
        let (skj, ckj) = a.a_kj.sin_cos();
        Self {
            k: k as f64,
            theta: a.theta,
            lambda: a.lambda,
            st: a.theta.sin(),
            ct: a.theta.cos(),
            sl: a.lambda.sin(),
            cl: a.lambda.cos(),
            t: a.tau,
            tk: a.tau_k,
            cii: a.a_ii.cos(),
            cij,
            cik,
            ckk: a.a_kk.cos(),
            ckj,
            sii: a.a_ii.sin(),
            sij,
            sik,
            skk: a.a_kk.sin(),
            skj,
            ctij: cij / sij,
            ctik: cik / sik,
            ctkj: ckj / skj,
        }
    }

    /// `K^{pp} A^p` for ordinary `p` is `cii^2 * x / denom`; the ratio is taken
    /// as zero when the denominator vanishes, which only happens when the
    /// neuron is parallel to its own teacher row (and the prefactor `sii` is 0).
    fn own_ratio(&self, x: f64) -> f64 {
        let denom = (self.k - 2.0) * self.cij * self.cij + self.cik * self.cik;
        if denom.abs() < 1e-300 {
            0.0
        } else {
            self.cii * self.cii * x / denom
        }
    }
}

const PI2: f64 = 2.0 * PI;

fn off_a_a(g: &Trig) -> f64 {
    (PI - g.theta) / PI2 + g.cij * g.cij * (1.0 - g.ct) / (PI * g.st)
}

fn off_a_b(g: &Trig) -> f64 {
    (PI - g.theta) / PI2
        + (2.0 * g.cii * g.cij - (g.cii * g.cii + g.cij * g.cij) * g.ct) / (PI2 * g.st)
}

fn off_a_c(g: &Trig) -> f64 {
    (PI - g.theta) / PI2 + g.cik * g.cik * (1.0 - g.ct) / (PI * g.st)
}

fn off_b(g: &Trig, x: f64, y: f64) -> f64 {
    (PI - g.lambda) / PI2 + (2.0 * x * y - (x * x + y * y) * g.cl) / (PI2 * g.sl)
}

fn off_c_a(g: &Trig) -> f64 {
    g.cij * g.cij * (1.0 - g.ct) / (PI * g.st)
}

fn off_c_b(g: &Trig) -> f64 {
    (g.cij * g.cii + g.cij * g.cij) / (PI2 * g.st) * (1.0 - g.ct)
}

fn off_c_c(g: &Trig) -> f64 {
    (g.cii * g.cii + g.cij * g.cij - 2.0 * g.ct * g.cii * g.cij) / (PI2 * g.st)
}

fn off_c_d(g: &Trig) -> f64 {
    g.cik * (g.cii + g.cij) / (PI2 * g.st) * (1.0 - g.ct)
}

fn off_c_e(g: &Trig) -> f64 {
    g.cik * g.cij / (PI * g.st) * (1.0 - g.ct)
}

fn off_d_a(g: &Trig) -> f64 {
    (2.0 * g.cij * g.ckj - (g.cij * g.cij + g.ckj * g.ckj) * g.cl) / (PI2 * g.sl)
}

fn off_d_b(g: &Trig) -> f64 {
    (g.ckj * (g.cij + g.cii) - g.cl * (g.ckj * g.ckj + g.cij * g.cii)) / (PI2 * g.sl)
}

fn off_d_c(g: &Trig) -> f64 {
    (g.ckk * g.cii + g.ckj * g.cik - g.cl * (g.ckk * g.ckj + g.cik * g.cii)) / (PI2 * g.sl)
}

fn off_d_d(g: &Trig) -> f64 {
    (g.ckk * g.cij + g.cik * g.ckj - g.cl * (g.ckk * g.ckj + g.cik * g.cij)) / (PI2 * g.sl)
}

fn diag_a_a(g: &Trig) -> f64 {
    let Trig { k, st, ct, sl, cl, t, tk, cii, cij, ckj, sii, sij, sik, ctij, ctik, .. } = *g;
    0.5 + (k - 2.0) * sij * sij / PI2 * (st - sij / t)
        + (k - 3.0) / PI2 * (cij * cij * (1.0 - ct).powi(2) / st - sij * ctij * ctij * cij * cij / t)
        + (cii - ct * cij).powi(2) / (PI2 * st)
        - sij.powi(3) / (PI2 * t)
        + sij * sij * (tk * sl - sik) / (PI2 * t)
        - sik * ctik * ctik * cij * cij / (PI2 * t)
        + tk / (PI2 * t * sl) * (ckj - cl * cij).powi(2)
        - sii / (PI2 * t) * (sij * sij + g.own_ratio(cij * cij))
}

fn diag_a_b(g: &Trig) -> f64 {
    let Trig { k, st, ct, sl, cl, t, tk, cii, cij, ckj, sii, sij, sik, ctij, ctik, .. } = *g;
    0.5 + (k - 2.0) * sii * sii / PI2 * (st - sij / t)
        + (k - 2.0) / PI2 * ((cij - ct * cii).powi(2) / st - sij * cii * cii * ctij * ctij / t)
        + sii * sii / (PI2 * t) * (tk * sl - sik)
        - sii.powi(3) / (PI * t)
        + tk / (PI2 * t * sl) * (ckj - cl * cii).powi(2)
        - sik * ctik * ctik * cii * cii / (PI2 * t)
}

fn diag_a_c(g: &Trig) -> f64 {
    let Trig { k, st, ct, sl, cl, t, tk, cik, ckk, sii, sij, sik, ctij, .. } = *g;
    0.5 + (k - 2.0) * sik * sik / PI2 * (st - sij / t)
        + (k - 2.0) * cik * cik / PI2 * ((1.0 - ct).powi(2) / st - sij * ctij * ctij / t)
        + sik * sik / (PI2 * t) * (tk * sl - sii)
        - sik.powi(3) / (PI * t)
        + tk / (PI2 * t * sl) * (ckk - cl * cik).powi(2)
        - sii / (PI2 * t) * g.own_ratio(cik * cik)
}

fn diag_a_d(g: &Trig) -> f64 {
    let Trig { k, sl, cl, t, tk, cii, cij, ckk, ckj, skk, skj, ctkj, .. } = *g;
    0.5 + (k - 1.0) * skj * skj / (PI2 * tk) * (t * sl - skj)
        + (k - 2.0) / (PI2 * tk) * (t * (cij - cl * ckj).powi(2) / sl - skj * ckj * ckj * ctkj * ctkj)
        - skj.powi(3) / (PI2 * tk)
        - skk / (PI2 * tk) * (skj * skj + ckk * ckk / (k - 1.0))
        + t / (PI2 * tk * sl) * (cii - cl * ckj).powi(2)
}

fn diag_a_e(g: &Trig) -> f64 {
    let Trig { k, sl, cl, t, tk, cik, ckk, skk, skj, ctkj, .. } = *g;
    0.5 + (k - 1.0) * skk * skk / (PI2 * tk) * (t * sl - skj)
        + (k - 1.0) / (PI2 * tk) * (t * (cik - cl * ckk).powi(2) / sl - ctkj * ctkj * ckk * ckk * skj)
        - skk.powi(3) / (PI * tk)
}

fn diag_b_a(g: &Trig) -> f64 {
    let Trig { k, st, ct, sl, cl, t, tk, cii, cij, ckj, sii, sij, sik, ctij, ctik, .. } = *g;
    cij * cij * (k - 2.0) / PI2 * (sij / t - st)
        + (k - 4.0) * cij * cij / (PI2 * st) * (1.0 - ct).powi(2)
        - (k - 4.0) * sij * cij * cij * ctij * ctij / (PI2 * t)
        + sij * cij * cij / (PI * t)
        + cij / (PI * st) * (cii - ct * (cii + cij) + ct * ct * cij)
        + cij * cij / (PI2 * t) * (sik - tk * sl)
        + tk / (PI2 * t * sl) * (ckj - cl * cij).powi(2)
        - sik / (PI2 * t) * ctik * ctik * cij * cij
        + sii / (PI2 * t) * (cij * cij - g.own_ratio(cij * cij))
}

fn diag_b_b(g: &Trig) -> f64 {
    let Trig { k, st, ct, sl, cl, t, tk, cii, cij, ckj, sii, sij, sik, ctij, ctik, .. } = *g;
    (k - 2.0) * cij * cii / PI2 * (sij / t - st)
        + (k - 3.0) * cij / (PI2 * st) * (cij - ct * (cii + cij) + ct * ct * cii)
        - (k - 3.0) * sij * cij * cii * ctij * ctij / (PI2 * t)
        + (cii * cij - ct * (cii * cii + cij * cij) + ct * ct * cii * cij) / (PI2 * st)
        + sij * cij * cii / (PI2 * t)
        + cij * cii / (PI2 * t) * (sik - tk * sl)
        - sik / (PI2 * t) * cii * cij * ctik * ctik
        + tk / (PI2 * t * sl) * (ckj * ckj - cl * (ckj * (cij + cii)) + cl * cl * cii * cij)
        + sii / (PI * t) * cii * cij
}

fn diag_b_c(g: &Trig) -> f64 {
    let Trig { k, st, ct, sl, cl, t, tk, cii, cij, cik, ckk, ckj, sii, sij, sik, ctij, .. } = *g;
    (k - 2.0) * cij * cik / PI2 * (sij / t - st)
        + (k - 3.0) * cij * cik / (PI2 * st) * (1.0 - ct).powi(2)
        - (k - 3.0) * sij * cij * cik * ctij * ctij / (PI2 * t)
        + cik * (cii - ct * (cii + cij) + ct * ct * cij) / (PI2 * st)
        + sij * cij * cik / (PI2 * t)
        + cij * cik / (PI2 * t) * (sik - tk * sl)
        + tk * (ckk * ckj - cl * (ckk * cij + cik * ckj) + cl * cl * cij * cik) / (PI2 * t * sl)
        + sik * cik * cij / (PI2 * t)
        + sii / (PI2 * t) * (cij * cik - g.own_ratio(cij * cik))
}

fn diag_b_d(g: &Trig) -> f64 {
    let Trig { k, st, ct, sl, cl, t, tk, cii, cij, cik, ckk, ckj, sii, sij, sik, ctij, .. } = *g;
    (k - 2.0) * cii * cik / PI2 * (sij / t - st)
        + (k - 2.0) * cik / (PI2 * st) * (cij - ct * (cii + cij) + ct * ct * cii)
        - (k - 2.0) * sij * cii * cik * ctij * ctij / (PI2 * t)
        + cii * cik / (PI2 * t) * (sik - tk * sl)
        + tk * (ckk * ckj - cl * (cii * ckk + cik * ckj) + cl * cl * cii * cik) / (PI2 * t * sl)
        + sik * cii * cik / (PI2 * t)
        + sii * cii * cik / (PI * t)
}

fn diag_b_e(g: &Trig) -> f64 {
    let Trig { k, sl, cl, t, tk, cii, cij, ckk, ckj, skk, skj, ctkj, .. } = *g;
    (k - 1.0) * ckj * ckj / (PI2 * tk) * (skj - t * sl)
        + (k - 3.0) * t / (PI2 * tk * sl) * (cij - cl * ckj).powi(2)
        - (k - 3.0) * skj * ctkj * ctkj * ckj * ckj / (PI2 * tk)
        + skj * ckj * ckj / (PI * tk)
        + t / (PI * tk * sl) * (cii * cij - cl * ckj * (cii + cij) + cl * cl * ckj * ckj)
        + skk / (PI2 * tk) * (ckj * ckj - ckk * ckk / (k - 1.0))
}

fn diag_b_f(g: &Trig) -> f64 {
    let Trig { k, sl, cl, t, tk, cii, cij, cik, ckk, ckj, skk, skj, ctkj, .. } = *g;
    (k - 1.0) * ckk * ckj / (PI2 * tk) * (skj - t * sl)
        - (k - 2.0) * skj / (PI2 * tk) * ctkj * ctkj * ckk * ckj
        + (k - 2.0) * t * (cij * cik - cl * (ckk * cij + cik * ckj) + cl * cl * ckk * ckj) / (PI2 * tk * sl)
        + skj / (PI2 * tk) * ckk * ckj
        + skk / (PI * tk) * ckk * ckj
        + t / (PI2 * tk * sl) * (cii * cik - cl * (ckk * cii + cik * ckj) + cl * cl * ckk * ckj)
}

/// Values of all 26 entry cases at one point.
#[derive(Debug, Clone, PartialEq)]
pub struct DeltaSkm1Entries {
    pub k: usize,
    values: [f64; 26],
}

pub fn entries_delta_skm1(angles: &SevenAngles, k: usize) -> Result<DeltaSkm1Entries> {
    if k < 5 {
        return Err(Error::DomainError(format!("k = {k} < 5")));
    }
    if angles.tau <= 0.0 || angles.tau_k <= 0.0 {
        return Err(Error::DomainError("non-positive norm".into()));
    }
    let g = Trig::new(angles, k);
    for (name, s) in [("theta", g.st), ("lambda", g.sl), ("a_ij", g.sij), ("a_ik", g.sik), ("a_kj", g.skj)] {
        if s.abs() < 1e-300 {
            return Err(Error::DomainError(format!("sin({name}) vanishes")));
        }
    }
    let values = EntryCase::ALL.map(|case| {
        use EntryCase::*;
        match case {
            OffAa => off_a_a(&g),
            OffAb => off_a_b(&g),
            OffAc => off_a_c(&g),
            OffBa => off_b(&g, g.cii, g.ckj),
            OffBb => off_b(&g, g.cij, g.ckj),
            OffBc => off_b(&g, g.cik, g.ckk),
            OffCa => off_c_a(&g),
            OffCb => off_c_b(&g),
            OffCc => off_c_c(&g),
            OffCd => off_c_d(&g),
            OffCe => off_c_e(&g),
            OffDa => off_d_a(&g),
            OffDb => off_d_b(&g),
            OffDc => off_d_c(&g),
            OffDd => off_d_d(&g),
            DiagAa => diag_a_a(&g),
            DiagAb => diag_a_b(&g),
            DiagAc => diag_a_c(&g),
            DiagAd => diag_a_d(&g),
            DiagAe => diag_a_e(&g),
            DiagBa => diag_b_a(&g),
            DiagBb => diag_b_b(&g),
            DiagBc => diag_b_c(&g),
            DiagBd => diag_b_d(&g),
            DiagBe => diag_b_e(&g),
            DiagBf => diag_b_f(&g),
        }
    });
    Ok(DeltaSkm1Entries { k, values })
}

impl DeltaSkm1Entries {
    pub fn value(&self, case: EntryCase) -> f64 {
        self.values[case as usize]
    }

    /// `H^{pq}_{ij}`.
    pub fn entry(&self, p: usize, q: usize, i: usize, j: usize) -> f64 {
        self.value(EntryCase::classify(self.k, p, q, i, j))
    }

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
    use std::collections::BTreeMap;

    #[test]
    fn labels_are_dotted() {
        assert_eq!(EntryCase::OffAa.label(), "off.A.a");
        assert_eq!(EntryCase::DiagBf.label(), "diag.B.f");
        for (n, c) in EntryCase::ALL.iter().enumerate() {
            assert_eq!(*c as usize, n);
        }
    }

    #[test]
    fn every_case_occurs() {
        let k = 7;
        let mut seen = BTreeMap::new();
        for p in 0..k {
            for q in 0..k {
                for i in 0..k {
                    for j in 0..k {
                        *seen.entry(EntryCase::classify(k, p, q, i, j)).or_insert(0) += 1;
                    }
                }
            }
        }
        assert_eq!(seen.len(), 26);
    }

    #[test]
    fn classification_is_symmetric() {
        // H^{pq}_{ij} = H^{qp}_{ji}, and each block is itself symmetric.
        let k = 6;
        for p in 0..k {
            for q in 0..k {
                for i in 0..k {
                    for j in 0..k {
                        let c = EntryCase::classify(k, p, q, i, j);
                        assert_eq!(c, EntryCase::classify(k, q, p, j, i));
                        assert_eq!(c, EntryCase::classify(k, p, q, j, i));
                    }
                }
            }
        }
    }

    fn assembled(xi: [f64; 5], k: usize) -> (HessianMatrix, DeltaSkm1Entries) {
        let w = FixedPointCoords::DeltaSkm1(xi).embed(k).unwrap();
        let h = assemble_hessian(&w, &TargetMatrix::matching(&w)).unwrap();
        let e = entries_delta_skm1(&SevenAngles::from_coords(xi, k).unwrap(), k).unwrap();
        (h, e)
    }

    #[test]
    fn each_case_matches_assembly_at_generic_points() {
        for (xi, k) in [([0.9, 0.07, 0.2, 0.3, -0.8], 6), ([-0.6, 0.15, -0.1, 0.25, 0.9], 8), ([1.1, -0.05, 0.4, 0.12, -1.2], 7)] {
            let (h, e) = assembled(xi, k);
            let mut worst: BTreeMap<EntryCase, f64> = BTreeMap::new();
            for p in 0..k {
                for q in 0..k {
                    for i in 0..k {
                        for j in 0..k {
                            let c = EntryCase::classify(k, p, q, i, j);
                            let dev = (e.value(c) - h.entry(p, q, i, j)).abs();
                            let slot = worst.entry(c).or_insert(0.0);
                            *slot = slot.max(dev);
                        }
                    }
                }
            }
            let bad: Vec<_> = worst.iter().filter(|(_, &d)| d > 1e-12).map(|(c, d)| (c.label(), *d)).collect();
            assert!(bad.is_empty(), "xi={xi:?} k={k}: {bad:?}");
        }
    }

    #[test]
    fn teacher_is_a_valid_point() {
        let (h, e) = assembled([1.0, 0.0, 0.0, 0.0, 1.0], 6);
        assert!((h.dense() - e.materialize().dense()).amax() < 1e-14);
    }
}
