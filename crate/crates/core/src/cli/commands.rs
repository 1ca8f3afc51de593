use std::f64::consts::PI;

use rayon::prelude::*;
use serde::Serialize;

use super::format::{field, json, num, opt_num};
use super::{CommandKind, ExitStatus, Outcome, OutputFormat, RunConfig};
use crate::critical_families::{classify_isotropy, refine_family, FamilyId, PATTERN_TOL};
use crate::error::{Error, Result};
use crate::hessian_exact::{assemble_hessian, extend_d_gt_k, fd_gradient, fd_hessian, HessianMatrix};
use crate::isotypic_reduction::{
    direct_xy_eigenvalues, reduced_spectrum, reduced_spectrum_padded, SpectrumWithMultiplicity,
};
use crate::loss_geometry::{loss_gradient, population_loss, NeuronMatrix, TargetMatrix};
use crate::spectrum_oracle::{
    cluster_eigenvalues, compare_spectra, full_spectrum, perturbation_experiment, SpectrumComparison,
    DEFAULT_TOL_ABS, DEFAULT_TOL_REL,
};

/// Bulk eigenvalues at the global minimum: exterior-square and `(k-2, 2)` components.
const BULK_LOW: f64 = 0.25 - 0.5 / PI;
const BULK_HIGH: f64 = 0.25 + 0.5 / PI;

const FD_GRAD_STEP: f64 = 1e-6;
const FD_GRAD_TOL: f64 = 1e-7;
const FD_HESS_STEP: f64 = 1e-5;
const FD_HESS_TOL: f64 = 1e-5;
const SYMMETRY_TOL: f64 = 1e-10;
const RESIDUAL_TOL: f64 = 1e-8;
const PADDED_FORM_TOL: f64 = 1e-12;

/// A refined family member at `(k, d)`.
struct Point {
    family: FamilyId,
    k: usize,
    d: usize,
    square: NeuronMatrix,
    w: NeuronMatrix,
    v: TargetMatrix,
    loss: f64,
    grad_norm: f64,
    iterations: usize,
}

fn prepare(family: FamilyId, k: usize, d: usize, tol_grad: f64) -> Result<Point> {
    let cp = refine_family(family, k, tol_grad)?;
    let w = cp.w.zero_padded(d)?;
    let v = TargetMatrix::padded_identity(k, d)?;
    let loss = population_loss(&w, &v)?;
    let grad_norm = loss_gradient(&w, &v)?.norm();
    Ok(Point { family, k, d, square: cp.w, w, v, loss, grad_norm, iterations: cp.iterations })
}

impl Point {
    fn split(&self) -> (usize, usize) {
        self.family.block_split(self.k)
    }

    fn reduced(&self) -> Result<SpectrumWithMultiplicity> {
        let (p, q) = self.split();
        if self.d == self.k {
            reduced_spectrum(&assemble_hessian(&self.square, &TargetMatrix::matching(&self.square))?, p, q)
        } else {
            reduced_spectrum_padded(&extend_d_gt_k(&self.square, self.d)?, p, q)
        }
    }

    fn hessian(&self) -> Result<HessianMatrix> {
        assemble_hessian(&self.w, &self.v)
    }
}

/// Runs one validated command.
pub fn run(cfg: &RunConfig) -> Outcome {
    let result = match cfg.command {
        CommandKind::Spectrum => cmd_spectrum(cfg),
        CommandKind::Verify => cmd_verify(cfg),
        CommandKind::Sweep => Ok(cmd_sweep(cfg)),
        CommandKind::Perturb => cmd_perturb(cfg),
    };
    result.unwrap_or_else(|e| Outcome { status: ExitStatus::for_error(&e), report: format!("error: {e}\n") })
}

// ---- spectrum -------------------------------------------------------------

/// One output row: a reduced eigenvalue, or one cluster of the full spectrum.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectrumRecord {
    pub family: FamilyId,
    pub k: usize,
    pub d: usize,
    /// `reduced` or `full`.
    pub source: &'static str,
    /// Irrep label for reduced rows, `all` for full rows.
    pub component: String,
    pub eigenvalue: f64,
    pub multiplicity: usize,
    pub loss: f64,
    pub grad_norm: f64,
}

#[derive(Serialize)]
struct SpectrumReport<'a> {
    family: FamilyId,
    k: usize,
    d: usize,
    loss: f64,
    grad_norm: f64,
    iterations: usize,
    max_residual: f64,
    tol_spec: f64,
    comparison: SpectrumComparison,
    records: &'a [SpectrumRecord],
}

const SPECTRUM_HEADER: &str = "family,k,d,source,component,eigenvalue,multiplicity,loss,grad_norm";

fn cmd_spectrum(cfg: &RunConfig) -> Result<Outcome> {
    let pt = prepare(cfg.family, cfg.k, cfg.d, cfg.tol_grad)?;
    let reduced = pt.reduced()?;
    let full = full_spectrum(&pt.hessian()?)?;
    let comparison = compare_spectra(&reduced.expanded(), &full, cfg.tol_spec)?;

    let record = |source, component: String, eigenvalue, multiplicity| SpectrumRecord {
        family: pt.family,
        k: pt.k,
        d: pt.d,
        source,
        component,
        eigenvalue,
        multiplicity,
        loss: pt.loss,
        grad_norm: pt.grad_norm,
    };
    let mut records: Vec<SpectrumRecord> =
        reduced.entries.iter().map(|e| record("reduced", e.component.clone(), e.eigenvalue, e.multiplicity)).collect();
    for c in cluster_eigenvalues(&full, DEFAULT_TOL_ABS, DEFAULT_TOL_REL).clusters {
        records.push(record("full", "all".into(), c.center, c.count));
    }

    let report = match cfg.format {
        OutputFormat::Json => json(&SpectrumReport {
            family: pt.family,
            k: pt.k,
            d: pt.d,
            loss: pt.loss,
            grad_norm: pt.grad_norm,
            iterations: pt.iterations,
            max_residual: reduced.max_residual,
            tol_spec: cfg.tol_spec,
            comparison,
            records: &records,
        }),
        OutputFormat::Csv => {
            let mut s = format!("{SPECTRUM_HEADER}\n");
            for r in &records {
                s.push_str(&format!(
                    "{},{},{},{},{},{},{},{},{}\n",
                    r.family,
                    r.k,
                    r.d,
                    r.source,
                    field(&r.component),
                    num(r.eigenvalue),
                    r.multiplicity,
                    num(r.loss),
                    num(r.grad_norm)
                ));
            }
            s
        }
    };
    let status = if comparison.pass { ExitStatus::Success } else { ExitStatus::Internal };
    Ok(Outcome { status, report })
}

// ---- verify ---------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyCheck {
    pub check: &'static str,
    pub measured: f64,
    pub threshold: f64,
    pub pass: bool,
}

impl VerifyCheck {
    fn at_most(check: &'static str, measured: f64, threshold: f64) -> Self {
        Self { check, measured, threshold, pass: measured <= threshold }
    }
}

#[derive(Serialize)]
struct VerifyReport<'a> {
    family: FamilyId,
    k: usize,
    d: usize,
    pass: bool,
    checks: &'a [VerifyCheck],
}

fn cmd_verify(cfg: &RunConfig) -> Result<Outcome> {
    let pt = prepare(cfg.family, cfg.k, cfg.d, cfg.tol_grad)?;
    let h = pt.hessian()?;
    let mut checks = vec![VerifyCheck::at_most("grad_norm", pt.grad_norm, cfg.tol_grad)];

    let isotropy_ok = classify_isotropy(&pt.w, PATTERN_TOL) == pt.family.isotropy();
    checks.push(VerifyCheck::at_most("isotropy_mismatch", if isotropy_ok { 0.0 } else { 1.0 }, 0.0));
    checks.push(VerifyCheck::at_most("hessian_asymmetry", h.max_asymmetry(), SYMMETRY_TOL));

    let fd_g = fd_gradient(&pt.w, &pt.v, FD_GRAD_STEP)?;
    checks.push(VerifyCheck::at_most("fd_gradient", (fd_g - loss_gradient(&pt.w, &pt.v)?).amax(), FD_GRAD_TOL));
    let fd_h = fd_hessian(&pt.w, &pt.v, FD_HESS_STEP)?;
    checks.push(VerifyCheck::at_most("fd_hessian", (fd_h.dense() - h.dense()).amax(), FD_HESS_TOL));

    if pt.d > pt.k {
        let natural = extend_d_gt_k(&pt.square, pt.d)?.to_natural();
        checks.push(VerifyCheck::at_most("padded_block_form", (natural.dense() - h.dense()).amax(), PADDED_FORM_TOL));
    }

    let full = full_spectrum(&h)?;
    match pt.reduced() {
        Ok(reduced) => {
            checks.push(VerifyCheck::at_most("equivariance_residual", reduced.max_residual, RESIDUAL_TOL));
            let kd = (pt.k * pt.d) as f64;
            checks.push(VerifyCheck {
                check: "multiplicity_total",
                measured: reduced.total_multiplicity() as f64,
                threshold: kd,
                pass: reduced.total_multiplicity() == pt.k * pt.d,
            });
            let cmp = compare_spectra(&reduced.expanded(), &full, cfg.tol_spec)?;
            checks.push(VerifyCheck::at_most("reduced_vs_full", cmp.max_deviation, cfg.tol_spec));
        }
        Err(Error::EquivarianceViolation { residual, .. }) => {
            checks.push(VerifyCheck::at_most("equivariance_residual", residual, RESIDUAL_TOL));
            checks.push(VerifyCheck::at_most("reduced_vs_full", f64::INFINITY, cfg.tol_spec));
        }
        Err(e) => return Err(e),
    }

    let pass = checks.iter().all(|c| c.pass);
    let report = match cfg.format {
        OutputFormat::Json => json(&VerifyReport { family: pt.family, k: pt.k, d: pt.d, pass, checks: &checks }),
        OutputFormat::Csv => {
            let mut s = String::from("family,k,d,check,measured,threshold,status\n");
            for c in &checks {
                s.push_str(&format!(
                    "{},{},{},{},{},{},{}\n",
                    pt.family,
                    pt.k,
                    pt.d,
                    c.check,
                    num(c.measured),
                    num(c.threshold),
                    if c.pass { "PASS" } else { "FAIL" }
                ));
            }
            s
        }
    };
    Ok(Outcome { status: if pass { ExitStatus::Success } else { ExitStatus::CheckFailed }, report })
}

// ---- sweep ----------------------------------------------------------------

/// Asymptotic quantities at one `k`; numeric fields are `None` when the
/// point failed.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub family: FamilyId,
    pub k: usize,
    pub status: String,
    pub loss: Option<f64>,
    pub k_loss: Option<f64>,
    pub grad_norm: Option<f64>,
    pub lambda_x: Option<f64>,
    pub lambda_y: Option<f64>,
    pub k_scaled_x: Option<f64>,
    pub k_scaled_y: Option<f64>,
    pub sqrt_k_scaled_x: Option<f64>,
    pub sqrt_k_scaled_y: Option<f64>,
    pub lambda_min: Option<f64>,
    pub lambda_max: Option<f64>,
    pub lambda_max_over_quarter_k: Option<f64>,
    pub outliers_above_one: Option<usize>,
}

const SWEEP_DOC: &str = "\
# columns:
#   lambda_x, lambda_y: eigenvalues on the exterior-square and (m-2,2) components of the large block
#   k_scaled_x = k*(lambda_x - (1/4 - 1/(2 pi)))
#   k_scaled_y = k*(lambda_y - (1/4 + 1/(2 pi)))
#   sqrt_k_scaled_x, sqrt_k_scaled_y: the same offsets scaled by sqrt(k)
#   lambda_max_over_quarter_k = lambda_max / (k/4)
#   outliers_above_one: eigenvalues greater than 1, counted with multiplicity
#   status: ok, or the error that stopped this k (the sweep continues)
";

const SWEEP_HEADER: &str = "family,k,status,loss,k_loss,grad_norm,lambda_x,lambda_y,k_scaled_x,k_scaled_y,sqrt_k_scaled_x,sqrt_k_scaled_y,lambda_min,lambda_max,lambda_max_over_quarter_k,outliers_above_one";

fn sweep_point(family: FamilyId, k: usize, tol_grad: f64) -> Result<SweepRow> {
    let pt = prepare(family, k, k, tol_grad)?;
    let (p, q) = pt.split();
    let h = pt.hessian()?;
    let spec = reduced_spectrum(&h, p, q)?;
    let (lx, ly) = direct_xy_eigenvalues(&h, p, q)?;
    let kf = k as f64;
    let lmax = spec.max_eigenvalue().unwrap_or(f64::NAN);
    Ok(SweepRow {
        family,
        k,
        status: "ok".into(),
        loss: Some(pt.loss),
        k_loss: Some(kf * pt.loss),
        grad_norm: Some(pt.grad_norm),
        lambda_x: Some(lx),
        lambda_y: Some(ly),
        k_scaled_x: Some(kf * (lx - BULK_LOW)),
        k_scaled_y: Some(kf * (ly - BULK_HIGH)),
        sqrt_k_scaled_x: Some(kf.sqrt() * (lx - BULK_LOW)),
        sqrt_k_scaled_y: Some(kf.sqrt() * (ly - BULK_HIGH)),
        lambda_min: spec.min_eigenvalue(),
        lambda_max: Some(lmax),
        lambda_max_over_quarter_k: Some(lmax / (kf / 4.0)),
        outliers_above_one: Some(spec.entries.iter().filter(|e| e.eigenvalue > 1.0).map(|e| e.multiplicity).sum()),
    })
}

/// `k, 2k, 4k, ...` up to `k_max`.
pub fn sweep_ks(k: usize, k_max: usize) -> Vec<usize> {
    std::iter::successors(Some(k), |&x| Some(2 * x)).take_while(|&x| x <= k_max).collect()
}

fn cmd_sweep(cfg: &RunConfig) -> Outcome {
    let mut rows: Vec<SweepRow> = sweep_ks(cfg.k, cfg.k_max)
        .into_par_iter()
        .map(|k| {
            sweep_point(cfg.family, k, cfg.tol_grad).unwrap_or_else(|e| SweepRow {
                family: cfg.family,
                k,
                status: format!("error: {e}"),
                loss: None,
                k_loss: None,
                grad_norm: None,
                lambda_x: None,
                lambda_y: None,
                k_scaled_x: None,
                k_scaled_y: None,
                sqrt_k_scaled_x: None,
                sqrt_k_scaled_y: None,
                lambda_min: None,
                lambda_max: None,
                lambda_max_over_quarter_k: None,
                outliers_above_one: None,
            })
        })
        .collect();
    rows.sort_by_key(|r| r.k);
    let all_ok = rows.iter().all(|r| r.status == "ok");

    let report = match cfg.format {
        OutputFormat::Json => json(&rows),
        OutputFormat::Csv => {
            let mut s = format!("{SWEEP_DOC}{SWEEP_HEADER}\n");
            for r in &rows {
                let cells = [
                    r.family.to_string(),
                    r.k.to_string(),
                    field(&r.status),
                    opt_num(r.loss),
                    opt_num(r.k_loss),
                    opt_num(r.grad_norm),
                    opt_num(r.lambda_x),
                    opt_num(r.lambda_y),
                    opt_num(r.k_scaled_x),
                    opt_num(r.k_scaled_y),
                    opt_num(r.sqrt_k_scaled_x),
                    opt_num(r.sqrt_k_scaled_y),
                    opt_num(r.lambda_min),
                    opt_num(r.lambda_max),
                    opt_num(r.lambda_max_over_quarter_k),
                    r.outliers_above_one.map(|n| n.to_string()).unwrap_or_default(),
                ];
                s.push_str(&cells.join(","));
                s.push('\n');
            }
            s
        }
    };
    Outcome { status: if all_ok { ExitStatus::Success } else { ExitStatus::CheckFailed }, report }
}

// ---- perturb --------------------------------------------------------------

/// One cluster of one trial, or a failed trial with empty cluster fields.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PerturbRow {
    pub family: FamilyId,
    pub k: usize,
    pub d: usize,
    pub sigma: f64,
    pub seed: u64,
    pub trial: usize,
    pub status: String,
    pub cluster: Option<usize>,
    pub center: Option<f64>,
    pub count: Option<usize>,
    pub spread: Option<f64>,
}

const PERTURB_HEADER: &str = "family,k,d,sigma,seed,trial,status,cluster,center,count,spread";

fn cmd_perturb(cfg: &RunConfig) -> Result<Outcome> {
    let pt = prepare(cfg.family, cfg.k, cfg.d, cfg.tol_grad)?;
    let mut rows = Vec::new();
    for &sigma in &cfg.sigmas {
        let trials = perturbation_experiment(&pt.w, &pt.v, sigma, cfg.seed, cfg.trials)?;
        for (trial, outcome) in trials.into_iter().enumerate() {
            let base = PerturbRow {
                family: pt.family,
                k: pt.k,
                d: pt.d,
                sigma,
                seed: cfg.seed,
                trial,
                status: "ok".into(),
                cluster: None,
                center: None,
                count: None,
                spread: None,
            };
            match outcome {
                Ok(spec) => rows.extend(spec.clusters.iter().enumerate().map(|(i, c)| PerturbRow {
                    cluster: Some(i),
                    center: Some(c.center),
                    count: Some(c.count),
                    spread: Some(c.spread),
                    ..base.clone()
                })),
                Err(e) => rows.push(PerturbRow { status: format!("error: {e}"), ..base }),
            }
        }
    }

    let report = match cfg.format {
        OutputFormat::Json => json(&rows),
        OutputFormat::Csv => {
            let mut s = format!("{PERTURB_HEADER}\n");
            for r in &rows {
                let cells = [
                    r.family.to_string(),
                    r.k.to_string(),
                    r.d.to_string(),
                    num(r.sigma),
                    r.seed.to_string(),
                    r.trial.to_string(),
                    field(&r.status),
                    r.cluster.map(|n| n.to_string()).unwrap_or_default(),
                    opt_num(r.center),
                    r.count.map(|n| n.to_string()).unwrap_or_default(),
                    opt_num(r.spread),
                ];
                s.push_str(&cells.join(","));
                s.push('\n');
            }
            s
        }
    };
    Ok(Outcome { status: ExitStatus::Success, report })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cli::Cli;
    use clap::Parser;

    fn config(args: &[&str]) -> RunConfig {
        let cli = Cli::try_parse_from(std::iter::once("hesssym").chain(args.iter().copied())).unwrap();
        RunConfig::try_from(cli).unwrap()
    }

    #[test]
    fn sweep_doubles() {
        assert_eq!(sweep_ks(8, 64), vec![8, 16, 32, 64]);
        assert_eq!(sweep_ks(6, 20), vec![6, 12]);
    }

    #[test]
    fn global_spectrum_csv() {
        let out = run(&config(&["spectrum", "--family", "global", "--k", "6"]));
        assert_eq!(out.status, ExitStatus::Success);
        let mut lines = out.report.lines();
        assert_eq!(lines.next(), Some(SPECTRUM_HEADER));
        let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
        for source in ["reduced", "full"] {
            let total: usize = rows.iter().filter(|r| r[3] == source).map(|r| r[6].parse::<usize>().unwrap()).sum();
            assert_eq!(total, 36, "{source}");
        }
        assert_eq!(rows.iter().filter(|r| r[3] == "full").count(), 6);
    }

    #[test]
    fn verify_global_passes() {
        let out = run(&config(&["verify", "--family", "global", "--k", "6", "--d", "7"]));
        assert_eq!(out.status, ExitStatus::Success, "{}", out.report);
        assert!(out.report.contains("padded_block_form"));
    }

    #[test]
    fn perturb_rows_are_deterministic() {
        let cfg = config(&["perturb", "--family", "global", "--k", "6", "--sigma", "0,1e-3", "--trials", "2", "--seed", "9"]);
        let a = run(&cfg);
        assert_eq!(a.status, ExitStatus::Success);
        assert_eq!(a.report, run(&cfg).report);
        let zero_clusters = a.report.lines().filter(|l| l.contains(",0.0000000000000000e0,9,0,ok,")).count();
        assert_eq!(zero_clusters, 6);
    }
}
