//! Seeded Gaussian perturbations of a type II minimum: the spectrum breaks
//! into clusters around the unperturbed eigenvalues.
//!
//! ```bash
//! cargo run --release --example perturbation_clusters -- 20
//! ```

use hesssym::critical_families::{refine_family, FamilyId};
use hesssym::hessian_exact::assemble_hessian;
use hesssym::loss_geometry::TargetMatrix;
use hesssym::spectrum_oracle::{cluster_eigenvalues, density_histogram, full_spectrum, perturbation_experiment};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let k: usize = std::env::args().nth(1).map(|s| s.parse()).transpose()?.unwrap_or(20);
    let cp = refine_family(FamilyId::TypeII, k, 1e-12)?;
    let v = TargetMatrix::matching(&cp.w);
    let clean = full_spectrum(&assemble_hessian(&cp.w, &v)?)?;
    println!("unperturbed: {} distinct values", cluster_eigenvalues(&clean, 1e-9, 1e-7).len());

    for sigma in [1e-4, 1e-3, 1e-2] {
        let trials = perturbation_experiment(&cp.w, &v, sigma, 42, 5)?;
        let counts: Vec<String> = trials
            .iter()
            .map(|t| t.as_ref().map(|c| c.len().to_string()).unwrap_or_else(|e| format!("error: {e}")))
            .collect();
        println!("sigma {sigma:.0e}: clusters per trial {}", counts.join(" "));
    }

    // Bulk of the unperturbed spectrum, ready for external plotting.
    print!("{}", density_histogram(&clean, 12, (0.0, 0.6))?.to_csv());
    Ok(())
}
