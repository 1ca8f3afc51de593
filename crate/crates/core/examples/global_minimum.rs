//! Hessian spectrum at the global minimum `W = V`, from the isotypic blocks
//! and from a dense eigensolve.
//!
//! ```bash
//! cargo run --example global_minimum -- 6
//! ```

use hesssym::hessian_exact::assemble_hessian;
use hesssym::isotypic_reduction::reduced_spectrum;
use hesssym::loss_geometry::{population_loss, TargetMatrix};
use hesssym::spectrum_oracle::{cluster_eigenvalues, compare_spectra, full_spectrum};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let k: usize = std::env::args().nth(1).map(|s| s.parse()).transpose()?.unwrap_or(6);
    let v = TargetMatrix::padded_identity(k, k)?;
    let w = v.as_neurons();
    println!("k = {k}, loss at the teacher = {:.3e}", population_loss(&w, &v)?);

    let h = assemble_hessian(&w, &v)?;
    let reduced = reduced_spectrum(&h, k, 0)?;
    println!("{:>10} {:>18} {:>6}", "component", "eigenvalue", "mult");
    for line in &reduced.entries {
        println!("{:>10} {:>18.12} {:>6}", line.component, line.eigenvalue, line.multiplicity);
    }

    let full = full_spectrum(&h)?;
    let clusters = cluster_eigenvalues(&full, 1e-9, 1e-7);
    let cmp = compare_spectra(&reduced.expanded(), &full, 1e-10)?;
    println!(
        "dense: {} distinct values, counts {:?}; max deviation from reduced {:.2e}",
        clusters.len(),
        clusters.counts(),
        cmp.max_deviation
    );
    Ok(())
}
