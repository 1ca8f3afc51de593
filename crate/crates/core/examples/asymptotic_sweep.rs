//! Bulk and outlier eigenvalues of a family across doubling `k`, with the
//! leading-order offsets scaled out.
//!
//! ```bash
//! cargo run --release --example asymptotic_sweep -- typeII 64
//! ```

use std::f64::consts::PI;

use hesssym::critical_families::{refine_family, FamilyId};
use hesssym::hessian_exact::assemble_hessian;
use hesssym::isotypic_reduction::{direct_xy_eigenvalues, reduced_spectrum};
use hesssym::loss_geometry::TargetMatrix;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let family: FamilyId = args.next().as_deref().unwrap_or("typeII").parse()?;
    let k_max: usize = args.next().map(|s| s.parse()).transpose()?.unwrap_or(64);
    let (low, high) = (0.25 - 0.5 / PI, 0.25 + 0.5 / PI);

    println!("{family}: offsets from 1/4 -+ 1/(2 pi); the type II rate is -1/(pi k), type A -1/(pi sqrt k)");
    println!("{:>4} {:>10} {:>10} {:>10} {:>10} {:>10} {:>9}", "k", "k*dx", "k*dy", "rk*dx", "kF", "lmax/(k/4)", "outliers");
    let mut k = 8;
    while k <= k_max {
        let cp = refine_family(family, k, 1e-12)?;
        let h = assemble_hessian(&cp.w, &TargetMatrix::matching(&cp.w))?;
        let (p, q) = family.block_split(k);
        let (lx, ly) = direct_xy_eigenvalues(&h, p, q)?;
        let spec = reduced_spectrum(&h, p, q)?;
        let kf = k as f64;
        let outliers: usize = spec.entries.iter().filter(|e| e.eigenvalue > 1.0).map(|e| e.multiplicity).sum();
        println!(
            "{k:>4} {:>10.5} {:>10.5} {:>10.5} {:>10.5} {:>10.5} {outliers:>9}",
            kf * (lx - low),
            kf * (ly - high),
            kf.sqrt() * (lx - low),
            kf * cp.loss,
            spec.max_eigenvalue().unwrap_or(f64::NAN) / (kf / 4.0)
        );
        k *= 2;
    }
    println!("-1/pi = {:.5}, 1/2 - 2/pi^2 = {:.5}", -1.0 / PI, 0.5 - 2.0 / (PI * PI));
    Ok(())
}
