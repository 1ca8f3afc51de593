//! Input dimension larger than the neuron count: the Hessian splits into the
//! square problem plus `d - k` copies of a `k x k` block.
//!
//! ```bash
//! cargo run --example padded_inputs
//! ```

use hesssym::critical_families::{refine_family, FamilyId};
use hesssym::hessian_exact::{assemble_hessian, extend_d_gt_k};
use hesssym::isotypic_reduction::reduced_spectrum_padded;
use hesssym::loss_geometry::TargetMatrix;
use hesssym::spectrum_oracle::{compare_spectra, full_spectrum};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    for (family, k, d) in [(FamilyId::GlobalMin, 6, 8), (FamilyId::TypeII, 8, 10)] {
        let cp = refine_family(family, k, 1e-12)?;
        let ph = extend_d_gt_k(&cp.w, d)?;
        let (p, q) = family.block_split(k);
        let spec = reduced_spectrum_padded(&ph, p, q)?;
        println!("{family} k={k} d={d}: padding block eigenvalues");
        for line in spec.entries.iter().filter(|e| e.component.starts_with("pad:")) {
            println!("  {:>8} {:.12} x{}", line.component, line.eigenvalue, line.multiplicity);
        }
        let brute = assemble_hessian(&cp.w.zero_padded(d)?, &TargetMatrix::padded_identity(k, d)?)?;
        let cmp = compare_spectra(&spec.expanded(), &full_spectrum(&brute)?, 1e-8)?;
        println!("  block form vs dense padded Hessian: max deviation {:.1e}", cmp.max_deviation);
    }
    println!("at the teacher the block is (I + J)/4: eigenvalue 1/4 and (k+1)/4 = {}", 7.0 / 4.0);
    Ok(())
}
