//! The isotypic decomposition for the distinguished-neuron isotropy and the
//! small reduced block of each component at a refined type II point.
//!
//! ```bash
//! cargo run --example isotypic_blocks -- 10
//! ```

use hesssym::critical_families::{refine_family, FamilyId};
use hesssym::hessian_exact::assemble_hessian;
use hesssym::isotypic_reduction::{reduced_block, representative_set};
use hesssym::loss_geometry::TargetMatrix;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let k: usize = std::env::args().nth(1).map(|s| s.parse()).transpose()?.unwrap_or(10);
    let cp = refine_family(FamilyId::TypeII, k, 1e-12)?;
    let h = assemble_hessian(&cp.w, &TargetMatrix::matching(&cp.w))?;

    let mut dim = 0;
    for comp in representative_set(k, k - 1, 1)? {
        let block = reduced_block(&h, &comp)?;
        dim += comp.multiplicity * comp.irrep.degree();
        println!(
            "{:>4}: multiplicity {} x degree {:>3}, residual {:.1e}",
            comp.irrep.label(),
            comp.multiplicity,
            comp.irrep.degree(),
            block.residual
        );
        println!("      eigenvalues {:?}", block.eigenvalues.iter().map(|x| format!("{x:.8}")).collect::<Vec<_>>());
    }
    println!("total dimension {dim} = k^2 = {}", k * k);
    Ok(())
}
