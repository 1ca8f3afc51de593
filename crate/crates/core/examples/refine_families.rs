//! Newton refinement of each spurious family from its truncated series, with
//! loss and isotropy of the result.
//!
//! ```bash
//! cargo run --example refine_families -- 12
//! ```

use hesssym::critical_families::{classify_isotropy, refine_family, FamilyId, PATTERN_TOL};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let k: usize = std::env::args().nth(1).map(|s| s.parse()).transpose()?.unwrap_or(12);
    println!("{:>7} {:>10} {:>10} {:>10} {:>5} {:>10}", "family", "start |g|", "final |g|", "loss", "iters", "isotropy");
    for family in FamilyId::ALL {
        let cp = refine_family(family, k, 1e-12)?;
        println!(
            "{:>7} {:>10.2e} {:>10.2e} {:>10.6} {:>5} {:>10?}",
            family.name(),
            cp.initial_grad_norm,
            cp.grad_norm,
            cp.loss,
            cp.iterations,
            classify_isotropy(&cp.w, PATTERN_TOL)
        );
        println!("        coordinates {:?}", cp.coords.values().iter().map(|x| format!("{x:.6}")).collect::<Vec<_>>());
    }
    Ok(())
}
