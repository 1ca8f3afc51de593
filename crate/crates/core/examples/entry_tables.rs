//! Closed-form Hessian entries on the two fixed-point subspaces, checked
//! against the generic block assembly.
//!
//! ```bash
//! cargo run --example entry_tables
//! ```

use hesssym::critical_families::{refine_family, FamilyId};
use hesssym::hessian_exact::{assemble_hessian, entries_delta_skm1, DeltaSkAngles, DeltaSkEntries, EntryCase, SevenAngles};
use hesssym::loss_geometry::TargetMatrix;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let a = refine_family(FamilyId::TypeA, 12, 1e-12)?;
    let angles = DeltaSkAngles::from_matrix(&a.w, 1e-10)?;
    let table = DeltaSkEntries::from_angles(&angles, 12)?;
    let h = assemble_hessian(&a.w, &TargetMatrix::matching(&a.w))?;
    println!("typeA k=12: angles {angles:?}");
    println!("  table vs assembly: {:.1e}", (table.materialize().dense() - h.dense()).amax());

    let b = refine_family(FamilyId::TypeII, 10, 1e-12)?;
    let seven = SevenAngles::from_matrix(&b.w, 1e-10)?;
    let table = entries_delta_skm1(&seven, 10)?;
    let h = assemble_hessian(&b.w, &TargetMatrix::matching(&b.w))?;
    println!("typeII k=10: {} entry cases", EntryCase::ALL.len());
    for case in EntryCase::ALL {
        println!("  {:>9} {:+.12}", case.label(), table.value(case));
    }
    println!("  table vs assembly: {:.1e}", (table.materialize().dense() - h.dense()).amax());
    Ok(())
}
