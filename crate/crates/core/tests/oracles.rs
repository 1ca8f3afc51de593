//! Independent cross-checks at refined critical points: finite differences,
//! closed-form entry tables, and dense eigensolves against reduced blocks.

use hesssym::critical_families::{refine_family, FamilyId};
use hesssym::hessian_exact::{
    assemble_hessian, entries_delta_sk, entries_delta_skm1, extend_d_gt_k, fd_gradient, fd_hessian, DeltaSkAngles,
    SevenAngles,
};
use hesssym::isotypic_reduction::{reduced_spectrum, reduced_spectrum_padded};
use hesssym::loss_geometry::{loss_gradient, TargetMatrix};
use hesssym::spectrum_oracle::{compare_spectra, full_spectrum};

const TOL: f64 = 1e-12;

#[test]
fn finite_differences_at_type_ii_k8() {
    let cp = refine_family(FamilyId::TypeII, 8, TOL).unwrap();
    let v = TargetMatrix::matching(&cp.w);
    let g = loss_gradient(&cp.w, &v).unwrap();
    assert!((fd_gradient(&cp.w, &v, 1e-6).unwrap() - &g).amax() < 1e-7);
    let h = assemble_hessian(&cp.w, &v).unwrap();
    assert!((fd_hessian(&cp.w, &v, 1e-5).unwrap().dense() - h.dense()).amax() < 1e-5);
}

#[test]
fn symmetric_table_at_refined_type_a() {
    let cp = refine_family(FamilyId::TypeA, 12, TOL).unwrap();
    let angles = DeltaSkAngles::from_matrix(&cp.w, 1e-10).unwrap();
    let table = entries_delta_sk(angles.theta, angles.alpha, angles.beta, angles.tau, 12).unwrap();
    let h = assemble_hessian(&cp.w, &TargetMatrix::matching(&cp.w)).unwrap();
    assert!((table.materialize().dense() - h.dense()).amax() < 1e-12);
}

#[test]
fn distinguished_table_at_refined_type_ii() {
    let cp = refine_family(FamilyId::TypeII, 10, TOL).unwrap();
    let angles = SevenAngles::from_matrix(&cp.w, 1e-10).unwrap();
    let table = entries_delta_skm1(&angles, 10).unwrap();
    let h = assemble_hessian(&cp.w, &TargetMatrix::matching(&cp.w)).unwrap();
    assert!((table.materialize().dense() - h.dense()).amax() < 1e-12);
}

#[test]
fn reduced_matches_dense_for_every_family() {
    for family in FamilyId::ALL {
        for k in [6, 10] {
            let cp = refine_family(family, k, TOL).unwrap();
            let h = assemble_hessian(&cp.w, &TargetMatrix::matching(&cp.w)).unwrap();
            let (p, q) = family.block_split(k);
            let reduced = reduced_spectrum(&h, p, q).unwrap();
            let cmp = compare_spectra(&reduced.expanded(), &full_spectrum(&h).unwrap(), 1e-8).unwrap();
            assert!(cmp.pass, "{family} k={k}: {}", cmp.max_deviation);
        }
    }
}

#[test]
fn padded_type_ii_matches_brute_force() {
    let cp = refine_family(FamilyId::TypeII, 8, TOL).unwrap();
    let ph = extend_d_gt_k(&cp.w, 10).unwrap();
    let reduced = reduced_spectrum_padded(&ph, 7, 1).unwrap();
    let padded = cp.w.zero_padded(10).unwrap();
    let h = assemble_hessian(&padded, &TargetMatrix::padded_identity(8, 10).unwrap()).unwrap();
    let cmp = compare_spectra(&reduced.expanded(), &full_spectrum(&h).unwrap(), 1e-8).unwrap();
    assert!(cmp.pass, "{}", cmp.max_deviation);
    // Three padding eigenvalues for the distinguished-neuron families.
    assert_eq!(reduced.entries.iter().filter(|e| e.component.starts_with("pad:")).count(), 3);
}

#[test]
fn teacher_padding_eigenvalues() {
    let v = TargetMatrix::padded_identity(6, 6).unwrap().as_neurons();
    let ph = extend_d_gt_k(&v, 8).unwrap();
    let spec = reduced_spectrum_padded(&ph, 6, 0).unwrap();
    let pad: Vec<_> = spec.entries.iter().filter(|e| e.component.starts_with("pad:")).collect();
    assert_eq!(pad.len(), 2);
    assert!((pad[0].eigenvalue - 0.25).abs() < 1e-12 && pad[0].multiplicity == 10);
    assert!((pad[1].eigenvalue - 7.0 / 4.0).abs() < 1e-12 && pad[1].multiplicity == 2);
}
