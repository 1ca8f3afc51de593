use std::f64::consts::PI;

use hesssym::critical_families::{refine_family, FamilyId};
use hesssym::hessian_exact::{assemble_hessian, HessianMatrix};
use hesssym::isotypic_reduction::{direct_xy_eigenvalues, reduced_block, reduced_spectrum, representative_set, IrrepClass};
use hesssym::loss_geometry::TargetMatrix;
use hesssym::spectrum_oracle::{cluster_eigenvalues, compare_spectra, full_spectrum};
use nalgebra::{DMatrix, SymmetricEigen};

fn teacher_hessian(k: usize) -> HessianMatrix {
    let v = TargetMatrix::padded_identity(k, k).unwrap();
    assemble_hessian(&v.as_neurons(), &v).unwrap()
}

fn sorted_eigs(m: DMatrix<f64>) -> Vec<f64> {
    let mut e: Vec<f64> = SymmetricEigen::new(m).eigenvalues.iter().copied().collect();
    e.sort_by(f64::total_cmp);
    e
}

#[test]
fn teacher_blocks() {
    for k in [5, 6, 9] {
        let h = teacher_hessian(k);
        for comp in representative_set(k, k, 0).unwrap() {
            let b = reduced_block(&h, &comp).unwrap();
            assert!(b.residual <= 1e-12);
            match comp.irrep {
                IrrepClass::ExteriorSquare(_) => assert!((b.matrix[(0, 0)] - (0.25 - 0.5 / PI)).abs() < 1e-12),
                IrrepClass::Trivial => {
                    let kf = k as f64;
                    // Non-symmetric in the paper's basis; compare through its eigenvalues.
                    let stated = DMatrix::from_row_slice(2, 2, &[
                        0.5 + (kf - 1.0) / (2.0 * PI), (kf - 1.0) / 4.0,
                        0.25, 0.5 / PI + kf / 4.0,
                    ]);
                    let mut want: Vec<f64> = stated.complex_eigenvalues().iter().map(|z| z.re).collect();
                    want.sort_by(f64::total_cmp);
                    let got = &b.eigenvalues;
                    assert!((got[0] - want[0]).abs() < 1e-12 && (got[1] - want[1]).abs() < 1e-12, "{got:?} {want:?}");
                }
                _ => {}
            }
        }
        let (lx, ly) = direct_xy_eigenvalues(&h, k, 0).unwrap();
        assert!((lx - (0.25 - 0.5 / PI)).abs() < 1e-12);
        assert!((ly - (0.25 + 0.5 / PI)).abs() < 1e-12);
    }
}

#[test]
fn identity_reduces_to_identity() {
    let h = HessianMatrix::identity(7, 7);
    for comp in representative_set(7, 6, 1).unwrap() {
        let b = reduced_block(&h, &comp).unwrap();
        assert!(b.residual < 1e-14);
        assert!((b.matrix - DMatrix::identity(comp.multiplicity, comp.multiplicity)).amax() < 1e-14);
    }
}

#[test]
fn type_ii_exterior_square_rate() {
    let k = 32;
    let cp = refine_family(FamilyId::TypeII, k, 1e-12).unwrap();
    let h = assemble_hessian(&cp.w, &TargetMatrix::matching(&cp.w)).unwrap();
    let (lx, _) = direct_xy_eigenvalues(&h, k - 1, 1).unwrap();
    let kf = k as f64;
    assert!((lx - (0.25 - 0.5 / PI - 1.0 / (PI * kf))).abs() <= 5.0 / (kf * kf));
    let spec = reduced_spectrum(&h, k - 1, 1).unwrap();
    assert!((spec.component(&format!("x{}", k - 1))[0].eigenvalue - lx).abs() < 1e-10);
}

#[test]
fn distinct_count_bounds() {
    for (family, bound) in [(FamilyId::TypeA, 7), (FamilyId::TypeI, 12), (FamilyId::TypeII, 12)] {
        for k in [6, 10, 16] {
            let cp = refine_family(family, k, 1e-12).unwrap();
            let h = assemble_hessian(&cp.w, &TargetMatrix::matching(&cp.w)).unwrap();
            let (p, q) = family.block_split(k);
            let lines = reduced_spectrum(&h, p, q).unwrap().expanded();
            assert!(cluster_eigenvalues(&lines, 1e-9, 1e-7).len() <= bound, "{family} k={k}");
        }
    }
}

#[test]
fn type_a_and_type_i_reduce_exactly() {
    for (family, k) in [(FamilyId::TypeA, 10), (FamilyId::TypeI, 10)] {
        let cp = refine_family(family, k, 1e-12).unwrap();
        let h = assemble_hessian(&cp.w, &TargetMatrix::matching(&cp.w)).unwrap();
        let (p, q) = family.block_split(k);
        let reduced = reduced_spectrum(&h, p, q).unwrap();
        let full = full_spectrum(&h).unwrap();
        assert!(compare_spectra(&reduced.expanded(), &full, 1e-8).unwrap().pass);
        assert!(compare_spectra(&full, &sorted_eigs(h.dense().clone()), 0.0).unwrap().pass);
    }
}
