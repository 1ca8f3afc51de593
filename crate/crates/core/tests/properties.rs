use hesssym::hessian_exact::{assemble_hessian, fd_gradient};
use hesssym::isotypic_reduction::reduced_spectrum;
use hesssym::loss_geometry::{apply_symmetry, loss_gradient, population_loss, NeuronMatrix, PermPair, TargetMatrix};
use hesssym::spectrum_oracle::{cluster_eigenvalues, compare_spectra, density_histogram, full_spectrum, symmetric_eigenvalues};
use nalgebra::DMatrix;
use proptest::prelude::*;
use proptest::sample::subsequence;

/// Students near a scaled identity so rows stay far from parallel.
fn student(k: usize, d: usize) -> impl Strategy<Value = NeuronMatrix> {
    prop::collection::vec(-0.4f64..0.4, k * d).prop_map(move |xs| {
        let m = DMatrix::from_fn(k, d, |i, j| xs[i * d + j] + if i == j { 1.2 } else { 0.0 });
        NeuronMatrix::new(m).unwrap()
    })
}

fn permutation(n: usize) -> impl Strategy<Value = Vec<usize>> {
    Just((0..n).collect::<Vec<_>>()).prop_shuffle()
}

fn shape() -> impl Strategy<Value = (usize, usize)> {
    (2usize..6).prop_flat_map(|k| (Just(k), k..k + 3))
}

fn square_case() -> impl Strategy<Value = (NeuronMatrix, Vec<usize>, Vec<usize>)> {
    (2usize..6).prop_flat_map(|k| (student(k, k), permutation(k), permutation(k)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn loss_is_nonnegative_and_symmetric((w, rows, cols) in square_case()) {
        let v = TargetMatrix::matching(&w);
        let f = population_loss(&w, &v).unwrap();
        prop_assert!(f >= 0.0);
        let g = PermPair::new(rows, cols).unwrap();
        let fg = population_loss(&apply_symmetry(&w, &g), &v).unwrap();
        prop_assert!((f - fg).abs() <= 1e-12 * f.max(1.0));
    }

    #[test]
    fn gradient_and_hessian_are_equivariant((w, rows, _) in square_case(), dir in prop::collection::vec(-1.0f64..1.0, 25)) {
        let v = TargetMatrix::matching(&w);
        let k = w.k();
        let g = PermPair::diagonal(&rows, k).unwrap();
        let gw = apply_symmetry(&w, &g);
        let grad = loss_gradient(&w, &v).unwrap();
        prop_assert!((loss_gradient(&gw, &v).unwrap() - g.act(&grad)).amax() < 1e-12);
        let m = DMatrix::from_fn(k, k, |i, j| dir[i * 5 + j]);
        let lhs = assemble_hessian(&gw, &v).unwrap().apply(&g.act(&m));
        let rhs = g.act(&assemble_hessian(&w, &v).unwrap().apply(&m));
        prop_assert!((lhs - rhs).amax() < 1e-11);
    }

    #[test]
    fn gradient_matches_central_differences(w in shape().prop_flat_map(|(k, d)| student(k, d))) {
        let v = TargetMatrix::padded_identity(w.k(), w.d()).unwrap();
        let err = (fd_gradient(&w, &v, 1e-6).unwrap() - loss_gradient(&w, &v).unwrap()).amax();
        prop_assert!(err < 1e-7, "{}", err);
    }

    #[test]
    fn hessian_is_exactly_symmetric(w in shape().prop_flat_map(|(k, d)| student(k, d))) {
        let v = TargetMatrix::padded_identity(w.k(), w.d()).unwrap();
        prop_assert_eq!(assemble_hessian(&w, &v).unwrap().max_asymmetry(), 0.0);
    }

    #[test]
    fn spectrum_invariants(w in shape().prop_flat_map(|(k, d)| student(k, d)), seed in any::<u64>()) {
        let v = TargetMatrix::padded_identity(w.k(), w.d()).unwrap();
        let h = assemble_hessian(&w, &v).unwrap();
        let eigs = full_spectrum(&h).unwrap();
        let n = eigs.len() as f64;
        let norm = h.dense().norm();
        prop_assert!((eigs.iter().sum::<f64>() - h.dense().trace()).abs() <= 1e-9 * norm * n);
        let sq: f64 = eigs.iter().map(|x| x * x).sum();
        prop_assert!((sq - norm * norm).abs() <= 1e-9 * norm * norm);

        // Conjugating by a coordinate permutation leaves the spectrum alone.
        let dim = h.dim();
        let mut perm: Vec<usize> = (0..dim).collect();
        let mut state = seed | 1;
        for i in (1..dim).rev() {
            state ^= state << 13; state ^= state >> 7; state ^= state << 17;
            perm.swap(i, (state % (i as u64 + 1)) as usize);
        }
        let permuted = DMatrix::from_fn(dim, dim, |i, j| h.dense()[(perm[i], perm[j])]);
        let cmp = compare_spectra(&eigs, &symmetric_eigenvalues(&permuted).unwrap(), 1e-10).unwrap();
        prop_assert!(cmp.pass, "{}", cmp.max_deviation);
    }

    #[test]
    fn clustering_partitions_sorted_values(mut xs in prop::collection::vec(-3.0f64..3.0, 0..60), tol in 1e-6f64..0.2) {
        xs.sort_by(f64::total_cmp);
        let c = cluster_eigenvalues(&xs, tol, 0.0);
        prop_assert_eq!(c.total_count(), xs.len());
        for pair in c.clusters.windows(2) {
            prop_assert!(pair[0].center < pair[1].center);
        }
        for cl in &c.clusters {
            prop_assert!(cl.spread <= tol * (cl.count as f64 - 1.0).max(0.0) + 1e-15);
        }
    }

    #[test]
    fn exact_multiplicities_survive_clustering(values in subsequence(vec![0.1, 0.5, 1.3, 2.0, 4.5], 1..5), reps in prop::collection::vec(1usize..6, 5)) {
        let mut xs = Vec::new();
        for (v, r) in values.iter().zip(&reps) {
            xs.extend(std::iter::repeat_n(*v, *r));
        }
        let c = cluster_eigenvalues(&xs, 1e-9, 1e-7);
        prop_assert_eq!(c.counts(), reps[..values.len()].to_vec());
    }

    #[test]
    fn comparison_ignores_order(xs in prop::collection::vec(-5.0f64..5.0, 1..30)) {
        let mut rev = xs.clone();
        rev.reverse();
        let r = compare_spectra(&xs, &rev, 0.0).unwrap();
        prop_assert!(r.pass);
    }

    #[test]
    fn histogram_counts_values_in_range(xs in prop::collection::vec(-2.0f64..2.0, 0..80), bins in 1usize..12) {
        let h = density_histogram(&xs, bins, (-1.0, 1.0)).unwrap();
        prop_assert_eq!(h.counts.len() + 1, h.bin_edges.len());
        let inside = xs.iter().filter(|x| (-1.0..=1.0).contains(*x)).count();
        prop_assert_eq!(h.counts.iter().sum::<usize>(), inside);
    }

    #[test]
    fn reduction_matches_dense_at_patterned_points(
        (p, q) in prop_oneof![(4usize..9).prop_map(|p| (p, 0)), (4usize..9).prop_map(|p| (p, 1)), (6usize..9).prop_map(|p| (p, 2)), Just((7, 3))],
        c in prop::array::uniform6(-0.15f64..0.15),
    ) {
        let k = p + q;
        let m = DMatrix::from_fn(k, k, |i, j| match (i < p, j < p) {
            (true, true) => if i == j { 1.0 + c[0] } else { c[1] },
            (true, false) => c[2],
            (false, true) => c[3],
            (false, false) => if i == j { 0.9 + c[4] } else { c[5] },
        });
        let w = NeuronMatrix::new(m).unwrap();
        let h = assemble_hessian(&w, &TargetMatrix::matching(&w)).unwrap();
        let spec = reduced_spectrum(&h, p, q).unwrap();
        prop_assert_eq!(spec.total_multiplicity(), k * k);
        let cmp = compare_spectra(&spec.expanded(), &full_spectrum(&h).unwrap(), 1e-9).unwrap();
        prop_assert!(cmp.pass, "({},{}) {}", p, q, cmp.max_deviation);
    }
}
