use hesssym::critical_families::{refine_family, FamilyId};
use hesssym::loss_geometry::TargetMatrix;
use hesssym::spectrum_oracle::perturbation_experiment;

fn mean_cluster_count(sigma: f64, seed: u64) -> (f64, Vec<usize>) {
    let cp = refine_family(FamilyId::TypeII, 20, 1e-12).unwrap();
    let v = TargetMatrix::matching(&cp.w);
    let counts: Vec<usize> =
        perturbation_experiment(&cp.w, &v, sigma, seed, 5).unwrap().into_iter().map(|t| t.unwrap().len()).collect();
    (counts.iter().sum::<usize>() as f64 / counts.len() as f64, counts)
}

#[test]
fn cluster_counts_grow_with_sigma() {
    let means: Vec<f64> = [1e-4, 1e-3, 1e-2].iter().map(|&s| mean_cluster_count(s, 7).0).collect();
    assert!(means.windows(2).all(|w| w[0] <= w[1]), "{means:?}");
}

#[test]
fn small_noise_keeps_twelve_clusters_across_seeds() {
    // Occasionally one cluster splits in two; the typical trial keeps all twelve.
    for seed in [1, 2, 3] {
        let (_, mut counts) = mean_cluster_count(1e-4, seed);
        counts.sort();
        assert!(counts.iter().all(|&c| (12..=14).contains(&c)), "seed {seed}: {counts:?}");
        assert_eq!(counts[counts.len() / 2], 12, "seed {seed}: {counts:?}");
    }
}
