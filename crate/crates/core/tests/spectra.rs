use gsqc::spectra::{
    dense_eigenvalues, extremal_eigs, gap_bound_1d, gap_scan, lowest_by_blocks, parse_grid, GapSolver, SpectralOptions,
};
use gsqc::{build_1d_circuit, SparseOperator, C64};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Random sparse Hermitian operator made of `blocks` disconnected chains.
fn random_hermitian(dim: usize, blocks: usize, seed: u64) -> SparseOperator {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut t = Vec::new();
    for i in 0..dim {
        t.push((i, i, C64::new(rng.gen_range(-2.0..2.0), 0.0)));
        for j in [i + 1, i + 3] {
            if j < dim && i % blocks == j % blocks {
                let z = C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                t.push((i, j, z));
                t.push((j, i, z.conj()));
            }
        }
    }
    SparseOperator::from_triplets(dim, t)
}

#[test]
fn closed_form_gap_bound() {
    // 𝓔/((12M(N+2M−4)+1)(4(N+4M−4)+1)(2N)) at M=3, N=17
    let b = gap_bound_1d(3, 17).unwrap();
    assert!((b - 1.0 / 2_352_290.0).abs() < 1e-22);
    assert!(gap_bound_1d(3, 16).is_err() || gap_bound_1d(2, 17).is_err());
}

#[test]
fn grid_parsing() {
    let g = parse_grid("0:1:11").unwrap();
    assert_eq!(g.len(), 11);
    assert_eq!(g[0], 0.0);
    assert_eq!(g[10], 1.0);
    assert!((g[3] - 0.3).abs() < 1e-15);
    assert_eq!(parse_grid("0.5:0.5:1").unwrap(), vec![0.5]);
    for bad in ["0:1", "1:0:3", "0:2:3", "a:b:c", "0:1:0"] {
        assert!(parse_grid(bad).is_err(), "{bad}");
    }
}

#[test]
fn lanczos_matches_dense_above_threshold() {
    let op = random_hermitian(1100, 1, 9);
    let dense = dense_eigenvalues(&op);
    let lz = extremal_eigs(&op, 4, 1e-10).unwrap();
    for (p, d) in lz.iter().zip(&dense) {
        assert!((p.value - d).abs() < 1e-8, "{} vs {d}", p.value);
        let r: Vec<C64> = op.apply(&p.vector).iter().zip(&p.vector).map(|(a, b)| a - b * p.value).collect();
        assert!(gsqc::sparse::norm(&r) < 1e-8);
    }
}

#[test]
fn degenerate_copies_are_found() {
    // two identical disconnected blocks: every eigenvalue appears twice
    let a = random_hermitian(560, 1, 3);
    let mut t: Vec<_> = a.triplets().collect();
    t.extend(a.triplets().map(|(r, c, v)| (r + 560, c + 560, v)));
    let op = SparseOperator::from_triplets(1120, t);
    let lz = extremal_eigs(&op, 4, 1e-10).unwrap();
    assert!((lz[0].value - lz[1].value).abs() < 1e-8);
    assert!((lz[2].value - lz[3].value).abs() < 1e-8);
    assert!(lz[1].value < lz[2].value - 1e-6);
}

#[test]
fn gap_on_generated_circuit() {
    let c = build_1d_circuit(3, 2, &[]).unwrap();
    let mut s = GapSolver::new(&c, SpectralOptions::default()).unwrap();
    for l in [0.0, 0.5, 1.0] {
        let (e0, e1, g) = s.gap(l).unwrap();
        assert!(e0.abs() < 1e-10);
        assert!(e1 > 1e-6);
        assert!((g - (e1 - e0)).abs() < 1e-15);
    }
    // the reduced e1 at λ = 1 is the Laplacian gap of the time-valid configuration graph
    let (e1, kernel) = s.e1(1.0).unwrap();
    assert!((e1 - 0.0121256657760).abs() < 1e-10);
    // without the entry hop the rest site decouples: two zero modes
    assert_eq!(kernel, 2);
}

#[test]
fn gap_scan_is_uniformly_above_bounds() {
    let c = build_1d_circuit(3, 2, &[]).unwrap();
    let scan = gap_scan(&c, &parse_grid("0:1:11").unwrap(), SpectralOptions::default()).unwrap();
    let closed = gap_bound_1d(3, 17).unwrap();
    assert!(scan.min_gap() >= scan.occupation_bound() - 1e-12);
    assert!(scan.occupation_bound() >= closed);
    for r in &scan.rows {
        assert!(r.e0.abs() < 1e-10);
        assert!(r.occupation >= 1.0 / 17.0);
        assert_eq!(r.bound_thm4, Some(closed));
    }
    // the per-point inequality fails where the active rail's reduced operator has e1 = 1
    let r0 = &scan.rows[0];
    assert!((r0.e1_thm3 - 1.0).abs() < 1e-9);
    assert!(r0.gap < r0.bound_thm3);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn blocks_agree_with_dense(dim in 4usize..200, blocks in 1usize..5, seed in any::<u64>()) {
        let op = random_hermitian(dim, blocks, seed);
        let floors = vec![f64::NEG_INFINITY; dim];
        let k = 3.min(dim);
        let by_blocks = lowest_by_blocks(&op, &floors, k, 1e-12, false).unwrap();
        let dense = dense_eigenvalues(&op);
        for (p, d) in by_blocks.iter().zip(&dense) {
            prop_assert!((p.value - d).abs() < 1e-9);
        }
    }

    #[test]
    fn dense_eigenvalues_sorted_and_trace_preserving(dim in 1usize..60, seed in any::<u64>()) {
        let op = random_hermitian(dim, 1, seed);
        let ev = dense_eigenvalues(&op);
        prop_assert!(ev.windows(2).all(|w| w[0] <= w[1]));
        let trace: f64 = op.diagonal().iter().sum();
        prop_assert!((ev.iter().sum::<f64>() - trace).abs() < 1e-9);
    }
}
