mod common;

use folocal::covers::{
    bfs_layer_cover, exceeds_growth_threshold, kernels, peleg_cover, validate_cover, Cover,
    CoverKind,
};
use folocal::gaifman::GaifmanGraph;
use num::{BigInt, BigRational};
use proptest::prelude::*;
use rand::Rng;

fn brute_kernel(g: &GaifmanGraph, piece: &[usize], r: usize) -> Vec<usize> {
    piece
        .iter()
        .copied()
        .filter(|&a| {
            g.neighborhood(a, r)
                .unwrap()
                .iter()
                .all(|b| piece.binary_search(b).is_ok())
        })
        .collect()
}

fn check_kernels(g: &GaifmanGraph, cover: &Cover) {
    let with = kernels(g, cover, cover.radius()).unwrap();
    let ks = with.kernels().unwrap();
    let mut covered = vec![false; g.len()];
    for (piece, k) in with.pieces().iter().zip(ks) {
        assert_eq!(k, &brute_kernel(g, piece, cover.radius()));
        for &a in k {
            covered[a] = true;
        }
    }
    if validate_cover(g, cover).is_valid() {
        assert!(covered.iter().all(|&c| c));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(150))]

    #[test]
    fn peleg_cover_properties(seed in any::<u64>(), r in 1usize..=2, k in 1u32..=3) {
        let mut rng = common::rng(seed);
        let s = common::corpus_structure(&mut rng, 60);
        let g = s.gaifman_graph();
        let n = g.len();
        let cover = peleg_cover(&g, r, k).unwrap();
        prop_assert_eq!(cover.kind(), CoverKind::Neighborhood { r, s: 2 * k as usize * r });
        let report = validate_cover(&g, &cover);
        prop_assert!(report.is_valid(), "{:?}", report);
        let total = cover.stats().total_size as u128;
        prop_assert!(total.pow(k) <= (n as u128).pow(k + 1));
        let trace = cover.trace().unwrap();
        prop_assert!(trace.iterations.iter().all(|&i| 1 <= i && i <= k as usize));
        let mut owner = vec![None; n];
        for (i, core) in trace.cores.iter().enumerate() {
            for &a in core {
                prop_assert_eq!(owner[a], None, "cores {:?} and {} overlap", owner[a], i);
                owner[a] = Some(i);
            }
        }
        check_kernels(&g, &cover);
    }

    #[test]
    fn bfs_layer_properties(seed in any::<u64>(), r in 0usize..=3) {
        let mut rng = common::rng(seed);
        let s = common::corpus_structure(&mut rng, 60);
        let g = s.gaifman_graph();
        let n = g.len();
        let cover = bfs_layer_cover(&g, r);
        let report = validate_cover(&g, &cover);
        prop_assert!(report.property1_failures.is_empty());
        prop_assert_eq!(report.piece_widths.as_ref().map(Vec::len), Some(cover.pieces().len()));
        prop_assert!(cover.stats().total_size <= (2 * r + 1) * n);
        let mut count = vec![0usize; n];
        for p in cover.pieces() {
            prop_assert!(!p.is_empty());
            for &a in p {
                count[a] += 1;
            }
        }
        prop_assert!(count.iter().all(|&c| 1 <= c && c <= 2 * r + 1));
        check_kernels(&g, &cover);
    }

    #[test]
    fn kernels_of_random_pieces(seed in any::<u64>(), r in 0usize..=3) {
        let mut rng = common::rng(seed);
        let s = common::corpus_structure(&mut rng, 40);
        let g = s.gaifman_graph();
        let n = g.len();
        let pieces: Vec<Vec<usize>> = (0..rng.gen_range(1..6))
            .map(|_| {
                let mut p: Vec<usize> = (0..n).filter(|_| rng.gen_bool(0.6)).collect();
                if p.is_empty() {
                    p.push(rng.gen_range(0..n));
                }
                p
            })
            .collect();
        let cover = Cover::from_pieces(CoverKind::Tree { r, width_bound: None }, pieces, n).unwrap();
        check_kernels(&g, &cover);
    }

    #[test]
    fn threshold_matches_rational_arithmetic(
        big in 0usize..=10_000,
        small in 0usize..=10_000,
        n in 1usize..=10_000,
        k in 1u32..=4,
    ) {
        // big > n^(1/k) * small  <=>  (big / small)^k > n  for small > 0
        let expected = if small == 0 {
            big > 0
        } else {
            let ratio = BigRational::new(BigInt::from(big), BigInt::from(small));
            num::pow(ratio, k as usize) > BigRational::from_integer(BigInt::from(n))
        };
        prop_assert_eq!(exceeds_growth_threshold(big, small, n, k), expected);
        // and against a floating-point evaluation away from the boundary
        let lhs = big as f64;
        let rhs = (n as f64).powf(1.0 / k as f64) * small as f64;
        if (lhs - rhs).abs() > 1e-6 * rhs.max(1.0) {
            prop_assert_eq!(exceeds_growth_threshold(big, small, n, k), lhs > rhs);
        }
    }
}

#[test]
fn grid_covers() {
    for side in [8usize, 16, 32] {
        let g = folocal::generate::grid(side, side).gaifman_graph();
        let n = g.len();
        for r in 1..=2 {
            for k in 1..=3u32 {
                let cover = peleg_cover(&g, r, k).unwrap();
                assert!(validate_cover(&g, &cover).is_valid());
                let total = cover.stats().total_size as u128;
                assert!(total.pow(k) <= (n as u128).pow(k + 1));
            }
            let layers = bfs_layer_cover(&g, r);
            assert!(validate_cover(&g, &layers).is_valid());
            assert!(layers.stats().total_size <= (2 * r + 1) * n);
        }
    }
}
