use std::collections::{BTreeMap, HashMap};

use proptest::prelude::*;

use longrange::breakpoint::{delta_hat, delta_hat_between, BreakpointGraph};
use longrange::estimator::isotonic_fit;
use longrange::graph::{bfs_component_labels, GraphState};
use longrange::reversal::SignedPermutation;
use longrange::theory::{invert_u, u_of_c, SeriesParams};
use longrange::transposition::{run_coupled, PermutationState};
use longrange::DistanceDistribution;

fn permutation(n: usize) -> impl Strategy<Value = Vec<usize>> {
    Just((0..n).collect::<Vec<_>>()).prop_shuffle()
}

fn signed_permutation(max_n: usize) -> impl Strategy<Value = SignedPermutation> {
    (1..=max_n).prop_flat_map(signed_permutation_of)
}

/// Applies the gene relabelling `g -> map[g - 1]` (signs kept).
fn relabel(sp: &SignedPermutation, map: &[usize]) -> SignedPermutation {
    let entries = sp
        .entries()
        .iter()
        .map(|&x| x.signum() * (map[x.unsigned_abs() as usize - 1] as i32 + 1))
        .collect();
    SignedPermutation::new(entries).unwrap()
}

fn partition_of(labels: &[usize]) -> Vec<usize> {
    let mut first: HashMap<usize, usize> = HashMap::new();
    labels
        .iter()
        .map(|&l| {
            let next = first.len();
            *first.entry(l).or_insert(next)
        })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn union_find_matches_bfs(
        n in 2usize..60,
        raw in proptest::collection::vec((0usize..60, 0usize..60), 0..120),
    ) {
        let edges: Vec<(usize, usize)> = raw
            .into_iter()
            .map(|(a, b)| (a % n, b % n))
            .filter(|(a, b)| a != b)
            .collect();
        let mut g = GraphState::from_edges(n, &edges);
        let bfs = bfs_component_labels(n, edges.iter().copied());
        let uf: Vec<usize> = (0..n).map(|v| g.component_root(v)).collect();
        prop_assert_eq!(partition_of(&uf), partition_of(&bfs));
        let mut sizes: BTreeMap<usize, usize> = BTreeMap::new();
        for s in g.component_sizes() {
            *sizes.entry(s).or_default() += 1;
        }
        let mut bfs_sizes: HashMap<usize, usize> = HashMap::new();
        for l in &bfs {
            *bfs_sizes.entry(*l).or_default() += 1;
        }
        let mut expect: BTreeMap<usize, usize> = BTreeMap::new();
        for s in bfs_sizes.values() {
            *expect.entry(*s).or_default() += 1;
        }
        prop_assert_eq!(sizes, expect);
        prop_assert_eq!(g.components(), bfs_sizes.len());
    }

    #[test]
    fn delta_hat_is_bounded_and_zero_only_at_identity(sp in signed_permutation(9)) {
        let d = delta_hat(&sp);
        prop_assert!(d <= sp.n() + 1);
        prop_assert_eq!(d == 0, sp.is_identity());
        prop_assert!(BreakpointGraph::new(&sp).check_degrees().is_ok());
    }

    #[test]
    fn delta_hat_is_relabelling_invariant(
        (a, b, map) in (1usize..12).prop_flat_map(|n| (
            signed_permutation_of(n),
            signed_permutation_of(n),
            permutation(n),
        ))
    ) {
        let before = delta_hat_between(&a, &b).unwrap();
        let after = delta_hat_between(&relabel(&a, &map), &relabel(&b, &map)).unwrap();
        prop_assert_eq!(before, after);
        prop_assert_eq!(delta_hat_between(&a, &a).unwrap(), 0);
    }

    #[test]
    fn one_reversal_moves_delta_hat_by_at_most_one(
        sp in signed_permutation(12),
        start in 0usize..12,
        len in 1usize..12,
    ) {
        let n = sp.n();
        let start = start % n;
        let len = 1 + (len - 1) % (n - start);
        let next = sp.reversed(start, len).unwrap();
        let (d0, d1) = (delta_hat(&sp) as i64, delta_hat(&next) as i64);
        prop_assert!((d0 - d1).abs() <= 1);
    }

    #[test]
    fn transposition_bookkeeping(
        n in 2usize..40,
        pairs in proptest::collection::vec((0usize..40, 0usize..40), 0..200),
    ) {
        let mut s = PermutationState::identity(n);
        for (i, j) in pairs {
            let (i, j) = (i % n, j % n);
            if i == j {
                continue;
            }
            s.apply_transposition(i, j).unwrap();
            prop_assert_eq!(s.delta() as i64, s.events() as i64 - 2 * s.fragmentations() as i64);
        }
        prop_assert!(s.verify().is_ok());
    }

    #[test]
    fn coupling_never_violates_refinement(seed in any::<u64>(), l in 1usize..10) {
        let dist = DistanceDistribution::uniform(l, 20).unwrap();
        let run = run_coupled(&dist, 40.0, seed, 1).unwrap();
        prop_assert!(run.violations.is_empty(), "{:?}", run.violations);
        for &(_, cycles, k) in &run.checkpoints {
            prop_assert!(k <= cycles);
        }
    }

    #[test]
    fn isotonic_fit_is_monotone_and_mean_preserving(
        ys in proptest::collection::vec(-1.0f64..1.0, 1..50),
    ) {
        let fit = isotonic_fit(&ys);
        prop_assert!(fit.windows(2).all(|w| w[0] <= w[1] + 1e-12));
        let s0: f64 = ys.iter().sum();
        let s1: f64 = fit.iter().sum();
        prop_assert!((s0 - s1).abs() < 1e-9);
        let again = isotonic_fit(&fit);
        for (x, y) in fit.iter().zip(&again) {
            prop_assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn invert_u_inverts_u(c in 0.05f64..10.0) {
        let u = u_of_c(c, SeriesParams::default()).unwrap().value;
        prop_assume!(u < 0.99999);
        let back = invert_u(u, 1e-12).unwrap();
        let u_back = u_of_c(back, SeriesParams::default()).unwrap().value;
        prop_assert!((u_back - u).abs() < 1e-9, "c = {c}, back = {back}");
    }

    #[test]
    fn sampled_pairs_respect_the_range(seed in any::<u64>(), l in 1usize..25) {
        use longrange::distribution::cyclic_distance;
        let dist = DistanceDistribution::uniform(l, 50).unwrap();
        let mut rng = longrange::replicas::rng_from_seed(seed);
        for _ in 0..200 {
            let (a, b) = dist.sample_pair(&mut rng);
            let d = cyclic_distance(a, b, 50);
            prop_assert!(d >= 1 && d <= l);
        }
    }
}

fn signed_permutation_of(n: usize) -> impl Strategy<Value = SignedPermutation> {
    (permutation(n), proptest::collection::vec(any::<bool>(), n)).prop_map(|(p, signs)| {
        let entries = p
            .iter()
            .zip(&signs)
            .map(|(&g, &neg)| if neg { -(g as i32 + 1) } else { g as i32 + 1 })
            .collect();
        SignedPermutation::new(entries).unwrap()
    })
}
