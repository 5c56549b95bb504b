//! Property tests for the structural invariants: parser round trips,
//! induced-subgraph monotonicity, matrix/simulation coherence, decode
//! round trips, and the collision detector against a naive comparison.

use proptest::prelude::*;

use pooltest::design::{
    build_matrix, decode, find_collisions, sample_pools, simulate_outcomes, SeparationMatrix,
};
use pooltest::enumerate::{enumerate_occurrences, DEFAULT_OCCURRENCE_CAP};
use pooltest::graph::{parse_edge_list, Graph, VertexSet};

fn arb_graph() -> impl Strategy<Value = Graph> {
    (2usize..10).prop_flat_map(|n| {
        proptest::collection::vec((0..n as u32, 0..n as u32), 0..20)
            .prop_map(move |pairs| {
                let edges: Vec<(u32, u32)> =
                    pairs.into_iter().filter(|&(u, v)| u != v).collect();
                Graph::new(n, &edges).unwrap()
            })
    })
}

fn arb_subset(n: usize) -> impl Strategy<Value = VertexSet> {
    proptest::collection::vec(any::<bool>(), n).prop_map(move |bits| {
        VertexSet::from_iter(
            n,
            bits.iter()
                .enumerate()
                .filter(|(_, &b)| b)
                .map(|(v, _)| v as u32),
        )
    })
}

proptest! {
    #[test]
    fn parse_serialize_round_trip(g in arb_graph()) {
        let text = g.to_edge_list();
        let back = parse_edge_list(&text).unwrap();
        prop_assert_eq!(g, back);
    }

    #[test]
    fn induced_edges_monotone(g in arb_graph(), pair in (2usize..10).prop_flat_map(|n| (arb_subset(n), arb_subset(n)))) {
        let (a, b) = pair;
        if a.capacity() != g.vertex_count() {
            return Ok(());
        }
        let small = a.intersection(&b);
        let small_edges = g.induced_edges(&small);
        let big_edges = g.induced_edges(&a);
        for e in &small_edges {
            prop_assert!(big_edges.contains(e));
        }
        // full set and empty set endpoints
        prop_assert_eq!(g.induced_edges(&VertexSet::full(g.vertex_count())).len(), g.edge_count());
        prop_assert!(g.induced_edges(&VertexSet::empty(g.vertex_count())).is_empty());
    }

    #[test]
    fn matrix_columns_match_simulation(seed in any::<u64>(), p in 0.05f64..0.95) {
        let host = parse_edge_list("0 1\n1 2\n2 3\n3 4\n4 0\n0 2").unwrap();
        let pattern = parse_edge_list("0 1").unwrap();
        let occ = enumerate_occurrences(&host, &pattern, DEFAULT_OCCURRENCE_CAP).unwrap();
        let pools = sample_pools(&host, p, 12, seed);
        let matrix = build_matrix(&host, &pools, &occ);
        for (j, defective) in occ.iter().enumerate() {
            let outcomes = simulate_outcomes(&host, &pools, defective);
            for (l, &bit) in outcomes.iter().enumerate() {
                prop_assert_eq!(matrix.get(l, j), bit);
            }
        }
    }

    #[test]
    fn separating_designs_decode_their_plant(seed in any::<u64>()) {
        let host = parse_edge_list("0 1\n1 2\n2 3\n3 0\n0 2\n1 3").unwrap(); // K4
        let pattern = parse_edge_list("0 1").unwrap();
        let occ = enumerate_occurrences(&host, &pattern, DEFAULT_OCCURRENCE_CAP).unwrap();
        let pools = sample_pools(&host, 0.5, 25, seed);
        let matrix = build_matrix(&host, &pools, &occ);
        if find_collisions(&matrix).is_empty() {
            for (j, defective) in occ.iter().enumerate() {
                let res = decode(&matrix, &simulate_outcomes(&host, &pools, defective)).unwrap();
                prop_assert!(res.unique);
                prop_assert_eq!(&res.consistent, &vec![j]);
            }
        }
    }

    #[test]
    fn collision_detector_matches_naive(seed in any::<u64>(), t in 0usize..8, p in 0.1f64..0.9) {
        let host = parse_edge_list("0 1\n1 2\n2 3\n3 4\n4 5\n5 0\n0 3").unwrap();
        let pattern = parse_edge_list("0 1\n1 2").unwrap();
        let occ = enumerate_occurrences(&host, &pattern, DEFAULT_OCCURRENCE_CAP).unwrap();
        let pools = sample_pools(&host, p, t, seed);
        let matrix = build_matrix(&host, &pools, &occ);
        let fast = find_collisions(&matrix);
        let naive = naive_collisions(&matrix);
        prop_assert_eq!(fast, naive);
    }

    #[test]
    fn enumerated_occurrences_are_isomorphic_copies(n in 3usize..7) {
        let mut edges = Vec::new();
        for u in 0..n as u32 {
            for v in u + 1..n as u32 {
                edges.push((u, v));
            }
        }
        let host = Graph::new(n, &edges).unwrap();
        let pattern = parse_edge_list("0 1\n1 2").unwrap();
        let occ = enumerate_occurrences(&host, &pattern, DEFAULT_OCCURRENCE_CAP).unwrap();
        for o in &occ {
            // A P3 copy: exactly 2 edges sharing exactly one vertex.
            prop_assert_eq!(o.edge_count(), 2);
            prop_assert_eq!(o.vertices().len(), 3);
        }
        // No duplicates.
        let mut sets: Vec<_> = occ.iter().map(|o| o.edges().to_vec()).collect();
        sets.dedup();
        prop_assert_eq!(sets.len(), occ.len());
    }
}

fn naive_collisions(c: &SeparationMatrix) -> Vec<(usize, usize)> {
    let mut pairs = Vec::new();
    for i in 0..c.cols() {
        for j in i + 1..c.cols() {
            if (0..c.rows()).all(|l| c.get(l, i) == c.get(l, j)) {
                pairs.push((i, j));
            }
        }
    }
    pairs
}
