//! Property tests across the codec, file formats and stratification layers.

use proptest::prelude::*;

use dbtile::graphs::{GraphKind, HostGraph, LatinSquare, Projection, SizeSpec};
use dbtile::stratification::{
    self, max_loop_height, max_loop_height_exhaustive, read_tile, stratify, write_tile,
};
use dbtile::tilesearch::{greedy_tile, score_tile, GreedyOptions};

fn arb_host() -> impl Strategy<Value = HostGraph> {
    let kind = prop_oneof![
        Just(GraphKind::DeBruijn),
        Just(GraphKind::Kautz),
        Just(GraphKind::GeneralizedDeBruijn),
        Just(GraphKind::GeneralizedKautz),
    ];
    (kind, 2u32..=4, 0u32..=4, 1u64..=12).prop_filter_map(
        "valid host parameters",
        |(kind, k, n, f)| {
            let v = f * (k as u64).pow(n);
            HostGraph::build(kind, k, SizeSpec::Vertices(v)).ok()
        },
    )
}

proptest! {
    #[test]
    fn codec_round_trip(host in arb_host()) {
        for v in 0..host.vertices() {
            let code = host.encode(v).unwrap();
            prop_assert_eq!(host.decode(&code).unwrap(), v);
        }
    }

    #[test]
    fn degree_regular(host in arb_host()) {
        for v in 0..host.vertices() {
            prop_assert_eq!(host.children(v).len(), host.degree() as usize);
            prop_assert_eq!(host.parents(v).len(), host.degree() as usize);
        }
    }

    #[test]
    fn projection_preserves_edges(host in arb_host(), m in 1u32..=2) {
        prop_assume!(host.exponent() >= m && host.vertices() <= 4096);
        let latin = LatinSquare::difference(host.degree());
        let p = Projection::new(host, m, latin).unwrap();
        let tile = HostGraph::debruijn(host.degree(), m).unwrap();
        for u in 0..host.vertices() {
            let pu = p.project_index(u) as u64;
            for v in host.children(u) {
                let pv = p.project_index(v) as u64;
                prop_assert!(tile.children(pu).contains(&pv));
            }
        }
    }
}

/// Random stratified graph: levels first, then only level-respecting edges.
fn arb_stratified() -> impl Strategy<Value = (usize, Vec<u32>, Vec<(usize, usize)>)> {
    (2usize..=12)
        .prop_flat_map(|n| {
            (
                Just(n),
                proptest::collection::vec(0u32..6, n),
                proptest::collection::vec((0..n, 0..n), 0..=20),
            )
        })
        .prop_map(|(n, levels, pairs)| {
            let edges: Vec<(usize, usize)> = pairs
                .into_iter()
                .filter(|&(u, v)| u != v && levels[u] == levels[v] + 1)
                .collect();
            (n, levels, edges)
        })
}

proptest! {
    #[test]
    fn stratify_accepts_consistent_graphs((n, _levels, edges) in arb_stratified()) {
        prop_assert!(stratify(n, &edges).is_ok());
    }

    #[test]
    fn block_height_matches_exhaustive((n, levels, edges) in arb_stratified()) {
        prop_assert_eq!(
            max_loop_height(n, &edges, &levels),
            max_loop_height_exhaustive(n, &edges, &levels)
        );
    }

    #[test]
    fn stratified_loops_are_balanced((n, _levels, edges) in arb_stratified()) {
        for t in stratification::enumerate_loops(n, &edges) {
            let (f, b) = t.balance();
            prop_assert_eq!(f, b);
        }
    }

    #[test]
    fn unstratifiable_witness_is_unbalanced_and_real(
        n in 2usize..=10,
        pairs in proptest::collection::vec((0usize..10, 0usize..10), 1..=18)
    ) {
        let edges: Vec<(usize, usize)> =
            pairs.into_iter().map(|(u, v)| (u % n, v % n)).collect();
        if let Err(witness) = stratify(n, &edges) {
            let (f, b) = witness.balance();
            prop_assert_ne!(f, b);
            prop_assert!(witness.is_valid_in(n, &edges));
        }
    }

    #[test]
    fn tile_file_round_trips(k in 2u32..=3, m in 1u32..=3, seed in any::<u64>()) {
        let tile = greedy_tile(k, m, &GreedyOptions { seed, restarts: 2 });
        let mut buf = Vec::new();
        write_tile(&mut buf, &tile).unwrap();
        let back = read_tile(&buf[..]).unwrap();
        prop_assert_eq!(back.edges(), tile.edges());

        // and the emitted bytes are stable
        let mut buf2 = Vec::new();
        write_tile(&mut buf2, &back).unwrap();
        prop_assert_eq!(buf, buf2);
    }

    #[test]
    fn score_tile_accounting(k in 2u32..=5, m in 1u32..=4) {
        let tile = score_tile(k, m);
        prop_assert_eq!(tile.edge_count() + tile.broken_count(), tile.edge_capacity());
        prop_assert!(tile.validate().certified);
    }
}
