use std::time::{Duration, Instant};
use dbtile::tilesearch::{exact_optimal_tile, ExactOptions, SearchStatus};

fn main() {
    for (k, m) in [(2u32, 4u32), (4, 2)] {
        let opts = ExactOptions {
            level_range: None,
            budget: Duration::from_secs(600),
            max_cells: 32,
        };
        let t0 = Instant::now();
        let (tile, status) = exact_optimal_tile(k, m, &opts).unwrap();
        println!(
            "exact({k},{m}): edges={} status={:?} elapsed={:.2?}",
            tile.edge_count(),
            status,
            t0.elapsed()
        );
        assert_eq!(status, SearchStatus::ProvedOptimal);
    }
}
