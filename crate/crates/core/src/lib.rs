//! Toolkit for building de Bruijn and Kautz interconnect topologies from
//! identical modular tiles.
//!
//! The crate covers the full pipeline used when wiring a large machine out of
//! identical boards:
//!
//! * [`graphs`] — the four host-graph families (de Bruijn, Kautz and their
//!   generalized arithmetic forms), vertex codecs and the projection
//!   homomorphisms onto small de Bruijn graphs.
//! * [`stratification`] — level assignments, loop witnesses and the
//!   validity predicates a tile must satisfy to scale.
//! * [`tilesearch`] — tile generators (expansion-score construction, exact
//!   branch-and-bound, randomized greedy) plus the broken-edge lower bound.
//! * [`tiling`] — assembling and verifying a complete tiling of a host graph
//!   and exporting board/cable netlists.
//! * [`asymptotics`] — exact and Monte Carlo analysis of the idealized
//!   broken-edge model and table/series generation.

pub mod asymptotics;
pub mod graphs;
pub mod stratification;
pub mod tilesearch;
pub mod tiling;

pub use graphs::{GraphKind, HostGraph, LatinSquare, Projection, SizeSpec};
pub use stratification::{Stratification, TileGraph, TileReport};
pub use tilesearch::{BoundReport, ExactOptions, GreedyOptions, SearchStatus};
pub use tiling::{build_tiling, verify_tiling, Tiling, TilingReport};
