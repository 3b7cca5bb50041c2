//! Multiple-origin / multiple-destination (MOMD) shortest paths on spatial graphs.
//!
//! The crate collapses an origin region and a destination region into two
//! super-vertices and answers the query with a single A* search, and ships the
//! exhaustive all-pairs baseline that the collapse strategy is measured against.
//! Around that core sit the pieces needed to run the experiment end to end:
//! OSM ingestion and cleaning, synthetic topology generators, complex-network
//! metrics and a multi-worker batch harness.
//!
//! Everything numeric is generic over [`Scalar`] (`f32` or `f64`); the aliases
//! at the bottom of this file pin the common `f64` instantiation.

pub mod coarsen;
pub mod geo;
pub mod graph;
pub mod harness;
pub mod ingest;
pub mod netmetrics;
pub mod scalar;
pub mod search;
pub mod strategy;
pub mod synth;

pub use coarsen::{
    build_region, collapse, recover_endpoints, select_center, uncollapse, BoundaryEdge,
    CollapseMap, CollapsedGraph, CoarsenError, Region, RegionMetric,
};
pub use geo::{euclidean, haversine, GeoError, GeoPoint, Metric, PlanarPoint, EARTH_RADIUS_M};
pub use graph::{
    connected_components, degree, giant_component, ComponentLabeling, Graph, GraphBuilder,
    GraphError, GraphView, VertexId,
};
pub use scalar::Scalar;
pub use search::{
    astar, dijkstra, floyd_warshall_region, Heuristic, ReopenPolicy, SearchError, SearchNode,
    SearchResult, SearchStatus, Searcher, StraightLine, ZeroHeuristic,
};
pub use strategy::{
    compare, run_brute_force, run_collapse, Comparison, ComparisonRecord, ComparisonSummary,
    MomdQuery, MomdResult, StrategyError, StrategyKind,
};

/// Double-precision graph, the instantiation used by the CLI and file formats.
pub type Graph64 = Graph<f64>;
/// Single-precision graph.
pub type Graph32 = Graph<f32>;
pub type SearchResult64 = SearchResult<f64>;
pub type MomdResult64 = MomdResult<f64>;
pub type Region64 = Region<f64>;
pub type CollapseMap64 = CollapseMap<f64>;
