//! The two MOMD strategies and their per-query comparison.
//!
//! Collapse contracts both regions and runs a single A* between the two
//! super-vertices; brute force runs A* for every member pair and keeps the
//! cheapest. Comparing them gives the collapse strategy's error.

use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use thiserror::Error;

use crate::coarsen::{build_region, collapse, direct_link, recover_endpoints, CoarsenError, Region};
use crate::graph::{GraphView, VertexId};
use crate::harness::partition_work;
use crate::scalar::Scalar;
use crate::search::{ReopenPolicy, SearchError, SearchResult, SearchStatus, Searcher, StraightLine};

/// Distances closer than this are treated as equal when judging optimality.
pub const OPTIMALITY_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StrategyError {
    #[error(transparent)]
    Coarsen(#[from] CoarsenError),
    #[error(transparent)]
    Search(#[from] SearchError),
    #[error("collapsed path edge {0} -> {1} has no counterpart in the original graph")]
    BrokenPath(VertexId, VertexId),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum StrategyKind {
    Collapse,
    BruteForce,
}

impl StrategyKind {
    pub const ALL: [StrategyKind; 2] = [StrategyKind::Collapse, StrategyKind::BruteForce];

    pub fn as_str(self) -> &'static str {
        match self {
            StrategyKind::Collapse => "collapse",
            StrategyKind::BruteForce => "brute_force",
        }
    }
}

impl fmt::Display for StrategyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for StrategyKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "collapse" => Ok(StrategyKind::Collapse),
            "brute_force" | "brute-force" => Ok(StrategyKind::BruteForce),
            other => Err(format!("unknown strategy `{other}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomdQuery<T> {
    pub origin_seed: VertexId,
    pub destination_seed: VertexId,
    pub radius: T,
}

impl<T: Scalar> MomdQuery<T> {
    pub fn new(origin_seed: VertexId, destination_seed: VertexId, radius: T) -> Self {
        Self {
            origin_seed,
            destination_seed,
            radius,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MomdResult<T> {
    pub strategy: StrategyKind,
    /// Path runs from the chosen origin member to the chosen destination
    /// member over original vertex ids. `elapsed` covers the whole call.
    pub search: SearchResult<T>,
    pub searches_executed: usize,
    /// `|members_o| + |members_d|` for collapse, 0 for brute force.
    pub collapsed_node_count: usize,
    pub origin_members: usize,
    pub destination_members: usize,
}

impl<T: Scalar> MomdResult<T> {
    pub fn origin(&self) -> Option<VertexId> {
        self.search.path.first().copied()
    }

    pub fn destination(&self) -> Option<VertexId> {
        self.search.path.last().copied()
    }
}

/// Runs both strategies while reusing search buffers across queries.
#[derive(Debug, Default)]
pub struct StrategyRunner<T> {
    searcher: Searcher<T>,
}

impl<T: Scalar> StrategyRunner<T> {
    pub fn new() -> Self {
        Self { searcher: Searcher::new() }
    }

    pub fn run(&mut self, g: &impl GraphView<T>, kind: StrategyKind, q: &MomdQuery<T>) -> Result<MomdResult<T>, StrategyError> {
        match kind {
            StrategyKind::Collapse => self.collapse(g, q),
            StrategyKind::BruteForce => self.brute_force(g, q),
        }
    }

    fn regions<G: GraphView<T>>(g: &G, q: &MomdQuery<T>) -> Result<(Region<T>, Region<T>), StrategyError> {
        Ok((
            build_region(g, q.origin_seed, q.radius)?,
            build_region(g, q.destination_seed, q.radius)?,
        ))
    }

    pub fn collapse<G: GraphView<T>>(&mut self, g: &G, q: &MomdQuery<T>) -> Result<MomdResult<T>, StrategyError> {
        let started = Instant::now();
        let (ro, rd) = Self::regions(g, q)?;
        let mut result = MomdResult {
            strategy: StrategyKind::Collapse,
            search: SearchResult::unreachable(0, Duration::ZERO),
            searches_executed: 1,
            collapsed_node_count: ro.len() + rd.len(),
            origin_members: ro.len(),
            destination_members: rd.len(),
        };

        if let Some(shared) = ro.first_shared(&rd) {
            // origin and destination can be served by the same vertex
            result.search = SearchResult {
                status: SearchStatus::Degenerate,
                path: vec![shared],
                hops: 0,
                expansions: 0,
                elapsed: started.elapsed(),
                distance: T::zero(),
            };
            return Ok(result);
        }

        let (view_o, map_o) = collapse(g, &ro)?;
        let (view, map_d) = collapse(&view_o, &rd)?;
        let heuristic = StraightLine::new(&view, map_d.super_id);
        let found = self
            .searcher
            .astar(&view, map_o.super_id, map_d.super_id, &heuristic, ReopenPolicy::OnImprovement)?;
        if !found.is_found() {
            result.search = SearchResult::unreachable(found.expansions, started.elapsed());
            return Ok(result);
        }

        let path = if found.path.len() == 2 {
            let (o, d, _) = direct_link(&map_o, &map_d).ok_or(CoarsenError::DegeneratePath("no edge joins the regions"))?;
            vec![o, d]
        } else {
            let (o, d) = recover_endpoints(&map_o, &map_d, &found.path)?;
            let mut path = Vec::with_capacity(found.path.len());
            path.push(o);
            path.extend_from_slice(&found.path[1..found.path.len() - 1]);
            path.push(d);
            path
        };
        let distance = measure(g, &path)?;
        result.search = SearchResult {
            status: SearchStatus::Found,
            hops: path.len() - 1,
            path,
            expansions: found.expansions,
            elapsed: started.elapsed(),
            distance,
        };
        Ok(result)
    }

    pub fn brute_force<G: GraphView<T>>(&mut self, g: &G, q: &MomdQuery<T>) -> Result<MomdResult<T>, StrategyError> {
        let started = Instant::now();
        let (ro, rd) = Self::regions(g, q)?;
        let mut best: Option<SearchResult<T>> = None;
        let mut expansions = 0;
        for &o in &ro.members {
            for &d in &rd.members {
                let heuristic = StraightLine::new(g, d);
                let r = self.searcher.astar(g, o, d, &heuristic, ReopenPolicy::Never)?;
                expansions += r.expansions;
                if r.is_found() && best.as_ref().is_none_or(|b| r.distance < b.distance) {
                    best = Some(r);
                }
            }
        }
        let mut search = best.unwrap_or_else(|| SearchResult::unreachable(0, Duration::ZERO));
        search.expansions = expansions;
        search.elapsed = started.elapsed();
        Ok(MomdResult {
            strategy: StrategyKind::BruteForce,
            search,
            searches_executed: ro.len() * rd.len(),
            collapsed_node_count: 0,
            origin_members: ro.len(),
            destination_members: rd.len(),
        })
    }
}

/// Length of `path` over the edges of `g`.
pub fn measure<T: Scalar, G: GraphView<T>>(g: &G, path: &[VertexId]) -> Result<T, StrategyError> {
    path.windows(2).try_fold(T::zero(), |acc, pair| {
        g.edge_weight(pair[0], pair[1])
            .map(|w| acc + w)
            .ok_or(StrategyError::BrokenPath(pair[0], pair[1]))
    })
}

pub fn run_collapse<T: Scalar, G: GraphView<T>>(g: &G, q: &MomdQuery<T>) -> Result<MomdResult<T>, StrategyError> {
    StrategyRunner::new().collapse(g, q)
}

pub fn run_brute_force<T: Scalar, G: GraphView<T>>(g: &G, q: &MomdQuery<T>) -> Result<MomdResult<T>, StrategyError> {
    StrategyRunner::new().brute_force(g, q)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonRecord<T> {
    pub query: MomdQuery<T>,
    pub optimal_distance: T,
    pub collapse_distance: T,
    /// `collapse_distance - optimal_distance`, never clamped.
    pub error: T,
    pub is_optimal: bool,
}

impl<T: Scalar> ComparisonRecord<T> {
    pub fn new(query: MomdQuery<T>, optimal_distance: T, collapse_distance: T) -> Self {
        let error = collapse_distance - optimal_distance;
        Self {
            query,
            optimal_distance,
            collapse_distance,
            error,
            is_optimal: error.to_f64_lossy() <= OPTIMALITY_TOLERANCE,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ComparisonSummary {
    /// Queries that entered the statistics.
    pub queries: usize,
    /// Queries dropped because a strategy failed or found no path.
    pub excluded: usize,
    pub optimal: usize,
    pub accuracy: f64,
    pub max_error: f64,
    pub mean_error_all: f64,
    /// 0 when every query was optimal.
    pub mean_error_nonoptimal: f64,
}

impl ComparisonSummary {
    pub fn from_records<T: Scalar>(records: &[ComparisonRecord<T>], excluded: usize) -> Self {
        let queries = records.len();
        let optimal = records.iter().filter(|r| r.is_optimal).count();
        let errors = records.iter().map(|r| r.error.to_f64_lossy());
        let total: f64 = errors.clone().sum();
        let nonoptimal: f64 = records.iter().filter(|r| !r.is_optimal).map(|r| r.error.to_f64_lossy()).sum();
        let ratio = |num: f64, den: usize| if den == 0 { 0.0 } else { num / den as f64 };
        Self {
            queries,
            excluded,
            optimal,
            accuracy: ratio(optimal as f64, queries),
            max_error: errors.fold(0.0, f64::max),
            mean_error_all: ratio(total, queries),
            mean_error_nonoptimal: ratio(nonoptimal, queries - optimal),
        }
    }
}

/// Both strategy results for every query, plus the records built from them.
#[derive(Debug, Clone)]
pub struct Comparison<T> {
    pub collapse: Vec<Result<MomdResult<T>, StrategyError>>,
    pub brute_force: Vec<Result<MomdResult<T>, StrategyError>>,
    /// One per query that both strategies answered with a path.
    pub records: Vec<ComparisonRecord<T>>,
    pub summary: ComparisonSummary,
}

/// Runs both strategies on every seed pair at one radius.
pub fn compare<T: Scalar, G: GraphView<T> + Sync>(g: &G, pairs: &[(VertexId, VertexId)], radius: T) -> Comparison<T> {
    let queries: Vec<MomdQuery<T>> = pairs.iter().map(|&(o, d)| MomdQuery::new(o, d, radius)).collect();
    compare_queries(g, &queries, 1)
}

/// As [`compare`], spreading contiguous query slices over `workers` threads.
/// The outcome does not depend on the worker count.
pub fn compare_queries<T: Scalar, G: GraphView<T> + Sync>(g: &G, queries: &[MomdQuery<T>], workers: usize) -> Comparison<T> {
    let slices = partition_work(queries.len(), workers.max(1));
    let mut outcomes = Vec::with_capacity(queries.len());
    std::thread::scope(|scope| {
        let mut start = 0;
        let handles: Vec<_> = slices
            .iter()
            .map(|&count| {
                let chunk = &queries[start..start + count];
                start += count;
                scope.spawn(move || {
                    let mut runner = StrategyRunner::new();
                    chunk
                        .iter()
                        .map(|q| (runner.collapse(g, q), runner.brute_force(g, q)))
                        .collect::<Vec<_>>()
                })
            })
            .collect();
        for h in handles {
            outcomes.extend(h.join().expect("comparison worker panicked"));
        }
    });

    let mut records = Vec::new();
    let mut excluded = 0;
    for (q, (c, b)) in queries.iter().zip(&outcomes) {
        match (c, b) {
            (Ok(c), Ok(b)) if c.search.status.has_path() && b.search.status.has_path() => {
                records.push(ComparisonRecord::new(*q, b.search.distance, c.search.distance));
            }
            _ => excluded += 1,
        }
    }
    let summary = ComparisonSummary::from_records(&records, excluded);
    let (collapse, brute_force) = outcomes.into_iter().unzip();
    Comparison {
        collapse,
        brute_force,
        records,
        summary,
    }
}
