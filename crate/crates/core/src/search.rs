//! Point-to-point search: A* with a pluggable heuristic, Dijkstra, and a
//! dense Floyd-Warshall oracle restricted to small graphs.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::fmt;
use std::time::{Duration, Instant};

use thiserror::Error;

use crate::graph::{GraphView, VertexId};
use crate::scalar::{cmp_scalar, Scalar};

/// Largest graph accepted by [`floyd_warshall_region`].
pub const FLOYD_WARSHALL_LIMIT: usize = 2_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SearchError {
    #[error("unknown vertex {0}")]
    UnknownVertex(VertexId),
    #[error("graph has {vertices} vertices, dense all-pairs is limited to {limit}")]
    GraphTooLarge { vertices: usize, limit: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SearchStatus {
    Found,
    Unreachable,
    /// Origin and destination regions overlap; answered without a search.
    Degenerate,
    Error,
}

impl SearchStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            SearchStatus::Found => "Found",
            SearchStatus::Unreachable => "Unreachable",
            SearchStatus::Degenerate => "Degenerate",
            SearchStatus::Error => "Error",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "Found" => Some(SearchStatus::Found),
            "Unreachable" => Some(SearchStatus::Unreachable),
            "Degenerate" => Some(SearchStatus::Degenerate),
            "Error" => Some(SearchStatus::Error),
            _ => None,
        }
    }

    /// Whether the result carries a usable path and distance.
    pub fn has_path(self) -> bool {
        matches!(self, SearchStatus::Found | SearchStatus::Degenerate)
    }
}

impl fmt::Display for SearchStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchResult<T> {
    pub status: SearchStatus,
    pub path: Vec<VertexId>,
    pub hops: usize,
    /// Vertices popped from the frontier and expanded.
    pub expansions: usize,
    pub elapsed: Duration,
    /// Sum of the path's edge weights; infinite when unreachable.
    pub distance: T,
}

impl<T: Scalar> SearchResult<T> {
    pub fn unreachable(expansions: usize, elapsed: Duration) -> Self {
        Self {
            status: SearchStatus::Unreachable,
            path: Vec::new(),
            hops: 0,
            expansions,
            elapsed,
            distance: T::infinity(),
        }
    }

    pub fn is_found(&self) -> bool {
        self.status == SearchStatus::Found
    }
}

/// A frontier entry. `f == g + h` by construction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchNode<T> {
    pub vertex: VertexId,
    pub g: T,
    pub h: T,
    pub f: T,
    pub parent: Option<VertexId>,
}

impl<T: Scalar> SearchNode<T> {
    pub fn new(vertex: VertexId, g: T, h: T, parent: Option<VertexId>) -> Self {
        Self {
            vertex,
            g,
            h,
            f: g + h,
            parent,
        }
    }
}

// BinaryHeap is a max-heap: invert so the smallest (f, g, vertex) pops first.
struct Frontier<T>(SearchNode<T>);

impl<T: Scalar> PartialEq for Frontier<T> {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl<T: Scalar> Eq for Frontier<T> {}

impl<T: Scalar> PartialOrd for Frontier<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<T: Scalar> Ord for Frontier<T> {
    fn cmp(&self, other: &Self) -> Ordering {
        cmp_scalar(other.0.f, self.0.f)
            .then_with(|| cmp_scalar(other.0.g, self.0.g))
            .then_with(|| other.0.vertex.cmp(&self.0.vertex))
    }
}

/// Estimated remaining cost from a vertex to the goal.
pub trait Heuristic<T> {
    fn estimate(&self, v: VertexId) -> T;
}

impl<T, F: Fn(VertexId) -> T> Heuristic<T> for F {
    fn estimate(&self, v: VertexId) -> T {
        self(v)
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct ZeroHeuristic;

impl<T: Scalar> Heuristic<T> for ZeroHeuristic {
    fn estimate(&self, _: VertexId) -> T {
        T::zero()
    }
}

/// Straight-line distance (graph metric) to a fixed target position.
pub struct StraightLine<'g, G, T> {
    graph: &'g G,
    target: [T; 2],
}

impl<'g, T: Scalar, G: GraphView<T>> StraightLine<'g, G, T> {
    pub fn new(graph: &'g G, goal: VertexId) -> Self {
        Self {
            graph,
            target: graph.position(goal),
        }
    }

    pub fn to_position(graph: &'g G, target: [T; 2]) -> Self {
        Self { graph, target }
    }
}

impl<T: Scalar, G: GraphView<T>> Heuristic<T> for StraightLine<'_, G, T> {
    #[inline]
    fn estimate(&self, v: VertexId) -> T {
        self.graph.metric().distance(self.graph.position(v), self.target)
    }
}

/// What happens when a shorter route reaches an already expanded vertex.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ReopenPolicy {
    /// Expanded vertices are final. Optimal under consistent heuristics.
    #[default]
    Never,
    /// Reopen on a strictly smaller cost; needed when the heuristic may overestimate.
    OnImprovement,
}

const NO_PARENT: u32 = u32::MAX;

/// Reusable search state; buffers are reset lazily with a generation stamp.
#[derive(Debug, Default)]
pub struct Searcher<T> {
    cost: Vec<T>,
    parent: Vec<u32>,
    closed: Vec<bool>,
    stamp: Vec<u32>,
    generation: u32,
}

impl<T: Scalar> Searcher<T> {
    pub fn new() -> Self {
        Self {
            cost: Vec::new(),
            parent: Vec::new(),
            closed: Vec::new(),
            stamp: Vec::new(),
            generation: 0,
        }
    }

    fn reset(&mut self, bound: usize) {
        if self.stamp.len() < bound {
            self.cost.resize(bound, T::infinity());
            self.parent.resize(bound, NO_PARENT);
            self.closed.resize(bound, false);
            self.stamp.resize(bound, 0);
        }
        self.generation = self.generation.wrapping_add(1);
        if self.generation == 0 {
            self.stamp.iter_mut().for_each(|s| *s = 0);
            self.generation = 1;
        }
    }

    #[inline]
    fn touch(&mut self, v: usize) {
        if self.stamp[v] != self.generation {
            self.stamp[v] = self.generation;
            self.cost[v] = T::infinity();
            self.parent[v] = NO_PARENT;
            self.closed[v] = false;
        }
    }

    pub fn astar<G, H>(
        &mut self,
        g: &G,
        origin: VertexId,
        goal: VertexId,
        heuristic: &H,
        policy: ReopenPolicy,
    ) -> Result<SearchResult<T>, SearchError>
    where
        G: GraphView<T>,
        H: Heuristic<T> + ?Sized,
    {
        self.astar_traced(g, origin, goal, heuristic, policy, |_| {})
    }

    /// As [`Searcher::astar`], calling `on_expand` with every node as it is expanded.
    pub fn astar_traced<G, H, F>(
        &mut self,
        g: &G,
        origin: VertexId,
        goal: VertexId,
        heuristic: &H,
        policy: ReopenPolicy,
        mut on_expand: F,
    ) -> Result<SearchResult<T>, SearchError>
    where
        G: GraphView<T>,
        H: Heuristic<T> + ?Sized,
        F: FnMut(&SearchNode<T>),
    {
        let started = Instant::now();
        for v in [origin, goal] {
            if !g.contains(v) {
                return Err(SearchError::UnknownVertex(v));
            }
        }
        self.reset(g.id_bound());
        let mut frontier = BinaryHeap::new();
        self.touch(origin.index());
        self.cost[origin.index()] = T::zero();
        frontier.push(Frontier(SearchNode::new(origin, T::zero(), heuristic.estimate(origin), None)));
        let mut expansions = 0;

        while let Some(Frontier(node)) = frontier.pop() {
            let v = node.vertex.index();
            if node.g > self.cost[v] || self.closed[v] {
                continue;
            }
            self.closed[v] = true;
            expansions += 1;
            on_expand(&node);
            if node.vertex == goal {
                let path = self.trace_path(goal);
                return Ok(SearchResult {
                    status: SearchStatus::Found,
                    hops: path.len() - 1,
                    path,
                    expansions,
                    elapsed: started.elapsed(),
                    distance: node.g,
                });
            }
            g.for_each_neighbor(node.vertex, |u, w| {
                let ui = u.index();
                self.touch(ui);
                let candidate = node.g + w;
                if candidate < self.cost[ui] {
                    if self.closed[ui] {
                        if policy == ReopenPolicy::Never {
                            return;
                        }
                        self.closed[ui] = false;
                    }
                    self.cost[ui] = candidate;
                    self.parent[ui] = node.vertex.0;
                    frontier.push(Frontier(SearchNode::new(
                        u,
                        candidate,
                        heuristic.estimate(u),
                        Some(node.vertex),
                    )));
                }
            });
        }
        Ok(SearchResult::unreachable(expansions, started.elapsed()))
    }

    fn trace_path(&self, goal: VertexId) -> Vec<VertexId> {
        let mut path = vec![goal];
        let mut current = goal.0;
        while self.parent[current as usize] != NO_PARENT {
            current = self.parent[current as usize];
            path.push(VertexId(current));
        }
        path.reverse();
        path
    }

    pub fn dijkstra<G: GraphView<T>>(
        &mut self,
        g: &G,
        origin: VertexId,
        goal: VertexId,
    ) -> Result<SearchResult<T>, SearchError> {
        self.astar(g, origin, goal, &ZeroHeuristic, ReopenPolicy::Never)
    }
}

/// One-shot A*; allocates fresh state. Use a [`Searcher`] for batches.
pub fn astar<T, G, H>(
    g: &G,
    origin: VertexId,
    goal: VertexId,
    heuristic: &H,
    policy: ReopenPolicy,
) -> Result<SearchResult<T>, SearchError>
where
    T: Scalar,
    G: GraphView<T>,
    H: Heuristic<T> + ?Sized,
{
    Searcher::new().astar(g, origin, goal, heuristic, policy)
}

/// A* with the zero heuristic.
pub fn dijkstra<T: Scalar, G: GraphView<T>>(
    g: &G,
    origin: VertexId,
    goal: VertexId,
) -> Result<SearchResult<T>, SearchError> {
    Searcher::new().dijkstra(g, origin, goal)
}

/// All-pairs distances over `g`, projected to `origins` x `destinations`.
/// Unreachable entries are infinite.
pub fn floyd_warshall_region<T: Scalar, G: GraphView<T>>(
    g: &G,
    origins: &[VertexId],
    destinations: &[VertexId],
) -> Result<Vec<Vec<T>>, SearchError> {
    let n = g.vertex_count();
    if n > FLOYD_WARSHALL_LIMIT {
        return Err(SearchError::GraphTooLarge {
            vertices: n,
            limit: FLOYD_WARSHALL_LIMIT,
        });
    }
    for &v in origins.iter().chain(destinations) {
        if !g.contains(v) {
            return Err(SearchError::UnknownVertex(v));
        }
    }
    let ids = g.vertex_ids();
    let mut dense = vec![usize::MAX; g.id_bound()];
    for (i, v) in ids.iter().enumerate() {
        dense[v.index()] = i;
    }
    let mut dist = vec![T::infinity(); n * n];
    for (i, &v) in ids.iter().enumerate() {
        dist[i * n + i] = T::zero();
        g.for_each_neighbor(v, |u, w| {
            let j = dense[u.index()];
            if w < dist[i * n + j] {
                dist[i * n + j] = w;
            }
        });
    }
    for k in 0..n {
        let row_k: Vec<T> = dist[k * n..(k + 1) * n].to_vec();
        for i in 0..n {
            let dik = dist[i * n + k];
            if dik.is_infinite() {
                continue;
            }
            let row_i = &mut dist[i * n..(i + 1) * n];
            for (cell, &dkj) in row_i.iter_mut().zip(&row_k) {
                let through = dik + dkj;
                if through < *cell {
                    *cell = through;
                }
            }
        }
    }
    Ok(origins
        .iter()
        .map(|o| {
            let i = dense[o.index()];
            destinations.iter().map(|d| dist[i * n + dense[d.index()]]).collect()
        })
        .collect())
}
