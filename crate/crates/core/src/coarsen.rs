//! Regions around a seed vertex and their reversible contraction into a
//! single super-vertex.
//!
//! [`collapse`] does not copy the graph: it returns a [`CollapsedGraph`]
//! overlay that hides the region's members and exposes one extra vertex with
//! id `base.id_bound()`. Every other vertex keeps its id, so overlays can be
//! stacked (origin region, then destination region) and paths found on the
//! top overlay translate back to the base graph directly.

use std::collections::{BinaryHeap, HashMap};

use thiserror::Error;

use crate::graph::{Graph, GraphBuilder, GraphView, VertexId};
use crate::scalar::{cmp_scalar, Scalar};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CoarsenError {
    #[error("unknown vertex {0}")]
    UnknownVertex(VertexId),
    #[error("radius {0} must be finite and non-negative")]
    InvalidRadius(f64),
    #[error("region has no members")]
    EmptyRegion,
    #[error("degenerate collapsed path: {0}")]
    DegeneratePath(&'static str),
    #[error("path edge to {0} does not match any boundary edge of the region")]
    UnmatchedBoundary(VertexId),
}

/// How distance from the seed is measured when building a region.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RegionMetric {
    /// Crow-flies distance under the graph metric.
    #[default]
    StraightLine,
    /// Shortest-path distance through the graph.
    Network,
}

/// A seed vertex and every vertex within `radius` of it.
#[derive(Debug, Clone, PartialEq)]
pub struct Region<T> {
    pub seed: VertexId,
    pub radius: T,
    /// Sorted ascending; always contains `seed`.
    pub members: Vec<VertexId>,
}

impl<T: Scalar> Region<T> {
    pub fn contains(&self, v: VertexId) -> bool {
        self.members.binary_search(&v).is_ok()
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// Smallest vertex shared with `other`, if the regions overlap.
    pub fn first_shared(&self, other: &Region<T>) -> Option<VertexId> {
        let (mut i, mut j) = (0, 0);
        while i < self.members.len() && j < other.members.len() {
            match self.members[i].cmp(&other.members[j]) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => return Some(self.members[i]),
            }
        }
        None
    }
}

fn check_radius<T: Scalar>(radius: T) -> Result<(), CoarsenError> {
    if radius.is_finite() && radius >= T::zero() {
        Ok(())
    } else {
        Err(CoarsenError::InvalidRadius(radius.to_f64_lossy()))
    }
}

/// Straight-line region: all vertices within `radius` of `seed`.
pub fn build_region<T: Scalar, G: GraphView<T>>(g: &G, seed: VertexId, radius: T) -> Result<Region<T>, CoarsenError> {
    build_region_with(g, seed, radius, RegionMetric::StraightLine)
}

pub fn build_region_with<T: Scalar, G: GraphView<T>>(
    g: &G,
    seed: VertexId,
    radius: T,
    metric: RegionMetric,
) -> Result<Region<T>, CoarsenError> {
    if !g.contains(seed) {
        return Err(CoarsenError::UnknownVertex(seed));
    }
    check_radius(radius)?;
    let mut members = match metric {
        RegionMetric::StraightLine => {
            let origin = g.position(seed);
            let m = g.metric();
            (0..g.id_bound())
                .map(VertexId::from_index)
                .filter(|&v| g.contains(v) && m.distance(g.position(v), origin) <= radius)
                .collect::<Vec<_>>()
        }
        RegionMetric::Network => within_network_radius(g, seed, radius),
    };
    if members.binary_search(&seed).is_err() {
        // a seed is always within radius 0 of itself; guards against rounding
        members.push(seed);
        members.sort_unstable();
    }
    Ok(Region { seed, radius, members })
}

fn within_network_radius<T: Scalar, G: GraphView<T>>(g: &G, seed: VertexId, radius: T) -> Vec<VertexId> {
    #[derive(PartialEq)]
    struct Entry<T>(T, VertexId);
    impl<T: Scalar> Eq for Entry<T> {}
    impl<T: Scalar> PartialOrd for Entry<T> {
        fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
            Some(self.cmp(other))
        }
    }
    impl<T: Scalar> Ord for Entry<T> {
        fn cmp(&self, other: &Self) -> std::cmp::Ordering {
            cmp_scalar(other.0, self.0).then_with(|| other.1.cmp(&self.1))
        }
    }

    let mut best: HashMap<VertexId, T> = HashMap::from([(seed, T::zero())]);
    let mut done = Vec::new();
    let mut heap = BinaryHeap::from([Entry(T::zero(), seed)]);
    while let Some(Entry(d, v)) = heap.pop() {
        if d > best[&v] || done.contains(&v) {
            continue;
        }
        done.push(v);
        g.for_each_neighbor(v, |u, w| {
            let nd = d + w;
            if nd <= radius && best.get(&u).is_none_or(|&old| nd < old) {
                best.insert(u, nd);
                heap.push(Entry(nd, u));
            }
        });
    }
    done.sort_unstable();
    done
}

/// The member minimizing the summed straight-line distance to all other
/// members; ties go to the smaller id.
pub fn select_center<T: Scalar, G: GraphView<T>>(g: &G, region: &Region<T>) -> Result<VertexId, CoarsenError> {
    let metric = g.metric();
    let mut best: Option<(T, VertexId)> = None;
    for &candidate in &region.members {
        let p = g.position(candidate);
        let total: T = region
            .members
            .iter()
            .map(|&other| metric.distance(p, g.position(other)))
            .sum();
        if best.is_none_or(|(b, _)| total < b) {
            best = Some((total, candidate));
        }
    }
    best.map(|(_, v)| v).ok_or(CoarsenError::EmptyRegion)
}

/// An edge that crossed the region boundary before the collapse.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryEdge<T> {
    pub external: VertexId,
    pub member: VertexId,
    pub weight: T,
}

/// Everything needed to undo a collapse and map paths back to the members.
#[derive(Debug, Clone, PartialEq)]
pub struct CollapseMap<T> {
    pub super_id: VertexId,
    /// Sorted ascending.
    pub members: Vec<VertexId>,
    pub center: VertexId,
    /// Every original member-external edge, sorted by (external, member).
    pub boundary_edges: Vec<BoundaryEdge<T>>,
    /// Member-member edges, `(u, v, w)` with `u < v`.
    pub internal_edges: Vec<(VertexId, VertexId, T)>,
    pub member_labels: Vec<u64>,
    pub member_positions: Vec<[T; 2]>,
}

impl<T: Scalar> CollapseMap<T> {
    /// Member that the lightest boundary edge to `external` touched.
    pub fn member_for(&self, external: VertexId) -> Option<(VertexId, T)> {
        let start = self.boundary_edges.partition_point(|e| e.external < external);
        self.boundary_edges[start..]
            .iter()
            .take_while(|e| e.external == external)
            .fold(None, |best: Option<&BoundaryEdge<T>>, e| match best {
                Some(b) if b.weight <= e.weight => Some(b),
                _ => Some(e),
            })
            .map(|e| (e.member, e.weight))
    }

    pub fn is_member(&self, v: VertexId) -> bool {
        self.members.binary_search(&v).is_ok()
    }
}

/// Overlay of a base graph with one region contracted to a super-vertex.
#[derive(Debug, Clone)]
pub struct CollapsedGraph<'g, G, T> {
    base: &'g G,
    super_id: VertexId,
    hidden: Vec<bool>,
    super_position: [T; 2],
    super_label: u64,
    super_adjacency: Vec<(VertexId, T)>,
    to_super: HashMap<VertexId, T>,
    vertex_count: usize,
    edge_count: usize,
}

impl<'g, T: Scalar, G: GraphView<T>> CollapsedGraph<'g, G, T> {
    pub fn super_id(&self) -> VertexId {
        self.super_id
    }

    pub fn base(&self) -> &'g G {
        self.base
    }
}

impl<T: Scalar, G: GraphView<T>> GraphView<T> for CollapsedGraph<'_, G, T> {
    fn metric(&self) -> crate::geo::Metric {
        self.base.metric()
    }

    fn id_bound(&self) -> usize {
        self.super_id.index() + 1
    }

    fn contains(&self, v: VertexId) -> bool {
        v == self.super_id || (v.index() < self.hidden.len() && !self.hidden[v.index()] && self.base.contains(v))
    }

    fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    fn edge_count(&self) -> usize {
        self.edge_count
    }

    fn position(&self, v: VertexId) -> [T; 2] {
        if v == self.super_id {
            self.super_position
        } else {
            self.base.position(v)
        }
    }

    fn label(&self, v: VertexId) -> u64 {
        if v == self.super_id {
            self.super_label
        } else {
            self.base.label(v)
        }
    }

    #[inline]
    fn for_each_neighbor<F: FnMut(VertexId, T)>(&self, v: VertexId, mut f: F) {
        if v == self.super_id {
            for &(u, w) in &self.super_adjacency {
                f(u, w);
            }
            return;
        }
        let hidden = &self.hidden;
        self.base.for_each_neighbor(v, |u, w| {
            if !hidden[u.index()] {
                f(u, w);
            }
        });
        // the super id is the largest id, so neighbour order stays ascending
        if let Some(&w) = self.to_super.get(&v) {
            f(self.super_id, w);
        }
    }
}

/// Contracts `region` into a super-vertex placed at the region's center.
///
/// Internal edges disappear; each member-external edge becomes a
/// super-external edge with its original weight, keeping the lightest when
/// several members touch the same external vertex.
pub fn collapse<'g, T: Scalar, G: GraphView<T>>(
    g: &'g G,
    region: &Region<T>,
) -> Result<(CollapsedGraph<'g, G, T>, CollapseMap<T>), CoarsenError> {
    if region.members.is_empty() {
        return Err(CoarsenError::EmptyRegion);
    }
    for &m in &region.members {
        if !g.contains(m) {
            return Err(CoarsenError::UnknownVertex(m));
        }
    }
    let center = select_center(g, region)?;
    let super_id = VertexId::from_index(g.id_bound());
    let mut hidden = vec![false; g.id_bound()];
    for &m in &region.members {
        hidden[m.index()] = true;
    }

    let mut boundary_edges = Vec::new();
    let mut internal_edges = Vec::new();
    for &m in &region.members {
        g.for_each_neighbor(m, |u, w| {
            if hidden[u.index()] {
                if m < u {
                    internal_edges.push((m, u, w));
                }
            } else {
                boundary_edges.push(BoundaryEdge {
                    external: u,
                    member: m,
                    weight: w,
                });
            }
        });
    }
    boundary_edges.sort_by(|a, b| a.external.cmp(&b.external).then(a.member.cmp(&b.member)));

    let mut to_super: HashMap<VertexId, T> = HashMap::new();
    for e in &boundary_edges {
        to_super
            .entry(e.external)
            .and_modify(|w| {
                if e.weight < *w {
                    *w = e.weight;
                }
            })
            .or_insert(e.weight);
    }
    let mut super_adjacency: Vec<(VertexId, T)> = to_super.iter().map(|(&u, &w)| (u, w)).collect();
    super_adjacency.sort_by_key(|&(u, _)| u);

    let vertex_count = g.vertex_count() - region.members.len() + 1;
    let edge_count = g.edge_count() - internal_edges.len() - boundary_edges.len() + super_adjacency.len();
    let view = CollapsedGraph {
        base: g,
        super_id,
        hidden,
        super_position: g.position(center),
        super_label: g.label(center),
        super_adjacency,
        to_super,
        vertex_count,
        edge_count,
    };
    let map = CollapseMap {
        super_id,
        members: region.members.clone(),
        center,
        boundary_edges,
        internal_edges,
        member_labels: region.members.iter().map(|&m| g.label(m)).collect(),
        member_positions: region.members.iter().map(|&m| g.position(m)).collect(),
    };
    Ok((view, map))
}

/// Rebuilds the pre-collapse graph from a collapsed graph and its map.
///
/// Vertices come out in original id order; when the collapse was applied to
/// a dense [`Graph`] the result equals that graph.
pub fn uncollapse<T: Scalar, G: GraphView<T>>(collapsed: &G, map: &CollapseMap<T>) -> Graph<T> {
    enum Source {
        Kept,
        Member(usize),
    }
    let mut order: Vec<(VertexId, Source)> = collapsed
        .vertex_ids()
        .into_iter()
        .filter(|&v| v != map.super_id)
        .map(|v| (v, Source::Kept))
        .chain(map.members.iter().enumerate().map(|(i, &m)| (m, Source::Member(i))))
        .collect();
    order.sort_by_key(|(v, _)| *v);

    let bound = order.last().map_or(0, |(v, _)| v.index() + 1);
    let mut new_id = vec![None; bound];
    let mut builder = GraphBuilder::with_capacity(collapsed.metric(), order.len());
    for (v, source) in &order {
        let (label, position) = match source {
            Source::Kept => (collapsed.label(*v), collapsed.position(*v)),
            Source::Member(i) => (map.member_labels[*i], map.member_positions[*i]),
        };
        new_id[v.index()] = Some(builder.add_vertex(label, position).expect("labels stay unique"));
    }
    let id = |v: VertexId| new_id[v.index()].expect("vertex present");
    for (v, source) in &order {
        if matches!(source, Source::Kept) {
            collapsed.for_each_neighbor(*v, |u, w| {
                if u != map.super_id && *v < u {
                    builder.add_edge(id(*v), id(u), w).expect("valid edge");
                }
            });
        }
    }
    for &(u, v, w) in &map.internal_edges {
        builder.add_edge(id(u), id(v), w).expect("valid edge");
    }
    for e in &map.boundary_edges {
        builder.add_edge(id(e.member), id(e.external), e.weight).expect("valid edge");
    }
    builder.build()
}

/// True origin and destination behind a path between two super-vertices:
/// the members that the first and last path edges touched before collapsing.
pub fn recover_endpoints<T: Scalar>(
    map_o: &CollapseMap<T>,
    map_d: &CollapseMap<T>,
    collapsed_path: &[VertexId],
) -> Result<(VertexId, VertexId), CoarsenError> {
    if map_o.super_id == map_d.super_id {
        return Err(CoarsenError::DegeneratePath("origin and destination super-vertices coincide"));
    }
    let (Some(&first), Some(&last)) = (collapsed_path.first(), collapsed_path.last()) else {
        return Err(CoarsenError::DegeneratePath("empty path"));
    };
    if first != map_o.super_id || last != map_d.super_id {
        return Err(CoarsenError::DegeneratePath("path does not join the two super-vertices"));
    }
    if collapsed_path.len() < 3 {
        return Err(CoarsenError::DegeneratePath("super-vertices are directly adjacent"));
    }
    let after_origin = collapsed_path[1];
    let before_destination = collapsed_path[collapsed_path.len() - 2];
    let (origin, _) = map_o
        .member_for(after_origin)
        .ok_or(CoarsenError::UnmatchedBoundary(after_origin))?;
    let (destination, _) = map_d
        .member_for(before_destination)
        .ok_or(CoarsenError::UnmatchedBoundary(before_destination))?;
    Ok((origin, destination))
}

/// Lightest original edge joining the two regions, as `(origin member,
/// destination member, weight)`; resolves a path that goes straight from one
/// super-vertex to the other.
pub fn direct_link<T: Scalar>(map_o: &CollapseMap<T>, map_d: &CollapseMap<T>) -> Option<(VertexId, VertexId, T)> {
    map_o
        .boundary_edges
        .iter()
        .filter(|e| map_d.is_member(e.external))
        .fold(None, |best: Option<&BoundaryEdge<T>>, e| match best {
            Some(b) if b.weight <= e.weight => Some(b),
            _ => Some(e),
        })
        .map(|e| (e.member, e.external, e.weight))
}
