//! Undirected weighted spatial graphs, connectivity and giant-component extraction.

use std::collections::{HashMap, VecDeque};
use std::fmt;

use thiserror::Error;

use crate::geo::Metric;
use crate::scalar::{cmp_scalar, Scalar};

/// Dense vertex index. After cleaning, ids run `0..vertex_count`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct VertexId(pub u32);

impl VertexId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }

    #[inline]
    pub fn from_index(index: usize) -> Self {
        VertexId(u32::try_from(index).expect("vertex index exceeds u32"))
    }
}

impl fmt::Display for VertexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GraphError {
    #[error("unknown vertex {0}")]
    UnknownVertex(VertexId),
    #[error("unknown vertex label {0}")]
    UnknownLabel(u64),
    #[error("graph has no vertices")]
    EmptyGraph,
    #[error("self-loop on vertex {0}")]
    SelfLoop(VertexId),
    #[error("edge ({u}, {v}) has invalid weight {weight}")]
    InvalidWeight { u: VertexId, v: VertexId, weight: f64 },
    #[error("duplicate vertex label {0}")]
    DuplicateLabel(u64),
    #[error("vertex {0} has an invalid position for the graph metric")]
    InvalidPosition(u64),
}

/// Read-only access to an undirected spatial graph.
///
/// Vertex ids live in `0..id_bound()`; views such as collapsed overlays may
/// leave holes in that range, so `contains` is authoritative.
pub trait GraphView<T: Scalar> {
    fn metric(&self) -> Metric;
    fn id_bound(&self) -> usize;
    fn contains(&self, v: VertexId) -> bool;
    fn vertex_count(&self) -> usize;
    fn edge_count(&self) -> usize;
    fn position(&self, v: VertexId) -> [T; 2];
    /// External identifier (OSM id, file id) of a vertex.
    fn label(&self, v: VertexId) -> u64;
    fn for_each_neighbor<F: FnMut(VertexId, T)>(&self, v: VertexId, f: F);

    fn degree(&self, v: VertexId) -> usize {
        let mut count = 0;
        self.for_each_neighbor(v, |_, _| count += 1);
        count
    }

    fn vertex_ids(&self) -> Vec<VertexId> {
        (0..self.id_bound())
            .map(VertexId::from_index)
            .filter(|&v| self.contains(v))
            .collect()
    }

    /// Weight of the edge `u`-`v`, if present.
    fn edge_weight(&self, u: VertexId, v: VertexId) -> Option<T> {
        let mut found = None;
        self.for_each_neighbor(u, |x, w| {
            if x == v {
                found = Some(w);
            }
        });
        found
    }

    fn straight_line(&self, a: VertexId, b: VertexId) -> T {
        self.metric().distance(self.position(a), self.position(b))
    }
}

/// Immutable graph in compressed adjacency form. Neighbor lists are sorted by id.
#[derive(Debug, Clone, PartialEq)]
pub struct Graph<T> {
    metric: Metric,
    labels: Vec<u64>,
    positions: Vec<[T; 2]>,
    offsets: Vec<usize>,
    targets: Vec<VertexId>,
    weights: Vec<T>,
}

impl<T: Scalar> Graph<T> {
    pub fn empty(metric: Metric) -> Self {
        Self {
            metric,
            labels: Vec::new(),
            positions: Vec::new(),
            offsets: vec![0],
            targets: Vec::new(),
            weights: Vec::new(),
        }
    }

    pub fn neighbors(&self, v: VertexId) -> impl Iterator<Item = (VertexId, T)> + '_ {
        let range = self.offsets[v.index()]..self.offsets[v.index() + 1];
        self.targets[range.clone()]
            .iter()
            .copied()
            .zip(self.weights[range].iter().copied())
    }

    /// Each undirected edge once, as `(u, v, w)` with `u < v`, in id order.
    pub fn edges(&self) -> impl Iterator<Item = (VertexId, VertexId, T)> + '_ {
        (0..self.labels.len()).flat_map(move |u| {
            let u = VertexId::from_index(u);
            self.neighbors(u)
                .filter(move |&(v, _)| u < v)
                .map(move |(v, w)| (u, v, w))
        })
    }

    pub fn labels(&self) -> &[u64] {
        &self.labels
    }

    pub fn positions(&self) -> &[[T; 2]] {
        &self.positions
    }

    pub fn label_index(&self) -> HashMap<u64, VertexId> {
        self.labels
            .iter()
            .enumerate()
            .map(|(i, &label)| (label, VertexId::from_index(i)))
            .collect()
    }

    /// Weight of the edge `u`-`v`, if present.
    pub fn weight(&self, u: VertexId, v: VertexId) -> Option<T> {
        let range = self.offsets[u.index()]..self.offsets[u.index() + 1];
        let slice = &self.targets[range.clone()];
        slice
            .binary_search(&v)
            .ok()
            .map(|i| self.weights[range.start + i])
    }

    pub fn check_vertex(&self, v: VertexId) -> Result<(), GraphError> {
        if v.index() < self.labels.len() {
            Ok(())
        } else {
            Err(GraphError::UnknownVertex(v))
        }
    }

    /// Copy with labels replaced by the dense ids `0..n`.
    pub fn relabel_dense(&self) -> Self {
        let mut out = self.clone();
        out.labels = (0..self.labels.len() as u64).collect();
        out
    }

    /// Materializes any view; vertices keep their relative id order.
    /// Returns the graph and the old id -> new id map.
    pub fn from_view<G: GraphView<T>>(view: &G) -> (Self, Vec<Option<VertexId>>) {
        let keep = view.vertex_ids();
        induced_subgraph(view, &keep)
    }
}

impl<T: Scalar> GraphView<T> for Graph<T> {
    fn metric(&self) -> Metric {
        self.metric
    }

    fn id_bound(&self) -> usize {
        self.labels.len()
    }

    fn contains(&self, v: VertexId) -> bool {
        v.index() < self.labels.len()
    }

    fn vertex_count(&self) -> usize {
        self.labels.len()
    }

    fn edge_count(&self) -> usize {
        self.targets.len() / 2
    }

    fn position(&self, v: VertexId) -> [T; 2] {
        self.positions[v.index()]
    }

    fn label(&self, v: VertexId) -> u64 {
        self.labels[v.index()]
    }

    #[inline]
    fn for_each_neighbor<F: FnMut(VertexId, T)>(&self, v: VertexId, mut f: F) {
        let range = self.offsets[v.index()]..self.offsets[v.index() + 1];
        for i in range {
            f(self.targets[i], self.weights[i]);
        }
    }

    fn degree(&self, v: VertexId) -> usize {
        self.offsets[v.index() + 1] - self.offsets[v.index()]
    }

    fn edge_weight(&self, u: VertexId, v: VertexId) -> Option<T> {
        self.weight(u, v)
    }
}

/// Incremental construction. Parallel edges collapse to the lightest one.
#[derive(Debug, Clone)]
pub struct GraphBuilder<T> {
    metric: Metric,
    labels: Vec<u64>,
    positions: Vec<[T; 2]>,
    by_label: HashMap<u64, VertexId>,
    adjacency: Vec<Vec<(VertexId, T)>>,
}

impl<T: Scalar> GraphBuilder<T> {
    pub fn new(metric: Metric) -> Self {
        Self {
            metric,
            labels: Vec::new(),
            positions: Vec::new(),
            by_label: HashMap::new(),
            adjacency: Vec::new(),
        }
    }

    pub fn with_capacity(metric: Metric, vertices: usize) -> Self {
        let mut b = Self::new(metric);
        b.labels.reserve(vertices);
        b.positions.reserve(vertices);
        b.adjacency.reserve(vertices);
        b
    }

    pub fn metric(&self) -> Metric {
        self.metric
    }

    pub fn vertex_count(&self) -> usize {
        self.labels.len()
    }

    pub fn add_vertex(&mut self, label: u64, position: [T; 2]) -> Result<VertexId, GraphError> {
        if !self.metric.is_valid_position(position) {
            return Err(GraphError::InvalidPosition(label));
        }
        if self.by_label.contains_key(&label) {
            return Err(GraphError::DuplicateLabel(label));
        }
        let id = VertexId::from_index(self.labels.len());
        self.by_label.insert(label, id);
        self.labels.push(label);
        self.positions.push(position);
        self.adjacency.push(Vec::new());
        Ok(id)
    }

    pub fn vertex_by_label(&self, label: u64) -> Option<VertexId> {
        self.by_label.get(&label).copied()
    }

    pub fn position(&self, v: VertexId) -> [T; 2] {
        self.positions[v.index()]
    }

    pub fn add_edge(&mut self, u: VertexId, v: VertexId, weight: T) -> Result<(), GraphError> {
        let n = self.labels.len();
        for x in [u, v] {
            if x.index() >= n {
                return Err(GraphError::UnknownVertex(x));
            }
        }
        if u == v {
            return Err(GraphError::SelfLoop(u));
        }
        if !(weight.is_finite() && weight > T::zero()) {
            return Err(GraphError::InvalidWeight {
                u,
                v,
                weight: weight.to_f64_lossy(),
            });
        }
        self.adjacency[u.index()].push((v, weight));
        self.adjacency[v.index()].push((u, weight));
        Ok(())
    }

    /// Adds an edge weighted by the straight-line distance between its endpoints.
    pub fn add_straight_edge(&mut self, u: VertexId, v: VertexId) -> Result<(), GraphError> {
        for x in [u, v] {
            if x.index() >= self.labels.len() {
                return Err(GraphError::UnknownVertex(x));
            }
        }
        let w = self.metric.distance(self.positions[u.index()], self.positions[v.index()]);
        self.add_edge(u, v, w)
    }

    pub fn build(self) -> Graph<T> {
        let n = self.labels.len();
        let mut offsets = Vec::with_capacity(n + 1);
        offsets.push(0);
        let mut targets = Vec::new();
        let mut weights = Vec::new();
        for mut list in self.adjacency {
            list.sort_by(|a, b| a.0.cmp(&b.0).then(cmp_scalar(a.1, b.1)));
            list.dedup_by_key(|e| e.0);
            for (v, w) in list {
                targets.push(v);
                weights.push(w);
            }
            offsets.push(targets.len());
        }
        Graph {
            metric: self.metric,
            labels: self.labels,
            positions: self.positions,
            offsets,
            targets,
            weights,
        }
    }
}

/// Subgraph induced by `keep` (ascending ids), densely re-indexed in that order.
pub fn induced_subgraph<T: Scalar, G: GraphView<T>>(
    g: &G,
    keep: &[VertexId],
) -> (Graph<T>, Vec<Option<VertexId>>) {
    let mut old_to_new = vec![None; g.id_bound()];
    let mut builder = GraphBuilder::with_capacity(g.metric(), keep.len());
    for &v in keep {
        let id = builder
            .add_vertex(g.label(v), g.position(v))
            .expect("source graph labels and positions are valid");
        old_to_new[v.index()] = Some(id);
    }
    for &v in keep {
        let nv = old_to_new[v.index()].unwrap();
        g.for_each_neighbor(v, |u, w| {
            if let Some(nu) = old_to_new[u.index()] {
                if nv < nu {
                    builder.add_edge(nv, nu, w).expect("source edges are valid");
                }
            }
        });
    }
    (builder.build(), old_to_new)
}

/// Component index per vertex. Index 0 is the largest component.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ComponentLabeling {
    labels: Vec<Option<usize>>,
    sizes: Vec<usize>,
}

impl ComponentLabeling {
    pub fn component_of(&self, v: VertexId) -> Option<usize> {
        self.labels.get(v.index()).copied().flatten()
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn count(&self) -> usize {
        self.sizes.len()
    }

    pub fn members(&self, component: usize) -> Vec<VertexId> {
        self.labels
            .iter()
            .enumerate()
            .filter(|(_, c)| **c == Some(component))
            .map(|(i, _)| VertexId::from_index(i))
            .collect()
    }
}

/// Components ordered by descending size, ties broken by the smallest member id.
pub fn connected_components<T: Scalar, G: GraphView<T>>(g: &G) -> ComponentLabeling {
    let bound = g.id_bound();
    let mut raw: Vec<Option<usize>> = vec![None; bound];
    let mut raw_sizes = Vec::new();
    let mut queue = VecDeque::new();
    for start in 0..bound {
        let start = VertexId::from_index(start);
        if raw[start.index()].is_some() || !g.contains(start) {
            continue;
        }
        let comp = raw_sizes.len();
        raw[start.index()] = Some(comp);
        queue.push_back(start);
        let mut size = 0;
        while let Some(v) = queue.pop_front() {
            size += 1;
            g.for_each_neighbor(v, |u, _| {
                if raw[u.index()].is_none() {
                    raw[u.index()] = Some(comp);
                    queue.push_back(u);
                }
            });
        }
        raw_sizes.push(size);
    }
    // raw indices already follow smallest-member order, so a stable sort on size suffices
    let mut order: Vec<usize> = (0..raw_sizes.len()).collect();
    order.sort_by(|&a, &b| raw_sizes[b].cmp(&raw_sizes[a]));
    let mut rank = vec![0; order.len()];
    for (new, &old) in order.iter().enumerate() {
        rank[old] = new;
    }
    ComponentLabeling {
        labels: raw.into_iter().map(|c| c.map(|c| rank[c])).collect(),
        sizes: order.iter().map(|&c| raw_sizes[c]).collect(),
    }
}

/// Induced subgraph on the largest component, with the old id -> new id map.
pub fn giant_component<T: Scalar, G: GraphView<T>>(
    g: &G,
) -> Result<(Graph<T>, Vec<Option<VertexId>>), GraphError> {
    if g.vertex_count() == 0 {
        return Err(GraphError::EmptyGraph);
    }
    let labeling = connected_components(g);
    let keep = labeling.members(0);
    Ok(induced_subgraph(g, &keep))
}

pub fn degree<T: Scalar, G: GraphView<T>>(g: &G, v: VertexId) -> Result<usize, GraphError> {
    if !g.contains(v) {
        return Err(GraphError::UnknownVertex(v));
    }
    Ok(g.degree(v))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn planar(n: usize, edges: &[(u32, u32, f64)]) -> Graph<f64> {
        let mut b = GraphBuilder::new(Metric::Planar);
        for i in 0..n {
            b.add_vertex(i as u64, [i as f64, 0.0]).unwrap();
        }
        for &(u, v, w) in edges {
            b.add_edge(VertexId(u), VertexId(v), w).unwrap();
        }
        b.build()
    }

    /// Vertices 1..=6 of the two-component figure, stored at ids 0..=5.
    fn two_component_figure() -> Graph<f64> {
        planar(6, &[(0, 1, 1.0), (1, 4, 1.0), (3, 4, 1.0), (0, 3, 1.0), (2, 5, 1.0)])
    }

    #[test]
    fn components_of_figure() {
        let g = two_component_figure();
        let c = connected_components(&g);
        assert_eq!(c.sizes(), &[4, 2]);
        assert_eq!(c.members(0), vec![VertexId(0), VertexId(1), VertexId(3), VertexId(4)]);
        assert_eq!(c.members(1), vec![VertexId(2), VertexId(5)]);
    }

    #[test]
    fn components_trivial_cases() {
        let empty = Graph::<f64>::empty(Metric::Planar);
        assert_eq!(connected_components(&empty).count(), 0);
        let single = planar(1, &[]);
        assert_eq!(connected_components(&single).sizes(), &[1]);
    }

    #[test]
    fn giant_of_figure() {
        let g = two_component_figure();
        let (giant, map) = giant_component(&g).unwrap();
        assert_eq!(giant.vertex_count(), 4);
        assert_eq!(giant.edge_count(), 4);
        assert_eq!(giant.labels(), &[0, 1, 3, 4]);
        assert_eq!(map[2], None);
        assert_eq!(map[3], Some(VertexId(2)));
        assert_eq!(connected_components(&giant).count(), 1);
    }

    #[test]
    fn giant_of_connected_graph_is_a_copy() {
        let g = planar(3, &[(0, 1, 1.0), (1, 2, 2.0)]);
        let (giant, _) = giant_component(&g).unwrap();
        assert_eq!(giant, g);
    }

    #[test]
    fn giant_of_empty_graph_fails() {
        let empty = Graph::<f64>::empty(Metric::Planar);
        assert_eq!(giant_component(&empty).unwrap_err(), GraphError::EmptyGraph);
    }

    #[test]
    fn giant_tie_goes_to_smallest_id() {
        // components {0,3} and {1,2}: equal size, 0 is the smallest id
        let a = planar(4, &[(0, 3, 1.0), (1, 2, 1.0)]);
        // components {0,1} and {2,3} with the edge insertion order reversed
        let b = planar(4, &[(2, 3, 1.0), (0, 1, 1.0)]);
        for (g, expected) in [(a, vec![0, 3]), (b, vec![0, 1])] {
            // brute-force scan: the component holding the minimum id among the largest ones
            let labels = connected_components(&g);
            let max = labels.sizes().iter().copied().max().unwrap();
            let brute = (0..labels.count())
                .filter(|&c| labels.sizes()[c] == max)
                .map(|c| labels.members(c))
                .min_by_key(|m| m[0])
                .unwrap();
            let (giant, _) = giant_component(&g).unwrap();
            assert_eq!(giant.labels(), expected.as_slice());
            assert_eq!(brute.iter().map(|v| v.0 as u64).collect::<Vec<_>>(), expected);
        }
    }

    #[test]
    fn degree_examples() {
        let isolated = planar(1, &[]);
        assert_eq!(degree(&isolated, VertexId(0)), Ok(0));
        let star = planar(6, &[(0, 1, 1.0), (0, 2, 1.0), (0, 3, 1.0), (0, 4, 1.0), (0, 5, 1.0)]);
        assert_eq!(degree(&star, VertexId(0)), Ok(5));
        let triangle = planar(3, &[(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0)]);
        for v in 0..3 {
            assert_eq!(degree(&triangle, VertexId(v)), Ok(2));
        }
        assert_eq!(degree(&triangle, VertexId(7)), Err(GraphError::UnknownVertex(VertexId(7))));
    }

    #[test]
    fn builder_rejects_bad_edges() {
        let mut b = GraphBuilder::<f64>::new(Metric::Planar);
        let a = b.add_vertex(10, [0.0, 0.0]).unwrap();
        let c = b.add_vertex(11, [1.0, 0.0]).unwrap();
        assert_eq!(b.add_edge(a, a, 1.0), Err(GraphError::SelfLoop(a)));
        assert!(matches!(b.add_edge(a, c, 0.0), Err(GraphError::InvalidWeight { .. })));
        assert!(matches!(b.add_edge(a, c, f64::INFINITY), Err(GraphError::InvalidWeight { .. })));
        assert_eq!(b.add_vertex(10, [2.0, 0.0]), Err(GraphError::DuplicateLabel(10)));
        let mut geo = GraphBuilder::<f64>::new(Metric::Geographic);
        assert_eq!(geo.add_vertex(1, [95.0, 0.0]), Err(GraphError::InvalidPosition(1)));
    }

    #[test]
    fn parallel_edges_keep_minimum() {
        let g = planar(2, &[(0, 1, 5.0), (1, 0, 2.0), (0, 1, 3.0)]);
        assert_eq!(g.edge_count(), 1);
        assert_eq!(g.weight(VertexId(0), VertexId(1)), Some(2.0));
        assert_eq!(g.weight(VertexId(1), VertexId(0)), Some(2.0));
    }

    fn union_find_components(n: usize, edges: &[(u32, u32)]) -> Vec<usize> {
        fn find(p: &mut [usize], x: usize) -> usize {
            let mut r = x;
            while p[r] != r {
                r = p[r];
            }
            let mut x = x;
            while p[x] != r {
                let next = p[x];
                p[x] = r;
                x = next;
            }
            r
        }
        let mut parent: Vec<usize> = (0..n).collect();
        for &(u, v) in edges {
            let (a, b) = (find(&mut parent, u as usize), find(&mut parent, v as usize));
            if a != b {
                parent[a] = b;
            }
        }
        (0..n).map(|x| find(&mut parent, x)).collect()
    }

    fn random_graph() -> impl Strategy<Value = (usize, Vec<(u32, u32)>)> {
        (1usize..400).prop_flat_map(|n| {
            let e = prop::collection::vec((0..n as u32, 0..n as u32), 0..n);
            (Just(n), e)
        })
    }

    proptest! {
        #[test]
        fn components_match_union_find((n, raw) in random_graph()) {
            let edges: Vec<_> = raw.into_iter().filter(|(u, v)| u != v).collect();
            let weighted: Vec<_> = edges.iter().map(|&(u, v)| (u, v, 1.0)).collect();
            let g = planar(n, &weighted);
            let labels = connected_components(&g);
            let roots = union_find_components(n, &edges);
            for a in 0..n {
                for b in (a + 1)..n.min(a + 40) {
                    let same = labels.component_of(VertexId(a as u32)) == labels.component_of(VertexId(b as u32));
                    prop_assert_eq!(same, roots[a] == roots[b]);
                }
            }
            prop_assert_eq!(labels.sizes().iter().sum::<usize>(), n);
            prop_assert!(labels.sizes().windows(2).all(|w| w[0] >= w[1]));

            let degree_sum: usize = (0..n).map(|v| g.degree(VertexId(v as u32))).sum();
            prop_assert_eq!(degree_sum, 2 * g.edge_count());

            for (u, v, w) in g.edges() {
                prop_assert_eq!(g.weight(v, u), Some(w));
            }

            let (giant, _) = giant_component(&g).unwrap();
            let (again, _) = giant_component(&giant).unwrap();
            prop_assert_eq!(giant.vertex_count(), again.vertex_count());
            prop_assert_eq!(giant.edge_count(), again.edge_count());
        }
    }
}
