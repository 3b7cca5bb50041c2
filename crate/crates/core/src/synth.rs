//! Synthetic benchmark topologies laid out on a square grid.
//!
//! Vertex `i` sits at column `i % side`, row `i / side`, with
//! `side = ceil(sqrt(n))`; all edges are weighted by Euclidean length.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::geo::Metric;
use crate::graph::{Graph, GraphBuilder, VertexId};
use crate::scalar::Scalar;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SynthError {
    #[error("invalid generator spec: {0}")]
    InvalidSpec(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Topology {
    Regular,
    Random,
    SmallWorld,
    ScaleFree,
}

impl Topology {
    pub const ALL: [Topology; 4] = [
        Topology::Regular,
        Topology::Random,
        Topology::SmallWorld,
        Topology::ScaleFree,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Topology::Regular => "regular",
            Topology::Random => "random",
            Topology::SmallWorld => "small-world",
            Topology::ScaleFree => "scale-free",
        }
    }
}

impl fmt::Display for Topology {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Topology {
    type Err = SynthError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().replace('_', "-").as_str() {
            "regular" => Ok(Topology::Regular),
            "random" => Ok(Topology::Random),
            "small-world" | "smallworld" => Ok(Topology::SmallWorld),
            "scale-free" | "scalefree" => Ok(Topology::ScaleFree),
            other => Err(SynthError::InvalidSpec(format!("unknown topology {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthSpec {
    pub topology: Topology,
    pub n: usize,
    /// Rewiring probability (small-world only).
    pub p: f64,
    /// Edges per new vertex (scale-free only).
    pub m: usize,
    /// Meters between adjacent grid positions.
    pub spacing: f64,
    pub seed: u64,
}

impl SynthSpec {
    pub fn new(topology: Topology, n: usize, seed: u64) -> Self {
        Self {
            topology,
            n,
            p: 0.1,
            m: 2,
            spacing: 100.0,
            seed,
        }
    }

    pub fn with_p(mut self, p: f64) -> Self {
        self.p = p;
        self
    }

    pub fn with_m(mut self, m: usize) -> Self {
        self.m = m;
        self
    }

    pub fn with_spacing(mut self, spacing: f64) -> Self {
        self.spacing = spacing;
        self
    }

    pub fn validate(&self) -> Result<(), SynthError> {
        let bad = |msg: String| Err(SynthError::InvalidSpec(msg));
        if self.n < 4 {
            return bad(format!("n = {} (need n >= 4)", self.n));
        }
        if u32::try_from(self.n).is_err() {
            return bad(format!("n = {} exceeds the vertex id range", self.n));
        }
        if !(0.0..=1.0).contains(&self.p) {
            return bad(format!("p = {} outside [0, 1]", self.p));
        }
        if self.m < 1 {
            return bad("m must be >= 1".into());
        }
        if self.topology == Topology::ScaleFree && self.m + 1 > self.n {
            return bad(format!("seed clique of m + 1 = {} exceeds n = {}", self.m + 1, self.n));
        }
        if !(self.spacing.is_finite() && self.spacing > 0.0) {
            return bad(format!("spacing = {} must be positive", self.spacing));
        }
        Ok(())
    }

    pub fn side(&self) -> usize {
        grid_side(self.n)
    }

    fn rng(&self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.seed)
    }
}

pub fn grid_side(n: usize) -> usize {
    let mut side = (n as f64).sqrt() as usize;
    while side * side < n {
        side += 1;
    }
    while side > 0 && (side - 1) * (side - 1) >= n {
        side -= 1;
    }
    side
}

/// Dispatches on `spec.topology`.
pub fn generate<T: Scalar>(spec: &SynthSpec) -> Result<Graph<T>, SynthError> {
    match spec.topology {
        Topology::Regular => gen_regular(spec),
        Topology::Random => gen_random(spec),
        Topology::SmallWorld => gen_small_world(spec),
        Topology::ScaleFree => gen_scale_free(spec),
    }
}

fn grid_builder<T: Scalar>(spec: &SynthSpec) -> GraphBuilder<T> {
    let side = spec.side();
    let spacing = T::lit(spec.spacing);
    let mut builder = GraphBuilder::with_capacity(Metric::Planar, spec.n);
    for i in 0..spec.n {
        let x = T::from_usize_lossy(i % side) * spacing;
        let y = T::from_usize_lossy(i / side) * spacing;
        builder
            .add_vertex(i as u64, [x, y])
            .expect("grid positions are finite and labels distinct");
    }
    builder
}

fn lattice_edges(n: usize, side: usize) -> Vec<(u32, u32)> {
    let mut edges = Vec::with_capacity(2 * n);
    for i in 0..n {
        if (i % side) + 1 < side && i + 1 < n {
            edges.push((i as u32, (i + 1) as u32));
        }
        if i + side < n {
            edges.push((i as u32, (i + side) as u32));
        }
    }
    edges
}

fn finish<T: Scalar>(mut builder: GraphBuilder<T>, edges: &[(u32, u32)]) -> Graph<T> {
    for &(u, v) in edges {
        builder
            .add_straight_edge(VertexId(u), VertexId(v))
            .expect("distinct grid positions give positive weights");
    }
    builder.build()
}

/// 4-neighbour lattice: every vertex links to its right and lower grid neighbours.
pub fn gen_regular<T: Scalar>(spec: &SynthSpec) -> Result<Graph<T>, SynthError> {
    spec.validate()?;
    let edges = lattice_edges(spec.n, spec.side());
    Ok(finish(grid_builder(spec), &edges))
}

/// Uniform random graph with exactly as many edges as the lattice of the same `n`.
pub fn gen_random<T: Scalar>(spec: &SynthSpec) -> Result<Graph<T>, SynthError> {
    spec.validate()?;
    let target = lattice_edges(spec.n, spec.side()).len();
    let mut rng = spec.rng();
    let mut seen = HashSet::with_capacity(target);
    let mut edges = Vec::with_capacity(target);
    while edges.len() < target {
        let u = rng.gen_range(0..spec.n as u32);
        let v = rng.gen_range(0..spec.n as u32);
        if u == v {
            continue;
        }
        let key = (u.min(v), u.max(v));
        if seen.insert(key) {
            edges.push(key);
        }
    }
    Ok(finish(grid_builder(spec), &edges))
}

/// Rewired lattice; see [`gen_small_world_counted`].
pub fn gen_small_world<T: Scalar>(spec: &SynthSpec) -> Result<Graph<T>, SynthError> {
    gen_small_world_counted(spec).map(|(g, _)| g)
}

/// Starts from the lattice and, edge by edge in lattice order, with
/// probability `p` keeps the lower endpoint and moves the other one to a
/// uniformly drawn vertex that is neither the kept endpoint nor already
/// adjacent to it. Returns the graph and the number of rewired edges.
pub fn gen_small_world_counted<T: Scalar>(spec: &SynthSpec) -> Result<(Graph<T>, usize), SynthError> {
    spec.validate()?;
    let n = spec.n;
    let mut edges = lattice_edges(n, spec.side());
    let mut adjacency: Vec<HashSet<u32>> = vec![HashSet::new(); n];
    for &(u, v) in &edges {
        adjacency[u as usize].insert(v);
        adjacency[v as usize].insert(u);
    }
    let mut rng = spec.rng();
    let mut rewired = 0;
    for edge in edges.iter_mut() {
        if !rng.gen_bool(spec.p) {
            continue;
        }
        let (u, old) = *edge;
        if adjacency[u as usize].len() + 1 >= n {
            // u already touches every vertex
            continue;
        }
        let target = loop {
            let w = rng.gen_range(0..n as u32);
            if w != u && !adjacency[u as usize].contains(&w) {
                break w;
            }
        };
        adjacency[u as usize].remove(&old);
        adjacency[old as usize].remove(&u);
        adjacency[u as usize].insert(target);
        adjacency[target as usize].insert(u);
        *edge = (u, target);
        rewired += 1;
    }
    Ok((finish(grid_builder(spec), &edges), rewired))
}

/// Preferential attachment from an `(m + 1)`-clique; vertex `i` is the
/// `i`-th inserted and takes the `i`-th grid position.
pub fn gen_scale_free<T: Scalar>(spec: &SynthSpec) -> Result<Graph<T>, SynthError> {
    spec.validate()?;
    let m = spec.m;
    let mut rng = spec.rng();
    let mut edges = Vec::with_capacity(m * spec.n);
    // every edge endpoint once: sampling from it is degree-proportional
    let mut endpoints: Vec<u32> = Vec::with_capacity(2 * m * spec.n);
    for u in 0..=m as u32 {
        for v in (u + 1)..=m as u32 {
            edges.push((u, v));
            endpoints.extend([u, v]);
        }
    }
    let mut chosen: Vec<u32> = Vec::with_capacity(m);
    for new in (m + 1)..spec.n {
        chosen.clear();
        while chosen.len() < m {
            let t = endpoints[rng.gen_range(0..endpoints.len())];
            if !chosen.contains(&t) {
                chosen.push(t);
            }
        }
        for &t in &chosen {
            edges.push((t, new as u32));
            endpoints.extend([t, new as u32]);
        }
    }
    Ok(finish(grid_builder(spec), &edges))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{connected_components, GraphView};

    fn spec(topology: Topology, n: usize) -> SynthSpec {
        SynthSpec::new(topology, n, 7)
    }

    fn edge_set(g: &Graph<f64>) -> Vec<(VertexId, VertexId, f64)> {
        g.edges().collect()
    }

    #[test]
    fn grid_side_is_ceil_sqrt() {
        assert_eq!(grid_side(9), 3);
        assert_eq!(grid_side(10), 4);
        assert_eq!(grid_side(10_000), 100);
        assert_eq!(grid_side(10_001), 101);
    }

    #[test]
    fn regular_3x3() {
        let g: Graph<f64> = gen_regular(&spec(Topology::Regular, 9)).unwrap();
        assert_eq!(g.edge_count(), 12);
        assert_eq!(g.degree(VertexId(4)), 4);
        for (u, v, w) in g.edges() {
            assert_eq!(w, 100.0, "{u}-{v}");
        }
    }

    #[test]
    fn regular_edge_count_by_enumeration() {
        for n in [9usize, 16, 25, 10_000] {
            let s = grid_side(n);
            // count orthogonally adjacent position pairs directly
            let mut count = 0;
            for a in 0..n {
                for b in [a + 1, a + s] {
                    if b < n {
                        let (ra, ca, rb, cb) = (a / s, a % s, b / s, b % s);
                        if ra.abs_diff(rb) + ca.abs_diff(cb) == 1 {
                            count += 1;
                        }
                    }
                }
            }
            let g: Graph<f64> = gen_regular(&spec(Topology::Regular, n)).unwrap();
            assert_eq!(g.edge_count(), count);
            assert_eq!(count, 2 * s * (s - 1));
        }
    }

    #[test]
    fn random_edge_count_and_determinism() {
        let a: Graph<f64> = gen_random(&spec(Topology::Random, 9)).unwrap();
        let b: Graph<f64> = gen_random(&spec(Topology::Random, 9)).unwrap();
        assert_eq!(a.edge_count(), 12);
        assert_eq!(edge_set(&a), edge_set(&b));
        let c: Graph<f64> = gen_random(&SynthSpec::new(Topology::Random, 400, 8)).unwrap();
        let d: Graph<f64> = gen_random(&SynthSpec::new(Topology::Random, 400, 9)).unwrap();
        assert_ne!(edge_set(&c), edge_set(&d));
    }

    #[test]
    fn small_world_p0_is_regular() {
        let sw: Graph<f64> = gen_small_world(&spec(Topology::SmallWorld, 100).with_p(0.0)).unwrap();
        let reg: Graph<f64> = gen_regular(&spec(Topology::Regular, 100)).unwrap();
        assert_eq!(sw, reg);
    }

    #[test]
    fn small_world_keeps_edge_count() {
        let reg: Graph<f64> = gen_regular(&spec(Topology::Regular, 400)).unwrap();
        for p in [0.1, 0.5, 1.0] {
            let (g, rewired) = gen_small_world_counted::<f64>(&spec(Topology::SmallWorld, 400).with_p(p)).unwrap();
            assert_eq!(g.edge_count(), reg.edge_count());
            assert!(rewired > 0);
            for (u, v, w) in g.edges() {
                assert_eq!(w, g.straight_line(u, v));
            }
        }
    }

    #[test]
    fn scale_free_m1_is_tree() {
        let g: Graph<f64> = gen_scale_free(&spec(Topology::ScaleFree, 5).with_m(1)).unwrap();
        assert_eq!(g.edge_count(), 4);
        assert_eq!(connected_components(&g).count(), 1);
    }

    #[test]
    fn invalid_specs() {
        assert!(gen_regular::<f64>(&spec(Topology::Regular, 3)).is_err());
        assert!(gen_small_world::<f64>(&spec(Topology::SmallWorld, 9).with_p(1.5)).is_err());
        assert!(gen_scale_free::<f64>(&spec(Topology::ScaleFree, 9).with_m(0)).is_err());
        assert!(gen_scale_free::<f64>(&spec(Topology::ScaleFree, 4).with_m(4)).is_err());
        assert!(gen_regular::<f64>(&spec(Topology::Regular, 9).with_spacing(0.0)).is_err());
    }

    #[test]
    fn topology_names_parse() {
        for t in Topology::ALL {
            assert_eq!(t.as_str().parse::<Topology>().unwrap(), t);
        }
        assert_eq!("small_world".parse::<Topology>().unwrap(), Topology::SmallWorld);
    }

    #[test]
    fn single_precision_generation() {
        let g: Graph<f32> = gen_regular(&spec(Topology::Regular, 16)).unwrap();
        assert_eq!(g.edge_count(), 24);
    }
}
