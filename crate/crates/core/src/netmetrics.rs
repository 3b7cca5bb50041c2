//! Complex-network measurements used to tell topologies apart.

use std::collections::{BTreeMap, VecDeque};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::graph::{GraphView, VertexId};
use crate::scalar::Scalar;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MetricsError {
    #[error("graph has no vertices")]
    EmptyGraph,
    #[error("no path between {0} and {1}")]
    Disconnected(VertexId, VertexId),
    #[error("need at least one sampled pair and two vertices")]
    InvalidSample,
}

fn degrees<T: Scalar, G: GraphView<T>>(g: &G) -> Result<Vec<usize>, MetricsError> {
    if g.vertex_count() == 0 {
        return Err(MetricsError::EmptyGraph);
    }
    Ok(g.vertex_ids().into_iter().map(|v| g.degree(v)).collect())
}

/// Shannon entropy of the degree distribution divided by the log of the
/// number of distinct degrees, so a single degree class gives 0.
pub fn degree_entropy<T: Scalar, G: GraphView<T>>(g: &G) -> Result<f64, MetricsError> {
    let degrees = degrees(g)?;
    let mut counts: BTreeMap<usize, usize> = BTreeMap::new();
    for d in &degrees {
        *counts.entry(*d).or_default() += 1;
    }
    if counts.len() < 2 {
        return Ok(0.0);
    }
    let n = degrees.len() as f64;
    let h: f64 = counts
        .values()
        .map(|&c| {
            let p = c as f64 / n;
            -p * p.ln()
        })
        .sum();
    Ok((h / (counts.len() as f64).ln()).clamp(0.0, 1.0))
}

/// Mean local clustering `2n / (k (k - 1))`; vertices with `k < 2` count as 0.
pub fn clustering_coefficient<T: Scalar, G: GraphView<T>>(g: &G) -> Result<f64, MetricsError> {
    if g.vertex_count() == 0 {
        return Err(MetricsError::EmptyGraph);
    }
    let mut mark = vec![false; g.id_bound()];
    let mut neighbors = Vec::new();
    let mut total = 0.0;
    for v in g.vertex_ids() {
        neighbors.clear();
        g.for_each_neighbor(v, |u, _| neighbors.push(u));
        let k = neighbors.len();
        if k < 2 {
            continue;
        }
        for u in &neighbors {
            mark[u.index()] = true;
        }
        let mut links = 0usize;
        for &u in &neighbors {
            g.for_each_neighbor(u, |x, _| {
                if mark[x.index()] {
                    links += 1;
                }
            });
        }
        for u in &neighbors {
            mark[u.index()] = false;
        }
        // every neighbour-neighbour edge was seen from both ends
        total += links as f64 / (k * (k - 1)) as f64;
    }
    Ok(total / g.vertex_count() as f64)
}

fn hop_distance<T: Scalar, G: GraphView<T>>(g: &G, from: VertexId, to: VertexId, depth: &mut [u32], queue: &mut VecDeque<VertexId>) -> Option<u32> {
    if from == to {
        return Some(0);
    }
    depth.iter_mut().for_each(|d| *d = u32::MAX);
    queue.clear();
    depth[from.index()] = 0;
    queue.push_back(from);
    while let Some(v) = queue.pop_front() {
        let next = depth[v.index()] + 1;
        let mut hit = false;
        g.for_each_neighbor(v, |u, _| {
            if depth[u.index()] == u32::MAX {
                depth[u.index()] = next;
                hit |= u == to;
                queue.push_back(u);
            }
        });
        if hit {
            return Some(next);
        }
    }
    None
}

/// Mean unweighted hop count over `pairs` uniformly drawn ordered pairs of
/// distinct vertices.
pub fn mean_path_length_sampled<T: Scalar, G: GraphView<T>>(g: &G, pairs: usize, seed: u64) -> Result<f64, MetricsError> {
    let ids = g.vertex_ids();
    if ids.is_empty() {
        return Err(MetricsError::EmptyGraph);
    }
    if pairs == 0 || ids.len() < 2 {
        return Err(MetricsError::InvalidSample);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sampled: Vec<(VertexId, VertexId)> = (0..pairs)
        .map(|_| {
            let a = rng.gen_range(0..ids.len());
            let mut b = rng.gen_range(0..ids.len() - 1);
            if b >= a {
                b += 1;
            }
            (ids[a], ids[b])
        })
        .collect();
    mean_path_length_over(g, &sampled)
}

/// Mean hop count over the given pairs.
pub fn mean_path_length_over<T: Scalar, G: GraphView<T>>(g: &G, pairs: &[(VertexId, VertexId)]) -> Result<f64, MetricsError> {
    if pairs.is_empty() {
        return Err(MetricsError::InvalidSample);
    }
    let mut depth = vec![u32::MAX; g.id_bound()];
    let mut queue = VecDeque::new();
    let mut total = 0u64;
    for &(a, b) in pairs {
        total += u64::from(hop_distance(g, a, b, &mut depth, &mut queue).ok_or(MetricsError::Disconnected(a, b))?);
    }
    Ok(total as f64 / pairs.len() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ProfileConfig {
    /// Pairs to sample for the mean path length; 0 skips it.
    pub path_pairs: usize,
    pub seed: u64,
}

impl Default for ProfileConfig {
    fn default() -> Self {
        Self { path_pairs: 1000, seed: 0 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TopologyProfile {
    pub name: String,
    pub vertices: usize,
    pub edges: usize,
    pub degree_entropy: f64,
    pub clustering_coefficient: f64,
    pub max_degree: usize,
    /// Lower median.
    pub median_degree: usize,
    /// `max_degree / max(median_degree, 1)`.
    pub hub_ratio: f64,
    pub mean_path_length: Option<f64>,
    pub sample_size: usize,
}

impl TopologyProfile {
    pub const CSV_HEADER: &'static str =
        "name,n,m,entropy,clustering,max_degree,median_degree,hub_ratio,mean_path_length,sample_size";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{:.6},{:.6},{},{},{:.6},{},{}",
            self.name.replace(',', "_"),
            self.vertices,
            self.edges,
            self.degree_entropy,
            self.clustering_coefficient,
            self.max_degree,
            self.median_degree,
            self.hub_ratio,
            self.mean_path_length.map(|m| format!("{m:.6}")).unwrap_or_default(),
            self.sample_size
        )
    }
}

pub fn profile<T: Scalar, G: GraphView<T>>(g: &G, name: &str, config: ProfileConfig) -> Result<TopologyProfile, MetricsError> {
    let mut degrees = degrees(g)?;
    degrees.sort_unstable();
    let max_degree = *degrees.last().expect("non-empty");
    let median_degree = degrees[(degrees.len() - 1) / 2];
    let mean_path_length = if config.path_pairs > 0 && g.vertex_count() > 1 {
        Some(mean_path_length_sampled(g, config.path_pairs, config.seed)?)
    } else {
        None
    };
    Ok(TopologyProfile {
        name: name.to_owned(),
        vertices: g.vertex_count(),
        edges: g.edge_count(),
        degree_entropy: degree_entropy(g)?,
        clustering_coefficient: clustering_coefficient(g)?,
        max_degree,
        median_degree,
        hub_ratio: max_degree as f64 / median_degree.max(1) as f64,
        sample_size: if mean_path_length.is_some() { config.path_pairs } else { 0 },
        mean_path_length,
    })
}
