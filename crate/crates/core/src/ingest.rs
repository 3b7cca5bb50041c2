//! OSM XML ingestion, the compact graph file format and OD pair files.
//!
//! Compact graph file, space separated, one record per line:
//!
//! ```text
//! V E metric
//! id c0 c1        (V lines; lat lon for geographic, x y for planar)
//! u v [w]         (E lines; endpoints by id, weight optional)
//! ```
//!
//! A missing weight is filled with the straight-line distance.

use std::collections::{BTreeMap, HashMap};
use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use quick_xml::events::{BytesStart, Event};
use quick_xml::{Reader, XmlVersion};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::geo::Metric;
use crate::graph::{Graph, GraphBuilder, GraphError, GraphView, VertexId};
use crate::scalar::Scalar;

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("I/O error: {0}")]
    Io(#[from] io::Error),
    #[error("malformed XML: {0}")]
    MalformedXml(String),
    #[error("way {way} references undeclared node {node}")]
    MissingNodeReference { way: i64, node: i64 },
    #[error("format violation at line {line}: {message}")]
    FormatViolation { line: usize, message: String },
    #[error("graph has {0} vertices, at least 2 are needed")]
    GraphTooSmall(usize),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

fn violation(line: usize, message: impl Into<String>) -> IngestError {
    IngestError::FormatViolation {
        line,
        message: message.into(),
    }
}

/// Which `highway=*` ways become edges.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub enum HighwayFilter {
    /// Every way carrying a highway tag.
    #[default]
    Any,
    /// Only the listed highway values (e.g. `residential`, `primary`).
    Only(Vec<String>),
}

impl HighwayFilter {
    fn accepts(&self, value: &str) -> bool {
        match self {
            HighwayFilter::Any => true,
            HighwayFilter::Only(allowed) => allowed.iter().any(|a| a == value),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct OsmOptions {
    pub highway: HighwayFilter,
}

#[derive(Debug, Default)]
struct OsmWay {
    id: i64,
    nodes: Vec<i64>,
    highway: Option<String>,
}

fn attr(e: &BytesStart<'_>, key: &str) -> Result<Option<String>, IngestError> {
    for a in e.attributes() {
        let a = a.map_err(|err| IngestError::MalformedXml(err.to_string()))?;
        if a.key.as_ref() == key {
            let value = a
                .normalized_value(XmlVersion::Implicit1_0)
                .map_err(|err| IngestError::MalformedXml(err.to_string()))?;
            return Ok(Some(value.into_owned()));
        }
    }
    Ok(None)
}

fn required<V: std::str::FromStr>(e: &BytesStart<'_>, key: &str) -> Result<V, IngestError> {
    let raw = attr(e, key)?.ok_or_else(|| {
        IngestError::MalformedXml(format!(
            "<{}> without `{key}` attribute",
            e.name().as_ref()
        ))
    })?;
    raw.parse()
        .map_err(|_| IngestError::MalformedXml(format!("bad `{key}` value {raw:?}")))
}

/// Builds a geographic street graph from OSM XML.
///
/// Vertices are the nodes of accepted highway ways, ordered by OSM id and
/// labelled with it. Consecutive way nodes become edges weighted by haversine
/// distance. Nodes outside the coordinate ranges are dropped with their edges;
/// edges of zero length (distinct nodes at identical coordinates) and repeated
/// consecutive nodes are skipped.
pub fn parse_osm<T: Scalar, R: BufRead>(input: R, options: &OsmOptions) -> Result<Graph<T>, IngestError> {
    let mut reader = Reader::from_reader(input);
    let mut buf = Vec::new();
    let mut nodes: HashMap<i64, [T; 2]> = HashMap::new();
    let mut ways: Vec<OsmWay> = Vec::new();
    let mut current: Option<OsmWay> = None;

    loop {
        let event = reader
            .read_event_into(&mut buf)
            .map_err(|e| IngestError::MalformedXml(format!("at byte {}: {e}", reader.buffer_position())))?;
        match event {
            Event::Start(ref e) | Event::Empty(ref e) => {
                let empty = matches!(event, Event::Empty(_));
                match e.name().as_ref() {
                    "node" => {
                        let id: i64 = required(e, "id")?;
                        let lat: f64 = required(e, "lat")?;
                        let lon: f64 = required(e, "lon")?;
                        nodes.insert(id, [T::lit(lat), T::lit(lon)]);
                    }
                    "way" => {
                        let way = OsmWay {
                            id: required(e, "id")?,
                            ..OsmWay::default()
                        };
                        if empty {
                            ways.push(way);
                        } else {
                            current = Some(way);
                        }
                    }
                    "nd" => {
                        if let Some(way) = current.as_mut() {
                            way.nodes.push(required(e, "ref")?);
                        }
                    }
                    "tag" => {
                        if let Some(way) = current.as_mut() {
                            if attr(e, "k")?.as_deref() == Some("highway") {
                                way.highway = attr(e, "v")?;
                            }
                        }
                    }
                    _ => {}
                }
            }
            Event::End(ref e) if e.name().as_ref() == "way" => {
                if let Some(way) = current.take() {
                    ways.push(way);
                }
            }
            Event::Eof => break,
            _ => {}
        }
        buf.clear();
    }

    let kept: Vec<&OsmWay> = ways
        .iter()
        .filter(|w| w.highway.as_deref().is_some_and(|h| options.highway.accepts(h)))
        .collect();

    let mut used: BTreeMap<i64, [T; 2]> = BTreeMap::new();
    for way in &kept {
        for &node in &way.nodes {
            let pos = *nodes
                .get(&node)
                .ok_or(IngestError::MissingNodeReference { way: way.id, node })?;
            if Metric::Geographic.is_valid_position(pos) {
                used.insert(node, pos);
            }
        }
    }

    let mut builder = GraphBuilder::with_capacity(Metric::Geographic, used.len());
    let mut ids: HashMap<i64, VertexId> = HashMap::with_capacity(used.len());
    for (&node, &pos) in &used {
        // OSM ids are positive; the two's-complement cast keeps any negative
        // (locally created) ids distinct
        ids.insert(node, builder.add_vertex(node as u64, pos)?);
    }
    for way in &kept {
        for pair in way.nodes.windows(2) {
            let (Some(&u), Some(&v)) = (ids.get(&pair[0]), ids.get(&pair[1])) else {
                continue;
            };
            if u == v {
                continue;
            }
            let w = Metric::Geographic.distance(builder.position(u), builder.position(v));
            if w > T::zero() {
                builder.add_edge(u, v, w)?;
            }
        }
    }
    Ok(builder.build())
}

pub fn parse_osm_file<T: Scalar>(path: impl AsRef<Path>, options: &OsmOptions) -> Result<Graph<T>, IngestError> {
    parse_osm(BufReader::new(File::open(path)?), options)
}

pub fn write_compact<T: Scalar, W: Write>(g: &Graph<T>, mut out: W) -> Result<(), IngestError> {
    writeln!(out, "{} {} {}", g.vertex_count(), g.edge_count(), g.metric().as_str())?;
    for (label, pos) in g.labels().iter().zip(g.positions()) {
        writeln!(out, "{} {} {}", label, pos[0], pos[1])?;
    }
    for (u, v, w) in g.edges() {
        writeln!(out, "{} {} {}", g.label(u), g.label(v), w)?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_compact_file<T: Scalar>(g: &Graph<T>, path: impl AsRef<Path>) -> Result<(), IngestError> {
    write_compact(g, BufWriter::new(File::create(path)?))
}

fn field<V: std::str::FromStr>(token: Option<&str>, line: usize, what: &str) -> Result<V, IngestError> {
    let token = token.ok_or_else(|| violation(line, format!("missing {what}")))?;
    token
        .parse()
        .map_err(|_| violation(line, format!("cannot parse {what} from {token:?}")))
}

pub fn read_compact<T: Scalar, R: BufRead>(input: R) -> Result<Graph<T>, IngestError> {
    let mut lines = input.lines().enumerate().map(|(i, l)| (i + 1, l));
    let (line_no, header) = lines.next().ok_or_else(|| violation(1, "empty file"))?;
    let header = header?;
    let mut tokens = header.split_whitespace();
    let vertex_count: usize = field(tokens.next(), line_no, "vertex count")?;
    let edge_count: usize = field(tokens.next(), line_no, "edge count")?;
    let metric_name: String = field(tokens.next(), line_no, "metric")?;
    let metric = Metric::parse(&metric_name)
        .ok_or_else(|| violation(line_no, format!("unknown metric {metric_name:?}")))?;
    if tokens.next().is_some() {
        return Err(violation(line_no, "trailing tokens in header"));
    }

    let mut builder = GraphBuilder::with_capacity(metric, vertex_count);
    let mut read_vertices = 0;
    let mut read_edges = 0;
    for (line_no, line) in lines {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let mut tokens = line.split_whitespace();
        if read_vertices < vertex_count {
            let label: u64 = field(tokens.next(), line_no, "vertex id")?;
            let c0: T = field(tokens.next(), line_no, "coordinate")?;
            let c1: T = field(tokens.next(), line_no, "coordinate")?;
            if tokens.next().is_some() {
                return Err(violation(line_no, "vertex record must have 3 fields"));
            }
            builder
                .add_vertex(label, [c0, c1])
                .map_err(|e| violation(line_no, e.to_string()))?;
            read_vertices += 1;
        } else {
            let u: u64 = field(tokens.next(), line_no, "edge endpoint")?;
            let v: u64 = field(tokens.next(), line_no, "edge endpoint")?;
            let lookup = |label: u64| {
                builder
                    .vertex_by_label(label)
                    .ok_or_else(|| violation(line_no, format!("edge references undeclared vertex {label}")))
            };
            let (u, v) = (lookup(u)?, lookup(v)?);
            let result = match tokens.next() {
                Some(w) => builder.add_edge(u, v, field(Some(w), line_no, "weight")?),
                None => builder.add_straight_edge(u, v),
            };
            result.map_err(|e| violation(line_no, e.to_string()))?;
            if tokens.next().is_some() {
                return Err(violation(line_no, "edge record has more than 3 fields"));
            }
            read_edges += 1;
        }
    }
    if read_vertices != vertex_count || read_edges != edge_count {
        return Err(violation(
            0,
            format!(
                "header declares {vertex_count} vertices and {edge_count} edges, \
                 found {read_vertices} and {read_edges}"
            ),
        ));
    }
    let graph = builder.build();
    if graph.edge_count() != edge_count {
        return Err(violation(0, "duplicate edge records"));
    }
    Ok(graph)
}

pub fn read_compact_file<T: Scalar>(path: impl AsRef<Path>) -> Result<Graph<T>, IngestError> {
    read_compact(BufReader::new(File::open(path)?))
}

/// Writes the `new_id original_label` map produced by dense relabelling.
pub fn write_id_map<W: Write>(labels: &[u64], mut out: W) -> Result<(), IngestError> {
    for (new, old) in labels.iter().enumerate() {
        writeln!(out, "{new} {old}")?;
    }
    out.flush()?;
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct OdPair {
    pub origin: VertexId,
    pub destination: VertexId,
}

/// `n` ordered pairs drawn uniformly among pairs of distinct vertices.
pub fn sample_od_pairs<T: Scalar>(g: &Graph<T>, n: usize, seed: u64) -> Result<Vec<OdPair>, IngestError> {
    let count = g.vertex_count();
    if count < 2 {
        return Err(IngestError::GraphTooSmall(count));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..n)
        .map(|_| {
            let origin = rng.gen_range(0..count);
            let mut destination = rng.gen_range(0..count - 1);
            if destination >= origin {
                destination += 1;
            }
            OdPair {
                origin: VertexId::from_index(origin),
                destination: VertexId::from_index(destination),
            }
        })
        .collect())
}

/// One `origin destination` line per pair, written with vertex labels.
pub fn write_od<T: Scalar, W: Write>(g: &Graph<T>, pairs: &[OdPair], mut out: W) -> Result<(), IngestError> {
    for p in pairs {
        writeln!(out, "{} {}", g.label(p.origin), g.label(p.destination))?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_od_file<T: Scalar>(g: &Graph<T>, pairs: &[OdPair], path: impl AsRef<Path>) -> Result<(), IngestError> {
    write_od(g, pairs, BufWriter::new(File::create(path)?))
}

pub fn read_od<T: Scalar, R: BufRead>(g: &Graph<T>, input: R) -> Result<Vec<OdPair>, IngestError> {
    let index = g.label_index();
    let mut pairs = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let line = line?;
        let line_no = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let mut tokens = line.split_whitespace();
        let mut next = || -> Result<VertexId, IngestError> {
            let label: u64 = field(tokens.next(), line_no, "vertex id")?;
            index
                .get(&label)
                .copied()
                .ok_or_else(|| violation(line_no, format!("vertex {label} not in graph")))
        };
        let origin = next()?;
        let destination = next()?;
        if origin == destination {
            return Err(violation(line_no, "origin equals destination"));
        }
        if tokens.next().is_some() {
            return Err(violation(line_no, "OD record must have 2 fields"));
        }
        pairs.push(OdPair { origin, destination });
    }
    Ok(pairs)
}

pub fn read_od_file<T: Scalar>(g: &Graph<T>, path: impl AsRef<Path>) -> Result<Vec<OdPair>, IngestError> {
    read_od(g, BufReader::new(File::open(path)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geo::{haversine, GeoPoint};

    const ONE_WAY: &str = r#"<?xml version="1.0" encoding="UTF-8"?>
<osm version="0.6">
  <node id="1" lat="-3.7300" lon="-38.5400"/>
  <node id="2" lat="-3.7310" lon="-38.5400"/>
  <node id="3" lat="-3.7310" lon="-38.5390"/>
  <node id="4" lat="-3.7400" lon="-38.5300"/>
  <way id="100">
    <nd ref="1"/><nd ref="2"/><nd ref="3"/>
    <tag k="highway" v="residential"/>
    <tag k="name" v="Rua A &amp; B"/>
  </way>
  <way id="101">
    <nd ref="3"/><nd ref="4"/>
    <tag k="building" v="yes"/>
  </way>
</osm>"#;

    fn parse(xml: &str) -> Result<Graph<f64>, IngestError> {
        parse_osm(xml.as_bytes(), &OsmOptions::default())
    }

    #[test]
    fn one_way_gives_two_haversine_edges() {
        let g = parse(ONE_WAY).unwrap();
        assert_eq!(g.vertex_count(), 3);
        assert_eq!(g.edge_count(), 2);
        assert_eq!(g.labels(), &[1, 2, 3]);
        let p = |lat, lon| GeoPoint { lat, lon };
        let expected = haversine(p(-3.73, -38.54), p(-3.731, -38.54));
        assert_eq!(g.weight(VertexId(0), VertexId(1)), Some(expected));
        assert!(g.weight(VertexId(0), VertexId(2)).is_none());
    }

    #[test]
    fn no_ways_no_edges() {
        let g = parse(r#"<osm><node id="1" lat="0" lon="0"/></osm>"#).unwrap();
        assert_eq!(g.edge_count(), 0);
        assert_eq!(g.vertex_count(), 0);
    }

    #[test]
    fn missing_node_reference() {
        let xml = r#"<osm><node id="1" lat="0" lon="0"/>
            <way id="7"><nd ref="1"/><nd ref="9"/><tag k="highway" v="primary"/></way></osm>"#;
        assert!(matches!(
            parse(xml),
            Err(IngestError::MissingNodeReference { way: 7, node: 9 })
        ));
    }

    #[test]
    fn malformed_xml() {
        assert!(matches!(parse("<osm><node id=\"1\" lat=\"x\" lon=\"0\"/></osm>"), Err(IngestError::MalformedXml(_))));
        assert!(matches!(parse("<osm><way id=\"1\"></node></osm>"), Err(IngestError::MalformedXml(_))));
    }

    #[test]
    fn invalid_positions_are_dropped() {
        let xml = r#"<osm>
            <node id="1" lat="0" lon="0"/><node id="2" lat="95" lon="0"/><node id="3" lat="0.001" lon="0"/>
            <way id="5"><nd ref="1"/><nd ref="2"/><nd ref="3"/><tag k="highway" v="service"/></way></osm>"#;
        let g = parse(xml).unwrap();
        assert_eq!(g.labels(), &[1, 3]);
        assert_eq!(g.edge_count(), 0);
    }

    #[test]
    fn highway_filter() {
        let only = OsmOptions {
            highway: HighwayFilter::Only(vec!["primary".into()]),
        };
        let g: Graph<f64> = parse_osm(ONE_WAY.as_bytes(), &only).unwrap();
        assert_eq!(g.vertex_count(), 0);
    }

    #[test]
    fn compact_round_trip_path() {
        let g = parse(ONE_WAY).unwrap();
        let mut bytes = Vec::new();
        write_compact(&g, &mut bytes).unwrap();
        let text = String::from_utf8(bytes.clone()).unwrap();
        assert!(text.starts_with("3 2 geographic\n"));
        assert!(text.ends_with('\n'));
        let back: Graph<f64> = read_compact(bytes.as_slice()).unwrap();
        assert_eq!(back, g);
    }

    #[test]
    fn compact_count_mismatch() {
        let text = "5 0 planar\n0 0 0\n1 1 0\n2 2 0\n3 3 0\n";
        assert!(matches!(read_compact::<f64, _>(text.as_bytes()), Err(IngestError::FormatViolation { .. })));
        let text = "2 1 planar\n0 0 0\n1 1 0\n";
        assert!(matches!(read_compact::<f64, _>(text.as_bytes()), Err(IngestError::FormatViolation { .. })));
        let text = "2 1 planar\n0 0 0\n1 1 0\n0 5 1\n";
        assert!(matches!(read_compact::<f64, _>(text.as_bytes()), Err(IngestError::FormatViolation { .. })));
        let text = "2 0 euclid\n0 0 0\n1 1 0\n";
        assert!(matches!(read_compact::<f64, _>(text.as_bytes()), Err(IngestError::FormatViolation { .. })));
    }

    #[test]
    fn compact_missing_weight_uses_metric() {
        let text = "2 1 planar\n0 0 0\n1 3 4\n0 1\n";
        let g: Graph<f64> = read_compact(text.as_bytes()).unwrap();
        assert_eq!(g.weight(VertexId(0), VertexId(1)), Some(5.0));
    }

    #[test]
    fn od_sampling() {
        let text = "2 1 planar\n0 0 0\n1 3 4\n0 1\n";
        let g: Graph<f64> = read_compact(text.as_bytes()).unwrap();
        let pairs = sample_od_pairs(&g, 3, 9).unwrap();
        assert_eq!(pairs.len(), 3);
        for p in &pairs {
            assert_ne!(p.origin, p.destination);
        }
        let (mut a, mut b) = (Vec::new(), Vec::new());
        write_od(&g, &sample_od_pairs(&g, 50, 4).unwrap(), &mut a).unwrap();
        write_od(&g, &sample_od_pairs(&g, 50, 4).unwrap(), &mut b).unwrap();
        assert_eq!(a, b);
        assert_eq!(read_od(&g, a.as_slice()).unwrap(), sample_od_pairs(&g, 50, 4).unwrap());

        let single: Graph<f64> = read_compact("1 0 planar\n0 0 0\n".as_bytes()).unwrap();
        assert!(matches!(sample_od_pairs(&single, 1, 0), Err(IngestError::GraphTooSmall(1))));
    }
}
