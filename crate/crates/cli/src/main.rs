use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use momd_core::harness::{analyze, run_experiment, ExperimentConfig, HarnessError, StrategySelection};
use momd_core::ingest::{
    parse_osm_file, read_compact_file, sample_od_pairs, write_compact_file, write_id_map, write_od_file, HighwayFilter,
    IngestError, OsmOptions,
};
use momd_core::netmetrics::{profile, MetricsError, ProfileConfig, TopologyProfile};
use momd_core::synth::{generate, SynthError, SynthSpec, Topology};
use momd_core::{giant_component, Graph64, GraphError, GraphView};

/// Multiple-origin / multiple-destination shortest-path experiments.
#[derive(Debug, Parser)]
#[command(name = "momd", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Build a street graph from OpenStreetMap XML.
    Ingest {
        osm: PathBuf,
        out: PathBuf,
        /// Keep only these highway values (comma separated); default keeps all.
        #[arg(long, value_delimiter = ',')]
        highway: Vec<String>,
    },
    /// Keep the giant component and renumber it densely.
    Clean { input: PathBuf, out: PathBuf },
    /// Sample uniform OD pairs of distinct vertices.
    SampleOd { graph: PathBuf, n: usize, seed: u64, out: PathBuf },
    /// Generate a synthetic topology on a grid layout.
    Gen {
        /// regular, random, small-world or scale-free
        topology: String,
        n: usize,
        seed: u64,
        out: PathBuf,
        /// Rewiring probability (small-world).
        #[arg(long, default_value_t = 0.1)]
        p: f64,
        /// Edges per new vertex (scale-free).
        #[arg(long, default_value_t = 2)]
        m: usize,
        /// Meters between grid neighbours.
        #[arg(long, default_value_t = 100.0)]
        spacing: f64,
    },
    /// Run collapse and/or brute force over an OD file at several radii.
    Run {
        graph: PathBuf,
        od: PathBuf,
        /// collapse, brute_force or both
        #[arg(long, default_value = "both")]
        strategy: String,
        /// Radii in meters, comma separated.
        #[arg(long, value_delimiter = ',', default_value = "50,100,150,200,250")]
        radii: Vec<f64>,
        #[arg(long, default_value_t = 1)]
        workers: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        /// Use only the first N OD pairs.
        #[arg(long)]
        limit: Option<usize>,
        /// Give every worker its own copy of the graph.
        #[arg(long)]
        private_copies: bool,
    },
    /// Print the topology profile of a graph as CSV.
    Profile {
        graph: PathBuf,
        /// Sampled pairs for the mean path length; 0 skips it.
        #[arg(long, default_value_t = 1000)]
        pairs: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Name column; defaults to the file stem.
        #[arg(long)]
        name: Option<String>,
    },
    /// Summarize paired result files per radius.
    Analyze {
        /// Collapse result file or directory.
        collapse: PathBuf,
        /// Brute-force result file or directory.
        brute: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Debug)]
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn config(message: impl Into<String>) -> Self {
        Self { code: 1, message: message.into() }
    }

    fn io(path: &Path, err: impl std::fmt::Display) -> Self {
        Self {
            code: 2,
            message: format!("{}: {err}", path.display()),
        }
    }
}

impl From<HarnessError> for Failure {
    fn from(e: HarnessError) -> Self {
        Self {
            code: e.exit_code() as u8,
            message: e.to_string(),
        }
    }
}

impl From<SynthError> for Failure {
    fn from(e: SynthError) -> Self {
        Failure::config(e.to_string())
    }
}

impl From<MetricsError> for Failure {
    fn from(e: MetricsError) -> Self {
        let code = match e {
            MetricsError::EmptyGraph => 2,
            MetricsError::Disconnected(..) | MetricsError::InvalidSample => 1,
        };
        Self { code, message: e.to_string() }
    }
}

fn ingest_failure(path: &Path) -> impl FnOnce(IngestError) -> Failure + '_ {
    move |e| match e {
        IngestError::GraphTooSmall(_) => Failure::config(format!("{}: {e}", path.display())),
        e => Failure::io(path, e),
    }
}

fn load(path: &Path) -> Result<Graph64, Failure> {
    read_compact_file(path).map_err(ingest_failure(path))
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Ingest { osm, out, highway } => {
            let options = OsmOptions {
                highway: if highway.is_empty() { HighwayFilter::Any } else { HighwayFilter::Only(highway) },
            };
            let g: Graph64 = parse_osm_file(&osm, &options).map_err(ingest_failure(&osm))?;
            write_compact_file(&g, &out).map_err(ingest_failure(&out))?;
            eprintln!("{} vertices, {} edges", g.vertex_count(), g.edge_count());
        }
        Command::Clean { input, out } => {
            let g = load(&input)?;
            let (giant, _) = giant_component(&g).map_err(|e| match e {
                GraphError::EmptyGraph => Failure::io(&input, e),
                e => Failure { code: 3, message: e.to_string() },
            })?;
            let dense = giant.relabel_dense();
            write_compact_file(&dense, &out).map_err(ingest_failure(&out))?;
            let map_path = PathBuf::from(format!("{}.idmap", out.display()));
            let file = File::create(&map_path).map_err(|e| Failure::io(&map_path, e))?;
            write_id_map(giant.labels(), BufWriter::new(file)).map_err(ingest_failure(&map_path))?;
            eprintln!(
                "kept {} of {} vertices, {} edges",
                dense.vertex_count(),
                g.vertex_count(),
                dense.edge_count()
            );
        }
        Command::SampleOd { graph, n, seed, out } => {
            let g = load(&graph)?;
            let pairs = sample_od_pairs(&g, n, seed).map_err(ingest_failure(&graph))?;
            write_od_file(&g, &pairs, &out).map_err(ingest_failure(&out))?;
        }
        Command::Gen { topology, n, seed, out, p, m, spacing } => {
            let topology: Topology = topology.parse()?;
            let spec = SynthSpec::new(topology, n, seed).with_p(p).with_m(m).with_spacing(spacing);
            let g: Graph64 = generate(&spec)?;
            write_compact_file(&g, &out).map_err(ingest_failure(&out))?;
        }
        Command::Run { graph, od, strategy, radii, workers, seed, out, limit, private_copies } => {
            let strategy: StrategySelection = strategy.parse().map_err(Failure::config)?;
            let cfg = ExperimentConfig {
                graph_path: graph,
                od_path: od,
                strategy,
                radii,
                workers,
                rng_seed: seed,
                output_dir: out,
                limit,
                private_copies,
            };
            let outcome = run_experiment(&cfg)?;
            for f in &outcome.files {
                println!("{}", f.display());
            }
        }
        Command::Profile { graph, pairs, seed, name } => {
            let g = load(&graph)?;
            let name = name.unwrap_or_else(|| graph.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default());
            let p = profile(&g, &name, ProfileConfig { path_pairs: pairs, seed })?;
            let stdout = io::stdout();
            let mut out = stdout.lock();
            writeln!(out, "{}", TopologyProfile::CSV_HEADER).and_then(|_| writeln!(out, "{}", p.csv_row())).map_err(|e| Failure::io(Path::new("<stdout>"), e))?;
        }
        Command::Analyze { collapse, brute, out } => {
            let summaries = analyze(&[collapse], &[brute], &out)?;
            eprintln!("{} radii written to {}", summaries.len(), out.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("momd: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
