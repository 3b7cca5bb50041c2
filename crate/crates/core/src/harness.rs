//! Batch experiment runner: OD queries × radii × strategies spread over
//! worker threads, one result file per (strategy, radius), a run log, and
//! the post-hoc analysis tables.
//!
//! Result file (`{strategy}_r{radius}.csv`):
//!
//! ```text
//! origin,destination,status,hops,expansions,time,distance,path
//! ```
//!
//! `origin`/`destination` are the query seeds, `time` is microseconds,
//! `distance` is meters (`inf` when no path) and `path` joins vertex labels
//! with `-`, starting at the chosen origin member and ending at the chosen
//! destination member. Each result file has a `.work.csv` sidecar with the
//! search counts and region sizes that `analyze` needs.

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};
use std::fs::{self, File};
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::mpsc;
use std::time::{Duration, Instant};

use chrono::{DateTime, SecondsFormat, Utc};
use thiserror::Error;

use crate::graph::{Graph, GraphView, VertexId};
use crate::ingest::{read_compact_file, read_od_file, IngestError, OdPair};
use crate::search::SearchStatus;
use crate::strategy::{ComparisonRecord, ComparisonSummary, MomdQuery, StrategyKind, StrategyRunner};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("invalid configuration: {0}")]
    ConfigInvalid(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("{path}: {source}")]
    Input {
        path: PathBuf,
        #[source]
        source: IngestError,
    },
    #[error("{path}:{line}: {message}")]
    Format { path: PathBuf, line: usize, message: String },
    #[error("result files do not match: {0}")]
    MismatchedInputs(String),
    #[error("run log went backwards: {0}")]
    LogRegression(String),
    #[error("internal error: {0}")]
    Internal(String),
}

impl HarnessError {
    /// Process exit code: 1 configuration, 2 I/O or unreadable input, 3 internal.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::ConfigInvalid(_) | HarnessError::MismatchedInputs(_) => 1,
            HarnessError::Io { .. } | HarnessError::Input { .. } | HarnessError::Format { .. } => 2,
            HarnessError::LogRegression(_) | HarnessError::Internal(_) => 3,
        }
    }
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> HarnessError + '_ {
    move |source| HarnessError::Io {
        path: path.to_owned(),
        source,
    }
}

/// `floor(total / workers)` items per worker, the remainder going to the last.
pub fn partition_work(total: usize, workers: usize) -> Vec<usize> {
    assert!(workers >= 1, "at least one worker");
    let mut slices = vec![total / workers; workers];
    slices[workers - 1] += total % workers;
    slices
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StrategySelection {
    Collapse,
    BruteForce,
    Both,
}

impl StrategySelection {
    pub fn kinds(self) -> Vec<StrategyKind> {
        match self {
            StrategySelection::Collapse => vec![StrategyKind::Collapse],
            StrategySelection::BruteForce => vec![StrategyKind::BruteForce],
            StrategySelection::Both => StrategyKind::ALL.to_vec(),
        }
    }
}

impl std::str::FromStr for StrategySelection {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "both" => Ok(StrategySelection::Both),
            other => match other.parse::<StrategyKind>()? {
                StrategyKind::Collapse => Ok(StrategySelection::Collapse),
                StrategyKind::BruteForce => Ok(StrategySelection::BruteForce),
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub graph_path: PathBuf,
    pub od_path: PathBuf,
    pub strategy: StrategySelection,
    pub radii: Vec<f64>,
    pub workers: usize,
    /// Written to the run log; the run itself draws no random numbers.
    pub rng_seed: u64,
    pub output_dir: PathBuf,
    /// Only the first `limit` OD pairs are used.
    pub limit: Option<usize>,
    /// Give each worker its own copy of the graph instead of sharing one.
    pub private_copies: bool,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<(), HarnessError> {
        if self.workers == 0 {
            return Err(HarnessError::ConfigInvalid("workers must be at least 1".into()));
        }
        if self.radii.is_empty() {
            return Err(HarnessError::ConfigInvalid("no radii given".into()));
        }
        if let Some(r) = self.radii.iter().find(|r| !r.is_finite() || **r < 0.0) {
            return Err(HarnessError::ConfigInvalid(format!("radius {r} must be finite and non-negative")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum RunState {
    Started,
    Running,
    Error,
    Finished,
}

impl RunState {
    fn rank(self) -> u8 {
        match self {
            RunState::Started => 0,
            RunState::Running => 1,
            RunState::Error | RunState::Finished => 2,
        }
    }
}

impl fmt::Display for RunState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RunState::Started => "Started",
            RunState::Running => "Running",
            RunState::Error => "Error",
            RunState::Finished => "Finished",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LogEntry {
    pub timestamp: DateTime<Utc>,
    pub elapsed: Duration,
    pub state: RunState,
    pub progress: usize,
    pub total: usize,
    pub message: Option<String>,
}

impl fmt::Display for LogEntry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} state={} progress={}/{} elapsed_ms={}",
            self.timestamp.to_rfc3339_opts(SecondsFormat::Millis, true),
            self.state,
            self.progress,
            self.total,
            self.elapsed.as_millis()
        )?;
        if let Some(m) = &self.message {
            write!(f, " {m}")?;
        }
        Ok(())
    }
}

/// Timestamped progress entries; states and progress never move backwards.
#[derive(Debug, Clone)]
pub struct RunLog {
    started: Instant,
    total: usize,
    entries: Vec<LogEntry>,
}

impl RunLog {
    pub fn new(total: usize) -> Self {
        let mut log = Self {
            started: Instant::now(),
            total,
            entries: Vec::new(),
        };
        log.push(RunState::Started, 0, None);
        log
    }

    fn push(&mut self, state: RunState, progress: usize, message: Option<String>) {
        self.entries.push(LogEntry {
            timestamp: Utc::now(),
            elapsed: self.started.elapsed(),
            state,
            progress,
            total: self.total,
            message,
        });
    }

    pub fn entries(&self) -> &[LogEntry] {
        &self.entries
    }

    pub fn state(&self) -> RunState {
        self.entries.last().map_or(RunState::Started, |e| e.state)
    }

    pub fn progress(&self) -> usize {
        self.entries.last().map_or(0, |e| e.progress)
    }

    pub fn total(&self) -> usize {
        self.total
    }

    pub fn record(&mut self, state: RunState, progress: usize, message: Option<String>) -> Result<(), HarnessError> {
        let current = self.state();
        let finished = current.rank() == 2;
        if state.rank() < current.rank() || (finished && state != current) {
            return Err(HarnessError::LogRegression(format!("{current} -> {state}")));
        }
        if progress < self.progress() || progress > self.total {
            return Err(HarnessError::LogRegression(format!(
                "progress {} -> {progress} of {}",
                self.progress(),
                self.total
            )));
        }
        self.push(state, progress, message);
        Ok(())
    }

    pub fn render(&self) -> String {
        self.entries.iter().fold(String::new(), |mut s, e| {
            let _ = writeln!(s, "{e}");
            s
        })
    }
}

pub const RESULT_HEADER: &str = "origin,destination,status,hops,expansions,time,distance,path";
pub const WORK_HEADER: &str = "index,origin,destination,radius,strategy,searches_executed,collapsed_nodes";

/// One line of a result file; vertices are graph labels.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultRecord {
    pub origin: u64,
    pub destination: u64,
    pub status: SearchStatus,
    pub hops: usize,
    pub expansions: usize,
    pub time_us: u64,
    pub distance: f64,
    pub path: Vec<u64>,
}

impl ResultRecord {
    pub fn to_csv(&self) -> String {
        let path: Vec<String> = self.path.iter().map(u64::to_string).collect();
        format!(
            "{},{},{},{},{},{},{},{}",
            self.origin,
            self.destination,
            self.status,
            self.hops,
            self.expansions,
            self.time_us,
            fmt_distance(self.distance),
            path.join("-")
        )
    }

    pub fn parse(line: &str) -> Result<Self, String> {
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 8 {
            return Err(format!("expected 8 fields, found {}", fields.len()));
        }
        let num = |i: usize, what: &str| fields[i].parse::<u64>().map_err(|_| format!("bad {what} {:?}", fields[i]));
        let path = if fields[7].is_empty() {
            Vec::new()
        } else {
            fields[7]
                .split('-')
                .map(|v| v.parse::<u64>().map_err(|_| format!("bad path vertex {v:?}")))
                .collect::<Result<_, _>>()?
        };
        Ok(Self {
            origin: num(0, "origin")?,
            destination: num(1, "destination")?,
            status: SearchStatus::parse(fields[2]).ok_or_else(|| format!("bad status {:?}", fields[2]))?,
            hops: num(3, "hops")? as usize,
            expansions: num(4, "expansions")? as usize,
            time_us: num(5, "time")?,
            distance: fields[6].parse::<f64>().map_err(|_| format!("bad distance {:?}", fields[6]))?,
            path,
        })
    }

    /// The record with its time field zeroed, for run-to-run comparisons.
    pub fn without_time(&self) -> Self {
        Self { time_us: 0, ..self.clone() }
    }
}

fn fmt_distance(d: f64) -> String {
    if d.is_infinite() {
        "inf".to_owned()
    } else {
        format!("{d}")
    }
}

/// Sidecar line: what a strategy did for one query.
#[derive(Debug, Clone, PartialEq)]
pub struct WorkRecord {
    pub index: usize,
    pub origin: u64,
    pub destination: u64,
    pub radius: f64,
    pub strategy: StrategyKind,
    pub searches_executed: usize,
    pub collapsed_nodes: usize,
}

impl WorkRecord {
    pub fn to_csv(&self) -> String {
        format!(
            "{},{},{},{},{},{},{}",
            self.index, self.origin, self.destination, self.radius, self.strategy, self.searches_executed, self.collapsed_nodes
        )
    }

    pub fn parse(line: &str) -> Result<Self, String> {
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 7 {
            return Err(format!("expected 7 fields, found {}", f.len()));
        }
        let bad = |what: &str, v: &str| format!("bad {what} {v:?}");
        Ok(Self {
            index: f[0].parse().map_err(|_| bad("index", f[0]))?,
            origin: f[1].parse().map_err(|_| bad("origin", f[1]))?,
            destination: f[2].parse().map_err(|_| bad("destination", f[2]))?,
            radius: f[3].parse().map_err(|_| bad("radius", f[3]))?,
            strategy: f[4].parse()?,
            searches_executed: f[5].parse().map_err(|_| bad("searches", f[5]))?,
            collapsed_nodes: f[6].parse().map_err(|_| bad("collapsed nodes", f[6]))?,
        })
    }
}

/// All records of one (strategy, radius) job, in query order.
#[derive(Debug, Clone, PartialEq)]
pub struct BatchOutput {
    pub strategy: StrategyKind,
    pub radius: f64,
    pub records: Vec<ResultRecord>,
    pub work: Vec<WorkRecord>,
}

impl BatchOutput {
    pub fn file_stem(&self) -> String {
        result_stem(self.strategy, self.radius)
    }

    /// Sum of the per-query times, microseconds.
    pub fn total_time_us(&self) -> u64 {
        self.records.iter().map(|r| r.time_us).sum()
    }
}

pub fn result_stem(strategy: StrategyKind, radius: f64) -> String {
    format!("{}_r{}", strategy, radius)
}

fn run_query(g: &Graph<f64>, runner: &mut StrategyRunner<f64>, kind: StrategyKind, index: usize, pair: OdPair, radius: f64) -> (ResultRecord, WorkRecord) {
    let origin = g.label(pair.origin);
    let destination = g.label(pair.destination);
    let q = MomdQuery::new(pair.origin, pair.destination, radius);
    let started = Instant::now();
    let outcome = runner.run(g, kind, &q);
    let (record, searches, collapsed) = match outcome {
        Ok(r) => (
            ResultRecord {
                origin,
                destination,
                status: r.search.status,
                hops: r.search.hops,
                expansions: r.search.expansions,
                time_us: r.search.elapsed.as_micros() as u64,
                distance: r.search.distance,
                path: r.search.path.iter().map(|&v| g.label(v)).collect(),
            },
            r.searches_executed,
            r.collapsed_node_count,
        ),
        Err(_) => (
            ResultRecord {
                origin,
                destination,
                status: SearchStatus::Error,
                hops: 0,
                expansions: 0,
                time_us: started.elapsed().as_micros() as u64,
                distance: f64::INFINITY,
                path: Vec::new(),
            },
            0,
            0,
        ),
    };
    let work = WorkRecord {
        index,
        origin,
        destination,
        radius,
        strategy: kind,
        searches_executed: searches,
        collapsed_nodes: collapsed,
    };
    (record, work)
}

/// Runs every (radius, strategy) job over `pairs`.
///
/// Each job hands contiguous slices (see [`partition_work`]) to `workers`
/// threads; the coordinator gathers their records through a channel and
/// puts them back in input order. `log` receives one progress entry per
/// finished slice.
pub fn run_batch(
    g: &Graph<f64>,
    pairs: &[OdPair],
    strategies: &[StrategyKind],
    radii: &[f64],
    workers: usize,
    private_copies: bool,
    log: &mut RunLog,
) -> Result<Vec<BatchOutput>, HarnessError> {
    if workers == 0 {
        return Err(HarnessError::ConfigInvalid("workers must be at least 1".into()));
    }
    let slices = partition_work(pairs.len(), workers);
    let mut outputs = Vec::new();
    let mut progress = log.progress();
    for &radius in radii {
        for &kind in strategies {
            let mut slots: Vec<Option<(ResultRecord, WorkRecord)>> = vec![None; pairs.len()];
            let (tx, rx) = mpsc::channel::<(usize, Vec<(ResultRecord, WorkRecord)>)>();
            std::thread::scope(|scope| -> Result<(), HarnessError> {
                let mut start = 0;
                for &count in &slices {
                    let tx = tx.clone();
                    let chunk = &pairs[start..start + count];
                    let offset = start;
                    start += count;
                    scope.spawn(move || {
                        let copy;
                        let graph = if private_copies {
                            copy = g.clone();
                            &copy
                        } else {
                            g
                        };
                        let mut runner = StrategyRunner::new();
                        let records = chunk
                            .iter()
                            .enumerate()
                            .map(|(i, &pair)| run_query(graph, &mut runner, kind, offset + i, pair, radius))
                            .collect();
                        let _ = tx.send((offset, records));
                    });
                }
                drop(tx);
                for (offset, records) in rx {
                    progress += records.len();
                    for (i, r) in records.into_iter().enumerate() {
                        slots[offset + i] = Some(r);
                    }
                    log.record(RunState::Running, progress, Some(format!("{kind} r={radius}")))?;
                }
                Ok(())
            })?;
            let mut records = Vec::with_capacity(pairs.len());
            let mut work = Vec::with_capacity(pairs.len());
            for slot in slots {
                let (r, w) = slot.ok_or_else(|| HarnessError::Internal("a worker did not report".into()))?;
                records.push(r);
                work.push(w);
            }
            let failed = records.iter().filter(|r| r.status == SearchStatus::Error).count();
            if failed > 0 {
                log.record(RunState::Running, progress, Some(format!("{kind} r={radius}: {failed} queries failed")))?;
            }
            outputs.push(BatchOutput { strategy: kind, radius, records, work });
        }
    }
    Ok(outputs)
}

pub fn write_batch(out: &BatchOutput, dir: &Path) -> Result<(PathBuf, PathBuf), HarnessError> {
    let result_path = dir.join(format!("{}.csv", out.file_stem()));
    let work_path = dir.join(format!("{}.work.csv", out.file_stem()));
    write_lines(&result_path, RESULT_HEADER, out.records.iter().map(ResultRecord::to_csv))?;
    write_lines(&work_path, WORK_HEADER, out.work.iter().map(WorkRecord::to_csv))?;
    Ok((result_path, work_path))
}

fn write_lines(path: &Path, header: &str, lines: impl Iterator<Item = String>) -> Result<(), HarnessError> {
    let file = File::create(path).map_err(io_err(path))?;
    let mut w = BufWriter::new(file);
    writeln!(w, "{header}").map_err(io_err(path))?;
    for line in lines {
        writeln!(w, "{line}").map_err(io_err(path))?;
    }
    w.flush().map_err(io_err(path))
}

fn read_lines<R>(path: &Path, header: &str, parse: impl Fn(&str) -> Result<R, String>) -> Result<Vec<R>, HarnessError> {
    let file = File::open(path).map_err(io_err(path))?;
    let mut rows = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(io_err(path))?;
        let format = |message: String| HarnessError::Format {
            path: path.to_owned(),
            line: i + 1,
            message,
        };
        if i == 0 {
            if line.trim() != header {
                return Err(format(format!("expected header {header:?}")));
            }
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        rows.push(parse(line.trim_end()).map_err(format)?);
    }
    if rows.is_empty() && fs::metadata(path).map(|m| m.len() == 0).unwrap_or(false) {
        return Err(HarnessError::Format {
            path: path.to_owned(),
            line: 1,
            message: "empty file".into(),
        });
    }
    Ok(rows)
}

pub fn read_results(path: &Path) -> Result<Vec<ResultRecord>, HarnessError> {
    read_lines(path, RESULT_HEADER, ResultRecord::parse)
}

pub fn read_work(path: &Path) -> Result<Vec<WorkRecord>, HarnessError> {
    read_lines(path, WORK_HEADER, WorkRecord::parse)
}

#[derive(Debug)]
pub struct ExperimentOutcome {
    pub outputs: Vec<BatchOutput>,
    pub files: Vec<PathBuf>,
    pub log: RunLog,
    pub log_path: PathBuf,
}

/// Loads the graph and OD pairs named in `cfg`, runs every job and writes
/// the result files plus `run.log` into `cfg.output_dir`.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentOutcome, HarnessError> {
    cfg.validate()?;
    let g: Graph<f64> = read_compact_file(&cfg.graph_path).map_err(|source| input_err(&cfg.graph_path, source))?;
    let mut pairs = read_od_file(&g, &cfg.od_path).map_err(|source| input_err(&cfg.od_path, source))?;
    if let Some(limit) = cfg.limit {
        pairs.truncate(limit);
    }
    fs::create_dir_all(&cfg.output_dir).map_err(io_err(&cfg.output_dir))?;
    let strategies = cfg.strategy.kinds();
    let mut log = RunLog::new(pairs.len() * strategies.len() * cfg.radii.len());
    log.record(
        RunState::Started,
        0,
        Some(format!(
            "graph={} od={} pairs={} workers={} seed={}",
            cfg.graph_path.display(),
            cfg.od_path.display(),
            pairs.len(),
            cfg.workers,
            cfg.rng_seed
        )),
    )?;
    let log_path = cfg.output_dir.join("run.log");
    let result = run_batch(&g, &pairs, &strategies, &cfg.radii, cfg.workers, cfg.private_copies, &mut log).and_then(|outputs| {
        let mut files = Vec::new();
        for out in &outputs {
            let (r, w) = write_batch(out, &cfg.output_dir)?;
            files.push(r);
            files.push(w);
        }
        Ok((outputs, files))
    });
    let outcome = match result {
        Ok((outputs, files)) => {
            let progress = log.progress();
            log.record(RunState::Finished, progress, None)?;
            Ok((outputs, files))
        }
        Err(e) => {
            let progress = log.progress();
            log.record(RunState::Error, progress, Some(e.to_string()))?;
            Err(e)
        }
    };
    fs::write(&log_path, log.render()).map_err(io_err(&log_path))?;
    let (outputs, files) = outcome?;
    Ok(ExperimentOutcome { outputs, files, log, log_path })
}

fn input_err(path: &Path, source: IngestError) -> HarnessError {
    match source {
        IngestError::Io(source) => HarnessError::Io {
            path: path.to_owned(),
            source,
        },
        source => HarnessError::Input {
            path: path.to_owned(),
            source,
        },
    }
}

/// One query that both strategies answered.
#[derive(Debug, Clone, PartialEq)]
pub struct ComparedQuery {
    pub radius: f64,
    /// Position in the result files.
    pub index: usize,
    pub origin: u64,
    pub destination: u64,
    pub record: ComparisonRecord<f64>,
}

/// One row of the per-radius summary table.
#[derive(Debug, Clone, PartialEq)]
pub struct RadiusSummary {
    pub radius: f64,
    pub collapse_total_time_us: u64,
    pub brute_force_total_time_us: u64,
    pub total_collapsed_nodes: usize,
    pub collapse_searches: usize,
    pub brute_force_searches: usize,
    pub collapse_expansions: usize,
    pub brute_force_expansions: usize,
    pub comparison: ComparisonSummary,
}

pub const SUMMARY_HEADER: &str = "radius,queries,excluded,collapse_total_time_us,collapse_log10_total_time,brute_force_total_time_us,brute_force_log10_total_time,total_collapsed_nodes,accuracy,max_error,mean_error_all,mean_error_nonoptimal,collapse_searches,brute_force_searches,collapse_expansions,brute_force_expansions";
pub const COMPARISON_HEADER: &str = "radius,index,origin,destination,optimal_distance,collapse_distance,error,is_optimal";

fn log10_time(us: u64) -> f64 {
    if us == 0 {
        0.0
    } else {
        (us as f64).log10()
    }
}

impl RadiusSummary {
    pub fn to_csv(&self) -> String {
        let c = &self.comparison;
        format!(
            "{},{},{},{},{:.6},{},{:.6},{},{:.6},{:.6},{:.6},{:.6},{},{},{},{}",
            self.radius,
            c.queries,
            c.excluded,
            self.collapse_total_time_us,
            log10_time(self.collapse_total_time_us),
            self.brute_force_total_time_us,
            log10_time(self.brute_force_total_time_us),
            self.total_collapsed_nodes,
            c.accuracy,
            c.max_error,
            c.mean_error_all,
            c.mean_error_nonoptimal,
            self.collapse_searches,
            self.brute_force_searches,
            self.collapse_expansions,
            self.brute_force_expansions
        )
    }
}

/// Pairs up collapse and brute-force outputs of equal radius and compares them.
pub fn analyze_batches(collapse: &[BatchOutput], brute: &[BatchOutput]) -> Result<(Vec<RadiusSummary>, Vec<ComparedQuery>), HarnessError> {
    let key = |r: f64| r.to_bits();
    let mut by_radius: BTreeMap<u64, (Option<&BatchOutput>, Option<&BatchOutput>)> = BTreeMap::new();
    for b in collapse {
        if b.strategy != StrategyKind::Collapse {
            return Err(HarnessError::MismatchedInputs(format!("{} given where collapse results were expected", b.file_stem())));
        }
        by_radius.entry(key(b.radius)).or_default().0 = Some(b);
    }
    for b in brute {
        if b.strategy != StrategyKind::BruteForce {
            return Err(HarnessError::MismatchedInputs(format!("{} given where brute-force results were expected", b.file_stem())));
        }
        by_radius.entry(key(b.radius)).or_default().1 = Some(b);
    }
    let mut ordered: Vec<_> = by_radius.into_values().collect();
    ordered.sort_by(|a, b| {
        let r = |x: &(Option<&BatchOutput>, Option<&BatchOutput>)| x.0.or(x.1).map_or(0.0, |o| o.radius);
        r(a).total_cmp(&r(b))
    });

    let mut summaries = Vec::new();
    let mut tables = Vec::new();
    for pair in ordered {
        let (Some(c), Some(b)) = pair else {
            let only = pair.0.or(pair.1).expect("entry has one side");
            return Err(HarnessError::MismatchedInputs(format!("no counterpart for {}", only.file_stem())));
        };
        let seeds = |o: &BatchOutput| o.records.iter().map(|r| (r.origin, r.destination)).collect::<Vec<_>>();
        if seeds(c) != seeds(b) {
            return Err(HarnessError::MismatchedInputs(format!("query sets of {} and {} differ", c.file_stem(), b.file_stem())));
        }
        let mut records = Vec::new();
        let mut excluded = 0;
        for (i, (rc, rb)) in c.records.iter().zip(&b.records).enumerate() {
            if rc.status.has_path() && rb.status.has_path() {
                // vertex ids are not recoverable from labels alone; the
                // comparison only needs the distances
                let q = MomdQuery::new(VertexId(0), VertexId(0), c.radius);
                let record = ComparisonRecord::new(q, rb.distance, rc.distance);
                records.push(record.clone());
                tables.push(ComparedQuery {
                    radius: c.radius,
                    index: i,
                    origin: rc.origin,
                    destination: rc.destination,
                    record,
                });
            } else {
                excluded += 1;
            }
        }
        let comparison = ComparisonSummary::from_records(&records, excluded);
        summaries.push(RadiusSummary {
            radius: c.radius,
            collapse_total_time_us: c.total_time_us(),
            brute_force_total_time_us: b.total_time_us(),
            total_collapsed_nodes: c.work.iter().map(|w| w.collapsed_nodes).sum(),
            collapse_searches: c.work.iter().map(|w| w.searches_executed).sum(),
            brute_force_searches: b.work.iter().map(|w| w.searches_executed).sum(),
            collapse_expansions: c.records.iter().map(|r| r.expansions).sum(),
            brute_force_expansions: b.records.iter().map(|r| r.expansions).sum(),
            comparison,
        });
    }
    Ok((summaries, tables))
}

/// Loads one result file and its sidecar. The radius comes from the sidecar,
/// or from the file name when the file holds no records.
pub fn load_batch(path: &Path) -> Result<BatchOutput, HarnessError> {
    let records = read_results(path)?;
    let work_path = path.with_extension("work.csv");
    let work = read_work(&work_path)?;
    if work.len() != records.len() {
        return Err(HarnessError::MismatchedInputs(format!(
            "{} has {} records but its sidecar has {}",
            path.display(),
            records.len(),
            work.len()
        )));
    }
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or_default();
    let from_name = stem.rsplit_once("_r").and_then(|(kind, r)| Some((kind.parse::<StrategyKind>().ok()?, r.parse::<f64>().ok()?)));
    let (strategy, radius) = match (work.first(), from_name) {
        (Some(w), _) => (w.strategy, w.radius),
        (None, Some(k)) => k,
        (None, None) => {
            return Err(HarnessError::Format {
                path: path.to_owned(),
                line: 1,
                message: "cannot tell strategy and radius of an empty file".into(),
            })
        }
    };
    Ok(BatchOutput { strategy, radius, records, work })
}

/// Result files named by `input`: the file itself, or every
/// `{strategy}_r*.csv` inside a directory.
pub fn collect_result_files(input: &Path, strategy: StrategyKind) -> Result<Vec<PathBuf>, HarnessError> {
    if !input.is_dir() {
        return Ok(vec![input.to_owned()]);
    }
    let prefix = format!("{strategy}_r");
    let mut files: Vec<PathBuf> = fs::read_dir(input)
        .map_err(io_err(input))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            let name = p.file_name().and_then(|n| n.to_str()).unwrap_or_default();
            name.starts_with(&prefix) && name.ends_with(".csv") && !name.ends_with(".work.csv")
        })
        .collect();
    files.sort();
    if files.is_empty() {
        return Err(HarnessError::ConfigInvalid(format!("no {strategy} result files in {}", input.display())));
    }
    Ok(files)
}

/// Reads paired result files and writes `summary.csv` and `comparisons.csv`
/// into `out_dir`.
pub fn analyze(collapse_inputs: &[PathBuf], brute_inputs: &[PathBuf], out_dir: &Path) -> Result<Vec<RadiusSummary>, HarnessError> {
    let load = |inputs: &[PathBuf], kind| -> Result<Vec<BatchOutput>, HarnessError> {
        let mut batches = Vec::new();
        for input in inputs {
            for file in collect_result_files(input, kind)? {
                batches.push(load_batch(&file)?);
            }
        }
        Ok(batches)
    };
    let collapse = load(collapse_inputs, StrategyKind::Collapse)?;
    let brute = load(brute_inputs, StrategyKind::BruteForce)?;
    let (summaries, tables) = analyze_batches(&collapse, &brute)?;
    fs::create_dir_all(out_dir).map_err(io_err(out_dir))?;
    write_lines(&out_dir.join("summary.csv"), SUMMARY_HEADER, summaries.iter().map(RadiusSummary::to_csv))?;
    let rows = tables.iter().map(|q| {
        format!(
            "{},{},{},{},{},{},{},{}",
            q.radius,
            q.index,
            q.origin,
            q.destination,
            q.record.optimal_distance,
            q.record.collapse_distance,
            q.record.error,
            q.record.is_optimal
        )
    });
    write_lines(&out_dir.join("comparisons.csv"), COMPARISON_HEADER, rows)?;
    Ok(summaries)
}
