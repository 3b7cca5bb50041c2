//! Acceptance criteria, one PASS/FAIL line each. Runs as a plain binary so the
//! lines always reach the test output; exits non-zero if any criterion fails.

use std::collections::HashMap;
use std::fs;
use std::path::Path;
use std::time::{Duration, Instant};

use momd_core::coarsen::{build_region, collapse, uncollapse};
use momd_core::harness::{
    analyze_batches, partition_work, run_batch, run_experiment, BatchOutput, ExperimentConfig, RunLog,
    StrategySelection, SUMMARY_HEADER,
};
use momd_core::ingest::{read_compact, sample_od_pairs, write_compact, write_compact_file, write_od_file, OdPair};
use momd_core::netmetrics::{profile, ProfileConfig, TopologyProfile};
use momd_core::search::floyd_warshall_region;
use momd_core::strategy::{run_brute_force, MomdQuery, StrategyKind};
use momd_core::synth::{generate, SynthSpec, Topology};
use momd_core::{giant_component, Graph64, GraphView, ReopenPolicy, Searcher, StraightLine, VertexId};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const RADII: [f64; 5] = [50.0, 100.0, 150.0, 200.0, 250.0];

// Pinned tolerances and budgets.
const ASTAR_REL_TOL: f64 = 1e-9;
const DOMINANCE_TOL: f64 = 1e-6;
const ERROR_BOUND_SLACK: f64 = 1e-6;
const COLLAPSE_EXPANSION_GROWTH: f64 = 2.0;
const SEED_QUORUM: usize = 4;
const BUDGET_ACC1: Duration = Duration::from_secs(120);
const BUDGET_ACC2: Duration = Duration::from_secs(60);
const BUDGET_ACC3: Duration = Duration::from_secs(20 * 60);

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        passed,
        detail: detail.into(),
    }
}

fn median(values: &mut [usize]) -> f64 {
    values.sort_unstable();
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2] as f64
    } else {
        (values[n / 2 - 1] + values[n / 2]) as f64 / 2.0
    }
}

fn acc1_optimality() -> Outcome {
    let started = Instant::now();
    let specs: Vec<SynthSpec> = (0..10u64)
        .map(|i| match i % 4 {
            0 => SynthSpec::new(Topology::Regular, 2500, i),
            1 => SynthSpec::new(Topology::SmallWorld, 2500, i).with_p(0.1),
            2 => SynthSpec::new(Topology::SmallWorld, 2500, i).with_p(0.5),
            _ => SynthSpec::new(Topology::ScaleFree, 2500, i),
        })
        .collect();
    let mut checked = 0;
    let mut mismatches = Vec::new();
    let mut searcher = Searcher::new();
    for spec in &specs {
        let g: Graph64 = generate(spec).unwrap();
        for p in sample_od_pairs(&g, 1000, spec.seed + 100).unwrap() {
            let h = StraightLine::new(&g, p.destination);
            let a = searcher.astar(&g, p.origin, p.destination, &h, ReopenPolicy::Never).unwrap();
            let d = searcher.dijkstra(&g, p.origin, p.destination).unwrap();
            checked += 1;
            let agree = match (a.is_found(), d.is_found()) {
                (true, true) => (a.distance - d.distance).abs() <= ASTAR_REL_TOL * d.distance.max(1.0),
                (false, false) => true,
                _ => false,
            };
            if !agree {
                mismatches.push(format!("{} {}->{}", spec.topology, p.origin, p.destination));
            }
        }
    }
    let elapsed = started.elapsed();
    outcome(
        mismatches.is_empty() && checked == 10_000 && elapsed < BUDGET_ACC1,
        format!("{checked} pairs on 10 graphs, {} mismatches, {elapsed:.1?}", mismatches.len()),
    )
}

fn acc2_brute_force_oracle() -> Outcome {
    let started = Instant::now();
    let graphs: Vec<Graph64> = vec![
        generate(&SynthSpec::new(Topology::SmallWorld, 196, 1).with_p(0.3)).unwrap(),
        generate(&SynthSpec::new(Topology::Random, 200, 2)).unwrap(),
        generate(&SynthSpec::new(Topology::ScaleFree, 200, 3)).unwrap(),
        generate(&SynthSpec::new(Topology::Regular, 144, 4)).unwrap(),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let mut failures = Vec::new();
    let mut max_gap: f64 = 0.0;
    for i in 0..200 {
        let g = &graphs[i % graphs.len()];
        let n = g.vertex_count();
        let o = VertexId::from_index(rng.gen_range(0..n));
        let d = VertexId::from_index(rng.gen_range(0..n));
        let radius = [0.0, 100.0, 150.0, 200.0, 250.0][rng.gen_range(0..5)];
        let q = MomdQuery::new(o, d, radius);
        let ro = build_region(g, o, radius).unwrap();
        let rd = build_region(g, d, radius).unwrap();
        let table = floyd_warshall_region(g, &ro.members, &rd.members).unwrap();
        let oracle = table.iter().flatten().copied().fold(f64::INFINITY, f64::min);
        let r = run_brute_force(g, &q).unwrap();
        let got = if r.search.status.has_path() { r.search.distance } else { f64::INFINITY };
        if got.is_finite() && oracle.is_finite() {
            max_gap = max_gap.max((got - oracle).abs());
        }
        if got != oracle {
            failures.push(format!("query {i}: brute {got} vs floyd-warshall {oracle}"));
        }
    }
    let elapsed = started.elapsed();
    outcome(
        failures.is_empty() && elapsed < BUDGET_ACC2,
        format!("200 queries, {} inexact (max gap {max_gap:e}), {elapsed:.1?}{}", failures.len(), failures.first().map(|f| format!("; first: {f}")).unwrap_or_default()),
    )
}

struct Benchmark {
    graph: Graph64,
    pairs: Vec<OdPair>,
    /// Radius 0 control followed by [`RADII`].
    radii: Vec<f64>,
    outputs: Vec<BatchOutput>,
    elapsed: Duration,
}

impl Benchmark {
    fn run() -> Self {
        let started = Instant::now();
        let graph: Graph64 = generate(&SynthSpec::new(Topology::SmallWorld, 10_000, 2024).with_spacing(100.0)).unwrap();
        let pairs = sample_od_pairs(&graph, 500, 9).unwrap();
        let radii: Vec<f64> = std::iter::once(0.0).chain(RADII).collect();
        let workers = std::thread::available_parallelism().map_or(1, |n| n.get());
        let mut log = RunLog::new(pairs.len() * radii.len() * 2);
        let outputs = run_batch(&graph, &pairs, &StrategyKind::ALL, &radii, workers, false, &mut log).unwrap();
        Self {
            graph,
            pairs,
            radii,
            outputs,
            elapsed: started.elapsed(),
        }
    }

    fn output(&self, kind: StrategyKind, radius: f64) -> &BatchOutput {
        self.outputs.iter().find(|o| o.strategy == kind && o.radius == radius).unwrap()
    }
}

fn acc3_dominance(bench: &Benchmark) -> Outcome {
    let mut negative = 0;
    let mut bound_violations = 0;
    let mut compared = 0;
    let mut per_radius = Vec::new();
    for &r in &RADII {
        let c = bench.output(StrategyKind::Collapse, r);
        let b = bench.output(StrategyKind::BruteForce, r);
        let mut max_error: f64 = 0.0;
        for (rc, rb) in c.records.iter().zip(&b.records) {
            if !(rc.status.has_path() && rb.status.has_path()) {
                continue;
            }
            compared += 1;
            let error = rc.distance - rb.distance;
            if error < -DOMINANCE_TOL {
                negative += 1;
            }
            if error > 2.0 * r + ERROR_BOUND_SLACK {
                bound_violations += 1;
            }
            max_error = max_error.max(error);
        }
        per_radius.push(format!("r={r}: max_error={max_error:.1} ({:.2}r)", max_error / r));
    }
    outcome(
        negative == 0 && bound_violations == 0 && compared > 0 && bench.elapsed < BUDGET_ACC3,
        format!(
            "{compared} comparisons, {negative} negative errors, {bound_violations} above 2r; {}; benchmark {:.1?}",
            per_radius.join(", "),
            bench.elapsed
        ),
    )
}

fn acc4_work_scaling(bench: &Benchmark) -> Outcome {
    let g = &bench.graph;
    let mut count_violations = 0;
    let mut brute_totals = Vec::new();
    let mut collapse_medians = HashMap::new();
    for &r in &RADII {
        let c = bench.output(StrategyKind::Collapse, r);
        let b = bench.output(StrategyKind::BruteForce, r);
        for (i, p) in bench.pairs.iter().enumerate() {
            let o = build_region(g, p.origin, r).unwrap().len();
            let d = build_region(g, p.destination, r).unwrap().len();
            if c.work[i].searches_executed != 1 || b.work[i].searches_executed != o * d {
                count_violations += 1;
            }
        }
        brute_totals.push(b.records.iter().map(|x| x.expansions).sum::<usize>());
        let mut ce: Vec<usize> = c.records.iter().map(|x| x.expansions).collect();
        collapse_medians.insert(r.to_bits(), median(&mut ce));
    }
    let increasing = brute_totals.windows(2).all(|w| w[0] < w[1]);
    let m50 = collapse_medians[&50f64.to_bits()];
    let m250 = collapse_medians[&250f64.to_bits()];
    outcome(
        count_violations == 0 && increasing && m250 <= COLLAPSE_EXPANSION_GROWTH * m50,
        format!(
            "{count_violations} search-count violations; brute-force expansions {brute_totals:?}; collapse median expansions r50={m50} r250={m250}"
        ),
    )
}

fn acc5_accuracy(bench: &Benchmark) -> Outcome {
    let collapse: Vec<BatchOutput> = bench.outputs.iter().filter(|o| o.strategy == StrategyKind::Collapse).cloned().collect();
    let brute: Vec<BatchOutput> = bench.outputs.iter().filter(|o| o.strategy == StrategyKind::BruteForce).cloned().collect();
    let (summaries, _) = analyze_batches(&collapse, &brute).unwrap();
    println!("{SUMMARY_HEADER}");
    for s in &summaries {
        println!("{}", s.to_csv());
    }
    let control = summaries.iter().find(|s| s.radius == 0.0).unwrap();
    let max_radius = bench.radii.iter().copied().fold(0.0, f64::max);
    let envelope = summaries.iter().all(|s| s.comparison.mean_error_all <= max_radius);
    let complete = summaries.len() == bench.radii.len();
    outcome(
        control.comparison.accuracy == 1.0 && envelope && complete,
        format!(
            "radius-0 accuracy {}; mean_error_all by radius {:?}",
            control.comparison.accuracy,
            summaries.iter().map(|s| format!("{:.2}", s.comparison.mean_error_all)).collect::<Vec<_>>()
        ),
    )
}

fn acc6_topology_ordering() -> Outcome {
    let mut profiles: Vec<HashMap<&str, TopologyProfile>> = Vec::new();
    for seed in 0..5u64 {
        let mut row = HashMap::new();
        for (name, spec) in [
            ("regular", SynthSpec::new(Topology::Regular, 10_000, seed)),
            ("sw0.1", SynthSpec::new(Topology::SmallWorld, 10_000, seed).with_p(0.1)),
            ("sw0.5", SynthSpec::new(Topology::SmallWorld, 10_000, seed).with_p(0.5)),
            ("random", SynthSpec::new(Topology::Random, 10_000, seed)),
            ("scale-free", SynthSpec::new(Topology::ScaleFree, 10_000, seed)),
        ] {
            let g: Graph64 = generate(&spec).unwrap();
            let (giant, _) = giant_component(&g).unwrap();
            let p = profile(&giant, name, ProfileConfig { path_pairs: 1000, seed }).unwrap();
            println!("  seed {seed}: {}", p.csv_row());
            row.insert(name, p);
        }
        profiles.push(row);
    }
    let holds = |check: &dyn Fn(&HashMap<&str, TopologyProfile>) -> bool| profiles.iter().filter(|p| check(p)).count();
    let checks: [(&str, usize, bool); 9] = [
        ("entropy regular < sw0.1", holds(&|p| p["regular"].degree_entropy < p["sw0.1"].degree_entropy), true),
        ("entropy sw0.1 < sw0.5", holds(&|p| p["sw0.1"].degree_entropy < p["sw0.5"].degree_entropy), true),
        ("entropy sw0.5 <= random", holds(&|p| p["sw0.5"].degree_entropy <= p["random"].degree_entropy), true),
        (
            "clustering sw0.1 > random",
            holds(&|p| p["sw0.1"].clustering_coefficient > p["random"].clustering_coefficient),
            true,
        ),
        ("hub scale-free > regular", holds(&|p| p["scale-free"].hub_ratio > p["regular"].hub_ratio), true),
        ("hub scale-free > sw0.1", holds(&|p| p["scale-free"].hub_ratio > p["sw0.1"].hub_ratio), true),
        ("hub scale-free > random", holds(&|p| p["scale-free"].hub_ratio > p["random"].hub_ratio), true),
        (
            "path length sw0.1 < regular",
            holds(&|p| p["sw0.1"].mean_path_length.unwrap() < p["regular"].mean_path_length.unwrap()),
            true,
        ),
        ("hub scale-free > sw0.5", holds(&|p| p["scale-free"].hub_ratio > p["sw0.5"].hub_ratio), false),
    ];
    // the last row is informative: sw0.5 is not one of the four topologies
    let failing: Vec<String> = checks
        .iter()
        .filter(|(_, n, required)| *required && *n < SEED_QUORUM)
        .map(|(name, n, _)| format!("{name} ({n}/5)"))
        .collect();
    let summary: Vec<String> = checks.iter().map(|(name, n, _)| format!("{name} {n}/5")).collect();
    outcome(
        failing.is_empty(),
        if failing.is_empty() {
            summary.join("; ")
        } else {
            format!("failing: {}; all: {}", failing.join(", "), summary.join("; "))
        },
    )
}

fn masked(path: &Path) -> String {
    let text = fs::read_to_string(path).unwrap();
    if path.to_string_lossy().ends_with(".work.csv") {
        return text;
    }
    text.lines()
        .map(|line| {
            let mut fields: Vec<&str> = line.split(',').collect();
            if fields.len() == 8 && fields[5] != "time" {
                fields[5] = "*";
            }
            fields.join(",")
        })
        .collect::<Vec<_>>()
        .join("\n")
}

fn acc7_determinism() -> Outcome {
    let partition = partition_work(10_000, 8);
    let partition_ok = partition == vec![1250; 8];
    let dir = tempfile::tempdir().unwrap();
    let g: Graph64 = generate(&SynthSpec::new(Topology::SmallWorld, 1000, 5)).unwrap();
    let pairs = sample_od_pairs(&g, 100, 6).unwrap();
    let graph_path = dir.path().join("g.graph");
    let od_path = dir.path().join("q.od");
    write_compact_file(&g, &graph_path).unwrap();
    write_od_file(&g, &pairs, &od_path).unwrap();
    let mut runs = Vec::new();
    for workers in [1, 4, 8] {
        let cfg = ExperimentConfig {
            graph_path: graph_path.clone(),
            od_path: od_path.clone(),
            strategy: StrategySelection::Both,
            radii: vec![100.0, 200.0],
            workers,
            rng_seed: 3,
            output_dir: dir.path().join(format!("w{workers}")),
            limit: None,
            private_copies: workers == 8,
        };
        let outcome = run_experiment(&cfg).unwrap();
        let mut files: Vec<(String, String)> = outcome
            .files
            .iter()
            .map(|f| (f.file_name().unwrap().to_string_lossy().into_owned(), masked(f)))
            .collect();
        files.sort();
        runs.push(files);
    }
    let identical = runs.windows(2).all(|w| w[0] == w[1]);
    let counts_ok = runs[0].len() == 8;
    outcome(
        partition_ok && identical && counts_ok,
        format!("partition_work(10000, 8) = {partition:?}; {} files per run, identical across 1/4/8 workers: {identical}", runs[0].len()),
    )
}

fn acc8_round_trips() -> Outcome {
    let mut compact_ok = 0;
    let graphs: Vec<Graph64> = vec![
        generate(&SynthSpec::new(Topology::Regular, 10_000, 0)).unwrap(),
        generate(&SynthSpec::new(Topology::SmallWorld, 2500, 1).with_p(0.5)).unwrap(),
        generate(&SynthSpec::new(Topology::ScaleFree, 2500, 2)).unwrap(),
        generate(&SynthSpec::new(Topology::Random, 2500, 3)).unwrap(),
    ];
    for g in &graphs {
        let mut first = Vec::new();
        write_compact(g, &mut first).unwrap();
        let back: Graph64 = read_compact(first.as_slice()).unwrap();
        let mut second = Vec::new();
        write_compact(&back, &mut second).unwrap();
        if &back == g && first == second {
            compact_ok += 1;
        }
    }

    let g: Graph64 = generate(&SynthSpec::new(Topology::SmallWorld, 2500, 8)).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(808);
    let mut collapse_ok = 0;
    for _ in 0..100 {
        let seed = VertexId::from_index(rng.gen_range(0..g.vertex_count()));
        let radius = rng.gen_range(0.0..400.0);
        let region = build_region(&g, seed, radius).unwrap();
        let (view, map) = collapse(&g, &region).unwrap();
        if uncollapse(&view, &map) == g {
            collapse_ok += 1;
        }
    }
    outcome(
        compact_ok == graphs.len() && collapse_ok == 100,
        format!("compact {compact_ok}/{} graphs identical; collapse/uncollapse {collapse_ok}/100 regions identical", graphs.len()),
    )
}

fn main() {
    // `cargo test` passes harness flags such as --nocapture; none apply here
    let list_only = std::env::args().any(|a| a == "--list");
    if list_only {
        println!("acceptance: test");
        return;
    }
    let mut results: Vec<(&str, &str, Outcome)> = Vec::new();
    results.push(("ACC-1", "optimality oracle", acc1_optimality()));
    results.push(("ACC-2", "brute-force oracle", acc2_brute_force_oracle()));
    let bench = Benchmark::run();
    results.push(("ACC-3", "dominance and error bound", acc3_dominance(&bench)));
    results.push(("ACC-4", "work scaling", acc4_work_scaling(&bench)));
    results.push(("ACC-5", "accuracy reporting", acc5_accuracy(&bench)));
    results.push(("ACC-6", "topology ordering", acc6_topology_ordering()));
    results.push(("ACC-7", "determinism and partitioning", acc7_determinism()));
    results.push(("ACC-8", "round-trips", acc8_round_trips()));

    println!();
    let mut failed = 0;
    for (id, name, o) in &results {
        let verdict = if o.passed { "PASS" } else { "FAIL" };
        failed += usize::from(!o.passed);
        println!("{id} {verdict} {name}: {}", o.detail);
    }
    println!("acceptance: {} passed, {failed} failed", results.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
