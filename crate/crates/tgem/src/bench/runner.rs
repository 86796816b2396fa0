//! Grid execution.
//!
//! One work unit is `(model replicate, time units, heuristic)`. Unit seeds
//! derive from the base seed by splitmix64 chaining, so a unit's model and
//! dataset never depend on scheduling; all heuristic units of a replicate
//! re-sample the identical stream. Rows are streamed to `results.csv` in
//! unit order through a reorder buffer, which makes the file byte-identical
//! for any worker count and leaves a valid prefix behind on interruption.
//! A resumed run reloads completed rows by key and only computes the rest.
//!
//! Wall-clock runtimes go to the `timings.csv` sidecar: they are the one
//! per-unit observable that legitimately differs between runs, and keeping
//! them out of `results.csv` preserves its byte-level determinism.

use std::collections::HashMap;
use std::fs::File;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::bench::config::BenchConfig;
use crate::distance::{edge_f1, model_distance, per_edge_distances, DistanceMode};
use crate::error::{Error, Result};
use crate::generator::{random_tgem, GenConfig};
use crate::horizon::{default_horizons, HorizonPolicy};
use crate::sampler::sample;
use crate::search::{learn_with_horizons, SearchOptions};

pub const RESULTS_SCHEMA: &str = "# tgem-results v1";
pub const TIMINGS_SCHEMA: &str = "# tgem-timings v1";
pub const PER_EDGE_SCHEMA: &str = "# tgem-per-edge v1";

/// One benchmark observation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub nodes: usize,
    pub density: f64,
    pub time_units: f64,
    pub replicate: usize,
    pub heuristic: String,
    pub seed: u64,
    pub status: String,
    pub distance: Option<f64>,
    pub f1: Option<f64>,
    pub precision: Option<f64>,
    pub recall: Option<f64>,
    pub learned_edges: Option<usize>,
    pub true_edges: Option<usize>,
    pub events_min: Option<u64>,
    pub events_median: Option<f64>,
    pub events_max: Option<u64>,
    pub error: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TimingRow {
    pub nodes: usize,
    pub density: f64,
    pub time_units: f64,
    pub replicate: usize,
    pub heuristic: String,
    pub runtime_s: f64,
}

/// One true edge's recovery record (written with `--per-edge`).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PerEdgeRow {
    pub nodes: usize,
    pub density: f64,
    pub time_units: f64,
    pub replicate: usize,
    pub heuristic: String,
    pub parent: String,
    pub child: String,
    pub horizon: f64,
    pub intervals: usize,
    pub learned: bool,
    pub refined_distance: f64,
}

#[derive(Debug, Clone, Copy)]
#[derive(Default)]
pub struct RunOptions {
    /// Worker threads; 0 picks the rayon default. Ignored without the
    /// `parallel` feature.
    pub jobs: usize,
    /// Persist per-edge breakdowns (multiplies output volume).
    pub per_edge: bool,
}


#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunSummary {
    pub total_units: usize,
    pub computed: usize,
    pub reused: usize,
    pub error_rows: usize,
    pub results_path: PathBuf,
    pub timings_path: PathBuf,
    pub per_edge_path: Option<PathBuf>,
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Deterministic seed derivation: chained splitmix64 over the base and the
/// unit coordinates.
pub fn derive_seed(base: u64, words: &[u64]) -> u64 {
    let mut h = splitmix64(base);
    for &w in words {
        h = splitmix64(h ^ w);
    }
    h
}

#[derive(Debug, Clone)]
struct Unit {
    nodes: usize,
    density: f64,
    cell: usize,
    replicate: usize,
    time_units: f64,
    t_index: usize,
    heuristic: String,
    policy: HorizonPolicy,
}

impl Unit {
    fn model_seed(&self, base: u64) -> u64 {
        derive_seed(base, &[0, self.cell as u64, self.replicate as u64])
    }

    fn sample_seed(&self, base: u64) -> u64 {
        derive_seed(
            base,
            &[1, self.cell as u64, self.replicate as u64, self.t_index as u64],
        )
    }

    fn key(&self) -> UnitKey {
        (
            self.nodes,
            self.density.to_bits(),
            self.time_units.to_bits(),
            self.replicate,
            self.heuristic.clone(),
        )
    }
}

type UnitKey = (usize, u64, u64, usize, String);

fn units_of(config: &BenchConfig) -> Vec<Unit> {
    let policies = config.policies();
    let mut units = Vec::with_capacity(config.unit_count());
    let mut cell = 0usize;
    for &nodes in &config.nodes {
        for &density in &config.densities {
            for replicate in 0..config.replicates {
                for (t_index, &time_units) in config.time_units.iter().enumerate() {
                    for (heuristic, policy) in &policies {
                        units.push(Unit {
                            nodes,
                            density,
                            cell,
                            replicate,
                            time_units,
                            t_index,
                            heuristic: heuristic.clone(),
                            policy: *policy,
                        });
                    }
                }
            }
            cell += 1;
        }
    }
    units
}

struct UnitOutput {
    row: ResultRow,
    timing: TimingRow,
    per_edge: Vec<PerEdgeRow>,
    reused: bool,
}

fn compute_unit(config: &BenchConfig, unit: &Unit, want_per_edge: bool) -> UnitOutput {
    let start = Instant::now();
    let sample_seed = unit.sample_seed(config.seed_base);
    let mut row = ResultRow {
        nodes: unit.nodes,
        density: unit.density,
        time_units: unit.time_units,
        replicate: unit.replicate,
        heuristic: unit.heuristic.clone(),
        seed: sample_seed,
        status: "ok".into(),
        distance: None,
        f1: None,
        precision: None,
        recall: None,
        learned_edges: None,
        true_edges: None,
        events_min: None,
        events_median: None,
        events_max: None,
        error: String::new(),
    };
    let mut per_edge = Vec::new();
    if let Err(e) = fill_unit(config, unit, sample_seed, &mut row, want_per_edge, &mut per_edge) {
        row.status = "error".into();
        row.error = e.to_string();
        per_edge.clear();
    }
    UnitOutput {
        row,
        timing: TimingRow {
            nodes: unit.nodes,
            density: unit.density,
            time_units: unit.time_units,
            replicate: unit.replicate,
            heuristic: unit.heuristic.clone(),
            runtime_s: start.elapsed().as_secs_f64(),
        },
        per_edge,
        reused: false,
    }
}

fn fill_unit(
    config: &BenchConfig,
    unit: &Unit,
    sample_seed: u64,
    row: &mut ResultRow,
    want_per_edge: bool,
    per_edge: &mut Vec<PerEdgeRow>,
) -> Result<()> {
    let gen = GenConfig {
        nodes: unit.nodes,
        density: unit.density,
        horizons: config.horizons.clone(),
        rates: config.rates.clone(),
        p_geom: config.p_geom,
        max_indegree: config.max_indegree,
        max_intervals_per_node: config.max_intervals,
        seed: unit.model_seed(config.seed_base),
    };
    let truth = random_tgem(&gen)?;
    let stream = sample(&truth, unit.time_units, sample_seed)?;

    let counts = stream.counts();
    let mut sorted: Vec<usize> = counts.clone();
    sorted.sort_unstable();
    row.events_min = Some(sorted[0] as u64);
    row.events_max = Some(sorted[sorted.len() - 1] as u64);
    let mid = sorted.len() / 2;
    row.events_median = Some(if sorted.len() % 2 == 1 {
        sorted[mid] as f64
    } else {
        (sorted[mid - 1] + sorted[mid]) as f64 / 2.0
    });

    let horizons = default_horizons(&stream, unit.policy)?;
    let opts = SearchOptions::with_caps(config.max_indegree, config.max_intervals);
    let outcome = learn_with_horizons(&stream, &horizons, &opts)?;
    if !outcome.forward.is_monotone() || !outcome.backward.is_monotone() {
        return Err(Error::Benchmark("search trace is not BIC-monotone".into()));
    }

    row.distance = Some(model_distance(&truth, &outcome.model, DistanceMode::Refined)?);
    let recovery = edge_f1(&truth, &outcome.model)?;
    row.f1 = Some(recovery.f1);
    row.precision = Some(recovery.precision);
    row.recall = Some(recovery.recall);
    row.learned_edges = Some(recovery.learned_edges);
    row.true_edges = Some(recovery.true_edges);

    if want_per_edge {
        for e in per_edge_distances(&truth, &outcome.model)? {
            per_edge.push(PerEdgeRow {
                nodes: unit.nodes,
                density: unit.density,
                time_units: unit.time_units,
                replicate: unit.replicate,
                heuristic: unit.heuristic.clone(),
                parent: e.parent,
                child: e.child,
                horizon: e.horizon,
                intervals: e.intervals,
                learned: e.learned,
                refined_distance: e.refined_distance,
            });
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Cache loading (resume)
// ---------------------------------------------------------------------------

/// Strict CSV load for reporting: the file must exist and parse fully.
pub fn load_result_rows(path: &Path) -> Result<Vec<ResultRow>> {
    load_rows_strict(path)
}

/// Strict per-edge CSV load for the distance-per-horizon report.
pub fn load_per_edge_rows(path: &Path) -> Result<Vec<PerEdgeRow>> {
    load_rows_strict(path)
}

fn load_rows_strict<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<T>> {
    let file = File::open(path)?;
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(file);
    let mut rows = Vec::new();
    for record in reader.deserialize::<T>() {
        rows.push(record?);
    }
    Ok(rows)
}

/// Reads rows of a possibly torn CSV, stopping silently at the first
/// malformed record (an interrupted writer leaves at most one).
fn load_rows<T: for<'de> Deserialize<'de>>(path: &Path) -> Vec<T> {
    let Ok(file) = File::open(path) else {
        return Vec::new();
    };
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(file);
    let mut rows = Vec::new();
    for record in reader.deserialize::<T>() {
        match record {
            Ok(row) => rows.push(row),
            Err(_) => break,
        }
    }
    rows
}

fn row_key(r: &ResultRow) -> UnitKey {
    (
        r.nodes,
        r.density.to_bits(),
        r.time_units.to_bits(),
        r.replicate,
        r.heuristic.clone(),
    )
}

struct Cache {
    results: HashMap<UnitKey, ResultRow>,
    timings: HashMap<UnitKey, TimingRow>,
    per_edge: HashMap<UnitKey, Vec<PerEdgeRow>>,
}

fn load_cache(paths: &Paths) -> Cache {
    let mut results = HashMap::new();
    for row in load_rows::<ResultRow>(&paths.results) {
        results.insert(row_key(&row), row);
    }
    let mut timings = HashMap::new();
    for row in load_rows::<TimingRow>(&paths.timings) {
        let key = (
            row.nodes,
            row.density.to_bits(),
            row.time_units.to_bits(),
            row.replicate,
            row.heuristic.clone(),
        );
        timings.insert(key, row);
    }
    let mut per_edge: HashMap<UnitKey, Vec<PerEdgeRow>> = HashMap::new();
    for row in load_rows::<PerEdgeRow>(&paths.per_edge) {
        let key = (
            row.nodes,
            row.density.to_bits(),
            row.time_units.to_bits(),
            row.replicate,
            row.heuristic.clone(),
        );
        per_edge.entry(key).or_default().push(row);
    }
    Cache {
        results,
        timings,
        per_edge,
    }
}

struct Paths {
    results: PathBuf,
    timings: PathBuf,
    per_edge: PathBuf,
}

fn open_csv(path: &Path, schema: &str) -> Result<csv::Writer<File>> {
    let mut file = File::create(path)?;
    writeln!(file, "{schema}")?;
    Ok(csv::Writer::from_writer(file))
}

struct Sink {
    results: csv::Writer<File>,
    timings: csv::Writer<File>,
    per_edge: Option<csv::Writer<File>>,
}

impl Sink {
    fn write(&mut self, out: &UnitOutput) -> Result<()> {
        self.results.serialize(&out.row)?;
        self.results.flush()?;
        self.timings.serialize(&out.timing)?;
        self.timings.flush()?;
        if let Some(w) = self.per_edge.as_mut() {
            for r in &out.per_edge {
                w.serialize(r)?;
            }
            w.flush()?;
        }
        Ok(())
    }
}

/// Runs the whole grid, resuming from any completed rows already present in
/// `out_dir`. Deterministic for fixed `(config, seed_base)` regardless of
/// the worker count.
pub fn run_benchmark(
    config: &BenchConfig,
    out_dir: &Path,
    options: &RunOptions,
) -> Result<RunSummary> {
    config.validate()?;
    std::fs::create_dir_all(out_dir)?;
    let paths = Paths {
        results: out_dir.join("results.csv"),
        timings: out_dir.join("timings.csv"),
        per_edge: out_dir.join("per_edge.csv"),
    };
    let cache = load_cache(&paths);
    let units = units_of(config);

    let mut sink = Sink {
        results: open_csv(&paths.results, RESULTS_SCHEMA)?,
        timings: open_csv(&paths.timings, TIMINGS_SCHEMA)?,
        per_edge: if options.per_edge {
            Some(open_csv(&paths.per_edge, PER_EDGE_SCHEMA)?)
        } else {
            None
        },
    };

    let produce = |unit: &Unit| -> UnitOutput {
        let key = unit.key();
        if let Some(row) = cache.results.get(&key) {
            // A unit with no true edges legitimately has no per-edge rows.
            let have_per_edge = cache.per_edge.contains_key(&key)
                || row.true_edges == Some(0)
                || row.status == "error";
            let edge_ok = !options.per_edge || have_per_edge;
            if edge_ok {
                return UnitOutput {
                    row: row.clone(),
                    timing: cache.timings.get(&key).cloned().unwrap_or(TimingRow {
                        nodes: unit.nodes,
                        density: unit.density,
                        time_units: unit.time_units,
                        replicate: unit.replicate,
                        heuristic: unit.heuristic.clone(),
                        runtime_s: 0.0,
                    }),
                    per_edge: cache.per_edge.get(&key).cloned().unwrap_or_default(),
                    reused: true,
                };
            }
        }
        compute_unit(config, unit, options.per_edge)
    };

    let mut computed = 0usize;
    let mut reused = 0usize;
    let mut error_rows = 0usize;
    let mut tally = |out: &UnitOutput| {
        if out.reused {
            reused += 1;
        } else {
            computed += 1;
        }
        if out.row.status != "ok" {
            error_rows += 1;
        }
    };

    execute(&units, options.jobs, produce, |out| {
        tally(&out);
        sink.write(&out)
    })?;

    Ok(RunSummary {
        total_units: units.len(),
        computed,
        reused,
        error_rows,
        results_path: paths.results,
        timings_path: paths.timings,
        per_edge_path: options.per_edge.then_some(paths.per_edge),
    })
}

/// Parallel execution with in-order streaming writes (reorder buffer).
#[cfg(feature = "parallel")]
fn execute<F, W>(units: &[Unit], jobs: usize, produce: F, mut write: W) -> Result<()>
where
    F: Fn(&Unit) -> UnitOutput + Sync + Send,
    W: FnMut(UnitOutput) -> Result<()>,
{
    use rayon::prelude::*;
    use std::collections::BTreeMap;
    use std::sync::mpsc;

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::Benchmark(format!("thread pool: {e}")))?;

    let (tx, rx) = mpsc::channel::<(usize, UnitOutput)>();
    let mut failure: Option<Error> = None;
    std::thread::scope(|scope| {
        let handle = scope.spawn(move || {
            pool.install(|| {
                units.par_iter().enumerate().for_each(|(i, unit)| {
                    let out = produce(unit);
                    let _ = tx.send((i, out));
                });
            });
        });
        let mut buffer: BTreeMap<usize, UnitOutput> = BTreeMap::new();
        let mut next = 0usize;
        for (i, out) in rx {
            buffer.insert(i, out);
            while let Some(out) = buffer.remove(&next) {
                if let Err(e) = write(out) {
                    failure = Some(e);
                    break;
                }
                next += 1;
            }
            if failure.is_some() {
                break;
            }
        }
        let _ = handle.join();
    });
    match failure {
        Some(e) => Err(e),
        None => Ok(()),
    }
}

/// Sequential fallback; identical output bytes.
#[cfg(not(feature = "parallel"))]
fn execute<F, W>(units: &[Unit], _jobs: usize, produce: F, mut write: W) -> Result<()>
where
    F: Fn(&Unit) -> UnitOutput + Sync,
    W: FnMut(UnitOutput) -> Result<()>,
{
    for unit in units {
        write(produce(unit))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seed_derivation_is_stable_and_spread() {
        let a = derive_seed(42, &[0, 1, 2]);
        let b = derive_seed(42, &[0, 1, 2]);
        assert_eq!(a, b);
        assert_ne!(a, derive_seed(42, &[0, 2, 1]));
        assert_ne!(a, derive_seed(43, &[0, 1, 2]));
    }

    #[test]
    fn unit_enumeration_matches_count() {
        let c = BenchConfig {
            nodes: vec![5],
            densities: vec![0.2],
            time_units: vec![500.0, 2000.0],
            replicates: 10,
            ..BenchConfig::default()
        };
        let units = units_of(&c);
        assert_eq!(units.len(), c.unit_count());
        assert_eq!(units.len(), 120);
        // All heuristic units of one (replicate, T) share the sample seed.
        let s0 = units[0].sample_seed(c.seed_base);
        for u in &units[..6] {
            assert_eq!(u.sample_seed(c.seed_base), s0);
        }
        assert_ne!(units[6].sample_seed(c.seed_base), s0);
    }

    #[test]
    fn tiny_run_is_deterministic_and_resumable() {
        let c = BenchConfig {
            nodes: vec![3],
            densities: vec![0.2],
            time_units: vec![200.0],
            replicates: 2,
            heuristics: vec!["proximal".into(), "q=0.5".into()],
            ..BenchConfig::default()
        };
        let dir = tempfile::tempdir().unwrap();
        let a_dir = dir.path().join("a");
        let b_dir = dir.path().join("b");
        let opts = RunOptions {
            jobs: 2,
            per_edge: true,
        };
        let s1 = run_benchmark(&c, &a_dir, &opts).unwrap();
        assert_eq!(s1.total_units, 4);
        assert_eq!(s1.error_rows, 0);
        let bytes_a = std::fs::read(a_dir.join("results.csv")).unwrap();

        run_benchmark(&c, &b_dir, &RunOptions { jobs: 1, per_edge: true }).unwrap();
        let bytes_b = std::fs::read(b_dir.join("results.csv")).unwrap();
        assert_eq!(bytes_a, bytes_b, "jobs=2 and jobs=1 must agree byte for byte");

        // Truncate to a prefix (simulating a kill) and resume.
        let text = String::from_utf8(bytes_a.clone()).unwrap();
        let keep: Vec<&str> = text.lines().take(4).collect(); // schema + header + 2 rows
        std::fs::write(a_dir.join("results.csv"), keep.join("\n") + "\n").unwrap();
        let s2 = run_benchmark(&c, &a_dir, &opts).unwrap();
        assert_eq!(s2.reused, 2);
        assert_eq!(s2.computed, 2);
        let bytes_resumed = std::fs::read(a_dir.join("results.csv")).unwrap();
        assert_eq!(bytes_a, bytes_resumed, "resume must reproduce the run");
    }
}
