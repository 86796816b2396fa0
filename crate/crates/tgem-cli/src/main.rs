//! `tgem` command line: score, learn, sample, generate, compare, and
//! benchmark timescale graphical event models.

use std::fs;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use tgem::bench::{self, BenchConfig, RunOptions};
use tgem::distance::{edge_f1, model_distance_breakdown, DistanceMode};
use tgem::horizon::HorizonPolicy;
use tgem::model::{parse_model, serialize_model};
use tgem::scoring;
use tgem::search::{learn, SearchOptions};
use tgem::stream::{parse_events, serialize_events, EventStream};

#[derive(Parser)]
#[command(name = "tgem", version, about = "Timescale graphical event models")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Score a model against an event stream (log-likelihood, BIC).
    Score {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        data: PathBuf,
        /// Also print per-node sufficient statistics.
        #[arg(long)]
        verbose: bool,
    },
    /// Learn a model from an event stream.
    Learn {
        #[arg(long)]
        data: PathBuf,
        #[command(flatten)]
        heuristic: HeuristicArgs,
        /// Cap on incoming edges per node.
        #[arg(long)]
        max_indegree: Option<usize>,
        /// Cap on total intervals per node.
        #[arg(long)]
        max_intervals: Option<usize>,
        #[arg(long)]
        out: PathBuf,
        /// Write the accepted-move trace as JSON.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Sample a synthetic event stream from a model.
    Sample {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        t_end: f64,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Generate a random benchmark model.
    Generate {
        #[arg(long)]
        nodes: usize,
        #[arg(long)]
        density: f64,
        #[arg(long)]
        seed: u64,
        /// Initial horizon set (comma separated).
        #[arg(long, value_delimiter = ',')]
        horizons: Option<Vec<f64>>,
        /// Rate set (comma separated).
        #[arg(long, value_delimiter = ',')]
        rates: Option<Vec<f64>>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Structural distance between two models.
    Distance {
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: PathBuf,
        /// `set` or `refined`.
        #[arg(long, default_value = "refined")]
        mode: String,
    },
    /// Run the synthetic benchmark grid.
    Benchmark {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        /// Worker threads (0 = automatic).
        #[arg(long, default_value_t = 0)]
        jobs: usize,
        /// Keep per-edge distance breakdowns.
        #[arg(long)]
        per_edge: bool,
    },
    /// Aggregate benchmark results into report tables.
    Report {
        /// Directory holding results.csv (and optionally per_edge.csv).
        #[arg(long)]
        results: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args)]
struct HeuristicArgs {
    /// `proximal` or `quantile`.
    #[arg(long)]
    heuristic: String,
    /// Quantile in (0,1); required with `--heuristic quantile`.
    #[arg(long)]
    q: Option<f64>,
}

impl HeuristicArgs {
    fn policy(&self) -> Result<HorizonPolicy> {
        match (self.heuristic.as_str(), self.q) {
            ("proximal", None) => Ok(HorizonPolicy::Proximal),
            ("proximal", Some(_)) => bail!("--q only applies to --heuristic quantile"),
            ("quantile", Some(q)) => Ok(HorizonPolicy::quantile(q)?),
            ("quantile", None) => bail!("--heuristic quantile requires --q"),
            (other, _) => bail!("unknown heuristic `{other}` (use proximal or quantile)"),
        }
    }
}

fn read_stream(path: &PathBuf) -> Result<EventStream> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(parse_events(&text, None)?)
}

fn read_model(path: &PathBuf) -> Result<tgem::Tgem> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(parse_model(&text)?)
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Score {
            model,
            data,
            verbose,
        } => {
            let model = read_model(&model)?;
            // Keep zero-occurrence labels by parsing with the model's vocabulary.
            let text = fs::read_to_string(&data)?;
            let stream = parse_events(&text, Some(model.labels()))?;
            let loglik = scoring::log_likelihood(&stream, &model, None)?;
            let penalty = scoring::penalty(&model, stream.t_star());
            let bic = loglik - penalty;
            println!(
                "{}",
                serde_json::json!({ "loglik": loglik, "bic": bic, "penalty": penalty })
            );
            if verbose {
                for node in model.labels() {
                    let st = tgem::stats::sufficient_stats(&stream, &model, node)?;
                    let rates = scoring::mle_rates(&st)?;
                    println!(
                        "{}",
                        serde_json::json!({
                            "node": node, "n": st.n, "d": st.d, "mle": rates,
                        })
                    );
                }
            }
        }
        Command::Learn {
            data,
            heuristic,
            max_indegree,
            max_intervals,
            out,
            trace,
        } => {
            let stream = read_stream(&data)?;
            let options = SearchOptions {
                max_indegree,
                max_intervals,
                ..SearchOptions::default()
            };
            let outcome = learn(&stream, heuristic.policy()?, &options)?;
            fs::write(&out, serialize_model(&outcome.model))?;
            if let Some(path) = trace {
                fs::write(&path, serde_json::to_string_pretty(&outcome.full_trace())?)?;
            }
            eprintln!(
                "learned {} edges, BIC {:.4} (empty {:.4})",
                outcome.model.edge_count(),
                outcome.final_bic,
                outcome.empty_bic
            );
        }
        Command::Sample {
            model,
            t_end,
            seed,
            out,
        } => {
            let model = read_model(&model)?;
            let stream = tgem::sampler::sample(&model, t_end, seed)?;
            fs::write(&out, serialize_events(&stream))?;
            eprintln!("sampled {} events on (0, {t_end}]", stream.len());
        }
        Command::Generate {
            nodes,
            density,
            seed,
            horizons,
            rates,
            out,
        } => {
            let mut config = tgem::generator::GenConfig::new(nodes, density, seed);
            if let Some(h) = horizons {
                config.horizons = h;
            }
            if let Some(r) = rates {
                config.rates = r;
            }
            let model = tgem::generator::random_tgem(&config)?;
            fs::write(&out, serialize_model(&model))?;
            eprintln!("generated {} edges over {} nodes", model.edge_count(), nodes);
        }
        Command::Distance { a, b, mode } => {
            let ma = read_model(&a)?;
            let mb = read_model(&b)?;
            let mode = DistanceMode::parse(&mode)?;
            let (total, breakdown) = model_distance_breakdown(&ma, &mb, mode)?;
            let recovery = edge_f1(&ma, &mb)?;
            let edges: Vec<_> = breakdown
                .iter()
                .map(|e| {
                    serde_json::json!({
                        "parent": e.parent, "child": e.child,
                        "status": e.status, "value": e.value,
                    })
                })
                .collect();
            println!(
                "{}",
                serde_json::json!({
                    "distance": total,
                    "f1": recovery.f1,
                    "precision": recovery.precision,
                    "recall": recovery.recall,
                    "edges": edges,
                })
            );
        }
        Command::Benchmark {
            config,
            out,
            jobs,
            per_edge,
        } => {
            let config = match config {
                Some(path) => BenchConfig::from_toml(&fs::read_to_string(&path)?)?,
                None => BenchConfig::default(),
            };
            let summary = bench::run_benchmark(&config, &out, &RunOptions { jobs, per_edge })?;
            eprintln!(
                "{} units ({} computed, {} reused, {} errors) -> {}",
                summary.total_units,
                summary.computed,
                summary.reused,
                summary.error_rows,
                summary.results_path.display()
            );
        }
        Command::Report { results, out } => {
            let tables = bench::summarize(&results.join("results.csv"))?;
            bench::write_report(&tables, &out)?;
            let per_edge = results.join("per_edge.csv");
            if per_edge.exists() {
                let buckets = bench::distance_by_horizon(&per_edge)?;
                bench::write_horizon_report(&buckets, &out)?;
            }
            eprintln!("report written to {}", out.display());
        }
    }
    Ok(())
}
