//! Aggregation of benchmark results into the report tables.
//!
//! Three layouts: event-occurrence summaries per sampled length, mean (sd)
//! distance per setting and heuristic, and the same for F1. Values render
//! rounded to two decimals with trailing zeros trimmed (`3.55 (1.84)`,
//! `2.1 (1.5)`). The distance table also carries the empty-model baseline,
//! which equals the mean true-edge count of the cell's generated models.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs::File;
use std::io::Write as _;
use std::path::Path;

use crate::bench::runner::{load_result_rows, PerEdgeRow, ResultRow};
use crate::bench::svg;
use crate::error::{Error, Result};

/// Mean and sample standard deviation (0 for fewer than two values).
pub fn mean_sd(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1) as f64;
    (mean, var.sqrt())
}

fn fmt2(x: f64) -> String {
    let s = format!("{x:.2}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s.is_empty() || s == "-" {
        "0".into()
    } else {
        s.to_string()
    }
}

/// `"3.55 (1.84)"` style cell.
pub fn fmt_mean_sd(mean: f64, sd: f64) -> String {
    format!("{} ({})", fmt2(mean), fmt2(sd))
}

/// Heuristic column order: proximal first, then quantiles ascending.
fn heuristic_rank(name: &str) -> (u8, f64) {
    if name == "proximal" {
        (0, 0.0)
    } else {
        let q = name.strip_prefix("q=").and_then(|v| v.parse().ok()).unwrap_or(f64::MAX);
        (1, q)
    }
}

type Setting = (usize, u64, u64); // nodes, time_units bits, density bits

/// One row of a mean (sd) table.
#[derive(Debug, Clone)]
pub struct MeanSdRow {
    pub nodes: usize,
    pub time_units: f64,
    pub density: f64,
    /// Observations per heuristic cell.
    pub n: usize,
    /// Mean true-edge count: the distance an empty model would score.
    pub empty_baseline: f64,
    /// `(mean, sd)` per heuristic, in table heuristic order.
    pub cells: Vec<Option<(f64, f64)>>,
}

#[derive(Debug, Clone)]
pub struct MeanSdTable {
    pub metric: &'static str,
    pub heuristics: Vec<String>,
    pub rows: Vec<MeanSdRow>,
}

impl MeanSdTable {
    /// Mean of a heuristic's cell means over all rows (used by ordering
    /// checks and the text report footer).
    pub fn heuristic_mean(&self, heuristic: &str) -> Option<f64> {
        let idx = self.heuristics.iter().position(|h| h == heuristic)?;
        let values: Vec<f64> = self
            .rows
            .iter()
            .filter_map(|r| r.cells[idx].map(|(m, _)| m))
            .collect();
        if values.is_empty() {
            None
        } else {
            Some(values.iter().sum::<f64>() / values.len() as f64)
        }
    }
}

/// Event-occurrence summary per sampled length.
#[derive(Debug, Clone, PartialEq)]
pub struct EventSummaryRow {
    pub time_units: f64,
    pub avg_min: f64,
    pub avg_median: f64,
    pub avg_max: f64,
}

#[derive(Debug, Clone)]
pub struct SummaryTables {
    pub events: Vec<EventSummaryRow>,
    pub distance: MeanSdTable,
    pub f1: MeanSdTable,
    pub ok_rows: usize,
    pub error_rows: usize,
}

/// Aggregates a results CSV into the three report tables.
pub fn summarize(results_path: &Path) -> Result<SummaryTables> {
    let rows = load_result_rows(results_path)?;
    if rows.is_empty() {
        return Err(Error::Benchmark(format!(
            "no result rows in {}",
            results_path.display()
        )));
    }
    let error_rows = rows.iter().filter(|r| r.status != "ok").count();
    let ok: Vec<&ResultRow> = rows.iter().filter(|r| r.status == "ok").collect();
    if ok.is_empty() {
        return Err(Error::Benchmark("every row is an error row".into()));
    }

    let mut heuristics: Vec<String> = ok.iter().map(|r| r.heuristic.clone()).collect();
    heuristics.sort_by(|a, b| {
        heuristic_rank(a)
            .partial_cmp(&heuristic_rank(b))
            .expect("ranks are finite")
    });
    heuristics.dedup();

    // Datasets are shared across heuristics; count each once for Table 2.
    let mut events: BTreeMap<u64, Vec<(f64, f64, f64)>> = BTreeMap::new();
    let mut seen = std::collections::HashSet::new();
    for r in &ok {
        let dataset = (r.nodes, r.density.to_bits(), r.time_units.to_bits(), r.replicate);
        if !seen.insert(dataset) {
            continue;
        }
        if let (Some(mn), Some(md), Some(mx)) = (r.events_min, r.events_median, r.events_max) {
            events
                .entry(r.time_units.to_bits())
                .or_default()
                .push((mn as f64, md, mx as f64));
        }
    }
    let events = events
        .into_iter()
        .map(|(bits, triples)| {
            let n = triples.len() as f64;
            EventSummaryRow {
                time_units: f64::from_bits(bits),
                avg_min: triples.iter().map(|t| t.0).sum::<f64>() / n,
                avg_median: triples.iter().map(|t| t.1).sum::<f64>() / n,
                avg_max: triples.iter().map(|t| t.2).sum::<f64>() / n,
            }
        })
        .collect::<Vec<_>>();

    let distance = mean_sd_table("distance", &ok, &heuristics, |r| r.distance);
    let f1 = mean_sd_table("f1", &ok, &heuristics, |r| r.f1);

    Ok(SummaryTables {
        events,
        distance,
        f1,
        ok_rows: ok.len(),
        error_rows,
    })
}

fn mean_sd_table(
    metric: &'static str,
    rows: &[&ResultRow],
    heuristics: &[String],
    value: impl Fn(&ResultRow) -> Option<f64>,
) -> MeanSdTable {
    let mut groups: BTreeMap<Setting, BTreeMap<&str, Vec<f64>>> = BTreeMap::new();
    let mut baselines: BTreeMap<Setting, Vec<f64>> = BTreeMap::new();
    for r in rows {
        let key = (r.nodes, r.time_units.to_bits(), r.density.to_bits());
        if let Some(v) = value(r) {
            groups
                .entry(key)
                .or_default()
                .entry(r.heuristic.as_str())
                .or_default()
                .push(v);
        }
        if let Some(te) = r.true_edges {
            baselines.entry(key).or_default().push(te as f64);
        }
    }
    let rows = groups
        .into_iter()
        .map(|((nodes, t_bits, d_bits), by_heuristic)| {
            let n = by_heuristic.values().map(Vec::len).max().unwrap_or(0);
            let cells = heuristics
                .iter()
                .map(|h| by_heuristic.get(h.as_str()).map(|v| mean_sd(v)))
                .collect();
            let baseline = baselines
                .get(&(nodes, t_bits, d_bits))
                .map(|v| v.iter().sum::<f64>() / v.len() as f64)
                .unwrap_or(f64::NAN);
            MeanSdRow {
                nodes,
                time_units: f64::from_bits(t_bits),
                density: f64::from_bits(d_bits),
                n,
                empty_baseline: baseline,
                cells,
            }
        })
        .collect();
    MeanSdTable {
        metric,
        heuristics: heuristics.to_vec(),
        rows,
    }
}

// ---------------------------------------------------------------------------
// Rendering
// ---------------------------------------------------------------------------

fn render_mean_sd_csv(table: &MeanSdTable) -> String {
    // The empty-model baseline is only meaningful for the distance table
    // (it equals the mean true-edge count; an empty model scores F1 = 0).
    let baseline = table.metric == "distance";
    let mut out = String::from("nodes,time_units,density,n");
    if baseline {
        out.push_str(",empty_baseline");
    }
    for h in &table.heuristics {
        let _ = write!(out, ",{h}");
    }
    out.push('\n');
    for r in &table.rows {
        let _ = write!(out, "{},{},{},{}", r.nodes, r.time_units, r.density, r.n);
        if baseline {
            let _ = write!(out, ",{}", fmt2(r.empty_baseline));
        }
        for cell in &r.cells {
            match cell {
                Some((m, s)) => {
                    let _ = write!(out, ",{}", fmt_mean_sd(*m, *s));
                }
                None => out.push(','),
            }
        }
        out.push('\n');
    }
    out
}

/// Table-2 layout: `time_units, avg_min, avg_median, avg_max` with values
/// rounded to integers.
pub fn render_events_csv(rows: &[EventSummaryRow]) -> String {
    let mut out = String::from("time_units,avg_min,avg_median,avg_max\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            r.time_units,
            r.avg_min.round(),
            r.avg_median.round(),
            r.avg_max.round()
        );
    }
    out
}

fn render_mean_sd_text(table: &MeanSdTable) -> String {
    let baseline = table.metric == "distance";
    let mut header: Vec<String> = vec![
        "nodes".into(),
        "time_units".into(),
        "density".into(),
        "n".into(),
    ];
    if baseline {
        header.push("empty".into());
    }
    header.extend(table.heuristics.iter().cloned());
    let mut grid: Vec<Vec<String>> = vec![header];
    for r in &table.rows {
        let mut row = vec![
            r.nodes.to_string(),
            fmt2(r.time_units),
            r.density.to_string(),
            r.n.to_string(),
        ];
        if baseline {
            row.push(fmt2(r.empty_baseline));
        }
        for cell in &r.cells {
            row.push(cell.map_or(String::new(), |(m, s)| fmt_mean_sd(m, s)));
        }
        grid.push(row);
    }
    render_grid(&grid)
}

fn render_grid(grid: &[Vec<String>]) -> String {
    let cols = grid.iter().map(Vec::len).max().unwrap_or(0);
    let mut widths = vec![0usize; cols];
    for row in grid {
        for (i, cell) in row.iter().enumerate() {
            widths[i] = widths[i].max(cell.len());
        }
    }
    let mut out = String::new();
    for row in grid {
        let line: Vec<String> = row
            .iter()
            .enumerate()
            .map(|(i, cell)| format!("{cell:>width$}", width = widths[i]))
            .collect();
        let _ = writeln!(out, "{}", line.join("  "));
    }
    out
}

/// Writes `table2.csv`, `table3.csv`, `table4.csv` and an aligned-text
/// `report.txt` into `out_dir`.
pub fn write_report(tables: &SummaryTables, out_dir: &Path) -> Result<()> {
    std::fs::create_dir_all(out_dir)?;
    std::fs::write(out_dir.join("table2.csv"), render_events_csv(&tables.events))?;
    std::fs::write(out_dir.join("table3.csv"), render_mean_sd_csv(&tables.distance))?;
    std::fs::write(out_dir.join("table4.csv"), render_mean_sd_csv(&tables.f1))?;

    let mut text = String::new();
    let _ = writeln!(text, "Event occurrences per sampled time units");
    let mut grid = vec![vec![
        "time_units".to_string(),
        "avg_min".to_string(),
        "avg_median".to_string(),
        "avg_max".to_string(),
    ]];
    for r in &tables.events {
        grid.push(vec![
            fmt2(r.time_units),
            format!("{}", r.avg_min.round()),
            format!("{}", r.avg_median.round()),
            format!("{}", r.avg_max.round()),
        ]);
    }
    text.push_str(&render_grid(&grid));
    let _ = writeln!(text, "\nAverage distance to the generating model, mean (sd)");
    text.push_str(&render_mean_sd_text(&tables.distance));
    let _ = writeln!(text, "\nAverage F1 against the generating model, mean (sd)");
    text.push_str(&render_mean_sd_text(&tables.f1));
    let _ = writeln!(
        text,
        "\nrows: {} ok, {} error",
        tables.ok_rows, tables.error_rows
    );
    let mut f = File::create(out_dir.join("report.txt"))?;
    f.write_all(text.as_bytes())?;
    Ok(())
}

// ---------------------------------------------------------------------------
// Distance per horizon
// ---------------------------------------------------------------------------

/// Five-number summary of refined distances for one true-horizon class.
#[derive(Debug, Clone, PartialEq)]
pub struct HorizonBucket {
    pub time_units: f64,
    pub horizon: f64,
    /// Multi-interval timescales are reported separately.
    pub multi: bool,
    pub count: usize,
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
}

/// Nearest-rank quantile of an ascending slice.
fn nearest_rank(sorted: &[f64], q: f64) -> f64 {
    let rank = ((q * sorted.len() as f64).ceil() as usize).clamp(1, sorted.len());
    sorted[rank - 1]
}

/// Aggregates per-edge rows (proximal heuristic only) into per-horizon
/// distance distributions, split single- vs multi-interval.
pub fn distance_by_horizon(per_edge_path: &Path) -> Result<Vec<HorizonBucket>> {
    let rows: Vec<PerEdgeRow> = crate::bench::runner::load_per_edge_rows(per_edge_path)?;
    if rows.is_empty() {
        return Err(Error::Benchmark(format!(
            "no per-edge rows in {} (run the benchmark with --per-edge)",
            per_edge_path.display()
        )));
    }
    let mut groups: BTreeMap<(u64, bool, u64), Vec<f64>> = BTreeMap::new();
    for r in rows.iter().filter(|r| r.heuristic == "proximal") {
        let key = (r.time_units.to_bits(), r.intervals > 1, r.horizon.to_bits());
        groups.entry(key).or_default().push(r.refined_distance);
    }
    Ok(groups
        .into_iter()
        .map(|((t_bits, multi, h_bits), mut values)| {
            values.sort_by(f64::total_cmp);
            HorizonBucket {
                time_units: f64::from_bits(t_bits),
                horizon: f64::from_bits(h_bits),
                multi,
                count: values.len(),
                min: values[0],
                q1: nearest_rank(&values, 0.25),
                median: nearest_rank(&values, 0.5),
                q3: nearest_rank(&values, 0.75),
                max: values[values.len() - 1],
            }
        })
        .collect())
}

/// Writes `distance_by_horizon.csv` plus one box-plot SVG per
/// (time units, single/multi) group.
pub fn write_horizon_report(buckets: &[HorizonBucket], out_dir: &Path) -> Result<()> {
    std::fs::create_dir_all(out_dir)?;
    let mut csv = String::from("time_units,horizon,multi,count,min,q1,median,q3,max\n");
    for b in buckets {
        let _ = writeln!(
            csv,
            "{},{},{},{},{},{},{},{},{}",
            b.time_units, b.horizon, b.multi, b.count, b.min, b.q1, b.median, b.q3, b.max
        );
    }
    std::fs::write(out_dir.join("distance_by_horizon.csv"), csv)?;

    let mut by_group: BTreeMap<(u64, bool), Vec<&HorizonBucket>> = BTreeMap::new();
    for b in buckets {
        by_group.entry((b.time_units.to_bits(), b.multi)).or_default().push(b);
    }
    for ((t_bits, multi), group) in by_group {
        let t = f64::from_bits(t_bits);
        let kind = if multi { "multi" } else { "single" };
        let title = format!("refined distance per true horizon ({kind}-interval, T = {t})");
        let svg = svg::boxplot(&title, &group);
        std::fs::write(out_dir.join(format!("distance_{kind}_T{t}.svg")), svg)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn formatting_matches_published_style() {
        assert_eq!(fmt_mean_sd(3.55, 1.84), "3.55 (1.84)");
        assert_eq!(fmt_mean_sd(2.1, 1.5), "2.1 (1.5)");
        assert_eq!(fmt_mean_sd(9.0, 2.0), "9 (2)");
        assert_eq!(fmt2(0.004), "0");
    }

    #[test]
    fn mean_sd_single_value_has_zero_sd() {
        let (m, s) = mean_sd(&[4.25]);
        assert_eq!((m, s), (4.25, 0.0));
        let (m, s) = mean_sd(&[1.0, 3.0]);
        assert_eq!(m, 2.0);
        assert!((s - std::f64::consts::SQRT_2).abs() < 1e-12);
    }

    #[test]
    fn heuristic_order_puts_proximal_first() {
        let mut names = vec!["q=0.95".to_string(), "q=0.05".into(), "proximal".into()];
        names.sort_by(|a, b| heuristic_rank(a).partial_cmp(&heuristic_rank(b)).unwrap());
        assert_eq!(names, vec!["proximal", "q=0.05", "q=0.95"]);
    }

    #[test]
    fn nearest_rank_quantiles() {
        let v = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(nearest_rank(&v, 0.25), 1.0);
        assert_eq!(nearest_rank(&v, 0.5), 2.0);
        assert_eq!(nearest_rank(&v, 0.75), 3.0);
        let ones = [1.0, 1.0, 1.0];
        for q in [0.25, 0.5, 0.75] {
            assert_eq!(nearest_rank(&ones, q), 1.0);
        }
    }

    #[test]
    fn horizon_buckets_from_fabricated_rows() {
        // All-ones distances collapse every quantile to 1; non-proximal
        // rows and empty horizon classes never appear in the output.
        let header = "nodes,density,time_units,replicate,heuristic,parent,child,horizon,\
                      intervals,learned,refined_distance";
        let mut text = format!("# tgem-per-edge v1\n{header}\n");
        for i in 0..4 {
            text.push_str(&format!("5,0.2,500,{i},proximal,n0,n1,2,1,false,1\n"));
        }
        text.push_str("5,0.2,500,0,proximal,n0,n2,8,2,true,0.5\n");
        text.push_str("5,0.2,500,0,q=0.5,n0,n3,16,1,true,0.25\n");
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("per_edge.csv");
        std::fs::write(&path, text).unwrap();

        let buckets = distance_by_horizon(&path).unwrap();
        assert_eq!(buckets.len(), 2, "one single- and one multi-interval class");
        let single = buckets.iter().find(|b| !b.multi).unwrap();
        assert_eq!(single.horizon, 2.0);
        assert_eq!(single.count, 4);
        for v in [single.min, single.q1, single.median, single.q3, single.max] {
            assert_eq!(v, 1.0);
        }
        let multi = buckets.iter().find(|b| b.multi).unwrap();
        assert_eq!((multi.horizon, multi.median), (8.0, 0.5));
        assert!(!buckets.iter().any(|b| b.horizon == 16.0), "q=0.5 rows excluded");
    }
}
