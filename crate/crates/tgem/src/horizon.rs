//! Data-driven default horizons.
//!
//! Forward search seeds every new edge `z -> x` with a timescale
//! `(0, h_def]`; these heuristics pick `h_def` per ordered pair from the
//! inter-event times. The quantile heuristic takes an order statistic of
//! `{t_zx}`. The proximal heuristic maximizes the single-edge node
//! log-likelihood over the candidate set `H* = {t_zx} ∪ {max t_zz}`: event
//! counts only change at inter-event times, windows larger than `max t_zz`
//! add nothing, and on the stretch between consecutive candidates the
//! objective is convex in the window coverage, so the optimum sits at a
//! candidate or at a candidate's left limit. Both variants are evaluated
//! per candidate (the window `(0, h]` includes a parent at exactly distance
//! `h`; its left limit excludes it), computed exactly from distance counts
//! and coverage, and the best candidate value is returned.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::par;
use crate::stream::{inter_event_times, EventStream};

/// Default-horizon policy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum HorizonPolicy {
    Proximal,
    Quantile(f64),
}

impl HorizonPolicy {
    pub fn quantile(q: f64) -> Result<Self> {
        if !(q > 0.0 && q < 1.0) {
            return Err(Error::InvalidArgument(format!("quantile must lie in (0,1), got {q}")));
        }
        Ok(Self::Quantile(q))
    }

    /// Stable name used in benchmark rows and reports.
    pub fn name(&self) -> String {
        match self {
            Self::Proximal => "proximal".into(),
            Self::Quantile(q) => format!("q={q}"),
        }
    }

    pub fn parse(name: &str) -> Result<Self> {
        if name == "proximal" {
            return Ok(Self::Proximal);
        }
        if let Some(q) = name.strip_prefix("q=") {
            let q: f64 = q
                .parse()
                .map_err(|_| Error::InvalidArgument(format!("bad quantile `{q}`")))?;
            return Self::quantile(q);
        }
        Err(Error::InvalidArgument(format!("unknown heuristic `{name}`")))
    }
}

/// Default horizons per ordered `(parent, child)` pair of stream label ids.
/// Pairs whose heuristic yields nothing are absent.
pub type HorizonMap = BTreeMap<(usize, usize), f64>;

/// Nearest-rank quantile of the inter-event times from `z` to `x`:
/// ascending sort, 1-based index `ceil(q * n)`. `None` when the multiset is
/// empty.
pub fn quantile_horizon(stream: &EventStream, z: &str, x: &str, q: f64) -> Result<Option<f64>> {
    if !(q > 0.0 && q < 1.0) {
        return Err(Error::InvalidArgument(format!("quantile must lie in (0,1), got {q}")));
    }
    let mut times = inter_event_times(stream, z, x)?;
    if times.is_empty() {
        return Ok(None);
    }
    times.sort_by(f64::total_cmp);
    let rank = (q * times.len() as f64).ceil() as usize;
    Ok(Some(times[rank.max(1) - 1]))
}

/// Single-edge objective machinery for the proximal heuristic: the node
/// log-likelihood of `x` under the hypothesis `z -> x` with window
/// `(0, h]`, expressed through exact distance counts and window coverage.
struct ProximalObjective {
    /// Distance of each `x` occurrence to its most recent strictly earlier
    /// `z`, ascending; occurrences with no earlier `z` always sit in the
    /// empty configuration.
    distances: Vec<f64>,
    /// Gaps following each `z` occurrence (to the next one, or to `t_star`),
    /// ascending, with prefix sums: coverage of the union of windows
    /// `(t_z, t_z + h]` is `sum(min(gap, h))`.
    gaps: Vec<f64>,
    gap_prefix: Vec<f64>,
    total_events: usize,
    t_star: f64,
}

impl ProximalObjective {
    fn new(stream: &EventStream, zi: usize, xi: usize) -> Self {
        let zs = stream.occurrences(zi);
        let xs = stream.occurrences(xi);
        let mut distances = Vec::with_capacity(xs.len());
        for &tx in xs {
            let k = zs.partition_point(|&tz| tz < tx);
            if k > 0 {
                distances.push(tx - zs[k - 1]);
            }
        }
        distances.sort_by(f64::total_cmp);
        let mut gaps: Vec<f64> = zs
            .windows(2)
            .map(|w| w[1] - w[0])
            .chain(zs.last().map(|&last| stream.t_star() - last))
            .collect();
        gaps.sort_by(f64::total_cmp);
        let mut gap_prefix = Vec::with_capacity(gaps.len() + 1);
        gap_prefix.push(0.0);
        for &g in &gaps {
            gap_prefix.push(gap_prefix.last().unwrap() + g);
        }
        Self {
            distances,
            gaps,
            gap_prefix,
            total_events: xs.len(),
            t_star: stream.t_star(),
        }
    }

    fn coverage(&self, h: f64) -> f64 {
        let i = self.gaps.partition_point(|&g| g <= h);
        self.gap_prefix[i] + h * (self.gaps.len() - i) as f64
    }

    /// Objective with `include_boundary` selecting the window value itself
    /// (distance <= h counts) or its left limit (strict <).
    fn value(&self, h: f64, include_boundary: bool) -> f64 {
        let n1 = if include_boundary {
            self.distances.partition_point(|&d| d <= h)
        } else {
            self.distances.partition_point(|&d| d < h)
        };
        let n0 = self.total_events - n1;
        let d1 = self.coverage(h);
        let d0 = self.t_star - d1;
        let term = |n: usize, d: f64| {
            if n == 0 {
                0.0
            } else {
                n as f64 * (n as f64 / d).ln()
            }
        };
        term(n1, d1) + term(n0, d0) - self.total_events as f64
    }
}

/// Likelihood-maximizing horizon for the single-edge hypothesis `z -> x`
/// over the candidate set `H*` and its left limits; ties break toward the
/// smaller candidate. `None` when `z` never occurs.
pub fn proximal_horizon(stream: &EventStream, z: &str, x: &str) -> Result<Option<f64>> {
    let zi = stream.label_id(z)?;
    let xi = stream.label_id(x)?;
    let t_zz = inter_event_times(stream, z, z)?;
    let Some(max_zz) = t_zz.iter().copied().max_by(f64::total_cmp) else {
        return Ok(None); // z never occurs
    };
    let mut candidates = if z == x {
        t_zz
    } else {
        inter_event_times(stream, z, x)?
    };
    candidates.push(max_zz);
    candidates.sort_by(f64::total_cmp);
    candidates.dedup();

    let objective = ProximalObjective::new(stream, zi, xi);
    let mut best: Option<(f64, f64)> = None; // (objective, h)
    for h in candidates {
        let achieved = objective.value(h, true).max(objective.value(h, false));
        // Strict improvement keeps the smallest maximizer (ascending scan).
        if best.is_none_or(|(o, _)| achieved > o) {
            best = Some((achieved, h));
        }
    }
    Ok(best.map(|(_, h)| h))
}

/// Applies the policy to every ordered pair including self-pairs. Pairs
/// without a defined horizon are excluded; downstream they contribute no
/// add move. Pair evaluations run in parallel with a deterministic merge.
pub fn default_horizons(stream: &EventStream, policy: HorizonPolicy) -> Result<HorizonMap> {
    let results = par::map_collect(all_pairs(stream), |p| eval_pair(stream, policy, p));
    collect_horizons(results)
}

/// Sequential reference implementation; identical output.
pub fn default_horizons_seq(stream: &EventStream, policy: HorizonPolicy) -> Result<HorizonMap> {
    let results = par::map_collect_seq(all_pairs(stream), |p| eval_pair(stream, policy, p));
    collect_horizons(results)
}

type PairResult = ((usize, usize), Result<Option<f64>>);

fn all_pairs(stream: &EventStream) -> Vec<(usize, usize)> {
    let n = stream.vocabulary().len();
    let mut pairs = Vec::with_capacity(n * n);
    for z in 0..n {
        for x in 0..n {
            pairs.push((z, x));
        }
    }
    pairs
}

fn eval_pair(stream: &EventStream, policy: HorizonPolicy, (z, x): (usize, usize)) -> PairResult {
    let zl = stream.label(z);
    let xl = stream.label(x);
    let h = match policy {
        HorizonPolicy::Proximal => proximal_horizon(stream, zl, xl),
        HorizonPolicy::Quantile(q) => quantile_horizon(stream, zl, xl, q),
    };
    ((z, x), h)
}

fn collect_horizons(results: Vec<PairResult>) -> Result<HorizonMap> {
    let mut out = HorizonMap::new();
    for (pair, h) in results {
        if let Some(h) = h? {
            out.insert(pair, h);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stream::example_stream;

    #[test]
    fn quantile_on_the_example_stream() {
        let s = example_stream();
        assert_eq!(quantile_horizon(&s, "A", "A", 0.5).unwrap(), Some(7.5));
        assert_eq!(quantile_horizon(&s, "C", "B", 0.95).unwrap(), Some(3.5));
        assert_eq!(quantile_horizon(&s, "C", "B", 0.25).unwrap(), Some(2.5));
    }

    #[test]
    fn quantile_empty_set_is_none() {
        let s = crate::stream::EventStream::with_vocabulary(
            vec![crate::stream::TimedEvent::new(1.0, "X")],
            5.0,
            vec!["X".into(), "Z".into()],
        )
        .unwrap();
        assert_eq!(quantile_horizon(&s, "Z", "X", 0.5).unwrap(), None);
        assert!(quantile_horizon(&s, "Z", "X", 0.0).is_err());
    }

    #[test]
    fn quantile_is_monotone_in_q() {
        let s = example_stream();
        let mut prev = f64::NEG_INFINITY;
        for q in [0.05, 0.25, 0.5, 0.75, 0.95] {
            let h = quantile_horizon(&s, "A", "A", q).unwrap().unwrap();
            assert!(h >= prev);
            prev = h;
        }
    }

    #[test]
    fn proximal_returns_a_candidate_and_maximizes_over_them() {
        let s = example_stream();
        for (z, x) in [("A", "C"), ("C", "B"), ("A", "A"), ("B", "C")] {
            let h = proximal_horizon(&s, z, x).unwrap().unwrap();
            let mut candidates = inter_event_times(&s, z, x).unwrap();
            if z != x {
                let zz = inter_event_times(&s, z, z).unwrap();
                candidates.push(zz.iter().copied().fold(f64::MIN, f64::max));
            }
            assert!(candidates.contains(&h), "{z}->{x}: {h} not in {candidates:?}");

            // Exhaustive dominance over candidates and their left limits.
            let zi = s.label_id(z).unwrap();
            let xi = s.label_id(x).unwrap();
            let objective = ProximalObjective::new(&s, zi, xi);
            let achieved = |h: f64| objective.value(h, true).max(objective.value(h, false));
            let at_h = achieved(h);
            for &c in &candidates {
                assert!(at_h >= achieved(c) - 1e-12, "{z}->{x}: {c} beats returned {h}");
            }
        }
    }

    #[test]
    fn proximal_objective_matches_hypothesis_statistics() {
        // Away from window boundaries the count/coverage objective equals
        // the node log-likelihood of the explicit single-edge hypothesis.
        use crate::model::Tgem;
        use crate::scoring::node_log_likelihood;
        use crate::stats::sufficient_stats;
        let s = example_stream();
        let zi = s.label_id("A").unwrap();
        let xi = s.label_id("C").unwrap();
        let objective = ProximalObjective::new(&s, zi, xi);
        for h in [0.3, 0.9, 1.2, 2.7, 5.1, 8.3, 14.2] {
            let mut hyp = Tgem::empty(s.vocabulary().to_vec()).unwrap();
            hyp.add_edge(zi, xi, crate::model::Timescale::single(h).unwrap()).unwrap();
            let st = sufficient_stats(&s, &hyp, "C").unwrap();
            let via_stats = node_log_likelihood(&st).unwrap();
            let direct = objective.value(h, true);
            assert!(
                (via_stats - direct).abs() < 1e-9,
                "h={h}: stats {via_stats} vs direct {direct}"
            );
        }
    }

    #[test]
    fn proximal_when_x_never_occurs_returns_smallest_candidate() {
        let s = crate::stream::EventStream::with_vocabulary(
            vec![
                crate::stream::TimedEvent::new(1.0, "Z"),
                crate::stream::TimedEvent::new(3.0, "Z"),
            ],
            10.0,
            vec!["X".into(), "Z".into()],
        )
        .unwrap();
        // Candidates: {t_zx} = {} plus max t_zz = 7 -> singleton {7}.
        assert_eq!(proximal_horizon(&s, "Z", "X").unwrap(), Some(7.0));
        // z never occurs -> none.
        assert_eq!(proximal_horizon(&s, "X", "Z").unwrap(), None);
    }

    #[test]
    fn default_horizons_cover_defined_pairs() {
        let s = example_stream();
        let m = default_horizons(&s, HorizonPolicy::Proximal).unwrap();
        assert_eq!(m.len(), 9, "all three labels occur, so all 9 pairs are defined");
        let c = s.label_id("C").unwrap();
        let b = s.label_id("B").unwrap();
        assert!(m.contains_key(&(c, b)));

        let q = default_horizons(&s, HorizonPolicy::quantile(0.5).unwrap()).unwrap();
        let a = s.label_id("A").unwrap();
        assert_eq!(q.get(&(a, a)), Some(&7.5));

        let seq = default_horizons_seq(&s, HorizonPolicy::Proximal).unwrap();
        assert_eq!(m, seq);
    }

    #[test]
    fn empty_stream_has_no_horizons() {
        let s = crate::stream::EventStream::with_vocabulary(
            vec![],
            10.0,
            vec!["A".into(), "B".into()],
        )
        .unwrap();
        assert!(default_horizons(&s, HorizonPolicy::Proximal).unwrap().is_empty());
        assert!(default_horizons(&s, HorizonPolicy::quantile(0.5).unwrap())
            .unwrap()
            .is_empty());
    }
}
