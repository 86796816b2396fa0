//! Exact sufficient statistics: per-configuration event counts `n` and
//! occupancy durations `d`.
//!
//! A node's configuration only changes at times `t_z + a` where `t_z` is a
//! parent occurrence and `a` is an interval boundary of that parent's
//! timescale (including 0). Sweeping the sorted, deduplicated change points
//! gives exact durations; every segment is left-open right-closed, so an
//! event falling exactly on a change point belongs to the segment ending
//! there, consistent with the `(t_z + a, t_z + b]` window convention.

use crate::error::{Error, Result};
use crate::model::{config_at, map_parents, MappedParent, Tgem};
use crate::stream::EventStream;

/// Counts and durations for one node, indexed by configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct SufficientStats {
    pub node: String,
    /// Event count per configuration.
    pub n: Vec<u64>,
    /// Occupancy duration per configuration; sums to `t_star`.
    pub d: Vec<f64>,
}

impl SufficientStats {
    pub fn config_count(&self) -> usize {
        self.n.len()
    }

    pub fn total_count(&self) -> u64 {
        self.n.iter().sum()
    }

    pub fn total_duration(&self) -> f64 {
        self.d.iter().sum()
    }
}

/// Sufficient statistics of `node` under `model` for `stream`.
pub fn sufficient_stats(stream: &EventStream, model: &Tgem, node: &str) -> Result<SufficientStats> {
    let child = model.label_id(node)?;
    let incoming = model.incoming(child);
    let parents = map_parents(model, stream, &incoming)?;
    let child_sid = stream.label_id(node)?;
    let occurrences = stream.occurrences(child_sid);
    Ok(stats_for_parents(stream, node, &parents, occurrences))
}

/// Core sweep over resolved parents; also used for hypothesis scoring where
/// no full model exists.
pub(crate) fn stats_for_parents(
    stream: &EventStream,
    node: &str,
    parents: &[MappedParent<'_>],
    occurrences: &[f64],
) -> SufficientStats {
    let t_star = stream.t_star();
    let k: usize = parents.iter().map(|p| p.timescale.interval_count()).sum();
    let configs = 1usize << k;
    let mut n = vec![0u64; configs];
    let mut d = vec![0.0f64; configs];

    if k == 0 {
        n[0] = occurrences.len() as u64;
        d[0] = t_star;
        return SufficientStats {
            node: node.to_string(),
            n,
            d,
        };
    }

    // Change points: every parent occurrence shifted by every boundary of
    // its timescale (0 and each endpoint), clipped to (0, t_star], plus the
    // sweep ends 0 and t_star.
    let mut points = Vec::with_capacity(
        parents
            .iter()
            .map(|p| p.occurrences.len() * (p.timescale.interval_count() + 1))
            .sum::<usize>()
            + 2,
    );
    points.push(0.0);
    points.push(t_star);
    for p in parents {
        for &tz in p.occurrences {
            if tz < t_star {
                points.push(tz);
            }
            for &a in p.timescale.endpoints() {
                let cp = tz + a;
                if cp < t_star {
                    points.push(cp);
                }
            }
        }
    }
    points.sort_unstable_by(f64::total_cmp);
    points.dedup();

    // Sweep: configuration is constant on each (points[i], points[i+1]] and
    // left-continuous at change points, so the midpoint value equals the
    // whole segment's (evaluating at the right end itself is float-fragile:
    // `t_z < (t_z + a) - a` can round either way). Events are assigned by
    // binary search to the segment ending at or after them.
    let mut seg_config = Vec::with_capacity(points.len().saturating_sub(1));
    for w in points.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        let cfg = config_at(stream, parents, (lo + hi) / 2.0).value();
        seg_config.push(cfg);
        d[cfg] += hi - lo;
    }
    for &te in occurrences {
        let i = points.partition_point(|&c| c < te);
        debug_assert!(i >= 1 && i < points.len() + 1);
        // Segment index i-1 has right end points[i] >= te.
        let seg = (i - 1).min(seg_config.len() - 1);
        n[seg_config[seg]] += 1;
    }

    SufficientStats {
        node: node.to_string(),
        n,
        d,
    }
}

/// Check that a stats pair is internally consistent (no events inside a
/// zero-duration configuration).
pub fn check_consistency(stats: &SufficientStats) -> Result<()> {
    for (j, (&nj, &dj)) in stats.n.iter().zip(stats.d.iter()).enumerate() {
        if nj > 0 && dj == 0.0 {
            return Err(Error::InconsistentStats { index: j, count: nj });
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Timescale;
    use crate::stream::TimedEvent;

    fn two_label_model(endpoints: Vec<f64>) -> Tgem {
        let mut m = Tgem::empty(vec!["X".into(), "Z".into()]).unwrap();
        m.add_edge(1, 0, Timescale::new(endpoints).unwrap()).unwrap();
        m
    }

    fn stream(zs: &[f64], xs: &[f64], t_star: f64) -> EventStream {
        let mut events: Vec<TimedEvent> = zs
            .iter()
            .map(|&t| TimedEvent::new(t, "Z"))
            .chain(xs.iter().map(|&t| TimedEvent::new(t, "X")))
            .collect();
        events.sort_by(|a, b| a.time.total_cmp(&b.time));
        EventStream::with_vocabulary(events, t_star, vec!["X".into(), "Z".into()]).unwrap()
    }

    #[test]
    fn parentless_node_is_one_bucket() {
        let m = Tgem::empty(vec!["X".into()]).unwrap();
        let xs: Vec<f64> = (1..=10).map(|i| i as f64).collect();
        let s = EventStream::new(
            xs.iter().map(|&t| TimedEvent::new(t, "X")).collect(),
            100.0,
        )
        .unwrap();
        let st = sufficient_stats(&s, &m, "X").unwrap();
        assert_eq!(st.n, vec![10]);
        assert_eq!(st.d, vec![100.0]);
    }

    #[test]
    fn single_parent_window_hand_sweep() {
        // Z at 1, window (0,2], t* = 10, X at {2, 5}:
        // config 1 active on (1, 3], so d = [8, 2] and n = [1, 1].
        let m = two_label_model(vec![2.0]);
        let s = stream(&[1.0], &[2.0, 5.0], 10.0);
        let st = sufficient_stats(&s, &m, "X").unwrap();
        assert_eq!(st.n, vec![1, 1]);
        assert!((st.d[0] - 8.0).abs() < 1e-12);
        assert!((st.d[1] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn overlapping_windows_take_the_union() {
        // Z at {1, 2}, window (0,2], t* = 10: config 1 on (1,4], d = [7,3].
        let m = two_label_model(vec![2.0]);
        let s = stream(&[1.0, 2.0], &[], 10.0);
        let st = sufficient_stats(&s, &m, "X").unwrap();
        assert!((st.d[0] - 7.0).abs() < 1e-12);
        assert!((st.d[1] - 3.0).abs() < 1e-12);
        assert_eq!(st.total_count(), 0);
    }

    #[test]
    fn event_on_change_point_joins_the_closing_segment() {
        // Z at 1, window (0,2]. X at exactly 3.0 = 1+2: still inside (1,3].
        let m = two_label_model(vec![2.0]);
        let s = stream(&[1.0], &[3.0], 10.0);
        let st = sufficient_stats(&s, &m, "X").unwrap();
        assert_eq!(st.n, vec![0, 1]);
        // And at exactly 1.0 the window has not opened yet.
        let s = stream(&[0.5], &[0.5 + 1e-12], 10.0);
        let st = sufficient_stats(&s, &m, "X").unwrap();
        assert_eq!(st.n, vec![0, 1]);
    }

    #[test]
    fn unknown_node_is_an_error() {
        let m = two_label_model(vec![2.0]);
        let s = stream(&[1.0], &[], 10.0);
        assert!(sufficient_stats(&s, &m, "Q").is_err());
    }

    #[test]
    fn split_refinement_aggregates_back() {
        // After a midpoint split, summing the child configurations over the
        // split bit recovers the pre-split statistics exactly.
        let coarse = two_label_model(vec![4.0]);
        let fine = two_label_model(vec![2.0, 4.0]);
        let s = stream(&[1.0, 3.5, 9.0], &[2.0, 4.5, 8.0, 11.5], 20.0);
        let a = sufficient_stats(&s, &coarse, "X").unwrap();
        let b = sufficient_stats(&s, &fine, "X").unwrap();
        // Coarse bit 1 <=> either fine bit set: coarse[1] = fine[01]+[10]+[11].
        assert_eq!(a.n[1], b.n[1] + b.n[2] + b.n[3]);
        assert_eq!(a.n[0], b.n[0]);
        assert!((a.d[1] - (b.d[1] + b.d[2] + b.d[3])).abs() < 1e-12);
        assert!((a.d[0] - b.d[0]).abs() < 1e-12);
    }
}
