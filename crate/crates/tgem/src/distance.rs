//! Structural distances between models and edge-recovery scores.
//!
//! The global distance extends the structural Hamming distance: every edge
//! present in only one model adds 1, every shared edge adds an *elementary*
//! distance between its two timescales. The set-based elementary distance
//! compares endpoint sets; the refined one matches endpoints by mutual
//! minimal absolute difference and charges matched pairs their relative
//! difference (clamped at 1) and unmatched endpoints 1, normalized by the
//! total number of matched pairs plus unmatched endpoints. The `(0,0)` pair
//! counts as matched but contributes nothing.

use crate::error::{Error, Result};
use crate::model::{Tgem, Timescale};

/// Mutual-closest endpoint matching between two endpoint vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct EndpointMatching {
    /// Matched pairs `(u from v1, w from v2)`, ascending in `u`.
    pub pairs: Vec<(f64, f64)>,
    /// `e_m`: number of matched pairs.
    pub matched: usize,
    /// `e_nm`: endpoints of either vector left unmatched.
    pub unmatched: usize,
}

/// Index of the element of `v` closest to `x`; equidistant ties break
/// toward the smaller value (lower index, since `v` is ascending).
fn closest(x: f64, v: &[f64]) -> usize {
    let mut best = 0;
    let mut best_d = (x - v[0]).abs();
    for (i, &w) in v.iter().enumerate().skip(1) {
        let d = (x - w).abs();
        if d < best_d {
            best = i;
            best_d = d;
        }
    }
    best
}

/// Matches endpoints of two vectors (both sorted, starting with 0) by
/// mutual minimal absolute difference.
pub fn match_endpoints(v1: &[f64], v2: &[f64]) -> EndpointMatching {
    debug_assert!(v1.first() == Some(&0.0) && v2.first() == Some(&0.0));
    let mut pairs = Vec::new();
    for (i, &u) in v1.iter().enumerate() {
        let j = closest(u, v2);
        if closest(v2[j], v1) == i {
            pairs.push((u, v2[j]));
        }
    }
    let matched = pairs.len();
    let unmatched = (v1.len() - matched) + (v2.len() - matched);
    EndpointMatching {
        pairs,
        matched,
        unmatched,
    }
}

/// Set-based elementary distance: `|v1 Δ v2| / (|v1 Δ v2| + |v1 ∩ v2|)`
/// over endpoint vectors including the shared leading 0.
pub fn elementary_distance_set(t1: &Timescale, t2: &Timescale) -> f64 {
    let v1 = t1.endpoint_vector();
    let v2 = t2.endpoint_vector();
    let mut shared = 0usize;
    for &u in &v1 {
        if v2.contains(&u) {
            shared += 1;
        }
    }
    let nid = (v1.len() - shared) + (v2.len() - shared);
    nid as f64 / (nid + shared) as f64
}

/// Refined elementary distance via mutual-closest matching; lies in [0, 1].
pub fn elementary_distance_refined(t1: &Timescale, t2: &Timescale) -> f64 {
    let v1 = t1.endpoint_vector();
    let v2 = t2.endpoint_vector();
    let m = match_endpoints(&v1, &v2);
    let mut sum = 0.0;
    for &(u, w) in &m.pairs {
        if u == 0.0 && w == 0.0 {
            continue;
        }
        let rel = (u - w).abs() / u.min(w);
        sum += rel.min(1.0);
    }
    (sum + m.unmatched as f64) / (m.matched + m.unmatched) as f64
}

/// Which elementary distance a model comparison uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DistanceMode {
    Set,
    Refined,
}

impl DistanceMode {
    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "set" => Ok(Self::Set),
            "refined" => Ok(Self::Refined),
            other => Err(Error::InvalidArgument(format!("unknown distance mode `{other}`"))),
        }
    }
}

fn elementary(mode: DistanceMode, t1: &Timescale, t2: &Timescale) -> f64 {
    match mode {
        DistanceMode::Set => elementary_distance_set(t1, t2),
        DistanceMode::Refined => elementary_distance_refined(t1, t2),
    }
}

/// Per-edge contribution to the global distance.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeContribution {
    pub parent: String,
    pub child: String,
    /// `"only_a"`, `"only_b"`, or `"shared"`.
    pub status: &'static str,
    pub value: f64,
}

fn check_same_vocabulary(a: &Tgem, b: &Tgem) -> Result<()> {
    if a.labels() != b.labels() {
        return Err(Error::VocabularyMismatch(format!(
            "{:?} vs {:?}",
            a.labels(),
            b.labels()
        )));
    }
    Ok(())
}

/// Global model distance with its per-edge breakdown.
pub fn model_distance_breakdown(
    a: &Tgem,
    b: &Tgem,
    mode: DistanceMode,
) -> Result<(f64, Vec<EdgeContribution>)> {
    check_same_vocabulary(a, b)?;
    let mut contributions = Vec::new();
    let mut total = 0.0;
    for (p, c, ts) in a.edges() {
        let entry = match b.timescale(p, c) {
            Some(other) => EdgeContribution {
                parent: a.label(p).to_string(),
                child: a.label(c).to_string(),
                status: "shared",
                value: elementary(mode, ts, other),
            },
            None => EdgeContribution {
                parent: a.label(p).to_string(),
                child: a.label(c).to_string(),
                status: "only_a",
                value: 1.0,
            },
        };
        total += entry.value;
        contributions.push(entry);
    }
    for (p, c, _) in b.edges() {
        if a.timescale(p, c).is_none() {
            total += 1.0;
            contributions.push(EdgeContribution {
                parent: b.label(p).to_string(),
                child: b.label(c).to_string(),
                status: "only_b",
                value: 1.0,
            });
        }
    }
    Ok((total, contributions))
}

/// Global model distance (symmetric-difference edges count 1, shared edges
/// their elementary distance).
pub fn model_distance(a: &Tgem, b: &Tgem, mode: DistanceMode) -> Result<f64> {
    Ok(model_distance_breakdown(a, b, mode)?.0)
}

/// Edge-recovery classification scores over ordered pairs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EdgeRecovery {
    pub true_positives: usize,
    pub true_edges: usize,
    pub learned_edges: usize,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

/// Precision/recall/F1 of learned edges against the generating model.
/// When a denominator is 0 with no true positives the score is 0.
pub fn edge_f1(truth: &Tgem, learned: &Tgem) -> Result<EdgeRecovery> {
    check_same_vocabulary(truth, learned)?;
    let tp = truth
        .edges()
        .iter()
        .filter(|&&(p, c, _)| learned.has_edge(p, c))
        .count();
    let t = truth.edge_count();
    let l = learned.edge_count();
    let precision = if l == 0 { 0.0 } else { tp as f64 / l as f64 };
    let recall = if t == 0 { 0.0 } else { tp as f64 / t as f64 };
    let f1 = if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    };
    Ok(EdgeRecovery {
        true_positives: tp,
        true_edges: t,
        learned_edges: l,
        precision,
        recall,
        f1,
    })
}

/// One true edge's recovery record, used for the distance-per-horizon
/// analysis: a missing learned edge scores 1.
#[derive(Debug, Clone, PartialEq)]
pub struct TrueEdgeDistance {
    pub parent: String,
    pub child: String,
    pub horizon: f64,
    pub intervals: usize,
    pub learned: bool,
    pub refined_distance: f64,
}

/// Refined elementary distance of every true edge to its learned
/// counterpart (1 when absent).
pub fn per_edge_distances(truth: &Tgem, learned: &Tgem) -> Result<Vec<TrueEdgeDistance>> {
    check_same_vocabulary(truth, learned)?;
    Ok(truth
        .edges()
        .into_iter()
        .map(|(p, c, ts)| {
            let counterpart = learned.timescale(p, c);
            TrueEdgeDistance {
                parent: truth.label(p).to_string(),
                child: truth.label(c).to_string(),
                horizon: ts.horizon(),
                intervals: ts.interval_count(),
                learned: counterpart.is_some(),
                refined_distance: counterpart
                    .map_or(1.0, |other| elementary_distance_refined(ts, other)),
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ts(endpoints: &[f64]) -> Timescale {
        Timescale::new(endpoints.to_vec()).unwrap()
    }

    #[test]
    fn matching_on_near_and_far_vectors() {
        let m = match_endpoints(&[0.0, 2.0, 4.0], &[0.0, 1.99, 3.98]);
        assert_eq!(m.pairs, vec![(0.0, 0.0), (2.0, 1.99), (4.0, 3.98)]);
        assert_eq!(m.unmatched, 0);

        let m = match_endpoints(&[0.0, 2.0, 4.0], &[0.0, 16.0, 32.0]);
        assert_eq!(m.pairs, vec![(0.0, 0.0)]);
        assert_eq!(m.unmatched, 4);

        let m = match_endpoints(&[0.0, 1.0, 2.0], &[0.0, 1.0, 2.0]);
        assert_eq!(m.matched, 3);
        assert_eq!(m.unmatched, 0);
    }

    #[test]
    fn set_distance_cannot_tell_near_from_far() {
        assert_eq!(elementary_distance_set(&ts(&[2.0, 4.0]), &ts(&[1.99, 3.98])), 0.8);
        assert_eq!(elementary_distance_set(&ts(&[2.0, 4.0]), &ts(&[16.0, 32.0])), 0.8);
        assert_eq!(elementary_distance_set(&ts(&[2.0, 4.0]), &ts(&[2.0, 4.0])), 0.0);
    }

    #[test]
    fn refined_distance_tells_them_apart() {
        let near = elementary_distance_refined(&ts(&[2.0, 4.0]), &ts(&[1.99, 3.98]));
        assert!((near - 0.00335).abs() < 5e-4, "{near}");
        let far = elementary_distance_refined(&ts(&[2.0, 4.0]), &ts(&[16.0, 32.0]));
        assert_eq!(far, 0.8);
        assert_eq!(elementary_distance_refined(&ts(&[2.0, 4.0]), &ts(&[2.0, 4.0])), 0.0);
    }

    #[test]
    fn refined_distance_interval_absorbed() {
        // (0,1],(1,2] against (0,2]: endpoint 1 unmatched, 2 exact.
        let d = elementary_distance_refined(&ts(&[1.0, 2.0]), &ts(&[2.0]));
        assert!((d - 1.0 / 3.0).abs() < 1e-12, "{d}");
    }

    fn model(edges: &[(&str, &str, &[f64])]) -> Tgem {
        let mut m = Tgem::empty(vec!["A".into(), "B".into(), "C".into()]).unwrap();
        for &(p, c, e) in edges {
            let p = m.label_id(p).unwrap();
            let c = m.label_id(c).unwrap();
            m.add_edge(p, c, ts(e)).unwrap();
        }
        m
    }

    #[test]
    fn model_distance_counts_and_elementary_terms() {
        let a = model(&[("A", "B", &[2.0, 4.0])]);
        let b = model(&[("A", "B", &[1.99, 3.98])]);
        assert_eq!(model_distance(&a, &a, DistanceMode::Refined).unwrap(), 0.0);
        let d = model_distance(&a, &b, DistanceMode::Refined).unwrap();
        assert!((d - 0.00335).abs() < 5e-4);

        let truth = model(&[("A", "B", &[2.0]), ("B", "C", &[4.0])]);
        let empty = model(&[]);
        assert_eq!(model_distance(&truth, &empty, DistanceMode::Refined).unwrap(), 2.0);
        assert_eq!(
            model_distance(&truth, &empty, DistanceMode::Refined).unwrap(),
            model_distance(&empty, &truth, DistanceMode::Refined).unwrap()
        );
    }

    #[test]
    fn f1_counts_ordered_pairs() {
        let truth = model(&[("A", "B", &[2.0]), ("B", "C", &[4.0])]);
        let learned = model(&[("A", "B", &[8.0]), ("C", "A", &[1.0])]);
        let r = edge_f1(&truth, &learned).unwrap();
        assert_eq!(r.precision, 0.5);
        assert_eq!(r.recall, 0.5);
        assert_eq!(r.f1, 0.5);

        let r = edge_f1(&truth, &model(&[])).unwrap();
        assert_eq!(r.f1, 0.0);
        let r = edge_f1(&truth, &truth).unwrap();
        assert_eq!(r.f1, 1.0);
    }

    #[test]
    fn vocabulary_mismatch_is_rejected() {
        let a = model(&[]);
        let b = Tgem::empty(vec!["A".into(), "B".into()]).unwrap();
        assert!(model_distance(&a, &b, DistanceMode::Set).is_err());
        assert!(edge_f1(&a, &b).is_err());
    }

    #[test]
    fn per_edge_rows_classify_by_horizon_and_arity() {
        let truth = model(&[("A", "B", &[2.0, 4.0]), ("B", "C", &[8.0])]);
        let learned = model(&[("A", "B", &[2.0, 4.0])]);
        let rows = per_edge_distances(&truth, &learned).unwrap();
        assert_eq!(rows.len(), 2);
        assert_eq!(rows[0].horizon, 4.0);
        assert_eq!(rows[0].intervals, 2);
        assert!(rows[0].learned);
        assert_eq!(rows[0].refined_distance, 0.0);
        assert!(!rows[1].learned);
        assert_eq!(rows[1].refined_distance, 1.0);
    }
}

#[cfg(test)]
mod props {
    use super::*;
    use proptest::prelude::*;

    fn arb_timescale() -> impl Strategy<Value = Timescale> {
        proptest::collection::vec(0.01f64..100.0, 1..6).prop_map(|mut v| {
            v.sort_by(f64::total_cmp);
            v.dedup();
            Timescale::new(v).unwrap()
        })
    }

    proptest! {
        #[test]
        fn elementary_distances_are_symmetric_and_bounded(
            a in arb_timescale(),
            b in arb_timescale()
        ) {
            let s1 = elementary_distance_set(&a, &b);
            let s2 = elementary_distance_set(&b, &a);
            prop_assert!((s1 - s2).abs() < 1e-15);
            prop_assert!((0.0..1.0).contains(&s1));

            let r1 = elementary_distance_refined(&a, &b);
            let r2 = elementary_distance_refined(&b, &a);
            prop_assert!((r1 - r2).abs() < 1e-12);
            prop_assert!((0.0..=1.0).contains(&r1));

            prop_assert!(elementary_distance_refined(&a, &a) == 0.0);
        }

        #[test]
        fn far_apart_vectors_degenerate_to_set_distance(
            a in proptest::collection::vec(0.5f64..2.0, 1..4),
            b in proptest::collection::vec(500.0f64..2000.0, 1..4),
        ) {
            // No near endpoints beyond 0: only (0,0) matches, every relative
            // difference clamps at 1, so refined == set-based.
            let mut a = a; a.sort_by(f64::total_cmp); a.dedup();
            let mut b = b; b.sort_by(f64::total_cmp); b.dedup();
            let ta = Timescale::new(a).unwrap();
            let tb = Timescale::new(b).unwrap();
            let refined = elementary_distance_refined(&ta, &tb);
            let set = elementary_distance_set(&ta, &tb);
            prop_assert!((refined - set).abs() < 1e-12);
        }
    }
}
