//! Greedy forward/backward structure search.
//!
//! Forward search grows the model from the empty graph with the elementary
//! operators (add an edge with its default-horizon timescale, midpoint-split
//! an interval, double-extend a horizon); backward search shrinks it with
//! their inverses. Both phases apply the best strictly-improving move until
//! none exists (steepest ascent; the tie-break is fixed: operator kind, then
//! edge, then interval index).
//!
//! The BIC decomposes over nodes, so a move only changes its child's local
//! score. Local scores are cached by the child's incoming structure and
//! candidate deltas inside one iteration are scored in parallel; selection
//! is a deterministic reduction, so results do not depend on thread count.
//!
//! Backward `remove` is allowed for any single-interval edge, not only for
//! edges whose horizon still equals the heuristic default: the strict
//! inverse of `add` would make removability depend on the heuristic output.

use std::collections::HashMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::horizon::{default_horizons, HorizonMap, HorizonPolicy};
use crate::model::{MappedParent, Tgem, Timescale};
use crate::par;
use crate::scoring::{self, node_log_likelihood, SCORE_EPSILON};
use crate::stats::stats_for_parents;
use crate::stream::EventStream;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MoveKind {
    Add,
    Split,
    Extend,
    Remove,
    Merge,
    Truncate,
}

impl MoveKind {
    pub fn is_forward(self) -> bool {
        matches!(self, Self::Add | Self::Split | Self::Extend)
    }
}

/// One elementary operator application with its exact BIC delta.
#[derive(Debug, Clone, PartialEq)]
pub struct Move {
    pub kind: MoveKind,
    pub parent: usize,
    pub child: usize,
    /// Interval index for split (the interval to halve) and merge (the
    /// first of the two intervals to fuse).
    pub interval_index: Option<usize>,
    pub score_delta: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    Forward,
    Backward,
}

/// One accepted move in a search trace.
#[derive(Debug, Clone, Serialize)]
pub struct TraceEntry {
    pub phase: Phase,
    pub kind: MoveKind,
    pub parent: String,
    pub child: String,
    pub interval_index: Option<usize>,
    pub score_delta: f64,
    pub bic_after: f64,
}

/// Accepted moves of a search run; `bic_after` is strictly increasing
/// within each phase.
#[derive(Debug, Clone, Serialize)]
pub struct SearchTrace {
    pub initial_bic: f64,
    pub final_bic: f64,
    pub entries: Vec<TraceEntry>,
}

impl SearchTrace {
    /// Checks strict BIC ascent along the trace.
    pub fn is_monotone(&self) -> bool {
        let mut prev = self.initial_bic;
        for e in &self.entries {
            if e.bic_after.is_nan() || e.bic_after <= prev {
                return false;
            }
            prev = e.bic_after;
        }
        self.final_bic >= self.initial_bic
    }
}

/// Search configuration. Structural caps are off by default (plain
/// `learn`); the synthetic benchmark switches them on to mirror the
/// generating process.
#[derive(Debug, Clone, Copy)]
pub struct SearchOptions {
    /// Maximum number of incoming edges per node.
    pub max_indegree: Option<usize>,
    /// Maximum total interval count over a node's incoming edges.
    pub max_intervals: Option<usize>,
    /// Strict-improvement threshold on the BIC delta.
    pub epsilon: f64,
    /// Hard ceiling on accepted moves per phase; hitting it fails the run.
    pub max_moves: usize,
}

impl Default for SearchOptions {
    fn default() -> Self {
        Self {
            max_indegree: None,
            max_intervals: None,
            epsilon: SCORE_EPSILON,
            max_moves: 10_000,
        }
    }
}

impl SearchOptions {
    pub fn with_caps(max_indegree: usize, max_intervals: usize) -> Self {
        Self {
            max_indegree: Some(max_indegree),
            max_intervals: Some(max_intervals),
            ..Self::default()
        }
    }
}

/// Applies one move, returning the modified model. The child's rate table
/// is reset (scores always re-fit rates from the data).
pub fn apply_move(model: &Tgem, mv: &Move, horizons: &HorizonMap) -> Result<Tgem> {
    let mut m = model.clone();
    let (p, c) = (mv.parent, mv.child);
    match mv.kind {
        MoveKind::Add => {
            let h = horizons
                .get(&(p, c))
                .copied()
                .ok_or_else(|| Error::InvalidArgument(format!("no default horizon for ({p},{c})")))?;
            m.add_edge(p, c, Timescale::single(h)?)?;
        }
        MoveKind::Split => {
            let i = mv.interval_index.ok_or_else(|| missing_interval(mv))?;
            let ts = require_edge(model, p, c)?.split(i)?;
            m.replace_timescale(p, c, ts)?;
        }
        MoveKind::Extend => {
            let ts = require_edge(model, p, c)?.extend()?;
            m.replace_timescale(p, c, ts)?;
        }
        MoveKind::Remove => {
            let ts = require_edge(model, p, c)?;
            if ts.interval_count() != 1 {
                return Err(Error::InvalidArgument(
                    "remove applies only to single-interval edges".into(),
                ));
            }
            m.remove_edge(p, c)?;
        }
        MoveKind::Merge => {
            let i = mv.interval_index.ok_or_else(|| missing_interval(mv))?;
            let ts = require_edge(model, p, c)?.merge(i)?;
            m.replace_timescale(p, c, ts)?;
        }
        MoveKind::Truncate => {
            let ts = require_edge(model, p, c)?.truncate()?;
            m.replace_timescale(p, c, ts)?;
        }
    }
    Ok(m)
}

fn missing_interval(mv: &Move) -> Error {
    Error::InvalidArgument(format!("{:?} move needs an interval index", mv.kind))
}

fn require_edge(model: &Tgem, p: usize, c: usize) -> Result<&Timescale> {
    model
        .timescale(p, c)
        .ok_or_else(|| Error::InvalidArgument(format!("edge ({p},{c}) does not exist")))
}

// ---------------------------------------------------------------------------
// Candidate enumeration
// ---------------------------------------------------------------------------

/// A structure candidate: `child` with a hypothetical incoming edge list.
struct Candidate {
    kind: MoveKind,
    parent: usize,
    child: usize,
    interval_index: Option<usize>,
    incoming: Vec<(usize, Timescale)>,
}

fn incoming_owned(model: &Tgem, child: usize) -> Vec<(usize, Timescale)> {
    model
        .incoming(child)
        .into_iter()
        .map(|(p, t)| (p, t.clone()))
        .collect()
}

fn with_replaced(
    incoming: &[(usize, Timescale)],
    parent: usize,
    ts: Timescale,
) -> Vec<(usize, Timescale)> {
    incoming
        .iter()
        .map(|(p, t)| {
            if *p == parent {
                (*p, ts.clone())
            } else {
                (*p, t.clone())
            }
        })
        .collect()
}

/// Forward candidates in tie-break order: adds, then splits, then extends,
/// each sorted by (parent, child) and interval index.
fn forward_candidates(model: &Tgem, horizons: &HorizonMap, opts: &SearchOptions) -> Vec<Candidate> {
    let n = model.node_count();
    let mut out = Vec::new();
    let interval_ok = |child: usize| {
        opts.max_intervals
            .is_none_or(|cap| model.interval_count(child) < cap)
    };
    for parent in 0..n {
        for child in 0..n {
            if model.has_edge(parent, child) {
                continue;
            }
            let Some(&h) = horizons.get(&(parent, child)) else { continue };
            if !interval_ok(child) {
                continue;
            }
            if opts
                .max_indegree
                .is_some_and(|cap| model.in_degree(child) >= cap)
            {
                continue;
            }
            let mut incoming = incoming_owned(model, child);
            let pos = incoming.partition_point(|&(p, _)| p < parent);
            incoming.insert(pos, (parent, Timescale::single(h).expect("h > 0")));
            out.push(Candidate {
                kind: MoveKind::Add,
                parent,
                child,
                interval_index: None,
                incoming,
            });
        }
    }
    let edges = model.edges();
    for &(parent, child, ts) in &edges {
        if !interval_ok(child) {
            continue;
        }
        let base = incoming_owned(model, child);
        for i in 0..ts.interval_count() {
            out.push(Candidate {
                kind: MoveKind::Split,
                parent,
                child,
                interval_index: Some(i),
                incoming: with_replaced(&base, parent, ts.split(i).expect("index in range")),
            });
        }
    }
    for &(parent, child, ts) in &edges {
        if !interval_ok(child) {
            continue;
        }
        out.push(Candidate {
            kind: MoveKind::Extend,
            parent,
            child,
            interval_index: None,
            incoming: with_replaced(
                &incoming_owned(model, child),
                parent,
                ts.extend().expect("horizon finite"),
            ),
        });
    }
    out
}

/// Backward candidates in tie-break order: removes, merges, truncates.
fn backward_candidates(model: &Tgem) -> Vec<Candidate> {
    let mut out = Vec::new();
    let edges = model.edges();
    for &(parent, child, ts) in &edges {
        if ts.interval_count() == 1 {
            let incoming = incoming_owned(model, child)
                .into_iter()
                .filter(|&(p, _)| p != parent)
                .collect();
            out.push(Candidate {
                kind: MoveKind::Remove,
                parent,
                child,
                interval_index: None,
                incoming,
            });
        }
    }
    for &(parent, child, ts) in &edges {
        let base = incoming_owned(model, child);
        for i in 0..ts.interval_count().saturating_sub(1) {
            if ts.can_merge(i) {
                out.push(Candidate {
                    kind: MoveKind::Merge,
                    parent,
                    child,
                    interval_index: Some(i),
                    incoming: with_replaced(&base, parent, ts.merge(i).expect("checked")),
                });
            }
        }
    }
    for &(parent, child, ts) in &edges {
        if ts.can_truncate() {
            out.push(Candidate {
                kind: MoveKind::Truncate,
                parent,
                child,
                interval_index: None,
                incoming: with_replaced(
                    &incoming_owned(model, child),
                    parent,
                    ts.truncate().expect("checked"),
                ),
            });
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Local score cache
// ---------------------------------------------------------------------------

/// Key: child plus the exact incoming structure (endpoints by bit pattern).
type CacheKey = (usize, Vec<(usize, Vec<u64>)>);

fn cache_key(child: usize, incoming: &[(usize, Timescale)]) -> CacheKey {
    (
        child,
        incoming
            .iter()
            .map(|(p, t)| (*p, t.endpoints().iter().map(|e| e.to_bits()).collect()))
            .collect(),
    )
}

/// Local-score memo, keyed by incoming structure, surviving across moves
/// that do not touch the node.
struct ScoreCache {
    map: HashMap<CacheKey, f64>,
}

impl ScoreCache {
    fn new() -> Self {
        Self { map: HashMap::new() }
    }
}

/// Local decomposable score of `child` under a hypothetical incoming
/// structure: likelihood term minus `2^k ln t*`.
fn local_score_raw(
    stream: &EventStream,
    child: usize,
    incoming: &[(usize, Timescale)],
) -> Result<f64> {
    let parents: Vec<MappedParent<'_>> = incoming
        .iter()
        .map(|(p, t)| MappedParent {
            occurrences: stream.occurrences(*p),
            timescale: t,
        })
        .collect();
    let label = stream.label(child);
    let stats = stats_for_parents(stream, label, &parents, stream.occurrences(child));
    let k: usize = incoming.iter().map(|(_, t)| t.interval_count()).sum();
    Ok(node_log_likelihood(&stats)? - ((1usize << k) as f64) * stream.t_star().ln())
}

/// Scores every candidate, reusing cached locals and computing misses in
/// parallel. Returns moves (in candidate order) and their new local scores.
fn score_candidates(
    stream: &EventStream,
    cache: &mut ScoreCache,
    current_local: &[f64],
    candidates: Vec<Candidate>,
) -> Result<Vec<(Move, f64)>> {
    let mut new_locals: Vec<Option<f64>> = Vec::with_capacity(candidates.len());
    let mut misses: Vec<(usize, CacheKey)> = Vec::new();
    for (i, cand) in candidates.iter().enumerate() {
        let key = cache_key(cand.child, &cand.incoming);
        match cache.map.get(&key) {
            Some(&v) => new_locals.push(Some(v)),
            None => {
                new_locals.push(None);
                misses.push((i, key));
            }
        }
    }
    let computed: Vec<Result<f64>> = par::map_collect(
        misses.iter().map(|&(i, _)| i).collect::<Vec<_>>(),
        |i| local_score_raw(stream, candidates[i].child, &candidates[i].incoming),
    );
    for ((i, key), value) in misses.into_iter().zip(computed) {
        let value = value?;
        cache.map.insert(key, value);
        new_locals[i] = Some(value);
    }
    Ok(candidates
        .into_iter()
        .zip(new_locals)
        .map(|(c, local)| {
            let local = local.expect("filled above");
            (
                Move {
                    kind: c.kind,
                    parent: c.parent,
                    child: c.child,
                    interval_index: c.interval_index,
                    score_delta: local - current_local[c.child],
                },
                local,
            )
        })
        .collect())
}

// ---------------------------------------------------------------------------
// Public neighborhoods and searches
// ---------------------------------------------------------------------------

fn check_vocabulary(stream: &EventStream, model: &Tgem) -> Result<()> {
    if stream.vocabulary() != model.labels() {
        return Err(Error::VocabularyMismatch(
            "search requires the model to share the stream's vocabulary".into(),
        ));
    }
    Ok(())
}

fn current_locals(stream: &EventStream, model: &Tgem, cache: &mut ScoreCache) -> Result<Vec<f64>> {
    (0..model.node_count())
        .map(|node| {
            let incoming = incoming_owned(model, node);
            let key = cache_key(node, &incoming);
            if let Some(&v) = cache.map.get(&key) {
                return Ok(v);
            }
            let v = local_score_raw(stream, node, &incoming)?;
            cache.map.insert(key, v);
            Ok(v)
        })
        .collect()
}

/// All legal forward moves with their exact BIC deltas.
pub fn forward_neighborhood(
    stream: &EventStream,
    model: &Tgem,
    horizons: &HorizonMap,
    options: &SearchOptions,
) -> Result<Vec<Move>> {
    check_vocabulary(stream, model)?;
    let mut cache = ScoreCache::new();
    let locals = current_locals(stream, model, &mut cache)?;
    let cands = forward_candidates(model, horizons, options);
    Ok(score_candidates(stream, &mut cache, &locals, cands)?
        .into_iter()
        .map(|(m, _)| m)
        .collect())
}

/// All legal backward moves with their exact BIC deltas.
pub fn backward_neighborhood(
    stream: &EventStream,
    model: &Tgem,
    options: &SearchOptions,
) -> Result<Vec<Move>> {
    check_vocabulary(stream, model)?;
    let _ = options;
    let mut cache = ScoreCache::new();
    let locals = current_locals(stream, model, &mut cache)?;
    let cands = backward_candidates(model);
    Ok(score_candidates(stream, &mut cache, &locals, cands)?
        .into_iter()
        .map(|(m, _)| m)
        .collect())
}

/// Mutable bookkeeping of one search phase: the score memo, the current
/// per-node local scores, the running BIC, and the accepted-move trace.
struct SearchState {
    cache: ScoreCache,
    locals: Vec<f64>,
    bic: f64,
    trace: SearchTrace,
}

impl SearchState {
    fn start(stream: &EventStream, model: &Tgem) -> Result<Self> {
        let mut cache = ScoreCache::new();
        let locals = current_locals(stream, model, &mut cache)?;
        let bic: f64 = locals.iter().sum();
        Ok(Self {
            cache,
            locals,
            bic,
            trace: SearchTrace {
                initial_bic: bic,
                final_bic: bic,
                entries: Vec::new(),
            },
        })
    }

    fn finish(mut self) -> SearchTrace {
        self.trace.final_bic = self.bic;
        self.trace
    }
}

fn greedy_phase(
    stream: &EventStream,
    mut model: Tgem,
    horizons: &HorizonMap,
    options: &SearchOptions,
    phase: Phase,
    state: &mut SearchState,
) -> Result<Tgem> {
    for _ in 0..options.max_moves {
        let candidates = match phase {
            Phase::Forward => forward_candidates(&model, horizons, options),
            Phase::Backward => backward_candidates(&model),
        };
        if candidates.is_empty() {
            return Ok(model);
        }
        let scored = score_candidates(stream, &mut state.cache, &state.locals, candidates)?;
        // Deterministic steepest ascent: strict > keeps the earliest move in
        // tie-break order among equal deltas.
        let best = scored
            .into_iter()
            .fold(None::<(Move, f64)>, |acc, item| match acc {
                Some(ref cur) if item.0.score_delta <= cur.0.score_delta => acc,
                _ => Some(item),
            });
        let Some((mv, new_local)) = best else { return Ok(model) };
        if mv.score_delta.is_nan() || mv.score_delta <= options.epsilon {
            return Ok(model);
        }
        model = apply_move(&model, &mv, horizons)?;
        state.locals[mv.child] = new_local;
        state.bic += mv.score_delta;
        #[cfg(debug_assertions)]
        {
            let fresh: f64 = current_locals(stream, &model, &mut state.cache)?.iter().sum();
            debug_assert!(
                (fresh - state.bic).abs() < 1e-6,
                "cached BIC {} drifted from fresh {fresh}",
                state.bic
            );
        }
        state.trace.entries.push(TraceEntry {
            phase,
            kind: mv.kind,
            parent: stream.label(mv.parent).to_string(),
            child: stream.label(mv.child).to_string(),
            interval_index: mv.interval_index,
            score_delta: mv.score_delta,
            bic_after: state.bic,
        });
    }
    Err(Error::SearchDiverged(options.max_moves))
}

/// Greedy forward search from `start` (normally the empty model).
pub fn forward_search(
    stream: &EventStream,
    horizons: &HorizonMap,
    start: Tgem,
    options: &SearchOptions,
) -> Result<(Tgem, SearchTrace)> {
    check_vocabulary(stream, &start)?;
    let mut state = SearchState::start(stream, &start)?;
    let model = greedy_phase(stream, start, horizons, options, Phase::Forward, &mut state)?;
    Ok((model, state.finish()))
}

/// Greedy backward search from a fitted model.
pub fn backward_search(
    stream: &EventStream,
    model: Tgem,
    options: &SearchOptions,
) -> Result<(Tgem, SearchTrace)> {
    check_vocabulary(stream, &model)?;
    let mut state = SearchState::start(stream, &model)?;
    let horizons = HorizonMap::new(); // backward moves never consult horizons
    let model = greedy_phase(stream, model, &horizons, options, Phase::Backward, &mut state)?;
    Ok((model, state.finish()))
}

/// Result of a full `learn` run.
#[derive(Debug, Clone)]
pub struct LearnOutcome {
    /// Final model with MLE rates.
    pub model: Tgem,
    pub forward: SearchTrace,
    pub backward: SearchTrace,
    /// BIC of the empty model, the search baseline.
    pub empty_bic: f64,
    pub final_bic: f64,
}

impl LearnOutcome {
    /// Combined trace of both phases.
    pub fn full_trace(&self) -> SearchTrace {
        let mut entries = self.forward.entries.clone();
        entries.extend(self.backward.entries.iter().cloned());
        SearchTrace {
            initial_bic: self.empty_bic,
            final_bic: self.final_bic,
            entries,
        }
    }
}

/// Two-phase structure learning: forward search from the empty model, then
/// backward simplification, then an MLE rate fit.
pub fn learn(
    stream: &EventStream,
    policy: HorizonPolicy,
    options: &SearchOptions,
) -> Result<LearnOutcome> {
    let horizons = default_horizons(stream, policy)?;
    learn_with_horizons(stream, &horizons, options)
}

/// Learning with a precomputed horizon map (the benchmark caches these).
pub fn learn_with_horizons(
    stream: &EventStream,
    horizons: &HorizonMap,
    options: &SearchOptions,
) -> Result<LearnOutcome> {
    let empty = Tgem::empty(stream.vocabulary().to_vec())?;
    let (forward_model, forward) = forward_search(stream, horizons, empty, options)?;
    let (mut model, backward) = backward_search(stream, forward_model, options)?;
    scoring::fit_mle(stream, &mut model)?;
    let empty_bic = forward.initial_bic;
    let final_bic = backward.final_bic;
    Ok(LearnOutcome {
        model,
        forward,
        backward,
        empty_bic,
        final_bic,
    })
}

#[cfg(test)]
#[allow(unused_imports)]
pub(crate) use tests::chain_stream;
