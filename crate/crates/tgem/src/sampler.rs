//! Exact synthetic stream generation.
//!
//! Parents must be sampled before children and mutually dependent nodes
//! jointly, so the graph is condensed into strongly connected components
//! (a single node with a self-loop counts as cyclic) and the components are
//! processed in topological order. Within a component the conditional
//! intensities are piecewise constant between *configuration change points*
//! (parent occurrences shifted by their timescale boundaries), so rejection
//! sampling is exact: draw one exponential inter-arrival per member at the
//! current rates, keep the earliest only if it lands before the next change
//! point, otherwise advance to the change point and redraw.
//!
//! Determinism: the PRNG is ChaCha12 seeded with the run seed, with one
//! substream per component (stream number = component position in
//! topological order). Each round draws members in vocabulary order,
//! skipping zero-rate members (their inter-arrival is infinite). The
//! exponential draw is `-ln(u) / rate` with `u` uniform on (0,1), redrawing
//! the zero word if it ever appears. Identical `(model, t_end, seed)`
//! therefore reproduce the identical stream on any platform.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

use crate::error::{Error, Result};
use crate::model::{ConfigIndex, Tgem, Timescale};
use crate::stream::{EventStream, TimedEvent};

/// Strongly connected components of the model graph in topological order
/// (ties by smallest member), with self-loops making singletons cyclic.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Condensation {
    /// Node ids per component, each sorted ascending; the vector order is
    /// a topological order of the component DAG.
    pub components: Vec<Vec<usize>>,
    /// Whether the component contains a cycle (more than one node, or a
    /// self-loop).
    pub cyclic: Vec<bool>,
}

impl Condensation {
    pub fn component_of(&self, node: usize) -> usize {
        self.components
            .iter()
            .position(|c| c.contains(&node))
            .expect("components partition the vocabulary")
    }
}

struct Tarjan<'g> {
    graph: &'g [Vec<usize>],
    index: usize,
    idx: Vec<Option<usize>>,
    low: Vec<usize>,
    stack: Vec<usize>,
    on_stack: Vec<bool>,
    comps: Vec<Vec<usize>>,
}

impl<'g> Tarjan<'g> {
    fn strongconnect(&mut self, v: usize) {
        self.idx[v] = Some(self.index);
        self.low[v] = self.index;
        self.index += 1;
        self.stack.push(v);
        self.on_stack[v] = true;

        for &w in &self.graph[v] {
            if self.idx[w].is_none() {
                self.strongconnect(w);
                self.low[v] = self.low[v].min(self.low[w]);
            } else if self.on_stack[w] {
                self.low[v] = self.low[v].min(self.idx[w].unwrap());
            }
        }

        if self.low[v] == self.idx[v].unwrap() {
            let mut comp = Vec::new();
            loop {
                let w = self.stack.pop().expect("stack underflow");
                self.on_stack[w] = false;
                comp.push(w);
                if w == v {
                    break;
                }
            }
            comp.sort_unstable();
            self.comps.push(comp);
        }
    }
}

/// SCC condensation of the model graph with a deterministic topological
/// order (components ordered by dependency, ties by smallest member).
pub fn condensation(model: &Tgem) -> Condensation {
    let n = model.node_count();
    let mut graph = vec![Vec::new(); n];
    for (p, c, _) in model.edges() {
        graph[p].push(c);
    }
    let mut t = Tarjan {
        graph: &graph,
        index: 0,
        idx: vec![None; n],
        low: vec![0; n],
        stack: Vec::new(),
        on_stack: vec![false; n],
        comps: Vec::new(),
    };
    for v in 0..n {
        if t.idx[v].is_none() {
            t.strongconnect(v);
        }
    }
    let comps = t.comps;

    // Tarjan emits reverse-topological order; re-sort by (depth, smallest
    // member) for a stable, dependency-respecting order.
    let mut comp_of = vec![0usize; n];
    for (ci, comp) in comps.iter().enumerate() {
        for &v in comp {
            comp_of[v] = ci;
        }
    }
    let m = comps.len();
    let mut preds: Vec<Vec<usize>> = vec![Vec::new(); m];
    for (p, c, _) in model.edges() {
        let (cp, cc) = (comp_of[p], comp_of[c]);
        if cp != cc {
            preds[cc].push(cp);
        }
    }
    // Longest-path depth in the component DAG; reverse-topological emission
    // order makes a single pass enough.
    let mut depth = vec![0usize; m];
    for ci in (0..m).rev() {
        for &p in &preds[ci] {
            depth[ci] = depth[ci].max(depth[p] + 1);
        }
    }
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by_key(|&ci| (depth[ci], comps[ci][0]));

    let components: Vec<Vec<usize>> = order.iter().map(|&ci| comps[ci].clone()).collect();
    let cyclic = components
        .iter()
        .map(|comp| comp.len() > 1 || model.has_edge(comp[0], comp[0]))
        .collect();
    Condensation { components, cyclic }
}

/// Exponential draw at `rate > 0`; strictly positive.
fn draw_exp<R: Rng>(rng: &mut R, rate: f64) -> f64 {
    loop {
        let u: f64 = rng.random();
        if u > 0.0 {
            return -u.ln() / rate;
        }
    }
}

/// Sorted queue of future configuration change points, consumed in order.
struct ChangePoints {
    sorted: Vec<f64>,
    next: usize,
}

impl ChangePoints {
    fn new(mut points: Vec<f64>) -> Self {
        points.sort_unstable_by(f64::total_cmp);
        points.dedup();
        Self {
            sorted: points,
            next: 0,
        }
    }

    /// Earliest change point strictly after `t`.
    fn first_after(&mut self, t: f64) -> Option<f64> {
        while self.next < self.sorted.len() && self.sorted[self.next] <= t {
            self.next += 1;
        }
        self.sorted.get(self.next).copied()
    }

    /// Inserts future points (all later than the consumed prefix, which
    /// stays valid).
    fn insert(&mut self, points: impl IntoIterator<Item = f64>) {
        let mut added: Vec<f64> = points.into_iter().collect();
        if added.is_empty() {
            return;
        }
        added.extend_from_slice(&self.sorted[self.next..]);
        added.sort_unstable_by(f64::total_cmp);
        added.dedup();
        self.sorted.truncate(self.next);
        self.sorted.extend(added);
    }
}

/// Per-member view used while sampling one component.
struct MemberState {
    node: usize,
    /// `(parent, timescale)` in canonical order.
    incoming: Vec<(usize, Timescale)>,
}

/// Samples a synthetic stream on `(0, t_end)` from the model.
///
/// Rates may be zero for some configurations (such nodes emit nothing until
/// their configuration changes); negative or non-finite rates are rejected.
pub fn sample(model: &Tgem, t_end: f64, seed: u64) -> Result<EventStream> {
    if t_end <= 0.0 || !t_end.is_finite() {
        return Err(Error::Sampling(format!("t_end must be positive and finite, got {t_end}")));
    }
    let diags = model.validate();
    if !diags.is_empty() {
        return Err(Error::InvalidModel(diags));
    }

    let cond = condensation(model);
    let n = model.node_count();
    let mut occurrences: Vec<Vec<f64>> = vec![Vec::new(); n];

    for (pos, comp) in cond.components.iter().enumerate() {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        rng.set_stream(pos as u64);

        let members: Vec<MemberState> = comp
            .iter()
            .map(|&node| MemberState {
                node,
                incoming: model
                    .incoming(node)
                    .into_iter()
                    .map(|(p, t)| (p, t.clone()))
                    .collect(),
            })
            .collect();

        // Future change points: every boundary (occurrence + 0 or endpoint)
        // of every parent edge into the component. External parents are
        // fully known now; internal ones are added as events are accepted.
        let mut initial = Vec::new();
        for ms in &members {
            for (p, ts) in &ms.incoming {
                if comp.contains(p) {
                    continue; // internal: no events yet
                }
                for &tz in &occurrences[*p] {
                    if tz < t_end {
                        initial.push(tz);
                    }
                    for &a in ts.endpoints() {
                        let cp = tz + a;
                        if cp < t_end {
                            initial.push(cp);
                        }
                    }
                }
            }
        }
        let mut changes = ChangePoints::new(initial);

        let mut t_cur = 0.0f64;
        loop {
            let barrier = changes.first_after(t_cur).map_or(t_end, |c| c.min(t_end));
            // Rates are constant on (t_cur, barrier] and left-continuous at
            // the barrier; the midpoint avoids float ambiguity of window
            // tests evaluated exactly on a change point.
            let eval_at = (t_cur + barrier) / 2.0;
            let mut winner: Option<(f64, usize)> = None;
            for ms in &members {
                let cfg = component_config(&ms.incoming, &occurrences, eval_at);
                let rate = model.rates(ms.node)[cfg.value()];
                if rate == 0.0 {
                    continue; // no event possible in this configuration
                }
                let tau = draw_exp(&mut rng, rate);
                let t_next = t_cur + tau;
                if winner.is_none_or(|(w, _)| t_next < w) {
                    winner = Some((t_next, ms.node));
                }
            }
            match winner {
                Some((t_ev, node)) if t_ev < barrier => {
                    occurrences[node].push(t_ev);
                    // New internal change points from this occurrence.
                    let mut fresh = Vec::new();
                    for ms in &members {
                        for (p, ts) in &ms.incoming {
                            if *p == node {
                                for &a in ts.endpoints() {
                                    let cp = t_ev + a;
                                    if cp > t_ev && cp < t_end {
                                        fresh.push(cp);
                                    }
                                }
                            }
                        }
                    }
                    changes.insert(fresh);
                    t_cur = t_ev;
                }
                _ => {
                    if barrier >= t_end {
                        break;
                    }
                    t_cur = barrier;
                }
            }
        }
    }

    let mut events: Vec<TimedEvent> = Vec::new();
    for (node, times) in occurrences.iter().enumerate() {
        let label = model.label(node);
        events.extend(times.iter().map(|&t| TimedEvent::new(t, label)));
    }
    events.sort_by(|a, b| a.time.total_cmp(&b.time));
    for w in events.windows(2) {
        if w[0].time == w[1].time {
            return Err(Error::Sampling(format!(
                "simultaneous events at t = {} (probability-zero tie)",
                w[0].time
            )));
        }
    }
    EventStream::with_vocabulary(events, t_end, model.labels().to_vec())
}

/// Configuration of a node from raw occurrence lists (the growing sample).
fn component_config(
    incoming: &[(usize, Timescale)],
    occurrences: &[Vec<f64>],
    t: f64,
) -> ConfigIndex {
    let mut value = 0usize;
    let mut k = 0usize;
    for (p, ts) in incoming {
        let occ = &occurrences[*p];
        for i in 0..ts.interval_count() {
            let (a, b) = ts.interval(i);
            let lo = t - b;
            let hi = t - a;
            let idx = occ.partition_point(|&tz| tz < lo);
            let bit = occ.get(idx).is_some_and(|&tz| tz < hi);
            value = (value << 1) | usize::from(bit);
            k += 1;
        }
    }
    ConfigIndex::new(value, k)
}
