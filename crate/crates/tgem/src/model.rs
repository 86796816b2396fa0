//! TGEM representation: labeled directed graph (self-loops allowed), one
//! timescale per edge, one rate table per node.
//!
//! Every bit of a node's configuration index refers to one interval of one
//! incoming edge in *canonical order*: incoming edges sorted by parent
//! position in the vocabulary, intervals of an edge ascending. The leftmost
//! bit is the most significant, so the printed key of a configuration reads
//! like the usual rate subscript (`"01"` for "absent in the first interval,
//! present in the second").

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stream::EventStream;

/// Hard cap on intervals per node; the rate table has `2^k` entries.
const MAX_INTERVALS_HARD: usize = 24;

/// A partition of `(0, t_h]` into half-open intervals `(a, b]`, stored as
/// the strictly increasing vector of right endpoints.
#[derive(Debug, Clone, PartialEq)]
pub struct Timescale {
    endpoints: Vec<f64>,
}

impl Timescale {
    pub fn new(endpoints: Vec<f64>) -> Result<Self> {
        if endpoints.is_empty() {
            return Err(Error::InvalidArgument("timescale needs at least one endpoint".into()));
        }
        let mut prev = 0.0;
        for &e in &endpoints {
            if e <= prev || !e.is_finite() {
                return Err(Error::InvalidArgument(format!(
                    "timescale endpoints must be finite and strictly increasing, got {endpoints:?}"
                )));
            }
            prev = e;
        }
        Ok(Self { endpoints })
    }

    /// Single interval `(0, h]`.
    pub fn single(h: f64) -> Result<Self> {
        Self::new(vec![h])
    }

    pub fn endpoints(&self) -> &[f64] {
        &self.endpoints
    }

    /// Endpoint vector including the leading 0, the form used by the
    /// structural distances.
    pub fn endpoint_vector(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(self.endpoints.len() + 1);
        v.push(0.0);
        v.extend_from_slice(&self.endpoints);
        v
    }

    pub fn interval_count(&self) -> usize {
        self.endpoints.len()
    }

    /// The `i`-th interval as `(a, b]`.
    pub fn interval(&self, i: usize) -> (f64, f64) {
        let a = if i == 0 { 0.0 } else { self.endpoints[i - 1] };
        (a, self.endpoints[i])
    }

    /// Largest endpoint.
    pub fn horizon(&self) -> f64 {
        *self.endpoints.last().unwrap()
    }

    /// Replaces interval `i = (a, b]` by `(a, m], (m, b]` with `m = (a+b)/2`.
    pub fn split(&self, i: usize) -> Result<Self> {
        if i >= self.interval_count() {
            return Err(Error::InvalidArgument(format!("no interval {i} to split")));
        }
        let (a, b) = self.interval(i);
        let mid = (a + b) / 2.0;
        let mut endpoints = self.endpoints.clone();
        endpoints.insert(i, mid);
        Self::new(endpoints)
    }

    /// Appends `(h, 2h]` past the current horizon `h`.
    pub fn extend(&self) -> Result<Self> {
        let h = self.horizon();
        let mut endpoints = self.endpoints.clone();
        endpoints.push(2.0 * h);
        Self::new(endpoints)
    }

    /// True when intervals `i` and `i+1` form an exact midpoint split and can
    /// be merged back.
    pub fn can_merge(&self, i: usize) -> bool {
        if i + 1 >= self.interval_count() {
            return false;
        }
        let (a, c) = self.interval(i);
        let (_, b) = self.interval(i + 1);
        c == (a + b) / 2.0
    }

    pub fn merge(&self, i: usize) -> Result<Self> {
        if !self.can_merge(i) {
            return Err(Error::InvalidArgument(format!(
                "intervals {i} and {} are not an exact midpoint split",
                i + 1
            )));
        }
        let mut endpoints = self.endpoints.clone();
        endpoints.remove(i);
        Self::new(endpoints)
    }

    /// True when the last interval `(a, b]` satisfies `b = 2a` exactly and
    /// can be dropped (inverse of `extend`).
    pub fn can_truncate(&self) -> bool {
        let n = self.interval_count();
        if n < 2 {
            return false;
        }
        let (a, b) = self.interval(n - 1);
        b == 2.0 * a
    }

    pub fn truncate(&self) -> Result<Self> {
        if !self.can_truncate() {
            return Err(Error::InvalidArgument(
                "last interval is not a doubling extension".into(),
            ));
        }
        let mut endpoints = self.endpoints.clone();
        endpoints.pop();
        Self::new(endpoints)
    }
}

/// A parent configuration of one node: `k` bits in canonical order, leftmost
/// most significant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ConfigIndex {
    value: usize,
    k: usize,
}

impl ConfigIndex {
    pub fn new(value: usize, k: usize) -> Self {
        debug_assert!(k == 0 || value < (1 << k));
        Self { value, k }
    }

    pub fn from_bits(bits: &[u8]) -> Self {
        let mut value = 0usize;
        for &b in bits {
            value = (value << 1) | usize::from(b != 0);
        }
        Self { value, k: bits.len() }
    }

    pub fn value(&self) -> usize {
        self.value
    }

    pub fn bit_count(&self) -> usize {
        self.k
    }

    pub fn bits(&self) -> Vec<u8> {
        (0..self.k)
            .map(|i| ((self.value >> (self.k - 1 - i)) & 1) as u8)
            .collect()
    }

    /// Key form used in model JSON: `""` for a parentless node, else e.g.
    /// `"01"`.
    pub fn bitstring(&self) -> String {
        self.bits().iter().map(|b| if *b == 1 { '1' } else { '0' }).collect()
    }
}

/// Builds the bitstring key for configuration `value` of a node with `k`
/// intervals.
pub fn bitstring(value: usize, k: usize) -> String {
    ConfigIndex::new(value, k).bitstring()
}

/// A timescale graphical event model.
///
/// Immutable value semantics: the search applies operators by building
/// modified copies, so snapshots can be scored concurrently.
#[derive(Debug, Clone, PartialEq)]
pub struct Tgem {
    labels: Vec<String>,
    index: HashMap<String, usize>,
    /// Keyed `(child, parent)` so a node's incoming edges iterate in
    /// canonical (vocabulary) order.
    edges: BTreeMap<(usize, usize), Timescale>,
    /// One rate table per node, `2^k` entries indexed by configuration.
    rates: Vec<Vec<f64>>,
}

impl Tgem {
    /// The empty model: no edges, one zero rate per node.
    pub fn empty(labels: Vec<String>) -> Result<Self> {
        let index: HashMap<String, usize> =
            labels.iter().enumerate().map(|(i, l)| (l.clone(), i)).collect();
        if index.len() != labels.len() {
            return Err(Error::InvalidArgument("duplicate label".into()));
        }
        if labels.is_empty() {
            return Err(Error::InvalidArgument("vocabulary must be non-empty".into()));
        }
        let n = labels.len();
        Ok(Self {
            labels,
            index,
            edges: BTreeMap::new(),
            rates: vec![vec![0.0]; n],
        })
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn node_count(&self) -> usize {
        self.labels.len()
    }

    pub fn label_id(&self, label: &str) -> Result<usize> {
        self.index
            .get(label)
            .copied()
            .ok_or_else(|| Error::UnknownLabel(label.to_string()))
    }

    pub fn label(&self, id: usize) -> &str {
        &self.labels[id]
    }

    /// Edges as `(parent, child, timescale)`, sorted by `(parent, child)`.
    pub fn edges(&self) -> Vec<(usize, usize, &Timescale)> {
        let mut v: Vec<_> = self.edges.iter().map(|(&(c, p), t)| (p, c, t)).collect();
        v.sort_by_key(|&(p, c, _)| (p, c));
        v
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn timescale(&self, parent: usize, child: usize) -> Option<&Timescale> {
        self.edges.get(&(child, parent))
    }

    pub fn has_edge(&self, parent: usize, child: usize) -> bool {
        self.edges.contains_key(&(child, parent))
    }

    /// Incoming edges of `child` as `(parent, timescale)` in canonical
    /// (parent vocabulary) order.
    pub fn incoming(&self, child: usize) -> Vec<(usize, &Timescale)> {
        self.edges
            .range((child, 0)..=(child, usize::MAX))
            .map(|(&(_, p), t)| (p, t))
            .collect()
    }

    pub fn in_degree(&self, child: usize) -> usize {
        self.incoming(child).len()
    }

    /// Total interval count over the node's incoming edges (`k_l`).
    pub fn interval_count(&self, child: usize) -> usize {
        self.incoming(child).iter().map(|(_, t)| t.interval_count()).sum()
    }

    /// Number of parent configurations, `2^{k_l}` (1 for a parentless node).
    pub fn config_count(&self, child: usize) -> usize {
        1usize << self.interval_count(child)
    }

    pub fn rates(&self, node: usize) -> &[f64] {
        &self.rates[node]
    }

    /// Replaces a node's rate table; the length must match `2^{k_l}`.
    pub fn set_rates(&mut self, node: usize, rates: Vec<f64>) -> Result<()> {
        let expected = self.config_count(node);
        if rates.len() != expected {
            return Err(Error::RateArity {
                node: self.labels[node].clone(),
                got: rates.len(),
                expected,
            });
        }
        self.rates[node] = rates;
        Ok(())
    }

    /// Inserts an edge and resets the child's rate table to zeros of the new
    /// arity. Fails if the edge already exists.
    pub fn add_edge(&mut self, parent: usize, child: usize, timescale: Timescale) -> Result<()> {
        if self.edges.contains_key(&(child, parent)) {
            return Err(Error::InvalidArgument(format!(
                "edge {} -> {} already exists",
                self.labels[parent], self.labels[child]
            )));
        }
        self.edges.insert((child, parent), timescale);
        self.reset_rates(child)?;
        Ok(())
    }

    /// Removes an edge and resets the child's rate table.
    pub fn remove_edge(&mut self, parent: usize, child: usize) -> Result<()> {
        if self.edges.remove(&(child, parent)).is_none() {
            return Err(Error::InvalidArgument(format!(
                "edge {} -> {} does not exist",
                self.labels[parent], self.labels[child]
            )));
        }
        self.reset_rates(child)
    }

    /// Replaces the timescale of an existing edge and resets the child's
    /// rate table.
    pub fn replace_timescale(
        &mut self,
        parent: usize,
        child: usize,
        timescale: Timescale,
    ) -> Result<()> {
        match self.edges.get_mut(&(child, parent)) {
            Some(t) => {
                *t = timescale;
                self.reset_rates(child)
            }
            None => Err(Error::InvalidArgument(format!(
                "edge {} -> {} does not exist",
                self.labels[parent], self.labels[child]
            ))),
        }
    }

    fn reset_rates(&mut self, child: usize) -> Result<()> {
        let k = self.interval_count(child);
        if k > MAX_INTERVALS_HARD {
            return Err(Error::InvalidArgument(format!(
                "node {} would have {k} intervals (cap {MAX_INTERVALS_HARD})",
                self.labels[child]
            )));
        }
        self.rates[child] = vec![0.0; 1 << k];
        Ok(())
    }

    /// The canonical `(parent, interval)` order that defines the meaning of
    /// every configuration bit of `node`.
    pub fn canonical_interval_order(&self, node: usize) -> Vec<(usize, (f64, f64))> {
        let mut out = Vec::new();
        for (parent, ts) in self.incoming(node) {
            for i in 0..ts.interval_count() {
                out.push((parent, ts.interval(i)));
            }
        }
        out
    }

    /// Active parent configuration of `node` at time `t` given a stream.
    ///
    /// The bit for interval `(a, b]` of parent `z` is 1 iff some occurrence
    /// `t_z` satisfies `t_z + a < t <= t_z + b`; an event never influences
    /// its own configuration.
    pub fn active_config(&self, node: usize, stream: &EventStream, t: f64) -> Result<ConfigIndex> {
        let incoming = self.incoming(node);
        let mapped = map_parents(self, stream, &incoming)?;
        Ok(config_at(stream, &mapped, t))
    }

    /// Structural diagnostics; empty iff all invariants hold.
    pub fn validate(&self) -> Vec<String> {
        let mut diags = Vec::new();
        if self.labels.is_empty() {
            diags.push("empty vocabulary".into());
        }
        for (&(child, parent), ts) in &self.edges {
            if parent >= self.labels.len() || child >= self.labels.len() {
                diags.push(format!("edge ({parent},{child}) references unknown node"));
                continue;
            }
            let mut prev = 0.0;
            for &e in ts.endpoints() {
                if e <= prev || !e.is_finite() {
                    diags.push(format!(
                        "edge {} -> {}: endpoints not strictly increasing ({:?})",
                        self.labels[parent],
                        self.labels[child],
                        ts.endpoints()
                    ));
                    break;
                }
                prev = e;
            }
        }
        for node in 0..self.labels.len() {
            let k = self.interval_count(node);
            if k > MAX_INTERVALS_HARD {
                diags.push(format!(
                    "node {}: {k} intervals exceed the hard cap {MAX_INTERVALS_HARD}",
                    self.labels[node]
                ));
                continue;
            }
            let expected = 1usize << k;
            let got = self.rates[node].len();
            if got != expected {
                diags.push(format!(
                    "node {}: rate arity mismatch: got {got}, expected {expected}",
                    self.labels[node]
                ));
            }
            for (j, &r) in self.rates[node].iter().enumerate() {
                if r < 0.0 || !r.is_finite() {
                    diags.push(format!(
                        "node {}: rate for configuration {} is not a non-negative finite number ({r})",
                        self.labels[node],
                        bitstring(j, k)
                    ));
                }
            }
        }
        diags
    }
}

/// Incoming edges with the parent's occurrence list resolved against a
/// stream, ready for configuration queries.
pub(crate) struct MappedParent<'a> {
    pub occurrences: &'a [f64],
    pub timescale: &'a Timescale,
}

pub(crate) fn map_parents<'a>(
    model: &'a Tgem,
    stream: &'a EventStream,
    incoming: &[(usize, &'a Timescale)],
) -> Result<Vec<MappedParent<'a>>> {
    incoming
        .iter()
        .map(|&(p, ts)| {
            let sid = stream.label_id(model.label(p))?;
            Ok(MappedParent {
                occurrences: stream.occurrences(sid),
                timescale: ts,
            })
        })
        .collect()
}

/// Evaluates the configuration defined by `parents` (already in canonical
/// order) at time `t`: bit = 1 for interval `(a, b]` iff some parent
/// occurrence lies in `[t-b, t-a)`.
pub(crate) fn config_at(_stream: &EventStream, parents: &[MappedParent<'_>], t: f64) -> ConfigIndex {
    let mut value = 0usize;
    let mut k = 0usize;
    for mp in parents {
        for i in 0..mp.timescale.interval_count() {
            let (a, b) = mp.timescale.interval(i);
            // Any t_z with t - b <= t_z < t - a, i.e. t_z + a < t <= t_z + b.
            let lo = t - b;
            let hi = t - a;
            let idx = mp.occurrences.partition_point(|&tz| tz < lo);
            let bit = mp.occurrences.get(idx).is_some_and(|&tz| tz < hi);
            value = (value << 1) | usize::from(bit);
            k += 1;
        }
    }
    ConfigIndex::new(value, k)
}

// ---------------------------------------------------------------------------
// JSON persistence
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelJson {
    labels: Vec<String>,
    edges: Vec<EdgeJson>,
    rates: BTreeMap<String, BTreeMap<String, f64>>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EdgeJson {
    from: String,
    to: String,
    endpoints: Vec<f64>,
}

/// Serializes a model to JSON with rates keyed by canonical bitstring
/// (parentless nodes use the key `""`).
pub fn serialize_model(model: &Tgem) -> String {
    let edges = model
        .edges()
        .into_iter()
        .map(|(p, c, ts)| EdgeJson {
            from: model.label(p).to_string(),
            to: model.label(c).to_string(),
            endpoints: ts.endpoints().to_vec(),
        })
        .collect();
    let mut rates = BTreeMap::new();
    for node in 0..model.node_count() {
        let k = model.interval_count(node);
        let table: BTreeMap<String, f64> = model
            .rates(node)
            .iter()
            .enumerate()
            .map(|(j, &r)| (bitstring(j, k), r))
            .collect();
        rates.insert(model.label(node).to_string(), table);
    }
    let json = ModelJson {
        labels: model.labels().to_vec(),
        edges,
        rates,
    };
    serde_json::to_string_pretty(&json).expect("model serialization cannot fail")
}

/// Parses model JSON, checking the schema and all structural invariants.
pub fn parse_model(text: &str) -> Result<Tgem> {
    let json: ModelJson = serde_json::from_str(text).map_err(|e| Error::Schema(e.to_string()))?;
    let mut model = Tgem::empty(json.labels)?;
    for e in &json.edges {
        let p = model
            .label_id(&e.from)
            .map_err(|_| Error::Schema(format!("edges: unknown label `{}`", e.from)))?;
        let c = model
            .label_id(&e.to)
            .map_err(|_| Error::Schema(format!("edges: unknown label `{}`", e.to)))?;
        let ts = Timescale::new(e.endpoints.clone())
            .map_err(|err| Error::Schema(format!("edges[{} -> {}]: {err}", e.from, e.to)))?;
        model
            .add_edge(p, c, ts)
            .map_err(|err| Error::Schema(format!("edges: {err}")))?;
    }
    for (label, table) in &json.rates {
        let node = model
            .label_id(label)
            .map_err(|_| Error::Schema(format!("rates: unknown label `{label}`")))?;
        let k = model.interval_count(node);
        let expected = 1usize << k;
        if table.len() != expected {
            return Err(Error::Schema(format!(
                "rates.{label}: expected {expected} configurations, got {}",
                table.len()
            )));
        }
        let mut rates = vec![0.0; expected];
        for (key, &rate) in table {
            let parsed = parse_bitstring(key, k).ok_or_else(|| {
                Error::Schema(format!("rates.{label}.{key:?}: not a {k}-bit configuration key"))
            })?;
            rates[parsed] = rate;
        }
        model.set_rates(node, rates)?;
    }
    for node in 0..model.node_count() {
        if !json.rates.contains_key(model.label(node)) {
            return Err(Error::Schema(format!(
                "rates: missing table for node `{}`",
                model.label(node)
            )));
        }
    }
    let diags = model.validate();
    if !diags.is_empty() {
        return Err(Error::InvalidModel(diags));
    }
    Ok(model)
}

fn parse_bitstring(key: &str, k: usize) -> Option<usize> {
    if key.len() != k || !key.chars().all(|c| c == '0' || c == '1') {
        return None;
    }
    if k == 0 {
        return Some(0);
    }
    usize::from_str_radix(key, 2).ok()
}


#[cfg(test)]
pub(crate) use tests::example_model;
