//! Timestamped event streams.
//!
//! A stream is a strictly increasing sequence of `(time, label)` pairs
//! observed on `(0, t_star]`, together with a finite ordered vocabulary that
//! may contain labels with zero occurrences. The origin `t = 0` carries no
//! event.

use std::collections::HashMap;
use std::fmt::Write as _;

use crate::error::{Error, Result};

/// One labeled occurrence.
#[derive(Debug, Clone, PartialEq)]
pub struct TimedEvent {
    pub time: f64,
    pub label: String,
}

impl TimedEvent {
    pub fn new(time: f64, label: impl Into<String>) -> Self {
        Self {
            time,
            label: label.into(),
        }
    }
}

/// An immutable event stream over a fixed vocabulary.
///
/// Construction validates all invariants (positive strictly increasing
/// times, times within the horizon, labels in the vocabulary); afterwards
/// the stream is safe to share read-only across workers.
#[derive(Debug, Clone, PartialEq)]
pub struct EventStream {
    vocabulary: Vec<String>,
    index: HashMap<String, usize>,
    times: Vec<f64>,
    label_ids: Vec<usize>,
    /// Occurrence times per label id, ascending.
    by_label: Vec<Vec<f64>>,
    t_star: f64,
}

impl EventStream {
    /// Builds a stream with an explicit observation horizon. The vocabulary
    /// is the set of observed labels in lexicographic order.
    pub fn new(events: Vec<TimedEvent>, t_star: f64) -> Result<Self> {
        Self::with_vocabulary(events, t_star, Vec::new())
    }

    /// Builds a stream whose vocabulary starts with `vocabulary` (order
    /// preserved); observed labels not listed there are appended in
    /// lexicographic order.
    pub fn with_vocabulary(
        events: Vec<TimedEvent>,
        t_star: f64,
        vocabulary: Vec<String>,
    ) -> Result<Self> {
        if t_star <= 0.0 || !t_star.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "t_star must be positive and finite, got {t_star}"
            )));
        }
        let mut vocab = vocabulary;
        let mut index: HashMap<String, usize> =
            vocab.iter().enumerate().map(|(i, l)| (l.clone(), i)).collect();
        if index.len() != vocab.len() {
            return Err(Error::InvalidArgument(
                "duplicate label in vocabulary".into(),
            ));
        }
        let mut extra: Vec<&str> = events
            .iter()
            .map(|e| e.label.as_str())
            .filter(|l| !index.contains_key(*l))
            .collect();
        extra.sort_unstable();
        extra.dedup();
        for l in extra {
            index.insert(l.to_string(), vocab.len());
            vocab.push(l.to_string());
        }

        let mut times = Vec::with_capacity(events.len());
        let mut label_ids = Vec::with_capacity(events.len());
        let mut by_label = vec![Vec::new(); vocab.len()];
        let mut prev = 0.0_f64;
        for e in &events {
            if e.time <= 0.0 || !e.time.is_finite() {
                return Err(Error::InvalidArgument(format!(
                    "event time must be positive and finite, got {}",
                    e.time
                )));
            }
            if e.time <= prev {
                return Err(Error::InvalidArgument(format!(
                    "non-increasing timestamps: {} after {}",
                    e.time, prev
                )));
            }
            if e.time > t_star {
                return Err(Error::InvalidArgument(format!(
                    "event at {} lies beyond t_star = {}",
                    e.time, t_star
                )));
            }
            prev = e.time;
            let id = index[&e.label];
            times.push(e.time);
            label_ids.push(id);
            by_label[id].push(e.time);
        }

        Ok(Self {
            vocabulary: vocab,
            index,
            times,
            label_ids,
            by_label,
            t_star,
        })
    }

    pub fn t_star(&self) -> f64 {
        self.t_star
    }

    pub fn vocabulary(&self) -> &[String] {
        &self.vocabulary
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// All events in time order as `(time, label id)`.
    pub fn events(&self) -> impl Iterator<Item = (f64, usize)> + '_ {
        self.times.iter().copied().zip(self.label_ids.iter().copied())
    }

    pub fn label_id(&self, label: &str) -> Result<usize> {
        self.index
            .get(label)
            .copied()
            .ok_or_else(|| Error::UnknownLabel(label.to_string()))
    }

    pub fn label(&self, id: usize) -> &str {
        &self.vocabulary[id]
    }

    /// Ascending occurrence times of one label.
    pub fn occurrences(&self, id: usize) -> &[f64] {
        &self.by_label[id]
    }

    pub fn occurrences_of(&self, label: &str) -> Result<&[f64]> {
        Ok(&self.by_label[self.label_id(label)?])
    }

    /// Number of occurrences per label, in vocabulary order.
    pub fn counts(&self) -> Vec<usize> {
        self.by_label.iter().map(Vec::len).collect()
    }
}

/// Parses the event CSV wire format.
///
/// The format is an optional comment header `# t_star=<decimal>`, a column
/// header `time,label`, then one event per row sorted ascending by time.
/// Without the comment header, `t_star` falls back to the last event time
/// (in which case the final event sits exactly on the horizon).
pub fn parse_events(text: &str, vocabulary_override: Option<&[String]>) -> Result<EventStream> {
    let mut t_star: Option<f64> = None;
    let mut events: Vec<TimedEvent> = Vec::new();
    let mut saw_header = false;

    for (lineno, raw) in text.lines().enumerate() {
        let lineno = lineno + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('#') {
            let rest = rest.trim();
            if let Some(v) = rest.strip_prefix("t_star=") {
                let v: f64 = v.trim().parse().map_err(|_| Error::Parse {
                    line: lineno,
                    message: format!("invalid t_star value `{}`", v.trim()),
                })?;
                t_star = Some(v);
            }
            continue;
        }
        if !saw_header {
            if line != "time,label" {
                return Err(Error::Parse {
                    line: lineno,
                    message: format!("expected header `time,label`, got `{line}`"),
                });
            }
            saw_header = true;
            continue;
        }
        let (time_str, label) = line.split_once(',').ok_or_else(|| Error::Parse {
            line: lineno,
            message: "expected `time,label`".into(),
        })?;
        let time: f64 = time_str.trim().parse().map_err(|_| Error::Parse {
            line: lineno,
            message: format!("invalid time `{}`", time_str.trim()),
        })?;
        let label = label.trim();
        if label.is_empty() || label.contains(',') {
            return Err(Error::Parse {
                line: lineno,
                message: format!("invalid label `{label}`"),
            });
        }
        if let Some(prev) = events.last() {
            if time <= prev.time {
                return Err(Error::Parse {
                    line: lineno,
                    message: format!("non-increasing timestamps at line {lineno}"),
                });
            }
        }
        if time.is_nan() || time <= 0.0 {
            return Err(Error::Parse {
                line: lineno,
                message: format!("event time must be positive, got {time}"),
            });
        }
        if let Some(ts) = t_star {
            if time >= ts {
                return Err(Error::Parse {
                    line: lineno,
                    message: format!("event at {time} is at or after t_star = {ts}"),
                });
            }
        }
        events.push(TimedEvent::new(time, label));
    }

    if !saw_header {
        return Err(Error::Parse {
            line: 0,
            message: "missing `time,label` header".into(),
        });
    }
    let t_star = match t_star {
        Some(v) => v,
        None => match events.last() {
            Some(e) => e.time,
            None => {
                return Err(Error::Parse {
                    line: 0,
                    message: "empty stream without a t_star header".into(),
                })
            }
        },
    };
    let vocab = vocabulary_override.map(<[String]>::to_vec).unwrap_or_default();
    EventStream::with_vocabulary(events, t_star, vocab)
}

/// Serializes a stream to the CSV wire format; round-trips through
/// [`parse_events`] bit-exactly (Rust prints the shortest decimal that
/// recovers the same double).
pub fn serialize_events(stream: &EventStream) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# t_star={}", stream.t_star());
    out.push_str("time,label\n");
    for (t, id) in stream.events() {
        let _ = writeln!(out, "{},{}", t, stream.label(id));
    }
    out
}

/// Inter-event times from `z` to `x`.
///
/// For `z != x`: for every occurrence of `x` strictly preceded by at least
/// one `z`, the distance to the most recent such `z`; unpreceded `x`
/// occurrences are skipped. For `z == x`: the consecutive inter-arrival
/// times of `x` plus the tail from its last occurrence to `t_star`, so a
/// label with `k` occurrences yields exactly `k` values.
pub fn inter_event_times(stream: &EventStream, z: &str, x: &str) -> Result<Vec<f64>> {
    let zi = stream.label_id(z)?;
    let xi = stream.label_id(x)?;
    let xs = stream.occurrences(xi);
    if zi == xi {
        let mut out = Vec::with_capacity(xs.len());
        for w in xs.windows(2) {
            out.push(w[1] - w[0]);
        }
        if let Some(&last) = xs.last() {
            out.push(stream.t_star() - last);
        }
        return Ok(out);
    }
    let zs = stream.occurrences(zi);
    let mut out = Vec::new();
    for &tx in xs {
        // Most recent z strictly before tx.
        let k = zs.partition_point(|&tz| tz < tx);
        if k > 0 {
            out.push(tx - zs[k - 1]);
        }
    }
    Ok(out)
}


#[cfg(test)]
pub(crate) use tests::example_stream;

#[cfg(test)]
mod props {
    use super::*;
    use proptest::prelude::*;

    fn arb_stream() -> impl Strategy<Value = EventStream> {
        // Random gaps keep times strictly increasing.
        (
            proptest::collection::vec((0.01f64..5.0, 0usize..3), 0..120),
            0.5f64..10.0,
        )
            .prop_map(|(gaps, tail)| {
                let labels = ["A", "B", "C"];
                let mut t = 0.0;
                let mut events = Vec::new();
                for (gap, l) in gaps {
                    t += gap;
                    events.push(TimedEvent::new(t, labels[l]));
                }
                let t_star = t + tail;
                EventStream::with_vocabulary(
                    events,
                    t_star,
                    labels.iter().map(|s| s.to_string()).collect(),
                )
                .unwrap()
            })
    }

    proptest! {
        #[test]
        fn round_trip_identity(s in arb_stream()) {
            let text = serialize_events(&s);
            let back = parse_events(&text, Some(s.vocabulary())).unwrap();
            prop_assert_eq!(&s, &back);
        }

        #[test]
        fn inter_event_times_positive_and_counted(s in arb_stream()) {
            for z in ["A", "B", "C"] {
                for x in ["A", "B", "C"] {
                    let t = inter_event_times(&s, z, x).unwrap();
                    prop_assert!(t.iter().all(|&v| v > 0.0));
                    if z == x {
                        let k = s.occurrences_of(x).unwrap().len();
                        prop_assert_eq!(t.len(), k);
                        if k > 0 {
                            let sum: f64 = t.iter().sum();
                            let first = s.occurrences_of(x).unwrap()[0];
                            prop_assert!((sum - (s.t_star() - first)).abs() < 1e-9);
                        }
                    }
                }
            }
        }
    }
}
