//! Timescale graphical event models (TGEMs) for multivariate event streams.
//!
//! A TGEM is a directed graph over event labels (self-loops allowed) where
//! each edge carries a *timescale* — a partition of a look-back window
//! `(0, t_h]` into half-open intervals — and each node a constant event rate
//! per *parent configuration* (the binary vector saying which look-back
//! intervals currently contain a parent occurrence). The conditional
//! intensity of every label is therefore piecewise constant in time.
//!
//! The crate provides the full loop of a synthetic study on this model
//! class:
//!
//! * [`stream`] — timestamped event streams, CSV I/O, inter-event times;
//! * [`model`] — the TGEM value type, canonical configuration indexing,
//!   JSON persistence;
//! * [`stats`] — exact sufficient statistics (per-configuration counts and
//!   occupancy durations) by a sweep over configuration change points;
//! * [`scoring`] — maximum-likelihood rates, log-likelihood, BIC;
//! * [`horizon`] — data-driven default horizons (quantile and proximal
//!   heuristics);
//! * [`search`] — greedy forward/backward structure search over the
//!   add/split/extend operator space with decomposable score caching;
//! * [`sampler`] — exact stream generation by rejection sampling over the
//!   condensation of strongly connected components;
//! * [`generator`] — random benchmark TGEMs (Erdős–Rényi edges, geometric
//!   timescale modifications, structural caps);
//! * [`distance`] — set-based and refined structural distances plus edge
//!   recovery precision/recall/F1;
//! * [`bench`] — a deterministic, resumable grid runner with report tables
//!   and per-horizon distance summaries.
//!
//! With the default `parallel` feature the data-parallel inner loops
//! (horizon maps, neighborhood scoring, benchmark grid) run on rayon;
//! results are identical with the feature disabled.

pub mod bench;
pub mod distance;
pub mod error;
pub mod generator;
pub mod horizon;
pub mod model;
pub(crate) mod par;
pub mod sampler;
pub mod scoring;
pub mod search;
pub mod stats;
pub mod stream;

pub use error::{Error, Result};
pub use model::{ConfigIndex, Tgem, Timescale};
pub use stream::{EventStream, TimedEvent};
