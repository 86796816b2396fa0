//! Random benchmark TGEMs.
//!
//! Edges (self-pairs included) are drawn Erdős–Rényi style with the given
//! density, children above the in-degree cap keep a uniform subset, each
//! surviving edge gets an initial single-interval timescale with a horizon
//! drawn from `H`, then a geometric number of split/extend modifications
//! (each split or extend with probability 1/2, splits target a uniform
//! interval, extends always apply). Modifications that would push a child
//! past the interval cap are skipped. Rates are drawn i.i.d. uniform from
//! the rate set.
//!
//! Everything is driven by one ChaCha12 generator in a fixed draw order, so
//! a seed pins the model exactly.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

use crate::error::{Error, Result};
use crate::model::{Tgem, Timescale};

/// Generation settings. The defaults mirror the synthetic benchmark:
/// horizons `{0.5, 1, 2, 4, 8, 16, 24}`, rates `{0.01 .. 0.64}` doubling,
/// geometric parameter 0.85, in-degree cap 2, interval cap 4 per node.
#[derive(Debug, Clone, PartialEq)]
pub struct GenConfig {
    pub nodes: usize,
    pub density: f64,
    pub horizons: Vec<f64>,
    pub rates: Vec<f64>,
    pub p_geom: f64,
    pub max_indegree: usize,
    pub max_intervals_per_node: usize,
    pub seed: u64,
}

pub const DEFAULT_HORIZONS: [f64; 7] = [0.5, 1.0, 2.0, 4.0, 8.0, 16.0, 24.0];
pub const DEFAULT_RATES: [f64; 7] = [0.01, 0.02, 0.04, 0.08, 0.16, 0.32, 0.64];

impl GenConfig {
    pub fn new(nodes: usize, density: f64, seed: u64) -> Self {
        Self {
            nodes,
            density,
            horizons: DEFAULT_HORIZONS.to_vec(),
            rates: DEFAULT_RATES.to_vec(),
            p_geom: 0.85,
            max_indegree: 2,
            max_intervals_per_node: 4,
            seed,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.nodes == 0 {
            return Err(Error::InvalidArgument("nodes must be positive".into()));
        }
        if !(0.0..1.0).contains(&self.density) {
            return Err(Error::InvalidArgument(format!(
                "density must lie in [0,1), got {}",
                self.density
            )));
        }
        if self.horizons.is_empty() || self.rates.is_empty() {
            return Err(Error::InvalidArgument("horizon and rate sets must be non-empty".into()));
        }
        let positive = |v: f64| v.is_finite() && v > 0.0;
        if !self.horizons.iter().all(|&h| positive(h)) || !self.rates.iter().all(|&r| positive(r)) {
            return Err(Error::InvalidArgument("horizons and rates must be positive".into()));
        }
        if !(0.0 < self.p_geom && self.p_geom <= 1.0) {
            return Err(Error::InvalidArgument(format!("p_geom must lie in (0,1], got {}", self.p_geom)));
        }
        Ok(())
    }
}

/// Zero-padded node labels so lexicographic order equals index order.
pub fn node_labels(n: usize) -> Vec<String> {
    let width = (n.max(1) - 1).to_string().len();
    (0..n).map(|i| format!("n{i:0width$}")).collect()
}

/// Geometric draw with support {0, 1, 2, ...} and `P(0) = p`, via Bernoulli
/// trials.
fn draw_geometric<R: Rng>(rng: &mut R, p: f64) -> usize {
    let mut k = 0;
    while rng.random::<f64>() >= p {
        k += 1;
    }
    k
}

/// Draws a random TGEM. The seed fixes every draw: edge coin flips in
/// parent-major pair order, per-child in-degree subsets, per-edge horizons
/// and modifications in (parent, child) order, then rate tables in node
/// order.
pub fn random_tgem(config: &GenConfig) -> Result<Tgem> {
    config.validate()?;
    let n = config.nodes;
    let mut rng = ChaCha12Rng::seed_from_u64(config.seed);
    let mut model = Tgem::empty(node_labels(n))?;

    // Erdős–Rényi edge draws, self-pairs included.
    let mut incoming: Vec<Vec<usize>> = vec![Vec::new(); n];
    for parent in 0..n {
        for parents in incoming.iter_mut() {
            if rng.random::<f64>() < config.density {
                parents.push(parent);
            }
        }
    }

    // In-degree cap: keep a uniformly chosen subset per saturated child.
    for parents in incoming.iter_mut() {
        if parents.len() > config.max_indegree {
            parents.shuffle(&mut rng);
            parents.truncate(config.max_indegree);
            parents.sort_unstable();
        }
    }

    // Initial timescales and geometric modifications, edges in
    // (parent, child) order.
    let mut edges: Vec<(usize, usize)> = Vec::new();
    for (child, parents) in incoming.iter().enumerate() {
        for &parent in parents {
            edges.push((parent, child));
        }
    }
    edges.sort_unstable();
    for &(parent, child) in &edges {
        let h = config.horizons[rng.random_range(0..config.horizons.len())];
        model.add_edge(parent, child, Timescale::single(h)?)?;
    }
    for &(parent, child) in &edges {
        let mods = draw_geometric(&mut rng, config.p_geom);
        for _ in 0..mods {
            if model.interval_count(child) + 1 > config.max_intervals_per_node {
                continue; // skipped: would exceed the per-node interval cap
            }
            let ts = model.timescale(parent, child).expect("edge exists").clone();
            let new = if rng.random::<f64>() < 0.5 {
                let i = rng.random_range(0..ts.interval_count());
                ts.split(i)?
            } else {
                ts.extend()?
            };
            model.replace_timescale(parent, child, new)?;
        }
    }

    // Rates, node order then configuration order.
    for node in 0..n {
        let count = model.config_count(node);
        let rates = (0..count)
            .map(|_| config.rates[rng.random_range(0..config.rates.len())])
            .collect();
        model.set_rates(node, rates)?;
    }

    debug_assert!(model.validate().is_empty());
    Ok(model)
}
