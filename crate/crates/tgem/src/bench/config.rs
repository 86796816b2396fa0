//! Benchmark configuration (TOML).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::generator::{DEFAULT_HORIZONS, DEFAULT_RATES};
use crate::horizon::HorizonPolicy;

/// Grid and generation settings for one benchmark run. Every field has the
/// full-scale default, so a desk-scale TOML only overrides what it shrinks.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct BenchConfig {
    /// Node counts of the generated models.
    pub nodes: Vec<usize>,
    /// Erdős–Rényi edge densities.
    pub densities: Vec<f64>,
    /// Sampled time units per dataset.
    pub time_units: Vec<f64>,
    /// Random models per (nodes, density) cell.
    pub replicates: usize,
    /// Base seed; all per-unit seeds derive from it.
    pub seed_base: u64,
    /// Heuristic names: `proximal` or `q=<quantile>`.
    pub heuristics: Vec<String>,
    /// Initial horizon set of the generator.
    pub horizons: Vec<f64>,
    /// Rate set of the generator.
    pub rates: Vec<f64>,
    /// Geometric parameter for timescale modifications.
    pub p_geom: f64,
    /// Structural caps applied to both generation and learning.
    pub max_indegree: usize,
    pub max_intervals: usize,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            nodes: vec![5, 10, 15],
            densities: vec![0.1, 0.2],
            time_units: vec![500.0, 1000.0, 2000.0, 4000.0, 8000.0],
            replicates: 100,
            seed_base: 42,
            heuristics: vec![
                "proximal".into(),
                "q=0.05".into(),
                "q=0.25".into(),
                "q=0.5".into(),
                "q=0.75".into(),
                "q=0.95".into(),
            ],
            horizons: DEFAULT_HORIZONS.to_vec(),
            rates: DEFAULT_RATES.to_vec(),
            p_geom: 0.85,
            max_indegree: 2,
            max_intervals: 4,
        }
    }
}

impl BenchConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let config: Self = toml::from_str(text)?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if self.replicates == 0 {
            return Err(Error::Benchmark("replicates must be >= 1".into()));
        }
        if self.nodes.is_empty()
            || self.densities.is_empty()
            || self.time_units.is_empty()
            || self.heuristics.is_empty()
        {
            return Err(Error::Benchmark("grid axes must be non-empty".into()));
        }
        if !self.time_units.iter().all(|&t| t.is_finite() && t > 0.0) {
            return Err(Error::Benchmark("time units must be positive".into()));
        }
        for name in &self.heuristics {
            HorizonPolicy::parse(name)?;
        }
        Ok(())
    }

    pub fn policies(&self) -> Vec<(String, HorizonPolicy)> {
        self.heuristics
            .iter()
            .map(|n| (n.clone(), HorizonPolicy::parse(n).expect("validated")))
            .collect()
    }

    /// Total work units: cells x replicates x time units x heuristics.
    pub fn unit_count(&self) -> usize {
        self.nodes.len()
            * self.densities.len()
            * self.replicates
            * self.time_units.len()
            * self.heuristics.len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_span_the_full_grid() {
        let c = BenchConfig::default();
        assert_eq!(c.unit_count(), 3 * 2 * 100 * 5 * 6);
        c.validate().unwrap();
    }

    #[test]
    fn partial_toml_overrides() {
        let c = BenchConfig::from_toml(
            "nodes = [5]\ndensities = [0.2]\ntime_units = [500, 2000]\nreplicates = 10\n",
        )
        .unwrap();
        assert_eq!(c.nodes, vec![5]);
        assert_eq!(c.replicates, 10);
        assert_eq!(c.heuristics.len(), 6);
        assert_eq!(c.unit_count(), 10 * 2 * 6);
    }

    #[test]
    fn unknown_keys_and_bad_heuristics_are_rejected() {
        assert!(BenchConfig::from_toml("bogus = 1\n").is_err());
        assert!(BenchConfig::from_toml("heuristics = [\"q=1.5\"]\n").is_err());
        assert!(BenchConfig::from_toml("replicates = 0\n").is_err());
    }
}
