//! Likelihood and BIC scoring.
//!
//! All logarithms are natural. The per-node likelihood term at the MLE is
//! `sum_j n_j ln(n_j / d_j) - sum_j n_j` with the convention
//! `0 ln(0/d) = 0`; the BIC is the log-likelihood at the MLE minus
//! `sum_l |C_l| ln(t_star)` (higher is better). The score decomposes over
//! nodes, which the structure search exploits for caching.

use crate::error::{Error, Result};
use crate::model::Tgem;
use crate::stats::{check_consistency, sufficient_stats, SufficientStats};
use crate::stream::EventStream;

/// Strict-improvement threshold used by the search to absorb rounding.
pub const SCORE_EPSILON: f64 = 1e-9;

/// Maximum-likelihood rate per configuration: `n_j / d_j`, with 0 when
/// `n_j = 0` regardless of the duration.
pub fn mle_rates(stats: &SufficientStats) -> Result<Vec<f64>> {
    check_consistency(stats)?;
    Ok(stats
        .n
        .iter()
        .zip(stats.d.iter())
        .map(|(&n, &d)| if n == 0 { 0.0 } else { n as f64 / d })
        .collect())
}

/// The node's contribution to the total log-likelihood at the MLE.
pub fn node_log_likelihood(stats: &SufficientStats) -> Result<f64> {
    check_consistency(stats)?;
    let mut sum = 0.0;
    for (&n, &d) in stats.n.iter().zip(stats.d.iter()) {
        if n > 0 {
            let n = n as f64;
            sum += n * (n / d).ln() - n;
        }
    }
    Ok(sum)
}

/// Log-likelihood of the stream under the model.
///
/// With `rates = None` the MLE rates are used, making the result the sum of
/// [`node_log_likelihood`] over nodes. Explicit rates are evaluated
/// literally: `sum_{l,j} n ln(rate) - rate * d`, which is `-inf` whenever a
/// configuration with events has rate zero.
pub fn log_likelihood(
    stream: &EventStream,
    model: &Tgem,
    rates: Option<&[Vec<f64>]>,
) -> Result<f64> {
    let mut total = 0.0;
    for node in 0..model.node_count() {
        let stats = sufficient_stats(stream, model, model.label(node))?;
        match rates {
            None => total += node_log_likelihood(&stats)?,
            Some(tables) => {
                let table = tables.get(node).ok_or_else(|| Error::RateArity {
                    node: model.label(node).to_string(),
                    got: tables.len(),
                    expected: model.node_count(),
                })?;
                if table.len() != stats.config_count() {
                    return Err(Error::RateArity {
                        node: model.label(node).to_string(),
                        got: table.len(),
                        expected: stats.config_count(),
                    });
                }
                for ((&n, &d), &rate) in stats.n.iter().zip(stats.d.iter()).zip(table.iter()) {
                    if n > 0 {
                        if rate == 0.0 {
                            return Ok(f64::NEG_INFINITY);
                        }
                        total += n as f64 * rate.ln();
                    }
                    total -= rate * d;
                }
            }
        }
    }
    Ok(total)
}

/// Complexity penalty `sum_l |C_l| ln(t_star)`.
pub fn penalty(model: &Tgem, t_star: f64) -> f64 {
    let configs: usize = (0..model.node_count()).map(|l| model.config_count(l)).sum();
    configs as f64 * t_star.ln()
}

/// BIC of the model on the stream: log-likelihood at the MLE minus the
/// complexity penalty. Higher is better. A `t_star <= 1` makes the penalty
/// non-positive, which is allowed.
pub fn bic(stream: &EventStream, model: &Tgem) -> Result<f64> {
    let ll = log_likelihood(stream, model, None)?;
    Ok(ll - penalty(model, stream.t_star()))
}

/// Local decomposable score of one node: its likelihood term minus its own
/// penalty share. The whole-model BIC is the sum of these over nodes.
pub fn local_score(stream: &EventStream, model: &Tgem, node: &str) -> Result<f64> {
    let stats = sufficient_stats(stream, model, node)?;
    let id = model.label_id(node)?;
    Ok(node_log_likelihood(&stats)? - model.config_count(id) as f64 * stream.t_star().ln())
}

/// Fits MLE rates for every node and stores them in the model.
pub fn fit_mle(stream: &EventStream, model: &mut Tgem) -> Result<()> {
    for node in 0..model.node_count() {
        let label = model.label(node).to_string();
        let stats = sufficient_stats(stream, model, &label)?;
        let rates = mle_rates(&stats)?;
        model.set_rates(node, rates)?;
    }
    Ok(())
}
