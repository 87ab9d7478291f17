//! Krichevsky-Trofimov (add-one-half) sequential estimation.

use crate::error::{Error, Result};

/// One-step KT predictive: `(count + 1/2) / (total + arity/2)`.
#[inline]
pub fn kt_predictive(count: u64, total: u64, arity: u32) -> f64 {
    (count as f64 + 0.5) / (total as f64 + 0.5 * arity as f64)
}

/// Natural-log KT probability of `symbols`, accumulated one predictive at a
/// time over an alphabet of size `arity`.
pub fn sequential_kt_log_prob(symbols: &[u32], arity: u32) -> Result<f64> {
    if arity == 0 {
        return Err(Error::Parameter("alphabet arity must be at least 1".into()));
    }
    let mut counts = vec![0u64; arity as usize];
    let mut log_prob = 0.0;
    for (total, &s) in symbols.iter().enumerate() {
        if s >= arity {
            return Err(Error::AlphabetViolation { symbol: s, arity });
        }
        log_prob += kt_predictive(counts[s as usize], total as u64, arity).ln();
        counts[s as usize] += 1;
    }
    Ok(log_prob)
}

/// Same as [`sequential_kt_log_prob`] but returns the probability itself.
/// Underflows for long sequences; prefer the log form.
pub fn sequential_kt_probability(symbols: &[u32], arity: u32) -> Result<f64> {
    sequential_kt_log_prob(symbols, arity).map(f64::exp)
}
