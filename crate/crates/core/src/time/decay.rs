//! Exponential decay rates fitted to sampled deviation norms.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{check_len, Error, Result};

/// Minimum number of samples in the tail window.
pub const MIN_TAIL_SAMPLES: usize = 10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub times: Vec<f64>,
    pub deviation_norms: Vec<f64>,
    /// Negative least-squares slope of `ln deviation` over the tail.
    pub fitted_rate: f64,
    /// Half-width of the 95% confidence interval of `fitted_rate`.
    pub confidence_halfwidth: f64,
    /// Index of the first tail sample.
    pub tail_start: usize,
    pub tail_len: usize,
    pub predicted_rate: Option<f64>,
    /// `fitted_rate / predicted_rate`.
    pub ratio: Option<f64>,
}

/// Fit `deviation ~ C e^{-rate t}` on the tail where the deviation has fallen by a
/// decade from its first value; samples at or below `floor` are excluded.
pub fn decay_rate_with_floor(
    times: &[f64],
    deviation: &[f64],
    predicted_rate: Option<f64>,
    floor: f64,
) -> Result<DecayFit> {
    check_len("deviation samples", times.len(), deviation.len())?;
    let first = deviation.first().copied().unwrap_or(0.0);
    if !(first > 0.0) {
        return Err(Error::InsufficientDecay("initial deviation is zero".into()));
    }
    let start = deviation
        .iter()
        .position(|&d| d <= 0.1 * first)
        .ok_or_else(|| Error::InsufficientDecay("deviation never fell by one decade".into()))?;
    let tail: Vec<(f64, f64)> = (start..times.len())
        .filter(|&i| deviation[i] > floor && deviation[i] > 0.0)
        .map(|i| (times[i], deviation[i].ln()))
        .collect();
    if tail.len() < MIN_TAIL_SAMPLES {
        return Err(Error::InsufficientDecay(format!(
            "{} tail samples after the first decade, need {MIN_TAIL_SAMPLES}",
            tail.len()
        )));
    }
    let n = tail.len() as f64;
    let tm = tail.iter().map(|p| p.0).sum::<f64>() / n;
    let ym = tail.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = tail.iter().map(|p| (p.0 - tm).powi(2)).sum();
    let sxy: f64 = tail.iter().map(|p| (p.0 - tm) * (p.1 - ym)).sum();
    if !(sxx > 0.0) {
        return Err(Error::InsufficientDecay("tail samples share one time".into()));
    }
    let slope = sxy / sxx;
    let intercept = ym - slope * tm;
    let sse: f64 = tail.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum();
    let stderr = (sse / (n - 2.0) / sxx).sqrt();
    let t = StudentsT::new(0.0, 1.0, n - 2.0)
        .map_err(|e| Error::Numerical(format!("t distribution: {e}")))?
        .inverse_cdf(0.975);
    let fitted_rate = -slope;
    Ok(DecayFit {
        times: times.to_vec(),
        deviation_norms: deviation.to_vec(),
        fitted_rate,
        confidence_halfwidth: t * stderr,
        tail_start: start,
        tail_len: tail.len(),
        predicted_rate,
        ratio: predicted_rate.map(|p| fitted_rate / p),
    })
}

pub fn decay_rate(times: &[f64], deviation: &[f64], predicted_rate: Option<f64>) -> Result<DecayFit> {
    decay_rate_with_floor(times, deviation, predicted_rate, 0.0)
}
