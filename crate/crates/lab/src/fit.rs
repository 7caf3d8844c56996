//! Least-squares exponents in log-log coordinates.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingFit {
    pub quantity: String,
    /// Empirical exponent of `quantity ~ λ^slope`.
    pub slope: f64,
    pub intercept: f64,
    /// Root-mean-square residual of the log-log fit.
    pub rms_residual: f64,
    pub used: usize,
    /// Row indices left out because the quantity (or λ) was not positive.
    pub excluded: Vec<usize>,
}

/// Ordinary least squares of `ln q` against `ln λ` over `(λ, q)` points.
/// Returns `None` when fewer than three points are usable or all `λ` agree.
pub fn fit_loglog(quantity: &str, points: &[(f64, f64)]) -> Option<ScalingFit> {
    let mut excluded = Vec::new();
    let mut xy = Vec::with_capacity(points.len());
    for (i, &(lambda, q)) in points.iter().enumerate() {
        if lambda > 0.0 && q > 0.0 && lambda.is_finite() && q.is_finite() {
            xy.push((lambda.ln(), q.ln()));
        } else {
            excluded.push(i);
        }
    }
    if xy.len() < 3 {
        return None;
    }
    let n = xy.len() as f64;
    let mx = xy.iter().map(|p| p.0).sum::<f64>() / n;
    let my = xy.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = xy.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if !(sxx > 0.0) {
        return None;
    }
    let sxy: f64 = xy.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss: f64 = xy.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum();
    Some(ScalingFit {
        quantity: quantity.to_string(),
        slope,
        intercept,
        rms_residual: (ss / n).sqrt(),
        used: xy.len(),
        excluded,
    })
}
