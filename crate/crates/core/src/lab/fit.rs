//! Exponential decay fits of correlation curves.

use serde::{Deserialize, Serialize};

use super::correlation::CorrelationCurve;
use crate::error::{Error, Result};

/// Fewest points accepted in a fit window.
pub const MIN_WINDOW: usize = 5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    /// `max(-slope, 0)`, or zero when no decay is detected.
    pub gamma: f64,
    pub slope: f64,
    pub slope_stderr: f64,
    pub intercept: f64,
    /// Index range `[start, end)` of the fitted points.
    pub window: (usize, usize),
    pub r_squared: f64,
    /// The slope is not below `-2` standard errors.
    pub no_decay: bool,
}

/// Weighted least squares of `ln |C(t)|` against `t` over the longest run of
/// consecutive points with `|C| > 3 stderr`, weighted by `(|C| / stderr)^2`
/// (uniformly when some standard error is zero).
pub fn fit_decay_rate(curve: &CorrelationCurve) -> Result<DecayFit> {
    let m = curve.t.len();
    let above: Vec<bool> = (0..m).map(|i| curve.c[i].norm() > 3.0 * curve.stderr[i]).collect();
    let (mut best, mut start) = ((0, 0), None);
    for i in 0..=m {
        if i < m && above[i] {
            start.get_or_insert(i);
        } else if let Some(s) = start.take() {
            if i - s > best.1 - best.0 {
                best = (s, i);
            }
        }
    }
    let (lo, hi) = best;
    if hi - lo < MIN_WINDOW {
        return Err(Error::numerical("noise floor reached", (hi - lo) as f64));
    }
    let xs = &curve.t[lo..hi];
    let ys: Vec<f64> = curve.c[lo..hi].iter().map(|c| c.norm().ln()).collect();
    let uniform = curve.stderr[lo..hi].iter().any(|&s| s == 0.0);
    let ws: Vec<f64> = (lo..hi)
        .map(|i| if uniform { 1.0 } else { (curve.c[i].norm() / curve.stderr[i]).powi(2) })
        .collect();
    let sw: f64 = ws.iter().sum();
    let mx = xs.iter().zip(&ws).map(|(x, w)| w * x).sum::<f64>() / sw;
    let my = ys.iter().zip(&ws).map(|(y, w)| w * y).sum::<f64>() / sw;
    let sxx: f64 = xs.iter().zip(&ws).map(|(x, w)| w * (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).zip(&ws).map(|((x, y), w)| w * (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = xs
        .iter()
        .zip(&ys)
        .zip(&ws)
        .map(|((x, y), w)| w * (y - intercept - slope * x).powi(2))
        .sum();
    let tss: f64 = ys.iter().zip(&ws).map(|(y, w)| w * (y - my).powi(2)).sum();
    let k = (hi - lo) as f64;
    let slope_stderr = if uniform {
        (rss / (k - 2.0) / sxx).sqrt()
    } else {
        (1.0 / sxx).sqrt()
    };
    let r_squared = if tss > 0.0 { 1.0 - rss / tss } else { 1.0 };
    let no_decay = slope >= -2.0 * slope_stderr;
    Ok(DecayFit {
        gamma: if no_decay { 0.0 } else { -slope },
        slope,
        slope_stderr,
        intercept,
        window: (lo, hi),
        r_squared,
        no_decay,
    })
}
