//! Order metrics over states and exponential-rate fits over time series.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::integrator::AgentState;
use crate::model::TargetMatrix;

/// Samples at or below this level are treated as round-off and left out of
/// log fits.
pub const LOG_FLOOR: f64 = 1e-15;
const MIN_FIT_SAMPLES: usize = 5;

/// Largest pairwise gap and largest pairwise relative speed.
pub fn diameters<S: AgentState>(state: &S) -> Result<(f64, f64)> {
    let n = state.agent_count();
    if n < 2 {
        return Err(Error::SingleAgent);
    }
    let mut pos = 0.0f64;
    let mut vel = 0.0f64;
    for i in 0..n {
        for j in (i + 1)..n {
            pos = pos.max(state.gap(i, j));
            vel = vel.max(state.relative_speed(i, j));
        }
    }
    Ok((pos, vel))
}

/// Root-sum-square deviation of the pairwise gaps from their targets.
pub fn target_error<S: AgentState>(state: &S, target: &TargetMatrix) -> Result<f64> {
    let n = state.agent_count();
    if n < 2 {
        return Err(Error::SingleAgent);
    }
    if target.n() != n {
        return Err(Error::DimensionMismatch(format!(
            "{n} agents but target order {}",
            target.n()
        )));
    }
    let mut acc = 0.0;
    for i in 0..n {
        for j in (i + 1)..n {
            let e = state.gap(i, j) - target.get(i, j);
            acc += e * e;
        }
    }
    Ok(acc.sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    /// Minus the slope of `ln y` against `t`.
    pub rate: f64,
    pub intercept: f64,
    pub window: (f64, f64),
    /// RMS of the log-space residuals.
    pub rms_residual: f64,
    pub samples: usize,
}

/// Least-squares fit of `ln y = intercept − rate·t` over `window`, which
/// defaults to the trailing half of the series.
pub fn fit_decay(series: &[(f64, f64)], window: Option<(f64, f64)>) -> Result<DecayFit> {
    let (lo, hi) = match window {
        Some(w) => w,
        None => {
            let (Some(first), Some(last)) = (series.first(), series.last()) else {
                return Err(Error::TooFewSamples {
                    needed: MIN_FIT_SAMPLES,
                    got: 0,
                });
            };
            (0.5 * (first.0 + last.0), last.0)
        }
    };
    if !(lo < hi) {
        return Err(Error::InvalidWindow(lo, hi));
    }
    let mut pts = Vec::new();
    for &(t, y) in series.iter().filter(|(t, _)| *t >= lo && *t <= hi) {
        if !(y > 0.0) {
            return Err(Error::NonpositiveSamples(y));
        }
        if y > LOG_FLOOR {
            pts.push((t, y.ln()));
        }
    }
    if pts.len() < MIN_FIT_SAMPLES {
        return Err(Error::TooFewSamples {
            needed: MIN_FIT_SAMPLES,
            got: pts.len(),
        });
    }
    let m = pts.len() as f64;
    let tbar = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let lbar = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxx: f64 = pts.iter().map(|p| (p.0 - tbar).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - tbar) * (p.1 - lbar)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidWindow(lo, hi));
    }
    let slope = sxy / sxx;
    let intercept = lbar - slope * tbar;
    let rms = (pts
        .iter()
        .map(|p| (p.1 - intercept - slope * p.0).powi(2))
        .sum::<f64>()
        / m)
        .sqrt();
    Ok(DecayFit {
        rate: -slope,
        intercept,
        window: (lo, hi),
        rms_residual: rms,
        samples: pts.len(),
    })
}
