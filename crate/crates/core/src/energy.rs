//! Energy functionals, production rates and the energy-balance residual.
//!
//! Both models share the same structure: kinetic energy `½Σ|ω_i|²` (or
//! `½Σ‖v_i‖²`), a bonding potential `(κ2/4N)Σ_{i,j}(gap_ij − target_ij)²`
//! over the full double sum, and a nonnegative production rate whose time
//! integral accounts for every unit of energy lost.

use serde::{Deserialize, Serialize};

use crate::cucker_smale::CommWeight;
use crate::error::{Error, Result};
use crate::integrator::Trajectory;
use crate::model::{CsState, KuramotoState, ModelParams, TargetMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct EnergyReport {
    pub kinetic: f64,
    pub potential: f64,
    pub total: f64,
    pub production: f64,
}

impl EnergyReport {
    fn new(kinetic: f64, potential: f64, production: f64) -> Self {
        EnergyReport {
            kinetic,
            potential,
            total: kinetic + potential,
            production,
        }
    }
}

pub fn km_energy(
    state: &KuramotoState,
    params: &ModelParams,
    target: &TargetMatrix,
) -> Result<EnergyReport> {
    let n = state.n();
    if state.omega.len() != n || target.n() != n {
        return Err(Error::DimensionMismatch(
            "state and target sizes differ".into(),
        ));
    }
    let (theta, omega) = (&state.theta, &state.omega);
    let kinetic = 0.5 * omega.iter().map(|w| w * w).sum::<f64>();
    let mut pot = 0.0;
    let mut prod = 0.0;
    for i in 0..n {
        for j in 0..n {
            let d = theta[j] - theta[i];
            let e = d.abs() - target.get(i, j);
            pot += e * e;
            let dw = omega[j] - omega[i];
            prod += (params.kappa0 * d.cos() + params.kappa1) * dw * dw;
        }
    }
    let nf = n as f64;
    Ok(EnergyReport::new(
        kinetic,
        params.kappa2 / (4.0 * nf) * pot,
        prod / (2.0 * nf),
    ))
}

pub fn cs_energy(
    state: &CsState,
    params: &ModelParams,
    target: &TargetMatrix,
    w: &CommWeight,
) -> Result<EnergyReport> {
    let n = state.n();
    if target.n() != n {
        return Err(Error::DimensionMismatch(
            "state and target sizes differ".into(),
        ));
    }
    let kinetic = 0.5 * state.v.iter().map(|c| c * c).sum::<f64>();
    let mut pot = 0.0;
    let mut align = 0.0;
    let mut radial = 0.0;
    for i in 0..n {
        for j in 0..n {
            let r = state.distance(i, j);
            let e = r - target.get(i, j);
            pot += e * e;
            let (xi, xj, vi, vj) = (state.pos(i), state.pos(j), state.vel(i), state.vel(j));
            let dv2: f64 = vi.iter().zip(vj).map(|(a, b)| (b - a) * (b - a)).sum();
            align += w.value(r) * dv2;
            if i != j {
                if r == 0.0 {
                    return Err(Error::CollisionSingularity(i.min(j), i.max(j)));
                }
                let proj: f64 = vi
                    .iter()
                    .zip(vj)
                    .zip(xi.iter().zip(xj))
                    .map(|((a, b), (p, q))| (b - a) * (q - p))
                    .sum::<f64>()
                    / r;
                radial += proj * proj;
            }
        }
    }
    let nf = n as f64;
    let production = (params.kappa0 * align + params.kappa1 * radial) / (2.0 * nf);
    Ok(EnergyReport::new(
        kinetic,
        params.kappa2 / (4.0 * nf) * pot,
        production,
    ))
}

/// Largest violation of `ℰ(t_k) + ∫₀^{t_k} 𝒫 − ℰ(0)` over the trajectory's
/// sample times, with the integral taken by composite Simpson quadrature.
pub fn energy_balance_residual<S>(traj: &Trajectory<S>) -> Result<f64> {
    let reports: Vec<EnergyReport> = traj.diagnostics.iter().map(|d| d.energy).collect();
    balance_residual(&traj.times, &reports)
}

/// Grid-level form of [`energy_balance_residual`].
pub fn balance_residual(times: &[f64], reports: &[EnergyReport]) -> Result<f64> {
    if times.len() != reports.len() {
        return Err(Error::DimensionMismatch(
            "times and energy reports differ in length".into(),
        ));
    }
    if times.len() < 3 {
        return Err(Error::TooFewSamples {
            needed: 3,
            got: times.len(),
        });
    }
    let h = (times[times.len() - 1] - times[0]) / (times.len() - 1) as f64;
    let uniform = times
        .windows(2)
        .all(|w| ((w[1] - w[0]) - h).abs() <= 1e-9 * h.abs().max(f64::MIN_POSITIVE));
    if !(h > 0.0) || !uniform {
        return Err(Error::DimensionMismatch(
            "energy balance needs a uniform, increasing time grid".into(),
        ));
    }
    let p: Vec<f64> = reports.iter().map(|r| r.production).collect();
    let integrals = cumulative_simpson(&p, h);
    let e0 = reports[0].total;
    Ok(reports
        .iter()
        .zip(&integrals)
        .map(|(r, int)| (r.total + int - e0).abs())
        .fold(0.0, f64::max))
}

/// `out[k] ≈ ∫ f` over the first `k` intervals of a uniform grid with
/// spacing `h`. Needs at least three samples.
pub(crate) fn cumulative_simpson(f: &[f64], h: f64) -> Vec<f64> {
    let m = f.len();
    // Simpson prefix sums at even indices.
    let mut even = vec![0.0; m];
    let mut k = 2;
    while k < m {
        even[k] = even[k - 2] + h / 3.0 * (f[k - 2] + 4.0 * f[k - 1] + f[k]);
        k += 2;
    }
    let mut out = vec![0.0; m];
    for k in 1..m {
        out[k] = if k % 2 == 0 {
            even[k]
        } else if k >= 3 {
            even[k - 3] + 3.0 * h / 8.0 * (f[k - 3] + 3.0 * f[k - 2] + 3.0 * f[k - 1] + f[k])
        } else if m >= 4 {
            // first interval from the cubic through the first four samples
            h / 24.0 * (9.0 * f[0] + 19.0 * f[1] - 5.0 * f[2] + f[3])
        } else {
            h / 12.0 * (5.0 * f[0] + 8.0 * f[1] - f[2])
        };
    }
    out
}
