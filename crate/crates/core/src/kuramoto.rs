//! Right-hand sides for the Kuramoto family: the second-order model with a
//! bonding force, the plain first-order model, and the circle log map used
//! to read the bonding term geometrically.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{KuramotoState, ModelParams, TargetMatrix};

/// Sign with `sgn(0) = 0`; coincident oscillators exert no bonding force.
#[inline]
pub fn sgn(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Parameters of the first-order model `θ̇_i = ν_i + (κ0/N) Σ sin(θ_j − θ_i)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Km1Params {
    pub kappa0: f64,
    pub nu: Vec<f64>,
}

/// Frequency accelerations of the bonded second-order model, written into
/// `domega`. Each pair is evaluated once and applied with opposite signs.
pub(crate) fn kmbf_accel(
    theta: &[f64],
    omega: &[f64],
    params: &ModelParams,
    target: &TargetMatrix,
    domega: &mut [f64],
) {
    let n = theta.len();
    let inv_n = 1.0 / n as f64;
    domega.iter_mut().for_each(|d| *d = 0.0);
    for i in 0..n {
        for j in (i + 1)..n {
            let dth = theta[j] - theta[i];
            let dom = omega[j] - omega[i];
            let align = (params.kappa0 * dth.cos() + params.kappa1) * dom;
            let bond = params.kappa2 * (dth.abs() - target.get(i, j)) * sgn(dth);
            let f = (align + bond) * inv_n;
            domega[i] += f;
            domega[j] -= f;
        }
    }
}

/// Returns `(θ̇, ω̇)` for the second-order Kuramoto model with bonding force.
pub fn kmbf_rhs(
    state: &KuramotoState,
    params: &ModelParams,
    target: &TargetMatrix,
) -> Result<(Vec<f64>, Vec<f64>)> {
    check_dims(state.n(), state.omega.len(), target.n())?;
    let mut domega = vec![0.0; state.n()];
    kmbf_accel(&state.theta, &state.omega, params, target, &mut domega);
    Ok((state.omega.clone(), domega))
}

pub(crate) fn km1_velocity(theta: &[f64], kappa0: f64, nu: &[f64], out: &mut [f64]) {
    let n = theta.len();
    let scale = kappa0 / n as f64;
    out.copy_from_slice(nu);
    for i in 0..n {
        for j in (i + 1)..n {
            let s = scale * (theta[j] - theta[i]).sin();
            out[i] += s;
            out[j] -= s;
        }
    }
}

/// Phase velocities of the first-order Kuramoto model.
pub fn km1_rhs(theta: &[f64], p: &Km1Params) -> Result<Vec<f64>> {
    if theta.len() != p.nu.len() {
        return Err(Error::DimensionMismatch(format!(
            "theta has {} entries but nu has {}",
            theta.len(),
            p.nu.len()
        )));
    }
    let mut out = vec![0.0; theta.len()];
    km1_velocity(theta, p.kappa0, &p.nu, &mut out);
    Ok(out)
}

/// Initial frequencies under which the second-order model with
/// `κ1 = κ2 = 0` reproduces the first-order flow from `theta0`.
///
/// With `ν ≡ 0` the result has zero sum.
pub fn constrained_initial_frequencies(theta0: &[f64], p: &Km1Params) -> Result<Vec<f64>> {
    km1_rhs(theta0, p)
}

/// Geodesic log map on the unit circle: distance `|θ_j − θ_i|` and orientation
/// `sgn(θ_j − θ_i)`, defined inside the injectivity radius π.
pub fn circle_log(theta_i: f64, theta_j: f64) -> Result<(f64, i8)> {
    let d = theta_j - theta_i;
    if !(d.abs() < PI) {
        return Err(Error::OutsideInjectivityRadius(d.abs()));
    }
    Ok((d.abs(), sgn(d) as i8))
}

fn check_dims(n_theta: usize, n_omega: usize, n_target: usize) -> Result<()> {
    if n_theta != n_omega || n_theta != n_target {
        return Err(Error::DimensionMismatch(format!(
            "theta {n_theta}, omega {n_omega}, target order {n_target}"
        )));
    }
    Ok(())
}
