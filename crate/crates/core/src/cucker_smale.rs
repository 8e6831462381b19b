//! Cucker-Smale flocking with a bonding force in arbitrary dimension, and
//! the communication weights that modulate its alignment term.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{CsState, ModelParams, TargetMatrix};

/// Communication weight ψ(r).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CommWeight {
    /// ψ ≡ 1.
    ConstantOne,
    /// ψ(r) = 1 / (1 + r).
    Algebraic,
    /// Piecewise-linear through `(r, ψ)` knots, constant outside the knots.
    Table(Vec<(f64, f64)>),
}

impl CommWeight {
    pub fn validate(&self) -> Result<()> {
        if let CommWeight::Table(knots) = self {
            if knots.is_empty() {
                return Err(Error::InvalidWeight("table has no knots".into()));
            }
            for &(r, psi) in knots {
                if !(r.is_finite() && r >= 0.0 && psi.is_finite() && psi >= 0.0) {
                    return Err(Error::InvalidWeight(format!("bad knot ({r}, {psi})")));
                }
            }
            if knots.windows(2).any(|w| w[1].0 <= w[0].0) {
                return Err(Error::InvalidWeight(
                    "knot radii must increase strictly".into(),
                ));
            }
        }
        Ok(())
    }

    /// Upper bound ψ_M of the weight over `r ≥ 0`.
    pub fn max_value(&self) -> f64 {
        match self {
            CommWeight::ConstantOne | CommWeight::Algebraic => 1.0,
            CommWeight::Table(k) => k.iter().map(|&(_, p)| p).fold(0.0, f64::max),
        }
    }

    /// Limit of ψ(r) as r → ∞.
    pub fn tail_value(&self) -> f64 {
        match self {
            CommWeight::ConstantOne => 1.0,
            CommWeight::Algebraic => 0.0,
            CommWeight::Table(k) => k.last().map_or(0.0, |&(_, p)| p),
        }
    }

    #[inline]
    pub(crate) fn value(&self, r: f64) -> f64 {
        match self {
            CommWeight::ConstantOne => 1.0,
            CommWeight::Algebraic => 1.0 / (1.0 + r),
            CommWeight::Table(k) => interpolate(k, r),
        }
    }
}

fn interpolate(knots: &[(f64, f64)], r: f64) -> f64 {
    let (first, last) = (knots[0], knots[knots.len() - 1]);
    if r <= first.0 {
        return first.1;
    }
    if r >= last.0 {
        return last.1;
    }
    let k = knots.partition_point(|&(kr, _)| kr <= r);
    let (r0, p0) = knots[k - 1];
    let (r1, p1) = knots[k];
    p0 + (p1 - p0) * (r - r0) / (r1 - r0)
}

pub fn psi_eval(w: &CommWeight, r: f64) -> Result<f64> {
    if r < 0.0 || r.is_nan() {
        return Err(Error::NegativeRadius(r));
    }
    Ok(w.value(r))
}

/// Velocity accelerations for flat row-major positions and velocities.
pub(crate) fn csbf_accel(
    dim: usize,
    x: &[f64],
    v: &[f64],
    params: &ModelParams,
    target: &TargetMatrix,
    w: &CommWeight,
    dv: &mut [f64],
) -> Result<()> {
    let n = x.len() / dim;
    let inv_n = 1.0 / n as f64;
    let mut unit = vec![0.0; dim];
    let mut rel_v = vec![0.0; dim];
    dv.iter_mut().for_each(|a| *a = 0.0);
    for i in 0..n {
        let xi = &x[i * dim..(i + 1) * dim];
        let vi = &v[i * dim..(i + 1) * dim];
        for j in (i + 1)..n {
            let xj = &x[j * dim..(j + 1) * dim];
            let vj = &v[j * dim..(j + 1) * dim];
            let mut r2 = 0.0;
            for k in 0..dim {
                unit[k] = xj[k] - xi[k];
                rel_v[k] = vj[k] - vi[k];
                r2 += unit[k] * unit[k];
            }
            let r = r2.sqrt();
            if r == 0.0 {
                return Err(Error::CollisionSingularity(i, j));
            }
            let mut radial = 0.0;
            for k in 0..dim {
                unit[k] /= r;
                radial += rel_v[k] * unit[k];
            }
            let align = params.kappa0 * w.value(r);
            let along = params.kappa1 * radial + params.kappa2 * (r - target.get(i, j));
            for k in 0..dim {
                let f = (align * rel_v[k] + along * unit[k]) * inv_n;
                dv[i * dim + k] += f;
                dv[j * dim + k] -= f;
            }
        }
    }
    Ok(())
}

/// Returns `(ẋ, v̇)` for the Cucker-Smale model with bonding force.
pub fn csbf_rhs(
    state: &CsState,
    params: &ModelParams,
    target: &TargetMatrix,
    w: &CommWeight,
) -> Result<(Vec<f64>, Vec<f64>)> {
    if target.n() != state.n() {
        return Err(Error::DimensionMismatch(format!(
            "{} particles but target order {}",
            state.n(),
            target.n()
        )));
    }
    let mut dv = vec![0.0; state.v.len()];
    csbf_accel(state.dim, &state.x, &state.v, params, target, w, &mut dv)?;
    Ok((state.v.clone(), dv))
}

/// Bonding deviation `e = r_ij − d∞_ij` and its rate `ė = d r_ij / dt`.
pub fn pair_deviation(
    state: &CsState,
    target: &TargetMatrix,
    i: usize,
    j: usize,
) -> Result<(f64, f64)> {
    let r = state.distance(i, j);
    if r == 0.0 {
        return Err(Error::CollisionSingularity(i.min(j), i.max(j)));
    }
    let edot = state
        .pos(i)
        .iter()
        .zip(state.pos(j))
        .zip(state.vel(i).iter().zip(state.vel(j)))
        .map(|((xi, xj), (vi, vj))| (vi - vj) * (xi - xj))
        .sum::<f64>()
        / r;
    Ok((r - target.get(i, j), edot))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pair_target(d: f64) -> TargetMatrix {
        TargetMatrix::new(2, vec![0.0, d, d, 0.0]).unwrap()
    }

    #[test]
    fn psi_values() {
        assert_eq!(psi_eval(&CommWeight::Algebraic, 0.0).unwrap(), 1.0);
        assert_eq!(psi_eval(&CommWeight::Algebraic, 1.0).unwrap(), 0.5);
        assert_eq!(psi_eval(&CommWeight::ConstantOne, 37.0).unwrap(), 1.0);
        assert!(matches!(
            psi_eval(&CommWeight::Algebraic, -1.0),
            Err(Error::NegativeRadius(_))
        ));
    }

    #[test]
    fn psi_table_interpolates_and_clamps() {
        let w = CommWeight::Table(vec![(1.0, 1.0), (3.0, 0.0)]);
        w.validate().unwrap();
        assert_eq!(psi_eval(&w, 0.0).unwrap(), 1.0);
        assert_eq!(psi_eval(&w, 2.0).unwrap(), 0.5);
        assert_eq!(psi_eval(&w, 2.5).unwrap(), 0.25);
        assert_eq!(psi_eval(&w, 10.0).unwrap(), 0.0);
        assert!(CommWeight::Table(vec![(1.0, 1.0), (1.0, 2.0)])
            .validate()
            .is_err());
        assert!(CommWeight::Table(vec![]).validate().is_err());
        assert!(CommWeight::Table(vec![(0.0, -1.0)]).validate().is_err());
    }

    #[test]
    fn rest_at_target_spacing() {
        let s = CsState::new(0.0, 1, vec![0.0, 2.0], vec![0.0, 0.0]).unwrap();
        let p = ModelParams::new(1.0, 1.0, 1.0).unwrap();
        let (_, dv) = csbf_rhs(&s, &p, &pair_target(2.0), &CommWeight::Algebraic).unwrap();
        assert_eq!(dv, vec![0.0, 0.0]);
    }

    #[test]
    fn compressed_pair_repels() {
        let s = CsState::new(0.0, 1, vec![0.0, 1.0], vec![0.0, 0.0]).unwrap();
        let p = ModelParams::new(0.0, 0.0, 2.0).unwrap();
        let (_, dv) = csbf_rhs(&s, &p, &pair_target(2.0), &CommWeight::Algebraic).unwrap();
        assert_eq!(dv, vec![-1.0, 1.0]);
    }

    #[test]
    fn coincident_particles_are_singular() {
        let s = CsState::new(0.0, 2, vec![1.0, 1.0, 1.0, 1.0], vec![0.0; 4]).unwrap();
        let p = ModelParams::new(1.0, 1.0, 1.0).unwrap();
        let r = csbf_rhs(&s, &p, &pair_target(1.0), &CommWeight::ConstantOne);
        assert_eq!(r, Err(Error::CollisionSingularity(0, 1)));
    }

    #[test]
    fn deviation_cases() {
        let s = CsState::new(0.0, 1, vec![0.0, 2.0], vec![0.0, 0.0]).unwrap();
        assert_eq!(
            pair_deviation(&s, &pair_target(2.0), 0, 1).unwrap(),
            (0.0, 0.0)
        );

        let s = CsState::new(0.0, 1, vec![0.0, 1.0], vec![0.0, 1.0]).unwrap();
        assert_eq!(
            pair_deviation(&s, &pair_target(2.0), 0, 1).unwrap(),
            (-1.0, 1.0)
        );
        assert_eq!(
            pair_deviation(&s, &pair_target(2.0), 1, 0).unwrap(),
            (-1.0, 1.0)
        );

        let s = CsState::new(0.0, 2, vec![0.0, 0.0, 0.0, 0.0], vec![0.0; 4]).unwrap();
        assert!(pair_deviation(&s, &pair_target(2.0), 0, 1).is_err());
    }

    #[test]
    fn deviation_symmetric_in_2d() {
        let s = CsState::new(0.0, 2, vec![0.3, -1.0, 2.2, 0.4], vec![0.5, 0.1, -0.7, 0.9]).unwrap();
        let t = pair_target(1.5);
        let a = pair_deviation(&s, &t, 0, 1).unwrap();
        let b = pair_deviation(&s, &t, 1, 0).unwrap();
        assert!((a.0 - b.0).abs() < 1e-15 && (a.1 - b.1).abs() < 1e-15);
    }
}
