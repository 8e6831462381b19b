//! A-priori gap bounds and the sufficient conditions for collision
//! avoidance, synchronization and flocking.
//!
//! Every condition carries a signed margin: positive (or zero for the
//! non-strict inequalities) means satisfied, and its size says how far the
//! data sits from the boundary.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::cucker_smale::CommWeight;
use crate::energy::{cs_energy, km_energy};
use crate::error::{Error, Result};
use crate::model::{CsState, KuramotoState, ModelParams, TargetMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundsReport {
    pub upper: f64,
    pub lower: f64,
    pub e0: f64,
}

fn bounds(n: usize, e0: f64, kappa2: f64, target: &TargetMatrix) -> Result<BoundsReport> {
    if kappa2 <= 0.0 {
        return Err(Error::ZeroKappa2);
    }
    let spread = (2.0 * n as f64 * e0 / kappa2).sqrt();
    Ok(BoundsReport {
        upper: target.max_off_diagonal() + spread,
        lower: target.min_off_diagonal() - spread,
        e0,
    })
}

pub fn km_bounds(
    state0: &KuramotoState,
    params: &ModelParams,
    target: &TargetMatrix,
) -> Result<BoundsReport> {
    let e0 = km_energy(state0, params, target)?.total;
    bounds(state0.n(), e0, params.kappa2, target)
}

pub fn cs_bounds(
    state0: &CsState,
    params: &ModelParams,
    target: &TargetMatrix,
) -> Result<BoundsReport> {
    let e0 = cs_energy(state0, params, target, &CommWeight::ConstantOne)?.total;
    bounds(state0.n(), e0, params.kappa2, target)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Condition {
    pub name: String,
    pub passed: bool,
    pub margin: f64,
}

impl Condition {
    fn strict(name: &str, margin: f64) -> Self {
        Condition {
            name: name.to_string(),
            passed: margin > 0.0,
            margin,
        }
    }

    fn weak(name: &str, margin: f64) -> Self {
        Condition {
            name: name.to_string(),
            passed: margin >= 0.0,
            margin,
        }
    }

    fn failed(name: &str) -> Self {
        Condition {
            name: name.to_string(),
            passed: false,
            margin: f64::NEG_INFINITY,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameworkVerdict {
    /// `None` when the bounds are undefined (`κ2 = 0` or an unusable state).
    pub bounds: Option<BoundsReport>,
    pub conditions: Vec<Condition>,
    /// Closed-form sufficient inequality; informative only, not part of `passed`.
    pub explicit: Option<Condition>,
    pub passed: bool,
}

impl FrameworkVerdict {
    fn new(
        bounds: Option<BoundsReport>,
        conditions: Vec<Condition>,
        explicit: Option<Condition>,
    ) -> Self {
        let passed = conditions.iter().all(|c| c.passed);
        FrameworkVerdict {
            bounds,
            conditions,
            explicit,
            passed,
        }
    }

    pub fn condition(&self, name: &str) -> Option<&Condition> {
        self.conditions.iter().find(|c| c.name == name)
    }
}

fn pair_extremes(n: usize, gap: impl Fn(usize, usize) -> f64) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi = 0.0f64;
    for i in 0..n {
        for j in (i + 1)..n {
            let g = gap(i, j);
            lo = lo.min(g);
            hi = hi.max(g);
        }
    }
    (lo, hi)
}

/// Conditions (a) to (d) for the bonded Kuramoto model.
pub fn km_check(
    state0: &KuramotoState,
    params: &ModelParams,
    target: &TargetMatrix,
) -> FrameworkVerdict {
    let n = state0.n();
    let bounds = km_bounds(state0, params, target).ok();
    let (_, max_gap) = pair_extremes(n, |i, j| (state0.theta[i] - state0.theta[j]).abs());
    let min_t = target.min_off_diagonal();
    let max_t = target.max_off_diagonal();

    let mut conditions = Vec::with_capacity(4);
    match bounds {
        Some(b) => {
            // the energy bound gives max gap ≤ 𝒰; only 𝒰 < π needs strictness
            let (room, below_pi) = (b.upper - max_gap, PI - b.upper);
            conditions.push(Condition {
                name: "a".to_string(),
                passed: room >= 0.0 && below_pi > 0.0,
                margin: room.min(below_pi),
            });
            conditions.push(Condition::strict(
                "b",
                params.kappa2 * min_t * min_t / (2.0 * n as f64) - b.e0,
            ));
            conditions.push(Condition::strict(
                "c",
                params.kappa0 * b.upper.cos() + params.kappa1,
            ));
        }
        None => {
            conditions.extend(["a", "b", "c"].map(Condition::failed));
        }
    }
    conditions.push(Condition::strict("d", params.kappa2));

    let explicit = (target.n() == n).then(|| {
        let mut lhs = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                let e = (state0.theta[j] - state0.theta[i]).abs() - target.get(i, j);
                lhs += e * e;
            }
        }
        let rhs = (min_t * min_t).min((PI - max_t).powi(2));
        Condition::weak("explicit", rhs - lhs)
    });
    FrameworkVerdict::new(bounds, conditions, explicit)
}

/// Number of interior sample points used to bound ψ from below on `[0, U]`.
const PSI_SAMPLES: usize = 10_000;

fn psi_min(w: &CommWeight, upper: f64) -> f64 {
    if !upper.is_finite() {
        return (0..=PSI_SAMPLES)
            .map(|k| w.value(k as f64))
            .fold(w.tail_value(), f64::min);
    }
    let upper = upper.max(0.0);
    (0..=PSI_SAMPLES + 1)
        .map(|k| w.value(upper * k as f64 / (PSI_SAMPLES + 1) as f64))
        .fold(f64::INFINITY, f64::min)
}

/// Conditions (a) to (e) for the bonded Cucker-Smale model.
pub fn cs_check(
    state0: &CsState,
    params: &ModelParams,
    target: &TargetMatrix,
    w: &CommWeight,
) -> FrameworkVerdict {
    let n = state0.n();
    let (min_r, max_r) = pair_extremes(n, |i, j| state0.distance(i, j));
    let bounds = if min_r > 0.0 {
        cs_bounds(state0, params, target).ok()
    } else {
        None
    };

    let mut conditions = vec![Condition::strict("a", min_r)];
    match bounds {
        Some(b) => {
            let spread = b.upper - target.max_off_diagonal();
            conditions.push(Condition::strict("b", target.min_off_diagonal() - spread));
            conditions.push(Condition::weak("c", b.upper - max_r));
        }
        None => conditions.extend(["b", "c"].map(Condition::failed)),
    }
    conditions.push(Condition::strict(
        "d",
        params.kappa0.min(params.kappa1).min(params.kappa2),
    ));
    let upper = bounds.map_or(f64::INFINITY, |b| b.upper);
    conditions.push(Condition::strict("e", psi_min(w, upper)));
    FrameworkVerdict::new(bounds, conditions, None)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pair(d: f64) -> TargetMatrix {
        TargetMatrix::new(2, vec![0.0, d, d, 0.0]).unwrap()
    }

    #[test]
    fn km_bounds_cases() {
        let p = ModelParams::new(1.0, 1.0, 2.0).unwrap();
        let rest = KuramotoState::new(0.0, vec![0.0, 1.0], vec![0.0, 0.0]).unwrap();
        let b = km_bounds(&rest, &p, &pair(1.0)).unwrap();
        assert_eq!((b.upper, b.lower, b.e0), (1.0, 1.0, 0.0));

        // kinetic ½(0.5² + 0.5²) = 0.25 at the target spacing
        let s = KuramotoState::new(0.0, vec![0.0, 1.0], vec![0.5, -0.5]).unwrap();
        let b = km_bounds(&s, &p, &pair(1.0)).unwrap();
        assert_eq!(b.e0, 0.25);
        assert!((b.upper - 1.707_106_781_186_547_6).abs() < 1e-15);
        assert!((b.lower - 0.292_893_218_813_452_4).abs() < 1e-15);

        let p0 = ModelParams::new(1.0, 1.0, 0.0).unwrap();
        assert_eq!(km_bounds(&s, &p0, &pair(1.0)), Err(Error::ZeroKappa2));
    }

    #[test]
    fn cs_bounds_cases() {
        let p = ModelParams::new(1.0, 1.0, 2.0).unwrap();
        let s = CsState::new(0.0, 1, vec![0.0, 2.0], vec![1.0, -1.0]).unwrap();
        let b = cs_bounds(&s, &p, &pair(2.0)).unwrap();
        assert_eq!(b.e0, 1.0);
        assert!((b.upper - (2.0 + 2f64.sqrt())).abs() < 1e-15);
        assert!((b.lower - (2.0 - 2f64.sqrt())).abs() < 1e-15);

        let rest = CsState::new(0.0, 1, vec![0.0, 2.0], vec![0.0, 0.0]).unwrap();
        let b = cs_bounds(&rest, &p, &pair(2.0)).unwrap();
        assert_eq!((b.upper, b.lower), (2.0, 2.0));
        assert_eq!(
            cs_bounds(&s, &ModelParams::new(1.0, 1.0, 0.0).unwrap(), &pair(2.0)),
            Err(Error::ZeroKappa2)
        );
    }

    #[test]
    fn km_rest_passes() {
        let p = ModelParams::new(1.0, 5.0, 10.0).unwrap();
        let s = KuramotoState::new(0.0, vec![0.0, 0.5, 1.2], vec![0.0; 3]).unwrap();
        let t = crate::model::target_from_phases(&[0.0, 0.5, 1.2]).unwrap();
        let v = km_check(&s, &p, &t);
        assert!(v.passed, "{v:?}");
        assert!(v.explicit.as_ref().unwrap().passed);
        assert_eq!(v.condition("a").unwrap().margin, 0.0);
        assert!(v.conditions.iter().all(|c| c.margin >= 0.0));
    }

    #[test]
    fn km_inflated_energy_fails_b() {
        let p = ModelParams::new(1.0, 5.0, 10.0).unwrap();
        let t = crate::model::target_from_phases(&[0.0, 0.5, 1.2]).unwrap();
        let s = KuramotoState::new(0.0, vec![0.0, 0.5, 1.2], vec![0.01, 0.0, -0.01]).unwrap();
        assert!(km_check(&s, &p, &t).passed);
        let big = KuramotoState {
            omega: s.omega.iter().map(|w| w * 100.0).collect(),
            ..s
        };
        let v = km_check(&big, &p, &t);
        let b = v.condition("b").unwrap();
        assert!(!b.passed && b.margin < 0.0);
        let e0 = km_energy(&big, &p, &t).unwrap().total;
        assert!((b.margin - (10.0 * 0.25 / 6.0 - e0)).abs() < 1e-12);
    }

    #[test]
    fn km_zero_kappa2_is_a_verdict() {
        let p = ModelParams::new(1.0, 5.0, 0.0).unwrap();
        let s = KuramotoState::new(0.0, vec![0.0, 0.5], vec![0.0; 2]).unwrap();
        let v = km_check(&s, &p, &pair(0.5));
        assert!(!v.passed);
        assert!(v.bounds.is_none());
        assert!(!v.condition("d").unwrap().passed);
    }

    #[test]
    fn cs_rest_passes_and_kappa0_zero_fails_d() {
        let t = pair(2.0);
        let s = CsState::new(0.0, 2, vec![0.0, 0.0, 2.0, 0.0], vec![0.0; 4]).unwrap();
        let v = cs_check(
            &s,
            &ModelParams::new(1.0, 5.0, 10.0).unwrap(),
            &t,
            &CommWeight::Algebraic,
        );
        assert!(v.passed, "{v:?}");
        assert!((v.condition("e").unwrap().margin - 1.0 / 3.0).abs() < 1e-15);

        let v = cs_check(
            &s,
            &ModelParams::new(0.0, 5.0, 10.0).unwrap(),
            &t,
            &CommWeight::Algebraic,
        );
        assert!(!v.passed);
        assert!(!v.condition("d").unwrap().passed);
        assert!(v
            .conditions
            .iter()
            .filter(|c| c.name != "d")
            .all(|c| c.passed));
    }

    #[test]
    fn cs_coincident_fails_a() {
        let s = CsState::new(0.0, 1, vec![1.0, 1.0], vec![0.0; 2]).unwrap();
        let v = cs_check(
            &s,
            &ModelParams::new(1.0, 1.0, 1.0).unwrap(),
            &pair(1.0),
            &CommWeight::Algebraic,
        );
        assert!(!v.condition("a").unwrap().passed);
        assert!(!v.passed);
    }

    #[test]
    fn psi_table_minimum_found_by_sampling() {
        let w = CommWeight::Table(vec![(0.0, 1.0), (2.0, 0.0), (4.0, 1.0)]);
        assert!(psi_min(&w, 3.0) < 1e-3);
        assert!((psi_min(&w, 1.0) - 0.5).abs() < 1e-12);
    }
}
