//! Piecewise closed-form solver for the relative coordinate of two bonded
//! particles on a line with constant communication weight.
//!
//! On each branch `sgn(x) = b` the dynamics are the linear oscillator
//! `ẍ = −γ₂ẋ − κ2·x + b·κ2·d∞`, so a trajectory is a chain of closed-form
//! segments glued at the zeros of `x`. Reaching `(x, v) = (0, 0)` leaves the
//! continuation non-unique and ends the solve.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance on `|x|` and `|v|` for declaring an origin hit.
pub const ORIGIN_TOL: f64 = 1e-12;
const BISECT_REL: f64 = 1e-13;
const MAX_CRITICAL_POINTS: usize = 100_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct F2Params {
    /// Total damping `κ0 + κ1`.
    pub gamma2: f64,
    pub kappa2: f64,
    pub dinf: f64,
}

impl F2Params {
    pub fn new(gamma2: f64, kappa2: f64, dinf: f64) -> Result<Self> {
        if !(gamma2.is_finite() && gamma2 >= 0.0) {
            return Err(Error::InvalidFilippovParams(format!("gamma2 = {gamma2}")));
        }
        if !(kappa2.is_finite() && kappa2 > 0.0) {
            return Err(Error::InvalidFilippovParams(format!("kappa2 = {kappa2}")));
        }
        if !(dinf.is_finite() && dinf > 0.0) {
            return Err(Error::InvalidFilippovParams(format!("dinf = {dinf}")));
        }
        Ok(F2Params {
            gamma2,
            kappa2,
            dinf,
        })
    }

    pub fn from_couplings(kappa0: f64, kappa1: f64, kappa2: f64, dinf: f64) -> Result<Self> {
        if !(kappa0 >= 0.0 && kappa1 >= 0.0) {
            return Err(Error::InvalidFilippovParams(format!(
                "kappa0 = {kappa0}, kappa1 = {kappa1}"
            )));
        }
        Self::new(kappa0 + kappa1, kappa2, dinf)
    }

    /// Energy of the two-particle system in its zero-momentum frame.
    pub fn energy(&self, x: f64, v: f64) -> f64 {
        let e = x.abs() - self.dinf;
        0.25 * v * v + 0.25 * self.kappa2 * e * e
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regime {
    Overdamped,
    CriticallyDamped,
    Underdamped,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegimeClass {
    pub regime: Regime,
    /// `γ₂² − 4κ2`.
    pub discriminant: f64,
    /// `√disc` when non-negative.
    pub k: Option<f64>,
    /// `√(κ2 − γ₂²/4)` when the discriminant is negative.
    pub omega: Option<f64>,
}

pub fn classify(p: &F2Params) -> RegimeClass {
    let disc = p.gamma2 * p.gamma2 - 4.0 * p.kappa2;
    if disc > 0.0 {
        RegimeClass {
            regime: Regime::Overdamped,
            discriminant: disc,
            k: Some(disc.sqrt()),
            omega: None,
        }
    } else if disc == 0.0 {
        RegimeClass {
            regime: Regime::CriticallyDamped,
            discriminant: disc,
            k: Some(0.0),
            omega: None,
        }
    } else {
        let omega = (p.kappa2 - 0.25 * p.gamma2 * p.gamma2).sqrt();
        RegimeClass {
            regime: Regime::Underdamped,
            discriminant: disc,
            k: None,
            omega: Some(omega),
        }
    }
}

/// Closed form of `y = x − b·d∞` on one branch, in local time `τ = t − t_start`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "kebab-case")]
pub enum Coefficients {
    /// `y = k1·e^{λ1τ} + k2·e^{λ2τ}`, `λ2 < λ1 < 0`.
    Exponential {
        k1: f64,
        k2: f64,
        lambda1: f64,
        lambda2: f64,
    },
    /// `y = (c1 + c2·τ)·e^{λτ}`.
    Critical { c1: f64, c2: f64, lambda: f64 },
    /// `y = e^{−aτ}(A cos ωτ + B sin ωτ)`.
    Oscillatory {
        a: f64,
        b: f64,
        omega: f64,
        decay: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SegmentSolution {
    pub branch: i8,
    pub equilibrium: f64,
    pub coefficients: Coefficients,
}

impl SegmentSolution {
    /// `(x(τ), ẋ(τ))`.
    pub fn eval(&self, tau: f64) -> (f64, f64) {
        let (y, v) = match self.coefficients {
            Coefficients::Exponential {
                k1,
                k2,
                lambda1,
                lambda2,
            } => {
                let (e1, e2) = ((lambda1 * tau).exp(), (lambda2 * tau).exp());
                (k1 * e1 + k2 * e2, k1 * lambda1 * e1 + k2 * lambda2 * e2)
            }
            Coefficients::Critical { c1, c2, lambda } => {
                let e = (lambda * tau).exp();
                let y = c1 + c2 * tau;
                (y * e, (c2 + lambda * y) * e)
            }
            Coefficients::Oscillatory { a, b, omega, decay } => {
                let e = (-decay * tau).exp();
                let (s, c) = (omega * tau).sin_cos();
                let y = a * c + b * s;
                let dy = (omega * b - decay * a) * c - (omega * a + decay * b) * s;
                (e * y, e * dy)
            }
        };
        (self.equilibrium + y, v)
    }

    /// The strictly positive turning point of a non-oscillatory form, if any.
    fn monotone_critical_point(&self) -> Option<f64> {
        let tau = match self.coefficients {
            Coefficients::Exponential {
                k1,
                k2,
                lambda1,
                lambda2,
            } => {
                let ratio = -(k2 * lambda2) / (k1 * lambda1);
                if !(ratio > 0.0 && ratio.is_finite()) {
                    return None;
                }
                ratio.ln() / (lambda1 - lambda2)
            }
            Coefficients::Critical { c1, c2, lambda } => {
                if c2 == 0.0 {
                    return None;
                }
                -(c2 + lambda * c1) / (lambda * c2)
            }
            Coefficients::Oscillatory { .. } => return None,
        };
        (tau > 0.0 && tau.is_finite()).then_some(tau)
    }
}

/// Exact solution on branch `branch` from `(x0, v0)` at local time zero.
pub fn segment_solution(p: &F2Params, branch: i8, x0: f64, v0: f64) -> SegmentSolution {
    let equilibrium = f64::from(branch) * p.dinf;
    let y0 = x0 - equilibrium;
    let class = classify(p);
    let coefficients = match class.regime {
        Regime::Overdamped => {
            let k = class.k.unwrap_or(0.0);
            // product of the roots is κ2; avoids cancellation in the slow root
            let lambda1 = -2.0 * p.kappa2 / (p.gamma2 + k);
            let lambda2 = -0.5 * (p.gamma2 + k);
            let k1 = (v0 - lambda2 * y0) / (lambda1 - lambda2);
            let k2 = (lambda1 * y0 - v0) / (lambda1 - lambda2);
            Coefficients::Exponential {
                k1,
                k2,
                lambda1,
                lambda2,
            }
        }
        Regime::CriticallyDamped => {
            let lambda = -0.5 * p.gamma2;
            Coefficients::Critical {
                c1: y0,
                c2: v0 - lambda * y0,
                lambda,
            }
        }
        Regime::Underdamped => {
            let omega = class.omega.unwrap_or(0.0);
            let decay = 0.5 * p.gamma2;
            Coefficients::Oscillatory {
                a: y0,
                b: (v0 + decay * y0) / omega,
                omega,
                decay,
            }
        }
    };
    SegmentSolution {
        branch,
        equilibrium,
        coefficients,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub t_start: f64,
    pub t_end: f64,
    pub branch: i8,
    pub x0: f64,
    pub v0: f64,
    pub solution: SegmentSolution,
}

impl Segment {
    pub fn new(p: &F2Params, t_start: f64, t_end: f64, branch: i8, x0: f64, v0: f64) -> Self {
        let solution = segment_solution(p, branch, x0, v0);
        Segment {
            t_start,
            t_end,
            branch,
            x0,
            v0,
            solution,
        }
    }

    /// `(x, ẋ)` at absolute time `t`.
    pub fn eval(&self, t: f64) -> (f64, f64) {
        self.solution.eval(t - self.t_start)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "kebab-case")]
pub enum Event {
    /// Transversal zero of `x` at absolute time `t` with velocity `v`.
    Crossing {
        t: f64,
        v: f64,
    },
    /// No zero of `x` after the segment start, ever.
    Settled,
    OriginHit {
        t: f64,
    },
}

/// First zero of `x` strictly after the segment start.
///
/// The search walks the critical points of `x` in order; `x` is monotone
/// between consecutive ones, so the first interval whose right end has left
/// the branch brackets the first zero. Oscillatory segments stop as soon as
/// the decaying envelope can no longer reach the origin.
pub fn next_event(p: &F2Params, seg: &Segment) -> Result<Event> {
    let sol = &seg.solution;
    let b = f64::from(seg.branch);
    if seg.x0.abs() < ORIGIN_TOL && seg.v0.abs() < ORIGIN_TOL {
        return Ok(Event::OriginHit { t: seg.t_start });
    }
    let Coefficients::Oscillatory {
        a,
        b: bb,
        omega,
        decay,
    } = sol.coefficients
    else {
        // at most one turning point, then a monotone approach to b·d∞ on the branch
        if let Some(tc) = sol.monotone_critical_point() {
            if let Some(ev) = probe(sol, b, seg.t_start, 0.0, tc) {
                return ev;
            }
        }
        return Ok(Event::Settled);
    };

    // ẋ = e^{−aτ}(P cos ωτ + Q sin ωτ) vanishes at ωτ = δ + π/2 + kπ
    let r = a.hypot(bb);
    let delta = (-(omega * a + decay * bb)).atan2(seg.v0);
    let half = PI / omega;
    let mut hi = (delta + 0.5 * PI).rem_euclid(PI) / omega;
    if hi <= 0.0 {
        hi += half;
    }
    let mut lo = 0.0;
    for _ in 0..MAX_CRITICAL_POINTS {
        if r * (-decay * lo).exp() < p.dinf {
            return Ok(Event::Settled);
        }
        if let Some(ev) = probe(sol, b, seg.t_start, lo, hi) {
            return ev;
        }
        lo = hi;
        hi += half;
    }
    Err(Error::RootFindFailure(format!(
        "no zero located after {MAX_CRITICAL_POINTS} turning points from t = {}",
        seg.t_start
    )))
}

/// Looks for the zero of `x` on `(lo, hi]`, where `x` is monotone and
/// `b·x(lo) ≥ 0`. `None` means `x` is still on the branch at `hi`.
fn probe(sol: &SegmentSolution, b: f64, t0: f64, lo: f64, hi: f64) -> Option<Result<Event>> {
    let (x, v) = sol.eval(hi);
    if x.abs() < ORIGIN_TOL && v.abs() < ORIGIN_TOL {
        return Some(Ok(Event::OriginHit { t: t0 + hi }));
    }
    if b * x > 0.0 {
        return None;
    }
    Some(bisect(sol, b, lo, hi).map(|tau| {
        let (_, v) = sol.eval(tau);
        if v.abs() < ORIGIN_TOL {
            Event::OriginHit { t: t0 + tau }
        } else {
            Event::Crossing { t: t0 + tau, v }
        }
    }))
}

/// Bisection on `b·x(τ)`, positive at `lo` and non-positive at `hi`.
fn bisect(sol: &SegmentSolution, b: f64, mut lo: f64, mut hi: f64) -> Result<f64> {
    if !(lo < hi) {
        return Err(Error::RootFindFailure(format!(
            "empty bracket [{lo}, {hi}]"
        )));
    }
    for _ in 0..400 {
        if hi - lo <= BISECT_REL * hi.abs().max(f64::MIN_POSITIVE) {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if b * sol.eval(mid).0 > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(hi)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "kebab-case")]
pub enum Verdict {
    /// No further collision is possible; `|x| → d∞` on the final branch.
    ConvergedTo { limit: f64 },
    /// The state reached `(0, 0)` at `time`; continuation is not unique.
    OriginHitIllPosed { time: f64 },
    /// `t_max` came before either outcome could be established.
    HorizonReached,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FilippovResult {
    pub params: F2Params,
    pub regime: RegimeClass,
    pub t_max: f64,
    pub segments: Vec<Segment>,
    pub collision_times: Vec<f64>,
    pub collision_velocities: Vec<f64>,
    pub verdict: Verdict,
}

impl FilippovResult {
    /// `(x, ẋ)` at time `t`, clamped to the solved interval.
    pub fn state_at(&self, t: f64) -> (f64, f64) {
        let Some(first) = self.segments.first() else {
            return (0.0, 0.0);
        };
        let k = self.segments.partition_point(|s| s.t_end < t);
        let seg = self
            .segments
            .get(k)
            .unwrap_or(self.segments.last().unwrap_or(first));
        seg.eval(t.clamp(seg.t_start, seg.t_end))
    }

    /// End time of the solved interval.
    pub fn t_final(&self) -> f64 {
        self.segments.last().map_or(0.0, |s| s.t_end)
    }

    /// `samples` evenly spaced rows `(t, x, v, E)` over `[0, t_final]`.
    pub fn sample(&self, samples: usize) -> Vec<[f64; 4]> {
        let tf = self.t_final();
        let m = samples.max(2);
        (0..m)
            .map(|k| {
                let t = tf * k as f64 / (m - 1) as f64;
                let (x, v) = self.state_at(t);
                [t, x, v, self.params.energy(x, v)]
            })
            .collect()
    }
}

/// Concatenates closed-form segments from `(x0, v0)` until the trajectory
/// settles, hits the origin, or reaches `t_max`.
pub fn solve_filippov(p: &F2Params, x0: f64, v0: f64, t_max: f64) -> Result<FilippovResult> {
    if !(t_max.is_finite() && t_max > 0.0) {
        return Err(Error::InvalidHorizon(t_max));
    }
    if !(x0.is_finite() && v0.is_finite()) {
        return Err(Error::NonFinite("initial relative state"));
    }
    let mut res = FilippovResult {
        params: *p,
        regime: classify(p),
        t_max,
        segments: Vec::new(),
        collision_times: Vec::new(),
        collision_velocities: Vec::new(),
        verdict: Verdict::HorizonReached,
    };
    if x0.abs() < ORIGIN_TOL && v0.abs() < ORIGIN_TOL {
        res.verdict = Verdict::OriginHitIllPosed { time: 0.0 };
        return Ok(res);
    }

    let mut branch: i8 = if x0 != 0.0 {
        x0.signum() as i8
    } else {
        v0.signum() as i8
    };
    let (mut t, mut x, mut v) = (0.0, x0, v0);
    loop {
        let mut seg = Segment::new(p, t, t_max, branch, x, v);
        match next_event(p, &seg)? {
            Event::Settled => {
                res.segments.push(seg);
                res.verdict = Verdict::ConvergedTo {
                    limit: f64::from(branch) * p.dinf,
                };
                return Ok(res);
            }
            Event::OriginHit { t: hit } if hit <= t_max => {
                seg.t_end = hit;
                res.segments.push(seg);
                res.verdict = Verdict::OriginHitIllPosed { time: hit };
                return Ok(res);
            }
            Event::Crossing { t: tc, v: vc } if tc <= t_max => {
                seg.t_end = tc;
                res.segments.push(seg);
                res.collision_times.push(tc);
                res.collision_velocities.push(vc);
                branch = -branch;
                (t, x, v) = (tc, 0.0, vc);
            }
            _ => {
                res.segments.push(seg);
                return Ok(res);
            }
        }
    }
}

/// Exponential rate at which `|x| − d∞` decays on a collision-free tail.
pub fn decay_envelope(p: &F2Params) -> f64 {
    let class = classify(p);
    match class.k {
        Some(k) => 0.5 * (p.gamma2 - k),
        None => 0.5 * p.gamma2,
    }
}
