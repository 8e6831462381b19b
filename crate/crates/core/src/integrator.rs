//! Fixed-step classical Runge-Kutta integration with a pairwise-gap monitor.
//!
//! Diagnostics are taken on grid points only. Grid times are `k·dt`, never
//! accumulated, so the output grid is uniform to the last bit that `k·dt`
//! allows.

use serde::{Deserialize, Serialize};

use crate::cucker_smale::{csbf_accel, CommWeight};
use crate::diagnostics::diameters;
use crate::energy::{cs_energy, km_energy, EnergyReport};
use crate::error::{Error, Result};
use crate::kuramoto::{km1_velocity, kmbf_accel};
use crate::model::{
    validate_scenario, CsState, InitialState, KuramotoState, ModelKind, ModelParams, Scenario,
    TargetMatrix,
};

/// Pairwise geometry shared by both state types.
pub trait AgentState: Clone {
    fn time(&self) -> f64;
    fn agent_count(&self) -> usize;
    /// Phase gap `|θ_i − θ_j|` or distance `r_ij`.
    fn gap(&self, i: usize, j: usize) -> f64;
    /// `|ω_i − ω_j|` or `‖v_i − v_j‖`.
    fn relative_speed(&self, i: usize, j: usize) -> f64;
}

impl AgentState for KuramotoState {
    fn time(&self) -> f64 {
        self.t
    }
    fn agent_count(&self) -> usize {
        self.n()
    }
    fn gap(&self, i: usize, j: usize) -> f64 {
        (self.theta[i] - self.theta[j]).abs()
    }
    fn relative_speed(&self, i: usize, j: usize) -> f64 {
        (self.omega[i] - self.omega[j]).abs()
    }
}

impl AgentState for CsState {
    fn time(&self) -> f64 {
        self.t
    }
    fn agent_count(&self) -> usize {
        self.n()
    }
    fn gap(&self, i: usize, j: usize) -> f64 {
        self.distance(i, j)
    }
    fn relative_speed(&self, i: usize, j: usize) -> f64 {
        crate::model::euclid(self.vel(i), self.vel(j))
    }
}

/// Smallest pairwise gap and the pair attaining it (first in row-major order).
pub fn min_gap<S: AgentState>(state: &S) -> Result<(f64, (usize, usize))> {
    let n = state.agent_count();
    if n < 2 {
        return Err(Error::SingleAgent);
    }
    let mut best = (f64::INFINITY, (0, 1));
    for i in 0..n {
        for j in (i + 1)..n {
            let g = state.gap(i, j);
            if g < best.0 {
                best = (g, (i, j));
            }
        }
    }
    Ok(best)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SampleDiagnostics {
    pub energy: EnergyReport,
    pub min_gap: f64,
    pub min_pair: (usize, usize),
    pub pos_diam: f64,
    pub vel_diam: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory<S> {
    pub times: Vec<f64>,
    pub states: Vec<S>,
    pub diagnostics: Vec<SampleDiagnostics>,
}

impl<S> Trajectory<S> {
    fn empty() -> Self {
        Trajectory {
            times: Vec::new(),
            states: Vec::new(),
            diagnostics: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn last(&self) -> Option<&S> {
        self.states.last()
    }

    /// `(t, y)` pairs of one diagnostic channel, e.g. `|d| d.vel_diam`.
    pub fn series(&self, f: impl Fn(&SampleDiagnostics) -> f64) -> Vec<(f64, f64)> {
        self.times
            .iter()
            .zip(&self.diagnostics)
            .map(|(&t, d)| (t, f(d)))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum AnyTrajectory {
    Kuramoto(Trajectory<KuramotoState>),
    Cs(Trajectory<CsState>),
}

impl AnyTrajectory {
    pub fn len(&self) -> usize {
        match self {
            AnyTrajectory::Kuramoto(t) => t.len(),
            AnyTrajectory::Cs(t) => t.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn times(&self) -> &[f64] {
        match self {
            AnyTrajectory::Kuramoto(t) => &t.times,
            AnyTrajectory::Cs(t) => &t.times,
        }
    }

    pub fn diagnostics(&self) -> &[SampleDiagnostics] {
        match self {
            AnyTrajectory::Kuramoto(t) => &t.diagnostics,
            AnyTrajectory::Cs(t) => &t.diagnostics,
        }
    }

    pub fn as_kuramoto(&self) -> Option<&Trajectory<KuramotoState>> {
        match self {
            AnyTrajectory::Kuramoto(t) => Some(t),
            AnyTrajectory::Cs(_) => None,
        }
    }

    pub fn as_cs(&self) -> Option<&Trajectory<CsState>> {
        match self {
            AnyTrajectory::Cs(t) => Some(t),
            AnyTrajectory::Kuramoto(_) => None,
        }
    }
}

/// A run that stopped early. `partial` holds every sample recorded before
/// the failure, including the offending state when one exists.
#[derive(Debug, Clone, PartialEq)]
pub struct SimError {
    pub error: Error,
    pub partial: Option<AnyTrajectory>,
}

impl std::fmt::Display for SimError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        self.error.fmt(f)
    }
}

impl std::error::Error for SimError {}

impl From<Error> for SimError {
    fn from(error: Error) -> Self {
        SimError {
            error,
            partial: None,
        }
    }
}

/// One classical RK4 step of `ẏ = rhs(y)`.
pub fn rk4_step<F>(y: &[f64], dt: f64, mut rhs: F) -> Result<Vec<f64>>
where
    F: FnMut(&[f64], &mut [f64]) -> Result<()>,
{
    let m = y.len();
    let mut k1 = vec![0.0; m];
    let mut k2 = vec![0.0; m];
    let mut k3 = vec![0.0; m];
    let mut k4 = vec![0.0; m];
    let mut tmp = vec![0.0; m];

    rhs(y, &mut k1)?;
    for i in 0..m {
        tmp[i] = y[i] + 0.5 * dt * k1[i];
    }
    rhs(&tmp, &mut k2)?;
    for i in 0..m {
        tmp[i] = y[i] + 0.5 * dt * k2[i];
    }
    rhs(&tmp, &mut k3)?;
    for i in 0..m {
        tmp[i] = y[i] + dt * k3[i];
    }
    rhs(&tmp, &mut k4)?;
    Ok((0..m)
        .map(|i| y[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
        .collect())
}

/// Flat-vector dynamics for the three supported models.
enum Flow<'a> {
    Bonded {
        params: &'a ModelParams,
        target: &'a TargetMatrix,
    },
    FirstOrder {
        kappa0: f64,
        nu: &'a [f64],
    },
    Flocking {
        dim: usize,
        params: &'a ModelParams,
        target: &'a TargetMatrix,
        weight: &'a CommWeight,
    },
}

impl Flow<'_> {
    fn eval(&self, y: &[f64], dy: &mut [f64]) -> Result<()> {
        match *self {
            Flow::Bonded { params, target } => {
                let n = y.len() / 2;
                let (theta, omega) = y.split_at(n);
                let (dtheta, domega) = dy.split_at_mut(n);
                dtheta.copy_from_slice(omega);
                kmbf_accel(theta, omega, params, target, domega);
                Ok(())
            }
            Flow::FirstOrder { kappa0, nu } => {
                km1_velocity(y, kappa0, nu, dy);
                Ok(())
            }
            Flow::Flocking {
                dim,
                params,
                target,
                weight,
            } => {
                let half = y.len() / 2;
                let (x, v) = y.split_at(half);
                let (dx, dv) = dy.split_at_mut(half);
                dx.copy_from_slice(v);
                csbf_accel(dim, x, v, params, target, weight, dv)
            }
        }
    }
}

/// Advances a Kuramoto state by one RK4 step of the bonded model.
pub fn kmbf_step(
    state: &KuramotoState,
    dt: f64,
    params: &ModelParams,
    target: &TargetMatrix,
) -> Result<KuramotoState> {
    let flow = Flow::Bonded { params, target };
    let y = [state.theta.as_slice(), state.omega.as_slice()].concat();
    let y = rk4_step(&y, dt, |y, dy| flow.eval(y, dy))?;
    let (theta, omega) = y.split_at(state.n());
    Ok(KuramotoState {
        t: state.t + dt,
        theta: theta.to_vec(),
        omega: omega.to_vec(),
    })
}

/// Advances a Cucker-Smale state by one RK4 step.
pub fn csbf_step(
    state: &CsState,
    dt: f64,
    params: &ModelParams,
    target: &TargetMatrix,
    weight: &CommWeight,
) -> Result<CsState> {
    let flow = Flow::Flocking {
        dim: state.dim,
        params,
        target,
        weight,
    };
    let y = [state.x.as_slice(), state.v.as_slice()].concat();
    let y = rk4_step(&y, dt, |y, dy| flow.eval(y, dy))?;
    let (x, v) = y.split_at(state.x.len());
    Ok(CsState {
        t: state.t + dt,
        dim: state.dim,
        x: x.to_vec(),
        v: v.to_vec(),
    })
}

fn sample_diagnostics<S: AgentState>(state: &S, energy: EnergyReport) -> Result<SampleDiagnostics> {
    let (min_gap, min_pair) = min_gap(state)?;
    let (pos_diam, vel_diam) = diameters(state)?;
    Ok(SampleDiagnostics {
        energy,
        min_gap,
        min_pair,
        pos_diam,
        vel_diam,
    })
}

type EnergyFn<'a, S> = Box<dyn Fn(&S) -> Result<EnergyReport> + 'a>;

struct Recorder<'a, S> {
    traj: Trajectory<S>,
    energy: EnergyFn<'a, S>,
}

impl<S: AgentState> Recorder<'_, S> {
    fn push(&mut self, state: S) -> Result<()> {
        let e = (self.energy)(&state)?;
        let d = sample_diagnostics(&state, e)?;
        self.traj.times.push(state.time());
        self.traj.states.push(state);
        self.traj.diagnostics.push(d);
        Ok(())
    }
}

fn check_gap<S: AgentState>(state: &S, floor: Option<f64>) -> Result<()> {
    if let Some(floor) = floor {
        let (gap, (i, j)) = min_gap(state)?;
        if gap < floor {
            return Err(Error::GapViolation {
                i,
                j,
                t: state.time(),
                gap,
            });
        }
    }
    Ok(())
}

/// Integrates a validated scenario from `t = 0` to `t_end` on the grid `k·dt`.
pub fn simulate(s: &Scenario) -> std::result::Result<AnyTrajectory, SimError> {
    validate_scenario(s)?;
    let steps = (s.t_end / s.dt).round().max(1.0) as usize;
    match &s.initial {
        InitialState::Kuramoto(init) => {
            let first_order = s.model == ModelKind::KuramotoFirstOrder;
            let nu = s.nu.clone().unwrap_or_else(|| vec![0.0; init.n()]);
            let flow = if first_order {
                Flow::FirstOrder {
                    kappa0: s.params.kappa0,
                    nu: &nu,
                }
            } else {
                Flow::Bonded {
                    params: &s.params,
                    target: &s.target,
                }
            };
            let n = init.n();
            let to_state = |t: f64, y: &[f64]| -> KuramotoState {
                if first_order {
                    let mut omega = vec![0.0; n];
                    km1_velocity(y, s.params.kappa0, &nu, &mut omega);
                    KuramotoState {
                        t,
                        theta: y.to_vec(),
                        omega,
                    }
                } else {
                    KuramotoState {
                        t,
                        theta: y[..n].to_vec(),
                        omega: y[n..].to_vec(),
                    }
                }
            };
            let y0 = if first_order {
                init.theta.clone()
            } else {
                [init.theta.as_slice(), init.omega.as_slice()].concat()
            };
            let rec = Recorder {
                traj: Trajectory::empty(),
                energy: Box::new(|st: &KuramotoState| km_energy(st, &s.params, &s.target)),
            };
            run(s, steps, y0, &flow, to_state, rec)
                .map_err(|(error, t)| SimError {
                    error,
                    partial: Some(AnyTrajectory::Kuramoto(t)),
                })
                .map(AnyTrajectory::Kuramoto)
        }
        InitialState::Cs(init) => {
            let flow = Flow::Flocking {
                dim: init.dim,
                params: &s.params,
                target: &s.target,
                weight: &s.weight,
            };
            let half = init.x.len();
            let dim = init.dim;
            let to_state = |t: f64, y: &[f64]| CsState {
                t,
                dim,
                x: y[..half].to_vec(),
                v: y[half..].to_vec(),
            };
            let y0 = [init.x.as_slice(), init.v.as_slice()].concat();
            let rec = Recorder {
                traj: Trajectory::empty(),
                energy: Box::new(|st: &CsState| cs_energy(st, &s.params, &s.target, &s.weight)),
            };
            run(s, steps, y0, &flow, to_state, rec)
                .map_err(|(error, t)| SimError {
                    error,
                    partial: Some(AnyTrajectory::Cs(t)),
                })
                .map(AnyTrajectory::Cs)
        }
    }
}

fn run<S: AgentState>(
    s: &Scenario,
    steps: usize,
    mut y: Vec<f64>,
    flow: &Flow<'_>,
    to_state: impl Fn(f64, &[f64]) -> S,
    mut rec: Recorder<'_, S>,
) -> std::result::Result<Trajectory<S>, (Error, Trajectory<S>)> {
    let first = to_state(0.0, &y);
    if let Err(e) = check_gap(&first, s.gap_floor) {
        return Err((e, rec.traj));
    }
    if let Err(e) = rec.push(first) {
        return Err((e, rec.traj));
    }
    for k in 1..=steps {
        y = match rk4_step(&y, s.dt, |y, dy| flow.eval(y, dy)) {
            Ok(next) => next,
            Err(e) => return Err((e, rec.traj)),
        };
        if y.iter().any(|c| !c.is_finite()) {
            return Err((Error::NonFinite("integrated state"), rec.traj));
        }
        let state = to_state(k as f64 * s.dt, &y);
        if let Err(e) = check_gap(&state, s.gap_floor) {
            // keep the offending state for post-mortem when its diagnostics exist
            let _ = rec.push(state);
            return Err((e, rec.traj));
        }
        if k % s.stride == 0 {
            if let Err(e) = rec.push(state) {
                return Err((e, rec.traj));
            }
        }
    }
    Ok(rec.traj)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{target_from_phases, DEFAULT_GAP_FLOOR};

    #[test]
    fn rk4_scalar_decay() {
        let y = rk4_step(&[1.0], 0.1, |y, dy| {
            dy[0] = -y[0];
            Ok(())
        })
        .unwrap();
        // 1 - h + h²/2 - h³/6 + h⁴/24 at h = 0.1
        let expect = 1.0 - 0.1 + 0.005 - 0.001 / 6.0 + 0.0001 / 24.0;
        assert!((y[0] - expect).abs() < 1e-15);
        assert!((y[0] - 0.9048375).abs() < 1e-7);
    }

    #[test]
    fn rk4_propagates_rhs_errors() {
        let r = rk4_step(&[0.0], 0.1, |_, _| Err(Error::CollisionSingularity(0, 1)));
        assert_eq!(r, Err(Error::CollisionSingularity(0, 1)));
    }

    #[test]
    fn equilibrium_is_fixed() {
        let target = target_from_phases(&[0.0, 0.5, 1.25]).unwrap();
        let p = ModelParams::new(1.0, 5.0, 10.0).unwrap();
        let s = KuramotoState::new(0.0, vec![0.25, 0.75, 1.5], vec![0.0; 3]).unwrap();
        let next = kmbf_step(&s, 0.01, &p, &target).unwrap();
        assert_eq!(next.omega, s.omega);
        assert_eq!(next.theta, s.theta);

        let t = TargetMatrix::new(2, vec![0.0, 2.0, 2.0, 0.0]).unwrap();
        let c = CsState::new(0.0, 1, vec![-1.0, 1.0], vec![0.0, 0.0]).unwrap();
        let next = csbf_step(&c, 0.01, &p, &t, &CommWeight::Algebraic).unwrap();
        assert_eq!(next.x, c.x);
        assert_eq!(next.v, c.v);
    }

    #[test]
    fn min_gap_cases() {
        let s = KuramotoState::new(0.0, vec![0.0, 1.0, 3.0], vec![0.0; 3]).unwrap();
        assert_eq!(min_gap(&s).unwrap(), (1.0, (0, 1)));
        let s = KuramotoState::new(0.0, vec![0.0], vec![0.0]).unwrap();
        assert_eq!(min_gap(&s), Err(Error::SingleAgent));
    }

    fn pair_scenario(x: Vec<f64>) -> Scenario {
        Scenario {
            model: ModelKind::CsBond,
            params: ModelParams::new(1.0, 1.0, 1.0).unwrap(),
            nu: None,
            target: TargetMatrix::new(2, vec![0.0, 1.0, 1.0, 0.0]).unwrap(),
            initial: InitialState::Cs(CsState::new(0.0, 2, x, vec![0.0; 4]).unwrap()),
            weight: CommWeight::Algebraic,
            dt: 0.01,
            t_end: 0.1,
            stride: 1,
            gap_floor: Some(DEFAULT_GAP_FLOOR),
        }
    }

    #[test]
    fn coincident_start_fails_before_first_step() {
        let err = simulate(&pair_scenario(vec![0.5, 0.5, 0.5, 0.5])).unwrap_err();
        assert!(matches!(err.error, Error::GapViolation { i: 0, j: 1, .. }));
        assert_eq!(err.partial.unwrap().len(), 0);

        let mut s = pair_scenario(vec![0.5, 0.5, 0.5, 0.5]);
        s.gap_floor = None;
        let err = simulate(&s).unwrap_err();
        assert_eq!(err.error, Error::CollisionSingularity(0, 1));
    }

    #[test]
    fn stride_thins_output_only() {
        let mut s = pair_scenario(vec![0.0, 0.0, 2.0, 0.0]);
        s.t_end = 1.0;
        let full = simulate(&s).unwrap();
        s.stride = 5;
        let thin = simulate(&s).unwrap();
        assert_eq!(full.len(), 101);
        assert_eq!(thin.len(), 21);
        let (f, t) = (full.as_cs().unwrap(), thin.as_cs().unwrap());
        for (k, st) in t.states.iter().enumerate() {
            assert_eq!(st, &f.states[5 * k]);
        }
    }

    #[test]
    fn invalid_scenario_is_rejected() {
        let mut s = pair_scenario(vec![0.0, 0.0, 2.0, 0.0]);
        s.dt = 0.0;
        assert_eq!(simulate(&s).unwrap_err().error, Error::InvalidStep(0.0));
    }
}
