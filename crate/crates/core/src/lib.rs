//! Bonded Kuramoto oscillators and bonded Cucker-Smale flocks.
//!
//! Both models add a feedback force that pulls every pairwise gap toward a
//! prescribed target. The crate provides the right-hand sides, fixed-step
//! RK4 trajectories with energy bookkeeping, the a-priori checks that
//! guarantee collision avoidance and synchronization/flocking, and an exact
//! piecewise solver for the two-particle system on a line.

// `!(a < b)` is used on purpose so that NaN fails the test.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod builtin;
pub mod cucker_smale;
pub mod diagnostics;
pub mod energy;
pub mod error;
pub mod filippov;
pub mod framework;
pub mod integrator;
pub mod kuramoto;
pub mod model;
pub mod scenario;
pub mod series;

pub use builtin::builtin;
pub use cucker_smale::{csbf_rhs, psi_eval, CommWeight};
pub use diagnostics::{diameters, fit_decay, target_error, DecayFit};
pub use energy::{cs_energy, energy_balance_residual, km_energy, EnergyReport};
pub use error::{Error, Result};
pub use filippov::{solve_filippov, F2Params, FilippovResult, Verdict};
pub use framework::{cs_bounds, cs_check, km_bounds, km_check, BoundsReport, FrameworkVerdict};
pub use integrator::{min_gap, rk4_step, simulate, AnyTrajectory, SimError, Trajectory};
pub use kuramoto::{km1_rhs, kmbf_rhs, Km1Params};
pub use model::{
    target_from_phases, target_from_points, validate_scenario, CsState, InitialState,
    KuramotoState, ModelKind, ModelParams, Scenario, TargetMatrix,
};
pub use scenario::{emit_scenario, parse_scenario};
pub use series::{write_series, SeriesFormat};
