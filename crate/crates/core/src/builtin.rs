//! Reference scenarios shipped with the library.
//!
//! * `km-5.1`: ten bonded Kuramoto oscillators settling onto a three-cluster
//!   phase layout. Initial frequencies are the first-order Kuramoto
//!   velocities at `Θ⁰` with `κ0 = 1`, `ν = 0`, which sum to zero.
//! * `cs2d-5.2`: ten planar Cucker-Smale particles forming two concentric
//!   pentagons of radii 3 and 1.
//! * `cs1d-5.2`: ten particles on a line settling onto a fixed spacing.

use crate::cucker_smale::CommWeight;
use crate::error::{Error, Result};
use crate::kuramoto::{constrained_initial_frequencies, Km1Params};
use crate::model::{
    target_from_phases, target_from_points, CsState, InitialState, KuramotoState, ModelKind,
    ModelParams, Scenario, DEFAULT_GAP_FLOOR,
};

pub const BUILTIN_NAMES: [&str; 3] = ["km-5.1", "cs2d-5.2", "cs1d-5.2"];

const KM_THETA0: [f64; 10] = [
    0.1979, 0.2580, 0.2601, 0.4231, 0.4635, 0.5011, 0.5947, 0.8710, 0.9262, 0.9722,
];

const CS2D_X0: [[f64; 2]; 10] = [
    [2.9415, 1.0133],
    [-0.1868, 3.0893],
    [-2.8378, 0.6900],
    [-1.8895, -2.4844],
    [1.9088, -2.3172],
    [0.4133, 0.9212],
    [-0.4425, 0.7271],
    [-0.8685, -0.5283],
    [-0.0589, -0.9098],
    [1.0304, -0.2013],
];

const CS2D_V0: [[f64; 2]; 10] = [
    [0.0100, -0.1275],
    [0.0874, 0.2318],
    [0.0192, 0.1613],
    [0.0450, 0.0151],
    [0.0099, -0.0733],
    [0.0301, -0.1290],
    [-0.1415, -0.1233],
    [-0.2134, 0.1876],
    [0.0256, -0.0149],
    [0.1278, -0.1280],
];

const CS1D_X0: [f64; 10] = [
    -29.5926, -16.5471, -8.9365, -3.5433, -0.6838, 1.0488, 4.1392, 9.2734, 17.4788, 30.4824,
];
const CS1D_TARGET: [f64; 10] = [-30.0, -17.0, -9.0, -4.0, -1.0, 1.0, 4.0, 9.0, 17.0, 30.0];

/// Target phases in degrees: three clusters at 0, 12.5 and 40 degrees with
/// in-cluster steps of 3.5, 4 and 5 degrees.
fn km_target_degrees() -> Vec<f64> {
    (1..=10)
        .map(|i| match i {
            1..=3 => 3.5 * (i - 1) as f64,
            4..=7 => 12.5 + 4.0 * (i - 4) as f64,
            _ => 40.0 + 5.0 * (i - 8) as f64,
        })
        .collect()
}

/// Outer pentagon of radius 3 at 18° + 72°k, inner of radius 1 at 54° + 72°k.
pub fn cs2d_target_points() -> Vec<Vec<f64>> {
    (1..=10)
        .map(|i| {
            let (r, deg) = if i <= 5 {
                (3.0, 18.0 + 72.0 * (i - 1) as f64)
            } else {
                (1.0, 54.0 + 72.0 * (i - 1) as f64)
            };
            let a = f64::to_radians(deg);
            vec![r * a.cos(), r * a.sin()]
        })
        .collect()
}

fn km51() -> Result<Scenario> {
    let theta = KM_THETA0.to_vec();
    let target = target_from_phases(
        &km_target_degrees()
            .into_iter()
            .map(f64::to_radians)
            .collect::<Vec<_>>(),
    )?;
    let omega = constrained_initial_frequencies(
        &theta,
        &Km1Params {
            kappa0: 1.0,
            nu: vec![0.0; 10],
        },
    )?;
    Ok(Scenario {
        model: ModelKind::KuramotoBond,
        params: ModelParams::new(1.0, 5.0, 10.0)?,
        nu: None,
        target,
        initial: InitialState::Kuramoto(KuramotoState::new(0.0, theta, omega)?),
        weight: CommWeight::ConstantOne,
        dt: 1e-2,
        t_end: 5.0,
        stride: 1,
        gap_floor: Some(DEFAULT_GAP_FLOOR),
    })
}

fn cs2d() -> Result<Scenario> {
    let x: Vec<f64> = CS2D_X0.iter().flatten().copied().collect();
    let v: Vec<f64> = CS2D_V0.iter().flatten().copied().collect();
    Ok(Scenario {
        model: ModelKind::CsBond,
        params: ModelParams::new(1.0, 5.0, 10.0)?,
        nu: None,
        target: target_from_points(&cs2d_target_points())?,
        initial: InitialState::Cs(CsState::new(0.0, 2, x, v)?),
        weight: CommWeight::Algebraic,
        dt: 1e-2,
        t_end: 10.0,
        stride: 1,
        gap_floor: Some(DEFAULT_GAP_FLOOR),
    })
}

fn cs1d() -> Result<Scenario> {
    let points: Vec<Vec<f64>> = CS1D_TARGET.iter().map(|&p| vec![p]).collect();
    Ok(Scenario {
        model: ModelKind::CsBond,
        params: ModelParams::new(1.0, 1.0, 40.0)?,
        nu: None,
        target: target_from_points(&points)?,
        initial: InitialState::Cs(CsState::new(0.0, 1, CS1D_X0.to_vec(), vec![0.0; 10])?),
        weight: CommWeight::Algebraic,
        dt: 1e-2,
        t_end: 10.0,
        stride: 1,
        gap_floor: Some(DEFAULT_GAP_FLOOR),
    })
}

pub fn builtin(name: &str) -> Result<Scenario> {
    match name {
        "km-5.1" => km51(),
        "cs2d-5.2" => cs2d(),
        "cs1d-5.2" => cs1d(),
        _ => Err(Error::UnknownScenario(name.to_string())),
    }
}
