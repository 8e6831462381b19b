use bondsim_core::filippov::decay_envelope;
use bondsim_core::integrator::Trajectory;
use bondsim_core::{
    builtin, cs_check, energy_balance_residual, fit_decay, simulate, solve_filippov,
    target_from_points, AnyTrajectory, CommWeight, CsState, Error, F2Params, InitialState,
    KuramotoState, ModelKind, ModelParams, Scenario, Verdict,
};
use proptest::prelude::*;

fn km(s: &Scenario) -> Trajectory<KuramotoState> {
    simulate(s).unwrap().as_kuramoto().unwrap().clone()
}

fn cs(s: &Scenario) -> Trajectory<CsState> {
    simulate(s).unwrap().as_cs().unwrap().clone()
}

fn sup_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

#[test]
fn rk4_error_shrinks_with_the_fourth_power() {
    let base = Scenario {
        t_end: 1.0,
        ..builtin("km-5.1").unwrap()
    };
    let end = |dt: f64| {
        let t = km(&Scenario { dt, ..base.clone() });
        let s = t.last().unwrap().clone();
        [s.theta, s.omega].concat()
    };
    let reference = end(0.00125);
    let coarse = sup_diff(&end(0.02), &reference);
    let fine = sup_diff(&end(0.01), &reference);
    assert!(coarse / fine >= 8.0, "ratio {}", coarse / fine);
}

#[test]
fn cs_rk4_error_shrinks_with_the_fourth_power() {
    let base = Scenario {
        t_end: 1.0,
        ..builtin("cs2d-5.2").unwrap()
    };
    let end = |dt: f64| {
        let t = cs(&Scenario { dt, ..base.clone() });
        let s = t.last().unwrap().clone();
        [s.x, s.v].concat()
    };
    let reference = end(0.00125);
    let coarse = sup_diff(&end(0.02), &reference);
    let fine = sup_diff(&end(0.01), &reference);
    assert!(coarse / fine >= 8.0, "ratio {}", coarse / fine);
}

#[test]
fn galilean_boost_shifts_phases_linearly() {
    let base = Scenario {
        t_end: 2.0,
        ..builtin("km-5.1").unwrap()
    };
    let InitialState::Kuramoto(s0) = &base.initial else {
        unreachable!()
    };
    let c = 0.7;
    let boosted = KuramotoState {
        omega: s0.omega.iter().map(|w| w + c).collect(),
        ..s0.clone()
    };
    let a = km(&base);
    let b = km(&Scenario {
        initial: InitialState::Kuramoto(boosted),
        ..base.clone()
    });
    for ((t, sa), sb) in a.times.iter().zip(&a.states).zip(&b.states) {
        for i in 0..sa.n() {
            assert!((sb.theta[i] - sa.theta[i] - c * t).abs() < 1e-9);
            assert!((sb.omega[i] - sa.omega[i] - c).abs() < 1e-9);
        }
    }
}

#[test]
fn momentum_is_conserved_along_runs() {
    let k = km(&builtin("km-5.1").unwrap());
    let s0: f64 = k.states[0].omega.iter().sum();
    assert!(k
        .states
        .iter()
        .all(|s| (s.omega.iter().sum::<f64>() - s0).abs() < 1e-10));

    let c = cs(&builtin("cs1d-5.2").unwrap());
    let v0: f64 = c.states[0].v.iter().sum();
    assert!(c
        .states
        .iter()
        .all(|s| (s.v.iter().sum::<f64>() - v0).abs() < 1e-10));
}

#[test]
fn energy_balance_holds_on_cs1d() {
    let c = cs(&builtin("cs1d-5.2").unwrap());
    let e0 = c.diagnostics[0].energy.total;
    assert!(energy_balance_residual(&c).unwrap() <= 1e-4 * e0);
}

#[test]
fn stride_thins_without_changing_values() {
    let base = Scenario {
        t_end: 1.0,
        ..builtin("cs1d-5.2").unwrap()
    };
    let full = cs(&base);
    let thin = cs(&Scenario { stride: 10, ..base });
    assert_eq!(thin.len(), 11);
    for (k, s) in thin.states.iter().enumerate() {
        assert_eq!(s, &full.states[10 * k]);
    }
}

#[test]
fn first_order_model_matches_constrained_second_order() {
    let theta = vec![0.0, 0.3, 0.5, 1.1, 1.4];
    let nu = vec![0.2, -0.1, 0.4, -0.3, 0.1];
    let kappa0 = 1.5;
    let omega: Vec<f64> = (0..5)
        .map(|i| {
            nu[i]
                + kappa0 / 5.0
                    * (0..5)
                        .map(|j| (theta[j] - theta[i] as f64).sin())
                        .sum::<f64>()
        })
        .collect();
    let target = bondsim_core::target_from_phases(&[0.0, 0.2, 0.4, 0.6, 0.8]).unwrap();
    let common = Scenario {
        model: ModelKind::KuramotoFirstOrder,
        params: ModelParams::new(kappa0, 0.0, 0.0).unwrap(),
        nu: Some(nu),
        target,
        initial: InitialState::Kuramoto(KuramotoState::new(0.0, theta.clone(), omega).unwrap()),
        weight: CommWeight::ConstantOne,
        dt: 1e-3,
        t_end: 3.0,
        stride: 1,
        gap_floor: None,
    };
    let second = Scenario {
        model: ModelKind::KuramotoBond,
        nu: None,
        ..common.clone()
    };
    let (a, b) = (km(&common), km(&second));
    assert_eq!(a.len(), b.len());
    for (x, y) in a.states.iter().zip(&b.states) {
        assert!(sup_diff(&x.theta, &y.theta) <= 1e-6);
        assert!(sup_diff(&x.omega, &y.omega) <= 1e-6);
    }
}

#[test]
fn gap_monitor_stops_a_crossing() {
    let target = bondsim_core::target_from_phases(&[0.0, 1.0]).unwrap();
    let s = Scenario {
        model: ModelKind::KuramotoBond,
        params: ModelParams::new(0.0, 0.0, 0.0).unwrap(),
        nu: None,
        target,
        initial: InitialState::Kuramoto(
            KuramotoState::new(0.0, vec![0.0, 1.0], vec![1.0, -1.0]).unwrap(),
        ),
        weight: CommWeight::ConstantOne,
        dt: 0.01,
        t_end: 2.0,
        stride: 1,
        gap_floor: Some(1e-6),
    };
    let err = simulate(&s).unwrap_err();
    assert!(
        matches!(err.error, Error::GapViolation { i: 0, j: 1, .. }),
        "{:?}",
        err.error
    );
    let partial = err.partial.unwrap();
    let last = *partial.times().last().unwrap();
    assert!((last - 0.5).abs() < 1e-12);

    let unmonitored = simulate(&Scenario {
        gap_floor: None,
        ..s
    })
    .unwrap();
    assert_eq!(unmonitored.len(), 201);
}

#[test]
fn collision_singularity_is_reported() {
    let target = target_from_points(&[vec![0.0], vec![1.0]]).unwrap();
    let s = Scenario {
        model: ModelKind::CsBond,
        params: ModelParams::new(0.0, 0.0, 0.0).unwrap(),
        nu: None,
        target,
        // free flight puts both particles at 0.5 exactly at t = 0.5
        initial: InitialState::Cs(CsState::new(0.0, 1, vec![0.0, 1.0], vec![1.0, -1.0]).unwrap()),
        weight: CommWeight::Algebraic,
        dt: 0.25,
        t_end: 2.0,
        stride: 1,
        gap_floor: None,
    };
    let err = simulate(&s).unwrap_err();
    assert!(
        matches!(err.error, Error::CollisionSingularity(0, 1)),
        "{:?}",
        err.error
    );
}

fn rk4_branch(
    p: &F2Params,
    branch: f64,
    x0: f64,
    v0: f64,
    span: f64,
    dt: f64,
) -> Vec<(f64, f64, f64)> {
    let f = |x: f64, v: f64| (v, -p.gamma2 * v - p.kappa2 * x + branch * p.kappa2 * p.dinf);
    let (mut x, mut v) = (x0, v0);
    let mut out = vec![(0.0, x, v)];
    for k in 1..=(span / dt).round() as usize {
        let (a1, b1) = f(x, v);
        let (a2, b2) = f(x + 0.5 * dt * a1, v + 0.5 * dt * b1);
        let (a3, b3) = f(x + 0.5 * dt * a2, v + 0.5 * dt * b2);
        let (a4, b4) = f(x + dt * a3, v + dt * b3);
        x += dt / 6.0 * (a1 + 2.0 * a2 + 2.0 * a3 + a4);
        v += dt / 6.0 * (b1 + 2.0 * b2 + 2.0 * b3 + b4);
        out.push((k as f64 * dt, x, v));
    }
    out
}

#[test]
fn filippov_first_collision_matches_rk4_oracle() {
    let p = F2Params::from_couplings(0.1, 0.1, 100.0, 1.0).unwrap();
    let r = solve_filippov(&p, 0.1, -5.0, 20.0).unwrap();
    let path = rk4_branch(&p, 1.0, 0.1, -5.0, 0.05, 1e-6);
    let crossing = path
        .windows(2)
        .find(|w| w[0].1 > 0.0 && w[1].1 <= 0.0)
        .unwrap();
    // linear interpolation inside one 1e-6 step
    let (t0, x0, _) = crossing[0];
    let (t1, x1, _) = crossing[1];
    let t_oracle = t0 + (t1 - t0) * x0 / (x0 - x1);
    assert!(
        (r.collision_times[0] - t_oracle).abs() < 1e-9,
        "{} vs {t_oracle}",
        r.collision_times[0]
    );
    assert_eq!(r.collision_times.len(), 1);
    assert_eq!(r.verdict, Verdict::ConvergedTo { limit: -1.0 });
}

#[test]
fn filippov_segments_match_rk4() {
    for (p, x0, v0) in [
        (F2Params::new(0.5, 30.0, 1.5).unwrap(), 2.0, 4.0),
        (F2Params::new(2.0, 1.0, 1.0).unwrap(), -0.3, 5.0),
        (F2Params::new(4.0, 1.0, 0.5).unwrap(), 1.0, -6.0),
    ] {
        let r = solve_filippov(&p, x0, v0, 15.0).unwrap();
        for seg in &r.segments {
            let span = (seg.t_end - seg.t_start).min(1.0);
            for (tau, x, v) in rk4_branch(&p, f64::from(seg.branch), seg.x0, seg.v0, span, 1e-4) {
                let (cx, cv) = seg.eval(seg.t_start + tau);
                assert!(
                    (cx - x).abs() < 1e-9 && (cv - v).abs() < 1e-9,
                    "tau {tau}: ({cx}, {cv}) vs ({x}, {v})"
                );
            }
        }
    }
}

/// Peaks of `||x| − d∞|` between turning points, which follow the envelope.
fn deviation_peaks(
    r: &bondsim_core::FilippovResult,
    d: f64,
    from: f64,
    to: f64,
) -> Vec<(f64, f64)> {
    let n = 20_000;
    let dev: Vec<(f64, f64)> = (0..=n)
        .map(|k| {
            let t = from + (to - from) * k as f64 / n as f64;
            (t, (r.state_at(t).0.abs() - d).abs())
        })
        .collect();
    dev.windows(3)
        .filter(|w| w[1].1 >= w[0].1 && w[1].1 >= w[2].1)
        .map(|w| w[1])
        .collect()
}

#[test]
fn filippov_tail_decays_at_the_envelope_rate() {
    // overdamped: the deviation itself is monotone on the tail
    let p = F2Params::new(3.0, 2.0, 1.0).unwrap();
    let r = solve_filippov(&p, 2.5, 1.0, 30.0).unwrap();
    let series: Vec<(f64, f64)> = (0..=400)
        .map(|k| 5.0 + 15.0 * k as f64 / 400.0)
        .map(|t| (t, r.state_at(t).0 - 1.0))
        .collect();
    let fit = fit_decay(&series, None).unwrap();
    let expected = decay_envelope(&p);
    assert!(
        (fit.rate - expected).abs() <= 0.1 * expected,
        "{} vs {expected}",
        fit.rate
    );

    // underdamped: fit the oscillation peaks
    let p = F2Params::new(0.4, 25.0, 1.0).unwrap();
    let r = solve_filippov(&p, 0.5, 3.0, 40.0).unwrap();
    assert!(matches!(r.verdict, Verdict::ConvergedTo { .. }));
    let peaks = deviation_peaks(
        &r,
        1.0,
        r.collision_times.last().copied().unwrap_or(0.0) + 1.0,
        40.0,
    );
    let fit = fit_decay(&peaks, Some((0.0, 40.0))).unwrap();
    let expected = decay_envelope(&p);
    assert!(
        (fit.rate - expected).abs() <= 0.1 * expected,
        "{} vs {expected}",
        fit.rate
    );
}

#[test]
fn filippov_undamped_pair_keeps_colliding() {
    let p = F2Params::new(0.0, 4.0, 1.0).unwrap();
    let r = solve_filippov(&p, 0.5, 3.0, 20.0).unwrap();
    assert_eq!(r.verdict, Verdict::HorizonReached);
    assert!(r.collision_times.len() > 5);
    let e0 = p.energy(0.5, 3.0);
    for row in r.sample(500) {
        assert!((row[3] - e0).abs() < 1e-9 * e0);
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 12, ..ProptestConfig::default() })]

    #[test]
    fn passing_framework_keeps_gaps_inside_bounds(
        jitter in prop::collection::vec(-0.1..0.1f64, 6),
        vel in prop::collection::vec(-0.1..0.1f64, 6),
    ) {
        let star = vec![vec![0.0, 0.0], vec![2.0, 0.0], vec![1.0, 1.7]];
        let target = target_from_points(&star).unwrap();
        let x: Vec<f64> = star.concat().iter().zip(&jitter).map(|(a, b)| a + b).collect();
        let state = CsState::new(0.0, 2, x, vel).unwrap();
        let params = ModelParams::new(1.0, 1.0, 10.0).unwrap();
        let verdict = cs_check(&state, &params, &target, &CommWeight::Algebraic);
        prop_assume!(verdict.passed);
        let b = verdict.bounds.unwrap();
        let s = Scenario {
            model: ModelKind::CsBond,
            params,
            nu: None,
            target,
            initial: InitialState::Cs(state),
            weight: CommWeight::Algebraic,
            dt: 0.01,
            t_end: 3.0,
            stride: 1,
            gap_floor: Some(1e-6),
        };
        let AnyTrajectory::Cs(t) = simulate(&s).unwrap() else { unreachable!() };
        for d in &t.diagnostics {
            prop_assert!(d.min_gap >= b.lower - 1e-8);
            prop_assert!(d.pos_diam <= b.upper + 1e-8);
        }
        for w in t.diagnostics.windows(2) {
            prop_assert!(w[1].energy.total <= w[0].energy.total + 1e-8);
        }
    }
}
