mod common;

use common::{case_a, reference as r};
use goodwin_delay::sim::{
    amplitude_envelope, classify_envelope, oscillation_period, simulate, EnvelopeClass, HistorySpec, SimOptions,
    Trajectory, TrajectoryMeta,
};
use goodwin_delay::{Error, State};
use proptest::prelude::*;

fn run(tau: f64, start: State, t_end: f64) -> Trajectory {
    let pt = case_a();
    simulate(&pt.coeffs, tau, HistorySpec::constant(start), SimOptions::new(t_end)).unwrap()
}

fn figure_start() -> State {
    State::new(0.85, 0.65)
}

fn synthetic(f: impl Fn(f64) -> f64, dt: f64, n: usize) -> Trajectory {
    let times: Vec<f64> = (0..n).map(|i| i as f64 * dt).collect();
    let states: Vec<State> = times.iter().map(|&t| State::new(f(t), 0.5)).collect();
    Trajectory {
        final_time: times[n - 1],
        final_state: states[n - 1],
        times,
        states,
        meta: TrajectoryMeta {
            tau: 0.0,
            step: dt,
            steps_per_delay: None,
            record_every: 1,
            history: HistorySpec::constant(State::new(f(0.0), 0.5)),
            digest: String::new(),
            overflow: false,
        },
    }
}

#[test]
fn default_step_choice() {
    for (tau, m) in [(0.05, 8), (0.03, 8), (1.0, 100), (r::A_TAU0, 8)] {
        let tr = run(tau, figure_start(), 1.0);
        assert_eq!(tr.meta.steps_per_delay, Some(m), "tau {tau}");
        assert!((tr.meta.step * m as f64 - tau).abs() < 1e-15);
    }
    assert_eq!(run(0.0, figure_start(), 1.0).meta.step, 0.01);
}

#[test]
fn coarse_step_is_rejected() {
    let pt = case_a();
    let h = HistorySpec::constant(figure_start());
    let err = simulate(&pt.coeffs, 0.05, h, SimOptions::new(10.0).with_step(0.02)).unwrap_err();
    assert_eq!(err, Error::StepTooLarge { m: 3 });
    assert!(simulate(&pt.coeffs, 0.05, h, SimOptions::new(10.0).with_step(0.0125)).is_ok());
    assert!(simulate(&pt.coeffs, -0.1, h, SimOptions::new(10.0)).is_err());
    assert!(simulate(&pt.coeffs, 0.1, h, SimOptions::new(0.0)).is_err());
}

#[test]
fn equilibrium_history_stays_put() {
    let pt = case_a();
    for tau in [0.0, 0.02, r::A_TAU0, 0.05, 1.0] {
        let tr = run(tau, pt.eq.state(), 100.0);
        let drift = tr.states.iter().map(|s| (*s - pt.eq.state()).norm()).fold(0.0, f64::max);
        assert!(drift < 1e-10, "tau {tau}: drift {drift:e}");
    }
}

#[test]
fn zero_delay_decays_at_the_linear_rate() {
    // eigenvalues of the delay-free linearization have real part −p0/2
    let pt = case_a();
    let tr = run(0.0, figure_start(), 500.0);
    let env = amplitude_envelope(&tr, 50.0).unwrap();
    let (first, last) = (env[0], env[env.len() - 1]);
    let observed = (last.combined() / first.combined()).ln() / (last.t_start - first.t_start);
    let expected = -pt.char().p0 / 2.0;
    assert!((observed / expected - 1.0).abs() < 0.02, "{observed} vs {expected}");
    let dist = (tr.last() - pt.eq.state()).norm();
    assert!(dist < 2e-3, "{dist:e}");
}

#[test]
#[ignore = "a 1e-4 terminal distance needs t > 700 at decay rate p0/2 = 0.0086; t = 500 leaves ~1e-3"]
fn zero_delay_terminal_distance_below_1e_4() {
    let pt = case_a();
    let tr = run(0.0, figure_start(), 500.0);
    assert!((tr.last() - pt.eq.state()).norm() < 1e-4);
}

#[test]
fn regimes_classify() {
    let start = figure_start();
    let class = |tau: f64, t_end: f64| {
        let tr = run(tau, start, t_end);
        classify_envelope(&amplitude_envelope(&tr, t_end / 10.0).unwrap(), 0.02).unwrap()
    };
    assert_eq!(class(0.0, 100.0).0, EnvelopeClass::Decaying);
    assert_eq!(class(0.0, 500.0).0, EnvelopeClass::Decaying);
    let (c, drift) = class(r::A_TAU0, 500.0);
    assert_eq!(c, EnvelopeClass::Sustained, "drift {drift}");
    assert_eq!(class(0.05, 500.0).0, EnvelopeClass::Growing);
}

#[test]
fn late_amplitude_exceeds_early_amplitude_past_tau0() {
    let tr = run(0.05, figure_start(), 500.0);
    let env = amplitude_envelope(&tr, 100.0).unwrap();
    assert_eq!(env.len(), 5);
    assert!(env[4].beta > env[0].beta && env[4].lambda > env[0].lambda);
}

#[test]
fn envelope_non_increasing_below_tau0() {
    let tr = run(0.02, figure_start(), 500.0);
    let env = amplitude_envelope(&tr, 25.0).unwrap();
    for w in env[1..].windows(2) {
        assert!(w[1].combined() <= 1.01 * w[0].combined(), "{:?}", w);
    }
}

#[test]
fn period_matches_crossing_frequency() {
    let pt = case_a();
    let start = State::new(pt.eq.beta_e - 0.05, pt.eq.lambda_e - 0.05);
    let h = HistorySpec::constant(start);
    let coarse = simulate(&pt.coeffs, r::A_TAU0, h, SimOptions::new(500.0)).unwrap();
    let fine = simulate(&pt.coeffs, r::A_TAU0, h, SimOptions::new(500.0).with_step(r::A_TAU0 / 16.0)).unwrap();
    let (pc, pf) = (oscillation_period(&coarse).unwrap(), oscillation_period(&fine).unwrap());
    assert!((pc / r::A_PERIOD - 1.0).abs() < 0.05, "{pc}");
    assert!((pc / pf - 1.0).abs() < 0.005, "{pc} vs {pf}");
}

#[test]
fn synthetic_sinusoid_period() {
    let dt = 0.01;
    let tr = synthetic(|t| (2.0 * std::f64::consts::PI * t / 10.0).sin(), dt, 20001);
    let p = oscillation_period(&tr).unwrap();
    assert!((p - 10.0).abs() <= dt, "{p}");
}

#[test]
fn monotone_decay_has_no_period() {
    let tr = synthetic(|t| (-t).exp(), 0.01, 5000);
    assert!(matches!(oscillation_period(&tr), Err(Error::NoOscillation { .. })));
}

#[test]
fn fourth_order_convergence() {
    let pt = case_a();
    let h = HistorySpec::constant(figure_start());
    let end = |m: usize| {
        simulate(&pt.coeffs, 0.05, h, SimOptions::new(500.0).with_step(0.05 / m as f64).record_every(usize::MAX))
            .unwrap()
            .last()
    };
    let (a, b, reference) = (end(8), end(16), end(32));
    let ratio = (a - reference).norm() / (b - reference).norm();
    assert!((12.0..=20.0).contains(&ratio), "{ratio}");
}

#[test]
fn tiny_delay_approaches_ode() {
    let pt = case_a();
    let h = HistorySpec::constant(figure_start());
    let ode = simulate(&pt.coeffs, 0.0, h, SimOptions::new(100.0).record_every(usize::MAX)).unwrap();
    let dde = simulate(&pt.coeffs, 1e-6, h, SimOptions::new(100.0).with_step(0.25e-6).record_every(usize::MAX)).unwrap();
    assert!((dde.final_time - 100.0).abs() < 1e-6);
    assert!((dde.last() - ode.last()).norm() < 1e-5);
}

#[test]
fn runs_are_bitwise_repeatable() {
    let a = run(0.05, figure_start(), 50.0);
    let b = run(0.05, figure_start(), 50.0);
    assert_eq!(a, b);
}

#[test]
fn final_node_is_tracked_with_sparse_recording() {
    let pt = case_a();
    let h = HistorySpec::constant(figure_start());
    let dense = simulate(&pt.coeffs, 0.05, h, SimOptions::new(10.0)).unwrap();
    let sparse = simulate(&pt.coeffs, 0.05, h, SimOptions::new(10.0).record_every(10)).unwrap();
    assert_eq!(dense.last(), sparse.last());
    assert_eq!(sparse.states.len(), 161);
    assert_eq!(sparse.states[160], dense.states[1600]);
    assert!((sparse.sample_interval() - 0.0625).abs() < 1e-15);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn coordinate_axes_are_invariant(tau in 0.0..0.2f64, x in 0.05..1.5f64, which in 0usize..2) {
        let start = if which == 0 { State::new(0.0, x) } else { State::new(x, 0.0) };
        let tr = run(tau, start, 20.0);
        for s in &tr.states {
            if which == 0 {
                prop_assert_eq!(s.beta, 0.0);
            } else {
                prop_assert_eq!(s.lambda, 0.0);
            }
        }
    }
}
