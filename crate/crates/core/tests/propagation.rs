mod common;

use bvprop::controls::ControlSignal;
use bvprop::linalg::{unitarity_defect, CMatrix, C64};
use bvprop::propagator::{propagate_bv, propagate_pc, step_unitary, BvSchedule, BvStop, Propagator, StateVector};
use bvprop::{build_anharmonic, build_rotor, compress, GalerkinSystem, PiecewiseConstantControl, SampledBVControl};
use proptest::prelude::*;

use common::{expm_taylor, max_abs_entry_diff, random_pc, rng};

fn rotor(n: usize) -> GalerkinSystem {
    let m = build_rotor(n).unwrap();
    compress(&m.drift, &m.coupling, n).unwrap()
}

fn generator(sys: &GalerkinSystem, u: f64, dt: f64) -> CMatrix {
    (sys.drift_matrix() + sys.coupling_matrix() * C64::new(u, 0.0)) * C64::new(dt, 0.0)
}

#[test]
fn two_level_step_matches_series_oracle() {
    let sys = rotor(2);
    let h = sys.hamiltonian(1.0);
    assert!((h[(0, 0)].re - 1.0).abs() < 1e-15 && (h[(1, 1)].re - 4.0).abs() < 1e-15);
    assert!((h[(0, 1)] - C64::new(0.5, 0.0)).norm() < 1e-15);
    let u = step_unitary(&sys, 1.0, 1.0).unwrap();
    let oracle = expm_taylor(&generator(&sys, 1.0, 1.0));
    assert!(max_abs_entry_diff(&u, &oracle) < 1e-13);
}

#[test]
fn dense_path_matches_series_oracle() {
    let m = build_anharmonic(2, 2, 12).unwrap();
    let sys = compress(&m.drift, &m.coupling, 12).unwrap();
    assert!(!sys.hamiltonian_eigen(0.3).unwrap().is_gauged());
    let u = step_unitary(&sys, 0.3, 0.05).unwrap();
    let oracle = expm_taylor(&generator(&sys, 0.3, 0.05));
    assert!(max_abs_entry_diff(&u, &oracle) < 1e-11);
    assert!(unitarity_defect(&u) < 1e-12);
}

#[test]
fn gauged_path_matches_series_oracle() {
    let sys = rotor(25);
    for (u, dt) in [(0.2, 0.3), (-0.5, 1.7)] {
        let got = step_unitary(&sys, u, dt).unwrap();
        let oracle = expm_taylor(&generator(&sys, u, dt));
        // The squaring phase of the oracle loses about one bit per doubling.
        let diff = max_abs_entry_diff(&got, &oracle);
        assert!(diff < 1e-10, "u={u} dt={dt} diff={diff:e}");
    }
}

#[test]
fn sub_splitting_every_interval_changes_nothing() {
    let n = 40;
    let sys = rotor(n);
    let durations = [0.3, 0.5, 0.2, 0.7, 0.4, 0.3, 0.6, 0.2, 0.5, 0.4, 0.3];
    let values = (0..durations.len()).map(|i| if i % 2 == 0 { 0.0 } else { 0.3 }).collect();
    let u = PiecewiseConstantControl::from_durations(&durations, values).unwrap();
    assert_eq!(u.switch_count(), 10);
    let psi0 = StateVector::basis(n, 1).unwrap();
    let exact = Propagator::new(&sys).run(&u, &psi0).unwrap();
    let extra: Vec<f64> = u
        .intervals()
        .flat_map(|(a, b, _)| (1..1000).map(move |i| a + (b - a) * i as f64 / 1000.0))
        .collect();
    let fine = u.refined(&extra);
    assert_eq!(fine.len(), 1000 * u.len());
    let split = Propagator::new(&sys).run(&fine, &psi0).unwrap();
    assert!(exact.distance(&split) < 1e-9, "{}", exact.distance(&split));
}

#[test]
fn unitary_over_long_horizons() {
    let sys = rotor(30);
    let mut r = rng(11);
    for _ in 0..10 {
        let u = random_pc(&mut r, 40, 0.6);
        let psi0 = StateVector::basis(30, 2).unwrap();
        let traj = propagate_pc(&sys, &u, &psi0, u.breakpoints()).unwrap();
        let tol = 1e-10 * (1.0 + u.len() as f64);
        assert!(traj.diagnostics.iter().all(|d| (d.norm - 1.0).abs() <= tol));
    }
}

#[test]
fn cosine_limit_converges() {
    let sys = rotor(20);
    let u = SampledBVControl::cosine(0.1, 3.0, 2.0 * std::f64::consts::PI, 1024).unwrap();
    let psi0 = StateVector::basis(20, 1).unwrap();
    let out = propagate_bv(&sys, &u, &psi0, 1e-8, BvSchedule::default()).unwrap();
    assert_eq!(out.record.stop, BvStop::NativeResolution);
    assert!(out.record.increments.windows(2).all(|w| w[1] < w[0]));
    let json = serde_json::to_value(&out.record).unwrap();
    assert!(json.get("refinements").is_some() && json.get("increments").is_some());
}

#[test]
fn two_approximating_sequences_agree() {
    let sys = rotor(20);
    let u = SampledBVControl::cosine(0.1, 3.0, 2.0 * std::f64::consts::PI, 3072).unwrap();
    let psi0 = StateVector::basis(20, 1).unwrap();
    let tol = 1e-3;
    let a = propagate_bv(&sys, &u, &psi0, tol, BvSchedule { n0: 64, max_refinements: 12 }).unwrap();
    let b = propagate_bv(&sys, &u, &psi0, tol, BvSchedule { n0: 48, max_refinements: 12 }).unwrap();
    assert_eq!(a.record.stop, BvStop::Tolerance);
    assert_eq!(b.record.stop, BvStop::Tolerance);
    assert!(a.state.distance(&b.state) <= 2.0 * tol);
}

#[test]
fn coarse_grid_cannot_be_refined_past_its_resolution() {
    let sys = rotor(10);
    let u = SampledBVControl::from_fn(1.0, 100, None, |t| 0.1 * t).unwrap();
    let psi0 = StateVector::basis(10, 1).unwrap();
    let err = propagate_bv(&sys, &u, &psi0, 1e-14, BvSchedule { n0: 64, max_refinements: 4 }).unwrap_err();
    assert!(matches!(err, bvprop::Error::NoConvergence { .. }));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn cocycle(seed in 0u64..10_000, frac in 0.05f64..0.95) {
        let sys = rotor(24);
        let mut r = rng(seed);
        let u = random_pc(&mut r, 8, 0.6);
        let psi0 = StateVector::uniform_superposition(24, &[1, 3]).unwrap();
        let s = u.duration() * frac;
        let mut p = Propagator::new(&sys);
        let whole = p.run(&u, &psi0).unwrap();
        let head = p.run(&u.truncated(s).unwrap(), &psi0).unwrap();
        let both = p.run(&u.tail_from(s).unwrap(), &head).unwrap();
        prop_assert!(whole.distance(&both) < 1e-12);
    }

    #[test]
    fn time_reversal(seed in 0u64..10_000) {
        let sys = rotor(24);
        let mut r = rng(seed);
        let u = random_pc(&mut r, 10, 0.6);
        let psi0 = StateVector::uniform_superposition(24, &[1, 2, 5]).unwrap();
        let mut p = Propagator::new(&sys);
        let fwd = p.run(&u, &psi0).unwrap();
        let back = p.run_backward(&u, &fwd).unwrap();
        prop_assert!(back.distance(&psi0) < 1e-10);
    }

    #[test]
    fn refinement_independence(seed in 0u64..10_000, cuts in proptest::collection::vec(0.0f64..1.0, 1..6)) {
        let sys = rotor(20);
        let mut r = rng(seed);
        let u = random_pc(&mut r, 6, 0.6);
        let extra: Vec<f64> = cuts.iter().map(|c| c * u.duration()).collect();
        let psi0 = StateVector::basis(20, 1).unwrap();
        let mut p = Propagator::new(&sys);
        let a = p.run(&u, &psi0).unwrap();
        let b = p.run(&u.refined(&extra), &psi0).unwrap();
        prop_assert!(a.distance(&b) < 1e-12);
    }
}
