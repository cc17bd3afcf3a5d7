mod common;

use bvprop::linalg::C64;
use bvprop::models::{build_anharmonic, build_rotor, build_trap, position_matrix, trap_entry};
use bvprop::operators::{random_unit_state, Bandwidth};
use bvprop::{compress, propagate_pc, PiecewiseConstantControl, StateVector};
use nalgebra::DMatrix;
use proptest::prelude::*;

use common::{quadrature_moment_matrix, rng, trap_moment_oracle};

#[test]
fn position_matrix_matches_quadrature() {
    let oracle = quadrature_moment_matrix(30, 1, 64);
    let x = position_matrix(30);
    for j in 0..30 {
        for k in 0..30 {
            assert!((x[(j, k)] - oracle[(j, k)]).abs() < 1e-10, "({j},{k})");
        }
    }
}

#[test]
fn x_cubed_matches_quadrature() {
    let oracle = quadrature_moment_matrix(20, 3, 64);
    let m = build_anharmonic(2, 3, 20).unwrap();
    assert_eq!(m.coupling.bandwidth(), Bandwidth::Banded(3));
    for j in 0..20 {
        for k in 0..20 {
            let b = m.coupling.entry(j + 1, k + 1);
            assert!((b - C64::new(0.0, -oracle[(j, k)])).norm() < 1e-10, "({j},{k})");
        }
    }
}

#[test]
fn trap_entries_match_quadrature() {
    for lambda in [0.5, 2.0] {
        let oracle = trap_moment_oracle(lambda, 20);
        for j in 0..20 {
            for k in 0..20 {
                assert!((trap_entry(lambda, j, k) - oracle[(j, k)]).abs() < 1e-9 / lambda, "({j},{k})");
            }
        }
    }
}

#[test]
fn couplings_are_skew_hermitian() {
    let models = [
        build_rotor(30).unwrap(),
        build_anharmonic(1, 1, 30).unwrap(),
        build_anharmonic(2, 3, 30).unwrap(),
        build_trap(1.5, 30).unwrap(),
    ];
    for m in &models {
        for (j, k, b) in m.coupling.triplets() {
            assert_eq!(b, -m.coupling.entry(k, j).conj(), "{} ({j},{k})", m.name);
        }
    }
}

#[test]
fn rotor_coupling_norm_is_at_most_one() {
    let m = build_rotor(200).unwrap();
    let sys = compress(&m.drift, &m.coupling, 200).unwrap();
    let b = sys.coupling_matrix();
    let real = DMatrix::from_fn(200, 200, |r, c| b[(r, c)].norm());
    let norm = real.singular_values().max();
    assert!(norm <= 1.0 && norm > 0.999, "{norm}");
    assert!(m.info.norm_b_computed.unwrap() <= 1.0);
    assert_eq!(m.info.norm_b, Some(2f64.sqrt()));
}

#[test]
fn rotor_relative_bound_holds_for_sampled_states() {
    let mut r = rng(23);
    for n in [2, 5, 20, 60] {
        let m = build_rotor(n).unwrap();
        let sys = compress(&m.drift, &m.coupling, n).unwrap();
        for _ in 0..200 {
            let psi = random_unit_state(n, &mut r);
            assert!(sys.coupling_norm(&psi) <= 2f64.sqrt() * sys.homogeneous_norm(&psi, 1.0));
        }
    }
}

#[test]
fn trap_driven_at_its_own_frequency_is_free() {
    let m = build_trap(2.0, 10).unwrap();
    let sys = compress(&m.drift, &m.coupling, 10).unwrap();
    let u = PiecewiseConstantControl::constant(0.0, 1.0).unwrap();
    let traj = propagate_pc(&sys, &u, &StateVector::basis(10, 2).unwrap(), &[1.0]).unwrap();
    let c = traj.final_state().coefficients()[1];
    assert!((c - C64::from_polar(1.0, -5.0 * 2.0)).norm() < 1e-14);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn padded_crop_is_consistent(alpha in 1u32..4, beta in 1u32..6, n in 4usize..30) {
        prop_assume!(2 * alpha >= beta);
        let small = build_anharmonic(alpha, beta, n).unwrap();
        let big = build_anharmonic(alpha, beta, 2 * n).unwrap();
        for (j, k, b) in small.coupling.triplets() {
            prop_assert_eq!(b, big.coupling.entry(j, k));
        }
        // x^β only links levels whose distance has the parity of β.
        let reach = beta.min(n as u32 - 1);
        let band = if (beta - reach) % 2 == 0 { reach } else { reach - 1 };
        prop_assert_eq!(small.coupling.bandwidth(), Bandwidth::Banded(band as usize));
    }
}
