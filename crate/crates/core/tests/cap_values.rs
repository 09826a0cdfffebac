//! Frozen cap eigenvalues and structural properties of the radial solver.

use std::f64::consts::PI;

use proptest::prelude::*;
use sphere_neumann::cap_spectrum::{mu1_cap, solve_mode, CapProblem};
use sphere_neumann::stereographic::{cap_volume, equivalent_radius, s_from_theta, theta_from_s};

// Values derived from the shooting solver and cross-checked against an
// independent finite-difference discretization with Richardson extrapolation.
const S2: [(f64, f64); 4] =
    [(PI / 6.0, 12.851483063440524), (PI / 4.0, 6.0), (PI / 3.0, 3.622974341913582), (PI / 2.0, 2.0)];
const S3: [(f64, f64); 4] =
    [(PI / 6.0, 16.740083154872607), (PI / 4.0, 8.0), (PI / 3.0, 4.987776090990969), (PI / 2.0, 3.0)];

#[test]
fn frozen_first_eigenvalues() {
    for (dim, table) in [(2, S2), (3, S3)] {
        for (gamma, expected) in table {
            let mu = mu1_cap(dim, gamma).unwrap().value;
            assert!((mu - expected).abs() < 1e-9 * expected, "dim {dim} gamma {gamma}: {mu} vs {expected}");
        }
    }
}

#[test]
fn hemisphere_higher_modes_are_spherical_harmonics() {
    // harmonics of degree n with n - l even survive the Neumann condition at the equator
    for dim in [2usize, 3] {
        let d = (dim - 1) as f64;
        let l1 = solve_mode(&CapProblem::new(dim, PI / 2.0, 1).unwrap(), 3).unwrap();
        for (pair, n) in l1.iter().zip([1.0, 3.0, 5.0]) {
            assert!((pair.mu - n * (n + d)).abs() < 1e-8, "dim {dim}: {} vs {}", pair.mu, n * (n + d));
        }
        let l0 = solve_mode(&CapProblem::new(dim, PI / 2.0, 0).unwrap(), 3).unwrap();
        for (pair, n) in l0.iter().zip([0.0, 2.0, 4.0]) {
            assert!((pair.mu - n * (n + d)).abs() < 1e-8, "dim {dim}: {} vs {}", pair.mu, n * (n + d));
        }
    }
}

#[test]
fn bad_inputs_are_rejected() {
    assert!(CapProblem::new(1, 1.0, 1).is_err());
    assert!(CapProblem::new(2, 0.0, 1).is_err());
    assert!(CapProblem::new(2, 2.0, 1).is_err());
    assert!(mu1_cap(2, f64::NAN).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn mu1_decreases_and_stays_above_dim(dim in 2usize..=3, a in 0.2f64..1.5, d in 0.01f64..0.05) {
        let lo = mu1_cap(dim, a).unwrap().value;
        let hi = mu1_cap(dim, a + d).unwrap().value;
        prop_assert!(hi < lo);
        prop_assert!(hi > dim as f64);
    }

    #[test]
    fn cap_radius_round_trips_through_volume(dim in 2usize..=3, gamma in 0.05f64..1.55) {
        let v = cap_volume(dim, gamma).unwrap();
        let back = equivalent_radius(dim, &v).unwrap();
        prop_assert!((back - gamma).abs() < 1e-10);
    }

    #[test]
    fn chart_radius_round_trips(theta in 0.0f64..PI / 2.0) {
        prop_assert!((theta_from_s(s_from_theta(theta)) - theta).abs() < 1e-14);
    }
}
