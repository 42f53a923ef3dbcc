mod common;

use common::{alpha_grid, down_spec, up_spec};
use proptest::prelude::*;
use updown::levy::psi_two;

proptest! {
    #[test]
    fn exponents_vanish_at_zero(up in up_spec(), down in down_spec()) {
        prop_assert_eq!(up.phi(0.0).unwrap(), 0.0);
        prop_assert_eq!(down.eta(0.0).unwrap(), 0.0);
    }

    #[test]
    fn phi_is_convex(up in up_spec(), grid in alpha_grid()) {
        for (i, &a) in grid.iter().enumerate() {
            for &b in &grid[i + 1..] {
                let mid = up.phi((a + b) / 2.0).unwrap();
                let chord = (up.phi(a).unwrap() + up.phi(b).unwrap()) / 2.0;
                prop_assert!(mid <= chord + 1e-12, "a={a} b={b} mid={mid} chord={chord}");
            }
        }
    }

    #[test]
    fn eta_is_concave_and_nondecreasing(down in down_spec(), grid in alpha_grid()) {
        for (i, &a) in grid.iter().enumerate() {
            for &b in &grid[i + 1..] {
                let mid = down.eta((a + b) / 2.0).unwrap();
                let chord = (down.eta(a).unwrap() + down.eta(b).unwrap()) / 2.0;
                prop_assert!(mid >= chord - 1e-12);
                prop_assert!(down.eta(b).unwrap() >= down.eta(a).unwrap());
            }
        }
    }

    #[test]
    fn psi_two_boundaries(up in up_spec(), down in down_spec(), g in 0.0f64..10.0) {
        prop_assert!((psi_two(&up, &down, g, 0.0).unwrap() - up.phi(g).unwrap()).abs() <= 1e-12);
        prop_assert!((psi_two(&up, &down, 0.0, g).unwrap() + down.eta(g).unwrap()).abs() <= 1e-12);
        prop_assert_eq!(psi_two(&up, &down, 0.0, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn transforms_are_proper_and_monotone(up in up_spec(), down in down_spec(), grid in alpha_grid()) {
        let mut prev = (f64::INFINITY, f64::INFINITY);
        for &a in &grid {
            let pk = if up.is_stable() { up.pk_lst(a).unwrap() } else { 1.0 };
            let ex = down.excess_lst(a).unwrap();
            prop_assert!(pk > 0.0 && pk <= 1.0 && ex > 0.0 && ex <= 1.0, "a={a} pk={pk} ex={ex}");
            prop_assert!(pk <= prev.0 + 1e-15 && ex <= prev.1 + 1e-15);
            prev = (pk, ex);
        }
    }

    #[test]
    fn derivatives_at_zero_match_finite_differences(up in up_spec(), down in down_spec()) {
        let h = 1e-6;
        let fd_phi = up.phi(h).unwrap() / h;
        prop_assert!((fd_phi - up.phi_prime0()).abs() <= 1e-4 * up.phi_prime0().abs().max(1.0));
        let fd_eta = down.eta(h).unwrap() / h;
        prop_assert!((fd_eta - down.eta_prime0()).abs() <= 1e-4 * down.eta_prime0().abs().max(1.0));
    }
}
