mod common;

use common::{alpha_grid, down_spec, stable_linear_up};
use proptest::prelude::*;
use updown::decomposition::{corollary_identity, decomp_rhs, identity_residual, rv_form_check, DecompositionInputs};
use updown::estimators::{LstEstimate, SampleBasis};
use updown::levy::{DownProcessSpec, UpProcessSpec};

/// A valid W_d table: a proper nonincreasing transform on the grid.
fn wd_table(grid: &[f64], rate: f64) -> LstEstimate {
    LstEstimate {
        alphas: grid.to_vec(),
        values: grid.iter().map(|a| rate / (rate + a)).collect(),
        std_errors: vec![0.0; grid.len()],
        basis: SampleBasis::DownConditional,
    }
}

fn inputs(up: UpProcessSpec, down: DownProcessSpec, frac: f64, grid: &[f64], rate: f64) -> DecompositionInputs {
    let bound = up.phi_prime0() / (up.phi_prime0() + down.eta_prime0());
    DecompositionInputs::new(up, down, frac * bound, 0.0, wd_table(grid, rate)).unwrap()
}

proptest! {
    #[test]
    fn rhs_is_one_at_zero_and_nonincreasing(
        up in stable_linear_up(), down in down_spec(), frac in 0.0f64..=1.0,
        grid in alpha_grid(), rate in 0.2f64..5.0,
    ) {
        let inp = inputs(up, down, frac, &grid, rate);
        prop_assert!((decomp_rhs(0.0, &inp).unwrap() - 1.0).abs() <= 1e-15);
        let mut prev = f64::INFINITY;
        for &a in &grid {
            let v = decomp_rhs(a, &inp).unwrap();
            prop_assert!(v <= prev + 1e-12, "a={a}: {v} > {prev}");
            prev = v;
        }
    }

    #[test]
    fn identity_and_rv_form_agree(
        up in stable_linear_up(), down in down_spec(), frac in 0.0f64..=1.0,
        grid in alpha_grid(), rate in 0.2f64..5.0, w in 0.01f64..1.0,
    ) {
        let inp = inputs(up, down, frac, &grid, rate);
        for &a in grid.iter().filter(|&&a| a > 0.0) {
            let scaled = identity_residual(a, &inp, w).unwrap() / up.phi(a).unwrap();
            prop_assert!((scaled - rv_form_check(a, &inp, w).unwrap()).abs() <= 1e-10);
        }
    }

    #[test]
    fn boundary_collapse(up in stable_linear_up(), down in down_spec(), grid in alpha_grid(), rate in 0.2f64..5.0) {
        let inp = inputs(up, down, 1.0, &grid, rate);
        prop_assert!(inp.pi_ell().abs() <= 1e-12);
        for (i, &a) in grid.iter().enumerate() {
            let pk = up.pk_lst(a).unwrap();
            let ex = down.excess_lst(a).unwrap();
            let expect = (1.0 - inp.pi() + inp.pi() * ex * pk) * inp.lst_wd.values[i];
            prop_assert!((decomp_rhs(a, &inp).unwrap() - expect).abs() <= 1e-12);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(20))]

    #[test]
    fn corollary_sides_agree(down in down_spec(), margin in 0.05f64..2.0) {
        let r = down.eta_prime0() + margin;
        for j in 1..=50 {
            let a = 0.1 * j as f64;
            let (l, rhs) = corollary_identity(a, &down, r).unwrap();
            prop_assert!((l - rhs).abs() <= 1e-12, "a={a}: {l} vs {rhs}");
        }
    }
}
