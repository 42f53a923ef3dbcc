#![allow(dead_code)]

use proptest::prelude::*;
use updown::levy::{DownProcessSpec, JumpDistribution, UpProcessSpec};

pub fn jump_dist() -> impl Strategy<Value = JumpDistribution> {
    prop_oneof![
        (0.1f64..3.0).prop_map(|mean| JumpDistribution::Exponential { mean }),
        (0.1f64..3.0).prop_map(|value| JumpDistribution::Deterministic { value }),
        (1u32..5, 0.1f64..3.0).prop_map(|(shape, mean)| JumpDistribution::Erlang { shape, mean }),
        (0.0f64..1.0, 0.1f64..2.0).prop_map(|(lo, w)| JumpDistribution::Uniform { lo, hi: lo + w }),
    ]
}

/// Up specs with a Brownian part.
pub fn up_spec() -> impl Strategy<Value = UpProcessSpec> {
    (-1.0f64..2.0, 0.0f64..1.0, 0.0f64..2.0, jump_dist()).prop_filter_map("subordinator", |(d, s, l, j)| {
        UpProcessSpec::new(d, s, l, j).ok()
    })
}

/// Up specs that can be simulated exactly and are stable.
pub fn stable_linear_up() -> impl Strategy<Value = UpProcessSpec> {
    (0.5f64..2.0, 0.0f64..1.0, jump_dist()).prop_filter_map("stable", |(d, l, j)| {
        UpProcessSpec::new(d, 0.0, l, j).ok().filter(|u| u.phi_prime0() > 0.1)
    })
}

pub fn down_spec() -> impl Strategy<Value = DownProcessSpec> {
    (0.0f64..1.0, 0.0f64..2.0, jump_dist()).prop_filter_map("nonzero", |(d, l, j)| {
        DownProcessSpec::new(d, l, j).ok().filter(|s| s.eta_prime0() > 0.0)
    })
}

/// Increasing α grid starting at 0.
pub fn alpha_grid() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.01f64..1.0, 2..12).prop_map(|steps| {
        let mut a = 0.0;
        let mut grid = vec![0.0];
        for s in steps {
            a += s;
            grid.push(a);
        }
        grid
    })
}
