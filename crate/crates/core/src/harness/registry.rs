use crate::levy::{DownProcessSpec, JumpDistribution, UpProcessSpec};
use crate::sim::{RegimePolicy, Scenario};

use super::config::{RunConfig, Tolerances};

/// A built-in experiment.
#[derive(Debug, Clone)]
pub struct NamedScenario {
    pub name: &'static str,
    pub summary: &'static str,
    pub config: RunConfig,
}

/// Unit drift, rate-½ Exp(1) jumps: `φ(α) = α − α/(2(1+α))`.
pub fn reference_up() -> UpProcessSpec {
    UpProcessSpec {
        drift: 1.0,
        brownian_var: 0.0,
        jump_rate: 0.5,
        jump_dist: JumpDistribution::exponential(1.0),
    }
}

/// Rate-½ Exp(1) jumps, no drift: `η(α) = α/(2(1+α))`.
pub fn reference_down() -> DownProcessSpec {
    DownProcessSpec {
        drift: 0.0,
        jump_rate: 0.5,
        jump_dist: JumpDistribution::exponential(1.0),
    }
}

fn config(name: &str, scenario: Scenario, replicas: u64) -> RunConfig {
    let mut cfg = RunConfig::new(name, scenario, replicas);
    cfg.output_dir = format!("out/{name}").into();
    cfg
}

fn scenario_a() -> RunConfig {
    let sc = Scenario::new(reference_up(), DownProcessSpec::zero(), RegimePolicy::up_only(), 2e5, 101);
    let mut cfg = config("A", sc, 20);
    cfg.tolerances = Tolerances {
        abs_floor: 3e-3,
        ..Tolerances::default()
    };
    cfg
}

fn renewal(down_mean: f64, up_mean: f64) -> RegimePolicy {
    RegimePolicy::RenewalAlternation {
        down_dist: JumpDistribution::exponential(down_mean),
        up_dist: JumpDistribution::exponential(up_mean),
    }
}

fn scenario_b() -> RunConfig {
    let sc = Scenario::new(reference_up(), reference_down(), renewal(1.0, 3.0), 1e5, 202);
    config("B", sc, 20)
}

fn scenario_c() -> RunConfig {
    let policy = RegimePolicy::ExhaustiveUp {
        down_dist: JumpDistribution::exponential(1.0),
    };
    let sc = Scenario::new(reference_up(), reference_down(), policy, 1e5, 303);
    config("C", sc, 20)
}

fn scenario_d() -> RunConfig {
    let policy = RegimePolicy::cyclic_polling(&[0.3, 0.5, 0.2], &[1.0, 0.8, 1.2]).expect("valid schedule");
    let sc = Scenario::new(reference_up(), reference_down(), policy, 1e5, 404);
    config("D", sc, 20)
}

fn scenario_e() -> RunConfig {
    let sc = Scenario::new(reference_up(), reference_down(), renewal(3.0, 1.0), 1e5, 505);
    config("E", sc, 20)
}

/// Built-in scenarios in display order.
pub fn registry() -> Vec<NamedScenario> {
    vec![
        NamedScenario {
            name: "A",
            summary: "up-only M/G/1-type workload; time average against the PK transform",
            config: scenario_a(),
        },
        NamedScenario {
            name: "B",
            summary: "renewal alternation, down Exp(1) / up Exp(3), p_d = 0.25; phi(a) = a - eta(a)",
            config: scenario_b(),
        },
        NamedScenario {
            name: "C",
            summary: "exhaustive service with Exp(1) vacations (down fraction at its bound)",
            config: scenario_c(),
        },
        NamedScenario {
            name: "D",
            summary: "cyclic polling schedule, switchovers (0.3, 0.5, 0.2), visits (1, 0.8, 1.2), p_d = 0.25",
            config: scenario_d(),
        },
        NamedScenario {
            name: "E",
            summary: "renewal alternation, down Exp(3) / up Exp(1), p_d = 0.75 above the bound 0.5 (unstable)",
            config: scenario_e(),
        },
    ]
}

pub fn lookup(name: &str) -> Option<RunConfig> {
    registry()
        .into_iter()
        .find(|s| s.name.eq_ignore_ascii_case(name))
        .map(|s| s.config)
}
