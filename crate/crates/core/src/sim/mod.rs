//! Regime-switched netput, Skorokhod reflection and workload paths.
//!
//! The workload is `W(t) = W(0) + X̃(t) + L(t)` where `X̃` integrates the down
//! input over down periods and the up netput over up periods, and `L` is the
//! minimal nondecreasing regulator keeping `W ≥ 0`. Paths are càdlàg and a
//! period boundary belongs to the period that follows it.

mod engine;
mod path;
mod policy;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::levy::{DownProcessSpec, UpProcessSpec};

pub use engine::{
    first_passage_empty, first_passage_empty_capped, occupancy_fraction, reflect, reflect_linear, simulate,
    simulate_replica, LinearSegment, ReflectedPoint, DEFAULT_EVENT_CAP,
};
pub use path::{
    DownPeriod, PathEnd, PathMode, PathObserver, PathRecorder, PathSample, Piece, SkeletonPoint, Tee,
};
pub use policy::RegimePolicy;

pub const DEFAULT_GRID_STEP: f64 = 1e-3;

/// Requested simulation mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SimMode {
    /// Exact when the netput has no Brownian part, grid otherwise.
    #[default]
    Auto,
    Exact,
    Grid,
}

/// Everything needed to generate a path.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub up: UpProcessSpec,
    pub down: DownProcessSpec,
    pub policy: RegimePolicy,
    #[serde(default)]
    pub w0: f64,
    pub horizon: f64,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_grid_step")]
    pub grid_step: f64,
    #[serde(default)]
    pub mode: SimMode,
}

fn default_seed() -> u64 {
    1
}

fn default_grid_step() -> f64 {
    DEFAULT_GRID_STEP
}

impl Scenario {
    pub fn new(up: UpProcessSpec, down: DownProcessSpec, policy: RegimePolicy, horizon: f64, seed: u64) -> Self {
        Self {
            up,
            down,
            policy,
            w0: 0.0,
            horizon,
            seed,
            grid_step: DEFAULT_GRID_STEP,
            mode: SimMode::Auto,
        }
    }

    pub fn with_w0(mut self, w0: f64) -> Self {
        self.w0 = w0;
        self
    }

    pub fn with_mode(mut self, mode: SimMode) -> Self {
        self.mode = mode;
        self
    }

    pub fn with_horizon(mut self, horizon: f64) -> Self {
        self.horizon = horizon;
        self
    }

    /// Validates everything except `horizon > 0`, which run configurations
    /// demand but a bare simulation does not (a zero horizon yields an empty path).
    pub fn validate(&self, field: &str) -> Result<()> {
        self.up.validate(&format!("{field}.up"))?;
        self.down.validate(&format!("{field}.down"))?;
        self.policy.validate(&format!("{field}.policy"))?;
        if !(self.w0.is_finite() && self.w0 >= 0.0) {
            return Err(Error::invalid(format!("{field}.w0"), "must be ≥ 0"));
        }
        if !(self.horizon.is_finite() && self.horizon >= 0.0) {
            return Err(Error::invalid(format!("{field}.horizon"), "must be finite and ≥ 0"));
        }
        if !(self.grid_step.is_finite() && self.grid_step > 0.0) {
            return Err(Error::invalid(format!("{field}.grid_step"), "must be > 0"));
        }
        if self.mode == SimMode::Exact && !self.up.is_piecewise_linear() {
            return Err(Error::invalid(
                format!("{field}.mode"),
                "exact mode needs up.brownian_var = 0",
            ));
        }
        if self.policy.requires_exact_mode() && self.path_mode() == PathMode::Grid {
            return Err(Error::invalid(
                format!("{field}.mode"),
                "exhaustive service is only simulated in exact mode",
            ));
        }
        self.policy.check_against(&self.up, &self.down)
    }

    pub fn path_mode(&self) -> PathMode {
        match self.mode {
            SimMode::Exact => PathMode::Exact,
            SimMode::Grid => PathMode::Grid,
            SimMode::Auto if self.up.is_piecewise_linear() => PathMode::Exact,
            SimMode::Auto => PathMode::Grid,
        }
    }

    /// Long-run down fraction implied by the policy, if it does not depend
    /// on the dynamics.
    pub fn nominal_down_fraction(&self) -> Option<f64> {
        self.policy.down_fraction(self.horizon)
    }

    /// Upper bound `φ'(0)/(η'(0)+φ'(0))` on the down fraction of a stable system.
    pub fn down_fraction_bound(&self) -> f64 {
        let (p, e) = (self.up.phi_prime0(), self.down.eta_prime0());
        if p <= 0.0 {
            0.0
        } else {
            p / (p + e)
        }
    }
}
