use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::levy::{DownProcessSpec, JumpDistribution, UpProcessSpec};

/// Rule producing the boundaries `0 = T₀ ≤ S₁ ≤ T₁ ≤ S₂ ≤ …`.
///
/// `[T_{k−1}, S_k)` is the k-th down period and `[S_k, T_k)` the k-th up
/// period. Every variant decides a boundary from the past of the path only.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum RegimePolicy {
    /// i.i.d. down and up durations, independent of the workload.
    RenewalAlternation {
        down_dist: JumpDistribution,
        up_dist: JumpDistribution,
    },
    /// Vacation after each busy period: the server leaves for a `down_dist`
    /// duration, then serves until the workload first hits zero. If nothing
    /// arrived during the vacation the down period extends to the first
    /// arrival, so up periods never have zero length.
    ExhaustiveUp { down_dist: JumpDistribution },
    /// Explicit `(S_n, T_n)` pairs. With `cycle` set the pairs describe one
    /// cycle `[0, cycle)` and repeat forever; otherwise the server stays up
    /// after the last `T_n`. An empty non-cyclic table is an up-only system.
    ScheduleTable {
        epochs: Vec<[f64; 2]>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        cycle: Option<f64>,
    },
}

impl RegimePolicy {
    /// Up-only system without interruptions.
    pub fn up_only() -> Self {
        RegimePolicy::ScheduleTable {
            epochs: Vec::new(),
            cycle: None,
        }
    }

    /// Cyclic visit schedule: queue `i` is preceded by a switchover of
    /// `switchovers[i]` (server off) and visited for `visits[i]`.
    pub fn cyclic_polling(switchovers: &[f64], visits: &[f64]) -> Result<Self> {
        if switchovers.len() != visits.len() || switchovers.is_empty() {
            return Err(Error::invalid(
                "policy",
                "need one switchover per visit and at least one queue",
            ));
        }
        let mut t = 0.0;
        let mut epochs = Vec::with_capacity(visits.len());
        for (&s, &v) in switchovers.iter().zip(visits) {
            let start = t + s;
            t = start + v;
            epochs.push([start, t]);
        }
        let policy = RegimePolicy::ScheduleTable {
            epochs,
            cycle: Some(t),
        };
        policy.validate("policy")?;
        Ok(policy)
    }

    pub fn validate(&self, field: &str) -> Result<()> {
        match self {
            RegimePolicy::RenewalAlternation { down_dist, up_dist } => {
                down_dist.validate(&format!("{field}.down_dist"))?;
                up_dist.validate(&format!("{field}.up_dist"))
            }
            RegimePolicy::ExhaustiveUp { down_dist } => down_dist.validate(&format!("{field}.down_dist")),
            RegimePolicy::ScheduleTable { epochs, cycle } => {
                let mut prev_t = 0.0;
                for (i, &[s, t]) in epochs.iter().enumerate() {
                    let at = format!("{field}.epochs[{i}]");
                    if !(s.is_finite() && t.is_finite()) {
                        return Err(Error::invalid(at, "epochs must be finite"));
                    }
                    if s < prev_t || t < s {
                        return Err(Error::invalid(at, "need T_(n-1) <= S_n <= T_n"));
                    }
                    if t <= prev_t {
                        return Err(Error::invalid(at, "need T_(n-1) < T_n"));
                    }
                    prev_t = t;
                }
                if let Some(c) = *cycle {
                    if epochs.is_empty() {
                        return Err(Error::invalid(format!("{field}.cycle"), "cyclic schedule needs epochs"));
                    }
                    if !(c.is_finite() && c >= prev_t && c > 0.0) {
                        return Err(Error::invalid(
                            format!("{field}.cycle"),
                            "must be finite and >= the last T_n",
                        ));
                    }
                }
                Ok(())
            }
        }
    }

    pub fn is_up_only(&self) -> bool {
        matches!(self, RegimePolicy::ScheduleTable { epochs, .. } if epochs.is_empty())
    }

    /// Long-run fraction of time in down periods when it is fixed by the
    /// policy alone; `horizon` matters only for non-cyclic tables.
    /// `None` for exhaustive service, where it depends on the dynamics.
    pub fn down_fraction(&self, horizon: f64) -> Option<f64> {
        match self {
            RegimePolicy::RenewalAlternation { down_dist, up_dist } => {
                Some(down_dist.mean() / (down_dist.mean() + up_dist.mean()))
            }
            RegimePolicy::ExhaustiveUp { .. } => None,
            RegimePolicy::ScheduleTable { epochs, cycle } => {
                let span = cycle.unwrap_or(horizon);
                if span <= 0.0 {
                    return Some(0.0);
                }
                let mut prev_t = 0.0_f64;
                let mut down = 0.0;
                for &[s, t] in epochs {
                    down += s.min(span) - prev_t.min(span);
                    prev_t = t;
                }
                if let Some(c) = cycle {
                    // The last down stretch wraps into the next cycle's first one.
                    down += c - prev_t;
                }
                Some(down / span)
            }
        }
    }

    /// Whether this policy needs an exactly simulated netput.
    pub(crate) fn requires_exact_mode(&self) -> bool {
        matches!(self, RegimePolicy::ExhaustiveUp { .. })
    }

    pub(crate) fn check_against(&self, up: &UpProcessSpec, down: &DownProcessSpec) -> Result<()> {
        if let RegimePolicy::ExhaustiveUp { .. } = self {
            if !up.is_piecewise_linear() {
                return Err(Error::invalid(
                    "up.brownian_var",
                    "exhaustive service is simulated exactly and needs brownian_var = 0",
                ));
            }
            if !up.is_stable() {
                return Err(Error::Unstable(format!(
                    "exhaustive service needs phi'(0) > 0 so busy periods end (phi'(0) = {}); \
                     the down-fraction bound p_d <= phi'(0)/(eta'(0)+phi'(0)) cannot hold",
                    up.phi_prime0()
                )));
            }
            if down.is_zero() {
                return Err(Error::invalid(
                    "down",
                    "exhaustive service needs a down input with eta'(0) > 0",
                ));
            }
        }
        Ok(())
    }
}

/// Absolute `(S_k, T_k)` pairs of a schedule, cycling if requested.
pub(crate) struct ScheduleIter<'a> {
    epochs: &'a [[f64; 2]],
    cycle: Option<f64>,
    idx: usize,
    offset: f64,
}

impl<'a> ScheduleIter<'a> {
    pub(crate) fn new(epochs: &'a [[f64; 2]], cycle: Option<f64>) -> Self {
        Self {
            epochs,
            cycle,
            idx: 0,
            offset: 0.0,
        }
    }
}

impl Iterator for ScheduleIter<'_> {
    type Item = (f64, f64);

    fn next(&mut self) -> Option<(f64, f64)> {
        if self.idx == self.epochs.len() {
            let c = self.cycle?;
            self.idx = 0;
            self.offset += c;
        }
        let [s, t] = *self.epochs.get(self.idx)?;
        self.idx += 1;
        Some((self.offset + s, self.offset + t))
    }
}
