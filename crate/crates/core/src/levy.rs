//! Lévy input models for the two regimes.
//!
//! Processes are given in natural form: linear drift, optional Brownian part
//! and a finite-rate compound Poisson jump component. With `B` the jump size,
//!
//! ```text
//! up netput   X_u:  φ(α) = rα + σ²α²/2 + λ_u (E e^{-αB} − 1),   E e^{-αX_u(1)} = e^{φ(α)}
//! down input  X_d:  η(α) = c_d α + λ_d (1 − E e^{-αB}),          E e^{-αX_d(1)} = e^{-η(α)}
//! ```
//!
//! The netput drifts down at rate `r` (potential output minus continuous input).
//! In the truncated Lévy–Khintchine form `−cα + σ²α²/2 + ∫(e^{-αx} − 1 + αx·1{x≤1})ν(dx)`
//! the same up process has `ν = λ_u·P(B ∈ dx)` and `c = −r + λ_u·E[B; B ≤ 1]`,
//! see [`UpProcessSpec::truncated_drift`]. The down exponent needs no
//! compensator, so `c_d` is the same number in both forms.

use rand::Rng;
use rand_distr::{Distribution, Exp, Gamma, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Below this argument the removable singularities at zero are evaluated by
/// a first-order expansion instead of the ratio.
const TAYLOR_CUTOFF: f64 = 1e-8;

/// Law of a jump size (also reused for period durations).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum JumpDistribution {
    Exponential { mean: f64 },
    Deterministic { value: f64 },
    Erlang { shape: u32, mean: f64 },
    Uniform { lo: f64, hi: f64 },
}

impl JumpDistribution {
    pub fn exponential(mean: f64) -> Self {
        JumpDistribution::Exponential { mean }
    }

    pub fn deterministic(value: f64) -> Self {
        JumpDistribution::Deterministic { value }
    }

    /// Checks parameter invariants; `field` prefixes the diagnostic.
    pub fn validate(&self, field: &str) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::invalid(format!("{field}.{name}"), "must be > 0"))
            }
        };
        match *self {
            JumpDistribution::Exponential { mean } => positive("mean", mean),
            JumpDistribution::Deterministic { value } => positive("value", value),
            JumpDistribution::Erlang { shape, mean } => {
                if shape == 0 {
                    return Err(Error::invalid(format!("{field}.shape"), "must be >= 1"));
                }
                positive("mean", mean)
            }
            JumpDistribution::Uniform { lo, hi } => {
                if !(lo.is_finite() && lo >= 0.0) {
                    return Err(Error::invalid(format!("{field}.lo"), "must be >= 0"));
                }
                positive("hi", hi)?;
                if lo >= hi {
                    return Err(Error::invalid(format!("{field}.hi"), "must be > lo"));
                }
                Ok(())
            }
        }
    }

    pub fn mean(&self) -> f64 {
        match *self {
            JumpDistribution::Exponential { mean } => mean,
            JumpDistribution::Deterministic { value } => value,
            JumpDistribution::Erlang { mean, .. } => mean,
            JumpDistribution::Uniform { lo, hi } => 0.5 * (lo + hi),
        }
    }

    /// E[B²].
    pub fn second_moment(&self) -> f64 {
        match *self {
            JumpDistribution::Exponential { mean } => 2.0 * mean * mean,
            JumpDistribution::Deterministic { value } => value * value,
            JumpDistribution::Erlang { shape, mean } => mean * mean * (1.0 + 1.0 / shape as f64),
            JumpDistribution::Uniform { lo, hi } => (lo * lo + lo * hi + hi * hi) / 3.0,
        }
    }

    /// E e^{-αB} for α ≥ 0.
    pub fn lst(&self, alpha: f64) -> f64 {
        1.0 + self.lst_minus_one(alpha)
    }

    /// E e^{-αB} − 1, computed without cancellation for small α.
    pub fn lst_minus_one(&self, alpha: f64) -> f64 {
        if alpha == 0.0 {
            return 0.0;
        }
        match *self {
            JumpDistribution::Exponential { mean } => -mean * alpha / (1.0 + mean * alpha),
            JumpDistribution::Deterministic { value } => (-alpha * value).exp_m1(),
            JumpDistribution::Erlang { shape, mean } => {
                let k = shape as f64;
                (-k * (alpha * mean / k).ln_1p()).exp_m1()
            }
            JumpDistribution::Uniform { lo, hi } => {
                let width = hi - lo;
                let x = alpha * width;
                let lst = (-alpha * lo).exp() * (-(-x).exp_m1()) / x;
                lst - 1.0
            }
        }
    }

    /// E[B; B ≤ threshold].
    pub fn truncated_mean(&self, threshold: f64) -> f64 {
        match *self {
            JumpDistribution::Exponential { mean } => {
                let z = threshold / mean;
                mean * (1.0 - (-z).exp() * (1.0 + z))
            }
            JumpDistribution::Deterministic { value } => {
                if value <= threshold {
                    value
                } else {
                    0.0
                }
            }
            JumpDistribution::Erlang { shape, mean } => {
                // E[B; B ≤ a] = E B · P(Gamma(k+1, θ) ≤ a) with θ = mean/k.
                let theta = mean / shape as f64;
                let z = threshold / theta;
                let mut term = 1.0;
                let mut tail = 0.0;
                for j in 0..=shape {
                    if j > 0 {
                        term *= z / j as f64;
                    }
                    tail += term;
                }
                mean * (1.0 - (-z).exp() * tail)
            }
            JumpDistribution::Uniform { lo, hi } => {
                let a = threshold.clamp(lo, hi);
                (a * a - lo * lo) / (2.0 * (hi - lo))
            }
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            JumpDistribution::Exponential { mean } => {
                Exp::new(1.0 / mean).expect("validated mean").sample(rng)
            }
            JumpDistribution::Deterministic { value } => value,
            JumpDistribution::Erlang { shape, mean } => Gamma::new(shape as f64, mean / shape as f64)
                .expect("validated erlang")
                .sample(rng),
            JumpDistribution::Uniform { lo, hi } => rng.random_range(lo..hi),
        }
    }
}

/// Spectrally positive netput driving up periods.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UpProcessSpec {
    /// Output rate `r`; the netput has drift `−r`.
    pub drift: f64,
    pub brownian_var: f64,
    pub jump_rate: f64,
    pub jump_dist: JumpDistribution,
}

impl UpProcessSpec {
    pub fn new(drift: f64, brownian_var: f64, jump_rate: f64, jump_dist: JumpDistribution) -> Result<Self> {
        let spec = Self {
            drift,
            brownian_var,
            jump_rate,
            jump_dist,
        };
        spec.validate("up")?;
        Ok(spec)
    }

    /// Deterministic netput `−r·t`.
    pub fn pure_drift(r: f64) -> Result<Self> {
        Self::new(r, 0.0, 0.0, JumpDistribution::exponential(1.0))
    }

    pub fn validate(&self, field: &str) -> Result<()> {
        if !self.drift.is_finite() {
            return Err(Error::invalid(format!("{field}.drift"), "must be finite"));
        }
        if !(self.brownian_var.is_finite() && self.brownian_var >= 0.0) {
            return Err(Error::invalid(format!("{field}.brownian_var"), "must be ≥ 0"));
        }
        if !(self.jump_rate.is_finite() && self.jump_rate >= 0.0) {
            return Err(Error::invalid(format!("{field}.jump_rate"), "must be ≥ 0"));
        }
        self.jump_dist.validate(&format!("{field}.jump_dist"))?;
        if self.drift <= 0.0 && self.brownian_var == 0.0 {
            return Err(Error::invalid(
                field.to_string(),
                "netput must not be a subordinator (need drift > 0 or brownian_var > 0)",
            ));
        }
        Ok(())
    }

    /// Laplace exponent φ(α) = log E e^{-αX_u(1)}.
    pub fn phi(&self, alpha: f64) -> Result<f64> {
        check_alpha(alpha)?;
        Ok(self.phi_unchecked(alpha))
    }

    pub(crate) fn phi_unchecked(&self, alpha: f64) -> f64 {
        self.drift * alpha
            + 0.5 * self.brownian_var * alpha * alpha
            + self.jump_rate * self.jump_dist.lst_minus_one(alpha)
    }

    /// φ'(0) = r − λ_u E B = −E X_u(1).
    pub fn phi_prime0(&self) -> f64 {
        self.drift - self.jump_rate * self.jump_dist.mean()
    }

    /// φ''(0) = σ² + λ_u E B², the variance rate of the netput.
    pub fn phi_second0(&self) -> f64 {
        self.brownian_var + self.jump_rate * self.jump_dist.second_moment()
    }

    pub fn is_stable(&self) -> bool {
        self.phi_prime0() > 0.0
    }

    /// Exact event-driven simulation applies only without a Brownian part.
    pub fn is_piecewise_linear(&self) -> bool {
        self.brownian_var == 0.0
    }

    /// Drift coefficient of the truncated (compensated at 1) Lévy–Khintchine form.
    pub fn truncated_drift(&self) -> f64 {
        -self.drift + self.jump_rate * self.jump_dist.truncated_mean(1.0)
    }

    /// Generalized Pollaczek–Khinchin transform αφ'(0)/φ(α) of `sup_s X_u(s)`.
    pub fn pk_lst(&self, alpha: f64) -> Result<f64> {
        check_alpha(alpha)?;
        let d1 = self.phi_prime0();
        if d1 <= 0.0 {
            return Err(Error::Unstable(format!(
                "phi'(0) = {d1} must be > 0 for the supremum of the netput to be finite"
            )));
        }
        if alpha == 0.0 {
            return Ok(1.0);
        }
        if alpha < TAYLOR_CUTOFF {
            return Ok(1.0 - 0.5 * self.phi_second0() / d1 * alpha);
        }
        Ok(alpha * d1 / self.phi_unchecked(alpha))
    }
}

/// Subordinator driving down periods.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DownProcessSpec {
    /// Linear accumulation rate `c_d`.
    pub drift: f64,
    pub jump_rate: f64,
    pub jump_dist: JumpDistribution,
}

impl DownProcessSpec {
    pub fn new(drift: f64, jump_rate: f64, jump_dist: JumpDistribution) -> Result<Self> {
        let spec = Self {
            drift,
            jump_rate,
            jump_dist,
        };
        spec.validate("down")?;
        Ok(spec)
    }

    /// The identically zero input.
    pub fn zero() -> Self {
        Self {
            drift: 0.0,
            jump_rate: 0.0,
            jump_dist: JumpDistribution::exponential(1.0),
        }
    }

    pub fn validate(&self, field: &str) -> Result<()> {
        if !(self.drift.is_finite() && self.drift >= 0.0) {
            return Err(Error::invalid(format!("{field}.drift"), "must be ≥ 0"));
        }
        if !(self.jump_rate.is_finite() && self.jump_rate >= 0.0) {
            return Err(Error::invalid(format!("{field}.jump_rate"), "must be ≥ 0"));
        }
        self.jump_dist.validate(&format!("{field}.jump_dist"))
    }

    /// η(α) = −log E e^{-αX_d(1)}.
    pub fn eta(&self, alpha: f64) -> Result<f64> {
        check_alpha(alpha)?;
        Ok(self.eta_unchecked(alpha))
    }

    pub(crate) fn eta_unchecked(&self, alpha: f64) -> f64 {
        self.drift * alpha - self.jump_rate * self.jump_dist.lst_minus_one(alpha)
    }

    /// η'(0) = c_d + λ_d E B = E X_d(1).
    pub fn eta_prime0(&self) -> f64 {
        self.drift + self.jump_rate * self.jump_dist.mean()
    }

    pub fn is_zero(&self) -> bool {
        self.eta_prime0() == 0.0
    }

    /// Transform η(α)/(αη'(0)) of the stationary excess law `F_e`.
    pub fn excess_lst(&self, alpha: f64) -> Result<f64> {
        check_alpha(alpha)?;
        let d1 = self.eta_prime0();
        if d1 <= 0.0 {
            return Err(Error::Degenerate(
                "eta'(0) = 0: excess distribution of an identically zero input is undefined".into(),
            ));
        }
        if alpha == 0.0 {
            return Ok(1.0);
        }
        if alpha < TAYLOR_CUTOFF {
            let m2 = self.jump_rate * self.jump_dist.second_moment();
            return Ok(1.0 - 0.5 * m2 / d1 * alpha);
        }
        Ok(self.eta_unchecked(alpha) / (alpha * d1))
    }
}

/// ψ(γ₁, γ₂) = φ(γ₁) − η(γ₂), the joint exponent of the pair `(X_u, X_d)`.
pub fn psi_two(up: &UpProcessSpec, down: &DownProcessSpec, gamma1: f64, gamma2: f64) -> Result<f64> {
    Ok(up.phi(gamma1)? - down.eta(gamma2)?)
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha >= 0.0 {
        Ok(())
    } else {
        Err(Error::NegativeArgument(alpha))
    }
}

/// Common shape of both regime inputs as seen by the samplers.
pub trait InputProcess {
    /// Rate of the continuous part: `−r` for the up netput, `c_d` for the down input.
    fn continuous_rate(&self) -> f64;
    fn brownian_var(&self) -> f64;
    fn jump_rate(&self) -> f64;
    fn jump_dist(&self) -> JumpDistribution;
}

impl InputProcess for UpProcessSpec {
    fn continuous_rate(&self) -> f64 {
        -self.drift
    }
    fn brownian_var(&self) -> f64 {
        self.brownian_var
    }
    fn jump_rate(&self) -> f64 {
        self.jump_rate
    }
    fn jump_dist(&self) -> JumpDistribution {
        self.jump_dist
    }
}

impl InputProcess for DownProcessSpec {
    fn continuous_rate(&self) -> f64 {
        self.drift
    }
    fn brownian_var(&self) -> f64 {
        0.0
    }
    fn jump_rate(&self) -> f64 {
        self.jump_rate
    }
    fn jump_dist(&self) -> JumpDistribution {
        self.jump_dist
    }
}

/// Supplies the jump sequence of a compound Poisson component.
pub trait JumpSource {
    /// Time since the previous jump (or segment start) and the jump size;
    /// `None` once no further jumps will occur.
    fn next_jump(&mut self) -> Option<(f64, f64)>;
}

/// Poisson epochs with i.i.d. sizes drawn from a random stream.
pub struct PoissonJumps<R> {
    gap: Option<Exp<f64>>,
    dist: JumpDistribution,
    rng: R,
}

impl<R: Rng> PoissonJumps<R> {
    pub fn new(rate: f64, dist: JumpDistribution, rng: R) -> Self {
        let gap = (rate > 0.0).then(|| Exp::new(rate).expect("finite positive rate"));
        Self { gap, dist, rng }
    }

    pub fn for_process<P: InputProcess + ?Sized>(process: &P, rng: R) -> Self {
        Self::new(process.jump_rate(), process.jump_dist(), rng)
    }
}

impl<R: Rng> JumpSource for PoissonJumps<R> {
    fn next_jump(&mut self) -> Option<(f64, f64)> {
        let gap = self.gap.as_ref()?.sample(&mut self.rng);
        Some((gap, self.dist.sample(&mut self.rng)))
    }
}

/// Scripted jumps, mainly for tests.
#[derive(Debug, Clone, Default)]
pub struct ScriptedJumps {
    jumps: std::collections::VecDeque<(f64, f64)>,
}

impl ScriptedJumps {
    pub fn new(jumps: impl IntoIterator<Item = (f64, f64)>) -> Self {
        Self {
            jumps: jumps.into_iter().collect(),
        }
    }
}

impl JumpSource for ScriptedJumps {
    fn next_jump(&mut self) -> Option<(f64, f64)> {
        self.jumps.pop_front()
    }
}

/// One regime interval of an input process.
#[derive(Debug, Clone, PartialEq)]
pub struct SegmentSample {
    pub duration: f64,
    /// `(time_offset, jump_size)`, strictly increasing in time.
    pub events: Vec<(f64, f64)>,
    pub continuous_increment_rate: f64,
    /// `(time, gaussian increment over the preceding sub-interval)` on the
    /// grid merged with the jump epochs; `None` without a Brownian part.
    pub brownian_increments: Option<Vec<(f64, f64)>>,
}

impl SegmentSample {
    /// X(duration) − X(0).
    pub fn total_increment(&self) -> f64 {
        let jumps: f64 = self.events.iter().map(|&(_, s)| s).sum();
        let brownian: f64 = self
            .brownian_increments
            .as_ref()
            .map_or(0.0, |g| g.iter().map(|&(_, z)| z).sum());
        self.continuous_increment_rate * self.duration + jumps + brownian
    }
}

/// Samples `process` over `[0, duration]`. Jumps are drawn first; Gaussian
/// increments (if any) follow from the same stream on a grid of `grid_step`
/// with the jump epochs inserted.
pub fn sample_segment<P, R>(process: &P, duration: f64, grid_step: f64, rng: &mut R) -> SegmentSample
where
    P: InputProcess + ?Sized,
    R: Rng + ?Sized,
{
    let mut events = Vec::new();
    {
        let mut jumps = PoissonJumps::for_process(process, &mut *rng);
        let mut t = 0.0;
        while let Some((gap, size)) = jumps.next_jump() {
            t += gap;
            if t >= duration {
                break;
            }
            events.push((t, size));
        }
    }

    let sigma2 = process.brownian_var();
    let brownian_increments = (sigma2 > 0.0 && duration > 0.0).then(|| {
        let sigma = sigma2.sqrt();
        let mut out = Vec::new();
        let mut prev = 0.0;
        let mut next_event = events.iter().map(|&(t, _)| t).peekable();
        let mut i = 1u64;
        while prev < duration {
            let grid = (i as f64 * grid_step).min(duration);
            let cut = match next_event.peek() {
                Some(&te) if te < grid => {
                    next_event.next();
                    te
                }
                _ => {
                    i += 1;
                    grid
                }
            };
            if cut > prev {
                let z: f64 = StandardNormal.sample(rng);
                out.push((cut, sigma * (cut - prev).sqrt() * z));
                prev = cut;
            }
        }
        out
    });

    SegmentSample {
        duration,
        events,
        continuous_increment_rate: process.continuous_rate(),
        brownian_increments,
    }
}
