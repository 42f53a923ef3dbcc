//! Ergodic transform estimates and martingale residuals from workload paths.
//!
//! Everything is computed in one streaming pass by [`PathStatistics`], which
//! can observe the simulator directly (no path stored) or replay a recorded
//! [`PathSample`]. The free functions are the per-estimator entry points on
//! recorded paths.
//!
//! Time averages are taken over the window `[burn_in·H, H]`. Integrals of
//! `e^{-αW}` are exact on linear pieces; grid pieces carry their left-endpoint
//! value and are integrated as rectangles. Standard errors use
//! non-overlapping batch means for time averages and a grouped (delete-a-block)
//! jackknife over periods for ratio and embedded estimators.

use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::levy::{DownProcessSpec, UpProcessSpec};
use crate::numfmt::sig12;
use crate::sim::{DownPeriod, PathEnd, PathObserver, PathSample, Piece};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EstimatorSettings {
    /// Leading fraction of the horizon ignored by time averages and embedded
    /// estimators.
    pub burn_in_fraction: f64,
    pub num_batches: usize,
    /// Block count of the grouped jackknife.
    pub jackknife_groups: usize,
    /// Completed periods required by the embedded estimators.
    pub min_periods: usize,
    /// Leading periods dropped by the Δ-residual (it ignores the burn-in).
    pub delta_discard: usize,
}

impl Default for EstimatorSettings {
    fn default() -> Self {
        Self {
            burn_in_fraction: 0.1,
            num_batches: 20,
            jackknife_groups: 20,
            min_periods: 5,
            delta_discard: 5,
        }
    }
}

impl EstimatorSettings {
    pub fn without_burn_in(mut self) -> Self {
        self.burn_in_fraction = 0.0;
        self
    }

    pub fn validate(&self, field: &str) -> Result<()> {
        if !(0.0..=0.5).contains(&self.burn_in_fraction) {
            return Err(Error::invalid(format!("{field}.burn_in_fraction"), "must lie in [0, 0.5]"));
        }
        if self.num_batches < 10 {
            return Err(Error::invalid(format!("{field}.num_batches"), "must be ≥ 10"));
        }
        if self.jackknife_groups < 2 {
            return Err(Error::invalid(format!("{field}.jackknife_groups"), "must be ≥ 2"));
        }
        if self.min_periods < 2 {
            return Err(Error::invalid(format!("{field}.min_periods"), "must be ≥ 2"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SampleBasis {
    #[serde(rename = "time-average")]
    TimeAverage,
    #[serde(rename = "down-conditional")]
    DownConditional,
    #[serde(rename = "embedded-S")]
    EmbeddedS,
    #[serde(rename = "embedded-T")]
    EmbeddedT,
}

impl SampleBasis {
    pub fn as_str(&self) -> &'static str {
        match self {
            SampleBasis::TimeAverage => "time-average",
            SampleBasis::DownConditional => "down-conditional",
            SampleBasis::EmbeddedS => "embedded-S",
            SampleBasis::EmbeddedT => "embedded-T",
        }
    }
}

/// Workload sampled at the end of down periods (`W(S_k)`, law `W₊`) or at
/// their start (`W(T_{k−1})`, law `W₋`).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EmbeddedBasis {
    AtS,
    AtT,
}

/// Transform estimate on an α grid.
#[derive(Debug, Clone, PartialEq)]
pub struct LstEstimate {
    pub alphas: Vec<f64>,
    pub values: Vec<f64>,
    pub std_errors: Vec<f64>,
    pub basis: SampleBasis,
}

impl LstEstimate {
    pub fn value_at(&self, alpha: f64) -> Option<(f64, f64)> {
        let i = self.alphas.iter().position(|&a| a == alpha)?;
        Some((self.values[i], self.std_errors[i]))
    }

    /// Writes `alpha,value,std_error,basis`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "alpha,value,std_error,basis")?;
        for i in 0..self.alphas.len() {
            writeln!(
                out,
                "{},{},{},{}",
                sig12(self.alphas[i]),
                sig12(self.values[i]),
                sig12(self.std_errors[i]),
                self.basis.as_str()
            )?;
        }
        Ok(())
    }
}

/// A statistic that should vanish in the long run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResidualStat {
    pub alpha: f64,
    pub value: f64,
    /// Window length for time-indexed residuals, period count for Δ.
    pub horizon_or_n: f64,
    pub std_error: f64,
}

/// Estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub std_error: f64,
}

/// Per-period quantities kept by the collector.
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodStats {
    pub period: DownPeriod,
    /// ∫ e^{-αW} over the whole down period, per α.
    pub integral: Vec<f64>,
    /// Same integral restricted to the estimation window.
    pub window_integral: Vec<f64>,
    pub window_time: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
struct Batch {
    time: Vec<f64>,
    down: Vec<f64>,
    martingale: Vec<f64>,
    down_time: f64,
    /// W and L at the batch's left edge.
    edge: Option<(f64, f64)>,
}

/// One-pass collector of every path statistic.
pub struct PathStatistics {
    alphas: Vec<f64>,
    phi: Vec<f64>,
    eta: Vec<f64>,
    settings: EstimatorSettings,
    horizon: f64,
    window_start: f64,
    batch_len: f64,
    batches: Vec<Batch>,
    periods: Vec<PeriodStats>,
    current: Vec<f64>,
    current_window: Vec<f64>,
    end: Option<PathEnd>,
}

impl PathStatistics {
    pub fn new(
        alphas: &[f64],
        up: &UpProcessSpec,
        down: &DownProcessSpec,
        horizon: f64,
        settings: EstimatorSettings,
    ) -> Result<Self> {
        settings.validate("estimators")?;
        check_alphas(alphas)?;
        if !(horizon.is_finite() && horizon > 0.0) {
            return Err(Error::InsufficientData("empty path (horizon must be > 0)".into()));
        }
        let n = alphas.len();
        let window_start = settings.burn_in_fraction * horizon;
        let batch = Batch {
            time: vec![0.0; n],
            down: vec![0.0; n],
            martingale: vec![0.0; n],
            ..Batch::default()
        };
        Ok(Self {
            alphas: alphas.to_vec(),
            phi: alphas.iter().map(|&a| up.phi_unchecked(a)).collect(),
            eta: alphas.iter().map(|&a| down.eta_unchecked(a)).collect(),
            settings,
            horizon,
            window_start,
            batch_len: (horizon - window_start) / settings.num_batches as f64,
            batches: vec![batch; settings.num_batches],
            periods: Vec::new(),
            current: vec![0.0; n],
            current_window: vec![0.0; n],
            end: None,
        })
    }

    /// Replays a recorded path.
    pub fn from_path(path: &PathSample, alphas: &[f64], settings: EstimatorSettings) -> Result<Self> {
        let mut stats = Self::new(alphas, &path.up, &path.down, path.horizon, settings)?;
        path.replay(&mut stats);
        Ok(stats)
    }

    fn batch_index(&self, t: f64) -> usize {
        let b = ((t - self.window_start) / self.batch_len).floor();
        (b.max(0.0) as usize).min(self.batches.len() - 1)
    }

    fn batch_right_edge(&self, b: usize) -> f64 {
        if b + 1 == self.batches.len() {
            self.horizon
        } else {
            self.window_start + (b + 1) as f64 * self.batch_len
        }
    }

    pub fn finish(self) -> Result<PathSummary> {
        let end = self
            .end
            .ok_or_else(|| Error::InsufficientData("path was not terminated".into()))?;
        let n = self.alphas.len();
        let window = self.horizon - self.window_start;
        let bl = self.batch_len;

        let mut time_avg = lst_shell(&self.alphas, SampleBasis::TimeAverage);
        let mut martingale = Vec::with_capacity(n);
        let edges: Vec<(f64, f64)> = self
            .batches
            .iter()
            .map(|b| b.edge.unwrap_or((end.w, end.l)))
            .chain(std::iter::once((end.w, end.l)))
            .collect();
        for i in 0..n {
            let a = self.alphas[i];
            let means: Vec<f64> = self.batches.iter().map(|b| b.time[i] / bl).collect();
            let (value, se) = if a == 0.0 {
                (1.0, 0.0)
            } else {
                (self.batches.iter().map(|b| b.time[i]).sum::<f64>() / window, se_of_means(&means))
            };
            time_avg.values[i] = value;
            time_avg.std_errors[i] = se;

            let totals: Vec<f64> = self
                .batches
                .iter()
                .enumerate()
                .map(|(b, batch)| {
                    let (w_lo, l_lo) = edges[b];
                    let (w_hi, l_hi) = edges[b + 1];
                    batch.martingale[i] + (-a * w_lo).exp() - (-a * w_hi).exp() - a * (l_hi - l_lo)
                })
                .collect();
            let means: Vec<f64> = totals.iter().map(|x| x / bl).collect();
            martingale.push(ResidualStat {
                alpha: a,
                value: totals.iter().sum::<f64>() / window,
                horizon_or_n: window,
                std_error: se_of_means(&means),
            });
        }

        let (w_lo, l_lo) = edges[0];
        let w_steps: Vec<f64> = edges.windows(2).map(|e| (e[1].0 - e[0].0) / bl).collect();
        let l_steps: Vec<f64> = edges.windows(2).map(|e| (e[1].1 - e[0].1) / bl).collect();
        let w_drift = Estimate {
            value: (end.w - w_lo) / window,
            std_error: se_of_means(&w_steps),
        };
        let l_drift = Estimate {
            value: (end.l - l_lo) / window,
            std_error: se_of_means(&l_steps),
        };

        let down_time: f64 = self.periods.iter().map(|p| p.window_time).sum();
        let occupancy = Estimate {
            value: down_time / window,
            std_error: se_of_means(&self.batches.iter().map(|b| b.down_time / bl).collect::<Vec<_>>()),
        };

        let groups = self.settings.jackknife_groups;
        let down_conditional = if down_time > 0.0 {
            let active: Vec<&PeriodStats> = self.periods.iter().filter(|p| p.window_time > 0.0).collect();
            let den: Vec<f64> = active.iter().map(|p| p.window_time).collect();
            let mut est = lst_shell(&self.alphas, SampleBasis::DownConditional);
            for i in 0..n {
                if self.alphas[i] == 0.0 {
                    est.values[i] = 1.0;
                    continue;
                }
                let num: Vec<f64> = active.iter().map(|p| p.window_integral[i]).collect();
                let (v, se) = jackknife_ratio(&num, &den, groups);
                est.values[i] = v;
                est.std_errors[i] = se;
            }
            Ok(est)
        } else {
            Err(Error::InsufficientData(
                "no down time inside the estimation window: down-conditional transform undefined".into(),
            ))
        };

        let embedded: Vec<&PeriodStats> = self
            .periods
            .iter()
            .filter(|p| p.period.is_complete() && p.period.start >= self.window_start)
            .collect();
        let enough = embedded.len() >= self.settings.min_periods;
        let too_few = || {
            Error::InsufficientData(format!(
                "{} completed periods in the window, need {}",
                embedded.len(),
                self.settings.min_periods
            ))
        };
        let w_plus: Vec<f64> = embedded.iter().map(|p| p.period.w_end.unwrap_or(f64::NAN)).collect();
        let w_minus: Vec<f64> = embedded.iter().map(|p| p.period.w_start).collect();
        let (embedded_s, embedded_t, mean_w_plus, mean_w_minus, mean_increment) = if enough {
            let ones = vec![1.0; embedded.len()];
            let mean = |xs: &[f64]| {
                let (value, std_error) = jackknife_ratio(xs, &ones, groups);
                Estimate { value, std_error }
            };
            let incr: Vec<f64> = w_plus.iter().zip(&w_minus).map(|(p, m)| p - m).collect();
            (
                embedded_lst_from_values(&w_plus, &self.alphas, groups, SampleBasis::EmbeddedS),
                embedded_lst_from_values(&w_minus, &self.alphas, groups, SampleBasis::EmbeddedT),
                Ok(mean(&w_plus)),
                Ok(mean(&w_minus)),
                Ok(mean(&incr)),
            )
        } else {
            (Err(too_few()), Err(too_few()), Err(too_few()), Err(too_few()), Err(too_few()))
        };

        let delta_periods: Vec<&PeriodStats> = self
            .periods
            .iter()
            .filter(|p| p.period.is_complete())
            .skip(self.settings.delta_discard)
            .collect();
        let delta = if delta_periods.len() >= self.settings.min_periods {
            Ok((0..n)
                .map(|i| {
                    let a = self.alphas[i];
                    let terms: Vec<f64> = delta_periods
                        .iter()
                        .map(|p| {
                            delta_increment(
                                a,
                                self.eta[i],
                                p.period.w_start,
                                p.period.w_end.unwrap_or(f64::NAN),
                                p.integral[i],
                            )
                        })
                        .collect();
                    let (value, std_error) = mean_and_se(&terms);
                    ResidualStat {
                        alpha: a,
                        value,
                        horizon_or_n: terms.len() as f64,
                        std_error,
                    }
                })
                .collect())
        } else {
            Err(Error::InsufficientData(format!(
                "{} completed periods after discarding {}, need {}",
                delta_periods.len(),
                self.settings.delta_discard,
                self.settings.min_periods
            )))
        };

        Ok(PathSummary {
            alphas: self.alphas,
            horizon: self.horizon,
            window_start: self.window_start,
            time_avg,
            occupancy,
            down_conditional,
            embedded_s,
            embedded_t,
            mean_w_plus,
            mean_w_minus,
            mean_down_increment: mean_increment,
            martingale,
            delta,
            w_drift,
            l_drift,
            completed_periods: self.periods.iter().filter(|p| p.period.is_complete()).count(),
            periods: self.periods,
            end,
        })
    }
}

impl PathObserver for PathStatistics {
    fn piece(&mut self, p: &Piece) {
        let n = self.alphas.len();
        if p.down {
            for i in 0..n {
                self.current[i] += exp_integral(p.w, p.slope, p.dt, self.alphas[i]);
            }
        }
        let mut lo = p.t.max(self.window_start);
        let hi = p.end().min(self.horizon);
        while lo < hi {
            let b = self.batch_index(lo);
            let cut = self.batch_right_edge(b).min(hi).max(lo);
            let cut = if cut <= lo { hi } else { cut };
            let offset = lo - p.t;
            let w = p.w_at(offset);
            let len = cut - lo;
            let batch = &mut self.batches[b];
            if batch.edge.is_none() {
                batch.edge = Some((w, p.l_at(offset)));
            }
            for i in 0..n {
                let integral = exp_integral(w, p.slope, len, self.alphas[i]);
                batch.time[i] += integral;
                if p.down {
                    batch.down[i] += integral;
                    batch.martingale[i] -= self.eta[i] * integral;
                    self.current_window[i] += integral;
                } else {
                    batch.martingale[i] += self.phi[i] * integral;
                }
            }
            if p.down {
                batch.down_time += len;
            }
            lo = cut;
        }
    }

    fn down_period(&mut self, period: &DownPeriod) {
        let n = self.alphas.len();
        self.periods.push(PeriodStats {
            period: *period,
            integral: std::mem::replace(&mut self.current, vec![0.0; n]),
            window_integral: std::mem::replace(&mut self.current_window, vec![0.0; n]),
            window_time: period.time_within(self.window_start, self.horizon),
        });
    }

    fn end(&mut self, end: &PathEnd) {
        self.end = Some(*end);
    }
}

/// All statistics of one path.
#[derive(Debug, Clone)]
pub struct PathSummary {
    pub alphas: Vec<f64>,
    pub horizon: f64,
    pub window_start: f64,
    pub time_avg: LstEstimate,
    /// Window fraction of time in down periods (`p̂_d`).
    pub occupancy: Estimate,
    pub down_conditional: Result<LstEstimate>,
    pub embedded_s: Result<LstEstimate>,
    pub embedded_t: Result<LstEstimate>,
    pub mean_w_plus: Result<Estimate>,
    pub mean_w_minus: Result<Estimate>,
    /// Mean of `W(S_k) − W(T_{k−1})` over the embedded periods.
    pub mean_down_increment: Result<Estimate>,
    pub martingale: Vec<ResidualStat>,
    pub delta: Result<Vec<ResidualStat>>,
    /// `(W(H) − W(t₀))/(H − t₀)`.
    pub w_drift: Estimate,
    /// `(L(H) − L(t₀))/(H − t₀)`.
    pub l_drift: Estimate,
    pub completed_periods: usize,
    pub periods: Vec<PeriodStats>,
    pub end: PathEnd,
}

/// ∫₀^len e^{-α(w + slope·s)} ds.
pub fn exp_integral(w: f64, slope: f64, len: f64, alpha: f64) -> f64 {
    if alpha == 0.0 {
        return len;
    }
    let base = (-alpha * w).exp();
    let z = alpha * slope * len;
    if z == 0.0 {
        base * len
    } else {
        base * len * (-(-z).exp_m1() / z)
    }
}

/// `e^{-αW(T)}·Δ = −η(α)∫e^{-αW} + e^{-αW(T)} − e^{-αW(S)}` for one down period.
pub fn delta_increment(alpha: f64, eta_alpha: f64, w_start: f64, w_end: f64, integral: f64) -> f64 {
    -eta_alpha * integral + (-alpha * w_start).exp() - (-alpha * w_end).exp()
}

/// Time-average transform `(1/t)∫e^{-αW(s)}ds`.
pub fn time_avg_lst(path: &PathSample, alphas: &[f64], settings: EstimatorSettings) -> Result<LstEstimate> {
    Ok(PathStatistics::from_path(path, alphas, settings)?.finish()?.time_avg)
}

/// Ratio estimator of `E e^{-αW_d}` and the down fraction `p̂_d`.
pub fn down_conditional_lst(
    path: &PathSample,
    alphas: &[f64],
    settings: EstimatorSettings,
) -> Result<(LstEstimate, f64)> {
    let summary = PathStatistics::from_path(path, alphas, settings)?.finish()?;
    Ok((summary.down_conditional?, summary.occupancy.value))
}

/// Mean of `e^{-αW}` over period boundaries.
pub fn embedded_lst(
    path: &PathSample,
    alphas: &[f64],
    basis: EmbeddedBasis,
    settings: EstimatorSettings,
) -> Result<LstEstimate> {
    let summary = PathStatistics::from_path(path, alphas, settings)?.finish()?;
    match basis {
        EmbeddedBasis::AtS => summary.embedded_s,
        EmbeddedBasis::AtT => summary.embedded_t,
    }
}

/// Embedded transform from explicit workload values.
pub fn embedded_lst_from_values(
    values: &[f64],
    alphas: &[f64],
    groups: usize,
    basis: SampleBasis,
) -> Result<LstEstimate> {
    check_alphas(alphas)?;
    if values.is_empty() {
        return Err(Error::InsufficientData("no embedded epochs".into()));
    }
    let ones = vec![1.0; values.len()];
    let mut est = lst_shell(alphas, basis);
    for (i, &a) in alphas.iter().enumerate() {
        if a == 0.0 {
            est.values[i] = 1.0;
            continue;
        }
        let xs: Vec<f64> = values.iter().map(|&w| (-a * w).exp()).collect();
        let (v, se) = jackknife_ratio(&xs, &ones, groups);
        est.values[i] = v;
        est.std_errors[i] = se;
    }
    Ok(est)
}

/// `R(t; α) = [∫(φ(α)(1−J) − η(α)J)e^{-αW}ds + e^{-αW(0)} − e^{-αW(t)} − αL(t)]/t`
/// over the estimation window.
pub fn martingale_residual(
    path: &PathSample,
    alpha: f64,
    up: &UpProcessSpec,
    down: &DownProcessSpec,
    settings: EstimatorSettings,
) -> Result<ResidualStat> {
    if path.up != *up || path.down != *down {
        return Err(Error::SpecMismatch);
    }
    if alpha <= 0.0 {
        return Err(Error::invalid("alpha", "must be > 0"));
    }
    let summary = PathStatistics::from_path(path, &[alpha], settings)?.finish()?;
    Ok(summary.martingale[0])
}

/// `(1/n) Σ e^{-αW(T_{k−1})}Δ_k` over completed periods.
pub fn delta_residual(
    path: &PathSample,
    alpha: f64,
    down: &DownProcessSpec,
    settings: EstimatorSettings,
) -> Result<ResidualStat> {
    if path.down != *down {
        return Err(Error::SpecMismatch);
    }
    if alpha <= 0.0 {
        return Err(Error::invalid("alpha", "must be > 0"));
    }
    let summary = PathStatistics::from_path(path, &[alpha], settings)?.finish()?;
    Ok(summary.delta?[0])
}

/// Batch-means standard error of the mean of an equally spaced series.
pub fn batch_se(series: &[f64], num_batches: usize) -> Result<f64> {
    if num_batches < 10 {
        return Err(Error::invalid("num_batches", "must be ≥ 10"));
    }
    if series.is_empty() || series.len() % num_batches != 0 {
        return Err(Error::InsufficientData(format!(
            "series of length {} does not split into {num_batches} equal batches",
            series.len()
        )));
    }
    let size = series.len() / num_batches;
    let means: Vec<f64> = series
        .chunks_exact(size)
        .map(|c| c.iter().sum::<f64>() / size as f64)
        .collect();
    Ok(se_of_means(&means))
}

/// `s/√b` for batch means `x₁…x_b`.
pub fn se_of_means(means: &[f64]) -> f64 {
    mean_and_se(means).1
}

pub fn mean_and_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = xs.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let ss: f64 = xs.iter().map(|x| (x - mean).powi(2)).sum();
    (mean, (ss / ((n - 1) as f64 * n as f64)).sqrt())
}

/// `Σnum/Σden` with a delete-a-block jackknife standard error over
/// `groups` contiguous blocks.
pub fn jackknife_ratio(num: &[f64], den: &[f64], groups: usize) -> (f64, f64) {
    let n = num.len();
    let total_num: f64 = num.iter().sum();
    let total_den: f64 = den.iter().sum();
    let ratio = total_num / total_den;
    let g = groups.min(n);
    if g < 2 {
        return (ratio, 0.0);
    }
    let mut loo = Vec::with_capacity(g);
    for j in 0..g {
        let (lo, hi) = (j * n / g, (j + 1) * n / g);
        let bn: f64 = num[lo..hi].iter().sum();
        let bd: f64 = den[lo..hi].iter().sum();
        loo.push((total_num - bn) / (total_den - bd));
    }
    let mean = loo.iter().sum::<f64>() / g as f64;
    let ss: f64 = loo.iter().map(|x| (x - mean).powi(2)).sum();
    (ratio, ((g - 1) as f64 / g as f64 * ss).sqrt())
}

fn lst_shell(alphas: &[f64], basis: SampleBasis) -> LstEstimate {
    LstEstimate {
        alphas: alphas.to_vec(),
        values: vec![0.0; alphas.len()],
        std_errors: vec![0.0; alphas.len()],
        basis,
    }
}

pub(crate) fn check_alphas(alphas: &[f64]) -> Result<()> {
    if alphas.is_empty() {
        return Err(Error::invalid("alphas", "need at least one value"));
    }
    for (i, &a) in alphas.iter().enumerate() {
        if !(a.is_finite() && a >= 0.0) {
            return Err(Error::invalid(format!("alphas[{i}]"), "must be finite and ≥ 0"));
        }
        if i > 0 && a <= alphas[i - 1] {
            return Err(Error::invalid(format!("alphas[{i}]"), "grid must be strictly increasing"));
        }
    }
    Ok(())
}
