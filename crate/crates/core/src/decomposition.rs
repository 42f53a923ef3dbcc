//! Predicted stationary workload transform and the identities it must satisfy.
//!
//! With `π_ℓ = 1 − (1 + η'(0)/φ'(0))p_d` and `π = η'(0)/(η'(0)+φ'(0))`,
//!
//! ```text
//! E e^{-αW} = π_ℓ·pk(α) + (1 − π_ℓ)(1 − π + π·excess(α)·pk(α))·E e^{-αW_d}
//! ```
//!
//! where `pk(α) = αφ'(0)/φ(α)` and `excess(α) = η(α)/(αη'(0))`. Empirical
//! transforms enter as tables on a fixed α grid and are never interpolated.

use std::io::{self, Write};

use crate::error::{Error, Result};
use crate::estimators::LstEstimate;
use crate::levy::{DownProcessSpec, UpProcessSpec};
use crate::numfmt::sig12;

pub fn pi_ell(p_d: f64, phi0: f64, eta0: f64) -> Result<f64> {
    if !(phi0 > 0.0) {
        return Err(Error::Unstable(format!("phi'(0) = {phi0} must be > 0")));
    }
    Ok(1.0 - (1.0 + eta0 / phi0) * p_d)
}

pub fn pi_ratio(phi0: f64, eta0: f64) -> Result<f64> {
    let den = eta0 + phi0;
    if !(den > 0.0) {
        return Err(Error::Degenerate(format!("phi'(0) + eta'(0) = {den} must be > 0")));
    }
    Ok(eta0 / den)
}

/// Model specs, empirical down fraction and empirical `E e^{-αW_d}` table.
#[derive(Debug, Clone, PartialEq)]
pub struct DecompositionInputs {
    pub up: UpProcessSpec,
    pub down: DownProcessSpec,
    pub p_d: f64,
    pub p_d_se: f64,
    pub lst_wd: LstEstimate,
}

impl DecompositionInputs {
    /// Rejects unstable specs and down fractions above
    /// `φ'(0)/(η'(0)+φ'(0))` by more than three standard errors.
    pub fn new(up: UpProcessSpec, down: DownProcessSpec, p_d: f64, p_d_se: f64, lst_wd: LstEstimate) -> Result<Self> {
        let phi0 = up.phi_prime0();
        let eta0 = down.eta_prime0();
        if !(phi0 > 0.0) {
            return Err(Error::Unstable(format!("phi'(0) = {phi0} must be > 0")));
        }
        if !(eta0 > 0.0) {
            return Err(Error::Degenerate(format!(
                "eta'(0) = {eta0}: the down input must be nonzero"
            )));
        }
        if !(0.0..=1.0).contains(&p_d) {
            return Err(Error::invalid("p_d", "must lie in [0, 1]"));
        }
        if !(p_d_se.is_finite() && p_d_se >= 0.0) {
            return Err(Error::invalid("p_d_se", "must be finite and ≥ 0"));
        }
        let bound = phi0 / (phi0 + eta0);
        if p_d > bound + 3.0 * p_d_se {
            return Err(Error::Unstable(format!(
                "p_d = {p_d} exceeds phi'(0)/(eta'(0)+phi'(0)) = {bound} by more than 3 SE (SE = {p_d_se})"
            )));
        }
        crate::estimators::check_alphas(&lst_wd.alphas)?;
        if lst_wd.values.len() != lst_wd.alphas.len() || lst_wd.std_errors.len() != lst_wd.alphas.len() {
            return Err(Error::invalid("lst_wd", "values and std_errors must align with alphas"));
        }
        Ok(Self {
            up,
            down,
            p_d,
            p_d_se,
            lst_wd,
        })
    }

    pub fn pi_ell(&self) -> f64 {
        1.0 - (1.0 + self.down.eta_prime0() / self.up.phi_prime0()) * self.p_d
    }

    pub fn pi(&self) -> f64 {
        let (p, e) = (self.up.phi_prime0(), self.down.eta_prime0());
        e / (e + p)
    }

    /// `E e^{-αW_d}` and its standard error at a grid point.
    pub fn wd_at(&self, alpha: f64) -> Result<(f64, f64)> {
        self.lst_wd.value_at(alpha).ok_or_else(|| {
            Error::invalid("alpha", format!("{alpha} is not on the lst_wd grid"))
        })
    }
}

/// Predicted `E e^{-αW(∞)}`.
pub fn decomp_rhs(alpha: f64, inputs: &DecompositionInputs) -> Result<f64> {
    let (wd, _) = inputs.wd_at(alpha)?;
    let pk = inputs.up.pk_lst(alpha)?;
    let excess = inputs.down.excess_lst(alpha)?;
    let (pl, pi) = (inputs.pi_ell(), inputs.pi());
    Ok(pl * pk + (1.0 - pl) * (1.0 - pi + pi * excess * pk) * wd)
}

/// `φ(α)·lst_w − (φ(α)+η(α))·p_d·lst_wd − α((1−p_d)φ'(0) − p_d·η'(0))`.
pub fn identity_residual(alpha: f64, inputs: &DecompositionInputs, lst_w: f64) -> Result<f64> {
    let (wd, _) = inputs.wd_at(alpha)?;
    let phi = inputs.up.phi(alpha)?;
    let eta = inputs.down.eta(alpha)?;
    let (phi0, eta0, p) = (inputs.up.phi_prime0(), inputs.down.eta_prime0(), inputs.p_d);
    Ok(phi * lst_w - (phi + eta) * p * wd - alpha * ((1.0 - p) * phi0 - p * eta0))
}

/// First-order standard error of [`identity_residual`], treating the three
/// estimates as independent.
pub fn identity_residual_se(alpha: f64, inputs: &DecompositionInputs, lst_w_se: f64) -> Result<f64> {
    let (wd, wd_se) = inputs.wd_at(alpha)?;
    let phi = inputs.up.phi(alpha)?;
    let eta = inputs.down.eta(alpha)?;
    let slope_p = -(phi + eta) * wd + alpha * (inputs.up.phi_prime0() + inputs.down.eta_prime0());
    Ok(((phi * lst_w_se).powi(2)
        + ((phi + eta) * inputs.p_d * wd_se).powi(2)
        + (slope_p * inputs.p_d_se).powi(2))
    .sqrt())
}

/// Both sides of `1 − π + π·excess(α)·pk(α) = pk(α)` for `φ(α) = αr − η(α)`.
pub fn corollary_identity(alpha: f64, down: &DownProcessSpec, r: f64) -> Result<(f64, f64)> {
    let eta0 = down.eta_prime0();
    if !(r > eta0) {
        return Err(Error::Unstable(format!("need r > eta'(0) (r = {r}, eta'(0) = {eta0})")));
    }
    if !(alpha > 0.0) {
        return Err(Error::invalid("alpha", "must be > 0"));
    }
    let eta = down.eta(alpha)?;
    let phi = alpha * r - eta;
    let phi0 = r - eta0;
    let pi = eta0 / r;
    let pk = alpha * phi0 / phi;
    let lhs = 1.0 - pi + pi * (eta / (eta0 * alpha)) * pk;
    Ok((lhs, pk))
}

/// `(E e^{-αW₋} − E e^{-αW₊})/(α(EW₊ − EW₋)) − (η(α)/(αη'(0)))·E e^{-αW_d}`.
pub fn pm_residual(
    alpha: f64,
    down: &DownProcessSpec,
    lst_w_minus: f64,
    lst_w_plus: f64,
    ew_minus: f64,
    ew_plus: f64,
    lst_wd: f64,
) -> Result<f64> {
    if !(alpha > 0.0) {
        return Err(Error::invalid("alpha", "must be > 0"));
    }
    let gap = ew_plus - ew_minus;
    if gap == 0.0 || !gap.is_finite() {
        return Err(Error::Degenerate("E W+ = E W-: the left side is undefined".into()));
    }
    let excess = down.excess_lst(alpha)?;
    Ok((lst_w_minus - lst_w_plus) / (alpha * gap) - excess * lst_wd)
}

/// Values and standard errors entering [`pm_residual`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PmInputs {
    pub lst_w_minus: (f64, f64),
    pub lst_w_plus: (f64, f64),
    pub ew_minus: (f64, f64),
    pub ew_plus: (f64, f64),
    pub lst_wd: (f64, f64),
}

impl PmInputs {
    pub fn residual(&self, alpha: f64, down: &DownProcessSpec) -> Result<f64> {
        pm_residual(
            alpha,
            down,
            self.lst_w_minus.0,
            self.lst_w_plus.0,
            self.ew_minus.0,
            self.ew_plus.0,
            self.lst_wd.0,
        )
    }

    /// First-order standard error with independent inputs.
    pub fn residual_se(&self, alpha: f64, down: &DownProcessSpec) -> Result<f64> {
        let gap = self.ew_plus.0 - self.ew_minus.0;
        let num = self.lst_w_minus.0 - self.lst_w_plus.0;
        let d_lst = 1.0 / (alpha * gap);
        let d_mean = num / (alpha * gap * gap);
        let excess = down.excess_lst(alpha)?;
        Ok(((d_lst * self.lst_w_minus.1).powi(2)
            + (d_lst * self.lst_w_plus.1).powi(2)
            + (d_mean * self.ew_minus.1).powi(2)
            + (d_mean * self.ew_plus.1).powi(2)
            + (excess * self.lst_wd.1).powi(2))
        .sqrt())
    }
}

/// `lst_w` minus the transform of `I_ℓ·W_u + (1−I_ℓ)(I·(W_u + Y_e) + W_d)` with
/// independent components, `P(I_ℓ = 1) = π_ℓ` and `P(I = 1) = π`.
pub fn rv_form_check(alpha: f64, inputs: &DecompositionInputs, lst_w: f64) -> Result<f64> {
    let (wd, _) = inputs.wd_at(alpha)?;
    let w_u = inputs.up.pk_lst(alpha)?;
    let y_e = inputs.down.excess_lst(alpha)?;
    let mixture = |p: f64, a: f64, b: f64| p * a + (1.0 - p) * b;
    let independent_sum = |a: f64, b: f64| a * b;
    let after_down = independent_sum(mixture(inputs.pi(), independent_sum(w_u, y_e), 1.0), wd);
    Ok(lst_w - mixture(inputs.pi_ell(), w_u, after_down))
}

/// Per-α comparison of empirical and predicted transforms.
#[derive(Debug, Clone, PartialEq)]
pub struct DecompositionReport {
    pub alphas: Vec<f64>,
    pub empirical: Vec<f64>,
    pub predicted: Vec<f64>,
    pub identity_residuals: Vec<f64>,
    /// NaN where no embedded data exist.
    pub pm_residuals: Vec<f64>,
    pub std_errors: Vec<f64>,
    pub pass: Vec<bool>,
}

impl DecompositionReport {
    pub fn check_aligned(&self) -> Result<()> {
        let n = self.alphas.len();
        let lens = [
            self.empirical.len(),
            self.predicted.len(),
            self.identity_residuals.len(),
            self.pm_residuals.len(),
            self.std_errors.len(),
            self.pass.len(),
        ];
        if lens.iter().any(|&l| l != n) {
            return Err(Error::invalid("report", "columns are not aligned to the alpha grid"));
        }
        Ok(())
    }

    /// Writes `alpha,empirical,predicted,identity_residual,pm_residual,se,pass`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "alpha,empirical,predicted,identity_residual,pm_residual,se,pass")?;
        for i in 0..self.alphas.len() {
            writeln!(
                out,
                "{},{},{},{},{},{},{}",
                sig12(self.alphas[i]),
                sig12(self.empirical[i]),
                sig12(self.predicted[i]),
                sig12(self.identity_residuals[i]),
                sig12(self.pm_residuals[i]),
                sig12(self.std_errors[i]),
                self.pass[i]
            )?;
        }
        Ok(())
    }
}
