//! Normalized power prior for a binomial proportion.
//!
//! Starting from the Haldane prior Be(0, 0), the α-powered historical
//! likelihood normalizes to `Be(θ; αx₀, α(n₀ - x₀))`, so θ integrates out
//! into a beta-binomial kernel for α.

use crate::error::{Error, Result};
use crate::normal::{alpha_posterior_equal_estimates, RelativeVariance};
use crate::quadrature::{AlphaPosteriorGrid, GridMeta, GridSpec, ModelKind};
use crate::specfun::{
    beta_binomial_log_pmf, beta_binomial_log_pmf_unchecked, beta_log_pdf, beta_log_pdf_split, log_binomial_coefficient,
    BetaParams, LogValue,
};

/// Largest trial count accepted; keeps `ln Γ` inside its tested range.
pub const MAX_TRIALS: u64 = 100_000_000;

/// Successes out of trials for one data set.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BinomialSummary {
    pub x: u64,
    pub n: u64,
}

impl BinomialSummary {
    pub fn new(x: u64, n: u64) -> Result<Self> {
        if n == 0 {
            return Err(Error::domain("number of trials must be positive"));
        }
        if x > n {
            return Err(Error::domain(format!("successes {x} exceed trials {n}")));
        }
        if n > MAX_TRIALS {
            return Err(Error::domain(format!("number of trials {n} exceeds {MAX_TRIALS}")));
        }
        Ok(BinomialSummary { x, n })
    }

    /// Maximum likelihood estimate `x / n`.
    pub fn rate(&self) -> f64 {
        self.x as f64 / self.n as f64
    }

    fn require_interior(&self) -> Result<()> {
        if self.x == 0 || self.x == self.n {
            return Err(Error::ImproperPrior(format!(
                "historical data {}/{} leave the Be(0, 0) initial prior improper; need 0 < x0 < n0",
                self.x, self.n
            )));
        }
        Ok(())
    }
}

/// Joint log density of the normalized power prior at `(theta, alpha)`.
pub fn npp_binomial_log_density(theta: f64, alpha: f64, hist: &BinomialSummary, prior: BetaParams) -> Result<LogValue> {
    hist.require_interior()?;
    if !(theta > 0.0 && theta < 1.0) {
        return Err(Error::domain(format!("theta must lie in (0, 1), got {theta}")));
    }
    let log_prior = beta_log_pdf(alpha, prior)?;
    let power = BetaParams {
        p: alpha * hist.x as f64,
        q: alpha * (hist.n - hist.x) as f64,
    };
    Ok(beta_log_pdf(theta, power)? + log_prior)
}

fn marginal_kernel(cur: BinomialSummary, hist: BinomialSummary, prior: BetaParams) -> impl Fn(f64, f64) -> LogValue {
    let (x0, f0) = (hist.x as f64, (hist.n - hist.x) as f64);
    move |a, one_minus| {
        beta_binomial_log_pmf_unchecked(cur.x, cur.n, a * x0, a * f0) + beta_log_pdf_split(a, one_minus, prior)
    }
}

/// Marginal posterior of α from the exact beta-binomial kernel.
pub fn alpha_posterior_binomial(
    cur: &BinomialSummary,
    hist: &BinomialSummary,
    prior: BetaParams,
    spec: &GridSpec,
    tol: f64,
) -> Result<AlphaPosteriorGrid> {
    hist.require_interior()?;
    let meta = GridMeta {
        model: ModelKind::Binomial,
        prior,
        inputs: format!("x={} n={} x0={} n0={}", cur.x, cur.n, hist.x, hist.n),
    };
    AlphaPosteriorGrid::from_kernel(marginal_kernel(*cur, *hist, prior), spec, tol, meta)
}

/// Stirling approximation of `ln BetaBin(x | n, αx₀, α(n₀ - x₀))`.
///
/// Accurate when `x/n = x₀/n₀` and `αn₀` is not small; elsewhere it is only
/// an approximation with no error guarantee.
pub fn stirling_log_pmf(x: u64, n: u64, alpha: f64, hist: &BinomialSummary) -> Result<LogValue> {
    if x == 0 || x >= n {
        return Err(Error::domain(format!(
            "Stirling approximation needs 0 < x < n, got {x}/{n}"
        )));
    }
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(Error::domain(format!("alpha must be positive, got {alpha}")));
    }
    let rate = x as f64 / n as f64;
    let (xf, nf) = (x as f64, n as f64);
    let an0 = alpha * hist.n as f64;
    Ok(log_binomial_coefficient(n, x)? + xf * rate.ln() + (nf - xf) * (-rate).ln_1p() + 0.5 * (an0 / (nf + an0)).ln())
}

/// The exact beta-binomial log mass this approximation targets.
pub fn exact_log_pmf(x: u64, n: u64, alpha: f64, hist: &BinomialSummary) -> Result<LogValue> {
    hist.require_interior()?;
    beta_binomial_log_pmf(x, n, alpha * hist.x as f64, alpha * (hist.n - hist.x) as f64)
}

/// Equal-rate approximation of the α posterior, `c = n / n₀`.
pub fn alpha_posterior_equal_rates_binomial(
    alpha: f64,
    cur_n: u64,
    hist_n: u64,
    prior: BetaParams,
) -> Result<LogValue> {
    if cur_n == 0 || hist_n == 0 {
        return Err(Error::domain("sample sizes must be positive"));
    }
    let c = RelativeVariance::new(cur_n as f64 / hist_n as f64)?;
    alpha_posterior_equal_estimates(alpha, c, prior)
}
