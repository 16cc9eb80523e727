//! Normalized power prior for a scalar estimate with known standard error.
//!
//! With a flat initial prior the α-powered historical likelihood normalizes
//! to `Normal(θ̂₀, σ₀²/α)`, and integrating θ out leaves the marginal
//! posterior of α proportional to `Normal(θ̂; θ̂₀, σ² + σ₀²/α) Be(α; p, q)`.

use crate::error::{Error, Result};
use crate::quadrature::{log_integrate_01_split, trapezoid};
use crate::quadrature::{AlphaPosteriorGrid, GridMeta, GridSpec, ModelKind};
use crate::specfun::{
    beta_log_pdf, beta_log_pdf_split, log_gauss_2f1_negz, log_kummer_m, normal_log_pdf, BetaParams, LogValue,
};

/// An estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormalSummary {
    pub theta_hat: f64,
    pub sigma: f64,
}

impl NormalSummary {
    pub fn new(theta_hat: f64, sigma: f64) -> Result<Self> {
        if !theta_hat.is_finite() {
            return Err(Error::domain(format!("estimate must be finite, got {theta_hat}")));
        }
        if !(sigma > 0.0) || !sigma.is_finite() {
            return Err(Error::domain("sigma must be positive"));
        }
        Ok(NormalSummary { theta_hat, sigma })
    }

    pub fn variance(&self) -> f64 {
        self.sigma * self.sigma
    }

    pub fn log_pdf(&self, x: f64) -> LogValue {
        normal_log_pdf(x, self.theta_hat, self.variance())
    }
}

/// Ratio of historical to current variance, equivalently the relative
/// sample size `n / n₀`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct RelativeVariance(f64);

impl RelativeVariance {
    pub fn new(c: f64) -> Result<Self> {
        if !(c > 0.0) || !c.is_finite() {
            return Err(Error::domain(format!(
                "relative variance must be positive and finite, got {c}"
            )));
        }
        Ok(RelativeVariance(c))
    }

    /// `σ₀² / σ²`.
    pub fn from_summaries(cur: &NormalSummary, hist: &NormalSummary) -> Self {
        RelativeVariance(hist.variance() / cur.variance())
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(Error::domain(format!("alpha must lie in (0, 1), got {alpha}")))
    }
}

/// Joint log density of the normalized power prior at `(theta, alpha)`.
pub fn npp_log_density(theta: f64, alpha: f64, hist: &NormalSummary, prior: BetaParams) -> Result<LogValue> {
    check_alpha(alpha)?;
    Ok(normal_log_pdf(theta, hist.theta_hat, hist.variance() / alpha) + beta_log_pdf(alpha, prior)?)
}

fn marginal_kernel(cur: NormalSummary, hist: NormalSummary, prior: BetaParams) -> impl Fn(f64, f64) -> LogValue {
    let (s2, s02) = (cur.variance(), hist.variance());
    move |a, one_minus| {
        normal_log_pdf(cur.theta_hat, hist.theta_hat, s2 + s02 / a) + beta_log_pdf_split(a, one_minus, prior)
    }
}

/// Unnormalized log marginal posterior of α.
pub fn alpha_log_posterior_unnorm(
    alpha: f64,
    cur: &NormalSummary,
    hist: &NormalSummary,
    prior: BetaParams,
) -> Result<LogValue> {
    check_alpha(alpha)?;
    Ok(marginal_kernel(*cur, *hist, prior)(alpha, 1.0 - alpha))
}

/// Marginal posterior of α, normalized by quadrature at relative tolerance `tol`.
pub fn alpha_posterior(
    cur: &NormalSummary,
    hist: &NormalSummary,
    prior: BetaParams,
    spec: &GridSpec,
    tol: f64,
) -> Result<AlphaPosteriorGrid> {
    let meta = GridMeta {
        model: ModelKind::Normal,
        prior,
        inputs: format!(
            "theta_hat={} sigma={} theta0_hat={} sigma0={}",
            cur.theta_hat, cur.sigma, hist.theta_hat, hist.sigma
        ),
    };
    AlphaPosteriorGrid::from_kernel(marginal_kernel(*cur, *hist, prior), spec, tol, meta)
}

/// The limiting law `Be(p + 1/2, q)` reached by the equal-estimate posterior
/// as the current data become infinitely precise.
pub fn alpha_limit_beta(prior: BetaParams) -> BetaParams {
    BetaParams {
        p: prior.p + 0.5,
        q: prior.q,
    }
}

/// Closed-form posterior of α when `θ̂ = θ̂₀`; depends on the data only
/// through the relative variance.
#[derive(Debug, Clone, Copy)]
pub struct EqualEstimatesPosterior {
    c: f64,
    updated: BetaParams,
    log_2f1: f64,
}

impl EqualEstimatesPosterior {
    pub fn new(c: RelativeVariance, prior: BetaParams) -> Result<Self> {
        let c = c.value();
        let log_2f1 = log_gauss_2f1_negz(0.5, prior.p + 0.5, prior.p + prior.q + 0.5, -1.0 / c)?;
        Ok(EqualEstimatesPosterior {
            c,
            updated: alpha_limit_beta(prior),
            log_2f1,
        })
    }

    pub fn log_density(&self, alpha: f64) -> Result<LogValue> {
        check_alpha(alpha)?;
        Ok(-0.5 * (alpha / self.c).ln_1p() + beta_log_pdf(alpha, self.updated)? - self.log_2f1)
    }
}

/// Normalized log density of α for equal estimates, relative variance `c`.
pub fn alpha_posterior_equal_estimates(alpha: f64, c: RelativeVariance, prior: BetaParams) -> Result<LogValue> {
    EqualEstimatesPosterior::new(c, prior)?.log_density(alpha)
}

/// [`alpha_posterior_equal_estimates`] sampled on a grid.
pub fn equal_estimates_grid(c: RelativeVariance, prior: BetaParams, spec: &GridSpec) -> Result<AlphaPosteriorGrid> {
    let law = EqualEstimatesPosterior::new(c, prior)?;
    let meta = GridMeta {
        model: ModelKind::EqualEstimates,
        prior,
        inputs: format!("c={}", c.value()),
    };
    AlphaPosteriorGrid::from_log_density(|a| law.log_density(a), spec, meta)
}

/// Closed-form limit of the α posterior as the current standard error goes
/// to zero, for standardized difference `d = |θ̂ - θ̂₀| / σ₀`.
#[derive(Debug, Clone, Copy)]
pub struct PreciseCurrentPosterior {
    half_d2: f64,
    updated: BetaParams,
    log_m: f64,
}

impl PreciseCurrentPosterior {
    pub fn new(d: f64, prior: BetaParams) -> Result<Self> {
        if !(d >= 0.0) || !d.is_finite() {
            return Err(Error::domain(format!("standardized difference must be >= 0, got {d}")));
        }
        let half_d2 = 0.5 * d * d;
        let log_m = log_kummer_m(prior.p + 0.5, prior.p + prior.q + 0.5, -half_d2)?;
        Ok(PreciseCurrentPosterior {
            half_d2,
            updated: alpha_limit_beta(prior),
            log_m,
        })
    }

    pub fn log_density(&self, alpha: f64) -> Result<LogValue> {
        check_alpha(alpha)?;
        Ok(-alpha * self.half_d2 + beta_log_pdf(alpha, self.updated)? - self.log_m)
    }
}

/// Normalized log density of the precise-current-data limit at `alpha`.
pub fn alpha_posterior_precise_current(alpha: f64, d: f64, prior: BetaParams) -> Result<LogValue> {
    PreciseCurrentPosterior::new(d, prior)?.log_density(alpha)
}

pub fn precise_current_grid(d: f64, prior: BetaParams, spec: &GridSpec) -> Result<AlphaPosteriorGrid> {
    let law = PreciseCurrentPosterior::new(d, prior)?;
    let meta = GridMeta {
        model: ModelKind::PreciseCurrent,
        prior,
        inputs: format!("d={d}"),
    };
    AlphaPosteriorGrid::from_log_density(|a| law.log_density(a), spec, meta)
}

/// Density of `Be(p, q)` on a grid.
pub fn beta_grid(params: BetaParams, spec: &GridSpec) -> Result<AlphaPosteriorGrid> {
    let meta = GridMeta {
        model: ModelKind::Beta,
        prior: params,
        inputs: format!("p={} q={}", params.p, params.q),
    };
    AlphaPosteriorGrid::from_log_density(|a| beta_log_pdf(a, params), spec, meta)
}

/// Posterior of θ for a fixed α: the precision-weighted combination of the
/// current estimate and the α-discounted historical one. `alpha` must lie in
/// `[0, 1]`.
pub fn theta_conditional_posterior(alpha: f64, cur: &NormalSummary, hist: &NormalSummary) -> NormalSummary {
    debug_assert!((0.0..=1.0).contains(&alpha));
    if alpha == 0.0 {
        return *cur;
    }
    let (w, w0) = (1.0 / cur.variance(), alpha / hist.variance());
    let v = 1.0 / (w + w0);
    NormalSummary {
        theta_hat: v * (w * cur.theta_hat + w0 * hist.theta_hat),
        sigma: v.sqrt(),
    }
}

/// The θ posterior with all mass of α at 1.
pub fn complete_pooling_posterior(cur: &NormalSummary, hist: &NormalSummary) -> NormalSummary {
    theta_conditional_posterior(1.0, cur, hist)
}

/// A density sampled over θ.
#[derive(Debug, Clone, PartialEq)]
pub struct ThetaCurve {
    pub thetas: Vec<f64>,
    pub density: Vec<f64>,
}

impl ThetaCurve {
    pub fn trapezoid_mass(&self) -> f64 {
        trapezoid(&self.thetas, &self.density)
    }
}

/// Uniform θ grid covering both estimates with `width` standard errors of margin.
pub fn default_theta_grid(cur: &NormalSummary, hist: &NormalSummary, points: usize, width: f64) -> Vec<f64> {
    let s = cur.sigma.max(hist.sigma);
    let lo = cur.theta_hat.min(hist.theta_hat) - width * s;
    let hi = cur.theta_hat.max(hist.theta_hat) + width * s;
    let n = points.max(2);
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

/// `∫ Normal(θ; m(α), v(α)) π(α) dα` at each θ, for a normalized α log density
/// given as `(α, 1 - α) -> ln π(α)`.
pub fn theta_mixture_density(
    theta_grid: &[f64],
    cur: &NormalSummary,
    hist: &NormalSummary,
    log_alpha_density: impl Fn(f64, f64) -> LogValue,
    tol: f64,
) -> Result<ThetaCurve> {
    let density = theta_grid
        .iter()
        .map(|&theta| {
            log_integrate_01_split(
                |a, s| theta_conditional_posterior(a, cur, hist).log_pdf(theta) + log_alpha_density(a, s),
                tol,
            )
            .map(f64::exp)
            .map_err(|e| e.context(format!("theta mixture integral at theta = {theta}")))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ThetaCurve {
        thetas: theta_grid.to_vec(),
        density,
    })
}

/// Marginal posterior of θ, averaging the conditional posterior over the
/// marginal posterior of α.
pub fn theta_marginal_posterior(
    theta_grid: &[f64],
    cur: &NormalSummary,
    hist: &NormalSummary,
    prior: BetaParams,
    tol: f64,
) -> Result<ThetaCurve> {
    let kernel = marginal_kernel(*cur, *hist, prior);
    let log_z =
        log_integrate_01_split(&kernel, tol).map_err(|e| e.context("normalizing integral of the normal posterior"))?;
    theta_mixture_density(theta_grid, cur, hist, |a, s| kernel(a, s) - log_z, tol)
}

/// Best-case θ posterior: both estimates placed at the complete-pooling mean,
/// standard errors kept, and α drawn from the limiting `Be(p + 1/2, q)`.
pub fn best_case_theta_posterior(
    theta_grid: &[f64],
    cur: &NormalSummary,
    hist: &NormalSummary,
    prior: BetaParams,
    tol: f64,
) -> Result<ThetaCurve> {
    let center = complete_pooling_posterior(cur, hist).theta_hat;
    let cur_bc = NormalSummary {
        theta_hat: center,
        ..*cur
    };
    let hist_bc = NormalSummary {
        theta_hat: center,
        ..*hist
    };
    let limit = alpha_limit_beta(prior);
    theta_mixture_density(
        theta_grid,
        &cur_bc,
        &hist_bc,
        |a, s| beta_log_pdf_split(a, s, limit),
        tol,
    )
}
