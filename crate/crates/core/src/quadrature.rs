//! Integration over (0, 1) of integrands given as log densities, and the
//! grid type that carries every marginal posterior of the power parameter.

use std::f64::consts::PI;
use std::fmt;

use crate::error::{Error, Result};
use crate::specfun::{log_add, BetaParams, LogValue};

/// Default relative tolerance for normalizing constants.
pub const DEFAULT_TOL: f64 = 1e-10;

/// Number of step halvings after the initial unit step.
const MAX_LEVEL: u32 = 12;
/// Levels below this never declare convergence; coarse levels can agree by accident.
const MIN_LEVEL: u32 = 3;
/// Half-width of the tanh-sinh abscissa range. At 6 the node distance to
/// either endpoint is about 1e-275, still a normal double.
const U_MAX: f64 = 6.0;

/// `ln Σ exp(v)`, safe against overflow.
pub fn log_sum_exp(values: &[f64]) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::domain("log_sum_exp of an empty list"));
    }
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max.is_infinite() {
        return Ok(max);
    }
    let sum: f64 = values.iter().map(|v| (v - max).exp()).sum();
    Ok(max + sum.ln())
}

/// `ln ∫₀¹ exp(log_f(t)) dt`.
///
/// Nodes that round onto an endpoint are skipped, so an integrand singular at
/// 1 loses the mass within about 1e-16 of it; use [`log_integrate_01_split`]
/// for those.
pub fn log_integrate_01(log_f: impl Fn(f64) -> LogValue, tol: f64) -> Result<f64> {
    log_integrate_01_split(
        |t, s| {
            if t > 0.0 && s > 0.0 && t < 1.0 {
                log_f(t)
            } else {
                f64::NEG_INFINITY
            }
        },
        tol,
    )
}

/// `ln ∫₀¹ exp(log_f(t, 1 - t)) dt` by tanh-sinh quadrature.
///
/// The integrand receives the node and its distance to 1, both to full
/// relative precision. The step is halved until two successive estimates of
/// the log integral differ by at most `tol`, up to 12 halvings.
pub fn log_integrate_01_split(log_f: impl Fn(f64, f64) -> LogValue, tol: f64) -> Result<f64> {
    if !(tol > 0.0) {
        return Err(Error::domain(format!("tolerance must be positive, got {tol}")));
    }
    let eval = |u: f64| -> Result<f64> {
        let s = 0.5 * PI * u.sinh();
        let e = (-2.0 * s.abs()).exp();
        let (t, comp) = if s >= 0.0 {
            (1.0 / (1.0 + e), e / (1.0 + e))
        } else {
            (e / (1.0 + e), 1.0 / (1.0 + e))
        };
        if t <= 0.0 || comp <= 0.0 {
            return Ok(f64::NEG_INFINITY);
        }
        let log_w = (PI * u.cosh()).ln() - 2.0 * s.abs() - 2.0 * e.ln_1p();
        let v = log_f(t, comp);
        if v.is_nan() {
            return Err(Error::domain(format!("integrand is NaN at t = {t}")));
        }
        Ok(log_w + v)
    };

    // Level 0: unit step over the integers in [-U_MAX, U_MAX].
    let n0 = U_MAX as i64;
    let mut acc = f64::NEG_INFINITY;
    for k in -n0..=n0 {
        acc = log_add(acc, eval(k as f64)?);
    }
    let mut h = 1.0_f64;
    let mut estimate = acc;
    let mut diff = f64::INFINITY;

    for level in 1..=MAX_LEVEL {
        h *= 0.5;
        let n = (U_MAX / h) as i64;
        let mut k = -n + if n % 2 == 0 { 1 } else { 0 };
        while k <= n {
            acc = log_add(acc, eval(k as f64 * h)?);
            k += 2;
        }
        let next = h.ln() + acc;
        diff = if next == f64::NEG_INFINITY && estimate == f64::NEG_INFINITY {
            0.0
        } else {
            (next - estimate).abs()
        };
        estimate = next;
        if level >= MIN_LEVEL && diff <= tol {
            return Ok(estimate);
        }
    }
    Err(Error::Convergence {
        what: "tanh-sinh integral over (0, 1)".to_string(),
        estimate,
        error_bound: diff,
    })
}

/// Composite trapezoid rule over an ascending abscissa.
pub fn trapezoid(xs: &[f64], ys: &[f64]) -> f64 {
    xs.windows(2)
        .zip(ys.windows(2))
        .map(|(x, y)| 0.5 * (x[1] - x[0]) * (y[0] + y[1]))
        .sum()
}

/// Layout of the α grid: geometric near both endpoints, uniform in between.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub points: usize,
    /// Distance of the outermost nodes from 0 and 1.
    pub edge: f64,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            points: 512,
            edge: 1e-8,
        }
    }
}

impl GridSpec {
    const KNEE: f64 = 0.01;

    pub fn with_points(points: usize) -> Self {
        GridSpec {
            points,
            ..Default::default()
        }
    }

    /// The ascending nodes, strictly inside (0, 1).
    ///
    /// One eighth of the points go geometrically spaced between `edge` and
    /// 0.01 at each end, the rest uniformly over [0.01, 0.99].
    pub fn nodes(&self) -> Result<Vec<f64>> {
        if self.points < 16 {
            return Err(Error::domain(format!(
                "grid needs at least 16 points, got {}",
                self.points
            )));
        }
        if !(self.edge > 0.0 && self.edge < Self::KNEE) {
            return Err(Error::domain(format!(
                "grid edge must lie in (0, {}), got {}",
                Self::KNEE,
                self.edge
            )));
        }
        let n_edge = self.points / 8;
        let n_mid = self.points - 2 * n_edge;
        let ratio = Self::KNEE / self.edge;
        let geometric: Vec<f64> = (0..n_edge)
            .map(|i| self.edge * ratio.powf(i as f64 / n_edge as f64))
            .collect();
        let step = (1.0 - 2.0 * Self::KNEE) / (n_mid - 1) as f64;

        let mut out = Vec::with_capacity(self.points);
        out.extend(geometric.iter().copied());
        out.extend((0..n_mid).map(|i| Self::KNEE + i as f64 * step));
        out.extend(geometric.iter().rev().map(|g| 1.0 - g));
        Ok(out)
    }
}

/// What produced a posterior grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelKind {
    Normal,
    Binomial,
    Linear,
    /// Closed form for equal estimates.
    EqualEstimates,
    /// Closed form for arbitrarily precise current data.
    PreciseCurrent,
    /// A plain beta density.
    Beta,
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ModelKind::Normal => "normal",
            ModelKind::Binomial => "binomial",
            ModelKind::Linear => "linear",
            ModelKind::EqualEstimates => "equal-estimates",
            ModelKind::PreciseCurrent => "precise-current",
            ModelKind::Beta => "beta",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridMeta {
    pub model: ModelKind,
    pub prior: BetaParams,
    /// Human-readable description of the data inputs.
    pub inputs: String,
}

/// Normalized log density of the power parameter on a grid over (0, 1).
#[derive(Debug, Clone, PartialEq)]
pub struct AlphaPosteriorGrid {
    alphas: Vec<f64>,
    log_density: Vec<f64>,
    log_normalizer: f64,
    meta: GridMeta,
}

impl AlphaPosteriorGrid {
    /// Builds a grid from values the caller asserts are normalized.
    pub fn new(alphas: Vec<f64>, log_density: Vec<f64>, meta: GridMeta) -> Result<Self> {
        if alphas.len() != log_density.len() {
            return Err(Error::DimensionMismatch {
                expected: alphas.len(),
                found: log_density.len(),
            });
        }
        if alphas.len() < 2 {
            return Err(Error::domain("grid needs at least two points"));
        }
        if !alphas.iter().all(|&a| a > 0.0 && a < 1.0) {
            return Err(Error::domain("grid abscissae must lie strictly inside (0, 1)"));
        }
        if !alphas.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::domain("grid abscissae must be strictly increasing"));
        }
        if log_density.iter().any(|v| v.is_nan() || *v == f64::INFINITY) {
            return Err(Error::domain("grid log density contains NaN or +inf"));
        }
        Ok(AlphaPosteriorGrid {
            alphas,
            log_density,
            log_normalizer: 0.0,
            meta,
        })
    }

    /// Normalizes an unnormalized log kernel `k(α, 1 - α)` by tanh-sinh
    /// quadrature and samples it on `spec`.
    pub fn from_kernel(
        kernel: impl Fn(f64, f64) -> LogValue,
        spec: &GridSpec,
        tol: f64,
        meta: GridMeta,
    ) -> Result<Self> {
        let log_z = log_integrate_01_split(&kernel, tol)
            .map_err(|e| e.context(format!("normalizing integral of the {} posterior", meta.model)))?;
        if !log_z.is_finite() {
            return Err(Error::domain(format!(
                "the {} posterior kernel has no finite mass (log normalizer {log_z})",
                meta.model
            )));
        }
        let alphas = spec.nodes()?;
        let log_density = alphas.iter().map(|&a| kernel(a, 1.0 - a) - log_z).collect();
        let mut grid = Self::new(alphas, log_density, meta)?;
        grid.log_normalizer = log_z;
        Ok(grid)
    }

    /// Samples a density that is already normalized.
    pub fn from_log_density(
        log_density: impl Fn(f64) -> Result<LogValue>,
        spec: &GridSpec,
        meta: GridMeta,
    ) -> Result<Self> {
        let alphas = spec.nodes()?;
        let values = alphas.iter().map(|&a| log_density(a)).collect::<Result<Vec<_>>>()?;
        Self::new(alphas, values, meta)
    }

    pub fn alphas(&self) -> &[f64] {
        &self.alphas
    }

    pub fn log_density(&self) -> &[f64] {
        &self.log_density
    }

    pub fn density(&self) -> Vec<f64> {
        self.log_density.iter().map(|v| v.exp()).collect()
    }

    /// Log of the normalizing integral, zero for closed forms.
    pub fn log_normalizer(&self) -> f64 {
        self.log_normalizer
    }

    pub fn meta(&self) -> &GridMeta {
        &self.meta
    }

    pub fn len(&self) -> usize {
        self.alphas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.alphas.is_empty()
    }

    /// Trapezoid integral of the density over the grid.
    pub fn trapezoid_mass(&self) -> f64 {
        trapezoid(&self.alphas, &self.density())
    }

    fn check_same_abscissa(&self, other: &Self) -> Result<()> {
        if self.alphas != other.alphas {
            return Err(Error::domain("grids are on different abscissae"));
        }
        Ok(())
    }

    /// Half the trapezoid integral of `|f - g|`.
    pub fn total_variation(&self, other: &Self) -> Result<f64> {
        self.check_same_abscissa(other)?;
        let diff: Vec<f64> = self
            .density()
            .iter()
            .zip(other.density())
            .map(|(a, b)| (a - b).abs())
            .collect();
        Ok(0.5 * trapezoid(&self.alphas, &diff))
    }

    /// Largest pointwise density difference.
    pub fn sup_distance(&self, other: &Self) -> Result<f64> {
        self.check_same_abscissa(other)?;
        Ok(self
            .density()
            .iter()
            .zip(other.density())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max))
    }

    /// Trapezoid CDF at each grid point, rescaled to end at 1.
    pub fn cdf(&self) -> Vec<f64> {
        cumulative(&self.alphas, &self.density())
    }
}

fn cumulative(xs: &[f64], ys: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(xs.len());
    let mut acc = 0.0;
    out.push(0.0);
    for i in 1..xs.len() {
        acc += 0.5 * (xs[i] - xs[i - 1]) * (ys[i] + ys[i - 1]);
        out.push(acc);
    }
    if acc > 0.0 {
        out.iter_mut().for_each(|c| *c /= acc);
    }
    out
}

/// Point and interval summaries of a density sampled on a grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensitySummary {
    pub mean: f64,
    pub sd: f64,
    pub mode: f64,
    pub median: f64,
    /// Equal-tailed interval at `level`.
    pub lower: f64,
    pub upper: f64,
    pub level: f64,
}

/// Summaries by trapezoid integration; the mode is the best grid point.
pub fn summarize_curve(xs: &[f64], density: &[f64], level: f64) -> Result<DensitySummary> {
    if xs.len() != density.len() || xs.len() < 2 {
        return Err(Error::domain(
            "curve needs matching abscissa and density of length >= 2",
        ));
    }
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::domain(format!("interval level must lie in (0, 1), got {level}")));
    }
    let mass = trapezoid(xs, density);
    if !(mass > 0.0) || !mass.is_finite() {
        return Err(Error::domain("curve has no finite positive mass"));
    }
    let xf: Vec<f64> = xs.iter().zip(density).map(|(x, f)| x * f).collect();
    let mean = trapezoid(xs, &xf) / mass;
    let vf: Vec<f64> = xs.iter().zip(density).map(|(x, f)| (x - mean).powi(2) * f).collect();
    let sd = (trapezoid(xs, &vf) / mass).sqrt();
    let mode = xs
        .iter()
        .zip(density)
        .fold(
            (xs[0], f64::NEG_INFINITY),
            |best, (&x, &f)| if f > best.1 { (x, f) } else { best },
        )
        .0;
    let cdf = cumulative(xs, density);
    let quantile = |p: f64| {
        let i = cdf.partition_point(|&c| c < p).clamp(1, xs.len() - 1);
        let (c0, c1) = (cdf[i - 1], cdf[i]);
        if c1 > c0 {
            xs[i - 1] + (p - c0) / (c1 - c0) * (xs[i] - xs[i - 1])
        } else {
            xs[i]
        }
    };
    let tail = 0.5 * (1.0 - level);
    Ok(DensitySummary {
        mean,
        sd,
        mode,
        median: quantile(0.5),
        lower: quantile(tail),
        upper: quantile(1.0 - tail),
        level,
    })
}

/// Mean, mode, median and equal-tailed interval of a posterior grid.
pub fn grid_summaries(grid: &AlphaPosteriorGrid, level: f64) -> Result<DensitySummary> {
    summarize_curve(grid.alphas(), &grid.density(), level)
}
