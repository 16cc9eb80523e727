//! Scalar special functions, evaluated in log space where the value can
//! under- or overflow.
//!
//! Densities and mass functions are only exposed as logarithms; callers
//! exponentiate. Beta functions of arguments in the hundreds appear in the
//! beta-binomial kernel and underflow in linear space.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Natural logarithm of a nonnegative quantity. `f64::NEG_INFINITY` encodes zero.
pub type LogValue = f64;

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

/// Below this argument `ln Γ` is shifted up by the recurrence before the
/// asymptotic series is applied.
const STIRLING_CUTOFF: f64 = 15.0;

/// `B_{2k} / (2k (2k - 1))` for k = 1..=7.
const STIRLING_COEFFS: [f64; 7] = [
    1.0 / 12.0,
    -1.0 / 360.0,
    1.0 / 1260.0,
    -1.0 / 1680.0,
    1.0 / 1188.0,
    -691.0 / 360_360.0,
    1.0 / 156.0,
];

const SERIES_REL_EPS: f64 = 1e-15;
const SERIES_SMALL_RUN: usize = 3;
const SERIES_MAX_TERMS: usize = 100_000;

/// Parameters `(p, q)` of a beta distribution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BetaParams {
    pub p: f64,
    pub q: f64,
}

impl BetaParams {
    pub fn new(p: f64, q: f64) -> Result<Self> {
        if !(p > 0.0 && p.is_finite()) || !(q > 0.0 && q.is_finite()) {
            return Err(Error::domain(format!(
                "beta parameters must be positive and finite, got ({p}, {q})"
            )));
        }
        Ok(BetaParams { p, q })
    }

    /// The uniform Be(1, 1).
    pub fn uniform() -> Self {
        BetaParams { p: 1.0, q: 1.0 }
    }

    pub fn mean(&self) -> f64 {
        self.p / (self.p + self.q)
    }
}

fn ln_gamma_unchecked(x: f64) -> f64 {
    let mut z = x;
    let mut prod = 1.0;
    while z < STIRLING_CUTOFF {
        prod *= z;
        z += 1.0;
    }
    let inv = 1.0 / z;
    let inv2 = inv * inv;
    let mut series = 0.0;
    for c in STIRLING_COEFFS.iter().rev() {
        series = series * inv2 + c;
    }
    (z - 0.5) * z.ln() - z + LN_SQRT_2PI + series * inv - prod.ln()
}

/// `ln Γ(x)` for `x > 0`.
///
/// Arguments below 15 are shifted with `Γ(x + 1) = x Γ(x)` and the Stirling
/// series is summed to seven terms.
pub fn log_gamma(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::domain(format!("log_gamma requires x > 0, got {x}")));
    }
    Ok(ln_gamma_unchecked(x))
}

pub(crate) fn ln_beta_unchecked(x: f64, y: f64) -> f64 {
    ln_gamma_unchecked(x) + ln_gamma_unchecked(y) - ln_gamma_unchecked(x + y)
}

/// `ln B(x, y)`.
pub fn log_beta(x: f64, y: f64) -> Result<f64> {
    if !(x > 0.0 && y > 0.0) || !x.is_finite() || !y.is_finite() {
        return Err(Error::domain(format!(
            "log_beta requires positive arguments, got ({x}, {y})"
        )));
    }
    Ok(ln_beta_unchecked(x, y))
}

/// `ln C(n, x)`.
pub fn log_binomial_coefficient(n: u64, x: u64) -> Result<f64> {
    if x > n {
        return Err(Error::domain(format!(
            "binomial coefficient needs x <= n, got {x} > {n}"
        )));
    }
    Ok(ln_choose(n, x))
}

fn ln_choose(n: u64, x: u64) -> f64 {
    if x == 0 || x == n {
        return 0.0;
    }
    let (n, x) = (n as f64, x as f64);
    ln_gamma_unchecked(n + 1.0) - ln_gamma_unchecked(x + 1.0) - ln_gamma_unchecked(n - x + 1.0)
}

/// Log density of `Be(p, q)` at `alpha`.
pub fn beta_log_pdf(alpha: f64, prior: BetaParams) -> Result<LogValue> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::domain(format!(
            "beta density needs alpha in (0, 1), got {alpha}"
        )));
    }
    Ok(beta_log_pdf_split(alpha, 1.0 - alpha, prior))
}

/// Beta log density given both `alpha` and `1 - alpha`.
///
/// The complement is passed separately so it keeps full relative precision
/// next to 1, where `1.0 - alpha` would round to zero.
pub fn beta_log_pdf_split(alpha: f64, one_minus_alpha: f64, prior: BetaParams) -> LogValue {
    let mut lp = -ln_beta_unchecked(prior.p, prior.q);
    if prior.p != 1.0 {
        lp += (prior.p - 1.0) * alpha.ln();
    }
    if prior.q != 1.0 {
        lp += (prior.q - 1.0) * one_minus_alpha.ln();
    }
    lp
}

/// Log mass of `BetaBin(x | n, a, b)`.
pub fn beta_binomial_log_pmf(x: u64, n: u64, a: f64, b: f64) -> Result<LogValue> {
    if x > n {
        return Err(Error::domain(format!("beta-binomial needs x <= n, got {x} > {n}")));
    }
    if !(a > 0.0 && b > 0.0) || !a.is_finite() || !b.is_finite() {
        return Err(Error::domain(format!(
            "beta-binomial shape parameters must be positive, got ({a}, {b})"
        )));
    }
    Ok(beta_binomial_log_pmf_unchecked(x, n, a, b))
}

pub(crate) fn beta_binomial_log_pmf_unchecked(x: u64, n: u64, a: f64, b: f64) -> f64 {
    let (xf, nf) = (x as f64, n as f64);
    ln_choose(n, x) + ln_beta_unchecked(xf + a, nf - xf + b) - ln_beta_unchecked(a, b)
}

/// Sums `ln Σ t_k` for a series with positive terms, `t_0 = 1` and
/// `ln(t_{k+1}/t_k) = log_ratio(k)`.
fn log_positive_series(what: &str, log_ratio: impl Fn(f64) -> f64) -> Result<f64> {
    let mut log_sum = 0.0_f64;
    let mut log_term = 0.0_f64;
    let mut small = 0;
    for k in 0..SERIES_MAX_TERMS {
        let r = log_ratio(k as f64);
        if r == f64::NEG_INFINITY {
            return Ok(log_sum);
        }
        log_term += r;
        log_sum = log_add(log_sum, log_term);
        if log_term - log_sum < SERIES_REL_EPS.ln() {
            small += 1;
            if small >= SERIES_SMALL_RUN {
                return Ok(log_sum);
            }
        } else {
            small = 0;
        }
    }
    Err(Error::Convergence {
        what: what.to_string(),
        estimate: log_sum.exp(),
        error_bound: (log_term - log_sum).exp(),
    })
}

#[inline]
pub(crate) fn log_add(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    if a >= b {
        a + (b - a).exp().ln_1p()
    } else {
        b + (a - b).exp().ln_1p()
    }
}

/// `ln ₂F₁(a, b; c; z)` for `a > 0`, `c > b > 0` and `z <= 0`.
///
/// Uses the Pfaff transformation
/// `₂F₁(a, b; c; z) = (1 - z)^(-a) ₂F₁(a, c - b; c; z / (z - 1))`,
/// whose series has positive terms and argument in `[0, 1)`.
pub fn log_gauss_2f1_negz(a: f64, b: f64, c: f64, z: f64) -> Result<f64> {
    if !(a > 0.0 && b > 0.0 && c > b) || !(z <= 0.0) || !z.is_finite() || !c.is_finite() {
        return Err(Error::domain(format!(
            "2F1 needs a > 0, c > b > 0, finite z <= 0; got a={a}, b={b}, c={c}, z={z}"
        )));
    }
    if z == 0.0 {
        return Ok(0.0);
    }
    let w = z / (z - 1.0);
    let ln_w = w.ln();
    let cb = c - b;
    let series = log_positive_series("Gauss hypergeometric series", |k| {
        ((a + k) * (cb + k) / ((c + k) * (k + 1.0))).ln() + ln_w
    })?;
    Ok(-a * (-z).ln_1p() + series)
}

/// `₂F₁(a, b; c; z)` for `z <= 0`; see [`log_gauss_2f1_negz`].
pub fn gauss_2f1_negz(a: f64, b: f64, c: f64, z: f64) -> Result<f64> {
    log_gauss_2f1_negz(a, b, c, z).map(f64::exp)
}

/// `ln M(a, b, z)` for `b > a > 0` and `z <= 0`.
///
/// Kummer's transformation `M(a, b, z) = e^z M(b - a, b, -z)` turns the
/// alternating series into one with positive terms.
pub fn log_kummer_m(a: f64, b: f64, z: f64) -> Result<f64> {
    if !(a > 0.0 && b > a) || !(z <= 0.0) || !z.is_finite() || !b.is_finite() {
        return Err(Error::domain(format!(
            "Kummer M needs b > a > 0 and finite z <= 0; got a={a}, b={b}, z={z}"
        )));
    }
    if z == 0.0 {
        return Ok(0.0);
    }
    let x = -z;
    let ln_x = x.ln();
    let ba = b - a;
    let series = log_positive_series("confluent hypergeometric series", |k| {
        ((ba + k) / ((b + k) * (k + 1.0))).ln() + ln_x
    })?;
    Ok(z + series)
}

/// Kummer's confluent hypergeometric function `M(a, b, z)` for `z <= 0`.
pub fn kummer_m(a: f64, b: f64, z: f64) -> Result<f64> {
    log_kummer_m(a, b, z).map(f64::exp)
}

/// Standard-normal quantile function (Wichura's AS 241, about 1e-16 relative).
pub fn std_normal_quantile(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::domain(format!("normal quantile needs p in (0, 1), got {p}")));
    }
    const A: [f64; 8] = [
        3.387_132_872_796_366_5,
        133.141_667_891_784_38,
        1_971.590_950_306_551_3,
        13_731.693_765_509_461,
        45_921.953_931_549_87,
        67_265.770_927_008_7,
        33_430.575_583_588_13,
        2_509.080_928_730_122_7,
    ];
    const B: [f64; 8] = [
        1.0,
        42.313_330_701_600_91,
        687.187_007_492_057_9,
        5_394.196_021_424_751,
        21_213.794_301_586_597,
        39_307.895_800_092_71,
        28_729.085_735_721_943,
        5_226.495_278_852_546,
    ];
    const C: [f64; 8] = [
        1.423_437_110_749_683_5,
        4.630_337_846_156_545,
        5.769_497_221_460_691,
        3.647_848_324_763_204_5,
        1.270_458_252_452_368_4,
        0.241_780_725_177_450_6,
        0.022_723_844_989_269_184,
        7.745_450_142_783_414e-4,
    ];
    const D: [f64; 8] = [
        1.0,
        2.053_191_626_637_758_8,
        1.676_384_830_183_803_8,
        0.689_767_334_985_1,
        0.148_103_976_427_480_08,
        0.015_198_666_563_616_457,
        5.475_938_084_995_345e-4,
        1.050_750_071_644_416_9e-9,
    ];
    const E: [f64; 8] = [
        6.657_904_643_501_103,
        5.463_784_911_164_114,
        1.784_826_539_917_291_3,
        0.296_560_571_828_504_9,
        0.026_532_189_526_576_124,
        0.001_242_660_947_388_078_4,
        2.711_555_568_743_487_6e-5,
        2.010_334_399_292_288_1e-7,
    ];
    const F: [f64; 8] = [
        1.0,
        0.599_832_206_555_887_9,
        0.136_929_880_922_735_8,
        0.014_875_361_290_850_615,
        7.868_691_311_456_133e-4,
        1.846_318_317_510_054_8e-5,
        1.421_511_758_316_446e-7,
        2.044_263_103_389_939_7e-15,
    ];
    fn poly(c: &[f64; 8], x: f64) -> f64 {
        c.iter().rev().fold(0.0, |acc, &k| acc * x + k)
    }

    let q = p - 0.5;
    if q.abs() <= 0.425 {
        let r = 0.180_625 - q * q;
        return Ok(q * poly(&A, r) / poly(&B, r));
    }
    let tail = if q < 0.0 { p } else { 1.0 - p };
    let mut r = (-tail.ln()).sqrt();
    let x = if r <= 5.0 {
        r -= 1.6;
        poly(&C, r) / poly(&D, r)
    } else {
        r -= 5.0;
        poly(&E, r) / poly(&F, r)
    };
    Ok(if q < 0.0 { -x } else { x })
}

/// Log density of `Normal(mean, variance)` at `x`.
pub fn normal_log_pdf(x: f64, mean: f64, variance: f64) -> LogValue {
    let d = x - mean;
    -0.5 * (2.0 * PI * variance).ln() - d * d / (2.0 * variance)
}
