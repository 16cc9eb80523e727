//! Two-arm trial counts to the summaries the models consume.

use crate::binomial::BinomialSummary;
use crate::error::{Error, Result};
use crate::normal::NormalSummary;
use crate::specfun::std_normal_quantile;

/// Events and participants in two arms; arm A is the treatment of interest.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TwoArmCounts {
    pub events_a: u64,
    pub n_a: u64,
    pub events_b: u64,
    pub n_b: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Arm {
    A,
    B,
}

impl TwoArmCounts {
    pub fn new(events_a: u64, n_a: u64, events_b: u64, n_b: u64) -> Result<Self> {
        for (arm, e, n) in [("A", events_a, n_a), ("B", events_b, n_b)] {
            if n == 0 {
                return Err(Error::domain(format!("arm {arm} has no participants")));
            }
            if e > n {
                return Err(Error::domain(format!("arm {arm}: {e} events exceed {n} participants")));
            }
        }
        Ok(TwoArmCounts {
            events_a,
            n_a,
            events_b,
            n_b,
        })
    }

    pub fn swapped(&self) -> Self {
        TwoArmCounts {
            events_a: self.events_b,
            n_a: self.n_b,
            events_b: self.events_a,
            n_b: self.n_a,
        }
    }

    pub fn risk(&self, arm: Arm) -> f64 {
        let s = arm_summary(self, arm);
        s.x as f64 / s.n as f64
    }
}

/// Log risk ratio of arm A versus arm B with its delta-method standard error.
pub fn log_risk_ratio_summary(counts: &TwoArmCounts) -> Result<NormalSummary> {
    let c = counts;
    for (arm, e, n) in [("A", c.events_a, c.n_a), ("B", c.events_b, c.n_b)] {
        if e == 0 || e == n {
            return Err(Error::ContinuityCorrection(format!(
                "arm {arm} has {e} events out of {n}; the log risk ratio needs 0 < events < n"
            )));
        }
    }
    let (ea, na, eb, nb) = (c.events_a as f64, c.n_a as f64, c.events_b as f64, c.n_b as f64);
    let theta_hat = ((ea / na) / (eb / nb)).ln();
    let sigma = (1.0 / ea - 1.0 / na + 1.0 / eb - 1.0 / nb).sqrt();
    NormalSummary::new(theta_hat, sigma)
}

/// Risk ratio with its Wald confidence interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RiskRatioCi {
    pub rr: f64,
    pub lower: f64,
    pub upper: f64,
}

/// `exp(θ̂)` and `exp(θ̂ ± z σ)` with `z` the `(1 + level)/2` normal quantile.
pub fn risk_ratio_ci(summary: &NormalSummary, level: f64) -> Result<RiskRatioCi> {
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::domain(format!(
            "confidence level must lie in (0, 1), got {level}"
        )));
    }
    let z = std_normal_quantile(0.5 * (1.0 + level))?;
    Ok(RiskRatioCi {
        rr: summary.theta_hat.exp(),
        lower: (summary.theta_hat - z * summary.sigma).exp(),
        upper: (summary.theta_hat + z * summary.sigma).exp(),
    })
}

pub fn arm_summary(counts: &TwoArmCounts, arm: Arm) -> BinomialSummary {
    match arm {
        Arm::A => BinomialSummary {
            x: counts.events_a,
            n: counts.n_a,
        },
        Arm::B => BinomialSummary {
            x: counts.events_b,
            n: counts.n_b,
        },
    }
}

/// Named trials used in the case study (Fidaxomicin vs Vancomycin).
pub mod presets {
    use super::TwoArmCounts;

    /// Current trial.
    pub const CORNELY: TwoArmCounts = TwoArmCounts {
        events_a: 193,
        n_a: 270,
        events_b: 163,
        n_b: 265,
    };

    /// Historical trial.
    pub const LOUIE: TwoArmCounts = TwoArmCounts {
        events_a: 214,
        n_a: 302,
        events_b: 198,
        n_b: 327,
    };

    /// Rounded log risk ratio summaries used for the normal-model analysis.
    pub const CURRENT_LOG_RR: (f64, f64) = (0.15, 0.06);
    pub const HISTORICAL_LOG_RR: (f64, f64) = (0.16, 0.06);

    pub fn by_name(name: &str) -> Option<TwoArmCounts> {
        match name.to_ascii_lowercase().as_str() {
            "cornely" | "cornely2012" => Some(CORNELY),
            "louie" | "louie2011" => Some(LOUIE),
            _ => None,
        }
    }
}
