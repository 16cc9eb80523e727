//! Marginal posteriors of the power parameter α under normalized power
//! priors with a beta prior on α.
//!
//! Three likelihoods are covered: a scalar normal estimate with known
//! standard error ([`normal`]), a binomial proportion ([`binomial`]) and the
//! normal linear model with known error variance ([`linear`]). Every
//! posterior of α is returned as an [`AlphaPosteriorGrid`], normalized by
//! tanh-sinh quadrature on the continuous integrand. The closed forms for
//! equal estimates and for arbitrarily precise current data are evaluated
//! through the Gauss and Kummer hypergeometric functions in [`specfun`].

#![allow(
    clippy::neg_cmp_op_on_partial_ord,
    clippy::excessive_precision,
    clippy::needless_range_loop
)]

pub mod binomial;
pub mod error;
pub mod ingest;
pub mod linear;
pub mod normal;
pub mod quadrature;
pub mod specfun;

pub use binomial::BinomialSummary;
pub use error::{Error, Result};
pub use ingest::{Arm, RiskRatioCi, TwoArmCounts};
pub use linear::{LinearData, LinearSummary, Matrix};
pub use normal::{NormalSummary, RelativeVariance, ThetaCurve};
pub use quadrature::{AlphaPosteriorGrid, DensitySummary, GridMeta, GridSpec, ModelKind, DEFAULT_TOL};
pub use specfun::{BetaParams, LogValue};
