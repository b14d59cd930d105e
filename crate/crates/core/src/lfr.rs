//! Single-component linear failure rate (LFR) lifetimes.
//!
//! A component with shape `alpha` and scale `beta` has hazard `alpha + beta * x`
//! and cumulative hazard `alpha * x + beta * x^2 / 2`. Everything else follows:
//!
//! * `sf(x)  = exp(-H(x))`
//! * `cdf(x) = 1 - exp(-H(x))`
//! * `pdf(x) = (alpha + beta * x) * exp(-H(x))`
//!
//! `beta = 0` gives the exponential sub-model and `alpha = 0` the Rayleigh
//! sub-model; both are accepted, the all-zero component is not.

use serde::{Deserialize, Serialize};

use crate::error::{check_cum_hazard, check_probability, check_time, Error, Result};
use crate::Lifetime;

/// Shape/scale pair of one LFR component.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawParams", into = "RawParams")]
pub struct LfrParams {
    alpha: f64,
    beta: f64,
}

#[derive(Serialize, Deserialize)]
struct RawParams {
    alpha: f64,
    beta: f64,
}

impl TryFrom<RawParams> for LfrParams {
    type Error = Error;

    fn try_from(raw: RawParams) -> Result<Self> {
        LfrParams::new(raw.alpha, raw.beta)
    }
}

impl From<LfrParams> for RawParams {
    fn from(p: LfrParams) -> Self {
        RawParams {
            alpha: p.alpha,
            beta: p.beta,
        }
    }
}

impl LfrParams {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        for (name, value) in [("alpha", alpha), ("beta", beta)] {
            if !value.is_finite() || value < 0.0 {
                return Err(Error::InvalidParameter {
                    name,
                    value,
                    reason: "must be finite and nonnegative",
                });
            }
        }
        if alpha + beta <= 0.0 {
            return Err(Error::InvalidParameter {
                name: "alpha + beta",
                value: alpha + beta,
                reason: "a component needs a nonzero hazard",
            });
        }
        Ok(Self { alpha, beta })
    }

    pub fn exponential(rate: f64) -> Result<Self> {
        Self::new(rate, 0.0)
    }

    pub fn rayleigh(beta: f64) -> Result<Self> {
        Self::new(0.0, beta)
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    #[inline]
    pub(crate) fn cum_hazard_at(&self, x: f64) -> f64 {
        x * (self.alpha + 0.5 * self.beta * x)
    }

    #[inline]
    pub(crate) fn hazard_at(&self, x: f64) -> f64 {
        self.alpha + self.beta * x
    }

    /// Positive root of `beta/2 x^2 + alpha x - h = 0`, written so that no
    /// cancellation occurs when `beta * h << alpha^2`.
    #[inline]
    pub(crate) fn inverse_cum_hazard_at(&self, h: f64) -> f64 {
        if h == 0.0 {
            return 0.0;
        }
        if h.is_infinite() {
            return f64::INFINITY;
        }
        2.0 * h / (self.alpha + (self.alpha * self.alpha + 2.0 * self.beta * h).sqrt())
    }

    /// `log F(x)` without forming `1 - sf` when the survival is tiny.
    #[inline]
    pub(crate) fn ln_cdf_at(&self, x: f64) -> f64 {
        ln_one_minus_exp_neg(self.cum_hazard_at(x))
    }
}

/// `log(1 - exp(-h))` for `h >= 0`, accurate at both ends.
#[inline]
pub(crate) fn ln_one_minus_exp_neg(h: f64) -> f64 {
    if h <= std::f64::consts::LN_2 {
        (-(-h).exp_m1()).ln()
    } else {
        (-(-h).exp()).ln_1p()
    }
}

/// `-log(1 - u)`: the cumulative hazard at which a lifetime reaches probability `u`.
#[inline]
pub(crate) fn hazard_level(u: f64) -> f64 {
    -(-u).ln_1p()
}

impl Lifetime for LfrParams {
    fn cdf(&self, x: f64) -> Result<f64> {
        let x = check_time(x)?;
        Ok(-(-self.cum_hazard_at(x)).exp_m1())
    }

    fn sf(&self, x: f64) -> Result<f64> {
        let x = check_time(x)?;
        Ok((-self.cum_hazard_at(x)).exp())
    }

    fn pdf(&self, x: f64) -> Result<f64> {
        let x = check_time(x)?;
        Ok(self.hazard_at(x) * (-self.cum_hazard_at(x)).exp())
    }

    fn hrf(&self, x: f64) -> Result<f64> {
        let x = check_time(x)?;
        Ok(self.hazard_at(x))
    }

    fn ln_pdf(&self, x: f64) -> Result<f64> {
        let x = check_time(x)?;
        Ok(self.hazard_at(x).ln() - self.cum_hazard_at(x))
    }

    fn cum_hazard(&self, x: f64) -> Result<f64> {
        let x = check_time(x)?;
        Ok(self.cum_hazard_at(x))
    }

    fn inverse_cum_hazard(&self, h: f64) -> Result<f64> {
        let h = check_cum_hazard(h)?;
        Ok(self.inverse_cum_hazard_at(h))
    }

    fn quantile(&self, u: f64) -> Result<f64> {
        let u = check_probability(u)?;
        Ok(self.inverse_cum_hazard_at(hazard_level(u)))
    }
}
