use thiserror::Error;

/// Errors raised by distribution evaluation, order checks and the search driver.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter {name} = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("{what} = {value} is outside {domain}")]
    Domain {
        what: &'static str,
        value: f64,
        domain: &'static str,
    },

    #[error("invalid grid: {0}")]
    Grid(String),

    #[error("numeric failure: {0}")]
    Numeric(String),

    #[error("{0}")]
    Structural(String),

    #[error("unsatisfiable regime: {0}")]
    Unsatisfiable(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_time(x: f64) -> Result<f64> {
    if x.is_finite() && x >= 0.0 {
        Ok(x)
    } else {
        Err(Error::Domain {
            what: "x",
            value: x,
            domain: "[0, inf)",
        })
    }
}

pub(crate) fn check_probability(u: f64) -> Result<f64> {
    if u.is_finite() && (0.0..1.0).contains(&u) {
        Ok(u)
    } else {
        Err(Error::Domain {
            what: "u",
            value: u,
            domain: "[0, 1)",
        })
    }
}

pub(crate) fn check_cum_hazard(h: f64) -> Result<f64> {
    if !h.is_nan() && h >= 0.0 {
        Ok(h)
    } else {
        Err(Error::Domain {
            what: "cumulative hazard",
            value: h,
            domain: "[0, inf]",
        })
    }
}
