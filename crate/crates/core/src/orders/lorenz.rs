//! Normalized upper quantile integrals `(1/E) * int_t^1 Q(u) du`.
//!
//! The integral is evaluated in the lifetime domain as
//! `int_{Q(t)}^{inf} x f(x) dx`: near `u = 1` the quantile has a logarithmic
//! singularity, while `x f(x)` is smooth and decays like `exp(-H(x))`.

use crate::error::{Error, Result};
use crate::Lifetime;

pub const LORENZ_PANELS: usize = 4096;
/// Survival level at which the lifetime integral is truncated.
pub const TAIL_SURVIVAL: f64 = 1e-16;
const PARTIAL_PANELS: usize = 16;

pub struct LorenzCurve<'a, D: Lifetime + ?Sized> {
    dist: &'a D,
    step: f64,
    x_max: f64,
    /// Tail integrals at even nodes, `tail[k] = int_{2k*step}^{x_max} x f(x) dx`.
    tail: Vec<f64>,
}

impl<'a, D: Lifetime + ?Sized> LorenzCurve<'a, D> {
    pub fn new(dist: &'a D) -> Result<Self> {
        Self::with_panels(dist, LORENZ_PANELS)
    }

    pub fn with_panels(dist: &'a D, panels: usize) -> Result<Self> {
        let panels = panels.max(2) & !1;
        let x_max = dist.inverse_cum_hazard(-TAIL_SURVIVAL.ln())?;
        if !(x_max.is_finite() && x_max > 0.0) {
            return Err(Error::Numeric(format!("lorenz: bad truncation point {x_max}")));
        }
        let step = x_max / panels as f64;
        let integrand = (0..=panels)
            .map(|j| {
                let x = if j == panels { x_max } else { j as f64 * step };
                dist.pdf(x).map(|f| x * f)
            })
            .collect::<Result<Vec<_>>>()?;
        let mut tail = vec![0.0; panels / 2 + 1];
        for k in (0..panels / 2).rev() {
            let j = 2 * k;
            tail[k] = tail[k + 1]
                + step / 3.0 * (integrand[j] + 4.0 * integrand[j + 1] + integrand[j + 2]);
        }
        if !(tail[0].is_finite() && tail[0] > 0.0) {
            return Err(Error::Numeric(format!("lorenz: bad mean {}", tail[0])));
        }
        Ok(Self {
            dist,
            step,
            x_max,
            tail,
        })
    }

    /// Mean lifetime (truncated at survival `TAIL_SURVIVAL`).
    pub fn mean(&self) -> f64 {
        self.tail[0]
    }

    /// `int_t^1 Q(u) du`.
    pub fn upper_integral(&self, t: f64) -> Result<f64> {
        let q = self.dist.quantile(t)?;
        if q >= self.x_max {
            return Ok(0.0);
        }
        let mut node = (q / self.step).ceil() as usize;
        node += node % 2;
        let node = node.min(self.tail.len() * 2 - 2);
        let x_node = if node == self.tail.len() * 2 - 2 {
            self.x_max
        } else {
            node as f64 * self.step
        };
        let partial = if x_node > q {
            let h = (x_node - q) / PARTIAL_PANELS as f64;
            let mut s = 0.0;
            for i in 0..=PARTIAL_PANELS {
                let x = if i == PARTIAL_PANELS { x_node } else { q + i as f64 * h };
                let w = if i == 0 || i == PARTIAL_PANELS {
                    1.0
                } else if i % 2 == 1 {
                    4.0
                } else {
                    2.0
                };
                s += w * x * self.dist.pdf(x)?;
            }
            s * h / 3.0
        } else {
            0.0
        };
        Ok(self.tail[node / 2] + partial)
    }

    /// `(1/E) * int_t^1 Q(u) du`; equals 1 at `t = 0`.
    pub fn upper_share(&self, t: f64) -> Result<f64> {
        Ok(self.upper_integral(t)? / self.mean())
    }
}
