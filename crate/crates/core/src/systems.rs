//! Series (minimum) and parallel (maximum) systems of independent LFR components.
//!
//! A series system of components `(alpha_k, beta_k)` is itself LFR with the
//! summed parameters, so its quantile is closed form. The parallel system has
//! `F(x) = prod_k F_k(x)`; all of its products are accumulated in log space
//! and its quantile is found by bracketed bisection.

use serde::{Deserialize, Serialize};

use crate::error::{check_cum_hazard, check_probability, check_time, Error, Result};
use crate::lfr::{hazard_level, LfrParams};
use crate::Lifetime;

const MAX_DOUBLINGS: usize = 128;
const MAX_BISECTIONS: usize = 400;

/// Ordered, nonempty list of component parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<LfrParams>", into = "Vec<LfrParams>")]
pub struct ComponentSet {
    components: Vec<LfrParams>,
}

impl TryFrom<Vec<LfrParams>> for ComponentSet {
    type Error = Error;

    fn try_from(components: Vec<LfrParams>) -> Result<Self> {
        ComponentSet::new(components)
    }
}

impl From<ComponentSet> for Vec<LfrParams> {
    fn from(set: ComponentSet) -> Self {
        set.components
    }
}

impl ComponentSet {
    pub fn new(components: Vec<LfrParams>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::Structural(
                "a component set needs at least one component".into(),
            ));
        }
        Ok(Self { components })
    }

    /// Builds a set from parallel `alpha` and `beta` lists.
    pub fn from_params(alphas: &[f64], betas: &[f64]) -> Result<Self> {
        if alphas.len() != betas.len() {
            return Err(Error::Structural(format!(
                "{} alpha values but {} beta values",
                alphas.len(),
                betas.len()
            )));
        }
        let components = alphas
            .iter()
            .zip(betas)
            .map(|(&a, &b)| LfrParams::new(a, b))
            .collect::<Result<Vec<_>>>()?;
        Self::new(components)
    }

    /// Heterogeneous shapes with one common scale.
    pub fn with_common_beta(alphas: &[f64], beta: f64) -> Result<Self> {
        Self::from_params(alphas, &vec![beta; alphas.len()])
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    pub fn components(&self) -> &[LfrParams] {
        &self.components
    }

    pub fn alphas(&self) -> Vec<f64> {
        self.components.iter().map(LfrParams::alpha).collect()
    }

    pub fn betas(&self) -> Vec<f64> {
        self.components.iter().map(LfrParams::beta).collect()
    }

    pub fn alpha_sum(&self) -> f64 {
        self.components.iter().map(LfrParams::alpha).sum()
    }

    pub fn beta_sum(&self) -> f64 {
        self.components.iter().map(LfrParams::beta).sum()
    }

    /// Single LFR law of the series system: `(sum alpha_k, sum beta_k)`.
    pub fn aggregate(&self) -> LfrParams {
        LfrParams::new(self.alpha_sum(), self.beta_sum())
            .expect("sum of valid components is a valid component")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SystemKind {
    Series,
    Parallel,
}

impl std::fmt::Display for SystemKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            SystemKind::Series => "series",
            SystemKind::Parallel => "parallel",
        })
    }
}

impl std::str::FromStr for SystemKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "series" => Ok(SystemKind::Series),
            "parallel" => Ok(SystemKind::Parallel),
            other => Err(Error::Structural(format!(
                "unknown system kind {other:?} (expected series or parallel)"
            ))),
        }
    }
}

/// Lifetime distribution of a series or parallel system.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemDist {
    kind: SystemKind,
    set: ComponentSet,
    aggregate: LfrParams,
}

impl SystemDist {
    pub fn new(kind: SystemKind, set: ComponentSet) -> Self {
        let aggregate = set.aggregate();
        Self {
            kind,
            set,
            aggregate,
        }
    }

    pub fn series(set: ComponentSet) -> Self {
        Self::new(SystemKind::Series, set)
    }

    pub fn parallel(set: ComponentSet) -> Self {
        Self::new(SystemKind::Parallel, set)
    }

    pub fn kind(&self) -> SystemKind {
        self.kind
    }

    pub fn set(&self) -> &ComponentSet {
        &self.set
    }

    fn parallel_ln_cdf(&self, x: f64) -> f64 {
        self.set.components.iter().map(|c| c.ln_cdf_at(x)).sum()
    }

    fn parallel_cum_hazard(&self, x: f64) -> f64 {
        let s = self.parallel_ln_cdf(x);
        // -log(1 - exp(s))
        if s < -std::f64::consts::LN_2 {
            -(-s.exp()).ln_1p()
        } else {
            -(-s.exp_m1()).ln()
        }
    }

    fn parallel_pdf(&self, x: f64) -> f64 {
        let comps = &self.set.components;
        let cdfs: Vec<f64> = comps.iter().map(|c| -(-c.cum_hazard_at(x)).exp_m1()).collect();
        comps
            .iter()
            .enumerate()
            .map(|(j, c)| {
                let density = c.hazard_at(x) * (-c.cum_hazard_at(x)).exp();
                let others: f64 = cdfs
                    .iter()
                    .enumerate()
                    .filter(|&(k, _)| k != j)
                    .map(|(_, &f)| f)
                    .product();
                density * others
            })
            .sum()
    }

    fn parallel_inverse_cum_hazard(&self, target: f64) -> Result<f64> {
        if target == 0.0 {
            return Ok(0.0);
        }
        if target.is_infinite() {
            return Ok(f64::INFINITY);
        }
        // The maximum outlives every component, so each component's point is a lower bound.
        let mut lo = self
            .set
            .components
            .iter()
            .map(|c| c.inverse_cum_hazard_at(target))
            .fold(0.0, f64::max);
        if self.parallel_cum_hazard(lo) >= target {
            return Ok(lo);
        }
        let mut hi = lo;
        let mut bracketed = false;
        for _ in 0..MAX_DOUBLINGS {
            hi *= 2.0;
            if self.parallel_cum_hazard(hi) >= target {
                bracketed = true;
                break;
            }
            lo = hi;
        }
        if !bracketed {
            return Err(Error::Numeric(format!(
                "parallel quantile: no bracket for cumulative hazard {target} after {MAX_DOUBLINGS} doublings"
            )));
        }
        for _ in 0..MAX_BISECTIONS {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.parallel_cum_hazard(mid) < target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        // Return whichever endpoint lands closer to the target.
        let dl = (target - self.parallel_cum_hazard(lo)).abs();
        let dh = (self.parallel_cum_hazard(hi) - target).abs();
        Ok(if dl < dh { lo } else { hi })
    }
}

impl Lifetime for SystemDist {
    fn cdf(&self, x: f64) -> Result<f64> {
        match self.kind {
            SystemKind::Series => self.aggregate.cdf(x),
            SystemKind::Parallel => Ok(self.parallel_ln_cdf(check_time(x)?).exp()),
        }
    }

    fn sf(&self, x: f64) -> Result<f64> {
        match self.kind {
            SystemKind::Series => self.aggregate.sf(x),
            SystemKind::Parallel => Ok(-self.parallel_ln_cdf(check_time(x)?).exp_m1()),
        }
    }

    fn pdf(&self, x: f64) -> Result<f64> {
        match self.kind {
            SystemKind::Series => self.aggregate.pdf(x),
            SystemKind::Parallel => Ok(self.parallel_pdf(check_time(x)?)),
        }
    }

    fn hrf(&self, x: f64) -> Result<f64> {
        match self.kind {
            SystemKind::Series => self.aggregate.hrf(x),
            SystemKind::Parallel => {
                let x = check_time(x)?;
                Ok(self.parallel_pdf(x) / -self.parallel_ln_cdf(x).exp_m1())
            }
        }
    }

    fn ln_pdf(&self, x: f64) -> Result<f64> {
        match self.kind {
            SystemKind::Series => self.aggregate.ln_pdf(x),
            SystemKind::Parallel => Ok(self.parallel_pdf(check_time(x)?).ln()),
        }
    }

    fn cum_hazard(&self, x: f64) -> Result<f64> {
        match self.kind {
            SystemKind::Series => self.aggregate.cum_hazard(x),
            SystemKind::Parallel => Ok(self.parallel_cum_hazard(check_time(x)?)),
        }
    }

    fn inverse_cum_hazard(&self, h: f64) -> Result<f64> {
        match self.kind {
            SystemKind::Series => self.aggregate.inverse_cum_hazard(h),
            SystemKind::Parallel => self.parallel_inverse_cum_hazard(check_cum_hazard(h)?),
        }
    }

    fn quantile(&self, u: f64) -> Result<f64> {
        match self.kind {
            SystemKind::Series => self.aggregate.quantile(u),
            SystemKind::Parallel => {
                self.parallel_inverse_cum_hazard(hazard_level(check_probability(u)?))
            }
        }
    }

    fn closed_form_hazard(&self) -> bool {
        self.kind == SystemKind::Series
    }
}
