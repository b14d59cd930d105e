//! Seeded counterexample search over `(alpha, beta, alpha*, beta*)` space.
//!
//! Each trial draws one parameter pair inside a box, repairs it into the
//! requested componentwise regime and runs one order checker. Trial `i` uses
//! its own ChaCha8 stream, so the outcome depends only on the spec and seed.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lfr::LfrParams;
use crate::orders::{self, EvalGrid, OrderVerdict, Relation, TolerancePolicy};
use crate::systems::{ComponentSet, SystemDist, SystemKind};

pub const RNG_ALGORITHM: &str = "chacha8-seed_from_u64-stream-per-trial";

const CHUNK: u64 = 64;
const MAX_REJECTIONS: usize = 10_000;

/// One componentwise constraint between an X parameter and its Y counterpart.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Constraint {
    /// `alpha_k >= alpha*_k`
    AlphaGe,
    /// `alpha_k <= alpha*_k`
    AlphaLe,
    /// `beta_k >= beta*_k`
    BetaGe,
    /// `beta_k <= beta*_k`
    BetaLe,
    /// One `beta` shared by all `2n` components.
    BetaCommon,
    /// One `alpha` shared by all `2n` components.
    AlphaCommon,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; 2]", into = "[f64; 2]")]
pub struct Range {
    lo: f64,
    hi: f64,
}

impl TryFrom<[f64; 2]> for Range {
    type Error = Error;

    fn try_from([lo, hi]: [f64; 2]) -> Result<Self> {
        Range::new(lo, hi)
    }
}

impl From<Range> for [f64; 2] {
    fn from(r: Range) -> Self {
        [r.lo, r.hi]
    }
}

impl Range {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite()) || lo < 0.0 {
            return Err(Error::InvalidParameter {
                name: "range.lo",
                value: lo,
                reason: "bounds must be finite and nonnegative",
            });
        }
        if lo >= hi {
            return Err(Error::InvalidParameter {
                name: "range.hi",
                value: hi,
                reason: "must exceed lo",
            });
        }
        Ok(Range { lo, hi })
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn contains(&self, v: f64) -> bool {
        self.lo <= v && v <= self.hi
    }

    fn intersect(&self, other: &Range) -> Option<(f64, f64)> {
        let lo = self.lo.max(other.lo);
        let hi = self.hi.min(other.hi);
        (lo <= hi).then_some((lo, hi))
    }
}

/// Per-parameter sampling ranges.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParamBox {
    pub alpha: Range,
    pub beta: Range,
    pub alpha_star: Range,
    pub beta_star: Range,
}

impl ParamBox {
    /// The same `[lo, hi]` range for all four parameters.
    pub fn uniform(lo: f64, hi: f64) -> Result<Self> {
        let r = Range::new(lo, hi)?;
        Ok(ParamBox {
            alpha: r,
            beta: r,
            alpha_star: r,
            beta_star: r,
        })
    }

    pub fn new(alpha: Range, beta: Range, alpha_star: Range, beta_star: Range) -> Self {
        ParamBox {
            alpha,
            beta,
            alpha_star,
            beta_star,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchSpec {
    pub n: usize,
    pub relation: Relation,
    pub system_kind: SystemKind,
    #[serde(default)]
    pub regime: Vec<Constraint>,
    pub param_box: ParamBox,
    pub budget: u64,
    pub seed: u64,
}

impl SearchSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::Structural("search needs n >= 1 components".into()));
        }
        if self.budget == 0 {
            return Err(Error::Structural("search budget must be at least 1".into()));
        }
        Regime::new(&self.regime, &self.param_box).map(|_| ())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchResult {
    pub found: bool,
    pub witness_pair: Option<(ComponentSet, ComponentSet)>,
    pub verdict: Option<OrderVerdict>,
    pub trials_used: u64,
    pub rng_algorithm: String,
}

/// How one `(p, p*)` parameter pair is drawn.
#[derive(Debug, Clone, Copy)]
enum PairRule {
    Free,
    Ge,
    Le,
    /// `p_k = p*_k`, drawn per component from the box intersection.
    Equal(f64, f64),
    /// One value for every component of both systems.
    Common(f64, f64),
}

struct Regime {
    alpha: PairRule,
    beta: PairRule,
    bx: ParamBox,
}

impl Regime {
    fn new(constraints: &[Constraint], bx: &ParamBox) -> Result<Self> {
        let has = |c| constraints.contains(&c);
        let alpha = Self::rule(
            "alpha",
            has(Constraint::AlphaGe),
            has(Constraint::AlphaLe),
            has(Constraint::AlphaCommon),
            &bx.alpha,
            &bx.alpha_star,
        )?;
        let beta = Self::rule(
            "beta",
            has(Constraint::BetaGe),
            has(Constraint::BetaLe),
            has(Constraint::BetaCommon),
            &bx.beta,
            &bx.beta_star,
        )?;
        Ok(Regime { alpha, beta, bx: *bx })
    }

    fn rule(name: &str, ge: bool, le: bool, common: bool, x: &Range, y: &Range) -> Result<PairRule> {
        let overlap = || {
            x.intersect(y).ok_or_else(|| {
                Error::Unsatisfiable(format!("{name} and {name}* ranges do not overlap"))
            })
        };
        Ok(if common {
            let (lo, hi) = overlap()?;
            PairRule::Common(lo, hi)
        } else if ge && le {
            let (lo, hi) = overlap()?;
            PairRule::Equal(lo, hi)
        } else if ge {
            if x.hi < y.lo {
                return Err(Error::Unsatisfiable(format!("{name} >= {name}* impossible in box")));
            }
            PairRule::Ge
        } else if le {
            if x.lo > y.hi {
                return Err(Error::Unsatisfiable(format!("{name} <= {name}* impossible in box")));
            }
            PairRule::Le
        } else {
            PairRule::Free
        })
    }

    fn draw(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
        if lo == hi {
            lo
        } else {
            rng.gen_range(lo..=hi)
        }
    }

    /// Fills `(p, p*)` for all `n` components.
    fn sample_pairs(
        rng: &mut ChaCha8Rng,
        rule: PairRule,
        x: &Range,
        y: &Range,
        n: usize,
    ) -> Result<(Vec<f64>, Vec<f64>)> {
        if let PairRule::Common(lo, hi) = rule {
            let v = Self::draw(rng, lo, hi);
            return Ok((vec![v; n], vec![v; n]));
        }
        let mut px = Vec::with_capacity(n);
        let mut py = Vec::with_capacity(n);
        for _ in 0..n {
            let (a, b) = match rule {
                PairRule::Equal(lo, hi) => {
                    let v = Self::draw(rng, lo, hi);
                    (v, v)
                }
                PairRule::Free => (Self::draw(rng, x.lo, x.hi), Self::draw(rng, y.lo, y.hi)),
                PairRule::Ge | PairRule::Le => Self::repaired(rng, rule, x, y)?,
                PairRule::Common(..) => unreachable!(),
            };
            px.push(a);
            py.push(b);
        }
        Ok((px, py))
    }

    /// Draws until the swap repair lands both values inside their ranges.
    fn repaired(rng: &mut ChaCha8Rng, rule: PairRule, x: &Range, y: &Range) -> Result<(f64, f64)> {
        for _ in 0..MAX_REJECTIONS {
            let a = Self::draw(rng, x.lo, x.hi);
            let b = Self::draw(rng, y.lo, y.hi);
            let ok = match rule {
                PairRule::Ge => a >= b,
                _ => a <= b,
            };
            if ok {
                return Ok((a, b));
            }
            if x.contains(b) && y.contains(a) {
                return Ok((b, a));
            }
        }
        Err(Error::Unsatisfiable(format!(
            "no admissible pair after {MAX_REJECTIONS} rejections"
        )))
    }

    fn sample(&self, rng: &mut ChaCha8Rng, n: usize) -> Result<(ComponentSet, ComponentSet)> {
        let bx = &self.bx;
        let (a, a_star) = Self::sample_pairs(rng, self.alpha, &bx.alpha, &bx.alpha_star, n)?;
        let (b, b_star) = Self::sample_pairs(rng, self.beta, &bx.beta, &bx.beta_star, n)?;
        let build = |alphas: &[f64], betas: &[f64]| -> Result<ComponentSet> {
            let comps = alphas
                .iter()
                .zip(betas)
                .map(|(&a, &b)| LfrParams::new(a, b))
                .collect::<Result<Vec<_>>>()?;
            ComponentSet::new(comps)
        };
        Ok((build(&a, &b)?, build(&a_star, &b_star)?))
    }
}

fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

/// One pair satisfying `regime` inside `bx`; identical to trial 0 of a
/// search with the same seed.
pub fn realize_regime(
    regime: &[Constraint],
    n: usize,
    bx: &ParamBox,
    seed: u64,
) -> Result<(ComponentSet, ComponentSet)> {
    if n == 0 {
        return Err(Error::Structural("regime needs n >= 1 components".into()));
    }
    Regime::new(regime, bx)?.sample(&mut trial_rng(seed, 0), n)
}

/// Searches for a pair `(X, Y)` inside the regime where `X <= Y` fails.
///
/// Trials run in chunks of 64 in parallel. The first chunk containing any
/// violation ends the search and the violator with the largest `|margin|`
/// is returned (lowest trial index on ties), so the result does not depend
/// on thread scheduling.
pub fn find_violation(spec: &SearchSpec, grid: &EvalGrid, tol: &TolerancePolicy) -> Result<SearchResult> {
    spec.validate()?;
    tol.validate()?;
    let regime = Regime::new(&spec.regime, &spec.param_box)?;

    let mut start = 0;
    while start < spec.budget {
        let end = (start + CHUNK).min(spec.budget);
        let outcomes = (start..end)
            .into_par_iter()
            .map(|trial| {
                let (x, y) = regime.sample(&mut trial_rng(spec.seed, trial), spec.n)?;
                let a = SystemDist::new(spec.system_kind, x.clone());
                let b = SystemDist::new(spec.system_kind, y.clone());
                let verdict = orders::check(spec.relation, &a, &b, grid, tol)?;
                Ok((trial, x, y, verdict))
            })
            .collect::<Result<Vec<_>>>()?;

        let best = outcomes
            .into_iter()
            .filter(|(.., v)| v.violated())
            .reduce(|best, cand| {
                if cand.3.margin.abs() > best.3.margin.abs() {
                    cand
                } else {
                    best
                }
            });
        if let Some((_, x, y, verdict)) = best {
            return Ok(SearchResult {
                found: true,
                witness_pair: Some((x, y)),
                verdict: Some(verdict),
                trials_used: end,
                rng_algorithm: RNG_ALGORITHM.into(),
            });
        }
        start = end;
    }
    Ok(SearchResult {
        found: false,
        witness_pair: None,
        verdict: None,
        trials_used: spec.budget,
        rng_algorithm: RNG_ALGORITHM.into(),
    })
}
