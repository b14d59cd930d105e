//! Grid-based checks of the magnitude (st, hr, lr), transform (star, convex)
//! and variability (disp, Lorenz) stochastic orders.
//!
//! Every checker answers "is `A <= B` in this order?" where `A` is the
//! stochastically smaller candidate. A verdict is a statement about the grid
//! and tolerance it was computed with: `Holds` means no violation was seen at
//! that resolution.

mod grid;
pub mod lorenz;

use serde::{Deserialize, Serialize};

pub use grid::{EvalGrid, GridMode, DEFAULT_COUNT, DEFAULT_Y_HI, DEFAULT_Y_LO};
pub use lorenz::LorenzCurve;

use crate::error::{Error, Result};
use crate::Lifetime;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    St,
    Hr,
    Lr,
    Disp,
    Star,
    Convex,
    Lorenz,
}

impl Relation {
    pub const ALL: [Relation; 7] = [
        Relation::St,
        Relation::Hr,
        Relation::Lr,
        Relation::Disp,
        Relation::Star,
        Relation::Convex,
        Relation::Lorenz,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Relation::St => "st",
            Relation::Hr => "hr",
            Relation::Lr => "lr",
            Relation::Disp => "disp",
            Relation::Star => "star",
            Relation::Convex => "convex",
            Relation::Lorenz => "lorenz",
        }
    }
}

impl std::fmt::Display for Relation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Relation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Relation::ALL
            .into_iter()
            .find(|r| r.name() == s)
            .ok_or_else(|| {
                Error::Structural(format!(
                    "unknown relation {s:?} (expected one of st, hr, lr, disp, star, convex, lorenz)"
                ))
            })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Holds,
    Violated,
    Inconclusive,
}

impl std::fmt::Display for Status {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Status::Holds => "holds",
            Status::Violated => "violated",
            Status::Inconclusive => "inconclusive",
        })
    }
}

/// Numeric slack used by the checkers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TolerancePolicy {
    /// Slack for pointwise inequalities (st, hr, Lorenz).
    pub eps_compare: f64,
    /// Slack for monotonicity and convexity steps (lr, disp, star, convex).
    pub eps_monotone: f64,
    /// Survival/density values below this are not trusted in ratios.
    pub sf_floor: f64,
}

impl Default for TolerancePolicy {
    fn default() -> Self {
        Self {
            eps_compare: 1e-9,
            eps_monotone: 1e-9,
            sf_floor: 1e-300,
        }
    }
}

impl TolerancePolicy {
    pub fn new(eps_compare: f64, eps_monotone: f64, sf_floor: f64) -> Result<Self> {
        let policy = Self {
            eps_compare,
            eps_monotone,
            sf_floor,
        };
        policy.validate()?;
        Ok(policy)
    }

    /// Same slack for comparisons and monotonicity, default floor.
    pub fn uniform(eps: f64) -> Result<Self> {
        Self::new(eps, eps, Self::default().sf_floor)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, value) in [
            ("eps_compare", self.eps_compare),
            ("eps_monotone", self.eps_monotone),
            ("sf_floor", self.sf_floor),
        ] {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::InvalidParameter {
                    name,
                    value,
                    reason: "tolerances must be finite and strictly positive",
                });
            }
        }
        Ok(())
    }
}

/// A grid location where the inequality or monotonicity requirement failed.
///
/// For pointwise orders `lhs`/`rhs` are the two sides of the inequality; for
/// monotone orders they are the value at `point` and at the previous point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub index: usize,
    pub point: f64,
    pub lhs: f64,
    pub rhs: f64,
}

/// Outcome of one numeric order check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrderVerdict {
    pub relation: Relation,
    pub status: Status,
    /// Smallest signed slack observed; negative beyond tolerance means violated.
    pub margin: f64,
    /// Minimum of the compared curve itself, where one exists
    /// (`sf_B - sf_A`, `h_A - h_B`, `Q_B - Q_A`). Separates "goes negative"
    /// from "is not monotone" for the quantile difference.
    pub curve_min: Option<f64>,
    pub tolerance: f64,
    pub resolution: usize,
    pub inconclusive_points: usize,
    /// Sorted by grid index.
    pub witnesses: Vec<Witness>,
}

impl OrderVerdict {
    pub fn holds(&self) -> bool {
        self.status == Status::Holds
    }

    pub fn violated(&self) -> bool {
        self.status == Status::Violated
    }
}

/// Classification of a sequence up to slack `eps`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Monotonicity {
    Nondecreasing,
    Nonincreasing,
    /// `witness` is the first index whose step goes against the majority direction.
    NonMonotone { witness: usize },
}

/// Classifies `values` as nondecreasing / nonincreasing / neither.
///
/// Steps within `eps` count as ties, and a constant sequence is reported as
/// nondecreasing.
pub fn monotone_scan(values: &[f64], eps: f64) -> Result<Monotonicity> {
    if values.len() < 2 {
        return Err(Error::Structural(format!(
            "monotone scan needs at least 2 values, got {}",
            values.len()
        )));
    }
    if let Some(bad) = values.iter().find(|v| !v.is_finite()) {
        return Err(Error::Numeric(format!("monotone scan: non-finite value {bad}")));
    }
    let steps = values.windows(2).map(|w| w[1] - w[0]);
    let up = steps.clone().filter(|&d| d > eps).count();
    let down = steps.clone().filter(|&d| d < -eps).count();
    Ok(if down == 0 {
        Monotonicity::Nondecreasing
    } else if up == 0 {
        Monotonicity::Nonincreasing
    } else if up >= down {
        let i = steps.clone().position(|d| d < -eps).unwrap();
        Monotonicity::NonMonotone { witness: i + 1 }
    } else {
        let i = steps.clone().position(|d| d > eps).unwrap();
        Monotonicity::NonMonotone { witness: i + 1 }
    })
}

/// Collects pointwise slacks `slack = rhs_side - lhs_side` (nonnegative when
/// the order holds at that point).
struct PointwiseTally {
    relation: Relation,
    eps: f64,
    resolution: usize,
    margin: f64,
    witnesses: Vec<Witness>,
    inconclusive: usize,
}

impl PointwiseTally {
    fn new(relation: Relation, eps: f64, resolution: usize) -> Self {
        Self {
            relation,
            eps,
            resolution,
            margin: f64::INFINITY,
            witnesses: Vec::new(),
            inconclusive: 0,
        }
    }

    fn record(&mut self, index: usize, point: f64, lhs: f64, rhs: f64, slack: f64) {
        if !slack.is_finite() {
            self.inconclusive += 1;
            return;
        }
        self.margin = self.margin.min(slack);
        if slack < -self.eps {
            self.witnesses.push(Witness {
                index,
                point,
                lhs,
                rhs,
            });
        }
    }

    fn skip(&mut self) {
        self.inconclusive += 1;
    }

    fn finish(self, curve_min: Option<f64>) -> OrderVerdict {
        let status = if !self.witnesses.is_empty() {
            Status::Violated
        } else if self.inconclusive > 0 {
            Status::Inconclusive
        } else {
            Status::Holds
        };
        OrderVerdict {
            relation: self.relation,
            status,
            margin: if self.margin.is_finite() { self.margin } else { 0.0 },
            curve_min,
            tolerance: self.eps,
            resolution: self.resolution,
            inconclusive_points: self.inconclusive,
            witnesses: self.witnesses,
        }
    }
}

/// A sequence that must be nondecreasing. Entries are `(point, scanned, shown)`,
/// where `scanned` is the value tested for monotonicity and `shown` the value
/// reported in witnesses; `None` marks an inconclusive point.
fn monotone_verdict(
    relation: Relation,
    eps: f64,
    entries: &[Option<(f64, f64, f64)>],
    curve_min: Option<f64>,
) -> Result<OrderVerdict> {
    let mut tally = PointwiseTally::new(relation, eps, entries.len());
    let mut prev: Option<(f64, f64)> = None;
    let mut scanned = Vec::with_capacity(entries.len());
    for (index, entry) in entries.iter().enumerate() {
        match entry {
            Some((point, value, shown)) => {
                if let Some((prev_value, prev_shown)) = prev {
                    tally.record(index, *point, *shown, prev_shown, value - prev_value);
                }
                prev = Some((*value, *shown));
                scanned.push(*value);
            }
            None => tally.skip(),
        }
    }
    let verdict = tally.finish(curve_min);
    if scanned.len() >= 2 {
        let shape = monotone_scan(&scanned, eps)?;
        debug_assert_eq!(
            shape == Monotonicity::Nondecreasing,
            verdict.witnesses.is_empty()
        );
    }
    Ok(verdict)
}

fn min_of(values: impl Iterator<Item = f64>) -> Option<f64> {
    values.filter(|v| v.is_finite()).reduce(f64::min)
}

/// Usual stochastic order: `sf_A(x) <= sf_B(x)` at every grid point.
pub fn check_st<A, B>(a: &A, b: &B, grid: &EvalGrid, tol: &TolerancePolicy) -> Result<OrderVerdict>
where
    A: Lifetime + ?Sized,
    B: Lifetime + ?Sized,
{
    tol.validate()?;
    let xs = grid.x_points();
    let mut tally = PointwiseTally::new(Relation::St, tol.eps_compare, xs.len());
    let mut diffs = Vec::with_capacity(xs.len());
    for (i, &x) in xs.iter().enumerate() {
        let (sa, sb) = (a.sf(x)?, b.sf(x)?);
        tally.record(i, x, sa, sb, sb - sa);
        diffs.push(sb - sa);
    }
    Ok(tally.finish(min_of(diffs.into_iter())))
}

/// Hazard rate order: `h_A(x) >= h_B(x)`.
///
/// The origin is checked in addition to the grid: hazards are finite there
/// and the inequality on `[0, x_1)` is what makes the order imply `st` on
/// the grid. Hazards that are not closed form (`pdf / sf`) are only trusted
/// while both survivals stay above `sf_floor`.
pub fn check_hr<A, B>(a: &A, b: &B, grid: &EvalGrid, tol: &TolerancePolicy) -> Result<OrderVerdict>
where
    A: Lifetime + ?Sized,
    B: Lifetime + ?Sized,
{
    tol.validate()?;
    let xs: Vec<f64> = std::iter::once(0.0).chain(grid.x_points()).collect();
    let mut tally = PointwiseTally::new(Relation::Hr, tol.eps_compare, xs.len());
    let mut diffs = Vec::with_capacity(xs.len());
    for (i, &x) in xs.iter().enumerate() {
        let a_ok = a.closed_form_hazard() || a.sf(x)? >= tol.sf_floor;
        let b_ok = b.closed_form_hazard() || b.sf(x)? >= tol.sf_floor;
        if !(a_ok && b_ok) {
            tally.skip();
            continue;
        }
        let (ha, hb) = (a.hrf(x)?, b.hrf(x)?);
        tally.record(i, x, ha, hb, ha - hb);
        diffs.push(ha - hb);
    }
    Ok(tally.finish(min_of(diffs.into_iter())))
}

/// Points scanned by the likelihood ratio check beyond the last grid point.
pub const LR_TAIL_POINTS: usize = 64;

/// Likelihood ratio order: `pdf_B(x) / pdf_A(x)` nondecreasing.
///
/// Monotonicity is scanned on the log of the ratio, which is scale free; the
/// witnesses report the ratio itself. Besides the grid, the scan covers the
/// origin and [`LR_TAIL_POINTS`] points past the grid, spaced geometrically
/// in `A`'s cumulative hazard up to `-log(sf_floor)`: the hazard order at a
/// grid point depends on the ratio everywhere to its right. Extension points
/// where a density is not representable are left out rather than counted as
/// inconclusive.
pub fn check_lr<A, B>(a: &A, b: &B, grid: &EvalGrid, tol: &TolerancePolicy) -> Result<OrderVerdict>
where
    A: Lifetime + ?Sized,
    B: Lifetime + ?Sized,
{
    tol.validate()?;
    let floor = tol.sf_floor.ln();
    let entry = |x: f64| -> Result<Option<(f64, f64, f64)>> {
        let (la, lb) = (a.ln_pdf(x)?, b.ln_pdf(x)?);
        if la.is_nan() || la < floor || !lb.is_finite() {
            return Ok(None);
        }
        let log_ratio = lb - la;
        Ok(Some((x, log_ratio, log_ratio.exp())))
    };

    let xs = grid.x_points();
    let mut entries = Vec::with_capacity(xs.len() + LR_TAIL_POINTS + 1);
    if let Some(e) = entry(0.0)? {
        entries.push(Some(e));
    }
    for &x in &xs {
        entries.push(entry(x)?);
    }
    let h_last = a.cum_hazard(xs[xs.len() - 1])?;
    let h_max = -floor;
    if h_last > 0.0 && h_last < h_max {
        let growth = (h_max / h_last).ln() / LR_TAIL_POINTS as f64;
        for k in 1..=LR_TAIL_POINTS {
            let x = a.inverse_cum_hazard(h_last * (growth * k as f64).exp())?;
            if let Some(e) = entry(x)? {
                entries.push(Some(e));
            }
        }
    }
    monotone_verdict(Relation::Lr, tol.eps_monotone, &entries, None)
}

/// Dispersive order: `Q_B(p) - Q_A(p)` nondecreasing in `p`.
pub fn check_disp<A, B>(a: &A, b: &B, grid: &EvalGrid, tol: &TolerancePolicy) -> Result<OrderVerdict>
where
    A: Lifetime + ?Sized,
    B: Lifetime + ?Sized,
{
    tol.validate()?;
    let entries = grid
        .p_points()
        .into_iter()
        .map(|p| {
            let d = b.quantile(p)? - a.quantile(p)?;
            Ok(Some((p, d, d)))
        })
        .collect::<Result<Vec<_>>>()?;
    let curve_min = min_of(entries.iter().flatten().map(|e| e.1));
    monotone_verdict(Relation::Disp, tol.eps_monotone, &entries, curve_min)
}

/// `G^{-1}(F(x))`, composed on the cumulative hazard scale.
pub(crate) fn compose<A, B>(a: &A, b: &B, x: f64) -> Result<f64>
where
    A: Lifetime + ?Sized,
    B: Lifetime + ?Sized,
{
    b.inverse_cum_hazard(a.cum_hazard(x)?)
}

/// Star order: `G^{-1}(F(x)) / x` nondecreasing in `x`.
pub fn check_star<A, B>(a: &A, b: &B, grid: &EvalGrid, tol: &TolerancePolicy) -> Result<OrderVerdict>
where
    A: Lifetime + ?Sized,
    B: Lifetime + ?Sized,
{
    tol.validate()?;
    let entries = grid
        .x_points()
        .into_iter()
        .map(|x| {
            let r = compose(a, b, x)? / x;
            Ok(r.is_finite().then_some((x, r, r)))
        })
        .collect::<Result<Vec<_>>>()?;
    monotone_verdict(Relation::Star, tol.eps_monotone, &entries, None)
}

/// Convex transform order: `G^{-1}(F(x))` convex in `x`.
///
/// Convexity is tested as nondecreasing divided-difference slopes, which
/// handles non-uniform grids; the origin `(0, 0)` is included as the first
/// node since `G^{-1}(F(0)) = 0` for lifetimes. Witnesses report the right
/// and left slopes at the offending node.
pub fn check_convex<A, B>(a: &A, b: &B, grid: &EvalGrid, tol: &TolerancePolicy) -> Result<OrderVerdict>
where
    A: Lifetime + ?Sized,
    B: Lifetime + ?Sized,
{
    tol.validate()?;
    let xs: Vec<f64> = std::iter::once(0.0).chain(grid.x_points()).collect();
    let hs = xs
        .iter()
        .map(|&x| compose(a, b, x))
        .collect::<Result<Vec<_>>>()?;
    // slope j spans nodes j..j+1 and is reported at its left node j
    let entries: Vec<Option<(f64, f64, f64)>> = (0..xs.len() - 1)
        .map(|j| {
            let s = (hs[j + 1] - hs[j]) / (xs[j + 1] - xs[j]);
            s.is_finite().then_some((xs[j], s, s))
        })
        .collect();
    let mut verdict = monotone_verdict(Relation::Convex, tol.eps_monotone, &entries, None)?;
    verdict.resolution = grid.count();
    Ok(verdict)
}

/// Lorenz order: `L_A(t) <= L_B(t)` with `L(t) = (1/E) int_t^1 Q(u) du`,
/// evaluated at the grid's probability levels.
pub fn check_lorenz<A, B>(a: &A, b: &B, grid: &EvalGrid, tol: &TolerancePolicy) -> Result<OrderVerdict>
where
    A: Lifetime + ?Sized,
    B: Lifetime + ?Sized,
{
    tol.validate()?;
    let ts = grid.p_points();
    let mut tally = PointwiseTally::new(Relation::Lorenz, tol.eps_compare, ts.len());
    let curves = LorenzCurve::new(a).and_then(|ca| LorenzCurve::new(b).map(|cb| (ca, cb)));
    let (ca, cb) = match curves {
        Ok(c) => c,
        Err(Error::Numeric(_)) => {
            for _ in &ts {
                tally.skip();
            }
            return Ok(tally.finish(None));
        }
        Err(e) => return Err(e),
    };
    for (i, &t) in ts.iter().enumerate() {
        match (ca.upper_share(t), cb.upper_share(t)) {
            (Ok(la), Ok(lb)) => tally.record(i, t, la, lb, lb - la),
            (Err(Error::Numeric(_)), _) | (_, Err(Error::Numeric(_))) => tally.skip(),
            (Err(e), _) | (_, Err(e)) => return Err(e),
        }
    }
    Ok(tally.finish(None))
}

/// Dispatches to the checker for `relation`.
pub fn check<A, B>(
    relation: Relation,
    a: &A,
    b: &B,
    grid: &EvalGrid,
    tol: &TolerancePolicy,
) -> Result<OrderVerdict>
where
    A: Lifetime + ?Sized,
    B: Lifetime + ?Sized,
{
    match relation {
        Relation::St => check_st(a, b, grid, tol),
        Relation::Hr => check_hr(a, b, grid, tol),
        Relation::Lr => check_lr(a, b, grid, tol),
        Relation::Disp => check_disp(a, b, grid, tol),
        Relation::Star => check_star(a, b, grid, tol),
        Relation::Convex => check_convex(a, b, grid, tol),
        Relation::Lorenz => check_lorenz(a, b, grid, tol),
    }
}
