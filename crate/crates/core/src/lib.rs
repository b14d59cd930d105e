//! Lifetime distributions of series and parallel systems built from
//! independent, heterogeneous linear failure rate (LFR) components, and
//! grid-based numeric checks of the magnitude, transform and variability
//! stochastic orders between two such systems.
//!
//! The crate is organized bottom-up:
//!
//! * [`lfr`]: one component, `hazard(x) = alpha + beta * x`.
//! * [`systems`]: minimum (series) and maximum (parallel) of `n` components.
//! * [`orders`]: st / hr / lr / disp / star / convex / Lorenz checkers.
//! * [`theorems`]: sufficient conditions on the parameters, bound to checkers.
//! * [`search`]: seeded counterexample search inside parameter regimes.
//! * [`mc`]: Monte Carlo cross-validation of the analytic forms.
//! * [`report`]: curve tables (CSV) and verdict summaries (JSON).
//! * [`presets`]: the built-in parameter sets and the regression matrix.
//! * [`scenario`]: the versioned JSON scenario format used by the CLI.
//!
//! An order verdict of `Holds` always means "no violation found on this grid
//! at this tolerance", never a proof.

pub mod error;
pub mod lfr;
pub mod mc;
pub mod orders;
pub mod presets;
pub mod report;
pub mod scenario;
pub mod search;
pub mod systems;
pub mod theorems;

pub use error::{Error, Result};
pub use lfr::LfrParams;
pub use mc::{ecdf_agreement, sample_system, KsReport, SampleBatch};
pub use orders::{
    monotone_scan, EvalGrid, GridMode, Monotonicity, OrderVerdict, Relation, Status,
    TolerancePolicy, Witness,
};
pub use report::{emit_curve, emit_verdict_summary, Curve, CurveSpec, Quantity};
pub use search::{find_violation, realize_regime, Constraint, ParamBox, SearchResult, SearchSpec};
pub use systems::{ComponentSet, SystemDist, SystemKind};
pub use theorems::{conditions_hold, run_case, TheoremCase, TheoremId};

/// Common evaluation surface for a nonnegative lifetime distribution.
///
/// Order checkers are written against this trait so that components and
/// whole systems can be compared interchangeably.
pub trait Lifetime {
    fn cdf(&self, x: f64) -> Result<f64>;
    fn sf(&self, x: f64) -> Result<f64>;
    fn pdf(&self, x: f64) -> Result<f64>;
    fn hrf(&self, x: f64) -> Result<f64>;
    fn ln_pdf(&self, x: f64) -> Result<f64>;

    /// `-log sf(x)`.
    fn cum_hazard(&self, x: f64) -> Result<f64>;

    /// Smallest `x` with `cum_hazard(x) = h`. Composing through the hazard
    /// scale keeps `G^{-1}(F(x))` accurate where `F(x)` rounds to 1.
    fn inverse_cum_hazard(&self, h: f64) -> Result<f64>;

    fn quantile(&self, u: f64) -> Result<f64>;

    /// Whether `hrf` is an exact closed form; otherwise it is `pdf / sf` and
    /// only meaningful while `sf` stays above the floor.
    fn closed_form_hazard(&self) -> bool {
        true
    }
}
