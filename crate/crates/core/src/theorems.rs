//! Sufficient parameter conditions for ordering two systems, each bound to
//! the numeric checker of the order it claims.
//!
//! Convention: the claim is always "X <= Y", with the X-system passed first.
//! A case whose conditions are met but whose check comes back `Violated` is
//! flagged discrepant and reported as such, never dropped.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::orders::{self, EvalGrid, OrderVerdict, Relation, TolerancePolicy};
use crate::search::Constraint;
use crate::systems::{ComponentSet, SystemDist, SystemKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TheoremId {
    /// `alpha_k >= alpha*_k`, `beta_k >= beta*_k`  =>  series st.
    SeriesSt,
    /// Same conditions  =>  series hr.
    SeriesHr,
    /// Common shape `alpha`, `beta_k >= beta*_k`  =>  series hr.
    SeriesHrCommonAlpha,
    /// Common `beta > 0`, `alpha_k >= alpha*_k`  =>  series lr.
    SeriesLr,
    /// `alpha_k >= alpha*_k`, `beta_k >= beta*_k`  =>  parallel st.
    ParallelSt,
    /// Common `beta > 0`, `alpha_k >= alpha*_k`  =>  series disp.
    SeriesDisp,
    /// Common `beta > 0`, `alpha*_k > alpha_k` (strict)  =>  series star.
    SeriesStar,
    /// Same as `SeriesStar`  =>  series Lorenz.
    SeriesLorenz,
    /// Common `beta > 0`, `alpha*_k >= alpha_k`  =>  series convex.
    SeriesConvex,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    XLeY,
    YLeX,
}

impl TheoremId {
    pub const ALL: [TheoremId; 9] = [
        TheoremId::SeriesSt,
        TheoremId::SeriesHr,
        TheoremId::SeriesHrCommonAlpha,
        TheoremId::SeriesLr,
        TheoremId::ParallelSt,
        TheoremId::SeriesDisp,
        TheoremId::SeriesStar,
        TheoremId::SeriesLorenz,
        TheoremId::SeriesConvex,
    ];

    /// The seven main results (corollaries excluded).
    pub const MAIN: [TheoremId; 7] = [
        TheoremId::SeriesSt,
        TheoremId::SeriesHr,
        TheoremId::SeriesLr,
        TheoremId::ParallelSt,
        TheoremId::SeriesDisp,
        TheoremId::SeriesStar,
        TheoremId::SeriesConvex,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            TheoremId::SeriesSt => "series_st",
            TheoremId::SeriesHr => "series_hr",
            TheoremId::SeriesHrCommonAlpha => "series_hr_common_alpha",
            TheoremId::SeriesLr => "series_lr",
            TheoremId::ParallelSt => "parallel_st",
            TheoremId::SeriesDisp => "series_disp",
            TheoremId::SeriesStar => "series_star",
            TheoremId::SeriesLorenz => "series_lorenz",
            TheoremId::SeriesConvex => "series_convex",
        }
    }

    pub fn relation(&self) -> Relation {
        match self {
            TheoremId::SeriesSt | TheoremId::ParallelSt => Relation::St,
            TheoremId::SeriesHr | TheoremId::SeriesHrCommonAlpha => Relation::Hr,
            TheoremId::SeriesLr => Relation::Lr,
            TheoremId::SeriesDisp => Relation::Disp,
            TheoremId::SeriesStar => Relation::Star,
            TheoremId::SeriesLorenz => Relation::Lorenz,
            TheoremId::SeriesConvex => Relation::Convex,
        }
    }

    pub fn system_kind(&self) -> SystemKind {
        match self {
            TheoremId::ParallelSt => SystemKind::Parallel,
            _ => SystemKind::Series,
        }
    }

    pub fn direction(&self) -> Direction {
        Direction::XLeY
    }

    fn needs_common_beta(&self) -> bool {
        matches!(
            self,
            TheoremId::SeriesLr
                | TheoremId::SeriesDisp
                | TheoremId::SeriesStar
                | TheoremId::SeriesLorenz
                | TheoremId::SeriesConvex
        )
    }

    /// Componentwise constraints describing the theorem's condition set, as
    /// used by the counterexample search. Strict inequalities are relaxed to
    /// weak ones here; [`conditions_hold`] applies the exact version.
    pub fn regime(&self) -> Vec<Constraint> {
        use Constraint::*;
        match self {
            TheoremId::SeriesSt | TheoremId::SeriesHr | TheoremId::ParallelSt => {
                vec![AlphaGe, BetaGe]
            }
            TheoremId::SeriesHrCommonAlpha => vec![AlphaCommon, BetaGe],
            TheoremId::SeriesLr | TheoremId::SeriesDisp => vec![AlphaGe, BetaCommon],
            TheoremId::SeriesStar | TheoremId::SeriesLorenz | TheoremId::SeriesConvex => {
                vec![AlphaLe, BetaCommon]
            }
        }
    }
}

impl std::fmt::Display for TheoremId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for TheoremId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        TheoremId::ALL
            .into_iter()
            .find(|t| t.name() == s)
            .ok_or_else(|| Error::Structural(format!("unknown theorem {s:?}")))
    }
}

fn all_equal(values: impl IntoIterator<Item = f64>) -> Option<f64> {
    let mut it = values.into_iter();
    let first = it.next()?;
    it.all(|v| v == first).then_some(first)
}

/// Whether `(x_set, y_set)` satisfies the componentwise conditions of `id`.
///
/// Fails with a structural error when the sets differ in length, or when a
/// common-scale (or common-shape) result is applied to sets that do not
/// share that parameter.
pub fn conditions_hold(id: TheoremId, x_set: &ComponentSet, y_set: &ComponentSet) -> Result<bool> {
    if x_set.len() != y_set.len() {
        return Err(Error::Structural(format!(
            "{id}: systems have {} and {} components",
            x_set.len(),
            y_set.len()
        )));
    }
    let pairs = || x_set.components().iter().zip(y_set.components());
    let alpha_ge = pairs().all(|(x, y)| x.alpha() >= y.alpha());
    let beta_ge = pairs().all(|(x, y)| x.beta() >= y.beta());

    if id.needs_common_beta() {
        let beta = all_equal(x_set.betas().into_iter().chain(y_set.betas())).ok_or_else(|| {
            Error::Structural(format!("{id} requires one common beta across both systems"))
        })?;
        if beta <= 0.0 {
            return Ok(false);
        }
    }

    Ok(match id {
        TheoremId::SeriesSt | TheoremId::SeriesHr | TheoremId::ParallelSt => alpha_ge && beta_ge,
        TheoremId::SeriesHrCommonAlpha => {
            let alpha = all_equal(x_set.alphas().into_iter().chain(y_set.alphas()))
                .ok_or_else(|| {
                    Error::Structural(format!("{id} requires one common alpha across both systems"))
                })?;
            alpha > 0.0 && beta_ge
        }
        TheoremId::SeriesLr | TheoremId::SeriesDisp => alpha_ge,
        TheoremId::SeriesStar | TheoremId::SeriesLorenz => {
            pairs().all(|(x, y)| y.alpha() > x.alpha())
        }
        TheoremId::SeriesConvex => pairs().all(|(x, y)| y.alpha() >= x.alpha()),
    })
}

/// One theorem applied to one parameter pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TheoremCase {
    pub theorem: TheoremId,
    pub relation: Relation,
    pub system_kind: SystemKind,
    pub direction: Direction,
    pub x_set: ComponentSet,
    pub y_set: ComponentSet,
    pub conditions_met: bool,
    pub verdict: OrderVerdict,
    /// Conditions met but the numeric check found a violation.
    pub discrepant: bool,
}

pub fn run_case(
    id: TheoremId,
    x_set: &ComponentSet,
    y_set: &ComponentSet,
    grid: &EvalGrid,
    tol: &TolerancePolicy,
) -> Result<TheoremCase> {
    let conditions_met = conditions_hold(id, x_set, y_set)?;
    let kind = id.system_kind();
    let x = SystemDist::new(kind, x_set.clone());
    let y = SystemDist::new(kind, y_set.clone());
    let verdict = orders::check(id.relation(), &x, &y, grid, tol)?;
    let discrepant = conditions_met && verdict.violated();
    Ok(TheoremCase {
        theorem: id,
        relation: id.relation(),
        system_kind: kind,
        direction: id.direction(),
        x_set: x_set.clone(),
        y_set: y_set.clone(),
        conditions_met,
        verdict,
        discrepant,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::orders::Status;
    use crate::presets;
    use proptest::prelude::*;

    fn set(a: &[f64], b: &[f64]) -> ComponentSet {
        ComponentSet::from_params(a, b).unwrap()
    }

    #[test]
    fn condition_examples() {
        let (x, y) = presets::magnitude_example();
        assert!(conditions_hold(TheoremId::SeriesHr, &x, &y).unwrap());
        assert!(conditions_hold(TheoremId::SeriesSt, &x, &x).unwrap());
        let (x, y) = presets::star_counterexample();
        assert!(!conditions_hold(TheoremId::SeriesStar, &x, &y).unwrap());
    }

    #[test]
    fn structural_errors() {
        let x = set(&[0.1, 0.2], &[1.0, 1.0]);
        let y3 = set(&[0.1, 0.2, 0.3], &[1.0, 1.0, 1.0]);
        assert!(matches!(
            conditions_hold(TheoremId::SeriesSt, &x, &y3),
            Err(Error::Structural(_))
        ));
        let mixed = set(&[0.1, 0.2], &[1.0, 2.0]);
        for id in [
            TheoremId::SeriesLr,
            TheoremId::SeriesDisp,
            TheoremId::SeriesStar,
            TheoremId::SeriesLorenz,
            TheoremId::SeriesConvex,
        ] {
            let err = conditions_hold(id, &x, &mixed).unwrap_err();
            assert!(err.to_string().contains(id.name()), "{err}");
        }
        assert!(conditions_hold(TheoremId::SeriesHrCommonAlpha, &x, &x).is_err());
    }

    #[test]
    fn star_condition_is_strict() {
        let x = set(&[0.1, 0.2], &[1.0, 1.0]);
        assert!(!conditions_hold(TheoremId::SeriesStar, &x, &x).unwrap());
        assert!(conditions_hold(TheoremId::SeriesConvex, &x, &x).unwrap());
    }

    #[test]
    fn run_case_examples() {
        let grid = EvalGrid::default();
        let tol = TolerancePolicy::default();

        let (x, y) = presets::lr_example();
        let case = run_case(TheoremId::SeriesLr, &x, &y, &grid, &tol).unwrap();
        assert!(case.conditions_met);
        assert_eq!(case.verdict.status, Status::Holds);
        assert!(!case.discrepant);

        let (x, _) = presets::magnitude_example();
        let case = run_case(TheoremId::SeriesSt, &x, &x, &grid, &tol).unwrap();
        assert!(case.conditions_met);
        assert_eq!(case.verdict.status, Status::Holds);
        assert_eq!(case.verdict.margin, 0.0);

        let (x, y) = presets::disp_counterexample();
        let case = run_case(TheoremId::SeriesDisp, &x, &y, &grid, &tol).unwrap();
        assert!(!case.conditions_met);
        assert_eq!(case.verdict.status, Status::Violated);
        assert!(!case.discrepant);
    }

    #[test]
    fn lorenz_corollary_on_star_example() {
        let grid = EvalGrid::default();
        let tol = TolerancePolicy::default();
        let (x, y) = presets::star_example();
        let star = run_case(TheoremId::SeriesStar, &x, &y, &grid, &tol).unwrap();
        let lorenz = run_case(TheoremId::SeriesLorenz, &x, &y, &grid, &tol).unwrap();
        assert!(star.verdict.holds());
        assert!(lorenz.conditions_met && lorenz.verdict.holds());
    }

    fn paired(n: usize) -> impl Strategy<Value = (Vec<f64>, Vec<f64>, Vec<f64>, Vec<f64>)> {
        let v = move || proptest::collection::vec(0.01f64..5.0, n);
        (v(), v(), v(), v())
    }

    proptest! {
        #[test]
        fn raising_x_alpha_keeps_ge_conditions((a, b, a2, b2) in paired(3), k in 0usize..3, bump in 0.0f64..3.0) {
            let x = set(&a, &b);
            let y = set(&a2, &b2);
            let mut raised = a.clone();
            raised[k] += bump;
            let x_up = set(&raised, &b);
            for id in [TheoremId::SeriesSt, TheoremId::SeriesHr, TheoremId::ParallelSt] {
                if conditions_hold(id, &x, &y).unwrap() {
                    prop_assert!(conditions_hold(id, &x_up, &y).unwrap());
                }
            }
            let xc = set(&a, &[0.7; 3]);
            let yc = set(&a2, &[0.7; 3]);
            let xc_up = set(&raised, &[0.7; 3]);
            for id in [TheoremId::SeriesLr, TheoremId::SeriesDisp] {
                if conditions_hold(id, &xc, &yc).unwrap() {
                    prop_assert!(conditions_hold(id, &xc_up, &yc).unwrap());
                }
            }
        }

        #[test]
        fn common_alpha_corollary_reduces_to_beta((_, b, _, b2) in paired(4), alpha in 0.01f64..5.0) {
            let x = set(&[alpha; 4], &b);
            let y = set(&[alpha; 4], &b2);
            let beta_ge = b.iter().zip(&b2).all(|(p, q)| p >= q);
            prop_assert_eq!(conditions_hold(TheoremId::SeriesHrCommonAlpha, &x, &y).unwrap(), beta_ge);
            prop_assert_eq!(conditions_hold(TheoremId::SeriesHr, &x, &y).unwrap(), beta_ge);
        }
    }
}
