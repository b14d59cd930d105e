//! Built-in parameter sets: the worked examples and counterexamples, the
//! figure curves, the reliability curves of the water-supply application
//! and the regression matrix tying each theorem to one example and one
//! counterexample.
//!
//! Where only a regime is known (no numbers), the pair is generated by the
//! seeded search and marked `substitute`.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::orders::{EvalGrid, Relation, Status, TolerancePolicy};
use crate::report::{emit_curve, CurveSpec, Quantity, VerdictRecord, VerdictSummary};
use crate::search::{find_violation, realize_regime, Constraint, ParamBox, SearchSpec};
use crate::systems::{ComponentSet, SystemKind};
use crate::theorems::{run_case, TheoremId};

pub const SUBSTITUTE_SEED: u64 = 20_240_601;
const SUBSTITUTE_BOX: (f64, f64) = (0.01, 1.0);
const SUBSTITUTE_BUDGET: u64 = 64;

type Pair = (ComponentSet, ComponentSet);

fn sets(a: &[f64], b: &[f64], a_star: &[f64], b_star: &[f64]) -> Pair {
    (
        ComponentSet::from_params(a, b).expect("valid preset"),
        ComponentSet::from_params(a_star, b_star).expect("valid preset"),
    )
}

fn common(a: &[f64], a_star: &[f64], beta: f64) -> Pair {
    (
        ComponentSet::with_common_beta(a, beta).expect("valid preset"),
        ComponentSet::with_common_beta(a_star, beta).expect("valid preset"),
    )
}

/// `alpha >= alpha*`, `beta >= beta*` componentwise (three components).
pub fn magnitude_example() -> Pair {
    sets(&[0.02, 0.04, 0.06], &[0.2, 0.5, 0.7], &[0.01, 0.03, 0.05], &[0.1, 0.3, 0.5])
}

/// `alpha < alpha*`, `beta > beta*`: the series hazard difference
/// `-0.03 + 0.3 x` changes sign at `x = 0.1`.
pub fn hr_counterexample() -> Pair {
    sets(&[0.01, 0.03, 0.05], &[0.3, 0.6, 0.8], &[0.02, 0.04, 0.06], &[0.2, 0.5, 0.7])
}

pub fn lr_example() -> Pair {
    common(&[0.02, 0.04, 0.06], &[0.01, 0.03, 0.05], 1.0)
}

pub fn lr_counterexample() -> Pair {
    common(&[0.1, 0.3, 0.5], &[0.2, 0.4, 0.6], 0.1)
}

pub fn parallel_example() -> Pair {
    sets(&[0.2, 0.4, 0.6], &[0.8, 1.0, 1.5], &[0.1, 0.3, 0.5], &[0.3, 0.8, 1.0])
}

pub fn disp_example() -> Pair {
    common(&[0.2, 0.4, 0.6], &[0.1, 0.3, 0.5], 0.05)
}

pub fn disp_counterexample() -> Pair {
    common(&[1.0, 3.0, 5.0], &[2.0, 4.0, 6.0], 2.0)
}

pub fn star_example() -> Pair {
    common(&[0.1, 0.3, 0.5], &[0.2, 0.6, 0.8], 0.5)
}

pub fn star_counterexample() -> Pair {
    common(&[6.2, 6.6, 6.8], &[4.1, 4.3, 4.5], 4.0)
}

pub fn convex_example() -> Pair {
    common(&[0.1, 0.2, 0.3], &[0.4, 0.6, 0.8], 0.5)
}

pub fn convex_counterexample() -> Pair {
    common(&[4.4, 4.6, 5.8], &[3.1, 3.2, 3.3], 2.0)
}

/// Three Rayleigh-type pipes, `alpha = 0`, `beta = (0.01, 0.02, 0.03)`.
pub fn water_pipes() -> ComponentSet {
    ComponentSet::from_params(&[0.0; 3], &[0.01, 0.02, 0.03]).expect("valid preset")
}

fn substitute_box() -> ParamBox {
    ParamBox::uniform(SUBSTITUTE_BOX.0, SUBSTITUTE_BOX.1).expect("valid box")
}

/// A pair in `regime` that violates `relation`, found by the seeded search.
pub fn search_substitute(relation: Relation, kind: SystemKind, regime: &[Constraint], seed: u64) -> Result<Pair> {
    let spec = SearchSpec {
        n: 3,
        relation,
        system_kind: kind,
        regime: regime.to_vec(),
        param_box: substitute_box(),
        budget: SUBSTITUTE_BUDGET,
        seed,
    };
    let r = find_violation(&spec, &EvalGrid::default(), &TolerancePolicy::default())?;
    r.witness_pair.ok_or_else(|| {
        Error::Structural(format!(
            "no {relation} violation in regime {regime:?} within {SUBSTITUTE_BUDGET} trials"
        ))
    })
}

/// A pair in `regime`, with no requirement on any order.
pub fn regime_substitute(regime: &[Constraint], seed: u64) -> Result<Pair> {
    realize_regime(regime, 3, &substitute_box(), seed)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionCase {
    pub label: String,
    pub theorem: TheoremId,
    pub x_set: ComponentSet,
    pub y_set: ComponentSet,
    pub expected: Status,
    #[serde(default)]
    pub substitute: bool,
}

fn case(theorem: TheoremId, role: &str, (x, y): Pair, expected: Status, substitute: bool) -> RegressionCase {
    RegressionCase {
        label: format!("{theorem}/{role}"),
        theorem,
        x_set: x,
        y_set: y,
        expected,
        substitute,
    }
}

/// Seven theorems, each with one pair expected to hold and one expected to
/// violate the order.
pub fn regression_matrix() -> Result<Vec<RegressionCase>> {
    use Constraint::*;
    use Status::{Holds, Violated};
    use TheoremId::*;
    let st_ce = search_substitute(Relation::St, SystemKind::Series, &[AlphaLe, BetaLe], SUBSTITUTE_SEED)?;
    let par_ce = search_substitute(Relation::St, SystemKind::Parallel, &[AlphaLe, BetaLe], SUBSTITUTE_SEED)?;
    Ok(vec![
        case(SeriesSt, "example", magnitude_example(), Holds, true),
        case(SeriesSt, "counterexample", st_ce, Violated, true),
        case(SeriesHr, "example", magnitude_example(), Holds, false),
        case(SeriesHr, "counterexample", hr_counterexample(), Violated, true),
        case(SeriesLr, "example", lr_example(), Holds, false),
        case(SeriesLr, "counterexample", lr_counterexample(), Violated, false),
        case(ParallelSt, "example", parallel_example(), Holds, false),
        case(ParallelSt, "counterexample", par_ce, Violated, true),
        case(SeriesDisp, "example", disp_example(), Holds, false),
        case(SeriesDisp, "counterexample", disp_counterexample(), Violated, false),
        case(SeriesStar, "example", star_example(), Holds, false),
        case(SeriesStar, "counterexample", star_counterexample(), Violated, false),
        case(SeriesConvex, "example", convex_example(), Holds, false),
        case(SeriesConvex, "counterexample", convex_counterexample(), Violated, false),
    ])
}

/// Runs every case and collects the labelled summary.
pub fn run_regression(cases: &[RegressionCase], grid: &EvalGrid, tol: &TolerancePolicy) -> Result<VerdictSummary> {
    let records = cases
        .iter()
        .map(|c| {
            let tc = run_case(c.theorem, &c.x_set, &c.y_set, grid, tol)?;
            Ok(VerdictRecord::from_case(&tc).with_expectation(c.label.clone(), c.expected))
        })
        .collect::<Result<Vec<_>>>()?;
    VerdictSummary::from_records(records)
}

fn curve(
    id: &str,
    quantity: Quantity,
    kind: SystemKind,
    (x, y): Pair,
    grid: &EvalGrid,
    substitute: bool,
) -> CurveSpec {
    CurveSpec {
        figure_id: id.to_string(),
        quantity,
        kind,
        x_set: x,
        y_set: Some(y),
        grid: grid.clone(),
        substitute_params: substitute,
    }
}

/// Curve tables for every figure of the worked examples, plus the two
/// reliability curves of the application.
pub fn figure_presets() -> Result<Vec<CurveSpec>> {
    use Constraint::*;
    use Quantity::*;
    use SystemKind::{Parallel, Series};
    let y_grid = EvalGrid::default();
    let x_grid = EvalGrid::raw_linspace(0.01, 5.0, 1000)?;
    let t_grid = EvalGrid::raw_linspace(0.1, 10.0, 100)?;
    let seed = SUBSTITUTE_SEED;
    let found = |rel, kind, regime: &[Constraint]| search_substitute(rel, kind, regime, seed);
    let drawn = |regime: &[Constraint], k: u64| regime_substitute(regime, seed + k);

    let mut out = vec![
        curve("st_series_example", SfDiff, Series, magnitude_example(), &y_grid, true),
        curve("hr_series_example", HrfDiff, Series, magnitude_example(), &y_grid, false),
        curve(
            "st_series_alpha_lt_beta_gt",
            SfDiff,
            Series,
            found(Relation::St, Series, &[AlphaLe, BetaGe])?,
            &y_grid,
            true,
        ),
        curve("st_series_alpha_gt_beta_lt", SfDiff, Series, drawn(&[AlphaGe, BetaLe], 1)?, &y_grid, true),
        curve("st_series_alpha_lt_beta_lt", SfDiff, Series, drawn(&[AlphaLe, BetaLe], 2)?, &y_grid, true),
        curve(
            "hr_series_alpha_lt_beta_gt",
            HrfDiff,
            Series,
            found(Relation::Hr, Series, &[AlphaLe, BetaGe])?,
            &y_grid,
            true,
        ),
        curve(
            "hr_series_alpha_gt_beta_lt",
            HrfDiff,
            Series,
            found(Relation::Hr, Series, &[AlphaGe, BetaLe])?,
            &y_grid,
            true,
        ),
        curve("hr_series_alpha_lt_beta_lt", HrfDiff, Series, drawn(&[AlphaLe, BetaLe], 3)?, &y_grid, true),
        curve("lr_series_example", PdfRatio, Series, lr_example(), &y_grid, false),
        curve("lr_series_counterexample", PdfRatio, Series, lr_counterexample(), &y_grid, false),
        curve("st_parallel_example", SfDiff, Parallel, parallel_example(), &y_grid, false),
        curve("disp_series_example", QuantileDiff, Series, disp_example(), &y_grid, false),
        curve("st_parallel_alpha_lt_beta_lt", SfDiff, Parallel, drawn(&[AlphaLe, BetaLe], 4)?, &y_grid, true),
        curve(
            "st_parallel_alpha_gt_beta_lt",
            SfDiff,
            Parallel,
            found(Relation::St, Parallel, &[AlphaGe, BetaLe])?,
            &y_grid,
            true,
        ),
        curve(
            "st_parallel_alpha_lt_beta_lt_alt",
            SfDiff,
            Parallel,
            drawn(&[AlphaLe, BetaLe], 5)?,
            &y_grid,
            true,
        ),
        curve("disp_series_counterexample", QuantileDiff, Series, disp_counterexample(), &y_grid, false),
        curve("star_series_example", StarRatio, Series, star_example(), &x_grid, false),
        curve("star_series_counterexample", StarRatio, Series, star_counterexample(), &x_grid, false),
        curve("convex_series_example", ConvexCompose, Series, convex_example(), &x_grid, false),
        curve("convex_series_counterexample", ConvexCompose, Series, convex_counterexample(), &x_grid, false),
    ];
    for (id, quantity) in [("water_series_reliability", SfSeries), ("water_parallel_reliability", SfParallel)] {
        out.push(CurveSpec {
            figure_id: id.to_string(),
            quantity,
            kind: if quantity == SfSeries { Series } else { Parallel },
            x_set: water_pipes(),
            y_set: None,
            grid: t_grid.clone(),
            substitute_params: false,
        });
    }
    Ok(out)
}

/// Writes `path` through a temporary sibling and a rename.
pub fn write_atomic(path: &Path, contents: &[u8]) -> std::io::Result<()> {
    let name = path
        .file_name()
        .ok_or_else(|| std::io::Error::other(format!("{} has no file name", path.display())))?;
    let tmp = path.with_file_name(format!(".{}.tmp", name.to_string_lossy()));
    fs::write(&tmp, contents)?;
    fs::rename(&tmp, path)
}

/// Regression summary as `cases.json` and one `<figure_id>.csv` per curve
/// preset. Returns the summary.
pub fn write_regression_outputs(
    dir: &Path,
    cases: &[RegressionCase],
    grid: &EvalGrid,
    tol: &TolerancePolicy,
) -> Result<VerdictSummary> {
    let io = |e: std::io::Error| Error::Structural(format!("writing {}: {e}", dir.display()));
    fs::create_dir_all(dir).map_err(io)?;
    let summary = run_regression(cases, grid, tol)?;
    let mut json = summary.to_json_pretty();
    json.push('\n');
    write_atomic(&dir.join("cases.json"), json.as_bytes()).map_err(io)?;
    for spec in figure_presets()? {
        let c = emit_curve(&spec)?;
        write_atomic(&dir.join(format!("{}.csv", spec.figure_id)), c.to_csv_string().as_bytes()).map_err(io)?;
    }
    Ok(summary)
}
