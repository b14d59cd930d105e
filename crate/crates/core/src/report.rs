//! Curve tables and verdict summaries.
//!
//! A curve CSV has a two-line header: a `# {json}` metadata comment, then
//! the column names. Rows whose value could not be evaluated carry `NA`.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::orders::{self, EvalGrid, GridMode, Relation, Status, Witness};
use crate::systems::{ComponentSet, SystemDist, SystemKind};
use crate::theorems::{TheoremCase, TheoremId};
use crate::Lifetime;

pub const NA: &str = "NA";
/// Witness lists in summaries are cut to this length; `witness_count`
/// keeps the full number.
pub const MAX_REPORTED_WITNESSES: usize = 25;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Quantity {
    /// `sf_Y(x) - sf_X(x)`
    SfDiff,
    /// `h_X(x) - h_Y(x)`
    HrfDiff,
    /// `g_Y(x) / f_X(x)`
    PdfRatio,
    /// `Q_Y(p) - Q_X(p)`
    QuantileDiff,
    /// `G^{-1}(F(x)) / x`
    StarRatio,
    /// `G^{-1}(F(x))`
    ConvexCompose,
    /// Reliability of the series system of `x_set`.
    SfSeries,
    /// Reliability of the parallel system of `x_set`.
    SfParallel,
}

impl Quantity {
    pub fn needs_pair(&self) -> bool {
        !matches!(self, Quantity::SfSeries | Quantity::SfParallel)
    }

    /// Relation whose checker reads this curve, if any.
    pub fn relation(&self) -> Option<Relation> {
        match self {
            Quantity::SfDiff => Some(Relation::St),
            Quantity::HrfDiff => Some(Relation::Hr),
            Quantity::PdfRatio => Some(Relation::Lr),
            Quantity::QuantileDiff => Some(Relation::Disp),
            Quantity::StarRatio => Some(Relation::Star),
            Quantity::ConvexCompose => Some(Relation::Convex),
            Quantity::SfSeries | Quantity::SfParallel => None,
        }
    }

    fn column(&self, mode: GridMode) -> &'static str {
        match (self, mode) {
            (Quantity::QuantileDiff, _) => "p",
            (_, GridMode::TransformedY) => "y",
            (Quantity::SfSeries | Quantity::SfParallel, GridMode::RawX) => "t",
            (_, GridMode::RawX) => "x",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveSpec {
    pub figure_id: String,
    pub quantity: Quantity,
    pub kind: SystemKind,
    pub x_set: ComponentSet,
    #[serde(default)]
    pub y_set: Option<ComponentSet>,
    pub grid: EvalGrid,
    /// Parameters were generated to realize a regime rather than given.
    #[serde(default)]
    pub substitute_params: bool,
}

impl CurveSpec {
    pub fn validate(&self) -> Result<()> {
        if self.figure_id.is_empty()
            || !self
                .figure_id
                .chars()
                .all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-')
        {
            return Err(Error::Structural(format!(
                "figure id {:?} must be nonempty ASCII alphanumeric, '_' or '-'",
                self.figure_id
            )));
        }
        if self.quantity.needs_pair() && self.y_set.is_none() {
            return Err(Error::Structural(format!(
                "{}: quantity {:?} needs a y_set",
                self.figure_id, self.quantity
            )));
        }
        Ok(())
    }
}

/// A generated table: the spec, one `(point, value)` row per grid point,
/// and the number of rows that failed to evaluate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Curve {
    pub spec: CurveSpec,
    pub column: String,
    pub rows: Vec<(f64, Option<f64>)>,
    pub warnings: usize,
}

#[derive(Serialize)]
struct CurveMeta<'a> {
    figure_id: &'a str,
    quantity: Quantity,
    kind: SystemKind,
    x_set: &'a ComponentSet,
    y_set: Option<&'a ComponentSet>,
    grid_mode: GridMode,
    grid_count: usize,
    grid_lo: f64,
    grid_hi: f64,
    substitute_params: bool,
    warnings: usize,
}

impl Curve {
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        let s = &self.spec;
        let meta = CurveMeta {
            figure_id: &s.figure_id,
            quantity: s.quantity,
            kind: s.kind,
            x_set: &s.x_set,
            y_set: s.y_set.as_ref(),
            grid_mode: s.grid.mode(),
            grid_count: s.grid.count(),
            grid_lo: s.grid.lo(),
            grid_hi: s.grid.hi(),
            substitute_params: s.substitute_params,
            warnings: self.warnings,
        };
        let meta = serde_json::to_string(&meta).map_err(std::io::Error::other)?;
        writeln!(out, "# {meta}")?;
        writeln!(out, "{},value", self.column)?;
        for (p, v) in &self.rows {
            match v {
                Some(v) => writeln!(out, "{p},{v}")?,
                None => writeln!(out, "{p},{NA}")?,
            }
        }
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("csv is ASCII")
    }

    pub fn values(&self) -> impl Iterator<Item = Option<f64>> + '_ {
        self.rows.iter().map(|r| r.1)
    }
}

fn point_value(q: Quantity, x: &SystemDist, y: Option<&SystemDist>, at: f64) -> Result<f64> {
    let pair = || y.expect("validated pair");
    match q {
        Quantity::SfDiff => Ok(pair().sf(at)? - x.sf(at)?),
        Quantity::HrfDiff => Ok(x.hrf(at)? - pair().hrf(at)?),
        Quantity::PdfRatio => Ok((pair().ln_pdf(at)? - x.ln_pdf(at)?).exp()),
        Quantity::QuantileDiff => Ok(pair().quantile(at)? - x.quantile(at)?),
        Quantity::StarRatio => Ok(orders::compose(x, pair(), at)? / at),
        Quantity::ConvexCompose => orders::compose(x, pair(), at),
        Quantity::SfSeries | Quantity::SfParallel => x.sf(at),
    }
}

/// Evaluates `spec.quantity` at every grid point.
///
/// Points that fail to evaluate (or evaluate to a non-finite value) become
/// `None` rows and are counted in `warnings`; only an invalid spec is an
/// error.
pub fn emit_curve(spec: &CurveSpec) -> Result<Curve> {
    spec.validate()?;
    let kind = match spec.quantity {
        Quantity::SfSeries => SystemKind::Series,
        Quantity::SfParallel => SystemKind::Parallel,
        _ => spec.kind,
    };
    let x = SystemDist::new(kind, spec.x_set.clone());
    let y = spec.y_set.clone().map(|s| SystemDist::new(kind, s));
    let eval_at = match spec.quantity {
        Quantity::QuantileDiff => spec.grid.p_points(),
        _ => spec.grid.x_points(),
    };
    let mut warnings = 0;
    let rows = spec
        .grid
        .points()
        .iter()
        .zip(eval_at)
        .map(|(&p, at)| {
            let v = point_value(spec.quantity, &x, y.as_ref(), at)
                .ok()
                .filter(|v| v.is_finite());
            if v.is_none() {
                warnings += 1;
            }
            (p, v)
        })
        .collect();
    Ok(Curve {
        column: spec.quantity.column(spec.grid.mode()).to_string(),
        spec: spec.clone(),
        rows,
        warnings,
    })
}

/// One summary line per theorem case.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerdictRecord {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    pub theorem: TheoremId,
    pub relation: Relation,
    pub system_kind: SystemKind,
    pub x_set: ComponentSet,
    pub y_set: ComponentSet,
    pub conditions_met: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expected: Option<Status>,
    pub status: Status,
    pub margin: f64,
    pub curve_min: Option<f64>,
    pub resolution: usize,
    pub inconclusive_points: usize,
    pub witness_count: usize,
    pub witnesses: Vec<Witness>,
    /// `"DISCREPANT"` when the conditions hold but the check was violated.
    pub flag: Option<String>,
}

impl VerdictRecord {
    pub fn from_case(case: &TheoremCase) -> Self {
        let v = &case.verdict;
        VerdictRecord {
            label: None,
            theorem: case.theorem,
            relation: case.relation,
            system_kind: case.system_kind,
            x_set: case.x_set.clone(),
            y_set: case.y_set.clone(),
            conditions_met: case.conditions_met,
            expected: None,
            status: v.status,
            margin: v.margin,
            curve_min: v.curve_min,
            resolution: v.resolution,
            inconclusive_points: v.inconclusive_points,
            witness_count: v.witnesses.len(),
            witnesses: v.witnesses.iter().take(MAX_REPORTED_WITNESSES).copied().collect(),
            flag: case.discrepant.then(|| "DISCREPANT".to_string()),
        }
    }

    pub fn with_expectation(mut self, label: impl Into<String>, expected: Status) -> Self {
        self.label = Some(label.into());
        self.expected = Some(expected);
        self
    }

    pub fn matches_expectation(&self) -> bool {
        self.expected.is_none_or(|e| e == self.status)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerdictSummary {
    pub case_count: usize,
    pub discrepant_count: usize,
    pub mismatch_count: usize,
    pub records: Vec<VerdictRecord>,
}

impl VerdictSummary {
    pub fn from_records(records: Vec<VerdictRecord>) -> Result<Self> {
        if records.is_empty() {
            return Err(Error::Structural("verdict summary needs at least one case".into()));
        }
        Ok(VerdictSummary {
            case_count: records.len(),
            discrepant_count: records.iter().filter(|r| r.flag.is_some()).count(),
            mismatch_count: records.iter().filter(|r| !r.matches_expectation()).count(),
            records,
        })
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("summary is plain data")
    }
}

pub fn emit_verdict_summary(cases: &[TheoremCase]) -> Result<VerdictSummary> {
    VerdictSummary::from_records(cases.iter().map(VerdictRecord::from_case).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::orders::TolerancePolicy;
    use crate::presets;
    use crate::theorems::run_case;

    fn pair_spec(q: Quantity, x: ComponentSet, y: ComponentSet, grid: EvalGrid) -> CurveSpec {
        CurveSpec {
            figure_id: "t".into(),
            quantity: q,
            kind: SystemKind::Series,
            x_set: x,
            y_set: Some(y),
            grid,
            substitute_params: false,
        }
    }

    #[test]
    fn hazard_difference_is_nonnegative_for_magnitude_example() {
        let (x, y) = presets::magnitude_example();
        let c = emit_curve(&pair_spec(Quantity::HrfDiff, x, y, EvalGrid::default())).unwrap();
        assert_eq!(c.warnings, 0);
        assert!(c.values().all(|v| v.unwrap() >= 0.0));
        // h_X - h_Y = 0.03 + 0.5 x for these sets
        for (p, v) in &c.rows {
            let x = -(-p).ln_1p();
            assert!((v.unwrap() - (0.03 + 0.5 * x)).abs() < 1e-12);
        }
    }

    #[test]
    fn self_difference_is_zero() {
        let (x, _) = presets::magnitude_example();
        for kind in [SystemKind::Series, SystemKind::Parallel] {
            let mut s = pair_spec(Quantity::SfDiff, x.clone(), x.clone(), EvalGrid::default());
            s.kind = kind;
            let c = emit_curve(&s).unwrap();
            assert!(c.values().all(|v| v == Some(0.0)));
        }
    }

    #[test]
    fn series_reliability_closed_form() {
        let set = presets::water_pipes();
        let grid = EvalGrid::raw_linspace(0.1, 10.0, 100).unwrap();
        let s = CurveSpec {
            figure_id: "rel".into(),
            quantity: Quantity::SfSeries,
            kind: SystemKind::Parallel,
            x_set: set,
            y_set: None,
            grid,
            substitute_params: false,
        };
        let c = emit_curve(&s).unwrap();
        assert_eq!(c.column, "t");
        for (t, v) in &c.rows {
            assert!((v.unwrap() - (-0.03 * t * t).exp()).abs() <= 1e-12);
        }
    }

    #[test]
    fn star_ratio_matches_composition_oracle() {
        let (x, y) = presets::star_example();
        let grid = EvalGrid::raw_linspace(0.01, 5.0, 50).unwrap();
        let c = emit_curve(&pair_spec(Quantity::StarRatio, x.clone(), y.clone(), grid)).unwrap();
        // oracle: solve sf_Y(z) = sf_X(x) by bisection
        let dx = SystemDist::series(x);
        let dy = SystemDist::series(y);
        for (at, v) in &c.rows {
            let target = dx.sf(*at).unwrap();
            let (mut lo, mut hi) = (0.0, 100.0);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if dy.sf(mid).unwrap() > target {
                    lo = mid
                } else {
                    hi = mid
                }
            }
            assert!((v.unwrap() - 0.5 * (lo + hi) / at).abs() < 1e-9);
        }
    }

    #[test]
    fn quantile_difference_uses_probability_column() {
        let (x, y) = presets::disp_example();
        let c = emit_curve(&pair_spec(Quantity::QuantileDiff, x, y, EvalGrid::default())).unwrap();
        assert_eq!(c.column, "p");
        let vals: Vec<f64> = c.values().map(Option::unwrap).collect();
        assert!(vals.windows(2).all(|w| w[1] >= w[0] - 1e-12));
    }

    #[test]
    fn failures_become_sentinel_rows() {
        let (x, y) = presets::magnitude_example();
        // parallel hazard is pdf / sf, and both underflow this far out
        let grid = EvalGrid::raw(vec![1.0, 2.0, 1e3]).unwrap();
        let mut s = pair_spec(Quantity::HrfDiff, x, y, grid);
        s.kind = SystemKind::Parallel;
        let c = emit_curve(&s).unwrap();
        assert_eq!(c.warnings, 1);
        assert!(c.rows[2].1.is_none());
        let csv = c.to_csv_string();
        assert!(csv.lines().last().unwrap().ends_with(",NA"));
    }

    #[test]
    fn csv_layout_and_determinism() {
        let (x, y) = presets::magnitude_example();
        let s = pair_spec(Quantity::SfDiff, x, y, EvalGrid::transformed(0.1, 0.9, 5).unwrap());
        let a = emit_curve(&s).unwrap().to_csv_string();
        let b = emit_curve(&s).unwrap().to_csv_string();
        assert_eq!(a, b);
        let lines: Vec<&str> = a.lines().collect();
        assert_eq!(lines.len(), 7);
        assert!(lines[0].starts_with("# {\"figure_id\":\"t\""));
        assert_eq!(lines[1], "y,value");
        assert!(lines[2].starts_with("0.1,"));
    }

    #[test]
    fn pair_quantity_requires_y_set() {
        let (x, _) = presets::magnitude_example();
        let mut s = pair_spec(Quantity::SfDiff, x.clone(), x, EvalGrid::default());
        s.y_set = None;
        assert!(emit_curve(&s).is_err());
        s.quantity = Quantity::SfParallel;
        assert!(emit_curve(&s).is_ok());
        s.figure_id = "../x".into();
        assert!(emit_curve(&s).is_err());
    }

    #[test]
    fn summary_records_and_flags() {
        let grid = EvalGrid::default();
        let tol = TolerancePolicy::default();
        let (x, y) = presets::magnitude_example();
        let same = run_case(TheoremId::SeriesSt, &x, &x, &grid, &tol).unwrap();
        let mut forged = run_case(TheoremId::SeriesHr, &x, &y, &grid, &tol).unwrap();
        forged.verdict.status = Status::Violated;
        forged.discrepant = true;

        let summary = emit_verdict_summary(&[same, forged]).unwrap();
        assert_eq!(summary.case_count, 2);
        assert_eq!(summary.discrepant_count, 1);
        assert_eq!(summary.records[0].margin, 0.0);
        assert_eq!(summary.records[0].flag, None);
        assert_eq!(summary.records[1].flag.as_deref(), Some("DISCREPANT"));
        let json = summary.to_json_pretty();
        assert!(json.contains("\"DISCREPANT\""));
        assert!(emit_verdict_summary(&[]).is_err());
    }

    #[test]
    fn witnesses_are_truncated() {
        let grid = EvalGrid::default();
        let tol = TolerancePolicy::default();
        let (x, y) = presets::magnitude_example();
        let case = run_case(TheoremId::SeriesSt, &y, &x, &grid, &tol).unwrap();
        assert!(case.verdict.witnesses.len() > MAX_REPORTED_WITNESSES);
        let r = VerdictRecord::from_case(&case);
        assert_eq!(r.witnesses.len(), MAX_REPORTED_WITNESSES);
        assert_eq!(r.witness_count, case.verdict.witnesses.len());
    }
}
