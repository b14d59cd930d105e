//! Versioned JSON scenario files.
//!
//! ```json
//! {
//!   "version": 1,
//!   "seed": 7,
//!   "grid": { "mode": "transformed", "count": 1000, "y_lo": 0.01, "y_hi": 0.99 },
//!   "tolerance": { "eps_compare": 1e-9 },
//!   "systems": {
//!     "x": { "kind": "series", "components": [ { "alpha": 0.02, "beta": 0.2 } ] },
//!     "y": { "kind": "series", "components": [ { "alpha": 0.01, "beta": 0.1 } ] }
//!   },
//!   "tasks": [ { "task": "compare", "a": "x", "b": "y", "relation": "hr" } ]
//! }
//! ```
//!
//! Grid bounds are always probability levels `y` in `(0, 1)`; a raw grid
//! spans the lifetimes `-log(1 - y)` between them.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::orders::{EvalGrid, GridMode, Relation, TolerancePolicy, DEFAULT_COUNT, DEFAULT_Y_HI, DEFAULT_Y_LO};
use crate::report::Quantity;
use crate::search::{Constraint, ParamBox, SearchSpec};
use crate::systems::{ComponentSet, SystemDist, SystemKind};
use crate::theorems::TheoremId;

pub const SCENARIO_VERSION: u32 = 1;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridOverrides {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode: Option<GridMode>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub count: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub y_lo: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub y_hi: Option<f64>,
}

impl GridOverrides {
    /// Fields set in `other` win.
    pub fn merged(&self, other: &GridOverrides) -> GridOverrides {
        GridOverrides {
            mode: other.mode.or(self.mode),
            count: other.count.or(self.count),
            y_lo: other.y_lo.or(self.y_lo),
            y_hi: other.y_hi.or(self.y_hi),
        }
    }

    pub fn build(&self) -> Result<EvalGrid> {
        let lo = self.y_lo.unwrap_or(DEFAULT_Y_LO);
        let hi = self.y_hi.unwrap_or(DEFAULT_Y_HI);
        let count = self.count.unwrap_or(DEFAULT_COUNT);
        if !(0.0 < lo && lo < hi && hi < 1.0) {
            return Err(Error::Grid(format!("need 0 < y_lo < y_hi < 1, got {lo} and {hi}")));
        }
        match self.mode.unwrap_or(GridMode::TransformedY) {
            GridMode::TransformedY => EvalGrid::transformed(lo, hi, count),
            GridMode::RawX => EvalGrid::raw_linspace(-(-lo).ln_1p(), -(-hi).ln_1p(), count),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToleranceOverrides {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps_compare: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps_monotone: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sf_floor: Option<f64>,
}

impl ToleranceOverrides {
    /// Sets both comparison slacks to `eps`.
    pub fn uniform(eps: f64) -> Self {
        ToleranceOverrides {
            eps_compare: Some(eps),
            eps_monotone: Some(eps),
            sf_floor: None,
        }
    }

    pub fn merged(&self, other: &ToleranceOverrides) -> ToleranceOverrides {
        ToleranceOverrides {
            eps_compare: other.eps_compare.or(self.eps_compare),
            eps_monotone: other.eps_monotone.or(self.eps_monotone),
            sf_floor: other.sf_floor.or(self.sf_floor),
        }
    }

    pub fn build(&self) -> Result<TolerancePolicy> {
        let d = TolerancePolicy::default();
        TolerancePolicy::new(
            self.eps_compare.unwrap_or(d.eps_compare),
            self.eps_monotone.unwrap_or(d.eps_monotone),
            self.sf_floor.unwrap_or(d.sf_floor),
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemDef {
    pub kind: SystemKind,
    pub components: ComponentSet,
}

impl SystemDef {
    pub fn dist(&self) -> SystemDist {
        SystemDist::new(self.kind, self.components.clone())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "task", rename_all = "snake_case")]
pub enum Task {
    /// Is system `a` smaller than system `b` in `relation`?
    Compare { a: String, b: String, relation: Relation },
    /// Conditions and numeric check of one theorem for `x <= y`.
    Theorem { theorem: TheoremId, x: String, y: String },
    Search {
        n: usize,
        relation: Relation,
        system_kind: SystemKind,
        #[serde(default)]
        regime: Vec<Constraint>,
        param_box: ParamBox,
        budget: u64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        seed: Option<u64>,
    },
    Mc {
        system: String,
        size: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        against: Option<String>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        seed: Option<u64>,
    },
    Curve {
        figure_id: String,
        quantity: Quantity,
        x: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        y: Option<String>,
    },
}

impl Task {
    fn system_refs(&self) -> Vec<&str> {
        match self {
            Task::Compare { a, b, .. } => vec![a, b],
            Task::Theorem { x, y, .. } => vec![x, y],
            Task::Search { .. } => vec![],
            Task::Mc { system, against, .. } => {
                std::iter::once(system.as_str()).chain(against.as_deref()).collect()
            }
            Task::Curve { x, y, .. } => std::iter::once(x.as_str()).chain(y.as_deref()).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub version: u32,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "is_default")]
    pub grid: GridOverrides,
    #[serde(default, skip_serializing_if = "is_default")]
    pub tolerance: ToleranceOverrides,
    #[serde(default)]
    pub systems: BTreeMap<String, SystemDef>,
    #[serde(default)]
    pub tasks: Vec<Task>,
}

fn is_default<T: Default + PartialEq>(v: &T) -> bool {
    *v == T::default()
}

impl Scenario {
    pub fn from_json(text: &str) -> Result<Self> {
        let s: Scenario =
            serde_json::from_str(text).map_err(|e| Error::Structural(format!("scenario: {e}")))?;
        s.validate()?;
        Ok(s)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario is plain data")
    }

    pub fn validate(&self) -> Result<()> {
        if self.version != SCENARIO_VERSION {
            return Err(Error::Structural(format!(
                "unsupported scenario version {} (expected {SCENARIO_VERSION})",
                self.version
            )));
        }
        for (i, task) in self.tasks.iter().enumerate() {
            for name in task.system_refs() {
                if !self.systems.contains_key(name) {
                    return Err(Error::Structural(format!("task {i}: unknown system {name:?}")));
                }
            }
            if let Task::Search { .. } = task {
                self.search_spec(task).expect("search task").validate()?;
            }
        }
        self.grid.build()?;
        self.tolerance.build()?;
        Ok(())
    }

    pub fn system(&self, name: &str) -> Result<&SystemDef> {
        self.systems
            .get(name)
            .ok_or_else(|| Error::Structural(format!("unknown system {name:?}")))
    }

    /// The [`SearchSpec`] of a search task, using the scenario seed when the
    /// task has none.
    pub fn search_spec(&self, task: &Task) -> Option<SearchSpec> {
        match task {
            Task::Search {
                n,
                relation,
                system_kind,
                regime,
                param_box,
                budget,
                seed,
            } => Some(SearchSpec {
                n: *n,
                relation: *relation,
                system_kind: *system_kind,
                regime: regime.clone(),
                param_box: *param_box,
                budget: *budget,
                seed: seed.unwrap_or(self.seed),
            }),
            _ => None,
        }
    }
}
