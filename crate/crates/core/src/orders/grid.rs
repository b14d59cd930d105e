use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_Y_LO: f64 = 0.01;
pub const DEFAULT_Y_HI: f64 = 0.99;
pub const DEFAULT_COUNT: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GridMode {
    /// Points are lifetimes `x > 0`.
    #[serde(rename = "raw")]
    RawX,
    /// Points are `y` in `(0, 1)`, mapped to lifetimes by `x = log(1 / (1 - y))`.
    #[serde(rename = "transformed")]
    TransformedY,
}

/// Finite, strictly increasing evaluation domain.
///
/// The map `x = -log(1 - y)` is a bijection between the two modes, so every
/// grid can be read either as lifetimes ([`EvalGrid::x_points`]) or as
/// probability levels ([`EvalGrid::p_points`]).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawGrid", into = "RawGrid")]
pub struct EvalGrid {
    mode: GridMode,
    points: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct RawGrid {
    mode: GridMode,
    points: Vec<f64>,
}

impl TryFrom<RawGrid> for EvalGrid {
    type Error = Error;

    fn try_from(raw: RawGrid) -> Result<Self> {
        EvalGrid::from_points(raw.mode, raw.points)
    }
}

impl From<EvalGrid> for RawGrid {
    fn from(g: EvalGrid) -> Self {
        RawGrid {
            mode: g.mode,
            points: g.points,
        }
    }
}

fn linspace(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    let step = (hi - lo) / (count - 1) as f64;
    (0..count)
        .map(|i| if i + 1 == count { hi } else { lo + i as f64 * step })
        .collect()
}

impl EvalGrid {
    pub fn from_points(mode: GridMode, points: Vec<f64>) -> Result<Self> {
        if points.len() < 3 {
            return Err(Error::Grid(format!(
                "need at least 3 points, got {}",
                points.len()
            )));
        }
        if let Some(bad) = points.iter().find(|p| !p.is_finite()) {
            return Err(Error::Grid(format!("non-finite point {bad}")));
        }
        if points.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Grid("points must be strictly increasing".into()));
        }
        match mode {
            GridMode::RawX if points[0] <= 0.0 => {
                return Err(Error::Grid("raw x points must be positive".into()))
            }
            GridMode::TransformedY if points[0] <= 0.0 || points[points.len() - 1] >= 1.0 => {
                return Err(Error::Grid("transformed y points must lie in (0, 1)".into()))
            }
            _ => {}
        }
        Ok(Self { mode, points })
    }

    pub fn raw(points: Vec<f64>) -> Result<Self> {
        Self::from_points(GridMode::RawX, points)
    }

    pub fn raw_linspace(x_lo: f64, x_hi: f64, count: usize) -> Result<Self> {
        if count < 3 || x_lo.partial_cmp(&x_hi) != Some(std::cmp::Ordering::Less) {
            return Err(Error::Grid(format!(
                "raw grid needs lo < hi and count >= 3 (lo={x_lo}, hi={x_hi}, count={count})"
            )));
        }
        Self::raw(linspace(x_lo, x_hi, count))
    }

    /// `count` equally spaced `y` values on `[y_lo, y_hi]`.
    pub fn transformed(y_lo: f64, y_hi: f64, count: usize) -> Result<Self> {
        if count < 3 || y_lo.partial_cmp(&y_hi) != Some(std::cmp::Ordering::Less) {
            return Err(Error::Grid(format!(
                "transformed grid needs y_lo < y_hi and count >= 3 (y_lo={y_lo}, y_hi={y_hi}, count={count})"
            )));
        }
        Self::from_points(GridMode::TransformedY, linspace(y_lo, y_hi, count))
    }

    pub fn mode(&self) -> GridMode {
        self.mode
    }

    pub fn count(&self) -> usize {
        self.points.len()
    }

    /// Points in the grid's own coordinate (`x` or `y`).
    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn x_points(&self) -> Vec<f64> {
        match self.mode {
            GridMode::RawX => self.points.clone(),
            GridMode::TransformedY => self.points.iter().map(|&y| -(-y).ln_1p()).collect(),
        }
    }

    pub fn p_points(&self) -> Vec<f64> {
        match self.mode {
            GridMode::RawX => self.points.iter().map(|&x| -(-x).exp_m1()).collect(),
            GridMode::TransformedY => self.points.clone(),
        }
    }

    /// Inserts the midpoint of every interval; all original points are kept.
    pub fn refine(&self) -> Self {
        let mut points = Vec::with_capacity(2 * self.points.len() - 1);
        for w in self.points.windows(2) {
            points.push(w[0]);
            points.push(0.5 * (w[0] + w[1]));
        }
        points.push(self.points[self.points.len() - 1]);
        Self {
            mode: self.mode,
            points,
        }
    }

    pub fn lo(&self) -> f64 {
        self.points[0]
    }

    pub fn hi(&self) -> f64 {
        self.points[self.points.len() - 1]
    }
}

impl Default for EvalGrid {
    fn default() -> Self {
        Self::transformed(DEFAULT_Y_LO, DEFAULT_Y_HI, DEFAULT_COUNT)
            .expect("default grid is valid")
    }
}
