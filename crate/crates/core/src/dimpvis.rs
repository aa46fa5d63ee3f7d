//! Time scrubbing by dragging a bubble along its own trajectory.
//!
//! Each entity's positions across time form a polyline. A drag point is
//! projected onto that polyline, restricted to a window of segments around
//! the current time, and the fractional time found there is applied to every
//! entity at once.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::data::{Dataset, Value};
use crate::landmark::Point2;
use crate::scale::LinearScale;
use crate::scene::{DimpVisSpec, PlotArea};

pub const MIN_RADIUS: f64 = 0.01;
pub const MAX_RADIUS: f64 = 0.06;
pub const DEFAULT_RADIUS: f64 = 0.02;
pub const DEFAULT_WINDOW: usize = 1;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DimpVisError {
    #[error("entity `{entity}` has no observation at time `{time}`")]
    IncompleteSeries { entity: String, time: String },
    #[error("entity `{entity}` is observed twice at time `{time}`")]
    DuplicateObservation { entity: String, time: String },
    #[error("need at least two distinct time values")]
    DegenerateTime,
    #[error("field `{0}` is missing or not numeric")]
    Field(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub entity: String,
    pub positions: Vec<Point2>,
    pub sizes: Vec<f64>,
    /// Source row per time index.
    pub rows: Vec<usize>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    /// Linear interpolation along the polyline at fractional time `t`.
    pub fn point_at(&self, t: f64) -> Point2 {
        let (k, u) = split_time(t, self.len());
        if u == 0.0 {
            return self.positions[k];
        }
        lerp(self.positions[k], self.positions[k + 1], u)
    }

    pub fn size_at(&self, t: f64) -> f64 {
        let (k, u) = split_time(t, self.len());
        if u == 0.0 {
            return self.sizes[k];
        }
        (1.0 - u) * self.sizes[k] + u * self.sizes[k + 1]
    }

    pub fn row_at(&self, t: f64) -> usize {
        self.rows[nearest_index(t, self.len())]
    }

    /// The ±`window` step neighbourhood of `t`, used as the on-screen trail hint.
    pub fn local_segment(&self, t: f64, window: usize) -> &[Point2] {
        let (lo, hi) = window_bounds(t, window, self.len());
        &self.positions[lo..=hi + 1]
    }
}

fn lerp(a: Point2, b: Point2, u: f64) -> Point2 {
    Point2::new((1.0 - u) * a.x + u * b.x, (1.0 - u) * a.y + u * b.y)
}

/// `(k, u)` with `t = k + u`, `u ∈ [0,1)`, and `k` capped at the last index.
fn split_time(t: f64, len: usize) -> (usize, f64) {
    let last = len.saturating_sub(1);
    let t = t.clamp(0.0, last as f64);
    let k = t.floor() as usize;
    if k >= last {
        (last, 0.0)
    } else {
        (k, t - k as f64)
    }
}

fn nearest_index(t: f64, len: usize) -> usize {
    (t.clamp(0.0, (len - 1) as f64).round() as usize).min(len - 1)
}

/// Inclusive segment index range searched around `current_t`.
fn window_bounds(current_t: f64, window: usize, len: usize) -> (usize, usize) {
    let last_segment = len as i64 - 2;
    let lo = current_t.floor() as i64 - window as i64;
    let hi = current_t.ceil() as i64 + window as i64 - 1;
    let lo = lo.clamp(0, last_segment) as usize;
    let hi = hi.clamp(lo as i64, last_segment) as usize;
    (lo, hi)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeCursor {
    pub t: f64,
    pub labels: Vec<String>,
}

impl TimeCursor {
    pub fn max_t(&self) -> f64 {
        (self.labels.len() - 1) as f64
    }

    pub fn set(&mut self, t: f64) {
        self.t = t.clamp(0.0, self.max_t());
    }

    /// Label of the nearest integer time index.
    pub fn label(&self) -> &str {
        &self.labels[nearest_index(self.t, self.labels.len())]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DimpState {
    pub cursor: TimeCursor,
    pub grabbed: Option<String>,
    /// Segments searched on either side of the cursor. A window of at least
    /// `T - 1` searches the whole trajectory.
    pub window: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectories {
    pub trajectories: Vec<Trajectory>,
    pub time_labels: Vec<String>,
    pub x_scale: LinearScale,
    pub y_scale: LinearScale,
}

impl Trajectories {
    pub fn get(&self, entity: &str) -> Option<&Trajectory> {
        self.trajectories.iter().find(|t| t.entity == entity)
    }
}

fn numeric_column(data: &Dataset, field: &str) -> Result<usize, DimpVisError> {
    let idx = data
        .column_index(field)
        .ok_or_else(|| DimpVisError::Field(field.to_string()))?;
    if data.values(idx).all(|v| v.as_f64().is_some()) {
        Ok(idx)
    } else {
        Err(DimpVisError::Field(field.to_string()))
    }
}

fn extent(values: impl Iterator<Item = f64>) -> (f64, f64) {
    values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)))
}

pub fn build_trajectories(data: &Dataset, spec: &DimpVisSpec, plot: &PlotArea) -> Result<Trajectories, DimpVisError> {
    let col = |f: &str| data.column_index(f).ok_or_else(|| DimpVisError::Field(f.to_string()));
    let entity_col = col(&spec.entity_field)?;
    let time_col = col(&spec.time_field)?;
    let x_col = numeric_column(data, &spec.x_field)?;
    let y_col = numeric_column(data, &spec.y_field)?;
    let size_col = spec
        .size_field
        .as_deref()
        .map(|f| numeric_column(data, f))
        .transpose()?;

    let mut times: Vec<&Value> = Vec::new();
    for v in data.values(time_col) {
        if !times.contains(&v) {
            times.push(v);
        }
    }
    times.sort_by(|a, b| a.sort_cmp(b));
    if times.len() < 2 {
        return Err(DimpVisError::DegenerateTime);
    }
    let time_labels: Vec<String> = times.iter().map(|v| v.to_string()).collect();

    let mut entities: Vec<String> = Vec::new();
    let mut cells: BTreeMap<(String, usize), usize> = BTreeMap::new();
    for (row, r) in data.rows.iter().enumerate() {
        let entity = r[entity_col].to_string();
        let ti = times.iter().position(|v| **v == r[time_col]).expect("collected above");
        if !entities.contains(&entity) {
            entities.push(entity.clone());
        }
        if cells.insert((entity.clone(), ti), row).is_some() {
            return Err(DimpVisError::DuplicateObservation {
                entity,
                time: time_labels[ti].clone(),
            });
        }
    }

    let num = |row: usize, c: usize| data.rows[row][c].as_f64().expect("numeric column");
    let x_scale = LinearScale::or_midpoint(extent(data.values(x_col).filter_map(Value::as_f64)), (plot.x0, plot.x1));
    let y_scale = LinearScale::or_midpoint(extent(data.values(y_col).filter_map(Value::as_f64)), (plot.y1, plot.y0));
    let size_scale = size_col.map(|c| {
        LinearScale::or_midpoint(extent(data.values(c).filter_map(Value::as_f64)), (MIN_RADIUS, MAX_RADIUS))
    });

    let mut trajectories = Vec::with_capacity(entities.len());
    for entity in entities {
        let mut t = Trajectory {
            entity: entity.clone(),
            positions: Vec::with_capacity(times.len()),
            sizes: Vec::with_capacity(times.len()),
            rows: Vec::with_capacity(times.len()),
        };
        for (ti, label) in time_labels.iter().enumerate() {
            let row = *cells
                .get(&(entity.clone(), ti))
                .ok_or_else(|| DimpVisError::IncompleteSeries {
                    entity: entity.clone(),
                    time: label.clone(),
                })?;
            t.positions.push(Point2::new(x_scale.scale(num(row, x_col)), y_scale.scale(num(row, y_col))));
            t.sizes.push(match (size_col, &size_scale) {
                (Some(c), Some(s)) => s.scale(num(row, c)),
                _ => DEFAULT_RADIUS,
            });
            t.rows.push(row);
        }
        trajectories.push(t);
    }
    Ok(Trajectories {
        trajectories,
        time_labels,
        x_scale,
        y_scale,
    })
}

fn closest_on_segment(a: Point2, b: Point2, p: Point2) -> (f64, f64) {
    let (dx, dy) = (b.x - a.x, b.y - a.y);
    let len2 = dx * dx + dy * dy;
    let u = if len2 == 0.0 {
        0.0
    } else {
        (((p.x - a.x) * dx + (p.y - a.y) * dy) / len2).clamp(0.0, 1.0)
    };
    (u, lerp(a, b, u).distance(&p))
}

/// Fractional time whose trajectory point is nearest `drag`, searching the
/// segments within `window` steps of `current_t`.
pub fn project_drag(traj: &Trajectory, drag: Point2, current_t: f64, window: usize) -> f64 {
    let max_t = (traj.len() - 1) as f64;
    let current_t = current_t.clamp(0.0, max_t);
    let (lo, hi) = window_bounds(current_t, window, traj.len());
    let mut best: Option<(f64, f64)> = None;
    for k in lo..=hi {
        let (u, d) = closest_on_segment(traj.positions[k], traj.positions[k + 1], drag);
        let t = k as f64 + u;
        best = match best {
            Some((bd, bt)) if bd < d || (bd == d && (bt - current_t).abs() <= (t - current_t).abs()) => {
                Some((bd, bt))
            }
            _ => Some((d, t)),
        };
    }
    best.map_or(current_t, |(_, t)| t).clamp(0.0, max_t)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Placement {
    pub position: Point2,
    pub size: f64,
}

/// Every entity's interpolated position and size at global time `t`.
pub fn positions_at(trajectories: &[Trajectory], t: f64) -> Vec<Placement> {
    trajectories
        .iter()
        .map(|tr| Placement {
            position: tr.point_at(t),
            size: tr.size_at(t),
        })
        .collect()
}
