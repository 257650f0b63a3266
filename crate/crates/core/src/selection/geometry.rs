//! Box and lasso selections on the scatter plot.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::SelectionError;
use crate::model::{Params, SimId};

/// One simulation on the scatter plot: `x` is the weighted feature
/// distance, `y` the density distance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScatterPoint {
    pub sim_id: SimId,
    pub x: f64,
    pub y: f64,
    pub params: Params,
}

/// Ids whose point lies in the closed rectangle.
pub fn select_box(
    points: &[ScatterPoint],
    x_min: f64,
    x_max: f64,
    y_min: f64,
    y_max: f64,
) -> Result<BTreeSet<SimId>, SelectionError> {
    if !(x_min <= x_max && y_min <= y_max) {
        return Err(SelectionError::InvertedRect);
    }
    Ok(points
        .iter()
        .filter(|p| x_min <= p.x && p.x <= x_max && y_min <= p.y && p.y <= y_max)
        .map(|p| p.sim_id)
        .collect())
}

fn cross(o: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

/// Closed polygon in data coordinates. The last vertex connects back to
/// the first.
#[derive(Debug, Clone, PartialEq)]
pub struct Polygon {
    vertices: Vec<[f64; 2]>,
}

impl Polygon {
    pub fn new(vertices: Vec<[f64; 2]>) -> Result<Self, SelectionError> {
        if vertices.len() < 3 {
            return Err(SelectionError::TooFewVertices(vertices.len()));
        }
        let origin = vertices[0];
        let spans_area = vertices
            .iter()
            .find(|v| **v != origin)
            .is_some_and(|&a| vertices.iter().any(|&b| cross(origin, a, b) != 0.0));
        if !spans_area {
            return Err(SelectionError::DegeneratePolygon);
        }
        Ok(Self { vertices })
    }

    fn edges(&self) -> impl Iterator<Item = ([f64; 2], [f64; 2])> + '_ {
        let n = self.vertices.len();
        (0..n).map(move |i| (self.vertices[i], self.vertices[(i + 1) % n]))
    }

    /// Even-odd rule; points on an edge or vertex count as inside.
    pub fn contains(&self, p: [f64; 2]) -> bool {
        let on_edge = self.edges().any(|(a, b)| {
            cross(a, b, p) == 0.0
                && a[0].min(b[0]) <= p[0]
                && p[0] <= a[0].max(b[0])
                && a[1].min(b[1]) <= p[1]
                && p[1] <= a[1].max(b[1])
        });
        if on_edge {
            return true;
        }
        let mut inside = false;
        for (a, b) in self.edges() {
            if (a[1] > p[1]) != (b[1] > p[1]) {
                let x_cross = (b[0] - a[0]) * (p[1] - a[1]) / (b[1] - a[1]) + a[0];
                if p[0] < x_cross {
                    inside = !inside;
                }
            }
        }
        inside
    }
}

pub fn select_lasso(points: &[ScatterPoint], vertices: &[[f64; 2]]) -> Result<BTreeSet<SimId>, SelectionError> {
    let polygon = Polygon::new(vertices.to_vec())?;
    Ok(points
        .iter()
        .filter(|p| polygon.contains([p.x, p.y]))
        .map(|p| p.sim_id)
        .collect())
}
