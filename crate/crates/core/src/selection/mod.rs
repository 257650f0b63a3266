//! Visual queries: parallel-coordinates filters, scatter selections,
//! subsampling, and deterministic replay of saved selections.

mod filter;
mod geometry;
mod replay;
mod subsample;

pub use filter::{Axis, Clause, FilterError, FilterExpr};
pub use geometry::{select_box, select_lasso, Polygon, ScatterPoint};
pub use replay::{replay, save_selection, scatter_points, select};
pub use subsample::{keeps, subsample};

use crate::distance::DistanceError;
use crate::model::{MethodId, ValidationError};
use crate::store::StoreError;

#[derive(Debug, thiserror::Error)]
pub enum SelectionError {
    #[error("box selection has min > max")]
    InvertedRect,
    #[error("lasso needs at least 3 vertices, got {0}")]
    TooFewVertices(usize),
    #[error("lasso vertices are collinear")]
    DegeneratePolygon,
    #[error("subsample probability {0} outside (0, 1]")]
    InvalidProbability(f64),
    #[error(transparent)]
    Distance(#[from] DistanceError),
    #[error(transparent)]
    Invalid(#[from] ValidationError),
    #[error("method {method_id} has {found} post-processed rows at t = {time_step}, expected {expected}")]
    StaleRecords {
        method_id: MethodId,
        time_step: u32,
        expected: usize,
        found: usize,
    },
    #[error(transparent)]
    Store(#[from] StoreError),
}

impl PartialEq for SelectionError {
    fn eq(&self, other: &Self) -> bool {
        use SelectionError::*;
        match (self, other) {
            (InvertedRect, InvertedRect) | (DegeneratePolygon, DegeneratePolygon) => true,
            (TooFewVertices(a), TooFewVertices(b)) => a == b,
            (InvalidProbability(a), InvalidProbability(b)) => a.to_bits() == b.to_bits(),
            (Distance(a), Distance(b)) => a == b,
            (Invalid(a), Invalid(b)) => a == b,
            _ => false,
        }
    }
}
