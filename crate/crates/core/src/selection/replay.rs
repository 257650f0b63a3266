use std::collections::BTreeSet;

use super::geometry::{select_box, select_lasso, ScatterPoint};
use super::subsample::subsample;
use super::SelectionError;
use crate::distance::combined_feature_distance;
use crate::model::{DatasetId, Geometry, JoinedRecord, SelectionSpec, SimId, Validate};
use crate::store::Store;

/// Scatter points for valid rows; flagged rows have no abscissa/ordinate
/// and are left out.
pub fn scatter_points(rows: &[JoinedRecord], w_shock: f64, w_edge: f64) -> Result<Vec<ScatterPoint>, SelectionError> {
    rows.iter()
        .filter_map(|r| r.delta_rho.map(|y| (r, y)))
        .map(|(r, y)| {
            Ok(ScatterPoint {
                sim_id: r.sim_id,
                x: combined_feature_distance(r.delta_shock, r.delta_edge, w_shock, w_edge)?,
                y,
                params: r.params,
            })
        })
        .collect()
}

/// Membership of `spec` over already-fetched rows: filter, then geometry,
/// then subsampling. Returns sorted ids.
pub fn select(rows: &[JoinedRecord], spec: &SelectionSpec) -> Result<Vec<SimId>, SelectionError> {
    spec.validate()?;
    let filtered: Vec<JoinedRecord> = spec.filter.apply(rows).into_iter().cloned().collect();
    let points = scatter_points(&filtered, spec.w_shock, spec.w_edge)?;
    let chosen: BTreeSet<SimId> = match &spec.geometry {
        Geometry::Box {
            x_min,
            x_max,
            y_min,
            y_max,
        } => select_box(&points, *x_min, *x_max, *y_min, *y_max)?,
        Geometry::Lasso { vertices } => select_lasso(&points, vertices)?,
    };
    let ids: Vec<SimId> = chosen.into_iter().collect();
    subsample(&ids, spec.subsample_p, spec.subsample_seed)
}

/// Recompute a saved selection from the records in `store`.
pub fn replay(spec: &SelectionSpec, store: &Store) -> Result<Vec<SimId>, SelectionError> {
    store.get_method(spec.method_id)?;
    let rows = store.query_records(spec.method_id, spec.time_step)?;
    let expected = store.count_simulations()?;
    if rows.len() != expected {
        return Err(SelectionError::StaleRecords {
            method_id: spec.method_id,
            time_step: spec.time_step,
            expected,
            found: rows.len(),
        });
    }
    select(&rows, spec)
}

/// Replay `spec` and save the result as a new training dataset. The
/// replayed set is what gets stored, never a caller-supplied list.
pub fn save_selection(spec: &SelectionSpec, store: &Store) -> Result<(DatasetId, Vec<SimId>), SelectionError> {
    spec.validate()?;
    let members = replay(spec, store)?;
    let id = store.save_dataset(&members, spec)?;
    Ok((id, members))
}
