//! Post-processing: distances of every simulation at every time step to a
//! method's ground truth, written to the store.

use std::collections::HashSet;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::distance::{density_distance, feature_distance, DistanceError};
use crate::model::{MethodId, PostRecord, SimId, SimulationRecord};
use crate::store::{OnConflict, Store, StoreError};
use crate::synth::{read_density, read_features, SynthError};
use crate::{DensityField, FeatureSet};

#[derive(Debug, thiserror::Error)]
pub enum PipelineError {
    #[error(transparent)]
    Store(#[from] StoreError),
    #[error("ground truth simulation {sim_id}: {source}")]
    GroundTruth { sim_id: SimId, source: SynthError },
    #[error("parallelism must be at least 1")]
    NoWorkers,
    #[error("thread pool: {0}")]
    ThreadPool(#[from] rayon::ThreadPoolBuildError),
}

/// Outcome of one post-processing run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineReport {
    pub method_id: MethodId,
    pub records_written: usize,
    pub records_skipped: usize,
    /// Records that could not be computed (unreadable files).
    pub records_failed: usize,
    /// Written records whose density distance is undefined (no shared
    /// support); stored with `delta_rho = null`.
    pub records_flagged: usize,
    pub errors: Vec<String>,
    pub wall_time: f64,
}

impl PipelineReport {
    fn failed(method_id: MethodId, error: String) -> Self {
        Self {
            method_id,
            records_written: 0,
            records_skipped: 0,
            records_failed: 0,
            records_flagged: 0,
            errors: vec![error],
            wall_time: 0.0,
        }
    }

    pub fn is_ok(&self) -> bool {
        self.errors.is_empty()
    }
}

struct GroundTruth {
    density: DensityField,
    features: FeatureSet,
}

fn features_at(steps: &[FeatureSet], sim: &SimulationRecord, t: u32) -> Result<FeatureSet, SynthError> {
    steps
        .get(t as usize - 1)
        .cloned()
        .ok_or_else(|| SynthError::MalformedFile {
            path: sim.feature_path.clone().into(),
            reason: format!("no features for time step {t} ({} steps present)", steps.len()),
        })
}

fn compute_sim(
    method_id: MethodId,
    sim: &SimulationRecord,
    missing: &[u32],
    gt: &GroundTruth,
    norm: crate::NormKind,
) -> Result<Vec<PostRecord>, SynthError> {
    let steps = read_features(&sim.feature_path)?;
    missing
        .iter()
        .map(|&t| {
            let density = read_density(sim.density_file(t))?;
            let features = features_at(&steps, sim, t)?;
            let (delta_shock, delta_edge) =
                feature_distance(&gt.features, &features, norm).map_err(|e| SynthError::MalformedFile {
                    path: sim.feature_path.clone().into(),
                    reason: e.to_string(),
                })?;
            let delta_rho = match density_distance(&gt.density, &density, norm) {
                Ok(d) => Some(d),
                Err(DistanceError::EmptyOverlap) => None,
                Err(e) => {
                    return Err(SynthError::MalformedFile {
                        path: sim.density_file(t),
                        reason: e.to_string(),
                    })
                }
            };
            Ok(PostRecord {
                method_id,
                sim_id: sim.sim_id,
                time_step: t,
                delta_shock,
                delta_edge,
                delta_rho,
            })
        })
        .collect()
}

/// Compute every missing `(simulation, time step)` record of a method.
///
/// Already-stored records are skipped, so a repeated run writes nothing.
/// Per-simulation failures are collected in the report; the other
/// simulations are still processed. The result does not depend on
/// `parallelism`.
pub fn postprocess(store: &Store, method_id: MethodId, parallelism: usize) -> Result<PipelineReport, PipelineError> {
    if parallelism == 0 {
        return Err(PipelineError::NoWorkers);
    }
    let start = Instant::now();
    let method = store.get_method(method_id)?;
    let gt_sim = store.get_simulation(store.ground_truth_sim(method.ground_truth_id)?)?;
    let t_max = store.n_time_steps()?;
    let sims = store.list_simulations()?;
    let existing: HashSet<(SimId, u32)> = store.existing_record_keys(method_id)?;

    let gt_err = |source| PipelineError::GroundTruth {
        sim_id: gt_sim.sim_id,
        source,
    };
    let gt = GroundTruth {
        density: read_density(gt_sim.density_file(method.gt_time_step)).map_err(gt_err)?,
        features: read_features(&gt_sim.feature_path)
            .and_then(|steps| features_at(&steps, &gt_sim, method.gt_time_step))
            .map_err(gt_err)?,
    };

    let work: Vec<(&SimulationRecord, Vec<u32>)> = sims
        .iter()
        .map(|s| (s, (1..=t_max).filter(|t| !existing.contains(&(s.sim_id, *t))).collect()))
        .collect();
    let records_skipped = sims.len() * t_max as usize - work.iter().map(|(_, m)| m.len()).sum::<usize>();

    let pool = rayon::ThreadPoolBuilder::new().num_threads(parallelism).build()?;
    let results: Vec<(SimId, usize, Result<Vec<PostRecord>, SynthError>)> = pool.install(|| {
        work.par_iter()
            .filter(|(_, missing)| !missing.is_empty())
            .map(|(sim, missing)| {
                (
                    sim.sim_id,
                    missing.len(),
                    compute_sim(method_id, sim, missing, &gt, method.norm),
                )
            })
            .collect()
    });

    let mut records = Vec::new();
    let mut errors = Vec::new();
    let mut records_failed = 0;
    for (sim_id, n, result) in results {
        match result {
            Ok(r) => records.extend(r),
            Err(e) => {
                records_failed += n;
                errors.push(format!("simulation {sim_id}: {e}"));
            }
        }
    }
    let records_flagged = records.iter().filter(|r| !r.is_valid()).count();
    let records_written = store.bulk_insert_records(&records, OnConflict::Reject)?;
    let report = PipelineReport {
        method_id,
        records_written,
        records_skipped,
        records_failed,
        records_flagged,
        errors,
        wall_time: start.elapsed().as_secs_f64(),
    };
    log::info!(
        "method {method_id}: {} written, {} skipped, {} failed in {:.2}s",
        report.records_written,
        report.records_skipped,
        report.records_failed,
        report.wall_time
    );
    Ok(report)
}

/// Run [`postprocess`] for each method in turn. A failing method yields a
/// report carrying the error; the others still run.
pub fn postprocess_all(store: &Store, methods: &[MethodId], parallelism: usize) -> Vec<PipelineReport> {
    methods
        .iter()
        .map(|&m| postprocess(store, m, parallelism).unwrap_or_else(|e| PipelineReport::failed(m, e.to_string())))
        .collect()
}
