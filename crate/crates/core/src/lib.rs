//! Post-processing, metadata management and replayable training-data
//! selection for simulation ensembles.
//!
//! The numerical kernels ([`grid`], [`distance`]) are generic over
//! [`Scalar`]; the aliases below fix them to `f64`, which is what the
//! file formats, store and service use.

pub mod api;
pub mod cli;
pub mod config;
pub mod distance;
pub mod grid;
pub mod model;
pub mod pipeline;
pub mod scalar;
pub mod selection;
pub mod store;
pub mod synth;

pub use model::{
    DatasetId, EnsembleMeta, Geometry, GroundTruthId, JoinedRecord, MethodId, MethodInfo, NormKind, Params, PostRecord,
    SelectionSpec, SimId, SimulationRecord, TrainingDataset, Validate, ValidationError, DEFAULT_TIME_STEPS,
    PARAM_NAMES,
};
pub use scalar::Scalar;
pub use selection::FilterExpr;
pub use store::Store;

pub type CylGrid = grid::CylGrid<f64>;
pub type DensityField = grid::DensityField<f64>;
pub type FeatureSet = grid::FeatureSet<f64>;
pub type SupportMask = distance::SupportMask<f64>;
