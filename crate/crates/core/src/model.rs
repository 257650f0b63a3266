//! Shared domain types and their validation rules.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::selection::FilterExpr;

pub type SimId = i64;
pub type MethodId = i64;
pub type GroundTruthId = i64;
pub type DatasetId = i64;

/// Number of time steps recorded per simulation.
pub const DEFAULT_TIME_STEPS: u32 = 40;

/// Names of the seven categorical initial conditions, in declaration order.
///
/// `profile`, `s1`, `cs` and `mgrg` are the parameters shown in the
/// original tool; `s2`, `rho0` and `tshift` are placeholder names for the
/// remaining three.
pub const PARAM_NAMES: [&str; 7] = ["profile", "s1", "cs", "mgrg", "s2", "rho0", "tshift"];

/// A field-level validation failure.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{field}: {message}")]
pub struct ValidationError {
    pub field: String,
    pub message: String,
}

impl ValidationError {
    pub fn new(field: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            field: field.into(),
            message: message.into(),
        }
    }
}

/// Self-contained invariant check. Referential checks against stored ids
/// belong to the store.
pub trait Validate {
    fn validate(&self) -> Result<(), ValidationError>;
}

/// Level indices of the seven initial conditions.
///
/// Also used to express per-parameter level counts in an ensemble config.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct Params {
    pub profile: u32,
    pub s1: u32,
    pub cs: u32,
    pub mgrg: u32,
    pub s2: u32,
    pub rho0: u32,
    pub tshift: u32,
}

impl Params {
    pub fn from_levels(levels: [u32; 7]) -> Self {
        let [profile, s1, cs, mgrg, s2, rho0, tshift] = levels;
        Self {
            profile,
            s1,
            cs,
            mgrg,
            s2,
            rho0,
            tshift,
        }
    }

    /// Levels in [`PARAM_NAMES`] order.
    pub fn levels(&self) -> [u32; 7] {
        [
            self.profile,
            self.s1,
            self.cs,
            self.mgrg,
            self.s2,
            self.rho0,
            self.tshift,
        ]
    }

    pub fn get(&self, name: &str) -> Option<u32> {
        param_index(name).map(|i| self.levels()[i])
    }

    /// Check every level against the matching entry of `counts`.
    pub fn check_levels(&self, counts: &Params) -> Result<(), ValidationError> {
        for ((name, level), count) in PARAM_NAMES.iter().zip(self.levels()).zip(counts.levels()) {
            if level >= count {
                return Err(ValidationError::new(
                    format!("params.{name}"),
                    format!("level {level} out of range (ensemble declares {count} levels)"),
                ));
            }
        }
        Ok(())
    }
}

pub fn param_index(name: &str) -> Option<usize> {
    PARAM_NAMES.iter().position(|p| *p == name)
}

/// Ensemble-wide facts the store needs to check references and ranges.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleMeta {
    pub n_time_steps: u32,
    pub level_counts: Params,
    pub n_modes: usize,
    pub grid: crate::grid::CylGrid<f64>,
}

/// One simulation of the ensemble and where its files live.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationRecord {
    pub sim_id: SimId,
    pub params: Params,
    /// Density file path template; `{t}` expands to the 3-digit time step.
    pub density_path: String,
    pub feature_path: String,
}

impl SimulationRecord {
    pub fn density_file(&self, time_step: u32) -> PathBuf {
        PathBuf::from(self.density_path.replace("{t}", &format!("{time_step:03}")))
    }
}

impl Validate for SimulationRecord {
    fn validate(&self) -> Result<(), ValidationError> {
        if !self.density_path.contains("{t}") {
            return Err(ValidationError::new("density_path", "template must contain `{t}`"));
        }
        if self.feature_path.is_empty() {
            return Err(ValidationError::new("feature_path", "must not be empty"));
        }
        Ok(())
    }
}

/// Norm used to reduce a difference to a single distance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum NormKind {
    L1,
    L2,
    Linf,
}

impl NormKind {
    pub const ALL: [NormKind; 3] = [NormKind::L1, NormKind::L2, NormKind::Linf];

    pub fn as_str(&self) -> &'static str {
        match self {
            NormKind::L1 => "L1",
            NormKind::L2 => "L2",
            NormKind::Linf => "LINF",
        }
    }
}

impl fmt::Display for NormKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown norm `{0}` (expected L1, L2 or LINF)")]
pub struct UnknownNorm(pub String);

impl FromStr for NormKind {
    type Err = UnknownNorm;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_uppercase().as_str() {
            "L1" => Ok(NormKind::L1),
            "L2" => Ok(NormKind::L2),
            "LINF" | "L_INF" | "MAX" => Ok(NormKind::Linf),
            _ => Err(UnknownNorm(s.to_string())),
        }
    }
}

impl TryFrom<String> for NormKind {
    type Error = UnknownNorm;
    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

impl From<NormKind> for String {
    fn from(n: NormKind) -> Self {
        n.as_str().to_string()
    }
}

/// A post-processing recipe: which ground truth, which of its time steps,
/// and which norm.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodInfo {
    pub method_id: MethodId,
    pub ground_truth_id: GroundTruthId,
    pub gt_time_step: u32,
    pub norm: NormKind,
    pub description: String,
    /// Reserved: compare sim-at-t against GT-at-t instead of the fixed step.
    /// Always false for now.
    #[serde(default)]
    pub match_time_steps: bool,
}

impl Validate for MethodInfo {
    fn validate(&self) -> Result<(), ValidationError> {
        if self.gt_time_step == 0 {
            return Err(ValidationError::new("gt_time_step", "time steps are 1-based"));
        }
        if self.match_time_steps {
            return Err(ValidationError::new("match_time_steps", "not supported"));
        }
        Ok(())
    }
}

/// Distances of one simulation at one time step to a method's ground truth.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PostRecord {
    pub method_id: MethodId,
    pub sim_id: SimId,
    pub time_step: u32,
    pub delta_shock: f64,
    pub delta_edge: f64,
    /// `None` when the two densities share no support (flagged record).
    pub delta_rho: Option<f64>,
}

impl PostRecord {
    pub fn is_valid(&self) -> bool {
        self.delta_rho.is_some()
    }
}

impl Validate for PostRecord {
    fn validate(&self) -> Result<(), ValidationError> {
        if self.time_step == 0 {
            return Err(ValidationError::new("time_step", "time steps are 1-based"));
        }
        let deltas = [
            ("delta_shock", Some(self.delta_shock)),
            ("delta_edge", Some(self.delta_edge)),
            ("delta_rho", self.delta_rho),
        ];
        for (name, v) in deltas {
            if let Some(v) = v {
                if !(v.is_finite() && v >= 0.0) {
                    return Err(ValidationError::new(
                        name,
                        format!("must be finite and non-negative, got {v}"),
                    ));
                }
            }
        }
        Ok(())
    }
}

/// A post-processed row joined with its simulation's parameter levels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JoinedRecord {
    pub sim_id: SimId,
    pub params: Params,
    pub delta_shock: f64,
    pub delta_edge: f64,
    pub delta_rho: Option<f64>,
}

impl JoinedRecord {
    pub fn is_valid(&self) -> bool {
        self.delta_rho.is_some()
    }
}

/// Scatter-plot selection window, in data coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum Geometry {
    Box {
        x_min: f64,
        x_max: f64,
        y_min: f64,
        y_max: f64,
    },
    Lasso {
        vertices: Vec<[f64; 2]>,
    },
}

impl Geometry {
    pub fn selection_type(&self) -> &'static str {
        match self {
            Geometry::Box { .. } => "BOX",
            Geometry::Lasso { .. } => "LASSO",
        }
    }
}

impl Validate for Geometry {
    fn validate(&self) -> Result<(), ValidationError> {
        match self {
            Geometry::Box {
                x_min,
                x_max,
                y_min,
                y_max,
            } => {
                if [x_min, x_max, y_min, y_max].iter().any(|v| !v.is_finite()) {
                    return Err(ValidationError::new("geometry", "box bounds must be finite"));
                }
                if x_min > x_max || y_min > y_max {
                    return Err(ValidationError::new("geometry", "box is inverted"));
                }
            }
            Geometry::Lasso { vertices } => {
                if vertices.len() < 3 {
                    return Err(ValidationError::new("geometry", "lasso needs at least 3 vertices"));
                }
                if vertices.iter().flatten().any(|v| !v.is_finite()) {
                    return Err(ValidationError::new("geometry", "lasso vertices must be finite"));
                }
            }
        }
        Ok(())
    }
}

/// Everything needed to recompute a saved training dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionSpec {
    pub method_id: MethodId,
    pub time_step: u32,
    pub w_shock: f64,
    pub w_edge: f64,
    pub color_by: String,
    pub filter: FilterExpr,
    pub geometry: Geometry,
    pub subsample_p: f64,
    pub subsample_seed: u64,
    pub description: String,
    pub created_at: DateTime<Utc>,
}

impl Validate for SelectionSpec {
    fn validate(&self) -> Result<(), ValidationError> {
        if self.description.trim().is_empty() {
            return Err(ValidationError::new("description", "description required"));
        }
        if self.time_step == 0 {
            return Err(ValidationError::new("time_step", "time steps are 1-based"));
        }
        for (name, w) in [("w_shock", self.w_shock), ("w_edge", self.w_edge)] {
            if !(0.0..=1.0).contains(&w) {
                return Err(ValidationError::new(name, format!("weight {w} outside [0, 1]")));
            }
        }
        if !(self.subsample_p > 0.0 && self.subsample_p <= 1.0) {
            return Err(ValidationError::new(
                "subsample_p",
                format!("probability {} outside (0, 1]", self.subsample_p),
            ));
        }
        if param_index(&self.color_by).is_none() {
            return Err(ValidationError::new(
                "color_by",
                format!("`{}` is not a parameter name", self.color_by),
            ));
        }
        self.geometry.validate()
    }
}

/// A saved selection and its members.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingDataset {
    pub dataset_id: DatasetId,
    pub member_sim_ids: Vec<SimId>,
    pub spec: SelectionSpec,
}

impl Validate for TrainingDataset {
    fn validate(&self) -> Result<(), ValidationError> {
        if self.member_sim_ids.is_empty() {
            return Err(ValidationError::new(
                "member_sim_ids",
                "dataset must have at least one member",
            ));
        }
        self.spec.validate()
    }
}
