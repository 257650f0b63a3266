//! Single-file relational store for simulations, post-processing methods,
//! their results, and saved training datasets.
//!
//! Tables: `simulation`, `ground_truth`, `method_info`,
//! `postprocessed_data`, `training_dataset_info` and `training_dataset`
//! (one row per member). See `schema.sql`.

mod codec;

use std::collections::HashSet;
use std::path::{Path, PathBuf};

use chrono::{DateTime, Utc};
use rusqlite::{params, Connection, ErrorCode, OptionalExtension, Row};
use serde::{Deserialize, Serialize};

pub use codec::{geometry_from_text, geometry_to_text};

use crate::model::{
    DatasetId, EnsembleMeta, GroundTruthId, JoinedRecord, MethodId, MethodInfo, NormKind, Params, PostRecord,
    SelectionSpec, SimId, SimulationRecord, TrainingDataset, Validate, ValidationError, DEFAULT_TIME_STEPS,
};

pub const SCHEMA_VERSION: u32 = 1;
const SCHEMA: &str = include_str!("schema.sql");

#[derive(Debug, thiserror::Error)]
pub enum StoreError {
    #[error("not an ensemble store: {0}")]
    CorruptStore(String),
    #[error("store schema version {found}, this build expects {expected}")]
    VersionMismatch { found: String, expected: u32 },
    #[error("{kind} not found: {id}")]
    NotFound { kind: &'static str, id: String },
    #[error("duplicate key: {0}")]
    DuplicateKey(String),
    #[error("invalid reference: {0}")]
    InvalidReference(String),
    #[error("a training dataset needs at least one member")]
    EmptySelection,
    #[error(transparent)]
    Invalid(#[from] ValidationError),
    #[error(transparent)]
    Sqlite(rusqlite::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl StoreError {
    fn not_found(kind: &'static str, id: impl ToString) -> Self {
        StoreError::NotFound {
            kind,
            id: id.to_string(),
        }
    }
}

impl From<rusqlite::Error> for StoreError {
    fn from(e: rusqlite::Error) -> Self {
        if let rusqlite::Error::SqliteFailure(f, msg) = &e {
            let msg = msg.clone().unwrap_or_else(|| f.to_string());
            match f.code {
                ErrorCode::NotADatabase => return StoreError::CorruptStore(msg),
                ErrorCode::ConstraintViolation => match f.extended_code {
                    rusqlite::ffi::SQLITE_CONSTRAINT_PRIMARYKEY | rusqlite::ffi::SQLITE_CONSTRAINT_UNIQUE => {
                        return StoreError::DuplicateKey(msg)
                    }
                    rusqlite::ffi::SQLITE_CONSTRAINT_FOREIGNKEY => return StoreError::InvalidReference(msg),
                    _ => {}
                },
                _ => {}
            }
        }
        StoreError::Sqlite(e)
    }
}

pub type Result<T> = std::result::Result<T, StoreError>;

/// What to do when a post-processed row already exists.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OnConflict {
    #[default]
    Reject,
    Upsert,
}

/// One row of the dataset listing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetSummary {
    pub dataset_id: DatasetId,
    pub description: String,
    pub created_at: DateTime<Utc>,
    pub selection_type: String,
    pub filter_string: String,
    pub method_id: MethodId,
    pub time_step: u32,
    pub member_count: usize,
}

/// A saved member as it appears in an export document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExportMember {
    pub sim_id: SimId,
    pub params: Params,
    pub density_path: String,
    pub feature_path: String,
}

/// JSON document written by [`Store::export_dataset`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetExport {
    pub format: String,
    pub version: u32,
    pub dataset_id: DatasetId,
    pub description: String,
    pub created_at: DateTime<Utc>,
    pub selection_type: String,
    pub filter_string: String,
    pub method: MethodInfo,
    pub ground_truth_sim_id: SimId,
    pub spec: SelectionSpec,
    pub members: Vec<ExportMember>,
}

pub const EXPORT_FORMAT: &str = "ensemble-select/training-dataset";

/// Handle to an open store. Not `Sync`; share behind a mutex or open one
/// handle per thread.
#[derive(Debug)]
pub struct Store {
    conn: Connection,
    path: Option<PathBuf>,
}

impl Store {
    /// Open (creating if needed) the store at `path` and make sure the
    /// schema is in place.
    pub fn open(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let conn = Connection::open(path)?;
        let store = Self {
            conn,
            path: Some(path.to_path_buf()),
        };
        store.configure()?;
        store.init_schema()?;
        Ok(store)
    }

    pub fn open_in_memory() -> Result<Self> {
        let store = Self {
            conn: Connection::open_in_memory()?,
            path: None,
        };
        store.configure()?;
        store.init_schema()?;
        Ok(store)
    }

    pub fn path(&self) -> Option<&Path> {
        self.path.as_deref()
    }

    fn configure(&self) -> Result<()> {
        // First real read: fails with NotADatabase on foreign files.
        self.conn
            .query_row("PRAGMA schema_version", [], |r| r.get::<_, i64>(0))?;
        self.conn.pragma_update(None, "foreign_keys", true)?;
        self.conn.busy_timeout(std::time::Duration::from_secs(30))?;
        if self.path.is_some() {
            self.conn.query_row("PRAGMA journal_mode = WAL", [], |_| Ok(()))?;
        }
        Ok(())
    }

    /// Create any missing tables. Safe to call repeatedly.
    pub fn init_schema(&self) -> Result<()> {
        let has_meta: bool = self.conn.query_row(
            "SELECT count(*) FROM sqlite_master WHERE type = 'table' AND name = 'store_meta'",
            [],
            |r| r.get::<_, i64>(0).map(|n| n > 0),
        )?;
        let table_count: i64 =
            self.conn
                .query_row("SELECT count(*) FROM sqlite_master WHERE type = 'table'", [], |r| {
                    r.get(0)
                })?;
        if !has_meta && table_count > 0 {
            return Err(StoreError::CorruptStore(
                "database has tables but no store metadata".into(),
            ));
        }
        if has_meta {
            let version: Option<String> = self
                .conn
                .query_row("SELECT value FROM store_meta WHERE key = 'schema_version'", [], |r| {
                    r.get(0)
                })
                .optional()?;
            match version {
                Some(v) if v == SCHEMA_VERSION.to_string() => {}
                Some(v) => {
                    return Err(StoreError::VersionMismatch {
                        found: v,
                        expected: SCHEMA_VERSION,
                    })
                }
                None => return Err(StoreError::CorruptStore("missing schema version".into())),
            }
        }
        let tx = self.conn.unchecked_transaction()?;
        tx.execute_batch(SCHEMA)?;
        tx.execute(
            "INSERT OR IGNORE INTO store_meta (key, value) VALUES ('schema_version', ?1)",
            [SCHEMA_VERSION.to_string()],
        )?;
        tx.commit()?;
        Ok(())
    }

    // --- ensemble metadata -------------------------------------------------

    pub fn set_ensemble(&self, meta: &EnsembleMeta) -> Result<()> {
        self.conn.execute(
            "INSERT INTO store_meta (key, value) VALUES ('ensemble', ?1)
             ON CONFLICT (key) DO UPDATE SET value = excluded.value",
            [serde_json::to_string(meta)?],
        )?;
        Ok(())
    }

    pub fn ensemble(&self) -> Result<Option<EnsembleMeta>> {
        let raw: Option<String> = self
            .conn
            .query_row("SELECT value FROM store_meta WHERE key = 'ensemble'", [], |r| r.get(0))
            .optional()?;
        Ok(raw.map(|s| serde_json::from_str(&s)).transpose()?)
    }

    /// Number of time steps per simulation (40 when no ensemble is recorded).
    pub fn n_time_steps(&self) -> Result<u32> {
        Ok(self.ensemble()?.map_or(DEFAULT_TIME_STEPS, |m| m.n_time_steps))
    }

    // --- simulations -------------------------------------------------------

    /// Insert all records or none.
    pub fn insert_simulations(&self, records: &[SimulationRecord]) -> Result<()> {
        let counts = self.ensemble()?.map(|m| m.level_counts);
        let tx = self.conn.unchecked_transaction()?;
        {
            let mut stmt = tx.prepare(
                "INSERT INTO simulation (sim_id, profile, s1, cs, mgrg, s2, rho0, tshift, density_path, feature_path)
                 VALUES (?1, ?2, ?3, ?4, ?5, ?6, ?7, ?8, ?9, ?10)",
            )?;
            for r in records {
                r.validate()?;
                if let Some(counts) = &counts {
                    r.params.check_levels(counts)?;
                }
                let p = r.params;
                stmt.execute(params![
                    r.sim_id,
                    p.profile,
                    p.s1,
                    p.cs,
                    p.mgrg,
                    p.s2,
                    p.rho0,
                    p.tshift,
                    r.density_path,
                    r.feature_path
                ])
                .map_err(|e| match StoreError::from(e) {
                    StoreError::DuplicateKey(_) => StoreError::DuplicateKey(format!("simulation {}", r.sim_id)),
                    other => other,
                })?;
            }
        }
        tx.commit()?;
        Ok(())
    }

    fn sim_from_row(row: &Row<'_>) -> rusqlite::Result<SimulationRecord> {
        Ok(SimulationRecord {
            sim_id: row.get(0)?,
            params: Params::from_levels([
                row.get(1)?,
                row.get(2)?,
                row.get(3)?,
                row.get(4)?,
                row.get(5)?,
                row.get(6)?,
                row.get(7)?,
            ]),
            density_path: row.get(8)?,
            feature_path: row.get(9)?,
        })
    }

    const SIM_COLUMNS: &'static str = "sim_id, profile, s1, cs, mgrg, s2, rho0, tshift, density_path, feature_path";

    pub fn list_simulations(&self) -> Result<Vec<SimulationRecord>> {
        let mut stmt = self
            .conn
            .prepare_cached(&format!("SELECT {} FROM simulation ORDER BY sim_id", Self::SIM_COLUMNS))?;
        let rows = stmt
            .query_map([], Self::sim_from_row)?
            .collect::<rusqlite::Result<_>>()?;
        Ok(rows)
    }

    pub fn get_simulation(&self, sim_id: SimId) -> Result<SimulationRecord> {
        self.conn
            .query_row(
                &format!("SELECT {} FROM simulation WHERE sim_id = ?1", Self::SIM_COLUMNS),
                [sim_id],
                Self::sim_from_row,
            )
            .optional()?
            .ok_or_else(|| StoreError::not_found("simulation", sim_id))
    }

    pub fn count_simulations(&self) -> Result<usize> {
        Ok(self
            .conn
            .query_row("SELECT count(*) FROM simulation", [], |r| r.get::<_, i64>(0))? as usize)
    }

    // --- ground truths and methods ----------------------------------------

    pub fn register_ground_truth(&self, sim_id: SimId) -> Result<GroundTruthId> {
        self.get_simulation(sim_id)?;
        self.conn
            .execute("INSERT INTO ground_truth (sim_id) VALUES (?1)", [sim_id])?;
        Ok(self.conn.last_insert_rowid())
    }

    /// Lowest ground-truth id registered for `sim_id`, if any.
    pub fn find_ground_truth(&self, sim_id: SimId) -> Result<Option<GroundTruthId>> {
        Ok(self
            .conn
            .query_row("SELECT min(gt_id) FROM ground_truth WHERE sim_id = ?1", [sim_id], |r| {
                r.get(0)
            })?)
    }

    pub fn ground_truth_sim(&self, gt_id: GroundTruthId) -> Result<SimId> {
        self.conn
            .query_row("SELECT sim_id FROM ground_truth WHERE gt_id = ?1", [gt_id], |r| {
                r.get(0)
            })
            .optional()?
            .ok_or_else(|| StoreError::not_found("ground truth", gt_id))
    }

    pub fn create_method(
        &self,
        gt_id: GroundTruthId,
        gt_time_step: u32,
        norm: NormKind,
        description: &str,
    ) -> Result<MethodId> {
        self.ground_truth_sim(gt_id)?;
        let info = MethodInfo {
            method_id: 0,
            ground_truth_id: gt_id,
            gt_time_step,
            norm,
            description: description.to_string(),
            match_time_steps: false,
        };
        info.validate()?;
        let t_max = self.n_time_steps()?;
        if gt_time_step > t_max {
            return Err(
                ValidationError::new("gt_time_step", format!("time step {gt_time_step} outside 1..={t_max}")).into(),
            );
        }
        self.conn.execute(
            "INSERT INTO method_info (gt_id, gt_time_step, norm, description) VALUES (?1, ?2, ?3, ?4)",
            params![gt_id, gt_time_step, norm.as_str(), description],
        )?;
        Ok(self.conn.last_insert_rowid())
    }

    fn method_from_row(row: &Row<'_>) -> rusqlite::Result<MethodInfo> {
        let norm: String = row.get(3)?;
        Ok(MethodInfo {
            method_id: row.get(0)?,
            ground_truth_id: row.get(1)?,
            gt_time_step: row.get(2)?,
            norm: norm
                .parse()
                .map_err(|e| rusqlite::Error::FromSqlConversionFailure(3, rusqlite::types::Type::Text, Box::new(e)))?,
            match_time_steps: row.get(4)?,
            description: row.get(5)?,
        })
    }

    pub fn get_method(&self, method_id: MethodId) -> Result<MethodInfo> {
        self.conn
            .query_row(
                "SELECT method_id, gt_id, gt_time_step, norm, match_time_steps, description
                 FROM method_info WHERE method_id = ?1",
                [method_id],
                Self::method_from_row,
            )
            .optional()?
            .ok_or_else(|| StoreError::not_found("method", method_id))
    }

    pub fn list_methods(&self) -> Result<Vec<MethodInfo>> {
        let mut stmt = self.conn.prepare(
            "SELECT method_id, gt_id, gt_time_step, norm, match_time_steps, description
             FROM method_info ORDER BY method_id",
        )?;
        let rows = stmt
            .query_map([], Self::method_from_row)?
            .collect::<rusqlite::Result<_>>()?;
        Ok(rows)
    }

    // --- post-processed records -------------------------------------------

    /// Insert a batch atomically. Returns the number of rows written.
    pub fn bulk_insert_records(&self, records: &[PostRecord], on_conflict: OnConflict) -> Result<usize> {
        let sql = match on_conflict {
            OnConflict::Reject => {
                "INSERT INTO postprocessed_data (method_id, sim_id, time_step, delta_shock, delta_edge, delta_rho)
                 VALUES (?1, ?2, ?3, ?4, ?5, ?6)"
            }
            OnConflict::Upsert => {
                "INSERT INTO postprocessed_data (method_id, sim_id, time_step, delta_shock, delta_edge, delta_rho)
                 VALUES (?1, ?2, ?3, ?4, ?5, ?6)
                 ON CONFLICT (method_id, sim_id, time_step) DO UPDATE SET
                    delta_shock = excluded.delta_shock,
                    delta_edge = excluded.delta_edge,
                    delta_rho = excluded.delta_rho"
            }
        };
        let tx = self.conn.unchecked_transaction()?;
        {
            let mut stmt = tx.prepare(sql)?;
            for r in records {
                r.validate()?;
                stmt.execute(params![
                    r.method_id,
                    r.sim_id,
                    r.time_step,
                    r.delta_shock,
                    r.delta_edge,
                    r.delta_rho
                ])
                .map_err(|e| match StoreError::from(e) {
                    StoreError::DuplicateKey(_) => StoreError::DuplicateKey(format!(
                        "record (method {}, sim {}, t {})",
                        r.method_id, r.sim_id, r.time_step
                    )),
                    other => other,
                })?;
            }
        }
        tx.commit()?;
        Ok(records.len())
    }

    /// `(sim_id, time_step)` pairs already computed for a method.
    pub fn existing_record_keys(&self, method_id: MethodId) -> Result<HashSet<(SimId, u32)>> {
        let mut stmt = self
            .conn
            .prepare("SELECT sim_id, time_step FROM postprocessed_data WHERE method_id = ?1")?;
        let keys = stmt
            .query_map([method_id], |r| Ok((r.get(0)?, r.get(1)?)))?
            .collect::<rusqlite::Result<_>>()?;
        Ok(keys)
    }

    pub fn count_records(&self, method_id: MethodId) -> Result<usize> {
        Ok(self.conn.query_row(
            "SELECT count(*) FROM postprocessed_data WHERE method_id = ?1",
            [method_id],
            |r| r.get::<_, i64>(0),
        )? as usize)
    }

    /// Every record of a method, ordered by `(sim_id, time_step)`.
    pub fn all_records(&self, method_id: MethodId) -> Result<Vec<PostRecord>> {
        self.get_method(method_id)?;
        let mut stmt = self.conn.prepare(
            "SELECT sim_id, time_step, delta_shock, delta_edge, delta_rho FROM postprocessed_data
             WHERE method_id = ?1 ORDER BY sim_id, time_step",
        )?;
        let rows = stmt
            .query_map([method_id], |r| {
                Ok(PostRecord {
                    method_id,
                    sim_id: r.get(0)?,
                    time_step: r.get(1)?,
                    delta_shock: r.get(2)?,
                    delta_edge: r.get(3)?,
                    delta_rho: r.get(4)?,
                })
            })?
            .collect::<rusqlite::Result<_>>()?;
        Ok(rows)
    }

    /// Records of one method at one time step joined with simulation
    /// parameters, ordered by `sim_id`. An out-of-range time step yields an
    /// empty list and a warning.
    pub fn query_records(&self, method_id: MethodId, time_step: u32) -> Result<Vec<JoinedRecord>> {
        self.get_method(method_id)?;
        let t_max = self.n_time_steps()?;
        if time_step == 0 || time_step > t_max {
            log::warn!("time step {time_step} outside 1..={t_max}; no records");
            return Ok(Vec::new());
        }
        let mut stmt = self.conn.prepare_cached(
            "SELECT s.sim_id, s.profile, s.s1, s.cs, s.mgrg, s.s2, s.rho0, s.tshift,
                    p.delta_shock, p.delta_edge, p.delta_rho
             FROM postprocessed_data p JOIN simulation s ON s.sim_id = p.sim_id
             WHERE p.method_id = ?1 AND p.time_step = ?2
             ORDER BY s.sim_id",
        )?;
        let rows = stmt
            .query_map(params![method_id, time_step], |r| {
                Ok(JoinedRecord {
                    sim_id: r.get(0)?,
                    params: Params::from_levels([
                        r.get(1)?,
                        r.get(2)?,
                        r.get(3)?,
                        r.get(4)?,
                        r.get(5)?,
                        r.get(6)?,
                        r.get(7)?,
                    ]),
                    delta_shock: r.get(8)?,
                    delta_edge: r.get(9)?,
                    delta_rho: r.get(10)?,
                })
            })?
            .collect::<rusqlite::Result<_>>()?;
        Ok(rows)
    }

    // --- training datasets -------------------------------------------------

    /// Save a new dataset. Members are stored as a set.
    pub fn save_dataset(&self, members: &[SimId], spec: &SelectionSpec) -> Result<DatasetId> {
        if members.is_empty() {
            return Err(StoreError::EmptySelection);
        }
        spec.validate()?;
        self.get_method(spec.method_id)?;
        let tx = self.conn.unchecked_transaction()?;
        tx.execute(
            "INSERT INTO training_dataset_info (description, created_at, selection_type, geometry, filter_string,
                 w_shock, w_edge, time_step, color_by, subsample_p, subsample_seed, method_id)
             VALUES (?1, ?2, ?3, ?4, ?5, ?6, ?7, ?8, ?9, ?10, ?11, ?12)",
            params![
                spec.description,
                codec::timestamp_to_text(&spec.created_at),
                spec.geometry.selection_type(),
                geometry_to_text(&spec.geometry),
                spec.filter.to_string(),
                spec.w_shock,
                spec.w_edge,
                spec.time_step,
                spec.color_by,
                spec.subsample_p,
                spec.subsample_seed as i64,
                spec.method_id,
            ],
        )?;
        let id = tx.last_insert_rowid();
        {
            let mut stmt = tx.prepare("INSERT OR IGNORE INTO training_dataset (dataset_id, sim_id) VALUES (?1, ?2)")?;
            for m in members {
                stmt.execute(params![id, m]).map_err(|e| match StoreError::from(e) {
                    StoreError::InvalidReference(_) => {
                        StoreError::InvalidReference(format!("member simulation {m} does not exist"))
                    }
                    other => other,
                })?;
            }
        }
        tx.commit()?;
        Ok(id)
    }

    /// Saved selection settings of a dataset.
    pub fn load_settings(&self, dataset_id: DatasetId) -> Result<SelectionSpec> {
        self.conn
            .query_row(
                "SELECT description, created_at, geometry, filter_string, w_shock, w_edge, time_step, color_by,
                        subsample_p, subsample_seed, method_id
                 FROM training_dataset_info WHERE dataset_id = ?1",
                [dataset_id],
                |r| {
                    Ok((
                        r.get::<_, String>(0)?,
                        r.get::<_, String>(1)?,
                        r.get::<_, String>(2)?,
                        r.get::<_, String>(3)?,
                        SpecNumbers {
                            w_shock: r.get(4)?,
                            w_edge: r.get(5)?,
                            time_step: r.get(6)?,
                            color_by: r.get(7)?,
                            subsample_p: r.get(8)?,
                            subsample_seed: r.get::<_, i64>(9)? as u64,
                            method_id: r.get(10)?,
                        },
                    ))
                },
            )
            .optional()?
            .ok_or_else(|| StoreError::not_found("dataset", dataset_id))
            .and_then(|(description, created_at, geometry, filter, n)| {
                Ok(SelectionSpec {
                    method_id: n.method_id,
                    time_step: n.time_step,
                    w_shock: n.w_shock,
                    w_edge: n.w_edge,
                    color_by: n.color_by,
                    filter: filter
                        .parse()
                        .map_err(|e| StoreError::CorruptStore(format!("dataset {dataset_id} filter: {e}")))?,
                    geometry: geometry_from_text(&geometry)
                        .map_err(|e| StoreError::CorruptStore(format!("dataset {dataset_id} geometry: {e}")))?,
                    subsample_p: n.subsample_p,
                    subsample_seed: n.subsample_seed,
                    description,
                    created_at: codec::timestamp_from_text(&created_at)
                        .map_err(|e| StoreError::CorruptStore(format!("dataset {dataset_id} created_at: {e}")))?,
                })
            })
    }

    pub fn dataset_members(&self, dataset_id: DatasetId) -> Result<Vec<SimId>> {
        let mut stmt = self
            .conn
            .prepare("SELECT sim_id FROM training_dataset WHERE dataset_id = ?1 ORDER BY sim_id")?;
        let ids = stmt
            .query_map([dataset_id], |r| r.get(0))?
            .collect::<rusqlite::Result<_>>()?;
        Ok(ids)
    }

    pub fn load_dataset(&self, dataset_id: DatasetId) -> Result<TrainingDataset> {
        let spec = self.load_settings(dataset_id)?;
        Ok(TrainingDataset {
            dataset_id,
            member_sim_ids: self.dataset_members(dataset_id)?,
            spec,
        })
    }

    #[allow(clippy::type_complexity)]
    pub fn list_datasets(&self) -> Result<Vec<DatasetSummary>> {
        let mut stmt = self.conn.prepare(
            "SELECT i.dataset_id, i.description, i.created_at, i.selection_type, i.filter_string, i.method_id,
                    i.time_step, (SELECT count(*) FROM training_dataset d WHERE d.dataset_id = i.dataset_id)
             FROM training_dataset_info i ORDER BY i.dataset_id",
        )?;
        let raw: Vec<(DatasetId, String, String, String, String, MethodId, u32, i64)> = stmt
            .query_map([], |r| {
                Ok((
                    r.get(0)?,
                    r.get(1)?,
                    r.get(2)?,
                    r.get(3)?,
                    r.get(4)?,
                    r.get(5)?,
                    r.get(6)?,
                    r.get(7)?,
                ))
            })?
            .collect::<rusqlite::Result<_>>()?;
        raw.into_iter()
            .map(
                |(dataset_id, description, created_at, selection_type, filter_string, method_id, time_step, n)| {
                    Ok(DatasetSummary {
                        dataset_id,
                        description,
                        created_at: codec::timestamp_from_text(&created_at).map_err(StoreError::CorruptStore)?,
                        selection_type,
                        filter_string,
                        method_id,
                        time_step,
                        member_count: n as usize,
                    })
                },
            )
            .collect()
    }

    pub fn delete_dataset(&self, dataset_id: DatasetId) -> Result<()> {
        let tx = self.conn.unchecked_transaction()?;
        tx.execute("DELETE FROM training_dataset WHERE dataset_id = ?1", [dataset_id])?;
        let n = tx.execute("DELETE FROM training_dataset_info WHERE dataset_id = ?1", [dataset_id])?;
        if n == 0 {
            return Err(StoreError::not_found("dataset", dataset_id));
        }
        tx.commit()?;
        Ok(())
    }

    /// Export document for a dataset: settings, provenance and members
    /// with their parameter levels.
    pub fn export_dataset(&self, dataset_id: DatasetId) -> Result<DatasetExport> {
        let dataset = self.load_dataset(dataset_id)?;
        let method = self.get_method(dataset.spec.method_id)?;
        let ground_truth_sim_id = self.ground_truth_sim(method.ground_truth_id)?;
        let members = dataset
            .member_sim_ids
            .iter()
            .map(|&id| {
                let s = self.get_simulation(id)?;
                Ok(ExportMember {
                    sim_id: s.sim_id,
                    params: s.params,
                    density_path: s.density_path,
                    feature_path: s.feature_path,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(DatasetExport {
            format: EXPORT_FORMAT.into(),
            version: 1,
            dataset_id,
            description: dataset.spec.description.clone(),
            created_at: dataset.spec.created_at,
            selection_type: dataset.spec.geometry.selection_type().into(),
            filter_string: dataset.spec.filter.to_string(),
            method,
            ground_truth_sim_id,
            spec: dataset.spec,
            members,
        })
    }

    pub fn export_dataset_to(&self, dataset_id: DatasetId, path: impl AsRef<Path>) -> Result<()> {
        let doc = self.export_dataset(dataset_id)?;
        std::fs::write(path, serde_json::to_vec_pretty(&doc)?)?;
        Ok(())
    }
}

struct SpecNumbers {
    w_shock: f64,
    w_edge: f64,
    time_step: u32,
    color_by: String,
    subsample_p: f64,
    subsample_seed: u64,
    method_id: MethodId,
}
