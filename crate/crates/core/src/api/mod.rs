//! HTTP/JSON service over the store, the pipeline and the selection
//! engine. The response schemas are in `schema/openapi.json`, which is also
//! served at `/api/openapi.json`.

mod error;
mod handlers;

use std::collections::HashMap;
use std::path::PathBuf;
use std::sync::{Arc, Mutex, MutexGuard};

use axum::routing::{get, post};
use axum::Router;
use serde::{Deserialize, Serialize};

pub use error::ApiError;
pub use handlers::{CreateMethodRequest, MethodCreated, MethodView, RecordRow, SaveRequest, SaveResponse, SpecInput};

use crate::config::DEFAULT_SYNC_THRESHOLD;
use crate::model::MethodId;
use crate::pipeline::{postprocess, PipelineError, PipelineReport};
use crate::store::Store;

pub const OPENAPI: &str = include_str!("../../schema/openapi.json");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum JobState {
    Running,
    Succeeded,
    Failed,
}

/// Latest post-processing run of a method.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Job {
    pub method_id: MethodId,
    pub state: JobState,
    pub poll_url: String,
    pub report: Option<PipelineReport>,
    pub error: Option<String>,
}

impl Job {
    fn running(method_id: MethodId) -> Self {
        Self {
            method_id,
            state: JobState::Running,
            poll_url: job_url(method_id),
            report: None,
            error: None,
        }
    }
}

pub fn job_url(method_id: MethodId) -> String {
    format!("/api/jobs/{method_id}")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ServiceSettings {
    /// Runs with at most this many records answer within the request;
    /// larger ones answer 202 and continue in the background.
    pub sync_threshold: usize,
    pub workers: usize,
}

impl Default for ServiceSettings {
    fn default() -> Self {
        Self {
            sync_threshold: DEFAULT_SYNC_THRESHOLD,
            workers: 1,
        }
    }
}

pub struct AppState {
    store: Mutex<Store>,
    store_path: Option<PathBuf>,
    jobs: Mutex<HashMap<MethodId, Job>>,
    settings: ServiceSettings,
}

impl AppState {
    pub fn new(store: Store, settings: ServiceSettings) -> Arc<Self> {
        let store_path = store.path().map(PathBuf::from);
        Arc::new(Self {
            store: Mutex::new(store),
            store_path,
            jobs: Mutex::default(),
            settings,
        })
    }

    fn store(&self) -> MutexGuard<'_, Store> {
        self.store.lock().unwrap_or_else(|p| p.into_inner())
    }

    fn jobs(&self) -> MutexGuard<'_, HashMap<MethodId, Job>> {
        self.jobs.lock().unwrap_or_else(|p| p.into_inner())
    }

    /// Runs on a blocking thread. File-backed stores get their own
    /// connection so readers are not held up for the whole run.
    fn run_postprocess(&self, method_id: MethodId) -> Result<PipelineReport, PipelineError> {
        match &self.store_path {
            Some(path) => postprocess(&Store::open(path)?, method_id, self.settings.workers),
            None => postprocess(&self.store(), method_id, self.settings.workers),
        }
    }

    fn finish(&self, method_id: MethodId, result: Result<PipelineReport, String>) -> Job {
        let mut job = Job::running(method_id);
        match result {
            Ok(report) => {
                job.state = if report.is_ok() {
                    JobState::Succeeded
                } else {
                    JobState::Failed
                };
                job.report = Some(report);
            }
            Err(e) => {
                job.state = JobState::Failed;
                job.error = Some(e);
            }
        }
        self.jobs().insert(method_id, job.clone());
        job
    }
}

/// Start (or join) post-processing of `method_id`. Returns the job and
/// whether it already finished.
async fn start_postprocess(state: Arc<AppState>, method_id: MethodId) -> Result<(Job, bool), ApiError> {
    let size = {
        let store = state.store();
        store.get_method(method_id)?;
        store.count_simulations()? * store.n_time_steps()? as usize
    };
    {
        let mut jobs = state.jobs();
        if let Some(job) = jobs.get(&method_id).filter(|j| j.state == JobState::Running) {
            return Ok((job.clone(), false));
        }
        jobs.insert(method_id, Job::running(method_id));
    }
    let run = {
        let state = state.clone();
        move || {
            let result = state.run_postprocess(method_id).map_err(|e| e.to_string());
            state.finish(method_id, result)
        }
    };
    if size <= state.settings.sync_threshold {
        let job = tokio::task::spawn_blocking(run)
            .await
            .unwrap_or_else(|e| state.finish(method_id, Err(e.to_string())));
        Ok((job, true))
    } else {
        tokio::spawn(async move {
            if let Err(e) = tokio::task::spawn_blocking(run).await {
                state.finish(method_id, Err(e.to_string()));
            }
        });
        Ok((Job::running(method_id), false))
    }
}

pub fn router(state: Arc<AppState>) -> Router {
    use handlers::*;
    Router::new()
        .route("/api/methods", get(list_methods).post(create_method))
        .route("/api/methods/{id}/postprocess", post(postprocess_method))
        .route("/api/jobs/{id}", get(get_job))
        .route("/api/simulations", get(list_simulations))
        .route("/api/scatter", get(scatter))
        .route("/api/records", get(records))
        .route("/api/datasets", get(list_datasets).post(save_dataset))
        .route("/api/datasets/{id}", get(get_dataset).delete(delete_dataset))
        .route("/api/datasets/{id}/settings", get(dataset_settings))
        .route("/api/datasets/{id}/export", get(export_dataset))
        .route("/api/openapi.json", get(openapi))
        .fallback(no_route)
        .method_not_allowed_fallback(wrong_method)
        .with_state(state)
}

/// Serve on an already bound listener until ctrl-c.
pub async fn serve(state: Arc<AppState>, listener: tokio::net::TcpListener) -> std::io::Result<()> {
    log::info!("listening on {}", listener.local_addr()?);
    axum::serve(listener, router(state))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}
