use std::collections::BTreeSet;
use std::sync::Arc;

use axum::extract::rejection::{JsonRejection, PathRejection, QueryRejection};
use axum::extract::{Path, Query, State};
use axum::http::{header, StatusCode, Uri};
use axum::response::{IntoResponse, Response};
use axum::Json;
use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use super::{job_url, start_postprocess, ApiError, AppState, Job, OPENAPI};
use crate::model::{DatasetId, Geometry, MethodId, MethodInfo, NormKind, Params, SelectionSpec, SimId};
use crate::selection::{save_selection, scatter_points, FilterExpr, ScatterPoint};
use crate::store::{DatasetExport, DatasetSummary, Store};
use crate::{SimulationRecord, TrainingDataset};

type ApiResult<T> = Result<T, ApiError>;

fn path_id(p: Result<Path<i64>, PathRejection>) -> ApiResult<i64> {
    Ok(p?.0)
}

// --- methods -------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodView {
    #[serde(flatten)]
    pub method: MethodInfo,
    pub ground_truth_sim_id: SimId,
    pub record_count: usize,
}

fn method_view(store: &Store, method: MethodInfo) -> ApiResult<MethodView> {
    Ok(MethodView {
        ground_truth_sim_id: store.ground_truth_sim(method.ground_truth_id)?,
        record_count: store.count_records(method.method_id)?,
        method,
    })
}

pub async fn list_methods(State(state): State<Arc<AppState>>) -> ApiResult<Json<Vec<MethodView>>> {
    let store = state.store();
    let methods = store.list_methods()?;
    Ok(Json(
        methods
            .into_iter()
            .map(|m| method_view(&store, m))
            .collect::<ApiResult<_>>()?,
    ))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CreateMethodRequest {
    pub gt_sim_id: SimId,
    pub gt_time_step: u32,
    pub norm: String,
    pub description: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodCreated {
    pub method_id: MethodId,
    pub job: Job,
}

fn job_response(status: StatusCode, job: &Job, body: impl Serialize) -> Response {
    let mut response = (status, Json(body)).into_response();
    if status == StatusCode::ACCEPTED {
        if let Ok(v) = job.poll_url.parse() {
            response.headers_mut().insert(header::LOCATION, v);
        }
    }
    response
}

/// 201 when post-processing finished within the request, 202 (with a poll
/// URL) when it continues in the background.
pub async fn create_method(
    State(state): State<Arc<AppState>>,
    body: Result<Json<CreateMethodRequest>, JsonRejection>,
) -> ApiResult<Response> {
    let Json(req) = body?;
    let norm: NormKind = req.norm.parse().map_err(|e: crate::model::UnknownNorm| {
        ApiError::unprocessable("invalid_norm", e.to_string()).with_details(serde_json::json!({
            "allowed": NormKind::ALL.map(|n| n.as_str()),
        }))
    })?;
    let method_id = {
        let store = state.store();
        store.get_simulation(req.gt_sim_id)?;
        let gt = match store.find_ground_truth(req.gt_sim_id)? {
            Some(gt) => gt,
            None => store.register_ground_truth(req.gt_sim_id)?,
        };
        store.create_method(gt, req.gt_time_step, norm, &req.description)?
    };
    let (job, done) = start_postprocess(state, method_id).await?;
    let status = if done {
        StatusCode::CREATED
    } else {
        StatusCode::ACCEPTED
    };
    Ok(job_response(
        status,
        &job,
        MethodCreated {
            method_id,
            job: job.clone(),
        },
    ))
}

/// Run (or join) post-processing of an existing method; fills in any
/// missing records.
pub async fn postprocess_method(
    State(state): State<Arc<AppState>>,
    id: Result<Path<i64>, PathRejection>,
) -> ApiResult<Response> {
    let method_id = path_id(id)?;
    let (job, done) = start_postprocess(state, method_id).await?;
    let status = if done { StatusCode::OK } else { StatusCode::ACCEPTED };
    Ok(job_response(status, &job, &job))
}

pub async fn get_job(State(state): State<Arc<AppState>>, id: Result<Path<i64>, PathRejection>) -> ApiResult<Json<Job>> {
    let method_id = path_id(id)?;
    if let Some(job) = state.jobs().get(&method_id) {
        return Ok(Json(job.clone()));
    }
    state.store().get_method(method_id)?;
    Err(ApiError::not_found(format!(
        "no post-processing job for method {method_id} (see {})",
        job_url(method_id)
    )))
}

// --- simulations and records ---------------------------------------------

pub async fn list_simulations(State(state): State<Arc<AppState>>) -> ApiResult<Json<Vec<SimulationRecord>>> {
    Ok(Json(state.store().list_simulations()?))
}

#[derive(Debug, Deserialize)]
pub struct ScatterQuery {
    method: MethodId,
    t: u32,
    #[serde(default = "one")]
    ws: f64,
    #[serde(default = "one")]
    we: f64,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Deserialize)]
pub struct RecordsQuery {
    method: MethodId,
    t: u32,
}

fn check_time_step(store: &Store, method_id: MethodId, t: u32) -> ApiResult<()> {
    store.get_method(method_id)?;
    let t_max = store.n_time_steps()?;
    if !(1..=t_max).contains(&t) {
        return Err(ApiError::unprocessable(
            "time_step_out_of_range",
            format!("t = {t} outside 1..={t_max}"),
        ));
    }
    Ok(())
}

pub async fn scatter(
    State(state): State<Arc<AppState>>,
    query: Result<Query<ScatterQuery>, QueryRejection>,
) -> ApiResult<Json<Vec<ScatterPoint>>> {
    let Query(q) = query?;
    for (name, w) in [("ws", q.ws), ("we", q.we)] {
        if !(0.0..=1.0).contains(&w) {
            return Err(ApiError::unprocessable(
                "weight_out_of_range",
                format!("{name} = {w} outside [0, 1]"),
            ));
        }
    }
    let rows = {
        let store = state.store();
        check_time_step(&store, q.method, q.t)?;
        store.query_records(q.method, q.t)?
    };
    Ok(Json(scatter_points(&rows, q.ws, q.we)?))
}

/// One line of the parallel-coordinates plot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecordRow {
    pub sim_id: SimId,
    pub params: Params,
    pub delta_shock: f64,
    pub delta_edge: f64,
    pub delta_rho: Option<f64>,
    /// The density distance is undefined (no shared support).
    pub invalid: bool,
}

pub async fn records(
    State(state): State<Arc<AppState>>,
    query: Result<Query<RecordsQuery>, QueryRejection>,
) -> ApiResult<Json<Vec<RecordRow>>> {
    let Query(q) = query?;
    let store = state.store();
    check_time_step(&store, q.method, q.t)?;
    let rows = store
        .query_records(q.method, q.t)?
        .into_iter()
        .map(|r| RecordRow {
            invalid: !r.is_valid(),
            sim_id: r.sim_id,
            params: r.params,
            delta_shock: r.delta_shock,
            delta_edge: r.delta_edge,
            delta_rho: r.delta_rho,
        })
        .collect();
    Ok(Json(rows))
}

// --- datasets ------------------------------------------------------------

/// A [`SelectionSpec`] as sent by a client; `created_at` is filled in by
/// the server when absent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpecInput {
    pub method_id: MethodId,
    pub time_step: u32,
    pub w_shock: f64,
    pub w_edge: f64,
    #[serde(default = "default_color_by")]
    pub color_by: String,
    #[serde(default)]
    pub filter: FilterExpr,
    pub geometry: Geometry,
    #[serde(default = "one")]
    pub subsample_p: f64,
    #[serde(default)]
    pub subsample_seed: u64,
    #[serde(default)]
    pub description: String,
    #[serde(default)]
    pub created_at: Option<DateTime<Utc>>,
}

fn default_color_by() -> String {
    "profile".into()
}

impl From<SpecInput> for SelectionSpec {
    fn from(s: SpecInput) -> Self {
        SelectionSpec {
            method_id: s.method_id,
            time_step: s.time_step,
            w_shock: s.w_shock,
            w_edge: s.w_edge,
            color_by: s.color_by,
            filter: s.filter,
            geometry: s.geometry,
            subsample_p: s.subsample_p,
            subsample_seed: s.subsample_seed,
            description: s.description,
            created_at: s.created_at.unwrap_or_else(Utc::now),
        }
    }
}

impl From<SelectionSpec> for SpecInput {
    fn from(s: SelectionSpec) -> Self {
        SpecInput {
            method_id: s.method_id,
            time_step: s.time_step,
            w_shock: s.w_shock,
            w_edge: s.w_edge,
            color_by: s.color_by,
            filter: s.filter,
            geometry: s.geometry,
            subsample_p: s.subsample_p,
            subsample_seed: s.subsample_seed,
            description: s.description,
            created_at: Some(s.created_at),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SaveRequest {
    pub spec: SpecInput,
    /// What the client believes is selected; checked against the replay.
    #[serde(default)]
    pub client_selected_ids: Option<Vec<SimId>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SaveResponse {
    pub dataset_id: DatasetId,
    pub members: Vec<SimId>,
}

/// Membership is recomputed here; a differing client list is refused with
/// 409 and both sets.
pub async fn save_dataset(
    State(state): State<Arc<AppState>>,
    body: Result<Json<SaveRequest>, JsonRejection>,
) -> ApiResult<(StatusCode, Json<SaveResponse>)> {
    let Json(req) = body?;
    let spec = SelectionSpec::from(req.spec);
    let store = state.store();
    if let Some(client) = req.client_selected_ids {
        let server: BTreeSet<SimId> = crate::selection::replay(&spec, &store)?.into_iter().collect();
        let client: BTreeSet<SimId> = client.into_iter().collect();
        if server != client {
            return Err(ApiError::new(
                StatusCode::CONFLICT,
                "selection_drift",
                format!(
                    "client selection ({} ids) differs from the server replay ({} ids)",
                    client.len(),
                    server.len()
                ),
            )
            .with_details(serde_json::json!({
                "server_ids": server,
                "client_ids": client,
                "only_server": server.difference(&client).collect::<Vec<_>>(),
                "only_client": client.difference(&server).collect::<Vec<_>>(),
            })));
        }
    }
    let (dataset_id, members) = save_selection(&spec, &store)?;
    Ok((StatusCode::CREATED, Json(SaveResponse { dataset_id, members })))
}

pub async fn list_datasets(State(state): State<Arc<AppState>>) -> ApiResult<Json<Vec<DatasetSummary>>> {
    Ok(Json(state.store().list_datasets()?))
}

pub async fn get_dataset(
    State(state): State<Arc<AppState>>,
    id: Result<Path<i64>, PathRejection>,
) -> ApiResult<Json<TrainingDataset>> {
    Ok(Json(state.store().load_dataset(path_id(id)?)?))
}

pub async fn dataset_settings(
    State(state): State<Arc<AppState>>,
    id: Result<Path<i64>, PathRejection>,
) -> ApiResult<Json<SelectionSpec>> {
    Ok(Json(state.store().load_settings(path_id(id)?)?))
}

pub async fn delete_dataset(
    State(state): State<Arc<AppState>>,
    id: Result<Path<i64>, PathRejection>,
) -> ApiResult<StatusCode> {
    state.store().delete_dataset(path_id(id)?)?;
    Ok(StatusCode::NO_CONTENT)
}

pub async fn export_dataset(
    State(state): State<Arc<AppState>>,
    id: Result<Path<i64>, PathRejection>,
) -> ApiResult<Json<DatasetExport>> {
    Ok(Json(state.store().export_dataset(path_id(id)?)?))
}

// --- misc ----------------------------------------------------------------

pub async fn openapi() -> impl IntoResponse {
    ([(header::CONTENT_TYPE, "application/json")], OPENAPI)
}

pub async fn no_route(uri: Uri) -> ApiError {
    ApiError::not_found(format!("no route for {}", uri.path()))
}

pub async fn wrong_method() -> ApiError {
    ApiError::new(
        StatusCode::METHOD_NOT_ALLOWED,
        "method_not_allowed",
        "method not allowed on this route",
    )
}
