//! In-process HTTP calls against the router, schema checks against the
//! shipped OpenAPI document, and contract sweeps.

use std::collections::{BTreeMap, BTreeSet};

use axum::body::Body;
use axum::http::{header, HeaderMap, Method, Request, StatusCode};
use axum::Router;
use http_body_util::BodyExt;
use jsonschema::{Draft, JSONSchema};
use serde_json::{json, Value};
use tower::ServiceExt;

use ensemble_select::api::OPENAPI;
use ensemble_select::{MethodId, SelectionSpec, SimId};

pub struct Contract {
    doc: Value,
}

impl Contract {
    pub fn load() -> Self {
        Self {
            doc: serde_json::from_str(OPENAPI).expect("openapi.json parses"),
        }
    }

    pub fn schema_names(&self) -> Vec<String> {
        self.doc["components"]["schemas"]
            .as_object()
            .unwrap()
            .keys()
            .cloned()
            .collect()
    }

    /// Validate `value` against `components.schemas.<name>`; a `[]` suffix
    /// means an array of that schema.
    pub fn check(&self, name: &str, value: &Value) -> Result<(), String> {
        let (base, array) = match name.strip_suffix("[]") {
            Some(b) => (b, true),
            None => (name, false),
        };
        if self.doc["components"]["schemas"].get(base).is_none() {
            return Err(format!("no schema named {base}"));
        }
        let reference = json!({ "$ref": format!("#/components/schemas/{base}") });
        let mut root = self.doc.clone();
        let root_obj = root.as_object_mut().unwrap();
        if array {
            root_obj.insert("type".into(), json!("array"));
            root_obj.insert("items".into(), reference);
        } else {
            root_obj.insert("$ref".into(), reference["$ref"].clone());
        }
        let compiled = JSONSchema::options()
            .with_draft(Draft::Draft202012)
            .should_validate_formats(true)
            .compile(&root)
            .map_err(|e| format!("schema {name} does not compile: {e}"))?;
        compiled.validate(value).map_err(|errors| {
            let msgs: Vec<String> = errors
                .map(|e| format!("{} at {}", e, e.instance_path))
                .take(5)
                .collect();
            format!("{name}: {}", msgs.join("; "))
        })
    }
}

#[derive(Debug, Clone)]
pub struct Reply {
    pub status: StatusCode,
    pub headers: HeaderMap,
    pub body: Value,
}

pub async fn call(router: &Router, method: Method, uri: &str, body: Option<&Value>) -> Reply {
    let mut req = Request::builder().method(method).uri(uri);
    let body = match body {
        Some(v) => {
            req = req.header(header::CONTENT_TYPE, "application/json");
            Body::from(v.to_string())
        }
        None => Body::empty(),
    };
    raw(router, req.body(body).unwrap()).await
}

pub async fn raw(router: &Router, req: Request<Body>) -> Reply {
    let resp = router.clone().oneshot(req).await.unwrap();
    let status = resp.status();
    let headers = resp.headers().clone();
    let bytes = resp.into_body().collect().await.unwrap().to_bytes();
    let body = if bytes.is_empty() {
        Value::Null
    } else {
        serde_json::from_slice(&bytes).unwrap_or_else(|_| Value::String(String::from_utf8_lossy(&bytes).into()))
    };
    Reply { status, headers, body }
}

pub async fn get(router: &Router, uri: &str) -> Reply {
    call(router, Method::GET, uri, None).await
}

pub async fn post(router: &Router, uri: &str, body: &Value) -> Reply {
    call(router, Method::POST, uri, Some(body)).await
}

/// Collects failed expectations instead of panicking at the first one.
pub struct Checks<'a> {
    pub contract: &'a Contract,
    pub count: usize,
    pub failures: Vec<String>,
}

impl<'a> Checks<'a> {
    pub fn new(contract: &'a Contract) -> Self {
        Self {
            contract,
            count: 0,
            failures: Vec::new(),
        }
    }

    pub fn ensure(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.count += 1;
        if !ok {
            self.failures.push(what());
        }
    }

    /// Status matches and the body validates against `schema` (errors
    /// always against `ApiError`).
    pub fn reply(&mut self, label: &str, r: &Reply, status: u16, schema: &str) {
        self.ensure(r.status.as_u16() == status, || {
            format!("{label}: status {} (wanted {status}), body {}", r.status, r.body)
        });
        let schema = if r.status.is_client_error() || r.status.is_server_error() {
            "ApiError"
        } else {
            schema
        };
        if schema.is_empty() {
            return;
        }
        let result = self.contract.check(schema, &r.body);
        self.ensure(result.is_ok(), || format!("{label}: {}", result.unwrap_err()));
    }

    pub fn error_code(&mut self, label: &str, r: &Reply, code: &str) {
        self.ensure(r.body["code"] == code, || {
            format!("{label}: code {} (wanted {code})", r.body["code"])
        });
        self.ensure(r.body["status"] == r.status.as_u16(), || {
            format!("{label}: status field mismatch")
        });
    }
}

/// Calls against a store with no simulations, methods or datasets.
pub async fn empty_store_sweep(router: &Router, checks: &mut Checks<'_>) {
    for uri in ["/api/methods", "/api/datasets", "/api/simulations"] {
        let r = get(router, uri).await;
        let schema = match uri {
            "/api/methods" => "MethodView[]",
            "/api/datasets" => "DatasetSummary[]",
            _ => "SimulationRecord[]",
        };
        checks.reply(uri, &r, 200, schema);
        checks.ensure(r.body == json!([]), || format!("{uri}: not empty: {}", r.body));
    }
    for uri in [
        "/api/scatter?method=1&t=1",
        "/api/records?method=1&t=1",
        "/api/datasets/1",
        "/api/datasets/1/settings",
        "/api/datasets/1/export",
        "/api/jobs/1",
        "/api/nowhere",
    ] {
        let r = get(router, uri).await;
        checks.reply(uri, &r, 404, "");
        checks.error_code(uri, &r, "not_found");
    }
    let r = call(router, Method::DELETE, "/api/datasets/1", None).await;
    checks.reply("DELETE missing dataset", &r, 404, "");
    let r = post(router, "/api/methods/1/postprocess", &json!({})).await;
    checks.reply("postprocess missing method", &r, 404, "");

    let create = json!({"gt_sim_id": 1, "gt_time_step": 1, "norm": "L2", "description": "x"});
    let r = post(router, "/api/methods", &create).await;
    checks.reply("create method, unknown sim", &r, 404, "");
    let mut bad_norm = create.clone();
    bad_norm["norm"] = json!("L3");
    let r = post(router, "/api/methods", &bad_norm).await;
    checks.reply("create method, bad norm", &r, 422, "");
    checks.error_code("create method, bad norm", &r, "invalid_norm");

    let save = json!({"spec": box_spec(1, 1, "", [0.0, 1.0, 0.0, 1.0], "something")});
    let r = post(router, "/api/datasets", &save).await;
    checks.reply("save, unknown method", &r, 404, "");

    let r = call(router, Method::PUT, "/api/methods", None).await;
    checks.reply("PUT /api/methods", &r, 405, "");
    let r = raw(
        router,
        Request::post("/api/methods")
            .header(header::CONTENT_TYPE, "application/json")
            .body(Body::from("{not json"))
            .unwrap(),
    )
    .await;
    checks.reply("malformed JSON", &r, 400, "");
    let r = post(router, "/api/methods", &json!({"gt_sim_id": 1})).await;
    checks.reply("missing fields", &r, 422, "");
    let r = get(router, "/api/scatter?method=abc&t=1").await;
    checks.reply("non-numeric query", &r, 400, "");
    let r = get(router, "/api/datasets/abc").await;
    checks.reply("non-numeric path", &r, 400, "");

    let r = get(router, "/api/openapi.json").await;
    checks.ensure(
        r.status == StatusCode::OK && r.body["components"]["schemas"].is_object(),
        || "openapi.json not served".into(),
    );
}

pub fn box_spec(method_id: MethodId, t: u32, filter: &str, b: [f64; 4], description: &str) -> Value {
    json!({
        "method_id": method_id,
        "time_step": t,
        "w_shock": 1.0,
        "w_edge": 0.0,
        "color_by": "cs",
        "filter": filter,
        "geometry": {"type": "box", "x_min": b[0], "x_max": b[1], "y_min": b[2], "y_max": b[3]},
        "subsample_p": 1.0,
        "subsample_seed": 11,
        "description": description,
        "created_at": "2024-05-01T12:00:00.123456789Z",
    })
}

pub struct Populated {
    pub method_id: MethodId,
    pub gt_sim: SimId,
    pub gt_t: u32,
    pub t_max: u32,
    pub n_sims: usize,
}

/// Calls against a store whose method `p.method_id` is fully
/// post-processed. Leaves no datasets behind.
pub async fn populated_sweep(router: &Router, p: &Populated, checks: &mut Checks<'_>) {
    let m = p.method_id;
    let r = get(router, "/api/methods").await;
    checks.reply("list methods", &r, 200, "MethodView[]");
    let listed = r.body.as_array().into_iter().flatten().find(|v| v["method_id"] == m);
    checks.ensure(
        listed
            .is_some_and(|v| v["record_count"] == p.n_sims * p.t_max as usize && v["ground_truth_sim_id"] == p.gt_sim),
        || format!("method {m} listing: {}", r.body),
    );

    let r = get(router, "/api/simulations").await;
    checks.reply("list simulations", &r, 200, "SimulationRecord[]");
    checks.ensure(r.body.as_array().map(Vec::len) == Some(p.n_sims), || {
        "simulation count".into()
    });

    let uri = format!("/api/records?method={m}&t={}", p.gt_t);
    let records = get(router, &uri).await;
    checks.reply(&uri, &records, 200, "RecordRow[]");
    let rows = records.body.as_array().cloned().unwrap_or_default();
    checks.ensure(rows.len() == p.n_sims, || format!("{uri}: {} rows", rows.len()));
    let gt_row = rows.iter().find(|r| r["sim_id"] == p.gt_sim);
    checks.ensure(
        gt_row.is_some_and(|r| {
            r["delta_shock"] == 0.0 && r["delta_edge"] == 0.0 && r["delta_rho"] == 0.0 && r["invalid"] == false
        }),
        || format!("ground truth row not zero: {gt_row:?}"),
    );

    let uri = format!("/api/scatter?method={m}&t={}&ws=1&we=0", p.gt_t);
    let scatter = get(router, &uri).await;
    checks.reply(&uri, &scatter, 200, "ScatterPoint[]");
    let points = scatter.body.as_array().cloned().unwrap_or_default();
    let shock: BTreeMap<i64, f64> = rows
        .iter()
        .map(|r| (r["sim_id"].as_i64().unwrap(), r["delta_shock"].as_f64().unwrap()))
        .collect();
    checks.ensure(
        !points.is_empty()
            && points
                .iter()
                .all(|pt| Some(pt["x"].as_f64().unwrap()) == shock.get(&pt["sim_id"].as_i64().unwrap()).copied()),
        || "scatter x differs from the dshock column with ws=1, we=0".into(),
    );
    let gt_point = points.iter().find(|pt| pt["sim_id"] == p.gt_sim);
    checks.ensure(gt_point.is_some_and(|pt| pt["x"] == 0.0 && pt["y"] == 0.0), || {
        format!("ground truth point not at the origin: {gt_point:?}")
    });

    for (uri, status) in [
        (format!("/api/scatter?method={m}&t={}", p.t_max + 1), 422),
        (format!("/api/scatter?method={m}&t=0"), 422),
        (format!("/api/scatter?method={m}&t=1&ws=1.5"), 422),
        (format!("/api/scatter?method={m}&t=1&we=-0.1"), 422),
        (format!("/api/records?method={m}&t={}", p.t_max + 1), 422),
        ("/api/scatter?method=999&t=1".into(), 404),
        ("/api/records?method=999&t=1".into(), 404),
        (format!("/api/scatter?method={m}"), 400),
        ("/api/jobs/999".into(), 404),
    ] {
        let r = get(router, &uri).await;
        checks.reply(&uri, &r, status, "");
    }

    // A selection: lower half of the abscissa among profile-0 points.
    let mut xs: Vec<f64> = points.iter().map(|pt| pt["x"].as_f64().unwrap()).collect();
    xs.sort_by(f64::total_cmp);
    let x_med = xs[xs.len() / 2];
    let y_max = points.iter().map(|pt| pt["y"].as_f64().unwrap()).fold(0.0, f64::max);
    let expected: BTreeSet<i64> = points
        .iter()
        .filter(|pt| pt["x"].as_f64().unwrap() <= x_med && pt["params"]["profile"] == 0 && pt["params"]["s1"] == 0)
        .map(|pt| pt["sim_id"].as_i64().unwrap())
        .collect();
    let filter = "profile 0; s1 0";
    let spec = box_spec(m, p.gt_t, filter, [0.0, x_med, 0.0, y_max], "lower half, profile 0");

    let mut no_desc = spec.clone();
    no_desc["description"] = json!("");
    let r = post(router, "/api/datasets", &json!({ "spec": no_desc })).await;
    checks.reply("save without description", &r, 422, "");
    let mut nowhere = spec.clone();
    nowhere["geometry"] = json!({"type": "box", "x_min": 1e6, "x_max": 2e6, "y_min": 1e6, "y_max": 2e6});
    let r = post(router, "/api/datasets", &json!({ "spec": nowhere })).await;
    checks.reply("save empty selection", &r, 422, "");
    checks.error_code("save empty selection", &r, "empty_selection");
    let mut flat = spec.clone();
    flat["geometry"] = json!({"type": "lasso", "vertices": [[0, 0], [1, 1], [2, 2]]});
    let r = post(router, "/api/datasets", &json!({ "spec": flat })).await;
    checks.reply("save collinear lasso", &r, 422, "");

    let mut drifted: Vec<i64> = expected.iter().copied().skip(1).collect();
    drifted.push(1_000_000);
    let r = post(
        router,
        "/api/datasets",
        &json!({ "spec": spec, "client_selected_ids": drifted }),
    )
    .await;
    checks.reply("save with drifted client ids", &r, 409, "");
    checks.error_code("save with drifted client ids", &r, "selection_drift");
    let server_ids: Option<BTreeSet<i64>> = serde_json::from_value(r.body["details"]["server_ids"].clone()).ok();
    let client_ids: Option<BTreeSet<i64>> = serde_json::from_value(r.body["details"]["client_ids"].clone()).ok();
    checks.ensure(server_ids.as_ref() == Some(&expected), || "drift: server_ids".into());
    checks.ensure(client_ids == Some(drifted.iter().copied().collect()), || {
        "drift: client_ids".into()
    });
    let r = get(router, "/api/datasets").await;
    checks.ensure(r.body == json!([]), || "a refused save left a dataset behind".into());

    let r = post(
        router,
        "/api/datasets",
        &json!({ "spec": spec, "client_selected_ids": expected }),
    )
    .await;
    checks.reply("save", &r, 201, "SaveResponse");
    let members: Option<BTreeSet<i64>> = serde_json::from_value(r.body["members"].clone()).ok();
    checks.ensure(members.as_ref() == Some(&expected), || {
        format!("saved members {:?} vs {expected:?}", members)
    });
    let Some(id) = r.body["dataset_id"].as_i64() else {
        checks.ensure(false, || "no dataset id".into());
        return;
    };

    let r = get(router, &format!("/api/datasets/{id}/settings")).await;
    checks.reply("settings", &r, 200, "SelectionSpec");
    let sent: SelectionSpec = serde_json::from_value(spec.clone()).unwrap();
    let got: Option<SelectionSpec> = serde_json::from_value(r.body.clone()).ok();
    checks.ensure(got.as_ref() == Some(&sent), || {
        format!("settings differ: {:?} vs {sent:?}", got)
    });

    let r = get(router, &format!("/api/datasets/{id}/export")).await;
    checks.reply("export", &r, 200, "DatasetExport");
    checks.ensure(r.body["filter_string"] == filter, || {
        format!("export filter {}", r.body["filter_string"])
    });
    checks.ensure(
        r.body["members"].as_array().map(Vec::len) == Some(expected.len()),
        || "export members".into(),
    );

    let r = get(router, &format!("/api/datasets/{id}")).await;
    checks.reply("dataset", &r, 200, "TrainingDataset");
    let r = get(router, "/api/datasets").await;
    checks.reply("list datasets", &r, 200, "DatasetSummary[]");
    checks.ensure(
        r.body[0]["member_count"] == expected.len() && r.body[0]["selection_type"] == "BOX",
        || format!("dataset listing {}", r.body),
    );

    // GETs are repeatable and change nothing.
    let gets = [
        "/api/methods".to_string(),
        "/api/simulations".into(),
        "/api/datasets".into(),
        format!("/api/datasets/{id}"),
        format!("/api/datasets/{id}/settings"),
        format!("/api/datasets/{id}/export"),
        format!("/api/records?method={m}&t=1"),
        format!("/api/scatter?method={m}&t=1&ws=0.3&we=0.7"),
        "/api/datasets/999".into(),
        "/api/openapi.json".into(),
    ];
    for uri in &gets {
        let a = get(router, uri).await;
        let b = get(router, uri).await;
        checks.ensure(a.status == b.status && a.body == b.body, || {
            format!("GET {uri} not repeatable")
        });
    }

    let r = call(router, Method::DELETE, &format!("/api/datasets/{id}"), None).await;
    checks.reply("delete", &r, 204, "");
    for uri in [format!("/api/datasets/{id}"), format!("/api/datasets/{id}/settings")] {
        let r = get(router, &uri).await;
        checks.reply(&format!("{uri} after delete"), &r, 404, "");
    }
    let r = call(router, Method::DELETE, &format!("/api/datasets/{id}"), None).await;
    checks.reply("delete twice", &r, 404, "");
}
