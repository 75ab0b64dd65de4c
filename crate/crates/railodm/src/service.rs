//! HTTP/JSON tuning service.
//!
//! The fitted model and its held-out rows are loaded once and never change.
//! Only the weight table is writable. Evaluation requests become jobs that a
//! single worker runs in submission order; a job id is derived from its
//! parameters, so resubmitting identical parameters returns the existing job.

use std::collections::HashMap;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex, RwLock};

use axum::body::Bytes;
use axum::extract::{Path as UrlPath, Query, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use railodm_core::classifier::{Variant, WeightTable};
use railodm_core::odm::OperationalState;
use railodm_core::route::{derive_milestones, RouteSpec};
use railodm_core::sim::TraceStep;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use tokio::sync::mpsc;

use crate::error::{Error, Result};
use crate::hashing::sha256_hex;
use crate::model_file::load_model;
use crate::pipeline::{Dataset, Evaluator, MODEL_NAME, WEIGHTS_NAME};
use crate::report_file::ReportDocument;
use crate::route_file::{load_route, route_hash, RouteDocument};
use crate::run_file::{LoadedManifest, MANIFEST_NAME};
use crate::weights_file::{
    weights_from_value, weights_hash, weights_to_json, weights_to_value, FieldError,
};

pub const STATE_DIR_ENV: &str = "RAILODM_STATE_DIR";
pub const MAX_TIMELINE_POINTS: usize = 5000;
const REPORTS_DIR: &str = "reports";
const LATEST_REPORT: &str = "latest.json";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum JobKind {
    Generate,
    Fit,
    Evaluate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum JobStatus {
    Queued,
    Running,
    Done,
    Failed,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct JobRecord {
    pub id: String,
    pub kind: JobKind,
    pub params_hash: String,
    pub status: JobStatus,
    pub weights_hash: String,
    pub variants: Vec<Variant>,
    /// Report path relative to the state dir, once done.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub result: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

struct QueuedJob {
    id: String,
    weights: WeightTable,
    variants: Vec<Variant>,
}

struct Shared {
    dir: PathBuf,
    manifest: LoadedManifest,
    route: RouteSpec,
    route_hash: String,
    model_hash: String,
    evaluator: Evaluator,
    weights: RwLock<WeightTable>,
    jobs: Mutex<HashMap<String, JobRecord>>,
    latest: RwLock<Option<ReportDocument>>,
    queue: mpsc::UnboundedSender<QueuedJob>,
}

#[derive(Clone)]
pub struct AppState(Arc<Shared>);

fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let tmp = path.with_extension("tmp");
    std::fs::write(&tmp, contents).map_err(|e| Error::io(&tmp, e))?;
    std::fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

impl AppState {
    /// Loads a state dir produced by `railodm pipeline` (or by generate + fit)
    /// and starts the job worker on the current tokio runtime.
    pub fn open(dir: &Path) -> Result<Self> {
        if !dir.is_dir() {
            return Err(Error::Mismatch(format!(
                "state dir {} does not exist",
                dir.display()
            )));
        }
        let ds = Dataset::load(&dir.join(MANIFEST_NAME))?;
        let model = load_model(&dir.join(MODEL_NAME))?;
        let model_hash = model.hash();
        let weights_path = dir.join(WEIGHTS_NAME);
        let weights = if weights_path.exists() {
            crate::weights_file::load_weights(&weights_path)?
        } else {
            model.weights
        };
        let route = load_route(&ds.manifest.route_path())?;
        let evaluator = Evaluator::new(model, &ds)?;
        let manifest = ds.manifest.clone();
        drop(ds);

        let reports = dir.join(REPORTS_DIR);
        std::fs::create_dir_all(&reports).map_err(|e| Error::io(&reports, e))?;
        let latest_path = reports.join(LATEST_REPORT);
        let latest = if latest_path.exists() {
            Some(crate::report_file::load_report(&latest_path)?)
        } else {
            None
        };

        let (tx, rx) = mpsc::unbounded_channel();
        let state = AppState(Arc::new(Shared {
            dir: dir.to_path_buf(),
            manifest,
            route_hash: route_hash(&route),
            route,
            model_hash,
            evaluator,
            weights: RwLock::new(weights),
            jobs: Mutex::new(HashMap::new()),
            latest: RwLock::new(latest),
            queue: tx,
        }));
        tokio::spawn(worker(state.clone(), rx));
        Ok(state)
    }

    pub fn weights(&self) -> WeightTable {
        *self.0.weights.read().unwrap()
    }

    pub fn job(&self, id: &str) -> Option<JobRecord> {
        self.0.jobs.lock().unwrap().get(id).cloned()
    }

    fn set_job(&self, id: &str, f: impl FnOnce(&mut JobRecord)) {
        if let Some(j) = self.0.jobs.lock().unwrap().get_mut(id) {
            f(j);
        }
    }

    fn params_hash(&self, weights: &WeightTable, variants: &[Variant]) -> String {
        let params = json!({
            "kind": JobKind::Evaluate,
            "model": self.0.model_hash,
            "manifest": self.0.manifest.manifest.hash(),
            "weights": weights_to_value(weights),
            "variants": variants,
        });
        sha256_hex(params.to_string().as_bytes())
    }

    /// Queues an evaluation of the current weights, or returns the job that
    /// already covers the same parameters.
    pub fn submit(&self, variants: Vec<Variant>) -> (JobRecord, bool) {
        let weights = self.weights();
        let params_hash = self.params_hash(&weights, &variants);
        let id = params_hash[..16].to_string();
        let mut jobs = self.0.jobs.lock().unwrap();
        if let Some(j) = jobs.get(&id) {
            if j.status != JobStatus::Failed {
                return (j.clone(), false);
            }
        }
        let rec = JobRecord {
            id: id.clone(),
            kind: JobKind::Evaluate,
            params_hash,
            status: JobStatus::Queued,
            weights_hash: weights_hash(&weights),
            variants: variants.clone(),
            result: None,
            error: None,
        };
        jobs.insert(id.clone(), rec.clone());
        // The receiver lives as long as the runtime; a send can only fail on shutdown.
        let _ = self.0.queue.send(QueuedJob {
            id,
            weights,
            variants,
        });
        (rec, true)
    }

    fn run_job(&self, job: &QueuedJob) -> Result<String> {
        let doc = self.0.evaluator.evaluate(&job.weights, &job.variants)?;
        let rel = format!("{REPORTS_DIR}/{}.json", job.id);
        let json = doc.to_json();
        write_atomic(&self.0.dir.join(&rel), &json)?;
        write_atomic(&self.0.dir.join(REPORTS_DIR).join(LATEST_REPORT), &json)?;
        *self.0.latest.write().unwrap() = Some(doc);
        Ok(rel)
    }

    fn put_weights(&self, table: WeightTable) -> Result<()> {
        let mut w = self.0.weights.write().unwrap();
        write_atomic(&self.0.dir.join(WEIGHTS_NAME), &weights_to_json(&table))?;
        *w = table;
        Ok(())
    }
}

async fn worker(state: AppState, mut rx: mpsc::UnboundedReceiver<QueuedJob>) {
    while let Some(job) = rx.recv().await {
        state.set_job(&job.id, |j| j.status = JobStatus::Running);
        let st = state.clone();
        let outcome = tokio::task::spawn_blocking(move || {
            let r = st.run_job(&job);
            (job, r)
        })
        .await;
        match outcome {
            Ok((job, Ok(rel))) => {
                tracing::info!(job = %job.id, "evaluation done");
                state.set_job(&job.id, |j| {
                    j.status = JobStatus::Done;
                    j.result = Some(rel);
                });
            }
            Ok((job, Err(e))) => {
                tracing::warn!(job = %job.id, error = %e, "evaluation failed");
                state.set_job(&job.id, |j| {
                    j.status = JobStatus::Failed;
                    j.error = Some(e.to_string());
                });
            }
            Err(e) => tracing::error!(error = %e, "evaluation worker panicked"),
        }
    }
}

pub struct ApiError {
    status: StatusCode,
    message: String,
    errors: Vec<FieldError>,
}

impl ApiError {
    fn not_found(message: impl Into<String>) -> Self {
        Self {
            status: StatusCode::NOT_FOUND,
            message: message.into(),
            errors: Vec::new(),
        }
    }

    fn invalid(message: impl Into<String>, errors: Vec<FieldError>) -> Self {
        Self {
            status: StatusCode::UNPROCESSABLE_ENTITY,
            message: message.into(),
            errors,
        }
    }

    fn internal(e: Error) -> Self {
        Self {
            status: StatusCode::INTERNAL_SERVER_ERROR,
            message: e.to_string(),
            errors: Vec::new(),
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (
            self.status,
            Json(json!({ "error": self.message, "errors": self.errors })),
        )
            .into_response()
    }
}

type ApiResult<T> = std::result::Result<T, ApiError>;

async fn get_weights(State(st): State<AppState>) -> Json<Value> {
    Json(weights_to_value(&st.weights()))
}

async fn put_weights(State(st): State<AppState>, body: Bytes) -> ApiResult<Json<Value>> {
    let doc: Value = serde_json::from_slice(&body).map_err(|e| {
        ApiError::invalid(
            "malformed weight table",
            vec![FieldError {
                field: String::new(),
                message: format!("invalid JSON: {e}"),
            }],
        )
    })?;
    let table =
        weights_from_value(&doc).map_err(|errs| ApiError::invalid("invalid weight table", errs))?;
    let st2 = st.clone();
    tokio::task::spawn_blocking(move || st2.put_weights(table))
        .await
        .expect("weights writer does not panic")
        .map_err(ApiError::internal)?;
    Ok(Json(weights_to_value(&table)))
}

async fn get_route(
    State(st): State<AppState>,
    UrlPath(id): UrlPath<String>,
) -> ApiResult<Json<Value>> {
    let h = &st.0.route_hash;
    let known = id == "current" || (id.len() >= 8 && h.starts_with(&id));
    if !known {
        return Err(ApiError::not_found(format!("no route {id:?}")));
    }
    Ok(Json(json!({
        "id": &h[..16],
        "hash": h,
        "route": RouteDocument::from_route(&st.0.route),
        "milestones": derive_milestones(&st.0.route),
    })))
}

async fn list_runs(State(st): State<AppState>) -> Json<Value> {
    let m = &st.0.manifest.manifest;
    let test = &st.0.evaluator.model.training.test_runs;
    let runs: Vec<Value> = m
        .runs
        .iter()
        .map(
            |r| json!({ "id": r.id, "seed": r.seed, "rows": r.rows, "test": test.contains(&r.id) }),
        )
        .collect();
    Json(json!({ "route_id": &st.0.route_hash[..16], "dt": m.dt, "runs": runs }))
}

#[derive(Debug, Deserialize)]
pub struct TimelineQuery {
    pub max_points: Option<usize>,
}

/// Stride-sampled channels plus the state bands at full resolution, so that
/// one-step AWS bands survive downsampling.
pub fn timeline(id: usize, seed: u64, steps: &[TraceStep], max_points: usize) -> Value {
    let n = steps.len();
    let max_points = max_points.clamp(1, MAX_TIMELINE_POINTS);
    let stride = n.div_ceil(max_points).max(1);
    let sampled: Vec<&TraceStep> = steps.iter().step_by(stride).collect();
    let mut bands = Vec::new();
    let mut start = 0;
    for i in 1..=n {
        if i == n || steps[i].state != steps[start].state {
            bands.push(json!({
                "state": steps[start].state,
                "start_step": start,
                "end_step": i - 1,
                "start_t": steps[start].t_s,
                "end_t": steps[i - 1].t_s,
            }));
            start = i;
        }
    }
    json!({
        "run_id": id,
        "seed": seed,
        "total_steps": n,
        "stride": stride,
        "points": sampled.len(),
        "t": sampled.iter().map(|s| s.t_s).collect::<Vec<_>>(),
        "S": sampled.iter().map(|s| s.obs.s).collect::<Vec<_>>(),
        "SL": sampled.iter().map(|s| s.obs.sl).collect::<Vec<_>>(),
        "SLS": sampled.iter().map(|s| s.obs.sls).collect::<Vec<_>>(),
        "state": sampled.iter().map(|s| s.state).collect::<Vec<OperationalState>>(),
        "input": sampled.iter().map(|s| [s.input.power_notch(), s.input.brake_notch()]).collect::<Vec<_>>(),
        "bands": bands,
    })
}

async fn get_timeline(
    State(st): State<AppState>,
    UrlPath(id): UrlPath<String>,
    Query(q): Query<TimelineQuery>,
) -> ApiResult<Json<Value>> {
    let entry = id
        .parse::<usize>()
        .ok()
        .and_then(|i| st.0.manifest.manifest.run(i))
        .cloned()
        .ok_or_else(|| ApiError::not_found(format!("no run {id:?}")))?;
    let st2 = st.clone();
    let steps =
        tokio::task::spawn_blocking(move || st2.0.manifest.load_run(&entry).map(|s| (entry, s)))
            .await
            .expect("run loader does not panic")
            .map_err(ApiError::internal)?;
    let (entry, steps) = steps;
    Ok(Json(timeline(
        entry.id,
        entry.seed,
        &steps,
        q.max_points.unwrap_or(MAX_TIMELINE_POINTS),
    )))
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct EvaluateRequest {
    #[serde(default)]
    variants: Option<Vec<String>>,
}

async fn post_evaluate(
    State(st): State<AppState>,
    body: Bytes,
) -> ApiResult<(StatusCode, Json<JobRecord>)> {
    let req: EvaluateRequest = if body.iter().all(u8::is_ascii_whitespace) {
        EvaluateRequest::default()
    } else {
        serde_json::from_slice(&body).map_err(|e| {
            ApiError::invalid(
                "malformed request",
                vec![FieldError {
                    field: String::new(),
                    message: e.to_string(),
                }],
            )
        })?
    };
    let variants = match req.variants {
        None => Variant::ALL.to_vec(),
        Some(names) => {
            let mut out = Vec::new();
            let mut errs = Vec::new();
            for (i, n) in names.iter().enumerate() {
                match Variant::from_name(n) {
                    Some(v) if !out.contains(&v) => out.push(v),
                    Some(_) => {}
                    None => errs.push(FieldError {
                        field: format!("variants[{i}]"),
                        message: format!("unknown variant {n:?}"),
                    }),
                }
            }
            if out.is_empty() && errs.is_empty() {
                errs.push(FieldError {
                    field: "variants".into(),
                    message: "at least one variant is required".into(),
                });
            }
            if out.contains(&Variant::OwoPi) && !st.0.evaluator.model.model.feature_set().has_pi() {
                errs.push(FieldError {
                    field: "variants".into(),
                    message: "OwO+PI needs a model fitted with previous-input features".into(),
                });
            }
            if !errs.is_empty() {
                return Err(ApiError::invalid("invalid evaluation request", errs));
            }
            out.sort();
            out
        }
    };
    let (job, created) = st.submit(variants);
    Ok((
        if created {
            StatusCode::ACCEPTED
        } else {
            StatusCode::OK
        },
        Json(job),
    ))
}

async fn get_job(
    State(st): State<AppState>,
    UrlPath(id): UrlPath<String>,
) -> ApiResult<Json<JobRecord>> {
    st.job(&id)
        .map(Json)
        .ok_or_else(|| ApiError::not_found(format!("no job {id:?}")))
}

async fn latest_report(State(st): State<AppState>) -> ApiResult<Json<ReportDocument>> {
    st.0.latest
        .read()
        .unwrap()
        .clone()
        .map(Json)
        .ok_or_else(|| ApiError::not_found("no report yet"))
}

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/api/weights", get(get_weights).put(put_weights))
        .route("/api/routes/{id}", get(get_route))
        .route("/api/runs", get(list_runs))
        .route("/api/runs/{id}/timeline", get(get_timeline))
        .route("/api/evaluate", post(post_evaluate))
        .route("/api/jobs/{id}", get(get_job))
        .route("/api/reports/latest", get(latest_report))
        .with_state(state)
}

pub async fn serve(addr: SocketAddr, state_dir: &Path) -> anyhow::Result<()> {
    let state = AppState::open(state_dir)?;
    let listener = tokio::net::TcpListener::bind(addr)
        .await
        .map_err(|e| anyhow::anyhow!("cannot listen on {addr}: {e}"))?;
    tracing::info!(%addr, dir = %state_dir.display(), "serving");
    axum::serve(listener, router(state)).await?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use railodm_core::sim::generate_run;

    use crate::fixtures::swalwell_proxy;

    #[test]
    fn timeline_is_capped_and_keeps_bands() {
        let steps = generate_run(&swalwell_proxy(), 1, 0.1).unwrap().steps;
        let v = timeline(0, 1, &steps, 5000);
        let points = v["points"].as_u64().unwrap() as usize;
        assert!(points <= MAX_TIMELINE_POINTS && points > 4000, "{points}");
        assert_eq!(v["t"][0], 0.0);
        let stride = v["stride"].as_u64().unwrap() as usize;
        assert_eq!(v["t"][1].as_f64().unwrap(), steps[stride].t_s);
        let transitions = steps
            .windows(2)
            .filter(|w| w[0].state != w[1].state)
            .count();
        assert_eq!(v["bands"].as_array().unwrap().len(), transitions + 1);
        let aws = v["bands"]
            .as_array()
            .unwrap()
            .iter()
            .filter(|b| b["state"] == "AWS")
            .count();
        assert_eq!(aws, 6);
    }

    #[test]
    fn short_timeline_is_complete() {
        let steps = generate_run(&swalwell_proxy(), 1, 0.1).unwrap().steps;
        let v = timeline(0, 1, &steps[..100], 5000);
        assert_eq!(v["stride"], 1);
        assert_eq!(v["points"], 100);
        let v = timeline(0, 1, &[], 5000);
        assert_eq!(v["points"], 0);
        assert!(v["bands"].as_array().unwrap().is_empty());
    }
}
