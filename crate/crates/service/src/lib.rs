//! HTTP/JSON service over the adaptation pipeline: `/v1/run`, `/v1/synth`,
//! and `/v1/eval` mirror the engine's three operations; `/v1/defaults`
//! exposes the effective configuration defaults.
//!
//! The service is stateless and filesystem-backed: requests carry
//! server-local paths, handlers do the work on the blocking pool, and every
//! artifact lands on disk exactly as the engine wrote it.

use std::path::{Path, PathBuf};

use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};

use doa_api::{
    ApiError, ApiErrorKind, EvalRequest, EvalResponse, FrameScore, HealthResponse, MetricsReport,
    RunArtifacts, RunRequest, RunResponse, SynthRequest, SynthResponse,
};
use doa_core::metrics::SequenceReport;
use doa_core::pipeline::{self, PipelineConfig, SequenceLayout};
use doa_core::synth;
use doa_core::ErrorKind;

pub fn router() -> Router {
    Router::new()
        .route("/health", get(health))
        .route("/v1/defaults", get(defaults))
        .route("/v1/run", post(run))
        .route("/v1/synth", post(run_synth))
        .route("/v1/eval", post(run_eval))
}

/// Serves the router until the listener closes.
pub async fn serve(listener: tokio::net::TcpListener) -> std::io::Result<()> {
    tracing::info!(addr = %listener.local_addr()?, "doa service listening");
    axum::serve(listener, router()).await
}

struct ServiceError(StatusCode, ApiError);

impl IntoResponse for ServiceError {
    fn into_response(self) -> Response {
        (self.0, Json(self.1)).into_response()
    }
}

fn map_error(err: doa_core::Error) -> ServiceError {
    let (status, kind) = match err.kind() {
        ErrorKind::NoForeground => (StatusCode::UNPROCESSABLE_ENTITY, ApiErrorKind::NoForeground),
        ErrorKind::Format => (StatusCode::BAD_REQUEST, ApiErrorKind::Format),
        ErrorKind::Dimension => (StatusCode::UNPROCESSABLE_ENTITY, ApiErrorKind::Dimension),
        ErrorKind::Io => (StatusCode::INTERNAL_SERVER_ERROR, ApiErrorKind::Io),
        ErrorKind::Other => (StatusCode::INTERNAL_SERVER_ERROR, ApiErrorKind::Internal),
    };
    let frame = match &err {
        doa_core::Error::NoForegroundFound { frame } => Some(*frame),
        _ => None,
    };
    ServiceError(
        status,
        ApiError {
            kind,
            message: err.to_string(),
            frame,
        },
    )
}

fn internal(message: String) -> ServiceError {
    ServiceError(
        StatusCode::INTERNAL_SERVER_ERROR,
        ApiError {
            kind: ApiErrorKind::Internal,
            message,
            frame: None,
        },
    )
}

/// Runs CPU-bound engine work off the async executor.
async fn blocking<T, F>(task: F) -> Result<T, ServiceError>
where
    T: Send + 'static,
    F: FnOnce() -> doa_core::Result<T> + Send + 'static,
{
    tokio::task::spawn_blocking(task)
        .await
        .map_err(|e| internal(format!("worker panicked: {e}")))?
        .map_err(map_error)
}

async fn health() -> Json<HealthResponse> {
    Json(HealthResponse {
        status: "ok".to_string(),
        service: env!("CARGO_PKG_NAME").to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
    })
}

async fn defaults() -> Json<PipelineConfig> {
    Json(PipelineConfig::default())
}

fn to_metrics_report(report: &SequenceReport) -> MetricsReport {
    MetricsReport {
        sequence: report.sequence.clone(),
        j_mean: report.j_mean,
        f_mean: report.f_mean,
        frames: report
            .frames
            .iter()
            .map(|s| FrameScore {
                index: s.index,
                j: s.j,
                f: s.f,
            })
            .collect(),
    }
}

fn path_string(path: &Path) -> String {
    path.to_string_lossy().into_owned()
}

async fn run(Json(req): Json<RunRequest>) -> Result<Json<RunResponse>, ServiceError> {
    let response = blocking(move || {
        let mut config = match &req.config_path {
            Some(path) => pipeline::load_config(Path::new(path))?,
            None => PipelineConfig::default(),
        };
        if let Some(eval) = req.eval {
            config.eval_enabled = eval;
        }
        let out_dir = PathBuf::from(&req.out_dir);
        let layout = SequenceLayout::discover(Path::new(&req.sequence_dir))?;
        let summary = pipeline::run_sequence(&layout, &config, &out_dir)?;
        let metrics_path = out_dir.join("metrics.json");
        Ok(RunResponse {
            sequence: summary.sequence,
            frames: summary.frames,
            plan_records: summary.plan_records,
            one_shot_frames: summary.one_shot_frames,
            hard_negatives: summary.hard_negatives,
            metrics: summary.metrics.as_ref().map(to_metrics_report),
            artifacts: RunArtifacts {
                pseudo_gt: path_string(&out_dir.join("pseudo_gt.pgm")),
                plan: path_string(&out_dir.join("plan.json")),
                labels_dir: path_string(&out_dir.join("labels")),
                overlays_dir: path_string(&out_dir.join("overlays")),
                metrics: summary
                    .metrics
                    .is_some()
                    .then(|| path_string(&metrics_path)),
            },
        })
    })
    .await?;
    Ok(Json(response))
}

async fn run_synth(Json(req): Json<SynthRequest>) -> Result<Json<SynthResponse>, ServiceError> {
    let response = blocking(move || {
        let spec = synth::SceneSpec::load(Path::new(&req.spec_path))?;
        let out_dir = PathBuf::from(&req.out_dir);
        let manifest = synth::generate(&spec, &out_dir)?;
        Ok(SynthResponse {
            manifest_path: path_string(&out_dir.join("manifest.json")),
            frames: manifest.n_frames,
            objects: manifest.objects.len(),
        })
    })
    .await?;
    Ok(Json(response))
}

async fn run_eval(Json(req): Json<EvalRequest>) -> Result<Json<EvalResponse>, ServiceError> {
    let response = blocking(move || {
        let out_path = PathBuf::from(&req.out_path);
        let report = pipeline::evaluate_directories(
            Path::new(&req.pred_dir),
            Path::new(&req.gt_dir),
            &out_path,
            req.tolerance,
            req.exclude_endpoints.unwrap_or(true),
        )?;
        Ok(EvalResponse {
            report: to_metrics_report(&report),
            out_path: path_string(&out_path),
        })
    })
    .await?;
    Ok(Json(response))
}
