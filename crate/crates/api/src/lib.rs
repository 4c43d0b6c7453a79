//! Request/response types of the adaptation service's HTTP/JSON surface.
//!
//! Path fields are server-local: the service reads and writes the
//! filesystem it runs on, and returns artifact paths under the requested
//! output directory.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

/// Failure classification carried on error responses; maps onto the CLI
/// exit codes (no_foreground = 2, format/io = 3, dimension = 4).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ApiErrorKind {
    NoForeground,
    Format,
    Dimension,
    Io,
    Internal,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApiError {
    pub kind: ApiErrorKind,
    pub message: String,
    /// Frame the failure names, when it names one.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub frame: Option<usize>,
}

impl std::fmt::Display for ApiError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.message)
    }
}

impl std::error::Error for ApiError {}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HealthResponse {
    pub status: String,
    pub service: String,
    pub version: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRequest {
    pub sequence_dir: String,
    pub out_dir: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub config_path: Option<String>,
    /// Forces evaluation on or off; absent defers to the config file.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub eval: Option<bool>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrameScore {
    pub index: usize,
    pub j: f64,
    pub f: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub sequence: String,
    pub j_mean: f64,
    pub f_mean: f64,
    pub frames: Vec<FrameScore>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunArtifacts {
    pub pseudo_gt: String,
    pub plan: String,
    pub labels_dir: String,
    pub overlays_dir: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub metrics: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunResponse {
    pub sequence: String,
    pub frames: usize,
    pub plan_records: usize,
    pub one_shot_frames: usize,
    /// Hard-negative proposal record indices per frame.
    pub hard_negatives: BTreeMap<usize, Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub metrics: Option<MetricsReport>,
    pub artifacts: RunArtifacts,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthRequest {
    pub spec_path: String,
    pub out_dir: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthResponse {
    pub manifest_path: String,
    pub frames: usize,
    pub objects: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalRequest {
    pub pred_dir: String,
    pub gt_dir: String,
    pub out_path: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub tolerance: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub exclude_endpoints: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalResponse {
    pub report: MetricsReport,
    pub out_path: String,
}
