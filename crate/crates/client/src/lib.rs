//! Thin async client for the adaptation service. One method per endpoint;
//! non-2xx responses decode into the service's structured [`ApiError`].

use doa_api::{
    ApiError, EvalRequest, EvalResponse, HealthResponse, RunRequest, RunResponse, SynthRequest,
    SynthResponse,
};
use serde::de::DeserializeOwned;
use serde::Serialize;

#[derive(Debug, thiserror::Error)]
pub enum ClientError {
    /// The service answered with a structured failure.
    #[error("{0}")]
    Api(ApiError),
    #[error("transport: {0}")]
    Transport(#[from] reqwest::Error),
    #[error("unexpected response ({status}): {body}")]
    Unexpected { status: u16, body: String },
}

impl ClientError {
    pub fn api(&self) -> Option<&ApiError> {
        match self {
            ClientError::Api(e) => Some(e),
            _ => None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct DoaClient {
    base_url: String,
    http: reqwest::Client,
}

impl DoaClient {
    pub fn new(base_url: impl Into<String>) -> Self {
        DoaClient {
            base_url: base_url.into().trim_end_matches('/').to_string(),
            http: reqwest::Client::new(),
        }
    }

    pub fn base_url(&self) -> &str {
        &self.base_url
    }

    async fn decode<T: DeserializeOwned>(response: reqwest::Response) -> Result<T, ClientError> {
        let status = response.status();
        if status.is_success() {
            return Ok(response.json().await?);
        }
        let body = response.text().await.unwrap_or_default();
        match serde_json::from_str::<ApiError>(&body) {
            Ok(api) => Err(ClientError::Api(api)),
            Err(_) => Err(ClientError::Unexpected {
                status: status.as_u16(),
                body,
            }),
        }
    }

    async fn post<Req: Serialize, Resp: DeserializeOwned>(
        &self,
        path: &str,
        request: &Req,
    ) -> Result<Resp, ClientError> {
        let response = self
            .http
            .post(format!("{}{path}", self.base_url))
            .json(request)
            .send()
            .await?;
        Self::decode(response).await
    }

    pub async fn health(&self) -> Result<HealthResponse, ClientError> {
        let response = self
            .http
            .get(format!("{}/health", self.base_url))
            .send()
            .await?;
        Self::decode(response).await
    }

    /// Effective configuration defaults, as the service reports them.
    pub async fn defaults(&self) -> Result<serde_json::Value, ClientError> {
        let response = self
            .http
            .get(format!("{}/v1/defaults", self.base_url))
            .send()
            .await?;
        Self::decode(response).await
    }

    pub async fn run(&self, request: &RunRequest) -> Result<RunResponse, ClientError> {
        self.post("/v1/run", request).await
    }

    pub async fn synth(&self, request: &SynthRequest) -> Result<SynthResponse, ClientError> {
        self.post("/v1/synth", request).await
    }

    pub async fn eval(&self, request: &EvalRequest) -> Result<EvalResponse, ClientError> {
        self.post("/v1/eval", request).await
    }
}
