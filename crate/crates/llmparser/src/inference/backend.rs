use std::sync::Arc;

use serde::{Deserialize, Serialize};

/// Body of a native `/generate` request.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GenerationRequest {
    pub prompt: String,
    pub temperature: f64,
    pub num_beams: u32,
    pub max_length: u32,
}

/// Body of a native `/generate` response.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GenerationResponse {
    pub text: String,
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum BackendError {
    /// The request never got an answer; worth retrying.
    #[error("transport error: {0}")]
    Transport(String),
    /// The endpoint answered with an error.
    #[error("generation failed: {0}")]
    Generation(String),
    #[error("log not in mock table: {0}")]
    UnknownLog(String),
}

/// Anything that turns a prompt into generated text.
pub trait GenerationBackend: Send + Sync {
    fn generate(&self, request: &GenerationRequest) -> Result<String, BackendError>;
}

impl<T: GenerationBackend + ?Sized> GenerationBackend for Arc<T> {
    fn generate(&self, request: &GenerationRequest) -> Result<String, BackendError> {
        (**self).generate(request)
    }
}

impl<T: GenerationBackend + ?Sized> GenerationBackend for &T {
    fn generate(&self, request: &GenerationRequest) -> Result<String, BackendError> {
        (**self).generate(request)
    }
}
