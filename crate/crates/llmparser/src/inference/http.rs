//! HTTP generation client.
//!
//! The native dialect posts `{"prompt","temperature","num_beams","max_length"}`
//! to `<endpoint>/generate` and reads `{"text"}`. The OpenAI dialect posts to
//! `<endpoint>/v1/completions` and reads `choices[0].text`.

use serde::Deserialize;

use super::backend::{BackendError, GenerationBackend, GenerationRequest, GenerationResponse};
use super::{EndpointDialect, GenerationConfig};

#[derive(Debug)]
pub struct HttpBackend {
    agent: ureq::Agent,
    url: String,
    dialect: EndpointDialect,
}

#[derive(Deserialize)]
struct CompletionChoice {
    text: String,
}

#[derive(Deserialize)]
struct CompletionResponse {
    choices: Vec<CompletionChoice>,
}

fn join_path(base: &str, path: &str) -> String {
    let base = base.trim_end_matches('/');
    if base.ends_with(path) {
        base.to_string()
    } else {
        format!("{base}{path}")
    }
}

impl HttpBackend {
    pub fn new(config: &GenerationConfig) -> Self {
        let agent = ureq::AgentBuilder::new().timeout(config.timeout).build();
        let path = match config.dialect {
            EndpointDialect::Native => "/generate",
            EndpointDialect::OpenAi => "/v1/completions",
        };
        Self {
            agent,
            url: join_path(&config.endpoint_url, path),
            dialect: config.dialect,
        }
    }

    pub fn url(&self) -> &str {
        &self.url
    }

    fn post(&self, body: serde_json::Value) -> Result<ureq::Response, BackendError> {
        match self.agent.post(&self.url).send_json(body) {
            Ok(resp) => Ok(resp),
            Err(ureq::Error::Status(code, resp)) => {
                let detail = resp.into_string().unwrap_or_default();
                Err(BackendError::Generation(format!("HTTP {code}: {}", detail.trim())))
            }
            Err(ureq::Error::Transport(t)) => Err(BackendError::Transport(t.to_string())),
        }
    }
}

impl GenerationBackend for HttpBackend {
    fn generate(&self, request: &GenerationRequest) -> Result<String, BackendError> {
        let malformed = |e: std::io::Error| BackendError::Generation(format!("malformed response: {e}"));
        match self.dialect {
            EndpointDialect::Native => {
                let body = serde_json::to_value(request).expect("request serialises");
                let resp: GenerationResponse = self.post(body)?.into_json().map_err(malformed)?;
                Ok(resp.text)
            }
            EndpointDialect::OpenAi => {
                let body = serde_json::json!({
                    "prompt": request.prompt,
                    "temperature": request.temperature,
                    "max_tokens": request.max_length,
                    "best_of": request.num_beams,
                    "n": 1,
                });
                let resp: CompletionResponse = self.post(body)?.into_json().map_err(malformed)?;
                resp.choices
                    .into_iter()
                    .next()
                    .map(|c| c.text)
                    .ok_or_else(|| BackendError::Generation("response has no choices".into()))
            }
        }
    }
}
