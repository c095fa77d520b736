//! Client for the embedding service: `GET /info` and `POST /embed`, JSON
//! bodies over HTTP/1.1.

use std::thread;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use ureq::Agent;

use super::{BackendOptions, EmbedBackend, EmbedKind, EmbedResult, EmbeddingVector, Source};
use crate::error::{Error, Result};

/// Largest batch the service accepts; larger requests are chunked.
pub const MAX_BATCH: usize = 256;

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct EmbedRequest {
    pub texts: Vec<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct EmbedResponse {
    pub model_id: String,
    pub dim: usize,
    pub vectors: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct InfoResponse {
    pub model_id: String,
    pub dim: usize,
}

pub struct ServiceBackend {
    base: String,
    agent: Agent,
    retries: u32,
    info: InfoResponse,
}

enum Attempt<T> {
    Done(T),
    Retry(String),
    Fail(String),
}

impl ServiceBackend {
    /// Connects and reads `/info`. Fails if the service cannot be reached.
    pub fn connect(base_url: &str, opts: BackendOptions) -> Result<Self> {
        let agent: Agent = Agent::config_builder()
            .timeout_global(Some(opts.timeout))
            .http_status_as_error(false)
            .build()
            .into();
        let base = base_url.trim_end_matches('/').to_string();
        let mut backend = ServiceBackend {
            base,
            agent,
            retries: opts.retries,
            info: InfoResponse {
                model_id: String::new(),
                dim: 0,
            },
        };
        let info = backend.with_retries(|b| b.try_info())?;
        if info.dim == 0 {
            return Err(Error::backend("service reports dim 0", false));
        }
        backend.info = info;
        Ok(backend)
    }

    pub fn model_id(&self) -> &str {
        &self.info.model_id
    }

    fn with_retries<T>(&self, mut f: impl FnMut(&Self) -> Attempt<T>) -> Result<T> {
        let mut last = String::new();
        for attempt in 0..=self.retries {
            if attempt > 0 {
                thread::sleep(Duration::from_millis(100 << attempt.min(5)));
            }
            match f(self) {
                Attempt::Done(v) => return Ok(v),
                Attempt::Fail(msg) => return Err(Error::backend(msg, false)),
                Attempt::Retry(msg) => last = msg,
            }
        }
        Err(Error::backend(
            format!(
                "{} unreachable after {} attempts: {last}",
                self.base,
                self.retries + 1
            ),
            true,
        ))
    }

    fn try_info(&self) -> Attempt<InfoResponse> {
        let url = format!("{}/info", self.base);
        match self.agent.get(&url).call() {
            Err(e) => Attempt::Retry(e.to_string()),
            Ok(mut resp) => {
                let status = resp.status().as_u16();
                if status >= 500 {
                    return Attempt::Retry(format!("GET /info: status {status}"));
                }
                if status != 200 {
                    return Attempt::Fail(format!("GET /info: status {status}"));
                }
                match resp.body_mut().read_json::<InfoResponse>() {
                    Ok(info) => Attempt::Done(info),
                    Err(e) => Attempt::Fail(format!("GET /info: bad body: {e}")),
                }
            }
        }
    }

    fn try_embed(&self, texts: &[&str]) -> Attempt<EmbedResponse> {
        let url = format!("{}/embed", self.base);
        let body = EmbedRequest {
            texts: texts.iter().map(|s| s.to_string()).collect(),
        };
        match self.agent.post(&url).send_json(&body) {
            Err(e) => Attempt::Retry(e.to_string()),
            Ok(mut resp) => {
                let status = resp.status().as_u16();
                if status != 200 {
                    let detail = resp.body_mut().read_to_string().unwrap_or_default();
                    let msg = format!("POST /embed: status {status}: {}", detail.trim());
                    return if status >= 500 {
                        Attempt::Retry(msg)
                    } else {
                        Attempt::Fail(msg)
                    };
                }
                match resp.body_mut().read_json::<EmbedResponse>() {
                    Ok(r) => Attempt::Done(r),
                    Err(e) => Attempt::Fail(format!("POST /embed: bad body: {e}")),
                }
            }
        }
    }

    fn check_response(&self, sent: usize, resp: EmbedResponse) -> Result<Vec<EmbedResult>> {
        if resp.vectors.len() != sent {
            return Err(Error::backend(
                format!(
                    "service returned {} vectors for {sent} texts",
                    resp.vectors.len()
                ),
                false,
            ));
        }
        if resp.dim != self.info.dim {
            return Err(Error::backend(
                format!("service dim changed from {} to {}", self.info.dim, resp.dim),
                false,
            ));
        }
        resp.vectors
            .into_iter()
            .map(|v| {
                if v.len() != self.info.dim {
                    return Err(Error::backend(
                        format!(
                            "vector of length {} from service with dim {}",
                            v.len(),
                            self.info.dim
                        ),
                        false,
                    ));
                }
                let vector = EmbeddingVector::new(v)
                    .map_err(|e| Error::backend(format!("service vector rejected: {e}"), false))?;
                Ok(EmbedResult::Hit {
                    vector,
                    source: Source::Remote,
                })
            })
            .collect()
    }
}

impl EmbedBackend for ServiceBackend {
    fn name(&self) -> &'static str {
        "service"
    }

    fn dim(&self) -> usize {
        self.info.dim
    }

    fn describe(&self) -> String {
        format!(
            "service {} (model {}, dim {})",
            self.base, self.info.model_id, self.info.dim
        )
    }

    // Words and sentences go through the same endpoint.
    fn embed_batch(&self, _kind: EmbedKind, texts: &[&str]) -> Result<Vec<EmbedResult>> {
        let mut out = Vec::with_capacity(texts.len());
        for chunk in texts.chunks(MAX_BATCH) {
            let resp = self.with_retries(|b| b.try_embed(chunk))?;
            out.extend(self.check_response(chunk.len(), resp)?);
        }
        Ok(out)
    }
}
