use std::time::Duration;

use crate::provider::HttpRequest;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HttpResponse {
    pub status: u16,
    pub body: String,
}

/// Sends one JSON POST. Errors are connection-level failures; HTTP error
/// statuses come back as responses.
pub trait Transport: Send + Sync {
    fn post_json(&self, req: &HttpRequest, timeout: Duration) -> Result<HttpResponse, String>;
}

pub struct UreqTransport {
    agent: ureq::Agent,
}

impl Default for UreqTransport {
    fn default() -> Self {
        let agent = ureq::Agent::config_builder()
            .http_status_as_error(false)
            .build()
            .into();
        Self { agent }
    }
}

impl Transport for UreqTransport {
    fn post_json(&self, req: &HttpRequest, timeout: Duration) -> Result<HttpResponse, String> {
        let mut builder = self
            .agent
            .post(&req.url)
            .config()
            .timeout_global(Some(timeout))
            .build();
        for (k, v) in &req.headers {
            builder = builder.header(k, v);
        }
        let mut resp = builder.send_json(&req.body).map_err(|e| e.to_string())?;
        let status = resp.status().as_u16();
        let body = resp
            .body_mut()
            .with_config()
            .limit(16 * 1024 * 1024)
            .read_to_string()
            .map_err(|e| e.to_string())?;
        Ok(HttpResponse { status, body })
    }
}
