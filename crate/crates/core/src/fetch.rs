//! Downloading a page's raw HTML. No scripts run; the body is saved as served.

use std::time::Duration;

use thiserror::Error;

pub const MAX_REDIRECTS: usize = 5;

#[derive(Debug, Error)]
pub enum FetchError {
    #[error("invalid URL {0:?}")]
    InvalidUrl(String),
    #[error("request failed: {0}")]
    Network(String),
    #[error("server answered HTTP {status} for {url}")]
    Status { url: String, status: u16 },
}

#[derive(Debug, Clone)]
pub struct Fetched {
    pub final_url: String,
    pub content_type: Option<String>,
    pub body: Vec<u8>,
    pub warnings: Vec<String>,
}

pub fn fetch_html(url: &str, timeout: Duration) -> Result<Fetched, FetchError> {
    let parsed = reqwest::Url::parse(url).map_err(|_| FetchError::InvalidUrl(url.to_string()))?;
    if !matches!(parsed.scheme(), "http" | "https") {
        return Err(FetchError::InvalidUrl(url.to_string()));
    }
    let client = reqwest::blocking::Client::builder()
        .timeout(timeout)
        .redirect(reqwest::redirect::Policy::limited(MAX_REDIRECTS))
        .build()
        .map_err(|e| FetchError::Network(e.to_string()))?;
    let resp = client.get(parsed).send().map_err(|e| FetchError::Network(e.to_string()))?;
    let final_url = resp.url().to_string();
    let status = resp.status();
    if !status.is_success() {
        return Err(FetchError::Status { url: final_url, status: status.as_u16() });
    }
    let content_type = resp
        .headers()
        .get(reqwest::header::CONTENT_TYPE)
        .and_then(|v| v.to_str().ok())
        .map(str::to_string);
    let mut warnings = Vec::new();
    if let Some(ct) = &content_type {
        if !ct.contains("html") {
            warnings.push(format!("content type is {ct}, not HTML"));
        }
    }
    let body = resp.bytes().map_err(|e| FetchError::Network(e.to_string()))?.to_vec();
    Ok(Fetched { final_url, content_type, body, warnings })
}
