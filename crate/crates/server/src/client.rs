//! Minimal JSON client for the `/api/v1` surface.

use reqwest::{Method, StatusCode};
use serde_json::Value;
use thiserror::Error;

use crate::error::SEQ_HEADER;
use crate::extract::{ACTOR_ID_HEADER, ACTOR_NAME_HEADER};

#[derive(Debug, Error)]
pub enum ClientError {
    #[error("cannot reach {endpoint}: {source}")]
    Connect {
        endpoint: String,
        #[source]
        source: reqwest::Error,
    },
    #[error("{status} {code}: {message}")]
    Api {
        status: StatusCode,
        code: String,
        message: String,
    },
    #[error("unexpected response: {0}")]
    Decode(String),
}

impl ClientError {
    pub fn code(&self) -> Option<&str> {
        match self {
            ClientError::Api { code, .. } => Some(code),
            _ => None,
        }
    }
}

/// A text body together with the board seq it reflects.
#[derive(Debug, Clone)]
pub struct Text {
    pub seq: Option<u64>,
    pub body: String,
}

#[derive(Debug, Clone)]
pub struct Client {
    http: reqwest::Client,
    base: String,
    actor: String,
    display_name: Option<String>,
}

impl Client {
    pub fn new(endpoint: &str, actor: &str) -> Self {
        Self {
            http: reqwest::Client::new(),
            base: format!("{}/api/v1", endpoint.trim_end_matches('/')),
            actor: actor.to_string(),
            display_name: None,
        }
    }

    pub fn with_display_name(mut self, name: &str) -> Self {
        self.display_name = Some(name.to_string());
        self
    }

    pub fn base(&self) -> &str {
        &self.base
    }

    async fn raw(&self, method: Method, path: &str, body: Option<&Value>) -> Result<reqwest::Response, ClientError> {
        let mut req = self
            .http
            .request(method, format!("{}{path}", self.base))
            .header(ACTOR_ID_HEADER, &self.actor);
        if let Some(name) = &self.display_name {
            req = req.header(ACTOR_NAME_HEADER, name);
        }
        if let Some(body) = body {
            req = req.json(body);
        }
        let response = req.send().await.map_err(|source| ClientError::Connect {
            endpoint: self.base.clone(),
            source,
        })?;
        if response.status().is_success() {
            return Ok(response);
        }
        let status = response.status();
        let v: Value = response.json().await.unwrap_or(Value::Null);
        Err(ClientError::Api {
            status,
            code: v["error"]["code"].as_str().unwrap_or("Unknown").to_string(),
            message: v["error"]["message"].as_str().unwrap_or_default().to_string(),
        })
    }

    pub async fn call(&self, method: Method, path: &str, body: Option<&Value>) -> Result<Value, ClientError> {
        self.raw(method, path, body)
            .await?
            .json()
            .await
            .map_err(|e| ClientError::Decode(e.to_string()))
    }

    pub async fn get(&self, path: &str) -> Result<Value, ClientError> {
        self.call(Method::GET, path, None).await
    }

    pub async fn post(&self, path: &str, body: &Value) -> Result<Value, ClientError> {
        self.call(Method::POST, path, Some(body)).await
    }

    pub async fn get_text(&self, path: &str) -> Result<Text, ClientError> {
        let response = self.raw(Method::GET, path, None).await?;
        let seq = response
            .headers()
            .get(SEQ_HEADER)
            .and_then(|v| v.to_str().ok())
            .and_then(|v| v.parse().ok());
        let body = response.text().await.map_err(|e| ClientError::Decode(e.to_string()))?;
        Ok(Text { seq, body })
    }
}
