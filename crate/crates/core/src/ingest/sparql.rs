//! Minimal SPARQL protocol client returning JSON result tables.

use std::collections::BTreeMap;
use std::thread;
use std::time::Duration;

use reqwest::blocking::Client;
use reqwest::header::ACCEPT;
use serde::Deserialize;
use thiserror::Error;

use crate::kg_store::EntityId;

const RESULTS_JSON: &str = "application/sparql-results+json";
const USER_AGENT: &str = concat!("disjoint-audit/", env!("CARGO_PKG_VERSION"));

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EndpointConfig {
    pub base_url: String,
    pub timeout: Duration,
    pub max_retries: u32,
    /// Rows per request. `None` sends the query once, unpaginated.
    pub page_size: Option<usize>,
    /// Delay before the first retry; doubled on each further attempt.
    pub backoff: Duration,
}

impl EndpointConfig {
    pub fn new(base_url: impl Into<String>) -> Self {
        EndpointConfig {
            base_url: base_url.into(),
            timeout: Duration::from_secs(60),
            max_retries: 3,
            page_size: None,
            backoff: Duration::from_millis(500),
        }
    }

    pub fn validate(&self) -> Result<(), SparqlError> {
        let bad = |m: &str| Err(SparqlError::Config(m.to_owned()));
        if !(self.base_url.starts_with("http://") || self.base_url.starts_with("https://")) {
            return bad("endpoint URL must start with http:// or https://");
        }
        if self.timeout.is_zero() {
            return bad("timeout must be positive");
        }
        if self.page_size == Some(0) {
            return bad("page size must be at least 1");
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum SparqlError {
    #[error("invalid endpoint configuration: {0}")]
    Config(String),
    #[error("endpoint returned HTTP {status} after {attempts} attempt(s): {excerpt}")]
    Status {
        status: u16,
        attempts: u32,
        excerpt: String,
    },
    #[error("endpoint unreachable after {attempts} attempt(s): {message}")]
    Transport { attempts: u32, message: String },
    #[error("unparsable SPARQL results ({message}): {excerpt}")]
    Parse { message: String, excerpt: String },
}

/// Result rows; unbound variables are absent from a row.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SparqlTable {
    pub vars: Vec<String>,
    pub rows: Vec<BTreeMap<String, String>>,
}

impl SparqlTable {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Value of `var` in `row` read as an entity id, from either an entity
    /// IRI or a bare `Q…` id.
    pub fn entity(&self, row: usize, var: &str) -> Option<EntityId> {
        let v = self.rows.get(row)?.get(var)?;
        EntityId::from_iri(v).or_else(|| v.parse().ok())
    }

    /// Value of `var` in `row` read as an unsigned integer.
    pub fn count(&self, row: usize, var: &str) -> Option<u64> {
        self.rows.get(row)?.get(var)?.parse().ok()
    }
}

#[derive(Deserialize)]
struct JsonResults {
    head: JsonHead,
    results: JsonBindings,
}

#[derive(Deserialize)]
struct JsonHead {
    #[serde(default)]
    vars: Vec<String>,
}

#[derive(Deserialize)]
struct JsonBindings {
    bindings: Vec<BTreeMap<String, JsonTerm>>,
}

#[derive(Deserialize)]
struct JsonTerm {
    value: String,
}

fn excerpt(s: &str) -> String {
    let mut end = s.len().min(300);
    while !s.is_char_boundary(end) {
        end -= 1;
    }
    s[..end].to_owned()
}

/// Parses a `application/sparql-results+json` document.
pub fn parse_results_json(body: &str) -> Result<SparqlTable, SparqlError> {
    let parsed: JsonResults = serde_json::from_str(body).map_err(|e| SparqlError::Parse {
        message: e.to_string(),
        excerpt: excerpt(body),
    })?;
    Ok(SparqlTable {
        vars: parsed.head.vars,
        rows: parsed
            .results
            .bindings
            .into_iter()
            .map(|b| b.into_iter().map(|(k, v)| (k, v.value)).collect())
            .collect(),
    })
}

/// Reusable client for one endpoint.
pub struct SparqlClient {
    config: EndpointConfig,
    http: Client,
}

impl SparqlClient {
    pub fn new(config: EndpointConfig) -> Result<Self, SparqlError> {
        config.validate()?;
        let http = Client::builder()
            .timeout(config.timeout)
            .user_agent(USER_AGENT)
            .build()
            .map_err(|e| SparqlError::Config(e.to_string()))?;
        Ok(SparqlClient { config, http })
    }

    pub fn config(&self) -> &EndpointConfig {
        &self.config
    }

    /// Runs `query`, following LIMIT/OFFSET pages when a page size is set.
    /// Paginated queries should carry an ORDER BY and no LIMIT of their own.
    pub fn select(&self, query: &str) -> Result<SparqlTable, SparqlError> {
        let Some(page) = self.config.page_size else {
            return self.send(query);
        };
        let mut table = SparqlTable::default();
        let mut offset = 0usize;
        loop {
            let paged = format!("{}\nLIMIT {page} OFFSET {offset}", query.trim_end());
            let part = self.send(&paged)?;
            if table.vars.is_empty() {
                table.vars = part.vars;
            }
            let n = part.rows.len();
            table.rows.extend(part.rows);
            if n < page {
                return Ok(table);
            }
            offset += page;
        }
    }

    fn send(&self, query: &str) -> Result<SparqlTable, SparqlError> {
        let mut attempt = 0u32;
        loop {
            attempt += 1;
            let result = self
                .http
                .post(&self.config.base_url)
                .header(ACCEPT, RESULTS_JSON)
                .form(&[("query", query)])
                .send();
            let retry_err = match result {
                Ok(resp) => {
                    let status = resp.status();
                    let body = resp.text().map_err(|e| SparqlError::Transport {
                        attempts: attempt,
                        message: e.to_string(),
                    })?;
                    if status.is_success() {
                        return parse_results_json(&body);
                    }
                    let err = SparqlError::Status {
                        status: status.as_u16(),
                        attempts: attempt,
                        excerpt: excerpt(&body),
                    };
                    if !(status.is_server_error() || status.as_u16() == 429) {
                        return Err(err);
                    }
                    err
                }
                Err(e) => SparqlError::Transport {
                    attempts: attempt,
                    message: e.to_string(),
                },
            };
            if attempt > self.config.max_retries {
                return Err(retry_err);
            }
            let factor = 1u32 << (attempt - 1).min(16);
            let delay = self.config.backoff.saturating_mul(factor).min(Duration::from_secs(30));
            log::warn!("SPARQL request failed ({retry_err}); retrying in {delay:?}");
            thread::sleep(delay);
        }
    }
}

/// One-shot form of [`SparqlClient::select`].
pub fn fetch_sparql(config: &EndpointConfig, query: &str) -> Result<SparqlTable, SparqlError> {
    SparqlClient::new(config.clone())?.select(query)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_validation() {
        assert!(EndpointConfig::new("http://localhost:1/sparql").validate().is_ok());
        assert!(EndpointConfig::new("localhost").validate().is_err());
        let mut c = EndpointConfig::new("http://x");
        c.page_size = Some(0);
        assert!(c.validate().is_err());
        c.page_size = Some(1);
        c.timeout = Duration::ZERO;
        assert!(c.validate().is_err());
    }

    #[test]
    fn parses_json_results() {
        let body = r#"{"head":{"vars":["class","count"]},"results":{"bindings":[
            {"class":{"type":"uri","value":"http://www.wikidata.org/entity/Q7187"},
             "count":{"type":"literal","value":"3","datatype":"http://www.w3.org/2001/XMLSchema#integer"}},
            {"count":{"type":"literal","value":"0"}}]}}"#;
        let t = parse_results_json(body).unwrap();
        assert_eq!(t.vars, ["class", "count"]);
        assert_eq!(t.entity(0, "class"), Some(EntityId::item(7187)));
        assert_eq!(t.count(0, "count"), Some(3));
        assert_eq!(t.entity(1, "class"), None);
    }

    #[test]
    fn parse_error_has_excerpt() {
        let err = parse_results_json("<html>oops</html>").unwrap_err();
        assert!(err.to_string().contains("<html>oops"));
    }

    #[test]
    fn unreachable_endpoint_fails_after_retries() {
        let mut c = EndpointConfig::new("http://127.0.0.1:9/sparql");
        c.max_retries = 2;
        c.backoff = Duration::from_millis(1);
        c.timeout = Duration::from_secs(2);
        match fetch_sparql(&c, "SELECT * WHERE {}") {
            Err(SparqlError::Transport { attempts, .. }) => assert_eq!(attempts, 3),
            other => panic!("{other:?}"),
        }
    }
}
