use serde::Deserialize;
use serde_json::json;

use super::{EntityExtractor, EntitySpan, IngestError};
use crate::http::{PacedClient, RetryPolicy};

/// Client for an external NER service exposing `POST /ner`.
#[derive(Debug)]
pub struct NerClient {
    endpoint: String,
    http: PacedClient,
}

#[derive(Deserialize)]
struct NerResponse {
    entities: Vec<EntitySpan>,
}

impl NerClient {
    pub fn new(base_url: &str, policy: RetryPolicy) -> Self {
        NerClient {
            endpoint: format!("{}/ner", base_url.trim_end_matches('/')),
            http: PacedClient::new(policy),
        }
    }
}

impl EntityExtractor for NerClient {
    fn extract(&self, text: &str) -> Result<Vec<EntitySpan>, IngestError> {
        let value = self
            .http
            .post_json(&self.endpoint, &json!({ "text": text }))
            .map_err(|e| IngestError::ExtractorUnavailable(e.to_string()))?;
        let parsed: NerResponse = serde_json::from_value(value)
            .map_err(|e| IngestError::ExtractorUnavailable(format!("bad /ner response: {e}")))?;
        Ok(parsed.entities)
    }
}
