use std::collections::HashMap;
use std::io::BufRead;
use std::path::Path;
use std::sync::Mutex;

use serde::Deserialize;
use serde_json::json;

use super::{Embedding, EmbeddingProvider, ProviderError};
use crate::http::{PacedClient, RetryPolicy};
use crate::ingest::normalize;
use crate::scalar::Scalar;

#[derive(Deserialize)]
struct VectorLine {
    text: String,
    vector: Vec<f64>,
}

/// Precomputed vectors keyed by normalized text.
///
/// Loaded from JSON Lines, one `{"text": .., "vector": [..]}` per line.
#[derive(Debug, Clone)]
pub struct FileProvider<T> {
    vectors: HashMap<String, Embedding<T>>,
    dimension: usize,
}

impl<T: Scalar> FileProvider<T> {
    pub fn load(path: &Path) -> Result<Self, ProviderError> {
        let file = std::fs::File::open(path).map_err(|e| ProviderError::Load {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        Self::from_reader(std::io::BufReader::new(file)).map_err(|e| match e {
            ProviderError::Invalid(message) => ProviderError::Load {
                path: path.display().to_string(),
                message,
            },
            other => other,
        })
    }

    pub fn from_reader<R: BufRead>(reader: R) -> Result<Self, ProviderError> {
        let mut pairs = Vec::new();
        for (n, line) in reader.lines().enumerate() {
            let line = line.map_err(|e| ProviderError::Invalid(format!("line {}: {e}", n + 1)))?;
            if line.trim().is_empty() {
                continue;
            }
            let parsed: VectorLine = serde_json::from_str(&line)
                .map_err(|e| ProviderError::Invalid(format!("line {}: {e}", n + 1)))?;
            pairs.push((parsed.text, parsed.vector));
        }
        Self::from_pairs(pairs)
    }

    /// Builds a provider from `(text, vector)` pairs. Duplicate keys (after
    /// normalization), ragged dimensions and non-finite values are errors.
    pub fn from_pairs<I>(pairs: I) -> Result<Self, ProviderError>
    where
        I: IntoIterator<Item = (String, Vec<f64>)>,
    {
        let mut vectors = HashMap::new();
        let mut dimension = None;
        for (text, values) in pairs {
            let key = normalize(&text);
            let v = Embedding::from_f64(&values)
                .map_err(|e| ProviderError::Invalid(format!("`{text}`: {e}")))?;
            match dimension {
                None => dimension = Some(v.dimension()),
                Some(d) if d != v.dimension() => {
                    return Err(ProviderError::Dimension {
                        expected: d,
                        got: v.dimension(),
                    })
                }
                _ => {}
            }
            if vectors.insert(key.clone(), v).is_some() {
                return Err(ProviderError::Invalid(format!("duplicate text `{key}`")));
            }
        }
        Ok(FileProvider {
            vectors,
            dimension: dimension.unwrap_or(0),
        })
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }
}

impl<T: Scalar> EmbeddingProvider<T> for FileProvider<T> {
    fn dimension(&self) -> Option<usize> {
        (!self.vectors.is_empty()).then_some(self.dimension)
    }

    fn embed(&self, text: &str) -> Result<Embedding<T>, ProviderError> {
        let key = normalize(text);
        self.vectors
            .get(&key)
            .cloned()
            .ok_or(ProviderError::Missing(key))
    }
}

#[derive(Deserialize)]
struct EmbedResponse {
    vectors: Vec<Vec<f64>>,
    dimension: usize,
}

/// Client for `POST /embed`. Responses are memoized per normalized text, so
/// repeated lookups within a run are stable and cost one request.
#[derive(Debug)]
pub struct HttpProvider<T> {
    endpoint: String,
    http: PacedClient,
    batch_size: usize,
    dimension: Mutex<Option<usize>>,
    memo: Mutex<HashMap<String, Embedding<T>>>,
}

impl<T: Scalar> HttpProvider<T> {
    pub fn new(base_url: &str, mut policy: RetryPolicy, expected_dimension: Option<usize>) -> Self {
        policy.min_request_interval = std::time::Duration::ZERO;
        HttpProvider {
            endpoint: format!("{}/embed", base_url.trim_end_matches('/')),
            http: PacedClient::new(policy),
            batch_size: 64,
            dimension: Mutex::new(expected_dimension),
            memo: Mutex::new(HashMap::new()),
        }
    }

    fn fetch(&self, texts: &[String]) -> Result<Vec<Embedding<T>>, ProviderError> {
        let value = self
            .http
            .post_json(&self.endpoint, &json!({ "texts": texts }))
            .map_err(|e| ProviderError::Service(e.to_string()))?;
        let parsed: EmbedResponse = serde_json::from_value(value)
            .map_err(|e| ProviderError::Invalid(format!("bad /embed response: {e}")))?;
        if parsed.vectors.len() != texts.len() {
            return Err(ProviderError::Invalid(format!(
                "asked for {} vectors, got {}",
                texts.len(),
                parsed.vectors.len()
            )));
        }
        let mut dim = self.dimension.lock().unwrap();
        let expected = *dim.get_or_insert(parsed.dimension);
        parsed
            .vectors
            .iter()
            .map(|values| {
                if values.len() != expected {
                    return Err(ProviderError::Dimension {
                        expected,
                        got: values.len(),
                    });
                }
                Embedding::from_f64(values).map_err(|e| ProviderError::Invalid(e.to_string()))
            })
            .collect()
    }
}

impl<T: Scalar> EmbeddingProvider<T> for HttpProvider<T> {
    fn dimension(&self) -> Option<usize> {
        *self.dimension.lock().unwrap()
    }

    fn embed(&self, text: &str) -> Result<Embedding<T>, ProviderError> {
        self.embed_many(&[text.to_string()])
            .pop()
            .expect("one result per text")
    }

    fn embed_many(&self, texts: &[String]) -> Vec<Result<Embedding<T>, ProviderError>> {
        let keys: Vec<String> = texts.iter().map(|t| normalize(t)).collect();
        let mut pending: Vec<String> = {
            let memo = self.memo.lock().unwrap();
            keys.iter()
                .filter(|k| !memo.contains_key(*k))
                .cloned()
                .collect()
        };
        pending.sort();
        pending.dedup();

        let mut failures: HashMap<String, String> = HashMap::new();
        for batch in pending.chunks(self.batch_size) {
            match self.fetch(batch) {
                Ok(vectors) => {
                    let mut memo = self.memo.lock().unwrap();
                    memo.extend(batch.iter().cloned().zip(vectors));
                }
                Err(e) => {
                    log::warn!("embedding batch of {} failed: {e}", batch.len());
                    failures.extend(batch.iter().map(|k| (k.clone(), e.to_string())));
                }
            }
        }

        let memo = self.memo.lock().unwrap();
        keys.into_iter()
            .map(|k| match memo.get(&k) {
                Some(v) => Ok(v.clone()),
                None => Err(failures
                    .remove(&k)
                    .map(ProviderError::Service)
                    .unwrap_or(ProviderError::Missing(k))),
            })
            .collect()
    }
}
