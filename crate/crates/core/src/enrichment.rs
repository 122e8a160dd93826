//! Ontology enrichment: synonyms and definitions fetched from a
//! BioPortal-compatible `/search` endpoint, filtered, and cached on disk.

use std::collections::HashSet;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::filtration::{filter_texts, FilterConfig, Rejection};
use crate::graph::{make_node_id, NodeId};
use crate::http::{HttpError, PacedClient, RequestRecord, RetryPolicy};
use crate::ingest::{normalize, Concept};

/// Environment variable holding the ontology API key.
pub const API_KEY_ENV: &str = "ONTOLOGY_API_KEY";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConceptCluster {
    pub concept: Concept,
    pub synonyms: Vec<String>,
    pub definitions: Vec<String>,
    pub source_ontologies: Vec<String>,
}

impl ConceptCluster {
    pub fn bare(concept: Concept) -> Self {
        ConceptCluster {
            concept,
            synonyms: Vec::new(),
            definitions: Vec::new(),
            source_ontologies: Vec::new(),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum EnrichError {
    #[error("ontology API rejected the credentials ({0}); check the {API_KEY_ENV} environment variable or the api_key config entry")]
    Auth(String),
    #[error("ontology API unavailable: {0}")]
    Unavailable(String),
    #[error("cache error at {path}: {source}")]
    Cache {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("invalid ontology client config: {0}")]
    Config(String),
    #[error("cannot query `{0}`")]
    Term(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct OntologyClientConfig {
    pub base_url: String,
    pub api_key: String,
    pub page_limit: usize,
    pub min_request_interval: Duration,
    pub max_retries: u32,
    pub backoff_base: Duration,
    pub timeout: Duration,
    pub max_in_flight: usize,
    pub cache_dir: PathBuf,
}

impl OntologyClientConfig {
    pub fn new(
        base_url: impl Into<String>,
        api_key: impl Into<String>,
        cache_dir: impl Into<PathBuf>,
    ) -> Self {
        OntologyClientConfig {
            base_url: base_url.into(),
            api_key: api_key.into(),
            page_limit: 50,
            min_request_interval: Duration::from_millis(100),
            max_retries: 3,
            backoff_base: Duration::from_millis(500),
            timeout: Duration::from_secs(30),
            max_in_flight: 4,
            cache_dir: cache_dir.into(),
        }
    }

    pub fn validate(&self) -> Result<(), EnrichError> {
        if self.page_limit == 0 {
            return Err(EnrichError::Config("page_limit must be at least 1".into()));
        }
        if self.max_in_flight == 0 {
            return Err(EnrichError::Config(
                "max_in_flight must be at least 1".into(),
            ));
        }
        url::Url::parse(&self.base_url)
            .map_err(|e| EnrichError::Config(format!("base_url: {e}")))?;
        Ok(())
    }

    fn retry_policy(&self) -> RetryPolicy {
        RetryPolicy {
            max_retries: self.max_retries,
            backoff_base: self.backoff_base,
            min_request_interval: self.min_request_interval,
            timeout: self.timeout,
        }
    }
}

/// One entry of a search response.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SearchResult {
    pub synonyms: Vec<String>,
    pub definitions: Vec<String>,
    pub ontology: Option<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SearchPage {
    pub results: Vec<SearchResult>,
}

impl SearchPage {
    /// Reads the `collection` array; `synonym`, `definition` and
    /// `links.ontology` are optional per result. The ontology acronym is the
    /// last path segment of the ontology link.
    pub fn from_json(value: &Value, limit: usize) -> Result<Self, String> {
        let collection = value
            .get("collection")
            .and_then(Value::as_array)
            .ok_or("response has no `collection` array")?;
        let strings = |v: Option<&Value>| -> Vec<String> {
            match v {
                Some(Value::Array(items)) => items
                    .iter()
                    .filter_map(|s| s.as_str().map(String::from))
                    .collect(),
                Some(Value::String(s)) => vec![s.clone()],
                _ => Vec::new(),
            }
        };
        let results = collection
            .iter()
            .take(limit)
            .map(|r| SearchResult {
                synonyms: strings(r.get("synonym")),
                definitions: strings(r.get("definition")),
                ontology: r
                    .pointer("/links/ontology")
                    .and_then(Value::as_str)
                    .and_then(|link| link.trim_end_matches('/').rsplit('/').next())
                    .filter(|s| !s.is_empty())
                    .map(String::from),
            })
            .collect();
        Ok(SearchPage { results })
    }
}

/// On-disk cache record; field order is the serialized key order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
struct CacheRecord {
    term: String,
    synonyms: Vec<String>,
    definitions: Vec<String>,
    source_ontologies: Vec<String>,
}

#[derive(Debug)]
pub struct OntologyClient {
    cfg: OntologyClientConfig,
    http: PacedClient,
}

impl OntologyClient {
    pub fn new(cfg: OntologyClientConfig) -> Result<Self, EnrichError> {
        cfg.validate()?;
        let http = PacedClient::new(cfg.retry_policy());
        Ok(OntologyClient { cfg, http })
    }

    pub fn config(&self) -> &OntologyClientConfig {
        &self.cfg
    }

    pub fn request_log(&self) -> Vec<RequestRecord> {
        self.http.request_log()
    }

    pub fn cache_path(&self, id: &NodeId) -> PathBuf {
        self.cfg.cache_dir.join(format!("{id}.json"))
    }

    /// First page of `GET {base_url}/search?q=..&apikey=..`.
    pub fn fetch_search_page(&self, term: &str) -> Result<SearchPage, EnrichError> {
        if term.trim().is_empty() {
            return Err(EnrichError::Term(term.to_string()));
        }
        if self.cfg.api_key.is_empty() {
            return Err(EnrichError::Auth("no API key configured".into()));
        }
        let url = format!("{}/search", self.cfg.base_url.trim_end_matches('/'));
        let limit = self.cfg.page_limit.to_string();
        let value = self
            .http
            .get_json(
                &url,
                &[
                    ("q", term),
                    ("apikey", self.cfg.api_key.as_str()),
                    ("pagesize", limit.as_str()),
                ],
            )
            .map_err(|e| match e {
                HttpError::Auth { status } => EnrichError::Auth(format!("HTTP {status}")),
                other => EnrichError::Unavailable(other.to_string()),
            })?;
        SearchPage::from_json(&value, self.cfg.page_limit).map_err(EnrichError::Unavailable)
    }

    fn read_cache(&self, path: &Path) -> Result<Option<CacheRecord>, EnrichError> {
        match std::fs::read_to_string(path) {
            Ok(text) => serde_json::from_str(&text)
                .map(Some)
                .map_err(|e| EnrichError::Cache {
                    path: path.display().to_string(),
                    source: e.into(),
                }),
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(None),
            Err(source) => Err(EnrichError::Cache {
                path: path.display().to_string(),
                source,
            }),
        }
    }

    fn write_cache(&self, path: &Path, record: &CacheRecord) -> Result<(), EnrichError> {
        let cache_err = |source| EnrichError::Cache {
            path: path.display().to_string(),
            source,
        };
        std::fs::create_dir_all(&self.cfg.cache_dir).map_err(cache_err)?;
        let mut tmp = tempfile::NamedTempFile::new_in(&self.cfg.cache_dir).map_err(cache_err)?;
        tmp.write_all(render_cache(record).as_bytes())
            .map_err(cache_err)?;
        tmp.persist(path).map_err(|e| cache_err(e.error))?;
        Ok(())
    }
}

fn render_cache(record: &CacheRecord) -> String {
    let mut text = serde_json::to_string_pretty(record).expect("cache record serializes");
    text.push('\n');
    text
}

/// Result of enriching one concept.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Enriched {
    pub cluster: ConceptCluster,
    pub rejected: Vec<Rejection>,
    pub warning: Option<String>,
    pub from_cache: bool,
}

/// Merges a search page into a cluster and applies filtration.
///
/// Each list goes through non-English filtering and exact plus fuzzy
/// deduplication. Items that collapse onto the concept's own id, that share
/// an id with an earlier item of the same list, or that have no usable id
/// characters are dropped.
pub fn finalize_cluster(
    concept: &Concept,
    page: &SearchPage,
    filters: &FilterConfig,
) -> (ConceptCluster, Vec<Rejection>) {
    let mut synonyms = Vec::new();
    let mut definitions = Vec::new();
    let mut ontologies: Vec<String> = Vec::new();
    for r in &page.results {
        synonyms.extend(r.synonyms.iter().cloned());
        definitions.extend(r.definitions.iter().cloned());
        if let Some(o) = &r.ontology {
            let contributes = !(r.synonyms.is_empty() && r.definitions.is_empty());
            if contributes && !ontologies.contains(o) {
                ontologies.push(o.clone());
            }
        }
    }

    let own_id = make_node_id(&concept.normalized_text).ok();
    let mut rejected = Vec::new();
    let mut finish = |items: Vec<String>| -> Vec<String> {
        let filtered = filter_texts(&items, filters);
        rejected.extend(filtered.rejected);
        let mut ids = HashSet::new();
        filtered
            .kept
            .into_iter()
            .filter(|item| {
                if normalize(item) == concept.normalized_text {
                    return false;
                }
                match make_node_id(item) {
                    Ok(id) => Some(&id) != own_id.as_ref() && ids.insert(id),
                    Err(e) => {
                        log::warn!(
                            "dropping enrichment item of `{}`: {e}",
                            concept.normalized_text
                        );
                        false
                    }
                }
            })
            .collect()
    };
    let synonyms = finish(synonyms);
    let definitions = finish(definitions);

    let cluster = ConceptCluster {
        concept: concept.clone(),
        synonyms,
        definitions,
        source_ontologies: ontologies,
    };
    (cluster, rejected)
}

/// Enriches one concept, serving from the cache when possible.
///
/// Authentication failures abort. An unreachable API yields an empty cluster
/// with a warning; such results are not cached.
pub fn enrich_concept(
    concept: &Concept,
    client: &OntologyClient,
    filters: &FilterConfig,
) -> Result<Enriched, EnrichError> {
    let id = make_node_id(&concept.normalized_text)
        .map_err(|_| EnrichError::Term(concept.raw_text.clone()))?;
    let path = client.cache_path(&id);
    if let Some(record) = client.read_cache(&path)? {
        if record.term != concept.normalized_text {
            log::warn!(
                "cache entry {} was written for `{}`",
                path.display(),
                record.term
            );
        }
        return Ok(Enriched {
            cluster: ConceptCluster {
                concept: concept.clone(),
                synonyms: record.synonyms,
                definitions: record.definitions,
                source_ontologies: record.source_ontologies,
            },
            rejected: Vec::new(),
            warning: None,
            from_cache: true,
        });
    }

    let page = match client.fetch_search_page(&concept.normalized_text) {
        Ok(page) => page,
        Err(EnrichError::Unavailable(msg)) => {
            let warning = format!("no enrichment for `{}`: {msg}", concept.normalized_text);
            log::warn!("{warning}");
            return Ok(Enriched {
                cluster: ConceptCluster::bare(concept.clone()),
                rejected: Vec::new(),
                warning: Some(warning),
                from_cache: false,
            });
        }
        Err(e) => return Err(e),
    };
    let (cluster, rejected) = finalize_cluster(concept, &page, filters);
    client.write_cache(
        &path,
        &CacheRecord {
            term: concept.normalized_text.clone(),
            synonyms: cluster.synonyms.clone(),
            definitions: cluster.definitions.clone(),
            source_ontologies: cluster.source_ontologies.clone(),
        },
    )?;
    Ok(Enriched {
        cluster,
        rejected,
        warning: None,
        from_cache: false,
    })
}

/// Enriches every concept with at most `max_in_flight` concurrent lookups.
/// Output order follows input order; the first hard error aborts the batch.
pub fn enrich_all(
    concepts: &[Concept],
    client: &OntologyClient,
    filters: &FilterConfig,
) -> Result<Vec<Enriched>, EnrichError> {
    let slots: Vec<Mutex<Option<Result<Enriched, EnrichError>>>> =
        concepts.iter().map(|_| Mutex::new(None)).collect();
    let next = AtomicUsize::new(0);
    let abort = AtomicBool::new(false);
    let workers = client.cfg.max_in_flight.min(concepts.len()).max(1);

    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                if abort.load(Ordering::SeqCst) {
                    break;
                }
                let i = next.fetch_add(1, Ordering::SeqCst);
                let Some(concept) = concepts.get(i) else {
                    break;
                };
                let result = enrich_concept(concept, client, filters);
                if result.is_err() {
                    abort.store(true, Ordering::SeqCst);
                }
                *slots[i].lock().unwrap() = Some(result);
            });
        }
    });

    let mut out = Vec::with_capacity(concepts.len());
    for slot in slots {
        match slot.into_inner().unwrap() {
            Some(Ok(e)) => out.push(e),
            Some(Err(e)) => return Err(e),
            None => {}
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::ConceptSource;
    use serde_json::json;

    fn concept(s: &str) -> Concept {
        Concept::new(s, ConceptSource::User).unwrap()
    }

    #[test]
    fn parses_collection_subset() {
        let v = json!({"collection": [
            {"prefLabel": "Polyuria", "synonym": ["Polyuria (finding)"], "definition": ["excessive secretion of urine"],
             "links": {"ontology": "https://data.bioontology.org/ontologies/MEDDRA"}},
            {"prefLabel": "Polyuria", "links": {"ontology": "https://data.bioontology.org/ontologies/SNOMEDCT/"}}
        ]});
        let page = SearchPage::from_json(&v, 50).unwrap();
        assert_eq!(page.results.len(), 2);
        assert_eq!(page.results[0].ontology.as_deref(), Some("MEDDRA"));
        assert_eq!(page.results[1].ontology.as_deref(), Some("SNOMEDCT"));
        assert!(page.results[1].synonyms.is_empty());
        assert_eq!(SearchPage::from_json(&v, 1).unwrap().results.len(), 1);
        assert!(SearchPage::from_json(&json!({"error": "x"}), 50).is_err());
    }

    #[test]
    fn finalize_filters_and_drops_self() {
        let page = SearchPage {
            results: vec![
                SearchResult {
                    synonyms: vec![
                        "Polyuria".into(),
                        "Urination, excessive".into(),
                        "多尿".into(),
                    ],
                    definitions: vec!["Excessive secretion of urine".into()],
                    ontology: Some("A".into()),
                },
                SearchResult {
                    synonyms: vec!["urination excessive".into()],
                    definitions: vec![
                        "excessive secretion of urine".into(),
                        "excessive secretion of urines".into(),
                    ],
                    ontology: Some("B".into()),
                },
                SearchResult {
                    ontology: Some("C".into()),
                    ..Default::default()
                },
            ],
        };
        let (cluster, rejected) =
            finalize_cluster(&concept("polyuria"), &page, &FilterConfig::default());
        assert_eq!(cluster.synonyms, ["Urination, excessive"]);
        assert_eq!(cluster.definitions, ["Excessive secretion of urine"]);
        assert_eq!(cluster.source_ontologies, ["A", "B"]);
        assert_eq!(rejected.len(), 3);

        // Re-filtering is a no-op.
        let again = filter_texts(&cluster.synonyms, &FilterConfig::default());
        assert_eq!(again.kept, cluster.synonyms);
    }

    #[test]
    fn cache_record_layout() {
        let record = CacheRecord {
            term: "polyuria".into(),
            synonyms: vec![],
            definitions: vec!["excessive secretion of urine".into()],
            source_ontologies: vec!["MEDDRA".into()],
        };
        assert_eq!(
            render_cache(&record),
            "{\n  \"term\": \"polyuria\",\n  \"synonyms\": [],\n  \"definitions\": [\n    \"excessive secretion of urine\"\n  ],\n  \"source_ontologies\": [\n    \"MEDDRA\"\n  ]\n}\n"
        );
    }

    #[test]
    fn config_validation() {
        let mut cfg = OntologyClientConfig::new("http://localhost:1", "k", "/tmp/x");
        assert!(cfg.validate().is_ok());
        cfg.page_limit = 0;
        assert!(cfg.validate().is_err());
        let bad = OntologyClientConfig::new("not a url", "k", "/tmp/x");
        assert!(bad.validate().is_err());
    }

    #[test]
    fn missing_key_is_auth_error() {
        let dir = tempfile::tempdir().unwrap();
        let client = OntologyClient::new(OntologyClientConfig::new(
            "http://127.0.0.1:9",
            "",
            dir.path(),
        ))
        .unwrap();
        let err = enrich_concept(&concept("fever"), &client, &FilterConfig::default()).unwrap_err();
        assert!(matches!(err, EnrichError::Auth(_)));
        assert!(err.to_string().contains(API_KEY_ENV));
        assert!(client.request_log().is_empty());
    }
}
