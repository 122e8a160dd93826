//! Graph completion from embedding distances.
//!
//! Two strategies add edges across clusters when the L2 distance between
//! embeddings is within a threshold:
//!
//! * cluster-based: every cluster is flattened to one text (concept, then
//!   synonyms, then definitions), split into whitespace-token chunks, and the
//!   chunk embeddings are averaged with equal weight per chunk;
//! * node-based: every pair of nodes from different clusters is compared
//!   directly, which is quadratic in the node count.
//!
//! New edges always point from the lexicographically smaller node id to the
//! larger one and record the distance.

mod provider;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::enrichment::ConceptCluster;
use crate::graph::{make_node_id, GraphEdge, GraphError, KnowledgeGraph, NodeId, Relation};
use crate::ingest::normalize;
use crate::scalar::Scalar;

pub use provider::{FileProvider, HttpProvider};

#[derive(Debug, thiserror::Error)]
pub enum CompletionError {
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("embedding has no components")]
    EmptyVector,
    #[error("embedding has a non-finite component")]
    NonFinite,
    #[error("invalid completion config: {0}")]
    Config(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

#[derive(Debug, thiserror::Error)]
pub enum ProviderError {
    #[error("no embedding for `{0}`")]
    Missing(String),
    #[error("embedding service failed: {0}")]
    Service(String),
    #[error("provider returned dimension {got}, expected {expected}")]
    Dimension { expected: usize, got: usize },
    #[error("bad embedding data: {0}")]
    Invalid(String),
    #[error("failed to load embeddings from {path}: {message}")]
    Load { path: String, message: String },
}

/// Finite, non-empty vector of scalars.
#[derive(Debug, Clone, PartialEq)]
pub struct Embedding<T> {
    values: Vec<T>,
}

impl<T: Scalar> Embedding<T> {
    pub fn new(values: Vec<T>) -> Result<Self, CompletionError> {
        if values.is_empty() {
            return Err(CompletionError::EmptyVector);
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(CompletionError::NonFinite);
        }
        Ok(Embedding { values })
    }

    pub fn from_f64(values: &[f64]) -> Result<Self, CompletionError> {
        Embedding::new(values.iter().map(|&v| T::of(v)).collect())
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn dimension(&self) -> usize {
        self.values.len()
    }
}

/// Euclidean distance.
pub fn distance<T: Scalar>(a: &Embedding<T>, b: &Embedding<T>) -> Result<T, CompletionError> {
    if a.dimension() != b.dimension() {
        return Err(CompletionError::DimensionMismatch {
            left: a.dimension(),
            right: b.dimension(),
        });
    }
    let sum: T = a
        .values
        .iter()
        .zip(&b.values)
        .map(|(&x, &y)| (x - y) * (x - y))
        .sum();
    Ok(sum.sqrt())
}

/// Component-wise arithmetic mean.
pub fn mean<T: Scalar>(vectors: &[Embedding<T>]) -> Result<Embedding<T>, CompletionError> {
    let first = vectors.first().ok_or(CompletionError::EmptyVector)?;
    let mut acc = vec![T::zero(); first.dimension()];
    for v in vectors {
        if v.dimension() != acc.len() {
            return Err(CompletionError::DimensionMismatch {
                left: acc.len(),
                right: v.dimension(),
            });
        }
        for (a, &x) in acc.iter_mut().zip(&v.values) {
            *a = *a + x;
        }
    }
    let n = T::of_count(vectors.len());
    Embedding::new(acc.into_iter().map(|a| a / n).collect())
}

/// Source of text embeddings.
///
/// Implementations must be deterministic for a fixed state and return
/// vectors of one dimension.
pub trait EmbeddingProvider<T: Scalar>: Send + Sync {
    /// Declared or discovered dimension, when known.
    fn dimension(&self) -> Option<usize>;

    fn embed(&self, text: &str) -> Result<Embedding<T>, ProviderError>;

    fn embed_many(&self, texts: &[String]) -> Vec<Result<Embedding<T>, ProviderError>> {
        texts.iter().map(|t| self.embed(t)).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CompletionMode {
    Cluster,
    Node,
    Both,
}

impl CompletionMode {
    pub fn relations(self) -> &'static [Relation] {
        match self {
            CompletionMode::Cluster => &[Relation::EmbeddingMatchCluster],
            CompletionMode::Node => &[Relation::EmbeddingMatchNode],
            CompletionMode::Both => &[
                Relation::EmbeddingMatchCluster,
                Relation::EmbeddingMatchNode,
            ],
        }
    }
}

impl std::str::FromStr for CompletionMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "cluster" => Ok(CompletionMode::Cluster),
            "node" => Ok(CompletionMode::Node),
            "both" => Ok(CompletionMode::Both),
            other => Err(format!("unknown completion mode `{other}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompletionConfig<T> {
    pub mode: CompletionMode,
    pub threshold: T,
    pub chunk_size: usize,
    /// Overrides `threshold` for cluster-based comparison.
    pub cluster_threshold: Option<T>,
    /// Overrides `threshold` for node-based comparison.
    pub node_threshold: Option<T>,
}

impl<T: Scalar> Default for CompletionConfig<T> {
    fn default() -> Self {
        CompletionConfig {
            mode: CompletionMode::Both,
            threshold: T::of(4.0),
            chunk_size: 128,
            cluster_threshold: None,
            node_threshold: None,
        }
    }
}

impl<T: Scalar> CompletionConfig<T> {
    pub fn with_threshold(mode: CompletionMode, threshold: T) -> Self {
        CompletionConfig {
            mode,
            threshold,
            ..Default::default()
        }
    }

    pub fn cluster_limit(&self) -> T {
        self.cluster_threshold.unwrap_or(self.threshold)
    }

    pub fn node_limit(&self) -> T {
        self.node_threshold.unwrap_or(self.threshold)
    }

    pub fn validate(&self) -> Result<(), CompletionError> {
        for t in [self.threshold, self.cluster_limit(), self.node_limit()] {
            if t < T::zero() || !t.is_finite() {
                return Err(CompletionError::Config(format!(
                    "threshold {t} must be finite and >= 0"
                )));
            }
        }
        if self.chunk_size == 0 {
            return Err(CompletionError::Config(
                "chunk_size must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

/// Concept text, then synonyms, then definitions, joined by single spaces.
pub fn cluster_text(cluster: &ConceptCluster) -> String {
    std::iter::once(cluster.concept.normalized_text.as_str())
        .chain(cluster.synonyms.iter().map(String::as_str))
        .chain(cluster.definitions.iter().map(String::as_str))
        .collect::<Vec<_>>()
        .join(" ")
}

/// Consecutive runs of at most `chunk_size` whitespace tokens.
pub fn chunk_text(text: &str, chunk_size: usize) -> Vec<String> {
    let tokens: Vec<&str> = text.split_whitespace().collect();
    tokens
        .chunks(chunk_size.max(1))
        .map(|c| c.join(" "))
        .collect()
}

/// Mean of the chunk embeddings of the cluster text, one weight per chunk.
pub fn cluster_embedding<T: Scalar>(
    cluster: &ConceptCluster,
    provider: &dyn EmbeddingProvider<T>,
    chunk_size: usize,
) -> Result<Embedding<T>, ProviderError> {
    let chunks = chunk_text(&cluster_text(cluster), chunk_size);
    if chunks.is_empty() {
        return Err(ProviderError::Missing(
            cluster.concept.normalized_text.clone(),
        ));
    }
    let vectors = provider
        .embed_many(&chunks)
        .into_iter()
        .collect::<Result<Vec<_>, _>>()?;
    mean(&vectors).map_err(|e| ProviderError::Invalid(e.to_string()))
}

/// What a completion pass did.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CompletionReport {
    pub added: usize,
    /// Items left out because their embedding could not be produced.
    pub skipped: Vec<String>,
}

impl CompletionReport {
    fn merge(&mut self, other: CompletionReport) {
        self.added += other.added;
        self.skipped.extend(other.skipped);
    }
}

/// Runs the strategies selected by `cfg.mode`.
pub fn complete<T: Scalar>(
    g: &mut KnowledgeGraph,
    clusters: &[ConceptCluster],
    provider: &dyn EmbeddingProvider<T>,
    cfg: &CompletionConfig<T>,
) -> Result<CompletionReport, CompletionError> {
    let mut report = CompletionReport::default();
    if matches!(cfg.mode, CompletionMode::Cluster | CompletionMode::Both) {
        report.merge(complete_cluster_based(g, clusters, provider, cfg)?);
    }
    if matches!(cfg.mode, CompletionMode::Node | CompletionMode::Both) {
        report.merge(complete_node_based(g, clusters, provider, cfg)?);
    }
    Ok(report)
}

/// Links concept pairs whose cluster embeddings are within the cluster
/// threshold. Clusters whose embedding fails are skipped.
pub fn complete_cluster_based<T: Scalar>(
    g: &mut KnowledgeGraph,
    clusters: &[ConceptCluster],
    provider: &dyn EmbeddingProvider<T>,
    cfg: &CompletionConfig<T>,
) -> Result<CompletionReport, CompletionError> {
    cfg.validate()?;
    let mut report = CompletionReport::default();
    let mut embedded: Vec<(NodeId, Embedding<T>)> = Vec::with_capacity(clusters.len());
    for cluster in clusters {
        let id = make_node_id(&cluster.concept.normalized_text)?;
        match cluster_embedding(cluster, provider, cfg.chunk_size) {
            Ok(v) => embedded.push((id, v)),
            Err(e) => {
                log::warn!(
                    "skipping cluster `{}`: {e}",
                    cluster.concept.normalized_text
                );
                report.skipped.push(cluster.concept.normalized_text.clone());
            }
        }
    }
    let limit = cfg.cluster_limit();
    let edges = matching_pairs(&embedded, limit, |_, _| true)?;
    report.added += insert(g, edges, Relation::EmbeddingMatchCluster)?;
    Ok(report)
}

/// Links every cross-cluster node pair within the node threshold. Nodes whose
/// text cannot be embedded are skipped.
pub fn complete_node_based<T: Scalar>(
    g: &mut KnowledgeGraph,
    _clusters: &[ConceptCluster],
    provider: &dyn EmbeddingProvider<T>,
    cfg: &CompletionConfig<T>,
) -> Result<CompletionReport, CompletionError> {
    cfg.validate()?;
    let mut report = CompletionReport::default();
    let nodes: Vec<(NodeId, String)> = g
        .nodes()
        .map(|n| (n.id.clone(), normalize(&n.display_text)))
        .collect();
    let texts: Vec<String> = nodes.iter().map(|(_, t)| t.clone()).collect();
    let mut embedded = Vec::with_capacity(nodes.len());
    for ((id, text), result) in nodes.into_iter().zip(provider.embed_many(&texts)) {
        match result {
            Ok(v) => embedded.push((id, v)),
            Err(e) => {
                log::warn!("skipping node `{id}`: {e}");
                report.skipped.push(text);
            }
        }
    }
    let clusters: Vec<NodeId> = embedded
        .iter()
        .map(|(id, _)| {
            g.cluster_of(id)
                .cloned()
                .ok_or_else(|| GraphError::MissingCluster(id.to_string()))
        })
        .collect::<Result<_, _>>()?;
    let limit = cfg.node_limit();
    let edges = matching_pairs(&embedded, limit, |i, j| clusters[i] != clusters[j])?;
    report.added += insert(g, edges, Relation::EmbeddingMatchNode)?;
    Ok(report)
}

type Match = (NodeId, NodeId, f64);

/// All index pairs `i < j` accepted by `eligible` whose distance is within
/// `limit`, with endpoints ordered by id.
fn matching_pairs<T, F>(
    items: &[(NodeId, Embedding<T>)],
    limit: T,
    eligible: F,
) -> Result<Vec<Match>, CompletionError>
where
    T: Scalar,
    F: Fn(usize, usize) -> bool + Sync,
{
    let per_row: Vec<Result<Vec<Match>, CompletionError>> = (0..items.len())
        .into_par_iter()
        .map(|i| {
            let mut row = Vec::new();
            for j in i + 1..items.len() {
                if !eligible(i, j) || items[i].0 == items[j].0 {
                    continue;
                }
                let d = distance(&items[i].1, &items[j].1)?;
                if d <= limit {
                    let (a, b) = if items[i].0 < items[j].0 {
                        (i, j)
                    } else {
                        (j, i)
                    };
                    row.push((items[a].0.clone(), items[b].0.clone(), d.as_f64()));
                }
            }
            Ok(row)
        })
        .collect();
    let mut all = Vec::new();
    for row in per_row {
        all.extend(row?);
    }
    Ok(all)
}

fn insert(g: &mut KnowledgeGraph, edges: Vec<Match>, rel: Relation) -> Result<usize, GraphError> {
    let mut added = 0;
    for (from, to, d) in edges {
        if g.add_edge(GraphEdge {
            from,
            to,
            rel,
            distance: Some(d),
        })? {
            added += 1;
        }
    }
    Ok(added)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::build_graph;
    use crate::ingest::{Concept, ConceptSource};
    use approx::assert_abs_diff_eq;

    fn v(xs: &[f64]) -> Embedding<f64> {
        Embedding::from_f64(xs).unwrap()
    }

    fn cluster(concept: &str, synonyms: &[&str], definitions: &[&str]) -> ConceptCluster {
        ConceptCluster {
            concept: Concept::new(concept, ConceptSource::User).unwrap(),
            synonyms: synonyms.iter().map(|s| s.to_string()).collect(),
            definitions: definitions.iter().map(|s| s.to_string()).collect(),
            source_ontologies: Vec::new(),
        }
    }

    fn provider(pairs: &[(&str, &[f64])]) -> FileProvider<f64> {
        FileProvider::from_pairs(pairs.iter().map(|(t, xs)| (t.to_string(), xs.to_vec()))).unwrap()
    }

    fn id(s: &str) -> NodeId {
        make_node_id(s).unwrap()
    }

    #[test]
    fn distance_examples() {
        assert_eq!(distance(&v(&[0.0, 0.0]), &v(&[3.0, 4.0])).unwrap(), 5.0);
        assert_eq!(distance(&v(&[1.5, -2.0]), &v(&[1.5, -2.0])).unwrap(), 0.0);
        let d = distance(&v(&[1.0, 1.0]), &v(&[2.0, 2.0])).unwrap();
        assert_eq!(format!("{d:.6}"), "1.414214");
        assert!(matches!(
            distance(&v(&[1.0]), &v(&[1.0, 2.0])),
            Err(CompletionError::DimensionMismatch { left: 1, right: 2 })
        ));
    }

    #[test]
    fn distance_in_f32() {
        let a = Embedding::<f32>::from_f64(&[0.0, 0.0]).unwrap();
        let b = Embedding::<f32>::from_f64(&[3.0, 4.0]).unwrap();
        assert_eq!(distance(&a, &b).unwrap(), 5.0f32);
    }

    #[test]
    fn embedding_rejects_bad_values() {
        assert!(matches!(
            Embedding::<f64>::new(vec![]),
            Err(CompletionError::EmptyVector)
        ));
        assert!(matches!(
            Embedding::new(vec![1.0, f64::NAN]),
            Err(CompletionError::NonFinite)
        ));
    }

    #[test]
    fn cluster_text_examples() {
        assert_eq!(
            cluster_text(&cluster("polyuria", &[], &["excessive secretion of urine"])),
            "polyuria excessive secretion of urine"
        );
        assert_eq!(cluster_text(&cluster("fever", &[], &[])), "fever");
        let text = cluster_text(&cluster(
            "fever",
            &["pyrexia", "febrile"],
            &["raised temperature"],
        ));
        assert_eq!(text, "fever pyrexia febrile raised temperature");
    }

    #[test]
    fn single_chunk_identity() {
        let c = cluster("polyuria", &[], &["excessive secretion of urine"]);
        let p = provider(&[("polyuria excessive secretion of urine", &[0.25, -1.0, 3.0])]);
        let got = cluster_embedding(&c, &p, 128).unwrap();
        assert_eq!(
            got,
            p.embed("polyuria excessive secretion of urine").unwrap()
        );
    }

    #[test]
    fn two_chunk_mean() {
        let c = cluster("a", &["b"], &[]);
        let p = provider(&[("a", &[1.0, 0.0]), ("b", &[0.0, 1.0])]);
        assert_eq!(cluster_embedding(&c, &p, 1).unwrap(), v(&[0.5, 0.5]));
    }

    #[test]
    fn chunking_counts() {
        let text = (0..300)
            .map(|i| format!("t{i}"))
            .collect::<Vec<_>>()
            .join(" ");
        let chunks = chunk_text(&text, 128);
        assert_eq!(chunks.len(), 3);
        assert_eq!(chunks[2].split(' ').count(), 44);
        assert!(chunk_text("", 4).is_empty());
    }

    fn two_cluster_fixture() -> (Vec<ConceptCluster>, FileProvider<f64>) {
        // Cluster vectors (0,0) and (3.2,0) are 3.2 apart.
        let clusters = vec![cluster("alpha", &[], &[]), cluster("beta", &[], &[])];
        let p = provider(&[("alpha", &[0.0, 0.0]), ("beta", &[3.2, 0.0])]);
        (clusters, p)
    }

    #[test]
    fn cluster_based_threshold() {
        let (clusters, p) = two_cluster_fixture();
        let mut g = build_graph(&clusters).unwrap();
        let report = complete_cluster_based(
            &mut g,
            &clusters,
            &p,
            &CompletionConfig::with_threshold(CompletionMode::Cluster, 4.0),
        )
        .unwrap();
        assert_eq!(report.added, 1);
        let e: Vec<_> = g.edges_with(Relation::EmbeddingMatchCluster).collect();
        assert_eq!((e[0].from.as_str(), e[0].to.as_str()), ("alpha", "beta"));
        assert_abs_diff_eq!(e[0].distance.unwrap(), 3.2, epsilon = 1e-12);

        let mut g = build_graph(&clusters).unwrap();
        let report = complete_cluster_based(
            &mut g,
            &clusters,
            &p,
            &CompletionConfig::with_threshold(CompletionMode::Cluster, 3.0),
        )
        .unwrap();
        assert_eq!(report.added, 0);
    }

    #[test]
    fn single_cluster_unchanged() {
        let clusters = vec![cluster("alpha", &["a1"], &[])];
        let p = provider(&[("alpha a1", &[0.0]), ("alpha", &[0.0]), ("a1", &[0.0])]);
        let mut g = build_graph(&clusters).unwrap();
        let before = g.clone();
        complete(
            &mut g,
            &clusters,
            &p,
            &CompletionConfig::with_threshold(CompletionMode::Both, 4.0),
        )
        .unwrap();
        assert_eq!(g, before);
    }

    #[test]
    fn node_based_picks_only_close_cross_pair() {
        let clusters = vec![
            cluster("a", &["a one", "a two"], &[]),
            cluster("b", &["b one"], &[]),
        ];
        let p = provider(&[
            ("a", &[0.0, 0.0]),
            ("a one", &[0.0, 10.0]),
            ("a two", &[20.0, 20.0]),
            ("b", &[-20.0, 0.0]),
            ("b one", &[21.0, 20.0]),
        ]);
        let mut g = build_graph(&clusters).unwrap();
        let report = complete_node_based(
            &mut g,
            &clusters,
            &p,
            &CompletionConfig::with_threshold(CompletionMode::Node, 4.0),
        )
        .unwrap();
        assert_eq!(report.added, 1);
        let e: Vec<_> = g.edges_with(Relation::EmbeddingMatchNode).collect();
        assert_eq!(
            (e[0].from.clone(), e[0].to.clone()),
            (id("atwo"), id("bone"))
        );
        assert_eq!(e[0].distance, Some(1.0));
    }

    #[test]
    fn identical_vectors_link_all_cross_pairs() {
        let clusters = vec![cluster("a", &["a1"], &[]), cluster("b", &["b1"], &[])];
        let p = provider(&[("a", &[1.0]), ("a1", &[1.0]), ("b", &[1.0]), ("b1", &[1.0])]);
        let mut g = build_graph(&clusters).unwrap();
        let report = complete_node_based(
            &mut g,
            &clusters,
            &p,
            &CompletionConfig::with_threshold(CompletionMode::Node, 4.0),
        )
        .unwrap();
        assert_eq!(report.added, 4);
        assert!(g
            .edges_with(Relation::EmbeddingMatchNode)
            .all(|e| e.distance == Some(0.0)));

        let p = provider(&[("a", &[1.0]), ("a1", &[2.0]), ("b", &[3.0]), ("b1", &[4.0])]);
        let mut g = build_graph(&clusters).unwrap();
        let report = complete_node_based(
            &mut g,
            &clusters,
            &p,
            &CompletionConfig::with_threshold(CompletionMode::Node, 0.0),
        )
        .unwrap();
        assert_eq!(report.added, 0);
    }

    #[test]
    fn missing_vectors_are_skipped() {
        let clusters = vec![cluster("a", &["a1"], &[]), cluster("b", &[], &[])];
        let p = provider(&[("a", &[0.0]), ("b", &[0.5])]);
        let mut g = build_graph(&clusters).unwrap();
        let report = complete(
            &mut g,
            &clusters,
            &p,
            &CompletionConfig::with_threshold(CompletionMode::Both, 4.0),
        )
        .unwrap();
        // "a a1" has no vector: cluster a skipped; node a1 skipped.
        assert_eq!(report.skipped, ["a", "a1"]);
        assert_eq!(report.added, 1);
        assert!(g.has_edge(Relation::EmbeddingMatchNode, &id("a"), &id("b")));
    }

    #[test]
    fn config_checks() {
        assert!(CompletionConfig::<f64>::default().validate().is_ok());
        let mut cfg = CompletionConfig::<f64> {
            threshold: -1.0,
            ..Default::default()
        };
        assert!(cfg.validate().is_err());
        cfg.threshold = 1.0;
        cfg.chunk_size = 0;
        assert!(cfg.validate().is_err());
        cfg.chunk_size = 4;
        cfg.node_threshold = Some(f64::NAN);
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn per_mode_override() {
        let (clusters, p) = two_cluster_fixture();
        let mut g = build_graph(&clusters).unwrap();
        let cfg = CompletionConfig {
            cluster_threshold: Some(3.0),
            ..CompletionConfig::with_threshold(CompletionMode::Both, 4.0)
        };
        complete(&mut g, &clusters, &p, &cfg).unwrap();
        assert_eq!(g.edges_with(Relation::EmbeddingMatchCluster).count(), 0);
        assert_eq!(g.edges_with(Relation::EmbeddingMatchNode).count(), 1);
    }
}
