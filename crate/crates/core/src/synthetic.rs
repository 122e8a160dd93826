//! Seeded synthetic fixtures for exercising completion and evaluation
//! without a real embedding model.
//!
//! Every fixture carries its clusters, the raw `(text, vector)` table a
//! [`FileProvider`] is built from, and annotated cluster pairs. The tables
//! cover every node text and every chunk text the clusters can produce for
//! the fixture's chunk size.

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::completion::{chunk_text, cluster_text, FileProvider, ProviderError};
use crate::enrichment::ConceptCluster;
use crate::evaluation::{AnnotatedPair, Label};
use crate::ingest::{Concept, ConceptSource};
use crate::scalar::Scalar;

#[derive(Debug, Clone)]
pub struct SyntheticFixture {
    pub clusters: Vec<ConceptCluster>,
    pub vectors: Vec<(String, Vec<f64>)>,
    pub pairs: Vec<AnnotatedPair>,
    pub chunk_size: usize,
}

impl SyntheticFixture {
    pub fn provider<T: Scalar>(&self) -> Result<FileProvider<T>, ProviderError> {
        FileProvider::from_pairs(self.vectors.iter().cloned())
    }

    /// Writes the vector table in the JSON Lines provider format.
    pub fn write_vectors<W: std::io::Write>(&self, mut out: W) -> std::io::Result<()> {
        for (text, vector) in &self.vectors {
            serde_json::to_writer(
                &mut out,
                &serde_json::json!({ "text": text, "vector": vector }),
            )?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }

    pub fn node_count(&self) -> usize {
        self.clusters
            .iter()
            .map(|c| 1 + c.synonyms.len() + c.definitions.len())
            .sum()
    }
}

/// Insertion-ordered text → vector table without duplicate keys.
#[derive(Default)]
struct VectorTable {
    index: HashMap<String, usize>,
    rows: Vec<(String, Vec<f64>)>,
}

impl VectorTable {
    fn set_with(&mut self, text: &str, make: impl FnOnce() -> Vec<f64>) {
        if !self.index.contains_key(text) {
            self.index.insert(text.to_string(), self.rows.len());
            self.rows.push((text.to_string(), make()));
        }
    }
}

fn concept_cluster(
    concept: String,
    synonyms: Vec<String>,
    definitions: Vec<String>,
) -> ConceptCluster {
    ConceptCluster {
        concept: Concept::new(concept, ConceptSource::User).expect("non-empty synthetic concept"),
        synonyms,
        definitions,
        source_ontologies: Vec::new(),
    }
}

fn uniform(rng: &mut ChaCha8Rng, dim: usize, lo: f64, hi: f64) -> Vec<f64> {
    (0..dim).map(|_| rng.random_range(lo..hi)).collect()
}

/// Shape limits for [`random_fixture`].
#[derive(Debug, Clone, Copy)]
pub struct RandomFixtureSpec {
    pub max_clusters: usize,
    pub max_members: usize,
    pub dimension: usize,
    /// Components are drawn from `[0, spread)`.
    pub spread: f64,
}

impl Default for RandomFixtureSpec {
    fn default() -> Self {
        RandomFixtureSpec {
            max_clusters: 20,
            max_members: 9,
            dimension: 3,
            spread: 6.0,
        }
    }
}

/// 2..=`max_clusters` clusters of 0..=`max_members` synonyms and definitions
/// with uniformly random vectors, a random chunk size in 2..=8, and random
/// labels on every cluster pair.
pub fn random_fixture(seed: u64, spec: RandomFixtureSpec) -> SyntheticFixture {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n_clusters = rng.random_range(2..=spec.max_clusters.max(2));
    let chunk_size = rng.random_range(2..=8);
    let mut clusters = Vec::with_capacity(n_clusters);
    for i in 0..n_clusters {
        let members = rng.random_range(0..=spec.max_members);
        let mut synonyms = Vec::new();
        let mut definitions = Vec::new();
        for k in 0..members {
            if rng.random_bool(0.5) {
                synonyms.push(format!("c{i} syn {k}"));
            } else {
                let extra = rng.random_range(0..12);
                let words: Vec<String> = (0..extra).map(|w| format!("w{w}")).collect();
                definitions.push(
                    format!("c{i} def {k} {}", words.join(" "))
                        .trim_end()
                        .to_string(),
                );
            }
        }
        clusters.push(concept_cluster(format!("c{i}"), synonyms, definitions));
    }

    let mut table = VectorTable::default();
    for c in &clusters {
        let texts = std::iter::once(&c.concept.normalized_text)
            .chain(&c.synonyms)
            .chain(&c.definitions);
        for t in texts {
            table.set_with(t, || uniform(&mut rng, spec.dimension, 0.0, spec.spread));
        }
        for chunk in chunk_text(&cluster_text(c), chunk_size) {
            table.set_with(&chunk, || {
                uniform(&mut rng, spec.dimension, 0.0, spec.spread)
            });
        }
    }

    let mut pairs = Vec::new();
    for i in 0..clusters.len() {
        for j in i + 1..clusters.len() {
            let label = if rng.random_bool(0.3) {
                Label::Related
            } else {
                Label::Unrelated
            };
            pairs.push(AnnotatedPair {
                concept_a: clusters[i].concept.normalized_text.clone(),
                concept_b: clusters[j].concept.normalized_text.clone(),
                label,
            });
        }
    }

    SyntheticFixture {
        clusters,
        vectors: table.rows,
        pairs,
        chunk_size,
    }
}

/// Parameters of the planted-relatedness benchmark.
#[derive(Debug, Clone, Copy)]
pub struct PlantedSpec {
    pub topics: usize,
    pub clusters_per_topic: usize,
    pub synonyms_per_cluster: usize,
    /// Length of each cluster's single definition, in tokens.
    pub definition_tokens: usize,
    pub chunk_size: usize,
    pub dimension: usize,
    /// Topic centroids and unrelated nodes are drawn from `[-extent, extent)`.
    pub extent: f64,
    /// Half-width of the uniform jitter around the centroid for concept nodes.
    pub node_jitter: f64,
    /// Half-width of the uniform jitter around the centroid for each chunk.
    pub chunk_jitter: f64,
}

impl Default for PlantedSpec {
    fn default() -> Self {
        PlantedSpec {
            topics: 4,
            clusters_per_topic: 5,
            synonyms_per_cluster: 3,
            definition_tokens: 300,
            chunk_size: 128,
            dimension: 8,
            extent: 30.0,
            node_jitter: 1.4,
            chunk_jitter: 4.3,
        }
    }
}

/// Clusters grouped into topics; two clusters are related iff they share a
/// topic.
///
/// Concept nodes sit close to their topic centroid, so a node-level
/// comparison can see the relation directly. Synonym and definition nodes are
/// scattered over the whole space. Each cluster text splits into several
/// chunks whose vectors are noisier draws around the centroid, so the averaged
/// cluster vector only carries a diluted signal.
pub fn planted_benchmark(seed: u64, spec: PlantedSpec) -> SyntheticFixture {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let centroids: Vec<Vec<f64>> = (0..spec.topics)
        .map(|_| uniform(&mut rng, spec.dimension, -spec.extent, spec.extent))
        .collect();

    let mut clusters = Vec::new();
    let mut topic_of = Vec::new();
    for t in 0..spec.topics {
        for _ in 0..spec.clusters_per_topic {
            let i = clusters.len();
            let synonyms = (0..spec.synonyms_per_cluster)
                .map(|k| format!("concept {i} synonym {k}"))
                .collect();
            let body: Vec<String> = (0..spec.definition_tokens.saturating_sub(3))
                .map(|w| format!("d{i}x{w}"))
                .collect();
            let definitions = vec![format!("concept {i} definition {}", body.join(" "))];
            clusters.push(concept_cluster(
                format!("concept {i}"),
                synonyms,
                definitions,
            ));
            topic_of.push(t);
        }
    }

    let mut table = VectorTable::default();
    for (c, &t) in clusters.iter().zip(&topic_of) {
        let centroid = &centroids[t];
        table.set_with(&c.concept.normalized_text, || {
            centroid
                .iter()
                .map(|&x| x + rng.random_range(-spec.node_jitter..spec.node_jitter))
                .collect()
        });
        for member in c.synonyms.iter().chain(&c.definitions) {
            table.set_with(member, || {
                uniform(&mut rng, spec.dimension, -spec.extent, spec.extent)
            });
        }
        for chunk in chunk_text(&cluster_text(c), spec.chunk_size) {
            table.set_with(&chunk, || {
                centroid
                    .iter()
                    .map(|&x| x + rng.random_range(-spec.chunk_jitter..spec.chunk_jitter))
                    .collect()
            });
        }
    }

    let mut pairs = Vec::new();
    for i in 0..clusters.len() {
        for j in i + 1..clusters.len() {
            pairs.push(AnnotatedPair {
                concept_a: clusters[i].concept.normalized_text.clone(),
                concept_b: clusters[j].concept.normalized_text.clone(),
                label: if topic_of[i] == topic_of[j] {
                    Label::Related
                } else {
                    Label::Unrelated
                },
            });
        }
    }

    SyntheticFixture {
        clusters,
        vectors: table.rows,
        pairs,
        chunk_size: spec.chunk_size,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::completion::{cluster_embedding, EmbeddingProvider};

    #[test]
    fn random_fixture_respects_limits() {
        for seed in 0..20 {
            let fx = random_fixture(seed, RandomFixtureSpec::default());
            assert!((2..=20).contains(&fx.clusters.len()));
            assert!(fx.node_count() <= 200);
            let p = fx.provider::<f64>().unwrap();
            for c in &fx.clusters {
                assert!(cluster_embedding(c, &p, fx.chunk_size).is_ok());
                assert!(p.embed(&c.concept.normalized_text).is_ok());
            }
        }
    }

    #[test]
    fn planted_clusters_span_three_chunks() {
        let fx = planted_benchmark(7, PlantedSpec::default());
        assert_eq!(fx.clusters.len(), 20);
        assert_eq!(fx.pairs.len(), 190);
        assert_eq!(
            fx.pairs
                .iter()
                .filter(|p| p.label == Label::Related)
                .count(),
            40
        );
        for c in &fx.clusters {
            assert!(chunk_text(&cluster_text(c), fx.chunk_size).len() >= 3);
        }
        assert!(fx.provider::<f64>().is_ok());
    }

    #[test]
    fn fixtures_are_seed_deterministic() {
        let a = planted_benchmark(3, PlantedSpec::default());
        let b = planted_benchmark(3, PlantedSpec::default());
        assert_eq!(a.vectors, b.vectors);
        let c = random_fixture(3, RandomFixtureSpec::default());
        let d = random_fixture(3, RandomFixtureSpec::default());
        assert_eq!(c.vectors, d.vectors);
    }
}
