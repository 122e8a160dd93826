//! Typed knowledge graph with content-addressed node identifiers.

mod cypher;

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::enrichment::ConceptCluster;

pub use cypher::emit_cypher;

#[derive(Debug, thiserror::Error)]
pub enum GraphError {
    #[error("`{0}` has no characters usable in a node id")]
    UnsanitizableText(String),
    #[error("concept `{0}` appears twice")]
    DuplicateConcept(String),
    #[error("edge endpoint `{0}` is not a node")]
    MissingEndpoint(String),
    #[error("self loop on `{0}`")]
    SelfLoop(String),
    #[error("invalid distance on {rel} edge {from} -> {to}")]
    InvalidDistance {
        rel: Relation,
        from: NodeId,
        to: NodeId,
    },
    #[error("node `{0}` has no cluster")]
    MissingCluster(String),
    #[error("failed to write cypher: {0}")]
    Sink(#[from] std::io::Error),
}

/// Identifier matching `[a-z][a-z0-9]*`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct NodeId(String);

impl NodeId {
    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<NodeId> for String {
    fn from(id: NodeId) -> String {
        id.0
    }
}

impl TryFrom<String> for NodeId {
    type Error = String;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        let mut chars = s.chars();
        let valid = chars.next().is_some_and(|c| c.is_ascii_lowercase())
            && chars.all(|c| c.is_ascii_lowercase() || c.is_ascii_digit());
        if valid {
            Ok(NodeId(s))
        } else {
            Err(format!("`{s}` is not a valid node id"))
        }
    }
}

/// Lowercases, keeps only `[a-z0-9]` and prefixes `n` when the result starts
/// with a digit. Texts that differ only in case or punctuation share an id.
pub fn make_node_id(text: &str) -> Result<NodeId, GraphError> {
    let mut id: String = text
        .to_lowercase()
        .chars()
        .filter(|c| c.is_ascii_lowercase() || c.is_ascii_digit())
        .collect();
    if id.is_empty() {
        return Err(GraphError::UnsanitizableText(text.to_string()));
    }
    if id.starts_with(|c: char| c.is_ascii_digit()) {
        id.insert(0, 'n');
    }
    Ok(NodeId(id))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum NodeKind {
    Concept,
    Synonym,
    Definition,
}

impl NodeKind {
    pub fn label(self) -> &'static str {
        match self {
            NodeKind::Concept => "Concept",
            NodeKind::Synonym => "Synonym",
            NodeKind::Definition => "Definition",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphNode {
    pub id: NodeId,
    pub kind: NodeKind,
    pub display_text: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Relation {
    #[serde(rename = "HAS_SYNONYM")]
    HasSynonym,
    #[serde(rename = "HAS_DEFINITION")]
    HasDefinition,
    #[serde(rename = "embedding_match_cluster")]
    EmbeddingMatchCluster,
    #[serde(rename = "embedding_match_node")]
    EmbeddingMatchNode,
}

impl Relation {
    pub fn as_str(self) -> &'static str {
        match self {
            Relation::HasSynonym => "HAS_SYNONYM",
            Relation::HasDefinition => "HAS_DEFINITION",
            Relation::EmbeddingMatchCluster => "embedding_match_cluster",
            Relation::EmbeddingMatchNode => "embedding_match_node",
        }
    }

    pub fn is_embedding(self) -> bool {
        matches!(
            self,
            Relation::EmbeddingMatchCluster | Relation::EmbeddingMatchNode
        )
    }
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphEdge {
    pub from: NodeId,
    pub to: NodeId,
    pub rel: Relation,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub distance: Option<f64>,
}

type EdgeKey = (Relation, NodeId, NodeId);

/// Nodes, edges and the cluster each node belongs to.
///
/// Edges are keyed by `(rel, from, to)` so a relation between two nodes
/// exists at most once, and iteration order is the emission order.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GraphDocument", into = "GraphDocument")]
pub struct KnowledgeGraph {
    nodes: BTreeMap<NodeId, GraphNode>,
    edges: BTreeMap<EdgeKey, Option<f64>>,
    cluster_of: BTreeMap<NodeId, NodeId>,
    concepts: Vec<NodeId>,
}

impl KnowledgeGraph {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds a concept node that anchors its own cluster.
    pub fn add_concept(&mut self, id: NodeId, display_text: &str) -> Result<(), GraphError> {
        if self.nodes.contains_key(&id) {
            return Err(GraphError::DuplicateConcept(id.0));
        }
        self.insert_node(id.clone(), NodeKind::Concept, display_text, id.clone());
        self.concepts.push(id);
        Ok(())
    }

    /// Adds a node to `cluster` unless the id already exists. Returns whether
    /// a node was created.
    pub fn add_member(
        &mut self,
        id: NodeId,
        kind: NodeKind,
        display_text: &str,
        cluster: &NodeId,
    ) -> bool {
        if self.nodes.contains_key(&id) {
            return false;
        }
        self.insert_node(id, kind, display_text, cluster.clone());
        true
    }

    fn insert_node(&mut self, id: NodeId, kind: NodeKind, display_text: &str, cluster: NodeId) {
        self.cluster_of.insert(id.clone(), cluster);
        self.nodes.insert(
            id.clone(),
            GraphNode {
                id,
                kind,
                display_text: display_text.to_string(),
            },
        );
    }

    /// Inserts an edge; returns `false` if the same `(rel, from, to)` exists.
    pub fn add_edge(&mut self, edge: GraphEdge) -> Result<bool, GraphError> {
        for end in [&edge.from, &edge.to] {
            if !self.nodes.contains_key(end) {
                return Err(GraphError::MissingEndpoint(end.0.clone()));
            }
        }
        if edge.from == edge.to {
            return Err(GraphError::SelfLoop(edge.from.0));
        }
        let distance_ok = match (edge.rel.is_embedding(), edge.distance) {
            (true, Some(d)) => d.is_finite() && d >= 0.0,
            (false, None) => true,
            _ => false,
        };
        if !distance_ok {
            return Err(GraphError::InvalidDistance {
                rel: edge.rel,
                from: edge.from,
                to: edge.to,
            });
        }
        let key = (edge.rel, edge.from, edge.to);
        if self.edges.contains_key(&key) {
            return Ok(false);
        }
        self.edges.insert(key, edge.distance);
        Ok(true)
    }

    pub fn node(&self, id: &NodeId) -> Option<&GraphNode> {
        self.nodes.get(id)
    }

    pub fn nodes(&self) -> impl Iterator<Item = &GraphNode> {
        self.nodes.values()
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    /// Edges in `(rel, from, to)` order.
    pub fn edges(&self) -> impl Iterator<Item = GraphEdge> + '_ {
        self.edges
            .iter()
            .map(|((rel, from, to), distance)| GraphEdge {
                from: from.clone(),
                to: to.clone(),
                rel: *rel,
                distance: *distance,
            })
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges_with(&self, rel: Relation) -> impl Iterator<Item = GraphEdge> + '_ {
        self.edges().filter(move |e| e.rel == rel)
    }

    pub fn has_edge(&self, rel: Relation, from: &NodeId, to: &NodeId) -> bool {
        self.edges.contains_key(&(rel, from.clone(), to.clone()))
    }

    pub fn cluster_of(&self, id: &NodeId) -> Option<&NodeId> {
        self.cluster_of.get(id)
    }

    /// Concept ids in insertion order.
    pub fn concepts(&self) -> &[NodeId] {
        &self.concepts
    }

    pub fn cluster_members<'a>(
        &'a self,
        concept: &'a NodeId,
    ) -> impl Iterator<Item = &'a NodeId> + 'a {
        self.cluster_of
            .iter()
            .filter(move |(_, c)| *c == concept)
            .map(|(n, _)| n)
    }

    /// Checks every structural invariant; used after deserialization.
    pub fn validate(&self) -> Result<(), GraphError> {
        for id in self.nodes.keys() {
            let Some(cluster) = self.cluster_of.get(id) else {
                return Err(GraphError::MissingCluster(id.0.clone()));
            };
            let anchor = self.nodes.get(cluster).map(|n| n.kind);
            if anchor != Some(NodeKind::Concept) || self.cluster_of.get(cluster) != Some(cluster) {
                return Err(GraphError::MissingCluster(id.0.clone()));
            }
        }
        for c in &self.concepts {
            if self.nodes.get(c).map(|n| n.kind) != Some(NodeKind::Concept) {
                return Err(GraphError::MissingEndpoint(c.0.clone()));
            }
        }
        let mut copy = KnowledgeGraph {
            nodes: self.nodes.clone(),
            cluster_of: self.cluster_of.clone(),
            ..Default::default()
        };
        for e in self.edges() {
            copy.add_edge(e)?;
        }
        Ok(())
    }
}

/// Serialized form of a graph (intermediate `graph.json` artifact).
#[derive(Serialize, Deserialize)]
struct GraphDocument {
    concepts: Vec<NodeId>,
    nodes: Vec<GraphNode>,
    cluster_of: BTreeMap<NodeId, NodeId>,
    edges: Vec<GraphEdge>,
}

impl From<KnowledgeGraph> for GraphDocument {
    fn from(g: KnowledgeGraph) -> Self {
        GraphDocument {
            edges: g.edges().collect(),
            concepts: g.concepts,
            nodes: g.nodes.into_values().collect(),
            cluster_of: g.cluster_of,
        }
    }
}

impl TryFrom<GraphDocument> for KnowledgeGraph {
    type Error = GraphError;

    fn try_from(doc: GraphDocument) -> Result<Self, Self::Error> {
        let mut g = KnowledgeGraph {
            nodes: doc.nodes.into_iter().map(|n| (n.id.clone(), n)).collect(),
            cluster_of: doc.cluster_of,
            concepts: doc.concepts,
            edges: BTreeMap::new(),
        };
        for e in doc.edges {
            g.add_edge(e)?;
        }
        g.validate()?;
        Ok(g)
    }
}

/// One concept node per cluster plus one node per distinct enrichment item,
/// linked with `HAS_SYNONYM` / `HAS_DEFINITION` edges from the concept.
///
/// Items whose id is already taken reuse the existing node (the first
/// cluster keeps ownership). Items that cannot be turned into an id, or that
/// collapse onto their own concept, are skipped with a warning.
pub fn build_graph(clusters: &[ConceptCluster]) -> Result<KnowledgeGraph, GraphError> {
    let mut g = KnowledgeGraph::new();
    let mut anchors = Vec::with_capacity(clusters.len());
    for cluster in clusters {
        let text = &cluster.concept.normalized_text;
        let id = make_node_id(text)?;
        if g.node(&id).is_some() {
            return Err(GraphError::DuplicateConcept(text.clone()));
        }
        g.add_concept(id.clone(), text)?;
        anchors.push(id);
    }

    for (cluster, anchor) in clusters.iter().zip(&anchors) {
        let items = cluster
            .synonyms
            .iter()
            .map(|s| (s, NodeKind::Synonym, Relation::HasSynonym))
            .chain(
                cluster
                    .definitions
                    .iter()
                    .map(|d| (d, NodeKind::Definition, Relation::HasDefinition)),
            );
        for (text, kind, rel) in items {
            let id = match make_node_id(text) {
                Ok(id) => id,
                Err(e) => {
                    log::warn!(
                        "skipping item of `{}`: {e}",
                        cluster.concept.normalized_text
                    );
                    continue;
                }
            };
            if &id == anchor {
                log::warn!("skipping `{text}`: same id as its concept");
                continue;
            }
            g.add_member(id.clone(), kind, text, anchor);
            g.add_edge(GraphEdge {
                from: anchor.clone(),
                to: id,
                rel,
                distance: None,
            })?;
        }
    }
    Ok(g)
}
