//! Medical knowledge-graph automation.
//!
//! The pipeline turns a list of terms (or a free-text document) into a
//! Cypher script:
//!
//! 1. [`ingest`] parses term lists or extracts entities from text;
//! 2. [`filtration`] drops excluded, non-English and near-duplicate strings;
//! 3. [`enrichment`] pulls synonyms and definitions from an ontology API;
//! 4. [`graph`] builds content-addressed nodes and emits Cypher;
//! 5. [`completion`] adds cross-cluster edges from embedding distances;
//! 6. [`evaluation`] scores those edges against annotated concept pairs.
//!
//! Numeric code is generic over [`Scalar`]; the aliases below fix it to `f64`
//! (and `f32` where that is useful).

pub mod completion;
pub mod enrichment;
pub mod evaluation;
pub mod filtration;
pub mod graph;
pub mod http;
pub mod ingest;
pub mod scalar;
pub mod synthetic;

pub use scalar::Scalar;

pub type Embedding = completion::Embedding<f64>;
pub type Embedding32 = completion::Embedding<f32>;
pub type CompletionConfig = completion::CompletionConfig<f64>;
pub type FileProvider = completion::FileProvider<f64>;
pub type HttpProvider = completion::HttpProvider<f64>;
pub type MetricReport = evaluation::MetricReport<f64>;
