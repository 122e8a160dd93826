//! Settings resolution: command-line flag, then config file, then default.
//!
//! Relative paths in a config file are resolved against the file's directory.

use std::path::{Path, PathBuf};
use std::time::Duration;

use clap::Args;
use kgforge::completion::CompletionMode;
use kgforge::enrichment::API_KEY_ENV;
use kgforge::ingest::InputMode;
use serde::Deserialize;

use crate::error::CliError;

pub const DEFAULT_BASE_URL: &str = "https://data.bioontology.org";

/// Completion selection including the `off` switch.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CompleteMode {
    Cluster,
    Node,
    Both,
    Off,
}

impl CompleteMode {
    pub fn strategy(self) -> Option<CompletionMode> {
        match self {
            CompleteMode::Cluster => Some(CompletionMode::Cluster),
            CompleteMode::Node => Some(CompletionMode::Node),
            CompleteMode::Both => Some(CompletionMode::Both),
            CompleteMode::Off => None,
        }
    }
}

impl std::str::FromStr for CompleteMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "off" => Ok(CompleteMode::Off),
            other => other.parse::<CompletionMode>().map(|m| match m {
                CompletionMode::Cluster => CompleteMode::Cluster,
                CompletionMode::Node => CompleteMode::Node,
                CompletionMode::Both => CompleteMode::Both,
            }),
        }
    }
}

#[derive(Debug, Clone, Default, Args)]
pub struct Flags {
    /// TOML config file; flags override its entries.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    /// Input file: one term per line, or a free-text document.
    #[arg(long, global = true)]
    pub input: Option<PathBuf>,
    /// structured | unstructured
    #[arg(long, global = true)]
    pub format: Option<InputMode>,
    /// Term list used to extract entities from unstructured input.
    #[arg(long, global = true)]
    pub gazetteer: Option<PathBuf>,
    /// External NER service (`POST /ner`) used instead of a gazetteer.
    #[arg(long, global = true)]
    pub ner_url: Option<String>,

    #[arg(long = "include", global = true, value_name = "TERM")]
    pub include: Vec<String>,
    #[arg(long = "exclude", global = true, value_name = "TERM")]
    pub exclude: Vec<String>,
    #[arg(long, global = true)]
    pub fuzzy_threshold: Option<f64>,
    #[arg(long, global = true)]
    pub english_ratio: Option<f64>,
    /// Also reject strings dominated by non-English stopwords.
    #[arg(long, global = true)]
    pub stopword_detector: bool,

    #[arg(long, global = true, overrides_with = "no_enrich")]
    pub enrich: bool,
    #[arg(long, global = true, overrides_with = "enrich")]
    pub no_enrich: bool,
    #[arg(long, global = true)]
    pub base_url: Option<String>,
    #[arg(long, global = true)]
    pub cache_dir: Option<PathBuf>,
    #[arg(long, global = true)]
    pub page_limit: Option<usize>,
    #[arg(long, global = true)]
    pub min_interval_ms: Option<u64>,
    #[arg(long, global = true)]
    pub max_retries: Option<u32>,
    #[arg(long, global = true)]
    pub max_in_flight: Option<usize>,

    /// cluster | node | both | off
    #[arg(long, global = true)]
    pub complete: Option<CompleteMode>,
    #[arg(long, global = true)]
    pub threshold: Option<f64>,
    #[arg(long, global = true)]
    pub cluster_threshold: Option<f64>,
    #[arg(long, global = true)]
    pub node_threshold: Option<f64>,
    #[arg(long, global = true)]
    pub chunk_size: Option<usize>,
    /// JSON Lines file of `{"text", "vector"}` records.
    #[arg(long, global = true)]
    pub embeddings: Option<PathBuf>,
    /// Embedding service exposing `POST /embed`.
    #[arg(long, global = true)]
    pub embed_url: Option<String>,

    /// Cypher output path.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Graph JSON path; defaults to the Cypher path with a `.graph.json` suffix.
    #[arg(long, global = true)]
    pub graph: Option<PathBuf>,
    /// Concept cluster JSON read by `enrich`, `complete` and `texts`.
    #[arg(long, global = true)]
    pub concepts: Option<PathBuf>,
    /// Concept cluster JSON written by `extract`, `enrich` and `build`.
    #[arg(long, global = true)]
    pub concepts_out: Option<PathBuf>,
    /// JSON Lines log of filtered-out strings.
    #[arg(long, global = true)]
    pub rejections: Option<PathBuf>,
    #[arg(long, global = true)]
    pub pairs: Option<PathBuf>,
    #[arg(long, global = true)]
    pub metrics_out: Option<PathBuf>,
}

impl Flags {
    fn enrich(&self) -> Option<bool> {
        match (self.enrich, self.no_enrich) {
            (true, _) => Some(true),
            (_, true) => Some(false),
            _ => None,
        }
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FileConfig {
    pub input: InputSection,
    pub filter: FilterSection,
    pub ontology: OntologySection,
    pub completion: CompletionSection,
    pub output: OutputSection,
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InputSection {
    pub path: Option<PathBuf>,
    pub format: Option<InputMode>,
    pub gazetteer: Option<PathBuf>,
    pub ner_url: Option<String>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FilterSection {
    pub include: Option<Vec<String>>,
    pub exclude: Option<Vec<String>>,
    pub fuzzy_threshold: Option<f64>,
    pub english_ratio: Option<f64>,
    pub stopword_detector: Option<bool>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OntologySection {
    pub enrich: Option<bool>,
    pub base_url: Option<String>,
    pub api_key: Option<String>,
    pub cache_dir: Option<PathBuf>,
    pub page_limit: Option<usize>,
    pub min_interval_ms: Option<u64>,
    pub max_retries: Option<u32>,
    pub max_in_flight: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CompletionSection {
    pub mode: Option<CompleteMode>,
    pub threshold: Option<f64>,
    pub cluster_threshold: Option<f64>,
    pub node_threshold: Option<f64>,
    pub chunk_size: Option<usize>,
    pub embeddings: Option<PathBuf>,
    pub embed_url: Option<String>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSection {
    pub cypher: Option<PathBuf>,
    pub graph: Option<PathBuf>,
    pub concepts: Option<PathBuf>,
    pub concepts_out: Option<PathBuf>,
    pub rejections: Option<PathBuf>,
    pub pairs: Option<PathBuf>,
    pub metrics: Option<PathBuf>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        let mut cfg: FileConfig = toml::from_str(&text)
            .map_err(|e| CliError::Usage(format!("invalid config {}: {e}", path.display())))?;
        if let Some(dir) = path.parent() {
            cfg.rebase(dir);
        }
        Ok(cfg)
    }

    fn rebase(&mut self, dir: &Path) {
        let fix = |p: &mut Option<PathBuf>| {
            if let Some(inner) = p {
                if inner.is_relative() {
                    *inner = dir.join(&*inner);
                }
            }
        };
        fix(&mut self.input.path);
        fix(&mut self.input.gazetteer);
        fix(&mut self.ontology.cache_dir);
        fix(&mut self.completion.embeddings);
        fix(&mut self.output.cypher);
        fix(&mut self.output.graph);
        fix(&mut self.output.concepts);
        fix(&mut self.output.concepts_out);
        fix(&mut self.output.rejections);
        fix(&mut self.output.pairs);
        fix(&mut self.output.metrics);
    }
}

/// Fully resolved settings.
#[derive(Debug, Clone, PartialEq)]
pub struct Settings {
    pub input: Option<PathBuf>,
    pub format: InputMode,
    pub gazetteer: Option<PathBuf>,
    pub ner_url: Option<String>,

    pub include: Vec<String>,
    pub exclude: Vec<String>,
    pub fuzzy_threshold: f64,
    pub english_ratio: f64,
    pub stopword_detector: bool,

    pub enrich: bool,
    pub base_url: String,
    pub api_key: Option<String>,
    pub cache_dir: PathBuf,
    pub page_limit: usize,
    pub min_interval: Duration,
    pub max_retries: u32,
    pub max_in_flight: usize,

    pub complete: CompleteMode,
    pub threshold: f64,
    pub cluster_threshold: Option<f64>,
    pub node_threshold: Option<f64>,
    pub chunk_size: usize,
    pub embeddings: Option<PathBuf>,
    pub embed_url: Option<String>,

    pub out: PathBuf,
    pub graph: PathBuf,
    pub concepts: PathBuf,
    pub concepts_out: Option<PathBuf>,
    pub rejections: Option<PathBuf>,
    pub pairs: Option<PathBuf>,
    pub metrics_out: PathBuf,
}

fn list(flag: &[String], file: Option<Vec<String>>) -> Vec<String> {
    if flag.is_empty() {
        file.unwrap_or_default()
    } else {
        flag.to_vec()
    }
}

/// `graph.cypher` → `graph.graph.json`.
pub fn graph_path_for(cypher: &Path) -> PathBuf {
    let stem = cypher
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    cypher.with_file_name(format!("{stem}.graph.json"))
}

impl Settings {
    /// `env_key` is the value of the API key environment variable.
    pub fn resolve(flags: &Flags, file: FileConfig, env_key: Option<String>) -> Settings {
        let FileConfig {
            input,
            filter,
            ontology,
            completion,
            output,
        } = file;
        let out = flags
            .out
            .clone()
            .or(output.cypher)
            .unwrap_or_else(|| "graph.cypher".into());
        let graph = flags
            .graph
            .clone()
            .or(output.graph)
            .unwrap_or_else(|| graph_path_for(&out));
        Settings {
            input: flags.input.clone().or(input.path),
            format: flags
                .format
                .or(input.format)
                .unwrap_or(InputMode::Structured),
            gazetteer: flags.gazetteer.clone().or(input.gazetteer),
            ner_url: flags.ner_url.clone().or(input.ner_url),

            include: list(&flags.include, filter.include),
            exclude: list(&flags.exclude, filter.exclude),
            fuzzy_threshold: flags
                .fuzzy_threshold
                .or(filter.fuzzy_threshold)
                .unwrap_or(0.90),
            english_ratio: flags.english_ratio.or(filter.english_ratio).unwrap_or(0.70),
            stopword_detector: flags.stopword_detector || filter.stopword_detector.unwrap_or(false),

            enrich: flags.enrich().or(ontology.enrich).unwrap_or(true),
            base_url: flags
                .base_url
                .clone()
                .or(ontology.base_url)
                .unwrap_or_else(|| DEFAULT_BASE_URL.into()),
            api_key: ontology.api_key.or(env_key).filter(|k| !k.is_empty()),
            cache_dir: flags
                .cache_dir
                .clone()
                .or(ontology.cache_dir)
                .unwrap_or_else(|| ".kgforge-cache".into()),
            page_limit: flags.page_limit.or(ontology.page_limit).unwrap_or(50),
            min_interval: Duration::from_millis(
                flags
                    .min_interval_ms
                    .or(ontology.min_interval_ms)
                    .unwrap_or(100),
            ),
            max_retries: flags.max_retries.or(ontology.max_retries).unwrap_or(3),
            max_in_flight: flags.max_in_flight.or(ontology.max_in_flight).unwrap_or(4),

            complete: flags
                .complete
                .or(completion.mode)
                .unwrap_or(CompleteMode::Both),
            threshold: flags.threshold.or(completion.threshold).unwrap_or(4.0),
            cluster_threshold: flags.cluster_threshold.or(completion.cluster_threshold),
            node_threshold: flags.node_threshold.or(completion.node_threshold),
            chunk_size: flags.chunk_size.or(completion.chunk_size).unwrap_or(128),
            embeddings: flags.embeddings.clone().or(completion.embeddings),
            embed_url: flags.embed_url.clone().or(completion.embed_url),

            out,
            graph,
            concepts: flags
                .concepts
                .clone()
                .or(output.concepts)
                .unwrap_or_else(|| "concepts.json".into()),
            concepts_out: flags.concepts_out.clone().or(output.concepts_out),
            rejections: flags.rejections.clone().or(output.rejections),
            pairs: flags.pairs.clone().or(output.pairs),
            metrics_out: flags
                .metrics_out
                .clone()
                .or(output.metrics)
                .unwrap_or_else(|| "metrics.json".into()),
        }
    }

    pub fn from_flags(flags: &Flags) -> Result<Settings, CliError> {
        let file = match &flags.config {
            Some(p) => FileConfig::load(p)?,
            None => FileConfig::default(),
        };
        Ok(Settings::resolve(
            flags,
            file,
            std::env::var(API_KEY_ENV).ok(),
        ))
    }
}
