use std::collections::BTreeSet;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::sync::Arc;

use kgforge::completion::{self, chunk_text, cluster_text, EmbeddingProvider};
use kgforge::enrichment::{enrich_all, ConceptCluster, OntologyClient, OntologyClientConfig};
use kgforge::evaluation::{self, MetricsDocument};
use kgforge::filtration::{
    filter_concepts, FilterConfig, Rejection, RejectionLog, StopwordDetector,
};
use kgforge::graph::{build_graph, emit_cypher, KnowledgeGraph};
use kgforge::http::RetryPolicy;
use kgforge::ingest::{
    self, normalize, Concept, EntityExtractor, Gazetteer, InputMode, NerClient, RawInput,
};
use kgforge::{CompletionConfig, FileProvider, HttpProvider};
use serde::Serialize;

use crate::config::Settings;
use crate::error::CliError;

fn require_file(path: &Path, what: &str) -> Result<(), CliError> {
    if path.is_file() {
        Ok(())
    } else {
        Err(CliError::Usage(format!(
            "{what} {} does not exist",
            path.display()
        )))
    }
}

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| CliError::io(format!("cannot write {}", path.display()), e))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value).expect("serializable");
    text.push('\n');
    std::fs::write(path, text)
        .map_err(|e| CliError::io(format!("cannot write {}", path.display()), e))
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path, what: &str) -> Result<T, CliError> {
    require_file(path, what)?;
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::io(format!("cannot read {}", path.display()), e))?;
    serde_json::from_str(&text)
        .map_err(|e| CliError::Usage(format!("invalid {what} {}: {e}", path.display())))
}

pub fn filter_config(s: &Settings) -> Result<FilterConfig, CliError> {
    let cfg = FilterConfig {
        fuzzy_threshold: s.fuzzy_threshold,
        include_list: s.include.clone(),
        exclude_list: s.exclude.clone(),
        english_letter_ratio: s.english_ratio,
        detector: s
            .stopword_detector
            .then(|| Arc::new(StopwordDetector) as Arc<dyn kgforge::filtration::LanguageDetector>),
        translator: None,
    };
    cfg.validate()?;
    Ok(cfg)
}

fn extractor(s: &Settings) -> Result<Box<dyn EntityExtractor>, CliError> {
    if let Some(path) = &s.gazetteer {
        require_file(path, "gazetteer")?;
        return Ok(Box::new(Gazetteer::from_file(path)?));
    }
    if let Some(url) = &s.ner_url {
        return Ok(Box::new(NerClient::new(url, RetryPolicy::default())));
    }
    Err(CliError::Usage(
        "unstructured input needs --gazetteer or --ner-url".into(),
    ))
}

/// Reads the input and applies concept-level filtration.
pub fn ingest(
    s: &Settings,
    filters: &FilterConfig,
) -> Result<(Vec<Concept>, Vec<Rejection>), CliError> {
    let path = s
        .input
        .as_deref()
        .ok_or_else(|| CliError::Usage("no input given (--input)".into()))?;
    require_file(path, "input")?;
    let raw = RawInput::from_file(path, s.format)?;
    let concepts = match s.format {
        InputMode::Structured => ingest::parse_structured(&raw)?,
        InputMode::Unstructured => ingest::extract_entities(&raw, extractor(s)?.as_ref())?,
    };
    let (kept, rejected) = filter_concepts(&concepts, filters);
    if kept.is_empty() {
        return Err(CliError::Usage("no concepts left after filtration".into()));
    }
    log::info!(
        "{} concepts after filtration ({} rejected)",
        kept.len(),
        rejected.len()
    );
    Ok((kept, rejected))
}

pub fn enrich(
    concepts: Vec<Concept>,
    s: &Settings,
    filters: &FilterConfig,
    rejections: &mut Vec<Rejection>,
) -> Result<Vec<ConceptCluster>, CliError> {
    if !s.enrich {
        return Ok(concepts.into_iter().map(ConceptCluster::bare).collect());
    }
    let mut cfg = OntologyClientConfig::new(
        &s.base_url,
        s.api_key.clone().unwrap_or_default(),
        &s.cache_dir,
    );
    cfg.page_limit = s.page_limit;
    cfg.min_request_interval = s.min_interval;
    cfg.max_retries = s.max_retries;
    cfg.max_in_flight = s.max_in_flight;
    let client = OntologyClient::new(cfg)?;
    let enriched = enrich_all(&concepts, &client, filters)?;
    let cached = enriched.iter().filter(|e| e.from_cache).count();
    log::info!("enriched {} concepts ({cached} from cache)", enriched.len());
    Ok(enriched
        .into_iter()
        .map(|e| {
            if let Some(w) = &e.warning {
                eprintln!("warning: {w}");
            }
            rejections.extend(e.rejected);
            e.cluster
        })
        .collect())
}

fn provider(s: &Settings) -> Result<Box<dyn EmbeddingProvider<f64>>, CliError> {
    if let Some(path) = &s.embeddings {
        require_file(path, "embeddings file")?;
        return Ok(Box::new(FileProvider::load(path)?));
    }
    if let Some(url) = &s.embed_url {
        return Ok(Box::new(HttpProvider::new(
            url,
            RetryPolicy::default(),
            None,
        )));
    }
    Err(CliError::Usage(
        "completion needs --embeddings or --embed-url (or --complete off)".into(),
    ))
}

fn completion_config(
    s: &Settings,
    mode: completion::CompletionMode,
) -> Result<CompletionConfig, CliError> {
    let cfg = CompletionConfig {
        mode,
        threshold: s.threshold,
        chunk_size: s.chunk_size,
        cluster_threshold: s.cluster_threshold,
        node_threshold: s.node_threshold,
    };
    cfg.validate()?;
    Ok(cfg)
}

/// Builds the graph and runs the configured completion strategies.
pub fn assemble(clusters: &[ConceptCluster], s: &Settings) -> Result<KnowledgeGraph, CliError> {
    // Fail on bad settings before any graph work.
    let plan = match s.complete.strategy() {
        Some(mode) => Some((completion_config(s, mode)?, provider(s)?)),
        None => None,
    };
    let mut g = build_graph(clusters)?;
    if let Some((cfg, provider)) = plan {
        let report = completion::complete(&mut g, clusters, provider.as_ref(), &cfg)?;
        for text in &report.skipped {
            eprintln!("warning: no embedding for `{text}`");
        }
        log::info!("completion added {} edges", report.added);
    }
    Ok(g)
}

pub fn write_graph(g: &KnowledgeGraph, s: &Settings) -> Result<(), CliError> {
    let mut out = create(&s.out)?;
    emit_cypher(g, &mut out)?;
    out.flush()
        .map_err(|e| CliError::io(format!("cannot write {}", s.out.display()), e))?;
    write_json(&s.graph, g)?;
    eprintln!(
        "wrote {} nodes and {} edges to {}",
        g.node_count(),
        g.edge_count(),
        s.out.display()
    );
    Ok(())
}

fn write_rejections(rejections: Vec<Rejection>, s: &Settings) -> Result<(), CliError> {
    let Some(path) = &s.rejections else {
        return Ok(());
    };
    let log = RejectionLog {
        entries: rejections,
    };
    let mut out = create(path)?;
    log.write_jsonl(&mut out)
        .and_then(|_| out.flush())
        .map_err(|e| CliError::io(format!("cannot write {}", path.display()), e))
}

fn load_clusters(s: &Settings) -> Result<Vec<ConceptCluster>, CliError> {
    read_json(&s.concepts, "concept file")
}

pub fn extract(s: &Settings) -> Result<(), CliError> {
    let filters = filter_config(s)?;
    let (concepts, rejections) = ingest(s, &filters)?;
    let clusters: Vec<_> = concepts.into_iter().map(ConceptCluster::bare).collect();
    let target = s.concepts_out.as_ref().unwrap_or(&s.concepts);
    write_json(target, &clusters)?;
    write_rejections(rejections, s)?;
    eprintln!("wrote {} concepts to {}", clusters.len(), target.display());
    Ok(())
}

pub fn enrich_cmd(s: &Settings) -> Result<(), CliError> {
    let filters = filter_config(s)?;
    let clusters = load_clusters(s)?;
    let concepts = clusters.into_iter().map(|c| c.concept).collect();
    let mut rejections = Vec::new();
    let enriched = enrich(concepts, s, &filters, &mut rejections)?;
    let target = s.concepts_out.as_ref().unwrap_or(&s.concepts);
    write_json(target, &enriched)?;
    write_rejections(rejections, s)?;
    eprintln!("wrote {} clusters to {}", enriched.len(), target.display());
    Ok(())
}

pub fn build(s: &Settings) -> Result<(), CliError> {
    let filters = filter_config(s)?;
    let (concepts, mut rejections) = ingest(s, &filters)?;
    let clusters = enrich(concepts, s, &filters, &mut rejections)?;
    let g = assemble(&clusters, s)?;
    if let Some(path) = &s.concepts_out {
        write_json(path, &clusters)?;
    }
    write_rejections(rejections, s)?;
    write_graph(&g, s)
}

pub fn complete_cmd(s: &Settings) -> Result<(), CliError> {
    let clusters = load_clusters(s)?;
    let g = assemble(&clusters, s)?;
    write_graph(&g, s)
}

/// Every text the embedding provider is asked for: node texts and, for the
/// configured chunk size, cluster chunks.
pub fn texts(s: &Settings) -> Result<(), CliError> {
    let clusters = load_clusters(s)?;
    let g = build_graph(&clusters)?;
    let mut all: BTreeSet<String> = g.nodes().map(|n| normalize(&n.display_text)).collect();
    for c in &clusters {
        all.extend(chunk_text(&cluster_text(c), s.chunk_size));
    }
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    for t in all {
        writeln!(out, "{t}").map_err(|e| CliError::io("stdout", e))?;
    }
    Ok(())
}

pub fn eval(s: &Settings) -> Result<(), CliError> {
    let mode = s
        .complete
        .strategy()
        .ok_or_else(|| CliError::Usage("eval needs a completion mode other than off".into()))?;
    let pairs_path = s
        .pairs
        .as_deref()
        .ok_or_else(|| CliError::Usage("no pairs file given (--pairs)".into()))?;
    require_file(pairs_path, "pairs file")?;
    let g: KnowledgeGraph = read_json(&s.graph, "graph file")?;
    let pairs = evaluation::load_pairs(pairs_path)?;
    if pairs.is_empty() {
        return Err(CliError::Usage(format!(
            "{} has no annotated pairs",
            pairs_path.display()
        )));
    }
    let (counts, report) = evaluation::evaluate::<f64>(&g, &pairs, mode)?;
    let doc = MetricsDocument::new(&counts, &report);
    write_json(&s.metrics_out, &doc)?;
    print!("{}", doc.to_table());
    Ok(())
}
