//! 50/50 concept split over a 100-concept planted fixture: cluster-based
//! completion on one half, node-based on the other, threshold 4, each half
//! scored on the annotated pairs inside it.
//!
//! ```text
//! cargo run -p kgforge-core --example split_harness -- [seed]
//! ```

use std::collections::HashSet;

use kgforge::completion::{self, CompletionMode};
use kgforge::evaluation::{evaluate, MetricsDocument};
use kgforge::graph::build_graph;
use kgforge::synthetic::{planted_benchmark, PlantedSpec};
use kgforge::CompletionConfig;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() {
    let seed: u64 = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(0);
    let spec = PlantedSpec {
        topics: 10,
        clusters_per_topic: 10,
        ..Default::default()
    };
    let fx = planted_benchmark(seed, spec);
    let provider = fx.provider::<f64>().expect("fixture vectors load");

    let mut order: Vec<usize> = (0..fx.clusters.len()).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let (first, second) = order.split_at(order.len() / 2);

    for (half, mode) in [
        (first, CompletionMode::Cluster),
        (second, CompletionMode::Node),
    ] {
        let mut idx = half.to_vec();
        idx.sort_unstable();
        let clusters: Vec<_> = idx.iter().map(|&i| fx.clusters[i].clone()).collect();
        let names: HashSet<&str> = clusters
            .iter()
            .map(|c| c.concept.normalized_text.as_str())
            .collect();
        let pairs: Vec<_> = fx
            .pairs
            .iter()
            .filter(|p| {
                names.contains(p.concept_a.as_str()) && names.contains(p.concept_b.as_str())
            })
            .cloned()
            .collect();

        let mut g = build_graph(&clusters).expect("synthetic clusters are valid");
        let mut cfg = CompletionConfig::with_threshold(mode, 4.0);
        cfg.chunk_size = fx.chunk_size;
        completion::complete(&mut g, &clusters, &provider, &cfg).expect("completion");
        let (counts, report) = evaluate::<f64>(&g, &pairs, mode).expect("pairs reference the half");

        println!(
            "{mode:?}-based, {} concepts, {} pairs",
            clusters.len(),
            pairs.len()
        );
        print!("{}", MetricsDocument::new(&counts, &report).to_table());
        println!();
    }
}
