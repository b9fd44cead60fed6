//! Browser bindings: each export returns a JSON string, with `{"error": ...}`
//! on failure so the page never has to catch exceptions.

use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

use eventpred::harness::config::DataSource;
use eventpred::harness::{run_experiment, ExperimentConfig, SynthConfig, Variant};
use eventpred::harness::generate_synthetic;
use eventpred::harp::{build_hierarchy, default_threshold};
use eventpred::poincare::{train_poincare, PoincareConfig};
use eventpred::Graph;

fn respond(result: eventpred::Result<Value>) -> String {
    match result {
        Ok(v) => v.to_string(),
        Err(e) => json!({ "error": e.to_string() }).to_string(),
    }
}

fn binary_tree(depth: u32) -> eventpred::Result<Graph> {
    let n = (1usize << (depth + 1)) - 1;
    let edges: Vec<(usize, usize)> = (1..n).map(|c| ((c - 1) / 2, c)).collect();
    Graph::from_edges(n, &edges)
}

/// Train a 2-d Poincaré embedding of a balanced binary tree.
#[wasm_bindgen]
pub fn poincare_tree(depth: u32, epochs: usize, learning_rate: f64, seed: u64) -> String {
    respond((|| {
        let tree = binary_tree(depth.clamp(1, 7))?;
        let model = train_poincare(
            &tree,
            &PoincareConfig {
                dim: 2,
                epochs,
                learning_rate,
                negatives: 5,
                seed,
                ..PoincareConfig::default()
            },
        )?;
        let points: Vec<[f64; 2]> = (0..tree.node_count())
            .map(|i| {
                let r = model.embedding.row(i);
                [r[0], r[1]]
            })
            .collect();
        Ok(json!({
            "points": points,
            "edges": tree.edges(),
            "losses": model.epoch_losses,
        }))
    })())
}

/// Node and edge counts of every coarsening level of a synthetic friendship graph.
#[wasm_bindgen]
pub fn harp_levels(n_users: usize, n_groups: usize, threshold: usize, seed: u64) -> String {
    respond((|| {
        let ds = generate_synthetic(&SynthConfig {
            n_users,
            n_groups,
            seed,
            ..SynthConfig::default()
        })?;
        let threshold = if threshold == 0 {
            default_threshold(n_users)
        } else {
            threshold
        };
        let h = build_hierarchy(&ds.graph, threshold, seed)?;
        let levels: Vec<Value> = h
            .levels
            .iter()
            .map(|l| json!({ "nodes": l.graph.node_count(), "edges": l.graph.edge_count() }))
            .collect();
        Ok(json!({ "threshold": threshold, "levels": levels }))
    })())
}

/// Cross-validated accuracy of text-only versus text + HARP on synthetic data.
///
/// Uses a reduced embedding budget so it stays interactive.
#[wasm_bindgen]
pub fn influence_experiment(rho: f64, tau: f64, seed: u64) -> String {
    respond((|| {
        let mut cfg = ExperimentConfig {
            seed,
            variants: vec![Variant::TextHarp, Variant::Text, Variant::Harp],
            data: DataSource::Synthetic(SynthConfig {
                n_users: 150,
                n_groups: 8,
                attend_coherence: rho,
                token_signal: tau,
                seed,
                ..SynthConfig::default()
            }),
            ..ExperimentConfig::default()
        };
        cfg.sgns.dim = 32;
        cfg.sgns.epochs = 1;
        cfg.walk.walks_per_node = 5;
        cfg.walk.walk_length = 40;
        cfg.train.epochs = 40;
        let report = run_experiment(&cfg)?;
        let rows: Vec<Value> = report
            .results
            .iter()
            .map(|r| json!({ "variant": r.variant.to_string(), "accuracy": r.mean.accuracy, "f1": r.mean.f1 }))
            .collect();
        Ok(json!({ "majority": report.majority_baseline(), "variants": rows }))
    })())
}
