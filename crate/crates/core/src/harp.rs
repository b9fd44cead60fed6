//! Hierarchical embedding: coarsen the graph by star and edge collapsing,
//! embed the coarsest graph, then prolongate and refine level by level.

use std::fmt;

use rand::seq::SliceRandom;

use crate::embedding::EmbeddingMatrix;
use crate::graph::Graph;
use crate::node2vec::{generate_walks, train_sgns_from, SgnsConfig, SgnsModel, WalkConfig};
use crate::{derive_seed, seeded, Error, Result};

/// One coarsening step: the coarse graph and where each finer node went.
#[derive(Debug, Clone, PartialEq)]
pub struct CoarseningLevel {
    pub graph: Graph,
    pub fine_to_coarse: Vec<usize>,
}

impl CoarseningLevel {
    fn identity(graph: Graph) -> Self {
        let fine_to_coarse = (0..graph.node_count()).collect();
        CoarseningLevel {
            graph,
            fine_to_coarse,
        }
    }
}

/// Levels from finest (the input graph, identity map) to coarsest.
#[derive(Debug, Clone, PartialEq)]
pub struct Hierarchy {
    pub levels: Vec<CoarseningLevel>,
    pub threshold: usize,
}

impl Hierarchy {
    pub fn finest(&self) -> &Graph {
        &self.levels[0].graph
    }

    pub fn coarsest(&self) -> &Graph {
        &self.levels.last().expect("hierarchy is never empty").graph
    }

    /// Map from finest node ids straight to coarsest node ids.
    pub fn finest_to_coarsest(&self) -> Vec<usize> {
        let mut map: Vec<usize> = (0..self.finest().node_count()).collect();
        for level in &self.levels[1..] {
            for m in &mut map {
                *m = level.fine_to_coarse[*m];
            }
        }
        map
    }
}

impl fmt::Display for Hierarchy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, level) in self.levels.iter().enumerate() {
            writeln!(
                f,
                "level {i}: {} nodes, {} edges",
                level.graph.node_count(),
                level.graph.edge_count()
            )?;
        }
        Ok(())
    }
}

/// Merge node groups given as a union mapping `merged_into[v] = representative`.
///
/// Coarse ids follow the order in which representatives are first met while
/// scanning fine ids ascending. Edges are rewired, duplicates and self-loops
/// removed.
fn contract(graph: &Graph, partner: &[Option<usize>]) -> CoarseningLevel {
    let n = graph.node_count();
    let mut fine_to_coarse = vec![usize::MAX; n];
    let mut next = 0;
    for v in 0..n {
        if fine_to_coarse[v] != usize::MAX {
            continue;
        }
        fine_to_coarse[v] = next;
        if let Some(w) = partner[v] {
            fine_to_coarse[w] = next;
        }
        next += 1;
    }
    let edges: Vec<(usize, usize)> = graph
        .edges()
        .into_iter()
        .map(|(u, v)| (fine_to_coarse[u], fine_to_coarse[v]))
        .collect();
    let coarse = Graph::from_edges(next, &edges).expect("coarse ids are in range");
    CoarseningLevel {
        graph: coarse,
        fine_to_coarse,
    }
}

/// Pair up the not-yet-merged neighbors of each hub, hubs taken by decreasing
/// degree (ties by id). Pairing within a hub is a seeded shuffle.
pub fn star_collapse(graph: &Graph, seed: u64) -> CoarseningLevel {
    let n = graph.node_count();
    let mut rng = seeded(seed);
    let mut hubs: Vec<usize> = (0..n).collect();
    hubs.sort_by_key(|&v| (std::cmp::Reverse(graph.degree(v)), v));
    let mut partner: Vec<Option<usize>> = vec![None; n];
    let mut merged = vec![false; n];
    for hub in hubs {
        if graph.degree(hub) < 2 {
            break;
        }
        let mut free: Vec<usize> = graph
            .adj(hub)
            .iter()
            .copied()
            .filter(|&v| !merged[v])
            .collect();
        if free.len() < 2 {
            continue;
        }
        free.shuffle(&mut rng);
        for pair in free.chunks_exact(2) {
            let (a, b) = (pair[0], pair[1]);
            merged[a] = true;
            merged[b] = true;
            partner[a] = Some(b);
            partner[b] = Some(a);
        }
    }
    contract(graph, &partner)
}

/// Greedy maximal matching over a seeded shuffle of the edge list.
pub fn edge_collapse(graph: &Graph, seed: u64) -> CoarseningLevel {
    let mut edges = graph.edges();
    edges.shuffle(&mut seeded(seed));
    edge_collapse_ordered(graph, &edges)
}

/// Greedy maximal matching scanning `edges` in the given order.
pub fn edge_collapse_ordered(graph: &Graph, edges: &[(usize, usize)]) -> CoarseningLevel {
    let mut partner: Vec<Option<usize>> = vec![None; graph.node_count()];
    for &(u, v) in edges {
        if u != v && partner[u].is_none() && partner[v].is_none() {
            partner[u] = Some(v);
            partner[v] = Some(u);
        }
    }
    contract(graph, &partner)
}

fn compose(first: &[usize], second: &[usize]) -> Vec<usize> {
    first.iter().map(|&c| second[c]).collect()
}

/// Default coarsening stop size: `max(100, |V| / 32)`.
pub fn default_threshold(node_count: usize) -> usize {
    (node_count >> 5).max(100)
}

/// Apply star then edge collapsing per round until the graph has at most
/// `threshold` nodes or a round no longer shrinks it.
pub fn build_hierarchy(graph: &Graph, threshold: usize, seed: u64) -> Result<Hierarchy> {
    if threshold == 0 {
        return Err(Error::Config("threshold must be >= 1".into()));
    }
    let mut levels = vec![CoarseningLevel::identity(graph.clone())];
    let mut round = 0u64;
    loop {
        let current = &levels.last().expect("non-empty").graph;
        if current.node_count() <= threshold {
            break;
        }
        let star = star_collapse(current, derive_seed(seed, 2 * round));
        let edge = edge_collapse(&star.graph, derive_seed(seed, 2 * round + 1));
        if edge.graph.node_count() >= current.node_count() {
            break;
        }
        levels.push(CoarseningLevel {
            fine_to_coarse: compose(&star.fine_to_coarse, &edge.fine_to_coarse),
            graph: edge.graph,
        });
        round += 1;
    }
    Ok(Hierarchy { levels, threshold })
}

/// Copy each coarse row to every fine node that maps onto it.
pub fn prolongate(coarse: &EmbeddingMatrix, fine_to_coarse: &[usize]) -> Result<EmbeddingMatrix> {
    let dim = coarse.dim();
    let mut fine = EmbeddingMatrix::zeros(fine_to_coarse.len(), dim);
    for (f, &c) in fine_to_coarse.iter().enumerate() {
        let row = coarse.get_row(c).ok_or(Error::Unmapped(f))?;
        fine.row_mut(f).copy_from_slice(row);
    }
    Ok(fine)
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct HarpConfig {
    pub walk: WalkConfig,
    pub sgns: SgnsConfig,
    /// `None` picks [`default_threshold`].
    pub threshold: Option<usize>,
    pub seed: u64,
}

/// Embed the coarsest level from scratch, then prolongate and refine each
/// finer level with half the epochs at half the learning rate.
pub fn harp_embed(graph: &Graph, config: &HarpConfig) -> Result<EmbeddingMatrix> {
    if graph.is_empty() {
        return Err(Error::InsufficientData("graph has no nodes".into()));
    }
    let threshold = config
        .threshold
        .unwrap_or_else(|| default_threshold(graph.node_count()));
    let hierarchy = build_hierarchy(graph, threshold, config.seed)?;
    harp_embed_hierarchy(&hierarchy, config)
}

pub fn harp_embed_hierarchy(hierarchy: &Hierarchy, config: &HarpConfig) -> Result<EmbeddingMatrix> {
    let top = hierarchy.levels.len() - 1;
    let level_seed = |i: usize, salt: u64| derive_seed(config.seed, 1000 + 2 * i as u64 + salt);

    let coarsest = hierarchy.coarsest();
    let walk_cfg = WalkConfig {
        seed: level_seed(top, 0),
        ..config.walk.clone()
    };
    let sgns_cfg = SgnsConfig {
        seed: level_seed(top, 1),
        ..config.sgns.clone()
    };
    let corpus = generate_walks(coarsest, &walk_cfg)?;
    let init = SgnsModel::init(coarsest.node_count(), sgns_cfg.dim, sgns_cfg.seed);
    let mut model = train_sgns_from(&corpus, &sgns_cfg, init)?;

    let refine = SgnsConfig {
        epochs: (config.sgns.epochs / 2).max(1),
        learning_rate: config.sgns.learning_rate / 2.0,
        min_learning_rate: config.sgns.min_learning_rate.min(config.sgns.learning_rate / 2.0),
        ..config.sgns.clone()
    };
    for i in (0..top).rev() {
        let map = &hierarchy.levels[i + 1].fine_to_coarse;
        let graph = &hierarchy.levels[i].graph;
        model = SgnsModel {
            target: prolongate(&model.target, map)?,
            context: prolongate(&model.context, map)?,
        };
        let corpus = generate_walks(
            graph,
            &WalkConfig {
                seed: level_seed(i, 0),
                ..config.walk.clone()
            },
        )?;
        model = train_sgns_from(
            &corpus,
            &SgnsConfig {
                seed: level_seed(i, 1),
                ..refine.clone()
            },
            model,
        )?;
    }
    Ok(model.target)
}
