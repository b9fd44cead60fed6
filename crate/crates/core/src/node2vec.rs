//! Second-order biased random walks and skip-gram with negative sampling.

use rand::seq::{IndexedRandom, SliceRandom};
use rand::Rng as _;

use crate::alias::AliasTable;
use crate::embedding::{dot, EmbeddingMatrix};
use crate::graph::Graph;
use crate::{seeded, sigmoid, Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct WalkConfig {
    /// Return parameter.
    pub p: f64,
    /// In-out parameter.
    pub q: f64,
    /// Number of nodes per walk, start included.
    pub walk_length: usize,
    pub walks_per_node: usize,
    pub seed: u64,
}

impl Default for WalkConfig {
    fn default() -> Self {
        WalkConfig {
            p: 1.0,
            q: 1.0,
            walk_length: 80,
            walks_per_node: 10,
            seed: 0,
        }
    }
}

impl WalkConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.p > 0.0 && self.q > 0.0) {
            return Err(Error::Config("p and q must be > 0".into()));
        }
        if self.walk_length == 0 || self.walks_per_node == 0 {
            return Err(Error::Config(
                "walk_length and walks_per_node must be >= 1".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SgnsConfig {
    pub dim: usize,
    /// Window radius: pairs up to `window` positions away on either side.
    pub window: usize,
    pub negatives: usize,
    pub epochs: usize,
    pub learning_rate: f64,
    pub min_learning_rate: f64,
    pub seed: u64,
}

impl Default for SgnsConfig {
    fn default() -> Self {
        SgnsConfig {
            dim: 128,
            window: 4,
            negatives: 5,
            epochs: 5,
            learning_rate: 0.025,
            min_learning_rate: 0.0001,
            seed: 0,
        }
    }
}

impl SgnsConfig {
    pub fn validate(&self) -> Result<()> {
        if self.dim == 0 || self.window == 0 || self.negatives == 0 || self.epochs == 0 {
            return Err(Error::Config(
                "dim, window, negatives and epochs must be >= 1".into(),
            ));
        }
        if self.learning_rate.is_nan() || self.learning_rate <= 0.0 || self.min_learning_rate < 0.0 {
            return Err(Error::Config("learning rates must be positive".into()));
        }
        Ok(())
    }
}

/// Unnormalized second-order bias for stepping `prev -> current -> candidate`.
pub fn transition_weight(
    prev: usize,
    current: usize,
    candidate: usize,
    graph: &Graph,
    p: f64,
    q: f64,
) -> Result<f64> {
    if !graph.neighbors(current)?.contains(&candidate) {
        return Err(Error::NotANeighbor {
            current,
            candidate,
        });
    }
    Ok(if candidate == prev {
        1.0 / p
    } else if graph.has_edge(prev, candidate) {
        1.0
    } else {
        1.0 / q
    })
}

/// Random walker with precomputed alias tables for every directed edge.
#[derive(Debug, Clone)]
pub struct Walker<'g> {
    graph: &'g Graph,
    // tables[v][i]: next-step table at v when arriving from adj(v)[i]
    tables: Vec<Vec<AliasTable>>,
}

impl<'g> Walker<'g> {
    pub fn new(graph: &'g Graph, p: f64, q: f64) -> Result<Self> {
        let mut tables = Vec::with_capacity(graph.node_count());
        for v in 0..graph.node_count() {
            let adj = graph.adj(v);
            let mut per_prev = Vec::with_capacity(adj.len());
            for &t in adj {
                let weights = adj
                    .iter()
                    .map(|&x| transition_weight(t, v, x, graph, p, q))
                    .collect::<Result<Vec<_>>>()?;
                per_prev.push(AliasTable::new(&weights)?);
            }
            tables.push(per_prev);
        }
        Ok(Walker { graph, tables })
    }

    /// One biased step from `current`, having arrived from `prev`.
    pub fn step(&self, prev: usize, current: usize, rng: &mut crate::Rng) -> usize {
        let adj = self.graph.adj(current);
        let i = adj
            .binary_search(&prev)
            .expect("prev must be adjacent to current");
        adj[self.tables[current][i].sample(rng)]
    }

    pub fn walk(&self, start: usize, length: usize, rng: &mut crate::Rng) -> Vec<usize> {
        let mut walk = Vec::with_capacity(length);
        walk.push(start);
        if length < 2 {
            return walk;
        }
        let Some(&first) = self.graph.adj(start).choose(rng) else {
            return walk;
        };
        walk.push(first);
        while walk.len() < length {
            let n = walk.len();
            let next = self.step(walk[n - 2], walk[n - 1], rng);
            walk.push(next);
        }
        walk
    }
}

/// `walks_per_node` walks from every node; node order is reshuffled each round.
pub fn generate_walks(graph: &Graph, config: &WalkConfig) -> Result<Vec<Vec<usize>>> {
    config.validate()?;
    if graph.is_empty() {
        return Err(Error::InsufficientData("graph has no nodes".into()));
    }
    let walker = Walker::new(graph, config.p, config.q)?;
    let mut rng = seeded(config.seed);
    let mut order: Vec<usize> = (0..graph.node_count()).collect();
    let mut corpus = Vec::with_capacity(order.len() * config.walks_per_node);
    for _ in 0..config.walks_per_node {
        order.shuffle(&mut rng);
        for &start in &order {
            corpus.push(walker.walk(start, config.walk_length, &mut rng));
        }
    }
    Ok(corpus)
}

/// Target ("input") vectors plus the context vectors used only while training.
#[derive(Debug, Clone, PartialEq)]
pub struct SgnsModel {
    pub target: EmbeddingMatrix,
    pub context: EmbeddingMatrix,
}

impl SgnsModel {
    /// Targets uniform in `[-0.5/d, 0.5/d]`, contexts zero.
    pub fn init(node_count: usize, dim: usize, seed: u64) -> Self {
        let mut rng = seeded(seed);
        let half = 0.5 / dim as f64;
        let data = (0..node_count * dim)
            .map(|_| rng.random_range(-half..=half))
            .collect();
        SgnsModel {
            target: EmbeddingMatrix::from_vec(node_count, dim, data).expect("shape"),
            context: EmbeddingMatrix::zeros(node_count, dim),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SgnsGradient {
    pub loss: f64,
    /// Gradient with respect to the center's target row.
    pub target: Vec<f64>,
    /// Gradients for each distinct touched context row, in first-touch order.
    pub context: Vec<(usize, Vec<f64>)>,
}

/// Loss `-log s(u.c) - sum_n log s(-u.n)` and its analytic gradient.
pub fn sgns_objective(
    center: usize,
    context: usize,
    negatives: &[usize],
    model: &SgnsModel,
) -> SgnsGradient {
    let u = model.target.row(center);
    let d = u.len();
    let mut grad_target = vec![0.0; d];
    let mut ctx_grads: Vec<(usize, Vec<f64>)> = Vec::new();
    let mut loss = 0.0;

    let terms = std::iter::once((context, 1.0)).chain(negatives.iter().map(|&n| (n, 0.0)));
    for (row, label) in terms {
        let c = model.context.row(row);
        let s = dot(u, c);
        // d loss / d s = sigmoid(s) - label
        let g = sigmoid(s) - label;
        loss -= if label == 1.0 {
            log_sigmoid(s)
        } else {
            log_sigmoid(-s)
        };
        for (gt, &ci) in grad_target.iter_mut().zip(c) {
            *gt += g * ci;
        }
        let slot = match ctx_grads.iter().position(|(r, _)| *r == row) {
            Some(i) => i,
            None => {
                ctx_grads.push((row, vec![0.0; d]));
                ctx_grads.len() - 1
            }
        };
        for (gc, &ui) in ctx_grads[slot].1.iter_mut().zip(u) {
            *gc += g * ui;
        }
    }
    SgnsGradient {
        loss,
        target: grad_target,
        context: ctx_grads,
    }
}

fn log_sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        -(-x).exp().ln_1p()
    } else {
        x - x.exp().ln_1p()
    }
}

/// In-place SGD step equal to applying [`sgns_objective`]'s gradient with rate `lr`.
/// `scratch` must have length `dim`.
fn sgns_step(
    model: &mut SgnsModel,
    center: usize,
    context: usize,
    negatives: &[usize],
    lr: f64,
    scratch: &mut [f64],
    scores: &mut Vec<f64>,
) {
    let dim = model.target.dim();
    scratch.fill(0.0);
    scores.clear();
    {
        let u = model.target.row(center);
        let terms = std::iter::once((context, 1.0)).chain(negatives.iter().map(|&n| (n, 0.0)));
        for (row, label) in terms {
            let c = model.context.row(row);
            let g = sigmoid(dot(u, c)) - label;
            scores.push(g);
            for (acc, &ci) in scratch.iter_mut().zip(c) {
                *acc += g * ci;
            }
        }
    }
    // contexts move using the pre-step target row
    let (target, ctx) = (&model.target, &mut model.context);
    let u = &target.as_slice()[center * dim..(center + 1) * dim];
    let rows = std::iter::once(context).chain(negatives.iter().copied());
    for (row, &g) in rows.zip(scores.iter()) {
        for (ci, &ui) in ctx.row_mut(row).iter_mut().zip(u) {
            *ci -= lr * g * ui;
        }
    }
    for (ui, &gi) in model.target.row_mut(center).iter_mut().zip(scratch.iter()) {
        *ui -= lr * gi;
    }
}

fn count_pairs(corpus: &[Vec<usize>], window: usize) -> u64 {
    corpus
        .iter()
        .map(|w| {
            (0..w.len())
                .map(|i| (i.min(window) + (w.len() - 1 - i).min(window)) as u64)
                .sum::<u64>()
        })
        .sum()
}

/// Train SGNS on a walk corpus from a fresh initialization.
pub fn train_sgns(
    corpus: &[Vec<usize>],
    config: &SgnsConfig,
    node_count: usize,
) -> Result<EmbeddingMatrix> {
    let init = SgnsModel::init(node_count, config.dim, config.seed);
    Ok(train_sgns_from(corpus, config, init)?.target)
}

/// Continue SGNS training from an existing model (used for hierarchical refinement).
pub fn train_sgns_from(
    corpus: &[Vec<usize>],
    config: &SgnsConfig,
    mut model: SgnsModel,
) -> Result<SgnsModel> {
    config.validate()?;
    let node_count = model.target.rows();
    if model.target.dim() != config.dim || model.context.dim() != config.dim {
        return Err(Error::DimensionMismatch {
            expected: config.dim,
            got: model.target.dim(),
        });
    }
    if corpus.is_empty() {
        return Err(Error::InsufficientData("empty walk corpus".into()));
    }
    let mut freq = vec![0.0f64; node_count];
    for &node in corpus.iter().flatten() {
        if node >= node_count {
            return Err(Error::NodeOutOfRange { node, node_count });
        }
        freq[node] += 1.0;
    }
    let noise_weights: Vec<f64> = freq.iter().map(|f| f.powf(0.75)).collect();
    let noise = AliasTable::new(&noise_weights)?;

    let total = count_pairs(corpus, config.window) * config.epochs as u64;
    let mut rng = seeded(config.seed ^ 0x5EED_5A17);
    let mut done = 0u64;
    let mut scratch = vec![0.0; config.dim];
    let mut scores = Vec::with_capacity(config.negatives + 1);
    let mut negs = Vec::with_capacity(config.negatives);
    let span = config.learning_rate - config.min_learning_rate;

    for _ in 0..config.epochs {
        for walk in corpus {
            for (i, &center) in walk.iter().enumerate() {
                let lo = i.saturating_sub(config.window);
                let hi = (i + config.window).min(walk.len() - 1);
                for j in (lo..=hi).filter(|&j| j != i) {
                    let progress = done as f64 / total as f64;
                    let lr = (config.learning_rate - span * progress).max(config.min_learning_rate);
                    let ctx = walk[j];
                    negs.clear();
                    for _ in 0..config.negatives {
                        let n = noise.sample(&mut rng);
                        if n != ctx {
                            negs.push(n);
                        }
                    }
                    sgns_step(&mut model, center, ctx, &negs, lr, &mut scratch, &mut scores);
                    done += 1;
                }
            }
        }
    }
    if !model.target.is_finite() {
        return Err(Error::Config("training diverged (non-finite embedding)".into()));
    }
    Ok(model)
}

/// Walks followed by SGNS: the full node2vec pipeline.
pub fn node2vec_embed(
    graph: &Graph,
    walk: &WalkConfig,
    sgns: &SgnsConfig,
) -> Result<EmbeddingMatrix> {
    let corpus = generate_walks(graph, walk)?;
    train_sgns(&corpus, sgns, graph.node_count())
}
