use eventpred::embedding::cosine;
use eventpred::harp::{harp_embed, HarpConfig};
use eventpred::node2vec::{node2vec_embed, train_sgns, SgnsConfig, WalkConfig};
use eventpred::poincare::{poincare_distance, train_poincare, PoincareConfig, DEFAULT_BALL_EPS};
use eventpred::{seeded, EmbeddingMatrix, Graph};
use rand::Rng as _;

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

#[test]
fn cooccurring_nodes_end_up_closer() {
    // 0 and 1 always appear together, 0 and 2 never do
    let mut corpus = Vec::new();
    for _ in 0..200 {
        corpus.push(vec![0, 1, 4, 0, 1, 4, 0, 1]);
        corpus.push(vec![2, 3, 5, 2, 3, 5, 2, 3]);
    }
    for seed in 0..5 {
        let cfg = SgnsConfig {
            dim: 16,
            window: 2,
            seed,
            ..SgnsConfig::default()
        };
        let emb = train_sgns(&corpus, &cfg, 6).unwrap();
        assert!(
            emb.cosine(0, 1) > emb.cosine(0, 2),
            "seed {seed}: {} vs {}",
            emb.cosine(0, 1),
            emb.cosine(0, 2)
        );
    }
}

fn planted_partition(seed: u64) -> Graph {
    let mut rng = seeded(seed);
    let mut edges = Vec::new();
    for u in 0..40 {
        for v in u + 1..40 {
            let p = if (u < 20) == (v < 20) { 0.5 } else { 0.02 };
            if rng.random_bool(p) {
                edges.push((u, v));
            }
        }
    }
    Graph::from_edges(40, &edges).unwrap()
}

fn block_cosines(emb: &EmbeddingMatrix) -> (f64, f64) {
    let (mut intra, mut inter) = (Vec::new(), Vec::new());
    for u in 0..40 {
        for v in u + 1..40 {
            let c = cosine(emb.row(u), emb.row(v));
            if (u < 20) == (v < 20) {
                intra.push(c);
            } else {
                inter.push(c);
            }
        }
    }
    (mean(&intra), mean(&inter))
}

#[test]
fn harp_separates_planted_blocks() {
    for seed in 0..5 {
        let g = planted_partition(seed);
        let cfg = HarpConfig {
            walk: WalkConfig {
                walk_length: 40,
                ..WalkConfig::default()
            },
            sgns: SgnsConfig {
                dim: 32,
                ..SgnsConfig::default()
            },
            threshold: Some(10),
            seed,
        };
        let emb = harp_embed(&g, &cfg).unwrap();
        let (intra, inter) = block_cosines(&emb);
        assert!(intra > inter, "seed {seed}: intra {intra} inter {inter}");
    }
}

#[test]
fn node2vec_is_bit_reproducible() {
    let g = planted_partition(3);
    let walk = WalkConfig {
        walk_length: 20,
        walks_per_node: 3,
        seed: 8,
        ..WalkConfig::default()
    };
    let sgns = SgnsConfig {
        dim: 8,
        epochs: 2,
        seed: 9,
        ..SgnsConfig::default()
    };
    let a = node2vec_embed(&g, &walk, &sgns).unwrap();
    let b = node2vec_embed(&g, &walk, &sgns).unwrap();
    assert_eq!(a, b);
    assert!(a.is_finite());
    assert_eq!(a.rows(), g.node_count());
}

fn binary_tree() -> Graph {
    let edges: Vec<(usize, usize)> = (1..15).map(|c| ((c - 1) / 2, c)).collect();
    Graph::from_edges(15, &edges).unwrap()
}

fn subtree_root(mut v: usize) -> Option<usize> {
    if v == 0 {
        return None;
    }
    while v > 2 {
        v = (v - 1) / 2;
    }
    Some(v)
}

fn tree_config(seed: u64) -> PoincareConfig {
    PoincareConfig {
        dim: 5,
        epochs: 100,
        learning_rate: 0.3,
        negatives: 5,
        seed,
        ..PoincareConfig::default()
    }
}

#[test]
fn poincare_tree_siblings_are_close() {
    let g = binary_tree();
    for seed in 0..5 {
        let model = train_poincare(&g, &tree_config(seed)).unwrap();
        let e = &model.embedding;
        let d = |a: usize, b: usize| poincare_distance(e.row(a), e.row(b)).unwrap();
        let siblings: Vec<f64> = (0..7).map(|p| d(2 * p + 1, 2 * p + 2)).collect();
        let mut cross = Vec::new();
        for a in 1..15 {
            for b in a + 1..15 {
                if subtree_root(a) != subtree_root(b) {
                    cross.push(d(a, b));
                }
            }
        }
        assert!(
            mean(&siblings) < mean(&cross),
            "seed {seed}: siblings {} cross {}",
            mean(&siblings),
            mean(&cross)
        );
    }
}

#[test]
fn poincare_smoothed_loss_decreases_and_rows_stay_inside() {
    let g = binary_tree();
    for seed in 0..3 {
        let model = train_poincare(&g, &tree_config(seed)).unwrap();
        let l = &model.epoch_losses;
        assert_eq!(l.len(), 100);
        let first = mean(&l[..10]);
        let last = mean(&l[l.len() - 10..]);
        assert!(last < first, "seed {seed}: {first} -> {last}");
        for i in 0..15 {
            let r = model.embedding.row(i);
            assert!(r.iter().map(|x| x * x).sum::<f64>().sqrt() < 1.0 - DEFAULT_BALL_EPS);
        }
    }
}
