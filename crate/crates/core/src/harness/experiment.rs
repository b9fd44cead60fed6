//! Cross-validated comparison of classifier variants.

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};
use std::str::FromStr;

use super::config::{DataSource, ExperimentConfig};
use super::cv::{complement, stratified_kfold};
use super::dataset::{read_posts, Dataset};
use super::features::{concat_features, FeatureLayout};
use super::metrics::{compute_metrics, Metrics};
use super::synth::generate_synthetic;
use crate::embedding::EmbeddingMatrix;
use crate::graph::Graph;
use crate::harp::{harp_embed, HarpConfig};
use crate::mlp::{train, MlpModel, TrainConfig};
use crate::node2vec::{node2vec_embed, SgnsConfig, WalkConfig};
use crate::poincare::train_poincare;
use crate::textfeat::{lemmas, TextVector, Vocabulary};
use crate::{derive_seed, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum EmbeddingMethod {
    Node2vec,
    Harp,
    Poincare,
}

impl EmbeddingMethod {
    pub const ALL: [EmbeddingMethod; 3] = [
        EmbeddingMethod::Node2vec,
        EmbeddingMethod::Harp,
        EmbeddingMethod::Poincare,
    ];

    fn stream(self) -> u64 {
        match self {
            EmbeddingMethod::Node2vec => 1,
            EmbeddingMethod::Harp => 2,
            EmbeddingMethod::Poincare => 3,
        }
    }

    /// Train this embedding on `graph`, with every seed derived from `seed`.
    pub fn embed(self, graph: &Graph, config: &ExperimentConfig, seed: u64) -> Result<EmbeddingMatrix> {
        let s = derive_seed(seed, self.stream());
        let walk = WalkConfig {
            seed: derive_seed(s, 1),
            ..config.walk.clone()
        };
        let sgns = SgnsConfig {
            seed: derive_seed(s, 2),
            ..config.sgns.clone()
        };
        match self {
            EmbeddingMethod::Node2vec => node2vec_embed(graph, &walk, &sgns),
            EmbeddingMethod::Harp => harp_embed(
                graph,
                &HarpConfig {
                    walk,
                    sgns,
                    threshold: config.harp_threshold,
                    seed: derive_seed(s, 3),
                },
            ),
            EmbeddingMethod::Poincare => {
                let cfg = crate::poincare::PoincareConfig {
                    seed: derive_seed(s, 4),
                    ..config.poincare.clone()
                };
                Ok(train_poincare(graph, &cfg)?.embedding)
            }
        }
    }
}

impl fmt::Display for EmbeddingMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EmbeddingMethod::Node2vec => "node2vec",
            EmbeddingMethod::Harp => "harp",
            EmbeddingMethod::Poincare => "poincare",
        })
    }
}

impl FromStr for EmbeddingMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "node2vec" | "n2v" => Ok(EmbeddingMethod::Node2vec),
            "harp" => Ok(EmbeddingMethod::Harp),
            "poincare" | "poincaré" => Ok(EmbeddingMethod::Poincare),
            _ => Err(Error::Config(format!("unknown embedding method {s:?}"))),
        }
    }
}

/// Which features feed the classifier.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Variant {
    TextHarp,
    TextNode2vec,
    TextPoincare,
    Text,
    Harp,
}

impl Variant {
    pub const ALL: [Variant; 5] = [
        Variant::TextHarp,
        Variant::TextNode2vec,
        Variant::TextPoincare,
        Variant::Text,
        Variant::Harp,
    ];

    pub fn uses_text(self) -> bool {
        !matches!(self, Variant::Harp)
    }

    pub fn embedding(self) -> Option<EmbeddingMethod> {
        match self {
            Variant::TextHarp | Variant::Harp => Some(EmbeddingMethod::Harp),
            Variant::TextNode2vec => Some(EmbeddingMethod::Node2vec),
            Variant::TextPoincare => Some(EmbeddingMethod::Poincare),
            Variant::Text => None,
        }
    }

    fn index(self) -> u64 {
        Variant::ALL.iter().position(|&v| v == self).expect("listed") as u64
    }

    pub fn with_embedding(method: EmbeddingMethod) -> Variant {
        match method {
            EmbeddingMethod::Node2vec => Variant::TextNode2vec,
            EmbeddingMethod::Harp => Variant::TextHarp,
            EmbeddingMethod::Poincare => Variant::TextPoincare,
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Variant::TextHarp => "T+HARP",
            Variant::TextNode2vec => "T+N2V",
            Variant::TextPoincare => "T+Poincare",
            Variant::Text => "T",
            Variant::Harp => "HARP",
        })
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key: String = s
            .chars()
            .filter(|c| !c.is_whitespace())
            .collect::<String>()
            .to_ascii_lowercase()
            .replace('⊕', "+");
        match key.as_str() {
            "t+harp" => Ok(Variant::TextHarp),
            "t+n2v" | "t+node2vec" => Ok(Variant::TextNode2vec),
            "t+poincare" | "t+poincaré" => Ok(Variant::TextPoincare),
            "t" | "text" => Ok(Variant::Text),
            "harp" => Ok(Variant::Harp),
            _ => Err(Error::UnknownVariant(s.to_string())),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VariantResult {
    pub variant: Variant,
    pub folds: Vec<Metrics>,
    pub mean: Metrics,
    pub input_size: Vec<usize>,
    pub hidden_size: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub fingerprint: String,
    pub seed: u64,
    pub folds: usize,
    pub samples: usize,
    pub positives: usize,
    pub hidden_cap: Option<usize>,
    pub embedding_dims: BTreeMap<EmbeddingMethod, usize>,
    pub results: Vec<VariantResult>,
}

impl EvalReport {
    pub fn result(&self, variant: Variant) -> Option<&VariantResult> {
        self.results.iter().find(|r| r.variant == variant)
    }

    pub fn mean_accuracy(&self, variant: Variant) -> Option<f64> {
        self.result(variant).map(|r| r.mean.accuracy)
    }

    /// Accuracy of always predicting the more frequent class.
    pub fn majority_baseline(&self) -> f64 {
        let pos = self.positives as f64 / self.samples.max(1) as f64;
        pos.max(1.0 - pos)
    }

    /// CSV table `variant,fold,accuracy,precision,recall,f1` followed by a
    /// `#`-prefixed summary block.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("variant,fold,accuracy,precision,recall,f1\n");
        let row = |s: &mut String, v: &Variant, fold: &str, m: &Metrics| {
            let _ = writeln!(
                s,
                "{v},{fold},{:.6},{:.6},{:.6},{:.6}",
                m.accuracy, m.precision, m.recall, m.f1
            );
        };
        for r in &self.results {
            for (i, m) in r.folds.iter().enumerate() {
                row(&mut s, &r.variant, &i.to_string(), m);
            }
            row(&mut s, &r.variant, "mean", &r.mean);
        }
        let _ = writeln!(s, "\n# summary");
        let _ = writeln!(s, "# config_fingerprint = {}", self.fingerprint);
        let _ = writeln!(s, "# seed = {}", self.seed);
        let _ = writeln!(s, "# folds = {} (stratified)", self.folds);
        let _ = writeln!(s, "# samples = {} ({} positive)", self.samples, self.positives);
        let _ = writeln!(s, "# majority_baseline = {:.6}", self.majority_baseline());
        let _ = writeln!(
            s,
            "# embeddings = trained once on the full graph, no labels used"
        );
        for (m, d) in &self.embedding_dims {
            let _ = writeln!(s, "# embedding.{m}.dim = {d}");
        }
        let _ = writeln!(
            s,
            "# hidden_cap = {}",
            self.hidden_cap.map_or("none (mean rule)".to_string(), |c| c.to_string())
        );
        for r in &self.results {
            let capped = r
                .input_size
                .iter()
                .zip(&r.hidden_size)
                .any(|(&n, &h)| h < crate::mlp::hidden_size(n));
            let _ = writeln!(
                s,
                "# {}: mean accuracy {:.6}, inputs {:?}, hidden {:?}{}",
                r.variant,
                r.mean.accuracy,
                r.input_size,
                r.hidden_size,
                if capped { " (capped)" } else { "" }
            );
        }
        s
    }
}

/// Load or generate the configured dataset.
pub fn load_dataset(config: &ExperimentConfig) -> Result<Dataset> {
    match &config.data {
        DataSource::Synthetic(s) => generate_synthetic(s),
        DataSource::Files {
            posts,
            edges,
            lone_groups,
        } => {
            let posts = read_posts(std::io::BufReader::new(std::fs::File::open(posts)?))?;
            let graph = Graph::load_edge_list(std::io::BufReader::new(std::fs::File::open(edges)?))?;
            let ds = Dataset::new(posts, graph);
            if *lone_groups > 0 {
                ds.group_lone_attendees(*lone_groups, derive_seed(config.seed, 7))
            } else {
                Ok(ds)
            }
        }
    }
}

/// Train every embedding the configured variants need.
pub fn embed_all(
    dataset: &Dataset,
    config: &ExperimentConfig,
) -> Result<BTreeMap<EmbeddingMethod, EmbeddingMatrix>> {
    let mut out = BTreeMap::new();
    for v in &config.variants {
        if let Some(m) = v.embedding() {
            if let std::collections::btree_map::Entry::Vacant(slot) = out.entry(m) {
                slot.insert(m.embed(&dataset.graph, config, config.seed)?);
            }
        }
    }
    Ok(out)
}

/// Cross-validate every configured variant.
pub fn run_experiment(config: &ExperimentConfig) -> Result<EvalReport> {
    config.validate()?;
    let dataset = load_dataset(config)?;
    let embeddings = embed_all(&dataset, config)?;
    evaluate_dataset(&dataset, &embeddings, config)
}

/// Cross-validation on an already loaded dataset with precomputed embeddings.
pub fn evaluate_dataset(
    dataset: &Dataset,
    embeddings: &BTreeMap<EmbeddingMethod, EmbeddingMatrix>,
    config: &ExperimentConfig,
) -> Result<EvalReport> {
    let labels = dataset.labels();
    let nodes = dataset.post_nodes()?;
    let docs: Vec<Vec<String>> = dataset.posts.iter().map(|p| lemmas(&p.text)).collect();
    let folds = stratified_kfold(&labels, config.folds, derive_seed(config.seed, 5))?;

    let mut results = Vec::new();
    for &variant in &config.variants {
        let emb = match variant.embedding() {
            Some(m) => Some(embeddings.get(&m).ok_or_else(|| {
                Error::Config(format!("missing {m} embedding for {variant}"))
            })?),
            None => None,
        };
        let mut fold_metrics = Vec::new();
        let mut input_size = Vec::new();
        let mut hidden_size = Vec::new();
        for (f, test) in folds.iter().enumerate() {
            let train_idx = complement(labels.len(), test);
            let vocab = if variant.uses_text() {
                let train_docs: Vec<&[String]> =
                    train_idx.iter().map(|&i| docs[i].as_slice()).collect();
                Vocabulary::build(&train_docs, config.min_df)?
            } else {
                Vocabulary::default()
            };
            let layout = FeatureLayout {
                text_len: vocab.len(),
                embedding_len: emb.map_or(0, EmbeddingMatrix::dim),
            };
            if layout.is_empty() {
                return Err(Error::InsufficientData(format!(
                    "{variant} fold {f}: empty feature space"
                )));
            }
            let features = |i: usize| -> Result<Vec<f64>> {
                let text = if variant.uses_text() {
                    vocab.vectorize(&docs[i], config.binary_text)
                } else {
                    TextVector::default()
                };
                match emb {
                    Some(e) => concat_features(&text, vocab.len(), e, nodes[i]),
                    None => Ok(text.to_dense(vocab.len())),
                }
            };
            let xs: Vec<Vec<f64>> = train_idx.iter().map(|&i| features(i)).collect::<Result<_>>()?;
            let ys: Vec<u8> = train_idx.iter().map(|&i| labels[i]).collect();

            let run_seed = derive_seed(config.seed, 100 + 16 * variant.index() + f as u64);
            let model = MlpModel::init_capped(layout.len(), config.hidden_cap, run_seed)?;
            input_size.push(model.n_in());
            hidden_size.push(model.hidden());
            let outcome = train(
                model,
                &xs,
                &ys,
                &TrainConfig {
                    seed: derive_seed(run_seed, 1),
                    ..config.train.clone()
                },
            )?;
            let mut truth = Vec::with_capacity(test.len());
            let mut pred = Vec::with_capacity(test.len());
            for &i in test {
                truth.push(labels[i]);
                pred.push(outcome.model.predict(&features(i)?, config.decision_threshold)?);
            }
            fold_metrics.push(compute_metrics(&truth, &pred)?);
        }
        results.push(VariantResult {
            variant,
            mean: Metrics::mean(&fold_metrics),
            folds: fold_metrics,
            input_size,
            hidden_size,
        });
    }

    Ok(EvalReport {
        fingerprint: config.fingerprint(),
        seed: config.seed,
        folds: config.folds,
        samples: labels.len(),
        positives: labels.iter().filter(|&&l| l == 1).count(),
        hidden_cap: config.hidden_cap,
        embedding_dims: embeddings.iter().map(|(m, e)| (*m, e.dim())).collect(),
        results,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub param: &'static str,
    pub value: usize,
    pub accuracy: f64,
}

/// One-axis-at-a-time sweep of embedding size `d` and context size `k` for
/// the text + `method` variant. For Poincaré, `k` is the negative-sample count.
pub fn sweep(
    config: &ExperimentConfig,
    method: EmbeddingMethod,
    dims: &[usize],
    contexts: &[usize],
) -> Result<Vec<SweepRow>> {
    let dataset = load_dataset(config)?;
    let base = ExperimentConfig {
        variants: vec![Variant::with_embedding(method)],
        ..config.clone()
    };
    let mut rows = Vec::new();
    let mut run = |cfg: ExperimentConfig, param: &'static str, value: usize| -> Result<()> {
        cfg.validate()?;
        let emb = embed_all(&dataset, &cfg)?;
        let report = evaluate_dataset(&dataset, &emb, &cfg)?;
        rows.push(SweepRow {
            param,
            value,
            accuracy: report.results[0].mean.accuracy,
        });
        Ok(())
    };
    for &d in dims {
        let mut cfg = base.clone();
        cfg.sgns.dim = d;
        cfg.poincare.dim = d;
        run(cfg, "d", d)?;
    }
    for &k in contexts {
        let mut cfg = base.clone();
        match method {
            EmbeddingMethod::Poincare => cfg.poincare.negatives = k,
            _ => cfg.sgns.window = k,
        }
        run(cfg, "k", k)?;
    }
    Ok(rows)
}

pub fn sweep_table(rows: &[SweepRow]) -> String {
    let mut s = String::from("param,value,accuracy\n");
    for r in rows {
        let _ = writeln!(s, "{},{},{:.6}", r.param, r.value, r.accuracy);
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn variant_names() {
        for v in Variant::ALL {
            assert_eq!(v.to_string().parse::<Variant>().unwrap(), v);
        }
        assert_eq!("T ⊕ HARP".parse::<Variant>().unwrap(), Variant::TextHarp);
        assert!(matches!("GBDT".parse::<Variant>(), Err(Error::UnknownVariant(_))));
        assert_eq!("Node2Vec".parse::<EmbeddingMethod>().unwrap(), EmbeddingMethod::Node2vec);
    }

    #[test]
    fn default_variants_are_the_five_neural_rows() {
        let names: Vec<String> = ExperimentConfig::default()
            .variants
            .iter()
            .map(ToString::to_string)
            .collect();
        assert_eq!(names, ["T+HARP", "T+N2V", "T+Poincare", "T", "HARP"]);
    }
}
