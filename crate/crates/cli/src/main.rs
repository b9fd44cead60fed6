use std::collections::HashMap;
use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use eventpred::harness::config::DataSource;
use eventpred::harness::dataset::{read_posts, write_posts, LabeledPost};
use eventpred::harness::experiment::sweep_table;
use eventpred::harness::features::FeatureLayout;
use eventpred::harness::{
    compute_metrics, generate_synthetic, run_experiment, sweep, EmbeddingMethod, ExperimentConfig,
    SynthConfig,
};
use eventpred::mlp::{train, MlpModel};
use eventpred::textfeat::{lemmas, TextVector, Vocabulary};
use eventpred::{EmbeddingMatrix, Graph};

#[derive(Parser)]
#[command(name = "eventpred", version, about = "Event attendance prediction from posts and friendships")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic posts file and edge list.
    Synth(SynthArgs),
    /// Embed the nodes of an edge list, or sweep embedding size and context.
    Embed(EmbedArgs),
    /// Build an n-gram vocabulary from posts and write sparse count vectors.
    Featurize(FeaturizeArgs),
    /// Train the classifier on every post in a file.
    Train(TrainArgs),
    /// Score a trained classifier on a posts file.
    Evaluate(EvaluateArgs),
    /// Cross-validate every configured variant and write the report.
    Pipeline(PipelineArgs),
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long, default_value_t = 303)]
    users: usize,
    #[arg(long, default_value_t = 14)]
    groups: usize,
    /// Probability a user follows the group's majority label.
    #[arg(long, default_value_t = 0.9)]
    rho: f64,
    /// Probability an attendee's post slot carries an attendance token.
    #[arg(long, default_value_t = 0.6)]
    tau: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output directory; receives posts.tsv and edges.txt.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct EmbedArgs {
    #[arg(long, value_parser = parse_method)]
    method: EmbeddingMethod,
    #[arg(long)]
    config: Option<PathBuf>,
    /// Edge list to embed (required unless sweeping).
    #[arg(long)]
    edges: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    dim: Option<usize>,
    /// Grid sweep, e.g. `--sweep d=16,32,64 k=2,4,6`; needs --config for data.
    #[arg(long, num_args = 1..)]
    sweep: Vec<String>,
}

#[derive(Args)]
struct FeaturizeArgs {
    #[arg(long)]
    posts: PathBuf,
    #[arg(long, default_value_t = 2)]
    min_df: usize,
    #[arg(long)]
    binary: bool,
    #[arg(long)]
    vocab_out: PathBuf,
    #[arg(long)]
    vectors_out: PathBuf,
}

#[derive(Args)]
struct FeatureInputs {
    #[arg(long)]
    posts: PathBuf,
    #[arg(long)]
    vocab: PathBuf,
    /// Embedding file keyed by user id; omit for text-only features.
    #[arg(long)]
    embedding: Option<PathBuf>,
    #[arg(long)]
    binary: bool,
}

#[derive(Args)]
struct TrainArgs {
    #[command(flatten)]
    inputs: FeatureInputs,
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct EvaluateArgs {
    #[command(flatten)]
    inputs: FeatureInputs,
    #[arg(long)]
    model: PathBuf,
    #[arg(long, default_value_t = 0.5)]
    threshold: f64,
}

#[derive(Args)]
struct PipelineArgs {
    #[arg(long)]
    config: PathBuf,
    /// Report destination; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Override the config seed.
    #[arg(long)]
    seed: Option<u64>,
}

fn parse_method(s: &str) -> Result<EmbeddingMethod, String> {
    s.parse().map_err(|e: eventpred::Error| e.to_string())
}

fn open(path: &Path) -> Result<BufReader<File>> {
    let f = File::open(path).with_context(|| format!("cannot open {}", path.display()))?;
    Ok(BufReader::new(f))
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    let f = File::create(path).with_context(|| format!("cannot create {}", path.display()))?;
    Ok(BufWriter::new(f))
}

fn output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(create(p)?),
        None => Box::new(io::stdout().lock()),
    })
}

fn load_config(path: Option<&Path>) -> Result<ExperimentConfig> {
    match path {
        Some(p) => ExperimentConfig::from_path(p).with_context(|| format!("config {}", p.display())),
        None => Ok(ExperimentConfig::default()),
    }
}

fn synth(a: SynthArgs) -> Result<()> {
    let ds = generate_synthetic(&SynthConfig {
        n_users: a.users,
        n_groups: a.groups,
        attend_coherence: a.rho,
        token_signal: a.tau,
        seed: a.seed,
        ..SynthConfig::default()
    })?;
    std::fs::create_dir_all(&a.out)?;
    let mut posts = create(&a.out.join("posts.tsv"))?;
    write_posts(&ds.posts, &mut posts)?;
    posts.flush()?;
    let mut edges = create(&a.out.join("edges.txt"))?;
    ds.graph.write_edge_list(&mut edges)?;
    edges.flush()?;
    let positives = ds.posts.iter().filter(|p| p.label == 1).count();
    eprintln!(
        "wrote {} posts ({positives} positive) and {} edges to {}",
        ds.posts.len(),
        ds.graph.edge_count(),
        a.out.display()
    );
    Ok(())
}

fn parse_grid(items: &[String]) -> Result<(Vec<usize>, Vec<usize>)> {
    let (mut dims, mut ks) = (Vec::new(), Vec::new());
    for item in items {
        let (key, values) = item
            .split_once('=')
            .ok_or_else(|| anyhow!("sweep item {item:?} is not key=v1,v2,..."))?;
        let target = match key.trim() {
            "d" => &mut dims,
            "k" => &mut ks,
            other => bail!("unknown sweep axis {other:?}, expected d or k"),
        };
        for v in values.split(',').filter(|v| !v.trim().is_empty()) {
            target.push(v.trim().parse().with_context(|| format!("sweep value {v:?}"))?);
        }
    }
    Ok((dims, ks))
}

fn embed(a: EmbedArgs) -> Result<()> {
    let mut cfg = load_config(a.config.as_deref())?;
    if let Some(seed) = a.seed {
        cfg.seed = seed;
    }
    if let Some(d) = a.dim {
        cfg.sgns.dim = d;
        cfg.poincare.dim = d;
    }
    if !a.sweep.is_empty() {
        if a.config.is_none() {
            bail!("--sweep needs --config to describe the dataset");
        }
        let (dims, ks) = parse_grid(&a.sweep)?;
        let rows = sweep(&cfg, a.method, &dims, &ks)?;
        let mut out = output(a.out.as_deref())?;
        out.write_all(sweep_table(&rows).as_bytes())?;
        out.flush()?;
        return Ok(());
    }
    let edges = a.edges.ok_or_else(|| anyhow!("--edges is required unless --sweep is given"))?;
    let out_path = a.out.ok_or_else(|| anyhow!("--out is required"))?;
    let graph = Graph::load_edge_list(open(&edges)?)
        .with_context(|| format!("edge list {}", edges.display()))?;
    let emb = a.method.embed(&graph, &cfg, cfg.seed)?;
    let mut out = create(&out_path)?;
    emb.write(graph.ext_ids(), &mut out)?;
    out.flush()?;
    eprintln!(
        "{}: {} nodes x {} dims -> {}",
        a.method,
        emb.rows(),
        emb.dim(),
        out_path.display()
    );
    Ok(())
}

fn featurize(a: FeaturizeArgs) -> Result<()> {
    let posts = read_posts(open(&a.posts)?).with_context(|| format!("posts {}", a.posts.display()))?;
    let docs: Vec<Vec<String>> = posts.iter().map(|p| lemmas(&p.text)).collect();
    let vocab = Vocabulary::build(&docs, a.min_df)?;
    let mut v = create(&a.vocab_out)?;
    vocab.write(&mut v)?;
    v.flush()?;
    let mut out = create(&a.vectors_out)?;
    for (p, doc) in posts.iter().zip(&docs) {
        let vec = vocab.vectorize(doc, a.binary);
        let cells: Vec<String> = vec.entries.iter().map(|(i, c)| format!("{i}:{c}")).collect();
        writeln!(out, "{}\t{}\t{}", p.user_id, p.label, cells.join(" "))?;
    }
    out.flush()?;
    eprintln!("{} grams, {} vectors", vocab.len(), posts.len());
    Ok(())
}

struct Features {
    xs: Vec<Vec<f64>>,
    ys: Vec<u8>,
    layout: FeatureLayout,
}

fn load_features(inp: &FeatureInputs) -> Result<Features> {
    let posts: Vec<LabeledPost> =
        read_posts(open(&inp.posts)?).with_context(|| format!("posts {}", inp.posts.display()))?;
    let vocab = Vocabulary::read(open(&inp.vocab)?)
        .with_context(|| format!("vocabulary {}", inp.vocab.display()))?;
    let emb = match &inp.embedding {
        Some(path) => {
            let (ids, m) = EmbeddingMatrix::read(open(path)?)
                .with_context(|| format!("embedding {}", path.display()))?;
            let index: HashMap<String, usize> =
                ids.into_iter().enumerate().map(|(i, id)| (id, i)).collect();
            Some((index, m))
        }
        None => None,
    };
    let layout = FeatureLayout {
        text_len: vocab.len(),
        embedding_len: emb.as_ref().map_or(0, |(_, m)| m.dim()),
    };
    let mut xs = Vec::with_capacity(posts.len());
    for p in &posts {
        let text: TextVector = vocab.vectorize(&lemmas(&p.text), inp.binary);
        let mut x = text.to_dense(vocab.len());
        if let Some((index, m)) = &emb {
            let row = index
                .get(&p.user_id)
                .ok_or_else(|| anyhow!("user {:?} has no embedding row", p.user_id))?;
            x.extend_from_slice(m.row(*row));
        }
        xs.push(x);
    }
    Ok(Features {
        ys: posts.iter().map(|p| p.label).collect(),
        xs,
        layout,
    })
}

fn train_cmd(a: TrainArgs) -> Result<()> {
    let cfg = load_config(a.config.as_deref())?;
    let f = load_features(&a.inputs)?;
    if f.layout.is_empty() {
        bail!("empty feature space: vocabulary has no grams and no embedding given");
    }
    let model = MlpModel::init_capped(f.layout.len(), cfg.hidden_cap, cfg.seed)?;
    let outcome = train(model, &f.xs, &f.ys, &cfg.train)?;
    let fingerprint = format!("{} {}", f.layout.fingerprint(), cfg.fingerprint());
    let mut out = create(&a.out)?;
    outcome.model.save(&fingerprint, &mut out)?;
    out.flush()?;
    eprintln!(
        "trained {} -> {} -> 1 for {} epochs (kept epoch {}), final loss {:.6}",
        outcome.model.n_in(),
        outcome.model.hidden(),
        outcome.epoch_losses.len(),
        outcome.best_epoch,
        outcome.epoch_losses.last().copied().unwrap_or(f64::NAN)
    );
    Ok(())
}

fn evaluate(a: EvaluateArgs) -> Result<()> {
    let (model, fingerprint) = MlpModel::load(open(&a.model)?)
        .with_context(|| format!("model {}", a.model.display()))?;
    let f = load_features(&a.inputs)?;
    let layout = f.layout.fingerprint();
    if fingerprint.split(' ').next() != Some(layout.as_str()) {
        bail!("feature layout {layout} does not match the model's ({fingerprint})");
    }
    let pred = f
        .xs
        .iter()
        .map(|x| model.predict(x, a.threshold))
        .collect::<eventpred::Result<Vec<u8>>>()?;
    let m = compute_metrics(&f.ys, &pred)?;
    println!("accuracy,precision,recall,f1");
    println!("{:.6},{:.6},{:.6},{:.6}", m.accuracy, m.precision, m.recall, m.f1);
    Ok(())
}

fn pipeline(a: PipelineArgs) -> Result<()> {
    let mut cfg = load_config(Some(&a.config))?;
    if let Some(seed) = a.seed {
        cfg.seed = seed;
        if let DataSource::Synthetic(s) = &mut cfg.data {
            s.seed = seed;
        }
    }
    let report = run_experiment(&cfg)?;
    let mut out = output(a.out.as_deref())?;
    out.write_all(report.to_csv().as_bytes())?;
    out.flush()?;
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Synth(a) => synth(a),
        Command::Embed(a) => embed(a),
        Command::Featurize(a) => featurize(a),
        Command::Train(a) => train_cmd(a),
        Command::Evaluate(a) => evaluate(a),
        Command::Pipeline(a) => pipeline(a),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
