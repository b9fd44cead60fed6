//! Experiment configuration: `key = value` lines grouped under `[section]`
//! headers. `#` and `;` start comment lines. Unknown sections or keys are
//! errors, so typos surface instead of silently falling back to defaults.
//!
//! ```text
//! [experiment]
//! seed = 7
//! variants = T+HARP, T
//!
//! [data]
//! source = synthetic
//! n_users = 300
//! ```

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use sha2::{Digest, Sha256};

use super::experiment::Variant;
use super::synth::SynthConfig;
use crate::mlp::TrainConfig;
use crate::node2vec::{SgnsConfig, WalkConfig};
use crate::poincare::PoincareConfig;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum DataSource {
    Synthetic(SynthConfig),
    Files {
        posts: PathBuf,
        edges: PathBuf,
        /// Number of artificial groups for attendees without friends; 0 disables.
        lone_groups: usize,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub folds: usize,
    pub variants: Vec<Variant>,
    pub decision_threshold: f64,
    pub data: DataSource,
    pub min_df: usize,
    pub binary_text: bool,
    pub walk: WalkConfig,
    pub sgns: SgnsConfig,
    pub harp_threshold: Option<usize>,
    pub poincare: PoincareConfig,
    pub train: TrainConfig,
    pub hidden_cap: Option<usize>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            seed: 0,
            folds: 4,
            variants: Variant::ALL.to_vec(),
            decision_threshold: 0.5,
            data: DataSource::Synthetic(SynthConfig::default()),
            min_df: 2,
            binary_text: false,
            walk: WalkConfig::default(),
            sgns: SgnsConfig::default(),
            harp_threshold: None,
            poincare: PoincareConfig::default(),
            train: TrainConfig::default(),
            hidden_cap: None,
        }
    }
}

type Sections = BTreeMap<String, BTreeMap<String, (usize, String)>>;

fn parse_sections(text: &str) -> Result<Sections> {
    let mut sections: Sections = BTreeMap::new();
    let mut current: Option<String> = None;
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') || line.starts_with(';') {
            continue;
        }
        let err = |reason: &str| Error::Parse {
            line: i + 1,
            reason: reason.to_string(),
        };
        if let Some(name) = line.strip_prefix('[') {
            let name = name.strip_suffix(']').ok_or_else(|| err("unclosed section header"))?;
            let name = name.trim().to_ascii_lowercase();
            sections.entry(name.clone()).or_default();
            current = Some(name);
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| err("expected `key = value`"))?;
        let section = current.as_ref().ok_or_else(|| err("key outside of a section"))?;
        let key = key.trim().to_ascii_lowercase();
        let entry = sections.get_mut(section).expect("created on header");
        if entry.insert(key.clone(), (i + 1, value.trim().to_string())).is_some() {
            return Err(err(&format!("duplicate key {key:?}")));
        }
    }
    Ok(sections)
}

struct Section<'a> {
    name: &'a str,
    entries: BTreeMap<String, (usize, String)>,
}

impl Section<'_> {
    fn take<T: FromStr>(&mut self, key: &str, target: &mut T) -> Result<()>
    where
        T::Err: std::fmt::Display,
    {
        if let Some((line, value)) = self.entries.remove(key) {
            *target = value.parse().map_err(|e: T::Err| Error::Parse {
                line,
                reason: format!("[{}] {key}: {e}", self.name),
            })?;
        }
        Ok(())
    }

    fn take_opt(&mut self, key: &str, target: &mut Option<usize>) -> Result<()> {
        if let Some((line, value)) = self.entries.remove(key) {
            *target = if value.eq_ignore_ascii_case("none") {
                None
            } else {
                Some(value.parse().map_err(|e| Error::Parse {
                    line,
                    reason: format!("[{}] {key}: {e}", self.name),
                })?)
            };
        }
        Ok(())
    }

    fn take_raw(&mut self, key: &str) -> Option<(usize, String)> {
        self.entries.remove(key)
    }

    fn finish(self) -> Result<()> {
        match self.entries.into_iter().next() {
            Some((key, (line, _))) => Err(Error::Parse {
                line,
                reason: format!("unknown key {key:?} in [{}]", self.name),
            }),
            None => Ok(()),
        }
    }
}

impl ExperimentConfig {
    /// Parse config text; relative data paths resolve against `base_dir`.
    pub fn parse(text: &str, base_dir: &Path) -> Result<Self> {
        let mut sections = parse_sections(text)?;
        let mut cfg = ExperimentConfig::default();
        let mut section = |name: &'static str| Section {
            name,
            entries: sections.remove(name).unwrap_or_default(),
        };

        let mut s = section("experiment");
        s.take("seed", &mut cfg.seed)?;
        s.take("folds", &mut cfg.folds)?;
        s.take("threshold", &mut cfg.decision_threshold)?;
        if let Some((_, v)) = s.take_raw("variants") {
            cfg.variants = v
                .split(',')
                .map(|t| t.trim())
                .filter(|t| !t.is_empty())
                .map(|t| t.parse::<Variant>())
                .collect::<Result<_>>()?;
        }
        s.finish()?;

        let mut s = section("data");
        let source = s
            .take_raw("source")
            .map_or_else(|| "synthetic".to_string(), |(_, v)| v);
        cfg.data = match source.as_str() {
            "synthetic" => {
                let mut synth = SynthConfig {
                    seed: cfg.seed,
                    ..SynthConfig::default()
                };
                s.take("n_users", &mut synth.n_users)?;
                s.take("n_groups", &mut synth.n_groups)?;
                s.take("rho", &mut synth.attend_coherence)?;
                s.take("tau", &mut synth.token_signal)?;
                s.take("vocab_size", &mut synth.vocab_size)?;
                s.take("post_len", &mut synth.post_len)?;
                s.take("posts_per_user", &mut synth.posts_per_user)?;
                s.take("seed", &mut synth.seed)?;
                DataSource::Synthetic(synth)
            }
            "files" => {
                let mut posts = String::new();
                let mut edges = String::new();
                let mut lone_groups = 4usize;
                s.take("posts", &mut posts)?;
                s.take("edges", &mut edges)?;
                s.take("lone_groups", &mut lone_groups)?;
                if posts.is_empty() || edges.is_empty() {
                    return Err(Error::Config("[data] files source needs posts and edges".into()));
                }
                DataSource::Files {
                    posts: base_dir.join(posts),
                    edges: base_dir.join(edges),
                    lone_groups,
                }
            }
            other => return Err(Error::Config(format!("unknown data source {other:?}"))),
        };
        s.finish()?;

        let mut s = section("text");
        s.take("min_df", &mut cfg.min_df)?;
        s.take("binary", &mut cfg.binary_text)?;
        s.finish()?;

        let mut s = section("node2vec");
        s.take("p", &mut cfg.walk.p)?;
        s.take("q", &mut cfg.walk.q)?;
        s.take("walk_length", &mut cfg.walk.walk_length)?;
        s.take("walks_per_node", &mut cfg.walk.walks_per_node)?;
        s.take("dim", &mut cfg.sgns.dim)?;
        s.take("window", &mut cfg.sgns.window)?;
        s.take("negatives", &mut cfg.sgns.negatives)?;
        s.take("epochs", &mut cfg.sgns.epochs)?;
        s.take("learning_rate", &mut cfg.sgns.learning_rate)?;
        s.take("min_learning_rate", &mut cfg.sgns.min_learning_rate)?;
        s.finish()?;

        let mut s = section("harp");
        s.take_opt("threshold", &mut cfg.harp_threshold)?;
        s.finish()?;

        let mut s = section("poincare");
        s.take("dim", &mut cfg.poincare.dim)?;
        s.take("epochs", &mut cfg.poincare.epochs)?;
        s.take("learning_rate", &mut cfg.poincare.learning_rate)?;
        s.take("negatives", &mut cfg.poincare.negatives)?;
        s.take("burn_in_epochs", &mut cfg.poincare.burn_in_epochs)?;
        s.take("burn_in_factor", &mut cfg.poincare.burn_in_factor)?;
        s.take("ball_eps", &mut cfg.poincare.ball_eps)?;
        s.finish()?;

        let mut s = section("mlp");
        s.take("epochs", &mut cfg.train.epochs)?;
        s.take("batch_size", &mut cfg.train.batch_size)?;
        s.take("learning_rate", &mut cfg.train.learning_rate)?;
        s.take_opt("patience", &mut cfg.train.patience)?;
        s.take("holdout_fraction", &mut cfg.train.holdout_fraction)?;
        s.take_opt("hidden_cap", &mut cfg.hidden_cap)?;
        s.finish()?;

        if let Some(name) = sections.keys().next() {
            return Err(Error::Config(format!("unknown section [{name}]")));
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::parse(&text, base)
    }

    pub fn validate(&self) -> Result<()> {
        if self.folds < 2 {
            return Err(Error::Config("folds must be >= 2".into()));
        }
        if self.variants.is_empty() {
            return Err(Error::Config("no variants selected".into()));
        }
        if self.min_df == 0 {
            return Err(Error::Config("min_df must be >= 1".into()));
        }
        if let DataSource::Synthetic(s) = &self.data {
            s.validate()?;
        }
        self.walk.validate()?;
        self.sgns.validate()?;
        self.poincare.validate()?;
        self.train.validate()?;
        Ok(())
    }

    /// Fully expanded config text; parsing it yields an equal config.
    pub fn to_config_string(&self) -> String {
        let mut s = String::new();
        let opt = |v: Option<usize>| v.map_or("none".to_string(), |x| x.to_string());
        let variants: Vec<String> = self.variants.iter().map(|v| v.to_string()).collect();
        let _ = writeln!(s, "[experiment]");
        let _ = writeln!(s, "seed = {}", self.seed);
        let _ = writeln!(s, "folds = {}", self.folds);
        let _ = writeln!(s, "threshold = {}", self.decision_threshold);
        let _ = writeln!(s, "variants = {}", variants.join(", "));
        let _ = writeln!(s, "\n[data]");
        match &self.data {
            DataSource::Synthetic(c) => {
                let _ = writeln!(s, "source = synthetic");
                let _ = writeln!(s, "n_users = {}", c.n_users);
                let _ = writeln!(s, "n_groups = {}", c.n_groups);
                let _ = writeln!(s, "rho = {}", c.attend_coherence);
                let _ = writeln!(s, "tau = {}", c.token_signal);
                let _ = writeln!(s, "vocab_size = {}", c.vocab_size);
                let _ = writeln!(s, "post_len = {}", c.post_len);
                let _ = writeln!(s, "posts_per_user = {}", c.posts_per_user);
                let _ = writeln!(s, "seed = {}", c.seed);
            }
            DataSource::Files {
                posts,
                edges,
                lone_groups,
            } => {
                let _ = writeln!(s, "source = files");
                let _ = writeln!(s, "posts = {}", posts.display());
                let _ = writeln!(s, "edges = {}", edges.display());
                let _ = writeln!(s, "lone_groups = {lone_groups}");
            }
        }
        let _ = writeln!(s, "\n[text]");
        let _ = writeln!(s, "min_df = {}", self.min_df);
        let _ = writeln!(s, "binary = {}", self.binary_text);
        let _ = writeln!(s, "\n[node2vec]");
        let _ = writeln!(s, "p = {}", self.walk.p);
        let _ = writeln!(s, "q = {}", self.walk.q);
        let _ = writeln!(s, "walk_length = {}", self.walk.walk_length);
        let _ = writeln!(s, "walks_per_node = {}", self.walk.walks_per_node);
        let _ = writeln!(s, "dim = {}", self.sgns.dim);
        let _ = writeln!(s, "window = {}", self.sgns.window);
        let _ = writeln!(s, "negatives = {}", self.sgns.negatives);
        let _ = writeln!(s, "epochs = {}", self.sgns.epochs);
        let _ = writeln!(s, "learning_rate = {}", self.sgns.learning_rate);
        let _ = writeln!(s, "min_learning_rate = {}", self.sgns.min_learning_rate);
        let _ = writeln!(s, "\n[harp]");
        let _ = writeln!(s, "threshold = {}", opt(self.harp_threshold));
        let _ = writeln!(s, "\n[poincare]");
        let p = &self.poincare;
        let _ = writeln!(s, "dim = {}", p.dim);
        let _ = writeln!(s, "epochs = {}", p.epochs);
        let _ = writeln!(s, "learning_rate = {}", p.learning_rate);
        let _ = writeln!(s, "negatives = {}", p.negatives);
        let _ = writeln!(s, "burn_in_epochs = {}", p.burn_in_epochs);
        let _ = writeln!(s, "burn_in_factor = {}", p.burn_in_factor);
        let _ = writeln!(s, "ball_eps = {}", p.ball_eps);
        let _ = writeln!(s, "\n[mlp]");
        let t = &self.train;
        let _ = writeln!(s, "epochs = {}", t.epochs);
        let _ = writeln!(s, "batch_size = {}", t.batch_size);
        let _ = writeln!(s, "learning_rate = {}", t.learning_rate);
        let _ = writeln!(s, "patience = {}", opt(t.patience));
        let _ = writeln!(s, "holdout_fraction = {}", t.holdout_fraction);
        let _ = writeln!(s, "hidden_cap = {}", opt(self.hidden_cap));
        s
    }

    /// First 16 hex digits of the SHA-256 of [`Self::to_config_string`].
    pub fn fingerprint(&self) -> String {
        let digest = Sha256::digest(self.to_config_string().as_bytes());
        digest[..8].iter().fold(String::new(), |mut acc, b| {
            let _ = write!(acc, "{b:02x}");
            acc
        })
    }
}
