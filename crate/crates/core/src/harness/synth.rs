//! Synthetic attendance datasets with tunable graph and text signal.
//!
//! Users are split into connected friendship groups. Each group has a
//! majority label; a user takes it with probability `attend_coherence` and
//! the opposite label otherwise. Every post slot draws an "attend" token with
//! probability `token_signal` for attendees and `1 - token_signal` for
//! everyone else, and a background token otherwise. At 0.5 for both knobs the
//! labels carry no information in either view.

use rand::seq::SliceRandom;
use rand::Rng as _;

use super::dataset::{Dataset, LabeledPost, Phase};
use crate::graph::{link_group, split_near_equal, Graph, EXTRA_EDGE_PROB};
use crate::{seeded, Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct SynthConfig {
    pub n_users: usize,
    pub n_groups: usize,
    /// Probability a user follows the group majority label.
    pub attend_coherence: f64,
    /// Probability an attendee's post slot holds an attend token.
    pub token_signal: f64,
    /// Distinct tokens, split evenly between attend and background pools.
    pub vocab_size: usize,
    pub post_len: usize,
    pub posts_per_user: usize,
    pub seed: u64,
}

impl Default for SynthConfig {
    /// Scale of the larger festival graph: 303 users in 14 groups.
    fn default() -> Self {
        SynthConfig {
            n_users: 303,
            n_groups: 14,
            attend_coherence: 0.9,
            token_signal: 0.6,
            vocab_size: 40,
            post_len: 8,
            posts_per_user: 1,
            seed: 0,
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_groups == 0 || self.n_users < self.n_groups {
            return Err(Error::Config("need n_groups >= 1 and n_users >= n_groups".into()));
        }
        for (name, v) in [
            ("attend_coherence", self.attend_coherence),
            ("token_signal", self.token_signal),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::Config(format!("{name} must lie in [0, 1]")));
            }
        }
        if self.vocab_size < 2 || self.post_len == 0 || self.posts_per_user == 0 {
            return Err(Error::Config(
                "vocab_size >= 2, post_len >= 1 and posts_per_user >= 1 required".into(),
            ));
        }
        Ok(())
    }
}

pub fn user_id(i: usize) -> String {
    format!("u{i:04}")
}

pub fn generate_synthetic(config: &SynthConfig) -> Result<Dataset> {
    config.validate()?;
    let mut rng = seeded(config.seed);

    let mut users: Vec<usize> = (0..config.n_users).collect();
    users.shuffle(&mut rng);
    let groups = split_near_equal(&users, config.n_groups);
    let mut edges = Vec::new();
    for g in &groups {
        edges.extend(link_group(g, EXTRA_EDGE_PROB, &mut rng));
    }
    let ids: Vec<String> = (0..config.n_users).map(user_id).collect();
    let graph = Graph::from_named_edges(ids.clone(), &edges)?;

    let mut group_order: Vec<usize> = (0..groups.len()).collect();
    group_order.shuffle(&mut rng);
    let mut majority = vec![0u8; groups.len()];
    for (rank, &g) in group_order.iter().enumerate() {
        majority[g] = u8::from(rank % 2 == 0);
    }

    let mut labels = vec![0u8; config.n_users];
    for (g, members) in groups.iter().enumerate() {
        for &u in members {
            let follow = rng.random_bool(config.attend_coherence);
            labels[u] = if follow { majority[g] } else { 1 - majority[g] };
        }
    }

    let pool = config.vocab_size / 2;
    let attend_pool = pool.max(1);
    let background_pool = (config.vocab_size - pool).max(1);
    let mut posts = Vec::with_capacity(config.n_users * config.posts_per_user);
    for u in 0..config.n_users {
        let p_attend = if labels[u] == 1 {
            config.token_signal
        } else {
            1.0 - config.token_signal
        };
        for _ in 0..config.posts_per_user {
            let words: Vec<String> = (0..config.post_len)
                .map(|_| {
                    if rng.random_bool(p_attend) {
                        format!("fest{}", rng.random_range(0..attend_pool))
                    } else {
                        format!("word{}", rng.random_range(0..background_pool))
                    }
                })
                .collect();
            let phase = if rng.random_bool(0.5) {
                Phase::Before
            } else {
                Phase::During
            };
            posts.push(LabeledPost {
                user_id: ids[u].clone(),
                phase,
                label: labels[u],
                text: words.join(" "),
            });
        }
    }
    Ok(Dataset::new(posts, graph))
}
