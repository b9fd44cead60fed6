//! Labeled posts plus the social graph they live on.
//!
//! Posts file: one `user_id<TAB>phase<TAB>label<TAB>text` line per post, with
//! `phase` one of `before`/`during` and `label` one of `0`/`1`.

use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;

use crate::graph::{make_artificial_groups, Graph};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Phase {
    Before,
    During,
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Phase::Before => "before",
            Phase::During => "during",
        })
    }
}

impl FromStr for Phase {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "before" => Ok(Phase::Before),
            "during" => Ok(Phase::During),
            other => Err(Error::Config(format!("unknown phase {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabeledPost {
    pub user_id: String,
    pub phase: Phase,
    pub label: u8,
    pub text: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct PhaseStats {
    pub labeled: usize,
    pub positive: usize,
}

impl PhaseStats {
    pub fn negative(&self) -> usize {
        self.labeled - self.positive
    }

    pub fn positive_share(&self) -> f64 {
        if self.labeled == 0 {
            0.0
        } else {
            self.positive as f64 / self.labeled as f64
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub posts: Vec<LabeledPost>,
    pub graph: Graph,
}

impl Dataset {
    /// Pair posts with a graph, adding an isolated node for any poster the
    /// graph does not know.
    pub fn new(posts: Vec<LabeledPost>, graph: Graph) -> Self {
        let ids: Vec<&str> = posts.iter().map(|p| p.user_id.as_str()).collect();
        let graph = graph.with_extra_nodes(&ids);
        Dataset { posts, graph }
    }

    pub fn labels(&self) -> Vec<u8> {
        self.posts.iter().map(|p| p.label).collect()
    }

    /// Graph node of each post's author.
    pub fn post_nodes(&self) -> Result<Vec<usize>> {
        self.posts
            .iter()
            .map(|p| {
                self.graph
                    .node_of(&p.user_id)
                    .ok_or_else(|| Error::Config(format!("user {:?} not in graph", p.user_id)))
            })
            .collect()
    }

    /// Counts for `before`, `during` and both phases merged.
    pub fn phase_stats(&self) -> [(String, PhaseStats); 3] {
        let mut by = [PhaseStats::default(); 2];
        for p in &self.posts {
            let s = &mut by[p.phase as usize];
            s.labeled += 1;
            s.positive += usize::from(p.label == 1);
        }
        let overall = PhaseStats {
            labeled: by[0].labeled + by[1].labeled,
            positive: by[0].positive + by[1].positive,
        };
        [
            ("before".to_string(), by[0]),
            ("during".to_string(), by[1]),
            ("overall".to_string(), overall),
        ]
    }

    /// Link attendees with no neighbors into `group_count` artificial groups.
    pub fn group_lone_attendees(&self, group_count: usize, seed: u64) -> Result<Dataset> {
        let mut lone: Vec<usize> = Vec::new();
        for p in self.posts.iter().filter(|p| p.label == 1) {
            let node = self.graph.node_of(&p.user_id).expect("aligned in new()");
            if self.graph.degree(node) == 0 && !lone.contains(&node) {
                lone.push(node);
            }
        }
        lone.sort_unstable();
        let assignment = make_artificial_groups(&lone, group_count, seed)?;
        Ok(Dataset {
            posts: self.posts.clone(),
            graph: assignment.apply(&self.graph)?,
        })
    }
}

pub fn read_posts<R: BufRead>(reader: R) -> Result<Vec<LabeledPost>> {
    let mut posts = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let err = |reason: String| Error::Parse { line: i + 1, reason };
        let mut parts = line.splitn(4, '\t');
        let (Some(user), Some(phase), Some(label), Some(text)) =
            (parts.next(), parts.next(), parts.next(), parts.next())
        else {
            return Err(err("expected user_id, phase, label and text".into()));
        };
        let phase: Phase = phase.parse().map_err(|e: Error| err(e.to_string()))?;
        let label = match label {
            "0" => 0,
            "1" => 1,
            other => return Err(err(format!("label must be 0 or 1, found {other:?}"))),
        };
        if user.is_empty() {
            return Err(err("empty user id".into()));
        }
        posts.push(LabeledPost {
            user_id: user.to_string(),
            phase,
            label,
            text: text.to_string(),
        });
    }
    Ok(posts)
}

pub fn write_posts<W: Write>(posts: &[LabeledPost], mut out: W) -> Result<()> {
    for p in posts {
        let text = p.text.replace(['\t', '\n', '\r'], " ");
        writeln!(out, "{}\t{}\t{}\t{}", p.user_id, p.phase, p.label, text)?;
    }
    Ok(())
}
