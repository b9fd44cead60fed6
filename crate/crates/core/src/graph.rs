//! Undirected, unweighted social graph with dense node ids.

use std::collections::{HashMap, VecDeque};
use std::io::{BufRead, Write};

use rand::seq::SliceRandom;
use rand::Rng as _;

use crate::{seeded, Error, Result};

/// Probability of linking an intra-group pair that is not on the spanning tree.
pub const EXTRA_EDGE_PROB: f64 = 0.3;

/// Immutable undirected graph.
///
/// Nodes are `0..node_count()`. Each node also carries an external string id
/// (the user handle in an edge-list file). Adjacency lists are sorted and free
/// of duplicates and self-loops.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    adjacency: Vec<Vec<usize>>,
    ext_ids: Vec<String>,
    index: HashMap<String, usize>,
}

impl Graph {
    /// Graph with `n` isolated nodes named `"0"`, `"1"`, ...
    pub fn with_nodes(n: usize) -> Self {
        Self::from_ids((0..n).map(|i| i.to_string()).collect())
    }

    fn from_ids(ext_ids: Vec<String>) -> Self {
        let index = ext_ids
            .iter()
            .enumerate()
            .map(|(i, id)| (id.clone(), i))
            .collect();
        Graph {
            adjacency: vec![Vec::new(); ext_ids.len()],
            ext_ids,
            index,
        }
    }

    /// Build from dense-id edges. Self-loops are dropped, duplicates collapse.
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        Self::with_nodes(n).with_added_edges(edges)
    }

    /// Build a graph with the given external ids and dense-id edges.
    pub fn from_named_edges(ext_ids: Vec<String>, edges: &[(usize, usize)]) -> Result<Self> {
        let mut seen = HashMap::new();
        for (i, id) in ext_ids.iter().enumerate() {
            if seen.insert(id.as_str(), i).is_some() {
                return Err(Error::Config(format!("duplicate node id {id:?}")));
            }
        }
        Self::from_ids(ext_ids).with_added_edges(edges)
    }

    /// Copy of this graph with `edges` added (duplicates and self-loops ignored).
    pub fn with_added_edges(&self, edges: &[(usize, usize)]) -> Result<Self> {
        let n = self.node_count();
        let mut g = self.clone();
        for &(u, v) in edges {
            for w in [u, v] {
                if w >= n {
                    return Err(Error::NodeOutOfRange {
                        node: w,
                        node_count: n,
                    });
                }
            }
            if u != v {
                g.adjacency[u].push(v);
                g.adjacency[v].push(u);
            }
        }
        for adj in &mut g.adjacency {
            adj.sort_unstable();
            adj.dedup();
        }
        Ok(g)
    }

    /// Copy of this graph extended with isolated nodes for every id not yet present.
    pub fn with_extra_nodes<S: AsRef<str>>(&self, ids: &[S]) -> Self {
        let mut g = self.clone();
        for id in ids {
            let id = id.as_ref();
            if !g.index.contains_key(id) {
                g.index.insert(id.to_string(), g.ext_ids.len());
                g.ext_ids.push(id.to_string());
                g.adjacency.push(Vec::new());
            }
        }
        g
    }

    pub fn node_count(&self) -> usize {
        self.adjacency.len()
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum::<usize>() / 2
    }

    pub fn is_empty(&self) -> bool {
        self.adjacency.is_empty()
    }

    /// Sorted neighbor list of `u`.
    pub fn neighbors(&self, u: usize) -> Result<&[usize]> {
        self.adjacency
            .get(u)
            .map(Vec::as_slice)
            .ok_or(Error::NodeOutOfRange {
                node: u,
                node_count: self.node_count(),
            })
    }

    /// Unchecked neighbor access for hot loops; panics if `u` is out of range.
    pub(crate) fn adj(&self, u: usize) -> &[usize] {
        &self.adjacency[u]
    }

    pub fn degree(&self, u: usize) -> usize {
        self.adjacency.get(u).map_or(0, Vec::len)
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.adjacency
            .get(u)
            .is_some_and(|adj| adj.binary_search(&v).is_ok())
    }

    /// All edges as `(u, v)` with `u < v`, in dense-id order.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        self.adjacency
            .iter()
            .enumerate()
            .flat_map(|(u, adj)| adj.iter().filter(move |&&v| u < v).map(move |&v| (u, v)))
            .collect()
    }

    pub fn ext_id(&self, u: usize) -> &str {
        &self.ext_ids[u]
    }

    pub fn ext_ids(&self) -> &[String] {
        &self.ext_ids
    }

    pub fn node_of(&self, ext_id: &str) -> Option<usize> {
        self.index.get(ext_id).copied()
    }

    /// Parse an edge list: one `a b` pair per line, `#` starts a comment line.
    ///
    /// Dense ids follow first appearance. Duplicate edges collapse; a self-loop
    /// or a line without exactly two tokens is a line-numbered error.
    pub fn load_edge_list<R: BufRead>(reader: R) -> Result<Self> {
        let mut ids: Vec<String> = Vec::new();
        let mut index: HashMap<String, usize> = HashMap::new();
        let mut edges = Vec::new();
        let mut intern = |tok: &str, ids: &mut Vec<String>| -> usize {
            *index.entry(tok.to_string()).or_insert_with(|| {
                ids.push(tok.to_string());
                ids.len() - 1
            })
        };
        for (i, line) in reader.lines().enumerate() {
            let line = line?;
            let lineno = i + 1;
            let trimmed = line.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let toks: Vec<&str> = trimmed.split_whitespace().collect();
            if toks.len() != 2 {
                return Err(Error::Parse {
                    line: lineno,
                    reason: format!("expected 2 tokens, found {}", toks.len()),
                });
            }
            if toks[0] == toks[1] {
                return Err(Error::SelfLoop { line: lineno });
            }
            let u = intern(toks[0], &mut ids);
            let v = intern(toks[1], &mut ids);
            edges.push((u, v));
        }
        Self::from_ids(ids).with_added_edges(&edges)
    }

    /// Write one `u v` line per edge, `u < v` in dense-id order, using external ids.
    ///
    /// Isolated nodes cannot be expressed in this format and are not written.
    pub fn write_edge_list<W: Write>(&self, mut out: W) -> Result<()> {
        for (u, v) in self.edges() {
            writeln!(out, "{} {}", self.ext_ids[u], self.ext_ids[v])?;
        }
        Ok(())
    }

    /// Connected components, each sorted, ordered by smallest member.
    pub fn connected_components(&self) -> Vec<Vec<usize>> {
        let n = self.node_count();
        let mut seen = vec![false; n];
        let mut out = Vec::new();
        let mut queue = VecDeque::new();
        for start in 0..n {
            if seen[start] {
                continue;
            }
            seen[start] = true;
            queue.push_back(start);
            let mut comp = Vec::new();
            while let Some(u) = queue.pop_front() {
                comp.push(u);
                for &v in &self.adjacency[u] {
                    if !seen[v] {
                        seen[v] = true;
                        queue.push_back(v);
                    }
                }
            }
            comp.sort_unstable();
            out.push(comp);
        }
        out
    }
}

/// Result of linking lone users into artificial friendship groups.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct GroupAssignment {
    pub groups: Vec<Vec<usize>>,
    pub added_edges: Vec<(usize, usize)>,
}

impl GroupAssignment {
    /// Apply the added edges to `graph`.
    pub fn apply(&self, graph: &Graph) -> Result<Graph> {
        graph.with_added_edges(&self.added_edges)
    }
}

/// Partition `lone_users` into `group_count` near-equal groups and link each
/// group internally.
///
/// Each group gets a uniformly random spanning tree plus every other pair
/// independently with probability [`EXTRA_EDGE_PROB`]. A part of size one is
/// merged into the smallest other part. A single lone user overall cannot be
/// linked to anyone and yields an empty assignment.
pub fn make_artificial_groups(
    lone_users: &[usize],
    group_count: usize,
    seed: u64,
) -> Result<GroupAssignment> {
    if group_count == 0 {
        return Err(Error::Config("group_count must be >= 1".into()));
    }
    let mut rng = seeded(seed);
    let mut users = lone_users.to_vec();
    users.shuffle(&mut rng);
    let mut parts = split_near_equal(&users, group_count);
    parts.retain(|p| !p.is_empty());
    merge_singletons(&mut parts);
    parts.retain(|p| p.len() >= 2);

    let mut assignment = GroupAssignment::default();
    for part in parts {
        assignment
            .added_edges
            .extend(link_group(&part, EXTRA_EDGE_PROB, &mut rng));
        let mut sorted = part;
        sorted.sort_unstable();
        assignment.groups.push(sorted);
    }
    Ok(assignment)
}

pub(crate) fn split_near_equal<T: Clone>(items: &[T], parts: usize) -> Vec<Vec<T>> {
    let base = items.len() / parts;
    let extra = items.len() % parts;
    let mut out = Vec::with_capacity(parts);
    let mut start = 0;
    for i in 0..parts {
        let len = base + usize::from(i < extra);
        out.push(items[start..start + len].to_vec());
        start += len;
    }
    out
}

fn merge_singletons(parts: &mut Vec<Vec<usize>>) {
    while parts.len() >= 2 {
        let Some(single) = parts.iter().position(|p| p.len() == 1) else {
            break;
        };
        let lone = parts.remove(single);
        let target = (0..parts.len())
            .min_by_key(|&i| parts[i].len())
            .expect("at least one part remains");
        parts[target].extend(lone);
    }
}

/// Edges connecting `members`: a uniform random labelled tree (random Prüfer
/// sequence) plus each remaining pair with probability `extra_prob`.
pub(crate) fn link_group(
    members: &[usize],
    extra_prob: f64,
    rng: &mut crate::Rng,
) -> Vec<(usize, usize)> {
    let m = members.len();
    if m < 2 {
        return Vec::new();
    }
    let prufer: Vec<usize> = (0..m.saturating_sub(2))
        .map(|_| rng.random_range(0..m))
        .collect();
    let mut tree = prufer_to_edges(&prufer, m);
    for e in &mut tree {
        if e.0 > e.1 {
            *e = (e.1, e.0);
        }
    }
    tree.sort_unstable();
    let mut edges: Vec<(usize, usize)> = tree
        .iter()
        .map(|&(a, b)| (members[a], members[b]))
        .collect();
    for a in 0..m {
        for b in a + 1..m {
            if tree.binary_search(&(a, b)).is_err() && rng.random_bool(extra_prob) {
                edges.push((members[a], members[b]));
            }
        }
    }
    edges
}

fn prufer_to_edges(seq: &[usize], m: usize) -> Vec<(usize, usize)> {
    let mut degree = vec![1usize; m];
    for &s in seq {
        degree[s] += 1;
    }
    let mut edges = Vec::with_capacity(m - 1);
    for &s in seq {
        let leaf = (0..m).find(|&i| degree[i] == 1).expect("a leaf always exists");
        edges.push((leaf, s));
        degree[leaf] -= 1;
        degree[s] -= 1;
    }
    let rest: Vec<usize> = (0..m).filter(|&i| degree[i] == 1).collect();
    edges.push((rest[0], rest[1]));
    edges
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(s: &str) -> Result<Graph> {
        Graph::load_edge_list(s.as_bytes())
    }

    #[test]
    fn minimal_path() {
        let g = parse("a b\nb c").unwrap();
        assert_eq!(g.node_count(), 3);
        assert_eq!(g.edge_count(), 2);
        assert_eq!(g.ext_id(0), "a");
        assert_eq!(g.neighbors(1).unwrap(), &[0, 2]);
    }

    #[test]
    fn duplicate_lines_collapse() {
        let g = parse("a b\na b\nb a").unwrap();
        assert_eq!(g.node_count(), 2);
        assert_eq!(g.edge_count(), 1);
    }

    #[test]
    fn comments_and_blank_lines_skipped() {
        let g = parse("# header\n\na b\n  # indented comment\n").unwrap();
        assert_eq!(g.edge_count(), 1);
    }

    #[test]
    fn self_loop_rejected_with_line() {
        let err = parse("a a").unwrap_err();
        assert_eq!(err.to_string(), "self-loop at line 1");
        let err = parse("a b\n# c\nc c").unwrap_err();
        assert_eq!(err.to_string(), "self-loop at line 3");
    }

    #[test]
    fn malformed_line_rejected() {
        let err = parse("a b\nlonely").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }), "{err}");
        assert!(parse("a b c").is_err());
    }

    #[test]
    fn neighbors_queries() {
        let star = Graph::from_edges(4, &[(0, 1), (0, 2), (0, 3)]).unwrap();
        assert_eq!(star.neighbors(0).unwrap(), &[1, 2, 3]);
        let g = Graph::with_nodes(2);
        assert!(g.neighbors(1).unwrap().is_empty());
        assert!(matches!(
            g.neighbors(2),
            Err(Error::NodeOutOfRange { node: 2, .. })
        ));
    }

    #[test]
    fn components_small() {
        let g = Graph::from_edges(5, &[(0, 1), (1, 2), (2, 0), (3, 4)]).unwrap();
        assert_eq!(g.connected_components(), vec![vec![0, 1, 2], vec![3, 4]]);
        assert!(Graph::with_nodes(0).connected_components().is_empty());
    }

    #[test]
    fn writer_roundtrip() {
        let g = parse("x y\ny z\nz x\nw x").unwrap();
        let mut buf = Vec::new();
        g.write_edge_list(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf.clone()).unwrap().lines().count(), 4);
        assert_eq!(parse(std::str::from_utf8(&buf).unwrap()).unwrap(), g);
    }

    #[test]
    fn eight_users_four_groups() {
        let users: Vec<usize> = (0..8).collect();
        for seed in 0..20 {
            let a = make_artificial_groups(&users, 4, seed).unwrap();
            assert_eq!(a.groups.len(), 4);
            assert!(a.groups.iter().all(|g| g.len() == 2));
            assert_eq!(a.added_edges.len(), 4);
            let g = a.apply(&Graph::with_nodes(8)).unwrap();
            assert!((0..8).all(|u| g.degree(u) >= 1));
        }
    }

    #[test]
    fn empty_lone_users() {
        let a = make_artificial_groups(&[], 4, 1).unwrap();
        assert!(a.groups.is_empty() && a.added_edges.is_empty());
        assert!(make_artificial_groups(&[1, 2], 0, 1).is_err());
    }

    #[test]
    fn five_users_singleton_merge() {
        // {2,1,1,1} -> two singletons merge -> {2,2,1} -> {2,3}
        let users: Vec<usize> = (0..5).collect();
        for seed in 0..20 {
            let a = make_artificial_groups(&users, 4, seed).unwrap();
            let mut sizes: Vec<usize> = a.groups.iter().map(Vec::len).collect();
            sizes.sort_unstable();
            assert_eq!(sizes, vec![2, 3]);
            let g = a.apply(&Graph::with_nodes(5)).unwrap();
            assert!((0..5).all(|u| g.degree(u) >= 1));
        }
    }

    #[test]
    fn single_lone_user_cannot_be_linked() {
        let a = make_artificial_groups(&[7], 4, 3).unwrap();
        assert!(a.groups.is_empty() && a.added_edges.is_empty());
    }

    #[test]
    fn groups_connected_and_deterministic() {
        let users: Vec<usize> = (10..47).collect();
        let a = make_artificial_groups(&users, 4, 99).unwrap();
        assert_eq!(a, make_artificial_groups(&users, 4, 99).unwrap());
        let g = a.apply(&Graph::with_nodes(50)).unwrap();
        let comps: Vec<Vec<usize>> = g
            .connected_components()
            .into_iter()
            .filter(|c| c.len() > 1)
            .collect();
        let mut groups = a.groups.clone();
        groups.sort();
        assert_eq!(comps, groups);
        for &(u, v) in &a.added_edges {
            assert!(a.groups.iter().any(|grp| grp.contains(&u) && grp.contains(&v)));
        }
    }

    #[test]
    fn prufer_decodes_to_tree() {
        let edges = prufer_to_edges(&[3, 3, 3, 4], 6);
        assert_eq!(edges, vec![(0, 3), (1, 3), (2, 3), (3, 4), (4, 5)]);
    }
}
