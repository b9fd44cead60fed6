use std::collections::VecDeque;

use eventpred::graph::make_artificial_groups;
use eventpred::Graph;
use proptest::prelude::*;

fn edge_lists() -> impl Strategy<Value = (usize, Vec<(usize, usize)>)> {
    (1usize..=50).prop_flat_map(|n| {
        let edges = prop::collection::vec((0..n, 0..n), 0..120)
            .prop_map(|es| es.into_iter().filter(|(u, v)| u != v).collect::<Vec<_>>());
        (Just(n), edges)
    })
}

fn bfs_partition(g: &Graph) -> Vec<Vec<usize>> {
    let mut seen = vec![false; g.node_count()];
    let mut out = Vec::new();
    for s in 0..g.node_count() {
        if seen[s] {
            continue;
        }
        seen[s] = true;
        let mut comp = vec![s];
        let mut queue = VecDeque::from([s]);
        while let Some(u) = queue.pop_front() {
            for &v in g.neighbors(u).unwrap() {
                if !seen[v] {
                    seen[v] = true;
                    comp.push(v);
                    queue.push_back(v);
                }
            }
        }
        comp.sort_unstable();
        out.push(comp);
    }
    out.sort();
    out
}

/// Edge set keyed by external id; dense ids depend on first-appearance order.
fn named_edges(g: &Graph) -> Vec<(String, String)> {
    let mut out: Vec<(String, String)> = g
        .edges()
        .into_iter()
        .map(|(u, v)| {
            let (a, b) = (g.ext_id(u).to_string(), g.ext_id(v).to_string());
            if a < b { (a, b) } else { (b, a) }
        })
        .collect();
    out.sort();
    out
}

proptest! {
    #[test]
    fn edge_list_round_trip((n, edges) in edge_lists()) {
        let g = Graph::from_edges(n, &edges).unwrap();
        let mut buf = Vec::new();
        g.write_edge_list(&mut buf).unwrap();
        let back = Graph::load_edge_list(buf.as_slice()).unwrap();
        // isolated nodes are not representable in an edge list
        prop_assert_eq!(back.edge_count(), g.edge_count());
        for (u, v) in back.edges() {
            let (a, b) = (back.ext_id(u), back.ext_id(v));
            prop_assert!(g.has_edge(g.node_of(a).unwrap(), g.node_of(b).unwrap()));
        }
        let mut again = Vec::new();
        back.write_edge_list(&mut again).unwrap();
        let reparsed = Graph::load_edge_list(again.as_slice()).unwrap();
        prop_assert_eq!(named_edges(&reparsed), named_edges(&back));
        prop_assert_eq!(named_edges(&back), named_edges(&g));
    }

    #[test]
    fn adjacency_is_symmetric((n, edges) in edge_lists()) {
        let g = Graph::from_edges(n, &edges).unwrap();
        for u in 0..n {
            for &v in g.neighbors(u).unwrap() {
                prop_assert!(g.neighbors(v).unwrap().contains(&u));
            }
        }
    }

    #[test]
    fn components_match_bfs((n, edges) in edge_lists()) {
        let g = Graph::from_edges(n, &edges).unwrap();
        let mut comps: Vec<Vec<usize>> = g
            .connected_components()
            .into_iter()
            .map(|mut c| { c.sort_unstable(); c })
            .collect();
        comps.sort();
        let total: usize = comps.iter().map(Vec::len).sum();
        prop_assert_eq!(total, n);
        prop_assert_eq!(comps, bfs_partition(&g));
    }

    #[test]
    fn artificial_groups_are_internal_and_connected(
        count in 2usize..60, groups in 1usize..8, seed in any::<u64>()
    ) {
        let users: Vec<usize> = (0..count).map(|i| 3 * i + 1).collect();
        let a = make_artificial_groups(&users, groups, seed).unwrap();
        let g = a.apply(&Graph::with_nodes(3 * count + 1)).unwrap();
        for &(u, v) in &a.added_edges {
            prop_assert!(a.groups.iter().any(|grp| grp.contains(&u) && grp.contains(&v)));
        }
        for grp in &a.groups {
            prop_assert!(grp.len() >= 2);
            let comp = g.connected_components().into_iter().find(|c| c.contains(&grp[0])).unwrap();
            let mut c = comp.clone();
            c.sort_unstable();
            let mut m = grp.clone();
            m.sort_unstable();
            prop_assert_eq!(c, m);
        }
        let placed: usize = a.groups.iter().map(Vec::len).sum();
        prop_assert_eq!(placed, count);
    }
}

#[test]
fn self_loop_reports_line() {
    let err = Graph::load_edge_list("# header\nx y\na a\n".as_bytes()).unwrap_err();
    assert_eq!(err.to_string(), "self-loop at line 3");
}
