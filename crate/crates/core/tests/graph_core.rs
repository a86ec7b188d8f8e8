use endwalk::graph_core::*;
use proptest::prelude::*;

fn graph(n: usize, edges: &[(usize, usize)]) -> Digraph {
    let mut g = Digraph::new(n);
    for &(u, v) in edges {
        g.add_edge(u, v, ArcLabel::Real);
    }
    g
}

fn complete(n: usize) -> Digraph {
    let edges: Vec<_> = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))).collect();
    graph(n, &edges)
}

#[test]
fn saw_counts_on_small_graphs() {
    assert_eq!(enumerate_saws(&complete(3), 0, 2), vec![1, 2, 2]);
    assert_eq!(enumerate_saws(&Digraph::new(1), 0, 3), vec![1, 0, 0, 0]);
    assert_eq!(enumerate_saws(&complete(4), 2, 3), vec![1, 3, 6, 6]);
}

#[test]
fn closed_counts() {
    let c = enumerate_closed(&complete(3), 0, 3);
    assert_eq!(&c.sar[..3], &[0, 2, 2]);
    assert_eq!(c.sap[3], 1);
    let path = graph(3, &[(0, 1), (1, 2)]);
    assert!(enumerate_closed(&path, 1, 4).sap.iter().all(|&x| x == 0));
    // K4 has three 4-cycles and three triangles through each vertex
    let k4 = enumerate_closed(&complete(4), 0, 4);
    assert_eq!(k4.sap[3], 3);
    assert_eq!(k4.sap[4], 3);
}

#[test]
fn distances() {
    let k3 = complete(3);
    assert_eq!(graph_distance(&k3, 1, 1), Some(0));
    assert_eq!(graph_distance(&k3, 0, 2), Some(1));
    let two = graph(6, &[(0, 1), (1, 2), (2, 0), (3, 4), (4, 5), (5, 3)]);
    assert_eq!(graph_distance(&two, 0, 4), None);
    let path = graph(4, &[(0, 1), (1, 2), (2, 3)]);
    assert_eq!(bfs_distances(&path, 0), vec![Some(0), Some(1), Some(2), Some(3)]);
}

#[test]
fn walks_from_vertices() {
    let k4 = complete(4);
    let w = Walk::from_vertices(&k4, &[0, 1, 3]).unwrap();
    assert_eq!(w.len(), 2);
    assert!(w.is_walk_in(&k4) && w.is_self_avoiding());
    let back = w.reversed(&k4);
    assert_eq!(back.verts, vec![3, 1, 0]);
    assert!(back.is_walk_in(&k4));
    assert!(!Walk::from_vertices(&k4, &[0, 1, 0]).unwrap().is_self_avoiding());
    assert!(Walk::from_vertices(&graph(3, &[(0, 1)]), &[0, 2]).is_none());
}

fn arb_graph() -> impl Strategy<Value = (usize, Vec<(usize, usize)>)> {
    (2usize..7).prop_flat_map(|n| {
        let pairs: Vec<(usize, usize)> = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))).collect();
        let m = pairs.len();
        (Just(n), proptest::sample::subsequence(pairs, 0..=m))
    })
}

proptest! {
    #[test]
    fn counts_monotone_under_subgraphs((n, edges) in arb_graph(), drop in 0usize..16) {
        let full = graph(n, &edges);
        let sub: Vec<_> = edges.iter().enumerate().filter(|&(i, _)| i != drop).map(|(_, e)| *e).collect();
        let part = graph(n, &sub);
        let a = enumerate_saws(&full, 0, n);
        let b = enumerate_saws(&part, 0, n);
        prop_assert!(a.iter().zip(&b).all(|(x, y)| x >= y));
    }

    #[test]
    fn visitor_agrees_with_counts((n, edges) in arb_graph()) {
        let g = graph(n, &edges);
        let mut counts = vec![0u64; n + 1];
        for_each_saw(&g, 0, n, |w| {
            assert!(w.is_walk_in(&g) && w.is_self_avoiding());
            counts[w.len()] += 1;
        });
        prop_assert_eq!(counts, enumerate_saws(&g, 0, n));
    }

    #[test]
    fn returns_bound_polygons((n, edges) in arb_graph()) {
        let g = graph(n, &edges);
        let c = enumerate_closed(&g, 0, n);
        let saws = enumerate_saws(&g, 0, n);
        for k in 0..=n {
            prop_assert!(c.sar[k] <= saws[k]);
            // each polygon of length k+1 yields two returns of length k
            if k + 1 <= n && k >= 2 {
                prop_assert!(2 * c.sap[k + 1] <= c.sar[k]);
            }
        }
    }
}
