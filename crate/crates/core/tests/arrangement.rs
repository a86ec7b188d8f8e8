mod common;

use common::*;
use endwalk::arrangement::*;
use endwalk::graph_core::{ArcLabel, Walk};
use endwalk::template::PartGraph;

fn walk(pg: &PartGraph, steps: &[(usize, usize, ArcLabel)]) -> Walk {
    let mut verts = vec![steps[0].0];
    let mut arcs = Vec::new();
    for &(u, v, l) in steps {
        arcs.push(pg.graph.find_arc(u, v, l).unwrap());
        verts.push(v);
    }
    Walk { verts, arcs }
}

#[test]
fn configuration_catalogue() {
    let one = enumerate_configurations(1, 100).unwrap();
    assert_eq!(one.len(), 8);
    // empty configurations with x ≠ y are non-boring but never realised
    let non_boring: Vec<_> = one.iter().filter(|c| !c.is_boring() && !c.is_empty()).collect();
    assert_eq!(non_boring.len(), 2);
    assert_eq!(one.iter().filter(|c| !c.is_boring()).count(), 4);
    assert!(non_boring.iter().all(|c| c.is_simple()));
    assert!(!one.iter().any(|c| !c.is_boring() && c.is_u()));
    assert_eq!(enumerate_configurations(2, 100).unwrap().len(), 28);
}

#[test]
fn induced_configurations_on_a_hexagon() {
    let t = load("hex_tree");
    let pg = t.part_graph(0);
    let w = walk(&pg, &[(5, 0, ArcLabel::Real), (0, 1, ArcLabel::Virtual(0)), (1, 2, ArcLabel::Real)]);
    assert_eq!(induced_configuration(&pg, &w, 0), Some(AdhesionWalk { verts: vec![0, 1], sides: vec![Side::Out] }));
    assert_eq!(induced_configuration(&pg, &w, 1), Some(AdhesionWalk::trivial(0)));
    assert_eq!(induced_configuration(&pg, &w, 2), Some(AdhesionWalk::trivial(1)));
    let inner = walk(&pg, &[(3, 4, ArcLabel::Real)]);
    assert_eq!(induced_configuration(&pg, &inner, 0), None);
}

#[test]
fn compatibility_clauses() {
    let t = load("hex_tree");
    let pg = t.part_graph(0);
    let w = walk(&pg, &[(2, 1, ArcLabel::Real)]);
    let q = Some(AdhesionWalk::trivial(1));
    let inward = Configuration { q: q.clone(), x: Side::In, y: Side::In };
    assert_eq!(check_compatibility(&pg, &w, 0, &inward), Ok(()));
    let entering = Configuration { q: q.clone(), x: Side::Out, y: Side::In };
    assert_eq!(check_compatibility(&pg, &w, 0, &entering), Err(Clause::C2));
    let leaving = Configuration { q, x: Side::In, y: Side::Out };
    assert_eq!(check_compatibility(&pg, &w, 0, &leaving), Ok(()));
    let crossing = walk(&pg, &[(0, 1, ArcLabel::Virtual(0))]);
    let boring = Configuration { q: Some(AdhesionWalk { verts: vec![0, 1], sides: vec![Side::In] }), x: Side::In, y: Side::In };
    assert_eq!(check_compatibility(&pg, &crossing, 0, &boring), Err(Clause::C1));
}

fn all(pg: &PartGraph, cons: &Constraints) -> Vec<StarArrangement> {
    let mut out = Vec::new();
    enumerate_star_arrangements(pg, cons, |a| out.push(a.clone())).unwrap();
    out
}

#[test]
fn double_ray_entry_arrangements() {
    let t = load("double_ray");
    let pg = t.part_graph(0);
    let simple = Configuration { q: Some(AdhesionWalk::trivial(0)), x: Side::Out, y: Side::In };
    let found = all(&pg, &Constraints { pinned: Some((0, simple)), ..Default::default() });
    assert_eq!(found.len(), 2);
    assert!(found.iter().all(|a| a.weight == 1 && a.shape.verts == vec![0, 1]));
    let far: Vec<_> = found.iter().map(|a| a.configs[1].clone()).collect();
    assert!(far.iter().any(|c| c.is_boring()));
    assert!(far.iter().any(|c| c.is_simple() && c.y == Side::Out));
}

#[test]
fn edgeless_part_needs_an_entry_arc() {
    let pg = PartGraph::new(1, &[], vec![vec![0]]);
    let found = all(&pg, &Constraints::default());
    assert_eq!(found.len(), 1);
    assert_eq!(found[0].shape.len(), 0);
    assert_eq!((found[0].xsel, found[0].ysel), (Some(0), Some(0)));
}

#[test]
fn boring_pin_has_a_unique_extension() {
    for name in ["double_ray", "triangle_edge", "k4_edge"] {
        let t = load(name);
        let pg = t.part_graph(0);
        let c = Configuration { q: Some(AdhesionWalk::trivial(0)), x: Side::Out, y: Side::Out };
        let found = all(&pg, &Constraints { pinned: Some((0, c.clone())), ..Default::default() });
        assert_eq!(found.len(), 1, "{name}");
        assert_eq!(found[0].shape.len(), 0);
        assert!(found[0].configs.iter().enumerate().all(|(j, k)| j == 0 || k.is_boring()));
    }
}

#[test]
fn enumerated_arrangements_pass_the_checker() {
    for name in TEMPLATES {
        let t = load(name);
        for p in 0..t.parts.len() {
            let pg = t.part_graph(p);
            let n = enumerate_star_arrangements(&pg, &Constraints::default(), |a| {
                check_star_arrangement(&pg, a).unwrap();
                let again = StarArrangement::from_shape(&pg, a.shape.clone(), a.xsel, a.ysel);
                assert_eq!(&again, a);
                assert!(a.shape.len() > 0 || a.xsel.is_some());
            })
            .unwrap();
            assert!(n > 0);
        }
    }
}

#[test]
fn shape_cap_is_a_resource_error() {
    let t = load("k4_edge");
    let err = enumerate_star_arrangements(&t.part_graph(0), &Constraints { cap: 3, ..Default::default() }, |_| {}).unwrap_err();
    assert!(err.is_resource());
}

#[test]
fn weight_bound_is_respected() {
    let t = load("hex_tree");
    let pg = t.part_graph(0);
    let all_w = all(&pg, &Constraints::default());
    let small = all(&pg, &Constraints { max_weight: Some(1), ..Default::default() });
    assert_eq!(small.len(), all_w.iter().filter(|a| a.weight <= 1).count());
}
