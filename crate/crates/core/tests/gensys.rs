mod common;

use common::*;
use endwalk::arrangement::{AdhesionWalk, Side};
use endwalk::gensys::*;
use endwalk::solver::series_coefficients;
use endwalk::template::GraphTemplate;
use endwalk::Error;
use num_bigint::BigUint;

fn class(i: usize, y: Side) -> ConfigClass {
    ConfigClass { arc: (0, i), q: AdhesionWalk::trivial(0), y }
}

fn hand_system(classes: Vec<ConfigClass>, equations: Vec<Polynomial>) -> PolynomialSystem {
    PolynomialSystem {
        name: "hand".into(),
        k: 1,
        classes,
        equations,
        root_saw_inner: Polynomial::from_terms(vec![term(1, &[0], 1)]),
        root_saw_outer: Polynomial::from_terms(vec![]),
        root_sar: Polynomial::from_terms(vec![]),
    }
}

#[test]
fn double_ray_system_is_z_plus_zy() {
    let (_, sys) = system("double_ray");
    assert_eq!(sys.classes.len(), 2);
    assert!(sys.classes.iter().all(|c| c.is_simple()));
    for (c, other) in [(0, 1), (1, 0)] {
        let p = &sys.equations[c];
        assert_eq!(p, &Polynomial::from_terms(vec![term(1, &[], 1), term(1, &[other], 1)]));
    }
}

#[test]
fn polynomials_vanish_at_zero() {
    for name in TEMPLATES {
        let (_, sys) = system(name);
        let zeros = vec![0.0; sys.classes.len()];
        assert!(sys.equations.iter().all(|p| p.eval(0.0, &zeros) == 0.0), "{name}");
        // constant terms carry weight
        assert!(sys.equations.iter().all(|p| p.terms.iter().all(|t| t.z >= 1 || !t.vars.is_empty())), "{name}");
    }
}

#[test]
fn pruning() {
    let cyclic = hand_system(
        vec![class(0, Side::In), class(1, Side::In)],
        vec![Polynomial::from_terms(vec![term(1, &[1], 1)]), Polynomial::from_terms(vec![term(1, &[0], 1)])],
    );
    assert!(productive_indices(&cyclic.equations).is_empty());
    assert!(prune_system(&cyclic).classes.is_empty());
    let base = hand_system(vec![class(0, Side::In)], vec![Polynomial::from_terms(vec![term(1, &[], 1)])]);
    assert_eq!(productive_indices(&base.equations), vec![0]);
    for name in TEMPLATES {
        let (_, sys) = system(name);
        assert_eq!(productive_indices(&sys.equations).len(), sys.classes.len(), "{name}");
    }
}

#[test]
fn classification() {
    for name in ["double_ray", "t3"] {
        let (_, sys) = system(name);
        let d = build_dependency_digraph(&sys).unwrap();
        assert_eq!(d.components.len(), 1, "{name}");
        assert_eq!(d.component_class, vec![ComponentClass::IPersistent]);
        assert!(sys.classes.iter().all(|c| c.is_i()));
    }
    for name in ["triangle_edge", "k4_edge", "hex_tree"] {
        let (_, sys) = system(name);
        let d = build_dependency_digraph(&sys).unwrap();
        assert_eq!(d.persistent.len(), 1);
        for (comp, kind) in d.components.iter().zip(&d.component_class) {
            let all_u = comp.iter().all(|&c| !sys.classes[c].is_i());
            let all_i = comp.iter().all(|&c| sys.classes[c].is_i());
            assert!(all_u || all_i, "{name}: mixed component");
            assert_eq!(*kind == ComponentClass::U, all_u);
        }
        // simple configurations are persistent
        for (i, c) in sys.classes.iter().enumerate() {
            if c.is_simple() {
                assert_eq!(d.class_of(i), ComponentClass::IPersistent);
            }
        }
        check_i_jacobian_structure(&sys).unwrap();
    }
    let (_, hex) = system("hex_tree");
    let d = build_dependency_digraph(&hex).unwrap();
    assert!(d.component_class.contains(&ComponentClass::U));
    assert!(d.component_class.contains(&ComponentClass::ITransient));
}

#[test]
fn u_to_i_arcs_are_rejected() {
    let sys = hand_system(
        vec![class(0, Side::In), class(1, Side::Out)],
        vec![Polynomial::from_terms(vec![term(1, &[], 1)]), Polynomial::from_terms(vec![term(1, &[0], 1)])],
    );
    assert!(matches!(build_dependency_digraph(&sys), Err(Error::InvariantViolation(_))));
}

#[test]
fn symbolic_jacobian_is_nilpotent_at_zero() {
    for name in TEMPLATES {
        let (_, sys) = system(name);
        let all: Vec<usize> = (0..sys.classes.len()).collect();
        let j = jacobian_symbolic(&sys, &all, &all);
        let zeros = vec![0.0; all.len()];
        let m: Vec<Vec<f64>> = j.iter().map(|row| row.iter().map(|p| p.eval(0.0, &zeros)).collect()).collect();
        let mut power = m.clone();
        for _ in 1..all.len() {
            power = mat_mul(&power, &m);
        }
        assert!(power.iter().flatten().all(|&x| x == 0.0), "{name}");
    }
}

#[test]
fn polynomial_calculus() {
    let p = Polynomial::from_terms(vec![term(1, &[0, 0], 2), term(2, &[1], 3), term(1, &[0, 0], 1)]);
    assert_eq!(p.terms.len(), 2);
    assert_eq!(p.variables().into_iter().collect::<Vec<_>>(), vec![0, 1]);
    assert_eq!(p.max_z(), 2);
    assert_eq!(p.eval(0.5, &[2.0, 1.0]), 0.5 * 3.0 * 4.0 + 0.25 * 3.0);
    let d = p.derivative(0);
    assert_eq!(d, Polynomial::from_terms(vec![term(1, &[0], 6)]));
    let s = p.eval_series(3, &[vec![BigUint::from(0u32), BigUint::from(1u32), BigUint::from(0u32), BigUint::from(0u32)], vec![BigUint::from(0u32); 4]]);
    // 3 z · (z)^2 = 3 z^3
    assert_eq!(s[3], BigUint::from(3u32));
}

#[test]
fn symmetry_reduction_preserves_series() {
    let text = std::fs::read_to_string(data("double_ray")).unwrap();
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    let mut plain = v.clone();
    plain.as_object_mut().unwrap().remove("symmetries");
    let t = GraphTemplate::from_json(&plain.to_string()).unwrap();
    let sys = build_system(&t, BuildOptions::default()).unwrap();
    let (_, reduced) = system("double_ray");
    assert!(sys.classes.len() > reduced.classes.len());
    assert_eq!(series_coefficients(&sys, 10).unwrap(), series_coefficients(&reduced, 10).unwrap());
    // without the reflection the two ends give separate persistent components
    assert_eq!(build_dependency_digraph(&sys).unwrap().persistent.len(), 2);
}

#[test]
fn system_dump_is_deterministic() {
    let (t, sys) = system("triangle_edge");
    let d = build_dependency_digraph(&sys).unwrap();
    let a = serde_json::to_string(&system_json(&t, &sys, &d)).unwrap();
    let (t2, sys2) = system("triangle_edge");
    let d2 = build_dependency_digraph(&sys2).unwrap();
    assert_eq!(a, serde_json::to_string(&system_json(&t2, &sys2, &d2)).unwrap());
}
