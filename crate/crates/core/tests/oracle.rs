mod common;

use common::*;
use endwalk::oracle::*;
use endwalk::template::{build_patch, patch_for_horizon};
use endwalk::Error;

const CAP: usize = 200_000;

#[test]
fn double_ray_counts() {
    let r = brute_counts_for(&load("double_ray"), 6, CAP).unwrap();
    assert_eq!(r.c, vec![1, 2, 2, 2, 2, 2, 2]);
    assert!(r.sap.iter().all(|&x| x == 0));
}

#[test]
fn cubic_tree_counts() {
    let r = brute_counts_for(&load("t3"), 4, CAP).unwrap();
    assert_eq!(&r.c[1..], &[3, 6, 12, 24]);
    assert!(r.sap.iter().all(|&x| x == 0));
}

#[test]
fn triangle_edge_first_steps() {
    let r = brute_counts_for(&load("triangle_edge"), 3, CAP).unwrap();
    assert_eq!(r.c[0], 1);
    assert_eq!(r.c[1], 3);
    assert!(r.sap[3] > 0);
}

#[test]
fn counts_are_submultiplicative() {
    for name in TEMPLATES {
        let r = brute_counts_for(&load(name), 8, CAP).unwrap();
        for m in 1..=8 {
            for n in 1..=8 - m {
                assert!(r.c[m + n] <= r.c[m] * r.c[n], "{name} m={m} n={n}");
            }
        }
    }
}

#[test]
fn tree_walks_go_straight_out() {
    for name in ["t3", "double_ray"] {
        let t = load(name);
        let p = patch_for_horizon(&t, 6, CAP).unwrap();
        let s = displacement_stats(&p, p.origin, 6, 0.5).unwrap();
        assert_eq!(s.histogram[6], s.total, "{name}");
        assert_eq!(s.mean_over_n, 1.0);
        assert_eq!(s.tail_fraction, 0.0);
    }
}

#[test]
fn tree_growth_has_no_polygons() {
    let r = brute_counts_for(&load("t3"), 6, CAP).unwrap();
    let g = growth_report(&r, Some(2.0));
    assert!(g.sap_root.iter().all(|&x| x == 0.0));
    assert_eq!(g.gap, Some(true));
    assert!((g.saw_root[0] - 3.0).abs() < 1e-12);
}

#[test]
fn small_patch_is_rejected() {
    let t = load("t3");
    let p = build_patch(&t, 1, CAP).unwrap();
    let e = brute_counts(&p, p.origin, 40).unwrap_err();
    assert!(matches!(e, Error::HorizonExceeded { requested: 40, .. }));
    assert!(e.is_resource());
    assert!(displacement_stats(&p, p.origin, 40, 0.5).is_err());
}

#[test]
fn zero_length_displacement_is_inconclusive() {
    let t = load("t3");
    let p = build_patch(&t, 2, CAP).unwrap();
    assert!(matches!(displacement_stats(&p, p.origin, 0, 0.5), Err(Error::Inconclusive(_))));
}
