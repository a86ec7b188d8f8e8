#![allow(dead_code)]

use std::collections::{BTreeSet, HashMap};

use endwalk::arrangement::{enumerate_star_arrangements, Configuration, Constraints};
use endwalk::gensys::{build_system, canonical_class, BuildOptions, ConfigClass, PolynomialSystem};
use endwalk::template::{cluster_graph, GraphTemplate, Patch};

pub const TEMPLATES: [&str; 5] = ["double_ray", "t3", "triangle_edge", "k4_edge", "hex_tree"];

pub fn data(name: &str) -> String {
    format!("{}/../../data/{name}.json", env!("CARGO_MANIFEST_DIR"))
}

pub fn load(name: &str) -> GraphTemplate {
    GraphTemplate::from_path(data(name)).unwrap()
}

pub fn system(name: &str) -> (GraphTemplate, PolynomialSystem) {
    let t = load(name);
    let sys = build_system(&t, BuildOptions::default()).unwrap();
    (t, sys)
}

pub fn mat_mul(a: &[Vec<f64>], b: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = a.len();
    let m = b[0].len();
    (0..n).map(|i| (0..m).map(|j| (0..b.len()).map(|k| a[i][k] * b[k][j]).sum()).collect()).collect()
}

/// Sum over explicit chains of star arrangements on patch instances: the total
/// weight of completions of length `n` entering `inst` through tree arc `arc`
/// with configuration `conf`, split by the class on the final arc. Side
/// completions are weighted by `f`.
pub struct Chains<'a> {
    pub t: &'a GraphTemplate,
    pub patch: &'a Patch,
    pub index: HashMap<ConfigClass, usize>,
    pub f: Vec<f64>,
    pub z: f64,
}

impl<'a> Chains<'a> {
    pub fn new(t: &'a GraphTemplate, sys: &PolynomialSystem, patch: &'a Patch, f: Vec<f64>, z: f64) -> Self {
        let index = sys.classes.iter().cloned().enumerate().map(|(i, c)| (c, i)).collect();
        Chains { t, patch, index, f, z }
    }

    fn class_of(&self, arc: usize, conf: &Configuration) -> (Option<usize>, Configuration) {
        let (p, j) = self.patch.arc_type(arc);
        let g = &self.t.partner[p][j];
        let far = conf.flipped(&g.map);
        let c = ConfigClass { arc: (g.part, g.port), q: far.q.clone().unwrap(), y: far.y };
        (self.index.get(&canonical_class(self.t, &c)).copied(), far)
    }

    pub fn row(&self, inst: usize, arc: usize, conf: &Configuration, n: usize) -> Vec<f64> {
        let mut row = vec![0.0; self.f.len()];
        let cg = cluster_graph(self.patch, &BTreeSet::from([inst]));
        let port = cg.port_arcs.iter().position(|&a| a == arc).unwrap();
        let cons = Constraints { pinned: Some((port, conf.clone())), ..Default::default() };
        let mut stars = Vec::new();
        enumerate_star_arrangements(&cg.part, &cons, |s| stars.push(s.clone())).unwrap();
        for s in stars {
            let nb: Vec<usize> = s.non_boring().filter(|&j| j != port).collect();
            let far: Vec<_> = nb.iter().map(|&j| self.class_of(cg.port_arcs[j], &s.configs[j])).collect();
            for (k, &j) in nb.iter().enumerate() {
                let Some(target) = far[k].0 else { continue };
                let mut w = self.z.powi(s.weight as i32);
                for (l, (c, _)) in far.iter().enumerate() {
                    if l != k {
                        w *= c.map_or(0.0, |c| self.f[c]);
                    }
                }
                if w == 0.0 {
                    continue;
                }
                if n == 1 {
                    row[target] += w;
                } else {
                    let a = cg.port_arcs[j];
                    let h = self.patch.arc_head(a).expect("patch too small");
                    let sub = self.row(h, self.patch.arc_rev(a).unwrap(), &far[k].1, n - 1);
                    for (r, x) in row.iter_mut().zip(sub) {
                        *r += w * x;
                    }
                }
            }
        }
        row
    }

    /// Direct matrix of length-`n` completion weights, one row per class.
    pub fn matrix(&self, sys: &PolynomialSystem, n: usize) -> Vec<Vec<f64>> {
        sys.classes
            .iter()
            .map(|c| {
                let (p, i) = c.arc;
                let inst = (0..self.patch.instance_count())
                    .filter(|&u| self.patch.inst_part[u] == p)
                    .min_by_key(|&u| self.patch.inst_depth[u])
                    .expect("part type not materialised");
                self.row(inst, self.patch.tree_arc(inst, i), &c.config(), n)
            })
            .collect()
    }
}
