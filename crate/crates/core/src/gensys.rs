//! The generating system `F_c = P_c(z, F)` over non-boring configuration
//! classes, its dependency digraph and the symbolic Jacobian.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigUint;
use num_traits::{One, Zero};
use petgraph::algo::tarjan_scc;
use petgraph::graph::DiGraph;
use rayon::prelude::*;
use serde::Serialize;

use crate::arrangement::{
    enumerate_star_arrangements, AdhesionWalk, Configuration, Constraints, Side, StarArrangement,
    DEFAULT_K_CAP,
};
use crate::error::{Error, Result};
use crate::template::{root_contract, ArcType, GraphTemplate, PartGraph, RootStar};

/// Default cap on shapes enumerated per part.
pub const DEFAULT_SHAPE_CAP: usize = 20_000_000;

/// A non-boring configuration seen from its entry arc (entry direction `Out`).
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct ConfigClass {
    pub arc: ArcType,
    pub q: AdhesionWalk,
    pub y: Side,
}

impl ConfigClass {
    pub fn config(&self) -> Configuration {
        Configuration { q: Some(self.q.clone()), x: Side::Out, y: self.y }
    }
    pub fn is_i(&self) -> bool {
        self.y == Side::In
    }
    pub fn is_simple(&self) -> bool {
        self.is_i() && self.q.verts.len() == 1
    }
    pub fn label(&self, t: &GraphTemplate) -> String {
        format!("{}:{} {}", t.parts[self.arc.0].id, self.arc.1, self.config())
    }
}

/// `coef · z^z · Π y_vars`, with `vars` sorted.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Term {
    pub z: u32,
    pub vars: Vec<usize>,
    pub coef: BigUint,
}

/// Sparse polynomial in `z` and the class variables; terms sorted by `(vars, z)`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Polynomial {
    pub terms: Vec<Term>,
}

impl Polynomial {
    fn from_map(m: BTreeMap<(Vec<usize>, u32), BigUint>) -> Self {
        Polynomial {
            terms: m.into_iter().map(|((vars, z), coef)| Term { z, vars, coef }).collect(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Variables occurring in the polynomial.
    pub fn variables(&self) -> BTreeSet<usize> {
        self.terms.iter().flat_map(|t| t.vars.iter().copied()).collect()
    }

    pub fn max_z(&self) -> u32 {
        self.terms.iter().map(|t| t.z).max().unwrap_or(0)
    }

    /// Formal partial derivative with respect to `y_v`.
    pub fn derivative(&self, v: usize) -> Polynomial {
        let mut m: BTreeMap<(Vec<usize>, u32), BigUint> = BTreeMap::new();
        for t in &self.terms {
            let mult = t.vars.iter().filter(|&&x| x == v).count();
            if mult == 0 {
                continue;
            }
            let mut vars = t.vars.clone();
            let pos = vars.iter().position(|&x| x == v).unwrap();
            vars.remove(pos);
            *m.entry((vars, t.z)).or_default() += &t.coef * BigUint::from(mult);
        }
        Polynomial::from_map(m)
    }

    /// Numeric evaluation.
    pub fn eval(&self, z: f64, y: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|t| {
                let c: f64 = t.coef.to_string().parse().unwrap_or(f64::INFINITY);
                c * z.powi(t.z as i32) * t.vars.iter().map(|&v| y[v]).product::<f64>()
            })
            .sum()
    }

    /// Evaluation of the truncation at degree `n` with truncated series for the variables.
    pub fn eval_series(&self, n: usize, y: &[Vec<BigUint>]) -> Vec<BigUint> {
        let mut out = vec![BigUint::zero(); n + 1];
        for t in &self.terms {
            let z = t.z as usize;
            if z > n {
                continue;
            }
            let mut acc = vec![BigUint::zero(); n + 1];
            acc[z] = t.coef.clone();
            for &v in &t.vars {
                acc = series_mul(&acc, &y[v], n);
            }
            for (o, a) in out.iter_mut().zip(acc) {
                *o += a;
            }
        }
        out
    }
}

/// Product of truncated series modulo `z^{n+1}`.
pub fn series_mul(a: &[BigUint], b: &[BigUint], n: usize) -> Vec<BigUint> {
    let mut out = vec![BigUint::zero(); n + 1];
    for (i, x) in a.iter().enumerate().take(n + 1) {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate().take(n + 1 - i) {
            if !y.is_zero() {
                out[i + j] += x * y;
            }
        }
    }
    out
}

/// The polynomial system together with the root polynomials of the walk series.
#[derive(Clone, Debug, Serialize)]
pub struct PolynomialSystem {
    pub name: String,
    pub k: usize,
    pub classes: Vec<ConfigClass>,
    pub equations: Vec<Polynomial>,
    /// Root arrangements ending inside the root part.
    pub root_saw_inner: Polynomial,
    /// Root arrangements ending beyond a boundary arc.
    pub root_saw_outer: Polynomial,
    /// Root arrangements ending at a neighbour of the root vertex.
    pub root_sar: Polynomial,
}

/// Options for [`build_system`].
#[derive(Clone, Copy, Debug)]
pub struct BuildOptions {
    pub k_cap: usize,
    pub shape_cap: usize,
    pub root_cap: usize,
}

impl Default for BuildOptions {
    fn default() -> Self {
        BuildOptions { k_cap: DEFAULT_K_CAP, shape_cap: DEFAULT_SHAPE_CAP, root_cap: 5_000 }
    }
}

type RawPoly = BTreeMap<(Vec<ConfigClass>, u32), BigUint>;

/// The class a non-boring port configuration contributes as a factor,
/// expressed from the reverse arc.
fn far_class(t: &GraphTemplate, arc: ArcType, c: &Configuration) -> ConfigClass {
    let g = &t.partner[arc.0][arc.1];
    let f = c.flipped(&g.map);
    debug_assert_eq!(f.x, Side::Out);
    ConfigClass { arc: (g.part, g.port), q: f.q.expect("non-boring configurations are non-empty"), y: f.y }
}

fn monomial(
    t: &GraphTemplate,
    a: &StarArrangement,
    types: &[ArcType],
    skip: Option<usize>,
) -> (Vec<ConfigClass>, u32) {
    let mut vars: Vec<ConfigClass> = a
        .non_boring()
        .filter(|&j| Some(j) != skip)
        .map(|j| far_class(t, types[j], &a.configs[j]))
        .collect();
    vars.sort();
    (vars, a.weight as u32)
}

fn part_equations(t: &GraphTemplate, part: usize, cap: usize) -> Result<BTreeMap<ConfigClass, RawPoly>> {
    let pg = t.part_graph(part);
    let types: Vec<ArcType> = (0..pg.port_count()).map(|j| (part, j)).collect();
    let mut out: BTreeMap<ConfigClass, RawPoly> = BTreeMap::new();
    let cons = Constraints { cap, ..Default::default() };
    enumerate_star_arrangements(&pg, &cons, |a| {
        let Some(i) = a.xsel else { return };
        let c = &a.configs[i];
        if c.is_boring() {
            return;
        }
        let key = ConfigClass { arc: (part, i), q: c.q.clone().unwrap(), y: c.y };
        *out.entry(key).or_default().entry(monomial(t, a, &types, Some(i))).or_default() += 1u32;
    })?;
    Ok(out)
}

fn root_polynomials(t: &GraphTemplate, rs: &RootStar, cap: usize) -> Result<[RawPoly; 3]> {
    let pg: &PartGraph = &rs.cluster.part;
    let nbr: BTreeSet<usize> = pg.graph.out_arcs(rs.origin).iter().map(|&e| pg.graph.head(e)).collect();
    let mut polys: [RawPoly; 3] = Default::default();
    let cons = Constraints { start: Some(rs.origin), source: true, cap, ..Default::default() };
    enumerate_star_arrangements(pg, &cons, |a| {
        if a.weight == 0 {
            return;
        }
        let m = monomial(t, a, &rs.port_types, None);
        let slot = if a.ysel.is_none() { 0 } else { 1 };
        *polys[slot].entry(m.clone()).or_default() += 1u32;
        if a.ysel.is_none() && nbr.contains(&a.shape.end().unwrap()) {
            *polys[2].entry(m).or_default() += 1u32;
        }
    })?;
    Ok(polys)
}

/// Builds the pruned polynomial system of a template.
pub fn build_system(t: &GraphTemplate, opts: BuildOptions) -> Result<PolynomialSystem> {
    if t.k > opts.k_cap {
        return Err(Error::ResourceLimit(format!("adhesion size {} exceeds cap {}", t.k, opts.k_cap)));
    }
    let per_part: Vec<BTreeMap<ConfigClass, RawPoly>> = (0..t.parts.len())
        .into_par_iter()
        .map(|p| part_equations(t, p, opts.shape_cap))
        .collect::<Result<_>>()?;
    let raw: BTreeMap<ConfigClass, RawPoly> = per_part.into_iter().flatten().collect();
    let rs = root_contract(t, opts.root_cap)?;
    let roots = root_polynomials(t, &rs, opts.shape_cap)?;
    Ok(prune_unproductive(t, raw, roots))
}

/// Smallest class in the orbit of `c` under the declared symmetries.
pub fn canonical_class(t: &GraphTemplate, c: &ConfigClass) -> ConfigClass {
    let mut orbit = BTreeSet::from([c.clone()]);
    let mut stack = vec![c.clone()];
    while let Some(x) = stack.pop() {
        for g in &t.symmetries {
            let (p, j) = x.arc;
            let img = ConfigClass {
                arc: (p, g.port_map[p][j]),
                q: AdhesionWalk {
                    verts: x.q.verts.iter().map(|&v| g.pos_map[p][j][v]).collect(),
                    sides: x.q.sides.clone(),
                },
                y: x.y,
            };
            if orbit.insert(img.clone()) {
                stack.push(img);
            }
        }
    }
    orbit.into_iter().next().unwrap()
}

fn canonicalize(t: &GraphTemplate, raw: BTreeMap<ConfigClass, RawPoly>) -> BTreeMap<ConfigClass, RawPoly> {
    let mut out: BTreeMap<ConfigClass, RawPoly> = BTreeMap::new();
    for (c, p) in raw {
        let key = canonical_class(t, &c);
        if key == c || !out.contains_key(&key) {
            out.insert(key, canonicalize_poly(t, &p));
        }
    }
    out
}

fn canonicalize_poly(t: &GraphTemplate, p: &RawPoly) -> RawPoly {
    if t.symmetries.is_empty() {
        return p.clone();
    }
    let mut out = RawPoly::new();
    for ((vars, z), coef) in p {
        let mut vars: Vec<ConfigClass> = vars.iter().map(|v| canonical_class(t, v)).collect();
        vars.sort();
        *out.entry((vars, *z)).or_default() += coef;
    }
    out
}

/// Drops classes without any completion and every monomial mentioning them, then indexes the rest.
fn prune_unproductive(t: &GraphTemplate, raw: BTreeMap<ConfigClass, RawPoly>, roots: [RawPoly; 3]) -> PolynomialSystem {
    let raw = canonicalize(t, raw);
    let roots = roots.map(|p| canonicalize_poly(t, &p));
    let mut productive: BTreeSet<&ConfigClass> = BTreeSet::new();
    loop {
        let before = productive.len();
        for (c, p) in &raw {
            if !productive.contains(c) && p.keys().any(|(vars, _)| vars.iter().all(|v| productive.contains(v))) {
                productive.insert(c);
            }
        }
        if productive.len() == before {
            break;
        }
    }
    let classes: Vec<ConfigClass> = productive.into_iter().cloned().collect();
    let index: BTreeMap<&ConfigClass, usize> = classes.iter().enumerate().map(|(i, c)| (c, i)).collect();
    let convert = |p: &RawPoly| {
        let mut m: BTreeMap<(Vec<usize>, u32), BigUint> = BTreeMap::new();
        for ((vars, z), coef) in p {
            let idx: Option<Vec<usize>> = vars.iter().map(|v| index.get(v).copied()).collect();
            if let Some(mut idx) = idx {
                idx.sort_unstable();
                *m.entry((idx, *z)).or_default() += coef;
            }
        }
        Polynomial::from_map(m)
    };
    let equations = classes.iter().map(|c| convert(&raw[c])).collect();
    let [inner, outer, sar] = roots;
    PolynomialSystem {
        name: t.name.clone(),
        k: t.k,
        equations,
        root_saw_inner: convert(&inner),
        root_saw_outer: convert(&outer),
        root_sar: convert(&sar),
        classes,
    }
}

/// Generic least-fixed-point productivity pruning on an indexed system.
/// Returns the indices kept, in order.
pub fn productive_indices(equations: &[Polynomial]) -> Vec<usize> {
    let mut ok = vec![false; equations.len()];
    loop {
        let mut changed = false;
        for (c, p) in equations.iter().enumerate() {
            if !ok[c] && p.terms.iter().any(|t| t.vars.iter().all(|&v| ok[v])) {
                ok[c] = true;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    (0..equations.len()).filter(|&c| ok[c]).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum ComponentClass {
    U,
    ITransient,
    IPersistent,
}

/// Dependency digraph with strong components and their classification.
#[derive(Clone, Debug, Serialize)]
pub struct DependencyDigraph {
    pub succ: Vec<BTreeSet<usize>>,
    /// Strong components, each sorted, ordered by smallest member.
    pub components: Vec<Vec<usize>>,
    pub component_of: Vec<usize>,
    pub component_class: Vec<ComponentClass>,
    /// Components of persistent configurations. A single one unless the graph
    /// has an end fixed by its automorphisms (as for the double ray).
    pub persistent: Vec<usize>,
}

impl DependencyDigraph {
    pub fn class_of(&self, c: usize) -> ComponentClass {
        self.component_class[self.component_of[c]]
    }
    pub fn members(&self, class: ComponentClass) -> Vec<usize> {
        (0..self.component_of.len()).filter(|&c| self.class_of(c) == class).collect()
    }
}

fn reach(succ: &[BTreeSet<usize>], from: impl IntoIterator<Item = usize>) -> Vec<bool> {
    let mut seen = vec![false; succ.len()];
    let mut stack: Vec<usize> = from.into_iter().collect();
    for &s in &stack {
        seen[s] = true;
    }
    while let Some(u) = stack.pop() {
        for &w in &succ[u] {
            if !seen[w] {
                seen[w] = true;
                stack.push(w);
            }
        }
    }
    seen
}

pub fn build_dependency_digraph(sys: &PolynomialSystem) -> Result<DependencyDigraph> {
    let n = sys.classes.len();
    let succ: Vec<BTreeSet<usize>> = sys.equations.iter().map(Polynomial::variables).collect();
    for (c, s) in succ.iter().enumerate() {
        if !sys.classes[c].is_i() {
            if let Some(&d) = s.iter().find(|&&d| sys.classes[d].is_i()) {
                return Err(Error::InvariantViolation(format!(
                    "dependency from U-configuration {c} to I-configuration {d}"
                )));
            }
        }
    }
    let mut g = DiGraph::<usize, ()>::new();
    let nodes: Vec<_> = (0..n).map(|c| g.add_node(c)).collect();
    for (c, s) in succ.iter().enumerate() {
        for &d in s {
            g.add_edge(nodes[c], nodes[d], ());
        }
    }
    let mut components: Vec<Vec<usize>> = tarjan_scc(&g)
        .into_iter()
        .map(|comp| {
            let mut v: Vec<usize> = comp.into_iter().map(|x| g[x]).collect();
            v.sort_unstable();
            v
        })
        .collect();
    components.sort();
    let mut component_of = vec![0; n];
    for (i, comp) in components.iter().enumerate() {
        for &c in comp {
            component_of[c] = i;
        }
    }
    let simple: Vec<usize> = (0..n).filter(|&c| sys.classes[c].is_simple()).collect();
    let fwd = reach(&succ, simple.iter().copied());
    let mut pred = vec![BTreeSet::new(); n];
    for (c, s) in succ.iter().enumerate() {
        for &d in s {
            pred[d].insert(c);
        }
    }
    let bwd = reach(&pred, simple.iter().copied());
    let mut component_class = Vec::with_capacity(components.len());
    let mut persistent = Vec::new();
    for (i, comp) in components.iter().enumerate() {
        let c0 = comp[0];
        let class = if !sys.classes[c0].is_i() {
            ComponentClass::U
        } else if fwd[c0] && bwd[c0] {
            persistent.push(i);
            ComponentClass::IPersistent
        } else {
            ComponentClass::ITransient
        };
        component_class.push(class);
    }
    Ok(DependencyDigraph { succ, components, component_of, component_class, persistent })
}

/// `∂P_c/∂y_{c'}` for `c` in `rows` and `c'` in `cols`.
pub fn jacobian_symbolic(sys: &PolynomialSystem, rows: &[usize], cols: &[usize]) -> Vec<Vec<Polynomial>> {
    rows.iter()
        .map(|&c| cols.iter().map(|&d| sys.equations[c].derivative(d)).collect())
        .collect()
}

/// Checks that Jacobian entries between I-configurations involve only U-variables.
pub fn check_i_jacobian_structure(sys: &PolynomialSystem) -> Result<()> {
    let is: Vec<usize> = (0..sys.classes.len()).filter(|&c| sys.classes[c].is_i()).collect();
    for (r, row) in jacobian_symbolic(sys, &is, &is).iter().enumerate() {
        for p in row {
            if let Some(v) = p.variables().into_iter().find(|&v| sys.classes[v].is_i()) {
                return Err(Error::InvariantViolation(format!(
                    "Jacobian entry of {} depends on I-variable {v}",
                    is[r]
                )));
            }
        }
    }
    Ok(())
}

/// JSON dump of the system.
pub fn system_json(t: &GraphTemplate, sys: &PolynomialSystem, d: &DependencyDigraph) -> serde_json::Value {
    let term_json = |p: &Polynomial| {
        serde_json::Value::Array(
            p.terms
                .iter()
                .map(|t| serde_json::json!({"z": t.z, "vars": t.vars, "coef": t.coef.to_string()}))
                .collect(),
        )
    };
    let classes: Vec<serde_json::Value> = sys
        .classes
        .iter()
        .enumerate()
        .map(|(i, c)| {
            serde_json::json!({
                "index": i,
                "label": c.label(t),
                "class": format!("{:?}", d.class_of(i)),
                "simple": c.is_simple(),
                "polynomial": term_json(&sys.equations[i]),
            })
        })
        .collect();
    serde_json::json!({
        "name": sys.name,
        "k": sys.k,
        "classes": classes,
        "root": {
            "saw_inner": term_json(&sys.root_saw_inner),
            "saw_outer": term_json(&sys.root_saw_outer),
            "sar": term_json(&sys.root_sar),
        },
        "components": d.components.iter().zip(&d.component_class).map(|(c, k)| {
            serde_json::json!({"members": c, "class": format!("{k:?}")})
        }).collect::<Vec<_>>(),
    })
}

/// Unit polynomial helper for tests and callers assembling systems by hand.
pub fn term(z: u32, vars: &[usize], coef: u64) -> Term {
    let mut vars = vars.to_vec();
    vars.sort_unstable();
    Term { z, vars, coef: BigUint::from(coef) }
}

impl Polynomial {
    /// Canonical form: like terms merged, zero terms dropped, sorted by (vars, z).
    pub fn from_terms(terms: Vec<Term>) -> Self {
        let mut m: BTreeMap<(Vec<usize>, u32), BigUint> = BTreeMap::new();
        for mut t in terms {
            t.vars.sort_unstable();
            *m.entry((t.vars, t.z)).or_default() += t.coef;
        }
        let terms = m.into_iter().filter(|(_, c)| !c.is_zero()).map(|((vars, z), coef)| Term { z, vars, coef }).collect();
        Polynomial { terms }
    }
    pub fn one() -> Self {
        Polynomial { terms: vec![Term { z: 0, vars: Vec::new(), coef: BigUint::one() }] }
    }
}

/// Removes unproductive classes from an indexed system and renumbers the rest.
pub fn prune_system(sys: &PolynomialSystem) -> PolynomialSystem {
    let keep = productive_indices(&sys.equations);
    let mut new_index = vec![None; sys.classes.len()];
    for (i, &c) in keep.iter().enumerate() {
        new_index[c] = Some(i);
    }
    let convert = |p: &Polynomial| {
        Polynomial::from_terms(
            p.terms
                .iter()
                .filter_map(|t| {
                    let vars: Option<Vec<usize>> = t.vars.iter().map(|&v| new_index[v]).collect();
                    vars.map(|mut vars| {
                        vars.sort_unstable();
                        Term { z: t.z, vars, coef: t.coef.clone() }
                    })
                })
                .collect(),
        )
    };
    PolynomialSystem {
        name: sys.name.clone(),
        k: sys.k,
        classes: keep.iter().map(|&c| sys.classes[c].clone()).collect(),
        equations: keep.iter().map(|&c| convert(&sys.equations[c])).collect(),
        root_saw_inner: convert(&sys.root_saw_inner),
        root_saw_outer: convert(&sys.root_saw_outer),
        root_sar: convert(&sys.root_sar),
    }
}
