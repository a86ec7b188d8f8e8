//! Arrangements on finite open subtrees of a materialised patch:
//! contraction, projection and the correspondence with self-avoiding walks.
//!
//! A [`TreeArrangement`] is a list of clusters. Each cluster is a connected
//! set of part instances treated as one contracted tree vertex, carrying a
//! shape and a configuration on every tree arc leaving it.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::Serialize;
use serde_json::json;

use crate::arrangement::{
    check_star_arrangement, enumerate_star_arrangements, Configuration, Constraints, Side,
    StarArrangement,
};
use crate::error::{Error, Result};
use crate::graph_core::{ArcLabel, Walk};
use crate::template::{cluster_graph, ClusterGraph, GraphTemplate, Patch};

/// One step of a shape in global coordinates.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum GStep {
    /// A real arc of the patch graph.
    Real(usize),
    /// The virtual arc of a tree arc leaving the cluster.
    Virt(usize),
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct GWalk {
    pub verts: Vec<usize>,
    pub steps: Vec<GStep>,
}

impl GWalk {
    pub fn weight(&self) -> usize {
        self.steps.iter().filter(|s| matches!(s, GStep::Real(_))).count()
    }
    pub fn position(&self, v: usize) -> Option<usize> {
        self.verts.iter().position(|&x| x == v)
    }
    /// Sub-walk between vertex indices `i ≤ j`.
    fn sub(&self, i: usize, j: usize) -> GWalk {
        GWalk { verts: self.verts[i..=j].to_vec(), steps: self.steps[i..j].to_vec() }
    }
    /// Appends `w`, whose first vertex must equal the current last vertex.
    fn extend(&mut self, w: &GWalk) {
        if self.verts.is_empty() {
            *self = w.clone();
            return;
        }
        debug_assert_eq!(self.verts.last(), w.verts.first());
        self.verts.extend_from_slice(&w.verts[1..]);
        self.steps.extend_from_slice(&w.steps);
    }
    fn single(v: usize) -> GWalk {
        GWalk { verts: vec![v], steps: Vec::new() }
    }
    pub fn from_walk(w: &Walk) -> GWalk {
        GWalk { verts: w.verts.clone(), steps: w.arcs.iter().map(|&a| GStep::Real(a)).collect() }
    }
    /// The walk, if it uses real arcs only.
    pub fn to_walk(&self) -> Option<Walk> {
        let arcs = self
            .steps
            .iter()
            .map(|s| match s {
                GStep::Real(a) => Some(*a),
                GStep::Virt(_) => None,
            })
            .collect::<Option<Vec<_>>>()?;
        Some(Walk { verts: self.verts.clone(), arcs })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Cluster {
    pub insts: BTreeSet<usize>,
    pub shape: GWalk,
    /// Configuration on every tree arc leaving the cluster, in that arc's frame.
    pub configs: BTreeMap<usize, Configuration>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TreeArrangement {
    pub clusters: Vec<Cluster>,
}

impl TreeArrangement {
    fn normalize(mut self) -> Self {
        self.clusters.sort_by_key(|c| *c.insts.iter().next().unwrap());
        self
    }

    pub fn weight(&self) -> usize {
        self.clusters.iter().map(|c| c.shape.weight()).sum()
    }

    pub fn cluster_of(&self, inst: usize) -> Option<usize> {
        self.clusters.iter().position(|c| c.insts.contains(&inst))
    }

    /// Tree arcs from one cluster to another.
    pub fn interior_arcs(&self, patch: &Patch) -> Vec<usize> {
        let mut out = Vec::new();
        for c in &self.clusters {
            for &a in c.configs.keys() {
                if patch.arc_head(a).is_some_and(|h| self.cluster_of(h).is_some()) {
                    out.push(a);
                }
            }
        }
        out
    }

    /// Tree arcs leaving the open subtree.
    pub fn boundary_arcs(&self, patch: &Patch) -> Vec<usize> {
        let mut out = Vec::new();
        for c in &self.clusters {
            for &a in c.configs.keys() {
                if !patch.arc_head(a).is_some_and(|h| self.cluster_of(h).is_some()) {
                    out.push(a);
                }
            }
        }
        out
    }

    fn config(&self, a: usize) -> Option<&Configuration> {
        self.clusters.iter().find_map(|c| c.configs.get(&a))
    }

    /// Reduced, with every boundary configuration boring and pointing inwards.
    pub fn is_complete(&self, patch: &Patch) -> bool {
        self.interior_arcs(patch).iter().all(|&a| !self.config(a).unwrap().is_boring())
            && self.boundary_arcs(patch).iter().all(|&a| {
                let c = self.config(a).unwrap();
                c.is_boring() && c.x == Side::In
            })
    }

    /// Cluster whose entry directions all point inwards.
    pub fn source(&self) -> Option<usize> {
        self.clusters.iter().position(|c| c.configs.values().all(|k| k.x == Side::In))
    }

    /// Cluster whose exit directions all point inwards.
    pub fn target(&self) -> Option<usize> {
        self.clusters.iter().position(|c| c.configs.values().all(|k| k.y == Side::In))
    }
}

fn malformed(msg: impl Into<String>) -> Error {
    Error::MalformedArrangement(msg.into())
}

/// Converts a global shape to a walk on the cluster's part graph.
pub fn to_local(cg: &ClusterGraph, w: &GWalk) -> Result<Walk> {
    let verts: Vec<usize> = w
        .verts
        .iter()
        .map(|v| cg.local.get(v).copied().ok_or_else(|| malformed(format!("vertex {v} outside cluster"))))
        .collect::<Result<_>>()?;
    let mut arcs = Vec::with_capacity(w.steps.len());
    for (i, s) in w.steps.iter().enumerate() {
        let label = match s {
            GStep::Real(_) => ArcLabel::Real,
            GStep::Virt(a) => ArcLabel::Virtual(
                cg.port_arcs.iter().position(|x| x == a).ok_or_else(|| malformed("virtual arc of a foreign tree arc"))?,
            ),
        };
        let e = cg.part.graph.find_arc(verts[i], verts[i + 1], label).ok_or_else(|| malformed("step is not an arc"))?;
        arcs.push(e);
    }
    Ok(Walk { verts, arcs })
}

/// Converts a walk on the cluster's part graph to global coordinates.
pub fn to_global(patch: &Patch, cg: &ClusterGraph, w: &Walk) -> GWalk {
    let verts: Vec<usize> = w.verts.iter().map(|&v| cg.global[v]).collect();
    let steps = w
        .arcs
        .iter()
        .enumerate()
        .map(|(i, &e)| match cg.part.graph.label(e) {
            ArcLabel::Real => GStep::Real(patch.graph.find_arc(verts[i], verts[i + 1], ArcLabel::Real).unwrap()),
            ArcLabel::Virtual(j) => GStep::Virt(cg.port_arcs[j]),
        })
        .collect();
    GWalk { verts, steps }
}

/// The cluster as a star arrangement on its part graph.
pub fn cluster_star(patch: &Patch, c: &Cluster) -> Result<(ClusterGraph, StarArrangement)> {
    let cg = cluster_graph(patch, &c.insts);
    let shape = to_local(&cg, &c.shape)?;
    let mut configs = Vec::with_capacity(cg.port_arcs.len());
    for a in &cg.port_arcs {
        configs.push(c.configs.get(a).cloned().ok_or_else(|| malformed(format!("no configuration on arc {a}")))?);
    }
    if configs.len() != c.configs.len() {
        return Err(malformed("configuration on an arc not leaving the cluster"));
    }
    let xsel = configs.iter().position(|k| k.x == Side::Out);
    let ysel = configs.iter().position(|k| k.y == Side::Out);
    let weight = shape.arcs.iter().filter(|&&e| cg.part.graph.label(e) == ArcLabel::Real).count();
    Ok((cg, StarArrangement { shape, xsel, ysel, configs, weight }))
}

/// Checks all arrangement conditions.
pub fn check_arrangement(t: &GraphTemplate, patch: &Patch, a: &TreeArrangement) -> Result<()> {
    let mut seen = BTreeSet::new();
    for c in &a.clusters {
        for &i in &c.insts {
            if !seen.insert(i) {
                return Err(malformed(format!("instance {i} in two clusters")));
            }
        }
        let (cg, star) = cluster_star(patch, c)?;
        check_star_arrangement(&cg.part, &star).map_err(malformed)?;
    }
    for c in &a.clusters {
        for (&e, conf) in &c.configs {
            if let Some(h) = patch.arc_head(e) {
                if a.cluster_of(h).is_some() {
                    let r = patch.arc_rev(e).unwrap();
                    let (p, j) = patch.arc_type(e);
                    let other = a.config(r).ok_or_else(|| malformed("missing reverse configuration"))?;
                    if conf.flipped(&t.partner[p][j].map) != *other {
                        return Err(malformed(format!("configurations on arc {e} and its reverse differ")));
                    }
                }
            }
        }
    }
    Ok(())
}

fn side_of(inside: &BTreeSet<usize>, inst: usize) -> Side {
    if inside.contains(&inst) {
        Side::Out
    } else {
        Side::In
    }
}

/// Contracts the tree edge of `f`, merging the clusters at its two ends.
pub fn contract(t: &GraphTemplate, patch: &Patch, a: &TreeArrangement, f: usize) -> Result<TreeArrangement> {
    let i1 = a.cluster_of(patch.arc_tail(f)).ok_or_else(|| malformed("tail of f outside the arrangement"))?;
    let head = patch.arc_head(f).ok_or_else(|| malformed("head of f not materialised"))?;
    let i2 = a.cluster_of(head).ok_or_else(|| malformed("head of f outside the arrangement"))?;
    if i1 == i2 {
        return Err(malformed("f is inside a cluster"));
    }
    let (c1, c2) = (&a.clusters[i1], &a.clusters[i2]);
    let fr = patch.arc_rev(f).unwrap();
    let conf = c1.configs.get(&f).ok_or_else(|| malformed("no configuration on f"))?;
    let (p, j) = patch.arc_type(f);
    if c2.configs.get(&fr) != Some(&conf.flipped(&t.partner[p][j].map)) {
        return Err(malformed("configurations on f and its reverse differ"));
    }
    let q = conf.q.as_ref().ok_or_else(|| malformed("empty configuration on an interior arc"))?;
    let adh = patch.adhesion(f);
    let vs: Vec<usize> = q.verts.iter().map(|&x| adh[x]).collect();
    let locate = |w: &GWalk| -> Result<Vec<usize>> {
        vs.iter().map(|&v| w.position(v).ok_or_else(|| malformed("shape misses an adhesion vertex of f"))).collect()
    };
    let (pos1, pos2) = (locate(&c1.shape)?, locate(&c2.shape)?);
    let k = vs.len();
    let side = |j: usize| if j == 0 { conf.x } else if j == k { conf.y } else { q.sides[j - 1] };
    let mut merged = GWalk::default();
    for j in 0..=k {
        let (w, pos) = if side(j) == Side::Out { (&c2.shape, &pos2) } else { (&c1.shape, &pos1) };
        let piece = match j {
            0 => w.sub(0, pos[0]),
            _ if j == k => w.sub(pos[k - 1], w.verts.len() - 1),
            _ => w.sub(pos[j - 1], pos[j]),
        };
        merged.extend(&piece);
    }
    let mut configs = BTreeMap::new();
    for c in [c1, c2] {
        for (&e, conf) in &c.configs {
            if e != f && e != fr {
                configs.insert(e, conf.clone());
            }
        }
    }
    let insts = c1.insts.union(&c2.insts).copied().collect();
    let mut clusters: Vec<Cluster> =
        a.clusters.iter().enumerate().filter(|&(i, _)| i != i1 && i != i2).map(|(_, c)| c.clone()).collect();
    clusters.push(Cluster { insts, shape: merged, configs });
    Ok(TreeArrangement { clusters }.normalize())
}

/// Splits a cluster along the tree arc `f` between two of its instances.
pub fn project(t: &GraphTemplate, patch: &Patch, a: &TreeArrangement, f: usize) -> Result<TreeArrangement> {
    let u = patch.arc_tail(f);
    let w = patch.arc_head(f).ok_or_else(|| malformed("head of f not materialised"))?;
    let ci = a.cluster_of(u).ok_or_else(|| malformed("f outside the arrangement"))?;
    let c = &a.clusters[ci];
    if !c.insts.contains(&w) {
        return Err(malformed("f does not lie inside a cluster"));
    }
    // instances on the head side of f
    let mut far = BTreeSet::from([w]);
    let mut stack = vec![w];
    while let Some(x) = stack.pop() {
        for h in patch.inst_nbr[x].iter().flatten() {
            if *h != u && c.insts.contains(h) && far.insert(*h) {
                stack.push(*h);
            }
        }
    }
    let near: BTreeSet<usize> = c.insts.difference(&far).copied().collect();
    let fr = patch.arc_rev(f).unwrap();
    let adh = patch.adhesion(f);
    let shape = &c.shape;
    let idx: Vec<usize> = (0..shape.verts.len()).filter(|&i| adh.contains(&shape.verts[i])).collect();
    if idx.is_empty() {
        return Err(Error::PreconditionFailed("shape does not meet the adhesion set of f".into()));
    }
    let k = idx.len();
    let step_side = |s: &GStep| match s {
        GStep::Real(e) => side_of(&far, patch.edge_owner[e / 2]),
        GStep::Virt(b) => side_of(&far, patch.arc_tail(*b)),
    };
    let piece = |j: usize| match j {
        0 => shape.sub(0, idx[0]),
        _ if j == k => shape.sub(idx[k - 1], shape.verts.len() - 1),
        _ => shape.sub(idx[j - 1], idx[j]),
    };
    let mut sides = Vec::with_capacity(k + 1);
    for j in 0..=k {
        let p = piece(j);
        let mut s = p.steps.iter().map(step_side);
        let first = s.next();
        if let Some(f0) = first {
            if s.any(|x| x != f0) {
                return Err(malformed("a piece of the shape crosses the adhesion set"));
            }
        }
        sides.push(first);
    }
    let pick = |sel: Option<Side>, end_step: Option<&GStep>| -> Side {
        sel.or_else(|| end_step.map(step_side)).unwrap_or(Side::In)
    };
    let out_x = c.configs.iter().find(|(_, k)| k.x == Side::Out).map(|(&e, _)| side_of(&far, patch.arc_tail(e)));
    let out_y = c.configs.iter().find(|(_, k)| k.y == Side::Out).map(|(&e, _)| side_of(&far, patch.arc_tail(e)));
    let px = pick(out_x, shape.steps.first());
    let py = pick(out_y, shape.steps.last());
    let side = |j: usize| -> Side {
        if j == 0 {
            px
        } else if j == k {
            py
        } else {
            sides[j].expect("inner pieces are non-trivial")
        }
    };
    for j in [0, k] {
        if let Some(s) = sides[j] {
            if s != side(j) {
                return Err(malformed("end piece disagrees with entry or exit direction"));
            }
        }
    }
    let build = |mine: Side, virt: usize| {
        let mut out = GWalk::default();
        for j in 0..=k {
            let p = piece(j);
            let seg = if side(j) == mine {
                p
            } else if j == 0 || j == k {
                GWalk::single(if j == 0 { shape.verts[idx[0]] } else { shape.verts[idx[k - 1]] })
            } else {
                GWalk { verts: vec![p.verts[0], *p.verts.last().unwrap()], steps: vec![GStep::Virt(virt)] }
            };
            out.extend(&seg);
        }
        out
    };
    let shape_near = build(Side::In, f);
    let shape_far = build(Side::Out, fr);
    let qverts: Vec<usize> = idx.iter().map(|&i| adh.iter().position(|&v| v == shape.verts[i]).unwrap()).collect();
    let conf = Configuration {
        q: Some(crate::arrangement::AdhesionWalk { verts: qverts, sides: (1..k).map(side).collect() }),
        x: px,
        y: py,
    };
    let (p, j) = patch.arc_type(f);
    let conf_r = conf.flipped(&t.partner[p][j].map);
    let mut cfg_near = BTreeMap::from([(f, conf)]);
    let mut cfg_far = BTreeMap::from([(fr, conf_r)]);
    for (&e, k) in &c.configs {
        if near.contains(&patch.arc_tail(e)) {
            cfg_near.insert(e, k.clone());
        } else {
            cfg_far.insert(e, k.clone());
        }
    }
    let mut clusters: Vec<Cluster> =
        a.clusters.iter().enumerate().filter(|&(i, _)| i != ci).map(|(_, c)| c.clone()).collect();
    clusters.push(Cluster { insts: near, shape: shape_near, configs: cfg_near });
    clusters.push(Cluster { insts: far, shape: shape_far, configs: cfg_far });
    Ok(TreeArrangement { clusters }.normalize())
}

/// Contracts every interior tree edge, in `order` where given (remaining arcs ascending).
pub fn contract_all(t: &GraphTemplate, patch: &Patch, a: &TreeArrangement, order: &[usize]) -> Result<TreeArrangement> {
    let mut cur = a.clone();
    for &f in order {
        if cur.interior_arcs(patch).contains(&f) {
            cur = contract(t, patch, &cur, f)?;
        }
    }
    while let Some(&f) = cur.interior_arcs(patch).first() {
        cur = contract(t, patch, &cur, f)?;
    }
    Ok(cur)
}

/// The walk represented by an arrangement.
pub fn represented_walk(t: &GraphTemplate, patch: &Patch, a: &TreeArrangement, order: &[usize]) -> Result<GWalk> {
    let all = contract_all(t, patch, a, order)?;
    if all.clusters.len() != 1 {
        return Err(malformed("arrangement is not on a connected subtree"));
    }
    Ok(all.clusters.into_iter().next().unwrap().shape)
}

/// The SAW represented by a complete arrangement.
pub fn arrangement_to_saw(t: &GraphTemplate, patch: &Patch, a: &TreeArrangement) -> Result<Walk> {
    represented_walk(t, patch, a, &[])?.to_walk().ok_or_else(|| malformed("represented walk uses virtual arcs"))
}

/// Minimal subtree whose instances own every edge of `w`.
pub fn support(patch: &Patch, w: &Walk) -> BTreeSet<usize> {
    let owners: Vec<usize> = w.arcs.iter().map(|&e| patch.edge_owner[e / 2]).collect();
    let mut out = BTreeSet::new();
    for &o in &owners {
        out.extend(patch.tree_path(owners[0], o));
    }
    out
}

/// The unique complete arrangement representing a SAW of length at least 1.
pub fn saw_to_complete_arrangement(t: &GraphTemplate, patch: &Patch, w: &Walk) -> Result<TreeArrangement> {
    if w.len() == 0 {
        return Err(Error::PreconditionFailed("trivial walk".into()));
    }
    if !w.is_walk_in(&patch.graph) || !w.is_self_avoiding() {
        return Err(Error::PreconditionFailed("not a self-avoiding walk on the patch".into()));
    }
    let insts = support(patch, w);
    let cg = cluster_graph(patch, &insts);
    let local = to_local(&cg, &GWalk::from_walk(w))?;
    let star = StarArrangement::from_shape(&cg.part, local, None, None);
    let configs = cg.port_arcs.iter().copied().zip(star.configs).collect();
    let mut a = TreeArrangement { clusters: vec![Cluster { insts, shape: GWalk::from_walk(w), configs }] };
    loop {
        let Some(c) = a.clusters.iter().find(|c| c.insts.len() > 1) else { break };
        // split off the leaf of largest id
        let leaf = *c
            .insts
            .iter()
            .rev()
            .find(|&&i| patch.inst_nbr[i].iter().flatten().filter(|h| c.insts.contains(h)).count() == 1)
            .unwrap();
        let nb = patch.inst_nbr[leaf].iter().flatten().find(|h| c.insts.contains(h)).copied().unwrap();
        let f = patch.arcs_of(nb).find(|&e| patch.arc_head(e) == Some(leaf)).unwrap();
        a = project(t, patch, &a, f)?;
    }
    Ok(a)
}

/// Every arrangement on the two instances joined by the tree arc `f`
/// whose clusters each have weight at most `max_weight`.
pub fn edge_star_arrangements(
    t: &GraphTemplate,
    patch: &Patch,
    f: usize,
    max_weight: usize,
    mut visit: impl FnMut(&TreeArrangement),
) -> Result<usize> {
    let u = patch.arc_tail(f);
    let w = patch.arc_head(f).ok_or_else(|| malformed("head of f not materialised"))?;
    let fr = patch.arc_rev(f).unwrap();
    let (p, j) = patch.arc_type(f);
    let map = &t.partner[p][j].map;
    let cons = Constraints { max_weight: Some(max_weight), ..Default::default() };
    let side = |inst: usize| -> Result<Vec<Cluster>> {
        let cg = cluster_graph(patch, &BTreeSet::from([inst]));
        let mut out = Vec::new();
        enumerate_star_arrangements(&cg.part, &cons, |a| {
            out.push(Cluster {
                insts: BTreeSet::from([inst]),
                shape: to_global(patch, &cg, &a.shape),
                configs: cg.port_arcs.iter().copied().zip(a.configs.iter().cloned()).collect(),
            })
        })?;
        Ok(out)
    };
    let mut by_conf: HashMap<Configuration, Vec<Cluster>> = HashMap::new();
    for c in side(w)? {
        by_conf.entry(c.configs[&fr].clone()).or_default().push(c);
    }
    let mut count = 0;
    for c in side(u)? {
        let conf = &c.configs[&f];
        if conf.is_empty() {
            continue;
        }
        for d in by_conf.get(&conf.flipped(map)).into_iter().flatten() {
            visit(&TreeArrangement { clusters: vec![c.clone(), d.clone()] }.normalize());
            count += 1;
        }
    }
    Ok(count)
}

/// Complete arrangements of weight at most `max_weight` whose source contains `origin`,
/// found by recursive star expansion along non-boring arcs.
pub fn complete_arrangements_from(
    t: &GraphTemplate,
    patch: &Patch,
    origin: usize,
    max_weight: usize,
) -> Result<Vec<TreeArrangement>> {
    let mut search = Search { t, patch, graphs: HashMap::new(), depth_cap: 2 * (max_weight + 1) * t.parts.len() };
    let mut out = Vec::new();
    for &s0 in &patch.vertex_parts[origin] {
        let cg = search.graph(s0).clone();
        let cons = Constraints {
            start: Some(cg.local[&origin]),
            source: true,
            max_weight: Some(max_weight),
            ..Default::default()
        };
        let mut stars = Vec::new();
        enumerate_star_arrangements(&cg.part, &cons, |a| stars.push(a.clone()))?;
        for star in stars {
            for (clusters, _) in search.expand(s0, &star, None, max_weight - star.weight, 0)? {
                out.push(TreeArrangement { clusters }.normalize());
            }
        }
    }
    Ok(out)
}

struct Search<'a> {
    t: &'a GraphTemplate,
    patch: &'a Patch,
    graphs: HashMap<usize, ClusterGraph>,
    depth_cap: usize,
}

type Partial = (Vec<Cluster>, usize);

impl Search<'_> {
    fn graph(&mut self, inst: usize) -> &ClusterGraph {
        let patch = self.patch;
        self.graphs.entry(inst).or_insert_with(|| cluster_graph(patch, &BTreeSet::from([inst])))
    }

    /// All ways to complete the non-boring arcs of `star` other than `entry`, within `budget`.
    fn expand(&mut self, inst: usize, star: &StarArrangement, entry: Option<usize>, budget: usize, depth: usize) -> Result<Vec<Partial>> {
        let cg = self.graph(inst).clone();
        let cluster = Cluster {
            insts: BTreeSet::from([inst]),
            shape: to_global(self.patch, &cg, &star.shape),
            configs: cg.port_arcs.iter().copied().zip(star.configs.iter().cloned()).collect(),
        };
        let mut partial: Vec<Partial> = vec![(vec![cluster], 0)];
        for j in star.non_boring().filter(|&j| Some(j) != entry).collect::<Vec<_>>() {
            let a = cg.port_arcs[j];
            let h = self.patch.arc_head(a).ok_or(Error::HorizonExceeded { requested: budget, horizon: 0 })?;
            let r = self.patch.arc_rev(a).unwrap();
            let (p, pj) = self.patch.arc_type(a);
            let pinned = star.configs[j].flipped(&self.t.partner[p][pj].map);
            let subs = self.completions(h, r, &pinned, budget, depth + 1)?;
            let mut next = Vec::new();
            for (cs, w) in &partial {
                for (sc, sw) in &subs {
                    if w + sw <= budget {
                        let mut all = cs.clone();
                        all.extend(sc.iter().cloned());
                        next.push((all, w + sw));
                    }
                }
            }
            partial = next;
        }
        Ok(partial)
    }

    /// Completions entering `inst` through tree arc `arc` with configuration `conf`.
    fn completions(&mut self, inst: usize, arc: usize, conf: &Configuration, budget: usize, depth: usize) -> Result<Vec<Partial>> {
        if depth > self.depth_cap {
            return Err(Error::Inconclusive("completion search exceeded its depth cap".into()));
        }
        let cg = self.graph(inst).clone();
        let port = cg.port_arcs.iter().position(|&x| x == arc).unwrap();
        let cons = Constraints { pinned: Some((port, conf.clone())), max_weight: Some(budget), ..Default::default() };
        let mut stars = Vec::new();
        enumerate_star_arrangements(&cg.part, &cons, |a| stars.push(a.clone()))?;
        let mut out = Vec::new();
        for star in stars {
            for (cs, w) in self.expand(inst, &star, Some(port), budget - star.weight, depth)? {
                out.push((cs, w + star.weight));
            }
        }
        Ok(out)
    }
}

/// JSON description of an arrangement.
pub fn arrangement_json(t: &GraphTemplate, patch: &Patch, a: &TreeArrangement) -> serde_json::Value {
    let step = |s: &GStep| match s {
        GStep::Real(e) => json!({"real": [patch.graph.tail(*e), patch.graph.head(*e)]}),
        GStep::Virt(b) => json!({"virtual": *b}),
    };
    let clusters: Vec<_> = a
        .clusters
        .iter()
        .map(|c| {
            let configs: serde_json::Map<String, serde_json::Value> = c
                .configs
                .iter()
                .map(|(&e, k)| {
                    let (p, j) = patch.arc_type(e);
                    (
                        format!("{e}"),
                        json!({
                            "arc_type": format!("{}:{}", t.parts[p].id, j),
                            "adhesion": patch.adhesion(e),
                            "configuration": k.to_string(),
                            "tags": k.tags(),
                            "boundary": patch.arc_head(e).map_or(true, |h| a.cluster_of(h).is_none()),
                        }),
                    )
                })
                .collect();
            json!({
                "instances": c.insts.iter().map(|&i| json!({"id": i, "part": t.parts[patch.inst_part[i]].id})).collect::<Vec<_>>(),
                "shape": {"vertices": c.shape.verts, "steps": c.shape.steps.iter().map(step).collect::<Vec<_>>()},
                "weight": c.shape.weight(),
                "configs": configs,
            })
        })
        .collect();
    json!({
        "weight": a.weight(),
        "complete": a.is_complete(patch),
        "source": a.source(),
        "target": a.target(),
        "clusters": clusters,
    })
}
