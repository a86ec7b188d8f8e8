//! Tree-decomposition templates: parsing, validation, patch materialisation
//! and the contracted root part.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet, VecDeque};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph_core::{bfs_distances, ArcLabel, Digraph};

/// Default cap on materialised part instances.
pub const DEFAULT_INSTANCE_CAP: usize = 4_000_000;

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct PartTypeSpec {
    pub id: String,
    pub n: usize,
    pub edges: Vec<[usize; 2]>,
    pub ports: Vec<Vec<usize>>,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct GluingSpec {
    pub a: (String, usize),
    pub b: (String, usize),
    pub map: Vec<usize>,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct RootSpec {
    pub part: String,
    pub vertex: usize,
}

/// A template automorphism: a vertex permutation per part type (identity when omitted).
#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct SymmetrySpec {
    pub perms: BTreeMap<String, Vec<usize>>,
}

/// The template file as written on disk.
#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct TemplateSpec {
    pub name: String,
    #[serde(rename = "classA")]
    pub class_a: Vec<PartTypeSpec>,
    #[serde(rename = "classB")]
    pub class_b: Vec<PartTypeSpec>,
    pub gluing: Vec<GluingSpec>,
    pub root: RootSpec,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub symmetries: Vec<SymmetrySpec>,
}

impl TemplateSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Template(e.to_string()))
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    fn all_parts(&self) -> impl Iterator<Item = (u8, &PartTypeSpec)> {
        self.class_a.iter().map(|p| (0u8, p)).chain(self.class_b.iter().map(|p| (1u8, p)))
    }
}

/// Outcome of [`validate_template`]; valid iff `violations` is empty.
#[derive(Clone, Debug, Serialize)]
pub struct ValidationReport {
    pub name: String,
    pub valid: bool,
    pub adhesion_size: Option<usize>,
    pub violations: Vec<String>,
}

fn part_connected(p: &PartTypeSpec) -> bool {
    if p.n == 0 {
        return false;
    }
    let mut adj = vec![Vec::new(); p.n];
    for &[u, v] in &p.edges {
        adj[u].push(v);
        adj[v].push(u);
    }
    for port in &p.ports {
        for w in port.windows(2) {
            adj[w[0]].push(w[1]);
            adj[w[1]].push(w[0]);
        }
    }
    let mut seen = vec![false; p.n];
    let mut stack = vec![0];
    seen[0] = true;
    while let Some(u) = stack.pop() {
        for &w in &adj[u] {
            if !seen[w] {
                seen[w] = true;
                stack.push(w);
            }
        }
    }
    seen.into_iter().all(|s| s)
}

fn is_permutation(map: &[usize], k: usize) -> bool {
    let mut seen = vec![false; k];
    map.len() == k && map.iter().all(|&m| m < k && !std::mem::replace(&mut seen[m], true))
}

fn structural_violations(spec: &TemplateSpec) -> (Vec<String>, Option<usize>) {
    let mut v = Vec::new();
    if spec.class_a.is_empty() || spec.class_b.is_empty() {
        v.push("both bipartition classes must be non-empty".to_string());
    }
    let mut ids: HashMap<&str, (u8, &PartTypeSpec)> = HashMap::new();
    for (class, p) in spec.all_parts() {
        if ids.insert(p.id.as_str(), (class, p)).is_some() {
            v.push(format!("duplicate part id {:?}", p.id));
        }
    }
    let mut sizes = BTreeSet::new();
    let mut local_ok = true;
    for (_, p) in spec.all_parts() {
        if p.n == 0 {
            v.push(format!("part {:?} has no vertices", p.id));
            local_ok = false;
            continue;
        }
        let mut seen_edges = HashSet::new();
        for &[a, b] in &p.edges {
            if a >= p.n || b >= p.n {
                v.push(format!("part {:?}: edge [{a},{b}] out of range", p.id));
                local_ok = false;
            } else if a == b {
                v.push(format!("part {:?}: loop at {a}", p.id));
                local_ok = false;
            } else if !seen_edges.insert((a.min(b), a.max(b))) {
                v.push(format!("part {:?}: duplicate edge [{a},{b}]", p.id));
            }
        }
        if p.ports.is_empty() {
            v.push(format!("part {:?} has no ports", p.id));
        }
        for (j, port) in p.ports.iter().enumerate() {
            sizes.insert(port.len());
            if port.iter().any(|&x| x >= p.n) {
                v.push(format!("part {:?}: port {j} vertex out of range", p.id));
                local_ok = false;
            }
            let distinct: HashSet<_> = port.iter().collect();
            if distinct.len() != port.len() {
                v.push(format!("part {:?}: port {j} repeats a vertex", p.id));
            }
        }
        if local_ok && !part_connected(p) {
            v.push(format!("part {:?}: part graph is disconnected", p.id));
        }
    }
    let k = if sizes.len() == 1 { sizes.iter().next().copied() } else { None };
    if sizes.len() > 1 {
        v.push(format!("port sizes differ: {:?}", sizes.iter().collect::<Vec<_>>()));
    }
    if sizes.contains(&0) {
        v.push("ports must be non-empty".to_string());
    }
    let mut used: HashMap<(String, usize), usize> = HashMap::new();
    for (gi, g) in spec.gluing.iter().enumerate() {
        let mut sides = Vec::new();
        for (name, port) in [&g.a, &g.b] {
            match ids.get(name.as_str()) {
                None => v.push(format!("gluing {gi}: unknown part {name:?}")),
                Some((class, p)) => {
                    if *port >= p.ports.len() {
                        v.push(format!("gluing {gi}: part {name:?} has no port {port}"));
                    } else {
                        *used.entry((name.clone(), *port)).or_default() += 1;
                        sides.push((*class, *p));
                    }
                }
            }
        }
        if let [(ca, pa), (cb, pb)] = sides[..] {
            if ca == cb {
                v.push(format!("gluing {gi}: self-gluing within one bipartition class"));
            }
            if let Some(k) = k {
                if !is_permutation(&g.map, k) {
                    v.push(format!("gluing {gi}: map is not a permutation of 0..{k}"));
                }
                if pa.n == k && pb.n == k {
                    v.push(format!("gluing {gi}: adjacent parts {:?} and {:?} coincide", pa.id, pb.id));
                }
            }
        }
    }
    for (_, p) in spec.all_parts() {
        for j in 0..p.ports.len() {
            match used.get(&(p.id.clone(), j)).copied().unwrap_or(0) {
                1 => {}
                0 => v.push(format!("part {:?} port {j} is not glued", p.id)),
                c => v.push(format!("part {:?} port {j} occurs in {c} gluing pairs", p.id)),
            }
        }
    }
    match ids.get(spec.root.part.as_str()) {
        None => v.push(format!("root part {:?} unknown", spec.root.part)),
        Some((_, p)) if spec.root.vertex >= p.n => v.push("root vertex out of range".to_string()),
        _ => {}
    }
    for (si, s) in spec.symmetries.iter().enumerate() {
        for (name, perm) in &s.perms {
            let Some((_, p)) = ids.get(name.as_str()) else {
                v.push(format!("symmetry {si}: unknown part {name:?}"));
                continue;
            };
            if !is_permutation(perm, p.n) {
                v.push(format!("symmetry {si}: permutation of {name:?} is invalid"));
                continue;
            }
            let edges: HashSet<(usize, usize)> =
                p.edges.iter().map(|&[a, b]| (a.min(b), a.max(b))).collect();
            let preserves_edges = p.edges.iter().all(|&[a, b]| {
                let (x, y) = (perm[a], perm[b]);
                edges.contains(&(x.min(y), x.max(y)))
            });
            let sorted = |q: &[usize]| {
                let mut q = q.to_vec();
                q.sort_unstable();
                q
            };
            let port_sets: HashSet<Vec<usize>> = p.ports.iter().map(|q| sorted(q)).collect();
            let preserves_ports = p.ports.iter().all(|q| {
                let img: Vec<usize> = q.iter().map(|&x| perm[x]).collect();
                port_sets.contains(&sorted(&img))
            });
            if !preserves_edges || !preserves_ports {
                v.push(format!("symmetry {si}: permutation of {name:?} does not preserve the part"));
            }
        }
    }
    (v, k)
}

/// Checks the standing assumptions on a template. An empty violation list means valid.
pub fn validate_template(spec: &TemplateSpec) -> ValidationReport {
    let (mut violations, k) = structural_violations(spec);
    if violations.is_empty() {
        let t = GraphTemplate::index(spec, k.unwrap());
        violations.extend(t.symmetry_violations());
        if let Err(e) = build_patch(&t, 4, 200_000) {
            violations.push(e.to_string());
        }
    }
    ValidationReport {
        name: spec.name.clone(),
        valid: violations.is_empty(),
        adhesion_size: k,
        violations,
    }
}

/// Bipartition class of a part type.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Class {
    A,
    B,
}

#[derive(Clone, Debug, Serialize)]
pub struct PartType {
    pub id: String,
    pub class: Class,
    pub n: usize,
    pub edges: Vec<(usize, usize)>,
    pub ports: Vec<Vec<usize>>,
}

/// Partner of a `(part, port)`: the port it is glued to and the positional map.
#[derive(Clone, Debug, Serialize)]
pub struct Glue {
    pub part: usize,
    pub port: usize,
    /// `map[i]` is the position in the partner port matching position `i` here.
    pub map: Vec<usize>,
}

/// An oriented tree-arc type: leaving an instance of `part` through `port`.
pub type ArcType = (usize, usize);

/// A validated template with integer indices.
#[derive(Clone, Debug, Serialize)]
pub struct GraphTemplate {
    pub name: String,
    pub k: usize,
    pub parts: Vec<PartType>,
    pub partner: Vec<Vec<Glue>>,
    pub root_part: usize,
    pub root_vertex: usize,
    pub symmetries: Vec<Symmetry>,
}

/// Action of a template automorphism on part vertices, ports and port positions.
#[derive(Clone, Debug, Serialize)]
pub struct Symmetry {
    pub perm: Vec<Vec<usize>>,
    pub port_map: Vec<Vec<usize>>,
    /// `pos_map[p][j][a]`: position in port `port_map[p][j]` of the image of position `a`.
    pub pos_map: Vec<Vec<Vec<usize>>>,
}

impl GraphTemplate {
    pub fn from_spec(spec: &TemplateSpec) -> Result<Self> {
        let report = validate_template(spec);
        if !report.valid {
            return Err(Error::InvalidTemplate(report.violations));
        }
        Ok(Self::index(spec, report.adhesion_size.unwrap()))
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_spec(&TemplateSpec::from_path(path)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Self::from_spec(&TemplateSpec::from_json(text)?)
    }

    fn index(spec: &TemplateSpec, k: usize) -> Self {
        let parts: Vec<PartType> = spec
            .all_parts()
            .map(|(c, p)| PartType {
                id: p.id.clone(),
                class: if c == 0 { Class::A } else { Class::B },
                n: p.n,
                edges: p.edges.iter().map(|&[a, b]| (a, b)).collect(),
                ports: p.ports.clone(),
            })
            .collect();
        let idx: HashMap<&str, usize> =
            spec.all_parts().enumerate().map(|(i, (_, p))| (p.id.as_str(), i)).collect();
        let mut partner: Vec<Vec<Option<Glue>>> =
            parts.iter().map(|p| vec![None; p.ports.len()]).collect();
        for g in &spec.gluing {
            let (pa, ja) = (idx[g.a.0.as_str()], g.a.1);
            let (pb, jb) = (idx[g.b.0.as_str()], g.b.1);
            let mut inv = vec![0; k];
            for (i, &m) in g.map.iter().enumerate() {
                inv[m] = i;
            }
            partner[pa][ja] = Some(Glue { part: pb, port: jb, map: g.map.clone() });
            partner[pb][jb] = Some(Glue { part: pa, port: ja, map: inv });
        }
        GraphTemplate {
            name: spec.name.clone(),
            k,
            partner: partner
                .into_iter()
                .map(|v| v.into_iter().map(|g| g.expect("validated gluing")).collect())
                .collect(),
            parts,
            root_part: idx[spec.root.part.as_str()],
            root_vertex: spec.root.vertex,
            symmetries: spec
                .symmetries
                .iter()
                .map(|sym| Symmetry::index(spec, &idx, sym))
                .collect(),
        }
    }

    /// Gluing compatibility of the declared symmetries.
    fn symmetry_violations(&self) -> Vec<String> {
        let mut v = Vec::new();
        for (si, g) in self.symmetries.iter().enumerate() {
            for (a, ports) in self.partner.iter().enumerate() {
                for (i, glue) in ports.iter().enumerate() {
                    let (i2, j2) = (g.port_map[a][i], g.port_map[glue.part][glue.port]);
                    let img = &self.partner[a][i2];
                    let ok = img.part == glue.part
                        && img.port == j2
                        && (0..self.k).all(|p| {
                            img.map[g.pos_map[a][i][p]] == g.pos_map[glue.part][glue.port][glue.map[p]]
                        });
                    if !ok {
                        v.push(format!(
                            "symmetry {si} is incompatible with the gluing at {}:{i}",
                            self.parts[a].id
                        ));
                    }
                }
            }
        }
        v
    }

    /// The reverse arc type of `(part, port)`.
    pub fn flip(&self, (part, port): ArcType) -> ArcType {
        let g = &self.partner[part][port];
        (g.part, g.port)
    }

    /// All arc types in lexicographic order.
    pub fn arc_types(&self) -> Vec<ArcType> {
        self.parts
            .iter()
            .enumerate()
            .flat_map(|(p, t)| (0..t.ports.len()).map(move |j| (p, j)))
            .collect()
    }

    /// Part graph of a part type: owned edges plus the virtual arcs of every port.
    pub fn part_graph(&self, part: usize) -> PartGraph {
        let p = &self.parts[part];
        PartGraph::new(p.n, &p.edges, p.ports.clone())
    }
}

/// A finite part graph: real edges first, then for each port the complete
/// graph of virtual arcs on its vertices, labelled by the port index.
#[derive(Clone, Debug)]
pub struct PartGraph {
    pub graph: Digraph,
    pub ports: Vec<Vec<usize>>,
    /// For each vertex the `(port, position)` pairs it occupies.
    pub port_pos: Vec<Vec<(usize, usize)>>,
}

impl PartGraph {
    pub fn new(n: usize, edges: &[(usize, usize)], ports: Vec<Vec<usize>>) -> Self {
        let mut graph = Digraph::new(n);
        for &(u, v) in edges {
            graph.add_edge(u, v, ArcLabel::Real);
        }
        let mut port_pos = vec![Vec::new(); n];
        for (j, port) in ports.iter().enumerate() {
            for (a, &u) in port.iter().enumerate() {
                port_pos[u].push((j, a));
                for &v in &port[a + 1..] {
                    graph.add_edge(u, v, ArcLabel::Virtual(j));
                }
            }
        }
        PartGraph { graph, ports, port_pos }
    }

    pub fn port_count(&self) -> usize {
        self.ports.len()
    }

    /// Position of `v` in port `j`, if it belongs to it.
    pub fn position(&self, j: usize, v: usize) -> Option<usize> {
        self.port_pos[v].iter().find(|&&(p, _)| p == j).map(|&(_, a)| a)
    }

    /// The virtual arc of port `j` from position `a` to position `b`.
    pub fn virtual_arc(&self, j: usize, a: usize, b: usize) -> usize {
        let (u, v) = (self.ports[j][a], self.ports[j][b]);
        self.graph.find_arc(u, v, ArcLabel::Virtual(j)).expect("virtual arc exists")
    }
}

/// Whether counts on a patch are exact up to some length.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Horizon {
    Finite(usize),
    Unbounded,
}

impl Horizon {
    pub fn covers(&self, n: usize) -> bool {
        match self {
            Horizon::Finite(h) => n <= *h,
            Horizon::Unbounded => true,
        }
    }
}

/// A materialised finite piece of the decomposition and of the graph.
#[derive(Clone, Debug)]
pub struct Patch {
    pub graph: Digraph,
    pub origin: usize,
    pub radius: usize,
    pub inst_part: Vec<usize>,
    pub inst_depth: Vec<usize>,
    pub inst_parent: Vec<Option<usize>>,
    pub inst_verts: Vec<Vec<usize>>,
    pub inst_nbr: Vec<Vec<Option<usize>>>,
    pub inst_edges: Vec<Vec<usize>>,
    /// Owning instance of every edge (indexed by arc id / 2).
    pub edge_owner: Vec<usize>,
    pub vertex_parts: Vec<Vec<usize>>,
    arc_offset: Vec<usize>,
    arc_inst: Vec<usize>,
    ports: Vec<Vec<Vec<usize>>>,
    partner_port: Vec<Vec<usize>>,
}

/// Breadth-first materialisation of all part instances within `radius` tree steps of the root.
pub fn build_patch(t: &GraphTemplate, radius: usize, cap: usize) -> Result<Patch> {
    let mut p = Patch {
        graph: Digraph::new(0),
        origin: 0,
        radius,
        inst_part: Vec::new(),
        inst_depth: Vec::new(),
        inst_parent: Vec::new(),
        inst_verts: Vec::new(),
        inst_nbr: Vec::new(),
        inst_edges: Vec::new(),
        edge_owner: Vec::new(),
        vertex_parts: Vec::new(),
        arc_offset: Vec::new(),
        arc_inst: Vec::new(),
        ports: t.parts.iter().map(|p| p.ports.clone()).collect(),
        partner_port: t.partner.iter().map(|v| v.iter().map(|g| g.port).collect()).collect(),
    };
    let mut seen_edges: HashSet<(usize, usize)> = HashSet::new();
    let mut add = |p: &mut Patch, part: usize, depth: usize, parent: Option<(usize, usize)>| -> Result<usize> {
        let id = p.inst_part.len();
        if id >= cap {
            return Err(Error::ResourceLimit(format!("patch exceeds {cap} part instances")));
        }
        let ty = &t.parts[part];
        let mut verts = vec![usize::MAX; ty.n];
        let mut nbr = vec![None; ty.ports.len()];
        if let Some((pi, pj)) = parent {
            let glue = &t.partner[p.inst_part[pi]][pj];
            let parent_port = &ty_port(t, p.inst_part[pi], pj);
            for (a, &pv) in parent_port.iter().enumerate() {
                verts[ty.ports[glue.port][glue.map[a]]] = p.inst_verts[pi][pv];
            }
            nbr[glue.port] = Some(pi);
            p.inst_nbr[pi][pj] = Some(id);
        }
        for v in verts.iter_mut().filter(|v| **v == usize::MAX) {
            *v = p.graph.add_vertex();
            p.vertex_parts.push(Vec::new());
        }
        let mut edges = Vec::new();
        for &(a, b) in &ty.edges {
            let (u, w) = (verts[a], verts[b]);
            if !seen_edges.insert((u.min(w), u.max(w))) {
                return Err(Error::Template(format!(
                    "edge between template vertices {a},{b} of part {:?} is declared twice",
                    ty.id
                )));
            }
            let e = p.graph.add_edge(u, w, ArcLabel::Real);
            p.edge_owner.push(id);
            edges.push(e / 2);
        }
        for &v in &verts {
            p.vertex_parts[v].push(id);
        }
        p.arc_offset.push(p.arc_inst.len());
        p.arc_inst.extend(std::iter::repeat(id).take(ty.ports.len()));
        p.inst_part.push(part);
        p.inst_depth.push(depth);
        p.inst_parent.push(parent.map(|(pi, _)| pi));
        p.inst_verts.push(verts);
        p.inst_nbr.push(nbr);
        p.inst_edges.push(edges);
        Ok(id)
    };
    let root = add(&mut p, t.root_part, 0, None)?;
    p.origin = p.inst_verts[root][t.root_vertex];
    let mut queue = VecDeque::from([root]);
    while let Some(i) = queue.pop_front() {
        if p.inst_depth[i] >= radius {
            continue;
        }
        for j in 0..p.inst_nbr[i].len() {
            if p.inst_nbr[i][j].is_none() {
                let child_part = t.partner[p.inst_part[i]][j].part;
                let depth = p.inst_depth[i] + 1;
                let c = add(&mut p, child_part, depth, Some((i, j)))?;
                queue.push_back(c);
            }
        }
    }
    Ok(p)
}

impl Symmetry {
    fn index(spec: &TemplateSpec, idx: &HashMap<&str, usize>, sym: &SymmetrySpec) -> Self {
        let parts: Vec<&PartTypeSpec> = spec.all_parts().map(|(_, p)| p).collect();
        let mut perm: Vec<Vec<usize>> = parts.iter().map(|p| (0..p.n).collect()).collect();
        for (name, pm) in &sym.perms {
            perm[idx[name.as_str()]] = pm.clone();
        }
        let mut port_map = Vec::new();
        let mut pos_map = Vec::new();
        for (pi, p) in parts.iter().enumerate() {
            let sorted = |q: &[usize]| {
                let mut q = q.to_vec();
                q.sort_unstable();
                q
            };
            let mut pm = Vec::new();
            let mut pos = Vec::new();
            for (j, q) in p.ports.iter().enumerate() {
                let img: Vec<usize> = q.iter().map(|&x| perm[pi][x]).collect();
                let target = sorted(&img);
                // a port mapped onto its own vertex set keeps its index
                let j2 = if sorted(q) == target {
                    j
                } else {
                    p.ports.iter().position(|r| sorted(r) == target).unwrap_or(j)
                };
                pos.push(
                    img.iter()
                        .map(|x| p.ports[j2].iter().position(|y| y == x).unwrap_or(0))
                        .collect(),
                );
                pm.push(j2);
            }
            port_map.push(pm);
            pos_map.push(pos);
        }
        Symmetry { perm, port_map, pos_map }
    }
}

fn ty_port(t: &GraphTemplate, part: usize, port: usize) -> Vec<usize> {
    t.parts[part].ports[port].clone()
}

impl Patch {
    pub fn instance_count(&self) -> usize {
        self.inst_part.len()
    }
    pub fn tree_arc_count(&self) -> usize {
        self.arc_inst.len()
    }
    /// Tree arc leaving instance `inst` through `port`.
    pub fn tree_arc(&self, inst: usize, port: usize) -> usize {
        self.arc_offset[inst] + port
    }
    pub fn arc_tail(&self, a: usize) -> usize {
        self.arc_inst[a]
    }
    pub fn arc_port(&self, a: usize) -> usize {
        a - self.arc_offset[self.arc_inst[a]]
    }
    pub fn arc_head(&self, a: usize) -> Option<usize> {
        self.inst_nbr[self.arc_tail(a)][self.arc_port(a)]
    }
    pub fn arc_type(&self, a: usize) -> ArcType {
        (self.inst_part[self.arc_tail(a)], self.arc_port(a))
    }
    /// Reverse tree arc, when the head instance is materialised.
    pub fn arc_rev(&self, a: usize) -> Option<usize> {
        let (part, port) = self.arc_type(a);
        self.arc_head(a).map(|h| self.tree_arc(h, self.partner_port[part][port]))
    }
    /// Adhesion vertices of `a` in the port order of its tail.
    pub fn adhesion(&self, a: usize) -> Vec<usize> {
        let t = self.arc_tail(a);
        self.ports[self.inst_part[t]][self.arc_port(a)].iter().map(|&v| self.inst_verts[t][v]).collect()
    }
    /// Outgoing tree arcs of an instance.
    pub fn arcs_of(&self, inst: usize) -> std::ops::Range<usize> {
        self.arc_offset[inst]..self.arc_offset[inst] + self.inst_nbr[inst].len()
    }
    /// Instance owning the edge `u v`, if that edge exists.
    pub fn owner(&self, u: usize, v: usize) -> Option<usize> {
        self.graph.find_arc(u, v, ArcLabel::Real).map(|e| self.edge_owner[e / 2])
    }
    /// Vertices lying in an adhesion set whose far side is not materialised.
    pub fn dangling_vertices(&self) -> BTreeSet<usize> {
        let mut out = BTreeSet::new();
        for a in 0..self.tree_arc_count() {
            if self.arc_head(a).is_none() {
                out.extend(self.adhesion(a));
            }
        }
        out
    }
    /// Instances on the tree path from `a` to `b`, inclusive.
    pub fn tree_path(&self, mut a: usize, mut b: usize) -> Vec<usize> {
        let (mut left, mut right) = (Vec::new(), Vec::new());
        while a != b {
            if self.inst_depth[a] >= self.inst_depth[b] {
                left.push(a);
                a = self.inst_parent[a].unwrap();
            } else {
                right.push(b);
                b = self.inst_parent[b].unwrap();
            }
        }
        left.push(a);
        left.extend(right.into_iter().rev());
        left
    }
}

/// Largest `n` for which walk counts from `origin` on the patch equal those on the infinite graph.
pub fn exact_horizon(patch: &Patch, origin: usize) -> Horizon {
    let dangling = patch.dangling_vertices();
    if dangling.is_empty() {
        return Horizon::Unbounded;
    }
    let dist = bfs_distances(&patch.graph, origin);
    match dangling.iter().filter_map(|&v| dist[v]).min() {
        Some(d) => Horizon::Finite(d.saturating_sub(1)),
        None => Horizon::Unbounded,
    }
}

/// Smallest patch (by tree radius) whose exact horizon at the root vertex reaches `n`.
pub fn patch_for_horizon(t: &GraphTemplate, n: usize, cap: usize) -> Result<Patch> {
    let mut r = 0;
    loop {
        let p = build_patch(t, r, cap)?;
        let h = exact_horizon(&p, p.origin);
        if h.covers(n) {
            return Ok(p);
        }
        if h == Horizon::Finite(0) && r > 4 * (n + 2) * t.parts.len().max(1) {
            return Err(Error::ResourceLimit("horizon does not grow with the radius".into()));
        }
        r += 1;
    }
}

/// Part graph of a set of instances merged into one vertex of the tree.
#[derive(Clone, Debug)]
pub struct ClusterGraph {
    pub part: PartGraph,
    /// Local vertex id to global vertex id.
    pub global: Vec<usize>,
    pub local: HashMap<usize, usize>,
    /// Tree arc leaving the cluster for each port of `part`.
    pub port_arcs: Vec<usize>,
}

/// Builds the merged part graph of `insts`.
pub fn cluster_graph(patch: &Patch, insts: &BTreeSet<usize>) -> ClusterGraph {
    let mut verts = BTreeSet::new();
    for &i in insts {
        verts.extend(patch.inst_verts[i].iter().copied());
    }
    let global: Vec<usize> = verts.into_iter().collect();
    let local: HashMap<usize, usize> = global.iter().enumerate().map(|(i, &g)| (g, i)).collect();
    let mut edges = Vec::new();
    for &i in insts {
        for &e in &patch.inst_edges[i] {
            let (u, v) = (patch.graph.tail(2 * e), patch.graph.head(2 * e));
            edges.push((local[&u], local[&v]));
        }
    }
    let mut ports = Vec::new();
    let mut port_arcs = Vec::new();
    for &i in insts {
        for a in patch.arcs_of(i) {
            if patch.arc_head(a).map_or(true, |h| !insts.contains(&h)) {
                ports.push(patch.adhesion(a).iter().map(|v| local[v]).collect());
                port_arcs.push(a);
            }
        }
    }
    ClusterGraph { part: PartGraph::new(global.len(), &edges, ports), global, local, port_arcs }
}

/// The merged root part around the root vertex.
#[derive(Clone, Debug)]
pub struct RootStar {
    pub patch: Patch,
    pub insts: BTreeSet<usize>,
    pub cluster: ClusterGraph,
    /// Local id of the root vertex.
    pub origin: usize,
    /// Arc type of each boundary port.
    pub port_types: Vec<ArcType>,
}

#[derive(Clone, Debug, Serialize)]
pub struct RootStarSummary {
    pub instances: usize,
    pub vertices: usize,
    pub edges: usize,
    pub boundary_arcs: usize,
    pub boundary_types: BTreeMap<String, usize>,
}

impl RootStar {
    pub fn summary(&self, t: &GraphTemplate) -> RootStarSummary {
        let mut types = BTreeMap::new();
        for &(p, j) in &self.port_types {
            *types.entry(format!("{}:{}", t.parts[p].id, j)).or_default() += 1;
        }
        RootStarSummary {
            instances: self.insts.len(),
            vertices: self.cluster.global.len(),
            edges: self.cluster.part.graph.arc_count() / 2
                - self.cluster.part.ports.iter().map(|p| p.len() * (p.len() - 1) / 2).sum::<usize>(),
            boundary_arcs: self.port_types.len(),
            boundary_types: types,
        }
    }
}

/// Merges all parts lying inside the radius-2 ball around the root vertex,
/// extended until every edge at distance at most 1 from the root is internal
/// and no boundary adhesion set meets the closed neighbourhood of the root.
pub fn root_contract(t: &GraphTemplate, cap: usize) -> Result<RootStar> {
    let mut r = 1;
    let patch = loop {
        let p = build_patch(t, r, DEFAULT_INSTANCE_CAP)?;
        if exact_horizon(&p, p.origin).covers(4) {
            break p;
        }
        r += 1;
        if r > 64 {
            return Err(Error::ResourceLimit("root neighbourhood does not fit a patch".into()));
        }
    };
    let dist = bfs_distances(&patch.graph, patch.origin);
    let near = |v: usize, d: usize| dist[v].is_some_and(|x| x <= d);
    let candidate: BTreeSet<usize> = (0..patch.instance_count())
        .filter(|&i| i == 0 || patch.inst_verts[i].iter().all(|&v| near(v, 2)))
        .collect();
    let mut s = BTreeSet::from([0usize]);
    let mut stack = vec![0usize];
    while let Some(i) = stack.pop() {
        for h in patch.inst_nbr[i].iter().flatten() {
            if candidate.contains(h) && s.insert(*h) {
                stack.push(*h);
            }
        }
    }
    for e in (0..patch.graph.arc_count()).step_by(2) {
        let (u, v) = (patch.graph.tail(e), patch.graph.head(e));
        if near(u, 1) || near(v, 1) {
            s.extend(patch.tree_path(0, patch.edge_owner[e / 2]));
        }
    }
    loop {
        let mut grow = None;
        'outer: for &i in &s {
            for a in patch.arcs_of(i) {
                match patch.arc_head(a) {
                    Some(h) if s.contains(&h) => {}
                    h => {
                        if patch.adhesion(a).iter().any(|&v| near(v, 1)) {
                            grow = Some(h.ok_or_else(|| {
                                Error::ResourceLimit("root part reaches the patch boundary".into())
                            })?);
                            break 'outer;
                        }
                    }
                }
            }
        }
        match grow {
            Some(h) => {
                s.insert(h);
            }
            None => break,
        }
        if s.len() > cap {
            return Err(Error::ResourceLimit(format!("root part exceeds {cap} instances")));
        }
    }
    let cluster = cluster_graph(&patch, &s);
    if cluster.global.len() > cap {
        return Err(Error::ResourceLimit(format!("root part exceeds {cap} vertices")));
    }
    let origin = cluster.local[&patch.origin];
    let port_types = cluster.port_arcs.iter().map(|&a| patch.arc_type(a)).collect();
    Ok(RootStar { patch, insts: s, cluster, origin, port_types })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn load(name: &str) -> GraphTemplate {
        let path = format!("{}/../../data/{name}.json", env!("CARGO_MANIFEST_DIR"));
        GraphTemplate::from_path(path).unwrap()
    }

    #[test]
    fn arcs_roundtrip() {
        let t = load("triangle_edge");
        let p = build_patch(&t, 4, 10_000).unwrap();
        for a in 0..p.tree_arc_count() {
            if let Some(r) = p.arc_rev(a) {
                assert_eq!(p.arc_rev(r), Some(a));
                let mut x = p.adhesion(a);
                let mut y = p.adhesion(r);
                x.sort();
                y.sort();
                assert_eq!(x, y);
            }
        }
    }

    #[test]
    fn tree_path_endpoints() {
        let t = load("t3");
        let p = build_patch(&t, 4, 10_000).unwrap();
        let last = p.instance_count() - 1;
        let path = p.tree_path(last, 5);
        assert_eq!(path.first(), Some(&last));
        assert_eq!(path.last(), Some(&5));
    }

    #[test]
    fn root_star_sizes() {
        for (name, verts, arcs) in [("t3", 10, 12), ("double_ray", 5, 2)] {
            let t = load(name);
            let rs = root_contract(&t, 10_000).unwrap();
            let s = rs.summary(&t);
            assert_eq!((s.vertices, s.boundary_arcs), (verts, arcs), "{name}");
        }
    }
}
