//! Finite digraphs with an explicit reversal involution, walks, and
//! exhaustive enumeration of self-avoiding walks, returns and polygons.

use std::collections::VecDeque;

use rayon::prelude::*;
use serde::Serialize;

pub type VertexId = usize;
pub type ArcId = usize;

/// Label attached to an arc. Virtual arcs remember the port they belong to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum ArcLabel {
    Real,
    Virtual(usize),
}

/// Digraph whose arcs come in reversal pairs `2i, 2i+1`.
///
/// Parallel arcs are allowed, loops are not.
#[derive(Clone, Debug, Default)]
pub struct Digraph {
    n: usize,
    tail: Vec<VertexId>,
    head: Vec<VertexId>,
    label: Vec<ArcLabel>,
    out: Vec<Vec<ArcId>>,
}

impl Digraph {
    pub fn new(n: usize) -> Self {
        Digraph { n, out: vec![Vec::new(); n], ..Default::default() }
    }

    pub fn add_vertex(&mut self) -> VertexId {
        self.n += 1;
        self.out.push(Vec::new());
        self.n - 1
    }

    /// Adds the arc `u -> v` and its reversal; returns the id of `u -> v`.
    ///
    /// # Panics
    /// On loops or out-of-range vertices.
    pub fn add_edge(&mut self, u: VertexId, v: VertexId, label: ArcLabel) -> ArcId {
        assert!(u != v, "loops are not allowed");
        assert!(u < self.n && v < self.n, "vertex out of range");
        let id = self.tail.len();
        self.tail.extend([u, v]);
        self.head.extend([v, u]);
        self.label.extend([label, label]);
        self.out[u].push(id);
        self.out[v].push(id + 1);
        id
    }

    pub fn vertex_count(&self) -> usize {
        self.n
    }
    pub fn arc_count(&self) -> usize {
        self.tail.len()
    }
    pub fn edge_count(&self) -> usize {
        self.tail.len() / 2
    }
    pub fn tail(&self, e: ArcId) -> VertexId {
        self.tail[e]
    }
    pub fn head(&self, e: ArcId) -> VertexId {
        self.head[e]
    }
    pub fn label(&self, e: ArcId) -> ArcLabel {
        self.label[e]
    }
    pub fn reverse(&self, e: ArcId) -> ArcId {
        e ^ 1
    }
    /// Outgoing arcs of `v` in ascending id order.
    pub fn out_arcs(&self, v: VertexId) -> &[ArcId] {
        &self.out[v]
    }
    pub fn degree(&self, v: VertexId) -> usize {
        self.out[v].len()
    }

    /// First arc `u -> v` carrying `label`, if any.
    pub fn find_arc(&self, u: VertexId, v: VertexId, label: ArcLabel) -> Option<ArcId> {
        self.out[u].iter().copied().find(|&e| self.head[e] == v && self.label[e] == label)
    }

    pub fn is_adjacent(&self, u: VertexId, v: VertexId) -> bool {
        self.out[u].iter().any(|&e| self.head[e] == v)
    }

    /// Copy restricted to the arcs accepted by `keep` (evaluated per edge on the even arc).
    pub fn filter_edges(&self, mut keep: impl FnMut(ArcId) -> bool) -> Digraph {
        let mut g = Digraph::new(self.n);
        for e in (0..self.arc_count()).step_by(2) {
            if keep(e) {
                g.add_edge(self.tail[e], self.head[e], self.label[e]);
            }
        }
        g
    }
}

/// Alternating vertex/arc sequence. The empty walk has no vertices.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Walk {
    pub verts: Vec<VertexId>,
    pub arcs: Vec<ArcId>,
}

impl Walk {
    pub fn empty() -> Self {
        Walk::default()
    }
    pub fn trivial(v: VertexId) -> Self {
        Walk { verts: vec![v], arcs: Vec::new() }
    }
    pub fn is_empty(&self) -> bool {
        self.verts.is_empty()
    }
    pub fn len(&self) -> usize {
        self.arcs.len()
    }
    pub fn start(&self) -> Option<VertexId> {
        self.verts.first().copied()
    }
    pub fn end(&self) -> Option<VertexId> {
        self.verts.last().copied()
    }

    /// Builds the walk through `verts` using the first real arc between consecutive vertices.
    pub fn from_vertices(g: &Digraph, verts: &[VertexId]) -> Option<Walk> {
        let mut arcs = Vec::with_capacity(verts.len().saturating_sub(1));
        for w in verts.windows(2) {
            arcs.push(g.find_arc(w[0], w[1], ArcLabel::Real)?);
        }
        Some(Walk { verts: verts.to_vec(), arcs })
    }

    /// Checks incidence: `e_i^- = v_{i-1}` and `e_i^+ = v_i`.
    pub fn is_walk_in(&self, g: &Digraph) -> bool {
        if self.verts.is_empty() {
            return self.arcs.is_empty();
        }
        self.arcs.len() + 1 == self.verts.len()
            && self.verts.iter().all(|&v| v < g.vertex_count())
            && self.arcs.iter().enumerate().all(|(i, &e)| {
                e < g.arc_count() && g.tail(e) == self.verts[i] && g.head(e) == self.verts[i + 1]
            })
    }

    pub fn is_self_avoiding(&self) -> bool {
        let mut seen = self.verts.clone();
        seen.sort_unstable();
        seen.windows(2).all(|w| w[0] != w[1])
    }

    pub fn reversed(&self, g: &Digraph) -> Walk {
        Walk {
            verts: self.verts.iter().rev().copied().collect(),
            arcs: self.arcs.iter().rev().map(|&e| g.reverse(e)).collect(),
        }
    }
}

/// Counts of closed objects through the origin.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ClosedCounts {
    /// Self-avoiding returns: SAWs ending at a neighbour of the origin.
    pub sar: Vec<u64>,
    /// Self-avoiding polygons through the origin, identified by edge set.
    pub sap: Vec<u64>,
}

struct Dfs<'a> {
    g: &'a Digraph,
    max_len: usize,
    on_path: Vec<bool>,
    walk: Walk,
}

impl<'a> Dfs<'a> {
    fn new(g: &'a Digraph, max_len: usize) -> Self {
        Dfs { g, max_len, on_path: vec![false; g.vertex_count()], walk: Walk::empty() }
    }

    fn run(&mut self, v: VertexId, visit: &mut dyn FnMut(&Walk)) {
        self.on_path[v] = true;
        self.walk.verts.push(v);
        visit(&self.walk);
        if self.walk.len() < self.max_len {
            for &e in self.g.out_arcs(v) {
                let w = self.g.head(e);
                if !self.on_path[w] {
                    self.walk.arcs.push(e);
                    self.run(w, visit);
                    self.walk.arcs.pop();
                }
            }
        }
        self.walk.verts.pop();
        self.on_path[v] = false;
    }
}

/// Visits every SAW from `origin` of length at most `max_len` exactly once,
/// depth-first with arcs tried in ascending id order.
pub fn for_each_saw(g: &Digraph, origin: VertexId, max_len: usize, mut visit: impl FnMut(&Walk)) {
    Dfs::new(g, max_len).run(origin, &mut visit);
}

/// Visits every SAW of length at most `max_len` whose first arc is `first`.
pub fn for_each_saw_from_arc(
    g: &Digraph,
    first: ArcId,
    max_len: usize,
    mut visit: impl FnMut(&Walk),
) {
    if max_len == 0 {
        return;
    }
    let mut dfs = Dfs::new(g, max_len);
    let o = g.tail(first);
    dfs.on_path[o] = true;
    dfs.walk.verts.push(o);
    dfs.walk.arcs.push(first);
    dfs.run(g.head(first), &mut visit);
}

/// `counts[n]` is the number of SAWs of length `n` from `origin`.
///
/// Work is split over first arcs; totals do not depend on the split.
pub fn enumerate_saws(g: &Digraph, origin: VertexId, max_len: usize) -> Vec<u64> {
    let mut counts = vec![0u64; max_len + 1];
    counts[0] = 1;
    let parts: Vec<Vec<u64>> = g
        .out_arcs(origin)
        .par_iter()
        .map(|&e| {
            let mut c = vec![0u64; max_len + 1];
            for_each_saw_from_arc(g, e, max_len, |w| c[w.len()] += 1);
            c
        })
        .collect();
    for p in parts {
        for (a, b) in counts.iter_mut().zip(p) {
            *a += b;
        }
    }
    counts
}

/// Self-avoiding returns and polygons through `origin` up to length `max_len`.
pub fn enumerate_closed(g: &Digraph, origin: VertexId, max_len: usize) -> ClosedCounts {
    let nbr: Vec<bool> = {
        let mut m = vec![false; g.vertex_count()];
        for &e in g.out_arcs(origin) {
            m[g.head(e)] = true;
        }
        m
    };
    let parts: Vec<(Vec<u64>, Vec<u64>)> = g
        .out_arcs(origin)
        .par_iter()
        .map(|&first| {
            let mut sar = vec![0u64; max_len + 1];
            let mut closing = vec![0u64; max_len + 1];
            for_each_saw_from_arc(g, first, max_len, |w| {
                let v = w.end().unwrap();
                if nbr[v] {
                    sar[w.len()] += 1;
                }
                if w.len() >= 2 && w.len() < max_len {
                    let back = g.out_arcs(v).iter().filter(|&&e| g.head(e) == origin).count();
                    closing[w.len() + 1] += back as u64;
                }
            });
            (sar, closing)
        })
        .collect();
    let mut sar = vec![0u64; max_len + 1];
    let mut closing = vec![0u64; max_len + 1];
    for (s, c) in parts {
        for i in 0..=max_len {
            sar[i] += s[i];
            closing[i] += c[i];
        }
    }
    // each polygon is traversed once in each direction from the origin
    let sap = closing.into_iter().map(|c| c / 2).collect();
    ClosedCounts { sar, sap }
}

/// BFS distances from `src`; `None` marks unreachable vertices.
pub fn bfs_distances(g: &Digraph, src: VertexId) -> Vec<Option<usize>> {
    let mut dist = vec![None; g.vertex_count()];
    let mut queue = VecDeque::new();
    dist[src] = Some(0);
    queue.push_back(src);
    while let Some(u) = queue.pop_front() {
        let d = dist[u].unwrap();
        for &e in g.out_arcs(u) {
            let w = g.head(e);
            if dist[w].is_none() {
                dist[w] = Some(d + 1);
                queue.push_back(w);
            }
        }
    }
    dist
}

/// Length of a shortest walk from `u` to `v`, or `None` when unreachable.
pub fn graph_distance(g: &Digraph, u: VertexId, v: VertexId) -> Option<usize> {
    bfs_distances(g, u)[v]
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn complete(n: usize) -> Digraph {
        let mut g = Digraph::new(n);
        for u in 0..n {
            for v in u + 1..n {
                g.add_edge(u, v, ArcLabel::Real);
            }
        }
        g
    }

    #[test]
    fn reversal_is_involution() {
        let g = complete(4);
        for e in 0..g.arc_count() {
            assert_eq!(g.reverse(g.reverse(e)), e);
            assert_eq!(g.tail(g.reverse(e)), g.head(e));
        }
    }

    #[test]
    fn stream_is_lexicographic() {
        let g = complete(3);
        let mut seen = Vec::new();
        for_each_saw(&g, 0, 2, |w| seen.push(w.verts.clone()));
        assert_eq!(seen, vec![vec![0], vec![0, 1], vec![0, 1, 2], vec![0, 2], vec![0, 2, 1]]);
    }

    #[test]
    fn parallel_arcs_are_distinct_walks() {
        let mut g = Digraph::new(2);
        g.add_edge(0, 1, ArcLabel::Real);
        g.add_edge(0, 1, ArcLabel::Virtual(0));
        assert_eq!(enumerate_saws(&g, 0, 2), vec![1, 2, 0]);
    }
}
