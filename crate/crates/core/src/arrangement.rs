//! Configurations on adhesion graphs, shapes on part graphs and
//! arrangements on open stars.
//!
//! Configurations are stored relative to a frame arc `e`: [`Side::Out`]
//! stands for `e` (virtual arcs of `e`, i.e. excursions beyond `e`) and
//! [`Side::In`] for its reverse.

use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph_core::{ArcLabel, Walk};
use crate::template::PartGraph;

/// Default cap on the adhesion size for configuration enumeration.
pub const DEFAULT_K_CAP: usize = 4;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Out,
    In,
}

impl Side {
    pub fn flip(self) -> Side {
        match self {
            Side::Out => Side::In,
            Side::In => Side::Out,
        }
    }
}

/// A self-avoiding walk on the doubled complete graph on port positions `0..k`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct AdhesionWalk {
    pub verts: Vec<usize>,
    /// Side of the arc between `verts[i]` and `verts[i + 1]`.
    pub sides: Vec<Side>,
}

impl AdhesionWalk {
    pub fn trivial(v: usize) -> Self {
        AdhesionWalk { verts: vec![v], sides: Vec::new() }
    }
    pub fn reversed(&self) -> Self {
        AdhesionWalk {
            verts: self.verts.iter().rev().copied().collect(),
            sides: self.sides.iter().rev().copied().collect(),
        }
    }
    /// The same walk seen from the reverse arc, positions renumbered by `map`.
    pub fn flipped(&self, map: &[usize]) -> Self {
        AdhesionWalk {
            verts: self.verts.iter().map(|&v| map[v]).collect(),
            sides: self.sides.iter().map(|s| s.flip()).collect(),
        }
    }
}

impl fmt::Display for AdhesionWalk {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.verts[0])?;
        for (s, v) in self.sides.iter().zip(&self.verts[1..]) {
            let c = if *s == Side::Out { '>' } else { '-' };
            write!(f, "{c}{v}")?;
        }
        Ok(())
    }
}

/// A triple `(q, x, y)`; `q = None` is the empty configuration.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Configuration {
    pub q: Option<AdhesionWalk>,
    pub x: Side,
    pub y: Side,
}

impl Configuration {
    pub fn is_empty(&self) -> bool {
        self.q.is_none()
    }
    pub fn is_boring(&self) -> bool {
        self.x == self.y && self.q.as_ref().map_or(true, |q| q.sides.iter().all(|&s| s == self.x))
    }
    pub fn is_i(&self) -> bool {
        self.x != self.y
    }
    pub fn is_u(&self) -> bool {
        self.x == self.y
    }
    pub fn is_simple(&self) -> bool {
        self.is_i() && self.q.as_ref().is_some_and(|q| q.verts.len() == 1)
    }
    /// Reverse walk with entry and exit exchanged.
    pub fn inverse(&self) -> Self {
        Configuration { q: self.q.as_ref().map(AdhesionWalk::reversed), x: self.y, y: self.x }
    }
    /// The same configuration expressed in the frame of the reverse arc.
    pub fn flipped(&self, map: &[usize]) -> Self {
        Configuration {
            q: self.q.as_ref().map(|q| q.flipped(map)),
            x: self.x.flip(),
            y: self.y.flip(),
        }
    }
    pub fn tags(&self) -> Vec<&'static str> {
        let mut t = Vec::new();
        if self.is_boring() {
            t.push("boring");
        }
        t.push(if self.is_i() { "I" } else { "U" });
        if self.is_simple() {
            t.push("simple");
        }
        t
    }
}

impl fmt::Display for Configuration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let d = |s: Side| if s == Side::Out { "e" } else { "ē" };
        match &self.q {
            None => write!(f, "(∅,{},{})", d(self.x), d(self.y)),
            Some(q) => write!(f, "({q},{},{})", d(self.x), d(self.y)),
        }
    }
}

fn adhesion_walks(k: usize) -> Vec<AdhesionWalk> {
    fn rec(k: usize, w: &mut AdhesionWalk, used: &mut Vec<bool>, out: &mut Vec<AdhesionWalk>) {
        out.push(w.clone());
        for v in 0..k {
            if used[v] {
                continue;
            }
            for s in [Side::Out, Side::In] {
                used[v] = true;
                w.verts.push(v);
                w.sides.push(s);
                rec(k, w, used, out);
                w.verts.pop();
                w.sides.pop();
                used[v] = false;
            }
        }
    }
    let mut out = Vec::new();
    for v in 0..k {
        let mut used = vec![false; k];
        used[v] = true;
        rec(k, &mut AdhesionWalk::trivial(v), &mut used, &mut out);
    }
    out
}

/// Every configuration on an adhesion graph with `k` vertices.
pub fn enumerate_configurations(k: usize, cap: usize) -> Result<Vec<Configuration>> {
    if k > cap {
        return Err(Error::ResourceLimit(format!("adhesion size {k} exceeds cap {cap}")));
    }
    let mut qs: Vec<Option<AdhesionWalk>> = vec![None];
    qs.extend(adhesion_walks(k).into_iter().map(Some));
    let mut out = Vec::with_capacity(qs.len() * 4);
    for q in qs {
        for x in [Side::Out, Side::In] {
            for y in [Side::Out, Side::In] {
                out.push(Configuration { q: q.clone(), x, y });
            }
        }
    }
    Ok(out)
}

/// The walk on the adhesion graph of port `j` induced by a shape.
pub fn induced_configuration(pg: &PartGraph, shape: &Walk, j: usize) -> Option<AdhesionWalk> {
    let mut verts = Vec::new();
    let mut sides = Vec::new();
    let mut last: Option<usize> = None;
    for (i, &v) in shape.verts.iter().enumerate() {
        if let Some(a) = pg.position(j, v) {
            if let Some(l) = last {
                let direct = l + 1 == i && pg.graph.label(shape.arcs[l]) == ArcLabel::Virtual(j);
                sides.push(if direct { Side::Out } else { Side::In });
            }
            verts.push(a);
            last = Some(i);
        }
    }
    (!verts.is_empty()).then_some(AdhesionWalk { verts, sides })
}

/// Clause of the compatibility conditions that failed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Clause {
    C1,
    C2,
    C3,
}

/// Checks compatibility of a shape with a configuration at port `j`.
pub fn check_compatibility(
    pg: &PartGraph,
    shape: &Walk,
    j: usize,
    c: &Configuration,
) -> std::result::Result<(), Clause> {
    if induced_configuration(pg, shape, j) != c.q {
        return Err(Clause::C1);
    }
    let inside = |v: Option<usize>| v.is_some_and(|v| pg.position(j, v).is_some());
    if c.x == Side::Out && !inside(shape.start()) {
        return Err(Clause::C2);
    }
    if c.y == Side::Out && !inside(shape.end()) {
        return Err(Clause::C3);
    }
    Ok(())
}

/// An arrangement on the open star of one part.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct StarArrangement {
    pub shape: Walk,
    /// Port with entry direction pointing outwards, if any.
    pub xsel: Option<usize>,
    /// Port with exit direction pointing outwards, if any.
    pub ysel: Option<usize>,
    /// Configuration on every port, in the frame of that port.
    pub configs: Vec<Configuration>,
    pub weight: usize,
}

impl StarArrangement {
    /// Builds the arrangement induced by a shape and entry/exit choices; no checks.
    pub fn from_shape(pg: &PartGraph, shape: Walk, xsel: Option<usize>, ysel: Option<usize>) -> Self {
        let configs = (0..pg.port_count())
            .map(|j| Configuration {
                q: induced_configuration(pg, &shape, j),
                x: if xsel == Some(j) { Side::Out } else { Side::In },
                y: if ysel == Some(j) { Side::Out } else { Side::In },
            })
            .collect();
        let weight = real_arcs(pg, &shape);
        StarArrangement { shape, xsel, ysel, configs, weight }
    }

    /// Ports carrying non-boring configurations.
    pub fn non_boring(&self) -> impl Iterator<Item = usize> + '_ {
        self.configs.iter().enumerate().filter(|(_, c)| !c.is_boring()).map(|(j, _)| j)
    }
}

pub fn real_arcs(pg: &PartGraph, w: &Walk) -> usize {
    w.arcs.iter().filter(|&&a| pg.graph.label(a) == ArcLabel::Real).count()
}

/// Checks all arrangement conditions on an open star; returns the first failure.
pub fn check_star_arrangement(pg: &PartGraph, a: &StarArrangement) -> std::result::Result<(), String> {
    if a.shape.is_empty() || !a.shape.is_walk_in(&pg.graph) || !a.shape.is_self_avoiding() {
        return Err("shape is not a self-avoiding walk on the part graph".into());
    }
    if a.configs.len() != pg.port_count() {
        return Err("configuration count differs from port count".into());
    }
    for (j, c) in a.configs.iter().enumerate() {
        if let Err(cl) = check_compatibility(pg, &a.shape, j, c) {
            return Err(format!("port {j}: clause {cl:?}"));
        }
    }
    let outs = |f: fn(&Configuration) -> Side| a.configs.iter().filter(|c| f(c) == Side::Out).count();
    let first_real = a.shape.arcs.first().is_some_and(|&e| pg.graph.label(e) == ArcLabel::Real);
    let last_real = a.shape.arcs.last().is_some_and(|&e| pg.graph.label(e) == ArcLabel::Real);
    match outs(|c| c.x) {
        0 if !first_real => return Err("D2: no entry arc and shape does not start with a real arc".into()),
        0 | 1 => {}
        _ => return Err("D2: several entry arcs".into()),
    }
    match outs(|c| c.y) {
        0 if !last_real => return Err("D3: no exit arc and shape does not end with a real arc".into()),
        0 | 1 => {}
        _ => return Err("D3: several exit arcs".into()),
    }
    if a.weight != real_arcs(pg, &a.shape) {
        return Err("weight differs from the number of real arcs".into());
    }
    Ok(())
}

/// Restrictions applied during star enumeration.
#[derive(Clone, Debug, Default)]
pub struct Constraints {
    /// Configuration required on a port.
    pub pinned: Option<(usize, Configuration)>,
    /// Required start vertex of the shape.
    pub start: Option<usize>,
    /// All entry directions point inwards.
    pub source: bool,
    /// All exit directions point inwards.
    pub target: bool,
    /// Upper bound on the weight.
    pub max_weight: Option<usize>,
    /// Cap on the number of shapes visited; 0 means unlimited.
    pub cap: usize,
}

fn entry_choices(pg: &PartGraph, v: usize, real_step: bool) -> Vec<Option<usize>> {
    let mut out = Vec::new();
    if real_step {
        out.push(None);
    }
    out.extend(pg.port_pos[v].iter().map(|&(j, _)| Some(j)));
    out
}

/// Visits every star arrangement satisfying `cons`, in a deterministic order.
/// Returns the number of arrangements visited.
pub fn enumerate_star_arrangements(
    pg: &PartGraph,
    cons: &Constraints,
    mut visit: impl FnMut(&StarArrangement),
) -> Result<usize> {
    let g = &pg.graph;
    let n = g.vertex_count();
    let mut starts: Vec<usize> = (0..n).collect();
    if let Some(s) = cons.start {
        starts = vec![s];
    }
    if let Some((j, c)) = &cons.pinned {
        match &c.q {
            None => {}
            Some(q) => {
                if c.x == Side::Out {
                    let s = pg.ports[*j][q.verts[0]];
                    starts.retain(|&v| v == s);
                }
            }
        }
    }
    let mut shapes = 0usize;
    let mut count = 0usize;
    let mut on_path = vec![false; n];
    let mut walk = Walk::empty();
    let limit = cons.max_weight.unwrap_or(usize::MAX);

    #[allow(clippy::too_many_arguments)]
    fn rec(
        pg: &PartGraph,
        cons: &Constraints,
        v: usize,
        weight: usize,
        limit: usize,
        on_path: &mut Vec<bool>,
        walk: &mut Walk,
        shapes: &mut usize,
        count: &mut usize,
        visit: &mut dyn FnMut(&StarArrangement),
    ) -> Result<()> {
        on_path[v] = true;
        walk.verts.push(v);
        *shapes += 1;
        if cons.cap > 0 && *shapes > cons.cap {
            return Err(Error::ResourceLimit(format!("more than {} shapes", cons.cap)));
        }
        emit(pg, cons, walk, count, visit);
        for &e in pg.graph.out_arcs(v) {
            let w = pg.graph.head(e);
            let dw = usize::from(pg.graph.label(e) == ArcLabel::Real);
            if !on_path[w] && weight + dw <= limit {
                walk.arcs.push(e);
                rec(pg, cons, w, weight + dw, limit, on_path, walk, shapes, count, visit)?;
                walk.arcs.pop();
            }
        }
        walk.verts.pop();
        on_path[v] = false;
        Ok(())
    }

    fn emit(
        pg: &PartGraph,
        cons: &Constraints,
        walk: &Walk,
        count: &mut usize,
        visit: &mut dyn FnMut(&StarArrangement),
    ) {
        let g = &pg.graph;
        let first_real = walk.arcs.first().is_some_and(|&e| g.label(e) == ArcLabel::Real);
        let last_real = walk.arcs.last().is_some_and(|&e| g.label(e) == ArcLabel::Real);
        let mut xs = entry_choices(pg, walk.verts[0], first_real);
        let mut ys = entry_choices(pg, *walk.verts.last().unwrap(), last_real);
        if cons.source {
            xs.retain(Option::is_none);
        }
        if cons.target {
            ys.retain(Option::is_none);
        }
        if let Some((j, c)) = &cons.pinned {
            let want = |s: Side| if s == Side::Out { Some(*j) } else { None };
            let want_x = want(c.x);
            let want_y = want(c.y);
            if c.x == Side::Out {
                xs.retain(|&x| x == want_x);
            } else {
                xs.retain(|&x| x != Some(*j));
            }
            if c.y == Side::Out {
                ys.retain(|&y| y == want_y);
            } else {
                ys.retain(|&y| y != Some(*j));
            }
            if xs.is_empty() || ys.is_empty() || induced_configuration(pg, walk, *j) != c.q {
                return;
            }
        }
        for &x in &xs {
            for &y in &ys {
                let a = StarArrangement::from_shape(pg, walk.clone(), x, y);
                *count += 1;
                visit(&a);
            }
        }
    }

    for s in starts {
        rec(pg, cons, s, 0, limit, &mut on_path, &mut walk, &mut shapes, &mut count, &mut visit)?;
    }
    Ok(count)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn configuration_counts() {
        assert_eq!(enumerate_configurations(1, 4).unwrap().len(), 8);
        assert_eq!(enumerate_configurations(2, 4).unwrap().len(), 28);
        assert!(enumerate_configurations(5, 4).is_err());
    }

    #[test]
    fn inverse_and_flip_are_involutions() {
        for c in enumerate_configurations(3, 4).unwrap() {
            assert_eq!(c.inverse().inverse(), c);
            let map = [2, 0, 1];
            let inv = [1, 2, 0];
            assert_eq!(c.flipped(&map).flipped(&inv), c);
            assert_eq!(c.is_boring(), c.flipped(&map).is_boring());
        }
    }
}
