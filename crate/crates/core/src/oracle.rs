//! Brute-force ground truth on finite patches.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph_core::{bfs_distances, enumerate_closed, enumerate_saws, for_each_saw_from_arc};
use crate::template::{exact_horizon, patch_for_horizon, GraphTemplate, Horizon, Patch};

/// Exact counts from the origin; index `n` holds length `n`.
#[derive(Clone, Debug, Serialize)]
pub struct OracleReport {
    pub c: Vec<u64>,
    pub sar: Vec<u64>,
    pub sap: Vec<u64>,
    pub horizon: Horizon,
    pub patch_radius: usize,
    pub patch_vertices: usize,
}

fn check_horizon(patch: &Patch, origin: usize, n: usize) -> Result<Horizon> {
    let h = exact_horizon(patch, origin);
    match h {
        Horizon::Finite(x) if x < n => Err(Error::HorizonExceeded { requested: n, horizon: x }),
        _ => Ok(h),
    }
}

/// Counts SAWs, self-avoiding returns and polygons up to length `n`.
pub fn brute_counts(patch: &Patch, origin: usize, n: usize) -> Result<OracleReport> {
    let horizon = check_horizon(patch, origin, n)?;
    let c = enumerate_saws(&patch.graph, origin, n);
    let closed = enumerate_closed(&patch.graph, origin, n);
    Ok(OracleReport {
        c,
        sar: closed.sar,
        sap: closed.sap,
        horizon,
        patch_radius: patch.radius,
        patch_vertices: patch.graph.vertex_count(),
    })
}

/// Builds a large enough patch for `n` and counts on it.
pub fn brute_counts_for(t: &GraphTemplate, n: usize, cap: usize) -> Result<OracleReport> {
    let patch = patch_for_horizon(t, n, cap)?;
    brute_counts(&patch, patch.origin, n)
}

/// Distribution of the graph distance between the endpoints of length-`n` SAWs.
#[derive(Clone, Debug, Serialize)]
pub struct DisplacementStats {
    pub n: usize,
    /// `histogram[d]`: number of SAWs ending at distance `d`.
    pub histogram: Vec<u64>,
    pub total: u64,
    pub mean_over_n: f64,
    pub threshold: f64,
    /// Fraction of walks with distance below `threshold · n`.
    pub tail_fraction: f64,
}

pub fn displacement_stats(patch: &Patch, origin: usize, n: usize, threshold: f64) -> Result<DisplacementStats> {
    check_horizon(patch, origin, n)?;
    if n == 0 {
        return Err(Error::Inconclusive("displacement needs n ≥ 1".into()));
    }
    let g = &patch.graph;
    let dist = bfs_distances(g, origin);
    let histogram = g
        .out_arcs(origin)
        .par_iter()
        .map(|&e| {
            let mut h = vec![0u64; n + 1];
            for_each_saw_from_arc(g, e, n, |w| {
                if w.len() == n {
                    h[dist[w.end().unwrap()].expect("patch is connected")] += 1;
                }
            });
            h
        })
        .reduce(|| vec![0u64; n + 1], |a, b| a.iter().zip(&b).map(|(x, y)| x + y).collect());
    let total: u64 = histogram.iter().sum();
    let sum: u64 = histogram.iter().enumerate().map(|(d, &c)| d as u64 * c).sum();
    let below: u64 = histogram
        .iter()
        .enumerate()
        .filter(|&(d, _)| (d as f64) < threshold * n as f64)
        .map(|(_, &c)| c)
        .sum();
    let t = total.max(1) as f64;
    Ok(DisplacementStats {
        n,
        histogram,
        total,
        mean_over_n: sum as f64 / t / n as f64,
        threshold,
        tail_fraction: below as f64 / t,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct GrowthReport {
    /// `c_n^{1/n}` for `n ≥ 1`.
    pub saw_root: Vec<f64>,
    /// `SAR_n^{1/n}` for `n ≥ 1`.
    pub sar_root: Vec<f64>,
    /// `SAP_n^{1/n}` for `n ≥ 1`.
    pub sap_root: Vec<f64>,
    /// Largest `SAR_n^{1/n}` over `2 ≤ n`.
    pub max_sar_root: f64,
    pub mu_w: Option<f64>,
    /// `max_sar_root < mu_w`, when `mu_w` is known.
    pub gap: Option<bool>,
}

fn roots(v: &[u64]) -> Vec<f64> {
    v.iter().enumerate().skip(1).map(|(n, &c)| (c as f64).powf(1.0 / n as f64)).collect()
}

/// Growth sequences of a report. Length-1 returns are excluded from the
/// maximum since they close up to backtracking walks rather than polygons.
pub fn growth_report(r: &OracleReport, mu_w: Option<f64>) -> GrowthReport {
    let sar_root = roots(&r.sar);
    let max_sar_root = sar_root.iter().skip(1).cloned().fold(0.0, f64::max);
    GrowthReport {
        saw_root: roots(&r.c),
        sap_root: roots(&r.sap),
        max_sar_root,
        gap: mu_w.map(|m| max_sar_root < m),
        mu_w,
        sar_root,
    }
}
