//! Numerical and exact analysis of a polynomial system: truncated series,
//! fixed points, spectral radii, the critical point and amplitudes.

use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::gensys::{
    build_dependency_digraph, ComponentClass, DependencyDigraph, Polynomial, PolynomialSystem,
};

pub const INNER_TOL: f64 = 1e-12;
pub const OUTER_TOL: f64 = 1e-9;
pub const CEILING: f64 = 1e12;
pub const MAX_INNER_ITER: usize = 200_000;

/// Exact truncated series `F_c(z) mod z^{n+1}` for every class.
pub fn series_f(sys: &PolynomialSystem, n: usize) -> Result<Vec<Vec<BigUint>>> {
    let m = sys.classes.len();
    let mut f = vec![vec![BigUint::zero(); n + 1]; m];
    let cap = n * (m + 1) + 2;
    for _ in 0..cap {
        let next: Vec<Vec<BigUint>> = sys.equations.iter().map(|p| p.eval_series(n, &f)).collect();
        if next == f {
            return Ok(f);
        }
        f = next;
    }
    Err(Error::InvariantViolation(format!("series iteration did not stabilise within {cap} rounds")))
}

fn root_series(p: &Polynomial, f: &[Vec<BigUint>], n: usize) -> Vec<BigUint> {
    p.eval_series(n, f)
}

/// `c_0..c_n`: numbers of SAWs of each length from the root vertex.
pub fn series_coefficients(sys: &PolynomialSystem, n: usize) -> Result<Vec<BigUint>> {
    let f = series_f(sys, n)?;
    let mut c = root_series(&sys.root_saw_inner, &f, n);
    for (a, b) in c.iter_mut().zip(root_series(&sys.root_saw_outer, &f, n)) {
        *a += b;
    }
    c[0] = BigUint::from(1u32);
    Ok(c)
}

/// `SAR_0..SAR_n`: numbers of self-avoiding returns of each length.
pub fn series_returns(sys: &PolynomialSystem, n: usize) -> Result<Vec<BigUint>> {
    let f = series_f(sys, n)?;
    Ok(root_series(&sys.root_sar, &f, n))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Status {
    Converged,
    Divergent,
    Unconverged,
}

/// Values `F_c(z)` with a per-class status.
#[derive(Clone, Debug, Serialize)]
pub struct Valuation {
    pub z: f64,
    pub values: Vec<f64>,
    pub status: Vec<Status>,
    pub iterations: usize,
}

impl Valuation {
    pub fn all_converged(&self, idx: &[usize]) -> bool {
        idx.iter().all(|&c| self.status[c] == Status::Converged)
    }
}

/// Kleene iteration on the classes in `active`; other classes stay at `init`.
fn iterate(
    sys: &PolynomialSystem,
    z: f64,
    active: &[usize],
    mut values: Vec<f64>,
    tol: f64,
    max_iter: usize,
) -> Valuation {
    let m = sys.classes.len();
    let mut status = vec![Status::Unconverged; m];
    for s in status.iter_mut() {
        *s = Status::Converged;
    }
    for &c in active {
        status[c] = Status::Unconverged;
        values[c] = 0.0;
    }
    let mut iterations = 0;
    let mut done = false;
    while iterations < max_iter && !done {
        iterations += 1;
        let next: Vec<f64> = active.iter().map(|&c| sys.equations[c].eval(z, &values)).collect();
        let mut delta: f64 = 0.0;
        let mut blown = false;
        for (&c, v) in active.iter().zip(next) {
            if !v.is_finite() || v > CEILING {
                blown = true;
            }
            let d = (v - values[c]).abs() / v.abs().max(1.0);
            delta = delta.max(d);
            values[c] = v;
        }
        if blown {
            for &c in active {
                if !values[c].is_finite() || values[c] > CEILING {
                    status[c] = Status::Divergent;
                    values[c] = f64::INFINITY;
                }
            }
            // everything depending on a divergent class diverges as well
            loop {
                let mut changed = false;
                for &c in active {
                    if status[c] != Status::Divergent
                        && sys.equations[c].variables().iter().any(|&d| status[d] == Status::Divergent)
                    {
                        status[c] = Status::Divergent;
                        values[c] = f64::INFINITY;
                        changed = true;
                    }
                }
                if !changed {
                    break;
                }
            }
            let rest: Vec<usize> = active.iter().copied().filter(|&c| status[c] != Status::Divergent).collect();
            if rest.is_empty() {
                return Valuation { z, values, status, iterations };
            }
            let mut v = iterate(sys, z, &rest, values.clone(), tol, max_iter.saturating_sub(iterations));
            for &c in active {
                if status[c] == Status::Divergent {
                    v.status[c] = Status::Divergent;
                    v.values[c] = f64::INFINITY;
                }
            }
            v.iterations += iterations;
            return v;
        }
        done = delta <= tol;
    }
    for &c in active {
        status[c] = if done { Status::Converged } else { Status::Unconverged };
    }
    Valuation { z, values, status, iterations }
}

/// Fixed point of the whole system at `z` by monotone iteration from zero.
pub fn evaluate_fixed_point(sys: &PolynomialSystem, z: f64, tol: f64, max_iter: usize) -> Valuation {
    let all: Vec<usize> = (0..sys.classes.len()).collect();
    iterate(sys, z, &all, vec![0.0; sys.classes.len()], tol, max_iter)
}

/// Fixed point restricted to U-classes (which never depend on I-classes).
pub fn evaluate_u(sys: &PolynomialSystem, z: f64, tol: f64, max_iter: usize) -> Valuation {
    let us: Vec<usize> = (0..sys.classes.len()).filter(|&c| !sys.classes[c].is_i()).collect();
    let mut v = iterate(sys, z, &us, vec![0.0; sys.classes.len()], tol, max_iter);
    for c in 0..sys.classes.len() {
        if sys.classes[c].is_i() {
            v.status[c] = Status::Unconverged;
            v.values[c] = f64::NAN;
        }
    }
    v
}

/// Numeric Jacobian restricted to `comp × comp`.
pub fn jacobian_at(sys: &PolynomialSystem, z: f64, val: &Valuation, comp: &[usize]) -> Result<Vec<Vec<f64>>> {
    let mut out = vec![vec![0.0; comp.len()]; comp.len()];
    for (i, &c) in comp.iter().enumerate() {
        for (j, &d) in comp.iter().enumerate() {
            let p = sys.equations[c].derivative(d);
            if let Some(v) = p.variables().into_iter().find(|&v| val.status[v] != Status::Converged) {
                return Err(Error::MissingDependency(format!("value of class {v} is not available at z={z}")));
            }
            out[i][j] = p.eval(z, &val.values);
        }
    }
    Ok(out)
}

/// Perron root of a square nonnegative matrix.
///
/// Maximum over the irreducible diagonal blocks. Within a block: power
/// iteration on `M + I` with Collatz–Wielandt bounds; the shift makes the
/// iteration aperiodic.
pub fn spectral_radius(m: &[Vec<f64>], tol: f64) -> f64 {
    use petgraph::algo::tarjan_scc;
    use petgraph::graph::DiGraph;
    let n = m.len();
    let mut g = DiGraph::<(), ()>::new();
    let nodes: Vec<_> = (0..n).map(|_| g.add_node(())).collect();
    for i in 0..n {
        for j in 0..n {
            if m[i][j] > 0.0 && i != j {
                g.add_edge(nodes[i], nodes[j], ());
            }
        }
    }
    tarjan_scc(&g)
        .into_iter()
        .map(|comp| {
            let idx: Vec<usize> = comp.into_iter().map(|v| v.index()).collect();
            if idx.len() == 1 {
                return m[idx[0]][idx[0]].max(0.0);
            }
            let block: Vec<Vec<f64>> = idx.iter().map(|&i| idx.iter().map(|&j| m[i][j]).collect()).collect();
            irreducible_radius(&block, tol)
        })
        .fold(0.0, f64::max)
}

fn irreducible_radius(m: &[Vec<f64>], tol: f64) -> f64 {
    let n = m.len();
    let mut x = vec![1.0; n];
    let mut best = (0.0f64, f64::INFINITY);
    for _ in 0..100_000 {
        let y: Vec<f64> = (0..n).map(|i| x[i] + m[i].iter().zip(&x).map(|(a, b)| a * b).sum::<f64>()).collect();
        let mut lo = f64::INFINITY;
        let mut hi: f64 = 0.0;
        for i in 0..n {
            let r = y[i] / x[i];
            lo = lo.min(r);
            hi = hi.max(r);
        }
        best = (best.0.max(lo), best.1.min(hi));
        if best.1 - best.0 <= tol * best.1.max(1.0) {
            break;
        }
        let norm = y.iter().cloned().fold(0.0, f64::max);
        // keep every coordinate strictly positive so both bounds stay valid
        x = y.iter().map(|v| (v / norm).max(1e-300)).collect();
    }
    ((best.0 + best.1) / 2.0 - 1.0).max(0.0)
}

#[derive(Clone, Debug, Serialize)]
pub struct ComponentReport {
    pub class: ComponentClass,
    pub size: usize,
    pub members: Vec<usize>,
    pub lambda_at_r: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct SpectralReport {
    #[serde(rename = "R")]
    pub r: f64,
    pub mu_w: f64,
    pub bracket: (f64, f64),
    pub tolerance: f64,
    pub components: Vec<ComponentReport>,
}

/// Spectral radius of the Jacobian of component `comp` at `z`, with U values from `val`.
pub fn component_lambda(sys: &PolynomialSystem, z: f64, val: &Valuation, comp: &[usize]) -> Result<f64> {
    Ok(spectral_radius(&jacobian_at(sys, z, val, comp)?, INNER_TOL))
}

/// `λ_{I_p}(z)` (largest over persistent components), or `None` when the U-values diverge at `z`.
pub fn persistent_lambda(sys: &PolynomialSystem, d: &DependencyDigraph, z: f64) -> Option<f64> {
    if d.persistent.is_empty() {
        return None;
    }
    let val = evaluate_u(sys, z, INNER_TOL, MAX_INNER_ITER);
    let mut best: f64 = 0.0;
    for &p in &d.persistent {
        best = best.max(component_lambda(sys, z, &val, &d.components[p]).ok()?);
    }
    Some(best)
}

/// Bisection for the smallest `z` with `λ_{I_p}(z) ≥ 1`.
pub fn find_critical_point(sys: &PolynomialSystem, tol: f64) -> Result<SpectralReport> {
    let d = build_dependency_digraph(sys)?;
    if d.persistent.is_empty() {
        return Err(Error::BracketFailure("system has no persistent component".into()));
    }
    let above = |z: f64| persistent_lambda(sys, &d, z).map_or(true, |l| l >= 1.0);
    let mut lo = 0.0;
    let mut hi = 1.0;
    while !above(hi) {
        lo = hi;
        hi *= 2.0;
        if hi > 1e3 {
            return Err(Error::BracketFailure(format!("no z ≤ {hi} with spectral radius ≥ 1")));
        }
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if above(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let r = 0.5 * (lo + hi);
    let val = evaluate_u(sys, lo, INNER_TOL, MAX_INNER_ITER);
    let mut components = Vec::new();
    for (comp, &class) in d.components.iter().zip(&d.component_class) {
        let lambda = component_lambda(sys, lo, &val, comp).unwrap_or(f64::INFINITY);
        components.push(ComponentReport { class, size: comp.len(), members: comp.clone(), lambda_at_r: lambda });
    }
    Ok(SpectralReport { r, mu_w: 1.0 / r, bracket: (lo, hi), tolerance: tol, components })
}

#[derive(Clone, Debug, Serialize)]
pub struct AmplitudeEstimate {
    pub period: usize,
    pub amplitudes: Vec<f64>,
    /// Geometric decay rate of successive differences per period.
    pub residual_decay: f64,
    pub ratios: Vec<f64>,
}

pub fn big_to_f64(x: &BigUint) -> f64 {
    x.to_f64().unwrap_or(f64::INFINITY)
}

/// Detects the period of `c_n / μ^n` and estimates the amplitude of each residue class.
/// `coeffs[n]` is `c_n`; index 0 is ignored.
pub fn amplitude_periodic(coeffs: &[BigUint], mu: f64, k_max: usize) -> Result<AmplitudeEstimate> {
    let n = coeffs.len().saturating_sub(1);
    if k_max == 0 || n < 3 * k_max {
        return Err(Error::Inconclusive(format!("{n} coefficients are too few for periods up to {k_max}")));
    }
    let ratios: Vec<f64> = (0..=n)
        .map(|i| if i == 0 { 0.0 } else { big_to_f64(&coeffs[i]) / mu.powi(i as i32) })
        .collect();
    let last_in = |k: usize, r: usize| (1..=n).rev().find(|i| i % k == r).unwrap();
    let err = |k: usize| {
        (0..k)
            .map(|r| {
                let last = last_in(k, r);
                let (a, b) = (ratios[last], ratios[last - k]);
                (a - b).abs() / a.abs().max(f64::MIN_POSITIVE)
            })
            .fold(0.0, f64::max)
    };
    let errs: Vec<f64> = (1..=k_max).map(err).collect();
    let min = errs.iter().cloned().fold(f64::INFINITY, f64::min);
    let k = (1..=k_max).find(|&k| errs[k - 1] <= (2.0 * min).max(1e-12)).unwrap();
    let amplitudes: Vec<f64> = (0..k).map(|r| ratios[last_in(k, r)]).collect();
    // successive differences of the residue class of n
    let diffs: Vec<f64> = (0..)
        .map(|q| n as isize - (q * k) as isize)
        .take_while(|&i| i - k as isize >= 1)
        .map(|i| (ratios[i as usize] - ratios[i as usize - k]).abs())
        .collect();
    let residual_decay = match (diffs.first(), diffs.last()) {
        (Some(&a), Some(&b)) if diffs.len() > 1 && a > 0.0 && b > 0.0 => (a / b).powf(1.0 / (diffs.len() - 1) as f64),
        _ => 0.0,
    };
    Ok(AmplitudeEstimate { period: k, amplitudes, residual_decay, ratios: ratios[1..].to_vec() })
}

/// Convenience: λ of every component on a grid of z values below `r`.
pub fn lambda_grid(sys: &PolynomialSystem, d: &DependencyDigraph, zs: &[f64]) -> Vec<Option<f64>> {
    use rayon::prelude::*;
    zs.par_iter().map(|&z| persistent_lambda(sys, d, z)).collect()
}
