//! Spatial pathway analysis between the initial and trap sites.
//!
//! A path visits an ordered sequence of distinct intermediate sites; its
//! strength is the harmonic combination of the absolute couplings along the
//! way, h⁻¹ = |H[i,c₁]|⁻¹ + Σ|H[c_j,c_{j+1}]|⁻¹ + |H[c_k,t]|⁻¹, so the
//! weakest link bounds the whole chain. An n-site network has
//! Σ_{k=0}^{n−2} (n−2)!/(n−k−2)! such ordered paths.

use crate::error::{Error, Result};
use crate::exciton::ExcitonHamiltonian;
use crate::geometry::Configuration;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

/// Hard cap on `enumerate_paths`: the count grows factorially.
pub const MAX_ENUMERATION_SITES: usize = 20;
/// Default refusal ceiling on the number of enumerated paths.
pub const DEFAULT_PATH_CEILING: u128 = 2_000_000;
/// Only cache enumerations up to this size (memoized per n).
const MEMO_LIMIT: u128 = 200_000;

/// One ordered pathway; `strength` is 0 until scored.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Path {
    /// Ordered distinct site indices, excluding the initial and trap sites.
    pub intermediates: Vec<usize>,
    /// Harmonic coupling strength in cm⁻¹.
    pub strength: f64,
}

/// Σ_{k=0}^{n−2} (n−2)!/(n−k−2)!: ordered selections of k intermediates.
pub fn path_count(n: usize) -> u128 {
    if n < 2 {
        return 0;
    }
    let m = (n - 2) as u128;
    let mut total = 0u128;
    let mut term = 1u128;
    for k in 0..=m {
        if k > 0 {
            term *= m - (k - 1);
        }
        total += term;
    }
    total
}

fn intermediate_sequences(pool: &[usize], n: usize) -> Vec<Vec<usize>> {
    fn dfs(pool: &[usize], used: &mut [bool], current: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        out.push(current.clone());
        for (slot, &c) in pool.iter().enumerate() {
            if !used[slot] {
                used[slot] = true;
                current.push(c);
                dfs(pool, used, current, out);
                current.pop();
                used[slot] = false;
            }
        }
    }
    let mut out = Vec::with_capacity(path_count(n) as usize);
    let mut used = vec![false; pool.len()];
    dfs(pool, &mut used, &mut Vec::new(), &mut out);
    out
}

type SequenceCache = Mutex<HashMap<usize, Arc<Vec<Vec<usize>>>>>;

fn canonical_sequences(n: usize) -> Arc<Vec<Vec<usize>>> {
    static CACHE: OnceLock<SequenceCache> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(hit) = cache.lock().unwrap().get(&n) {
        return Arc::clone(hit);
    }
    let pool: Vec<usize> = (2..n).collect();
    let arc = Arc::new(intermediate_sequences(&pool, n));
    if path_count(n) <= MEMO_LIMIT {
        cache.lock().unwrap().insert(n, Arc::clone(&arc));
    }
    arc
}

/// All ordered paths for an n-site network in the canonical labeling
/// (initial = 0, trap = 1, intermediates drawn from 2..n), unscored.
pub fn enumerate_paths(n: usize) -> Result<Vec<Path>> {
    enumerate_paths_with_ceiling(n, DEFAULT_PATH_CEILING)
}

pub fn enumerate_paths_with_ceiling(n: usize, ceiling: u128) -> Result<Vec<Path>> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!(
            "path enumeration needs n >= 2, got {n}"
        )));
    }
    if n > MAX_ENUMERATION_SITES {
        return Err(Error::InvalidParameter(format!(
            "path enumeration is capped at n = {MAX_ENUMERATION_SITES}, got {n}"
        )));
    }
    let count = path_count(n);
    if count > ceiling {
        return Err(Error::PathCeilingExceeded { n, count, ceiling });
    }
    Ok(canonical_sequences(n)
        .iter()
        .map(|seq| Path {
            intermediates: seq.clone(),
            strength: 0.0,
        })
        .collect())
}

fn check_endpoints(n: usize, initial: usize, trap: usize) -> Result<()> {
    if initial >= n || trap >= n || initial == trap {
        return Err(Error::InvalidParameter(format!(
            "invalid endpoints initial={initial}, trap={trap} for n={n}"
        )));
    }
    Ok(())
}

/// Harmonic path strength in cm⁻¹; the empty path scores the direct link
/// |H[initial, trap]|, and any zero coupling along the way yields 0.
pub fn path_strength(
    path: &Path,
    h: &ExcitonHamiltonian,
    initial: usize,
    trap: usize,
) -> Result<f64> {
    let n = h.n();
    check_endpoints(n, initial, trap)?;
    let mut seen = vec![false; n];
    for &c in &path.intermediates {
        if c >= n || c == initial || c == trap || seen[c] {
            return Err(Error::InvalidParameter(format!(
                "path intermediate {c} is out of range, repeated, or an endpoint"
            )));
        }
        seen[c] = true;
    }
    let hm = h.matrix();
    let mut inv_sum = 0.0;
    let mut last = initial;
    for &c in path.intermediates.iter().chain(std::iter::once(&trap)) {
        let j = hm[(last, c)].abs();
        if j == 0.0 {
            return Ok(0.0);
        }
        inv_sum += 1.0 / j;
        last = c;
    }
    Ok(1.0 / inv_sum)
}

/// Score every path in place.
pub fn score_paths(
    paths: &mut [Path],
    h: &ExcitonHamiltonian,
    initial: usize,
    trap: usize,
) -> Result<()> {
    for p in paths.iter_mut() {
        p.strength = path_strength(p, h, initial, trap)?;
    }
    Ok(())
}

/// Extremal pathway statistics computed without full enumeration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PathMetrics {
    pub max_strength: f64,
    pub count_over_threshold: usize,
}

/// Branch-and-bound over ordered paths: the harmonic strength of any
/// extension is bounded by the inverse of the accumulated inverse-coupling
/// sum, so a prefix is abandoned once that bound can neither beat the best
/// strength nor clear the threshold.
pub fn path_metrics(
    h: &ExcitonHamiltonian,
    initial: usize,
    trap: usize,
    threshold: f64,
) -> Result<PathMetrics> {
    let n = h.n();
    check_endpoints(n, initial, trap)?;
    if n > 64 {
        return Err(Error::InvalidParameter(format!(
            "path metrics are capped at n = 64, got {n}"
        )));
    }
    if !threshold.is_finite() || threshold < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "threshold must be finite and >= 0, got {threshold}"
        )));
    }
    let hm = h.matrix();
    struct Ctx<'a> {
        hm: &'a nalgebra::DMatrix<f64>,
        n: usize,
        initial: usize,
        trap: usize,
        threshold: f64,
        best: f64,
        count: usize,
    }
    fn dfs(ctx: &mut Ctx, last: usize, inv_sum: f64, used: u64) {
        let j_close = ctx.hm[(last, ctx.trap)].abs();
        if j_close > 0.0 {
            let s = 1.0 / (inv_sum + 1.0 / j_close);
            if s > ctx.best {
                ctx.best = s;
            }
            if s > ctx.threshold {
                ctx.count += 1;
            }
        }
        for c in 0..ctx.n {
            if c == ctx.initial || c == ctx.trap || used & (1 << c) != 0 {
                continue;
            }
            let j = ctx.hm[(last, c)].abs();
            if j == 0.0 {
                continue;
            }
            let inv_next = inv_sum + 1.0 / j;
            let bound = 1.0 / inv_next;
            if bound <= ctx.threshold && bound <= ctx.best {
                continue;
            }
            dfs(ctx, c, inv_next, used | (1 << c));
        }
    }
    let mut ctx = Ctx {
        hm,
        n,
        initial,
        trap,
        threshold,
        best: 0.0,
        count: 0,
    };
    dfs(&mut ctx, initial, 0.0, 0);
    Ok(PathMetrics {
        max_strength: ctx.best,
        count_over_threshold: ctx.count,
    })
}

/// Number of paths with strength strictly above `threshold` (cm⁻¹).
pub fn dominant_path_count(
    h: &ExcitonHamiltonian,
    initial: usize,
    trap: usize,
    threshold: f64,
) -> Result<usize> {
    path_metrics(h, initial, trap, threshold).map(|m| m.count_over_threshold)
}

/// Mean distance of the intermediate sites from the pole axis,
/// √(x² + y²) averaged over every site that is neither initial nor trap.
pub fn z_axis_proximity(config: &Configuration) -> Result<f64> {
    let n = config.n();
    if n < 3 {
        return Err(Error::InvalidParameter(format!(
            "z-axis proximity needs n >= 3 (at least one intermediate), got {n}"
        )));
    }
    let mut sum = 0.0;
    let mut m = 0usize;
    for (j, site) in config.chromophores.iter().enumerate() {
        if j == config.initial_index || j == config.trap_index {
            continue;
        }
        sum += site.position.x.hypot(site.position.y);
        m += 1;
    }
    Ok(sum / m as f64)
}

/// Serialized per-instance pathway summary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathSummary {
    pub max_strength: f64,
    pub count_over_1000: usize,
    pub threshold: f64,
    /// Path-strength histogram over [0, max_strength], last bin inclusive.
    pub histogram_bins: Vec<usize>,
    pub bin_edges: Vec<f64>,
}

/// Full enumeration summary (subject to the ceiling): extremes plus a
/// strength histogram with `bins` equal-width bins over [0, max].
pub fn summarize_paths(
    h: &ExcitonHamiltonian,
    initial: usize,
    trap: usize,
    bins: usize,
    threshold: f64,
    ceiling: u128,
) -> Result<PathSummary> {
    let n = h.n();
    check_endpoints(n, initial, trap)?;
    if bins == 0 {
        return Err(Error::InvalidParameter("bins must be >= 1".into()));
    }
    if n > MAX_ENUMERATION_SITES {
        return Err(Error::InvalidParameter(format!(
            "path enumeration is capped at n = {MAX_ENUMERATION_SITES}, got {n}"
        )));
    }
    let count = path_count(n);
    if count > ceiling {
        return Err(Error::PathCeilingExceeded { n, count, ceiling });
    }
    let pool: Vec<usize> = (0..n).filter(|&s| s != initial && s != trap).collect();
    let sequences = intermediate_sequences(&pool, n);
    let mut strengths = Vec::with_capacity(sequences.len());
    for seq in &sequences {
        let p = Path {
            intermediates: seq.clone(),
            strength: 0.0,
        };
        strengths.push(path_strength(&p, h, initial, trap)?);
    }
    let max_strength = strengths.iter().cloned().fold(0.0f64, f64::max);
    let count_over = strengths.iter().filter(|&&s| s > threshold).count();
    let width = if max_strength > 0.0 {
        max_strength / bins as f64
    } else {
        1.0
    };
    let mut histogram = vec![0usize; bins];
    for &s in &strengths {
        let idx = ((s / width) as usize).min(bins - 1);
        histogram[idx] += 1;
    }
    let bin_edges: Vec<f64> = (0..=bins).map(|i| i as f64 * width).collect();
    Ok(PathSummary {
        max_strength,
        count_over_1000: count_over,
        threshold,
        histogram_bins: histogram,
        bin_edges,
    })
}
