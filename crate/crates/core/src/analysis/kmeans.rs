//! Lloyd's k-means with seeded farthest-point initialization and elbow
//! selection over an inertia sweep.

use super::AnalysisError;
use crate::encoder::PretrainedVectors;
use crate::numerics::rng::SplitMix64;

#[derive(Debug, Clone)]
pub struct KmeansResult {
    pub centroids: Vec<Vec<f64>>,
    pub assignments: Vec<usize>,
    pub inertia: f64,
    pub iterations: usize,
    /// Inertia after each Lloyd iteration (non-increasing).
    pub inertia_trace: Vec<f64>,
}

fn dist_sq(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn nearest(point: &[f64], centroids: &[Vec<f64>]) -> (usize, f64) {
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    for (i, c) in centroids.iter().enumerate() {
        let d = dist_sq(point, c);
        if d < best_d {
            best_d = d;
            best = i;
        }
    }
    (best, best_d)
}

fn count_distinct(points: &[Vec<f64>]) -> usize {
    let mut sorted: Vec<&Vec<f64>> = points.iter().collect();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    let mut distinct = 0;
    let mut prev: Option<&Vec<f64>> = None;
    for p in sorted {
        if prev != Some(p) {
            distinct += 1;
            prev = Some(p);
        }
    }
    distinct
}

/// k-means: a seeded random first centroid, farthest-point selection for
/// the rest, then Lloyd iterations until the assignment reaches a fixpoint
/// or `max_iter`. Empty clusters are re-seeded to the point farthest from
/// its current centroid. Fully deterministic given the seed.
pub fn kmeans(
    points: &[Vec<f64>],
    k: usize,
    seed: u64,
    max_iter: usize,
) -> Result<KmeansResult, AnalysisError> {
    let n = points.len();
    if k == 0 || k > n {
        return Err(AnalysisError::BadInput(format!(
            "k = {k} out of range for {n} points"
        )));
    }
    if count_distinct(points) < k {
        return Err(AnalysisError::BadInput(format!(
            "k = {k} exceeds the number of distinct points"
        )));
    }
    let dim = points[0].len();
    if points.iter().any(|p| p.len() != dim) {
        return Err(AnalysisError::BadInput("ragged point dimensions".into()));
    }

    let mut rng = SplitMix64::new(seed);
    let mut centroids: Vec<Vec<f64>> = vec![points[rng.below(n)].clone()];
    while centroids.len() < k {
        // Farthest point from its nearest chosen centroid; ties -> lowest
        // index.
        let mut best_idx = 0;
        let mut best_d = -1.0;
        for (i, p) in points.iter().enumerate() {
            let (_, d) = nearest(p, &centroids);
            if d > best_d {
                best_d = d;
                best_idx = i;
            }
        }
        centroids.push(points[best_idx].clone());
    }

    let mut assignments = vec![0usize; n];
    let mut inertia_trace = Vec::new();
    let mut iterations = 0;
    loop {
        // Assignment step.
        let mut changed = false;
        let mut inertia = 0.0;
        for (i, p) in points.iter().enumerate() {
            let (c, d) = nearest(p, &centroids);
            if assignments[i] != c {
                changed = true;
                assignments[i] = c;
            }
            inertia += d;
        }
        inertia_trace.push(inertia);
        if (!changed && iterations > 0) || iterations >= max_iter {
            return Ok(KmeansResult {
                centroids,
                assignments,
                inertia,
                iterations,
                inertia_trace,
            });
        }
        // Update step.
        let mut sums = vec![vec![0.0; dim]; k];
        let mut counts = vec![0usize; k];
        for (i, p) in points.iter().enumerate() {
            counts[assignments[i]] += 1;
            for (s, v) in sums[assignments[i]].iter_mut().zip(p) {
                *s += v;
            }
        }
        for c in 0..k {
            if counts[c] == 0 {
                // Re-seed to the point farthest from its assigned centroid.
                let mut best_idx = 0;
                let mut best_d = -1.0;
                for (i, p) in points.iter().enumerate() {
                    let d = dist_sq(p, &centroids[assignments[i]]);
                    if d > best_d {
                        best_d = d;
                        best_idx = i;
                    }
                }
                centroids[c] = points[best_idx].clone();
            } else {
                for (j, s) in sums[c].iter().enumerate() {
                    centroids[c][j] = s / counts[c] as f64;
                }
            }
        }
        iterations += 1;
    }
}

/// Elbow choice over an inertia sweep for k = 1..=K.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ElbowChoice {
    pub k: usize,
    /// False when the maximum curvature is not unique (no clear elbow).
    pub clear: bool,
}

/// Picks k at the maximum second forward difference of the inertia curve
/// (maximum curvature). `inertias[i]` is the inertia for k = i+1; at least
/// three values are required. Ties resolve to the smaller k and clear the
/// `clear` flag.
pub fn elbow_select(inertias: &[f64]) -> Result<ElbowChoice, AnalysisError> {
    let k_max = inertias.len();
    if k_max < 3 {
        return Err(AnalysisError::BadInput(format!(
            "elbow selection needs at least 3 inertias, got {k_max}"
        )));
    }
    if inertias.iter().any(|v| !v.is_finite()) {
        return Err(AnalysisError::BadInput("non-finite inertia".into()));
    }
    let mut best_k = 2usize;
    let mut best_curv = f64::NEG_INFINITY;
    let mut ties = 0usize;
    for i in 1..k_max - 1 {
        let curv = inertias[i + 1] - 2.0 * inertias[i] + inertias[i - 1];
        if curv > best_curv {
            best_curv = curv;
            best_k = i + 1; // 1-based k
            ties = 1;
        } else if curv == best_curv {
            ties += 1;
        }
    }
    Ok(ElbowChoice {
        k: best_k,
        clear: ties == 1,
    })
}

/// Summary of clustering free-text reason strings.
#[derive(Debug, Clone)]
pub struct ClusterReport {
    pub chosen: ElbowChoice,
    pub result: KmeansResult,
    /// (k, inertia) pairs from the sweep.
    pub inertia_by_k: Vec<(usize, f64)>,
    /// Texts dropped because no token had a pretrained vector.
    pub dropped: usize,
    /// Indices into the original text list for each clustered row.
    pub kept: Vec<usize>,
}

/// Clusters free-text reason strings: each string becomes the mean of its
/// tokens' pretrained vectors (unknown tokens excluded; strings with no
/// known token dropped and counted), then k-means over k = 1..=max_k with
/// elbow selection.
pub fn cluster_reason_texts(
    texts: &[String],
    vectors: &PretrainedVectors,
    max_k: usize,
    seed: u64,
    max_iter: usize,
) -> Result<ClusterReport, AnalysisError> {
    let mut points = Vec::new();
    let mut kept = Vec::new();
    let mut dropped = 0usize;
    for (i, text) in texts.iter().enumerate() {
        let tokens = crate::corpus::tokenize(text);
        let mut sum = vec![0.0; vectors.dim()];
        let mut count = 0usize;
        for t in &tokens {
            if let Some(v) = vectors.get(t) {
                for (s, x) in sum.iter_mut().zip(v) {
                    *s += x;
                }
                count += 1;
            }
        }
        if count == 0 {
            dropped += 1;
            continue;
        }
        for s in sum.iter_mut() {
            *s /= count as f64;
        }
        points.push(sum);
        kept.push(i);
    }
    if points.is_empty() {
        return Err(AnalysisError::BadInput(
            "no reason text had known tokens".into(),
        ));
    }
    let distinct = count_distinct(&points);
    let sweep_max = max_k.min(distinct).max(1);
    let mut inertia_by_k = Vec::new();
    let mut results = Vec::new();
    for k in 1..=sweep_max {
        let r = kmeans(&points, k, seed, max_iter)?;
        inertia_by_k.push((k, r.inertia));
        results.push(r);
    }
    let inertias: Vec<f64> = inertia_by_k.iter().map(|&(_, v)| v).collect();
    let chosen = if inertias.len() >= 3 {
        elbow_select(&inertias)?
    } else {
        ElbowChoice {
            k: inertias.len(),
            clear: false,
        }
    };
    let result = results.swap_remove(chosen.k - 1);
    Ok(ClusterReport {
        chosen,
        result,
        inertia_by_k,
        dropped,
        kept,
    })
}
