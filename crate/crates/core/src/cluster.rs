//! K-means in the 2D (expression summary, predicted probability) plane:
//! k-means++ seeding, Lloyd iterations with empty-cluster repair, best of
//! several restarts, and top-risk cluster selection.

use alloc::string::String;
use alloc::vec::Vec;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{CoreError, Result};
use crate::rng::{derive_seed, rng_from_seed};

pub const MAX_LLOYD_ITERATIONS: usize = 300;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterPoint {
    pub id: String,
    pub expression: f64,
    pub probability: f64,
}

/// The expression axis of the cluster plane.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ExpressionAxis {
    /// Row mean over all standardized features.
    Mean,
    /// A single named standardized column (e.g. a fold-change column).
    Column(String),
}

/// Pairs each row's expression summary with its predicted probability.
/// `data` is expected to hold standardized features.
pub fn build_cluster_space(
    data: &Dataset,
    probabilities: &[f64],
    axis: &ExpressionAxis,
) -> Result<Vec<ClusterPoint>> {
    if probabilities.len() != data.n() {
        return Err(CoreError::LengthMismatch { expected: data.n(), got: probabilities.len() });
    }
    let expressions: Vec<f64> = match axis {
        ExpressionAxis::Mean => data
            .x
            .iter_rows()
            .map(|r| r.iter().sum::<f64>() / r.len().max(1) as f64)
            .collect(),
        ExpressionAxis::Column(name) => {
            let j = data
                .feature_names
                .iter()
                .position(|n| n == name)
                .ok_or_else(|| CoreError::MissingColumn { name: name.clone() })?;
            data.x.column(j)
        }
    };
    Ok(data
        .ids
        .iter()
        .zip(expressions)
        .zip(probabilities)
        .map(|((id, expression), &probability)| ClusterPoint {
            id: id.clone(),
            expression,
            probability,
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KMeansResult {
    pub centroids: Vec<[f64; 2]>,
    pub assignments: Vec<usize>,
    pub objective: f64,
    pub iterations: usize,
    pub seed: u64,
    /// Objective after each Lloyd iteration of the winning restart.
    pub objective_trace: Vec<f64>,
}

fn dist_sq(a: [f64; 2], b: [f64; 2]) -> f64 {
    let dx = a[0] - b[0];
    let dy = a[1] - b[1];
    dx * dx + dy * dy
}

fn coords(p: &ClusterPoint) -> [f64; 2] {
    [p.expression, p.probability]
}

/// k-means++ seeding: first centroid uniform, each next centroid drawn with
/// probability proportional to squared distance from the nearest chosen one.
fn kmeanspp_init<R: Rng>(points: &[[f64; 2]], k: usize, rng: &mut R) -> Vec<[f64; 2]> {
    let mut centroids = Vec::with_capacity(k);
    centroids.push(points[rng.gen_range(0..points.len())]);
    let mut d2: Vec<f64> = points.iter().map(|&p| dist_sq(p, centroids[0])).collect();
    while centroids.len() < k {
        let total: f64 = d2.iter().sum();
        let next = if total > 0.0 {
            let mut target = rng.gen_range(0.0..total);
            let mut chosen = points.len() - 1;
            for (i, &w) in d2.iter().enumerate() {
                if target < w {
                    chosen = i;
                    break;
                }
                target -= w;
            }
            points[chosen]
        } else {
            points[rng.gen_range(0..points.len())]
        };
        centroids.push(next);
        for (dist, &p) in d2.iter_mut().zip(points) {
            *dist = dist.min(dist_sq(p, next));
        }
    }
    centroids
}

fn nearest(point: [f64; 2], centroids: &[[f64; 2]]) -> usize {
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    for (c, &centroid) in centroids.iter().enumerate() {
        let d = dist_sq(point, centroid);
        if d < best_d {
            best_d = d;
            best = c;
        }
    }
    best
}

struct LloydRun {
    centroids: Vec<[f64; 2]>,
    assignments: Vec<usize>,
    objective: f64,
    iterations: usize,
    trace: Vec<f64>,
}

fn lloyd(points: &[[f64; 2]], k: usize, seed: u64) -> LloydRun {
    let mut rng = rng_from_seed(seed);
    let mut centroids = kmeanspp_init(points, k, &mut rng);
    let mut assignments: Vec<usize> = points.iter().map(|&p| nearest(p, &centroids)).collect();
    let mut trace = Vec::new();
    let mut iterations = 0;

    loop {
        // centroid update
        let mut sums = alloc::vec![[0.0f64; 2]; k];
        let mut counts = alloc::vec![0usize; k];
        for (&a, &p) in assignments.iter().zip(points) {
            sums[a][0] += p[0];
            sums[a][1] += p[1];
            counts[a] += 1;
        }
        for c in 0..k {
            if counts[c] > 0 {
                centroids[c] = [sums[c][0] / counts[c] as f64, sums[c][1] / counts[c] as f64];
            } else {
                // reseed an empty cluster at the point farthest from its
                // currently assigned centroid
                let far = (0..points.len())
                    .max_by(|&a, &b| {
                        dist_sq(points[a], centroids[assignments[a]])
                            .total_cmp(&dist_sq(points[b], centroids[assignments[b]]))
                    })
                    .unwrap();
                centroids[c] = points[far];
            }
        }

        // reassignment
        let new_assignments: Vec<usize> = points.iter().map(|&p| nearest(p, &centroids)).collect();
        let objective: f64 = points
            .iter()
            .zip(&new_assignments)
            .map(|(&p, &a)| dist_sq(p, centroids[a]))
            .sum();
        trace.push(objective);
        iterations += 1;
        let stable = new_assignments == assignments;
        assignments = new_assignments;
        if stable || iterations >= MAX_LLOYD_ITERATIONS {
            return LloydRun { centroids, assignments, objective: *trace.last().unwrap(), iterations, trace };
        }
    }
}

/// Best of `restarts` seeded Lloyd runs by lowest objective, ties broken by
/// lowest restart index.
pub fn kmeans(points: &[ClusterPoint], k: usize, seed: u64, restarts: usize) -> Result<KMeansResult> {
    if restarts == 0 {
        return Err(CoreError::InvalidHyperparameter {
            reason: alloc::string::ToString::to_string("restarts must be >= 1"),
        });
    }
    if points.is_empty() {
        return Err(CoreError::TooFewPoints { needed: 1, got: 0 });
    }
    let coords_vec: Vec<[f64; 2]> = points.iter().map(coords).collect();
    let mut distinct = coords_vec.clone();
    distinct.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
    distinct.dedup();
    if k == 0 || k > distinct.len() {
        return Err(CoreError::InvalidK { k, n_points: distinct.len() });
    }

    let mut best: Option<LloydRun> = None;
    for r in 0..restarts {
        let run = lloyd(&coords_vec, k, derive_seed(seed, r as u64));
        let replace = match &best {
            None => true,
            Some(b) => run.objective < b.objective,
        };
        if replace {
            best = Some(run);
        }
    }
    let run = best.unwrap();
    Ok(KMeansResult {
        centroids: run.centroids,
        assignments: run.assignments,
        objective: run.objective,
        iterations: run.iterations,
        seed,
        objective_trace: run.trace,
    })
}

/// Cluster with the highest mean probability; ties break to the lowest index.
/// Member ids come back sorted.
pub fn top_cluster(result: &KMeansResult, points: &[ClusterPoint]) -> Result<(usize, Vec<String>)> {
    if result.assignments.len() != points.len() {
        return Err(CoreError::InconsistentInput);
    }
    let k = result.centroids.len();
    if result.assignments.iter().any(|&a| a >= k) {
        return Err(CoreError::InconsistentInput);
    }
    let mut sums = alloc::vec![0.0f64; k];
    let mut counts = alloc::vec![0usize; k];
    for (&a, p) in result.assignments.iter().zip(points) {
        sums[a] += p.probability;
        counts[a] += 1;
    }
    let mut best = 0;
    let mut best_mean = f64::NEG_INFINITY;
    for c in 0..k {
        if counts[c] == 0 {
            continue;
        }
        let mean = sums[c] / counts[c] as f64;
        if mean > best_mean {
            best_mean = mean;
            best = c;
        }
    }
    let mut ids: Vec<String> = result
        .assignments
        .iter()
        .zip(points)
        .filter(|(&a, _)| a == best)
        .map(|(_, p)| p.id.clone())
        .collect();
    ids.sort();
    Ok((best, ids))
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::format;
    use alloc::string::ToString;
    use alloc::vec;
    use crate::matrix::Matrix;

    fn points_from(coords: &[(f64, f64)]) -> Vec<ClusterPoint> {
        coords
            .iter()
            .enumerate()
            .map(|(i, &(e, p))| ClusterPoint { id: format!("p{i}"), expression: e, probability: p })
            .collect()
    }

    #[test]
    fn build_space_row_means() {
        let ids = vec!["a".to_string(), "b".to_string(), "c".to_string()];
        let names = vec!["f1".to_string(), "f2".to_string()];
        let x = Matrix::from_rows(&[vec![1.0, -1.0], vec![2.0, -2.0], vec![0.0, 0.0]]).unwrap();
        let data = Dataset::new(ids, names, x, vec![0, 1, 0]).unwrap();
        let pts = build_cluster_space(&data, &[0.1, 0.9, 0.5], &ExpressionAxis::Mean).unwrap();
        assert_eq!(pts.iter().map(|p| p.expression).collect::<Vec<_>>(), vec![0.0, 0.0, 0.0]);
        assert_eq!(pts[1].probability, 0.9);
    }

    #[test]
    fn build_space_named_column() {
        let ids = vec!["a".to_string(), "b".to_string()];
        let names = vec!["fold_change".to_string(), "other".to_string()];
        let x = Matrix::from_rows(&[vec![1.5, 9.0], vec![-0.5, 9.0]]).unwrap();
        let data = Dataset::new(ids, names, x, vec![0, 1]).unwrap();
        let pts = build_cluster_space(
            &data,
            &[0.2, 0.8],
            &ExpressionAxis::Column("fold_change".to_string()),
        )
        .unwrap();
        assert_eq!(pts[0].expression, 1.5);
        assert_eq!(pts[1].expression, -0.5);

        let err = build_cluster_space(
            &data,
            &[0.2, 0.8],
            &ExpressionAxis::Column("missing".to_string()),
        )
        .unwrap_err();
        assert_eq!(err, CoreError::MissingColumn { name: "missing".to_string() });
    }

    #[test]
    fn build_space_length_mismatch() {
        let ids = vec!["a".to_string()];
        let names = vec!["f".to_string()];
        let x = Matrix::from_rows(&[vec![1.0]]).unwrap();
        let data = Dataset::new(ids, names, x, vec![0]).unwrap();
        assert_eq!(
            build_cluster_space(&data, &[0.1, 0.2], &ExpressionAxis::Mean).unwrap_err(),
            CoreError::LengthMismatch { expected: 1, got: 2 }
        );
    }

    #[test]
    fn exact_fit_with_k_equal_n() {
        let pts = points_from(&[(0.0, 0.0), (1.0, 1.0), (2.0, 0.5)]);
        let r = kmeans(&pts, 3, 1, 5).unwrap();
        assert!(r.objective < 1e-24);
        let mut seen = r.assignments.clone();
        seen.sort_unstable();
        assert_eq!(seen, vec![0, 1, 2]);
    }

    #[test]
    fn two_tight_blobs() {
        let pts = points_from(&[
            (0.0, 0.0),
            (0.0, 0.1),
            (0.1, 0.0),
            (5.0, 5.0),
            (5.0, 5.1),
            (5.1, 5.0),
        ]);
        let r = kmeans(&pts, 2, 3, 10).unwrap();
        assert_eq!(r.assignments[0], r.assignments[1]);
        assert_eq!(r.assignments[0], r.assignments[2]);
        assert_eq!(r.assignments[3], r.assignments[4]);
        assert_eq!(r.assignments[3], r.assignments[5]);
        assert_ne!(r.assignments[0], r.assignments[3]);
    }

    #[test]
    fn invalid_k() {
        let pts = points_from(&[(0.0, 0.0), (1.0, 1.0)]);
        assert!(matches!(kmeans(&pts, 3, 0, 1), Err(CoreError::InvalidK { .. })));
        // duplicates collapse the distinct count
        let dup = points_from(&[(0.0, 0.0), (0.0, 0.0), (1.0, 1.0)]);
        assert!(matches!(kmeans(&dup, 3, 0, 1), Err(CoreError::InvalidK { .. })));
    }

    #[test]
    fn objective_trace_non_increasing() {
        let pts = points_from(&[
            (0.0, 0.2), (0.4, 0.1), (1.1, 0.9), (2.0, 0.3), (2.2, 0.8),
            (3.0, 0.5), (0.7, 0.6), (1.5, 0.4),
        ]);
        let r = kmeans(&pts, 3, 7, 4).unwrap();
        for w in r.objective_trace.windows(2) {
            assert!(w[1] <= w[0] + 1e-12, "trace increased: {w:?}");
        }
        // final assignment maps each point to its nearest centroid
        for (p, &a) in pts.iter().zip(&r.assignments) {
            let n = nearest(coords(p), &r.centroids);
            assert_eq!(
                dist_sq(coords(p), r.centroids[n]),
                dist_sq(coords(p), r.centroids[a])
            );
        }
    }

    #[test]
    fn deterministic_per_seed() {
        let pts = points_from(&[
            (0.0, 0.2), (0.4, 0.1), (1.1, 0.9), (2.0, 0.3), (2.2, 0.8), (3.0, 0.5),
        ]);
        let a = kmeans(&pts, 2, 5, 8).unwrap();
        let b = kmeans(&pts, 2, 5, 8).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn top_cluster_by_mean_probability() {
        let pts = points_from(&[(0.0, 0.1), (0.1, 0.9), (0.2, 0.5)]);
        let result = KMeansResult {
            centroids: vec![[0.0, 0.1], [0.1, 0.9], [0.2, 0.5]],
            assignments: vec![0, 1, 2],
            objective: 0.0,
            iterations: 1,
            seed: 0,
            objective_trace: vec![0.0],
        };
        let (c, ids) = top_cluster(&result, &pts).unwrap();
        assert_eq!(c, 1);
        assert_eq!(ids, vec!["p1".to_string()]);
    }

    #[test]
    fn top_cluster_tie_breaks_low_index() {
        let pts = points_from(&[(0.0, 0.5), (1.0, 0.5)]);
        let result = KMeansResult {
            centroids: vec![[0.0, 0.5], [1.0, 0.5]],
            assignments: vec![0, 1],
            objective: 0.0,
            iterations: 1,
            seed: 0,
            objective_trace: vec![0.0],
        };
        assert_eq!(top_cluster(&result, &pts).unwrap().0, 0);
    }

    #[test]
    fn top_cluster_k1_returns_all() {
        let pts = points_from(&[(0.0, 0.1), (1.0, 0.9)]);
        let r = kmeans(&pts, 1, 0, 1).unwrap();
        let (c, ids) = top_cluster(&r, &pts).unwrap();
        assert_eq!(c, 0);
        assert_eq!(ids.len(), 2);
    }

    #[test]
    fn top_cluster_inconsistent() {
        let pts = points_from(&[(0.0, 0.1)]);
        let result = KMeansResult {
            centroids: vec![[0.0, 0.1]],
            assignments: vec![0, 0],
            objective: 0.0,
            iterations: 1,
            seed: 0,
            objective_trace: vec![0.0],
        };
        assert_eq!(top_cluster(&result, &pts).unwrap_err(), CoreError::InconsistentInput);
    }
}
