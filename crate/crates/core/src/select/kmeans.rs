//! Lloyd's k-means with k-means++ seeding.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::rng::SeededRng;

#[derive(Debug, Clone, PartialEq)]
pub struct KMeansResult {
    pub centroids: Vec<Vec<f64>>,
    pub assignments: Vec<usize>,
    /// Inertia after each assignment step, including the final one.
    pub inertia_history: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

impl KMeansResult {
    pub fn inertia(&self) -> f64 {
        *self.inertia_history.last().unwrap_or(&0.0)
    }
}

fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Nearest centroid per point (lowest index on ties) and squared distance.
fn assign(points: &[Vec<f64>], centroids: &[Vec<f64>]) -> Vec<(usize, f64)> {
    points
        .par_iter()
        .map(|p| {
            centroids
                .iter()
                .enumerate()
                .map(|(j, c)| (j, dist2(p, c)))
                .fold((0, f64::INFINITY), |best, cur| if cur.1 < best.1 { cur } else { best })
        })
        .collect()
}

fn plus_plus_init(points: &[Vec<f64>], k: usize, rng: &mut SeededRng) -> Vec<Vec<f64>> {
    let m = points.len();
    let mut centroids = vec![points[rng.below(m as u64) as usize].clone()];
    let mut d2: Vec<f64> = points.iter().map(|p| dist2(p, &centroids[0])).collect();
    while centroids.len() < k {
        let total: f64 = d2.iter().sum();
        let pick = if total > 0.0 {
            let target = rng.unit() * total;
            let mut acc = 0.0;
            let mut chosen = None;
            for (i, &d) in d2.iter().enumerate() {
                if d == 0.0 {
                    continue;
                }
                acc += d;
                chosen = Some(i);
                if acc > target {
                    break;
                }
            }
            chosen.expect("positive total implies a positive weight")
        } else {
            rng.below(m as u64) as usize
        };
        let c = points[pick].clone();
        for (d, p) in d2.iter_mut().zip(points) {
            *d = d.min(dist2(p, &c));
        }
        centroids.push(c);
    }
    centroids
}

/// Clusters `points` into `k` groups. Stops when no centroid moves by
/// `tol` or more (Euclidean), or after `max_iters` updates. An empty cluster
/// is re-seeded at the point farthest from its current centroid.
pub fn kmeans(points: &[Vec<f64>], k: usize, seed: u64, max_iters: usize, tol: f64) -> Result<KMeansResult> {
    if k == 0 {
        return Err(Error::InvalidArgument("k must be >= 1".into()));
    }
    if k > points.len() {
        return Err(Error::InvalidArgument(format!(
            "k = {k} exceeds the number of points ({})",
            points.len()
        )));
    }
    let dim = points[0].len();
    if let Some(p) = points.iter().find(|p| p.len() != dim) {
        return Err(Error::DimensionMismatch {
            left: dim,
            right: p.len(),
        });
    }
    let mut rng = SeededRng::new(seed);
    let mut centroids = plus_plus_init(points, k, &mut rng);
    let mut history = Vec::new();
    let mut converged = false;
    let mut iterations = 0;

    while iterations < max_iters {
        let assigned = assign(points, &centroids);
        history.push(assigned.iter().map(|a| a.1).sum());
        iterations += 1;

        // running means stay exact when all members of a cluster coincide
        let mut means = vec![vec![0.0f64; dim]; k];
        let mut counts = vec![0usize; k];
        for (p, &(j, _)) in points.iter().zip(&assigned) {
            counts[j] += 1;
            let c = counts[j] as f64;
            for (m, v) in means[j].iter_mut().zip(p) {
                *m += (v - *m) / c;
            }
        }
        let mut taken: Vec<usize> = Vec::new();
        let mut shift = 0.0f64;
        for j in 0..k {
            let next = if counts[j] > 0 {
                std::mem::take(&mut means[j])
            } else {
                let far = assigned
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| !taken.contains(i))
                    .fold(None::<(usize, f64)>, |best, (i, a)| match best {
                        Some((_, d)) if a.1 <= d => best,
                        _ => Some((i, a.1)),
                    })
                    .map(|(i, _)| i)
                    .unwrap_or(0);
                taken.push(far);
                points[far].clone()
            };
            shift = shift.max(dist2(&centroids[j], &next).sqrt());
            centroids[j] = next;
        }
        if shift < tol {
            converged = true;
            break;
        }
    }

    let assigned = assign(points, &centroids);
    history.push(assigned.iter().map(|a| a.1).sum());
    Ok(KMeansResult {
        centroids,
        assignments: assigned.into_iter().map(|a| a.0).collect(),
        inertia_history: history,
        iterations,
        converged,
    })
}
