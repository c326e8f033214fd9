//! Two-cluster spherical k-means on `(ln n_i, ln n_r)` endpoint vectors.
//!
//! Submissions that saturate almost immediately lie on a flatter ray than
//! the growing majority; cosine distance separates the two rays regardless
//! of overall popularity.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::series::PopPair;

/// When and how to drop the slowly growing cluster before fitting.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClusterConfig {
    pub enabled: bool,
    /// The filter only runs for indicator ages up to this value; the two
    /// clusters merge once popularity saturates.
    pub max_indicator_age: f64,
    pub max_iter: usize,
    pub seed: u64,
}

impl Default for ClusterConfig {
    fn default() -> Self {
        ClusterConfig {
            enabled: true,
            max_indicator_age: 7.0,
            max_iter: 100,
            seed: 0,
        }
    }
}

impl ClusterConfig {
    pub fn disabled() -> Self {
        ClusterConfig {
            enabled: false,
            ..Default::default()
        }
    }

    pub fn applies_at(&self, t_i: f64) -> bool {
        self.enabled && t_i <= self.max_indicator_age
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClusterSplit {
    /// Cluster with the larger mean `ln(n_r / n_i)`.
    pub upper: Vec<PopPair>,
    pub lower: Vec<PopPair>,
    /// Set when the points share one direction and no split exists.
    pub degenerate: bool,
}

impl ClusterSplit {
    fn all_upper(pairs: &[PopPair]) -> Self {
        ClusterSplit {
            upper: pairs.to_vec(),
            lower: Vec::new(),
            degenerate: true,
        }
    }

    pub fn upper_fraction(&self) -> f64 {
        self.upper.len() as f64 / (self.upper.len() + self.lower.len()) as f64
    }
}

fn unit(v: [f64; 2]) -> [f64; 2] {
    let norm = v[0].hypot(v[1]);
    if norm > 0.0 {
        [v[0] / norm, v[1] / norm]
    } else {
        [0.0, 0.0]
    }
}

fn cosine(a: [f64; 2], b: [f64; 2]) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

/// Splits pairs into two clusters by cosine distance (`1 - cos`). Seeding is
/// k-means++ with a fixed seed; ties go to the lower cluster index.
pub fn cluster_filter(pairs: &[PopPair], max_iter: usize, seed: u64) -> Result<ClusterSplit> {
    if pairs.len() < 2 {
        return Err(Error::InsufficientData {
            needed: 2,
            got: pairs.len(),
        });
    }
    let points: Vec<[f64; 2]> = pairs
        .iter()
        .map(|p| unit([p.n_i.ln(), p.n_r.ln()]))
        .collect();

    let reference = points.iter().find(|p| p[0] != 0.0 || p[1] != 0.0);
    let Some(&reference) = reference else {
        return Ok(ClusterSplit::all_upper(pairs));
    };
    let same_direction = points
        .iter()
        .all(|&p| (p[0] == 0.0 && p[1] == 0.0) || 1.0 - cosine(p, reference) <= 1e-12);
    if same_direction {
        return Ok(ClusterSplit::all_upper(pairs));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let first = points[rng.random_range(0..points.len())];
    let weights: Vec<f64> = points
        .iter()
        .map(|&p| (1.0 - cosine(p, first)).powi(2))
        .collect();
    let total: f64 = weights.iter().sum();
    let second = if total > 0.0 {
        let mut target = rng.random::<f64>() * total;
        let mut chosen = points.len() - 1;
        for (i, w) in weights.iter().enumerate() {
            if target < *w {
                chosen = i;
                break;
            }
            target -= w;
        }
        points[chosen]
    } else {
        return Ok(ClusterSplit::all_upper(pairs));
    };

    let mut centers = [first, second];
    let mut labels = vec![usize::MAX; points.len()];
    for _ in 0..max_iter.max(1) {
        let mut changed = false;
        for (label, &p) in labels.iter_mut().zip(&points) {
            let best = if cosine(p, centers[1]) > cosine(p, centers[0]) {
                1
            } else {
                0
            };
            if *label != best {
                *label = best;
                changed = true;
            }
        }
        let mut sums = [[0.0f64; 2]; 2];
        for (&label, p) in labels.iter().zip(&points) {
            sums[label][0] += p[0];
            sums[label][1] += p[1];
        }
        for k in 0..2 {
            let c = unit(sums[k]);
            if c != [0.0, 0.0] {
                centers[k] = c;
            }
        }
        if !changed {
            break;
        }
    }

    let mut groups: [Vec<PopPair>; 2] = [Vec::new(), Vec::new()];
    for (&label, p) in labels.iter().zip(pairs) {
        groups[label].push(p.clone());
    }
    if groups[0].is_empty() || groups[1].is_empty() {
        return Ok(ClusterSplit::all_upper(pairs));
    }
    let mean_growth = |g: &[PopPair]| g.iter().map(PopPair::log_growth).sum::<f64>() / g.len() as f64;
    let [a, b] = groups;
    let (upper, lower) = if mean_growth(&b) > mean_growth(&a) {
        (b, a)
    } else {
        (a, b)
    };
    Ok(ClusterSplit {
        upper,
        lower,
        degenerate: false,
    })
}
