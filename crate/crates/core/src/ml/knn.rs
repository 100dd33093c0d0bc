//! k-nearest-neighbour vote under the Minkowski metric.

use super::{MlError, NUM_CLASSES};

pub fn minkowski_distance(x: &[f64], y: &[f64], p: f64) -> Result<f64, MlError> {
    if x.len() != y.len() {
        return Err(MlError::Length {
            expected: x.len(),
            actual: y.len(),
        });
    }
    if !(p >= 1.0) {
        return Err(MlError::Invalid(format!("Minkowski order {p} is below 1")));
    }
    Ok(minkowski(x, y, p))
}

fn minkowski(x: &[f64], y: &[f64], p: f64) -> f64 {
    if p == 2.0 {
        return x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
    }
    if p == 1.0 {
        return x.iter().zip(y).map(|(a, b)| (a - b).abs()).sum();
    }
    x.iter()
        .zip(y)
        .map(|(a, b)| (a - b).abs().powf(p))
        .sum::<f64>()
        .powf(1.0 / p)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KnnConfig {
    pub k: usize,
    pub p: f64,
}

impl Default for KnnConfig {
    fn default() -> Self {
        KnnConfig { k: 5, p: 2.0 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Knn {
    pub x: Vec<Vec<f64>>,
    pub y: Vec<usize>,
    pub config: KnnConfig,
}

impl Knn {
    pub fn train(x: &[Vec<f64>], y: &[usize], config: KnnConfig) -> Result<Knn, MlError> {
        if x.is_empty() || x.len() != y.len() {
            return Err(MlError::Empty);
        }
        if config.k == 0 || !(config.p >= 1.0) {
            return Err(MlError::Invalid("k must be positive and p at least 1".into()));
        }
        if let Some(&bad) = y.iter().find(|&&c| c >= NUM_CLASSES) {
            return Err(MlError::Invalid(format!("label {bad} out of range")));
        }
        Ok(Knn {
            x: x.to_vec(),
            y: y.to_vec(),
            config,
        })
    }

    /// Indices of the k nearest training points, nearest first; equal
    /// distances are ordered by index.
    pub fn neighbours(&self, q: &[f64]) -> Vec<(usize, f64)> {
        let mut d: Vec<(usize, f64)> = self
            .x
            .iter()
            .enumerate()
            .map(|(i, r)| (i, minkowski(r, q, self.config.p)))
            .collect();
        let k = self.config.k.min(d.len());
        let cmp = |a: &(usize, f64), b: &(usize, f64)| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0));
        if k < d.len() {
            d.select_nth_unstable_by(k - 1, cmp);
            d.truncate(k);
        }
        d.sort_by(cmp);
        d
    }

    /// Majority vote; ties go to the class with the smaller mean distance,
    /// then to the lower class.
    pub fn predict(&self, q: &[f64]) -> usize {
        let mut votes = [0usize; NUM_CLASSES];
        let mut dist = [0f64; NUM_CLASSES];
        for (i, d) in self.neighbours(q) {
            votes[self.y[i]] += 1;
            dist[self.y[i]] += d;
        }
        let mut best = 0;
        for c in 1..NUM_CLASSES {
            if votes[c] == 0 {
                continue;
            }
            let better = votes[c] > votes[best]
                || (votes[c] == votes[best] && dist[c] / (votes[c] as f64) < dist[best] / (votes[best].max(1) as f64));
            if better || votes[best] == 0 {
                best = c;
            }
        }
        best
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn distances() {
        let (a, b) = ([0.0, 0.0], [3.0, 4.0]);
        assert_eq!(minkowski_distance(&a, &b, 1.0).unwrap(), 7.0);
        assert_eq!(minkowski_distance(&a, &b, 2.0).unwrap(), 5.0);
        assert!((minkowski_distance(&a, &b, 3.0).unwrap() - 91f64.powf(1.0 / 3.0)).abs() < 1e-12);
        assert!(minkowski_distance(&a, &b, 0.5).is_err());
        assert!(minkowski_distance(&a, &[1.0], 2.0).is_err());
    }

    #[test]
    fn tie_goes_to_closer_class() {
        let x = vec![vec![0.0], vec![0.1], vec![1.0], vec![1.2]];
        let y = vec![3, 3, 1, 1];
        let m = Knn::train(&x, &y, KnnConfig { k: 4, p: 2.0 }).unwrap();
        assert_eq!(m.predict(&[0.3]), 3);
        assert_eq!(m.predict(&[0.9]), 1);
    }
}
