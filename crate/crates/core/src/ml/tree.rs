//! CART decision tree with the Gini criterion.

use super::{MlError, NUM_CLASSES};

/// `1 - sum(p_j^2)` over the class counts.
pub fn gini_index(counts: &[usize]) -> Result<f64, MlError> {
    let total: usize = counts.iter().sum();
    if total == 0 {
        return Err(MlError::Invalid("gini of an empty node".into()));
    }
    let t = total as f64;
    Ok(1.0 - counts.iter().map(|&c| (c as f64 / t).powi(2)).sum::<f64>())
}

fn gini_unchecked(counts: &[usize], total: usize) -> f64 {
    let t = total as f64;
    1.0 - counts.iter().map(|&c| (c as f64 / t).powi(2)).sum::<f64>()
}

/// Size-weighted impurity of a candidate split.
pub(crate) fn split_impurity(left: &[usize], right: &[usize]) -> f64 {
    let nl: usize = left.iter().sum();
    let nr: usize = right.iter().sum();
    let n = (nl + nr) as f64;
    (nl as f64 * gini_unchecked(left, nl) + nr as f64 * gini_unchecked(right, nr)) / n
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TreeConfig {
    pub max_depth: usize,
    pub min_samples_leaf: usize,
}

impl Default for TreeConfig {
    fn default() -> Self {
        TreeConfig {
            max_depth: 30,
            min_samples_leaf: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
    Leaf {
        counts: Vec<usize>,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecisionTree {
    /// Root at index 0.
    pub nodes: Vec<Node>,
}

const TIE_EPS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct BestSplit {
    pub feature: usize,
    pub threshold: f64,
    pub impurity: f64,
}

/// Lowest weighted child impurity over every feature and every midpoint
/// between consecutive distinct values; ties (within rounding) go to the
/// lower feature, then the lower threshold.
pub(crate) fn best_split(x: &[Vec<f64>], y: &[usize], idx: &[usize], min_leaf: usize) -> Option<BestSplit> {
    let d = x.first()?.len();
    let mut total = vec![0usize; NUM_CLASSES];
    for &i in idx {
        total[y[i]] += 1;
    }
    let mut best: Option<BestSplit> = None;
    let mut order = idx.to_vec();
    let mut left = vec![0usize; NUM_CLASSES];
    let mut right = vec![0usize; NUM_CLASSES];
    for f in 0..d {
        order.sort_by(|&a, &b| x[a][f].total_cmp(&x[b][f]).then(a.cmp(&b)));
        left.iter_mut().for_each(|c| *c = 0);
        right.copy_from_slice(&total);
        for k in 0..order.len() - 1 {
            let i = order[k];
            left[y[i]] += 1;
            right[y[i]] -= 1;
            let (a, b) = (x[i][f], x[order[k + 1]][f]);
            if a == b || k + 1 < min_leaf || order.len() - k - 1 < min_leaf {
                continue;
            }
            let imp = split_impurity(&left, &right);
            if best.is_none_or(|bs| imp < bs.impurity - TIE_EPS) {
                best = Some(BestSplit {
                    feature: f,
                    threshold: a + (b - a) / 2.0,
                    impurity: imp,
                });
            }
        }
    }
    best
}

impl DecisionTree {
    pub fn train(x: &[Vec<f64>], y: &[usize], cfg: &TreeConfig) -> Result<DecisionTree, MlError> {
        if x.is_empty() || x.len() != y.len() {
            return Err(MlError::Empty);
        }
        if y.iter().any(|&c| c >= NUM_CLASSES) {
            return Err(MlError::Invalid("label out of range".into()));
        }
        let mut t = DecisionTree { nodes: Vec::new() };
        let idx: Vec<usize> = (0..x.len()).collect();
        t.grow(x, y, idx, 0, cfg);
        Ok(t)
    }

    fn grow(&mut self, x: &[Vec<f64>], y: &[usize], idx: Vec<usize>, depth: usize, cfg: &TreeConfig) -> usize {
        let id = self.nodes.len();
        let mut counts = vec![0usize; NUM_CLASSES];
        for &i in &idx {
            counts[y[i]] += 1;
        }
        self.nodes.push(Node::Leaf { counts: counts.clone() });
        let parent = gini_unchecked(&counts, idx.len());
        if parent == 0.0 || depth >= cfg.max_depth || idx.len() < 2 * cfg.min_samples_leaf.max(1) {
            return id;
        }
        let Some(s) = best_split(x, y, &idx, cfg.min_samples_leaf.max(1)) else {
            return id;
        };
        let (l, r): (Vec<usize>, Vec<usize>) = idx.into_iter().partition(|&i| x[i][s.feature] <= s.threshold);
        let left = self.grow(x, y, l, depth + 1, cfg);
        let right = self.grow(x, y, r, depth + 1, cfg);
        self.nodes[id] = Node::Split {
            feature: s.feature,
            threshold: s.threshold,
            left,
            right,
        };
        id
    }

    pub fn leaf(&self, x: &[f64]) -> &[usize] {
        let mut i = 0;
        loop {
            match &self.nodes[i] {
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => i = if x[*feature] <= *threshold { *left } else { *right },
                Node::Leaf { counts } => return counts,
            }
        }
    }

    /// Majority class of the leaf reached; ties go to the lower class.
    pub fn predict(&self, x: &[f64]) -> usize {
        argmax_counts(self.leaf(x))
    }
}

pub(crate) fn argmax_counts(c: &[usize]) -> usize {
    let mut best = 0;
    for (i, &v) in c.iter().enumerate() {
        if v > c[best] {
            best = i;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gini_examples() {
        assert_eq!(gini_index(&[10, 0]).unwrap(), 0.0);
        assert_eq!(gini_index(&[5, 5]).unwrap(), 0.5);
        assert!((gini_index(&[3, 1]).unwrap() - 0.375).abs() < 1e-15);
        assert!(gini_index(&[0, 0]).is_err());
    }

    #[test]
    fn single_class_single_leaf() {
        let x = vec![vec![1.0], vec![2.0], vec![3.0]];
        let t = DecisionTree::train(&x, &[4, 4, 4], &TreeConfig::default()).unwrap();
        assert_eq!(t.nodes.len(), 1);
        assert_eq!(t.predict(&[100.0]), 4);
    }

    #[test]
    fn one_d_threshold_between_1_and_2() {
        let x = vec![vec![0.0], vec![1.0], vec![2.0], vec![3.0]];
        let t = DecisionTree::train(&x, &[0, 0, 1, 1], &TreeConfig::default()).unwrap();
        match &t.nodes[0] {
            Node::Split { feature, threshold, .. } => {
                assert_eq!(*feature, 0);
                assert!(*threshold > 1.0 && *threshold < 2.0);
            }
            n => panic!("{n:?}"),
        }
        for (xi, yi) in x.iter().zip([0, 0, 1, 1]) {
            assert_eq!(t.predict(xi), yi);
        }
    }
}
