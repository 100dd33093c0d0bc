use std::fmt::Write as _;

use super::{ModelKind, ATTACK_CLASS, NUM_CLASSES};

#[derive(Debug, Clone, PartialEq)]
pub struct MetricsReport {
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    /// `confusion[true][predicted]`.
    pub confusion: [[usize; NUM_CLASSES]; NUM_CLASSES],
    pub attack_false_negatives: usize,
    /// Classes with no test instance, left out of the macro averages.
    pub absent_classes: Vec<usize>,
}

impl MetricsReport {
    pub fn total(&self) -> usize {
        self.confusion.iter().flatten().sum()
    }

    pub fn recall_of(&self, class: usize) -> f64 {
        let row: usize = self.confusion[class].iter().sum();
        if row == 0 {
            return 0.0;
        }
        self.confusion[class][class] as f64 / row as f64
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "accuracy\t{:.6}", self.accuracy);
        let _ = writeln!(s, "precision\t{:.6}", self.precision);
        let _ = writeln!(s, "recall\t{:.6}", self.recall);
        let _ = writeln!(s, "f1\t{:.6}", self.f1);
        let _ = writeln!(s, "attack_false_negatives\t{}", self.attack_false_negatives);
        if !self.absent_classes.is_empty() {
            let _ = writeln!(s, "absent_classes\t{:?}", self.absent_classes);
        }
        s.push_str("confusion (rows true, columns predicted)\n");
        for row in &self.confusion {
            let cells: Vec<String> = row.iter().map(|v| v.to_string()).collect();
            s.push_str(&cells.join("\t"));
            s.push('\n');
        }
        s
    }
}

/// Accuracy plus macro precision, recall and F1. Returns `None` for empty or
/// mismatched input or labels outside the class range.
pub fn evaluate(y_true: &[usize], y_pred: &[usize]) -> Option<MetricsReport> {
    if y_true.is_empty() || y_true.len() != y_pred.len() {
        return None;
    }
    let mut cm = [[0usize; NUM_CLASSES]; NUM_CLASSES];
    for (&t, &p) in y_true.iter().zip(y_pred) {
        if t >= NUM_CLASSES || p >= NUM_CLASSES {
            return None;
        }
        cm[t][p] += 1;
    }
    let trace: usize = (0..NUM_CLASSES).map(|c| cm[c][c]).sum();
    let (mut sp, mut sr, mut sf, mut present) = (0.0, 0.0, 0.0, 0usize);
    let mut absent = Vec::new();
    for c in 0..NUM_CLASSES {
        let support: usize = cm[c].iter().sum();
        if support == 0 {
            absent.push(c);
            continue;
        }
        let predicted: usize = (0..NUM_CLASSES).map(|r| cm[r][c]).sum();
        let tp = cm[c][c] as f64;
        let p = if predicted == 0 { 0.0 } else { tp / predicted as f64 };
        let r = tp / support as f64;
        let f = if p + r == 0.0 { 0.0 } else { 2.0 * p * r / (p + r) };
        sp += p;
        sr += r;
        sf += f;
        present += 1;
    }
    let n = present as f64;
    Some(MetricsReport {
        accuracy: trace as f64 / y_true.len() as f64,
        precision: sp / n,
        recall: sr / n,
        f1: sf / n,
        attack_false_negatives: cm[ATTACK_CLASS].iter().sum::<usize>() - cm[ATTACK_CLASS][ATTACK_CLASS],
        confusion: cm,
        absent_classes: absent,
    })
}

/// Highest accuracy, then fewest missed attacks, then the fixed order
/// DT, SVM, KNN, NN.
pub fn select_model(reports: &[(ModelKind, MetricsReport)]) -> Option<ModelKind> {
    reports
        .iter()
        .min_by(|(ka, a), (kb, b)| {
            b.accuracy
                .total_cmp(&a.accuracy)
                .then(a.attack_false_negatives.cmp(&b.attack_false_negatives))
                .then(ka.cmp(kb))
        })
        .map(|(k, _)| *k)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn with(acc: f64, fn_: usize) -> MetricsReport {
        let mut r = evaluate(&[0], &[0]).unwrap();
        r.accuracy = acc;
        r.attack_false_negatives = fn_;
        r
    }

    #[test]
    fn perfect() {
        let y: Vec<usize> = (0..24).map(|i| i % 12).collect();
        let r = evaluate(&y, &y).unwrap();
        assert_eq!((r.accuracy, r.precision, r.recall, r.f1), (1.0, 1.0, 1.0, 1.0));
        for i in 0..12 {
            for j in 0..12 {
                assert_eq!(r.confusion[i][j], if i == j { 2 } else { 0 });
            }
        }
    }

    #[test]
    fn constant_predictor() {
        let r = evaluate(&[0, 0, 11, 11], &[0; 4]).unwrap();
        assert_eq!(r.accuracy, 0.5);
        assert_eq!(r.attack_false_negatives, 2);
        assert_eq!(r.absent_classes.len(), 10);
        // class 0: p 0.5 r 1; class 11: p 0 r 0
        assert!((r.precision - 0.25).abs() < 1e-15);
        assert!((r.recall - 0.5).abs() < 1e-15);
        assert!((r.f1 - (2.0 / 3.0) / 2.0).abs() < 1e-15);
    }

    #[test]
    fn table_accuracies_pick_nn() {
        let reps = vec![
            (ModelKind::DecisionTree, with(0.9575, 0)),
            (ModelKind::Svm, with(0.968, 0)),
            (ModelKind::Knn, with(0.9875, 0)),
            (ModelKind::NeuralNetwork, with(0.9975, 0)),
        ];
        assert_eq!(select_model(&reps), Some(ModelKind::NeuralNetwork));
        let tie = vec![(ModelKind::DecisionTree, with(0.9, 3)), (ModelKind::Svm, with(0.9, 1))];
        assert_eq!(select_model(&tie), Some(ModelKind::Svm));
        let same = vec![(ModelKind::Knn, with(0.9, 1)), (ModelKind::DecisionTree, with(0.9, 1))];
        assert_eq!(select_model(&same), Some(ModelKind::DecisionTree));
        assert_eq!(select_model(&reps[..1]), Some(ModelKind::DecisionTree));
        assert_eq!(select_model(&[]), None);
    }
}
