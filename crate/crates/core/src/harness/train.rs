use std::fmt::Write as _;

use rayon::prelude::*;

use crate::ml::{evaluate, select_model, stratified_split, Dataset, MetricsReport, ModelKind, TrainConfig, TrainedModel};

use super::HarnessError;

#[derive(Debug, Clone)]
pub struct ModelResult {
    pub kind: ModelKind,
    pub model: TrainedModel,
    pub report: MetricsReport,
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub train_idx: Vec<usize>,
    pub test_idx: Vec<usize>,
    pub results: Vec<ModelResult>,
    pub selected: ModelKind,
}

impl TrainOutcome {
    pub fn result(&self, kind: ModelKind) -> Option<&ModelResult> {
        self.results.iter().find(|r| r.kind == kind)
    }

    pub fn selected_model(&self) -> &TrainedModel {
        &self.result(self.selected).expect("selected model trained").model
    }

    /// One row per model, then each confusion matrix.
    pub fn report_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "train {} test {}", self.train_idx.len(), self.test_idx.len());
        let _ = writeln!(s, "model\taccuracy\tprecision\trecall\tf1\tattack_fn");
        for r in &self.results {
            let m = &r.report;
            let _ = writeln!(
                s,
                "{}\t{:.4}\t{:.4}\t{:.4}\t{:.4}\t{}",
                r.kind, m.accuracy, m.precision, m.recall, m.f1, m.attack_false_negatives
            );
        }
        let _ = writeln!(s, "selected\t{}", self.selected);
        for r in &self.results {
            let _ = writeln!(s, "\n[{}]", r.kind);
            s.push_str(&r.report.to_text());
        }
        s
    }
}

pub fn evaluate_model(model: &TrainedModel, data: &Dataset, idx: &[usize]) -> Result<MetricsReport, HarnessError> {
    let mut truth = Vec::with_capacity(idx.len());
    let mut pred = Vec::with_capacity(idx.len());
    for &i in idx {
        let s = data
            .samples
            .get(i)
            .ok_or_else(|| HarnessError::Generation(format!("sample {i} out of range")))?;
        truth.push(s.label);
        pred.push(model.predict(s.features.values())?);
    }
    evaluate(&truth, &pred).ok_or_else(|| HarnessError::Generation("empty evaluation set".into()))
}

/// Stratified split, all four models, held-out metrics and selection.
pub fn train_all(data: &Dataset, test_fraction: f64, seed: u64, cfg: &TrainConfig) -> Result<TrainOutcome, HarnessError> {
    let labels: Vec<usize> = data.samples.iter().map(|s| s.label).collect();
    let (train_idx, test_idx) = stratified_split(&labels, test_fraction, seed);
    if train_idx.is_empty() || test_idx.is_empty() {
        return Err(HarnessError::Generation("dataset too small to split".into()));
    }
    let train = data.subset(&train_idx);
    let (x, y) = train.xy();
    let results: Vec<Result<ModelResult, HarnessError>> = ModelKind::ALL
        .par_iter()
        .map(|&kind| {
            let model = TrainedModel::train(kind, &x, &y, cfg)?;
            let report = evaluate_model(&model, data, &test_idx)?;
            Ok(ModelResult { kind, model, report })
        })
        .collect();
    let results = results.into_iter().collect::<Result<Vec<_>, _>>()?;
    let pairs: Vec<(ModelKind, MetricsReport)> = results.iter().map(|r| (r.kind, r.report.clone())).collect();
    let selected = select_model(&pairs).expect("four reports");
    Ok(TrainOutcome {
        train_idx,
        test_idx,
        results,
        selected,
    })
}
