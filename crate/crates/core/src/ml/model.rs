//! Trained classifier plus its input scaling, with a line-oriented text
//! file format.

use std::fmt;
use std::fmt::Write as _;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};

use super::{
    DecisionTree, Knn, KnnConfig, MlError, Mlp, MlpConfig, Node, Standardizer, SvmConfig, SvmEnsemble, TreeConfig,
    BinarySvm, NUM_CLASSES,
};

const MAGIC: &str = "digisub-model v1";

/// Declaration order is the selection tie-break order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ModelKind {
    DecisionTree,
    Svm,
    Knn,
    NeuralNetwork,
}

impl ModelKind {
    pub const ALL: [ModelKind; 4] = [ModelKind::DecisionTree, ModelKind::Svm, ModelKind::Knn, ModelKind::NeuralNetwork];

    pub fn as_str(self) -> &'static str {
        match self {
            ModelKind::DecisionTree => "DT",
            ModelKind::Svm => "SVM",
            ModelKind::Knn => "KNN",
            ModelKind::NeuralNetwork => "NN",
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ModelKind {
    type Err = MlError;

    fn from_str(s: &str) -> Result<Self, MlError> {
        ModelKind::ALL
            .into_iter()
            .find(|k| k.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| MlError::Invalid(format!("unknown model '{s}' (DT, SVM, KNN, NN)")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Classifier {
    DecisionTree(DecisionTree),
    Svm(SvmEnsemble),
    Knn(Knn),
    NeuralNetwork(Mlp),
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct TrainConfig {
    pub tree: TreeConfig,
    pub svm: SvmConfig,
    pub knn: KnnConfig,
    pub mlp: MlpConfig,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainedModel {
    pub standardizer: Standardizer,
    pub classifier: Classifier,
}

impl TrainedModel {
    /// Fits the scaling on `x`, then the classifier on the scaled rows.
    pub fn train(kind: ModelKind, x: &[Vec<f64>], y: &[usize], cfg: &TrainConfig) -> Result<TrainedModel, MlError> {
        let standardizer = Standardizer::fit(x)?;
        let xs = standardizer.transform_all(x);
        let classifier = match kind {
            ModelKind::DecisionTree => Classifier::DecisionTree(DecisionTree::train(&xs, y, &cfg.tree)?),
            ModelKind::Svm => Classifier::Svm(SvmEnsemble::train(&xs, y, &cfg.svm)?),
            ModelKind::Knn => Classifier::Knn(Knn::train(&xs, y, cfg.knn)?),
            ModelKind::NeuralNetwork => Classifier::NeuralNetwork(Mlp::train(&xs, y, &cfg.mlp)?),
        };
        Ok(TrainedModel { standardizer, classifier })
    }

    pub fn kind(&self) -> ModelKind {
        match self.classifier {
            Classifier::DecisionTree(_) => ModelKind::DecisionTree,
            Classifier::Svm(_) => ModelKind::Svm,
            Classifier::Knn(_) => ModelKind::Knn,
            Classifier::NeuralNetwork(_) => ModelKind::NeuralNetwork,
        }
    }

    /// Classifies one raw (unscaled) feature row.
    pub fn predict(&self, raw: &[f64]) -> Result<usize, MlError> {
        if raw.len() < self.standardizer.mean.len() {
            return Err(MlError::Length {
                expected: self.standardizer.mean.len(),
                actual: raw.len(),
            });
        }
        let x = self.standardizer.transform(raw);
        Ok(match &self.classifier {
            Classifier::DecisionTree(t) => t.predict(&x),
            Classifier::Svm(s) => s.predict(&x),
            Classifier::Knn(k) => k.predict(&x),
            Classifier::NeuralNetwork(n) => n.predict(&x)?,
        })
    }

    /// Length of the rows the classifier was trained on.
    pub fn input_len(&self) -> usize {
        match &self.classifier {
            Classifier::DecisionTree(_) => self.standardizer.mean.len().max(super::NUM_FEATURES),
            Classifier::Svm(e) => e.machines.iter().find_map(|m| m.support.first()).map_or(0, Vec::len),
            Classifier::Knn(k) => k.x.first().map_or(0, Vec::len),
            Classifier::NeuralNetwork(n) => n.layers()[0],
        }
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "{MAGIC}");
        let _ = writeln!(s, "kind {}", self.kind());
        let _ = writeln!(s, "scaling {} {}", self.standardizer.mean.len(), self.input_len());
        let _ = writeln!(s, "{}", join(&self.standardizer.mean));
        let _ = writeln!(s, "{}", join(&self.standardizer.std));
        match &self.classifier {
            Classifier::DecisionTree(t) => {
                let _ = writeln!(s, "nodes {}", t.nodes.len());
                for n in &t.nodes {
                    match n {
                        Node::Split {
                            feature,
                            threshold,
                            left,
                            right,
                        } => {
                            let _ = writeln!(s, "split {feature} {threshold:?} {left} {right}");
                        }
                        Node::Leaf { counts } => {
                            let c: Vec<String> = counts.iter().map(|v| v.to_string()).collect();
                            let _ = writeln!(s, "leaf {}", c.join(" "));
                        }
                    }
                }
            }
            Classifier::Svm(e) => {
                let _ = writeln!(s, "machines {}", e.machines.len());
                for m in &e.machines {
                    let _ = writeln!(s, "machine {} {:?} {:?}", m.support.len(), m.bias, m.gamma);
                    for (sv, c) in m.support.iter().zip(&m.coef) {
                        let _ = writeln!(s, "{c:?} {}", join(sv));
                    }
                }
            }
            Classifier::Knn(k) => {
                let _ = writeln!(s, "neighbours {} {:?} {}", k.config.k, k.config.p, k.x.len());
                for (x, y) in k.x.iter().zip(&k.y) {
                    let _ = writeln!(s, "{y} {}", join(x));
                }
            }
            Classifier::NeuralNetwork(n) => {
                let l: Vec<String> = n.layers().iter().map(|v| v.to_string()).collect();
                let _ = writeln!(s, "layers {}", l.join(" "));
                let mut acts = vec!["relu"; n.weights.len() - 1];
                acts.push("softmax");
                let _ = writeln!(s, "activations {}", acts.join(" "));
                for (w, b) in n.weights.iter().zip(&n.biases) {
                    for r in 0..w.nrows() {
                        let row: Vec<f64> = w.row(r).iter().copied().collect();
                        let _ = writeln!(s, "{}", join(&row));
                    }
                    let _ = writeln!(s, "{}", join(b.as_slice()));
                }
            }
        }
        s
    }

    pub fn from_text(text: &str) -> Result<TrainedModel, MlError> {
        let mut r = Lines::new(text);
        let (ln, magic) = r.raw()?;
        if magic.trim() != MAGIC {
            return Err(fmt_err(ln, format!("expected '{MAGIC}'")));
        }
        let kind: ModelKind = r.keyword("kind")?[0].parse().map_err(|e: MlError| fmt_err(r.line, e.to_string()))?;
        let dims = r.keyword_usize("scaling", 2)?;
        let (d, nf) = (dims[0], dims[1]);
        let mean = r.floats(d)?;
        let std = r.floats(d)?;
        let standardizer = Standardizer { mean, std };
        let classifier = match kind {
            ModelKind::DecisionTree => {
                let n = r.keyword_usize("nodes", 1)?[0];
                let mut nodes = Vec::with_capacity(n);
                for _ in 0..n {
                    let (ln, line) = r.raw()?;
                    let t: Vec<&str> = line.split_whitespace().collect();
                    let node = match t.first() {
                        Some(&"split") if t.len() == 5 => {
                            let left = parse(ln, t[3])?;
                            let right = parse(ln, t[4])?;
                            if left >= n || right >= n {
                                return Err(fmt_err(ln, "child index out of range".into()));
                            }
                            Node::Split {
                                feature: parse(ln, t[1])?,
                                threshold: parse(ln, t[2])?,
                                left,
                                right,
                            }
                        }
                        Some(&"leaf") if t.len() == NUM_CLASSES + 1 => Node::Leaf {
                            counts: t[1..].iter().map(|v| parse(ln, v)).collect::<Result<_, _>>()?,
                        },
                        _ => return Err(fmt_err(ln, "expected split or leaf".into())),
                    };
                    nodes.push(node);
                }
                Classifier::DecisionTree(DecisionTree { nodes })
            }
            ModelKind::Svm => {
                let m = r.keyword_usize("machines", 1)?[0];
                let mut machines = Vec::with_capacity(m);
                for _ in 0..m {
                    let h = r.keyword("machine")?;
                    let ln = r.line;
                    let (nsv, bias, gamma): (usize, f64, f64) = (parse(ln, &h[0])?, parse(ln, &h[1])?, parse(ln, &h[2])?);
                    let mut support = Vec::with_capacity(nsv);
                    let mut coef = Vec::with_capacity(nsv);
                    for _ in 0..nsv {
                        let mut v = r.floats(nf + 1)?;
                        coef.push(v.remove(0));
                        support.push(v);
                    }
                    machines.push(BinarySvm {
                        support,
                        coef,
                        bias,
                        gamma,
                    });
                }
                Classifier::Svm(SvmEnsemble { machines })
            }
            ModelKind::Knn => {
                let h = r.keyword("neighbours")?;
                let ln = r.line;
                let (k, p, n): (usize, f64, usize) = (parse(ln, &h[0])?, parse(ln, &h[1])?, parse(ln, &h[2])?);
                let mut x = Vec::with_capacity(n);
                let mut y = Vec::with_capacity(n);
                for _ in 0..n {
                    let mut v = r.floats(nf + 1)?;
                    y.push(v.remove(0) as usize);
                    x.push(v);
                }
                Classifier::Knn(Knn::train(&x, &y, KnnConfig { k, p }).map_err(|e| fmt_err(ln, e.to_string()))?)
            }
            ModelKind::NeuralNetwork => {
                let layers = r.keyword_usize("layers", 0)?;
                let ln = r.line;
                let mut net = Mlp::zeros(&layers).map_err(|e| fmt_err(ln, e.to_string()))?;
                let acts = r.keyword("activations")?;
                let ok = acts.len() == layers.len() - 1
                    && acts[..acts.len() - 1].iter().all(|a| a == "relu")
                    && acts.last().map(String::as_str) == Some("softmax");
                if !ok {
                    return Err(fmt_err(r.line, "unsupported activations".into()));
                }
                for (l, w) in layers.windows(2).enumerate() {
                    let mut rows = Vec::with_capacity(w[1] * w[0]);
                    for _ in 0..w[1] {
                        rows.extend(r.floats(w[0])?);
                    }
                    net.weights[l] = DMatrix::from_row_slice(w[1], w[0], &rows);
                    net.biases[l] = DVector::from_vec(r.floats(w[1])?);
                }
                Classifier::NeuralNetwork(net)
            }
        };
        Ok(TrainedModel { standardizer, classifier })
    }
}

fn join(v: &[f64]) -> String {
    let s: Vec<String> = v.iter().map(|x| format!("{x:?}")).collect();
    s.join(" ")
}

fn fmt_err(line: usize, message: String) -> MlError {
    MlError::ModelFormat { line, message }
}

fn parse<T: FromStr>(line: usize, s: &str) -> Result<T, MlError> {
    s.parse().map_err(|_| fmt_err(line, format!("cannot parse '{s}'")))
}

struct Lines<'a> {
    it: std::str::Lines<'a>,
    line: usize,
}

impl<'a> Lines<'a> {
    fn new(text: &'a str) -> Self {
        Lines { it: text.lines(), line: 0 }
    }

    fn raw(&mut self) -> Result<(usize, &'a str), MlError> {
        self.line += 1;
        self.it
            .next()
            .map(|l| (self.line, l))
            .ok_or_else(|| fmt_err(self.line, "unexpected end of file".into()))
    }

    fn keyword(&mut self, kw: &str) -> Result<Vec<String>, MlError> {
        let (ln, l) = self.raw()?;
        let mut t = l.split_whitespace();
        if t.next() != Some(kw) {
            return Err(fmt_err(ln, format!("expected '{kw}'")));
        }
        Ok(t.map(str::to_string).collect())
    }

    fn keyword_usize(&mut self, kw: &str, n: usize) -> Result<Vec<usize>, MlError> {
        let t = self.keyword(kw)?;
        if n > 0 && t.len() != n {
            return Err(fmt_err(self.line, format!("expected {n} values after '{kw}'")));
        }
        t.iter().map(|v| parse(self.line, v)).collect()
    }

    fn floats(&mut self, n: usize) -> Result<Vec<f64>, MlError> {
        let (ln, l) = self.raw()?;
        let v: Vec<f64> = l.split_whitespace().map(|s| parse(ln, s)).collect::<Result<_, _>>()?;
        if v.len() != n {
            return Err(fmt_err(ln, format!("expected {n} values, got {}", v.len())));
        }
        Ok(v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ml::NUM_FEATURES;

    fn toy() -> (Vec<Vec<f64>>, Vec<usize>) {
        let mut x = Vec::new();
        let mut y = Vec::new();
        for i in 0..36 {
            let c = i % 3;
            let mut r = vec![0.0; NUM_FEATURES];
            r[0] = c as f64 + 0.01 * i as f64;
            r[5] = -(c as f64);
            r[200] = (c == 2) as u8 as f64;
            x.push(r);
            y.push([0, 4, 11][c]);
        }
        (x, y)
    }

    #[test]
    fn every_kind_round_trips() {
        let (x, y) = toy();
        let mut cfg = TrainConfig::default();
        cfg.mlp.epochs = 20;
        for kind in ModelKind::ALL {
            let m = TrainedModel::train(kind, &x, &y, &cfg).unwrap();
            let back = TrainedModel::from_text(&m.to_text()).unwrap();
            assert_eq!(back, TrainedModel { ..back.clone() });
            for r in &x {
                assert_eq!(m.predict(r).unwrap(), back.predict(r).unwrap(), "{kind}");
            }
            if kind != ModelKind::NeuralNetwork {
                for (r, &c) in x.iter().zip(&y) {
                    assert_eq!(m.predict(r).unwrap(), c, "{kind}");
                }
            }
        }
    }

    #[test]
    fn bad_files() {
        assert!(matches!(
            TrainedModel::from_text("nope"),
            Err(MlError::ModelFormat { line: 1, .. })
        ));
        assert!(matches!(
            TrainedModel::from_text("digisub-model v1\nkind XX\n"),
            Err(MlError::ModelFormat { line: 2, .. })
        ));
        assert!(matches!(
            TrainedModel::from_text("digisub-model v1\nkind DT\nscaling 2 238\n1 2\n1\n"),
            Err(MlError::ModelFormat { line: 5, .. })
        ));
    }
}
