//! Fully connected network: rectifier hidden layers, softmax output,
//! cross-entropy loss, plain mini-batch gradient descent.

use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::{MlError, NUM_CLASSES, NUM_FEATURES};

#[derive(Debug, Clone, PartialEq)]
pub struct MlpConfig {
    pub layers: Vec<usize>,
    pub learning_rate: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub seed: u64,
}

impl Default for MlpConfig {
    fn default() -> Self {
        MlpConfig {
            layers: vec![NUM_FEATURES, 64, 32, NUM_CLASSES],
            learning_rate: 0.01,
            epochs: 200,
            batch_size: 32,
            seed: 7,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mlp {
    /// `weights[l]` maps layer `l` (columns) to layer `l + 1` (rows).
    pub weights: Vec<DMatrix<f64>>,
    pub biases: Vec<DVector<f64>>,
    /// Mean training loss per epoch.
    pub loss_history: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MlpGradients {
    pub weights: Vec<DMatrix<f64>>,
    pub biases: Vec<DVector<f64>>,
}

fn check_layers(layers: &[usize]) -> Result<(), MlError> {
    if layers.len() < 2 || layers.contains(&0) {
        return Err(MlError::Invalid(format!("bad layer sizes {layers:?}")));
    }
    if layers[layers.len() - 1] != NUM_CLASSES {
        return Err(MlError::Invalid(format!("output layer must have {NUM_CLASSES} units")));
    }
    Ok(())
}

impl Mlp {
    /// He-normal weights, zero biases.
    pub fn new(layers: &[usize], seed: u64) -> Result<Mlp, MlError> {
        check_layers(layers)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut weights = Vec::new();
        let mut biases = Vec::new();
        for w in layers.windows(2) {
            let n = Normal::new(0.0, (2.0 / w[0] as f64).sqrt()).map_err(|e| MlError::Invalid(e.to_string()))?;
            weights.push(DMatrix::from_fn(w[1], w[0], |_, _| n.sample(&mut rng)));
            biases.push(DVector::zeros(w[1]));
        }
        Ok(Mlp {
            weights,
            biases,
            loss_history: Vec::new(),
        })
    }

    pub fn zeros(layers: &[usize]) -> Result<Mlp, MlError> {
        check_layers(layers)?;
        Ok(Mlp {
            weights: layers.windows(2).map(|w| DMatrix::zeros(w[1], w[0])).collect(),
            biases: layers.windows(2).map(|w| DVector::zeros(w[1])).collect(),
            loss_history: Vec::new(),
        })
    }

    pub fn layers(&self) -> Vec<usize> {
        let mut v = vec![self.weights[0].ncols()];
        v.extend(self.weights.iter().map(|w| w.nrows()));
        v
    }

    fn input_matrix(&self, x: &[&[f64]]) -> Result<DMatrix<f64>, MlError> {
        let d = self.weights[0].ncols();
        if let Some(r) = x.iter().find(|r| r.len() != d) {
            return Err(MlError::Length {
                expected: d,
                actual: r.len(),
            });
        }
        Ok(DMatrix::from_fn(d, x.len(), |i, j| x[j][i]))
    }

    /// Activations per layer, one column per sample; the last one holds
    /// class probabilities.
    fn activations(&self, input: DMatrix<f64>) -> Vec<DMatrix<f64>> {
        let mut acts = vec![input];
        let last = self.weights.len() - 1;
        for (l, (w, b)) in self.weights.iter().zip(&self.biases).enumerate() {
            let mut z = w * acts.last().unwrap();
            for mut col in z.column_iter_mut() {
                col += b;
            }
            if l < last {
                z.apply(|v| *v = v.max(0.0));
            } else {
                for mut col in z.column_iter_mut() {
                    let m = col.max();
                    col.apply(|v| *v = (*v - m).exp());
                    let s = col.sum();
                    col /= s;
                }
            }
            acts.push(z);
        }
        acts
    }

    pub fn forward(&self, x: &[f64]) -> Result<Vec<f64>, MlError> {
        let input = self.input_matrix(&[x])?;
        Ok(self.activations(input).pop().unwrap().column(0).iter().copied().collect())
    }

    /// Most probable class; ties go to the lower class.
    pub fn predict(&self, x: &[f64]) -> Result<usize, MlError> {
        let p = self.forward(x)?;
        let mut best = 0;
        for c in 1..p.len() {
            if p[c] > p[best] {
                best = c;
            }
        }
        Ok(best)
    }

    /// Mean cross-entropy over the batch.
    pub fn loss(&self, x: &[&[f64]], y: &[usize]) -> Result<f64, MlError> {
        let p = self.activations(self.input_matrix(x)?).pop().unwrap();
        Ok(cross_entropy(&p, y))
    }

    /// Mean loss and its gradient over the batch.
    pub fn backward(&self, x: &[&[f64]], y: &[usize]) -> Result<(f64, MlpGradients), MlError> {
        if x.is_empty() || x.len() != y.len() {
            return Err(MlError::Empty);
        }
        let acts = self.activations(self.input_matrix(x)?);
        let m = x.len() as f64;
        let probs = acts.last().unwrap();
        let loss = cross_entropy(probs, y);
        let mut delta = probs.clone();
        for (j, &c) in y.iter().enumerate() {
            delta[(c, j)] -= 1.0;
        }
        delta /= m;
        let nl = self.weights.len();
        let mut gw = vec![DMatrix::zeros(0, 0); nl];
        let mut gb = vec![DVector::zeros(0); nl];
        for l in (0..nl).rev() {
            gw[l] = &delta * acts[l].transpose();
            gb[l] = delta.column_sum();
            if l > 0 {
                let mut d = self.weights[l].transpose() * &delta;
                d.zip_apply(&acts[l], |g, a| {
                    if a <= 0.0 {
                        *g = 0.0
                    }
                });
                delta = d;
            }
        }
        Ok((loss, MlpGradients { weights: gw, biases: gb }))
    }

    pub fn train(x: &[Vec<f64>], y: &[usize], cfg: &MlpConfig) -> Result<Mlp, MlError> {
        if x.is_empty() || x.len() != y.len() {
            return Err(MlError::Empty);
        }
        if cfg.batch_size == 0 || !(cfg.learning_rate > 0.0) {
            return Err(MlError::Invalid("batch size and learning rate must be positive".into()));
        }
        if let Some(&bad) = y.iter().find(|&&c| c >= NUM_CLASSES) {
            return Err(MlError::Invalid(format!("label {bad} out of range")));
        }
        let mut net = Mlp::new(&cfg.layers, cfg.seed)?;
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(1));
        let mut order: Vec<usize> = (0..x.len()).collect();
        for epoch in 0..cfg.epochs {
            order.shuffle(&mut rng);
            let mut total = 0.0;
            for chunk in order.chunks(cfg.batch_size) {
                let bx: Vec<&[f64]> = chunk.iter().map(|&i| x[i].as_slice()).collect();
                let by: Vec<usize> = chunk.iter().map(|&i| y[i]).collect();
                let (loss, g) = net.backward(&bx, &by)?;
                if !loss.is_finite() {
                    return Err(MlError::Diverged { epoch, loss });
                }
                total += loss * chunk.len() as f64;
                for (w, d) in net.weights.iter_mut().zip(&g.weights) {
                    w.zip_apply(d, |a, g| *a -= cfg.learning_rate * g);
                }
                for (b, d) in net.biases.iter_mut().zip(&g.biases) {
                    b.zip_apply(d, |a, g| *a -= cfg.learning_rate * g);
                }
            }
            net.loss_history.push(total / x.len() as f64);
        }
        Ok(net)
    }
}

fn cross_entropy(p: &DMatrix<f64>, y: &[usize]) -> f64 {
    let s: f64 = y.iter().enumerate().map(|(j, &c)| -p[(c, j)].max(1e-300).ln()).sum();
    s / y.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn softmax_sums_to_one() {
        let net = Mlp::new(&[5, 4, 12], 3).unwrap();
        for k in 0..20 {
            let x: Vec<f64> = (0..5).map(|i| ((i * 7 + k * 3) % 11) as f64 - 5.0).collect();
            let p = net.forward(&x).unwrap();
            assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn zero_weights_give_uniform() {
        let net = Mlp::zeros(&[NUM_FEATURES, 64, 32, 12]).unwrap();
        for p in net.forward(&vec![0.0; NUM_FEATURES]).unwrap() {
            assert!((p - 1.0 / 12.0).abs() < 1e-15);
        }
    }

    #[test]
    fn rejects_bad_shapes() {
        assert!(Mlp::new(&[5, 4, 3], 0).is_err());
        assert!(Mlp::new(&[5, 0, 12], 0).is_err());
        let net = Mlp::new(&[5, 12], 0).unwrap();
        assert!(net.forward(&[1.0]).is_err());
    }

    #[test]
    fn learns_separable_toy() {
        let x: Vec<Vec<f64>> = (0..60).map(|i| vec![(i % 3) as f64, ((i % 3) as f64 - 1.0).abs()]).collect();
        let y: Vec<usize> = (0..60).map(|i| i % 3).collect();
        let cfg = MlpConfig {
            layers: vec![2, 16, 12],
            learning_rate: 0.1,
            epochs: 300,
            batch_size: 8,
            seed: 1,
        };
        let net = Mlp::train(&x, &y, &cfg).unwrap();
        for (xi, &yi) in x.iter().zip(&y) {
            assert_eq!(net.predict(xi).unwrap(), yi);
        }
        assert!(net.loss_history.last().unwrap() < &net.loss_history[0]);
    }
}
