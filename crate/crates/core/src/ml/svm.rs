//! Soft-margin kernel SVM trained by sequential minimal optimization with
//! second-order working-set selection; multiclass by one-vs-rest.

use nalgebra::DMatrix;

use super::{MlError, NUM_CLASSES};

const TAU: f64 = 1e-12;

/// `exp(-gamma * |x - y|^2)`.
pub fn gaussian_kernel(x: &[f64], y: &[f64], gamma: f64) -> Result<f64, MlError> {
    if x.len() != y.len() {
        return Err(MlError::Length {
            expected: x.len(),
            actual: y.len(),
        });
    }
    if !(gamma > 0.0) {
        return Err(MlError::Invalid(format!("gamma {gamma} must be positive")));
    }
    Ok(rbf(x, y, gamma))
}

fn rbf(x: &[f64], y: &[f64], gamma: f64) -> f64 {
    let d2: f64 = x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum();
    (-gamma * d2).exp()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SvmConfig {
    pub c: f64,
    pub gamma: f64,
    /// Maximal KKT violation at convergence.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for SvmConfig {
    fn default() -> Self {
        SvmConfig {
            c: 10.0,
            gamma: 1.0 / 238.0,
            tol: 1e-3,
            max_iter: 10_000_000,
        }
    }
}

/// Dense Gram matrix of the training set.
pub(crate) struct Gram {
    n: usize,
    k: Vec<f32>,
}

impl Gram {
    pub fn new(x: &[Vec<f64>], gamma: f64) -> Gram {
        let n = x.len();
        let d = x.first().map_or(0, |r| r.len());
        let m = DMatrix::from_fn(n, d, |i, j| x[i][j]);
        let g = &m * m.transpose();
        let mut k = vec![0f32; n * n];
        for i in 0..n {
            for j in 0..n {
                let d2 = (g[(i, i)] + g[(j, j)] - 2.0 * g[(i, j)]).max(0.0);
                k[i * n + j] = (-gamma * d2).exp() as f32;
            }
        }
        Gram { n, k }
    }

    #[inline]
    fn row(&self, i: usize) -> &[f32] {
        &self.k[i * self.n..(i + 1) * self.n]
    }
}

/// Solution of the dual: alphas and the offset `b` of
/// `f(x) = sum alpha_i y_i K(x_i, x) + b`.
#[derive(Debug, Clone, PartialEq)]
pub struct DualSolution {
    pub alpha: Vec<f64>,
    pub b: f64,
    pub iterations: usize,
}

/// Dual objective `sum alpha - 1/2 sum alpha_i alpha_j y_i y_j K_ij`
/// (the quantity maximized).
pub fn dual_objective(alpha: &[f64], y: &[f64], k: impl Fn(usize, usize) -> f64) -> f64 {
    let n = alpha.len();
    let mut quad = 0.0;
    for i in 0..n {
        if alpha[i] == 0.0 {
            continue;
        }
        for j in 0..n {
            quad += alpha[i] * alpha[j] * y[i] * y[j] * k(i, j);
        }
    }
    alpha.iter().sum::<f64>() - 0.5 * quad
}

pub(crate) fn smo(y: &[f64], kdiag: &[f64], row: impl Fn(usize, &mut [f64]), cfg: &SvmConfig) -> Result<DualSolution, MlError> {
    let n = y.len();
    let c = cfg.c;
    let mut alpha = vec![0.0; n];
    // gradient of 1/2 a'Qa - e'a
    let mut g = vec![-1.0; n];
    let mut ki = vec![0.0; n];
    let mut kj = vec![0.0; n];
    let up = |a: f64, yy: f64| (yy > 0.0 && a < c) || (yy < 0.0 && a > 0.0);
    let low = |a: f64, yy: f64| (yy > 0.0 && a > 0.0) || (yy < 0.0 && a < c);
    let mut it = 0;
    loop {
        let mut gmax = f64::NEG_INFINITY;
        let mut i = usize::MAX;
        for t in 0..n {
            if up(alpha[t], y[t]) && -y[t] * g[t] >= gmax
                && (-y[t] * g[t] > gmax || i == usize::MAX) {
                    gmax = -y[t] * g[t];
                    i = t;
                }
        }
        let mut gmin = f64::INFINITY;
        for t in 0..n {
            if low(alpha[t], y[t]) {
                gmin = gmin.min(-y[t] * g[t]);
            }
        }
        if i == usize::MAX || gmax - gmin < cfg.tol {
            break;
        }
        if it >= cfg.max_iter {
            return Err(MlError::NoConvergence(it));
        }
        it += 1;
        row(i, &mut ki);
        let mut j = usize::MAX;
        let mut best = f64::INFINITY;
        for t in 0..n {
            if !low(alpha[t], y[t]) {
                continue;
            }
            let b = gmax + y[t] * g[t];
            if b > 0.0 {
                let mut a = kdiag[i] + kdiag[t] - 2.0 * ki[t];
                if a <= 0.0 {
                    a = TAU;
                }
                let v = -b * b / a;
                if v < best {
                    best = v;
                    j = t;
                }
            }
        }
        if j == usize::MAX {
            break;
        }
        row(j, &mut kj);
        let (ai, aj) = (alpha[i], alpha[j]);
        let qij = y[i] * y[j] * ki[j];
        if y[i] != y[j] {
            let mut quad = kdiag[i] + kdiag[j] + 2.0 * qij;
            if quad <= 0.0 {
                quad = TAU;
            }
            let delta = (-g[i] - g[j]) / quad;
            let diff = ai - aj;
            alpha[i] += delta;
            alpha[j] += delta;
            if diff > 0.0 {
                if alpha[j] < 0.0 {
                    alpha[j] = 0.0;
                    alpha[i] = diff;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = -diff;
            }
            if diff > 0.0 {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = c - diff;
                }
            } else if alpha[j] > c {
                alpha[j] = c;
                alpha[i] = c + diff;
            }
        } else {
            let mut quad = kdiag[i] + kdiag[j] - 2.0 * qij;
            if quad <= 0.0 {
                quad = TAU;
            }
            let delta = (g[i] - g[j]) / quad;
            let sum = ai + aj;
            alpha[i] -= delta;
            alpha[j] += delta;
            if sum > c {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = sum - c;
                }
            } else if alpha[j] < 0.0 {
                alpha[j] = 0.0;
                alpha[i] = sum;
            }
            if sum > c {
                if alpha[j] > c {
                    alpha[j] = c;
                    alpha[i] = sum - c;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = sum;
            }
        }
        let (di, dj) = (alpha[i] - ai, alpha[j] - aj);
        for t in 0..n {
            g[t] += y[t] * (y[i] * ki[t] * di + y[j] * kj[t] * dj);
        }
    }
    // offset from free vectors, else midpoint of the feasible interval
    let (mut sum, mut nfree) = (0.0, 0usize);
    let (mut ub, mut lb) = (f64::INFINITY, f64::NEG_INFINITY);
    for t in 0..n {
        let yg = y[t] * g[t];
        if alpha[t] > 0.0 && alpha[t] < c {
            sum += yg;
            nfree += 1;
        } else if (alpha[t] >= c && y[t] < 0.0) || (alpha[t] <= 0.0 && y[t] > 0.0) {
            ub = ub.min(yg);
        } else {
            lb = lb.max(yg);
        }
    }
    let rho = if nfree > 0 { sum / nfree as f64 } else { (ub + lb) / 2.0 };
    Ok(DualSolution {
        alpha,
        b: -rho,
        iterations: it,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct BinarySvm {
    pub support: Vec<Vec<f64>>,
    /// `alpha_i * y_i` per support vector.
    pub coef: Vec<f64>,
    pub bias: f64,
    pub gamma: f64,
}

impl BinarySvm {
    /// `y` holds +1 / -1.
    pub fn train(x: &[Vec<f64>], y: &[f64], cfg: &SvmConfig) -> Result<BinarySvm, MlError> {
        check(x, y.len(), cfg)?;
        let gram = Gram::new(x, cfg.gamma);
        Self::from_gram(x, y, &gram, cfg)
    }

    /// Raw dual solution with an exact (f64) kernel; for small sets.
    pub fn solve_dual(x: &[Vec<f64>], y: &[f64], cfg: &SvmConfig) -> Result<DualSolution, MlError> {
        check(x, y.len(), cfg)?;
        let n = x.len();
        let diag = vec![1.0; n];
        smo(
            y,
            &diag,
            |i, out| {
                for (j, o) in out.iter_mut().enumerate() {
                    *o = rbf(&x[i], &x[j], cfg.gamma);
                }
            },
            cfg,
        )
    }

    pub(crate) fn from_gram(x: &[Vec<f64>], y: &[f64], gram: &Gram, cfg: &SvmConfig) -> Result<BinarySvm, MlError> {
        let diag: Vec<f64> = (0..x.len()).map(|i| gram.row(i)[i] as f64).collect();
        let sol = smo(
            y,
            &diag,
            |i, out| {
                for (o, v) in out.iter_mut().zip(gram.row(i)) {
                    *o = *v as f64;
                }
            },
            cfg,
        )?;
        let mut m = BinarySvm {
            support: Vec::new(),
            coef: Vec::new(),
            bias: sol.b,
            gamma: cfg.gamma,
        };
        for (i, a) in sol.alpha.iter().enumerate() {
            if *a > 0.0 {
                m.support.push(x[i].clone());
                m.coef.push(a * y[i]);
            }
        }
        Ok(m)
    }

    pub fn decision(&self, x: &[f64]) -> f64 {
        self.support
            .iter()
            .zip(&self.coef)
            .map(|(s, c)| c * rbf(s, x, self.gamma))
            .sum::<f64>()
            + self.bias
    }
}

fn check(x: &[Vec<f64>], ny: usize, cfg: &SvmConfig) -> Result<(), MlError> {
    if x.is_empty() || x.len() != ny {
        return Err(MlError::Empty);
    }
    if !(cfg.c > 0.0 && cfg.gamma > 0.0 && cfg.tol > 0.0) {
        return Err(MlError::Invalid("C, gamma and tol must be positive".into()));
    }
    Ok(())
}

/// One machine per class, class `c` against the rest.
#[derive(Debug, Clone, PartialEq)]
pub struct SvmEnsemble {
    pub machines: Vec<BinarySvm>,
}

impl SvmEnsemble {
    pub fn train(x: &[Vec<f64>], labels: &[usize], cfg: &SvmConfig) -> Result<SvmEnsemble, MlError> {
        check(x, labels.len(), cfg)?;
        let gram = Gram::new(x, cfg.gamma);
        let mut machines = Vec::with_capacity(NUM_CLASSES);
        for c in 0..NUM_CLASSES {
            let y: Vec<f64> = labels.iter().map(|&l| if l == c { 1.0 } else { -1.0 }).collect();
            machines.push(BinarySvm::from_gram(x, &y, &gram, cfg)?);
        }
        Ok(SvmEnsemble { machines })
    }

    /// Class with the largest decision value; ties go to the lower class.
    pub fn predict(&self, x: &[f64]) -> usize {
        let mut best = (0, f64::NEG_INFINITY);
        for (c, m) in self.machines.iter().enumerate() {
            let v = m.decision(x);
            if v > best.1 {
                best = (c, v);
            }
        }
        best.0
    }
}
