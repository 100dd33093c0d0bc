//! Brute-force references for the classifiers.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use digisub::ml::{
    dual_objective, gaussian_kernel, gini_index, minkowski_distance, BinarySvm, DecisionTree, Knn, KnnConfig, Mlp, Node,
    SvmConfig, TreeConfig, NUM_CLASSES,
};

pub fn gini_of(y: &[usize], idx: &[usize]) -> f64 {
    let mut c = vec![0usize; NUM_CLASSES];
    for &i in idx {
        c[y[i]] += 1;
    }
    gini_index(&c).unwrap()
}

/// Every (feature, midpoint) candidate with its weighted impurity, in
/// feature then threshold order.
pub fn all_splits(x: &[Vec<f64>], y: &[usize]) -> Vec<(usize, f64, f64)> {
    let n = x.len() as f64;
    let mut out = Vec::new();
    for f in 0..x[0].len() {
        let mut vals: Vec<f64> = x.iter().map(|r| r[f]).collect();
        vals.sort_by(f64::total_cmp);
        vals.dedup();
        for w in vals.windows(2) {
            let t = (w[0] + w[1]) / 2.0;
            let (l, r): (Vec<usize>, Vec<usize>) = (0..x.len()).partition(|&i| x[i][f] <= t);
            let imp = (l.len() as f64 * gini_of(y, &l) + r.len() as f64 * gini_of(y, &r)) / n;
            out.push((f, t, imp));
        }
    }
    out
}

/// The trained root equals the first brute-force minimum-impurity split
/// (or is a leaf exactly when no split exists or the data is pure), and the
/// grown tree reproduces every unambiguous training label.
pub fn dt_agrees_with_brute_force(x: &[Vec<f64>], y: &[usize]) -> Result<(), String> {
    let tree = DecisionTree::train(x, y, &TreeConfig::default()).unwrap();
    let all: Vec<usize> = (0..x.len()).collect();
    let parent = gini_of(y, &all);
    let splits = all_splits(x, y);
    let best = splits.iter().map(|s| s.2).fold(f64::INFINITY, f64::min);
    match &tree.nodes[0] {
        Node::Split { feature, threshold, .. } => {
            let first = splits.iter().find(|s| s.2 <= best + 1e-12).unwrap();
            if (*feature, *threshold) != (first.0, first.1) {
                return Err(format!("root ({feature}, {threshold}) vs brute force ({}, {})", first.0, first.1));
            }
        }
        Node::Leaf { .. } => {
            if !(parent == 0.0 || splits.is_empty()) {
                return Err("leaf root on splittable impure data".into());
            }
        }
    }
    for (r, &c) in x.iter().zip(y) {
        let dup = x.iter().zip(y).any(|(s, &d)| s == r && d != c);
        if !dup && tree.predict(r) != c {
            return Err(format!("training point {r:?} misfit"));
        }
    }
    Ok(())
}

/// Random small categorical data set for the tree oracle.
pub fn random_tree_data(rng: &mut ChaCha8Rng) -> (Vec<Vec<f64>>, Vec<usize>) {
    let n = rng.random_range(2..200);
    let x = (0..n)
        .map(|_| (0..3).map(|_| rng.random_range(0..8) as f64 * 0.5).collect())
        .collect();
    let y = (0..n).map(|_| [0, 3, 7, 11][rng.random_range(0..4)]).collect();
    (x, y)
}

/// Euclidean projection onto {0 <= a <= C, y'a = 0} by bisection on the
/// multiplier of the equality.
pub fn project(v: &[f64], y: &[f64], c: f64) -> Vec<f64> {
    let at = |lam: f64| -> Vec<f64> { v.iter().zip(y).map(|(vi, yi)| (vi - lam * yi).clamp(0.0, c)).collect() };
    let g = |lam: f64| -> f64 { at(lam).iter().zip(y).map(|(a, yi)| a * yi).sum() };
    let (mut lo, mut hi) = (-1e6, 1e6);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if g(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    at(0.5 * (lo + hi))
}

/// Accelerated projected gradient ascent on the dual; returns the optimum.
pub fn pg_dual(x: &[Vec<f64>], y: &[f64], c: f64, gamma: f64) -> f64 {
    let n = x.len();
    let k: Vec<Vec<f64>> = x
        .iter()
        .map(|a| x.iter().map(|b| gaussian_kernel(a, b, gamma).unwrap()).collect())
        .collect();
    let step = 1.0 / n as f64;
    let mut a = vec![0.0; n];
    let mut z = a.clone();
    let mut t = 1.0f64;
    for _ in 0..30_000 {
        let grad: Vec<f64> = (0..n)
            .map(|i| 1.0 - y[i] * (0..n).map(|j| k[i][j] * y[j] * z[j]).sum::<f64>())
            .collect();
        let v: Vec<f64> = (0..n).map(|i| z[i] + step * grad[i]).collect();
        let next = project(&v, y, c);
        let tn = (1.0 + (1.0 + 4.0 * t * t).sqrt()) / 2.0;
        z = (0..n).map(|i| next[i] + (t - 1.0) / tn * (next[i] - a[i])).collect();
        a = next;
        t = tn;
    }
    dual_objective(&a, y, |i, j| k[i][j])
}

/// SMO against the projected-gradient QP on overlapping 2-D sets of 20 to
/// 50 points; returns (worst objective gap, worst |sum alpha y|) and fails
/// if any alpha leaves the box.
pub fn svm_vs_qp(seed: u64) -> Result<(f64, f64), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut gap, mut feas) = (0f64, 0f64);
    for trial in 0..6 {
        let n = 20 + trial * 6;
        let mut x = Vec::new();
        let mut y = Vec::new();
        for i in 0..n {
            let cls = if i % 2 == 0 { 1.0 } else { -1.0 };
            x.push(vec![rng.random_range(-1.0..1.0) + 0.6 * cls, rng.random_range(-1.0..1.0)]);
            y.push(cls);
        }
        let c = [0.5, 10.0][trial % 2];
        let gamma = 0.8;
        let cfg = SvmConfig {
            c,
            gamma,
            tol: 1e-7,
            max_iter: 1_000_000,
        };
        let sol = BinarySvm::solve_dual(&x, &y, &cfg).map_err(|e| e.to_string())?;
        if !sol.alpha.iter().all(|&a| (0.0..=c).contains(&a)) {
            return Err(format!("alpha outside [0, {c}]"));
        }
        let eq: f64 = sol.alpha.iter().zip(&y).map(|(a, b)| a * b).sum();
        feas = feas.max(eq.abs());
        let smo = dual_objective(&sol.alpha, &y, |i, j| gaussian_kernel(&x[i], &x[j], gamma).unwrap());
        gap = gap.max((smo - pg_dual(&x, &y, c, gamma)).abs());
    }
    Ok((gap, feas))
}

pub fn exhaustive_knn(x: &[Vec<f64>], y: &[usize], q: &[f64], k: usize, p: f64) -> usize {
    let mut d: Vec<(f64, usize)> = x.iter().enumerate().map(|(i, r)| (minkowski_distance(r, q, p).unwrap(), i)).collect();
    d.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let mut votes = [0usize; NUM_CLASSES];
    let mut sum = [0f64; NUM_CLASSES];
    for &(dist, i) in &d[..k] {
        votes[y[i]] += 1;
        sum[y[i]] += dist;
    }
    let mut cands: Vec<usize> = (0..NUM_CLASSES).filter(|&c| votes[c] > 0).collect();
    cands.sort_by(|&a, &b| {
        votes[b]
            .cmp(&votes[a])
            .then((sum[a] / votes[a] as f64).total_cmp(&(sum[b] / votes[b] as f64)))
            .then(a.cmp(&b))
    });
    cands[0]
}

/// Disagreements between the KNN model and an exhaustive scan over
/// `queries` random queries for each p in {1, 2, 3} and k in {1, 5}. The
/// grid-valued data makes distance ties common.
pub fn knn_mismatches(seed: u64, queries: usize) -> usize {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let x: Vec<Vec<f64>> = (0..300)
        .map(|_| (0..6).map(|_| (rng.random_range(0..5) as f64) * 0.5).collect())
        .collect();
    let y: Vec<usize> = (0..300).map(|_| rng.random_range(0..NUM_CLASSES)).collect();
    let mut bad = 0;
    for p in [1.0, 2.0, 3.0] {
        for k in [1, 5] {
            let m = Knn::train(&x, &y, KnnConfig { k, p }).unwrap();
            for _ in 0..queries {
                let q: Vec<f64> = (0..6).map(|_| (rng.random_range(0..9) as f64) * 0.25).collect();
                bad += usize::from(m.predict(&q) != exhaustive_knn(&x, &y, &q, k, p));
            }
        }
    }
    bad
}

/// Worst relative error between backprop and central differences over
/// every weight and bias of a [12, 9, 7, 12] network.
pub fn mlp_fd_worst(seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let layers = [12, 9, 7, 12];
    let mut net = Mlp::new(&layers, 4).unwrap();
    for b in &mut net.biases {
        b.iter_mut().for_each(|v| *v = rng.random_range(-0.1..0.1));
    }
    let xs: Vec<Vec<f64>> = (0..10).map(|_| (0..12).map(|_| rng.random_range(-1.0..1.0)).collect()).collect();
    let ys: Vec<usize> = (0..10).map(|i| (i * 5) % NUM_CLASSES).collect();
    let bx: Vec<&[f64]> = xs.iter().map(Vec::as_slice).collect();
    let (_, g) = net.backward(&bx, &ys).unwrap();
    let h = 1e-5;
    let rel = |a: f64, n: f64| (a - n).abs() / a.abs().max(n.abs()).max(1e-7);
    let mut worst = 0f64;
    for l in 0..net.weights.len() {
        for idx in 0..net.weights[l].len() {
            let orig = net.weights[l][idx];
            net.weights[l][idx] = orig + h;
            let up = net.loss(&bx, &ys).unwrap();
            net.weights[l][idx] = orig - h;
            let dn = net.loss(&bx, &ys).unwrap();
            net.weights[l][idx] = orig;
            worst = worst.max(rel(g.weights[l][idx], (up - dn) / (2.0 * h)));
        }
        for idx in 0..net.biases[l].len() {
            let orig = net.biases[l][idx];
            net.biases[l][idx] = orig + h;
            let up = net.loss(&bx, &ys).unwrap();
            net.biases[l][idx] = orig - h;
            let dn = net.loss(&bx, &ys).unwrap();
            net.biases[l][idx] = orig;
            worst = worst.max(rel(g.biases[l][idx], (up - dn) / (2.0 * h)));
        }
    }
    worst
}
