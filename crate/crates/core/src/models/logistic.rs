//! Multinomial logistic regression fit by full-batch gradient descent with
//! Armijo backtracking.

use ndarray::{Array1, Array2, ArrayView2, Axis};
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogisticParams {
    /// L2 penalty on the weights (the bias is not penalized).
    pub l2: f64,
    pub max_iter: usize,
    /// Stop once the gradient max-norm falls below this.
    pub tol: f64,
}

impl Default for LogisticParams {
    fn default() -> Self {
        LogisticParams { l2: 1e-3, max_iter: 500, tol: 1e-6 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LogisticModel {
    /// d x K
    pub weights: Array2<f64>,
    pub bias: Array1<f64>,
    /// Objective value after each accepted step, starting with the initial point.
    pub loss_trace: Vec<f64>,
}

/// Row-wise softmax of `x.w + b`.
pub fn softmax_scores(x: ArrayView2<f64>, w: &Array2<f64>, b: &Array1<f64>) -> Array2<f64> {
    let mut z = x.dot(w) + b;
    for mut row in z.axis_iter_mut(Axis(0)) {
        let m = row.fold(f64::NEG_INFINITY, |a, &v| a.max(v));
        row.mapv_inplace(|v| (v - m).exp());
        let s = row.sum();
        row.mapv_inplace(|v| v / s);
    }
    z
}

/// Mean cross-entropy plus `l2/2 * |w|^2`.
pub fn loss(x: ArrayView2<f64>, y: &[usize], w: &Array2<f64>, b: &Array1<f64>, l2: f64) -> f64 {
    let z = x.dot(w) + b;
    let mut total = 0.0;
    for (i, row) in z.axis_iter(Axis(0)).enumerate() {
        let m = row.fold(f64::NEG_INFINITY, |a, &v| a.max(v));
        let lse = m + row.mapv(|v| (v - m).exp()).sum().ln();
        total += lse - row[y[i]];
    }
    total / y.len() as f64 + 0.5 * l2 * w.iter().map(|v| v * v).sum::<f64>()
}

/// Analytic gradient of [`loss`] with respect to `(w, b)`.
pub fn gradient(
    x: ArrayView2<f64>,
    y: &[usize],
    w: &Array2<f64>,
    b: &Array1<f64>,
    l2: f64,
) -> (Array2<f64>, Array1<f64>) {
    let n = y.len() as f64;
    let mut p = softmax_scores(x, w, b);
    for (i, &c) in y.iter().enumerate() {
        p[[i, c]] -= 1.0;
    }
    let gw = x.t().dot(&p) / n + w * l2;
    let gb = p.sum_axis(Axis(0)) / n;
    (gw, gb)
}

fn max_abs(w: &Array2<f64>, b: &Array1<f64>) -> f64 {
    w.iter().chain(b.iter()).fold(0.0, |a, v| a.max(v.abs()))
}

pub fn fit(params: &LogisticParams, x: ArrayView2<f64>, y: &[usize], n_classes: usize) -> LogisticModel {
    let d = x.ncols();
    let mut w = Array2::zeros((d, n_classes));
    let mut b = Array1::zeros(n_classes);
    let mut f = loss(x, y, &w, &b, params.l2);
    let mut trace = vec![f];
    let mut step = 1.0;
    for _ in 0..params.max_iter {
        let (gw, gb) = gradient(x, y, &w, &b, params.l2);
        if max_abs(&gw, &gb) < params.tol {
            break;
        }
        let gnorm2 = gw.iter().chain(gb.iter()).map(|v| v * v).sum::<f64>();
        // Start a little larger than the last accepted step.
        step *= 2.0;
        let mut moved = false;
        while step > 1e-12 {
            let w2 = &w - &(&gw * step);
            let b2 = &b - &(&gb * step);
            let f2 = loss(x, y, &w2, &b2, params.l2);
            if f2 <= f - 1e-4 * step * gnorm2 {
                w = w2;
                b = b2;
                f = f2;
                moved = true;
                break;
            }
            step *= 0.5;
        }
        if !moved {
            break;
        }
        trace.push(f);
    }
    LogisticModel { weights: w, bias: b, loss_trace: trace }
}

impl LogisticModel {
    pub fn predict_proba(&self, x: ArrayView2<f64>) -> Array2<f64> {
        softmax_scores(x, &self.weights, &self.bias)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn zero_weights_give_uniform_probabilities() {
        let m = LogisticModel { weights: Array2::zeros((2, 3)), bias: Array1::zeros(3), loss_trace: vec![] };
        let p = m.predict_proba(array![[1.0, -4.0]].view());
        for v in p.iter() {
            assert!((v - 1.0 / 3.0).abs() < 1e-15);
        }
    }

    #[test]
    fn separable_data_is_fit_exactly() {
        let x = array![[-2.0, 0.1], [-1.0, -0.3], [-1.5, 0.0], [1.0, 0.2], [2.0, -0.1], [1.2, 0.4]];
        let y = [0, 0, 0, 1, 1, 1];
        let m = fit(&LogisticParams::default(), x.view(), &y, 2);
        let p = m.predict_proba(x.view());
        for (i, &c) in y.iter().enumerate() {
            assert!(p[[i, c]] > 0.5);
        }
        assert!(m.loss_trace.windows(2).all(|w| w[1] <= w[0]));
    }
}
