//! Logistic regression trained by full-batch gradient descent with a
//! backtracking step size, which keeps the objective non-increasing.
//!
//! Features are standardized internally; `C` is the inverse regularization
//! strength; the intercept is unpenalized. Training stops when the loss
//! change drops below `tol` or after 500 epochs.

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Penalty {
    L1,
    L2,
}

const MAX_EPOCHS: usize = 500;

#[derive(Debug, Clone)]
pub struct LogisticModel {
    weights: Vec<f64>,
    intercept: f64,
    means: Vec<f64>,
    stds: Vec<f64>,
    loss_trace: Vec<f64>,
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

impl LogisticModel {
    pub fn fit(rows: &[Vec<f64>], labels: &[bool], penalty: Penalty, tol: f64, c: f64) -> Self {
        let n = rows.len();
        let d = rows.first().map(Vec::len).unwrap_or(0);

        let mut means = vec![0.0; d];
        let mut stds = vec![0.0; d];
        for row in rows {
            for (j, &v) in row.iter().enumerate() {
                means[j] += v;
            }
        }
        for m in &mut means {
            *m /= n as f64;
        }
        for row in rows {
            for (j, &v) in row.iter().enumerate() {
                stds[j] += (v - means[j]).powi(2);
            }
        }
        for s in &mut stds {
            *s = (*s / n as f64).sqrt();
            if *s == 0.0 {
                *s = 1.0;
            }
        }
        let x: Vec<Vec<f64>> = rows
            .iter()
            .map(|row| row.iter().enumerate().map(|(j, &v)| (v - means[j]) / stds[j]).collect())
            .collect();
        let y: Vec<f64> = labels.iter().map(|&l| if l { 1.0 } else { 0.0 }).collect();

        let lambda = 1.0 / (c * n as f64);
        let loss = |w: &[f64], b: f64| -> f64 {
            let mut ll = 0.0;
            for (xi, &yi) in x.iter().zip(&y) {
                let z: f64 = xi.iter().zip(w).map(|(a, b)| a * b).sum::<f64>() + b;
                // stable log(1 + e^z) - y z
                ll += z.max(0.0) + (-z.abs()).exp().ln_1p() - yi * z;
            }
            let reg: f64 = match penalty {
                Penalty::L1 => w.iter().map(|v| v.abs()).sum(),
                Penalty::L2 => 0.5 * w.iter().map(|v| v * v).sum::<f64>(),
            };
            ll / n as f64 + lambda * reg
        };

        let mut w = vec![0.0; d];
        let mut b = 0.0;
        let mut current = loss(&w, b);
        let mut trace = vec![current];
        let mut step = 1.0;

        for _ in 0..MAX_EPOCHS {
            let mut gw = vec![0.0; d];
            let mut gb = 0.0;
            for (xi, &yi) in x.iter().zip(&y) {
                let z: f64 = xi.iter().zip(&w).map(|(a, b)| a * b).sum::<f64>() + b;
                let err = sigmoid(z) - yi;
                for (g, &v) in gw.iter_mut().zip(xi) {
                    *g += err * v;
                }
                gb += err;
            }
            for (g, &wi) in gw.iter_mut().zip(&w) {
                *g /= n as f64;
                *g += match penalty {
                    Penalty::L1 => lambda * wi.signum(),
                    Penalty::L2 => lambda * wi,
                };
            }
            gb /= n as f64;

            // backtrack until the step improves the objective
            let mut improved = false;
            for _ in 0..40 {
                let wt: Vec<f64> = w.iter().zip(&gw).map(|(wi, gi)| wi - step * gi).collect();
                let bt = b - step * gb;
                let lt = loss(&wt, bt);
                if lt <= current {
                    w = wt;
                    b = bt;
                    let delta = current - lt;
                    current = lt;
                    trace.push(current);
                    improved = true;
                    step = (step * 1.5).min(1e3);
                    if delta < tol {
                        return LogisticModel { weights: w, intercept: b, means, stds, loss_trace: trace };
                    }
                    break;
                }
                step /= 2.0;
            }
            if !improved {
                break;
            }
        }
        LogisticModel { weights: w, intercept: b, means, stds, loss_trace: trace }
    }

    pub fn predict(&self, row: &[f64]) -> bool {
        let z: f64 = row
            .iter()
            .enumerate()
            .map(|(j, &v)| (v - self.means[j]) / self.stds[j] * self.weights[j])
            .sum::<f64>()
            + self.intercept;
        z > 0.0
    }

    /// Objective value after each accepted epoch.
    pub fn loss_trace(&self) -> &[f64] {
        &self.loss_trace
    }
}
