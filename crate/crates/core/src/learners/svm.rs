//! Linear SVM trained by the stochastic subgradient (Pegasos) scheme.
//!
//! Kept for the text-mining comparison treatments; fixed `C`, fixed epoch
//! budget, no tunables in the option space.

use rand::prelude::*;

#[derive(Debug, Clone)]
pub struct SvmModel {
    weights: Vec<f64>,
    intercept: f64,
    means: Vec<f64>,
    stds: Vec<f64>,
}

impl SvmModel {
    pub fn fit(rows: &[Vec<f64>], labels: &[bool], c: f64, epochs: usize, rng: &mut StdRng) -> Self {
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
        let y: Vec<f64> = labels.iter().map(|&l| if l { 1.0 } else { -1.0 }).collect();

        let lambda = 1.0 / (c * n as f64);
        let mut w = vec![0.0; d];
        let mut b = 0.0;
        let mut t = 0u64;
        let mut order: Vec<usize> = (0..n).collect();
        for _ in 0..epochs {
            order.shuffle(rng);
            for &i in &order {
                t += 1;
                let eta = 1.0 / (lambda * t as f64);
                let margin =
                    y[i] * (x[i].iter().zip(&w).map(|(a, b)| a * b).sum::<f64>() + b);
                let shrink = 1.0 - eta * lambda;
                for wj in &mut w {
                    *wj *= shrink;
                }
                if margin < 1.0 {
                    for (wj, &xj) in w.iter_mut().zip(&x[i]) {
                        *wj += eta * y[i] * xj;
                    }
                    b += eta * y[i];
                }
            }
        }
        SvmModel { weights: w, intercept: b, means, stds }
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
}
