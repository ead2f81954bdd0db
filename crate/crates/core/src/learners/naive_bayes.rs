//! Multinomial naive Bayes over non-negative count-like features.
//!
//! Tabular metric data is not count data, so negative values are clipped to
//! zero before accumulating class totals (and again at prediction time).

#[derive(Debug, Clone)]
pub struct NaiveBayesModel {
    log_prior: [f64; 2],
    /// log theta[class][feature] with additive smoothing
    log_theta: [Vec<f64>; 2],
}

impl NaiveBayesModel {
    pub fn fit(rows: &[Vec<f64>], labels: &[bool], alpha: f64) -> Self {
        let d = rows.first().map(Vec::len).unwrap_or(0);
        let n = rows.len() as f64;
        let mut counts = [vec![0.0f64; d], vec![0.0f64; d]];
        let mut class_n = [0.0f64; 2];
        for (row, &label) in rows.iter().zip(labels) {
            let c = usize::from(label);
            class_n[c] += 1.0;
            for (j, &v) in row.iter().enumerate() {
                counts[c][j] += v.max(0.0);
            }
        }
        let log_prior = [(class_n[0] / n).ln(), (class_n[1] / n).ln()];
        let mut log_theta = [vec![0.0; d], vec![0.0; d]];
        for c in 0..2 {
            let total: f64 = counts[c].iter().sum::<f64>() + alpha * d as f64;
            for j in 0..d {
                // alpha = 0 with an unseen feature gives -inf, which simply
                // vetoes that class when the feature is present
                log_theta[c][j] = ((counts[c][j] + alpha) / total).ln();
            }
        }
        NaiveBayesModel { log_prior, log_theta }
    }

    fn log_posterior(&self, row: &[f64], class: usize) -> f64 {
        let mut lp = self.log_prior[class];
        for (j, &v) in row.iter().enumerate() {
            let x = v.max(0.0);
            if x > 0.0 {
                lp += x * self.log_theta[class][j];
            }
        }
        lp
    }

    pub fn predict(&self, row: &[f64]) -> bool {
        self.log_posterior(row, 1) > self.log_posterior(row, 0)
    }
}
