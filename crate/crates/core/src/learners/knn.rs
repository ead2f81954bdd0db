//! k-nearest-neighbor classifier with Minkowski and Chebyshev distances.

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Metric {
    /// (sum |xi-yi|^p)^(1/p)
    Minkowski(f64),
    /// max |xi-yi|
    Chebyshev,
}

impl Metric {
    /// Order-equivalent key: the Minkowski root is monotone, so ranking
    /// neighbors can skip it.
    fn rank_key(&self, a: &[f64], b: &[f64]) -> f64 {
        match self {
            Metric::Minkowski(p) => minkowski_sum(a, b, *p),
            Metric::Chebyshev => {
                a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
            }
        }
    }

    pub fn distance(&self, a: &[f64], b: &[f64]) -> f64 {
        match self {
            Metric::Minkowski(p) => minkowski_sum(a, b, *p).powf(1.0 / p),
            Metric::Chebyshev => {
                a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
            }
        }
    }
}

fn minkowski_sum(a: &[f64], b: &[f64], p: f64) -> f64 {
    if p == 2.0 {
        a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
    } else if p == 1.0 {
        a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum()
    } else if p.fract() == 0.0 && p > 0.0 && p <= 32.0 {
        let e = p as i32;
        a.iter().zip(b).map(|(x, y)| (x - y).abs().powi(e)).sum()
    } else {
        a.iter().zip(b).map(|(x, y)| (x - y).abs().powf(p)).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Weights {
    Uniform,
    Distance,
}

#[derive(Debug, Clone)]
pub struct KnnModel {
    rows: Vec<Vec<f64>>,
    labels: Vec<bool>,
    k: usize,
    metric: Metric,
    weights: Weights,
}

impl KnnModel {
    pub fn fit(rows: &[Vec<f64>], labels: &[bool], k: usize, metric: Metric, weights: Weights) -> Self {
        KnnModel {
            rows: rows.to_vec(),
            labels: labels.to_vec(),
            k: k.clamp(1, rows.len()),
            metric,
            weights,
        }
    }

    pub fn predict(&self, row: &[f64]) -> bool {
        let mut keys: Vec<(f64, usize)> = self
            .rows
            .iter()
            .enumerate()
            .map(|(i, r)| (self.metric.rank_key(row, r), i))
            .collect();
        // k nearest with distance ties broken by training order
        let cmp = |a: &(f64, usize), b: &(f64, usize)| {
            a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1))
        };
        if self.k < keys.len() {
            keys.select_nth_unstable_by(self.k - 1, cmp);
        }
        let neighbors = &keys[..self.k];

        // exact matches dominate the distance-weighted vote
        if self.weights == Weights::Distance {
            let exact: Vec<&(f64, usize)> = neighbors.iter().filter(|(d, _)| *d == 0.0).collect();
            if !exact.is_empty() {
                let pos = exact.iter().filter(|(_, i)| self.labels[*i]).count();
                return 2 * pos > exact.len();
            }
        }

        let mut score_true = 0.0;
        let mut score_false = 0.0;
        for &(_, i) in neighbors {
            let w = match self.weights {
                Weights::Uniform => 1.0,
                Weights::Distance => 1.0 / self.metric.distance(row, &self.rows[i]),
            };
            if self.labels[i] {
                score_true += w;
            } else {
                score_false += w;
            }
        }
        score_true > score_false
    }
}
