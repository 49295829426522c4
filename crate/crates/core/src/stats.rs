//! Order-fixed reductions.
//!
//! Sums are evaluated as a pairwise tree over the input order, so a parallel
//! producer that collects results by index reproduces the sequential bits.

use alloc::vec::Vec;

use num_traits::Float;

pub fn pairwise_sum(values: &[f64]) -> f64 {
    match values.len() {
        0 => 0.0,
        1 => values[0],
        2 => values[0] + values[1],
        n => {
            let (lo, hi) = values.split_at(n / 2);
            pairwise_sum(lo) + pairwise_sum(hi)
        }
    }
}

/// Element-wise pairwise sum of equally long rows.
pub fn pairwise_sum_rows(rows: &[Vec<f64>]) -> Vec<f64> {
    match rows.len() {
        0 => Vec::new(),
        1 => rows[0].clone(),
        n => {
            let (lo, hi) = rows.split_at(n / 2);
            let mut a = pairwise_sum_rows(lo);
            let b = pairwise_sum_rows(hi);
            for (x, y) in a.iter_mut().zip(&b) {
                *x += y;
            }
            a
        }
    }
}

/// Sample mean and unbiased standard deviation. `std` is zero for one sample.
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = pairwise_sum(values) / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let sq: Vec<f64> = values.iter().map(|v| (v - mean) * (v - mean)).collect();
    (mean, (pairwise_sum(&sq) / (n - 1) as f64).sqrt())
}

/// Column mean and standard error of the mean over `rows`.
pub fn column_mean_stderr(rows: &[Vec<f64>]) -> (Vec<f64>, Vec<f64>) {
    let n = rows.len();
    if n == 0 {
        return (Vec::new(), Vec::new());
    }
    let mut mean = pairwise_sum_rows(rows);
    for m in mean.iter_mut() {
        *m /= n as f64;
    }
    if n == 1 {
        let len = mean.len();
        return (mean, alloc::vec![0.0; len]);
    }
    let dev: Vec<Vec<f64>> =
        rows.iter().map(|r| r.iter().zip(&mean).map(|(x, m)| (x - m) * (x - m)).collect()).collect();
    let ss = pairwise_sum_rows(&dev);
    let stderr = ss.iter().map(|s| (s / (n - 1) as f64 / n as f64).sqrt()).collect();
    (mean, stderr)
}
