//! Small-sample summaries for Monte Carlo output.

/// Mean, unbiased variance and the standard errors derived from them.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Summary {
    pub count: usize,
    pub mean: f64,
    pub variance: f64,
    /// Standard error of the mean.
    pub se_mean: f64,
    /// Standard error of the sample variance, from the fourth central moment.
    pub se_variance: f64,
}

impl Summary {
    pub fn of(values: &[f64]) -> Self {
        let count = values.len();
        let n = count as f64;
        let mean = mean(values);
        if count < 2 {
            return Self {
                count,
                mean,
                variance: f64::NAN,
                se_mean: f64::NAN,
                se_variance: f64::NAN,
            };
        }
        let variance = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
        let m4 = values.iter().map(|v| (v - mean).powi(4)).sum::<f64>() / n;
        let m2 = variance * (n - 1.0) / n;
        // Var(s²) ≈ (μ4 − (n−3)/(n−1) σ⁴) / n
        let var_of_var = ((m4 - (n - 3.0) / (n - 1.0) * m2 * m2) / n).max(0.0);
        Self {
            count,
            mean,
            variance,
            se_mean: (variance / n).sqrt(),
            se_variance: var_of_var.sqrt(),
        }
    }
}

pub fn mean(values: &[f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    values.iter().sum::<f64>() / values.len() as f64
}

pub fn median(values: &[f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        0.5 * (v[m - 1] + v[m])
    }
}

/// Median absolute deviation from the median (unscaled).
pub fn mad(values: &[f64]) -> f64 {
    let med = median(values);
    let dev: Vec<f64> = values.iter().map(|v| (v - med).abs()).collect();
    median(&dev)
}

/// Least-squares slope and intercept of `y` on `x`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64) {
    let mx = mean(x);
    let my = mean(y);
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}
