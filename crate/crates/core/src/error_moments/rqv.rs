//! Moments of the realized-QV error `e¹ = Σ (ΔX_k)² − T` for `X = W + B^H`.

use crate::gaussian_paths::{Hurst, TimeGrid};

/// `E e¹ = Σ_k (Δt_k)^{2H}`.
pub fn rqv_bias(grid: &TimeGrid, hurst: Hurst) -> f64 {
    let two_h = hurst.two_h();
    grid.increments().map(|dt| dt.powf(two_h)).sum()
}

/// `T^{2H} n^{1−2H}`.
pub fn rqv_bias_equidistant(horizon: f64, n: usize, hurst: Hurst) -> f64 {
    let two_h = hurst.two_h();
    horizon.powf(two_h) * (n as f64).powf(1.0 - two_h)
}

/// Diagonal part `Σ_k 2(Δt_k + Δt_k^{2H})²` and cross part
/// `Σ_{i<j} c_{ij}²`, where `c_{ij}/2 = Cov(ΔB^H_i, ΔB^H_j)`.
fn variance_parts(grid: &TimeGrid, hurst: Hurst) -> (f64, f64) {
    let two_h = hurst.two_h();
    let t = grid.times();
    let p = |x: f64| if x <= 0.0 { 0.0 } else { x.powf(two_h) };
    let diag = grid
        .increments()
        .map(|dt| 2.0 * (dt + dt.powf(two_h)).powi(2))
        .sum();
    let n = grid.intervals();
    let mut cross = 0.0;
    for i in 1..=n {
        for j in (i + 1)..=n {
            let c = p(t[j] - t[i - 1]) + p(t[j - 1] - t[i]) - p(t[j] - t[i]) - p(t[j - 1] - t[i - 1]);
            cross += c * c;
        }
    }
    (diag, cross)
}

/// `Var e¹` with unit coefficient on the squared-bracket cross sum.
pub fn rqv_variance(grid: &TimeGrid, hurst: Hurst) -> f64 {
    let (diag, cross) = variance_parts(grid, hurst);
    diag + cross
}

/// The alternative with the cross sum doubled.
pub fn rqv_variance_adjusted(grid: &TimeGrid, hurst: Hurst) -> f64 {
    let (diag, cross) = variance_parts(grid, hurst);
    diag + 2.0 * cross
}

fn equidistant_parts(horizon: f64, n: usize, hurst: Hurst) -> (f64, f64) {
    let two_h = hurst.two_h();
    let h = horizon / n as f64;
    let nf = n as f64;
    let diag = 2.0 * nf * (h + h.powf(two_h)).powi(2);
    // pairs with j − i = d occur n − d times
    let cross: f64 = (1..n)
        .map(|d| {
            let d = d as f64;
            let c = (d - 1.0).powf(two_h) + (d + 1.0).powf(two_h) - 2.0 * d.powf(two_h);
            (nf - d) * c * c
        })
        .sum();
    (diag, h.powf(2.0 * two_h) * cross)
}

/// `2n(h + h^{2H})² + h^{4H} Σ_{d=1}^{n−1} (n−d)((d−1)^{2H} + (d+1)^{2H} − 2d^{2H})²`, `h = T/n`.
pub fn rqv_variance_equidistant(horizon: f64, n: usize, hurst: Hurst) -> f64 {
    let (diag, cross) = equidistant_parts(horizon, n, hurst);
    diag + cross
}

pub fn rqv_variance_equidistant_adjusted(horizon: f64, n: usize, hurst: Hurst) -> f64 {
    let (diag, cross) = equidistant_parts(horizon, n, hurst);
    diag + 2.0 * cross
}

#[cfg(test)]
mod tests {
    use super::*;

    fn h(v: f64) -> Hurst {
        Hurst::new(v).unwrap()
    }

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    #[test]
    fn bias_values() {
        let one = TimeGrid::equidistant(1.0, 1).unwrap();
        assert_eq!(rqv_bias(&one, h(0.63)), 1.0);
        let g = TimeGrid::equidistant(1.0, 4).unwrap();
        assert!((rqv_bias(&g, h(0.75)) - 0.5).abs() < 1e-15);
        assert!((rqv_bias_equidistant(1.0, 10, h(0.75)) - 10f64.powf(-0.5)).abs() < 1e-15);
        assert!((rqv_bias_equidistant(2.0, 1, h(0.9)) - 3.482_202_253_184_497).abs() < 1e-12);
        assert!((rqv_bias_equidistant(1.0, 64, h(0.5 + 1e-9)) - 1.0).abs() < 1e-6);
        for (t, n, hv) in [(1.0, 10, 0.75), (3.0, 77, 0.6), (0.2, 1000, 0.95)] {
            let g = TimeGrid::equidistant(t, n).unwrap();
            assert!(rel(rqv_bias(&g, h(hv)), rqv_bias_equidistant(t, n, h(hv))) < 1e-12);
        }
    }

    #[test]
    fn bias_decreases_under_refinement() {
        let mut last = f64::INFINITY;
        for k in 4..=12 {
            let b = rqv_bias_equidistant(1.0, 1 << k, h(0.6));
            assert!(b < last);
            last = b;
        }
    }

    #[test]
    fn variance_values() {
        assert!((rqv_variance_equidistant(1.0, 1, h(0.8)) - 8.0).abs() < 1e-14);
        assert!((rqv_variance_equidistant(1.0, 4, h(0.5 + 1e-6)) - 2.0).abs() < 1e-4);
        for n in [1usize, 4, 16] {
            let v = rqv_variance_equidistant(1.0, n, h(0.5 + 1e-8));
            assert!(rel(v, 8.0 / n as f64) < 1e-6);
        }
    }

    #[test]
    fn equidistant_variance_matches_double_sum() {
        for (t, n, hv) in [(1.0, 8, 0.75), (2.0, 33, 0.6), (0.5, 200, 0.9)] {
            let g = TimeGrid::equidistant(t, n).unwrap();
            assert!(rel(rqv_variance(&g, h(hv)), rqv_variance_equidistant(t, n, h(hv))) < 1e-12);
            assert!(
                rel(rqv_variance_adjusted(&g, h(hv)), rqv_variance_equidistant_adjusted(t, n, h(hv))) < 1e-12
            );
        }
    }

    #[test]
    fn variance_on_irregular_grid_is_positive() {
        let g = TimeGrid::from_times(vec![0.0, 0.1, 0.15, 0.6, 1.0]).unwrap();
        let v = rqv_variance(&g, h(0.7));
        assert!(v > 0.0 && v < rqv_variance_adjusted(&g, h(0.7)));
    }
}
