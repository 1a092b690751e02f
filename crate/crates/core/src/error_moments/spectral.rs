//! Moments of the randomized-periodogram error
//! `e² = 2 ∫_0^T ∫_0^t φ_ξ(L(t−s)) dX_s dX_t`, `X = W + B^H`.
//!
//! All 2-D and 4-D kernels are reduced by lag substitutions to iterated
//! integrals whose only singularities sit at panel endpoints:
//!
//! * `E e² = 2c ∫_0^T (T−u) φ(Lu) u^{2H−2} du` with `c = H(2H−1)`;
//! * `E J₁² = ∫_0^T (T−u) φ²(Lu) du`;
//! * `E J₂² = E J₃² = c ∬_{[0,T]²} (T − a∨b) φ(La) φ(Lb) |a−b|^{2H−2} da db`,
//!   evaluated in two different orders (one per functional) so each is a
//!   check on the other;
//! * `E J₄² = 2c² ∫_0^T db φ(Lb) ∫_0^b da φ(La) Q(b−a, T−b)` with
//!   `Q(δ, R) = 2 ∫_0^R (R−y) y^γ (y+δ)^γ dy + R δ^{2γ+1} B(γ+1, γ+1)`,
//!   `γ = 2H−2`, which is the 2-D remainder of the quadruple integral after
//!   integrating out the two `|·|^γ` factors along their difference variable.

use statrs::function::beta::beta;
use libm::erf;

use super::CheckedValue;
use crate::gaussian_paths::{fgn_autocovariance, Hurst};
use crate::periodogram::relative_change;
use crate::quadrature::{normalize_breakpoints, GaussLegendre};
use crate::randomizer::RandomizerSpec;
use crate::{Error, Result};

const BIAS_TOLERANCE: f64 = 1e-8;
const J_TOLERANCE: f64 = 1e-6;
const J4_TOLERANCE: f64 = 1e-4;

const BASE_ORDER: usize = 16;
/// Per-panel Gauss–Legendre order of the `J₄` triple quadrature; the
/// self-check runs at twice this.
pub const J4_DEFAULT_ORDER: usize = 4;

fn check_args(horizon: f64, l: f64) -> Result<()> {
    if !(horizon > 0.0 && horizon.is_finite()) {
        return Err(Error::invalid(format!("horizon must be positive, got {horizon}")));
    }
    if !(l >= 0.0 && l.is_finite()) {
        return Err(Error::invalid(format!("L must be finite and nonnegative, got {l}")));
    }
    Ok(())
}

/// Runs `f` at `order` and `2·order`.
fn doubled(order: usize, f: impl Fn(&GaussLegendre) -> f64) -> CheckedValue {
    let coarse = f(&GaussLegendre::new(order));
    let fine = f(&GaussLegendre::new(2 * order));
    CheckedValue {
        value: fine,
        self_check: relative_change(coarse, fine),
    }
}

/// Panel edges on `[lo, hi]`: `extra`, plus geometric grading toward each end.
fn edges(lo: f64, hi: f64, toward_lo: usize, toward_hi: usize, extra: impl IntoIterator<Item = f64>) -> Vec<f64> {
    let width = hi - lo;
    let mut points: Vec<f64> = extra.into_iter().collect();
    points.extend((1..=toward_lo).map(|k| lo + width * 0.5f64.powi(k as i32)));
    points.extend((1..=toward_hi).map(|k| hi - width * 0.5f64.powi(k as i32)));
    normalize_breakpoints(points, lo, hi)
}

/// `E e² = 2H(2H−1) ∫_0^T ∫_0^t φ_ξ(L(t−s)) (t−s)^{2H−2} ds dt`.
pub fn randomized_bias_checked(horizon: f64, hurst: Hurst, l: f64, xi: &RandomizerSpec) -> Result<CheckedValue> {
    check_args(horizon, l)?;
    let c2 = 2.0 * hurst.kernel_constant();
    let alpha = hurst.two_h() - 1.0;
    let breaks = xi.kernel_breakpoints(l, horizon);
    Ok(doubled(BASE_ORDER, |gl| {
        c2 * gl.singular_at_zero(horizon, alpha, &breaks, |u| (horizon - u) * xi.char_fn(l * u))
    }))
}

/// [`randomized_bias_checked`], failing when node doubling moves the value
/// by more than `1e-8` relative.
pub fn randomized_bias(horizon: f64, hurst: Hurst, l: f64, xi: &RandomizerSpec) -> Result<f64> {
    randomized_bias_checked(horizon, hurst, l, xi)?.require(BIAS_TOLERANCE, "randomized bias")
}

/// Exact mean error of the lag-table estimator `k(0)A(0) + 2 Σ_{d≥1} k(d)A(d)`
/// of a mixed path on `n = kernel.len()` equal steps:
/// `E A(d) = (n−d)(h·1{d=0} + h^{2H} ρ_H(d))`, `h = T/n`.
pub fn randomized_bias_discrete(horizon: f64, hurst: Hurst, kernel: &[f64]) -> f64 {
    let n = kernel.len();
    let h = horizon / n as f64;
    let h2h = h.powf(hurst.two_h());
    let mean_a = |d: usize| {
        let brownian = if d == 0 { h } else { 0.0 };
        (n - d) as f64 * (brownian + h2h * fgn_autocovariance(d, hurst))
    };
    let tail: f64 = (1..n).map(|d| kernel[d] * mean_a(d)).sum();
    kernel[0] * mean_a(0) + 2.0 * tail - horizon
}

/// `E J₁² = ∫_0^T (T−u) φ_ξ²(Lu) du`.
pub fn j1_variance_checked(horizon: f64, l: f64, xi: &RandomizerSpec) -> Result<CheckedValue> {
    check_args(horizon, l)?;
    let panels = edges(0.0, horizon, 0, 0, xi.kernel_breakpoints(l, horizon));
    Ok(doubled(BASE_ORDER, |gl| {
        gl.composite(&panels, |u| (horizon - u) * xi.char_fn(l * u).powi(2))
    }))
}

pub fn j1_variance(horizon: f64, l: f64, xi: &RandomizerSpec) -> Result<f64> {
    j1_variance_checked(horizon, l, xi)?.require(J_TOLERANCE, "J1 variance")
}

/// `∫_0^T (T−u) e^{−σ²L²u²} du` in closed form (Gaussian `ξ`).
pub fn j1_gaussian_closed_form(horizon: f64, l: f64, sigma: f64) -> f64 {
    let a = sigma * l;
    if a == 0.0 {
        return 0.5 * horizon * horizon;
    }
    let t = horizon;
    t * std::f64::consts::PI.sqrt() / (2.0 * a) * erf(a * t) + (-(a * t).powi(2)).exp_m1() / (2.0 * a * a)
}

/// `E J₂²` as `2c ∫_0^T dr φ(Lr) ∫_0^{T−r} w^{2H−2} (T−r−w) φ(L(r+w)) dw`.
pub fn j2_variance_checked(horizon: f64, hurst: Hurst, l: f64, xi: &RandomizerSpec) -> Result<CheckedValue> {
    check_args(horizon, l)?;
    let c = hurst.kernel_constant();
    let alpha = hurst.two_h() - 1.0;
    let breaks = xi.kernel_breakpoints(l, horizon);
    let outer = edges(0.0, horizon, 0, 30, breaks.iter().copied());
    Ok(doubled(BASE_ORDER, |gl| {
        2.0 * c
            * gl.composite(&outer, |r| {
                let len = horizon - r;
                let inner = edges(0.0, len, 20, 0, breaks.iter().map(|p| p - r));
                xi.char_fn(l * r) * gl.substituted(alpha, &inner, |w| (len - w) * xi.char_fn(l * (r + w)))
            })
    }))
}

pub fn j2_variance(horizon: f64, hurst: Hurst, l: f64, xi: &RandomizerSpec) -> Result<f64> {
    j2_variance_checked(horizon, hurst, l, xi)?.require(J_TOLERANCE, "J2 variance")
}

/// `E J₃²` as `2c ∫_0^T db (T−b) φ(Lb) ∫_0^b w^{2H−2} φ(L(b−w)) dw`.
pub fn j3_variance_checked(horizon: f64, hurst: Hurst, l: f64, xi: &RandomizerSpec) -> Result<CheckedValue> {
    check_args(horizon, l)?;
    let c = hurst.kernel_constant();
    let alpha = hurst.two_h() - 1.0;
    let breaks = xi.kernel_breakpoints(l, horizon);
    let outer = edges(0.0, horizon, 30, 0, breaks.iter().copied());
    Ok(doubled(BASE_ORDER, |gl| {
        2.0 * c
            * gl.composite(&outer, |b| {
                let inner = edges(0.0, b, 20, 0, breaks.iter().map(|p| b - p));
                (horizon - b) * xi.char_fn(l * b) * gl.substituted(alpha, &inner, |w| xi.char_fn(l * (b - w)))
            })
    }))
}

pub fn j3_variance(horizon: f64, hurst: Hurst, l: f64, xi: &RandomizerSpec) -> Result<f64> {
    j3_variance_checked(horizon, hurst, l, xi)?.require(J_TOLERANCE, "J3 variance")
}

/// `E J₄² = H²(2H−1)² ∫∫∫∫ φ(L(u−s)) φ(L(v−t)) |t−s|^{2H−2} |u−v|^{2H−2}`
/// over `0 ≤ s ≤ u ≤ T`, `0 ≤ t ≤ v ≤ T`, with per-panel order `order`.
pub fn j4_variance_checked(
    horizon: f64,
    hurst: Hurst,
    l: f64,
    xi: &RandomizerSpec,
    order: usize,
) -> Result<CheckedValue> {
    check_args(horizon, l)?;
    if order == 0 {
        return Err(Error::invalid("quadrature order must be positive"));
    }
    let c = hurst.kernel_constant();
    let gamma = hurst.two_h() - 2.0;
    let alpha = gamma + 1.0;
    let beta_gg = beta(alpha, alpha);
    // Q(δ, R) ~ δ^{4H−3} as δ → 0 when H < 3/4
    let inner_alpha = (2.0 * gamma + 2.0).min(1.0);
    let breaks = xi.kernel_breakpoints(l, horizon);
    let outer = edges(0.0, horizon, 16, 8, breaks.iter().copied());

    let q = |gl: &GaussLegendre, delta: f64, rem: f64| -> f64 {
        if rem <= 0.0 {
            return 0.0;
        }
        let mut points: Vec<f64> = (-4..64)
            .map(|k| delta * 2f64.powi(k))
            .take_while(|&p| p < rem)
            .collect();
        points.extend((1..=6).map(|k| rem * 0.5f64.powi(k)));
        let panels = normalize_breakpoints(points, 0.0, rem);
        let head = gl.substituted(alpha, &panels, |y| (rem - y) * (y + delta).powf(gamma));
        2.0 * head + rem * delta.powf(2.0 * gamma + 1.0) * beta_gg
    };

    Ok(doubled(order, |gl| {
        2.0 * c * c
            * gl.composite(&outer, |b| {
                let rem = horizon - b;
                let inner = edges(0.0, b, 16, 0, breaks.iter().map(|p| b - p));
                // ∫_0^b φ(L(b−w)) Q(w, T−b) dw, with w^{β−1} pulled out
                let body = gl.substituted(inner_alpha, &inner, |w| {
                    w.powf(1.0 - inner_alpha) * xi.char_fn(l * (b - w)) * q(gl, w, rem)
                });
                xi.char_fn(l * b) * body
            })
    }))
}

pub fn j4_variance(horizon: f64, hurst: Hurst, l: f64, xi: &RandomizerSpec) -> Result<f64> {
    j4_variance_checked(horizon, hurst, l, xi, J4_DEFAULT_ORDER)?.require(J4_TOLERANCE, "J4 variance")
}

/// `E J₄²` at `L = 0`:
/// `H T^{4H} (1/(4H) + B(2H+1, 2H)) − (2H−1) T^{4H} / (4(4H−1))`.
pub fn j4_at_zero_bandwidth(horizon: f64, hurst: Hurst) -> f64 {
    let h = hurst.value();
    let t4 = horizon.powf(4.0 * h);
    h * t4 * (1.0 / (4.0 * h) + beta(2.0 * h + 1.0, 2.0 * h)) - (2.0 * h - 1.0) * t4 / (4.0 * (4.0 * h - 1.0))
}

/// `(E J₂², E J₃², E J₄²)`.
pub fn j2_j3_j4_variances(horizon: f64, hurst: Hurst, l: f64, xi: &RandomizerSpec) -> Result<(f64, f64, f64)> {
    Ok((
        j2_variance(horizon, hurst, l, xi)?,
        j3_variance(horizon, hurst, l, xi)?,
        j4_variance(horizon, hurst, l, xi)?,
    ))
}
