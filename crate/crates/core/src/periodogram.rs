//! The periodogram `I_T(X; λ) = |∫_0^T e^{iλt} dX_t|²` and the randomized
//! periodogram `E_ξ I_T(X; Lξ) = ∫ I_T(X; Lx) g_ξ(x) dx`.
//!
//! Two discretisations of the oscillatory integral coexist:
//!
//! * [`periodogram`] uses integration by parts with a trapezoid rule, and is
//!   exact at `λ = 0`;
//! * [`rs_periodogram`] uses the left-point Riemann–Stieltjes sum, for which
//!   the decomposition into realized QV plus twice the real part of an
//!   iterated double sum is an algebraic identity.
//!
//! The randomized periodogram integrates [`rs_periodogram`] over `x`, so the
//! quadrature in `x` and the lag decomposition commute exactly. That gives two
//! evaluation routes: node-by-node ([`randomized_periodogram`]) and a lag
//! table contracted with the increment autocorrelation ([`RandomizedKernel`]).

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::gaussian_paths::{SamplePath, TimeGrid};
use crate::pathwise_integrals::{
    iterated_double_integral, oscillatory_integral_ibp, oscillatory_integral_rs,
    realized_qv_full, trapezoid, trapezoid_fourier, Correlator,
};
use crate::quadrature::{gauss_hermite_normal, simpson_weights, GaussLegendre};
use crate::randomizer::{RandomizerFamily, RandomizerSpec};
use crate::{Error, Result};

/// Default relative tolerance of the node-doubling self-check.
pub const SELF_CHECK_TOLERANCE: f64 = 1e-6;

/// How the `x`-integral against `g_ξ` is evaluated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum QuadratureRule {
    /// Gauss–Hermite nodes for the Gaussian law (Gaussian `ξ` only).
    GaussHermite,
    /// Composite Simpson on `[−c, c]` with `P(|ξ| > c) = tail_mass`.
    TruncatedSimpson { tail_mass: f64 },
    /// Closed form through the characteristic function: `∫ cos(Lxu) g_ξ(x) dx = φ_ξ(Lu)`.
    Exact,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSpec {
    pub rule: QuadratureRule,
    pub nodes: usize,
}

impl QuadratureSpec {
    pub fn gauss_hermite(nodes: usize) -> Self {
        Self {
            rule: QuadratureRule::GaussHermite,
            nodes,
        }
    }

    pub fn simpson(nodes: usize) -> Self {
        Self {
            rule: QuadratureRule::TruncatedSimpson { tail_mass: 1e-8 },
            nodes,
        }
    }

    pub fn exact() -> Self {
        Self {
            rule: QuadratureRule::Exact,
            nodes: 0,
        }
    }

    /// 64 Gauss–Hermite nodes for Gaussian `ξ`, 513 Simpson nodes at the
    /// `1e-8` tail quantile otherwise.
    pub fn default_for(xi: &RandomizerSpec) -> Self {
        match xi.family() {
            RandomizerFamily::Gaussian { .. } => Self::gauss_hermite(64),
            _ => Self::simpson(513),
        }
    }

    /// The rule used for the self-check: twice the nodes (Simpson keeps the
    /// old nodes as a subset).
    pub fn doubled(&self) -> Self {
        let nodes = match self.rule {
            QuadratureRule::GaussHermite => 2 * self.nodes,
            QuadratureRule::TruncatedSimpson { .. } => 2 * self.nodes - 1,
            QuadratureRule::Exact => 0,
        };
        Self { nodes, ..*self }
    }

    /// Nodes and probability weights in `x`; `None` for [`QuadratureRule::Exact`].
    pub fn materialize(&self, xi: &RandomizerSpec) -> Result<Option<XQuadrature>> {
        match self.rule {
            QuadratureRule::Exact => Ok(None),
            _ if self.nodes < 3 => Err(Error::invalid(format!(
                "quadrature needs at least 3 nodes, got {}",
                self.nodes
            ))),
            QuadratureRule::GaussHermite => match xi.family() {
                RandomizerFamily::Gaussian { sigma } => {
                    let (z, w) = gauss_hermite_normal(self.nodes);
                    let x = z.into_iter().map(|z| sigma * z).collect();
                    Ok(Some(XQuadrature::normalized(x, w)))
                }
                _ => Err(Error::invalid(format!(
                    "Gauss–Hermite quadrature requires a Gaussian randomizer, got {xi}"
                ))),
            },
            QuadratureRule::TruncatedSimpson { tail_mass } => {
                if !(tail_mass > 0.0 && tail_mass < 1.0) {
                    return Err(Error::invalid(format!("tail mass must lie in (0, 1), got {tail_mass}")));
                }
                let mut m = self.nodes | 1;
                if xi.kinked_at_origin() {
                    // keep x = 0 on a Simpson panel edge
                    while m % 4 != 1 {
                        m += 2;
                    }
                }
                let c = xi.tail_cutoff(tail_mass);
                let (x, w) = simpson_weights(-c, c, m);
                let w = x.iter().zip(w).map(|(&x, w)| w * xi.density(x)).collect();
                Ok(Some(XQuadrature::normalized(x, w)))
            }
        }
    }
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self::gauss_hermite(64)
    }
}

impl fmt::Display for QuadratureSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.rule {
            QuadratureRule::GaussHermite => write!(f, "gauss-hermite:{}", self.nodes),
            QuadratureRule::TruncatedSimpson { .. } => write!(f, "simpson:{}", self.nodes),
            QuadratureRule::Exact => write!(f, "exact"),
        }
    }
}

impl FromStr for QuadratureSpec {
    type Err = Error;

    /// `gauss-hermite[:m]`, `simpson[:m]` or `exact`.
    fn from_str(s: &str) -> Result<Self> {
        let (name, nodes) = match s.split_once(':') {
            Some((n, m)) => (
                n,
                Some(
                    m.trim()
                        .parse::<usize>()
                        .map_err(|_| Error::invalid(format!("bad node count `{m}`")))?,
                ),
            ),
            None => (s, None),
        };
        match name.trim() {
            "gauss-hermite" | "gh" => Ok(Self::gauss_hermite(nodes.unwrap_or(64))),
            "simpson" => Ok(Self::simpson(nodes.unwrap_or(513))),
            "exact" => Ok(Self::exact()),
            other => Err(Error::invalid(format!("unknown quadrature rule `{other}`"))),
        }
    }
}

/// Quadrature nodes `x_i` and nonnegative weights summing to one.
#[derive(Debug, Clone)]
pub struct XQuadrature {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl XQuadrature {
    fn normalized(nodes: Vec<f64>, weights: Vec<f64>) -> Self {
        let total: f64 = weights.iter().sum();
        let weights = weights.into_iter().map(|w| w / total).collect();
        Self { nodes, weights }
    }

    /// `m`-point Gauss–Legendre rule on `[−cutoff, cutoff]` weighted by `g_ξ`
    /// (not renormalized).
    pub fn legendre_window(xi: &RandomizerSpec, cutoff: f64, m: usize) -> Self {
        let gl = GaussLegendre::new(m);
        let nodes: Vec<f64> = gl.nodes().iter().map(|z| cutoff * z).collect();
        let weights = gl
            .weights()
            .iter()
            .zip(&nodes)
            .map(|(w, &x)| cutoff * w * xi.density(x))
            .collect();
        Self { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// `Σ w_i cos(x_i u)`, the rule's approximation of `φ_ξ(u)`.
    pub fn char_fn(&self, u: f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(x, w)| w * (x * u).cos())
            .sum()
    }
}

/// `I_T(X; λ)` from the integration-by-parts oscillatory integral.
pub fn periodogram(x: &SamplePath, lambda: f64) -> f64 {
    oscillatory_integral_ibp(x, lambda).norm_sqr()
}

/// `|Σ e^{iλt_{k−1}} ΔX_k|²`.
pub fn rs_periodogram(x: &SamplePath, lambda: f64) -> f64 {
    oscillatory_integral_rs(x, lambda).norm_sqr()
}

/// Largest tolerated imaginary residue of the (real) middle term.
const EXPANDED_RESIDUE_MAX: f64 = 1e-10;

/// `X_T² + X_T ∫ iλ(e^{iλ(T−t)} − e^{−iλ(T−t)}) X_t dt + λ² |∫ e^{iλt} X_t dt|²`,
/// each ordinary integral by the trapezoid rule. Assumes `X_0 = 0`.
pub fn periodogram_expanded(x: &SamplePath, lambda: f64) -> Result<f64> {
    let xt = x.terminal();
    let horizon = x.grid().horizon();
    let values = x.values();
    let middle = trapezoid(x.grid().times(), |k, t| {
        let (s, c) = (lambda * (horizon - t)).sin_cos();
        let forward = Complex64::new(c, s);
        let backward = Complex64::new(c, -s);
        Complex64::new(0.0, lambda) * (forward - backward) * values[k]
    }) * xt;
    if middle.im.abs() > EXPANDED_RESIDUE_MAX * (1.0 + middle.re.abs()) {
        return Err(Error::Numerical(format!(
            "expanded periodogram middle term has imaginary residue {:e}",
            middle.im
        )));
    }
    let fourier = trapezoid_fourier(x, lambda);
    Ok(xt * xt + middle.re + lambda * lambda * fourier.norm_sqr())
}

/// A randomized-periodogram value with its quadrature audit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RandomizedPeriodogram {
    pub value: f64,
    /// Relative change when the node count is doubled (0 for the exact rule).
    pub self_check: f64,
    pub nodes: usize,
}

impl RandomizedPeriodogram {
    pub fn passes(&self, tolerance: f64) -> bool {
        self.self_check <= tolerance
    }
}

/// `E_ξ I_T(X; Lξ)` with the left-point periodogram integrated over `x` by `q`.
///
/// Quadrature rules are evaluated at `m` and at twice as many nodes; the
/// relative difference is returned as `self_check` and is not an error.
pub fn randomized_periodogram(
    x: &SamplePath,
    l: f64,
    xi: &RandomizerSpec,
    q: &QuadratureSpec,
) -> Result<RandomizedPeriodogram> {
    if !(l >= 0.0 && l.is_finite()) {
        return Err(Error::invalid(format!("L must be finite and nonnegative, got {l}")));
    }
    let Some(rule) = q.materialize(xi)? else {
        let value = realized_qv_full(x) + spectral_error_term(x, l, xi)?;
        return Ok(RandomizedPeriodogram {
            value,
            self_check: 0.0,
            nodes: 0,
        });
    };
    if l == 0.0 {
        // integrand is the constant I_T(X; 0) = X_T²
        return Ok(RandomizedPeriodogram {
            value: periodogram(x, 0.0),
            self_check: 0.0,
            nodes: rule.len(),
        });
    }
    let fine = q.doubled().materialize(xi)?.expect("quadrature rule");
    let eval = |r: &XQuadrature| -> f64 {
        r.nodes
            .iter()
            .zip(&r.weights)
            .map(|(&node, &w)| w * rs_periodogram(x, l * node))
            .sum()
    };
    let value = eval(&rule);
    let refined = eval(&fine);
    Ok(RandomizedPeriodogram {
        value,
        self_check: relative_change(value, refined),
        nodes: rule.len(),
    })
}

pub(crate) fn relative_change(coarse: f64, fine: f64) -> f64 {
    let diff = (coarse - fine).abs();
    if diff == 0.0 {
        0.0
    } else {
        diff / fine.abs().max(f64::MIN_POSITIVE)
    }
}

/// `e² = 2 Σ_k Σ_{j<k} φ_ξ(L(t_{k−1} − t_{j−1})) ΔX_j ΔX_k`, the discrete error
/// term of the randomized periodogram.
pub fn spectral_error_term(x: &SamplePath, l: f64, xi: &RandomizerSpec) -> Result<f64> {
    let s = iterated_double_integral(|u| Complex64::new(xi.char_fn(l * u), 0.0), x, x)?;
    Ok(2.0 * s.re)
}

/// Lag table `k(d) = E_ξ cos(Lξ dΔt)` for one equidistant grid, `L` and rule.
///
/// Contracting it with the increment autocorrelation `A(d)` gives the
/// randomized periodogram: `k(0)A(0) + 2 Σ_{d≥1} k(d)A(d)`. The table depends
/// only on the grid, so one table serves every path of a Monte Carlo run.
#[derive(Debug, Clone)]
pub struct RandomizedKernel {
    weights: Vec<f64>,
    self_check: f64,
    defect: f64,
    nodes: usize,
}

impl RandomizedKernel {
    pub fn new(grid: &TimeGrid, l: f64, xi: &RandomizerSpec, q: &QuadratureSpec) -> Result<Self> {
        let spacing = grid
            .spacing()
            .ok_or_else(|| Error::invalid("lag tables need an equidistant grid"))?;
        if !(l >= 0.0 && l.is_finite()) {
            return Err(Error::invalid(format!("L must be finite and nonnegative, got {l}")));
        }
        let n = grid.intervals();
        let lags = |d: usize| l * d as f64 * spacing;
        let exact: Vec<f64> = (0..n).map(|d| xi.char_fn(lags(d))).collect();
        let Some(rule) = q.materialize(xi)? else {
            return Ok(Self {
                weights: exact,
                self_check: 0.0,
                defect: 0.0,
                nodes: 0,
            });
        };
        let table = |r: &XQuadrature| -> Vec<f64> { (0..n).map(|d| r.char_fn(lags(d))).collect() };
        let weights = if l == 0.0 { vec![1.0; n] } else { table(&rule) };
        let fine = if l == 0.0 {
            weights.clone()
        } else {
            table(&q.doubled().materialize(xi)?.expect("quadrature rule"))
        };
        let sup = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        Ok(Self {
            self_check: sup(&weights, &fine),
            defect: sup(&weights, &exact),
            weights,
            nodes: rule.len(),
        })
    }

    /// `max_d |k_m(d) − k_{2m}(d)|`.
    pub fn self_check(&self) -> f64 {
        self.self_check
    }

    /// `max_d |k(d) − φ_ξ(L dΔt)|`, the rule's error on the exact kernel.
    pub fn defect(&self) -> f64 {
        self.defect
    }

    pub fn nodes(&self) -> usize {
        self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Contract with an increment autocorrelation `A(0..n)`.
    pub fn contract(&self, autocorrelation: &[f64]) -> f64 {
        assert_eq!(autocorrelation.len(), self.weights.len());
        let head = self.weights[0] * autocorrelation[0];
        let tail: f64 = self.weights[1..]
            .iter()
            .zip(&autocorrelation[1..])
            .map(|(k, a)| k * a)
            .sum();
        head + 2.0 * tail
    }

    pub fn evaluate(&self, x: &SamplePath) -> f64 {
        let dx = x.increments();
        self.contract(&Correlator::new(dx.len()).auto(&dx))
    }
}
