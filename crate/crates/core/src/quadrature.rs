//! Gauss rules and composite integration helpers.
//!
//! Everything here works on plain `f64` closures. Weakly singular integrands
//! `w^{α−1} f(w)` are handled by the substitution `w = v^{1/α}`, which turns
//! them into smooth integrands in `v`; features at known scales are resolved
//! by passing explicit panel breakpoints.

use std::f64::consts::PI;

/// Gauss–Legendre rule on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(order: usize) -> Self {
        assert!(order >= 1, "Gauss–Legendre order must be positive");
        let mut nodes = vec![0.0; order];
        let mut weights = vec![0.0; order];
        let n = order as f64;
        for i in 0..order.div_ceil(2) {
            let mut z = (PI * (i as f64 + 0.75) / (n + 0.5)).cos();
            let mut deriv = 0.0;
            for _ in 0..100 {
                let (p, dp) = legendre_with_derivative(order, z);
                deriv = dp;
                let step = p / dp;
                z -= step;
                if step.abs() <= 1e-15 {
                    break;
                }
            }
            let (_, dp) = legendre_with_derivative(order, z);
            if dp != 0.0 {
                deriv = dp;
            }
            let w = 2.0 / ((1.0 - z * z) * deriv * deriv);
            nodes[i] = -z;
            nodes[order - 1 - i] = z;
            weights[i] = w;
            weights[order - 1 - i] = w;
        }
        Self { nodes, weights }
    }

    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// `∫_a^b f`.
    pub fn integrate(&self, a: f64, b: f64, mut f: impl FnMut(f64) -> f64) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let mut acc = 0.0;
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            acc += w * f(mid + half * x);
        }
        acc * half
    }

    /// Sum of [`GaussLegendre::integrate`] over consecutive breakpoint panels.
    pub fn composite(&self, breakpoints: &[f64], mut f: impl FnMut(f64) -> f64) -> f64 {
        breakpoints
            .windows(2)
            .map(|p| self.integrate(p[0], p[1], &mut f))
            .sum()
    }

    /// `∫_0^len w^{α−1} f(w) dw` for `α ∈ (0, 1]`, computed as
    /// `(1/α) ∫_0^{len^α} f(v^{1/α}) dv`.
    ///
    /// `breakpoints` are extra panel edges in the original variable `w`;
    /// the panels are also graded geometrically toward `w = 0`.
    pub fn singular_at_zero(
        &self,
        len: f64,
        alpha: f64,
        breakpoints: &[f64],
        f: impl FnMut(f64) -> f64,
    ) -> f64 {
        if len <= 0.0 {
            return 0.0;
        }
        let mut edges: Vec<f64> = breakpoints.to_vec();
        edges.extend(geometric_toward_zero(len, GRADING_LEVELS));
        self.substituted(alpha, &normalize_breakpoints(edges, 0.0, len), f)
    }

    /// `∫_0^{len} w^{α−1} f(w) dw` over the panels `edges` (given in `w`,
    /// starting at 0), integrated in `v = w^α` so the panels carry no
    /// endpoint singularity.
    pub fn substituted(&self, alpha: f64, edges: &[f64], mut f: impl FnMut(f64) -> f64) -> f64 {
        let inv = 1.0 / alpha;
        let v_edges: Vec<f64> = edges.iter().map(|w| w.powf(alpha)).collect();
        if alpha == 1.0 {
            return self.composite(&v_edges, f);
        }
        self.composite(&v_edges, |v| f(v.powf(inv))) * inv
    }
}

/// Number of halvings used when grading panels toward a singular endpoint.
pub(crate) const GRADING_LEVELS: usize = 40;

/// `P_n(z)` and `P_n'(z)` by the three-term recurrence.
fn legendre_with_derivative(order: usize, z: f64) -> (f64, f64) {
    let mut p1 = 1.0;
    let mut p2 = 0.0;
    for j in 0..order {
        let p3 = p2;
        p2 = p1;
        p1 = ((2 * j + 1) as f64 * z * p2 - j as f64 * p3) / (j + 1) as f64;
    }
    let dp = order as f64 * (z * p1 - p2) / (z * z - 1.0);
    (p1, dp)
}

/// Gauss–Hermite rule for the standard normal law: nodes `x_i` and weights
/// `w_i ≥ 0` with `Σ w_i f(x_i) ≈ E f(Z)`, `Z ~ N(0, 1)`.
pub fn gauss_hermite_normal(order: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(order >= 1, "Gauss–Hermite order must be positive");
    // Physicists' rule (weight e^{−x²}) by Newton iteration on orthonormal
    // Hermite functions, then rescaled to the weight e^{−x²/2}/√(2π).
    const PI_M4: f64 = 0.751_125_544_464_942_5;
    let n = order;
    let nf = n as f64;
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let mut z = 0.0;
    for i in 0..n.div_ceil(2) {
        z = match i {
            0 => (2.0 * nf + 1.0).sqrt() - 1.855_75 * (2.0 * nf + 1.0).powf(-1.0 / 6.0),
            1 => z - 1.14 * nf.powf(0.426) / z,
            2 => 1.86 * z - 0.86 * x[0],
            3 => 1.91 * z - 0.91 * x[1],
            _ => 2.0 * z - x[i - 2],
        };
        let mut pp = 0.0;
        for _ in 0..200 {
            let mut p1 = PI_M4;
            let mut p2 = 0.0;
            for j in 0..n {
                let p3 = p2;
                p2 = p1;
                let jf = j as f64;
                p1 = z * (2.0 / (jf + 1.0)).sqrt() * p2 - (jf / (jf + 1.0)).sqrt() * p3;
            }
            pp = (2.0 * nf).sqrt() * p2;
            let z1 = z;
            z = z1 - p1 / pp;
            if (z - z1).abs() <= 1e-15 * z.abs().max(1.0) {
                break;
            }
        }
        x[i] = z;
        x[n - 1 - i] = -z;
        w[i] = 2.0 / (pp * pp);
        w[n - 1 - i] = w[i];
    }
    if n % 2 == 1 {
        x[n / 2] = 0.0;
    }
    let nodes: Vec<f64> = x.iter().rev().map(|v| v * std::f64::consts::SQRT_2).collect();
    let total: f64 = w.iter().sum();
    let weights = w.iter().rev().map(|v| v / total).collect();
    (nodes, weights)
}

/// Composite Simpson weights for `nodes` equally spaced points on `[a, b]`.
/// `nodes` must be odd and at least 3.
pub fn simpson_weights(a: f64, b: f64, nodes: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(nodes >= 3 && nodes % 2 == 1, "Simpson needs an odd node count >= 3");
    let h = (b - a) / (nodes - 1) as f64;
    let x = (0..nodes)
        .map(|i| {
            if i == nodes - 1 {
                b
            } else {
                a + i as f64 * h
            }
        })
        .collect();
    let w = (0..nodes)
        .map(|i| {
            let c = if i == 0 || i == nodes - 1 {
                1.0
            } else if i % 2 == 1 {
                4.0
            } else {
                2.0
            };
            c * h / 3.0
        })
        .collect();
    (x, w)
}

/// `top · 2^{−k}` for `k = 1..=levels`.
pub fn geometric_toward_zero(top: f64, levels: usize) -> impl Iterator<Item = f64> {
    (1..=levels).map(move |k| top * 0.5f64.powi(k as i32))
}

/// Sorts, clips to `[lo, hi]`, adds both ends and drops near-duplicates.
pub fn normalize_breakpoints(mut points: Vec<f64>, lo: f64, hi: f64) -> Vec<f64> {
    points.retain(|p| p.is_finite() && *p > lo && *p < hi);
    points.push(lo);
    points.push(hi);
    points.sort_by(f64::total_cmp);
    let tol = 1e-14 * (hi - lo).abs().max(hi.abs());
    let mut out: Vec<f64> = Vec::with_capacity(points.len());
    for p in points {
        match out.last() {
            Some(&last) if p - last <= tol => {}
            _ => out.push(p),
        }
    }
    if let Some(last) = out.last_mut() {
        *last = hi;
    }
    out
}
