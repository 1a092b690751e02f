//! Laws of the symmetric randomizing variable `ξ`.

use std::fmt;
use std::str::FromStr;

use statrs::distribution::{ContinuousCDF, Normal};

use crate::{Error, Result};

/// Symmetric laws with a density, a real characteristic function and a
/// finite second moment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RandomizerFamily {
    /// `N(0, σ²)`, `φ(u) = exp(−σ²u²/2)`.
    Gaussian { sigma: f64 },
    /// Uniform on `[−a, a]`, `φ(u) = sin(au)/(au)`.
    Uniform { half_width: f64 },
    /// Laplace with scale `β`, `φ(u) = 1/(1 + β²u²)`.
    TwoSidedExponential { scale: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RandomizerSpec {
    family: RandomizerFamily,
}

impl RandomizerSpec {
    pub fn new(family: RandomizerFamily) -> Result<Self> {
        let p = match family {
            RandomizerFamily::Gaussian { sigma } => sigma,
            RandomizerFamily::Uniform { half_width } => half_width,
            RandomizerFamily::TwoSidedExponential { scale } => scale,
        };
        if !(p > 0.0 && p.is_finite()) {
            return Err(Error::invalid(format!(
                "randomizer parameter must be positive and finite, got {p}"
            )));
        }
        Ok(Self { family })
    }

    pub fn gaussian(sigma: f64) -> Result<Self> {
        Self::new(RandomizerFamily::Gaussian { sigma })
    }

    pub fn uniform(half_width: f64) -> Result<Self> {
        Self::new(RandomizerFamily::Uniform { half_width })
    }

    pub fn laplace(scale: f64) -> Result<Self> {
        Self::new(RandomizerFamily::TwoSidedExponential { scale })
    }

    pub fn family(&self) -> RandomizerFamily {
        self.family
    }

    /// Family keyword as used on the command line.
    pub fn family_name(&self) -> &'static str {
        match self.family {
            RandomizerFamily::Gaussian { .. } => "gaussian",
            RandomizerFamily::Uniform { .. } => "uniform",
            RandomizerFamily::TwoSidedExponential { .. } => "laplace",
        }
    }

    /// The family's single scale parameter (`σ`, `a` or `β`).
    pub fn scale(&self) -> f64 {
        match self.family {
            RandomizerFamily::Gaussian { sigma } => sigma,
            RandomizerFamily::Uniform { half_width } => half_width,
            RandomizerFamily::TwoSidedExponential { scale } => scale,
        }
    }

    pub fn density(&self, x: f64) -> f64 {
        match self.family {
            RandomizerFamily::Gaussian { sigma } => {
                let z = x / sigma;
                (-0.5 * z * z).exp() / (sigma * (2.0 * std::f64::consts::PI).sqrt())
            }
            RandomizerFamily::Uniform { half_width } => {
                if x.abs() <= half_width {
                    0.5 / half_width
                } else {
                    0.0
                }
            }
            RandomizerFamily::TwoSidedExponential { scale } => {
                (-x.abs() / scale).exp() / (2.0 * scale)
            }
        }
    }

    /// `φ_ξ(u) = E cos(uξ)`.
    pub fn char_fn(&self, u: f64) -> f64 {
        match self.family {
            RandomizerFamily::Gaussian { sigma } => (-0.5 * sigma * sigma * u * u).exp(),
            RandomizerFamily::Uniform { half_width } => sinc(half_width * u),
            RandomizerFamily::TwoSidedExponential { scale } => 1.0 / (1.0 + scale * scale * u * u),
        }
    }

    pub fn second_moment(&self) -> f64 {
        match self.family {
            RandomizerFamily::Gaussian { sigma } => sigma * sigma,
            RandomizerFamily::Uniform { half_width } => half_width * half_width / 3.0,
            RandomizerFamily::TwoSidedExponential { scale } => 2.0 * scale * scale,
        }
    }

    /// `c` with `P(|ξ| > c) = tail_mass` (the support edge for the uniform law).
    pub fn tail_cutoff(&self, tail_mass: f64) -> f64 {
        match self.family {
            RandomizerFamily::Gaussian { sigma } => {
                let normal = Normal::new(0.0, 1.0).expect("standard normal");
                sigma * normal.inverse_cdf(1.0 - 0.5 * tail_mass)
            }
            RandomizerFamily::Uniform { half_width } => half_width,
            RandomizerFamily::TwoSidedExponential { scale } => scale * (1.0 / tail_mass).ln(),
        }
    }

    /// Whether the density has a kink at the origin (Laplace).
    pub(crate) fn kinked_at_origin(&self) -> bool {
        matches!(self.family, RandomizerFamily::TwoSidedExponential { .. })
    }

    /// Lag beyond which `|φ_ξ(L u)| < 1e-17`, when such a finite lag exists
    /// at a useful scale.
    pub fn negligible_beyond(&self, l: f64) -> Option<f64> {
        match self.family {
            RandomizerFamily::Gaussian { sigma } if l > 0.0 => {
                Some((2.0 * 1e17f64.ln()).sqrt() / (sigma * l))
            }
            _ => None,
        }
    }

    /// Panel edges in `[0, upper]` resolving `u ↦ φ_ξ(L u)`: geometric grading
    /// around the decay scale `1/(L·scale)` plus half-period panels for the
    /// oscillating uniform kernel.
    pub fn kernel_breakpoints(&self, l: f64, upper: f64) -> Vec<f64> {
        if l <= 0.0 || upper <= 0.0 {
            return Vec::new();
        }
        let decay = 1.0 / (l * self.scale());
        let mut points: Vec<f64> = (-8..=60)
            .map(|j| decay * 2f64.powi(j))
            .take_while(|&p| p < upper)
            .collect();
        if let Some(cut) = self.negligible_beyond(l) {
            points.retain(|&p| p < cut);
            if cut < upper {
                points.push(cut);
            }
        }
        if let RandomizerFamily::Uniform { half_width } = self.family {
            let half_period = std::f64::consts::PI / (half_width * l);
            let count = ((upper / half_period) as usize).min(20_000);
            points.extend((1..=count).map(|k| k as f64 * half_period));
        }
        points.retain(|&p| p > 0.0 && p < upper);
        points
    }
}

fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        let x2 = x * x;
        1.0 - x2 / 6.0 + x2 * x2 / 120.0
    } else {
        x.sin() / x
    }
}

impl fmt::Display for RandomizerSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.family_name(), self.scale())
    }
}

impl FromStr for RandomizerSpec {
    type Err = Error;

    /// `gaussian:σ`, `uniform:a` or `laplace:β`.
    fn from_str(s: &str) -> Result<Self> {
        let (name, param) = s
            .split_once(':')
            .ok_or_else(|| Error::invalid(format!("expected family:parameter, got `{s}`")))?;
        let p: f64 = param
            .trim()
            .parse()
            .map_err(|_| Error::invalid(format!("bad randomizer parameter `{param}`")))?;
        match name.trim().to_ascii_lowercase().as_str() {
            "gaussian" | "normal" => Self::gaussian(p),
            "uniform" => Self::uniform(p),
            "laplace" | "exponential" => Self::laplace(p),
            other => Err(Error::invalid(format!("unknown randomizer family `{other}`"))),
        }
    }
}
