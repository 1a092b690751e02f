//! Closed-form moments of the estimation errors, used as Monte Carlo oracles.
//!
//! * [`rqv`]: mean and variance of the realized-QV error `e¹`.
//! * [`spectral`]: mean of the randomized-periodogram error `e²` and the
//!   second moments of its four double-integral components `J₁ … J₄`.
//!
//! Singular integrals are evaluated by Gauss–Legendre panels after a power
//! substitution and checked by doubling the per-panel order; the
//! [`CheckedValue`] returned by the `*_checked` functions carries that audit.

mod rqv;
mod spectral;

use std::fmt::Write as _;

use crate::experiments::format_float;

pub use rqv::{
    rqv_bias, rqv_bias_equidistant, rqv_variance, rqv_variance_adjusted, rqv_variance_equidistant,
    rqv_variance_equidistant_adjusted,
};
pub use spectral::{
    j1_gaussian_closed_form, j1_variance, j1_variance_checked, j2_j3_j4_variances, j2_variance,
    j2_variance_checked, j3_variance, j3_variance_checked, j4_at_zero_bandwidth, j4_variance,
    j4_variance_checked, randomized_bias, randomized_bias_checked, randomized_bias_discrete,
    J4_DEFAULT_ORDER,
};

/// A quadrature value together with its node-doubling audit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CheckedValue {
    /// The value at the doubled order.
    pub value: f64,
    /// `|coarse − fine| / |fine|`.
    pub self_check: f64,
}

impl CheckedValue {
    pub(crate) fn require(self, tolerance: f64, what: &str) -> crate::Result<f64> {
        if self.self_check <= tolerance && self.value.is_finite() {
            Ok(self.value)
        } else {
            Err(crate::Error::Numerical(format!(
                "{what}: node doubling changed the value by {:e} (relative), tolerance {tolerance:e}",
                self.self_check
            )))
        }
    }
}

/// A Monte Carlo estimate set against its closed form.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentReport {
    pub estimator: String,
    pub horizon: f64,
    /// Grid size for realized-QV rows, bandwidth `L` for spectral rows.
    pub n_or_l: f64,
    pub hurst: Option<f64>,
    pub xi_family: Option<String>,
    pub closed_form: f64,
    pub mc_estimate: f64,
    pub mc_std_error: f64,
    pub z_score: f64,
}

impl MomentReport {
    pub const CSV_HEADER: &'static str = "estimator,T,n_or_L,H,xi_family,closed_form,mc_estimate,mc_se,z";

    #[allow(clippy::too_many_arguments)]
    pub fn new(
        estimator: impl Into<String>,
        horizon: f64,
        n_or_l: f64,
        hurst: Option<f64>,
        xi_family: Option<String>,
        closed_form: f64,
        mc_estimate: f64,
        mc_std_error: f64,
    ) -> Self {
        let z_score = if mc_std_error > 0.0 {
            (mc_estimate - closed_form) / mc_std_error
        } else {
            f64::NAN
        };
        Self {
            estimator: estimator.into(),
            horizon,
            n_or_l,
            hurst,
            xi_family,
            closed_form,
            mc_estimate,
            mc_std_error,
            z_score,
        }
    }

    pub fn csv_row(&self) -> String {
        let mut row = String::new();
        let f = format_float;
        let hurst = self.hurst.map(f).unwrap_or_default();
        let xi = self.xi_family.as_deref().unwrap_or("");
        let _ = write!(
            row,
            "{},{},{},{},{},{},{},{},{}",
            self.estimator,
            f(self.horizon),
            f(self.n_or_l),
            hurst,
            xi,
            f(self.closed_form),
            f(self.mc_estimate),
            f(self.mc_std_error),
            f(self.z_score)
        );
        row
    }
}
