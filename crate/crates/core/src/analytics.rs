//! Closed-form priors, heralding rate and fidelity bounds, used as
//! independent cross-checks of the exact simulation. All functions take
//! `|eps|`; the phase of `eps` never enters.

use serde::{Deserialize, Serialize};

use crate::detection::check_eta;
use crate::error::Result;

fn x(eps_abs: f64) -> f64 {
    eps_abs * eps_abs
}

fn denom(eps_abs: f64) -> f64 {
    (1.0 + x(eps_abs)).powi(4)
}

/// Prior weight of the zeroth-order term (no photon towards the detectors).
pub fn p1(eps_abs: f64) -> f64 {
    1.0 / denom(eps_abs)
}

/// Prior weight of the first-order terms (one photon towards the detectors).
pub fn p2(eps_abs: f64) -> f64 {
    4.0 * x(eps_abs) / denom(eps_abs)
}

/// Combined prior weight of the second-order terms.
pub fn p3(eps_abs: f64) -> f64 {
    6.0 * x(eps_abs).powi(2) / denom(eps_abs)
}

/// Prior weight of every term excluded by the coincidence:
/// `(1 + 4|e|^2 + 5|e|^4) / (1 + |e|^2)^4`.
pub fn p_im(eps_abs: f64) -> f64 {
    let x = x(eps_abs);
    (1.0 + 4.0 * x + 5.0 * x * x) / denom(eps_abs)
}

/// Worst-case fidelity, assuming every term beyond second order heralds:
/// `|e|^4 / ((1 + |e|^2)^4 - (1 + 4|e|^2 + 5|e|^4)) = 1 / (1 + 4x + x^2)`.
pub fn fidelity_lower_bound_exact(eps_abs: f64) -> f64 {
    let x = x(eps_abs);
    1.0 / (1.0 + 4.0 * x + x * x)
}

/// Leading-order form of the worst-case bound, `1 - 4|e|^2`.
pub fn fidelity_lower_bound(eps_abs: f64) -> f64 {
    1.0 - 4.0 * x(eps_abs)
}

/// Worst-case fidelity with detector efficiency: the singlet heralds with
/// weight `eta^2 |e|^4`, every higher-order term is assumed to herald with
/// certainty, giving `1 / (1 + (4x + x^2) / eta^2)`.
pub fn fidelity_lower_bound_eta_exact(eps_abs: f64, eta: f64) -> Result<f64> {
    check_eta(eta)?;
    let x = x(eps_abs);
    Ok(1.0 / (1.0 + (4.0 * x + x * x) / (eta * eta)))
}

/// `1 - 4|e|^2 / eta^2`; may be negative for small `eta`.
pub fn fidelity_lower_bound_eta(eps_abs: f64, eta: f64) -> Result<f64> {
    check_eta(eta)?;
    Ok(1.0 - 4.0 * x(eps_abs) / (eta * eta))
}

/// Leading-order heralding probability `eta^2 |e|^4`.
pub fn approx_coincidence(eps_abs: f64, eta: f64) -> Result<f64> {
    check_eta(eta)?;
    Ok(eta * eta * x(eps_abs).powi(2))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalyticReport {
    pub p1: f64,
    pub p2: f64,
    pub p3: f64,
    pub p_im: f64,
    /// `1 - 4|e|^2`, clamped to `[0, 1]`.
    pub fidelity_lower_bound: f64,
    pub fidelity_lower_bound_raw: f64,
    pub fidelity_lower_bound_exact: f64,
    /// `1 - 4|e|^2 / eta^2`, clamped to `[0, 1]`.
    pub fidelity_lower_bound_eta: f64,
    pub fidelity_lower_bound_eta_raw: f64,
    pub fidelity_lower_bound_eta_exact: f64,
    pub approx_coincidence: f64,
}

impl AnalyticReport {
    pub fn new(eps_abs: f64, eta: f64) -> Result<Self> {
        let raw = fidelity_lower_bound(eps_abs);
        let raw_eta = fidelity_lower_bound_eta(eps_abs, eta)?;
        Ok(AnalyticReport {
            p1: p1(eps_abs),
            p2: p2(eps_abs),
            p3: p3(eps_abs),
            p_im: p_im(eps_abs),
            fidelity_lower_bound: raw.clamp(0.0, 1.0),
            fidelity_lower_bound_raw: raw,
            fidelity_lower_bound_exact: fidelity_lower_bound_exact(eps_abs),
            fidelity_lower_bound_eta: raw_eta.clamp(0.0, 1.0),
            fidelity_lower_bound_eta_raw: raw_eta,
            fidelity_lower_bound_eta_exact: fidelity_lower_bound_eta_exact(eps_abs, eta)?,
            approx_coincidence: approx_coincidence(eps_abs, eta)?,
        })
    }
}
