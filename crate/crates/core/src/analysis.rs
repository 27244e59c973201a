//! Exponential-moment growth bounds for the running supremum and the
//! admissible Laplace abscissas derived from them.

use num_complex::Complex64;

use crate::error::{EngineError, Result};
use crate::models::LevyModel;

type C = Complex64;

/// Growth exponents of E[e^{±M L_t}] and the envelope they induce.
#[derive(Clone, Copy, Debug)]
pub struct MomentBounds {
    pub m: f64,
    pub alpha_bar: f64,
    pub alpha_under: f64,
    pub alpha_star: f64,
}

impl MomentBounds {
    /// Envelope constant C(t, M) = e^{t*alpha_bar} + e^{t*alpha_under}.
    pub fn bound_c(&self, t: f64) -> f64 {
        (t * self.alpha_bar).exp() + (t * self.alpha_under).exp()
    }
}

/// Triplet drift under full jump compensation, recovered as kappa'(0).
/// Fourth-order central difference; exact for Brownian.
pub fn compensated_drift(model: &LevyModel) -> f64 {
    let h = 1e-4 * model.moment_strip().map(|s| s.m_safe.min(1.0)).unwrap_or(1.0);
    let k = |x: f64| model.cumulant_unchecked(C::new(x, 0.0)).re;
    (8.0 * (k(h) - k(-h)) - (k(2.0 * h) - k(-2.0 * h))) / (12.0 * h)
}

/// Exponent bounds at order M: alpha_bar = M(|b|-b) + kappa(M) and
/// alpha_under = M(|b|+b) + kappa(-M), with b the compensated drift. Both
/// equal the absolute-moment integrals because e^y - 1 - y >= 0.
pub fn moment_bounds(model: &LevyModel, m: f64) -> Result<MomentBounds> {
    let strip = model.moment_strip()?;
    if !(m > 0.0 && m <= strip.m_safe) {
        return Err(EngineError::StripViolation(format!(
            "moment order M={m} outside (0, {}]",
            strip.m_safe
        )));
    }
    let b = compensated_drift(model);
    let kp = model.cumulant(C::new(m, 0.0))?.re;
    let km = model.cumulant(C::new(-m, 0.0))?.re;
    let alpha_bar = m * (b.abs() - b) + kp;
    let alpha_under = m * (b.abs() + b) + km;
    Ok(MomentBounds { m, alpha_bar, alpha_under, alpha_star: alpha_bar.max(alpha_under) })
}

/// Upper bound 8*C(t, M) on E[e^{M * sup_{s<=t} L_s}].
pub fn sup_moment_bound(model: &LevyModel, t: f64, m: f64) -> Result<f64> {
    if t < 0.0 {
        return Err(EngineError::ParameterDomain("t must be nonnegative".into()));
    }
    Ok(8.0 * moment_bounds(model, m)?.bound_c(t))
}

/// Minimal admissible Laplace abscissa alpha*(M); contours must sit
/// strictly above it.
pub fn min_abscissa(model: &LevyModel, m: f64) -> Result<f64> {
    Ok(moment_bounds(model, m)?.alpha_star)
}
