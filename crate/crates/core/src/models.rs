//! Catalog of Levy model families: cumulant functions, exponential-moment
//! strips, martingale drift adjustment and path-property metadata.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::hash::{Hash, Hasher};

use crate::error::{EngineError, Result};
use crate::special::{gamma_real, log_bessel_k_nu, log_cos};

type C = Complex64;

/// Relative safety margin keeping working arguments strictly inside the
/// open exponential-moment strip.
pub const EPS_STRIP: f64 = 0.02;
/// Strip cap used for the Brownian family, which has all exponential moments.
pub const BROWNIAN_STRIP_CAP: f64 = 8.0;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Family {
    Brownian,
    Gh { lambda: f64, alpha: f64, beta: f64, delta: f64 },
    Nig { alpha: f64, beta: f64, delta: f64 },
    Vg { c: f64, g: f64, m: f64 },
    Cgmy { c: f64, g: f64, m: f64, y: f64 },
    Meixner { alpha: f64, beta: f64, delta: f64 },
}

/// A Levy model: family-specific jump structure plus free drift and
/// (Brownian only) diffusion coefficient, both per unit time.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LevyModel {
    pub family: Family,
    pub drift_b: f64,
    pub diffusion_c: f64,
}

/// Exponential-moment strip of the model with a safety margin applied.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MomentStrip {
    pub u_min: f64,
    pub u_max: f64,
    pub m_safe: f64,
}

/// Path-regularity flags controlling validity of discontinuous-payoff
/// pricing formulas.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct PathFlags {
    pub infinite_variation: bool,
    pub infinite_activity: bool,
    pub regular_upwards: bool,
    pub atomless_law: bool,
    pub atomless_sup: bool,
}

impl LevyModel {
    pub fn new(family: Family, drift_b: f64, diffusion_c: f64) -> Result<LevyModel> {
        let model = LevyModel { family, drift_b, diffusion_c };
        model.validate()?;
        Ok(model)
    }

    pub fn validate(&self) -> Result<()> {
        if self.diffusion_c < 0.0 || !self.diffusion_c.is_finite() || !self.drift_b.is_finite() {
            return Err(EngineError::ParameterDomain(
                "drift must be finite and diffusion nonnegative".into(),
            ));
        }
        match self.family {
            Family::Brownian => {
                if self.diffusion_c <= 0.0 && self.drift_b == 0.0 {
                    return Err(EngineError::ParameterDomain(
                        "Brownian model requires c>0 or b!=0".into(),
                    ));
                }
            }
            Family::Gh { alpha, beta, delta, .. } => {
                if !(alpha > beta.abs() && delta > 0.0) {
                    return Err(EngineError::ParameterDomain(
                        "GH requires alpha>|beta| and delta>0".into(),
                    ));
                }
            }
            Family::Nig { alpha, beta, delta } => {
                if !(alpha > beta.abs() && delta > 0.0) {
                    return Err(EngineError::ParameterDomain(
                        "NIG requires alpha>|beta| and delta>0".into(),
                    ));
                }
            }
            Family::Vg { c, g, m } => {
                if !(c > 0.0 && g > 0.0 && m > 0.0) {
                    return Err(EngineError::ParameterDomain("VG requires C,G,M>0".into()));
                }
            }
            Family::Cgmy { c, g, m, y } => {
                if !(c > 0.0 && g > 0.0 && m > 0.0 && y < 2.0) {
                    return Err(EngineError::ParameterDomain(
                        "CGMY requires C,G,M>0 and Y<2".into(),
                    ));
                }
                if y == 0.0 || y == 1.0 {
                    return Err(EngineError::ParameterDomain(
                        "CGMY with Y=0 is the VG family and Y=1 is outside the closed-form \
                         parameterization"
                            .into(),
                    ));
                }
            }
            Family::Meixner { alpha, beta, delta } => {
                if !(alpha > 0.0 && beta > -std::f64::consts::PI && beta < std::f64::consts::PI && delta > 0.0)
                {
                    return Err(EngineError::ParameterDomain(
                        "Meixner requires alpha>0, -pi<beta<pi, delta>0".into(),
                    ));
                }
            }
        }
        Ok(())
    }

    /// Maximal exponential-moment strip intersected with the safety margin.
    pub fn moment_strip(&self) -> Result<MomentStrip> {
        self.validate()?;
        let (u_min, u_max) = match self.family {
            Family::Brownian => (f64::NEG_INFINITY, f64::INFINITY),
            Family::Gh { alpha, beta, .. } | Family::Nig { alpha, beta, .. } => {
                (-alpha - beta, alpha - beta)
            }
            Family::Vg { g, m, .. } | Family::Cgmy { g, m, .. } => (-g, m),
            Family::Meixner { alpha, beta, .. } => {
                let pi = std::f64::consts::PI;
                (-(pi + beta) / alpha, (pi - beta) / alpha)
            }
        };
        let m_safe = if u_min.is_infinite() {
            BROWNIAN_STRIP_CAP
        } else {
            (-u_min).min(u_max) * (1.0 - EPS_STRIP)
        };
        Ok(MomentStrip { u_min, u_max, m_safe })
    }

    /// Cumulant generating function kappa(u); exp(t*kappa(u)) = E[e^{u L_t}]
    /// for Re(u) inside the moment strip.
    pub fn cumulant(&self, u: C) -> Result<C> {
        let strip = self.moment_strip()?;
        if !(u.re >= strip.u_min && u.re <= strip.u_max) {
            return Err(EngineError::StripViolation(format!(
                "Re(u)={} outside strip [{}, {}]",
                u.re, strip.u_min, strip.u_max
            )));
        }
        Ok(self.cumulant_unchecked(u))
    }

    /// As `cumulant` but without the strip check; hot path for quadrature
    /// engines that validate their contours up front.
    pub fn cumulant_unchecked(&self, u: C) -> C {
        let drift = u * self.drift_b + u * u * (0.5 * self.diffusion_c);
        drift + self.jump_cumulant(u)
    }

    fn jump_cumulant(&self, u: C) -> C {
        match self.family {
            Family::Brownian => C::new(0.0, 0.0),
            Family::Nig { alpha, beta, delta } => {
                let gamma = (alpha * alpha - beta * beta).sqrt();
                delta * (gamma - half_plane_sqrt(alpha, beta, u))
            }
            Family::Gh { lambda, alpha, beta, delta } => {
                let gamma = (alpha * alpha - beta * beta).sqrt();
                let s = half_plane_sqrt(alpha, beta, u);
                let log_ratio = C::new((alpha * alpha - beta * beta).ln(), 0.0)
                    - ((C::new(alpha - beta, 0.0) - u).ln() + (C::new(alpha + beta, 0.0) + u).ln());
                (0.5 * lambda) * log_ratio + log_bessel_k_nu(lambda, delta * s)
                    - log_bessel_k_nu(lambda, C::new(delta * gamma, 0.0))
            }
            Family::Vg { c, g, m } => {
                let one = C::new(1.0, 0.0);
                -c * ((one - u / m).ln() + (one + u / g).ln())
            }
            Family::Cgmy { c, g, m, y } => {
                let gm = C::new(m, 0.0) - u;
                let gg = C::new(g, 0.0) + u;
                c * gamma_real(-y)
                    * (gm.powf(y) + gg.powf(y) - C::new(m.powf(y) + g.powf(y), 0.0))
            }
            Family::Meixner { alpha, beta, delta } => {
                let arg = (alpha * u + beta) / 2.0;
                2.0 * delta * (C::new((0.5 * beta).cos().ln(), 0.0) - log_cos(arg))
            }
        }
    }

    /// Extended characteristic function E[e^{i z L_t}] = exp(t*kappa(iz)),
    /// valid for Im(z) in [-u_max, -u_min].
    pub fn char_function(&self, t: f64, z: C) -> Result<C> {
        if t < 0.0 {
            return Err(EngineError::ParameterDomain("t must be nonnegative".into()));
        }
        let iz = C::new(0.0, 1.0) * z;
        Ok((self.cumulant(iz)? * t).exp())
    }

    /// Replace the drift so that kappa(1)=0, making e^L a martingale.
    pub fn martingale_adjust(&self) -> Result<LevyModel> {
        let strip = self.moment_strip()?;
        if strip.u_max <= 1.0 {
            return Err(EngineError::StripViolation(format!(
                "martingale adjustment needs the exponential moment of order 1; strip upper \
                 endpoint is {}",
                strip.u_max
            )));
        }
        let kappa_one = self.cumulant(C::new(1.0, 0.0))?.re;
        Ok(LevyModel {
            family: self.family.clone(),
            drift_b: self.drift_b - kappa_one,
            diffusion_c: self.diffusion_c,
        })
    }

    /// Path-property flags per family; pure function of the parameters.
    pub fn path_properties(&self) -> PathFlags {
        let (infinite_variation, infinite_activity, regular_upwards) = match self.family {
            Family::Brownian => (true, false, true),
            Family::Gh { .. } | Family::Nig { .. } | Family::Meixner { .. } => (true, true, true),
            Family::Vg { .. } => (false, true, true),
            Family::Cgmy { y, .. } => {
                if y >= 1.0 {
                    (true, true, true)
                } else if y > 0.0 {
                    (false, true, true)
                } else {
                    // Compound Poisson type.
                    (false, false, false)
                }
            }
        };
        let atomless_law = infinite_variation || infinite_activity;
        let atomless_sup = infinite_variation || (infinite_activity && regular_upwards);
        PathFlags {
            infinite_variation,
            infinite_activity,
            regular_upwards,
            atomless_law,
            atomless_sup,
        }
    }

    /// The dual process -L: mirrored jump measure and negated drift.
    pub fn dual(&self) -> LevyModel {
        let family = match self.family {
            Family::Brownian => Family::Brownian,
            Family::Gh { lambda, alpha, beta, delta } => {
                Family::Gh { lambda, alpha, beta: -beta, delta }
            }
            Family::Nig { alpha, beta, delta } => Family::Nig { alpha, beta: -beta, delta },
            Family::Vg { c, g, m } => Family::Vg { c, g: m, m: g },
            Family::Cgmy { c, g, m, y } => Family::Cgmy { c, g: m, m: g, y },
            Family::Meixner { alpha, beta, delta } => Family::Meixner { alpha, beta: -beta, delta },
        };
        LevyModel { family, drift_b: -self.drift_b, diffusion_c: self.diffusion_c }
    }

    /// Stable hash over the exact parameter bits, used as a cache key.
    pub fn key(&self) -> u64 {
        let mut h = std::collections::hash_map::DefaultHasher::new();
        match self.family {
            Family::Brownian => 0u8.hash(&mut h),
            Family::Gh { lambda, alpha, beta, delta } => {
                1u8.hash(&mut h);
                for v in [lambda, alpha, beta, delta] {
                    v.to_bits().hash(&mut h);
                }
            }
            Family::Nig { alpha, beta, delta } => {
                2u8.hash(&mut h);
                for v in [alpha, beta, delta] {
                    v.to_bits().hash(&mut h);
                }
            }
            Family::Vg { c, g, m } => {
                3u8.hash(&mut h);
                for v in [c, g, m] {
                    v.to_bits().hash(&mut h);
                }
            }
            Family::Cgmy { c, g, m, y } => {
                4u8.hash(&mut h);
                for v in [c, g, m, y] {
                    v.to_bits().hash(&mut h);
                }
            }
            Family::Meixner { alpha, beta, delta } => {
                5u8.hash(&mut h);
                for v in [alpha, beta, delta] {
                    v.to_bits().hash(&mut h);
                }
            }
        }
        self.drift_b.to_bits().hash(&mut h);
        self.diffusion_c.to_bits().hash(&mut h);
        h.finish()
    }
}

/// sqrt(alpha^2 - (beta+u)^2) as a product of square roots of the two
/// right-half-plane factors, so the result stays continuous (Re > 0) across
/// the whole strip.
fn half_plane_sqrt(alpha: f64, beta: f64, u: C) -> C {
    ((C::new(alpha - beta, 0.0) - u).sqrt()) * ((C::new(alpha + beta, 0.0) + u).sqrt())
}
