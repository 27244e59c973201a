//! Ladder-exponent ratios and Wiener-Hopf factors of the running extrema,
//! sampled at an exponential time with (complex) rate q.

use num_complex::Complex64;

use crate::analysis::min_abscissa;
use crate::error::{EngineError, Result};
use crate::models::LevyModel;
use crate::transition::{GridConfig, HalfLineEngine};

type C = Complex64;

const I: C = C::new(0.0, 1.0);

/// Which ladder process: ascending tracks the supremum, descending the
/// infimum (computed on the dual model throughout).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Ascending,
    Descending,
}

#[derive(Clone, Copy, Debug)]
pub struct LadderQuery {
    pub q: C,
    pub beta: C,
    pub side: Side,
}

#[derive(Clone, Copy, Debug)]
pub struct LadderValue {
    /// kappa(q,0)/kappa(q,beta) = E[e^{-beta * extremum}] at the Exp(q) time.
    pub ratio: C,
    /// log kappa(q,beta) - log kappa(q,0); ratio = exp(-log_kappa_rel).
    pub log_kappa_rel: C,
    pub error_est: f64,
}

/// Construction parameters for a ladder engine.
#[derive(Clone, Copy, Debug)]
pub struct WhConfig {
    /// Smallest Re(beta) that will be queried (>= -m_safe).
    pub re_beta_min: f64,
    /// Largest |Im(beta)| that will be queried.
    pub im_beta_max: f64,
    /// Smallest Re(q) that will be queried; sets the time-quadrature cap.
    pub q_re_min: f64,
    /// Grid refinement factor >= 1.
    pub refine: f64,
}

/// Default abscissa: alpha*(M) plus max(1, alpha*(M)/4), kept low so the
/// e^{q t} factor of downstream inversions stays well-conditioned.
pub fn default_q_re(model: &LevyModel, m: f64) -> Result<f64> {
    let a = min_abscissa(model, m)?;
    Ok(a + (0.25 * a).max(1.0))
}

pub struct WhEngine {
    model: LevyModel,
    asc: HalfLineEngine,
    desc: HalfLineEngine,
    ts: Vec<f64>,
    /// Trapezoid weights in log time; the 1/t of the Frullani integrand is
    /// absorbed by the substitution u = ln t.
    wts: Vec<f64>,
    asc_rows: std::sync::OnceLock<Vec<Vec<C>>>,
    desc_rows: std::sync::OnceLock<Vec<Vec<C>>>,
    q_re_min: f64,
}

const T_MIN: f64 = 1e-12;

impl WhEngine {
    pub fn new(model: &LevyModel, cfg: &WhConfig) -> Result<WhEngine> {
        let strip = model.moment_strip()?;
        if cfg.re_beta_min <= -strip.m_safe {
            return Err(EngineError::StripViolation(format!(
                "Re(beta) floor {} at or below -{}",
                cfg.re_beta_min, strip.m_safe
            )));
        }
        // Validate the abscissa against the growth exponent at the moment
        // order actually exercised by the beta range.
        let m_eff = (-cfg.re_beta_min).max(0.05 * strip.m_safe).min(strip.m_safe);
        let a_star = min_abscissa(model, m_eff)?.max(min_abscissa(&model.dual(), m_eff)?);
        if cfg.q_re_min <= a_star {
            return Err(EngineError::AbscissaViolation(format!(
                "Re(q) >= {} required (alpha* = {a_star})",
                a_star
            )));
        }
        let t_cap = (45.0 / (cfg.q_re_min - a_star)).clamp(5.0, 60.0);

        let u_lo = T_MIN.ln();
        let u_hi = t_cap.ln();
        let h_target = std::f64::consts::LN_10 / (9.0 * cfg.refine.max(1.0));
        let mut n = ((u_hi - u_lo) / h_target).ceil() as usize + 1;
        if n % 2 == 0 {
            n += 1;
        }
        let h = (u_hi - u_lo) / (n - 1) as f64;
        let ts: Vec<f64> = (0..n).map(|j| (u_lo + h * j as f64).exp()).collect();
        let wts: Vec<f64> =
            (0..n).map(|j| if j == 0 || j == n - 1 { 0.5 * h } else { h }).collect();

        // Keep kappa(-c) strictly below every admissible Re(q) so the
        // resolvent logarithms stay on the principal branch.
        let kappa_cap = a_star + 0.5 * (cfg.q_re_min - a_star);
        let asc = HalfLineEngine::new(
            model,
            cfg.re_beta_min,
            cfg.im_beta_max,
            T_MIN,
            t_cap,
            cfg.refine,
            kappa_cap,
        )?;
        let desc = HalfLineEngine::new(
            &model.dual(),
            cfg.re_beta_min,
            cfg.im_beta_max,
            T_MIN,
            t_cap,
            cfg.refine,
            kappa_cap,
        )?;
        Ok(WhEngine {
            model: model.clone(),
            asc,
            desc,
            ts,
            wts,
            asc_rows: std::sync::OnceLock::new(),
            desc_rows: std::sync::OnceLock::new(),
            q_re_min: cfg.q_re_min,
        })
    }

    pub fn model(&self) -> &LevyModel {
        &self.model
    }

    pub fn times(&self) -> &[f64] {
        &self.ts
    }

    pub fn time_weights(&self) -> &[f64] {
        &self.wts
    }

    /// g(t_j, beta) = E[(1 - e^{-beta extremum-increment}) ...] table over
    /// the time nodes; q-independent, shared across a whole q-contour.
    pub fn g_table(&self, beta: C, side: Side) -> Vec<C> {
        let (eng, rows) = match side {
            Side::Ascending => (&self.asc, &self.asc_rows),
            Side::Descending => (&self.desc, &self.desc_rows),
        };
        let rows = rows.get_or_init(|| eng.phi_rows(&self.ts));
        rows.iter().map(|row| eng.g_from_row(row, beta)).collect()
    }

    fn check_q(&self, q: C) -> Result<()> {
        if q.re < self.q_re_min * (1.0 - 1e-12) {
            return Err(EngineError::AbscissaViolation(format!(
                "Re(q)={} below the engine's configured floor {}",
                q.re, self.q_re_min
            )));
        }
        Ok(())
    }

    /// Contract a precomputed g table against the time quadrature at rate q.
    pub fn log_kappa_from_table(&self, q: C, table: &[C]) -> (C, f64) {
        let mut full = C::new(0.0, 0.0);
        for j in 0..self.ts.len() {
            full += self.wts[j] * (-q * self.ts[j]).exp() * table[j];
        }
        // Nested half-resolution rule for the error estimate.
        let mut coarse = C::new(0.0, 0.0);
        for j in (0..self.ts.len()).step_by(2) {
            let w = if j == 0 || j == self.ts.len() - 1 { 1.0 } else { 2.0 };
            coarse += w * self.wts[j] * (-q * self.ts[j]).exp() * table[j];
        }
        (full, (full - coarse).norm() / 3.0)
    }

    pub fn side_engine(&self, side: Side) -> &HalfLineEngine {
        match side {
            Side::Ascending => &self.asc,
            Side::Descending => &self.desc,
        }
    }

    /// log of the ladder ratio via the resolvent integral; accurate
    /// uniformly in Im(q), unlike the time-quadrature route which aliases
    /// once |Im(q)| exceeds a few units.
    pub fn log_kappa_direct(&self, q: C, beta: C, side: Side) -> Result<C> {
        self.check_q(q)?;
        Ok(self.side_engine(side).log_ratio_direct(q, beta))
    }

    pub fn ladder_ratio(&self, query: &LadderQuery) -> Result<LadderValue> {
        self.check_q(query.q)?;
        let table = self.g_table(query.beta, query.side);
        let (lkr, err) = self.log_kappa_from_table(query.q, &table);
        Ok(LadderValue { ratio: (-lkr).exp(), log_kappa_rel: lkr, error_est: err })
    }

    /// Wiener-Hopf factor: ascending phi+_q(z) = E[e^{iz sup}] with
    /// beta = -iz; descending with beta = iz.
    pub fn wh_factor(&self, q: C, z: C, side: Side) -> Result<C> {
        let beta = match side {
            Side::Ascending => -I * z,
            Side::Descending => I * z,
        };
        Ok(self.ladder_ratio(&LadderQuery { q, beta, side })?.ratio)
    }

    /// max over the grid of |phi+ * phi- - q/(q - kappa(iz))|.
    pub fn wh_identity_residual(&self, q: f64, z_grid: &[f64]) -> Result<f64> {
        let qq = C::new(q, 0.0);
        let mut worst = 0.0f64;
        for &z in z_grid {
            let zp = self.wh_factor(qq, C::new(z, 0.0), Side::Ascending)?;
            let zm = self.wh_factor(qq, C::new(z, 0.0), Side::Descending)?;
            let k = self.model.cumulant(I * z)?;
            let rhs = qq / (qq - k);
            worst = worst.max((zp * zm - rhs).norm());
        }
        Ok(worst)
    }
}

/// One-shot ladder ratio; prefer `WhEngine` for repeated queries.
pub fn ladder_ratio(model: &LevyModel, query: &LadderQuery, cfg: &GridConfig) -> Result<LadderValue> {
    let refine = ((cfg.n_freq as f64 / 4096.0).sqrt()).max(1.0);
    let wh = WhEngine::new(
        model,
        &WhConfig {
            re_beta_min: query.beta.re.min(0.0),
            im_beta_max: query.beta.im.abs().max(25.0),
            q_re_min: query.q.re,
            refine,
        },
    )?;
    wh.ladder_ratio(query)
}
