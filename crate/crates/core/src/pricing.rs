//! Damped-Fourier valuation of supremum/infimum payoffs: fixed-strike
//! lookbacks, one-touch and digital barriers, first-passage curves and
//! equity default swap premia.

use std::collections::HashMap;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{EngineError, Result};
use crate::inversion::{
    default_contour, engine_for, fitted_tail, invert_lkr_with, ContourConfig,
};
use crate::models::LevyModel;
use crate::quad::{gauss_legendre, geometric_edges};
use crate::transition::HalfLineEngine;
use crate::wienerhopf::Side;

type C = Complex64;

const I: C = C::new(0.0, 1.0);

#[derive(Clone, Debug)]
pub struct EdsSchedule {
    pub premium_dates: Vec<f64>,
    pub barrier_b: f64,
    pub recovery_c: f64,
    pub rate_r: f64,
}

impl EdsSchedule {
    pub fn validate(&self) -> Result<()> {
        if self.premium_dates.is_empty()
            || self.premium_dates[0] <= 0.0
            || self.premium_dates.windows(2).any(|w| w[1] <= w[0])
        {
            return Err(EngineError::ParameterDomain(
                "premium dates must be strictly ascending and positive".into(),
            ));
        }
        if !(self.barrier_b > 0.0) || self.recovery_c < 0.0 || self.rate_r < 0.0 {
            return Err(EngineError::ParameterDomain(
                "barrier must be positive, recovery and rate nonnegative".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub enum Product {
    LookbackCall { k: f64 },
    LookbackPut { k: f64 },
    OneTouchUp { b: f64 },
    DigitalDown { b: f64 },
    Eds { schedule: EdsSchedule },
}

#[derive(Clone, Debug)]
pub struct PricingRequest {
    pub model: LevyModel,
    pub s0: f64,
    pub t: f64,
    pub product: Product,
    /// Dampening parameter; None picks the midpoint default per product.
    pub r_damp: Option<f64>,
    pub contour: Option<ContourConfig>,
    pub discount_r: f64,
}

impl PricingRequest {
    fn validate(&self) -> Result<()> {
        if !(self.s0 > 0.0 && self.t > 0.0) || self.discount_r < 0.0 {
            return Err(EngineError::ParameterDomain(
                "S0 and T must be positive, discount rate nonnegative".into(),
            ));
        }
        match &self.product {
            Product::LookbackCall { k } | Product::LookbackPut { k } if !(*k > 0.0) => {
                Err(EngineError::ParameterDomain("strike must be positive".into()))
            }
            Product::OneTouchUp { b } | Product::DigitalDown { b } if !(*b > 0.0) => {
                Err(EngineError::ParameterDomain("barrier must be positive".into()))
            }
            Product::Eds { schedule } => schedule.validate(),
            _ => Ok(()),
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct Diagnostics {
    pub r: f64,
    pub y: f64,
    pub a_contour: f64,
    pub outer_u_max: f64,
    pub outer_nodes: usize,
    pub inner_rows: usize,
    pub cache_hits: usize,
    pub clamped: bool,
    pub boundary: bool,
    pub isotonic_clipped: bool,
}

#[derive(Clone, Debug)]
pub struct PriceResult {
    pub price: f64,
    pub numerical_error: f64,
    pub diagnostics: Diagnostics,
}

// ---------------------------------------------------------------------------
// Shared inner-contour machinery
// ---------------------------------------------------------------------------

/// Read-mostly cache of beta-independent resolvent rows keyed by Im(q); the
/// Bromwich node set is shared by every outer node and maturity, so each
/// row is computed once and contracted against many kernels.
struct RatioCache<'a> {
    eng: &'a HalfLineEngine,
    rows: Mutex<HashMap<u64, Arc<Vec<C>>>>,
    hits: AtomicUsize,
    cap: usize,
}

impl<'a> RatioCache<'a> {
    fn new(eng: &'a HalfLineEngine) -> RatioCache<'a> {
        // ~300 MB worth of rows at most.
        let cap = (300_000_000 / (32 * eng.resolvent_len().max(1))).max(64);
        RatioCache { eng, rows: Mutex::new(HashMap::new()), hits: AtomicUsize::new(0), cap }
    }

    fn lkr(&self, q: C, beta: C) -> C {
        // One row per |Im q|: the conjugate node reuses it via reflection.
        let v = q.im.abs();
        let key = v.to_bits();
        let cached = self.rows.lock().unwrap().get(&key).cloned();
        let row = match cached {
            Some(r) => {
                self.hits.fetch_add(1, Ordering::Relaxed);
                r
            }
            None => {
                let r = Arc::new(self.eng.resolvent_row(C::new(q.re, v)));
                let mut map = self.rows.lock().unwrap();
                if map.len() < self.cap {
                    map.insert(key, r.clone());
                }
                r
            }
        };
        if q.im >= 0.0 {
            self.eng.log_ratio_from_row(&row, beta)
        } else {
            self.eng.log_ratio_from_row_conj(&row, beta)
        }
    }
}

/// Inner contour defaults for pricing: moderate truncation (the fitted
/// tail correction covers the rest, and adaptive doubling guards it).
fn inner_contour(model: &LevyModel, r_abs: f64) -> Result<ContourConfig> {
    let base = default_contour(model, -r_abs)?;
    Ok(ContourConfig { a: 80.0, n_nodes: 256, tol: 1e-4, ..base })
}

/// One damped outer integral (1/pi) int_0^inf Re[g(u)] du with geometric
/// panels, truncation doubling, and a power-law tail correction; `phase` is
/// the signed rate of the explicit e^{i phase u} factor in g, `scale0` the
/// kernel's smoothness scale near u = 0. g returns (integrand, abs error).
fn outer_integral<F>(
    g: &F,
    phase: f64,
    scale0: f64,
    tol: f64,
) -> Result<(f64, f64, f64, usize)>
where
    F: Fn(f64) -> Result<(C, f64)> + Sync,
{
    let h_max = (6.0 / (phase.abs() + 0.5)).min(3.0);
    let h0 = (0.25 * scale0).min(h_max);
    let pts = 8;
    let (gx, gw) = gauss_legendre(pts);
    let mut acc = 0.0f64;
    let mut err_in = 0.0f64;
    let mut n_nodes = 0usize;
    let mut u_lo = 0.0f64;
    let mut u_hi = 60.0f64;
    let mut prev: Option<f64> = None;
    let mut value = 0.0f64;
    let mut change = f64::INFINITY;
    let mut tail = C::new(0.0, 0.0);
    for _stage in 0..=2 {
        let edges: Vec<f64> = if u_lo == 0.0 {
            geometric_edges(h0, h_max, u_hi, 1.4)
        } else {
            let n = ((u_hi - u_lo) / h_max).ceil() as usize;
            (0..=n).map(|k| u_lo + (u_hi - u_lo) * k as f64 / n as f64).collect()
        };
        let panels: Vec<Result<(f64, f64)>> = edges
            .par_windows(2)
            .map(|w| {
                let mid = 0.5 * (w[0] + w[1]);
                let half = 0.5 * (w[1] - w[0]);
                let mut p_acc = 0.0;
                let mut p_err = 0.0;
                for k in 0..pts {
                    let (gv, ge) = g(mid + half * gx[k])?;
                    p_acc += gw[k] * half * gv.re;
                    p_err += gw[k] * half * ge;
                }
                Ok((p_acc, p_err))
            })
            .collect();
        for p in panels {
            let (a, e) = p?;
            acc += a;
            err_in += e;
        }
        n_nodes += (edges.len() - 1) * pts;

        // Unwind the explicit phase, fit |g| ~ C u^{-p} on the last octave,
        // integrate the fitted law beyond the truncation.
        let unwind = |u: f64| -> Result<C> { Ok(g(u)?.0 * (-I * phase * u).exp()) };
        let we = unwind(u_hi)?;
        let wm = unwind(0.5 * u_hi)?;
        tail = fitted_tail(we, wm, u_hi, phase.abs(), phase.signum());
        value = (acc + tail.re) / std::f64::consts::PI;
        if let Some(p) = prev {
            change = (value - p).abs();
            if change < tol {
                break;
            }
        }
        prev = Some(value);
        u_lo = u_hi;
        u_hi *= 2.0;
    }
    let err =
        err_in / std::f64::consts::PI + 0.35 * tail.norm() / std::f64::consts::PI + change.min(1.0);
    Ok((value, err, u_lo.max(60.0), n_nodes))
}

/// Core damped sup/inf transform integral
///
///   (1/2pi) int_R phi_extremum(-u - iR) kernel(u) du
///
/// with phi from the Bromwich inversion of the ladder ratio; conjugate
/// symmetry folds the integral onto u >= 0.
fn damped_sup_integral<K>(
    model: &LevyModel,
    t_grid: &[f64],
    side: Side,
    r: f64,
    kernel: &K,
    phase: f64,
    cfg: &ContourConfig,
) -> Result<(Vec<(f64, f64)>, Diagnostics)>
where
    K: Fn(f64) -> C + Sync,
{
    let t_max = t_grid.iter().cloned().fold(0.0f64, f64::max);
    // The outer integral can reach u = 60 * 2^2 after doublings; the fine
    // region of the frequency grid must resolve kernel poles out to there.
    let wh = engine_for(model, -r.abs(), 240.0, cfg)?;
    let eng = wh.side_engine(side);
    wh.log_kappa_direct(C::new(cfg.y, 0.0), C::new(-r.abs(), 0.0), side)?;
    let cache = RatioCache::new(eng);
    // One panel width for every maturity so the q-node sets coincide.
    let width = (16.0 / t_max).min(8.0).min(32.0 * cfg.a / cfg.n_nodes as f64);
    let beta_at = |u: f64| match side {
        Side::Ascending => C::new(-r, u),
        Side::Descending => C::new(r, -u),
    };
    let mut out = Vec::with_capacity(t_grid.len());
    let mut diag = Diagnostics {
        r,
        y: cfg.y,
        a_contour: cfg.a,
        ..Diagnostics::default()
    };
    for &t in t_grid {
        let g = |u: f64| -> Result<(C, f64)> {
            let beta = beta_at(u);
            let inv = invert_lkr_with(|q| cache.lkr(q, beta), t, cfg, width)?;
            Ok((inv.value * kernel(u), inv.error_est * kernel(u).norm()))
        };
        let (value, err, u_max, nodes) = outer_integral(&g, phase, r.abs().min(1.0), cfg.tol)?;
        diag.outer_u_max = diag.outer_u_max.max(u_max);
        diag.outer_nodes += nodes;
        out.push((value, err));
    }
    diag.inner_rows = cache.rows.lock().unwrap().len();
    diag.cache_hits = cache.hits.load(Ordering::Relaxed);
    Ok((out, diag))
}

// ---------------------------------------------------------------------------
// Products
// ---------------------------------------------------------------------------

fn dampening(req: &PricingRequest, lo: f64, hi: f64, default: f64) -> Result<f64> {
    let r = req.r_damp.unwrap_or(default);
    if !(r > lo && r < hi) {
        return Err(EngineError::StripViolation(format!(
            "dampening {r} outside admissible interval ({lo}, {hi})"
        )));
    }
    Ok(r)
}

pub fn lookback_call(req: &PricingRequest) -> Result<PriceResult> {
    req.validate()?;
    let k = match req.product {
        Product::LookbackCall { k } => k,
        _ => return Err(EngineError::ParameterDomain("not a lookback call request".into())),
    };
    if !req.model.path_properties().atomless_law {
        return Err(EngineError::UnsupportedPathType(
            "lookback pricing needs an atomless marginal law".into(),
        ));
    }
    let m_safe = req.model.moment_strip()?.m_safe;
    if m_safe <= 1.0 {
        return Err(EngineError::StripViolation(format!(
            "lookback call needs an exponential moment above 1 (m_safe = {m_safe})"
        )));
    }
    let r = dampening(req, 1.0, m_safe, 0.5 * (1.0 + m_safe))?;
    let cfg = match req.contour {
        Some(c) => c,
        None => inner_contour(&req.model, r)?,
    };
    let (s0, strike) = (req.s0, k);
    let kernel = move |u: f64| -> C {
        let s = C::new(r, -u);
        let num = ((s * s0.ln()) + (C::new(1.0, 0.0) - s) * strike.ln()).exp();
        num / (s * (s - 1.0))
    };
    let phase = (strike / s0).ln();
    let (vals, mut diag) =
        damped_sup_integral(&req.model, &[req.t], Side::Ascending, r, &kernel, phase, &cfg)?;
    let disc = (-req.discount_r * req.t).exp();
    let (mut price, err) = (disc * vals[0].0, disc * vals[0].1);
    if price < 0.0 {
        diag.clamped = true;
        price = 0.0;
    }
    Ok(PriceResult { price, numerical_error: err, diagnostics: diag })
}

pub fn lookback_put(req: &PricingRequest) -> Result<PriceResult> {
    req.validate()?;
    let k = match req.product {
        Product::LookbackPut { k } => k,
        _ => return Err(EngineError::ParameterDomain("not a lookback put request".into())),
    };
    if !req.model.path_properties().atomless_law {
        return Err(EngineError::UnsupportedPathType(
            "lookback pricing needs an atomless marginal law".into(),
        ));
    }
    let m_safe = req.model.moment_strip()?.m_safe;
    let r = dampening(req, -m_safe, 0.0, -0.5 * m_safe.min(1.0))?;
    let cfg = match req.contour {
        Some(c) => c,
        None => inner_contour(&req.model, -r)?,
    };
    let (s0, strike) = (req.s0, k);
    let kernel = move |u: f64| -> C {
        let s = C::new(r, -u);
        let num = ((s * s0.ln()) + (C::new(1.0, 0.0) - s) * strike.ln()).exp();
        num / (s * (s - 1.0))
    };
    let phase = (strike / s0).ln();
    let (vals, mut diag) =
        damped_sup_integral(&req.model, &[req.t], Side::Descending, r, &kernel, phase, &cfg)?;
    let disc = (-req.discount_r * req.t).exp();
    let (mut price, err) = (disc * vals[0].0, disc * vals[0].1);
    if price < 0.0 {
        diag.clamped = true;
        price = 0.0;
    }
    Ok(PriceResult { price, numerical_error: err, diagnostics: diag })
}

/// P(sup > a) via the step-function inversion
///
///   (1/2pi) int e^{-(R - iu) a} E[e^{(R - iu) sup}] / (R - iu) du,  R > 0.
///
/// Down-barrier probabilities come from the same formula on the dual
/// model: P(inf_X < -a) = P(sup_dual > a).
fn barrier_probs(
    model: &LevyModel,
    t_grid: &[f64],
    a: f64,
    r: f64,
    cfg: &ContourConfig,
) -> Result<(Vec<(f64, f64)>, Diagnostics)> {
    let kernel = move |u: f64| -> C {
        let s = C::new(r, -u);
        (-s * a).exp() / s
    };
    damped_sup_integral(model, t_grid, Side::Ascending, r, &kernel, a, cfg)
}

pub fn one_touch_up(req: &PricingRequest) -> Result<PriceResult> {
    req.validate()?;
    let b = match req.product {
        Product::OneTouchUp { b } => b,
        _ => return Err(EngineError::ParameterDomain("not a one-touch request".into())),
    };
    if !req.model.path_properties().atomless_sup {
        return Err(EngineError::UnsupportedPathType(
            "one-touch needs an atomless supremum law (infinite variation, or regular \
             upwards with infinite activity)"
                .into(),
        ));
    }
    let m_safe = req.model.moment_strip()?.m_safe;
    let r = dampening(req, 0.0, m_safe, 0.5 * m_safe.min(1.0))?;
    let cfg = match req.contour {
        Some(c) => c,
        None => inner_contour(&req.model, r)?,
    };
    let a = (b / req.s0).ln();
    let (vals, mut diag) = barrier_probs(&req.model, &[req.t], a, r, &cfg)?;
    diag.boundary = a == 0.0;
    let (mut prob, err) = vals[0];
    if !(0.0..=1.0).contains(&prob) {
        diag.clamped = true;
        prob = prob.clamp(0.0, 1.0);
    }
    let disc = (-req.discount_r * req.t).exp();
    Ok(PriceResult { price: disc * prob, numerical_error: disc * err, diagnostics: diag })
}

pub fn digital_down(req: &PricingRequest) -> Result<PriceResult> {
    req.validate()?;
    let b = match req.product {
        Product::DigitalDown { b } => b,
        _ => return Err(EngineError::ParameterDomain("not a digital-down request".into())),
    };
    if !req.model.dual().path_properties().atomless_sup {
        return Err(EngineError::UnsupportedPathType(
            "digital-down needs an atomless infimum law".into(),
        ));
    }
    let m_safe = req.model.moment_strip()?.m_safe;
    let r = dampening(req, 0.0, m_safe, 0.5 * m_safe.min(1.0))?;
    let cfg = match req.contour {
        Some(c) => c,
        None => inner_contour(&req.model, r)?,
    };
    // P(inf_X < log(B/S0)) = P(sup_dual > log(S0/B)).
    let a = (req.s0 / b).ln();
    let (vals, mut diag) = barrier_probs(&req.model.dual(), &[req.t], a, r, &cfg)?;
    diag.boundary = a == 0.0;
    let (mut prob, err) = vals[0];
    if !(0.0..=1.0).contains(&prob) {
        diag.clamped = true;
        prob = prob.clamp(0.0, 1.0);
    }
    let disc = (-req.discount_r * req.t).exp();
    Ok(PriceResult { price: disc * prob, numerical_error: disc * err, diagnostics: diag })
}

/// Generic damped-Fourier price (1/2pi) int phi_extremum(-u-iR) K(u) du for
/// a caller-supplied payoff transform K, analytic on the dampening strip.
pub fn sup_payoff_price<K>(
    model: &LevyModel,
    t: f64,
    side: Side,
    r_range: (f64, f64),
    r_damp: Option<f64>,
    kernel: &K,
    phase: f64,
    contour: Option<ContourConfig>,
    discount: f64,
) -> Result<PriceResult>
where
    K: Fn(f64) -> C + Sync,
{
    let m_safe = model.moment_strip()?.m_safe;
    let (lo, hi) = (r_range.0.max(-m_safe), r_range.1.min(m_safe));
    if lo >= hi {
        return Err(EngineError::StripViolation(format!(
            "payoff strip ({}, {}) misses the moment strip (+-{m_safe})",
            r_range.0, r_range.1
        )));
    }
    let r = r_damp.unwrap_or(0.5 * (lo + hi));
    if !(r > lo && r < hi) {
        return Err(EngineError::StripViolation(format!(
            "dampening {r} outside admissible interval ({lo}, {hi})"
        )));
    }
    let cfg = match contour {
        Some(c) => c,
        None => inner_contour(model, r.abs())?,
    };
    let (vals, diag) = damped_sup_integral(model, &[t], side, r, kernel, phase, &cfg)?;
    Ok(PriceResult {
        price: discount * vals[0].0,
        numerical_error: discount * vals[0].1,
        diagnostics: diag,
    })
}

/// F(t_i) = P(tau_B <= t_i) for the level-crossing time of barrier B < S0,
/// isotonic-clipped into a proper sub-distribution function.
pub fn first_passage_curve(
    model: &LevyModel,
    s0: f64,
    b: f64,
    t_grid: &[f64],
    contour: Option<ContourConfig>,
) -> Result<(Vec<(f64, f64)>, Diagnostics)> {
    if !(b > 0.0 && b < s0) {
        return Err(EngineError::ParameterDomain(
            "first-passage barrier must sit below the spot".into(),
        ));
    }
    if t_grid.is_empty() || t_grid[0] <= 0.0 || t_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(EngineError::ParameterDomain("time grid must be ascending, positive".into()));
    }
    if !model.dual().path_properties().atomless_sup {
        return Err(EngineError::UnsupportedPathType(
            "first-passage curve needs an atomless infimum law".into(),
        ));
    }
    let m_safe = model.moment_strip()?.m_safe;
    let r = 0.5 * m_safe.min(1.0);
    let cfg = match contour {
        Some(c) => c,
        None => inner_contour(model, r)?,
    };
    let a = (s0 / b).ln();
    let (vals, mut diag) = barrier_probs(&model.dual(), t_grid, a, r, &cfg)?;
    let mut curve = Vec::with_capacity(t_grid.len());
    let mut running = 0.0f64;
    for (&t, &(p, _)) in t_grid.iter().zip(&vals) {
        let clipped = p.clamp(0.0, 1.0).max(running);
        if (clipped - p).abs() > 1e-12 {
            diag.isotonic_clipped = true;
        }
        running = clipped;
        curve.push((t, clipped));
    }
    Ok((curve, diag))
}

/// Par premium of an equity default swap: recovery C on the first touch of
/// barrier B, against premium K at the schedule dates while alive.
pub fn eds_premium(
    model: &LevyModel,
    s0: f64,
    schedule: &EdsSchedule,
    contour: Option<ContourConfig>,
) -> Result<PriceResult> {
    schedule.validate()?;
    if schedule.barrier_b >= s0 {
        return Err(EngineError::DegenerateContract(format!(
            "barrier {} at or above spot {s0}: default at inception",
            schedule.barrier_b
        )));
    }
    if schedule.recovery_c == 0.0 {
        return Ok(PriceResult {
            price: 0.0,
            numerical_error: 0.0,
            diagnostics: Diagnostics::default(),
        });
    }
    let r = schedule.rate_r;

    let premium_at = |grid: &[f64]| -> Result<(f64, Diagnostics)> {
        let (curve, diag) = first_passage_curve(model, s0, schedule.barrier_b, grid, contour)?;
        let f_at = |t: f64| -> f64 {
            // Grid nodes contain every premium date by construction.
            match curve.iter().find(|(tt, _)| (tt - t).abs() < 1e-12) {
                Some(&(_, f)) => f,
                None => f64::NAN,
            }
        };
        // Stieltjes trapezoid of e^{-rt} dF with F(0) = 0.
        let mut num = 0.0f64;
        let mut prev_t = 0.0f64;
        let mut prev_f = 0.0f64;
        for &(t, f) in &curve {
            num += 0.5 * ((-r * prev_t).exp() + (-r * t).exp()) * (f - prev_f);
            prev_t = t;
            prev_f = f;
        }
        let mut den = 0.0f64;
        for &ti in &schedule.premium_dates {
            den += (-r * ti).exp() * (1.0 - f_at(ti));
        }
        if den < 1e-12 {
            return Err(EngineError::DegenerateContract(
                "no surviving premium legs: default virtually certain".into(),
            ));
        }
        Ok((schedule.recovery_c * num / den, diag))
    };

    // Refine the integration grid until the premium settles within 0.5%.
    let mut per_interval = 1usize;
    let mut prev: Option<f64> = None;
    let mut result = None;
    for _ in 0..4 {
        let mut grid = Vec::new();
        let mut lo = 0.0f64;
        for &ti in &schedule.premium_dates {
            for k in 1..=per_interval {
                grid.push(lo + (ti - lo) * k as f64 / per_interval as f64);
            }
            lo = ti;
        }
        let (kappa, diag) = premium_at(&grid)?;
        let done = match prev {
            Some(p) => (kappa - p).abs() <= 0.005 * kappa.abs().max(1e-12),
            None => false,
        };
        let conv_err = prev.map(|p| (kappa - p).abs()).unwrap_or(0.0);
        result = Some(PriceResult { price: kappa, numerical_error: conv_err, diagnostics: diag });
        if done {
            break;
        }
        prev = Some(kappa);
        per_interval *= 2;
    }
    Ok(result.unwrap())
}

/// European call on the terminal value via the same Mellin kernel; serves
/// as the lower bound for the fixed-strike lookback call.
pub fn european_call(
    model: &LevyModel,
    s0: f64,
    k: f64,
    t: f64,
    r_damp: Option<f64>,
    discount: f64,
) -> Result<f64> {
    let m_safe = model.moment_strip()?.m_safe;
    if m_safe <= 1.0 {
        return Err(EngineError::StripViolation(format!(
            "needs an exponential moment above 1 (m_safe = {m_safe})"
        )));
    }
    let r = r_damp.unwrap_or(0.5 * (1.0 + m_safe));
    if !(r > 1.0 && r < m_safe) {
        return Err(EngineError::StripViolation(format!("dampening {r} outside (1, {m_safe})")));
    }
    let g = |u: f64| -> Result<(C, f64)> {
        let s = C::new(r, -u);
        let phi = (t * model.cumulant(s)?).exp();
        let num = ((s * s0.ln()) + (C::new(1.0, 0.0) - s) * k.ln()).exp();
        Ok((phi * num / (s * (s - 1.0)), 0.0))
    };
    let (value, _, _, _) = outer_integral(&g, (k / s0).ln(), r.min(1.0), 1e-9)?;
    Ok(discount * value.max(0.0))
}

/// Dispatch on the product variant.
pub fn price(req: &PricingRequest) -> Result<PriceResult> {
    match &req.product {
        Product::LookbackCall { .. } => lookback_call(req),
        Product::LookbackPut { .. } => lookback_put(req),
        Product::OneTouchUp { .. } => one_touch_up(req),
        Product::DigitalDown { .. } => digital_down(req),
        Product::Eds { schedule } => {
            let sched = schedule.clone();
            eds_premium(&req.model, req.s0, &sched, req.contour)
        }
    }
}
