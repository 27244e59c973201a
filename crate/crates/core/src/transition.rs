//! Numerical access to the time-t marginal law: density grids via Fourier
//! inversion, half-line exponential transforms, and a frequency-contour
//! engine that evaluates those transforms without ever forming a density.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use num_complex::Complex64;

use crate::error::{EngineError, Result};
use crate::models::{LevyModel, EPS_STRIP};
use crate::quad::{gauss_legendre, geometric_edges, PanelRule};

type C = Complex64;

const I: C = C::new(0.0, 1.0);

/// exp(z) - 1 without cancellation for small z.
pub fn cexpm1(z: C) -> C {
    if z.norm() < 1e-5 {
        z * (C::new(1.0, 0.0) + z * 0.5 * (C::new(1.0, 0.0) + z / 3.0))
    } else {
        z.exp() - C::new(1.0, 0.0)
    }
}

// ---------------------------------------------------------------------------
// Density grids
// ---------------------------------------------------------------------------

/// Discretization parameters for a marginal-law density grid.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridConfig {
    pub u_max_freq: f64,
    pub n_freq: usize,
    pub x_range: (f64, f64),
    pub n_x: usize,
}

impl GridConfig {
    pub fn validate(&self) -> Result<()> {
        let pow2 = |n: usize| n >= 256 && n.is_power_of_two();
        if !pow2(self.n_freq) || !pow2(self.n_x) {
            return Err(EngineError::ParameterDomain(
                "n_freq and n_x must be powers of two >= 256".into(),
            ));
        }
        if !(self.u_max_freq > 0.0 && self.x_range.1 > self.x_range.0) {
            return Err(EngineError::ParameterDomain("empty grid ranges".into()));
        }
        Ok(())
    }

    /// Pick truncation and ranges from the decay of the characteristic
    /// function and of the density's exponential tails.
    pub fn auto(model: &LevyModel, t: f64) -> Result<GridConfig> {
        if t <= 0.0 {
            return Err(EngineError::ParameterDomain("t must be positive".into()));
        }
        let strip = model.moment_strip()?;
        let log_phi = |u: f64| t * model.cumulant_unchecked(C::new(0.0, u)).re;
        // Frequency truncation where |phi| < ~3e-10; beyond that the
        // remaining tail contributes < 1e-9 to the density pointwise.
        let mut u_max = 1.0;
        while log_phi(u_max) > -22.0 {
            u_max *= 1.5;
            if u_max > 1e7 {
                return Err(EngineError::TruncationFailure(format!(
                    "characteristic function at t={t} decays too slowly for a density grid"
                )));
            }
        }
        // Exponential tail cutoffs from the strip edges.
        let up = strip.u_max.min(crate::models::BROWNIAN_STRIP_CAP) * (1.0 - EPS_STRIP);
        let un = strip.u_min.max(-crate::models::BROWNIAN_STRIP_CAP) * (1.0 - EPS_STRIP);
        let kp = model.cumulant_unchecked(C::new(up, 0.0)).re;
        let kn = model.cumulant_unchecked(C::new(un, 0.0)).re;
        let x_hi = (45.0 + t * kp.max(0.0)) / up;
        let x_lo = -(45.0 + t * kn.max(0.0)) / (-un);
        let x_abs = x_hi.max(-x_lo);
        // Resolve e^{-iux} oscillation: ~6 radians per frequency panel.
        let panels = (u_max * x_abs / 6.0).ceil().max(16.0) as usize;
        let n_freq = (panels * 16).next_power_of_two().max(1024);
        if n_freq > 1 << 21 {
            return Err(EngineError::TruncationFailure(format!(
                "frequency budget {n_freq} exceeded at t={t}"
            )));
        }
        Ok(GridConfig { u_max_freq: u_max, n_freq, x_range: (x_lo, x_hi), n_x: 4096 })
    }
}

/// Density of the time-t marginal on a nonuniform grid, dense near 0.
#[derive(Clone, Debug)]
pub struct MarginalLaw {
    pub t: f64,
    pub x_nodes: Vec<f64>,
    pub density: Vec<f64>,
    pub mass_defect: f64,
}

impl MarginalLaw {
    /// Trapezoid weight of node i.
    fn node_weight(&self, i: usize) -> f64 {
        let n = self.x_nodes.len();
        let lo = if i == 0 { self.x_nodes[0] } else { self.x_nodes[i - 1] };
        let hi = if i + 1 == n { self.x_nodes[n - 1] } else { self.x_nodes[i + 1] };
        0.5 * (hi - lo)
    }

    pub fn total_mass(&self) -> f64 {
        (0..self.x_nodes.len()).map(|i| self.density[i] * self.node_weight(i)).sum()
    }

    /// Linear interpolation of the density.
    pub fn density_at(&self, x: f64) -> f64 {
        let n = self.x_nodes.len();
        if x <= self.x_nodes[0] || x >= self.x_nodes[n - 1] {
            return 0.0;
        }
        let j = self.x_nodes.partition_point(|&v| v < x).max(1);
        let (x0, x1) = (self.x_nodes[j - 1], self.x_nodes[j]);
        let s = (x - x0) / (x1 - x0);
        self.density[j - 1] * (1.0 - s) + self.density[j] * s
    }
}

/// Sinh-stretched nodes on [lo, hi] clustering near 0 (0 is always a node
/// when lo < 0 < hi).
fn sinh_nodes(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let a = 3.0f64;
    let side = |from: f64, to: f64, m: usize, out: &mut Vec<f64>| {
        // from is the dense end.
        for k in 1..=m {
            let s = k as f64 / m as f64;
            out.push(from + (to - from) * (a * s).sinh() / a.sinh());
        }
    };
    let mut xs = Vec::with_capacity(n + 1);
    if lo < 0.0 && hi > 0.0 {
        let n_neg = ((n as f64 * -lo / (hi - lo)).round() as usize).clamp(8, n - 8);
        let mut neg = Vec::new();
        side(0.0, lo, n_neg, &mut neg);
        neg.reverse();
        xs.extend(neg);
        xs.push(0.0);
        side(0.0, hi, n - n_neg, &mut xs);
    } else {
        xs.push(lo);
        side(lo, hi, n, &mut xs);
    }
    xs
}

/// Invert the characteristic function to a density grid.
pub fn marginal_law(model: &LevyModel, t: f64, cfg: &GridConfig) -> Result<MarginalLaw> {
    cfg.validate()?;
    if t <= 0.0 {
        return Err(EngineError::ParameterDomain("t must be positive".into()));
    }
    let tail = t * model.cumulant_unchecked(C::new(0.0, cfg.u_max_freq)).re;
    if tail > -20.0 {
        return Err(EngineError::TruncationFailure(format!(
            "|char function| = e^{tail:.2} at the frequency cutoff"
        )));
    }
    let pts = 16;
    let panels = (cfg.n_freq / pts).max(1);
    let width = cfg.u_max_freq / panels as f64;
    let edges: Vec<f64> = (0..=panels).map(|k| width * k as f64).collect();
    let rule = PanelRule::from_edges(&edges, pts);
    let phi: Vec<C> = rule
        .nodes
        .iter()
        .map(|&u| (t * model.cumulant_unchecked(C::new(0.0, u))).exp())
        .collect();

    let x_nodes = sinh_nodes(cfg.x_range.0, cfg.x_range.1, cfg.n_x);
    let mut density: Vec<f64> = x_nodes
        .iter()
        .map(|&x| {
            let mut acc = 0.0;
            for ((&u, &w), &p) in rule.nodes.iter().zip(&rule.weights).zip(&phi) {
                acc += w * ((-I * u * x).exp() * p).re;
            }
            acc / std::f64::consts::PI
        })
        .collect();

    let peak = density.iter().cloned().fold(0.0f64, f64::max);
    let neg_tol = 1e-10 * (1.0 + peak);
    let worst = density.iter().cloned().fold(0.0f64, f64::min);
    if worst < -neg_tol * 1e4 {
        return Err(EngineError::TruncationFailure(format!(
            "density negativity {worst:.3e} exceeds the clipping budget"
        )));
    }
    for d in density.iter_mut() {
        if *d < 0.0 {
            *d = 0.0;
        }
    }
    let mut law = MarginalLaw { t, x_nodes, density, mass_defect: 0.0 };
    let mass = law.total_mass();
    if (mass - 1.0).abs() > 1e-5 {
        return Err(EngineError::TruncationFailure(format!(
            "density mass {mass} off by more than 1e-5"
        )));
    }
    law.mass_defect = (mass - 1.0).abs();
    for d in law.density.iter_mut() {
        *d /= mass;
    }
    Ok(law)
}

/// Which open half-line to integrate over.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HalfLine {
    Positive,
    Negative,
}

/// int over (0,inf) of e^{-beta x} dP (positive side) or over (-inf,0) of
/// e^{+beta x} dP (negative side), against the gridded density.
pub fn half_line_transform(
    law: &MarginalLaw,
    model: &LevyModel,
    beta: C,
    side: HalfLine,
) -> Result<C> {
    let strip = model.moment_strip()?;
    if beta.re <= -strip.m_safe {
        return Err(EngineError::StripViolation(format!(
            "Re(beta)={} not above -{}",
            beta.re, strip.m_safe
        )));
    }
    let n = law.x_nodes.len();
    let val = |i: usize| -> C {
        let x = law.x_nodes[i];
        let arg = match side {
            HalfLine::Positive => -beta * x,
            HalfLine::Negative => beta * x,
        };
        arg.exp() * law.density[i]
    };
    let mut acc = C::new(0.0, 0.0);
    for i in 0..n - 1 {
        let (a, b) = (law.x_nodes[i], law.x_nodes[i + 1]);
        let keep = match side {
            HalfLine::Positive => a >= 0.0,
            HalfLine::Negative => b <= 0.0,
        };
        if keep {
            acc += 0.5 * (b - a) * (val(i) + val(i + 1));
        }
    }
    Ok(acc)
}

/// Shared cache of marginal laws keyed by (model, t, cfg).
#[derive(Default)]
pub struct LawCache {
    map: Mutex<HashMap<(u64, u64, u64), Arc<MarginalLaw>>>,
}

fn cfg_key(cfg: &GridConfig) -> u64 {
    use std::hash::{Hash, Hasher};
    let mut h = std::collections::hash_map::DefaultHasher::new();
    cfg.u_max_freq.to_bits().hash(&mut h);
    cfg.n_freq.hash(&mut h);
    cfg.x_range.0.to_bits().hash(&mut h);
    cfg.x_range.1.to_bits().hash(&mut h);
    cfg.n_x.hash(&mut h);
    h.finish()
}

impl LawCache {
    pub fn new() -> LawCache {
        LawCache::default()
    }

    pub fn get(&self, model: &LevyModel, t: f64, cfg: &GridConfig) -> Result<Arc<MarginalLaw>> {
        let key = (model.key(), t.to_bits(), cfg_key(cfg));
        if let Some(law) = self.map.lock().unwrap().get(&key) {
            return Ok(law.clone());
        }
        let law = Arc::new(marginal_law(model, t, cfg)?);
        self.map.lock().unwrap().insert(key, law.clone());
        Ok(law)
    }

    pub fn len(&self) -> usize {
        self.map.lock().unwrap().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

// ---------------------------------------------------------------------------
// Frequency-contour engine
// ---------------------------------------------------------------------------

/// Half-line exponential transforms evaluated directly in the frequency
/// domain along a horizontal contour Im(w) = c < 0 below the origin and
/// below every admissible Re(beta):
///
///   E[(1 - e^{-beta L_t}) 1_{L_t>0}]
///     = (1/2pi) int (phi_t(w) - 1) [1/(iw) - 1/(beta+iw)] dw.
///
/// Subtracting 1 from phi makes the value vanish identically at t=0, so the
/// small-t regime needs no extreme resolution; the kernel tail outside the
/// truncation is integrated in closed form. The kappa table on the contour
/// is shared by every t and beta with the same Re(beta) constraint.
pub struct HalfLineEngine {
    model: LevyModel,
    c: f64,
    nodes: Vec<f64>,
    weights: Vec<f64>,
    kappa: Vec<C>,
    a_max: f64,
    kappa_base: f64,
    // Leaner grid for the order-swapped resolvent representation, whose
    // integrand K(w) ln(q/(q - kappa(w))) has no oscillatory factor.
    dnodes: Vec<f64>,
    dweights: Vec<f64>,
    dkappa: Vec<C>,
}

impl HalfLineEngine {
    /// Build the contour and quadrature grid.
    ///
    /// `re_beta_min`: smallest Re(beta) that will be queried (may be
    /// negative, must exceed -m_safe). `im_beta_max`: largest |Im(beta)|;
    /// kernel poles up to there are resolved by the fine grid. `t_min`,
    /// `t_max`: the time range served. `refine` >= 1 shrinks panels.
    /// `kappa_cap` forces the contour depth to keep kappa(-c) below it, so
    /// that resolvent logarithms ln(q/(q - kappa)) stay on the principal
    /// branch for every Re(q) above the cap; pass infinity when unused.
    pub fn new(
        model: &LevyModel,
        re_beta_min: f64,
        im_beta_max: f64,
        t_min: f64,
        t_max: f64,
        refine: f64,
        kappa_cap: f64,
    ) -> Result<HalfLineEngine> {
        model.validate()?;
        let strip = model.moment_strip()?;
        let lo = (-re_beta_min).max(0.0);
        let hi = if strip.u_max.is_finite() {
            strip.u_max * (1.0 - EPS_STRIP)
        } else {
            (lo + 4.0).max(8.0)
        };
        if lo >= hi {
            return Err(EngineError::StripViolation(format!(
                "Re(beta) >= {re_beta_min} leaves no room inside the strip (edge {hi})"
            )));
        }
        // Contour depth: far enough below the poles that the kernel stays
        // resolvable, but shallow enough that the amplification factor
        // e^{t (kappa(-c) - kappa(lo)^+)} cannot eat the f64 mantissa via
        // cancellation over the shared grid.
        let k_at = |u: f64| model.cumulant_unchecked(C::new(u, 0.0)).re;
        let base = k_at(lo).max(0.0);
        let mut delta = (0.35 * (hi - lo)).min(1.2);
        while delta > 0.06
            && (t_max * (k_at(lo + delta) - base) > 18.0 || k_at(lo + delta) >= kappa_cap)
        {
            delta *= 0.7;
        }
        if k_at(lo + delta) >= kappa_cap {
            return Err(EngineError::AbscissaViolation(format!(
                "cumulant at the contour exceeds the resolvent cap {kappa_cap}"
            )));
        }
        let c = -(lo + delta);
        let refine = refine.max(1.0);

        // Oscillation rate of phi near the origin (drift + diffusion terms).
        let b_comp = crate::analysis::compensated_drift(model);
        let rate0 = b_comp.abs() + (-c) * model.diffusion_c;
        let h_max = (1.2 * delta).min(1.5).min(6.0 / (t_max * rate0 + 1e-9)) / refine;
        let h0 = (delta / 3.0).min(0.4) / refine;
        let a_fine = im_beta_max + 5.0 + 6.0 * delta;
        let mut edges = geometric_edges(h0, h_max.max(h0), a_fine, 1.5);

        // Tail panels: width limited by the local oscillation of phi over the
        // times at which it has not yet decayed, with a floor on relative
        // width; stop once even t_min has fully decayed.
        let kappa_base = model.cumulant_unchecked(C::new(-c, 0.0)).re;
        let mut x = a_fine;
        let mut guard = 0usize;
        while x < 1e12 && guard < 6000 {
            guard += 1;
            let k = model.cumulant_unchecked(C::new(-c, x));
            let decay = (kappa_base - k.re).max(1e-12);
            if t_min * decay > 45.0 {
                break;
            }
            let t_alive = (45.0 / decay).min(t_max);
            let rate = k.im.abs() / x + 1e-12;
            let w = (6.0 / (rate * t_alive))
                .min(0.78 * x)
                .max(0.025 * x)
                / refine;
            x += w;
            edges.push(x.min(1e12));
        }
        let a_max = *edges.last().unwrap();

        let pts = 16;
        let (gx, gw) = gauss_legendre(pts);
        let mut nodes = Vec::with_capacity((edges.len() - 1) * pts);
        let mut weights = Vec::with_capacity(nodes.capacity());
        for win in edges.windows(2) {
            let mid = 0.5 * (win[0] + win[1]);
            let half = 0.5 * (win[1] - win[0]);
            for k in 0..pts {
                nodes.push(mid + half * gx[k]);
                weights.push(half * gw[k]);
            }
        }
        let kappa: Vec<C> =
            nodes.iter().map(|&xj| model.cumulant_unchecked(C::new(-c, xj))).collect();

        // Resolvent grid: the fine region still resolves the kernel poles,
        // but the tail only has to follow K ~ -beta/w^2 times a logarithm,
        // so geometric panels suffice.
        let mut ledges = geometric_edges(h0, (1.2 * delta).min(1.5).max(h0), a_fine, 1.5);
        let mut x = a_fine;
        while x < 3e10 {
            x *= 1.35;
            ledges.push(x.min(3e10));
        }
        let dpts = 8;
        let (dgx, dgw) = gauss_legendre(dpts);
        let mut dnodes = Vec::with_capacity((ledges.len() - 1) * dpts);
        let mut dweights = Vec::with_capacity(dnodes.capacity());
        for win in ledges.windows(2) {
            let mid = 0.5 * (win[0] + win[1]);
            let half = 0.5 * (win[1] - win[0]);
            for k in 0..dpts {
                dnodes.push(mid + half * dgx[k]);
                dweights.push(half * dgw[k]);
            }
        }
        let dkappa: Vec<C> =
            dnodes.iter().map(|&xj| model.cumulant_unchecked(C::new(-c, xj))).collect();

        Ok(HalfLineEngine {
            model: model.clone(),
            c,
            nodes,
            weights,
            kappa,
            a_max,
            kappa_base,
            dnodes,
            dweights,
            dkappa,
        })
    }

    /// max over the contour of Re kappa, attained at w = ic.
    pub fn kappa_contour_max(&self) -> f64 {
        self.kappa_base
    }

    /// log of the ladder-ratio via the order-swapped resolvent integral
    ///
    ///   (1/2pi) int K(w) ln(q / (q - kappa(w))) dw,
    ///
    /// valid and uniformly accurate for any Re(q) > kappa(-c); this is the
    /// route of choice along a Bromwich contour, where |Im(q)| gets large.
    pub fn log_ratio_direct(&self, q: C, beta: C) -> C {
        debug_assert!(q.re > self.kappa_base, "Re(q) must exceed kappa(-c)");
        let c = self.c;
        let mut acc = C::new(0.0, 0.0);
        for j in 0..self.dnodes.len() {
            let x = self.dnodes[j];
            let wp = C::new(x, c);
            let wm = C::new(-x, c);
            let kp = beta / ((I * wp) * (beta + I * wp));
            let km = beta / ((I * wm) * (beta + I * wm));
            let lp = (q / (q - self.dkappa[j])).ln();
            let lm = (q / (q - self.dkappa[j].conj())).ln();
            acc += self.dweights[j] * (lp * kp + lm * km);
        }
        acc / (2.0 * std::f64::consts::PI)
    }

    /// Node count of the lean resolvent grid.
    pub fn resolvent_len(&self) -> usize {
        self.dnodes.len()
    }

    /// Weight-folded resolvent logarithms at one q over the lean grid,
    /// interleaved (positive node, reflected node), with the contraction
    /// against the beta-independent kernel part 1/(i w) appended last. The
    /// kernel splits as beta/(iw (beta + iw)) = 1/(iw) - 1/(beta + iw), so
    /// contracting a row against a new beta costs only two reciprocals per
    /// grid node.
    pub fn resolvent_row(&self, q: C) -> Vec<C> {
        let n = self.dnodes.len();
        let mut row = Vec::with_capacity(2 * n + 1);
        let mut cst = C::new(0.0, 0.0);
        for j in 0..n {
            let x = self.dnodes[j];
            let w = self.dweights[j];
            let rp = w * (q / (q - self.dkappa[j])).ln();
            let rm = w * (q / (q - self.dkappa[j].conj())).ln();
            // i w = -c + i x on the positive side, -c - i x on the mirror.
            cst += rp / C::new(-self.c, x) + rm / C::new(-self.c, -x);
            row.push(rp);
            row.push(rm);
        }
        row.push(cst);
        row
    }

    /// Contract a resolvent row (built at this q) against the kernel for
    /// one beta.
    pub fn log_ratio_from_row(&self, row: &[C], beta: C) -> C {
        let n = self.dnodes.len();
        let dre = beta.re - self.c;
        let mut acc = row[2 * n];
        for j in 0..n {
            let x = self.dnodes[j];
            let dp = C::new(dre, beta.im + x);
            let dm = C::new(dre, beta.im - x);
            acc -= row[2 * j] * dp.conj() / dp.norm_sqr() + row[2 * j + 1] * dm.conj() / dm.norm_sqr();
        }
        acc / (2.0 * std::f64::consts::PI)
    }

    /// Contract a row built at q to get the value at conj(q): the resolvent
    /// logarithms at conj(q) are the conjugates of the mirrored entries.
    pub fn log_ratio_from_row_conj(&self, row: &[C], beta: C) -> C {
        let n = self.dnodes.len();
        let dre = beta.re - self.c;
        let mut acc = row[2 * n].conj();
        for j in 0..n {
            let x = self.dnodes[j];
            let dp = C::new(dre, beta.im + x);
            let dm = C::new(dre, beta.im - x);
            acc -= row[2 * j + 1].conj() * dp.conj() / dp.norm_sqr()
                + row[2 * j].conj() * dm.conj() / dm.norm_sqr();
        }
        acc / (2.0 * std::f64::consts::PI)
    }

    pub fn contour(&self) -> f64 {
        self.c
    }

    pub fn model(&self) -> &LevyModel {
        &self.model
    }

    pub fn n_nodes(&self) -> usize {
        self.nodes.len()
    }

    /// phi_t(w) - 1 at the positive-x contour nodes; the negative side is
    /// the complex conjugate by Schwarz reflection.
    pub fn phi_row(&self, t: f64) -> Vec<C> {
        self.kappa.iter().map(|&k| cexpm1(t * k)).collect()
    }

    pub fn phi_rows(&self, ts: &[f64]) -> Vec<Vec<C>> {
        ts.iter().map(|&t| self.phi_row(t)).collect()
    }

    /// Closed-form integral of the truncated kernel over [-A, A], which by
    /// the vanishing of the kernel's total integral equals minus its tail.
    fn kernel_correction(&self, beta: C) -> C {
        let a = self.a_max;
        let c = self.c;
        let l1 = -I * ((C::new(a, c)).ln() - (C::new(-a, c)).ln());
        let s = beta - c;
        let l2 = -I * ((s + I * a).ln() - (s - I * a).ln());
        l1 - l2
    }

    /// g(t, beta) = E[(1 - e^{-beta L_t}) 1_{L_t > 0}] from a phi row.
    pub fn g_from_row(&self, row: &[C], beta: C) -> C {
        debug_assert!(beta.re > self.c, "Re(beta) must exceed the contour height");
        let c = self.c;
        let mut acc = C::new(0.0, 0.0);
        for j in 0..self.nodes.len() {
            let x = self.nodes[j];
            let wp = C::new(x, c);
            let wm = C::new(-x, c);
            let kp = beta / ((I * wp) * (beta + I * wp));
            let km = beta / ((I * wm) * (beta + I * wm));
            acc += self.weights[j] * (row[j] * kp + row[j].conj() * km);
        }
        (acc + self.kernel_correction(beta)) / (2.0 * std::f64::consts::PI)
    }

    pub fn g(&self, t: f64, beta: C) -> C {
        self.g_from_row(&self.phi_row(t), beta)
    }

    /// P(L_t > 0).
    pub fn mass_positive(&self, t: f64) -> f64 {
        let row = self.phi_row(t);
        let c = self.c;
        let mut acc = C::new(0.0, 0.0);
        for j in 0..self.nodes.len() {
            let x = self.nodes[j];
            acc += self.weights[j]
                * (row[j] / (I * C::new(x, c)) + row[j].conj() / (I * C::new(-x, c)));
        }
        let a = self.a_max;
        let l1 = -I * ((C::new(a, c)).ln() - (C::new(-a, c)).ln());
        0.5 + ((acc + l1 - std::f64::consts::PI) / (2.0 * std::f64::consts::PI)).re
    }

    /// E[e^{-beta L_t} 1_{L_t > 0}].
    pub fn half_line_expectation(&self, t: f64, beta: C) -> C {
        C::new(self.mass_positive(t), 0.0) - self.g(t, beta)
    }
}
