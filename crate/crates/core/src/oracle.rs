//! Independent cross-checks: Monte Carlo simulation of terminal values and
//! running extrema, and Brownian closed forms (reflection / ladder factors).

use num_complex::Complex64;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Gamma, InverseGaussian, StandardNormal};
use rayon::prelude::*;

use crate::error::{EngineError, Result};
use crate::models::{Family, LevyModel};
use crate::pricing::Product;
use crate::transition::{marginal_law, GridConfig};

type C = Complex64;

#[derive(Clone, Copy, Debug)]
pub struct McConfig {
    pub n_paths: usize,
    pub n_steps: usize,
    pub seed: u64,
    pub antithetic: bool,
}

impl McConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_paths < 1000 || self.n_steps < 100 {
            return Err(EngineError::ParameterDomain(
                "Monte Carlo needs at least 1000 paths and 100 steps".into(),
            ));
        }
        Ok(())
    }
}

/// Direction of the discretization bias: discrete monitoring can only miss
/// excursions, so the sampled supremum under- and infimum over-estimates.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BiasNote {
    SupUnderestimated,
    InfOverestimated,
    None,
}

#[derive(Clone, Copy, Debug)]
pub struct McEstimate {
    pub value: f64,
    pub std_error: f64,
    pub bias_note: BiasNote,
}

#[derive(Clone, Copy, Debug, Default)]
pub struct PathExtrema {
    pub terminal: f64,
    pub sup: f64,
    pub inf: f64,
}

/// Per-step increment sampler. Brownian, VG (gamma difference) and NIG
/// (inverse-Gaussian subordination) are exact; the remaining families draw
/// from the numerically inverted marginal law of one step.
enum Stepper {
    Brownian { mean: f64, sd: f64 },
    Vg { drift: f64, sd: f64, std_gamma: Gamma<f64>, inv_m: f64, inv_g: f64 },
    Nig { drift: f64, beta: f64, var0: f64, ig: InverseGaussian<f64> },
    Table { xs: Vec<f64>, cdf: Vec<f64>, atom_x: f64, atom_u: f64 },
}

impl Stepper {
    fn new(model: &LevyModel, dt: f64) -> Result<Stepper> {
        let b = model.drift_b;
        let c = model.diffusion_c;
        Ok(match model.family {
            Family::Brownian => Stepper::Brownian { mean: b * dt, sd: (c * dt).sqrt() },
            Family::Vg { c: cv, g, m } => Stepper::Vg {
                drift: b * dt,
                sd: (c * dt).sqrt(),
                std_gamma: Gamma::new(cv * dt, 1.0).map_err(|e| {
                    EngineError::ParameterDomain(format!("gamma step: {e}"))
                })?,
                inv_m: 1.0 / m,
                inv_g: 1.0 / g,
            },
            Family::Nig { alpha, beta, delta } => {
                let gamma = (alpha * alpha - beta * beta).sqrt();
                Stepper::Nig {
                    drift: b * dt,
                    beta,
                    var0: c * dt,
                    ig: InverseGaussian::new(delta * dt / gamma, (delta * dt).powi(2))
                        .map_err(|e| {
                            EngineError::ParameterDomain(format!("subordinator step: {e}"))
                        })?,
                }
            }
            _ => {
                // Small steps concentrate the density; refine the automatic
                // grid so the mass check and the quantile table stay sharp.
                let mut cfg = GridConfig::auto(model, dt)?;
                cfg.n_x = cfg.n_x.max(1 << 14);
                cfg.n_freq = (cfg.n_freq * 2).min(1 << 21);
                let law = marginal_law(model, dt, &cfg)?;
                let n = law.x_nodes.len();
                let mut cdf = Vec::with_capacity(n);
                let mut acc = 0.0f64;
                cdf.push(0.0);
                for i in 1..n {
                    let h = law.x_nodes[i] - law.x_nodes[i - 1];
                    acc += 0.5 * h * (law.density[i] + law.density[i - 1]);
                    cdf.push(acc);
                }
                // A finite-activity step keeps an atom at the pure-drift
                // point; everything else is numerical mass defect.
                let atom_u = acc.min(1.0);
                let atom_x =
                    if model.path_properties().infinite_activity { 0.0 } else { b * dt };
                Stepper::Table { xs: law.x_nodes.clone(), cdf, atom_x, atom_u }
            }
        })
    }

    /// One increment; `flip` selects the antithetic branch (normals negated,
    /// uniforms reflected, shared subordinator).
    fn draw(&self, rng: &mut ChaCha8Rng, flip: bool) -> f64 {
        let sgn = if flip { -1.0 } else { 1.0 };
        match self {
            Stepper::Brownian { mean, sd } => {
                let z: f64 = rng.sample(StandardNormal);
                mean + sd * sgn * z
            }
            Stepper::Vg { drift, sd, std_gamma, inv_m, inv_g } => {
                // Gamma-difference step; the antithetic branch swaps the two
                // standardized draws, which preserves the law of each leg.
                let g1: f64 = rng.sample(*std_gamma);
                let g2: f64 = rng.sample(*std_gamma);
                let (gp, gn) = if flip { (g2, g1) } else { (g1, g2) };
                let mut x = drift + gp * inv_m - gn * inv_g;
                if *sd > 0.0 {
                    let z: f64 = rng.sample(StandardNormal);
                    x += sd * sgn * z;
                }
                x
            }
            Stepper::Nig { drift, beta, var0, ig } => {
                let zt: f64 = rng.sample(*ig).max(0.0);
                let z: f64 = rng.sample(StandardNormal);
                drift + beta * zt + (zt + var0).sqrt() * sgn * z
            }
            Stepper::Table { xs, cdf, atom_x, atom_u } => {
                let u = reflect(rng.gen::<f64>(), flip) * cdf.last().unwrap().max(*atom_u);
                if u >= *atom_u {
                    return *atom_x;
                }
                let j = cdf.partition_point(|&v| v < u).clamp(1, xs.len() - 1);
                let (c0, c1) = (cdf[j - 1], cdf[j]);
                let s = if c1 > c0 { (u - c0) / (c1 - c0) } else { 0.5 };
                xs[j - 1] + s * (xs[j] - xs[j - 1])
            }
        }
    }
}

fn reflect(u: f64, flip: bool) -> f64 {
    let u = u.clamp(1e-12, 1.0 - 1e-12);
    if flip {
        1.0 - u
    } else {
        u
    }
}

/// Simulate terminal log value and discretely monitored running extrema of
/// the log process. Deterministic for a given config: each path (or
/// antithetic pair) owns one counter-mode stream of the generator, and the
/// reduction runs in path-index order.
pub fn simulate_terminal_and_extrema(
    model: &LevyModel,
    t: f64,
    cfg: &McConfig,
) -> Result<Vec<PathExtrema>> {
    cfg.validate()?;
    model.validate()?;
    if t <= 0.0 {
        return Err(EngineError::ParameterDomain("t must be positive".into()));
    }
    let dt = t / cfg.n_steps as f64;
    let stepper = Stepper::new(model, dt)?;
    let seed = cfg.seed;
    let anti = cfg.antithetic;
    let paths: Vec<PathExtrema> = (0..cfg.n_paths)
        .into_par_iter()
        .map(|p| {
            let (stream, flip) = if anti { ((p / 2) as u64, p % 2 == 1) } else { (p as u64, false) };
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(stream);
            let mut x = 0.0f64;
            let mut sup = 0.0f64;
            let mut inf = 0.0f64;
            for _ in 0..cfg.n_steps {
                x += stepper.draw(&mut rng, flip);
                sup = sup.max(x);
                inf = inf.min(x);
            }
            PathExtrema { terminal: x, sup, inf }
        })
        .collect();
    Ok(paths)
}

fn summarize(samples: &[f64], pair_averages: bool, bias_note: BiasNote) -> McEstimate {
    let reduced: Vec<f64> = if pair_averages {
        samples.chunks(2).map(|c| c.iter().sum::<f64>() / c.len() as f64).collect()
    } else {
        samples.to_vec()
    };
    let n = reduced.len() as f64;
    let mean = reduced.iter().sum::<f64>() / n;
    let var = reduced.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    McEstimate { value: mean, std_error: (var / n).sqrt(), bias_note }
}

/// Monte Carlo price of a path-dependent product on S = s0 e^X.
pub fn mc_price(
    model: &LevyModel,
    s0: f64,
    t: f64,
    product: &Product,
    discount_r: f64,
    cfg: &McConfig,
) -> Result<McEstimate> {
    if !(s0 > 0.0) {
        return Err(EngineError::ParameterDomain("s0 must be positive".into()));
    }
    let paths = simulate_terminal_and_extrema(model, t, cfg)?;
    let disc = (-discount_r * t).exp();
    let (payoffs, note): (Vec<f64>, BiasNote) = match product {
        Product::LookbackCall { k } => (
            paths.iter().map(|p| disc * (s0 * p.sup.exp() - k).max(0.0)).collect(),
            BiasNote::SupUnderestimated,
        ),
        Product::LookbackPut { k } => (
            paths.iter().map(|p| disc * (k - s0 * p.inf.exp()).max(0.0)).collect(),
            BiasNote::InfOverestimated,
        ),
        Product::OneTouchUp { b } => (
            paths
                .iter()
                .map(|p| if s0 * p.sup.exp() >= *b { disc } else { 0.0 })
                .collect(),
            BiasNote::SupUnderestimated,
        ),
        Product::DigitalDown { b } => (
            paths
                .iter()
                .map(|p| if s0 * p.inf.exp() <= *b { disc } else { 0.0 })
                .collect(),
            BiasNote::InfOverestimated,
        ),
        Product::Eds { .. } => {
            return Err(EngineError::ParameterDomain(
                "default-swap premia are cross-checked against closed forms, not Monte Carlo"
                    .into(),
            ))
        }
    };
    Ok(summarize(&payoffs, cfg.antithetic, note))
}

/// Mean of e^{terminal}; equals 1 under a martingale-adjusted model.
pub fn mc_terminal_exp_mean(model: &LevyModel, t: f64, cfg: &McConfig) -> Result<McEstimate> {
    let paths = simulate_terminal_and_extrema(model, t, cfg)?;
    let vals: Vec<f64> = paths.iter().map(|p| p.terminal.exp()).collect();
    Ok(summarize(&vals, cfg.antithetic, BiasNote::None))
}

/// Closed forms for the Brownian model with drift b and variance c per unit
/// time, used as exact oracles.
pub mod bm_closed_form {
    use super::C;
    use statrs::distribution::{ContinuousCDF, Normal};

    fn phi(x: f64) -> f64 {
        Normal::new(0.0, 1.0).unwrap().cdf(x)
    }

    /// Positive root of c/2 l^2 + b l = q: decay rate of the ascending
    /// ladder height at rate q.
    pub fn lambda_plus(q: f64, b: f64, c: f64) -> f64 {
        (-b + (b * b + 2.0 * c * q).sqrt()) / c
    }

    /// Magnitude of the negative root: descending ladder decay rate.
    pub fn lambda_minus(q: f64, b: f64, c: f64) -> f64 {
        (b + (b * b + 2.0 * c * q).sqrt()) / c
    }

    /// E[e^{-beta sup}] at an Exp(q) time: lambda+ / (lambda+ + beta).
    pub fn ladder_ratio(q: f64, beta: C, b: f64, c: f64) -> C {
        let lp = lambda_plus(q, b, c);
        lp / (beta + lp)
    }

    /// P(sup_t >= x) for x >= 0, by reflection.
    pub fn sup_tail(x: f64, t: f64, b: f64, c: f64) -> f64 {
        if x <= 0.0 {
            return 1.0;
        }
        let sd = (c * t).sqrt();
        phi(-(x - b * t) / sd) + (2.0 * b * x / c).exp() * phi(-(x + b * t) / sd)
    }

    /// P(sup_t <= x).
    pub fn sup_cdf(x: f64, t: f64, b: f64, c: f64) -> f64 {
        1.0 - sup_tail(x, t, b, c)
    }

    /// P(first passage below -h happens by t), h > 0 (inverse-Gaussian law).
    pub fn first_passage_cdf(h: f64, t: f64, b: f64, c: f64) -> f64 {
        sup_tail(h, t, -b, c)
    }

    /// E[(s0 e^{sup} - k)^+] by integrating the reflection tail.
    pub fn lookback_call(s0: f64, k: f64, t: f64, b: f64, c: f64) -> f64 {
        let lo = (k / s0).ln().max(0.0);
        crate::quad::adaptive_simpson(
            |x: f64| s0 * x.exp() * sup_tail(x, t, b, c),
            lo,
            lo + 10.0 * (c * t).sqrt() + (b.abs() + c) * t,
            1e-11,
        )
    }

    /// E[(k - s0 e^{inf})^+]; inf of (b, c) is -sup of (-b, c).
    pub fn lookback_put(s0: f64, k: f64, t: f64, b: f64, c: f64) -> f64 {
        let hi = (k / s0).ln().min(0.0);
        crate::quad::adaptive_simpson(
            |x: f64| s0 * x.exp() * sup_tail(-x, t, -b, c),
            hi - 10.0 * (c * t).sqrt() - (b.abs() + c) * t,
            hi,
            1e-11,
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn cfg(seed: u64, antithetic: bool) -> McConfig {
        McConfig { n_paths: 4000, n_steps: 200, seed, antithetic }
    }

    #[test]
    fn deterministic_for_fixed_seed() {
        let m = LevyModel::new(Family::Nig { alpha: 5.0, beta: -1.0, delta: 0.5 }, 0.05, 0.0)
            .unwrap();
        let a = simulate_terminal_and_extrema(&m, 1.0, &cfg(7, true)).unwrap();
        let b = simulate_terminal_and_extrema(&m, 1.0, &cfg(7, true)).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.terminal, y.terminal);
            assert_eq!(x.sup, y.sup);
            assert_eq!(x.inf, y.inf);
        }
    }

    #[test]
    fn discrete_supremum_biased_low() {
        // E[sup of std BM on [0,1]] = sqrt(2/pi) = 0.7978846; discrete
        // monitoring must land below it.
        let m = LevyModel::new(Family::Brownian, 0.0, 1.0).unwrap();
        let paths =
            simulate_terminal_and_extrema(&m, 1.0, &McConfig { n_paths: 20000, n_steps: 200, seed: 3, antithetic: false })
                .unwrap();
        let mean = paths.iter().map(|p| p.sup).sum::<f64>() / paths.len() as f64;
        let target = (2.0 / std::f64::consts::PI).sqrt();
        assert!(mean < target, "discrete sup mean {mean} above the continuous value");
        assert!(mean > target - 0.06, "discrete sup mean {mean} implausibly low");
    }

    #[test]
    fn martingale_terminal_mean_within_three_se() {
        for m in [
            LevyModel::new(Family::Nig { alpha: 5.0, beta: -1.0, delta: 0.5 }, 0.0, 0.0)
                .unwrap()
                .martingale_adjust()
                .unwrap(),
            LevyModel::new(Family::Vg { c: 4.0, g: 20.0, m: 25.0 }, 0.0, 0.0)
                .unwrap()
                .martingale_adjust()
                .unwrap(),
        ] {
            let est = mc_terminal_exp_mean(&m, 1.0, &cfg(11, true)).unwrap();
            assert!(
                (est.value - 1.0).abs() <= 3.0 * est.std_error,
                "mean {} +- {}",
                est.value,
                est.std_error
            );
        }
    }

    #[test]
    fn antithetic_reduces_variance() {
        let m = LevyModel::new(Family::Brownian, -0.02, 0.04).unwrap();
        let prod = Product::LookbackCall { k: 1.0 };
        let spread = |anti: bool| -> f64 {
            let vals: Vec<f64> = (0..20)
                .map(|s| {
                    mc_price(
                        &m,
                        1.0,
                        1.0,
                        &prod,
                        0.0,
                        &McConfig { n_paths: 1000, n_steps: 100, seed: 100 + s, antithetic: anti },
                    )
                    .unwrap()
                    .value
                })
                .collect();
            let mean = vals.iter().sum::<f64>() / vals.len() as f64;
            vals.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (vals.len() - 1) as f64
        };
        let plain = spread(false);
        let anti = spread(true);
        assert!(anti < plain, "antithetic variance {anti} not below plain {plain}");
    }

    #[test]
    fn table_sampler_matches_exact_moments() {
        // Meixner steps only have the table route; compare the simulated
        // terminal mean/variance with the cumulant derivatives.
        let m = LevyModel::new(Family::Meixner { alpha: 0.3, beta: 0.2, delta: 1.0 }, 0.0, 0.0)
            .unwrap();
        let t = 1.0;
        let h = 1e-4;
        let k = |u: f64| m.cumulant(C::new(u, 0.0)).unwrap().re;
        let mean_exact = t * (k(h) - k(-h)) / (2.0 * h);
        let var_exact = t * (k(h) - 2.0 * k(0.0) + k(-h)) / (h * h);
        let paths = simulate_terminal_and_extrema(&m, t, &cfg(5, false)).unwrap();
        let n = paths.len() as f64;
        let mean = paths.iter().map(|p| p.terminal).sum::<f64>() / n;
        let var = paths.iter().map(|p| (p.terminal - mean).powi(2)).sum::<f64>() / (n - 1.0);
        assert!((mean - mean_exact).abs() < 4.0 * (var / n).sqrt() + 5e-3);
        assert!((var - var_exact).abs() < 0.1 * var_exact + 5e-3);
    }

    #[test]
    fn bm_ladder_factors_satisfy_wh_identity() {
        let (b, c, q) = (0.1, 0.5, 2.0);
        let m = LevyModel::new(Family::Brownian, b, c).unwrap();
        for &z in &[0.5f64, 2.0, 17.0] {
            let iz = C::new(0.0, z);
            let kappa = m.cumulant(iz).unwrap();
            let full = q / (C::new(q, 0.0) - kappa);
            let fp = bm_closed_form::ladder_ratio(q, -iz, b, c);
            let fm = bm_closed_form::lambda_minus(q, b, c)
                / (C::new(bm_closed_form::lambda_minus(q, b, c), 0.0) + iz);
            assert!((full - fp * fm).norm() < 1e-12, "z={z}: {full} vs {}", fp * fm);
        }
    }

    #[test]
    fn bm_sup_cdf_reference_point() {
        let v = bm_closed_form::sup_cdf(1.0, 1.0, 0.0, 1.0);
        let n = statrs::distribution::Normal::new(0.0, 1.0).unwrap();
        use statrs::distribution::ContinuousCDF;
        assert_relative_eq!(v, 2.0 * n.cdf(1.0) - 1.0, epsilon = 1e-12);
    }

    #[test]
    fn config_validation() {
        let m = LevyModel::new(Family::Brownian, 0.0, 1.0).unwrap();
        let bad = McConfig { n_paths: 10, n_steps: 200, seed: 1, antithetic: false };
        assert!(simulate_terminal_and_extrema(&m, 1.0, &bad).is_err());
    }
}
