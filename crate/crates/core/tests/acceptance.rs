//! Acceptance suite: one test per criterion, each printing a single
//! pass/fail line. Oracles are closed-form Brownian identities, Monte Carlo
//! simulation, and internal consistency (contour invariance, monotonicity).

use levywh::cli;
use levywh::inversion::{default_contour, ContourConfig, Refinement};
use levywh::models::{Family, LevyModel};
use levywh::oracle::{bm_closed_form, simulate_terminal_and_extrema, McConfig, PathExtrema};
use levywh::pricing::{self, EdsSchedule, PricingRequest, Product};
use levywh::quad::gauss_laguerre;
use levywh::wienerhopf::{LadderQuery, Side, WhConfig, WhEngine};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type C = Complex64;

fn report(n: u32, what: &str, res: Result<(), String>) {
    match res {
        Ok(()) => println!("criterion {n:2} ({what}): PASS"),
        Err(m) => {
            println!("criterion {n:2} ({what}): FAIL - {m}");
            panic!("criterion {n} failed: {m}");
        }
    }
}

fn mart(family: Family, c: f64) -> LevyModel {
    LevyModel::new(family, 0.0, c).unwrap().martingale_adjust().unwrap()
}

fn brownian_m() -> LevyModel {
    mart(Family::Brownian, 0.04)
}
fn nig_m() -> LevyModel {
    mart(Family::Nig { alpha: 8.0, beta: -1.0, delta: 0.8 }, 0.0)
}
fn vg_m() -> LevyModel {
    mart(Family::Vg { c: 4.0, g: 8.0, m: 10.0 }, 0.0)
}
fn cgmy_m() -> LevyModel {
    mart(Family::Cgmy { c: 0.5, g: 6.0, m: 9.0, y: 1.2 }, 0.0)
}
fn meixner_m() -> LevyModel {
    mart(Family::Meixner { alpha: 0.3, beta: -0.5, delta: 1.5 }, 0.0)
}
fn gh_m() -> LevyModel {
    mart(Family::Gh { lambda: 1.0, alpha: 6.0, beta: -1.0, delta: 0.5 }, 0.0)
}

fn catalog() -> Vec<(&'static str, LevyModel)> {
    vec![
        ("brownian", brownian_m()),
        ("nig", nig_m()),
        ("vg", vg_m()),
        ("cgmy", cgmy_m()),
        ("meixner", meixner_m()),
        ("gh", gh_m()),
    ]
}

fn req(model: LevyModel, s0: f64, t: f64, product: Product) -> PricingRequest {
    PricingRequest { model, s0, t, product, r_damp: None, contour: None, discount_r: 0.0 }
}

// ---------------------------------------------------------------------------

#[test]
fn criterion_01_wh_identity() {
    let models: Vec<(&str, LevyModel)> = vec![
        ("brownian", brownian_m()),
        ("vg", vg_m()),
        ("nig", nig_m()),
        ("cgmy", cgmy_m()),
        ("meixner", meixner_m()),
    ];
    report(1, "factor identity residual over five model families", (|| {
        for (name, m) in &models {
            let r = cli::wh_identity_residual(m).map_err(|e| format!("{name}: {e}"))?;
            if !(r <= 1e-3) {
                return Err(format!("{name}: residual {r:.3e} > 1e-3"));
            }
        }
        Ok(())
    })());
}

#[test]
fn criterion_02_brownian_ladder_closed_form() {
    report(2, "brownian ladder ratio vs quadratic-root closed form", (|| {
        for &(b, c, q) in &[(0.0, 2.0, 1.0), (0.3, 1.0, 1.5), (-0.2, 0.5, 2.0)] {
            let m = LevyModel::new(Family::Brownian, b, c).map_err(|e| e.to_string())?;
            let eng = WhEngine::new(
                &m,
                &WhConfig { re_beta_min: 0.0, im_beta_max: 25.0, q_re_min: q, refine: 1.0 },
            )
            .map_err(|e| e.to_string())?;
            for i in 0..20 {
                let beta = 0.1 + 4.9 * i as f64 / 19.0;
                let got = eng
                    .ladder_ratio(&LadderQuery {
                        q: C::new(q, 0.0),
                        beta: C::new(beta, 0.0),
                        side: Side::Ascending,
                    })
                    .map_err(|e| e.to_string())?
                    .ratio;
                let want = bm_closed_form::ladder_ratio(q, C::new(beta, 0.0), b, c);
                let rel = (got - want).norm() / want.norm();
                if !(rel <= 1e-4) {
                    return Err(format!(
                        "(b,c,q)=({b},{c},{q}) beta={beta}: rel err {rel:.3e}"
                    ));
                }
            }
        }
        Ok(())
    })());
}

#[test]
fn criterion_03_laplace_round_trip() {
    report(3, "time-domain inversion integrates back to the ladder ratio", (|| {
        for (name, m) in [("nig", nig_m()), ("vg", vg_m())] {
            let strip = m.moment_strip().map_err(|e| e.to_string())?;
            let q = levywh::analysis::min_abscissa(&m, strip.m_safe)
                .map_err(|e| e.to_string())?
                + 1.0;
            let cfg = default_contour(&m, 0.0).map_err(|e| e.to_string())?;
            let eng = WhEngine::new(
                &m,
                &WhConfig {
                    re_beta_min: 0.0,
                    im_beta_max: 10.0,
                    q_re_min: q.min(cfg.y),
                    refine: 1.0,
                },
            )
            .map_err(|e| e.to_string())?;
            let (xs, ws) = gauss_laguerre(24);
            for &beta in &[0.5, 1.0, 2.0] {
                let bc = C::new(beta, 0.0);
                // q int e^{-qt} f(t) dt via Gauss-Laguerre, f bounded by 1
                // so nodes with negligible weight are dropped.
                let mut lhs = 0.0;
                for (&x, &w) in xs.iter().zip(&ws) {
                    if w < 1e-10 {
                        continue;
                    }
                    let f = levywh::inversion::sup_laplace_with(
                        &eng,
                        x / q,
                        bc,
                        &cfg,
                        Side::Ascending,
                    )
                    .map_err(|e| e.to_string())?;
                    lhs += w * f.value.re;
                }
                let rhs = eng
                    .ladder_ratio(&LadderQuery { q: C::new(q, 0.0), beta: bc, side: Side::Ascending })
                    .map_err(|e| e.to_string())?
                    .ratio
                    .re;
                let err = (lhs - rhs).abs();
                if !(err <= 1e-3) {
                    return Err(format!("{name} beta={beta}: |{lhs} - {rhs}| = {err:.3e}"));
                }
            }
        }
        Ok(())
    })());
}

#[test]
fn criterion_04_brownian_one_touch() {
    report(4, "brownian one-touch vs reflection value, monotone in barrier", (|| {
        let m = LevyModel::new(Family::Brownian, 0.0, 1.0).map_err(|e| e.to_string())?;
        let barriers = [1.5, 2.0, std::f64::consts::E, 3.0];
        let mut prices = Vec::new();
        for &b in &barriers {
            let r = pricing::price(&req(m.clone(), 1.0, 1.0, Product::OneTouchUp { b }))
                .map_err(|e| e.to_string())?;
            prices.push(r.price);
        }
        let want = 0.31731050786291415; // 2(1 - Phi(1))
        let got = prices[2];
        if !((got - want).abs() <= 5e-3) {
            return Err(format!("price {got} vs {want}"));
        }
        for w in prices.windows(2) {
            if !(w[1] <= w[0]) {
                return Err(format!("not monotone: {prices:?}"));
            }
        }
        Ok(())
    })());
}

#[test]
fn criterion_05_brownian_sup_laplace_point() {
    report(5, "brownian transform point value E e^{-sup}", (|| {
        let m = LevyModel::new(Family::Brownian, 0.0, 1.0).map_err(|e| e.to_string())?;
        let cfg = default_contour(&m, 0.0).map_err(|e| e.to_string())?;
        let got = levywh::inversion::sup_laplace(
            &m,
            1.0,
            C::new(1.0, 0.0),
            &cfg,
            Side::Ascending,
        )
        .map_err(|e| e.to_string())?
        .value
        .re;
        // E e^{-|Z|} = 2 e^{1/2} Phi(-1)
        let want = 0.523160;
        if !((got - want).abs() <= 1e-3) {
            return Err(format!("{got} vs {want}"));
        }
        Ok(())
    })());
}

struct McStat {
    mean: f64,
    se: f64,
}

fn mc_stat(paths: &[PathExtrema], antithetic: bool, payoff: impl Fn(&PathExtrema) -> f64) -> McStat {
    let vals: Vec<f64> = paths.iter().map(payoff).collect();
    let reduced: Vec<f64> = if antithetic {
        vals.chunks(2).map(|c| c.iter().sum::<f64>() / c.len() as f64).collect()
    } else {
        vals
    };
    let n = reduced.len() as f64;
    let mean = reduced.iter().sum::<f64>() / n;
    let var = reduced.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    McStat { mean, se: (var / n).sqrt() }
}

#[test]
fn criterion_06_mc_cross_check() {
    report(6, "nig/vg lookback and one-touch vs simulation", (|| {
        let (s0, t, k, b) = (100.0, 0.5, 100.0, 110.0);
        for (name, m) in [("nig", nig_m()), ("vg", vg_m())] {
            let sim = |n_steps: usize| {
                simulate_terminal_and_extrema(
                    &m,
                    t,
                    &McConfig { n_paths: 1_000_000, n_steps, seed: 20240901, antithetic: true },
                )
                .map_err(|e| format!("{name}: {e}"))
            };
            let coarse = sim(2000)?;
            let fine = sim(4000)?;
            let payoffs: [(&str, Box<dyn Fn(&PathExtrema) -> f64>); 2] = [
                ("lookback_call", Box::new(move |p| (s0 * p.sup.exp() - k).max(0.0))),
                ("one_touch", Box::new(move |p| if s0 * p.sup.exp() >= b { 1.0 } else { 0.0 })),
            ];
            let engine: [f64; 2] = [
                pricing::price(&req(m.clone(), s0, t, Product::LookbackCall { k }))
                    .map_err(|e| format!("{name}: {e}"))?
                    .price,
                pricing::price(&req(m.clone(), s0, t, Product::OneTouchUp { b }))
                    .map_err(|e| format!("{name}: {e}"))?
                    .price,
            ];
            for (i, (pname, f)) in payoffs.iter().enumerate() {
                let mc = mc_stat(&coarse, true, f);
                let mc_fine = mc_stat(&fine, true, f);
                // Grid sampling underestimates the supremum; Richardson at
                // order 1/2 puts the coarse bias near 3.41x the halving step.
                let margin = 3.42 * (mc_fine.mean - mc.mean).abs() + 3.0 * mc_fine.se;
                let diff = engine[i] - mc.mean;
                if !(diff.abs() <= 3.0 * mc.se + margin) {
                    return Err(format!(
                        "{name} {pname}: engine {} vs mc {} +- {} (margin {margin:.2e})",
                        engine[i], mc.mean, mc.se
                    ));
                }
                // Bias direction: the simulated sup payoff cannot exceed the
                // engine value by more than noise.
                if !(mc.mean <= engine[i] + 3.0 * mc.se) {
                    return Err(format!(
                        "{name} {pname}: mc {} above engine {} beyond noise",
                        mc.mean, engine[i]
                    ));
                }
            }
        }
        Ok(())
    })());
}

#[test]
fn criterion_07_martingale_normalization() {
    report(7, "adjusted drift kills the exponential growth of e^L", (|| {
        for (name, m) in catalog() {
            let k1 = m.cumulant(C::new(1.0, 0.0)).map_err(|e| format!("{name}: {e}"))?;
            for &t in &[0.25, 1.0, 5.0] {
                let gap = ((t * k1).exp() - 1.0).norm();
                if !(gap <= 1e-10) {
                    return Err(format!("{name} T={t}: |e^(T kappa(1)) - 1| = {gap:.3e}"));
                }
            }
        }
        Ok(())
    })());
}

#[test]
fn criterion_08_trivial_barrier() {
    report(8, "barrier below spot touches with probability one", (|| {
        for (name, m) in catalog() {
            if !m.path_properties().infinite_variation {
                continue;
            }
            let s0 = 100.0;
            let r = pricing::price(&req(m, s0, 0.5, Product::OneTouchUp { b: 0.5 * s0 }))
                .map_err(|e| format!("{name}: {e}"))?;
            if !(r.price >= 0.995 && r.price <= 1.005) {
                return Err(format!("{name}: price {} outside [0.995, 1.005]", r.price));
            }
        }
        Ok(())
    })());
}

#[test]
fn criterion_09_contour_invariance() {
    report(9, "prices independent of dampening and abscissa choices", (|| {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for case in 0..10 {
            let m = if case % 2 == 0 {
                mart(
                    Family::Nig {
                        alpha: rng.gen_range(5.0..10.0),
                        beta: rng.gen_range(-2.0..1.0),
                        delta: rng.gen_range(0.4..1.2),
                    },
                    0.0,
                )
            } else {
                mart(
                    Family::Vg {
                        c: rng.gen_range(2.0..6.0),
                        g: rng.gen_range(6.0..12.0),
                        m: rng.gen_range(6.0..12.0),
                    },
                    0.0,
                )
            };
            let s0 = 1.0;
            let t = rng.gen_range(0.3..0.8);
            let product = match case % 3 {
                0 => Product::OneTouchUp { b: s0 * rng.gen_range(0.05..0.25f64).exp() },
                1 => Product::LookbackPut { k: rng.gen_range(0.9..1.1) },
                _ => Product::DigitalDown { b: rng.gen_range(0.75..0.95) },
            };
            let base = req(m.clone(), s0, t, product.clone());
            let p1 = pricing::price(&base).map_err(|e| format!("case {case}: {e}"))?;

            let mut alt_r = base.clone();
            alt_r.r_damp = Some(0.55 * p1.diagnostics.r);
            let p2 = pricing::price(&alt_r).map_err(|e| format!("case {case} alt R: {e}"))?;

            let mut alt_y = base.clone();
            alt_y.contour = Some(ContourConfig {
                y: 1.3 * p1.diagnostics.y,
                a: 400.0,
                n_nodes: 1024,
                tol: 1e-4,
                refinement: Refinement::Adaptive,
            });
            let p3 = pricing::price(&alt_y).map_err(|e| format!("case {case} alt Y: {e}"))?;

            for (tag, p) in [("R", &p2), ("Y", &p3)] {
                let gap = (p1.price - p.price).abs();
                let tol = 2.0 * (p1.numerical_error + p.numerical_error);
                if !(gap <= tol) {
                    return Err(format!(
                        "case {case} vary {tag}: |{} - {}| = {gap:.3e} > {tol:.3e}",
                        p1.price, p.price
                    ));
                }
            }
        }
        Ok(())
    })());
}

#[test]
fn criterion_10_eds_vs_first_passage_oracle() {
    report(10, "default-swap premium vs inverse-gaussian first passage", (|| {
        let (mu, var) = (0.01, 0.09);
        let m = LevyModel::new(Family::Brownian, mu, var).map_err(|e| e.to_string())?;
        let s0 = 1.0;
        let sched = EdsSchedule {
            premium_dates: vec![0.5, 1.0, 1.5, 2.0],
            barrier_b: 0.7,
            recovery_c: 0.4,
            rate_r: 0.02,
        };
        let h = (s0 / sched.barrier_b).ln();
        let f = |t: f64| bm_closed_form::first_passage_cdf(h, t, mu, var);
        // Protection leg int e^{-rt} dF by fine Stieltjes sum.
        let n = 4000;
        let t_end = 2.0;
        let (mut num, mut prev_t, mut prev_f) = (0.0, 0.0, 0.0);
        for j in 1..=n {
            let t = t_end * j as f64 / n as f64;
            let ft = f(t);
            num += 0.5
                * ((-sched.rate_r * prev_t).exp() + (-sched.rate_r * t).exp())
                * (ft - prev_f);
            prev_t = t;
            prev_f = ft;
        }
        let den: f64 = sched
            .premium_dates
            .iter()
            .map(|&ti| (-sched.rate_r * ti).exp() * (1.0 - f(ti)))
            .sum();
        let oracle = sched.recovery_c * num / den;
        let got = pricing::eds_premium(&m, s0, &sched, None).map_err(|e| e.to_string())?;
        let rel = (got.price - oracle).abs() / oracle;
        if !(rel <= 1e-2) {
            return Err(format!("premium {} vs oracle {oracle}: rel {rel:.3e}", got.price));
        }

        let mut zero = sched.clone();
        zero.recovery_c = 0.0;
        let z = pricing::eds_premium(&m, s0, &zero, None).map_err(|e| e.to_string())?;
        if z.price != 0.0 {
            return Err(format!("zero recovery priced {}", z.price));
        }

        let mut degen = sched.clone();
        degen.barrier_b = 1.1;
        match pricing::eds_premium(&m, s0, &degen, None) {
            Err(levywh::EngineError::DegenerateContract(_)) => Ok(()),
            other => Err(format!("barrier above spot gave {other:?}")),
        }
    })());
}

#[test]
fn criterion_11_cli_determinism() {
    report(11, "golden job writes byte-identical curves", (|| {
        let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
        let config = dir.path().join("job.json");
        std::fs::write(
            &config,
            r#"{
  "model": {"family": "brownian", "params": {"c": 0.04}, "drift": "auto"},
  "market": {"s0": 100.0, "r": 0.0},
  "products": [
    {"type": "lookback_call", "strike": 100.0, "maturity": 0.5},
    {"type": "lookback_put", "strike": 100.0, "maturity": 0.5},
    {"type": "one_touch_up", "barriers": [110.0, 120.0], "maturity": 0.5},
    {"type": "eds", "barrier": 70.0, "recovery": 0.4, "premium_dates": [0.5, 1.0]}
  ]
}"#,
        )
        .map_err(|e| e.to_string())?;
        let bin = env!("CARGO_BIN_EXE_levywh");
        let mut curves = Vec::new();
        for run in 0..2 {
            let out = dir.path().join(format!("out{run}"));
            let status = std::process::Command::new(bin)
                .args(["price", "--config"])
                .arg(&config)
                .arg("--out")
                .arg(&out)
                .status()
                .map_err(|e| e.to_string())?;
            if !status.success() {
                return Err(format!("run {run} exited {status}"));
            }
            curves.push(std::fs::read(out.join("curves.csv")).map_err(|e| e.to_string())?);
        }
        if curves[0] != curves[1] {
            return Err("curves.csv differs between runs".into());
        }
        if curves[0].len() < 60 {
            return Err("curves.csv suspiciously short".into());
        }
        Ok(())
    })());
}
