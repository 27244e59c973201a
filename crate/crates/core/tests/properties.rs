//! Property-based checks on the model layer and the Brownian closed forms;
//! everything here is cheap enough to run hundreds of cases.

use levywh::models::{Family, LevyModel};
use levywh::oracle::bm_closed_form;
use num_complex::Complex64;
use proptest::prelude::*;

type C = Complex64;

fn nig_strategy() -> impl Strategy<Value = LevyModel> {
    (2.0..12.0f64, -1.5..1.5f64, 0.2..1.5f64, -0.5..0.5f64)
        .prop_filter_map("strip too narrow", |(alpha, beta, delta, b)| {
            LevyModel::new(Family::Nig { alpha, beta, delta }, b, 0.0).ok()
        })
}

fn vg_strategy() -> impl Strategy<Value = LevyModel> {
    (1.0..8.0f64, 3.0..15.0f64, 3.0..15.0f64, -0.5..0.5f64)
        .prop_filter_map("invalid", |(c, g, m, b)| {
            LevyModel::new(Family::Vg { c, g, m }, b, 0.0).ok()
        })
}

fn any_model() -> impl Strategy<Value = LevyModel> {
    prop_oneof![
        nig_strategy(),
        vg_strategy(),
        (0.01..2.0f64, -1.0..1.0f64).prop_map(|(c, b)| {
            LevyModel::new(Family::Brownian, b, c).unwrap()
        }),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn cumulant_vanishes_at_zero(m in any_model()) {
        let k0 = m.cumulant(C::new(0.0, 0.0)).unwrap();
        prop_assert!(k0.norm() < 1e-12, "kappa(0) = {k0}");
    }

    #[test]
    fn characteristic_modulus_peaks_on_the_real_axis(
        m in any_model(),
        u in -15.0..15.0f64,
        frac in 0.05..0.9f64,
    ) {
        let strip = m.moment_strip().unwrap();
        let v = frac * strip.m_safe;
        let off = m.cumulant(C::new(v, u)).unwrap();
        let on = m.cumulant(C::new(v, 0.0)).unwrap();
        // |E e^{(v+iu) L}| <= E e^{v L}
        prop_assert!(off.re <= on.re + 1e-10, "Re kappa {} > {}", off.re, on.re);
    }

    #[test]
    fn martingale_adjustment_is_exact(m in any_model()) {
        let strip = m.moment_strip().unwrap();
        prop_assume!(strip.m_safe > 1.0);
        let adj = m.martingale_adjust().unwrap();
        let k1 = adj.cumulant(C::new(1.0, 0.0)).unwrap();
        prop_assert!(k1.norm() < 1e-12, "kappa(1) = {k1}");
    }

    #[test]
    fn dual_mirrors_the_cumulant(m in any_model(), u in -5.0..5.0f64) {
        let strip = m.moment_strip().unwrap();
        prop_assume!(u > strip.u_min && u < strip.u_max);
        let k = m.cumulant(C::new(u, 0.0)).unwrap();
        let kd = m.dual().cumulant(C::new(-u, 0.0)).unwrap();
        prop_assert!((k - kd).norm() < 1e-10 * (1.0 + k.norm()));
    }

    #[test]
    fn brownian_factors_multiply_to_the_resolvent(
        b in -1.0..1.0f64,
        c in 0.05..3.0f64,
        q in 0.2..5.0f64,
        z in -20.0..20.0f64,
    ) {
        // q / (q - kappa(iz)) = phi+ * phi- with the quadratic-root factors.
        let iz = C::new(0.0, z);
        let kappa = b * iz + 0.5 * c * iz * iz;
        let rhs = q / (q - kappa);
        let plus = bm_closed_form::ladder_ratio(q, -iz, b, c);
        let minus = {
            let lm = bm_closed_form::lambda_minus(q, b, c);
            lm / (iz + lm)
        };
        prop_assert!((plus * minus - rhs).norm() < 1e-10);
    }

    #[test]
    fn first_passage_law_is_a_cdf(
        b in -1.0..1.0f64,
        c in 0.05..2.0f64,
        h in 0.05..3.0f64,
        t in (0.05..5.0f64),
    ) {
        let f = |s: f64| bm_closed_form::first_passage_cdf(h, s, b, c);
        let v = f(t);
        prop_assert!((0.0..=1.0).contains(&v));
        prop_assert!(f(t * 1.5) >= v - 1e-12, "not monotone in t");
        prop_assert!(
            bm_closed_form::first_passage_cdf(h * 2.0, t, b, c) <= v + 1e-12,
            "not monotone in level"
        );
    }

    #[test]
    fn config_grid_flattening_preserves_order(
        barriers in proptest::collection::vec(1.01..3.0f64, 1..6),
        t in 0.1..2.0f64,
    ) {
        let cfg = format!(
            r#"{{
                "model": {{"family": "nig", "params": {{"alpha": 8.0, "beta": -1.0, "delta": 0.8}}, "drift": "auto"}},
                "market": {{"s0": 1.0}},
                "products": [{{"type": "one_touch_up", "barriers": {barriers:?}, "maturity": {t}}}]
            }}"#
        );
        let job = levywh::cli::parse_config(&cfg).unwrap();
        prop_assert_eq!(job.points.len(), barriers.len());
        for (p, b) in job.points.iter().zip(&barriers) {
            prop_assert_eq!(p.grid_value, *b);
            prop_assert_eq!(p.t, t);
        }
    }
}
