//! Special functions needed by the model catalog: modified Bessel functions
//! of the second kind (real and complex argument) and stable complex logs.

use num_complex::Complex64;

type C = Complex64;

/// K0(x) for real x > 0, Abramowitz & Stegun 9.8.5-9.8.6 polynomial fits.
pub fn bessel_k0(x: f64) -> f64 {
    assert!(x > 0.0);
    if x <= 2.0 {
        let t = x * x / 4.0;
        let i0 = bessel_i0(x);
        -((x / 2.0).ln()) * i0
            + (-0.57721566
                + t * (0.42278420
                    + t * (0.23069756
                        + t * (0.03488590
                            + t * (0.00262698 + t * (0.00010750 + t * 0.00000740))))))
    } else {
        let t = 2.0 / x;
        (x.exp() * x.sqrt()).recip()
            * (1.25331414
                + t * (-0.07832358
                    + t * (0.02189568
                        + t * (-0.01062446
                            + t * (0.00587872 + t * (-0.00251540 + t * 0.00053208))))))
    }
}

/// K1(x) for real x > 0, Abramowitz & Stegun 9.8.7-9.8.8.
pub fn bessel_k1(x: f64) -> f64 {
    assert!(x > 0.0);
    if x <= 2.0 {
        let t = x * x / 4.0;
        let i1 = bessel_i1(x);
        (x / 2.0).ln() * i1
            + (1.0 / x)
                * (1.0
                    + t * (0.15443144
                        + t * (-0.67278579
                            + t * (-0.18156897
                                + t * (-0.01919402 + t * (-0.00110404 + t * -0.00004686))))))
    } else {
        let t = 2.0 / x;
        (x.exp() * x.sqrt()).recip()
            * (1.25331414
                + t * (0.23498619
                    + t * (-0.03655620
                        + t * (0.01504268
                            + t * (-0.00780353 + t * (0.00325614 + t * -0.00068245))))))
    }
}

fn bessel_i0(x: f64) -> f64 {
    let t = x / 3.75;
    let t2 = t * t;
    1.0 + t2
        * (3.5156229
            + t2 * (3.0899424 + t2 * (1.2067492 + t2 * (0.2659732 + t2 * (0.0360768 + t2 * 0.0045813)))))
}

fn bessel_i1(x: f64) -> f64 {
    let t = x / 3.75;
    let t2 = t * t;
    x * (0.5
        + t2 * (0.87890594
            + t2 * (0.51498869
                + t2 * (0.15084934 + t2 * (0.02658733 + t2 * (0.00301532 + t2 * 0.00032411))))))
}

/// K_nu(z) for complex z with Re z > 0, moderate |z|.
///
/// Uses the ascending series through I_{+-nu} when Re z < 8 (nudging nu off
/// integers, which is accurate to ~1e-6 relative), and the scaled integral
/// representation otherwise.
fn bessel_k_nu_value(nu: f64, z: C) -> C {
    debug_assert!(z.re > 0.0);
    if z.re < 8.0 {
        let mut v = nu.abs();
        if (v - v.round()).abs() < 1e-8 {
            v += 1e-6;
        }
        let half_pi = std::f64::consts::FRAC_PI_2;
        (bessel_i_series(-v, z) - bessel_i_series(v, z)) * half_pi / (v * std::f64::consts::PI).sin()
    } else {
        // K = e^{-z} * int_0^inf e^{-z(cosh s - 1)} cosh(nu s) ds
        let s_max = (1.0 + 45.0 / z.re).acosh();
        let phase_rate = z.im.abs() * s_max.sinh() + 1.0;
        let h = (0.05f64).min(0.45 / phase_rate);
        let n = (s_max / h).ceil() as usize;
        let h = s_max / n as f64;
        let mut acc = C::new(0.5, 0.0); // s = 0 endpoint, integrand = 1
        for k in 1..=n {
            let s = h * k as f64;
            let w = if k == n { 0.5 } else { 1.0 };
            acc += (-(z * (s.cosh() - 1.0))).exp() * (nu * s).cosh() * w;
        }
        (-z).exp() * acc * h
    }
}

fn bessel_i_series(nu: f64, z: C) -> C {
    let half = z / 2.0;
    let mut term = half.powf(nu) / gamma_real(nu + 1.0);
    let q = half * half;
    let mut acc = term;
    for k in 1..400 {
        let kf = k as f64;
        term = term * q / (kf * (nu + kf));
        acc += term;
        if term.norm() < 1e-17 * acc.norm().max(1e-280) {
            break;
        }
    }
    acc
}

/// Real gamma function via Lanczos, valid for negative non-integer arguments.
pub fn gamma_real(x: f64) -> f64 {
    const G: f64 = 7.0;
    const COEF: [f64; 9] = [
        0.99999999999980993,
        676.5203681218851,
        -1259.1392167224028,
        771.32342877765313,
        -176.61502916214059,
        12.507343278686905,
        -0.13857109526572012,
        9.9843695780195716e-6,
        1.5056327351493116e-7,
    ];
    if x < 0.5 {
        std::f64::consts::PI / ((std::f64::consts::PI * x).sin() * gamma_real(1.0 - x))
    } else {
        let x = x - 1.0;
        let mut a = COEF[0];
        for (i, &c) in COEF.iter().enumerate().skip(1) {
            a += c / (x + i as f64);
        }
        let t = x + G + 0.5;
        (2.0 * std::f64::consts::PI).sqrt() * t.powf(x + 0.5) * (-t).exp() * a
    }
}

/// log K_nu(z) on the analytic branch that is real for real z > 0.
///
/// For |z| >= 25 the uniform asymptotic series of the scaled factor is used
/// directly in log form. Closer in, the value is continued along a vertical
/// path from the positive real axis so the imaginary part does not wrap.
pub fn log_bessel_k_nu(nu: f64, z: C) -> C {
    debug_assert!(z.re > 0.0, "log_bessel_k_nu requires Re z > 0, got {z}");
    if z.norm() >= 25.0 {
        let mut term = C::new(1.0, 0.0);
        let mut s = term;
        let mu = 4.0 * nu * nu;
        for k in 1..12 {
            let kf = k as f64;
            term = term * (mu - (2.0 * kf - 1.0) * (2.0 * kf - 1.0)) / (8.0 * kf * z);
            s += term;
            if term.norm() < 1e-16 {
                break;
            }
        }
        -z + 0.5 * (std::f64::consts::PI / (2.0 * z)).ln() + s.ln()
    } else {
        // Walk up from z0 = (Re z, 0), keeping |arg increment| < pi per step.
        let z0 = C::new(z.re, 0.0);
        let mut log_k = C::new(bessel_k_nu_value(nu, z0).re.ln(), 0.0);
        let n_steps = ((z.im.abs() / 1.2).ceil() as usize).max(1);
        let mut prev = bessel_k_nu_value(nu, z0);
        for k in 1..=n_steps {
            let zk = C::new(z.re, z.im * k as f64 / n_steps as f64);
            let cur = bessel_k_nu_value(nu, zk);
            // Multiply by the ratio; each step's ratio has small argument.
            log_k += (cur / prev).ln();
            prev = cur;
        }
        log_k
    }
}

/// log cos(z), stable for large |Im z|, on the branch continuous for
/// Re z in (-pi/2, pi/2).
pub fn log_cos(z: C) -> C {
    let y = z.im;
    if y.abs() <= 20.0 {
        z.cos().ln()
    } else if y > 0.0 {
        let i = C::new(0.0, 1.0);
        -i * z - C::new(std::f64::consts::LN_2, 0.0) + (C::new(1.0, 0.0) + (2.0 * i * z).exp()).ln()
    } else {
        let i = C::new(0.0, 1.0);
        i * z - C::new(std::f64::consts::LN_2, 0.0) + (C::new(1.0, 0.0) + (-2.0 * i * z).exp()).ln()
    }
}
