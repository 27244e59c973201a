//! Panel-based Gauss-Legendre quadrature helpers.

use num_complex::Complex64;

/// Gauss-Legendre nodes and weights on [-1, 1], computed by Newton iteration
/// on the Legendre polynomial roots. Deterministic for a given `n`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 2);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = (n + 1) / 2;
    for i in 0..m {
        // Chebyshev-based initial guess.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            // Legendre recurrence.
            let mut p0 = 1.0;
            let mut p1 = x;
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// A fixed quadrature rule: node/weight pairs on the real line.
#[derive(Clone, Debug)]
pub struct PanelRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl PanelRule {
    /// Assemble a rule from a list of panel edges with `pts` Gauss-Legendre
    /// points per panel.
    pub fn from_edges(edges: &[f64], pts: usize) -> PanelRule {
        let (gx, gw) = gauss_legendre(pts);
        let mut nodes = Vec::with_capacity((edges.len() - 1) * pts);
        let mut weights = Vec::with_capacity(nodes.capacity());
        for w in edges.windows(2) {
            let (a, b) = (w[0], w[1]);
            let c = 0.5 * (a + b);
            let h = 0.5 * (b - a);
            for k in 0..pts {
                nodes.push(c + h * gx[k]);
                weights.push(h * gw[k]);
            }
        }
        PanelRule { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Integrate a complex-valued function over the rule, in node order.
    pub fn integrate<F: FnMut(f64) -> Complex64>(&self, mut f: F) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            acc += f(*x) * *w;
        }
        acc
    }

    /// Integrate a real-valued function over the rule.
    pub fn integrate_real<F: FnMut(f64) -> f64>(&self, mut f: F) -> f64 {
        let mut acc = 0.0;
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            acc += f(*x) * *w;
        }
        acc
    }
}

/// Panel edges growing geometrically from `h0` at the origin up to panels of
/// width `h_max`, covering [0, hi]. Used where integrands are sharpest near 0.
pub fn geometric_edges(h0: f64, h_max: f64, hi: f64, growth: f64) -> Vec<f64> {
    assert!(h0 > 0.0 && hi > 0.0 && growth > 1.0);
    let mut edges = vec![0.0];
    let mut h = h0;
    let mut x = 0.0;
    while x < hi {
        x = (x + h).min(hi);
        edges.push(x);
        h = (h * growth).min(h_max);
    }
    edges
}

/// Log-spaced panel edges on [lo, hi] with `per_decade` panels per decade.
pub fn log_edges(lo: f64, hi: f64, per_decade: usize) -> Vec<f64> {
    assert!(lo > 0.0 && hi > lo);
    let decades = (hi / lo).log10();
    let n = ((decades * per_decade as f64).ceil() as usize).max(1);
    let step = decades / n as f64;
    let mut edges = Vec::with_capacity(n + 1);
    for k in 0..=n {
        edges.push(lo * 10f64.powf(step * k as f64));
    }
    *edges.last_mut().unwrap() = hi;
    edges
}

/// Gauss-Laguerre nodes and weights for int_0^inf e^{-x} f(x) dx.
pub fn gauss_laguerre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 2);
    let nf = n as f64;
    let mut xs = vec![0.0f64; n];
    let mut ws = vec![0.0f64; n];
    let mut z = 0.0f64;
    for i in 0..n {
        z = match i {
            0 => 3.0 / (1.0 + 2.4 * nf),
            1 => z + 15.0 / (1.0 + 2.5 * nf),
            _ => {
                let ai = (i - 1) as f64;
                z + (1.0 + 2.55 * ai) / (1.9 * ai) * (z - xs[i - 2])
            }
        };
        // Laguerre recurrence: returns (L_n(z), L_{n-1}(z)).
        let eval = |z: f64| -> (f64, f64) {
            let mut p1 = 1.0;
            let mut p2 = 0.0;
            for j in 0..n {
                let p3 = p2;
                p2 = p1;
                let jf = j as f64;
                p1 = ((2.0 * jf + 1.0 - z) * p2 - jf * p3) / (jf + 1.0);
            }
            (p1, p2)
        };
        for _ in 0..100 {
            let (p1, p2) = eval(z);
            let pp = nf * (p1 - p2) / z;
            let z1 = z;
            z -= p1 / pp;
            if (z - z1).abs() <= 1e-15 * z.abs() {
                break;
            }
        }
        xs[i] = z;
        // Re-evaluate at the converged root for the weight.
        let (p1, p2) = eval(z);
        let pp = nf * (p1 - p2) / z;
        ws[i] = -1.0 / (pp * nf * p2);
    }
    (xs, ws)
}

/// Adaptive Simpson quadrature for real integrands; test-oracle workhorse.
pub fn adaptive_simpson<F: Fn(f64) -> f64 + Copy>(f: F, a: f64, b: f64, tol: f64) -> f64 {
    fn simpson<F: Fn(f64) -> f64>(f: &F, a: f64, fa: f64, b: f64, fb: f64) -> (f64, f64, f64) {
        let m = 0.5 * (a + b);
        let fm = f(m);
        ((b - a) / 6.0 * (fa + 4.0 * fm + fb), m, fm)
    }
    fn recurse<F: Fn(f64) -> f64>(
        f: &F,
        a: f64,
        fa: f64,
        b: f64,
        fb: f64,
        m: f64,
        fm: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let (left, lm, flm) = simpson(f, a, fa, m, fm);
        let (right, rm, frm) = simpson(f, m, fm, b, fb);
        if depth == 0 || (left + right - whole).abs() <= 15.0 * tol {
            left + right + (left + right - whole) / 15.0
        } else {
            recurse(f, a, fa, m, fm, lm, flm, left, 0.5 * tol, depth - 1)
                + recurse(f, m, fm, b, fb, rm, frm, right, 0.5 * tol, depth - 1)
        }
    }
    let fa = f(a);
    let fb = f(b);
    let (whole, m, fm) = simpson(&f, a, fa, b, fb);
    recurse(&f, a, fa, b, fb, m, fm, whole, tol, 48)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gl_integrates_polynomials_exactly() {
        let rule = PanelRule::from_edges(&[0.0, 0.3, 1.0], 6);
        let v = rule.integrate_real(|x| x.powi(7));
        assert!((v - 0.125).abs() < 1e-14);
    }

    #[test]
    fn adaptive_simpson_gaussian() {
        let v = adaptive_simpson(|x: f64| (-x * x / 2.0).exp(), -10.0, 10.0, 1e-12);
        assert!((v - (2.0 * std::f64::consts::PI).sqrt()).abs() < 1e-10);
    }

    #[test]
    fn gauss_laguerre_moments() {
        let (xs, ws) = gauss_laguerre(24);
        let m0: f64 = ws.iter().sum();
        let m1: f64 = xs.iter().zip(&ws).map(|(x, w)| x * w).sum();
        let m5: f64 = xs.iter().zip(&ws).map(|(x, w)| x.powi(5) * w).sum();
        assert!((m0 - 1.0).abs() < 1e-12);
        assert!((m1 - 1.0).abs() < 1e-12);
        assert!((m5 - 120.0).abs() < 1e-9);
    }

    #[test]
    fn log_edges_cover_range() {
        let e = log_edges(1e-10, 40.0, 3);
        assert_eq!(e[0], 1e-10);
        assert_eq!(*e.last().unwrap(), 40.0);
        assert!(e.windows(2).all(|w| w[1] > w[0]));
    }
}
