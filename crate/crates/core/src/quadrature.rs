//! Quadrature rules shared by the tomography, moment, and purity code.
//!
//! Everything integrated here is smooth and decays like a Gaussian, so
//! composite Gauss–Legendre panels converge very quickly. The adaptive driver
//! bisects panels until the one-panel and two-half-panel estimates agree.

use std::ops::{Add, Mul, Sub};
use std::sync::OnceLock;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Number of nodes per panel for the composite and adaptive drivers.
pub const PANEL_ORDER: usize = 16;

/// Values that can be accumulated by a quadrature rule.
pub trait QuadValue: Copy + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self> {
    fn zero() -> Self;
    fn magnitude(&self) -> f64;
}

impl QuadValue for f64 {
    fn zero() -> Self {
        0.0
    }
    fn magnitude(&self) -> f64 {
        self.abs()
    }
}

impl QuadValue for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn magnitude(&self) -> f64 {
        self.norm()
    }
}

/// Gauss–Legendre nodes and weights on [-1, 1].
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    /// Builds an `n`-point rule by Newton iteration on the Legendre polynomial.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = n.div_ceil(2);
        for i in 0..m {
            // Tricomi initial guess for the i-th root, counted from the right.
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        Self { nodes, weights }
    }

    /// Shared rule of order [`PANEL_ORDER`].
    pub fn panel_rule() -> &'static GaussLegendre {
        static RULE: OnceLock<GaussLegendre> = OnceLock::new();
        RULE.get_or_init(|| GaussLegendre::new(PANEL_ORDER))
    }

    pub fn integrate<T: QuadValue>(&self, f: impl Fn(f64) -> T, a: f64, b: f64) -> T {
        let mid = 0.5 * (a + b);
        let half = 0.5 * (b - a);
        let mut acc = T::zero();
        for (&x, &w) in self.nodes.iter().zip(&self.weights) {
            acc = acc + f(mid + half * x) * w;
        }
        acc * half
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Nodes and weights of `panels` equal-width Gauss–Legendre panels on [a, b].
pub fn composite_nodes(a: f64, b: f64, panels: usize) -> (Vec<f64>, Vec<f64>) {
    let rule = GaussLegendre::panel_rule();
    let width = (b - a) / panels as f64;
    let half = 0.5 * width;
    let mut xs = Vec::with_capacity(panels * PANEL_ORDER);
    let mut ws = Vec::with_capacity(panels * PANEL_ORDER);
    for p in 0..panels {
        let mid = a + (p as f64 + 0.5) * width;
        for (&x, &w) in rule.nodes.iter().zip(&rule.weights) {
            xs.push(mid + half * x);
            ws.push(w * half);
        }
    }
    (xs, ws)
}

/// Adaptive Gauss–Legendre integration of `f` over [a, b].
///
/// The interval is first split into `initial_panels` panels so that narrow
/// features are not stepped over; each panel is then bisected until the
/// whole-panel and split estimates differ by less than its share of `tol`.
pub fn adaptive<T: QuadValue>(
    f: &(impl Fn(f64) -> T + Sync),
    a: f64,
    b: f64,
    initial_panels: usize,
    tol: f64,
) -> Result<T> {
    const MAX_DEPTH: usize = 40;
    let rule = GaussLegendre::panel_rule();
    let panels = initial_panels.max(1);
    let width = (b - a) / panels as f64;
    let mut total = T::zero();
    let mut worst = 0.0_f64;
    for p in 0..panels {
        let lo = a + p as f64 * width;
        let hi = lo + width;
        let whole = rule.integrate(f, lo, hi);
        let (value, err) = refine(f, rule, lo, hi, whole, tol / panels as f64, MAX_DEPTH);
        total = total + value;
        worst = worst.max(err);
    }
    if worst > tol {
        return Err(Error::NonConvergence {
            context: format!("adaptive quadrature on [{a}, {b}]"),
            change: worst,
            refinements: MAX_DEPTH,
        });
    }
    Ok(total)
}

fn refine<T: QuadValue>(
    f: &impl Fn(f64) -> T,
    rule: &GaussLegendre,
    a: f64,
    b: f64,
    whole: T,
    tol: f64,
    depth: usize,
) -> (T, f64) {
    let mid = 0.5 * (a + b);
    let left = rule.integrate(f, a, mid);
    let right = rule.integrate(f, mid, b);
    let split = left + right;
    let err = (split - whole).magnitude();
    if err <= tol || depth == 0 || (b - a).abs() < 1e-12 {
        return (split, if depth == 0 { err } else { 0.0 });
    }
    let (l, el) = refine(f, rule, a, mid, left, 0.5 * tol, depth - 1);
    let (r, er) = refine(f, rule, mid, b, right, 0.5 * tol, depth - 1);
    (l + r, el.max(er))
}

/// Trapezoid rule for uniformly spaced samples.
pub fn trapezoid<T: QuadValue>(values: &[T], h: f64) -> T {
    match values.len() {
        0 | 1 => T::zero(),
        n => {
            let mut acc = (values[0] + values[n - 1]) * 0.5;
            for &v in &values[1..n - 1] {
                acc = acc + v;
            }
            acc * h
        }
    }
}

/// Composite Simpson rule for uniformly spaced samples.
///
/// An odd number of intervals is handled by closing the last three intervals
/// with Simpson's 3/8 rule.
pub fn simpson<T: QuadValue>(values: &[T], h: f64) -> T {
    let n = values.len();
    match n {
        0 | 1 => T::zero(),
        2 => (values[0] + values[1]) * (0.5 * h),
        3 => (values[0] + values[1] * 4.0 + values[2]) * (h / 3.0),
        _ => {
            let intervals = n - 1;
            let simpson_end = if intervals & 1 == 0 { n - 1 } else { n - 4 };
            let mut total = T::zero();
            if simpson_end > 0 {
                let mut acc = values[0] + values[simpson_end];
                for (i, &v) in values.iter().enumerate().take(simpson_end).skip(1) {
                    acc = acc + v * if i % 2 == 1 { 4.0 } else { 2.0 };
                }
                total = acc * (h / 3.0);
            }
            if simpson_end != n - 1 {
                let s = simpson_end;
                let tail = (values[s] + values[s + 1] * 3.0 + values[s + 2] * 3.0 + values[s + 3]) * (3.0 * h / 8.0);
                total = total + tail;
            }
            total
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn legendre_rule_is_exact_for_polynomials() {
        for n in [1, 2, 5, 16, 33] {
            let rule = GaussLegendre::new(n);
            let sum: f64 = rule.weights.iter().sum();
            assert!((sum - 2.0).abs() < 1e-13, "n={n} weight sum {sum}");
            // degree 2n-1 monomial with even power
            let deg = 2 * n - 2;
            let got = rule.integrate(|x| x.powi(deg as i32), -1.0, 1.0);
            let want = 2.0 / (deg as f64 + 1.0);
            assert!((got - want).abs() < 1e-12, "n={n} got {got} want {want}");
        }
    }

    #[test]
    fn sixteen_point_nodes_match_reference() {
        let rule = GaussLegendre::new(16);
        // largest root of P_16
        assert!((rule.nodes[15] - 0.989_400_934_991_649_9).abs() < 1e-15);
        assert!((rule.weights[15] - 0.027_152_459_411_754_1).abs() < 1e-15);
    }

    #[test]
    fn adaptive_integrates_gaussian() {
        let f = |x: f64| (-x * x).exp();
        let got = adaptive(&f, -10.0, 10.0, 4, 1e-14).unwrap();
        assert!((got - std::f64::consts::PI.sqrt()).abs() < 1e-13);
    }

    #[test]
    fn adaptive_handles_oscillatory_complex_integrand() {
        let k = 7.0;
        let f = |x: f64| Complex64::from_polar((-x * x / 2.0).exp(), k * x);
        let got = adaptive(&f, -12.0, 12.0, 4, 1e-13).unwrap();
        let want = (2.0 * std::f64::consts::PI).sqrt() * (-k * k / 2.0).exp();
        assert!((got.re - want).abs() < 1e-13 && got.im.abs() < 1e-13);
    }

    #[test]
    fn simpson_handles_both_parities() {
        for n in [4usize, 5, 6, 7, 10, 257, 256] {
            let h = 1.0 / (n - 1) as f64;
            let vals: Vec<f64> = (0..n).map(|i| (i as f64 * h).powi(3)).collect();
            let got = simpson(&vals, h);
            assert!((got - 0.25).abs() < 1e-14, "n={n} got {got}");
        }
    }

    #[test]
    fn trapezoid_linear_exact() {
        let vals = [0.0, 1.0, 2.0, 3.0];
        assert_eq!(trapezoid(&vals, 1.0), 4.5);
    }
}
