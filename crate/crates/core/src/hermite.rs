//! Normalized Hermite functions ψ_n(y) = (2^n n! √π)^(-1/2) H_n(y) e^(-y²/2).
//!
//! The recurrence runs on ψ_n directly, so no factorials or large H_n values
//! appear even at high order.

use std::f64::consts::PI;

/// Fills `out[n]` with ψ_n(y) for n = 0..out.len().
pub fn hermite_functions_into(y: f64, out: &mut [f64]) {
    if out.is_empty() {
        return;
    }
    out[0] = PI.powf(-0.25) * (-0.5 * y * y).exp();
    if out.len() == 1 {
        return;
    }
    out[1] = std::f64::consts::SQRT_2 * y * out[0];
    for n in 1..out.len() - 1 {
        let nf = n as f64;
        out[n + 1] = (2.0 / (nf + 1.0)).sqrt() * y * out[n] - (nf / (nf + 1.0)).sqrt() * out[n - 1];
    }
}

/// ψ_0(y), …, ψ_{n_max}(y).
pub fn hermite_functions(n_max: usize, y: f64) -> Vec<f64> {
    let mut out = vec![0.0; n_max + 1];
    hermite_functions_into(y, &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::adaptive;

    // Closed forms via the physicists' polynomials H_0..H_3.
    fn psi_closed(n: usize, y: f64) -> f64 {
        let h = match n {
            0 => 1.0,
            1 => 2.0 * y,
            2 => 4.0 * y * y - 2.0,
            3 => 8.0 * y.powi(3) - 12.0 * y,
            _ => unreachable!(),
        };
        let fact = [1.0, 1.0, 2.0, 6.0][n];
        h * (-0.5 * y * y).exp() / (2f64.powi(n as i32) * fact * PI.sqrt()).sqrt()
    }

    #[test]
    fn low_orders_match_closed_forms() {
        for &y in &[-2.5, -0.3, 0.0, 0.7, 3.1] {
            let psi = hermite_functions(3, y);
            for (n, &v) in psi.iter().enumerate() {
                assert!((v - psi_closed(n, y)).abs() < 1e-14, "n={n} y={y}");
            }
        }
    }

    #[test]
    fn orthonormal_up_to_cutoff_64() {
        let n_max = 64;
        for (m, n) in [(0, 0), (64, 64), (63, 64), (10, 12), (40, 40), (5, 33)] {
            let f = |y: f64| {
                let psi = hermite_functions(n_max, y);
                psi[m] * psi[n]
            };
            let got = adaptive(&f, -20.0, 20.0, 32, 1e-13).unwrap();
            let want = if m == n { 1.0 } else { 0.0 };
            assert!((got - want).abs() < 1e-11, "<{m}|{n}> = {got}");
        }
    }

    #[test]
    fn parity() {
        let a = hermite_functions(9, 1.3);
        let b = hermite_functions(9, -1.3);
        for n in 0..=9 {
            let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
            assert!((a[n] - sign * b[n]).abs() < 1e-15);
        }
    }
}
