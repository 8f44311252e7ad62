//! Single-mode oscillator states: Gaussian wave packets, Fock-basis
//! superpositions, and convex mixtures of these.
//!
//! Units have ħ = 1, with q̂ = (â + â†)/√2 and p̂ = -i d/dy. The rotated
//! quadrature at local-oscillator phase θ is X̂ = q̂ cos θ + p̂ sin θ.

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hermite::hermite_functions_into;

/// Largest Fock index accepted by default.
pub const DEFAULT_MAX_CUTOFF: usize = 64;

/// Tolerance on Σ|c_n|² and Σ weights.
pub const NORMALIZATION_TOL: f64 = 1e-10;

/// Weight allowed to fall outside a truncated thermal distribution.
pub const THERMAL_TRUNCATION: f64 = 1e-10;

/// Mean and variance of the rotated quadrature at one phase.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentSet {
    pub mean: f64,
    pub variance: f64,
    pub phase: f64,
}

/// Ψ(y) = (π s)^(-1/4) exp(-(y - q₀)²/(2s) + i p₀ y).
///
/// Position variance is s/2 and momentum variance 1/(2s).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianState {
    pub mean_q: f64,
    pub mean_p: f64,
    pub squeeze: f64,
}

/// Σ c_n |n⟩ over the Hermite-function basis, normalized on construction.
#[derive(Debug, Clone, PartialEq)]
pub struct FockSuperposition {
    coeffs: Vec<Complex64>,
}

impl FockSuperposition {
    pub fn new(coeffs: Vec<Complex64>) -> Result<Self> {
        Self::with_max_cutoff(coeffs, DEFAULT_MAX_CUTOFF)
    }

    pub fn with_max_cutoff(coeffs: Vec<Complex64>, max_cutoff: usize) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::input("Fock superposition needs at least one coefficient"));
        }
        if coeffs.len() - 1 > max_cutoff {
            return Err(Error::input(format!(
                "Fock cutoff {} exceeds the maximum {max_cutoff}",
                coeffs.len() - 1
            )));
        }
        if coeffs.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::input("Fock coefficients must be finite"));
        }
        let norm: f64 = coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(Error::input("Fock coefficients are all zero"));
        }
        Ok(Self {
            coeffs: coeffs.into_iter().map(|c| c / norm).collect(),
        })
    }

    /// Number state |n⟩.
    pub fn number(n: usize) -> Result<Self> {
        let mut coeffs = vec![Complex64::new(0.0, 0.0); n + 1];
        coeffs[n] = Complex64::new(1.0, 0.0);
        Self::new(coeffs)
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn cutoff(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// (⟨â⟩, ⟨â²⟩, ⟨â†â⟩)
    fn ladder_expectations(&self) -> (Complex64, Complex64, f64) {
        let c = &self.coeffs;
        let mut a = Complex64::new(0.0, 0.0);
        let mut a2 = Complex64::new(0.0, 0.0);
        let mut n_mean = 0.0;
        for n in 0..c.len() {
            n_mean += n as f64 * c[n].norm_sqr();
            if n + 1 < c.len() {
                a += c[n].conj() * c[n + 1] * ((n + 1) as f64).sqrt();
            }
            if n + 2 < c.len() {
                a2 += c[n].conj() * c[n + 2] * (((n + 1) * (n + 2)) as f64).sqrt();
            }
        }
        (a, a2, n_mean)
    }

    /// ⟨e^{i r X̂_θ}⟩ from displacement-operator matrix elements.
    fn characteristic(&self, r: f64, phase: f64) -> Complex64 {
        if r == 0.0 {
            return Complex64::new(1.0, 0.0);
        }
        let c = &self.coeffs;
        let dim = c.len();
        // e^{i r X̂_θ} = D(α) with α = i r e^{iθ}/√2.
        let x = 0.5 * r * r;
        let ln_abs_alpha = 0.5 * x.ln();
        let arg_alpha = phase + FRAC_PI_2;
        let arg_minus_alpha_conj = FRAC_PI_2 - phase;
        let ln_fact = ln_factorials(dim);
        // Only coefficient pairs that are both nonzero contribute; number
        // states then cost one matrix element.
        let nonzero: Vec<bool> = c.iter().map(|z| *z != Complex64::new(0.0, 0.0)).collect();
        let mut total = Complex64::new(0.0, 0.0);
        for k in 0..dim {
            if !(0..dim - k).any(|j| nonzero[j] && nonzero[j + k]) {
                continue;
            }
            // Generalized Laguerre L_j^{(k)}(x) for j = 0.. by upward recurrence.
            let kf = k as f64;
            let mut l_prev = 0.0;
            let mut l_cur = 1.0;
            for j in 0..dim - k {
                if j == 1 {
                    l_prev = 1.0;
                    l_cur = 1.0 + kf - x;
                } else if j > 1 {
                    let jf = (j - 1) as f64;
                    let next = ((2.0 * jf + 1.0 + kf - x) * l_cur - (jf + kf) * l_prev) / (jf + 1.0);
                    l_prev = l_cur;
                    l_cur = next;
                }
                if !(nonzero[j] && nonzero[j + k]) {
                    continue;
                }
                let magnitude = (0.5 * (ln_fact[j] - ln_fact[j + k]) + kf * ln_abs_alpha - 0.5 * x).exp() * l_cur;
                if magnitude == 0.0 {
                    continue;
                }
                // ⟨j+k| D |j⟩
                let lower = Complex64::from_polar(magnitude, kf * arg_alpha);
                total += c[j + k].conj() * c[j] * lower;
                if k > 0 {
                    // ⟨j| D |j+k⟩
                    let upper = Complex64::from_polar(magnitude, kf * arg_minus_alpha_conj);
                    total += c[j].conj() * c[j + k] * upper;
                }
            }
        }
        total
    }
}

fn ln_factorials(n: usize) -> Vec<f64> {
    let mut out = vec![0.0; n + 1];
    for k in 1..=n {
        out[k] = out[k - 1] + (k as f64).ln();
    }
    out
}

/// A pure single-mode state.
#[derive(Debug, Clone, PartialEq)]
pub enum PureStateSpec {
    Gaussian(GaussianState),
    FockSuperposition(FockSuperposition),
}

impl PureStateSpec {
    pub fn gaussian(mean_q: f64, mean_p: f64, squeeze: f64) -> Result<Self> {
        if !(mean_q.is_finite() && mean_p.is_finite()) {
            return Err(Error::input("Gaussian means must be finite"));
        }
        if !(squeeze.is_finite() && squeeze > 0.0) {
            return Err(Error::input(format!("squeeze must be positive, got {squeeze}")));
        }
        Ok(Self::Gaussian(GaussianState {
            mean_q,
            mean_p,
            squeeze,
        }))
    }

    pub fn vacuum() -> Self {
        Self::Gaussian(GaussianState {
            mean_q: 0.0,
            mean_p: 0.0,
            squeeze: 1.0,
        })
    }

    pub fn fock(n: usize) -> Result<Self> {
        FockSuperposition::number(n).map(Self::FockSuperposition)
    }

    pub fn fock_superposition(coeffs: Vec<Complex64>) -> Result<Self> {
        FockSuperposition::new(coeffs).map(Self::FockSuperposition)
    }

    /// Ψ(y) in the position representation.
    pub fn position_amplitude(&self, y: f64) -> Result<Complex64> {
        if !y.is_finite() {
            return Err(Error::input(format!("position must be finite, got {y}")));
        }
        Ok(self.psi(y))
    }

    /// Ψ̃(p) = (2π)^(-1/2) ∫ Ψ(y) e^{-ipy} dy, the momentum representation
    /// whose squared modulus is the θ = π/2 tomogram.
    pub fn momentum_amplitude(&self, p: f64) -> Result<Complex64> {
        if !p.is_finite() {
            return Err(Error::input(format!("momentum must be finite, got {p}")));
        }
        Ok(self.psi_tilde(p))
    }

    pub(crate) fn psi(&self, y: f64) -> Complex64 {
        match self {
            Self::Gaussian(g) => {
                let s = g.squeeze;
                let d = y - g.mean_q;
                Complex64::from_polar((PI * s).powf(-0.25) * (-d * d / (2.0 * s)).exp(), g.mean_p * y)
            }
            Self::FockSuperposition(f) => fock_sum(f, y, false),
        }
    }

    pub(crate) fn psi_tilde(&self, p: f64) -> Complex64 {
        match self {
            Self::Gaussian(g) => {
                let s = g.squeeze;
                let d = p - g.mean_p;
                Complex64::from_polar((s / PI).powf(0.25) * (-s * d * d / 2.0).exp(), -d * g.mean_q)
            }
            Self::FockSuperposition(f) => fock_sum(f, p, true),
        }
    }

    pub fn analytic_moments(&self, phase: f64) -> MomentSet {
        let (c, s) = (phase.cos(), phase.sin());
        match self {
            Self::Gaussian(g) => MomentSet {
                mean: g.mean_q * c + g.mean_p * s,
                variance: 0.5 * g.squeeze * c * c + s * s / (2.0 * g.squeeze),
                phase,
            },
            Self::FockSuperposition(f) => {
                let (a, a2, n_mean) = f.ladder_expectations();
                let rot = Complex64::from_polar(1.0, -phase);
                let mean = std::f64::consts::SQRT_2 * (rot * a).re;
                let second = (rot * rot * a2).re + n_mean + 0.5;
                MomentSet {
                    mean,
                    variance: (second - mean * mean).max(0.0),
                    phase,
                }
            }
        }
    }

    /// Characteristic function φ(r, θ) = ⟨e^{i r X̂_θ}⟩ in closed form.
    pub fn characteristic(&self, r: f64, phase: f64) -> Complex64 {
        match self {
            Self::Gaussian(_) => {
                let m = self.analytic_moments(phase);
                Complex64::from_polar((-0.5 * r * r * m.variance).exp(), r * m.mean)
            }
            Self::FockSuperposition(f) => f.characteristic(r, phase),
        }
    }

    /// Largest quadrature standard deviation and mean magnitude over all phases.
    pub fn spread(&self) -> (f64, f64) {
        spread_of(|th| self.analytic_moments(th))
    }
}

fn fock_sum(f: &FockSuperposition, y: f64, momentum: bool) -> Complex64 {
    let n = f.coeffs.len();
    if n <= DEFAULT_MAX_CUTOFF + 1 {
        let mut buf = [0.0; DEFAULT_MAX_CUTOFF + 1];
        hermite_functions_into(y, &mut buf[..n]);
        accumulate(f, &buf[..n], momentum)
    } else {
        let mut buf = vec![0.0; n];
        hermite_functions_into(y, &mut buf);
        accumulate(f, &buf, momentum)
    }
}

fn accumulate(f: &FockSuperposition, psi: &[f64], momentum: bool) -> Complex64 {
    // Hermite functions are eigenfunctions of the e^{-ipy} transform with eigenvalue (-i)^n.
    const MINUS_I_POW: [Complex64; 4] = [
        Complex64::new(1.0, 0.0),
        Complex64::new(0.0, -1.0),
        Complex64::new(-1.0, 0.0),
        Complex64::new(0.0, 1.0),
    ];
    f.coeffs
        .iter()
        .zip(psi)
        .enumerate()
        .map(|(n, (&c, &v))| if momentum { c * MINUS_I_POW[n % 4] * v } else { c * v })
        .sum()
}

fn spread_of(moments: impl Fn(f64) -> MomentSet) -> (f64, f64) {
    let mut max_var = 0.0_f64;
    let mut max_mean = 0.0_f64;
    for k in 0..128 {
        let m = moments(k as f64 * PI / 128.0);
        max_var = max_var.max(m.variance);
        max_mean = max_mean.max(m.mean.abs());
    }
    (max_var.sqrt(), max_mean)
}

/// Convex combination Σ w_k |Ψ_k⟩⟨Ψ_k|.
#[derive(Debug, Clone, PartialEq)]
pub struct MixedStateSpec {
    components: Vec<(f64, PureStateSpec)>,
}

impl MixedStateSpec {
    pub fn new(components: Vec<(f64, PureStateSpec)>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::input("mixture needs at least one component"));
        }
        if let Some((w, _)) = components.iter().find(|(w, _)| !(w.is_finite() && *w >= 0.0)) {
            return Err(Error::input(format!("mixture weights must be non-negative, got {w}")));
        }
        let total: f64 = components.iter().map(|(w, _)| w).sum();
        if (total - 1.0).abs() > NORMALIZATION_TOL {
            return Err(Error::input(format!("mixture weights sum to {total}, expected 1")));
        }
        Ok(Self { components })
    }

    /// Thermal state Σ n̄ⁿ/(1+n̄)^(n+1) |n⟩⟨n|, truncated once the omitted weight
    /// drops below [`THERMAL_TRUNCATION`] and renormalized.
    pub fn thermal(mean_occupation: f64) -> Result<Self> {
        Self::thermal_with_cutoff(mean_occupation, DEFAULT_MAX_CUTOFF)
    }

    pub fn thermal_with_cutoff(mean_occupation: f64, max_cutoff: usize) -> Result<Self> {
        if !(mean_occupation.is_finite() && mean_occupation >= 0.0) {
            return Err(Error::input(format!(
                "mean occupation must be non-negative, got {mean_occupation}"
            )));
        }
        let ratio = mean_occupation / (1.0 + mean_occupation);
        let mut weights = Vec::new();
        let mut tail = 1.0;
        let mut p = 1.0 / (1.0 + mean_occupation);
        while tail >= THERMAL_TRUNCATION {
            if weights.len() > max_cutoff {
                return Err(Error::input(format!(
                    "thermal state with n̄ = {mean_occupation} needs more than {max_cutoff} Fock levels"
                )));
            }
            weights.push(p);
            tail -= p;
            p *= ratio;
            if ratio == 0.0 {
                break;
            }
        }
        let total: f64 = weights.iter().sum();
        let components = weights
            .into_iter()
            .enumerate()
            .map(|(n, w)| Ok((w / total, PureStateSpec::fock(n)?)))
            .collect::<Result<Vec<_>>>()?;
        Self::new(components)
    }

    pub fn components(&self) -> &[(f64, PureStateSpec)] {
        &self.components
    }

    pub fn analytic_moments(&self, phase: f64) -> MomentSet {
        let mut mean = 0.0;
        let mut second = 0.0;
        for (w, s) in &self.components {
            let m = s.analytic_moments(phase);
            mean += w * m.mean;
            second += w * (m.variance + m.mean * m.mean);
        }
        MomentSet {
            mean,
            variance: (second - mean * mean).max(0.0),
            phase,
        }
    }
}

/// Any supported state: pure or mixed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "StateJson", into = "StateJson")]
pub enum StateSpec {
    Pure(PureStateSpec),
    Mixed(MixedStateSpec),
}

impl StateSpec {
    pub fn vacuum() -> Self {
        Self::Pure(PureStateSpec::vacuum())
    }

    pub fn gaussian(mean_q: f64, mean_p: f64, squeeze: f64) -> Result<Self> {
        PureStateSpec::gaussian(mean_q, mean_p, squeeze).map(Self::Pure)
    }

    pub fn fock(n: usize) -> Result<Self> {
        PureStateSpec::fock(n).map(Self::Pure)
    }

    pub fn thermal(mean_occupation: f64) -> Result<Self> {
        MixedStateSpec::thermal(mean_occupation).map(Self::Mixed)
    }

    pub fn mixture(components: Vec<(f64, PureStateSpec)>) -> Result<Self> {
        MixedStateSpec::new(components).map(Self::Mixed)
    }

    /// Weighted pure components; a pure state is a single component of weight 1.
    pub fn components(&self) -> Vec<(f64, &PureStateSpec)> {
        match self {
            Self::Pure(p) => vec![(1.0, p)],
            Self::Mixed(m) => m.components.iter().map(|(w, s)| (*w, s)).collect(),
        }
    }

    pub fn is_pure(&self) -> bool {
        matches!(self, Self::Pure(_))
    }

    pub fn analytic_moments(&self, phase: f64) -> MomentSet {
        match self {
            Self::Pure(p) => p.analytic_moments(phase),
            Self::Mixed(m) => m.analytic_moments(phase),
        }
    }

    pub fn characteristic(&self, r: f64, phase: f64) -> Complex64 {
        self.components()
            .into_iter()
            .map(|(w, s)| s.characteristic(r, phase) * w)
            .sum()
    }

    /// Largest quadrature standard deviation and mean magnitude over all phases.
    pub fn spread(&self) -> (f64, f64) {
        spread_of(|th| self.analytic_moments(th))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("state specs always serialize")
    }
}

impl From<PureStateSpec> for StateSpec {
    fn from(p: PureStateSpec) -> Self {
        Self::Pure(p)
    }
}

impl From<MixedStateSpec> for StateSpec {
    fn from(m: MixedStateSpec) -> Self {
        Self::Mixed(m)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
enum StateJson {
    Gaussian { mean_q: f64, mean_p: f64, squeeze: f64 },
    Fock { coeffs: Vec<[f64; 2]> },
    Mixed { components: Vec<ComponentJson> },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ComponentJson {
    weight: f64,
    state: StateJson,
}

fn pure_from_json(json: StateJson) -> Result<PureStateSpec> {
    match json {
        StateJson::Gaussian {
            mean_q,
            mean_p,
            squeeze,
        } => PureStateSpec::gaussian(mean_q, mean_p, squeeze),
        StateJson::Fock { coeffs } => {
            PureStateSpec::fock_superposition(coeffs.into_iter().map(|[re, im]| Complex64::new(re, im)).collect())
        }
        StateJson::Mixed { .. } => Err(Error::input("mixture components must be pure states")),
    }
}

fn pure_to_json(p: &PureStateSpec) -> StateJson {
    match p {
        PureStateSpec::Gaussian(g) => StateJson::Gaussian {
            mean_q: g.mean_q,
            mean_p: g.mean_p,
            squeeze: g.squeeze,
        },
        PureStateSpec::FockSuperposition(f) => StateJson::Fock {
            coeffs: f.coeffs.iter().map(|c| [c.re, c.im]).collect(),
        },
    }
}

impl TryFrom<StateJson> for StateSpec {
    type Error = Error;

    fn try_from(json: StateJson) -> Result<Self> {
        match json {
            StateJson::Mixed { components } => {
                let comps = components
                    .into_iter()
                    .map(|c| Ok((c.weight, pure_from_json(c.state)?)))
                    .collect::<Result<Vec<_>>>()?;
                MixedStateSpec::new(comps).map(StateSpec::Mixed)
            }
            pure => pure_from_json(pure).map(StateSpec::Pure),
        }
    }
}

impl From<StateSpec> for StateJson {
    fn from(s: StateSpec) -> Self {
        match s {
            StateSpec::Pure(p) => pure_to_json(&p),
            StateSpec::Mixed(m) => StateJson::Mixed {
                components: m
                    .components
                    .iter()
                    .map(|(w, p)| ComponentJson {
                        weight: *w,
                        state: pure_to_json(p),
                    })
                    .collect(),
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::adaptive;
    use std::f64::consts::FRAC_PI_4;

    const PI_M14: f64 = 0.751_125_544_464_942_5; // π^(-1/4)

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    fn norm_by_quadrature(f: impl Fn(f64) -> Complex64 + Sync) -> f64 {
        adaptive(&|y: f64| f(y).norm_sqr(), -40.0, 40.0, 64, 1e-13).unwrap()
    }

    // Independent route to Ψ̃: integrate the Fourier kernel numerically.
    fn momentum_by_quadrature(state: &PureStateSpec, p: f64) -> Complex64 {
        let f = |y: f64| state.psi(y) * Complex64::from_polar(1.0, -p * y);
        adaptive(&f, -40.0, 40.0, 64, 1e-14).unwrap() / (2.0 * PI).sqrt()
    }

    #[test]
    fn position_amplitude_examples() {
        let vac = PureStateSpec::gaussian(0.0, 0.0, 1.0).unwrap();
        assert!(close(vac.position_amplitude(0.0).unwrap().re, PI_M14, 1e-15));
        let one = PureStateSpec::fock(1).unwrap();
        assert_eq!(one.position_amplitude(0.0).unwrap().norm(), 0.0);
        let displaced = PureStateSpec::gaussian(1.0, 0.0, 1.0).unwrap();
        assert!(close(displaced.position_amplitude(1.0).unwrap().norm(), PI_M14, 1e-15));
        assert!(matches!(vac.position_amplitude(f64::NAN), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn momentum_amplitude_examples() {
        let vac = PureStateSpec::vacuum();
        assert!(close(vac.momentum_amplitude(0.0).unwrap().norm(), PI_M14, 1e-15));

        let two = PureStateSpec::fock(2).unwrap();
        for &x in &[-1.7, 0.0, 0.4, 2.2] {
            let got = two.momentum_amplitude(x).unwrap();
            let want = -two.psi(x);
            assert!((got - want).norm() < 1e-15);
            assert!((momentum_by_quadrature(&two, x) - want).norm() < 1e-12);
        }

        let kicked = PureStateSpec::gaussian(0.0, 2.0, 1.0).unwrap();
        let peak = kicked.momentum_amplitude(2.0).unwrap();
        assert!(close(peak.norm(), PI_M14, 1e-15));
        assert!((momentum_by_quadrature(&kicked, 2.0) - peak).norm() < 1e-12);
    }

    #[test]
    fn closed_form_momentum_matches_quadrature_for_general_states() {
        let states = [
            PureStateSpec::gaussian(0.7, -1.3, 0.4).unwrap(),
            PureStateSpec::fock_superposition(vec![
                Complex64::new(0.3, 0.1),
                Complex64::new(0.0, 0.8),
                Complex64::new(-0.2, 0.0),
                Complex64::new(0.4, -0.3),
            ])
            .unwrap(),
        ];
        for s in &states {
            for &p in &[-2.0, -0.5, 0.0, 1.1, 2.7] {
                let err = (s.psi_tilde(p) - momentum_by_quadrature(s, p)).norm();
                assert!(err < 1e-12, "{s:?} p={p} err={err}");
            }
        }
    }

    #[test]
    fn normalization_and_parseval() {
        let states = [
            PureStateSpec::vacuum(),
            PureStateSpec::gaussian(1.5, -0.7, 0.2).unwrap(),
            PureStateSpec::gaussian(-2.0, 3.0, 6.0).unwrap(),
            PureStateSpec::fock(7).unwrap(),
            PureStateSpec::fock_superposition(vec![
                Complex64::new(1.0, 0.0),
                Complex64::new(0.0, 2.0),
                Complex64::new(0.5, 0.5),
            ])
            .unwrap(),
        ];
        for s in &states {
            assert!(close(norm_by_quadrature(|y| s.psi(y)), 1.0, 1e-8), "{s:?}");
            assert!(close(norm_by_quadrature(|p| s.psi_tilde(p)), 1.0, 1e-8), "{s:?}");
        }
    }

    #[test]
    fn analytic_moment_examples() {
        let vac = PureStateSpec::vacuum().analytic_moments(0.0);
        assert_eq!((vac.mean, vac.variance), (0.0, 0.5));

        let two = PureStateSpec::fock(2).unwrap();
        for &th in &[0.0, 0.4, 1.9, 3.0] {
            let m = two.analytic_moments(th);
            assert!(close(m.mean, 0.0, 1e-15) && close(m.variance, 2.5, 1e-14));
        }
        // Quadrature cross-check at θ = 0: ∫ y² |ψ_2|² dy.
        let q2 = adaptive(&|y: f64| y * y * two.psi(y).norm_sqr(), -30.0, 30.0, 32, 1e-13).unwrap();
        assert!(close(q2, 2.5, 1e-12));

        let sq = PureStateSpec::gaussian(0.0, 0.0, 2.0)
            .unwrap()
            .analytic_moments(FRAC_PI_4);
        assert!(close(sq.variance, 0.625, 1e-15));
    }

    #[test]
    fn fock_superposition_moments_match_quadrature() {
        let s = PureStateSpec::fock_superposition(vec![
            Complex64::new(0.6, 0.0),
            Complex64::new(0.0, 0.5),
            Complex64::new(0.3, -0.4),
        ])
        .unwrap();
        // θ = 0 from |Ψ|², θ = π/2 from |Ψ̃|².
        for (th, amp) in [(0.0, 0usize), (FRAC_PI_2, 1)] {
            let dens = |y: f64| {
                if amp == 0 {
                    s.psi(y).norm_sqr()
                } else {
                    s.psi_tilde(y).norm_sqr()
                }
            };
            let m1 = adaptive(&|y: f64| y * dens(y), -30.0, 30.0, 32, 1e-13).unwrap();
            let m2 = adaptive(&|y: f64| y * y * dens(y), -30.0, 30.0, 32, 1e-13).unwrap();
            let m = s.analytic_moments(th);
            assert!(close(m.mean, m1, 1e-11), "θ={th}: {} vs {m1}", m.mean);
            assert!(close(m.variance, m2 - m1 * m1, 1e-11));
        }
    }

    #[test]
    fn mixed_moments_use_total_variance() {
        let mix = StateSpec::mixture(vec![
            (0.5, PureStateSpec::gaussian(1.0, 0.0, 1.0).unwrap()),
            (0.5, PureStateSpec::gaussian(-1.0, 0.0, 1.0).unwrap()),
        ])
        .unwrap();
        let m = mix.analytic_moments(0.0);
        assert!(close(m.mean, 0.0, 1e-15) && close(m.variance, 1.5, 1e-15));
        let thermal = StateSpec::thermal(1.0).unwrap();
        for &th in &[0.0, 1.0, 2.5] {
            assert!(close(thermal.analytic_moments(th).variance, 1.5, 1e-8));
        }
    }

    #[test]
    fn characteristic_closed_forms() {
        let one = PureStateSpec::fock(1).unwrap();
        let vac = PureStateSpec::vacuum();
        for &r in &[0.0f64, 0.3, 1.0, 2.5, 6.0] {
            for &th in &[0.0, 0.8, 2.0] {
                let want1 = (1.0 - r * r / 2.0) * (-r * r / 4.0).exp();
                assert!((one.characteristic(r, th) - Complex64::new(want1, 0.0)).norm() < 1e-14);
                assert!((vac.characteristic(r, th) - Complex64::new((-r * r / 4.0).exp(), 0.0)).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn fock_characteristic_matches_wavefunction_quadrature() {
        let s = PureStateSpec::fock_superposition(vec![
            Complex64::new(0.5, 0.1),
            Complex64::new(0.0, 0.5),
            Complex64::new(0.2, -0.4),
            Complex64::new(0.1, 0.3),
        ])
        .unwrap();
        // θ = 0: ∫|Ψ(y)|² e^{iry}; θ = π/2: ∫|Ψ̃(p)|² e^{irp}.
        for &r in &[0.4, 1.7, 3.2] {
            let f0 = |y: f64| Complex64::from_polar(s.psi(y).norm_sqr(), r * y);
            let f1 = |y: f64| Complex64::from_polar(s.psi_tilde(y).norm_sqr(), r * y);
            let q0 = adaptive(&f0, -30.0, 30.0, 32, 1e-14).unwrap();
            let q1 = adaptive(&f1, -30.0, 30.0, 32, 1e-14).unwrap();
            assert!((s.characteristic(r, 0.0) - q0).norm() < 1e-12);
            assert!((s.characteristic(r, FRAC_PI_2) - q1).norm() < 1e-12);
        }
    }

    #[test]
    fn construction_rejects_invalid_parameters() {
        assert!(PureStateSpec::gaussian(0.0, 0.0, 0.0).is_err());
        assert!(PureStateSpec::gaussian(0.0, 0.0, -1.0).is_err());
        assert!(PureStateSpec::fock(65).is_err());
        assert!(PureStateSpec::fock(64).is_ok());
        assert!(PureStateSpec::fock_superposition(vec![Complex64::new(0.0, 0.0)]).is_err());
        assert!(StateSpec::mixture(vec![(0.6, PureStateSpec::vacuum())]).is_err());
        assert!(StateSpec::mixture(vec![(1.2, PureStateSpec::vacuum()), (-0.2, PureStateSpec::vacuum())]).is_err());
        assert!(MixedStateSpec::thermal(5.0).is_err(), "needs > 64 levels");
    }

    #[test]
    fn fock_coefficients_are_normalized() {
        let s = FockSuperposition::new(vec![Complex64::new(3.0, 0.0), Complex64::new(0.0, 4.0)]).unwrap();
        let n: f64 = s.coeffs().iter().map(|c| c.norm_sqr()).sum();
        assert!(close(n, 1.0, 1e-15));
    }

    #[test]
    fn thermal_truncation() {
        let MixedStateSpec { components } = MixedStateSpec::thermal(1.0).unwrap();
        // p_n = 2^{-(n+1)}; omitted weight 2^{-N} < 1e-10 first at N = 34.
        assert_eq!(components.len(), 34);
        let total: f64 = components.iter().map(|(w, _)| w).sum();
        assert!(close(total, 1.0, 1e-14));
        assert_eq!(MixedStateSpec::thermal(0.0).unwrap().components.len(), 1);
    }

    #[test]
    fn json_format() {
        let g = StateSpec::from_json(r#"{"type":"gaussian","mean_q":0,"mean_p":0,"squeeze":1}"#).unwrap();
        assert_eq!(g, StateSpec::vacuum());
        let f = StateSpec::from_json(r#"{"type":"fock","coeffs":[[0,0],[1,0]]}"#).unwrap();
        assert_eq!(f, StateSpec::fock(1).unwrap());
        let m = StateSpec::from_json(
            r#"{"type":"mixed","components":[{"weight":0.5,"state":{"type":"fock","coeffs":[[1,0]]}},
                {"weight":0.5,"state":{"type":"fock","coeffs":[[0,0],[1,0]]}}]}"#,
        )
        .unwrap();
        assert!(!m.is_pure());
        assert_eq!(StateSpec::from_json(&m.to_json()).unwrap(), m);

        for bad in [
            r#"{"type":"gaussian","mean_q":0,"mean_p":0,"squeeze":1,"extra":2}"#,
            r#"{"type":"gaussian","mean_q":0,"mean_p":0}"#,
            r#"{"type":"gaussian","mean_q":0,"mean_p":0,"squeeze":-1}"#,
            r#"{"type":"coherent","alpha":1}"#,
            r#"{"type":"mixed","components":[{"weight":1,"state":{"type":"mixed","components":[]}}]}"#,
            r#"{"type":"mixed","components":[{"weight":1,"state":{"type":"fock","coeffs":[[1,0]]},"w":1}]}"#,
        ] {
            assert!(StateSpec::from_json(bad).is_err(), "accepted {bad}");
        }
    }
}
