//! Tomographic overlap functional and pure/mixed classification.
//!
//! The four-dimensional double-tomogram integral over symplectic tomograms
//! reduces, by the scaling law w(λX, λμ, λν) = w(X, μ, ν)/λ and polar
//! coordinates (μ, ν) = r(cos θ, sin θ), to
//!
//! ```text
//! (1/2π) ∫₀^{2π} dθ ∫₀^∞ r dr φ₁(r, θ) conj φ₂(r, θ)
//! ```
//!
//! with φ(r, θ) = ∫ w(X, θ) e^{irX} dX. This equals Tr ρ₁ρ₂, so the
//! self-overlap is 1 for pure states and below 1 for mixed ones.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::adaptive;
use crate::states::StateSpec;
use crate::tomography::{uniform_phases, TomogramGrid, DEFAULT_PHASES, PHASE_MATCH_TOL};

/// Default |overlap − 1| below which a state counts as pure.
pub const DEFAULT_TOLERANCE: f64 = 1e-3;
/// |φ₁φ₂| below which the radial integral is truncated.
pub const CHARACTERISTIC_FLOOR: f64 = 1e-10;
/// Largest accepted estimate of the truncated radial tail.
pub const MAX_TAIL: f64 = 1e-8;
/// Largest accepted imaginary part of the overlap.
pub const MAX_IMAGINARY: f64 = 1e-8;

const R_START: f64 = 12.0;
const R_CAP: f64 = 200.0;
const RADIAL_TOL: f64 = 1e-12;

/// Where characteristic functions come from.
#[derive(Debug, Clone, Copy)]
pub enum TomogramSource<'a> {
    /// Closed form from the state.
    State(&'a StateSpec),
    /// Closed form if the grid carries its state, otherwise row quadrature.
    Grid(&'a TomogramGrid),
}

impl<'a> From<&'a StateSpec> for TomogramSource<'a> {
    fn from(s: &'a StateSpec) -> Self {
        Self::State(s)
    }
}

impl<'a> From<&'a TomogramGrid> for TomogramSource<'a> {
    fn from(w: &'a TomogramGrid) -> Self {
        Self::Grid(w)
    }
}

impl TomogramSource<'_> {
    fn characteristic(&self, r: f64, phase: f64) -> Result<Complex64> {
        match self {
            Self::State(s) => Ok(s.characteristic(r, phase)),
            Self::Grid(w) => match w.origin() {
                Some(s) => Ok(s.characteristic(r, phase)),
                None => w.characteristic(phase, r),
            },
        }
    }

    fn grid_phases(&self) -> Option<&[f64]> {
        match self {
            Self::State(_) => None,
            Self::Grid(w) => Some(w.phases()),
        }
    }

    /// Largest r the source can resolve.
    fn r_limit(&self) -> f64 {
        match self {
            Self::Grid(w) if w.origin().is_none() => (0.5 * PI / w.x_grid().step()).min(R_CAP),
            _ => R_CAP,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Classification {
    Pure,
    Mixed,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PurityReport {
    pub overlap: f64,
    pub classification: Classification,
    pub tolerance: f64,
}

impl PurityReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("report serializes")
    }
}

/// Overlap functional of two tomograms; Tr ρ₁ρ₂ for quantum states.
///
/// Phases are the grid's when either source is a grid (two grids must share
/// their phases), otherwise [`DEFAULT_PHASES`] uniform phases. The θ
/// integral is the periodic trapezoid rule; [π, 2π) reuses the [0, π) values
/// through φ(r, θ + π) = conj φ(r, θ).
pub fn purity_overlap<'a>(a: impl Into<TomogramSource<'a>>, b: impl Into<TomogramSource<'a>>) -> Result<f64> {
    let (a, b) = (a.into(), b.into());
    let phases = shared_phases(&a, &b)?;
    let weights = periodic_weights(&phases);
    let r_limit = a.r_limit().min(b.r_limit());
    let r_max = radial_cutoff(&a, &b, &phases, r_limit)?;

    let panels = r_max.ceil() as usize;
    let radial = phases
        .par_iter()
        .map(|&th| {
            let f = |r: f64| match (a.characteristic(r, th), b.characteristic(r, th)) {
                (Ok(x), Ok(y)) => x * y.conj() * r,
                _ => Complex64::new(f64::NAN, f64::NAN),
            };
            adaptive(&f, 0.0, r_max, panels, RADIAL_TOL)
        })
        .collect::<Result<Vec<_>>>()?;

    let lower: Complex64 = radial.iter().zip(&weights).map(|(g, w)| g * w).sum();
    let upper: Complex64 = radial.iter().zip(&weights).map(|(g, w)| g.conj() * w).sum();
    let total = (lower + upper) / (2.0 * PI);
    if !(total.re.is_finite() && total.im.is_finite()) {
        return Err(Error::Numerical("overlap integrand is not finite".into()));
    }
    if total.im.abs() > MAX_IMAGINARY {
        return Err(Error::Numerical(format!("overlap has imaginary part {:e}", total.im)));
    }
    Ok(total.re)
}

/// Self-overlap with a pure/mixed label; pure iff |overlap − 1| ≤ `tolerance`.
pub fn purity_classify<'a>(source: impl Into<TomogramSource<'a>>, tolerance: f64) -> Result<PurityReport> {
    if !(tolerance >= 0.0 && tolerance.is_finite()) {
        return Err(Error::input(format!("tolerance must be non-negative, got {tolerance}")));
    }
    let source = source.into();
    let overlap = purity_overlap(source, source)?;
    let classification = if (overlap - 1.0).abs() <= tolerance {
        Classification::Pure
    } else {
        Classification::Mixed
    };
    Ok(PurityReport {
        overlap,
        classification,
        tolerance,
    })
}

fn shared_phases(a: &TomogramSource<'_>, b: &TomogramSource<'_>) -> Result<Vec<f64>> {
    match (a.grid_phases(), b.grid_phases()) {
        (None, None) => Ok(uniform_phases(DEFAULT_PHASES)),
        (Some(p), None) | (None, Some(p)) => Ok(p.to_vec()),
        (Some(p), Some(q)) => {
            let same = p.len() == q.len() && p.iter().zip(q).all(|(x, y)| (x - y).abs() < PHASE_MATCH_TOL);
            if !same {
                return Err(Error::input("overlap of two tomograms needs identical phase grids"));
            }
            Ok(p.to_vec())
        }
    }
}

/// Trapezoid weights for phases in [0, π), closing periodically at π.
fn periodic_weights(phases: &[f64]) -> Vec<f64> {
    let n = phases.len();
    if n == 1 {
        return vec![PI];
    }
    (0..n)
        .map(|k| {
            let next = if k + 1 < n { phases[k + 1] } else { phases[0] + PI };
            let prev = if k > 0 { phases[k - 1] } else { phases[n - 1] - PI };
            0.5 * (next - prev)
        })
        .collect()
}

/// Doubles r from [`R_START`] until |φ₁φ₂| < [`CHARACTERISTIC_FLOOR`] at
/// every phase, stopping at what the sources can resolve.
fn radial_cutoff(a: &TomogramSource<'_>, b: &TomogramSource<'_>, phases: &[f64], limit: f64) -> Result<f64> {
    let peak = |r: f64| -> Result<f64> {
        phases.iter().try_fold(0.0_f64, |m, &th| {
            Ok(m.max((a.characteristic(r, th)? * b.characteristic(r, th)?).norm()))
        })
    };
    let mut r = R_START.min(limit);
    loop {
        let p = peak(r)?;
        if p < CHARACTERISTIC_FLOOR {
            return Ok(r);
        }
        if r >= limit {
            let tail = r * p;
            if tail > MAX_TAIL {
                return Err(Error::Resolution(format!(
                    "characteristic functions still {p:e} at r = {r}; the x grid is too coarse to integrate further"
                )));
            }
            return Ok(r);
        }
        r = (2.0 * r).min(limit);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states::{MixedStateSpec, PureStateSpec};
    use crate::tomography::{default_x_grid, XGrid};

    fn assert_close(got: f64, want: f64, tol: f64) {
        assert!((got - want).abs() < tol, "got {got}, want {want}");
    }

    #[test]
    fn overlap_examples() {
        let vac = StateSpec::vacuum();
        let one = StateSpec::fock(1).unwrap();
        let thermal = StateSpec::thermal(1.0).unwrap();
        assert_close(purity_overlap(&vac, &vac).unwrap(), 1.0, 1e-9);
        assert_close(purity_overlap(&vac, &one).unwrap(), 0.0, 1e-9);
        assert_close(purity_overlap(&thermal, &thermal).unwrap(), 1.0 / 3.0, 1e-8);
    }

    #[test]
    fn classify_examples() {
        let r = purity_classify(&StateSpec::vacuum(), DEFAULT_TOLERANCE).unwrap();
        assert_eq!(r.classification, Classification::Pure);
        let mix = StateSpec::mixture(vec![
            (0.5, PureStateSpec::vacuum()),
            (0.5, PureStateSpec::fock(1).unwrap()),
        ])
        .unwrap();
        let r = purity_classify(&mix, DEFAULT_TOLERANCE).unwrap();
        assert_eq!(r.classification, Classification::Mixed);
        assert_close(r.overlap, 0.5, 1e-9);
        let r = purity_classify(&StateSpec::fock(1).unwrap(), DEFAULT_TOLERANCE).unwrap();
        assert_eq!(r.classification, Classification::Pure);
        assert_close(r.overlap, 1.0, 1e-9);
    }

    #[test]
    fn pure_families_have_unit_self_overlap() {
        let states = [
            StateSpec::gaussian(0.7, -1.2, 2.0).unwrap(),
            StateSpec::gaussian(0.0, 0.0, 0.1).unwrap(),
            StateSpec::fock(6).unwrap(),
            StateSpec::from(PureStateSpec::fock_superposition(vec![1.0.into(), 0.5.into(), (-0.3).into()]).unwrap()),
        ];
        // The strongly squeezed state peaks sharply in θ, which limits the
        // 64-phase trapezoid rule to about 1e-5.
        for s in &states {
            assert_close(purity_overlap(s, s).unwrap(), 1.0, 1e-4);
        }
    }

    #[test]
    fn overlap_is_symmetric() {
        let a = StateSpec::gaussian(0.5, 0.3, 1.5).unwrap();
        let b = StateSpec::from(PureStateSpec::fock_superposition(vec![0.6.into(), 0.8.into()]).unwrap());
        let ab = purity_overlap(&a, &b).unwrap();
        let ba = purity_overlap(&b, &a).unwrap();
        assert!((ab - ba).abs() < 1e-10, "{ab} vs {ba}");
    }

    #[test]
    fn orthogonal_mixtures_follow_convexity() {
        for lambda in [0.0, 0.25, 0.5, 1.0] {
            let mix = MixedStateSpec::new(vec![
                (lambda, PureStateSpec::vacuum()),
                (1.0 - lambda, PureStateSpec::fock(1).unwrap()),
            ])
            .unwrap();
            let s = StateSpec::from(mix);
            let want = lambda * lambda + (1.0 - lambda) * (1.0 - lambda);
            assert_close(purity_overlap(&s, &s).unwrap(), want, 1e-9);
        }
    }

    #[test]
    fn grid_rows_without_state_reproduce_values() {
        for (s, want) in [
            (StateSpec::vacuum(), 1.0),
            (StateSpec::fock(1).unwrap(), 1.0),
            (StateSpec::thermal(1.0).unwrap(), 1.0 / 3.0),
        ] {
            let w = TomogramGrid::from_state_with(&s, &uniform_phases(16), default_x_grid(&s))
                .unwrap()
                .without_origin();
            assert_close(purity_overlap(&w, &w).unwrap(), want, 1e-6);
        }
    }

    #[test]
    fn coarse_grid_is_resolution_error() {
        let s = StateSpec::vacuum();
        let w = TomogramGrid::from_state_with(&s, &uniform_phases(4), XGrid::symmetric(8.0, 41).unwrap())
            .unwrap()
            .without_origin();
        let err = purity_overlap(&w, &w).unwrap_err();
        assert!(err.is_numerical(), "{err}");
    }

    #[test]
    fn mismatched_grids_are_rejected() {
        let s = StateSpec::vacuum();
        let a = TomogramGrid::from_state_with(&s, &uniform_phases(4), default_x_grid(&s)).unwrap();
        let b = TomogramGrid::from_state_with(&s, &uniform_phases(8), default_x_grid(&s)).unwrap();
        assert!(matches!(purity_overlap(&a, &b), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn report_json_layout() {
        let r = PurityReport {
            overlap: 0.3333,
            classification: Classification::Mixed,
            tolerance: 0.001,
        };
        assert_eq!(
            r.to_json(),
            r#"{"overlap":0.3333,"classification":"mixed","tolerance":0.001}"#
        );
    }
}
