//! Uncertainty relations in tomographic form.
//!
//! The Heisenberg product Var(0)·Var(π/2) and the two-state Trifonov
//! combination
//!
//! ```text
//! ½·Var₁(θ)·Var₂(θ+π/2) + ½·Var₂(θ)·Var₁(θ+π/2) ≥ 1/4
//! ```
//!
//! are evaluated on tomogram rows. Rows are not required to come from a
//! wave function, so violations of the bound can be detected.

use std::f64::consts::FRAC_PI_2;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::moments::grid_variance;
use crate::states::StateSpec;
use crate::tomography::TomogramGrid;

/// Right-hand side of every relation checked here (ħ = 1).
pub const BOUND: f64 = 0.25;
/// Default slack for analytic checks.
pub const DEFAULT_TOLERANCE: f64 = 1e-9;
/// Sweep values closer than this count as ties; the smaller phase wins.
const TIE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InequalityKind {
    Heisenberg,
    Trifonov,
    TrifonovSweep,
}

/// Outcome of one inequality check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InequalityReport {
    pub kind: InequalityKind,
    /// Phase of the check; the minimizing phase for a sweep.
    pub phase: f64,
    pub lhs: f64,
    pub bound: f64,
    pub margin: f64,
    pub satisfied: bool,
    /// Standard error of `lhs`, present for estimates from sampled data.
    pub stderr: Option<f64>,
}

impl InequalityReport {
    /// Satisfied when the margin is at least −`tolerance`.
    pub fn analytic(kind: InequalityKind, phase: f64, lhs: f64, tolerance: f64) -> Self {
        let margin = lhs - BOUND;
        Self {
            kind,
            phase,
            lhs,
            bound: BOUND,
            margin,
            satisfied: margin >= -tolerance,
            stderr: None,
        }
    }

    /// Satisfied when the margin is at least −3·`stderr`.
    pub fn empirical(kind: InequalityKind, phase: f64, lhs: f64, stderr: f64) -> Self {
        let margin = lhs - BOUND;
        Self {
            kind,
            phase,
            lhs,
            bound: BOUND,
            margin,
            satisfied: margin >= -3.0 * stderr,
            stderr: Some(stderr),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("report serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

/// Var(0)·Var(π/2) of one tomogram.
pub fn heisenberg_lhs(w: &TomogramGrid) -> Result<InequalityReport> {
    heisenberg_lhs_with(w, DEFAULT_TOLERANCE)
}

pub fn heisenberg_lhs_with(w: &TomogramGrid, tolerance: f64) -> Result<InequalityReport> {
    let lhs = grid_variance(w, 0.0)? * grid_variance(w, FRAC_PI_2)?;
    Ok(InequalityReport::analytic(
        InequalityKind::Heisenberg,
        0.0,
        lhs,
        tolerance,
    ))
}

/// Two-state Trifonov combination at `phase`; θ + π/2 past π uses the parity
/// rule.
pub fn trifonov_lhs(w1: &TomogramGrid, w2: &TomogramGrid, phase: f64) -> Result<InequalityReport> {
    trifonov_lhs_with(w1, w2, phase, DEFAULT_TOLERANCE)
}

pub fn trifonov_lhs_with(w1: &TomogramGrid, w2: &TomogramGrid, phase: f64, tolerance: f64) -> Result<InequalityReport> {
    if !phase.is_finite() {
        return Err(Error::input(format!("phase must be finite, got {phase}")));
    }
    let lhs = trifonov_combination(
        [grid_variance(w1, phase)?, grid_variance(w1, phase + FRAC_PI_2)?],
        [grid_variance(w2, phase)?, grid_variance(w2, phase + FRAC_PI_2)?],
    );
    Ok(InequalityReport::analytic(
        InequalityKind::Trifonov,
        phase,
        lhs,
        tolerance,
    ))
}

/// Minimum of [`trifonov_lhs`] over `phases`.
pub fn trifonov_sweep(w1: &TomogramGrid, w2: &TomogramGrid, phases: &[f64]) -> Result<InequalityReport> {
    trifonov_sweep_with(w1, w2, phases, DEFAULT_TOLERANCE)
}

pub fn trifonov_sweep_with(
    w1: &TomogramGrid,
    w2: &TomogramGrid,
    phases: &[f64],
    tolerance: f64,
) -> Result<InequalityReport> {
    let values = phases
        .par_iter()
        .map(|&th| trifonov_lhs_with(w1, w2, th, tolerance))
        .collect::<Result<Vec<_>>>()?;
    let best = values
        .into_iter()
        .reduce(|best, r| {
            let lower = r.lhs < best.lhs - TIE_TOL;
            let tie_smaller = (r.lhs - best.lhs).abs() <= TIE_TOL && r.phase < best.phase;
            if lower || tie_smaller {
                r
            } else {
                best
            }
        })
        .ok_or_else(|| Error::input("trifonov sweep needs at least one phase"))?;
    Ok(InequalityReport::analytic(
        InequalityKind::TrifonovSweep,
        best.phase,
        best.lhs,
        tolerance,
    ))
}

/// Trifonov combination at θ = 0 from closed-form moments, with no tomograms.
pub fn operator_trifonov_lhs(s1: &StateSpec, s2: &StateSpec) -> f64 {
    analytic_trifonov_lhs(s1, s2, 0.0)
}

/// Trifonov combination at `phase` from closed-form moments.
pub fn analytic_trifonov_lhs(s1: &StateSpec, s2: &StateSpec, phase: f64) -> f64 {
    let v = |s: &StateSpec| {
        [
            s.analytic_moments(phase).variance,
            s.analytic_moments(phase + FRAC_PI_2).variance,
        ]
    };
    trifonov_combination(v(s1), v(s2))
}

/// ½·a[0]·b[1] + ½·b[0]·a[1] for variance pairs at (θ, θ + π/2).
pub fn trifonov_combination(a: [f64; 2], b: [f64; 2]) -> f64 {
    0.5 * a[0] * b[1] + 0.5 * b[0] * a[1]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states::PureStateSpec;
    use crate::tomography::{default_x_grid, uniform_phases, XGrid};
    use num_complex::Complex64;
    use proptest::prelude::*;
    use std::f64::consts::{FRAC_PI_4, PI};

    fn grid(s: &StateSpec) -> TomogramGrid {
        TomogramGrid::from_state_with(s, &uniform_phases(8), default_x_grid(s)).unwrap()
    }

    fn squeezed(s: f64) -> StateSpec {
        StateSpec::gaussian(0.0, 0.0, s).unwrap()
    }

    #[test]
    fn heisenberg_examples() {
        let r = heisenberg_lhs(&grid(&StateSpec::vacuum())).unwrap();
        assert!((r.lhs - 0.25).abs() < 1e-9 && r.satisfied && r.margin.abs() < 1e-9);
        assert!((heisenberg_lhs(&grid(&StateSpec::fock(1).unwrap())).unwrap().lhs - 2.25).abs() < 1e-8);
        assert!((heisenberg_lhs(&grid(&squeezed(2.0))).unwrap().lhs - 0.25).abs() < 1e-9);
    }

    #[test]
    fn heisenberg_needs_both_phases() {
        let s = StateSpec::vacuum();
        let w = TomogramGrid::from_state_with(&s, &[0.0, 1.0], default_x_grid(&s)).unwrap();
        assert!(matches!(heisenberg_lhs(&w), Err(Error::MissingPhase { .. })));
    }

    #[test]
    fn trifonov_examples() {
        let v = grid(&StateSpec::vacuum());
        for &th in &uniform_phases(8) {
            assert!((trifonov_lhs(&v, &v, th).unwrap().lhs - 0.25).abs() < 1e-9);
        }
        let (a, b) = (grid(&squeezed(2.0)), grid(&squeezed(0.5)));
        let r = trifonov_lhs(&a, &b, 0.0).unwrap();
        assert!((r.lhs - 0.53125).abs() < 1e-9 && (r.margin - 0.28125).abs() < 1e-9);
        assert!((trifonov_lhs(&a, &b, FRAC_PI_4).unwrap().lhs - 0.390625).abs() < 1e-9);
        assert!(matches!(trifonov_lhs(&a, &b, 0.1), Err(Error::MissingPhase { .. })));
    }

    #[test]
    fn sweep_examples() {
        let phases = uniform_phases(8);
        let v = grid(&StateSpec::vacuum());
        let r = trifonov_sweep(&v, &v, &phases).unwrap();
        assert!((r.lhs - 0.25).abs() < 1e-9);
        let a = grid(&squeezed(2.0));
        let r = trifonov_sweep(&a, &a, &phases).unwrap();
        assert!((r.lhs - 0.25).abs() < 1e-9 && r.phase == 0.0);
        let b = grid(&squeezed(0.5));
        let r = trifonov_sweep(&a, &b, &phases).unwrap();
        assert!((r.lhs - 0.390625).abs() < 1e-9 && (r.phase - FRAC_PI_4).abs() < 1e-12);
        assert_eq!(r.kind, InequalityKind::TrifonovSweep);
        assert!(trifonov_sweep(&a, &b, &[]).is_err());
    }

    #[test]
    fn operator_examples() {
        let vac = StateSpec::vacuum();
        assert!((operator_trifonov_lhs(&vac, &vac) - 0.25).abs() < 1e-15);
        assert!((operator_trifonov_lhs(&StateSpec::fock(1).unwrap(), &vac) - 0.75).abs() < 1e-12);
        assert!((operator_trifonov_lhs(&squeezed(2.0), &squeezed(0.5)) - 0.53125).abs() < 1e-15);
    }

    #[test]
    fn classical_witness_violates() {
        let phases = vec![0.0, FRAC_PI_2];
        let x = XGrid::symmetric(4.0, 401).unwrap();
        let w = TomogramGrid::gaussian_rows(phases, x, &[0.0, 0.0], &[0.1, 0.1]).unwrap();
        let r = trifonov_lhs(&w, &w, 0.0).unwrap();
        assert!((r.lhs - 0.01).abs() < 1e-8, "{}", r.lhs);
        assert!(!r.satisfied && r.margin < 0.0);
    }

    #[test]
    fn report_json_layout() {
        let r = InequalityReport::analytic(InequalityKind::Trifonov, 0.0, 0.53125, DEFAULT_TOLERANCE);
        assert_eq!(
            r.to_json(),
            r#"{"kind":"trifonov","phase":0.0,"lhs":0.53125,"bound":0.25,"margin":0.28125,"satisfied":true,"stderr":null}"#
        );
        assert_eq!(InequalityReport::from_json(&r.to_json()).unwrap(), r);
        let sweep = serde_json::to_string(&InequalityKind::TrifonovSweep).unwrap();
        assert_eq!(sweep, r#""trifonov_sweep""#);
    }

    #[test]
    fn empirical_satisfaction_uses_three_sigma() {
        assert!(InequalityReport::empirical(InequalityKind::Trifonov, 0.0, 0.24, 0.004).satisfied);
        assert!(!InequalityReport::empirical(InequalityKind::Trifonov, 0.0, 0.24, 0.003).satisfied);
    }

    fn arb_state() -> impl Strategy<Value = StateSpec> {
        let gaussian =
            (-2.0..2.0f64, -2.0..2.0f64, 0.1..10.0f64).prop_map(|(q, p, s)| StateSpec::gaussian(q, p, s).unwrap());
        let fock = prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 1..=9)
            .prop_filter("nonzero", |c| c.iter().any(|(a, b)| a.abs() + b.abs() > 1e-3))
            .prop_map(|c| {
                let coeffs = c.into_iter().map(|(a, b)| Complex64::new(a, b)).collect();
                StateSpec::from(PureStateSpec::fock_superposition(coeffs).unwrap())
            });
        prop_oneof![gaussian, fock]
    }

    fn pair_grids(s: &StateSpec, th: f64) -> TomogramGrid {
        let mut phases = vec![th, (th + FRAC_PI_2) % PI];
        phases.sort_by(f64::total_cmp);
        TomogramGrid::from_state_with(s, &phases, default_x_grid(s)).unwrap()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn bound_symmetry_and_oracle(s1 in arb_state(), s2 in arb_state(), k in 0usize..64) {
            let th = k as f64 * PI / 64.0;
            let (w1, w2) = (pair_grids(&s1, th), pair_grids(&s2, th));
            let r12 = trifonov_lhs(&w1, &w2, th).unwrap();
            let r21 = trifonov_lhs(&w2, &w1, th).unwrap();
            prop_assert!(r12.margin >= -1e-9, "lhs {}", r12.lhs);
            prop_assert_eq!(r12.lhs, r21.lhs);
            prop_assert!((r12.lhs - analytic_trifonov_lhs(&s1, &s2, th)).abs() < 1e-6);
        }

        #[test]
        fn identical_arguments_reduce_to_heisenberg(s in arb_state()) {
            let w = TomogramGrid::from_state_with(&s, &[0.0, FRAC_PI_2], default_x_grid(&s)).unwrap();
            let t = trifonov_lhs(&w, &w, 0.0).unwrap().lhs;
            let h = heisenberg_lhs(&w).unwrap().lhs;
            prop_assert!((t - h).abs() < 1e-12);
        }
    }
}
