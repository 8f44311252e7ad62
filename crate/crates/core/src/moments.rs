//! Tomographic means and variances.
//!
//! Stored rows are integrated with Simpson's rule on their uniform grid.
//! Moments taken straight from a state skip the stored grid and refine their
//! own, so their accuracy does not depend on the stored resolution.

use crate::error::{Error, Result};
use crate::quadrature::{simpson, trapezoid};
use crate::states::{MomentSet, StateSpec};
use crate::tomography::{canonical_phase, tomogram_row, TomogramGrid, XGrid, ROW_NORMALIZATION_TOL};

/// Half-width, in standard deviations, that a row window is expected to cover.
pub const COVERAGE_SIGMAS: f64 = 6.0;
/// Largest estimated probability mass allowed outside the row window.
pub const MAX_TAIL_MASS: f64 = 1e-6;

const DIRECT_TOL: f64 = 1e-12;
const DIRECT_REFINEMENTS: usize = 4;
const DIRECT_DENSITY_FLOOR: f64 = 1e-16;

/// ∫ w(X) X dX for a row sampled on `grid`.
pub fn tomographic_mean(row: &[f64], grid: &XGrid) -> Result<f64> {
    Ok(row_moments_unchecked(row, grid)?.0)
}

/// ∫ w(X) X² dX − (∫ w(X) X dX)² for a row sampled on `grid`.
///
/// Fails if the row is so wide for its window that more than
/// [`MAX_TAIL_MASS`] of probability is estimated to lie outside it.
pub fn tomographic_variance(row: &[f64], grid: &XGrid) -> Result<f64> {
    let (mean, variance) = row_moments_unchecked(row, grid)?;
    check_window(row, grid, mean, variance)?;
    Ok(variance)
}

/// Mean and variance of one row, labelled with its phase.
pub fn row_moments(row: &[f64], grid: &XGrid, phase: f64) -> Result<MomentSet> {
    let (mean, variance) = row_moments_unchecked(row, grid)?;
    check_window(row, grid, mean, variance)?;
    Ok(MomentSet { mean, variance, phase })
}

/// Moments of the stored row at `phase`; the mean follows the parity rule.
pub fn grid_moments(w: &TomogramGrid, phase: f64) -> Result<MomentSet> {
    let (i, mirror) = w.phase_index(phase)?;
    let m = row_moments(&w.rows()[i], w.x_grid(), phase)?;
    Ok(MomentSet {
        mean: if mirror { -m.mean } else { m.mean },
        ..m
    })
}

/// Variance of the stored row at `phase`. Variance is parity-invariant, so
/// no mirroring is needed.
pub fn grid_variance(w: &TomogramGrid, phase: f64) -> Result<f64> {
    let (i, _) = w.phase_index(phase)?;
    tomographic_variance(&w.rows()[i], w.x_grid())
}

/// Moments of w(·, θ) integrated directly from the state.
///
/// The row is recomputed on its own uniform grid, independent of any stored
/// tomogram, and the step is halved until the raw moments settle. The
/// trapezoid rule converges geometrically for these smooth, rapidly decaying
/// densities.
pub fn state_moments(state: &StateSpec, phase: f64) -> Result<MomentSet> {
    let (th, mirror) = canonical_phase(phase);
    let analytic = state.analytic_moments(th);
    let sigma = analytic.variance.sqrt();
    let (sigma_max, _) = state.spread();
    let mut half = analytic.mean.abs() + COVERAGE_SIGMAS * sigma_max;
    let mut n_x = 2 * (4.0 * half / sigma).ceil() as usize + 1;
    let mut grid = XGrid::symmetric(half, n_x)?;
    let mut row = tomogram_row(state, th, &grid)?;
    while row[0].max(row[n_x - 1]) > DIRECT_DENSITY_FLOOR && half < 1e3 {
        half *= 1.25;
        grid = XGrid::symmetric(half, n_x)?;
        row = tomogram_row(state, th, &grid)?;
    }
    let mut previous = raw_moments(&row, &grid);
    let mut change = f64::INFINITY;
    for _ in 0..DIRECT_REFINEMENTS {
        n_x = 2 * n_x - 1;
        grid = XGrid::symmetric(half, n_x)?;
        let next = raw_moments(&tomogram_row(state, th, &grid)?, &grid);
        change = (0..3).map(|k| (next[k] - previous[k]).abs()).fold(0.0, f64::max);
        previous = next;
        if change < DIRECT_TOL {
            break;
        }
    }
    if change >= DIRECT_TOL {
        return Err(Error::NonConvergence {
            context: format!("direct moments at phase {phase}"),
            change,
            refinements: DIRECT_REFINEMENTS,
        });
    }
    let [mass, m1, m2] = previous;
    let first = m1 / mass;
    Ok(MomentSet {
        mean: if mirror { -first } else { first },
        variance: m2 / mass - first * first,
        phase,
    })
}

// Trapezoid raw moments ∫ w Xᵏ dX for k = 0, 1, 2.
fn raw_moments(row: &[f64], grid: &XGrid) -> [f64; 3] {
    let xs = grid.points();
    let h = grid.step();
    let m0 = trapezoid(row, h);
    let m1 = trapezoid(&row.iter().zip(&xs).map(|(w, x)| w * x).collect::<Vec<_>>(), h);
    let m2 = trapezoid(&row.iter().zip(&xs).map(|(w, x)| w * x * x).collect::<Vec<_>>(), h);
    [m0, m1, m2]
}

// Simpson moments of a row normalized by its own mass. The variance is taken
// about the mean to avoid cancellation for displaced states.
fn row_moments_unchecked(row: &[f64], grid: &XGrid) -> Result<(f64, f64)> {
    if row.len() != grid.n_x {
        return Err(Error::input(format!(
            "row has {} values, grid has {}",
            row.len(),
            grid.n_x
        )));
    }
    let h = grid.step();
    let mass = simpson(row, h);
    if !((mass - 1.0).abs() <= ROW_NORMALIZATION_TOL) {
        return Err(Error::input(format!("row integrates to {mass}, expected 1")));
    }
    let xs = grid.points();
    let first: Vec<f64> = row.iter().zip(&xs).map(|(w, x)| w * x).collect();
    let mean = simpson(&first, h) / mass;
    let second: Vec<f64> = row.iter().zip(&xs).map(|(w, x)| w * (x - mean).powi(2)).collect();
    let variance = simpson(&second, h) / mass;
    Ok((mean, variance))
}

// Gaussian-tail (Mills ratio) estimate of the mass beyond each window edge.
fn check_window(row: &[f64], grid: &XGrid, mean: f64, variance: f64) -> Result<()> {
    let sigma = variance.max(0.0).sqrt();
    if mean - COVERAGE_SIGMAS * sigma >= grid.x_min && mean + COVERAGE_SIGMAS * sigma <= grid.x_max {
        return Ok(());
    }
    let tail = |density: f64, edge: f64| density * variance / (edge - mean).abs().max(sigma);
    let mass = tail(row[0], grid.x_min) + tail(row[row.len() - 1], grid.x_max);
    log::warn!(
        "x window [{}, {}] is narrower than ±{COVERAGE_SIGMAS}σ about {mean}; estimated tail mass {mass:e}",
        grid.x_min,
        grid.x_max
    );
    if mass > MAX_TAIL_MASS {
        return Err(Error::Resolution(format!(
            "estimated probability {mass:e} outside the x window [{}, {}]",
            grid.x_min, grid.x_max
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states::PureStateSpec;
    use crate::tomography::{default_x_grid, uniform_phases};
    use std::f64::consts::{FRAC_PI_2, PI};

    fn row(state: &StateSpec, phase: f64) -> (Vec<f64>, XGrid) {
        let grid = default_x_grid(state);
        (tomogram_row(state, phase, &grid).unwrap(), grid)
    }

    #[test]
    fn mean_examples() {
        let (r, g) = row(&StateSpec::vacuum(), 0.7);
        assert!(tomographic_mean(&r, &g).unwrap().abs() < 1e-12);
        let (r, g) = row(&StateSpec::gaussian(1.0, 0.0, 1.0).unwrap(), 0.0);
        assert!((tomographic_mean(&r, &g).unwrap() - 1.0).abs() < 1e-9);
        let (r, g) = row(&StateSpec::gaussian(1.0, 2.0, 1.0).unwrap(), FRAC_PI_2);
        assert!((tomographic_mean(&r, &g).unwrap() - 2.0).abs() < 1e-9);
    }

    #[test]
    fn variance_examples() {
        for th in [0.0, 0.4, 1.9] {
            let (r, g) = row(&StateSpec::vacuum(), th);
            assert!((tomographic_variance(&r, &g).unwrap() - 0.5).abs() < 1e-9);
            let (r, g) = row(&StateSpec::fock(2).unwrap(), th);
            assert!((tomographic_variance(&r, &g).unwrap() - 2.5).abs() < 1e-8);
        }
        let squeezed = StateSpec::gaussian(0.0, 0.0, 2.0).unwrap();
        let (r, g) = row(&squeezed, 0.0);
        assert!((tomographic_variance(&r, &g).unwrap() - 1.0).abs() < 1e-9);
        let (r, g) = row(&squeezed, FRAC_PI_2);
        assert!((tomographic_variance(&r, &g).unwrap() - 0.25).abs() < 1e-9);
    }

    #[test]
    fn unnormalized_row_is_input_error() {
        let (mut r, g) = row(&StateSpec::vacuum(), 0.0);
        r.iter_mut().for_each(|v| *v *= 1.01);
        let err = tomographic_mean(&r, &g).unwrap_err();
        assert!(matches!(err, Error::InvalidInput(_)));
    }

    #[test]
    fn truncated_window_is_resolution_error() {
        let g = XGrid::symmetric(1.8, 257).unwrap();
        let gauss: Vec<f64> = g.points().iter().map(|x| (-x * x / 2.0).exp()).collect();
        let mass = simpson(&gauss, g.step());
        let r: Vec<f64> = gauss.iter().map(|v| v / mass).collect();
        let err = tomographic_variance(&r, &g).unwrap_err();
        assert!(matches!(err, Error::Resolution(_)), "{err}");
    }

    #[test]
    fn moments_match_oracle_across_phases() {
        let states = [
            StateSpec::gaussian(0.5, -1.0, 0.3).unwrap(),
            StateSpec::fock(3).unwrap(),
            StateSpec::from(PureStateSpec::fock_superposition(vec![0.6.into(), 0.0.into(), 0.8.into()]).unwrap()),
            StateSpec::thermal(1.0).unwrap(),
        ];
        for s in &states {
            let w = TomogramGrid::from_state_with(s, &uniform_phases(8), default_x_grid(s)).unwrap();
            for &th in w.phases() {
                let got = grid_moments(&w, th).unwrap();
                let want = s.analytic_moments(th);
                assert!((got.mean - want.mean).abs() < 1e-6, "{s:?} θ={th}");
                assert!((got.variance - want.variance).abs() < 1e-6, "{s:?} θ={th}");
            }
        }
    }

    #[test]
    fn parity_flips_grid_mean() {
        let s = StateSpec::gaussian(1.0, 0.0, 1.0).unwrap();
        let w = TomogramGrid::from_state_with(&s, &[0.0], default_x_grid(&s)).unwrap();
        assert!((grid_moments(&w, PI).unwrap().mean + 1.0).abs() < 1e-9);
    }

    #[test]
    fn variance_is_stable_under_grid_refinement() {
        let s = StateSpec::gaussian(0.3, 0.2, 1.5).unwrap();
        let coarse = default_x_grid(&s);
        let fine = XGrid::new(coarse.x_min, coarse.x_max, 2 * coarse.n_x).unwrap();
        for th in [0.0, 1.1] {
            let a = tomographic_variance(&tomogram_row(&s, th, &coarse).unwrap(), &coarse).unwrap();
            let b = tomographic_variance(&tomogram_row(&s, th, &fine).unwrap(), &fine).unwrap();
            assert!((a - b).abs() < 1e-8, "θ={th}: {a} vs {b}");
        }
    }

    #[test]
    fn direct_moments_match_oracle() {
        for s in [
            StateSpec::gaussian(1.0, 2.0, 0.5).unwrap(),
            StateSpec::fock(5).unwrap(),
            StateSpec::thermal(0.5).unwrap(),
        ] {
            for th in [0.0, 0.3, FRAC_PI_2, 2.5, 4.0] {
                let got = state_moments(&s, th).unwrap();
                let want = s.analytic_moments(th);
                assert!((got.mean - want.mean).abs() < 1e-9, "{s:?} θ={th} {got:?} {want:?}");
                assert!(
                    (got.variance - want.variance).abs() < 1e-9,
                    "{s:?} θ={th} {got:?} {want:?}"
                );
            }
        }
    }
}
