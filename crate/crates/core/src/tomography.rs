//! Optical tomograms w(X, θ): the probability density of the homodyne
//! quadrature X at local-oscillator phase θ.
//!
//! A row is computed from the wave function as
//!
//! ```text
//! w(X, θ) = |∫ Ψ(y) exp(i y² cot θ / 2 − i X y / sin θ) dy|² / (2π |sin θ|)
//! ```
//!
//! which is singular near θ ≡ 0 (mod π). When |sin θ| < |cos θ| the same
//! density is obtained from the momentum wave function Ψ̃ rotated by −π/2, so
//! the oscillatory kernel stays bounded at every phase. θ = 0 and θ = π/2
//! return |Ψ(X)|² and |Ψ̃(X)|² directly.
//!
//! Phases are stored in [0, π); other phases are reached with the parity rule
//! w(X, θ + π) = w(−X, θ).

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt::Write as _;
use std::path::Path;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::quadrature::{composite_nodes, trapezoid, PANEL_ORDER};
use crate::states::{MixedStateSpec, PureStateSpec, StateSpec};

pub const DEFAULT_NX: usize = 256;
pub const DEFAULT_PHASES: usize = 64;
/// Half-width of the default X window in units of the largest quadrature
/// standard deviation.
pub const WINDOW_SIGMAS: f64 = 8.0;
/// Allowed deviation of a row's trapezoid integral from 1.
pub const ROW_NORMALIZATION_TOL: f64 = 1e-6;
/// Values below this are treated as rounding noise and clamped to zero.
pub const NEGATIVITY_TOL: f64 = 1e-12;
/// Two phases closer than this are considered the same grid phase.
pub const PHASE_MATCH_TOL: f64 = 1e-9;

const TAIL_TOL: f64 = 1e-12;
const EDGE_AMPLITUDE: f64 = 1e-14;
const CONVERGED_CHANGE: f64 = 1e-12;
const FAILED_CHANGE: f64 = 1e-8;
const MAX_REFINEMENTS: usize = 5;

/// Uniform quadrature grid x_j = x_min + j (x_max − x_min)/(n_x − 1).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct XGrid {
    pub x_min: f64,
    pub x_max: f64,
    pub n_x: usize,
}

impl XGrid {
    pub fn new(x_min: f64, x_max: f64, n_x: usize) -> Result<Self> {
        if n_x < 2 {
            return Err(Error::input(format!("x grid needs at least 2 points, got {n_x}")));
        }
        if !(x_min.is_finite() && x_max.is_finite() && x_min < x_max) {
            return Err(Error::input(format!("invalid x window [{x_min}, {x_max}]")));
        }
        Ok(Self { x_min, x_max, n_x })
    }

    pub fn symmetric(half_width: f64, n_x: usize) -> Result<Self> {
        Self::new(-half_width, half_width, n_x)
    }

    pub fn step(&self) -> f64 {
        (self.x_max - self.x_min) / (self.n_x - 1) as f64
    }

    pub fn point(&self, j: usize) -> f64 {
        if j + 1 == self.n_x {
            self.x_max
        } else {
            self.x_min + j as f64 * self.step()
        }
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.n_x).map(|j| self.point(j)).collect()
    }

    /// Linear interpolation of grid samples at `x`.
    pub fn interpolate(&self, values: &[f64], x: f64) -> Result<f64> {
        let slack = 1e-12 * (self.x_max - self.x_min);
        if !(x >= self.x_min - slack && x <= self.x_max + slack) {
            return Err(Error::Extrapolation {
                x,
                x_min: self.x_min,
                x_max: self.x_max,
            });
        }
        let t = ((x - self.x_min) / self.step()).clamp(0.0, (self.n_x - 1) as f64);
        let j = (t.floor() as usize).min(self.n_x - 2);
        let frac = t - j as f64;
        Ok(values[j] * (1.0 - frac) + values[j + 1] * frac)
    }
}

/// θ_k = kπ/n for k = 0..n.
pub fn uniform_phases(n: usize) -> Vec<f64> {
    (0..n).map(|k| k as f64 * PI / n as f64).collect()
}

/// Reduces any phase to [0, π); the flag reports whether X must be mirrored.
pub fn canonical_phase(phase: f64) -> (f64, bool) {
    let mut th = phase.rem_euclid(2.0 * PI);
    let mut mirror = false;
    if th >= PI {
        th -= PI;
        mirror = true;
    }
    // rem_euclid can round up to exactly 2π.
    if th >= PI {
        th = 0.0;
    }
    (th, mirror)
}

/// Symmetric X window covering ±[`WINDOW_SIGMAS`] standard deviations of the
/// state at every phase, with `DEFAULT_NX` points or more if the narrowest
/// quadrature needs a finer step.
pub fn default_x_grid(state: &StateSpec) -> XGrid {
    let (sigma_max, mean_max) = state.spread();
    let sigma_min = (0..128)
        .map(|k| state.analytic_moments(k as f64 * PI / 128.0).variance.sqrt())
        .fold(f64::INFINITY, f64::min);
    let half = mean_max + WINDOW_SIGMAS * sigma_max;
    let needed = (2.0 * half / (0.5 * sigma_min)).ceil() as usize + 1;
    XGrid {
        x_min: -half,
        x_max: half,
        n_x: DEFAULT_NX.max(needed),
    }
}

/// Which representation feeds the transform.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    /// Ψ(y) with the kernel at angle θ; stable for |sin θ| ≥ |cos θ|.
    Position,
    /// Ψ̃(p) with the kernel at angle θ − π/2; stable for |sin θ| < |cos θ|.
    Momentum,
}

impl Branch {
    pub fn preferred(phase: f64) -> Self {
        if phase.sin().abs() >= phase.cos().abs() {
            Branch::Position
        } else {
            Branch::Momentum
        }
    }
}

/// Chirped Fourier integral for one pure state, phase, and branch.
struct RowIntegrator {
    nodes: Vec<f64>,
    /// w_k f(y_k) e^{i a y_k²}
    weighted: Vec<Complex64>,
    /// coefficient b in e^{-i b X y}
    b: f64,
    prefactor: f64,
}

impl RowIntegrator {
    fn new(state: &PureStateSpec, phase: f64, branch: Branch, x_abs_max: f64) -> Result<Self> {
        let (angle, src_phase, conj_phase) = match branch {
            Branch::Position => (phase, 0.0, FRAC_PI_2),
            Branch::Momentum => (phase - FRAC_PI_2, FRAC_PI_2, 0.0),
        };
        let sin = angle.sin();
        if sin.abs() < 1e-300 {
            return Err(Error::input(format!(
                "phase {phase} is singular for the {branch:?} branch"
            )));
        }
        let a = 0.5 * angle.cos() / sin;
        let b = 1.0 / sin;
        let prefactor = 1.0 / (2.0 * PI * sin.abs());
        let source = |y: f64| match branch {
            Branch::Position => state.psi(y),
            Branch::Momentum => state.psi_tilde(y),
        };

        let conjugate = |y: f64| match branch {
            Branch::Position => state.psi_tilde(y),
            Branch::Momentum => state.psi(y),
        };
        let mut half = support_half_width(&source, state.analytic_moments(src_phase));
        let bandwidth = support_half_width(&conjugate, state.analytic_moments(conj_phase));

        let panels_for = |half: f64| {
            let k_max = 2.0 * a.abs() * half + b.abs() * x_abs_max + bandwidth;
            ((2.0 * half * k_max / 5.0).ceil() as usize).max(4)
        };

        // The edge criterion bounds the amplitude; also require the captured
        // probability to be complete.
        let mut tail = f64::INFINITY;
        for _ in 0..6 {
            let (ys, ws) = composite_nodes(-half, half, panels_for(half));
            let captured: f64 = ys.iter().zip(&ws).map(|(&y, &w)| w * source(y).norm_sqr()).sum();
            tail = (1.0 - captured).abs();
            if tail < TAIL_TOL {
                break;
            }
            half *= 1.5;
        }
        if tail >= TAIL_TOL {
            log::warn!("tomogram window tail {tail:e} above {TAIL_TOL:e} at phase {phase}");
        }

        let build = |panels: usize| {
            let (ys, ws) = composite_nodes(-half, half, panels);
            let weighted = ys
                .iter()
                .zip(&ws)
                .map(|(&y, &w)| source(y) * Complex64::from_polar(w, a * y * y))
                .collect();
            RowIntegrator {
                nodes: ys,
                weighted,
                b,
                prefactor,
            }
        };

        // Probe the hardest point of the row and refine until two panel
        // counts agree.
        let probes = [0.0, x_abs_max, -x_abs_max];
        let mut panels = panels_for(half);
        let mut current = build(panels);
        let mut change = f64::INFINITY;
        for _ in 0..MAX_REFINEMENTS {
            let finer = build(2 * panels);
            change = probes
                .iter()
                .map(|&x| (current.amplitude(x) - finer.amplitude(x)).norm() * prefactor.sqrt())
                .fold(0.0, f64::max);
            if change < CONVERGED_CHANGE {
                return Ok(current);
            }
            panels *= 2;
            current = finer;
        }
        if change > FAILED_CHANGE {
            return Err(Error::NonConvergence {
                context: format!(
                    "tomogram at phase {phase} ({branch:?} branch, {} nodes, window ±{half})",
                    panels * PANEL_ORDER
                ),
                change,
                refinements: MAX_REFINEMENTS,
            });
        }
        Ok(current)
    }

    fn amplitude(&self, x: f64) -> Complex64 {
        let bx = self.b * x;
        self.nodes
            .iter()
            .zip(&self.weighted)
            .map(|(&y, &g)| g * Complex64::from_polar(1.0, -bx * y))
            .sum()
    }

    fn density(&self, x: f64) -> f64 {
        self.prefactor * self.amplitude(x).norm_sqr()
    }

    /// Density on a uniform grid, stepping the kernel phase by recurrence.
    fn density_on(&self, grid: &XGrid) -> Vec<f64> {
        let n = self.nodes.len();
        let x0 = grid.x_min;
        let dx = grid.step();
        let mut terms: Vec<Complex64> = (0..n)
            .map(|k| self.weighted[k] * Complex64::from_polar(1.0, -self.b * x0 * self.nodes[k]))
            .collect();
        let steps: Vec<Complex64> = self
            .nodes
            .iter()
            .map(|&y| Complex64::from_polar(1.0, -self.b * dx * y))
            .collect();
        let mut out = Vec::with_capacity(grid.n_x);
        for j in 0..grid.n_x {
            // Re-anchor periodically so rounding in the recurrence stays bounded.
            if j > 0 && j % 64 == 0 {
                let x = x0 + j as f64 * dx;
                for ((t, g), y) in terms.iter_mut().zip(&self.weighted).zip(&self.nodes) {
                    *t = g * Complex64::from_polar(1.0, -self.b * x * y);
                }
            }
            let amp: Complex64 = terms.iter().sum();
            out.push(self.prefactor * amp.norm_sqr());
            for (t, s) in terms.iter_mut().zip(&steps) {
                *t *= s;
            }
        }
        out
    }
}

/// Smallest symmetric window outside which |f| stays below [`EDGE_AMPLITUDE`].
///
/// Starts just beyond the classical extent of the state and grows
/// geometrically; the amplitude is checked at several points past the edge
/// so an isolated zero cannot stop the search early.
fn support_half_width(f: &impl Fn(f64) -> Complex64, moments: crate::states::MomentSet) -> f64 {
    let sigma = moments.variance.sqrt();
    let mut half = moments.mean.abs() + 2.0 * sigma;
    for _ in 0..200 {
        let small = [1.0, 1.1, 1.25, 1.5]
            .iter()
            .all(|&k| f(k * half).norm() < EDGE_AMPLITUDE && f(-k * half).norm() < EDGE_AMPLITUDE);
        if small {
            return half;
        }
        half *= 1.1;
    }
    half
}

fn exact_marginal(state: &PureStateSpec, phase: f64) -> Option<Box<dyn Fn(f64) -> f64 + '_>> {
    if phase == 0.0 {
        Some(Box::new(move |x| state.psi(x).norm_sqr()))
    } else if phase == FRAC_PI_2 {
        Some(Box::new(move |x| state.psi_tilde(x).norm_sqr()))
    } else {
        None
    }
}

fn clamp_row(mut row: Vec<f64>) -> Vec<f64> {
    for v in &mut row {
        if *v < 0.0 {
            *v = 0.0;
        }
    }
    row
}

/// One tomogram row w(·, θ) of a pure state on a uniform grid.
pub fn optical_tomogram(state: &PureStateSpec, phase: f64, grid: &XGrid) -> Result<Vec<f64>> {
    if !phase.is_finite() {
        return Err(Error::input(format!("phase must be finite, got {phase}")));
    }
    let (th, mirror) = canonical_phase(phase);
    let mirrored_grid = XGrid {
        x_min: -grid.x_max,
        x_max: -grid.x_min,
        n_x: grid.n_x,
    };
    let eval_grid = if mirror { &mirrored_grid } else { grid };
    let mut row = match exact_marginal(state, th) {
        Some(f) => eval_grid.points().into_iter().map(f).collect(),
        None => {
            let x_abs = eval_grid.x_min.abs().max(eval_grid.x_max.abs());
            RowIntegrator::new(state, th, Branch::preferred(th), x_abs)?.density_on(eval_grid)
        }
    };
    if mirror {
        row.reverse();
    }
    Ok(clamp_row(row))
}

/// Row evaluated with an explicitly chosen branch at arbitrary points, used to
/// cross-check the two representations where both are well conditioned.
pub fn optical_tomogram_branch(state: &PureStateSpec, phase: f64, xs: &[f64], branch: Branch) -> Result<Vec<f64>> {
    let x_abs = xs.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
    let integrator = RowIntegrator::new(state, phase, branch, x_abs)?;
    Ok(xs.iter().map(|&x| integrator.density(x)).collect())
}

/// w(X, θ) at a single point, for any supported state.
pub fn tomogram_value(state: &StateSpec, phase: f64, x: f64) -> Result<f64> {
    if !x.is_finite() {
        return Err(Error::input(format!("x must be finite, got {x}")));
    }
    Ok(RowDensity::new(state, phase, x.abs())?.density(x))
}

/// Reusable evaluator of x ↦ w(x, θ) for one state and phase.
///
/// Node planning happens once in [`RowDensity::new`]; evaluations are then
/// plain sums. `x_abs_max` bounds the |x| that will be queried.
pub struct RowDensity<'a> {
    parts: Vec<(f64, RowEval<'a>)>,
    mirror: bool,
}

enum RowEval<'a> {
    Position(&'a PureStateSpec),
    Momentum(&'a PureStateSpec),
    Integral(RowIntegrator),
}

impl<'a> RowDensity<'a> {
    pub fn new(state: &'a StateSpec, phase: f64, x_abs_max: f64) -> Result<Self> {
        if !phase.is_finite() {
            return Err(Error::input(format!("phase must be finite, got {phase}")));
        }
        let (th, mirror) = canonical_phase(phase);
        let parts = state
            .components()
            .into_iter()
            .map(|(w, s)| {
                let eval = if th == 0.0 {
                    RowEval::Position(s)
                } else if th == FRAC_PI_2 {
                    RowEval::Momentum(s)
                } else {
                    RowEval::Integral(RowIntegrator::new(s, th, Branch::preferred(th), x_abs_max)?)
                };
                Ok((w, eval))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { parts, mirror })
    }

    pub fn density(&self, x: f64) -> f64 {
        let x = if self.mirror { -x } else { x };
        let total: f64 = self
            .parts
            .iter()
            .map(|(w, e)| {
                w * match e {
                    RowEval::Position(s) => s.psi(x).norm_sqr(),
                    RowEval::Momentum(s) => s.psi_tilde(x).norm_sqr(),
                    RowEval::Integral(i) => i.density(x),
                }
            })
            .sum();
        total.max(0.0)
    }
}

/// Weighted sum of component rows.
pub fn tomogram_row(state: &StateSpec, phase: f64, grid: &XGrid) -> Result<Vec<f64>> {
    let mut acc = vec![0.0; grid.n_x];
    for (w, s) in state.components() {
        let row = optical_tomogram(s, phase, grid)?;
        for (a, v) in acc.iter_mut().zip(row) {
            *a += w * v;
        }
    }
    Ok(acc)
}

/// Tomogram of a mixed state as the convex sum of its component tomograms.
pub fn tomogram_of_mixed(state: &MixedStateSpec, phases: &[f64], grid: &XGrid) -> Result<TomogramGrid> {
    TomogramGrid::from_state_with(&StateSpec::Mixed(state.clone()), phases, *grid)
}

/// Sampled tomogram on a phase × X grid.
#[derive(Debug, Clone, PartialEq)]
pub struct TomogramGrid {
    phases: Vec<f64>,
    x: XGrid,
    values: Vec<Vec<f64>>,
    origin: Option<StateSpec>,
}

impl TomogramGrid {
    /// Validates and stores externally supplied rows.
    ///
    /// Rows may come from anywhere (measured or synthetic); they only need to
    /// be non-negative densities that integrate to one.
    pub fn new(phases: Vec<f64>, x: XGrid, values: Vec<Vec<f64>>) -> Result<Self> {
        if phases.is_empty() {
            return Err(Error::input("tomogram needs at least one phase"));
        }
        if values.len() != phases.len() {
            return Err(Error::input(format!(
                "{} rows for {} phases",
                values.len(),
                phases.len()
            )));
        }
        for pair in phases.windows(2) {
            if pair[1] <= pair[0] {
                return Err(Error::input("phases must be strictly increasing"));
            }
        }
        if let Some(p) = phases.iter().find(|&&p| !(0.0..PI).contains(&p)) {
            return Err(Error::input(format!("phase {p} outside [0, π)")));
        }
        let mut clean = Vec::with_capacity(values.len());
        for (row, &phase) in values.into_iter().zip(&phases) {
            if row.len() != x.n_x {
                return Err(Error::input(format!(
                    "row at phase {phase} has {} values, expected {}",
                    row.len(),
                    x.n_x
                )));
            }
            if let Some(v) = row.iter().find(|v| !v.is_finite() || **v < -NEGATIVITY_TOL) {
                return Err(Error::input(format!("row at phase {phase} has invalid density {v}")));
            }
            let row = clamp_row(row);
            let norm = trapezoid(&row, x.step());
            if (norm - 1.0).abs() > ROW_NORMALIZATION_TOL {
                return Err(Error::input(format!(
                    "row at phase {phase} integrates to {norm}; widen the x window or renormalize"
                )));
            }
            clean.push(row);
        }
        Ok(Self {
            phases,
            x,
            values: clean,
            origin: None,
        })
    }

    /// Default grid for `state`: [`DEFAULT_PHASES`] phases and [`default_x_grid`].
    pub fn from_state(state: &StateSpec) -> Result<Self> {
        Self::from_state_with(state, &uniform_phases(DEFAULT_PHASES), default_x_grid(state))
    }

    /// Computes every row in parallel and keeps `state` attached for exact
    /// re-evaluation.
    pub fn from_state_with(state: &StateSpec, phases: &[f64], x: XGrid) -> Result<Self> {
        let values = phases
            .par_iter()
            .map(|&th| tomogram_row(state, th, &x))
            .collect::<Result<Vec<_>>>()?;
        let mut grid = Self::new(phases.to_vec(), x, values)?;
        grid.origin = Some(state.clone());
        Ok(grid)
    }

    /// Rows of independent Gaussian densities with the given means and
    /// variances. Such rows need not come from any wave function.
    pub fn gaussian_rows(phases: Vec<f64>, x: XGrid, means: &[f64], variances: &[f64]) -> Result<Self> {
        if means.len() != phases.len() || variances.len() != phases.len() {
            return Err(Error::input("one mean and variance per phase required"));
        }
        let values = means
            .iter()
            .zip(variances)
            .map(|(&m, &v)| {
                if !(v > 0.0) {
                    return Err(Error::input(format!("variance must be positive, got {v}")));
                }
                Ok(x.points()
                    .into_iter()
                    .map(|xx| (-(xx - m) * (xx - m) / (2.0 * v)).exp() / (2.0 * PI * v).sqrt())
                    .collect())
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(phases, x, values)
    }

    pub fn phases(&self) -> &[f64] {
        &self.phases
    }

    pub fn x_grid(&self) -> &XGrid {
        &self.x
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.values
    }

    pub fn origin(&self) -> Option<&StateSpec> {
        self.origin.as_ref()
    }

    pub fn with_origin(mut self, state: StateSpec) -> Self {
        self.origin = Some(state);
        self
    }

    pub fn without_origin(mut self) -> Self {
        self.origin = None;
        self
    }

    /// Grid row index for `phase` and whether X is mirrored (parity rule).
    pub fn phase_index(&self, phase: f64) -> Result<(usize, bool)> {
        let (th, mirror) = canonical_phase(phase);
        if let Some(i) = self.phases.iter().position(|&p| (p - th).abs() < PHASE_MATCH_TOL) {
            return Ok((i, mirror));
        }
        // A phase just below π is the mirror of phase 0.
        if (th - PI).abs() < PHASE_MATCH_TOL && self.phases[0].abs() < PHASE_MATCH_TOL {
            return Ok((0, !mirror));
        }
        Err(Error::MissingPhase { phase })
    }

    /// Row at an exact grid phase (mirrored if the parity rule applies).
    pub fn row_at(&self, phase: f64) -> Result<Vec<f64>> {
        let (i, mirror) = self.phase_index(phase)?;
        let mut row = self.values[i].clone();
        if mirror {
            if (self.x.x_min + self.x.x_max).abs() > 1e-9 * (self.x.x_max - self.x.x_min) {
                return Err(Error::input("mirroring a row requires a symmetric x window"));
            }
            row.reverse();
        }
        Ok(row)
    }

    /// Nearest stored phase, searching both θ and θ + π images.
    pub fn nearest_phase(&self, phase: f64) -> (usize, bool) {
        let (th, mirror) = canonical_phase(phase);
        let mut best = (0, mirror, f64::INFINITY);
        for (i, &p) in self.phases.iter().enumerate() {
            let d = (p - th).abs();
            if d < best.2 {
                best = (i, mirror, d);
            }
            let d_wrap = (p + PI - th).abs();
            if d_wrap < best.2 {
                best = (i, !mirror, d_wrap);
            }
        }
        (best.0, best.1)
    }

    /// w(X, θ): exact when the originating state is attached, otherwise linear
    /// in X on the nearest stored phase.
    pub fn value(&self, x: f64, phase: f64) -> Result<f64> {
        if let Some(state) = &self.origin {
            return tomogram_value(state, phase, x);
        }
        let (i, mirror) = self.nearest_phase(phase);
        self.x.interpolate(&self.values[i], if mirror { -x } else { x })
    }

    /// φ(r, θ) = ∫ w(U, θ) e^{irU} dU by quadrature over the stored row.
    pub fn characteristic(&self, phase: f64, r: f64) -> Result<Complex64> {
        let row = self.row_at(phase)?;
        row_characteristic(&row, &self.x, r)
    }

    pub fn to_csv_string(&self) -> String {
        let mut out = String::from("theta,x,w\n");
        let xs = self.x.points();
        for (th, row) in self.phases.iter().zip(&self.values) {
            for (x, w) in xs.iter().zip(row) {
                let _ = writeln!(out, "{th:.16e},{x:.16e},{w:.16e}");
            }
        }
        out
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_csv_string())?;
        Ok(())
    }

    /// Parses the `theta,x,w` format; rows must share one uniform x grid and
    /// each must be normalized.
    pub fn from_csv_str(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        match lines.next() {
            Some((_, h)) if h.trim() == "theta,x,w" => {}
            _ => {
                return Err(Error::Csv {
                    line: 1,
                    message: "expected header theta,x,w".into(),
                })
            }
        }
        // Consecutive records with equal theta form one row.
        let mut phases: Vec<f64> = Vec::new();
        let mut rows: Vec<(Vec<f64>, Vec<f64>)> = Vec::new();
        for (idx, line) in lines {
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            if fields.len() != 3 {
                return Err(Error::Csv {
                    line: idx + 1,
                    message: format!("expected 3 fields, found {}", fields.len()),
                });
            }
            let parse = |s: &str| {
                s.parse::<f64>().map_err(|e| Error::Csv {
                    line: idx + 1,
                    message: format!("{s:?}: {e}"),
                })
            };
            let (th, x, w) = (parse(fields[0])?, parse(fields[1])?, parse(fields[2])?);
            if phases.last() != Some(&th) {
                phases.push(th);
                rows.push((Vec::new(), Vec::new()));
            }
            let (xs, ws) = rows.last_mut().expect("row started");
            xs.push(x);
            ws.push(w);
        }
        let Some((xs_first, _)) = rows.first() else {
            return Err(Error::Csv {
                line: 2,
                message: "no data rows".into(),
            });
        };
        let xs_first = xs_first.clone();
        if rows.iter().any(|(xs, _)| *xs != xs_first) {
            return Err(Error::input("tomogram rows use different x grids"));
        }
        let values: Vec<Vec<f64>> = rows.into_iter().map(|(_, ws)| ws).collect();
        if xs_first.len() < 2 {
            return Err(Error::input("tomogram rows need at least 2 x points"));
        }
        let grid = XGrid::new(xs_first[0], *xs_first.last().unwrap(), xs_first.len())?;
        let tol = 1e-9 * (grid.x_max - grid.x_min);
        if xs_first
            .iter()
            .enumerate()
            .any(|(j, &x)| (x - grid.point(j)).abs() > tol)
        {
            return Err(Error::input("x values in the CSV are not uniformly spaced"));
        }
        Self::new(phases, grid, values)
    }

    pub fn read_csv(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_csv_str(&std::fs::read_to_string(path)?)
    }
}

/// Quadrature φ(r) = ∫ w(U) e^{irU} dU over one stored row.
///
/// Fails when the grid cannot resolve the requested frequency (r·Δx > π/2).
pub fn row_characteristic(row: &[f64], grid: &XGrid, r: f64) -> Result<Complex64> {
    if !(r.is_finite() && r >= 0.0) {
        return Err(Error::input(format!("r must be non-negative, got {r}")));
    }
    let dx = grid.step();
    if r * dx > FRAC_PI_2 {
        return Err(Error::Resolution(format!(
            "r = {r} needs x step below {:.3e}, grid has {dx:.3e}",
            FRAC_PI_2 / r
        )));
    }
    let vals: Vec<Complex64> = row
        .iter()
        .enumerate()
        .map(|(j, &w)| Complex64::from_polar(w, r * grid.point(j)))
        .collect();
    Ok(trapezoid(&vals, dx))
}

/// Point (X, μ, ν) of the symplectic tomogram; (μ, ν) ≠ (0, 0).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymplecticQuery {
    pub x: f64,
    pub mu: f64,
    pub nu: f64,
}

impl SymplecticQuery {
    pub fn new(x: f64, mu: f64, nu: f64) -> Result<Self> {
        if !(x.is_finite() && mu.is_finite() && nu.is_finite()) {
            return Err(Error::input("symplectic query must be finite"));
        }
        if mu == 0.0 && nu == 0.0 {
            return Err(Error::input("(μ, ν) must not both vanish"));
        }
        Ok(Self { x, mu, nu })
    }

    /// (X / r, θ*, r) with θ* the polar angle of (μ, ν).
    pub fn optical_coordinates(&self) -> (f64, f64, f64) {
        let r = self.mu.hypot(self.nu);
        (self.x / r, self.nu.atan2(self.mu), r)
    }
}

/// w(X, μ, ν) = w(X/r, θ*) / r with r = |(μ, ν)| and θ* its polar angle.
pub fn symplectic_tomogram(w: &TomogramGrid, q: &SymplecticQuery) -> Result<f64> {
    let (x, angle, r) = q.optical_coordinates();
    Ok(w.value(x, angle)? / r)
}
