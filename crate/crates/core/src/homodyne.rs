//! Simulated homodyne detection and statistical re-estimation.
//!
//! Quadrature values are drawn by inverse-CDF sampling of a tabulated row:
//! the density is taken as piecewise linear between table points and the
//! CDF is inverted exactly within each interval. Each scheduled phase uses
//! its own ChaCha20 stream, so a seed fixes the whole dataset regardless of
//! thread count.

use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::inequalities::{trifonov_combination, InequalityKind, InequalityReport};
use crate::states::{MomentSet, StateSpec};
use crate::tomography::{canonical_phase, default_x_grid, tomogram_row, TomogramGrid, XGrid, PHASE_MATCH_TOL};

/// Fewest records at a phase for which moments are estimated.
pub const MIN_SAMPLES: usize = 30;
/// Table size used when sampling directly from a state.
pub const TABLE_POINTS: usize = 4097;
/// Largest accepted deviation of a sampling table's mass from 1.
pub const TABLE_MASS_TOL: f64 = 1e-4;
/// Recorded in dataset metadata.
pub const GENERATOR: &str = "ChaCha20Rng (rand_chacha 0.9) seeded with seed_from_u64(seed), stream = schedule index; \
                             inverse CDF of a piecewise-linear density";

/// Quadrature samples tagged with their phase.
#[derive(Debug, Clone, PartialEq)]
pub struct HomodyneDataset {
    /// (phase in [0, π), x)
    pub records: Vec<(f64, f64)>,
    pub seed: u64,
    pub state_label: String,
    pub generator: String,
}

/// Sidecar metadata written next to a dataset CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetMeta {
    pub seed: u64,
    pub state_label: String,
    pub generator: String,
}

/// Sample mean and unbiased variance with their standard errors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentEstimate {
    pub phase: f64,
    pub count: usize,
    pub mean: f64,
    pub mean_stderr: f64,
    pub variance: f64,
    pub variance_stderr: f64,
}

impl MomentEstimate {
    pub fn moments(&self) -> MomentSet {
        MomentSet {
            mean: self.mean,
            variance: self.variance,
            phase: self.phase,
        }
    }
}

/// Inverse CDF of a non-negative density tabulated on a uniform grid.
#[derive(Debug, Clone)]
pub struct InverseCdf {
    grid: XGrid,
    density: Vec<f64>,
    cdf: Vec<f64>,
}

impl InverseCdf {
    pub fn new(grid: XGrid, density: Vec<f64>) -> Result<Self> {
        if density.len() != grid.n_x {
            return Err(Error::input("density table does not match its grid"));
        }
        if density.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::input("density table must be finite and non-negative"));
        }
        let h = grid.step();
        let mut cdf = Vec::with_capacity(density.len());
        let mut acc = 0.0;
        cdf.push(0.0);
        for pair in density.windows(2) {
            acc += 0.5 * h * (pair[0] + pair[1]);
            cdf.push(acc);
        }
        if !(acc > 0.0) {
            return Err(Error::input("density table has zero mass"));
        }
        Ok(Self { grid, density, cdf })
    }

    /// Trapezoid mass of the table.
    pub fn mass(&self) -> f64 {
        self.cdf[self.cdf.len() - 1]
    }

    /// Quantile for `u` in [0, 1).
    pub fn quantile(&self, u: f64) -> f64 {
        let target = u * self.mass();
        let j = self.cdf.partition_point(|&c| c <= target).clamp(1, self.cdf.len() - 1) - 1;
        let h = self.grid.step();
        let (f0, f1) = (self.density[j], self.density[j + 1]);
        let rest = target - self.cdf[j];
        // Solve f0·t + (f1 − f0)·t²/(2h) = rest in the cancellation-free form.
        let slope = (f1 - f0) / (2.0 * h);
        let disc = (f0 * f0 + 4.0 * slope * rest).max(0.0);
        let denom = f0 + disc.sqrt();
        let t = if denom > 0.0 {
            (2.0 * rest / denom).clamp(0.0, h)
        } else {
            0.0
        };
        self.grid.point(j) + t
    }
}

impl HomodyneDataset {
    pub fn meta(&self) -> DatasetMeta {
        DatasetMeta {
            seed: self.seed,
            state_label: self.state_label.clone(),
            generator: self.generator.clone(),
        }
    }

    /// Distinct phases in order of first appearance.
    pub fn phases(&self) -> Vec<f64> {
        let mut out: Vec<f64> = Vec::new();
        for &(th, _) in &self.records {
            if !out.iter().any(|&p| (p - th).abs() < PHASE_MATCH_TOL) {
                out.push(th);
            }
        }
        out
    }

    /// Samples at `phase`, mirrored by the parity rule when needed.
    pub fn samples_at(&self, phase: f64) -> Vec<f64> {
        let (th, mirror) = canonical_phase(phase);
        let matches = |p: f64| (p - th).abs() < PHASE_MATCH_TOL;
        let near_pi = (th - std::f64::consts::PI).abs() < PHASE_MATCH_TOL;
        self.records
            .iter()
            .filter_map(|&(p, x)| {
                if matches(p) {
                    Some(if mirror { -x } else { x })
                } else if near_pi && p.abs() < PHASE_MATCH_TOL {
                    Some(if mirror { x } else { -x })
                } else {
                    None
                }
            })
            .collect()
    }

    pub fn to_csv_string(&self) -> String {
        let mut out = String::from("theta,x\n");
        for (th, x) in &self.records {
            out.push_str(&format!("{th:.16e},{x:.16e}\n"));
        }
        out
    }

    pub fn from_csv_str(text: &str, meta: DatasetMeta) -> Result<Self> {
        let mut lines = text.lines().enumerate();
        match lines.next() {
            Some((_, header)) if header.trim() == "theta,x" => {}
            _ => {
                return Err(Error::Csv {
                    line: 1,
                    message: "expected header \"theta,x\"".into(),
                })
            }
        }
        let mut records = Vec::new();
        for (i, line) in lines {
            if line.trim().is_empty() {
                continue;
            }
            let bad = |message: String| Error::Csv { line: i + 1, message };
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != 2 {
                return Err(bad(format!("expected 2 fields, found {}", fields.len())));
            }
            let parse = |s: &str| s.trim().parse::<f64>().map_err(|e| bad(format!("{s:?}: {e}")));
            let (th, x) = (parse(fields[0])?, parse(fields[1])?);
            if !(0.0..std::f64::consts::PI).contains(&th) {
                return Err(bad(format!("phase {th} outside [0, π)")));
            }
            if !x.is_finite() {
                return Err(bad(format!("non-finite sample {x}")));
            }
            records.push((th, x));
        }
        Ok(Self {
            records,
            seed: meta.seed,
            state_label: meta.state_label,
            generator: meta.generator,
        })
    }

    /// Path of the metadata sidecar for a dataset CSV at `path`.
    pub fn meta_path(path: &Path) -> PathBuf {
        let mut name = path.as_os_str().to_owned();
        name.push(".meta.json");
        PathBuf::from(name)
    }

    /// Writes the CSV at `path` and its metadata next to it.
    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_csv_string())?;
        let meta = serde_json::to_string_pretty(&self.meta())?;
        std::fs::write(Self::meta_path(path), meta + "\n")?;
        Ok(())
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)?;
        let meta: DatasetMeta = serde_json::from_str(&std::fs::read_to_string(Self::meta_path(path))?)?;
        Self::from_csv_str(&text, meta)
    }
}

/// Draws `count` samples at each scheduled phase from the state's tomogram.
///
/// The state label is the state's JSON form.
pub fn sample(state: &StateSpec, schedule: &[(f64, usize)], seed: u64) -> Result<HomodyneDataset> {
    validate_schedule(schedule)?;
    let grid = XGrid {
        n_x: TABLE_POINTS,
        ..default_x_grid(state)
    };
    let table = |th: f64| -> Result<InverseCdf> {
        let inv = InverseCdf::new(grid, tomogram_row(state, th, &grid)?)?;
        if (inv.mass() - 1.0).abs() > TABLE_MASS_TOL {
            return Err(Error::Resolution(format!(
                "sampling table at phase {th} holds probability {}",
                inv.mass()
            )));
        }
        Ok(inv)
    };
    let records = draw(schedule, seed, table)?;
    Ok(HomodyneDataset {
        records,
        seed,
        state_label: state.to_json(),
        generator: GENERATOR.into(),
    })
}

/// Draws from stored tomogram rows; every scheduled phase must be on the grid.
pub fn sample_from_grid(
    w: &TomogramGrid,
    schedule: &[(f64, usize)],
    seed: u64,
    label: &str,
) -> Result<HomodyneDataset> {
    validate_schedule(schedule)?;
    let table = |th: f64| -> Result<InverseCdf> {
        let (i, _) = w.phase_index(th)?;
        InverseCdf::new(*w.x_grid(), w.rows()[i].clone())
    };
    let records = draw(schedule, seed, table)?;
    Ok(HomodyneDataset {
        records,
        seed,
        state_label: label.into(),
        generator: GENERATOR.into(),
    })
}

fn validate_schedule(schedule: &[(f64, usize)]) -> Result<()> {
    if schedule.is_empty() {
        return Err(Error::input("phase schedule is empty"));
    }
    for &(th, n) in schedule {
        if !th.is_finite() {
            return Err(Error::input(format!("phase must be finite, got {th}")));
        }
        if n == 0 {
            return Err(Error::input(format!("sample count at phase {th} must be at least 1")));
        }
    }
    Ok(())
}

// Table lookups use the canonical phase; mirrored phases flip the samples.
fn draw(
    schedule: &[(f64, usize)],
    seed: u64,
    table: impl Fn(f64) -> Result<InverseCdf> + Sync,
) -> Result<Vec<(f64, f64)>> {
    let blocks = schedule
        .par_iter()
        .enumerate()
        .map(|(stream, &(phase, count))| {
            let (th, mirror) = canonical_phase(phase);
            let inv = table(th)?;
            let mut rng = ChaCha20Rng::seed_from_u64(seed);
            rng.set_stream(stream as u64);
            let sign = if mirror { -1.0 } else { 1.0 };
            Ok((0..count)
                .map(|_| (th, sign * inv.quantile(rng.random::<f64>())))
                .collect::<Vec<_>>())
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(blocks.concat())
}

/// Sample mean and unbiased variance at `phase`.
///
/// SE(mean) = s/√N and SE(s²) = √((m₄ − s⁴(N−3)/(N−1))/N) with m₄ the sample
/// fourth central moment.
pub fn estimate_moments(ds: &HomodyneDataset, phase: f64) -> Result<MomentEstimate> {
    let xs = ds.samples_at(phase);
    let n = xs.len();
    if n < MIN_SAMPLES {
        return Err(Error::InsufficientSamples {
            phase,
            count: n,
            required: MIN_SAMPLES,
        });
    }
    let nf = n as f64;
    let mean = xs.iter().sum::<f64>() / nf;
    let (m2, m4) = xs.iter().fold((0.0, 0.0), |(a, b), x| {
        let d2 = (x - mean) * (x - mean);
        (a + d2, b + d2 * d2)
    });
    let variance = m2 / (nf - 1.0);
    let m4 = m4 / nf;
    let var_of_var = ((m4 - variance * variance * (nf - 3.0) / (nf - 1.0)) / nf).max(0.0);
    Ok(MomentEstimate {
        phase,
        count: n,
        mean,
        mean_stderr: (variance / nf).sqrt(),
        variance,
        variance_stderr: var_of_var.sqrt(),
    })
}

/// Trifonov combination from estimated variances.
///
/// The standard error is first-order propagation of the four independent
/// variance errors; the report is satisfied iff lhs ≥ 1/4 − 3·stderr.
pub fn empirical_trifonov(ds1: &HomodyneDataset, ds2: &HomodyneDataset, phase: f64) -> Result<InequalityReport> {
    let quarter = std::f64::consts::FRAC_PI_2;
    let a = [estimate_moments(ds1, phase)?, estimate_moments(ds1, phase + quarter)?];
    let b = [estimate_moments(ds2, phase)?, estimate_moments(ds2, phase + quarter)?];
    let lhs = trifonov_combination([a[0].variance, a[1].variance], [b[0].variance, b[1].variance]);
    // ∂lhs/∂Var for Var₁(θ), Var₁(θ+π/2), Var₂(θ), Var₂(θ+π/2).
    let terms = [
        0.5 * b[1].variance * a[0].variance_stderr,
        0.5 * b[0].variance * a[1].variance_stderr,
        0.5 * a[1].variance * b[0].variance_stderr,
        0.5 * a[0].variance * b[1].variance_stderr,
    ];
    let stderr = terms.iter().map(|t| t * t).sum::<f64>().sqrt();
    Ok(InequalityReport::empirical(
        InequalityKind::Trifonov,
        phase,
        lhs,
        stderr,
    ))
}
