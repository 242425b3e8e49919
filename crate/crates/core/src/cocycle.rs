//! Transfer-matrix cocycle and Lyapunov exponent estimation.
//!
//! A solution of `u(n+1) + u(n−1) + V(n)u(n) = E u(n)` is propagated by
//!
//! ```text
//! (u(n+1), u(n)) = [[E − V(n), −1], [1, 0]] · (u(n), u(n−1))
//! ```
//!
//! The top exponent is estimated by pushing the unit vector `(1, 0)` through
//! the cocycle and accumulating `log ‖v‖` at every renormalization.

use rayon::prelude::*;

use crate::dynamics::{Dynamics, Point};
use crate::sampling::{PotentialStream, SamplingFunction};
use crate::{Error, Result};

/// Norm above which a propagated vector counts as overflowing.
const OVERFLOW_NORM: f64 = 1e300;

/// Row-major 2×2 real matrix.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TransferMatrix {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl TransferMatrix {
    pub const IDENTITY: Self = TransferMatrix {
        a: 1.0,
        b: 0.0,
        c: 0.0,
        d: 1.0,
    };

    pub fn determinant(&self) -> f64 {
        self.a * self.d - self.b * self.c
    }

    /// `self · rhs`
    pub fn mul(&self, rhs: &TransferMatrix) -> TransferMatrix {
        TransferMatrix {
            a: self.a * rhs.a + self.b * rhs.c,
            b: self.a * rhs.b + self.b * rhs.d,
            c: self.c * rhs.a + self.d * rhs.c,
            d: self.c * rhs.b + self.d * rhs.d,
        }
    }

    /// Operator 2-norm (largest singular value).
    pub fn norm(&self) -> f64 {
        let s = self.a * self.a + self.b * self.b + self.c * self.c + self.d * self.d;
        let det = self.determinant();
        let disc = (s * s - 4.0 * det * det).max(0.0).sqrt();
        ((s + disc) / 2.0).sqrt()
    }
}

/// `[[E − v, −1], [1, 0]]`
pub fn single_step(energy: f64, v: f64) -> TransferMatrix {
    TransferMatrix {
        a: energy - v,
        b: -1.0,
        c: 1.0,
        d: 0.0,
    }
}

/// `U(n, E, V) = A(V(n)) ⋯ A(V(1))` as an explicit product. Only usable for
/// short products; [`lyapunov`] never forms the matrix.
pub fn transfer_product(energy: f64, potential: &[f64]) -> TransferMatrix {
    potential
        .iter()
        .fold(TransferMatrix::IDENTITY, |acc, &v| single_step(energy, v).mul(&acc))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LyapunovSettings {
    pub n_steps: u64,
    pub renorm_every: u32,
    pub block_count: u32,
}

impl Default for LyapunovSettings {
    fn default() -> Self {
        LyapunovSettings {
            n_steps: 1_000_000,
            renorm_every: 16,
            block_count: 20,
        }
    }
}

impl LyapunovSettings {
    pub fn with_steps(n_steps: u64) -> Self {
        LyapunovSettings {
            n_steps,
            ..Default::default()
        }
    }

    fn validate(&self) -> Result<()> {
        if self.renorm_every == 0 || self.block_count == 0 {
            return Err(Error::Domain("renorm_every and block_count must be positive".into()));
        }
        if self.n_steps < u64::from(self.block_count) * u64::from(self.renorm_every) {
            return Err(Error::Domain(format!(
                "n_steps = {} is below block_count·renorm_every = {}",
                self.n_steps,
                u64::from(self.block_count) * u64::from(self.renorm_every)
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LyapunovEstimate {
    pub energy: f64,
    /// Nats per lattice step.
    pub gamma: f64,
    pub n_steps: u64,
    /// Standard error from the spread of the block averages.
    pub stderr: f64,
    pub block_slopes: Vec<f64>,
    /// Renormalization period actually used (1 after an overflow retry).
    pub renorm_every: u32,
}

/// Estimate of γ(E) along the orbit of `omega`, using `V(1), …, V(n_steps)`.
///
/// On overflow the run is repeated once with renormalization at every step.
pub fn lyapunov(
    energy: f64,
    function: &SamplingFunction,
    dynamics: &Dynamics,
    omega: Point,
    settings: LyapunovSettings,
) -> Result<LyapunovEstimate> {
    settings.validate()?;
    if !energy.is_finite() {
        return Err(Error::Domain(format!("energy {energy} is not finite")));
    }
    let run = |renorm: u32| -> Result<Option<(f64, Vec<f64>)>> {
        let stream = PotentialStream::new(function, dynamics, omega, 1)?;
        Ok(propagate(
            energy,
            stream,
            settings.n_steps,
            renorm,
            settings.block_count,
        ))
    };
    let (renorm, (total, block_slopes)) = match run(settings.renorm_every)? {
        Some(r) => (settings.renorm_every, r),
        None => match run(1)? {
            Some(r) => (1, r),
            None => {
                return Err(Error::Numeric(format!(
                    "transfer vector overflowed at E = {energy} even with per-step renormalization"
                )))
            }
        },
    };
    let b = block_slopes.len() as f64;
    let stderr = if block_slopes.len() > 1 {
        let mean = block_slopes.iter().sum::<f64>() / b;
        let var = block_slopes.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / (b - 1.0);
        (var / b).sqrt()
    } else {
        0.0
    };
    Ok(LyapunovEstimate {
        energy,
        gamma: total / settings.n_steps as f64,
        n_steps: settings.n_steps,
        stderr,
        block_slopes,
        renorm_every: renorm,
    })
}

/// Returns the accumulated log-norm and per-block slopes, or `None` on overflow.
fn propagate(
    energy: f64,
    mut potential: impl Iterator<Item = f64>,
    n_steps: u64,
    renorm_every: u32,
    block_count: u32,
) -> Option<(f64, Vec<f64>)> {
    let (mut x, mut y) = (1.0f64, 0.0f64);
    let mut total = 0.0;
    let mut slopes = Vec::with_capacity(block_count as usize);
    let base = n_steps / u64::from(block_count);
    let extra = n_steps % u64::from(block_count);

    let renormalize = |x: &mut f64, y: &mut f64| -> Option<f64> {
        let scale = x.abs().max(y.abs());
        if !scale.is_finite() || scale == 0.0 {
            return None;
        }
        let norm = scale * ((*x / scale).powi(2) + (*y / scale).powi(2)).sqrt();
        if norm > OVERFLOW_NORM {
            return None;
        }
        *x /= norm;
        *y /= norm;
        Some(norm.ln())
    };

    for block in 0..u64::from(block_count) {
        let len = base + u64::from(block < extra);
        let mut acc = 0.0;
        let mut since = 0u32;
        for _ in 0..len {
            let v = potential.next()?;
            let nx = (energy - v) * x - y;
            y = x;
            x = nx;
            since += 1;
            if since == renorm_every {
                acc += renormalize(&mut x, &mut y)?;
                since = 0;
            }
        }
        if since > 0 {
            acc += renormalize(&mut x, &mut y)?;
        }
        total += acc;
        slopes.push(acc / len as f64);
    }
    Some((total, slopes))
}

/// Uniform closed energy grid including both endpoints.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EnergyGrid {
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

impl EnergyGrid {
    pub fn new(min: f64, max: f64, count: usize) -> Result<Self> {
        if !(min.is_finite() && max.is_finite()) || count == 0 {
            return Err(Error::Domain("energy grid needs finite ends and count ≥ 1".into()));
        }
        if max < min || (count == 1 && max != min) || (count > 1 && max == min) {
            return Err(Error::Domain(format!(
                "invalid energy grid [{min}, {max}] with {count} points"
            )));
        }
        Ok(EnergyGrid { min, max, count })
    }

    pub fn single(energy: f64) -> Result<Self> {
        Self::new(energy, energy, 1)
    }

    pub fn spacing(&self) -> f64 {
        if self.count < 2 {
            0.0
        } else {
            (self.max - self.min) / (self.count - 1) as f64
        }
    }

    pub fn energy(&self, i: usize) -> f64 {
        if i + 1 == self.count {
            self.max
        } else {
            self.min + i as f64 * self.spacing()
        }
    }

    pub fn energies(&self) -> Vec<f64> {
        (0..self.count).map(|i| self.energy(i)).collect()
    }

    pub fn total_length(&self) -> f64 {
        self.max - self.min
    }
}

/// One energy of a sweep, averaged over the ω seeds that succeeded.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow {
    pub energy: f64,
    pub gamma: f64,
    pub stderr: f64,
    pub n_steps: u64,
    /// Number of seeds contributing to `gamma`.
    pub seed_count: usize,
    /// Set when at least one seed failed.
    pub flagged: bool,
    pub per_seed: Vec<LyapunovEstimate>,
    pub errors: Vec<Error>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepTable {
    pub grid: EnergyGrid,
    pub rows: Vec<SweepRow>,
}

/// γ(E) over a grid, averaged over several starting points. Energies run in
/// parallel; rows come back sorted by energy regardless of worker count.
pub fn lyapunov_sweep(
    function: &SamplingFunction,
    dynamics: &Dynamics,
    omegas: &[Point],
    grid: EnergyGrid,
    settings: LyapunovSettings,
) -> Result<SweepTable> {
    if omegas.is_empty() {
        return Err(Error::Domain("lyapunov sweep needs at least one ω".into()));
    }
    settings.validate()?;
    function.check_dynamics(dynamics)?;
    for w in omegas {
        dynamics.check_point(w)?;
    }
    let rows = grid
        .energies()
        .into_par_iter()
        .map(|energy| {
            let mut per_seed = Vec::with_capacity(omegas.len());
            let mut errors = Vec::new();
            for &w in omegas {
                match lyapunov(energy, function, dynamics, w, settings) {
                    Ok(est) => per_seed.push(est),
                    Err(e) => errors.push(e),
                }
            }
            let k = per_seed.len() as f64;
            let (gamma, stderr) = if per_seed.is_empty() {
                (f64::NAN, f64::NAN)
            } else {
                (
                    per_seed.iter().map(|e| e.gamma).sum::<f64>() / k,
                    per_seed.iter().map(|e| e.stderr * e.stderr).sum::<f64>().sqrt() / k,
                )
            };
            SweepRow {
                energy,
                gamma,
                stderr,
                n_steps: settings.n_steps,
                seed_count: per_seed.len(),
                flagged: !errors.is_empty(),
                per_seed,
                errors,
            }
        })
        .collect();
    Ok(SweepTable { grid, rows })
}

/// Thresholded Lebesgue-measure proxy for `{E : γ(E) = 0}`.
#[derive(Clone, Debug, PartialEq)]
pub struct VanishingSetEstimate {
    pub threshold: f64,
    pub grid: EnergyGrid,
    /// `spacing · #{E : γ(E) < threshold}`.
    pub measure_estimate: f64,
    pub flagged_energies: Vec<f64>,
    pub measure_at_half_threshold: f64,
    pub measure_at_double_threshold: f64,
}

/// Finite-run estimates at elliptic energies can dip slightly below zero; they
/// are clamped to 0 before comparison, so a zero threshold selects nothing.
/// Rows where every seed failed are skipped.
pub fn vanishing_set(table: &SweepTable, threshold: f64) -> VanishingSetEstimate {
    let below = |t: f64| -> Vec<f64> {
        table
            .rows
            .iter()
            .filter(|r| r.seed_count > 0 && r.gamma.max(0.0) < t)
            .map(|r| r.energy)
            .collect()
    };
    let spacing = table.grid.spacing();
    let flagged_energies = below(threshold);
    VanishingSetEstimate {
        threshold,
        grid: table.grid,
        measure_estimate: spacing * flagged_energies.len() as f64,
        measure_at_half_threshold: spacing * below(threshold / 2.0).len() as f64,
        measure_at_double_threshold: spacing * below(threshold * 2.0).len() as f64,
        flagged_energies,
    }
}
