//! Dirichlet boxes of `H_ω`, their eigenvalues, and what can be built from
//! pooled eigenvalues: the integrated density of states, a Thouless-formula
//! estimate of the Lyapunov exponent, and an approximate spectrum.

use rayon::prelude::*;

use crate::cocycle::EnergyGrid;
use crate::dynamics::{Dynamics, Point};
use crate::sampling::{potential, SamplingFunction};
use crate::{Error, Result};

/// Pivot replacing an exact zero in the Sturm recurrence.
const PIVOT_MIN: f64 = 1e-300;

/// Default Thouless exclusion radius is the level spacing divided by this.
pub const DEFAULT_EXCLUSION_DIVISOR: f64 = 1000.0;

/// Fewest pooled eigenvalues [`thouless_gamma`] accepts.
pub const THOULESS_MIN_POOL: usize = 1000;

/// Symmetric tridiagonal matrix with unit off-diagonal (a Dirichlet box of
/// the discrete Laplacian plus potential).
#[derive(Clone, Debug, PartialEq)]
pub struct JacobiMatrix {
    diagonal: Vec<f64>,
}

impl JacobiMatrix {
    pub fn new(diagonal: Vec<f64>) -> Result<Self> {
        if diagonal.is_empty() {
            return Err(Error::Domain("a Jacobi matrix needs at least one site".into()));
        }
        if diagonal.iter().any(|d| !d.is_finite()) {
            return Err(Error::Domain("diagonal entries must be finite".into()));
        }
        Ok(JacobiMatrix { diagonal })
    }

    /// Box on sites `first..first + n` of the orbit of `omega`.
    pub fn from_orbit(
        function: &SamplingFunction,
        dynamics: &Dynamics,
        omega: Point,
        first: i64,
        n: usize,
    ) -> Result<Self> {
        if n == 0 {
            return Err(Error::Domain("box size must be positive".into()));
        }
        let w = potential(function, dynamics, omega, first, first + n as i64 - 1)?;
        Self::new(w.values)
    }

    pub fn len(&self) -> usize {
        self.diagonal.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diagonal.is_empty()
    }

    pub fn diagonal(&self) -> &[f64] {
        &self.diagonal
    }

    pub fn trace(&self) -> f64 {
        self.diagonal.iter().sum()
    }

    /// `[min V − 2, max V + 2]`, which contains every eigenvalue.
    pub fn gershgorin(&self) -> (f64, f64) {
        let (lo, hi) = self
            .diagonal
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &d| {
                (lo.min(d), hi.max(d))
            });
        (lo - 2.0, hi + 2.0)
    }

    /// Number of eigenvalues strictly below `x` (negative pivots of the
    /// LDLᵀ factorization of `H − x`).
    pub fn sturm_count(&self, x: f64) -> usize {
        let mut count = 0;
        let mut q = 1.0;
        for (i, &d) in self.diagonal.iter().enumerate() {
            q = if i == 0 { d - x } else { (d - x) - 1.0 / q };
            if q.abs() < PIVOT_MIN {
                q = -PIVOT_MIN;
            }
            if q < 0.0 {
                count += 1;
            }
        }
        count
    }

    /// All eigenvalues, ascending, each within `tol` (see [`eigenvalues`]).
    pub fn eigenvalues(&self, tol: f64) -> Result<Vec<f64>> {
        eigenvalues(self, tol)
    }
}

/// Independent Sturm recurrences advanced together in [`JacobiMatrix::sturm_counts`].
const LANES: usize = 8;

/// Count-grid points used to seed the bisection brackets.
const SEED_GRID: usize = 64;

impl JacobiMatrix {
    /// [`sturm_count`](Self::sturm_count) at several shifts in one pass. The
    /// recurrences are independent, so their division latencies overlap.
    pub fn sturm_counts(&self, xs: &[f64; LANES]) -> [usize; LANES] {
        let mut counts = [0usize; LANES];
        let mut q = [1.0f64; LANES];
        for (i, &d) in self.diagonal.iter().enumerate() {
            for l in 0..LANES {
                let mut ql = if i == 0 { d - xs[l] } else { (d - xs[l]) - 1.0 / q[l] };
                if ql.abs() < PIVOT_MIN {
                    ql = -PIVOT_MIN;
                }
                counts[l] += usize::from(ql < 0.0);
                q[l] = ql;
            }
        }
        counts
    }

    fn counts_at(&self, xs: &[f64]) -> Vec<usize> {
        xs.chunks(LANES)
            .flat_map(|chunk| {
                let mut lane = [chunk[0]; LANES];
                lane[..chunk.len()].copy_from_slice(chunk);
                self.sturm_counts(&lane)[..chunk.len()].to_vec()
            })
            .collect()
    }
}

/// Every eigenvalue of `matrix`, sorted ascending and repeated according to
/// multiplicity, found by Sturm-count bisection inside the Gershgorin bounds.
///
/// Counts on a coarse grid give each eigenvalue a starting bracket; the
/// brackets are then bisected [`LANES`] at a time until narrower than `tol`.
/// Each eigenvalue's bisection path depends only on its index, so results do
/// not depend on how the work is scheduled.
pub fn eigenvalues(matrix: &JacobiMatrix, tol: f64) -> Result<Vec<f64>> {
    let (lo, hi) = matrix.gershgorin();
    let min_tol = 4.0 * f64::EPSILON * (hi - lo);
    if !(tol >= min_tol) {
        return Err(Error::Tolerance { tol, min: min_tol });
    }
    let n = matrix.len();
    let step = (hi - lo) / SEED_GRID as f64;
    let grid: Vec<f64> = (0..=SEED_GRID)
        .map(|j| if j == SEED_GRID { hi } else { lo + j as f64 * step })
        .collect();
    let grid_counts = matrix.counts_at(&grid);
    // bracket for eigenvalue k: the grid cell where the count first exceeds k
    let bracket = |k: usize| {
        let j = grid_counts.partition_point(|&c| c <= k);
        (grid[j - 1], grid[j])
    };

    let solve_chunk = |first: usize| -> Vec<f64> {
        let m = LANES.min(n - first);
        let mut a = [0.0; LANES];
        let mut b = [0.0; LANES];
        let mut ks = [first; LANES];
        for l in 0..LANES {
            ks[l] = first + l.min(m - 1);
            (a[l], b[l]) = bracket(ks[l]);
        }
        loop {
            let mut mids = [0.0; LANES];
            let mut active = false;
            for l in 0..LANES {
                mids[l] = 0.5 * (a[l] + b[l]);
                active |= b[l] - a[l] > tol && mids[l] > a[l] && mids[l] < b[l];
            }
            if !active {
                break;
            }
            let counts = matrix.sturm_counts(&mids);
            for l in 0..LANES {
                if b[l] - a[l] > tol && mids[l] > a[l] && mids[l] < b[l] {
                    if counts[l] <= ks[l] {
                        a[l] = mids[l];
                    } else {
                        b[l] = mids[l];
                    }
                }
            }
        }
        (0..m).map(|l| 0.5 * (a[l] + b[l])).collect()
    };

    let starts: Vec<usize> = (0..n).step_by(LANES).collect();
    let mut out: Vec<f64> = if n >= 128 {
        starts.into_par_iter().flat_map_iter(solve_chunk).collect()
    } else {
        starts.into_iter().flat_map(solve_chunk).collect()
    };
    // Brackets are nested in k, so this only repairs ties at the last ulp.
    out.sort_by(f64::total_cmp);
    Ok(out)
}

/// Pooled eigenvalues of boxes `first..first + n` over several starting points.
#[derive(Clone, Debug, PartialEq)]
pub struct EigenSample {
    /// Sorted ascending.
    pub values: Vec<f64>,
    pub box_size: usize,
    pub sample_count: usize,
}

impl EigenSample {
    /// Mean level spacing of a single box.
    pub fn level_spacing(&self) -> f64 {
        match (self.values.first(), self.values.last()) {
            (Some(lo), Some(hi)) if self.box_size > 0 => (hi - lo) / self.box_size as f64,
            _ => 0.0,
        }
    }

    /// Fraction of pooled eigenvalues `≤ energy`.
    pub fn counting_fraction(&self, energy: f64) -> f64 {
        if self.values.is_empty() {
            return 0.0;
        }
        self.values.partition_point(|&e| e <= energy) as f64 / self.values.len() as f64
    }
}

pub fn box_eigenvalues(
    function: &SamplingFunction,
    dynamics: &Dynamics,
    omegas: &[Point],
    box_size: usize,
    first_site: i64,
    tol: f64,
) -> Result<EigenSample> {
    if omegas.is_empty() {
        return Err(Error::Domain("at least one ω sample is required".into()));
    }
    let per_sample: Vec<Vec<f64>> = omegas
        .par_iter()
        .map(|&w| JacobiMatrix::from_orbit(function, dynamics, w, first_site, box_size)?.eigenvalues(tol))
        .collect::<Result<_>>()?;
    let mut values: Vec<f64> = per_sample.into_iter().flatten().collect();
    values.sort_by(f64::total_cmp);
    Ok(EigenSample {
        values,
        box_size,
        sample_count: omegas.len(),
    })
}

/// Integrated density of states on a grid, with a boundary diagnostic.
#[derive(Clone, Debug, PartialEq)]
pub struct IdsTable {
    pub energies: Vec<f64>,
    pub k_values: Vec<f64>,
    /// `|k(E) − k'(E)|` where `k'` uses boxes shifted one site along the orbit.
    pub boundary_sensitivity: Vec<f64>,
    pub max_boundary_sensitivity: f64,
    pub box_size: usize,
    pub sample_count: usize,
    pub eigenvalues: EigenSample,
}

/// `k(E)` = average over ω of `#{eigenvalues ≤ E}/n` for the box on sites `1..=n`.
pub fn ids(
    function: &SamplingFunction,
    dynamics: &Dynamics,
    box_size: usize,
    omegas: &[Point],
    grid: EnergyGrid,
    tol: f64,
) -> Result<IdsTable> {
    if box_size < 8 {
        return Err(Error::Domain(format!("IDS box size {box_size} is below 8")));
    }
    let main = box_eigenvalues(function, dynamics, omegas, box_size, 1, tol)?;
    let shifted = box_eigenvalues(function, dynamics, omegas, box_size, 2, tol)?;
    let energies = grid.energies();
    let k_values: Vec<f64> = energies.iter().map(|&e| main.counting_fraction(e)).collect();
    let boundary_sensitivity: Vec<f64> = energies
        .iter()
        .zip(&k_values)
        .map(|(&e, k)| (k - shifted.counting_fraction(e)).abs())
        .collect();
    Ok(IdsTable {
        max_boundary_sensitivity: boundary_sensitivity.iter().copied().fold(0.0, f64::max),
        energies,
        k_values,
        boundary_sensitivity,
        box_size,
        sample_count: omegas.len(),
        eigenvalues: main,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct ThoulessEstimate {
    pub energy: f64,
    pub gamma: f64,
    pub included: usize,
    pub excluded: usize,
    pub exclusion_radius: f64,
    /// More than 1% of the pooled eigenvalues fell inside the exclusion radius.
    pub ill_conditioned: bool,
}

/// `γ_T(E)`: mean of `log|E − E_j|` over pooled box eigenvalues, skipping
/// those closer than the exclusion radius (default: a thousandth of the
/// level spacing).
pub fn thouless_gamma(energy: f64, sample: &EigenSample, exclusion_radius: Option<f64>) -> Result<ThoulessEstimate> {
    if sample.values.len() < THOULESS_MIN_POOL {
        return Err(Error::Domain(format!(
            "Thouless average needs at least {THOULESS_MIN_POOL} eigenvalues, got {}",
            sample.values.len()
        )));
    }
    let radius = exclusion_radius.unwrap_or_else(|| sample.level_spacing() / DEFAULT_EXCLUSION_DIVISOR);
    let (mut sum, mut included) = (0.0, 0usize);
    for &e in &sample.values {
        let d = (energy - e).abs();
        if d >= radius && d > 0.0 {
            sum += d.ln();
            included += 1;
        }
    }
    let excluded = sample.values.len() - included;
    Ok(ThoulessEstimate {
        energy,
        gamma: if included > 0 { sum / included as f64 } else { f64::NAN },
        included,
        excluded,
        exclusion_radius: radius,
        ill_conditioned: excluded * 100 > sample.values.len(),
    })
}

/// Union of `[e − gap, e + gap]` over sorted values, merged into disjoint intervals.
pub fn merge_intervals(sorted_values: &[f64], merge_gap: f64) -> Vec<(f64, f64)> {
    let mut out: Vec<(f64, f64)> = Vec::new();
    for &e in sorted_values {
        let (lo, hi) = (e - merge_gap, e + merge_gap);
        match out.last_mut() {
            Some(last) if lo <= last.1 => last.1 = last.1.max(hi),
            _ => out.push((lo, hi)),
        }
    }
    out
}

/// Approximate spectrum from pooled box eigenvalues.
pub fn spectrum_approx(
    function: &SamplingFunction,
    dynamics: &Dynamics,
    box_size: usize,
    omegas: &[Point],
    tol: f64,
    merge_gap: f64,
) -> Result<Vec<(f64, f64)>> {
    if !(merge_gap >= 0.0) {
        return Err(Error::Domain("merge gap must be non-negative".into()));
    }
    let sample = box_eigenvalues(function, dynamics, omegas, box_size, 1, tol)?;
    Ok(merge_intervals(&sample.values, merge_gap))
}
