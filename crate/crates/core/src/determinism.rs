//! Non-determinism witnesses: pairs of potentials from the same family that
//! agree on a left window `[−m, −1]` and split at `n = 0`.

use rayon::prelude::*;

use crate::dynamics::{return_times, sample_points, Dynamics, Point, TorusPoint};
use crate::sampling::{potential, PotentialWindow, SamplingFunction};
use crate::{Error, Result};

/// Orbit points closer than this to a discontinuity are refused.
pub const GUARD_RADIUS: TorusPoint = TorusPoint::from_raw(1 << 24);

/// Cap on pairs materialized by [`witness_search`]; all pairs are still counted.
pub const DEFAULT_MAX_PAIRS: usize = 256;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

#[derive(Clone, Debug, PartialEq)]
pub struct WitnessPair {
    pub omega_a: Point,
    pub omega_b: Point,
    pub m: usize,
    /// Achieved `max |V_a(n) − V_b(n)|` over `n ∈ [−m, −1]`.
    pub eps: f64,
    /// Achieved `|V_a(0) − V_b(0)|`.
    pub delta: f64,
    pub left_a: PotentialWindow,
    pub left_b: PotentialWindow,
    pub v0_a: f64,
    pub v0_b: f64,
}

impl WitnessPair {
    /// Computes both potentials on `[−m, 0]` and records the discrepancies,
    /// ordering the points so that `omega_a < omega_b`.
    pub fn from_points(function: &SamplingFunction, dynamics: &Dynamics, a: Point, b: Point, m: usize) -> Result<Self> {
        if m == 0 {
            return Err(Error::Domain("window length m must be positive".into()));
        }
        let (a, b) = if b < a { (b, a) } else { (a, b) };
        let m_i = m as i64;
        let left_a = potential(function, dynamics, a, -m_i, -1)?;
        let left_b = potential(function, dynamics, b, -m_i, -1)?;
        let v0_a = function.evaluate(a)?;
        let v0_b = function.evaluate(b)?;
        Ok(WitnessPair {
            omega_a: a,
            omega_b: b,
            m,
            eps: left_a.sup_distance(&left_b),
            delta: (v0_a - v0_b).abs(),
            left_a,
            left_b,
            v0_a,
            v0_b,
        })
    }

    /// Recomputes both potentials from scratch and checks the stored bounds.
    pub fn verify(&self) -> bool {
        let f = &self.left_a.function;
        let d = &self.left_a.dynamics;
        let m = self.m as i64;
        let (Ok(a), Ok(b)) = (
            potential(f, d, self.omega_a, -m, 0),
            potential(f, d, self.omega_b, -m, 0),
        ) else {
            return false;
        };
        let eps = a.values[..self.m]
            .iter()
            .zip(&b.values[..self.m])
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max);
        let (v0_a, v0_b) = (a.values[self.m], b.values[self.m]);
        self.omega_a < self.omega_b
            && eps <= self.eps
            && (v0_a - v0_b).abs() >= self.delta
            && a.values[..self.m] == self.left_a.values[..]
            && b.values[..self.m] == self.left_b.values[..]
    }
}

fn guard_orbit(
    function: &SamplingFunction,
    dynamics: &Dynamics,
    omega: TorusPoint,
    range: impl Iterator<Item = i64>,
) -> Result<()> {
    let breaks = function.discontinuities();
    if breaks.is_empty() {
        return Ok(());
    }
    for n in range {
        let x = dynamics
            .iterate(Point::Circle(omega), n)?
            .circle()
            .expect("rotation orbit");
        if let Some(b) = breaks.iter().find(|b| b.distance(x) <= GUARD_RADIUS) {
            return Err(Error::Guard(format!(
                "T^{n}ω lies within 2^-40 of the discontinuity {}",
                b.to_f64()
            )));
        }
    }
    Ok(())
}

fn rotation_only(dynamics: &Dynamics) -> Result<()> {
    match dynamics {
        Dynamics::Rotation { .. } => Ok(()),
        other => Err(Error::UnsupportedDynamics(format!(
            "{} dynamics; a circle rotation is required",
            other.name()
        ))),
    }
}

/// Pair `ω₀ ∓ h` straddling the discontinuity `omega0`, with `h` halved from
/// 1/4 until the left windows agree within `eps_target` and the values at 0
/// differ by at least half the jump.
pub fn construct_witness(
    function: &SamplingFunction,
    dynamics: &Dynamics,
    omega0: TorusPoint,
    m: usize,
    approach: (Side, Side),
    eps_target: f64,
) -> Result<WitnessPair> {
    rotation_only(dynamics)?;
    if approach.0 == approach.1 {
        return Err(Error::Domain("approach sides must differ".into()));
    }
    if !(eps_target >= 0.0) {
        return Err(Error::Domain(format!("eps target {eps_target} must be non-negative")));
    }
    if m == 0 {
        return Err(Error::Domain("window length m must be positive".into()));
    }
    let jump = function.one_sided_limits(omega0)?.jump;
    if jump <= 0.0 {
        return Err(Error::Guard(format!("f has no jump at {}", omega0.to_f64())));
    }
    guard_orbit(function, dynamics, omega0, -(m as i64)..=-1)?;

    let at = |side: Side, h: u64| {
        let h = TorusPoint::from_raw(h);
        Point::Circle(match side {
            Side::Left => omega0 - h,
            Side::Right => omega0 + h,
        })
    };
    let mut h = 1u64 << 62;
    while h > 0 {
        let w = WitnessPair::from_points(function, dynamics, at(approach.0, h), at(approach.1, h), m)?;
        if w.eps <= eps_target && w.delta >= jump / 2.0 {
            return Ok(w);
        }
        h >>= 1;
    }
    Err(Error::ResolutionExhausted(format!(
        "no offset above 2^-64 separates the sides of {} within eps {eps_target}",
        omega0.to_f64()
    )))
}

/// Windows `V(−m_max..=0)` for a fixed sample set, reusable across `m ≤ m_max`.
struct SampleWindows {
    points: Vec<Point>,
    m_max: usize,
    /// Row-major, `m_max + 1` values per point; the last is `V(0)`.
    values: Vec<f64>,
}

impl SampleWindows {
    fn new(function: &SamplingFunction, dynamics: &Dynamics, points: Vec<Point>, m_max: usize) -> Result<Self> {
        function.check_dynamics(dynamics)?;
        let stride = m_max + 1;
        let rows: Vec<Vec<f64>> = points
            .par_iter()
            .map(|&w| potential(function, dynamics, w, -(m_max as i64), 0).map(|p| p.values))
            .collect::<Result<_>>()?;
        let mut values = Vec::with_capacity(points.len() * stride);
        rows.into_iter().for_each(|r| values.extend(r));
        Ok(SampleWindows { points, m_max, values })
    }

    fn row(&self, i: usize) -> &[f64] {
        let stride = self.m_max + 1;
        &self.values[i * stride..(i + 1) * stride]
    }

    fn v0(&self, i: usize) -> f64 {
        self.row(i)[self.m_max]
    }
}

/// Bucket key of one value: exact bits for `eps = 0`, otherwise the cell index
/// on a grid of the largest power of two not exceeding `eps`. These grids are
/// nested, so a smaller `eps` always refines the buckets of a larger one.
fn quantizer(eps: f64) -> impl Fn(f64) -> u64 + Sync {
    let quantum = if eps >= f64::MIN_POSITIVE && eps.is_finite() {
        f64::from_bits(eps.to_bits() & 0xFFF0_0000_0000_0000)
    } else {
        0.0
    };
    move |v: f64| {
        let cell = if quantum > 0.0 { (v / quantum).floor() } else { v };
        if cell == 0.0 {
            0
        } else {
            cell.to_bits()
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct WitnessSearch {
    pub m: usize,
    pub eps: f64,
    pub delta_min: f64,
    pub sample_count: usize,
    /// Verified pairs, at most the materialization cap.
    pub pairs: Vec<WitnessPair>,
    /// Total number of qualifying bucket pairs.
    pub pairs_found: u64,
    /// Largest `|V_a(0) − V_b(0)|` over qualifying pairs (0 if none).
    pub max_delta: f64,
}

fn search_windows(
    function: &SamplingFunction,
    dynamics: &Dynamics,
    windows: &SampleWindows,
    keys: &[u64],
    m: usize,
    eps: f64,
    delta_min: f64,
    max_pairs: usize,
) -> Result<WitnessSearch> {
    let stride = windows.m_max + 1;
    let left = |i: usize| &keys[i * stride + windows.m_max - m..i * stride + windows.m_max];
    let mut order: Vec<usize> = (0..windows.points.len()).collect();
    order.par_sort_unstable_by(|&i, &j| {
        left(i)
            .cmp(left(j))
            .then(windows.v0(i).total_cmp(&windows.v0(j)))
            .then(i.cmp(&j))
    });

    let qualifies = |lo: f64, hi: f64| {
        let d = hi - lo;
        d >= delta_min && d > 0.0
    };
    let mut out = WitnessSearch {
        m,
        eps,
        delta_min,
        sample_count: windows.points.len(),
        pairs: Vec::new(),
        pairs_found: 0,
        max_delta: 0.0,
    };
    for group in order.chunk_by(|&i, &j| left(i) == left(j)) {
        let v0: Vec<f64> = group.iter().map(|&i| windows.v0(i)).collect();
        let (first, last) = (v0[0], v0[v0.len() - 1]);
        if !qualifies(first, last) {
            continue;
        }
        out.max_delta = out.max_delta.max(last - first);
        for (a, &lo) in v0.iter().enumerate() {
            let start = a + 1 + v0[a + 1..].partition_point(|&hi| !qualifies(lo, hi));
            out.pairs_found += (v0.len() - start) as u64;
            for b in start..v0.len() {
                if out.pairs.len() >= max_pairs {
                    break;
                }
                let pair = WitnessPair::from_points(
                    function,
                    dynamics,
                    windows.points[group[a]],
                    windows.points[group[b]],
                    m,
                )?;
                if pair.eps <= eps && pair.delta >= delta_min && pair.verify() {
                    out.pairs.push(pair);
                }
            }
        }
    }
    Ok(out)
}

fn check_search_args(m: usize, eps: f64, delta_min: f64, sample_count: usize) -> Result<()> {
    if m == 0 {
        return Err(Error::Domain("window length m must be positive".into()));
    }
    if !(eps >= 0.0) || !eps.is_finite() {
        return Err(Error::Domain(format!("eps {eps} must be finite and non-negative")));
    }
    if !(delta_min >= 0.0) {
        return Err(Error::Domain(format!("delta_min {delta_min} must be non-negative")));
    }
    if sample_count < 2 {
        return Err(Error::Domain("witness search needs at least two samples".into()));
    }
    Ok(())
}

/// Pairs among `sample_count` seeded samples whose left windows share an
/// eps-bucket and whose values at 0 differ by at least `delta_min`.
pub fn witness_search(
    function: &SamplingFunction,
    dynamics: &Dynamics,
    m: usize,
    eps: f64,
    delta_min: f64,
    sample_count: usize,
    seed: u64,
) -> Result<WitnessSearch> {
    let samples = sample_points(dynamics, sample_count, seed);
    witness_search_over(function, dynamics, samples, m, eps, delta_min, DEFAULT_MAX_PAIRS)
}

/// [`witness_search`] over an explicit sample set.
pub fn witness_search_over(
    function: &SamplingFunction,
    dynamics: &Dynamics,
    samples: Vec<Point>,
    m: usize,
    eps: f64,
    delta_min: f64,
    max_pairs: usize,
) -> Result<WitnessSearch> {
    check_search_args(m, eps, delta_min, samples.len())?;
    let windows = SampleWindows::new(function, dynamics, samples, m)?;
    let quantize = quantizer(eps);
    let keys: Vec<u64> = windows.values.iter().map(|&v| quantize(v)).collect();
    search_windows(function, dynamics, &windows, &keys, m, eps, delta_min, max_pairs)
}

#[derive(Clone, Debug, PartialEq)]
pub struct DefectProfile {
    pub m_values: Vec<usize>,
    pub eps: f64,
    /// Largest gap at 0 among eps-agreeing pairs, per m.
    pub defect: Vec<f64>,
    pub pairs_found: Vec<u64>,
    pub sample_count: usize,
    pub seed: u64,
}

/// Determinism defect for each window length, all computed on one sample set.
pub fn defect_profile(
    function: &SamplingFunction,
    dynamics: &Dynamics,
    m_values: &[usize],
    eps: f64,
    sample_count: usize,
    seed: u64,
) -> Result<DefectProfile> {
    if m_values.is_empty() || m_values.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Domain("m values must be nonempty and strictly ascending".into()));
    }
    let m_max = *m_values.last().expect("nonempty");
    check_search_args(m_values[0], eps, 0.0, sample_count)?;
    let windows = SampleWindows::new(function, dynamics, sample_points(dynamics, sample_count, seed), m_max)?;
    let quantize = quantizer(eps);
    let keys: Vec<u64> = windows.values.iter().map(|&v| quantize(v)).collect();
    let mut defect = Vec::with_capacity(m_values.len());
    let mut pairs_found = Vec::with_capacity(m_values.len());
    for &m in m_values {
        let s = search_windows(function, dynamics, &windows, &keys, m, eps, 0.0, 0)?;
        defect.push(s.max_delta);
        pairs_found.push(s.pairs_found);
    }
    Ok(DefectProfile {
        m_values: m_values.to_vec(),
        eps,
        defect,
        pairs_found,
        sample_count,
        seed,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TranslateRow {
    /// Return time `n_i` (0 for the leading row when `ω = ω₁`).
    pub n: i64,
    /// `dist(Tⁿω, ω₁)`.
    pub distance: TorusPoint,
    /// Growing window `w(i) = i`.
    pub window: usize,
    /// `sup_{|k| ≤ w(i)} |V_{Tⁿω}(k) − V_{ω₁}(k)|`.
    pub discrepancy: f64,
    /// The same supremum over the fixed window `|k| ≤ depth`.
    pub fixed_window_discrepancy: f64,
}

/// Translates `S^{n_i} V_ω` along the return times of `ω` to `ω₁`, compared
/// with `V_{ω₁}` on a growing window and on the fixed window `|k| ≤ depth`.
pub fn translate_convergence(
    function: &SamplingFunction,
    dynamics: &Dynamics,
    omega: Point,
    omega1: Point,
    depth: usize,
) -> Result<Vec<TranslateRow>> {
    rotation_only(dynamics)?;
    function.check_dynamics(dynamics)?;
    dynamics.check_point(&omega)?;
    dynamics.check_point(&omega1)?;
    if depth == 0 {
        return Err(Error::Domain("depth must be positive".into()));
    }
    let w_max = depth as i64;
    guard_orbit(
        function,
        dynamics,
        omega1.circle().expect("rotation point"),
        -w_max..=w_max,
    )?;

    let reference = potential(function, dynamics, omega1, -w_max, w_max)?;
    let centre = depth;
    let row = |i: usize, n: i64| -> Result<TranslateRow> {
        let moved = dynamics.iterate(omega, n)?;
        let translate = potential(function, dynamics, moved, -w_max, w_max)?;
        let sup = |w: usize| {
            (centre - w..=centre + w)
                .map(|k| (translate.values[k] - reference.values[k]).abs())
                .fold(0.0, f64::max)
        };
        let window = i.min(depth);
        Ok(TranslateRow {
            n,
            distance: moved.distance(&omega1)?,
            window,
            discrepancy: sup(window),
            fixed_window_discrepancy: sup(depth),
        })
    };

    let mut rows = Vec::with_capacity(depth + 1);
    if omega == omega1 {
        rows.push(row(0, 0)?);
    }
    for (i, r) in return_times(dynamics, omega, omega1, depth)?.iter().enumerate() {
        rows.push(row(i + 1, r.n)?);
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn step() -> SamplingFunction {
        SamplingFunction::step(vec![TorusPoint::ZERO, TorusPoint::HALF], vec![1.0, 0.0]).unwrap()
    }

    fn golden() -> Dynamics {
        Dynamics::rotation(TorusPoint::GOLDEN)
    }

    #[test]
    fn step_witness_at_half() {
        let w = construct_witness(&step(), &golden(), TorusPoint::HALF, 20, (Side::Left, Side::Right), 0.0).unwrap();
        assert_eq!(w.eps, 0.0);
        assert_eq!(w.delta, 1.0);
        assert!(w.verify());
    }

    #[test]
    fn continuous_function_is_refused() {
        let f = SamplingFunction::cosine(2.0).unwrap();
        let e = construct_witness(&f, &golden(), TorusPoint::HALF, 5, (Side::Left, Side::Right), 0.0);
        assert!(matches!(e, Err(Error::Guard(_))));
    }

    #[test]
    fn orbit_through_a_breakpoint_is_refused() {
        let d = Dynamics::rotation(TorusPoint::HALF);
        let e = construct_witness(&step(), &d, TorusPoint::HALF, 3, (Side::Left, Side::Right), 0.0);
        assert!(matches!(e, Err(Error::Guard(_))));
    }

    #[test]
    fn identical_samples_give_nothing() {
        let p = Point::Circle(TorusPoint::from_f64(0.3));
        let s = witness_search_over(&step(), &golden(), vec![p, p], 4, 0.0, 0.0, 10).unwrap();
        assert!(s.pairs.is_empty());
        assert_eq!(s.pairs_found, 0);
    }

    #[test]
    fn quantizer_grids_are_nested() {
        let fine = quantizer(0.3);
        let coarse = quantizer(0.6);
        let (a, b) = (0.26, 0.49);
        assert_eq!(fine(a), fine(b));
        assert_eq!(coarse(a), coarse(b));
        assert_eq!(quantizer(0.0)(-0.0), quantizer(0.0)(0.0));
    }

    #[test]
    fn self_translate_starts_at_zero() {
        let f = SamplingFunction::cosine(2.0).unwrap();
        let w = Point::Circle(TorusPoint::from_f64(0.2));
        let rows = translate_convergence(&f, &golden(), w, w, 4).unwrap();
        assert_eq!(rows[0].n, 0);
        assert_eq!(rows[0].discrepancy, 0.0);
        assert_eq!(rows.len(), 5);
    }
}
