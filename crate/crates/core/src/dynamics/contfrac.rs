use super::{Dynamics, Point, TorusPoint};
use crate::{Error, Result};

/// Longest orbit segment scanned by [`return_times`].
const MAX_RETURN_SCAN: u128 = 1 << 32;

/// Continued fraction expansion of the dyadic rational `alpha.raw() / 2⁶⁴`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ContinuedFraction {
    pub alpha: TorusPoint,
    /// `[a₀; a₁, a₂, …]`, with `a₀ = 0`.
    pub partial_quotients: Vec<u128>,
    /// Convergents `(p_k, q_k)` for `k ≥ 1`; the trivial `0/1` is omitted so
    /// denominators are strictly increasing.
    pub convergents: Vec<(u128, u128)>,
}

impl ContinuedFraction {
    pub fn denominators(&self) -> impl Iterator<Item = u128> + '_ {
        self.convergents.iter().map(|&(_, q)| q)
    }

    /// `‖q α‖`, the circle distance from `q α` to 0.
    pub fn return_distance(&self, q: u128) -> TorusPoint {
        TorusPoint::from_raw((q as u64).wrapping_mul(self.alpha.raw())).distance(TorusPoint::ZERO)
    }
}

/// Expansion to at most `depth` partial quotients beyond `a₀`.
pub fn continued_fraction(alpha: TorusPoint, depth: usize) -> Result<ContinuedFraction> {
    if alpha == TorusPoint::ZERO {
        return Err(Error::Domain("continued fraction of α = 0".into()));
    }
    if depth == 0 {
        return Err(Error::Domain("continued fraction depth must be at least 1".into()));
    }
    let (mut num, mut den) = (u128::from(alpha.raw()), 1u128 << 64);
    let mut partial_quotients = vec![num / den];
    num %= den;
    // (p_{k-2}, p_{k-1}), (q_{k-2}, q_{k-1}) seeded with k = 0.
    let (mut p0, mut p1) = (1u128, 0u128);
    let (mut q0, mut q1) = (0u128, 1u128);
    let mut convergents = Vec::new();
    while num != 0 && convergents.len() < depth {
        let a = den / num;
        (den, num) = (num, den % num);
        let p = a * p1 + p0;
        let q = a * q1 + q0;
        (p0, p1, q0, q1) = (p1, p, q1, q);
        partial_quotients.push(a);
        convergents.push((p, q));
    }
    Ok(ContinuedFraction {
        alpha,
        partial_quotients,
        convergents,
    })
}

/// One entry of [`return_times`]: `T^n ω` lies within `distance` of the target.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ReturnTime {
    pub n: i64,
    pub distance: TorusPoint,
}

/// Successive closest approaches of the forward orbit of `omega` to `target`.
///
/// The orbit is scanned over `1 ≤ n ≤ q_k` for the convergent denominators
/// `q_k` of α; at each scale the earliest closest time is reported if it
/// improves on the previous one. Times are strictly increasing and distances
/// strictly decreasing. For a rotation the distance at scale `q_k` is below
/// `1/q_k`. Fewer than `count` entries are returned when α is exhausted
/// (the orbit is periodic at the fixed-point resolution).
pub fn return_times(dynamics: &Dynamics, omega: Point, target: Point, count: usize) -> Result<Vec<ReturnTime>> {
    let alpha = match dynamics {
        Dynamics::Rotation { alpha } | Dynamics::SkewShift { alpha } => *alpha,
        Dynamics::SymbolShift { .. } => {
            return Err(Error::UnsupportedDynamics(
                "return times need a rotation or skew-shift".into(),
            ))
        }
    };
    if count == 0 {
        return Err(Error::Domain("return time count must be at least 1".into()));
    }
    dynamics.check_point(&omega)?;
    dynamics.check_point(&target)?;
    let cf = continued_fraction(alpha, 128)?;

    let mut out: Vec<ReturnTime> = Vec::with_capacity(count);
    let mut best: Option<ReturnTime> = None;
    let mut state = omega;
    let mut scanned: u128 = 0;
    for q in cf.denominators() {
        if q > MAX_RETURN_SCAN {
            return Err(Error::Resource(format!(
                "return time scale {q} exceeds the scan limit {MAX_RETURN_SCAN}"
            )));
        }
        while scanned < q {
            state = dynamics.step(state);
            scanned += 1;
            let d = state.distance(&target)?;
            if best.is_none_or(|b| d < b.distance) {
                best = Some(ReturnTime {
                    n: scanned as i64,
                    distance: d,
                });
            }
        }
        let b = best.expect("q ≥ 1 scans at least one point");
        if out.last().is_none_or(|last| last.n != b.n) {
            out.push(b);
            if out.len() == count {
                break;
            }
        }
    }
    Ok(out)
}
