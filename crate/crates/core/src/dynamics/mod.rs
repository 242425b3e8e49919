//! Ergodic base systems (Ω, T, μ) with exact fixed-point arithmetic.
//!
//! Three systems are provided:
//!
//! - circle rotation `x ↦ x + α` with Lebesgue measure,
//! - skew-shift `(x, y) ↦ (x + α, y + x)` on the 2-torus,
//! - the left shift on i.i.d. two-sided sequences over a finite alphabet.
//!
//! `Tⁿω` is computed in closed form (a wrapping multiply-add for the
//! rotation) so arbitrarily long orbits carry no accumulated error, and
//! `iterate(iterate(ω, m), n) == iterate(ω, m + n)` holds bit for bit.

mod contfrac;
mod torus;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub use contfrac::{continued_fraction, return_times, ContinuedFraction, ReturnTime};
pub use torus::TorusPoint;

use crate::{Error, Result, MAX_WINDOW_LEN};

/// Largest |n| accepted by [`Dynamics::iterate`].
pub const MAX_ITERATE: i64 = 1 << 62;

/// A two-sided sequence over `{0, …, alphabet − 1}` read from position
/// `offset` of the seeded base sequence.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SymbolPoint {
    pub seed: u64,
    pub alphabet: u32,
    pub offset: i64,
}

impl SymbolPoint {
    /// The symbol at position 0 of this sequence.
    pub fn current(&self) -> u32 {
        symbol_at(self.seed, self.alphabet, self.offset)
    }
}

/// A point of one of the supported phase spaces.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Point {
    Circle(TorusPoint),
    Pair(TorusPoint, TorusPoint),
    Symbol(SymbolPoint),
}

impl Point {
    pub fn circle(self) -> Option<TorusPoint> {
        match self {
            Point::Circle(x) => Some(x),
            _ => None,
        }
    }

    /// Distance in the natural metric of the space: circle distance, the max of
    /// coordinate distances on the 2-torus, and `2^-k` for symbol sequences
    /// (k = index of the first disagreement from the centre, capped at 63).
    pub fn distance(&self, other: &Point) -> Result<TorusPoint> {
        match (self, other) {
            (Point::Circle(a), Point::Circle(b)) => Ok(a.distance(*b)),
            (Point::Pair(a1, a2), Point::Pair(b1, b2)) => Ok(a1.distance(*b1).max(a2.distance(*b2))),
            (Point::Symbol(a), Point::Symbol(b)) => {
                if a.seed != b.seed || a.alphabet != b.alphabet {
                    return Err(Error::TypeMismatch("symbol points from different sequences".into()));
                }
                for k in 0..63i64 {
                    let agree = [k, -k].iter().all(|&j| {
                        symbol_at(a.seed, a.alphabet, a.offset.wrapping_add(j))
                            == symbol_at(b.seed, b.alphabet, b.offset.wrapping_add(j))
                    });
                    if !agree {
                        return Ok(TorusPoint::from_raw(1u64 << (63 - k)));
                    }
                }
                Ok(TorusPoint::ZERO)
            }
            _ => Err(Error::TypeMismatch(format!("cannot compare {self:?} with {other:?}"))),
        }
    }
}

/// The ergodic map T together with its phase space and invariant measure.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Dynamics {
    /// `x ↦ x + α` on ℝ/ℤ.
    Rotation { alpha: TorusPoint },
    /// `(x, y) ↦ (x + α, y + x)` on (ℝ/ℤ)².
    SkewShift { alpha: TorusPoint },
    /// Left shift on i.i.d. uniform sequences over `alphabet` symbols.
    SymbolShift { alphabet: u32, seed: u64 },
}

impl Dynamics {
    pub fn rotation(alpha: TorusPoint) -> Self {
        Dynamics::Rotation { alpha }
    }

    pub fn skew_shift(alpha: TorusPoint) -> Self {
        Dynamics::SkewShift { alpha }
    }

    pub fn symbol_shift(alphabet: u32, seed: u64) -> Result<Self> {
        if alphabet < 2 {
            return Err(Error::Domain(format!(
                "symbol alphabet must have at least 2 letters, got {alphabet}"
            )));
        }
        Ok(Dynamics::SymbolShift { alphabet, seed })
    }

    /// The distinguished point `0`, `(0, 0)` or the base sequence.
    pub fn origin(&self) -> Point {
        match *self {
            Dynamics::Rotation { .. } => Point::Circle(TorusPoint::ZERO),
            Dynamics::SkewShift { .. } => Point::Pair(TorusPoint::ZERO, TorusPoint::ZERO),
            Dynamics::SymbolShift { alphabet, seed } => Point::Symbol(SymbolPoint {
                seed,
                alphabet,
                offset: 0,
            }),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Dynamics::Rotation { .. } => "rotation",
            Dynamics::SkewShift { .. } => "skew-shift",
            Dynamics::SymbolShift { .. } => "symbol-shift",
        }
    }

    pub fn check_point(&self, p: &Point) -> Result<()> {
        match (self, p) {
            (Dynamics::Rotation { .. }, Point::Circle(_)) => Ok(()),
            (Dynamics::SkewShift { .. }, Point::Pair(..)) => Ok(()),
            (Dynamics::SymbolShift { alphabet, seed }, Point::Symbol(s))
                if s.alphabet == *alphabet && s.seed == *seed =>
            {
                Ok(())
            }
            _ => Err(Error::TypeMismatch(format!(
                "point {p:?} does not belong to the phase space of {}",
                self.name()
            ))),
        }
    }

    /// `Tⁿω`, exact for every `|n| ≤ 2⁶²`.
    pub fn iterate(&self, omega: Point, n: i64) -> Result<Point> {
        self.check_point(&omega)?;
        if !(-MAX_ITERATE..=MAX_ITERATE).contains(&n) {
            return Err(Error::Domain(format!("iterate count {n} exceeds ±2^62")));
        }
        Ok(self.iterate_unchecked(omega, n))
    }

    pub(crate) fn iterate_unchecked(&self, omega: Point, n: i64) -> Point {
        match (*self, omega) {
            (Dynamics::Rotation { alpha }, Point::Circle(x)) => Point::Circle(x + alpha.wrapping_mul_int(n)),
            (Dynamics::SkewShift { alpha }, Point::Pair(x, y)) => {
                // Tⁿ(x, y) = (x + nα, y + n·x + n(n−1)/2·α)
                let tri = (i128::from(n) * (i128::from(n) - 1) / 2) as u64;
                let y = y + x.wrapping_mul_int(n) + TorusPoint::from_raw(tri.wrapping_mul(alpha.raw()));
                Point::Pair(x + alpha.wrapping_mul_int(n), y)
            }
            (Dynamics::SymbolShift { .. }, Point::Symbol(s)) => Point::Symbol(SymbolPoint {
                offset: s.offset.wrapping_add(n),
                ..s
            }),
            _ => unreachable!("point checked against dynamics"),
        }
    }

    /// One application of T.
    pub(crate) fn step(&self, omega: Point) -> Point {
        match (*self, omega) {
            (Dynamics::Rotation { alpha }, Point::Circle(x)) => Point::Circle(x + alpha),
            (Dynamics::SkewShift { alpha }, Point::Pair(x, y)) => Point::Pair(x + alpha, y + x),
            (Dynamics::SymbolShift { .. }, Point::Symbol(s)) => Point::Symbol(SymbolPoint {
                offset: s.offset.wrapping_add(1),
                ..s
            }),
            _ => unreachable!("point checked against dynamics"),
        }
    }

    /// Forward orbit `ω, Tω, T²ω, …` as an iterator.
    pub fn orbit_iter(&self, omega: Point) -> Result<OrbitIter> {
        self.check_point(&omega)?;
        Ok(OrbitIter {
            dynamics: *self,
            state: omega,
        })
    }
}

/// Infinite forward orbit iterator produced by [`Dynamics::orbit_iter`].
#[derive(Clone, Debug)]
pub struct OrbitIter {
    dynamics: Dynamics,
    state: Point,
}

impl Iterator for OrbitIter {
    type Item = Point;

    fn next(&mut self) -> Option<Point> {
        let current = self.state;
        self.state = self.dynamics.step(current);
        Some(current)
    }
}

/// `Tⁿω` for `n = n_min..=n_max`.
pub fn orbit(dynamics: &Dynamics, omega: Point, n_min: i64, n_max: i64) -> Result<Vec<Point>> {
    let len = window_len(n_min, n_max)?;
    let start = dynamics.iterate(omega, n_min)?;
    dynamics.iterate(omega, n_max)?;
    Ok(dynamics.orbit_iter(start)?.take(len).collect())
}

pub(crate) fn window_len(n_min: i64, n_max: i64) -> Result<usize> {
    if n_min > n_max {
        return Err(Error::Domain(format!("empty range [{n_min}, {n_max}]")));
    }
    let len = (i128::from(n_max) - i128::from(n_min) + 1) as u128;
    if len > u128::from(MAX_WINDOW_LEN) {
        return Err(Error::Resource(format!(
            "range of {len} sites exceeds the limit of {MAX_WINDOW_LEN}"
        )));
    }
    Ok(len as usize)
}

/// Draws `count` points from the invariant measure of `dynamics`
/// (uniform on the 2⁶⁴ grid, or a uniform shift offset for symbol sequences).
pub fn sample_points(dynamics: &Dynamics, count: usize, seed: u64) -> Vec<Point> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| match *dynamics {
            Dynamics::Rotation { .. } => Point::Circle(TorusPoint::from_raw(rng.gen())),
            Dynamics::SkewShift { .. } => Point::Pair(TorusPoint::from_raw(rng.gen()), TorusPoint::from_raw(rng.gen())),
            Dynamics::SymbolShift { alphabet, seed } => Point::Symbol(SymbolPoint {
                seed,
                alphabet,
                offset: rng.gen::<i64>() >> 2,
            }),
        })
        .collect()
}

/// Symbol at absolute position `index` of the base sequence generated from
/// `seed`. Each position consumes one 64-bit word of the ChaCha stream, so
/// [`SymbolStream`] can read consecutive positions without re-seeding.
pub fn symbol_at(seed: u64, alphabet: u32, index: i64) -> u32 {
    SymbolStream::new(seed, alphabet, index).next_symbol()
}

/// Sequential reader of the seeded symbol sequence.
#[derive(Clone, Debug)]
pub struct SymbolStream {
    rng: ChaCha8Rng,
    alphabet: u64,
}

impl SymbolStream {
    pub fn new(seed: u64, alphabet: u32, start: i64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        // Monotone i64 -> word position map, so reading across index -1 -> 0 is seamless.
        rng.set_word_pos(((i128::from(start) + (1i128 << 63)) as u128) * 2);
        SymbolStream {
            rng,
            alphabet: u64::from(alphabet),
        }
    }

    pub fn next_symbol(&mut self) -> u32 {
        (self.rng.next_u64() % self.alphabet) as u32
    }
}
