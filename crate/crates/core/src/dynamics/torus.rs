use std::fmt;
use std::ops::{Add, Neg, Sub};

const TWO_POW_64: f64 = 18_446_744_073_709_551_616.0;

/// A point of the circle ℝ/ℤ stored as a 64-bit fixed-point fraction.
///
/// The value represented is `raw / 2⁶⁴`. All arithmetic wraps modulo 2⁶⁴,
/// so sums and integer multiples are exact and the point never leaves
/// `[0, 1)`. An "irrational" rotation number is necessarily a dyadic
/// rational at this resolution; its period exceeds any run length used here.
#[derive(Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TorusPoint(u64);

impl TorusPoint {
    pub const ZERO: Self = TorusPoint(0);
    pub const HALF: Self = TorusPoint(1 << 63);
    /// ⌊2⁶⁴·(√5 − 1)/2⌋, the golden-mean rotation number.
    pub const GOLDEN: Self = TorusPoint(0x9E37_79B9_7F4A_7C15);
    /// ⌊2⁶⁴·(√2 − 1)⌋.
    pub const SQRT2_MINUS_1: Self = TorusPoint(0x6A09_E667_F3BC_C908);

    pub const fn from_raw(raw: u64) -> Self {
        TorusPoint(raw)
    }

    pub const fn raw(self) -> u64 {
        self.0
    }

    /// Nearest grid point to `x mod 1`.
    pub fn from_f64(x: f64) -> Self {
        let y = x.rem_euclid(1.0) * TWO_POW_64;
        let r = y.round();
        if r >= TWO_POW_64 {
            TorusPoint(0)
        } else {
            TorusPoint(r as u64)
        }
    }

    /// `⌊2⁶⁴·num/den⌋` reduced mod 1. Panics if `den == 0`.
    pub fn from_ratio(num: u64, den: u64) -> Self {
        assert!(den != 0, "zero denominator");
        let num = u128::from(num % den);
        TorusPoint(((num << 64) / u128::from(den)) as u64)
    }

    /// Lossy conversion; always strictly below 1.
    pub fn to_f64(self) -> f64 {
        (self.0 >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn wrapping_mul_int(self, n: i64) -> Self {
        TorusPoint((n as u64).wrapping_mul(self.0))
    }

    /// Circle distance `min(|a − b|, 1 − |a − b|)`, itself a fixed-point value
    /// in `[0, 1/2]`.
    pub fn distance(self, other: Self) -> Self {
        let d = self.0.wrapping_sub(other.0);
        TorusPoint(d.min(d.wrapping_neg()))
    }
}

impl Add for TorusPoint {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        TorusPoint(self.0.wrapping_add(rhs.0))
    }
}

impl Sub for TorusPoint {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        TorusPoint(self.0.wrapping_sub(rhs.0))
    }
}

impl Neg for TorusPoint {
    type Output = Self;
    fn neg(self) -> Self {
        TorusPoint(self.0.wrapping_neg())
    }
}

impl fmt::Debug for TorusPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "TorusPoint({} ≈ {:.17})", self.0, self.to_f64())
    }
}

impl fmt::Display for TorusPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}
