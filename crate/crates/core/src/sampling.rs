//! Sampling functions `f: Ω → ℝ` and the potentials `V_ω(n) = f(Tⁿω)` they
//! generate.
//!
//! Torus functions are right-continuous at their breakpoints. The left and
//! right limits at any point are read off the piece description rather than
//! probed numerically, which is what lets removable and genuine jumps be told
//! apart. On the 2-torus (skew-shift) torus functions read the second
//! coordinate.

use std::f64::consts::TAU;

use crate::dynamics::{window_len, Dynamics, Point, SymbolStream, TorusPoint};
use crate::{Error, Result};

/// One piece `amplitude · cos(2πx + phase)` of a piecewise cosine.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CosinePiece {
    pub amplitude: f64,
    pub phase: f64,
}

impl CosinePiece {
    fn at(&self, x: TorusPoint) -> f64 {
        self.amplitude * (TAU * x.to_f64() + self.phase).cos()
    }
}

/// Circle partition `[b₀, b₁), …, [b_{k−1}, b₀ + 1)` with one piece per cell.
#[derive(Clone, Debug, PartialEq)]
pub struct Pieces<T> {
    breakpoints: Vec<TorusPoint>,
    pieces: Vec<T>,
}

impl<T> Pieces<T> {
    fn new(breakpoints: Vec<TorusPoint>, pieces: Vec<T>) -> Result<Self> {
        if breakpoints.is_empty() {
            return Err(Error::Domain("at least one breakpoint is required".into()));
        }
        if breakpoints.len() != pieces.len() {
            return Err(Error::Domain(format!(
                "{} breakpoints but {} pieces",
                breakpoints.len(),
                pieces.len()
            )));
        }
        if breakpoints.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Domain("breakpoints must be strictly increasing".into()));
        }
        Ok(Pieces { breakpoints, pieces })
    }

    pub fn breakpoints(&self) -> &[TorusPoint] {
        &self.breakpoints
    }

    pub fn pieces(&self) -> &[T] {
        &self.pieces
    }

    /// Index of the cell containing `x` (right-continuous).
    fn cell(&self, x: TorusPoint) -> usize {
        match self.breakpoints.partition_point(|b| *b <= x) {
            0 => self.pieces.len() - 1,
            i => i - 1,
        }
    }

    fn breakpoint_index(&self, x: TorusPoint) -> Option<usize> {
        self.breakpoints.binary_search(&x).ok()
    }

    fn previous(&self, i: usize) -> usize {
        (i + self.pieces.len() - 1) % self.pieces.len()
    }
}

/// A bounded sampling function with declared discontinuity structure.
#[derive(Clone, Debug, PartialEq)]
pub enum SamplingFunction {
    /// `x ↦ λ cos(2πx)`.
    Cosine { coupling: f64 },
    /// Piecewise constant, right-continuous.
    Step(Pieces<f64>),
    /// Piecewise `a cos(2πx + φ)`, right-continuous.
    PiecewiseCosine(Pieces<CosinePiece>),
    /// `value[s]` for the symbol `s` at position 0 of a symbol sequence.
    SymbolTable(Vec<f64>),
}

/// Left and right limits of `f` at a point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OneSidedLimits {
    pub left: f64,
    pub right: f64,
    pub jump: f64,
}

impl SamplingFunction {
    pub fn cosine(coupling: f64) -> Result<Self> {
        check_finite(&[coupling])?;
        Ok(SamplingFunction::Cosine { coupling })
    }

    pub fn step(breakpoints: Vec<TorusPoint>, values: Vec<f64>) -> Result<Self> {
        check_finite(&values)?;
        Ok(SamplingFunction::Step(Pieces::new(breakpoints, values)?))
    }

    /// The constant function `value`.
    pub fn constant(value: f64) -> Result<Self> {
        Self::step(vec![TorusPoint::ZERO], vec![value])
    }

    pub fn piecewise_cosine(breakpoints: Vec<TorusPoint>, pieces: Vec<CosinePiece>) -> Result<Self> {
        let params: Vec<f64> = pieces.iter().flat_map(|p| [p.amplitude, p.phase]).collect();
        check_finite(&params)?;
        Ok(SamplingFunction::PiecewiseCosine(Pieces::new(breakpoints, pieces)?))
    }

    pub fn symbol_table(values: Vec<f64>) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::Domain("symbol table needs at least two values".into()));
        }
        check_finite(&values)?;
        Ok(SamplingFunction::SymbolTable(values))
    }

    pub fn is_torus_function(&self) -> bool {
        !matches!(self, SamplingFunction::SymbolTable(_))
    }

    /// Declared bound λ with `|f| ≤ λ` everywhere.
    pub fn bound(&self) -> f64 {
        let max_abs = |it: &mut dyn Iterator<Item = f64>| it.fold(0.0f64, |m, v| m.max(v.abs()));
        match self {
            SamplingFunction::Cosine { coupling } => coupling.abs(),
            SamplingFunction::Step(p) => max_abs(&mut p.pieces.iter().copied()),
            SamplingFunction::PiecewiseCosine(p) => max_abs(&mut p.pieces.iter().map(|c| c.amplitude)),
            SamplingFunction::SymbolTable(v) => max_abs(&mut v.iter().copied()),
        }
    }

    /// Lower and upper ends of the range of `f` (an enclosure for the
    /// cosine variants).
    pub fn range(&self) -> (f64, f64) {
        let fold = |it: &mut dyn Iterator<Item = f64>| {
            it.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)))
        };
        match self {
            SamplingFunction::Step(p) => fold(&mut p.pieces.iter().copied()),
            SamplingFunction::SymbolTable(v) => fold(&mut v.iter().copied()),
            _ => (-self.bound(), self.bound()),
        }
    }

    /// Rejects dynamics whose points this function cannot be evaluated on.
    pub fn check_dynamics(&self, dynamics: &Dynamics) -> Result<()> {
        match (self.is_torus_function(), dynamics) {
            (true, Dynamics::Rotation { .. } | Dynamics::SkewShift { .. }) => Ok(()),
            (false, Dynamics::SymbolShift { alphabet, .. }) => {
                let n = self.table_len();
                if (*alphabet as usize) > n {
                    Err(Error::Domain(format!(
                        "symbol table has {n} values for an alphabet of {alphabet}"
                    )))
                } else {
                    Ok(())
                }
            }
            _ => Err(Error::TypeMismatch(format!(
                "sampling function cannot be evaluated on {} points",
                dynamics.name()
            ))),
        }
    }

    fn table_len(&self) -> usize {
        match self {
            SamplingFunction::SymbolTable(v) => v.len(),
            _ => 0,
        }
    }

    /// `f(ω)`; right limit at breakpoints.
    pub fn evaluate(&self, omega: Point) -> Result<f64> {
        match (self, omega) {
            (SamplingFunction::SymbolTable(v), Point::Symbol(s)) => v
                .get(s.current() as usize)
                .copied()
                .ok_or_else(|| Error::Domain(format!("symbol {} has no table value", s.current()))),
            (SamplingFunction::SymbolTable(_), _) => {
                Err(Error::TypeMismatch("symbol table applied to a torus point".into()))
            }
            (_, Point::Circle(x)) | (_, Point::Pair(_, x)) => Ok(self.eval_circle(x)),
            (_, Point::Symbol(_)) => Err(Error::TypeMismatch(
                "torus function applied to a symbol sequence".into(),
            )),
        }
    }

    /// Torus variants only.
    pub(crate) fn eval_circle(&self, x: TorusPoint) -> f64 {
        match self {
            SamplingFunction::Cosine { coupling } => coupling * (TAU * x.to_f64()).cos(),
            SamplingFunction::Step(p) => p.pieces[p.cell(x)],
            SamplingFunction::PiecewiseCosine(p) => p.pieces[p.cell(x)].at(x),
            SamplingFunction::SymbolTable(_) => unreachable!("symbol table on a torus point"),
        }
    }

    /// Left/right limits at `omega0`, taken from the piece definitions.
    pub fn one_sided_limits(&self, omega0: TorusPoint) -> Result<OneSidedLimits> {
        let (left, right) = match self {
            SamplingFunction::Cosine { .. } => {
                let v = self.eval_circle(omega0);
                (v, v)
            }
            SamplingFunction::Step(p) => match p.breakpoint_index(omega0) {
                Some(i) => (p.pieces[p.previous(i)], p.pieces[i]),
                None => {
                    let v = p.pieces[p.cell(omega0)];
                    (v, v)
                }
            },
            SamplingFunction::PiecewiseCosine(p) => match p.breakpoint_index(omega0) {
                Some(i) => {
                    let (l, r) = (p.pieces[p.previous(i)], p.pieces[i]);
                    if l == r {
                        let v = r.at(omega0);
                        (v, v)
                    } else {
                        (l.at(omega0), r.at(omega0))
                    }
                }
                None => {
                    let v = p.pieces[p.cell(omega0)].at(omega0);
                    (v, v)
                }
            },
            SamplingFunction::SymbolTable(_) => {
                return Err(Error::TypeMismatch(
                    "one-sided limits are defined for torus functions only".into(),
                ))
            }
        };
        let mut jump = (right - left).abs();
        // Two distinct cosine pieces meeting at a matched value differ only by rounding.
        if matches!(self, SamplingFunction::PiecewiseCosine(_))
            && jump <= 8.0 * f64::EPSILON * left.abs().max(right.abs()).max(1.0)
        {
            jump = 0.0;
        }
        Ok(OneSidedLimits { left, right, jump })
    }

    /// Breakpoints where the left and right limits differ.
    pub fn discontinuities(&self) -> Vec<TorusPoint> {
        let breakpoints: &[TorusPoint] = match self {
            SamplingFunction::Step(p) => p.breakpoints(),
            SamplingFunction::PiecewiseCosine(p) => p.breakpoints(),
            _ => &[],
        };
        breakpoints
            .iter()
            .copied()
            .filter(|&b| self.one_sided_limits(b).is_ok_and(|l| l.jump > 0.0))
            .collect()
    }

    /// Largest jump over all discontinuities (0 for continuous functions).
    pub fn largest_jump(&self) -> f64 {
        self.discontinuities()
            .into_iter()
            .filter_map(|b| self.one_sided_limits(b).ok())
            .fold(0.0, |m, l| m.max(l.jump))
    }
}

fn check_finite(values: &[f64]) -> Result<()> {
    if values.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::Domain("sampling function parameters must be finite".into()))
    }
}

/// Streams `V_ω(n), V_ω(n+1), …` without materializing the orbit.
#[derive(Clone, Debug)]
pub struct PotentialStream<'a> {
    function: &'a SamplingFunction,
    kind: StreamKind,
}

#[derive(Clone, Debug)]
enum StreamKind {
    Torus { dynamics: Dynamics, state: Point },
    Symbols(SymbolStream),
}

impl<'a> PotentialStream<'a> {
    pub fn new(function: &'a SamplingFunction, dynamics: &Dynamics, omega: Point, start: i64) -> Result<Self> {
        function.check_dynamics(dynamics)?;
        let first = dynamics.iterate(omega, start)?;
        let kind = match first {
            Point::Symbol(s) => StreamKind::Symbols(SymbolStream::new(s.seed, s.alphabet, s.offset)),
            state => StreamKind::Torus {
                dynamics: *dynamics,
                state,
            },
        };
        Ok(PotentialStream { function, kind })
    }
}

impl Iterator for PotentialStream<'_> {
    type Item = f64;

    #[inline]
    fn next(&mut self) -> Option<f64> {
        match &mut self.kind {
            StreamKind::Torus { dynamics, state } => {
                let x = match *state {
                    Point::Circle(x) | Point::Pair(_, x) => x,
                    Point::Symbol(_) => unreachable!(),
                };
                *state = dynamics.step(*state);
                Some(self.function.eval_circle(x))
            }
            StreamKind::Symbols(s) => {
                let sym = s.next_symbol() as usize;
                match self.function {
                    SamplingFunction::SymbolTable(v) => Some(v[sym]),
                    _ => unreachable!(),
                }
            }
        }
    }
}

/// A finite slab `V_ω(n_min..=n_max)` together with what generated it.
#[derive(Clone, Debug, PartialEq)]
pub struct PotentialWindow {
    pub n_min: i64,
    pub n_max: i64,
    pub values: Vec<f64>,
    pub origin: Point,
    pub dynamics: Dynamics,
    pub function: SamplingFunction,
}

impl PotentialWindow {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// `V(n)` if `n` lies in the window.
    pub fn get(&self, n: i64) -> Option<f64> {
        if n < self.n_min || n > self.n_max {
            return None;
        }
        self.values.get((n - self.n_min) as usize).copied()
    }

    /// Largest `|V_a(n) − V_b(n)|` over the common index range.
    pub fn sup_distance(&self, other: &PotentialWindow) -> f64 {
        let lo = self.n_min.max(other.n_min);
        let hi = self.n_max.min(other.n_max);
        (lo..=hi)
            .filter_map(|n| Some((self.get(n)? - other.get(n)?).abs()))
            .fold(0.0, f64::max)
    }
}

/// `V_ω(n) = f(Tⁿω)` for `n = n_min..=n_max`.
pub fn potential(
    function: &SamplingFunction,
    dynamics: &Dynamics,
    omega: Point,
    n_min: i64,
    n_max: i64,
) -> Result<PotentialWindow> {
    let len = window_len(n_min, n_max)?;
    dynamics.iterate(omega, n_max)?;
    let values = PotentialStream::new(function, dynamics, omega, n_min)?
        .take(len)
        .collect();
    Ok(PotentialWindow {
        n_min,
        n_max,
        values,
        origin: omega,
        dynamics: *dynamics,
        function: function.clone(),
    })
}

/// `S^k V` on the same index range, regenerated from `T^k ω`.
pub fn shift_window(window: &PotentialWindow, k: i64) -> Result<PotentialWindow> {
    let origin = window.dynamics.iterate(window.origin, k)?;
    potential(&window.function, &window.dynamics, origin, window.n_min, window.n_max)
}
