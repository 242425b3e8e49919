//! Experiment configuration files.
//!
//! One `key = value` per line, `#` starts a comment. Structured values use
//! call syntax:
//!
//! ```text
//! dyn = rotation(alpha=golden)
//! f = step(0:1, 0.5:0)
//! energies = grid(-3, 3, 7)
//! m_values = list(5, 10, 20)
//! seed = 42
//! ```

use std::collections::BTreeSet;
use std::fmt::{self, Write as _};
use std::path::PathBuf;

use ergodic_core::cocycle::{EnergyGrid, LyapunovSettings};
use ergodic_core::dynamics::{Dynamics, Point, SymbolPoint, TorusPoint};
use ergodic_core::sampling::{CosinePiece, SamplingFunction};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
#[error("line {line}, column {column}: {message}")]
pub struct ConfigError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

/// A point given in a config, resolved against the configured dynamics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PointSpec {
    Circle(TorusPoint),
    Pair(TorusPoint, TorusPoint),
    /// Position along the base sequence of a symbol shift.
    Offset(i64),
}

impl PointSpec {
    pub fn resolve(&self, dynamics: &Dynamics) -> ergodic_core::Result<Point> {
        let p = match (*self, *dynamics) {
            (PointSpec::Offset(offset), Dynamics::SymbolShift { alphabet, seed }) => {
                Point::Symbol(SymbolPoint { seed, alphabet, offset })
            }
            (PointSpec::Circle(x), _) => Point::Circle(x),
            (PointSpec::Pair(x, y), _) => Point::Pair(x, y),
            (PointSpec::Offset(_), _) => {
                return Err(ergodic_core::Error::TypeMismatch(
                    "offset(...) points need shift dynamics".into(),
                ))
            }
        };
        dynamics.check_point(&p)?;
        Ok(p)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub dynamics: Option<Dynamics>,
    pub function: Option<SamplingFunction>,
    pub energies: Option<EnergyGrid>,
    pub seed: Option<u64>,
    pub omega: Option<PointSpec>,
    pub omega0: Option<TorusPoint>,
    pub omega1: Option<PointSpec>,
    pub n_steps: u64,
    pub renorm_every: u32,
    pub blocks: u32,
    pub samples: usize,
    pub box_size: usize,
    pub tol: f64,
    pub merge_gap: f64,
    pub threshold: f64,
    /// `None` is the level-spacing default.
    pub exclusion_radius: Option<f64>,
    pub m: usize,
    pub m_values: Vec<usize>,
    pub eps: f64,
    /// `None` is half the largest jump of `f`.
    pub delta_min: Option<f64>,
    pub max_pairs: usize,
    pub depth: usize,
    pub out: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        let lyap = LyapunovSettings::default();
        ExperimentConfig {
            dynamics: None,
            function: None,
            energies: None,
            seed: None,
            omega: None,
            omega0: None,
            omega1: None,
            n_steps: lyap.n_steps,
            renorm_every: lyap.renorm_every,
            blocks: lyap.block_count,
            samples: 10,
            box_size: 1000,
            tol: 1e-12,
            merge_gap: 0.01,
            threshold: 0.02,
            exclusion_radius: None,
            m: 10,
            m_values: vec![5, 10, 20, 40],
            eps: 0.0,
            delta_min: None,
            max_pairs: ergodic_core::determinism::DEFAULT_MAX_PAIRS,
            depth: 8,
            out: None,
        }
    }
}

impl ExperimentConfig {
    pub fn lyapunov_settings(&self) -> LyapunovSettings {
        LyapunovSettings {
            n_steps: self.n_steps,
            renorm_every: self.renorm_every,
            block_count: self.blocks,
        }
    }

    /// Canonical text form; parsing it gives back `self`.
    pub fn serialize(&self) -> String {
        let mut s = String::new();
        let mut line = |k: &str, v: String| {
            let _ = writeln!(s, "{k} = {v}");
        };
        if let Some(d) = &self.dynamics {
            line("dyn", fmt_dynamics(d));
        }
        if let Some(f) = &self.function {
            line("f", fmt_function(f));
        }
        if let Some(g) = &self.energies {
            line("energies", format!("grid({:?}, {:?}, {})", g.min, g.max, g.count));
        }
        if let Some(seed) = self.seed {
            line("seed", seed.to_string());
        }
        if let Some(p) = &self.omega {
            line("omega", fmt_point(p));
        }
        if let Some(p) = self.omega0 {
            line("omega0", fmt_torus(p));
        }
        if let Some(p) = &self.omega1 {
            line("omega1", fmt_point(p));
        }
        line("n_steps", self.n_steps.to_string());
        line("renorm_every", self.renorm_every.to_string());
        line("blocks", self.blocks.to_string());
        line("samples", self.samples.to_string());
        line("box", self.box_size.to_string());
        line("tol", format!("{:?}", self.tol));
        line("merge_gap", format!("{:?}", self.merge_gap));
        line("threshold", format!("{:?}", self.threshold));
        line("exclusion_radius", fmt_auto(self.exclusion_radius));
        line("m", self.m.to_string());
        let ms: Vec<String> = self.m_values.iter().map(|m| m.to_string()).collect();
        line("m_values", format!("list({})", ms.join(", ")));
        line("eps", format!("{:?}", self.eps));
        line("delta_min", fmt_auto(self.delta_min));
        line("max_pairs", self.max_pairs.to_string());
        line("depth", self.depth.to_string());
        if let Some(out) = &self.out {
            line("out", out.display().to_string());
        }
        s
    }
}

fn fmt_auto(v: Option<f64>) -> String {
    v.map_or_else(|| "auto".into(), |x| format!("{x:?}"))
}

fn fmt_torus(p: TorusPoint) -> String {
    if p == TorusPoint::GOLDEN {
        return "golden".into();
    }
    if p == TorusPoint::SQRT2_MINUS_1 {
        return "sqrt2m1".into();
    }
    let x = p.to_f64();
    if TorusPoint::from_f64(x) == p {
        format!("{x:?}")
    } else {
        format!("raw({})", p.raw())
    }
}

fn fmt_point(p: &PointSpec) -> String {
    match p {
        PointSpec::Circle(x) => fmt_torus(*x),
        PointSpec::Pair(x, y) => format!("pair({}, {})", fmt_torus(*x), fmt_torus(*y)),
        PointSpec::Offset(k) => format!("offset({k})"),
    }
}

fn fmt_dynamics(d: &Dynamics) -> String {
    match d {
        Dynamics::Rotation { alpha } => format!("rotation(alpha={})", fmt_torus(*alpha)),
        Dynamics::SkewShift { alpha } => format!("skew(alpha={})", fmt_torus(*alpha)),
        Dynamics::SymbolShift { alphabet, seed } => format!("shift(alphabet={alphabet}, seed={seed})"),
    }
}

fn fmt_function(f: &SamplingFunction) -> String {
    let joined = |items: Vec<String>| items.join(", ");
    match f {
        SamplingFunction::Cosine { coupling } => format!("cos(lambda={coupling:?})"),
        SamplingFunction::Step(p) => format!(
            "step({})",
            joined(
                p.breakpoints()
                    .iter()
                    .zip(p.pieces())
                    .map(|(b, v)| format!("{}:{v:?}", fmt_torus(*b)))
                    .collect()
            )
        ),
        SamplingFunction::PiecewiseCosine(p) => format!(
            "pcos({})",
            joined(
                p.breakpoints()
                    .iter()
                    .zip(p.pieces())
                    .map(|(b, c)| format!("{}:{:?}:{:?}", fmt_torus(*b), c.amplitude, c.phase))
                    .collect()
            )
        ),
        SamplingFunction::SymbolTable(v) => {
            format!("table({})", joined(v.iter().map(|x| format!("{x:?}")).collect()))
        }
    }
}

impl fmt::Display for ExperimentConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.serialize())
    }
}

#[derive(Debug, Clone)]
enum Value {
    Atom {
        text: String,
        column: usize,
    },
    Call {
        name: String,
        column: usize,
        args: Vec<Arg>,
    },
}

#[derive(Debug, Clone)]
struct Arg {
    key: Option<String>,
    /// `:`-separated components.
    parts: Vec<Value>,
    column: usize,
}

impl Value {
    fn column(&self) -> usize {
        match self {
            Value::Atom { column, .. } | Value::Call { column, .. } => *column,
        }
    }
}

struct Cursor {
    chars: Vec<char>,
    pos: usize,
    /// Column of `chars[0]` in the source line.
    base: usize,
    line: usize,
}

impl Cursor {
    fn new(src: &str, line: usize, base: usize) -> Self {
        Cursor {
            chars: src.chars().collect(),
            pos: 0,
            base,
            line,
        }
    }

    fn column(&self) -> usize {
        self.base + self.pos
    }

    fn err<T>(&self, column: usize, message: impl Into<String>) -> Result<T, ConfigError> {
        Err(ConfigError {
            line: self.line,
            column,
            message: message.into(),
        })
    }

    fn skip_ws(&mut self) {
        while self.chars.get(self.pos).is_some_and(|c| c.is_whitespace()) {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.chars.get(self.pos).copied()
    }

    fn atom(&mut self) -> Result<(String, usize), ConfigError> {
        self.skip_ws();
        let start = self.pos;
        while self
            .chars
            .get(self.pos)
            .is_some_and(|c| c.is_ascii_alphanumeric() || matches!(c, '_' | '.' | '+' | '-'))
        {
            self.pos += 1;
        }
        if start == self.pos {
            return match self.chars.get(self.pos) {
                Some(c) => self.err(self.column(), format!("unexpected '{c}'")),
                None => self.err(self.column(), "missing value"),
            };
        }
        Ok((self.chars[start..self.pos].iter().collect(), self.base + start))
    }

    fn value(&mut self) -> Result<Value, ConfigError> {
        let (text, column) = self.atom()?;
        if self.peek() != Some('(') {
            return Ok(Value::Atom { text, column });
        }
        self.pos += 1;
        let mut args = Vec::new();
        if self.peek() == Some(')') {
            self.pos += 1;
            return Ok(Value::Call {
                name: text,
                column,
                args,
            });
        }
        loop {
            args.push(self.arg()?);
            match self.peek() {
                Some(',') => self.pos += 1,
                Some(')') => {
                    self.pos += 1;
                    break;
                }
                Some(c) => return self.err(self.column(), format!("expected ',' or ')', found '{c}'")),
                None => return self.err(self.column(), "unclosed '('"),
            }
        }
        Ok(Value::Call {
            name: text,
            column,
            args,
        })
    }

    fn arg(&mut self) -> Result<Arg, ConfigError> {
        self.skip_ws();
        let column = self.column();
        let mut first = self.value()?;
        let mut key = None;
        if self.peek() == Some('=') {
            match first {
                Value::Atom { text, .. } => key = Some(text),
                Value::Call { column, .. } => return self.err(column, "argument name must be a plain word"),
            }
            self.pos += 1;
            first = self.value()?;
        }
        let mut parts = vec![first];
        while self.peek() == Some(':') {
            self.pos += 1;
            parts.push(self.value()?);
        }
        Ok(Arg { key, parts, column })
    }

    fn finish(&mut self) -> Result<(), ConfigError> {
        match self.peek() {
            None => Ok(()),
            Some(c) => self.err(self.column(), format!("unexpected '{c}' after value")),
        }
    }
}

/// Interprets parsed values; carries the line for error positions.
struct Ctx {
    line: usize,
}

impl Ctx {
    fn err<T>(&self, column: usize, message: impl Into<String>) -> Result<T, ConfigError> {
        Err(ConfigError {
            line: self.line,
            column,
            message: message.into(),
        })
    }

    fn atom<'v>(&self, v: &'v Value, what: &str) -> Result<(&'v str, usize), ConfigError> {
        match v {
            Value::Atom { text, column } => Ok((text, *column)),
            Value::Call { name, column, .. } => self.err(*column, format!("expected {what}, found {name}(...)")),
        }
    }

    fn real(&self, v: &Value) -> Result<f64, ConfigError> {
        let (text, column) = self.atom(v, "a number")?;
        match text.parse::<f64>() {
            Ok(x) if x.is_finite() => Ok(x),
            _ => self.err(column, format!("'{text}' is not a finite number")),
        }
    }

    fn int<T: std::str::FromStr>(&self, v: &Value) -> Result<T, ConfigError> {
        let (text, column) = self.atom(v, "an integer")?;
        text.parse::<T>()
            .or_else(|_| self.err(column, format!("'{text}' is not a valid integer here")))
    }

    fn torus(&self, v: &Value) -> Result<TorusPoint, ConfigError> {
        match v {
            Value::Atom { text, .. } if text == "golden" => Ok(TorusPoint::GOLDEN),
            Value::Atom { text, .. } if text == "sqrt2m1" => Ok(TorusPoint::SQRT2_MINUS_1),
            Value::Atom { .. } => Ok(TorusPoint::from_f64(self.real(v)?)),
            Value::Call { name, args, column } if name == "raw" => {
                let [a] = self.positional::<1>(args, *column, "raw")?;
                Ok(TorusPoint::from_raw(self.int(a)?))
            }
            Value::Call { name, column, .. } => self.err(*column, format!("expected a torus point, found {name}(...)")),
        }
    }

    fn point(&self, v: &Value) -> Result<PointSpec, ConfigError> {
        match v {
            Value::Call { name, args, column } if name == "pair" => {
                let [x, y] = self.positional::<2>(args, *column, "pair")?;
                Ok(PointSpec::Pair(self.torus(x)?, self.torus(y)?))
            }
            Value::Call { name, args, column } if name == "offset" => {
                let [k] = self.positional::<1>(args, *column, "offset")?;
                Ok(PointSpec::Offset(self.int(k)?))
            }
            _ => Ok(PointSpec::Circle(self.torus(v)?)),
        }
    }

    fn single<'v>(&self, arg: &'v Arg) -> Result<&'v Value, ConfigError> {
        match arg.parts.as_slice() {
            [v] => Ok(v),
            _ => self.err(arg.column, "unexpected ':' in argument"),
        }
    }

    fn positional<'v, const N: usize>(
        &self,
        args: &'v [Arg],
        column: usize,
        name: &str,
    ) -> Result<[&'v Value; N], ConfigError> {
        if args.len() != N {
            return self.err(column, format!("{name}(...) takes {N} argument(s), got {}", args.len()));
        }
        let mut out = Vec::with_capacity(N);
        for a in args {
            if let Some(k) = &a.key {
                return self.err(a.column, format!("{name}(...) takes no named argument '{k}'"));
            }
            out.push(self.single(a)?);
        }
        Ok(out.try_into().expect("length checked"))
    }

    /// Named arguments with positional fallback in the declared order.
    fn named<'v, const N: usize>(
        &self,
        args: &'v [Arg],
        column: usize,
        name: &str,
        keys: [&str; N],
    ) -> Result<[&'v Value; N], ConfigError> {
        let mut slots: [Option<&Value>; N] = [None; N];
        for (i, a) in args.iter().enumerate() {
            let slot = match &a.key {
                Some(k) => match keys.iter().position(|want| want == k) {
                    Some(s) => s,
                    None => return self.err(a.column, format!("{name}(...) has no argument '{k}'")),
                },
                None if i < N => i,
                None => return self.err(a.column, format!("too many arguments to {name}(...)")),
            };
            if slots[slot].is_some() {
                return self.err(a.column, format!("argument '{}' given twice", keys[slot]));
            }
            slots[slot] = Some(self.single(a)?);
        }
        let mut out = Vec::with_capacity(N);
        for (slot, key) in slots.into_iter().zip(keys) {
            match slot {
                Some(v) => out.push(v),
                None => return self.err(column, format!("{name}(...) is missing '{key}'")),
            }
        }
        Ok(out.try_into().expect("length checked"))
    }

    fn call<'v>(&self, v: &'v Value, what: &str) -> Result<(&'v str, &'v [Arg], usize), ConfigError> {
        match v {
            Value::Call { name, args, column } => Ok((name, args, *column)),
            Value::Atom { text, column } => self.err(*column, format!("expected {what}, found '{text}'")),
        }
    }

    fn core<T>(&self, column: usize, r: ergodic_core::Result<T>) -> Result<T, ConfigError> {
        r.or_else(|e| self.err(column, e.to_string()))
    }

    fn dynamics(&self, v: &Value) -> Result<Dynamics, ConfigError> {
        let (name, args, column) = self.call(v, "rotation(...), skew(...) or shift(...)")?;
        match name {
            "rotation" => {
                let [a] = self.named(args, column, name, ["alpha"])?;
                Ok(Dynamics::rotation(self.torus(a)?))
            }
            "skew" => {
                let [a] = self.named(args, column, name, ["alpha"])?;
                Ok(Dynamics::skew_shift(self.torus(a)?))
            }
            "shift" => {
                let [k, s] = self.named(args, column, name, ["alphabet", "seed"])?;
                self.core(column, Dynamics::symbol_shift(self.int(k)?, self.int(s)?))
            }
            other => self.err(column, format!("unknown dynamics '{other}'")),
        }
    }

    fn breakpoints<T>(
        &self,
        args: &[Arg],
        width: usize,
        piece: impl Fn(&[Value]) -> Result<T, ConfigError>,
    ) -> Result<(Vec<TorusPoint>, Vec<T>), ConfigError> {
        let mut bps = Vec::new();
        let mut pieces = Vec::new();
        for a in args {
            if a.key.is_some() || a.parts.len() != width {
                let shape = if width == 2 {
                    "breakpoint:value"
                } else {
                    "breakpoint:amplitude:phase"
                };
                return self.err(a.column, format!("expected {shape}"));
            }
            let b = self.torus(&a.parts[0])?;
            if bps.last().is_some_and(|&last| b <= last) {
                return self.err(a.column, "breakpoints must be strictly increasing");
            }
            bps.push(b);
            pieces.push(piece(&a.parts[1..])?);
        }
        Ok((bps, pieces))
    }

    fn function(&self, v: &Value) -> Result<SamplingFunction, ConfigError> {
        let (name, args, column) = self.call(v, "cos(...), step(...), pcos(...), table(...) or const(...)")?;
        let built = match name {
            "cos" => {
                let [l] = self.named(args, column, name, ["lambda"])?;
                SamplingFunction::cosine(self.real(l)?)
            }
            "const" => {
                let [c] = self.positional::<1>(args, column, name)?;
                SamplingFunction::constant(self.real(c)?)
            }
            "step" => {
                let (bps, values) = self.breakpoints(args, 2, |p| self.real(&p[0]))?;
                SamplingFunction::step(bps, values)
            }
            "pcos" => {
                let (bps, pieces) = self.breakpoints(args, 3, |p| {
                    Ok(CosinePiece {
                        amplitude: self.real(&p[0])?,
                        phase: self.real(&p[1])?,
                    })
                })?;
                SamplingFunction::piecewise_cosine(bps, pieces)
            }
            "table" => {
                let values = args
                    .iter()
                    .map(|a| {
                        if a.key.is_some() {
                            return self.err(a.column, "table(...) takes plain values");
                        }
                        self.real(self.single(a)?)
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                SamplingFunction::symbol_table(values)
            }
            other => return self.err(column, format!("unknown sampling function '{other}'")),
        };
        self.core(column, built)
    }

    fn grid(&self, v: &Value) -> Result<EnergyGrid, ConfigError> {
        let (name, args, column) = self.call(v, "grid(min, max, count)")?;
        if name != "grid" {
            return self.err(column, format!("expected grid(...), found {name}(...)"));
        }
        let [a, b, n] = self.positional::<3>(args, column, name)?;
        self.core(column, EnergyGrid::new(self.real(a)?, self.real(b)?, self.int(n)?))
    }

    fn list(&self, v: &Value) -> Result<Vec<usize>, ConfigError> {
        let (name, args, column) = self.call(v, "list(...)")?;
        if name != "list" {
            return self.err(column, format!("expected list(...), found {name}(...)"));
        }
        args.iter()
            .map(|a| {
                if a.key.is_some() {
                    return self.err(a.column, "list(...) takes plain values");
                }
                self.int(self.single(a)?)
            })
            .collect()
    }

    fn auto(&self, v: &Value) -> Result<Option<f64>, ConfigError> {
        match v {
            Value::Atom { text, .. } if text == "auto" => Ok(None),
            _ => self.real(v).map(Some),
        }
    }

    fn at_least<T: PartialOrd + fmt::Display>(&self, v: &Value, x: T, min: T) -> Result<T, ConfigError> {
        if x >= min {
            Ok(x)
        } else {
            self.err(v.column(), format!("must be at least {min}"))
        }
    }
}

const KEYS: [&str; 23] = [
    "dyn",
    "f",
    "energies",
    "seed",
    "omega",
    "omega0",
    "omega1",
    "n_steps",
    "renorm_every",
    "blocks",
    "samples",
    "box",
    "tol",
    "merge_gap",
    "threshold",
    "exclusion_radius",
    "m",
    "m_values",
    "eps",
    "delta_min",
    "max_pairs",
    "depth",
    "out",
];

/// Parses a config, filling every unset key with its default.
pub fn parse_config(text: &str) -> Result<ExperimentConfig, ConfigError> {
    let mut cfg = ExperimentConfig::default();
    let mut seen = BTreeSet::new();
    for (idx, raw_line) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw_line.split('#').next().unwrap_or("");
        if content.trim().is_empty() {
            continue;
        }
        let column_of = |byte: usize| content[..byte].chars().count() + 1;
        let Some(eq) = content.find('=') else {
            let start = content.len() - content.trim_start().len();
            return Err(ConfigError {
                line,
                column: column_of(start),
                message: "expected 'key = value'".into(),
            });
        };
        let key = content[..eq].trim();
        let key_col = column_of(content.len() - content.trim_start().len());
        if !KEYS.contains(&key) {
            return Err(ConfigError {
                line,
                column: key_col,
                message: format!("unknown key '{key}'"),
            });
        }
        if !seen.insert(key.to_string()) {
            return Err(ConfigError {
                line,
                column: key_col,
                message: format!("key '{key}' set twice"),
            });
        }
        let rest = &content[eq + 1..];
        let value_col = column_of(eq + 1);
        if key == "out" {
            let path = rest.trim();
            if path.is_empty() {
                return Err(ConfigError {
                    line,
                    column: value_col,
                    message: "missing value".into(),
                });
            }
            cfg.out = Some(PathBuf::from(path));
            continue;
        }
        let mut cur = Cursor::new(rest, line, value_col);
        let v = cur.value()?;
        cur.finish()?;
        let ctx = Ctx { line };
        match key {
            "dyn" => cfg.dynamics = Some(ctx.dynamics(&v)?),
            "f" => cfg.function = Some(ctx.function(&v)?),
            "energies" => cfg.energies = Some(ctx.grid(&v)?),
            "seed" => cfg.seed = Some(ctx.int(&v)?),
            "omega" => cfg.omega = Some(ctx.point(&v)?),
            "omega0" => cfg.omega0 = Some(ctx.torus(&v)?),
            "omega1" => cfg.omega1 = Some(ctx.point(&v)?),
            "n_steps" => cfg.n_steps = ctx.at_least(&v, ctx.int(&v)?, 1)?,
            "renorm_every" => cfg.renorm_every = ctx.at_least(&v, ctx.int(&v)?, 1)?,
            "blocks" => cfg.blocks = ctx.at_least(&v, ctx.int(&v)?, 1)?,
            "samples" => cfg.samples = ctx.at_least(&v, ctx.int(&v)?, 1)?,
            "box" => cfg.box_size = ctx.at_least(&v, ctx.int(&v)?, 1)?,
            "tol" => {
                let t = ctx.real(&v)?;
                if t <= 0.0 {
                    return ctx.err(v.column(), "tolerance must be positive");
                }
                cfg.tol = t;
            }
            "merge_gap" => cfg.merge_gap = ctx.at_least(&v, ctx.real(&v)?, 0.0)?,
            "threshold" => cfg.threshold = ctx.at_least(&v, ctx.real(&v)?, 0.0)?,
            "exclusion_radius" => {
                cfg.exclusion_radius = ctx.auto(&v)?;
                if cfg.exclusion_radius.is_some_and(|r| r < 0.0) {
                    return ctx.err(v.column(), "must be at least 0");
                }
            }
            "m" => cfg.m = ctx.at_least(&v, ctx.int(&v)?, 1)?,
            "m_values" => {
                let ms = ctx.list(&v)?;
                if ms.is_empty() || ms[0] == 0 || ms.windows(2).any(|w| w[0] >= w[1]) {
                    return ctx.err(v.column(), "m values must be positive and strictly increasing");
                }
                cfg.m_values = ms;
            }
            "eps" => cfg.eps = ctx.at_least(&v, ctx.real(&v)?, 0.0)?,
            "delta_min" => {
                cfg.delta_min = ctx.auto(&v)?;
                if cfg.delta_min.is_some_and(|d| d < 0.0) {
                    return ctx.err(v.column(), "must be at least 0");
                }
            }
            "max_pairs" => cfg.max_pairs = ctx.int(&v)?,
            "depth" => cfg.depth = ctx.at_least(&v, ctx.int(&v)?, 1)?,
            _ => unreachable!("key list checked above"),
        }
    }
    if let (Some(d), Some(f)) = (&cfg.dynamics, &cfg.function) {
        if let Err(e) = f.check_dynamics(d) {
            return Err(ConfigError {
                line: 0,
                column: 0,
                message: e.to_string(),
            });
        }
    }
    Ok(cfg)
}
