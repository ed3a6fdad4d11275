//! Parameter sweeps driven by a small sectioned `key = value` config.
//!
//! ```text
//! # comments start with '#'
//! [sweep]
//! axis = t               # spin | excitations | t | omega | lambda
//! start = 0
//! stop = 2
//! count = 64
//! scale = linear         # linear | log
//! time_unit = pi_over_omega   # t axis only: absolute | pi_over_omega
//! variants = general, scaling
//! include_exact = true
//! truncation = false
//! quad_steps = 64
//! out = time_scan.csv
//!
//! [fixed]
//! spin = 5               # 5, 5/2 or 2.5
//! excitations = 5
//! omega = 3000
//! lambda = 0.3
//! omega_time = pi/4      # or: time = 2.6e-4
//! delta = 0
//! nmax = 30              # default 2(M + 2S)
//! ```
//!
//! Real values accept plain numbers and multiples of `pi` (`pi`, `pi/4`,
//! `3pi/2`, `0.5*pi`).

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::PathBuf;
use std::str::FromStr;

use crate::bethe::{initial_guess, solve_bethe, BetheConfig, BetheRoots};
use crate::bounds::{
    analytic_bound, general_bound, intermediate_bound, off_resonant_bound, scaling_bound, worst_case_bound,
    BoundVariant,
};
use crate::dynamics::{RwaDynamics, SpectralCache, TruncationReport};
use crate::eigenstate::{build_eigenstate, default_cutoff, TCEigenstate};
use crate::hamiltonian::ModelParams;
use crate::par::{self, Execution};
use crate::sector::{HalfInt, SectorDims, C64};
use crate::{Result, RwaError};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    Spin,
    Excitations,
    Time,
    Omega,
    Lambda,
}

impl Axis {
    pub fn name(self) -> &'static str {
        match self {
            Axis::Spin => "spin",
            Axis::Excitations => "excitations",
            Axis::Time => "t",
            Axis::Omega => "omega",
            Axis::Lambda => "lambda",
        }
    }
}

impl FromStr for Axis {
    type Err = RwaError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "spin" | "S" => Ok(Axis::Spin),
            "excitations" | "M" => Ok(Axis::Excitations),
            "t" | "time" => Ok(Axis::Time),
            "omega" => Ok(Axis::Omega),
            "lambda" => Ok(Axis::Lambda),
            _ => Err(RwaError::invalid(format!("unknown sweep axis `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Scale {
    #[default]
    Linear,
    Log,
}

/// Unit of the values on a time axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TimeUnit {
    #[default]
    Absolute,
    /// Axis value `x` means `t = x·π/ω`.
    PiOverOmega,
}

/// The evaluation time of each point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TimeSpec {
    Absolute(f64),
    /// Fixed product `ωt`.
    OmegaTime(f64),
}

impl TimeSpec {
    pub fn at(self, omega: f64) -> f64 {
        match self {
            TimeSpec::Absolute(t) => t,
            TimeSpec::OmegaTime(wt) => wt / omega,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FixedParams {
    pub spin: HalfInt,
    pub excitations: u32,
    pub omega: f64,
    pub lambda: f64,
    pub delta: f64,
    pub time: TimeSpec,
    pub n_max: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub axis: Axis,
    pub start: f64,
    pub stop: f64,
    pub count: usize,
    pub scale: Scale,
    pub time_unit: TimeUnit,
    pub variants: Vec<BoundVariant>,
    pub include_exact: bool,
    pub truncation: bool,
    pub quad_steps: usize,
    pub out: Option<PathBuf>,
    pub fixed: FixedParams,
}

/// Parse a real number, allowing multiples of `pi`.
pub fn parse_real(raw: &str) -> Result<f64> {
    let s: String = raw.split_whitespace().collect();
    let bad = || RwaError::invalid(format!("bad number `{raw}`"));
    if let Some(pos) = s.find("pi") {
        let (head, tail) = (&s[..pos], &s[pos + 2..]);
        let factor = match head.trim_end_matches('*') {
            "" => 1.0,
            "-" => -1.0,
            h => h.parse::<f64>().map_err(|_| bad())?,
        };
        let divisor = match tail {
            "" => 1.0,
            t => t.strip_prefix('/').ok_or_else(bad)?.parse::<f64>().map_err(|_| bad())?,
        };
        return Ok(factor * std::f64::consts::PI / divisor);
    }
    if let Some((num, den)) = s.split_once('/') {
        let (num, den) = (
            num.parse::<f64>().map_err(|_| bad())?,
            den.parse::<f64>().map_err(|_| bad())?,
        );
        return Ok(num / den);
    }
    s.parse::<f64>().map_err(|_| bad())
}

fn parse_bool(raw: &str) -> Result<bool> {
    match raw {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(RwaError::invalid(format!("expected true or false, got `{raw}`"))),
    }
}

impl SweepConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut sections: HashMap<&str, HashMap<String, (usize, String)>> = HashMap::new();
        let mut current: Option<&str> = None;
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
                let name = name.trim();
                if name != "sweep" && name != "fixed" {
                    return Err(RwaError::Config {
                        line: line_no,
                        message: format!("unknown section [{name}]"),
                    });
                }
                current = Some(if name == "sweep" { "sweep" } else { "fixed" });
                continue;
            }
            let (key, value) = line.split_once('=').ok_or(RwaError::Config {
                line: line_no,
                message: "expected key = value".into(),
            })?;
            let section = current.ok_or(RwaError::Config {
                line: line_no,
                message: "key outside of a section".into(),
            })?;
            let key = key.trim().to_string();
            let entry = sections.entry(section).or_default();
            if entry.contains_key(&key) {
                return Err(RwaError::Config {
                    line: line_no,
                    message: format!("duplicate key `{key}`"),
                });
            }
            entry.insert(key, (line_no, value.trim().to_string()));
        }

        let mut sweep = sections.remove("sweep").unwrap_or_default();
        let mut fixed = sections.remove("fixed").unwrap_or_default();
        fn take<T>(
            map: &mut HashMap<String, (usize, String)>,
            key: &str,
            parse: impl Fn(&str) -> Result<T>,
        ) -> Result<Option<T>> {
            match map.remove(key) {
                None => Ok(None),
                Some((line, v)) => parse(&v).map(Some).map_err(|e| RwaError::Config {
                    line,
                    message: format!("{key}: {e}"),
                }),
            }
        }
        let missing = |key: &str| RwaError::Config {
            line: 0,
            message: format!("missing key `{key}`"),
        };

        let axis = take(&mut sweep, "axis", Axis::from_str)?.ok_or_else(|| missing("axis"))?;
        let start = take(&mut sweep, "start", parse_real)?.ok_or_else(|| missing("start"))?;
        let stop = take(&mut sweep, "stop", parse_real)?.ok_or_else(|| missing("stop"))?;
        let count = take(&mut sweep, "count", |v| {
            v.parse::<usize>()
                .map_err(|_| RwaError::invalid("count must be an integer"))
        })?
        .ok_or_else(|| missing("count"))?;
        let scale = take(&mut sweep, "scale", |v| match v {
            "linear" => Ok(Scale::Linear),
            "log" => Ok(Scale::Log),
            _ => Err(RwaError::invalid(format!("unknown scale `{v}`"))),
        })?
        .unwrap_or_default();
        let time_unit = take(&mut sweep, "time_unit", |v| match v {
            "absolute" => Ok(TimeUnit::Absolute),
            "pi_over_omega" => Ok(TimeUnit::PiOverOmega),
            _ => Err(RwaError::invalid(format!("unknown time unit `{v}`"))),
        })?
        .unwrap_or_default();
        let variants = take(&mut sweep, "variants", |v| {
            v.split(',')
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .map(BoundVariant::from_str)
                .collect::<Result<Vec<_>>>()
        })?
        .unwrap_or_default();
        let include_exact = take(&mut sweep, "include_exact", parse_bool)?.unwrap_or(true);
        let truncation = take(&mut sweep, "truncation", parse_bool)?.unwrap_or(false);
        let quad_steps = take(&mut sweep, "quad_steps", |v| {
            v.parse::<usize>()
                .map_err(|_| RwaError::invalid("quad_steps must be an integer"))
        })?
        .unwrap_or(64);
        let out = take(&mut sweep, "out", |v| Ok(PathBuf::from(v)))?;

        // The swept quantity may be left out of [fixed]; its value is never read.
        let swept = |a: Axis| axis == a;
        let spin = take(&mut fixed, "spin", HalfInt::from_str)?
            .or(swept(Axis::Spin).then_some(HalfInt::from_twice(1)))
            .ok_or_else(|| missing("spin"))?;
        let excitations = take(&mut fixed, "excitations", |v| {
            v.parse::<u32>()
                .map_err(|_| RwaError::invalid("excitations must be a non-negative integer"))
        })?
        .or(swept(Axis::Excitations).then_some(0))
        .ok_or_else(|| missing("excitations"))?;
        let omega = take(&mut fixed, "omega", parse_real)?
            .or(swept(Axis::Omega).then_some(1.0))
            .ok_or_else(|| missing("omega"))?;
        let lambda = take(&mut fixed, "lambda", parse_real)?
            .or(swept(Axis::Lambda).then_some(0.0))
            .ok_or_else(|| missing("lambda"))?;
        let delta = take(&mut fixed, "delta", parse_real)?.unwrap_or(0.0);
        let time_line = fixed.get("time").or_else(|| fixed.get("omega_time")).map(|v| v.0);
        let abs = take(&mut fixed, "time", parse_real)?;
        let wt = take(&mut fixed, "omega_time", parse_real)?;
        let time = match (abs, wt) {
            (Some(_), Some(_)) => {
                return Err(RwaError::Config {
                    line: time_line.unwrap_or(0),
                    message: "give either time or omega_time, not both".into(),
                })
            }
            (Some(t), None) => TimeSpec::Absolute(t),
            (None, Some(w)) => TimeSpec::OmegaTime(w),
            (None, None) if axis == Axis::Time => TimeSpec::Absolute(0.0),
            (None, None) => return Err(missing("time or omega_time")),
        };
        let n_max = take(&mut fixed, "nmax", |v| {
            v.parse::<usize>()
                .map_err(|_| RwaError::invalid("nmax must be an integer"))
        })?;

        for (name, map) in [("sweep", &sweep), ("fixed", &fixed)] {
            if let Some((key, (line, _))) = map.iter().min_by_key(|(_, (l, _))| *l) {
                return Err(RwaError::Config {
                    line: *line,
                    message: format!("unknown key `{key}` in [{name}]"),
                });
            }
        }

        let config = SweepConfig {
            axis,
            start,
            stop,
            count,
            scale,
            time_unit,
            variants,
            include_exact,
            truncation,
            quad_steps,
            out,
            fixed: FixedParams {
                spin,
                excitations,
                omega,
                lambda,
                delta,
                time,
                n_max,
            },
        };
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if self.count < 2 {
            return Err(RwaError::invalid("count must be at least 2"));
        }
        if !(self.start.is_finite() && self.stop.is_finite()) || self.start == self.stop {
            return Err(RwaError::invalid("start and stop must be finite and distinct"));
        }
        if self.scale == Scale::Log && (self.start <= 0.0 || self.stop <= 0.0) {
            return Err(RwaError::invalid("log scale needs positive endpoints"));
        }
        for v in &self.variants {
            if matches!(v, BoundVariant::DickeFock | BoundVariant::LinearCombination) {
                return Err(RwaError::invalid(format!(
                    "variant `{v}` needs per-state labels and is not available in sweeps"
                )));
            }
        }
        let deltas_nonzero = self.fixed.delta != 0.0;
        for v in &self.variants {
            let resonant_only = !matches!(v, BoundVariant::OffResonant | BoundVariant::WorstCase);
            if deltas_nonzero && resonant_only {
                return Err(RwaError::invalid(format!("variant `{v}` requires delta = 0")));
            }
        }
        ModelParams::detuned(self.fixed.omega, self.fixed.lambda, self.fixed.delta)?;
        if self.quad_steps < 2 || !self.quad_steps.is_multiple_of(2) {
            return Err(RwaError::invalid("quad_steps must be even and at least 2"));
        }
        for x in self.axis_values() {
            match self.axis {
                Axis::Spin => {
                    let s = HalfInt::from_f64(x)?;
                    if s.twice() < 1 {
                        return Err(RwaError::invalid(format!("spin axis value {x} is below 1/2")));
                    }
                }
                Axis::Excitations => {
                    if x < 0.0 || (x - x.round()).abs() > 1e-9 {
                        return Err(RwaError::invalid(format!(
                            "excitation axis value {x} is not a non-negative integer"
                        )));
                    }
                }
                Axis::Omega => {
                    if x <= 0.0 {
                        return Err(RwaError::invalid("omega axis values must be positive"));
                    }
                }
                Axis::Lambda => {
                    if x < 0.0 {
                        return Err(RwaError::invalid("lambda axis values must be non-negative"));
                    }
                }
                Axis::Time => {}
            }
        }
        Ok(())
    }

    pub fn axis_values(&self) -> Vec<f64> {
        let last = (self.count - 1) as f64;
        (0..self.count)
            .map(|k| {
                let u = k as f64 / last;
                match self.scale {
                    Scale::Linear => self.start + (self.stop - self.start) * u,
                    Scale::Log => self.start * (self.stop / self.start).powf(u),
                }
            })
            .collect()
    }

    fn axis_header(&self) -> &'static str {
        match (self.axis, self.time_unit) {
            (Axis::Time, TimeUnit::PiOverOmega) => "t_over_pi_per_omega",
            (a, _) => a.name(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub axis_value: f64,
    pub exact_error: Option<f64>,
    /// One entry per configured variant.
    pub bounds: Vec<Option<f64>>,
    pub bethe_residual: Option<f64>,
    pub truncation_ratio: Option<f64>,
    /// `ok`, `truncation` (ratio above the flag threshold) or an error code.
    pub status: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepTable {
    pub axis_header: String,
    pub variants: Vec<BoundVariant>,
    pub rows: Vec<SweepRow>,
}

fn cell(v: Option<f64>) -> String {
    v.map(|x| format!("{x:e}")).unwrap_or_default()
}

impl SweepTable {
    pub fn header(&self) -> Vec<String> {
        let mut h = vec![self.axis_header.clone(), "exact_error".to_string()];
        h.extend(self.variants.iter().map(|v| v.name().to_string()));
        h.extend(["bethe_residual", "truncation_ratio", "status"].map(String::from));
        h
    }

    /// Comma-separated, LF line endings, empty cells for missing values.
    pub fn to_csv(&self) -> String {
        let mut out = self.header().join(",");
        out.push('\n');
        for r in &self.rows {
            let mut cells = vec![format!("{}", r.axis_value), cell(r.exact_error)];
            cells.extend(r.bounds.iter().map(|b| cell(*b)));
            cells.push(cell(r.bethe_residual));
            cells.push(cell(r.truncation_ratio));
            cells.push(r.status.clone());
            let _ = writeln!(out, "{}", cells.join(","));
        }
        out
    }
}

#[derive(Debug, Clone, Copy)]
struct Point {
    axis_value: f64,
    spin: HalfInt,
    excitations: u32,
    params: ModelParams,
    t: f64,
}

fn points(config: &SweepConfig) -> Result<Vec<Point>> {
    let f = &config.fixed;
    config
        .axis_values()
        .into_iter()
        .map(|x| {
            let (mut spin, mut m, mut omega, mut lambda) = (f.spin, f.excitations, f.omega, f.lambda);
            let mut t = None;
            match config.axis {
                Axis::Spin => spin = HalfInt::from_f64(x)?,
                Axis::Excitations => m = x.round() as u32,
                Axis::Omega => omega = x,
                Axis::Lambda => lambda = x,
                Axis::Time => {
                    t = Some(match config.time_unit {
                        TimeUnit::Absolute => x,
                        TimeUnit::PiOverOmega => x * std::f64::consts::PI / omega,
                    })
                }
            }
            let params = ModelParams::detuned(omega, lambda, f.delta)?;
            Ok(Point {
                axis_value: x,
                spin,
                excitations: m,
                params,
                t: t.unwrap_or_else(|| f.time.at(omega)),
            })
        })
        .collect()
}

/// Reuse the roots of a neighbouring sector as a starting point.
fn warm_guess(prev: &BetheRoots, spin: HalfInt, excitations: u32) -> Option<Vec<C64>> {
    let scale = (spin.value() / prev.spin.value()).sqrt();
    let mut g: Vec<C64> = prev.roots.iter().map(|z| z * scale).collect();
    match excitations.cmp(&prev.excitations) {
        std::cmp::Ordering::Equal => {}
        std::cmp::Ordering::Greater if excitations == prev.excitations + 1 => {
            g.push(*initial_guess(spin, excitations).last()?);
        }
        std::cmp::Ordering::Less if excitations + 1 == prev.excitations => {
            g.pop();
        }
        _ => return None,
    }
    Some(g)
}

/// Solve each distinct sector once, in axis order. The standard guess is
/// tried first so every point sits on the same branch as a standalone
/// solve; the previous sector's roots are the fallback.
fn solve_sectors(pts: &[Point]) -> HashMap<(HalfInt, u32), std::result::Result<BetheRoots, &'static str>> {
    let config = BetheConfig::default();
    let mut out = HashMap::new();
    let mut prev: Option<BetheRoots> = None;
    for p in pts {
        let key = (p.spin, p.excitations);
        if out.contains_key(&key) {
            continue;
        }
        let primary = solve_bethe(p.spin, p.excitations, &initial_guess(p.spin, p.excitations), &config);
        let result = match primary {
            Ok(r) => Ok(r),
            Err(e) => prev
                .as_ref()
                .and_then(|r| warm_guess(r, p.spin, p.excitations))
                .and_then(|g| solve_bethe(p.spin, p.excitations, &g, &config).ok())
                .ok_or(e.code()),
        };
        if let Ok(r) = &result {
            prev = Some(r.clone());
        }
        out.insert(key, result);
    }
    out
}

fn evaluate(
    config: &SweepConfig,
    p: &Point,
    roots: &BetheRoots,
    cache: &SpectralCache,
    inner: Execution,
) -> Result<SweepRow> {
    let n_max = config
        .fixed
        .n_max
        .unwrap_or_else(|| default_cutoff(p.spin, p.excitations));
    let dims = SectorDims::with_spin(p.spin, n_max)?;
    let eig: TCEigenstate = build_eigenstate(roots, dims, &p.params)?;

    let mut truncation_ratio = None;
    let exact_error = if config.truncation {
        let rep = crate::dynamics::truncation_report(dims, &p.params, p.t, &eig.state, Some(cache), inner)?;
        truncation_ratio = Some(rep.ratio);
        config.include_exact.then_some(rep.error)
    } else if config.include_exact {
        Some(RwaDynamics::with_cache(dims, p.params, Some(cache), inner)?.exact_error(p.t, &eig.state)?)
    } else {
        None
    };

    let bounds = config
        .variants
        .iter()
        .map(|v| {
            let r = match v {
                BoundVariant::General => general_bound(&eig, &p.params, p.t)?,
                BoundVariant::Intermediate => intermediate_bound(&eig.state, &p.params, p.t, config.quad_steps)?,
                BoundVariant::WorstCase => worst_case_bound(&eig.state, &p.params, p.t, p.spin.twice() as u32)?,
                BoundVariant::AnalyticClosedForm => analytic_bound(p.spin, p.excitations, &p.params, p.t)?,
                BoundVariant::Scaling => scaling_bound(p.spin, p.excitations, &p.params, p.t)?,
                BoundVariant::OffResonant => off_resonant_bound(&eig, &p.params, p.t)?,
                BoundVariant::DickeFock | BoundVariant::LinearCombination => {
                    return Err(RwaError::invalid(format!("variant `{v}` is not available in sweeps")))
                }
            };
            Ok(Some(r.total))
        })
        .collect::<Result<Vec<_>>>()?;

    let flagged = truncation_ratio.is_some_and(|r| r > TruncationReport::FLAG_THRESHOLD);
    Ok(SweepRow {
        axis_value: p.axis_value,
        exact_error,
        bounds,
        bethe_residual: Some(roots.residual_norm),
        truncation_ratio,
        status: if flagged { "truncation" } else { "ok" }.to_string(),
    })
}

fn failed_row(config: &SweepConfig, p: &Point, residual: Option<f64>, code: &str) -> SweepRow {
    SweepRow {
        axis_value: p.axis_value,
        exact_error: None,
        bounds: vec![None; config.variants.len()],
        bethe_residual: residual,
        truncation_ratio: None,
        status: code.to_string(),
    }
}

/// Evaluate every sweep point. A failing point is reported in its row and
/// never aborts the others.
pub fn run_sweep(config: &SweepConfig, exec: Execution) -> Result<SweepTable> {
    config.validate()?;
    let pts = points(config)?;
    let sectors = solve_sectors(&pts);
    let cache = SpectralCache::new();
    // Points are the parallel unit; decompositions run serially inside them.
    let inner = Execution::Serial;
    let mut rows = par::map(pts, exec, |p| match &sectors[&(p.spin, p.excitations)] {
        Ok(roots) => evaluate(config, &p, roots, &cache, inner)
            .unwrap_or_else(|e| failed_row(config, &p, Some(roots.residual_norm), e.code())),
        Err(code) => failed_row(config, &p, None, code),
    });
    rows.sort_by(|a, b| a.axis_value.total_cmp(&b.axis_value));
    Ok(SweepTable {
        axis_header: config.axis_header().to_string(),
        variants: config.variants.clone(),
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASIC: &str = "\
# demo
[sweep]
axis = t
start = 0
stop = 2
count = 5
time_unit = pi_over_omega
variants = general, scaling
include_exact = true

[fixed]
spin = 1
excitations = 2
omega = 300
lambda = 0.3
";

    #[test]
    fn parse_pi_expressions() {
        use std::f64::consts::PI;
        assert_eq!(parse_real("pi").unwrap(), PI);
        assert_eq!(parse_real("pi/4").unwrap(), PI / 4.0);
        assert_eq!(parse_real("3pi/2").unwrap(), 3.0 * PI / 2.0);
        assert_eq!(parse_real("0.5*pi").unwrap(), 0.5 * PI);
        assert_eq!(parse_real("-pi").unwrap(), -PI);
        assert_eq!(parse_real("2.5e3").unwrap(), 2500.0);
        assert!(parse_real("pie").is_err());
        assert!(parse_real("x").is_err());
    }

    #[test]
    fn parse_config() {
        let c = SweepConfig::parse(BASIC).unwrap();
        assert_eq!(c.axis, Axis::Time);
        assert_eq!(c.count, 5);
        assert_eq!(c.variants, vec![BoundVariant::General, BoundVariant::Scaling]);
        assert_eq!(c.fixed.spin, HalfInt::from_int(1));
        assert_eq!(c.time_unit, TimeUnit::PiOverOmega);
        assert_eq!(c.axis_values(), vec![0.0, 0.5, 1.0, 1.5, 2.0]);
    }

    #[test]
    fn config_errors_carry_lines() {
        let bad = BASIC.replace("count = 5", "count = five");
        match SweepConfig::parse(&bad) {
            Err(RwaError::Config { line, .. }) => assert_eq!(line, 6),
            other => panic!("{other:?}"),
        }
        let unknown = BASIC.replace("lambda = 0.3", "lambda = 0.3\ncolour = red");
        assert!(matches!(
            SweepConfig::parse(&unknown),
            Err(RwaError::Config { line: 16, .. })
        ));
        let dup = BASIC.replace("count = 5", "count = 5\ncount = 6");
        assert!(matches!(SweepConfig::parse(&dup), Err(RwaError::Config { .. })));
        assert!(SweepConfig::parse("axis = t").is_err());
    }

    #[test]
    fn config_validation() {
        assert!(SweepConfig::parse(&BASIC.replace("count = 5", "count = 1")).is_err());
        let log0 = BASIC.replace("time_unit = pi_over_omega", "scale = log");
        assert!(SweepConfig::parse(&log0).is_err());
        assert!(SweepConfig::parse(&BASIC.replace("general, scaling", "dickefock")).is_err());
        let spin_axis = BASIC
            .replace("axis = t", "axis = spin")
            .replace("stop = 2", "stop = 1.3");
        assert!(SweepConfig::parse(&spin_axis).is_err());
    }

    #[test]
    fn sweep_rows_and_csv() {
        let c = SweepConfig::parse(BASIC).unwrap();
        let table = run_sweep(&c, Execution::Serial).unwrap();
        assert_eq!(table.rows.len(), 5);
        assert!(table.rows.iter().all(|r| r.status == "ok"));
        assert_eq!(table.rows[0].exact_error, Some(0.0));
        for r in &table.rows {
            let exact = r.exact_error.unwrap();
            assert!(exact <= r.bounds[0].unwrap() + 1e-9);
            assert!(r.bounds[0].unwrap() <= r.bounds[1].unwrap() + 1e-9);
        }
        let csv = table.to_csv();
        assert!(
            csv.starts_with("t_over_pi_per_omega,exact_error,general,scaling,bethe_residual,truncation_ratio,status\n")
        );
        assert_eq!(csv.lines().count(), 6);
        assert!(!csv.contains('\r'));
    }

    #[test]
    fn serial_and_parallel_agree() {
        let c = SweepConfig::parse(&BASIC.replace("count = 5", "count = 9")).unwrap();
        let a = run_sweep(&c, Execution::Serial).unwrap();
        let b = run_sweep(&c, Execution::Parallel).unwrap();
        assert_eq!(a.to_csv(), b.to_csv());
    }

    #[test]
    fn failures_stay_in_their_row() {
        let text = BASIC
            .replace("axis = t", "axis = excitations")
            .replace("stop = 2", "stop = 3")
            .replace("count = 5", "count = 4")
            .replace("time_unit = pi_over_omega", "")
            .replace("lambda = 0.3", "lambda = 0.3\ntime = 0.001\nnmax = 2");
        let c = SweepConfig::parse(&text).unwrap();
        let table = run_sweep(&c, Execution::Parallel).unwrap();
        let status: Vec<&str> = table.rows.iter().map(|r| r.status.as_str()).collect();
        assert_eq!(status, vec!["ok", "ok", "ok", "CutoffTooSmall"]);
        assert_eq!(table.rows[3].bounds, vec![None, None]);
    }

    #[test]
    fn warm_guess_shapes() {
        let r = crate::bethe::solve_default(HalfInt::from_int(2), 2).unwrap();
        assert_eq!(warm_guess(&r, HalfInt::from_int(2), 3).unwrap().len(), 3);
        assert_eq!(warm_guess(&r, HalfInt::from_int(3), 2).unwrap().len(), 2);
        assert_eq!(warm_guess(&r, HalfInt::from_int(2), 1).unwrap().len(), 1);
        assert!(warm_guess(&r, HalfInt::from_int(2), 5).is_none());
    }
}
