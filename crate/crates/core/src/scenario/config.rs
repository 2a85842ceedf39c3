use std::fmt;
use std::path::PathBuf;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dynamics::IntegratorSettings;
use crate::error::{Error, Result};
use crate::extended::Lattice;
use crate::states::{parse_real, StateSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Task {
    Trajectory,
    Path,
    Born,
    FieldClosed,
    FieldTrajectory,
    Compare,
    Poirier,
    Figures,
}

impl Task {
    pub const ALL: [Task; 8] = [
        Task::Trajectory,
        Task::Path,
        Task::Born,
        Task::FieldClosed,
        Task::FieldTrajectory,
        Task::Compare,
        Task::Poirier,
        Task::Figures,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Task::Trajectory => "trajectory",
            Task::Path => "path",
            Task::Born => "born",
            Task::FieldClosed => "field-closed",
            Task::FieldTrajectory => "field-trajectory",
            Task::Compare => "compare",
            Task::Poirier => "poirier",
            Task::Figures => "figures",
        }
    }
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Task {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Task::ALL
            .into_iter()
            .find(|t| t.name() == s.trim())
            .ok_or_else(|| {
                let names: Vec<_> = Task::ALL.iter().map(|t| t.name()).collect();
                format!("unknown task `{s}` (expected one of {})", names.join(", "))
            })
    }
}

/// Sampling grid: a real interval alone (`xr0:xr1:n`) or a full lattice
/// (`xr0:xr1:n,xi0:xi1:m`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridSpec {
    pub re: (f64, f64),
    pub nr: usize,
    pub im: Option<((f64, f64), usize)>,
}

impl GridSpec {
    pub fn lattice(&self) -> Option<Result<Lattice>> {
        self.im
            .map(|(im, ni)| Lattice::new(self.re, self.nr, im, ni))
    }
}

fn parse_axis(text: &str) -> std::result::Result<((f64, f64), usize), String> {
    let parts: Vec<&str> = text.split(':').collect();
    if parts.len() != 3 {
        return Err(format!("axis `{text}` must read lo:hi:count"));
    }
    let lo = parse_real(parts[0]).ok_or_else(|| format!("`{}` is not a number", parts[0]))?;
    let hi = parse_real(parts[1]).ok_or_else(|| format!("`{}` is not a number", parts[1]))?;
    let n: usize = parts[2]
        .trim()
        .parse()
        .map_err(|_| format!("`{}` is not a point count", parts[2]))?;
    let mut bad = Vec::new();
    if n < 2 {
        bad.push(format!("grid count must be >= 2 (got {n})"));
    }
    if hi <= lo {
        bad.push(format!("range {lo}:{hi} is degenerate"));
    }
    if bad.is_empty() {
        Ok(((lo, hi), n))
    } else {
        Err(bad.join("; "))
    }
}

impl std::str::FromStr for GridSpec {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let mut axes = s.split(',');
        let re = axes.next().ok_or("empty grid")?;
        let (re, nr) = parse_axis(re)?;
        let im = axes.next().map(parse_axis).transpose()?;
        if axes.next().is_some() {
            return Err(format!("grid `{s}` has more than two axes"));
        }
        Ok(GridSpec { re, nr, im })
    }
}

/// A complex literal of the form `a+bi`, `a-bi`, `a`, `bi` or `i`.
pub fn parse_complex(text: &str) -> Option<Complex64> {
    let t: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    if t.is_empty() {
        return None;
    }
    let Some(body) = t.strip_suffix('i').or_else(|| t.strip_suffix('j')) else {
        return parse_real(&t).map(|re| Complex64::new(re, 0.0));
    };
    // split at the last sign that is not an exponent sign
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&k| (bytes[k] == b'+' || bytes[k] == b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
    let (re, im) = match split {
        Some(k) => (parse_real(&body[..k])?, &body[k..]),
        None => (0.0, body),
    };
    let im = match im {
        "" | "+" => 1.0,
        "-" => -1.0,
        s => parse_real(s)?,
    };
    Some(Complex64::new(re, im))
}

/// `a+bi` with round-trip reals.
pub fn format_complex(z: Complex64) -> String {
    if z.im.is_sign_negative() {
        format!("{:e}-{:e}i", z.re, -z.im)
    } else {
        format!("{:e}+{:e}i", z.re, z.im)
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
#[serde(untagged)]
pub enum SpanValue {
    Text(String),
    Pair([f64; 2]),
}

/// The configuration document as written, before validation. Command-line
/// flags are overlaid on this.
#[derive(Debug, Clone, Default, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    pub state: Option<String>,
    pub task: Option<String>,
    pub seeds: Option<Vec<String>>,
    pub t_span: Option<SpanValue>,
    pub arc_length: Option<f64>,
    pub grid: Option<String>,
    /// shorthand for `rel_tol = abs_tol`
    pub tol: Option<f64>,
    pub integrator: Option<IntegratorSettings>,
    pub output: Option<String>,
    pub masked: Option<bool>,
}

/// A validated scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub state: StateSpec,
    pub task: Task,
    pub seeds: Vec<Complex64>,
    pub t_span: Option<(f64, f64)>,
    pub arc_length: Option<f64>,
    pub grid: Option<GridSpec>,
    pub integrator: IntegratorSettings,
    pub output: Option<PathBuf>,
    pub masked: bool,
}

fn line_col(text: &str, offset: usize) -> String {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let col = before.len() - before.rfind('\n').map(|p| p + 1).unwrap_or(0) + 1;
    format!("line {line}, column {col}")
}

/// Reads a configuration document: JSON when it starts with `{`, TOML otherwise.
pub fn parse_raw(text: &str) -> Result<RawConfig> {
    if text.trim_start().starts_with('{') {
        serde_json::from_str(text).map_err(|e| {
            Error::parse(
                format!("line {}, column {}", e.line(), e.column()),
                e.to_string(),
            )
        })
    } else {
        toml::from_str(text).map_err(|e| {
            let at = e
                .span()
                .map(|s| line_col(text, s.start))
                .unwrap_or_else(|| "document".into());
            Error::parse(at, e.message().to_string())
        })
    }
}

/// Parses and validates a configuration document.
pub fn parse_config(text: &str) -> Result<ScenarioConfig> {
    parse_raw(text)?.validate()
}

impl RawConfig {
    /// Fields of `other` that are set replace those of `self`.
    pub fn overlay(mut self, other: RawConfig) -> Self {
        macro_rules! take {
            ($($f:ident),*) => { $( if other.$f.is_some() { self.$f = other.$f; } )* };
        }
        take!(state, task, seeds, t_span, arc_length, grid, tol, integrator, output, masked);
        self
    }

    /// Checks every field and reports all violations together.
    pub fn validate(&self) -> Result<ScenarioConfig> {
        let mut errs: Vec<String> = Vec::new();
        let task = match &self.task {
            None => {
                errs.push("task is required".into());
                None
            }
            Some(t) => t.parse::<Task>().map_err(|e| errs.push(e)).ok(),
        };
        let state = match (&self.state, task) {
            (None, Some(Task::Figures)) => Some(StateSpec::oscillator(0, 1.0).expect("valid")),
            (None, _) => {
                errs.push("state is required".into());
                None
            }
            (Some(s), _) => match s.parse::<StateSpec>() {
                Ok(spec) => Some(spec),
                Err(Error::Validation(v)) => {
                    errs.extend(v.into_iter().map(|m| format!("state: {m}")));
                    None
                }
                Err(e) => {
                    errs.push(format!("state: {e}"));
                    None
                }
            },
        };
        let mut seeds = Vec::new();
        for (i, s) in self.seeds.iter().flatten().enumerate() {
            match parse_complex(s) {
                Some(z) => seeds.push(z),
                None => errs.push(format!("seeds[{i}]: `{s}` is not a complex literal a+bi")),
            }
        }
        let t_span = match &self.t_span {
            None => None,
            Some(v) => {
                let pair = match v {
                    SpanValue::Pair(p) => Some((p[0], p[1])),
                    SpanValue::Text(s) => s
                        .split_once(':')
                        .and_then(|(a, b)| Some((parse_real(a)?, parse_real(b)?))),
                };
                match pair {
                    Some((a, b)) if a.is_finite() && b.is_finite() && b > a => Some((a, b)),
                    _ => {
                        errs.push("t_span must read t0:t1 with t1 > t0".into());
                        None
                    }
                }
            }
        };
        if let Some(l) = self.arc_length {
            if !(l.is_finite() && l > 0.0) {
                errs.push(format!("arc_length must be > 0 (got {l})"));
            }
        }
        let grid = match &self.grid {
            None => None,
            Some(g) => g
                .parse::<GridSpec>()
                .map_err(|e| errs.push(format!("grid: {e}")))
                .ok(),
        };
        let mut integrator = self.integrator.unwrap_or_default();
        if let Some(tol) = self.tol {
            integrator.rel_tol = tol;
            integrator.abs_tol = tol;
        }
        errs.extend(
            integrator
                .violations()
                .into_iter()
                .map(|m| format!("integrator: {m}")),
        );

        if let Some(task) = task {
            let needs_seeds = matches!(task, Task::Trajectory | Task::Path | Task::Compare);
            if needs_seeds && seeds.is_empty() {
                errs.push(format!("task {task} needs at least one seed"));
            }
            let needs_lattice = matches!(
                task,
                Task::FieldClosed | Task::FieldTrajectory | Task::Poirier
            );
            if needs_lattice {
                match grid {
                    None => errs.push(format!("task {task} needs a grid xr0:xr1:n,xi0:xi1:m")),
                    Some(g) if g.im.is_none() => {
                        errs.push(format!("task {task} needs an x_i axis in its grid"))
                    }
                    _ => {}
                }
            }
            if task == Task::Figures && self.output.is_none() {
                errs.push("task figures needs an output directory".into());
            }
        }
        if !errs.is_empty() {
            return Err(Error::Validation(errs));
        }
        Ok(ScenarioConfig {
            state: state.expect("validated"),
            task: task.expect("validated"),
            seeds,
            t_span,
            arc_length: self.arc_length,
            grid,
            integrator,
            output: self.output.as_ref().map(PathBuf::from),
            masked: self.masked.unwrap_or(false),
        })
    }
}
