//! Closed-form catalog of one-dimensional stationary states, evaluable at
//! arbitrary complex positions.
//!
//! Wavefunctions are unnormalized:
//!
//! | family | Ψ(x) | V(x) |
//! |---|---|---|
//! | `ho` | H_n(αx)·e^{−α²x²/2}, H_n the physicists' Hermite polynomial | ½mω²x² |
//! | `well` | √(2/a)·sin(nπx/a) | 0 |
//! | `step` | e^{ikx} + r·e^{−ikx} (the V = 0 side) | 0 |
//! | `wave` | e^{ikx} | V₀ |
//!
//! All of them are entire functions, so [`StateSpec::eval`] never fails.

pub mod hermite;

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// A position in the complex plane, `x_r + i x_i`.
pub type ComplexPoint = Complex64;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Action and mass units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnitSystem {
    pub hbar: f64,
    pub mass: f64,
}

impl Default for UnitSystem {
    fn default() -> Self {
        Self {
            hbar: 1.0,
            mass: 1.0,
        }
    }
}

/// Which analytic family a state belongs to, with its quantum numbers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StateKind {
    HarmonicOscillator {
        n: u32,
        alpha: f64,
        omega: f64,
    },
    InfiniteSquareWell {
        n: u32,
        width: f64,
    },
    /// Only the `V = 0` region: Ψ = e^{ikx} + r·e^{−ikx}.
    PotentialStep {
        k: f64,
        r: f64,
    },
    ConstantPotentialWave {
        k: f64,
        v0: f64,
    },
}

/// Oscillator data derived once at construction.
#[derive(Debug, PartialEq)]
pub(crate) struct OscillatorRoots {
    /// zeros of h_n in the scaled coordinate ξ = αx
    pub nodes: Vec<f64>,
    /// zeros of h_n' − ξh_n, with the residues of h_n/(h_n' − ξh_n)
    pub stationary: Vec<(f64, f64)>,
}

/// A validated stationary state.
#[derive(Debug, Clone, PartialEq)]
pub struct StateSpec {
    kind: StateKind,
    units: UnitSystem,
    roots: Option<Arc<OscillatorRoots>>,
}

/// Ψ, Ψ′, Ψ″, V and E at one complex point. Ψ″ comes from the closed form,
/// not from the Schrödinger relation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WavefunctionSample {
    pub psi: Complex64,
    pub dpsi: Complex64,
    pub d2psi: Complex64,
    pub potential: Complex64,
    pub energy: f64,
}

/// Closed rectangle `[re.0, re.1] × [im.0, im.1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Window {
    pub re: (f64, f64),
    pub im: (f64, f64),
}

impl Window {
    pub fn new(re: (f64, f64), im: (f64, f64)) -> Self {
        Self { re, im }
    }

    /// Square window of half-width `radius` around `center`.
    pub fn around(center: Complex64, radius: f64) -> Self {
        Self {
            re: (center.re - radius, center.re + radius),
            im: (center.im - radius, center.im + radius),
        }
    }

    pub fn contains(&self, x: Complex64) -> bool {
        x.re >= self.re.0 && x.re <= self.re.1 && x.im >= self.im.0 && x.im <= self.im.1
    }
}

fn positive(name: &str, v: f64, errs: &mut Vec<String>) {
    if !(v.is_finite() && v > 0.0) {
        errs.push(format!("{name} must be finite and > 0 (got {v})"));
    }
}

impl StateSpec {
    /// Validates `kind` against `units`. Every violated constraint is reported.
    pub fn new(kind: StateKind, units: UnitSystem) -> Result<Self> {
        let mut errs = Vec::new();
        positive("hbar", units.hbar, &mut errs);
        positive("mass", units.mass, &mut errs);
        match kind {
            StateKind::HarmonicOscillator { n, alpha, omega } => {
                positive("alpha", alpha, &mut errs);
                positive("omega", omega, &mut errs);
                if n > 10 {
                    errs.push(format!("oscillator level n = {n} exceeds the supported 10"));
                }
                if errs.is_empty() {
                    let want = units.mass * omega / units.hbar;
                    if ((alpha * alpha - want) / want).abs() > 1e-9 {
                        errs.push(format!(
                            "alpha^2 = {} must equal m*omega/hbar = {}",
                            alpha * alpha,
                            want
                        ));
                    }
                }
            }
            StateKind::InfiniteSquareWell { n, width } => {
                if n == 0 {
                    errs.push("well level n must be >= 1".into());
                }
                positive("a", width, &mut errs);
            }
            StateKind::PotentialStep { k, r } => {
                positive("k", k, &mut errs);
                if !(r.is_finite() && (0.0..1.0).contains(&r)) {
                    errs.push(format!(
                        "reflection amplitude r must lie in [0, 1) (got {r})"
                    ));
                }
            }
            StateKind::ConstantPotentialWave { k, v0 } => {
                positive("k", k, &mut errs);
                if !v0.is_finite() {
                    errs.push(format!("v0 must be finite (got {v0})"));
                }
            }
        }
        if !errs.is_empty() {
            return Err(Error::Validation(errs));
        }
        let roots = match kind {
            StateKind::HarmonicOscillator { n, .. } => Some(Arc::new(OscillatorRoots {
                nodes: hermite::monic_roots(n),
                stationary: hermite::stationary_points_with_residues(n),
            })),
            _ => None,
        };
        Ok(Self { kind, units, roots })
    }

    /// Oscillator with `alpha = sqrt(m ω / ħ)` in unit ħ = m = 1.
    pub fn oscillator(n: u32, omega: f64) -> Result<Self> {
        Self::new(
            StateKind::HarmonicOscillator {
                n,
                alpha: omega.sqrt(),
                omega,
            },
            UnitSystem::default(),
        )
    }

    pub fn well(n: u32, width: f64) -> Result<Self> {
        Self::new(
            StateKind::InfiniteSquareWell { n, width },
            UnitSystem::default(),
        )
    }

    pub fn step(k: f64, r: f64) -> Result<Self> {
        Self::new(StateKind::PotentialStep { k, r }, UnitSystem::default())
    }

    pub fn wave(k: f64, v0: f64) -> Result<Self> {
        Self::new(
            StateKind::ConstantPotentialWave { k, v0 },
            UnitSystem::default(),
        )
    }

    pub fn kind(&self) -> StateKind {
        self.kind
    }

    pub fn units(&self) -> UnitSystem {
        self.units
    }

    pub(crate) fn oscillator_roots(&self) -> Option<&OscillatorRoots> {
        self.roots.as_deref()
    }

    /// Bound states have real eigenfunctions on the real line.
    pub fn is_bound(&self) -> bool {
        matches!(
            self.kind,
            StateKind::HarmonicOscillator { .. } | StateKind::InfiniteSquareWell { .. }
        )
    }

    /// The state's natural length: 1/α, a/(nπ) or 1/k.
    pub fn length_scale(&self) -> f64 {
        match self.kind {
            StateKind::HarmonicOscillator { alpha, .. } => 1.0 / alpha,
            StateKind::InfiniteSquareWell { n, width } => width / (n as f64 * PI),
            StateKind::PotentialStep { k, .. } | StateKind::ConstantPotentialWave { k, .. } => {
                1.0 / k
            }
        }
    }

    /// Typical speed ħ/(m·length_scale).
    pub fn velocity_scale(&self) -> f64 {
        self.units.hbar / (self.units.mass * self.length_scale())
    }

    /// Period in `x_r` of the velocity field, for states whose field is
    /// periodic along the real direction.
    pub fn real_period(&self) -> Option<f64> {
        match self.kind {
            StateKind::HarmonicOscillator { .. } => None,
            StateKind::InfiniteSquareWell { n, width } => Some(width / n as f64),
            StateKind::PotentialStep { k, .. } | StateKind::ConstantPotentialWave { k, .. } => {
                Some(PI / k)
            }
        }
    }

    /// Default real-line window for Born densities: ±8/α for the oscillator,
    /// the box for the well, four periods of |Ψ|² for the scattering states.
    pub fn real_line_span(&self) -> (f64, f64) {
        match self.kind {
            StateKind::HarmonicOscillator { alpha, .. } => (-8.0 / alpha, 8.0 / alpha),
            StateKind::InfiniteSquareWell { width, .. } => (0.0, width),
            StateKind::PotentialStep { k, .. } | StateKind::ConstantPotentialWave { k, .. } => {
                (-2.0 * PI / k, 2.0 * PI / k)
            }
        }
    }

    pub fn energy(&self) -> f64 {
        let UnitSystem { hbar, mass } = self.units;
        match self.kind {
            StateKind::HarmonicOscillator { n, omega, .. } => (n as f64 + 0.5) * hbar * omega,
            StateKind::InfiniteSquareWell { n, width } => {
                let kn = n as f64 * PI / width;
                hbar * hbar * kn * kn / (2.0 * mass)
            }
            StateKind::PotentialStep { k, .. } => hbar * hbar * k * k / (2.0 * mass),
            StateKind::ConstantPotentialWave { k, v0 } => hbar * hbar * k * k / (2.0 * mass) + v0,
        }
    }

    pub fn potential(&self, x: Complex64) -> Complex64 {
        match self.kind {
            StateKind::HarmonicOscillator { omega, .. } => {
                0.5 * self.units.mass * omega * omega * x * x
            }
            StateKind::InfiniteSquareWell { .. } | StateKind::PotentialStep { .. } => {
                Complex64::new(0.0, 0.0)
            }
            StateKind::ConstantPotentialWave { v0, .. } => Complex64::new(v0, 0.0),
        }
    }

    pub fn eval(&self, x: ComplexPoint) -> WavefunctionSample {
        let (psi, dpsi, d2psi) = match self.kind {
            StateKind::HarmonicOscillator { n, alpha, .. } => {
                let xi = alpha * x;
                let [h, dh, d2h] = hermite::monic_with_derivatives(n, xi);
                // H_n = 2^n h_n
                let g = 2f64.powi(n as i32) * (-0.5 * xi * xi).exp();
                (
                    h * g,
                    alpha * (dh - xi * h) * g,
                    alpha * alpha * (d2h - 2.0 * xi * dh + (xi * xi - 1.0) * h) * g,
                )
            }
            StateKind::InfiniteSquareWell { n, width } => {
                let kn = n as f64 * PI / width;
                let c = (2.0 / width).sqrt();
                let (s, co) = ((kn * x).sin(), (kn * x).cos());
                (c * s, c * kn * co, -c * kn * kn * s)
            }
            StateKind::PotentialStep { k, r } => {
                let ep = (I * k * x).exp();
                let em = (-I * k * x).exp();
                let psi = ep + r * em;
                (psi, I * k * (ep - r * em), -k * k * psi)
            }
            StateKind::ConstantPotentialWave { k, .. } => {
                let psi = (I * k * x).exp();
                (psi, I * k * psi, -k * k * psi)
            }
        };
        WavefunctionSample {
            psi,
            dpsi,
            d2psi,
            potential: self.potential(x),
            energy: self.energy(),
        }
    }

    /// Zeros of Ψ inside `window`, from the closed forms.
    pub fn nodes(&self, window: &Window) -> Vec<ComplexPoint> {
        match self.kind {
            StateKind::HarmonicOscillator { alpha, .. } => self
                .roots
                .as_ref()
                .map(|r| {
                    r.nodes
                        .iter()
                        .map(|xi| Complex64::new(xi / alpha, 0.0))
                        .filter(|x| window.contains(*x))
                        .collect()
                })
                .unwrap_or_default(),
            StateKind::InfiniteSquareWell { n, width } => {
                if window.im.0 > 0.0 || window.im.1 < 0.0 {
                    return Vec::new();
                }
                let spacing = width / n as f64;
                let first = (window.re.0 / spacing).ceil() as i64;
                let last = (window.re.1 / spacing).floor() as i64;
                (first..=last)
                    .map(|j| Complex64::new(j as f64 * spacing, 0.0))
                    .collect()
            }
            StateKind::PotentialStep { k, r } => {
                if r == 0.0 {
                    return Vec::new();
                }
                let im = (1.0 / r).ln() / (2.0 * k);
                if im < window.im.0 || im > window.im.1 {
                    return Vec::new();
                }
                // x_r = (2j+1)π/(2k)
                let spacing = PI / k;
                let first = ((window.re.0 / spacing) - 0.5).ceil() as i64;
                let last = ((window.re.1 / spacing) - 0.5).floor() as i64;
                (first..=last)
                    .map(|j| Complex64::new((j as f64 + 0.5) * spacing, im))
                    .collect()
            }
            StateKind::ConstantPotentialWave { .. } => Vec::new(),
        }
    }

    /// Distance from `x` to the nearest zero of Ψ (infinite when Ψ has none).
    pub fn node_distance(&self, x: ComplexPoint) -> f64 {
        match self.kind {
            StateKind::HarmonicOscillator { alpha, .. } => self
                .roots
                .as_ref()
                .map(|r| {
                    r.nodes
                        .iter()
                        .map(|xi| (x - xi / alpha).norm())
                        .fold(f64::INFINITY, f64::min)
                })
                .unwrap_or(f64::INFINITY),
            StateKind::InfiniteSquareWell { n, width } => {
                let spacing = width / n as f64;
                let j = (x.re / spacing).round();
                (x - j * spacing).norm()
            }
            StateKind::PotentialStep { k, r } => {
                if r == 0.0 {
                    return f64::INFINITY;
                }
                let spacing = PI / k;
                let j = (x.re / spacing - 0.5).round();
                let node = Complex64::new((j + 0.5) * spacing, (1.0 / r).ln() / (2.0 * k));
                (x - node).norm()
            }
            StateKind::ConstantPotentialWave { .. } => f64::INFINITY,
        }
    }

    /// Short label used in diagnostics and file names.
    pub fn family(&self) -> &'static str {
        match self.kind {
            StateKind::HarmonicOscillator { .. } => "ho",
            StateKind::InfiniteSquareWell { .. } => "well",
            StateKind::PotentialStep { .. } => "step",
            StateKind::ConstantPotentialWave { .. } => "wave",
        }
    }
}

impl fmt::Display for StateSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            StateKind::HarmonicOscillator { n, alpha, omega } => {
                write!(f, "ho:n={n},alpha={alpha},omega={omega}")?
            }
            StateKind::InfiniteSquareWell { n, width } => write!(f, "well:n={n},a={width}")?,
            StateKind::PotentialStep { k, r } => write!(f, "step:k={k},r={r}")?,
            StateKind::ConstantPotentialWave { k, v0 } => write!(f, "wave:k={k},v0={v0}")?,
        }
        if self.units != UnitSystem::default() {
            write!(f, ",hbar={},mass={}", self.units.hbar, self.units.mass)?;
        }
        Ok(())
    }
}

/// A real literal, also accepting multiples and fractions of π such as
/// `pi`, `π`, `2pi`, `-pi/2` or `0.5*pi`.
pub fn parse_real(text: &str) -> Option<f64> {
    let t = text.trim();
    if let Ok(v) = t.parse::<f64>() {
        return v.is_finite().then_some(v);
    }
    let lower = t.to_ascii_lowercase().replace('π', "pi");
    let (num, den) = match lower.split_once('/') {
        Some((n, d)) => (n.trim().to_string(), d.trim().parse::<f64>().ok()?),
        None => (lower.clone(), 1.0),
    };
    let coeff = num.strip_suffix("pi")?.trim_end_matches('*').trim();
    let c = match coeff {
        "" | "+" => 1.0,
        "-" => -1.0,
        c => c.parse::<f64>().ok()?,
    };
    let v = c * PI / den;
    v.is_finite().then_some(v)
}

impl FromStr for StateSpec {
    type Err = Error;

    /// Parses the compact form `family:key=value,...`, e.g.
    /// `ho:n=1,alpha=1,omega=1` or `step:k=1,r=0.70710678118`.
    /// `hbar` and `mass` (alias `m`) may be given for any family.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (family, rest) = s.split_once(':').unwrap_or((s, ""));
        let mut fields: Vec<(String, f64)> = Vec::new();
        for (idx, item) in rest.split(',').enumerate() {
            let item = item.trim();
            if item.is_empty() {
                continue;
            }
            let (key, value) = item.split_once('=').ok_or_else(|| {
                Error::parse(
                    format!("state field {}", idx + 1),
                    format!("expected key=value, got `{item}`"),
                )
            })?;
            let value: f64 = parse_real(value).ok_or_else(|| {
                Error::parse(
                    format!("state field `{}`", key.trim()),
                    format!("`{}` is not a number", value.trim()),
                )
            })?;
            fields.push((key.trim().to_ascii_lowercase(), value));
        }
        let mut take = |name: &[&str]| -> Option<f64> {
            let pos = fields
                .iter()
                .position(|(k, _)| name.contains(&k.as_str()))?;
            Some(fields.remove(pos).1)
        };
        let units = UnitSystem {
            hbar: take(&["hbar"]).unwrap_or(1.0),
            mass: take(&["mass", "m"]).unwrap_or(1.0),
        };
        let mut errs = Vec::new();
        let mut level = |v: Option<f64>, min: u32| -> u32 {
            match v {
                Some(v) if v.fract() == 0.0 && v >= min as f64 => v as u32,
                Some(v) => {
                    errs.push(format!("n must be an integer >= {min} (got {v})"));
                    min
                }
                None => {
                    errs.push("missing quantum number n".into());
                    min
                }
            }
        };
        let kind = match family.to_ascii_lowercase().as_str() {
            "ho" => {
                let n = level(take(&["n"]), 0);
                let alpha = take(&["alpha"]);
                let omega = take(&["omega"]);
                let (alpha, omega) = match (alpha, omega) {
                    (Some(a), Some(w)) => (a, w),
                    (Some(a), None) => (a, a * a * units.hbar / units.mass),
                    (None, Some(w)) => ((units.mass * w / units.hbar).sqrt(), w),
                    (None, None) => ((units.mass / units.hbar).sqrt(), 1.0),
                };
                StateKind::HarmonicOscillator { n, alpha, omega }
            }
            "well" => {
                let n = level(take(&["n"]), 1);
                let width = take(&["a", "width"]).unwrap_or_else(|| {
                    errs.push("missing well width a".into());
                    1.0
                });
                StateKind::InfiniteSquareWell { n, width }
            }
            "step" => StateKind::PotentialStep {
                k: take(&["k"]).unwrap_or_else(|| {
                    errs.push("missing wavenumber k".into());
                    1.0
                }),
                r: take(&["r"]).unwrap_or(std::f64::consts::FRAC_1_SQRT_2),
            },
            "wave" => StateKind::ConstantPotentialWave {
                k: take(&["k"]).unwrap_or_else(|| {
                    errs.push("missing wavenumber k".into());
                    1.0
                }),
                v0: take(&["v0"]).unwrap_or(0.0),
            },
            other => {
                return Err(Error::parse(
                    "state family",
                    format!("unknown family `{other}` (expected ho, well, step or wave)"),
                ))
            }
        };
        for (k, _) in &fields {
            errs.push(format!("unknown field `{k}` for family {family}"));
        }
        match StateSpec::new(kind, units) {
            Ok(spec) if errs.is_empty() => Ok(spec),
            Ok(_) => Err(Error::Validation(errs)),
            Err(Error::Validation(more)) => {
                errs.extend(more);
                Err(Error::Validation(errs))
            }
            Err(e) => Err(e),
        }
    }
}
