//! The complex velocity field `m ẋ = (ħ/i) Ψ′/Ψ`, its alternative form in
//! terms of `χ = Ψ′`, trajectory and path integration, and real-axis
//! crossings.

mod crossings;
pub mod geometry;
pub(crate) mod integrator;
mod trajectory;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::states::{ComplexPoint, StateKind, StateSpec};

pub use crossings::{find_real_crossings, Crossing, CrossingSet, Verdict};
pub use integrator::StepStats;
pub(crate) use trajectory::trace_loop;
pub use trajectory::{
    integrate_loop, integrate_path, integrate_path_loop, integrate_trajectory, PathCurve,
    PathSample, Trajectory, TrajectorySample,
};

/// Default minimum distance to a node of Ψ.
pub const DEFAULT_NODE_GUARD: f64 = 1e-3;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    /// classical fixed-step RK4 with step `max_step`
    Rk4,
    /// adaptive Dormand-Prince 5(4)
    #[serde(alias = "rk45", alias = "dopri5")]
    DormandPrince45,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct IntegratorSettings {
    pub method: Method,
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// largest step in the independent variable (time, or arc length for paths)
    pub max_step: f64,
    pub node_guard: f64,
    pub max_steps: usize,
    /// open curves are followed for this many periods of the field along `x_r`
    pub horizon_periods: f64,
}

impl Default for IntegratorSettings {
    fn default() -> Self {
        Self {
            method: Method::DormandPrince45,
            rel_tol: 1e-10,
            abs_tol: 1e-10,
            max_step: 0.1,
            node_guard: DEFAULT_NODE_GUARD,
            max_steps: 2_000_000,
            horizon_periods: 10.0,
        }
    }
}

impl IntegratorSettings {
    pub fn with_tolerance(tol: f64) -> Self {
        Self {
            rel_tol: tol,
            abs_tol: tol,
            ..Self::default()
        }
    }

    /// Every violated constraint, empty when valid.
    pub fn violations(&self) -> Vec<String> {
        let mut v = Vec::new();
        let mut check = |name: &str, x: f64| {
            if !(x.is_finite() && x > 0.0) {
                v.push(format!(
                    "integrator.{name} must be finite and > 0 (got {x})"
                ));
            }
        };
        check("rel_tol", self.rel_tol);
        check("abs_tol", self.abs_tol);
        check("max_step", self.max_step);
        check("node_guard", self.node_guard);
        check("horizon_periods", self.horizon_periods);
        if self.max_steps == 0 {
            v.push("integrator.max_steps must be > 0".into());
        }
        v
    }
}

/// `(ħ/(i m)) Ψ′/Ψ` without any guard.
pub(crate) fn raw_velocity(spec: &StateSpec, x: ComplexPoint) -> Complex64 {
    let s = spec.eval(x);
    let u = spec.units();
    -I * (u.hbar / u.mass) * s.dpsi / s.psi
}

pub(crate) fn check_guard(spec: &StateSpec, x: ComplexPoint, guard: f64) -> Result<()> {
    let distance = spec.node_distance(x);
    if distance < guard {
        return Err(Error::NodeProximity { x, distance, guard });
    }
    Ok(())
}

/// Complex velocity `ẋ = (ħ/(i m)) Ψ′/Ψ`, refused within
/// [`DEFAULT_NODE_GUARD`] of a node.
pub fn velocity(spec: &StateSpec, x: ComplexPoint) -> Result<Complex64> {
    velocity_with_guard(spec, x, DEFAULT_NODE_GUARD)
}

pub fn velocity_with_guard(spec: &StateSpec, x: ComplexPoint, guard: f64) -> Result<Complex64> {
    check_guard(spec, x, guard)?;
    Ok(raw_velocity(spec, x))
}

/// `ẋ = (2i(E − V)/ħ)·χ/χ′` with `χ = Ψ′` and `χ′` taken from the closed-form
/// second derivative. Where `E = V` both `E − V` and `χ′` vanish; the ratio
/// is replaced by its limit `−ħ²/(2mΨ)` there.
pub fn velocity_alt(spec: &StateSpec, x: ComplexPoint) -> Result<Complex64> {
    let s = spec.eval(x);
    let u = spec.units();
    if s.psi.norm() == 0.0 || spec.node_distance(x) == 0.0 {
        return Err(Error::DegeneratePoint {
            x,
            reason: "Ψ vanishes",
        });
    }
    let de = s.energy - s.potential;
    let ratio = if de.norm() <= 1e-13 * (s.energy.abs() + s.potential.norm()) {
        -u.hbar * u.hbar / (2.0 * u.mass * s.psi)
    } else if s.d2psi.norm() == 0.0 {
        return Err(Error::DegeneratePoint {
            x,
            reason: "χ′ vanishes away from E = V",
        });
    } else {
        de / s.d2psi
    };
    Ok(2.0 * I / u.hbar * s.dpsi * ratio)
}

/// `dẋ/dx = (ħ/(i m))·(Ψ″/Ψ − (Ψ′/Ψ)²)`.
pub fn velocity_derivative(spec: &StateSpec, x: ComplexPoint) -> Result<Complex64> {
    check_guard(spec, x, DEFAULT_NODE_GUARD)?;
    Ok(raw_velocity_derivative(spec, x))
}

pub(crate) fn raw_velocity_derivative(spec: &StateSpec, x: ComplexPoint) -> Complex64 {
    let s = spec.eval(x);
    let u = spec.units();
    let l = s.dpsi / s.psi;
    -I * (u.hbar / u.mass) * (s.d2psi / s.psi - l * l)
}

/// `½mẋ² + V + (ħ/2i)·dẋ/dx`, which equals the real eigenvalue at every
/// point off the nodes.
pub fn complex_energy(spec: &StateSpec, x: ComplexPoint) -> Result<Complex64> {
    check_guard(spec, x, DEFAULT_NODE_GUARD)?;
    let u = spec.units();
    let v = raw_velocity(spec, x);
    let dv = raw_velocity_derivative(spec, x);
    Ok(0.5 * u.mass * v * v + spec.potential(x) + u.hbar / (2.0 * I) * dv)
}

/// The quantity `|A|` that labels each complex path and is conserved along
/// trajectories:
///
/// * oscillator n = 0: `α|x|`; n = 1: `|α²x² − 1|`; higher n: `∏|ξ − s_j|^{−c_j}`
///   over the stationary points `s_j` with residues `c_j`
/// * well: `√(cosh(2κx_i) + cos(2κx_r))`, κ = nπ/a
/// * step: `√(e^{−2kx_i} + r²e^{2kx_i} − 2r cos(2kx_r))`
/// * plane wave: `e^{−kx_i}`
pub fn path_constant(spec: &StateSpec, x: ComplexPoint) -> f64 {
    match spec.kind() {
        StateKind::HarmonicOscillator { n, alpha, .. } => {
            let xi = alpha * x;
            match n {
                0 => xi.norm(),
                1 => (xi * xi - 1.0).norm(),
                _ => {
                    let roots = spec
                        .oscillator_roots()
                        .expect("oscillator states carry their roots");
                    roots
                        .stationary
                        .iter()
                        .map(|&(s, c)| -c * (xi - s).norm().ln())
                        .sum::<f64>()
                        .exp()
                }
            }
        }
        StateKind::InfiniteSquareWell { n, width } => {
            let kn = n as f64 * std::f64::consts::PI / width;
            ((2.0 * kn * x.im).cosh() + (2.0 * kn * x.re).cos())
                .max(0.0)
                .sqrt()
        }
        StateKind::PotentialStep { k, r } => ((-2.0 * k * x.im).exp()
            + r * r * (2.0 * k * x.im).exp()
            - 2.0 * r * (2.0 * k * x.re).cos())
        .max(0.0)
        .sqrt(),
        StateKind::ConstantPotentialWave { k, .. } => (-k * x.im).exp(),
    }
}
