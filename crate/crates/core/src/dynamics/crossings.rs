use serde::Serialize;

use super::integrator::{position, refine_in_step, Driver, Step};
use super::trajectory::trace_loop;
use super::{
    check_guard, path_constant, raw_velocity, raw_velocity_derivative, IntegratorSettings,
};
use crate::born::born_direct;
use crate::error::{Error, Result};
use crate::extended::h_solution;
use crate::states::{ComplexPoint, StateSpec};

/// Relative agreement required between boundary candidates.
pub const AGREEMENT_TOL: f64 = 1e-6;
/// `|x_i|` below which a point counts as on the real axis.
pub const AXIS_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Crossing {
    pub x_r0: f64,
    /// `|Ψ(x_r0)|²`
    pub p: f64,
    /// sign of `dx_i/dt` at the crossing (0 for a stationary seed)
    pub direction: i8,
    /// time along the trajectory from the seed
    pub t: f64,
    /// `ln ρ(crossing) − ln ρ(seed)` accumulated along the trajectory
    pub ln_transport: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "verdict", rename_all = "lowercase")]
pub enum Verdict {
    Defined { f: f64 },
    Overdetermined,
    Unreached,
}

impl Verdict {
    pub fn name(&self) -> &'static str {
        match self {
            Verdict::Defined { .. } => "defined",
            Verdict::Overdetermined => "overdetermined",
            Verdict::Unreached => "unreached",
        }
    }

    pub fn f(&self) -> Option<f64> {
        match *self {
            Verdict::Defined { f } => Some(f),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CrossingSet {
    pub seed: ComplexPoint,
    pub path_constant: f64,
    pub crossings: Vec<Crossing>,
    /// boundary candidates `f_j`, one per crossing
    pub candidates: Vec<f64>,
    pub verdict: Verdict,
    /// loop period when the trajectory closed, `None` for open curves
    pub period: Option<f64>,
}

fn candidate_verdict(candidates: &[f64]) -> Verdict {
    let Some(&f) = candidates.first() else {
        return Verdict::Unreached;
    };
    let agree = candidates
        .iter()
        .all(|&c| (c - f).abs() <= AGREEMENT_TOL * f.abs().max(c.abs()));
    if agree && f.is_finite() {
        Verdict::Defined { f }
    } else {
        Verdict::Overdetermined
    }
}

/// Follows the trajectory through `x0` for one loop (or to the horizon for
/// open curves) and collects every real-axis crossing with its boundary
/// value. Candidates are `P/h` with the catalog `h`; for states without one
/// they are `P(x_j)·e^{−(L_j − L_1)}` with `L = ∫2 Re(dẋ/dx) dt`, the
/// transport of the density between crossings, so `f` is normalized to
/// `h = 1` at the first crossing.
pub fn find_real_crossings(
    spec: &StateSpec,
    x0: ComplexPoint,
    settings: &IntegratorSettings,
) -> Result<CrossingSet> {
    check_guard(spec, x0, settings.node_guard)?;
    let a0 = path_constant(spec, x0);
    let v0 = raw_velocity(spec, x0);
    let on_axis = x0.im.abs() <= AXIS_TOL;
    if v0.norm() <= 1e-12 * spec.velocity_scale() {
        let crossings: Vec<Crossing> = if on_axis {
            vec![Crossing {
                x_r0: x0.re,
                p: born_direct(spec, x0.re),
                direction: 0,
                t: 0.0,
                ln_transport: 0.0,
            }]
        } else {
            Vec::new()
        };
        let candidates = candidates(spec, &crossings, &[0.0])?;
        return Ok(CrossingSet {
            seed: x0,
            path_constant: a0,
            verdict: candidate_verdict(&candidates),
            crossings,
            candidates,
            period: None,
        });
    }

    let sys = |_t: f64, y: &[f64; 3]| {
        let x = position(y);
        let v = raw_velocity(spec, x);
        let dv = raw_velocity_derivative(spec, x);
        [v.re, v.im, -2.0 * dv.re]
    };
    let trace = trace_loop(spec, &sys, [x0.re, x0.im, 0.0], settings, false)?;
    let driver = Driver::new(&sys, spec, settings);
    let mut found: Vec<(f64, [f64; 3])> = Vec::new();
    if on_axis {
        found.push(trace.points[0]);
    }
    let last = trace.points.len() - 1;
    for (i, w) in trace.points.windows(2).enumerate() {
        let ((ta, ya), (tb, yb)) = (w[0], w[1]);
        if ya[1] * yb[1] >= 0.0 {
            continue;
        }
        // the closing point duplicates the seed
        if on_axis && i + 1 == last && trace.period.is_some() {
            continue;
        }
        let step = Step {
            t0: ta,
            y0: ya,
            t1: tb,
            y1: yb,
        };
        found.push(refine_in_step(&driver, &step, |y| y[1], AXIS_TOL)?);
    }
    let scale = 1e-9 * spec.length_scale();
    let mut crossings: Vec<Crossing> = Vec::new();
    let mut logs = Vec::new();
    for (t, y) in found {
        if crossings
            .iter()
            .any(|c| (c.x_r0 - y[0]).abs() <= scale && (c.t - t).abs() <= 1e-9)
        {
            continue;
        }
        let v = raw_velocity(spec, position(&y));
        crossings.push(Crossing {
            x_r0: y[0],
            p: born_direct(spec, y[0]),
            direction: if v.im > 0.0 {
                1
            } else if v.im < 0.0 {
                -1
            } else {
                0
            },
            t,
            ln_transport: y[2],
        });
        logs.push(y[2]);
    }
    let candidates = candidates(spec, &crossings, &logs)?;
    Ok(CrossingSet {
        seed: x0,
        path_constant: a0,
        verdict: candidate_verdict(&candidates),
        crossings,
        candidates,
        period: trace.period,
    })
}

fn candidates(spec: &StateSpec, crossings: &[Crossing], logs: &[f64]) -> Result<Vec<f64>> {
    crossings
        .iter()
        .zip(logs)
        .map(
            |(c, &l)| match h_solution(spec, ComplexPoint::new(c.x_r0, 0.0)) {
                Ok(h) => Ok(c.p / h),
                Err(Error::UnsupportedState(_)) => Ok(c.p * (-(l - logs[0])).exp()),
                Err(e) => Err(e),
            },
        )
        .collect()
}
