use num_complex::Complex64;

use super::integrator::{position, refine_in_step, Driver, Flow, Step, StepStats, System};
use super::{check_guard, path_constant, raw_velocity, IntegratorSettings};
use crate::error::{Error, Result};
use crate::states::{ComplexPoint, StateSpec};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectorySample {
    pub t: f64,
    pub x: ComplexPoint,
    pub xdot: Complex64,
}

/// Time-ordered solution of `ẋ = velocity(x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub state: StateSpec,
    pub samples: Vec<TrajectorySample>,
    /// `|A|` at the first sample
    pub path_constant: f64,
    /// largest relative deviation of `|A|` from its initial value
    pub max_drift: f64,
    pub stats: StepStats,
    /// loop period, when the trajectory was traced as a closed loop
    pub period: Option<f64>,
}

impl Trajectory {
    pub fn start(&self) -> ComplexPoint {
        self.samples[0].x
    }

    pub fn end(&self) -> ComplexPoint {
        self.samples.last().expect("trajectories are never empty").x
    }

    pub fn is_closed(&self) -> bool {
        self.period.is_some()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathSample {
    /// arc length from the start
    pub s: f64,
    pub x: ComplexPoint,
    /// unit tangent `ẋ/|ẋ|`
    pub direction: Complex64,
}

/// Geometric curve of the direction field, parameterized by arc length.
#[derive(Debug, Clone, PartialEq)]
pub struct PathCurve {
    pub state: StateSpec,
    pub samples: Vec<PathSample>,
    pub stats: StepStats,
    /// total arc length of one loop, when traced as a closed loop
    pub loop_length: Option<f64>,
}

pub(crate) fn check_settings(settings: &IntegratorSettings) -> Result<()> {
    let v = settings.violations();
    if v.is_empty() {
        Ok(())
    } else {
        Err(Error::Validation(v))
    }
}

fn velocity_system(spec: &StateSpec) -> impl Fn(f64, &[f64; 2]) -> [f64; 2] + '_ {
    move |_t, y| {
        let v = raw_velocity(spec, position(y));
        [v.re, v.im]
    }
}

fn direction_system(spec: &StateSpec) -> impl Fn(f64, &[f64; 2]) -> [f64; 2] + '_ {
    move |_t, y| {
        let v = raw_velocity(spec, position(y));
        let n = v.norm();
        [v.re / n, v.im / n]
    }
}

fn stationary_check(spec: &StateSpec, x0: ComplexPoint) -> Result<Complex64> {
    let v = raw_velocity(spec, x0);
    if v.norm() <= 1e-12 * spec.velocity_scale() {
        return Err(Error::StationaryPoint { x: x0 });
    }
    Ok(v)
}

struct DriftMonitor<'a> {
    spec: &'a StateSpec,
    a0: f64,
    max: f64,
}

impl<'a> DriftMonitor<'a> {
    fn new(spec: &'a StateSpec, x0: ComplexPoint) -> Self {
        Self {
            spec,
            a0: path_constant(spec, x0),
            max: 0.0,
        }
    }

    fn observe(&mut self, x: ComplexPoint) {
        let a = path_constant(self.spec, x);
        let d = (a - self.a0).abs() / self.a0.max(f64::MIN_POSITIVE);
        self.max = self.max.max(d);
    }
}

/// Integrates `ẋ = (ħ/(i m)) Ψ′/Ψ` over `t_span`, recording every accepted step.
pub fn integrate_trajectory(
    spec: &StateSpec,
    x0: ComplexPoint,
    t_span: (f64, f64),
    settings: &IntegratorSettings,
) -> Result<Trajectory> {
    check_settings(settings)?;
    let (t0, t1) = t_span;
    if !(t0.is_finite() && t1.is_finite() && t1 > t0) {
        return Err(Error::Validation(vec![format!(
            "t_span must be finite and increasing (got {t0}:{t1})"
        )]));
    }
    check_guard(spec, x0, settings.node_guard)?;
    let sys = velocity_system(spec);
    let driver = Driver::new(&sys, spec, settings);
    let mut drift = DriftMonitor::new(spec, x0);
    let mut samples = vec![TrajectorySample {
        t: t0,
        x: x0,
        xdot: raw_velocity(spec, x0),
    }];
    let stats = driver.run(t0, [x0.re, x0.im], t1, |step| {
        let x = position(&step.y1);
        drift.observe(x);
        samples.push(TrajectorySample {
            t: step.t1,
            x,
            xdot: raw_velocity(spec, x),
        });
        Ok(Flow::Continue)
    })?;
    Ok(Trajectory {
        state: spec.clone(),
        samples,
        path_constant: drift.a0,
        max_drift: drift.max,
        stats,
        period: None,
    })
}

/// Result of following one loop (or an open curve to its horizon).
pub(crate) struct LoopTrace<const N: usize> {
    pub points: Vec<(f64, [f64; N])>,
    pub stats: StepStats,
    /// independent-variable length of the loop, `None` for open curves
    pub period: Option<f64>,
}

/// Cap on the independent variable while looking for closure.
fn loop_cap(spec: &StateSpec, settings: &IntegratorSettings, arc_length: bool) -> f64 {
    let len = spec.length_scale();
    let horizon = spec
        .real_period()
        .map(|p| p * settings.horizon_periods)
        .unwrap_or(0.0);
    if arc_length {
        1e3 * len + 100.0 * horizon
    } else {
        let t_scale = len / spec.velocity_scale();
        1e3 * t_scale + 1e3 * horizon / spec.velocity_scale()
    }
}

/// Follows the curve through `y0` until it closes on itself (returning
/// within 1e-6 of the start while moving in the starting direction) or, for
/// fields periodic in `x_r`, until it has travelled `horizon_periods` periods.
pub(crate) fn trace_loop<S: System<N>, const N: usize>(
    spec: &StateSpec,
    sys: &S,
    y0: [f64; N],
    settings: &IntegratorSettings,
    arc_length: bool,
) -> Result<LoopTrace<N>> {
    check_settings(settings)?;
    let x0 = position(&y0);
    check_guard(spec, x0, settings.node_guard)?;
    let f0 = sys.rhs(0.0, &y0);
    let v0 = Complex64::new(f0[0], f0[1]);
    if v0.norm()
        <= 1e-12
            * if arc_length {
                1.0
            } else {
                spec.velocity_scale()
            }
    {
        return Err(Error::StationaryPoint { x: x0 });
    }
    let dir0 = v0 / v0.norm();
    let along = move |y: &[f64; N]| ((position(y) - x0) * dir0.conj()).re;
    let close_tol = 1e-6 * x0.norm().max(1.0);
    let horizon = spec.real_period().map(|p| p * settings.horizon_periods);
    let cap = loop_cap(spec, settings, arc_length);

    let driver = Driver::new(sys, spec, settings);
    let mut points = vec![(0.0, y0)];
    let mut period = None;
    let mut open = false;
    let mut error: Option<Error> = None;
    let stats = driver.run(0.0, y0, cap, |step: &Step<N>| {
        let (xa, xb) = (position(&step.y0), position(&step.y1));
        let (ga, gb) = (along(&step.y0), along(&step.y1));
        if ga < 0.0
            && gb >= 0.0
            && segment_distance(x0, xa, xb) <= 0.5 * (xb - xa).norm() + close_tol
        {
            match refine_in_step(&driver, step, along, 1e-15 * x0.norm().max(1.0)) {
                Ok((tc, yc)) if (position(&yc) - x0).norm() <= close_tol => {
                    points.push((tc, yc));
                    period = Some(tc);
                    return Ok(Flow::Stop);
                }
                Ok(_) => {}
                Err(e) => {
                    error = Some(e);
                    return Ok(Flow::Stop);
                }
            }
        }
        points.push((step.t1, step.y1));
        if let Some(h) = horizon {
            if (xb.re - x0.re).abs() >= h {
                open = true;
                return Ok(Flow::Stop);
            }
        }
        Ok(Flow::Continue)
    })?;
    if let Some(e) = error {
        return Err(e);
    }
    if period.is_none() && !open {
        return Err(match horizon {
            Some(_) => Error::HorizonExceeded { x0 },
            None => Error::StepFailure {
                t: points.last().map(|p| p.0).unwrap_or(0.0),
                reason: format!("curve through {x0} did not close within {cap:.3e}"),
            },
        });
    }
    Ok(LoopTrace {
        points,
        stats,
        period,
    })
}

fn segment_distance(p: Complex64, a: Complex64, b: Complex64) -> f64 {
    let d = b - a;
    let len2 = d.norm_sqr();
    if len2 == 0.0 {
        return (p - a).norm();
    }
    let u = (((p - a) * d.conj()).re / len2).clamp(0.0, 1.0);
    (p - (a + d * u)).norm()
}

/// Integrates the trajectory through `x0` for exactly one loop. Open curves
/// (possible for the well, step and plane wave) are followed over the
/// configured horizon and returned with `period = None`.
pub fn integrate_loop(
    spec: &StateSpec,
    x0: ComplexPoint,
    settings: &IntegratorSettings,
) -> Result<Trajectory> {
    let sys = velocity_system(spec);
    let trace = trace_loop(spec, &sys, [x0.re, x0.im], settings, false)?;
    let mut drift = DriftMonitor::new(spec, x0);
    let samples = trace
        .points
        .iter()
        .map(|&(t, y)| {
            let x = position(&y);
            drift.observe(x);
            TrajectorySample {
                t,
                x,
                xdot: raw_velocity(spec, x),
            }
        })
        .collect();
    Ok(Trajectory {
        state: spec.clone(),
        samples,
        path_constant: drift.a0,
        max_drift: drift.max,
        stats: trace.stats,
        period: trace.period,
    })
}

fn path_samples(spec: &StateSpec, points: &[(f64, [f64; 2])]) -> Vec<PathSample> {
    points
        .iter()
        .map(|&(s, y)| {
            let x = position(&y);
            let v = raw_velocity(spec, x);
            PathSample {
                s,
                x,
                direction: v / v.norm(),
            }
        })
        .collect()
}

/// Integrates `dx/ds = ẋ/|ẋ|` for `arc_length`; this traces the same curves
/// as `dx_i/dx_r = ẋ_i/ẋ_r` without its singularity where `ẋ_r = 0`.
pub fn integrate_path(
    spec: &StateSpec,
    x0: ComplexPoint,
    arc_length: f64,
    settings: &IntegratorSettings,
) -> Result<PathCurve> {
    check_settings(settings)?;
    if !(arc_length.is_finite() && arc_length > 0.0) {
        return Err(Error::Validation(vec![format!(
            "arc_length must be finite and > 0 (got {arc_length})"
        )]));
    }
    check_guard(spec, x0, settings.node_guard)?;
    stationary_check(spec, x0)?;
    let sys = direction_system(spec);
    let driver = Driver::new(&sys, spec, settings);
    let mut points = vec![(0.0, [x0.re, x0.im])];
    let stats = driver.run(0.0, [x0.re, x0.im], arc_length, |step| {
        points.push((step.t1, step.y1));
        Ok(Flow::Continue)
    })?;
    Ok(PathCurve {
        state: spec.clone(),
        samples: path_samples(spec, &points),
        stats,
        loop_length: None,
    })
}

/// Traces the path through `x0` for exactly one loop (see [`integrate_loop`]).
pub fn integrate_path_loop(
    spec: &StateSpec,
    x0: ComplexPoint,
    settings: &IntegratorSettings,
) -> Result<PathCurve> {
    stationary_check(spec, x0)?;
    let sys = direction_system(spec);
    let trace = trace_loop(spec, &sys, [x0.re, x0.im], settings, true)?;
    Ok(PathCurve {
        state: spec.clone(),
        samples: path_samples(spec, &trace.points),
        stats: trace.stats,
        loop_length: trace.period,
    })
}
