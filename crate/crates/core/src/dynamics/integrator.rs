//! Explicit Runge-Kutta drivers over small real state vectors whose first two
//! components are the complex position `(x_r, x_i)`.
//!
//! The adaptive method is Dormand-Prince 5(4) with local extrapolation. Every
//! stage point is checked against the node guard before the right-hand side
//! is evaluated there, so the velocity pole at a node of Ψ is never sampled:
//! a step that would come within the guard is rejected and shrunk.

use num_complex::Complex64;

use super::{IntegratorSettings, Method};
use crate::error::{Error, Result};
use crate::states::StateSpec;

pub(crate) trait System<const N: usize> {
    fn rhs(&self, t: f64, y: &[f64; N]) -> [f64; N];
}

impl<const N: usize, F: Fn(f64, &[f64; N]) -> [f64; N]> System<N> for F {
    fn rhs(&self, t: f64, y: &[f64; N]) -> [f64; N] {
        self(t, y)
    }
}

#[inline]
pub(crate) fn position<const N: usize>(y: &[f64; N]) -> Complex64 {
    Complex64::new(y[0], y[1])
}

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
// the 5th-order weights are the last row of A (FSAL)
// difference between the 5th- and 4th-order weights
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

/// Counters accumulated over one integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepStats {
    pub accepted: usize,
    pub rejected: usize,
    pub evaluations: usize,
    pub min_node_distance: f64,
}

impl Default for StepStats {
    fn default() -> Self {
        Self {
            accepted: 0,
            rejected: 0,
            evaluations: 0,
            min_node_distance: f64::INFINITY,
        }
    }
}

/// One accepted step, `t0 → t1`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Step<const N: usize> {
    pub t0: f64,
    pub y0: [f64; N],
    pub t1: f64,
    pub y1: [f64; N],
}

pub(crate) enum Flow {
    Continue,
    Stop,
}

enum Attempt<const N: usize> {
    Done { y: [f64; N], err: f64 },
    Guard { distance: f64 },
}

pub(crate) struct Driver<'a, S, const N: usize> {
    pub sys: &'a S,
    pub spec: &'a StateSpec,
    pub settings: &'a IntegratorSettings,
}

impl<'a, S: System<N>, const N: usize> Driver<'a, S, N> {
    pub fn new(sys: &'a S, spec: &'a StateSpec, settings: &'a IntegratorSettings) -> Self {
        Self {
            sys,
            spec,
            settings,
        }
    }

    fn guard_check(&self, y: &[f64; N], stats: &mut StepStats) -> std::result::Result<(), f64> {
        let d = self.spec.node_distance(position(y));
        if d < self.settings.node_guard {
            return Err(d);
        }
        stats.min_node_distance = stats.min_node_distance.min(d);
        Ok(())
    }

    fn attempt(&self, t: f64, y: &[f64; N], h: f64, stats: &mut StepStats) -> Attempt<N> {
        match self.settings.method {
            Method::DormandPrince45 => self.attempt_dp(t, y, h, stats),
            Method::Rk4 => self.attempt_rk4(t, y, h, stats),
        }
    }

    fn attempt_dp(&self, t: f64, y: &[f64; N], h: f64, stats: &mut StepStats) -> Attempt<N> {
        let mut k = [[0.0; N]; 7];
        k[0] = self.sys.rhs(t, y);
        stats.evaluations += 1;
        let mut y5 = *y;
        for s in 1..7 {
            let mut ys = *y;
            for (j, kj) in k.iter().enumerate().take(s) {
                let a = A[s][j];
                if a != 0.0 {
                    for i in 0..N {
                        ys[i] += h * a * kj[i];
                    }
                }
            }
            if let Err(distance) = self.guard_check(&ys, stats) {
                return Attempt::Guard { distance };
            }
            k[s] = self.sys.rhs(t + C[s] * h, &ys);
            stats.evaluations += 1;
            if s == 6 {
                y5 = ys;
            }
        }
        let mut err = 0.0;
        for i in 0..N {
            let mut e = 0.0;
            for s in 0..7 {
                e += E[s] * k[s][i];
            }
            e *= h;
            let sc = self.settings.abs_tol + self.settings.rel_tol * y[i].abs().max(y5[i].abs());
            err += (e / sc).powi(2);
        }
        let err = (err / N as f64).sqrt();
        if y5.iter().any(|v| !v.is_finite()) || !err.is_finite() {
            return Attempt::Done {
                y: y5,
                err: f64::INFINITY,
            };
        }
        Attempt::Done { y: y5, err }
    }

    fn attempt_rk4(&self, t: f64, y: &[f64; N], h: f64, stats: &mut StepStats) -> Attempt<N> {
        let k1 = self.sys.rhs(t, y);
        let shift = |k: &[f64; N], f: f64| {
            let mut out = *y;
            for i in 0..N {
                out[i] += f * h * k[i];
            }
            out
        };
        let y2 = shift(&k1, 0.5);
        if let Err(distance) = self.guard_check(&y2, stats) {
            return Attempt::Guard { distance };
        }
        let k2 = self.sys.rhs(t + 0.5 * h, &y2);
        let y3 = shift(&k2, 0.5);
        if let Err(distance) = self.guard_check(&y3, stats) {
            return Attempt::Guard { distance };
        }
        let k3 = self.sys.rhs(t + 0.5 * h, &y3);
        let y4 = shift(&k3, 1.0);
        if let Err(distance) = self.guard_check(&y4, stats) {
            return Attempt::Guard { distance };
        }
        let k4 = self.sys.rhs(t + h, &y4);
        stats.evaluations += 4;
        let mut out = *y;
        for i in 0..N {
            out[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        if let Err(distance) = self.guard_check(&out, stats) {
            return Attempt::Guard { distance };
        }
        Attempt::Done { y: out, err: 0.0 }
    }

    /// A single untimed step of size `h` from `(t, y)`, used to refine events
    /// inside an accepted step.
    pub fn single_step(&self, t: f64, y: &[f64; N], h: f64) -> Result<[f64; N]> {
        let mut stats = StepStats::default();
        match self.attempt(t, y, h, &mut stats) {
            Attempt::Done { y, .. } => Ok(y),
            Attempt::Guard { distance } => Err(Error::NodeProximity {
                x: position(y),
                distance,
                guard: self.settings.node_guard,
            }),
        }
    }

    fn initial_step(&self, t: f64, y: &[f64; N], t_end: f64) -> f64 {
        let f = self.sys.rhs(t, y);
        let speed = (f[0] * f[0] + f[1] * f[1]).sqrt();
        let len = self.spec.length_scale();
        let mut h = if speed > 0.0 {
            0.01 * len / speed
        } else {
            0.01
        };
        h = h.min(self.settings.max_step).min(t_end - t);
        h
    }

    /// Integrates from `(t0, y0)` towards `t_end`, handing each accepted step
    /// to `observer`, which may stop the run early.
    pub fn run(
        &self,
        t0: f64,
        y0: [f64; N],
        t_end: f64,
        mut observer: impl FnMut(&Step<N>) -> Result<Flow>,
    ) -> Result<StepStats> {
        let mut stats = StepStats::default();
        if let Err(distance) = self.guard_check(&y0, &mut stats) {
            return Err(Error::NodeProximity {
                x: position(&y0),
                distance,
                guard: self.settings.node_guard,
            });
        }
        let fixed = self.settings.method == Method::Rk4;
        let mut t = t0;
        let mut y = y0;
        let mut h = if fixed {
            self.settings.max_step
        } else {
            self.initial_step(t, &y, t_end)
        };
        let h_min = 1e-14 * t0.abs().max(1.0) * self.spec.length_scale()
            / self.spec.velocity_scale().max(1e-300);
        while t < t_end {
            if stats.accepted + stats.rejected >= self.settings.max_steps {
                return Err(Error::StepFailure {
                    t,
                    reason: format!("exceeded {} steps", self.settings.max_steps),
                });
            }
            let last = t + h >= t_end;
            let h_try = if last { t_end - t } else { h };
            match self.attempt(t, &y, h_try, &mut stats) {
                Attempt::Guard { distance } => {
                    stats.rejected += 1;
                    h = 0.5 * h_try;
                    if fixed || h < h_min {
                        return Err(Error::NodeProximity {
                            x: position(&y),
                            distance,
                            guard: self.settings.node_guard,
                        });
                    }
                }
                Attempt::Done { y: y1, err } => {
                    if err <= 1.0 {
                        if let Err(distance) = self.guard_check(&y1, &mut stats) {
                            stats.rejected += 1;
                            h = 0.5 * h_try;
                            if fixed || h < h_min {
                                return Err(Error::NodeProximity {
                                    x: position(&y1),
                                    distance,
                                    guard: self.settings.node_guard,
                                });
                            }
                            continue;
                        }
                        stats.accepted += 1;
                        let t1 = if last { t_end } else { t + h_try };
                        let step = Step {
                            t0: t,
                            y0: y,
                            t1,
                            y1,
                        };
                        t = t1;
                        y = y1;
                        if let Flow::Stop = observer(&step)? {
                            break;
                        }
                        if !fixed {
                            let fac = if err == 0.0 {
                                5.0
                            } else {
                                (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
                            };
                            h = (h_try * fac).min(self.settings.max_step);
                        }
                    } else {
                        stats.rejected += 1;
                        if !err.is_finite() {
                            h = 0.25 * h_try;
                        } else {
                            h = h_try * (0.9 * err.powf(-0.2)).clamp(0.2, 1.0);
                        }
                        if h < h_min {
                            return Err(Error::StepFailure {
                                t,
                                reason: format!("step size underflow (h = {h:.3e})"),
                            });
                        }
                    }
                }
            }
        }
        Ok(stats)
    }
}

/// Bisection for a sign change of `g` inside an accepted step, re-stepping
/// from the step start so the located point carries the integrator's accuracy.
pub(crate) fn refine_in_step<S: System<N>, const N: usize>(
    driver: &Driver<'_, S, N>,
    step: &Step<N>,
    g: impl Fn(&[f64; N]) -> f64,
    tol: f64,
) -> Result<(f64, [f64; N])> {
    let g0 = g(&step.y0);
    let mut lo = 0.0;
    let mut hi = step.t1 - step.t0;
    let mut best = (step.t1, step.y1);
    if g0 == 0.0 {
        return Ok((step.t0, step.y0));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let y = driver.single_step(step.t0, &step.y0, mid)?;
        let gm = g(&y);
        best = (step.t0 + mid, y);
        if gm.abs() <= tol {
            break;
        }
        if (gm < 0.0) == (g0 < 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(best)
}
