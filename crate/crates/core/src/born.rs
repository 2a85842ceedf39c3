//! The real-line density `P(x_r) = N exp(−(2m/ħ) ∫ ẋ_i dx_r)` recovered from
//! the imaginary velocity component, the direct `|Ψ|²`, and real-line
//! expectation values.

use num_complex::Complex64;

use crate::dynamics::{raw_velocity, raw_velocity_derivative, DEFAULT_NODE_GUARD};
use crate::error::{Error, Result};
use crate::quad::adaptive_simpson;
use crate::states::{StateSpec, Window};

/// Absolute tolerance of each Simpson integral between grid points.
pub const SIMPSON_TOL: f64 = 1e-12;

/// Densities on strictly increasing real positions.
#[derive(Debug, Clone, PartialEq)]
pub struct RealLineGrid {
    pub points: Vec<f64>,
    pub values: Vec<f64>,
    pub normalized: bool,
}

impl RealLineGrid {
    /// `|Ψ|²` on `points`, unnormalized.
    pub fn direct(spec: &StateSpec, points: &[f64]) -> Result<Self> {
        check_increasing(points)?;
        Ok(Self {
            points: points.to_vec(),
            values: points.iter().map(|&x| born_direct(spec, x)).collect(),
            normalized: false,
        })
    }

    pub fn trapezoid(&self) -> f64 {
        trapezoid(&self.points, &self.values)
    }

    pub fn normalize(mut self) -> Self {
        let total = self.trapezoid();
        for v in &mut self.values {
            *v /= total;
        }
        self.normalized = true;
        self
    }

    pub fn peak(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }

    pub fn value_at(&self, x: f64) -> Option<f64> {
        self.points
            .iter()
            .position(|&p| p == x)
            .map(|i| self.values[i])
    }
}

pub(crate) fn trapezoid(x: &[f64], y: &[f64]) -> f64 {
    x.windows(2)
        .zip(y.windows(2))
        .map(|(x, y)| 0.5 * (x[1] - x[0]) * (y[0] + y[1]))
        .sum()
}

fn check_increasing(points: &[f64]) -> Result<()> {
    if points.len() < 2 {
        return Err(Error::InvalidGrid(format!(
            "need at least 2 points, got {}",
            points.len()
        )));
    }
    if let Some(w) = points
        .windows(2)
        .find(|w| w[1].partial_cmp(&w[0]) != Some(std::cmp::Ordering::Greater) || !w[0].is_finite())
    {
        return Err(Error::InvalidGrid(format!(
            "points must be finite and strictly increasing ({} then {})",
            w[0], w[1]
        )));
    }
    Ok(())
}

fn real_nodes(spec: &StateSpec, lo: f64, hi: f64) -> Vec<f64> {
    spec.nodes(&Window::new((lo, hi), (0.0, 0.0)))
        .into_iter()
        .filter(|x| x.im == 0.0)
        .map(|x| x.re)
        .collect()
}

/// `count` points covering `span` while keeping every point at least `guard`
/// from the real nodes of Ψ: the span is cut into node-free segments, points
/// are shared out by segment length, and each segment is sampled uniformly
/// including its ends.
pub fn node_avoiding_grid(
    spec: &StateSpec,
    span: (f64, f64),
    count: usize,
    guard: f64,
) -> Result<Vec<f64>> {
    let (lo, hi) = span;
    if !(lo.is_finite() && hi.is_finite() && hi > lo) {
        return Err(Error::InvalidGrid(format!("degenerate span {lo}:{hi}")));
    }
    // keep rounding from landing a segment end inside the guard
    let guard = guard * (1.0 + 1e-9);
    let mut segments = Vec::new();
    let mut start = lo;
    let nodes = real_nodes(spec, lo - guard, hi + guard);
    for &n in &nodes {
        if n - guard > start {
            segments.push((start, (n - guard).min(hi)));
        }
        start = start.max(n + guard);
    }
    if hi > start {
        segments.push((start, hi));
    }
    if segments.is_empty() || count < 2 * segments.len() {
        return Err(Error::InvalidGrid(format!(
            "{count} points cannot cover {} node-free segments of {lo}:{hi}",
            segments.len()
        )));
    }
    let total: f64 = segments.iter().map(|s| s.1 - s.0).sum();
    let mut counts: Vec<usize> = segments
        .iter()
        .map(|s| ((count as f64 * (s.1 - s.0) / total).round() as usize).max(2))
        .collect();
    // absorb rounding in the longest segment
    let assigned: usize = counts.iter().sum();
    let longest = (0..segments.len())
        .max_by(|&i, &j| {
            (segments[i].1 - segments[i].0).total_cmp(&(segments[j].1 - segments[j].0))
        })
        .unwrap_or(0);
    counts[longest] = (counts[longest] + count).saturating_sub(assigned).max(2);
    let mut points = Vec::with_capacity(count);
    for (&(a, b), &m) in segments.iter().zip(&counts) {
        for j in 0..m {
            points.push(a + (b - a) * j as f64 / (m - 1) as f64);
        }
    }
    Ok(points)
}

/// `|Ψ(x_r)|²`, unnormalized.
pub fn born_direct(spec: &StateSpec, x_r: f64) -> f64 {
    spec.eval(Complex64::new(x_r, 0.0)).psi.norm_sqr()
}

/// Integrates `−(2m/ħ) ẋ_i(x_r, 0)` along `points` and exponentiates, one
/// node-free run of points at a time. Each run's constant is fixed by
/// matching `|Ψ|²` at one point: `anchor` in its own run, the middle grid
/// point elsewhere. The result is normalized by the trapezoid rule.
pub fn born_from_velocity(
    spec: &StateSpec,
    points: &[f64],
    anchor: f64,
    node_guard: f64,
) -> Result<RealLineGrid> {
    check_increasing(points)?;
    if !points.contains(&anchor) {
        return Err(Error::InvalidGrid(format!(
            "anchor {anchor} is not a grid point"
        )));
    }
    for &x in points {
        let d = spec.node_distance(Complex64::new(x, 0.0));
        if d < node_guard {
            return Err(Error::NodeOnGrid { x, distance: d });
        }
    }
    let u = spec.units();
    let factor = 2.0 * u.mass / u.hbar;
    let xdot_i = |x: f64| raw_velocity(spec, Complex64::new(x, 0.0)).im;
    let nodes = real_nodes(spec, points[0], points[points.len() - 1]);

    let mut log_p = vec![0.0; points.len()];
    let mut run_start = 0;
    while run_start < points.len() {
        // extend the run until the next interval contains a node
        let mut run_end = run_start;
        let mut cumulative = vec![0.0];
        while run_end + 1 < points.len() {
            let (a, b) = (points[run_end], points[run_end + 1]);
            if nodes.iter().any(|&n| n > a && n < b) {
                break;
            }
            let last = *cumulative.last().unwrap();
            cumulative.push(last + adaptive_simpson(xdot_i, a, b, SIMPSON_TOL));
            run_end += 1;
        }
        let run = run_start..=run_end;
        let reference = if points[run.clone()].contains(&anchor) {
            points[run.clone()]
                .iter()
                .position(|&p| p == anchor)
                .unwrap()
        } else {
            (run_end - run_start) / 2
        };
        let ln_ref = born_direct(spec, points[run_start + reference]).ln();
        for (j, i) in run.enumerate() {
            log_p[i] = ln_ref - factor * (cumulative[j] - cumulative[reference]);
        }
        run_start = run_end + 1;
    }
    let grid = RealLineGrid {
        points: points.to_vec(),
        values: log_p.into_iter().map(f64::exp).collect(),
        normalized: false,
    };
    Ok(grid.normalize())
}

/// Everything an observable may depend on at one real-line point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseSample {
    pub x: f64,
    pub xdot: Complex64,
    /// `dẋ/dx`
    pub dxdot: Complex64,
    pub potential: f64,
}

/// `⟨O⟩ = ∫ O(x, ẋ) P dx` by the trapezoid rule on a normalized grid.
pub fn expectation(
    spec: &StateSpec,
    observable: impl Fn(&PhaseSample) -> Complex64,
    grid: &RealLineGrid,
) -> Result<Complex64> {
    if !grid.normalized {
        return Err(Error::InvalidGrid(
            "expectation needs a normalized grid".into(),
        ));
    }
    let mut values = Vec::with_capacity(grid.points.len());
    for &x in &grid.points {
        let z = Complex64::new(x, 0.0);
        let d = spec.node_distance(z);
        if d < DEFAULT_NODE_GUARD.min(1e-8) {
            return Err(Error::NodeOnGrid { x, distance: d });
        }
        values.push(observable(&PhaseSample {
            x,
            xdot: raw_velocity(spec, z),
            dxdot: raw_velocity_derivative(spec, z),
            potential: spec.potential(z).re,
        }));
    }
    let re: Vec<f64> = values
        .iter()
        .zip(&grid.values)
        .map(|(o, p)| o.re * p)
        .collect();
    let im: Vec<f64> = values
        .iter()
        .zip(&grid.values)
        .map(|(o, p)| o.im * p)
        .collect();
    Ok(Complex64::new(
        trapezoid(&grid.points, &re),
        trapezoid(&grid.points, &im),
    ))
}
