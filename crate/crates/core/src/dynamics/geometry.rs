//! Curve comparison in the complex plane: cubic-Hermite interpolation of
//! sampled curves and a symmetric Hausdorff distance.

use num_complex::Complex64;

use super::{PathCurve, Trajectory};

/// A curve known at increasing parameter values together with its tangent
/// `dx/dparam` there.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledCurve {
    params: Vec<f64>,
    points: Vec<Complex64>,
    tangents: Vec<Complex64>,
}

impl SampledCurve {
    pub fn new(params: Vec<f64>, points: Vec<Complex64>, tangents: Vec<Complex64>) -> Self {
        assert!(
            params.len() == points.len() && points.len() == tangents.len() && !params.is_empty(),
            "curve samples must be non-empty and of equal length"
        );
        Self {
            params,
            points,
            tangents,
        }
    }

    pub fn from_trajectory(tr: &Trajectory) -> Self {
        Self::new(
            tr.samples.iter().map(|s| s.t).collect(),
            tr.samples.iter().map(|s| s.x).collect(),
            tr.samples.iter().map(|s| s.xdot).collect(),
        )
    }

    pub fn from_path(p: &PathCurve) -> Self {
        Self::new(
            p.samples.iter().map(|s| s.s).collect(),
            p.samples.iter().map(|s| s.x).collect(),
            p.samples.iter().map(|s| s.direction).collect(),
        )
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Complex64] {
        &self.points
    }

    /// Hermite interpolant on segment `i` at local coordinate `u ∈ [0, 1]`.
    pub fn segment_point(&self, i: usize, u: f64) -> Complex64 {
        let h = self.params[i + 1] - self.params[i];
        let (p0, p1) = (self.points[i], self.points[i + 1]);
        let (m0, m1) = (self.tangents[i] * h, self.tangents[i + 1] * h);
        let u2 = u * u;
        let u3 = u2 * u;
        p0 * (2.0 * u3 - 3.0 * u2 + 1.0)
            + m0 * (u3 - 2.0 * u2 + u)
            + p1 * (-2.0 * u3 + 3.0 * u2)
            + m1 * (u3 - u2)
    }

    /// Position at parameter `s` (clamped to the sampled range).
    pub fn at(&self, s: f64) -> Complex64 {
        if self.len() == 1 || s <= self.params[0] {
            return self.points[0];
        }
        let last = self.len() - 1;
        if s >= self.params[last] {
            return self.points[last];
        }
        let i = self.params.partition_point(|&p| p <= s) - 1;
        let u = (s - self.params[i]) / (self.params[i + 1] - self.params[i]);
        self.segment_point(i, u)
    }

    fn segment_distance(&self, i: usize, p: Complex64) -> f64 {
        let d = |u: f64| (self.segment_point(i, u) - p).norm_sqr();
        // coarse scan, then golden-section refinement around the best node
        const COARSE: usize = 8;
        let mut best = 0;
        let mut best_d = d(0.0);
        for k in 1..=COARSE {
            let dk = d(k as f64 / COARSE as f64);
            if dk < best_d {
                best = k;
                best_d = dk;
            }
        }
        let mut lo = (best.saturating_sub(1)) as f64 / COARSE as f64;
        let mut hi = ((best + 1).min(COARSE)) as f64 / COARSE as f64;
        let g = 0.5 * (5f64.sqrt() - 1.0);
        let mut a = hi - g * (hi - lo);
        let mut b = lo + g * (hi - lo);
        let (mut fa, mut fb) = (d(a), d(b));
        for _ in 0..80 {
            if fa < fb {
                hi = b;
                b = a;
                fb = fa;
                a = hi - g * (hi - lo);
                fa = d(a);
            } else {
                lo = a;
                a = b;
                fa = fb;
                b = lo + g * (hi - lo);
                fb = d(b);
            }
        }
        best_d.min(fa).min(fb).sqrt()
    }

    /// Distance from `p` to the interpolated curve.
    pub fn distance_to(&self, p: Complex64) -> f64 {
        if self.len() == 1 {
            return (self.points[0] - p).norm();
        }
        // segments adjacent to the few nearest vertices
        let mut order: Vec<usize> = (0..self.len()).collect();
        order.sort_by(|&i, &j| {
            (self.points[i] - p)
                .norm_sqr()
                .total_cmp(&(self.points[j] - p).norm_sqr())
        });
        let mut best = f64::INFINITY;
        for &v in order.iter().take(4) {
            for seg in [v.checked_sub(1), Some(v)].into_iter().flatten() {
                if seg + 1 < self.len() {
                    best = best.min(self.segment_distance(seg, p));
                }
            }
        }
        best
    }

    fn dense_points(&self, subdivisions: usize) -> Vec<Complex64> {
        let mut out = Vec::with_capacity(self.len() * subdivisions.max(1));
        for i in 0..self.len().saturating_sub(1) {
            for k in 0..subdivisions.max(1) {
                out.push(self.segment_point(i, k as f64 / subdivisions.max(1) as f64));
            }
        }
        out.push(self.points[self.len() - 1]);
        out
    }
}

/// Symmetric Hausdorff distance between two interpolated curves; each curve
/// is probed at its samples and `subdivisions − 1` interior points per segment.
pub fn hausdorff_distance(a: &SampledCurve, b: &SampledCurve, subdivisions: usize) -> f64 {
    let directed = |p: &SampledCurve, q: &SampledCurve| {
        p.dense_points(subdivisions)
            .into_iter()
            .map(|x| q.distance_to(x))
            .fold(0.0, f64::max)
    };
    directed(a, b).max(directed(b, a))
}
