//! Monic Hermite polynomials `h_n(ξ) = H_n(ξ) / 2^n` in complex arithmetic,
//! and the real root sets the oscillator states need.

use num_complex::Complex64;

/// `h_n`, `h_n'` and `h_n''` at `xi` by the three-term recurrence
/// `h_{k+1} = ξ h_k − (k/2) h_{k−1}` and `h_k' = k h_{k−1}`.
pub fn monic_with_derivatives(n: u32, xi: Complex64) -> [Complex64; 3] {
    let n = n as usize;
    // values h_0..=h_n
    let mut prev = Complex64::new(0.0, 0.0);
    let mut cur = Complex64::new(1.0, 0.0);
    let mut hist = [Complex64::new(0.0, 0.0); 3]; // h_{n-2}, h_{n-1}, h_n
    hist[2] = cur;
    for k in 0..n {
        let next = xi * cur - prev * (k as f64 / 2.0);
        prev = cur;
        cur = next;
        hist[0] = hist[1];
        hist[1] = hist[2];
        hist[2] = cur;
    }
    let nf = n as f64;
    let h = hist[2];
    let dh = if n >= 1 {
        hist[1] * nf
    } else {
        Complex64::new(0.0, 0.0)
    };
    let d2h = if n >= 2 {
        hist[0] * (nf * (nf - 1.0))
    } else {
        Complex64::new(0.0, 0.0)
    };
    [h, dh, d2h]
}

fn monic_real(n: u32, xi: f64) -> [f64; 3] {
    let [h, dh, d2h] = monic_with_derivatives(n, Complex64::new(xi, 0.0));
    [h.re, dh.re, d2h.re]
}

/// All real roots of `f` in `[-bound, bound]`, assuming they are simple and
/// separated by more than `bound / 2000`.
fn real_roots(bound: f64, f: impl Fn(f64) -> f64) -> Vec<f64> {
    const SAMPLES: usize = 4000;
    let step = 2.0 * bound / SAMPLES as f64;
    let mut roots = Vec::new();
    let mut a = -bound;
    let mut fa = f(a);
    for i in 1..=SAMPLES {
        let b = -bound + step * i as f64;
        let fb = f(b);
        if fa == 0.0 {
            roots.push(a);
        } else if fa * fb < 0.0 {
            let (mut lo, mut hi, mut flo) = (a, b, fa);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if mid <= lo || mid >= hi {
                    break;
                }
                let fm = f(mid);
                if fm == 0.0 {
                    lo = mid;
                    hi = mid;
                    break;
                }
                if (fm < 0.0) == (flo < 0.0) {
                    lo = mid;
                    flo = fm;
                } else {
                    hi = mid;
                }
            }
            roots.push(0.5 * (lo + hi));
        }
        a = b;
        fa = fb;
    }
    roots
}

/// Real zeros of `h_n`, ascending.
pub fn monic_roots(n: u32) -> Vec<f64> {
    if n == 0 {
        return Vec::new();
    }
    let bound = (2.0 * n as f64 + 1.0).sqrt() + 1.0;
    let mut roots = real_roots(bound, |x| monic_real(n, x)[0]);
    // odd n has an exact zero at the origin
    if n % 2 == 1 {
        if let Some(r) = roots.iter_mut().min_by(|a, b| a.abs().total_cmp(&b.abs())) {
            *r = 0.0;
        }
    }
    roots
}

/// Zeros of `q(ξ) = h_n'(ξ) − ξ h_n(ξ)`, i.e. the stationary points of the
/// oscillator velocity field, together with the residues `h_n(s)/q'(s)`.
pub fn stationary_points_with_residues(n: u32) -> Vec<(f64, f64)> {
    let q = |x: f64| {
        let [h, dh, _] = monic_real(n, x);
        dh - x * h
    };
    let bound = (2.0 * n as f64 + 3.0).sqrt() + 1.0;
    let mut roots = real_roots(bound, q);
    if n.is_multiple_of(2) {
        if let Some(r) = roots.iter_mut().min_by(|a, b| a.abs().total_cmp(&b.abs())) {
            *r = 0.0;
        }
    }
    roots
        .into_iter()
        .map(|s| {
            let [h, dh, d2h] = monic_real(n, s);
            let dq = d2h - h - s * dh;
            (s, h / dq)
        })
        .collect()
}
