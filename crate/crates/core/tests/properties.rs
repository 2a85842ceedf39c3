use std::f64::consts::{FRAC_1_SQRT_2, PI};

use num_complex::Complex64;
use proptest::prelude::*;

use cqtraj::born::{born_direct, node_avoiding_grid, RealLineGrid};
use cqtraj::dynamics::{
    complex_energy, find_real_crossings, integrate_loop, integrate_trajectory, path_constant,
    velocity, velocity_alt, IntegratorSettings, Verdict,
};
use cqtraj::extended::{closed_form_decomposition, closed_form_rho, rho_via_trajectory, Mask};
use cqtraj::states::Window;
use cqtraj::{StateKind, StateSpec};

fn catalog() -> Vec<StateSpec> {
    let mut v: Vec<StateSpec> = (0..=3)
        .map(|n| StateSpec::oscillator(n, 1.0).unwrap())
        .collect();
    v.extend((1..=3).map(|n| StateSpec::well(n, PI).unwrap()));
    v.push(StateSpec::step(1.0, FRAC_1_SQRT_2).unwrap());
    v.push(StateSpec::wave(1.0, 0.0).unwrap());
    v.push(StateSpec::oscillator(2, 2.0).unwrap());
    v.push(StateSpec::well(2, 1.5).unwrap());
    v.push(StateSpec::step(2.0, 0.3).unwrap());
    v
}

/// A catalog state and a point scaled into its natural window.
fn state_and_point() -> impl Strategy<Value = (StateSpec, Complex64)> {
    let n = catalog().len();
    (0..n, -1.0f64..1.0, -1.0f64..1.0).prop_map(|(i, u, v)| {
        let spec = catalog().swap_remove(i);
        let l = spec.length_scale();
        let x = match spec.kind() {
            StateKind::InfiniteSquareWell { width, .. } => {
                Complex64::new(width * (0.5 + 0.5 * u), 1.5 * l * v)
            }
            _ => Complex64::new(3.0 * l * u, 1.5 * l * v),
        };
        (spec, x)
    })
}

fn bound_loop_seed() -> impl Strategy<Value = (StateSpec, Complex64)> {
    state_and_point().prop_filter("closed loop seed", |(spec, x)| {
        spec.is_bound()
            && spec.node_distance(*x) > 0.2 * spec.length_scale()
            && velocity(spec, *x)
                .map(|v| v.norm() > 0.05 * spec.velocity_scale())
                .unwrap_or(false)
            && match spec.kind() {
                StateKind::InfiniteSquareWell { .. } => path_constant(spec, *x).powi(2) < 1.8,
                _ => true,
            }
    })
}

fn rel(a: Complex64, b: Complex64) -> f64 {
    (a - b).norm() / a.norm().max(b.norm()).max(1e-300)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn psi_satisfies_cauchy_riemann((spec, x) in state_and_point()) {
        prop_assume!(spec.node_distance(x) > 0.05 * spec.length_scale());
        let h = 1e-5 * spec.length_scale();
        let dx = (spec.eval(x + h).psi - spec.eval(x - h).psi) / (2.0 * h);
        let dy = (spec.eval(x + Complex64::i() * h).psi - spec.eval(x - Complex64::i() * h).psi) / (2.0 * h);
        let scale = spec.eval(x).dpsi.norm() * spec.length_scale();
        // ∂u/∂x = ∂v/∂y, ∂u/∂y = −∂v/∂x, i.e. ∂Ψ/∂y = iΨ′
        prop_assert!((dy - Complex64::i() * dx).norm() * spec.length_scale() <= 1e-6 * scale.max(spec.eval(x).psi.norm()));
    }

    #[test]
    fn second_derivative_matches_schrodinger((spec, x) in state_and_point()) {
        let s = spec.eval(x);
        let u = spec.units();
        let from_equation = -2.0 * u.mass / (u.hbar * u.hbar) * (s.energy - s.potential) * s.psi;
        let h = 1e-4 * spec.length_scale();
        let fd = (spec.eval(x + h).psi - 2.0 * s.psi + spec.eval(x - h).psi) / (h * h);
        let scale = from_equation.norm().max(s.psi.norm() / spec.length_scale().powi(2));
        prop_assert!((fd - from_equation).norm() <= 1e-5 * scale);
        prop_assert!((s.d2psi - from_equation).norm() <= 1e-10 * scale);
    }

    #[test]
    fn velocity_forms_agree((spec, x) in state_and_point()) {
        prop_assume!(spec.node_distance(x) > 0.1);
        let e = spec.energy();
        prop_assume!((e - spec.potential(x)).norm() > 0.05 * e.abs());
        let v = velocity(&spec, x).unwrap();
        prop_assume!(v.norm() > 1e-3 * spec.velocity_scale());
        prop_assert!(rel(v, velocity_alt(&spec, x).unwrap()) <= 1e-10);
    }

    #[test]
    fn velocity_satisfies_cauchy_riemann((spec, x) in state_and_point()) {
        prop_assume!(spec.node_distance(x) > 0.1 * spec.length_scale());
        let h = 1e-5 * spec.length_scale();
        let v = |z| velocity(&spec, z).unwrap();
        let dx = (v(x + h) - v(x - h)) / (2.0 * h);
        let dy = (v(x + Complex64::i() * h) - v(x - Complex64::i() * h)) / (2.0 * h);
        let scale = spec.velocity_scale() / spec.length_scale() + dx.norm();
        prop_assert!((dx.re - dy.im).abs() <= 1e-6 * scale);
        prop_assert!((dy.re + dx.im).abs() <= 1e-6 * scale);
    }

    #[test]
    fn energy_is_real_and_constant((spec, x) in state_and_point()) {
        prop_assume!(spec.node_distance(x) > 0.05 * spec.length_scale());
        let e = complex_energy(&spec, x).unwrap();
        prop_assert!((e - spec.energy()).norm() <= 1e-9 * spec.energy().abs());
    }

    #[test]
    fn real_axis_velocity_matches_born_log_derivative((spec, x) in state_and_point()) {
        let xr = x.re;
        prop_assume!(spec.node_distance(Complex64::new(xr, 0.0)) > 0.2 * spec.length_scale());
        let u = spec.units();
        let v = velocity(&spec, Complex64::new(xr, 0.0)).unwrap();
        let h = 1e-3 * spec.length_scale();
        let lp = |k: f64| born_direct(&spec, xr + k * h).ln();
        let dlog = (lp(-2.0) - 8.0 * lp(-1.0) + 8.0 * lp(1.0) - lp(2.0)) / (12.0 * h);
        let expected = -u.hbar / (2.0 * u.mass) * dlog;
        prop_assert!((v.im - expected).abs() <= 1e-8 * spec.velocity_scale().max(v.im.abs()));
        if matches!(spec.kind(), StateKind::HarmonicOscillator { .. } | StateKind::InfiniteSquareWell { .. }) {
            prop_assert!(v.re.abs() <= 1e-14 * spec.velocity_scale());
        }
    }

    #[test]
    fn integrand_forms_agree((spec, x) in state_and_point()) {
        prop_assume!(spec.node_distance(x) > 0.1 * spec.length_scale());
        let u = spec.units();
        let v = velocity(&spec, x).unwrap();
        let lhs = 4.0 / u.hbar * (0.5 * u.mass * v * v + spec.potential(x)).im;
        let h = 1e-6 * spec.length_scale();
        let dvr = (velocity(&spec, x + h).unwrap().re - velocity(&spec, x - h).unwrap().re) / (2.0 * h);
        prop_assert!((lhs - 2.0 * dvr).abs() <= 1e-5 * lhs.abs().max(spec.velocity_scale() / spec.length_scale()));
    }

    #[test]
    fn constant_potential_rho_is_inverse_square_speed((spec, x) in state_and_point()) {
        let k = match spec.kind() {
            StateKind::PotentialStep { k, .. } | StateKind::ConstantPotentialWave { k, .. } => k,
            _ => return Ok(()),
        };
        prop_assume!(spec.node_distance(x) > 0.05 / k);
        let (rho, _) = closed_form_rho(&spec, x).unwrap();
        let psi2 = spec.eval(x).psi.norm_sqr();
        let a = path_constant(&spec, x);
        let v = velocity(&spec, x).unwrap();
        let u = spec.units();
        let scale = (u.hbar * k / u.mass).powi(2);
        prop_assert!((rho / psi2 - 1.0).abs() <= 1e-10);
        prop_assert!((rho * v.norm_sqr() / (scale * a * a) - 1.0).abs() <= 1e-10);
    }

    #[test]
    fn rho_is_not_analytic((spec, x) in state_and_point()) {
        prop_assume!(!matches!(spec.kind(), StateKind::HarmonicOscillator { n, .. } if n >= 2));
        prop_assume!(spec.node_distance(x) > 0.1 * spec.length_scale());
        let h = 1e-5 * spec.length_scale();
        let r = |z| closed_form_decomposition(&spec, z).unwrap().rho();
        let gx = (r(x + h) - r(x - h)) / (2.0 * h);
        let gy = (r(x + Complex64::i() * h) - r(x - Complex64::i() * h)) / (2.0 * h);
        // with v = 0 the Cauchy-Riemann residual is |∇ρ|
        let grad = gx.hypot(gy);
        let rho = r(x);
        prop_assume!(grad > 1e-6 * rho / spec.length_scale());
        prop_assert!(grad > 0.0);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn path_constant_is_conserved((spec, x) in bound_loop_seed()) {
        let tr = integrate_loop(&spec, x, &IntegratorSettings::default()).unwrap();
        prop_assert!(tr.max_drift <= 1e-8, "drift {}", tr.max_drift);
        prop_assert!(tr.samples.windows(2).all(|w| w[1].t > w[0].t));
        prop_assert!(tr.is_closed());
    }

    #[test]
    fn crossing_set_is_consistent((spec, x) in bound_loop_seed()) {
        let set = find_real_crossings(&spec, x, &IntegratorSettings::default()).unwrap();
        match set.verdict {
            Verdict::Unreached => prop_assert!(set.crossings.is_empty()),
            Verdict::Defined { f } => {
                prop_assert!(!set.crossings.is_empty());
                for c in &set.candidates {
                    prop_assert!((c - f).abs() <= 1e-6 * f.abs());
                }
            }
            Verdict::Overdetermined => prop_assert!(set.crossings.len() >= 2),
        }
    }

    #[test]
    fn rho_is_carried_with_constant_f((spec, x) in bound_loop_seed()) {
        let supported = match spec.kind() {
            StateKind::HarmonicOscillator { n, .. } => n <= 1,
            _ => true,
        };
        prop_assume!(supported);
        let settings = IntegratorSettings::default();
        let rt = match rho_via_trajectory(&spec, x, &settings) {
            Ok(rt) => rt,
            Err(cqtraj::Error::Verdict { .. }) => return Ok(()),
            Err(e) => return Err(TestCaseError::fail(e.to_string())),
        };
        let f0 = closed_form_decomposition(&spec, rt.samples[0].x).unwrap().f;
        for s in &rt.samples {
            let d = closed_form_decomposition(&spec, s.x).unwrap();
            prop_assert!((d.f - f0).abs() <= 1e-6 * f0.abs());
            let (cf, mask) = closed_form_rho(&spec, s.x).unwrap();
            if mask == Mask::Defined {
                prop_assert!((s.rho - cf).abs() <= 1e-6 * cf, "rho {} vs {}", s.rho, cf);
            }
        }
        let first = rt.samples.first().unwrap().rho;
        let last = rt.samples.last().unwrap().rho;
        prop_assert!((last - first).abs() <= 1e-6 * first);
    }

    #[test]
    fn open_trajectories_keep_time_order((spec, x) in state_and_point()) {
        prop_assume!(spec.node_distance(x) > 0.2 * spec.length_scale());
        let tr = integrate_trajectory(&spec, x, (0.0, 1.0), &IntegratorSettings::default()).unwrap();
        prop_assert!(tr.samples.windows(2).all(|w| w[1].t > w[0].t));
        prop_assert!(tr.max_drift <= 1e-6);
    }
}

#[test]
fn nodes_are_zeros_and_complete() {
    for spec in catalog() {
        let l = spec.length_scale();
        let window = match spec.kind() {
            // edges offset so no zero sits on a cell boundary
            StateKind::InfiniteSquareWell { width, .. } => Window::new(
                (-width - 0.0123, 2.0 * width - 0.0123),
                (-2.0 * l - 0.0071, 2.0 * l - 0.0071),
            ),
            _ => Window::new(
                (-4.0 * l - 0.0123, 4.0 * l - 0.0123),
                (-2.0 * l - 0.0071, 2.0 * l - 0.0071),
            ),
        };
        let nodes = spec.nodes(&window);
        for z in &nodes {
            let s = spec.eval(*z);
            let local = s.dpsi.norm() * l;
            assert!(
                s.psi.norm() <= 1e-12 * local.max(1.0),
                "{spec} {z}: {}",
                s.psi.norm()
            );
        }
        // argument principle over a grid of cells: every zero is reported
        let (nr, ni) = (48, 24);
        let (dr, di) = (
            (window.re.1 - window.re.0) / nr as f64,
            (window.im.1 - window.im.0) / ni as f64,
        );
        let mut counted = 0i64;
        for a in 0..nr {
            for b in 0..ni {
                let z0 = Complex64::new(window.re.0 + a as f64 * dr, window.im.0 + b as f64 * di);
                counted += winding(&spec, z0, dr, di);
            }
        }
        assert_eq!(counted as usize, nodes.len(), "{spec}");
    }
}

/// Zeros of Ψ inside one cell, counted from the phase change around it.
fn winding(spec: &StateSpec, z0: Complex64, dr: f64, di: f64) -> i64 {
    let corners = [
        z0,
        z0 + dr,
        z0 + Complex64::new(dr, di),
        z0 + Complex64::new(0.0, di),
    ];
    let mut total = 0.0;
    let steps = 64;
    let mut prev = spec.eval(corners[0]).psi.arg();
    for e in 0..4 {
        let (a, b) = (corners[e], corners[(e + 1) % 4]);
        for s in 1..=steps {
            let arg = spec.eval(a + (b - a) * (s as f64 / steps as f64)).psi.arg();
            let mut d = arg - prev;
            while d > PI {
                d -= 2.0 * PI;
            }
            while d < -PI {
                d += 2.0 * PI;
            }
            total += d;
            prev = arg;
        }
    }
    (total / (2.0 * PI)).round() as i64
}

#[test]
fn normalized_grids_integrate_to_one() {
    for spec in catalog() {
        let pts = node_avoiding_grid(&spec, spec.real_line_span(), 2001, 1e-3).unwrap();
        let g = RealLineGrid::direct(&spec, &pts).unwrap().normalize();
        assert!((g.trapezoid() - 1.0).abs() <= 1e-9, "{spec}");
    }
}

#[test]
fn boundary_values_match_born_density() {
    for spec in catalog() {
        if matches!(spec.kind(), StateKind::HarmonicOscillator { n, .. } if n >= 2) {
            continue;
        }
        let pts = node_avoiding_grid(&spec, spec.real_line_span(), 401, 1e-2).unwrap();
        let (mut rho, mut born) = (Vec::new(), Vec::new());
        for &x in &pts {
            let (r, mask) = closed_form_rho(&spec, Complex64::new(x, 0.0)).unwrap();
            if mask == Mask::Defined {
                rho.push(r);
                born.push(born_direct(&spec, x));
            }
        }
        assert!(!rho.is_empty(), "{spec}");
        let (sr, sb): (f64, f64) = (rho.iter().sum(), born.iter().sum());
        for (r, b) in rho.iter().zip(&born) {
            assert!(
                (r / sr - b / sb).abs() <= 1e-9 * (b / sb),
                "{spec}: {r} vs {b}"
            );
        }
    }
}

fn velocity_divergence(spec: &StateSpec, x: Complex64) -> f64 {
    let h = 1e-5 * spec.length_scale();
    let v = |z| velocity(spec, z).unwrap();
    (v(x + h).re - v(x - h).re) / (2.0 * h)
        + (v(x + Complex64::i() * h).im - v(x - Complex64::i() * h).im) / (2.0 * h)
}

#[test]
fn bound_state_differentials_are_inexact_except_the_ground_oscillator() {
    for spec in catalog().into_iter().filter(|s| s.is_bound()) {
        let l = spec.length_scale();
        let points: Vec<Complex64> = (0..200)
            .map(|k| {
                Complex64::new(
                    0.37 * l + 0.011 * k as f64 * l,
                    0.21 * l + 0.005 * k as f64 * l,
                )
            })
            .filter(|&x| spec.node_distance(x) > 0.1 * l)
            .collect();
        if matches!(spec.kind(), StateKind::HarmonicOscillator { n: 0, .. }) {
            // ẋ = iα²(ħ/m)x has zero divergence: h = 1 needs no integrating factor
            assert!(points
                .iter()
                .all(|&x| velocity_divergence(&spec, x).abs() < 1e-8));
        } else {
            assert!(
                points
                    .iter()
                    .any(|&x| velocity_divergence(&spec, x).abs() > 1e-3),
                "{spec}"
            );
        }
    }
}
