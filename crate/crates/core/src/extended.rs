//! The conserved extended density `ρ(x_r, x_i) = h·f` off the real axis: the
//! closed-form catalog, the trajectory-integral construction, conservation
//! residuals, and the `Ψ*(x*)Ψ(x)` comparison density.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::dynamics::integrator::position;
use crate::dynamics::{
    find_real_crossings, raw_velocity, trace_loop, Crossing, CrossingSet, IntegratorSettings,
    StepStats, Verdict, DEFAULT_NODE_GUARD,
};
use crate::error::{Error, Result};
use crate::states::{ComplexPoint, StateKind, StateSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Mask {
    Defined,
    Overdetermined,
    Unreached,
    NearNode,
}

impl Mask {
    /// Label used in exported fields.
    pub fn name(&self) -> &'static str {
        match self {
            Mask::Defined => "defined",
            Mask::Overdetermined => "overdet",
            Mask::Unreached => "unreached",
            Mask::NearNode => "nearnode",
        }
    }
}

/// `ρ = h·f` at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RhoDecomposition {
    pub h: f64,
    pub f: f64,
}

impl RhoDecomposition {
    pub fn rho(&self) -> f64 {
        self.h * self.f
    }
}

fn unsupported(spec: &StateSpec) -> Error {
    Error::UnsupportedState(format!("{spec}: no catalogued h for oscillator n >= 2"))
}

fn well_wavenumber(n: u32, width: f64) -> f64 {
    n as f64 * std::f64::consts::PI / width
}

/// The catalogued solution `h` of the conservation equation along paths.
pub fn h_solution(spec: &StateSpec, x: ComplexPoint) -> Result<f64> {
    match spec.kind() {
        StateKind::HarmonicOscillator { n: 0, .. } => Ok(1.0),
        StateKind::HarmonicOscillator { n: 1, .. } => Ok(x.norm_sqr()),
        StateKind::HarmonicOscillator { .. } => Err(unsupported(spec)),
        StateKind::InfiniteSquareWell { n, width } => {
            let kn = well_wavenumber(n, width);
            Ok((2.0 * kn * x.im).cosh() - (2.0 * kn * x.re).cos())
        }
        StateKind::PotentialStep { .. } | StateKind::ConstantPotentialWave { .. } => {
            Ok(spec.eval(x).psi.norm_sqr())
        }
    }
}

/// The boundary value `f = P(x_r0)/h(x_r0, 0)` of a path, or its verdict.
pub fn boundary_f(_spec: &StateSpec, crossings: &CrossingSet) -> Verdict {
    crossings.verdict
}

/// Which paths reach the real axis with a consistent boundary value.
fn closed_form_mask(spec: &StateSpec, x: ComplexPoint, guard: f64) -> Mask {
    let near = spec.node_distance(x) < guard;
    let mask = match spec.kind() {
        StateKind::HarmonicOscillator { n: 1, alpha, .. } => {
            let xi = alpha * x;
            // takes precedence over the node guard
            if (xi * xi - 1.0).norm() < 1.0 {
                return Mask::Overdetermined;
            }
            Mask::Defined
        }
        StateKind::HarmonicOscillator { .. } => Mask::Defined,
        StateKind::InfiniteSquareWell { n, width } => {
            let kn = well_wavenumber(n, width);
            if (2.0 * kn * x.im).cosh() + (2.0 * kn * x.re).cos() > 2.0 {
                Mask::Unreached
            } else {
                Mask::Defined
            }
        }
        StateKind::PotentialStep { k, r } => {
            let a2 = (-2.0 * k * x.im).exp() + r * r * (2.0 * k * x.im).exp()
                - 2.0 * r * (2.0 * k * x.re).cos();
            // beyond the separatrix the branch above the node line is a
            // separate curve that stays off the axis
            let above = r > 0.0 && x.im > (1.0 / r).ln() / (2.0 * k);
            if a2 < (1.0 - r).powi(2) || a2 > (1.0 + r).powi(2) || (a2 > 4.0 * r && above) {
                Mask::Unreached
            } else {
                Mask::Defined
            }
        }
        StateKind::ConstantPotentialWave { .. } => {
            if x.im.abs() > 1e-12 {
                Mask::Unreached
            } else {
                Mask::Defined
            }
        }
    };
    if mask == Mask::Defined && near {
        Mask::NearNode
    } else {
        mask
    }
}

/// `h·f` for the catalogued states, with `f` fixed so that `ρ(x_r, 0)` equals
/// the unnormalized `|Ψ(x_r)|²` wherever paths are Defined.
pub fn closed_form_decomposition(spec: &StateSpec, x: ComplexPoint) -> Result<RhoDecomposition> {
    let h = h_solution(spec, x)?;
    let f = match spec.kind() {
        StateKind::HarmonicOscillator { n: 0, alpha, .. } => (-alpha * alpha * x.norm_sqr()).exp(),
        StateKind::HarmonicOscillator { alpha, .. } => {
            let xi = alpha * x;
            4.0 * alpha * alpha * (-1.0 - (xi * xi - 1.0).norm()).exp()
        }
        StateKind::InfiniteSquareWell { width, .. } => 1.0 / width,
        StateKind::PotentialStep { .. } | StateKind::ConstantPotentialWave { .. } => 1.0,
    };
    Ok(RhoDecomposition { h, f })
}

/// Closed-form `ρ(x)` and its mask, with the default node guard.
pub fn closed_form_rho(spec: &StateSpec, x: ComplexPoint) -> Result<(f64, Mask)> {
    closed_form_rho_with_guard(spec, x, DEFAULT_NODE_GUARD)
}

pub fn closed_form_rho_with_guard(
    spec: &StateSpec,
    x: ComplexPoint,
    guard: f64,
) -> Result<(f64, Mask)> {
    let d = closed_form_decomposition(spec, x)?;
    Ok((d.rho(), closed_form_mask(spec, x, guard)))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RhoSample {
    pub t: f64,
    pub x: ComplexPoint,
    pub rho: f64,
}

/// ρ carried along a trajectory from its real-axis crossing.
#[derive(Debug, Clone, PartialEq)]
pub struct RhoTrajectory {
    pub crossing: Crossing,
    pub path_constant: f64,
    pub samples: Vec<RhoSample>,
    /// loop period, `None` for open curves
    pub period: Option<f64>,
    pub stats: StepStats,
}

fn require_defined(x0: ComplexPoint, set: &CrossingSet) -> Result<()> {
    match set.verdict {
        Verdict::Defined { .. } => Ok(()),
        v => Err(Error::Verdict {
            x0,
            verdict: v.name(),
        }),
    }
}

/// Integrates `d ln ρ/dt = −(4/ħ) Im(½mẋ² + V)` together with the trajectory,
/// starting from the first real-axis crossing of the path through `seed`
/// with `ρ = P(x_r0)`, for one loop (or to the horizon for open curves).
pub fn rho_via_trajectory(
    spec: &StateSpec,
    seed: ComplexPoint,
    settings: &IntegratorSettings,
) -> Result<RhoTrajectory> {
    let set = find_real_crossings(spec, seed, settings)?;
    require_defined(seed, &set)?;
    let crossing = set.crossings[0];
    let u = spec.units();
    let sys = |_t: f64, y: &[f64; 3]| {
        let x = position(y);
        let v = raw_velocity(spec, x);
        let e = 0.5 * u.mass * v * v + spec.potential(x);
        [v.re, v.im, -4.0 / u.hbar * e.im]
    };
    let start = [crossing.x_r0, 0.0, crossing.p.ln()];
    let trace = trace_loop(spec, &sys, start, settings, false)?;
    Ok(RhoTrajectory {
        crossing,
        path_constant: set.path_constant,
        samples: trace
            .points
            .iter()
            .map(|&(t, y)| RhoSample {
                t,
                x: position(&y),
                rho: y[2].exp(),
            })
            .collect(),
        period: trace.period,
        stats: trace.stats,
    })
}

/// ρ at `x` by transporting the boundary value from the path's first
/// real-axis crossing, with the verdict of that path as mask.
pub fn rho_at_point(
    spec: &StateSpec,
    x: ComplexPoint,
    settings: &IntegratorSettings,
) -> Result<(f64, Mask)> {
    if spec.node_distance(x) < settings.node_guard {
        return Ok((0.0, Mask::NearNode));
    }
    let set = find_real_crossings(spec, x, settings)?;
    let Some(first) = set.crossings.first() else {
        return Ok((0.0, Mask::Unreached));
    };
    let rho = first.p * (-first.ln_transport).exp();
    let mask = match set.verdict {
        Verdict::Defined { .. } => Mask::Defined,
        Verdict::Overdetermined => Mask::Overdetermined,
        Verdict::Unreached => Mask::Unreached,
    };
    Ok((rho, mask))
}

/// Centered-difference divergence of the flux `(ρẋ_r, ρẋ_i)` at `x`, relative
/// to `ρ|ẋ|/ℓ` with ℓ the state's length scale.
pub fn divergence_residual(
    spec: &StateSpec,
    rho_at: impl Fn(ComplexPoint) -> (f64, Mask),
    x: ComplexPoint,
    h_step: f64,
) -> Result<f64> {
    let stencil = [
        x,
        x + h_step,
        x - h_step,
        x + Complex64::new(0.0, h_step),
        x - Complex64::new(0.0, h_step),
    ];
    let mut flux = [Complex64::new(0.0, 0.0); 5];
    let mut rho0 = 0.0;
    for (k, &z) in stencil.iter().enumerate() {
        let (rho, mask) = rho_at(z);
        if mask != Mask::Defined {
            return Err(Error::MaskViolation {
                x: z,
                mask: mask.name(),
            });
        }
        if k == 0 {
            rho0 = rho;
        }
        flux[k] = rho * raw_velocity(spec, z);
    }
    let div = (flux[1].re - flux[2].re + flux[3].im - flux[4].im) / (2.0 * h_step);
    let scale = rho0 * raw_velocity(spec, x).norm() / spec.length_scale();
    Ok(div.abs() / scale)
}

/// `Ψ*(x*)Ψ(x)` and the divergence `j′` of the flux `−(iħ/m)Ψ*(x*)Ψ′(x)`,
/// with `Ψ″` from the Schrödinger equation.
pub fn poirier_density(spec: &StateSpec, x: ComplexPoint) -> (Complex64, Complex64) {
    let u = spec.units();
    let s = spec.eval(x);
    let b = spec.eval(x.conj());
    let (psib, dpsib) = (b.psi.conj(), b.dpsi.conj());
    let d2psi = 2.0 * u.mass / (u.hbar * u.hbar) * (s.potential - s.energy) * s.psi;
    let rho_c = psib * s.psi;
    let flux_div = -Complex64::i() * u.hbar / u.mass * (dpsib * s.dpsi + psib * d2psi);
    (rho_c, flux_div)
}

/// Rectangular lattice, row-major with `x_i` outer.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Lattice {
    pub re: (f64, f64),
    pub im: (f64, f64),
    pub nr: usize,
    pub ni: usize,
}

impl Lattice {
    pub fn new(re: (f64, f64), nr: usize, im: (f64, f64), ni: usize) -> Result<Self> {
        let mut bad = Vec::new();
        if nr < 2 || ni < 2 {
            bad.push(format!("grid counts must be >= 2 (got {nr}x{ni})"));
        }
        for (name, (a, b)) in [("x_r", re), ("x_i", im)] {
            if !(a.is_finite() && b.is_finite() && b > a) {
                bad.push(format!("{name} range {a}:{b} is degenerate"));
            }
        }
        if !bad.is_empty() {
            return Err(Error::InvalidGrid(bad.join("; ")));
        }
        Ok(Self { re, im, nr, ni })
    }

    pub fn spacing(&self) -> (f64, f64) {
        (
            (self.re.1 - self.re.0) / (self.nr - 1) as f64,
            (self.im.1 - self.im.0) / (self.ni - 1) as f64,
        )
    }

    pub fn point(&self, row: usize, col: usize) -> ComplexPoint {
        let (dr, di) = self.spacing();
        Complex64::new(self.re.0 + dr * col as f64, self.im.0 + di * row as f64)
    }

    pub fn len(&self) -> usize {
        self.nr * self.ni
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn points(&self) -> impl Iterator<Item = ComplexPoint> + '_ {
        (0..self.ni).flat_map(move |r| (0..self.nr).map(move |c| self.point(r, c)))
    }
}

/// ρ on a lattice: `raw` holds the computed value everywhere, `rho` the same
/// with Unreached points set to zero.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbabilityField {
    pub lattice: Lattice,
    pub rho: Vec<f64>,
    pub raw: Vec<f64>,
    pub mask: Vec<Mask>,
}

impl ProbabilityField {
    fn from_rows(lattice: Lattice, rows: Vec<Vec<(f64, Mask)>>) -> Self {
        let cells: Vec<(f64, Mask)> = rows.into_iter().flatten().collect();
        let raw: Vec<f64> = cells.iter().map(|c| c.0).collect();
        let mask: Vec<Mask> = cells.iter().map(|c| c.1).collect();
        let rho = cells
            .iter()
            .map(|&(v, m)| if m == Mask::Unreached { 0.0 } else { v })
            .collect();
        Self {
            lattice,
            rho,
            raw,
            mask,
        }
    }

    pub fn count(&self, mask: Mask) -> usize {
        self.mask.iter().filter(|&&m| m == mask).count()
    }
}

fn build_field(
    lattice: Lattice,
    cell: impl Fn(ComplexPoint) -> Result<(f64, Mask)> + Sync,
) -> Result<ProbabilityField> {
    let rows = (0..lattice.ni)
        .into_par_iter()
        .map(|r| {
            (0..lattice.nr)
                .map(|c| cell(lattice.point(r, c)))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ProbabilityField::from_rows(lattice, rows))
}

/// The closed-form field, evaluated row by row in parallel.
pub fn closed_form_field(
    spec: &StateSpec,
    lattice: Lattice,
    guard: f64,
) -> Result<ProbabilityField> {
    closed_form_decomposition(spec, Complex64::new(0.0, 0.0))?;
    build_field(lattice, |x| closed_form_rho_with_guard(spec, x, guard))
}

/// The field from boundary-value transport along each lattice point's path.
pub fn trajectory_field(
    spec: &StateSpec,
    lattice: Lattice,
    settings: &IntegratorSettings,
) -> Result<ProbabilityField> {
    build_field(lattice, |x| match rho_at_point(spec, x, settings) {
        Err(Error::StationaryPoint { .. }) => Ok((0.0, Mask::Unreached)),
        other => other,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::born::born_direct;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn catalog_h() {
        let ho0 = StateSpec::oscillator(0, 1.0).unwrap();
        let ho1 = StateSpec::oscillator(1, 1.0).unwrap();
        let well = StateSpec::well(1, PI).unwrap();
        assert_eq!(h_solution(&ho0, c(0.3, -2.0)).unwrap(), 1.0);
        assert_relative_eq!(h_solution(&ho1, c(1.0, 1.0)).unwrap(), 2.0);
        assert_relative_eq!(
            h_solution(&well, c(PI / 2.0, 0.0)).unwrap(),
            2.0,
            epsilon = 1e-15
        );
        let ho2 = StateSpec::oscillator(2, 1.0).unwrap();
        assert!(matches!(
            h_solution(&ho2, c(0.1, 0.1)),
            Err(Error::UnsupportedState(_))
        ));
        assert!(matches!(
            closed_form_rho(&ho2, c(0.1, 0.1)),
            Err(Error::UnsupportedState(_))
        ));
    }

    #[test]
    fn boundary_values() {
        let ho1 = StateSpec::oscillator(1, 1.0).unwrap();
        let s = IntegratorSettings::default();
        let a2 = find_real_crossings(&ho1, c(3f64.sqrt(), 0.0), &s).unwrap();
        assert_relative_eq!(
            boundary_f(&ho1, &a2).f().unwrap(),
            4.0 * (-3f64).exp(),
            max_relative = 1e-12
        );
        let a05 = find_real_crossings(&ho1, c(1.5f64.sqrt(), 0.0), &s).unwrap();
        assert_eq!(boundary_f(&ho1, &a05), Verdict::Overdetermined);
    }

    #[test]
    fn closed_form_examples() {
        let ho1 = StateSpec::oscillator(1, 1.0).unwrap();
        let (r3, m3) = closed_form_rho(&ho1, c(3f64.sqrt(), 0.0)).unwrap();
        let (r2, _) = closed_form_rho(&ho1, c(2f64.sqrt(), 0.0)).unwrap();
        assert_eq!(m3, Mask::Defined);
        assert_relative_eq!(r3 / r2, 1.5 * (-1f64).exp(), max_relative = 1e-13);
        assert!((r3 / r2 - 0.551819).abs() < 1e-6);
        assert_relative_eq!(r3, 12.0 * (-3f64).exp(), max_relative = 1e-14);
        assert_eq!(
            closed_form_rho(&ho1, c(0.5, 0.0)).unwrap().1,
            Mask::Overdetermined
        );
        // the node lies on the |x² − 1| = 1 boundary; just inside it the
        // subnest verdict wins over the node guard
        assert_eq!(
            closed_form_rho(&ho1, c(0.0, 0.0)).unwrap(),
            (0.0, Mask::NearNode)
        );
        assert_eq!(
            closed_form_rho(&ho1, c(1e-4, 0.0)).unwrap().1,
            Mask::Overdetermined
        );

        let ho0 = StateSpec::oscillator(0, 1.0).unwrap();
        let (a, _) = closed_form_rho(&ho0, c(1.0, 0.0)).unwrap();
        let (b, _) = closed_form_rho(&ho0, c(0.0, 0.0)).unwrap();
        assert_relative_eq!(a / b, (-1f64).exp(), max_relative = 1e-15);

        let well = StateSpec::well(1, PI).unwrap();
        assert_eq!(
            closed_form_rho(&well, c(PI / 4.0, 0.5 * 3f64.acosh()))
                .unwrap()
                .1,
            Mask::Unreached
        );
        assert_eq!(
            closed_form_rho(&well, c(1.0, 0.3)).unwrap().1,
            Mask::Defined
        );
        assert_eq!(
            closed_form_rho(&well, c(1e-4, 0.0)).unwrap().1,
            Mask::NearNode
        );
    }

    #[test]
    fn step_reach_matches_crossings() {
        let r = 0.5f64.sqrt();
        let step = StateSpec::step(1.0, r).unwrap();
        let s = IntegratorSettings::default();
        let node_line = (1.0 / r).ln() / 2.0;
        for &x in &[
            c(0.3, 0.2),
            c(1.0, -0.4),
            c(0.0, node_line + 0.05),
            c(0.2, node_line + 0.8),
            c(1.4, 0.9),
            c(2.0, -1.5),
        ] {
            let (_, mask) = closed_form_rho(&step, x).unwrap();
            let set = find_real_crossings(&step, x, &s).unwrap();
            let reached = !set.crossings.is_empty();
            assert_eq!(
                mask == Mask::Unreached,
                !reached,
                "{x}: {mask:?} vs {:?}",
                set.verdict
            );
            if reached {
                assert!(matches!(set.verdict, Verdict::Defined { .. }));
            }
        }
    }

    #[test]
    fn boundary_agreement_on_axis() {
        for spec in [
            StateSpec::oscillator(0, 1.0).unwrap(),
            StateSpec::oscillator(1, 1.0).unwrap(),
            StateSpec::well(2, PI).unwrap(),
            StateSpec::step(1.0, 0.5f64.sqrt()).unwrap(),
            StateSpec::wave(2.0, 1.0).unwrap(),
        ] {
            for k in 0..50 {
                let x = -2.5 + 0.1 * k as f64 + 0.013;
                let (rho, mask) = closed_form_rho(&spec, c(x, 0.0)).unwrap();
                if mask == Mask::Defined {
                    assert_relative_eq!(rho, born_direct(&spec, x), max_relative = 1e-12);
                }
            }
        }
    }

    #[test]
    fn constant_potential_identity() {
        let step = StateSpec::step(1.3, 0.4).unwrap();
        let wave = StateSpec::wave(0.7, 2.0).unwrap();
        for spec in [step, wave] {
            for &x in &[c(0.2, 0.1), c(-1.0, 0.4), c(2.2, -0.3)] {
                let (rho, _) = closed_form_rho(&spec, x).unwrap();
                let v = raw_velocity(&spec, x);
                let a = crate::dynamics::path_constant(&spec, x);
                let k = match spec.kind() {
                    StateKind::PotentialStep { k, .. }
                    | StateKind::ConstantPotentialWave { k, .. } => k,
                    _ => unreachable!(),
                };
                assert_relative_eq!(rho, k * k * a * a / v.norm_sqr(), max_relative = 1e-10);
            }
        }
    }

    #[test]
    fn trajectory_rho_ground_state_is_constant() {
        let ho0 = StateSpec::oscillator(0, 1.0).unwrap();
        let rt = rho_via_trajectory(&ho0, c(1.0, 0.0), &Default::default()).unwrap();
        assert_relative_eq!(rt.samples[0].rho, (-1f64).exp(), max_relative = 1e-15);
        for s in &rt.samples {
            assert_relative_eq!(s.rho, (-1f64).exp(), max_relative = 1e-12);
        }
    }

    #[test]
    fn trajectory_rho_matches_closed_form_and_closes() {
        let ho1 = StateSpec::oscillator(1, 1.0).unwrap();
        let rt = rho_via_trajectory(&ho1, c(3f64.sqrt(), 0.0), &Default::default()).unwrap();
        assert!(rt.samples.len() > 20);
        for s in &rt.samples {
            let (cf, _) = closed_form_rho(&ho1, s.x).unwrap();
            assert_relative_eq!(s.rho, cf, max_relative = 1e-7);
            let f = s.rho / h_solution(&ho1, s.x).unwrap();
            assert_relative_eq!(f, 4.0 * (-3f64).exp(), max_relative = 1e-6);
        }
        let last = rt.samples.last().unwrap();
        assert_relative_eq!(last.rho, rt.crossing.p, max_relative = 1e-6);
    }

    #[test]
    fn trajectory_rho_refuses_overdetermined_paths() {
        let ho1 = StateSpec::oscillator(1, 1.0).unwrap();
        assert!(matches!(
            rho_via_trajectory(&ho1, c(1.1, 0.1), &Default::default()),
            Err(Error::Verdict {
                verdict: "overdetermined",
                ..
            })
        ));
    }

    #[test]
    fn transport_reproduces_closed_form() {
        let well = StateSpec::well(1, PI).unwrap();
        let s = IntegratorSettings::default();
        for &x in &[c(1.0, 0.3), c(2.0, -0.2), c(PI / 2.0, 0.6)] {
            let (a, ma) = rho_at_point(&well, x, &s).unwrap();
            let (b, mb) = closed_form_rho(&well, x).unwrap();
            assert_eq!(ma, mb);
            assert_relative_eq!(a, b, max_relative = 1e-7);
        }
        let (v, m) = rho_at_point(&well, c(PI / 4.0, 0.5 * 3f64.acosh()), &s).unwrap();
        assert_eq!((v, m), (0.0, Mask::Unreached));
    }

    #[test]
    fn residuals() {
        let ho0 = StateSpec::oscillator(0, 1.0).unwrap();
        let r = divergence_residual(
            &ho0,
            |z| closed_form_rho(&ho0, z).unwrap(),
            c(0.7, 0.4),
            1e-3,
        )
        .unwrap();
        assert!(r <= 1e-5, "{r}");
        let well = StateSpec::well(1, PI).unwrap();
        let r = divergence_residual(
            &well,
            |z| closed_form_rho(&well, z).unwrap(),
            c(1.0, 0.3),
            1e-3,
        )
        .unwrap();
        assert!(r <= 1e-5, "{r}");
        let ho1 = StateSpec::oscillator(1, 1.0).unwrap();
        let control = |z: ComplexPoint| (ho1.eval(z).psi.norm_sqr(), Mask::Defined);
        let r = divergence_residual(&ho1, control, c(1.3, 0.7), 1e-3).unwrap();
        assert!(r > 1e-2, "{r}");
        assert!(matches!(
            divergence_residual(
                &ho1,
                |z| closed_form_rho(&ho1, z).unwrap(),
                c(0.5, 0.0),
                1e-3
            ),
            Err(Error::MaskViolation { .. })
        ));
    }

    #[test]
    fn rho_is_not_analytic() {
        // with v = 0 the Cauchy-Riemann residual is |∇ρ|
        let h = 1e-5;
        for spec in [
            StateSpec::oscillator(0, 1.0).unwrap(),
            StateSpec::oscillator(1, 1.0).unwrap(),
            StateSpec::well(1, PI).unwrap(),
            StateSpec::step(1.0, 0.5).unwrap(),
        ] {
            let x = c(1.7, 0.2);
            let rho = |z| closed_form_rho(&spec, z).unwrap().0;
            let ux = (rho(x + h) - rho(x - h)) / (2.0 * h);
            let uy = (rho(x + c(0.0, h)) - rho(x - c(0.0, h))) / (2.0 * h);
            assert!(ux.hypot(uy) > 1e-3, "{spec}");
        }
    }

    #[test]
    fn poirier_examples() {
        let ho0 = StateSpec::oscillator(0, 1.0).unwrap();
        let (rc, _) = poirier_density(&ho0, c(0.8, 0.0));
        assert_relative_eq!(rc.re, born_direct(&ho0, 0.8), max_relative = 1e-15);
        assert_eq!(rc.im, 0.0);
        let x = c(0.5, 0.5);
        let (rc, j) = poirier_density(&ho0, x);
        assert!((rc - ho0.eval(x.conj()).psi.conj() * ho0.eval(x).psi).norm() < 1e-15);
        assert!(j.norm() > 1e-3);
        let well = StateSpec::well(1, PI).unwrap();
        assert!(poirier_density(&well, c(1.0, 0.5)).1.norm() > 1e-3);
    }

    #[test]
    fn lattice_and_fields() {
        assert!(Lattice::new((0.0, 1.0), 1, (0.0, 1.0), 5).is_err());
        assert!(Lattice::new((1.0, 1.0), 3, (0.0, 1.0), 5).is_err());
        let lat = Lattice::new((-3.0, 3.0), 21, (-3.0, 3.0), 11).unwrap();
        assert_eq!(lat.points().count(), 231);
        assert_eq!(lat.points().nth(21).unwrap(), c(-3.0, -2.4));
        let ho0 = StateSpec::oscillator(0, 1.0).unwrap();
        let f = closed_form_field(&ho0, lat, 1e-3).unwrap();
        assert_eq!(f.count(Mask::Defined), 231);
        let well = StateSpec::well(1, PI).unwrap();
        let lat = Lattice::new((0.05, 3.0), 6, (-1.0, 1.0), 5).unwrap();
        let f = closed_form_field(&well, lat, 1e-3).unwrap();
        for i in 0..lat.len() {
            if f.mask[i] == Mask::Unreached {
                assert_eq!(f.rho[i], 0.0);
                assert!(f.raw[i] > 0.0);
            } else {
                assert_eq!(f.rho[i], f.raw[i]);
            }
        }
        let g = trajectory_field(&well, lat, &Default::default()).unwrap();
        assert_eq!(g.mask, f.mask);
        for i in 0..lat.len() {
            assert!((g.rho[i] - f.rho[i]).abs() <= 1e-7 * f.rho[i].max(1e-300));
        }
    }
}
