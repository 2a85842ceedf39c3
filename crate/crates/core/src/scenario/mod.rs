//! Configuration, orchestration and deterministic CSV/JSON export.

mod config;

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::born::{born_direct, born_from_velocity, node_avoiding_grid, RealLineGrid};
use crate::dynamics::{
    integrate_loop, integrate_path, integrate_path_loop, integrate_trajectory, path_constant,
    IntegratorSettings, PathCurve, Trajectory,
};
use crate::error::{Error, Result};
use crate::extended::{
    closed_form_field, closed_form_rho_with_guard, poirier_density, rho_via_trajectory,
    trajectory_field, Lattice, ProbabilityField,
};
use crate::states::StateSpec;

pub use config::{
    format_complex, parse_complex, parse_config, parse_raw, GridSpec, RawConfig, ScenarioConfig,
    SpanValue, Task,
};

/// Real-line points used by the born task when no grid is given.
pub const DEFAULT_BORN_POINTS: usize = 2001;
/// Figure lattices are this many points per axis.
pub const FIGURE_POINTS: usize = 201;

/// One output file: its path relative to the configured output (or `None`
/// for the configured path itself) and its full contents.
#[derive(Debug, Clone, PartialEq)]
pub struct Document {
    pub path: Option<PathBuf>,
    pub contents: String,
}

/// Fixed-width scientific form with 17 significant digits.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

#[derive(Serialize)]
struct CanonicalConfig<'a> {
    state: String,
    task: &'a str,
    seeds: Vec<String>,
    t_span: Option<(f64, f64)>,
    arc_length: Option<f64>,
    grid: Option<GridSpec>,
    integrator: &'a IntegratorSettings,
    masked: bool,
}

/// SHA-256 of the canonical form of everything that affects the output.
pub fn config_hash(config: &ScenarioConfig) -> String {
    let canonical = CanonicalConfig {
        state: config.state.to_string(),
        task: config.task.name(),
        seeds: config.seeds.iter().map(|&z| format_complex(z)).collect(),
        t_span: config.t_span,
        arc_length: config.arc_length,
        grid: config.grid,
        integrator: &config.integrator,
        masked: config.masked,
    };
    let text = serde_json::to_string(&canonical).expect("plain data serializes");
    Sha256::digest(text.as_bytes())
        .iter()
        .fold(String::new(), |mut s, b| {
            let _ = write!(s, "{b:02x}");
            s
        })
}

fn header(config: &ScenarioConfig, state: &StateSpec, extra: &[String]) -> String {
    let mut h = String::new();
    let _ = writeln!(
        h,
        "# cqtraj {} task={}",
        env!("CARGO_PKG_VERSION"),
        config.task
    );
    let _ = writeln!(h, "# state={state}");
    let _ = writeln!(h, "# config_sha256={}", config_hash(config));
    let _ = writeln!(
        h,
        "# integrator={}",
        serde_json::to_string(&config.integrator).expect("plain data serializes")
    );
    for line in extra {
        let _ = writeln!(h, "# {line}");
    }
    h
}

fn seed_path(config: &ScenarioConfig, i: usize) -> Option<PathBuf> {
    if config.seeds.len() < 2 {
        return None;
    }
    let base = config
        .output
        .clone()
        .unwrap_or_else(|| PathBuf::from(config.task.name()));
    let stem = base
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let name = match base.extension() {
        Some(ext) => format!("{stem}_{i}.{}", ext.to_string_lossy()),
        None => format!("{stem}_{i}"),
    };
    Some(base.with_file_name(name))
}

pub fn trajectory_csv(tr: &Trajectory) -> String {
    let mut out = String::from("t,x_r,x_i,xdot_r,xdot_i,path_const\n");
    for s in &tr.samples {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            num(s.t),
            num(s.x.re),
            num(s.x.im),
            num(s.xdot.re),
            num(s.xdot.im),
            num(path_constant(&tr.state, s.x))
        );
    }
    out
}

pub fn path_csv(p: &PathCurve) -> String {
    let mut out = String::from("s,x_r,x_i\n");
    for s in &p.samples {
        let _ = writeln!(out, "{},{},{}", num(s.s), num(s.x.re), num(s.x.im));
    }
    out
}

pub fn born_csv(velocity: &RealLineGrid, direct: &RealLineGrid) -> String {
    let mut out = String::from("x_r,P_velocity,P_direct\n");
    for ((x, a), b) in velocity
        .points
        .iter()
        .zip(&velocity.values)
        .zip(&direct.values)
    {
        let _ = writeln!(out, "{},{},{}", num(*x), num(*a), num(*b));
    }
    out
}

/// Field rows `x_r,x_i,rho,mask`; `masked` selects the variant with
/// Unreached points zeroed.
pub fn field_csv(field: &ProbabilityField, masked: bool) -> String {
    let mut out = String::from("x_r,x_i,rho,mask\n");
    let values = if masked { &field.rho } else { &field.raw };
    for ((x, v), m) in field.lattice.points().zip(values).zip(&field.mask) {
        let _ = writeln!(out, "{},{},{},{}", num(x.re), num(x.im), num(*v), m.name());
    }
    out
}

pub fn poirier_csv(spec: &StateSpec, lattice: Lattice) -> String {
    let rows: Vec<String> = (0..lattice.ni)
        .into_par_iter()
        .map(|r| {
            let mut row = String::new();
            for c in 0..lattice.nr {
                let x = lattice.point(r, c);
                let (rho, div) = poirier_density(spec, x);
                let _ = writeln!(
                    row,
                    "{},{},{},{},{},{}",
                    num(x.re),
                    num(x.im),
                    num(rho.re),
                    num(rho.im),
                    num(div.re),
                    num(div.im)
                );
            }
            row
        })
        .collect();
    let mut out = String::from("x_r,x_i,rho_c_re,rho_c_im,flux_div_re,flux_div_im\n");
    rows.into_iter().for_each(|r| out.push_str(&r));
    out
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonRecord {
    pub seed: String,
    pub path_constant: f64,
    pub x_r0: f64,
    pub p: f64,
    /// largest `|ρ_trajectory − ρ_closed| / ρ_closed` along the loop
    pub max_rel_deviation: f64,
    pub samples: usize,
    pub period: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonReport {
    pub state: String,
    pub integrator: IntegratorSettings,
    pub records: Vec<ComparisonRecord>,
    pub global_max_deviation: f64,
}

/// Integrates ρ along the path of every seed and compares it with the
/// closed form at each accepted step.
pub fn compare_methods(
    spec: &StateSpec,
    seeds: &[Complex64],
    settings: &IntegratorSettings,
) -> Result<ComparisonReport> {
    let records = seeds
        .par_iter()
        .map(|&seed| {
            let rt = rho_via_trajectory(spec, seed, settings)
                .map_err(|e| e.context(format!("seed {}", format_complex(seed))))?;
            let mut worst: f64 = 0.0;
            for s in &rt.samples {
                let (cf, _) = closed_form_rho_with_guard(spec, s.x, settings.node_guard)?;
                worst = worst.max((s.rho - cf).abs() / cf);
            }
            Ok(ComparisonRecord {
                seed: format_complex(seed),
                path_constant: rt.path_constant,
                x_r0: rt.crossing.x_r0,
                p: rt.crossing.p,
                max_rel_deviation: worst,
                samples: rt.samples.len(),
                period: rt.period,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let global = records
        .iter()
        .map(|r| r.max_rel_deviation)
        .fold(0.0, f64::max);
    Ok(ComparisonReport {
        state: spec.to_string(),
        integrator: *settings,
        records,
        global_max_deviation: global,
    })
}

pub struct FigureSpec {
    pub name: &'static str,
    pub state: StateSpec,
    pub lattice: Lattice,
    pub label: &'static str,
}

/// The four surfaces: oscillator ground state, first excited state, square
/// well n = 1 and the potential step with r = 1/√2.
pub fn figure_specs() -> Vec<FigureSpec> {
    use std::f64::consts::{FRAC_1_SQRT_2, PI};
    let n = FIGURE_POINTS;
    let lat = |re, im| Lattice::new(re, n, im, n).expect("figure lattices are valid");
    vec![
        FigureSpec {
            name: "fig1",
            state: StateSpec::oscillator(0, 1.0).expect("valid"),
            lattice: lat((-3.0, 3.0), (-3.0, 3.0)),
            label: "oscillator ground state (n=0 formula); also captioned elsewhere as n=1",
        },
        FigureSpec {
            name: "fig2",
            state: StateSpec::oscillator(1, 1.0).expect("valid"),
            lattice: lat((-2.5, 2.5), (-2.5, 2.5)),
            label: "oscillator first excited state (n=1 formula); also captioned elsewhere as n=2",
        },
        FigureSpec {
            name: "fig3",
            state: StateSpec::well(1, PI).expect("valid"),
            lattice: lat((0.0, PI), (-1.0, 1.0)),
            label: "infinite square well n=1, a=pi",
        },
        FigureSpec {
            name: "fig4",
            state: StateSpec::step(1.0, FRAC_1_SQRT_2).expect("valid"),
            lattice: lat((-PI, PI), (-1.5, 1.5)),
            label: "potential step, V=0 side, k=1, r=1/sqrt(2)",
        },
    ]
}

/// Raw and masked closed-form fields for the four figures.
pub fn emit_figure_data(config: &ScenarioConfig) -> Result<Vec<Document>> {
    let mut docs = Vec::new();
    for fig in figure_specs() {
        let field = closed_form_field(&fig.state, fig.lattice, config.integrator.node_guard)
            .map_err(|e| e.context(fig.name))?;
        for (variant, masked) in [("raw", false), ("masked", true)] {
            let head = header(
                config,
                &fig.state,
                &[
                    format!("figure={} variant={variant}", fig.name),
                    format!("label={}", fig.label),
                ],
            );
            docs.push(Document {
                path: Some(PathBuf::from(format!("{}_{variant}.csv", fig.name))),
                contents: head + &field_csv(&field, masked),
            });
        }
    }
    Ok(docs)
}

fn lattice_of(config: &ScenarioConfig) -> Result<Lattice> {
    config
        .grid
        .and_then(|g| g.lattice())
        .unwrap_or_else(|| Err(Error::InvalidGrid("task needs a two-axis grid".into())))
}

/// Produces every output document of a validated scenario, in a fixed order.
pub fn render(config: &ScenarioConfig) -> Result<Vec<Document>> {
    let spec = &config.state;
    let settings = &config.integrator;
    let plain = |extra: &[String], body: String| Document {
        path: None,
        contents: header(config, spec, extra) + &body,
    };
    match config.task {
        Task::Trajectory | Task::Path => config
            .seeds
            .par_iter()
            .enumerate()
            .map(|(i, &seed)| {
                let ctx = |e: Error| e.context(format!("seed {}", format_complex(seed)));
                let body = if config.task == Task::Trajectory {
                    let tr = match config.t_span {
                        Some(span) => integrate_trajectory(spec, seed, span, settings),
                        None => integrate_loop(spec, seed, settings),
                    }
                    .map_err(ctx)?;
                    trajectory_csv(&tr)
                } else {
                    let p = match config.arc_length {
                        Some(l) => integrate_path(spec, seed, l, settings),
                        None => integrate_path_loop(spec, seed, settings),
                    }
                    .map_err(ctx)?;
                    path_csv(&p)
                };
                Ok(Document {
                    path: seed_path(config, i),
                    contents: header(config, spec, &[format!("seed={}", format_complex(seed))])
                        + &body,
                })
            })
            .collect(),
        Task::Born => {
            let (span, count) = match config.grid {
                Some(g) => (g.re, g.nr),
                None => (spec.real_line_span(), DEFAULT_BORN_POINTS),
            };
            let points = node_avoiding_grid(spec, span, count, settings.node_guard)?;
            let anchor = points
                .iter()
                .copied()
                .max_by(|&a, &b| born_direct(spec, a).total_cmp(&born_direct(spec, b)))
                .expect("grids are non-empty");
            let velocity = born_from_velocity(spec, &points, anchor, settings.node_guard)?;
            let direct = RealLineGrid::direct(spec, &points)?.normalize();
            Ok(vec![plain(
                &[format!("anchor={}", num(anchor))],
                born_csv(&velocity, &direct),
            )])
        }
        Task::FieldClosed | Task::FieldTrajectory => {
            let lattice = lattice_of(config)?;
            let field = if config.task == Task::FieldClosed {
                closed_form_field(spec, lattice, settings.node_guard)?
            } else {
                trajectory_field(spec, lattice, settings)?
            };
            let variant = if config.masked { "masked" } else { "raw" };
            Ok(vec![plain(
                &[format!("variant={variant}")],
                field_csv(&field, config.masked),
            )])
        }
        Task::Poirier => Ok(vec![plain(&[], poirier_csv(spec, lattice_of(config)?))]),
        Task::Compare => {
            let report = compare_methods(spec, &config.seeds, settings)?;
            let mut json = serde_json::to_string_pretty(&report).expect("plain data serializes");
            json.push('\n');
            Ok(vec![Document {
                path: None,
                contents: json,
            }])
        }
        Task::Figures => emit_figure_data(config),
    }
}

fn write_document(base: Option<&Path>, task: Task, doc: &Document) -> Result<Option<PathBuf>> {
    let target = match (&doc.path, base) {
        (Some(p), Some(dir)) if task == Task::Figures => dir.join(p),
        (Some(p), _) => p.clone(),
        (None, Some(b)) => b.to_path_buf(),
        (None, None) => {
            print!("{}", doc.contents);
            return Ok(None);
        }
    };
    if let Some(parent) = target.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent)?;
    }
    std::fs::write(&target, &doc.contents)
        .map_err(|e| Error::Io(format!("{}: {e}", target.display())))?;
    Ok(Some(target))
}

/// Runs a scenario and writes its documents, returning the files written
/// (documents without an output path go to stdout).
pub fn run_scenario(config: &ScenarioConfig) -> Result<Vec<PathBuf>> {
    let docs = render(config)?;
    let base = config.output.as_deref();
    if config.task == Task::Figures {
        if let Some(dir) = base {
            std::fs::create_dir_all(dir)?;
        }
    }
    let mut written = Vec::new();
    for doc in &docs {
        if let Some(p) = write_document(base, config.task, doc)? {
            written.push(p);
        }
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(text: &str) -> ScenarioConfig {
        parse_config(text).unwrap()
    }

    #[test]
    fn number_format_round_trips() {
        for x in [0.1, -1.0 / 3.0, 1e-300, 6.02214076e23, 0.0] {
            let s = num(x);
            assert_eq!(s.parse::<f64>().unwrap(), x);
            let mantissa = s.split('e').next().unwrap().trim_start_matches('-');
            assert_eq!(mantissa.chars().filter(|c| c.is_ascii_digit()).count(), 17);
        }
    }

    #[test]
    fn hash_ignores_output_path() {
        let a = cfg("state=\"ho:n=0\"\ntask=\"trajectory\"\nseeds=[\"1+0i\"]\noutput=\"a.csv\"\n");
        let b = cfg("state=\"ho:n=0\"\ntask=\"trajectory\"\nseeds=[\"1+0i\"]\noutput=\"b.csv\"\n");
        let c = cfg("state=\"ho:n=0\"\ntask=\"trajectory\"\nseeds=[\"1+0i\"]\ntol=1e-9\n");
        assert_eq!(config_hash(&a), config_hash(&b));
        assert_ne!(config_hash(&a), config_hash(&c));
        assert_eq!(config_hash(&a).len(), 64);
    }

    #[test]
    fn trajectory_documents() {
        let c = cfg("state=\"ho:n=0\"\ntask=\"trajectory\"\nseeds=[\"1+0i\",\"0+2i\"]\noutput=\"out/tr.csv\"\n");
        let docs = render(&c).unwrap();
        assert_eq!(docs.len(), 2);
        assert_eq!(docs[1].path.as_deref(), Some(Path::new("out/tr_1.csv")));
        let body: Vec<&str> = docs[0]
            .contents
            .lines()
            .filter(|l| !l.starts_with('#'))
            .collect();
        assert_eq!(body[0], "t,x_r,x_i,xdot_r,xdot_i,path_const");
        assert!(body.len() > 20);
        assert!(docs[0].contents.contains("# config_sha256="));
        assert!(docs[0].contents.contains("\"rel_tol\":1e-10"));
    }

    #[test]
    fn born_document_columns_agree() {
        let c = cfg("state=\"well:n=1,a=pi\"\ntask=\"born\"\n");
        let docs = render(&c).unwrap();
        let mut worst: f64 = 0.0;
        let mut peak: f64 = 0.0;
        for line in docs[0]
            .contents
            .lines()
            .skip_while(|l| l.starts_with('#'))
            .skip(1)
        {
            let v: Vec<f64> = line.split(',').map(|s| s.parse().unwrap()).collect();
            worst = worst.max((v[1] - v[2]).abs());
            peak = peak.max(v[2]);
        }
        assert!(worst <= 1e-8 * peak);
    }

    #[test]
    fn ground_state_field_is_radially_symmetric() {
        let c = cfg("state=\"ho:n=0\"\ntask=\"field-closed\"\ngrid=\"-3:3:41,-3:3:41\"\n");
        let docs = render(&c).unwrap();
        for line in docs[0]
            .contents
            .lines()
            .skip_while(|l| l.starts_with('#'))
            .skip(1)
        {
            let v: Vec<&str> = line.split(',').collect();
            let (x, y, rho): (f64, f64, f64) = (
                v[0].parse().unwrap(),
                v[1].parse().unwrap(),
                v[2].parse().unwrap(),
            );
            assert!((rho - (-(x * x + y * y)).exp()).abs() <= 1e-12);
            assert_eq!(v[3], "defined");
        }
    }

    #[test]
    fn compare_report() {
        let c = cfg(
            "state=\"ho:n=1\"\ntask=\"compare\"\nseeds=[\"1.5+0.5i\", \"1.7320508075688772+0i\"]\n",
        );
        let report = compare_methods(&c.state, &c.seeds, &c.integrator).unwrap();
        assert_eq!(report.records.len(), 2);
        assert!(report.global_max_deviation <= 1e-4);
        assert!(report
            .records
            .iter()
            .all(|r| r.max_rel_deviation >= 0.0 && r.samples > 10));
        let bad =
            compare_methods(&c.state, &[Complex64::new(1.1, 0.1)], &c.integrator).unwrap_err();
        assert!(bad.to_string().starts_with("seed "));
    }
}
