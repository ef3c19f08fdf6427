use std::collections::BTreeMap;

use nonrecip_core::gauge::{check_path_independence, GaugeReport, GaugeStatus};
use nonrecip_core::gbz::{discrete_levels_by_root_gap, gbz_points};
use nonrecip_core::lattice::{build_real_space, build_real_space_2d, Boundary, LatticeModel1D, LatticeModel2D};
use nonrecip_core::spectral::{
    biorthogonal_system, classify_spectrum, eig_full, localization_lengths, localization_lengths_2d, BiorthogonalEigensystem,
    PAIRING_TOLERANCE,
};
use nonrecip_core::topology::{ns_zak_for_model, phase_diagram_cell, resolve_transitions, PhaseGrid, DEFAULT_SAMPLES};
use nonrecip_core::{Error, C64};
use rayon::prelude::*;
use serde::Serialize;

use crate::output::{num, r12, Out};
use crate::schema::Model;
use crate::CliError;

/// Default root-gap threshold for calling an open-chain level discrete.
pub const LEVEL_GAP: f64 = 5.0;
/// Default relative tolerance for a circular GBZ.
pub const CIRCLE_TOL: f64 = 1e-6;

#[derive(Debug, Default)]
pub struct Settings(BTreeMap<String, String>);

impl Settings {
    pub fn parse(pairs: &[String]) -> Result<Self, CliError> {
        let mut map = BTreeMap::new();
        for p in pairs {
            let Some((k, v)) = p.split_once('=') else {
                return Err(CliError::config(format!("--set expects key=value, got {p:?}")));
            };
            map.insert(k.trim().to_string(), v.trim().to_string());
        }
        Ok(Settings(map))
    }

    fn allow(&self, keys: &[&str]) -> Result<(), CliError> {
        match self.0.keys().find(|k| !keys.contains(&k.as_str())) {
            Some(k) => Err(CliError::config(format!("unknown setting {k:?} (accepted: {})", keys.join(", ")))),
            None => Ok(()),
        }
    }

    fn f64(&self, key: &str, default: f64) -> Result<f64, CliError> {
        match self.0.get(key) {
            None => Ok(default),
            Some(v) => v
                .parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .ok_or_else(|| CliError::config(format!("{key} must be a finite number, got {v:?}"))),
        }
    }

    fn usize(&self, key: &str, default: usize) -> Result<usize, CliError> {
        match self.0.get(key) {
            None => Ok(default),
            Some(v) => v.parse::<usize>().map_err(|_| CliError::config(format!("{key} must be a non-negative integer, got {v:?}"))),
        }
    }

    fn has(&self, key: &str) -> bool {
        self.0.contains_key(key)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Command {
    Spectrum,
    Gbz,
    Envelope,
    Zak,
    PhaseDiagram,
    CheckGauge,
    Hn2d,
}

pub fn run(cmd: Command, model: Model, settings: &Settings, out: &Out) -> Result<i32, CliError> {
    match cmd {
        Command::CheckGauge => check_gauge(&model, settings, out),
        Command::Hn2d => hn2d(&square(model)?, settings, out).map(|_| 0),
        Command::Spectrum => spectrum(&chain(model)?, settings, out).map(|_| 0),
        Command::Gbz => gbz(&chain(model)?, settings, out).map(|_| 0),
        Command::Envelope => envelope(&chain(model)?, settings, out).map(|_| 0),
        Command::Zak => zak(&chain(model)?, settings, out).map(|_| 0),
        Command::PhaseDiagram => phase_diagram(&chain(model)?, settings, out).map(|_| 0),
    }
}

fn chain(model: Model) -> Result<LatticeModel1D, CliError> {
    match model {
        Model::Chain(m) => Ok(m),
        Model::Square(_) => Err(CliError::config("this command needs a chain model (M, N, tR, tL)".into())),
    }
}

fn square(model: Model) -> Result<LatticeModel2D, CliError> {
    match model {
        Model::Square(m) => Ok(m),
        Model::Chain(_) => Err(CliError::config("hn2d needs a square-lattice model (Mx, Ny, ...)".into())),
    }
}

fn open(model: &LatticeModel1D) -> LatticeModel1D {
    model.with_boundary(Boundary::Open)
}

fn system(h: &nonrecip_core::Matrix) -> Result<BiorthogonalEigensystem, CliError> {
    Ok(biorthogonal_system(h)?)
}

#[derive(Serialize)]
struct PhaseJson {
    phase: Option<&'static str>,
    classification_error: Option<String>,
    states: usize,
    pairs: Vec<[usize; 2]>,
    real: Vec<usize>,
    discrete_levels: Option<usize>,
    discrete_indices: Vec<usize>,
    condition_estimate: f64,
}

fn spectrum(model: &LatticeModel1D, settings: &Settings, out: &Out) -> Result<(), CliError> {
    settings.allow(&["level_gap"])?;
    let gap = settings.f64("level_gap", LEVEL_GAP)?;
    let sys = system(&build_real_space(model)?)?;
    let values = &sys.eigenvalues;
    let (phase, classification_error) = match classify_spectrum(values, PAIRING_TOLERANCE) {
        Ok(p) => (Some(p), None),
        Err(e) if !model.is_real() => (None, Some(e.to_string())),
        Err(e) => return Err(e.into()),
    };
    let open_chain = model.boundary == Boundary::Open;
    let discrete = if open_chain { Some(discrete_levels_by_root_gap(model, values, gap)?) } else { None };
    let kappa = if open_chain {
        match localization_lengths(&sys, model) {
            Ok(fit) => Some(fit.per_state_kappa),
            Err(Error::InsufficientSize { .. }) => None,
            Err(e) => return Err(e.into()),
        }
    } else {
        None
    };
    let is_discrete = |i: usize| discrete.as_ref().is_some_and(|d| d.contains(&i));
    out.csv(
        "spectrum.csv",
        &["index", "re_E", "im_E", "kappa", "is_discrete"],
        values.iter().enumerate().map(|(i, e)| {
            let k = kappa.as_ref().map(|k| num(k[i])).unwrap_or_default();
            vec![(i + 1).to_string(), num(e.re), num(e.im), k, is_discrete(i).to_string()]
        }),
    )?;
    let body = PhaseJson {
        phase: phase.as_ref().map(|p| p.phase.label()),
        classification_error,
        states: values.len(),
        pairs: phase.as_ref().map(|p| p.pairing.iter().map(|&(a, b)| [a + 1, b + 1]).collect()).unwrap_or_default(),
        real: phase.as_ref().map(|p| p.real_indices.iter().map(|i| i + 1).collect()).unwrap_or_default(),
        discrete_levels: discrete.as_ref().map(Vec::len),
        discrete_indices: discrete.iter().flatten().map(|i| i + 1).collect(),
        condition_estimate: r12(sys.condition_estimate),
    };
    out.json("phase.json", &body)
}

#[derive(Serialize)]
struct GbzJson {
    radius_fit: f64,
    radius_theory: Option<f64>,
    max_dev: f64,
    circular: bool,
    energies: usize,
    rejected: usize,
    unbalanced: bool,
}

fn gbz(model: &LatticeModel1D, settings: &Settings, out: &Out) -> Result<(), CliError> {
    settings.allow(&["circular_tol"])?;
    let tol = settings.f64("circular_tol", CIRCLE_TOL)?;
    let model = open(model);
    let values = eig_full(&build_real_space(&model)?)?.values;
    let curve = gbz_points(&model, &values)?;
    out.csv(
        "gbz.csv",
        &["re_E", "im_E", "re_beta", "im_beta", "modulus"],
        curve.points.iter().map(|(e, b)| vec![num(e.re), num(e.im), num(b.re), num(b.im), num(b.norm())]),
    )?;
    let body = GbzJson {
        radius_fit: r12(curve.radius),
        radius_theory: curve.theoretical_radius.map(r12),
        max_dev: r12(curve.max_radial_deviation),
        circular: curve.is_circular(tol),
        energies: values.len(),
        rejected: curve.rejected.len(),
        unbalanced: curve.unbalanced,
    };
    out.json("gbz_summary.json", &body)
}

#[derive(Serialize)]
struct StateFit {
    index: usize,
    #[serde(rename = "re_E")]
    re_e: f64,
    #[serde(rename = "im_E")]
    im_e: f64,
    kappa: f64,
    r_squared: f64,
    discrete: bool,
}

#[derive(Serialize)]
struct FitJson {
    theoretical_kappa: f64,
    continuum_mean_kappa: Option<f64>,
    continuum_max_relative_error: Option<f64>,
    states: Vec<StateFit>,
}

fn envelope(model: &LatticeModel1D, settings: &Settings, out: &Out) -> Result<(), CliError> {
    settings.allow(&["level_gap"])?;
    let gap = settings.f64("level_gap", LEVEL_GAP)?;
    let model = open(model);
    let sys = system(&build_real_space(&model)?)?;
    let fit = localization_lengths(&sys, &model)?;
    let discrete = discrete_levels_by_root_gap(&model, &sys.eigenvalues, gap)?;
    out.csv(
        "envelopes.csv",
        &["state_index", "site", "re_psi", "im_psi"],
        (0..sys.right.cols()).flat_map(|i| {
            sys.right
                .column(i)
                .into_iter()
                .enumerate()
                .map(move |(s, z)| vec![(i + 1).to_string(), (s + 1).to_string(), num(z.re), num(z.im)])
        }),
    )?;
    let continuum: Vec<f64> = fit.per_state_kappa.iter().enumerate().filter(|(i, _)| !discrete.contains(i)).map(|(_, &k)| k).collect();
    let t = fit.theoretical_kappa;
    let mean = (!continuum.is_empty()).then(|| continuum.iter().sum::<f64>() / continuum.len() as f64);
    let worst = (!continuum.is_empty() && t != 0.0).then(|| continuum.iter().map(|k| (k - t).abs() / t.abs()).fold(0.0, f64::max));
    let states = sys
        .eigenvalues
        .iter()
        .enumerate()
        .map(|(i, e)| StateFit {
            index: i + 1,
            re_e: r12(e.re),
            im_e: r12(e.im),
            kappa: r12(fit.per_state_kappa[i]),
            r_squared: r12(fit.r_squared[i]),
            discrete: discrete.contains(&i),
        })
        .collect();
    let body =
        FitJson { theoretical_kappa: r12(t), continuum_mean_kappa: mean.map(r12), continuum_max_relative_error: worst.map(r12), states };
    out.json("fit.json", &body)
}

#[derive(Serialize)]
struct ZakJson {
    per_band: Vec<i64>,
    left_per_band: Vec<i64>,
    total: i64,
    #[serde(rename = "K")]
    k: usize,
    sublattice: usize,
}

fn zak(model: &LatticeModel1D, settings: &Settings, out: &Out) -> Result<(), CliError> {
    settings.allow(&["K", "sublattice"])?;
    let k = settings.usize("K", DEFAULT_SAMPLES)?;
    if k < 64 {
        return Err(CliError::config("K must be at least 64".into()));
    }
    let sub = settings.usize("sublattice", 1)?;
    if sub < 1 || sub > model.sublattices {
        return Err(CliError::config(format!("sublattice must be in 1..={}", model.sublattices)));
    }
    let z = ns_zak_for_model(model, k, sub - 1)?;
    let body = ZakJson { per_band: z.per_band_winding, left_per_band: z.left_winding, total: z.total, k: z.samples, sublattice: sub };
    out.json("zak.json", &body)
}

fn axis(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect(),
    }
}

fn phase_diagram(model: &LatticeModel1D, settings: &Settings, out: &Out) -> Result<(), CliError> {
    settings.allow(&["t3", "x_min", "x_max", "nx", "y_min", "y_max", "ny"])?;
    let t3 = if settings.has("t3") {
        settings.f64("t3", 0.0)?
    } else if model.sublattices == 3 && model.right[2].im == 0.0 {
        model.right[2].re
    } else {
        return Err(CliError::config("phase-diagram needs t3: pass --set t3=... or a three-sublattice model".into()));
    };
    if t3 == 0.0 {
        return Err(CliError::config("t3 must be nonzero".into()));
    }
    let xs = axis(settings.f64("x_min", -2.0)?, settings.f64("x_max", 2.0)?, settings.usize("nx", 21)?);
    let ys = axis(settings.f64("y_min", -2.0)?, settings.f64("y_max", 2.0)?, settings.usize("ny", 21)?);
    let cells = model.cells;
    let work: Vec<(f64, f64)> = ys.iter().flat_map(|&y| xs.iter().map(move |&x| (x, y))).collect();
    let computed = work.par_iter().map(|&(x, y)| phase_diagram_cell(t3, x, y, cells)).collect();
    let mut grid = PhaseGrid { t3, xs, ys, cells: computed };
    resolve_transitions(&mut grid);
    out.csv(
        "phase_diagram.csv",
        &["x", "y", "edge_count", "pt_phase", "status", "adjacent"],
        grid.cells.iter().map(|c| {
            vec![
                num(c.x),
                num(c.y),
                c.edge_count.map(|n| n.to_string()).unwrap_or_default(),
                c.pt_phase.map(|p| p.label().to_string()).unwrap_or_default(),
                c.status.label().to_string(),
                c.adjacent.iter().map(|n| n.to_string()).collect::<Vec<_>>().join(";"),
            ]
        }),
    )
}

#[derive(Serialize)]
struct GaugeJson {
    status: &'static str,
    max_cycle_residual: f64,
    violating_cycle: Vec<[usize; 2]>,
}

fn check_gauge(model: &Model, settings: &Settings, out: &Out) -> Result<i32, CliError> {
    settings.allow(&[])?;
    let report: GaugeReport = match model {
        Model::Chain(m) => check_path_independence(m),
        Model::Square(m) => check_path_independence(m),
    };
    let body = GaugeJson {
        status: report.status.label(),
        max_cycle_residual: r12(report.max_cycle_residual),
        violating_cycle: report.violating_cycle.iter().map(|&(a, b)| [a + 1, b + 1]).collect(),
    };
    out.json("gauge_report.json", &body)?;
    Ok(match report.status {
        GaugeStatus::Violated => 2,
        GaugeStatus::Degenerate => 3,
        _ => 0,
    })
}

#[derive(Serialize)]
struct Envelope2dJson {
    kappa_x: Vec<f64>,
    kappa_y: Vec<f64>,
    theory: [f64; 2],
    mean_abs_kappa: [f64; 2],
    max_abs_imag: f64,
}

fn hn2d(model: &LatticeModel2D, settings: &Settings, out: &Out) -> Result<(), CliError> {
    settings.allow(&[])?;
    let sys = system(&build_real_space_2d(model)?)?;
    let fit = localization_lengths_2d(&sys, model)?;
    let states = sys.right.cols() as f64;
    let mut density = vec![0.0; model.sites()];
    for psi in (0..sys.right.cols()).map(|i| sys.right.column(i)) {
        let norm: f64 = psi.iter().map(C64::norm_sqr).sum();
        for (d, z) in density.iter_mut().zip(&psi) {
            *d += z.norm_sqr() / norm / states;
        }
    }
    out.csv(
        "density_map.csv",
        &["x", "y", "density"],
        (0..model.height).flat_map(|y| {
            let density = &density;
            (0..model.width).map(move |x| vec![(x + 1).to_string(), (y + 1).to_string(), num(density[model.site(x, y)])])
        }),
    )?;
    let mean = |k: &[f64]| r12(k.iter().map(|x| x.abs()).sum::<f64>() / k.len().max(1) as f64);
    let body = Envelope2dJson {
        kappa_x: fit.kappa_x.iter().copied().map(r12).collect(),
        kappa_y: fit.kappa_y.iter().copied().map(r12).collect(),
        theory: [r12(fit.theoretical.0), r12(fit.theoretical.1)],
        mean_abs_kappa: [mean(&fit.kappa_x), mean(&fit.kappa_y)],
        max_abs_imag: r12(sys.eigenvalues.iter().fold(0.0, |m, e| m.max(e.im.abs()))),
    };
    out.json("envelope2d.json", &body)
}
