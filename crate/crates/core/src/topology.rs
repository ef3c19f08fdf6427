//! Sublattice Zak phases of bands continued around a circular GBZ, the
//! boundary-state count they predict, and phase-diagram sweeps of the
//! nonreciprocal trimer.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

#[allow(unused_imports)]
use num_traits::Float;

use crate::gbz::theoretical_radius;
use crate::lattice::{bloch_eval, build_real_space, hopping_blocks, Boundary, LatticeModel1D};
use crate::linalg::{dot, norm2, C64};
use crate::spectral::{biorthogonal_system, classify_spectrum, eig_full, Phase, PAIRING_TOLERANCE};
use crate::{Error, Result};

/// Starting resolution for winding computations.
pub const DEFAULT_SAMPLES: usize = 512;
/// Doubling stops here.
pub const MAX_SAMPLES: usize = 4096;
/// Minimum normalized overlap between consecutive samples of one band.
const CONTINUITY: f64 = 0.5;
/// Largest accepted phase increment between consecutive samples.
const MAX_STEP: f64 = PI / 2.0;

#[derive(Clone, Debug)]
pub struct BandSample {
    pub energy: C64,
    pub right: Vec<C64>,
    pub left: Vec<C64>,
}

#[derive(Clone, Debug)]
pub struct BandTrack {
    pub samples: usize,
    pub radius: f64,
    pub k_values: Vec<f64>,
    /// `bands[λ][j]` at `k_values[j]`.
    pub bands: Vec<Vec<BandSample>>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct NsZakResult {
    pub per_band_winding: Vec<i64>,
    /// Same windings from the left eigenvectors.
    pub left_winding: Vec<i64>,
    pub total: i64,
    pub samples: usize,
    pub theta_r_trace: Vec<Vec<f64>>,
    pub theta_l_trace: Vec<Vec<f64>>,
}

fn overlap(a: &[C64], b: &[C64]) -> f64 {
    dot(a, b).norm() / (norm2(a) * norm2(b))
}

/// Greedy assignment of `next` states to `prev` bands by largest overlap.
fn assign(prev: &[BandSample], next: &[BandSample]) -> (Vec<usize>, f64) {
    let n = prev.len();
    let mut pairs: Vec<(f64, usize, usize)> = Vec::with_capacity(n * n);
    for (i, p) in prev.iter().enumerate() {
        for (j, q) in next.iter().enumerate() {
            pairs.push((overlap(&p.right, &q.right), i, j));
        }
    }
    pairs.sort_by(|a, b| b.0.total_cmp(&a.0));
    let mut map = vec![usize::MAX; n];
    let mut used = vec![false; n];
    let mut weakest = f64::INFINITY;
    for (ov, i, j) in pairs {
        if map[i] == usize::MAX && !used[j] {
            map[i] = j;
            used[j] = true;
            weakest = weakest.min(ov);
        }
    }
    (map, weakest)
}

/// Right and left eigenvectors of `H(r e^{ik})` at `K` points, continued
/// band by band through maximal overlap.
pub fn band_track_at(model: &LatticeModel1D, samples: usize, radius: f64) -> Result<BandTrack> {
    if samples < 2 {
        return Err(Error::Input("band tracking needs at least two samples".into()));
    }
    let bm = hopping_blocks(model)?;
    let mut bands: Vec<Vec<BandSample>> = vec![Vec::with_capacity(samples); bm.dim];
    let mut k_values = Vec::with_capacity(samples);
    let mut first: Option<Vec<BandSample>> = None;
    let mut prev: Option<Vec<BandSample>> = None;
    for j in 0..samples {
        let k = 2.0 * PI * j as f64 / samples as f64;
        let h = bloch_eval(&bm, C64::from_polar(radius, k))?;
        let sys = biorthogonal_system(&h).map_err(|e| match e {
            Error::NearExceptionalPoint { .. } => Error::BandTouching { sample: j, samples },
            other => other,
        })?;
        let states: Vec<BandSample> =
            (0..bm.dim).map(|b| BandSample { energy: sys.eigenvalues[b], right: sys.right.column(b), left: sys.left.column(b) }).collect();
        let ordered = match &prev {
            None => states,
            Some(p) => {
                let (map, weakest) = assign(p, &states);
                if weakest < CONTINUITY {
                    return Err(Error::BandTouching { sample: j, samples });
                }
                map.iter().map(|&m| states[m].clone()).collect()
            }
        };
        for (band, s) in bands.iter_mut().zip(&ordered) {
            band.push(s.clone());
        }
        if first.is_none() {
            first = Some(ordered.clone());
        }
        k_values.push(k);
        prev = Some(ordered);
    }
    // every band must return to itself after one loop
    if let (Some(p), Some(f)) = (prev, first) {
        let (map, weakest) = assign(&p, &f);
        if weakest < CONTINUITY || map.iter().enumerate().any(|(i, &m)| i != m) {
            return Err(Error::BandTouching { sample: samples, samples });
        }
    }
    Ok(BandTrack { samples, radius, k_values, bands })
}

/// Tracks bands on the circle of the model's own GBZ radius.
pub fn band_track(model: &LatticeModel1D, samples: usize) -> Result<BandTrack> {
    band_track_at(model, samples, theoretical_radius(model)?)
}

/// Phase of component `sub` relative to a reference sublattice (the last,
/// or the first when `sub` is the last).
fn relative_phase(v: &[C64], sub: usize, sample: usize, samples: usize) -> Result<f64> {
    let reference = if sub + 1 == v.len() { 0 } else { v.len() - 1 };
    let scale = norm2(v);
    let (a, r) = (v[sub], v[reference]);
    if a.norm() <= 1e-12 * scale || r.norm() <= 1e-12 * scale {
        return Err(Error::GaugeSingular { sample, samples });
    }
    Ok((a * r.conj()).arg())
}

fn wrap(x: f64) -> f64 {
    let mut y = x % (2.0 * PI);
    if y > PI {
        y -= 2.0 * PI;
    } else if y <= -PI {
        y += 2.0 * PI;
    }
    y
}

/// Winding `−(1/2π)∮ dθ` of one phase trace; `None` if a step is too coarse.
fn winding(trace: &[f64]) -> Option<i64> {
    let mut total = 0.0;
    for j in 0..trace.len() {
        let step = wrap(trace[(j + 1) % trace.len()] - trace[j]);
        if step.abs() >= MAX_STEP {
            return None;
        }
        total += step;
    }
    let w = -total / (2.0 * PI);
    let rounded = w.round();
    ((w - rounded).abs() <= 1e-3).then_some(rounded as i64)
}

pub fn ns_zak_phase(track: &BandTrack, sublattice: usize) -> Result<NsZakResult> {
    let dim = track.bands.len();
    if sublattice >= dim || dim < 2 {
        return Err(Error::Input("sublattice out of range or single-band model".into()));
    }
    let mut per_band_winding = Vec::with_capacity(dim);
    let mut left_winding = Vec::with_capacity(dim);
    let mut theta_r_trace = Vec::with_capacity(dim);
    let mut theta_l_trace = Vec::with_capacity(dim);
    for band in &track.bands {
        let tr =
            band.iter().enumerate().map(|(j, s)| relative_phase(&s.right, sublattice, j, track.samples)).collect::<Result<Vec<f64>>>()?;
        let tl =
            band.iter().enumerate().map(|(j, s)| relative_phase(&s.left, sublattice, j, track.samples)).collect::<Result<Vec<f64>>>()?;
        let (Some(wr), Some(wl)) = (winding(&tr), winding(&tl)) else {
            return Err(Error::GaugeSingular { sample: 0, samples: track.samples });
        };
        per_band_winding.push(wr);
        left_winding.push(wl);
        theta_r_trace.push(tr);
        theta_l_trace.push(tl);
    }
    let total = per_band_winding.iter().sum();
    Ok(NsZakResult { per_band_winding, left_winding, total, samples: track.samples, theta_r_trace, theta_l_trace })
}

/// Windings starting at `samples` points, doubling on coarse steps or
/// tracking failures up to [`MAX_SAMPLES`].
pub fn ns_zak_for_model(model: &LatticeModel1D, samples: usize, sublattice: usize) -> Result<NsZakResult> {
    let radius = theoretical_radius(model)?;
    let mut k = samples.max(2);
    loop {
        let attempt = band_track_at(model, k, radius).and_then(|t| ns_zak_phase(&t, sublattice));
        match attempt {
            Ok(r) => return Ok(r),
            Err(e @ (Error::BandTouching { .. } | Error::GaugeSingular { .. })) => {
                if k * 2 > MAX_SAMPLES {
                    return Err(e);
                }
                k *= 2;
            }
            Err(e) => return Err(e),
        }
    }
}

/// Total winding over all bands: the predicted number of boundary states.
pub fn edge_state_prediction(model: &LatticeModel1D) -> Result<i64> {
    Ok(ns_zak_for_model(model, DEFAULT_SAMPLES, 0)?.total)
}

/// Trimer with `right = (1, 1, t3)` and `left = (x t3², y t3², t3)`.
pub fn phase_diagram_model(t3: f64, x: f64, y: f64, cells: usize) -> Result<LatticeModel1D> {
    let s = t3 * t3;
    LatticeModel1D::from_real(&[1.0, 1.0, t3], &[x * s, y * s, t3], cells, Boundary::Open)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CellStatus {
    Resolved,
    /// On an axis: a hop product vanishes.
    Degenerate,
    /// Bands touch; the count is read off the neighbours.
    Transition,
}

impl CellStatus {
    pub fn label(self) -> &'static str {
        match self {
            CellStatus::Resolved => "OK",
            CellStatus::Degenerate => "DEGENERATE",
            CellStatus::Transition => "TRANSITION",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PhaseCell {
    pub x: f64,
    pub y: f64,
    pub status: CellStatus,
    pub edge_count: Option<i64>,
    pub pt_phase: Option<Phase>,
    /// Distinct counts of resolved neighbours, for transition cells.
    pub adjacent: Vec<i64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PhaseGrid {
    pub t3: f64,
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
    /// Row-major with `x` fastest.
    pub cells: Vec<PhaseCell>,
}

pub fn phase_diagram_cell(t3: f64, x: f64, y: f64, cells: usize) -> PhaseCell {
    let mut out = PhaseCell { x, y, status: CellStatus::Degenerate, edge_count: None, pt_phase: None, adjacent: Vec::new() };
    if x == 0.0 || y == 0.0 || t3 == 0.0 {
        return out;
    }
    let Ok(model) = phase_diagram_model(t3, x, y, cells) else {
        return out;
    };
    out.pt_phase = build_real_space(&model)
        .ok()
        .and_then(|h| eig_full(&h).ok())
        .and_then(|s| classify_spectrum(&s.values, PAIRING_TOLERANCE).ok())
        .map(|p| p.phase);
    match edge_state_prediction(&model) {
        Ok(n) => {
            out.status = CellStatus::Resolved;
            out.edge_count = Some(n);
        }
        Err(_) => out.status = CellStatus::Transition,
    }
    out
}

/// Fills in the neighbouring counts of every transition cell.
pub fn resolve_transitions(grid: &mut PhaseGrid) {
    let (nx, ny) = (grid.xs.len(), grid.ys.len());
    for iy in 0..ny {
        for ix in 0..nx {
            if grid.cells[iy * nx + ix].status != CellStatus::Transition {
                continue;
            }
            let mut counts = Vec::new();
            let neighbours = [(ix.wrapping_sub(1), iy), (ix + 1, iy), (ix, iy.wrapping_sub(1)), (ix, iy + 1)];
            for (jx, jy) in neighbours {
                if jx < nx && jy < ny {
                    if let Some(n) = grid.cells[jy * nx + jx].edge_count {
                        if !counts.contains(&n) {
                            counts.push(n);
                        }
                    }
                }
            }
            counts.sort_unstable();
            grid.cells[iy * nx + ix].adjacent = counts;
        }
    }
}

/// Sequential sweep over `xs × ys`.
pub fn phase_diagram(t3: f64, xs: &[f64], ys: &[f64], cells: usize) -> PhaseGrid {
    let cells_out = ys.iter().flat_map(|&y| xs.iter().map(move |&x| phase_diagram_cell(t3, x, y, cells))).collect();
    let mut grid = PhaseGrid { t3, xs: xs.to_vec(), ys: ys.to_vec(), cells: cells_out };
    resolve_transitions(&mut grid);
    grid
}

#[derive(Clone, Debug, PartialEq)]
pub struct InvarianceReport {
    pub passed: bool,
    pub spectrum_deviation: f64,
    pub windings_match: bool,
}

/// `(left₁, right₁) → (α·left₁, right₁/α)` keeps every hop product and
/// should leave the open spectrum and the windings untouched.
pub fn parameter_set_invariance_check(model: &LatticeModel1D, alpha: f64) -> Result<InvarianceReport> {
    if alpha == 0.0 || !alpha.is_finite() {
        return Err(Error::Input("alpha must be finite and nonzero".into()));
    }
    let mut scaled = model.clone();
    scaled.left[0] *= alpha;
    scaled.right[0] /= alpha;
    let a = eig_full(&build_real_space(model)?)?.values;
    let mut b = eig_full(&build_real_space(&scaled)?)?.values;
    let mut spectrum_deviation = 0.0f64;
    for e in a {
        let (k, d) = b.iter().enumerate().map(|(k, z)| (k, (z - e).norm())).fold((0, f64::INFINITY), |x, y| if y.1 < x.1 { y } else { x });
        spectrum_deviation = spectrum_deviation.max(d);
        b.swap_remove(k);
    }
    let za = ns_zak_for_model(model, DEFAULT_SAMPLES, 0)?;
    let zb = ns_zak_for_model(&scaled, DEFAULT_SAMPLES, 0)?;
    let windings_match = za.per_band_winding == zb.per_band_winding;
    Ok(InvarianceReport { passed: spectrum_deviation <= 1e-8 && windings_match, spectrum_deviation, windings_match })
}

/// Trimer with `right = (0.4, 0.9, t3)`, `left = (2.025, −0.4, t3)`; boundary levels appear as `t3` grows.
pub fn reference_trimer(t3: f64, cells: usize) -> LatticeModel1D {
    LatticeModel1D::from_real(&[0.4, 0.9, t3], &[2.025, -0.4, t3], cells, Boundary::Open).expect("valid trimer")
}
