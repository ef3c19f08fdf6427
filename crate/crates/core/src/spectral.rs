//! Dense eigenanalysis of non-Hermitian lattices: biorthogonal systems,
//! real/conjugate-pair classification, skin-mode envelopes and the metric
//! rebuilt from left eigenvectors.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::f64::consts::{FRAC_PI_2, PI};

#[allow(unused_imports)]
use num_traits::Float;

use crate::lattice::{LatticeModel1D, LatticeModel2D};
use crate::linalg::{c, dot, eig_decompose, norm2, Lu, Matrix, C64};
use crate::{Error, Result};

/// Below this `condition_estimate` the eigenvector basis is treated as defective.
pub const EP_THRESHOLD: f64 = 1e-8;
/// Default relative tolerance for conjugate matching.
pub const PAIRING_TOLERANCE: f64 = 1e-9;

/// Eigenvalues sorted by `(Re, Im)` with unit-norm right eigenvectors as columns.
#[derive(Clone, Debug)]
pub struct Eigensystem {
    pub values: Vec<C64>,
    pub vectors: Matrix,
    /// Reciprocal condition number of the (balanced) eigenvector matrix.
    pub condition_estimate: f64,
    left: Option<Matrix>,
}

#[derive(Clone, Debug)]
pub struct BiorthogonalEigensystem {
    pub eigenvalues: Vec<C64>,
    pub right: Matrix,
    /// Columns `φ_i` with `⟨φ_i|ψ_j⟩ = δ_ij`.
    pub left: Matrix,
    pub condition_estimate: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Phase {
    PtExact,
    PtBroken,
}

impl Phase {
    pub fn label(self) -> &'static str {
        match self {
            Phase::PtExact => "PT_EXACT",
            Phase::PtBroken => "PT_BROKEN",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SpectrumPhase {
    pub phase: Phase,
    /// `(i₊, i₋)` with `Im E_{i₊} > 0`.
    pub pairing: Vec<(usize, usize)>,
    pub real_indices: Vec<usize>,
}

impl SpectrumPhase {
    /// Index of the conjugate partner of every eigenvalue (itself when real).
    pub fn partners(&self, len: usize) -> Vec<usize> {
        let mut p: Vec<usize> = (0..len).collect();
        for &(a, b) in &self.pairing {
            p[a] = b;
            p[b] = a;
        }
        p
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EnvelopeFit {
    pub per_state_kappa: Vec<f64>,
    pub r_squared: Vec<f64>,
    pub theoretical_kappa: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EnvelopeFit2D {
    pub kappa_x: Vec<f64>,
    pub kappa_y: Vec<f64>,
    pub theoretical: (f64, f64),
}

fn cmp_re_im(a: &C64, b: &C64) -> Ordering {
    a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im))
}

/// Rotates `v` so its largest-modulus entry is real and positive.
fn fix_phase(v: &mut [C64]) -> C64 {
    let top = v.iter().cloned().fold(c(0.0, 0.0), |m, z| if z.norm() > m.norm() { z } else { m });
    if top.norm() == 0.0 {
        return c(1.0, 0.0);
    }
    let rot = top.conj() / top.norm();
    v.iter_mut().for_each(|z| *z *= rot);
    rot
}

pub fn eig_full(h: &Matrix) -> Result<Eigensystem> {
    eig_impl(h, false)
}

fn eig_impl(h: &Matrix, want_left: bool) -> Result<Eigensystem> {
    if !h.is_square() || h.rows() == 0 {
        return Err(Error::Input(format!("eigenproblem needs a nonempty square matrix, got {}×{}", h.rows(), h.cols())));
    }
    if h.as_slice().iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::Input("matrix has non-finite entries".into()));
    }
    let n = h.rows();
    let dec = eig_decompose(h)?;
    let vb = &dec.balanced_vectors;
    let inverse = if dec.unitary { Some(vb.adjoint()) } else { Lu::new(vb).inverse() };
    let condition_estimate = match &inverse {
        Some(inv) => {
            let k = vb.frobenius_norm() * inv.frobenius_norm();
            if k.is_finite() && k > 0.0 {
                (n as f64 / k).min(1.0)
            } else {
                0.0
            }
        }
        None => 0.0,
    };
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| cmp_re_im(&dec.values[a], &dec.values[b]));
    let top = dec.log_scale.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let d: Vec<f64> = dec.log_scale.iter().map(|x| (x - top).exp()).collect();
    let mut vectors = Matrix::zeros(n, n);
    let mut left = if want_left && inverse.is_some() { Some(Matrix::zeros(n, n)) } else { None };
    for (col, &k) in order.iter().enumerate() {
        let mut v: Vec<C64> = (0..n).map(|i| vb[(i, k)] * d[i]).collect();
        let nrm = norm2(&v);
        v.iter_mut().for_each(|z| *z /= nrm);
        let rot = fix_phase(&mut v);
        vectors.set_column(col, &v);
        if let (Some(l), Some(inv)) = (left.as_mut(), inverse.as_ref()) {
            // row k of V_b⁻¹, conjugated, undone by D⁻¹ and the same rescaling
            let w: Vec<C64> = (0..n).map(|i| inv[(k, i)].conj() / d[i] * nrm * rot).collect();
            l.set_column(col, &w);
        }
    }
    Ok(Eigensystem { values: order.iter().map(|&k| dec.values[k]).collect(), vectors, condition_estimate, left })
}

pub fn biorthogonal_system(h: &Matrix) -> Result<BiorthogonalEigensystem> {
    let sys = eig_impl(h, true)?;
    if sys.condition_estimate < EP_THRESHOLD {
        return Err(Error::NearExceptionalPoint { condition: sys.condition_estimate });
    }
    let mut left = sys.left.expect("left vectors exist above the threshold");
    let n = sys.values.len();
    for j in 0..n {
        let mut phi = left.column(j);
        let s = dot(&phi, &sys.vectors.column(j));
        phi.iter_mut().for_each(|z| *z /= s.conj());
        left.set_column(j, &phi);
    }
    Ok(BiorthogonalEigensystem { eigenvalues: sys.values, right: sys.vectors, left, condition_estimate: sys.condition_estimate })
}

/// Greedy conjugate matching with tolerance `tol · max(1, spectral radius)`.
pub fn classify_spectrum(values: &[C64], tol: f64) -> Result<SpectrumPhase> {
    let radius = values.iter().fold(0.0f64, |m, z| m.max(z.norm()));
    let eps = tol * radius.max(1.0);
    let mut real_indices = Vec::new();
    let mut complex = Vec::new();
    for (i, z) in values.iter().enumerate() {
        if z.im.abs() <= eps {
            real_indices.push(i);
        } else {
            complex.push(i);
        }
    }
    // upper half-plane first, each matched to its nearest conjugate below
    let (upper, mut lower): (Vec<usize>, Vec<usize>) = complex.into_iter().partition(|&i| values[i].im > 0.0);
    let mut pairing = Vec::new();
    for &i in &upper {
        let target = values[i].conj();
        let mut hits: Vec<(usize, f64)> =
            lower.iter().enumerate().map(|(slot, &j)| (slot, (values[j] - target).norm())).filter(|&(_, d)| d <= eps).collect();
        match hits.len() {
            0 => return Err(Error::NotPseudoHermitian { index: i }),
            1 => {}
            _ => {
                hits.sort_by(|a, b| a.1.total_cmp(&b.1));
                let (a, b) = (lower[hits[0].0], lower[hits[1].0]);
                if (values[a] - values[b]).norm() > 0.0 {
                    return Err(Error::AmbiguousPairing { index: i });
                }
            }
        }
        let j = lower.swap_remove(hits[0].0);
        pairing.push((i, j));
    }
    if let Some(&j) = lower.first() {
        return Err(Error::NotPseudoHermitian { index: j });
    }
    pairing.sort_unstable();
    let phase = if pairing.is_empty() { Phase::PtExact } else { Phase::PtBroken };
    Ok(SpectrumPhase { phase, pairing, real_indices })
}

/// Closed-form open-chain spectrum of the single-band nonreciprocal chain.
#[derive(Clone, Debug)]
pub struct HnSpectrum {
    pub values: Vec<C64>,
    /// Unit-norm right eigenvectors, one per value.
    pub right: Vec<Vec<C64>>,
    /// Matching left eigenvectors with `⟨φ_j|ψ_j⟩ = 1`.
    pub left: Vec<Vec<C64>>,
}

pub fn hn_analytic_spectrum(left_hop: f64, right_hop: f64, cells: usize) -> Result<HnSpectrum> {
    if left_hop == 0.0 || right_hop == 0.0 {
        return Err(Error::Degenerate("zero hopping".into()));
    }
    if cells == 0 {
        return Err(Error::Input("need at least one cell".into()));
    }
    let omega = left_hop * right_hop;
    let r = (right_hop / left_hop).abs().sqrt();
    let g = omega.abs().sqrt();
    let step = PI / (cells as f64 + 1.0);
    let sign = left_hop.signum();
    let mut out = HnSpectrum { values: Vec::new(), right: Vec::new(), left: Vec::new() };
    for j in 1..=cells {
        let (e, profile): (C64, Vec<C64>) = if omega > 0.0 {
            let k = j as f64 * step;
            (c(2.0 * sign * g * k.cos(), 0.0), (1..=cells).map(|n| c((n as f64 * k).sin(), 0.0)).collect())
        } else {
            let k = j as f64 * step + FRAC_PI_2;
            let prof = (1..=cells)
                .map(|n| {
                    let n = n as f64;
                    C64::from_polar(1.0, n * k) - C64::from_polar(1.0, -n * (k + PI))
                })
                .collect();
            (c(0.0, 2.0 * sign * g * k.sin()), prof)
        };
        let mut psi: Vec<C64> = profile.iter().enumerate().map(|(n, z)| z * r.powi(n as i32 + 1)).collect();
        let mut phi: Vec<C64> = profile.iter().enumerate().map(|(n, z)| z * r.powi(-(n as i32 + 1))).collect();
        let nrm = norm2(&psi);
        psi.iter_mut().for_each(|z| *z /= nrm);
        let s = dot(&phi, &psi);
        phi.iter_mut().for_each(|z| *z /= s.conj());
        out.values.push(e);
        out.right.push(psi);
        out.left.push(phi);
    }
    Ok(out)
}

fn interior_window(cells: usize) -> Result<(usize, usize)> {
    // one-based [⌈N/4⌉, ⌊3N/4⌋] as zero-based inclusive bounds
    let lo = cells.div_ceil(4).max(1);
    let hi = 3 * cells / 4;
    if hi < lo || hi - lo + 1 < 4 {
        return Err(Error::InsufficientSize { cells, needed: 4 });
    }
    Ok((lo - 1, hi - 1))
}

/// Weighted least-squares line through `(x, y)`; returns `(slope, r²)`.
fn weighted_line(points: &[(f64, f64, f64)]) -> (f64, f64) {
    let sw: f64 = points.iter().map(|p| p.2).sum();
    if sw <= 0.0 || points.len() < 2 {
        return (f64::NAN, 0.0);
    }
    let mx = points.iter().map(|p| p.2 * p.0).sum::<f64>() / sw;
    let my = points.iter().map(|p| p.2 * p.1).sum::<f64>() / sw;
    let sxx: f64 = points.iter().map(|p| p.2 * (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| p.2 * (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = points.iter().map(|p| p.2 * (p.1 - my).powi(2)).sum();
    let slope = sxy / sxx;
    let r2 = if syy > 0.0 { (sxy * sxy / (sxx * syy)).min(1.0) } else { 1.0 };
    (slope, r2)
}

/// Half the slope of `ln|ψ/φ|` along a line of sites; right and left
/// vectors share the same standing-wave modulation, so their ratio isolates
/// the exponential envelope. Sites weigh in with `|ψ||φ|`.
fn ratio_slope(psi: &[C64], phi: &[C64], sites: impl Iterator<Item = (f64, usize)>) -> (f64, f64) {
    let raw: Vec<(f64, f64, f64)> = sites
        .filter_map(|(x, s)| {
            let (a, b) = (psi[s].norm(), phi[s].norm());
            (a > 0.0 && b > 0.0).then(|| (x, (a / b).ln(), a * b))
        })
        .collect();
    let wmax = raw.iter().fold(0.0f64, |m, p| m.max(p.2));
    let pts: Vec<(f64, f64, f64)> = raw.into_iter().filter(|p| p.2 > 1e-10 * wmax).collect();
    let (slope, r2) = weighted_line(&pts);
    (0.5 * slope, r2)
}

/// Per-state decay rate `κ` (per cell, signed: positive grows to the right).
pub fn localization_lengths(system: &BiorthogonalEigensystem, model: &LatticeModel1D) -> Result<EnvelopeFit> {
    let m = model.sublattices;
    if system.right.rows() != model.sites() {
        return Err(Error::Input("eigensystem does not match the model size".into()));
    }
    let (lo, hi) = interior_window(model.cells)?;
    let theoretical_kappa = match crate::gauge::nn_gauge_ratios(model) {
        Ok(r) => r[m].norm().ln(),
        Err(_) => f64::NAN,
    };
    let mut per_state_kappa = Vec::new();
    let mut r_squared = Vec::new();
    for j in 0..system.eigenvalues.len() {
        let psi = system.right.column(j);
        let phi = system.left.column(j);
        // the sublattice carrying most biorthogonal weight in the window
        let sub = (0..m)
            .max_by(|&a, &b| {
                let w = |s: usize| (lo..=hi).map(|n| psi[n * m + s].norm() * phi[n * m + s].norm()).sum::<f64>();
                w(a).total_cmp(&w(b))
            })
            .unwrap_or(0);
        let (k, r2) = ratio_slope(&psi, &phi, (lo..=hi).map(|n| (n as f64, n * m + sub)));
        per_state_kappa.push(k);
        r_squared.push(r2);
    }
    Ok(EnvelopeFit { per_state_kappa, r_squared, theoretical_kappa })
}

/// Decay rates along the bottom row (`κ_x`) and the left column (`κ_y`).
pub fn localization_lengths_2d(system: &BiorthogonalEigensystem, model: &LatticeModel2D) -> Result<EnvelopeFit2D> {
    if system.right.rows() != model.sites() {
        return Err(Error::Input("eigensystem does not match the model size".into()));
    }
    let (xl, xh) = interior_window(model.width)?;
    let (yl, yh) = interior_window(model.height)?;
    let mut kappa_x = Vec::new();
    let mut kappa_y = Vec::new();
    for j in 0..system.eigenvalues.len() {
        let psi = system.right.column(j);
        let phi = system.left.column(j);
        kappa_x.push(ratio_slope(&psi, &phi, (xl..=xh).map(|x| (x as f64, model.site(x, 0)))).0);
        kappa_y.push(ratio_slope(&psi, &phi, (yl..=yh).map(|y| (y as f64, model.site(0, y)))).0);
    }
    let theoretical = (0.5 * (model.right / model.left).norm().ln(), 0.5 * (model.up / model.down).norm().ln());
    Ok(EnvelopeFit2D { kappa_x, kappa_y, theoretical })
}

/// `Σ_pairs |φ₊⟩⟨φ₋| + |φ₋⟩⟨φ₊| + Σ_real c_i |φ_i⟩⟨φ_i|`.
pub fn reconstruct_eta(system: &BiorthogonalEigensystem, phase: &SpectrumPhase, signs: &[i8]) -> Result<Matrix> {
    if system.condition_estimate < EP_THRESHOLD {
        return Err(Error::NearExceptionalPoint { condition: system.condition_estimate });
    }
    if signs.len() != phase.real_indices.len() {
        return Err(Error::Input(format!("expected {} signs, got {}", phase.real_indices.len(), signs.len())));
    }
    let n = system.right.rows();
    let mut eta = Matrix::zeros(n, n);
    let mut add = |a: &[C64], b: &[C64], w: f64| {
        for i in 0..n {
            let row = eta.row_mut(i);
            let ai = a[i] * w;
            for (j, bj) in b.iter().enumerate() {
                row[j] += ai * bj.conj();
            }
        }
    };
    for &(p, q) in &phase.pairing {
        let (fp, fq) = (system.left.column(p), system.left.column(q));
        add(&fp, &fq, 1.0);
        add(&fq, &fp, 1.0);
    }
    for (&i, &s) in phase.real_indices.iter().zip(signs) {
        let f = system.left.column(i);
        add(&f, &f, s as f64);
    }
    Ok(eta)
}

/// `φ_{partner(j)}[n] / ψ_j[n]` at every site and the weight `|ψ||φ|` there.
fn site_ratios(system: &BiorthogonalEigensystem, partners: &[usize]) -> Vec<Vec<(C64, f64)>> {
    let n = system.right.rows();
    (0..partners.len())
        .map(|j| {
            let psi = system.right.column(j);
            let phi = system.left.column(partners[j]);
            (0..n)
                .map(|s| {
                    let w = psi[s].norm() * phi[s].norm();
                    if w > 0.0 {
                        (phi[s] / psi[s], w)
                    } else {
                        (c(0.0, 0.0), 0.0)
                    }
                })
                .collect()
        })
        .collect()
}

/// Site where the weakest state is strongest, used to fix phases and signs.
fn reference_site(ratios: &[Vec<(C64, f64)>]) -> usize {
    let n = ratios.first().map_or(0, |r| r.len());
    let peaks: Vec<f64> = ratios.iter().map(|r| r.iter().fold(0.0f64, |m, p| m.max(p.1))).collect();
    (0..n)
        .max_by(|&a, &b| {
            let score = |s: usize| ratios.iter().zip(&peaks).map(|(r, &pk)| r[s].1 / pk).fold(f64::INFINITY, f64::min);
            score(a).total_cmp(&score(b))
        })
        .unwrap_or(0)
}

/// Signs `c_i` (one per real eigenvalue) for which the rebuilt metric is the
/// gauge metric rather than another member of its family.
pub fn metric_signs(system: &BiorthogonalEigensystem, phase: &SpectrumPhase) -> Vec<i8> {
    let partners = phase.partners(system.eigenvalues.len());
    let ratios = site_ratios(system, &partners);
    let s = reference_site(&ratios);
    phase.real_indices.iter().map(|&i| if ratios[i][s].0.re < 0.0 { -1 } else { 1 }).collect()
}

/// Rescales `ψ_j → a_j ψ_j`, `φ_j → φ_j / ā_j` so that `η ψ_j ∝ φ_{partner(j)}`
/// with one diagonal `η` common to all states.
///
/// Each ratio `φ_{partner(j)}[n]/ψ_j[n]` equals `η[n]/μ_j`; the log-moduli
/// `ln|μ_j|` come from an alternating least-squares fit over all sites and
/// the phases from a single reference site.
pub fn normalize_for_metric(system: &BiorthogonalEigensystem, phase: &SpectrumPhase) -> BiorthogonalEigensystem {
    let len = system.eigenvalues.len();
    let partners = phase.partners(len);
    let ratios = site_ratios(system, &partners);
    let n = system.right.rows();
    let mut site_log = vec![0.0f64; n];
    let mut state_log = vec![0.0f64; len];
    for _ in 0..50 {
        for (s, v) in site_log.iter_mut().enumerate() {
            let (mut num, mut den) = (0.0, 0.0);
            for (j, r) in ratios.iter().enumerate() {
                let (z, w) = r[s];
                if w > 0.0 {
                    num += w * (z.norm().ln() + state_log[j]);
                    den += w;
                }
            }
            if den > 0.0 {
                *v = num / den;
            }
        }
        for (j, r) in ratios.iter().enumerate() {
            let (mut num, mut den) = (0.0, 0.0);
            for (s, &(z, w)) in r.iter().enumerate() {
                if w > 0.0 {
                    num += w * (site_log[s] - z.norm().ln());
                    den += w;
                }
            }
            state_log[j] = num / den;
        }
        let shift = state_log[0];
        state_log.iter_mut().for_each(|v| *v -= shift);
    }
    let s = reference_site(&ratios);
    // μ_j up to one common factor; partners carry exact conjugates
    let mut mu: Vec<C64> = (0..len)
        .map(|j| {
            let z = ratios[j][s].0;
            let ph = if z.norm() > 0.0 { z.conj() / z.norm() } else { c(1.0, 0.0) };
            ph * state_log[j].exp()
        })
        .collect();
    for &(p, q) in &phase.pairing {
        mu[q] = mu[p].conj();
    }
    for &i in &phase.real_indices {
        mu[i] = c(mu[i].re.signum() * mu[i].norm(), 0.0);
    }
    // want a_j · ā_{partner(j)} = 1/μ_j (sign carried by the c_i)
    let mut scale = vec![c(1.0, 0.0); len];
    for &i in &phase.real_indices {
        scale[i] = c(mu[i].norm().recip().sqrt(), 0.0);
    }
    for &(p, q) in &phase.pairing {
        scale[q] = c(1.0, 0.0);
        scale[p] = mu[p].inv();
    }
    let mut right = system.right.clone();
    let mut left = system.left.clone();
    for j in 0..len {
        let a = scale[j];
        right.set_column(j, &system.right.column(j).iter().map(|z| z * a).collect::<Vec<_>>());
        left.set_column(j, &system.left.column(j).iter().map(|z| z / a.conj()).collect::<Vec<_>>());
    }
    BiorthogonalEigensystem { eigenvalues: system.eigenvalues.clone(), right, left, condition_estimate: system.condition_estimate }
}

/// Indices of eigenvalues farther than `gap` from every band sample.
pub fn detect_discrete_levels(values: &[C64], band: &[C64], gap: f64) -> Vec<usize> {
    values.iter().enumerate().filter(|(_, e)| band.iter().all(|b| (*e - b).norm() > gap)).map(|(i, _)| i).collect()
}
