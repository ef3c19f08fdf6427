//! Generalized Brillouin zones: the characteristic polynomial in `β`, its
//! roots, the middle-modulus pair traced over the continuum, and bands swept
//! on a circle.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

#[allow(unused_imports)]
use num_traits::Float;

use crate::gauge::{check_path_independence, GaugeStatus};
use crate::lattice::{bloch_eval, hopping_blocks, BlochMatrix, LatticeModel1D, LatticeModel2D};
use crate::linalg::{c, horner, poly_roots, C64};
use crate::spectral::{eig_full, EP_THRESHOLD};
use crate::{Error, Result};

/// Coefficients whose modulus falls below this fraction of the largest are
/// treated as cancelled.
const TRIM: f64 = 1e-14;

/// Dense polynomial in `(β, E)` with Laurent exponents in `β`.
#[derive(Clone, Debug, PartialEq)]
struct Bivariate {
    /// exponent of `β` at row 0
    low: i64,
    rows: usize,
    /// number of `E` powers (0..cols)
    cols: usize,
    data: Vec<C64>,
}

impl Bivariate {
    fn zero() -> Self {
        Bivariate { low: 0, rows: 1, cols: 1, data: vec![c(0.0, 0.0)] }
    }

    fn is_zero(&self) -> bool {
        self.data.iter().all(|z| z.re == 0.0 && z.im == 0.0)
    }

    fn mul(&self, other: &Bivariate) -> Bivariate {
        let rows = self.rows + other.rows - 1;
        let cols = self.cols + other.cols - 1;
        let mut data = vec![c(0.0, 0.0); rows * cols];
        for (i, row) in self.data.chunks_exact(self.cols).enumerate() {
            for (e, &a) in row.iter().enumerate() {
                if a.re == 0.0 && a.im == 0.0 {
                    continue;
                }
                for (j, orow) in other.data.chunks_exact(other.cols).enumerate() {
                    for (f, &b) in orow.iter().enumerate() {
                        data[(i + j) * cols + e + f] += a * b;
                    }
                }
            }
        }
        Bivariate { low: self.low + other.low, rows, cols, data }
    }

    fn add_scaled(&mut self, other: &Bivariate, s: f64) {
        let low = self.low.min(other.low);
        let high = (self.low + self.rows as i64).max(other.low + other.rows as i64);
        let rows = (high - low) as usize;
        let cols = self.cols.max(other.cols);
        if low != self.low || rows != self.rows || cols != self.cols {
            let mut data = vec![c(0.0, 0.0); rows * cols];
            for i in 0..self.rows {
                let r = (self.low - low) as usize + i;
                data[r * cols..r * cols + self.cols].copy_from_slice(&self.data[i * self.cols..(i + 1) * self.cols]);
            }
            *self = Bivariate { low, rows, cols, data };
        }
        for i in 0..other.rows {
            let r = (other.low - self.low) as usize + i;
            for e in 0..other.cols {
                self.data[r * self.cols + e] += other.data[i * other.cols + e] * s;
            }
        }
    }
}

/// `det(H(β) − E)` as a polynomial in `β` and `E`.
#[derive(Clone, Debug, PartialEq)]
pub struct Characteristic {
    /// Order of the pole at `β = 0`.
    pub pole_order: usize,
    /// Highest power of `β`.
    pub top_order: usize,
    /// `grid[k][e]` multiplies `β^(k − pole_order) E^e`.
    grid: Vec<Vec<C64>>,
}

/// `det(H(β) − E)·β^a` as an ordinary polynomial in `β` at fixed `E`.
#[derive(Clone, Debug, PartialEq)]
pub struct CharPoly {
    /// Ascending in `β`.
    pub coefficients: Vec<C64>,
    pub degree: usize,
    pub energy: C64,
    /// `a`, the shift applied; the continuum lives between roots `a` and `a + 1`.
    pub pole_order: usize,
}

fn heap_permutations(n: usize, mut visit: impl FnMut(&[usize], f64)) {
    let mut p: Vec<usize> = (0..n).collect();
    let mut counters = vec![0usize; n];
    let mut sign = 1.0;
    visit(&p, sign);
    let mut i = 0;
    while i < n {
        if counters[i] < i {
            if i % 2 == 0 {
                p.swap(0, i);
            } else {
                p.swap(counters[i], i);
            }
            sign = -sign;
            visit(&p, sign);
            counters[i] += 1;
            i = 0;
        } else {
            counters[i] = 0;
            i += 1;
        }
    }
}

impl Characteristic {
    /// Leibniz expansion of the determinant over the block structure.
    pub fn new(bm: &BlochMatrix) -> Result<Self> {
        let m = bm.dim;
        if m > 6 {
            return Err(Error::Unsupported("determinant expansion limited to six sublattices"));
        }
        let (lo, hi) = bm.blocks.keys().fold((0i64, 0i64), |(l, h), &k| (l.min(-k), h.max(-k)));
        let rows = (hi - lo + 1) as usize;
        let entries: Vec<Bivariate> = (0..m * m)
            .map(|idx| {
                let (i, j) = (idx / m, idx % m);
                let mut data = vec![c(0.0, 0.0); rows * 2];
                for (&k, block) in &bm.blocks {
                    data[(-k - lo) as usize * 2] += block[(i, j)];
                }
                if i == j {
                    data[(-lo) as usize * 2 + 1] = c(-1.0, 0.0);
                }
                Bivariate { low: lo, rows, cols: 2, data }
            })
            .collect();
        let mut det = Bivariate::zero();
        heap_permutations(m, |perm, sign| {
            let mut term: Option<Bivariate> = None;
            for (i, &j) in perm.iter().enumerate() {
                let e = &entries[i * m + j];
                if e.is_zero() {
                    return;
                }
                term = Some(match term {
                    None => e.clone(),
                    Some(t) => t.mul(e),
                });
            }
            if let Some(t) = term {
                det.add_scaled(&t, sign);
            }
        });
        let peak = det.data.iter().fold(0.0f64, |a, z| a.max(z.norm()));
        det.data.iter_mut().for_each(|z| {
            if z.norm() <= TRIM * peak {
                *z = c(0.0, 0.0);
            }
        });
        let nonzero_row = |r: usize| det.data[r * det.cols..(r + 1) * det.cols].iter().any(|z| z.norm() > 0.0);
        let first = (0..det.rows).find(|&r| nonzero_row(r));
        let last = (0..det.rows).rev().find(|&r| nonzero_row(r));
        let (first, last) = match (first, last) {
            (Some(f), Some(l)) => (f, l),
            _ => return Err(Error::Degenerate("characteristic polynomial vanishes".into())),
        };
        let low = det.low + first as i64;
        let high = det.low + last as i64;
        if low >= 0 || high <= 0 {
            return Err(Error::Degenerate("hoppings run in one direction only".into()));
        }
        let grid = (first..=last).map(|r| det.data[r * det.cols..(r + 1) * det.cols].to_vec()).collect();
        Ok(Characteristic { pole_order: (-low) as usize, top_order: high as usize, grid })
    }

    pub fn for_model(model: &LatticeModel1D) -> Result<Self> {
        Characteristic::new(&hopping_blocks(model)?)
    }

    pub fn degree(&self) -> usize {
        self.grid.len() - 1
    }

    /// Positive and negative ranges differ, so the middle pair is not centred.
    pub fn is_unbalanced(&self) -> bool {
        self.pole_order != self.top_order
    }

    pub fn at(&self, energy: C64) -> Result<CharPoly> {
        let coefficients: Vec<C64> = self.grid.iter().map(|row| horner(row, energy).0).collect();
        let peak = coefficients.iter().fold(0.0f64, |a, z| a.max(z.norm()));
        let d = coefficients.len() - 1;
        if coefficients[0].norm() <= TRIM * peak || coefficients[d].norm() <= TRIM * peak {
            return Err(Error::Degenerate(format!("extremal coefficient vanishes at E = {energy}")));
        }
        Ok(CharPoly { coefficients, degree: d, energy, pole_order: self.pole_order })
    }

    /// `(P, ∂P/∂β, ∂P/∂E)` of the shifted polynomial.
    fn eval(&self, beta: C64, energy: C64) -> (C64, C64, C64) {
        let rows: Vec<(C64, C64)> = self.grid.iter().map(|row| horner(row, energy)).collect();
        let coeffs: Vec<C64> = rows.iter().map(|r| r.0).collect();
        let dcoeffs: Vec<C64> = rows.iter().map(|r| r.1).collect();
        let (p, dp) = horner(&coeffs, beta);
        let (pe, _) = horner(&dcoeffs, beta);
        (p, dp, pe)
    }
}

pub fn char_poly(bm: &BlochMatrix, energy: C64) -> Result<CharPoly> {
    Characteristic::new(bm)?.at(energy)
}

fn sort_roots(roots: &mut [C64]) {
    roots.sort_by(|a, b| a.norm().total_cmp(&b.norm()).then(a.arg().total_cmp(&b.arg())));
}

/// Roots sorted by `(|β|, arg β)`.
pub fn beta_roots(cp: &CharPoly) -> Result<Vec<C64>> {
    if cp.degree == 0 {
        return Err(Error::Input("constant characteristic polynomial".into()));
    }
    let mut roots = poly_roots(&cp.coefficients)?;
    sort_roots(&mut roots);
    Ok(roots)
}

#[derive(Clone, Debug, PartialEq)]
pub struct GbzCurve {
    /// `(E, β)`, two per accepted energy.
    pub points: Vec<(C64, C64)>,
    pub radius: f64,
    pub max_radial_deviation: f64,
    pub theoretical_radius: Option<f64>,
    /// Inputs whose refinement did not land on the middle pair.
    pub rejected: Vec<usize>,
    pub unbalanced: bool,
}

impl GbzCurve {
    pub fn is_circular(&self, tol: f64) -> bool {
        self.max_radial_deviation <= tol * self.radius
    }
}

/// Moves `(E, β)` onto the curve where `β` and `β e^{iθ}` are both roots,
/// holding `θ` fixed. Newton on two complex equations.
fn refine_on_curve(ch: &Characteristic, energy: C64, beta: C64, rot: C64) -> Option<(C64, C64)> {
    let (mut e, mut b) = (energy, beta);
    for _ in 0..60 {
        let (p1, db1, de1) = ch.eval(b, e);
        let (p2, db2, de2) = ch.eval(b * rot, e);
        // [db1, de1; rot·db2, de2] · [Δβ, ΔE] = −[p1, p2]
        let (a11, a12, a21, a22) = (db1, de1, rot * db2, de2);
        let det = a11 * a22 - a12 * a21;
        if det.norm() == 0.0 || !det.is_finite() {
            return None;
        }
        let dbeta = (-p1 * a22 + p2 * a12) / det;
        let de = (-p2 * a11 + p1 * a21) / det;
        b += dbeta;
        e += de;
        if !b.is_finite() || !e.is_finite() {
            return None;
        }
        if dbeta.norm() <= 1e-15 * b.norm() && de.norm() <= 1e-15 * e.norm().max(1.0) {
            return Some((e, b));
        }
    }
    // accept a stalled but tiny step
    let (p1, db1, _) = ch.eval(b, e);
    (p1.norm() <= 1e-12 * db1.norm() * b.norm()).then_some((e, b))
}

/// Middle-pair `β` for each energy, refined onto the exact curve
/// `|β_a| = |β_{a+1}|`, plus a circle fit by the median modulus.
pub fn gbz_points(model: &LatticeModel1D, energies: &[C64]) -> Result<GbzCurve> {
    if energies.is_empty() {
        return Err(Error::Input("no energies given".into()));
    }
    let ch = Characteristic::for_model(model)?;
    let mut points = Vec::new();
    let mut rejected = Vec::new();
    for (idx, &e0) in energies.iter().enumerate() {
        match middle_pair_on_curve(&ch, e0)? {
            Some((e, b1, b2)) => {
                points.push((e, b1));
                points.push((e, b2));
            }
            None => rejected.push(idx),
        }
    }
    if points.is_empty() {
        return Err(Error::Degenerate("no energy reached the continuum curve".into()));
    }
    let mut moduli: Vec<f64> = points.iter().map(|p| p.1.norm()).collect();
    moduli.sort_by(f64::total_cmp);
    let mid = moduli.len() / 2;
    let radius = if moduli.len() % 2 == 1 { moduli[mid] } else { 0.5 * (moduli[mid - 1] + moduli[mid]) };
    let max_radial_deviation = moduli.iter().fold(0.0f64, |m, r| m.max((r - radius).abs()));
    Ok(GbzCurve {
        points,
        radius,
        max_radial_deviation,
        theoretical_radius: theoretical_radius(model).ok(),
        rejected,
        unbalanced: ch.is_unbalanced(),
    })
}

fn middle_pair_on_curve(ch: &Characteristic, e0: C64) -> Result<Option<(C64, C64, C64)>> {
    let a = ch.pole_order;
    let roots = match ch.at(e0) {
        Ok(cp) => beta_roots(&cp)?,
        Err(Error::Degenerate(_)) => return Ok(None),
        Err(e) => return Err(e),
    };
    let (lo, hi) = (roots[a - 1], roots[a]);
    let rot = C64::from_polar(1.0, (hi / lo).arg());
    if (rot - c(1.0, 0.0)).norm() < 1e-6 {
        return Ok(None);
    }
    let start = C64::from_polar((lo.norm() * hi.norm()).sqrt(), lo.arg());
    let Some((e, b)) = refine_on_curve(ch, e0, start, rot) else {
        return Ok(None);
    };
    let partner = b * rot;
    // both must sit at ranks a and a+1 of the refined polynomial
    let cp = match ch.at(e) {
        Ok(cp) => cp,
        Err(_) => return Ok(None),
    };
    let refined = beta_roots(&cp)?;
    let tol = 1e-7 * b.norm();
    let hits = |z: C64| (refined[a - 1] - z).norm() <= tol || (refined[a] - z).norm() <= tol;
    if !(hits(b) && hits(partner)) || (refined[a - 1] - refined[a]).norm() <= tol && (b - partner).norm() > tol {
        return Ok(None);
    }
    Ok(Some((e, b, partner)))
}

/// `√|Π right / Π left|` over nearest-neighbour bonds.
pub fn theoretical_radius(model: &LatticeModel1D) -> Result<f64> {
    model.validate()?;
    if model.right.iter().chain(&model.left).any(|z| z.norm() == 0.0) {
        return Err(Error::Degenerate("zero nearest-neighbour hop".into()));
    }
    if !model.long_range.is_empty() {
        let report = check_path_independence(model);
        match report.status {
            GaugeStatus::Violated => return Err(Error::Violated { residual: report.max_cycle_residual }),
            GaugeStatus::Degenerate => return Err(Error::Degenerate("a long-range hop is one-way".into())),
            _ => {}
        }
    }
    let num: f64 = model.right.iter().map(|z| z.norm()).product();
    let den: f64 = model.left.iter().map(|z| z.norm()).product();
    Ok((num / den).sqrt())
}

#[derive(Clone, Debug, PartialEq)]
pub struct PairingReport {
    pub passed: bool,
    /// Worst relative distance between a reflected root and its match.
    pub max_mismatch: f64,
    pub failing_energy: Option<C64>,
}

/// Checks that the roots at each energy are closed under `β → r_M²/β`.
pub fn beta_pairing_check(model: &LatticeModel1D, energies: &[C64], tol: f64) -> Result<PairingReport> {
    let ch = Characteristic::for_model(model)?;
    let ratio = model.right.iter().zip(&model.left).fold(c(1.0, 0.0), |acc, (r, l)| acc * r / l);
    let mut worst = 0.0f64;
    let mut failing = None;
    for &e in energies {
        let roots = beta_roots(&ch.at(e)?)?;
        let mut pool: Vec<C64> = roots.iter().map(|b| ratio / b).collect();
        let mut local = 0.0f64;
        for b in &roots {
            let (k, d) = pool.iter().enumerate().map(|(k, z)| (k, (z - b).norm() / b.norm().max(1.0))).fold((0, f64::INFINITY), |x, y| {
                if y.1 < x.1 {
                    y
                } else {
                    x
                }
            });
            local = local.max(d);
            pool.swap_remove(k);
        }
        if local > worst {
            worst = local;
            if worst > tol {
                failing.get_or_insert(e);
            }
        }
    }
    Ok(PairingReport { passed: worst <= tol, max_mismatch: worst, failing_energy: failing })
}

/// Bands of `H(r e^{ik})` at `k = 2πj/K`, continued by nearest energy.
#[derive(Clone, Debug, PartialEq)]
pub struct BandSweep {
    pub radius: f64,
    pub k: Vec<f64>,
    /// `bands[λ][j]`; samples in `skipped` are left out of every band.
    pub bands: Vec<Vec<C64>>,
    pub skipped: Vec<usize>,
}

impl BandSweep {
    pub fn samples(&self) -> Vec<C64> {
        self.bands.iter().flatten().copied().collect()
    }
}

pub fn circular_band_sweep(model: &LatticeModel1D, samples: usize, radius: f64) -> Result<BandSweep> {
    if samples == 0 || radius <= 0.0 || !radius.is_finite() {
        return Err(Error::Input("need a positive sample count and radius".into()));
    }
    let bm = hopping_blocks(model)?;
    let mut bands: Vec<Vec<C64>> = vec![Vec::new(); bm.dim];
    let mut k = Vec::new();
    let mut skipped = Vec::new();
    let mut prev: Option<Vec<C64>> = None;
    for j in 0..samples {
        let kj = 2.0 * PI * j as f64 / samples as f64;
        let h = bloch_eval(&bm, C64::from_polar(radius, kj))?;
        let sys = match eig_full(&h) {
            Ok(s) if s.condition_estimate >= EP_THRESHOLD => s,
            Ok(_) | Err(Error::NoConvergence { .. }) => {
                skipped.push(j);
                continue;
            }
            Err(e) => return Err(e),
        };
        let vals = match &prev {
            None => sys.values,
            Some(p) => match_nearest(p, sys.values),
        };
        for (band, v) in bands.iter_mut().zip(&vals) {
            band.push(*v);
        }
        k.push(kj);
        prev = Some(vals);
    }
    Ok(BandSweep { radius, k, bands, skipped })
}

/// Reorders `next` so entry `λ` is the one closest to `prev[λ]`, greedily by distance.
fn match_nearest(prev: &[C64], next: Vec<C64>) -> Vec<C64> {
    let n = prev.len();
    let mut pairs: Vec<(f64, usize, usize)> = Vec::with_capacity(n * n);
    for (i, p) in prev.iter().enumerate() {
        for (j, q) in next.iter().enumerate() {
            pairs.push(((p - q).norm(), i, j));
        }
    }
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut out = vec![c(0.0, 0.0); n];
    let (mut used_i, mut used_j) = (vec![false; n], vec![false; n]);
    for (_, i, j) in pairs {
        if !used_i[i] && !used_j[j] {
            used_i[i] = true;
            used_j[j] = true;
            out[i] = next[j];
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq)]
pub struct SeparableGbz {
    pub radius_x: f64,
    pub radius_y: f64,
    /// `E(k_x, k_y)` on a `samples × samples` grid, `k_x` fastest.
    pub band: Vec<C64>,
}

pub fn gbz_2d_separable(model: &LatticeModel2D, samples: usize) -> Result<SeparableGbz> {
    model.validate()?;
    if model.has_diagonal() {
        return Err(Error::NotSeparable);
    }
    for z in [model.right, model.left, model.up, model.down] {
        if z.norm() == 0.0 {
            return Err(Error::Degenerate("zero lattice hop".into()));
        }
    }
    let radius_x = (model.right / model.left).norm().sqrt();
    let radius_y = (model.up / model.down).norm().sqrt();
    let axis = |fwd: C64, bwd: C64, r: f64| -> Vec<C64> {
        (0..samples)
            .map(|j| {
                let beta = C64::from_polar(r, 2.0 * PI * j as f64 / samples as f64);
                fwd / beta + bwd * beta
            })
            .collect()
    };
    let ex = axis(model.right, model.left, radius_x);
    let ey = axis(model.up, model.down, radius_y);
    let band = ey.iter().flat_map(|y| ex.iter().map(move |x| x + y)).collect();
    Ok(SeparableGbz { radius_x, radius_y, band })
}

/// `N·ln(|β_{a+1}|/|β_a|)` for each energy: near zero on the continuum,
/// of order `N` for levels bound to an edge.
pub fn middle_root_gaps(model: &LatticeModel1D, energies: &[C64]) -> Result<Vec<f64>> {
    let ch = Characteristic::for_model(model)?;
    let a = ch.pole_order;
    energies
        .iter()
        .map(|&e| {
            let roots = beta_roots(&ch.at(e)?)?;
            Ok(model.cells as f64 * (roots[a].norm() / roots[a - 1].norm()).ln())
        })
        .collect()
}

/// Indices of energies whose middle root gap exceeds `threshold`.
pub fn discrete_levels_by_root_gap(model: &LatticeModel1D, energies: &[C64], threshold: f64) -> Result<Vec<usize>> {
    Ok(middle_root_gaps(model, energies)?.into_iter().enumerate().filter(|&(_, g)| g > threshold).map(|(i, _)| i).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{build_real_space, Boundary, LongRangeHop};

    fn chain(right: &[f64], left: &[f64], cells: usize) -> LatticeModel1D {
        LatticeModel1D::from_real(right, left, cells, Boundary::Open).unwrap()
    }

    fn third_neighbour(extra: f64, cells: usize) -> LatticeModel1D {
        let fwd = 0.1;
        let bwd = fwd * (0.25f64 / 0.35).powi(3) + extra;
        let hop = LongRangeHop { source: 0, target: 0, cells: 3, forward: c(fwd, 0.0), backward: c(bwd, 0.0) };
        chain(&[0.35], &[0.25], cells).with_long_range(vec![hop]).unwrap()
    }

    /// Independent determinant: Gaussian elimination on `H(β) − E`.
    fn det_direct(model: &LatticeModel1D, beta: C64, e: C64) -> C64 {
        let bm = hopping_blocks(model).unwrap();
        let mut h = bloch_eval(&bm, beta).unwrap();
        for i in 0..bm.dim {
            h[(i, i)] -= e;
        }
        crate::linalg::Lu::new(&h).determinant()
    }

    #[test]
    fn hatano_nelson_quadratic() {
        let cp = Characteristic::for_model(&chain(&[2.0], &[0.5], 4)).unwrap().at(c(0.3, 0.1)).unwrap();
        assert_eq!(cp.coefficients, vec![c(2.0, 0.0), c(-0.3, -0.1), c(0.5, 0.0)]);
        assert_eq!(cp.pole_order, 1);
    }

    #[test]
    fn expansion_agrees_with_elimination() {
        let models = [
            chain(&[0.7, -1.3, 0.4], &[1.1, 0.6, -0.9], 4),
            third_neighbour(0.014, 4),
            chain(&[0.3, 0.8, -1.2, 0.5], &[0.9, -0.2, 1.4, 0.6], 3),
        ];
        for m in &models {
            let ch = Characteristic::for_model(m).unwrap();
            for (beta, e) in [(c(0.7, 0.4), c(0.1, -0.3)), (c(-1.3, 0.2), c(0.8, 0.0))] {
                let (p, _, _) = ch.eval(beta, e);
                let want = det_direct(m, beta, e) * beta.powi(ch.pole_order as i32);
                assert!((p - want).norm() < 1e-12 * want.norm().max(1.0), "{p} vs {want}");
            }
        }
    }

    #[test]
    fn third_neighbour_degree_six() {
        let ch = Characteristic::for_model(&third_neighbour(0.0, 4)).unwrap();
        assert_eq!(ch.degree(), 6);
        assert_eq!(ch.pole_order, 3);
        assert!(!ch.is_unbalanced());
    }

    #[test]
    fn reciprocal_trimer_is_conjugate_palindromic() {
        let cp = Characteristic::for_model(&chain(&[0.4, 0.9, 0.7], &[0.4, 0.9, 0.7], 2)).unwrap().at(c(0.0, 0.0)).unwrap();
        let d = cp.degree;
        for k in 0..=d {
            assert!((cp.coefficients[k] - cp.coefficients[d - k].conj()).norm() < 1e-14);
        }
    }

    #[test]
    fn one_way_chain_is_degenerate() {
        let m = LatticeModel1D::new(vec![c(1.0, 0.0)], vec![c(0.0, 0.0)], 3, Boundary::Open).unwrap();
        assert!(matches!(Characteristic::for_model(&m), Err(Error::Degenerate(_))));
    }

    #[test]
    fn roots_obey_vieta_and_pairing() {
        let cp = Characteristic::for_model(&chain(&[0.35], &[0.25], 4)).unwrap().at(c(0.2, 0.4)).unwrap();
        let roots = beta_roots(&cp).unwrap();
        assert!((roots[0] * roots[1] - c(0.35 / 0.25, 0.0)).norm() < 1e-14);
        assert!(roots[0].norm() <= roots[1].norm());
    }

    #[test]
    fn third_neighbour_roots_are_roots() {
        let ch = Characteristic::for_model(&third_neighbour(0.0, 4)).unwrap();
        let cp = ch.at(c(0.4, -0.2)).unwrap();
        let roots = beta_roots(&cp).unwrap();
        assert_eq!(roots.len(), 6);
        for w in roots.windows(2) {
            assert!(w[0].norm() <= w[1].norm());
        }
        for r in roots {
            assert!(horner(&cp.coefficients, r).0.norm() < 1e-9);
        }
    }

    fn obc_energies(model: &LatticeModel1D) -> Vec<C64> {
        eig_full(&build_real_space(model).unwrap()).unwrap().values
    }

    #[test]
    fn circular_gbz_of_satisfied_third_neighbour() {
        let m = third_neighbour(0.0, 40);
        let curve = gbz_points(&m, &obc_energies(&m)).unwrap();
        let want = (0.35f64 / 0.25).sqrt();
        assert!((curve.radius - want).abs() < 1e-6 * want, "{}", curve.radius);
        assert!(curve.max_radial_deviation < 1e-6 * want);
        assert_eq!(curve.theoretical_radius, Some(want));
    }

    #[test]
    fn violated_third_neighbour_is_not_circular() {
        let m = third_neighbour(0.014, 40);
        let curve = gbz_points(&m, &obc_energies(&m)).unwrap();
        assert!(!curve.is_circular(1e-2));
        assert!(curve.theoretical_radius.is_none());
        assert!(matches!(theoretical_radius(&m), Err(Error::Violated { .. })));
    }

    #[test]
    fn broken_phase_trimer_gbz_is_circular() {
        let m = chain(&[0.4, 0.9, 1.0], &[2.025, -0.4, 1.0], 40);
        let curve = gbz_points(&m, &obc_energies(&m)).unwrap();
        assert!((curve.radius - 2.0 / 3.0).abs() < 1e-6);
        assert!(curve.max_radial_deviation < 1e-6);
    }

    #[test]
    fn radius_ignores_phases() {
        let m = LatticeModel1D::new(vec![C64::from_polar(0.35, 0.7)], vec![C64::from_polar(0.25, -1.9)], 4, Boundary::Open).unwrap();
        assert!((theoretical_radius(&m).unwrap() - (1.4f64).sqrt()).abs() < 1e-15);
        assert_eq!(theoretical_radius(&chain(&[0.3, 0.8], &[0.3, 0.8], 3)).unwrap(), 1.0);
    }

    #[test]
    fn pairing_holds_for_chains_only() {
        let energies = [c(0.1, 0.0), c(-0.4, 0.3), c(1.2, -0.7)];
        let m = chain(&[0.4, 0.9, 0.7], &[2.025, -0.4, 0.7], 4);
        assert!(beta_pairing_check(&m, &energies, 1e-8).unwrap().passed);
        let bad = third_neighbour(0.014, 4);
        assert!(!beta_pairing_check(&bad, &energies, 1e-8).unwrap().passed);
    }

    #[test]
    fn hatano_nelson_bands_on_circle() {
        let (l, r) = (0.5, 2.0);
        let m = chain(&[r], &[l], 4);
        let sweep = circular_band_sweep(&m, 64, theoretical_radius(&m).unwrap()).unwrap();
        for (j, k) in sweep.k.iter().enumerate() {
            assert!((sweep.bands[0][j] - c(2.0 * k.cos(), 0.0)).norm() < 1e-14);
        }
        let m = chain(&[1.0], &[-1.0], 4);
        let sweep = circular_band_sweep(&m, 64, 1.0).unwrap();
        for (j, k) in sweep.k.iter().enumerate() {
            assert!((sweep.bands[0][j] - c(0.0, -2.0 * k.sin())).norm() < 1e-14);
        }
    }

    #[test]
    fn open_spectrum_hugs_swept_bands() {
        let m = chain(&[0.4, 0.9, 0.5], &[2.025, -0.4, 0.5], 40);
        let band = circular_band_sweep(&m, 512, theoretical_radius(&m).unwrap()).unwrap().samples();
        let gaps = middle_root_gaps(&m, &obc_energies(&m)).unwrap();
        for (e, g) in obc_energies(&m).iter().zip(gaps) {
            if g < 1.0 {
                let d = band.iter().map(|b| (b - e).norm()).fold(f64::INFINITY, f64::min);
                assert!(d < 0.2, "{e} at {d}");
            }
        }
    }

    #[test]
    fn separable_square_lattice() {
        let m = LatticeModel2D::from_real(4, 4, 0.2, 0.4, 0.35, 0.65).unwrap();
        let g = gbz_2d_separable(&m, 16).unwrap();
        assert!((g.radius_x - 0.5f64.sqrt()).abs() < 1e-15);
        assert!((g.radius_y - (0.35f64 / 0.65).sqrt()).abs() < 1e-15);
        assert!(g.band.iter().all(|z| z.im.abs() < 1e-14));
        let with_diag = m.with_diagonal(c(0.5, 0.0), c(0.1, 0.0));
        assert!(matches!(gbz_2d_separable(&with_diag, 16), Err(Error::NotSeparable)));
        let herm = LatticeModel2D::from_real(3, 3, 0.7, 0.7, 0.2, 0.2).unwrap();
        let g = gbz_2d_separable(&herm, 8).unwrap();
        assert_eq!((g.radius_x, g.radius_y), (1.0, 1.0));
    }

    #[test]
    fn scaling_divides_beta() {
        // uniform gauge factor a per cell: right → right/a, left → left·a
        let a = 1.7;
        let m = chain(&[0.4, 0.9, 0.7], &[2.025, -0.4, 0.7], 40);
        let scaled = chain(&[0.4, 0.9, 0.7 / a], &[2.025, -0.4, 0.7 * a], 40);
        let e = c(0.3, 0.2);
        let r1 = beta_roots(&Characteristic::for_model(&m).unwrap().at(e).unwrap()).unwrap();
        let r2 = beta_roots(&Characteristic::for_model(&scaled).unwrap().at(e).unwrap()).unwrap();
        for (x, y) in r1.iter().zip(&r2) {
            assert!((x / a - y).norm() < 1e-12 * y.norm());
        }
    }
}
