//! Imaginary gauge transformations, the diagonal metric they induce, and the
//! path-independence test that decides whether such a gauge exists.

use alloc::collections::{BTreeMap, VecDeque};
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::lattice::{build_real_space, LatticeModel1D, LatticeModel2D};
use crate::linalg::{c, Matrix, C64};
use crate::{Error, Result};

/// Relative tolerance on cycle products, modulus and phase alike.
pub const CYCLE_TOLERANCE: f64 = 1e-9;

/// Diagonal similarity `S` with `S[cell·M + sub] = sub_factors[sub] · cell_factor^(cell+1)`.
#[derive(Clone, Debug, PartialEq)]
pub struct IgtScaling {
    pub cell_factor: C64,
    pub sub_factors: Vec<C64>,
    pub diag: Vec<C64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Definiteness {
    PositiveDefinite,
    Indefinite,
}

/// Diagonal metric `η_I = S⁻²` of a real chain.
#[derive(Clone, Debug, PartialEq)]
pub struct EtaMetric {
    pub diag: Vec<f64>,
    pub definiteness: Definiteness,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GaugeStatus {
    Hermitizable,
    EtaPseudo,
    ComplexScalable,
    Violated,
    Degenerate,
}

impl GaugeStatus {
    pub fn label(self) -> &'static str {
        match self {
            GaugeStatus::Hermitizable => "HERMITIZABLE",
            GaugeStatus::EtaPseudo => "ETA_I_PSEUDO",
            GaugeStatus::ComplexScalable => "COMPLEX_SCALABLE",
            GaugeStatus::Violated => "VIOLATED",
            GaugeStatus::Degenerate => "DEGENERATE",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GaugeReport {
    pub status: GaugeStatus,
    /// Squared site scales, present when the graph is cycle-consistent.
    pub site_potentials: Option<Vec<C64>>,
    /// Edges `(site, site)` of the worst inconsistent cycle.
    pub violating_cycle: Vec<(usize, usize)>,
    pub max_cycle_residual: f64,
}

fn is_zero(z: C64) -> bool {
    z.re == 0.0 && z.im == 0.0
}

fn nn_nonzero(model: &LatticeModel1D) -> Result<()> {
    for (k, (r, l)) in model.right.iter().zip(&model.left).enumerate() {
        if is_zero(*r) || is_zero(*l) {
            return Err(Error::Degenerate(format!("nearest-neighbour bond {} has a zero hop", k + 1)));
        }
    }
    Ok(())
}

/// `r_0 = 1` and `r_i = √(Π_{k≤i} right_k / Π_{k≤i} left_k)`, principal branch.
pub fn nn_gauge_ratios(model: &LatticeModel1D) -> Result<Vec<C64>> {
    model.validate()?;
    nn_nonzero(model)?;
    let mut out = Vec::with_capacity(model.sublattices + 1);
    out.push(c(1.0, 0.0));
    let mut ratio = c(1.0, 0.0);
    for (r, l) in model.right.iter().zip(&model.left) {
        ratio *= r / l;
        out.push(ratio.sqrt());
    }
    Ok(out)
}

pub fn build_igt(model: &LatticeModel1D) -> Result<IgtScaling> {
    let r = nn_gauge_ratios(model)?;
    let m = model.sublattices;
    let cell_factor = r[m];
    let sub_factors = r[..m].to_vec();
    let mut diag = Vec::with_capacity(model.sites());
    let mut cell_pow = cell_factor;
    for _ in 0..model.cells {
        for s in &sub_factors {
            diag.push(s * cell_pow);
        }
        cell_pow *= cell_factor;
    }
    Ok(IgtScaling { cell_factor, sub_factors, diag })
}

/// `R_0 = 1`, `R_i = Π_{k≤i} left_k / Π_{k≤i} right_k`.
fn metric_ratios(model: &LatticeModel1D) -> Vec<f64> {
    let mut out = vec![1.0];
    let mut ratio = 1.0;
    for (r, l) in model.right.iter().zip(&model.left) {
        ratio *= l.re / r.re;
        out.push(ratio);
    }
    out
}

pub fn build_eta_i(model: &LatticeModel1D) -> Result<EtaMetric> {
    model.validate()?;
    if !model.is_real() {
        return Err(Error::Unsupported("η_I is only Hermitian for real hoppings"));
    }
    nn_nonzero(model)?;
    if !model.long_range.is_empty() {
        let report = check_path_independence(model);
        match report.status {
            GaugeStatus::Violated => return Err(Error::Violated { residual: report.max_cycle_residual }),
            GaugeStatus::Degenerate => return Err(Error::Degenerate("a long-range hop is one-way".into())),
            _ => {}
        }
    }
    let ratios = metric_ratios(model);
    let m = model.sublattices;
    let cell = ratios[m];
    let mut diag = Vec::with_capacity(model.sites());
    let mut cell_pow = cell;
    for _ in 0..model.cells {
        for r in &ratios[..m] {
            diag.push(r * cell_pow);
        }
        cell_pow *= cell;
    }
    let definiteness = if ratios[1..].iter().all(|&r| r > 0.0) { Definiteness::PositiveDefinite } else { Definiteness::Indefinite };
    Ok(EtaMetric { diag, definiteness })
}

/// Frobenius norm of `ηH − Hᴴη` for diagonal `η`.
pub fn pseudo_hermiticity_residual(h: &Matrix, eta: &[f64]) -> f64 {
    assert!(h.is_square() && h.rows() == eta.len(), "dimension mismatch");
    let n = h.rows();
    let mut acc = Matrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            acc[(i, j)] = h[(i, j)] * eta[i] - h[(j, i)].conj() * eta[j];
        }
    }
    acc.frobenius_norm()
}

/// `S⁻¹HS` for a chain in its PT-exact regime.
pub fn hermitian_counterpart(model: &LatticeModel1D) -> Result<Matrix> {
    model.validate()?;
    if !model.is_real() {
        return Err(Error::Unsupported("Hermitian counterpart needs real hoppings"));
    }
    nn_nonzero(model)?;
    for (k, (r, l)) in model.right.iter().zip(&model.left).enumerate() {
        let product = r.re * l.re;
        if product <= 0.0 {
            return Err(Error::PtBroken { bond: k + 1, product });
        }
    }
    if !model.long_range.is_empty() {
        let report = check_path_independence(model);
        match report.status {
            GaugeStatus::Hermitizable => {}
            GaugeStatus::Degenerate => return Err(Error::Degenerate("a long-range hop is one-way".into())),
            _ => return Err(Error::Violated { residual: report.max_cycle_residual }),
        }
    }
    let s = build_igt(model)?;
    let h = build_real_space(model)?;
    Ok(similarity(&h, &s.diag))
}

/// `S⁻¹HS` for diagonal `S`.
pub fn similarity(h: &Matrix, s: &[C64]) -> Matrix {
    Matrix::from_fn(h.rows(), h.cols(), |i, j| {
        let z = h[(i, j)];
        if is_zero(z) {
            z
        } else {
            z * s[j] / s[i]
        }
    })
}

/// Anything with a finite open-boundary hopping graph.
pub trait HoppingGraph {
    fn site_count(&self) -> usize;
    /// Directed hops `(from, to, amplitude)` under open boundaries.
    fn open_hops(&self) -> Vec<(usize, usize, C64)>;
}

impl HoppingGraph for LatticeModel1D {
    fn site_count(&self) -> usize {
        self.sites()
    }
    fn open_hops(&self) -> Vec<(usize, usize, C64)> {
        self.with_boundary(crate::lattice::Boundary::Open).hops()
    }
}

impl HoppingGraph for LatticeModel2D {
    fn site_count(&self) -> usize {
        self.sites()
    }
    fn open_hops(&self) -> Vec<(usize, usize, C64)> {
        self.hops()
    }
}

struct Edge {
    a: usize,
    b: usize,
    /// amplitude a → b over amplitude b → a
    ratio: C64,
}

/// Assigns squared scales along a breadth-first spanning tree from site 0 and
/// tests every remaining edge against them.
pub fn check_path_independence<G: HoppingGraph + ?Sized>(graph: &G) -> GaugeReport {
    let n = graph.site_count();
    // accumulate parallel hops per unordered pair
    let mut pairs: BTreeMap<(usize, usize), (C64, C64)> = BTreeMap::new();
    for (from, to, t) in graph.open_hops() {
        if from == to {
            continue;
        }
        let key = (from.min(to), from.max(to));
        let e = pairs.entry(key).or_insert((c(0.0, 0.0), c(0.0, 0.0)));
        if from < to {
            e.0 += t;
        } else {
            e.1 += t;
        }
    }
    let mut edges = Vec::new();
    for (&(a, b), &(fwd, bwd)) in &pairs {
        if is_zero(fwd) && is_zero(bwd) {
            continue;
        }
        if is_zero(fwd) || is_zero(bwd) {
            return GaugeReport {
                status: GaugeStatus::Degenerate,
                site_potentials: None,
                violating_cycle: vec![(a, b)],
                max_cycle_residual: 0.0,
            };
        }
        edges.push(Edge { a, b, ratio: fwd / bwd });
    }
    let mut adj: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
    for (k, e) in edges.iter().enumerate() {
        adj[e.a].push((e.b, k));
        adj[e.b].push((e.a, k));
    }
    for list in adj.iter_mut() {
        list.sort_unstable();
    }
    let mut scale = vec![c(0.0, 0.0); n];
    let mut seen = vec![false; n];
    let mut in_tree = vec![false; edges.len()];
    let mut queue = VecDeque::new();
    for root in 0..n {
        if seen[root] {
            continue;
        }
        seen[root] = true;
        scale[root] = c(1.0, 0.0);
        queue.push_back(root);
        while let Some(u) = queue.pop_front() {
            for &(v, k) in &adj[u] {
                if seen[v] {
                    continue;
                }
                seen[v] = true;
                in_tree[k] = true;
                scale[v] = scale[u] * directed_ratio(&edges[k], u);
                queue.push_back(v);
            }
        }
    }
    let mut worst = 0.0f64;
    let mut worst_edge = None;
    for (k, e) in edges.iter().enumerate() {
        if in_tree[k] {
            continue;
        }
        let q = scale[e.b] / (scale[e.a] * e.ratio);
        let res = (q.norm() - 1.0).abs().max(q.arg().abs());
        if res > worst {
            worst = res;
            worst_edge = Some(k);
        }
    }
    if worst > CYCLE_TOLERANCE {
        let k = worst_edge.expect("a residual implies an edge");
        let cycle = shortest_cycle(&edges[k], k, &adj);
        return GaugeReport { status: GaugeStatus::Violated, site_potentials: None, violating_cycle: cycle, max_cycle_residual: worst };
    }
    let real = edges.iter().all(|e| e.ratio.im.abs() <= CYCLE_TOLERANCE * e.ratio.norm());
    let positive = real && edges.iter().all(|e| e.ratio.re > 0.0);
    let status = if positive {
        GaugeStatus::Hermitizable
    } else if real {
        GaugeStatus::EtaPseudo
    } else {
        GaugeStatus::ComplexScalable
    };
    GaugeReport { status, site_potentials: Some(scale), violating_cycle: Vec::new(), max_cycle_residual: worst }
}

fn directed_ratio(e: &Edge, from: usize) -> C64 {
    if from == e.a {
        e.ratio
    } else {
        e.ratio.inv()
    }
}

/// Shortest cycle through `closing`: a breadth-first path from `b` back to `a`
/// that avoids the edge itself, closed by it.
fn shortest_cycle(closing: &Edge, index: usize, adj: &[Vec<(usize, usize)>]) -> Vec<(usize, usize)> {
    let n = adj.len();
    let mut prev: Vec<Option<usize>> = vec![None; n];
    let mut seen = vec![false; n];
    let mut queue = VecDeque::new();
    seen[closing.b] = true;
    queue.push_back(closing.b);
    while let Some(u) = queue.pop_front() {
        if u == closing.a {
            break;
        }
        for &(v, k) in &adj[u] {
            if k != index && !seen[v] {
                seen[v] = true;
                prev[v] = Some(u);
                queue.push_back(v);
            }
        }
    }
    // walk a ← … ← b, which read forwards is a → … → b
    let mut cycle = Vec::new();
    let mut u = closing.a;
    while let Some(p) = prev[u] {
        cycle.push((u, p));
        u = p;
    }
    cycle.push((closing.b, closing.a));
    cycle
}

/// Gauge factors `r_x^(x+1) · r_y^(y+1)` of a square lattice.
#[derive(Clone, Debug, PartialEq)]
pub struct Gauge2D {
    pub rx: C64,
    pub ry: C64,
    pub factors: Vec<C64>,
}

pub fn solve_gauge_2d(model: &LatticeModel2D) -> Result<Gauge2D> {
    model.validate()?;
    let report = check_path_independence(model);
    match report.status {
        GaugeStatus::Violated => return Err(Error::Violated { residual: report.max_cycle_residual }),
        GaugeStatus::Degenerate => return Err(Error::Degenerate("a lattice hop is one-way".into())),
        _ => {}
    }
    let rx = (model.right / model.left).sqrt();
    let ry = (model.up / model.down).sqrt();
    let mut factors = Vec::with_capacity(model.sites());
    for y in 0..model.height {
        for x in 0..model.width {
            factors.push(rx.powi(x as i32 + 1) * ry.powi(y as i32 + 1));
        }
    }
    Ok(Gauge2D { rx, ry, factors })
}

/// `g = R·η_I`, the product of the full-chain reflection and the gauge metric.
pub fn reflection_symmetry_generator(model: &LatticeModel1D) -> Result<Matrix> {
    let eta = build_eta_i(model)?;
    let m = model.sublattices;
    let scale = model.right.iter().chain(&model.left).fold(0.0f64, |a, z| a.max(z.norm()));
    let mut defect = 0.0f64;
    for i in 1..m {
        // bond i pairs with bond M−i (one-based)
        let (a, b) = (i - 1, m - i - 1);
        defect = defect.max((model.right[a] - model.right[b]).norm()).max((model.left[a] - model.left[b]).norm());
    }
    if defect > 1e-12 * scale {
        return Err(Error::SymmetryAbsent { defect });
    }
    let h = build_real_space(model)?;
    let n = h.rows();
    let g = Matrix::from_fn(n, n, |i, j| if i + j == n - 1 { c(eta.diag[j], 0.0) } else { c(0.0, 0.0) });
    let comm = g.matmul(&h).sub(&h.matmul(&g)).frobenius_norm();
    let gnorm = g.frobenius_norm();
    if comm > 1e-10 * h.frobenius_norm() * gnorm.max(1.0) {
        return Err(Error::SymmetryAbsent { defect: comm });
    }
    Ok(g)
}
