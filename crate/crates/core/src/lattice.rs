//! Lattice models and their real-space and Bloch Hamiltonians.
//!
//! Sublattice and cell indices are zero-based. Site `(cell, sub)` of a chain
//! sits at row `cell·M + sub`; site `(x, y)` of a square lattice at
//! `y·width + x`. Matrix entry `(b, a)` holds the amplitude of the hop `a → b`.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec::Vec;

use crate::linalg::{c, Matrix, C64};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Boundary {
    Open,
    Periodic,
}

/// Extra hop between sublattice `source` of cell `n` and sublattice `target`
/// of cell `n + cells`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LongRangeHop {
    pub source: usize,
    pub target: usize,
    pub cells: usize,
    /// Amplitude of `(n, source) → (n + cells, target)`.
    pub forward: C64,
    /// Amplitude of the reverse hop.
    pub backward: C64,
}

impl LongRangeHop {
    /// Site offset of the forward hop.
    pub fn offset(&self, sublattices: usize) -> i64 {
        (self.cells * sublattices) as i64 + self.target as i64 - self.source as i64
    }
}

/// Chain with `sublattices` sites per cell and nearest-neighbour hops
/// `right[i]` (site i → i+1) and `left[i]` (i+1 → i); the last entry of each
/// is the intercell bond.
#[derive(Clone, Debug, PartialEq)]
pub struct LatticeModel1D {
    pub sublattices: usize,
    pub cells: usize,
    pub right: Vec<C64>,
    pub left: Vec<C64>,
    pub long_range: Vec<LongRangeHop>,
    pub boundary: Boundary,
}

impl LatticeModel1D {
    pub fn new(right: Vec<C64>, left: Vec<C64>, cells: usize, boundary: Boundary) -> Result<Self> {
        let m = LatticeModel1D { sublattices: right.len(), cells, right, left, long_range: Vec::new(), boundary };
        m.validate()?;
        Ok(m)
    }

    pub fn from_real(right: &[f64], left: &[f64], cells: usize, boundary: Boundary) -> Result<Self> {
        Self::new(right.iter().map(|&x| c(x, 0.0)).collect(), left.iter().map(|&x| c(x, 0.0)).collect(), cells, boundary)
    }

    pub fn with_long_range(mut self, hops: Vec<LongRangeHop>) -> Result<Self> {
        self.long_range = hops;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        let m = self.sublattices;
        if m == 0 {
            return Err(Error::Input("a cell needs at least one sublattice".into()));
        }
        if self.cells == 0 {
            return Err(Error::Input("a chain needs at least one cell".into()));
        }
        if self.right.len() != m {
            return Err(Error::Input(format!("right hops: expected {m} entries, found {}", self.right.len())));
        }
        if self.left.len() != m {
            return Err(Error::Input(format!("left hops: expected {m} entries, found {}", self.left.len())));
        }
        for (k, h) in self.long_range.iter().enumerate() {
            if h.source >= m || h.target >= m {
                return Err(Error::Input(format!("long-range hop {k}: sublattice index out of range")));
            }
            if h.offset(m) == 0 {
                return Err(Error::Input(format!("long-range hop {k}: connects a site to itself")));
            }
        }
        let finite = |z: &C64| z.re.is_finite() && z.im.is_finite();
        let all = self.right.iter().chain(&self.left).chain(self.long_range.iter().flat_map(|h| [&h.forward, &h.backward]));
        if !all.into_iter().all(finite) {
            return Err(Error::Input("hopping amplitudes must be finite".into()));
        }
        Ok(())
    }

    pub fn sites(&self) -> usize {
        self.sublattices * self.cells
    }

    /// True iff every amplitude has zero imaginary part.
    pub fn is_real(&self) -> bool {
        self.right.iter().chain(&self.left).all(|z| z.im == 0.0)
            && self.long_range.iter().all(|h| h.forward.im == 0.0 && h.backward.im == 0.0)
    }

    /// Swaps every forward amplitude with its reverse.
    pub fn transposed(&self) -> Self {
        let mut t = self.clone();
        core::mem::swap(&mut t.right, &mut t.left);
        for h in &mut t.long_range {
            core::mem::swap(&mut h.forward, &mut h.backward);
        }
        t
    }

    pub fn with_cells(&self, cells: usize) -> Self {
        LatticeModel1D { cells, ..self.clone() }
    }

    pub fn with_boundary(&self, boundary: Boundary) -> Self {
        LatticeModel1D { boundary, ..self.clone() }
    }

    /// Every directed hop as `(from_site, to_site, amplitude)`, long-range
    /// included, for the model's boundary condition. Wrapped duplicates stay
    /// separate entries.
    pub fn hops(&self) -> Vec<(usize, usize, C64)> {
        let m = self.sublattices;
        let n = self.cells;
        let periodic = self.boundary == Boundary::Periodic;
        let mut out = Vec::new();
        let site = |cell: usize, sub: usize| cell * m + sub;
        for cell in 0..n {
            for sub in 0..m {
                let (to_cell, to_sub) = if sub + 1 < m { (cell, sub + 1) } else { (cell + 1, 0) };
                let to_cell = if to_cell < n {
                    to_cell
                } else if periodic {
                    to_cell % n
                } else {
                    continue;
                };
                let a = site(cell, sub);
                let b = site(to_cell, to_sub);
                out.push((a, b, self.right[sub]));
                out.push((b, a, self.left[sub]));
            }
            for h in &self.long_range {
                let to_cell = cell + h.cells;
                let to_cell = if to_cell < n {
                    to_cell
                } else if periodic {
                    to_cell % n
                } else {
                    continue;
                };
                let a = site(cell, h.source);
                let b = site(to_cell, h.target);
                out.push((a, b, h.forward));
                out.push((b, a, h.backward));
            }
        }
        out
    }
}

/// Real-space Hamiltonian of a chain.
pub fn build_real_space(model: &LatticeModel1D) -> Result<Matrix> {
    model.validate()?;
    let dim = model.sites();
    let mut h = Matrix::zeros(dim, dim);
    for (a, b, t) in model.hops() {
        h[(b, a)] += t;
    }
    Ok(h)
}

/// Laurent-polynomial matrix `H(β) = Σ_m T_m β^{-m}`.
///
/// `T_m[(b, a)]` is the amplitude for sublattice `a` of cell `n` to reach
/// sublattice `b` of cell `n + m`.
#[derive(Clone, Debug, PartialEq)]
pub struct BlochMatrix {
    pub dim: usize,
    pub blocks: BTreeMap<i64, Matrix>,
}

impl BlochMatrix {
    /// Longest hopping range in cells.
    pub fn range(&self) -> i64 {
        self.blocks.keys().map(|m| m.abs()).max().unwrap_or(0)
    }

    pub fn block(&self, m: i64) -> Option<&Matrix> {
        self.blocks.get(&m)
    }

    /// Largest positive and largest negative offset present (as magnitudes).
    pub fn extent(&self) -> (i64, i64) {
        let fwd = self.blocks.keys().copied().filter(|&m| m > 0).max().unwrap_or(0);
        let bwd = self.blocks.keys().copied().filter(|&m| m < 0).min().map(|m| -m).unwrap_or(0);
        (fwd, bwd)
    }

    fn add(&mut self, m: i64, row: usize, col: usize, t: C64) {
        if t.re == 0.0 && t.im == 0.0 {
            return;
        }
        let dim = self.dim;
        let blk = self.blocks.entry(m).or_insert_with(|| Matrix::zeros(dim, dim));
        blk[(row, col)] += t;
    }
}

pub fn hopping_blocks(model: &LatticeModel1D) -> Result<BlochMatrix> {
    model.validate()?;
    let m = model.sublattices;
    let mut bm = BlochMatrix { dim: m, blocks: BTreeMap::new() };
    for sub in 0..m {
        let (to_sub, dc) = if sub + 1 < m { (sub + 1, 0) } else { (0, 1) };
        bm.add(dc, to_sub, sub, model.right[sub]);
        bm.add(-dc, sub, to_sub, model.left[sub]);
    }
    for h in &model.long_range {
        let dc = h.cells as i64;
        bm.add(dc, h.target, h.source, h.forward);
        bm.add(-dc, h.source, h.target, h.backward);
    }
    Ok(bm)
}

pub fn bloch_eval(bm: &BlochMatrix, beta: C64) -> Result<Matrix> {
    if beta.norm() == 0.0 {
        return Err(Error::Domain("H(β) is singular at β = 0"));
    }
    let mut out = Matrix::zeros(bm.dim, bm.dim);
    for (&m, blk) in &bm.blocks {
        let w = beta.powi(-(m as i32));
        out = out.add(&blk.scale(w));
    }
    Ok(out)
}

/// Square lattice, `width` columns along x and `height` rows along y.
#[derive(Clone, Debug, PartialEq)]
pub struct LatticeModel2D {
    pub width: usize,
    pub height: usize,
    /// `(x, y) → (x+1, y)`
    pub right: C64,
    /// `(x+1, y) → (x, y)`
    pub left: C64,
    /// `(x, y) → (x, y+1)`
    pub up: C64,
    /// `(x, y+1) → (x, y)`
    pub down: C64,
    /// `(x, y) → (x+1, y+1)`
    pub diag_forward: C64,
    /// `(x+1, y+1) → (x, y)`
    pub diag_backward: C64,
}

impl LatticeModel2D {
    pub fn from_real(width: usize, height: usize, right: f64, left: f64, up: f64, down: f64) -> Result<Self> {
        let m = LatticeModel2D {
            width,
            height,
            right: c(right, 0.0),
            left: c(left, 0.0),
            up: c(up, 0.0),
            down: c(down, 0.0),
            diag_forward: c(0.0, 0.0),
            diag_backward: c(0.0, 0.0),
        };
        m.validate()?;
        Ok(m)
    }

    pub fn with_diagonal(mut self, forward: C64, backward: C64) -> Self {
        self.diag_forward = forward;
        self.diag_backward = backward;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.width < 2 || self.height < 2 {
            return Err(Error::Input(format!("2D lattice must be at least 2×2, got {}×{}", self.width, self.height)));
        }
        let all = [self.right, self.left, self.up, self.down, self.diag_forward, self.diag_backward];
        if !all.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
            return Err(Error::Input("hopping amplitudes must be finite".into()));
        }
        Ok(())
    }

    pub fn sites(&self) -> usize {
        self.width * self.height
    }

    pub fn site(&self, x: usize, y: usize) -> usize {
        y * self.width + x
    }

    pub fn has_diagonal(&self) -> bool {
        self.diag_forward.norm() != 0.0 || self.diag_backward.norm() != 0.0
    }

    /// Open-boundary directed hops `(from, to, amplitude)`.
    pub fn hops(&self) -> Vec<(usize, usize, C64)> {
        let mut out = Vec::new();
        for y in 0..self.height {
            for x in 0..self.width {
                let a = self.site(x, y);
                if x + 1 < self.width {
                    let b = self.site(x + 1, y);
                    out.push((a, b, self.right));
                    out.push((b, a, self.left));
                }
                if y + 1 < self.height {
                    let b = self.site(x, y + 1);
                    out.push((a, b, self.up));
                    out.push((b, a, self.down));
                }
                if self.has_diagonal() && x + 1 < self.width && y + 1 < self.height {
                    let b = self.site(x + 1, y + 1);
                    out.push((a, b, self.diag_forward));
                    out.push((b, a, self.diag_backward));
                }
            }
        }
        out
    }
}

/// Open-boundary Hamiltonian of a square lattice.
pub fn build_real_space_2d(model: &LatticeModel2D) -> Result<Matrix> {
    model.validate()?;
    let dim = model.sites();
    let mut h = Matrix::zeros(dim, dim);
    for (a, b, t) in model.hops() {
        h[(b, a)] += t;
    }
    Ok(h)
}
