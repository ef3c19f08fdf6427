use alloc::vec::Vec;

use super::schur::NoConvergence;
use super::{c, parlett_reinsch, schur_eigenvalues, Matrix, C64};

/// Value and derivative of `Σ coeffs[k]·zᵏ`.
pub fn horner(coeffs: &[C64], z: C64) -> (C64, C64) {
    let mut p = c(0.0, 0.0);
    let mut dp = c(0.0, 0.0);
    for &a in coeffs.iter().rev() {
        dp = dp * z + p;
        p = p * z + a;
    }
    (p, dp)
}

/// Roots of `Σ coeffs[k]·zᵏ` (ascending coefficients, nonzero leading term)
/// from a balanced companion matrix, each polished by a few Newton steps.
pub fn poly_roots(coeffs: &[C64]) -> Result<Vec<C64>, NoConvergence> {
    let d = coeffs.len().saturating_sub(1);
    if d == 0 {
        return Ok(Vec::new());
    }
    let lead = coeffs[d];
    assert!(lead.norm() > 0.0, "leading coefficient must be nonzero");
    let mut comp = Matrix::zeros(d, d);
    for j in 0..d {
        comp[(0, j)] = -coeffs[d - 1 - j] / lead;
    }
    for i in 1..d {
        comp[(i, i - 1)] = c(1.0, 0.0);
    }
    parlett_reinsch(&mut comp);
    let mut roots = schur_eigenvalues(comp)?;
    for z in roots.iter_mut() {
        let (mut p, _) = horner(coeffs, *z);
        for _ in 0..4 {
            let (_, dp) = horner(coeffs, *z);
            if dp.norm() == 0.0 {
                break;
            }
            let cand = *z - p / dp;
            let (pc, _) = horner(coeffs, cand);
            if pc.norm() < p.norm() {
                *z = cand;
                p = pc;
            } else {
                break;
            }
        }
    }
    Ok(roots)
}
