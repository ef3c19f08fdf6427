use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use super::{abs1, c, symmetric_eigen, symmetrizing_scale, Matrix, C64, EPS};

/// QR iteration ran out of sweeps.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct NoConvergence {
    pub iterations: usize,
    pub unconverged: usize,
}

/// Eigenpairs of `A = D B D⁻¹` expressed through the balanced matrix `B`.
#[derive(Clone, Debug)]
pub struct EigenDecomposition {
    pub values: Vec<C64>,
    /// Unit-norm eigenvectors of the balanced matrix, one per column.
    pub balanced_vectors: Matrix,
    /// `ln` of the diagonal of `D`.
    pub log_scale: Vec<f64>,
    /// True when `balanced_vectors` is unitary (Hermitian balanced matrix).
    pub unitary: bool,
}

impl EigenDecomposition {
    /// Eigenvectors of the original matrix, unit 2-norm per column.
    pub fn vectors(&self) -> Matrix {
        let n = self.values.len();
        let mut v = Matrix::zeros(n, n);
        // shift so the largest scale is 1
        let top = self.log_scale.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let d: Vec<f64> = self.log_scale.iter().map(|x| (x - top).exp()).collect();
        for j in 0..n {
            let mut col: Vec<C64> = (0..n).map(|i| self.balanced_vectors[(i, j)] * d[i]).collect();
            let nrm = super::norm2(&col);
            if nrm > 0.0 {
                col.iter_mut().for_each(|z| *z /= nrm);
            }
            v.set_column(j, &col);
        }
        v
    }
}

/// Full eigendecomposition: symmetrizing balance, then either the real
/// symmetric solver or Hessenberg reduction plus shifted QR.
pub fn eig_decompose(a: &Matrix) -> Result<EigenDecomposition, NoConvergence> {
    assert!(a.is_square(), "eigendecomposition needs a square matrix");
    let n = a.rows();
    let log_scale = symmetrizing_scale(a);
    let mut b = Matrix::from_fn(n, n, |i, j| {
        let z = a[(i, j)];
        if z.re == 0.0 && z.im == 0.0 {
            z
        } else {
            z * (log_scale[j] - log_scale[i]).exp()
        }
    });
    let scale = b.max_abs();
    let real_symmetric = scale > 0.0 && b.hermitian_defect() <= 1e-13 * scale && b.as_slice().iter().all(|z| z.im.abs() <= 1e-14 * scale);
    if real_symmetric {
        let mut s = vec![0.0f64; n * n];
        for i in 0..n {
            for j in 0..n {
                s[i * n + j] = 0.5 * (b[(i, j)].re + b[(j, i)].re);
            }
        }
        let (vals, rows) = symmetric_eigen(&s, n)?;
        let values = vals.iter().map(|&x| c(x, 0.0)).collect();
        let balanced_vectors = Matrix::from_fn(n, n, |i, j| c(rows[j * n + i], 0.0));
        return Ok(EigenDecomposition { values, balanced_vectors, log_scale, unitary: true });
    }
    let mut z = Matrix::identity(n);
    hessenberg(&mut b, Some(&mut z));
    hqr(&mut b, Some(&mut z))?;
    let values = b.diagonal();
    let y = triangular_eigenvectors(&b);
    let mut v = z.matmul(&y);
    for j in 0..n {
        let col = v.column(j);
        let nrm = super::norm2(&col);
        if nrm > 0.0 {
            for i in 0..n {
                v[(i, j)] /= nrm;
            }
        }
    }
    Ok(EigenDecomposition { values, balanced_vectors: v, log_scale, unitary: false })
}

/// Eigenvalues only; the caller is responsible for any balancing.
pub fn schur_eigenvalues(mut a: Matrix) -> Result<Vec<C64>, NoConvergence> {
    hessenberg(&mut a, None);
    hqr(&mut a, None)?;
    Ok(a.diagonal())
}

fn hessenberg(a: &mut Matrix, mut z: Option<&mut Matrix>) {
    let n = a.rows();
    if n < 3 {
        return;
    }
    let mut u = vec![c(0.0, 0.0); n];
    let mut s = vec![c(0.0, 0.0); n];
    for k in 0..n - 2 {
        let m = n - k - 1;
        let mut alpha = 0.0f64;
        let mut tail = 0.0f64;
        for i in 0..m {
            u[i] = a[(k + 1 + i, k)];
            alpha = alpha.hypot(u[i].norm());
            if i > 0 {
                tail = tail.max(u[i].norm());
            }
        }
        if tail == 0.0 {
            continue;
        }
        let x0 = u[0];
        let phase = if x0.norm() > 0.0 { x0 / x0.norm() } else { c(1.0, 0.0) };
        u[0] += phase * alpha;
        let unorm2: f64 = u[..m].iter().map(|z| z.norm_sqr()).sum();
        let tau = 2.0 / unorm2;
        // left: rows k+1.., columns k..
        for j in k..n {
            s[j] = c(0.0, 0.0);
        }
        for i in 0..m {
            let ui = u[i].conj();
            let row = a.row(k + 1 + i);
            for j in k..n {
                s[j] += ui * row[j];
            }
        }
        for i in 0..m {
            let f = u[i] * tau;
            let row = a.row_mut(k + 1 + i);
            for j in k..n {
                row[j] -= f * s[j];
            }
        }
        // right: all rows, columns k+1..
        apply_reflector_right(a, &u[..m], tau, k + 1);
        if let Some(z) = z.as_deref_mut() {
            apply_reflector_right(z, &u[..m], tau, k + 1);
        }
        a[(k + 1, k)] = -phase * alpha;
        for i in k + 2..n {
            a[(i, k)] = c(0.0, 0.0);
        }
    }
}

fn apply_reflector_right(a: &mut Matrix, u: &[C64], tau: f64, off: usize) {
    let rows = a.rows();
    for i in 0..rows {
        let row = &mut a.row_mut(i)[off..off + u.len()];
        let mut s = c(0.0, 0.0);
        for (x, w) in row.iter().zip(u) {
            s += x * w;
        }
        if s.re == 0.0 && s.im == 0.0 {
            continue;
        }
        s *= tau;
        for (x, w) in row.iter_mut().zip(u) {
            *x -= s * w.conj();
        }
    }
}

/// Single-shift complex QR on an upper Hessenberg matrix. With `z`, the full
/// Schur form is produced and the unitary factor accumulated; without it
/// only the eigenvalues on the diagonal are meaningful.
fn hqr(h: &mut Matrix, mut z: Option<&mut Matrix>) -> Result<(), NoConvergence> {
    let n = h.rows();
    if n == 0 {
        return Ok(());
    }
    let full = z.is_some();
    let max_its = 30 * n.max(10);
    let mut total = 0usize;
    let mut ihi = n - 1;
    let mut its = 0usize;
    let hnorm = h.max_abs().max(f64::MIN_POSITIVE);
    while ihi > 0 {
        // look for a negligible subdiagonal
        let mut l = ihi;
        while l > 0 {
            let sub = abs1(h[(l, l - 1)]);
            let mut s = abs1(h[(l - 1, l - 1)]) + abs1(h[(l, l)]);
            if s == 0.0 {
                s = hnorm;
            }
            if sub <= EPS * s {
                h[(l, l - 1)] = c(0.0, 0.0);
                break;
            }
            l -= 1;
        }
        if l == ihi {
            ihi -= 1;
            its = 0;
            continue;
        }
        its += 1;
        total += 1;
        if total > max_its {
            return Err(NoConvergence { iterations: total, unconverged: ihi + 1 });
        }
        let mu = if its % 10 == 0 {
            let base = if its % 20 == 0 { l } else { ihi };
            let sub = if base == l { h[(l + 1, l)] } else { h[(ihi, ihi - 1)] };
            h[(base, base)] + 0.75 * sub.re.abs()
        } else {
            wilkinson(h[(ihi - 1, ihi - 1)], h[(ihi - 1, ihi)], h[(ihi, ihi - 1)], h[(ihi, ihi)])
        };
        let (i1, i2) = if full { (0, n) } else { (l, ihi + 1) };
        for k in l..ihi {
            let (x, y) = if k == l { (h[(l, l)] - mu, h[(l + 1, l)]) } else { (h[(k, k - 1)], h[(k + 1, k - 1)]) };
            let (cs, sn) = givens(x, y);
            // rows k, k+1
            let col_lo = if k > l { k - 1 } else { k };
            for j in col_lo.max(i1)..i2 {
                let a = h[(k, j)];
                let b = h[(k + 1, j)];
                h[(k, j)] = a * cs + sn * b;
                h[(k + 1, j)] = b * cs - sn.conj() * a;
            }
            if k > l {
                h[(k + 1, k - 1)] = c(0.0, 0.0);
            }
            // columns k, k+1
            let row_hi = (k + 2).min(ihi) + 1;
            for i in i1..row_hi {
                let a = h[(i, k)];
                let b = h[(i, k + 1)];
                h[(i, k)] = a * cs + b * sn.conj();
                h[(i, k + 1)] = b * cs - a * sn;
            }
            if let Some(z) = z.as_deref_mut() {
                for i in 0..n {
                    let a = z[(i, k)];
                    let b = z[(i, k + 1)];
                    z[(i, k)] = a * cs + b * sn.conj();
                    z[(i, k + 1)] = b * cs - a * sn;
                }
            }
        }
    }
    Ok(())
}

/// Rotation `[[c, s], [-s̄, c]]` mapping `(x, y)` onto `(r, 0)`.
#[inline]
fn givens(x: C64, y: C64) -> (f64, C64) {
    let ax = x.norm();
    let ay = y.norm();
    if ay == 0.0 {
        return (1.0, c(0.0, 0.0));
    }
    if ax == 0.0 {
        return (0.0, y.conj() / ay);
    }
    let r = ax.hypot(ay);
    (ax / r, (x / ax) * y.conj() / r)
}

/// Eigenvalue of `[[a, b], [c, d]]` closer to `d`.
fn wilkinson(a: C64, b: C64, cc: C64, d: C64) -> C64 {
    let half = (a - d) * 0.5;
    let disc = (half * half + b * cc).sqrt();
    let l1 = d + half + disc;
    let l2 = d + half - disc;
    if (l1 - d).norm() < (l2 - d).norm() {
        l1
    } else {
        l2
    }
}

/// Columns are eigenvectors of the upper triangular `t`, unit diagonal entry.
fn triangular_eigenvectors(t: &Matrix) -> Matrix {
    let n = t.rows();
    let tnorm = t.max_abs();
    let smin = (EPS * tnorm).max(f64::MIN_POSITIVE * 1e10);
    let mut y = Matrix::zeros(n, n);
    let mut col = vec![c(0.0, 0.0); n];
    for k in 0..n {
        let lambda = t[(k, k)];
        col[k] = c(1.0, 0.0);
        for j in (0..k).rev() {
            let row = t.row(j);
            let mut s = c(0.0, 0.0);
            for m in j + 1..=k {
                s += row[m] * col[m];
            }
            let mut den = row[j] - lambda;
            if den.norm() < smin {
                den = c(smin, 0.0);
            }
            col[j] = -s / den;
            if col[j].norm() > 1e150 {
                let f = 1.0 / col[j].norm();
                for z in col[j..=k].iter_mut() {
                    *z *= f;
                }
            }
        }
        for i in 0..=k {
            y[(i, k)] = col[i];
        }
    }
    y
}
