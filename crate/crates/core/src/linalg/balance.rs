use alloc::collections::VecDeque;
use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use super::Matrix;

/// Log-scales `x` such that `D⁻¹AD` with `D = diag(eˣ)` has `|b_ij| = |b_ji|`
/// on every pair of mutually coupled sites.
///
/// Exact on coupling graphs whose log-ratio cycles close; otherwise a
/// least-squares compromise. Classical row/column balancing leaves the
/// interior of a nonreciprocal chain untouched, which is why this is used
/// ahead of the QR iteration.
pub fn symmetrizing_scale(a: &Matrix) -> Vec<f64> {
    let n = a.rows();
    let mut adj: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    for i in 0..n {
        for j in i + 1..n {
            let aij = a[(i, j)].norm();
            let aji = a[(j, i)].norm();
            if aij > 0.0 && aji > 0.0 && aij.is_finite() && aji.is_finite() {
                // x_i - x_j = w
                let w = 0.5 * (aij.ln() - aji.ln());
                adj[i].push((j, w));
                adj[j].push((i, -w));
            }
        }
    }
    let mut x = vec![0.0f64; n];
    let mut seen = vec![false; n];
    let mut queue = VecDeque::new();
    for root in 0..n {
        if seen[root] {
            continue;
        }
        seen[root] = true;
        queue.push_back(root);
        while let Some(i) = queue.pop_front() {
            for &(j, w) in &adj[i] {
                if !seen[j] {
                    seen[j] = true;
                    x[j] = x[i] - w;
                    queue.push_back(j);
                }
            }
        }
    }
    let residual = |x: &[f64]| {
        let mut r = 0.0f64;
        for i in 0..n {
            for &(j, w) in &adj[i] {
                r = r.max((x[i] - x[j] - w).abs());
            }
        }
        r
    };
    if residual(&x) > 1e-12 {
        for _ in 0..200 {
            for i in 0..n {
                if adj[i].is_empty() {
                    continue;
                }
                let s: f64 = adj[i].iter().map(|&(j, w)| x[j] + w).sum();
                x[i] = s / adj[i].len() as f64;
            }
        }
    }
    // keep the scale centred so neither end overflows first
    if n > 0 {
        let (lo, hi) = x.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &v| (l.min(v), h.max(v)));
        let mid = 0.5 * (lo + hi);
        x.iter_mut().for_each(|v| *v -= mid);
    }
    x
}

/// Power-of-two row/column balancing in place; returns the column scales.
pub fn parlett_reinsch(a: &mut Matrix) -> Vec<f64> {
    let n = a.rows();
    let mut d = vec![1.0f64; n];
    let radix = 2.0f64;
    let mut converged = false;
    let mut sweeps = 0;
    while !converged && sweeps < 100 {
        converged = true;
        sweeps += 1;
        for i in 0..n {
            let mut col = 0.0;
            let mut row = 0.0;
            for j in 0..n {
                if j != i {
                    col += a[(j, i)].norm();
                    row += a[(i, j)].norm();
                }
            }
            if col == 0.0 || row == 0.0 {
                continue;
            }
            let mut f = 1.0;
            let s = col + row;
            let mut cc = col;
            let mut rr = row;
            while cc < rr / radix {
                cc *= radix;
                rr /= radix;
                f *= radix;
            }
            while cc >= rr * radix {
                cc /= radix;
                rr *= radix;
                f /= radix;
            }
            if (cc + rr) < 0.95 * s {
                converged = false;
                d[i] *= f;
                for j in 0..n {
                    a[(i, j)] /= f;
                    a[(j, i)] *= f;
                }
            }
        }
    }
    d
}
