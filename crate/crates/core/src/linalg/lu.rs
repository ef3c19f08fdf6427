use alloc::vec::Vec;

use super::{c, Matrix, C64};

/// LU factorization with partial pivoting.
#[derive(Clone, Debug)]
pub struct Lu {
    lu: Matrix,
    perm: Vec<usize>,
    singular: bool,
}

impl Lu {
    pub fn new(a: &Matrix) -> Lu {
        assert!(a.is_square(), "LU needs a square matrix");
        let n = a.rows();
        let mut lu = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut singular = false;
        for k in 0..n {
            let mut p = k;
            let mut best = lu[(k, k)].norm();
            for i in k + 1..n {
                let v = lu[(i, k)].norm();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if best == 0.0 {
                singular = true;
                continue;
            }
            if p != k {
                perm.swap(p, k);
                for j in 0..n {
                    let t = lu[(k, j)];
                    lu[(k, j)] = lu[(p, j)];
                    lu[(p, j)] = t;
                }
            }
            let pivot = lu[(k, k)];
            let (head, tail) = lu.data_mut().split_at_mut((k + 1) * n);
            let top = &head[k * n..];
            for row in tail.chunks_exact_mut(n) {
                let f = row[k] / pivot;
                row[k] = f;
                if f.re == 0.0 && f.im == 0.0 {
                    continue;
                }
                for j in k + 1..n {
                    row[j] -= f * top[j];
                }
            }
        }
        Lu { lu, perm, singular }
    }

    pub fn is_singular(&self) -> bool {
        self.singular
    }

    pub fn solve(&self, b: &[C64]) -> Vec<C64> {
        let n = self.lu.rows();
        let mut x: Vec<C64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let row = self.lu.row(i);
            let mut s = x[i];
            for j in 0..i {
                s -= row[j] * x[j];
            }
            x[i] = s;
        }
        for i in (0..n).rev() {
            let row = self.lu.row(i);
            let mut s = x[i];
            for j in i + 1..n {
                s -= row[j] * x[j];
            }
            x[i] = s / row[i];
        }
        x
    }

    /// Inverse, or `None` when a pivot vanished.
    pub fn inverse(&self) -> Option<Matrix> {
        if self.singular {
            return None;
        }
        let n = self.lu.rows();
        let mut inv = Matrix::zeros(n, n);
        let mut e = alloc::vec![c(0.0, 0.0); n];
        for j in 0..n {
            e.iter_mut().for_each(|z| *z = c(0.0, 0.0));
            e[j] = c(1.0, 0.0);
            let col = self.solve(&e);
            inv.set_column(j, &col);
        }
        if inv.as_slice().iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return None;
        }
        Some(inv)
    }

    pub fn determinant(&self) -> C64 {
        let n = self.lu.rows();
        let mut d = c(1.0, 0.0);
        for i in 0..n {
            d *= self.lu[(i, i)];
        }
        // parity of the permutation
        let mut seen = alloc::vec![false; n];
        let mut swaps = 0usize;
        for s in 0..n {
            if seen[s] {
                continue;
            }
            let mut len = 0;
            let mut j = s;
            while !seen[j] {
                seen[j] = true;
                j = self.perm[j];
                len += 1;
            }
            swaps += len - 1;
        }
        if swaps % 2 == 1 {
            -d
        } else {
            d
        }
    }
}
