//! Minimal symmetric linear algebra: dense storage with a blocked Cholesky
//! factorization, CSR storage with conjugate gradients, and matrix-vector
//! products. Matrix rows are computed by a single task each, and inner
//! products are accumulated serially, so every result is bit-identical for
//! any worker count.

use crate::error::{Error, Result};
use crate::exec;

/// Dense symmetric matrix, row-major, fully stored.
#[derive(Debug, Clone)]
pub struct DenseSym {
    pub n: usize,
    pub a: Vec<f64>,
}

impl DenseSym {
    pub fn zeros(n: usize) -> Self {
        DenseSym { n, a: vec![0.0; n * n] }
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.a[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.a[i * self.n + j] = v;
    }

    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        let n = self.n;
        exec::for_each_row(y, 1, |i, out| {
            let row = &self.a[i * n..(i + 1) * n];
            let mut s = 0.0;
            for j in 0..n {
                s += row[j] * x[j];
            }
            out[0] = s;
        });
    }

    /// In-place lower Cholesky factorization, blocked and row-parallel.
    /// Fails when a pivot is not positive.
    pub fn cholesky_in_place(&mut self) -> Result<()> {
        let n = self.n;
        const NB: usize = 48;
        let mut k0 = 0;
        while k0 < n {
            let kb = NB.min(n - k0);
            // Factor the diagonal block serially.
            for k in k0..k0 + kb {
                let mut d = self.at(k, k);
                for p in k0..k {
                    let l = self.at(k, p);
                    d -= l * l;
                }
                if d <= 0.0 {
                    return Err(Error::SolverDidNotConverge {
                        iterations: 0,
                        residual: d,
                    });
                }
                let d = d.sqrt();
                self.set(k, k, d);
                for i in k + 1..k0 + kb {
                    let mut s = self.at(i, k);
                    for p in k0..k {
                        s -= self.at(i, p) * self.at(k, p);
                    }
                    self.set(i, k, s / d);
                }
            }
            let next = k0 + kb;
            if next >= n {
                break;
            }
            // Panel solve: rows below the diagonal block, in parallel.
            {
                let (head, tail) = self.a.split_at_mut(next * n);
                let diag = &head[k0 * n..];
                exec::for_each_row(tail, n, |r, row| {
                    let _ = r;
                    for k in k0..next {
                        let dk = diag[(k - k0) * n + k];
                        let mut s = row[k];
                        for p in k0..k {
                            s -= row[p] * diag[(k - k0) * n + p];
                        }
                        row[k] = s / dk;
                    }
                });
            }
            // Trailing update: A22 -= L21 L21^T.
            self.trailing_update(k0, next);
            k0 = next;
        }
        Ok(())
    }

    /// Trailing update for the block column [k0, next): for i, j >= next,
    /// A[i][j] -= sum_k L[i][k] L[j][k]. Each output row is written by one
    /// task; the needed L rows are read from an immutable snapshot of the
    /// panel.
    fn trailing_update(&mut self, k0: usize, next: usize) {
        let n = self.n;
        let width = next - k0;
        // Snapshot the panel L[next.., k0..next].
        let rows = n - next;
        let mut panel = vec![0.0; rows * width];
        for i in 0..rows {
            let src = &self.a[(next + i) * n + k0..(next + i) * n + next];
            panel[i * width..(i + 1) * width].copy_from_slice(src);
        }
        let tail = &mut self.a[next * n..];
        exec::for_each_row(tail, n, |r, row| {
            let li = &panel[r * width..(r + 1) * width];
            for j in 0..=r {
                let lj = &panel[j * width..(j + 1) * width];
                let mut s = 0.0;
                for k in 0..width {
                    s += li[k] * lj[k];
                }
                row[next + j] -= s;
            }
        });
    }

    /// Solve L L^T x = b given the in-place factor.
    pub fn cholesky_solve(&self, b: &[f64], x: &mut [f64]) {
        let n = self.n;
        x.copy_from_slice(b);
        // Forward substitution.
        for i in 0..n {
            let mut s = x[i];
            let row = &self.a[i * n..i * n + i];
            for (j, &l) in row.iter().enumerate() {
                s -= l * x[j];
            }
            x[i] = s / self.a[i * n + i];
        }
        // Backward substitution with L^T.
        for i in (0..n).rev() {
            let mut s = x[i];
            for j in i + 1..n {
                s -= self.a[j * n + i] * x[j];
            }
            x[i] = s / self.a[i * n + i];
        }
    }
}

/// Compressed sparse row symmetric matrix (full pattern stored).
#[derive(Debug, Clone)]
pub struct Csr {
    pub n: usize,
    pub row_ptr: Vec<usize>,
    pub cols: Vec<u32>,
    pub vals: Vec<f64>,
}

impl Csr {
    pub fn from_rows(rows: Vec<Vec<(u32, f64)>>) -> Self {
        let n = rows.len();
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        row_ptr.push(0);
        for mut row in rows {
            row.sort_unstable_by_key(|e| e.0);
            for (c, v) in row {
                cols.push(c);
                vals.push(v);
            }
            row_ptr.push(cols.len());
        }
        Csr { n, row_ptr, cols, vals }
    }

    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        exec::for_each_row(y, 1, |i, out| {
            let lo = self.row_ptr[i];
            let hi = self.row_ptr[i + 1];
            let mut s = 0.0;
            for k in lo..hi {
                s += self.vals[k] * x[self.cols[k] as usize];
            }
            out[0] = s;
        });
    }

    pub fn diagonal(&self) -> Vec<f64> {
        let mut d = vec![0.0; self.n];
        for i in 0..self.n {
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                if self.cols[k] as usize == i {
                    d[i] = self.vals[k];
                }
            }
        }
        d
    }
}

/// Serial inner product: deterministic accumulation order.
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    let mut s = 0.0;
    for i in 0..a.len() {
        s += a[i] * b[i];
    }
    s
}

pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn norm_inf(a: &[f64]) -> f64 {
    a.iter().fold(0.0f64, |m, &v| m.max(v.abs()))
}

/// Jacobi-preconditioned conjugate gradients for SPD systems.
/// Returns the iteration count.
pub fn cg_solve<M>(matvec: M, diag: &[f64], b: &[f64], x: &mut [f64], rtol: f64, max_iter: usize) -> Result<usize>
where
    M: Fn(&[f64], &mut [f64]),
{
    let n = b.len();
    let mut r = vec![0.0; n];
    let mut z = vec![0.0; n];
    let mut p = vec![0.0; n];
    let mut ap = vec![0.0; n];
    matvec(x, &mut ap);
    for i in 0..n {
        r[i] = b[i] - ap[i];
    }
    let bnorm = norm2(b).max(f64::MIN_POSITIVE);
    for i in 0..n {
        z[i] = r[i] / diag[i];
    }
    p.copy_from_slice(&z);
    let mut rz = dot(&r, &z);
    for it in 0..max_iter {
        if norm2(&r) <= rtol * bnorm {
            return Ok(it);
        }
        matvec(&p, &mut ap);
        let alpha = rz / dot(&p, &ap);
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        for i in 0..n {
            z[i] = r[i] / diag[i];
        }
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    if norm2(&r) <= rtol * bnorm {
        Ok(max_iter)
    } else {
        Err(Error::SolverDidNotConverge {
            iterations: max_iter,
            residual: norm2(&r) / bnorm,
        })
    }
}
