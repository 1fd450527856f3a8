//! Symmetric positive-definite banded linear solver: unblocked Cholesky
//! in lower-band storage, column major.
//!
//! Storage: `data[j * (kd+1) + d] = A[j + d, j]` for `d = 0..=kd`.

use crate::error::{Error, Result};
use crate::scalar::Real;

pub struct BandedSpd<R> {
    n: usize,
    kd: usize,
    data: Vec<R>,
    factored: bool,
}

impl<R: Real> BandedSpd<R> {
    pub fn new(n: usize, kd: usize) -> Self {
        BandedSpd { n, kd, data: vec![R::zero(); n * (kd + 1)], factored: false }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    fn idx(&self, d: usize, j: usize) -> usize {
        j * (self.kd + 1) + d
    }

    /// Adds `v` to `A[i, j]` with `i ≥ j`, `i - j ≤ kd`.
    pub fn add(&mut self, i: usize, j: usize, v: R) {
        debug_assert!(!self.factored);
        debug_assert!(i >= j && i - j <= self.kd);
        let at = self.idx(i - j, j);
        self.data[at] += v;
    }

    /// In-place Cholesky `A = L L^T`.
    pub fn factor(&mut self) -> Result<()> {
        let kd = self.kd;
        for j in 0..self.n {
            let kmin = j.saturating_sub(kd);
            let mut diag = self.data[self.idx(0, j)];
            for k in kmin..j {
                let l = self.data[self.idx(j - k, k)];
                diag -= l * l;
            }
            if !(diag > R::zero()) {
                return Err(Error::LinearSolve(format!(
                    "matrix not positive definite at column {j} (pivot {diag})"
                )));
            }
            let diag = diag.sqrt();
            let at = self.idx(0, j);
            self.data[at] = diag;
            let imax = (j + kd).min(self.n - 1);
            for i in j + 1..=imax {
                let mut v = self.data[self.idx(i - j, j)];
                let kstart = kmin.max(i.saturating_sub(kd));
                for k in kstart..j {
                    v -= self.data[self.idx(i - k, k)] * self.data[self.idx(j - k, k)];
                }
                let at = self.idx(i - j, j);
                self.data[at] = v / diag;
            }
        }
        self.factored = true;
        Ok(())
    }

    /// Solves `A x = b` after `factor`.
    pub fn solve(&self, b: &mut [R]) {
        assert!(self.factored, "solve before factor");
        assert_eq!(b.len(), self.n);
        let kd = self.kd;
        // Forward: L y = b.
        for j in 0..self.n {
            let kmin = j.saturating_sub(kd);
            let mut v = b[j];
            for k in kmin..j {
                v -= self.data[self.idx(j - k, k)] * b[k];
            }
            b[j] = v / self.data[self.idx(0, j)];
        }
        // Backward: L^T x = y.
        for j in (0..self.n).rev() {
            let imax = (j + kd).min(self.n - 1);
            let mut v = b[j];
            for i in j + 1..=imax {
                v -= self.data[self.idx(i - j, j)] * b[i];
            }
            b[j] = v / self.data[self.idx(0, j)];
        }
    }
}
