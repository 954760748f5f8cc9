//! Lower-band storage for symmetric and Hermitian matrices.
//!
//! Column `j` holds rows `j ..= j + kd`; entry `(i, j)` with `i ≥ j` lives at
//! `data[j·(kd+1) + (i − j)]`. Entries beyond the last row are padding.

use crate::error::{Error, Result};
use num_complex::Complex64;
use std::ops::{Add, Mul};

/// Scalar types usable in a [`Band`].
pub trait BandScalar: Copy + Default + Add<Output = Self> + Mul<Output = Self> + Send + Sync {
    fn conj(self) -> Self;
    fn abs(self) -> f64;
    fn from_real(v: f64) -> Self;
}

impl BandScalar for f64 {
    fn conj(self) -> Self {
        self
    }
    fn abs(self) -> f64 {
        f64::abs(self)
    }
    fn from_real(v: f64) -> Self {
        v
    }
}

impl BandScalar for Complex64 {
    fn conj(self) -> Self {
        Complex64::conj(&self)
    }
    fn abs(self) -> f64 {
        self.norm()
    }
    fn from_real(v: f64) -> Self {
        Complex64::new(v, 0.0)
    }
}

/// Symmetric (real) or Hermitian (complex) matrix stored by its lower band.
#[derive(Clone, Debug, PartialEq)]
pub struct Band<T> {
    n: usize,
    kd: usize,
    data: Vec<T>,
}

pub type RealBand = Band<f64>;
pub type HermBand = Band<Complex64>;

impl<T: BandScalar> Band<T> {
    pub fn zeros(n: usize, kd: usize) -> Self {
        Band {
            n,
            kd,
            data: vec![T::default(); n * (kd + 1)],
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Lower bandwidth.
    pub fn kd(&self) -> usize {
        self.kd
    }

    #[inline]
    fn idx(&self, i: usize, j: usize) -> usize {
        debug_assert!(i >= j && i - j <= self.kd && i < self.n);
        j * (self.kd + 1) + (i - j)
    }

    /// Entry `(i, j)` of the full matrix.
    pub fn get(&self, i: usize, j: usize) -> T {
        if i >= j {
            if i - j > self.kd {
                T::default()
            } else {
                self.data[self.idx(i, j)]
            }
        } else {
            self.get(j, i).conj()
        }
    }

    /// Adds `v` at `(i, j)` of the full matrix, mirroring into the stored triangle.
    #[inline]
    pub fn add(&mut self, i: usize, j: usize, v: T) {
        if i >= j {
            let k = self.idx(i, j);
            self.data[k] = self.data[k] + v;
        } else {
            let k = self.idx(j, i);
            self.data[k] = self.data[k] + v.conj();
        }
    }

    /// Iterates the stored lower entries as `(i, j, value)`.
    pub fn lower_entries(&self) -> impl Iterator<Item = (usize, usize, T)> + '_ {
        (0..self.n).flat_map(move |j| {
            (j..(j + self.kd + 1).min(self.n)).map(move |i| (i, j, self.data[j * (self.kd + 1) + i - j]))
        })
    }

    /// `y = A x`.
    pub fn matvec(&self, x: &[T]) -> Vec<T> {
        let mut y = vec![T::default(); self.n];
        for j in 0..self.n {
            let col = &self.data[j * (self.kd + 1)..];
            let xj = x[j];
            y[j] = y[j] + col[0] * xj;
            let mut acc = T::default();
            for (off, &a) in col[1..].iter().enumerate().take((self.n - 1 - j).min(self.kd)) {
                let i = j + 1 + off;
                y[i] = y[i] + a * xj;
                acc = acc + a.conj() * x[i];
            }
            y[j] = y[j] + acc;
        }
        y
    }

    /// `a·A + b·B` over the wider of the two bands.
    pub fn combine(a: f64, x: &Band<T>, b: f64, y: &Band<T>) -> Band<T> {
        assert_eq!(x.n, y.n);
        let mut out = Band::zeros(x.n, x.kd.max(y.kd));
        for (i, j, v) in x.lower_entries() {
            out.add(i, j, T::from_real(a) * v);
        }
        for (i, j, v) in y.lower_entries() {
            out.add(i, j, T::from_real(b) * v);
        }
        out
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Infinity norm (largest absolute row sum).
    pub fn norm_inf(&self) -> f64 {
        let mut rows = vec![0.0; self.n];
        for (i, j, v) in self.lower_entries() {
            rows[i] += v.abs();
            if i != j {
                rows[j] += v.abs();
            }
        }
        rows.into_iter().fold(0.0, f64::max)
    }

    pub fn diag(&self, i: usize) -> T {
        self.data[i * (self.kd + 1)]
    }

    /// Dense row-major copy.
    pub fn to_dense(&self) -> Vec<Vec<T>> {
        (0..self.n).map(|i| (0..self.n).map(|j| self.get(i, j)).collect()).collect()
    }
}

/// Banded `L Lᴴ` factorization of a Hermitian positive-definite matrix.
pub struct BandCholesky {
    l: HermBand,
}

impl BandCholesky {
    pub fn factor(a: &HermBand) -> Result<Self> {
        let mut l = a.clone();
        let (n, kd) = (l.n, l.kd);
        let stride = kd + 1;
        for j in 0..n {
            let d = l.data[j * stride].re;
            if !(d > 0.0) {
                return Err(Error::Eigen(format!("matrix not positive definite at pivot {j} ({d:e})")));
            }
            let djj = d.sqrt();
            l.data[j * stride] = Complex64::new(djj, 0.0);
            let len = kd.min(n - 1 - j);
            let inv = 1.0 / djj;
            for t in 1..=len {
                l.data[j * stride + t] *= inv;
            }
            // right-looking update of the trailing columns
            for c in 1..=len {
                let lcj = l.data[j * stride + c].conj();
                let (head, tail) = l.data.split_at_mut((j + c) * stride);
                let src = &head[j * stride + c..j * stride + len + 1];
                let dst = &mut tail[..len - c + 1];
                for (dv, &s) in dst.iter_mut().zip(src) {
                    *dv -= s * lcj;
                }
            }
        }
        Ok(BandCholesky { l })
    }

    /// Solves `A x = b` in place.
    pub fn solve_in_place(&self, x: &mut [Complex64]) {
        let (n, kd) = (self.l.n, self.l.kd);
        let stride = kd + 1;
        let d = &self.l.data;
        for j in 0..n {
            let xj = x[j] / d[j * stride].re;
            x[j] = xj;
            let len = kd.min(n - 1 - j);
            for t in 1..=len {
                x[j + t] -= d[j * stride + t] * xj;
            }
        }
        for j in (0..n).rev() {
            let len = kd.min(n - 1 - j);
            let mut acc = x[j];
            for t in 1..=len {
                acc -= d[j * stride + t].conj() * x[j + t];
            }
            x[j] = acc / d[j * stride].re;
        }
    }
}
