//! Second- and fourth-order tensors in three dimensions.

use nalgebra::Matrix3;
use std::ops::{Add, Index, IndexMut, Mul, Sub};

/// Second-order tensor (3×3, row index first).
pub type Tensor2 = Matrix3<f64>;

/// Fourth-order tensor with full 3×3×3×3 storage.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tensor4 {
    data: [f64; 81],
}

#[inline]
fn flat(i: usize, j: usize, k: usize, l: usize) -> usize {
    ((i * 3 + j) * 3 + k) * 3 + l
}

impl Tensor4 {
    pub fn zeros() -> Self {
        Tensor4 { data: [0.0; 81] }
    }

    pub fn from_fn(mut f: impl FnMut(usize, usize, usize, usize) -> f64) -> Self {
        let mut t = Self::zeros();
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    for l in 0..3 {
                        t.data[flat(i, j, k, l)] = f(i, j, k, l);
                    }
                }
            }
        }
        t
    }

    /// `λ δ_ij δ_kl + μ (δ_ik δ_jl + δ_il δ_jk)`.
    pub fn isotropic(lambda: f64, mu: f64) -> Self {
        let d = |a: usize, b: usize| if a == b { 1.0 } else { 0.0 };
        Self::from_fn(|i, j, k, l| {
            lambda * d(i, j) * d(k, l) + mu * (d(i, k) * d(j, l) + d(i, l) * d(j, k))
        })
    }

    /// Dyadic product `A_ij B_kl`.
    pub fn dyad(a: &Tensor2, b: &Tensor2) -> Self {
        Self::from_fn(|i, j, k, l| a[(i, j)] * b[(k, l)])
    }

    /// Symmetrized "square" product `½ (A_ik B_jl + A_il B_jk)`.
    pub fn sym_square(a: &Tensor2, b: &Tensor2) -> Self {
        Self::from_fn(|i, j, k, l| 0.5 * (a[(i, k)] * b[(j, l)] + a[(i, l)] * b[(j, k)]))
    }

    /// Contraction `T_ijkl X_kl`.
    pub fn ddot(&self, x: &Tensor2) -> Tensor2 {
        let mut out = Tensor2::zeros();
        for i in 0..3 {
            for j in 0..3 {
                let mut s = 0.0;
                for k in 0..3 {
                    for l in 0..3 {
                        s += self.data[flat(i, j, k, l)] * x[(k, l)];
                    }
                }
                out[(i, j)] = s;
            }
        }
        out
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    /// Frobenius norm over all 81 entries.
    pub fn norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Largest violation of `T_ijkl = T_klij`.
    pub fn major_symmetry_residual(&self) -> f64 {
        let mut r = 0.0_f64;
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    for l in 0..3 {
                        r = r.max((self[(i, j, k, l)] - self[(k, l, i, j)]).abs());
                    }
                }
            }
        }
        r
    }

    /// Largest violation of `T_ijkl = T_jikl = T_ijlk`.
    pub fn minor_symmetry_residual(&self) -> f64 {
        let mut r = 0.0_f64;
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    for l in 0..3 {
                        let v = self[(i, j, k, l)];
                        r = r.max((v - self[(j, i, k, l)]).abs());
                        r = r.max((v - self[(i, j, l, k)]).abs());
                    }
                }
            }
        }
        r
    }
}

impl Index<(usize, usize, usize, usize)> for Tensor4 {
    type Output = f64;
    #[inline]
    fn index(&self, (i, j, k, l): (usize, usize, usize, usize)) -> &f64 {
        &self.data[flat(i, j, k, l)]
    }
}

impl IndexMut<(usize, usize, usize, usize)> for Tensor4 {
    #[inline]
    fn index_mut(&mut self, (i, j, k, l): (usize, usize, usize, usize)) -> &mut f64 {
        &mut self.data[flat(i, j, k, l)]
    }
}

impl Add for Tensor4 {
    type Output = Tensor4;
    fn add(mut self, rhs: Tensor4) -> Tensor4 {
        for (a, b) in self.data.iter_mut().zip(rhs.data.iter()) {
            *a += b;
        }
        self
    }
}

impl Sub for Tensor4 {
    type Output = Tensor4;
    fn sub(mut self, rhs: Tensor4) -> Tensor4 {
        for (a, b) in self.data.iter_mut().zip(rhs.data.iter()) {
            *a -= b;
        }
        self
    }
}

impl Mul<f64> for Tensor4 {
    type Output = Tensor4;
    fn mul(mut self, s: f64) -> Tensor4 {
        for a in self.data.iter_mut() {
            *a *= s;
        }
        self
    }
}

/// Largest absolute asymmetry `|A_ij - A_ji|`.
pub fn asymmetry(a: &Tensor2) -> f64 {
    (a - a.transpose()).abs().max()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn isotropic_has_both_symmetries() {
        let c = Tensor4::isotropic(2.0, 3.0);
        assert_eq!(c.major_symmetry_residual(), 0.0);
        assert_eq!(c.minor_symmetry_residual(), 0.0);
        assert_eq!(c[(0, 0, 0, 0)], 8.0);
        assert_eq!(c[(0, 0, 1, 1)], 2.0);
        assert_eq!(c[(0, 1, 0, 1)], 3.0);
    }

    #[test]
    fn ddot_with_identity_gives_trace_term() {
        let c = Tensor4::isotropic(1.0, 0.0);
        let s = c.ddot(&Tensor2::from_diagonal_element(2.0));
        assert_eq!(s, Tensor2::from_diagonal_element(6.0));
    }
}
