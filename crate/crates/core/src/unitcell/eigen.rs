//! Lowest eigenpairs of the Hermitian pencil `K v = λ M v`.
//!
//! Shift-invert block Krylov: the operator `(K − sM)⁻¹ M` is applied through a
//! banded Cholesky factor, the basis is kept M-orthonormal with two passes of
//! classical Gram-Schmidt, and Ritz pairs come from projecting `(K, M)` onto
//! the basis. The basis is restarted from the wanted Ritz vectors plus
//! preconditioned residuals until all pass, with the shift moved below the
//! slowest unconverged pair after each pass.

use super::band::{BandCholesky, HermBand};
use crate::error::{Error, Result};
use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Clone, Debug)]
pub struct EigenOptions {
    /// Residual tolerance relative to `‖Kx‖ + |λ|‖Mx‖`.
    pub tol: f64,
    pub block: usize,
    pub max_restarts: usize,
    /// Spectral shift; default `−1e-8 · max(K_ii / M_ii)`.
    pub shift: Option<f64>,
    pub seed: u64,
}

impl Default for EigenOptions {
    fn default() -> Self {
        EigenOptions {
            tol: 1e-11,
            block: 3,
            max_restarts: 40,
            shift: None,
            seed: 0x5eed,
        }
    }
}

#[derive(Clone, Debug)]
pub struct EigenPair {
    /// Circular frequency ω = √λ, rad/s.
    pub omega: f64,
    /// Clamped eigenvalue λ = ω².
    pub lambda: f64,
    /// M-orthonormal eigenvector on the reduced DOFs.
    pub vector: Vec<Complex64>,
    /// `‖K v − λ M v‖`.
    pub residual: f64,
}

type Vector = Vec<Complex64>;

fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn norm(a: &[Complex64]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

fn axpy(y: &mut [Complex64], a: Complex64, x: &[Complex64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}

struct Basis<'a, F: Fn(&[Complex64]) -> Vector> {
    m: &'a HermBand,
    op: &'a F,
    v: Vec<Vector>,
    mv: Vec<Vector>,
    opv: Vec<Vector>,
}

impl<'a, F: Fn(&[Complex64]) -> Vector> Basis<'a, F> {
    fn new(m: &'a HermBand, op: &'a F) -> Self {
        Basis { m, op, v: Vec::new(), mv: Vec::new(), opv: Vec::new() }
    }

    /// M-orthonormalizes `w` against the basis and appends it. Returns false
    /// if `w` lies (numerically) in the span.
    fn push(&mut self, mut w: Vector) -> bool {
        let mut mw = self.m.matvec(&w);
        let start = dot(&w, &mw).re.max(0.0).sqrt();
        if start == 0.0 {
            return false;
        }
        for _ in 0..2 {
            let coeffs: Vec<Complex64> = self.mv.iter().map(|mvi| dot(mvi, &w)).collect();
            for (c, vi) in coeffs.iter().zip(&self.v) {
                axpy(&mut w, -c, vi);
            }
            mw = self.m.matvec(&w);
        }
        let nrm = dot(&w, &mw).re.max(0.0).sqrt();
        if nrm < 1e-10 * start {
            return false;
        }
        let inv = 1.0 / nrm;
        w.iter_mut().for_each(|x| *x *= inv);
        mw.iter_mut().for_each(|x| *x *= inv);
        self.opv.push((self.op)(&w));
        self.v.push(w);
        self.mv.push(mw);
        true
    }

    fn len(&self) -> usize {
        self.v.len()
    }
}

fn random_vector(n: usize, rng: &mut ChaCha8Rng) -> Vector {
    (0..n)
        .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect()
}

/// Default shift `−1e-8 · max(K_ii / M_ii)`.
pub fn default_shift(k: &HermBand, m: &HermBand) -> f64 {
    let ratio = (0..k.n()).map(|i| k.diag(i).re / m.diag(i).re).fold(0.0, f64::max);
    -1e-8 * ratio
}

/// Factors `K − sM`, pushing `s` further down while the factorization fails.
/// A failure that survives a shift of −‖K‖∞/min M_ii means an eigenvalue far
/// below zero.
fn factor_below(k: &HermBand, m: &HermBand, shift: &mut f64) -> Result<BandCholesky> {
    let floor = -k.norm_inf() / (0..m.n()).map(|i| m.diag(i).re).fold(f64::INFINITY, f64::min);
    loop {
        match BandCholesky::factor(&HermBand::combine(1.0, k, -*shift, m)) {
            Ok(c) => return Ok(c),
            Err(_) if *shift > floor => *shift = (10.0 * *shift).min(-1.0).max(floor),
            Err(_) => {
                return Err(Error::Instability {
                    eigenvalue: *shift,
                    clamp: 0.0,
                    context: " (pencil has eigenvalues below this shift)".into(),
                })
            }
        }
    }
}

struct Ritz {
    lambda: f64,
    x: Vector,
    residual: f64,
}

/// Smallest `n_modes` eigenpairs, ascending.
pub fn solve_eigen(k: &HermBand, m: &HermBand, n_modes: usize, opts: &EigenOptions) -> Result<Vec<EigenPair>> {
    let n = k.n();
    if m.n() != n {
        return Err(Error::Eigen("K and M differ in size".into()));
    }
    let nev = n_modes.min(n);
    if nev == 0 {
        return Ok(Vec::new());
    }
    let mut shift = opts.shift.unwrap_or_else(|| default_shift(k, m));
    let knorm = k.norm_inf();
    let block = opts.block.max(1);
    let max_dim = n.min((3 * nev).max(nev + 20));
    let keep = (nev + block).min(max_dim);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);

    // random starts are rough; one solve smooths them (see the projection below)
    let mut seeds: Vec<Vector> = {
        let chol = factor_below(k, m, &mut shift)?;
        (0..block)
            .map(|_| {
                let mut v = m.matvec(&random_vector(n, &mut rng));
                chol.solve_in_place(&mut v);
                v
            })
            .collect()
    };
    // residuals of the unconverged Ritz pairs from the previous pass
    let mut residuals: Vec<Vector> = Vec::new();
    let mut worst = f64::INFINITY;

    for _pass in 0..=opts.max_restarts {
        let chol = factor_below(k, m, &mut shift)?;
        let op = |x: &[Complex64]| {
            let mut y = m.matvec(x);
            chol.solve_in_place(&mut y);
            y
        };
        let mut basis = Basis::new(m, &op);
        for s in seeds.drain(..) {
            basis.push(s);
        }
        // Restarts expand from (K − sM)⁻¹ r: formed from the explicit
        // residual, it keeps full relative precision where op(x) − θx would
        // cancel to rounding noise for nearly converged x.
        let mut pending: Vec<Vector> = if residuals.is_empty() {
            basis.opv.iter().take(block).cloned().collect()
        } else {
            residuals
                .drain(..)
                .map(|mut r| {
                    chol.solve_in_place(&mut r);
                    r
                })
                .collect()
        };

        // expand the Krylov basis block by block
        while basis.len() < max_dim {
            let mut added = Vec::new();
            for w in pending.drain(..) {
                if basis.len() == max_dim {
                    break;
                }
                if basis.push(w) {
                    added.push(basis.len() - 1);
                }
            }
            if added.is_empty() {
                // invariant subspace reached: continue from fresh directions
                for _ in 0..8 {
                    if basis.len() < max_dim && basis.push(op(&random_vector(n, &mut rng))) {
                        added.push(basis.len() - 1);
                        break;
                    }
                }
                if added.is_empty() {
                    break;
                }
            }
            pending = added.iter().map(|&i| basis.opv[i].clone()).collect();
        }

        // Rayleigh-Ritz for (K, M) on the whole basis. Every basis vector
        // comes out of a solve with K − sM and is therefore smooth, so the
        // projected K stays small in norm.
        let dim = basis.len();
        let take = keep.min(dim);
        let mut xs = refine(k, m, &basis.v).ok_or_else(|| Error::Eigen("projected mass matrix is not positive definite".into()))?;
        xs.truncate(take);

        let mut ritz = Vec::with_capacity(take);
        let mut unconverged = Vec::new();
        worst = 0.0;
        for (idx, x) in xs.into_iter().enumerate() {
            let kx = k.matvec(&x);
            let mx = m.matvec(&x);
            let lambda = dot(&x, &kx).re / dot(&x, &mx).re;
            let mut r = kx.clone();
            axpy(&mut r, Complex64::new(-lambda, 0.0), &mx);
            let rn = norm(&r);
            if idx < nev {
                let bound = opts.tol * (norm(&kx) + lambda.abs() * norm(&mx))
                    + 100.0 * f64::EPSILON * knorm * norm(&x);
                worst = worst.max(rn / bound);
                if rn > bound {
                    unconverged.push(idx);
                    residuals.push(r);
                }
            }
            ritz.push(Ritz { lambda, x, residual: rn });
        }

        if unconverged.is_empty() || dim == n {
            ritz.truncate(nev);
            ritz.sort_by(|a, b| a.lambda.total_cmp(&b.lambda));
            return finalize(ritz);
        }

        // A shift far below the wanted band lets the lowest modes swamp the
        // projected operator and separates the low modes poorly; move it
        // just below the slowest unconverged pair instead.
        if opts.shift.is_none() {
            let target = unconverged.iter().map(|&i| ritz[i].lambda).fold(f64::INFINITY, f64::min);
            if target > 0.0 && target.is_finite() {
                shift = -0.5 * target;
            }
        }

        // thick restart from the wanted Ritz vectors
        seeds = ritz.into_iter().map(|r| r.x).collect();
    }
    Err(Error::NoConvergence {
        iterations: opts.max_restarts,
        residual: worst,
    })
}

/// Rayleigh-Ritz for `(K, M)` on `span(xs)`; vectors returned M-orthonormal
/// and ascending in eigenvalue.
fn refine(k: &HermBand, m: &HermBand, xs: &[Vector]) -> Option<Vec<Vector>> {
    let q = xs.len();
    let kx: Vec<Vector> = xs.iter().map(|x| k.matvec(x)).collect();
    let mx: Vec<Vector> = xs.iter().map(|x| m.matvec(x)).collect();
    let h = DMatrix::from_fn(q, q, |i, j| dot(&xs[i], &kx[j]));
    let g = DMatrix::from_fn(q, q, |i, j| dot(&xs[i], &mx[j]));
    let h = (&h + h.adjoint()) * Complex64::new(0.5, 0.0);
    let g = (&g + g.adjoint()) * Complex64::new(0.5, 0.0);
    let l = g.cholesky()?.l();
    let linv = l.try_inverse()?;
    let a = &linv * h * linv.adjoint();
    let a = (&a + a.adjoint()) * Complex64::new(0.5, 0.0);
    let eig = SymmetricEigen::new(a);
    let z = linv.adjoint() * &eig.eigenvectors;
    let mut order: Vec<usize> = (0..q).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    Some(
        order
            .into_iter()
            .map(|c| {
                let mut x = vec![Complex64::new(0.0, 0.0); xs[0].len()];
                for (i, xi) in xs.iter().enumerate() {
                    axpy(&mut x, z[(i, c)], xi);
                }
                x
            })
            .collect(),
    )
}

fn finalize(ritz: Vec<Ritz>) -> Result<Vec<EigenPair>> {
    let max_abs = ritz.iter().map(|r| r.lambda.abs()).fold(0.0, f64::max);
    let clamp = 1e-6 * max_abs;
    let mut out = Vec::with_capacity(ritz.len());
    for r in ritz {
        let lambda = if r.lambda < 0.0 {
            if r.lambda < -clamp {
                return Err(Error::Instability {
                    eigenvalue: r.lambda,
                    clamp,
                    context: String::new(),
                });
            }
            0.0
        } else {
            r.lambda
        };
        out.push(EigenPair {
            omega: lambda.sqrt(),
            lambda,
            vector: r.x,
            residual: r.residual,
        });
    }
    Ok(out)
}

/// Dense reference solve (test oracle and tiny problems).
pub fn solve_dense(k: &HermBand, m: &HermBand) -> Vec<f64> {
    let n = k.n();
    let kd = DMatrix::from_fn(n, n, |i, j| k.get(i, j));
    let md = DMatrix::from_fn(n, n, |i, j| m.get(i, j));
    let l = md.cholesky().expect("M positive definite").l();
    let linv = l.try_inverse().expect("invertible factor");
    let a = &linv * kd * linv.adjoint();
    let a = (&a + a.adjoint()) * Complex64::new(0.5, 0.0);
    let mut ev: Vec<f64> = SymmetricEigen::new(a).eigenvalues.iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constitutive::{Material, MaterialKind};
    use crate::prestress;
    use crate::unitcell::assembly::assemble;
    use crate::unitcell::floquet::floquet_reduce;
    use crate::unitcell::mesh::UnitCellMesh;

    fn reduced(nx: usize, ny: usize, k: f64) -> (HermBand, HermBand) {
        let mesh = UnitCellMesh::build(1e-4, 1e-3, nx, ny).unwrap();
        let mat = Material::almg3(MaterialKind::Linear, 68e9);
        let st = prestress::solve(&mat, 0.0).unwrap();
        floquet_reduce(&assemble(&mesh, &mat, &st).unwrap(), &mesh, k)
    }

    #[test]
    fn matches_dense_oracle() {
        for (k, nx, ny) in [(0.0, 1, 3), (2500.0, 2, 6), (9000.0, 1, 8)] {
            let (kb, mb) = reduced(nx, ny, k);
            let pairs = solve_eigen(&kb, &mb, 8, &EigenOptions::default()).unwrap();
            let dense = solve_dense(&kb, &mb);
            let scale = dense[7].abs();
            for (p, d) in pairs.iter().zip(&dense) {
                assert!((p.lambda - d.max(0.0)).abs() < 1e-8 * scale, "k={k}: {} vs {d}", p.lambda);
            }
        }
    }

    #[test]
    fn rigid_modes_at_zero_wavenumber() {
        let (kb, mb) = reduced(2, 10, 0.0);
        let pairs = solve_eigen(&kb, &mb, 8, &EigenOptions::default()).unwrap();
        let rigid = pairs.iter().filter(|p| p.omega < 1e-3 * pairs[7].omega).count();
        assert_eq!(rigid, 2);
    }

    #[test]
    fn residuals_and_orthonormality() {
        let (kb, mb) = reduced(2, 20, 3000.0);
        let pairs = solve_eigen(&kb, &mb, 8, &EigenOptions::default()).unwrap();
        for p in &pairs {
            let kv = kb.matvec(&p.vector);
            let mut r = kv.clone();
            axpy(&mut r, Complex64::new(-p.lambda, 0.0), &mb.matvec(&p.vector));
            assert!(norm(&r) / norm(&kv) < 1e-9, "{}", norm(&r) / norm(&kv));
        }
        for (i, a) in pairs.iter().enumerate() {
            let ma = mb.matvec(&a.vector);
            for (j, b) in pairs.iter().enumerate() {
                let g = dot(&b.vector, &ma);
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((g - expect).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn negative_eigenvalue_beyond_clamp_is_instability() {
        let mut kb = HermBand::zeros(3, 0);
        let mut mb = HermBand::zeros(3, 0);
        for (i, v) in [-1.0, 2.0, 3.0].iter().enumerate() {
            kb.add(i, i, Complex64::new(*v, 0.0));
            mb.add(i, i, Complex64::new(1.0, 0.0));
        }
        let opts = EigenOptions { shift: Some(-10.0), ..Default::default() };
        assert!(matches!(solve_eigen(&kb, &mb, 2, &opts), Err(Error::Instability { .. })));
        // the default shift sits above −1, so the factorization must retreat first
        assert!(matches!(
            solve_eigen(&kb, &mb, 2, &EigenOptions::default()),
            Err(Error::Instability { .. })
        ));
        // tiny negative values clamp to zero
        let mut kb = HermBand::zeros(2, 0);
        kb.add(0, 0, Complex64::new(-1e-9, 0.0));
        kb.add(1, 1, Complex64::new(5.0, 0.0));
        let mut mb = HermBand::zeros(2, 0);
        mb.add(0, 0, Complex64::new(1.0, 0.0));
        mb.add(1, 1, Complex64::new(1.0, 0.0));
        let pairs = solve_eigen(&kb, &mb, 2, &opts).unwrap();
        assert_eq!(pairs[0].lambda, 0.0);
        assert!((pairs[1].lambda - 5.0).abs() < 1e-12);
    }
}
