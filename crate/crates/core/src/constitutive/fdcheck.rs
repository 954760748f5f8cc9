//! Finite-difference verification of the closed-form stress and tangent.
//!
//! Central differences over a step sweep; the smallest error over the sweep
//! is reported so that neither truncation nor cancellation dominates.

use super::{material_tangent, pk2_stress, strain_energy, Material};
use crate::error::Result;
use crate::tensor::{Tensor2, Tensor4};
use nalgebra::{Rotation3, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const STEPS: [f64; 4] = [1e-4, 1e-5, 1e-6, 1e-7];

/// Worst relative errors over a batch of random states.
#[derive(Clone, Copy, Debug)]
pub struct FdReport {
    pub states: usize,
    pub stress_rel_err: f64,
    pub tangent_rel_err: f64,
}

/// Symmetric unit direction for the (i, j) component of a symmetric tensor.
fn sym_dir(i: usize, j: usize) -> Tensor2 {
    let mut d = Tensor2::zeros();
    d[(i, j)] = 1.0;
    d[(j, i)] = 1.0;
    d
}

/// `2 ∂W/∂C` by central differences with step `h`.
pub fn fd_stress(mat: &Material, c: &Tensor2, h: f64) -> Result<Tensor2> {
    let mut s = Tensor2::zeros();
    for i in 0..3 {
        for j in i..3 {
            let d = sym_dir(i, j);
            let dw = (strain_energy(mat, &(c + h * d))? - strain_energy(mat, &(c - h * d))?)
                / (2.0 * h);
            // ∂W/∂C : D = ½ S : D, which is S_ij off the diagonal and ½ S_ii on it
            let v = if i == j { 2.0 * dw } else { dw };
            s[(i, j)] = v;
            s[(j, i)] = v;
        }
    }
    Ok(s)
}

/// `2 ∂S/∂C` by central differences with step `h`.
pub fn fd_tangent(mat: &Material, c: &Tensor2, h: f64) -> Result<Tensor4> {
    let mut t = Tensor4::zeros();
    for k in 0..3 {
        for l in k..3 {
            let d = sym_dir(k, l);
            let mut ds = (pk2_stress(mat, &(c + h * d))? - pk2_stress(mat, &(c - h * d))?) / (2.0 * h);
            // same halving of the diagonal directions as for the stress
            if k == l {
                ds *= 2.0;
            }
            for i in 0..3 {
                for j in 0..3 {
                    t[(i, j, k, l)] = ds[(i, j)];
                    t[(i, j, l, k)] = ds[(i, j)];
                }
            }
        }
    }
    Ok(t)
}

/// Random symmetric positive-definite tensor with eigenvalues in `[lo, hi]`.
pub fn random_spd(rng: &mut impl Rng, lo: f64, hi: f64) -> Tensor2 {
    let axis = Vector3::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5);
    let q = Rotation3::new(axis.normalize() * rng.gen_range(0.0..std::f64::consts::PI)).into_inner();
    let d = Tensor2::from_diagonal(&Vector3::from_fn(|_, _| rng.gen_range(lo..=hi)));
    q * d * q.transpose()
}

pub fn check_state(mat: &Material, c: &Tensor2) -> Result<(f64, f64)> {
    let s = pk2_stress(mat, c)?;
    let cc = material_tangent(mat, c)?;
    let mut stress_err = f64::INFINITY;
    let mut tangent_err = f64::INFINITY;
    for h in STEPS {
        stress_err = stress_err.min((fd_stress(mat, c, h)? - s).norm() / s.norm().max(f64::MIN_POSITIVE));
        tangent_err = tangent_err.min((fd_tangent(mat, c, h)? - cc).norm() / cc.norm());
    }
    Ok((stress_err, tangent_err))
}

/// Checks `states` random states with eigenvalues of C in `[0.9, 1.1]`.
pub fn verify(mat: &Material, states: usize, seed: u64) -> Result<FdReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = FdReport {
        states,
        stress_rel_err: 0.0,
        tangent_rel_err: 0.0,
    };
    for _ in 0..states {
        let c = random_spd(&mut rng, 0.9, 1.1);
        let (se, te) = check_state(mat, &c)?;
        report.stress_rel_err = report.stress_rel_err.max(se);
        report.tangent_rel_err = report.tangent_rel_err.max(te);
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constitutive::MaterialKind;

    #[test]
    fn closed_forms_pass_for_every_model() {
        for kind in MaterialKind::ALL {
            let r = verify(&Material::almg3(kind, 68e9), 20, 3).unwrap();
            assert!(r.stress_rel_err < 1e-6 && r.tangent_rel_err < 1e-5, "{kind}: {r:?}");
        }
    }

    #[test]
    fn diagonal_and_shear_components_are_both_checked() {
        // a state with a large shear entry and distinct diagonal
        let mut c = Tensor2::identity();
        c[(0, 0)] = 1.05;
        c[(0, 1)] = 0.04;
        c[(1, 0)] = 0.04;
        let mat = Material::almg3(MaterialKind::Murnaghan, 68e9);
        let s = pk2_stress(&mat, &c).unwrap();
        let fd = fd_stress(&mat, &c, 1e-6).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                assert!((fd[(i, j)] - s[(i, j)]).abs() < 1e-6 * s.norm(), "({i},{j})");
            }
        }
    }
}
