//! Master-slave elimination of the Floquet condition `u_right = e^{ikΔx₁} u_left`.

use super::assembly::AssembledSystem;
use super::band::{HermBand, RealBand};
use super::mesh::UnitCellMesh;
use num_complex::Complex64;

/// Lower bandwidth of the reduced matrices.
pub fn reduced_bandwidth(mesh: &UnitCellMesh) -> usize {
    let mut kd = 0;
    for el in &mesh.elements {
        for &a in el {
            for &b in el {
                let (ra, _) = mesh.reduce(a);
                let (rb, _) = mesh.reduce(b);
                kd = kd.max(2 * ra.abs_diff(rb) + 1);
            }
        }
    }
    kd
}

/// `Tᴴ A T` for the phase transformation `T(k)`.
pub fn reduce_matrix(a: &RealBand, mesh: &UnitCellMesh, k: f64) -> HermBand {
    let phase = Complex64::from_polar(1.0, k * mesh.dx1);
    let n = mesh.n_reduced_dof();
    let mut out = HermBand::zeros(n, reduced_bandwidth(mesh));
    let map = |dof: usize| {
        let (r, slave) = mesh.reduce(dof / 2);
        (2 * r + dof % 2, if slave { phase } else { Complex64::new(1.0, 0.0) })
    };
    for (p, q, v) in a.lower_entries() {
        if v == 0.0 {
            continue;
        }
        let (rp, php) = map(p);
        let (rq, phq) = map(q);
        let w = php.conj() * v * phq;
        if p != q && rp == rq {
            // (p, q) and (q, p) fold onto the same diagonal entry
            out.add(rp, rp, Complex64::new(2.0 * w.re, 0.0));
        } else {
            // one stored entry stands for both triangles
            out.add(rp, rq, w);
        }
    }
    out
}

/// Reduced `(Kbar, Mbar)` at wavenumber `k` (rad/m, reference configuration).
pub fn floquet_reduce(sys: &AssembledSystem, mesh: &UnitCellMesh, k: f64) -> (HermBand, HermBand) {
    (reduce_matrix(&sys.stiffness(), mesh, k), reduce_matrix(&sys.m, mesh, k))
}

/// Expands a reduced vector to all mesh nodes.
pub fn expand(v: &[Complex64], mesh: &UnitCellMesh, k: f64) -> Vec<Complex64> {
    let phase = Complex64::from_polar(1.0, k * mesh.dx1);
    (0..mesh.n_dof())
        .map(|dof| {
            let (r, slave) = mesh.reduce(dof / 2);
            let val = v[2 * r + dof % 2];
            if slave {
                val * phase
            } else {
                val
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constitutive::{Material, MaterialKind};
    use crate::prestress;
    use crate::unitcell::assembly::assemble;
    use nalgebra::DMatrix;

    fn dense(b: &HermBand) -> DMatrix<Complex64> {
        DMatrix::from_fn(b.n(), b.n(), |i, j| b.get(i, j))
    }

    fn system(kind: MaterialKind, sigma: f64) -> (UnitCellMesh, AssembledSystem) {
        let mesh = UnitCellMesh::build(1e-4, 1e-3, 2, 4).unwrap();
        let mat = Material::almg3(kind, 68e9);
        let st = prestress::solve(&mat, sigma).unwrap();
        let sys = assemble(&mesh, &mat, &st).unwrap();
        (mesh, sys)
    }

    #[test]
    fn zero_wavenumber_has_two_rigid_modes() {
        let (mesh, sys) = system(MaterialKind::Linear, 0.0);
        let (k, m) = floquet_reduce(&sys, &mesh, 0.0);
        let kd = dense(&k);
        assert!(kd.iter().all(|v| v.im == 0.0));
        // generalized eigenvalues via M^{-1/2} K M^{-1/2}
        let md = dense(&m).map(|v| v.re);
        let l = md.cholesky().unwrap().l();
        let linv = l.try_inverse().unwrap();
        let a = &linv * kd.map(|v| v.re) * linv.transpose();
        let a = 0.5 * (&a + a.transpose());
        let ev = a.symmetric_eigenvalues();
        let scale = ev.amax();
        let zeros = ev.iter().filter(|v| v.abs() < 1e-10 * scale).count();
        assert_eq!(zeros, 2);
    }

    #[test]
    fn full_phase_turn_equals_zero_wavenumber() {
        let (mesh, sys) = system(MaterialKind::NeoHooke, 50e6);
        let (k0, m0) = floquet_reduce(&sys, &mesh, 0.0);
        let (k1, m1) = floquet_reduce(&sys, &mesh, 2.0 * std::f64::consts::PI / mesh.dx1);
        let dk = (dense(&k0) - dense(&k1)).camax() / dense(&k0).camax();
        let dm = (dense(&m0) - dense(&m1)).camax() / dense(&m0).camax();
        assert!(dk < 1e-12 && dm < 1e-12, "{dk} {dm}");
    }

    #[test]
    fn reduced_matrices_are_hermitian() {
        let (mesh, sys) = system(MaterialKind::Murnaghan, 100e6);
        for k in [123.0, 4567.0, 31000.0] {
            let (kb, mb) = floquet_reduce(&sys, &mesh, k);
            let kd = dense(&kb);
            let res = (&kd - kd.adjoint()).norm() / kd.norm();
            assert!(res < 1e-13, "{res}");
            assert!(dense(&mb).cholesky().is_some());
        }
    }

    #[test]
    fn expand_applies_phase_on_right_edge() {
        let (mesh, _) = system(MaterialKind::Linear, 0.0);
        let v: Vec<Complex64> = (0..mesh.n_reduced_dof()).map(|i| Complex64::new(i as f64, 0.0)).collect();
        let k = 1000.0;
        let full = expand(&v, &mesh, k);
        let ph = Complex64::from_polar(1.0, k * mesh.dx1);
        for (l, r) in mesh.left_nodes().iter().zip(mesh.right_nodes()) {
            assert!((full[2 * r] - full[2 * l] * ph).norm() < 1e-12);
        }
    }
}
