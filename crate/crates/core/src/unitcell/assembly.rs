//! Plane-strain assembly of mass, material and initial-stress matrices.

use super::band::RealBand;
use super::mesh::UnitCellMesh;
use crate::constitutive::{material_tangent, split_first_elasticity, Material, MaterialKind};
use crate::error::{Error, Result};
use crate::prestress::PreStressState;
use crate::tensor::{Tensor2, Tensor4};

/// 3-point Gauss-Legendre rule on [−1, 1] as `(abscissa, weight)`.
pub const GAUSS3: [(f64, f64); 3] = [
    (-0.774_596_669_241_483_4, 5.0 / 9.0),
    (0.0, 8.0 / 9.0),
    (0.774_596_669_241_483_4, 5.0 / 9.0),
];

fn lagrange(x: f64) -> ([f64; 3], [f64; 3]) {
    (
        [0.5 * x * (x - 1.0), 1.0 - x * x, 0.5 * x * (x + 1.0)],
        [x - 0.5, -2.0 * x, x + 0.5],
    )
}

/// Biquadratic shape functions and their parametric gradients at `(ξ, η)`.
pub fn shape(xi: f64, eta: f64) -> ([f64; 9], [[f64; 2]; 9]) {
    let (lx, dlx) = lagrange(xi);
    let (ly, dly) = lagrange(eta);
    let mut n = [0.0; 9];
    let mut dn = [[0.0; 2]; 9];
    for q in 0..3 {
        for p in 0..3 {
            n[3 * q + p] = lx[p] * ly[q];
            dn[3 * q + p] = [dlx[p] * ly[q], lx[p] * dly[q]];
        }
    }
    (n, dn)
}

/// How the pre-stress enters the wave problem.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Kinematics {
    /// Linearization about the pre-stressed state: `Kd` from the material part
    /// of the first elasticity at `F^s`, `Ks` from `S^s`.
    Finite,
    /// Infinitesimal-strain elasticity about the undeformed state; the
    /// pre-stress has no effect on the wave operator.
    Small,
}

impl Kinematics {
    /// Linear elasticity uses small-strain kinematics, the hyperelastic
    /// models use the finite linearization.
    pub fn default_for(kind: MaterialKind) -> Self {
        match kind {
            MaterialKind::Linear => Kinematics::Small,
            _ => Kinematics::Finite,
        }
    }
}

/// Global matrices in full (unreduced) DOF ordering.
#[derive(Clone, Debug)]
pub struct AssembledSystem {
    pub m: RealBand,
    pub kd: RealBand,
    pub ks: RealBand,
    pub kinematics: Kinematics,
    pub sigma: f64,
}

impl AssembledSystem {
    pub fn stiffness(&self) -> RealBand {
        RealBand::combine(1.0, &self.kd, 1.0, &self.ks)
    }
}

pub(crate) struct ElementMatrices {
    pub kd: [[f64; 18]; 18],
    pub ks: [[f64; 18]; 18],
    pub m: [[f64; 18]; 18],
}

/// Element matrices for homogeneous material part `amat` (in-plane indices of
/// `A_iJkL`) and pre-stress `s`.
pub(crate) fn element_matrices(coords: &[[f64; 2]; 9], amat: &Tensor4, s: &Tensor2, rho0: f64) -> ElementMatrices {
    let mut out = ElementMatrices {
        kd: [[0.0; 18]; 18],
        ks: [[0.0; 18]; 18],
        m: [[0.0; 18]; 18],
    };
    for &(xi, wx) in GAUSS3.iter() {
        for &(eta, wy) in GAUSS3.iter() {
            let (n, dn) = shape(xi, eta);
            let mut jac = [[0.0; 2]; 2];
            for a in 0..9 {
                for r in 0..2 {
                    jac[0][r] += dn[a][r] * coords[a][0];
                    jac[1][r] += dn[a][r] * coords[a][1];
                }
            }
            let det = jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0];
            let inv = [
                [jac[1][1] / det, -jac[0][1] / det],
                [-jac[1][0] / det, jac[0][0] / det],
            ];
            let mut g = [[0.0; 2]; 9];
            for a in 0..9 {
                for jj in 0..2 {
                    g[a][jj] = dn[a][0] * inv[0][jj] + dn[a][1] * inv[1][jj];
                }
            }
            let w = wx * wy * det;
            for a in 0..9 {
                for b in 0..9 {
                    let mab = w * rho0 * n[a] * n[b];
                    let mut geo = 0.0;
                    for jj in 0..2 {
                        for ll in 0..2 {
                            geo += g[a][jj] * s[(jj, ll)] * g[b][ll];
                        }
                    }
                    for i in 0..2 {
                        out.m[2 * a + i][2 * b + i] += mab;
                        out.ks[2 * a + i][2 * b + i] += w * geo;
                        for k in 0..2 {
                            let mut v = 0.0;
                            for jj in 0..2 {
                                for ll in 0..2 {
                                    v += g[a][jj] * amat[(i, jj, k, ll)] * g[b][ll];
                                }
                            }
                            out.kd[2 * a + i][2 * b + k] += w * v;
                        }
                    }
                }
            }
        }
    }
    out
}

fn full_bandwidth(mesh: &UnitCellMesh) -> usize {
    mesh.elements
        .iter()
        .map(|el| {
            let lo = el.iter().min().unwrap();
            let hi = el.iter().max().unwrap();
            2 * (hi - lo) + 1
        })
        .max()
        .unwrap_or(1)
}

/// Assembly with the kinematics appropriate to the material kind.
pub fn assemble(mesh: &UnitCellMesh, mat: &Material, state: &PreStressState) -> Result<AssembledSystem> {
    assemble_with(mesh, mat, state, Kinematics::default_for(mat.kind))
}

pub fn assemble_with(
    mesh: &UnitCellMesh,
    mat: &Material,
    state: &PreStressState,
    kinematics: Kinematics,
) -> Result<AssembledSystem> {
    if state.material != *mat {
        return Err(Error::Contract(format!(
            "pre-stress state was solved for a {} material, assembling {}",
            state.material.kind, mat.kind
        )));
    }
    let (amat, s) = match kinematics {
        Kinematics::Finite => {
            let f = state.f_s;
            let c = f.transpose() * f;
            let cc = material_tangent(mat, &c)?;
            let (_, matl) = split_first_elasticity(&f, &state.s_s, &cc);
            (matl, state.s_s)
        }
        Kinematics::Small => (Tensor4::isotropic(mat.lambda, mat.mu), Tensor2::zeros()),
    };

    let n = mesh.n_dof();
    let kd_bw = full_bandwidth(mesh);
    let mut kd = RealBand::zeros(n, kd_bw);
    let mut ks = RealBand::zeros(n, kd_bw);
    let mut m = RealBand::zeros(n, kd_bw);
    let mut coords = [[0.0; 2]; 9];
    for el in &mesh.elements {
        for (a, &node) in el.iter().enumerate() {
            coords[a] = mesh.nodes[node];
        }
        let em = element_matrices(&coords, &amat, &s, mat.rho0);
        for a in 0..18 {
            let p = 2 * el[a / 2] + a % 2;
            for b in 0..18 {
                let q = 2 * el[b / 2] + b % 2;
                if p >= q {
                    kd.add(p, q, em.kd[a][b]);
                    ks.add(p, q, em.ks[a][b]);
                    m.add(p, q, em.m[a][b]);
                }
            }
        }
    }
    Ok(AssembledSystem {
        m,
        kd,
        ks,
        kinematics,
        sigma: state.sigma_applied,
    })
}
