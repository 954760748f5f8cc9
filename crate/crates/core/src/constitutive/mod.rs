//! Isotropic hyperelastic strain-energy functions.
//!
//! Every model is written in terms of the invariants of the right
//! Cauchy-Green tensor `C = FᵀF`. Stresses are second Piola-Kirchhoff
//! (`S = 2 ∂W/∂C`) and the material tangent is `ℂ = 4 ∂²W/∂C∂C`.
//! Derivatives are closed form; finite differences only appear in
//! [`fdcheck`].

pub mod fdcheck;

use crate::error::{Error, Result};
use crate::tensor::{asymmetry, Tensor2, Tensor4};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

/// AlMg3 plate properties used throughout the numerical study.
pub mod almg3 {
    /// Young's modulus measured on the 2 mm specimens, Pa.
    pub const E_2MM: f64 = 64.4e9;
    /// Young's modulus measured on the 0.5 mm specimens, Pa.
    pub const E_05MM: f64 = 68.0e9;
    pub const NU: f64 = 0.33;
    /// kg/m³
    pub const RHO: f64 = 2700.0;
    /// Third-order constants ℓ, m, n in Pa.
    pub const ELL: f64 = -255.2e9;
    pub const M: f64 = -325.0e9;
    pub const N: f64 = -351.2e9;
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MaterialKind {
    /// St. Venant-Kirchhoff quadratic energy; the linear reference model.
    Linear,
    NeoHooke,
    Murnaghan,
}

impl MaterialKind {
    pub const ALL: [MaterialKind; 3] = [
        MaterialKind::Linear,
        MaterialKind::NeoHooke,
        MaterialKind::Murnaghan,
    ];

    pub fn name(self) -> &'static str {
        match self {
            MaterialKind::Linear => "linear",
            MaterialKind::NeoHooke => "neo-hooke",
            MaterialKind::Murnaghan => "murnaghan",
        }
    }
}

impl fmt::Display for MaterialKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MaterialKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace('_', "-").as_str() {
            "linear" => Ok(MaterialKind::Linear),
            "neo-hooke" | "neohooke" => Ok(MaterialKind::NeoHooke),
            "murnaghan" => Ok(MaterialKind::Murnaghan),
            other => Err(Error::domain(format!("unknown material model '{other}'"))),
        }
    }
}

/// Material constants. All moduli in Pa, density in kg/m³.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Material {
    pub kind: MaterialKind,
    pub lambda: f64,
    pub mu: f64,
    pub rho0: f64,
    pub ell: f64,
    pub m3: f64,
    pub n3: f64,
}

impl Material {
    /// Third-order constants are dropped (stored as zero) unless `kind` is Murnaghan.
    pub fn new(
        kind: MaterialKind,
        lambda: f64,
        mu: f64,
        rho0: f64,
        third_order: (f64, f64, f64),
    ) -> Result<Self> {
        if !(mu > 0.0) || !(rho0 > 0.0) || !(3.0 * lambda + 2.0 * mu > 0.0) {
            return Err(Error::domain(format!(
                "need mu > 0, rho0 > 0, 3λ+2μ > 0 (λ={lambda}, μ={mu}, ρ₀={rho0})"
            )));
        }
        let (ell, m3, n3) = match kind {
            MaterialKind::Murnaghan => third_order,
            _ => (0.0, 0.0, 0.0),
        };
        if ![ell, m3, n3].iter().all(|v| v.is_finite()) {
            return Err(Error::domain("third-order constants must be finite"));
        }
        Ok(Material {
            kind,
            lambda,
            mu,
            rho0,
            ell,
            m3,
            n3,
        })
    }

    pub fn from_engineering(
        kind: MaterialKind,
        young: f64,
        nu: f64,
        rho0: f64,
        third_order: (f64, f64, f64),
    ) -> Result<Self> {
        let (lambda, mu) = from_engineering(young, nu)?;
        Material::new(kind, lambda, mu, rho0, third_order)
    }

    /// AlMg3 with the literature third-order constants and the given Young's modulus.
    pub fn almg3(kind: MaterialKind, young: f64) -> Self {
        Material::from_engineering(
            kind,
            young,
            almg3::NU,
            almg3::RHO,
            (almg3::ELL, almg3::M, almg3::N),
        )
        .expect("tabulated constants are valid")
    }

    pub fn young(&self) -> f64 {
        self.mu * (3.0 * self.lambda + 2.0 * self.mu) / (self.lambda + self.mu)
    }

    pub fn poisson(&self) -> f64 {
        self.lambda / (2.0 * (self.lambda + self.mu))
    }

    /// Bulk longitudinal velocity in the unstressed state.
    pub fn c_longitudinal(&self) -> f64 {
        ((self.lambda + 2.0 * self.mu) / self.rho0).sqrt()
    }

    pub fn c_shear(&self) -> f64 {
        (self.mu / self.rho0).sqrt()
    }

    /// Same elastic constants, different energy function.
    pub fn with_kind(&self, kind: MaterialKind) -> Self {
        Material::new(
            kind,
            self.lambda,
            self.mu,
            self.rho0,
            (self.ell, self.m3, self.n3),
        )
        .expect("constants already validated")
    }
}

/// `(λ, μ)` from Young's modulus and Poisson's ratio.
pub fn from_engineering(young: f64, nu: f64) -> Result<(f64, f64)> {
    if !(young > 0.0) {
        return Err(Error::domain(format!("Young's modulus must be positive, got {young}")));
    }
    if !(nu > -1.0 && nu < 0.5) {
        return Err(Error::domain(format!("Poisson ratio must lie in (-1, 0.5), got {nu}")));
    }
    let lambda = young * nu / ((1.0 + nu) * (1.0 - 2.0 * nu));
    let mu = young / (2.0 * (1.0 + nu));
    Ok((lambda, mu))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Invariants {
    pub i1: f64,
    pub i2: f64,
    pub i3: f64,
}

fn check_spd(c: &Tensor2) -> Result<()> {
    let scale = c.abs().max().max(f64::MIN_POSITIVE);
    if asymmetry(c) > 1e-12 * scale {
        return Err(Error::domain("right Cauchy-Green tensor is not symmetric"));
    }
    if c.cholesky().is_none() {
        return Err(Error::domain("right Cauchy-Green tensor is not positive definite"));
    }
    Ok(())
}

pub fn invariants(c: &Tensor2) -> Result<Invariants> {
    check_spd(c)?;
    Ok(invariants_unchecked(c))
}

fn invariants_unchecked(c: &Tensor2) -> Invariants {
    let tr = c.trace();
    let tr_sq = (c * c).trace();
    Invariants {
        i1: tr,
        i2: 0.5 * (tr * tr - tr_sq),
        i3: c.determinant(),
    }
}

/// Partial derivatives of W with respect to (I1, I2, I3) up to second order.
struct InvariantDerivs {
    w: [f64; 3],
    ww: [[f64; 3]; 3],
}

fn invariant_derivs(mat: &Material, inv: &Invariants) -> InvariantDerivs {
    let Invariants { i1, i2, i3 } = *inv;
    let (lambda, mu) = (mat.lambda, mat.mu);
    match mat.kind {
        MaterialKind::Murnaghan | MaterialKind::Linear => {
            // Linear is handled in E-form elsewhere; this branch serves Murnaghan
            // (and Linear coincides with it for vanishing third-order constants).
            let (l, m, n) = (mat.ell, mat.m3, mat.n3);
            let a = i1 - 3.0;
            let w1 = lambda / 4.0 * a
                + mu / 4.0 * (2.0 * i1 - 2.0)
                + l / 8.0 * a * a
                + m / 12.0 * ((i1 * i1 - 3.0 * i2) + 2.0 * i1 * a)
                + n / 8.0;
            let w2 = -mu / 2.0 - m / 4.0 * a - n / 8.0;
            let w3 = n / 8.0;
            let w11 = lambda / 4.0 + mu / 2.0 + l / 4.0 * a + m / 2.0 * (i1 - 1.0);
            let w12 = -m / 4.0;
            InvariantDerivs {
                w: [w1, w2, w3],
                ww: [[w11, w12, 0.0], [w12, 0.0, 0.0], [0.0, 0.0, 0.0]],
            }
        }
        MaterialKind::NeoHooke => {
            let ln3 = i3.ln();
            let w3 = (lambda / 4.0 * ln3 - mu / 2.0) / i3;
            let w33 = (lambda / 4.0 - lambda / 4.0 * ln3 + mu / 2.0) / (i3 * i3);
            InvariantDerivs {
                w: [mu / 2.0, 0.0, w3],
                ww: [[0.0; 3], [0.0; 3], [0.0, 0.0, w33]],
            }
        }
    }
}

fn green_lagrange(c: &Tensor2) -> Tensor2 {
    0.5 * (c - Tensor2::identity())
}

/// Strain energy per unit reference volume, Pa.
///
/// Neo-Hooke uses `½λ (ln J)² − μ ln J + ½μ (I1 − 3)` with `J = √I3`, the
/// compressible form that is stress free at `C = I` and linearizes to the
/// Lamé constants.
pub fn strain_energy(mat: &Material, c: &Tensor2) -> Result<f64> {
    let inv = invariants(c)?;
    if !(inv.i3 > 0.0) {
        return Err(Error::domain("I3 must be positive"));
    }
    let (lambda, mu) = (mat.lambda, mat.mu);
    Ok(match mat.kind {
        MaterialKind::Linear => {
            let e = green_lagrange(c);
            let tr = e.trace();
            0.5 * lambda * tr * tr + mu * e.component_mul(&e).sum()
        }
        MaterialKind::NeoHooke => {
            let ln_j = 0.5 * inv.i3.ln();
            0.5 * lambda * ln_j * ln_j - mu * ln_j + 0.5 * mu * (inv.i1 - 3.0)
        }
        MaterialKind::Murnaghan => {
            // The invariant polynomial rewritten in E = ½(C − I), which avoids
            // cancellation near C = I:
            //   I1 − 3 = 2 tr E,  I1² − 2I1 − 2I2 + 3 = 4 tr E²,
            //   (I1 − 3)(I1² − 3I2) = 12 tr E tr E² − 4 tr³E,  I1 − I2 + I3 − 1 = 8 det E.
            let e = green_lagrange(c);
            let a = e.trace();
            let b = (e * e).trace();
            0.5 * lambda * a * a
                + mu * b
                + mat.ell / 3.0 * a * a * a
                + mat.m3 * (a * b - a * a * a / 3.0)
                + mat.n3 * e.determinant()
        }
    })
}

/// Second Piola-Kirchhoff stress `S = 2 ∂W/∂C`, Pa.
pub fn pk2_stress(mat: &Material, c: &Tensor2) -> Result<Tensor2> {
    let inv = invariants(c)?;
    if !(inv.i3 > 0.0) {
        return Err(Error::domain("I3 must be positive"));
    }
    let eye = Tensor2::identity();
    if mat.kind == MaterialKind::Linear {
        let e = green_lagrange(c);
        return Ok(mat.lambda * e.trace() * eye + 2.0 * mat.mu * e);
    }
    let d = invariant_derivs(mat, &inv);
    let cinv = c.try_inverse().ok_or_else(|| Error::domain("singular C"))?;
    let s = d.w[0] * eye + d.w[1] * (inv.i1 * eye - c) + d.w[2] * inv.i3 * cinv;
    Ok(2.0 * s)
}

/// Material tangent `ℂ = 4 ∂²W/∂C∂C`, Pa.
pub fn material_tangent(mat: &Material, c: &Tensor2) -> Result<Tensor4> {
    let inv = invariants(c)?;
    if !(inv.i3 > 0.0) {
        return Err(Error::domain("I3 must be positive"));
    }
    if mat.kind == MaterialKind::Linear {
        return Ok(Tensor4::isotropic(mat.lambda, mat.mu));
    }
    let eye = Tensor2::identity();
    let cinv = c.try_inverse().ok_or_else(|| Error::domain("singular C"))?;
    let d = invariant_derivs(mat, &inv);
    let grads = [eye, inv.i1 * eye - c, inv.i3 * cinv];

    let mut t = Tensor4::zeros();
    for a in 0..3 {
        for b in 0..3 {
            if d.ww[a][b] != 0.0 {
                t = t + Tensor4::dyad(&grads[a], &grads[b]) * d.ww[a][b];
            }
        }
    }
    // second derivatives of the invariants themselves
    if d.w[1] != 0.0 {
        let d2_i2 = Tensor4::dyad(&eye, &eye) - Tensor4::sym_square(&eye, &eye);
        t = t + d2_i2 * d.w[1];
    }
    if d.w[2] != 0.0 {
        let d2_i3 =
            (Tensor4::dyad(&cinv, &cinv) - Tensor4::sym_square(&cinv, &cinv)) * inv.i3;
        t = t + d2_i3 * d.w[2];
    }
    Ok(t * 4.0)
}

/// First Piola-Kirchhoff stress `P = F·S(FᵀF)`.
pub fn pk1_stress(mat: &Material, f: &Tensor2) -> Result<Tensor2> {
    check_det(f)?;
    Ok(f * pk2_stress(mat, &(f.transpose() * f))?)
}

fn check_det(f: &Tensor2) -> Result<()> {
    let det = f.determinant();
    if !(det > 0.0) {
        return Err(Error::domain(format!("det F must be positive, got {det}")));
    }
    Ok(())
}

/// First elasticity tensor `A_iJkL = ∂P_iJ/∂F_kL = δ_ik S_JL + F_iI F_kK ℂ_IJKL`.
pub fn first_elasticity(mat: &Material, f: &Tensor2) -> Result<Tensor4> {
    check_det(f)?;
    let c = f.transpose() * f;
    let s = pk2_stress(mat, &c)?;
    let cc = material_tangent(mat, &c)?;
    let (geo, matl) = split_first_elasticity(f, &s, &cc);
    Ok(geo + matl)
}

/// Splits `A` into its initial-stress part `δ_ik S_JL` and its material part
/// `F_iI F_kK ℂ_IJKL`.
pub fn split_first_elasticity(f: &Tensor2, s: &Tensor2, cc: &Tensor4) -> (Tensor4, Tensor4) {
    let geo = Tensor4::from_fn(|i, j, k, l| if i == k { s[(j, l)] } else { 0.0 });
    // contract in two passes: G_iJKL = F_iI ℂ_IJKL, then A_iJkL = F_kK G_iJKL
    let g = Tensor4::from_fn(|i, j, kk, l| (0..3).map(|ii| f[(i, ii)] * cc[(ii, j, kk, l)]).sum());
    let matl = Tensor4::from_fn(|i, j, k, l| (0..3).map(|kk| f[(k, kk)] * g[(i, j, kk, l)]).sum());
    (geo, matl)
}
