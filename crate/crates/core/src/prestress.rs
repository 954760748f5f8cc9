//! Homogeneous intermediate configuration of a strip in plane strain under
//! uniaxial nominal stress along x₁ with traction-free thickness faces.

use crate::constitutive::{first_elasticity, pk1_stress, pk2_stress, Material};
use crate::error::{Error, Result};
use crate::tensor::Tensor2;
use nalgebra::{Matrix2, Vector2, Vector3};

pub const DEFAULT_TOL: f64 = 1.0;
pub const DEFAULT_MAX_ITER: usize = 50;

/// Converged pre-stress state. `sigma_applied` is nominal (force per reference area).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PreStressState {
    pub material: Material,
    pub sigma_applied: f64,
    pub f_s: Tensor2,
    pub s_s: Tensor2,
    pub cauchy: Tensor2,
    pub residual_norm: f64,
}

impl PreStressState {
    /// The unloaded reference state.
    pub fn reference(mat: &Material) -> Self {
        PreStressState {
            material: *mat,
            sigma_applied: 0.0,
            f_s: Tensor2::identity(),
            s_s: Tensor2::zeros(),
            cauchy: Tensor2::zeros(),
            residual_norm: 0.0,
        }
    }

    /// Plane-strain stretch `F₁₁`.
    pub fn stretch(&self) -> f64 {
        self.f_s[(0, 0)]
    }
}

fn diag_f(f11: f64, f22: f64) -> Tensor2 {
    Tensor2::from_diagonal(&Vector3::new(f11, f22, 1.0))
}

fn residual(mat: &Material, f: &Tensor2, sigma: f64) -> Result<Vector2<f64>> {
    let p = pk1_stress(mat, f)?;
    Ok(Vector2::new(p[(0, 0)] - sigma, p[(1, 1)]))
}

/// Newton solve for `(F₁₁, F₂₂)` with `F₃₃ = 1`.
pub fn solve_uniaxial(mat: &Material, sigma: f64, tol: f64, max_iter: usize) -> Result<PreStressState> {
    let young = mat.young();
    if !sigma.is_finite() || sigma.abs() >= 0.01 * young {
        return Err(Error::domain(format!(
            "applied stress {sigma:.4e} Pa outside the validity envelope |σ| < 0.01·E = {:.4e} Pa",
            0.01 * young
        )));
    }
    if !(tol > 0.0) {
        return Err(Error::domain("Newton tolerance must be positive"));
    }
    if sigma == 0.0 {
        return Ok(PreStressState::reference(mat));
    }

    // plane-strain Hooke's law as the starting guess
    let nu = mat.poisson();
    let mut x = Vector2::new(
        1.0 + sigma * (1.0 - nu * nu) / young,
        1.0 - sigma * nu * (1.0 + nu) / young,
    );
    let mut f = diag_f(x[0], x[1]);
    let mut r = residual(mat, &f, sigma)?;
    let mut iter = 0;
    while r.norm() >= tol {
        if iter == max_iter {
            return Err(Error::NoConvergence {
                iterations: iter,
                residual: r.norm(),
            });
        }
        let a = first_elasticity(mat, &f)?;
        let jac = Matrix2::new(
            a[(0, 0, 0, 0)],
            a[(0, 0, 1, 1)],
            a[(1, 1, 0, 0)],
            a[(1, 1, 1, 1)],
        );
        let dx = jac
            .lu()
            .solve(&(-r))
            .ok_or_else(|| Error::domain("singular plane-strain tangent"))?;
        x += dx;
        f = diag_f(x[0], x[1]);
        r = residual(mat, &f, sigma)?;
        iter += 1;
    }

    let s = pk2_stress(mat, &(f.transpose() * f))?;
    let j = f.determinant();
    Ok(PreStressState {
        material: *mat,
        sigma_applied: sigma,
        f_s: f,
        s_s: s,
        cauchy: f * s * f.transpose() / j,
        residual_norm: r.norm(),
    })
}

/// [`solve_uniaxial`] with the default tolerance and iteration cap.
pub fn solve(mat: &Material, sigma: f64) -> Result<PreStressState> {
    solve_uniaxial(mat, sigma, DEFAULT_TOL, DEFAULT_MAX_ITER)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constitutive::MaterialKind;

    fn mat(kind: MaterialKind) -> Material {
        Material::almg3(kind, 68e9)
    }

    // Total potential for the neo-Hooke model written in stretch deviations,
    // independent of the library energy.
    fn nh_potential(m: &Material, sigma: f64, e1: f64, e2: f64) -> f64 {
        let l = e1.ln_1p() + e2.ln_1p();
        let dev = (e1 - e1.ln_1p()) + (e2 - e2.ln_1p()) + 0.5 * (e1 * e1 + e2 * e2);
        0.5 * m.lambda * l * l + m.mu * dev - sigma * e1
    }

    fn golden_min(mut a: f64, mut b: f64, f: impl Fn(f64) -> f64) -> f64 {
        let g = 0.5 * (5.0_f64.sqrt() - 1.0);
        let mut c = b - g * (b - a);
        let mut d = a + g * (b - a);
        let (mut fc, mut fd) = (f(c), f(d));
        while (b - a).abs() > 1e-13 {
            if fc < fd {
                b = d;
                d = c;
                fd = fc;
                c = b - g * (b - a);
                fc = f(c);
            } else {
                a = c;
                c = d;
                fc = fd;
                d = a + g * (b - a);
                fd = f(d);
            }
        }
        0.5 * (a + b)
    }

    #[test]
    fn zero_load_is_exact_reference() {
        for kind in MaterialKind::ALL {
            let st = solve(&mat(kind), 0.0).unwrap();
            assert_eq!(st.f_s, Tensor2::identity());
            assert_eq!(st.s_s, Tensor2::zeros());
        }
    }

    #[test]
    fn linear_matches_plane_strain_hooke() {
        let st = solve(&mat(MaterialKind::Linear), 100e6).unwrap();
        let expected: f64 = 100e6 * (1.0 - 0.33 * 0.33) / 68e9;
        assert!((st.stretch() - 1.0 - expected).abs() < 1e-5, "{}", st.stretch() - 1.0);
        assert_eq!(st.f_s[(2, 2)], 1.0);
    }

    #[test]
    fn neo_hooke_matches_energy_minimization() {
        let m = mat(MaterialKind::NeoHooke);
        let sigma = 100e6;
        let st = solve_uniaxial(&m, sigma, 1e-3, 50).unwrap();
        let inner = |e1: f64| golden_min(-0.01, 0.01, |e2| nh_potential(&m, sigma, e1, e2));
        let e1 = golden_min(-0.01, 0.01, |e1| nh_potential(&m, sigma, e1, inner(e1)));
        let e2 = inner(e1);
        assert!((st.f_s[(0, 0)] - 1.0 - e1).abs() < 1e-8, "{} vs {}", st.f_s[(0, 0)] - 1.0, e1);
        assert!((st.f_s[(1, 1)] - 1.0 - e2).abs() < 1e-8);
    }

    #[test]
    fn monotone_loading() {
        for kind in MaterialKind::ALL {
            let m = mat(kind);
            let mut prev = solve(&m, 0.0).unwrap();
            for step in 1..=10 {
                let st = solve(&m, step as f64 * 10e6).unwrap();
                assert!(st.f_s[(0, 0)] > prev.f_s[(0, 0)], "{kind}");
                assert!(st.f_s[(1, 1)] < prev.f_s[(1, 1)], "{kind}");
                prev = st;
            }
        }
    }

    #[test]
    fn neo_hooke_agrees_with_linear_at_small_load() {
        let closed = 100e6 * (1.0 - 0.33 * 0.33) / 68e9;
        let st = solve(&mat(MaterialKind::NeoHooke), 100e6).unwrap();
        let dev = st.stretch() - 1.0 - closed;
        assert!(dev.abs() < 1e-5, "{dev:e}");
    }

    #[test]
    fn hyperelastic_deviation_from_linear_is_second_order() {
        let closed = |s: f64| s * (1.0 - 0.33 * 0.33) / 68e9;
        for kind in [MaterialKind::NeoHooke, MaterialKind::Murnaghan] {
            let m = mat(kind);
            let dev = |s: f64| solve_uniaxial(&m, s, 1e-4, 50).unwrap().stretch() - 1.0 - closed(s);
            let ratio = dev(100e6) / dev(50e6);
            assert!((ratio - 4.0).abs() < 0.05, "{kind}: {ratio}");
        }
    }

    // Plane-strain Murnaghan stress written directly in E = diag(e1, e2, 0);
    // det E vanishes so n drops out.
    #[test]
    fn murnaghan_matches_direct_plane_strain_solve() {
        let m = mat(MaterialKind::Murnaghan);
        let sigma = 100e6;
        let ds = |e1: f64, e2: f64, ei: f64| {
            let (a, b) = (e1 + e2, e1 * e1 + e2 * e2);
            m.lambda * a + 2.0 * m.mu * ei + m.ell * a * a + m.m3 * (b + 2.0 * a * ei - a * a)
        };
        let res = |f1: f64, f2: f64| {
            let (e1, e2) = (0.5 * (f1 * f1 - 1.0), 0.5 * (f2 * f2 - 1.0));
            Vector2::new(f1 * ds(e1, e2, e1) - sigma, f2 * ds(e1, e2, e2))
        };
        // Newton with a finite-difference Jacobian
        let mut x = Vector2::new(1.0, 1.0);
        for _ in 0..30 {
            let r0 = res(x[0], x[1]);
            let h = 1e-7;
            let c0 = (res(x[0] + h, x[1]) - res(x[0] - h, x[1])) / (2.0 * h);
            let c1 = (res(x[0], x[1] + h) - res(x[0], x[1] - h)) / (2.0 * h);
            x -= Matrix2::from_columns(&[c0, c1]).lu().solve(&r0).unwrap();
        }
        let st = solve_uniaxial(&m, sigma, 1e-4, 50).unwrap();
        assert!((st.f_s[(0, 0)] - x[0]).abs() < 1e-10);
        assert!((st.f_s[(1, 1)] - x[1]).abs() < 1e-10);
        // deviation from the linear closed form
        let dev = x[0] - 1.0 - sigma * (1.0 - 0.33 * 0.33) / 68e9;
        assert!((dev - 1.1311e-5).abs() < 1e-8, "{dev:e}");
    }

    #[test]
    fn returned_state_is_consistent() {
        for kind in MaterialKind::ALL {
            let m = mat(kind);
            for sigma in [-50e6, 37e6, 100e6] {
                let st = solve(&m, sigma).unwrap();
                let p = st.f_s * st.s_s;
                assert!((p[(0, 0)] - sigma).abs() < DEFAULT_TOL, "{kind}");
                assert!(p[(1, 1)].abs() < DEFAULT_TOL);
                assert!(st.residual_norm < DEFAULT_TOL);
                // Cauchy stress has no thickness component either
                assert!(st.cauchy[(1, 1)].abs() < DEFAULT_TOL);
            }
        }
    }

    #[test]
    fn envelope_and_iteration_cap() {
        let m = mat(MaterialKind::Murnaghan);
        assert!(matches!(solve(&m, 0.02 * 68e9), Err(Error::Domain(_))));
        assert!(matches!(
            solve_uniaxial(&m, 100e6, 1e-30, 3),
            Err(Error::NoConvergence { iterations: 3, .. })
        ));
    }
}
