//! Rayleigh-Lamb dispersion of the unstressed isotropic plate (fundamental
//! S0 and A0 branches only).

use crate::constitutive::Material;
use crate::error::{Error, Result};
use crate::unitcell::{ModeLabel, Sample};
use std::f64::consts::PI;

/// Points in the bracketing pre-scan over phase velocity.
pub const SCAN_POINTS: usize = 400;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LambProblem {
    /// Longitudinal bulk velocity, m/s.
    pub cl: f64,
    /// Shear bulk velocity, m/s.
    pub ct: f64,
    /// Plate thickness, m.
    pub thickness: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Family {
    Symmetric,
    Antisymmetric,
}

impl LambProblem {
    pub fn new(cl: f64, ct: f64, thickness: f64) -> Result<Self> {
        if !(ct > 0.0) || !(cl > ct) || !(thickness > 0.0) {
            return Err(Error::domain(format!(
                "need cl > ct > 0 and d > 0 (cl={cl}, ct={ct}, d={thickness})"
            )));
        }
        Ok(LambProblem { cl, ct, thickness })
    }

    pub fn from_material(mat: &Material, thickness: f64) -> Result<Self> {
        LambProblem::new(mat.c_longitudinal(), mat.c_shear(), thickness)
    }

    /// Rayleigh surface-wave velocity.
    pub fn rayleigh_velocity(&self) -> f64 {
        // (2 − x)² − 4√(1 − κx)√(1 − x) = 0 with x = (c/ct)², κ = (ct/cl)²
        let kappa = (self.ct / self.cl).powi(2);
        let g = |x: f64| (2.0 - x).powi(2) - 4.0 * (1.0 - kappa * x).sqrt() * (1.0 - x).sqrt();
        let (mut lo, mut hi) = (1e-6, 1.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if g(lo) * g(mid) <= 0.0 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        self.ct * (0.5 * (lo + hi)).sqrt()
    }

    /// Characteristic function of one family at phase velocity `cp` and
    /// frequency-thickness `fd` (Hz·m). Real-valued in every velocity regime,
    /// free of poles and of the trivial roots at `cp = ct` and `cp = cl`,
    /// and scaled so the Rayleigh-limit terms are O(1).
    pub fn characteristic(&self, family: Family, cp: f64, fd: f64) -> f64 {
        let kh = PI * fd / cp; // k·d/2
        let rl = (cp / self.cl).powi(2);
        let rt = (cp / self.ct).powi(2);
        let g2 = (2.0 - rt).powi(2);
        // sin(x·kh)/x and tanh(x·kh)/x with their x → 0 limits
        let sinc = |x: f64| if x * kh < 1e-8 { kh } else { (x * kh).sin() / x };
        let tanhc = |x: f64| if x * kh < 1e-8 { kh } else { (x * kh).tanh() / x };
        match family {
            Family::Symmetric => {
                if rt < 1.0 {
                    let a = (1.0 - rl).sqrt();
                    let b = (1.0 - rt).sqrt();
                    // divided by b to remove the q = 0 root
                    g2 * tanhc(b) - 4.0 * a * (a * kh).tanh()
                } else if rl < 1.0 {
                    let a = (1.0 - rl).sqrt();
                    let b = (rt - 1.0).sqrt();
                    g2 * sinc(b) - 4.0 * a * (a * kh).tanh() * (b * kh).cos()
                } else {
                    let a = (rl - 1.0).sqrt();
                    let b = (rt - 1.0).sqrt();
                    g2 * (a * kh).cos() * sinc(b) + 4.0 * a * (a * kh).sin() * (b * kh).cos()
                }
            }
            Family::Antisymmetric => {
                if rt < 1.0 {
                    let a = (1.0 - rl).sqrt();
                    let b = (1.0 - rt).sqrt();
                    // divided by a to remove the p = 0 root
                    g2 * tanhc(a) - 4.0 * b * (b * kh).tanh()
                } else if rl < 1.0 {
                    let a = (1.0 - rl).sqrt();
                    let b = (rt - 1.0).sqrt();
                    g2 * tanhc(a) * (b * kh).cos() + 4.0 * b * (b * kh).sin()
                } else {
                    let a = (rl - 1.0).sqrt();
                    let b = (rt - 1.0).sqrt();
                    g2 * sinc(a) * (b * kh).cos() + 4.0 * b * (a * kh).cos() * (b * kh).sin()
                }
            }
        }
    }

    /// Phase velocity of the fundamental branch of `mode` (S0 or A0) at
    /// frequency-thickness `fd` in Hz·m.
    pub fn cp(&self, fd: f64, mode: ModeLabel) -> Result<f64> {
        let family = match mode {
            ModeLabel::S(0) => Family::Symmetric,
            ModeLabel::A(0) => Family::Antisymmetric,
            other => return Err(Error::domain(format!("only S0 and A0 are solved, got {other}"))),
        };
        if !(fd > 0.0) || !fd.is_finite() {
            return Err(Error::domain(format!("fd must be positive, got {fd}")));
        }
        let lo = 1e-4 * self.ct;
        let hi = 1.5 * self.cl;
        let f = |c: f64| self.characteristic(family, c, fd);
        // the fundamental branch is the slowest root of its family
        let ratio = (hi / lo).powf(1.0 / (SCAN_POINTS - 1) as f64);
        let mut a = lo;
        let mut fa = f(a);
        for i in 1..SCAN_POINTS {
            let b = lo * ratio.powi(i as i32);
            let fb = f(b);
            if fa == 0.0 {
                return Ok(a);
            }
            if fa * fb < 0.0 {
                return Ok(bisect(f, a, b, fa));
            }
            a = b;
            fa = fb;
        }
        Err(Error::Root(format!(
            "no sign change of the {mode} characteristic function at fd = {fd:.6e} Hz·m over cp ∈ [{lo:.3e}, {hi:.3e}] m/s ({SCAN_POINTS} scan points)"
        )))
    }

    /// Branch samples on a frequency-thickness grid (Hz·m).
    pub fn branch(&self, mode: ModeLabel, fd_grid: &[f64]) -> Result<Vec<Sample>> {
        fd_grid
            .iter()
            .map(|&fd| {
                let cp = self.cp(fd, mode)?;
                let f = fd / self.thickness;
                Ok(Sample {
                    k: 2.0 * PI * f / cp,
                    f,
                    cp,
                })
            })
            .collect()
    }
}

fn bisect(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, mut fa: f64) -> f64 {
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        let fm = f(m);
        if fm == 0.0 {
            return m;
        }
        if fa * fm < 0.0 {
            b = m;
        } else {
            a = m;
            fa = fm;
        }
    }
    0.5 * (a + b)
}

/// Long-wave limit of S0: √(E / (ρ(1 − ν²))).
pub fn plate_velocity(mat: &Material) -> f64 {
    let nu = mat.poisson();
    (mat.young() / (mat.rho0 * (1.0 - nu * nu))).sqrt()
}
