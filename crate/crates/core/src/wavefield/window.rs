//! Wavenumber bounds of a line scan: twenty cycles along the path, spatial Nyquist.

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EvaluationWindow {
    /// 1/m
    pub nu_min: f64,
    /// 1/m
    pub nu_max: f64,
    /// Hz
    pub f_min: f64,
    /// Hz
    pub f_max: f64,
    /// Plate thickness, m.
    pub thickness: f64,
}

impl EvaluationWindow {
    /// Thickness-normalized lower bound in mm/m (ν̃ in 1/m times d in mm).
    pub fn nud_min_mm_per_m(&self) -> f64 {
        self.nu_min * self.thickness * 1e3
    }

    pub fn nud_max_mm_per_m(&self) -> f64 {
        self.nu_max * self.thickness * 1e3
    }

    /// Restrict the frequency band.
    pub fn with_band(mut self, f_min: f64, f_max: f64) -> Result<Self> {
        if !(f_min >= 0.0) || !(f_max > f_min) {
            return Err(Error::domain(format!("bad frequency band [{f_min}, {f_max}] Hz")));
        }
        self.f_min = f_min;
        self.f_max = f_max;
        Ok(self)
    }

    pub fn contains(&self, f: f64, nu: f64) -> bool {
        nu >= self.nu_min && nu <= self.nu_max && f >= self.f_min && f <= self.f_max
    }
}

/// Window for a path of length `l_mes` sampled every `dl`, plate thickness `d` (all m).
pub fn evaluation_window(l_mes: f64, dl: f64, d: f64) -> Result<EvaluationWindow> {
    if !(dl > 0.0) || !(d > 0.0) || !l_mes.is_finite() {
        return Err(Error::domain("path spacing and thickness must be positive"));
    }
    if !(l_mes > 20.0 * dl) {
        return Err(Error::domain(format!(
            "measurement path {l_mes} m must exceed 20 point spacings ({} m)",
            20.0 * dl
        )));
    }
    Ok(EvaluationWindow {
        nu_min: 20.0 / l_mes,
        nu_max: 1.0 / (2.0 * dl),
        f_min: 0.0,
        f_max: f64::INFINITY,
        thickness: d,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sig4(v: f64) -> f64 {
        let p = 10f64.powi(3 - v.abs().log10().floor() as i32);
        (v * p).round() / p
    }

    #[test]
    fn specimen_table_bounds() {
        // D05-A
        let w = evaluation_window(0.669, 1.33e-3, 0.5e-3).unwrap();
        assert_eq!(sig4(w.nud_min_mm_per_m()), 14.95);
        // D2-A
        let w = evaluation_window(0.432, 0.86e-3, 2e-3).unwrap();
        assert_eq!(sig4(w.nud_max_mm_per_m()), 1163.0);
        // D2-C
        let w = evaluation_window(0.669, 1.33e-3, 2e-3).unwrap();
        assert_eq!(sig4(w.nud_min_mm_per_m()), 59.79);
        assert_eq!(sig4(w.nud_max_mm_per_m()), 751.9);
    }

    #[test]
    fn short_path_rejected() {
        assert!(evaluation_window(0.02, 1e-3, 1e-3).is_err());
        assert!(evaluation_window(0.5, 0.0, 1e-3).is_err());
    }

    #[test]
    fn band_restriction() {
        let w = evaluation_window(0.669, 1.33e-3, 0.5e-3).unwrap().with_band(1e3, 5e5).unwrap();
        assert!(w.contains(2e3, 100.0));
        assert!(!w.contains(6e5, 100.0));
        assert!(!w.contains(2e3, 10.0));
        assert!(w.with_band(5.0, 1.0).is_err());
    }
}
