//! Phase-velocity differences, stress regressions and the unity-load-step curve.
//!
//! Frequency-thickness is carried in Hz·m, stresses in Pa, velocities in m/s.

use crate::error::{Error, Result};
use crate::interp::Pchip;
use crate::io::{DeltaRow, DispersionGroup, RegressionRow, UnityStepRow, HZ_M_PER_MHZMM};
use crate::unitcell::{DispersionSet, ModeLabel};
use std::collections::BTreeMap;

/// σ keys closer than this are the same load, Pa.
const SIGMA_EPS: f64 = 1e-3;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Source {
    Fem,
    Extracted,
}

#[derive(Clone, Debug)]
pub struct LoadEntry {
    /// Pa
    pub sigma: f64,
    /// cp on the series grid, per mode.
    pub modes: BTreeMap<ModeLabel, Vec<f64>>,
}

/// cp(fd) per load and mode on one shared fd grid.
#[derive(Clone, Debug)]
pub struct LoadSeries {
    pub source: Source,
    /// Material or specimen name.
    pub name: String,
    pub fd_grid: Vec<f64>,
    /// Sorted by σ, keys distinct.
    pub entries: Vec<LoadEntry>,
}

impl LoadSeries {
    pub fn new(source: Source, name: impl Into<String>, fd_grid: Vec<f64>) -> Result<Self> {
        if fd_grid.is_empty() || fd_grid.windows(2).any(|w| !(w[1] > w[0])) || !(fd_grid[0] > 0.0) {
            return Err(Error::domain("fd grid must be positive and strictly ascending"));
        }
        Ok(LoadSeries {
            source,
            name: name.into(),
            fd_grid,
            entries: Vec::new(),
        })
    }

    /// Resample one branch onto the grid with monotone cubic interpolation.
    ///
    /// Samples are taken in order; points whose fd does not increase (e.g.
    /// clamped rigid-body frequencies at the low-k end) are dropped.
    pub fn ingest(&mut self, sigma: f64, mode: ModeLabel, samples: &[(f64, f64)]) -> Result<()> {
        let mut fd: Vec<f64> = Vec::with_capacity(samples.len());
        let mut cp: Vec<f64> = Vec::with_capacity(samples.len());
        for &(x, c) in samples {
            if !(x > 0.0) || !c.is_finite() {
                continue;
            }
            while fd.last().is_some_and(|&last| x <= last) {
                fd.pop();
                cp.pop();
            }
            fd.push(x);
            cp.push(c);
        }
        let p = Pchip::new(&fd, &cp).map_err(|e| Error::Coverage(format!("{mode} at σ = {sigma:.4e} Pa: {e}")))?;
        let (a, b) = p.domain();
        let values = self
            .fd_grid
            .iter()
            .map(|&x| {
                p.eval(x).ok_or_else(|| {
                    Error::Coverage(format!(
                        "{mode} at σ = {:.3} MPa covers fd {:.6}–{:.6} MHzmm, grid needs {:.6}",
                        sigma / 1e6,
                        a / HZ_M_PER_MHZMM,
                        b / HZ_M_PER_MHZMM,
                        x / HZ_M_PER_MHZMM
                    ))
                })
            })
            .collect::<Result<Vec<f64>>>()?;
        let pos = self.entries.partition_point(|e| e.sigma < sigma - SIGMA_EPS);
        match self.entries.get_mut(pos) {
            Some(e) if (e.sigma - sigma).abs() <= SIGMA_EPS => {
                e.modes.insert(mode, values);
            }
            _ => self.entries.insert(
                pos,
                LoadEntry {
                    sigma,
                    modes: BTreeMap::from([(mode, values)]),
                },
            ),
        }
        Ok(())
    }

    pub fn ingest_set(&mut self, set: &DispersionSet, modes: &[ModeLabel]) -> Result<()> {
        for &m in modes {
            let b = set
                .branch(m)
                .ok_or_else(|| Error::Lookup(format!("no {m} branch at σ = {:.3} MPa", set.sigma / 1e6)))?;
            let samples: Vec<(f64, f64)> = b.samples.iter().map(|s| (s.f * set.thickness, s.cp)).collect();
            self.ingest(set.sigma, m, &samples)?;
        }
        Ok(())
    }

    pub fn ingest_group(&mut self, group: &DispersionGroup, modes: &[ModeLabel]) -> Result<()> {
        for &m in modes {
            let b = group.branches.get(&m).ok_or_else(|| {
                Error::Lookup(format!("{}: no {m} rows at σ = {:.3} MPa", group.model, group.sigma / 1e6))
            })?;
            self.ingest(group.sigma, m, b)?;
        }
        Ok(())
    }

    pub fn sigmas(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.sigma).collect()
    }

    pub fn cp(&self, sigma: f64, mode: ModeLabel) -> Result<&[f64]> {
        let e = self
            .entries
            .iter()
            .find(|e| (e.sigma - sigma).abs() <= SIGMA_EPS)
            .ok_or_else(|| Error::Lookup(format!("{}: no load step at σ = {:.3} MPa", self.name, sigma / 1e6)))?;
        e.modes
            .get(&mode)
            .map(|v| v.as_slice())
            .ok_or_else(|| Error::Lookup(format!("{}: no {mode} curve at σ = {:.3} MPa", self.name, sigma / 1e6)))
    }

    /// cp at an arbitrary fd inside the grid.
    fn cp_at(&self, sigma: f64, mode: ModeLabel, fd: f64) -> Result<f64> {
        let values = self.cp(sigma, mode)?;
        if let Ok(i) = self.fd_grid.binary_search_by(|g| g.total_cmp(&fd)) {
            return Ok(values[i]);
        }
        if self.fd_grid.len() < 2 {
            return Err(Error::Lookup(format!("fd {fd} is not on the single-point grid")));
        }
        Pchip::new(&self.fd_grid, values)?
            .eval(fd)
            .ok_or_else(|| Error::Lookup(format!("fd {:.6} MHzmm outside the series grid", fd / HZ_M_PER_MHZMM)))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DeltaCurve {
    pub mode: ModeLabel,
    pub sigma_ls: f64,
    pub sigma_hs: f64,
    pub fd: Vec<f64>,
    pub delta_cp: Vec<f64>,
}

impl DeltaCurve {
    pub fn delta_sigma(&self) -> f64 {
        self.sigma_hs - self.sigma_ls
    }

    pub fn rows(&self) -> Vec<DeltaRow> {
        self.fd
            .iter()
            .zip(&self.delta_cp)
            .map(|(&fd, &dc)| DeltaRow {
                mode: self.mode.to_string(),
                fd_mhzmm: fd / HZ_M_PER_MHZMM,
                sigma_ls_mpa: self.sigma_ls / 1e6,
                sigma_hs_mpa: self.sigma_hs / 1e6,
                delta_cp_m_per_s: dc,
            })
            .collect()
    }
}

/// cp(σ_HS) − cp(σ_LS) on the series grid.
pub fn delta_cp(series: &LoadSeries, sigma_hs: f64, sigma_ls: f64, mode: ModeLabel) -> Result<DeltaCurve> {
    let hs = series.cp(sigma_hs, mode)?;
    let ls = series.cp(sigma_ls, mode)?;
    Ok(DeltaCurve {
        mode,
        sigma_ls,
        sigma_hs,
        fd: series.fd_grid.clone(),
        delta_cp: hs.iter().zip(ls).map(|(a, b)| a - b).collect(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RegressionResult {
    /// Hz·m
    pub fd: f64,
    pub mode: ModeLabel,
    /// (m/s)/Pa
    pub slope: f64,
    /// m/s
    pub intercept: f64,
    pub r2: f64,
}

impl RegressionResult {
    pub fn row(&self) -> RegressionRow {
        RegressionRow {
            mode: self.mode.to_string(),
            fd_mhzmm: self.fd / HZ_M_PER_MHZMM,
            slope_m_per_s_per_mpa: self.slope * 1e6,
            intercept_m_per_s: self.intercept,
            r2: self.r2,
        }
    }
}

/// Ordinary least squares `y = intercept + slope·x`; returns (slope, intercept, R²).
///
/// A constant `y` is fitted exactly and reports R² = 1.
pub fn fit_line(x: &[f64], y: &[f64]) -> Result<(f64, f64, f64)> {
    if x.len() != y.len() || x.len() < 2 {
        return Err(Error::domain("line fit needs ≥ 2 paired values"));
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let syy: f64 = y.iter().map(|v| (v - my).powi(2)).sum();
    if !(sxx > 0.0) {
        return Err(Error::domain("degenerate regression: all abscissae equal"));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = x.iter().zip(y).map(|(a, b)| (b - intercept - slope * a).powi(2)).sum();
    let r2 = if syy > 0.0 { (1.0 - ss_res / syy).clamp(0.0, 1.0) } else { 1.0 };
    Ok((slope, intercept, r2))
}

/// Least-squares line of cp against σ at a fixed fd.
pub fn regress(series: &LoadSeries, fd: f64, mode: ModeLabel) -> Result<RegressionResult> {
    if series.entries.len() < 3 {
        return Err(Error::domain(format!(
            "regression needs ≥ 3 load steps, {} has {}",
            series.name,
            series.entries.len()
        )));
    }
    let sig = series.sigmas();
    let cp = sig.iter().map(|&s| series.cp_at(s, mode, fd)).collect::<Result<Vec<f64>>>()?;
    let (slope, intercept, r2) = fit_line(&sig, &cp)?;
    Ok(RegressionResult {
        fd,
        mode,
        slope,
        intercept,
        r2,
    })
}

/// Mean cp change per load step of `step` Pa, from the regression slope at each fd.
pub fn unity_load_step(series: &LoadSeries, fd_grid: &[f64], mode: ModeLabel, step: f64) -> Result<Vec<(f64, f64)>> {
    fd_grid
        .iter()
        .map(|&fd| regress(series, fd, mode).map(|r| (fd, r.slope * step)))
        .collect()
}

pub fn unity_rows(mode: ModeLabel, step: f64, curve: &[(f64, f64)]) -> Vec<UnityStepRow> {
    curve
        .iter()
        .map(|&(fd, dc)| UnityStepRow {
            mode: mode.to_string(),
            fd_mhzmm: fd / HZ_M_PER_MHZMM,
            step_mpa: step / 1e6,
            delta_cp_m_per_s: dc,
        })
        .collect()
}

/// Every zero crossing, linearly interpolated between samples of opposite sign.
pub fn sign_changes(curve: &DeltaCurve) -> Vec<f64> {
    let mut out = Vec::new();
    for i in 0..curve.fd.len().saturating_sub(1) {
        let (y0, y1) = (curve.delta_cp[i], curve.delta_cp[i + 1]);
        if y0 * y1 < 0.0 {
            let (x0, x1) = (curve.fd[i], curve.fd[i + 1]);
            out.push(x0 + (x1 - x0) * y0 / (y0 - y1));
        }
    }
    out
}

/// First zero crossing, if any.
pub fn find_sign_change(curve: &DeltaCurve) -> Option<f64> {
    sign_changes(curve).first().copied()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn grid(n: usize) -> Vec<f64> {
        (0..n).map(|i| 50.0 + 2950.0 * i as f64 / (n - 1) as f64).collect()
    }

    /// cp = base(fd) + slope·σ, sampled on a fine source grid.
    fn linear_series(n: usize, slope: f64) -> LoadSeries {
        let mut s = LoadSeries::new(Source::Fem, "synthetic", grid(n)).unwrap();
        for i in 0..=10 {
            let sigma = 10e6 * i as f64;
            let samples: Vec<(f64, f64)> = (0..400)
                .map(|j| 40.0 + 3000.0 * j as f64 / 399.0)
                .map(|fd| (fd, 3000.0 + 2000.0 * (-fd / 800.0).exp() + slope * sigma))
                .collect();
            s.ingest(sigma, ModeLabel::A0, &samples).unwrap();
        }
        s
    }

    #[test]
    fn self_difference_is_zero() {
        let s = linear_series(30, 2e-9);
        let c = delta_cp(&s, 50e6, 50e6, ModeLabel::A0).unwrap();
        assert!(c.delta_cp.iter().all(|&v| v == 0.0));
        assert_eq!(c.delta_sigma(), 0.0);
    }

    #[test]
    fn missing_key_is_lookup_error() {
        let s = linear_series(10, 0.0);
        assert!(matches!(delta_cp(&s, 55e6, 0.0, ModeLabel::A0), Err(Error::Lookup(_))));
        assert!(matches!(delta_cp(&s, 50e6, 0.0, ModeLabel::S0), Err(Error::Lookup(_))));
    }

    #[test]
    fn exact_line_regresses_exactly() {
        // 0.002 (m/s)/MPa
        let s = linear_series(20, 2e-9);
        let r = regress(&s, s.fd_grid[7], ModeLabel::A0).unwrap();
        assert!((r.slope - 2e-9).abs() < 1e-15);
        assert!((r.r2 - 1.0).abs() < 1e-12);
        let u = unity_load_step(&s, &s.fd_grid, ModeLabel::A0, 10e6).unwrap();
        assert!(u.iter().all(|&(_, v)| (v - 0.02).abs() < 1e-8));
        let z = unity_load_step(&s, &s.fd_grid, ModeLabel::A0, 0.0).unwrap();
        assert!(z.iter().all(|&(_, v)| v == 0.0));
    }

    #[test]
    fn regression_needs_three_loads_and_distinct_sigma() {
        let mut s = LoadSeries::new(Source::Fem, "x", grid(5)).unwrap();
        let samples = [(10.0, 1.0), (5000.0, 2.0)];
        s.ingest(0.0, ModeLabel::S0, &samples).unwrap();
        s.ingest(1e6, ModeLabel::S0, &samples).unwrap();
        assert!(regress(&s, 100.0, ModeLabel::S0).is_err());
        assert!(fit_line(&[1.0, 1.0, 1.0], &[1.0, 2.0, 3.0]).is_err());
    }

    #[test]
    fn constant_data_has_unit_r2() {
        let (b, a, r2) = fit_line(&[0.0, 1.0, 2.0], &[5.0, 5.0, 5.0]).unwrap();
        assert_eq!((b, a, r2), (0.0, 5.0, 1.0));
    }

    #[test]
    fn crossing_by_interpolation() {
        let c = DeltaCurve {
            mode: ModeLabel::A0,
            sigma_ls: 0.0,
            sigma_hs: 1.0,
            fd: vec![1.0, 2.0],
            delta_cp: vec![-0.5, 0.5],
        };
        assert_eq!(find_sign_change(&c), Some(1.5));
        let pos = DeltaCurve {
            delta_cp: vec![0.1, 0.5],
            ..c.clone()
        };
        assert_eq!(find_sign_change(&pos), None);
    }

    #[test]
    fn ingest_drops_non_increasing_head_and_checks_coverage() {
        let mut s = LoadSeries::new(Source::Fem, "x", vec![2.0, 3.0]).unwrap();
        // clamped zero-frequency samples at the head are skipped
        let samples = [(0.0, 0.0), (0.0, 0.0), (1.0, 10.0), (2.5, 11.0), (4.0, 12.0)];
        s.ingest(0.0, ModeLabel::A0, &samples).unwrap();
        assert_eq!(s.cp(0.0, ModeLabel::A0).unwrap().len(), 2);
        let short = [(1.0, 10.0), (2.5, 11.0)];
        assert!(matches!(s.ingest(0.0, ModeLabel::S0, &short), Err(Error::Coverage(_))));
    }

    #[test]
    fn denser_grid_barely_changes_unity_step() {
        let coarse = linear_series(25, -3e-9);
        let fine = linear_series(49, -3e-9);
        let probe: Vec<f64> = coarse.fd_grid.clone();
        let a = unity_load_step(&coarse, &probe, ModeLabel::A0, 10e6).unwrap();
        let b = unity_load_step(&fine, &probe, ModeLabel::A0, 10e6).unwrap();
        for ((_, x), (_, y)) in a.iter().zip(&b) {
            assert!((x / y - 1.0).abs() < 1e-3);
        }
    }

    proptest! {
        #[test]
        fn delta_is_antisymmetric(hs in 0usize..11, ls in 0usize..11) {
            let s = linear_series(15, 1.5e-9);
            let (h, l) = (hs as f64 * 10e6, ls as f64 * 10e6);
            let a = delta_cp(&s, h, l, ModeLabel::A0).unwrap();
            let b = delta_cp(&s, l, h, ModeLabel::A0).unwrap();
            for (x, y) in a.delta_cp.iter().zip(&b.delta_cp) {
                prop_assert_eq!(*x, -*y);
            }
        }

        #[test]
        fn regression_slope_matches_end_to_end_difference(slope in -5e-9f64..5e-9, k in 0usize..15) {
            let s = linear_series(15, slope);
            let fd = s.fd_grid[k];
            let r = regress(&s, fd, ModeLabel::A0).unwrap();
            let d = delta_cp(&s, 100e6, 0.0, ModeLabel::A0).unwrap();
            prop_assert!((r.slope - d.delta_cp[k] / 100e6).abs() < 1e-12);
        }
    }
}
