//! Synthetic line-scan wavefield from a dispersion set.
//!
//! All shots are merged into one record: with the comb on exact DFT bins the
//! shots occupy disjoint bins, so the merged record carries the same
//! per-frequency content as the separate shots.

use super::excitation::{exact_bin, n_samples, ExcitationSpec};
use crate::error::{Error, Result};
use crate::interp::Pchip;
use crate::unitcell::{DispersionSet, ModeLabel};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rustfft::FftPlanner;
use std::f64::consts::PI;

/// Out-of-plane velocity at equally spaced points along a line.
#[derive(Clone, Debug, PartialEq)]
pub struct WavefieldRecord {
    /// m/s, `v[point][sample]`
    pub v: Vec<Vec<f64>>,
    /// m
    pub x_positions: Vec<f64>,
    /// Hz
    pub sample_rate: f64,
    /// s
    pub duration: f64,
}

impl WavefieldRecord {
    pub fn n_samples(&self) -> usize {
        self.v.first().map_or(0, |r| r.len())
    }

    pub fn spacing(&self) -> f64 {
        match self.x_positions.len() {
            0 | 1 => 0.0,
            n => (self.x_positions[n - 1] - self.x_positions[0]) / (n - 1) as f64,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let n = n_samples(self.sample_rate, self.duration);
        if self.v.len() != self.x_positions.len() || self.v.len() < 2 {
            return Err(Error::domain("record needs ≥ 2 points with one row each"));
        }
        if self.v.iter().any(|r| r.len() != n) {
            return Err(Error::domain(format!("every row must hold round(fs·T) = {n} samples")));
        }
        let dx = self.spacing();
        if !(dx > 0.0) {
            return Err(Error::domain("positions must increase"));
        }
        for (i, w) in self.x_positions.windows(2).enumerate() {
            if ((w[1] - w[0]) / dx - 1.0).abs() > 1e-9 {
                return Err(Error::domain(format!("non-uniform spacing between points {i} and {}", i + 1)));
            }
        }
        Ok(())
    }

    /// Multiply every sample by `alpha`.
    pub fn scaled(&self, alpha: f64) -> Self {
        let mut r = self.clone();
        for row in &mut r.v {
            for s in row {
                *s *= alpha;
            }
        }
        r
    }
}

/// Scan line of length `l_mes` with point spacing `dl` (m).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MeasurementPath {
    pub l_mes: f64,
    pub dl: f64,
}

impl MeasurementPath {
    pub fn positions(&self) -> Result<Vec<f64>> {
        if !(self.dl > 0.0) || !(self.l_mes > self.dl) {
            return Err(Error::domain("path needs 0 < dl < l_mes"));
        }
        let n = (self.l_mes / self.dl).round() as usize + 1;
        Ok((0..n).map(|i| i as f64 * self.dl).collect())
    }
}

/// Wavenumber ν̃ (1/m) of one mode as a function of frequency.
#[derive(Clone, Debug)]
pub struct ModeCurve {
    pub label: ModeLabel,
    /// log ν against log f
    interp: Pchip,
}

impl ModeCurve {
    /// From (f, ν) samples; leading samples whose f does not increase are dropped.
    pub fn new(label: ModeLabel, samples: &[(f64, f64)]) -> Result<Self> {
        let mut lf: Vec<f64> = Vec::new();
        let mut lnu: Vec<f64> = Vec::new();
        for &(f, nu) in samples {
            if !(f > 0.0) || !(nu > 0.0) {
                continue;
            }
            let x = f.ln();
            while lf.last().is_some_and(|&l| x <= l) {
                lf.pop();
                lnu.pop();
            }
            lf.push(x);
            lnu.push(nu.ln());
        }
        let interp = Pchip::new(&lf, &lnu).map_err(|e| Error::Coverage(format!("{label}: {e}")))?;
        Ok(ModeCurve { label, interp })
    }

    pub fn from_set(set: &DispersionSet, label: ModeLabel) -> Result<Self> {
        let b = set
            .branch(label)
            .ok_or_else(|| Error::Coverage(format!("dispersion set has no {label} branch")))?;
        let samples: Vec<(f64, f64)> = b.samples.iter().map(|s| (s.f, s.k / (2.0 * PI))).collect();
        Self::new(label, &samples)
    }

    /// Constant phase velocity `cp` over `[f_lo, f_hi]`.
    pub fn non_dispersive(label: ModeLabel, cp: f64, f_lo: f64, f_hi: f64) -> Result<Self> {
        Self::new(label, &[(f_lo, f_lo / cp), (f_hi, f_hi / cp)])
    }

    /// Covered frequency band, Hz.
    pub fn band(&self) -> (f64, f64) {
        let (a, b) = self.interp.domain();
        (a.exp(), b.exp())
    }

    pub fn nu(&self, f: f64) -> Option<f64> {
        if !(f > 0.0) {
            return None;
        }
        // tolerate rounding at the band edges
        let (a, b) = self.interp.domain();
        let x = f.ln();
        let x = if x < a && a - x < 1e-12 { a } else if x > b && x - b < 1e-12 { b } else { x };
        self.interp.eval(x).map(f64::exp)
    }
}

#[derive(Clone, Debug)]
pub struct SynthesisOptions {
    /// Hz
    pub sample_rate: f64,
    /// Seeds the per-component phases and the noise.
    pub seed: u64,
    /// Standard deviation of additive Gaussian noise, m/s; 0 disables it.
    pub noise_std: f64,
    /// Amplitude of every excited component, m/s.
    pub amplitude: f64,
    pub jobs: usize,
}

impl Default for SynthesisOptions {
    fn default() -> Self {
        SynthesisOptions {
            sample_rate: 2.5e6,
            seed: 1,
            noise_std: 0.0,
            amplitude: 1.0,
            jobs: 1,
        }
    }
}

/// `v(x,t) = Σ_modes Σ_f A cos(2πν(f)x − 2πft + φ)` plus optional noise.
///
/// Phases φ are drawn per (mode, frequency) from the seed. Every excited
/// frequency must lie on a DFT bin of the record and inside every mode's band.
pub fn synthesize_wavefield(
    modes: &[ModeCurve],
    spec: &ExcitationSpec,
    path: &MeasurementPath,
    opts: &SynthesisOptions,
) -> Result<WavefieldRecord> {
    spec.validate()?;
    let x = path.positions()?;
    let fs = opts.sample_rate;
    let n = n_samples(fs, spec.duration);
    let freqs = spec.frequencies();
    if !(fs > 0.0) || n < 4 {
        return Err(Error::domain("sample rate too low for the record length"));
    }
    let bins = freqs
        .iter()
        .map(|&f| {
            exact_bin(f, fs, n).ok_or_else(|| {
                Error::domain(format!("{f} Hz is not on a DFT bin of a {n}-sample record at {fs} Hz"))
            })
        })
        .collect::<Result<Vec<usize>>>()?;

    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut components: Vec<(usize, f64, f64)> = Vec::with_capacity(freqs.len() * modes.len());
    for m in modes {
        let missing: Vec<f64> = freqs.iter().copied().filter(|&f| m.nu(f).is_none()).collect();
        if let (Some(lo), Some(hi)) = (missing.first(), missing.last()) {
            let (a, b) = m.band();
            return Err(Error::Coverage(format!(
                "{}: {} excited frequencies in {lo:.1}–{hi:.1} Hz lie outside the dispersion band {a:.1}–{b:.1} Hz",
                m.label,
                missing.len()
            )));
        }
        for (&f, &bin) in freqs.iter().zip(&bins) {
            components.push((bin, m.nu(f).unwrap(), rng.gen_range(0.0..2.0 * PI)));
        }
    }

    let fft = FftPlanner::<f64>::new().plan_fft_inverse(n);
    let build = |idx: usize, xi: f64| -> Vec<f64> {
        let mut buf = vec![Complex64::new(0.0, 0.0); n];
        for &(bin, nu, phi) in &components {
            // cos(ψ − 2πft) with ψ = 2πνx + φ
            let c = Complex64::from_polar(0.5 * opts.amplitude, -(2.0 * PI * nu * xi + phi));
            buf[bin] += c;
            buf[n - bin] += c.conj();
        }
        fft.process(&mut buf);
        let mut row: Vec<f64> = buf.into_iter().map(|c| c.re).collect();
        if opts.noise_std > 0.0 {
            let mut nrng = ChaCha8Rng::seed_from_u64(opts.seed);
            nrng.set_stream(idx as u64 + 1);
            let dist = Normal::new(0.0, opts.noise_std).expect("positive std");
            for s in &mut row {
                *s += dist.sample(&mut nrng);
            }
        }
        row
    };

    let mut v: Vec<Vec<f64>> = vec![Vec::new(); x.len()];
    let jobs = opts.jobs.max(1).min(x.len());
    if jobs == 1 {
        for (i, (row, &xi)) in v.iter_mut().zip(&x).enumerate() {
            *row = build(i, xi);
        }
    } else {
        let chunk = x.len().div_ceil(jobs);
        let build = &build;
        std::thread::scope(|scope| {
            for (c, (rows, xs)) in v.chunks_mut(chunk).zip(x.chunks(chunk)).enumerate() {
                scope.spawn(move || {
                    for (j, (row, &xi)) in rows.iter_mut().zip(xs).enumerate() {
                        *row = build(c * chunk + j, xi);
                    }
                });
            }
        });
    }
    Ok(WavefieldRecord {
        v,
        x_positions: x,
        sample_rate: fs,
        duration: spec.duration,
    })
}
