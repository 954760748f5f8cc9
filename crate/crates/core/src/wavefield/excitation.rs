//! Multi-frequency Hann-windowed excitation with shifted repeat shots.

use crate::error::{Error, Result};
use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Window {
    Hann,
}

/// Frequency comb `f_start + j·f_step` (j such that the base comb stays
/// below `f_max`), repeated in `n_shifts` shots each offset by `s·shift`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExcitationSpec {
    /// Hz
    pub f_start: f64,
    /// Hz
    pub f_step: f64,
    /// Hz
    pub f_max: f64,
    pub n_shifts: usize,
    /// Hz
    pub shift: f64,
    /// s
    pub duration: f64,
    pub window: Window,
}

impl ExcitationSpec {
    /// 5 kHz comb from 0.125 kHz, 40 shots shifted by 0.125 kHz, 80 ms.
    pub fn lab_comb() -> Self {
        ExcitationSpec {
            f_start: 125.0,
            f_step: 5e3,
            f_max: 995.25e3,
            n_shifts: 40,
            shift: 125.0,
            duration: 80e-3,
            window: Window::Hann,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [self.f_start, self.f_step, self.f_max, self.shift, self.duration];
        if finite.iter().any(|v| !v.is_finite()) {
            return Err(Error::domain("excitation parameters must be finite"));
        }
        if !(self.f_start > 0.0) || !(self.f_step > 0.0) || !(self.duration > 0.0) || self.shift < 0.0 {
            return Err(Error::domain("excitation needs f_start, f_step, duration > 0 and shift ≥ 0"));
        }
        if self.f_max < self.f_start {
            return Err(Error::domain(format!("f_max {} Hz below f_start {} Hz", self.f_max, self.f_start)));
        }
        if self.n_shifts == 0 {
            return Err(Error::domain("n_shifts must be ≥ 1"));
        }
        if self.n_shifts > 1 && !(self.shift > 0.0) {
            return Err(Error::domain("repeated shots need a positive shift"));
        }
        // stacked shots fill the comb gap, never overlap the next tooth
        if self.shift * self.n_shifts as f64 > self.f_step * (1.0 + 1e-12) {
            return Err(Error::domain(format!(
                "shift·n_shifts = {} Hz exceeds f_step = {} Hz",
                self.shift * self.n_shifts as f64,
                self.f_step
            )));
        }
        Ok(())
    }

    /// Teeth per shot.
    pub fn comb_size(&self) -> usize {
        ((self.f_max - self.f_start) / self.f_step * (1.0 + 1e-12)).floor() as usize + 1
    }

    /// Frequencies of one shot, ascending.
    pub fn comb(&self, shot: usize) -> Vec<f64> {
        let off = self.f_start + shot as f64 * self.shift;
        (0..self.comb_size()).map(|j| off + j as f64 * self.f_step).collect()
    }

    /// All shots merged, ascending.
    pub fn frequencies(&self) -> Vec<f64> {
        let mut all: Vec<f64> = (0..self.n_shifts).flat_map(|s| self.comb(s)).collect();
        all.sort_by(f64::total_cmp);
        all
    }
}

/// Periodic Hann window of length `n`.
pub fn hann_periodic(n: usize) -> Vec<f64> {
    (0..n).map(|i| 0.5 - 0.5 * (2.0 * PI * i as f64 / n as f64).cos()).collect()
}

pub fn n_samples(sample_rate: f64, duration: f64) -> usize {
    (sample_rate * duration).round() as usize
}

/// DFT bin of `f` if it falls on one exactly (to 1e-9 of a bin).
pub fn exact_bin(f: f64, sample_rate: f64, n: usize) -> Option<usize> {
    let b = f * n as f64 / sample_rate;
    let r = b.round();
    ((b - r).abs() < 1e-9 && r >= 1.0 && (r as usize) < n.div_ceil(2)).then_some(r as usize)
}

/// `Σ amp·cos(2πf t + phase)` sampled at `n` points.
///
/// Uses one inverse FFT when every tone sits on a DFT bin, direct
/// summation otherwise.
pub fn tone_sum(tones: &[(f64, f64, f64)], sample_rate: f64, n: usize) -> Vec<f64> {
    let bins: Option<Vec<usize>> = tones.iter().map(|t| exact_bin(t.0, sample_rate, n)).collect();
    match bins {
        Some(bins) => {
            let mut buf = vec![Complex64::new(0.0, 0.0); n];
            for (&m, &(_, amp, ph)) in bins.iter().zip(tones) {
                let c = Complex64::from_polar(0.5 * amp, ph);
                buf[m] += c;
                buf[n - m] += c.conj();
            }
            FftPlanner::new().plan_fft_inverse(n).process(&mut buf);
            buf.into_iter().map(|c| c.re).collect()
        }
        None => {
            let mut out = vec![0.0; n];
            for &(f, amp, ph) in tones {
                let step = Complex64::from_polar(1.0, 2.0 * PI * f / sample_rate);
                let mut z = Complex64::from_polar(amp, ph);
                for (i, o) in out.iter_mut().enumerate() {
                    // re-anchor periodically so rounding does not accumulate
                    if i % 4096 == 0 {
                        z = Complex64::from_polar(amp, ph + 2.0 * PI * f * i as f64 / sample_rate);
                    }
                    *o += z.re;
                    z *= step;
                }
            }
            out
        }
    }
}

/// One Hann-windowed sine superposition per shot.
pub fn build_excitation(spec: &ExcitationSpec, sample_rate: f64) -> Result<Vec<Vec<f64>>> {
    spec.validate()?;
    if !(sample_rate > 2.0 * (spec.f_max + spec.shift * spec.n_shifts as f64)) {
        return Err(Error::domain(format!("sample rate {sample_rate} Hz below twice the highest tone")));
    }
    let n = n_samples(sample_rate, spec.duration);
    let w = hann_periodic(n);
    Ok((0..spec.n_shifts)
        .map(|s| {
            let tones: Vec<(f64, f64, f64)> = spec.comb(s).into_iter().map(|f| (f, 1.0, -0.5 * PI)).collect();
            let mut sig = tone_sum(&tones, sample_rate, n);
            for (v, wi) in sig.iter_mut().zip(&w) {
                *v *= wi;
            }
            sig
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> ExcitationSpec {
        ExcitationSpec {
            f_start: 1e3,
            f_step: 4e3,
            f_max: 30e3,
            n_shifts: 4,
            shift: 1e3,
            duration: 5e-3,
            window: Window::Hann,
        }
    }

    #[test]
    fn lab_comb_layout() {
        let s = ExcitationSpec::lab_comb();
        s.validate().unwrap();
        assert_eq!(s.comb_size(), 200);
        let c = s.comb(0);
        assert_eq!(c[0], 125.0);
        assert!((c[199] - 995.125e3).abs() < 1e-6);
        let all = s.frequencies();
        assert_eq!(all.len(), 40 * 200);
        // merged comb is a uniform 0.125 kHz ladder without duplicates
        for w in all.windows(2) {
            assert!((w[1] - w[0] - 125.0).abs() < 1e-6);
        }
    }

    #[test]
    fn overlapping_shifts_rejected() {
        let mut s = small();
        s.n_shifts = 5;
        assert!(s.validate().is_err());
        s.n_shifts = 4;
        s.duration = 0.0;
        assert!(s.validate().is_err());
    }

    #[test]
    fn single_tone_peaks_in_its_bin() {
        let spec = ExcitationSpec {
            f_start: 12_345.0,
            f_step: 1e6,
            f_max: 20e3,
            n_shifts: 1,
            shift: 0.0,
            duration: 4e-3,
            window: Window::Hann,
        };
        let fs = 200e3;
        let sig = &build_excitation(&spec, fs).unwrap()[0];
        let n = sig.len();
        let mut buf: Vec<Complex64> = sig.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        FftPlanner::new().plan_fft_forward(n).process(&mut buf);
        let peak = (0..n / 2).max_by(|&a, &b| buf[a].norm().total_cmp(&buf[b].norm())).unwrap();
        let bin = spec.f_start * n as f64 / fs;
        assert!((peak as f64 - bin).abs() <= 1.0, "{peak} vs {bin}");
    }

    #[test]
    fn parseval_holds() {
        let fs = 100e3;
        for sig in build_excitation(&small(), fs).unwrap() {
            let n = sig.len();
            let e_t: f64 = sig.iter().map(|v| v * v).sum();
            let mut buf: Vec<Complex64> = sig.iter().map(|&v| Complex64::new(v, 0.0)).collect();
            FftPlanner::new().plan_fft_forward(n).process(&mut buf);
            let e_f: f64 = buf.iter().map(|c| c.norm_sqr()).sum::<f64>() / n as f64;
            assert!((e_t / e_f - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn fft_and_direct_tone_sums_agree() {
        let fs = 64e3;
        let n = 640;
        let on_bin = [(1e3, 1.0, 0.3), (7.3e3, 0.5, -1.0)];
        let a = tone_sum(&on_bin, fs, n);
        for (i, v) in a.iter().enumerate() {
            let t = i as f64 / fs;
            let e: f64 = on_bin.iter().map(|&(f, amp, ph)| amp * (2.0 * PI * f * t + ph).cos()).sum();
            assert!((v - e).abs() < 1e-12);
        }
        let off_bin = [(1.05e3, 1.0, 0.3)];
        let b = tone_sum(&off_bin, fs, n);
        for (i, v) in b.iter().enumerate() {
            let e = (2.0 * PI * 1.05e3 * i as f64 / fs + 0.3).cos();
            assert!((v - e).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_undersampling() {
        assert!(build_excitation(&small(), 50e3).is_err());
    }
}
