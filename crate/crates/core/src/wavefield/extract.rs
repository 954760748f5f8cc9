//! Frequency–wavenumber pair extraction from a line-scan record.
//!
//! 1. Temporal DFT of every channel at the excited frequencies.
//! 2. Hann-tapered spatial DFT on the wavenumber grid (chirp-z on a uniform
//!    grid, direct sum otherwise).
//! 3. Local maxima above a fraction of the per-frequency maximum (searched
//!    from ν ≈ 0, not just inside the window) and above a multiple of the
//!    slice median, refined by a parabola through the three top samples.
//! 4. Peaks are linked across consecutive frequencies into tracks; short
//!    tracks are discarded, and within a track points further than
//!    `mad_factor` MADs from the moving median are rejected.

use super::excitation::{exact_bin, ExcitationSpec};
use super::synth::WavefieldRecord;
use super::window::EvaluationWindow;
use crate::error::{Error, Result};
use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use std::f64::consts::PI;
use std::sync::Arc;

pub const DEFAULT_NU_POINTS: usize = 2001;

#[derive(Clone, Debug)]
pub struct ExtractOptions {
    /// Peak floor relative to the per-frequency maximum.
    pub peak_floor: f64,
    /// Peaks must also exceed this multiple of the slice's median magnitude.
    /// For a noise-only slice the magnitudes are Rayleigh distributed and the
    /// largest of a few thousand bins sits near 3.6 medians.
    pub noise_floor: f64,
    /// Moving-median length in frequency neighbours (odd).
    pub median_window: usize,
    pub mad_factor: f64,
    /// Tracks shorter than this are treated as incoherent.
    pub min_track: usize,
    pub jobs: usize,
}

impl Default for ExtractOptions {
    fn default() -> Self {
        ExtractOptions {
            peak_floor: 0.1,
            noise_floor: 6.0,
            median_window: 21,
            mad_factor: 3.0,
            min_track: 21,
            jobs: 1,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PairFlag {
    Retained,
    OutOfWindow,
    /// Rejected by the continuity filter.
    Outlier,
}

impl PairFlag {
    pub fn as_str(self) -> &'static str {
        match self {
            PairFlag::Retained => "retained",
            PairFlag::OutOfWindow => "out_of_window",
            PairFlag::Outlier => "outlier",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Pair {
    /// Hz
    pub f: f64,
    /// 1/m
    pub nu: f64,
    /// Peak magnitude of the normalized spatial spectrum, m/s.
    pub amplitude: f64,
    /// Continuity track, if the pair was linked into one.
    pub track: Option<usize>,
    pub flag: PairFlag,
}

impl Pair {
    pub fn cp(&self) -> f64 {
        self.f / self.nu
    }
}

#[derive(Clone, Debug)]
pub struct ExtractedPairs {
    pub window: EvaluationWindow,
    /// Sorted by frequency, then wavenumber.
    pub pairs: Vec<Pair>,
    /// Frequencies that were analysed.
    pub frequencies: Vec<f64>,
}

impl ExtractedPairs {
    pub fn retained(&self) -> impl Iterator<Item = &Pair> {
        self.pairs.iter().filter(|p| p.flag == PairFlag::Retained)
    }
}

/// `n` uniform points spanning the window.
pub fn default_nu_grid(window: &EvaluationWindow, n: usize) -> Vec<f64> {
    let n = n.max(2);
    (0..n)
        .map(|i| window.nu_min + (window.nu_max - window.nu_min) * i as f64 / (n - 1) as f64)
        .collect()
}

/// Temporal spectrum `(2/N)·Σ v(t)·e^{+i2πft}` of one channel at each frequency.
fn temporal_dft(row: &[f64], freqs: &[f64], fs: f64, fft: Option<&Arc<dyn Fft<f64>>>) -> Vec<Complex64> {
    let n = row.len();
    let scale = 2.0 / n as f64;
    match fft {
        Some(fft) => {
            let mut buf: Vec<Complex64> = row.iter().map(|&v| Complex64::new(v, 0.0)).collect();
            fft.process(&mut buf);
            freqs
                .iter()
                .map(|&f| buf[exact_bin(f, fs, n).expect("checked on-bin")].conj() * scale)
                .collect()
        }
        None => freqs
            .iter()
            .map(|&f| {
                let step = Complex64::from_polar(1.0, 2.0 * PI * f / fs);
                let mut z = Complex64::new(1.0, 0.0);
                let mut acc = Complex64::new(0.0, 0.0);
                for (i, &v) in row.iter().enumerate() {
                    if i % 4096 == 0 {
                        z = Complex64::from_polar(1.0, 2.0 * PI * f * i as f64 / fs);
                    }
                    acc += z * v;
                    z *= step;
                }
                acc * scale
            })
            .collect(),
    }
}

/// `y_j = Σ_n b_n·e^{−iα·j·n}` for `j < m` via Bluestein's chirp-z.
struct Chirp {
    n: usize,
    m: usize,
    pre: Vec<Complex64>,
    kernel: Vec<Complex64>,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

impl Chirp {
    fn new(n: usize, m: usize, alpha: f64) -> Self {
        let len = (n + m - 1).next_power_of_two();
        let mut planner = FftPlanner::new();
        let fwd = planner.plan_fft_forward(len);
        let inv = planner.plan_fft_inverse(len);
        let chirp = |k: i64| Complex64::from_polar(1.0, -0.5 * alpha * (k * k) as f64);
        let pre: Vec<Complex64> = (0..n.max(m) as i64).map(chirp).collect();
        let mut kernel = vec![Complex64::new(0.0, 0.0); len];
        for k in 0..m {
            kernel[k] = chirp(k as i64).conj();
        }
        for k in 1..n {
            kernel[len - k] = chirp(k as i64).conj();
        }
        fwd.process(&mut kernel);
        let s = 1.0 / len as f64;
        for c in &mut kernel {
            *c *= s;
        }
        Chirp {
            n,
            m,
            pre,
            kernel,
            fwd,
            inv,
        }
    }

    fn apply(&self, b: &[Complex64], buf: &mut Vec<Complex64>) -> Vec<Complex64> {
        buf.clear();
        buf.resize(self.kernel.len(), Complex64::new(0.0, 0.0));
        for i in 0..self.n {
            buf[i] = b[i] * self.pre[i];
        }
        self.fwd.process(buf);
        for (x, k) in buf.iter_mut().zip(&self.kernel) {
            *x *= k;
        }
        self.inv.process(buf);
        (0..self.m).map(|j| buf[j] * self.pre[j]).collect()
    }
}

/// Spatial spectrum magnitudes on `grid` for every frequency row.
struct SpatialTransform<'a> {
    x: &'a [f64],
    taper: Vec<f64>,
    grid: Vec<f64>,
    chirp: Option<Chirp>,
}

impl<'a> SpatialTransform<'a> {
    fn new(x: &'a [f64], grid: Vec<f64>) -> Self {
        let n = x.len();
        let raw: Vec<f64> = (0..n).map(|i| 0.5 - 0.5 * (2.0 * PI * i as f64 / (n - 1) as f64).cos()).collect();
        let sum: f64 = raw.iter().sum();
        let taper = raw.into_iter().map(|w| w / sum).collect();
        let m = grid.len();
        let dnu = (grid[m - 1] - grid[0]) / (m - 1) as f64;
        let uniform = m > 2 && grid.windows(2).all(|w| ((w[1] - w[0]) / dnu - 1.0).abs() < 1e-9);
        let dx = (x[n - 1] - x[0]) / (n - 1) as f64;
        let chirp = uniform.then(|| Chirp::new(n, m, 2.0 * PI * dnu * dx));
        SpatialTransform { x, taper, grid, chirp }
    }

    /// |Σ w(x)·a(x)·e^{−i2πνx}| on the grid.
    fn magnitudes(&self, a: &[Complex64], buf: &mut Vec<Complex64>) -> Vec<f64> {
        match &self.chirp {
            Some(ch) => {
                let nu0 = self.grid[0];
                let (x0, dx) = (self.x[0], (self.x[self.x.len() - 1] - self.x[0]) / (self.x.len() - 1) as f64);
                let b: Vec<Complex64> = a
                    .iter()
                    .zip(&self.taper)
                    .enumerate()
                    .map(|(i, (v, w))| v * *w * Complex64::from_polar(1.0, -2.0 * PI * nu0 * (x0 + i as f64 * dx)))
                    .collect();
                ch.apply(&b, buf).iter().map(|c| c.norm()).collect()
            }
            None => self
                .grid
                .iter()
                .map(|&nu| {
                    a.iter()
                        .zip(&self.taper)
                        .zip(self.x)
                        .map(|((v, w), &x)| v * *w * Complex64::from_polar(1.0, -2.0 * PI * nu * x))
                        .sum::<Complex64>()
                        .norm()
                })
                .collect(),
        }
    }
}

/// Peaks of one frequency slice. `mag` carries one extra sample beyond each
/// end of the analysis grid so that maxima at the grid edges are detectable.
fn find_peaks(mag: &[f64], nu0: f64, dnu: f64, threshold: f64) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    for j in 1..mag.len() - 1 {
        let (a, b, c) = (mag[j - 1], mag[j], mag[j + 1]);
        if b > a && b >= c && b >= threshold {
            let den = a - 2.0 * b + c;
            let p = if den < 0.0 { (0.5 * (a - c) / den).clamp(-0.5, 0.5) } else { 0.0 };
            // index j of `mag` is grid point j − 1
            out.push((nu0 + (j as f64 - 1.0 + p) * dnu, b - 0.25 * (a - c) * p));
        }
    }
    out
}

fn slice_threshold(inner: &[f64], opts: &ExtractOptions) -> f64 {
    let top = inner.iter().copied().fold(0.0, f64::max);
    let mut sorted = inner.to_vec();
    let med = median(&mut sorted);
    (opts.peak_floor * top).max(opts.noise_floor * med)
}

fn median(v: &mut [f64]) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Link peaks of consecutive frequencies; returns one track id per pair.
///
/// A peak continues a track when it lies within `3·dnu` plus twice the
/// non-dispersive wavenumber change `ν·Δf/f` of the linear extrapolation.
fn link_tracks(slices: &[Vec<usize>], pairs: &[Pair], dnu: f64) -> Vec<Option<usize>> {
    let mut track_of: Vec<Option<usize>> = vec![None; pairs.len()];
    // per active track: last two members
    let mut active: Vec<(usize, Option<usize>, usize)> = Vec::new();
    let mut next_id = 0;
    for slice in slices {
        let mut cand: Vec<(f64, usize, usize)> = Vec::new();
        for (t, &(last, prev, _)) in active.iter().enumerate() {
            let lp = &pairs[last];
            for &pi in slice {
                let p = &pairs[pi];
                let df = p.f - lp.f;
                let pred = match prev {
                    Some(q) if pairs[q].f < lp.f => {
                        let qp = &pairs[q];
                        lp.nu + (lp.nu - qp.nu) / (lp.f - qp.f) * df
                    }
                    _ => lp.nu,
                };
                let tol = 3.0 * dnu + 2.0 * lp.nu * df / lp.f;
                let dist = (p.nu - pred).abs();
                if dist <= tol {
                    cand.push((dist, t, pi));
                }
            }
        }
        cand.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut t_used = vec![false; active.len()];
        let mut next_active = Vec::new();
        for (_, t, pi) in cand {
            if t_used[t] || track_of[pi].is_some() {
                continue;
            }
            t_used[t] = true;
            let (last, _, id) = active[t];
            track_of[pi] = Some(id);
            next_active.push((pi, Some(last), id));
        }
        for &pi in slice {
            if track_of[pi].is_none() {
                track_of[pi] = Some(next_id);
                next_active.push((pi, None, next_id));
                next_id += 1;
            }
        }
        active = next_active;
    }
    track_of
}

/// Full extraction pipeline.
pub fn extract_dispersion(
    rec: &WavefieldRecord,
    spec: &ExcitationSpec,
    window: &EvaluationWindow,
    nu_grid: &[f64],
    opts: &ExtractOptions,
) -> Result<ExtractedPairs> {
    rec.validate()?;
    spec.validate()?;
    if nu_grid.len() < 3 || nu_grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::domain("wavenumber grid needs ≥ 3 ascending points"));
    }
    if nu_grid[0] > window.nu_min * (1.0 + 1e-12) || *nu_grid.last().unwrap() < window.nu_max * (1.0 - 1e-12) {
        return Err(Error::domain("wavenumber grid must cover the evaluation window"));
    }
    if opts.median_window % 2 == 0 || opts.median_window < 3 {
        return Err(Error::domain("median window must be odd and ≥ 3"));
    }
    let fs = rec.sample_rate;
    let n = rec.n_samples();
    let freqs: Vec<f64> = spec
        .frequencies()
        .into_iter()
        .filter(|&f| f >= window.f_min && f <= window.f_max && f < 0.5 * fs)
        .collect();
    if freqs.is_empty() {
        return Err(Error::Extraction("no excited frequency inside the evaluation band".into()));
    }
    let jobs = opts.jobs.max(1);

    // 1. temporal spectra, [channel][frequency]
    let on_bin = freqs.iter().all(|&f| exact_bin(f, fs, n).is_some());
    let fft = on_bin.then(|| FftPlanner::new().plan_fft_forward(n));
    let spectra: Vec<Vec<Complex64>> = par_map(&rec.v, jobs, |row| temporal_dft(row, &freqs, fs, fft.as_ref()));

    // 2.–3. spatial spectra and peaks per frequency
    let m = nu_grid.len();
    let dnu = (nu_grid[m - 1] - nu_grid[0]) / (m - 1) as f64;
    let uniform = nu_grid.windows(2).all(|w| ((w[1] - w[0]) / dnu - 1.0).abs() < 1e-9);
    // Extend the grid down to ν ≈ 0 with its first spacing: the slice
    // maximum then includes main lobes below the window, and their sidelobes
    // inside it fall under the floor. One guard point sits beyond each end.
    let h0 = nu_grid[1] - nu_grid[0];
    let pre = (nu_grid[0] / h0).floor().max(0.0) as usize;
    let mut ext_grid = Vec::with_capacity(pre + m + 2);
    ext_grid.extend((0..=pre).rev().map(|j| nu_grid[0] - (j + 1) as f64 * h0));
    ext_grid.extend_from_slice(nu_grid);
    ext_grid.push(nu_grid[m - 1] + (nu_grid[m - 1] - nu_grid[m - 2]));
    let len = ext_grid.len();
    let st = SpatialTransform::new(&rec.x_positions, ext_grid.clone());
    let idx: Vec<usize> = (0..freqs.len()).collect();
    let peaks: Vec<Vec<(f64, f64)>> = par_map(&idx, jobs, |&fi| {
        let a: Vec<Complex64> = spectra.iter().map(|s| s[fi]).collect();
        let mut buf = Vec::new();
        let mag = st.magnitudes(&a, &mut buf);
        let threshold = slice_threshold(&mag[1..len - 1], opts);
        if !(threshold > 0.0) {
            Vec::new()
        } else if uniform {
            find_peaks(&mag, ext_grid[1], dnu, threshold)
        } else {
            // non-uniform grid: no sub-grid refinement
            (1..len - 1)
                .filter(|&j| mag[j] > mag[j - 1] && mag[j] >= mag[j + 1] && mag[j] >= threshold)
                .map(|j| (ext_grid[j], mag[j]))
                .collect()
        }
    });

    let mut pairs: Vec<Pair> = Vec::new();
    let mut slices: Vec<Vec<usize>> = Vec::with_capacity(freqs.len());
    for (&f, pk) in freqs.iter().zip(&peaks) {
        let mut slice = Vec::new();
        for &(nu, amp) in pk {
            let inside = window.contains(f, nu);
            if inside {
                slice.push(pairs.len());
            }
            pairs.push(Pair {
                f,
                nu,
                amplitude: amp,
                track: None,
                flag: if inside { PairFlag::Retained } else { PairFlag::OutOfWindow },
            });
        }
        slices.push(slice);
    }

    // 4. continuity
    let ids = link_tracks(&slices, &pairs, dnu);
    let n_tracks = ids.iter().flatten().max().map_or(0, |&t| t + 1);
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); n_tracks];
    for (pi, id) in ids.iter().enumerate() {
        if let Some(t) = id {
            members[*t].push(pi);
            pairs[pi].track = Some(*t);
        }
    }
    let half = opts.median_window / 2;
    for mem in &members {
        if mem.len() < opts.min_track.max(1) {
            for &pi in mem {
                pairs[pi].flag = PairFlag::Outlier;
            }
            continue;
        }
        let nus: Vec<f64> = mem.iter().map(|&pi| pairs[pi].nu).collect();
        let len = nus.len();
        let mut reject = Vec::new();
        for i in 0..len {
            let w = opts.median_window.min(len);
            let start = i.saturating_sub(half).min(len - w);
            let mut win: Vec<f64> = nus[start..start + w].to_vec();
            let med = median(&mut win);
            let mut dev: Vec<f64> = win.iter().map(|v| (v - med).abs()).collect();
            let mad = median(&mut dev).max(dnu);
            if (nus[i] - med).abs() > opts.mad_factor * mad {
                reject.push(mem[i]);
            }
        }
        for pi in reject {
            pairs[pi].flag = PairFlag::Outlier;
        }
    }
    // renumber surviving tracks densely in order of first frequency
    let mut remap: Vec<Option<usize>> = vec![None; n_tracks];
    let mut next = 0;
    for p in pairs.iter_mut() {
        match (p.flag, p.track) {
            (PairFlag::Retained, Some(t)) => {
                if remap[t].is_none() {
                    remap[t] = Some(next);
                    next += 1;
                }
                p.track = remap[t];
            }
            _ => p.track = None,
        }
    }

    if pairs.iter().all(|p| p.flag != PairFlag::Retained) {
        let count = |flag| pairs.iter().filter(|p| p.flag == flag).count();
        return Err(Error::Extraction(format!(
            "no pair survived: {} peaks over {} frequencies, {} outside the window, {} rejected by continuity",
            pairs.len(),
            freqs.len(),
            count(PairFlag::OutOfWindow),
            count(PairFlag::Outlier)
        )));
    }
    Ok(ExtractedPairs {
        window: *window,
        pairs,
        frequencies: freqs,
    })
}

/// Order-preserving map over `items` with up to `jobs` scoped threads.
fn par_map<T: Sync, U: Send>(items: &[T], jobs: usize, f: impl Fn(&T) -> U + Sync) -> Vec<U> {
    let jobs = jobs.max(1).min(items.len().max(1));
    if jobs == 1 {
        return items.iter().map(f).collect();
    }
    let chunk = items.len().div_ceil(jobs);
    let f = &f;
    std::thread::scope(|scope| {
        let handles: Vec<_> = items
            .chunks(chunk)
            .map(|c| scope.spawn(move || c.iter().map(f).collect::<Vec<U>>()))
            .collect();
        handles.into_iter().flat_map(|h| h.join().expect("worker panicked")).collect()
    })
}

/// One continuity track in (fd, cp).
#[derive(Clone, Debug, PartialEq)]
pub struct PhaseTrack {
    pub track: usize,
    /// (fd in Hz·m, cp in m/s), ascending fd.
    pub samples: Vec<(f64, f64)>,
}

/// cp = f/ν̃ and fd = f·d for every retained pair, grouped by track.
pub fn to_phase_velocity(pairs: &ExtractedPairs, d: f64) -> Result<Vec<PhaseTrack>> {
    if pairs.pairs.is_empty() {
        return Err(Error::Extraction("no pairs to convert".into()));
    }
    let mut tracks: Vec<PhaseTrack> = Vec::new();
    for p in pairs.retained() {
        let t = p.track.unwrap_or(usize::MAX);
        let pos = match tracks.iter().position(|tr| tr.track == t) {
            Some(i) => i,
            None => {
                tracks.push(PhaseTrack {
                    track: t,
                    samples: Vec::new(),
                });
                tracks.len() - 1
            }
        };
        tracks[pos].samples.push((p.f * d, p.cp()));
    }
    Ok(tracks)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chirp_matches_direct_sum() {
        let n = 37;
        let x: Vec<f64> = (0..n).map(|i| 0.2 + i as f64 * 1.3e-3).collect();
        let a: Vec<Complex64> = (0..n).map(|i| Complex64::from_polar(1.0 + 0.1 * i as f64, 0.7 * i as f64)).collect();
        let grid: Vec<f64> = (0..101).map(|j| 10.0 + 2.5 * j as f64).collect();
        let fast = SpatialTransform::new(&x, grid.clone());
        assert!(fast.chirp.is_some());
        let mut slow = SpatialTransform::new(&x, grid);
        slow.chirp = None;
        let mut buf = Vec::new();
        let (u, v) = (fast.magnitudes(&a, &mut buf), slow.magnitudes(&a, &mut buf));
        for (p, q) in u.iter().zip(&v) {
            assert!((p - q).abs() < 1e-12 * q.max(1.0), "{p} {q}");
        }
    }

    #[test]
    fn parabola_recovers_quadratic_vertex() {
        // samples of 5 − (ν − 12.3)² on a unit grid starting at 10 (one guard each side)
        let mag: Vec<f64> = (0..7).map(|j| 5.0 - (9.0 + j as f64 - 12.3).powi(2)).collect();
        let p = find_peaks(&mag, 10.0, 1.0, 0.1);
        assert_eq!(p.len(), 1);
        assert!((p[0].0 - 12.3).abs() < 1e-12);
        assert!((p[0].1 - 5.0).abs() < 1e-12);
    }

    #[test]
    fn monotone_slice_has_no_peak() {
        let mag: Vec<f64> = (0..20).map(|j| 1.0 / (1.0 + j as f64)).collect();
        assert!(find_peaks(&mag, 0.0, 1.0, 0.1).is_empty());
    }

    #[test]
    fn velocity_conversion() {
        let w = super::super::window::evaluation_window(1.0, 1e-3, 2e-3).unwrap();
        let mk = |f: f64, nu: f64| Pair {
            f,
            nu,
            amplitude: 1.0,
            track: Some(0),
            flag: PairFlag::Retained,
        };
        let ex = ExtractedPairs {
            window: w,
            pairs: vec![mk(100e3, 200.0), mk(500e3, 100.0)],
            frequencies: vec![100e3, 500e3],
        };
        let t = to_phase_velocity(&ex, 2e-3).unwrap();
        assert_eq!(t.len(), 1);
        assert_eq!(t[0].samples[0].1, 500.0);
        assert_eq!(t[0].samples[1], (1000.0, 5000.0));
    }
}
