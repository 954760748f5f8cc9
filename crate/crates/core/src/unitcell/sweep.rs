//! Wavenumber sweep with MAC branch continuation.

use super::assembly::{assemble_with, AssembledSystem, Kinematics};
use super::classify::{classify_symmetry, rank_labels, ModeLabel};
use super::eigen::{solve_eigen, EigenOptions};
use super::floquet::floquet_reduce;
use super::mesh::UnitCellMesh;
use crate::constitutive::Material;
use crate::error::{Error, Result};
use crate::prestress::PreStressState;
use num_complex::Complex64;
use std::collections::BTreeMap;
use std::f64::consts::PI;

pub const MAC_THRESHOLD: f64 = 0.9;
pub const DEFAULT_N_MODES: usize = 8;
pub const DEFAULT_N_K: usize = 150;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Sample {
    /// rad/m
    pub k: f64,
    /// Hz
    pub f: f64,
    /// m/s
    pub cp: f64,
}

#[derive(Clone, Debug)]
pub struct ModeBranch {
    pub label: ModeLabel,
    pub samples: Vec<Sample>,
    /// Retained eigenvectors (k-phase removed), one per sample, if requested.
    pub mode_shapes: Option<Vec<Vec<Complex64>>>,
}

impl ModeBranch {
    pub fn frequencies(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.f).collect()
    }
}

#[derive(Clone, Debug)]
pub struct DispersionSet {
    pub material: Material,
    /// Applied nominal stress, Pa.
    pub sigma: f64,
    /// Reference plate thickness, m.
    pub thickness: f64,
    pub dx1: f64,
    pub nx: usize,
    pub ny: usize,
    pub k_grid: Vec<f64>,
    pub branches: Vec<ModeBranch>,
}

impl DispersionSet {
    pub fn branch(&self, label: ModeLabel) -> Option<&ModeBranch> {
        self.branches.iter().find(|b| b.label == label)
    }
}

#[derive(Clone, Debug)]
pub struct SweepOptions {
    pub n_modes: usize,
    pub jobs: usize,
    pub eigen: EigenOptions,
    /// Defaults to [`Kinematics::default_for`] the material kind.
    pub kinematics: Option<Kinematics>,
    pub keep_shapes: bool,
}

impl Default for SweepOptions {
    fn default() -> Self {
        SweepOptions {
            n_modes: DEFAULT_N_MODES,
            jobs: 1,
            eigen: EigenOptions::default(),
            kinematics: None,
            keep_shapes: false,
        }
    }
}

/// `n` logarithmically spaced wavenumbers in `[k_min, k_max]`.
pub fn log_grid(k_min: f64, k_max: f64, n: usize) -> Result<Vec<f64>> {
    if !(k_min > 0.0) || !(k_max > k_min) || n < 2 {
        return Err(Error::domain(format!(
            "need 0 < k_min < k_max and n ≥ 2 (got {k_min}, {k_max}, {n})"
        )));
    }
    let (a, b) = (k_min.ln(), k_max.ln());
    Ok((0..n)
        .map(|i| match i {
            0 => k_min,
            _ if i == n - 1 => k_max,
            _ => (a + (b - a) * i as f64 / (n - 1) as f64).exp(),
        })
        .collect())
}

/// Wavenumber range that covers `fd ∈ [fd_min, fd_max]` (Hz·m) for phase
/// velocities between `c_slow` and `c_fast`.
pub fn k_range_for_fd(fd_min: f64, fd_max: f64, thickness: f64, c_slow: f64, c_fast: f64) -> (f64, f64) {
    (
        2.0 * PI * fd_min / thickness / c_fast,
        2.0 * PI * fd_max / thickness / c_slow,
    )
}

struct PointResult {
    omegas: Vec<f64>,
    labels: Vec<ModeLabel>,
    shapes: Vec<Vec<Complex64>>,
}

fn solve_point(
    sys: &AssembledSystem,
    mesh: &UnitCellMesh,
    k: f64,
    opts: &SweepOptions,
) -> Result<PointResult> {
    let (kb, mb) = floquet_reduce(sys, mesh, k);
    let pairs = solve_eigen(&kb, &mb, opts.n_modes, &opts.eigen).map_err(|e| match e {
        Error::Instability { eigenvalue, clamp, .. } => Error::Instability {
            eigenvalue,
            clamp,
            context: format!(" at k = {k:.6e} rad/m, σ = {:.3e} Pa", sys.sigma),
        },
        Error::NoConvergence { iterations, residual } => Error::Eigen(format!(
            "no convergence at k = {k:.6e} rad/m after {iterations} restarts (residual ratio {residual:.3e})"
        )),
        other => other,
    })?;
    let symmetries: Vec<_> = pairs.iter().map(|p| classify_symmetry(&p.vector, mesh)).collect();
    let labels = rank_labels(&symmetries);
    // remove the Bloch phase so shapes at neighbouring k compare directly
    let shapes = pairs
        .iter()
        .map(|p| {
            let mut v = p.vector.clone();
            for r in 0..mesh.n_reduced_nodes() {
                let x = mesh.nodes[mesh.unreduce(r)][0];
                let ph = Complex64::from_polar(1.0, -k * x);
                v[2 * r] *= ph;
                v[2 * r + 1] *= ph;
            }
            v
        })
        .collect();
    Ok(PointResult {
        omegas: pairs.iter().map(|p| p.omega).collect(),
        labels,
        shapes,
    })
}

/// Modal assurance criterion `|aᴴb|² / (|a|²|b|²)`.
pub fn mac(a: &[Complex64], b: &[Complex64]) -> f64 {
    let ab: Complex64 = a.iter().zip(b).map(|(x, y)| x.conj() * y).sum();
    let aa: f64 = a.iter().map(|x| x.norm_sqr()).sum();
    let bb: f64 = b.iter().map(|x| x.norm_sqr()).sum();
    if aa == 0.0 || bb == 0.0 {
        0.0
    } else {
        ab.norm_sqr() / (aa * bb)
    }
}

struct Track {
    points: Vec<(usize, usize)>, // (k index, mode index)
}

/// Links modes across wavenumbers by MAC, greedy on descending MAC with
/// frequency proximity as tie-break.
fn continue_branches(points: &[PointResult]) -> Vec<Track> {
    let mut tracks: Vec<Track> = Vec::new();
    for (t, pt) in points.iter().enumerate() {
        let mut taken = vec![false; pt.omegas.len()];
        if t > 0 {
            let prev = &points[t - 1];
            let mut cands = Vec::new();
            for (ti, tr) in tracks.iter().enumerate() {
                let &(lt, lm) = tr.points.last().unwrap();
                if lt != t - 1 {
                    continue;
                }
                for m in 0..pt.omegas.len() {
                    let v = mac(&prev.shapes[lm], &pt.shapes[m]);
                    if v >= MAC_THRESHOLD {
                        cands.push((v, (prev.omegas[lm] - pt.omegas[m]).abs(), ti, m));
                    }
                }
            }
            cands.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.total_cmp(&b.1)));
            let mut used = vec![false; tracks.len()];
            for (_, _, ti, m) in cands {
                if !used[ti] && !taken[m] {
                    used[ti] = true;
                    taken[m] = true;
                    tracks[ti].points.push((t, m));
                }
            }
        }
        for m in 0..pt.omegas.len() {
            if !taken[m] {
                tracks.push(Track { points: vec![(t, m)] });
            }
        }
    }
    tracks
}

fn majority(labels: impl Iterator<Item = ModeLabel>) -> ModeLabel {
    let mut counts: BTreeMap<ModeLabel, usize> = BTreeMap::new();
    for l in labels {
        *counts.entry(l).or_default() += 1;
    }
    // BTreeMap order makes ties deterministic
    counts.into_iter().max_by(|a, b| a.1.cmp(&b.1).then(b.0.cmp(&a.0))).map(|(l, _)| l).unwrap_or(ModeLabel::Unclassified)
}

/// Pre-stress → assembly → per-k eigen-solve → labelled branches.
pub fn sweep(
    mat: &Material,
    state: &PreStressState,
    mesh: &UnitCellMesh,
    k_grid: &[f64],
    opts: &SweepOptions,
) -> Result<DispersionSet> {
    if k_grid.is_empty() || !(k_grid[0] > 0.0) || k_grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::domain("k grid must be positive and strictly ascending"));
    }
    let kin = opts.kinematics.unwrap_or_else(|| Kinematics::default_for(mat.kind));
    let sys = assemble_with(mesh, mat, state, kin)?;

    let jobs = opts.jobs.max(1).min(k_grid.len());
    let mut slots: Vec<Option<Result<PointResult>>> = (0..k_grid.len()).map(|_| None).collect();
    if jobs == 1 {
        for (slot, &k) in slots.iter_mut().zip(k_grid) {
            *slot = Some(solve_point(&sys, mesh, k, opts));
        }
    } else {
        let sys = &sys;
        let chunk = k_grid.len().div_ceil(jobs);
        std::thread::scope(|scope| {
            for (slot_chunk, k_chunk) in slots.chunks_mut(chunk).zip(k_grid.chunks(chunk)) {
                scope.spawn(move || {
                    for (slot, &k) in slot_chunk.iter_mut().zip(k_chunk) {
                        *slot = Some(solve_point(sys, mesh, k, opts));
                    }
                });
            }
        });
    }
    let points: Vec<PointResult> = slots
        .into_iter()
        .map(|s| s.expect("every slot is filled"))
        .collect::<Result<_>>()?;

    let tracks = continue_branches(&points);
    // vote, then merge tracks that share a label
    let mut by_label: BTreeMap<ModeLabel, Vec<(usize, usize)>> = BTreeMap::new();
    let mut unclassified: Vec<Vec<(usize, usize)>> = Vec::new();
    for tr in tracks {
        let label = majority(tr.points.iter().map(|&(t, m)| points[t].labels[m]));
        if label == ModeLabel::Unclassified {
            unclassified.push(tr.points);
            continue;
        }
        by_label.entry(label).or_default().extend(tr.points);
    }

    let make = |label: ModeLabel, mut pts: Vec<(usize, usize)>| {
        pts.sort();
        let mut kept: Vec<(usize, usize)> = Vec::with_capacity(pts.len());
        for (t, m) in pts {
            match kept.last_mut() {
                Some(last) if last.0 == t => {
                    // duplicate k: prefer the mode whose own rank label agrees
                    if points[t].labels[last.1] != label && points[t].labels[m] == label {
                        *last = (t, m);
                    }
                }
                _ => kept.push((t, m)),
            }
        }
        let samples = kept
            .iter()
            .map(|&(t, m)| {
                let (k, omega) = (k_grid[t], points[t].omegas[m]);
                Sample {
                    k,
                    f: omega / (2.0 * PI),
                    cp: omega / k,
                }
            })
            .collect();
        let mode_shapes = opts
            .keep_shapes
            .then(|| kept.iter().map(|&(t, m)| points[t].shapes[m].clone()).collect());
        ModeBranch {
            label,
            samples,
            mode_shapes,
        }
    };

    let mut branches: Vec<ModeBranch> = by_label.into_iter().map(|(l, p)| make(l, p)).collect();
    branches.extend(unclassified.into_iter().map(|p| make(ModeLabel::Unclassified, p)));

    Ok(DispersionSet {
        material: *mat,
        sigma: state.sigma_applied,
        thickness: mesh.thickness,
        dx1: mesh.dx1,
        nx: mesh.nx,
        ny: mesh.ny,
        k_grid: k_grid.to_vec(),
        branches,
    })
}
