//! Comparison of extracted pairs with the dispersion that generated the field.

use super::extract::{ExtractedPairs, PairFlag};
use super::synth::ModeCurve;
use crate::io::{PairRow, HZ_M_PER_MHZMM};
use crate::unitcell::ModeLabel;
use std::collections::BTreeMap;

/// Recovery tolerance on |Δν̃|/ν̃ for an input point to count as recovered.
pub const RECOVERY_TOL: f64 = 5e-3;

#[derive(Clone, Debug, PartialEq)]
pub struct ModeStats {
    pub label: ModeLabel,
    /// Retained pairs assigned to this mode.
    pub n_pairs: usize,
    /// Input points inside the window.
    pub n_expected: usize,
    pub n_recovered: usize,
    pub median_rel_error: f64,
    pub max_rel_error: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RoundTripReport {
    pub n_retained: usize,
    pub n_expected: usize,
    pub n_recovered: usize,
    /// Relative cp error over all retained pairs.
    pub median_rel_error: f64,
    pub max_rel_error: f64,
    pub modes: Vec<ModeStats>,
}

impl RoundTripReport {
    pub fn recovered_fraction(&self) -> f64 {
        if self.n_expected == 0 {
            0.0
        } else {
            self.n_recovered as f64 / self.n_expected as f64
        }
    }
}

/// Nearest input mode (by relative wavenumber distance) and the relative cp error.
fn nearest(modes: &[ModeCurve], f: f64, nu: f64) -> Option<(usize, f64)> {
    modes
        .iter()
        .enumerate()
        .filter_map(|(i, m)| m.nu(f).map(|r| (i, (r / nu - 1.0).abs())))
        .min_by(|a, b| a.1.total_cmp(&b.1))
}

fn median_of(mut v: Vec<f64>) -> f64 {
    if v.is_empty() {
        return f64::NAN;
    }
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

pub fn compare(pairs: &ExtractedPairs, modes: &[ModeCurve]) -> RoundTripReport {
    let mut all = Vec::new();
    let mut per: Vec<Vec<f64>> = vec![Vec::new(); modes.len()];
    for p in pairs.retained() {
        if let Some((i, e)) = nearest(modes, p.f, p.nu) {
            all.push(e);
            per[i].push(e);
        }
    }
    let mut by_f: BTreeMap<u64, Vec<f64>> = BTreeMap::new();
    for p in pairs.retained() {
        by_f.entry(p.f.to_bits()).or_default().push(p.nu);
    }
    let mut stats = Vec::new();
    let (mut n_exp, mut n_rec) = (0, 0);
    for (i, m) in modes.iter().enumerate() {
        let (mut e, mut r) = (0, 0);
        for &f in &pairs.frequencies {
            let Some(nu) = m.nu(f) else { continue };
            if !pairs.window.contains(f, nu) {
                continue;
            }
            e += 1;
            let hit = by_f.get(&f.to_bits()).is_some_and(|v| v.iter().any(|&x| (x / nu - 1.0).abs() < RECOVERY_TOL));
            if hit {
                r += 1;
            }
        }
        n_exp += e;
        n_rec += r;
        let errs = std::mem::take(&mut per[i]);
        stats.push(ModeStats {
            label: m.label,
            n_pairs: errs.len(),
            n_expected: e,
            n_recovered: r,
            max_rel_error: errs.iter().copied().fold(0.0, f64::max),
            median_rel_error: median_of(errs),
        });
    }
    RoundTripReport {
        n_retained: all.len(),
        n_expected: n_exp,
        n_recovered: n_rec,
        max_rel_error: all.iter().copied().fold(0.0, f64::max),
        median_rel_error: median_of(all),
        modes: stats,
    }
}

/// Majority nearest-mode label per track.
pub fn label_tracks(pairs: &ExtractedPairs, modes: &[ModeCurve]) -> BTreeMap<usize, ModeLabel> {
    let mut votes: BTreeMap<usize, BTreeMap<ModeLabel, usize>> = BTreeMap::new();
    for p in pairs.retained() {
        if let (Some(t), Some((i, _))) = (p.track, nearest(modes, p.f, p.nu)) {
            *votes.entry(t).or_default().entry(modes[i].label).or_default() += 1;
        }
    }
    votes
        .into_iter()
        .filter_map(|(t, v)| v.into_iter().max_by(|a, b| a.1.cmp(&b.1).then(b.0.cmp(&a.0))).map(|(l, _)| (t, l)))
        .collect()
}

/// CSV rows for every pair; `mode` is the track label, `T<n>` for an
/// unlabelled track, empty for pairs outside any track.
pub fn pair_rows(pairs: &ExtractedPairs, labels: &BTreeMap<usize, ModeLabel>) -> Vec<PairRow> {
    let d = pairs.window.thickness;
    pairs
        .pairs
        .iter()
        .map(|p| PairRow {
            f_hz: p.f,
            nu_per_m: p.nu,
            cp_m_per_s: p.cp(),
            fd_mhzmm: p.f * d / HZ_M_PER_MHZMM,
            mode: match (p.flag, p.track) {
                (PairFlag::Retained, Some(t)) => labels.get(&t).map_or_else(|| format!("T{t}"), |l| l.to_string()),
                _ => String::new(),
            },
            flag: p.flag.as_str().to_string(),
        })
        .collect()
}
