//! Acceptance suite: one pass/fail line per criterion.
//!
//! Runs as a plain binary (`harness = false`) so the long FEM sweeps are
//! shared between criteria and reported in order. Exits non-zero if any
//! criterion fails.

use acoustoelastic::analysis::{delta_cp, regress, sign_changes, unity_load_step, LoadSeries, Source};
use acoustoelastic::constitutive::{fdcheck, Material, MaterialKind};
use acoustoelastic::lamb::LambProblem;
use acoustoelastic::prestress;
use acoustoelastic::unitcell::sweep::k_range_for_fd;
use acoustoelastic::unitcell::{log_grid, sweep, DispersionSet, MeshPreset, ModeLabel, SweepOptions, UnitCellMesh};
use acoustoelastic::wavefield::{
    compare, default_nu_grid, evaluation_window, extract_dispersion, synthesize_wavefield, ExcitationSpec,
    ExtractOptions, MeasurementPath, ModeCurve, SynthesisOptions, DEFAULT_NU_POINTS,
};
use std::time::Instant;

const MHZMM: f64 = 1e3;
const MPA: f64 = 1e6;
const E_STUDY: f64 = 68e9;
const D_STUDY: f64 = 1e-3;
const S0: ModeLabel = ModeLabel::S(0);
const A0: ModeLabel = ModeLabel::A(0);
const C_SLOW: f64 = 2400.0;
const C_FAST: f64 = 5600.0;

struct Outcome {
    pass: bool,
    detail: String,
}

fn report(id: &str, title: &str, o: Result<Outcome, String>) -> bool {
    let (pass, detail) = match o {
        Ok(o) => (o.pass, o.detail),
        Err(e) => (false, format!("error: {e}")),
    };
    println!("[{}] {id} {title}: {detail}", if pass { "PASS" } else { "FAIL" });
    pass
}

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn study_sweep(kind: MaterialKind, sigma: f64, preset: MeshPreset, k: &[f64]) -> Result<DispersionSet, String> {
    let mat = Material::almg3(kind, E_STUDY);
    let state = prestress::solve(&mat, sigma).map_err(err)?;
    let mesh = UnitCellMesh::preset(D_STUDY / 10.0, D_STUDY, preset).map_err(err)?;
    sweep(&mat, &state, &mesh, k, &SweepOptions::default()).map_err(err)
}

fn c1_constitutive() -> Result<Outcome, String> {
    let t = Instant::now();
    let mut worst = (0.0f64, 0.0f64);
    let mut parts = Vec::new();
    for kind in MaterialKind::ALL {
        let r = fdcheck::verify(&Material::almg3(kind, E_STUDY), 100, 2024).map_err(err)?;
        worst = (worst.0.max(r.stress_rel_err), worst.1.max(r.tangent_rel_err));
        parts.push(format!("{kind} {:.1e}/{:.1e}", r.stress_rel_err, r.tangent_rel_err));
    }
    let secs = t.elapsed().as_secs_f64();
    Ok(Outcome {
        pass: worst.0 < 1e-6 && worst.1 < 1e-5 && secs < 10.0,
        detail: format!(
            "stress/tangent rel err {} (limits 1e-6/1e-5), {secs:.2} s (limit 10 s)",
            parts.join(", ")
        ),
    })
}

/// Worst relative cp error of S0 and A0 against the Rayleigh-Lamb roots on [0.1, 3] MHzmm.
fn lamb_error(set: &DispersionSet) -> Result<(f64, usize), String> {
    let lamb = LambProblem::from_material(&set.material, set.thickness).map_err(err)?;
    let (lo, hi) = (0.1 * MHZMM, 3.0 * MHZMM);
    let mut worst = 0.0f64;
    let mut n = 0;
    for mode in [S0, A0] {
        let b = set.branch(mode).ok_or(format!("no {mode} branch"))?;
        let fds: Vec<f64> = b.samples.iter().map(|s| s.f * set.thickness).collect();
        let (first, last) = (fds.iter().copied().fold(f64::INFINITY, f64::min), fds.iter().copied().fold(0.0, f64::max));
        if first > lo * 1.1 || last < hi / 1.1 {
            return Err(format!("{mode} covers {:.3}–{:.3} MHzmm only", first / MHZMM, last / MHZMM));
        }
        for (s, &fd) in b.samples.iter().zip(&fds) {
            if fd < lo || fd > hi {
                continue;
            }
            let exact = lamb.cp(fd, mode).map_err(err)?;
            worst = worst.max((s.cp / exact - 1.0).abs());
            n += 1;
        }
    }
    Ok((worst, n))
}

fn c2_oracle() -> Result<Outcome, String> {
    let (kmin, kmax) = k_range_for_fd(0.1 * MHZMM, 3.0 * MHZMM, D_STUDY, C_SLOW, C_FAST);
    let t = Instant::now();
    let desk = study_sweep(MaterialKind::Linear, 0.0, MeshPreset::Desk, &log_grid(kmin, kmax, 150).map_err(err)?)?;
    let t_desk = t.elapsed().as_secs_f64();
    let (e_desk, n_desk) = lamb_error(&desk)?;
    let t = Instant::now();
    let fine = study_sweep(MaterialKind::Linear, 0.0, MeshPreset::Fine, &log_grid(kmin, kmax, 40).map_err(err)?)?;
    let t_fine = t.elapsed().as_secs_f64();
    let (e_fine, n_fine) = lamb_error(&fine)?;
    Ok(Outcome {
        pass: e_desk < 5e-3 && e_fine < 2e-3,
        detail: format!(
            "desk max {:.2e} over {n_desk} samples (limit 5e-3, {t_desk:.0} s); fine mesh max {:.2e} over {n_fine} samples (limit 2e-3, {t_fine:.0} s)",
            e_desk, e_fine
        ),
    })
}

/// Shared load series for criteria 3–5 and 8.
struct Study {
    fd_grid: Vec<f64>,
    linear: LoadSeries,
    neo: LoadSeries,
    mur: LoadSeries,
    secs: f64,
}

fn run_study() -> Result<Study, String> {
    let t = Instant::now();
    let (kmin, kmax) = k_range_for_fd(0.01 * MHZMM, 4.2 * MHZMM, D_STUDY, C_SLOW, C_FAST);
    let k = log_grid(kmin, kmax, 150).map_err(err)?;
    let fd_grid: Vec<f64> = log_grid(0.02 * MHZMM, 4.0 * MHZMM, 400).map_err(err)?;
    let series = |kind: MaterialKind, sigmas: &[f64]| -> Result<LoadSeries, String> {
        let mut s = LoadSeries::new(Source::Fem, kind.name(), fd_grid.clone()).map_err(err)?;
        for &sig in sigmas {
            s.ingest_set(&study_sweep(kind, sig, MeshPreset::Desk, &k)?, &[S0, A0]).map_err(err)?;
        }
        Ok(s)
    };
    let loads: Vec<f64> = (0..=10).map(|i| i as f64 * 10.0 * MPA).collect();
    Ok(Study {
        linear: series(MaterialKind::Linear, &[0.0, 100.0 * MPA])?,
        neo: series(MaterialKind::NeoHooke, &loads)?,
        mur: series(MaterialKind::Murnaghan, &loads)?,
        fd_grid,
        secs: t.elapsed().as_secs_f64(),
    })
}

fn c3_null_effect(st: &Study) -> Result<Outcome, String> {
    let mut worst = 0.0f64;
    for mode in [S0, A0] {
        let c = delta_cp(&st.linear, 100.0 * MPA, 0.0, mode).map_err(err)?;
        worst = c.delta_cp.iter().fold(worst, |a, v| a.max(v.abs()));
    }
    Ok(Outcome {
        pass: worst < 0.05,
        detail: format!(
            "max |Δcp| {worst:.2e} m/s over {:.2}–{:.1} MHzmm (limit 0.05)",
            st.fd_grid[0] / MHZMM,
            st.fd_grid.last().unwrap() / MHZMM
        ),
    })
}

fn c4_crossings(st: &Study) -> Result<Outcome, String> {
    let mut found = Vec::new();
    for (name, s) in [("neo-hooke", &st.neo), ("murnaghan", &st.mur)] {
        let mut xs = Vec::new();
        for mode in [S0, A0] {
            let c = delta_cp(s, 100.0 * MPA, 0.0, mode).map_err(err)?;
            xs.extend(sign_changes(&c).into_iter().map(|fd| (mode, fd)));
        }
        found.push((name, xs));
    }
    let one_each = found.iter().all(|(_, xs)| xs.len() == 1);
    let different = one_each && found[0].1[0].0 != found[1].1[0].0;
    let mur_ok = one_each && found[1].1[0].0 == A0 && (0.1..=0.3).contains(&(found[1].1[0].1 / MHZMM));
    let text: Vec<String> = found
        .iter()
        .map(|(n, xs)| {
            let list: Vec<String> = xs.iter().map(|(m, fd)| format!("{m}@{:.3}", fd / MHZMM)).collect();
            format!("{n} [{}]", list.join(", "))
        })
        .collect();
    Ok(Outcome {
        pass: one_each && different && mur_ok,
        detail: format!("crossings (MHzmm) {}; murnaghan A0 window [0.1, 0.3]", text.join("; ")),
    })
}

fn c5_linearity(st: &Study) -> Result<Outcome, String> {
    let mut min_r2 = 1.0f64;
    let mut ok_sign = true;
    let mut notes = Vec::new();
    for (fd_mhzmm, same) in [(0.05, true), (3.0, false)] {
        for mode in [S0, A0] {
            let a = regress(&st.neo, fd_mhzmm * MHZMM, mode).map_err(err)?;
            let b = regress(&st.mur, fd_mhzmm * MHZMM, mode).map_err(err)?;
            min_r2 = min_r2.min(a.r2).min(b.r2);
            let agree = a.slope.signum() == b.slope.signum();
            ok_sign &= agree == same;
            notes.push(format!(
                "{mode}@{fd_mhzmm}: {:+.3e}/{:+.3e}",
                a.slope * MPA,
                b.slope * MPA
            ));
        }
    }
    Ok(Outcome {
        pass: min_r2 >= 0.999 && ok_sign,
        detail: format!(
            "min R² {min_r2:.6} (limit 0.999); slopes neo/mur (m/s)/MPa {}; sign structure {}",
            notes.join(", "),
            if ok_sign { "same at 0.05, opposite at 3" } else { "violated" }
        ),
    })
}

fn sig4(v: f64) -> f64 {
    let e = v.abs().log10().floor() as i32 - 3;
    (v / 10f64.powi(e)).round() * 10f64.powi(e)
}

fn c6_window() -> Result<Outcome, String> {
    let cases = [
        (evaluation_window(0.669, 1.33e-3, 0.5e-3).map_err(err)?.nud_min_mm_per_m(), 14.95),
        (evaluation_window(0.669, 0.86e-3, 2e-3).map_err(err)?.nud_max_mm_per_m(), 1163.0),
        (evaluation_window(0.669, 1.33e-3, 2e-3).map_err(err)?.nud_max_mm_per_m(), 751.9),
    ];
    let pass = cases.iter().all(|&(got, want)| (sig4(got) - want).abs() <= 1e-9 * want);
    let text: Vec<String> = cases.iter().map(|(g, w)| format!("{:.4} vs {w}", g)).collect();
    Ok(Outcome {
        pass,
        detail: format!("ν̃d mm/m {}", text.join(", ")),
    })
}

fn c7_roundtrip() -> Result<Outcome, String> {
    let t = Instant::now();
    let d = 0.5e-3;
    let mat = Material::almg3(MaterialKind::NeoHooke, E_STUDY);
    let state = prestress::solve(&mat, 0.0).map_err(err)?;
    let mesh = UnitCellMesh::preset(d / 10.0, d, MeshPreset::Desk).map_err(err)?;
    let set = sweep(&mat, &state, &mesh, &log_grid(0.1, 5000.0, 150).map_err(err)?, &SweepOptions::default())
        .map_err(err)?;
    let modes = [ModeCurve::from_set(&set, S0).map_err(err)?, ModeCurve::from_set(&set, A0).map_err(err)?];
    let t_fem = t.elapsed().as_secs_f64();

    let spec = ExcitationSpec::lab_comb();
    let path = MeasurementPath { l_mes: 0.669, dl: 1.33e-3 };
    let rec = synthesize_wavefield(&modes, &spec, &path, &SynthesisOptions::default()).map_err(err)?;
    let window = evaluation_window(path.l_mes, path.dl, d).map_err(err)?;
    let pairs = extract_dispersion(
        &rec,
        &spec,
        &window,
        &default_nu_grid(&window, DEFAULT_NU_POINTS),
        &ExtractOptions::default(),
    )
    .map_err(err)?;
    drop(rec);
    let r = compare(&pairs, &modes);
    let secs = t.elapsed().as_secs_f64();
    Ok(Outcome {
        pass: r.median_rel_error < 5e-3 && r.max_rel_error < 1e-2 && secs < 120.0,
        detail: format!(
            "{} pairs, median {:.2e} (limit 5e-3), max {:.2e} (limit 1e-2), recovered {}/{} window points, {secs:.0} s incl. {t_fem:.0} s FEM (limit 120 s)",
            r.n_retained,
            r.median_rel_error,
            r.max_rel_error,
            r.n_recovered,
            r.n_expected
        ),
    })
}

fn c8_unity_step(st: &Study) -> Result<Outcome, String> {
    let grid: Vec<f64> = st.fd_grid.iter().copied().filter(|&fd| fd <= 0.3 * MHZMM).collect();
    let curve = unity_load_step(&st.neo, &grid, A0, 10.0 * MPA).map_err(err)?;
    let positive = curve.iter().all(|&(_, v)| v > 0.0);
    let decreasing = curve.windows(2).all(|w| w[1].1 < w[0].1);
    Ok(Outcome {
        pass: positive && decreasing && !curve.is_empty(),
        detail: format!(
            "neo-hooke A0 per 10 MPa: {:.4} m/s at {:.3} MHzmm to {:.4} m/s at {:.3} MHzmm, {} points, positive {positive}, decreasing {decreasing}",
            curve[0].1,
            curve[0].0 / MHZMM,
            curve.last().unwrap().1,
            curve.last().unwrap().0 / MHZMM,
            curve.len()
        ),
    })
}

fn main() {
    let started = Instant::now();
    let mut all = true;
    all &= report("1", "constitutive finite-difference check", c1_constitutive());
    all &= report("6", "evaluation window", c6_window());
    all &= report("2", "zero-stress Lamb equivalence", c2_oracle());
    match run_study() {
        Ok(st) => {
            println!("       load study: 24 desk sweeps in {:.0} s", st.secs);
            all &= report("3", "null effect of the linear model", c3_null_effect(&st));
            all &= report("4", "zero crossings at 100 MPa", c4_crossings(&st));
            all &= report("5", "stress linearity", c5_linearity(&st));
            all &= report("8", "unity load step shape", c8_unity_step(&st));
        }
        Err(e) => {
            for (id, t) in [("3", "null effect"), ("4", "zero crossings"), ("5", "stress linearity"), ("8", "unity load step")] {
                all &= report(id, t, Err(e.clone()));
            }
        }
    }
    all &= report("7", "wavefield round trip", c7_roundtrip());
    println!(
        "acceptance: {} ({:.0} s)",
        if all { "all criteria pass" } else { "FAILURES" },
        started.elapsed().as_secs_f64()
    );
    if !all {
        std::process::exit(1);
    }
}
