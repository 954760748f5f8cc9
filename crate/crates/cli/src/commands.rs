use crate::config::{parse_modes, RunConfig};
use crate::failure::Failure;
use crate::plot::{chart, Series};
use acoustoelastic::analysis::{delta_cp, regress, sign_changes, unity_load_step, unity_rows, LoadSeries, Source};
use acoustoelastic::constitutive::{fdcheck, Material, MaterialKind};
use acoustoelastic::io::{
    dispersion_rows, group_dispersion, read_file, write_file, DeltaRow, DispersionRow, RegressionRow, UnityStepRow,
    HZ_M_PER_MHZMM,
};
use acoustoelastic::lamb::{plate_velocity, LambProblem};
use acoustoelastic::prestress;
use acoustoelastic::unitcell::sweep::k_range_for_fd;
use acoustoelastic::unitcell::{log_grid, sweep, DispersionSet, MeshPreset, ModeLabel, SweepOptions, UnitCellMesh};
use acoustoelastic::wavefield::archive::write_archive;
use acoustoelastic::wavefield::{
    compare, default_nu_grid, evaluation_window, extract_dispersion, label_tracks, pair_rows, synthesize_wavefield,
    MeasurementPath, ModeCurve, SynthesisOptions,
};
use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

pub struct Ctx {
    pub cfg: RunConfig,
    pub out: PathBuf,
    pub jobs: usize,
    pub mesh: Option<MeshPreset>,
}

impl Ctx {
    fn path(&self, name: &str) -> PathBuf {
        self.out.join(name)
    }

    fn write_text(&self, name: &str, text: &str) -> Result<PathBuf, Failure> {
        let p = self.path(name);
        std::fs::write(&p, text).map_err(|e| Failure::Config(format!("cannot write {}: {e}", p.display())))?;
        Ok(p)
    }

    fn unit_cell(&self) -> Result<UnitCellMesh, Failure> {
        let (nx, ny) = self.cfg.mesh_counts(self.mesh);
        Ok(UnitCellMesh::build(self.cfg.dx1(), self.cfg.thickness(), nx, ny)?)
    }

    fn sweep_options(&self) -> Result<SweepOptions, Failure> {
        Ok(SweepOptions {
            n_modes: self.cfg.sweep.n_modes,
            jobs: self.jobs,
            kinematics: self.cfg.kinematics()?,
            ..SweepOptions::default()
        })
    }

    /// Explicit k range, else one covering the configured fd band (default 0.1–3 MHzmm).
    fn k_grid(&self, mat: &Material) -> Result<Vec<f64>, Failure> {
        let s = &self.cfg.sweep;
        let (kmin, kmax) = match (s.k_min, s.k_max) {
            (Some(a), Some(b)) => (a, b),
            (None, None) => {
                let fd_lo = s.fd_min_mhzmm.unwrap_or(0.1) * HZ_M_PER_MHZMM;
                let fd_hi = s.fd_max_mhzmm.unwrap_or(3.0) * HZ_M_PER_MHZMM;
                if !(fd_hi > fd_lo) {
                    return Err(Failure::Config("sweep.fd_max_MHzmm must exceed fd_min_MHzmm".into()));
                }
                let (slow, fast) = velocity_bounds(mat, self.cfg.thickness())?;
                k_range_for_fd(fd_lo, fd_hi * 1.05, self.cfg.thickness(), slow, fast)
            }
            _ => return Err(Failure::Config("sweep.k_min and sweep.k_max go together".into())),
        };
        log_grid(kmin, kmax, self.cfg.sweep.n_k).map_err(|e| Failure::Config(e.to_string()))
    }

    fn solve(&self, kind: MaterialKind, sigma: f64, k: &[f64]) -> Result<DispersionSet, Failure> {
        let mat = self.cfg.material(kind)?;
        let state = prestress::solve(&mat, sigma)?;
        Ok(sweep(&mat, &state, &self.unit_cell()?, k, &self.sweep_options()?)?)
    }
}

/// Slow bound below the Rayleigh speed, fast bound above the plate speed.
fn velocity_bounds(mat: &Material, d: f64) -> Result<(f64, f64), Failure> {
    let lamb = LambProblem::from_material(mat, d)?;
    Ok((0.8 * lamb.rayleigh_velocity(), 1.05 * plate_velocity(mat)))
}

fn sigma_tag(sigma_mpa: f64) -> String {
    format!("{sigma_mpa}MPa")
}

fn file_tag(s: &str) -> String {
    s.chars().map(|c| if c.is_ascii_alphanumeric() || c == '-' { c } else { '_' }).collect()
}

fn mhzmm(fd: f64) -> f64 {
    fd / HZ_M_PER_MHZMM
}

fn dispersion_chart(title: &str, set: &DispersionSet) -> String {
    let series: Vec<Series> = set
        .branches
        .iter()
        .map(|b| {
            Series::line(
                b.label.to_string(),
                b.samples.iter().map(|s| (mhzmm(s.f * set.thickness), s.cp)).collect(),
            )
        })
        .collect();
    chart(title, "fd (MHz·mm)", "cp (m/s)", &series)
}

pub fn dispersion(ctx: &Ctx) -> Result<(), Failure> {
    let sigmas = &ctx.cfg.loads.sigma_mpa;
    if sigmas.is_empty() {
        return Err(Failure::Config("loads.sigma_MPa is empty".into()));
    }
    for kind in ctx.cfg.models()? {
        let k = ctx.k_grid(&ctx.cfg.material(kind)?)?;
        for &s in sigmas {
            let set = ctx.solve(kind, s * 1e6, &k)?;
            let stem = format!("dispersion_{}_{}", kind.name(), sigma_tag(s));
            let csv = ctx.path(&format!("{stem}.csv"));
            write_file(&csv, &dispersion_rows(&set))?;
            ctx.write_text(&format!("{stem}.svg"), &dispersion_chart(&format!("{kind}, σ = {s} MPa"), &set))?;
            let labels: Vec<String> = set.branches.iter().map(|b| b.label.to_string()).collect();
            println!("{}: {} branches [{}]", csv.display(), set.branches.len(), labels.join(" "));
        }
    }
    Ok(())
}

pub fn reference(ctx: &Ctx) -> Result<(), Failure> {
    let mat = ctx.cfg.material(ctx.cfg.models()?[0])?;
    let d = ctx.cfg.thickness();
    let lamb = LambProblem::from_material(&mat, d)?;
    let s = &ctx.cfg.sweep;
    let lo = s.fd_min_mhzmm.unwrap_or(0.1) * HZ_M_PER_MHZMM;
    let hi = s.fd_max_mhzmm.unwrap_or(3.0) * HZ_M_PER_MHZMM;
    let fd = log_grid(lo, hi, s.n_k).map_err(|e| Failure::Config(e.to_string()))?;
    let mut rows = Vec::new();
    let mut series = Vec::new();
    for mode in [ModeLabel::S0, ModeLabel::A0] {
        let b = lamb.branch(mode, &fd)?;
        series.push(Series::line(mode.to_string(), b.iter().map(|p| (mhzmm(p.f * d), p.cp)).collect()));
        rows.extend(b.iter().map(|p| DispersionRow {
            model: "lamb".into(),
            sigma_mpa: 0.0,
            mode: mode.to_string(),
            k_rad_per_m: p.k,
            f_hz: p.f,
            cp_m_per_s: p.cp,
            fd_mhzmm: mhzmm(p.f * d),
        }));
    }
    let csv = ctx.path("reference.csv");
    write_file(&csv, &rows)?;
    ctx.write_text("reference.svg", &chart("Rayleigh-Lamb S0/A0", "fd (MHz·mm)", "cp (m/s)", &series))?;
    println!("{}: {} rows", csv.display(), rows.len());
    Ok(())
}

pub fn roundtrip(ctx: &Ctx) -> Result<(), Failure> {
    let wf = ctx
        .cfg
        .wavefield
        .as_ref()
        .ok_or_else(|| Failure::Config("roundtrip needs a [wavefield] section".into()))?;
    let kind = match &wf.model {
        Some(m) => m.parse().map_err(|e: acoustoelastic::Error| Failure::Config(e.to_string()))?,
        None => ctx.cfg.models()?[0],
    };
    let labels = parse_modes(&wf.modes)?;
    let spec = wf.excitation.spec();
    let d = ctx.cfg.thickness();
    let mat = ctx.cfg.material(kind)?;

    // k range covering the excited band for the slowest requested mode
    let k = if ctx.cfg.sweep.k_min.is_some() {
        ctx.k_grid(&mat)?
    } else {
        let freqs = spec.frequencies();
        let (f_lo, f_hi) = (freqs[0], *freqs.last().unwrap());
        let lamb = LambProblem::from_material(&mat, d)?;
        let slow = lamb.cp(f_hi * d, ModeLabel::A0)?;
        let kmin = 2.0 * PI * f_lo / (1.05 * plate_velocity(&mat));
        let kmax = 1.2 * 2.0 * PI * f_hi / slow;
        log_grid(kmin, kmax, ctx.cfg.sweep.n_k).map_err(|e| Failure::Config(e.to_string()))?
    };
    let set = ctx.solve(kind, wf.sigma_mpa * 1e6, &k)?;
    let modes = labels
        .iter()
        .map(|&l| ModeCurve::from_set(&set, l))
        .collect::<acoustoelastic::Result<Vec<_>>>()?;

    let path = MeasurementPath {
        l_mes: wf.l_mes_mm * 1e-3,
        dl: wf.dl_mm * 1e-3,
    };
    let opts = SynthesisOptions {
        sample_rate: wf.sample_rate_hz,
        seed: wf.seed,
        noise_std: wf.noise_std,
        amplitude: 1.0,
        jobs: ctx.jobs,
    };
    let rec = synthesize_wavefield(&modes, &spec, &path, &opts)?;
    if wf.archive {
        write_archive(&ctx.path("wavefield"), &rec, &spec, &path, d)?;
    }
    let window = evaluation_window(path.l_mes, path.dl, d).map_err(|e| Failure::Config(e.to_string()))?;
    let grid = default_nu_grid(&window, wf.extraction.nu_points);
    let pairs = extract_dispersion(&rec, &spec, &window, &grid, &wf.extraction.options(ctx.jobs))?;
    drop(rec);

    let report = compare(&pairs, &modes);
    let track_labels = label_tracks(&pairs, &modes);
    write_file(&ctx.path("pairs.csv"), &pair_rows(&pairs, &track_labels))?;

    let tag = format!("{}-extracted", kind.name());
    let extracted: Vec<DispersionRow> = pairs
        .retained()
        .filter_map(|p| {
            let label = track_labels.get(&p.track?)?;
            Some(DispersionRow {
                model: tag.clone(),
                sigma_mpa: wf.sigma_mpa,
                mode: label.to_string(),
                k_rad_per_m: 2.0 * PI * p.nu,
                f_hz: p.f,
                cp_m_per_s: p.cp(),
                fd_mhzmm: mhzmm(p.f * d),
            })
        })
        .collect();
    write_file(&ctx.path(&format!("dispersion_{tag}_{}.csv", sigma_tag(wf.sigma_mpa))), &extracted)?;

    let mut series: Vec<Series> = modes
        .iter()
        .map(|m| {
            let pts = pairs
                .frequencies
                .iter()
                .filter_map(|&f| m.nu(f).filter(|&nu| window.contains(f, nu)).map(|nu| (mhzmm(f * d), f / nu)))
                .collect();
            Series::line(format!("{} input", m.label), pts)
        })
        .collect();
    series.push(Series::dots(
        "extracted",
        pairs.retained().map(|p| (mhzmm(p.f * d), p.cp())).collect(),
    ));
    ctx.write_text(
        "roundtrip.svg",
        &chart(&format!("{kind}, σ = {} MPa: synthesized vs extracted", wf.sigma_mpa), "fd (MHz·mm)", "cp (m/s)", &series),
    )?;

    let mut text = String::new();
    let _ = writeln!(text, "model = {kind}");
    let _ = writeln!(text, "sigma_MPa = {}", wf.sigma_mpa);
    let _ = writeln!(
        text,
        "window_nud_mm_per_m = [{:.4}, {:.4}]",
        window.nud_min_mm_per_m(),
        window.nud_max_mm_per_m()
    );
    let _ = writeln!(text, "frequencies = {}", pairs.frequencies.len());
    let _ = writeln!(text, "retained_pairs = {}", report.n_retained);
    let _ = writeln!(text, "median_rel_error = {:.6e}", report.median_rel_error);
    let _ = writeln!(text, "max_rel_error = {:.6e}", report.max_rel_error);
    let _ = writeln!(text, "recovered = {} / {}", report.n_recovered, report.n_expected);
    for m in &report.modes {
        let _ = writeln!(
            text,
            "{}: pairs {}, recovered {} / {}, median {:.3e}, max {:.3e}",
            m.label, m.n_pairs, m.n_recovered, m.n_expected, m.median_rel_error, m.max_rel_error
        );
    }
    ctx.write_text("roundtrip_report.txt", &text)?;
    print!("{text}");
    Ok(())
}

pub fn analyze(ctx: &Ctx) -> Result<(), Failure> {
    let a = ctx
        .cfg
        .analysis
        .as_ref()
        .ok_or_else(|| Failure::Config("analyze needs an [analysis] section".into()))?;
    let modes = parse_modes(&a.modes)?;
    let mut rows = Vec::new();
    for p in &a.inputs {
        let p = ctx.cfg.resolve(p);
        rows.extend(read_file::<DispersionRow>(&p)?);
    }
    let groups = group_dispersion(&rows)?;
    let n = a.n_fd;
    let (lo, hi) = (a.fd_min_mhzmm * HZ_M_PER_MHZMM, a.fd_max_mhzmm * HZ_M_PER_MHZMM);
    let grid: Vec<f64> = (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect();

    let mut models: Vec<&str> = Vec::new();
    for g in &groups {
        if !models.contains(&g.model.as_str()) {
            models.push(&g.model);
        }
    }
    for model in models {
        let source = if model.ends_with("extracted") { Source::Extracted } else { Source::Fem };
        let mut series = LoadSeries::new(source, model, grid.clone())?;
        for g in groups.iter().filter(|g| g.model == model) {
            series.ingest_group(g, &modes)?;
        }
        let sigmas = series.sigmas();
        let ls = a.sigma_ls_mpa.map_or(sigmas[0], |v| v * 1e6);
        let hs = a.sigma_hs_mpa.map_or(*sigmas.last().unwrap(), |v| v * 1e6);
        if ls == hs {
            return Err(Failure::Config(format!(
                "{model}: Δcp needs two load levels, only σ = {} MPa is available",
                ls / 1e6
            )));
        }
        let tag = file_tag(model);

        let mut delta_rows: Vec<DeltaRow> = Vec::new();
        let mut delta_series = Vec::new();
        for &m in &modes {
            let c = delta_cp(&series, hs, ls, m)?;
            let xs: Vec<String> = sign_changes(&c).iter().map(|fd| format!("{:.4}", mhzmm(*fd))).collect();
            println!(
                "{model} {m}: Δcp({} − {} MPa) sign changes at [{}] MHz·mm",
                hs / 1e6,
                ls / 1e6,
                xs.join(", ")
            );
            delta_series.push(Series::line(m.to_string(), c.fd.iter().zip(&c.delta_cp).map(|(f, v)| (mhzmm(*f), *v)).collect()));
            delta_rows.extend(c.rows());
        }
        write_file(&ctx.path(&format!("delta_{tag}.csv")), &delta_rows)?;
        ctx.write_text(
            &format!("delta_{tag}.svg"),
            &chart(
                &format!("{model}: Δcp = cp({} MPa) − cp({} MPa)", hs / 1e6, ls / 1e6),
                "fd (MHz·mm)",
                "Δcp (m/s)",
                &delta_series,
            ),
        )?;

        if sigmas.len() < 3 {
            eprintln!("{model}: {} load levels, regression and unity step need ≥ 3; skipped", sigmas.len());
            continue;
        }
        let mut reg_rows: Vec<RegressionRow> = Vec::new();
        let mut cp_series = Vec::new();
        for &fd in &a.probe_fd_mhzmm {
            for &m in &modes {
                let r = regress(&series, fd * HZ_M_PER_MHZMM, m)?;
                reg_rows.push(r.row());
                let pts = sigmas
                    .iter()
                    .map(|&s| {
                        let y = series.cp(s, m).map(|v| interp_at(&grid, v, fd * HZ_M_PER_MHZMM));
                        y.map(|y| (s / 1e6, y))
                    })
                    .collect::<acoustoelastic::Result<Vec<_>>>()?;
                cp_series.push(Series::dots(format!("{m} @ {fd} MHz·mm"), pts.clone()));
                let fit = [sigmas[0], *sigmas.last().unwrap()].map(|s| (s / 1e6, r.intercept + r.slope * s));
                cp_series.push(Series::line(format!("{m} fit, R² {:.5}", r.r2), fit.to_vec()));
            }
        }
        if !reg_rows.is_empty() {
            write_file(&ctx.path(&format!("regression_{tag}.csv")), &reg_rows)?;
            ctx.write_text(
                &format!("cp_sigma_{tag}.svg"),
                &chart(&format!("{model}: cp against load"), "σ (MPa)", "cp (m/s)", &cp_series),
            )?;
        }
        let step = a.unity_step_mpa * 1e6;
        let mut unity: Vec<UnityStepRow> = Vec::new();
        let mut unity_series = Vec::new();
        for &m in &modes {
            let curve = unity_load_step(&series, &grid, m, step)?;
            unity_series.push(Series::line(m.to_string(), curve.iter().map(|&(f, v)| (mhzmm(f), v)).collect()));
            unity.extend(unity_rows(m, step, &curve));
        }
        write_file(&ctx.path(&format!("unity_{tag}.csv")), &unity)?;
        ctx.write_text(
            &format!("unity_{tag}.svg"),
            &chart(
                &format!("{model}: mean Δcp per {} MPa", a.unity_step_mpa),
                "fd (MHz·mm)",
                "Δcp (m/s)",
                &unity_series,
            ),
        )?;
        println!("{model}: {} load levels analysed into {}", sigmas.len(), ctx.out.display());
    }
    Ok(())
}

/// Linear interpolation of grid values; the probe lies inside the grid.
fn interp_at(x: &[f64], y: &[f64], t: f64) -> f64 {
    let i = x.partition_point(|&v| v <= t).clamp(1, x.len() - 1);
    let (x0, x1) = (x[i - 1], x[i]);
    y[i - 1] + (y[i] - y[i - 1]) * (t - x0) / (x1 - x0)
}

pub fn material_check(cfg: Option<&RunConfig>) -> Result<(), Failure> {
    let mut failed = false;
    println!("{:<10} {:>14} {:>14}  result", "model", "stress err", "tangent err");
    for kind in MaterialKind::ALL {
        let mat = match cfg {
            Some(c) if kind != MaterialKind::Murnaghan || c.material.ell_gpa.is_some() => c.material(kind)?,
            _ => Material::almg3(kind, acoustoelastic::constitutive::almg3::E_05MM),
        };
        let r = fdcheck::verify(&mat, 100, 1)?;
        let ok = r.stress_rel_err < 1e-6 && r.tangent_rel_err < 1e-5;
        failed |= !ok;
        println!(
            "{:<10} {:>14.3e} {:>14.3e}  {}",
            kind.name(),
            r.stress_rel_err,
            r.tangent_rel_err,
            if ok { "PASS" } else { "FAIL" }
        );
    }
    if failed {
        Err(Failure::Solver("finite-difference check failed".into()))
    } else {
        Ok(())
    }
}

pub fn ensure_dir(p: &Path) -> Result<(), Failure> {
    std::fs::create_dir_all(p).map_err(|e| Failure::Config(format!("cannot create {}: {e}", p.display())))
}
