//! Run configuration (TOML). Unknown keys are rejected.

use crate::failure::Failure;
use acoustoelastic::constitutive::{Material, MaterialKind};
use acoustoelastic::unitcell::{Kinematics, MeshPreset, ModeLabel};
use acoustoelastic::wavefield::{ExcitationSpec, ExtractOptions, Window, DEFAULT_NU_POINTS};
use serde::Deserialize;
use std::path::{Path, PathBuf};

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub material: MaterialSection,
    pub geometry: GeometrySection,
    #[serde(default)]
    pub sweep: SweepSection,
    #[serde(default)]
    pub loads: LoadsSection,
    pub wavefield: Option<WavefieldSection>,
    pub analysis: Option<AnalysisSection>,
    #[serde(default)]
    pub output: OutputSection,
    /// Directory of the config file; relative input paths resolve against it.
    #[serde(skip)]
    pub base: PathBuf,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
pub enum OneOrMany {
    One(String),
    Many(Vec<String>),
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MaterialSection {
    /// "linear", "neo-hooke", "murnaghan", or a list of them.
    pub model: OneOrMany,
    #[serde(rename = "E_GPa")]
    pub e_gpa: f64,
    pub nu: f64,
    /// kg/m³
    pub rho: f64,
    #[serde(rename = "ell_GPa")]
    pub ell_gpa: Option<f64>,
    #[serde(rename = "m_GPa")]
    pub m_gpa: Option<f64>,
    #[serde(rename = "n_GPa")]
    pub n_gpa: Option<f64>,
    /// "finite" or "small"; default depends on the model.
    pub kinematics: Option<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometrySection {
    pub d_mm: f64,
    /// Cell length; defaults to d/10.
    pub dx1_mm: Option<f64>,
    pub nx: Option<usize>,
    pub ny: Option<usize>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    /// rad/m
    pub k_min: Option<f64>,
    pub k_max: Option<f64>,
    /// Alternative to the k range: fd band to cover.
    #[serde(rename = "fd_min_MHzmm")]
    pub fd_min_mhzmm: Option<f64>,
    #[serde(rename = "fd_max_MHzmm")]
    pub fd_max_mhzmm: Option<f64>,
    #[serde(default = "default_n_k")]
    pub n_k: usize,
    #[serde(default = "default_n_modes")]
    pub n_modes: usize,
}

impl Default for SweepSection {
    fn default() -> Self {
        SweepSection {
            k_min: None,
            k_max: None,
            fd_min_mhzmm: None,
            fd_max_mhzmm: None,
            n_k: default_n_k(),
            n_modes: default_n_modes(),
        }
    }
}

fn default_n_k() -> usize {
    150
}

fn default_n_modes() -> usize {
    8
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LoadsSection {
    #[serde(rename = "sigma_MPa", default)]
    pub sigma_mpa: Vec<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WavefieldSection {
    pub l_mes_mm: f64,
    pub dl_mm: f64,
    /// Load of the dispersion that drives the synthesis.
    #[serde(rename = "sigma_MPa", default)]
    pub sigma_mpa: f64,
    /// Model for the synthesis; defaults to the first configured model.
    pub model: Option<String>,
    #[serde(default = "default_modes")]
    pub modes: Vec<String>,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default)]
    pub noise_std: f64,
    #[serde(rename = "sample_rate_Hz", default = "default_fs")]
    pub sample_rate_hz: f64,
    /// Also write the raw field (`wavefield.bin` + `wavefield.toml`).
    #[serde(default)]
    pub archive: bool,
    #[serde(default)]
    pub excitation: ExcitationSection,
    #[serde(default)]
    pub extraction: ExtractionSection,
}

fn default_modes() -> Vec<String> {
    vec!["S0".into(), "A0".into()]
}

fn default_seed() -> u64 {
    1
}

fn default_fs() -> f64 {
    2.5e6
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExcitationSection {
    #[serde(rename = "f_start_Hz")]
    pub f_start_hz: f64,
    #[serde(rename = "f_step_Hz")]
    pub f_step_hz: f64,
    #[serde(rename = "f_max_Hz")]
    pub f_max_hz: f64,
    pub n_shifts: usize,
    #[serde(rename = "shift_Hz")]
    pub shift_hz: f64,
    pub duration_ms: f64,
    pub window: Window,
}

impl Default for ExcitationSection {
    fn default() -> Self {
        let p = ExcitationSpec::lab_comb();
        ExcitationSection {
            f_start_hz: p.f_start,
            f_step_hz: p.f_step,
            f_max_hz: p.f_max,
            n_shifts: p.n_shifts,
            shift_hz: p.shift,
            duration_ms: p.duration * 1e3,
            window: p.window,
        }
    }
}

impl ExcitationSection {
    pub fn spec(&self) -> ExcitationSpec {
        ExcitationSpec {
            f_start: self.f_start_hz,
            f_step: self.f_step_hz,
            f_max: self.f_max_hz,
            n_shifts: self.n_shifts,
            shift: self.shift_hz,
            duration: self.duration_ms * 1e-3,
            window: self.window,
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExtractionSection {
    pub nu_points: usize,
    pub peak_floor: f64,
    pub noise_floor: f64,
    pub median_window: usize,
    pub mad_factor: f64,
    pub min_track: usize,
}

impl Default for ExtractionSection {
    fn default() -> Self {
        let o = ExtractOptions::default();
        ExtractionSection {
            nu_points: DEFAULT_NU_POINTS,
            peak_floor: o.peak_floor,
            noise_floor: o.noise_floor,
            median_window: o.median_window,
            mad_factor: o.mad_factor,
            min_track: o.min_track,
        }
    }
}

impl ExtractionSection {
    pub fn options(&self, jobs: usize) -> ExtractOptions {
        ExtractOptions {
            peak_floor: self.peak_floor,
            noise_floor: self.noise_floor,
            median_window: self.median_window,
            mad_factor: self.mad_factor,
            min_track: self.min_track,
            jobs,
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalysisSection {
    /// Dispersion CSVs; relative paths resolve against the config directory.
    pub inputs: Vec<PathBuf>,
    #[serde(rename = "sigma_ls_MPa")]
    pub sigma_ls_mpa: Option<f64>,
    #[serde(rename = "sigma_hs_MPa")]
    pub sigma_hs_mpa: Option<f64>,
    #[serde(default = "default_modes")]
    pub modes: Vec<String>,
    #[serde(rename = "fd_min_MHzmm")]
    pub fd_min_mhzmm: f64,
    #[serde(rename = "fd_max_MHzmm")]
    pub fd_max_mhzmm: f64,
    #[serde(default = "default_n_fd")]
    pub n_fd: usize,
    #[serde(rename = "probe_fd_MHzmm", default)]
    pub probe_fd_mhzmm: Vec<f64>,
    #[serde(rename = "unity_step_MPa", default = "default_step")]
    pub unity_step_mpa: f64,
}

fn default_n_fd() -> usize {
    400
}

fn default_step() -> f64 {
    10.0
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    #[serde(default = "default_out")]
    pub dir: PathBuf,
}

impl Default for OutputSection {
    fn default() -> Self {
        OutputSection { dir: default_out() }
    }
}

fn default_out() -> PathBuf {
    PathBuf::from("out")
}

fn positive(name: &str, v: f64) -> Result<(), Failure> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Failure::Config(format!("{name} must be positive, got {v}")))
    }
}

pub fn parse_modes(list: &[String]) -> Result<Vec<ModeLabel>, Failure> {
    if list.is_empty() {
        return Err(Failure::Config("mode list is empty".into()));
    }
    list.iter()
        .map(|s| match s.parse::<ModeLabel>() {
            Ok(ModeLabel::Unclassified) | Err(_) => Err(Failure::Config(format!("bad mode '{s}'"))),
            Ok(m) => Ok(m),
        })
        .collect()
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, Failure> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Failure::Config(format!("cannot read {}: {e}", path.display())))?;
        let mut cfg: RunConfig =
            toml::from_str(&text).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))?;
        cfg.base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<(), Failure> {
        let m = &self.material;
        positive("material.E_GPa", m.e_gpa)?;
        positive("material.rho", m.rho)?;
        if !(m.nu > -1.0 && m.nu < 0.5) {
            return Err(Failure::Config(format!("material.nu must lie in (−1, 0.5), got {}", m.nu)));
        }
        let kinds = self.models()?;
        if kinds.contains(&MaterialKind::Murnaghan) && (m.ell_gpa.is_none() || m.m_gpa.is_none() || m.n_gpa.is_none()) {
            return Err(Failure::Config("murnaghan needs ell_GPa, m_GPa and n_GPa".into()));
        }
        self.kinematics()?;
        let g = &self.geometry;
        positive("geometry.d_mm", g.d_mm)?;
        if let Some(dx) = g.dx1_mm {
            positive("geometry.dx1_mm", dx)?;
        }
        if g.nx == Some(0) || g.ny.is_some_and(|n| n < 2) {
            return Err(Failure::Config("geometry needs nx ≥ 1 and ny ≥ 2".into()));
        }
        if g.nx.is_some() != g.ny.is_some() {
            return Err(Failure::Config("geometry.nx and geometry.ny go together".into()));
        }
        let s = &self.sweep;
        if s.n_k < 2 || s.n_modes < 2 {
            return Err(Failure::Config("sweep needs n_k ≥ 2 and n_modes ≥ 2".into()));
        }
        for (name, v) in [
            ("sweep.k_min", s.k_min),
            ("sweep.k_max", s.k_max),
            ("sweep.fd_min_MHzmm", s.fd_min_mhzmm),
            ("sweep.fd_max_MHzmm", s.fd_max_mhzmm),
        ] {
            if let Some(v) = v {
                positive(name, v)?;
            }
        }
        if self.loads.sigma_mpa.iter().any(|v| !v.is_finite()) {
            return Err(Failure::Config("loads.sigma_MPa must be finite".into()));
        }
        if let Some(w) = &self.wavefield {
            positive("wavefield.l_mes_mm", w.l_mes_mm)?;
            positive("wavefield.dl_mm", w.dl_mm)?;
            positive("wavefield.sample_rate_Hz", w.sample_rate_hz)?;
            if !(w.noise_std >= 0.0) {
                return Err(Failure::Config("wavefield.noise_std must be ≥ 0".into()));
            }
            if !(w.l_mes_mm > 20.0 * w.dl_mm) {
                return Err(Failure::Config(format!(
                    "wavefield.l_mes_mm = {} must exceed 20 · dl_mm = {}",
                    w.l_mes_mm,
                    20.0 * w.dl_mm
                )));
            }
            parse_modes(&w.modes)?;
            if let Some(model) = &w.model {
                model.parse::<MaterialKind>().map_err(|e| Failure::Config(e.to_string()))?;
            }
            w.excitation.spec().validate().map_err(|e| Failure::Config(format!("wavefield.excitation: {e}")))?;
            let x = &w.extraction;
            if x.nu_points < 3 || x.median_window < 3 || x.median_window % 2 == 0 {
                return Err(Failure::Config("extraction needs nu_points ≥ 3 and an odd median_window ≥ 3".into()));
            }
        }
        if let Some(a) = &self.analysis {
            positive("analysis.fd_min_MHzmm", a.fd_min_mhzmm)?;
            if !(a.fd_max_mhzmm > a.fd_min_mhzmm) {
                return Err(Failure::Config("analysis.fd_max_MHzmm must exceed fd_min_MHzmm".into()));
            }
            if a.n_fd < 2 {
                return Err(Failure::Config("analysis.n_fd must be ≥ 2".into()));
            }
            if a.inputs.is_empty() {
                return Err(Failure::Config("analysis.inputs is empty".into()));
            }
            parse_modes(&a.modes)?;
            if !a.unity_step_mpa.is_finite() {
                return Err(Failure::Config("analysis.unity_step_MPa must be finite".into()));
            }
        }
        Ok(())
    }

    pub fn models(&self) -> Result<Vec<MaterialKind>, Failure> {
        let names: Vec<&String> = match &self.material.model {
            OneOrMany::One(s) => vec![s],
            OneOrMany::Many(v) => v.iter().collect(),
        };
        if names.is_empty() {
            return Err(Failure::Config("material.model is empty".into()));
        }
        let mut out: Vec<MaterialKind> = Vec::new();
        for n in names {
            let k: MaterialKind = n.parse().map_err(|e: acoustoelastic::Error| Failure::Config(e.to_string()))?;
            if !out.contains(&k) {
                out.push(k);
            }
        }
        Ok(out)
    }

    pub fn material(&self, kind: MaterialKind) -> Result<Material, Failure> {
        let m = &self.material;
        let third = (
            m.ell_gpa.unwrap_or(0.0) * 1e9,
            m.m_gpa.unwrap_or(0.0) * 1e9,
            m.n_gpa.unwrap_or(0.0) * 1e9,
        );
        Material::from_engineering(kind, m.e_gpa * 1e9, m.nu, m.rho, third).map_err(|e| Failure::Config(e.to_string()))
    }

    pub fn kinematics(&self) -> Result<Option<Kinematics>, Failure> {
        match self.material.kinematics.as_deref() {
            None => Ok(None),
            Some("finite") => Ok(Some(Kinematics::Finite)),
            Some("small") => Ok(Some(Kinematics::Small)),
            Some(other) => Err(Failure::Config(format!("material.kinematics must be 'finite' or 'small', got '{other}'"))),
        }
    }

    /// Thickness in m.
    pub fn thickness(&self) -> f64 {
        self.geometry.d_mm * 1e-3
    }

    pub fn dx1(&self) -> f64 {
        self.geometry.dx1_mm.map_or(self.thickness() / 10.0, |v| v * 1e-3)
    }

    /// Element counts: an explicit `--mesh` wins, then the config, then the desk preset.
    pub fn mesh_counts(&self, flag: Option<MeshPreset>) -> (usize, usize) {
        match (flag, self.geometry.nx, self.geometry.ny) {
            (Some(p), _, _) => p.counts(),
            (None, Some(nx), Some(ny)) => (nx, ny),
            _ => MeshPreset::Desk.counts(),
        }
    }

    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base.join(p)
        }
    }
}
