//! CSV schemas for dispersion samples, extracted pairs and analysis results.
//!
//! Every writer emits the header even for an empty table, and every reader
//! checks the header verbatim before deserializing rows.

use crate::error::{Error, Result};
use crate::unitcell::{DispersionSet, ModeLabel};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

/// Hz·m per MHz·mm.
pub const HZ_M_PER_MHZMM: f64 = 1e3;

pub trait Schema: Serialize + DeserializeOwned {
    const HEADER: &'static [&'static str];
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DispersionRow {
    pub model: String,
    #[serde(rename = "sigma_MPa")]
    pub sigma_mpa: f64,
    pub mode: String,
    pub k_rad_per_m: f64,
    #[serde(rename = "f_Hz")]
    pub f_hz: f64,
    pub cp_m_per_s: f64,
    #[serde(rename = "fd_MHzmm")]
    pub fd_mhzmm: f64,
}

impl Schema for DispersionRow {
    const HEADER: &'static [&'static str] =
        &["model", "sigma_MPa", "mode", "k_rad_per_m", "f_Hz", "cp_m_per_s", "fd_MHzmm"];
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairRow {
    #[serde(rename = "f_Hz")]
    pub f_hz: f64,
    pub nu_per_m: f64,
    pub cp_m_per_s: f64,
    #[serde(rename = "fd_MHzmm")]
    pub fd_mhzmm: f64,
    pub mode: String,
    pub flag: String,
}

impl Schema for PairRow {
    const HEADER: &'static [&'static str] = &["f_Hz", "nu_per_m", "cp_m_per_s", "fd_MHzmm", "mode", "flag"];
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeltaRow {
    pub mode: String,
    #[serde(rename = "fd_MHzmm")]
    pub fd_mhzmm: f64,
    #[serde(rename = "sigma_ls_MPa")]
    pub sigma_ls_mpa: f64,
    #[serde(rename = "sigma_hs_MPa")]
    pub sigma_hs_mpa: f64,
    pub delta_cp_m_per_s: f64,
}

impl Schema for DeltaRow {
    const HEADER: &'static [&'static str] =
        &["mode", "fd_MHzmm", "sigma_ls_MPa", "sigma_hs_MPa", "delta_cp_m_per_s"];
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegressionRow {
    pub mode: String,
    #[serde(rename = "fd_MHzmm")]
    pub fd_mhzmm: f64,
    #[serde(rename = "slope_m_per_s_per_MPa")]
    pub slope_m_per_s_per_mpa: f64,
    pub intercept_m_per_s: f64,
    pub r2: f64,
}

impl Schema for RegressionRow {
    const HEADER: &'static [&'static str] =
        &["mode", "fd_MHzmm", "slope_m_per_s_per_MPa", "intercept_m_per_s", "r2"];
}

/// Regression-derived phase-velocity change per load step.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UnityStepRow {
    pub mode: String,
    #[serde(rename = "fd_MHzmm")]
    pub fd_mhzmm: f64,
    #[serde(rename = "step_MPa")]
    pub step_mpa: f64,
    pub delta_cp_m_per_s: f64,
}

impl Schema for UnityStepRow {
    const HEADER: &'static [&'static str] = &["mode", "fd_MHzmm", "step_MPa", "delta_cp_m_per_s"];
}

pub fn write_rows<T: Schema, W: Write>(w: W, rows: &[T]) -> Result<()> {
    let mut wr = csv::WriterBuilder::new().has_headers(false).from_writer(w);
    wr.write_record(T::HEADER)?;
    for r in rows {
        wr.serialize(r)?;
    }
    wr.flush()?;
    Ok(())
}

pub fn read_rows<T: Schema, R: Read>(r: R) -> Result<Vec<T>> {
    let mut rd = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(r);
    let headers = rd.headers().map_err(|e| Error::Schema(format!("unreadable header: {e}")))?.clone();
    let got: Vec<&str> = headers.iter().collect();
    if got != T::HEADER {
        let col = got
            .iter()
            .zip(T::HEADER)
            .position(|(a, b)| a != b)
            .unwrap_or(got.len().min(T::HEADER.len()));
        return Err(Error::Schema(format!(
            "header mismatch at column {}: expected `{}`, found `{}`",
            col + 1,
            T::HEADER.join(","),
            got.join(",")
        )));
    }
    let mut out = Vec::new();
    for rec in rd.deserialize() {
        let row: T = rec.map_err(|e| {
            let at = e.position().map(|p| format!("line {}", p.line())).unwrap_or_else(|| "unknown line".into());
            Error::Schema(format!("{at}: {e}"))
        })?;
        out.push(row);
    }
    Ok(out)
}

pub fn write_file<T: Schema>(path: &Path, rows: &[T]) -> Result<()> {
    write_rows(File::create(path)?, rows)
}

pub fn read_file<T: Schema>(path: &Path) -> Result<Vec<T>> {
    let f = File::open(path)?;
    read_rows(f).map_err(|e| match e {
        Error::Schema(m) => Error::Schema(format!("{}: {m}", path.display())),
        other => other,
    })
}

/// One row per sample of every branch.
pub fn dispersion_rows(set: &DispersionSet) -> Vec<DispersionRow> {
    let model = set.material.kind.name();
    let mut rows = Vec::new();
    for b in &set.branches {
        for s in &b.samples {
            rows.push(DispersionRow {
                model: model.to_string(),
                sigma_mpa: set.sigma / 1e6,
                mode: b.label.to_string(),
                k_rad_per_m: s.k,
                f_hz: s.f,
                cp_m_per_s: s.cp,
                fd_mhzmm: s.f * set.thickness / HZ_M_PER_MHZMM,
            });
        }
    }
    rows
}

/// Dispersion rows of one model at one load, branch samples in fd (Hz·m).
#[derive(Clone, Debug, PartialEq)]
pub struct DispersionGroup {
    pub model: String,
    /// Pa
    pub sigma: f64,
    pub branches: BTreeMap<ModeLabel, Vec<(f64, f64)>>,
}

/// Group rows by (model, σ) in first-appearance order of models and
/// ascending σ; unclassified rows are dropped.
pub fn group_dispersion(rows: &[DispersionRow]) -> Result<Vec<DispersionGroup>> {
    let mut order: Vec<String> = Vec::new();
    let mut groups: BTreeMap<(usize, i64), DispersionGroup> = BTreeMap::new();
    for (i, r) in rows.iter().enumerate() {
        let label: ModeLabel = r
            .mode
            .parse()
            .map_err(|_| Error::Schema(format!("row {}: bad mode label '{}'", i + 2, r.mode)))?;
        if !r.sigma_mpa.is_finite() || !r.fd_mhzmm.is_finite() || !r.cp_m_per_s.is_finite() {
            return Err(Error::Schema(format!("row {}: non-finite value", i + 2)));
        }
        if label == ModeLabel::Unclassified {
            continue;
        }
        let m = match order.iter().position(|m| *m == r.model) {
            Some(m) => m,
            None => {
                order.push(r.model.clone());
                order.len() - 1
            }
        };
        // σ keyed at 1 mPa resolution
        let key = (r.sigma_mpa * 1e9).round() as i64;
        let g = groups.entry((m, key)).or_insert_with(|| DispersionGroup {
            model: r.model.clone(),
            sigma: r.sigma_mpa * 1e6,
            branches: BTreeMap::new(),
        });
        g.branches.entry(label).or_default().push((r.fd_mhzmm * HZ_M_PER_MHZMM, r.cp_m_per_s));
    }
    Ok(groups.into_values().collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_table_keeps_header() {
        let mut buf = Vec::new();
        write_rows::<DeltaRow, _>(&mut buf, &[]).unwrap();
        assert_eq!(String::from_utf8(buf.clone()).unwrap().trim(), DeltaRow::HEADER.join(","));
        assert!(read_rows::<DeltaRow, _>(buf.as_slice()).unwrap().is_empty());
    }

    #[test]
    fn rows_round_trip() {
        let rows = vec![
            RegressionRow {
                mode: "A0".into(),
                fd_mhzmm: 0.05,
                slope_m_per_s_per_mpa: -0.0123456789012345,
                intercept_m_per_s: 1234.5,
                r2: 0.99999,
            },
            RegressionRow {
                mode: "S0".into(),
                fd_mhzmm: 3.0,
                slope_m_per_s_per_mpa: 1e-300,
                intercept_m_per_s: 3000.0,
                r2: 1.0,
            },
        ];
        let mut buf = Vec::new();
        write_rows(&mut buf, &rows).unwrap();
        assert_eq!(read_rows::<RegressionRow, _>(buf.as_slice()).unwrap(), rows);
    }

    #[test]
    fn wrong_header_is_a_schema_error() {
        let text = "model,sigma_MPa,mode,k,f_Hz,cp_m_per_s,fd_MHzmm\n";
        match read_rows::<DispersionRow, _>(text.as_bytes()) {
            Err(Error::Schema(m)) => assert!(m.contains("column 4"), "{m}"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn bad_cell_reports_line() {
        let text = "model,sigma_MPa,mode,k_rad_per_m,f_Hz,cp_m_per_s,fd_MHzmm\nlinear,0,S0,1,2,3,4\nlinear,x,S0,1,2,3,4\n";
        match read_rows::<DispersionRow, _>(text.as_bytes()) {
            Err(Error::Schema(m)) => assert!(m.contains("line 3"), "{m}"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn grouping_splits_models_and_loads() {
        let row = |model: &str, s: f64, mode: &str, fd: f64| DispersionRow {
            model: model.into(),
            sigma_mpa: s,
            mode: mode.into(),
            k_rad_per_m: 1.0,
            f_hz: 1.0,
            cp_m_per_s: 1000.0,
            fd_mhzmm: fd,
        };
        let rows = vec![
            row("murnaghan", 100.0, "A0", 0.1),
            row("neo-hooke", 0.0, "A0", 0.1),
            row("murnaghan", 0.0, "S0", 0.2),
            row("murnaghan", 0.0, "U", 0.2),
            row("murnaghan", 0.0, "S0", 0.3),
        ];
        let g = group_dispersion(&rows).unwrap();
        assert_eq!(g.len(), 3);
        assert_eq!((g[0].model.as_str(), g[0].sigma), ("murnaghan", 0.0));
        assert_eq!(g[0].branches[&ModeLabel::S0], vec![(200.0, 1000.0), (300.0, 1000.0)]);
        assert_eq!((g[1].model.as_str(), g[1].sigma), ("murnaghan", 100e6));
        assert_eq!(g[2].model, "neo-hooke");
        assert!(group_dispersion(&[row("x", 0.0, "Q7", 0.1)]).is_err());
    }
}
