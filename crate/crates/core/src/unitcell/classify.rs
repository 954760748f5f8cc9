//! Symmetric / antisymmetric mode classification about the midplane.

use super::mesh::UnitCellMesh;
use num_complex::Complex64;
use std::fmt;
use std::str::FromStr;

pub const SYMMETRY_THRESHOLD: f64 = 0.95;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Symmetry {
    Symmetric,
    Antisymmetric,
    Unclassified,
}

/// Branch label: `S0`, `A0`, `S1`, … or unclassified.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ModeLabel {
    S(usize),
    A(usize),
    Unclassified,
}

impl ModeLabel {
    pub const S0: ModeLabel = ModeLabel::S(0);
    pub const A0: ModeLabel = ModeLabel::A(0);
}

impl fmt::Display for ModeLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModeLabel::S(n) => write!(f, "S{n}"),
            ModeLabel::A(n) => write!(f, "A{n}"),
            ModeLabel::Unclassified => f.write_str("U"),
        }
    }
}

impl FromStr for ModeLabel {
    type Err = crate::error::Error;
    fn from_str(s: &str) -> crate::error::Result<Self> {
        let bad = || crate::error::Error::Schema(format!("bad mode label '{s}'"));
        let s = s.trim();
        if s == "U" {
            return Ok(ModeLabel::Unclassified);
        }
        let (head, tail) = s.split_at(s.len().min(1));
        let n: usize = tail.parse().map_err(|_| bad())?;
        match head {
            "S" | "s" => Ok(ModeLabel::S(n)),
            "A" | "a" => Ok(ModeLabel::A(n)),
            _ => Err(bad()),
        }
    }
}

/// Fraction of the displacement energy in the symmetric pattern
/// (u₁ even, u₂ odd about x₂ = 0). The antisymmetric fraction is `1 − score`.
pub fn symmetric_score(vector: &[Complex64], mesh: &UnitCellMesh) -> f64 {
    let per_row = 2 * mesh.nx;
    let rows = mesh.rows();
    let mut sym = 0.0;
    let mut total = 0.0;
    for j in 0..rows {
        let jm = rows - 1 - j;
        for i in 0..per_row {
            let a = 2 * (j * per_row + i);
            let b = 2 * (jm * per_row + i);
            let even1 = 0.5 * (vector[a] + vector[b]);
            let odd2 = 0.5 * (vector[a + 1] - vector[b + 1]);
            sym += even1.norm_sqr() + odd2.norm_sqr();
            total += vector[a].norm_sqr() + vector[a + 1].norm_sqr();
        }
    }
    if total == 0.0 {
        0.5
    } else {
        sym / total
    }
}

pub fn classify_symmetry(vector: &[Complex64], mesh: &UnitCellMesh) -> Symmetry {
    let s = symmetric_score(vector, mesh);
    if s >= SYMMETRY_THRESHOLD {
        Symmetry::Symmetric
    } else if 1.0 - s >= SYMMETRY_THRESHOLD {
        Symmetry::Antisymmetric
    } else {
        Symmetry::Unclassified
    }
}

/// Labels the modes at one wavenumber by frequency rank within each symmetry
/// family. `omegas` must be ascending.
pub fn rank_labels(symmetries: &[Symmetry]) -> Vec<ModeLabel> {
    let (mut ns, mut na) = (0, 0);
    symmetries
        .iter()
        .map(|s| match s {
            Symmetry::Symmetric => {
                ns += 1;
                ModeLabel::S(ns - 1)
            }
            Symmetry::Antisymmetric => {
                na += 1;
                ModeLabel::A(na - 1)
            }
            Symmetry::Unclassified => ModeLabel::Unclassified,
        })
        .collect()
}
