//! Floquet unit-cell finite elements for guided waves in a pre-stressed plate.

pub mod assembly;
pub mod band;
pub mod classify;
pub mod eigen;
pub mod floquet;
pub mod mesh;
pub mod sweep;

pub use assembly::{assemble, assemble_with, AssembledSystem, Kinematics};
pub use classify::{classify_symmetry, ModeLabel, Symmetry};
pub use eigen::{solve_eigen, EigenOptions, EigenPair};
pub use floquet::floquet_reduce;
pub use mesh::{MeshPreset, UnitCellMesh};
pub use sweep::{log_grid, sweep, DispersionSet, ModeBranch, Sample, SweepOptions};
