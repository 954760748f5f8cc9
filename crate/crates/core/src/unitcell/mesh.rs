//! Structured 9-node quadrilateral mesh of the unit cell.

use crate::error::{Error, Result};

/// Lattice of `(2nx+1) × (2ny+1)` nodes over `[0, dx1] × [−d/2, d/2]`.
///
/// Node `(i, j)` (column `i` along x₁, row `j` through the thickness) has id
/// `j·(2nx+1) + i`; its displacement DOFs are `2·id` (u₁) and `2·id + 1` (u₂).
#[derive(Clone, Debug, PartialEq)]
pub struct UnitCellMesh {
    pub dx1: f64,
    pub thickness: f64,
    pub nx: usize,
    pub ny: usize,
    pub nodes: Vec<[f64; 2]>,
    /// Element connectivity in tensor order: local node `3q + p` sits at
    /// lattice offset `(p, q)`.
    pub elements: Vec<[usize; 9]>,
}

/// Preset meshes: desk scale for routine runs, fine scale for verification.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MeshPreset {
    Desk,
    Fine,
}

impl MeshPreset {
    /// `(nx, ny)` element counts.
    pub fn counts(self) -> (usize, usize) {
        match self {
            MeshPreset::Desk => (2, 40),
            MeshPreset::Fine => (10, 100),
        }
    }
}

impl std::str::FromStr for MeshPreset {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "desk" => Ok(MeshPreset::Desk),
            "fine" => Ok(MeshPreset::Fine),
            _ => Err(Error::domain(format!("unknown mesh preset '{s}' (desk|fine)"))),
        }
    }
}

impl UnitCellMesh {
    pub fn build(dx1: f64, thickness: f64, nx: usize, ny: usize) -> Result<Self> {
        if nx < 1 || ny < 2 {
            return Err(Error::domain(format!("need nx ≥ 1 and ny ≥ 2, got nx={nx}, ny={ny}")));
        }
        if !(dx1 > 0.0) || !(thickness > 0.0) {
            return Err(Error::domain("cell length and thickness must be positive"));
        }
        let (cols, rows) = (2 * nx + 1, 2 * ny + 1);
        let mut nodes = Vec::with_capacity(cols * rows);
        for j in 0..rows {
            // symmetric construction keeps mirrored rows exactly opposite
            let y = 0.5 * thickness * (2.0 * j as f64 - (rows - 1) as f64) / (rows - 1) as f64;
            for i in 0..cols {
                nodes.push([dx1 * i as f64 / (cols - 1) as f64, y]);
            }
        }
        let mut elements = Vec::with_capacity(nx * ny);
        for ey in 0..ny {
            for ex in 0..nx {
                let mut conn = [0; 9];
                for q in 0..3 {
                    for p in 0..3 {
                        conn[3 * q + p] = (2 * ey + q) * cols + 2 * ex + p;
                    }
                }
                elements.push(conn);
            }
        }
        Ok(UnitCellMesh {
            dx1,
            thickness,
            nx,
            ny,
            nodes,
            elements,
        })
    }

    pub fn preset(dx1: f64, thickness: f64, preset: MeshPreset) -> Result<Self> {
        let (nx, ny) = preset.counts();
        Self::build(dx1, thickness, nx, ny)
    }

    pub fn cols(&self) -> usize {
        2 * self.nx + 1
    }

    pub fn rows(&self) -> usize {
        2 * self.ny + 1
    }

    pub fn node_id(&self, i: usize, j: usize) -> usize {
        j * self.cols() + i
    }

    pub fn n_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn n_dof(&self) -> usize {
        2 * self.nodes.len()
    }

    pub fn left_nodes(&self) -> Vec<usize> {
        (0..self.rows()).map(|j| self.node_id(0, j)).collect()
    }

    pub fn right_nodes(&self) -> Vec<usize> {
        (0..self.rows()).map(|j| self.node_id(self.cols() - 1, j)).collect()
    }

    pub fn interior_nodes(&self) -> Vec<usize> {
        (0..self.rows())
            .flat_map(|j| (1..self.cols() - 1).map(move |i| (i, j)))
            .map(|(i, j)| self.node_id(i, j))
            .collect()
    }

    /// Lattice column and row of a node id.
    pub fn lattice(&self, id: usize) -> (usize, usize) {
        (id % self.cols(), id / self.cols())
    }

    /// Node count after right-edge nodes are folded onto the left edge.
    pub fn n_reduced_nodes(&self) -> usize {
        2 * self.nx * self.rows()
    }

    pub fn n_reduced_dof(&self) -> usize {
        2 * self.n_reduced_nodes()
    }

    /// Reduced node id and whether the node carries the Floquet phase.
    pub fn reduce(&self, id: usize) -> (usize, bool) {
        let (i, j) = self.lattice(id);
        let per_row = 2 * self.nx;
        if i == per_row {
            (j * per_row, true)
        } else {
            (j * per_row + i, false)
        }
    }

    /// Node id of the reduced node (always the left/interior copy).
    pub fn unreduce(&self, r: usize) -> usize {
        let per_row = 2 * self.nx;
        self.node_id(r % per_row, r / per_row)
    }

    /// Smallest Jacobian determinant over the element quadrature points.
    pub fn min_jacobian(&self) -> f64 {
        let mut jmin = f64::INFINITY;
        for el in &self.elements {
            for &(xi, _) in super::assembly::GAUSS3.iter() {
                for &(eta, _) in super::assembly::GAUSS3.iter() {
                    let (_, dn) = super::assembly::shape(xi, eta);
                    let mut jac = [[0.0; 2]; 2];
                    for (a, &node) in el.iter().enumerate() {
                        for r in 0..2 {
                            jac[0][r] += dn[a][r] * self.nodes[node][0];
                            jac[1][r] += dn[a][r] * self.nodes[node][1];
                        }
                    }
                    jmin = jmin.min(jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0]);
                }
            }
        }
        jmin
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn smallest_mesh_counts() {
        let m = UnitCellMesh::build(1e-4, 1e-3, 1, 2).unwrap();
        assert_eq!(m.elements.len(), 2);
        assert_eq!(m.n_nodes(), 15);
        assert_eq!(m.n_dof(), 30);
        assert_eq!(m.left_nodes().len(), m.right_nodes().len());
        assert_eq!(m.left_nodes().len() + m.right_nodes().len() + m.interior_nodes().len(), 15);
    }

    #[test]
    fn preset_counts() {
        let desk = UnitCellMesh::preset(1e-4, 1e-3, MeshPreset::Desk).unwrap();
        assert_eq!(desk.elements.len(), 80);
        assert_eq!(desk.n_dof(), 2 * (5 * 81));
        let fine = UnitCellMesh::preset(1e-4, 1e-3, MeshPreset::Fine).unwrap();
        assert_eq!(fine.elements.len(), 1000);
        // element size 0.01 mm in both directions
        assert!((fine.dx1 / fine.nx as f64 - 1e-5).abs() < 1e-18);
        assert!((fine.thickness / fine.ny as f64 - 1e-5).abs() < 1e-18);
    }

    #[test]
    fn edges_pair_up_and_midplane_is_symmetric() {
        let m = UnitCellMesh::build(1e-4, 1e-3, 2, 5).unwrap();
        for (l, r) in m.left_nodes().iter().zip(m.right_nodes()) {
            assert_eq!(m.nodes[*l][1], m.nodes[r][1]);
            assert_eq!(m.nodes[*l][0], 0.0);
            assert_eq!(m.nodes[r][0], 1e-4);
        }
        for j in 0..m.rows() {
            let a = m.nodes[m.node_id(0, j)][1];
            let b = m.nodes[m.node_id(0, m.rows() - 1 - j)][1];
            assert_eq!(a, -b);
        }
        assert!(m.min_jacobian() > 0.0);
    }

    #[test]
    fn reduction_folds_right_edge() {
        let m = UnitCellMesh::build(1e-4, 1e-3, 2, 2).unwrap();
        assert_eq!(m.n_reduced_nodes(), 20);
        let right = m.node_id(4, 3);
        assert_eq!(m.reduce(right), (12, true));
        assert_eq!(m.reduce(m.node_id(0, 3)), (12, false));
        assert_eq!(m.unreduce(13), m.node_id(1, 3));
    }

    #[test]
    fn rejects_illegal_sizes() {
        assert!(UnitCellMesh::build(1e-4, 1e-3, 0, 2).is_err());
        assert!(UnitCellMesh::build(1e-4, 1e-3, 1, 1).is_err());
        assert!(UnitCellMesh::build(-1.0, 1e-3, 1, 2).is_err());
    }
}
