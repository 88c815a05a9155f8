use crate::error::{Error, Result};

/// Partition `0 = x₀ < x₁ < … < x_N = 1` of the unit interval.
///
/// Node 0 is pinned by the trial space, so the unknowns are the nodal values
/// at `x₁ … x_N`; DOF `i` lives at node `i + 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct MeshPartition {
    nodes: Vec<f64>,
}

impl MeshPartition {
    pub fn uniform(n_elements: usize) -> Result<Self> {
        if n_elements < 2 {
            return Err(Error::InvalidMesh(format!(
                "need at least 2 elements, got {n_elements}"
            )));
        }
        let n = n_elements as f64;
        let nodes = (0..=n_elements).map(|i| i as f64 / n).collect();
        Ok(MeshPartition { nodes })
    }

    /// Arbitrary (graded) partition; endpoints must be exactly 0 and 1.
    pub fn from_nodes(nodes: Vec<f64>) -> Result<Self> {
        if nodes.len() < 3 {
            return Err(Error::InvalidMesh(format!(
                "need at least 2 elements, got {}",
                nodes.len().saturating_sub(1)
            )));
        }
        if nodes[0] != 0.0 || *nodes.last().unwrap() != 1.0 {
            return Err(Error::InvalidMesh("nodes must span exactly [0, 1]".into()));
        }
        if let Some(i) = nodes.windows(2).position(|w| w[1].partial_cmp(&w[0]) != Some(std::cmp::Ordering::Greater)) {
            return Err(Error::InvalidMesh(format!(
                "nodes not strictly increasing at index {}",
                i + 1
            )));
        }
        Ok(MeshPartition { nodes })
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn n_elements(&self) -> usize {
        self.nodes.len() - 1
    }

    /// Number of unknowns, `N_h`.
    pub fn n_dofs(&self) -> usize {
        self.n_elements()
    }

    /// Endpoints of element `e` (between nodes `e` and `e + 1`).
    pub fn element(&self, e: usize) -> (f64, f64) {
        (self.nodes[e], self.nodes[e + 1])
    }

    pub fn element_sizes(&self) -> impl Iterator<Item = f64> + '_ {
        self.nodes.windows(2).map(|w| w[1] - w[0])
    }

    /// Largest element size.
    pub fn h(&self) -> f64 {
        self.element_sizes().fold(0.0, f64::max)
    }

    /// DOF index of the node at `x = 1`.
    pub fn boundary_index(&self) -> usize {
        self.n_dofs() - 1
    }

    /// Ratio `N_fine / N_coarse` when `coarse` nodes are exactly every m-th
    /// node of `self`.
    pub fn nesting_factor(&self, coarse: &MeshPartition) -> Result<usize> {
        let nf = self.n_elements();
        let nc = coarse.n_elements();
        if nc > nf || !nf.is_multiple_of(nc) {
            return Err(Error::NonNested(format!(
                "{nc} coarse elements do not divide {nf} fine elements"
            )));
        }
        let m = nf / nc;
        for (j, &xc) in coarse.nodes.iter().enumerate() {
            let xf = self.nodes[j * m];
            if (xf - xc).abs() > 1e-12 {
                return Err(Error::NonNested(format!(
                    "coarse node {j} at {xc} does not match fine node {} at {xf}",
                    j * m
                )));
            }
        }
        Ok(m)
    }
}
