use alloc::string::String;
use alloc::vec::Vec;

use thiserror::Error;

use crate::linalg::Matrix;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GraphError {
    #[error("adjacency is {rows}x{cols} but {joints} joints were named")]
    Shape { rows: usize, cols: usize, joints: usize },
    #[error("adjacency entry ({0}, {1}) is not 0 or 1")]
    NotBinary(usize, usize),
    #[error("self-loop on joint {0}")]
    SelfLoop(usize),
}

/// Directed Granger causal graph over the joints of one gait cycle.
///
/// `adjacency[(j, i)] == 1` means joint `j` Granger-causes joint `i`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CausalGraph {
    pub joint_order: Vec<String>,
    pub adjacency: Matrix,
    /// Identifier of the originating cycle, if known.
    pub source: Option<String>,
}

impl CausalGraph {
    pub fn new(joint_order: Vec<String>, adjacency: Matrix, source: Option<String>) -> Result<Self, GraphError> {
        let p = joint_order.len();
        if adjacency.rows() != p || adjacency.cols() != p {
            return Err(GraphError::Shape { rows: adjacency.rows(), cols: adjacency.cols(), joints: p });
        }
        for r in 0..p {
            for c in 0..p {
                let v = adjacency[(r, c)];
                if v != 0.0 && v != 1.0 {
                    return Err(GraphError::NotBinary(r, c));
                }
                if r == c && v != 0.0 {
                    return Err(GraphError::SelfLoop(r));
                }
            }
        }
        Ok(Self { joint_order, adjacency, source })
    }

    pub fn empty(joint_order: Vec<String>) -> Self {
        let p = joint_order.len();
        Self { joint_order, adjacency: Matrix::zeros(p, p), source: None }
    }

    pub fn num_joints(&self) -> usize {
        self.joint_order.len()
    }

    pub fn has_edge(&self, from: usize, to: usize) -> bool {
        self.adjacency[(from, to)] != 0.0
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.as_slice().iter().filter(|&&v| v != 0.0).count()
    }

    /// Directed edges `(from, to)` in row-major order.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let p = self.num_joints();
        (0..p).flat_map(|r| (0..p).map(move |c| (r, c))).filter(|&(r, c)| self.has_edge(r, c)).collect()
    }

    pub fn out_degree(&self, joint: usize) -> usize {
        (0..self.num_joints()).filter(|&c| self.has_edge(joint, c)).count()
    }

    pub fn in_degree(&self, joint: usize) -> usize {
        (0..self.num_joints()).filter(|&r| self.has_edge(r, joint)).count()
    }

    /// Copy with both directed edges between `a` and `b` removed.
    pub fn without_pair(&self, a: usize, b: usize) -> Self {
        let mut g = self.clone();
        g.adjacency[(a, b)] = 0.0;
        g.adjacency[(b, a)] = 0.0;
        g
    }
}
