//! The 3D+t motion graph, its sparse Laplacian, and differential coordinates.
//!
//! Nodes are (frame, joint) pairs indexed `t * J + j`. Spatial edges connect
//! each non-root joint to its parent within a frame; temporal edges connect
//! the same joint across consecutive frames. All edges carry uniform weight 1.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::motion::{MotionSequence, Skeleton};

/// Flat node index of joint `j` at frame `t` for a skeleton of `joints` joints.
#[inline]
pub fn node_index(t: usize, j: usize, joints: usize) -> usize {
    t * joints + j
}

/// Spatio-temporal motion graph over `T x J` nodes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph3Dt {
    frames: usize,
    joints: usize,
    /// Skeleton-bone edges per frame, enumerated by (t, j ascending),
    /// each stored as (min, max).
    spatial_edges: Vec<(usize, usize)>,
    /// Same-joint edges between consecutive frames, enumerated by
    /// (j, t ascending), each stored as (min, max).
    temporal_edges: Vec<(usize, usize)>,
}

impl Graph3Dt {
    pub fn frames(&self) -> usize {
        self.frames
    }

    pub fn joints(&self) -> usize {
        self.joints
    }

    /// Total node count `N = T * J`.
    pub fn node_count(&self) -> usize {
        self.frames * self.joints
    }

    pub fn spatial_edges(&self) -> &[(usize, usize)] {
        &self.spatial_edges
    }

    pub fn temporal_edges(&self) -> &[(usize, usize)] {
        &self.temporal_edges
    }

    /// All edges, spatial first, in their deterministic enumeration order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.spatial_edges
            .iter()
            .chain(self.temporal_edges.iter())
            .copied()
    }

    /// Node degrees under the combined edge set.
    pub fn degrees(&self) -> Vec<usize> {
        let mut deg = vec![0usize; self.node_count()];
        for (a, b) in self.edges() {
            deg[a] += 1;
            deg[b] += 1;
        }
        deg
    }
}

/// Builds the 3D+t graph for a skeleton over `frames` frames.
pub fn build_graph(skeleton: &Skeleton, frames: usize) -> Graph3Dt {
    let joints = skeleton.joint_count();
    let mut spatial_edges = Vec::with_capacity(frames * joints.saturating_sub(1));
    for t in 0..frames {
        for j in 0..joints {
            if let Some(parent) = skeleton.parent(j) {
                let a = node_index(t, j, joints);
                let b = node_index(t, parent, joints);
                spatial_edges.push((a.min(b), a.max(b)));
            }
        }
    }
    let mut temporal_edges = Vec::with_capacity(frames.saturating_sub(1) * joints);
    for j in 0..joints {
        for t in 0..frames.saturating_sub(1) {
            let a = node_index(t, j, joints);
            let b = node_index(t + 1, j, joints);
            temporal_edges.push((a, b));
        }
    }
    Graph3Dt {
        frames,
        joints,
        spatial_edges,
        temporal_edges,
    }
}

/// Which Laplacian normalization to build from the uniform edge weights.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LaplacianVariant {
    /// `L = D - A`: diagonal is the node degree, off-diagonals are -1.
    #[default]
    Combinatorial,
    /// `L = I - D^-1 A`: diagonal 1, off-diagonals -1/degree(row).
    RandomWalk,
}

/// Sparse `N x N` graph Laplacian in compressed-row form. The diagonal entry
/// is always stored (zero for isolated nodes), so the stored-entry count is
/// `N + 2 * |E|` and every row sums to zero.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseLaplacian {
    n: usize,
    variant: LaplacianVariant,
    row_offsets: Vec<usize>,
    col_indices: Vec<usize>,
    values: Vec<f64>,
}

impl SparseLaplacian {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn variant(&self) -> LaplacianVariant {
        self.variant
    }

    pub fn row_offsets(&self) -> &[usize] {
        &self.row_offsets
    }

    pub fn col_indices(&self) -> &[usize] {
        &self.col_indices
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Number of explicitly stored entries.
    pub fn stored_entries(&self) -> usize {
        self.values.len()
    }

    /// `y = L * x` for a dense row-major `N x cols` matrix `x`. Summation
    /// order within a row is the fixed CSR order.
    pub fn multiply(&self, dense: &[f64], cols: usize) -> Result<Vec<f64>> {
        if dense.len() != self.n * cols {
            return Err(Error::ShapeMismatch(format!(
                "laplacian is {0}x{0} but dense operand has {1} rows",
                self.n,
                dense.len() / cols.max(1)
            )));
        }
        let mut out = vec![0.0; self.n * cols];
        for i in 0..self.n {
            let row = &mut out[i * cols..(i + 1) * cols];
            for k in self.row_offsets[i]..self.row_offsets[i + 1] {
                let v = self.values[k];
                let src = &dense[self.col_indices[k] * cols..self.col_indices[k] * cols + cols];
                for (o, s) in row.iter_mut().zip(src) {
                    *o += v * s;
                }
            }
        }
        Ok(out)
    }

    /// `y = L^T * x`. Needed for loss gradients: the random-walk variant is
    /// not symmetric in values.
    pub fn multiply_transpose(&self, dense: &[f64], cols: usize) -> Result<Vec<f64>> {
        if dense.len() != self.n * cols {
            return Err(Error::ShapeMismatch(format!(
                "laplacian is {0}x{0} but dense operand has {1} rows",
                self.n,
                dense.len() / cols.max(1)
            )));
        }
        let mut out = vec![0.0; self.n * cols];
        for i in 0..self.n {
            let src = &dense[i * cols..(i + 1) * cols];
            for k in self.row_offsets[i]..self.row_offsets[i + 1] {
                let v = self.values[k];
                let dst = self.col_indices[k] * cols;
                for (c, s) in src.iter().enumerate() {
                    out[dst + c] += v * s;
                }
            }
        }
        Ok(out)
    }

    /// Dense copy, row-major `N x N`. For tests and small-N debugging.
    pub fn to_dense(&self) -> Vec<f64> {
        let mut dense = vec![0.0; self.n * self.n];
        for i in 0..self.n {
            for k in self.row_offsets[i]..self.row_offsets[i + 1] {
                dense[i * self.n + self.col_indices[k]] = self.values[k];
            }
        }
        dense
    }
}

/// Builds the sparse Laplacian of a 3D+t graph under the given variant.
pub fn build_laplacian(graph: &Graph3Dt, variant: LaplacianVariant) -> SparseLaplacian {
    let n = graph.node_count();
    let mut neighbors: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (a, b) in graph.edges() {
        neighbors[a].push(b);
        neighbors[b].push(a);
    }
    for list in &mut neighbors {
        list.sort_unstable();
    }

    let mut row_offsets = Vec::with_capacity(n + 1);
    let mut col_indices = Vec::new();
    let mut values = Vec::new();
    row_offsets.push(0);
    for i in 0..n {
        let degree = neighbors[i].len();
        let off_diag = match variant {
            LaplacianVariant::Combinatorial => -1.0,
            LaplacianVariant::RandomWalk => {
                if degree > 0 {
                    -1.0 / degree as f64
                } else {
                    0.0
                }
            }
        };
        let diag = match variant {
            LaplacianVariant::Combinatorial => degree as f64,
            // Isolated nodes keep a zero row so L * 1 = 0 still holds.
            LaplacianVariant::RandomWalk => {
                if degree > 0 {
                    1.0
                } else {
                    0.0
                }
            }
        };
        let mut diag_emitted = false;
        for &col in &neighbors[i] {
            if !diag_emitted && col > i {
                col_indices.push(i);
                values.push(diag);
                diag_emitted = true;
            }
            col_indices.push(col);
            values.push(off_diag);
        }
        if !diag_emitted {
            col_indices.push(i);
            values.push(diag);
        }
        row_offsets.push(col_indices.len());
    }

    SparseLaplacian {
        n,
        variant,
        row_offsets,
        col_indices,
        values,
    }
}

/// Differential coordinates `delta = L * P`: each node's position relative
/// to its graph neighbors, an `N x 3` matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DiffCoords {
    n: usize,
    /// Flat `N x 3`, row-major.
    data: Vec<f64>,
}

impl DiffCoords {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> [f64; 3] {
        [
            self.data[i * 3],
            self.data[i * 3 + 1],
            self.data[i * 3 + 2],
        ]
    }

    /// Rows as an `N x 3` nested vector, the JSON shape emitted by the CLI.
    pub fn to_rows(&self) -> Vec<[f64; 3]> {
        (0..self.n).map(|i| self.row(i)).collect()
    }
}

/// Computes `delta = L * P` with positions flattened in node order.
pub fn diff_coords(laplacian: &SparseLaplacian, seq: &MotionSequence) -> Result<DiffCoords> {
    let n = seq.frames() * seq.joints();
    if laplacian.n() != n {
        return Err(Error::ShapeMismatch(format!(
            "laplacian has {} nodes but sequence has {} (T={} J={})",
            laplacian.n(),
            n,
            seq.frames(),
            seq.joints()
        )));
    }
    let data = laplacian.multiply(seq.positions(), 3)?;
    Ok(DiffCoords { n, data })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chain2_frames2() -> Graph3Dt {
        build_graph(&Skeleton::chain(2).unwrap(), 2)
    }

    #[test]
    fn four_node_graph_edges_and_degrees() {
        let g = chain2_frames2();
        assert_eq!(g.spatial_edges(), &[(0, 1), (2, 3)]);
        assert_eq!(g.temporal_edges(), &[(0, 2), (1, 3)]);
        assert_eq!(g.degrees(), vec![2, 2, 2, 2]);
    }

    #[test]
    fn isolated_node_has_no_edges() {
        let g = build_graph(&Skeleton::chain(1).unwrap(), 1);
        assert_eq!(g.node_count(), 1);
        assert!(g.spatial_edges().is_empty());
        assert!(g.temporal_edges().is_empty());
    }

    #[test]
    fn edge_counts_match_formulas_for_humanoid17() {
        let g = build_graph(&Skeleton::humanoid17(), 3);
        assert_eq!(g.spatial_edges().len(), 48); // T * (J - 1)
        assert_eq!(g.temporal_edges().len(), 34); // (T - 1) * J
    }

    #[test]
    fn combinatorial_laplacian_matches_hand_matrix() {
        let l = build_laplacian(&chain2_frames2(), LaplacianVariant::Combinatorial);
        #[rustfmt::skip]
        let expected = vec![
             2.0, -1.0, -1.0,  0.0,
            -1.0,  2.0,  0.0, -1.0,
            -1.0,  0.0,  2.0, -1.0,
             0.0, -1.0, -1.0,  2.0,
        ];
        assert_eq!(l.to_dense(), expected);
    }

    #[test]
    fn random_walk_laplacian_matches_hand_matrix() {
        let l = build_laplacian(&chain2_frames2(), LaplacianVariant::RandomWalk);
        #[rustfmt::skip]
        let expected = vec![
             1.0, -0.5, -0.5,  0.0,
            -0.5,  1.0,  0.0, -0.5,
            -0.5,  0.0,  1.0, -0.5,
             0.0, -0.5, -0.5,  1.0,
        ];
        assert_eq!(l.to_dense(), expected);
    }

    #[test]
    fn isolated_node_gets_zero_row_in_both_variants() {
        let g = build_graph(&Skeleton::chain(1).unwrap(), 1);
        for variant in [LaplacianVariant::Combinatorial, LaplacianVariant::RandomWalk] {
            let l = build_laplacian(&g, variant);
            assert_eq!(l.to_dense(), vec![0.0]);
            assert_eq!(l.stored_entries(), 1);
        }
    }

    #[test]
    fn stored_entries_count_diagonal_plus_edges() {
        let g = build_graph(&Skeleton::humanoid17(), 3);
        let l = build_laplacian(&g, LaplacianVariant::Combinatorial);
        let n = g.node_count();
        assert_eq!(l.stored_entries(), n + 2 * (48 + 34));
    }

    #[test]
    fn diff_coords_match_hand_multiply() {
        let skeleton = Skeleton::chain(2).unwrap();
        let positions = vec![
            0.0, 0.0, 0.0, //
            1.0, 0.0, 0.0, //
            0.0, 0.0, 1.0, //
            1.0, 0.0, 1.0,
        ];
        let seq = MotionSequence::new(skeleton.clone(), 50.0, 2, positions).unwrap();
        let l = build_laplacian(&build_graph(&skeleton, 2), LaplacianVariant::Combinatorial);
        let delta = diff_coords(&l, &seq).unwrap();
        assert_eq!(delta.row(0), [-1.0, 0.0, -1.0]);
        assert_eq!(delta.row(1), [1.0, 0.0, -1.0]);
        assert_eq!(delta.row(2), [-1.0, 0.0, 1.0]);
        assert_eq!(delta.row(3), [1.0, 0.0, 1.0]);
    }

    #[test]
    fn constant_positions_are_annihilated() {
        let skeleton = Skeleton::chain(3).unwrap();
        let seq = MotionSequence::new(skeleton.clone(), 30.0, 4, vec![7.5; 4 * 3 * 3]).unwrap();
        for variant in [LaplacianVariant::Combinatorial, LaplacianVariant::RandomWalk] {
            let l = build_laplacian(&build_graph(&skeleton, 4), variant);
            let delta = diff_coords(&l, &seq).unwrap();
            assert!(delta.data().iter().all(|v| v.abs() <= 1e-12));
        }
    }

    #[test]
    fn rows_sum_to_zero() {
        let g = build_graph(&Skeleton::humanoid17(), 5);
        for variant in [LaplacianVariant::Combinatorial, LaplacianVariant::RandomWalk] {
            let l = build_laplacian(&g, variant);
            let n = l.n();
            let dense = l.to_dense();
            for i in 0..n {
                let sum: f64 = dense[i * n..(i + 1) * n].iter().sum();
                assert!(sum.abs() <= 1e-12, "row {i} sums to {sum}");
            }
        }
    }

    #[test]
    fn transpose_multiply_matches_dense_transpose() {
        let g = build_graph(&Skeleton::humanoid17(), 2);
        let l = build_laplacian(&g, LaplacianVariant::RandomWalk);
        let n = l.n();
        let x: Vec<f64> = (0..n).map(|i| (i as f64 * 0.37).sin()).collect();
        let dense = l.to_dense();
        let mut expected = vec![0.0; n];
        for i in 0..n {
            for j in 0..n {
                expected[j] += dense[i * n + j] * x[i];
            }
        }
        let got = l.multiply_transpose(&x, 1).unwrap();
        for (e, g) in expected.iter().zip(&got) {
            assert!((e - g).abs() <= 1e-12);
        }
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let skeleton = Skeleton::chain(2).unwrap();
        let seq = MotionSequence::new(skeleton.clone(), 30.0, 3, vec![0.0; 18]).unwrap();
        let l = build_laplacian(&build_graph(&skeleton, 2), LaplacianVariant::Combinatorial);
        assert!(matches!(
            diff_coords(&l, &seq),
            Err(crate::error::Error::ShapeMismatch(_))
        ));
    }
}
