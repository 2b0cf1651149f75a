//! Spatio-temporal Laplacian loss, temporal-consistency metrics, and a
//! desk-scale temporal convolution network for 3D motion reconstruction.
//!
//! The crate is organized around a motion-as-graph view: a pose sequence is
//! a `T x J x 3` array whose (frame, joint) nodes are linked by skeleton
//! bones within a frame and by same-joint edges across consecutive frames.
//! The graph Laplacian of that structure turns positions into differential
//! coordinates, which drive both a training loss and the evaluation story.
//!
//! Modules:
//! - [`motion`]: sequences, skeletons, Motion-JSON I/O, root alignment.
//! - [`graph`]: the 3D+t graph, sparse Laplacian, differential coordinates.
//! - [`losses`]: position / motion / Laplacian losses with analytic gradients.
//! - [`metrics`]: MPJPE, MPJVE, MPJAccE and per-action reports.
//! - [`tcn`]: a dilated temporal convolution network with hand-rolled
//!   reverse-mode gradients and Adam.
//! - [`synth`]: deterministic synthetic motion corpora and 2D projection.
//! - [`harness`]: training loop, ablation runner, and report emission.
//! - [`check`]: finite-difference and dense-matrix oracles used by tests
//!   and the `gradcheck` CLI.

pub mod check;
pub mod error;
pub mod graph;
pub mod harness;
pub mod losses;
pub mod metrics;
pub mod motion;
pub mod synth;
pub mod tcn;

pub use error::{Error, Result};
