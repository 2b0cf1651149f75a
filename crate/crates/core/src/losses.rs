//! Differentiable training losses on pose sequences.
//!
//! Each loss returns its scalar value together with the analytic gradient
//! with respect to the estimated positions (`T x J x 3`, flat). Per-row L2
//! norms use the subgradient-0 convention at zero residuals, so gradients
//! stay finite everywhere.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{build_graph, build_laplacian, LaplacianVariant, SparseLaplacian};
use crate::motion::MotionSequence;

/// Scalar loss value plus gradient with respect to the estimate, in the
/// same flat `(t * J + j) * 3 + c` layout as sequence positions.
#[derive(Debug, Clone, PartialEq)]
pub struct LossValue {
    pub value: f64,
    pub grad: Vec<f64>,
}

impl LossValue {
    fn zeros(len: usize) -> Self {
        Self {
            value: 0.0,
            grad: vec![0.0; len],
        }
    }
}

/// Which loss combination a training run optimizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LossMode {
    /// Joint position loss only (baseline).
    PositionOnly,
    /// Position loss plus `lambda` times the multi-scale motion loss.
    PositionPlusMotion,
    /// Position loss plus `alpha` times the Laplacian loss.
    PositionPlusLaplacian,
}

impl LossMode {
    /// Stable short label used in file names and report rows.
    pub fn label(&self) -> &'static str {
        match self {
            LossMode::PositionOnly => "position",
            LossMode::PositionPlusMotion => "position+motion",
            LossMode::PositionPlusLaplacian => "position+laplacian",
        }
    }
}

/// Coefficients and options for the combined objective.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LossConfig {
    /// Weight on the Laplacian loss in the combined objective.
    pub alpha: f64,
    /// Weight on the motion loss in the combined objective.
    pub lambda: f64,
    /// Frame offsets for the motion-loss encoding; offsets >= T are skipped.
    pub motion_scales: Vec<usize>,
    pub laplacian_variant: LaplacianVariant,
    /// When set, losses are computed on root-aligned positions instead of
    /// absolute ones (gradients are chained through the alignment).
    pub root_relative: bool,
}

impl Default for LossConfig {
    fn default() -> Self {
        Self {
            alpha: 1.0,
            lambda: 1.0,
            motion_scales: vec![1, 2, 4, 8],
            laplacian_variant: LaplacianVariant::Combinatorial,
            root_relative: false,
        }
    }
}

impl LossConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha.is_finite() && self.alpha >= 0.0) {
            return Err(Error::InvalidConfig(format!(
                "alpha must be a nonnegative finite value, got {}",
                self.alpha
            )));
        }
        if !(self.lambda.is_finite() && self.lambda >= 0.0) {
            return Err(Error::InvalidConfig(format!(
                "lambda must be a nonnegative finite value, got {}",
                self.lambda
            )));
        }
        if self.motion_scales.is_empty() {
            return Err(Error::InvalidConfig("motion_scales is empty".into()));
        }
        if self.motion_scales.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidConfig(
                "motion_scales must be strictly ascending".into(),
            ));
        }
        if self.motion_scales[0] == 0 {
            return Err(Error::InvalidConfig("motion scales must be >= 1".into()));
        }
        Ok(())
    }
}

/// Mean Euclidean distance between estimated and ground-truth joints.
pub fn position_loss(est: &MotionSequence, gt: &MotionSequence) -> Result<LossValue> {
    est.check_same_shape(gt)?;
    let count = (est.frames() * est.joints()) as f64;
    let mut out = LossValue::zeros(est.positions().len());
    for (node, (pe, pg)) in est
        .positions()
        .chunks_exact(3)
        .zip(gt.positions().chunks_exact(3))
        .enumerate()
    {
        let d = [pe[0] - pg[0], pe[1] - pg[1], pe[2] - pg[2]];
        let norm = (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt();
        out.value += norm;
        if norm > 0.0 {
            let scale = 1.0 / (count * norm);
            out.grad[node * 3] = d[0] * scale;
            out.grad[node * 3 + 1] = d[1] * scale;
            out.grad[node * 3 + 2] = d[2] * scale;
        }
    }
    out.value /= count;
    Ok(out)
}

/// Mean distance between the differential coordinates of the ground truth
/// and of the estimate, `delta = L * P`.
///
/// The gradient is `-(1/N) * L^T * U` where row `i` of `U` is the unit
/// residual `(delta_gt_i - delta_est_i) / ||.||` (zero at zero residual).
pub fn laplacian_loss(
    est: &MotionSequence,
    gt: &MotionSequence,
    laplacian: &SparseLaplacian,
) -> Result<LossValue> {
    est.check_same_shape(gt)?;
    let n = est.frames() * est.joints();
    if laplacian.n() != n {
        return Err(Error::ShapeMismatch(format!(
            "laplacian has {} nodes but sequences have {}",
            laplacian.n(),
            n
        )));
    }
    let delta_est = laplacian.multiply(est.positions(), 3)?;
    let delta_gt = laplacian.multiply(gt.positions(), 3)?;

    let inv_n = 1.0 / n as f64;
    let mut value = 0.0;
    let mut unit_residuals = vec![0.0; n * 3];
    for i in 0..n {
        let r = [
            delta_gt[i * 3] - delta_est[i * 3],
            delta_gt[i * 3 + 1] - delta_est[i * 3 + 1],
            delta_gt[i * 3 + 2] - delta_est[i * 3 + 2],
        ];
        let norm = (r[0] * r[0] + r[1] * r[1] + r[2] * r[2]).sqrt();
        value += norm;
        if norm > 0.0 {
            unit_residuals[i * 3] = r[0] / norm;
            unit_residuals[i * 3 + 1] = r[1] / norm;
            unit_residuals[i * 3 + 2] = r[2] / norm;
        }
    }
    let mut grad = laplacian.multiply_transpose(&unit_residuals, 3)?;
    for g in &mut grad {
        *g *= -inv_n;
    }
    Ok(LossValue {
        value: value * inv_n,
        grad,
    })
}

/// Multi-scale motion loss on subtraction encodings
/// `m_s[t, j] = P[t + s, j] - P[t, j]`.
///
/// The value is the mean of `||m_s_est - m_s_gt||` over every usable
/// (scale, frame, joint) triple; scales with `s >= T` are skipped.
pub fn motion_loss(est: &MotionSequence, gt: &MotionSequence, scales: &[usize]) -> Result<LossValue> {
    est.check_same_shape(gt)?;
    let frames = est.frames();
    let joints = est.joints();
    let usable: Vec<usize> = scales.iter().copied().filter(|&s| s >= 1 && s < frames).collect();
    if usable.is_empty() {
        return Err(Error::NoUsableScale { frames });
    }
    let term_count: usize = usable.iter().map(|&s| (frames - s) * joints).sum();
    let weight = 1.0 / term_count as f64;

    let pe = est.positions();
    let pg = gt.positions();
    let mut out = LossValue::zeros(pe.len());
    for &s in &usable {
        for t in 0..frames - s {
            for j in 0..joints {
                let a = (t * joints + j) * 3;
                let b = ((t + s) * joints + j) * 3;
                let d = [
                    (pe[b] - pe[a]) - (pg[b] - pg[a]),
                    (pe[b + 1] - pe[a + 1]) - (pg[b + 1] - pg[a + 1]),
                    (pe[b + 2] - pe[a + 2]) - (pg[b + 2] - pg[a + 2]),
                ];
                let norm = (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt();
                out.value += norm;
                if norm > 0.0 {
                    let scale = weight / norm;
                    for c in 0..3 {
                        let u = d[c] * scale;
                        out.grad[b + c] += u;
                        out.grad[a + c] -= u;
                    }
                }
            }
        }
    }
    out.value *= weight;
    Ok(out)
}

/// The combined training objective for a given mode.
///
/// `PositionOnly` equals [`position_loss`]; the other modes add the motion
/// or Laplacian loss scaled by `lambda` / `alpha`. With
/// `config.root_relative` set, both sequences are root-aligned first and the
/// gradient is chained through the alignment.
pub fn combined_loss(
    est: &MotionSequence,
    gt: &MotionSequence,
    config: &LossConfig,
    mode: LossMode,
) -> Result<LossValue> {
    est.check_same_shape(gt)?;
    config.validate()?;
    if config.root_relative {
        let est_aligned = crate::motion::root_align(est);
        let gt_aligned = crate::motion::root_align(gt);
        let inner = combined_on_given_frame(&est_aligned, &gt_aligned, config, mode)?;
        return Ok(LossValue {
            value: inner.value,
            grad: root_align_adjoint(&inner.grad, est.joints(), est.skeleton().root_index()),
        });
    }
    combined_on_given_frame(est, gt, config, mode)
}

fn combined_on_given_frame(
    est: &MotionSequence,
    gt: &MotionSequence,
    config: &LossConfig,
    mode: LossMode,
) -> Result<LossValue> {
    let mut total = position_loss(est, gt)?;
    match mode {
        LossMode::PositionOnly => {}
        LossMode::PositionPlusMotion => {
            let motion = motion_loss(est, gt, &config.motion_scales)?;
            total.value += config.lambda * motion.value;
            for (g, m) in total.grad.iter_mut().zip(&motion.grad) {
                *g += config.lambda * m;
            }
        }
        LossMode::PositionPlusLaplacian => {
            let graph = build_graph(est.skeleton(), est.frames());
            let laplacian = build_laplacian(&graph, config.laplacian_variant);
            let lap = laplacian_loss(est, gt, &laplacian)?;
            total.value += config.alpha * lap.value;
            for (g, l) in total.grad.iter_mut().zip(&lap.grad) {
                *g += config.alpha * l;
            }
        }
    }
    Ok(total)
}

/// Adjoint of per-frame root alignment: `aligned[t][j] = p[t][j] - p[t][root]`
/// (and the aligned root is identically zero). Given a gradient with respect
/// to the aligned positions, returns the gradient with respect to the
/// original ones.
fn root_align_adjoint(grad_aligned: &[f64], joints: usize, root: usize) -> Vec<f64> {
    let mut out = vec![0.0; grad_aligned.len()];
    let frames = grad_aligned.len() / (joints * 3);
    for t in 0..frames {
        let frame = t * joints * 3;
        for j in 0..joints {
            if j == root {
                continue;
            }
            for c in 0..3 {
                let g = grad_aligned[frame + j * 3 + c];
                out[frame + j * 3 + c] += g;
                out[frame + root * 3 + c] -= g;
            }
        }
    }
    out
}
