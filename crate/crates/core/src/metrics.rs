//! Evaluation metrics: MPJPE under a root-aligned protocol, velocity error
//! (MPJVE), and acceleration error (MPJAccE), with per-action aggregation.
//!
//! Velocity is the forward difference `v[t] = P[t+1] - P[t]` (mm/frame);
//! acceleration is the second difference `a[t] = P[t+2] - 2 P[t+1] + P[t]`
//! (mm/frame^2). Neither applies root alignment; only MPJPE does.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::motion::{root_align, MotionSequence};

/// Mean per-joint position error in mm after aligning the root joints of
/// the estimate and the ground truth (per frame).
pub fn mpjpe_protocol1(est: &MotionSequence, gt: &MotionSequence) -> Result<f64> {
    est.check_same_shape(gt)?;
    let est = root_align(est);
    let gt = root_align(gt);
    let count = (est.frames() * est.joints()) as f64;
    let sum: f64 = est
        .positions()
        .chunks_exact(3)
        .zip(gt.positions().chunks_exact(3))
        .map(|(a, b)| {
            let d = [a[0] - b[0], a[1] - b[1], a[2] - b[2]];
            (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt()
        })
        .sum();
    Ok(sum / count)
}

/// Forward-difference joint velocities, `(T-1) x J x 3` flat, mm/frame.
pub fn velocity(seq: &MotionSequence) -> Result<Vec<f64>> {
    if seq.frames() < 2 {
        return Err(Error::SequenceTooShort {
            op: "velocity",
            needed: 2,
            got: seq.frames(),
        });
    }
    let stride = seq.joints() * 3;
    let p = seq.positions();
    Ok((0..(seq.frames() - 1) * stride)
        .map(|i| p[i + stride] - p[i])
        .collect())
}

/// Which second-order formula [`acceleration_with_formula`] applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AccelFormula {
    /// The standard second difference `P[t+2] - 2 P[t+1] + P[t]`, which
    /// annihilates linear motion. This is what the metrics use.
    SecondDifference,
    /// `P[t+2] - 2 P[t+1] - P[t]`: kept for comparison only. It is not a
    /// difference operator (it does not vanish on constant sequences).
    MinusTrailing,
}

/// Joint accelerations, `(T-2) x J x 3` flat, mm/frame^2.
pub fn acceleration(seq: &MotionSequence) -> Result<Vec<f64>> {
    acceleration_with_formula(seq, AccelFormula::SecondDifference)
}

/// Acceleration under an explicit formula choice; see [`AccelFormula`].
pub fn acceleration_with_formula(seq: &MotionSequence, formula: AccelFormula) -> Result<Vec<f64>> {
    if seq.frames() < 3 {
        return Err(Error::SequenceTooShort {
            op: "acceleration",
            needed: 3,
            got: seq.frames(),
        });
    }
    let stride = seq.joints() * 3;
    let p = seq.positions();
    let trailing_sign = match formula {
        AccelFormula::SecondDifference => 1.0,
        AccelFormula::MinusTrailing => -1.0,
    };
    Ok((0..(seq.frames() - 2) * stride)
        .map(|i| p[i + 2 * stride] - 2.0 * p[i + stride] + trailing_sign * p[i])
        .collect())
}

fn mean_row_norm(a: &[f64], b: &[f64]) -> f64 {
    let rows = a.len() / 3;
    let sum: f64 = a
        .chunks_exact(3)
        .zip(b.chunks_exact(3))
        .map(|(x, y)| {
            let d = [x[0] - y[0], x[1] - y[1], x[2] - y[2]];
            (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt()
        })
        .sum();
    sum / rows as f64
}

/// Mean per-joint velocity error in mm/frame.
pub fn mpjve(est: &MotionSequence, gt: &MotionSequence) -> Result<f64> {
    est.check_same_shape(gt)?;
    Ok(mean_row_norm(&velocity(est)?, &velocity(gt)?))
}

/// Mean per-joint acceleration error in mm/frame^2.
pub fn mpjacce(est: &MotionSequence, gt: &MotionSequence) -> Result<f64> {
    est.check_same_shape(gt)?;
    Ok(mean_row_norm(&acceleration(est)?, &acceleration(gt)?))
}

/// Metric values for one action group. Velocity and acceleration errors are
/// absent when every sequence in the group is too short.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActionMetrics {
    pub mpjpe: f64,
    pub mpjve: Option<f64>,
    pub mpjacce: Option<f64>,
    /// Number of sequence pairs aggregated into this row.
    pub pairs: usize,
}

/// Evaluation report: top-level values are unweighted means over the
/// per-action values, mirroring an actions + Avg table layout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub mpjpe: f64,
    pub mpjve: Option<f64>,
    pub mpjacce: Option<f64>,
    pub per_action: BTreeMap<String, ActionMetrics>,
}

/// Evaluates one estimate/ground-truth pair under a single action label.
pub fn evaluate_pair(
    est: &MotionSequence,
    gt: &MotionSequence,
    action: &str,
) -> Result<MetricReport> {
    evaluate_batch([(est, gt, action)])
}

/// Evaluates a batch of pairs grouped by action label.
///
/// Within an action, values are unweighted means over pairs; the top-level
/// values are unweighted means over actions (the Avg column convention).
pub fn evaluate_batch<'a>(
    pairs: impl IntoIterator<Item = (&'a MotionSequence, &'a MotionSequence, &'a str)>,
) -> Result<MetricReport> {
    struct Acc {
        mpjpe_sum: f64,
        mpjpe_n: usize,
        mpjve_sum: f64,
        mpjve_n: usize,
        mpjacce_sum: f64,
        mpjacce_n: usize,
    }
    let mut groups: BTreeMap<String, Acc> = BTreeMap::new();
    for (est, gt, action) in pairs {
        est.check_same_shape(gt)?;
        let acc = groups.entry(action.to_string()).or_insert(Acc {
            mpjpe_sum: 0.0,
            mpjpe_n: 0,
            mpjve_sum: 0.0,
            mpjve_n: 0,
            mpjacce_sum: 0.0,
            mpjacce_n: 0,
        });
        acc.mpjpe_sum += mpjpe_protocol1(est, gt)?;
        acc.mpjpe_n += 1;
        if est.frames() >= 2 {
            acc.mpjve_sum += mpjve(est, gt)?;
            acc.mpjve_n += 1;
        }
        if est.frames() >= 3 {
            acc.mpjacce_sum += mpjacce(est, gt)?;
            acc.mpjacce_n += 1;
        }
    }
    if groups.is_empty() {
        return Err(Error::InvalidConfig("no sequence pairs to evaluate".into()));
    }

    let mut per_action = BTreeMap::new();
    for (action, acc) in groups {
        per_action.insert(
            action,
            ActionMetrics {
                mpjpe: acc.mpjpe_sum / acc.mpjpe_n as f64,
                mpjve: (acc.mpjve_n > 0).then(|| acc.mpjve_sum / acc.mpjve_n as f64),
                mpjacce: (acc.mpjacce_n > 0).then(|| acc.mpjacce_sum / acc.mpjacce_n as f64),
                pairs: acc.mpjpe_n,
            },
        );
    }

    let mpjpe = unweighted_mean(per_action.values().map(|a| Some(a.mpjpe))).unwrap();
    let mpjve = unweighted_mean(per_action.values().map(|a| a.mpjve));
    let mpjacce = unweighted_mean(per_action.values().map(|a| a.mpjacce));
    Ok(MetricReport {
        mpjpe,
        mpjve,
        mpjacce,
        per_action,
    })
}

/// Unweighted mean over the present values; `None` when none are present.
pub fn unweighted_mean(values: impl IntoIterator<Item = Option<f64>>) -> Option<f64> {
    let mut sum = 0.0;
    let mut n = 0usize;
    for v in values.into_iter().flatten() {
        sum += v;
        n += 1;
    }
    (n > 0).then(|| sum / n as f64)
}


/// Published Human3.6M reference rows used to validate the Avg-column
/// aggregation convention and reporting code against known tables.
pub mod reference {
    /// Action column order of the standard 15-action Human3.6M tables.
    pub const ACTIONS: [&str; 15] = [
        "Dir.", "Dis.", "Eat.", "Greet.", "Phon.", "Phot.", "Pos.", "Purch.", "Sit.", "SitD.",
        "Smok.", "Wait.", "WalkD.", "Walk.", "WalkT.",
    ];

    /// MPJPE (mm) per action, position-loss baseline row.
    pub const MPJPE_BASELINE: [f64; 15] = [
        85.25, 129.41, 109.17, 101.22, 117.17, 137.31, 86.12, 293.37, 152.75, 248.98, 119.87,
        105.45, 261.62, 87.20, 87.81,
    ];
    /// MPJPE (mm) per action, motion-loss row.
    pub const MPJPE_MOTION: [f64; 15] = [
        83.67, 107.73, 118.72, 95.51, 113.39, 131.98, 82.64, 221.00, 148.74, 232.07, 113.56,
        95.76, 195.00, 85.04, 83.95,
    ];
    /// MPJPE (mm) per action, Laplacian-loss row.
    pub const MPJPE_LAPLACIAN: [f64; 15] = [
        80.77, 82.53, 104.96, 87.07, 101.80, 107.00, 77.41, 98.85, 137.33, 178.99, 103.43, 84.37,
        104.32, 79.16, 76.30,
    ];
    /// Printed Avg column values for the three MPJPE rows above.
    pub const MPJPE_PRINTED_AVG: [f64; 3] = [142.47, 127.99, 100.62];

    /// MPJVE (mm/frame) per action, Laplacian-loss row, printed Avg 3.01.
    pub const MPJVE_LAPLACIAN: [f64; 15] = [
        2.88, 2.94, 2.59, 3.58, 2.29, 2.79, 2.60, 3.55, 1.94, 3.22, 2.25, 2.56, 4.13, 4.20, 3.60,
    ];
    pub const MPJVE_LAPLACIAN_PRINTED_AVG: f64 = 3.01;
    /// Printed Avg of the position-loss baseline MPJVE row.
    pub const MPJVE_BASELINE_PRINTED_AVG: f64 = 4.50;

    /// MPJAccE (mm/frame^2) per action, Laplacian-loss row, printed Avg 1.33.
    pub const MPJACCE_LAPLACIAN: [f64; 15] = [
        1.12, 1.21, 1.03, 1.42, 0.98, 1.23, 1.06, 1.83, 0.88, 1.91, 0.88, 1.03, 1.91, 1.93, 1.50,
    ];
    pub const MPJACCE_LAPLACIAN_PRINTED_AVG: f64 = 1.33;

    /// Published full-scale improvements over the position-only baseline on
    /// Human3.6M, reported alongside desk-scale ablation results.
    pub const REFERENCE_MPJPE_GAIN_MOTION_MM: f64 = 14.48;
    pub const REFERENCE_MPJPE_GAIN_LAPLACIAN_MM: f64 = 41.85;
    pub const REFERENCE_MPJVE_GAIN_LAPLACIAN_MM_PER_FRAME: f64 = 1.49;
}
