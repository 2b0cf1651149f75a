//! Independent numerical oracles: central finite differences for gradient
//! verification and a dense neighbor-sum reference for the sparse Laplacian.
//!
//! These deliberately avoid the code paths they check. The finite-difference
//! drivers only ever evaluate loss *values*; the dense reference sums over
//! explicit neighbor lists instead of compressed-row storage.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::graph::{build_graph, build_laplacian, Graph3Dt, LaplacianVariant};
use crate::losses::{
    combined_loss, laplacian_loss, motion_loss, position_loss, LossConfig, LossMode,
};
use crate::motion::{MotionSequence, MotionSequence2D, Skeleton};
use crate::tcn::{backward, forward_cached, NetworkSpec, NetworkState};

/// Relative-error threshold used by the gradient-check drivers.
pub const GRAD_TOLERANCE: f64 = 1e-4;

/// Finite-difference step size.
pub const GRAD_STEP: f64 = 1e-5;

/// Central finite differences: `(f(x + h e_i) - f(x - h e_i)) / 2h`.
pub fn finite_diff_grad<F>(f: F, point: &[f64], h: f64) -> Vec<f64>
where
    F: Fn(&[f64]) -> f64,
{
    let mut grads = Vec::with_capacity(point.len());
    let mut probe = point.to_vec();
    for i in 0..point.len() {
        probe[i] = point[i] + h;
        let plus = f(&probe);
        probe[i] = point[i] - h;
        let minus = f(&probe);
        probe[i] = point[i];
        grads.push((plus - minus) / (2.0 * h));
    }
    grads
}

/// Worst-component error between two gradients, scaled by the larger of the
/// two infinity norms. Zero when both gradients are identically zero.
pub fn max_rel_error(analytic: &[f64], numeric: &[f64]) -> f64 {
    assert_eq!(analytic.len(), numeric.len());
    let inf = |v: &[f64]| v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let denom = inf(analytic).max(inf(numeric)).max(1e-12);
    analytic
        .iter()
        .zip(numeric)
        .map(|(a, n)| (a - n).abs())
        .fold(0.0f64, f64::max)
        / denom
}

/// Dense neighbor-sum reference for differential coordinates:
/// `delta_i = deg(i) * p_i - sum_{j in N(i)} p_j` (combinatorial), or
/// `delta_i = p_i - mean_{j in N(i)} p_j` (random walk). Built from the
/// graph's edge lists, independent of the compressed-row code path.
pub fn dense_diff_coords(
    graph: &Graph3Dt,
    variant: LaplacianVariant,
    positions: &[f64],
) -> Vec<f64> {
    let n = graph.node_count();
    assert_eq!(positions.len(), n * 3);
    let mut neighbors: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (a, b) in graph.edges() {
        neighbors[a].push(b);
        neighbors[b].push(a);
    }
    let mut out = vec![0.0; n * 3];
    for i in 0..n {
        let deg = neighbors[i].len();
        if deg == 0 {
            continue;
        }
        for c in 0..3 {
            let neighbor_sum: f64 = neighbors[i].iter().map(|&j| positions[j * 3 + c]).sum();
            out[i * 3 + c] = match variant {
                LaplacianVariant::Combinatorial => deg as f64 * positions[i * 3 + c] - neighbor_sum,
                LaplacianVariant::RandomWalk => positions[i * 3 + c] - neighbor_sum / deg as f64,
            };
        }
    }
    out
}

/// A random tree skeleton with `joints` joints; every parent index is lower
/// than its child, so joint 0 is the root.
pub fn random_skeleton(rng: &mut impl Rng, joints: usize) -> Skeleton {
    let parents = (0..joints)
        .map(|j| if j == 0 { None } else { Some(rng.gen_range(0..j)) })
        .collect();
    Skeleton::new(parents, None, 0).expect("generated parents form a tree")
}

/// A random sequence with positions uniform in `[-scale, scale]`.
pub fn random_sequence(
    rng: &mut impl Rng,
    skeleton: &Skeleton,
    frames: usize,
    scale: f64,
) -> MotionSequence {
    let positions = (0..frames * skeleton.joint_count() * 3)
        .map(|_| rng.gen_range(-scale..scale))
        .collect();
    MotionSequence::new(skeleton.clone(), 50.0, frames, positions).unwrap()
}

/// A copy of `seq` with independent uniform noise in `[-noise, noise]`.
pub fn perturbed_sequence(rng: &mut impl Rng, seq: &MotionSequence, noise: f64) -> MotionSequence {
    let positions = seq
        .positions()
        .iter()
        .map(|v| v + rng.gen_range(-noise..noise))
        .collect();
    MotionSequence::new(seq.skeleton().clone(), seq.fps(), seq.frames(), positions).unwrap()
}

/// Which loss the gradient check exercises.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LossKind {
    Position,
    Laplacian,
    Motion,
    Combined,
}

/// Outcome of a gradient-check run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GradCheckSummary {
    pub trials: usize,
    pub max_rel_error: f64,
    pub threshold: f64,
}

impl GradCheckSummary {
    pub fn passed(&self) -> bool {
        self.max_rel_error.is_finite() && self.max_rel_error <= self.threshold
    }
}

fn rebuilt(seq: &MotionSequence, positions: &[f64]) -> MotionSequence {
    MotionSequence::new(
        seq.skeleton().clone(),
        seq.fps(),
        seq.frames(),
        positions.to_vec(),
    )
    .unwrap()
}

/// Checks the analytic gradient of a loss against central finite differences
/// over seeded random instances. Estimates are ground truth plus noise, so
/// residuals stay away from the non-differentiable zero rows.
pub fn gradcheck_loss(kind: LossKind, trials: usize, seed: u64) -> GradCheckSummary {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for trial in 0..trials {
        let joints = rng.gen_range(1..=4);
        let frames = rng.gen_range(2..=8);
        let skeleton = random_skeleton(&mut rng, joints);
        let gt = random_sequence(&mut rng, &skeleton, frames, 1.0);
        let est = perturbed_sequence(&mut rng, &gt, 0.5);

        let graph = build_graph(&skeleton, frames);
        let variant = if trial % 2 == 0 {
            LaplacianVariant::Combinatorial
        } else {
            LaplacianVariant::RandomWalk
        };
        let laplacian = build_laplacian(&graph, variant);
        let config = LossConfig {
            alpha: 0.8,
            lambda: 0.6,
            laplacian_variant: variant,
            root_relative: trial % 3 == 0,
            ..LossConfig::default()
        };
        let mode = match trial % 3 {
            0 => LossMode::PositionOnly,
            1 => LossMode::PositionPlusMotion,
            _ => LossMode::PositionPlusLaplacian,
        };

        let analytic = match kind {
            LossKind::Position => position_loss(&est, &gt).unwrap(),
            LossKind::Laplacian => laplacian_loss(&est, &gt, &laplacian).unwrap(),
            LossKind::Motion => motion_loss(&est, &gt, &[1, 2, 4, 8]).unwrap(),
            LossKind::Combined => combined_loss(&est, &gt, &config, mode).unwrap(),
        };
        let value_at = |positions: &[f64]| -> f64 {
            let candidate = rebuilt(&est, positions);
            match kind {
                LossKind::Position => position_loss(&candidate, &gt).unwrap().value,
                LossKind::Laplacian => laplacian_loss(&candidate, &gt, &laplacian).unwrap().value,
                LossKind::Motion => motion_loss(&candidate, &gt, &[1, 2, 4, 8]).unwrap().value,
                LossKind::Combined => combined_loss(&candidate, &gt, &config, mode).unwrap().value,
            }
        };
        let numeric = finite_diff_grad(value_at, est.positions(), GRAD_STEP);
        worst = worst.max(max_rel_error(&analytic.grad, &numeric));
    }
    GradCheckSummary {
        trials,
        max_rel_error: worst,
        threshold: GRAD_TOLERANCE,
    }
}

fn random_tiny_spec(rng: &mut impl Rng, joints: usize) -> NetworkSpec {
    let layer_count = rng.gen_range(1..=3);
    let hidden = rng.gen_range(2..=6);
    let mut layers = Vec::with_capacity(layer_count);
    let mut residual = Vec::with_capacity(layer_count);
    for l in 0..layer_count {
        let in_channels = if l == 0 { 2 * joints } else { hidden };
        let out_channels = if l == layer_count - 1 { 3 * joints } else { hidden };
        let kernel_size = *[1usize, 3, 5].get(rng.gen_range(0..3)).unwrap();
        layers.push(crate::tcn::ConvLayerSpec {
            in_channels,
            out_channels,
            kernel_size,
            dilation: rng.gen_range(1..=3),
            has_activation: l != layer_count - 1,
        });
        residual.push(in_channels == out_channels && rng.gen_bool(0.5));
    }
    NetworkSpec { layers, residual }
}

/// Moves every parameter to a generic point. Fresh networks have zero
/// biases, which parks ReLU pre-activations exactly on the kink whenever
/// every incoming activation is clamped; finite differences straddle the
/// kink there and disagree with the subgradient-0 convention.
fn jiggle_parameters(rng: &mut impl Rng, state: &mut NetworkState) {
    for i in 0..state.param_count() {
        let v = state.get_param(i);
        state.set_param(i, v + rng.gen_range(-0.05..0.05));
    }
}

fn random_input2d(rng: &mut impl Rng, joints: usize, frames: usize) -> MotionSequence2D {
    let positions = (0..frames * joints * 2)
        .map(|_| rng.gen_range(-1.0..1.0))
        .collect();
    MotionSequence2D::new(Skeleton::chain(joints).unwrap(), 50.0, frames, positions).unwrap()
}

/// Checks every network parameter gradient (and the input gradient) against
/// finite differences on random tiny networks, via the linear functional
/// `f = <g, output>` whose analytic gradient is exactly `backward(g)`.
pub fn gradcheck_network(trials: usize, seed: u64) -> GradCheckSummary {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for _ in 0..trials {
        let joints = rng.gen_range(1..=4);
        let frames = rng.gen_range(1..=8);
        let spec = random_tiny_spec(&mut rng, joints);
        let net_seed = rng.gen();
        let mut state = NetworkState::init(spec, net_seed).unwrap();
        jiggle_parameters(&mut rng, &mut state);
        let input = random_input2d(&mut rng, joints, frames);
        let projection: Vec<f64> = (0..frames * joints * 3)
            .map(|_| rng.gen_range(-1.0..1.0))
            .collect();

        let (_, cache) = forward_cached(&state, &input).unwrap();
        let analytic = backward(&state, &cache, &projection).unwrap();
        let analytic_params: Vec<f64> = analytic
            .weights
            .iter()
            .zip(&analytic.biases)
            .flat_map(|(w, b)| w.iter().chain(b.iter()).copied())
            .collect();

        // Finite differences over every parameter.
        let param_count = state.param_count();
        let mut numeric_params = Vec::with_capacity(param_count);
        for i in 0..param_count {
            let orig = state.get_param(i);
            state.set_param(i, orig + GRAD_STEP);
            let plus = projected_output(&state, &input, &projection);
            state.set_param(i, orig - GRAD_STEP);
            let minus = projected_output(&state, &input, &projection);
            state.set_param(i, orig);
            numeric_params.push((plus - minus) / (2.0 * GRAD_STEP));
        }
        worst = worst.max(max_rel_error(&analytic_params, &numeric_params));

        // Finite differences over the input.
        let numeric_input = finite_diff_grad(
            |positions| {
                let candidate = MotionSequence2D::new(
                    input.skeleton().clone(),
                    input.fps(),
                    input.frames(),
                    positions.to_vec(),
                )
                .unwrap();
                projected_output(&state, &candidate, &projection)
            },
            input.positions(),
            GRAD_STEP,
        );
        worst = worst.max(max_rel_error(&analytic.input, &numeric_input));
    }
    GradCheckSummary {
        trials,
        max_rel_error: worst,
        threshold: GRAD_TOLERANCE,
    }
}

fn projected_output(state: &NetworkState, input: &MotionSequence2D, projection: &[f64]) -> f64 {
    let out = crate::tcn::forward(state, input).unwrap();
    out.positions()
        .iter()
        .zip(projection)
        .map(|(o, g)| o * g)
        .sum()
}

/// End-to-end wiring check: the gradient of `combined_loss(forward(params))`
/// with respect to the parameters, exactly the quantity a training step
/// assembles, against finite differences.
pub fn gradcheck_training_objective(trials: usize, seed: u64) -> GradCheckSummary {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for trial in 0..trials {
        let joints = rng.gen_range(1..=3);
        let frames = rng.gen_range(2..=6);
        let spec = random_tiny_spec(&mut rng, joints);
        let net_seed = rng.gen();
        let mut state = NetworkState::init(spec, net_seed).unwrap();
        jiggle_parameters(&mut rng, &mut state);
        let input = random_input2d(&mut rng, joints, frames);
        let skeleton = Skeleton::chain(joints).unwrap();
        let target = random_sequence(&mut rng, &skeleton, frames, 1.0);
        let config = LossConfig::default();
        let mode = match trial % 3 {
            0 => LossMode::PositionOnly,
            1 => LossMode::PositionPlusMotion,
            _ => LossMode::PositionPlusLaplacian,
        };

        let (est, cache) = forward_cached(&state, &input).unwrap();
        let loss = combined_loss(&est, &target, &config, mode).unwrap();
        let analytic = backward(&state, &cache, &loss.grad).unwrap();
        let analytic_params: Vec<f64> = analytic
            .weights
            .iter()
            .zip(&analytic.biases)
            .flat_map(|(w, b)| w.iter().chain(b.iter()).copied())
            .collect();

        let mut numeric_params = Vec::with_capacity(state.param_count());
        for i in 0..state.param_count() {
            let orig = state.get_param(i);
            let mut eval = |value: f64| {
                state.set_param(i, value);
                let out = crate::tcn::forward(&state, &input).unwrap();
                combined_loss(&out, &target, &config, mode).unwrap().value
            };
            let plus = eval(orig + GRAD_STEP);
            let minus = eval(orig - GRAD_STEP);
            state.set_param(i, orig);
            numeric_params.push((plus - minus) / (2.0 * GRAD_STEP));
        }
        worst = worst.max(max_rel_error(&analytic_params, &numeric_params));
    }
    GradCheckSummary {
        trials,
        max_rel_error: worst,
        threshold: GRAD_TOLERANCE,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finite_diff_matches_a_quadratic() {
        let f = |v: &[f64]| v[0] * v[0] + 3.0 * v[0] * v[1];
        let g = finite_diff_grad(f, &[2.0, -1.0], 1e-5);
        assert!((g[0] - 1.0).abs() < 1e-8); // 2x + 3y
        assert!((g[1] - 6.0).abs() < 1e-8); // 3x
    }

    #[test]
    fn rel_error_is_zero_for_zero_gradients() {
        assert_eq!(max_rel_error(&[0.0, 0.0], &[0.0, 0.0]), 0.0);
    }

    #[test]
    fn dense_oracle_agrees_with_hand_example() {
        let skeleton = Skeleton::chain(2).unwrap();
        let graph = build_graph(&skeleton, 2);
        let positions = vec![
            0.0, 0.0, 0.0, 1.0, 0.0, 0.0, //
            0.0, 0.0, 1.0, 1.0, 0.0, 1.0,
        ];
        let delta = dense_diff_coords(&graph, LaplacianVariant::Combinatorial, &positions);
        assert_eq!(&delta[0..3], &[-1.0, 0.0, -1.0]);
        assert_eq!(&delta[9..12], &[1.0, 0.0, 1.0]);
    }
}
