//! Acceptance suite: one test per acceptance criterion, each printing a
//! PASS/FAIL line (visible with `--nocapture`).
//!
//! Criterion 4 checks that the published per-action reference rows
//! recompute their printed Avg columns under unweighted averaging. The
//! MPJPE table's printed average (100.62) is NOT the unweighted mean of its
//! printed per-action entries (which is 100.286), so that sub-check fails
//! by construction; see the test for the recomputed values. The other two
//! tables recompute within the stated +-0.01.

use std::path::Path;
use std::process::Command;
use std::time::Instant;

use lapmo_core::check::{
    dense_diff_coords, gradcheck_loss, gradcheck_network, perturbed_sequence, random_sequence,
    random_skeleton, LossKind,
};
use lapmo_core::graph::{build_graph, build_laplacian, diff_coords, LaplacianVariant};
use lapmo_core::harness::{run_ablation, AblationConfig};
use lapmo_core::losses::{laplacian_loss, motion_loss, LossMode};
use lapmo_core::metrics::{mpjacce, mpjpe_protocol1, mpjve, reference};
use lapmo_core::motion::{MotionSequence, MotionSequence2D, Skeleton};
use lapmo_core::synth::{write_corpus, SynthConfig};
use lapmo_core::tcn::{forward, NetworkSpec, NetworkState};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const VARIANTS: [LaplacianVariant; 2] =
    [LaplacianVariant::Combinatorial, LaplacianVariant::RandomWalk];

#[test]
fn criterion_1_gradient_correctness() {
    let start = Instant::now();
    let mut worst_overall = 0.0f64;
    for (label, kind, seed) in [
        ("position_loss", LossKind::Position, 1001u64),
        ("laplacian_loss", LossKind::Laplacian, 2002),
        ("motion_loss", LossKind::Motion, 3003),
        ("combined_loss", LossKind::Combined, 4004),
    ] {
        let summary = gradcheck_loss(kind, 100, seed);
        assert!(
            summary.passed(),
            "{label}: max relative error {} exceeds {}",
            summary.max_rel_error,
            summary.threshold
        );
        worst_overall = worst_overall.max(summary.max_rel_error);
    }
    let net = gradcheck_network(100, 5005);
    assert!(
        net.passed(),
        "network parameters: max relative error {} exceeds {}",
        net.max_rel_error,
        net.threshold
    );
    worst_overall = worst_overall.max(net.max_rel_error);
    let elapsed = start.elapsed();
    assert!(
        elapsed.as_secs_f64() < 120.0,
        "gradient checks took {elapsed:?}, budget is 2 minutes"
    );
    println!(
        "criterion 1 (gradient correctness, 100 instances per family): PASS \
         (max relative error {worst_overall:.3e} <= 1e-4, {elapsed:.2?})"
    );
}

#[test]
fn criterion_2_laplacian_oracle_equivalence() {
    // Hand-derived 4-node instance must match exactly.
    let skeleton = Skeleton::chain(2).unwrap();
    let graph = build_graph(&skeleton, 2);
    let laplacian = build_laplacian(&graph, LaplacianVariant::Combinatorial);
    #[rustfmt::skip]
    let expected_dense = vec![
         2.0, -1.0, -1.0,  0.0,
        -1.0,  2.0,  0.0, -1.0,
        -1.0,  0.0,  2.0, -1.0,
         0.0, -1.0, -1.0,  2.0,
    ];
    assert_eq!(laplacian.to_dense(), expected_dense);
    let positions = vec![
        0.0, 0.0, 0.0, 1.0, 0.0, 0.0, //
        0.0, 0.0, 1.0, 1.0, 0.0, 1.0,
    ];
    let seq = MotionSequence::new(skeleton, 50.0, 2, positions).unwrap();
    let delta = diff_coords(&laplacian, &seq).unwrap();
    assert_eq!(delta.row(0), [-1.0, 0.0, -1.0]);
    assert_eq!(delta.row(1), [1.0, 0.0, -1.0]);
    assert_eq!(delta.row(2), [-1.0, 0.0, 1.0]);
    assert_eq!(delta.row(3), [1.0, 0.0, 1.0]);

    // Sweep instance sizes up to N = 200, both variants, against the dense
    // neighbor-sum oracle.
    let mut rng = ChaCha8Rng::seed_from_u64(0x0AC1E);
    let mut instances = 0usize;
    let mut worst = 0.0f64;
    for joints in 1..=10usize {
        for frames in 1..=20usize {
            if joints * frames > 200 {
                continue;
            }
            let skeleton = random_skeleton(&mut rng, joints);
            let seq = random_sequence(&mut rng, &skeleton, frames, 500.0);
            let graph = build_graph(&skeleton, frames);
            for variant in VARIANTS {
                let sparse =
                    diff_coords(&build_laplacian(&graph, variant), &seq).unwrap();
                let dense = dense_diff_coords(&graph, variant, seq.positions());
                for (s, d) in sparse.data().iter().zip(&dense) {
                    worst = worst.max((s - d).abs());
                }
            }
            instances += 1;
        }
    }
    // Humanoid topology at the N = 200 boundary sizes.
    for frames in [3usize, 7, 11] {
        let skeleton = Skeleton::humanoid17();
        let seq = random_sequence(&mut rng, &skeleton, frames, 500.0);
        let graph = build_graph(&skeleton, frames);
        for variant in VARIANTS {
            let sparse = diff_coords(&build_laplacian(&graph, variant), &seq).unwrap();
            let dense = dense_diff_coords(&graph, variant, seq.positions());
            for (s, d) in sparse.data().iter().zip(&dense) {
                worst = worst.max((s - d).abs());
            }
        }
        instances += 1;
    }
    assert!(worst <= 1e-12, "sparse/dense deviation {worst}");
    println!(
        "criterion 2 (laplacian oracle equivalence, {instances} instances, N <= 200, both \
         variants): PASS (max deviation {worst:.3e} <= 1e-12, hand-derived matrix exact)"
    );
}

#[test]
fn criterion_3_kernel_and_invariance_suite() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x1497);
    let mut checks = 0usize;
    for _ in 0..50 {
        let joints = rng.gen_range(1..=6);
        let frames = rng.gen_range(3..=10);
        let skeleton = random_skeleton(&mut rng, joints);
        let gt = random_sequence(&mut rng, &skeleton, frames, 50.0);
        let est = perturbed_sequence(&mut rng, &gt, 10.0);
        let shift = [
            rng.gen_range(-100.0..100.0),
            rng.gen_range(-100.0..100.0),
            rng.gen_range(-100.0..100.0),
        ];
        let graph = build_graph(&skeleton, frames);

        // L * 1 = 0 within 1e-12.
        for variant in VARIANTS {
            let laplacian = build_laplacian(&graph, variant);
            let ones = vec![1.0; laplacian.n()];
            for v in laplacian.multiply(&ones, 1).unwrap() {
                assert!(v.abs() <= 1e-12, "L*1 component {v}");
            }
        }

        // Laplacian and motion losses: invariant under estimate translation.
        let est_shifted = est.translated(shift);
        for variant in VARIANTS {
            let laplacian = build_laplacian(&graph, variant);
            let a = laplacian_loss(&est, &gt, &laplacian).unwrap().value;
            let b = laplacian_loss(&est_shifted, &gt, &laplacian).unwrap().value;
            assert!((a - b).abs() <= 1e-9, "laplacian loss moved {a} -> {b}");
        }
        let a = motion_loss(&est, &gt, &[1, 2, 4, 8]).unwrap().value;
        let b = motion_loss(&est_shifted, &gt, &[1, 2, 4, 8]).unwrap().value;
        assert!((a - b).abs() <= 1e-9, "motion loss moved {a} -> {b}");

        // MPJVE: invariant under a constant offset.
        let a = mpjve(&est, &gt).unwrap();
        let b = mpjve(&est_shifted, &gt).unwrap();
        assert!((a - b).abs() <= 1e-9, "mpjve moved {a} -> {b}");

        // MPJAccE: additionally invariant under linear drift.
        let mut drifted = est.positions().to_vec();
        for t in 0..frames {
            for j in 0..joints {
                for c in 0..3 {
                    drifted[(t * joints + j) * 3 + c] += shift[c] * t as f64;
                }
            }
        }
        let drifted = MotionSequence::new(skeleton.clone(), est.fps(), frames, drifted).unwrap();
        let a = mpjacce(&est, &gt).unwrap();
        let b = mpjacce(&drifted, &gt).unwrap();
        assert!((a - b).abs() <= 1e-9, "mpjacce moved {a} -> {b}");

        // MPJPE protocol: invariant under independent per-frame translations.
        let mut per_frame = est.positions().to_vec();
        for t in 0..frames {
            let frame_shift = [
                rng.gen_range(-200.0..200.0),
                rng.gen_range(-200.0..200.0),
                rng.gen_range(-200.0..200.0),
            ];
            for j in 0..joints {
                for c in 0..3 {
                    per_frame[(t * joints + j) * 3 + c] += frame_shift[c];
                }
            }
        }
        let per_frame = MotionSequence::new(skeleton, est.fps(), frames, per_frame).unwrap();
        let a = mpjpe_protocol1(&est, &gt).unwrap();
        let b = mpjpe_protocol1(&per_frame, &gt).unwrap();
        assert!((a - b).abs() <= 1e-9, "mpjpe moved {a} -> {b}");
        checks += 1;
    }
    println!(
        "criterion 3 (kernel and invariance suite, {checks} random instances): PASS"
    );
}

#[test]
fn criterion_4_paper_table_arithmetic() {
    let mean = |v: &[f64; 15]| v.iter().sum::<f64>() / 15.0;
    let mut failures = Vec::new();
    for (label, values, printed) in [
        (
            "MPJPE table, laplacian row",
            &reference::MPJPE_LAPLACIAN,
            reference::MPJPE_PRINTED_AVG[2],
        ),
        (
            "MPJVE table, laplacian row",
            &reference::MPJVE_LAPLACIAN,
            reference::MPJVE_LAPLACIAN_PRINTED_AVG,
        ),
        (
            "MPJAccE table, laplacian row",
            &reference::MPJACCE_LAPLACIAN,
            reference::MPJACCE_LAPLACIAN_PRINTED_AVG,
        ),
    ] {
        let recomputed = mean(values);
        let ok = (recomputed - printed).abs() <= 0.01;
        println!(
            "criterion 4 [{label}]: {} (recomputed {recomputed:.4} vs printed {printed} +- 0.01)",
            if ok { "PASS" } else { "FAIL" }
        );
        if !ok {
            failures.push(format!(
                "{label}: unweighted mean of the 15 printed per-action values is \
                 {recomputed:.4}, not {printed} +- 0.01"
            ));
        }
    }
    assert!(
        failures.is_empty(),
        "printed Avg columns that do not recompute under unweighted averaging:\n{}",
        failures.join("\n")
    );
}

#[test]
fn criterion_5_directional_ablation() {
    let start = Instant::now();
    let dir = tempfile::tempdir().unwrap();
    let corpus_dir = dir.path().join("corpus");
    // Default corpus: 5-joint chain, T = 64, 200 train / 50 test.
    let synth = SynthConfig::default();
    assert_eq!(synth.joints, 5);
    assert_eq!(synth.frames, 64);
    write_corpus(&synth, 250, 200, &corpus_dir).unwrap();

    let config = AblationConfig {
        corpus_dir,
        output_dir: dir.path().join("out"),
        modes: vec![LossMode::PositionOnly, LossMode::PositionPlusLaplacian],
        seeds: (0..10).collect(),
        ..AblationConfig::default()
    };
    assert_eq!(config.epochs, 30);
    assert_eq!(config.batch_size, 16);
    let result = run_ablation(&config).unwrap();
    assert!(result.all_finite(), "some cells diverged");

    let summary = |mode: LossMode| result.summary_for(mode).unwrap();
    let baseline = summary(LossMode::PositionOnly);
    let laplacian = summary(LossMode::PositionPlusLaplacian);
    let med_ve = (
        laplacian.median_mpjve.unwrap(),
        baseline.median_mpjve.unwrap(),
    );
    let med_acc = (
        laplacian.median_mpjacce.unwrap(),
        baseline.median_mpjacce.unwrap(),
    );

    let cell = |mode: LossMode, seed: u64| {
        result
            .cells
            .iter()
            .find(|c| c.mode == mode && c.seed == seed)
            .unwrap()
    };
    let mut ve_wins = 0usize;
    let mut acc_wins = 0usize;
    for seed in 0..10u64 {
        let p = cell(LossMode::PositionOnly, seed);
        let l = cell(LossMode::PositionPlusLaplacian, seed);
        ve_wins += (l.mpjve.unwrap() <= p.mpjve.unwrap()) as usize;
        acc_wins += (l.mpjacce.unwrap() <= p.mpjacce.unwrap()) as usize;
    }
    let elapsed = start.elapsed();

    assert!(
        med_acc.0 <= med_acc.1,
        "median MPJAccE: laplacian {} vs baseline {}",
        med_acc.0,
        med_acc.1
    );
    assert!(
        med_ve.0 <= med_ve.1,
        "median MPJVE: laplacian {} vs baseline {}",
        med_ve.0,
        med_ve.1
    );
    assert!(acc_wins >= 7, "MPJAccE paired wins {acc_wins}/10 < 7");
    assert!(ve_wins >= 7, "MPJVE paired wins {ve_wins}/10 < 7");
    assert!(
        elapsed.as_secs_f64() < 1800.0,
        "ablation took {elapsed:?}, budget is 30 minutes"
    );
    println!(
        "criterion 5 (directional ablation, 10 seeds): PASS (median MPJVE {:.4} <= {:.4}, \
         median MPJAccE {:.5} <= {:.5}, paired wins MPJVE {ve_wins}/10, MPJAccE {acc_wins}/10, \
         {elapsed:.0?})",
        med_ve.0, med_ve.1, med_acc.0, med_acc.1
    );
}

#[test]
fn criterion_6_sequence_length_contract() {
    let joints = 5;
    let state = NetworkState::init(NetworkSpec::desk_default(joints), 0).unwrap();
    let skeleton = Skeleton::chain(joints).unwrap();
    for t_len in [1usize, 2, 7, 64, 301] {
        let positions = (0..t_len * joints * 2)
            .map(|i| (i as f64 * 0.37).sin() * 100.0)
            .collect();
        let input = MotionSequence2D::new(skeleton.clone(), 50.0, t_len, positions).unwrap();
        let out = forward(&state, &input).unwrap();
        assert_eq!(out.frames(), t_len, "length not preserved for T = {t_len}");
    }
    println!(
        "criterion 6 (sequence-length contract, T in {{1, 2, 7, 64, 301}}): PASS"
    );
}

#[test]
fn criterion_7_cli_determinism() {
    let lapmo = env!("CARGO_BIN_EXE_lapmo");
    let dir = tempfile::tempdir().unwrap();
    let run = |args: &[&str]| {
        let output = Command::new(lapmo)
            .args(args)
            .current_dir(dir.path())
            .output()
            .expect("spawn lapmo");
        assert!(
            output.status.success(),
            "lapmo {args:?} failed:\n{}",
            String::from_utf8_lossy(&output.stderr)
        );
    };

    std::fs::write(
        dir.path().join("synth.json"),
        r#"{"frames": 16, "joints": 3}"#,
    )
    .unwrap();
    for out in ["corpus_a", "corpus_b"] {
        run(&[
            "synth", "--config", "synth.json", "--count", "8", "--train", "6", "--out", out,
        ]);
    }
    assert_dirs_identical(&dir.path().join("corpus_a"), &dir.path().join("corpus_b"));

    for (corpus, out) in [("corpus_a", "abl_a"), ("corpus_a", "abl_b")] {
        let config = format!(
            r#"{{"corpus_dir": "{corpus}", "output_dir": "{out}",
                "modes": ["position_only", "position_plus_laplacian"],
                "seeds": [0], "epochs": 2}}"#
        );
        let path = dir.path().join(format!("{out}.json"));
        std::fs::write(&path, config).unwrap();
        run(&["ablate", "--config", path.to_str().unwrap()]);
    }
    let mut compared = 0usize;
    for file in ["report.md", "report.csv", "result.json"] {
        let a = std::fs::read(dir.path().join("abl_a").join(file)).unwrap();
        let b = std::fs::read(dir.path().join("abl_b").join(file)).unwrap();
        assert_eq!(a, b, "{file} differs between identical ablation runs");
        compared += 1;
    }

    for out in ["eval_a.csv", "eval_b.csv"] {
        run(&["eval", "--gt", "corpus_a", "--est", "corpus_b", "--out", out]);
    }
    let a = std::fs::read(dir.path().join("eval_a.csv")).unwrap();
    let b = std::fs::read(dir.path().join("eval_b.csv")).unwrap();
    assert_eq!(a, b, "eval reports differ between identical runs");

    println!(
        "criterion 7 (CLI determinism: synth corpus, {compared} ablation report files, eval \
         report byte-identical across reruns): PASS"
    );
}

fn assert_dirs_identical(a: &Path, b: &Path) {
    let list = |d: &Path| {
        let mut names: Vec<String> = std::fs::read_dir(d)
            .unwrap()
            .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
            .collect();
        names.sort();
        names
    };
    let names = list(a);
    assert_eq!(names, list(b), "directory listings differ");
    for name in names {
        let x = std::fs::read(a.join(&name)).unwrap();
        let y = std::fs::read(b.join(&name)).unwrap();
        assert_eq!(x, y, "{name} differs");
    }
}
